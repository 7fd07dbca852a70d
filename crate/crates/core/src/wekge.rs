//! Maps between the wave equation `rho(z) psi_tt = psi_zz` and the Klein-Gordon form
//! `phi_tt = phi_xx - V(x) phi`, with `dx/dz = n = sqrt(rho)` and `phi = sqrt(n) psi`.

use crate::bilinear::Grid;
use crate::error::{Error, Result};
use crate::potential::{Decay, NumericTable, Potential};
use crate::scalar::{ii, lit, to_f64, Cx, Real};

/// A density sampled on a uniform `z` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeProfile<T> {
    z0: T,
    h: T,
    rho: Vec<T>,
}

impl<T: Real> WeProfile<T> {
    /// Full-line profile: positive, and `rho -> 1` at both ends within 1e-8.
    pub fn new(z0: T, h: T, rho: Vec<T>) -> Result<Self> {
        let p = Self::on_window(z0, h, rho)?;
        let n = p.rho.len();
        for v in [p.rho[0], p.rho[n - 1]] {
            if (v - T::one()).abs() > lit(1e-8) {
                return Err(Error::InvalidParameter(format!("density must tend to 1 at the ends, found {}", to_f64(v))));
            }
        }
        Ok(p)
    }

    /// Profile sampled on part of the line; only positivity is checked.
    pub fn on_window(z0: T, h: T, rho: Vec<T>) -> Result<Self> {
        if rho.len() < 8 || !(h > T::zero()) {
            return Err(Error::InvalidParameter("density needs at least 8 samples and a positive spacing".into()));
        }
        if let Some(&bad) = rho.iter().find(|&&r| !(r > T::zero())) {
            return Err(Error::NonPositiveDensity(to_f64(bad)));
        }
        Ok(Self { z0, h, rho })
    }

    /// Sample `f` at `count + 1` points on `[lo, hi]`.
    pub fn from_fn<F: Fn(T) -> T>(f: F, lo: T, hi: T, count: usize) -> Result<Self> {
        let h = (hi - lo) / lit(count as f64);
        Self::new(lo, h, (0..=count).map(|i| f(lo + h * lit(i as f64))).collect())
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn z(&self, i: usize) -> T {
        self.z0 + self.h * lit(i as f64)
    }

    pub fn zs(&self) -> Vec<T> {
        (0..self.rho.len()).map(|i| self.z(i)).collect()
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn n(&self) -> Vec<T> {
        self.rho.iter().map(|r| r.sqrt()).collect()
    }
}

fn d1<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let c = |a: [f64; 5], o: [usize; 5]| -> T { a.iter().zip(o).fold(T::zero(), |s, (&w, i)| s + lit::<T>(w) * f[i]) };
    (0..n)
        .map(|i| {
            let v = if i >= 2 && i + 2 < n {
                c([1.0, -8.0, 8.0, -1.0, 0.0], [i - 2, i - 1, i + 1, i + 2, i])
            } else if i == 0 {
                c([-25.0, 48.0, -36.0, 16.0, -3.0], [0, 1, 2, 3, 4])
            } else if i == 1 {
                c([-3.0, -10.0, 18.0, -6.0, 1.0], [0, 1, 2, 3, 4])
            } else if i == n - 1 {
                -c([-25.0, 48.0, -36.0, 16.0, -3.0], [n - 1, n - 2, n - 3, n - 4, n - 5])
            } else {
                -c([-3.0, -10.0, 18.0, -6.0, 1.0], [n - 1, n - 2, n - 3, n - 4, n - 5])
            };
            v / (lit::<T>(12.0) * h)
        })
        .collect()
}

fn d2<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let c = |a: [f64; 6], o: [usize; 6]| -> T { a.iter().zip(o).fold(T::zero(), |s, (&w, i)| s + lit::<T>(w) * f[i]) };
    (0..n)
        .map(|i| {
            let v = if i >= 2 && i + 2 < n {
                c([-1.0, 16.0, -30.0, 16.0, -1.0, 0.0], [i - 2, i - 1, i, i + 1, i + 2, i])
            } else if i == 0 {
                c([45.0, -154.0, 214.0, -156.0, 61.0, -10.0], [0, 1, 2, 3, 4, 5])
            } else if i == 1 {
                c([10.0, -15.0, -4.0, 14.0, -6.0, 1.0], [0, 1, 2, 3, 4, 5])
            } else if i == n - 1 {
                c([45.0, -154.0, 214.0, -156.0, 61.0, -10.0], [n - 1, n - 2, n - 3, n - 4, n - 5, n - 6])
            } else {
                c([10.0, -15.0, -4.0, 14.0, -6.0, 1.0], [n - 1, n - 2, n - 3, n - 4, n - 5, n - 6])
            };
            v / (lit::<T>(12.0) * h * h)
        })
        .collect()
}

/// Running integral of uniformly sampled `f`, fourth order, starting at 0.
fn cumulative<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let mut out = vec![T::zero(); n];
    let k = h / lit(24.0);
    for i in 0..n - 1 {
        let piece = if i == 0 {
            lit::<T>(9.0) * f[0] + lit::<T>(19.0) * f[1] - lit::<T>(5.0) * f[2] + f[3]
        } else if i == n - 2 {
            f[n - 4] - lit::<T>(5.0) * f[n - 3] + lit::<T>(19.0) * f[n - 2] + lit::<T>(9.0) * f[n - 1]
        } else {
            -f[i - 1] + lit::<T>(13.0) * (f[i] + f[i + 1]) - f[i + 2]
        };
        out[i + 1] = out[i] + piece * k;
    }
    out
}

/// The Klein-Gordon image of a density.
#[derive(Debug, Clone)]
pub struct KgeImage<T: Real> {
    pub potential: Potential<T>,
    /// `x(z)` at the profile nodes, with `x(0) = 0`.
    pub x: Vec<T>,
    /// `sqrt(n)` at the profile nodes.
    pub prefactor: Vec<T>,
    /// `V` at the profile nodes.
    pub v: Vec<T>,
}

/// `V = n''/(2 n^3) - 3 n'^2/(4 n^4)` on the image of the profile grid.
pub fn we_to_kge<T: Real>(profile: &WeProfile<T>) -> Result<KgeImage<T>> {
    let n = profile.n();
    let h = profile.h;
    let dn = d1(&n, h);
    let ddn = d2(&n, h);
    // second differences of a smooth profile do not grow under refinement
    let coarse: Vec<T> = n.iter().step_by(2).copied().collect();
    if coarse.len() >= 8 {
        let fine_max = ddn.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        let coarse_max = d2(&coarse, h + h).iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if fine_max > lit::<T>(1.8) * coarse_max + lit(1e-6) {
            return Err(Error::InsufficientSmoothness);
        }
    }
    let mut x = cumulative(&n, h);
    // x(0) = 0 by cubic Hermite interpolation with dx/dz = n
    let zs = profile.zs();
    let last = zs.len() - 1;
    let shift = if T::zero() <= zs[0] {
        x[0]
    } else if T::zero() >= zs[last] {
        x[last]
    } else {
        let i = ((-profile.z0) / h).floor().to_usize().unwrap_or(0).min(last - 1);
        let t = (T::zero() - zs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        (two * t3 - three * t2 + T::one()) * x[i] + (t3 - two * t2 + t) * h * n[i] + (three * t2 - two * t3) * x[i + 1] + (t3 - t2) * h * n[i + 1]
    };
    for v in x.iter_mut() {
        *v = *v - shift;
    }
    let v: Vec<T> = (0..n.len())
        .map(|i| ddn[i] / (lit::<T>(2.0) * n[i].powi(3)) - lit::<T>(0.75) * dn[i] * dn[i] / n[i].powi(4))
        .collect();
    let prefactor = n.iter().map(|v| v.sqrt()).collect();
    let potential = Potential::numeric(NumericTable::new(x.clone(), v.clone())?);
    Ok(KgeImage { potential, x, prefactor, v })
}

/// How the solution of `H q = 0` with `q -> 1` on the right behaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeOutcome<T> {
    /// `q` tends to the constant `left_value` on the left: the whole line maps to the whole line.
    FullLine { left_value: T },
    /// `q` grows linearly on the left: the line maps onto `z > z_min`.
    SemiInfinite { z_min: T },
    /// `q` has a node at `x_node`, so `H` has a bound state.
    BoundStateObstruction { x_node: T },
}

/// Result of the inverse map.
#[derive(Debug, Clone)]
pub struct WeImage<T> {
    pub outcome: WeOutcome<T>,
    /// Density on a window covering the support (absent on obstruction).
    pub profile: Option<WeProfile<T>>,
    /// `x(z)` at the profile nodes.
    pub x: Vec<T>,
}

/// Options for [`kge_to_we`].
#[derive(Debug, Clone, Copy)]
pub struct WeOptions<T> {
    /// Spacing of the `x` integration grid and the output `z` grid.
    pub dz: T,
    /// `|q'|` at the left edge below this counts as tending to a constant.
    pub flat_tol: T,
    /// Flat margin added on both sides of the support, in `z` units.
    pub pad: T,
}

impl<T: Real> Default for WeOptions<T> {
    fn default() -> Self {
        Self { dz: lit(1e-3), flat_tol: lit(1e-7), pad: T::one() }
    }
}

#[derive(Clone, Copy)]
struct Node<T> {
    x: T,
    q: T,
    p: T,
    z: T,
}

/// RK4 on `(q, q', z)` in `x` with `q'' = V q`, `z' = q^-2`.
fn step_x<T: Real, F: Fn(T) -> T>(v: &F, s: Node<T>, dx: T) -> Node<T> {
    let f = |x: T, q: T, p: T| (p, v(x) * q, T::one() / (q * q));
    let half = dx / lit(2.0);
    let k1 = f(s.x, s.q, s.p);
    let k2 = f(s.x + half, s.q + half * k1.0, s.p + half * k1.1);
    let k3 = f(s.x + half, s.q + half * k2.0, s.p + half * k2.1);
    let k4 = f(s.x + dx, s.q + dx * k3.0, s.p + dx * k3.1);
    let sixth = dx / lit(6.0);
    Node {
        x: s.x + dx,
        q: s.q + sixth * (k1.0 + lit::<T>(2.0) * (k2.0 + k3.0) + k4.0),
        p: s.p + sixth * (k1.1 + lit::<T>(2.0) * (k2.1 + k3.1) + k4.1),
        z: s.z + sixth * (k1.2 + lit::<T>(2.0) * (k2.2 + k3.2) + k4.2),
    }
}

/// RK4 on `(x, q, q')` in `z`: `x_z = q^2`, `q_z = q' q^2`, `q'_z = V q^3`.
fn step_z<T: Real, F: Fn(T) -> T>(v: &F, s: Node<T>, dz: T) -> Node<T> {
    let f = |x: T, q: T, p: T| {
        let q2 = q * q;
        (q2, p * q2, v(x) * q * q2)
    };
    let half = dz / lit(2.0);
    let k1 = f(s.x, s.q, s.p);
    let k2 = f(s.x + half * k1.0, s.q + half * k1.1, s.p + half * k1.2);
    let k3 = f(s.x + half * k2.0, s.q + half * k2.1, s.p + half * k2.2);
    let k4 = f(s.x + dz * k3.0, s.q + dz * k3.1, s.p + dz * k3.2);
    let sixth = dz / lit(6.0);
    Node {
        x: s.x + sixth * (k1.0 + lit::<T>(2.0) * (k2.0 + k3.0) + k4.0),
        q: s.q + sixth * (k1.1 + lit::<T>(2.0) * (k2.1 + k3.1) + k4.1),
        p: s.p + sixth * (k1.2 + lit::<T>(2.0) * (k2.2 + k3.2) + k4.2),
        z: s.z + dz,
    }
}

const SUBSTEPS: usize = 4;

/// Inverse map: solve `H q = 0` from the right with `q -> 1`, then `dz/dx = q^-2`, `rho = q^4`.
pub fn kge_to_we<T: Real>(p: &Potential<T>, opts: &WeOptions<T>) -> Result<WeImage<T>> {
    let s = p.support();
    for d in [s.left, s.right] {
        if let Decay::Algebraic { .. } = d {
            return Err(Error::InvalidParameter("the inverse map needs a compact or exponential tail".into()));
        }
    }
    let (mut lo, mut hi) = (s.left.edge(), s.right.edge());
    if hi - lo < lit(1e-12) {
        lo = -T::one();
        hi = T::one();
    }
    let mut brk = vec![lo, hi];
    brk.extend(p.singularities().iter().copied().filter(|&x| x > lo && x < hi));
    if lo < T::zero() && hi > T::zero() {
        brk.push(T::zero());
    }
    brk.sort_by(|a, b| a.partial_cmp(b).unwrap());
    brk.dedup();

    // integrate leftwards, piece by piece
    let mut nodes = vec![Node { x: hi, q: T::one(), p: T::zero(), z: T::zero() }];
    for w in brk.windows(2).rev() {
        let (a, b) = (w[0], w[1]);
        let vf = |x: T| if x >= b { p.value_left(b) } else if x <= a { p.value(a) } else { p.value(x) };
        let count = ((b - a) / opts.dz).ceil().to_usize().unwrap_or(1).max(1);
        let dx = -(b - a) / lit((count * SUBSTEPS) as f64);
        for k in 0..count {
            let mut st = *nodes.last().unwrap();
            for _ in 0..SUBSTEPS {
                let next = step_x(&vf, st, dx);
                if !(next.q > T::zero()) {
                    let x_node = st.x - st.q / st.p;
                    return Ok(WeImage { outcome: WeOutcome::BoundStateObstruction { x_node }, profile: None, x: Vec::new() });
                }
                st = next;
            }
            if k == count - 1 {
                st.x = a;
            }
            nodes.push(st);
        }
    }
    nodes.reverse();
    // z(0) = 0 when the origin is on the grid, else z(lo) = 0
    let z_ref = nodes.iter().find(|n| n.x == T::zero()).map(|n| n.z).unwrap_or(nodes[0].z);
    for n in nodes.iter_mut() {
        n.z = n.z - z_ref;
    }
    let left = nodes[0];
    let right = *nodes.last().unwrap();
    let outcome = if left.p.abs() <= opts.flat_tol {
        WeOutcome::FullLine { left_value: left.q }
    } else if left.p < T::zero() {
        WeOutcome::SemiInfinite { z_min: left.z + T::one() / (left.p * left.q) }
    } else {
        let x_node = left.x - left.q / left.p;
        return Ok(WeImage { outcome: WeOutcome::BoundStateObstruction { x_node }, profile: None, x: Vec::new() });
    };

    let pad_left = match outcome {
        WeOutcome::SemiInfinite { z_min } => opts.pad.min((left.z - z_min) / lit(2.0)),
        _ => opts.pad,
    };
    let z_start = left.z - pad_left;
    let z_end = right.z + opts.pad;
    let count = ((z_end - z_start) / opts.dz).ceil().to_usize().unwrap_or(8).max(8);
    let h = (z_end - z_start) / lit(count as f64);
    let mut rho = Vec::with_capacity(count + 1);
    let mut xs = Vec::with_capacity(count + 1);
    let mut j = 0usize;
    for k in 0..=count {
        let z = z_start + h * lit(k as f64);
        let (x, q) = if z >= right.z {
            (right.x + (z - right.z), T::one())
        } else if z <= left.z {
            if left.p == T::zero() {
                (left.x + (z - left.z) * left.q * left.q, left.q)
            } else {
                let q = T::one() / (T::one() / left.q - left.p * (z - left.z));
                (left.x + (q - left.q) / left.p, q)
            }
        } else {
            while j + 1 < nodes.len() - 1 && nodes[j + 1].z <= z {
                j += 1;
            }
            let (a, b) = (nodes[j].x, nodes[j + 1].x);
            // nodes bracketing a jump share the piece of the left node
            let vf = |x: T| if x >= b { p.value_left(b) } else if x <= a { p.value(a) } else { p.value(x) };
            let dz = (z - nodes[j].z) / lit(SUBSTEPS as f64);
            let mut st = nodes[j];
            for _ in 0..SUBSTEPS {
                st = step_z(&vf, st, dz);
            }
            (st.x, st.q)
        };
        xs.push(x);
        rho.push(q.powi(4));
    }
    let profile = WeProfile::on_window(z_start, h, rho)?;
    Ok(WeImage { outcome, profile: Some(profile), x: xs })
}

/// WE two-component state `(psi, rho psi_t)` mapped to `(sqrt(n) psi, n^(-3/2) rho psi_t)`.
pub fn map_state<T: Real>(profile: &WeProfile<T>, psi1: &[Cx<T>], psi2: &[Cx<T>]) -> (Vec<Cx<T>>, Vec<Cx<T>>) {
    let n = profile.n();
    let a = psi1.iter().zip(&n).map(|(&v, &m)| v * m.sqrt()).collect();
    let b = psi2.iter().zip(&n).map(|(&v, &m)| v / (m * m.sqrt())).collect();
    (a, b)
}

/// `int f dx` over a strictly increasing, nonuniform grid by piecewise quadratics.
fn integrate_nonuniform<T: Real>(x: &[T], f: &[Cx<T>]) -> Cx<T> {
    // exact integral over [x[i], x[i+1]] of the quadratic through points k..k+2
    let quad = |k: usize, i: usize| -> Cx<T> {
        let (x0, x1, x2) = (x[k], x[k + 1], x[k + 2]);
        let d1 = (f[k + 1] - f[k]) / (x1 - x0);
        let d12 = (f[k + 2] - f[k + 1]) / (x2 - x1);
        let d2 = (d12 - d1) / (x2 - x0);
        // P = f0 + d1 (t - x0) + d2 (t - x0)(t - x1)
        let prim = |t: T| -> Cx<T> {
            let u = t - x0;
            let cubic = u * u * u / lit(3.0) - (x1 - x0) * u * u / lit(2.0);
            f[k] * u + d1 * (u * u / lit(2.0)) + d2 * cubic
        };
        prim(x[i + 1]) - prim(x[i])
    };
    let n = x.len();
    let mut acc = Cx::new(T::zero(), T::zero());
    let mut i = 0;
    while i + 2 < n {
        acc = acc + quad(i, i) + quad(i, i + 1);
        i += 2;
    }
    if i + 1 < n {
        acc = acc + quad(n - 3, n - 2);
    }
    acc
}

/// `|(mapped u, mapped v)_KGE - (u, v)_WE|` and the scale of the terms involved.
/// States are `(psi, rho psi_t)` on the profile grid; the KGE side is integrated over `x(z)`.
pub fn map_state_check<T: Real>(profile: &WeProfile<T>, image: &KgeImage<T>, u: (&[Cx<T>], &[Cx<T>]), v: (&[Cx<T>], &[Cx<T>])) -> Result<(T, T)> {
    let m = profile.len();
    for s in [u.0, u.1, v.0, v.1] {
        if s.len() != m {
            return Err(Error::GridMismatch);
        }
    }
    let i = ii::<T>();
    let grid = Grid::uniform(profile.z(0), profile.z(m - 1), m - 1);
    let fz: Vec<Cx<T>> = (0..m).map(|k| u.0[k] * v.1[k] + u.1[k] * v.0[k]).collect();
    let we = i * (grid.integrate(&fz) + u.0[0] * v.0[0] + u.0[m - 1] * v.0[m - 1]);
    let (a1, a2) = map_state(profile, u.0, u.1);
    let (b1, b2) = map_state(profile, v.0, v.1);
    let fx: Vec<Cx<T>> = (0..m).map(|k| a1[k] * b2[k] + a2[k] * b1[k]).collect();
    let kge = i * (integrate_nonuniform(&image.x, &fx) + a1[0] * b1[0] + a1[m - 1] * b1[m - 1]);
    let abs: Vec<Cx<T>> = fz.iter().map(|z| Cx::new(z.norm(), T::zero())).collect();
    let scale = grid.integrate(&abs).re + (u.0[0] * v.0[0]).norm() + (u.0[m - 1] * v.0[m - 1]).norm();
    Ok(((kge - we).norm(), scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_polynomials() {
        let h = 0.1;
        let f: Vec<f64> = (0..12).map(|i| (i as f64 * h).powi(4)).collect();
        let a = d1(&f, h);
        let b = d2(&f, h);
        for i in 0..12 {
            let x = i as f64 * h;
            assert!((a[i] - 4.0 * x.powi(3)).abs() < 1e-10, "{i}");
            assert!((b[i] - 12.0 * x * x).abs() < 1e-9, "{i}");
        }
        let c = cumulative(&f.iter().map(|_| 1.0).collect::<Vec<_>>(), h);
        assert!((c[11] - 1.1).abs() < 1e-14);
        let g: Vec<f64> = (0..12).map(|i| (i as f64 * h).powi(3)).collect();
        let c = cumulative(&g, h);
        assert!((c[11] - 1.1f64.powi(4) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn nonuniform_quadrature_is_exact_for_quadratics() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.3).powf(1.3)).collect();
        let f: Vec<Cx<f64>> = x.iter().map(|&t| Cx::new(t * t - t, 2.0 * t)).collect();
        let b = *x.last().unwrap();
        let want = Cx::new(b.powi(3) / 3.0 - b * b / 2.0, b * b);
        assert!((integrate_nonuniform(&x, &f) - want).norm() < 1e-12);
    }
}
