//! The bilinear map on two-component states `(psi, d_t psi)`, QNM norms, projections and
//! Jordan-block normalization.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::potential::{Decay, Potential};
use crate::propagation::{propagate_outgoing, Side};
use crate::scalar::{ii, lit, re, to_f64, Cx, Real};
use crate::spectral::{root_order, wronskian_value, Mode, SolverOptions, Which};
use crate::susy::Generator;

/// Sample points made of uniform pieces that meet at shared nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    x: Vec<T>,
    /// Simpson weights, summed over the pieces.
    weights: Vec<T>,
    /// `(start, end)` node indices of each piece, inclusive.
    pieces: Vec<(usize, usize)>,
}

fn simpson<T: Real>(h: T, n: usize) -> Vec<T> {
    // n intervals; Simpson 3/8 on the last three when n is odd
    let mut w = vec![T::zero(); n + 1];
    let third = h / lit(3.0);
    let simpson_end = if n % 2 == 0 { n } else if n >= 3 { n - 3 } else { 0 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += third;
        w[i + 1] += lit::<T>(4.0) * third;
        w[i + 2] += third;
        i += 2;
    }
    if n % 2 == 1 {
        if n >= 3 {
            let e = lit::<T>(3.0) * h / lit(8.0);
            let s = simpson_end;
            w[s] += e;
            w[s + 1] += lit::<T>(3.0) * e;
            w[s + 2] += lit::<T>(3.0) * e;
            w[s + 3] += e;
        } else {
            w[0] += h / lit(2.0);
            w[1] += h / lit(2.0);
        }
    }
    w
}

impl<T: Real> Grid<T> {
    /// One uniform piece with `n` intervals.
    pub fn uniform(lo: T, hi: T, n: usize) -> Self {
        Self::from_breaks(&[lo, hi], &[n])
    }

    fn from_breaks(brk: &[T], counts: &[usize]) -> Self {
        let mut x = vec![brk[0]];
        let mut weights = vec![T::zero()];
        let mut pieces = Vec::new();
        for (k, w) in brk.windows(2).enumerate() {
            let n = counts[k].max(2);
            let start = x.len() - 1;
            let h = (w[1] - w[0]) / lit(n as f64);
            let sw = simpson(h, n);
            weights[start] += sw[0];
            for i in 1..=n {
                x.push(if i == n { w[1] } else { w[0] + h * lit(i as f64) });
                weights.push(sw[i]);
            }
            pieces.push((start, start + n));
        }
        Self { x, weights, pieces }
    }

    /// `[lo, hi]` split at the singularities of `p`, about `density` intervals per unit length.
    pub fn for_potential(p: &Potential<T>, lo: T, hi: T, density: T) -> Self {
        let mut brk = vec![lo, hi];
        brk.extend(p.singularities().iter().copied().filter(|&s| s > lo && s < hi));
        brk.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let counts: Vec<usize> = brk
            .windows(2)
            .map(|w| {
                let n = ((w[1] - w[0]) * density).ceil().to_usize().unwrap_or(2).max(4);
                n + n % 2
            })
            .collect();
        Self::from_breaks(&brk, &counts)
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn lo(&self) -> T {
        self.x[0]
    }

    pub fn hi(&self) -> T {
        self.x[self.x.len() - 1]
    }

    pub fn integrate(&self, f: &[Cx<T>]) -> Cx<T> {
        self.weights.iter().zip(f).fold(Cx::new(T::zero(), T::zero()), |a, (&w, &v)| a + v * w)
    }

    /// Fourth-order second derivative, one-sided near piece ends.
    pub fn second_difference(&self, f: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut out = vec![Cx::new(T::zero(), T::zero()); f.len()];
        for &(s, e) in &self.pieces {
            let h = self.x[s + 1] - self.x[s];
            let h2 = h * h;
            for i in s..=e {
                let v = if i >= s + 2 && i + 2 <= e {
                    (-f[i - 2] + f[i - 1] * lit::<T>(16.0) - f[i] * lit::<T>(30.0) + f[i + 1] * lit::<T>(16.0) - f[i + 2]) / (h2 * lit(12.0))
                } else if i < s + 2 {
                    (f[i] * lit::<T>(45.0) - f[i + 1] * lit::<T>(154.0) + f[i + 2] * lit::<T>(214.0) - f[i + 3] * lit::<T>(156.0) + f[i + 4] * lit::<T>(61.0) - f[i + 5] * lit::<T>(10.0)) / (h2 * lit(12.0))
                } else {
                    (f[i] * lit::<T>(45.0) - f[i - 1] * lit::<T>(154.0) + f[i - 2] * lit::<T>(214.0) - f[i - 3] * lit::<T>(156.0) + f[i - 4] * lit::<T>(61.0) - f[i - 5] * lit::<T>(10.0)) / (h2 * lit(12.0))
                };
                out[i] = v;
            }
        }
        out
    }
}

/// `(psi, d_t psi)` on a grid; the map's surface terms sit at the grid ends.
#[derive(Debug, Clone)]
pub struct TwoComponentState<T: Real> {
    pub grid: Arc<Grid<T>>,
    pub psi1: Vec<Cx<T>>,
    pub psi2: Vec<Cx<T>>,
}

impl<T: Real> TwoComponentState<T> {
    pub fn new(grid: Arc<Grid<T>>, psi1: Vec<Cx<T>>, psi2: Vec<Cx<T>>) -> Result<Self> {
        if psi1.len() != grid.len() || psi2.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, psi1, psi2 })
    }

    /// A frequency eigenstate: `psi2 = -i omega psi1`.
    pub fn eigenstate(grid: Arc<Grid<T>>, omega: Cx<T>, psi: Vec<Cx<T>>) -> Result<Self> {
        let m = -ii::<T>() * omega;
        let psi2 = psi.iter().map(|&v| v * m).collect();
        Self::new(grid, psi, psi2)
    }

    pub fn scaled(&self, c: Cx<T>) -> Self {
        Self { grid: self.grid.clone(), psi1: self.psi1.iter().map(|&v| v * c).collect(), psi2: self.psi2.iter().map(|&v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let a = self.psi1.iter().zip(&other.psi1).map(|(a, b)| a + b).collect();
        let b = self.psi2.iter().zip(&other.psi2).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), psi1: a, psi2: b })
    }

    /// `H psi = i (psi2, psi1'' - V psi1)` with the second derivative by finite differences.
    pub fn evolve(&self, p: &Potential<T>) -> Self {
        let d2 = self.grid.second_difference(&self.psi1);
        let i = ii::<T>();
        let x = self.grid.x();
        let h1 = self.psi2.iter().map(|&v| v * i).collect();
        let h2 = (0..x.len())
            .map(|k| {
                // one-sided V at piece ends
                let v = if k > 0 && x[k] == x[k - 1] { p.value_left(x[k]) } else { p.value(x[k]) };
                (d2[k] - self.psi1[k] * v) * i
            })
            .collect();
        Self { grid: self.grid.clone(), psi1: h1, psi2: h2 }
    }
}

/// `i [ int (u1 v2 + u2 v1) dx + u1 v1 |_(lo) + u1 v1 |_(hi) ]`.
pub fn bilinear<T: Real>(u: &TwoComponentState<T>, v: &TwoComponentState<T>) -> Result<Cx<T>> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch);
    }
    let n = u.psi1.len();
    let f: Vec<Cx<T>> = (0..n).map(|k| u.psi1[k] * v.psi2[k] + u.psi2[k] * v.psi1[k]).collect();
    let surf = u.psi1[0] * v.psi1[0] + u.psi1[n - 1] * v.psi1[n - 1];
    Ok(ii::<T>() * (u.grid.integrate(&f) + surf))
}

/// `[lo, hi]` enclosing the support (the edge of an exponential tail counts).
pub fn support_interval<T: Real>(p: &Potential<T>) -> Result<(T, T)> {
    let s = p.support();
    for d in [s.left, s.right] {
        if let Decay::Algebraic { .. } = d {
            return Err(Error::InvalidParameter("the bilinear map needs a compact or exponential tail".into()));
        }
    }
    let (lo, hi) = (s.left.edge(), s.right.edge());
    if hi - lo < lit(1e-12) {
        return Ok((lo - T::one(), hi + T::one()));
    }
    Ok((lo, hi))
}

fn density<T: Real>(omega: Cx<T>, p: &Potential<T>) -> T {
    let k = omega.norm() + p.peak().abs().sqrt();
    lit::<T>(400.0) * (T::one() + k / lit(4.0))
}

/// The mode function `g(omega_n, x)` as an eigenstate on `[lo, hi]`.
pub fn mode_state<T: Real>(p: &Potential<T>, mode: &Mode<T>, lo: T, hi: T, opts: &SolverOptions<T>) -> Result<TwoComponentState<T>> {
    let grid = Arc::new(Grid::for_potential(p, lo, hi, density(mode.omega, p)));
    mode_state_on(p, mode, grid, opts)
}

/// The mode function on a given grid, so that several modes can be paired.
pub fn mode_state_on<T: Real>(p: &Potential<T>, mode: &Mode<T>, grid: Arc<Grid<T>>, opts: &SolverOptions<T>) -> Result<TwoComponentState<T>> {
    let sol = propagate_outgoing(p, mode.omega, Side::Right, grid.x(), &opts.prop)?;
    TwoComponentState::eigenstate(grid, mode.omega, sol.values)
}

/// Norm `(phi_n, phi_n)` of a mode with the surface points at `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct QnmNorm<T: Real> {
    pub value: Cx<T>,
    /// `2|w| int |phi|^2 + |phi(lo)|^2 + |phi(hi)|^2`
    pub scale: T,
}

pub fn qnm_norm_at<T: Real>(p: &Potential<T>, mode: &Mode<T>, lo: T, hi: T, opts: &SolverOptions<T>) -> Result<QnmNorm<T>> {
    let s = mode_state(p, mode, lo, hi, opts)?;
    let value = bilinear(&s, &s)?;
    let abs: Vec<Cx<T>> = s.psi1.iter().map(|v| re(v.norm_sqr())).collect();
    let n = s.psi1.len();
    let scale = lit::<T>(2.0) * mode.omega.norm() * s.grid.integrate(&abs).re + s.psi1[0].norm_sqr() + s.psi1[n - 1].norm_sqr();
    if value.norm() < lit::<T>(1e-8) * scale {
        return Err(Error::ZeroNorm(to_f64(value.norm() / scale)));
    }
    Ok(QnmNorm { value, scale })
}

/// Zeldovich-type norm over the support of `p`.
pub fn qnm_norm<T: Real>(p: &Potential<T>, mode: &Mode<T>, opts: &SolverOptions<T>) -> Result<QnmNorm<T>> {
    let (lo, hi) = support_interval(p)?;
    qnm_norm_at(p, mode, lo, hi, opts)
}

/// `(f(omega_n), g(omega_n))` with both solutions at the same frequency; equals `-dJ_q/domega`.
pub fn mixed_norm<T: Real>(p: &Potential<T>, omega: Cx<T>, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    let (lo, hi) = support_interval(p)?;
    let grid = Arc::new(Grid::for_potential(p, lo, hi, density(omega, p)));
    let f = propagate_outgoing(p, omega, Side::Left, grid.x(), &opts.prop)?;
    let g = propagate_outgoing(p, omega, Side::Right, grid.x(), &opts.prop)?;
    let fs = TwoComponentState::eigenstate(grid.clone(), omega, f.values)?;
    let gs = TwoComponentState::eigenstate(grid, omega, g.values)?;
    bilinear(&fs, &gs)
}

/// `(phi~, phi~) / (phi, phi) = omega^2 - Omega^2`.
pub fn susy_norm_ratio<T: Real>(omega: Cx<T>, big_omega: Cx<T>) -> Result<Cx<T>> {
    let r = omega * omega - big_omega * big_omega;
    if r.norm() < lit::<T>(1e-12) * (T::one() + omega.norm_sqr()) {
        return Err(Error::DegenerateEigenvalue);
    }
    Ok(r)
}

/// Measured `(A phi, A phi) / (phi, phi)` on the partner, surface points at the support of `p`.
pub fn susy_norm_ratio_numeric<T: Real>(gen: &Generator<T>, mode: &Mode<T>, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    let p = gen.source();
    susy_norm_ratio(mode.omega, gen.omega())?;
    let (lo, hi) = support_interval(p)?;
    let grid = Arc::new(Grid::for_potential(p, lo, hi, density(mode.omega, p)));
    let sol = propagate_outgoing(p, mode.omega, Side::Right, grid.x(), &opts.prop)?;
    let a = gen.apply_a(grid.x(), &sol.values, &sol.derivs);
    let s = TwoComponentState::eigenstate(grid.clone(), mode.omega, sol.values)?;
    let t = TwoComponentState::eigenstate(grid, mode.omega, a)?;
    Ok(bilinear(&t, &t)? / bilinear(&s, &s)?)
}

/// First-order frequency shift `Delta omega = int phi^2 dV / (phi, phi)`.
pub fn frequency_shift<T: Real, F: Fn(T) -> T>(p: &Potential<T>, mode: &Mode<T>, dv: F, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    let (lo, hi) = support_interval(p)?;
    let s = mode_state(p, mode, lo, hi, opts)?;
    let norm = bilinear(&s, &s)?;
    let x = s.grid.x();
    let f: Vec<Cx<T>> = (0..x.len()).map(|k| s.psi1[k] * s.psi1[k] * dv(x[k])).collect();
    let num = s.grid.integrate(&f);
    let scale: T = s.psi1.iter().fold(T::zero(), |a, v| a.max(v.norm_sqr()));
    if norm.norm() < lit::<T>(1e-12) * scale * (T::one() + mode.omega.norm()) {
        return Err(Error::ZeroNorm(to_f64(norm.norm())));
    }
    Ok(num / norm)
}

/// First-order eigenvalue shift `Delta(omega^2) = 2 omega int phi^2 dV / (phi, phi)`.
pub fn perturbation_shift<T: Real, F: Fn(T) -> T>(p: &Potential<T>, mode: &Mode<T>, dv: F, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    Ok(frequency_shift(p, mode, dv, opts)? * mode.omega * lit::<T>(2.0))
}

/// Expansion coefficients `a_n = (phi_n, psi) / (phi_n, phi_n)`.
pub fn project<T: Real>(state: &TwoComponentState<T>, modes: &[TwoComponentState<T>]) -> Result<Vec<Cx<T>>> {
    modes
        .iter()
        .map(|m| {
            let n = bilinear(m, m)?;
            if n.norm() == T::zero() {
                return Err(Error::ZeroNorm(0.0));
            }
            Ok(bilinear(m, state)? / n)
        })
        .collect()
}

/// `|(H u, v) - (u, H v)|`.
pub fn evolution_symmetry_check<T: Real>(u: &TwoComponentState<T>, v: &TwoComponentState<T>, p: &Potential<T>) -> Result<T> {
    let a = bilinear(&u.evolve(p), v)?;
    let b = bilinear(u, &v.evolve(p))?;
    Ok((a - b).norm())
}

/// Jordan-block normalization measured two ways.
#[derive(Debug, Clone, Copy)]
pub struct JordanReport<T: Real> {
    /// `(-1/2 d^2 J~_u) / (-d J_q)` at `-Omega`, from partner-system Wronskians.
    pub ratio_wronskian: Cx<T>,
    /// `(Psi~_1, Psi~_0) / (Psi, Psi)` by direct quadrature.
    pub ratio_bilinear: Cx<T>,
    /// `(A^dag Psi~_1, A^dag Psi~_1) / (Psi, Psi)` by direct quadrature.
    pub reverse_ratio: Cx<T>,
    /// `-2 Omega`
    pub expected: Cx<T>,
    pub expected_reverse: Cx<T>,
}

/// `k`-th derivative at the centre from samples on a circle of radius `r` at angles `2 pi j / n`.
fn cauchy<T: Real>(samples: &[Cx<T>], r: T, k: i32) -> Cx<T> {
    let n = samples.len();
    let mut acc = Cx::new(T::zero(), T::zero());
    for (j, &v) in samples.iter().enumerate() {
        let th = lit::<T>(std::f64::consts::TAU * j as f64 / n as f64) * lit(k as f64);
        acc = acc + v * Cx::new(th.cos(), -th.sin());
    }
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    acc * (lit::<T>(fact) / (r.powi(k) * lit(n as f64)))
}

fn circle<T: Real>(w0: Cx<T>, r: T, n: usize) -> Vec<Cx<T>> {
    (0..n)
        .map(|j| {
            let th = lit::<T>(std::f64::consts::TAU * j as f64 / n as f64);
            w0 + Cx::new(th.cos(), th.sin()) * r
        })
        .collect()
}

/// Contour radius and node count for frequency derivatives.
const CONTOUR_R: f64 = 0.02;
const CONTOUR_N: usize = 16;

/// Normalization of the doubled QNM at `-Omega` produced by `gen` when the source has a QNM
/// `Psi` there; surface points at `[-half_width, half_width]`.
pub fn jordan_norm<T: Real>(gen: &Generator<T>, half_width: T, opts: &SolverOptions<T>) -> Result<JordanReport<T>> {
    let p = gen.source();
    let partner = gen.partner();
    let big = gen.omega();
    let w0 = -big;
    match root_order(partner, w0, Which::Q, opts) {
        Ok(2) => {}
        _ => return Err(Error::NotADoubleZero(to_f64(w0.im))),
    }
    let r = lit::<T>(CONTOUR_R) * (T::one() + w0.norm());
    let ring = circle(w0, r, CONTOUR_N);
    // J~_u = (-i w + W-)(i w + W+) J~_q has the same double zero
    let i = ii::<T>();
    let wm = re::<T>(gen.w_minus());
    let wp = re::<T>(gen.w_plus());
    let ju: Vec<Cx<T>> = ring
        .iter()
        .map(|&w| Ok((-i * w + wm) * (i * w + wp) * wronskian_value(partner, w, Which::Q, opts)?))
        .collect::<Result<_>>()?;
    let jq: Vec<Cx<T>> = ring.iter().map(|&w| wronskian_value(p, w, Which::Q, opts)).collect::<Result<_>>()?;
    let ratio_wronskian = (cauchy(&ju, r, 2) * lit::<T>(-0.5)) / (-cauchy(&jq, r, 1));

    let grid = Arc::new(Grid::for_potential(p, -half_width, half_width, density(w0, p)));
    let x = grid.x();
    let n = x.len();
    let f0 = propagate_outgoing(p, w0, Side::Left, x, &opts.prop)?;
    let mut ring_f = Vec::with_capacity(CONTOUR_N);
    for &w in &ring {
        ring_f.push(propagate_outgoing(p, w, Side::Left, x, &opts.prop)?);
    }
    let mut psi0 = Vec::with_capacity(n);
    let mut psi1 = Vec::with_capacity(n);
    let mut dpsi1 = Vec::with_capacity(n);
    let mut a_ring = vec![Cx::new(T::zero(), T::zero()); CONTOUR_N];
    let mut da_ring = a_ring.clone();
    for k in 0..n {
        let (a0, _) = gen.apply_a_state(x[k], w0, f0.values[k], f0.derivs[k]);
        for (j, s) in ring_f.iter().enumerate() {
            let (a, da) = gen.apply_a_state(x[k], ring[j], s.values[k], s.derivs[k]);
            a_ring[j] = a;
            da_ring[j] = da;
        }
        psi0.push(a0);
        psi1.push(cauchy(&a_ring, r, 1));
        dpsi1.push(cauchy(&da_ring, r, 1));
    }
    // Psi~_1(t) = (Psi~_1 - i t Psi~_0) e^{i Omega t}
    let tw0 = TwoComponentState::eigenstate(grid.clone(), w0, psi0.clone())?;
    let m1: Vec<Cx<T>> = (0..n).map(|k| -i * (-big * psi1[k] + psi0[k])).collect();
    let tw1 = TwoComponentState::new(grid.clone(), psi1.clone(), m1)?;
    let base = TwoComponentState::eigenstate(grid.clone(), w0, f0.values)?;
    let norm = bilinear(&base, &base)?;
    let ratio_bilinear = bilinear(&tw1, &tw0)? / norm;
    // A^dag Psi~_1 = -Psi~_1' + W Psi~_1, a mode of the source at -Omega
    let bar = gen.apply_a_dagger(x, &psi1, &dpsi1);
    let bs = TwoComponentState::eigenstate(grid, w0, bar)?;
    let reverse_ratio = bilinear(&bs, &bs)? / norm;
    Ok(JordanReport {
        ratio_wronskian,
        ratio_bilinear,
        reverse_ratio,
        expected: big * lit::<T>(-2.0),
        expected_reverse: big * big * lit::<T>(4.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_weights_are_exact_for_cubics() {
        for n in [4usize, 5, 7, 10] {
            let g = Grid::<f64>::uniform(-1.0, 2.0, n);
            let f: Vec<Cx<f64>> = g.x().iter().map(|&x| Cx::new(x * x * x - x, 0.0)).collect();
            let want = (16.0 - 1.0) / 4.0 - (4.0 - 1.0) / 2.0;
            assert!((g.integrate(&f).re - want).abs() < 1e-12, "{n}");
        }
    }

    #[test]
    fn second_difference_of_quartic() {
        let g = Grid::<f64>::uniform(0.0, 1.0, 40);
        let f: Vec<Cx<f64>> = g.x().iter().map(|&x| Cx::new(x.powi(4), 0.0)).collect();
        let d = g.second_difference(&f);
        for (x, v) in g.x().iter().zip(&d) {
            assert!((v.re - 12.0 * x * x).abs() < 1e-8, "{x}");
        }
    }

    #[test]
    fn degenerate_ratio() {
        let w = Cx::new(0.0, 2.47);
        let om = Cx::new(0.0, 4.28);
        assert!((susy_norm_ratio(w, om).unwrap() - Cx::new(4.28f64 * 4.28 - 2.47 * 2.47, 0.0)).norm() < 1e-12);
        assert_eq!(susy_norm_ratio(om, om).unwrap_err(), Error::DegenerateEigenvalue);
    }
}
