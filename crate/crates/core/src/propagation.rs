//! Left/right outgoing solutions `f(omega, x)` and `g(omega, x)`.

use crate::error::{Error, Result};
use crate::ode::{integrate_linear, Goal, Linear2, State, Tolerances};
use crate::potential::{Decay, Potential, PotentialKind};
use crate::scalar::{ii, lit, re, sqrt_upper, to_f64, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `f ~ e^{-i omega x}` as `x -> -inf`
    Left,
    /// `g ~ e^{+i omega x}` as `x -> +inf`
    Right,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagationOptions<T> {
    pub tol: Tolerances<T>,
    /// Band margin as a fraction of the tail decay rate.
    pub band_margin: T,
    /// Override of the truncation radius (applied to both sides).
    pub x_n: Option<T>,
}

impl<T: Real> Default for PropagationOptions<T> {
    fn default() -> Self {
        Self { tol: Tolerances::default(), band_margin: lit(0.05), x_n: None }
    }
}

/// 2x2 transfer matrix across one constant segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix<T: Real> {
    pub m: [[Cx<T>; 2]; 2],
}

impl<T: Real> TransferMatrix<T> {
    pub fn det(&self) -> Cx<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, phi: Cx<T>, dphi: Cx<T>) -> (Cx<T>, Cx<T>) {
        (self.m[0][0] * phi + self.m[0][1] * dphi, self.m[1][0] * phi + self.m[1][1] * dphi)
    }
}

/// Exact propagation of `(phi, phi')` across `dx` where `V = v_seg`.
pub fn transfer_matrix<T: Real>(v_seg: T, omega: Cx<T>, dx: T) -> TransferMatrix<T> {
    let alpha = (re(v_seg) - omega * omega).sqrt();
    let z = alpha * dx;
    let ch = z.cosh();
    let (shc, ash) = if z.norm() < lit(1e-4) {
        // sinh(z)/z series
        let z2 = z * z;
        let s = re::<T>(T::one()) + z2 / lit::<T>(6.0) + z2 * z2 / lit::<T>(120.0);
        (s * dx, alpha * alpha * dx * s)
    } else {
        let sh = z.sinh();
        (sh / alpha, alpha * sh)
    };
    TransferMatrix { m: [[ch, shc], [ash, ch]] }
}

/// Sampled outgoing solution.
#[derive(Debug, Clone)]
pub struct OutgoingSolution<T: Real> {
    pub side: Side,
    pub omega: Cx<T>,
    pub grid: Vec<T>,
    pub values: Vec<Cx<T>>,
    pub derivs: Vec<Cx<T>>,
    /// Point where unit outgoing amplitude was imposed.
    pub x_n: T,
}

impl<T: Real> OutgoingSolution<T> {
    /// `phi'/phi` at a grid point, linearly interpolated between points.
    pub fn log_derivative(&self, x: T) -> Result<Cx<T>> {
        let n = self.grid.len();
        let k = self.grid.partition_point(|&p| p < x).min(n - 1);
        let (phi, dphi) = if self.grid[k] == x || k == 0 {
            (self.values[k], self.derivs[k])
        } else {
            let t = (x - self.grid[k - 1]) / (self.grid[k] - self.grid[k - 1]);
            (
                self.values[k - 1] * (T::one() - t) + self.values[k] * t,
                self.derivs[k - 1] * (T::one() - t) + self.derivs[k] * t,
            )
        };
        let max = self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        if phi.norm() < lit::<T>(1e-13) * max {
            return Err(Error::NodeAtPoint(to_f64(x)));
        }
        Ok(dphi / phi)
    }
}

/// Where unit amplitude is imposed on `side`, and whether the free form is exact beyond it.
pub fn truncation_point<T: Real>(p: &Potential<T>, omega: Cx<T>, side: Side, opts: &PropagationOptions<T>) -> Result<T> {
    let sup = p.support();
    let decay = match side {
        Side::Left => sup.left,
        Side::Right => sup.right,
    };
    let sgn = match side {
        Side::Left => -T::one(),
        Side::Right => T::one(),
    };
    if let Some(xn) = opts.x_n {
        if !decay.is_compact() {
            check_band(p, omega, side, opts)?;
        }
        return Ok(sgn * xn.abs());
    }
    match decay {
        Decay::Compact(e) => Ok(e),
        Decay::Exponential { rate, edge } => {
            check_band(p, omega, side, opts)?;
            let growth = T::zero().max(-omega.im);
            let need = lit::<T>(27.6) / (rate - lit::<T>(2.0) * growth);
            let cap = tail_cap(p, edge, rate);
            Ok(sgn * cap.min(edge.abs().max(need)))
        }
        Decay::Algebraic { edge } => {
            check_band(p, omega, side, opts)?;
            Ok(edge)
        }
    }
}

fn tail_cap<T: Real>(p: &Potential<T>, edge: T, rate: T) -> T {
    match p.kind() {
        PotentialKind::PoschlTeller(pt) => lit::<T>(40.0) * pt.width,
        PotentialKind::Superpartner(sp) => {
            let (lo, hi) = sp.table_range();
            edge.abs().max(lo.abs()).max(hi.abs()) + lit::<T>(80.0) / rate
        }
        _ => edge.abs(),
    }
}

/// Lowest admissible `Im omega` for an outgoing solution on `side`.
pub fn band_limit<T: Real>(p: &Potential<T>, side: Side, opts: &PropagationOptions<T>) -> Option<T> {
    let sup = p.support();
    let decay = match side {
        Side::Left => sup.left,
        Side::Right => sup.right,
    };
    match decay {
        Decay::Compact(_) => None,
        Decay::Exponential { rate, .. } => Some(-rate * lit(0.5) + opts.band_margin * rate),
        Decay::Algebraic { .. } => Some(T::zero()),
    }
}

fn check_band<T: Real>(p: &Potential<T>, omega: Cx<T>, side: Side, opts: &PropagationOptions<T>) -> Result<()> {
    if let Some(lim) = band_limit(p, side, opts) {
        if omega.im < lim - lit::<T>(1e-12) {
            return Err(Error::BandViolation { im_omega: to_f64(omega.im), limit: to_f64(lim) });
        }
    }
    Ok(())
}

/// `e^{+-i omega x}` as a scaled state (value and derivative).
fn free_state<T: Real>(omega: Cx<T>, x: T, side: Side) -> State<T> {
    let s = match side {
        Side::Left => -T::one(),
        Side::Right => T::one(),
    };
    let ph = ii::<T>() * omega * re(s * x);
    let log2 = ph.re / T::LN_2();
    let phi = Cx::new(T::zero(), ph.im).exp();
    let mut st = State { phi, dphi: phi * ii::<T>() * omega * re(s), log2 };
    st.renormalize();
    st
}

fn start_state<T: Real>(p: &Potential<T>, omega: Cx<T>, side: Side, xs: T) -> State<T> {
    let decay = match side {
        Side::Left => p.support().left,
        Side::Right => p.support().right,
    };
    let mut st = free_state(omega, xs, side);
    if let Decay::Algebraic { .. } = decay {
        // WKB-corrected outgoing wave for a 1/x^2 tail
        let (amp, k, dk) = wkb_factors(p, omega, side, xs);
        let logd = ii::<T>() * k * re(side_sign::<T>(side)) - dk / (k * lit::<T>(2.0));
        st.phi = st.phi * amp;
        st.dphi = st.phi * logd;
        st.renormalize();
    }
    st
}

/// Stateful propagator across a potential; tracks the current position and step size.
///
/// Outgoing solutions are carried as `u = phi e^{-s i omega x}` with `u -> 1` at the start:
/// conversion roundoff in `u'` would otherwise seed the mode that grows inward.
pub struct Propagator<'a, T: Real> {
    p: &'a Potential<T>,
    omega: Cx<T>,
    omega2: Cx<T>,
    tol: Tolerances<T>,
    pub x: T,
    // (phi, phi') when envelope = 0, (u, u') otherwise
    st: State<T>,
    h: T,
    envelope: T,
}

/// `e^{s i omega x}` as (phase factor, log2 magnitude).
fn plane<T: Real>(omega: Cx<T>, s: T, x: T) -> (Cx<T>, T) {
    let z = ii::<T>() * omega * re(s * x);
    (Cx::new(T::zero(), z.im).exp(), z.re / T::LN_2())
}

impl<'a, T: Real> Propagator<'a, T> {
    pub fn new(p: &'a Potential<T>, omega: Cx<T>, x: T, state: State<T>, tol: Tolerances<T>) -> Self {
        Self { p, omega, omega2: omega * omega, tol, x, st: state, h: T::zero(), envelope: T::zero() }
    }

    /// Start an outgoing solution at its truncation point.
    pub fn outgoing(p: &'a Potential<T>, omega: Cx<T>, side: Side, opts: &PropagationOptions<T>) -> Result<Self> {
        let xs = truncation_point(p, omega, side, opts)?;
        if p.is_piecewise_constant() {
            let st = start_state(p, omega, side, xs);
            return Ok(Self::new(p, omega, xs, st, opts.tol));
        }
        let s = side_sign::<T>(side);
        let (u, du) = start_envelope(p, omega, side, xs);
        let st = State::new(u, du);
        Ok(Self { p, omega, omega2: omega * omega, tol: opts.tol, x: xs, st, h: T::zero(), envelope: s })
    }

    pub fn omega(&self) -> Cx<T> {
        self.omega
    }

    /// Current `(phi, phi')`.
    pub fn state(&self) -> State<T> {
        let s = self.envelope;
        if s == T::zero() {
            return self.st;
        }
        let (e, l) = plane(self.omega, s, self.x);
        let iw = ii::<T>() * self.omega * re(s);
        let u = self.st.phi;
        let mut out = State { phi: u * e, dphi: (self.st.dphi + iw * u) * e, log2: self.st.log2 + l };
        out.renormalize();
        out
    }

    /// Advance to `target`, splitting at jumps.
    pub fn advance(&mut self, target: T) -> Result<()> {
        if target == self.x {
            return Ok(());
        }
        let (lo, hi) = if target > self.x { (self.x, target) } else { (target, self.x) };
        let mut pieces = self.p.smooth_pieces(lo, hi);
        let forward = target > self.x;
        if !forward {
            pieces.reverse();
        }
        for (a, b) in pieces {
            let (from, to) = if forward { (a, b) } else { (b, a) };
            self.segment(a, b, from, to, target)?;
            self.x = to;
        }
        self.x = target;
        Ok(())
    }

    fn segment(&mut self, a: T, b: T, from: T, to: T, goal: T) -> Result<()> {
        let p = self.p;
        if p.is_piecewise_constant() {
            let mid = (a + b) * lit(0.5);
            let v = p.value(mid);
            let total = to - from;
            let alpha = (re(v) - self.omega2).sqrt();
            let pieces = ((alpha.re.abs() * total.abs()) / lit::<T>(200.0)).ceil().max(T::one());
            let n = pieces.to_usize().unwrap_or(1).max(1);
            let dx = total / lit::<T>(n as f64);
            let m = transfer_matrix(v, self.omega, dx);
            for _ in 0..n {
                let (phi, dphi) = m.apply(self.st.phi, self.st.dphi);
                self.st.phi = phi;
                self.st.dphi = dphi;
                self.st.renormalize();
            }
            return Ok(());
        }
        let s = self.envelope;
        if let PotentialKind::Free = p.kind() {
            return Ok(());
        }
        let vf = |x: T| if x >= b { p.value_left(b) } else if x <= a { p.value(a) } else { p.value(x) };
        if s == T::zero() {
            let eq = Linear2::wave(self.omega);
            return integrate_linear(&vf, eq, from, to, &mut self.st, &mut self.h, &self.tol, None);
        }
        // phi = e^{s i w x} u  =>  u'' = V u - 2 s i w u'
        let iw = ii::<T>() * self.omega * re(s);
        // errors grow toward the goal when the outgoing wave is growing outward
        let outward = (goal - from) * s < T::zero();
        let kappa = if outward { lit::<T>(2.0) * T::zero().max(-self.omega.im) } else { T::zero() };
        let eq = Linear2 { a: Cx::new(T::zero(), T::zero()), b: -iw * lit::<T>(2.0) };
        integrate_linear(&vf, eq, from, to, &mut self.st, &mut self.h, &self.tol, Some(Goal { x: goal, kappa }))
    }
}

fn side_sign<T: Real>(side: Side) -> T {
    match side {
        Side::Left => -T::one(),
        Side::Right => T::one(),
    }
}

/// `(u, u')` at the start, with `phi = e^{s i omega x} u` (log2 of the plane factor excluded).
fn start_envelope<T: Real>(p: &Potential<T>, omega: Cx<T>, side: Side, xs: T) -> (Cx<T>, Cx<T>) {
    let decay = match side {
        Side::Left => p.support().left,
        Side::Right => p.support().right,
    };
    let one = Cx::new(T::one(), T::zero());
    let zero = Cx::new(T::zero(), T::zero());
    if let Decay::Algebraic { .. } = decay {
        let (amp, k, dk) = wkb_factors(p, omega, side, xs);
        let s = side_sign::<T>(side);
        // u'/u = i s (k - omega) - k'/2k
        let ratio = ii::<T>() * re(s) * (k - omega) - dk / (k * lit::<T>(2.0));
        return (amp, amp * ratio);
    }
    (one, zero)
}

/// WKB amplitude relative to the plane wave, local wavenumber and its derivative.
fn wkb_factors<T: Real>(p: &Potential<T>, omega: Cx<T>, side: Side, xs: T) -> (Cx<T>, Cx<T>, Cx<T>) {
    let v = p.value(xs);
    let dv = p.derivative_side(xs, side == Side::Right);
    let k = sqrt_upper(omega * omega - re(v));
    let amp = (omega / k).sqrt();
    let phase = (ii::<T>() * re(v * xs.abs()) / (omega * lit::<T>(2.0))).exp();
    let dk = -re(dv) / (k * lit::<T>(2.0));
    (amp * phase, k, dk)
}

/// Scaled `(phi, phi')` of the outgoing solution on `side` at `x`.
pub fn outgoing_state<T: Real>(
    p: &Potential<T>,
    omega: Cx<T>,
    side: Side,
    x: T,
    opts: &PropagationOptions<T>,
) -> Result<State<T>> {
    let xs = truncation_point(p, omega, side, opts)?;
    let beyond = match side {
        Side::Left => x <= xs,
        Side::Right => x >= xs,
    };
    if beyond {
        return Ok(free_state_at(p, omega, side, x, xs));
    }
    let mut pr = Propagator::outgoing(p, omega, side, opts)?;
    pr.advance(x)?;
    Ok(pr.state())
}

fn free_state_at<T: Real>(p: &Potential<T>, omega: Cx<T>, side: Side, x: T, xs: T) -> State<T> {
    let decay = match side {
        Side::Left => p.support().left,
        Side::Right => p.support().right,
    };
    if let Decay::Algebraic { .. } = decay {
        let mut st = start_state(p, omega, side, xs);
        // carry the matching-point correction along as a constant factor
        let f0 = free_state(omega, xs, side);
        let ratio = st.phi / f0.phi;
        let lg = st.log2 - f0.log2;
        let mut f = free_state(omega, x, side);
        f.phi = f.phi * ratio;
        f.dphi = f.dphi * ratio;
        f.log2 += lg;
        f.renormalize();
        st = f;
        return st;
    }
    free_state(omega, x, side)
}

/// Outgoing solution sampled on an increasing `grid`.
pub fn propagate_outgoing<T: Real>(
    p: &Potential<T>,
    omega: Cx<T>,
    side: Side,
    grid: &[T],
    opts: &PropagationOptions<T>,
) -> Result<OutgoingSolution<T>> {
    let xs = truncation_point(p, omega, side, opts)?;
    let n = grid.len();
    let mut states: Vec<Option<State<T>>> = vec![None; n];
    let mut pr = Propagator::outgoing(p, omega, side, opts)?;
    let order: Vec<usize> = match side {
        Side::Left => (0..n).collect(),
        Side::Right => (0..n).rev().collect(),
    };
    for i in order {
        let x = grid[i];
        let beyond = match side {
            Side::Left => x <= xs,
            Side::Right => x >= xs,
        };
        if beyond {
            states[i] = Some(free_state_at(p, omega, side, x, xs));
        } else {
            pr.advance(x)?;
            states[i] = Some(pr.state());
        }
    }
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for s in states.into_iter().flatten() {
        let (a, b) = s.unscaled();
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::Overflow);
        }
        values.push(a);
        derivs.push(b);
    }
    Ok(OutgoingSolution { side, omega, grid: grid.to_vec(), values, derivs, x_n: xs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PtParams;

    #[test]
    fn free_rotation_matrix() {
        let m = transfer_matrix(0.0, Cx::new(1.0, 0.0), std::f64::consts::PI);
        let want = [[-1.0, 0.0], [0.0, -1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.m[i][j] - Cx::new(want[i][j], 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_determinant() {
        for (v, w, d) in [(-20.0, Cx::new(0.0, 2.47), 2.0), (0.16, Cx::new(1.3, -0.7), 0.3), (3.0, Cx::new(2.0f64.sqrt(), 0.0), 1e-7)] {
            let m = transfer_matrix(v, w, d);
            assert!((m.det() - Cx::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn free_field_right_solution() {
        let p = Potential::<f64>::free();
        let w = Cx::new(0.7, 0.2);
        let grid: Vec<f64> = (0..11).map(|i| -5.0 + i as f64).collect();
        let s = propagate_outgoing(&p, w, Side::Right, &grid, &PropagationOptions::default()).unwrap();
        for (x, v) in grid.iter().zip(&s.values) {
            assert!((v - (ii::<f64>() * w * x).exp()).norm() < 1e-12);
        }
        assert!((s.log_derivative(1.5).unwrap() - ii::<f64>() * w).norm() < 1e-12);
    }

    #[test]
    fn smooth_and_exact_paths_agree() {
        // the same step potential integrated as a numeric-free smooth family would be: compare
        // transfer matrices against the integrator on a truncated PT of zero strength plus a step
        let p = Potential::square(0.16, 1.0).unwrap();
        let w = Cx::new(0.9, -0.3);
        let o = PropagationOptions::default();
        let exact = outgoing_state(&p, w, Side::Right, -1.0, &o).unwrap();
        let mut st = start_state(&p, w, Side::Right, 1.0);
        let mut h = 0.0;
        crate::ode::integrate(&|_x: f64| 0.16, w * w, 1.0, -1.0, &mut st, &mut h, &o.tol).unwrap();
        let (a, _) = exact.unscaled();
        let (b, _) = st.unscaled();
        assert!((a - b).norm() < 1e-9 * a.norm());
    }

    #[test]
    fn band_violation_on_tails() {
        let p = Potential::poschl_teller(PtParams::new(0.1875, 1.0).unwrap());
        let r = outgoing_state(&p, Cx::new(0.0, -0.99), Side::Right, 0.0, &PropagationOptions::default());
        assert!(matches!(r, Err(Error::BandViolation { .. })));
    }
}
