//! Dormand–Prince 5(4) stepping for `phi'' = (V(x) - omega^2) phi` in complex arithmetic.

use crate::error::{Error, Result};
use crate::scalar::{lit, Cx, Real};

/// `(phi, phi')` scaled by `2^log2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State<T: Real> {
    pub phi: Cx<T>,
    pub dphi: Cx<T>,
    pub log2: T,
}

const GUARD: f64 = 1.2676506002282294e30; // 2^100

impl<T: Real> State<T> {
    pub fn new(phi: Cx<T>, dphi: Cx<T>) -> Self {
        let mut s = Self { phi, dphi, log2: T::zero() };
        s.renormalize();
        s
    }

    /// Keep the mantissa pair within `[2^-100, 2^100]`.
    pub fn renormalize(&mut self) {
        let m = self.phi.norm().max(self.dphi.norm());
        if !(m > T::zero()) || !m.is_finite() {
            return;
        }
        let g = lit::<T>(GUARD);
        if m > g || m < T::one() / g {
            let k = m.log2().floor();
            let f = lit::<T>(2.0).powf(-k);
            self.phi = self.phi * f;
            self.dphi = self.dphi * f;
            self.log2 += k;
        }
    }

    /// Unscaled `(phi, phi')`; may overflow to infinity.
    pub fn unscaled(&self) -> (Cx<T>, Cx<T>) {
        let f = lit::<T>(2.0).powf(self.log2);
        (self.phi * f, self.dphi * f)
    }

    pub fn log_derivative(&self) -> Cx<T> {
        self.dphi / self.phi
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self { rtol: lit(1e-10), atol: lit(1e-12), max_steps: 2_000_000 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// `y'' = (V(x) - a) y + b y'`.
#[derive(Debug, Clone, Copy)]
pub struct Linear2<T: Real> {
    pub a: Cx<T>,
    pub b: Cx<T>,
}

impl<T: Real> Linear2<T> {
    /// `phi'' = (V - omega^2) phi`
    pub fn wave(omega: Cx<T>) -> Self {
        Self { a: omega * omega, b: Cx::new(T::zero(), T::zero()) }
    }
}

/// Tighten the tolerance by `exp(-kappa |goal - x|)`: errors made at `x` grow by that
/// factor before they reach `goal`.
#[derive(Debug, Clone, Copy)]
pub struct Goal<T> {
    pub x: T,
    pub kappa: T,
}

/// Integrate `phi'' = (V - omega^2) phi` from `x0` to `x1` (either direction).
/// `h` carries the step size between calls (0 means pick one).
pub fn integrate<T: Real, F: Fn(T) -> T>(
    v: &F,
    omega2: Cx<T>,
    x0: T,
    x1: T,
    state: &mut State<T>,
    h: &mut T,
    tol: &Tolerances<T>,
) -> Result<()> {
    let eq = Linear2 { a: omega2, b: Cx::new(T::zero(), T::zero()) };
    integrate_linear(v, eq, x0, x1, state, h, tol, None)
}

/// Integrate `y'' = (V - a) y + b y'` from `x0` to `x1`.
#[allow(clippy::too_many_arguments)]
pub fn integrate_linear<T: Real, F: Fn(T) -> T>(
    v: &F,
    eq: Linear2<T>,
    x0: T,
    x1: T,
    state: &mut State<T>,
    h: &mut T,
    tol: &Tolerances<T>,
    goal: Option<Goal<T>>,
) -> Result<()> {
    let span = x1 - x0;
    if span == T::zero() {
        return Ok(());
    }
    let dir = span.signum();
    let rhs = |x: T, y0: Cx<T>, y1: Cx<T>| -> (Cx<T>, Cx<T>) { (y1, y0 * (Cx::new(v(x), T::zero()) - eq.a) + y1 * eq.b) };
    let weight = |x: T| -> T {
        match goal {
            Some(g) if g.kappa > T::zero() => (-(g.kappa * (g.x - x).abs()).min(lit(600.0))).exp(),
            _ => T::one(),
        }
    };
    let c: [T; 7] = C.map(|q| lit(q));
    let a: [[T; 6]; 7] = A.map(|r| r.map(|q| lit(q)));
    let e: [T; 7] = E.map(|q| lit(q));

    let mut hh = if *h > T::zero() {
        h.min(span.abs())
    } else {
        let scale = eq.a.norm().sqrt() + eq.b.norm() + v(x0).abs().sqrt() + T::one();
        (lit::<T>(0.05) / scale).min(span.abs())
    };
    let mut x = x0;
    let mut y = [state.phi, state.dphi];
    let mut k1 = rhs(x, y[0], y[1]);
    let mut steps = 0usize;
    let min_h = lit::<T>(1e-14) * (T::one() + x0.abs().max(x1.abs()));
    while (x1 - x) * dir > T::zero() {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::NonConvergence("ODE step budget exhausted".into()));
        }
        let rem = (x1 - x).abs();
        let last = hh >= rem * (T::one() - lit::<T>(1e-12));
        let step = if last { rem } else { hh };
        let hs = step * dir;
        let mut k: [(Cx<T>, Cx<T>); 7] = [k1; 7];
        for s in 1..7 {
            let mut y0 = y[0];
            let mut y1 = y[1];
            for j in 0..s {
                let aj = a[s][j];
                if aj != T::zero() {
                    y0 = y0 + k[j].0 * (aj * hs);
                    y1 = y1 + k[j].1 * (aj * hs);
                }
            }
            let xs = if s >= 5 { if last { x1 } else { x + hs } } else { x + c[s] * hs };
            k[s] = rhs(xs, y0, y1);
        }
        // stage 7 is evaluated at the 5th-order solution
        let mut yn0 = y[0];
        let mut yn1 = y[1];
        for j in 0..6 {
            let aj = a[6][j];
            yn0 = yn0 + k[j].0 * (aj * hs);
            yn1 = yn1 + k[j].1 * (aj * hs);
        }
        let mut er0 = Cx::new(T::zero(), T::zero());
        let mut er1 = er0;
        for j in 0..7 {
            er0 = er0 + k[j].0 * (e[j] * hs);
            er1 = er1 + k[j].1 * (e[j] * hs);
        }
        let nrm = y[0].norm().max(y[1].norm()).max(yn0.norm()).max(yn1.norm());
        // only y' errors feed the growing mode; the floor is the roundoff of the y' update
        let wgt = weight(x);
        let kmax = k.iter().fold(T::zero(), |m, q| m.max(q.1.norm()));
        let floor = lit::<T>(50.0) * T::epsilon() * (kmax * step + y[1].norm());
        let sc0 = tol.rtol * y[0].norm().max(yn0.norm()) + tol.atol * nrm;
        let sc1 = ((tol.rtol * y[1].norm().max(yn1.norm()) + tol.atol * nrm) * wgt).max(floor);
        let err = (er0.norm() / sc0).max(er1.norm() / sc1);
        if !err.is_finite() {
            return Err(Error::Overflow);
        }
        if err <= T::one() {
            x = if last { x1 } else { x + hs };
            y = [yn0, yn1];
            k1 = k[6];
            let mut st = State { phi: y[0], dphi: y[1], log2: state.log2 };
            let before = st.log2;
            st.renormalize();
            if st.log2 != before {
                let f = lit::<T>(2.0).powf(before - st.log2);
                k1 = (k1.0 * f, k1.1 * f);
                y = [st.phi, st.dphi];
                state.log2 = st.log2;
            }
            let fac = if err > T::zero() { lit::<T>(0.9) * err.powf(lit(-0.2)) } else { lit(5.0) };
            let grown = step * fac.min(lit(5.0)).max(lit(0.2));
            if !last {
                hh = grown;
            } else {
                hh = hh.max(grown);
            }
        } else {
            let fac = (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
            hh = step * fac;
            if hh < min_h {
                return Err(Error::NonConvergence("ODE step size underflow".into()));
            }
        }
    }
    state.phi = y[0];
    state.dphi = y[1];
    *h = hh;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillation() {
        let w = 1.3f64;
        let mut s = State::new(Cx::new(1.0, 0.0), Cx::new(0.0, w));
        let mut h = 0.0;
        integrate(&|_x: f64| 0.0, Cx::new(w * w, 0.0), 0.0, 10.0, &mut s, &mut h, &Tolerances::default()).unwrap();
        let (p, _) = s.unscaled();
        let exact = Cx::new(0.0, w * 10.0).exp();
        assert!((p - exact).norm() < 1e-8);
    }

    #[test]
    fn growth_is_rescaled() {
        let mut s = State::new(Cx::new(1.0, 0.0), Cx::new(1.0, 0.0));
        let mut h = 0.0;
        integrate(&|_x: f64| 1.0, Cx::new(0.0, 0.0), 0.0, 200.0, &mut s, &mut h, &Tolerances::default()).unwrap();
        let ln = s.phi.norm().ln() + s.log2 * std::f64::consts::LN_2;
        assert!((ln - 200.0).abs() < 1e-7);
    }

    #[test]
    fn backward_direction() {
        let mut s = State::new(Cx::new(1.0, 0.0), Cx::new(-2.0, 0.0));
        let mut h = 0.0;
        integrate(&|_x: f64| 4.0, Cx::new(0.0, 0.0), 0.0, -3.0, &mut s, &mut h, &Tolerances::default()).unwrap();
        let (p, _) = s.unscaled();
        assert!((p.re - 6f64.exp()).abs() < 1e-7 * 6f64.exp());
    }
}
