//! Regge–Wheeler and Zerilli potentials on the tortoise coordinate and the
//! superpotential that intertwines them.

use crate::potential::{BhParams, Potential};
use crate::scalar::{lit, to_f64, Cx, Real};

/// `x(x*) = x* + 2m ln(x*/2m - 1)`.
pub fn tortoise<T: Real>(m: T, r: T) -> T {
    let two_m = lit::<T>(2.0) * m;
    r + two_m * (r / two_m - T::one()).ln()
}

/// `u = x*/2m - 1` for a tortoise coordinate `x`; solves `u + ln u = x/2m - 1`.
pub fn tortoise_u<T: Real>(m: T, x: T) -> T {
    let y = x / (lit::<T>(2.0) * m) - T::one();
    // s = ln u satisfies e^s + s = y
    let mut s = if y > T::one() { (y - y.ln()).ln() } else { y - y.exp().min(T::one()) };
    for _ in 0..60 {
        let e = s.exp();
        let step = (e + s - y) / (e + T::one());
        s -= step;
        if step.abs() <= lit::<T>(4.0) * T::epsilon() * T::one().max(s.abs()) {
            break;
        }
    }
    s.exp()
}

/// Areal radius `x*` for a tortoise coordinate `x`.
pub fn tortoise_inverse<T: Real>(m: T, x: T) -> T {
    lit::<T>(2.0) * m * (T::one() + tortoise_u(m, x))
}

/// `1 - 2m/x*`, computed without cancellation near the horizon.
fn lapse<T: Real>(m: T, r: T) -> T {
    let u = r / (lit::<T>(2.0) * m) - T::one();
    u / (T::one() + u)
}

pub(crate) fn rw_of_r<T: Real>(bh: &BhParams<T>, r: T) -> T {
    let m = bh.mass;
    let n = bh.n();
    let f = lapse(m, r);
    lit::<T>(2.0) * f * (r * (n + T::one()) - lit::<T>(3.0) * m) / (r * r * r)
}

pub(crate) fn rw_dr<T: Real>(bh: &BhParams<T>, r: T) -> T {
    let m = bh.mass;
    let n = bh.n();
    let f = lapse(m, r);
    let df = lit::<T>(2.0) * m / (r * r);
    let big_n = r * (n + T::one()) - lit::<T>(3.0) * m;
    let r3 = r * r * r;
    lit::<T>(2.0) * (df * big_n / r3 + f * (n + T::one()) / r3 - lit::<T>(3.0) * f * big_n / (r3 * r))
}

fn zerilli_parts<T: Real>(bh: &BhParams<T>, r: T) -> (T, T, T) {
    let m = bh.mass;
    let n = bh.n();
    let p = lit::<T>(2.0) * n * n * (n + T::one()) * r * r * r
        + lit::<T>(6.0) * n * n * m * r * r
        + lit::<T>(18.0) * n * m * m * r
        + lit::<T>(18.0) * m * m * m;
    let dp = lit::<T>(6.0) * n * n * (n + T::one()) * r * r + lit::<T>(12.0) * n * n * m * r + lit::<T>(18.0) * n * m * m;
    let q = n * r + lit::<T>(3.0) * m;
    (p, dp, q)
}

pub(crate) fn zerilli_of_r<T: Real>(bh: &BhParams<T>, r: T) -> T {
    let (p, _, q) = zerilli_parts(bh, r);
    lapse(bh.mass, r) * p / (r * r * r * q * q)
}

pub(crate) fn zerilli_dr<T: Real>(bh: &BhParams<T>, r: T) -> T {
    let m = bh.mass;
    let n = bh.n();
    let (p, dp, q) = zerilli_parts(bh, r);
    let f = lapse(m, r);
    let df = lit::<T>(2.0) * m / (r * r);
    let r3 = r * r * r;
    let base = p / (r3 * q * q);
    df * base + f * (dp / (r3 * q * q) - lit::<T>(3.0) * base / r - lit::<T>(2.0) * n * base / q)
}

/// `W` of the RW→Zerilli transformation as a function of the areal radius.
pub fn superpotential_of_r<T: Real>(bh: &BhParams<T>, r: T) -> T {
    let m = bh.mass;
    let n = bh.n();
    let two_m = lit::<T>(2.0) * m;
    n * (n + T::one()) / (lit::<T>(3.0) * m) + lit::<T>(3.0) * m * (r - two_m) / (r * r * (n * r + lit::<T>(3.0) * m))
}

fn superpotential_dr<T: Real>(bh: &BhParams<T>, r: T) -> T {
    let m = bh.mass;
    let n = bh.n();
    let q = n * r + lit::<T>(3.0) * m;
    let u = r - lit::<T>(2.0) * m;
    lit::<T>(3.0) * m * (T::one() / (r * r * q) - u * (lit::<T>(2.0) / (r * r * r * q) + n / (r * r * q * q)))
}

/// `W(x)` on the tortoise coordinate.
pub fn bh_superpotential<T: Real>(bh: &BhParams<T>, x: T) -> T {
    superpotential_of_r(bh, tortoise_inverse(bh.mass, x))
}

/// `dW/dx` through the chain rule `dx*/dx = 1 - 2m/x*`.
pub fn bh_superpotential_dx<T: Real>(bh: &BhParams<T>, x: T) -> T {
    let r = tortoise_inverse(bh.mass, x);
    superpotential_dr(bh, r) * lapse(bh.mass, r)
}

/// Algebraically special frequency `-i n(n+1)/3m`.
pub fn special_frequency<T: Real>(bh: &BhParams<T>) -> Cx<T> {
    let n = bh.n();
    Cx::new(T::zero(), -(n * (n + T::one())) / (lit::<T>(3.0) * bh.mass))
}

pub fn rw_potential<T: Real>(bh: &BhParams<T>, x: T) -> T {
    rw_of_r(bh, tortoise_inverse(bh.mass, x))
}

pub fn zerilli_potential<T: Real>(bh: &BhParams<T>, x: T) -> T {
    zerilli_of_r(bh, tortoise_inverse(bh.mass, x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiReport {
    /// `max |V_RW - (W^2 - W' + Omega^2)|`
    pub rw_residual: f64,
    /// `max |V_Z - (W^2 + W' + Omega^2)|`
    pub zerilli_residual: f64,
    pub rw_peak: f64,
    pub zerilli_peak: f64,
}

impl RiccatiReport {
    pub fn passes(&self, rel: f64) -> bool {
        self.rw_residual < rel * self.rw_peak && self.zerilli_residual < rel * self.zerilli_peak
    }
}

/// Riccati residuals of the RW/Zerilli pair on `grid`, with `Omega^2` supplied by the caller.
pub fn verify_bh_riccati_with<T: Real>(bh: &BhParams<T>, omega: Cx<T>, grid: &[T]) -> RiccatiReport {
    let omega2 = (omega * omega).re;
    let mut rep = RiccatiReport { rw_residual: 0.0, zerilli_residual: 0.0, rw_peak: 0.0, zerilli_peak: 0.0 };
    for &x in grid {
        let r = tortoise_inverse(bh.mass, x);
        let w = superpotential_of_r(bh, r);
        let dw = superpotential_dr(bh, r) * lapse(bh.mass, r);
        let vrw = rw_of_r(bh, r);
        let vz = zerilli_of_r(bh, r);
        rep.rw_residual = rep.rw_residual.max(to_f64((vrw - (w * w - dw + omega2)).abs()));
        rep.zerilli_residual = rep.zerilli_residual.max(to_f64((vz - (w * w + dw + omega2)).abs()));
        rep.rw_peak = rep.rw_peak.max(to_f64(vrw.abs()));
        rep.zerilli_peak = rep.zerilli_peak.max(to_f64(vz.abs()));
    }
    rep
}

/// Riccati residuals at the algebraically special frequency.
pub fn verify_bh_riccati<T: Real>(bh: &BhParams<T>, grid: &[T]) -> RiccatiReport {
    verify_bh_riccati_with(bh, special_frequency(bh), grid)
}

/// Location (tortoise coordinate) and value of the RW peak, by golden-section search.
pub fn rw_peak<T: Real>(bh: &BhParams<T>) -> (T, T) {
    let m = bh.mass;
    let p = Potential::regge_wheeler(*bh);
    let mut best = (T::zero(), T::neg_infinity());
    for i in 0..=400 {
        let x = m * (lit::<T>(-10.0) + lit::<T>(i as f64 * 0.05));
        let v = p.value(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let g = lit::<T>(0.5 * (5f64.sqrt() - 1.0));
    let (mut a, mut b) = (best.0 - lit::<T>(0.05) * m, best.0 + lit::<T>(0.05) * m);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if p.value(c) > p.value(d) {
            b = d;
        } else {
            a = c;
        }
        if (b - a).abs() < lit::<T>(1e-13) * m {
            break;
        }
    }
    let x = (a + b) * lit(0.5);
    (x, p.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tortoise_fixed_point() {
        assert!((tortoise_inverse(1.0, 4.0) - 4.0f64).abs() < 1e-12);
        assert!((tortoise(1.0, 4.0) - 4.0f64).abs() < 1e-14);
    }

    #[test]
    fn horizon_asymptote() {
        let u = tortoise_u(1.0, -200.0f64);
        assert!(u > 0.0 && u < 1e-40);
    }

    #[test]
    fn round_trip() {
        for i in 0..100 {
            let x = -80.0 + 1.7 * i as f64;
            let r = tortoise_inverse(1.3, x);
            let u = tortoise_u(1.3, x);
            // compare in u to stay exact near the horizon
            let back = r + 2.6 * u.ln();
            assert!((back - x).abs() < 1e-10 * 1.3 * (1.0 + x.abs()), "x = {x}");
        }
    }

    #[test]
    fn special_frequency_units() {
        // 2m = 1, l = 2: 2m omega = -4i
        let bh = BhParams::new(0.5f64, 2).unwrap();
        let w = special_frequency(&bh);
        assert!((w.im * 2.0 * 0.5 + 4.0).abs() < 1e-14 && w.re == 0.0);
    }

    #[test]
    fn riccati_exact() {
        for l in [2, 3] {
            let bh = BhParams::new(1.0, l).unwrap();
            let grid: Vec<f64> = (0..=1000).map(|i| -50.0 + 0.1 * i as f64).collect();
            let rep = verify_bh_riccati(&bh, &grid);
            assert!(rep.passes(1e-8), "{rep:?}");
            let bad = verify_bh_riccati_with(&bh, special_frequency(&bh) * 0.5, &grid);
            assert!(bad.rw_residual > 0.1 * bad.rw_peak);
        }
    }

    #[test]
    fn rw_derivative_matches_fd() {
        let bh = BhParams::new(1.0f64, 2).unwrap();
        let p = Potential::regge_wheeler(bh);
        let x = 4.0;
        let h = 1e-5;
        let fd = (p.value(x + h) - p.value(x - h)) / (2.0 * h);
        let d = p.derivative(x).unwrap();
        assert!((d - fd).abs() < 1e-8 * d.abs().max(1e-3));
    }
}
