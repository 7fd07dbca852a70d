//! Complex gamma function and the Gauss hypergeometric function on `[0, 1)`.

use crate::error::{Error, Result};
use crate::scalar::{lit, re, to_f64, Cx, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(z)` for `Re z >= 1/2` (Lanczos).
fn ln_gamma_right<T: Real>(z: Cx<T>) -> Cx<T> {
    let z = z - re(T::one());
    let mut x = re::<T>(lit(LANCZOS[0]));
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x = x + re::<T>(lit(c)) / (z + re(lit::<T>(i as f64)));
    }
    let t = z + re(lit::<T>(LANCZOS_G + 0.5));
    re::<T>(lit(0.5 * (2.0 * std::f64::consts::PI).ln())) + (z + re(lit::<T>(0.5))) * t.ln() - t + x.ln()
}

/// `ln Gamma(z)` on the principal sheet up to multiples of `2 pi i`.
pub fn ln_gamma<T: Real>(z: Cx<T>) -> Cx<T> {
    if z.re >= lit(0.5) {
        return ln_gamma_right(z);
    }
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    let pi = T::PI();
    let s = (z * re(pi)).sin();
    re::<T>(pi.ln()) - s.ln() - ln_gamma_right(re::<T>(T::one()) - z)
}

pub fn gamma<T: Real>(z: Cx<T>) -> Cx<T> {
    ln_gamma(z).exp()
}

/// `1 / Gamma(z)`, entire; exactly zero at nonpositive integers.
pub fn rgamma<T: Real>(z: Cx<T>) -> Cx<T> {
    if z.re < lit(0.5) {
        let n = z.re.round();
        if z.im == T::zero() && z.re == n {
            return Cx::new(T::zero(), T::zero());
        }
        let pi = T::PI();
        let s = (z * re(pi)).sin();
        return s / re(pi) * ln_gamma_right(re::<T>(T::one()) - z).exp();
    }
    (-ln_gamma_right(z)).exp()
}

fn series<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, z: T) -> Result<Cx<T>> {
    let mut term = re::<T>(T::one());
    let mut sum = term;
    let tiny = lit::<T>(1e-17);
    for k in 0..5000usize {
        let kk = lit::<T>(k as f64);
        let den = (c + re(kk)) * re(kk + T::one());
        term = term * (a + re(kk)) * (b + re(kk)) / den * re(z);
        sum = sum + term;
        if term.norm() <= tiny * sum.norm() && k > 2 {
            return Ok(sum);
        }
        if term.norm() == T::zero() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("hypergeometric series".into()))
}

fn near_nonpositive_integer<T: Real>(c: Cx<T>) -> bool {
    let n = c.re.round();
    n <= T::zero() && (c - re(n)).norm() < lit(1e-9)
}

/// Connection formula `z -> 1 - z`, valid when `c - a - b` is not an integer.
fn connection<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, w: T) -> Result<Cx<T>> {
    let one = re::<T>(T::one());
    let s = c - a - b;
    let lc = ln_gamma(c);
    let t1 = (lc + ln_gamma(s)).exp() * rgamma(c - a) * rgamma(c - b);
    let t2 = (lc + ln_gamma(-s)).exp() * rgamma(a) * rgamma(b);
    let f1 = if t1.norm() == T::zero() { t1 } else { t1 * series(a, b, one - s, w)? };
    let f2 = if t2.norm() == T::zero() {
        t2
    } else {
        let pw = if w > T::zero() { (s * re(w.ln())).exp() } else { Cx::new(T::zero(), T::zero()) };
        t2 * pw * series(c - a, c - b, one + s, w)?
    };
    Ok(f1 + f2)
}

/// `2F1(a, b; c; z)` for real `z` in `[0, 1)`; `w = 1 - z` is passed separately so that
/// callers can supply it without cancellation.
pub fn hyp2f1_split<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, z: T, w: T) -> Result<Cx<T>> {
    if near_nonpositive_integer(c) {
        return Err(Error::DegenerateParameters(to_f64(c.re)));
    }
    if !(z >= T::zero() && w > T::zero()) {
        return Err(Error::InvalidParameter("hyp2f1 needs 0 <= z < 1".into()));
    }
    if z <= lit(0.5) {
        return series(a, b, c, z);
    }
    // terminating series are fine anywhere on [0, 1)
    for p in [a, b] {
        if near_nonpositive_integer(p) && p.re > lit(-60.0) {
            return series(a, b, c, z);
        }
    }
    let s = c - a - b;
    if (s - re(s.re.round())).norm() > lit(1e-4) {
        return connection(a, b, c, w);
    }
    // c - a - b near an integer: average over symmetric shifts of (a, b), Richardson in the shift
    let sym = |h: T| -> Result<Cx<T>> {
        let h = re::<T>(h);
        Ok((connection(a + h, b + h, c, w)? + connection(a - h, b - h, c, w)?) * re(lit::<T>(0.5)))
    };
    let h = lit::<T>(2e-4);
    let s1 = sym(h)?;
    let s2 = sym(h + h)?;
    Ok((s1 * re(lit::<T>(4.0)) - s2) / re(lit::<T>(3.0)))
}

pub fn hyp2f1<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>, z: T) -> Result<Cx<T>> {
    hyp2f1_split(a, b, c, z, T::one() - z)
}
