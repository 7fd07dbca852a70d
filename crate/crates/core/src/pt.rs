//! Closed-form Pöschl–Teller results: hypergeometric outgoing waves, the eigenvalue
//! ladder, partner potentials and the self-replication family.

use crate::error::{Error, Result};
use crate::potential::{NumericTable, Potential, PtParams};
use crate::scalar::{ii, lit, re, Cx, Real};
use crate::spectral::{Mode, ModeKind};
use crate::special::hyp2f1_split;
use crate::susy::{generator_from_table, Class, Generator};

/// `(xi, 1 - xi)` with `xi = 1 / (1 + e^{-2x/b})`, both without cancellation.
pub fn xi_pair<T: Real>(x: T, b: T) -> (T, T) {
    let u = lit::<T>(2.0) * x / b;
    let xi = T::one() / (T::one() + (-u).exp());
    let one_minus = T::one() / (T::one() + u.exp());
    (xi, one_minus)
}

/// `ln cosh u` without overflow.
fn ln_cosh<T: Real>(u: T) -> T {
    let a = u.abs();
    a + (-(a + a)).exp().ln_1p() - T::LN_2()
}

/// Outgoing-on-the-left PT wave `[xi(1-xi)]^{-i w b/2} 2F1(1/2+q-iwb, 1/2-q-iwb; 1-iwb; xi)`
/// and its `x`-derivative. Unit amplitude `e^{-i w x}` as `x -> -inf`.
pub fn pt_outgoing_wave<T: Real>(q: Cx<T>, b: T, omega: Cx<T>, x: T) -> Result<(Cx<T>, Cx<T>)> {
    let half = re::<T>(lit(0.5));
    let one = re::<T>(T::one());
    let iwb = ii::<T>() * omega * re(b);
    let (pa, pb, pc) = (half + q - iwb, half - q - iwb, one - iwb);
    let (xi, om) = xi_pair(x, b);
    let f = hyp2f1_split(pa, pb, pc, xi, om)?;
    let df = pa * pb / pc * hyp2f1_split(pa + one, pb + one, pc + one, xi, om)?;
    let s = -iwb * half;
    // xi (1 - xi) = 1 / (4 cosh^2(x/b))
    let ln_p = -(lit::<T>(4.0).ln() + lit::<T>(2.0) * ln_cosh(x / b));
    let pre = (s * re(ln_p)).exp();
    let phi = pre * f;
    let dphi = pre * re(lit::<T>(2.0) / b) * (s * re(T::one() - xi - xi) * f + re(xi * om) * df);
    Ok((phi, dphi))
}

/// One rung of the PT ladder.
#[derive(Debug, Clone)]
pub struct PtLevel<T: Real> {
    pub n: usize,
    /// `+1` or `-1` for the `omega_n^+-` string.
    pub sign: i8,
    pub parity: i8,
    pub mode: Mode<T>,
}

/// `omega_n^+-(q) = -(i/b)(n + 1/2 +- q)`.
pub fn ladder_frequency<T: Real>(q: Cx<T>, b: T, n: usize, sign: i8) -> Cx<T> {
    let s = re::<T>(lit(sign as f64));
    let k = re::<T>(lit::<T>(n as f64) + lit(0.5)) + s * q;
    -ii::<T>() * k / re(b)
}

fn kind_of<T: Real>(w: Cx<T>) -> ModeKind {
    let tiny = lit::<T>(1e-14);
    if w.norm() < tiny {
        ModeKind::Marginal
    } else if w.im > T::zero() {
        ModeKind::Nm
    } else if w.re.abs() < tiny {
        ModeKind::ZeroMode
    } else {
        ModeKind::Qnm
    }
}

/// Half-integer `q = 1/2 + l` detection.
pub fn half_integer_l<T: Real>(q: Cx<T>) -> Option<usize> {
    if q.im.abs() > lit(1e-12) {
        return None;
    }
    let l = q.re - lit(0.5);
    let r = l.round();
    if r >= T::zero() && (l - r).abs() < lit(1e-12) {
        r.to_usize()
    } else {
        None
    }
}

/// Ladder for `n <= n_max`, in the order `omega_0^-, omega_0^+, omega_1^-, ...`.
/// `q` is taken with nonnegative real part; `q = 0` gives double entries and half-integer
/// `q = 1/2 + l` keeps only `i omega b = -l..l`.
pub fn pt_spectrum<T: Real>(q: Cx<T>, b: T, n_max: usize) -> Vec<PtLevel<T>> {
    let q = if q.re < T::zero() || (q.re == T::zero() && q.im < T::zero()) { -q } else { q };
    let mut out = Vec::new();
    if let Some(l) = half_integer_l(q) {
        for n in 0..=(2 * l).min(n_max) {
            let w = ladder_frequency(q, b, n, -1);
            let w = Cx::new(T::zero(), w.im);
            out.push(PtLevel { n, sign: -1, parity: parity(n), mode: Mode::new(w, kind_of(w), 1, T::zero()) });
        }
        return out;
    }
    let double = q.norm() < lit(1e-12);
    for n in 0..=n_max {
        for sign in [-1i8, 1] {
            if double && sign == 1 {
                continue;
            }
            let w = ladder_frequency(q, b, n, sign);
            let order = if double { 2 } else { 1 };
            out.push(PtLevel { n, sign, parity: parity(n), mode: Mode::new(w, kind_of(w), order, T::zero()) });
        }
    }
    out
}

fn parity(n: usize) -> i8 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Coefficients of the closed-form partner `V~_n^+-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtPartnerCoeffs<T> {
    pub n: usize,
    pub sign: i8,
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> PtPartnerCoeffs<T> {
    pub fn new(q: T, width: T, n: usize, sign: i8) -> Result<Self> {
        let s = lit::<T>(sign as f64);
        let nn = lit::<T>(n as f64);
        let two = lit::<T>(2.0);
        let b2 = width * width;
        let db = -two * nn + T::one() + s * two * q;
        let dc = lit::<T>(3.0) - two * nn + s * two * q;
        if db.abs() < lit(1e-12) || dc.abs() < lit(1e-12) {
            return Err(Error::DegenerateParameters(crate::scalar::to_f64(q)));
        }
        Ok(Self {
            n,
            sign,
            a: (-two * nn - T::one() - s * two * q) / b2,
            b: nn * (nn - s * two * q) / b2 / db,
            c: (nn - T::one()) * (nn - T::one() - s * two * q) / dc,
        })
    }
}

/// Exact generator `Phi_n^+-` (unnormalized) for real `q`: `cosh^{n+1/2+-q}(x/b) P_n(xi)` with
/// `P_n` the terminating hypergeometric polynomial. Returns `(ln|Phi|, sign, Phi'/Phi)`.
pub fn pt_generator<T: Real>(q: T, width: T, n: usize, sign: i8, x: T) -> Result<(T, T, T)> {
    let s = lit::<T>(sign as f64);
    let nn = lit::<T>(n as f64);
    let half = lit::<T>(0.5);
    let k = nn + half + s * q;
    // a = -n (sign +) or b = -n (sign -): the polynomial parameters
    let (pa, pb, pc) = if sign > 0 {
        (-nn, -nn - lit::<T>(2.0) * q, half - nn - q)
    } else {
        (lit::<T>(2.0) * q - nn, -nn, half - nn + q)
    };
    let (xi, om) = xi_pair(x, width);
    let (p, dp) = poly(pa, pb, pc, n, xi)?;
    let u = x / width;
    let ln_phi = k * ln_cosh(u) + p.abs().ln();
    let logd = k * u.tanh() / width + lit::<T>(2.0) / width * xi * om * dp / p;
    Ok((ln_phi, p.signum(), logd))
}

/// Terminating `2F1(a, b; c; xi)` of degree `n` and its `xi`-derivative.
fn poly<T: Real>(a: T, b: T, c: T, n: usize, xi: T) -> Result<(T, T)> {
    let mut coef = T::one();
    let mut val = T::one();
    let mut der = T::zero();
    let mut pw = T::one();
    for k in 0..n {
        let kk = lit::<T>(k as f64);
        let den = (c + kk) * (kk + T::one());
        if den.abs() < lit(1e-12) {
            return Err(Error::DegenerateParameters(crate::scalar::to_f64(c)));
        }
        coef = coef * (a + kk) * (b + kk) / den;
        der += coef * (kk + T::one()) * pw;
        pw = pw * xi;
        val += coef * pw;
    }
    Ok((val, der))
}

fn real_q<T: Real>(pt: &PtParams<T>) -> Result<T> {
    let q = pt.q();
    if q.im != T::zero() {
        return Err(Error::ComplexOmegaSquared);
    }
    Ok(q.re)
}

/// The SUSY generator built on the exact `Phi_n^+-`, tabulated on `[-L b, L b]` with
/// `L = PARTNER_HALF_WIDTH`. Decaying generators are class D on both sides, growing ones class I.
pub fn pt_susy_generator<T: Real>(pt: &PtParams<T>, n: usize, sign: i8) -> Result<Generator<T>> {
    let q = real_q(pt)?;
    let b = pt.width;
    let k = lit::<T>(n as f64) + lit(0.5) + lit::<T>(sign as f64) * q;
    if k == T::zero() {
        return Err(Error::OmegaZeroUnsupported);
    }
    let half = lit::<T>(PARTNER_HALF_WIDTH) * b;
    let count = (lit::<T>(2.0 * PARTNER_HALF_WIDTH * 200.0) * (T::one() + (k.abs() + q.abs()) / lit(4.0))).ceil().to_usize().unwrap_or(16000);
    let h = (half + half) / lit(count as f64);
    let mut nodes = Vec::with_capacity(count + 1);
    let mut w = Vec::with_capacity(count + 1);
    let mut ln_phi = Vec::with_capacity(count + 1);
    let mut signs = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let x = -half + h * lit(i as f64);
        let (l, sg, d) = pt_generator(q, b, n, sign, x)?;
        nodes.push(x);
        w.push(-d);
        ln_phi.push(l);
        signs.push(sg);
    }
    if signs.windows(2).any(|s| s[0] != s[1]) {
        return Err(Error::NodefulGenerator);
    }
    let class = if k < T::zero() { Class::D } else { Class::I };
    let kk = k.abs() / b;
    generator_from_table(&Potential::poschl_teller(*pt), -kk * kk, nodes, w, ln_phi, class, class)
}

/// Half-width of sampled partners, in units of `b`.
pub const PARTNER_HALF_WIDTH: f64 = 40.0;

/// Partner of the PT potential generated by `Phi_n^+-`. For `n = 0` the partner is again PT
/// with `q~ = |1 +- q|`; otherwise it is sampled from the exact generator.
pub fn pt_partner<T: Real>(pt: &PtParams<T>, n: usize, sign: i8) -> Result<Potential<T>> {
    let q = real_q(pt)?;
    let b = pt.width;
    if n == 0 {
        let qt = (T::one() + lit::<T>(sign as f64) * q).abs();
        return Ok(Potential::poschl_teller(PtParams::from_q(qt, b)?));
    }
    if n % 2 == 1 {
        return Err(Error::NodefulGenerator);
    }
    let omega2 = -{
        let k = (lit::<T>(n as f64) + lit(0.5) + lit::<T>(sign as f64) * q) / b;
        k * k
    };
    // node screen on xi in (0, 1)
    let half = lit::<T>(0.5);
    let nn = lit::<T>(n as f64);
    let (pa, pb, pc) = if sign > 0 {
        (-nn, -nn - lit::<T>(2.0) * q, half - nn - q)
    } else {
        (lit::<T>(2.0) * q - nn, -nn, half - nn + q)
    };
    let m = 4000;
    let mut prev = poly(pa, pb, pc, n, T::zero())?.0;
    for i in 1..=m {
        let xi = lit::<T>(i as f64 / m as f64);
        let v = poly(pa, pb, pc, n, xi)?.0;
        if v.signum() != prev.signum() || v == T::zero() {
            return Err(Error::NodefulGenerator);
        }
        prev = v;
    }
    let half_w = lit::<T>(PARTNER_HALF_WIDTH) * b;
    let h = lit::<T>(0.005) * b;
    let count = (lit::<T>(2.0) * half_w / h).round().to_usize().unwrap_or(16000);
    let mut vs = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let x = -half_w + h * lit(i as f64);
        let (_, _, logd) = pt_generator(q, b, n, sign, x)?;
        let w = -logd;
        let sech = T::one() / (x / b).cosh();
        let v = pt.strength * sech * sech;
        vs.push(lit::<T>(2.0) * (w * w + omega2) - v);
    }
    Ok(Potential::numeric(NumericTable::uniform(-half_w, h, vs)?))
}

/// PT potential with `b^2 V = -l(l+1)`, reflectionless with `l` normal modes.
pub fn free_field_ladder<T: Real>(l: usize, width: T) -> Result<Potential<T>> {
    if l == 0 {
        return Err(Error::InvalidParameter("ladder index must be >= 1".into()));
    }
    let ll = lit::<T>(l as f64);
    Ok(Potential::poschl_teller(PtParams::new(-ll * (ll + T::one()) / (width * width), width)?))
}

/// Self-replicating superpotential `W = -K tanh(K beta x)` with `V~ = alpha V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfReplication<T> {
    pub alpha: T,
    pub beta: T,
    pub k: T,
}

impl<T: Real> SelfReplication<T> {
    pub fn w(&self, x: T) -> T {
        -self.k * (self.k * self.beta * x).tanh()
    }

    pub fn dw(&self, x: T) -> T {
        let s = T::one() / (self.k * self.beta * x).cosh();
        -self.k * self.k * self.beta * s * s
    }

    pub fn v(&self, x: T) -> T {
        let s = T::one() / (self.k * self.beta * x).cosh();
        (self.beta - T::one()) * self.k * self.k * s * s
    }

    pub fn v_tilde(&self, x: T) -> T {
        let s = T::one() / (self.k * self.beta * x).cosh();
        (-self.beta - T::one()) * self.k * self.k * s * s
    }

    /// `Phi = cosh(K beta x)^{1/beta}` and `Phi''`.
    pub fn phi(&self, x: T) -> (T, T) {
        let u = self.k * self.beta * x;
        let p = u.cosh().powf(T::one() / self.beta);
        let w = self.w(x);
        // Phi'' = (W^2 - W') Phi
        (p, (w * w - self.dw(x)) * p)
    }

    pub fn omega2(&self) -> T {
        -self.k * self.k
    }

    /// The pair as PT parameters `(V, V~)`.
    pub fn as_pt(&self) -> Result<(PtParams<T>, PtParams<T>)> {
        let width = T::one() / (self.k * self.beta.abs());
        let k2 = self.k * self.k;
        Ok((PtParams::new((self.beta - T::one()) * k2, width)?, PtParams::new((-self.beta - T::one()) * k2, width)?))
    }
}

pub fn self_replication<T: Real>(alpha: T, k: T) -> Result<SelfReplication<T>> {
    if !(alpha > T::zero()) || !(k > T::zero()) {
        return Err(Error::InvalidParameter("alpha and K must be positive".into()));
    }
    if (alpha - T::one()).abs() < lit(1e-14) {
        return Err(Error::AlphaOne);
    }
    Ok(SelfReplication { alpha, beta: (alpha - T::one()) / (alpha + T::one()), k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::hyp2f1;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn hyp2f1_values() {
        assert_eq!(hyp2f1(c(0.3, 1.0), c(2.0, 0.0), c(1.5, 0.0), 0.0).unwrap(), c(1.0, 0.0));
        let v = hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), 0.3).unwrap();
        assert!((v.re - (-(0.7f64).ln() / 0.3)).abs() < 1e-12);
        let v = hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), 0.9).unwrap();
        assert!((v.re - (-(0.1f64).ln() / 0.9)).abs() < 1e-10, "{v}");
        let v = hyp2f1(c(0.75, -0.3), c(0.25, -0.3), c(1.0, -0.3), 0.93).unwrap();
        assert!((v - c(1.182513806923989, -0.8350281289941112)).norm() < 1e-10, "{v}");
        let v = hyp2f1(c(0.7, 2.0), c(0.2, -1.0), c(1.9, 1.0), 0.999).unwrap();
        assert!((v - c(3.964506353441154, -2.831597816488568)).norm() < 1e-10, "{v}");
        let v = hyp2f1(c(1.5, 0.0), c(-0.49999, 0.0), c(2.0, 0.0), 0.8).unwrap();
        assert!((v.re - 0.6146275522363455).abs() < 1e-10, "{v}");
    }

    #[test]
    fn degenerate_c() {
        assert!(matches!(hyp2f1(c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0), 0.3), Err(Error::DegenerateParameters(_))));
    }

    #[test]
    fn free_limit_is_plane_wave() {
        let w = c(0.7, -0.2);
        for x in [-3.0, 0.0, 2.5] {
            let (p, dp) = pt_outgoing_wave(c(0.5, 0.0), 1.0, w, x).unwrap();
            let e = (-Cx::<f64>::i() * w * x).exp();
            // 2F1(1-iwb, -iwb; 1-iwb; xi) = (1-xi)^{iwb}, so phi = e^{-iwx}
            assert!((p - e).norm() < 1e-10, "{p} {e}");
            assert!((dp + Cx::<f64>::i() * w * e).norm() < 1e-9);
        }
    }

    #[test]
    fn ladder_for_quarter() {
        let sp = pt_spectrum(c(0.25, 0.0), 1.0, 2);
        let ims: Vec<f64> = sp.iter().map(|l| l.mode.omega.im).collect();
        assert_eq!(ims[..3], [-0.25, -0.75, -1.25]);
        assert!(sp.iter().all(|l| l.mode.kind == ModeKind::ZeroMode));
    }

    #[test]
    fn half_integer_restriction() {
        let sp = pt_spectrum(c(1.5, 0.0), 1.0, 10);
        let ims: Vec<f64> = sp.iter().map(|l| l.mode.omega.im).collect();
        assert_eq!(ims, vec![1.0, 0.0, -1.0]);
        assert_eq!(sp[1].mode.kind, ModeKind::Marginal);
    }

    #[test]
    fn partner_strengths() {
        let pt = PtParams::new(3.0 / 16.0, 1.0).unwrap();
        for (sign, want) in [(1i8, -21.0f64 / 16.0), (-1, -5.0 / 16.0)] {
            match pt_partner(&pt, 0, sign).unwrap().kind() {
                crate::PotentialKind::PoschlTeller(p) => assert!((p.reduced_strength() - want).abs() < 1e-15),
                _ => panic!(),
            }
        }
        assert_eq!(pt_partner(&pt, 1, 1).unwrap_err(), Error::NodefulGenerator);
    }

    #[test]
    fn b0_vanishes() {
        for sign in [1i8, -1] {
            assert_eq!(PtPartnerCoeffs::new(0.25, 1.0, 0, sign).unwrap().b, 0.0);
        }
    }

    #[test]
    fn self_replication_alpha_three() {
        let s = self_replication(3.0f64, 1.2).unwrap();
        assert!((s.beta - 0.5).abs() < 1e-15);
        for i in 0..50 {
            let x = -5.0 + 0.2 * i as f64;
            assert!((s.v_tilde(x) - 3.0 * s.v(x)).abs() < 1e-12);
        }
        assert_eq!(self_replication(1.0, 1.0).unwrap_err(), Error::AlphaOne);
    }

    #[test]
    fn matches_numerical_left_solution() {
        use crate::propagation::{outgoing_state, PropagationOptions, Side};
        let pt = PtParams::new(0.7, 1.3).unwrap();
        let pot = Potential::poschl_teller(pt);
        for w in [c(1.0, 0.0), c(0.6, -0.3), c(0.0, 0.4)] {
            for x in [-1.0, 0.3, 2.0] {
                let (p, dp) = pt_outgoing_wave(pt.q(), pt.width, w, x).unwrap();
                let st = outgoing_state(&pot, w, Side::Left, x, &PropagationOptions::default()).unwrap();
                let a = dp / p;
                let b = st.log_derivative();
                assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()), "{w} {x}: {a} vs {b}");
            }
        }
    }
}
