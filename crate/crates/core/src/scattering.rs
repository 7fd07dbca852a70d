//! Reflection and transmission amplitudes and their SUSY transforms.
//!
//! Plane waves are referred to `x = 0`: `phi = e^{i w x} + R_L e^{-i w x}` far left and
//! `T_L e^{i w x}` far right, and mirror-wise for waves incident from the right.

use crate::error::{Error, Result};
use crate::ode::State;
use crate::potential::Potential;
use crate::propagation::{outgoing_state, Side};
use crate::scalar::{ii, lit, re, to_f64, Cx, Real};
use crate::spectral::{default_match, SolverOptions};
use crate::susy::Generator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringData<T: Real> {
    pub omega: Cx<T>,
    pub r_l: Cx<T>,
    pub t_l: Cx<T>,
    pub r_r: Cx<T>,
    pub t_r: Cx<T>,
}

impl<T: Real> ScatteringData<T> {
    /// `|R_L|^2 + |T_L|^2 - 1`
    pub fn unitarity_defect(&self) -> T {
        self.r_l.norm_sqr() + self.t_l.norm_sqr() - T::one()
    }
}

/// `W[a, b] = a' b - a b'` as mantissa and binary exponent.
fn wr<T: Real>(a: &State<T>, b: &State<T>) -> (Cx<T>, T) {
    (a.dphi * b.phi - a.phi * b.dphi, a.log2 + b.log2)
}

fn ratio<T: Real>(num: (Cx<T>, T), den: (Cx<T>, T)) -> Cx<T> {
    num.0 / den.0 * lit::<T>(2.0).powf(num.1 - den.1)
}

/// Amplitudes from the outgoing solutions: `T = -2 i w / J_q`, `R_L = -J_t(w) / J_q(w)`,
/// `R_R = -J_t(-w) / J_q(w)`.
pub fn amplitudes<T: Real>(p: &Potential<T>, omega: Cx<T>, opts: &SolverOptions<T>) -> Result<ScatteringData<T>> {
    if omega.norm() < lit(1e-14) {
        return Err(Error::OmegaZeroUnsupported);
    }
    let x = opts.x_match.unwrap_or_else(|| default_match(p));
    let f = outgoing_state(p, omega, Side::Left, x, &opts.prop)?;
    let g = outgoing_state(p, omega, Side::Right, x, &opts.prop)?;
    let fm = outgoing_state(p, -omega, Side::Left, x, &opts.prop)?;
    let gm = outgoing_state(p, -omega, Side::Right, x, &opts.prop)?;
    let jq = wr(&f, &g);
    let jt = wr(&fm, &g);
    let jt_minus = wr(&f, &gm);
    let two_iw = ii::<T>() * omega * lit::<T>(2.0);
    // |J_q| against the free-field value 2|w| and the other Wronskians
    let scale_ln = (two_iw.norm()).ln().max(jt.0.norm().ln() + jt.1 * T::LN_2());
    let jq_ln = jq.0.norm().ln() + jq.1 * T::LN_2();
    if !(jq_ln - scale_ln > lit::<T>(1e-12).ln()) {
        return Err(Error::AtModeFrequency(to_f64(omega.norm())));
    }
    let t = -two_iw / jq.0 * lit::<T>(2.0).powf(-jq.1);
    let r_l = -ratio(jt, jq);
    let r_r = -ratio(jt_minus, jq);
    Ok(ScatteringData { omega, r_l, t_l: t, r_r, t_r: t })
}

fn factor<T: Real>(num: Cx<T>, den: Cx<T>) -> Result<Cx<T>> {
    if den.norm() < lit::<T>(1e-14) * (T::one() + num.norm()) {
        return Err(Error::PrefactorPole { re: to_f64(den.re), im: to_f64(den.im) });
    }
    Ok(num / den)
}

/// Partner amplitudes: `R~_L = (-iw + W-)/(iw + W-) R_L`, `T~_L = (iw + W+)/(iw + W-) T_L`,
/// and the right-incident pair with `W+- -> W-+`, `w -> -w`.
pub fn susy_amplitudes<T: Real>(s: &ScatteringData<T>, gen: &Generator<T>) -> Result<ScatteringData<T>> {
    let iw = ii::<T>() * s.omega;
    let wm = re::<T>(gen.w_minus());
    let wp = re::<T>(gen.w_plus());
    Ok(ScatteringData {
        omega: s.omega,
        r_l: factor(-iw + wm, iw + wm)? * s.r_l,
        t_l: factor(iw + wp, iw + wm)? * s.t_l,
        r_r: factor(iw + wp, -iw + wp)? * s.r_r,
        t_r: factor(-iw + wm, -iw + wp)? * s.t_r,
    })
}

/// Amplitudes on a list of frequencies, in parallel.
pub fn amplitudes_on<T: Real + Send + Sync>(p: &Potential<T>, omegas: &[Cx<T>], opts: &SolverOptions<T>) -> Vec<Result<ScatteringData<T>>>
where
    Cx<T>: Send + Sync,
{
    use rayon::prelude::*;
    omegas.par_iter().map(|&w| amplitudes(p, w, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn barrier_t(v0: f64, a: f64, w: f64) -> Cx<f64> {
        let k = Cx::new(w, 0.0);
        let kap = (Cx::new(w * w - v0, 0.0)).sqrt();
        let i = Cx::<f64>::i();
        let den = (kap * 2.0 * a).cos() - i * (k * k + kap * kap) / (k * kap * 2.0) * (kap * 2.0 * a).sin();
        (-i * k * 2.0 * a).exp() / den
    }

    #[test]
    fn free_field() {
        let s = amplitudes(&Potential::<f64>::free(), Cx::new(0.8, 0.0), &SolverOptions::default()).unwrap();
        assert!(s.r_l.norm() < 1e-14 && (s.t_l - 1.0).norm() < 1e-14);
    }

    #[test]
    fn square_barrier_closed_form() {
        let p = Potential::<f64>::square(0.16, 1.0).unwrap();
        let s = amplitudes(&p, Cx::new(1.0, 0.0), &SolverOptions::default()).unwrap();
        assert!(s.unitarity_defect().abs() < 1e-8);
        let t = barrier_t(0.16, 1.0, 1.0);
        assert!((s.t_l - t).norm() < 1e-10, "{} {t}", s.t_l);
        assert!((s.r_l.norm() - s.r_r.norm()).abs() < 1e-12);
    }
}
