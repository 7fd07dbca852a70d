//! Mode-detecting Wronskians, their complex zeros, and parameter scans.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ode::State;
use crate::potential::Potential;
use crate::propagation::{band_limit, outgoing_state, propagate_outgoing, OutgoingSolution, PropagationOptions, Side};
use crate::scalar::{lit, to_f64, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    /// `J_q = f' g - f g'`: normal and quasinormal modes.
    Q,
    /// `J_t = f'(-w) g(w) - f(-w) g'(w)`: total-transmission modes.
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Nm,
    Qnm,
    /// QNM on the negative imaginary axis.
    ZeroMode,
    TtmL,
    TtmR,
    /// `omega = 0`, neither bound nor decaying.
    Marginal,
}

impl ModeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModeKind::Nm => "NM",
            ModeKind::Qnm => "QNM",
            ModeKind::ZeroMode => "ZeroMode",
            ModeKind::TtmL => "TTM_L",
            ModeKind::TtmR => "TTM_R",
            ModeKind::Marginal => "Marginal",
        }
    }

    pub fn is_qnm_like(&self) -> bool {
        matches!(self, ModeKind::Qnm | ModeKind::ZeroMode)
    }
}

#[derive(Debug, Clone)]
pub struct Mode<T: Real> {
    pub omega: Cx<T>,
    pub kind: ModeKind,
    pub order: usize,
    /// `|J|` at the polished root.
    pub residual: T,
    pub wavefunction: Option<OutgoingSolution<T>>,
}

impl<T: Real> Mode<T> {
    pub fn new(omega: Cx<T>, kind: ModeKind, order: usize, residual: T) -> Self {
        Self { omega, kind, order, residual, wavefunction: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WronskianSample<T: Real> {
    pub omega: Cx<T>,
    pub jq: Cx<T>,
    pub jt: Cx<T>,
    pub djq: Cx<T>,
    pub djt: Cx<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region<T> {
    pub re_min: T,
    pub re_max: T,
    pub im_min: T,
    pub im_max: T,
}

impl<T: Real> Region<T> {
    pub fn new(re_min: T, re_max: T, im_min: T, im_max: T) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn contains(&self, w: Cx<T>, slack: T) -> bool {
        w.re >= self.re_min - slack && w.re <= self.re_max + slack && w.im >= self.im_min - slack && w.im <= self.im_max + slack
    }

    pub fn is_symmetric(&self) -> bool {
        (self.re_min + self.re_max).abs() <= lit::<T>(1e-12) * (T::one() + self.re_max.abs())
    }

    pub fn spans_axis(&self) -> bool {
        self.re_min <= T::zero() && self.re_max >= T::zero()
    }

    pub fn is_empty(&self) -> bool {
        !(self.re_max >= self.re_min && self.im_max >= self.im_min)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    pub prop: PropagationOptions<T>,
    /// Wronskian matching point; defaults to the middle of the core region.
    pub x_match: Option<T>,
    pub grid_re: usize,
    pub grid_im: usize,
    /// Fraction of grid points (lowest `|J|` first) allowed to seed Newton. Local minima of
    /// `|J|` sit at very different levels across a region, so the default keeps all of them.
    pub seed_quantile: f64,
    pub newton_max_iter: usize,
    pub axis_samples: usize,
    /// Roots closer than `dedup * (1 + |w|)` are merged.
    pub dedup: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            prop: PropagationOptions::default(),
            x_match: None,
            grid_re: 80,
            grid_im: 80,
            seed_quantile: 1.0,
            newton_max_iter: 80,
            axis_samples: 400,
            dedup: lit(1e-6),
        }
    }
}

/// A Wronskian value as mantissa times `2^log2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledValue<T: Real> {
    pub mantissa: Cx<T>,
    pub log2: T,
}

impl<T: Real> ScaledValue<T> {
    pub fn value(&self) -> Cx<T> {
        self.mantissa * lit::<T>(2.0).powf(self.log2)
    }

    /// `ln |J|`.
    pub fn ln_abs(&self) -> T {
        self.mantissa.norm().ln() + self.log2 * T::LN_2()
    }
}

pub fn default_match<T: Real>(p: &Potential<T>) -> T {
    let s = p.support();
    (s.left.edge() + s.right.edge()) * lit(0.5)
}

fn wr<T: Real>(a: &State<T>, b: &State<T>) -> ScaledValue<T> {
    ScaledValue { mantissa: a.dphi * b.phi - a.phi * b.dphi, log2: a.log2 + b.log2 }
}

/// `J` at `omega` as a scaled value, matched at `x`.
pub fn wronskian_scaled_at<T: Real>(
    p: &Potential<T>,
    omega: Cx<T>,
    which: Which,
    x: T,
    opts: &SolverOptions<T>,
) -> Result<ScaledValue<T>> {
    let fw = match which {
        Which::Q => omega,
        Which::T => -omega,
    };
    let f = outgoing_state(p, fw, Side::Left, x, &opts.prop)?;
    let g = outgoing_state(p, omega, Side::Right, x, &opts.prop)?;
    Ok(wr(&f, &g))
}

pub fn wronskian_scaled<T: Real>(p: &Potential<T>, omega: Cx<T>, which: Which, opts: &SolverOptions<T>) -> Result<ScaledValue<T>> {
    let x = opts.x_match.unwrap_or_else(|| default_match(p));
    wronskian_scaled_at(p, omega, which, x, opts)
}

/// `J_q` or `J_t` at `omega`.
pub fn wronskian_value<T: Real>(p: &Potential<T>, omega: Cx<T>, which: Which, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    Ok(wronskian_scaled(p, omega, which, opts)?.value())
}

fn fd_step<T: Real>(omega: Cx<T>) -> T {
    lit::<T>(1e-6) * (T::one() + omega.norm())
}

/// Central-difference `dJ/domega`.
pub fn wronskian_derivative<T: Real>(p: &Potential<T>, omega: Cx<T>, which: Which, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    let h = fd_step(omega);
    let a = wronskian_value(p, omega + Cx::new(h, T::zero()), which, opts)?;
    let b = wronskian_value(p, omega - Cx::new(h, T::zero()), which, opts)?;
    Ok((a - b) / Cx::new(h + h, T::zero()))
}

/// Both Wronskians and their derivatives at `omega`.
pub fn wronskian<T: Real>(p: &Potential<T>, omega: Cx<T>, opts: &SolverOptions<T>) -> Result<WronskianSample<T>> {
    Ok(WronskianSample {
        omega,
        jq: wronskian_value(p, omega, Which::Q, opts)?,
        jt: wronskian_value(p, omega, Which::T, opts)?,
        djq: wronskian_derivative(p, omega, Which::Q, opts)?,
        djt: wronskian_derivative(p, omega, Which::T, opts)?,
    })
}

/// Five-point second derivative with step `h`.
pub fn second_derivative<T: Real>(p: &Potential<T>, w: Cx<T>, which: Which, h: T, opts: &SolverOptions<T>) -> Result<Cx<T>> {
    let e = |k: f64| wronskian_value(p, w + Cx::new(h * lit(k), T::zero()), which, opts);
    let s = -e(2.0)? + e(1.0)? * lit::<T>(16.0) - e(0.0)? * lit::<T>(30.0) + e(-1.0)? * lit::<T>(16.0) - e(-2.0)?;
    Ok(s / (lit::<T>(12.0) * h * h))
}

/// Lowest `Im omega` where both outgoing solutions needed by `which` are valid.
pub fn region_band_floor<T: Real>(p: &Potential<T>, which: Which, opts: &SolverOptions<T>) -> Option<T> {
    let l = band_limit(p, Side::Left, &opts.prop);
    let r = band_limit(p, Side::Right, &opts.prop);
    match which {
        Which::Q => match (l, r) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(T::neg_infinity()).max(b.unwrap_or(T::neg_infinity()))),
        },
        Which::T => r,
    }
}

fn classify<T: Real>(w: Cx<T>, which: Which) -> (Cx<T>, ModeKind) {
    let tiny = lit::<T>(1e-12) * (T::one() + w.norm());
    match which {
        Which::Q => {
            if w.norm() < tiny {
                (w, ModeKind::Marginal)
            } else if w.im > T::zero() {
                (w, ModeKind::Nm)
            } else if w.re == T::zero() {
                (w, ModeKind::ZeroMode)
            } else {
                (w, ModeKind::Qnm)
            }
        }
        Which::T => {
            if w.im <= T::zero() {
                (w, ModeKind::TtmL)
            } else {
                (-w, ModeKind::TtmR)
            }
        }
    }
}

struct Polished<T: Real> {
    omega: Cx<T>,
    residual: T,
}

/// Damped Newton with a switch to the multiplicity-2 update when convergence turns linear.
fn newton<T: Real>(p: &Potential<T>, seed: Cx<T>, which: Which, opts: &SolverOptions<T>) -> Result<Polished<T>> {
    let mut w = seed;
    let mut jw = wronskian_value(p, w, which, opts)?;
    let mut last_step = T::infinity();
    let mut mult = T::one();
    let mut linear_hits = 0;
    for _ in 0..opts.newton_max_iter {
        if jw.norm() == T::zero() {
            break;
        }
        let d = wronskian_derivative(p, w, which, opts)?;
        if !(d.norm() > T::zero()) {
            break;
        }
        let full = jw / d * mult;
        let mut lambda = T::one();
        let mut accepted = false;
        let mut nw = w;
        let mut nj = jw;
        for _ in 0..12 {
            let cand = w - full * lambda;
            match wronskian_value(p, cand, which, opts) {
                Ok(cj) if cj.norm().is_finite() && cj.norm() < jw.norm() * (T::one() - lit::<T>(1e-4) * lambda) => {
                    nw = cand;
                    nj = cj;
                    accepted = true;
                    break;
                }
                Ok(cj) if mult > T::one() && cj.norm().is_finite() && cj.norm() <= jw.norm() => {
                    nw = cand;
                    nj = cj;
                    accepted = true;
                    break;
                }
                _ => lambda = lambda * lit(0.5),
            }
        }
        if !accepted {
            break;
        }
        let step = (nw - w).norm();
        if step > lit::<T>(0.3) * last_step && step < lit::<T>(0.7) * last_step && mult == T::one() {
            linear_hits += 1;
            if linear_hits >= 2 {
                mult = lit(2.0);
            }
        }
        last_step = step;
        w = nw;
        jw = nj;
        if step <= lit::<T>(1e-13) * (T::one() + w.norm()) {
            break;
        }
    }
    let scale = local_scale(p, w, which, opts)?;
    if !(jw.norm() <= lit::<T>(1e-6) * scale) {
        return Err(Error::NonConvergence(format!(
            "Newton from {} stalled at |J| = {:e}",
            crate::io::fmt_complex(crate::scalar::cx_to_f64(seed)),
            to_f64(jw.norm())
        )));
    }
    Ok(Polished { omega: w, residual: jw.norm() })
}

/// Typical `|J|` a short distance from `w`.
pub fn local_scale<T: Real>(p: &Potential<T>, w: Cx<T>, which: Which, opts: &SolverOptions<T>) -> Result<T> {
    let r = lit::<T>(0.05) * (T::one() + w.norm());
    let mut acc = T::zero();
    for k in 0..4 {
        let th = lit::<T>(k as f64) * T::FRAC_PI_2() + lit::<T>(0.3);
        let v = wronskian_value(p, w + Cx::new(r * th.cos(), r * th.sin()), which, opts)?;
        acc += v.norm();
    }
    Ok(acc / lit(4.0))
}

/// A root must vanish relative to the nearby scale when `J` is matched at two different
/// points; roots produced by cancellation noise fail one of the two.
pub fn is_genuine_root<T: Real>(p: &Potential<T>, w: Cx<T>, which: Which, opts: &SolverOptions<T>) -> bool {
    let check = || -> Result<bool> {
        let scale = local_scale(p, w, which, opts)?;
        let xm = opts.x_match.unwrap_or_else(|| default_match(p));
        let edge = p.support().right.edge();
        // far from the core the inward-decaying solution is lost to round-off
        let alt = xm + ((edge - xm) * lit(0.25) + lit(0.1)).min(T::one());
        let j1 = wronskian_scaled_at(p, w, which, xm, opts)?.value().norm();
        let j2 = wronskian_scaled_at(p, w, which, alt, opts)?.value().norm();
        let tol = lit::<T>(1e-6) * scale;
        Ok(j1 <= tol && j2 <= tol)
    };
    check().unwrap_or(false)
}

/// Taylor coefficients `J^(k)/k!`, `k = 0..4`, from a circle of 16 samples around `w`.
pub fn taylor_coefficients<T: Real>(p: &Potential<T>, w: Cx<T>, which: Which, r: T, opts: &SolverOptions<T>) -> Result<[Cx<T>; 4]> {
    const N: usize = 16;
    let mut vals = Vec::with_capacity(N);
    for j in 0..N {
        let th = lit::<T>(std::f64::consts::TAU * j as f64 / N as f64);
        vals.push(wronskian_value(p, w + Cx::new(th.cos(), th.sin()) * r, which, opts)?);
    }
    let mut out = [Cx::new(T::zero(), T::zero()); 4];
    for (k, c) in out.iter_mut().enumerate() {
        let mut acc = Cx::new(T::zero(), T::zero());
        for (j, &v) in vals.iter().enumerate() {
            let th = lit::<T>(std::f64::consts::TAU * (j * k) as f64 / N as f64);
            acc = acc + v * Cx::new(th.cos(), -th.sin());
        }
        *c = acc / (r.powi(k as i32) * lit(N as f64));
    }
    Ok(out)
}

/// Multiplicity test: `1`, `2`, or `SuspectedHigherOrderZero`.
pub fn root_order<T: Real>(p: &Potential<T>, w: Cx<T>, which: Which, opts: &SolverOptions<T>) -> Result<usize> {
    let r = lit::<T>(1e-2) * (T::one() + w.norm());
    let c = taylor_coefficients(p, w, which, r, opts)?;
    let scale = T::one() + w.norm();
    if !(c[1].norm() < lit::<T>(1e-5) * c[2].norm() * scale * lit(2.0)) {
        return Ok(1);
    }
    if !(c[2].norm() > lit::<T>(1e-5) * c[3].norm() * scale) {
        return Err(Error::SuspectedHigherOrderZero { re: to_f64(w.re), im: to_f64(w.im) });
    }
    Ok(2)
}

/// Result of a region search.
#[derive(Debug, Clone)]
pub struct ModeSearch<T: Real> {
    pub modes: Vec<Mode<T>>,
    /// Seeds whose Newton iteration did not converge.
    pub failures: Vec<Error>,
}

/// All zeros of `J` inside `region`, polished, classified and sorted by `(Im, Re)` descending.
pub fn find_modes<T: Real>(p: &Potential<T>, region: Region<T>, which: Which, opts: &SolverOptions<T>) -> Result<ModeSearch<T>> {
    if region.is_empty() {
        return Ok(ModeSearch { modes: vec![], failures: vec![] });
    }
    if let Some(floor) = region_band_floor(p, which, opts) {
        if region.im_min < floor {
            return Err(Error::BandViolation { im_omega: to_f64(region.im_min), limit: to_f64(floor) });
        }
    }
    if which == Which::T {
        if let Some(l) = band_limit(p, Side::Left, &opts.prop) {
            if -region.im_max < l {
                return Err(Error::BandViolation { im_omega: to_f64(-region.im_max), limit: to_f64(l) });
            }
        }
    }
    let tailed = !p.support().is_finite();
    let nr = opts.grid_re.max(3);
    let ni = opts.grid_im.max(3);
    let off = if tailed { lit::<T>(1e-6) } else { T::zero() };
    let pts: Vec<(usize, usize, Cx<T>)> = (0..ni)
        .flat_map(|i| (0..nr).map(move |j| (i, j)))
        .map(|(i, j)| {
            let re = region.re_min + (region.re_max - region.re_min) * lit(j as f64 / (nr - 1) as f64);
            let im = region.im_min + (region.im_max - region.im_min) * lit(i as f64 / (ni - 1) as f64);
            let re = if tailed && re == T::zero() && im < T::zero() { off } else { re };
            (i, j, Cx::new(re, im))
        })
        .collect();
    let vals: Vec<T> = pts
        .par_iter()
        .map(|&(_, _, w)| wronskian_scaled(p, w, which, opts).map(|s| s.ln_abs()).unwrap_or(T::infinity()))
        .collect();
    let mut sorted: Vec<T> = vals.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let thresh = if sorted.is_empty() {
        T::infinity()
    } else {
        sorted[((sorted.len() as f64 * opts.seed_quantile) as usize).min(sorted.len() - 1)]
    };
    let at = |i: usize, j: usize| vals[i * nr + j];
    let mut seeds = Vec::new();
    for i in 0..ni {
        for j in 0..nr {
            let v = at(i, j);
            if !(v <= thresh) {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= ni as i64 || b >= nr as i64 {
                        continue;
                    }
                    if at(a as usize, b as usize) < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push(pts[i * nr + j].2);
            }
        }
    }
    let polished: Vec<Result<Polished<T>>> = seeds.par_iter().map(|&s| newton(p, s, which, opts)).collect();
    let mut failures = Vec::new();
    let mut roots: Vec<Polished<T>> = Vec::new();
    for r in polished {
        match r {
            Ok(pz) => roots.push(pz),
            Err(e) => failures.push(e),
        }
    }
    if region.spans_axis() {
        for (w, res) in axis_roots(p, region.im_min, region.im_max, which, opts)? {
            roots.push(Polished { omega: w, residual: res });
        }
    }
    let roots: Vec<Polished<T>> = roots.into_iter().filter(|r| is_genuine_root(p, r.omega, which, opts)).collect();
    let slack = lit::<T>(1e-9);
    let mut modes: Vec<Mode<T>> = Vec::new();
    for r in roots {
        let mut w = r.omega;
        if w.re.abs() < lit::<T>(1e-7) * (T::one() + w.norm()) && region.spans_axis() {
            w.re = T::zero();
        }
        if !region.contains(w, slack * (T::one() + w.norm())) {
            continue;
        }
        if let Some(m) = modes.iter_mut().find(|m| (m.omega - w).norm() < opts.dedup * (T::one() + w.norm()) + lit(1e-9)) {
            if r.residual < m.residual {
                m.residual = r.residual;
                if m.omega.re != T::zero() {
                    m.omega = w;
                }
            }
            continue;
        }
        modes.push(Mode::new(w, ModeKind::Qnm, 1, r.residual));
    }
    if region.is_symmetric() {
        let mut extra = Vec::new();
        for m in &modes {
            if m.omega.re == T::zero() {
                continue;
            }
            let mirror = Cx::new(-m.omega.re, m.omega.im);
            let have = modes.iter().chain(extra.iter()).any(|o: &Mode<T>| (o.omega - mirror).norm() < lit::<T>(1e-6) * (T::one() + mirror.norm()));
            if !have {
                match newton(p, mirror, which, opts) {
                    Ok(pz) => extra.push(Mode::new(pz.omega, ModeKind::Qnm, 1, pz.residual)),
                    Err(e) => failures.push(e),
                }
            }
        }
        modes.extend(extra);
    }
    for m in modes.iter_mut() {
        m.order = match root_order(p, m.omega, which, opts) {
            Ok(o) => o,
            Err(e) => {
                failures.push(e);
                3
            }
        };
        let (w, kind) = classify(m.omega, which);
        m.omega = w;
        m.kind = kind;
        assert!(!(kind == ModeKind::Nm && m.order >= 2), "doubled normal mode reported at {:?}", m.omega);
    }
    sort_modes(&mut modes);
    Ok(ModeSearch { modes, failures })
}

pub fn sort_modes<T: Real>(modes: &mut [Mode<T>]) {
    modes.sort_by(|a, b| {
        b.omega
            .im
            .partial_cmp(&a.omega.im)
            .unwrap()
            .then(a.omega.re.partial_cmp(&b.omega.re).unwrap())
    });
}

/// `J(iy)` as a real number times `2^log2` (real up to rounding for real `V`).
fn axis_value<T: Real>(p: &Potential<T>, y: T, which: Which, opts: &SolverOptions<T>) -> Result<(T, T)> {
    let s = wronskian_scaled(p, Cx::new(T::zero(), y), which, opts)?;
    Ok((s.mantissa.re, s.log2))
}

fn axis_sign_root<T: Real>(p: &Potential<T>, mut a: T, mut b: T, sa: T, which: Which, opts: &SolverOptions<T>) -> Result<T> {
    // Illinois-free bisection: robust with log-scaled values
    let mut fa = sa;
    for _ in 0..200 {
        let m = (a + b) * lit(0.5);
        if (b - a).abs() <= lit::<T>(2e-14) * (T::one() + m.abs()) {
            break;
        }
        let (fm, _) = axis_value(p, m, which, opts)?;
        if fm == T::zero() {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) * lit(0.5))
}

/// Roots of `J` on the imaginary axis within `[y0, y1]` (returned as `iy`) with `|J|` residuals.
/// Close pairs hidden between samples are caught by refining extrema of `J` toward zero.
pub fn axis_roots<T: Real>(p: &Potential<T>, y0: T, y1: T, which: Which, opts: &SolverOptions<T>) -> Result<Vec<(Cx<T>, T)>> {
    let n = opts.axis_samples.max(8);
    let floor = region_band_floor(p, which, opts);
    let lo = match floor {
        Some(f) => y0.max(f),
        None => y0,
    };
    let ys: Vec<T> = (0..=n)
        .map(|k| {
            let y = lo + (y1 - lo) * lit(k as f64 / n as f64);
            // keep off omega = 0 where J vanishes trivially for the free field
            if y == T::zero() {
                lit::<T>(1e-9) * (T::one() + y1.abs())
            } else {
                y
            }
        })
        .collect();
    let vals: Vec<Result<(T, T)>> = ys.par_iter().map(|&y| axis_value(p, y, which, opts)).collect();
    let mut fv = Vec::with_capacity(vals.len());
    for v in vals {
        fv.push(v?);
    }
    let mut out = Vec::new();
    let ln = |v: (T, T)| v.0.abs().ln() + v.1 * T::LN_2();
    for k in 0..n {
        let (a, b) = (fv[k], fv[k + 1]);
        if a.0 == T::zero() {
            out.push(ys[k]);
            continue;
        }
        if a.0.signum() != b.0.signum() && b.0 != T::zero() {
            out.push(axis_sign_root(p, ys[k], ys[k + 1], a.0, which, opts)?);
        }
    }
    if fv[n].0 == T::zero() {
        out.push(ys[n]);
    }
    // same-sign dips: refine the extremum of sign * J
    for k in 1..n {
        let (a, b, c) = (fv[k - 1], fv[k], fv[k + 1]);
        if !(a.0.signum() == b.0.signum() && b.0.signum() == c.0.signum()) {
            continue;
        }
        if !(ln(b) < ln(a) && ln(b) < ln(c)) {
            continue;
        }
        let sg = b.0.signum();
        let g = lit::<T>(0.5 * (5f64.sqrt() - 1.0));
        let (mut l, mut r) = (ys[k - 1], ys[k + 1]);
        let eval = |y: T| -> Result<T> {
            let (m, l2) = axis_value(p, y, which, opts)?;
            Ok(sg * m * lit::<T>(2.0).powf(l2 - b.1))
        };
        for _ in 0..120 {
            let c1 = r - g * (r - l);
            let c2 = l + g * (r - l);
            if eval(c1)? < eval(c2)? {
                r = c2;
            } else {
                l = c1;
            }
            if (r - l).abs() < lit::<T>(1e-10) * (T::one() + r.abs()) {
                break;
            }
        }
        let ym = (l + r) * lit(0.5);
        let vm = eval(ym)?;
        let ref_scale = eval(ys[k - 1])?.abs().max(eval(ys[k + 1])?.abs());
        if vm <= T::zero() {
            out.push(axis_sign_root(p, ys[k - 1], ym, sg, which, opts)?);
            out.push(axis_sign_root(p, ym, ys[k + 1], -sg, which, opts)?);
        } else if vm < lit::<T>(1e-6) * ref_scale {
            out.push(ym);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut res = Vec::new();
    for y in out {
        let w = Cx::new(T::zero(), y);
        if !is_genuine_root(p, w, which, opts) {
            continue;
        }
        let r = wronskian_value(p, w, which, opts)?.norm();
        res.push((w, r));
    }
    Ok(res)
}

/// Number of axis roots in `[y0, y1]`.
pub fn axis_root_count<T: Real>(p: &Potential<T>, y0: T, y1: T, which: Which, opts: &SolverOptions<T>) -> Result<usize> {
    Ok(axis_roots(p, y0, y1, which, opts)?.len())
}

/// Parameter at which the count of imaginary-axis roots in `[y0, y1]` changes, by bisection to `tol`.
pub fn critical_parameter_scan<T: Real, F>(
    family: F,
    lo: T,
    hi: T,
    y0: T,
    y1: T,
    tol: T,
    opts: &SolverOptions<T>,
) -> Result<T>
where
    F: Fn(T) -> Result<Potential<T>>,
{
    let count = |v: T| -> Result<usize> { axis_root_count(&family(v)?, y0, y1, Which::Q, opts) };
    let c_lo = count(lo)?;
    let c_hi = count(hi)?;
    if c_lo == c_hi {
        return Err(Error::NoMerge);
    }
    let (mut a, mut b) = (lo, hi);
    while (b - a).abs() > tol {
        let m = (a + b) * lit(0.5);
        if count(m)? == c_lo {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a + b) * lit(0.5))
}

/// Normalized eigenfunction `g(omega, x)` on `grid`.
pub fn eigenfunction<T: Real>(p: &Potential<T>, mode: &Mode<T>, grid: &[T], opts: &SolverOptions<T>) -> Result<OutgoingSolution<T>> {
    let w = match mode.kind {
        ModeKind::TtmR => -mode.omega,
        _ => mode.omega,
    };
    propagate_outgoing(p, w, Side::Right, grid, &opts.prop)
}

/// Multiply by the global phase that makes `phi` as real as possible; returns the phase and residual.
pub fn phase_align<T: Real>(phi: &[Cx<T>]) -> (Vec<T>, T) {
    let s = phi.iter().fold(Cx::new(T::zero(), T::zero()), |a, v| a + v * v);
    let th = s.arg() * lit(0.5);
    let rot = Cx::new(th.cos(), -th.sin());
    let max = phi.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    let mut worst = T::zero();
    let out = phi
        .iter()
        .map(|v| {
            let z = v * rot;
            worst = worst.max(z.im.abs());
            z.re
        })
        .collect();
    let rel = if max > T::zero() { worst / max } else { T::zero() };
    (out, rel)
}

/// Sign changes of the phase-aligned profile.
pub fn node_count<T: Real>(phi: &[Cx<T>]) -> Result<usize> {
    let (real, rel) = phase_align(phi);
    if rel > lit(1e-8) {
        return Err(Error::NotRealizable(to_f64(rel)));
    }
    let max = real.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = lit::<T>(1e-12) * max;
    let mut count = 0;
    let mut last = T::zero();
    for &v in &real {
        if v.abs() <= floor {
            continue;
        }
        if last != T::zero() && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    Ok(count)
}

/// Zeros of the current `Im(phi* phi')` along the grid: each node or antinode of a
/// complex profile is one of them.
pub fn current_zero_count<T: Real>(values: &[Cx<T>], derivs: &[Cx<T>]) -> usize {
    let j: Vec<T> = values.iter().zip(derivs).map(|(a, b)| (a.conj() * b).im).collect();
    let max = j.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = lit::<T>(1e-10) * max;
    let mut count = 0;
    let mut last = T::zero();
    for &v in &j {
        if v.abs() <= floor {
            continue;
        }
        if last != T::zero() && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_field_wronskian() {
        let p = Potential::<f64>::free();
        let o = SolverOptions::default();
        for w in [Cx::new(1.0, 0.0), Cx::new(-0.3, 2.0), Cx::new(0.5, -1.5)] {
            let j = wronskian_value(&p, w, Which::Q, &o).unwrap();
            assert!((j - Cx::new(0.0, -2.0) * w).norm() < 1e-12);
        }
    }

    #[test]
    fn free_field_has_no_modes() {
        let p = Potential::<f64>::free();
        let mut o = SolverOptions::default();
        o.grid_re = 20;
        o.grid_im = 20;
        let r = find_modes(&p, Region::new(0.5, 3.0, -2.0, 2.0), Which::Q, &o).unwrap();
        assert!(r.modes.is_empty());
    }

    #[test]
    fn square_well_ground_state_is_a_root() {
        let p = Potential::square(-20.0, 1.0).unwrap();
        let o = SolverOptions::default();
        let r = axis_roots(&p, 0.1, 5.0, Which::Q, &o).unwrap();
        let ys: Vec<f64> = r.iter().map(|(w, _)| w.im).collect();
        assert_eq!(ys.len(), 3, "{ys:?}");
        for (got, want) in ys.iter().zip([2.47153, 3.68214, 4.28492]) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
    }

    #[test]
    fn node_count_on_profiles() {
        let xs: Vec<f64> = (0..201).map(|i| -2.0 + 0.02 * i as f64).collect();
        let c: Vec<Cx<f64>> = xs.iter().map(|x| Cx::new(x.cosh(), 0.0) * Cx::new(0.0, 1.0)).collect();
        assert_eq!(node_count(&c).unwrap(), 0);
        let s: Vec<Cx<f64>> = xs.iter().map(|x| Cx::new((2.0 * x).sin(), 0.0)).collect();
        assert_eq!(node_count(&s).unwrap(), 3);
        let bad: Vec<Cx<f64>> = xs.iter().map(|x| Cx::new(0.0, *x).exp()).collect();
        assert!(node_count(&bad).is_err());
    }
}
