//! SUSY generators, partner potentials, the intertwining operator and spectral bookkeeping.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{State, Tolerances};
use crate::potential::{Decay, Potential, Support};
use crate::propagation::{Propagator, PropagationOptions, Side};
use crate::scalar::{ii, lit, re, to_f64, Cx, Real};
use crate::spectral::{local_scale, wronskian_value, Mode, ModeKind, SolverOptions, Which, WronskianSample};
use crate::superpotential::{Outer, Superpotential};

/// Asymptotic behaviour of `Phi` at one end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Class<T> {
    /// `Phi ~ e^{-K|x|}`
    D,
    /// `Phi ~ e^{K|x|}`
    I,
    /// `Phi = c e^{K|x|} + d e^{-K|x|}` beyond the support.
    M { c: T, d: T },
}

impl<T> Class<T> {
    pub fn letter(&self) -> char {
        match self {
            Class::D => 'D',
            Class::I => 'I',
            Class::M { .. } => 'M',
        }
    }

    /// Class of `1 / Phi`.
    pub fn inverted(&self) -> Class<T> {
        match self {
            Class::D => Class::I,
            Class::I | Class::M { .. } => Class::D,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenType {
    /// DD: removes the normal mode at `iK`.
    T1,
    /// II: removes the zero mode at `-iK`.
    T2,
    /// DI
    T3a,
    /// ID
    T3b,
    /// at least one side mixed
    T4,
}

impl GenType {
    pub fn from_classes<T>(left: &Class<T>, right: &Class<T>) -> Self {
        match (left, right) {
            (Class::D, Class::D) => GenType::T1,
            (Class::I, Class::I) => GenType::T2,
            (Class::D, Class::I) => GenType::T3a,
            (Class::I, Class::D) => GenType::T3b,
            _ => GenType::T4,
        }
    }

    pub fn classes(&self) -> Option<(char, char)> {
        match self {
            GenType::T1 => Some(('D', 'D')),
            GenType::T2 => Some(('I', 'I')),
            GenType::T3a => Some(('D', 'I')),
            GenType::T3b => Some(('I', 'D')),
            GenType::T4 => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            GenType::T1 => "T1",
            GenType::T2 => "T2",
            GenType::T3a => "T3a",
            GenType::T3b => "T3b",
            GenType::T4 => "T4",
        }
    }
}

/// How `Phi` is pinned down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Request<T> {
    /// An eigen-solution with the classes of the given type (not `T4`).
    Type(GenType),
    /// `Phi = c e^{K|x|} + d e^{-K|x|}` beyond the support on `side`; the other side follows.
    Mix { side: Side, c: T, d: T },
    /// Even `Phi` of a symmetric potential.
    Symmetric,
}

#[derive(Debug, Clone, Copy)]
pub struct GeneratorOptions<T> {
    pub tol: Tolerances<T>,
    pub prop: PropagationOptions<T>,
    /// Table nodes per unit length (scaled up for steep potentials).
    pub density: T,
    pub x_match: Option<T>,
    /// Largest relative change of `K` during eigenvalue refinement.
    pub max_shift: T,
}

impl<T: Real> Default for GeneratorOptions<T> {
    fn default() -> Self {
        let tol = Tolerances { rtol: lit(1e-12), atol: lit(1e-14), max_steps: 4_000_000 };
        Self { tol, prop: PropagationOptions { tol, ..Default::default() }, density: lit(200.0), x_match: None, max_shift: lit(0.05) }
    }
}

/// A validated SUSY generator `Phi` with `W = -Phi'/Phi`.
#[derive(Debug, Clone)]
pub struct Generator<T: Real> {
    source: Potential<T>,
    partner: Potential<T>,
    sp: Arc<Superpotential<T>>,
    omega2: T,
    k: T,
    left: Class<T>,
    right: Class<T>,
    gtype: GenType,
    grid: Vec<T>,
    ln_phi: Vec<T>,
    riccati: T,
}

fn w_minus<T: Real>(c: &Class<T>, k: T) -> T {
    match c {
        Class::D => -k,
        _ => k,
    }
}

fn w_plus<T: Real>(c: &Class<T>, k: T) -> T {
    match c {
        Class::D => k,
        _ => -k,
    }
}

impl<T: Real> Generator<T> {
    pub fn source(&self) -> &Potential<T> {
        &self.source
    }

    /// `V~ = W^2 + W' + Omega^2`.
    pub fn partner(&self) -> &Potential<T> {
        &self.partner
    }

    pub fn superpotential(&self) -> &Superpotential<T> {
        &self.sp
    }

    pub fn omega2(&self) -> T {
        self.omega2
    }

    pub fn k(&self) -> T {
        self.k
    }

    /// `Omega = iK`.
    pub fn omega(&self) -> Cx<T> {
        Cx::new(T::zero(), self.k)
    }

    pub fn classes(&self) -> (Class<T>, Class<T>) {
        (self.left, self.right)
    }

    pub fn gen_type(&self) -> GenType {
        self.gtype
    }

    pub fn w_minus(&self) -> T {
        w_minus(&self.left, self.k)
    }

    pub fn w_plus(&self) -> T {
        w_plus(&self.right, self.k)
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn ln_phi(&self) -> &[T] {
        &self.ln_phi
    }

    /// `Phi` on the grid, scaled to unit maximum.
    pub fn phi(&self) -> Vec<T> {
        let m = self.ln_phi.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        self.ln_phi.iter().map(|&l| (l - m).exp()).collect()
    }

    pub fn w(&self, x: T) -> T {
        self.sp.w(x)
    }

    pub fn dw(&self, x: T) -> T {
        self.sp.dw(x, false)
    }

    /// Largest `|V - (W^2 - W' + Omega^2)|` with `W'` differentiated from the table.
    pub fn riccati_residual(&self) -> T {
        self.riccati
    }

    /// `(d/dx + W) phi` on samples.
    pub fn apply_a(&self, xs: &[T], phi: &[Cx<T>], dphi: &[Cx<T>]) -> Vec<Cx<T>> {
        xs.iter().zip(phi.iter().zip(dphi)).map(|(&x, (&p, &dp))| dp + p * re(self.w(x))).collect()
    }

    /// `A phi` and its derivative for a solution at frequency `omega`:
    /// `(A phi)' = W phi' + (W^2 + Omega^2 - omega^2) phi`.
    pub fn apply_a_state(&self, x: T, omega: Cx<T>, phi: Cx<T>, dphi: Cx<T>) -> (Cx<T>, Cx<T>) {
        let w = self.w(x);
        let psi = dphi + phi * re(w);
        let dpsi = dphi * re(w) + phi * (re(w * w + self.omega2) - omega * omega);
        (psi, dpsi)
    }

    /// `(-d/dx + W) psi` on samples.
    pub fn apply_a_dagger(&self, xs: &[T], psi: &[Cx<T>], dpsi: &[Cx<T>]) -> Vec<Cx<T>> {
        xs.iter().zip(psi.iter().zip(dpsi)).map(|(&x, (&p, &dp))| -dp + p * re(self.w(x))).collect()
    }

    /// Generator of the inverse map on the partner: `Phi~ = 1/Phi`, `W -> -W`.
    pub fn inverse(&self) -> Generator<T> {
        let sp = Arc::new(self.sp.reversed(self.partner.clone()));
        let partner = Potential::superpartner(sp.clone(), self.source.support(), self.source.is_symmetric());
        let left = self.left.inverted();
        let right = self.right.inverted();
        Generator {
            source: self.partner.clone(),
            partner,
            sp,
            omega2: self.omega2,
            k: self.k,
            left,
            right,
            gtype: GenType::from_classes(&left, &right),
            grid: self.grid.clone(),
            ln_phi: self.ln_phi.iter().map(|&l| -l).collect(),
            riccati: self.riccati,
        }
    }

    /// Rational factor `J~_q / J_q`.
    pub fn prefactor_q(&self, omega: Cx<T>) -> Result<(Cx<T>, Cx<T>)> {
        let i = ii::<T>();
        let k = re::<T>(self.k);
        rational(omega, [i * k, -i * k], [-i * re(self.w_minus()), i * re(self.w_plus())])
    }

    /// Rational factor `J~_t / J_t`.
    pub fn prefactor_t(&self, omega: Cx<T>) -> Result<(Cx<T>, Cx<T>)> {
        let i = ii::<T>();
        let k = re::<T>(self.k);
        let (p, dp) = rational(omega, [i * k, -i * k], [i * re(self.w_minus()), i * re(self.w_plus())])?;
        // (-omega + i W-) = -(omega - i W-)
        Ok((-p, -dp))
    }
}

/// `prod (omega - z_i) / prod (omega - p_j)` and its derivative, cancelling equal factors.
fn rational<T: Real>(omega: Cx<T>, zeros: [Cx<T>; 2], poles: [Cx<T>; 2]) -> Result<(Cx<T>, Cx<T>)> {
    let mut z: Vec<Cx<T>> = zeros.to_vec();
    let mut p: Vec<Cx<T>> = Vec::new();
    for q in poles {
        if let Some(i) = z.iter().position(|&a| a == q) {
            z.remove(i);
        } else {
            p.push(q);
        }
    }
    let scale = T::one() + omega.norm();
    for &q in &p {
        if (omega - q).norm() < lit::<T>(1e-14) * scale {
            return Err(Error::PrefactorPole { re: to_f64(q.re), im: to_f64(q.im) });
        }
    }
    let one = re::<T>(T::one());
    let num = z.iter().fold(one, |a, &b| a * (omega - b));
    let den = p.iter().fold(one, |a, &b| a * (omega - b));
    let val = num / den;
    let dnum = match z.len() {
        0 => Cx::new(T::zero(), T::zero()),
        1 => one,
        _ => (omega - z[0]) + (omega - z[1]),
    };
    let dden = match p.len() {
        0 => Cx::new(T::zero(), T::zero()),
        1 => one,
        _ => (omega - p[0]) + (omega - p[1]),
    };
    Ok((val, (dnum * den - num * dden) / (den * den)))
}

/// The Table 1 row of a generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDelta<T: Real> {
    pub d_nm: i32,
    pub d_qnm: i32,
    pub d_ttm_l: i32,
    pub d_ttm_r: i32,
    pub removed: Cx<T>,
    pub added: Cx<T>,
}

pub fn spectral_delta<T: Real>(gen: &Generator<T>) -> Result<SpectralDelta<T>> {
    let up = gen.omega();
    let down = -up;
    let (d, removed, added) = match gen.gtype {
        GenType::T1 => ([-1, 1, 0, 0], up, down),
        GenType::T2 => ([1, -1, 0, 0], down, up),
        GenType::T3a => ([0, 0, -1, 1], down, up),
        GenType::T3b => ([0, 0, 1, -1], up, down),
        GenType::T4 => return Err(Error::Type4NotTabulated),
    };
    Ok(SpectralDelta { d_nm: d[0], d_qnm: d[1], d_ttm_l: d[2], d_ttm_r: d[3], removed, added })
}

/// Partner-system Wronskians from the transformation laws.
pub fn transform_wronskian<T: Real>(j: &WronskianSample<T>, gen: &Generator<T>) -> Result<WronskianSample<T>> {
    let (pq, dpq) = gen.prefactor_q(j.omega)?;
    let (pt, dpt) = gen.prefactor_t(j.omega)?;
    Ok(WronskianSample {
        omega: j.omega,
        jq: pq * j.jq,
        jt: pt * j.jt,
        djq: dpq * j.jq + pq * j.djq,
        djt: dpt * j.jt + pt * j.djt,
    })
}

/// `V~` beyond a barrier for a mixed generator: `2 (W^2 - K^2) = -8 K^2 c d / (c e^{K|x|} + d e^{-K|x|})^2`.
pub fn type4_tail<T: Real>(k: T, c: T, d: T, x: T) -> T {
    let u = k * x.abs();
    // scaled by e^{-K|x|} to stay finite
    let den = c + d * (lit::<T>(-2.0) * u).exp();
    lit::<T>(-8.0) * k * k * c * d * (lit::<T>(-2.0) * u).exp() / (den * den)
}

fn check_omega2<T: Real>(omega2: T) -> Result<T> {
    if omega2.abs() < lit(1e-14) {
        return Err(Error::OmegaZeroUnsupported);
    }
    if !(omega2 < T::zero()) {
        return Err(Error::InvalidParameter("generator energy must be negative (Omega = iK)".into()));
    }
    Ok((-omega2).sqrt())
}

/// Generator from an eigenmode on the imaginary axis.
pub fn generator_from_mode<T: Real>(p: &Potential<T>, mode: &Mode<T>, gtype: GenType, opts: &GeneratorOptions<T>) -> Result<Generator<T>> {
    let w = mode.omega;
    if w.norm() < lit(1e-14) {
        return Err(Error::OmegaZeroUnsupported);
    }
    if w.re.abs() > lit::<T>(1e-9) * (T::one() + w.norm()) {
        return Err(Error::ComplexOmegaSquared);
    }
    make_generator(p, -w.im * w.im, Request::Type(gtype), opts)
}

pub fn make_generator<T: Real>(p: &Potential<T>, omega2: T, req: Request<T>, opts: &GeneratorOptions<T>) -> Result<Generator<T>> {
    let k = check_omega2(omega2)?;
    if let Decay::Algebraic { .. } = p.support().right {
        return Err(Error::InvalidParameter("generators need compact or exponentially decaying tails".into()));
    }
    match req {
        Request::Type(GenType::T4) => Err(Error::InvalidParameter("Type 4 needs mix coefficients".into())),
        Request::Type(t) => eigen_generator(p, k, t, opts),
        Request::Mix { side, c, d } => mixed_generator(p, k, side, c, d, opts),
        Request::Symmetric => {
            if !p.is_symmetric() {
                return Err(Error::InvalidParameter("symmetric request on an asymmetric potential".into()));
            }
            let (c, d) = even_coefficients(p, k, opts)?;
            mixed_generator(p, k, Side::Right, c, d, opts)
        }
    }
}

/// Table range and nodes, split at every singularity and at `extra`.
fn table_nodes<T: Real>(p: &Potential<T>, lo: T, hi: T, k: T, extra: &[T], opts: &GeneratorOptions<T>) -> Vec<T> {
    let steep = (k + p.peak().abs().sqrt()) / lit(4.0);
    let density = opts.density * steep.max(T::one());
    let mut brk: Vec<T> = vec![lo, hi];
    brk.extend(p.singularities().iter().copied().filter(|&s| s > lo && s < hi));
    brk.extend(extra.iter().copied().filter(|&s| s > lo && s < hi));
    brk.sort_by(|a, b| a.partial_cmp(b).unwrap());
    brk.dedup_by(|a, b| (*a - *b).abs() < lit(1e-12));
    let mut nodes = vec![brk[0]];
    for w in brk.windows(2) {
        let n = ((w[1] - w[0]) * density).ceil().to_usize().unwrap_or(4).max(4);
        for i in 1..=n {
            nodes.push(w[0] + (w[1] - w[0]) * lit(i as f64 / n as f64));
        }
        *nodes.last_mut().unwrap() = w[1];
    }
    nodes
}

fn side_omega<T: Real>(k: T, decaying: bool) -> Cx<T> {
    // f(iK) and g(iK) decay outward
    if decaying {
        Cx::new(T::zero(), k)
    } else {
        Cx::new(T::zero(), -k)
    }
}

fn prop_opts<T: Real>(opts: &GeneratorOptions<T>) -> PropagationOptions<T> {
    PropagationOptions { tol: opts.tol, ..opts.prop }
}

/// Sign of the normalized Wronskian of the left and right solutions at `xm`.
fn splice_mismatch<T: Real>(p: &Potential<T>, k: T, t: GenType, xm: T, opts: &GeneratorOptions<T>) -> Result<T> {
    let (l, r) = t.classes().unwrap();
    let po = prop_opts(opts);
    let mut fl = Propagator::outgoing(p, side_omega(k, l == 'D'), Side::Left, &po)?;
    fl.advance(xm)?;
    let mut gr = Propagator::outgoing(p, side_omega(k, r == 'D'), Side::Right, &po)?;
    gr.advance(xm)?;
    let a = fl.state();
    let b = gr.state();
    let s = k + p.peak().abs().sqrt() + T::one();
    let na = (a.phi.norm_sqr() + a.dphi.norm_sqr() / (s * s)).sqrt();
    let nb = (b.phi.norm_sqr() + b.dphi.norm_sqr() / (s * s)).sqrt();
    Ok(((a.dphi * b.phi - a.phi * b.dphi) / (na * nb * s)).re)
}

fn refine_k<T: Real>(p: &Potential<T>, k0: T, t: GenType, xm: T, opts: &GeneratorOptions<T>) -> Result<T> {
    let fail = || Error::NotAnEigenvalue(to_f64(-k0 * k0), 0.0);
    let mut a = k0;
    let mut b = k0 * (T::one() + lit(1e-6));
    let mut fa = splice_mismatch(p, a, t, xm, opts)?;
    let mut fb = splice_mismatch(p, b, t, xm, opts)?;
    for _ in 0..60 {
        if fb == T::zero() {
            break;
        }
        let den = fb - fa;
        if den == T::zero() {
            break;
        }
        let c = b - fb * (b - a) / den;
        if !(c > T::zero()) || (c - k0).abs() > opts.max_shift * k0 {
            return Err(fail());
        }
        a = b;
        fa = fb;
        b = c;
        fb = splice_mismatch(p, b, t, xm, opts)?;
        if (b - a).abs() <= lit::<T>(1e-14) * b {
            break;
        }
    }
    if fb.abs() > lit(1e-8) || (b - k0).abs() > opts.max_shift * k0 {
        return Err(fail());
    }
    Ok(b)
}

/// Scaled samples of a real solution: `ln|Phi|`, sign and `W`.
struct Samples<T> {
    ln: Vec<T>,
    sign: Vec<T>,
    w: Vec<T>,
}

fn sample<T: Real>(st: &State<T>) -> (T, T, T) {
    let ln = st.phi.norm().ln() + st.log2 * T::LN_2();
    (ln, st.phi.re.signum(), -(st.dphi / st.phi).re)
}

fn sweep<T: Real>(pr: &mut Propagator<'_, T>, xs: &[T]) -> Result<Samples<T>> {
    let mut out = Samples { ln: Vec::with_capacity(xs.len()), sign: Vec::with_capacity(xs.len()), w: Vec::with_capacity(xs.len()) };
    for &x in xs {
        pr.advance(x)?;
        let (l, s, w) = sample(&pr.state());
        out.ln.push(l);
        out.sign.push(s);
        out.w.push(w);
    }
    Ok(out)
}

fn table_range<T: Real>(p: &Potential<T>, k: T, classes: (char, char), opts: &GeneratorOptions<T>) -> Result<(T, T)> {
    let po = prop_opts(opts);
    let lo = crate::propagation::truncation_point(p, side_omega(k, classes.0 == 'D'), Side::Left, &po)?;
    let hi = crate::propagation::truncation_point(p, side_omega(k, classes.1 == 'D'), Side::Right, &po)?;
    Ok((lo, hi))
}

fn eigen_generator<T: Real>(p: &Potential<T>, k0: T, t: GenType, opts: &GeneratorOptions<T>) -> Result<Generator<T>> {
    let (l, r) = t.classes().unwrap();
    let (mut lo, mut hi) = table_range(p, k0, (l, r), opts)?;
    if !(hi - lo > lit(1e-12)) {
        return Err(Error::NotAnEigenvalue(to_f64(-k0 * k0), 0.0));
    }
    let xm = opts.x_match.unwrap_or((lo + hi) * lit(0.5));
    let k = refine_k(p, k0, t, xm, opts)?;
    let range = table_range(p, k, (l, r), opts)?;
    lo = range.0;
    hi = range.1;
    let nodes = table_nodes(p, lo, hi, k, &[xm], opts);
    let m = nodes.iter().position(|&x| x == xm).unwrap_or(nodes.len() / 2);
    let po = prop_opts(opts);
    let mut fl = Propagator::outgoing(p, side_omega(k, l == 'D'), Side::Left, &po)?;
    let left = sweep(&mut fl, &nodes[..=m])?;
    let mut gr = Propagator::outgoing(p, side_omega(k, r == 'D'), Side::Right, &po)?;
    let rev: Vec<T> = nodes[m..].iter().rev().copied().collect();
    let mut right = sweep(&mut gr, &rev)?;
    right.ln.reverse();
    right.sign.reverse();
    right.w.reverse();
    // splice at xm with Phi(xm) = 1 from both sides
    let (l0, s0) = (left.ln[m], left.sign[m]);
    let (r0, t0) = (right.ln[0], right.sign[0]);
    let mut ln = Vec::with_capacity(nodes.len());
    let mut sign = Vec::with_capacity(nodes.len());
    let mut w = Vec::with_capacity(nodes.len());
    for i in 0..m {
        ln.push(left.ln[i] - l0);
        sign.push(left.sign[i] * s0);
        w.push(left.w[i]);
    }
    for i in 0..right.ln.len() {
        ln.push(right.ln[i] - r0);
        sign.push(right.sign[i] * t0);
        w.push(right.w[i]);
    }
    let lc = if l == 'D' { Class::D } else { Class::I };
    let rc = if r == 'D' { Class::D } else { Class::I };
    let outer = (Outer::Const(w_minus(&lc, k)), Outer::Const(w_plus(&rc, k)));
    assemble(p, -k * k, nodes, w, ln, sign, lc, rc, outer)
}

/// `(c, d)` of the even solution on the right, `Phi(0) = 1`.
fn even_coefficients<T: Real>(p: &Potential<T>, k: T, opts: &GeneratorOptions<T>) -> Result<(T, T)> {
    let sup = p.support();
    if !sup.right.is_compact() {
        return Err(Error::InvalidParameter("mixed generators need a compactly supported potential".into()));
    }
    let xr = sup.right.edge().max(T::zero());
    let st = State::new(re(T::one()), re(T::zero()));
    let mut pr = Propagator::new(p, Cx::new(T::zero(), k), T::zero(), st, opts.tol);
    pr.advance(xr)?;
    let (c, d) = decompose(&pr.state(), k, xr, true);
    // normalize to c = 1 when possible
    if c != T::zero() {
        Ok((T::one(), d / c))
    } else {
        Ok((T::zero(), T::one()))
    }
}

/// `(c, d)` with `Phi = c e^{K|x|} + d e^{-K|x|}` from the state at `x`.
fn decompose<T: Real>(st: &State<T>, k: T, x: T, right: bool) -> (T, T) {
    // outward derivative
    let dphi = if right { st.dphi.re } else { -st.dphi.re };
    let phi = st.phi.re;
    let u = k * x.abs();
    let grow = (k * phi + dphi) / (lit::<T>(2.0) * k);
    let decay = (k * phi - dphi) / (lit::<T>(2.0) * k);
    let s = st.log2 * T::LN_2();
    (grow * (s - u).exp(), decay * (s + u).exp())
}

fn class_of<T: Real>(c: T, d: T, k: T, x: T) -> Class<T> {
    // compare the two terms at the support edge
    let u = k * x.abs();
    let a = c.abs() * u.exp();
    let b = d.abs() * (-u).exp();
    let tiny = lit::<T>(1e-9) * (a + b);
    if a <= tiny {
        Class::D
    } else if b <= tiny {
        Class::I
    } else {
        Class::M { c, d }
    }
}

fn outer_for<T: Real>(class: &Class<T>, k: T, x0: T, right: bool) -> Outer<T> {
    match *class {
        Class::D => Outer::Const(if right { k } else { -k }),
        Class::I => Outer::Const(if right { -k } else { k }),
        Class::M { c, d } => {
            // Phi = A e^{K u} + B e^{-K u}, u = |x| - |x0|; only B/A matters
            let u = k * x0.abs();
            Outer::Exp { k, x0, a: T::one(), b: d / c * (lit::<T>(-2.0) * u).exp() }
        }
    }
}

fn mixed_generator<T: Real>(p: &Potential<T>, k: T, side: Side, c: T, d: T, opts: &GeneratorOptions<T>) -> Result<Generator<T>> {
    let sup = p.support();
    if !sup.is_finite() {
        return Err(Error::InvalidParameter("mixed generators need a compactly supported potential".into()));
    }
    if c == T::zero() && d == T::zero() {
        return Err(Error::InvalidParameter("mix coefficients are both zero".into()));
    }
    let (mut lo, mut hi) = (sup.left.edge(), sup.right.edge());
    if hi - lo < lit(1e-12) {
        // free field: any range will do since V = 0 outside
        let h = T::one() / k;
        lo = lo - h;
        hi = hi + h;
    }
    let centre = (lo + hi) * lit(0.5);
    let nodes = table_nodes(p, lo, hi, k, &[centre], opts);
    let omega = Cx::new(T::zero(), k);
    let right = side == Side::Right;
    let x0 = if right { hi } else { lo };
    let u = k * x0.abs();
    // c e^{u} + d e^{-u} scaled by e^{-u}
    let e2 = (lit::<T>(-2.0) * u).exp();
    let phi = c + d * e2;
    let dphi = k * (c - d * e2) * if right { T::one() } else { -T::one() };
    let mut st = State::new(re(phi), re(dphi));
    st.log2 = u / T::LN_2();
    let mut pr = Propagator::new(p, omega, x0, st, opts.tol);
    let order: Vec<T> = if right { nodes.iter().rev().copied().collect() } else { nodes.clone() };
    let mut s = sweep(&mut pr, &order)?;
    let far = pr.state();
    if right {
        s.ln.reverse();
        s.sign.reverse();
        s.w.reverse();
    }
    let x1 = if right { lo } else { hi };
    let (c1, d1) = decompose(&far, k, x1, !right);
    let near = class_of(c, d, k, x0);
    let other = class_of(c1, d1, k, x1);
    let (lc, rc) = if right { (other, near) } else { (near, other) };
    let outer = (outer_for(&lc, k, lo, false), outer_for(&rc, k, hi, true));
    let n0 = s.ln.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let ln = s.ln.iter().map(|&l| l - n0).collect();
    assemble(p, -k * k, nodes, s.w, ln, s.sign, lc, rc, outer)
}

fn partner_support<T: Real>(p: &Potential<T>, k: T, lc: &Class<T>, rc: &Class<T>, lo: T, hi: T) -> Support<T> {
    let s = p.support();
    let side = |d: Decay<T>, c: &Class<T>, edge: T| -> Decay<T> {
        match (c, d) {
            (Class::M { .. }, Decay::Compact(_)) => Decay::Exponential { rate: lit::<T>(2.0) * k, edge },
            (Class::M { .. }, Decay::Exponential { rate, edge: e }) => Decay::Exponential { rate: rate.min(lit::<T>(2.0) * k), edge: e },
            (_, d) => d,
        }
    };
    Support { left: side(s.left, lc, lo), right: side(s.right, rc, hi) }
}

#[allow(clippy::too_many_arguments)]
fn assemble<T: Real>(
    p: &Potential<T>,
    omega2: T,
    nodes: Vec<T>,
    w: Vec<T>,
    ln_phi: Vec<T>,
    sign: Vec<T>,
    left: Class<T>,
    right: Class<T>,
    outer: (Outer<T>, Outer<T>),
) -> Result<Generator<T>> {
    let changes = sign.windows(2).filter(|s| s[0] != s[1]).count();
    if changes > 0 {
        return Err(Error::NodesPresent(changes));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NodesPresent(1));
    }
    // near-nodes: an interior dip of |Phi| far below its neighbourhood (within 1/K)
    let k = (-omega2).sqrt();
    let reach = T::one() / k;
    for i in 1..ln_phi.len().saturating_sub(1) {
        if ln_phi[i] <= ln_phi[i - 1] && ln_phi[i] <= ln_phi[i + 1] {
            let top = (0..nodes.len())
                .filter(|&j| (nodes[j] - nodes[i]).abs() <= reach)
                .fold(T::neg_infinity(), |a, j| a.max(ln_phi[j]));
            if ln_phi[i] < top + lit::<T>(1e-10).ln() {
                return Err(Error::NodesPresent(0));
            }
        }
    }
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    let sp = Arc::new(Superpotential::new(p.clone(), omega2, nodes.clone(), w, outer.0, outer.1));
    let symmetric = p.is_symmetric() && {
        let probe = [lit::<T>(0.13), lit(0.41), lit(0.77)];
        let span = hi.min(-lo);
        span > T::zero()
            && probe.iter().all(|&f| {
                let x = span * f;
                (sp.w(x) + sp.w(-x)).abs() < lit::<T>(1e-8) * (T::one() + k)
            })
    };
    let support = partner_support(p, k, &left, &right, lo, hi);
    let partner = Potential::superpartner(sp.clone(), support, symmetric);
    let riccati = riccati_check(p, &sp, &nodes);
    Ok(Generator {
        source: p.clone(),
        partner,
        sp,
        omega2,
        k,
        left,
        right,
        gtype: GenType::from_classes(&left, &right),
        grid: nodes,
        ln_phi,
        riccati,
    })
}

/// Five-point derivative of the interpolated `W` inside each table interval.
fn riccati_check<T: Real>(p: &Potential<T>, sp: &Superpotential<T>, nodes: &[T]) -> T {
    let mut worst = T::zero();
    let stride = (nodes.len() / 400).max(1);
    for i in (0..nodes.len() - 1).step_by(stride) {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let x = (a + b) * lit(0.5);
        let h = (b - a) / lit(8.0);
        let d = (sp.w(x - h - h) - lit::<T>(8.0) * sp.w(x - h) + lit::<T>(8.0) * sp.w(x + h) - sp.w(x + h + h)) / (lit::<T>(12.0) * h);
        let w = sp.w(x);
        let r = (p.value(x) - (w * w - d + sp.omega2())).abs();
        worst = worst.max(r);
    }
    worst
}

/// Build a generator from a known superpotential sampled on `nodes` (e.g. closed forms).
#[allow(clippy::too_many_arguments)]
pub fn generator_from_table<T: Real>(
    p: &Potential<T>,
    omega2: T,
    nodes: Vec<T>,
    w: Vec<T>,
    ln_phi: Vec<T>,
    left: Class<T>,
    right: Class<T>,
) -> Result<Generator<T>> {
    let k = check_omega2(omega2)?;
    let sign = vec![T::one(); nodes.len()];
    let outer = (outer_for(&left, k, nodes[0], false), outer_for(&right, k, nodes[nodes.len() - 1], true));
    assemble(p, omega2, nodes, w, ln_phi, sign, left, right, outer)
}

/// One line of an isospectrality report.
#[derive(Debug, Clone)]
pub struct IsoEntry<T: Real> {
    pub omega: Cx<T>,
    pub kind: ModeKind,
    /// `|J~|` on the partner at the mode (None when it could not be evaluated).
    pub partner_value: Option<T>,
    pub scale: Option<T>,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct IsospectralReport<T: Real> {
    pub entries: Vec<IsoEntry<T>>,
    pub delta: Option<SpectralDelta<T>>,
    /// The mode the transformation adds, checked on the partner.
    pub added: Option<IsoEntry<T>>,
    /// The removed mode must be absent on the partner.
    pub removed: Option<IsoEntry<T>>,
}

impl<T: Real> IsospectralReport<T> {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.ok) && self.added.as_ref().is_none_or(|e| e.ok) && self.removed.as_ref().is_none_or(|e| e.ok)
    }
}

fn which_for(kind: ModeKind) -> Which {
    match kind {
        ModeKind::TtmL | ModeKind::TtmR => Which::T,
        _ => Which::Q,
    }
}

fn probe<T: Real>(p: &Potential<T>, omega: Cx<T>, which: Which, opts: &SolverOptions<T>) -> (Option<T>, Option<T>) {
    let v = wronskian_value(p, omega, which, opts).ok().map(|v| v.norm());
    let s = local_scale(p, omega, which, opts).ok();
    (v, s)
}

/// Re-find every mode of `p` on the partner and check the removed/added pair.
pub fn verify_isospectral<T: Real>(gen: &Generator<T>, modes: &[Mode<T>], opts: &SolverOptions<T>) -> IsospectralReport<T> {
    let partner = gen.partner();
    let tol = lit::<T>(1e-6);
    let near = |w: Cx<T>| (w - gen.omega()).norm() < tol * (T::one() + gen.k) || (w + gen.omega()).norm() < tol * (T::one() + gen.k);
    let mut entries = Vec::new();
    for m in modes {
        if near(m.omega) || m.kind == ModeKind::Marginal {
            continue;
        }
        let which = which_for(m.kind);
        // a right TTM is stored at -omega of the J_t zero
        let at = if m.kind == ModeKind::TtmR { -m.omega } else { m.omega };
        let (v, s) = probe(partner, at, which, opts);
        let ok = matches!((v, s), (Some(v), Some(s)) if v <= tol * s);
        entries.push(IsoEntry { omega: m.omega, kind: m.kind, partner_value: v, scale: s, ok });
    }
    let delta = spectral_delta(gen).ok();
    let (added, removed) = match delta {
        Some(d) => {
            let which = if d.d_ttm_l != 0 { Which::T } else { Which::Q };
            let kind_at = |w: Cx<T>| -> ModeKind {
                match which {
                    Which::T if w.im < T::zero() => ModeKind::TtmL,
                    Which::T => ModeKind::TtmR,
                    Which::Q if w.im > T::zero() => ModeKind::Nm,
                    Which::Q => ModeKind::ZeroMode,
                }
            };
            let (va, sa) = probe(partner, d.added, which, opts);
            let a_ok = matches!((va, sa), (Some(v), Some(s)) if v <= tol * s);
            let (vr, sr) = probe(partner, d.removed, which, opts);
            let r_ok = matches!((vr, sr), (Some(v), Some(s)) if v > lit::<T>(1e-3) * s);
            (
                Some(IsoEntry { omega: d.added, kind: kind_at(d.added), partner_value: va, scale: sa, ok: a_ok }),
                Some(IsoEntry { omega: d.removed, kind: kind_at(d.removed), partner_value: vr, scale: sr, ok: r_ok }),
            )
        }
        None => (None, None),
    };
    IsospectralReport { entries, delta, added, removed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn well() -> Potential<f64> {
        Potential::square(-20.0, 1.0).unwrap()
    }

    #[test]
    fn square_well_ground_state_is_type1() {
        let g = make_generator(&well(), -4.28f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default()).unwrap();
        assert_eq!(g.gen_type(), GenType::T1);
        assert!((g.k() - 4.284918).abs() < 1e-6, "{}", g.k());
        // W = q tan(q x) inside
        let q = (20.0 - g.k() * g.k()).sqrt();
        for x in [-0.7, 0.0, 0.35, 0.9] {
            assert!((g.w(x) - q * (q * x).tan()).abs() < 1e-8, "{x}");
        }
        assert!(g.riccati_residual() < 1e-8 * 21.0, "{}", g.riccati_residual());
        for x in [-1.5, 1.2, 3.0] {
            assert!(g.partner().value(x).abs() < 1e-8);
        }
    }

    #[test]
    fn excited_state_has_nodes() {
        let r = make_generator(&well(), -3.682135f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default());
        assert!(matches!(r, Err(Error::NodesPresent(_))), "{r:?}");
    }

    #[test]
    fn wrong_energy_is_rejected() {
        let r = make_generator(&well(), -1.0, Request::Type(GenType::T1), &GeneratorOptions::default());
        assert!(matches!(r, Err(Error::NotAnEigenvalue(..))), "{r:?}");
        assert_eq!(make_generator(&well(), 0.0, Request::Symmetric, &GeneratorOptions::default()).unwrap_err(), Error::OmegaZeroUnsupported);
    }

    #[test]
    fn barrier_symmetric_mix() {
        let b = Potential::<f64>::square(0.16, 1.0).unwrap();
        let g = make_generator(&b, -9.0, Request::Symmetric, &GeneratorOptions::default()).unwrap();
        assert_eq!(g.gen_type(), GenType::T4);
        let (l, r) = g.classes();
        match (l, r) {
            (Class::M { c, d }, Class::M { c: c2, d: d2 }) => {
                assert!((d / c + 0.828976).abs() < 1e-5, "{}", d / c);
                assert!((d2 / c2 - d / c).abs() < 1e-8);
            }
            _ => panic!("{l:?} {r:?}"),
        }
        let want = type4_tail(3.0, 1.0, -0.828976, 2.0);
        assert!((g.partner().value(2.0) - want).abs() < 1e-5 * want.abs(), "{} {want}", g.partner().value(2.0));
        assert_eq!(g.inverse().classes().1, Class::D);
    }

    #[test]
    fn free_field_cosh() {
        let g = make_generator(&Potential::<f64>::free(), -4.0, Request::Mix { side: Side::Right, c: 0.5, d: 0.5 }, &GeneratorOptions::default()).unwrap();
        for x in [-3.0f64, -0.4, 0.0, 1.1, 5.0] {
            let want = -8.0 / (2.0 * x).cosh().powi(2);
            assert!((g.partner().value(x) - want).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn inverse_round_trip() {
        let g = make_generator(&well(), -4.284918f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default()).unwrap();
        let inv = g.inverse();
        assert_eq!(inv.gen_type(), GenType::T2);
        for x in [-0.9, -0.2, 0.5, 0.99] {
            assert!((inv.partner().value(x) - well().value(x)).abs() < 1e-8);
            assert!((inv.inverse().w(x) - g.w(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn table1() {
        let g = make_generator(&well(), -4.284918f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default()).unwrap();
        let d = spectral_delta(&g).unwrap();
        assert_eq!([d.d_nm, d.d_qnm, d.d_ttm_l, d.d_ttm_r], [-1, 1, 0, 0]);
        let d = spectral_delta(&g.inverse()).unwrap();
        assert_eq!([d.d_nm, d.d_qnm, d.d_ttm_l, d.d_ttm_r], [1, -1, 0, 0]);
    }

    #[test]
    fn type1_prefactor() {
        let g = make_generator(&well(), -4.284918f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default()).unwrap();
        let om = g.omega();
        let w = Cx::new(0.8, -0.3);
        let (p, _) = g.prefactor_q(w).unwrap();
        assert!((p - (w + om) / (w - om)).norm() < 1e-14);
        // the removed mode is cancelled symbolically, the added one is a zero
        assert!(g.prefactor_q(-om).unwrap().0.norm() < 1e-14);
    }
}
