use std::sync::Arc;

use crate::blackhole;
use crate::error::{Error, Result};
use crate::scalar::{lit, Cx, Real};
use crate::superpotential::Superpotential;

/// Pöschl–Teller parameters, `V = strength * sech^2(x / width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtParams<T> {
    pub strength: T,
    pub width: T,
}

impl<T: Real> PtParams<T> {
    pub fn new(strength: T, width: T) -> Result<Self> {
        if !(width > T::zero()) {
            return Err(Error::InvalidParameter("PT width must be positive".into()));
        }
        Ok(Self { strength, width })
    }

    /// Build from `q` (real, `q >= 0`) instead of the strength.
    pub fn from_q(q: T, width: T) -> Result<Self> {
        let strength = (lit::<T>(0.25) - q * q) / (width * width);
        Self::new(strength, width)
    }

    /// `q = sqrt(1/4 - b^2 V)`, real and nonnegative or purely imaginary with positive part.
    pub fn q(&self) -> Cx<T> {
        let d = lit::<T>(0.25) - self.width * self.width * self.strength;
        if d >= T::zero() {
            Cx::new(d.sqrt(), T::zero())
        } else {
            Cx::new(T::zero(), (-d).sqrt())
        }
    }

    pub fn reduced_strength(&self) -> T {
        self.width * self.width * self.strength
    }
}

/// Schwarzschild perturbation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BhParams<T> {
    pub mass: T,
    pub l: u32,
}

impl<T: Real> BhParams<T> {
    pub fn new(mass: T, l: u32) -> Result<Self> {
        if !(mass > T::zero()) {
            return Err(Error::InvalidParameter("mass must be positive".into()));
        }
        if l < 2 {
            return Err(Error::InvalidParameter("black-hole families need l >= 2".into()));
        }
        Ok(Self { mass, l })
    }

    /// `n = (l - 1)(l + 2) / 2`.
    pub fn n(&self) -> T {
        let l = self.l as f64;
        lit((l - 1.0) * (l + 2.0) / 2.0)
    }
}

/// How the potential behaves beyond one end of its core region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay<T> {
    /// `V = 0` exactly beyond `edge`.
    Compact(T),
    /// `|V| ~ exp(-rate |x|)`; `edge` is where `|V|` drops below 1e-12 of its peak.
    Exponential { rate: T, edge: T },
    /// `|V| ~ 1/x^2`.
    Algebraic { edge: T },
}

impl<T: Real> Decay<T> {
    pub fn edge(&self) -> T {
        match *self {
            Decay::Compact(e) => e,
            Decay::Exponential { edge, .. } => edge,
            Decay::Algebraic { edge } => edge,
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Decay::Compact(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support<T> {
    pub left: Decay<T>,
    pub right: Decay<T>,
}

impl<T: Real> Support<T> {
    pub fn finite(a: T) -> Self {
        Self { left: Decay::Compact(-a), right: Decay::Compact(a) }
    }

    pub fn is_finite(&self) -> bool {
        self.left.is_compact() && self.right.is_compact()
    }
}

/// Sampled potential with cubic Hermite interpolation on a (possibly nonuniform) grid.
/// Zero outside the sampled interval.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable<T> {
    xs: Vec<T>,
    vs: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> NumericTable<T> {
    pub fn new(xs: Vec<T>, vs: Vec<T>) -> Result<Self> {
        if xs.len() != vs.len() || xs.len() < 3 {
            return Err(Error::InvalidParameter("numeric potential needs >= 3 matching samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("numeric grid must be strictly increasing".into()));
        }
        let n = xs.len();
        let mut slopes = vec![T::zero(); n];
        for i in 0..n {
            let (a, b, c) = if i == 0 {
                (0, 1, 2)
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1)
            } else {
                (i - 1, i, i + 1)
            };
            // derivative of the quadratic through three points, evaluated at xs[i]
            let (x0, x1, x2) = (xs[a], xs[b], xs[c]);
            let x = xs[i];
            let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
            let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
            let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
            slopes[i] = l0 * vs[a] + l1 * vs[b] + l2 * vs[c];
        }
        Ok(Self { xs, vs, slopes })
    }

    /// Uniform grid starting at `x0` with spacing `h`.
    pub fn uniform(x0: T, h: T, vs: Vec<T>) -> Result<Self> {
        let xs = (0..vs.len()).map(|i| x0 + h * lit(i as f64)).collect();
        Self::new(xs, vs)
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn vs(&self) -> &[T] {
        &self.vs
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return T::zero();
        }
        let i = match self.xs.partition_point(|&p| p <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        h00 * self.vs[i] + h10 * h * self.slopes[i] + h01 * self.vs[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind<T: Real> {
    Free,
    /// Constant on `[edges[i], edges[i+1])`, zero outside `[edges[0], edges[last])`.
    PiecewiseConstant { edges: Vec<T>, values: Vec<T> },
    PoschlTeller(PtParams<T>),
    TruncatedPoschlTeller { pt: PtParams<T>, a: T },
    ReggeWheeler(BhParams<T>),
    Zerilli(BhParams<T>),
    Numeric(Arc<NumericTable<T>>),
    /// `2 W^2 + 2 Omega^2 - V_base` for a tabulated superpotential.
    Superpartner(Arc<Superpotential<T>>),
}

#[derive(Debug, Clone)]
pub struct Potential<T: Real> {
    kind: PotentialKind<T>,
    support: Support<T>,
    singularities: Vec<T>,
    symmetric: bool,
    peak: T,
}

fn pt_edge<T: Real>(b: T) -> T {
    // 4 sech^2 tail below 1e-12 of the peak
    b * lit::<T>(0.5) * lit::<T>(4.0e12).ln()
}

impl<T: Real> Potential<T> {
    pub fn free() -> Self {
        Self {
            kind: PotentialKind::Free,
            support: Support::finite(T::zero()),
            singularities: vec![],
            symmetric: true,
            peak: T::zero(),
        }
    }

    pub fn piecewise(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        if edges.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidParameter("piecewise potential needs n values and n+1 edges".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("segment edges must be strictly increasing".into()));
        }
        let n = values.len();
        let mut sing = Vec::new();
        for (i, &e) in edges.iter().enumerate() {
            let left = if i == 0 { T::zero() } else { values[i - 1] };
            let right = if i == n { T::zero() } else { values[i] };
            if left != right {
                sing.push(e);
            }
        }
        let symmetric = (0..n).all(|i| {
            let j = n - 1 - i;
            values[i] == values[j] && (edges[i] + edges[n - i]).abs() <= lit::<T>(1e-14) * edges[n].abs()
        });
        let peak = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Ok(Self {
            kind: PotentialKind::PiecewiseConstant { edges: edges.clone(), values },
            support: Support { left: Decay::Compact(edges[0]), right: Decay::Compact(edges[n]) },
            singularities: sing,
            symmetric,
            peak,
        })
    }

    /// `V0` on `|x| < a`.
    pub fn square(v0: T, a: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(Error::InvalidParameter("a must be positive".into()));
        }
        Self::piecewise(vec![-a, a], vec![v0])
    }

    /// `V1` on `|x| < b`, `V0` on `b < |x| < a`.
    pub fn multi_step(v1: T, v0: T, b: T, a: T) -> Result<Self> {
        if !(b > T::zero() && a > b) {
            return Err(Error::InvalidParameter("multi-step needs 0 < b < a".into()));
        }
        Self::piecewise(vec![-a, -b, b, a], vec![v0, v1, v0])
    }

    pub fn poschl_teller(pt: PtParams<T>) -> Self {
        let e = pt_edge(pt.width);
        let rate = lit::<T>(2.0) / pt.width;
        Self {
            kind: PotentialKind::PoschlTeller(pt),
            support: Support {
                left: Decay::Exponential { rate, edge: -e },
                right: Decay::Exponential { rate, edge: e },
            },
            singularities: vec![],
            symmetric: true,
            peak: pt.strength.abs(),
        }
    }

    pub fn truncated_poschl_teller(pt: PtParams<T>, a: T) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(Error::InvalidParameter("truncation radius must be positive".into()));
        }
        Ok(Self {
            kind: PotentialKind::TruncatedPoschlTeller { pt, a },
            support: Support::finite(a),
            singularities: if pt.strength != T::zero() { vec![-a, a] } else { vec![] },
            symmetric: true,
            peak: pt.strength.abs(),
        })
    }

    fn black_hole(kind: PotentialKind<T>, bh: BhParams<T>) -> Self {
        let m = bh.mass;
        let mut p = Self {
            kind,
            support: Support {
                left: Decay::Exponential { rate: T::one() / (lit::<T>(2.0) * m), edge: lit::<T>(-60.0) * m },
                right: Decay::Algebraic { edge: lit::<T>(60.0) * m },
            },
            singularities: vec![],
            symmetric: false,
            peak: T::zero(),
        };
        let mut peak = T::zero();
        for i in 0..=400 {
            let x = m * (lit::<T>(-10.0) + lit::<T>(i as f64 * 0.05));
            peak = peak.max(p.value(x).abs());
        }
        p.peak = peak;
        p
    }

    pub fn regge_wheeler(bh: BhParams<T>) -> Self {
        Self::black_hole(PotentialKind::ReggeWheeler(bh), bh)
    }

    pub fn zerilli(bh: BhParams<T>) -> Self {
        Self::black_hole(PotentialKind::Zerilli(bh), bh)
    }

    pub fn numeric(table: NumericTable<T>) -> Self {
        let xs = table.xs();
        let (x0, x1) = (xs[0], xs[xs.len() - 1]);
        let vs = table.vs();
        let mut sing = vec![];
        if vs[0] != T::zero() {
            sing.push(x0);
        }
        if vs[vs.len() - 1] != T::zero() {
            sing.push(x1);
        }
        let peak = vs.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Self {
            kind: PotentialKind::Numeric(Arc::new(table)),
            support: Support { left: Decay::Compact(x0), right: Decay::Compact(x1) },
            singularities: sing,
            symmetric: false,
            peak,
        }
    }

    pub(crate) fn superpartner(sp: Arc<Superpotential<T>>, support: Support<T>, symmetric: bool) -> Self {
        let base = sp.base();
        let singularities = base.singularities.clone();
        let mut p = Self {
            kind: PotentialKind::Superpartner(sp.clone()),
            support,
            singularities,
            symmetric,
            peak: T::zero(),
        };
        let (lo, hi) = sp.table_range();
        let mut peak = T::zero();
        for i in 0..=200 {
            let x = lo + (hi - lo) * lit(i as f64 / 200.0);
            peak = peak.max(p.value(x).abs());
        }
        p.peak = peak;
        p
    }

    pub fn kind(&self) -> &PotentialKind<T> {
        &self.kind
    }

    pub fn support(&self) -> Support<T> {
        self.support
    }

    /// Jump locations, sorted.
    pub fn singularities(&self) -> &[T] {
        &self.singularities
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Largest `|V|` (exact for closed forms, sampled otherwise).
    pub fn peak(&self) -> T {
        self.peak
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self.kind, PotentialKind::PiecewiseConstant { .. } | PotentialKind::Free)
    }

    /// `V(x)`; at a jump the right segment wins.
    pub fn value(&self, x: T) -> T {
        match &self.kind {
            PotentialKind::Free => T::zero(),
            PotentialKind::PiecewiseConstant { edges, values } => {
                let n = values.len();
                if x < edges[0] || x >= edges[n] {
                    return T::zero();
                }
                let k = edges.partition_point(|&e| e <= x);
                values[k - 1]
            }
            PotentialKind::PoschlTeller(pt) => pt_value(pt, x),
            PotentialKind::TruncatedPoschlTeller { pt, a } => {
                if x >= -*a && x < *a {
                    pt_value(pt, x)
                } else {
                    T::zero()
                }
            }
            PotentialKind::ReggeWheeler(bh) => {
                let r = blackhole::tortoise_inverse(bh.mass, x);
                blackhole::rw_of_r(bh, r)
            }
            PotentialKind::Zerilli(bh) => {
                let r = blackhole::tortoise_inverse(bh.mass, x);
                blackhole::zerilli_of_r(bh, r)
            }
            PotentialKind::Numeric(t) => {
                if x >= t.xs()[t.xs().len() - 1] && !self.singularities.is_empty() {
                    return T::zero();
                }
                t.eval(x)
            }
            PotentialKind::Superpartner(sp) => sp.partner_value(x, false),
        }
    }

    /// One-sided limit of `V` at `x` approached from the left.
    pub fn value_left(&self, x: T) -> T {
        if !self.is_jump(x) {
            return self.value(x);
        }
        match &self.kind {
            PotentialKind::PiecewiseConstant { edges, values } => {
                let k = edges.partition_point(|&e| e < x);
                if k == 0 {
                    T::zero()
                } else {
                    values[k - 1]
                }
            }
            PotentialKind::TruncatedPoschlTeller { pt, a } => {
                if x > -*a {
                    pt_value(pt, x)
                } else {
                    T::zero()
                }
            }
            PotentialKind::Numeric(t) => {
                if x <= t.xs()[0] {
                    T::zero()
                } else {
                    t.eval(x)
                }
            }
            PotentialKind::Superpartner(sp) => sp.partner_value(x, true),
            _ => self.value(x),
        }
    }

    pub fn is_jump(&self, x: T) -> bool {
        self.singularities.iter().any(|&s| s == x)
    }

    /// `V'(x)`, analytic where a closed form exists.
    pub fn derivative(&self, x: T) -> Result<T> {
        if self.is_jump(x) {
            return Err(Error::SingularPoint(crate::scalar::to_f64(x)));
        }
        Ok(self.derivative_side(x, false))
    }

    /// One-sided derivative (from the left when `left`), defined at jumps too.
    pub fn derivative_side(&self, x: T, left: bool) -> T {
        match &self.kind {
            PotentialKind::Free | PotentialKind::PiecewiseConstant { .. } => T::zero(),
            PotentialKind::PoschlTeller(pt) => pt_derivative(pt, x),
            PotentialKind::TruncatedPoschlTeller { pt, a } => {
                let inside = if left { x > -*a && x <= *a } else { x >= -*a && x < *a };
                if inside {
                    pt_derivative(pt, x)
                } else {
                    T::zero()
                }
            }
            PotentialKind::ReggeWheeler(bh) => {
                let r = blackhole::tortoise_inverse(bh.mass, x);
                blackhole::rw_dr(bh, r) * (T::one() - lit::<T>(2.0) * bh.mass / r)
            }
            PotentialKind::Zerilli(bh) => {
                let r = blackhole::tortoise_inverse(bh.mass, x);
                blackhole::zerilli_dr(bh, r) * (T::one() - lit::<T>(2.0) * bh.mass / r)
            }
            PotentialKind::Numeric(t) => {
                let h = lit::<T>(1e-6) * T::one().max(x.abs());
                (t.eval(x + h) - t.eval(x - h)) / (h + h)
            }
            PotentialKind::Superpartner(sp) => sp.partner_derivative(x, left),
        }
    }

    /// Half-open segments `[x_i, x_{i+1})` on which the potential is smooth, covering `[lo, hi]`.
    pub fn smooth_pieces(&self, lo: T, hi: T) -> Vec<(T, T)> {
        let mut cuts: Vec<T> = self.singularities.iter().copied().filter(|&s| s > lo && s < hi).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out = Vec::with_capacity(cuts.len() + 1);
        let mut a = lo;
        for c in cuts {
            out.push((a, c));
            a = c;
        }
        out.push((a, hi));
        out
    }
}

fn pt_value<T: Real>(pt: &PtParams<T>, x: T) -> T {
    let s = T::one() / (x / pt.width).cosh();
    pt.strength * s * s
}

fn pt_derivative<T: Real>(pt: &PtParams<T>, x: T) -> T {
    let u = x / pt.width;
    let s = T::one() / u.cosh();
    lit::<T>(-2.0) * pt.strength * s * s * u.tanh() / pt.width
}

