use std::sync::Arc;

use crate::potential::Potential;
use crate::scalar::{lit, Real};

/// Closed form of `W` beyond one end of the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outer<T> {
    Const(T),
    /// `V = 0` beyond `x0`, so `Phi = A e^{K u} + B e^{-K u}` with `u = |x - x0|` measured outward.
    Exp { k: T, x0: T, a: T, b: T },
}

#[derive(Debug)]
struct Table<T> {
    omega2: T,
    nodes: Vec<T>,
    w: Vec<T>,
    // one-sided (left limit, right limit) derivatives at each node
    dw: Vec<(T, T)>,
    d2w: Vec<(T, T)>,
    left: Outer<T>,
    right: Outer<T>,
}

/// A tabulated superpotential `W` for the potential `base`, with
/// `base = W^2 - W' + Omega^2`. Interpolated by quintic Hermite pieces that use
/// the Riccati equation for `W'` and `W''`, so the partner is as smooth as `V`.
#[derive(Debug, Clone)]
pub struct Superpotential<T: Real> {
    table: Arc<Table<T>>,
    sign: T,
    base: Potential<T>,
}

fn outer_w<T: Real>(o: &Outer<T>, x: T, right: bool) -> T {
    match *o {
        Outer::Const(c) => c,
        Outer::Exp { k, x0, a, b } => {
            let u = if right { x - x0 } else { x0 - x };
            let ratio_form = if a != T::zero() {
                let r = (b / a) * (lit::<T>(-2.0) * k * u).exp();
                (T::one() - r) / (T::one() + r)
            } else {
                -T::one()
            };
            // right: W = -K (...); left: d/dx = -d/du flips the sign
            if right {
                -k * ratio_form
            } else {
                k * ratio_form
            }
        }
    }
}

impl<T: Real> Superpotential<T> {
    /// `nodes` must be increasing and contain every jump of `base` inside the range.
    pub fn new(base: Potential<T>, omega2: T, nodes: Vec<T>, w: Vec<T>, left: Outer<T>, right: Outer<T>) -> Self {
        let mut dw = Vec::with_capacity(nodes.len());
        let mut d2w = Vec::with_capacity(nodes.len());
        for (&x, &wi) in nodes.iter().zip(&w) {
            let dl = wi * wi + omega2 - base.value_left(x);
            let dr = wi * wi + omega2 - base.value(x);
            let two = lit::<T>(2.0);
            dw.push((dl, dr));
            d2w.push((two * wi * dl - base.derivative_side(x, true), two * wi * dr - base.derivative_side(x, false)));
        }
        Self {
            table: Arc::new(Table { omega2, nodes, w, dw, d2w, left, right }),
            sign: T::one(),
            base,
        }
    }

    /// Same table seen from the partner side: `W -> -W`, base replaced by the partner.
    pub fn reversed(&self, partner: Potential<T>) -> Self {
        Self { table: self.table.clone(), sign: -self.sign, base: partner }
    }

    pub fn base(&self) -> &Potential<T> {
        &self.base
    }

    pub fn omega2(&self) -> T {
        self.table.omega2
    }

    pub fn table_range(&self) -> (T, T) {
        let n = &self.table.nodes;
        (n[0], n[n.len() - 1])
    }

    pub fn nodes(&self) -> &[T] {
        &self.table.nodes
    }

    pub fn outer(&self) -> (Outer<T>, Outer<T>) {
        (self.table.left, self.table.right)
    }

    pub fn sign(&self) -> T {
        self.sign
    }

    fn w_raw(&self, x: T) -> T {
        let t = &self.table;
        let n = t.nodes.len();
        if x < t.nodes[0] {
            return outer_w(&t.left, x, false);
        }
        if x > t.nodes[n - 1] {
            return outer_w(&t.right, x, true);
        }
        let i = match t.nodes.partition_point(|&p| p <= x) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = t.nodes[i + 1] - t.nodes[i];
        let s = (x - t.nodes[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let c = |v: f64| lit::<T>(v);
        let h0 = T::one() - c(10.0) * s3 + c(15.0) * s4 - c(6.0) * s5;
        let h1 = s - c(6.0) * s3 + c(8.0) * s4 - c(3.0) * s5;
        let h2 = c(0.5) * (s2 - c(3.0) * s3 + c(3.0) * s4 - s5);
        let h5 = c(10.0) * s3 - c(15.0) * s4 + c(6.0) * s5;
        let h4 = -c(4.0) * s3 + c(7.0) * s4 - c(3.0) * s5;
        let h3 = c(0.5) * (s3 - c(2.0) * s4 + s5);
        t.w[i] * h0
            + h * t.dw[i].1 * h1
            + h * h * t.d2w[i].1 * h2
            + t.w[i + 1] * h5
            + h * t.dw[i + 1].0 * h4
            + h * h * t.d2w[i + 1].0 * h3
    }

    /// `W(x)` for the current orientation.
    pub fn w(&self, x: T) -> T {
        self.sign * self.w_raw(x)
    }

    /// `W'(x)` from the Riccati relation with the base potential.
    pub fn dw(&self, x: T, left: bool) -> T {
        let w = self.w(x);
        let v = if left { self.base.value_left(x) } else { self.base.value(x) };
        w * w + self.table.omega2 - v
    }

    /// Partner value `2 W^2 + 2 Omega^2 - V`.
    pub fn partner_value(&self, x: T, left: bool) -> T {
        let w = self.w(x);
        let v = if left { self.base.value_left(x) } else { self.base.value(x) };
        lit::<T>(2.0) * (w * w + self.table.omega2) - v
    }

    pub fn partner_derivative(&self, x: T, left: bool) -> T {
        let w = self.w(x);
        lit::<T>(4.0) * w * self.dw(x, left) - self.base.derivative_side(x, left)
    }
}
