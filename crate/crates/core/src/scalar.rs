use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};

/// Real scalar the solvers are generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cx<T> = Complex<T>;

#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable")
}

#[inline]
pub fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn im<T: Real>(y: T) -> Cx<T> {
    Complex::new(T::zero(), y)
}

#[inline]
pub fn ii<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn cx_to_f64<T: Real>(z: Cx<T>) -> Complex<f64> {
    Complex::new(to_f64(z.re), to_f64(z.im))
}

pub fn cx_from_f64<T: Real>(z: Complex<f64>) -> Cx<T> {
    Complex::new(lit(z.re), lit(z.im))
}

/// Principal square root with the branch cut rotated onto the negative imaginary axis,
/// so that values just below the negative real axis stay continuous.
pub fn sqrt_upper<T: Real>(z: Cx<T>) -> Cx<T> {
    let s = z.sqrt();
    if s.im < T::zero() {
        -s
    } else {
        s
    }
}
