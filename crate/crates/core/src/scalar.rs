//! Scalar abstraction shared by every numerical module.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real scalar the simulator can run on: `f32` or `f64`.
///
/// Everything physical is generic over this trait; the crate root exports
/// `f64` aliases for the common case.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("integer representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors, as columns, of
    /// a real symmetric matrix. Only the lower triangle is read.
    fn symmetric_eigen(m: &DMatrix<Self>) -> Result<(DVector<Self>, DMatrix<Self>)>;

    /// Ascending eigenvalues of a Hermitian matrix. Only the lower triangle
    /// is read.
    fn hermitian_eigenvalues(m: &DMatrix<Complex<Self>>) -> Result<Vec<Self>>;
}

macro_rules! real_impl {
    ($t:ty) => {
        impl Real for $t {
            fn symmetric_eigen(m: &DMatrix<$t>) -> Result<(DVector<$t>, DMatrix<$t>)> {
                let n = square(m.nrows(), m.ncols())?;
                let evd = faer::Mat::<$t>::from_fn(n, n, |i, j| m[(i, j)])
                    .self_adjoint_eigen(faer::Side::Lower)
                    .map_err(|_| Error::Eigensolver)?;
                let (s, u) = (evd.S(), evd.U());
                Ok((
                    DVector::from_fn(n, |i, _| s[i]),
                    DMatrix::from_fn(n, n, |i, j| u[(i, j)]),
                ))
            }

            fn hermitian_eigenvalues(m: &DMatrix<Complex<$t>>) -> Result<Vec<$t>> {
                let n = square(m.nrows(), m.ncols())?;
                faer::Mat::<Complex<$t>>::from_fn(n, n, |i, j| m[(i, j)])
                    .self_adjoint_eigenvalues(faer::Side::Lower)
                    .map_err(|_| Error::Eigensolver)
            }
        }
    };
}

real_impl!(f32);
real_impl!(f64);

fn square(rows: usize, cols: usize) -> Result<usize> {
    if rows == cols {
        Ok(rows)
    } else {
        Err(Error::DimensionMismatch {
            expected: rows,
            got: cols,
        })
    }
}

/// `e^{i theta}`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub fn norm_sqr<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// Displacement of `x` onto the symmetric window of a ring with the given
/// period, i.e. the representative closest to zero.
pub fn minimal_image<T: Real>(x: T, period: T) -> T {
    let mut r = x % period;
    if r < T::zero() {
        r += period;
    }
    if r > period / T::lit(2.0) {
        r -= period;
    }
    r
}
