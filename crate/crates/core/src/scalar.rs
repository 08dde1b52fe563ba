//! Scalar abstraction shared by every numerical kernel.
//!
//! All algorithms are written against [`Real`], a floating-point type with the
//! handful of dense complex linear-algebra routines the calculus needs. `f32`
//! and `f64` implement it; the crate root re-exports `f64` aliases.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Singular value decomposition `A = U diag(s) V^H` with `s` sorted descending.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: CMatrix<T>,
    pub singular_values: Vec<T>,
    /// Columns are right singular vectors.
    pub v: CMatrix<T>,
}

pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Full SVD of a square or rectangular matrix.
    fn svd(a: &CMatrix<Self>) -> Svd<Self>;

    /// Singular values only, sorted descending.
    fn singular_values(a: &CMatrix<Self>) -> Vec<Self>;

    /// Solves `a x = b` by LU with partial pivoting; `None` when `a` is singular.
    fn lu_solve(a: &CMatrix<Self>, b: &[Complex<Self>]) -> Option<Vec<Complex<Self>>>;

    /// Converts an `f64` literal. Every implementor represents all finite f64 values
    /// (possibly rounded), so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn svd(a: &CMatrix<Self>) -> Svd<Self> {
                let decomposition = a.clone().svd(true, true);
                let u = decomposition.u.expect("requested U");
                let v_t = decomposition.v_t.expect("requested V^T");
                let values: Vec<$t> = decomposition.singular_values.iter().copied().collect();
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
                let u = u.select_columns(order.iter());
                let v = v_t.adjoint().select_columns(order.iter());
                Svd {
                    u,
                    singular_values: order.iter().map(|&i| values[i]).collect(),
                    v,
                }
            }

            fn singular_values(a: &CMatrix<Self>) -> Vec<Self> {
                let mut values: Vec<$t> = a.clone().singular_values().iter().copied().collect();
                values.sort_by(|x, y| y.total_cmp(x));
                values
            }

            fn lu_solve(a: &CMatrix<Self>, b: &[Complex<Self>]) -> Option<Vec<Complex<Self>>> {
                let rhs = DVector::from_column_slice(b);
                a.clone().lu().solve(&rhs).map(|x| x.iter().copied().collect())
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Complex literal helper.
#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `e^{2 pi i t}` for a real phase `t` given in turns.
#[inline]
pub fn cis_turns<T: Real>(t: T) -> Complex<T> {
    let angle = T::TAU() * t;
    Complex::new(angle.cos(), angle.sin())
}

/// `e^{2 pi i p/q}` computed from the reduced residue `p mod q`, which keeps
/// twiddle factors accurate for large products `p`.
#[inline]
pub fn root_of_unity<T: Real>(p: i64, q: usize) -> Complex<T> {
    let q_i = q as i64;
    let r = p.rem_euclid(q_i);
    cis_turns(T::from_i64(r).unwrap() / T::from_usize(q).unwrap())
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    let mut out = CMatrix::<T>::zeros(a.ncols(), a.nrows());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out[(j, i)] = a[(i, j)].conj();
        }
    }
    out
}

/// Dense matrix product.
pub fn matmul<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions must agree");
    let (rows, inner, cols) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMatrix::<T>::zeros(rows, cols);
    let a_data = a.as_slice();
    let b_data = b.as_slice();
    // column-major storage: accumulate columns of the product
    for (j, out_col) in out.as_mut_slice().chunks_mut(rows).enumerate() {
        for p in 0..inner {
            let bpj = b_data[j * inner + p];
            if bpj.re == T::zero() && bpj.im == T::zero() {
                continue;
            }
            let a_col = &a_data[p * rows..(p + 1) * rows];
            for (o, &aip) in out_col.iter_mut().zip(a_col) {
                *o += aip * bpj;
            }
        }
    }
    out
}

/// Matrix-vector product.
pub fn matvec<T: Real>(a: &CMatrix<T>, x: &[Complex<T>]) -> Vec<Complex<T>> {
    assert_eq!(a.ncols(), x.len());
    let rows = a.nrows();
    let mut out = vec![Complex::new(T::zero(), T::zero()); rows];
    for (xj, a_col) in x.iter().zip(a.as_slice().chunks(rows.max(1))) {
        if xj.re == T::zero() && xj.im == T::zero() {
            continue;
        }
        for (o, &aij) in out.iter_mut().zip(a_col) {
            *o += aij * *xj;
        }
    }
    out
}

/// Euclidean norm of a complex vector.
pub fn norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &CMatrix<T>) -> T {
    T::singular_values(a).first().copied().unwrap_or_else(T::zero)
}
