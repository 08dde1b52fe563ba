//! Discrete Fourier transform between a lattice window and a torus grid.
//!
//! Transforms are direct sums evaluated axis by axis (tensor-product
//! structure), so a transform costs `O(n * M * (2N+1)^n)`-ish operations rather
//! than the naive `O(M^n (2N+1)^n)`. Reduction order is fixed, which keeps results
//! bit-reproducible.

use num_complex::Complex;

use super::domain::{LatticeWindow, TorusGrid};
use super::sequence::{LatticeSequence, TorusFunction};
use crate::error::Result;
use crate::scalar::{root_of_unity, Real};

/// Dense `out_len x in_len` matrix applied along one axis.
pub(crate) struct AxisKernel<T: Real> {
    out_len: usize,
    in_len: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> AxisKernel<T> {
    pub(crate) fn from_fn(
        out_len: usize,
        in_len: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut entries = Vec::with_capacity(out_len * in_len);
        for p in 0..out_len {
            for q in 0..in_len {
                entries.push(f(p, q));
            }
        }
        Self {
            out_len,
            in_len,
            entries,
        }
    }

    /// `scale * e^{sign 2 pi i (out_lo + p)(in_lo + q) / m}`.
    pub(crate) fn fourier(
        out_len: usize,
        out_lo: i64,
        in_len: usize,
        in_lo: i64,
        m: usize,
        sign: i64,
        scale: T,
    ) -> Self {
        Self::from_fn(out_len, in_len, |p, q| {
            let e = (out_lo + p as i64) * (in_lo + q as i64);
            root_of_unity::<T>(sign * e, m) * scale
        })
    }

    /// Multiplies column `q` by `w(q)`.
    pub(crate) fn scale_columns(mut self, w: impl Fn(usize) -> T) -> Self {
        for p in 0..self.out_len {
            for q in 0..self.in_len {
                let idx = p * self.in_len + q;
                self.entries[idx] = self.entries[idx] * w(q);
            }
        }
        self
    }
}

/// Applies `kernels[a]` along axis `a` of a box-shaped array whose axes all have
/// length `kernels[a].in_len`. Axis 0 is the slowest-varying index.
pub(crate) fn separable<T: Real>(data: &[Complex<T>], kernels: &[AxisKernel<T>]) -> Vec<Complex<T>> {
    let mut dims: Vec<usize> = kernels.iter().map(|k| k.in_len).collect();
    debug_assert_eq!(dims.iter().product::<usize>(), data.len());
    let zero = Complex::new(T::zero(), T::zero());
    let mut current = data.to_vec();
    for (axis, kernel) in kernels.iter().enumerate() {
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let cur = dims[axis];
        let mut next = vec![zero; outer * kernel.out_len * inner];
        for o in 0..outer {
            for p in 0..kernel.out_len {
                let row = &kernel.entries[p * kernel.in_len..(p + 1) * kernel.in_len];
                let dst_start = (o * kernel.out_len + p) * inner;
                for (q, &kq) in row.iter().enumerate() {
                    if kq == zero {
                        continue;
                    }
                    let src_start = (o * cur + q) * inner;
                    let src = &current[src_start..src_start + inner];
                    let dst = &mut next[dst_start..dst_start + inner];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d += kq * s;
                    }
                }
            }
        }
        dims[axis] = kernel.out_len;
        current = next;
    }
    current
}

/// `f^(x) = sum_k e^{-2 pi i k.x} f(k)` at every grid node (sum over the window).
pub fn forward_dft<T: Real>(f: &LatticeSequence<T>, grid: &TorusGrid) -> Result<TorusFunction<T>> {
    let window = f.window();
    window.check_dim(grid.dim())?;
    let m = grid.points_per_axis();
    let lo = -(window.half_width() as i64);
    let kernels: Vec<_> = (0..grid.dim())
        .map(|_| AxisKernel::fourier(m, 0, window.side(), lo, m, -1, T::one()))
        .collect();
    TorusFunction::new(grid.clone(), separable(f.values(), &kernels))
}

/// `f(k) = M^{-n} sum_x e^{2 pi i k.x} F(x)` on the window. Refuses grids too
/// coarse to resolve the window (`M < 2N + 1`).
pub fn inverse_dft<T: Real>(f: &TorusFunction<T>, window: &LatticeWindow) -> Result<LatticeSequence<T>> {
    let grid = f.grid();
    grid.check_resolves(window)?;
    let m = grid.points_per_axis();
    let scale = T::one() / T::from_usize(m).unwrap();
    let lo = -(window.half_width() as i64);
    let kernels: Vec<_> = (0..grid.dim())
        .map(|_| AxisKernel::fourier(window.side(), lo, m, 0, m, 1, scale))
        .collect();
    LatticeSequence::new(window.clone(), separable(f.values(), &kernels))
}

/// `M^{-n} sum_x F(x)`, summed in node order.
pub fn torus_quadrature<T: Real>(f: &TorusFunction<T>) -> Complex<T> {
    quadrature(f.values(), f.grid())
}

pub(crate) fn quadrature<T: Real>(values: &[Complex<T>], grid: &TorusGrid) -> Complex<T> {
    let sum = values
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &v| acc + v);
    sum * grid.weight::<T>()
}

/// Fourier coefficients `c(xi) = M^{-n} sum_x e^{-2 pi i xi.x} F(x)` for `xi` in the
/// box `lo + [0, width)^n`.
pub(crate) fn coefficients_in_box<T: Real>(
    samples: &[Complex<T>],
    grid: &TorusGrid,
    lo: &[i64],
    width: usize,
) -> Vec<Complex<T>> {
    let m = grid.points_per_axis();
    let scale = T::one() / T::from_usize(m).unwrap();
    let kernels: Vec<_> = lo
        .iter()
        .map(|&l| AxisKernel::fourier(width, l, m, 0, m, -1, scale))
        .collect();
    separable(samples, &kernels)
}

/// Evaluates `sum_xi w(xi) c(xi) e^{2 pi i xi.x}` at every node, where `c` lives on
/// the box `lo + [0, width)^n` and `w(xi) = prod_j weight(j, xi_j)`.
pub(crate) fn synthesize_from_box<T: Real>(
    coeffs: &[Complex<T>],
    grid: &TorusGrid,
    lo: &[i64],
    width: usize,
    weight: impl Fn(usize, i64) -> T,
) -> Vec<Complex<T>> {
    let m = grid.points_per_axis();
    let kernels: Vec<_> = lo
        .iter()
        .enumerate()
        .map(|(axis, &l)| {
            AxisKernel::fourier(m, 0, width, l, m, 1, T::one())
                .scale_columns(|q| weight(axis, l + q as i64))
        })
        .collect();
    separable(coeffs, &kernels)
}
