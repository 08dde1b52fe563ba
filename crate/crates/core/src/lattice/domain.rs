use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The cube `{k in Z^n : |k_j| <= N}` with points in lexicographic order
/// (first coordinate varies slowest).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeWindow {
    n: usize,
    #[serde(rename = "N")]
    half_width: usize,
}

impl LatticeWindow {
    pub fn new(n: usize, half_width: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("lattice dimension must be positive"));
        }
        if half_width == 0 {
            return Err(Error::domain("window half-width must be positive"));
        }
        let side = 2 * half_width + 1;
        if side.checked_pow(n as u32).is_none() {
            return Err(Error::domain("window too large"));
        }
        Ok(Self { n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Points per axis, `2N + 1`.
    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Cardinality `(2N+1)^n`.
    pub fn len(&self) -> usize {
        self.side().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes the coordinates of point `index` into `out` (length `n`).
    pub fn point_into(&self, mut index: usize, out: &mut [i64]) {
        let side = self.side();
        let offset = self.half_width as i64;
        for slot in out.iter_mut().rev() {
            *slot = (index % side) as i64 - offset;
            index /= side;
        }
    }

    pub fn point(&self, index: usize) -> Vec<i64> {
        let mut k = vec![0; self.n];
        self.point_into(index, &mut k);
        k
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.n && k.iter().all(|&kj| kj.unsigned_abs() as usize <= self.half_width)
    }

    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let side = self.side() as i64;
        let offset = self.half_width as i64;
        Some(k.iter().fold(0i64, |acc, &kj| acc * side + (kj + offset)) as usize)
    }

    /// All points, flattened row by row (`len() * n` entries).
    pub fn coords(&self) -> Vec<i64> {
        let mut out = vec![0; self.len() * self.n];
        for (i, chunk) in out.chunks_mut(self.n).enumerate() {
            self.point_into(i, chunk);
        }
        out
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Default interior margin used for truncation-affected layers: `N/4`.
    pub fn default_margin(&self) -> usize {
        self.half_width / 4
    }

    /// True when `k` is at least `margin` layers away from the window boundary.
    pub fn is_interior(&self, k: &[i64], margin: usize) -> bool {
        let limit = self.half_width.saturating_sub(margin);
        k.len() == self.n && k.iter().all(|&kj| kj.unsigned_abs() as usize <= limit)
    }

    /// Same dimension, different half-width.
    pub fn with_half_width(&self, half_width: usize) -> Result<Self> {
        Self::new(self.n, half_width)
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

/// Uniform grid `x = j/M`, `j in {0..M-1}^n`, on the torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
    #[serde(rename = "M")]
    points_per_axis: usize,
}

impl TorusGrid {
    pub fn new(n: usize, points_per_axis: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("torus dimension must be positive"));
        }
        if points_per_axis == 0 {
            return Err(Error::domain("grid must have at least one point per axis"));
        }
        if points_per_axis.checked_pow(n as u32).is_none() {
            return Err(Error::domain("grid too large"));
        }
        Ok(Self { n, points_per_axis })
    }

    /// Default grid for a window: `M = 2N + 3`.
    pub fn for_window(window: &LatticeWindow) -> Self {
        Self {
            n: window.dim(),
            points_per_axis: 2 * window.half_width() + 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Number of nodes, `M^n`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `M^{-n}` of every node.
    pub fn weight<T: Real>(&self) -> T {
        T::one() / T::from_usize(self.len()).unwrap()
    }

    /// Integer node coordinates `j` (node is `j/M`).
    pub fn node_index_into(&self, mut index: usize, out: &mut [usize]) {
        let m = self.points_per_axis;
        for slot in out.iter_mut().rev() {
            *slot = index % m;
            index /= m;
        }
    }

    pub fn node<T: Real>(&self, index: usize) -> Vec<T> {
        let mut j = vec![0usize; self.n];
        self.node_index_into(index, &mut j);
        let m = T::from_usize(self.points_per_axis).unwrap();
        j.into_iter().map(|ji| T::from_usize(ji).unwrap() / m).collect()
    }

    /// All nodes flattened (`len() * n` entries).
    pub fn nodes<T: Real>(&self) -> Vec<T> {
        (0..self.len()).flat_map(|i| self.node::<T>(i)).collect()
    }

    /// Index of the node equal to `x` (mod 1) when `x` sits on the grid.
    pub fn node_at<T: Real>(&self, x: &[T]) -> Option<usize> {
        if x.len() != self.n {
            return None;
        }
        let m = self.points_per_axis;
        let mf = T::from_usize(m).unwrap();
        let tol = T::lit(1e-9);
        let mut index = 0usize;
        for &xj in x {
            let scaled = (xj - xj.floor()) * mf;
            let nearest = scaled.round();
            if (scaled - nearest).abs() > tol {
                return None;
            }
            let j = nearest.to_usize().unwrap_or(0) % m;
            index = index * m + j;
        }
        Some(index)
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }

    /// Refuses grids that alias a window's frequency content.
    pub fn check_resolves(&self, window: &LatticeWindow) -> Result<()> {
        window.check_dim(self.n)?;
        let required = 2 * window.half_width() + 1;
        if self.points_per_axis < required {
            return Err(Error::Aliasing {
                points: self.points_per_axis,
                half_width: window.half_width(),
                required,
            });
        }
        Ok(())
    }
}

/// Multi-index `alpha in N_0^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// `e_j` scaled by `order`.
    pub fn axis(n: usize, j: usize, order: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = order;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|alpha| = sum alpha_j`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All `beta <= self`, in lexicographic order.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::with_capacity(self.dim())];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=a).map(move |b| {
                        let mut p = prefix.clone();
                        p.push(b);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// `binom(alpha, beta) = prod binom(alpha_j, beta_j)`.
    pub fn binomial(&self, beta: &MultiIndex) -> u64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| binomial(a, b))
            .product()
    }

    pub fn sub(&self, beta: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&beta.0).map(|(a, b)| a - b).collect())
    }

    pub fn as_offset(&self) -> Vec<i64> {
        self.0.iter().map(|&a| a as i64).collect()
    }

    /// Every multi-index in `n` variables with `|alpha| <= max_order`, ordered by
    /// total order then lexicographically.
    pub fn up_to(n: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut all = MultiIndex(vec![max_order; n]).below();
        all.retain(|a| a.order() <= max_order);
        all.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.cmp(b)));
        all
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

/// `|k|^2` as an exact integer.
pub fn norm_sq(k: &[i64]) -> i64 {
    k.iter().map(|&kj| kj * kj).sum()
}

/// Japanese bracket `<k> = (1 + |k|^2)^{1/2}`.
pub fn bracket<T: Real>(k: &[i64]) -> T {
    (T::one() + T::from_i64(norm_sq(k)).unwrap()).sqrt()
}

/// `1 + |k|` with the Euclidean norm.
pub fn one_plus_norm<T: Real>(k: &[i64]) -> T {
    T::one() + T::from_i64(norm_sq(k)).unwrap().sqrt()
}

/// Dyadic shell index `j` with `2^j <= 1 + |k| < 2^{j+1}`, decided in exact integer
/// arithmetic (`1 + |k| >= 2^{j+1}` iff `|k|^2 >= (2^{j+1} - 1)^2`).
pub fn dyadic_shell(k: &[i64]) -> u32 {
    let r2 = norm_sq(k);
    let mut j = 0u32;
    loop {
        let edge = (1i64 << (j + 1)) - 1;
        if r2 >= edge * edge {
            j += 1;
        } else {
            return j;
        }
    }
}
