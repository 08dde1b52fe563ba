//! Bessel potentials, discrete Sobolev norms, embeddings and compactness spectra.
//!
//! Norm convention: `||u||_{s,2} = ||J_s u||_2` with `J_s` the multiplier
//! `(1+|k|^2)^{s/2}`, so larger `s` means stronger decay and `H^{t,2}` embeds in
//! `H^{s,2}` for `s <= t` with constant 1.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{norm_sq, LatticeSequence, LatticeWindow, TorusGrid};
use crate::quantize::assemble_matrix;
use crate::scalar::{spectral_norm, Real};
use crate::symbol::{bessel_weight, fit_line, Symbol};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolevParams {
    pub s: f64,
    pub window: LatticeWindow,
    pub grid: TorusGrid,
}

fn weight<T: Real>(k: &[i64], s: f64) -> T {
    bessel_weight(T::one() + T::from_i64(norm_sq(k)).unwrap(), s)
}

/// `(J_s f)(k) = (1+|k|^2)^{s/2} f(k)`.
pub fn bessel_apply<T: Real>(s: f64, f: &LatticeSequence<T>) -> LatticeSequence<T> {
    f.map(|k, v| v * weight::<T>(k, s))
}

/// `||u||_{s,2}`.
pub fn sobolev_norm<T: Real>(s: f64, u: &LatticeSequence<T>) -> T {
    bessel_apply(s, u).norm_l2()
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub s: f64,
    pub t: f64,
    pub samples: usize,
    /// `max ||u||_{s,2} / ||u||_{t,2}` over the nonzero samples.
    pub max_ratio: f64,
    pub holds: bool,
}

/// Checks `||u||_{s,2} <= ||u||_{t,2}` on every sample.
pub fn embedding_check<T: Real>(s: f64, t: f64, samples: &[LatticeSequence<T>]) -> Result<EmbeddingReport> {
    if !(s <= t) {
        return Err(Error::domain(format!("embedding needs s <= t, got s = {s}, t = {t}")));
    }
    let mut max_ratio = 0.0f64;
    let mut used = 0;
    for u in samples {
        let denom = sobolev_norm(t, u).to_f64_lossy();
        if denom > 0.0 {
            used += 1;
            max_ratio = max_ratio.max(sobolev_norm(s, u).to_f64_lossy() / denom);
        }
    }
    Ok(EmbeddingReport {
        s,
        t,
        samples: used,
        max_ratio,
        // one ulp-scale slack for the division
        holds: max_ratio <= 1.0 + 1e-14,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub operator: String,
    pub n: usize,
    pub windows: Vec<usize>,
    /// Per window, sorted descending.
    pub singular_values: Vec<Vec<f64>>,
    /// Slope of `log sigma_j` against `log j` over the upper three quarters of the
    /// largest window.
    pub fit_exponent: f64,
    pub threshold: f64,
    /// Per window, how many singular values fall below `threshold`.
    pub small_counts: Vec<usize>,
    pub small_fractions: Vec<f64>,
}

impl SpectrumReport {
    /// `(j, sigma_j)` rows of the largest window, for plotting.
    pub fn plot_rows(&self) -> Vec<(f64, f64)> {
        self.singular_values
            .last()
            .map(|sv| sv.iter().enumerate().map(|(j, v)| ((j + 1) as f64, *v)).collect())
            .unwrap_or_default()
    }
}

/// Fits `log sigma_j ~ e log j` for `j` in `[ceil(len/4), len]`.
pub fn tail_exponent(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    let start = len.div_ceil(4).max(1);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (start..=len)
        .filter(|&j| sorted[j - 1] > 0.0)
        .map(|j| ((j as f64).ln(), sorted[j - 1].ln()))
        .unzip();
    if xs.len() < 2 {
        return 0.0;
    }
    fit_line(&xs, &ys).0
}

fn multiplier_spectrum(
    operator: String,
    n: usize,
    windows: &[usize],
    power: f64,
    threshold: f64,
) -> Result<SpectrumReport> {
    if windows.is_empty() {
        return Err(Error::domain("at least one window is required"));
    }
    let mut singular_values = Vec::with_capacity(windows.len());
    let mut small_counts = Vec::with_capacity(windows.len());
    let mut small_fractions = Vec::with_capacity(windows.len());
    for &half in windows {
        let window = LatticeWindow::new(n, half)?;
        // a diagonal positive multiplier: its singular values are its values
        let mut sv: Vec<f64> = window.points().map(|k| weight::<f64>(&k, power)).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        let small = sv.iter().filter(|&&v| v < threshold).count();
        small_counts.push(small);
        small_fractions.push(small as f64 / sv.len() as f64);
        singular_values.push(sv);
    }
    let fit_exponent = tail_exponent(singular_values.last().unwrap());
    Ok(SpectrumReport {
        operator,
        n,
        windows: windows.to_vec(),
        singular_values,
        fit_exponent,
        threshold,
        small_counts,
        small_fractions,
    })
}

/// Singular values of the inclusion `H^{t,2} -> H^{s,2}`, i.e. of the multiplier
/// `(1+|k|^2)^{(s-t)/2}`.
pub fn inclusion_spectrum(s: f64, t: f64, n: usize, windows: &[usize]) -> Result<SpectrumReport> {
    if !(s < t) {
        return Err(Error::domain(format!("inclusion spectrum needs s < t, got s = {s}, t = {t}")));
    }
    multiplier_spectrum(format!("inclusion H^{{{t},2}} -> H^{{{s},2}}"), n, windows, s - t, 0.1)
}

/// Singular values of `J_{-eps}` on `l^2`; `small_counts` uses `threshold`.
pub fn smoothing_spectrum(eps: f64, n: usize, windows: &[usize], threshold: f64) -> Result<SpectrumReport> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("smoothing spectrum needs eps > 0, got {eps}")));
    }
    multiplier_spectrum(format!("J_-{eps} on l^2"), n, windows, -eps, threshold)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessSample {
    pub half_width: usize,
    /// Largest `||T u||_{s-m,2} / ||u||_{s,2}` over the random samples.
    pub sampled_ratio: f64,
    /// Finite-section operator norm `H^{s,2} -> H^{s-m,2}`: `||J_{s-m} A J_{-s}||`.
    pub section_norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessReport {
    pub s: f64,
    pub m: f64,
    pub samples: Vec<BoundednessSample>,
    /// Largest ratio of section norms between consecutive windows.
    pub max_growth: f64,
}

/// `T_sigma: H^{s,2} -> H^{s-m,2}` on growing windows, grid `2N+3` per window.
pub fn boundedness_report<T: Real, R: Rng + ?Sized>(
    sigma: &Symbol<T>,
    m: f64,
    s: f64,
    windows: &[usize],
    draws: usize,
    rng: &mut R,
) -> Result<BoundednessReport> {
    let mut samples = Vec::with_capacity(windows.len());
    for &half in windows {
        let window = LatticeWindow::new(sigma.dim(), half)?;
        let grid = TorusGrid::for_window(&window);
        let a = assemble_matrix(sigma, &window, &grid)?;
        let points: Vec<Vec<i64>> = window.points().collect();
        let weighted = a.entries().map_with_location(|i, j, z| {
            z * (weight::<T>(&points[i], s - m) * weight::<T>(&points[j], -s))
        });
        let section_norm = spectral_norm(&weighted).to_f64_lossy();
        let mut sampled_ratio = 0.0f64;
        for _ in 0..draws {
            let u = LatticeSequence::<T>::random(window.clone(), window.default_margin(), rng);
            let denom = sobolev_norm(s, &u).to_f64_lossy();
            if denom > 0.0 {
                let num = sobolev_norm(s - m, &a.apply(&u)?).to_f64_lossy();
                sampled_ratio = sampled_ratio.max(num / denom);
            }
        }
        samples.push(BoundednessSample {
            half_width: half,
            sampled_ratio,
            section_norm,
        });
    }
    let max_growth = samples
        .windows(2)
        .map(|w| w[1].section_norm / w[0].section_norm)
        .fold(1.0, f64::max);
    Ok(BoundednessReport {
        s,
        m,
        samples,
        max_growth,
    })
}

/// `J_s` as an order-`s` symbol, convenient for composing with other operators.
pub fn bessel_potential<T: Real>(s: f64, n: usize) -> Symbol<T> {
    Symbol::bessel(s, n)
}

/// Pointwise `J_s`-weight at `k`, exposed for report code.
pub fn bessel_multiplier(s: f64, k: &[i64]) -> f64 {
    weight::<f64>(k, s)
}
