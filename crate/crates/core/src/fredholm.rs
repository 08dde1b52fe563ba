//! Fredholm index of order-0 operators from two independent sides: null spaces
//! of finite sections, and the trace of the parametrix defects. Also the
//! Atkinson compactness surrogate and the ellipticity/Fredholm probe.
//!
//! A square finite section always has as many kernel as cokernel vectors, so
//! null vectors are weighed by their mass on interior points: truncation
//! creates null vectors that live on the boundary layer, genuine ones do not.

use serde::Serialize;

use crate::elliptic::{parametrix, residual_decay_report, ResidualDecayReport};
use crate::error::{Error, Result};
use crate::lattice::{LatticeWindow, TorusGrid};
use crate::quantize::{assemble_matrix, OperatorMatrix};
use crate::scalar::{CMatrix, Real};
use crate::symbol::{check_ellipticity, EllipticityReport, Symbol};

#[derive(Clone, Debug, Serialize)]
pub struct IndexOptions {
    /// Singular values below `rank_tol * sigma_max` count as zero.
    pub rank_tol: f64,
    /// Required ratio between the smallest nonzero and largest zero singular value.
    pub min_gap: f64,
    /// Neumann steps of the parametrix used for the trace.
    pub steps: usize,
    /// The trace must certify its off-window tail below this.
    pub tail_tol: f64,
    /// Distance to the nearest integer accepted for an integer trace verdict.
    pub integer_tol: f64,
    pub noise_floor: f64,
    /// Singular-value level for the compactness and near-kernel counts.
    pub threshold: f64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            min_gap: 100.0,
            steps: 3,
            tail_tol: 0.05,
            integer_tol: 0.25,
            noise_floor: 1e-13,
            threshold: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapEvidence {
    pub half_width: usize,
    pub largest: f64,
    /// Largest singular value counted as zero, if any.
    pub largest_zero: Option<f64>,
    pub smallest_nonzero: f64,
    pub gap: f64,
    /// Numerical null-space dimension before interior weighting.
    pub null_dim: usize,
    /// Interior mass of the kernel and cokernel null vectors.
    pub kernel_mass: f64,
    pub cokernel_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceReport {
    pub half_width: usize,
    pub steps: usize,
    pub raw: f64,
    pub raw_imag: f64,
    pub tail_bound: f64,
    pub certified: bool,
    pub index: Option<i64>,
    pub left_decay: ResidualDecayReport,
    pub right_decay: ResidualDecayReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub windows: Vec<usize>,
    pub dim_ker: Vec<usize>,
    pub dim_coker: Vec<usize>,
    pub gap_evidence: Vec<GapEvidence>,
    pub svd_index: Option<i64>,
    pub trace_index_raw: Option<f64>,
    pub trace_index: Option<i64>,
    pub agreement: bool,
    pub elliptic: Option<bool>,
    pub trace: Option<TraceReport>,
    pub probe: Option<ProbeReport>,
}

/// Per-window null-space analysis of a finite section.
pub fn matrix_gap_evidence<T: Real>(a: &OperatorMatrix<T>, options: &IndexOptions) -> (usize, usize, GapEvidence) {
    let window = a.window();
    let svd = T::svd(a.entries());
    let values: Vec<f64> = svd.singular_values.iter().map(|s| s.to_f64_lossy()).collect();
    let largest = values.first().copied().unwrap_or(0.0);
    let cutoff = options.rank_tol * largest;
    let zero: Vec<usize> = (0..values.len()).filter(|&j| values[j] < cutoff).collect();
    let largest_zero = zero.iter().map(|&j| values[j]).reduce(f64::max);
    let smallest_nonzero = values
        .iter()
        .copied()
        .filter(|&v| v >= cutoff)
        .fold(f64::INFINITY, f64::min);
    let gap = match largest_zero {
        Some(z) if z > 0.0 => smallest_nonzero / z,
        Some(_) => f64::INFINITY,
        None if cutoff > 0.0 => smallest_nonzero / cutoff,
        None => f64::INFINITY,
    };
    let margin = window.default_margin();
    let interior: Vec<usize> = window
        .points()
        .enumerate()
        .filter(|(_, k)| window.is_interior(k, margin))
        .map(|(i, _)| i)
        .collect();
    let mass = |m: &CMatrix<T>| -> f64 {
        zero.iter()
            .map(|&j| interior.iter().map(|&i| m[(i, j)].norm_sqr().to_f64_lossy()).sum::<f64>())
            .sum()
    };
    // right singular vectors span the kernel, left ones the kernel of A^H
    let kernel_mass = mass(&svd.v);
    let cokernel_mass = mass(&svd.u);
    let evidence = GapEvidence {
        half_width: window.half_width(),
        largest,
        largest_zero,
        smallest_nonzero,
        gap,
        null_dim: zero.len(),
        kernel_mass,
        cokernel_mass,
    };
    (kernel_mass.round() as usize, cokernel_mass.round() as usize, evidence)
}

fn window_and_grid(n: usize, half: usize) -> Result<(LatticeWindow, TorusGrid)> {
    let w = LatticeWindow::new(n, half)?;
    let g = TorusGrid::for_window(&w);
    Ok((w, g))
}

fn check_order_zero<T: Real>(sigma: &Symbol<T>) -> Result<()> {
    match sigma.declared_order() {
        Some(m) if m != 0.0 => Err(Error::domain(format!(
            "index computations need an order-0 symbol, declared order is {m}"
        ))),
        _ => Ok(()),
    }
}

/// Kernel and cokernel dimensions on each window; the index is reported once the
/// last two windows agree and both show the required spectral gap.
pub fn svd_index<T: Real>(sigma: &Symbol<T>, windows: &[usize], options: &IndexOptions) -> Result<IndexReport> {
    check_order_zero(sigma)?;
    if windows.is_empty() {
        return Err(Error::domain("at least one window is required"));
    }
    let mut report = IndexReport {
        windows: windows.to_vec(),
        dim_ker: Vec::new(),
        dim_coker: Vec::new(),
        gap_evidence: Vec::new(),
        svd_index: None,
        trace_index_raw: None,
        trace_index: None,
        agreement: false,
        elliptic: None,
        trace: None,
        probe: None,
    };
    for &half in windows {
        let (w, g) = window_and_grid(sigma.dim(), half)?;
        let a = assemble_matrix(sigma, &w, &g)?;
        let (ker, coker, evidence) = matrix_gap_evidence(&a, options);
        report.dim_ker.push(ker);
        report.dim_coker.push(coker);
        report.gap_evidence.push(evidence);
    }
    let len = windows.len();
    if len >= 2 {
        let same = report.dim_ker[len - 1] == report.dim_ker[len - 2]
            && report.dim_coker[len - 1] == report.dim_coker[len - 2];
        let gapped = report.gap_evidence[len - 2..].iter().all(|e| e.gap >= options.min_gap);
        if same && gapped {
            report.svd_index = Some(report.dim_ker[len - 1] as i64 - report.dim_coker[len - 1] as i64);
        }
    }
    Ok(report)
}

/// `sum_{j > r} ((2j+1)^n - (2j-1)^n) (1+j)^{-(n+1)}`: lattice points with
/// `|k|_inf = j` weighted by a bound on `(1+|k|)^{-(n+1)}`.
fn shell_tail_sum(n: usize, r: usize) -> f64 {
    const TERMS: usize = 100_000;
    let ni = n as i32;
    let mut total = 0.0;
    for j in (r + 1)..=(r + TERMS) {
        let j = j as f64;
        total += ((2.0 * j + 1.0).powi(ni) - (2.0 * j - 1.0).powi(ni)) / (1.0 + j).powi(ni + 1);
    }
    // remaining terms are at most n 2^n (1+j)^{-2}
    total + (n as f64) * 2f64.powi(ni) / ((r + TERMS + 1) as f64)
}

/// `i = tr(I - T_tau T_sigma) - tr(I - T_sigma T_tau)`, summed over interior rows,
/// with a certified bound on the contribution from outside the interior.
pub fn trace_index<T: Real>(
    sigma: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
    options: &IndexOptions,
) -> Result<TraceReport> {
    check_order_zero(sigma)?;
    let p = parametrix(sigma, 0.0, options.steps, window, grid)?;
    let margin = window.default_margin();
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (i, k) in window.points().enumerate() {
        if window.is_interior(&k, margin) {
            let d = p.right_defect.entries()[(i, i)] - p.left_defect.entries()[(i, i)];
            re += d.re.to_f64_lossy();
            im += d.im.to_f64_lossy();
        }
    }
    let n = window.dim();
    let left_decay = residual_decay_report(&p.left_residual, n + 1, options.noise_floor)?;
    let right_decay = residual_decay_report(&p.right_residual, n + 1, options.noise_floor)?;
    let last = |r: &ResidualDecayReport| r.profiles[n + 1].sups.last().copied().unwrap_or(0.0);
    let decreasing = left_decay.profiles[n + 1].decreasing && right_decay.profiles[n + 1].decreasing;
    let radius = window.half_width() - margin;
    let tail_bound = (last(&left_decay) + last(&right_decay)) * shell_tail_sum(n, radius);
    let certified = decreasing && tail_bound < options.tail_tol;
    let nearest = re.round();
    let index = (certified && (re - nearest).abs() < options.integer_tol).then_some(nearest as i64);
    Ok(TraceReport {
        half_width: window.half_width(),
        steps: options.steps,
        raw: re,
        raw_imag: im,
        tail_bound,
        certified,
        index,
        left_decay,
        right_decay,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AtkinsonReport {
    pub windows: Vec<usize>,
    pub threshold: f64,
    /// Singular values of `K1 = T_tau T_sigma - I` and `K2 = T_sigma T_tau - I`.
    pub k1_singular_values: Vec<Vec<f64>>,
    pub k2_singular_values: Vec<Vec<f64>>,
    /// How many singular values exceed `threshold`, per window.
    pub k1_counts: Vec<usize>,
    pub k2_counts: Vec<usize>,
    /// The counts never grow with the window.
    pub bounded: bool,
}

fn non_increasing(counts: &[usize]) -> bool {
    counts.windows(2).all(|w| w[1] <= w[0])
}

/// Compactness surrogate for the parametrix defects across windows.
pub fn atkinson_check<T: Real>(sigma: &Symbol<T>, windows: &[usize], options: &IndexOptions) -> Result<AtkinsonReport> {
    if windows.is_empty() {
        return Err(Error::domain("at least one window is required"));
    }
    let mut report = AtkinsonReport {
        windows: windows.to_vec(),
        threshold: options.threshold,
        k1_singular_values: Vec::new(),
        k2_singular_values: Vec::new(),
        k1_counts: Vec::new(),
        k2_counts: Vec::new(),
        bounded: false,
    };
    for &half in windows {
        let (w, g) = window_and_grid(sigma.dim(), half)?;
        let p = parametrix(sigma, 0.0, options.steps, &w, &g)?;
        for (defect, values, counts) in [
            (&p.left_defect, &mut report.k1_singular_values, &mut report.k1_counts),
            (&p.right_defect, &mut report.k2_singular_values, &mut report.k2_counts),
        ] {
            let sv: Vec<f64> = T::singular_values(defect.entries()).iter().map(|s| s.to_f64_lossy()).collect();
            counts.push(sv.iter().filter(|&&s| s > options.threshold).count());
            values.push(sv);
        }
    }
    report.bounded = non_increasing(&report.k1_counts) && non_increasing(&report.k2_counts);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub windows: Vec<usize>,
    pub ellipticity: EllipticityReport,
    /// "elliptic" or "non_elliptic".
    pub branch: String,
    /// Singular values of `T_sigma` below the threshold, per window.
    pub near_kernel_counts: Vec<usize>,
    pub near_kernel_growth: bool,
    pub atkinson: Option<AtkinsonReport>,
    pub passed: bool,
}

/// Elliptic symbols must pass the Atkinson surrogate; non-elliptic ones must show
/// a near-kernel that grows strictly with the window. Never fails on a verdict.
pub fn fredholm_ellipticity_probe<T: Real>(
    sigma: &Symbol<T>,
    windows: &[usize],
    options: &IndexOptions,
) -> Result<ProbeReport> {
    check_order_zero(sigma)?;
    let largest = *windows
        .iter()
        .max()
        .ok_or_else(|| Error::domain("at least one window is required"))?;
    let (w, g) = window_and_grid(sigma.dim(), largest)?;
    let ellipticity = check_ellipticity(sigma, 0.0, &w, &g)?;
    let mut near_kernel_counts = Vec::with_capacity(windows.len());
    for &half in windows {
        let (w, g) = window_and_grid(sigma.dim(), half)?;
        let a = assemble_matrix(sigma, &w, &g)?;
        let count = T::singular_values(a.entries())
            .iter()
            .filter(|s| s.to_f64_lossy() < options.threshold)
            .count();
        near_kernel_counts.push(count);
    }
    let near_kernel_growth = near_kernel_counts.windows(2).all(|w| w[1] > w[0]);
    let (branch, atkinson, passed) = if ellipticity.elliptic {
        let a = atkinson_check(sigma, windows, options)?;
        let ok = a.bounded;
        ("elliptic", Some(a), ok)
    } else {
        ("non_elliptic", None, near_kernel_growth)
    };
    Ok(ProbeReport {
        windows: windows.to_vec(),
        ellipticity,
        branch: branch.into(),
        near_kernel_counts,
        near_kernel_growth,
        atkinson,
        passed,
    })
}

/// Both index computations plus the probe. Non-elliptic symbols get null index
/// fields; the trace uses the largest window.
pub fn index_report<T: Real>(sigma: &Symbol<T>, windows: &[usize], options: &IndexOptions) -> Result<IndexReport> {
    let probe = fredholm_ellipticity_probe(sigma, windows, options)?;
    let mut report = svd_index(sigma, windows, options)?;
    report.elliptic = Some(probe.ellipticity.elliptic);
    if probe.ellipticity.elliptic {
        let largest = *windows.iter().max().expect("nonempty");
        let (w, g) = window_and_grid(sigma.dim(), largest)?;
        let trace = trace_index(sigma, &w, &g, options)?;
        report.trace_index_raw = Some(trace.raw);
        report.trace_index = trace.index;
        report.trace = Some(trace);
    } else {
        report.svd_index = None;
    }
    report.agreement = matches!((report.svd_index, report.trace_index), (Some(a), Some(b)) if a == b);
    report.probe = Some(probe);
    Ok(report)
}
