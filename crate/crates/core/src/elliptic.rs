//! Parametrices of elliptic symbols, smoothing diagnostics for their residuals,
//! the two-sided graph-norm estimate, and solution of `T_sigma u = f`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{dyadic_shell, one_plus_norm, LatticeSequence, LatticeWindow, TorusGrid};
use crate::quantize::{assemble_from_rows, assemble_matrix, extract_symbol, OperatorMatrix};
use crate::scalar::{norm2, CMatrix, Real};
use crate::sobolev::sobolev_norm;
use crate::symbol::{check_ellipticity, DecayProfile, EllipticityReport, Symbol};

#[derive(Clone, Debug, Serialize)]
pub struct RegularizedPoint {
    pub k: Vec<i64>,
    pub delta: f64,
}

/// `T_tau` with `T_tau T_sigma = I + S` and `T_sigma T_tau = I + R` on the window.
#[derive(Clone, Debug)]
pub struct Parametrix<T: Real> {
    pub tau: Symbol<T>,
    /// Symbol of `S = T_tau T_sigma - I`.
    pub left_residual: Symbol<T>,
    /// Symbol of `R = T_sigma T_tau - I`.
    pub right_residual: Symbol<T>,
    pub steps: usize,
    pub order: f64,
    /// Regularization threshold `theta`.
    pub threshold: f64,
    pub regularized: Vec<RegularizedPoint>,
    pub ellipticity: EllipticityReport,
    pub operator: OperatorMatrix<T>,
    pub inverse: OperatorMatrix<T>,
    pub left_defect: OperatorMatrix<T>,
    pub right_defect: OperatorMatrix<T>,
}

/// Refuses with [`Error::NotElliptic`] unless `sigma` certifies as elliptic of order `m`.
pub fn require_elliptic<T: Real>(
    sigma: &Symbol<T>,
    m: f64,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<EllipticityReport> {
    let report = check_ellipticity(sigma, m, window, grid)?;
    if !report.elliptic {
        return Err(Error::NotElliptic {
            order: m,
            report: Box::new(report),
        });
    }
    Ok(report)
}

fn identity_like<T: Real>(a: &OperatorMatrix<T>) -> Result<OperatorMatrix<T>> {
    OperatorMatrix::identity(a.window().clone(), a.grid().clone())
}

/// Builds a parametrix with `steps` matrix-level refinements:
/// `B_1 = T_{tau_0}`, `B_{j+1} = B_j + T_{tau_0}(I - T_sigma B_j)`.
///
/// `tau_0 = conj(sigma) / (|sigma|^2 + delta(k))` where `delta(k) = (theta (1+|k|)^m)^2`
/// on rows with some `|sigma(k,x)| < theta (1+|k|)^m` and 0 elsewhere, `theta = C/2`.
pub fn parametrix<T: Real>(
    sigma: &Symbol<T>,
    m: f64,
    steps: usize,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<Parametrix<T>> {
    if steps < 1 {
        return Err(Error::domain("parametrix needs at least one step"));
    }
    let ellipticity = require_elliptic(sigma, m, window, grid)?;
    let theta = ellipticity.constant / 2.0;
    let a = assemble_matrix(sigma, window, grid)?;
    let nodes = grid.nodes::<T>();

    let rows: Vec<(Vec<Complex<T>>, f64)> = (0..window.len())
        .into_par_iter()
        .map(|i| {
            let k = window.point(i);
            let samples = sigma.sample_row_with(&k, grid, &nodes)?;
            let level = theta * one_plus_norm::<f64>(&k).powf(m);
            let low = samples.iter().any(|z| z.norm().to_f64_lossy() < level);
            let delta = if low { level * level } else { 0.0 };
            let d = T::lit(delta);
            let tau0 = samples.iter().map(|z| z.conj() / (z.norm_sqr() + d)).collect();
            Ok((tau0, delta))
        })
        .collect::<Result<_>>()?;
    let regularized = rows
        .iter()
        .enumerate()
        .filter(|(_, (_, d))| *d > 0.0)
        .map(|(i, (_, d))| RegularizedPoint {
            k: window.point(i),
            delta: *d,
        })
        .collect();

    let b0 = if sigma.is_x_independent() {
        let card = window.len();
        let mut entries = CMatrix::zeros(card, card);
        for (i, (row, _)) in rows.iter().enumerate() {
            entries[(i, i)] = row[0];
        }
        OperatorMatrix::new(window.clone(), grid.clone(), entries)?
    } else {
        assemble_from_rows(window, grid, |k| {
            Ok(rows[window.index_of(k).expect("window point")].0.clone())
        })?
    };

    let identity = identity_like(&a)?;
    let mut b = b0.clone();
    for _ in 1..steps {
        let defect = identity.combine(T::one(), &a.compose(&b)?, -T::one())?;
        b = b.combine(T::one(), &b0.compose(&defect)?, T::one())?;
    }
    let right_defect = a.compose(&b)?.minus_identity();
    let left_defect = b.compose(&a)?.minus_identity();
    Ok(Parametrix {
        tau: extract_symbol(&b)?.with_order(-m),
        left_residual: extract_symbol(&left_defect)?,
        right_residual: extract_symbol(&right_defect)?,
        steps,
        order: m,
        threshold: theta,
        regularized,
        ellipticity,
        operator: a,
        inverse: b,
        left_defect,
        right_defect,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualDecayReport {
    /// One profile per power `p = 0..=P` of `(1+|k|)^p |rho(k,x)|`.
    pub profiles: Vec<DecayProfile>,
    pub schwartz_like: bool,
}

/// Per dyadic shell, `sup (1+|k|)^p |rho(k,x)|` over interior rows for `p = 0..=max_power`.
///
/// Weighted values at most `noise_floor * max (1+|k|)^p` count as zero.
pub fn residual_decay_report<T: Real>(
    rho: &Symbol<T>,
    max_power: usize,
    noise_floor: f64,
) -> Result<ResidualDecayReport> {
    let g = rho
        .as_grid()
        .ok_or_else(|| Error::domain("residual decay report needs a grid-backed symbol"))?;
    let window = g.window();
    let mut shells: Vec<u32> = Vec::new();
    let mut sups: Vec<Vec<f64>> = vec![Vec::new(); max_power + 1];
    let mut largest_weight = 1.0f64;
    for (i, k) in window.points().enumerate() {
        if !g.is_interior(&k) {
            continue;
        }
        let value = g.row(i).iter().map(|z| z.norm().to_f64_lossy()).fold(0.0, f64::max);
        let shell = dyadic_shell(&k);
        let slot = match shells.iter().position(|&s| s == shell) {
            Some(p) => p,
            None => {
                shells.push(shell);
                sups.iter_mut().for_each(|s| s.push(0.0));
                shells.len() - 1
            }
        };
        let base = one_plus_norm::<f64>(&k);
        largest_weight = largest_weight.max(base);
        for (p, s) in sups.iter_mut().enumerate() {
            s[slot] = s[slot].max(base.powi(p as i32) * value);
        }
    }
    let mut order: Vec<usize> = (0..shells.len()).collect();
    order.sort_by_key(|&i| shells[i]);
    let sorted_shells: Vec<u32> = order.iter().map(|&i| shells[i]).collect();
    let profiles: Vec<DecayProfile> = sups
        .iter()
        .enumerate()
        .map(|(p, s)| {
            DecayProfile::new(
                format!("p={p}"),
                sorted_shells.clone(),
                order.iter().map(|&i| s[i]).collect(),
                noise_floor * largest_weight.powi(p as i32),
            )
        })
        .collect();
    let schwartz_like = profiles.iter().all(|p| p.decreasing);
    Ok(ResidualDecayReport {
        profiles,
        schwartz_like,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AdnRun {
    pub half_width: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdnReport {
    pub order: f64,
    pub seed: u64,
    pub samples: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// The requested window first, then the doubled window when it could be run.
    pub runs: Vec<AdnRun>,
    /// Relative changes of C1 and C2 between the two runs.
    pub c1_change: Option<f64>,
    pub c2_change: Option<f64>,
}

/// `(||A u||_2 + ||u||_2) / ||u||_{m,2}`.
pub fn adn_ratio<T: Real>(a: &OperatorMatrix<T>, m: f64, u: &LatticeSequence<T>) -> Result<f64> {
    let denom = sobolev_norm(m, u).to_f64_lossy();
    if denom == 0.0 {
        return Err(Error::domain("ratio undefined for u = 0"));
    }
    let au = a.apply(u)?;
    Ok((au.norm_l2().to_f64_lossy() + u.norm_l2().to_f64_lossy()) / denom)
}

fn adn_run<T: Real>(
    sigma: &Symbol<T>,
    m: f64,
    window: &LatticeWindow,
    grid: &TorusGrid,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<AdnRun> {
    require_elliptic(sigma, m, window, grid)?;
    let a = assemble_matrix(sigma, window, grid)?;
    let mut ratios = Vec::with_capacity(samples);
    while ratios.len() < samples {
        let u = LatticeSequence::random(window.clone(), window.default_margin(), rng);
        if u.norm_l2() > T::zero() {
            ratios.push(adn_ratio(&a, m, &u)?);
        }
    }
    let c1 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().copied().fold(0.0, f64::max);
    Ok(AdnRun {
        half_width: window.half_width(),
        c1,
        c2,
        ratios,
    })
}

/// Samples the graph-norm / Sobolev-norm ratio on random interior-supported `u`,
/// then repeats on the doubled window (skipped for grid-backed symbols, which do
/// not extend past their own window).
pub fn adn_verify<T: Real>(
    sigma: &Symbol<T>,
    m: f64,
    window: &LatticeWindow,
    grid: &TorusGrid,
    samples: usize,
    seed: u64,
) -> Result<AdnReport> {
    if !(m > 0.0) {
        return Err(Error::domain(format!("ADN estimate needs m > 0, got {m}")));
    }
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = adn_run(sigma, m, window, grid, samples, &mut rng)?;
    let mut runs = vec![first];
    if sigma.as_grid().is_none() {
        let doubled = window.with_half_width(2 * window.half_width())?;
        let extra = grid.points_per_axis() - window.side();
        let doubled_grid = TorusGrid::new(window.dim(), doubled.side() + extra)?;
        runs.push(adn_run(sigma, m, &doubled, &doubled_grid, samples, &mut rng)?);
    }
    let change = |a: f64, b: f64| (b - a).abs() / a;
    let (c1_change, c2_change) = match runs.as_slice() {
        [a, b] => (Some(change(a.c1, b.c1)), Some(change(a.c2, b.c2))),
        _ => (None, None),
    };
    Ok(AdnReport {
        order: m,
        seed,
        samples,
        c1: runs[0].c1,
        c2: runs[0].c2,
        runs,
        c1_change,
        c2_change,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOptions {
    /// Relative residual target `||T u - f|| <= tol ||f||`.
    pub tol: f64,
    pub max_iterations: usize,
    /// The iteration counts as stalled when the residual fails to drop by
    /// `stall_factor` over `stall_window` iterations.
    pub stall_window: usize,
    pub stall_factor: f64,
    pub parametrix_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 500,
            stall_window: 20,
            stall_factor: 0.9,
            parametrix_steps: 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome<T: Real> {
    pub solution: LatticeSequence<T>,
    pub report: SolveReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// Relative residual on interior rows.
    pub residual_interior: f64,
    /// Relative residual on the boundary layer.
    pub residual_boundary: f64,
    pub iterations: usize,
    pub fallback_used: bool,
    /// Relative residual after each iteration.
    pub history: Vec<f64>,
}

fn split_residual<T: Real>(r: &[Complex<T>], window: &LatticeWindow, scale: f64) -> (f64, f64) {
    let margin = window.default_margin();
    let mut k = vec![0; window.dim()];
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for (i, z) in r.iter().enumerate() {
        window.point_into(i, &mut k);
        let v = z.norm_sqr().to_f64_lossy();
        if window.is_interior(&k, margin) {
            inner += v;
        } else {
            outer += v;
        }
    }
    (inner.sqrt() / scale, outer.sqrt() / scale)
}

fn residual<T: Real>(a: &CMatrix<T>, u: &[Complex<T>], f: &[Complex<T>]) -> Vec<Complex<T>> {
    let au = crate::scalar::matvec(a, u);
    f.iter().zip(au).map(|(fi, ai)| *fi - ai).collect()
}

fn pseudo_inverse_solve<T: Real>(a: &CMatrix<T>, f: &[Complex<T>]) -> Vec<Complex<T>> {
    let svd = T::svd(a);
    let cutoff = svd.singular_values.first().copied().unwrap_or(T::zero()) * T::lit(1e-12);
    let mut out = vec![Complex::new(T::zero(), T::zero()); a.ncols()];
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            break;
        }
        let coeff = (0..a.nrows())
            .map(|i| svd.u[(i, j)].conj() * f[i])
            .fold(Complex::new(T::zero(), T::zero()), |x, y| x + y)
            / s;
        for (i, o) in out.iter_mut().enumerate() {
            *o += svd.v[(i, j)] * coeff;
        }
    }
    out
}

/// Solves `T_sigma u = f` on the finite section by the parametrix-preconditioned
/// iteration `u <- u + T_tau (f - T_sigma u)`, falling back to a dense direct
/// solve when the residual stalls.
pub fn solve<T: Real>(
    sigma: &Symbol<T>,
    m: f64,
    f: &LatticeSequence<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
    options: &SolveOptions,
) -> Result<SolveOutcome<T>> {
    if f.window() != window {
        return Err(Error::domain("right-hand side lives on a different window"));
    }
    let margin = window.default_margin();
    if f
        .values()
        .iter()
        .zip(window.points())
        .any(|(v, k)| v.norm() > T::zero() && !window.is_interior(&k, margin))
    {
        return Err(Error::domain("right-hand side must be supported on interior points"));
    }
    let p = parametrix(sigma, m, options.parametrix_steps, window, grid)?;
    let a = p.operator.entries();
    let b = p.inverse.entries();
    let fv = f.values();
    let f_norm = norm2(fv).to_f64_lossy();
    if f_norm == 0.0 {
        return Ok(SolveOutcome {
            solution: LatticeSequence::zeros(window.clone()),
            report: SolveReport {
                residual_interior: 0.0,
                residual_boundary: 0.0,
                iterations: 0,
                fallback_used: false,
                history: Vec::new(),
            },
        });
    }

    let mut u = vec![Complex::new(T::zero(), T::zero()); fv.len()];
    let mut r = fv.to_vec();
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, u.clone());
    let mut fallback_used = false;
    let mut converged = false;
    for it in 0..options.max_iterations {
        let step = crate::scalar::matvec(b, &r);
        u.iter_mut().zip(step).for_each(|(ui, si)| *ui += si);
        r = residual(a, &u, fv);
        let rel = norm2(&r).to_f64_lossy() / f_norm;
        history.push(rel);
        if rel < best.0 {
            best = (rel, u.clone());
        }
        if rel <= options.tol {
            converged = true;
            break;
        }
        // compare with the residual `stall_window` iterations ago (1.0 before the first)
        let lag = options.stall_window.max(1);
        let stalled = !rel.is_finite()
            || (it + 1 >= lag && {
                let earlier = if it >= lag { history[it - lag] } else { 1.0 };
                rel > options.stall_factor * earlier
            });
        if stalled {
            fallback_used = true;
            u = T::lu_solve(a, fv).unwrap_or_else(|| pseudo_inverse_solve(a, fv));
            r = residual(a, &u, fv);
            let rel = norm2(&r).to_f64_lossy() / f_norm;
            if rel < best.0 {
                best = (rel, u.clone());
            }
            converged = rel <= options.tol;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: history.len(),
            best_residual: best.0,
            best_iterate: best
                .1
                .iter()
                .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
                .collect(),
            history,
        });
    }
    let (residual_interior, residual_boundary) = split_residual(&r, window, f_norm);
    Ok(SolveOutcome {
        solution: LatticeSequence::new(window.clone(), u)?,
        report: SolveReport {
            residual_interior,
            residual_boundary,
            iterations: history.len(),
            fallback_used,
            history,
        },
    })
}
