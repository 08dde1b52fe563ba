//! Symbol-class diagnostics on a sampled window: order estimation by dyadic-shell
//! regression, ellipticity certification and the S_0 decay diagnostic.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use serde::Serialize;

use super::Symbol;
use crate::error::{Error, Result};
use crate::lattice::{bracket, dyadic_shell, norm_sq, one_plus_norm, LatticeWindow, MultiIndex, TorusGrid};
use crate::scalar::Real;

#[derive(Clone, Debug, Serialize)]
pub struct OrderOptions {
    pub alpha_max: usize,
    pub beta_max: usize,
    /// Number of outermost dyadic shells used in each regression.
    pub shells: usize,
    /// Absolute level below which a shell supremum counts as zero.
    pub noise_floor: f64,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            alpha_max: 2,
            beta_max: 1,
            shells: 3,
            noise_floor: 1e-13,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellSample {
    pub shell: u32,
    /// `<k>` at the point attaining the shell supremum.
    pub abscissa: f64,
    pub sup: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Fitted,
    /// The outermost shell is below the noise floor: decay beyond resolution.
    Vanished,
    /// Too few shells with usable points for this `alpha`.
    Insufficient,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeEntry {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub shells: Vec<ShellSample>,
    pub status: EntryStatus,
    /// Log-log slope; `-inf` (serialized as null) when vanished.
    pub slope: f64,
    /// `slope + |alpha|`.
    pub contribution: f64,
    /// Root-mean-square regression residual in log space.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderEstimate {
    /// Estimated order; `-inf` (serialized as null) when every entry vanished.
    pub m_hat: f64,
    pub entries: Vec<SlopeEntry>,
    pub options: OrderOptions,
}

impl OrderEstimate {
    pub fn degenerate(&self) -> bool {
        self.entries.iter().all(|e| e.status != EntryStatus::Fitted)
    }
}

/// Where a symbol can be sampled without truncation effects.
struct Domain<'a, T: Real> {
    sigma: &'a Symbol<T>,
    window: LatticeWindow,
    grid: TorusGrid,
    margin: Option<usize>,
}

impl<'a, T: Real> Domain<'a, T> {
    fn new(sigma: &'a Symbol<T>, window: &LatticeWindow, grid: &TorusGrid) -> Result<Self> {
        window.check_dim(sigma.dim())?;
        grid.check_resolves(window)?;
        if let Some(g) = sigma.as_grid() {
            return Ok(Self {
                sigma,
                window: g.window().clone(),
                grid: g.grid().clone(),
                margin: Some(g.interior_margin()),
            });
        }
        // multipliers need a single node per axis
        let grid = if sigma.is_x_independent() {
            TorusGrid::new(sigma.dim(), 1)?
        } else {
            grid.clone()
        };
        Ok(Self {
            sigma,
            window: window.clone(),
            grid,
            margin: None,
        })
    }

    fn usable(&self, k: &[i64]) -> bool {
        match self.margin {
            Some(margin) => self.window.is_interior(k, margin),
            None => true,
        }
    }
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (my + slope * (x - mx));
            r * r
        })
        .sum::<f64>()
        / len)
        .sqrt();
    (slope, rms)
}

fn difference_terms(alpha: &MultiIndex) -> Vec<(Vec<i64>, f64)> {
    alpha
        .below()
        .into_iter()
        .map(|gamma| {
            let sign = if (alpha.order() - gamma.order()) % 2 == 0 { 1.0 } else { -1.0 };
            (gamma.as_offset(), sign * alpha.binomial(&gamma) as f64)
        })
        .collect()
}

fn shifted(k: &[i64], offset: &[i64]) -> Vec<i64> {
    k.iter().zip(offset).map(|(a, b)| a + b).collect()
}

/// `Delta_k^alpha D_x^{(beta)} sigma(k, .)` at the grid nodes, with `D^{(beta)} sigma`
/// rows memoized in `cache`.
fn differenced_row<T: Real>(
    domain: &Domain<'_, T>,
    k: &[i64],
    terms: &[(Vec<i64>, f64)],
    beta: &MultiIndex,
    nodes: &[T],
    cache: &mut HashMap<Vec<i64>, Vec<Complex<T>>>,
) -> Result<Vec<Complex<T>>> {
    let mut out = vec![Complex::new(T::zero(), T::zero()); domain.grid.len()];
    for (offset, coef) in terms {
        let point = shifted(k, offset);
        if !cache.contains_key(&point) {
            let row = domain
                .sigma
                .x_derivative_row(&point, beta.entries(), &domain.grid, nodes)?;
            cache.insert(point.clone(), row);
        }
        let row = &cache[&point];
        let c = T::lit(*coef);
        for (o, v) in out.iter_mut().zip(row) {
            *o += *v * c;
        }
    }
    Ok(out)
}

/// Estimates the order `m` with `|D_x^{(beta)} Delta_k^alpha sigma| <= C (1+|k|)^{m-|alpha|}`
/// by regressing log shell suprema on `log <k>` over the outermost dyadic shells.
pub fn estimate_order<T: Real>(
    sigma: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
    options: &OrderOptions,
) -> Result<OrderEstimate> {
    let domain = Domain::new(sigma, window, grid)?;
    let n = sigma.dim();
    let points: Vec<Vec<i64>> = domain
        .window
        .points()
        .filter(|k| domain.usable(k) && dyadic_shell(k) >= 1)
        .collect();
    let mut available: Vec<u32> = points.iter().map(|k| dyadic_shell(k)).collect();
    available.sort_unstable();
    available.dedup();
    if available.len() < options.shells.max(2) {
        return Err(Error::domain(format!(
            "order estimation needs {} dyadic shells with j >= 1, the window provides {}",
            options.shells.max(2),
            available.len()
        )));
    }
    let nodes = domain.grid.nodes::<T>();
    let alphas = MultiIndex::up_to(n, options.alpha_max);
    let betas = MultiIndex::up_to(n, options.beta_max);
    let mut entries = Vec::new();
    for beta in &betas {
        let mut cache = HashMap::new();
        for alpha in &alphas {
            let terms = difference_terms(alpha);
            let offset = alpha.as_offset();
            let candidates: Vec<&Vec<i64>> = points
                .iter()
                .filter(|k| domain.usable(&shifted(k, &offset)))
                .collect();
            let mut shells: Vec<u32> = candidates.iter().map(|k| dyadic_shell(k)).collect();
            shells.sort_unstable();
            shells.dedup();
            let keep: Vec<u32> = shells.iter().rev().take(options.shells).rev().copied().collect();
            let mut sups: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
            for k in candidates {
                let j = dyadic_shell(k);
                if !keep.contains(&j) {
                    continue;
                }
                let row = differenced_row(&domain, k, &terms, beta, &nodes, &mut cache)?;
                let sup = row
                    .iter()
                    .map(|z| z.norm())
                    .fold(T::zero(), T::max)
                    .to_f64_lossy();
                let slot = sups.entry(j).or_insert((-1.0, 0.0));
                if sup > slot.0 {
                    *slot = (sup, bracket::<f64>(k));
                }
            }
            let samples: Vec<ShellSample> = sups
                .iter()
                .map(|(&shell, &(sup, abscissa))| ShellSample {
                    shell,
                    abscissa,
                    sup,
                })
                .collect();
            let entry = if samples.len() < options.shells.max(2) {
                SlopeEntry {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    shells: samples,
                    status: EntryStatus::Insufficient,
                    slope: f64::NAN,
                    contribution: f64::NAN,
                    residual: f64::NAN,
                }
            } else if samples.last().unwrap().sup <= options.noise_floor {
                SlopeEntry {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    shells: samples,
                    status: EntryStatus::Vanished,
                    slope: f64::NEG_INFINITY,
                    contribution: f64::NEG_INFINITY,
                    residual: 0.0,
                }
            } else {
                let xs: Vec<f64> = samples.iter().map(|s| s.abscissa.ln()).collect();
                let ys: Vec<f64> = samples
                    .iter()
                    .map(|s| s.sup.max(options.noise_floor).ln())
                    .collect();
                let (slope, residual) = fit_line(&xs, &ys);
                SlopeEntry {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                    shells: samples,
                    status: EntryStatus::Fitted,
                    slope,
                    contribution: slope + alpha.order() as f64,
                    residual,
                }
            };
            entries.push(entry);
        }
    }
    let m_hat = entries
        .iter()
        .filter(|e| e.status != EntryStatus::Insufficient)
        .map(|e| e.contribution)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(OrderEstimate {
        m_hat,
        entries,
        options: options.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ShellMinimum {
    pub shell: u32,
    pub min_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityReport {
    pub elliptic: bool,
    pub order: f64,
    /// Lower-bound constant certified beyond `M_radius`.
    #[serde(rename = "C")]
    pub constant: f64,
    #[serde(rename = "M_radius")]
    pub m_radius: f64,
    /// Per dyadic shell, `min |sigma(k,x)| / (1+|k|)^m` over the sampled points.
    pub min_ratio_profile: Vec<ShellMinimum>,
    pub max_ratio: f64,
    pub reason: String,
}

/// Shell-minimum ratio at which the last shell counts as having decayed.
const DECAY_FACTOR: f64 = 0.1;
/// Last-shell minimum, relative to the largest sampled ratio, treated as a zero.
const ZERO_LEVEL: f64 = 1e-2;
/// Points whose ratio falls below this fraction of the last-shell minimum are
/// excluded from the certified region.
const DIP_LEVEL: f64 = 1e-2;

/// Scans `|sigma(k,x)| / (1+|k|)^m` over the sampled window and decides ellipticity.
///
/// Non-elliptic when the last shell's minimum is at most a tenth of the first
/// shell's, or at most `1e-2` of the largest ratio (a sampled zero). Otherwise
/// `M_radius` is the largest `|k|` whose ratio dips below `1e-2` times the last
/// shell's minimum (0 if none) and `C` the smallest ratio with `|k| > M_radius`.
pub fn check_ellipticity<T: Real>(
    sigma: &Symbol<T>,
    m: f64,
    window: &LatticeWindow,
    grid: &TorusGrid,
) -> Result<EllipticityReport> {
    let domain = Domain::new(sigma, window, grid)?;
    let nodes = domain.grid.nodes::<T>();
    let mut per_point: Vec<(f64, f64)> = Vec::new();
    let mut shells: BTreeMap<u32, f64> = BTreeMap::new();
    let mut max_ratio = 0.0f64;
    for k in domain.window.points().filter(|k| domain.usable(k)) {
        let row = sigma.sample_row_with(&k, &domain.grid, &nodes)?;
        let weight = one_plus_norm::<f64>(&k).powf(m);
        let (lo, hi) = row.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| {
            let r = z.norm().to_f64_lossy() / weight;
            (lo.min(r), hi.max(r))
        });
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite(format!("symbol value at {k:?}")));
        }
        max_ratio = max_ratio.max(hi);
        let slot = shells.entry(dyadic_shell(&k)).or_insert(f64::INFINITY);
        *slot = slot.min(lo);
        per_point.push(((norm_sq(&k) as f64).sqrt(), lo));
    }
    let profile: Vec<ShellMinimum> = shells
        .iter()
        .map(|(&shell, &min_ratio)| ShellMinimum { shell, min_ratio })
        .collect();
    let first = profile.first().map(|s| s.min_ratio).unwrap_or(0.0);
    let last = profile.last().map(|s| s.min_ratio).unwrap_or(0.0);
    let refuse = |reason: String| EllipticityReport {
        elliptic: false,
        order: m,
        constant: 0.0,
        m_radius: f64::INFINITY,
        min_ratio_profile: profile.clone(),
        max_ratio,
        reason,
    };
    if profile.len() < 2 {
        return Ok(refuse("window too small to compare shells".into()));
    }
    if last <= ZERO_LEVEL * max_ratio {
        return Ok(refuse(format!(
            "last-shell minimum {last:e} is a sampled zero (largest ratio {max_ratio:e})"
        )));
    }
    if last <= DECAY_FACTOR * first {
        return Ok(refuse(format!(
            "shell minima decay from {first:e} to {last:e}"
        )));
    }
    let dip = DIP_LEVEL * last;
    let m_radius = per_point
        .iter()
        .filter(|(_, r)| *r < dip)
        .map(|(norm, _)| *norm)
        .fold(0.0f64, f64::max);
    let constant = per_point
        .iter()
        .filter(|(norm, _)| *norm > m_radius)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    Ok(EllipticityReport {
        elliptic: true,
        order: m,
        constant,
        m_radius,
        min_ratio_profile: profile,
        max_ratio,
        reason: "shell minima bounded away from zero".into(),
    })
}

/// Per-shell suprema of a weighted quantity and a decay verdict.
#[derive(Clone, Debug, Serialize)]
pub struct DecayProfile {
    pub label: String,
    pub shells: Vec<u32>,
    pub sups: Vec<f64>,
    pub decreasing: bool,
}

impl DecayProfile {
    pub(crate) fn new(label: String, shells: Vec<u32>, sups: Vec<f64>, floor: f64) -> Self {
        let decreasing = shellwise_decreasing(&sups, floor);
        Self {
            label,
            shells,
            sups,
            decreasing,
        }
    }
}

/// Non-increasing from the peak shell onwards, ending at most a tenth of the peak
/// (values at or below `floor` count as zero).
pub(crate) fn shellwise_decreasing(sups: &[f64], floor: f64) -> bool {
    let cleaned: Vec<f64> = sups.iter().map(|&s| if s <= floor { 0.0 } else { s }).collect();
    let Some((peak_idx, &peak)) = cleaned
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    else {
        return true;
    };
    if peak == 0.0 {
        return true;
    }
    let tail = &cleaned[peak_idx..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let last = *cleaned.last().unwrap();
    monotone && (last == 0.0 || last <= 0.1 * peak)
}

#[derive(Clone, Debug, Serialize)]
pub struct S0Report {
    pub profiles: Vec<DecayProfile>,
    /// Every profile with `|alpha| >= 1` decays across shells.
    pub differences_decay: bool,
    /// The undifferenced profile (`alpha = 0`) decays too.
    pub undifferenced_decays: bool,
}

/// Per-shell suprema of `(1+|k|)^{|alpha|} |Delta^alpha sigma(k,x)|` for `|alpha| <= alpha_max`.
pub fn s0_decay_diagnostic<T: Real>(
    sigma: &Symbol<T>,
    window: &LatticeWindow,
    grid: &TorusGrid,
    alpha_max: usize,
) -> Result<S0Report> {
    let domain = Domain::new(sigma, window, grid)?;
    let nodes = domain.grid.nodes::<T>();
    let beta = MultiIndex::zero(sigma.dim());
    let mut cache = HashMap::new();
    let mut profiles = Vec::new();
    let mut differences_decay = true;
    let mut undifferenced_decays = true;
    for alpha in MultiIndex::up_to(sigma.dim(), alpha_max) {
        let terms = difference_terms(&alpha);
        let offset = alpha.as_offset();
        let mut sups: BTreeMap<u32, f64> = BTreeMap::new();
        for k in domain.window.points() {
            if !domain.usable(&k) || !domain.usable(&shifted(&k, &offset)) {
                continue;
            }
            let row = differenced_row(&domain, &k, &terms, &beta, &nodes, &mut cache)?;
            let weight = one_plus_norm::<f64>(&k).powi(alpha.order() as i32);
            let sup = row.iter().map(|z| z.norm()).fold(T::zero(), T::max).to_f64_lossy() * weight;
            let slot = sups.entry(dyadic_shell(&k)).or_insert(0.0);
            *slot = slot.max(sup);
        }
        let profile = DecayProfile::new(
            format!("alpha={:?}", alpha.entries()),
            sups.keys().copied().collect(),
            sups.values().copied().collect(),
            1e-13,
        );
        if alpha.is_zero() {
            undifferenced_decays = profile.decreasing;
        } else {
            differences_decay &= profile.decreasing;
        }
        profiles.push(profile);
    }
    Ok(S0Report {
        profiles,
        differences_decay,
        undifferenced_decays,
    })
}
