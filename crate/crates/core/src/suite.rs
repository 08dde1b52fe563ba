//! Property suites: each module's invariants evaluated at desk scale, reported
//! as observed value against tolerance.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::{adn_verify, parametrix, residual_decay_report, solve, SolveOptions};
use crate::error::{Error, Result};
use crate::fredholm::{
    atkinson_check, fredholm_ellipticity_probe, index_report, matrix_gap_evidence, svd_index, IndexOptions,
};
use crate::lattice::{
    backward_difference, forward_dft, forward_difference, forward_difference_closed_form, inverse_dft,
    torus_quadrature, LatticeSequence, LatticeWindow, MultiIndex, TorusFunction, TorusGrid,
};
use crate::quantize::{adjoint_symbol, apply, assemble_matrix, compose, duality_matrix, extract_symbol};
use crate::sobolev::{
    bessel_apply, boundedness_report, embedding_check, inclusion_spectrum, smoothing_spectrum, sobolev_norm,
};
use crate::symbol::{
    check_ellipticity, estimate_order, parse_expr, s0_decay_diagnostic, Builtin, OrderOptions, Symbol,
};
use crate::Real;

type C = Complex<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    LatticeCore,
    SymbolModel,
    Quantize,
    Sobolev,
    Elliptic,
    Fredholm,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::LatticeCore,
        Suite::SymbolModel,
        Suite::Quantize,
        Suite::Sobolev,
        Suite::Elliptic,
        Suite::Fredholm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::LatticeCore => "lattice-core",
            Suite::SymbolModel => "symbol-model",
            Suite::Quantize => "quantize",
            Suite::Sobolev => "sobolev",
            Suite::Elliptic => "elliptic",
            Suite::Fredholm => "fredholm",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Windows for the index computations.
    pub windows: Vec<usize>,
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            windows: vec![16, 32],
            samples: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub passed: bool,
    pub observed: f64,
    pub relation: Relation,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub properties: Vec<PropertyResult>,
}

struct Recorder(Vec<PropertyResult>);

impl Recorder {
    fn at_most(&mut self, property: &str, observed: f64, tolerance: f64) {
        self.0.push(PropertyResult {
            property: property.into(),
            passed: observed <= tolerance,
            observed,
            relation: Relation::AtMost,
            tolerance,
        });
    }

    fn at_least(&mut self, property: &str, observed: f64, tolerance: f64) {
        self.0.push(PropertyResult {
            property: property.into(),
            passed: observed >= tolerance,
            observed,
            relation: Relation::AtLeast,
            tolerance,
        });
    }

    fn holds(&mut self, property: &str, ok: bool) {
        self.at_least(property, if ok { 1.0 } else { 0.0 }, 1.0);
    }
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<SuiteReport> {
    let mut r = Recorder(Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    match suite {
        Suite::LatticeCore => lattice_core(&mut r, config, &mut rng)?,
        Suite::SymbolModel => symbol_model(&mut r)?,
        Suite::Quantize => quantize(&mut r, config, &mut rng)?,
        Suite::Sobolev => sobolev(&mut r, config, &mut rng)?,
        Suite::Elliptic => elliptic(&mut r, config, &mut rng)?,
        Suite::Fredholm => fredholm(&mut r, config)?,
    }
    Ok(SuiteReport {
        suite,
        passed: r.0.iter().all(|p| p.passed),
        properties: r.0,
    })
}

fn window_grid(n: usize, half: usize) -> Result<(LatticeWindow, TorusGrid)> {
    let w = LatticeWindow::new(n, half)?;
    let g = TorusGrid::for_window(&w);
    Ok((w, g))
}

fn max_abs(values: &[C]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn shifted(k: &[i64], by: &[i64]) -> Vec<i64> {
    k.iter().zip(by).map(|(a, b)| a + b).collect()
}

fn lattice_core(r: &mut Recorder, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let (mut planch, mut inv, mut closed, mut leib, mut parts) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in [1, 2] {
        let (w, g) = window_grid(n, 8)?;
        for _ in 0..config.samples {
            let f = LatticeSequence::<f64>::random(w.clone(), 0, rng);
            let fh = forward_dft(&f, &g)?;
            let sq = TorusFunction::new(g.clone(), fh.values().iter().map(|z| C::new(z.norm_sqr(), 0.0)).collect())?;
            planch = planch.max((f.norm_sqr() - torus_quadrature(&sq).re).abs() / f.norm_sqr());
            let back = inverse_dft(&fh, &w)?;
            inv = inv.max(back.max_abs_diff(&f, |_| true)? / max_abs(f.values()));

            let g2 = LatticeSequence::<f64>::random(w.clone(), 0, rng);
            let fg = f.map(|k, v| v * g2.get(k));
            let inner_f = LatticeSequence::<f64>::random(w.clone(), 3, rng);
            let inner_g = LatticeSequence::<f64>::random(w.clone(), 3, rng);
            for alpha in MultiIndex::up_to(n, 3) {
                let it = forward_difference(&f, &alpha)?;
                let cf = forward_difference_closed_form(&f, &alpha)?;
                let scale = max_abs(it.sequence.values()).max(1.0);
                closed = closed.max(it.sequence.max_abs_diff(&cf.sequence, |_| true)? / scale);

                let lhs = forward_difference(&fg, &alpha)?;
                let terms = alpha
                    .below()
                    .into_iter()
                    .map(|beta| {
                        let rest = alpha.sub(&beta);
                        Ok((
                            alpha.binomial(&beta) as f64,
                            beta.as_offset(),
                            forward_difference(&f, &beta)?.sequence,
                            forward_difference(&g2, &rest)?.sequence,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                for k in w.points().filter(|k| lhs.margin.is_valid(&w, k)) {
                    let sum: C = terms
                        .iter()
                        .map(|(b, beta, df, dg)| df.get(&k) * dg.get(&shifted(&k, beta)) * *b)
                        .sum();
                    leib = leib.max((lhs.sequence.get(&k) - sum).norm());
                }

                let dg = forward_difference(&inner_g, &alpha)?.sequence;
                let bf = backward_difference(&inner_f, &alpha)?.sequence;
                let a: C = inner_f.values().iter().zip(dg.values()).map(|(x, y)| x * y).sum();
                let b: C = bf.values().iter().zip(inner_g.values()).map(|(x, y)| x * y).sum();
                let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
                parts = parts.max((a - b * sign).norm());
            }
        }
    }
    r.at_most("plancherel", planch, 1e-10);
    r.at_most("inversion_round_trip", inv, 1e-12);
    r.at_most("closed_form_differences", closed, 1e-13);
    r.at_most("leibniz", leib, 1e-12);
    r.at_most("summation_by_parts", parts, 1e-12);
    Ok(())
}

fn symbol_model(r: &mut Recorder) -> Result<()> {
    let texts = [
        "2 + exp(i*twopi*x1)/(1+k1^2)",
        "-k1^-2 + 3*sin(twopi*(x1-x2))",
        "step(k1)*exp(-i*twopi*x1) + (1-step(k1))",
        "sqrt(abs(k2))*cos(twopi*x2)^2 - 2i",
    ];
    let mut mismatches = 0;
    for t in texts {
        let e = parse_expr(t, 2)?;
        if parse_expr(&e.to_string(), 2)? != e {
            mismatches += 1;
        }
    }
    r.at_most("parser_round_trip_mismatches", mismatches as f64, 0.0);

    let sigma = Symbol::<f64>::parse(texts[1], 2)?;
    let grid = TorusGrid::new(2, 7)?;
    let side = grid.points_per_axis() as i64;
    let (mut on_nodes, mut shifted_x) = (0.0f64, 0.0f64);
    for i in 0..grid.len() {
        let x = grid.node::<f64>(i);
        let node = [i as i64 / side, i as i64 % side];
        for k in [[0, 0], [3, -2], [-5, 4]] {
            let at = sigma.eval_at_node(&k, &grid, &node)?;
            on_nodes = on_nodes.max((at - sigma.eval(&k, &x)?).norm());
            for j in 0..2 {
                let mut lifted = node;
                lifted[j] += side;
                on_nodes = on_nodes.max((at - sigma.eval_at_node(&k, &grid, &lifted)?).norm());
                let mut y = x.clone();
                y[j] += 1.0;
                shifted_x = shifted_x.max((at - sigma.eval(&k, &y)?).norm());
            }
        }
    }
    r.at_most("periodicity_on_nodes", on_nodes, 0.0);
    r.at_most("periodicity_shifted_coordinates", shifted_x, 1e-12);

    let mut order_err = 0.0f64;
    let mut ellip_margin = f64::INFINITY;
    for (n, half) in [(1, 64), (2, 16)] {
        let (w, g) = window_grid(n, half)?;
        for s in [-4.0, -2.5, -1.0, 0.0, 1.5, 3.0, 4.0] {
            let b = Symbol::<f64>::bessel(s, n);
            let est = estimate_order(&b, &w, &g, &OrderOptions::default())?;
            order_err = order_err.max((est.m_hat - s).abs());
            let e = check_ellipticity(&b, s, &w, &g)?;
            let ok = e.elliptic && e.m_radius == 0.0;
            let margin = if ok { e.constant - 2f64.powf(-s.abs() / 2.0) } else { -1.0 };
            ellip_margin = ellip_margin.min(margin);
        }
    }
    r.at_most("bessel_order_error", order_err, 0.1);
    r.at_least("bessel_ellipticity_margin", ellip_margin, 0.0);

    let (w, g) = window_grid(1, 32)?;
    let s0 = Symbol::<f64>::parse("exp(i*twopi*x1)/(1+k1^2)", 1)?;
    let d = s0_decay_diagnostic(&s0, &w, &g, 2)?;
    r.holds("s0_differences_decay", d.differences_decay);
    Ok(())
}

fn s0_symbol() -> Result<Symbol<f64>> {
    Symbol::parse("(2 + cos(twopi*x1))*(1 + k1/sqrt(1+k1^2))/2 + i*sin(twopi*2*x1)/(1+abs(k1))", 1)
}

fn quantize(r: &mut Recorder, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let (w, g) = window_grid(1, 16)?;
    let margin = w.default_margin();
    let inside = |k: &[i64]| w.is_interior(k, margin);
    let sigma = s0_symbol()?;
    let a = assemble_matrix(&sigma, &w, &g)?;
    let (mut linear, mut consistent) = (0.0f64, 0.0f64);
    for _ in 0..config.samples {
        let f = LatticeSequence::<f64>::random(w.clone(), 0, rng);
        let h = LatticeSequence::<f64>::random(w.clone(), 0, rng);
        let (ca, cb) = (C::new(0.7, -0.2), C::new(-1.3, 0.5));
        let lhs = apply(&sigma, &f.combine(ca, &h, cb)?, &g)?;
        let rhs = apply(&sigma, &f, &g)?.combine(ca, &apply(&sigma, &h, &g)?, cb)?;
        linear = linear.max(lhs.max_abs_diff(&rhs, |_| true)?);
        consistent = consistent.max(a.apply(&f)?.max_abs_diff(&apply(&sigma, &f, &g)?, |_| true)?);
    }
    r.at_most("linearity", linear, 1e-12);
    r.at_most("matrix_apply_consistency", consistent, 1e-12);

    let back = assemble_matrix(&extract_symbol(&a)?, &w, &g)?;
    r.at_most("extraction_round_trip", back.combine(1.0, &a, -1.0)?.max_abs_on_rows(inside), 1e-10);

    let rho = Symbol::<f64>::parse("2 + sin(twopi*x1)/(1+k1^2)", 1)?;
    let tau = Symbol::<f64>::parse("exp(-i*twopi*x1)*(1+k1^2)^(-0.5) + 3", 1)?;
    let left = compose(&compose(&rho, &sigma, &w, &g)?, &tau, &w, &g)?;
    let right = compose(&rho, &compose(&sigma, &tau, &w, &g)?, &w, &g)?;
    let l = assemble_matrix(&left, &w, &g)?;
    let rr = assemble_matrix(&right, &w, &g)?;
    r.at_most("associativity", l.combine(1.0, &rr, -1.0)?.max_abs_on_rows(inside), 1e-8);

    let mut growth = 1.0f64;
    for text in ["exp(i*twopi*x1)", "2 + cos(twopi*x1)*k1/sqrt(1+k1^2)"] {
        let s = Symbol::<f64>::parse(text, 1)?;
        let norms = [8, 16, 32]
            .iter()
            .map(|&h| Ok(assemble_matrix(&s, &window_grid(1, h)?.0, &window_grid(1, h)?.1)?.spectral_norm()))
            .collect::<Result<Vec<f64>>>()?;
        growth = growth.max(norms.windows(2).map(|p| p[1] / p[0]).fold(1.0, f64::max));
    }
    r.at_most("l2_norm_growth", growth, 1.5);

    let dual = duality_matrix(&sigma, &w, &g)?;
    r.at_most("duality", dual.combine(1.0, &a, -1.0)?.max_abs_on_rows(inside), 1e-8);

    let star = adjoint_symbol(&sigma, &w, &g)?;
    let phi = LatticeSequence::<f64>::random(w.clone(), margin, rng);
    let psi = LatticeSequence::<f64>::random(w.clone(), margin, rng);
    let lhs = apply(&sigma, &phi, &g)?.inner(&psi)?;
    let rhs = phi.inner(&apply(&star, &psi, &g)?)?;
    r.at_most("formal_adjoint", (lhs - rhs).norm(), 1e-10);
    Ok(())
}

fn sobolev(r: &mut Recorder, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let w = LatticeWindow::new(2, 8)?;
    let (mut group, mut iso, mut embed) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..config.samples {
        let u = LatticeSequence::<f64>::random(w.clone(), 0, rng);
        let (s, t) = (1.3, -0.4);
        let two = bessel_apply(s, &bessel_apply(t, &u));
        let one = bessel_apply(s + t, &u);
        group = group.max(two.max_abs_diff(&one, |_| true)? / max_abs(one.values()));
        let lhs = sobolev_norm(s + t, &bessel_apply(-t, &u));
        let rhs = sobolev_norm(s, &u);
        iso = iso.max((lhs - rhs).abs() / rhs);
        embed = embed.max(embedding_check(0.0, 2.0, std::slice::from_ref(&u))?.max_ratio);
    }
    r.at_most("bessel_group", group, 1e-12);
    r.at_most("isometry", iso, 1e-12);
    r.at_most("embedding_ratio", embed, 1.0);

    let sigma = Symbol::<f64>::builtin(Builtin::PerturbedBessel { m: 1.0, amplitude: 1.0 }, 1)?;
    let b = boundedness_report(&sigma, 1.0, 0.5, &[8, 16, 32], 5, rng)?;
    r.at_most("sobolev_bound_growth", b.max_growth, 1.5);

    let inc = inclusion_spectrum(0.0, 1.0, 1, &[256])?;
    r.at_most("inclusion_exponent_error", (inc.fit_exponent + 1.0).abs(), 0.2);
    let sm = smoothing_spectrum(2.0, 1, &[16, 32, 64], 0.1)?;
    let step = sm.small_counts.windows(2).map(|p| p[1] as f64 - p[0] as f64).fold(f64::INFINITY, f64::min);
    r.at_least("smoothing_small_count_increase", step, 1.0);
    Ok(())
}

fn elliptic(r: &mut Recorder, config: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    let (w16, g16) = window_grid(1, 16)?;
    let mut exact = 0.0f64;
    for (text, m) in [("(1+k1^2)^0.75", 1.5), ("3 - 1/(2+k1^2)", 0.0)] {
        let p = parametrix(&Symbol::<f64>::parse(text, 1)?, m, 1, &w16, &g16)?;
        exact = exact.max(p.right_defect.max_abs_on_rows(|_| true));
        exact = exact.max(p.left_defect.max_abs_on_rows(|_| true));
    }
    r.at_most("multiplier_residual", exact, 1e-12);

    let (w, g) = window_grid(1, 32)?;
    let perturbed = Symbol::<f64>::parse("2 + exp(i*twopi*x1)/(1+k1^2)", 1)?;
    let mut orders = Vec::new();
    let mut decaying = true;
    for steps in 1..=3 {
        let p = parametrix(&perturbed, 0.0, steps, &w, &g)?;
        orders.push(estimate_order(&p.right_residual, &w, &g, &OrderOptions::default())?.m_hat);
        if steps == 3 {
            decaying = residual_decay_report(&p.right_residual, 3, 1e-13)?.schwartz_like
                && residual_decay_report(&p.left_residual, 3, 1e-13)?.schwartz_like;
        }
    }
    let drop = orders.windows(2).map(|p| p[0] - p[1]).fold(f64::INFINITY, f64::min);
    r.at_least("residual_order_drop", drop, 0.8);
    r.holds("residual_shellwise_decreasing", decaying);

    let bessel = adn_verify(&Symbol::<f64>::bessel(2.0, 1), 2.0, &w, &g, config.samples, config.seed)?;
    let inside = bessel.runs.iter().flat_map(|run| &run.ratios).all(|&x| x > 1.0 && x <= 2.0);
    r.holds("adn_bessel_ratios_in_range", inside);
    let pb = Symbol::<f64>::builtin(Builtin::PerturbedBessel { m: 1.0, amplitude: 1.0 }, 1)?;
    let adn = adn_verify(&pb, 1.0, &w, &g, config.samples, config.seed)?;
    r.at_least("adn_c1_positive", adn.c1, f64::MIN_POSITIVE);
    let change = adn.c1_change.unwrap_or(f64::INFINITY).max(adn.c2_change.unwrap_or(f64::INFINITY));
    r.at_most("adn_stability", change, 0.25);

    let f = LatticeSequence::<f64>::random(w.clone(), w.default_margin(), rng);
    let out = solve(&perturbed, 0.0, &f, &w, &g, &SolveOptions::default())?;
    r.at_most("solve_interior_residual", out.report.residual_interior, 1e-8);
    let a = assemble_matrix(&perturbed, &w, &g)?;
    let direct = f64::lu_solve(a.entries(), f.values()).ok_or_else(|| Error::domain("singular finite section"))?;
    let direct = LatticeSequence::new(w.clone(), direct)?;
    r.at_most("solve_matches_direct", out.solution.max_abs_diff(&direct, |_| true)?, 1e-6);
    Ok(())
}

fn fredholm(r: &mut Recorder, config: &SuiteConfig) -> Result<()> {
    let options = IndexOptions::default();
    let windows = &config.windows;
    let jump = |winding| Symbol::<f64>::builtin(Builtin::Jump { axis: 1, winding }, 1);
    let cases = [("constant", Symbol::<f64>::constant(2.0, 1), 0i64), ("jump_plus", jump(1)?, 1), ("jump_minus", jump(-1)?, -1)];
    for (name, sigma, expect) in &cases {
        let rep = index_report(sigma, windows, &options)?;
        r.holds(&format!("{name}_svd_index"), rep.svd_index == Some(*expect));
        let gap = rep.gap_evidence.iter().map(|e| e.gap).fold(f64::INFINITY, f64::min);
        r.at_least(&format!("{name}_spectral_gap"), gap, options.min_gap);
        let raw = rep.trace_index_raw.unwrap_or(f64::NAN);
        let miss = (raw - *expect as f64).abs();
        r.at_most(&format!("{name}_trace_distance"), if miss.is_nan() { f64::INFINITY } else { miss }, 0.25);
        r.holds(&format!("{name}_agreement"), rep.agreement);
    }

    let mut adjoint_mismatch = 0usize;
    for (_, sigma, _) in &cases {
        for &half in windows {
            let (w, g) = window_grid(1, half)?;
            let (_, coker, _) = matrix_gap_evidence(&assemble_matrix(sigma, &w, &g)?, &options);
            let adj = assemble_matrix(&adjoint_symbol(sigma, &w, &g)?, &w, &g)?;
            let (ker, _, _) = matrix_gap_evidence(&adj, &options);
            adjoint_mismatch += usize::from(ker != coker);
        }
    }
    r.at_most("adjoint_consistency_mismatches", adjoint_mismatch as f64, 0.0);

    let largest = windows.iter().copied().max().unwrap_or(32);
    let (w, g) = window_grid(1, 2 * largest)?;
    let mut additive = true;
    for (a, b) in [(jump(1)?, jump(1)?), (jump(1)?, jump(-1)?), (jump(-1)?, Symbol::constant(3.0, 1))] {
        let ia = svd_index(&a, windows, &options)?.svd_index;
        let ib = svd_index(&b, windows, &options)?.svd_index;
        let iab = svd_index(&compose(&a, &b, &w, &g)?, windows, &options)?.svd_index;
        additive &= matches!((ia, ib, iab), (Some(x), Some(y), Some(z)) if x + y == z);
    }
    r.holds("index_additivity", additive);

    let inv = Symbol::<f64>::parse("2 + 1/(1+k1^2)", 1)?.with_order(0.0);
    let rep = index_report(&inv, windows, &options)?;
    r.holds("invertible_index_zero", rep.svd_index == Some(0) && rep.trace_index == Some(0));

    let perturbed = Symbol::<f64>::parse("2 + exp(i*twopi*x1)/(1+k1^2)", 1)?.with_order(0.0);
    let atk = atkinson_check(&perturbed, windows, &options)?;
    r.holds("atkinson_bounded", atk.bounded);
    let decaying = Symbol::<f64>::parse("(1+k1^2)^(-0.5)", 1)?.with_order(0.0);
    let probe = fredholm_ellipticity_probe(&decaying, &[16, 32, 64], &options)?;
    r.holds("non_elliptic_near_kernel_growth", probe.branch == "non_elliptic" && probe.passed);
    Ok(())
}
