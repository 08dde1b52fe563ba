use std::path::Path;
use std::time::Instant;

use lattice_pdo::elliptic::{adn_verify, parametrix, residual_decay_report, solve, SolveOptions};
use lattice_pdo::fredholm::{index_report, IndexOptions};
use lattice_pdo::lattice::{forward_dft, inverse_dft, torus_quadrature, LatticeSequence, LatticeWindow, TorusFunction, TorusGrid};
use lattice_pdo::quantize::{adjoint_symbol, apply, assemble_matrix, compose};
use lattice_pdo::sobolev::{inclusion_spectrum, smoothing_spectrum, sobolev_norm};
use lattice_pdo::suite::{run_suite, Suite, SuiteConfig};
use lattice_pdo::symbol::{check_ellipticity, estimate_order, s0_decay_diagnostic, OrderOptions, Symbol, SymbolFile};
use lattice_pdo::Error;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::args::{Cli, Command, Global, SpectrumKind};
use crate::report::{emit, write_plot, write_text, CliResult, Failure, RunConfig, Tolerances, EXIT_OK, EXIT_VERIFICATION};

const DEFAULT_HALF_WIDTH: usize = 16;

struct Domain {
    window: LatticeWindow,
    grid: TorusGrid,
}

/// Resolves n, N and M from the flags, falling back to what the inputs imply.
fn resolve(global: &Global, n_hint: Option<usize>, half_hint: Option<usize>) -> CliResult<Domain> {
    if let (Some(flag), Some(found)) = (global.n, n_hint) {
        if flag != found {
            return Err(Error::DimensionMismatch { expected: flag, found }.into());
        }
    }
    let n = global.n.or(n_hint).unwrap_or(1);
    let half = global.half_width.or(half_hint).unwrap_or(DEFAULT_HALF_WIDTH);
    let window = LatticeWindow::new(n, half)?;
    let grid = match global.grid_points {
        Some(m) => TorusGrid::new(n, m)?,
        None => TorusGrid::for_window(&window),
    };
    grid.check_resolves(&window)?;
    Ok(Domain { window, grid })
}

fn config(global: &Global, command: &str, d: &Domain, params: Value) -> RunConfig {
    let defaults = SolveOptions::default();
    let index = IndexOptions::default();
    RunConfig {
        command: command.into(),
        n: d.window.dim(),
        half_width: d.window.half_width(),
        grid_points: d.grid.points_per_axis(),
        seed: global.seed,
        tolerances: Tolerances {
            solve_tol: global.tol.unwrap_or(defaults.tol),
            rank_tol: global.rank_tol.unwrap_or(index.rank_tol),
            min_gap: global.min_gap.unwrap_or(index.min_gap),
        },
        out: global.out.clone(),
        csv: global.csv.clone(),
        params,
    }
}

fn load_symbol(path: &Path) -> CliResult<Symbol<f64>> {
    Ok(Symbol::read_json(path)?)
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Lib(Error::Io(e)))
}

/// Reads a sequence, on the window fixed by `--N` when given.
fn load_sequence(global: &Global, path: &Path) -> CliResult<LatticeSequence<f64>> {
    let text = read_input(path)?;
    let natural = LatticeSequence::<f64>::read_csv(text.as_bytes(), None)?;
    match global.half_width {
        Some(half) => Ok(LatticeSequence::read_csv(
            text.as_bytes(),
            Some(LatticeWindow::new(natural.dim(), half)?),
        )?),
        None => Ok(natural),
    }
}

fn write_sequence(path: &Path, f: &LatticeSequence<f64>) -> CliResult<()> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    write_text(path, &String::from_utf8_lossy(&buf))
}

fn values_json(values: &[Complex<f64>]) -> Value {
    Value::Array(values.iter().map(|z| json!([z.re, z.im])).collect())
}

/// Output goes to `--out` when given, otherwise inline in the report.
fn sequence_output(global: &Global, f: &LatticeSequence<f64>) -> CliResult<Value> {
    match &global.out {
        Some(path) => {
            write_sequence(path, f)?;
            Ok(json!(path))
        }
        None => Ok(values_json(f.values())),
    }
}

/// Order to use: the flag, then the declared order, then the estimate.
fn resolve_order(explicit: Option<f64>, sigma: &Symbol<f64>, d: &Domain) -> CliResult<(f64, &'static str)> {
    if let Some(m) = explicit {
        return Ok((m, "flag"));
    }
    if let Some(m) = sigma.declared_order() {
        return Ok((m, "declared"));
    }
    let est = estimate_order(sigma, &d.window, &d.grid, &OrderOptions::default())?;
    if est.m_hat.is_finite() {
        Ok((est.m_hat, "estimated"))
    } else {
        Err(Error::Domain("order could not be estimated; pass --order".into()).into())
    }
}

fn profile_rows(profiles: &[lattice_pdo::symbol::DecayProfile], prefix: &str) -> Vec<(String, f64, f64)> {
    profiles
        .iter()
        .flat_map(|p| {
            let label = format!("{prefix}{}", p.label);
            p.shells
                .iter()
                .zip(&p.sups)
                .map(move |(&s, &y)| (label.clone(), s as f64, y))
        })
        .collect()
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<u8> {
    let started = Instant::now();
    let g = &cli.global;
    match cli.command {
        Command::Apply { symbol, input } => {
            let sigma = load_symbol(&symbol)?;
            let f = load_sequence(g, &input)?;
            let d = resolve(g, Some(sigma.dim()), Some(f.window().half_width()))?;
            if f.dim() != sigma.dim() {
                return Err(Error::DimensionMismatch { expected: sigma.dim(), found: f.dim() }.into());
            }
            let cfg = config(g, "apply", &d, json!({ "symbol": symbol, "input": input }));
            let out = apply(&sigma, &f, &d.grid)?;
            let report = json!({
                "input_norm": f.norm_l2(),
                "output_norm": out.norm_l2(),
                "output": sequence_output(g, &out)?,
            });
            emit(g, &cfg, started, report)?;
        }
        Command::Ft { input } => {
            let f = load_sequence(g, &input)?;
            let d = resolve(g, Some(f.dim()), Some(f.window().half_width()))?;
            let cfg = config(g, "ft", &d, json!({ "input": input }));
            let fh = forward_dft(&f, &d.grid)?;
            let energy = torus_quadrature(&fh.map(|z| z * z.conj())?).re;
            let output = match &g.out {
                Some(path) => {
                    let mut buf = Vec::new();
                    fh.write_csv(&mut buf)?;
                    write_text(path, &String::from_utf8_lossy(&buf))?;
                    json!(path)
                }
                None => values_json(fh.values()),
            };
            let report = json!({ "input_norm": f.norm_l2(), "transform_norm": energy.sqrt(), "output": output });
            emit(g, &cfg, started, report)?;
        }
        Command::Invft { input } => {
            let fh = TorusFunction::<f64>::read_csv(read_input(&input)?.as_bytes())?;
            let m = fh.grid().points_per_axis();
            if let Some(flag) = g.grid_points {
                if flag != m {
                    return Err(Error::Domain(format!("--M {flag} but the file holds an {m}-point grid")).into());
                }
            }
            let half = g.half_width.unwrap_or(m.saturating_sub(3) / 2);
            let mut flags = g.clone();
            flags.grid_points = Some(m);
            let d = resolve(&flags, Some(fh.grid().dim()), Some(half))?;
            let cfg = config(g, "invft", &d, json!({ "input": input }));
            let f = inverse_dft(&fh, &d.window)?;
            let report = json!({ "output_norm": f.norm_l2(), "output": sequence_output(g, &f)? });
            emit(g, &cfg, started, report)?;
        }
        Command::Compose { left, right } => {
            let a = load_symbol(&left)?;
            let b = load_symbol(&right)?;
            if a.dim() != b.dim() {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() }.into());
            }
            let d = resolve(g, Some(a.dim()), None)?;
            let cfg = config(g, "compose", &d, json!({ "left": left, "right": right }));
            let c = compose(&a, &b, &d.window, &d.grid)?;
            symbol_result(g, &cfg, started, &c)?;
        }
        Command::Adjoint { symbol } => {
            let sigma = load_symbol(&symbol)?;
            let d = resolve(g, Some(sigma.dim()), None)?;
            let cfg = config(g, "adjoint", &d, json!({ "symbol": symbol }));
            let star = adjoint_symbol(&sigma, &d.window, &d.grid)?;
            symbol_result(g, &cfg, started, &star)?;
        }
        Command::Norm { input, s } => {
            let f = load_sequence(g, &input)?;
            let d = resolve(g, Some(f.dim()), Some(f.window().half_width()))?;
            let cfg = config(g, "norm", &d, json!({ "input": input, "s": s }));
            emit(g, &cfg, started, json!({ "s": s, "norm": sobolev_norm(s, &f), "l2_norm": f.norm_l2() }))?;
        }
        Command::Classify { symbol, order, alpha_max } => {
            let sigma = load_symbol(&symbol)?;
            let d = resolve(g, Some(sigma.dim()), None)?;
            let cfg = config(g, "classify", &d, json!({ "symbol": symbol, "order": order, "alpha_max": alpha_max }));
            let options = OrderOptions { alpha_max, ..OrderOptions::default() };
            let estimate = estimate_order(&sigma, &d.window, &d.grid, &options)?;
            let m = order.or(sigma.declared_order()).unwrap_or(estimate.m_hat);
            let ellipticity = if m.is_finite() {
                Some(check_ellipticity(&sigma, m, &d.window, &d.grid)?)
            } else {
                None
            };
            let s0 = s0_decay_diagnostic(&sigma, &d.window, &d.grid, alpha_max)?;
            if let Some(path) = &g.csv {
                write_plot(path, &profile_rows(&s0.profiles, ""))?;
            }
            let report = json!({
                "order_estimate": estimate,
                "ellipticity_order": m,
                "ellipticity": ellipticity,
                "s0": s0,
            });
            emit(g, &cfg, started, report)?;
        }
        Command::Parametrix { symbol, order, steps, max_power } => {
            let sigma = load_symbol(&symbol)?;
            let d = resolve(g, Some(sigma.dim()), None)?;
            let (m, source) = resolve_order(order, &sigma, &d)?;
            let cfg = config(
                g,
                "parametrix",
                &d,
                json!({ "symbol": symbol, "order": m, "order_source": source, "steps": steps, "max_power": max_power }),
            );
            let p = parametrix(&sigma, m, steps, &d.window, &d.grid)?;
            let noise = IndexOptions::default().noise_floor;
            let left = residual_decay_report(&p.left_residual, max_power, noise)?;
            let right = residual_decay_report(&p.right_residual, max_power, noise)?;
            let orders = OrderOptions::default();
            let left_order = estimate_order(&p.left_residual, &d.window, &d.grid, &orders)?.m_hat;
            let right_order = estimate_order(&p.right_residual, &d.window, &d.grid, &orders)?.m_hat;
            if let Some(path) = &g.out {
                p.inverse.write_file(path)?;
            }
            if let Some(path) = &g.csv {
                let mut rows = profile_rows(&left.profiles, "left_");
                rows.extend(profile_rows(&right.profiles, "right_"));
                write_plot(path, &rows)?;
            }
            let report = json!({
                "order": p.order,
                "steps": p.steps,
                "threshold": p.threshold,
                "regularized": p.regularized,
                "ellipticity": p.ellipticity,
                "left_residual_order": left_order,
                "right_residual_order": right_order,
                "left_defect_max": p.left_defect.max_abs_on_rows(|_| true),
                "right_defect_max": p.right_defect.max_abs_on_rows(|_| true),
                "left_decay": left,
                "right_decay": right,
            });
            emit(g, &cfg, started, report)?;
        }
        Command::Solve { symbol, order, rhs, max_iterations, steps } => {
            let sigma = load_symbol(&symbol)?;
            let given = rhs.as_deref().map(|p| load_sequence(g, p)).transpose()?;
            let d = resolve(g, Some(sigma.dim()), given.as_ref().map(|f| f.window().half_width()))?;
            let (m, source) = resolve_order(order, &sigma, &d)?;
            let f = match given {
                Some(f) => f.resize(d.window.clone())?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                    LatticeSequence::random(d.window.clone(), d.window.default_margin(), &mut rng)
                }
            };
            let options = SolveOptions {
                tol: g.tol.unwrap_or(SolveOptions::default().tol),
                max_iterations,
                parametrix_steps: steps,
                ..SolveOptions::default()
            };
            let cfg = config(
                g,
                "solve",
                &d,
                json!({ "symbol": symbol, "order": m, "order_source": source, "rhs": rhs, "max_iterations": max_iterations, "steps": steps }),
            );
            let outcome = solve(&sigma, m, &f, &d.window, &d.grid, &options)?;
            let mut report = serde_json::to_value(&outcome.report).map_err(Error::from)?;
            report["seed"] = json!(g.seed);
            report["solution"] = sequence_output(g, &outcome.solution)?;
            emit(g, &cfg, started, report)?;
        }
        Command::Spectrum { kind, s, t, eps, threshold, windows } => {
            let d = resolve(g, None, windows.iter().copied().max())?;
            let n = d.window.dim();
            let params = match kind {
                SpectrumKind::Inclusion => json!({ "kind": kind, "s": s, "t": t, "windows": windows }),
                SpectrumKind::Smoothing => json!({ "kind": kind, "eps": eps, "threshold": threshold, "windows": windows }),
            };
            let cfg = config(g, "spectrum", &d, params);
            let report = match kind {
                SpectrumKind::Inclusion => inclusion_spectrum(s, t, n, &windows)?,
                SpectrumKind::Smoothing => smoothing_spectrum(eps, n, &windows, threshold)?,
            };
            if let Some(path) = &g.csv {
                let rows: Vec<_> = report.plot_rows().into_iter().map(|(x, y)| (String::new(), x, y)).collect();
                write_plot(path, &rows)?;
            }
            emit(g, &cfg, started, report)?;
        }
        Command::Index { symbol, windows, steps } => {
            let sigma = load_symbol(&symbol)?;
            let d = resolve(g, Some(sigma.dim()), windows.iter().copied().max())?;
            let options = IndexOptions {
                rank_tol: g.rank_tol.unwrap_or(IndexOptions::default().rank_tol),
                min_gap: g.min_gap.unwrap_or(IndexOptions::default().min_gap),
                steps,
                ..IndexOptions::default()
            };
            let cfg = config(g, "index", &d, json!({ "symbol": symbol, "windows": windows, "steps": steps }));
            emit(g, &cfg, started, index_report(&sigma, &windows, &options)?)?;
        }
        Command::Adn { symbol, order, samples } => {
            let sigma = load_symbol(&symbol)?;
            let d = resolve(g, Some(sigma.dim()), None)?;
            let (m, source) = resolve_order(order, &sigma, &d)?;
            let cfg = config(g, "adn", &d, json!({ "symbol": symbol, "order": m, "order_source": source, "samples": samples }));
            emit(g, &cfg, started, adn_verify(&sigma, m, &d.window, &d.grid, samples, g.seed)?)?;
        }
        Command::Matrix { symbol } => {
            let sigma = load_symbol(&symbol)?;
            let d = resolve(g, Some(sigma.dim()), None)?;
            let cfg = config(g, "matrix", &d, json!({ "symbol": symbol }));
            let a = assemble_matrix(&sigma, &d.window, &d.grid)?;
            if let Some(path) = &g.out {
                a.write_file(path)?;
            }
            emit(g, &cfg, started, json!({ "side": d.window.len(), "spectral_norm": a.spectral_norm() }))?;
        }
        Command::Verify { suite, windows, samples } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
                let parsed = suite
                    .parse::<Suite>()
                    .map_err(|_| Failure::Usage(format!("unknown suite {suite:?}; expected all, {}", names.join(", "))))?;
                vec![parsed]
            };
            let d = resolve(g, None, None)?;
            let cfg = config(g, "verify", &d, json!({ "suite": suite, "windows": windows, "samples": samples }));
            let suite_config = SuiteConfig { seed: g.seed, windows, samples };
            let reports = suites
                .into_iter()
                .map(|s| run_suite(s, &suite_config))
                .collect::<lattice_pdo::Result<Vec<_>>>()?;
            let passed = reports.iter().all(|r| r.passed);
            emit(g, &cfg, started, json!({ "passed": passed, "suites": reports }))?;
            return Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION });
        }
    }
    Ok(EXIT_OK)
}

fn symbol_result(global: &Global, cfg: &RunConfig, started: Instant, sigma: &Symbol<f64>) -> CliResult<()> {
    let output = match &global.out {
        Some(path) => {
            sigma.write_json(path)?;
            json!(path)
        }
        None => serde_json::to_value(SymbolFile::from_symbol(sigma)).map_err(Error::from)?,
    };
    emit(global, cfg, started, json!({ "order": sigma.declared_order(), "symbol": output }))
}
