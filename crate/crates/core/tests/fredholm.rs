use lattice_pdo::fredholm::{
    atkinson_check, fredholm_ellipticity_probe, index_report, matrix_gap_evidence, svd_index, trace_index,
    IndexOptions,
};
use lattice_pdo::lattice::{LatticeWindow, TorusGrid};
use lattice_pdo::quantize::{adjoint_symbol, assemble_matrix, compose};
use lattice_pdo::symbol::Symbol;

fn jump(winding: i64) -> Symbol<f64> {
    let text = if winding > 0 {
        "step(k1)*exp(i*twopi*x1) + (1-step(k1))"
    } else {
        "step(k1)*exp(-i*twopi*x1) + (1-step(k1))"
    };
    Symbol::parse(text, 1).unwrap().with_order(0.0)
}

/// Hand-built truncated jump matrix: row k reads f(k) for k < 0 and f(k + winding)
/// for k >= 0 (nothing when that leaves the window).
fn jump_matrix(winding: i64, half: i64) -> Vec<Vec<u8>> {
    let side = (2 * half + 1) as usize;
    let mut m = vec![vec![0u8; side]; side];
    for k in -half..=half {
        let l = if k < 0 { k } else { k + winding };
        if l.abs() <= half {
            m[(k + half) as usize][(l + half) as usize] = 1;
        }
    }
    m
}

/// Index of a 0/1 matrix with at most one 1 per row, counting only null vectors
/// supported on `|k| <= radius`: unused columns are kernel vectors `e_l`; unused
/// rows are cokernel vectors `e_k`; a column read by rows k1 < k2 < ... gives
/// cokernel vectors `e_{k1} - e_{k_i}`.
fn hand_index(winding: i64, half: i64, radius: i64) -> i64 {
    let m = jump_matrix(winding, half);
    let side = m.len();
    let inside = |i: usize| (i as i64 - half).abs() <= radius;
    let mut ker = 0;
    let mut coker = 0;
    for l in 0..side {
        let readers: Vec<usize> = (0..side).filter(|&k| m[k][l] == 1).collect();
        if readers.is_empty() && inside(l) {
            ker += 1;
        }
        coker += readers.iter().skip(1).filter(|&&k| inside(k) && inside(readers[0])).count() as i64;
    }
    coker += (0..side).filter(|&k| m[k].iter().all(|&v| v == 0) && inside(k)).count() as i64;
    ker - coker
}

#[test]
fn hand_built_jump_matches_assembly() {
    for winding in [1, -1] {
        let w = LatticeWindow::new(1, 8).unwrap();
        let g = TorusGrid::for_window(&w);
        let a = assemble_matrix(&jump(winding), &w, &g).unwrap();
        let m = jump_matrix(winding, 8);
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((a.entries()[(i, j)].re - v as f64).abs() < 1e-12);
                assert!(a.entries()[(i, j)].im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn shipped_symbols_have_the_expected_indices() {
    let options = IndexOptions::default();
    for (sigma, expect) in [
        (Symbol::<f64>::constant(2.0, 1), 0),
        (jump(1), hand_index(1, 32, 24)),
        (jump(-1), hand_index(-1, 32, 24)),
    ] {
        let r = index_report(&sigma, &[16, 32], &options).unwrap();
        assert_eq!(r.svd_index, Some(expect), "{r:?}");
        assert!(r.gap_evidence.iter().all(|e| e.gap >= 100.0));
        let raw = r.trace_index_raw.unwrap();
        assert!((raw - expect as f64).abs() < 0.25, "trace {raw} vs {expect}");
        assert_eq!(r.trace_index, Some(expect));
        assert!(r.agreement);
        assert!(r.trace.as_ref().unwrap().certified);
    }
}

#[test]
fn trace_is_stable_in_window_and_steps() {
    let options = IndexOptions::default();
    for half in [32, 48, 64] {
        for steps in [3, 4] {
            let w = LatticeWindow::new(1, half).unwrap();
            let g = TorusGrid::for_window(&w);
            let r = trace_index(&jump(1), &w, &g, &IndexOptions { steps, ..options.clone() }).unwrap();
            assert!((r.raw - 1.0).abs() < 0.25, "N = {half}, J = {steps}: {}", r.raw);
        }
    }
}

#[test]
fn invertible_multipliers_have_zero_trace() {
    let s = Symbol::<f64>::parse("2 + 1/(1+k1^2)", 1).unwrap().with_order(0.0);
    let w = LatticeWindow::new(1, 32).unwrap();
    let g = TorusGrid::for_window(&w);
    let r = trace_index(&s, &w, &g, &IndexOptions::default()).unwrap();
    assert!(r.raw.abs() < 1e-10);
    assert_eq!(r.index, Some(0));
}

#[test]
fn cokernel_matches_adjoint_symbol_kernel() {
    let options = IndexOptions::default();
    for sigma in [jump(1), jump(-1)] {
        let w = LatticeWindow::new(1, 16).unwrap();
        let g = TorusGrid::for_window(&w);
        let a = assemble_matrix(&sigma, &w, &g).unwrap();
        let (_, coker, _) = matrix_gap_evidence(&a, &options);
        let adj = assemble_matrix(&adjoint_symbol(&sigma, &w, &g).unwrap(), &w, &g).unwrap();
        let (ker_adj, _, _) = matrix_gap_evidence(&adj, &options);
        assert_eq!(coker, ker_adj);
    }
}

#[test]
fn index_is_additive_under_composition() {
    let options = IndexOptions::default();
    let w = LatticeWindow::new(1, 64).unwrap();
    let g = TorusGrid::for_window(&w);
    let pairs = [(jump(1), jump(1), 2), (jump(1), jump(-1), 0), (jump(-1), Symbol::constant(3.0, 1), -1)];
    for (a, b, expect) in pairs {
        let ia = svd_index(&a, &[16, 32], &options).unwrap().svd_index.unwrap();
        let ib = svd_index(&b, &[16, 32], &options).unwrap().svd_index.unwrap();
        let ab = compose(&a, &b, &w, &g).unwrap();
        let iab = svd_index(&ab, &[16, 32], &options).unwrap().svd_index;
        assert_eq!(iab, Some(ia + ib));
        assert_eq!(ia + ib, expect);
    }
}

#[test]
fn atkinson_counts_stay_bounded() {
    let options = IndexOptions::default();
    let perturbed = Symbol::<f64>::parse("2 + exp(i*twopi*x1)/(1+k1^2)", 1).unwrap();
    for sigma in [Symbol::constant(2.0, 1), perturbed, jump(1)] {
        let r = atkinson_check(&sigma, &[32, 64], &options).unwrap();
        assert_eq!(r.k1_counts[0], r.k1_counts[1]);
        assert_eq!(r.k2_counts[0], r.k2_counts[1]);
        assert!(r.bounded);
    }
    let r = atkinson_check(&Symbol::<f64>::constant(2.0, 1), &[16], &options).unwrap();
    assert!(r.k1_singular_values[0].iter().all(|&s| s == 0.0));
}

#[test]
fn probe_branches() {
    let options = IndexOptions::default();
    let one = fredholm_ellipticity_probe(&Symbol::<f64>::bessel(0.0, 1), &[16, 32, 64], &options).unwrap();
    assert_eq!(one.branch, "elliptic");
    assert!(one.passed);

    let decaying = Symbol::<f64>::parse("(1+k1^2)^(-0.5)", 1).unwrap().with_order(0.0);
    let r = fredholm_ellipticity_probe(&decaying, &[16, 32, 64], &options).unwrap();
    assert_eq!(r.branch, "non_elliptic");
    // oracle: the matrix is diagonal with entries (1+k^2)^{-1/2}; count |k| with 1+k^2 > 100
    let expect: Vec<usize> = [16i64, 32, 64]
        .iter()
        .map(|&n| (-n..=n).filter(|k| 1 + k * k > 100).count())
        .collect();
    assert_eq!(r.near_kernel_counts, expect);
    assert!(r.near_kernel_growth && r.passed);

    let curve = Symbol::<f64>::parse("sin(twopi*x1) + 1/(1+k1^2)", 1).unwrap().with_order(0.0);
    let r = fredholm_ellipticity_probe(&curve, &[16, 32, 64], &options).unwrap();
    assert_eq!(r.branch, "non_elliptic");

    let report = index_report(&decaying, &[16, 32, 64], &options).unwrap();
    assert_eq!(report.svd_index, None);
    assert_eq!(report.trace_index, None);
    assert_eq!(report.elliptic, Some(false));
}
