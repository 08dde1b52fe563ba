use lattice_pdo::lattice::{
    backward_difference, forward_dft, forward_difference, forward_difference_closed_form, inverse_dft,
    torus_quadrature, LatticeSequence, LatticeWindow, MultiIndex, TorusFunction, TorusGrid,
};
use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

type C = Complex<f64>;

/// Naive `f^(x) = sum_k e^{-2 pi i k.x} f(k)` with libm trig at every term.
fn naive_dft(f: &LatticeSequence<f64>, grid: &TorusGrid) -> Vec<C> {
    (0..grid.len())
        .map(|i| {
            let x = grid.node::<f64>(i);
            f.window()
                .points()
                .zip(f.values())
                .map(|(k, v)| {
                    let phase: f64 = k.iter().zip(&x).map(|(kj, xj)| *kj as f64 * xj).sum();
                    C::from_polar(1.0, -2.0 * PI * phase) * v
                })
                .sum()
        })
        .collect()
}

fn shift(k: &[i64], by: &[i64]) -> Vec<i64> {
    k.iter().zip(by).map(|(a, b)| a + b).collect()
}

#[test]
fn plancherel_and_inversion_on_random_sequences() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for n in [1, 2] {
        for half in [8, 16] {
            let window = LatticeWindow::new(n, half).unwrap();
            let grid = TorusGrid::new(n, 2 * half + 3).unwrap();
            for trial in 0..100 {
                let f = LatticeSequence::<f64>::random(window.clone(), 0, &mut rng);
                let f_hat = forward_dft(&f, &grid).unwrap();
                if trial < 5 {
                    let naive = naive_dft(&f, &grid);
                    let scale: f64 = naive.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    for (a, b) in f_hat.values().iter().zip(&naive) {
                        assert!((a - b).norm() <= 1e-12 * scale);
                    }
                }
                let energy = f.norm_sqr();
                let squared = TorusFunction::new(grid.clone(), f_hat.values().iter().map(|z| C::new(z.norm_sqr(), 0.0)).collect()).unwrap();
                let dual = torus_quadrature(&squared).re;
                assert!((energy - dual).abs() <= 1e-10 * energy);
                let back = inverse_dft(&f_hat, &window).unwrap();
                let err = back.max_abs_diff(&f, |_| true).unwrap();
                assert!(err <= 1e-12 * f.values().iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn single_character_inverts_to_a_delta() {
    let window = LatticeWindow::new(1, 5).unwrap();
    let grid = TorusGrid::new(1, 16).unwrap();
    let f = TorusFunction::from_fn(grid, |x| C::from_polar(1.0, -2.0 * PI * 3.0 * x[0])).unwrap();
    let d = inverse_dft(&f, &window).unwrap();
    let expect = LatticeSequence::delta(window, &[3]).unwrap();
    assert!(d.max_abs_diff(&expect, |_| true).unwrap() < 1e-14);
}

#[test]
fn quadrature_of_sin_squared() {
    let grid = TorusGrid::new(1, 8).unwrap();
    let f = TorusFunction::from_fn(grid, |x: &[f64]| C::new((2.0 * PI * x[0]).sin().powi(2), 0.0)).unwrap();
    let direct: f64 = (0..8).map(|j| (2.0 * PI * j as f64 / 8.0).sin().powi(2)).sum::<f64>() / 8.0;
    assert!((torus_quadrature(&f).re - direct).abs() < 1e-15);
    assert!((direct - 0.5).abs() < 1e-15);
}

fn alphas(n: usize) -> Vec<MultiIndex> {
    MultiIndex::up_to(n, 3)
}

#[test]
fn closed_form_differences_match_iteration() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [1, 2] {
        let window = LatticeWindow::new(n, 6).unwrap();
        for _ in 0..50 {
            let f = LatticeSequence::<f64>::random(window.clone(), 0, &mut rng);
            for alpha in alphas(n) {
                let iter = forward_difference(&f, &alpha).unwrap();
                let closed = forward_difference_closed_form(&f, &alpha).unwrap();
                let err = iter.sequence.max_abs_diff(&closed.sequence, |_| true).unwrap();
                assert!(err <= 1e-13 * 2f64.powi(alpha.order() as i32));
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

/// `Delta^alpha(fg)(k) = sum_{beta <= alpha} binom(alpha, beta) (Delta^beta f)(k) (Delta^{alpha-beta} g)(k+beta)`,
/// equivalently with `(bar-Delta^{alpha-beta} g)(k+alpha)` in the last factor.
#[test]
fn leibniz_formula_on_interior_points() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [1, 2] {
        let window = LatticeWindow::new(n, 6).unwrap();
        for _ in 0..50 {
            let f = LatticeSequence::<f64>::random(window.clone(), 0, &mut rng);
            let g = LatticeSequence::<f64>::random(window.clone(), 0, &mut rng);
            let fg = f.map(|k, v| v * g.get(k));
            for alpha in alphas(n) {
                let lhs = forward_difference(&fg, &alpha).unwrap();
                let terms: Vec<_> = alpha
                    .below()
                    .into_iter()
                    .map(|beta| {
                        let rest = alpha.sub(&beta);
                        (
                            alpha.binomial(&beta) as f64,
                            beta.as_offset(),
                            forward_difference(&f, &beta).unwrap().sequence,
                            forward_difference(&g, &rest).unwrap().sequence,
                            backward_difference(&g, &rest).unwrap().sequence,
                        )
                    })
                    .collect();
                for k in window.points().filter(|k| lhs.margin.is_valid(&window, k)) {
                    let mut forward = C::new(0.0, 0.0);
                    let mut backward = C::new(0.0, 0.0);
                    for (binom, beta, df, dg, bg) in &terms {
                        let df = df.get(&k);
                        forward += df * dg.get(&shift(&k, beta)) * binom;
                        backward += df * bg.get(&shift(&k, &alpha.as_offset())) * binom;
                    }
                    let exact = lhs.sequence.get(&k);
                    assert!((exact - forward).norm() < 1e-12, "alpha {alpha:?} k {k:?}");
                    assert!((exact - backward).norm() < 1e-12, "alpha {alpha:?} k {k:?}");
                }
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn summation_by_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [1, 2] {
        let window = LatticeWindow::new(n, 8).unwrap();
        for _ in 0..50 {
            // supported at least |alpha| <= 3 layers inside
            let f = LatticeSequence::<f64>::random(window.clone(), 3, &mut rng);
            let g = LatticeSequence::<f64>::random(window.clone(), 3, &mut rng);
            for alpha in alphas(n) {
                let dg = forward_difference(&g, &alpha).unwrap().sequence;
                let bf = backward_difference(&f, &alpha).unwrap().sequence;
                let lhs: C = f.values().iter().zip(dg.values()).map(|(a, b)| a * b).sum();
                let rhs: C = bf.values().iter().zip(g.values()).map(|(a, b)| a * b).sum();
                let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
                assert!((lhs - rhs * sign).norm() < 1e-12);
            }
        }
    }
}

fn sequence_strategy(n: usize, half: usize) -> impl Strategy<Value = LatticeSequence<f64>> {
    let window = LatticeWindow::new(n, half).unwrap();
    let len = window.len();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(move |v| {
        LatticeSequence::new(window.clone(), v.into_iter().map(|(a, b)| C::new(a, b)).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn transform_is_linear(f in sequence_strategy(1, 6), g in sequence_strategy(1, 6), a in -2.0f64..2.0) {
        let grid = TorusGrid::new(1, 15).unwrap();
        let lhs = forward_dft(&f.combine(C::new(a, 0.0), &g, C::new(0.0, 1.0)).unwrap(), &grid).unwrap();
        let fh = forward_dft(&f, &grid).unwrap();
        let gh = forward_dft(&g, &grid).unwrap();
        for ((l, x), y) in lhs.values().iter().zip(fh.values()).zip(gh.values()) {
            prop_assert!((l - (x * a + y * C::new(0.0, 1.0))).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_in_two_dimensions(f in sequence_strategy(2, 3)) {
        let grid = TorusGrid::new(2, 7).unwrap();
        let back = inverse_dft(&forward_dft(&f, &grid).unwrap(), f.window()).unwrap();
        prop_assert!(back.max_abs_diff(&f, |_| true).unwrap() < 1e-13);
    }
}
