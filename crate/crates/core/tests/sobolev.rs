use lattice_pdo::lattice::{LatticeSequence, LatticeWindow};
use lattice_pdo::sobolev::{
    bessel_apply, boundedness_report, embedding_check, inclusion_spectrum, smoothing_spectrum, sobolev_norm,
};
use lattice_pdo::symbol::Symbol;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random(n: usize, half: usize, seed: u64) -> LatticeSequence<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatticeSequence::random(LatticeWindow::new(n, half).unwrap(), 0, &mut rng)
}

#[test]
fn bessel_potentials_form_a_group() {
    for n in [1, 2] {
        let u = random(n, 8, 3);
        for (s, t) in [(1.0, 2.0), (-0.5, 3.5), (2.5, -2.5), (0.3, 0.0)] {
            let two = bessel_apply(s, &bessel_apply(t, &u));
            let one = bessel_apply(s + t, &u);
            for (a, b) in two.values().iter().zip(one.values()) {
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
        let back = bessel_apply(-1.7, &bessel_apply(1.7, &u));
        assert!(back.max_abs_diff(&u, |_| true).unwrap() < 1e-12);
        assert_eq!(bessel_apply(0.0, &u), u);
    }
}

/// With `||u||_{s,2} = ||J_s u||_2`, `J_{-t}` maps `H^{s,2}` isometrically onto `H^{s+t,2}`.
#[test]
fn bessel_potential_isometry() {
    for n in [1, 2] {
        for seed in 0..10 {
            let u = random(n, 8, seed);
            for (s, t) in [(0.0, 1.0), (1.5, -2.0), (-1.0, 3.0), (2.0, 0.5)] {
                let lhs = sobolev_norm(s + t, &bessel_apply(-t, &u));
                let rhs = sobolev_norm(s, &u);
                assert!((lhs - rhs).abs() <= 1e-12 * rhs);
            }
        }
    }
    let u = random(1, 8, 99);
    assert!((sobolev_norm(0.0, &u) - u.norm_l2()).abs() == 0.0);
}

#[test]
fn embedding_on_random_sequences() {
    let samples: Vec<_> = (0..20).map(|seed| random(1, 32, seed)).collect();
    let r = embedding_check(0.0, 2.0, &samples).unwrap();
    assert!(r.holds && r.max_ratio <= 1.0);
    let zero = LatticeSequence::<f64>::delta(LatticeWindow::new(1, 4).unwrap(), &[0]).unwrap();
    assert_eq!(embedding_check(-1.0, 3.0, &[zero]).unwrap().max_ratio, 1.0);
}

/// Independent oracle: list the multiplier values, sort them, fit by least squares.
fn oracle_exponent(s: f64, t: f64, half: i64) -> f64 {
    let mut v: Vec<f64> = (-half..=half).map(|k| (1.0 + (k * k) as f64).powf((s - t) / 2.0)).collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let len = v.len();
    let pts: Vec<(f64, f64)> = ((len + 3) / 4..=len).map(|j| ((j as f64).ln(), v[j - 1].ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn inclusion_tail_exponent() {
    for (s, t) in [(0.0, 1.0), (-1.0, 1.0), (0.5, 3.0)] {
        let r = inclusion_spectrum(s, t, 1, &[64, 128, 256]).unwrap();
        let target = s - t;
        assert!((r.fit_exponent - target).abs() <= 0.2 * target.abs(), "{s},{t}: {}", r.fit_exponent);
        assert!((r.fit_exponent - oracle_exponent(s, t, 256)).abs() < 1e-9);
        for sv in &r.singular_values {
            assert_eq!(sv[0], 1.0);
            assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}

#[test]
fn smoothing_counts_grow() {
    let r = smoothing_spectrum(2.0, 1, &[16, 32, 64], 0.1).unwrap();
    let oracle: Vec<usize> = [16i64, 32, 64]
        .iter()
        .map(|&h| (-h..=h).filter(|k| 1.0 / (1.0 + (k * k) as f64) < 0.1).count())
        .collect();
    assert_eq!(r.small_counts, oracle);
    assert!(r.small_counts.windows(2).all(|w| w[1] > w[0]));
    assert!(r.small_fractions.windows(2).all(|w| w[1] > w[0]));
    let big = smoothing_spectrum(40.0, 1, &[8], 0.5).unwrap();
    assert_eq!(big.small_counts[0], 16);
}

#[test]
fn sobolev_boundedness_is_uniform_in_the_window() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (text, m) in [
        ("(2 + exp(i*twopi*x1)/(1+k1^2))*(1+k1^2)^0.5", 1.0),
        ("2 + cos(twopi*x1)*k1/sqrt(1+k1^2)", 0.0),
        ("exp(i*twopi*x1)*(1+k1^2)^(-1)", -2.0),
    ] {
        let sigma = Symbol::<f64>::parse(text, 1).unwrap();
        for s in [-1.0, 0.0, 1.5] {
            let r = boundedness_report(&sigma, m, s, &[8, 16, 32], 20, &mut rng).unwrap();
            assert!(r.max_growth < 1.5, "{text} s={s}: {r:?}");
            for sample in &r.samples {
                assert!(sample.sampled_ratio <= sample.section_norm * (1.0 + 1e-12));
            }
        }
    }
}

proptest! {
    #[test]
    fn embedding_constant_is_one(s in -3.0f64..3.0, gap in 0.0f64..3.0, seed in 0u64..1000) {
        let u = random(2, 4, seed);
        prop_assert!(sobolev_norm(s, &u) <= sobolev_norm(s + gap, &u) * (1.0 + 1e-14));
    }
}
