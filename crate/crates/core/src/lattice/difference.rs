//! Forward and backward difference calculus on a truncated lattice.

use num_complex::Complex;

use super::domain::{LatticeWindow, MultiIndex};
use super::sequence::LatticeSequence;
use crate::error::Result;
use crate::scalar::Real;

/// Layers at each side of the window where a differenced sequence saw the zero
/// extension and therefore differs from the untruncated result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Margin {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl Margin {
    pub fn none(n: usize) -> Self {
        Self {
            lower: vec![0; n],
            upper: vec![0; n],
        }
    }

    /// True when `k` is unaffected by truncation.
    pub fn is_valid(&self, window: &LatticeWindow, k: &[i64]) -> bool {
        let half = window.half_width() as i64;
        k.iter().enumerate().all(|(j, &kj)| {
            kj + self.upper[j] as i64 <= half && kj - self.lower[j] as i64 >= -half
        })
    }
}

#[derive(Clone, Debug)]
pub struct Differenced<T: Real> {
    pub sequence: LatticeSequence<T>,
    pub margin: Margin,
}

fn check_alpha<T: Real>(f: &LatticeSequence<T>, alpha: &MultiIndex) -> Result<()> {
    f.window().check_dim(alpha.dim())
}

/// One step along axis `j`; `forward` selects `f(k+e_j) - f(k)` over `f(k) - f(k-e_j)`.
fn step<T: Real>(f: &LatticeSequence<T>, axis: usize, forward: bool) -> LatticeSequence<T> {
    let mut shifted = vec![0i64; f.dim()];
    f.map(|k, v| {
        shifted.copy_from_slice(k);
        if forward {
            shifted[axis] += 1;
            f.get(&shifted) - v
        } else {
            shifted[axis] -= 1;
            v - f.get(&shifted)
        }
    })
}

/// `Delta^alpha f` by iterating single forward differences.
pub fn forward_difference<T: Real>(f: &LatticeSequence<T>, alpha: &MultiIndex) -> Result<Differenced<T>> {
    check_alpha(f, alpha)?;
    let mut out = f.clone();
    for (axis, &a) in alpha.entries().iter().enumerate() {
        for _ in 0..a {
            out = step(&out, axis, true);
        }
    }
    Ok(Differenced {
        sequence: out,
        margin: Margin {
            lower: vec![0; alpha.dim()],
            upper: alpha.entries().to_vec(),
        },
    })
}

/// `bar-Delta^alpha f` by iterating single backward differences.
pub fn backward_difference<T: Real>(f: &LatticeSequence<T>, alpha: &MultiIndex) -> Result<Differenced<T>> {
    check_alpha(f, alpha)?;
    let mut out = f.clone();
    for (axis, &a) in alpha.entries().iter().enumerate() {
        for _ in 0..a {
            out = step(&out, axis, false);
        }
    }
    Ok(Differenced {
        sequence: out,
        margin: Margin {
            lower: alpha.entries().to_vec(),
            upper: vec![0; alpha.dim()],
        },
    })
}

/// `Delta^alpha f(k) = sum_{beta <= alpha} (-1)^{|alpha - beta|} binom(alpha, beta) f(k + beta)`.
pub fn forward_difference_closed_form<T: Real>(
    f: &LatticeSequence<T>,
    alpha: &MultiIndex,
) -> Result<Differenced<T>> {
    check_alpha(f, alpha)?;
    let terms: Vec<(Vec<i64>, T)> = alpha
        .below()
        .into_iter()
        .map(|beta| {
            let sign = if (alpha.order() - beta.order()) % 2 == 0 {
                T::one()
            } else {
                -T::one()
            };
            let coef = sign * T::from_u64(alpha.binomial(&beta)).unwrap();
            (beta.as_offset(), coef)
        })
        .collect();
    let mut shifted = vec![0i64; f.dim()];
    let sequence = f.map(|k, _| {
        terms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (offset, coef)| {
                for (s, (kj, oj)) in shifted.iter_mut().zip(k.iter().zip(offset)) {
                    *s = kj + oj;
                }
                acc + f.get(&shifted) * *coef
            })
    });
    Ok(Differenced {
        sequence,
        margin: Margin {
            lower: vec![0; alpha.dim()],
            upper: alpha.entries().to_vec(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn window(n: usize, half: usize) -> LatticeWindow {
        LatticeWindow::new(n, half).unwrap()
    }

    #[test]
    fn identity_for_zero_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = LatticeSequence::<f64>::random(window(2, 3), 0, &mut rng);
        let d = forward_difference(&f, &MultiIndex::zero(2)).unwrap();
        assert_eq!(d.sequence, f);
        let b = backward_difference(&f, &MultiIndex::zero(2)).unwrap();
        assert_eq!(b.sequence, f);
    }

    #[test]
    fn linear_sequence_has_unit_difference_inside() {
        let w = window(1, 6);
        let f = LatticeSequence::<f64>::from_fn(w.clone(), |k| Complex::new(k[0] as f64, 0.0));
        let alpha = MultiIndex::new(vec![1]);
        let fwd = forward_difference(&f, &alpha).unwrap();
        let bwd = backward_difference(&f, &alpha).unwrap();
        for k in w.points() {
            if fwd.margin.is_valid(&w, &k) {
                assert_eq!(fwd.sequence.get(&k).re, 1.0);
            }
            if bwd.margin.is_valid(&w, &k) {
                assert_eq!(bwd.sequence.get(&k).re, 1.0);
            }
        }
        assert!(!fwd.margin.is_valid(&w, &[6]));
        assert!(!bwd.margin.is_valid(&w, &[-6]));
    }

    #[test]
    fn constants_are_annihilated() {
        let w = window(2, 4);
        let f = LatticeSequence::<f64>::from_fn(w.clone(), |_| Complex::new(3.0, -2.0));
        let alpha = MultiIndex::new(vec![1, 2]);
        let d = backward_difference(&f, &alpha).unwrap();
        for k in w.points() {
            if d.margin.is_valid(&w, &k) {
                assert_eq!(d.sequence.get(&k).norm(), 0.0);
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = LatticeSequence::<f64>::random(window(2, 5), 0, &mut rng);
        for alpha in MultiIndex::up_to(2, 3) {
            let a = forward_difference(&f, &alpha).unwrap().sequence;
            let b = forward_difference_closed_form(&f, &alpha).unwrap().sequence;
            assert!(a.max_abs_diff(&b, |_| true).unwrap() < 1e-13);
        }
    }
}
