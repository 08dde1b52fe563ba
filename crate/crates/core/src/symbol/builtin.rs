use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::lattice::norm_sq;
use crate::scalar::{cis_turns, Real};

/// Built-in symbol families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum Builtin {
    /// Bessel potential `(1 + |k|^2)^{s/2}`.
    Bessel { s: f64 },
    /// `constant + amplitude * (1 + |k|^2)^{power/2}`.
    Multiplier {
        constant: f64,
        amplitude: f64,
        power: f64,
    },
    /// `step(k_axis) e^{2 pi i w x_axis} + 1 - step(k_axis)` with a 1-based axis.
    Jump { axis: usize, winding: i64 },
    /// `(1 + |k|^2)^{m/2} (2 + amplitude e^{2 pi i x_1} / (1 + |k|^2))`.
    PerturbedBessel { m: f64, amplitude: f64 },
}

impl Builtin {
    pub fn natural_order(&self) -> f64 {
        match self {
            Builtin::Bessel { s } => *s,
            Builtin::Multiplier {
                amplitude, power, ..
            } => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    power.max(0.0)
                }
            }
            Builtin::Jump { .. } => 0.0,
            Builtin::PerturbedBessel { m, .. } => *m,
        }
    }

    pub fn is_x_independent(&self) -> bool {
        match self {
            Builtin::Bessel { .. } | Builtin::Multiplier { .. } => true,
            Builtin::Jump { winding, .. } => *winding == 0,
            Builtin::PerturbedBessel { amplitude, .. } => *amplitude == 0.0,
        }
    }

    /// Largest axis referenced (1-based), 0 if none.
    pub fn max_axis(&self) -> usize {
        match self {
            Builtin::Jump { axis, .. } => *axis,
            Builtin::PerturbedBessel { .. } => 1,
            _ => 0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Bessel { .. } => "bessel",
            Builtin::Multiplier { .. } => "multiplier",
            Builtin::Jump { .. } => "jump",
            Builtin::PerturbedBessel { .. } => "perturbed_bessel",
        }
    }

    pub fn eval<T: Real>(&self, k: &[i64], x: &[T]) -> Complex<T> {
        let zero = T::zero();
        let one_plus = T::one() + T::from_i64(norm_sq(k)).unwrap();
        match self {
            Builtin::Bessel { s } => Complex::new(bessel_weight(one_plus, *s), zero),
            Builtin::Multiplier {
                constant,
                amplitude,
                power,
            } => Complex::new(
                T::lit(*constant) + T::lit(*amplitude) * bessel_weight(one_plus, *power),
                zero,
            ),
            Builtin::Jump { axis, winding } => {
                if k[axis - 1] >= 0 {
                    cis_turns(T::from_i64(*winding).unwrap() * x[axis - 1])
                } else {
                    Complex::new(T::one(), zero)
                }
            }
            Builtin::PerturbedBessel { m, amplitude } => {
                let inner = Complex::new(T::lit(2.0), zero)
                    + cis_turns(x[0]) * (T::lit(*amplitude) / one_plus);
                inner * bessel_weight(one_plus, *m)
            }
        }
    }
}

/// `(1 + |k|^2)^{s/2}` given `1 + |k|^2`.
pub(crate) fn bessel_weight<T: Real>(one_plus: T, s: f64) -> T {
    let half = s / 2.0;
    if half == half.round() && half.abs() <= 64.0 {
        one_plus.powi(half as i32)
    } else {
        one_plus.powf(T::lit(half))
    }
}
