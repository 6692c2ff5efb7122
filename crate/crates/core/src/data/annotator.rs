use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::softmax;
use crate::numerics::{dot, Matrix, Rng};

/// The regression target of the toy problem, `sin(x)`.
pub fn toy_true(x: f64) -> f64 {
    x.sin()
}

/// The toy weak annotator `2·sin(x)/x`, equal to 2 at the origin.
pub fn toy_weak(x: f64) -> f64 {
    2.0 * sinc(x)
}

/// Unnormalized sinc, `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Taylor series; the relative error of the truncation is below 1e-17
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Probability that the first item outranks the second, from nonnegative
/// annotator scores: `s⁺ / (s⁺ + s⁻)`.
pub fn pairwise_preference(score_pos: f64, score_neg: f64) -> Result<f64> {
    if !(score_pos >= 0.0) || !(score_neg >= 0.0) {
        return Err(Error::NegativeInput("preference score"));
    }
    if score_pos == 0.0 && score_neg == 0.0 {
        return Err(Error::BothZero);
    }
    // (b, a) evaluates the mirrored division, so the pair sums to exactly 1
    // only if both sides share one rounding; compute one and complement it
    if score_pos <= score_neg {
        Ok(score_pos / (score_pos + score_neg))
    } else {
        Ok(1.0 - score_neg / (score_pos + score_neg))
    }
}

/// Configuration of a weak annotator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnnotatorSpec {
    /// `amplitude·sin(x)/x` on scalar inputs.
    ToySinc { amplitude: f64 },
    /// `slope·x + intercept` on scalar inputs.
    Affine { slope: f64, intercept: f64 },
    /// Class probabilities from a perturbed version of the true linear
    /// decision rule of Gaussian blobs: inputs are rotated by `rotation`
    /// radians in their first two coordinates before scoring, class 0's score
    /// is shifted by `bias_shift`, and scores are divided by `temperature`
    /// before the softmax. With probability `noise_rate` the resulting
    /// distribution is cyclically shifted by a uniformly drawn class offset.
    LinearHeuristic {
        rotation: f64,
        bias_shift: f64,
        temperature: f64,
        noise_rate: f64,
    },
}

impl AnnotatorSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let ok = match *self {
            AnnotatorSpec::ToySinc { amplitude } => finite(amplitude),
            AnnotatorSpec::Affine { slope, intercept } => finite(slope) && finite(intercept),
            AnnotatorSpec::LinearHeuristic {
                rotation,
                bias_shift,
                temperature,
                noise_rate,
            } => {
                finite(rotation)
                    && finite(bias_shift)
                    && temperature > 0.0
                    && finite(temperature)
                    && (0.0..=1.0).contains(&noise_rate)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ConfigParse(format!("invalid annotator {self:?}")))
        }
    }
}

/// A ready-to-use annotator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Annotator {
    Scalar(AnnotatorSpec),
    Linear {
        /// `K×d` decision weights.
        weights: Matrix,
        biases: Vec<f64>,
        temperature: f64,
        noise_rate: f64,
    },
}

impl Annotator {
    /// Labels one input. Only the noisy linear heuristic consumes `rng`.
    pub fn label(&self, x: &[f64], rng: &mut Rng) -> Vec<f64> {
        match self {
            Annotator::Scalar(spec) => {
                let v = x[0];
                let y = match *spec {
                    AnnotatorSpec::ToySinc { amplitude } => amplitude * sinc(v),
                    AnnotatorSpec::Affine { slope, intercept } => slope * v + intercept,
                    AnnotatorSpec::LinearHeuristic { .. } => unreachable!("built as Linear"),
                };
                vec![y]
            }
            Annotator::Linear {
                weights,
                biases,
                temperature,
                noise_rate,
            } => {
                let scores: Vec<f64> = weights
                    .row_iter()
                    .zip(biases)
                    .map(|(w, b)| (dot(w, x) + b) / temperature)
                    .collect();
                let mut p = softmax(&scores);
                if *noise_rate > 0.0 && rng.uniform() < *noise_rate {
                    let k = p.len();
                    let offset = rng.below(k);
                    p.rotate_right(offset);
                }
                p
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn toy_functions() {
        assert_eq!(toy_true(0.0), 0.0);
        assert_eq!(toy_true(PI / 2.0), 1.0);
        assert!(toy_true(PI).abs() < 1e-15);
        assert_eq!(toy_weak(0.0), 2.0);
        assert!(toy_weak(PI).abs() < 1e-15);
        // 2·1/(π/2) = 4/π
        assert_abs_diff_eq!(toy_weak(PI / 2.0), 1.273_239_544_735_162_7, epsilon = 1e-15);
    }

    #[test]
    fn sinc_is_continuous_at_origin() {
        for eps in [1e-4, 9.99e-5, 5e-5, 1e-8, -3e-5, -1e-4] {
            assert!((toy_weak(eps) - 2.0).abs() < 1e-6);
        }
        // both branches agree at the switch point
        let a = 2.0 * (1e-4f64).sin() / 1e-4;
        assert_abs_diff_eq!(toy_weak(1e-4 - 1e-12), a, epsilon = 1e-15);
    }

    #[test]
    fn preference_examples() {
        assert_eq!(pairwise_preference(2.0, 2.0).unwrap(), 0.5);
        assert_eq!(pairwise_preference(3.0, 1.0).unwrap(), 0.75);
        assert!(matches!(pairwise_preference(0.0, 0.0), Err(Error::BothZero)));
        assert!(pairwise_preference(-1.0, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn preference_is_complementary(a in 0.0f64..1e6, b in 1e-9f64..1e6) {
            let p = pairwise_preference(a, b).unwrap();
            let q = pairwise_preference(b, a).unwrap();
            proptest::prop_assert!((0.0..=1.0).contains(&p));
            proptest::prop_assert_eq!(p + q, 1.0);
        }
    }
}
