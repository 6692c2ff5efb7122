use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{gen_classification_task, toy_problem, AnnotatorSpec, ClassTaskConfig, Problem, ToyConfig};
use crate::engine::TrainConfig;
use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Data streams live under their own key so that they never coincide with
/// the training streams split from the same seed.
const DATA_STREAM: u64 = 100;

/// Named problem settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Weak `2·sinc(x)`, 100 weak and 10 strong samples of `sin(x)`.
    #[serde(rename = "toy")]
    Toy,
    /// As `toy` with only 5 strong samples.
    #[serde(rename = "toy-star")]
    ToyStar,
    /// As `toy` with the uninformative weak annotator `x + 1`.
    #[serde(rename = "toy-doublestar")]
    ToyDoubleStar,
    /// Three Gaussian blobs labeled by a noisy, biased linear heuristic.
    #[serde(rename = "synth-class")]
    SynthClass,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Toy, Preset::ToyStar, Preset::ToyDoubleStar, Preset::SynthClass];
    pub const TOYS: [Preset; 3] = [Preset::Toy, Preset::ToyStar, Preset::ToyDoubleStar];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Toy => "toy",
            Preset::ToyStar => "toy-star",
            Preset::ToyDoubleStar => "toy-doublestar",
            Preset::SynthClass => "synth-class",
        }
    }

    pub fn toy_config(self) -> Option<ToyConfig> {
        let base = ToyConfig::default();
        match self {
            Preset::Toy => Some(base),
            Preset::ToyStar => Some(ToyConfig { n_strong: 5, ..base }),
            Preset::ToyDoubleStar => Some(ToyConfig {
                weak_fn: AnnotatorSpec::Affine {
                    slope: 1.0,
                    intercept: 1.0,
                },
                ..base
            }),
            Preset::SynthClass => None,
        }
    }

    pub fn class_config(self) -> Option<ClassTaskConfig> {
        (self == Preset::SynthClass).then(ClassTaskConfig::default)
    }

    /// Default training settings for this preset.
    pub fn train_config(self) -> TrainConfig {
        match self {
            Preset::SynthClass => {
                let c = ClassTaskConfig::default();
                TrainConfig::classification(c.classes, c.input_dim)
            }
            _ => TrainConfig {
                // one GP over all strong points
                clusters: Some(1),
                ..TrainConfig::default()
            },
        }
    }

    /// Draws this preset's problem from `seed`.
    pub fn problem(self, seed: u64) -> Result<Problem> {
        self.problem_sized(seed, None)
    }

    /// Draws the problem with `(n_weak, n_strong)` overriding the preset's
    /// sizes. Samples are drawn sequentially, so a smaller set is a prefix of
    /// a larger one drawn from the same seed.
    pub fn problem_sized(self, seed: u64, sizes: Option<(usize, usize)>) -> Result<Problem> {
        let mut rng = Rng::new(seed).split(DATA_STREAM);
        match (self.toy_config(), self.class_config()) {
            (Some(mut toy), _) => {
                if let Some((w, s)) = sizes {
                    (toy.n_weak, toy.n_strong) = (w, s);
                }
                toy_problem(&mut rng, &toy)
            }
            (_, Some(mut class)) => {
                if let Some((w, s)) = sizes {
                    (class.n_weak, class.n_strong) = (w, s);
                }
                gen_classification_task(&mut rng, &class)
            }
            _ => unreachable!("every preset has a data config"),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::ConfigParse(format!("unknown preset `{s}`")))
    }
}
