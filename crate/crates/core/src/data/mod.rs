//! Datasets, weak annotators and synthetic problem generators.

mod annotator;
mod generate;
mod set;

pub use annotator::{pairwise_preference, sinc, toy_true, toy_weak, Annotator, AnnotatorSpec};
pub use generate::{
    build_class_annotator, class_centers, gen_classification_task, gen_toy_data, toy_problem,
    toy_test_grid, ClassTaskConfig, Problem, ToyConfig,
};
pub use set::{LabeledSet, Tier};
