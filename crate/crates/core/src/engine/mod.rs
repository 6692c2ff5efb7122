//! The three-step pipeline, the fidelity rule, and the grid of baseline
//! strategies it is compared against.

mod config;
mod preset;
mod run;
mod steps;

pub use config::{Strategy, TeacherInput, TrainConfig};
pub use preset::Preset;
pub use run::{evaluate, evaluate_predictions, metric_name, run_strategy, RunReport, Session, StageTrace};
pub use steps::{
    fidelity, make_soft_dataset, soft_fidelities, step1_pretrain, step2_fit_teacher, step3_finetune,
};
