use crate::data::LabeledSet;
use crate::engine::{TeacherInput, TrainConfig};
use crate::error::{Error, Result};
use crate::gp::{to_soft, ClusteredGp, Task};
use crate::numerics::{Matrix, Rng};
use crate::student::{train_steps, AdamState, LossSpec, StudentNet};

/// Step-size factor for a sample with teacher uncertainty `sigma`:
/// `exp(-beta * sigma)`, in `(0, 1]` for finite arguments.
pub fn fidelity(sigma: f64, beta: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::NegativeInput("uncertainty"));
    }
    if !(beta >= 0.0) {
        return Err(Error::NegativeInput("beta"));
    }
    if beta == 0.0 {
        return Ok(1.0);
    }
    Ok((-beta * sigma).exp())
}

pub(crate) fn loss_spec(config: &TrainConfig) -> LossSpec {
    LossSpec {
        kind: config.loss,
        l2: config.l2,
    }
}

/// Trains a freshly initialized student on the weak set. `omega`, when
/// given, scales every step by that constant.
pub fn step1_pretrain(
    config: &TrainConfig,
    weak: &LabeledSet,
    init_rng: &mut Rng,
    rng: &mut Rng,
    omega: Option<f64>,
) -> Result<(StudentNet, Vec<f64>)> {
    let mut net = StudentNet::new(&config.architecture, init_rng)?;
    let mut state = AdamState::for_net(&net, config.base_rate);
    let constant = omega.map(|w| vec![w; weak.len()]);
    let trace = train_steps(
        &mut net,
        weak,
        &loss_spec(config),
        &mut state,
        constant.as_deref(),
        config.pretrain_steps,
        config.batch_size,
        rng,
    )?;
    Ok((net, trace))
}

fn teacher_space(net: &StudentNet, inputs: &Matrix, mode: TeacherInput) -> Result<Matrix> {
    match mode {
        TeacherInput::RawInput => Ok(inputs.clone()),
        TeacherInput::StudentRepr => net.represent(inputs),
    }
}

/// Fits the clustered GP teacher on the strong set, in the space chosen by
/// `config.teacher_input`.
pub fn step2_fit_teacher(
    config: &TrainConfig,
    net: &StudentNet,
    strong: &LabeledSet,
    task: Task,
    rng: &mut Rng,
) -> Result<ClusteredGp> {
    if strong.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let features = teacher_space(net, strong.inputs(), config.teacher_input)?;
    ClusteredGp::fit_with_jitter(
        &config.teacher_kernel(task),
        &features,
        strong.labels(),
        config.cluster_count(strong.len()),
        rng,
        config.gp_jitter,
    )
}

/// Relabels every weak and strong input with the teacher. Weak samples come
/// first; nothing is deduplicated.
pub fn make_soft_dataset(
    config: &TrainConfig,
    teacher: &ClusteredGp,
    net: &StudentNet,
    weak: &LabeledSet,
    strong: &LabeledSet,
    task: Task,
) -> Result<LabeledSet> {
    let inputs = weak.inputs().vstack(strong.inputs())?;
    let features = teacher_space(net, &inputs, config.teacher_input)?;
    let n = inputs.rows();
    let mut labels = Vec::with_capacity(n * teacher.output_dim());
    let mut sigmas = Vec::with_capacity(n);
    for row in features.row_iter() {
        let pred = teacher.predict(row)?;
        let variances = vec![pred.variance; pred.mean.len()];
        let soft = to_soft(&pred.mean, &variances, task)?;
        labels.extend(soft.label);
        sigmas.push(soft.sigma);
    }
    let labels = Matrix::from_vec(n, teacher.output_dim(), labels)?;
    LabeledSet::soft(inputs, labels, sigmas)
}

/// Per-sample fidelities of a soft set.
pub fn soft_fidelities(soft: &LabeledSet, beta: f64) -> Result<Vec<f64>> {
    soft.confidences()
        .ok_or(Error::MissingConfidences)?
        .iter()
        .map(|&s| fidelity(s, beta))
        .collect()
}

/// Fine-tunes `net` on the soft set with step sizes modulated by
/// `exp(-beta * sigma)`. The optimizer starts from fresh moments.
pub fn step3_finetune(
    config: &TrainConfig,
    net: &mut StudentNet,
    soft: &LabeledSet,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let fid = soft_fidelities(soft, config.beta)?;
    let mut state = AdamState::for_net(net, config.base_rate);
    train_steps(
        net,
        soft,
        &loss_spec(config),
        &mut state,
        Some(&fid),
        config.finetune_steps,
        config.batch_size,
        rng,
    )
}
