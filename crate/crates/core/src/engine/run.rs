use std::borrow::Cow;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{LabeledSet, Problem};
use crate::engine::steps::{
    loss_spec, make_soft_dataset, soft_fidelities, step1_pretrain, step2_fit_teacher,
    step3_finetune,
};
use crate::engine::{Strategy, TeacherInput, TrainConfig};
use crate::error::{Error, Result};
use crate::gp::{ClusteredGp, Task};
use crate::numerics::{Matrix, Rng};
use crate::stats::{argmax, macro_f1, mean, rmse};
use crate::student::{
    train_step, train_steps, train_weighted_steps, AdamState, StudentNet, WeightedSampler,
};

// Independent streams split from the run seed. Streams are keyed by stage,
// not by strategy, so every strategy sees the same initialization and the
// same weak-pretraining trajectory.
const INIT_STREAM: u64 = 1;
const PRETRAIN_STREAM: u64 = 2;
const TEACHER_STREAM: u64 = 3;
const FINETUNE_STREAM: u64 = 4;
const EVAL_STREAM: u64 = 5;
const STRONG_MIX_STREAM: u64 = 6;
const SOFT_SUBSET_STREAM: u64 = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub stage: String,
    /// Mean training loss per epoch.
    pub losses: Vec<f64>,
}

/// Outcome of one strategy on one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub strategy: Strategy,
    pub config: TrainConfig,
    pub n_weak: usize,
    pub n_strong: usize,
    pub n_test: usize,
    /// `rmse` for regression, `macro_f1` for classification.
    pub metric_name: String,
    pub metric: f64,
    /// Mean step-size factor over the soft set, for strategies that build one.
    pub mean_fidelity: Option<f64>,
    /// Constant pretraining factor actually used by `NN_WomegaToS`.
    pub omega: Option<f64>,
    pub traces: Vec<StageTrace>,
    /// Wall-clock seconds per stage; left out of serialized reports so that
    /// reruns are byte-identical.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

pub fn metric_name(task: Task) -> &'static str {
    match task {
        Task::Regression => "rmse",
        Task::Classification => "macro_f1",
    }
}

/// RMSE over all label dimensions for regression; macro-F1 of the argmax
/// against the argmax of the test labels for classification.
pub fn evaluate_predictions(pred: &Matrix, test: &LabeledSet, task: Task) -> Result<f64> {
    if pred.shape() != test.labels().shape() {
        return Err(Error::dim(test.labels().cols(), pred.cols(), "prediction columns"));
    }
    Ok(match task {
        Task::Regression => rmse(pred.as_slice(), test.labels().as_slice()),
        Task::Classification => {
            let p: Vec<usize> = pred.row_iter().map(argmax).collect();
            let t: Vec<usize> = test.labels().row_iter().map(argmax).collect();
            macro_f1(&p, &t, pred.cols())
        }
    })
}

pub fn evaluate(net: &StudentNet, test: &LabeledSet, task: Task) -> Result<f64> {
    evaluate_predictions(&net.predict(test.inputs())?, test, task)
}

struct Pretrained {
    net: StudentNet,
    trace: Vec<f64>,
    seconds: f64,
}

struct SoftStage {
    /// Student the soft set was built from (pretrained or freshly
    /// initialized).
    net: StudentNet,
    teacher: ClusteredGp,
    soft: LabeledSet,
    seconds: f64,
}

/// Runs strategies on one problem and seed, caching the stages they share:
/// weak pretraining, and the teacher plus soft set in each input space.
pub struct Session<'a> {
    config: TrainConfig,
    problem: &'a Problem,
    root: Rng,
    pretrained: Option<Pretrained>,
    soft_pretrained: Option<SoftStage>,
    soft_fresh: Option<SoftStage>,
}

impl<'a> Session<'a> {
    /// `config.strategy` and `config.beta` are ignored; they are chosen per
    /// call to [`Session::run`].
    pub fn new(config: TrainConfig, problem: &'a Problem) -> Result<Self> {
        config.validate()?;
        let arch = &config.architecture;
        if arch.input_dim != problem.weak.input_dim() {
            return Err(Error::BadNetwork(format!(
                "network input dimension {} but data has {}",
                arch.input_dim,
                problem.weak.input_dim()
            )));
        }
        if arch.output_dim != problem.weak.label_dim() {
            return Err(Error::BadNetwork(format!(
                "network output dimension {} but labels have {}",
                arch.output_dim,
                problem.weak.label_dim()
            )));
        }
        if problem.weak.is_empty() || problem.strong.is_empty() || problem.test.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let root = Rng::new(config.seed);
        Ok(Self {
            config,
            problem,
            root,
            pretrained: None,
            soft_pretrained: None,
            soft_fresh: None,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    fn stream(&self, key: u64) -> Rng {
        self.root.split(key)
    }

    fn fresh_net(&self) -> Result<StudentNet> {
        StudentNet::new(&self.config.architecture, &mut self.stream(INIT_STREAM))
    }

    fn pretrained(&mut self) -> Result<&Pretrained> {
        if self.pretrained.is_none() {
            let start = Instant::now();
            let (net, trace) = step1_pretrain(
                &self.config,
                &self.problem.weak,
                &mut self.stream(INIT_STREAM),
                &mut self.stream(PRETRAIN_STREAM),
                None,
            )?;
            self.pretrained = Some(Pretrained {
                net,
                trace,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        Ok(self.pretrained.as_ref().expect("just filled"))
    }

    fn build_soft(&self, net: StudentNet, teacher_input: TeacherInput) -> Result<SoftStage> {
        let start = Instant::now();
        let cfg = TrainConfig {
            teacher_input,
            ..self.config.clone()
        };
        let p = self.problem;
        let teacher = step2_fit_teacher(&cfg, &net, &p.strong, p.task, &mut self.stream(TEACHER_STREAM))?;
        let soft = make_soft_dataset(&cfg, &teacher, &net, &p.weak, &p.strong, p.task)?;
        Ok(SoftStage {
            net,
            teacher,
            soft,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    fn soft_pretrained(&mut self) -> Result<&SoftStage> {
        if self.soft_pretrained.is_none() {
            let net = self.pretrained()?.net.clone();
            let stage = self.build_soft(net, self.config.teacher_input)?;
            self.soft_pretrained = Some(stage);
        }
        Ok(self.soft_pretrained.as_ref().expect("just filled"))
    }

    fn soft_fresh(&mut self) -> Result<&SoftStage> {
        if self.soft_fresh.is_none() {
            let stage = self.build_soft(self.fresh_net()?, TeacherInput::RawInput)?;
            self.soft_fresh = Some(stage);
        }
        Ok(self.soft_fresh.as_ref().expect("just filled"))
    }

    /// The soft set built on the pretrained student's teacher.
    pub fn soft_set(&mut self) -> Result<&LabeledSet> {
        Ok(&self.soft_pretrained()?.soft)
    }

    /// The teacher fit on the pretrained student's representation (or on raw
    /// inputs, per `teacher_input`).
    pub fn teacher(&mut self) -> Result<&ClusteredGp> {
        Ok(&self.soft_pretrained()?.teacher)
    }

    /// The pretrained student (the `NN_W` model).
    pub fn pretrained_net(&mut self) -> Result<&StudentNet> {
        Ok(&self.pretrained()?.net)
    }

    pub fn run(&mut self, strategy: Strategy, beta: f64) -> Result<RunReport> {
        self.run_with_soft_fraction(strategy, beta, 1.0)
    }

    /// As [`Session::run`], but soft-set strategies fine-tune on a random
    /// `fraction` of the soft set (original order kept). Fraction 1 is
    /// exactly [`Session::run`]; other strategies ignore it.
    pub fn run_with_soft_fraction(
        &mut self,
        strategy: Strategy,
        beta: f64,
        fraction: f64,
    ) -> Result<RunReport> {
        Ok(self.run_detailed(strategy, beta, fraction)?.0)
    }

    /// As [`Session::run_with_soft_fraction`], also returning the trained
    /// student (`None` for `WA`).
    pub fn run_detailed(
        &mut self,
        strategy: Strategy,
        beta: f64,
        fraction: f64,
    ) -> Result<(RunReport, Option<StudentNet>)> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::ConfigParse(format!("soft fraction {fraction} outside (0, 1]")));
        }
        let config = TrainConfig {
            strategy,
            beta,
            ..self.config.clone()
        };
        config.validate()?;
        let p = self.problem;
        let task = p.task;
        let mut report = RunReport {
            strategy,
            config: config.clone(),
            n_weak: p.weak.len(),
            n_strong: p.strong.len(),
            n_test: p.test.len(),
            metric_name: metric_name(task).to_string(),
            metric: f64::NAN,
            mean_fidelity: None,
            omega: None,
            traces: Vec::new(),
            timings: Vec::new(),
        };

        let net = match strategy {
            Strategy::WeakAnnotator => {
                let mut rng = self.stream(EVAL_STREAM);
                let labels: Vec<f64> = p
                    .test
                    .inputs()
                    .row_iter()
                    .flat_map(|x| p.annotator.label(x, &mut rng))
                    .collect();
                let pred = Matrix::from_vec(p.test.len(), p.test.label_dim(), labels)?;
                report.metric = evaluate_predictions(&pred, &p.test, task)?;
                return Ok((report, None));
            }
            Strategy::NnWeak => {
                let pre = self.pretrained()?;
                trace(&mut report, "pretrain", pre.trace.clone(), pre.seconds);
                pre.net.clone()
            }
            Strategy::NnStrong => {
                let start = Instant::now();
                let mut net = self.fresh_net()?;
                let mut state = AdamState::for_net(&net, config.base_rate);
                let losses = train_steps(
                    &mut net,
                    &p.strong,
                    &loss_spec(&config),
                    &mut state,
                    None,
                    config.pretrain_steps,
                    config.batch_size,
                    &mut self.stream(PRETRAIN_STREAM),
                )?;
                trace(&mut report, "strong", losses, start.elapsed().as_secs_f64());
                net
            }
            Strategy::NnStrongPlusWeak => {
                let start = Instant::now();
                let mut net = self.fresh_net()?;
                let losses = train_mixed(&config, &mut net, p, &self.stream(PRETRAIN_STREAM), &self.stream(STRONG_MIX_STREAM))?;
                trace(&mut report, "mixed", losses, start.elapsed().as_secs_f64());
                net
            }
            Strategy::NnWeakToStrong => {
                let pre = self.pretrained()?;
                trace(&mut report, "pretrain", pre.trace.clone(), pre.seconds);
                let mut net = pre.net.clone();
                let start = Instant::now();
                let losses = finetune_strong(&config, &mut net, &p.strong, &mut self.stream(FINETUNE_STREAM))?;
                trace(&mut report, "finetune", losses, start.elapsed().as_secs_f64());
                net
            }
            Strategy::NnWeakOmegaToStrong => {
                let omega = match config.omega {
                    Some(w) => w,
                    None => mean(&soft_fidelities(self.soft_set()?, beta)?),
                };
                report.omega = Some(omega);
                let start = Instant::now();
                let (mut net, losses) = if omega > 0.0 {
                    step1_pretrain(
                        &config,
                        &p.weak,
                        &mut self.stream(INIT_STREAM),
                        &mut self.stream(PRETRAIN_STREAM),
                        Some(omega),
                    )?
                } else {
                    // a zero factor freezes pretraining entirely
                    (self.fresh_net()?, Vec::new())
                };
                trace(&mut report, "pretrain", losses, start.elapsed().as_secs_f64());
                let start = Instant::now();
                let losses = finetune_strong(&config, &mut net, &p.strong, &mut self.stream(FINETUNE_STREAM))?;
                trace(&mut report, "finetune", losses, start.elapsed().as_secs_f64());
                net
            }
            Strategy::FwlUnsupRep | Strategy::FwlNoSigma | Strategy::Fwl | Strategy::FwlSampling => {
                let beta = if strategy == Strategy::FwlNoSigma { 0.0 } else { beta };
                let mut rng = self.stream(FINETUNE_STREAM);
                let pool = p.weak.len() + p.strong.len();
                let keep = if fraction < 1.0 {
                    let k = ((fraction * pool as f64).ceil() as usize).clamp(1, pool);
                    let mut idx = self.stream(SOFT_SUBSET_STREAM).sample_without_replacement(pool, k);
                    idx.sort_unstable();
                    Some(idx)
                } else {
                    None
                };
                let stage_config = TrainConfig {
                    beta,
                    ..config.clone()
                };
                if strategy != Strategy::FwlUnsupRep {
                    let pre = self.pretrained()?;
                    trace(&mut report, "pretrain", pre.trace.clone(), pre.seconds);
                }
                let stage = if strategy == Strategy::FwlUnsupRep {
                    self.soft_fresh()?
                } else {
                    self.soft_pretrained()?
                };
                report.timings.push(("teacher".to_string(), stage.seconds));
                let soft = match &keep {
                    Some(idx) => Cow::Owned(stage.soft.subset(idx)),
                    None => Cow::Borrowed(&stage.soft),
                };
                let fid = soft_fidelities(&soft, beta)?;
                report.mean_fidelity = Some(mean(&fid));
                let mut net = stage.net.clone();
                let start = Instant::now();
                let losses = if strategy == Strategy::FwlSampling {
                    let sampler = WeightedSampler::new(&fid)?;
                    let mut state = AdamState::for_net(&net, config.base_rate);
                    train_weighted_steps(
                        &mut net,
                        &soft,
                        &loss_spec(&config),
                        &mut state,
                        &sampler,
                        config.finetune_steps,
                        config.batch_size,
                        &mut rng,
                    )?
                } else {
                    step3_finetune(&stage_config, &mut net, &soft, &mut rng)?
                };
                trace(&mut report, "finetune", losses, start.elapsed().as_secs_f64());
                net
            }
        };
        report.metric = evaluate(&net, &p.test, task)?;
        Ok((report, Some(net)))
    }
}

fn finetune_strong(config: &TrainConfig, net: &mut StudentNet, strong: &LabeledSet, rng: &mut Rng) -> Result<Vec<f64>> {
    let mut state = AdamState::for_net(net, config.base_rate);
    train_steps(
        net,
        strong,
        &loss_spec(config),
        &mut state,
        None,
        config.finetune_steps,
        config.batch_size,
        rng,
    )
}

/// Alternates a weak minibatch (shuffled, without replacement) with a strong
/// minibatch of the same size drawn with replacement, for
/// `config.pretrain_steps` updates in total. Returns per-epoch mean loss over
/// both kinds of batch.
fn train_mixed(
    config: &TrainConfig,
    net: &mut StudentNet,
    p: &Problem,
    weak_rng: &Rng,
    strong_rng: &Rng,
) -> Result<Vec<f64>> {
    let (mut weak_rng, mut strong_rng) = (weak_rng.clone(), strong_rng.clone());
    let spec = loss_spec(config);
    let mut state = AdamState::for_net(net, config.base_rate);
    let n = p.weak.len();
    let bs = config.batch_size.clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut strong_batch = vec![0usize; bs];
    let mut trace = Vec::new();
    let mut remaining = config.pretrain_steps;
    while remaining > 0 {
        weak_rng.shuffle(&mut order);
        let (mut total, mut count) = (0.0, 0usize);
        for batch in order.chunks(bs) {
            if remaining == 0 {
                break;
            }
            total += train_step(net, &mut state, &p.weak, batch, None, &spec)?;
            count += 1;
            remaining -= 1;
            if remaining == 0 {
                break;
            }
            strong_batch
                .iter_mut()
                .for_each(|b| *b = strong_rng.below(p.strong.len()));
            total += train_step(net, &mut state, &p.strong, &strong_batch, None, &spec)?;
            count += 1;
            remaining -= 1;
        }
        trace.push(total / count as f64);
    }
    Ok(trace)
}

fn trace(report: &mut RunReport, stage: &str, losses: Vec<f64>, seconds: f64) {
    report.traces.push(StageTrace {
        stage: stage.to_string(),
        losses,
    });
    report.timings.push((stage.to_string(), seconds));
}

/// Runs `config.strategy` at `config.beta`.
pub fn run_strategy(config: &TrainConfig, problem: &Problem) -> Result<RunReport> {
    Session::new(config.clone(), problem)?.run(config.strategy, config.beta)
}
