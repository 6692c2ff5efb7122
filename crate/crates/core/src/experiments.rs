//! Seed sweeps over strategies, β and data budgets, with CSV emission.
//!
//! Every row carries a hash of the experiment spec that produced it, and all
//! outputs are pure functions of that spec, so reruns are byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{Preset, RunReport, Session, Strategy, TrainConfig};
use crate::error::{Error, Result};
use crate::stats::{mean, sample_sd};
use crate::student::StudentNet;

pub const DEFAULT_BETAS: [f64; 5] = [0.0, 0.1, 1.0, 2.0, 5.0];

/// First 16 hex digits of the SHA-256 of `value`'s JSON encoding.
pub fn config_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
}

/// Writes `rows` as RFC-4180 CSV with a header row.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_csv(File::create(path)?, rows)
}

/// Pretty JSON with a trailing newline.
pub fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::ConfigParse("seed list is empty".into()));
    }
    Ok(())
}

fn check_fractions(fractions: &[f64], what: &str) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::ConfigParse(format!("{what} list is empty")));
    }
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::ConfigParse(format!("{what} {f} outside (0, 1]")));
    }
    Ok(())
}

/// Mean and sample standard deviation of a group of per-seed metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        Self {
            n: values.len(),
            mean: mean(values),
            sd: sample_sd(values),
        }
    }
}

/// Groups `(key, value)` pairs by key, keeping first-appearance order.
fn group<K: PartialEq + Clone>(items: impl IntoIterator<Item = (K, f64)>) -> Vec<(K, Vec<f64>)> {
    let mut out: Vec<(K, Vec<f64>)> = Vec::new();
    for (k, v) in items {
        match out.iter_mut().find(|(key, _)| *key == k) {
            Some((_, vs)) => vs.push(v),
            None => out.push((k, vec![v])),
        }
    }
    out
}

// ---------------------------------------------------------------- grid / run

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub preset: Preset,
    pub config: TrainConfig,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub config_hash: String,
    pub preset: Preset,
    pub strategy: Strategy,
    pub beta: f64,
    pub seed: u64,
    pub metric_name: String,
    pub metric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub config_hash: String,
    pub preset: Preset,
    pub strategy: Strategy,
    pub beta: f64,
    pub metric_name: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug)]
pub struct GridOutput {
    pub config_hash: String,
    pub reports: Vec<RunReport>,
    pub rows: Vec<SeedRow>,
    pub summary: Vec<StrategySummary>,
}

/// Runs every strategy on every seed. Strategies on the same seed share one
/// [`Session`], so weak pretraining and the teacher are computed once.
pub fn run_grid(spec: &GridSpec) -> Result<GridOutput> {
    run_grid_with(spec, |_, _, _| Ok(()))
}

/// As [`run_grid`], calling `on_run` after every run with its report, the
/// trained student (if any) and the seed's session, e.g. to save
/// checkpoints.
pub fn run_grid_with<F>(spec: &GridSpec, mut on_run: F) -> Result<GridOutput>
where
    F: FnMut(&RunReport, Option<&StudentNet>, &mut Session) -> Result<()>,
{
    check_seeds(&spec.seeds)?;
    if spec.strategies.is_empty() {
        return Err(Error::ConfigParse("strategy list is empty".into()));
    }
    let hash = config_hash(spec)?;
    let mut reports = Vec::new();
    for &seed in &spec.seeds {
        let problem = spec.preset.problem(seed)?;
        let config = TrainConfig {
            seed,
            ..spec.config.clone()
        };
        let mut session = Session::new(config, &problem)?;
        for &strategy in &spec.strategies {
            let (report, net) = session.run_detailed(strategy, spec.config.beta, 1.0)?;
            on_run(&report, net.as_ref(), &mut session)?;
            reports.push(report);
        }
    }
    // seed-major execution, strategy-major rows
    let mut rows: Vec<SeedRow> = Vec::with_capacity(reports.len());
    for &strategy in &spec.strategies {
        for r in reports.iter().filter(|r| r.strategy == strategy) {
            rows.push(SeedRow {
                config_hash: hash.clone(),
                preset: spec.preset,
                strategy,
                beta: r.config.beta,
                seed: r.config.seed,
                metric_name: r.metric_name.clone(),
                metric: r.metric,
            });
        }
    }
    let summary = group(rows.iter().map(|r| ((r.strategy, r.metric_name.clone()), r.metric)))
        .into_iter()
        .map(|((strategy, metric_name), vs)| {
            let s = MeanSd::of(&vs);
            StrategySummary {
                config_hash: hash.clone(),
                preset: spec.preset,
                strategy,
                beta: spec.config.beta,
                metric_name,
                n: s.n,
                mean: s.mean,
                sd: s.sd,
            }
        })
        .collect();
    Ok(GridOutput {
        config_hash: hash,
        reports,
        rows,
        summary,
    })
}

// ---------------------------------------------------------------- β sweep

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSweepSpec {
    /// Each preset with the training settings used for it.
    pub presets: Vec<(Preset, TrainConfig)>,
    pub betas: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl BetaSweepSpec {
    /// Every preset with its default training settings.
    pub fn with_defaults(presets: &[Preset], betas: Vec<f64>, seeds: Vec<u64>) -> Self {
        Self {
            presets: presets.iter().map(|&p| (p, p.train_config())).collect(),
            betas,
            seeds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub config_hash: String,
    pub preset: Preset,
    pub beta: f64,
    pub seed: u64,
    pub metric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaSummary {
    pub config_hash: String,
    pub preset: Preset,
    pub beta: f64,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug)]
pub struct BetaSweepOutput {
    pub config_hash: String,
    pub rows: Vec<BetaRow>,
    pub summary: Vec<BetaSummary>,
}

impl BetaSweepOutput {
    /// The β with the lowest mean metric for `preset` (ties go to the
    /// smaller β), or the highest when `higher_is_better`.
    pub fn best_beta(&self, preset: Preset, higher_is_better: bool) -> Option<f64> {
        let mut best: Option<&BetaSummary> = None;
        for s in self.summary.iter().filter(|s| s.preset == preset) {
            let better = match best {
                None => true,
                Some(b) if higher_is_better => s.mean > b.mean,
                Some(b) => s.mean < b.mean,
            };
            if better {
                best = Some(s);
            }
        }
        best.map(|s| s.beta)
    }
}

/// FWL fine-tuning at each β, per preset and seed. The pretrained student
/// and teacher are shared across β.
pub fn sweep_beta(spec: &BetaSweepSpec) -> Result<BetaSweepOutput> {
    check_seeds(&spec.seeds)?;
    if spec.betas.is_empty() {
        return Err(Error::ConfigParse("beta list is empty".into()));
    }
    if spec.presets.is_empty() {
        return Err(Error::ConfigParse("preset list is empty".into()));
    }
    let hash = config_hash(spec)?;
    let mut rows = Vec::new();
    for (preset, base) in &spec.presets {
        let preset = *preset;
        let mut per_seed = Vec::new();
        for &seed in &spec.seeds {
            let problem = preset.problem(seed)?;
            let mut session = Session::new(TrainConfig { seed, ..base.clone() }, &problem)?;
            for &beta in &spec.betas {
                per_seed.push((beta, seed, session.run(Strategy::Fwl, beta)?.metric));
            }
        }
        for &beta in &spec.betas {
            for &(b, seed, metric) in &per_seed {
                if b.to_bits() == beta.to_bits() {
                    rows.push(BetaRow {
                        config_hash: hash.clone(),
                        preset,
                        beta,
                        seed,
                        metric,
                    });
                }
            }
        }
    }
    let summary = group(rows.iter().map(|r| ((r.preset, r.beta.to_bits()), r.metric)))
        .into_iter()
        .map(|((preset, beta), vs)| {
            let s = MeanSd::of(&vs);
            BetaSummary {
                config_hash: hash.clone(),
                preset,
                beta: f64::from_bits(beta),
                n: s.n,
                mean: s.mean,
                sd: s.sd,
            }
        })
        .collect();
    Ok(BetaSweepOutput {
        config_hash: hash,
        rows,
        summary,
    })
}

// ---------------------------------------------------------------- data budget

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    /// Weak set varies, strong set fixed.
    WeakFraction,
    /// Strong set varies, weak set fixed.
    StrongFraction,
}

/// Dataset sizes at fraction 1 for both budget curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetSizes {
    pub weak_curve_weak: usize,
    pub weak_curve_strong: usize,
    pub strong_curve_weak: usize,
    pub strong_curve_strong: usize,
}

impl Default for BudgetSizes {
    fn default() -> Self {
        Self {
            weak_curve_weak: 100,
            weak_curve_strong: 50,
            strong_curve_weak: 100,
            strong_curve_strong: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetSpec {
    pub preset: Preset,
    pub config: TrainConfig,
    pub sizes: BudgetSizes,
    pub weak_fractions: Vec<f64>,
    pub strong_fractions: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub config_hash: String,
    pub curve: Curve,
    pub fraction: f64,
    pub n_weak: usize,
    pub n_strong: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub metric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetSummary {
    pub config_hash: String,
    pub curve: Curve,
    pub fraction: f64,
    pub n_weak: usize,
    pub n_strong: usize,
    pub strategy: Strategy,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Clone, Debug)]
pub struct BudgetOutput {
    pub config_hash: String,
    pub rows: Vec<BudgetRow>,
    pub summary: Vec<BudgetSummary>,
}

impl BudgetOutput {
    pub fn curve(&self, curve: Curve) -> Vec<BudgetSummary> {
        self.summary.iter().filter(|s| s.curve == curve).cloned().collect()
    }

    pub fn curve_rows(&self, curve: Curve) -> Vec<BudgetRow> {
        self.rows.iter().filter(|s| s.curve == curve).cloned().collect()
    }
}

fn scaled(total: usize, fraction: f64) -> usize {
    ((fraction * total as f64).round() as usize).clamp(1, total.max(1))
}

/// Metric against the fraction of weak data (strong fixed) and against the
/// fraction of strong data (weak fixed). Reduced sets are prefixes of the
/// full draw for the seed.
pub fn budget_curve(spec: &BudgetSpec) -> Result<BudgetOutput> {
    check_seeds(&spec.seeds)?;
    check_fractions(&spec.weak_fractions, "weak fraction")?;
    check_fractions(&spec.strong_fractions, "strong fraction")?;
    if spec.strategies.is_empty() {
        return Err(Error::ConfigParse("strategy list is empty".into()));
    }
    let hash = config_hash(spec)?;
    let sz = spec.sizes;
    let curves = [
        (Curve::WeakFraction, &spec.weak_fractions, (sz.weak_curve_weak, sz.weak_curve_strong)),
        (Curve::StrongFraction, &spec.strong_fractions, (sz.strong_curve_weak, sz.strong_curve_strong)),
    ];
    let mut rows = Vec::new();
    for (curve, fractions, (full_weak, full_strong)) in curves {
        let mut cells = Vec::new();
        for &seed in &spec.seeds {
            let full = spec.preset.problem_sized(seed, Some((full_weak, full_strong)))?;
            for &fraction in fractions.iter() {
                let (n_weak, n_strong) = match curve {
                    Curve::WeakFraction => (scaled(full_weak, fraction), full_strong),
                    Curve::StrongFraction => (full_weak, scaled(full_strong, fraction)),
                };
                let problem = full.truncated(n_weak, n_strong);
                let config = TrainConfig {
                    seed,
                    ..spec.config.clone()
                };
                let mut session = Session::new(config, &problem)?;
                for &strategy in &spec.strategies {
                    let metric = session.run(strategy, spec.config.beta)?.metric;
                    cells.push(BudgetRow {
                        config_hash: hash.clone(),
                        curve,
                        fraction,
                        n_weak,
                        n_strong,
                        strategy,
                        seed,
                        metric,
                    });
                }
            }
        }
        // fraction-major, then strategy, then seed
        for &fraction in fractions.iter() {
            for &strategy in &spec.strategies {
                rows.extend(
                    cells
                        .iter()
                        .filter(|c| c.fraction.to_bits() == fraction.to_bits() && c.strategy == strategy)
                        .cloned(),
                );
            }
        }
    }
    let summary = group(rows.iter().map(|r| {
        (
            (r.curve, r.fraction.to_bits(), r.n_weak, r.n_strong, r.strategy),
            r.metric,
        )
    }))
    .into_iter()
    .map(|((curve, fraction, n_weak, n_strong, strategy), vs)| {
        let s = MeanSd::of(&vs);
        BudgetSummary {
            config_hash: hash.clone(),
            curve,
            fraction: f64::from_bits(fraction),
            n_weak,
            n_strong,
            strategy,
            n: s.n,
            mean: s.mean,
            sd: s.sd,
        }
    })
    .collect();
    Ok(BudgetOutput {
        config_hash: hash,
        rows,
        summary,
    })
}

// ---------------------------------------------------------------- FWL vs FWL_s

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftFractionSpec {
    pub preset: Preset,
    pub config: TrainConfig,
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftFractionRow {
    pub config_hash: String,
    pub fraction: f64,
    pub seed: u64,
    pub fwl: f64,
    pub fwl_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftFractionSummary {
    pub config_hash: String,
    pub fraction: f64,
    pub n: usize,
    pub fwl_mean: f64,
    pub fwl_sd: f64,
    pub fwl_s_mean: f64,
    pub fwl_s_sd: f64,
}

#[derive(Clone, Debug)]
pub struct SoftFractionOutput {
    pub config_hash: String,
    pub rows: Vec<SoftFractionRow>,
    pub summary: Vec<SoftFractionSummary>,
}

/// FWL and FWL_s fine-tuned on growing random fractions of the soft set.
pub fn fwl_vs_fwls(spec: &SoftFractionSpec) -> Result<SoftFractionOutput> {
    check_seeds(&spec.seeds)?;
    check_fractions(&spec.fractions, "soft fraction")?;
    let hash = config_hash(spec)?;
    let mut cells = BTreeMap::new();
    for &seed in &spec.seeds {
        let problem = spec.preset.problem(seed)?;
        let config = TrainConfig {
            seed,
            ..spec.config.clone()
        };
        let mut session = Session::new(config, &problem)?;
        for (i, &fraction) in spec.fractions.iter().enumerate() {
            let beta = spec.config.beta;
            let fwl = session.run_with_soft_fraction(Strategy::Fwl, beta, fraction)?.metric;
            let fwl_s = session
                .run_with_soft_fraction(Strategy::FwlSampling, beta, fraction)?
                .metric;
            cells.insert((i, seed), (fraction, fwl, fwl_s));
        }
    }
    // BTreeMap order: fraction index, then seed in ascending order; restore
    // the requested seed order instead
    let mut rows = Vec::new();
    for i in 0..spec.fractions.len() {
        for &seed in &spec.seeds {
            let (fraction, fwl, fwl_s) = cells[&(i, seed)];
            rows.push(SoftFractionRow {
                config_hash: hash.clone(),
                fraction,
                seed,
                fwl,
                fwl_s,
            });
        }
    }
    let summary = (0..spec.fractions.len())
        .map(|i| {
            let f = spec.fractions[i];
            let group: Vec<&SoftFractionRow> = rows
                .iter()
                .skip(i * spec.seeds.len())
                .take(spec.seeds.len())
                .collect();
            let a = MeanSd::of(&group.iter().map(|r| r.fwl).collect::<Vec<_>>());
            let b = MeanSd::of(&group.iter().map(|r| r.fwl_s).collect::<Vec<_>>());
            SoftFractionSummary {
                config_hash: hash.clone(),
                fraction: f,
                n: a.n,
                fwl_mean: a.mean,
                fwl_sd: a.sd,
                fwl_s_mean: b.mean,
                fwl_s_sd: b.sd,
            }
        })
        .collect();
    Ok(SoftFractionOutput {
        config_hash: hash,
        rows,
        summary,
    })
}
