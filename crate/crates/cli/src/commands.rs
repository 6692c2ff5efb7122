use std::fs::File;
use std::path::Path;

use fwl_core::engine::{Strategy, TrainConfig};
use fwl_core::experiments::{
    budget_curve, fwl_vs_fwls, run_grid_with, sweep_beta, write_csv_file, write_json_file, BetaSweepSpec,
    BudgetSpec, Curve, GridSpec, SoftFractionSpec,
};
use fwl_core::Result;
use serde::Serialize;

use crate::settings::Settings;

/// Strategies that build a soft set from the pretrained student.
const USES_TEACHER: [Strategy; 4] = [
    Strategy::NnWeakOmegaToStrong,
    Strategy::FwlNoSigma,
    Strategy::Fwl,
    Strategy::FwlSampling,
];

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a, S: Serialize, T: Serialize> {
    command: &'a str,
    config_hash: &'a str,
    spec: &'a S,
    summary: &'a T,
}

fn manifest<S: Serialize, T: Serialize>(
    out: &Path,
    command: &str,
    config_hash: &str,
    spec: &S,
    summary: &T,
) -> Result<()> {
    write_json_file(
        &out.join(format!("{command}.json")),
        &Manifest {
            command,
            config_hash,
            spec,
            summary,
        },
    )
}

pub fn gen_data(s: &Settings) -> Result<Vec<String>> {
    let out = s.out_dir();
    prepare(&out)?;
    let preset = s.preset();
    let mut written = Vec::new();
    for seed in s.seeds() {
        let p = preset.problem(seed)?;
        for (tier, set) in [("weak", &p.weak), ("strong", &p.strong), ("test", &p.test)] {
            let name = format!("{preset}-seed{seed}-{tier}.csv");
            set.write_csv(File::create(out.join(&name))?)?;
            written.push(name);
        }
    }
    Ok(written)
}

fn grid_spec(s: &Settings, default: &[Strategy]) -> Result<(GridSpec, TrainConfig)> {
    let preset = s.preset();
    let config = s.train_config(preset)?;
    let spec = GridSpec {
        preset,
        config: config.clone(),
        strategies: s.strategies(default)?,
        seeds: s.seeds(),
    };
    Ok((spec, config))
}

/// One JSON report per (strategy, seed) plus `aggregate.csv`; with
/// `checkpoints`, also the trained students, teachers and soft sets.
pub fn run(s: &Settings, checkpoints: bool) -> Result<Vec<String>> {
    let out = s.out_dir();
    prepare(&out)?;
    let (spec, _) = grid_spec(s, &[Strategy::Fwl])?;
    let mut written = Vec::new();
    let output = run_grid_with(&spec, |report, net, session| {
        let seed = report.config.seed;
        let name = format!("report-{}-seed{seed}.json", report.strategy);
        write_json_file(&out.join(&name), report)?;
        written.push(name);
        if checkpoints {
            if let Some(net) = net {
                let name = format!("student-{}-seed{seed}.json", report.strategy);
                net.save(&out.join(&name))?;
                written.push(name);
            }
            if USES_TEACHER.contains(&report.strategy) {
                let teacher = format!("teacher-seed{seed}.json");
                if !written.contains(&teacher) {
                    session.teacher()?.save(&out.join(&teacher))?;
                    let soft = format!("soft-seed{seed}.csv");
                    session.soft_set()?.write_csv(File::create(out.join(&soft))?)?;
                    written.push(teacher);
                    written.push(soft);
                }
            }
        }
        Ok(())
    })?;
    write_csv_file(&out.join("aggregate.csv"), &output.summary)?;
    written.push("aggregate.csv".into());
    Ok(written)
}

pub fn grid(s: &Settings) -> Result<Vec<String>> {
    let out = s.out_dir();
    prepare(&out)?;
    let (spec, _) = grid_spec(s, &Strategy::ALL)?;
    let output = run_grid_with(&spec, |_, _, _| Ok(()))?;
    write_csv_file(&out.join("grid-runs.csv"), &output.rows)?;
    write_csv_file(&out.join("grid-summary.csv"), &output.summary)?;
    manifest(&out, "grid", &output.config_hash, &spec, &output.summary)?;
    Ok(vec!["grid-runs.csv".into(), "grid-summary.csv".into(), "grid.json".into()])
}

pub fn sweep_beta_cmd(s: &Settings) -> Result<Vec<String>> {
    let out = s.out_dir();
    prepare(&out)?;
    let presets = s
        .sweep_presets()
        .into_iter()
        .map(|p| Ok((p, s.train_config(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let spec = BetaSweepSpec {
        presets,
        betas: s.betas(),
        seeds: s.seeds(),
    };
    let output = sweep_beta(&spec)?;
    write_csv_file(&out.join("beta-sweep-runs.csv"), &output.rows)?;
    write_csv_file(&out.join("beta-sweep.csv"), &output.summary)?;
    manifest(&out, "sweep-beta", &output.config_hash, &spec, &output.summary)?;
    Ok(vec!["beta-sweep-runs.csv".into(), "beta-sweep.csv".into(), "sweep-beta.json".into()])
}

pub fn budget_curve_cmd(s: &Settings) -> Result<Vec<String>> {
    let out = s.out_dir();
    prepare(&out)?;
    let preset = s.preset();
    let spec = BudgetSpec {
        preset,
        config: s.train_config(preset)?,
        sizes: s.budget_sizes(),
        weak_fractions: s.weak_fractions(),
        strong_fractions: s.strong_fractions(),
        strategies: s.strategies(&[Strategy::Fwl, Strategy::NnWeakToStrong])?,
        seeds: s.seeds(),
    };
    let output = budget_curve(&spec)?;
    write_csv_file(&out.join("budget-runs.csv"), &output.rows)?;
    write_csv_file(&out.join("budget-weak-fraction.csv"), &output.curve(Curve::WeakFraction))?;
    write_csv_file(&out.join("budget-strong-fraction.csv"), &output.curve(Curve::StrongFraction))?;
    manifest(&out, "budget-curve", &output.config_hash, &spec, &output.summary)?;
    Ok(vec![
        "budget-runs.csv".into(),
        "budget-weak-fraction.csv".into(),
        "budget-strong-fraction.csv".into(),
        "budget-curve.json".into(),
    ])
}

pub fn fwl_vs_fwls_cmd(s: &Settings) -> Result<Vec<String>> {
    let out = s.out_dir();
    prepare(&out)?;
    let preset = s.preset();
    let spec = SoftFractionSpec {
        preset,
        config: s.train_config(preset)?,
        fractions: s.soft_fractions(),
        seeds: s.seeds(),
    };
    let output = fwl_vs_fwls(&spec)?;
    write_csv_file(&out.join("fwl-vs-fwls-runs.csv"), &output.rows)?;
    write_csv_file(&out.join("fwl-vs-fwls.csv"), &output.summary)?;
    manifest(&out, "fwl-vs-fwls", &output.config_hash, &spec, &output.summary)?;
    Ok(vec!["fwl-vs-fwls-runs.csv".into(), "fwl-vs-fwls.csv".into(), "fwl-vs-fwls.json".into()])
}
