use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hallnet_core::domain::{read_columns, FEATURE_NAMES, INPUT_COUNT};
use hallnet_core::experiment::{self, Prepared};
use hallnet_core::{metrics, mlp, rbf, report, simulator, Dataset, ModelKind, TrainedModel};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub type CmdResult = Result<String, CliError>;

/// `<dir>/<stem><suffix>` next to `out`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}{suffix}"))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn same_file(a: &Path, b: &Path) -> bool {
    if a == b {
        return true;
    }
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

/// Inputs are never overwritten.
fn guard_outputs(outputs: &[&Path], inputs: &[&Path]) -> Result<(), CliError> {
    for o in outputs {
        if let Some(i) = inputs.iter().find(|i| same_file(o, i)) {
            return Err(CliError::validation(format!(
                "output {} would overwrite input {}",
                o.display(),
                i.display()
            )));
        }
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn prepare(config: &RunConfig, data: &Dataset) -> Result<Prepared, CliError> {
    Ok(experiment::prepare(data, config.split, config.split_seed(), config.target_range)?)
}

pub fn simulate(config: &RunConfig, out: &Path, config_path: &Path) -> CmdResult {
    guard_outputs(&[out], &[config_path])?;
    let seed = config.simulate_seed();
    let sim = &config.simulator;
    let data = simulator::generate(&sim.design, &sim.params, seed, config.execution())?;
    data.write_csv(out)?;
    Ok(format!("simulated {} samples (seed {seed}) -> {}\n", data.len(), out.display()))
}

pub fn train(config: &RunConfig, kind: ModelKind, data_path: &Path, out: &Path, config_path: &Path) -> CmdResult {
    guard_outputs(&[out], &[config_path, data_path])?;
    let data = Dataset::read_csv(data_path)?;
    let p = prepare(config, &data)?;
    let (model, eval) = match kind {
        ModelKind::Mlp => {
            let cfg = config.mlp_config();
            let (m, _) = mlp::train(&cfg, &p.train, &p.validation)?;
            let eval = metrics::evaluate(&m, &p.split.test, &p.normalizer)?;
            (TrainedModel::mlp(m, p.normalizer.clone(), cfg), eval)
        }
        ModelKind::Rbf => {
            let cfg = config.rbf_config();
            if cfg.neurons > p.train.len() {
                return Err(CliError::validation(format!(
                    "rbf.neurons = {} exceeds the {} training samples",
                    cfg.neurons,
                    p.train.len()
                )));
            }
            let m = rbf::train(&cfg, &p.train)?;
            let eval = metrics::evaluate(&m, &p.split.test, &p.normalizer)?;
            (TrainedModel::rbf(m, p.normalizer.clone(), cfg), eval)
        }
    };
    model.save(out)?;
    to_json(&eval)
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    schema_version: u32,
    seed: u64,
    rbf_sweep: RbfSection<'a>,
    mlp_repetitions: Option<MlpSection<'a>>,
}

#[derive(Serialize)]
struct RbfSection<'a> {
    grid: &'a [usize],
    plateau_tol: f64,
    rows: &'a [experiment::SweepRow],
    selected_neurons: usize,
    model: String,
}

#[derive(Serialize)]
struct MlpSection<'a> {
    hidden: usize,
    rows: &'a [experiment::RepetitionRow],
    summary: experiment::RepetitionSummary,
    best_repetition: usize,
    model: String,
}

pub fn sweep(config: &RunConfig, data_path: &Path, out: &Path, config_path: &Path) -> CmdResult {
    let text_path = sibling(out, ".txt");
    let rbf_path = sibling(out, ".rbf.json");
    let mlp_path = sibling(out, ".mlp.json");
    guard_outputs(&[out, &text_path, &rbf_path, &mlp_path], &[config_path, data_path])?;

    let data = Dataset::read_csv(data_path)?;
    let p = prepare(config, &data)?;
    let exec = config.execution();
    let s = &config.sweep;

    let sweep = experiment::run_rbf_sweep(&config.rbf_config(), &p, &s.grid, s.plateau_tol, exec)?;
    let mut text = report::sweep_text(&sweep.rows, sweep.selected_neurons);
    let rbf_model = TrainedModel::rbf(sweep.best_model.clone(), p.normalizer.clone(), sweep.best_config);

    let reps = if s.mlp_repetitions > 0 {
        let r = experiment::run_mlp_repetitions(&config.mlp_config(), &p, s.mlp_repetitions, exec)?;
        let summary = experiment::summarize_repetitions(&r.rows)?;
        text.push('\n');
        text.push_str(&report::repetitions_text(config.mlp.hidden, &r.rows, &summary, r.best_index));
        Some((r, summary))
    } else {
        None
    };

    let doc = SweepDocument {
        schema_version: 1,
        seed: config.seed,
        rbf_sweep: RbfSection {
            grid: &s.grid,
            plateau_tol: s.plateau_tol,
            rows: &sweep.rows,
            selected_neurons: sweep.selected_neurons,
            model: file_name(&rbf_path),
        },
        mlp_repetitions: reps.as_ref().map(|(r, summary)| MlpSection {
            hidden: config.mlp.hidden,
            rows: &r.rows,
            summary: *summary,
            best_repetition: r.best_index,
            model: file_name(&mlp_path),
        }),
    };

    rbf_model.save(&rbf_path)?;
    if let Some((r, _)) = &reps {
        TrainedModel::mlp(r.best_model.clone(), p.normalizer.clone(), r.best_config).save(&mlp_path)?;
    }
    write(out, &to_json(&doc)?)?;
    write(&text_path, &text)?;
    Ok(text)
}

pub fn compare(
    config: &RunConfig,
    data_path: &Path,
    models: &[PathBuf],
    out: &Path,
    config_path: &Path,
) -> CmdResult {
    let [first, second] = models else {
        return Err(CliError::validation(format!(
            "compare needs exactly two --model paths, got {}",
            models.len()
        )));
    };
    let text_path = sibling(out, ".txt");
    let a = TrainedModel::load(first)?;
    let b = TrainedModel::load(second)?;
    let (mlp_model, rbf_model) = match (a.kind(), b.kind()) {
        (ModelKind::Mlp, ModelKind::Rbf) => (a, b),
        (ModelKind::Rbf, ModelKind::Mlp) => (b, a),
        (x, y) => {
            return Err(CliError::validation(format!("compare needs one MLP and one RBF model, got {x} and {y}")))
        }
    };
    let dev_mlp = sibling(out, ".deviation-mlp.csv");
    let dev_rbf = sibling(out, ".deviation-rbf.csv");
    guard_outputs(
        &[out, &text_path, &dev_mlp, &dev_rbf],
        &[config_path, data_path, first.as_path(), second.as_path()],
    )?;

    let data = Dataset::read_csv(data_path)?;
    let p = prepare(config, &data)?;
    let expected = p.normalizer.fingerprint();
    for m in [&mlp_model, &rbf_model] {
        if m.normalizer().fingerprint() != expected {
            return Err(CliError::mismatch(format!(
                "{} model was not fitted on this configuration's training partition",
                m.kind()
            )));
        }
    }

    let report = experiment::compare(&mlp_model, &rbf_model, &p.split.test)?;
    let text = report::comparison_text(&report);
    for (m, path) in [(&mlp_model, &dev_mlp), (&rbf_model, &dev_rbf)] {
        let series = experiment::deviation_series(m.network(), &p.split.test, m.normalizer())?;
        write(path, &series.to_csv_string())?;
    }
    write(out, &to_json(&report)?)?;
    write(&text_path, &text)?;
    Ok(text)
}

/// `index,prediction` for each data row. A `hall_temp` column is ignored.
pub fn predict(model_path: &Path, data_path: &Path, out: Option<&Path>) -> CmdResult {
    if let Some(o) = out {
        guard_outputs(&[o], &[model_path, data_path])?;
    }
    let model = TrainedModel::load(model_path)?;
    let file = std::fs::File::open(data_path)
        .map_err(|e| CliError::io(format!("{}: {e}", data_path.display())))?;
    let rows = read_columns(std::io::BufReader::new(file), &FEATURE_NAMES[..INPUT_COUNT], &["hall_temp"])?;
    let mut csv = String::from("index,prediction\n");
    for (i, r) in rows.iter().enumerate() {
        let inputs: [f64; INPUT_COUNT] = std::array::from_fn(|j| r[j]);
        let y = model.predict_celsius(&inputs).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("row {}: {}", i + 1, err.message);
            err
        })?;
        let _ = writeln!(csv, "{i},{y}");
    }
    match out {
        Some(o) => {
            write(o, &csv)?;
            Ok(format!("wrote {} predictions -> {}\n", rows.len(), o.display()))
        }
        None => Ok(csv),
    }
}
