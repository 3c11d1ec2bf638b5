//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hallnet_core::domain::{Provenance, Sample};
use hallnet_core::experiment::{
    self, select_best_repetition, select_plateau, summarize_repetitions, RepetitionRow, DEFAULT_PLATEAU_TOL,
};
use hallnet_core::mlp::{MlpModel, MlpTrainConfig};
use hallnet_core::rbf::{self, CenterMethod, RbfTrainConfig};
use hallnet_core::simulator::{self, Controls, HallParams, TreatmentDesign};
use hallnet_core::{metrics, Dataset, Execution, Interval, NormalizedSet, Normalizer, SplitRatios, TrainedModel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed > limit {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------- 1

fn oracle(a: &[f64], p: &[f64]) -> (f64, f64, f64, f64) {
    let n = a.len() as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut sa = 0.0;
    for i in 0..a.len() {
        let r = a[i] - p[i];
        sq += r * r;
        abs += r.abs();
        sa += a[i] * a[i];
    }
    let mse = sq / n;
    (mse, mse.sqrt(), abs / n, (1.0 - sq / sa).sqrt())
}

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let len = rng.random_range(1..=100);
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(5.0..40.0)).collect();
        let p: Vec<f64> = a.iter().map(|x| x + rng.random_range(-2.0..2.0)).collect();
        let (mse, rmse, mae, rp) = oracle(&a, &p);
        let got = [
            metrics::mse(&a, &p).map_err(|e| e.to_string())?,
            metrics::rmse(&a, &p).map_err(|e| e.to_string())?,
            metrics::mae(&a, &p).map_err(|e| e.to_string())?,
            metrics::r_paper(&a, &p).map_err(|e| e.to_string())?,
        ];
        for (g, w) in got.iter().zip([mse, rmse, mae, rp]) {
            if !rel_close(*g, w, 1e-12) {
                return Err(format!("case {case}: {g} vs oracle {w}"));
            }
            worst = worst.max((g - w).abs() / w.abs());
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("200 pairs, worst relative error {worst:.1e}"))
}

// ---------------------------------------------------------------- 2

fn table_logic() -> Outcome {
    let printed = [
        (0.55064, 0.42202, 0.84431),
        (0.53321, 0.41001, 0.82541),
        (0.52248, 0.41056, 0.84522),
    ];
    let rows: Vec<RepetitionRow> = printed
        .iter()
        .enumerate()
        .map(|(i, &(v, t, s))| RepetitionRow { repetition: i + 1, validation: v, training: t, testing: s })
        .collect();
    let tests: Vec<f64> = rows.iter().map(|r| r.testing).collect();
    let best = select_best_repetition(&tests).map_err(|e| e.to_string())?;
    if best != 2 {
        return Err(format!("best repetition {best}, expected 2"));
    }
    let s = summarize_repetitions(&rows).map_err(|e| e.to_string())?;
    // test column: the stated half-unit of the 5th decimal
    for (got, want) in [(s.minimum.testing, 0.82541), (s.maximum.testing, 0.84522), (s.average.testing, 0.83831)] {
        if (got - want).abs() > 5e-6 {
            return Err(format!("testing summary {got} vs printed {want}"));
        }
    }
    // other columns: printed inputs are themselves rounded, so the mean
    // carries their half-unit as well as its own
    let expected = [
        (s.minimum.validation, 0.52248),
        (s.minimum.training, 0.41001),
        (s.maximum.validation, 0.55064),
        (s.maximum.training, 0.42202),
        (s.average.validation, 0.53544),
        (s.average.training, 0.41419),
    ];
    let mut worst = 0.0f64;
    for (got, want) in expected {
        let d = (got - want).abs();
        if d > 1e-5 {
            return Err(format!("summary {got} vs printed {want}"));
        }
        worst = worst.max(d);
    }
    let grid = [4, 8, 12, 16, 20, 24];
    let rmse = [0.2897, 0.1925, 0.1589, 0.1205, 0.0787, 0.0787];
    let k = select_plateau(&grid, &rmse, DEFAULT_PLATEAU_TOL).map_err(|e| e.to_string())?;
    if k != 20 {
        return Err(format!("plateau K = {k}, expected 20"));
    }
    Ok(format!("best repetition 2, plateau K = 20, summary max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 3

fn flat_loss(hidden: usize, flat: &[f64], batch: &NormalizedSet) -> f64 {
    let w = hidden * 5;
    let mut total = 0.0;
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let mut y = flat[w + 2 * hidden];
        for h in 0..hidden {
            let mut z = flat[w + h];
            for i in 0..5 {
                z += flat[h * 5 + i] * x[i];
            }
            y += flat[w + hidden + h] * z.tanh();
        }
        total += (t - y) * (t - y);
    }
    total / batch.len() as f64
}

fn gradient_check() -> Outcome {
    const STEP: f64 = 1e-5;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let hidden = [1, 4, 12][case % 3];
        let flat: Vec<f64> = (0..hidden * 7 + 1).map(|_| rng.random_range(-1.5..1.5)).collect();
        let model = MlpModel::from_flat(hidden, &flat).map_err(|e| e.to_string())?;
        let n = rng.random_range(1..=16);
        let inputs: Vec<[f64; 5]> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let targets = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let batch = NormalizedSet::new(inputs, targets).map_err(|e| e.to_string())?;
        let analytic = model.gradient(&batch).map_err(|e| e.to_string())?.to_flat();
        for (j, a) in analytic.iter().enumerate() {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[j] += STEP;
            minus[j] -= STEP;
            let fd = (flat_loss(hidden, &plus, &batch) - flat_loss(hidden, &minus, &batch)) / (2.0 * STEP);
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-4);
            if rel > 1e-5 {
                return Err(format!("case {case} (H = {hidden}) coordinate {j}: {a} vs {fd}"));
            }
            worst = worst.max(rel);
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("20 cases, worst relative error {worst:.1e}"))
}

// ---------------------------------------------------------------- 4

fn rbf_interpolation() -> Outcome {
    let start = Instant::now();
    let design = TreatmentDesign { repetitions: 1, ..TreatmentDesign::default() };
    let all = simulator::generate(&design, &HallParams::default(), 4, Execution::Sequential)
        .map_err(|e| e.to_string())?;
    let mut samples: Vec<Sample> = all.samples().to_vec();
    samples.shuffle(&mut ChaCha8Rng::seed_from_u64(4));
    samples.truncate(30);
    let data = Dataset::new(samples, Provenance::Synthetic { seed: 4 }).map_err(|e| e.to_string())?;
    let normalizer = Normalizer::fit(&data, Interval::default()).map_err(|e| e.to_string())?;
    let set = normalizer.apply_dataset(&data);
    let config = RbfTrainConfig {
        neurons: 30,
        center_method: CenterMethod::RandomSubset,
        ridge: 0.0,
        seed: 4,
        ..RbfTrainConfig::default()
    };
    let model = rbf::train(&config, &set).map_err(|e| e.to_string())?;
    let report = metrics::evaluate(&model, &data, &normalizer).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    if report.rmse >= 1e-6 {
        return Err(format!("training RMSE {:.3e} degC", report.rmse));
    }
    Ok(format!("training RMSE {:.2e} degC", report.rmse))
}

// ---------------------------------------------------------------- 5

fn sweep_trend() -> Outcome {
    let start = Instant::now();
    let data = simulator::generate(&TreatmentDesign::default(), &HallParams::default(), 5, Execution::Sequential)
        .map_err(|e| e.to_string())?;
    if data.len() != 729 {
        return Err(format!("{} samples, expected 729", data.len()));
    }
    let prepared = experiment::prepare(&data, SplitRatios::default(), 5, Interval::default())
        .map_err(|e| e.to_string())?;
    let grid = [4, 8, 12, 16, 20, 24];
    let base = RbfTrainConfig { seed: 5, ..RbfTrainConfig::default() };
    let sweep = experiment::run_rbf_sweep(&base, &prepared, &grid, DEFAULT_PLATEAU_TOL, Execution::Sequential)
        .map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(60))?;
    let first = sweep.rows[0].rmse;
    let last = sweep.rows[grid.len() - 1].rmse;
    if last > first {
        return Err(format!("RMSE at K = 24 ({last:.4}) exceeds K = 4 ({first:.4})"));
    }
    if !grid.contains(&sweep.selected_neurons) {
        return Err(format!("selected K = {} not in grid", sweep.selected_neurons));
    }
    Ok(format!(
        "RMSE {first:.4} -> {last:.4} degC, selected K = {}, {:.2?}",
        sweep.selected_neurons,
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- 6

fn stable_params(rng: &mut ChaCha8Rng) -> HallParams {
    loop {
        let p = HallParams {
            thermal_capacity: rng.random_range(500.0..20_000.0),
            k_water: rng.random_range(0.0..5.0),
            k_fresh: rng.random_range(0.0..5.0),
            compost_heat: rng.random_range(0.0..6.0),
            noise_std: 0.0,
            dt: rng.random_range(1.0..300.0),
            initial_temp: rng.random_range(5.0..30.0),
        };
        if p.validate().is_ok() {
            return p;
        }
    }
}

fn random_controls(rng: &mut ChaCha8Rng) -> Controls {
    Controls {
        ambient_temp: rng.random_range(-15.0..15.0),
        water_temp: rng.random_range(25.0..60.0),
        fresh_damper: rng.random_range(0.0..=1.0),
        circ_damper: rng.random_range(0.0..=1.0),
        water_tap: rng.random_range(0.0..=1.0),
    }
}

fn traj(c: &Controls, p: &HallParams, steps: usize) -> Result<Vec<f64>, String> {
    simulator::trajectory(c, p, steps).map_err(|e| e.to_string())
}

fn simulator_physics() -> Outcome {
    const DRAWS: usize = 100;
    const LEVELS: [f64; 3] = [1.0 / 3.0, 2.0 / 3.0, 1.0];
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    for draw in 0..DRAWS {
        let p = HallParams { compost_heat: 0.0, ..stable_params(&mut rng) };
        let c = random_controls(&mut rng);
        let lo = p.initial_temp.min(c.water_temp).min(c.ambient_temp);
        let hi = p.initial_temp.max(c.water_temp).max(c.ambient_temp);
        if traj(&c, &p, 300)?.iter().any(|t| !(lo..=hi).contains(t)) {
            return Err(format!("convex hull violated on draw {draw}"));
        }
    }

    let mut checked = 0;
    while checked < DRAWS {
        let p = stable_params(&mut rng);
        let base = random_controls(&mut rng);
        let runs = LEVELS
            .iter()
            .map(|&tap| traj(&Controls { water_tap: tap, ..base }, &p, 240))
            .collect::<Result<Vec<_>, _>>()?;
        if runs.iter().flatten().any(|&t| t >= base.water_temp) {
            continue;
        }
        let settled: Vec<f64> = runs.iter().map(|r| r[r.len() - 1]).collect();
        if settled.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("tap monotonicity violated: {settled:?}"));
        }
        checked += 1;
    }

    checked = 0;
    while checked < DRAWS {
        let p = stable_params(&mut rng);
        let base = random_controls(&mut rng);
        let runs = LEVELS
            .iter()
            .map(|&fresh| traj(&Controls { fresh_damper: fresh, ..base }, &p, 240))
            .collect::<Result<Vec<_>, _>>()?;
        if runs.iter().flatten().any(|&t| t <= base.ambient_temp) {
            continue;
        }
        let settled: Vec<f64> = runs.iter().map(|r| r[r.len() - 1]).collect();
        if settled.windows(2).any(|w| w[1] > w[0]) {
            return Err(format!("fresh-air cooling violated: {settled:?}"));
        }
        checked += 1;
    }

    for draw in 0..DRAWS {
        let p = HallParams { compost_heat: 0.0, ..stable_params(&mut rng) };
        let c = Controls { water_tap: 0.0, fresh_damper: 0.0, ..random_controls(&mut rng) };
        if traj(&c, &p, 200)?.iter().any(|&t| t != p.initial_temp) {
            return Err(format!("zero-flux state drifted on draw {draw}"));
        }
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("4 invariants x {DRAWS} draws, {:.2?}", start.elapsed()))
}

// ---------------------------------------------------------------- 7

const OUTPUTS: [&str; 11] = [
    "data.csv",
    "sweep.json",
    "sweep.txt",
    "sweep.rbf.json",
    "sweep.mlp.json",
    "cmp.json",
    "cmp.txt",
    "cmp.deviation-mlp.csv",
    "cmp.deviation-rbf.csv",
    "predict.csv",
    "stdout.txt",
];

fn hallnet(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hallnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("hallnet {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn pipeline(parallel: bool) -> Result<Vec<Vec<u8>>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = format!(
        r#"{{"schema_version": 1, "seed": 2024, "parallel": {parallel},
            "mlp": {{"max_epochs": 150, "patience": 20}},
            "sweep": {{"grid": [4, 8, 16], "mlp_repetitions": 2}}}}"#
    );
    std::fs::write(dir.path().join("config.json"), config).map_err(|e| e.to_string())?;
    let mut stdout = Vec::new();
    stdout.extend(hallnet(dir.path(), &["simulate", "--config", "config.json", "--out", "data.csv"])?);
    stdout.extend(hallnet(dir.path(), &["sweep", "--config", "config.json", "--data", "data.csv", "--out", "sweep.json"])?);
    stdout.extend(hallnet(
        dir.path(),
        &[
            "compare", "--config", "config.json", "--data", "data.csv", "--model", "sweep.mlp.json", "--model",
            "sweep.rbf.json", "--out", "cmp.json",
        ],
    )?);
    stdout.extend(hallnet(
        dir.path(),
        &["predict", "--model", "sweep.rbf.json", "--data", "data.csv", "--out", "predict.csv"],
    )?);
    std::fs::write(dir.path().join("stdout.txt"), stdout).map_err(|e| e.to_string())?;
    OUTPUTS
        .iter()
        .map(|name| std::fs::read(dir.path().join(name)).map_err(|e| format!("{name}: {e}")))
        .collect()
}

fn end_to_end_determinism() -> Outcome {
    let start = Instant::now();
    let a = pipeline(true)?;
    let b = pipeline(true)?;
    let c = pipeline(false)?;
    for (i, name) in OUTPUTS.iter().enumerate() {
        if a[i] != b[i] {
            return Err(format!("{name} differs between two parallel runs"));
        }
        if a[i] != c[i] {
            return Err(format!("{name} differs between parallel and sequential runs"));
        }
    }
    let bytes: usize = a.iter().map(Vec::len).sum();
    Ok(format!("{} artifacts ({bytes} bytes) identical across 3 runs, {:.2?}", OUTPUTS.len(), start.elapsed()))
}

// ---------------------------------------------------------------- 8

fn persistence() -> Outcome {
    let data = simulator::generate(&TreatmentDesign::default(), &HallParams::default(), 8, Execution::Sequential)
        .map_err(|e| e.to_string())?;
    let normalizer = Normalizer::fit(&data, Interval::default()).map_err(|e| e.to_string())?;
    let set = normalizer.apply_dataset(&data);
    let mlp_cfg = MlpTrainConfig { hidden: 6, max_epochs: 50, seed: 8, ..MlpTrainConfig::default() };
    let (mlp, _) = hallnet_core::mlp::train(&mlp_cfg, &set, &set).map_err(|e| e.to_string())?;
    let rbf_cfg = RbfTrainConfig { neurons: 12, seed: 8, ..RbfTrainConfig::default() };
    let rbf_model = rbf::train(&rbf_cfg, &set).map_err(|e| e.to_string())?;
    let models = [
        TrainedModel::mlp(mlp, normalizer.clone(), mlp_cfg),
        TrainedModel::rbf(rbf_model, normalizer, rbf_cfg),
    ];

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let inputs: Vec<[f64; 5]> = (0..100)
        .map(|_| {
            [
                rng.random_range(-15.0..15.0),
                rng.random_range(25.0..60.0),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
                rng.random_range(0.0..=1.0),
            ]
        })
        .collect();
    for model in &models {
        let path = dir.path().join(format!("{}.json", model.kind()));
        model.save(&path).map_err(|e| e.to_string())?;
        let loaded = TrainedModel::load(&path).map_err(|e| e.to_string())?;
        for x in &inputs {
            let a = model.predict_celsius(x).map_err(|e| e.to_string())?;
            let b = loaded.predict_celsius(x).map_err(|e| e.to_string())?;
            if a.to_bits() != b.to_bits() {
                return Err(format!("{} prediction changed: {a} vs {b}", model.kind()));
            }
        }
    }
    Ok("MLP and RBF, 100 inputs each, bit-identical".into())
}

// ---------------------------------------------------------------- 9

fn metric_inequalities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..500 {
        let len = rng.random_range(1..=100);
        let a: Vec<f64> = (0..len).map(|_| rng.random_range(-50.0..50.0)).collect();
        let p: Vec<f64> = a.iter().map(|x| x + rng.random_range(-10.0..10.0)).collect();
        let mse = metrics::mse(&a, &p).map_err(|e| e.to_string())?;
        let rmse = metrics::rmse(&a, &p).map_err(|e| e.to_string())?;
        let mae = metrics::mae(&a, &p).map_err(|e| e.to_string())?;
        if mae > rmse {
            return Err(format!("case {case}: mae {mae} > rmse {rmse}"));
        }
        if !rel_close(rmse * rmse, mse, 1e-12) {
            return Err(format!("case {case}: rmse^2 {} vs mse {mse}", rmse * rmse));
        }
    }
    let a: Vec<f64> = (0..50).map(|_| rng.random_range(5.0..40.0)).collect();
    let r = metrics::r_paper(&a, &a).map_err(|e| e.to_string())?;
    if (r - 1.0).abs() > 1e-12 {
        return Err(format!("r_paper(A, A) = {r}"));
    }
    let b: Vec<f64> = a.iter().map(|x| 2.0 * x + 3.0).collect();
    let r = metrics::r_pearson(&a, &b).map_err(|e| e.to_string())?;
    if (r - 1.0).abs() > 1e-12 {
        return Err(format!("r_pearson(A, 2A + 3) = {r}"));
    }
    Ok("500 residual vectors, identities exact to 1e-12".into())
}

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("metric oracle equivalence", metric_oracle),
        ("table selection logic", table_logic),
        ("MLP gradient check", gradient_check),
        ("RBF interpolation", rbf_interpolation),
        ("RBF sweep trend on synthetic data", sweep_trend),
        ("simulator physics", simulator_physics),
        ("end-to-end determinism", end_to_end_determinism),
        ("persistence round-trip", persistence),
        ("metric inequalities", metric_inequalities),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
