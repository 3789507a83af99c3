//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one line per criterion. Exits non-zero if any evaluated criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use dsaee_core::ensemble::DEFAULT_DELTA_GRID;
use dsaee_core::eval::{
    auroc, evaluate_feature_sets, sensitivity, ClassifierKind, EvalProtocol, FeatureSet,
};
use dsaee_core::io::{build_fsds_cds, fit_scaling, DatasetSplitSpec, RunConfig, ScalingMode};
use dsaee_core::pipeline::{chi2_feature_sets, load_dataset, run_selection, SelectionRun};
use dsaee_core::sampling::build_component_split;
use dsaee_core::synthetic::{planted_dataset, PlantedSpec};
use dsaee_core::{
    run_ensemble, select_at_thresholds, Activation, DsaeConfig, DsaeModel, EnsembleConfig, LabeledDataset,
    TrainingConfig,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    NotEvaluated,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self {
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

// ---------------------------------------------------------------------------
// 1. Gradient correctness

const FD_STEP: f64 = 1e-5;
const FD_TOLERANCE: f64 = 1e-5;
/// Denominator floor for entries whose true value is ~0.
const FD_FLOOR: f64 = 1e-6;
/// Random draws closer than this to a ReLU or L1 kink are redrawn.
const KINK_MARGIN: f64 = 1e-3;

fn random_layers(rng: &mut ChaCha8Rng, count: usize, pinned: Option<Activation>) -> Vec<(usize, Activation)> {
    (0..count)
        .map(|_| {
            let width = rng.random_range(1..=4);
            let act = Activation::ALL[rng.random_range(0..Activation::ALL.len())];
            (width, pinned.unwrap_or(act))
        })
        .collect()
}

/// Every third architecture uses a single activation kind throughout so each
/// kind is exercised on every layer position, including the output.
fn random_architecture(rng: &mut ChaCha8Rng, index: usize) -> DsaeConfig {
    let lambdas = [0.0, 1e-5, 1e-2];
    let pinned = index.is_multiple_of(3).then(|| Activation::ALL[(index / 3) % Activation::ALL.len()]);
    loop {
        let input = rng.random_range(2..=6);
        let n_encoder = rng.random_range(1..=2);
        let n_decoder = rng.random_range(0..=1);
        let encoder = random_layers(rng, n_encoder, pinned);
        let decoder = random_layers(rng, n_decoder, pinned);
        let output = pinned.unwrap_or(Activation::ALL[rng.random_range(0..Activation::ALL.len())]);
        let cfg = DsaeConfig::from_widths(input, &encoder, &decoder, output, lambdas[index % 3], index as u64)
            .expect("valid architecture");
        if cfg.parameter_count() <= 120 {
            return cfg;
        }
    }
}

fn near_kink(model: &DsaeModel, batch: &Array2<f64>) -> bool {
    let pass = model.forward(batch.view()).expect("finite forward pass");
    let relu_kink = model.layers().iter().zip(&pass.pre_activations).any(|(l, z)| {
        l.activation == Activation::Relu && z.iter().any(|v| v.abs() < KINK_MARGIN)
    });
    let l1_kink = model.config().lambda > 0.0 && pass.code().iter().any(|v| v.abs() < KINK_MARGIN);
    relu_kink || l1_kink
}

fn criterion_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    let mut worst: f64 = 0.0;
    let mut entries = 0usize;
    let mut failures = 0usize;
    let mut kinds = BTreeSet::new();
    let mut redraws = 0usize;
    for index in 0..50 {
        let cfg = random_architecture(&mut rng, index);
        for l in cfg.layers() {
            kinds.insert(l.activation.name());
        }
        let mut model = DsaeModel::new(cfg.clone()).unwrap();
        let rows = rng.random_range(1..=6);
        let mut batch;
        loop {
            model.random_uniform_parameters(&mut rng, 1.0);
            batch = Array2::from_shape_fn((rows, cfg.input_width()), |_| rng.random_range(-1.0..1.0));
            if !near_kink(&model, &batch) {
                break;
            }
            redraws += 1;
        }
        let pass = model.forward(batch.view()).unwrap();
        let analytic = model.backward(&pass).to_flat();
        let base = model.parameters_flat();
        let mut probe = model.clone();
        for (i, &theta) in base.iter().enumerate() {
            probe.set_parameter(i, theta + FD_STEP);
            let up = probe.loss_with_penalty(batch.view()).unwrap().total;
            probe.set_parameter(i, theta - FD_STEP);
            let down = probe.loss_with_penalty(batch.view()).unwrap().total;
            probe.set_parameter(i, theta);
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic[i];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FD_FLOOR);
            worst = worst.max(err);
            entries += 1;
            if err >= FD_TOLERANCE {
                failures += 1;
            }
        }
    }
    Outcome::check(
        failures == 0 && kinds.len() == Activation::ALL.len(),
        format!(
            "50 architectures, {entries} gradient entries, max relative error {worst:.2e} (tolerance {FD_TOLERANCE:.0e}), \
             {failures} failures, activations {kinds:?}, {redraws} draws near a kink redrawn"
        ),
    )
}

// ---------------------------------------------------------------------------
// Shared planted benchmark

const PLANTED_DATA_SEED: u64 = 7;

fn planted_spec() -> PlantedSpec {
    PlantedSpec {
        majority: 2000,
        minority: 100,
        features: 100,
        planted: 10,
        shift: 2.0,
        seed: PLANTED_DATA_SEED,
    }
}

fn planted_config(components: usize, epochs: Option<usize>, deltas: &[f64]) -> String {
    let p = planted_spec();
    let epochs = epochs.map(|e| format!("epochs = {e}\n")).unwrap_or_default();
    let deltas: Vec<String> = deltas.iter().map(f64::to_string).collect();
    format!(
        "[data]\nformat = \"planted\"\nplanted = {{ majority = {}, minority = {}, features = {}, planted = {}, shift = {}, seed = {} }}\n\n\
         [ensemble]\ncomponents = {components}\n\n[training]\n{epochs}\n[selection]\ndeltas = [{}]\n\n\
         [eval]\nclassifiers = [\"gaussian_nb\"]\n",
        p.majority,
        p.minority,
        p.features,
        p.planted,
        p.shift,
        p.seed,
        deltas.join(", ")
    )
}

fn dsaee(args: &[&str], cwd: &Path) -> Duration {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_dsaee"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(
        out.status.success(),
        "dsaee {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    elapsed
}

// ---------------------------------------------------------------------------
// 2. Pipeline determinism

fn result_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy().into_owned();
            n == "q.csv" || n == "selections.csv" || (n.starts_with("selection_") && n.ends_with(".json"))
        })
        .collect();
    files.sort();
    files
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), planted_config(15, None, &DEFAULT_DELTA_GRID)).unwrap();
    let runs = [
        ("a", vec!["--parallelism", "1"]),
        ("b", vec!["--parallelism", "1"]),
        ("c", vec!["--parallelism", "8"]),
    ];
    for (name, extra) in &runs {
        let mut args = vec!["select", "--config", "c.toml", "--export-q", "--output", name];
        args.extend(extra.iter().copied());
        dsaee(&args, dir.path());
    }
    dsaee(
        &["select", "--config", "a/manifest.toml", "--export-q", "--output", "d"],
        dir.path(),
    );
    let reference = result_files(&dir.path().join("a"));
    let mut mismatches = Vec::new();
    for other in ["b", "c", "d"] {
        let files = result_files(&dir.path().join(other));
        if files.len() != reference.len() {
            mismatches.push(format!("{other}: file count"));
            continue;
        }
        for f in &reference {
            let name = f.file_name().unwrap();
            if std::fs::read(f).unwrap() != std::fs::read(dir.path().join(other).join(name)).unwrap() {
                mismatches.push(format!("{other}/{}", name.to_string_lossy()));
            }
        }
    }
    Outcome::check(
        mismatches.is_empty() && reference.len() == DEFAULT_DELTA_GRID.len() + 2,
        format!(
            "{} result files compared across rerun, parallelism 8 and manifest rerun; mismatches: {:?}",
            reference.len(),
            mismatches
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. Sampling and shape invariants

fn criterion_shapes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut problems = Vec::new();
    for trial in 0..200 {
        let o = rng.random_range(1..=15usize);
        let m = o + rng.random_range(1..=40usize);
        let b = rng.random_range(1..=5usize);
        let j = rng.random_range(2..=5usize);
        let x = Array2::from_shape_fn((m + o, j), |_| rng.random_range(0.0..1.0));
        let mut y = vec![0u8; m];
        y.extend(vec![1u8; o]);
        let data = LabeledDataset::new(x, y).unwrap();
        let cfg = EnsembleConfig {
            components: b,
            dsae: DsaeConfig::from_widths(j, &[(2, Activation::Tanh)], &[], Activation::Sigmoid, 1e-5, 0).unwrap(),
            training: TrainingConfig {
                epochs: 1,
                batch_size: 8,
                ..TrainingConfig::default()
            },
            master_seed: trial,
            parallelism: 1,
        };
        let q = run_ensemble(&data, &cfg).unwrap();
        if q.k() != 2 * o * b || q.n_features() != j {
            problems.push(format!("trial {trial}: Q is {}x{}", q.k(), q.n_features()));
        }
        for block in q.labels.chunks(2 * o) {
            let ones = block.iter().filter(|&&l| l == 1).count();
            if ones != o || block[..o].iter().any(|&l| l != 1) {
                problems.push(format!("trial {trial}: unbalanced block"));
            }
        }
        for c in 0..b {
            let split = build_component_split(&data, cfg.component_seed(c)).unwrap();
            let train: BTreeSet<usize> = split.train_indices.iter().copied().collect();
            if split.test_majority_indices.iter().any(|i| train.contains(i))
                || train.len() + split.test_majority_indices.len() != m
            {
                problems.push(format!("trial {trial}: component {c} train/test overlap"));
            }
        }
        let selections = select_at_thresholds(&q, &DEFAULT_DELTA_GRID).unwrap();
        for pair in selections.windows(2) {
            let wider: BTreeSet<usize> = pair[0].selected.iter().copied().collect();
            if !pair[1].selected.iter().all(|f| wider.contains(f)) {
                problems.push(format!(
                    "trial {trial}: selection at {} not nested in {}",
                    pair[1].delta_quantile, pair[0].delta_quantile
                ));
            }
        }
    }
    Outcome::check(
        problems.is_empty(),
        format!("200 random (|O|, |M|, B) triples; violations: {:?}", &problems[..problems.len().min(5)]),
    )
}

// ---------------------------------------------------------------------------
// 4 and 5. Planted-feature recovery and baseline comparison

const MASTER_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
/// With 100 features the 0.9 level selects the 10 largest entries of Delta.
const RECOVERY_DELTA: f64 = 0.9;

struct PlantedRuns {
    truth: Vec<usize>,
    runs: Vec<SelectionRun>,
    seconds: f64,
}

fn planted_runs() -> PlantedRuns {
    let start = Instant::now();
    let truth = planted_dataset(&planted_spec()).planted;
    let runs = MASTER_SEEDS
        .iter()
        .map(|&seed| {
            let mut cfg = RunConfig::from_toml_str(&planted_config(15, None, &[RECOVERY_DELTA]), Path::new(".")).unwrap();
            cfg.ensemble.master_seed = seed;
            let data = load_dataset(&cfg.data).unwrap();
            let run = cfg.resolve(data.n_features()).unwrap();
            run_selection(&run, &data).unwrap()
        })
        .collect();
    PlantedRuns {
        truth,
        runs,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn criterion_recovery(p: &PlantedRuns) -> Outcome {
    let truth: BTreeSet<usize> = p.truth.iter().copied().collect();
    let mut hits = Vec::new();
    let mut sizes = Vec::new();
    for r in &p.runs {
        let s = &r.selections[0];
        sizes.push(s.selected.len());
        hits.push(s.selected.iter().filter(|f| truth.contains(f)).count());
    }
    let mean = hits.iter().sum::<usize>() as f64 / hits.len() as f64;
    Outcome::check(
        mean >= 9.0 && sizes.iter().all(|&s| s == 10) && p.seconds < 600.0,
        format!(
            "recovered {hits:?} of 10 planted features at delta {RECOVERY_DELTA} (|F| = {sizes:?}), mean {mean:.1} \
             (required >= 9), ensemble time {:.0}s for 5 seeds (limit 600s)",
            p.seconds
        ),
    )
}

fn nb_auroc(cds: &LabeledDataset, method: &str, features: Vec<usize>) -> f64 {
    let protocol = EvalProtocol {
        classifiers: vec![ClassifierKind::GaussianNb],
        ..EvalProtocol::default()
    };
    let set = FeatureSet {
        method: method.into(),
        delta_quantile: None,
        features,
    };
    let report = evaluate_feature_sets(cds, &[set], &protocol).unwrap();
    report.summaries[0].auroc_mean
}

fn criterion_baseline(p: &PlantedRuns) -> Outcome {
    // The plant oracle: NB restricted to the true planted set.
    let oracle = nb_auroc(&p.runs[0].prepared.cds, "oracle", p.truth.clone());
    let mut rows = Vec::new();
    let mut ok = oracle > 0.95;
    for (seed, r) in MASTER_SEEDS.iter().zip(&p.runs) {
        let sel = &r.selections[0];
        let chi2 = chi2_feature_sets(&r.prepared.fsds, std::slice::from_ref(sel)).unwrap();
        let a_dsaee = nb_auroc(&r.prepared.cds, "dsaee", sel.selected.clone());
        let a_chi2 = nb_auroc(&r.prepared.cds, "chi2", chi2[0].features.clone());
        ok &= sel.selected.len() == 10 && chi2[0].features.len() == 10;
        ok &= a_dsaee > 0.95 && a_chi2 > 0.95 && (a_dsaee - a_chi2).abs() <= 0.02;
        rows.push(format!("seed {seed}: dsaee {a_dsaee:.4} chi2 {a_chi2:.4}"));
    }
    Outcome::check(
        ok,
        format!(
            "NB AUROC on CDS at |F| = 10 ({}); plant oracle {oracle:.4}; required both > 0.95 and |diff| <= 0.02",
            rows.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Epileptic Seizure reproduction

const EPILEPTIC_ENV: &str = "DSAEE_EPILEPTIC_CSV";

fn epileptic_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var(EPILEPTIC_ENV) {
        return Some(PathBuf::from(p));
    }
    let local = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/epileptic_seizure.csv");
    local.exists().then_some(local)
}

/// Reads the public file layout: an id column, X1..X178, then `y` in 1..=5
/// where 1 marks a seizure recording.
fn load_epileptic(path: &Path) -> LabeledDataset {
    let mut rdr = csv::Reader::from_path(path).expect("readable dataset");
    let headers = rdr.headers().unwrap().clone();
    let features: Vec<usize> = (0..headers.len()).filter(|&i| headers[i].starts_with('X')).collect();
    let label = headers.iter().position(|h| h == "y").expect("`y` column");
    let mut values = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        values.extend(features.iter().map(|&i| rec[i].trim().parse::<f64>().unwrap()));
        y.push((rec[label].trim() == "1") as u8);
    }
    let x = Array2::from_shape_vec((y.len(), features.len()), values).unwrap();
    LabeledDataset::new(x, y).unwrap()
}

fn criterion_epileptic() -> Outcome {
    let Some(path) = epileptic_path() else {
        return Outcome {
            status: Status::NotEvaluated,
            detail: format!(
                "dataset not available offline; set {EPILEPTIC_ENV} or place data/epileptic_seizure.csv to evaluate"
            ),
        };
    };
    let data = load_epileptic(&path);
    let spec = DatasetSplitSpec {
        fsds_fraction: 0.7,
        split_seed: 0,
        minority_subsample: Some(500),
    };
    let (fsds, cds) = build_fsds_cds(&data, &spec).unwrap();
    let scaling = fit_scaling(fsds.x.view(), ScalingMode::SymmetricUnit).unwrap();
    let cds = LabeledDataset::new(scaling.apply(cds.x.view()).unwrap(), cds.y).unwrap();
    let a = nb_auroc(&cds, "all", (0..data.n_features()).collect());
    Outcome::check(
        (a - 0.932).abs() <= 0.05,
        format!(
            "FSDS {}+{}, NB AUROC at |F| = {} on CDS {a:.4} (target 0.932 +/- 0.05)",
            fsds.class_count(0),
            fsds.class_count(1),
            data.n_features()
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Metric oracles

fn pairwise_auroc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut wins = 0.0;
    let (mut pos, mut neg) = (0usize, 0usize);
    for (i, &li) in labels.iter().enumerate() {
        if li == 1 {
            pos += 1;
        } else {
            neg += 1;
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj == 0 {
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / (pos * neg) as f64
}

fn criterion_metrics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut auroc_mismatch = 0;
    let mut sens_mismatch = 0;
    let mut with_ties = 0;
    for trial in 0..1000 {
        let n = rng.random_range(2..=60);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let tied = trial % 2 == 1;
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if tied {
                    rng.random_range(0..5) as f64 / 4.0
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        let distinct: BTreeSet<u64> = scores.iter().map(|s| s.to_bits()).collect();
        if distinct.len() < n {
            with_ties += 1;
        }
        if auroc(&scores, &labels).unwrap() != pairwise_auroc(&scores, &labels) {
            auroc_mismatch += 1;
        }
        let cutoff = rng.random_range(0.0..1.0);
        let tp = (0..n).filter(|&i| labels[i] == 1 && scores[i] > cutoff).count();
        let fneg = (0..n).filter(|&i| labels[i] == 1 && scores[i] <= cutoff).count();
        if sensitivity(&scores, &labels, cutoff).unwrap() != tp as f64 / (tp + fneg) as f64 {
            sens_mismatch += 1;
        }
    }
    Outcome::check(
        auroc_mismatch == 0 && sens_mismatch == 0,
        format!(
            "1000 random vectors ({with_ties} with ties): {auroc_mismatch} AUROC and {sens_mismatch} sensitivity \
             mismatches against exact pairwise and confusion-count oracles"
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. Complexity scaling

fn criterion_scaling() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), planted_config(1, Some(20), &[0.9])).unwrap();
    let sizes = [5usize, 10, 20];
    let times: Vec<f64> = sizes
        .iter()
        .map(|&b| {
            let b = b.to_string();
            let args = ["select", "--config", "c.toml", "--components", &b, "--parallelism", "1", "--output", "out"];
            // Best of two runs damps scheduler noise.
            (0..2).map(|_| dsaee(&args, dir.path()).as_secs_f64()).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let r1 = times[1] / times[0];
    let r2 = times[2] / times[1];
    // Least-squares line through (B, t); every point must sit within 25% of it.
    let n = sizes.len() as f64;
    let xs: Vec<f64> = sizes.iter().map(|&b| b as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = times.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&times).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let intercept = my - slope * mx;
    let worst = xs
        .iter()
        .zip(&times)
        .map(|(x, y)| ((intercept + slope * x) - y).abs() / y)
        .fold(0.0, f64::max);
    Outcome::check(
        r1 <= 2.0 * 1.25 && r2 <= 2.0 * 1.25 && worst <= 0.25,
        format!(
            "select wall-clock B=5/10/20: {:.2}s/{:.2}s/{:.2}s; doubling ratios {r1:.2}, {r2:.2} (limit 2.5); \
             max deviation from linear fit {:.1}% (limit 25%)",
            times[0],
            times[1],
            times[2],
            worst * 100.0
        ),
    )
}

// ---------------------------------------------------------------------------

fn report(number: usize, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let tag = match outcome.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::NotEvaluated => "NOT EVALUATED",
    };
    println!(
        "criterion {number} [{tag}] {name}: {} ({:.1}s)",
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    !matches!(outcome.status, Status::Fail)
}

fn main() {
    // libtest-style flags from `cargo test` are accepted and ignored.
    let listing = std::env::args().any(|a| a == "--list");
    if listing {
        return;
    }
    println!("running acceptance criteria");
    let mut ok = true;
    ok &= report(1, "gradient correctness", criterion_gradients);
    ok &= report(2, "pipeline determinism", criterion_determinism);
    ok &= report(3, "sampling and shape invariants", criterion_shapes);
    let mut planted = None;
    ok &= report(4, "planted-feature recovery", || {
        let runs = planted_runs();
        let outcome = criterion_recovery(&runs);
        planted = Some(runs);
        outcome
    });
    let planted = planted.expect("planted runs");
    ok &= report(5, "baseline comparison on the planted set", || criterion_baseline(&planted));
    ok &= report(6, "Epileptic Seizure all-features NB AUROC", criterion_epileptic);
    ok &= report(7, "metric oracles", criterion_metrics);
    ok &= report(8, "complexity scaling in B", criterion_scaling);
    if ok {
        println!("acceptance: ok");
    } else {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
}
