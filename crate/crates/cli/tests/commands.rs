use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use featurecraft::report::{compare, Marker};
use featurecraft::run::{trial_dir, RESULT_FILE, SUMMARY_FILE};
use featurecraft::{cmd_augment, cmd_plotdata, cmd_report, cmd_run, cmd_suggest, ConfigFile, ExperimentResult, Overrides, Pipeline};
use featurecraft_core::data::DatasetManifest;
use featurecraft_core::gp::{evolve, test_score, GpConfig};
use featurecraft_core::llmfeat::EndpointConfig;
use featurecraft_core::metrics::summarize;
use featurecraft_core::models::Metric;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

const USE_CASE_2: &str = "I want to predict concrete compressive strength in a dataset with the following features: \
cement, Blast furnace slag, fly ash, water, superplasticizer, coarse aggregate, fine aggregate, age. Which features should I use?";

fn offline() -> EndpointConfig {
    EndpointConfig { offline: true, ..EndpointConfig::default() }
}

#[test]
fn suggest_reproduces_the_concrete_prompt() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_suggest(&root().join("datasets/concrete.manifest"), &offline(), dir.path()).unwrap();
    assert_eq!(out.prompts.prompt1, USE_CASE_2);
    assert_eq!(out.prompts.prompt2, "Are there any combination of features that might improve the results?");
    assert!(out.transcript.is_none());
    assert!(cmd_suggest(&root().join("datasets/missing.manifest"), &offline(), dir.path()).is_err());
}

#[test]
fn augment_writes_the_recipe_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("concrete_aug.csv");
    let d = cmd_augment(&root().join("datasets/concrete.manifest"), &root().join("recipes/concrete.recipe"), &out).unwrap();
    assert_eq!(d.n_features(), 20);
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(header.len(), 21);
    assert_eq!(&header[8], "water_cement");
    assert_eq!(&header[20], "strength");
    assert_eq!(r.records().count(), 1030);
}

/// Small regression dataset plus manifest in `dir`.
fn toy_manifest(dir: &Path) -> PathBuf {
    let mut csv = String::from("a,b,y\n");
    for i in 0..60 {
        let a = (i % 13) as f64 * 0.5;
        let b = ((i * 7) % 11) as f64 + 1.0;
        csv.push_str(&format!("{a},{b},{}\n", a * b + (i % 3) as f64 * 0.1));
    }
    fs::write(dir.join("toy.csv"), csv).unwrap();
    let m = dir.join("toy.manifest");
    fs::write(&m, "name = toy\ncsv = toy.csv\ntarget = y\ntask = regression\nobjective = predict y\n").unwrap();
    m
}

fn config(manifest: &Path, out: &Path, pipeline: Pipeline, trials: usize) -> featurecraft::ExperimentConfig {
    let file = ConfigFile::parse("[gp]\npopulation_size = 20\ngenerations = 4\n", Path::new(".")).unwrap();
    file.resolve(&Overrides {
        dataset: Some(manifest.to_path_buf()),
        pipeline: Some(pipeline),
        trials: Some(trials),
        seed: Some(7),
        out: Some(out.to_path_buf()),
        ..Overrides::default()
    })
    .unwrap()
}

#[test]
fn identical_runs_write_identical_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let m = toy_manifest(dir.path());
    for p in [Pipeline::M3gpRidge, Pipeline::M6gpRidge, Pipeline::BaselineRf] {
        let a = cmd_run(&config(&m, &dir.path().join("a"), p, 3)).unwrap();
        let b = cmd_run(&config(&m, &dir.path().join("b"), p, 3)).unwrap();
        assert_eq!(a, b);
        let read = |root: &str| fs::read(dir.path().join(root).join(&a.experiment).join(SUMMARY_FILE)).unwrap();
        assert_eq!(read("a"), read("b"), "{p}");
        assert!(a.failures.is_empty());
        assert_eq!(a.test_scores.len(), 3);
        assert_eq!(a.dimensionality.len(), 3);
    }
}

#[test]
fn more_trials_keep_earlier_results() {
    let dir = tempfile::tempdir().unwrap();
    let m = toy_manifest(dir.path());
    let two = cmd_run(&config(&m, &dir.path().join("two"), Pipeline::M3gpRidge, 2)).unwrap();
    let four = cmd_run(&config(&m, &dir.path().join("four"), Pipeline::M3gpRidge, 4)).unwrap();
    assert_eq!(two.test_scores[..], four.test_scores[..2]);
}

#[test]
fn completed_trials_are_not_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let m = toy_manifest(dir.path());
    let cfg = config(&m, dir.path(), Pipeline::BaselineRidge, 3);
    cmd_run(&cfg).unwrap();
    // tamper with a stored result: a resumed run must read it back rather than recompute
    let path = trial_dir(&cfg.experiment_dir(), 1).join(RESULT_FILE);
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    v["test_score"] = serde_json::json!(123.5);
    fs::write(&path, v.to_string()).unwrap();
    let again = cmd_run(&cfg).unwrap();
    assert_eq!(again.test_scores[1], Some(123.5));
}

#[test]
fn zero_generations_is_the_best_initial_individual() {
    let dir = tempfile::tempdir().unwrap();
    let m = toy_manifest(dir.path());
    let mut cfg = config(&m, dir.path(), Pipeline::M3gpRidge, 1);
    cfg.gp.generations = 0;
    let got = cmd_run(&cfg).unwrap().test_scores[0].unwrap();

    let data = DatasetManifest::load(&m).unwrap().load_dataset().unwrap();
    let parts = featurecraft_core::data::split(&data, 0.7, 7).unwrap();
    let gp = GpConfig { seed: 7, generations: 0, ..cfg.gp.clone() };
    let best = evolve(&gp, &parts.train, None).unwrap().best;
    let model = featurecraft_core::models::ModelSpec { seed: 7, ..gp.model };
    let (want, _) = test_score(&best, &parts.train, &parts.test, &model, Metric::Rmse).unwrap();
    assert_eq!(got, want);
    assert_eq!(best.size(), 63);
}

#[test]
fn failed_trials_are_recorded_and_the_run_continues() {
    let dir = tempfile::tempdir().unwrap();
    // one rare class: ridge fails on splits whose training part lacks it
    let mut csv = String::from("x,label\n");
    for i in 0..12 {
        csv.push_str(&format!("{i},{}\n", if i == 5 { "rare" } else { "common" }));
    }
    fs::write(dir.path().join("c.csv"), csv).unwrap();
    let m = dir.path().join("c.manifest");
    fs::write(&m, "name = c\ncsv = c.csv\ntarget = label\ntask = classification\nobjective = predict label\n").unwrap();
    let r = cmd_run(&config(&m, dir.path(), Pipeline::BaselineRidge, 12)).unwrap();
    assert!(!r.failures.is_empty() && r.failures.len() < 12, "{:?}", r.failures);
    assert_eq!(r.test_scores.iter().filter(|s| s.is_none()).count(), r.failures.len());
    let t = r.failures[0].trial;
    let exp = dir.path().join(&r.experiment);
    assert!(trial_dir(&exp, t).join("error.txt").exists());
    assert_eq!(r.report.as_ref().unwrap().n, 12 - r.failures.len());

    let status = Command::new(env!("CARGO_BIN_EXE_featurecraft"))
        .args(["run", "--trials", "12", "--pipeline", "baseline-ridge", "--seed", "7", "--dataset"])
        .arg(&m)
        .arg("--out")
        .arg(dir.path().join("bin"))
        .output()
        .unwrap();
    assert!(!status.status.success());
}

fn synthetic(name: &str, scores: &[f64]) -> ExperimentResult {
    let n = scores.len();
    ExperimentResult {
        experiment: name.into(),
        dataset: "d".into(),
        pipeline: Pipeline::BaselineRidge,
        recipe: None,
        metric: Metric::Rmse,
        trials: n,
        base_seed: 0,
        train_ratio: 0.7,
        test_scores: scores.iter().map(|&s| Some(s)).collect(),
        dimensionality: vec![Some(1); n],
        sizes: vec![None; n],
        model_parameters: vec![Some(2); n],
        report: summarize(scores).ok(),
        median_dimensionality: Some(1.0),
        failures: Vec::new(),
    }
}

#[test]
fn report_markers() {
    let a = synthetic("a", &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let same = compare(&a, &a).unwrap();
    assert_eq!(same.marker, Marker::Tie);
    assert!(same.p > 0.99);
    let hi = synthetic("hi", &[10.0, 11.0, 12.0, 13.0, 14.0]);
    let c = compare(&a, &hi).unwrap();
    // exact two-sided p for 5 vs 5 fully separated: 2 / C(10, 5)
    assert!((c.p - 2.0 / 252.0).abs() < 1e-12);
    assert_eq!(c.marker, Marker::Better);
    assert_eq!(compare(&hi, &a).unwrap().marker, Marker::Worse);
    let text = c.to_text();
    assert!(text.contains("3.000") && text.contains("12.000") && text.ends_with("*\n"), "{text}");

    let mut other = synthetic("o", &[1.0]);
    other.dataset = "elsewhere".into();
    assert!(compare(&a, &other).is_err());
}

#[test]
fn report_reads_experiment_directories() {
    let dir = tempfile::tempdir().unwrap();
    let m = toy_manifest(dir.path());
    let ridge = cmd_run(&config(&m, dir.path(), Pipeline::BaselineRidge, 4)).unwrap();
    let dt = cmd_run(&config(&m, dir.path(), Pipeline::BaselineDt, 4)).unwrap();
    let c = cmd_report(&dir.path().join(&ridge.experiment), &dir.path().join(&dt.experiment)).unwrap();
    assert_eq!(c.a.median, ridge.report.unwrap().median);
    assert_eq!(c.b.n, 4);
}

fn write_logs(exp: &Path, curves: &[Vec<f64>]) {
    for (i, curve) in curves.iter().enumerate() {
        let d = trial_dir(exp, i);
        fs::create_dir_all(&d).unwrap();
        let mut log = String::new();
        for (g, v) in curve.iter().enumerate() {
            log.push_str(&format!(
                "{{\"generation\":{g},\"best_objectives\":[{v}],\"test_metric\":{v},\"size\":3,\"dimensionality\":1,\"wall_ms\":0}}\n"
            ));
        }
        fs::write(d.join("runlog.jsonl"), log).unwrap();
        fs::write(d.join(RESULT_FILE), "{}").unwrap();
    }
}

#[test]
fn plotdata_quartiles() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    write_logs(&one, &[vec![5.0, 4.0, 3.0]]);
    for r in cmd_plotdata(&one).unwrap() {
        assert!(r.median == r.q1 && r.q1 == r.q3);
    }
    let flat = dir.path().join("flat");
    write_logs(&flat, &vec![vec![2.5; 4]; 3]);
    assert!(cmd_plotdata(&flat).unwrap().iter().all(|r| (r.median, r.q1, r.q3) == (2.5, 2.5, 2.5)));

    let curves: Vec<Vec<f64>> = (0..7).map(|t| (0..5).map(|g| ((t * 37 + g * 11) % 17) as f64 / 3.0).collect()).collect();
    let synth = dir.path().join("synth");
    write_logs(&synth, &curves);
    let rows = cmd_plotdata(&synth).unwrap();
    for (g, r) in rows.iter().enumerate() {
        let mut col: Vec<f64> = curves.iter().map(|c| c[g]).collect();
        col.sort_by(f64::total_cmp);
        // seven values: quartile positions 1.5, 3 and 4.5 in sorted order
        let want = (col[3], col[1] + (col[2] - col[1]) / 2.0, col[4] + (col[5] - col[4]) / 2.0);
        assert_eq!((r.median, r.q1, r.q3), want, "generation {g}");
    }
    assert!(cmd_plotdata(&dir.path().join("nothing")).is_err());
    let broken = dir.path().join("broken");
    write_logs(&broken, &[vec![1.0]]);
    fs::remove_file(trial_dir(&broken, 0).join("runlog.jsonl")).unwrap();
    assert!(cmd_plotdata(&broken).is_err());
}

#[test]
fn binary_suggest_offline() {
    let out = Command::new(env!("CARGO_BIN_EXE_featurecraft"))
        .args(["suggest", "--offline", "--dataset"])
        .arg(root().join("datasets/concrete.manifest"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with(USE_CASE_2));
}

#[test]
fn shipped_config_resolves() {
    let file = ConfigFile::load(&root().join("configs/concrete-m3gp-ridge.toml")).unwrap();
    let cfg = file.resolve(&Overrides::default()).unwrap();
    assert_eq!(cfg.pipeline, Pipeline::M3gpRidge);
    assert_eq!((cfg.trials, cfg.gp.population_size, cfg.gp.generations), (30, 500, 100));
    assert!(cfg.dataset.exists() && cfg.recipe.as_ref().unwrap().exists());
    assert_eq!(file.endpoint(&Overrides::default()).model, "gpt-4o");
}
