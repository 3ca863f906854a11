use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use qvcause::datasets::{generate_dataset, load_manifest, SimConfig, SimKind};

fn qvcause(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qvcause"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_cubic(path: &Path) {
    let mut rng = seeded_rng(3);
    let mut text = String::new();
    for _ in 0..400 {
        let x: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        text += &format!("{x} {}\n", x * x * x + 0.01 * e);
    }
    fs::write(path, text).unwrap();
}

fn seeded_rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

fn without_timing(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn infer_cubic_is_forward_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cubic.txt");
    write_cubic(&file);
    let args = ["infer", "--input", file.to_str().unwrap(), "--M", "0", "--m", "100", "--seed", "4"];
    let a = qvcause(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    let v = without_timing(&stdout(&a));
    assert_eq!(v["direction"], "XtoY");
    assert_eq!(v["M"], 0);
    assert_eq!(v["m"], 100);
    assert_eq!(v["n"], 400);
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["config"]["command"], "infer");
    let p_x = v["p_x"].as_f64().unwrap();
    assert_eq!(v["p_y"].as_f64().unwrap(), 1.0 - p_x);

    let b = qvcause(&args);
    assert_eq!(v, without_timing(&stdout(&b)));
}

#[test]
fn infer_with_bijections_reports_m() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cubic.txt");
    write_cubic(&file);
    let o = qvcause(&["infer", "--input", file.to_str().unwrap(), "--M", "3", "--m", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = without_timing(&stdout(&o));
    assert_eq!(v["M"], 3);
}

#[test]
fn constant_column_exits_with_degenerate_input() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("flat.txt");
    fs::write(&file, (0..50).map(|i| format!("{i} 7\n")).collect::<String>()).unwrap();
    let o = qvcause(&["infer", "--input", file.to_str().unwrap(), "--M", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("degenerate input"), "{}", stderr(&o));
    assert_eq!(stderr(&o).lines().count(), 1);
}

#[test]
fn io_and_parse_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    let o = qvcause(&["infer", "--input", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 2\n3 4\n5 abc\n").unwrap();
    let o = qvcause(&["infer", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":3:"), "{}", stderr(&o));
}

#[test]
fn condind_rejects_multidimensional_z() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("four.txt");
    let mut rng = seeded_rng(9);
    let text: String = (0..100)
        .map(|_| {
            let v: Vec<String> = (0..4).map(|_| rng.random::<f64>().to_string()).collect();
            v.join(" ") + "\n"
        })
        .collect();
    fs::write(&file, text).unwrap();
    let o = qvcause(&["condind", "--input", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn condind_on_a_triplet_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("three.txt");
    let mut rng = seeded_rng(10);
    let text: String = (0..300)
        .map(|_| {
            let z: f64 = rng.random_range(-2.0..2.0);
            let e1: f64 = StandardNormal.sample(&mut rng);
            let e2: f64 = StandardNormal.sample(&mut rng);
            format!("{} {} {z}\n", z.sin() + e1, z * z + e2)
        })
        .collect();
    fs::write(&file, text).unwrap();
    let o = qvcause(&["condind", "--input", file.to_str().unwrap(), "--bijections", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["results"][0];
    assert_eq!(r["values"].as_array().unwrap().len(), 50);
    assert!(r["independent"].as_bool().unwrap());
    assert!(v.get("confusion").is_none());
}

#[test]
fn gen_writes_reproducible_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = qvcause(&["gen", "--kind", "SIM-ln", "--pairs", "5", "--n", "150", "--seed", "8", "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    assert!(names.contains(&"manifest.json".to_string()));
    assert!(names.contains(&"pairmeta.txt".to_string()));
    for name in &names {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }

    let (manifest, pairs) = load_manifest(&a.join("manifest.json")).unwrap();
    assert_eq!(manifest.seed, 8);
    assert_eq!(manifest.kind, "SIM-ln");
    let expected = generate_dataset(&SimConfig {
        n: 150,
        ..SimConfig::new(SimKind::SimLn, 5, 8)
    })
    .unwrap();
    for (got, want) in pairs.iter().zip(&expected) {
        assert_eq!(got.truth, want.truth);
        assert_eq!(got.pair, want.pair);
    }
}

#[test]
fn gen_needs_an_output_directory() {
    let o = qvcause(&["gen", "--pairs", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn benchmark_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = qvcause(&["gen", "--pairs", "12", "--n", "200", "--out", data.to_str().unwrap()]);
    assert!(o.status.success());

    let o = qvcause(&["benchmark", "--input", data.to_str().unwrap(), "--methods", "Strawman,IGCI", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,k,accuracy,envelope"));
    assert_eq!(csv.lines().count(), 1 + 2 * 12);
    assert!(csv.contains("\nStrawman,1,"));

    let out = dir.path().join("bench.json");
    let o = qvcause(&["benchmark", "--input", data.join("manifest.json").to_str().unwrap(), "--methods", "MQV", "--M", "0", "--m", "20", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["methods"][0]["method"], "MQV-Alg1");
    assert_eq!(v["records"].as_array().unwrap().len(), 12);
    assert_eq!(v["dataset"]["pairs"], 12);
    let acc = v["methods"][0]["weighted_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn benchmark_reads_cep_directories_with_weights() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded_rng(11);
    let mut meta = String::new();
    for id in 1..=3 {
        let text: String = (0..60)
            .map(|_| {
                let x: f64 = rng.random_range(-1.0..1.0);
                format!("{x} {}\n", x * x + 0.05 * rng.random::<f64>())
            })
            .collect();
        fs::write(dir.path().join(format!("pair{id:04}.txt")), text).unwrap();
        meta += &format!("{id:04} 1 1 2 2 {}\n", id as f64 * 0.5);
    }
    fs::write(dir.path().join("pairmeta.txt"), meta).unwrap();
    let o = qvcause(&["benchmark", "--input", dir.path().to_str().unwrap(), "--methods", "IGCI"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let weights: Vec<f64> = v["records"].as_array().unwrap().iter().map(|r| r["weight"].as_f64().unwrap()).collect();
    assert_eq!(weights, vec![0.5, 1.0, 1.5]);
    assert!(v["methods"][0]["weighted_accuracy"].is_number());
}

#[test]
fn benchmark_is_independent_of_worker_count() {
    let base = ["benchmark", "--pairs", "6", "--n", "200", "--methods", "MQV,Strawman,RECI", "--M", "2", "--m", "8", "--seed", "5"];
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let mut args = base.to_vec();
        args.extend(["--threads", threads]);
        let o = qvcause(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(o.stdout);
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn robustness_strawman_column_is_zero() {
    let o = qvcause(&["robustness", "--pairs", "3", "--n", "150", "--bijections", "4", "--methods", "Strawman,IGCI", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("method,dataset,mean_entropy\n"));
    assert!(csv.contains("Strawman,SIM,0\n"), "{csv}");
}

#[test]
fn unknown_method_is_rejected() {
    let o = qvcause(&["benchmark", "--pairs", "2", "--methods", "ANM"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown method"));
}
