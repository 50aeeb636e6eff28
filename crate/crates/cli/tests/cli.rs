use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use inpaint_core::{pnm, Mask};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inpaint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text:?}"))
        .parse()
        .unwrap()
}

#[test]
fn full_mask_reproduces_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("camera64.pgm");
    let mask = dir.path().join("full.pbm");
    pnm::write_mask(&mask, &Mask::full(64, 64)).unwrap();
    let out = dir.path().join("out.pgm");
    let res = run(&["inpaint", "--mask", p(&mask), "--values", p(&input), "-o", p(&out)]);
    assert!(res.status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&input).unwrap());
}

#[test]
fn golden_fixture_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let image = fixture("astronaut32.pgm");
    let golden = fs::read_to_string(fixture("astronaut32_golden.txt")).unwrap();
    let expected: f64 = golden
        .lines()
        .find_map(|l| l.strip_prefix("psnr="))
        .unwrap()
        .parse()
        .unwrap();
    let out = dir.path().join("out.pgm");
    let res = run(&[
        "inpaint",
        "--mask",
        p(&fixture("astronaut32_mask.pbm")),
        "--values",
        p(&image),
        "--reference",
        p(&image),
        "-o",
        p(&out),
    ]);
    assert!(res.status.success());
    let psnr = value(&stdout(&res), "psnr");
    assert!((psnr - expected).abs() <= 0.01, "{psnr} vs golden {expected}");
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "inpaint",
        "--mask",
        "does-not-exist.pbm",
        "--values",
        p(&fixture("camera64.pgm")),
        "-o",
        p(&dir.path().join("o.pgm")),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("does-not-exist.pbm"));
}

#[test]
fn non_convergence_exits_with_one_and_keeps_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.pgm");
    let res = run(&[
        "inpaint",
        "--mask",
        p(&fixture("astronaut32_mask.pbm")),
        "--values",
        p(&fixture("astronaut32.pgm")),
        "-o",
        p(&out),
        "--set",
        "mg.tolerance=1e-15",
        "--set",
        "mg.max_vcycles=1",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(out.exists());
}

#[test]
fn optimize_spends_the_exact_budget() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "optimize",
        "-i",
        p(&fixture("camera64.pgm")),
        "-o",
        p(dir.path()),
        "--density",
        "0.05",
        "--spatial",
        "dd",
        "--tonal",
        "ras+vi",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(pnm::read_mask(dir.path().join("mask.pbm")).unwrap().count(), 204);
    let line = stdout(&res);
    let fields: Vec<&str> = line.trim().split(',').collect();
    assert_eq!(fields.len(), 6);
    assert_eq!(&fields[..3], &["0.05", "dd", "ras+vi"]);
    for name in ["tonal.pgm", "tonal16.pgm", "reconstruction.pgm", "spatial.csv", "tonal.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn fixed_seed_gives_byte_identical_artifacts() {
    for (spatial, tonal) in [("dd", "ras+vi"), ("ps+nlpe", "cgnr"), ("aa", "balance")] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for dir in [&a, &b] {
            let res = run(&[
                "optimize",
                "-i",
                p(&fixture("camera64.pgm")),
                "-o",
                p(dir.path()),
                "--spatial",
                spatial,
                "--tonal",
                tonal,
                "--density",
                "0.04",
                "--seed",
                "17",
                "--no-timing",
                "--set",
                "nlpe.cycles=1",
            ]);
            assert!(res.status.success());
        }
        for name in ["mask.pbm", "tonal.pgm", "tonal16.pgm", "reconstruction.pgm", "spatial.csv", "tonal.csv"] {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{spatial}/{tonal}: {name}"
            );
        }
    }
}

#[test]
fn rgb_images_give_ppm_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&["optimize", "-i", p(&fixture("chelsea64.ppm")), "-o", p(dir.path()), "--tonal", "cgnr"]);
    assert!(res.status.success());
    let recon = pnm::read_image(dir.path().join("reconstruction.ppm")).unwrap();
    assert_eq!(recon.channels(), 3);
    assert!(dir.path().join("tonal16.ppm").exists());
}

#[test]
fn mask_and_tonal_commands_compose() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("m.pbm");
    let tonal = dir.path().join("t.pgm");
    let tonal16 = dir.path().join("t16.pgm");
    let input = fixture("camera64.pgm");
    let res = run(&["mask", "-i", p(&input), "-o", p(&mask), "--spatial", "aa", "--density", "0.1"]);
    assert!(res.status.success());
    assert_eq!(value(&stdout(&res), "mask_count"), 409.0);
    let res = run(&[
        "tonal",
        "-i",
        p(&input),
        "--mask",
        p(&mask),
        "-o",
        p(&tonal),
        "--output16",
        p(&tonal16),
        "--tonal",
        "ras",
    ]);
    assert!(res.status.success());
    let tonal_mse = value(&stdout(&res), "mse");
    // Reconstructing from the 16-bit sidecar keeps the optimized quality.
    let out = dir.path().join("r.pgm");
    let res = run(&[
        "inpaint",
        "--mask",
        p(&mask),
        "--values",
        p(&tonal16),
        "--reference",
        p(&input),
        "-o",
        p(&out),
        "--set",
        "mg.tolerance=1e-8",
    ]);
    assert!(res.status.success());
    let mse = value(&stdout(&res), "mse");
    assert!((mse - tonal_mse).abs() <= 1e-3 * tonal_mse, "{mse} vs {tonal_mse}");
    let res = run(&["eval", "--reference", p(&input), "--test", p(&out)]);
    assert!(res.status.success());
    assert!(value(&stdout(&res), "psnr") > 10.0);
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# test run\ndensity=0.2\nspatial=random\ntonal=none\nseed=5\n").unwrap();
    let mask = dir.path().join("m.pbm");
    let res = run(&["mask", "-i", p(&fixture("camera64.pgm")), "-o", p(&mask), "--config", p(&cfg), "--density", "0.1"]);
    assert!(res.status.success());
    assert_eq!(value(&stdout(&res), "mask_count"), 409.0);
}

#[test]
fn every_config_problem_is_reported_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "optimize",
        "-i",
        p(&fixture("camera64.pgm")),
        "-o",
        p(&dir.path().join("never")),
        "--density",
        "1.5",
        "--set",
        "oras.overlap=99",
        "--set",
        "no.such.key=1",
    ]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("density"), "{err}");
    assert!(err.contains("no.such.key"), "{err}");
    assert!(err.contains("overlap"), "{err}");
    assert!(!dir.path().join("never").exists());
}

#[test]
fn unknown_method_is_a_usage_error() {
    let res = run(&["mask", "-i", "x.pgm", "-o", "y.pbm", "--spatial", "magic"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn sweep_writes_one_complete_row() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    fs::copy(fixture("camera64.pgm"), corpus.join("camera64.pgm")).unwrap();
    let csv = dir.path().join("sweep.csv");
    let res = run(&[
        "sweep",
        "--corpus",
        p(&corpus),
        "--densities",
        "0.05",
        "--resolutions",
        "48",
        "--csv",
        p(&csv),
        "--tonal",
        "voronoi-init",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["image", "width", "height", "density", "spatial", "tonal", "mask_count", "mse", "psnr", "seconds", "status"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].iter().all(|field| !field.is_empty()), "{:?}", rows[0]);
    assert_eq!(&rows[0][1], "48");
    assert_eq!(&rows[0][10], "ok");
}

#[test]
fn sweep_records_failures_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let corpus = dir.path().join("c");
    fs::create_dir(&corpus).unwrap();
    fs::copy(fixture("astronaut32.pgm"), corpus.join("a.pgm")).unwrap();
    let res = run(&[
        "sweep", "--corpus", p(&corpus), "--densities", "0.1", "--resolutions", "16,64", "--csv", p(&csv), "--tonal", "none",
    ]);
    assert!(res.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",ok"));
    assert!(lines[2].contains("error"));
}

#[test]
fn empty_density_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "sweep",
        "--corpus",
        p(&fixture("corpus")),
        "--densities",
        "",
        "--resolutions",
        "64",
        "--csv",
        p(&dir.path().join("s.csv")),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("m.pbm");
    let input = fixture("camera64.pgm");
    let args = ["mask", "-i", p(&input), "-o", p(&mask), "--spatial", "random"];
    let ok = Command::new(env!("CARGO_BIN_EXE_inpaint")).args(args).env("INPAINT_THREADS", "2").output().unwrap();
    assert!(ok.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_inpaint")).args(args).env("INPAINT_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn tonal_optimization_never_loses_on_the_corpus() {
    for name in ["astronaut", "brick", "camera", "chelsea", "coffee"] {
        let dir = tempfile::tempdir().unwrap();
        let input = fixture(&format!("corpus/{name}.pgm"));
        let mask = dir.path().join("m.pbm");
        assert!(run(&["mask", "-i", p(&input), "-o", p(&mask)]).status.success());
        let mut psnr = Vec::new();
        for tonal in ["none", "ras+vi"] {
            let res = run(&[
                "tonal",
                "-i",
                p(&input),
                "--mask",
                p(&mask),
                "-o",
                p(&dir.path().join("t.pgm")),
                "--tonal",
                tonal,
            ]);
            assert!(res.status.success());
            psnr.push(value(&stdout(&res), "psnr"));
        }
        assert!(psnr[1] >= psnr[0], "{name}: {psnr:?}");
    }
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, threads) in dirs.iter().zip(["1", "3"]) {
        let out = Command::new(env!("CARGO_BIN_EXE_inpaint"))
            .args(["optimize", "-i", p(&fixture("chelsea64.ppm")), "-o", p(dir.path()), "--no-timing"])
            .env("INPAINT_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for name in ["mask.pbm", "tonal16.ppm", "reconstruction.ppm", "spatial.csv", "tonal.csv"] {
        assert_eq!(
            fs::read(dirs[0].path().join(name)).unwrap(),
            fs::read(dirs[1].path().join(name)).unwrap(),
            "{name}"
        );
    }
}
