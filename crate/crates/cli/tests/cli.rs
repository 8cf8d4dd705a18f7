//! End-to-end tests of the `gspc` binary: exit codes, output schemas,
//! determinism across runs, and the tuning-record workflow.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CSV_HEADER: &str =
    "network,variant,layer,kernel,t_o,t_i,unroll,median_ms,weight_pack_ms,macs,params,expected_ms,ratio";

fn gspc() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gspc"));
    // Keep host configuration out of the tests.
    cmd.env_remove("GSPC_RECORD_DIR");
    cmd.env_remove("GSPC_VERIFY_CORRUPT");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_tiny_table(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("tiny.net");
    fs::write(
        &path,
        "gspc-net-table v1\n\
         network tinynet\n\
         variant G(2)\n\
         top1 9.9\n\
         layer grouped 8 8 3 3 1 1 1 1 2 10 10\n\
         layer pointwise 8 16 1 1 1 1 0 0 1 10 10\n\
         layer grouped 8 8 3 3 1 1 1 1 2 10 10\n\
         extra batchnorm 16 1600\n",
    )
    .unwrap();
    path
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(gspc().arg("--help"));
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("Exit codes"));
    let out = run(gspc().arg("--version"));
    assert_eq!(code(&out), 0);

    let out = run(gspc().args(["bench", "--help"]));
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("--kernels"));
}

#[test]
fn usage_errors_exit_three() {
    let out = run(gspc().arg("frobnicate"));
    assert_eq!(code(&out), 3);

    let out = run(gspc().args(["verify", "--kernels", "winograd", "--cases", "1"]));
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("unknown kernel"));

    let out = run(gspc().args(["bench", "--reps", "two"]));
    assert_eq!(code(&out), 3);

    // --network without --variant on a command that needs both.
    let out = run(gspc().args(["tune", "--network", "wrn40_2"]));
    assert_eq!(code(&out), 3);
}

#[test]
fn missing_input_file_exits_four() {
    let out = run(gspc().args(["bench", "--table", "/nonexistent/net.table"]));
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("error"));
}

#[test]
fn malformed_table_exits_three_and_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.net");
    fs::write(
        &path,
        "gspc-net-table v1\nnetwork x\nvariant S\ntop1 1\nlayer standard 8 8 3 3 1 1 1 1 2 8 8\n",
    )
    .unwrap();
    let out = run(gspc().args(["report", "--table"]).arg(&path));
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 5"), "{}", stderr(&out));
}

#[test]
fn verify_passes_on_a_small_sweep() {
    let out = run(gspc().args(["verify", "--cases", "8", "--seed", "11"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("all outputs match the reference"));
}

#[test]
fn corrupted_output_is_caught_by_verify() {
    // Negative control: prove a mismatch actually fails the run.
    let out = run(gspc()
        .args(["verify", "--cases", "2", "--seed", "11"])
        .env("GSPC_VERIFY_CORRUPT", "1"));
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("MISMATCH"));
    assert!(stderr(&out).contains("verification failed"));
}

#[test]
fn bench_csv_schema_is_pinned_and_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_tiny_table(dir.path());
    let run_bench = |csv: &Path, json: &Path| {
        let out = run(gspc()
            .args([
                "bench", "--reps", "1", "--warmup", "0", "--seed", "3", "--table",
            ])
            .arg(&table)
            .arg("--csv")
            .arg(csv)
            .arg("--json")
            .arg(json));
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        // No S variant was benchmarked, so predictions must be absent and
        // announced.
        assert!(stderr(&out).contains("expected_ms left blank"));
    };
    let (csv1, json1) = (dir.path().join("a.csv"), dir.path().join("a.json"));
    let (csv2, json2) = (dir.path().join("b.csv"), dir.path().join("b.json"));
    run_bench(&csv1, &json1);
    run_bench(&csv2, &json2);

    let text = fs::read_to_string(&csv1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    // Two distinct layers, three kernels each, plus three TOTAL rows.
    assert_eq!(lines.clone().count(), 9);
    for line in lines {
        assert_eq!(
            line.split(',').count(),
            CSV_HEADER.split(',').count(),
            "{line}"
        );
    }
    let totals: Vec<&str> = text.lines().filter(|l| l.contains(",TOTAL,")).collect();
    assert_eq!(totals.len(), 3);
    // TOTAL macs: the grouped layer counts twice, 2*28800 + 12800.
    for t in &totals {
        assert!(t.contains(",70400,"), "{t}");
    }

    // Identical seeds mean identical data: the JSON checksums must agree
    // across runs even though the timings differ.
    let parse = |p: &Path| -> Vec<(String, String, Option<String>)> {
        let rows: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        rows.as_array()
            .unwrap()
            .iter()
            .map(|r| {
                (
                    r["layer"].as_str().unwrap().to_string(),
                    r["kernel"].as_str().unwrap().to_string(),
                    r["checksum"].as_str().map(str::to_string),
                )
            })
            .collect()
    };
    let rows1 = parse(&json1);
    let rows2 = parse(&json2);
    assert_eq!(rows1, rows2);
    // Every kernel run on the same layer validated against the same
    // reference, so per-layer checksums agree across kernels.
    for layer in [
        "n1-cin8-cout8-k3x3-s1x1-p1x1-g2-in10x10",
        "n1-cin8-cout16-k1x1-s1x1-p0x0-g1-in10x10",
    ] {
        let sums: Vec<_> = rows1
            .iter()
            .filter(|(l, _, _)| l == layer)
            .map(|(_, _, c)| c.clone().unwrap())
            .collect();
        assert_eq!(sums.len(), 3);
        assert!(sums.windows(2).all(|w| w[0] == w[1]), "{sums:?}");
    }
}

#[test]
fn tune_writes_records_that_bench_applies() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_tiny_table(dir.path());
    let records = dir.path().join("records");

    let out = run(gspc()
        .args([
            "tune", "--budget", "2", "--reps", "1", "--warmup", "0", "--table",
        ])
        .arg(&table)
        .arg("--out")
        .arg(&records));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("tuned 2 of 2 distinct layers"));
    let files: Vec<_> = fs::read_dir(&records).unwrap().collect();
    assert_eq!(files.len(), 2);

    // A second tune run reuses the records.
    let out = run(gspc()
        .args(["tune", "--budget", "2", "--reps", "1", "--table"])
        .arg(&table)
        .arg("--out")
        .arg(&records));
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("cached"));
    assert!(stdout(&out).contains("tuned 0 of 2"));

    // bench applies them, via the environment variable.
    let csv = dir.path().join("tuned.csv");
    let out = run(gspc()
        .args([
            "bench",
            "--reps",
            "1",
            "--warmup",
            "0",
            "--kernels",
            "gspc",
            "--table",
        ])
        .arg(&table)
        .arg("--csv")
        .arg(&csv)
        .env("GSPC_RECORD_DIR", &records));
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    // A record stored under the wrong layer name is rejected, not applied.
    let entries: Vec<_> = fs::read_dir(&records)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    let wrong = records.join("n1-cin8-cout8-k3x3-s1x1-p1x1-g2-in12x12.tune.json");
    let grouped_rec = entries
        .iter()
        .find(|p| {
            p.file_name()
                .unwrap()
                .to_str()
                .unwrap()
                .contains("cin8-cout8")
        })
        .unwrap();
    fs::copy(grouped_rec, &wrong).unwrap();
    let bad_table = dir.path().join("wider.net");
    fs::write(
        &bad_table,
        "gspc-net-table v1\nnetwork t2\nvariant G(2)\ntop1 1\n\
         layer grouped 8 8 3 3 1 1 1 1 2 12 12\n\
         layer pointwise 8 16 1 1 1 1 0 0 1 12 12\n",
    )
    .unwrap();
    let out = run(gspc()
        .args([
            "bench",
            "--reps",
            "1",
            "--warmup",
            "0",
            "--kernels",
            "gspc",
            "--table",
        ])
        .arg(&bad_table)
        .arg("--tuned")
        .arg(&records));
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("key mismatch"), "{}", stderr(&out));
}

#[test]
fn pack_roundtrips_through_the_file_format() {
    use gspc_core::gspc::{pack_kernels, read_packed_kernels};
    use gspc_core::tensor::write_fixture;
    use gspc_core::{ConvParams, PaddingSpec, Shape4, Tensor4};

    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("w.tensor");
    let packed = dir.path().join("w.pack");
    let w = Tensor4::random(Shape4::new(8, 2, 3, 3).unwrap(), 99);
    write_fixture(&weights, &w).unwrap();

    let out = run(gspc()
        .args([
            "pack",
            "--groups",
            "4",
            "--t-o",
            "2",
            "--t-i",
            "1",
            "--weights",
        ])
        .arg(&weights)
        .arg("--out")
        .arg(&packed));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(
        stdout(&out).contains("[4, 1, 2, 3, 3, 1, 2]"),
        "{}",
        stdout(&out)
    );

    let params = ConvParams::new(8, 8, 3, 3, 1, 1, PaddingSpec { h: 0, w: 0 }, 4).unwrap();
    let tiles = gspc_core::TileConfig {
        t_o: 2,
        t_i: 1,
        unroll_kw: false,
    };
    let expect = pack_kernels(&w, &params, &tiles).unwrap();
    let got = read_packed_kernels(&packed).unwrap();
    assert_eq!(got.dims, expect.dims);
    assert_eq!(got.data(), expect.data());

    // Tile sizes that do not divide the channel counts are a usage error.
    let out = run(gspc()
        .args(["pack", "--groups", "4", "--t-o", "3", "--weights"])
        .arg(&weights)
        .arg("--out")
        .arg(&packed));
    assert_eq!(code(&out), 3);
}

#[test]
fn report_prints_totals_and_predictions() {
    let out = run(gspc().args(["report", "--networks", "wrn40_2", "--s-time", "65.0"]));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("328302592"));
    assert!(text.contains("expected=65.00 ms"));
    assert!(text.contains("expected=39.23 ms"));
    assert!(text.contains("expected=8.88 ms"));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let out = run(gspc()
        .args([
            "report",
            "--networks",
            "resnet34",
            "--variants",
            "s,gn",
            "--csv",
        ])
        .arg(&csv));
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("network,variant,top1,params,macs,expected_ms")
    );
    assert_eq!(lines.count(), 2);
    assert!(text.contains("resnet34,G(N),30.16,3132520,557352704,"));

    // Per-layer dumps need an unambiguous target.
    let out = run(gspc().args(["report", "--per-layer"]));
    assert_eq!(code(&out), 3);
}
