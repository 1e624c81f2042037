use std::path::Path;
use std::process::{Command, Output};

use semisort::format::{decode_records, encode_records, read_file, write_file};
use semisort_core::Record;

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semisort"))
        .args(args)
        .args(["--threads", "2"])
        .current_dir(dir)
        .env_remove("SEMISORT_LIGHT_BITS")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_sort_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&cli(&["gen", "--dist", "zipfian:1.1", "-n", "30000", "--key-bits", "32", "--value-bits", "32", "--out", "in.bin"], d));
    for mode in ["eq", "lt"] {
        let out = cli(&["sort", "--in", "in.bin", "--out", "out.bin", "--mode", mode, "--verify", "--alpha", "1024"], d);
        ok(&out);
        let a = decode_records::<u32, u32>(&read_file(&d.join("in.bin")).unwrap()).unwrap();
        let b = decode_records::<u32, u32>(&read_file(&d.join("out.bin")).unwrap()).unwrap();
        assert_eq!(a.len(), b.len());
    }
}

#[test]
fn histogram_and_reduce_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let recs: Vec<Record<u64, u64>> = [(5, 1), (7, 10), (5, 2), (9, 100), (5, 4)].map(|(k, v)| Record::new(k, v)).to_vec();
    write_file(&d.join("r.bin"), &encode_records(&recs)).unwrap();
    let text = ok(&cli(&["histogram", "--in", "r.bin", "--verify"], d));
    let mut lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.remove(0), "key,aggregate");
    lines.sort();
    assert_eq!(lines, ["5,3", "7,1", "9,1"]);

    ok(&cli(&["reduce", "--in", "r.bin", "--out", "sum.csv", "--verify"], d));
    let text = std::fs::read_to_string(d.join("sum.csv")).unwrap();
    let mut lines: Vec<&str> = text.lines().skip(1).collect();
    lines.sort();
    assert_eq!(lines, ["5,7", "7,10", "9,100"]);
}

#[test]
fn reduce_rejects_key_only_records() {
    let dir = tempfile::tempdir().unwrap();
    write_file(&dir.path().join("k.bin"), &encode_records(&[Record::new(1u64, ())])).unwrap();
    let out = cli(&["reduce", "--in", "k.bin"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn transpose_edge_list_and_binary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("g.txt"), "0 1\n0 2\n2 1\n").unwrap();
    ok(&cli(&["transpose", "--in", "g.txt", "--out", "t.csr", "--verify"], d));
    ok(&cli(&["transpose", "--in", "t.csr", "--out", "back.txt", "--verify"], d));
    let back = std::fs::read_to_string(d.join("back.txt")).unwrap();
    let edges: Vec<&str> = back.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(edges, ["0 1", "0 2", "2 1"]);
}

#[test]
fn ngram_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("t.txt"), "The cat. the dog").unwrap();
    let text = ok(&cli(&["ngram", "--in", "t.txt", "--gram-size", "2", "--verify"], d));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "key,next");
    let the: Vec<&str> = lines.iter().copied().filter(|l| l.starts_with("the,")).collect();
    assert_eq!(the, ["the,cat", "the,dog"]);
    assert_eq!(lines.len(), 4);
}

#[test]
fn bench_appends_rows_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for algo in ["int-eq", "histogram"] {
        ok(&cli(&["bench", "--algo", algo, "--dist", "uniform:1000", "-n", "20000", "--reps", "2", "--verify", "--out", "b.csv"], d));
    }
    let rows = semisort::bench::read_bench_rows(std::fs::File::open(d.join("b.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.verified == Some(true) && r.threads == 2));
}

#[test]
fn env_overrides_tuning() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&cli(&["gen", "--dist", "uniform:10", "-n", "100", "--out", "in.bin"], d));
    let out = Command::new(env!("CARGO_BIN_EXE_semisort"))
        .args(["sort", "--in", "in.bin", "--out", "o.bin"])
        .env("SEMISORT_LIGHT_BITS", "99")
        .current_dir(d)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("light_bits"));
}

#[test]
fn stats_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&cli(&["stats", "--dist", "uniform:10", "-n", "100000"], dir.path()));
    assert_eq!(text.lines().nth(1).unwrap(), "100000,10,10100,1");
}

#[test]
fn missing_input_is_an_error_with_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["sort", "--in", "absent.bin", "--out", "o.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.bin"));
}
