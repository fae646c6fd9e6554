use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ntlab"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn ntlab")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "tau", "--limit", "5000"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let out = run_in(dir.path(), &["verify", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["verify", "tau", "--limit", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_headers_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["expsum", "--limit", "2048", "--q", "1e7"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/expsum.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "P,P_prime,Q,re,im,abs,n_terms,bound_kl,bound_walfisz_gamma1,ratio_kl,ratio_walfisz"
    );

    let out = run_in(dir.path(), &["verify", "vaaler"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/verify_vaaler.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "check,detail,statistic,threshold,pass");

    let out = run_in(dir.path(), &["verify", "conditions", "--limit", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/verify_conditions.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "condition,x,statistic,implied_constant_or_ratio,verdict"
    );
}

#[test]
fn thread_count_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let sub = dir.path().join(format!("t{threads}"));
        fs::create_dir_all(&sub).unwrap();
        let out = run_in(
            &sub,
            &["expsum", "--limit", "65536", "--q", "3.14159e9", "--threads", threads],
        );
        assert_eq!(out.status.code(), Some(0));
        outputs.push(fs::read(sub.join("out/expsum.csv")).unwrap());

        let out = run_in(
            &sub,
            &[
                "profile", "--family", "sigma_ratio", "--alpha", "0.5+0.5i", "--limit", "50000",
                "--threads", threads, "--seed", "7",
            ],
        );
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        outputs.push(fs::read(sub.join("out/profile.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[2], "expsum bytes differ across thread counts");
    assert_eq!(outputs[1], outputs[3], "profile bytes differ across thread counts");
}

#[test]
fn sieve_cache_roundtrip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sieve", "--limit", "5000", "--family", "tau_alpha", "--alpha", "2"];
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("built:"));

    let cache = dir.path().join(".ntlab-cache");
    let entry = fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let original = fs::read(&entry).unwrap();

    // rerun: cache hit, file untouched
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("cache hit:"));
    assert_eq!(fs::read(&entry).unwrap(), original);

    // corrupt the cache: warning on stderr, rebuild restores identical bytes
    fs::write(&entry, &original[..original.len() / 2]).unwrap();
    let out = run_in(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("built:"));
    assert_eq!(fs::read(&entry).unwrap(), original);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "limit=2048\nq=1e7\nout=from_file\n").unwrap();
    let out = run_in(dir.path(), &["expsum", "--config", "run.conf"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("from_file/expsum.csv").exists());

    // the flag beats the file
    let out = run_in(
        dir.path(),
        &["expsum", "--config", "run.conf", "--out", "from_flag"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("from_flag/expsum.csv").exists());

    let out = run_in(dir.path(), &["expsum", "--config", "missing.conf"]);
    assert_ne!(out.status.code(), Some(0));
}
