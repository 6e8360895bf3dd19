use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use misodof::alpha::rat;
use misodof::dofcalc::{inflate_payload, tight_fresh_symbols, to_json};
use misodof::schemes::build_x5;

fn misodof(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_misodof"));
    cmd.args(args)
        .env("RUST_LOG", "off")
        .env_remove("MISODOF_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("MISODOF_OUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("misodof-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn analyze_reports_exact_values() {
    let o = misodof(&["analyze", "x1", "--alpha", "1/2"], None);
    assert!(o.status.success());
    let text = stdout(&o);
    // (6+5/2)/11 per user, three of them
    assert_eq!(text.matches("= 17/22").count(), 3, "{text}");
    assert!(text.contains("= 51/22"), "{text}");
}

#[test]
fn region_membership_exit_codes() {
    let o = misodof(
        &["region", "theorem3", "--alpha", "0", "--point", "1,1,1"],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "outside");
    let o = misodof(
        &[
            "region",
            "theorem3",
            "--alpha",
            "0",
            "--point",
            "1/2,1/2,1/2",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "inside");
}

#[test]
fn cross_check_names_the_vertex() {
    let o = misodof(&["cross-check", "x5", "theorem3"], None);
    assert!(o.status.success());
    assert!(stdout(&o).contains("matches vertex M_prime"));
    let o = misodof(
        &["cross-check", "x1", "theorem1", "--alphas", "0,1/2,1"],
        None,
    );
    assert!(stdout(&o).contains("matches vertex M"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["analyze", "x9"],
        vec!["analyze", "x1", "--alpha", "3/2"],
        vec!["region", "theorem7"],
        vec!["region", "theorem1", "--point", "1,1,1"],
        vec!["region", "theorem1", "--alpha", "0", "--point", "1,1"],
        vec!["simulate", "/nonexistent/sweep.cfg"],
    ] {
        let o = misodof(&args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(
            String::from_utf8_lossy(&o.stderr).starts_with("error: "),
            "{args:?}"
        );
    }
    assert_eq!(misodof(&["bogus"], None).status.code(), Some(2));
}

#[test]
fn exported_scheme_validates_from_file() {
    let dir = scratch("export");
    let file = dir.join("x5.json");
    let path = file.to_str().unwrap();
    let o = misodof(&["export-scheme", "x5", "--output", path], None);
    assert!(o.status.success());
    let o = misodof(&["validate", path], None);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "x5: valid");
    let from_file = stdout(&misodof(&["analyze", path], None));
    assert_eq!(from_file, stdout(&misodof(&["analyze", "x5"], None)));

    let x5 = build_x5();
    let tight = tight_fresh_symbols(&x5);
    let broken = inflate_payload(&x5, &tight[0].id, &rat(1, 10));
    std::fs::write(&file, to_json(&broken)).unwrap();
    let o = misodof(&["validate", path], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation"));
    assert_eq!(misodof(&["analyze", path], None).status.code(), Some(1));

    std::fs::write(&file, "{ not json").unwrap();
    assert_eq!(misodof(&["validate", path], None).status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn simulate_is_deterministic_and_honours_out_dir() {
    let dir = scratch("sim");
    let cfg = dir.join("sweep.cfg");
    std::fs::write(
        &cfg,
        "scheme=tdma:3\nalpha=1/2\nsnr_db=20,40\ntrials=20\nseed=3\nwindow_db=20,40\noutput=rates.csv\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let out_dir = dir.join("out");
    let a = misodof(&["simulate", cfg], Some(&out_dir));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = std::fs::read_to_string(out_dir.join("rates.csv")).unwrap();
    assert!(first.starts_with("scheme,K,N,alpha,snr_db,user,rate,stderr\n"));
    let b = misodof(&["simulate", cfg], Some(&out_dir));
    assert_eq!(
        first,
        std::fs::read_to_string(out_dir.join("rates.csv")).unwrap()
    );
    assert_eq!(a.stdout, b.stdout);

    let json = dir.join("rates.json");
    let c = misodof(
        &["simulate", cfg, "--output", json.to_str().unwrap()],
        Some(&out_dir),
    );
    assert!(c.status.success());
    assert!(std::fs::read_to_string(&json)
        .unwrap()
        .trim_start()
        .starts_with('{'));
    let _ = std::fs::remove_dir_all(&dir);
}
