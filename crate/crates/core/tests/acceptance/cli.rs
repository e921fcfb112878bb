use std::path::Path;
use std::process::{Command, Output};

fn aclsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aclsim")).args(args).output().unwrap()
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn validate_config_accepts_builtin_and_shipped_file() {
    let builtin = aclsim(&["validate-config"]);
    assert!(builtin.status.success());
    let shipped = aclsim(&[
        "validate-config",
        "--config",
        concat!(env!("CARGO_MANIFEST_DIR"), "/configs/default.json"),
    ]);
    assert!(shipped.status.success());
    assert_eq!(builtin.stdout, shipped.stdout);
}

#[test]
fn set_overrides_reach_the_config() {
    let out = aclsim(&["validate-config", "--set", "diffusion.beta=0.25", "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"beta\": 0.25"));
    assert!(text.contains("\"masterSeed\": 7"));
}

#[test]
fn bad_invocations_fail_with_a_diagnostic() {
    let unknown_flag = aclsim(&["validate-config", "--bogus"]);
    assert!(!unknown_flag.status.success());

    let missing = aclsim(&["validate-config", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: "));

    let bad_key = aclsim(&["validate-config", "--set", "diffusion.gamma=1"]);
    assert_eq!(bad_key.status.code(), Some(1));

    let invalid = aclsim(&["validate-config", "--set", "diffusion.beta=2"]);
    assert_eq!(invalid.status.code(), Some(1));

    let file = tempfile::NamedTempFile::new().unwrap();
    let blocked = file.path().join("sub");
    let unwritable = aclsim(&["generate", "--condition", "H1", "--out", out_arg(&blocked)]);
    assert_eq!(unwritable.status.code(), Some(1));
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = aclsim(&["generate", "--condition", "H3", "--seed", "42", "--out", out_arg(d)]);
        assert!(out.status.success());
        assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
    }
    let ga = std::fs::read(a.join("graph_H3.json")).unwrap();
    let gb = std::fs::read(b.join("graph_H3.json")).unwrap();
    assert_eq!(ga, gb);

    let other = dir.path().join("c");
    assert!(aclsim(&["generate", "--condition", "H3", "--seed", "43", "--out", out_arg(&other)]).status.success());
    assert_ne!(ga, std::fs::read(other.join("graph_H3.json")).unwrap());
}

#[test]
fn sim1_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = aclsim(&["sim1", "--config", "default", "--out", out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 9);

    let csv = std::fs::read_to_string(dir.path().join("sim1.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "masterSeed,condition,method,clusterCount,aclSize,precision,recall,f1,error");
    assert_eq!(lines.len(), 10);
    for cond in ["H1", "H2", "H3"] {
        assert!(dir.path().join(format!("graph_{cond}.json")).exists());
        for method in ["MC", "LE", "LiC"] {
            assert!(dir.path().join(format!("cover_{cond}_{method}.json")).exists());
        }
    }
}

#[test]
fn detect_acl_and_diffuse_run_single_stages() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    let detect = aclsim(&["detect", "--condition", "H2", "--method", "LE", "--out", d]);
    assert!(detect.status.success());
    assert!(dir.path().join("cover_H2_LE.json").exists());

    let acl = aclsim(&["acl", "--condition", "H3", "--method", "LE", "--out", d]);
    assert!(acl.status.success());
    let text = std::fs::read_to_string(dir.path().join("acl_H3_LE.json")).unwrap();
    assert!(text.contains("\"untrustedSeeds\""));

    let diffuse = aclsim(&[
        "diffuse",
        "--condition",
        "H3",
        "--seed-count",
        "75",
        "--fraction-index",
        "2",
        "--out",
        d,
    ]);
    assert!(diffuse.status.success());
    assert!(String::from_utf8_lossy(&diffuse.stdout).starts_with("H3 LE seeds=75 removal=0.666667"));

    let off_grid = aclsim(&["diffuse", "--seed-count", "76", "--out", d]);
    assert_eq!(off_grid.status.code(), Some(1));
}

#[test]
fn diffuse_matches_the_sim2_row() {
    let dir = tempfile::tempdir().unwrap();
    let d = out_arg(dir.path());
    let small = ["--set", "diffusion.replications=3"];
    let sim2 = aclsim(&[&["sim2", "--out", d][..], &small[..]].concat());
    assert!(sim2.status.success());
    let csv = std::fs::read_to_string(dir.path().join("sim2.csv")).unwrap();
    let row: Vec<&str> = csv
        .lines()
        .find(|l| l.starts_with("42,H2,LE,150,0.333333,2,"))
        .unwrap()
        .split(',')
        .collect();

    let one = aclsim(
        &[
            &["diffuse", "--condition", "H2", "--seed-count", "150", "--fraction-index", "1", "--replicate", "2", "--out", d][..],
            &small[..],
        ]
        .concat(),
    );
    assert!(one.status.success());
    let line = String::from_utf8(one.stdout).unwrap();
    assert!(line.contains(&format!("infected={} ", row[8])), "{line} vs {row:?}");
    assert!(line.contains(&format!("fraction={} ", row[11])), "{line} vs {row:?}");
}
