use std::fs;
use std::process::Command;

fn kanbound() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kanbound"))
}

fn tiny_config(dir: &std::path::Path, name: &str) -> std::path::PathBuf {
    let cfg = dir.join(format!("{name}.json"));
    let csv = dir.join(format!("{name}.csv"));
    fs::write(
        &cfg,
        format!(
            r#"{{"setup": "i", "shape": [4, 3, 1], "n_train": 80, "n_test": 40, "epochs": 4,
                "batch_size": 16, "seed": 3, "output_csv": {:?}, "checkpoint": {:?}}}"#,
            csv,
            dir.join(format!("{name}.ckpt.json"))
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let cfg = tiny_config(dir.path(), name);
        let out = kanbound()
            .args(["run", "--config"])
            .arg(&cfg)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(fs::read(dir.path().join(format!("{name}.csv"))).unwrap());
        assert!(dir.path().join(format!("{name}.gp")).exists());
        assert!(dir.path().join(format!("{name}.ckpt.json")).exists());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.starts_with(
        "epoch,train_loss,test_loss,excess_loss,complexity_raw,complexity_normalized,rho_prod,sum_BC23,D,B_1,c_1,rho_1,B_2,c_2,rho_2\n"
    ));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"epochs": 1, "learning_rate": 0.1}"#).unwrap();
    let out = kanbound()
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rate"));
}

#[test]
fn dropout_compare_writes_ratio_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.json");
    let csv = dir.path().join("ratio.csv");
    fs::write(
        &cfg,
        format!(
            r#"{{"shape": [4, 3, 1], "n_train": 60, "n_test": 30, "epochs": 3, "dropout_rate": 0.1,
                "output_csv": {csv:?}}}"#
        ),
    )
    .unwrap();
    let out = kanbound()
        .args(["dropout-compare", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("epoch,complexity_dropout,complexity_plain,ratio,"));
    assert!(dir.path().join("ratio_dropout.csv").exists());
    assert!(dir.path().join("ratio_plain.csv").exists());
}

#[test]
fn bounds_table() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    fs::write(
        &params,
        r#"{"inputs": {"alpha_tilde": 1, "d_tilde": 2, "p_tilde": 2, "n": 10000, "M": 1, "b_max": 1,
                       "epsilon_conf": 0.05, "tau": 0.05, "eta": 0.05, "s": 1.5, "s_prime": 2,
                       "c_prime": 1, "c_dprime": 1},
            "low_rank": {"d": [4, 3, 1], "r": [2, 1], "R": [1, 0.5], "rho": [1.5, 2], "nu": 2, "n": 10000}}"#,
    )
    .unwrap();
    let out = kanbound()
        .args(["bounds", "--params"])
        .arg(&params)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "thm_main ",
        "thm_main2",
        "thm_main3",
        "thm_main4",
        "subexp",
        "zeta0",
        "xi0",
    ] {
        assert!(text.contains(name), "missing {name}:\n{text}");
    }
    // s < 2 rules out the excess-risk corollaries.
    assert!(text
        .lines()
        .any(|l| l.starts_with("cor1") && l.contains("n/a")));
    assert!(text
        .lines()
        .any(|l| l.starts_with("thm_main ") && l.contains("total")));
}

#[test]
fn normalize_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("m.csv");
    fs::write(&csv, "epoch,ex,cx\n1,0.5,1\n2,0.1,2\n3,6,3\n").unwrap();
    let out = kanbound()
        .args(["normalize", "--csv"])
        .arg(&csv)
        .args(["--excess-col", "ex", "--complexity-col", "cx"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "epoch,ex,cx,cx_normalized\n1,0.5,1,0.0\n2,0.1,2,3.0\n3,6,3,6.0\n"
    );
    let out = kanbound()
        .args(["normalize", "--csv"])
        .arg(&csv)
        .args(["--excess-col", "ex", "--complexity-col", "missing"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn verify_passes() {
    let out = kanbound().arg("verify").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
