use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_nbody-loops"))
        .args(args)
        .current_dir(dir)
        .env("NBODY_THREADS", "2")
        .output()
        .expect("binary runs");
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn central_values_and_validation() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(
        run(d, &["central", "--masses", "1,1,1", "--output", "three"]),
        0
    );
    let v = json(&d.join("three/central.json"));
    assert!((v["value"].as_f64().unwrap() - 9.0).abs() < 1e-6);
    assert_eq!(json(&d.join("three/manifest.json"))["seed"], 0);

    fs::write(d.join("pair.json"), r#"{"masses":[1,1],"dim":1}"#).unwrap();
    assert_eq!(
        run(d, &["central", "--input", "pair.json", "--output", "pair"]),
        0
    );
    assert!(
        (json(&d.join("pair/central.json"))["value"]
            .as_f64()
            .unwrap()
            - 0.5)
            .abs()
            < 1e-8
    );

    assert_eq!(
        run(d, &["central", "--masses", "1,0,1", "--output", "zero"]),
        1
    );
    assert_eq!(
        run(
            d,
            &["central", "--input", "missing.json", "--output", "zero"]
        ),
        1
    );
}

#[test]
fn manifest_file_and_flag_override() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("m.json"),
        r#"{"masses":[1,1],"seed":5,"output":"from_file"}"#,
    )
    .unwrap();
    assert_eq!(
        run(d, &["central", "--manifest", "m.json", "--seed", "9"]),
        0
    );
    let m = json(&d.join("from_file/manifest.json"));
    assert_eq!(m["seed"], 9);
    assert_eq!(json(&d.join("from_file/central.json"))["seed"], 9);
}

#[test]
fn saari_check_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    assert_eq!(
        run(
            d,
            &["rel-equilibrium", "--masses", "1,1,1", "--output", "re"]
        ),
        0
    );
    assert_eq!(
        run(
            d,
            &[
                "saari-check",
                "--input",
                "re/loop.json",
                "--output",
                "rigid"
            ]
        ),
        0
    );
    let report = json(&d.join("rigid/rigidity.json"));
    assert_eq!(report["rigid"], true);
    assert!(report["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["B"].as_f64().unwrap() < 1e-10));
    let spectrum = fs::read_to_string(d.join("rigid/spectrum.csv")).unwrap();
    assert!(spectrum.starts_with("n,re,im,series_value,quadrature_value\n"));
    assert_eq!(spectrum.lines().count(), 10);
    assert!(fs::read_to_string(d.join("rigid/timeseries.csv"))
        .unwrap()
        .starts_with("t,U,I\n"));

    fs::write(
        d.join("b0.json"),
        r#"{"masses":[1,1],"dim":2,"T":6.283185307179586,"a":[[0.5,0],[-0.5,0]],"b":[[0,0],[0,0]]}"#,
    )
    .unwrap();
    assert_eq!(
        run(d, &["saari-check", "--input", "b0.json", "--output", "b0"]),
        3
    );

    fs::write(
        d.join("same.json"),
        r#"{"masses":[1,1],"dim":2,"T":1,"a":[[0.5,0],[0.5,0]],"b":[[0,1],[0,1]]}"#,
    )
    .unwrap();
    assert_eq!(
        run(
            d,
            &["saari-check", "--input", "same.json", "--output", "same"]
        ),
        4
    );
    fs::write(d.join("bad.json"), r#"{"masses":[1,1]}"#).unwrap();
    assert_eq!(
        run(
            d,
            &["saari-check", "--input", "bad.json", "--output", "bad"]
        ),
        1
    );
}

#[test]
fn kronecker_hits() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let s2 = "1.4142135623730951";
    assert_eq!(
        run(
            d,
            &[
                "kronecker",
                "--theta",
                s2,
                "--epsilon",
                "0.01",
                "--k-max",
                "200",
                "--output",
                "a"
            ]
        ),
        0
    );
    let csv = fs::read_to_string(d.join("a/hits.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("169,")));

    assert_eq!(
        run(
            d,
            &[
                "kronecker",
                "--theta",
                "0.5",
                "--epsilon",
                "0.1",
                "--k-max",
                "10",
                "--output",
                "b"
            ]
        ),
        0
    );
    let csv = fs::read_to_string(d.join("b/hits.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("2,0.0"));

    assert_eq!(
        run(
            d,
            &[
                "kronecker",
                "--theta",
                s2,
                "--epsilon",
                "1e-9",
                "--k-max",
                "10",
                "--output",
                "c"
            ]
        ),
        5
    );
    assert_eq!(run(d, &["kronecker", "--theta", s2, "--output", "c"]), 1);
}

#[test]
fn minimize_action_outputs_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let args = [
        "minimize-action",
        "--masses",
        "1,1",
        "--seed",
        "3",
        "--output",
    ];
    assert_eq!(run(d, &[&args[..], &["one"]].concat()), 0);
    assert_eq!(run(d, &[&args[..], &["two"]].concat()), 0);
    for name in ["loop.json", "report.json", "trajectory.csv"] {
        assert_eq!(
            fs::read(d.join("one").join(name)).unwrap(),
            fs::read(d.join("two").join(name)).unwrap()
        );
    }
    let report = json(&d.join("one/report.json"));
    let gap = report["gap"].as_f64().unwrap() / report["lower_bound"].as_f64().unwrap();
    assert!(gap.abs() < 1e-3);
    assert_eq!(report["seed"], 3);

    assert_eq!(
        run(
            d,
            &[
                "minimize-action",
                "--masses",
                "1,1",
                "--order",
                "0",
                "--output",
                "bad"
            ]
        ),
        1
    );
}

#[test]
fn rel_equilibrium_with_period() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("pair.json"),
        r#"{"masses":[1,1],"dim":2,"positions":[[0.5,0],[-0.5,0]]}"#,
    )
    .unwrap();
    assert_eq!(
        run(
            d,
            &[
                "rel-equilibrium",
                "--input",
                "pair.json",
                "--period",
                "6.283185307179586",
                "--output",
                "o"
            ]
        ),
        0
    );
    let lp = json(&d.join("o/loop.json"));
    let a = &lp["a"];
    let sep = (a[0][0].as_f64().unwrap() - a[1][0].as_f64().unwrap())
        .hypot(a[0][1].as_f64().unwrap() - a[1][1].as_f64().unwrap());
    assert!((sep - 2f64.cbrt()).abs() < 1e-12);

    fs::write(
        d.join("off.json"),
        r#"{"masses":[1,1,1],"positions":[[0,0],[1,0],[0,3]]}"#,
    )
    .unwrap();
    assert_eq!(
        run(
            d,
            &["rel-equilibrium", "--input", "off.json", "--output", "p"]
        ),
        2
    );
}
