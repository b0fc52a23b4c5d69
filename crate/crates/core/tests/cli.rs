use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-dfb"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(text: &str) -> &str {
    assert!(text.starts_with("# dirac-dfb "), "missing header: {text}");
    &text[text.find('\n').unwrap() + 1..]
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn threshold_reproduces_uniform_gain() {
    let o = run(&["threshold", "--family", "uniform-gain", "--m0L", "1", "--tol", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: f64 = body(&text)
        .lines()
        .find_map(|l| l.strip_prefix("lambda_c_L = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 1.755).abs() <= 1e-3, "{v}");
    assert!(text.contains("crossing_entry = M22"));
}

#[test]
fn check_passes_on_pt_pair() {
    let o = run(&["check", "--family", "pt-pair", "--m0L", "1", "--lambdaL", "3"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("pt_symmetric = true"));
    assert!(text.contains("all_pass = true"));
}

#[test]
fn check_reports_unitarity_for_hermitian_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "herm.txt",
        "# two-layer grating\ndirac-dfb-structure v1\nsegment length=0.5 mass=1 gain=0 detuning=0.3\nsegment detuning=-0.3 mass=2 gain=0 length=0.7\n",
    );
    let o = run(&["check", "--structure", &f]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("unitarity_defect = "));
    assert!(text.contains("pt_symmetric = false"));
}

#[test]
fn spectrum_rows_are_unitary() {
    let o = run(&[
        "spectrum",
        "--family",
        "uniform-gain",
        "--m0L",
        "1",
        "--lambdaL",
        "0",
        "--emin",
        "-10",
        "--emax",
        "10",
        "--points",
        "2001",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = body(&text).lines();
    assert_eq!(lines.next(), Some("EL,abs_t,arg_t,abs_r_left,abs_r_right"));
    let mut n = 0;
    for l in lines {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] * v[1] + v[3] * v[3] - 1.0).abs() <= 1e-10, "{l}");
        n += 1;
    }
    assert_eq!(n, 2001);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&[
            "spectrum",
            "--family",
            "pt-pair",
            "--m0L",
            "1",
            "--lambdaL",
            "2",
            "--emin",
            "-5",
            "--emax",
            "5",
            "--points",
            "101",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let args = ["zeros", "--family", "uniform-gain", "--m0L", "1", "--lambdaL", "0.8"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn zeros_report_is_json() {
    let o = run(&[
        "zeros",
        "--family",
        "uniform-loss",
        "--m0L",
        "1",
        "--lambdaL",
        "1.9",
        "--entry",
        "m11",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(body(&text)).unwrap();
    let pts = v.as_array().unwrap();
    assert!(!pts.is_empty());
    let bound = pts.iter().filter(|p| p["kind"] == "bound_state").count();
    assert_eq!(bound, 2);
    for p in pts {
        assert_eq!(p["entry"], "M11");
        for k in ["re_EL", "im_EL", "residual"] {
            assert!(p[k].is_f64());
        }
        assert!(p["subtype"].is_null());
    }
}

#[test]
fn reflectionless_singularity_reports_m21() {
    let o = run(&["threshold", "--family", "uniform-loss", "--m0L", "1", "--tol", "1e-6"]);
    let text = stdout(&o);
    let lam = body(&text)
        .lines()
        .find_map(|l| l.strip_prefix("lambda_c_L = "))
        .unwrap()
        .to_string();
    let o = run(&[
        "zeros",
        "--family",
        "uniform-loss",
        "--m0L",
        "1",
        "--lambdaL",
        &lam,
        "--entry",
        "m11",
        "--window",
        "-5,5,-0.5,0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(body(&text)).unwrap();
    let sing: Vec<_> = v
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["kind"] == "spectral_singularity")
        .collect();
    assert_eq!(sing.len(), 2);
    for p in sing {
        assert_eq!(p["subtype"], "reflectionless");
        assert!(p["m21_re"].is_f64() && p["m21_im"].is_f64());
    }
}

#[test]
fn trace_csv() {
    let o = run(&[
        "trace",
        "--family",
        "pt-pair",
        "--m0L",
        "1",
        "--lambda-grid",
        "0,3,4.46,6",
        "--window",
        "-8,8,-4,4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = body(&text).lines();
    assert_eq!(lines.next(), Some("lambdaL,trajectory_id,re_EL,im_EL,entry,kind"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 6));
    assert!(rows.iter().any(|r| r[0].starts_with("6") && r[5] == "bound_state"));
}

#[test]
fn green_outputs() {
    let o = run(&[
        "green",
        "--family",
        "uniform-gain",
        "--m0L",
        "1",
        "--lambdaL",
        "0.5",
        "--E",
        "0.5,0.5",
        "--x",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(body(&text).starts_with("element,re,im\nG11,"));
    let o = run(&[
        "green",
        "--family",
        "uniform-gain",
        "--m0L",
        "1",
        "--lambdaL",
        "0",
        "--scan-singularity",
        "0.3",
        "--side",
        "below",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(body(&text).starts_with("offset,sup_norm\n"));
    assert_eq!(body(&text).lines().count(), 5);
}

#[test]
fn structure_parse_error_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.txt",
        "dirac-dfb-structure v1\nsegment length=1 mass=1 gain=0 detuning=0\nsegment length=oops mass=1 gain=0 detuning=0\n",
    );
    let o = run(&["check", "--structure", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn malformed_arguments_exit_1() {
    for args in [
        &["spectrum", "--family", "pt-pair", "--emax", "1", "--points", "3"][..],
        &["zeros", "--family", "pt-pair", "--window", "1,2,3"],
        &["zeros", "--family", "uniform-gain", "--structure", "x.txt"],
        &["zeros", "--family", "uniform-gain", "--tol", "0.5"],
        &["green", "--family", "uniform-gain", "--E", "0.5,0"],
        &["threshold", "--family", "sideways"],
        &["check", "--structure", "/nonexistent/structure.txt"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn escaping_zero_exits_3() {
    let o = run(&[
        "threshold",
        "--family",
        "uniform-gain",
        "--m0L",
        "1",
        "--window",
        "-20,20,-5,0.1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}
