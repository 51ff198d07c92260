use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CONTRAST9: &str = r#"
[cavity]
[cavity.coefficients]
rho_out = 1.0
rho_in = 1.0
tau = 1.0
g_out = 1.0
g_in = 0.1111111111111111
"#;

const WINDOW: &str = r#"
[scan]
re_min = 8.0
re_max = 14.0
im_min = -0.1
im_max = -1e-9
m_max = 30
"#;

struct Run {
    dir: TempDir,
}

impl Run {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("run.toml"), config).unwrap();
        Run { dir }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn cmd(&self, sub: &str, extra: &[&str]) -> Command {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_plasmon"));
        cmd.arg(sub).arg("-c").arg(self.dir.path().join("run.toml")).args(extra);
        cmd.env_remove("OUTPUT_DIR");
        cmd
    }

    fn exec(&self, sub: &str, extra: &[&str]) -> Output {
        let out = self.out();
        let mut cmd = self.cmd(sub, extra);
        cmd.arg("--out").arg(out);
        cmd.output().unwrap()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn check_schema(name: &str, instance: &Value) {
    if let Err(e) = jsonschema::validate(&schema(name), instance) {
        panic!("{name}: {e}");
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn classify_regimes() {
    for (n, regime, exit) in [(3.0, "plasmonic", 0), (0.5, "non_plasmonic", 0), (1.0, "degenerate", 2)] {
        let run = Run::new(&format!("[cavity]\nn = {n:?}\n"));
        let o = run.exec("classify", &[]);
        assert_eq!(code(&o), exit, "n={n}");
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["regime"], regime);
        assert_eq!(run.json("classify.json"), v);
        check_schema("classify", &v);
        check_schema("meta", &run.json("classify.meta.json"));
        if exit == 2 {
            assert!(String::from_utf8_lossy(&o.stderr).contains("jump condition"));
        }
    }
}

#[test]
fn solve_contrast9_rows() {
    let run = Run::new(&format!("{CONTRAST9}{WINDOW}"));
    let o = run.exec("solve", &["-j", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&run.read("resonances.csv"));
    assert_eq!(rows[0], ["m", "re_lambda", "im_lambda", "multiplicity", "residual", "newton_iters"]);
    let values: Vec<(f64, f64)> = rows[1..].iter().map(|r| (r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert!(values.windows(2).all(|w| w[0].0 <= w[1].0));
    let near = |re: f64, im: f64, tol: f64| values.iter().any(|&(a, b)| (a - re).hypot(b - im) <= tol);
    assert!(near(8.4647, -1.0396e-2, 1e-3));
    assert!(near(13.145, -8.5412e-4, 1e-2));
    check_schema("resonances", &run.json("resonances.json"));
    check_schema("failures", &run.json("solve.failures.json"));
    check_schema("meta", &run.json("solve.meta.json"));
}

#[test]
fn solve_index3_window() {
    let run = Run::new(&format!("[cavity]\nn = 3.0\n{WINDOW}"));
    let o = run.exec("solve", &[]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&run.read("resonances.csv"));
    for r in &rows[1..] {
        let im: f64 = r[2].parse().unwrap();
        assert!((-0.1..0.0).contains(&im));
    }
}

#[test]
fn solve_non_plasmonic_is_header_only() {
    let run = Run::new(&format!("[cavity]\nn = 0.5\n{WINDOW}"));
    let o = run.exec("solve", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(run.read("resonances.csv"), "m,re_lambda,im_lambda,multiplicity,residual,newton_iters\n");
}

#[test]
fn solve_is_deterministic_across_threads() {
    let config = "[cavity]\nn = 3.0\n[scan]\nre_min = 1.0\nre_max = 25.0\nim_min = -0.5\nm_max = 30\n";
    let one = Run::new(config);
    let many = Run::new(config);
    assert_eq!(code(&one.exec("solve", &["-j", "1"])), 0);
    assert_eq!(code(&many.exec("solve", &["-j", "8"])), 0);
    for name in ["resonances.csv", "resonances.json", "solve.failures.json"] {
        assert_eq!(one.read(name), many.read(name), "{name}");
    }
    assert!(csv_rows(&one.read("resonances.csv")).len() > 10);
}

#[test]
fn count_outputs() {
    let run = Run::new("[cavity]\nn = 3.0\n[count]\nlambda = 40.0\n");
    let o = run.exec("count", &["-j", "4"]);
    assert_eq!(code(&o), 0);
    let v = run.json("count.json");
    check_schema("count", &v);
    assert!((v["predicted"].as_f64().unwrap() - 97.98).abs() < 1e-2);
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((0.9..=1.1).contains(&ratio));

    let run = Run::new("[cavity]\nn = 3.0\n[count]\nlambda = 0.0\n");
    assert_eq!(code(&run.exec("count", &[])), 0);
    let v = run.json("count.json");
    assert_eq!((v["exact"].as_u64(), v["predicted"].as_f64(), v["ratio"].is_null()), (Some(0), Some(0.0), true));

    let run = Run::new("[cavity]\nn = 0.5\n[count]\nlambda = 40.0\n");
    assert_eq!(code(&run.exec("count", &[])), 2);
}

#[test]
fn count_on_curve_has_no_exact_value() {
    let run = Run::new("[cavity]\nn = 3.0\ngeometry = \"ellipse\"\nsemi_axes = [2.0, 1.0]\n[count]\nlambda = 10.0\n");
    assert_eq!(code(&run.exec("count", &[])), 0);
    let v = run.json("count.json");
    check_schema("count", &v);
    assert!(v["exact"].is_null() && v["predicted"].as_f64().unwrap() > 0.0);
}

#[test]
fn disp_values() {
    let run = Run::new("[cavity]\nn = 3.0\n[disp]\nmodes = [16]\n");
    assert_eq!(code(&run.exec("disp", &[])), 0);
    let v = run.json("disp.json");
    check_schema("disp", &v);
    let row = &v[0];
    assert!((row["principal"].as_f64().unwrap() - 13.0639).abs() < 1e-4);
    assert!((row["camo_formula"].as_f64().unwrap() - 10.667).abs() < 1e-3);
    assert!((row["exact_re"].as_f64().unwrap() - 12.466_579_6).abs() < 1e-6);
    let rows = csv_rows(&run.read("disp.csv"));
    assert_eq!(rows[0], ["m", "principal", "corrected", "camo_formula", "exact_re", "exact_im"]);
}

#[test]
fn field_outputs() {
    let run = Run::new("[cavity]\nn = 3.0\n[field]\nm = 16\n[output]\nformats = [\"csv\", \"json\", \"svg\"]\n");
    let o = run.exec("field", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = run.json("localization.json");
    check_schema("localization", &v);
    assert_eq!(v["m"], 16);
    let rows = csv_rows(&run.read("field.csv"));
    assert_eq!(rows[0], ["r", "theta", "re_u", "im_u", "log_abs_u"]);
    assert!(rows[1..].iter().all(|r| r.len() == 5));
    assert!(run.read("field.svg").starts_with("<svg"));
    check_schema("meta", &run.json("field.meta.json"));
}

#[test]
fn field_needs_mode() {
    let run = Run::new("[cavity]\nn = 3.0\n");
    assert_eq!(code(&run.exec("field", &[])), 1);
}

#[test]
fn bad_config_exits_one() {
    for text in
        ["[cavity]\nn = \"three\"\n", "[cavity]\nn = 3.0\nbogus = 1\n", "[cavity]\nn = 3.0\n[scan]\nim_max = 0.0\n"]
    {
        let run = Run::new(text);
        assert_eq!(code(&run.exec("solve", &[])), 1, "{text}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_plasmon")).args(["solve", "-c", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn output_dir_from_environment() {
    let run = Run::new("[cavity]\nn = 3.0\n[output]\ndir = \"ignored\"\n");
    let target = run.dir.path().join("env_out");
    let o = run.cmd("classify", &[]).current_dir(run.dir.path()).env("OUTPUT_DIR", &target).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("classify.json").is_file());
    assert!(!run.dir.path().join("ignored").exists());
}

#[test]
fn outputs_use_lf_line_endings() {
    let run = Run::new(&format!("{CONTRAST9}{WINDOW}"));
    assert_eq!(code(&run.exec("solve", &[])), 0);
    for name in ["resonances.csv", "resonances.json", "solve.meta.json"] {
        let text = run.read(name);
        assert!(!text.contains('\r') && text.ends_with('\n'), "{name}");
    }
}

#[test]
fn selftest_passes() {
    let o = Command::new(env!("CARGO_BIN_EXE_plasmon")).arg("selftest").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().count() >= 5 && !text.contains("FAIL"));
}
