use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mtfse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtfse")).args(args).output().expect("binary runs")
}

fn run_with(dir: &Path, sub: &str, config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.toml"));
    fs::write(&cfg, config).unwrap();
    let out_dir = dir.join(out);
    mtfse(&[sub, "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap(), "--threads", "2"])
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const LINEAR: &str = "\
[problem]
kind = \"linear\"
alpha = 1.0

[potential]
kind = \"inverse_quadratic\"

[initial]
kind = \"sech\"

[discretization]
n = 16
nu = 4.0

[time]
tau = 0.125
t_final = 1.0
integrator = \"sm2\"
";

#[test]
fn solve_writes_tables_and_reproduces_from_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), "solve", LINEAR, "a");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = dir.path().join("a");
    let solution = fs::read_to_string(a.join("solution.csv")).unwrap();
    assert!(solution.starts_with("x,re_psi,im_psi,abs_psi\n"));
    assert!(fs::read_to_string(a.join("coeffs.csv")).unwrap().starts_with("k,abs_coeff\n"));
    let mass = rows(&a.join("mass.csv"));
    assert_eq!(mass.len(), 9);
    assert!(mass.iter().all(|r| r[2] < 1e-12));
    assert_eq!(fs::read_dir(a.join("snapshots")).unwrap().count(), 9);

    // re-run from the echoed config
    let echo = fs::read_to_string(a.join("run.toml")).unwrap();
    assert!(echo.contains("[run_meta]") && echo.contains("reference_n = 256"));
    let out = run_with(dir.path(), "solve", &echo, "b");
    assert!(out.status.success());
    let b = dir.path().join("b");
    for name in ["solution.csv", "mass.csv", "coeffs.csv", "snapshots/solution_0000004.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn space_convergence_is_exponential_at_alpha_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LINEAR.replace("\"sm2\"", "\"exact\"") + "\n[sweep]\nn_values = [8, 16, 32]\nreference_n = 64\n";
    let out = run_with(dir.path(), "converge-space", &cfg, "s");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("s/convergence.csv"));
    assert_eq!(r.iter().map(|x| x[0]).collect::<Vec<_>>(), vec![8.0, 16.0, 32.0]);
    assert!(r.windows(2).all(|w| w[0][1] / w[1][1] >= 10.0), "{r:?}");
}

#[test]
fn time_convergence_of_strang_splitting() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LINEAR.replace("\"sm2\"", "\"sm1\"") + "\n[sweep]\ntau_values = [0.25, 0.125, 0.0625]\n";
    let out = run_with(dir.path(), "converge-time", &cfg, "t");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("t/convergence.csv"));
    for w in r.windows(2) {
        let q = w[0][1] / w[1][1];
        assert!((q - 4.0).abs() < 0.5, "{r:?}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("fitted slope"));
}

#[test]
fn stability_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LINEAR.to_string()
        + "\n[stability]\ny_imag = [2.0, 5.0]\nre_range = [-1.0, 1.0]\nim_range = [-1.0, 1.0]\npoints = 3\n";
    let out = run_with(dir.path(), "stability", &cfg, "st");
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("st/stability_0.csv")).unwrap();
    assert!(text.starts_with("re_x,im_x,inside\n"));
    let r = rows(&dir.path().join("st/stability_1.csv"));
    assert_eq!(r.len(), 9);
    // centre point x = 0 is on the stable side, x = 1 is not
    assert_eq!(r[4][..2], [0.0, 0.0]);
    assert_eq!(r[4][2], 1.0);
    assert_eq!(r[5][2], 0.0);
}

#[test]
fn approx_compare_and_expm_bench() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = LINEAR.to_string() + "\n[sweep]\nn_values = [8, 16]\n\n[expm]\nsizes = [16, 32]\nspreads = [5.0]\n";
    let out = run_with(dir.path(), "approx-compare", &cfg, "ap");
    assert!(out.status.success());
    let mtf = rows(&dir.path().join("ap/convergence_mtf.csv"));
    let mcf = rows(&dir.path().join("ap/convergence_mcf.csv"));
    assert!(mtf[1][1] < mtf[0][1] && mcf[1][1] < mcf[0][1]);
    let out = run_with(dir.path(), "expm-bench", &cfg, "ex");
    assert!(out.status.success());
    let r = rows(&dir.path().join("ex/expm_0.csv"));
    assert!(r.iter().all(|x| x[1] < 1e-12), "{r:?}");
}

#[test]
fn nonlinear_mass_is_tracked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "\
[problem]
kind = \"nonlinear\"
alpha = 1.99

[initial]
kind = \"gaussian\"

[discretization]
n = 32

[time]
tau = 0.01
t_final = 0.5
integrator = \"krogstad_p22\"

[output]
files = [\"mass_csv\"]
";
    let out = run_with(dir.path(), "solve", cfg, "nl");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("nl/solution.csv").exists());
    let r = rows(&dir.path().join("nl/mass.csv"));
    assert_eq!(r.len(), 51);
    assert!(r.iter().all(|x| x[2] <= 1e-9), "{r:?}");
}

#[test]
fn unstable_step_reports_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "\
[problem]
kind = \"nonlinear\"
alpha = 1.0

[initial]
kind = \"sech\"

[discretization]
n = 32
nu = 1.0

[time]
tau = 4.0
t_final = 400.0
integrator = \"krogstad_p22\"
";
    let out = run_with(dir.path(), "solve", cfg, "bu");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up detected at t = "));
    let meta = fs::read_to_string(dir.path().join("bu/run.toml")).unwrap();
    assert!(meta.contains("status = \"blow-up detected"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with(dir.path(), "solve", &LINEAR.replace("nu = 4.0", "nu = 4.0\nmu = 1"), "bad");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 14") && err.contains("mu"), "{err}");
    let out = run_with(dir.path(), "solve", &LINEAR.replace("\"sm2\"", "\"krogstad\""), "bad2");
    assert_eq!(out.status.code(), Some(1));
    let out = mtfse(&["solve", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
}
