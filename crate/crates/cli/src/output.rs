//! CSV tables. Floats carry 17 significant digits; lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mtfse::basis::{synthesize, SpectralState};
use mtfse::diagnostics::default_probe;
use num_complex::Complex64;

use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
    }
    fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

/// Collects the files written by a run.
#[derive(Debug, Default)]
pub struct Writer {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Writer {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), written: Vec::new() }
    }

    pub fn put(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        write_file(&self.dir.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// `x,re_psi,im_psi,abs_psi` on the resolved mapped grid.
pub fn solution_csv(u: &SpectralState) -> Result<String, CliError> {
    let xs = default_probe(u, u)?;
    let vals = synthesize(u, &xs);
    let mut s = String::from("x,re_psi,im_psi,abs_psi\n");
    for (x, v) in xs.iter().zip(&vals) {
        writeln!(s, "{},{},{},{}", num(*x), num(v.re), num(v.im), num(v.norm())).unwrap();
    }
    Ok(s)
}

/// `t,mass,mass_error`.
pub fn mass_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut s = String::from("t,mass,mass_error\n");
    for (t, m, e) in rows {
        writeln!(s, "{},{},{}", num(*t), num(*m), num(*e)).unwrap();
    }
    s
}

/// `param,max_error`.
pub fn convergence_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("param,max_error\n");
    for (p, e) in rows {
        writeln!(s, "{},{}", num(*p), num(*e)).unwrap();
    }
    s
}

/// `k,abs_coeff` for every retained index.
pub fn coeffs_csv(u: &SpectralState) -> String {
    let mut s = String::from("k,abs_coeff\n");
    for k in u.indices() {
        writeln!(s, "{k},{}", num(u.get(k).norm())).unwrap();
    }
    s
}

/// `re_x,im_x,inside`, with `inside` as 0 or 1.
pub fn stability_csv(grid: &[Complex64], inside: &[bool]) -> String {
    let mut s = String::from("re_x,im_x,inside\n");
    for (x, m) in grid.iter().zip(inside) {
        writeln!(s, "{},{},{}", num(x.re), num(x.im), u8::from(*m)).unwrap();
    }
    s
}
