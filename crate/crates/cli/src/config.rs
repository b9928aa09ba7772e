//! Experiment configuration: a sectioned TOML file with every key spelled out
//! in lower_snake_case. Unknown keys are errors. Omitted keys take the defaults
//! below, and the resolved config is what gets echoed into the run sidecar.

use std::fmt;
use std::path::Path;

use mtfse::problem::{InitialData, Potential};
use mtfse::stepper::SchemeName;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Largest `N` used by default sweeps.
pub const DEFAULT_SWEEP_CAP: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    None,
    InverseQuadratic,
    GaussianBarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Sech,
    Gaussian,
    GaussianChirp,
    Rational,
    Rational2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Exact,
    Sm1,
    Sm2,
    Sm3,
    KrogstadP22,
}

impl IntegratorKind {
    pub fn splitting(self) -> Option<SchemeName> {
        match self {
            IntegratorKind::Sm1 => Some(SchemeName::Sm1),
            IntegratorKind::Sm2 => Some(SchemeName::Sm2),
            IntegratorKind::Sm3 => Some(SchemeName::Sm3),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::enum_variant_names)]
pub enum OutputKind {
    SolutionCsv,
    MassCsv,
    ConvergenceCsv,
    StabilityCsv,
    CoeffsCsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default = "default_potential")]
    pub kind: PotentialKind,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default = "default_distance")]
    pub distance: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { kind: default_potential(), height: default_height(), distance: default_distance() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationSection {
    pub n: usize,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub tau: f64,
    pub t_final: f64,
    pub integrator: IntegratorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Empty means every file the subcommand can produce.
    #[serde(default = "default_outputs")]
    pub files: Vec<OutputKind>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { files: default_outputs() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_reference_n")]
    pub reference_n: usize,
    #[serde(default = "default_tau_values")]
    pub tau_values: Vec<f64>,
    /// Nonlinear time references only; linear ones use the exact propagator.
    #[serde(default = "default_reference_tau")]
    pub reference_tau: f64,
    /// `N` of the nonlinear time reference; 0 means the test `N`.
    #[serde(default)]
    pub reference_time_n: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            n_values: default_n_values(),
            reference_n: default_reference_n(),
            tau_values: default_tau_values(),
            reference_tau: default_reference_tau(),
            reference_time_n: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    #[serde(default = "default_y_imag")]
    pub y_imag: Vec<f64>,
    /// Real parts of `y`; empty means all zero.
    #[serde(default)]
    pub y_real: Vec<f64>,
    #[serde(default = "default_re_range")]
    pub re_range: [f64; 2],
    #[serde(default = "default_im_range")]
    pub im_range: [f64; 2],
    #[serde(default = "default_points")]
    pub points: usize,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            y_imag: default_y_imag(),
            y_real: Vec::new(),
            re_range: default_re_range(),
            im_range: default_im_range(),
            points: default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpmSection {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Values of `|lambda| (eta - zeta) / 2` for `H = gamma A + M`.
    #[serde(default = "default_spreads")]
    pub spreads: Vec<f64>,
}

impl Default for ExpmSection {
    fn default() -> Self {
        Self { sizes: default_sizes(), spreads: default_spreads() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub potential: PotentialSection,
    pub initial: InitialSection,
    pub discretization: DiscretizationSection,
    pub time: TimeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub stability: StabilitySection,
    #[serde(default)]
    pub expm: ExpmSection,
    /// Written by the runner into the sidecar; ignored on input.
    #[serde(default, skip_serializing)]
    pub run_meta: Option<toml::Table>,
}

fn default_gamma() -> f64 {
    0.5
}
fn default_potential() -> PotentialKind {
    PotentialKind::None
}
fn default_height() -> f64 {
    100.0
}
fn default_distance() -> f64 {
    10.0
}
fn default_nu() -> f64 {
    4.0
}
fn default_outputs() -> Vec<OutputKind> {
    Vec::new()
}
fn default_n_values() -> Vec<usize> {
    vec![8, 16, 32, 64, 128]
}
fn default_reference_n() -> usize {
    DEFAULT_SWEEP_CAP
}
fn default_tau_values() -> Vec<f64> {
    (3..=8).map(|k| 2f64.powi(-k)).collect()
}
fn default_reference_tau() -> f64 {
    1e-4
}
fn default_y_imag() -> Vec<f64> {
    vec![2.0, 5.0, 10.0]
}
fn default_re_range() -> [f64; 2] {
    [-8.0, 4.0]
}
fn default_im_range() -> [f64; 2] {
    [-8.0, 8.0]
}
fn default_points() -> usize {
    121
}
fn default_sizes() -> Vec<usize> {
    vec![16, 32, 64, 128]
}
fn default_spreads() -> Vec<f64> {
    vec![1.0, 10.0, 50.0]
}

/// A validation failure tied to a key.
#[derive(Debug, Clone, PartialEq)]
pub struct Invalid {
    pub section: &'static str,
    pub key: &'static str,
    pub message: String,
}

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.section, self.key, self.message)
    }
}

fn invalid(section: &'static str, key: &'static str, message: impl Into<String>) -> Invalid {
    Invalid { section, key, message: message.into() }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            CliError::Config { line, message: e.message().to_string() }
        })?;
        cfg.validate()
            .map_err(|v| CliError::Config { line: locate(text, v.section, v.key), message: v.to_string() })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        Self::parse(&text)
    }

    /// The resolved config as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), Invalid> {
        let p = &self.problem;
        if !(p.alpha > 0.0 && p.alpha < 2.0) {
            return Err(invalid("problem", "alpha", format!("must lie in (0, 2), got {}", p.alpha)));
        }
        if p.gamma == 0.0 || !p.gamma.is_finite() {
            return Err(invalid("problem", "gamma", "must be finite and nonzero"));
        }
        if self.discretization.n < 4 {
            return Err(invalid("discretization", "n", format!("must be at least 4, got {}", self.discretization.n)));
        }
        if !(self.discretization.nu > 0.0 && self.discretization.nu.is_finite()) {
            return Err(invalid("discretization", "nu", "must be positive"));
        }
        let t = &self.time;
        if !(t.tau > 0.0 && t.tau.is_finite()) {
            return Err(invalid("time", "tau", format!("must be positive, got {}", t.tau)));
        }
        if !(t.t_final >= 0.0 && t.t_final.is_finite()) {
            return Err(invalid("time", "t_final", "must be nonnegative"));
        }
        if mtfse::problem::step_count(t.tau, t.t_final).is_err() {
            return Err(invalid("time", "t_final", format!("must be an integer multiple of tau = {}", t.tau)));
        }
        if p.kind == ProblemKind::Nonlinear {
            if t.integrator != IntegratorKind::KrogstadP22 {
                return Err(invalid("time", "integrator", "the nonlinear problem requires krogstad_p22"));
            }
            if self.potential.kind != PotentialKind::None {
                return Err(invalid("potential", "kind", "the nonlinear problem takes no potential"));
            }
        }
        if self.initial.kind == InitialKind::GaussianChirp && self.initial.kappa.is_none() {
            return Err(invalid("initial", "kappa", "gaussian_chirp needs kappa"));
        }
        if self.initial.kind != InitialKind::GaussianChirp && self.initial.kappa.is_some() {
            return Err(invalid("initial", "kappa", "only gaussian_chirp takes kappa"));
        }
        let s = &self.sweep;
        if s.n_values.iter().any(|&n| n < 4) {
            return Err(invalid("sweep", "n_values", "every N must be at least 4"));
        }
        if s.reference_n < 4 {
            return Err(invalid("sweep", "reference_n", "must be at least 4"));
        }
        if s.reference_time_n != 0 && s.reference_time_n < 4 {
            return Err(invalid("sweep", "reference_time_n", "must be 0 or at least 4"));
        }
        // divisibility of t_final is checked when a sweep actually runs
        if s.tau_values.iter().chain([&s.reference_tau]).any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(invalid("sweep", "tau_values", "time steps must be positive"));
        }
        let st = &self.stability;
        if !st.y_real.is_empty() && st.y_real.len() != st.y_imag.len() {
            return Err(invalid("stability", "y_real", "must be empty or as long as y_imag"));
        }
        if st.points < 2 {
            return Err(invalid("stability", "points", "must be at least 2"));
        }
        if st.re_range[1] <= st.re_range[0] {
            return Err(invalid("stability", "re_range", "must be increasing"));
        }
        if st.im_range[1] <= st.im_range[0] {
            return Err(invalid("stability", "im_range", "must be increasing"));
        }
        if self.expm.sizes.iter().any(|s| s % 2 != 0 || *s < 8) {
            return Err(invalid("expm", "sizes", "sizes are 2N and must be even and at least 8"));
        }
        if self.expm.spreads.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(invalid("expm", "spreads", "spreads must be positive"));
        }
        Ok(())
    }

    pub fn initial_data(&self) -> InitialData {
        match self.initial.kind {
            InitialKind::Sech => InitialData::Sech,
            InitialKind::Gaussian => InitialData::Gaussian,
            InitialKind::GaussianChirp => InitialData::GaussianChirp { kappa: self.initial.kappa.unwrap_or(0.0) },
            InitialKind::Rational => InitialData::Rational,
            InitialKind::Rational2 => InitialData::Rational2,
        }
    }

    pub fn potential(&self) -> Potential {
        match self.potential.kind {
            PotentialKind::None => Potential::None,
            PotentialKind::InverseQuadratic => Potential::InverseQuadratic,
            PotentialKind::GaussianBarrier => {
                Potential::GaussianBarrier { height: self.potential.height, distance: self.potential.distance }
            }
        }
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.output.files.is_empty() || self.output.files.contains(&kind)
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]`, else of the section header.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut in_section = false;
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            in_section = line.trim_start_matches('[').trim_end_matches(']').trim() == section;
            if in_section {
                header = Some(i + 1);
            }
            continue;
        }
        if in_section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}
