use mtfse::basis::{analyze, mcf_analyze, mcf_synthesize, synthesize, SpectralState, ThetaGrid};
use mtfse::diagnostics::{fit_order, mass, max_error_default, PROBE_EXTENT};
use mtfse::expm::{cheb_expm, eig_expm, unitarity_defect};
use mtfse::linalg::{gershgorin_bounds, max_abs_diff};
use mtfse::problem::{step_count, LinearIntegrator, LinearProblem, NonlinearProblem, RunOutcome};
use mtfse::stepper::{imaginary_axis_interval, krogstad_p22_step, stability_region, KrogstadTables};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, IntegratorKind, OutputKind, ProblemKind};
use crate::error::CliError;
use crate::output::{coeffs_csv, convergence_csv, mass_csv, solution_csv, stability_csv, Writer};

/// Final state of a time integration, or the last good state before the guard fired.
pub struct Evolution {
    pub state: SpectralState,
    pub blow_up: Option<f64>,
}

fn linear(cfg: &ExperimentConfig, n_modes: usize) -> LinearProblem {
    LinearProblem {
        alpha: cfg.problem.alpha,
        gamma: cfg.problem.gamma,
        potential: cfg.potential(),
        initial: cfg.initial_data(),
        n_modes,
        nu: cfg.discretization.nu,
    }
}

fn nonlinear(cfg: &ExperimentConfig, n_modes: usize) -> NonlinearProblem {
    NonlinearProblem {
        alpha: cfg.problem.alpha,
        gamma: cfg.problem.gamma,
        sigma: -1.0,
        initial: cfg.initial_data(),
        n_modes,
        nu: cfg.discretization.nu,
    }
}

/// Integrate the configured problem with `n_modes` and step `tau` to `t_final`.
pub fn evolve<F>(cfg: &ExperimentConfig, n_modes: usize, tau: f64, mut observe: F) -> Result<Evolution, CliError>
where
    F: FnMut(usize, f64, &SpectralState),
{
    let t_final = cfg.time.t_final;
    match cfg.problem.kind {
        ProblemKind::Nonlinear => match nonlinear(cfg, n_modes).solve(tau, t_final, observe)? {
            RunOutcome::Completed(state) => Ok(Evolution { state, blow_up: None }),
            RunOutcome::BlowUp { t, state } => Ok(Evolution { state, blow_up: Some(t) }),
        },
        ProblemKind::Linear => {
            let p = linear(cfg, n_modes);
            let state = match cfg.time.integrator {
                IntegratorKind::Exact => p.solve(LinearIntegrator::Exact, tau, t_final, observe)?,
                IntegratorKind::KrogstadP22 => {
                    // the potential plays the role of the nonlinear term
                    let (a, m) = p.operators()?;
                    let tables = KrogstadTables::for_operator(&a, p.gamma, tau)?;
                    let pot = |v: &[Complex64], _t: f64| m.matvec(v).expect("length fixed by N");
                    let mut u = p.initial_state()?;
                    observe(0, 0.0, &u);
                    for n in 1..=step_count(tau, t_final)? {
                        u = u.with_coeffs(krogstad_p22_step(&tables, pot, u.coeffs(), (n - 1) as f64 * tau)?)?;
                        observe(n, n as f64 * tau, &u);
                    }
                    u
                }
                k => {
                    p.solve(LinearIntegrator::Splitting(k.splitting().expect("splitting kind")), tau, t_final, observe)?
                }
            };
            Ok(Evolution { state, blow_up: None })
        }
    }
}

/// Steps between snapshots: about 200 frames per run.
pub fn snapshot_cadence(tau: f64, t_final: f64) -> usize {
    ((t_final / (200.0 * tau)).ceil() as usize).max(1)
}

pub fn solve(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Vec<String>, CliError> {
    let tau = cfg.time.tau;
    let steps = step_count(tau, cfg.time.t_final)?;
    let cadence = snapshot_cadence(tau, cfg.time.t_final);
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    let mut m0 = None;
    let want_solution = cfg.wants(OutputKind::SolutionCsv);
    let run = evolve(cfg, cfg.discretization.n, tau, |n, t, u| {
        if n % cadence == 0 || n == steps {
            let m = mass(u).parseval;
            let base = *m0.get_or_insert(m);
            rows.push((t, m, (m - base).abs()));
            if want_solution {
                snapshots.push((n, u.clone()));
            }
        }
    })?;
    if cfg.wants(OutputKind::MassCsv) {
        out.put("mass.csv", &mass_csv(&rows))?;
    }
    if want_solution {
        for (n, u) in &snapshots {
            out.put(&format!("snapshots/solution_{n:07}.csv"), &solution_csv(u)?)?;
        }
        out.put("solution.csv", &solution_csv(&run.state)?)?;
    }
    if cfg.wants(OutputKind::CoeffsCsv) {
        out.put("coeffs.csv", &coeffs_csv(&run.state))?;
    }
    let drift = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if let Some(t) = run.blow_up {
        return Err(CliError::BlowUp { t });
    }
    Ok(vec![format!("steps {steps}, max mass drift {drift:.3e}")])
}

fn order_line(params: &[f64], errs: &[f64]) -> String {
    match fit_order(params, errs) {
        Ok((slope, resid)) => format!("fitted slope {slope:.3} (rms residual {resid:.2e})"),
        Err(e) => format!("no slope: {e}"),
    }
}

fn finish(state: Evolution) -> Result<SpectralState, CliError> {
    match state.blow_up {
        Some(t) => Err(CliError::BlowUp { t }),
        None => Ok(state.state),
    }
}

pub fn converge_space(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Vec<String>, CliError> {
    let tau = cfg.time.tau;
    let run = |n: usize| -> Result<SpectralState, CliError> {
        if cfg.problem.kind == ProblemKind::Linear && cfg.time.integrator == IntegratorKind::Exact {
            return Ok(linear(cfg, n).solve_exact(cfg.time.t_final)?);
        }
        finish(evolve(cfg, n, tau, |_, _, _| ())?)
    };
    let reference = run(cfg.sweep.reference_n)?;
    let errs = cfg
        .sweep
        .n_values
        .par_iter()
        .map(|&n| Ok(max_error_default(&run(n)?, &reference)?))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let params: Vec<f64> = cfg.sweep.n_values.iter().map(|&n| n as f64).collect();
    let rows: Vec<(f64, f64)> = params.iter().copied().zip(errs.iter().copied()).collect();
    if cfg.wants(OutputKind::ConvergenceCsv) {
        out.put("convergence.csv", &convergence_csv(&rows))?;
    }
    Ok(vec![format!("reference N = {}", cfg.sweep.reference_n), order_line(&params, &errs)])
}

pub fn converge_time(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Vec<String>, CliError> {
    let n = cfg.discretization.n;
    let reference = match cfg.problem.kind {
        ProblemKind::Linear => {
            if cfg.time.integrator == IntegratorKind::Exact {
                return Err(CliError::Usage("converge-time needs a time-stepping integrator, not exact".into()));
            }
            linear(cfg, n).solve_exact(cfg.time.t_final)?
        }
        ProblemKind::Nonlinear => {
            let nr = if cfg.sweep.reference_time_n == 0 { n } else { cfg.sweep.reference_time_n };
            finish(evolve(cfg, nr, cfg.sweep.reference_tau, |_, _, _| ())?)?
        }
    };
    let errs = cfg
        .sweep
        .tau_values
        .par_iter()
        .map(|&tau| Ok(max_error_default(&finish(evolve(cfg, n, tau, |_, _, _| ())?)?, &reference)?))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let rows: Vec<(f64, f64)> = cfg.sweep.tau_values.iter().copied().zip(errs.iter().copied()).collect();
    if cfg.wants(OutputKind::ConvergenceCsv) {
        out.put("convergence.csv", &convergence_csv(&rows))?;
    }
    Ok(vec![order_line(&cfg.sweep.tau_values, &errs)])
}

pub fn stability(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Vec<String>, CliError> {
    let st = &cfg.stability;
    let p = st.points;
    let lin = |r: [f64; 2], i: usize| r[0] + (r[1] - r[0]) * i as f64 / (p - 1) as f64;
    let grid: Vec<Complex64> =
        (0..p).flat_map(|j| (0..p).map(move |i| Complex64::new(lin(st.re_range, i), lin(st.im_range, j)))).collect();
    let mut lines = Vec::new();
    for (idx, &yi) in st.y_imag.iter().enumerate() {
        let y = Complex64::new(st.y_real.get(idx).copied().unwrap_or(0.0), yi);
        let inside = stability_region(y, &grid)?;
        if cfg.wants(OutputKind::StabilityCsv) {
            out.put(&format!("stability_{idx}.csv"), &stability_csv(&grid, &inside))?;
        }
        let (lo, hi) = imaginary_axis_interval(y, 20.0, 1e-3)?;
        lines.push(format!("y = {}{:+}i: imaginary-axis interval [{:.3}, {:.3}]", y.re, y.im, 0.0 - lo, hi));
    }
    Ok(lines)
}

pub fn approx_compare(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Vec<String>, CliError> {
    let nu = cfg.discretization.nu;
    let f = cfg.initial_data().function();
    let nmax = cfg.sweep.n_values.iter().copied().max().unwrap_or(cfg.discretization.n);
    let grid = ThetaGrid::new(nmax, nu)?;
    let xs: Vec<f64> = grid.mapped_nodes()[1..].iter().copied().filter(|x| x.abs() <= PROBE_EXTENT * nu).collect();
    let exact: Vec<Complex64> = xs.iter().map(|&x| f.eval(x)).collect();
    let err = |vals: Vec<Complex64>| vals.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let results = cfg
        .sweep
        .n_values
        .par_iter()
        .map(|&n| {
            let mtf = err(synthesize(&analyze(&f, n, nu)?, &xs));
            // the same number of unknowns, 2N
            let mcf = err(mcf_synthesize(&mcf_analyze(&f, 2 * n, nu)?, &xs, nu));
            Ok((n as f64, mtf, mcf))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mtf: Vec<(f64, f64)> = results.iter().map(|r| (r.0, r.1)).collect();
    let mcf: Vec<(f64, f64)> = results.iter().map(|r| (r.0, r.2)).collect();
    if cfg.wants(OutputKind::ConvergenceCsv) {
        out.put("convergence_mtf.csv", &convergence_csv(&mtf))?;
        out.put("convergence_mcf.csv", &convergence_csv(&mcf))?;
    }
    let params: Vec<f64> = results.iter().map(|r| r.0).collect();
    Ok(vec![
        format!("MTF: {}", order_line(&params, &results.iter().map(|r| r.1).collect::<Vec<_>>())),
        format!("MCF: {}", order_line(&params, &results.iter().map(|r| r.2).collect::<Vec<_>>())),
    ])
}

/// Error and unitarity defect of the Chebyshev propagator of `gamma A + M`
/// against an eigendecomposition. Timings go to stdout, never into the tables.
pub fn expm_bench(cfg: &ExperimentConfig, out: &mut Writer) -> Result<Vec<String>, CliError> {
    let mut lines = Vec::new();
    for (idx, &spread) in cfg.expm.spreads.iter().enumerate() {
        let results = cfg
            .expm
            .sizes
            .par_iter()
            .map(|&size| {
                let p = linear(cfg, size / 2);
                let (a, m) = p.operators()?;
                let mut h = a.to_dense() * Complex64::new(p.gamma, 0.0);
                h += m.to_dense();
                let (zeta, eta) = gershgorin_bounds(&h);
                let lambda = 2.0 * spread / (eta - zeta);
                let start = std::time::Instant::now();
                let prop = cheb_expm(&h, lambda, zeta, eta)?;
                let secs = start.elapsed().as_secs_f64();
                let err = max_abs_diff(prop.matrix(), &eig_expm(&h, lambda));
                Ok((size as f64, err, unitarity_defect(prop.matrix()), prop.squarings(), secs))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let rows: Vec<(f64, f64)> = results.iter().map(|r| (r.0, r.1)).collect();
        if cfg.wants(OutputKind::ConvergenceCsv) {
            out.put(&format!("expm_{idx}.csv"), &convergence_csv(&rows))?;
        }
        for (size, err, defect, s, secs) in results {
            lines.push(format!(
                "spread {spread}: size {size} squarings {s} error {err:.2e} unitarity {defect:.2e} time {secs:.3} s"
            ));
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cadence() {
        assert_eq!(snapshot_cadence(1e-3, 5.0), 25);
        assert_eq!(snapshot_cadence(0.125, 1.0), 1);
        assert_eq!(snapshot_cadence(1e-3, 0.2), 1);
        assert_eq!(snapshot_cadence(1e-3, 0.201), 2);
    }
}
