//! Named test problems and the time-stepping drivers built on them.

use num_complex::Complex64;

use crate::basis::{analyze, SampledFunction, SpectralState};
use crate::error::{Error, Result};
use crate::fraclap::{assemble_full, FracLapOperator};
use crate::nonlinear::{blowup_detected, CubicNonlinearity};
use crate::potential::{potential_operator, ToeplitzOperator};
use crate::stepper::{
    exact_propagator, krogstad_p22_step, splitting_step, KrogstadTables, SchemeName, SplittingPropagators,
    SplittingScheme,
};

/// Initial data `psi_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `sech(x)`
    Sech,
    /// `exp(-x^2)`
    Gaussian,
    /// `exp(-x^2) exp(-i kappa x)`
    GaussianChirp { kappa: f64 },
    /// `(ix + 10) / (x^2 + 4)`
    Rational,
    /// `1 / (1 + x + x^2)`
    Rational2,
}

impl InitialData {
    pub fn function(&self) -> SampledFunction {
        match *self {
            InitialData::Sech => SampledFunction::real(|x| 1.0 / x.cosh()),
            InitialData::Gaussian => SampledFunction::real(|x| (-x * x).exp()),
            InitialData::GaussianChirp { kappa } => {
                SampledFunction::new(move |x| Complex64::from_polar((-x * x).exp(), -kappa * x))
            }
            InitialData::Rational => {
                SampledFunction::new(|x| Complex64::new(10.0, x) / (x * x + 4.0)).with_tail(Complex64::new(0.0, 1.0))
            }
            InitialData::Rational2 => SampledFunction::real(|x| 1.0 / (1.0 + x + x * x)),
        }
    }
}

/// Multiplicative potential `V(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    None,
    /// `1 / (1 + x^2)`
    InverseQuadratic,
    /// `h (exp(-(x-d)^2) + exp(-(x+d)^2))`
    GaussianBarrier {
        height: f64,
        distance: f64,
    },
}

impl Potential {
    pub fn function(&self) -> Option<SampledFunction> {
        match *self {
            Potential::None => None,
            Potential::InverseQuadratic => Some(SampledFunction::real(|x| 1.0 / (1.0 + x * x))),
            Potential::GaussianBarrier { height, distance } => Some(SampledFunction::real(move |x| {
                height * ((-(x - distance).powi(2)).exp() + (-(x + distance).powi(2)).exp())
            })),
        }
    }

    /// Galerkin matrix in the `N`-mode basis (all zeros for `None`).
    pub fn operator(&self, n_modes: usize, nu: f64) -> Result<ToeplitzOperator> {
        match self.function() {
            Some(v) => potential_operator(&v, n_modes, nu),
            None => ToeplitzOperator::from_coeffs(&vec![Complex64::new(0.0, 0.0); 4 * n_modes - 1]),
        }
    }
}

/// Time integrators for the linear equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearIntegrator {
    Exact,
    Splitting(SchemeName),
}

/// `i psi_t = gamma (-Delta)^{alpha/2} psi + V psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearProblem {
    pub alpha: f64,
    pub gamma: f64,
    pub potential: Potential,
    pub initial: InitialData,
    pub n_modes: usize,
    pub nu: f64,
}

/// `i psi_t = gamma (-Delta)^{alpha/2} psi + sigma |psi|^2 psi`, focusing for `sigma = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearProblem {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub initial: InitialData,
    pub n_modes: usize,
    pub nu: f64,
}

/// Number of steps of size `tau` that reach `t_final`.
pub fn step_count(tau: f64, t_final: f64) -> Result<usize> {
    if !(tau > 0.0 && t_final >= 0.0 && tau.is_finite() && t_final.is_finite()) {
        return Err(Error::InvalidTimeStep { tau, t_final });
    }
    let n = (t_final / tau).round();
    if (n * tau - t_final).abs() > 1e-9 * t_final.max(tau) {
        return Err(Error::InvalidTimeStep { tau, t_final });
    }
    Ok(n as usize)
}

impl LinearProblem {
    pub fn operators(&self) -> Result<(FracLapOperator, ToeplitzOperator)> {
        Ok((assemble_full(self.n_modes, self.alpha, self.nu)?, self.potential.operator(self.n_modes, self.nu)?))
    }

    pub fn initial_state(&self) -> Result<SpectralState> {
        analyze(&self.initial.function(), self.n_modes, self.nu)
    }

    /// State at `t_final` by the exact propagator, in one application.
    pub fn solve_exact(&self, t_final: f64) -> Result<SpectralState> {
        let (a, m) = self.operators()?;
        let u0 = self.initial_state()?;
        let p = exact_propagator(&a, &m, self.gamma, t_final)?;
        u0.with_coeffs(p.apply(u0.coeffs())?)
    }

    /// Step to `t_final`, calling `observe(step, t, state)` at every step
    /// including the initial one. `Exact` repeatedly applies `exp(-i tau H)`.
    pub fn solve<F>(
        &self,
        integrator: LinearIntegrator,
        tau: f64,
        t_final: f64,
        mut observe: F,
    ) -> Result<SpectralState>
    where
        F: FnMut(usize, f64, &SpectralState),
    {
        let steps = step_count(tau, t_final)?;
        let (a, m) = self.operators()?;
        let mut u = self.initial_state()?;
        observe(0, 0.0, &u);
        match integrator {
            LinearIntegrator::Exact => {
                let p = exact_propagator(&a, &m, self.gamma, tau)?;
                for n in 1..=steps {
                    u = u.with_coeffs(p.apply(u.coeffs())?)?;
                    observe(n, n as f64 * tau, &u);
                }
            }
            LinearIntegrator::Splitting(name) => {
                let props = SplittingPropagators::new(&SplittingScheme::new(name), &a, &m, self.gamma, tau)?;
                for n in 1..=steps {
                    u = splitting_step(&props, &u)?;
                    observe(n, n as f64 * tau, &u);
                }
            }
        }
        Ok(u)
    }
}

/// How a nonlinear run ended.
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Completed(SpectralState),
    /// The guard fired after the step ending at `t`; `state` is the last
    /// state that passed the guard.
    BlowUp {
        t: f64,
        state: SpectralState,
    },
}

impl RunOutcome {
    pub fn state(&self) -> &SpectralState {
        match self {
            RunOutcome::Completed(s) => s,
            RunOutcome::BlowUp { state, .. } => state,
        }
    }

    pub fn blow_up_time(&self) -> Option<f64> {
        match self {
            RunOutcome::Completed(_) => None,
            RunOutcome::BlowUp { t, .. } => Some(*t),
        }
    }
}

impl NonlinearProblem {
    pub fn operator(&self) -> Result<FracLapOperator> {
        assemble_full(self.n_modes, self.alpha, self.nu)
    }

    pub fn initial_state(&self) -> Result<SpectralState> {
        analyze(&self.initial.function(), self.n_modes, self.nu)
    }

    /// Krogstad-P22 to `t_final`, with the blow-up guard checked after each step.
    pub fn solve<F>(&self, tau: f64, t_final: f64, mut observe: F) -> Result<RunOutcome>
    where
        F: FnMut(usize, f64, &SpectralState),
    {
        let steps = step_count(tau, t_final)?;
        let a = self.operator()?;
        let tables = KrogstadTables::for_operator(&a, self.gamma, tau)?;
        let cubic = CubicNonlinearity::new(self.n_modes);
        let nu = self.nu;
        let sigma = self.sigma;
        let nonlin = |v: &[Complex64], _t: f64| -> Vec<Complex64> {
            let s = SpectralState::new(v.to_vec(), nu).expect("length fixed by N");
            let mut out = cubic.apply(&s);
            out.iter_mut().for_each(|z| *z *= sigma);
            out
        };
        let mut u = self.initial_state()?;
        observe(0, 0.0, &u);
        for n in 1..=steps {
            let t = (n - 1) as f64 * tau;
            let next = krogstad_p22_step(&tables, nonlin, u.coeffs(), t)?;
            if blowup_detected(&next) {
                return Ok(RunOutcome::BlowUp { t: n as f64 * tau, state: u });
            }
            u = u.with_coeffs(next)?;
            observe(n, n as f64 * tau, &u);
        }
        Ok(RunOutcome::Completed(u))
    }
}
