//! Strang split-step time integrator.
//!
//! One step of length dt factors the flow as L(dt/2) N(dt) L(dt/2):
//!
//! * L: the free group `exp(i t Delta / 2)`, applied for dt/2. On Cartesian
//!   grids this is the exact Fourier multiplier `exp(-i (dt/2) |xi|^2 / 2)`;
//!   on radial grids a Crank-Nicolson solve
//!   `(I - i (dt/4) (Delta_r/2)) u+ = (I + i (dt/4) (Delta_r/2)) u`,
//!   which is unconditionally stable and exactly norm-preserving because the
//!   discrete Laplacian is self-adjoint in the weighted inner product.
//! * N: the local coupling `i u_t = u v`, `mu v_t + v = lambda |u|^2` with
//!   the Laplacian switched off. Since v is real, |u| is pointwise constant
//!   under N, so the relaxation sees constant forcing and integrates
//!   exactly; u picks up the phase `exp(-i dt vbar)` with vbar the exact
//!   time average of v across the substep. The substep is therefore exact,
//!   and the only splitting error is the L/N commutator, second order
//!   overall.
//!
//! With mu = 0 the N substep degenerates to the standard cubic-Schrodinger
//! phase rotation `u -> u exp(-i lambda |u|^2 dt)`.

use serde::{Deserialize, Serialize};

use crate::debye::{debye_step, decay_weights, nls_limit_v, DebyeParams};
use crate::diagnostics::{snapshot, DiagnosticsRecord};
use crate::error::{Result, SdError};
use crate::grid::{
    self, boundary_amplitude, gradient_norm_sq, sup_norm, ComplexField, GridKind, GridSpec,
    RealField,
};
use crate::initial_data::InitialData;
use crate::tridiag;

use num_complex::Complex64;

/// Hard cap on step halvings within one run before the step controller
/// declares blow-up.
pub const MAX_HALVINGS: u32 = 40;

/// Relative per-step growth of the gradient or sup norm that triggers a
/// halving retry.
const GROWTH_TRIGGER: f64 = 1.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub debye: DebyeParams,
    pub dt_init: f64,
    pub dt_min: f64,
    pub t_end: f64,
    /// Absolute threshold on ||grad u||_L2 that declares blow-up.
    pub blowup_grad_threshold: f64,
    /// Absolute threshold on ||u||_Linf that declares blow-up.
    pub blowup_sup_threshold: f64,
    /// Snapshot cadence in accepted steps.
    pub diag_every: usize,
    pub boundary_leak_tol: f64,
    /// Sobolev orders recorded in each snapshot.
    pub hs_tracked: Vec<u32>,
}

impl SimConfig {
    /// A config with conventional control settings: blow-up thresholds at
    /// 1000x the initial norms of `data`, dt_min at dt_init / 2^40, leak
    /// tolerance 1e-8.
    pub fn with_default_controls(
        grid: GridSpec,
        debye: DebyeParams,
        dt_init: f64,
        t_end: f64,
        data: &InitialData,
    ) -> Self {
        let (g, s) = default_blowup_thresholds(data);
        SimConfig {
            grid,
            debye,
            dt_init,
            dt_min: dt_init / 2f64.powi(MAX_HALVINGS as i32),
            t_end,
            blowup_grad_threshold: g,
            blowup_sup_threshold: s,
            diag_every: 10,
            boundary_leak_tol: 1e-8,
            hs_tracked: vec![1, 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            return Err(SdError::InvalidConfig("dt_init must be positive".into()));
        }
        if !(self.dt_min.is_finite() && self.dt_min > 0.0 && self.dt_min <= self.dt_init) {
            return Err(SdError::InvalidConfig(
                "dt_min must satisfy 0 < dt_min <= dt_init".into(),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(SdError::InvalidConfig("t_end must be >= 0".into()));
        }
        if !(self.blowup_grad_threshold > 0.0 && self.blowup_sup_threshold > 0.0) {
            return Err(SdError::InvalidConfig(
                "blow-up thresholds must be positive".into(),
            ));
        }
        if self.diag_every == 0 {
            return Err(SdError::InvalidConfig("diag_every must be >= 1".into()));
        }
        if !(self.boundary_leak_tol > 0.0) {
            return Err(SdError::InvalidConfig(
                "boundary_leak_tol must be positive".into(),
            ));
        }
        if self.hs_tracked.iter().any(|s| *s == 0) {
            return Err(SdError::InvalidConfig(
                "tracked sobolev orders start at 1 (mass is always recorded)".into(),
            ));
        }
        Ok(())
    }
}

/// 1000x the initial gradient and sup norms, floored away from zero so
/// trivial data cannot trip the detector.
pub fn default_blowup_thresholds(data: &InitialData) -> (f64, f64) {
    let g = gradient_norm_sq(&data.u0).sqrt();
    let s = sup_norm(&data.u0);
    ((1e3 * g).max(1e-9), (1e3 * s).max(1e-9))
}

#[derive(Clone, Debug)]
pub struct StepState {
    pub t: f64,
    pub u: ComplexField,
    pub v: RealField,
    pub dt: f64,
    pub step_index: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RunOutcome {
    Completed,
    BlowupDetected { t: f64 },
    BoundaryLeak { t: f64 },
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: StepState,
}

/// Applies the free propagator for time dt/2 (`exp(i (dt/2) Delta / 2)`).
pub fn linear_half_step(u: &ComplexField, dt: f64) -> ComplexField {
    match u.spec().kind() {
        GridKind::CartesianPeriodic => {
            grid::apply_spectral_multiplier(u, |k2| Complex64::cis(-0.25 * dt * k2))
        }
        GridKind::Radial => crank_nicolson_half_step(u, dt),
    }
}

fn crank_nicolson_half_step(u: &ComplexField, dt: f64) -> ComplexField {
    let spec = *u.spec();
    let m = spec.points();
    let rows = m - 1;
    let (sub, diag, sup) = grid::radial_laplacian_tridiag(&spec);
    let beta = 0.125 * dt; // (dt/4) * (1/2)
    let i_beta = Complex64::new(0.0, beta);

    // rhs = (I + i beta T) u over the interior, with the boundary node at 0
    let vals = u.values();
    let mut rhs = vec![Complex64::new(0.0, 0.0); rows];
    for j in 0..rows {
        let mut acc = vals[j] * (1.0 + i_beta * diag[j]);
        if j > 0 {
            acc += i_beta * sub[j] * vals[j - 1];
        }
        if j < rows - 1 {
            acc += i_beta * sup[j] * vals[j + 1];
        }
        rhs[j] = acc;
    }

    let a_sub: Vec<Complex64> = sub.iter().map(|x| -i_beta * x).collect();
    let a_sup: Vec<Complex64> = sup.iter().map(|x| -i_beta * x).collect();
    let a_diag: Vec<Complex64> = diag.iter().map(|x| 1.0 - i_beta * x).collect();
    tridiag::solve(&a_sub, &a_diag, &a_sup, &mut rhs);

    // the Dirichlet boundary node is carried through untouched
    rhs.push(vals[m - 1]);
    ComplexField::from_values(spec, rhs).expect("same grid")
}

/// Pointwise phase rotation `u -> u exp(-i v dt)`; preserves |u| exactly.
pub fn potential_step(u: &ComplexField, v: &RealField, dt: f64) -> ComplexField {
    assert_eq!(u.spec(), v.spec(), "fields live on different grids");
    let values = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(z, v)| z * Complex64::cis(-v * dt))
        .collect();
    ComplexField::from_values(*u.spec(), values).expect("same grid")
}

/// One Strang step of length `state.dt`. The relaxation endpoints both see
/// |u| after the first half drift: the phase rotation cannot change |u|, so
/// re-evaluating the source after it would reproduce the same field, and the
/// constant-forcing relaxation update is exact.
pub fn strang_step(state: &StepState, cfg: &SimConfig) -> Result<StepState> {
    let dt = state.dt;
    let p = &cfg.debye;
    let u1 = linear_half_step(&state.u, dt);
    let (u2, v_next) = if p.mu > 0.0 {
        let v_next = debye_step(&state.v, &u1, &u1, dt, p)?;
        // exact time average of v across the substep, for the phase
        let w = decay_weights(dt, p.mu);
        let s = p.lambda.sign();
        let v_avg = RealField::from_values(
            *state.v.spec(),
            state
                .v
                .values()
                .iter()
                .zip(u1.values())
                .map(|(v, u)| (1.0 - w.w_end) * v + w.w_end * s * u.norm_sqr())
                .collect(),
        )?;
        (potential_step(&u1, &v_avg, dt), v_next)
    } else {
        let v_mid = nls_limit_v(&u1, p);
        (potential_step(&u1, &v_mid, dt), v_mid)
    };
    let u3 = linear_half_step(&u2, dt);
    let v_final = if p.mu > 0.0 {
        v_next
    } else {
        // keep the algebraic slaving v = lambda |u|^2 at the step end
        nls_limit_v(&u3, p)
    };
    Ok(StepState {
        t: state.t + dt,
        u: u3,
        v: v_final,
        dt,
        step_index: state.step_index + 1,
    })
}

/// Runs the integrator to `cfg.t_end` with step-halving on sudden norm
/// growth, blow-up thresholds on `||grad u||` and `||u||_Linf`, and a
/// boundary-contamination monitor. Records a snapshot at t = 0, every
/// `diag_every` accepted steps, and at the terminal state.
pub fn run(cfg: &SimConfig, data: &InitialData) -> Result<RunResult> {
    cfg.validate()?;
    if data.u0.spec() != &cfg.grid || data.v0.spec() != &cfg.grid {
        return Err(SdError::GridMismatch);
    }
    if !data.u0.is_finite() || !data.v0.is_finite() {
        return Err(SdError::InvalidData("initial data contains NaN/Inf".into()));
    }

    let mut state = StepState {
        t: 0.0,
        u: data.u0.clone(),
        v: data.v0.clone(),
        dt: cfg.dt_init.min(cfg.t_end.max(cfg.dt_min)),
        step_index: 0,
    };
    let mut records = vec![snapshot(&state, cfg)];
    let mut last_recorded = 0u64;
    let mut halvings = 0u32;
    let mut prev_grad = gradient_norm_sq(&state.u).sqrt();
    let mut prev_sup = sup_norm(&state.u);
    // dead zone: ignore growth of norms far below the blow-up scale
    let grad_floor = 1e-6 * cfg.blowup_grad_threshold;
    let sup_floor = 1e-6 * cfg.blowup_sup_threshold;

    let finish = |state: StepState,
                  mut records: Vec<DiagnosticsRecord>,
                  last_recorded: u64,
                  outcome: RunOutcome,
                  cfg: &SimConfig| {
        if state.step_index != last_recorded {
            records.push(snapshot(&state, cfg));
        }
        Ok(RunResult {
            outcome,
            records,
            final_state: state,
        })
    };

    while state.t < cfg.t_end {
        let remaining = cfg.t_end - state.t;
        // Within one step (plus rounding slack) of the end: stretch/shrink the
        // attempt to land on t_end exactly, so accumulated roundoff in t can
        // never spawn a trailing micro-step that breaks the record cadence.
        let last = remaining <= state.dt * (1.0 + 1e-9);
        let mut attempt_state = state.clone();
        attempt_state.dt = if last { remaining } else { state.dt };
        let candidate = strang_step(&attempt_state, cfg)?;

        let finite = candidate.u.is_finite() && candidate.v.is_finite();
        let (grad, sup) = if finite {
            (
                gradient_norm_sq(&candidate.u).sqrt(),
                sup_norm(&candidate.u),
            )
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        let grew = !finite
            || (grad > GROWTH_TRIGGER * prev_grad && grad > grad_floor)
            || (sup > GROWTH_TRIGGER * prev_sup && sup > sup_floor);
        if grew {
            let next_dt = state.dt * 0.5;
            if halvings >= MAX_HALVINGS || next_dt < cfg.dt_min {
                // the step controller cannot resolve the growth: blow-up
                let t_star = state.t;
                return finish(
                    state,
                    records,
                    last_recorded,
                    RunOutcome::BlowupDetected { t: t_star },
                    cfg,
                );
            }
            halvings += 1;
            state.dt = next_dt;
            continue;
        }

        state = candidate;
        if last {
            state.t = cfg.t_end;
        }
        prev_grad = grad;
        prev_sup = sup;

        if grad > cfg.blowup_grad_threshold || sup > cfg.blowup_sup_threshold {
            let t_star = state.t;
            return finish(
                state,
                records,
                last_recorded,
                RunOutcome::BlowupDetected { t: t_star },
                cfg,
            );
        }
        if boundary_amplitude(&state.u) > cfg.boundary_leak_tol {
            let t_leak = state.t;
            return finish(
                state,
                records,
                last_recorded,
                RunOutcome::BoundaryLeak { t: t_leak },
                cfg,
            );
        }
        if state.step_index % cfg.diag_every as u64 == 0 {
            records.push(snapshot(&state, cfg));
            last_recorded = state.step_index;
        }
    }
    finish(state, records, last_recorded, RunOutcome::Completed, cfg)
}
