//! The relaxation half of the system: `mu v_t + v = lambda |u|^2`.
//!
//! Because the equation is linear in v with no spatial coupling, it can be
//! advanced by the exact variation-of-constants formula
//!
//! ```text
//!   v(t) = e^{-t/mu} v(0) + (lambda/mu) ∫_0^t e^{-(t-s)/mu} |u(s)|^2 ds
//! ```
//!
//! per node. [`debye_step`] evaluates that integral in closed form for a
//! source that interpolates linearly between its endpoint samples, so the
//! update is exact for constant and linear-in-time forcing and second-order
//! otherwise, with unconditional stability for any `dt / mu` ratio.

#[cfg(test)]
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdError};
use crate::grid::{integrate_pointwise_real, ComplexField, RealField};

/// Sign of the cubic coupling; `Focusing` is lambda = -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Lambda {
    Focusing,
    Defocusing,
}

impl Lambda {
    pub fn sign(self) -> f64 {
        match self {
            Lambda::Focusing => -1.0,
            Lambda::Defocusing => 1.0,
        }
    }
}

impl TryFrom<i8> for Lambda {
    type Error = SdError;
    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Lambda::Focusing),
            1 => Ok(Lambda::Defocusing),
            other => Err(SdError::InvalidParameter(format!(
                "lambda must be -1 or +1, got {other}"
            ))),
        }
    }
}

impl From<Lambda> for i8 {
    fn from(l: Lambda) -> i8 {
        match l {
            Lambda::Focusing => -1,
            Lambda::Defocusing => 1,
        }
    }
}

/// Relaxation time and coupling sign. `mu = 0` selects the instantaneous
/// (cubic Schrodinger) limit handled by [`nls_limit_v`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDebyeParams")]
pub struct DebyeParams {
    pub mu: f64,
    pub lambda: Lambda,
}

#[derive(Deserialize)]
struct RawDebyeParams {
    mu: f64,
    lambda: Lambda,
}

impl TryFrom<RawDebyeParams> for DebyeParams {
    type Error = SdError;
    fn try_from(r: RawDebyeParams) -> Result<Self> {
        DebyeParams::new(r.mu, r.lambda)
    }
}

impl DebyeParams {
    pub fn new(mu: f64, lambda: Lambda) -> Result<Self> {
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(SdError::InvalidParameter(format!(
                "relaxation time mu must be finite and >= 0, got {mu}"
            )));
        }
        Ok(DebyeParams { mu, lambda })
    }
}

/// Per-step coefficients: `v_next = decay * v + lambda*(w_start*q0 + w_end*q1)`
/// where q is |u|^2 at the step endpoints. `1 - w_end` is also the weight of
/// v in the time average of v over the step (used for the phase rotation in
/// the split-step scheme).
#[derive(Clone, Copy, Debug)]
pub(crate) struct DecayWeights {
    pub decay: f64,
    pub w_start: f64,
    pub w_end: f64,
}

/// Exact integration weights for one step of length `dt` with `mu > 0`.
/// Uses expm1 so the small `dt/mu` regime loses no precision.
pub(crate) fn decay_weights(dt: f64, mu: f64) -> DecayWeights {
    let x = dt / mu;
    let one_minus_decay = -(-x).exp_m1();
    let decay = 1.0 - one_minus_decay;
    let w_end = 1.0 - one_minus_decay / x;
    let w_start = one_minus_decay - w_end;
    DecayWeights {
        decay,
        w_start,
        w_end,
    }
}

/// Advances v over `[t, t+dt]` with `|u|^2` interpolated linearly between
/// `u_start` and `u_end`. Exact for forcing that is constant or linear in
/// time; all coefficients are nonnegative, so for lambda = +1 nonnegative
/// inputs produce a nonnegative v.
pub fn debye_step(
    v: &RealField,
    u_start: &ComplexField,
    u_end: &ComplexField,
    dt: f64,
    p: &DebyeParams,
) -> Result<RealField> {
    if p.mu <= 0.0 {
        return Err(SdError::InvalidParameter(
            "debye_step needs mu > 0; the mu = 0 branch is nls_limit_v".into(),
        ));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SdError::InvalidParameter(format!(
            "step length must be positive and finite, got {dt}"
        )));
    }
    if v.spec() != u_start.spec() || v.spec() != u_end.spec() {
        return Err(SdError::GridMismatch);
    }
    let w = decay_weights(dt, p.mu);
    let s = p.lambda.sign();
    let values = v
        .values()
        .iter()
        .zip(u_start.values())
        .zip(u_end.values())
        .map(|((v, a), b)| w.decay * v + s * (w.w_start * a.norm_sqr() + w.w_end * b.norm_sqr()))
        .collect();
    RealField::from_values(*v.spec(), values)
}

/// The instantaneous-relaxation limit `v = lambda |u|^2` (mu = 0).
pub fn nls_limit_v(u: &ComplexField, p: &DebyeParams) -> RealField {
    let s = p.lambda.sign();
    RealField::from_values(
        *u.spec(),
        u.values().iter().map(|z| s * z.norm_sqr()).collect(),
    )
    .expect("same grid")
}

/// Outcome of comparing `||v(t)||_L1` against its a-priori bound
/// `mass(u0) + e^{-t/mu} (||v0||_L1 - mass(u0))`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct L1BoundReport {
    pub v_l1: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Checks the L1 a-priori bound on v at time `t`. `u0_mass` is the conserved
/// `||u0||_L2^2` and `v0_l1` the initial `||v0||_L1`.
pub fn v_l1_bound_check(
    v: &RealField,
    u0_mass: f64,
    v0_l1: f64,
    t: f64,
    p: &DebyeParams,
) -> L1BoundReport {
    let v_l1 = integrate_pointwise_real(v, f64::abs);
    let decay = if p.mu > 0.0 {
        (-t / p.mu).exp()
    } else if t > 0.0 {
        0.0
    } else {
        1.0
    };
    let bound = u0_mass + decay * (v0_l1 - u0_mass);
    let tol = 1e-6 + 1e-12 * (u0_mass.abs() + v0_l1.abs());
    L1BoundReport {
        v_l1,
        bound,
        margin: bound + tol - v_l1,
        pass: v_l1 <= bound + tol,
    }
}

/// Uniform field with a prescribed |u|^2, handy for exactness tests.
#[cfg(test)]
fn flat_u(spec: crate::grid::GridSpec, q: f64) -> ComplexField {
    ComplexField::from_fn(spec, |_| Complex64::new(q.sqrt(), 0.0))
}
