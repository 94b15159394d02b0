//! Per-step observables and the checks built on top of them.
//!
//! A `DiagnosticsRecord` is one row of the run log: conserved quantities,
//! both algebraic forms of the pseudo-energy
//!
//! ```text
//! E = int ( |grad u|^2 + lambda |u|^4 - lambda mu^2 (v_t)^2 )    (form A)
//!   = int ( |grad u|^2 + 2 v |u|^2  - lambda v^2 )               (form B)
//! ```
//!
//! (equal pointwise once `v_t = (lambda |u|^2 - v) / mu` is substituted),
//! the dispersion/variance pair `h, h'`, the virial right-hand side, a
//! ladder of norms, and a boundary-contamination probe.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::debye::DebyeParams;
use crate::error::{Result, SdError};
use crate::grid::{
    boundary_amplitude, gradient_norm_sq, gradient_norm_sq_real, integrate_pointwise,
    integrate_pointwise_real, l2_norm_sq, quadrature_weights, sobolev_norm, sup_norm,
    x_dot_grad_real, ComplexField, RealField,
};
use crate::initial_data::variance;
use crate::stepper::{SimConfig, StepState};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// ||u||_L2 squared.
    pub mass: f64,
    #[serde(rename = "energy_formA")]
    pub energy_form_a: f64,
    #[serde(rename = "energy_formB")]
    pub energy_form_b: f64,
    /// 2 lambda mu int (v_t)^2 — the exact energy production rate.
    #[serde(rename = "dE_dt_rhs")]
    pub de_dt_rhs: f64,
    /// h(t) = (1/2) int |x|^2 |u|^2.
    pub h: f64,
    /// h'(t) = Im int (x . grad u) conj(u).
    pub h_prime: f64,
    pub virial_rhs: f64,
    pub grad_u_l2: f64,
    pub u_linf: f64,
    pub u_l4: f64,
    pub v_l2: f64,
    pub v_l1: f64,
    pub v_grad_l2: f64,
    pub hs_norms: BTreeMap<u32, f64>,
    pub boundary_leak: f64,
}

/// Right-hand side of the variance identity,
/// `h'' = E + (n-2) int v |u|^2 - int v^2 + int (x . grad |u|^2) v`,
/// with E in form B. With v = 0 this collapses to E; with u = 0 and
/// lambda = -1 it cancels to zero.
pub fn virial_rhs(u: &ComplexField, v: &RealField, p: &DebyeParams) -> f64 {
    assert_eq!(u.spec(), v.spec(), "fields live on different grids");
    let n = u.spec().dimension() as f64;
    let s = p.lambda.sign();
    let w = quadrature_weights(u.spec());
    let q = u.modulus_squared();
    let vq: f64 = w
        .iter()
        .zip(v.values())
        .zip(q.values())
        .map(|((w, v), q)| w * v * q)
        .sum();
    let v2 = integrate_pointwise_real(v, |x| x * x);
    let xq = x_dot_grad_real(&q);
    let xqv: f64 = w
        .iter()
        .zip(xq.values())
        .zip(v.values())
        .map(|((w, xq), v)| w * xq * v)
        .sum();
    let energy_b = gradient_norm_sq(u) + 2.0 * vq - s * v2;
    energy_b + (n - 2.0) * vq - v2 + xqv
}

pub fn snapshot(state: &StepState, cfg: &SimConfig) -> DiagnosticsRecord {
    let u = &state.u;
    let v = &state.v;
    let p = &cfg.debye;
    let s = p.lambda.sign();
    let w = quadrature_weights(u.spec());
    let q = u.modulus_squared();

    let mass = l2_norm_sq(u);
    let grad_sq = gradient_norm_sq(u);
    let u4 = integrate_pointwise(u, |z| {
        let a = z.norm_sqr();
        a * a
    });
    let vq: f64 = w
        .iter()
        .zip(v.values())
        .zip(q.values())
        .map(|((w, v), q)| w * v * q)
        .sum();
    let v2 = integrate_pointwise_real(v, |x| x * x);
    // relaxation rate; identically zero in the instantaneous limit where
    // v is slaved to lambda |u|^2
    let vt_sq = if p.mu > 0.0 {
        let inv_mu = 1.0 / p.mu;
        w.iter()
            .zip(q.values())
            .zip(v.values())
            .map(|((w, q), v)| {
                let vt = (s * q - v) * inv_mu;
                w * vt * vt
            })
            .sum()
    } else {
        0.0
    };

    let (h, h_prime) = variance(u);
    let mut hs_norms = BTreeMap::new();
    for order in &cfg.hs_tracked {
        if let Ok(norm) = sobolev_norm(u, *order) {
            hs_norms.insert(*order, norm);
        }
    }

    DiagnosticsRecord {
        t: state.t,
        mass,
        energy_form_a: grad_sq + s * u4 - s * p.mu * p.mu * vt_sq,
        energy_form_b: grad_sq + 2.0 * vq - s * v2,
        de_dt_rhs: 2.0 * s * p.mu * vt_sq,
        h,
        h_prime,
        virial_rhs: virial_rhs(u, v, p),
        grad_u_l2: grad_sq.sqrt(),
        u_linf: sup_norm(u),
        u_l4: u4.powf(0.25),
        v_l2: v2.sqrt(),
        v_l1: integrate_pointwise_real(v, f64::abs),
        v_grad_l2: gradient_norm_sq_real(v).sqrt(),
        hs_norms,
        boundary_leak: boundary_amplitude(u),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyLawReport {
    /// Uniform record spacing the differences were taken at.
    pub cadence: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares centered differences of form-B energy against the recorded
/// production rate `2 lambda mu int (v_t)^2`. Requires at least three
/// records at uniform spacing. The tolerance combines a relative floor with
/// the second-order truncation term `(dt^2 / 6) max |E'''|`, the latter
/// estimated from third differences of the data itself.
pub fn energy_derivative_check(records: &[DiagnosticsRecord]) -> Result<EnergyLawReport> {
    if records.len() < 3 {
        return Err(SdError::BadRecords(
            "need at least three records for centered differences".into(),
        ));
    }
    let dt = records[1].t - records[0].t;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SdError::BadRecords("record times must increase".into()));
    }
    for pair in records.windows(2) {
        let step = pair[1].t - pair[0].t;
        if (step - dt).abs() > 1e-9 * dt {
            return Err(SdError::BadRecords(format!(
                "records are not uniformly spaced: found gaps {dt} and {step}"
            )));
        }
    }

    let e: Vec<f64> = records.iter().map(|r| r.energy_form_b).collect();
    let mut max_residual = 0.0f64;
    for k in 1..records.len() - 1 {
        let slope = (e[k + 1] - e[k - 1]) / (2.0 * dt);
        max_residual = max_residual.max((slope - records[k].de_dt_rhs).abs());
    }
    let e_scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut third = 0.0f64;
    for k in 0..records.len().saturating_sub(3) {
        third = third.max((e[k + 3] - 3.0 * e[k + 2] + 3.0 * e[k + 1] - e[k]).abs());
    }
    let tolerance = 1e-3 * e_scale + dt * dt * (third / (dt * dt * dt)) / 6.0;
    Ok(EnergyLawReport {
        cadence: dt,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HeisenbergReport {
    /// ||u||_L2^2, the left side of the inequality.
    pub mass: f64,
    /// (2/n) ||x u||_L2 ||grad u||_L2, the right side.
    pub bound: f64,
    pub pass: bool,
}

/// Uncertainty-principle consistency check on one record:
/// `||u||^2 <= (2/n) || |x| u || ||grad u||`, with `|| |x| u || = sqrt(2h)`.
/// Gaussians saturate the constant in every dimension, and saturating data
/// on a second-order radial grid can overshoot by the discretization error,
/// so the slack is well above roundoff while still catching any O(1)
/// violation.
pub fn heisenberg_check(record: &DiagnosticsRecord, dimension: usize) -> HeisenbergReport {
    let n = dimension as f64;
    let bound = (2.0 / n) * (2.0 * record.h).sqrt() * record.grad_u_l2;
    HeisenbergReport {
        mass: record.mass,
        bound,
        pass: record.mass <= bound * (1.0 + 1e-4),
    }
}

/// Lower bound on ||grad u|| forced by the uncertainty principle at fixed
/// mass: `||grad u|| >= n m / (2 sqrt(2 h))`. Halving h at fixed mass
/// raises it by a factor sqrt(2) — concentration costs gradient.
pub fn gradient_lower_bound(mass: f64, h: f64, dimension: usize) -> f64 {
    dimension as f64 * mass / (2.0 * (2.0 * h).sqrt())
}

/// Formats one float with 17 significant digits, enough to round-trip f64.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn records_csv_header(hs_orders: &[u32]) -> String {
    let mut cols: Vec<String> = [
        "t",
        "mass",
        "energy_formA",
        "energy_formB",
        "dE_dt_rhs",
        "h",
        "h_prime",
        "virial_rhs",
        "grad_u_l2",
        "u_linf",
        "u_l4",
        "v_l2",
        "v_l1",
        "v_grad_l2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for s in hs_orders {
        cols.push(format!("hs_{s}"));
    }
    cols.push("boundary_leak".into());
    cols.join(",")
}

/// Writes records as CSV: header row, then one row per record, columns in
/// `DiagnosticsRecord` field order with the Sobolev map expanded to one
/// `hs_<s>` column per tracked order.
pub fn write_records_csv<W: Write>(records: &[DiagnosticsRecord], out: &mut W) -> Result<()> {
    let hs_orders: Vec<u32> = records
        .first()
        .map(|r| r.hs_norms.keys().copied().collect())
        .unwrap_or_default();
    for rec in records {
        let keys: Vec<u32> = rec.hs_norms.keys().copied().collect();
        if keys != hs_orders {
            return Err(SdError::BadRecords(
                "records disagree on tracked sobolev orders".into(),
            ));
        }
    }
    writeln!(out, "{}", records_csv_header(&hs_orders))?;
    for r in records {
        let mut cols = vec![
            fmt(r.t),
            fmt(r.mass),
            fmt(r.energy_form_a),
            fmt(r.energy_form_b),
            fmt(r.de_dt_rhs),
            fmt(r.h),
            fmt(r.h_prime),
            fmt(r.virial_rhs),
            fmt(r.grad_u_l2),
            fmt(r.u_linf),
            fmt(r.u_l4),
            fmt(r.v_l2),
            fmt(r.v_l1),
            fmt(r.v_grad_l2),
        ];
        for s in &hs_orders {
            cols.push(fmt(r.hs_norms[s]));
        }
        cols.push(fmt(r.boundary_leak));
        writeln!(out, "{}", cols.join(","))?;
    }
    Ok(())
}
