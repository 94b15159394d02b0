//! Closed-form analytic calculators: global-existence bootstrap thresholds
//! in 3-D and 4-D, the local well-posedness region, the relaxation-time
//! rescaling map, and the finite-time blow-up window.
//!
//! Everything here is an exact function of the supplied interpolation
//! constants c2, c3, c4 (Gagliardo-Nirenberg for n = 2, 3 and the critical
//! Sobolev embedding H^1 -> L^4 for n = 4). Sharp values are a research
//! problem of their own, so the constants default to 1 and can be
//! overridden; `estimate_gn_constant` provides a brute-force lower bound
//! for orientation.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SdError};
use crate::grid::{
    gradient_norm_sq, integrate_pointwise, l2_norm_sq, quadrature_weights, x_dot_grad_real,
    ComplexField, GridSpec, RealField,
};
use crate::initial_data::InitialData;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTheoryConstants", into = "RawTheoryConstants")]
pub struct TheoryConstants {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl TheoryConstants {
    pub fn new(c2: f64, c3: f64, c4: f64) -> Result<Self> {
        for (name, c) in [("c2", c2), ("c3", c3), ("c4", c4)] {
            if !(c.is_finite() && c > 0.0) {
                return Err(SdError::InvalidParameter(format!(
                    "interpolation constant {name} must be positive, got {c}"
                )));
            }
        }
        Ok(TheoryConstants { c2, c3, c4 })
    }
}

impl Default for TheoryConstants {
    fn default() -> Self {
        TheoryConstants {
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawTheoryConstants {
    c2: f64,
    c3: f64,
    c4: f64,
}

impl TryFrom<RawTheoryConstants> for TheoryConstants {
    type Error = SdError;
    fn try_from(raw: RawTheoryConstants) -> Result<Self> {
        TheoryConstants::new(raw.c2, raw.c3, raw.c4)
    }
}

impl From<TheoryConstants> for RawTheoryConstants {
    fn from(c: TheoryConstants) -> Self {
        RawTheoryConstants {
            c2: c.c2,
            c3: c.c3,
            c4: c.c4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionsMet {
    /// The smallness hypothesis on the conserved quantities
    /// (mass x energy < beta in 3-D; 0 <= E0 < beta in 4-D).
    pub smallness: bool,
    /// The initial-slope hypothesis ||grad u0||^2 <= gamma0.
    pub gradient: bool,
}

impl ConditionsMet {
    pub fn all(&self) -> bool {
        self.smallness && self.gradient
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub dimension: u32,
    /// Threshold on the smallness hypothesis: 4/(27 c3^8) in 3-D,
    /// 1/(4 c4^4) in 4-D.
    pub beta: f64,
    /// nu0 = c3^4 ||u0||_L2 (3-D only).
    pub nu0: Option<f64>,
    /// Smaller fixed point of x = E0 + nu0 x^{3/2} (3-D) or the closed-form
    /// root of gamma - c4^4 gamma^2 = E0 (4-D): the trapping level for
    /// ||grad u(t)||^2.
    pub gamma0: Option<f64>,
    /// Larger fixed point (3-D only): the barrier the trapped branch can
    /// never reach.
    pub gamma0_tilde: Option<f64>,
    /// Slope-one point 4/(9 nu0^2) separating the two fixed points (3-D).
    pub x0: Option<f64>,
    pub conditions_met: ConditionsMet,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Bisection for a sign change of `f` on [lo, hi]; the caller guarantees
/// f(lo) and f(hi) have opposite (or zero) signs.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let rising = f_lo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Global-existence bootstrap for n = 3. With nu0 = c3^4 ||u0||_L2, the
/// gradient bound propagates when mass x energy stays below
/// beta = 4/(27 c3^8): the curve f(x) = E0 + nu0 x^{3/2} then crosses the
/// diagonal at gamma0 < x0 = 4/(9 nu0^2) < gamma0_tilde, and
/// ||grad u(t)||^2 can never leave [0, gamma0] once it starts below.
pub fn bootstrap_3d(
    u0_mass: f64,
    e0: f64,
    grad_u0_sq: f64,
    c: &TheoryConstants,
) -> BootstrapReport {
    assert!(u0_mass >= 0.0, "mass is a square");
    let c3_4 = c.c3.powi(4);
    let beta = 4.0 / (27.0 * c3_4 * c3_4);
    let nu0 = c3_4 * u0_mass.sqrt();

    if e0 < 0.0 {
        return BootstrapReport {
            dimension: 3,
            beta,
            nu0: Some(nu0),
            gamma0: None,
            gamma0_tilde: None,
            x0: if nu0 > 0.0 {
                Some(4.0 / (9.0 * nu0 * nu0))
            } else {
                None
            },
            conditions_met: ConditionsMet::default(),
            note: Some(
                "negative pseudo-energy is incompatible with the smallness hypothesis".into(),
            ),
        };
    }

    let smallness = u0_mass * e0 < beta;
    let (gamma0, gamma0_tilde, x0) = if !smallness {
        (
            None,
            None,
            if nu0 > 0.0 {
                Some(4.0 / (9.0 * nu0 * nu0))
            } else {
                None
            },
        )
    } else if nu0 == 0.0 {
        // no nonlinearity in the comparison map: the fixed point is E0 itself
        (Some(e0), None, None)
    } else {
        let x0 = 4.0 / (9.0 * nu0 * nu0);
        let g = |x: f64| e0 + nu0 * x.powf(1.5) - x;
        // g(0) = E0 >= 0 and g(x0) = E0 - beta/mass' < 0 under smallness
        let gamma0 = if e0 == 0.0 { 0.0 } else { bisect(g, 0.0, x0) };
        let mut hi = x0.max(1e-300) * 2.0;
        while g(hi) <= 0.0 {
            hi *= 2.0;
        }
        let gamma0_tilde = bisect(g, x0, hi);
        (Some(gamma0), Some(gamma0_tilde), Some(x0))
    };

    let gradient = gamma0.map_or(false, |g0| grad_u0_sq <= g0);
    BootstrapReport {
        dimension: 3,
        beta,
        nu0: Some(nu0),
        gamma0,
        gamma0_tilde,
        x0,
        conditions_met: ConditionsMet {
            smallness,
            gradient,
        },
        note: None,
    }
}

/// Global-existence bootstrap for n = 4: closed form. For
/// 0 <= E0 < beta = 1/(4 c4^4) the trapping level is
/// gamma0 = (1 - sqrt(1 - 4 c4^4 E0)) / (2 c4^4), the smaller root of
/// gamma - c4^4 gamma^2 = E0, and gamma0 <= 1/(2 c4^4).
pub fn bootstrap_4d(e0: f64, grad_u0_sq: f64, c: &TheoryConstants) -> BootstrapReport {
    let c4_4 = c.c4.powi(4);
    let beta = 1.0 / (4.0 * c4_4);
    let in_range = (0.0..beta).contains(&e0);
    let gamma0 = in_range.then(|| (1.0 - (1.0 - 4.0 * c4_4 * e0).sqrt()) / (2.0 * c4_4));
    let gradient = gamma0.map_or(false, |g0| grad_u0_sq <= g0);
    BootstrapReport {
        dimension: 4,
        beta,
        nu0: None,
        gamma0,
        gamma0_tilde: None,
        x0: None,
        conditions_met: ConditionsMet {
            smallness: in_range,
            gradient,
        },
        note: (e0 < 0.0).then(|| {
            "negative pseudo-energy is incompatible with the smallness hypothesis".to_string()
        }),
    }
}

/// Membership in the local well-posedness region for data
/// (u0, v0) in H^s x H^kappa.
///
/// * n = 1: |s| - 1/2 <= kappa < min(s + 1/2, 2s + 1/2) and s > -1/4;
/// * n = 2, 3: max(0, s - 1) <= kappa <= min(2s, s + 1);
/// * n = 4: only the energy pair (s, kappa) = (1, 1).
pub fn lwp_region(n: u32, s: f64, kappa: f64) -> bool {
    match n {
        1 => s > -0.25 && s.abs() - 0.5 <= kappa && kappa < (s + 0.5).min(2.0 * s + 0.5),
        2 | 3 => (s - 1.0).max(0.0) <= kappa && kappa <= (2.0 * s).min(s + 1.0),
        4 => s == 1.0 && kappa == 1.0,
        _ => panic!("dimension {n} out of range (1..=4)"),
    }
}

/// Interior scale factors of the relaxation-time rescaling
/// `(u, v) -> (mu^{1/2} u(mu^{1/2} x, mu t), mu v(mu^{1/2} x, mu t))`,
/// which maps a solution with relaxation time mu to one with relaxation
/// time 1.
fn rescaled_spec(spec: &GridSpec, mu: f64) -> Result<GridSpec> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(SdError::InvalidParameter(format!(
            "rescaling needs mu > 0, got {mu}"
        )));
    }
    let stretch = mu.powf(-0.5);
    match spec.kind() {
        crate::grid::GridKind::CartesianPeriodic => {
            GridSpec::cartesian(spec.dimension(), spec.extent() * stretch, spec.points())
        }
        crate::grid::GridKind::Radial => {
            GridSpec::radial(spec.dimension(), spec.extent() * stretch, spec.points())
        }
    }
}

/// Rescales a wave field: node values pick up mu^{1/2}, the grid stretches
/// by mu^{-1/2}. Node j of the new grid sits exactly where node j of the
/// old grid lands under the change of variables, so this is a relabeling
/// with no interpolation error.
pub fn rescale_u_field(u: &ComplexField, mu: f64) -> Result<ComplexField> {
    let spec = rescaled_spec(u.spec(), mu)?;
    let amp = mu.sqrt();
    ComplexField::from_values(spec, u.values().iter().map(|z| z * amp).collect())
}

/// Rescales an excitation field: node values pick up mu, same grid stretch.
pub fn rescale_v_field(v: &RealField, mu: f64) -> Result<RealField> {
    let spec = rescaled_spec(v.spec(), mu)?;
    RealField::from_values(spec, v.values().iter().map(|x| x * mu).collect())
}

/// A state of the mu-system at time t corresponds to a state of the
/// rescaled unit-relaxation system at this time.
pub fn rescaled_time(t: f64, mu: f64) -> f64 {
    t / mu
}

/// Maps initial data for relaxation time mu onto initial data for
/// relaxation time 1. Mass transforms exactly as
/// `mu^{1 - n/2} ||u0||^2` under the discrete quadrature, since the
/// weights scale by mu^{-n/2} and |u0|^2 by mu.
pub fn rescale_to_mu1(data: &InitialData, mu: f64) -> Result<InitialData> {
    Ok(InitialData {
        u0: rescale_u_field(&data.u0, mu)?,
        v0: rescale_v_field(&data.v0, mu)?,
        provenance: data.provenance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupWindowReport {
    /// Time after which the relaxation memory term is dominated:
    /// t0 = max(0, ln(2K/|E0|)).
    pub t0: f64,
    /// First root beyond t0 of the comparison parabola: the variance (and
    /// with it the solution) cannot survive past T0.
    #[serde(rename = "T0")]
    pub t_star: f64,
    /// Bound on h(t0) fed into the parabola.
    #[serde(rename = "A")]
    pub a: f64,
    /// Bound on h'(t0).
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    /// K = ||2 v0 + x . grad v0||_Linf x ||u0||_L2^2, the memory amplitude.
    #[serde(rename = "K")]
    pub k: f64,
    /// The t0 estimate uses e^{-t/mu} <= e^{-t} for t >= 0, valid only for
    /// relaxation times below this value.
    pub requires_mu_below: f64,
}

/// Finite-time blow-up window for negative-energy data. The variance h(t)
/// is eventually dominated by the parabola
/// `g(t) = (E0/8)(t - t0)^2 + B(t - t0) + A` once the memory term has
/// decayed (t >= t0), so h hits zero no later than the parabola's root T0.
///
/// A and B are bounds on h(t0) and h'(t0); the caller typically reads them
/// off a simulated run record near t0.
pub fn blowup_window(data: &InitialData, e0: f64, a: f64, b: f64) -> Result<BlowupWindowReport> {
    if !(e0 < 0.0) {
        return Err(SdError::HypothesisNotMet(format!(
            "blow-up window needs strictly negative pseudo-energy, got E0 = {e0}"
        )));
    }
    if !(a > 0.0) {
        return Err(SdError::HypothesisNotMet(format!(
            "blow-up window needs a positive variance bound, got A = {a}"
        )));
    }
    let w = quadrature_weights(data.v0.spec());
    debug_assert_eq!(w.len(), data.v0.values().len());
    let xdv = x_dot_grad_real(&data.v0);
    let sup: f64 = data
        .v0
        .values()
        .iter()
        .zip(xdv.values())
        .map(|(v, xdv)| (2.0 * v + xdv).abs())
        .fold(0.0, f64::max);
    let k = sup * l2_norm_sq(&data.u0);

    let t0 = (2.0 * k / e0.abs()).ln().max(0.0);
    // positive root of (E0/8) tau^2 + B tau + A = 0; E0 < 0 and A > 0
    // guarantee exactly one
    let disc = (b * b + 0.5 * e0.abs() * a).sqrt();
    let tau = 4.0 * (b + disc) / e0.abs();
    Ok(BlowupWindowReport {
        t0,
        t_star: t0 + tau,
        a,
        b,
        e0,
        k,
        requires_mu_below: 1.0,
    })
}

/// Value of the comparison parabola at time t (for overlaying against the
/// recorded variance on [t0, T0]).
pub fn blowup_parabola(report: &BlowupWindowReport, t: f64) -> f64 {
    let tau = t - report.t0;
    report.e0 / 8.0 * tau * tau + report.b * tau + report.a
}

/// Brute-force lower bound for the interpolation constant in dimension n,
/// maximizing `||f||_L4 / (||f||_L2^{1-n/4} ||grad f||_L2^{n/4})` over the
/// super-Gaussian family `exp(-r^p)`. The exponents make the ratio
/// scale-invariant, so a single width suffices.
pub fn estimate_gn_constant(dimension: u32) -> Result<f64> {
    if !(2..=4).contains(&dimension) {
        return Err(SdError::InvalidParameter(format!(
            "interpolation estimate supports n in 2..=4, got {dimension}"
        )));
    }
    let spec = GridSpec::radial(dimension as usize, 14.0, 3000)?;
    let theta = dimension as f64 / 4.0;
    let mut best = 0.0f64;
    let mut p = 1.0;
    while p <= 4.0 + 1e-9 {
        let f = ComplexField::from_fn(spec, |x| {
            num_complex::Complex64::new((-x[0].powf(p)).exp(), 0.0)
        });
        let l4 = integrate_pointwise(&f, |z| {
            let a = z.norm_sqr();
            a * a
        })
        .powf(0.25);
        let l2 = l2_norm_sq(&f).sqrt();
        let grad = gradient_norm_sq(&f).sqrt();
        best = best.max(l4 / (l2.powf(1.0 - theta) * grad.powf(theta)));
        p += 0.05;
    }
    Ok(best)
}
