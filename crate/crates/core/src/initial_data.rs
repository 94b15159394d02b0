//! Canonical initial data families and data-level functionals.
//!
//! Besides Gaussian pulses, the module builds the compactly supported
//! four-dimensional family
//!
//! ```text
//!   u0(x) = (1/N) phi(|x| / N^2),    v0 = -|u0|^2,
//! ```
//!
//! with phi a smooth cutoff (1 on [0,1], 0 past 2). Its focusing energy is
//! exactly omega_3 (N^2 I1 - N^4 I2) with I1 = ∫ z^3 |phi'(z)|^2 dz and
//! I2 = ∫ z^3 |phi(z)|^4 dz, so the sign flips once N passes sqrt(I1/I2):
//! arbitrarily negative energies at arbitrarily small sup norm.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::debye::DebyeParams;
use crate::error::{Result, SdError};
use crate::grid::{
    self, gradient_norm_sq, inner_product, quadrature_weights, x_dot_grad, ComplexField, GridKind,
    GridSpec, RealField,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Gaussian,
    BesseBidegaray,
    NegativeEnergyBump,
    Custom,
}

/// How to seed the relaxation field alongside a Gaussian pulse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum V0Mode {
    Zero,
    MinusUSquared,
}

/// A (u0, v0) pair on a common grid, tagged with how it was built.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub u0: ComplexField,
    pub v0: RealField,
    pub provenance: Provenance,
}

/// Gaussian pulse `u0 = A exp(-|x|^2 / w^2)`, with `||u0||_L2^2 =
/// A^2 (pi w^2 / 2)^{n/2}`. Amplitude 1, width 1 and `v0 = -|u0|^2` on a
/// two-dimensional grid is the classical focusing test datum and is tagged
/// as such.
pub fn gaussian(
    spec: GridSpec,
    amplitude: f64,
    width: f64,
    v0_mode: V0Mode,
) -> Result<InitialData> {
    if !amplitude.is_finite() {
        return Err(SdError::InvalidData(format!(
            "amplitude must be finite, got {amplitude}"
        )));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(SdError::InvalidData(format!(
            "width must be positive and finite, got {width}"
        )));
    }
    let w2 = width * width;
    let u0 = ComplexField::from_fn(spec, |x| {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        Complex64::new(amplitude * (-r2 / w2).exp(), 0.0)
    });
    let v0 = match v0_mode {
        V0Mode::Zero => RealField::zeros(spec),
        V0Mode::MinusUSquared => {
            let q = u0.modulus_squared();
            RealField::from_values(spec, q.values().iter().map(|q| -q).collect())?
        }
    };
    let provenance = if amplitude == 1.0
        && width == 1.0
        && v0_mode == V0Mode::MinusUSquared
        && spec.dimension() == 2
    {
        Provenance::BesseBidegaray
    } else {
        Provenance::Gaussian
    };
    Ok(InitialData { u0, v0, provenance })
}

/// The default cutoff profile: 1 on [0, 1], 0 on [2, inf), and a reversed
/// quintic smoothstep on (1, 2), C^2 at both junctions.
pub fn cutoff_value(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let x = s - 1.0;
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

/// d/ds of [`cutoff_value`].
pub fn cutoff_slope(s: f64) -> f64 {
    if !(1.0..2.0).contains(&s) {
        0.0
    } else {
        let x = s - 1.0;
        -30.0 * x * x * (1.0 - x) * (1.0 - x)
    }
}

/// Builds the negative-energy family member with parameter N on a
/// four-dimensional radial grid. Fails if the grid cannot hold the support
/// (`R >= 2 N^2`) or resolves the cutoff annulus `[N^2, 2 N^2]` with fewer
/// than 32 nodes.
pub fn negative_energy_bump(spec: GridSpec, n_param: f64) -> Result<InitialData> {
    if spec.kind() != GridKind::Radial || spec.dimension() != 4 {
        return Err(SdError::InvalidData(
            "the negative-energy family lives on four-dimensional radial grids".into(),
        ));
    }
    if !(n_param.is_finite() && n_param > 0.0) {
        return Err(SdError::InvalidData(format!(
            "family parameter N must be positive, got {n_param}"
        )));
    }
    let n2 = n_param * n_param;
    if spec.extent() < 2.0 * n2 {
        return Err(SdError::DomainTooSmall(format!(
            "support radius 2 N^2 = {} exceeds the grid radius {}",
            2.0 * n2,
            spec.extent()
        )));
    }
    let annulus_nodes = (2.0 * n2 / spec.spacing()).floor() - (n2 / spec.spacing()).ceil() + 1.0;
    if annulus_nodes < 32.0 {
        return Err(SdError::UnderResolved(format!(
            "cutoff annulus [N^2, 2 N^2] holds {annulus_nodes} nodes; need at least 32"
        )));
    }
    let amp = 1.0 / n_param;
    let u0 = ComplexField::from_fn(spec, |x| Complex64::new(amp * cutoff_value(x[0] / n2), 0.0));
    let q = u0.modulus_squared();
    let v0 = RealField::from_values(spec, q.values().iter().map(|q| -q).collect())?;
    Ok(InitialData {
        u0,
        v0,
        provenance: Provenance::NegativeEnergyBump,
    })
}

/// The conserved-in-form energy of a data pair:
/// `E = ∫ |grad u0|^2 + 2 v0 |u0|^2 - lambda v0^2`.
pub fn energy_functional(d: &InitialData, p: &DebyeParams) -> f64 {
    let s = p.lambda.sign();
    let w = quadrature_weights(d.u0.spec());
    let pot: f64 =
        d.u0.values()
            .iter()
            .zip(d.v0.values())
            .zip(&w)
            .map(|((u, v), w)| (2.0 * v * u.norm_sqr() - s * v * v) * w)
            .sum();
    gradient_norm_sq(&d.u0) + pot
}

/// Variance pair: `h = (1/2) ∫ |x|^2 |u|^2` and its transport rate
/// `h' = Im ∫ (x . grad u) conj(u)`.
pub fn variance(u: &ComplexField) -> (f64, f64) {
    let w = quadrature_weights(u.spec());
    let r2 = u.spec().radius_sq_profile();
    let h: f64 = 0.5
        * u.values()
            .iter()
            .zip(&r2)
            .zip(&w)
            .map(|((z, r2), w)| r2 * z.norm_sqr() * w)
            .sum::<f64>();
    let h_prime = inner_product(&x_dot_grad(u), u).im;
    (h, h_prime)
}

const CSV_HEADER: &str = "coord,re_u,im_u,v";

/// Reads a data pair from the plain CSV schema `coord,re_u,im_u,v` (one node
/// per line, coordinate ascending). Only grids with a single coordinate axis
/// (radial, or Cartesian n = 1) have such a flat representation.
pub fn read_custom_csv<R: BufRead>(reader: R, spec: GridSpec) -> Result<InitialData> {
    let coords = spec.coords_1d().ok_or_else(|| {
        SdError::InvalidData("custom CSV data needs a single-coordinate grid".into())
    })?;
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| SdError::InvalidData("empty CSV".into()))??;
    if header.trim() != CSV_HEADER {
        return Err(SdError::InvalidData(format!(
            "expected header '{CSV_HEADER}', got '{header}'"
        )));
    }
    let mut u = Vec::with_capacity(coords.len());
    let mut v = Vec::with_capacity(coords.len());
    let mut prev = f64::NEG_INFINITY;
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 4 {
            return Err(SdError::InvalidData(format!(
                "line {}: expected 4 columns, got {}",
                i + 2,
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| SdError::InvalidData(format!("line {}: {e}", i + 2)))
        };
        let coord = parse(cols[0])?;
        if coord <= prev {
            return Err(SdError::InvalidData(format!(
                "line {}: coordinates must ascend",
                i + 2
            )));
        }
        prev = coord;
        u.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        v.push(parse(cols[3])?);
    }
    if u.len() != coords.len() {
        return Err(SdError::InvalidData(format!(
            "expected {} rows, got {}",
            coords.len(),
            u.len()
        )));
    }
    Ok(InitialData {
        u0: ComplexField::from_values(spec, u)?,
        v0: RealField::from_values(spec, v)?,
        provenance: Provenance::Custom,
    })
}

pub fn load_custom_csv(path: &Path, spec: GridSpec) -> Result<InitialData> {
    let file = std::fs::File::open(path)?;
    read_custom_csv(std::io::BufReader::new(file), spec)
}

/// Writes a data pair in the custom CSV schema (17 significant digits).
pub fn write_custom_csv<W: Write>(d: &InitialData, mut out: W) -> Result<()> {
    let coords = d.u0.spec().coords_1d().ok_or_else(|| {
        SdError::InvalidData("custom CSV data needs a single-coordinate grid".into())
    })?;
    writeln!(out, "{CSV_HEADER}")?;
    for ((c, u), v) in coords.iter().zip(d.u0.values()).zip(d.v0.values()) {
        writeln!(out, "{c:.16e},{:.16e},{:.16e},{v:.16e}", u.re, u.im)?;
    }
    Ok(())
}

/// `||u0||_L2^2` on the grid (the conserved mass).
pub fn mass(d: &InitialData) -> f64 {
    grid::l2_norm_sq(&d.u0)
}
