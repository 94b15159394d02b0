//! Spatial discretization: grids, fields, quadrature and differential ops.
//!
//! Two grid families are supported:
//!
//! * `CartesianPeriodic` (n = 1, 2): uniform nodes on `[-L, L)^n` with
//!   periodic wrap-around. Differential operators act in Fourier space,
//!   so they are exact on resolved modes and the L2 norm satisfies a
//!   discrete Parseval identity.
//! * `Radial` (n = 2, 3, 4): radially symmetric fields sampled at
//!   `r_j = j * dr`, `dr = R / (points - 1)`, with a homogeneous Dirichlet
//!   boundary at `r = R`. The Laplacian is the conservative flux form of
//!   `r^{1-n} d/dr (r^{n-1} d/dr)`; quadrature weights are the exact
//!   cell masses of the finite-volume cells, which makes the operator
//!   exactly self-adjoint in the weighted inner product (up to roundoff)
//!   and sums the node weights to the exact ball volume.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SdError};
use crate::fourier;

/// Highest radial derivative order available to [`sobolev_norm`]; repeated
/// second-order finite differencing degrades past this point.
pub const RADIAL_SOBOLEV_MAX: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    CartesianPeriodic,
    Radial,
}

/// Validated grid description. Construct through [`GridSpec::cartesian`] or
/// [`GridSpec::radial`]; deserialization funnels through the same checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridSpec", into = "RawGridSpec")]
pub struct GridSpec {
    kind: GridKind,
    dimension: usize,
    extent: f64,
    points: usize,
}

#[derive(Serialize, Deserialize)]
struct RawGridSpec {
    kind: GridKind,
    dimension: usize,
    extent: f64,
    points: usize,
}

impl From<GridSpec> for RawGridSpec {
    fn from(s: GridSpec) -> Self {
        RawGridSpec {
            kind: s.kind,
            dimension: s.dimension,
            extent: s.extent,
            points: s.points,
        }
    }
}

impl TryFrom<RawGridSpec> for GridSpec {
    type Error = SdError;
    fn try_from(r: RawGridSpec) -> Result<Self> {
        match r.kind {
            GridKind::CartesianPeriodic => GridSpec::cartesian(r.dimension, r.extent, r.points),
            GridKind::Radial => GridSpec::radial(r.dimension, r.extent, r.points),
        }
    }
}

impl GridSpec {
    /// Periodic box `[-half_width, half_width)^dimension`, `points` nodes per axis.
    pub fn cartesian(dimension: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(SdError::InvalidGrid(format!(
                "periodic cartesian grids support dimension 1 or 2, got {dimension}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(SdError::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if points < 8 {
            return Err(SdError::InvalidGrid(format!(
                "need at least 8 nodes per axis, got {points}"
            )));
        }
        Ok(GridSpec {
            kind: GridKind::CartesianPeriodic,
            dimension,
            extent: half_width,
            points,
        })
    }

    /// Radial grid on `[0, radius]` with a Dirichlet boundary at `radius`.
    pub fn radial(dimension: usize, radius: f64, points: usize) -> Result<Self> {
        if !(2..=4).contains(&dimension) {
            return Err(SdError::InvalidGrid(format!(
                "radial grids support dimension 2, 3 or 4, got {dimension}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(SdError::InvalidGrid(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if points < 8 {
            return Err(SdError::InvalidGrid(format!(
                "need at least 8 radial nodes, got {points}"
            )));
        }
        Ok(GridSpec {
            kind: GridKind::Radial,
            dimension,
            extent: radius,
            points,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Half-width of the periodic box, or the outer radius.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Nodes per axis (Cartesian) or radial node count.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn node_count(&self) -> usize {
        match self.kind {
            GridKind::CartesianPeriodic => self.points.pow(self.dimension as u32),
            GridKind::Radial => self.points,
        }
    }

    /// Mesh width: `dx = 2L / points` or `dr = R / (points - 1)`.
    pub fn spacing(&self) -> f64 {
        match self.kind {
            GridKind::CartesianPeriodic => 2.0 * self.extent / self.points as f64,
            GridKind::Radial => self.extent / (self.points - 1) as f64,
        }
    }

    /// Surface area of the unit sphere S^{n-1} (radial grids only).
    pub fn sphere_area(&self) -> f64 {
        use std::f64::consts::PI;
        match self.dimension {
            2 => 2.0 * PI,
            3 => 4.0 * PI,
            4 => 2.0 * PI * PI,
            _ => unreachable!("radial dimension is 2..=4"),
        }
    }

    fn axis_coord(&self, i: usize) -> f64 {
        match self.kind {
            GridKind::CartesianPeriodic => -self.extent + i as f64 * self.spacing(),
            GridKind::Radial => i as f64 * self.spacing(),
        }
    }

    /// `|x|^2` at every node, in storage order.
    pub fn radius_sq_profile(&self) -> Vec<f64> {
        self.build(|x| x.iter().map(|c| c * c).sum())
    }

    /// Node coordinates for grids with a single coordinate axis (radial or
    /// one-dimensional Cartesian); `None` for the 2-D box.
    pub fn coords_1d(&self) -> Option<Vec<f64>> {
        match (self.kind, self.dimension) {
            (GridKind::Radial, _) | (GridKind::CartesianPeriodic, 1) => {
                Some((0..self.points).map(|i| self.axis_coord(i)).collect())
            }
            _ => None,
        }
    }

    fn build<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.node_count());
        match (self.kind, self.dimension) {
            (GridKind::Radial, _) | (GridKind::CartesianPeriodic, 1) => {
                for i in 0..self.points {
                    out.push(f(&[self.axis_coord(i)]));
                }
            }
            (GridKind::CartesianPeriodic, 2) => {
                for iy in 0..self.points {
                    let y = self.axis_coord(iy);
                    for ix in 0..self.points {
                        out.push(f(&[self.axis_coord(ix), y]));
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }
}

/// Quadrature weights, one per node. Cartesian: the uniform `dx^n`
/// (trapezoid rule on a periodic lattice). Radial: exact finite-volume cell
/// masses `omega_{n-1} * (r_out^n - r_in^n) / n`, which sum to the exact
/// volume of the ball of radius R.
pub fn quadrature_weights(spec: &GridSpec) -> Vec<f64> {
    match spec.kind() {
        GridKind::CartesianPeriodic => {
            let w = spec.spacing().powi(spec.dimension() as i32);
            vec![w; spec.node_count()]
        }
        GridKind::Radial => {
            let n = spec.dimension() as f64;
            let dr = spec.spacing();
            let omega = spec.sphere_area();
            let m = spec.points();
            let face = |j: f64| (j * dr).powf(n) / n; // cumulative r^n/n at radius j*dr
            let mut w = Vec::with_capacity(m);
            w.push(omega * face(0.5));
            for j in 1..m - 1 {
                w.push(omega * (face(j as f64 + 0.5) - face(j as f64 - 0.5)));
            }
            w.push(omega * (face((m - 1) as f64) - face((m - 1) as f64 - 0.5)));
            w
        }
    }
}

/// Face areas `r_{j+1/2}^{n-1}` and cell volumes (sans the spherical factor)
/// for the flux-form radial Laplacian. Faces are indexed between nodes j and
/// j+1 for j = 0..points-2.
fn radial_geometry(spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    let n = spec.dimension() as f64;
    let dr = spec.spacing();
    let m = spec.points();
    let areas: Vec<f64> = (0..m - 1)
        .map(|j| ((j as f64 + 0.5) * dr).powf(n - 1.0))
        .collect();
    let face = |j: f64| (j * dr).powf(n) / n;
    let mut vols = Vec::with_capacity(m - 1);
    vols.push(face(0.5));
    for j in 1..m - 1 {
        vols.push(face(j as f64 + 0.5) - face(j as f64 - 0.5));
    }
    (areas, vols)
}

/// Tridiagonal matrix of the Dirichlet radial Laplacian over the interior
/// nodes j = 0..points-2 (the boundary node is pinned to zero): returns
/// (sub, diag, sup) with `sub[j]` coupling j to j-1 and `sup[j]` j to j+1.
pub(crate) fn radial_laplacian_tridiag(spec: &GridSpec) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (areas, vols) = radial_geometry(spec);
    let dr = spec.spacing();
    let rows = spec.points() - 1;
    let mut sub = vec![0.0; rows];
    let mut diag = vec![0.0; rows];
    let mut sup = vec![0.0; rows];
    for j in 0..rows {
        let inner = if j == 0 { 0.0 } else { areas[j - 1] };
        let outer = areas[j];
        // flux difference (area * du/dr) over the cell mass
        let scale = 1.0 / (dr * vols[j]);
        diag[j] = -(inner + outer) * scale;
        if j > 0 {
            sub[j] = inner * scale;
        }
        if j < rows - 1 {
            sup[j] = outer * scale;
        }
        // at j = rows-1 the outer flux couples to the boundary value 0
    }
    (sub, diag, sup)
}

/// Complex samples, one per node, on a fixed grid. Treated as immutable
/// snapshots by all operators: every op returns a fresh field.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    pub(crate) spec: GridSpec,
    pub(crate) values: Vec<Complex64>,
}

/// Real samples, one per node (used for the relaxation field v and other
/// real densities).
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    pub(crate) spec: GridSpec,
    pub(crate) values: Vec<f64>,
}

impl ComplexField {
    pub fn from_fn(spec: GridSpec, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let values = spec.build(f);
        ComplexField { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        ComplexField {
            spec,
            values: vec![Complex64::new(0.0, 0.0); spec.node_count()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != spec.node_count() {
            return Err(SdError::InvalidData(format!(
                "expected {} samples, got {}",
                spec.node_count(),
                values.len()
            )));
        }
        Ok(ComplexField { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// |u|^2 sampled per node.
    pub fn modulus_squared(&self) -> RealField {
        RealField {
            spec: self.spec,
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

impl RealField {
    pub fn from_fn(spec: GridSpec, f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = spec.build(f);
        RealField { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        RealField {
            spec,
            values: vec![0.0; spec.node_count()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.node_count() {
            return Err(SdError::InvalidData(format!(
                "expected {} samples, got {}",
                spec.node_count(),
                values.len()
            )));
        }
        Ok(RealField { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    fn to_complex(&self) -> ComplexField {
        ComplexField {
            spec: self.spec,
            values: self
                .values
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        }
    }
}

/// Quadrature of a real density over the domain.
pub fn integrate(f: &RealField) -> f64 {
    let w = quadrature_weights(&f.spec);
    f.values.iter().zip(&w).map(|(v, w)| v * w).sum()
}

/// Quadrature of `g(u_j)` over the domain, avoiding a temporary field.
pub fn integrate_pointwise(u: &ComplexField, g: impl Fn(Complex64) -> f64) -> f64 {
    let w = quadrature_weights(&u.spec);
    u.values.iter().zip(&w).map(|(v, w)| g(*v) * w).sum()
}

pub fn integrate_pointwise_real(f: &RealField, g: impl Fn(f64) -> f64) -> f64 {
    let w = quadrature_weights(&f.spec);
    f.values.iter().zip(&w).map(|(v, w)| g(*v) * w).sum()
}

/// Weighted inner product `<a, b> = ∫ a conj(b)`.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Complex64 {
    assert_eq!(a.spec, b.spec, "fields live on different grids");
    let w = quadrature_weights(&a.spec);
    a.values
        .iter()
        .zip(&b.values)
        .zip(&w)
        .map(|((x, y), w)| x * y.conj() * w)
        .sum()
}

pub fn l2_norm_sq(u: &ComplexField) -> f64 {
    integrate_pointwise(u, |z| z.norm_sqr())
}

pub fn sup_norm(u: &ComplexField) -> f64 {
    u.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Forward transform with the unitary normalization: `sum |u_hat|^2` equals
/// `integrate(|u|^2)` exactly in exact arithmetic. Cartesian only.
fn unitary_spectrum(u: &ComplexField) -> Vec<Complex64> {
    let n = u.spec.points();
    let dim = u.spec.dimension();
    let mut vals = u.values.clone();
    fourier::dft_forward(&mut vals, n, dim);
    let scale = (u.spec.spacing().powi(dim as i32) / vals.len() as f64).sqrt();
    for z in vals.iter_mut() {
        *z *= scale;
    }
    vals
}

/// `sum_k g(|xi_k|^2) |u_hat_k|^2` with the unitary spectrum (Cartesian only).
fn spectral_sum(u: &ComplexField, g: impl Fn(f64) -> f64) -> f64 {
    let spec = u.spec;
    let n = spec.points();
    let xi = fourier::wavenumbers(n, spec.extent());
    let hat = unitary_spectrum(u);
    match spec.dimension() {
        1 => hat
            .iter()
            .zip(&xi)
            .map(|(z, x)| g(x * x) * z.norm_sqr())
            .sum(),
        2 => {
            let mut acc = 0.0;
            for ky in 0..n {
                let xy2 = xi[ky] * xi[ky];
                for kx in 0..n {
                    let k2 = xi[kx] * xi[kx] + xy2;
                    acc += g(k2) * hat[ky * n + kx].norm_sqr();
                }
            }
            acc
        }
        _ => unreachable!(),
    }
}

/// Multiply the spectrum by `g(|xi|^2)` and transform back (Cartesian only).
pub(crate) fn apply_spectral_multiplier(
    u: &ComplexField,
    g: impl Fn(f64) -> Complex64,
) -> ComplexField {
    let spec = u.spec;
    let n = spec.points();
    let dim = spec.dimension();
    let xi = fourier::wavenumbers(n, spec.extent());
    let mut vals = u.values.clone();
    fourier::dft_forward(&mut vals, n, dim);
    match dim {
        1 => {
            for (z, x) in vals.iter_mut().zip(&xi) {
                *z *= g(x * x);
            }
        }
        2 => {
            for ky in 0..n {
                let xy2 = xi[ky] * xi[ky];
                for kx in 0..n {
                    vals[ky * n + kx] *= g(xi[kx] * xi[kx] + xy2);
                }
            }
        }
        _ => unreachable!(),
    }
    fourier::dft_inverse(&mut vals, n, dim);
    ComplexField { spec, values: vals }
}

fn spectral_partial(u: &ComplexField, axis: usize) -> ComplexField {
    let spec = u.spec;
    let n = spec.points();
    let dim = spec.dimension();
    let xi = fourier::wavenumbers(n, spec.extent());
    let mut vals = u.values.clone();
    fourier::dft_forward(&mut vals, n, dim);
    match dim {
        1 => {
            for (z, x) in vals.iter_mut().zip(&xi) {
                *z *= Complex64::new(0.0, *x);
            }
        }
        2 => {
            for ky in 0..n {
                for kx in 0..n {
                    let x = if axis == 0 { xi[kx] } else { xi[ky] };
                    vals[ky * n + kx] *= Complex64::new(0.0, x);
                }
            }
        }
        _ => unreachable!(),
    }
    fourier::dft_inverse(&mut vals, n, dim);
    ComplexField { spec, values: vals }
}

/// Second-order first derivative in r (centered interior, one-sided ends).
fn radial_diff(values: &[Complex64], dr: f64) -> Vec<Complex64> {
    let m = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let h = 1.0 / (2.0 * dr);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * h;
    for j in 1..m - 1 {
        out[j] = (values[j + 1] - values[j - 1]) * h;
    }
    out[m - 1] = (3.0 * values[m - 1] - 4.0 * values[m - 2] + values[m - 3]) * h;
    out
}

/// Discrete Laplacian of `(1/2) Delta`-free form: the full `Delta u`.
///
/// Cartesian: exact Fourier multiplier `-|xi|^2`. Radial: conservative flux
/// form with `Delta u(0) = n * u_rr(0)` at the axis and Dirichlet zero at the
/// outer boundary (the stored boundary node maps to 0).
pub fn laplacian(u: &ComplexField) -> ComplexField {
    match u.spec.kind() {
        GridKind::CartesianPeriodic => apply_spectral_multiplier(u, |k2| Complex64::new(-k2, 0.0)),
        GridKind::Radial => {
            let spec = u.spec;
            let (areas, vols) = radial_geometry(&spec);
            let dr = spec.spacing();
            let m = spec.points();
            let v = &u.values;
            let mut out = vec![Complex64::new(0.0, 0.0); m];
            for j in 0..m - 1 {
                let up = if j + 1 == m - 1 {
                    Complex64::new(0.0, 0.0) // Dirichlet boundary
                } else {
                    v[j + 1]
                };
                let outer = areas[j] * (up - v[j]);
                let inner = if j == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    areas[j - 1] * (v[j] - v[j - 1])
                };
                out[j] = (outer - inner) / (dr * vols[j]);
            }
            ComplexField { spec, values: out }
        }
    }
}

/// `||grad u||_{L2}^2`. Cartesian: `sum |xi|^2 |u_hat|^2`. Radial: midpoint
/// quadrature of `omega r^{n-1} |du/dr|^2` with face-centered differences,
/// which matches `-Re<Laplacian u, u>` identically for decaying fields.
pub fn gradient_norm_sq(u: &ComplexField) -> f64 {
    match u.spec.kind() {
        GridKind::CartesianPeriodic => spectral_sum(u, |k2| k2),
        GridKind::Radial => {
            let spec = u.spec;
            let (areas, _) = radial_geometry(&spec);
            let dr = spec.spacing();
            let omega = spec.sphere_area();
            let mut acc = 0.0;
            for j in 0..spec.points() - 1 {
                let d = (u.values[j + 1] - u.values[j]).norm_sqr() / (dr * dr);
                acc += areas[j] * d;
            }
            omega * acc * dr
        }
    }
}

pub fn gradient_norm_sq_real(f: &RealField) -> f64 {
    gradient_norm_sq(&f.to_complex())
}

/// H^s norm. Cartesian: `(sum (1+|xi|^2)^s |u_hat|^2)^{1/2}` for any s.
/// Radial: the derivative-ladder proxy `(sum_{k<=s} ||d^k u/dr^k||^2)^{1/2}`,
/// limited to s <= RADIAL_SOBOLEV_MAX by the stencil order.
pub fn sobolev_norm(u: &ComplexField, s: u32) -> Result<f64> {
    match u.spec.kind() {
        GridKind::CartesianPeriodic => Ok(spectral_sum(u, |k2| (1.0 + k2).powi(s as i32)).sqrt()),
        GridKind::Radial => {
            if s > RADIAL_SOBOLEV_MAX {
                return Err(SdError::UnsupportedSobolevOrder {
                    requested: s,
                    max: RADIAL_SOBOLEV_MAX,
                });
            }
            let w = quadrature_weights(&u.spec);
            let dr = u.spec.spacing();
            let mut acc = 0.0;
            let mut deriv = u.values.clone();
            let norm_sq = |vals: &[Complex64]| -> f64 {
                vals.iter().zip(&w).map(|(z, w)| z.norm_sqr() * w).sum()
            };
            acc += norm_sq(&deriv);
            for _ in 0..s {
                deriv = radial_diff(&deriv, dr);
                acc += norm_sq(&deriv);
            }
            Ok(acc.sqrt())
        }
    }
}

/// The dilation-generator term `x . grad u` (radial: `r du/dr`).
pub fn x_dot_grad(u: &ComplexField) -> ComplexField {
    match u.spec.kind() {
        GridKind::CartesianPeriodic => {
            let spec = u.spec;
            let n = spec.points();
            let dim = spec.dimension();
            let mut out = vec![Complex64::new(0.0, 0.0); u.values.len()];
            for axis in 0..dim {
                let d = spectral_partial(u, axis);
                match dim {
                    1 => {
                        for (i, z) in d.values.iter().enumerate() {
                            out[i] += spec.axis_coord(i) * z;
                        }
                    }
                    2 => {
                        for iy in 0..n {
                            for ix in 0..n {
                                let c = if axis == 0 {
                                    spec.axis_coord(ix)
                                } else {
                                    spec.axis_coord(iy)
                                };
                                out[iy * n + ix] += c * d.values[iy * n + ix];
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
            ComplexField { spec, values: out }
        }
        GridKind::Radial => {
            let spec = u.spec;
            let dr = spec.spacing();
            let d = radial_diff(&u.values, dr);
            let values = d
                .iter()
                .enumerate()
                .map(|(j, z)| z * (j as f64 * dr))
                .collect();
            ComplexField { spec, values }
        }
    }
}

pub fn x_dot_grad_real(f: &RealField) -> RealField {
    let g = x_dot_grad(&f.to_complex());
    RealField {
        spec: f.spec,
        values: g.values.iter().map(|z| z.re).collect(),
    }
}

/// Amplitude at the domain edge, used to monitor truncation-boundary
/// contamination. Radial: the last interior node (the boundary node itself
/// is pinned by the Dirichlet condition). Cartesian: the wrap-around seam.
pub fn boundary_amplitude(u: &ComplexField) -> f64 {
    match u.spec.kind() {
        GridKind::Radial => u.values[u.spec.points() - 2].norm(),
        GridKind::CartesianPeriodic => {
            let n = u.spec.points();
            match u.spec.dimension() {
                1 => u.values[0].norm(),
                2 => {
                    let mut m: f64 = 0.0;
                    for ix in 0..n {
                        m = m.max(u.values[ix].norm());
                    }
                    for iy in 0..n {
                        m = m.max(u.values[iy * n].norm());
                    }
                    m
                }
                _ => unreachable!(),
            }
        }
    }
}
