//! The means `V_n`, their powers `V_n^m`, the translation `S_θ` and the
//! Laplace–Beltrami operator, acting on zonal expansions as multipliers and on
//! `S^2` grid samples directly.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Result, VpmError};
use crate::function_space::{dot3, GridFunction, ZonalFunction, ZonalSpectral};
use crate::kernel::{KernelSpec, MultiplierSequence};
use crate::quadrature::{compensated_sum, shared_gauss_legendre};
use crate::special_fn::Dimension;

/// Operator kinds with a diagonal action on harmonic expansions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OperatorKind {
    Vpm { n: usize },
    VpmPower { n: usize, m: u32 },
    Translation { theta: f64 },
    LaplaceBeltrami,
    LaplaceBeltramiSquared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorDescriptor {
    pub kind: OperatorKind,
    pub d: Dimension,
}

impl OperatorDescriptor {
    pub fn new(kind: OperatorKind, d: Dimension) -> Self {
        OperatorDescriptor { kind, d }
    }

    pub fn multipliers(&self, len: usize) -> MultiplierSequence {
        match self.kind {
            OperatorKind::Vpm { n } => MultiplierSequence::vpm(n, self.d, len),
            OperatorKind::VpmPower { n, m } => MultiplierSequence::vpm_power(n, m, self.d, len),
            OperatorKind::Translation { theta } => MultiplierSequence::translation(theta, self.d, len),
            OperatorKind::LaplaceBeltrami => MultiplierSequence::laplace_beltrami(self.d, len),
            OperatorKind::LaplaceBeltramiSquared => MultiplierSequence::laplace_beltrami_squared(self.d, len),
        }
    }

    pub fn apply(&self, f: &ZonalSpectral) -> Result<ZonalSpectral> {
        if let OperatorKind::Translation { theta } = self.kind {
            check_translation_angle(theta)?;
        }
        apply_multiplier(f, &self.multipliers(f.coeffs.len()))
    }
}

/// `a_k ↦ m_k a_k`.
pub fn apply_multiplier(f: &ZonalSpectral, m: &MultiplierSequence) -> Result<ZonalSpectral> {
    if m.len() < f.coeffs.len() {
        return Err(VpmError::usage(format!(
            "multiplier sequence of length {} is shorter than the expansion ({} coefficients)",
            m.len(),
            f.coeffs.len()
        )));
    }
    Ok(ZonalSpectral::new(f.lambda, f.coeffs.iter().zip(&m.values).map(|(a, w)| a * w).collect()))
}

fn dimension_of(f: &ZonalSpectral) -> Result<Dimension> {
    Dimension::new((2.0 * f.lambda + 2.0).round() as u32)
}

/// `V_n f`.
pub fn vpm_means(f: &ZonalSpectral, n: usize) -> Result<ZonalSpectral> {
    let d = dimension_of(f)?;
    apply_multiplier(f, &MultiplierSequence::vpm(n, d, f.coeffs.len()))
}

/// `V_n^m f`, multipliers `ω_{n,k}^m`.
pub fn vpm_iterated(f: &ZonalSpectral, n: usize, m: u32) -> Result<ZonalSpectral> {
    if m == 0 {
        return Err(VpmError::domain("power of V_n must be at least 1"));
    }
    let d = dimension_of(f)?;
    apply_multiplier(f, &MultiplierSequence::vpm_power(n, m, d, f.coeffs.len()))
}

fn check_translation_angle(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI) {
        return Err(VpmError::domain(format!("translation angle must lie in (0, π), got {theta}")));
    }
    Ok(())
}

/// `S_θ f`, multipliers `Q_k^λ(cos θ)`.
pub fn translate_spectral(f: &ZonalSpectral, theta: f64) -> Result<ZonalSpectral> {
    check_translation_angle(theta)?;
    let d = dimension_of(f)?;
    apply_multiplier(f, &MultiplierSequence::translation(theta, d, f.coeffs.len()))
}

/// `D f` or `D² f`.
pub fn laplace_beltrami(f: &ZonalSpectral, power: u32) -> Result<ZonalSpectral> {
    let d = dimension_of(f)?;
    let m = MultiplierSequence::laplace_beltrami(d, f.coeffs.len());
    match power {
        1 => apply_multiplier(f, &m),
        // applied twice rather than squared, so D² f and D(D f) agree bit for bit
        2 => apply_multiplier(&apply_multiplier(f, &m)?, &m),
        _ => Err(VpmError::domain(format!("Laplace–Beltrami power must be 1 or 2, got {power}"))),
    }
}

/// Orthonormal tangent pair `(u, v)` at `mu`: `u = (a × μ)/|a × μ|` with `a`
/// the north pole, or the x-axis when `|μ_3| > 0.9`; `v = μ × u`.
pub fn tangent_frame(mu: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if mu[2].abs() > 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
    let u = normalize(cross(&a, mu));
    let v = cross(mu, &u);
    (u, v)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let r = dot3(&a, &a).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}

/// Default trapezoid size on the translation circle for band limit `k`.
pub fn default_circle_order(band_limit: usize) -> usize {
    4 * band_limit + 16
}

/// `S_θ f(μ)` at `d = 3`: the trapezoid mean of `f` over the circle
/// `{ν : μ·ν = cos θ}`, with `f` evaluated through its analytic profile.
pub fn translate_direct(f: &GridFunction, theta: f64, point: &[f64; 3], circle_order: usize) -> Result<f64> {
    check_translation_angle(theta)?;
    if circle_order == 0 {
        return Err(VpmError::domain("circle order must be positive"));
    }
    let mu = normalize(*point);
    let (u, v) = tangent_frame(&mu);
    let (s, c) = theta.sin_cos();
    let step = 2.0 * PI / circle_order as f64;
    let mut values = Vec::with_capacity(circle_order);
    for j in 0..circle_order {
        let (sp, cp) = (step * j as f64).sin_cos();
        let nu = [
            c * mu[0] + s * (cp * u[0] + sp * v[0]),
            c * mu[1] + s * (cp * u[1] + sp * v[1]),
            c * mu[2] + s * (cp * u[2] + sp * v[2]),
        ];
        values.push(f.eval_at(&nu)?);
    }
    Ok(compensated_sum(values) / circle_order as f64)
}

/// `S_θ f` at geodesic distance `psi` from the pole of a zonal `f = g(arc(e, ·))`,
/// at any `d`: the circle mean reduces to
/// `∫_0^π g(arccos(cos θ cos ψ + sin θ sin ψ cos φ)) sin^{d-3}φ dφ / ∫_0^π sin^{d-3}φ dφ`,
/// evaluated with an `order`-point Gauss rule in `φ`.
pub fn translate_profile(g: &dyn ZonalFunction, d: Dimension, theta: f64, psi: f64, order: usize) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) || !(0.0..=PI).contains(&psi) {
        return Err(VpmError::domain(format!("angles must lie in [0, π], got θ={theta}, ψ={psi}")));
    }
    let rule = shared_gauss_legendre(order)?;
    let e = d.get() as i32 - 3;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let mut num = Vec::with_capacity(order);
    let mut den = Vec::with_capacity(order);
    for (phi, w) in rule.mapped(0.0, PI) {
        let w = w * phi.sin().powi(e);
        let x = (ct * cp + st * sp * phi.cos()).clamp(-1.0, 1.0);
        num.push(w * g.value_at(x.acos()));
        den.push(w);
    }
    Ok(compensated_sum(num) / compensated_sum(den))
}

/// `V_n f` at `d = 3` by dense quadrature against the kernel:
/// `Σ_j w_j f(ν_j) v_n(arccos(μ·ν_j)) / (2π)` at every grid point `μ`.
pub fn vpm_grid(f: &GridFunction, spec: &KernelSpec) -> Result<GridFunction> {
    if spec.d.get() != 3 {
        return Err(VpmError::usage("grid convolution is only available at d = 3"));
    }
    let grid = &f.grid;
    let weighted: Vec<f64> = f.values.iter().zip(&grid.point_weights).map(|(v, w)| v * w).collect();
    let values = grid
        .points
        .iter()
        .map(|mu| {
            compensated_sum(
                grid.points.iter().zip(&weighted).map(|(nu, fw)| fw * spec.eval_cos(dot3(mu, nu).clamp(-1.0, 1.0))),
            ) / (2.0 * PI)
        })
        .collect();
    Ok(GridFunction { grid: f.grid.clone(), values, source: None })
}
