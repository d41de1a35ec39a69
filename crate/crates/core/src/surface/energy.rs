use std::f64::consts::PI;

use super::{GeometryCache, MaterialParams, SurfaceShape};
use crate::error::{Error, Result};

/// Canham–Helfrich energy and global size monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub f_bend: f64,
    pub f_gauss: f64,
    pub area: f64,
    pub volume: f64,
    /// Isoperimetric ratio `6√π V / A^{3/2}`.
    pub sigma: f64,
}

impl EnergyReport {
    pub fn from_geometry(g: &GeometryCache, params: &MaterialParams) -> Self {
        let c0 = params.c0;
        let bend = g.integrate_with(|i| (g.mean_h[i] - c0).powi(2));
        let gauss = g.integrate(&g.gauss_k);
        let area = g.area();
        let volume = g.volume();
        Self {
            f_bend: 0.5 * params.kappa * bend,
            f_gauss: params.kappa_g * gauss,
            area,
            volume,
            sigma: 6.0 * PI.sqrt() * volume / area.powf(1.5),
        }
    }

    /// Energy that drives the dynamics. The Gaussian term is a topological
    /// constant and is reported separately.
    pub fn total(&self) -> f64 {
        self.f_bend
    }
}

pub fn energy_ch(shape: &SurfaceShape, params: &MaterialParams) -> Result<EnergyReport> {
    Ok(EnergyReport::from_geometry(&shape.geometry()?, params))
}

/// `κ(Δ_g H + H(H²/2 − 2K) + C0(2K − H C0/2))` at the nodes.
pub fn grad_l2_f(g: &GeometryCache, params: &MaterialParams) -> Result<Vec<f64>> {
    let lap = g.laplace_beltrami(&g.mean_h)?;
    let c0 = params.c0;
    Ok((0..g.len())
        .map(|i| {
            let (h, k) = (g.mean_h[i], g.gauss_k[i]);
            params.kappa * (lap[i] + h * (0.5 * h * h - 2.0 * k) + c0 * (2.0 * k - 0.5 * h * c0))
        })
        .collect())
}

/// Normal speed `δh (ω̂·ν)` of the surface when the height moves by `δh`.
pub fn normal_speed_of_height(g: &GeometryCache, dh: &[f64]) -> Vec<f64> {
    dh.iter().zip(&g.omega_dot_nu).map(|(d, c)| d * c).collect()
}

/// Bulk and surface Reynolds numbers `(ρ_b L²/(μ_b T), ρ L²/(μ T))`.
pub fn reynolds_numbers(params: &MaterialParams, l_typ: f64, t_typ: f64) -> Result<(f64, f64)> {
    if !(l_typ > 0.0 && t_typ > 0.0 && params.mu_b > 0.0 && params.mu > 0.0) {
        return Err(Error::InvalidParameter(
            "Reynolds numbers need positive length, time and viscosities".into(),
        ));
    }
    let l2t = l_typ * l_typ / t_typ;
    Ok((params.rho_b * l2t / params.mu_b, params.rho * l2t / params.mu))
}
