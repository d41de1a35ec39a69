//! Normal advection of radial graphs and finite-difference checks of the
//! transport identities.
//!
//! A graph `ρ = a + h` moves only radially, so a normal speed `w` becomes the
//! radial speed `s = w / (ω̂·ν)`. The material points of the graph
//! parametrization then carry the tangential velocity `v = P(s ω̂)`, which
//! the transport formulas below take into account.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphharm::ShCoeffs;
use crate::surface::{surface_div, GeometryCache, SurfaceShape, SurfaceVelocity, V3};

/// One explicit advection step.
#[derive(Debug, Clone)]
pub struct AdvectRecord {
    pub shape_before: SurfaceShape,
    pub shape_after: SurfaceShape,
    pub dt: f64,
    pub w: Vec<f64>,
}

/// Radial speed coefficients `s = w/(ω̂·ν)`, truncated to the shape band.
pub fn radial_speed(shape: &SurfaceShape, g: &GeometryCache, w: &[f64]) -> Result<ShCoeffs> {
    if w.len() != g.len() {
        return Err(Error::Shape(format!("normal speed has {} samples, grid has {}", w.len(), g.len())));
    }
    let s: Vec<f64> = w.iter().zip(&g.omega_dot_nu).map(|(w, c)| w / c).collect();
    Ok(shape.grid.analyze(&s)?.resized(shape.lmax()))
}

/// Move the height by `dt·s` for radial speed coefficients `s`.
pub fn advect_radial(shape: &SurfaceShape, s: &ShCoeffs, dt: f64) -> Result<SurfaceShape> {
    let h = shape.h.add(&s.resized(shape.lmax()).scale(dt)).resized(shape.lmax());
    shape.with_h(h).map_err(|e| match e {
        Error::ShapeOutOfTubularNeighborhood { max_h, bound } => Error::StepTooLarge { max_h, bound },
        other => other,
    })
}

/// One explicit Euler step of `∂_t ρ = w / (ω̂·ν)`.
pub fn advect(shape: &SurfaceShape, w: &[f64], dt: f64) -> Result<SurfaceShape> {
    let g = shape.geometry()?;
    advect_radial(shape, &radial_speed(shape, &g, w)?, dt)
}

pub fn advect_record(shape: &SurfaceShape, w: &[f64], dt: f64) -> Result<AdvectRecord> {
    Ok(AdvectRecord { shape_before: shape.clone(), shape_after: advect(shape, w, dt)?, dt, w: w.to_vec() })
}

/// Velocity of the graph material points for radial speed `s`: the normal
/// part `s (ω̂·ν)` and the tangential part `P(s ω̂)`.
pub fn graph_velocity(g: &GeometryCache, s: &[f64]) -> SurfaceVelocity {
    let amb: Vec<V3> = (0..g.len()).map(|i| s[i] * g.omega[i]).collect();
    SurfaceVelocity::from_ambient(g, &amb)
}

/// Finite-difference transport check. Keys are stable and sorted.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TransportReport(pub BTreeMap<String, f64>);

impl TransportReport {
    pub fn get(&self, key: &str) -> f64 {
        self.0.get(key).copied().unwrap_or(f64::NAN)
    }

    /// Largest of the centered-difference relative errors.
    pub fn max_error(&self) -> f64 {
        ["area_rel_err", "volume_rel_err", "density_rel_err", "mean_curvature_rel_err"]
            .iter()
            .map(|k| self.get(k))
            .fold(0.0, f64::max)
    }
}

/// Default verification step `1e-5·a/‖w‖_∞`.
pub fn default_dt(shape: &SurfaceShape, w: &[f64]) -> f64 {
    let wmax = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if wmax == 0.0 {
        1e-5 * shape.domain.a
    } else {
        1e-5 * shape.domain.a / wmax
    }
}

fn rel_err(fd: f64, exact: f64, scale: f64) -> f64 {
    let d = (fd - exact).abs();
    if d == 0.0 {
        0.0
    } else {
        d / scale.max(exact.abs()).max(f64::MIN_POSITIVE)
    }
}

/// Compare centered differences of area, volume, area density and `H`
/// under `advect(±dt)` with the material-derivative formulas
/// `d/dt A = −∫wH`, `d/dt V = ∫w`, `D/Dt dA = Div u dA` and
/// `D/Dt H = Δ_g w + w(H² − 2K) + dH(v)`. Forward-difference defects of
/// area and volume are also reported for refinement studies.
pub fn check_transport(shape: &SurfaceShape, w: &[f64], dt: Option<f64>) -> Result<TransportReport> {
    let dt = dt.unwrap_or_else(|| default_dt(shape, w));
    let g = shape.geometry()?;
    let s_coef = radial_speed(shape, &g, w)?;
    let s = g.grid.synthesize(&s_coef.resized(g.grid.lmax))?;
    let vel = graph_velocity(&g, &s);
    let w_eff = &vel.w;
    let n = g.len();

    let area_exact = -g.integrate_with(|i| w_eff[i] * g.mean_h[i]);
    let volume_exact = g.integrate(w_eff);
    let div_u = surface_div(&g, &vel)?;
    let density_exact: Vec<f64> = (0..n).map(|i| div_u[i] * g.area_density[i]).collect();
    let lap_w = g.laplace_beltrami(w_eff)?;
    let grad_h = g.grad(&g.mean_h)?;
    let h_exact: Vec<f64> = (0..n)
        .map(|i| {
            let (h, k) = (g.mean_h[i], g.gauss_k[i]);
            lap_w[i] + w_eff[i] * (h * h - 2.0 * k) + grad_h[i].dot(&vel.v[i])
        })
        .collect();

    let plus = advect_radial(shape, &s_coef, dt)?.geometry()?;
    let minus = advect_radial(shape, &s_coef, -dt)?.geometry()?;
    let c = |p: f64, m: f64| (p - m) / (2.0 * dt);
    let area_fd = c(plus.area(), minus.area());
    let volume_fd = c(plus.volume(), minus.volume());
    let area_fwd = (plus.area() - g.area()) / dt;
    let volume_fwd = (plus.volume() - g.volume()) / dt;

    let area_scale = g.integrate_with(|i| (w_eff[i] * g.mean_h[i]).abs());
    let vol_scale = g.integrate_with(|i| w_eff[i].abs());
    let dens_scale = density_exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let h_scale = h_exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut dens_err = 0.0f64;
    let mut h_err = 0.0f64;
    for i in 0..n {
        let d = c(plus.area_density[i], minus.area_density[i]);
        dens_err = dens_err.max(rel_err(d, density_exact[i], dens_scale));
        let hd = c(plus.mean_h[i], minus.mean_h[i]);
        h_err = h_err.max(rel_err(hd, h_exact[i], h_scale));
    }

    let mut r = BTreeMap::new();
    r.insert("dt".to_string(), dt);
    r.insert("area_rate_fd".into(), area_fd);
    r.insert("area_rate_exact".into(), area_exact);
    r.insert("area_rel_err".into(), rel_err(area_fd, area_exact, area_scale));
    r.insert("area_fwd_defect".into(), (area_fwd - area_exact).abs());
    r.insert("volume_rate_fd".into(), volume_fd);
    r.insert("volume_rate_exact".into(), volume_exact);
    r.insert("volume_rel_err".into(), rel_err(volume_fd, volume_exact, vol_scale));
    r.insert("volume_fwd_defect".into(), (volume_fwd - volume_exact).abs());
    r.insert("density_rel_err".into(), dens_err);
    r.insert("mean_curvature_rel_err".into(), h_err);
    Ok(TransportReport(r))
}
