//! Star-shaped membranes `r = a + h(ω)` over a reference sphere.
//!
//! Sign convention: the normal `ν` points outward and the Weingarten relation
//! reads `ν_{,α} = −k_α^β x_{,β}`, so `k_{αβ} = ν·x_{,αβ}` and the round
//! sphere has `H = −2/a`, `K = 1/a²`. In the physics literature `H` usually
//! has the opposite sign; the spontaneous curvature `c0` enters as `(H − c0)`
//! in this convention, so comparisons may need `c0 ↦ −c0`.

mod energy;
mod geometry;
mod stress;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sphharm::{ShCoeffs, SphGrid};

pub use energy::{energy_ch, grad_l2_f, normal_speed_of_height, reynolds_numbers, EnergyReport};
pub use geometry::{GeometryCache, Sym2, V3};
pub use stress::{
    div_total_stress, fluid_stress, helfrich_stress, hybrid_div, rate_of_strain, surface_div,
    HybridStress, RateOfStrain, SurfaceVelocity,
};

/// Physical constants of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub kappa: f64,
    pub kappa_g: f64,
    pub c0: f64,
    pub mu_b: f64,
    pub mu: f64,
    pub rho_b: f64,
    pub rho: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { kappa: 1.0, kappa_g: 0.0, c0: 0.0, mu_b: 1.0, mu: 0.01, rho_b: 0.0, rho: 0.0 }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.kappa, self.kappa_g, self.c0, self.mu_b, self.mu, self.rho_b, self.rho]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("material constants must be finite".into()));
        }
        if !(self.mu_b > 0.0 && self.mu > 0.0) {
            return Err(Error::InvalidParameter("viscosities mu_b and mu must be positive".into()));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter("kappa must be positive".into()));
        }
        if self.rho_b < 0.0 || self.rho < 0.0 {
            return Err(Error::InvalidParameter("densities must be non-negative".into()));
        }
        Ok(())
    }

    /// Saffman–Delbrück length `μ/μ_b`.
    pub fn saffman_delbruck(&self) -> f64 {
        self.mu / self.mu_b
    }
}

/// Reference sphere radius, container radius and admissible height bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub a: f64,
    pub r_outer: f64,
    pub tubular_radius: f64,
}

impl DomainSpec {
    /// Domain with the tubular radius set to half the admissible maximum.
    pub fn new(a: f64, r_outer: f64) -> Result<Self> {
        let d = Self { a, r_outer, tubular_radius: 0.5 * a.min(r_outer - a) };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.r_outer > self.a) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < a < r_outer, got a = {}, r_outer = {}",
                self.a, self.r_outer
            )));
        }
        let cap = self.a.min(self.r_outer - self.a);
        if !(self.tubular_radius > 0.0 && self.tubular_radius < cap) {
            return Err(Error::InvalidParameter(format!(
                "tubular radius {} must lie in (0, {cap})",
                self.tubular_radius
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { a: self.a * s, r_outer: self.r_outer * s, tubular_radius: self.tubular_radius * s }
    }
}

/// Transform band of the grid on which geometry is evaluated for a height
/// field of band `lmax`. Normals and curvatures are not band-limited; three
/// times the shape band keeps their spectral tails below round-off for
/// smooth shapes and comfortably exceeds the 3/2 rule.
pub fn work_band(lmax: usize) -> usize {
    3 * lmax.max(2)
}

/// Membrane `Γ_h = {(a + h(ω)) ω}`.
#[derive(Debug, Clone)]
pub struct SurfaceShape {
    pub domain: DomainSpec,
    pub h: ShCoeffs,
    pub grid: Arc<SphGrid>,
}

impl SurfaceShape {
    pub fn new(domain: DomainSpec, h: ShCoeffs) -> Result<Self> {
        let grid = Arc::new(SphGrid::build(work_band(h.lmax))?);
        Self::with_grid(domain, h, grid)
    }

    /// Reuse an existing evaluation grid. The grid band must be at least the
    /// shape band.
    pub fn with_grid(domain: DomainSpec, h: ShCoeffs, grid: Arc<SphGrid>) -> Result<Self> {
        domain.validate()?;
        if h.lmax < 2 {
            return Err(Error::InvalidBandLimit(h.lmax));
        }
        if grid.lmax < h.lmax {
            return Err(Error::Shape(format!("grid band {} below shape band {}", grid.lmax, h.lmax)));
        }
        let shape = Self { domain, h, grid };
        let max_h = shape.max_abs_h()?;
        if max_h >= domain.tubular_radius {
            return Err(Error::ShapeOutOfTubularNeighborhood { max_h, bound: domain.tubular_radius });
        }
        Ok(shape)
    }

    pub fn sphere(domain: DomainSpec, lmax: usize) -> Result<Self> {
        Self::new(domain, ShCoeffs::zeros(lmax))
    }

    pub fn lmax(&self) -> usize {
        self.h.lmax
    }

    /// Same domain and grid, new height.
    pub fn with_h(&self, h: ShCoeffs) -> Result<Self> {
        Self::with_grid(self.domain, h, self.grid.clone())
    }

    /// Largest `|h|` over the evaluation nodes.
    pub fn max_abs_h(&self) -> Result<f64> {
        Ok(self.grid.synthesize(&self.h)?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn geometry(&self) -> Result<GeometryCache> {
        GeometryCache::build(self)
    }

    /// Isotropic scaling of the whole configuration.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::with_grid(self.domain.scaled(s), self.h.scale(s), self.grid.clone())
    }

    /// Shape file: header `a r_outer lmax`, then `l m re im` lines.
    pub fn to_text(&self) -> String {
        format!(
            "{:.16e} {:.16e} {}\n{}",
            self.domain.a,
            self.domain.r_outer,
            self.h.lmax,
            self.h.to_text()
        )
    }

    /// Parse a shape file. The tubular radius is not part of the format and
    /// is passed in by the caller.
    pub fn from_text(text: &str, tubular_radius: Option<f64>) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty shape file".into() })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let bad = |msg: &str| Error::Parse { line: hl + 1, msg: msg.to_string() };
        if toks.len() != 3 {
            return Err(bad("expected header `a r_outer lmax`"));
        }
        let a: f64 = toks[0].parse().map_err(|_| bad("bad radius a"))?;
        let r_outer: f64 = toks[1].parse().map_err(|_| bad("bad r_outer"))?;
        let lmax: usize = toks[2].parse().map_err(|_| bad("bad lmax"))?;
        let mut h = ShCoeffs::zeros(lmax);
        for (i, line) in lines {
            let (l, m, re, _) = crate::sphharm::parse_coeff_line(line.trim(), i + 1)?;
            if l > lmax {
                return Err(Error::Parse { line: i + 1, msg: format!("degree {l} exceeds lmax {lmax}") });
            }
            h.set(l, m, re);
        }
        let mut domain = DomainSpec::new(a, r_outer)?;
        if let Some(t) = tubular_radius {
            domain.tubular_radius = t;
        }
        Self::new(domain, h)
    }
}
