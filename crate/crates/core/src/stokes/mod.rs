//! Exact per-mode solutions of the coupled bulk–surface Stokes systems when
//! the membrane is the round sphere `r = a` inside the ball `r < r_outer`.
//!
//! Fields are expanded in vector spherical harmonics (see [`lamb`]). Each
//! `(l, m)` decouples; the interface conditions at `r = a` and no-slip at the
//! outer wall give a small dense system whose unknowns are the amplitudes of
//! the homogeneous Lamb solutions and the surface pressure. Solves run in
//! units `a = 1`, `μ_b = 1` and are converted back at the boundary.
//!
//! Conventions: `[[X]] = X_out − X_in`, `ν = ω̂`, `H = −2/a`. Tangential
//! surface quantities are potentials: `v = V ∇₁Y + T ω̂×∇₁Y`.

mod data;
mod infsup;
pub mod lamb;
mod mode;
pub mod radial;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphharm::{CoeffKind, ShCoeffs};
use crate::surface::{energy_ch, DomainSpec, MaterialParams, SurfaceShape};

pub use data::{BulkTerm, Region, StokesData};
pub use infsup::{infsup_mode, infsup_mode_with, InfSupReport, DEFAULT_RESOLUTION};
pub use lamb::{Monomial, RadialFields};
pub use mode::{interface_rows, solve_mode, ModeData, ModeGeom, ModeSolution, System};
pub use radial::RadialSeries;

/// Pressure normalization of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Gauge {
    /// `∫_Ω π = 0` and `∫_Γ q̃/H dA = −∫_{Ω¹} π`, where `q̃ = q/a` is the
    /// surface pressure in internal units (the identity mixes a tension with
    /// a bulk pressure, so it is only meaningful once lengths are scaled).
    E,
    /// `∫_{Ω¹} π = 0`, `∫_Ω π = 0` and `∫_Γ q dA = 0`.
    ENu,
}

/// Literal defects of the compatibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatReport {
    pub system: System,
    /// `∫_Γ f4/H dA + ∫_{Ω¹} f2 dx` (system S1).
    pub comp1_defect: Option<f64>,
    /// `∫_Ω f2 dx`.
    pub comp2_defect: f64,
    /// `(∫_{Ω¹} f2 dx − ∫_Γ f5 dA, ∫_Γ f4 + f5 H dA)` (system S2).
    pub comp3_defect: Option<[f64; 2]>,
    pub passed: bool,
}

/// Tolerance on nondimensional compatibility defects.
pub const COMPAT_TOL: f64 = 1e-10;

fn sqrt4pi() -> f64 {
    (4.0 * PI).sqrt()
}

/// `∫ f2 dx` over one region, from the degree-0 bulk terms.
fn bulk_integral(data: &StokesData, region: Region, domain: &DomainSpec) -> f64 {
    let (r0, r1) = match region {
        Region::Inner => (0.0, domain.a),
        Region::Outer => (domain.a, domain.r_outer),
    };
    data.bulk
        .iter()
        .filter(|b| b.l == 0 && b.region == region && b.mono.c_div != 0.0)
        .map(|b| sqrt4pi() * RadialSeries::monomial(b.mono.p + 2, b.mono.c_div).integrate(r0, r1))
        .sum()
}

pub fn check_compat(data: &StokesData, sys: System, domain: &DomainSpec, params: &MaterialParams) -> CompatReport {
    let a = domain.a;
    let h = -2.0 / a;
    let surf = |c: &ShCoeffs| a * a * sqrt4pi() * c.get(0, 0);
    let inner = bulk_integral(data, Region::Inner, domain);
    let outer = bulk_integral(data, Region::Outer, domain);
    let vol_scale = params.mu_b / a.powi(3);
    let comp2 = inner + outer;
    let mut ok = (comp2 * vol_scale).abs() <= COMPAT_TOL;
    let (comp1, comp3) = match sys {
        System::S1 => {
            let c1 = surf(&data.f4) / h + inner;
            ok &= (c1 * vol_scale).abs() <= COMPAT_TOL;
            (Some(c1), None)
        }
        System::S2 => {
            let c3a = inner - surf(&data.f5);
            let c3b = surf(&data.f4) + h * surf(&data.f5);
            ok &= (c3a * vol_scale).abs() <= COMPAT_TOL;
            ok &= (c3b * params.mu_b / (a * a)).abs() <= COMPAT_TOL;
            (None, Some([c3a, c3b]))
        }
    };
    CompatReport { system: sys, comp1_defect: comp1, comp2_defect: comp2, comp3_defect: comp3, passed: ok }
}

/// Solution of S1 or S2, stored per mode in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesSolution {
    pub system: System,
    pub gauge: Gauge,
    pub domain: DomainSpec,
    pub mu_b: f64,
    pub mu: f64,
    pub lmax: usize,
    /// Canonical order `l² + l + m`.
    pub modes: Vec<ModeSolution>,
    /// Smallest relative singular value over all mode matrices.
    pub sigma_min: f64,
}

impl StokesSolution {
    pub fn mode(&self, l: usize, m: i64) -> &ModeSolution {
        &self.modes[ShCoeffs::idx(l, m)]
    }

    fn collect<F: Fn(&ModeSolution) -> f64>(&self, kind: CoeffKind, f: F) -> ShCoeffs {
        let mut c = ShCoeffs::zeros(self.lmax).with_kind(kind);
        for s in &self.modes {
            if kind == CoeffKind::Scalar || s.l > 0 {
                c.set(s.l, s.m, f(s));
            }
        }
        c
    }

    /// Surface normal velocity `w = u·ν`.
    pub fn w(&self) -> ShCoeffs {
        let a = self.domain.a;
        self.collect(CoeffKind::Scalar, |s| s.inner.u.eval(a))
    }

    /// Spheroidal potential of the surface tangential velocity.
    pub fn v_psi(&self) -> ShCoeffs {
        let a = self.domain.a;
        self.collect(CoeffKind::Spheroidal, |s| s.inner.v.eval(a))
    }

    /// Toroidal potential of the surface tangential velocity.
    pub fn v_phi(&self) -> ShCoeffs {
        let a = self.domain.a;
        self.collect(CoeffKind::Toroidal, |s| s.inner.t.eval(a))
    }

    /// Surface pressure.
    pub fn q(&self) -> ShCoeffs {
        self.collect(CoeffKind::Scalar, |s| s.q)
    }

    /// Value of the constant part of the bulk pressure at `r` in one region.
    pub fn pressure_constant(&self, region: Region, r: f64) -> f64 {
        let s = self.mode(0, 0);
        let f = match region {
            Region::Inner => &s.inner,
            Region::Outer => &s.outer,
        };
        f.p.eval(r) / sqrt4pi()
    }

    /// `(∫_{Ω¹} π, ∫_{Ω⁰} π, ∫_Γ q dA)`.
    pub fn pressure_integrals(&self) -> (f64, f64, f64) {
        let (a, r) = (self.domain.a, self.domain.r_outer);
        let s = self.mode(0, 0);
        let i_in = sqrt4pi() * s.inner.p.shift(2).integrate(0.0, a);
        let i_out = sqrt4pi() * s.outer.p.shift(2).integrate(a, r);
        (i_in, i_out, a * a * sqrt4pi() * s.q)
    }

    /// Defects of the normalization conditions of the stored gauge.
    pub fn gauge_defects(&self) -> [f64; 3] {
        let (i_in, i_out, iq) = self.pressure_integrals();
        let h = -2.0 / self.domain.a;
        match self.gauge {
            Gauge::E => [i_in + i_out, iq / (self.domain.a * h) + i_in, 0.0],
            Gauge::ENu => [i_in, i_in + i_out, iq],
        }
    }

    /// Add constants `κ_in`, `κ_out` to the bulk pressure and `κ_q` to `q`.
    pub fn shift_pressures(&mut self, k_in: f64, k_out: f64, k_q: f64) {
        let s = &mut self.modes[0];
        s.inner.p.push(0, k_in * sqrt4pi());
        s.outer.p.push(0, k_out * sqrt4pi());
        s.q += k_q * sqrt4pi();
    }

    /// Shift `(π, q)` by the element of the gauge space that restores the
    /// normalization of `self.gauge`.
    pub fn project_gauge(&mut self) {
        let a = self.domain.a;
        let h = -2.0 / a;
        let v1 = 4.0 * PI * a.powi(3) / 3.0;
        let v0 = 4.0 * PI * (self.domain.r_outer.powi(3) - a.powi(3)) / 3.0;
        let area = 4.0 * PI * a * a;
        let (i_in, i_out, iq) = self.pressure_integrals();
        match (self.system, self.gauge) {
            (System::S1, _) | (_, Gauge::E) => {
                // κ_in − κ_out = κ_q H keeps the normal balance intact
                let ah = a * h;
                let m = nalgebra::Matrix2::new(v1 + v0, v1 * h, v1, v1 * h + area / ah);
                let rhs = nalgebra::Vector2::new(-(i_in + i_out), -i_in - iq / ah);
                let x = m.lu().solve(&rhs).expect("gauge system is regular");
                let (k_out, k_q) = (x[0], x[1]);
                self.shift_pressures(k_out + h * k_q, k_out, k_q);
            }
            (System::S2, Gauge::ENu) => {
                self.shift_pressures(-i_in / v1, -i_out / v0, -iq / area);
            }
        }
    }

    /// Bulk velocity traces at `r = a` from both sides and the outer wall
    /// value, as the largest mismatch relative to the surface velocity scale.
    pub fn trace_defects(&self) -> (f64, f64) {
        let (a, r) = (self.domain.a, self.domain.r_outer);
        let mut jump = 0.0f64;
        let mut wall = 0.0f64;
        let mut scale = 0.0f64;
        for s in &self.modes {
            for (fi, fo) in [(&s.inner.u, &s.outer.u), (&s.inner.v, &s.outer.v), (&s.inner.t, &s.outer.t)] {
                jump = jump.max((fi.eval(a) - fo.eval(a)).abs());
                wall = wall.max(fo.eval(r).abs());
                scale = scale.max(fi.eval(a).abs());
            }
        }
        let s = if scale > 0.0 { scale } else { 1.0 };
        (jump / s, wall / s)
    }
}

fn mode_list(lmax: usize) -> Vec<(usize, i64)> {
    (0..=lmax).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m))).collect()
}

/// Per-mode data in internal units.
fn mode_data(nd: &StokesData, l: usize, m: i64, mu_b: f64) -> Result<ModeData> {
    let mut d = ModeData {
        f3_nu: nd.f3_nu.get(l, m),
        f4: nd.f4.get(l, m),
        f5: nd.f5.get(l, m),
        ..Default::default()
    };
    if l > 0 {
        d.f3_psi = nd.f3_psi.get(l, m);
        d.f3_phi = nd.f3_phi.get(l, m);
    }
    for b in nd.bulk.iter().filter(|b| b.l == l && b.m == m) {
        let p = lamb::particular(l, &b.mono, mu_b)?;
        match b.region {
            Region::Inner => d.inner = d.inner.add(&p),
            Region::Outer => d.outer = d.outer.add(&p),
        }
    }
    Ok(d)
}

fn internal_geom(params: &MaterialParams, domain: &DomainSpec) -> ModeGeom {
    ModeGeom { a: 1.0, r_outer: domain.r_outer / domain.a, mu_b: 1.0, mu: params.mu / (params.mu_b * domain.a) }
}

fn solve(sys: System, data: &StokesData, params: &MaterialParams, domain: &DomainSpec) -> Result<StokesSolution> {
    params.validate()?;
    domain.validate()?;
    data.validate()?;
    let report = check_compat(data, sys, domain, params);
    if !report.passed {
        return Err(Error::Compatibility(format!("{report:?}")));
    }
    let (a, mu_b) = (domain.a, params.mu_b);
    let nd = data.nondimensional(a, mu_b);
    let g = internal_geom(params, domain);
    let modes: Vec<ModeSolution> = mode_list(data.lmax)
        .into_par_iter()
        .map(|(l, m)| {
            let d = mode_data(&nd, l, m, 1.0)?;
            let s = mode::solve_mode(l, m, sys, &g, &d)?;
            let (su, sp) = (a / mu_b, 1.0);
            Ok(ModeSolution {
                inner: s.inner.rescaled(a, su, sp),
                outer: s.outer.rescaled(a, su, sp),
                q: s.q * a,
                ..s
            })
        })
        .collect::<Result<_>>()?;
    let sigma_min = modes.iter().map(|s| s.sigma_min).fold(f64::INFINITY, f64::min);
    let mut sol = StokesSolution {
        system: sys,
        gauge: match sys {
            System::S1 => Gauge::E,
            System::S2 => Gauge::ENu,
        },
        domain: *domain,
        mu_b,
        mu: params.mu,
        lmax: data.lmax,
        modes,
        sigma_min,
    };
    sol.project_gauge();
    Ok(sol)
}

/// Solve S1 (full surface momentum balance).
pub fn solve_s1(data: &StokesData, params: &MaterialParams, domain: &DomainSpec) -> Result<StokesSolution> {
    solve(System::S1, data, params, domain)
}

/// Solve S2 (tangential balance, prescribed `u·ν = f5`).
pub fn solve_s2(data: &StokesData, params: &MaterialParams, domain: &DomainSpec) -> Result<StokesSolution> {
    solve(System::S2, data, params, domain)
}

/// `∫_{S_r} ⟨Df, Dg⟩ dΩ` for two fields of the same mode, as a series in `r`.
fn strain_pair(l: usize, f: &RadialFields, g: &RadialFields) -> RadialSeries {
    let ll = (l * (l + 1)) as f64;
    let tau = |x: &RadialFields| x.v.deriv().sub(&x.v.shift(-1)).add(&x.u.shift(-1));
    let tor = |x: &RadialFields| x.t.deriv().sub(&x.t.shift(-1));
    let tang = f
        .u
        .mul(&g.u)
        .scale(2.0)
        .sub(&f.u.mul(&g.v).add(&f.v.mul(&g.u)).scale(ll))
        .add(&f.v.mul(&g.v).scale(ll * ll - ll))
        .add(&f.t.mul(&g.t).scale(ll * (ll - 2.0) / 2.0))
        .shift(-2);
    f.u.deriv()
        .mul(&g.u.deriv())
        .add(&tau(f).mul(&tau(g)).scale(0.5 * ll))
        .add(&tor(f).mul(&tor(g)).scale(0.5 * ll))
        .add(&tang)
}

/// Surface strain pairing `∫_Γ ⟨D u, D φ⟩_g dA` of one mode, from the
/// surface values `(U, V, T)` at `r = a`.
fn surface_strain_pair(l: usize, x: (f64, f64, f64), y: (f64, f64, f64)) -> f64 {
    let ll = (l * (l + 1)) as f64;
    2.0 * x.0 * y.0 - ll * (x.0 * y.1 + x.1 * y.0) + (ll * ll - ll) * x.1 * y.1 + ll * (ll - 2.0) / 2.0 * x.2 * y.2
}

/// Symmetric pairing `2μ_b ∫⟨Du, Dφ⟩ dx + 2μ ∫⟨D u, D φ⟩_g dA` of two mode
/// solutions with the same `(l, m)`.
pub fn mode_dissipation_pair(
    domain: &DomainSpec,
    mu_b: f64,
    mu: f64,
    x: &ModeSolution,
    y: &ModeSolution,
) -> f64 {
    let (a, r) = (domain.a, domain.r_outer);
    let l = x.l;
    let bulk = strain_pair(l, &x.inner, &y.inner).shift(2).integrate(0.0, a)
        + strain_pair(l, &x.outer, &y.outer).shift(2).integrate(a, r);
    let surf = surface_strain_pair(l, x.surface_velocity(a), y.surface_velocity(a));
    2.0 * mu_b * bulk + 2.0 * mu * surf
}

/// The bilinear form `B(u, φ)` for two solutions on the same domain.
pub fn dissipation_pair(u: &StokesSolution, phi: &StokesSolution) -> f64 {
    u.modes
        .iter()
        .zip(&phi.modes)
        .map(|(x, y)| mode_dissipation_pair(&u.domain, u.mu_b, u.mu, x, y))
        .sum()
}

/// Dissipation `2μ_b∫|Du|² dx + 2μ∫|D u|²_g dA`.
pub fn dissipation(sol: &StokesSolution) -> f64 {
    dissipation_pair(sol, sol)
}

/// Require the linearized constraints `∫w = ∫wH = 0`, i.e. `w_00 = 0` on the sphere.
fn check_tangent(w: &ShCoeffs) -> Result<()> {
    let scale = w.norm_sq().sqrt().max(f64::MIN_POSITIVE);
    if w.get(0, 0).abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::NotInTangentSpace(format!("mean of w is {:e}", w.get(0, 0) / sqrt4pi())));
    }
    Ok(())
}

/// Solve the system with `f5 = w` and all other data zero.
pub fn velocity_extension(w: &ShCoeffs, params: &MaterialParams, domain: &DomainSpec) -> Result<StokesSolution> {
    check_tangent(w)?;
    solve_s2(&StokesData::normal_velocity(w), params, domain)
}

/// The dissipation metric on normal velocities.
pub fn metric_v(w1: &ShCoeffs, w2: &ShCoeffs, params: &MaterialParams, domain: &DomainSpec) -> Result<f64> {
    let lmax = w1.lmax.max(w2.lmax);
    let u1 = velocity_extension(&w1.resized(lmax), params, domain)?;
    let u2 = velocity_extension(&w2.resized(lmax), params, domain)?;
    Ok(dissipation_pair(&u1, &u2))
}

/// Normal velocity produced by the normal surface force density `psi`.
pub fn ntd_apply(psi: &ShCoeffs, params: &MaterialParams, domain: &DomainSpec) -> Result<ShCoeffs> {
    Ok(solve_s1(&StokesData::normal_force(psi), params, domain)?.w())
}

/// Mobility `M_l` with `w_lm = −M_l ψ_lm`; `M_0 = 0`.
pub fn mobility(l: usize, params: &MaterialParams, domain: &DomainSpec) -> Result<f64> {
    params.validate()?;
    if l == 0 {
        return Ok(0.0);
    }
    let g = internal_geom(params, domain);
    let d = ModeData { f3_nu: 1.0, ..Default::default() };
    let s = mode::solve_mode(l, 0, System::S1, &g, &d)?;
    Ok(-s.inner.u.eval(1.0) * domain.a / params.mu_b)
}

/// Energy second variation `E″_l` of `F + λ V` at the sphere along `Y_l^0`,
/// per unit `∫ Y² dA`, by centered differences with one Richardson step.
/// The volume multiplier `λ` balances the uniform part of `grad F`, which is
/// the constraint force left when the tension direction is degenerate.
pub fn second_variation(l: usize, params: &MaterialParams, domain: &DomainSpec) -> Result<f64> {
    let a = domain.a;
    let lmax = l.max(2);
    let sphere = SurfaceShape::sphere(*domain, lmax)?;
    let g0 = sphere.geometry()?;
    let grad0 = crate::surface::grad_l2_f(&g0, params)?;
    let lambda = -g0.integrate(&grad0) / g0.area();
    let lag = |eps: f64| -> Result<f64> {
        let s = sphere.with_h(ShCoeffs::delta(lmax, l, 0, eps))?;
        let e = energy_ch(&s, params)?;
        Ok(e.total() + lambda * e.volume)
    };
    let f0 = lag(0.0)?;
    let d2 = |eps: f64| -> Result<f64> { Ok((lag(eps)? - 2.0 * f0 + lag(-eps)?) / (eps * eps)) };
    let eps = 0.02 * a / (l * (l + 1)).max(2) as f64;
    let (coarse, fine) = (d2(eps)?, d2(0.5 * eps)?);
    Ok((4.0 * fine - coarse) / 3.0 / (a * a))
}

/// Closed form of `E″_l` at `C0 = 0`: `κ (l+2)(l+1) l (l−1) / a⁴`.
pub fn second_variation_exact(l: usize, params: &MaterialParams, domain: &DomainSpec) -> f64 {
    let lf = l as f64;
    params.kappa * (lf + 2.0) * (lf + 1.0) * lf * (lf - 1.0) / domain.a.powi(4)
}

/// Mobility and relaxation rate per degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub l: Vec<usize>,
    pub mobility: Vec<f64>,
    pub energy_hessian: Vec<f64>,
    pub gamma: Vec<f64>,
    pub kappa: f64,
    pub mu_b: f64,
    pub mu: f64,
    pub a: f64,
    pub r_outer: f64,
}

impl ModeTable {
    pub fn gamma_of(&self, l: usize) -> Option<f64> {
        self.l.iter().position(|x| *x == l).map(|i| self.gamma[i])
    }
}

/// `γ_l = M_l E″_l` for each requested degree.
pub fn spectrum(params: &MaterialParams, domain: &DomainSpec, ls: &[usize]) -> Result<ModeTable> {
    if ls.contains(&0) {
        return Err(Error::InvalidParameter("spectrum degrees must be at least 1".into()));
    }
    let rows: Vec<(f64, f64)> = ls
        .par_iter()
        .map(|&l| Ok((mobility(l, params, domain)?, second_variation(l, params, domain)?)))
        .collect::<Result<_>>()?;
    Ok(ModeTable {
        l: ls.to_vec(),
        mobility: rows.iter().map(|r| r.0).collect(),
        energy_hessian: rows.iter().map(|r| r.1).collect(),
        gamma: rows.iter().map(|r| r.0 * r.1).collect(),
        kappa: params.kappa,
        mu_b: params.mu_b,
        mu: params.mu,
        a: domain.a,
        r_outer: domain.r_outer,
    })
}

/// Right-hand sides `(radial, Ψ, Φ, div)` of `μ_b Δu − grad π = f1 − μ_b grad f2`
/// and `div u = f2`, read directly from the data terms of one mode.
fn forcing_series(data: &StokesData, l: usize, m: i64, region: Region, mu_b: f64) -> [RadialSeries; 4] {
    let mut f = [RadialSeries::zero(), RadialSeries::zero(), RadialSeries::zero(), RadialSeries::zero()];
    for b in data.bulk.iter().filter(|b| b.l == l && b.m == m && b.region == region) {
        let t = b.mono;
        f[0].push(t.p, t.c_r);
        f[0].push(t.p - 1, -mu_b * t.c_div * t.p as f64);
        f[1].push(t.p, t.c_psi);
        f[1].push(t.p - 1, -mu_b * t.c_div);
        f[2].push(t.p, t.c_phi);
        f[3].push(t.p, t.c_div);
    }
    f
}

/// Strong-form residuals of a solution against its data, each relative to
/// the data or solution scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub bulk_momentum: f64,
    pub bulk_divergence: f64,
    pub interface: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.bulk_momentum.max(self.bulk_divergence).max(self.interface)
    }
}

/// Evaluate all strong-form equations of `sol` against `data`: bulk momentum
/// and divergence at sample radii in both regions, and every interface and
/// wall condition.
pub fn residuals(sol: &StokesSolution, data: &StokesData) -> Result<Residuals> {
    let (a, r_out, mu_b) = (sol.domain.a, sol.domain.r_outer, sol.mu_b);
    let g = ModeGeom { a, r_outer: r_out, mu_b, mu: sol.mu };
    let mut out = Residuals { bulk_momentum: 0.0, bulk_divergence: 0.0, interface: 0.0 };
    let radii_in: Vec<f64> = (1..=5).map(|k| a * k as f64 / 5.0).collect();
    let radii_out: Vec<f64> = (0..=5).map(|k| a + (r_out - a) * k as f64 / 5.0).collect();
    let mut scale_f = 0.0f64;
    let mut scale_int = 0.0f64;
    let mut scale_div = 0.0f64;
    let mut raw = Residuals { bulk_momentum: 0.0, bulk_divergence: 0.0, interface: 0.0 };
    for s in &sol.modes {
        let (l, m) = (s.l, s.m);
        let d = mode_data(data, l, m, mu_b)?;
        for (fields, region, radii) in [(&s.inner, Region::Inner, &radii_in), (&s.outer, Region::Outer, &radii_out)] {
            let op = fields.stokes_operator(l, mu_b);
            let div = fields.div(l);
            let f = forcing_series(data, l, m, region, mu_b);
            let comps = if l == 0 { 1 } else { 3 };
            for &r in radii.iter() {
                for c in 0..comps {
                    let target = f[c].eval(r);
                    raw.bulk_momentum = raw.bulk_momentum.max((op[c].eval(r) - target).abs());
                    let pscale = fields.p.deriv().eval(r).abs() + mu_b * fields.u.eval(r).abs() / (r * r);
                    scale_f = scale_f.max(target.abs()).max(pscale);
                }
                raw.bulk_divergence = raw.bulk_divergence.max((div.eval(r) - f[3].eval(r)).abs());
                let ll = (l * (l + 1)) as f64;
                let dscale = fields.u.deriv().eval(r).abs() + (2.0 * fields.u.eval(r).abs() + ll * fields.v.eval(r).abs()) / r;
                scale_div = scale_div.max(dscale);
            }
        }
        let rows = interface_rows(l, sol.system, &g, &s.inner, &s.outer, s.q);
        let tg = mode::targets(l, sol.system, &d);
        for (r, t) in rows.iter().zip(&tg) {
            raw.interface = raw.interface.max((r - t).abs());
            scale_int = scale_int.max(t.abs());
        }
        let (u, v, t) = s.surface_velocity(a);
        scale_int = scale_int.max(mu_b * (u.abs() + v.abs() + t.abs()) / a).max(s.q.abs() / a);
    }
    let rel = |x: f64, s: f64| if x == 0.0 { 0.0 } else { x / s.max(f64::MIN_POSITIVE) };
    out.bulk_momentum = rel(raw.bulk_momentum, scale_f);
    out.bulk_divergence = rel(raw.bulk_divergence, scale_div);
    out.interface = rel(raw.interface, scale_int);
    Ok(out)
}
