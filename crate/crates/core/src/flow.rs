//! Constrained gradient flow of the Canham–Helfrich energy near the sphere.
//!
//! The normal velocity is `w = −M̂ (grad F + λ1 + λ2 H)`, where `M̂` is the
//! mode-wise mobility of the round sphere ("frozen" at the reference
//! radius). `M̂` acts on force per unit reference area, `f·J/a²` with
//! `J = dA/dΩ`, so that
//!
//! ```text
//! ⟨w, w⟩_V = a² Σ w_lm² / M̂_l = −∫ grad F · w dA
//! ```
//!
//! holds exactly for every projected velocity: the discrete dynamics is a
//! gradient flow of `F` for this metric. The multipliers enforce the
//! linearized constraints `∫ w dA = ∫ w H dA = 0`. On shapes close to a
//! sphere `1` and `H` are almost parallel and only the volume constraint is
//! kept.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::{advect_radial, radial_speed};
use crate::sphharm::ShCoeffs;
use crate::stokes::{mobility, ModeTable};
use crate::surface::{grad_l2_f, DomainSpec, EnergyReport, GeometryCache, MaterialParams, SurfaceShape};

/// Below this value of `1 − ⟨1,H⟩²/(⟨1,1⟩⟨H,H⟩)` the two constraints are
/// treated as one.
pub const DEGENERACY_TOL: f64 = 1e-5;

/// Halvings of the time step before a step is declared a blow-up.
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stepper {
    Euler,
    Rk4,
    ImexExponential,
}

impl Stepper {
    pub fn as_str(self) -> &'static str {
        match self {
            Stepper::Euler => "euler",
            Stepper::Rk4 => "rk4",
            Stepper::ImexExponential => "imex",
        }
    }
}

impl fmt::Display for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stepper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Stepper::Euler),
            "rk4" => Ok(Stepper::Rk4),
            "imex" | "imex-exponential" => Ok(Stepper::ImexExponential),
            other => Err(Error::InvalidParameter(format!("unknown stepper `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub dt_init: f64,
    pub t_end: f64,
    pub stepper: Stepper,
    /// Bound on the relative area and volume drift of one step.
    pub tol_constraint: f64,
    /// Remove the `l = 1` part of `w`.
    pub pin_translations: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { dt_init: 1e-3, t_end: 1.0, stepper: Stepper::Rk4, tol_constraint: 1e-8, pin_translations: true }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return Err(Error::InvalidParameter("dt_init must be positive".into()));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter("t_end must be non-negative".into()));
        }
        if !(self.tol_constraint >= 1e-12) {
            return Err(Error::InvalidParameter("tol_constraint must be at least 1e-12".into()));
        }
        Ok(())
    }
}

/// Mode-wise mobility of the reference sphere. The volume mode has no
/// mobility of its own; `M̂_0 = M_1` lets the pressure multiplier act on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenMobility {
    pub a: f64,
    /// `M̂_l` for `l = 0..=lmax`.
    pub m: Vec<f64>,
    pub pin_translations: bool,
}

impl FrozenMobility {
    pub fn new(lmax: usize, params: &MaterialParams, domain: &DomainSpec, pin_translations: bool) -> Result<Self> {
        let mut m = vec![0.0; lmax + 1];
        for (l, v) in m.iter_mut().enumerate().skip(1) {
            *v = mobility(l, params, domain)?;
        }
        m[0] = m[1];
        Ok(Self { a: domain.a, m, pin_translations })
    }

    pub fn lmax(&self) -> usize {
        self.m.len() - 1
    }

    /// Coefficients of `f J / a²`, the force per unit reference area.
    pub fn force_coeffs(&self, g: &GeometryCache, f: &[f64]) -> Result<ShCoeffs> {
        let a2 = self.a * self.a;
        let fj: Vec<f64> = f.iter().zip(&g.area_density).map(|(f, j)| f * j / a2).collect();
        Ok(g.grid.analyze(&fj)?.resized(self.lmax()))
    }

    /// `M̂ ψ`, with the translation modes removed when pinned.
    pub fn apply(&self, psi: &ShCoeffs) -> ShCoeffs {
        let pin = self.pin_translations;
        psi.resized(self.lmax()).map_degree(|l| if pin && l == 1 { 0.0 } else { self.m[l] })
    }

    /// `⟨w, w⟩_V = a² Σ w_lm² / M̂_l`.
    pub fn metric(&self, w: &ShCoeffs) -> f64 {
        let a2 = self.a * self.a;
        w.iter().filter(|(l, _, _)| *l <= self.lmax()).map(|(l, _, v)| a2 * v * v / self.m[l]).sum()
    }
}

/// Result of [`project_constraints`]: `w' = w + M̂((λ1 + λ2 H) J/a²)`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub w: ShCoeffs,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Only the volume constraint was enforced.
    pub degenerate: bool,
}

/// Add the mobility image of `λ1 + λ2 H` to `w` so that `∫ w dA = 0` and,
/// unless the pair is degenerate, `∫ w H dA = 0`.
pub fn project_constraints(g: &GeometryCache, w: &ShCoeffs, mob: &FrozenMobility) -> Result<Projection> {
    let lmax = mob.lmax();
    let w = w.resized(lmax);
    let ones = vec![1.0; g.len()];
    let b1 = mob.apply(&mob.force_coeffs(g, &ones)?);
    let bh = mob.apply(&mob.force_coeffs(g, &g.mean_h)?);
    let grid = &g.grid;
    let (b1g, bhg, wg) = (grid.synthesize(&b1)?, grid.synthesize(&bh)?, grid.synthesize(&w)?);
    let pair = |x: &[f64], y: &[f64]| g.integrate_with(|i| x[i] * y[i]);
    let h = &g.mean_h;
    let (g11, g22) = (pair(&b1g, &ones), pair(&bhg, h));
    let g12 = 0.5 * (pair(&b1g, h) + pair(&bhg, &ones));
    let (r1, r2) = (-pair(&wg, &ones), -pair(&wg, h));
    let degenerate = 1.0 - g12 * g12 / (g11 * g22) <= DEGENERACY_TOL;
    let (lambda1, lambda2) = if degenerate {
        (r1 / g11, 0.0)
    } else {
        let det = g11 * g22 - g12 * g12;
        ((r1 * g22 - g12 * r2) / det, (g11 * r2 - g12 * r1) / det)
    };
    let out = w.add(&b1.scale(lambda1)).add(&bh.scale(lambda2));
    Ok(Projection { w: out, lambda1, lambda2, degenerate })
}

/// Least-squares multipliers of `grad F + λ1 + λ2 H = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelfrichFit {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `‖grad F + λ1 + λ2 H‖ / ‖grad F‖` in `L²(Γ)`, zero when `grad F = 0`.
    pub residual: f64,
    /// `H` is constant to round-off, so only `λ1 + λ2 H` is determined and
    /// `λ2` is set to zero.
    pub reduced: bool,
}

pub fn helfrich_multipliers(shape: &SurfaceShape, params: &MaterialParams) -> Result<HelfrichFit> {
    helfrich_fit(&shape.geometry()?, params)
}

/// Fit in the basis `{1, H − H̄}`, which stays well conditioned as the
/// shape approaches a sphere.
pub fn helfrich_fit(g: &GeometryCache, params: &MaterialParams) -> Result<HelfrichFit> {
    let gf = grad_l2_f(g, params)?;
    let area = g.area();
    let a = (area / (4.0 * std::f64::consts::PI)).sqrt();
    let norm_g = g.integrate_with(|i| gf[i] * gf[i]).sqrt();
    let scale = params.kappa / a.powi(3) * area.sqrt();
    if norm_g <= 1e-11 * scale {
        return Ok(HelfrichFit { lambda1: 0.0, lambda2: 0.0, residual: 0.0, reduced: false });
    }
    let mean_g = g.integrate(&gf) / area;
    let h_bar = g.integrate(&g.mean_h) / area;
    let ht: Vec<f64> = g.mean_h.iter().map(|h| h - h_bar).collect();
    let norm_ht = g.integrate_with(|i| ht[i] * ht[i]).sqrt();
    let reduced = norm_ht <= 1e-10 * h_bar.abs() * area.sqrt();
    let (lambda1, lambda2) = if reduced {
        (-mean_g, 0.0)
    } else {
        let c2 = -g.integrate_with(|i| gf[i] * ht[i]) / (norm_ht * norm_ht);
        (-mean_g - c2 * h_bar, c2)
    };
    let res = g.integrate_with(|i| (gf[i] + lambda1 + lambda2 * g.mean_h[i]).powi(2)).sqrt();
    Ok(HelfrichFit { lambda1, lambda2, residual: res / norm_g, reduced })
}

/// Velocity of the flow at one shape.
#[derive(Debug, Clone)]
pub struct FlowVelocity {
    /// Normal velocity coefficients.
    pub w: ShCoeffs,
    /// Radial speed of the height function.
    pub s: ShCoeffs,
    /// Multipliers in the convention `grad F + λ1 + λ2 H`.
    pub lambda1: f64,
    pub lambda2: f64,
    pub degenerate: bool,
    /// `⟨w, w⟩_V`.
    pub dissipation: f64,
}

pub fn flow_velocity(
    shape: &SurfaceShape,
    g: &GeometryCache,
    params: &MaterialParams,
    mob: &FrozenMobility,
) -> Result<FlowVelocity> {
    let gf = grad_l2_f(g, params)?;
    let w_raw = mob.apply(&mob.force_coeffs(g, &gf)?).scale(-1.0);
    let p = project_constraints(g, &w_raw, mob)?;
    let wg = g.grid.synthesize(&p.w)?;
    let s = radial_speed(shape, g, &wg)?;
    let dissipation = mob.metric(&p.w);
    Ok(FlowVelocity { w: p.w, s, lambda1: -p.lambda1, lambda2: -p.lambda2, degenerate: p.degenerate, dissipation })
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub shape: SurfaceShape,
    pub report: EnergyReport,
    pub lambda1: f64,
    pub lambda2: f64,
    pub last_dissipation: f64,
    /// Time step of the last accepted step.
    pub last_dt: f64,
    pub degenerate: bool,
}

impl FlowState {
    pub fn new(shape: SurfaceShape, params: &MaterialParams, mob: &FrozenMobility) -> Result<Self> {
        let g = shape.geometry()?;
        let v = flow_velocity(&shape, &g, params, mob)?;
        Ok(Self {
            t: 0.0,
            report: EnergyReport::from_geometry(&g, params),
            shape,
            lambda1: v.lambda1,
            lambda2: v.lambda2,
            last_dissipation: v.dissipation,
            last_dt: 0.0,
            degenerate: v.degenerate,
        })
    }
}

/// Rates `γ_l` for the linear part of the exponential stepper.
fn linear_rates(lmax: usize, table: Option<&ModeTable>, pin: bool) -> Result<Vec<f64>> {
    let table = table.ok_or_else(|| Error::InvalidParameter("the imex stepper needs a mode table".into()))?;
    let mut rates = vec![0.0; lmax + 1];
    for (l, r) in rates.iter_mut().enumerate().skip(1) {
        if pin && l == 1 {
            continue;
        }
        *r = table.gamma_of(l).ok_or_else(|| Error::InvalidParameter(format!("mode table has no degree {l}")))?;
    }
    Ok(rates)
}

/// `(1 − e^{−x})/x`.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

struct Stepping<'a> {
    params: &'a MaterialParams,
    mob: &'a FrozenMobility,
    rates: Option<Vec<f64>>,
}

impl Stepping<'_> {
    fn speed(&self, shape: &SurfaceShape) -> Result<ShCoeffs> {
        let g = shape.geometry()?;
        Ok(flow_velocity(shape, &g, self.params, self.mob)?.s)
    }

    fn advance(&self, stepper: Stepper, shape: &SurfaceShape, s0: &ShCoeffs, dt: f64) -> Result<SurfaceShape> {
        match stepper {
            Stepper::Euler => advect_radial(shape, s0, dt),
            Stepper::Rk4 => {
                let k1 = s0.clone();
                let k2 = self.speed(&advect_radial(shape, &k1, 0.5 * dt)?)?;
                let k3 = self.speed(&advect_radial(shape, &k2, 0.5 * dt)?)?;
                let k4 = self.speed(&advect_radial(shape, &k3, dt)?)?;
                let s = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4).scale(1.0 / 6.0);
                advect_radial(shape, &s, dt)
            }
            Stepper::ImexExponential => {
                let rates = self.rates.as_ref().expect("rates prepared for imex");
                let lmax = shape.lmax();
                let h = &shape.h;
                let rate = |l: usize| rates.get(l).copied().unwrap_or(0.0);
                // remainder N = s + Γh, then h ← e^{−Γdt} h + dt φ1(Γdt) N
                let n = s0.add(&h.map_degree(rate));
                let decayed = h.map_degree(|l| (-rate(l) * dt).exp());
                let forced = n.map_degree(|l| dt * phi1(rate(l) * dt));
                let ds = decayed.add(&forced).add(&h.scale(-1.0)).resized(lmax);
                advect_radial(shape, &ds, 1.0)
            }
        }
    }
}

/// One accepted step. Steps that raise the energy, leave the tubular
/// neighborhood or break the constraint tolerance are retried with half the
/// time step.
pub fn step(
    state: &FlowState,
    config: &FlowConfig,
    params: &MaterialParams,
    mob: &FrozenMobility,
    table: Option<&ModeTable>,
) -> Result<FlowState> {
    step_with_dt(state, config, params, mob, table, config.dt_init)
}

fn step_with_dt(
    state: &FlowState,
    config: &FlowConfig,
    params: &MaterialParams,
    mob: &FrozenMobility,
    table: Option<&ModeTable>,
    dt0: f64,
) -> Result<FlowState> {
    let rates = match config.stepper {
        Stepper::ImexExponential => Some(linear_rates(state.shape.lmax(), table, mob.pin_translations)?),
        _ => None,
    };
    let stepping = Stepping { params, mob, rates };
    let g0 = state.shape.geometry()?;
    let v0 = flow_velocity(&state.shape, &g0, params, mob)?;
    let f0 = state.report.total();
    let mut dt = dt0;
    let mut last_msg = String::new();
    for _ in 0..=MAX_HALVINGS {
        match stepping.advance(config.stepper, &state.shape, &v0.s, dt) {
            Ok(shape) => {
                let g = shape.geometry()?;
                let report = EnergyReport::from_geometry(&g, params);
                let d_area = (report.area - state.report.area).abs() / state.report.area;
                let d_vol = (report.volume - state.report.volume).abs() / state.report.volume;
                let rises = report.total() > f0 + 1e-12 * f0.abs();
                if !rises && d_area <= config.tol_constraint && d_vol <= config.tol_constraint {
                    let v = flow_velocity(&shape, &g, params, mob)?;
                    return Ok(FlowState {
                        t: state.t + dt,
                        shape,
                        report,
                        lambda1: v.lambda1,
                        lambda2: v.lambda2,
                        last_dissipation: v.dissipation,
                        last_dt: dt,
                        degenerate: v.degenerate,
                    });
                }
                last_msg = format!(
                    "dt = {dt:.3e}: energy change {:.3e}, area drift {d_area:.3e}, volume drift {d_vol:.3e}",
                    report.total() - f0
                );
            }
            Err(Error::StepTooLarge { max_h, bound }) => {
                last_msg = format!("dt = {dt:.3e}: max |h| = {max_h:.3e} reaches {bound:.3e}");
            }
            Err(e) => return Err(e),
        }
        dt *= 0.5;
    }
    Err(Error::BlowUpDetected { t: state.t, msg: last_msg })
}

/// One line of the monitor series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub f: f64,
    pub area: f64,
    pub volume: f64,
    pub sigma: f64,
    pub dissipation: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub max_h: f64,
    pub helfrich_residual: f64,
}

pub const MONITOR_HEADER: &str = "t,F,area,volume,sigma,dissipation,lambda1,lambda2,max_h,helfrich_residual";

impl MonitorRow {
    pub fn of(state: &FlowState, params: &MaterialParams) -> Result<Self> {
        let fit = helfrich_multipliers(&state.shape, params)?;
        Ok(Self {
            t: state.t,
            f: state.report.total(),
            area: state.report.area,
            volume: state.report.volume,
            sigma: state.report.sigma,
            dissipation: state.last_dissipation,
            lambda1: state.lambda1,
            lambda2: state.lambda2,
            max_h: state.shape.max_abs_h()?,
            helfrich_residual: fit.residual,
        })
    }

    /// CSV line with 15 significant digits.
    pub fn csv(&self) -> String {
        [
            self.t,
            self.f,
            self.area,
            self.volume,
            self.sigma,
            self.dissipation,
            self.lambda1,
            self.lambda2,
            self.max_h,
            self.helfrich_residual,
        ]
        .iter()
        .map(|v| format!("{v:.14e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Trajectory of a run. On a step error the rows up to the failure are kept.
#[derive(Debug)]
pub struct FlowRun {
    pub rows: Vec<MonitorRow>,
    pub final_state: FlowState,
    /// Accepted steps whose projection fell back to the volume constraint.
    pub degenerate_steps: usize,
    pub error: Option<Error>,
}

impl FlowRun {
    pub fn csv(&self) -> String {
        let mut out = String::from(MONITOR_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.csv());
            out.push('\n');
        }
        out
    }
}

/// Integrate from `init` to `config.t_end`, calling `observe` on every
/// accepted state (the initial one included).
pub fn run_with<F: FnMut(usize, &FlowState)>(
    config: &FlowConfig,
    params: &MaterialParams,
    init: SurfaceShape,
    mut observe: F,
) -> Result<FlowRun> {
    config.validate()?;
    params.validate()?;
    let domain = init.domain;
    let lmax = init.lmax();
    let mob = FrozenMobility::new(lmax, params, &domain, config.pin_translations)?;
    let table = match config.stepper {
        Stepper::ImexExponential => {
            let ls: Vec<usize> = (1..=lmax).collect();
            Some(crate::stokes::spectrum(params, &domain, &ls)?)
        }
        _ => None,
    };
    let mut state = FlowState::new(init, params, &mob)?;
    let mut rows = vec![MonitorRow::of(&state, params)?];
    let mut degenerate_steps = 0;
    observe(0, &state);
    let mut n = 0;
    while state.t < config.t_end * (1.0 - 1e-12) {
        let dt = config.dt_init.min(config.t_end - state.t);
        match step_with_dt(&state, config, params, &mob, table.as_ref(), dt) {
            Ok(next) => {
                state = next;
                n += 1;
                degenerate_steps += usize::from(state.degenerate);
                rows.push(MonitorRow::of(&state, params)?);
                observe(n, &state);
            }
            Err(e) => return Ok(FlowRun { rows, final_state: state, degenerate_steps, error: Some(e) }),
        }
    }
    Ok(FlowRun { rows, final_state: state, degenerate_steps, error: None })
}

pub fn run(config: &FlowConfig, params: &MaterialParams, init: SurfaceShape) -> Result<FlowRun> {
    run_with(config, params, init, |_, _| {})
}
