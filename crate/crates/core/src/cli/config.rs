//! Scenario files: flat, sectioned `key = value` text.
//!
//! ```text
//! # comment
//! seed = 0
//!
//! [geometry]
//! a = 1e-5
//! r_outer = 4e-5
//! lmax = 8
//!
//! [material]
//! kappa = 1e-19
//!
//! [flow]
//! stepper = imex
//!
//! [init]
//! 2 0 1e-8 0
//!
//! [output]
//! monitor = monitor.csv
//! ```
//!
//! Sections: `geometry` (a, r_outer, lmax, tubular_radius), `material`
//! (kappa, kappa_g, c0, mu_b, mu, rho_b, rho), `flow` (dt_init, t_end,
//! stepper, tol_constraint, pin_translations), `init` (`l m re im` lines of
//! the height function), `spectrum` (l_min, l_max), `scales` (l_typ, t_typ)
//! and `output` (dir, monitor, snapshot_every, solution, compat, checks,
//! spectrum). `seed` may appear before the first section. Unknown sections
//! and keys are errors.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::flow::{FlowConfig, Stepper};
use crate::sphharm::{parse_coeff_line, ShCoeffs};
use crate::surface::{DomainSpec, MaterialParams, SurfaceShape};

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub a: f64,
    pub r_outer: f64,
    pub lmax: usize,
    pub tubular_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub dir: PathBuf,
    pub monitor: String,
    /// Write a shape file every this many accepted steps; 0 disables.
    pub snapshot_every: usize,
    pub solution: String,
    pub compat: String,
    pub checks: String,
    pub spectrum: String,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("."),
            monitor: "monitor.csv".into(),
            snapshot_every: 0,
            solution: "solution.txt".into(),
            compat: "compat.json".into(),
            checks: "checks.json".into(),
            spectrum: "spectrum.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: Geometry,
    pub material: MaterialParams,
    pub flow: FlowConfig,
    /// `(l, m, value, line)` entries of the initial height.
    pub init: Vec<(usize, i64, f64, usize)>,
    pub spectrum: (usize, usize),
    /// Typical length and time for the Reynolds numbers.
    pub l_typ: Option<f64>,
    pub t_typ: Option<f64>,
    pub output: Output,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            geometry: Geometry { a: 1.0, r_outer: 4.0, lmax: 8, tubular_radius: None },
            material: MaterialParams::default(),
            flow: FlowConfig::default(),
            init: Vec::new(),
            spectrum: (1, 8),
            l_typ: None,
            t_typ: None,
            output: Output::default(),
            seed: 0,
        }
    }
}

fn value<T: std::str::FromStr>(v: &str, key: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::Parse { line, msg: format!("bad value `{v}` for `{key}`") })
}

fn flag(v: &str, key: &str, line: usize) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse { line, msg: format!("bad value `{v}` for `{key}`: expected true or false") }),
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        let mut section = String::new();
        let mut r_outer_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let known = ["geometry", "material", "flow", "init", "spectrum", "scales", "output"];
                if !known.contains(&name) {
                    return Err(perr(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            if section == "init" {
                let (l, m, re, _) = parse_coeff_line(line, line_no)?;
                c.init.push((l, m, re, line_no));
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| perr(format!("expected `key = value`, got `{line}`")))?;
            let n = line_no;
            match (section.as_str(), key) {
                ("", "seed") => c.seed = value(v, key, n)?,
                ("geometry", "a") => c.geometry.a = value(v, key, n)?,
                ("geometry", "r_outer") => {
                    c.geometry.r_outer = value(v, key, n)?;
                    r_outer_set = true;
                }
                ("geometry", "lmax") => c.geometry.lmax = value(v, key, n)?,
                ("geometry", "tubular_radius") => c.geometry.tubular_radius = Some(value(v, key, n)?),
                ("material", "kappa") => c.material.kappa = value(v, key, n)?,
                ("material", "kappa_g") => c.material.kappa_g = value(v, key, n)?,
                ("material", "c0") => c.material.c0 = value(v, key, n)?,
                ("material", "mu_b") => c.material.mu_b = value(v, key, n)?,
                ("material", "mu") => c.material.mu = value(v, key, n)?,
                ("material", "rho_b") => c.material.rho_b = value(v, key, n)?,
                ("material", "rho") => c.material.rho = value(v, key, n)?,
                ("flow", "dt_init") => c.flow.dt_init = value(v, key, n)?,
                ("flow", "t_end") => c.flow.t_end = value(v, key, n)?,
                ("flow", "stepper") => {
                    c.flow.stepper = v.parse::<Stepper>().map_err(|e| perr(format!("{e}")))?;
                }
                ("flow", "tol_constraint") => c.flow.tol_constraint = value(v, key, n)?,
                ("flow", "pin_translations") => c.flow.pin_translations = flag(v, key, n)?,
                ("spectrum", "l_min") => c.spectrum.0 = value(v, key, n)?,
                ("spectrum", "l_max") => c.spectrum.1 = value(v, key, n)?,
                ("scales", "l_typ") => c.l_typ = Some(value(v, key, n)?),
                ("scales", "t_typ") => c.t_typ = Some(value(v, key, n)?),
                ("output", "dir") => c.output.dir = PathBuf::from(v),
                ("output", "monitor") => c.output.monitor = v.to_string(),
                ("output", "snapshot_every") => c.output.snapshot_every = value(v, key, n)?,
                ("output", "solution") => c.output.solution = v.to_string(),
                ("output", "compat") => c.output.compat = v.to_string(),
                ("output", "checks") => c.output.checks = v.to_string(),
                ("output", "spectrum") => c.output.spectrum = v.to_string(),
                ("", _) => return Err(perr(format!("unknown key `{key}` outside any section"))),
                (s, _) => return Err(perr(format!("unknown key `{key}` in [{s}]"))),
            }
        }
        if !r_outer_set {
            c.geometry.r_outer = 4.0 * c.geometry.a;
        }
        c.validate()?;
        Ok(c)
    }

    /// Re-run the validation of every module the scenario feeds.
    pub fn validate(&self) -> Result<()> {
        self.domain()?;
        self.material.validate()?;
        self.flow.validate()?;
        if self.geometry.lmax < 2 {
            return Err(Error::InvalidBandLimit(self.geometry.lmax));
        }
        let (lo, hi) = self.spectrum;
        if lo > hi {
            return Err(Error::InvalidParameter(format!("spectrum range {lo}..{hi} is empty")));
        }
        for &(l, _, _, line) in &self.init {
            if l > self.geometry.lmax {
                return Err(Error::Parse { line, msg: format!("degree {l} exceeds lmax {}", self.geometry.lmax) });
            }
        }
        for v in [self.l_typ, self.t_typ].into_iter().flatten() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter("typical scales must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        let mut d = DomainSpec::new(self.geometry.a, self.geometry.r_outer)?;
        if let Some(t) = self.geometry.tubular_radius {
            d.tubular_radius = t;
            d.validate()?;
        }
        Ok(d)
    }

    pub fn initial_shape(&self) -> Result<SurfaceShape> {
        let mut h = ShCoeffs::zeros(self.geometry.lmax);
        for &(l, m, v, _) in &self.init {
            h.set(l, m, v);
        }
        SurfaceShape::new(self.domain()?, h)
    }

    /// Typical length and time: the configured values, or the radius and
    /// the bending relaxation time `μ_b a³/κ`.
    pub fn scales(&self) -> (f64, f64) {
        let a = self.geometry.a;
        let m = &self.material;
        (self.l_typ.unwrap_or(a), self.t_typ.unwrap_or(m.mu_b * a.powi(3) / m.kappa))
    }
}
