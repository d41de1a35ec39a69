//! Command-line front end: `solve`, `flow`, `verify` and `spectrum`.
//!
//! Exit codes: 0 ok, 2 input error, 3 blow-up during a flow, 4 failed
//! verification. Other runtime failures exit with 1.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::flow::{run_with, MONITOR_HEADER};
use crate::stokes::{check_compat, solve_s1, solve_s2, spectrum, CompatReport, StokesData, StokesSolution, System};
use crate::surface::reynolds_numbers;
use crate::verify::{check_all, to_json};
pub use config::ScenarioConfig;

#[derive(Debug, Parser)]
#[command(name = "vesicle", version, about = "Fluid vesicle relaxation in a viscous bulk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed, overriding `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Stokes system for a data file and dump the surface fields.
    Solve {
        /// Stokes data file.
        #[arg(long)]
        data: PathBuf,
    },
    /// Run the relaxation flow and write the monitor CSV.
    Flow,
    /// Run the identity checks and write them as JSON.
    Verify,
    /// Write mobilities and relaxation rates per degree.
    Spectrum,
}

/// Outcomes that are not library errors but still end the run.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{failed} of {total} checks failed")]
    Verification { failed: usize, total: usize },
    #[error("data fail the compatibility conditions of {0:?}")]
    Compatibility(System),
}

/// Map an error chain to the process exit code.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Verification { .. } => 4,
                Failure::Compatibility(_) => 2,
            };
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::BlowUpDetected { .. } | Error::StepTooLarge { .. } => 3,
                Error::SolverDegenerate { .. } => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

struct Session {
    cfg: ScenarioConfig,
    out: PathBuf,
}

impl Session {
    fn load(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                ScenarioConfig::parse(&text).with_context(|| format!("in config {}", p.display()))?
            }
            None => ScenarioConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        let out = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
        fs::create_dir_all(&out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Self { cfg, out })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Nondimensional groups of the scenario.
pub fn banner(cfg: &ScenarioConfig) -> Result<String> {
    let g = &cfg.geometry;
    let m = &cfg.material;
    let (l_typ, t_typ) = cfg.scales();
    let (rb, rs) = reynolds_numbers(m, l_typ, t_typ)?;
    let mut s = String::new();
    writeln!(s, "vesicle: a = {:.6e} m, r_outer/a = {:.6}, lmax = {}", g.a, g.r_outer / g.a, g.lmax)?;
    writeln!(s, "  Saffman-Delbruck length mu/mu_b = {:.6e} m ({:.6e} a)", m.saffman_delbruck(), m.saffman_delbruck() / g.a)?;
    writeln!(s, "  c0 a = {:.6e}, kappa_g/kappa = {:.6e}", m.c0 * g.a, m.kappa_g / m.kappa)?;
    writeln!(s, "  bending time mu_b a^3/kappa = {:.6e} s", m.mu_b * g.a.powi(3) / m.kappa)?;
    writeln!(s, "  Reynolds numbers at L = {l_typ:.3e} m, T = {t_typ:.3e} s: R_b = {rb:.6e}, R = {rs:.6e}")?;
    Ok(s)
}

/// `l m w v_psi v_phi q` per mode, preceded by a commented header.
pub fn solution_dump(sol: &StokesSolution) -> String {
    let (w, vp, vf, q) = (sol.w(), sol.v_psi(), sol.v_phi(), sol.q());
    let mut s = format!(
        "# system {:?} gauge {:?}\n# a {:.16e} r_outer {:.16e} mu_b {:.16e} mu {:.16e}\n# l m w v_psi v_phi q\n",
        sol.system, sol.gauge, sol.domain.a, sol.domain.r_outer, sol.mu_b, sol.mu
    );
    for (l, m, wv) in w.iter() {
        let _ = writeln!(
            s,
            "{l} {m} {wv:.16e} {:.16e} {:.16e} {:.16e}",
            vp.get(l, m),
            vf.get(l, m),
            q.get(l, m)
        );
    }
    s
}

/// Parse a dump back into `(l, m, [w, v_psi, v_phi, q])` rows.
pub fn parse_dump(text: &str) -> Result<Vec<(usize, i64, [f64; 4])>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Parse { line: i + 1, msg: format!("expected `l m w v_psi v_phi q`, got `{line}`") };
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 6 {
            return Err(bad().into());
        }
        let l = t[0].parse().map_err(|_| bad())?;
        let m = t[1].parse().map_err(|_| bad())?;
        let mut v = [0.0; 4];
        for (k, x) in v.iter_mut().enumerate() {
            *x = t[k + 2].parse().map_err(|_| bad())?;
        }
        rows.push((l, m, v));
    }
    Ok(rows)
}

fn compat_text(r: &CompatReport) -> String {
    serde_json::to_string_pretty(r).expect("compatibility report serializes") + "\n"
}

fn cmd_solve(ctx: &Session, data_path: &Path) -> Result<()> {
    let text = fs::read_to_string(data_path).with_context(|| format!("reading data {}", data_path.display()))?;
    let data = StokesData::from_text(&text).with_context(|| format!("in data file {}", data_path.display()))?;
    let (params, domain) = (ctx.cfg.material, ctx.cfg.domain()?);
    // a prescribed normal velocity selects the tangential system
    let sys = if data.f5.max_abs() > 0.0 { System::S2 } else { System::S1 };
    let report = check_compat(&data, sys, &domain, &params);
    ctx.write(&ctx.cfg.output.compat, &compat_text(&report))?;
    if !report.passed {
        return Err(Failure::Compatibility(sys).into());
    }
    let sol = match sys {
        System::S1 => solve_s1(&data, &params, &domain)?,
        System::S2 => solve_s2(&data, &params, &domain)?,
    };
    let path = ctx.write(&ctx.cfg.output.solution, &solution_dump(&sol))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_flow(ctx: &Session) -> Result<()> {
    let cfg = &ctx.cfg;
    let every = cfg.output.snapshot_every;
    let mut snapshot_err: Option<anyhow::Error> = None;
    let run = run_with(&cfg.flow, &cfg.material, cfg.initial_shape()?, |k, state| {
        if every > 0 && k % every == 0 && snapshot_err.is_none() {
            let text = format!("# t {:.16e}\n{}", state.t, state.shape.to_text());
            if let Err(e) = ctx.write(&format!("shape_{k:06}.txt"), &text) {
                snapshot_err = Some(e);
            }
        }
    })?;
    let path = ctx.write(&cfg.output.monitor, &run.csv())?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }
    println!("wrote {} ({} rows; columns {MONITOR_HEADER})", path.display(), run.rows.len());
    match run.error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn cmd_verify(ctx: &Session) -> Result<()> {
    let results = check_all(&ctx.cfg.material, &ctx.cfg.domain()?, ctx.cfg.seed);
    let path = ctx.write(&ctx.cfg.output.checks, &(to_json(&results) + "\n"))?;
    for r in &results {
        println!("{:<28} {} defect {:.3e} tol {:.1e}", r.name, if r.passed { "pass" } else { "FAIL" }, r.defect, r.tolerance);
    }
    println!("wrote {}", path.display());
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::Verification { failed, total: results.len() }.into());
    }
    Ok(())
}

/// `l,M_l,gamma_l` rows for the configured degree range.
pub fn spectrum_csv(cfg: &ScenarioConfig) -> Result<String> {
    let (lo, hi) = cfg.spectrum;
    let ls: Vec<usize> = (lo..=hi).collect();
    let table = spectrum(&cfg.material, &cfg.domain()?, &ls)?;
    let mut s = String::from("l,M_l,gamma_l\n");
    for (i, l) in table.l.iter().enumerate() {
        writeln!(s, "{l},{:.14e},{:.14e}", table.mobility[i], table.gamma[i])?;
    }
    Ok(s)
}

fn cmd_spectrum(ctx: &Session) -> Result<()> {
    let path = ctx.write(&ctx.cfg.output.spectrum, &spectrum_csv(&ctx.cfg)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Session::load(cli)?;
    print!("{}", banner(&ctx.cfg)?);
    match &cli.command {
        Command::Solve { data } => cmd_solve(&ctx, data),
        Command::Flow => cmd_flow(&ctx),
        Command::Verify => cmd_verify(&ctx),
        Command::Spectrum => cmd_spectrum(&ctx),
    }
}
