//! Data of the saddle problems and their text format.

use super::lamb::Monomial;
use crate::error::{Error, Result};
use crate::sphharm::{parse_coeff_line, CoeffKind, ShCoeffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Inner,
    Outer,
}

impl Region {
    fn token(self) -> &'static str {
        match self {
            Region::Inner => "in",
            Region::Outer => "out",
        }
    }
}

/// One monomial bulk term `rᵖ` of degree `(l, m)` in one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkTerm {
    pub region: Region,
    pub l: usize,
    pub m: i64,
    pub mono: Monomial,
}

/// The tuple `(f1, …, f5)`. `f1` and `f2` are lists of monomial terms;
/// the surface data are coefficient sets. Tangential surface force is
/// `Σ f3_psi ∇₁Y + f3_phi ω̂×∇₁Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesData {
    pub lmax: usize,
    pub bulk: Vec<BulkTerm>,
    pub f3_nu: ShCoeffs,
    pub f3_psi: ShCoeffs,
    pub f3_phi: ShCoeffs,
    pub f4: ShCoeffs,
    pub f5: ShCoeffs,
}

impl StokesData {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            bulk: Vec::new(),
            f3_nu: ShCoeffs::zeros(lmax),
            f3_psi: ShCoeffs::zeros(lmax).with_kind(CoeffKind::Spheroidal),
            f3_phi: ShCoeffs::zeros(lmax).with_kind(CoeffKind::Toroidal),
            f4: ShCoeffs::zeros(lmax),
            f5: ShCoeffs::zeros(lmax),
        }
    }

    /// Only a normal surface force.
    pub fn normal_force(psi: &ShCoeffs) -> Self {
        let mut d = Self::zeros(psi.lmax);
        d.f3_nu = psi.clone();
        d
    }

    /// Only a prescribed normal velocity.
    pub fn normal_velocity(w: &ShCoeffs) -> Self {
        let mut d = Self::zeros(w.lmax);
        d.f5 = w.clone();
        d
    }

    pub fn validate(&self) -> Result<()> {
        for c in [&self.f3_nu, &self.f3_psi, &self.f3_phi, &self.f4, &self.f5] {
            if c.lmax != self.lmax {
                return Err(Error::Shape(format!("coefficient band {} differs from data band {}", c.lmax, self.lmax)));
            }
            if c.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite surface data".into()));
            }
        }
        for b in &self.bulk {
            if b.l > self.lmax || b.m.unsigned_abs() as usize > b.l {
                return Err(Error::Shape(format!("bulk term ({}, {}) outside band {}", b.l, b.m, self.lmax)));
            }
            if b.region == Region::Inner && b.mono.p < 0 {
                return Err(Error::InvalidParameter(format!("inner bulk term with negative exponent {}", b.mono.p)));
            }
            if b.l == 0 && (b.mono.c_psi != 0.0 || b.mono.c_phi != 0.0) {
                return Err(Error::InvalidParameter("degree 0 bulk force has no tangential part".into()));
            }
        }
        Ok(())
    }

    /// Convert to units with `a = 1`, `μ_b = 1` and unit stress scale.
    pub fn nondimensional(&self, a: f64, mu_b: f64) -> Self {
        let mut d = self.clone();
        for b in &mut d.bulk {
            let p = b.mono.p;
            let s1 = a.powi(p + 1);
            b.mono.c_r *= s1;
            b.mono.c_psi *= s1;
            b.mono.c_phi *= s1;
            b.mono.c_div *= a.powi(p) * mu_b;
        }
        d.f4 = self.f4.scale(mu_b);
        d.f5 = self.f5.scale(mu_b / a);
        d
    }

    /// Sectioned text: `[f3_nu]`, `[f3_psi]`, `[f3_phi]`, `[f4]`, `[f5]` blocks of
    /// `l m re im`, and `[f1_r]`, `[f1_psi]`, `[f1_phi]`, `[f2]` blocks of
    /// `region l m p re im` with `region ∈ {in, out}`.
    pub fn to_text(&self) -> String {
        let mut s = format!("lmax {}\n", self.lmax);
        for (name, c) in self.surface_blocks() {
            if c.max_abs() > 0.0 {
                s.push_str(&format!("[{name}]\n{}", c.to_text()));
            }
        }
        type Get = fn(&Monomial) -> f64;
        let blocks: [(&str, Get); 4] = [
            ("f1_r", |m| m.c_r),
            ("f1_psi", |m| m.c_psi),
            ("f1_phi", |m| m.c_phi),
            ("f2", |m| m.c_div),
        ];
        for (name, get) in blocks {
            let lines: Vec<String> = self
                .bulk
                .iter()
                .filter(|b| get(&b.mono) != 0.0)
                .map(|b| format!("{} {} {} {} {:.16e} 0e0\n", b.region.token(), b.l, b.m, b.mono.p, get(&b.mono)))
                .collect();
            if !lines.is_empty() {
                s.push_str(&format!("[{name}]\n{}", lines.concat()));
            }
        }
        s
    }

    fn surface_blocks(&self) -> [(&'static str, &ShCoeffs); 5] {
        [
            ("f3_nu", &self.f3_nu),
            ("f3_psi", &self.f3_psi),
            ("f3_phi", &self.f3_phi),
            ("f4", &self.f4),
            ("f5", &self.f5),
        ]
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut data: Option<StokesData> = None;
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: lineno, msg };
            if data.is_none() {
                let lmax = line
                    .strip_prefix("lmax")
                    .and_then(|r| r.trim().parse::<usize>().ok())
                    .ok_or_else(|| perr("expected `lmax N` header".into()))?;
                data = Some(StokesData::zeros(lmax));
                continue;
            }
            let d = data.as_mut().expect("header parsed");
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                let known = ["f3_nu", "f3_psi", "f3_phi", "f4", "f5", "f1_r", "f1_psi", "f1_phi", "f2"];
                if !known.contains(&name) {
                    return Err(perr(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let sec = section.as_deref().ok_or_else(|| perr("data line before any section".into()))?;
            if sec.starts_with("f1") || sec == "f2" {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 6 {
                    return Err(perr("expected `region l m p re im`".into()));
                }
                let region = match toks[0] {
                    "in" => Region::Inner,
                    "out" => Region::Outer,
                    other => return Err(perr(format!("unknown region `{other}`"))),
                };
                let (l, m, v, _) = parse_coeff_line(&format!("{} {} {} {}", toks[1], toks[2], toks[4], toks[5]), lineno)?;
                let p: i32 = toks[3].parse().map_err(|_| perr(format!("bad exponent `{}`", toks[3])))?;
                if l > d.lmax {
                    return Err(perr(format!("degree {l} exceeds lmax {}", d.lmax)));
                }
                let mut mono = Monomial { p, ..Default::default() };
                match sec {
                    "f1_r" => mono.c_r = v,
                    "f1_psi" => mono.c_psi = v,
                    "f1_phi" => mono.c_phi = v,
                    _ => mono.c_div = v,
                }
                d.bulk.push(BulkTerm { region, l, m, mono });
            } else {
                let (l, m, v, _) = parse_coeff_line(line, lineno)?;
                if l > d.lmax {
                    return Err(perr(format!("degree {l} exceeds lmax {}", d.lmax)));
                }
                let target = match sec {
                    "f3_nu" => &mut d.f3_nu,
                    "f3_psi" => &mut d.f3_psi,
                    "f3_phi" => &mut d.f3_phi,
                    "f4" => &mut d.f4,
                    _ => &mut d.f5,
                };
                target.set(l, m, target.get(l, m) + v);
            }
        }
        let d = data.ok_or(Error::Parse { line: 1, msg: "empty data file".into() })?;
        d.validate()?;
        Ok(d)
    }
}
