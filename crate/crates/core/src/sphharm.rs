//! Real spherical harmonics on the unit sphere.
//!
//! Basis convention (used everywhere in the crate):
//!
//! ```text
//! Y_lm(θ, φ) = P̄_l^|m|(cos θ) · { √2 cos(mφ)   m > 0
//!                                { 1            m = 0
//!                                { √2 sin(|m|φ) m < 0
//! ```
//!
//! where `P̄_l^m` is the associated Legendre function *without* the
//! Condon–Shortley phase, normalized so that `∫ Y_lm² dΩ = 1` over the unit
//! sphere. The constant function therefore has `(0,0)` coefficient
//! `c·√(4π)`.
//!
//! Quadrature uses Gauss–Legendre nodes in `cos θ` and equispaced nodes in
//! `φ`. Transforms are direct (no FFT); they are exact for band-limited data
//! whenever `n_theta ≥ lmax + 1` and `n_phi ≥ 2·lmax + 1`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{Error, Result};

/// Samples of a scalar field on a [`SphGrid`], row-major `[theta][phi]`.
pub type GridField = Vec<f64>;

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalized Legendre functions `P̄_l^m(θ)` and `dP̄_l^m/dθ` for
/// `0 ≤ m ≤ l ≤ lmax`, stored at `tri(l, m)`.
pub fn legendre_table(lmax: usize, cos_t: f64, sin_t: f64) -> (Vec<f64>, Vec<f64>) {
    let n = tri(lmax, lmax) + 1;
    let mut p = vec![0.0; n];
    let mut dp = vec![0.0; n];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t * p[tri(m - 1, m - 1)];
        }
        if m < lmax {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * cos_t * p[tri(m, m)];
        }
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (cos_t * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    for l in 0..=lmax {
        let lf = l as f64;
        for m in 0..=l {
            let mf = m as f64;
            let up = if m < l { p[tri(l, m + 1)] } else { 0.0 };
            dp[tri(l, m)] = if m == 0 {
                -(lf * (lf + 1.0)).sqrt() * up
            } else {
                let down = p[tri(l, m - 1)];
                0.5 * (((lf + mf) * (lf - mf + 1.0)).sqrt() * down
                    - ((lf + mf + 1.0) * (lf - mf)).sqrt() * up)
            };
        }
    }
    (p, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss–Legendre × trapezoid grid with precomputed Legendre tables.
#[derive(Debug, Clone)]
pub struct SphGrid {
    /// Transform band limit.
    pub lmax: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub cos_theta: Vec<f64>,
    pub sin_theta: Vec<f64>,
    pub theta: Vec<f64>,
    /// Gauss–Legendre weights in `cos θ`.
    pub weights: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: f64,
    plm: Vec<f64>,
    dplm: Vec<f64>,
    trig_cos: Vec<f64>,
    trig_sin: Vec<f64>,
}

impl SphGrid {
    /// Minimal grid for band limit `lmax`.
    pub fn build(lmax: usize) -> Result<Self> {
        if lmax < 2 {
            return Err(Error::InvalidBandLimit(lmax));
        }
        Self::with_nodes(lmax, lmax + 1, 2 * lmax + 1)
    }

    /// Grid for transforms at band `lmax` whose nodes resolve products up to
    /// band `⌈3·lmax/2⌉` (3/2-rule dealiasing).
    pub fn dealiased(lmax: usize) -> Result<Self> {
        if lmax < 2 {
            return Err(Error::InvalidBandLimit(lmax));
        }
        let g = (3 * lmax).div_ceil(2);
        Self::with_nodes(lmax, g + 1, 2 * g + 1)
    }

    pub fn with_nodes(lmax: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if lmax < 2 {
            return Err(Error::InvalidBandLimit(lmax));
        }
        if n_theta < lmax + 1 || n_phi < 2 * lmax + 1 {
            return Err(Error::Shape(format!(
                "grid {n_theta}x{n_phi} cannot resolve band limit {lmax}"
            )));
        }
        let (x, weights) = gauss_legendre(n_theta);
        let sin_theta: Vec<f64> = x.iter().map(|c| (1.0 - c * c).sqrt()).collect();
        let theta: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let phi: Vec<f64> = (0..n_phi).map(|k| k as f64 * dphi).collect();
        let nt = tri(lmax, lmax) + 1;
        let mut plm = Vec::with_capacity(n_theta * nt);
        let mut dplm = Vec::with_capacity(n_theta * nt);
        for j in 0..n_theta {
            let (p, dp) = legendre_table(lmax, x[j], sin_theta[j]);
            plm.extend(p);
            dplm.extend(dp);
        }
        let mut trig_cos = vec![0.0; (lmax + 1) * n_phi];
        let mut trig_sin = vec![0.0; (lmax + 1) * n_phi];
        for m in 0..=lmax {
            let s = if m == 0 { 1.0 } else { 2f64.sqrt() };
            for k in 0..n_phi {
                trig_cos[m * n_phi + k] = s * (m as f64 * phi[k]).cos();
                trig_sin[m * n_phi + k] = s * (m as f64 * phi[k]).sin();
            }
        }
        Ok(Self {
            lmax,
            n_theta,
            n_phi,
            cos_theta: x,
            sin_theta,
            theta,
            weights,
            phi,
            dphi,
            plm,
            dplm,
            trig_cos,
            trig_sin,
        })
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of node `(j, k)` for `∫ · dΩ` over the unit sphere.
    #[inline]
    pub fn node_weight(&self, j: usize) -> f64 {
        self.weights[j] * self.dphi
    }

    #[inline]
    fn p(&self, j: usize, l: usize, m: usize) -> f64 {
        self.plm[j * (tri(self.lmax, self.lmax) + 1) + tri(l, m)]
    }

    #[inline]
    fn dp(&self, j: usize, l: usize, m: usize) -> f64 {
        self.dplm[j * (tri(self.lmax, self.lmax) + 1) + tri(l, m)]
    }

    /// Evaluate `f` at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> GridField {
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n_theta {
            for k in 0..self.n_phi {
                out.push(f(self.theta[j], self.phi[k]));
            }
        }
        out
    }

    pub fn constant(&self, c: f64) -> GridField {
        vec![c; self.len()]
    }

    /// Quadrature of `field · weight` against the unit-sphere element `dΩ`.
    pub fn integrate(&self, field: &[f64], weight: &[f64]) -> Result<f64> {
        if field.len() != self.len() || weight.len() != self.len() {
            return Err(Error::Shape(format!(
                "integrate: expected {} samples, got {} and {}",
                self.len(),
                field.len(),
                weight.len()
            )));
        }
        Ok(self.integrate_unchecked(|i| field[i] * weight[i]))
    }

    /// Quadrature of a node-indexed integrand.
    pub fn integrate_unchecked<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_theta {
            let mut row = 0.0;
            for k in 0..self.n_phi {
                row += f(j * self.n_phi + k);
            }
            total += row * self.weights[j];
        }
        total * self.dphi
    }

    /// Spectral coefficients of the band-limited interpolant.
    pub fn analyze(&self, field: &[f64]) -> Result<ShCoeffs> {
        if field.len() != self.len() {
            return Err(Error::Shape(format!(
                "analyze: expected {} samples, got {}",
                self.len(),
                field.len()
            )));
        }
        let lmax = self.lmax;
        let mut out = ShCoeffs::zeros(lmax);
        let np = self.n_phi;
        let mut fc = vec![0.0; lmax + 1];
        let mut fs = vec![0.0; lmax + 1];
        for j in 0..self.n_theta {
            let row = &field[j * np..(j + 1) * np];
            for m in 0..=lmax {
                let tc = &self.trig_cos[m * np..(m + 1) * np];
                let ts = &self.trig_sin[m * np..(m + 1) * np];
                let (mut c, mut s) = (0.0, 0.0);
                for k in 0..np {
                    c += row[k] * tc[k];
                    s += row[k] * ts[k];
                }
                fc[m] = c * self.dphi * self.weights[j];
                fs[m] = s * self.dphi * self.weights[j];
            }
            for l in 0..=lmax {
                for m in 0..=l {
                    let p = self.p(j, l, m);
                    out.data[ShCoeffs::idx(l, m as i64)] += fc[m] * p;
                    if m > 0 {
                        out.data[ShCoeffs::idx(l, -(m as i64))] += fs[m] * p;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Pointwise evaluation of an expansion on the grid.
    pub fn synthesize(&self, coeffs: &ShCoeffs) -> Result<GridField> {
        Ok(self.synthesize_derivs(coeffs)?.f)
    }

    /// Values and coordinate derivatives up to second order.
    pub fn synthesize_derivs(&self, coeffs: &ShCoeffs) -> Result<Derivs> {
        if coeffs.lmax > self.lmax {
            return Err(Error::Shape(format!(
                "coefficient band {} exceeds grid band {}",
                coeffs.lmax, self.lmax
            )));
        }
        let n = self.len();
        let np = self.n_phi;
        let mut d = Derivs {
            f: vec![0.0; n],
            t: vec![0.0; n],
            p: vec![0.0; n],
            tt: vec![0.0; n],
            tp: vec![0.0; n],
            pp: vec![0.0; n],
        };
        let lc = coeffs.lmax;
        for j in 0..self.n_theta {
            let st = self.sin_theta[j];
            let cot = self.cos_theta[j] / st;
            for m in 0..=lc {
                let mf = m as f64;
                let (mut ac, mut asn, mut dc, mut ds, mut lc_, mut ls) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                for l in m..=lc {
                    let p = self.p(j, l, m);
                    let dp = self.dp(j, l, m);
                    let ll = (l * (l + 1)) as f64;
                    let c = coeffs.get(l, m as i64);
                    ac += c * p;
                    dc += c * dp;
                    lc_ += c * ll * p;
                    if m > 0 {
                        let s = coeffs.get(l, -(m as i64));
                        asn += s * p;
                        ds += s * dp;
                        ls += s * ll * p;
                    }
                }
                // Legendre equation: P'' = -cot P' - (l(l+1) - m²/sin²) P
                let ttc = -cot * dc - lc_ + mf * mf / (st * st) * ac;
                let tts = -cot * ds - ls + mf * mf / (st * st) * asn;
                let tc = &self.trig_cos[m * np..(m + 1) * np];
                let ts = &self.trig_sin[m * np..(m + 1) * np];
                let base = j * np;
                for k in 0..np {
                    let (c, s) = (tc[k], ts[k]);
                    d.f[base + k] += ac * c + asn * s;
                    d.t[base + k] += dc * c + ds * s;
                    d.tt[base + k] += ttc * c + tts * s;
                    d.p[base + k] += mf * (-ac * s + asn * c);
                    d.tp[base + k] += mf * (-dc * s + ds * c);
                    d.pp[base + k] -= mf * mf * (ac * c + asn * s);
                }
            }
        }
        Ok(d)
    }
}

/// Field values and `θ`/`φ` partial derivatives on a grid.
#[derive(Debug, Clone)]
pub struct Derivs {
    pub f: GridField,
    pub t: GridField,
    pub p: GridField,
    pub tt: GridField,
    pub tp: GridField,
    pub pp: GridField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoeffKind {
    #[default]
    Scalar,
    Spheroidal,
    Toroidal,
}

/// Real spherical-harmonic coefficients, `(l, m)` stored at `l² + l + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoeffs {
    pub lmax: usize,
    pub kind: CoeffKind,
    pub data: Vec<f64>,
}

impl ShCoeffs {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            kind: CoeffKind::Scalar,
            data: vec![0.0; (lmax + 1) * (lmax + 1)],
        }
    }

    pub fn with_kind(mut self, kind: CoeffKind) -> Self {
        self.kind = kind;
        if kind != CoeffKind::Scalar {
            self.data[0] = 0.0;
        }
        self
    }

    /// Single basis function `Y_lm`, scaled.
    pub fn delta(lmax: usize, l: usize, m: i64, value: f64) -> Self {
        let mut c = Self::zeros(lmax);
        c.set(l, m, value);
        c
    }

    /// Constant function `value`.
    pub fn constant(lmax: usize, value: f64) -> Self {
        Self::delta(lmax, 0, 0, value * (4.0 * PI).sqrt())
    }

    #[inline]
    pub fn idx(l: usize, m: i64) -> usize {
        ((l * l + l) as i64 + m) as usize
    }

    #[inline]
    pub fn get(&self, l: usize, m: i64) -> f64 {
        if l > self.lmax || m.unsigned_abs() as usize > l {
            return 0.0;
        }
        self.data[((l * l + l) as i64 + m) as usize]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: i64, v: f64) {
        assert!(l <= self.lmax && m.unsigned_abs() as usize <= l, "({l},{m}) out of band {}", self.lmax);
        self.data[((l * l + l) as i64 + m) as usize] = v;
    }

    /// Iterate `(l, m, value)` in canonical `(l, m)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        (0..=self.lmax).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.get(l, m)))
        })
    }

    /// Copy into a different band limit (truncating or zero-padding).
    pub fn resized(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        out.kind = self.kind;
        for (l, m, v) in self.iter() {
            if l <= lmax {
                out.set(l, m, v);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let lmax = self.lmax.max(other.lmax);
        let mut out = self.resized(lmax);
        for (l, m, v) in other.iter() {
            let cur = out.get(l, m);
            out.set(l, m, cur + v);
        }
        out
    }

    /// Sum of squares, equal to `∫ f² dΩ` by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.iter().map(|(l, m, v)| v * other.get(l, m)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Multiply each degree by `f(l)`.
    pub fn map_degree<F: Fn(usize) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            let s = f(l);
            for m in -(l as i64)..=l as i64 {
                let i = ((l * l + l) as i64 + m) as usize;
                out.data[i] *= s;
            }
        }
        out
    }

    /// Random band-limited coefficients with degree-`l` amplitude `amp·ratio^l`.
    pub fn random_decaying<R: Rng>(lmax: usize, amp: f64, ratio: f64, lmin: usize, rng: &mut R) -> Self {
        let mut c = Self::zeros(lmax);
        for l in lmin..=lmax {
            let s = amp * ratio.powi(l as i32);
            for m in -(l as i64)..=l as i64 {
                c.set(l, m, s * rng.gen_range(-1.0..1.0));
            }
        }
        c
    }

    /// Evaluate the expansion at an arbitrary point.
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        let (p, _) = legendre_table(self.lmax, theta.cos(), theta.sin());
        let mut acc = 0.0;
        for l in 0..=self.lmax {
            acc += self.get(l, 0) * p[tri(l, 0)];
            for m in 1..=l {
                let s = 2f64.sqrt() * p[tri(l, m)];
                let mf = m as f64;
                acc += s * (self.get(l, m as i64) * (mf * phi).cos() + self.get(l, -(m as i64)) * (mf * phi).sin());
            }
        }
        acc
    }

    /// Write the repo-wide `l m re im` text format. The basis is real, so
    /// the imaginary column is always zero.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (l, m, v) in self.iter() {
            let _ = writeln!(s, "{l} {m} {v:.16e} {:.16e}", 0.0);
        }
        s
    }

    /// Parse `l m re im` lines (blank lines and `#` comments skipped).
    /// `first_line` is the 1-based line number of the first line, used in
    /// error messages.
    pub fn parse_lines<'a, I: IntoIterator<Item = &'a str>>(lines: I, first_line: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in lines.into_iter().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            entries.push(parse_coeff_line(line, first_line + i)?);
        }
        let lmax = entries.iter().map(|e| e.0).max().unwrap_or(0);
        let mut c = Self::zeros(lmax);
        for (l, m, re, _) in entries {
            c.set(l, m, re);
        }
        Ok(c)
    }

    /// Unit-sphere Laplace–Beltrami: `(l, m) ↦ −l(l+1)·(l, m)`.
    pub fn laplace_beltrami_unit(&self) -> Self {
        self.map_degree(|l| -((l * (l + 1)) as f64))
    }
}

/// Parse one `l m re im` line.
pub fn parse_coeff_line(line: &str, lineno: usize) -> Result<(usize, i64, f64, f64)> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let bad = || Error::Parse { line: lineno, msg: format!("expected `l m re im`, got `{line}`") };
    if toks.len() != 4 {
        return Err(bad());
    }
    let l: usize = toks[0].parse().map_err(|_| bad())?;
    let m: i64 = toks[1].parse().map_err(|_| bad())?;
    let re: f64 = toks[2].parse().map_err(|_| bad())?;
    let im: f64 = toks[3].parse().map_err(|_| bad())?;
    if m.unsigned_abs() as usize > l {
        return Err(Error::Parse { line: lineno, msg: format!("|m| > l in `{line}`") });
    }
    if im != 0.0 {
        return Err(Error::Parse { line: lineno, msg: format!("the basis is real; im must be 0 in `{line}`") });
    }
    Ok((l, m, re, im))
}

/// Unit-sphere Laplace–Beltrami on scalar coefficients.
pub fn laplace_beltrami_unit(coeffs: &ShCoeffs) -> ShCoeffs {
    coeffs.laplace_beltrami_unit()
}
