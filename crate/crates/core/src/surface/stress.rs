//! Surface kinematics and hybrid stress tensors.

use super::geometry::{partials, sym, GeometryCache, Sym2, V3};
use super::{grad_l2_f, MaterialParams};
use crate::error::{Error, Result};

/// Membrane velocity `u = v + w ν` with `v` tangent, sampled on the grid.
#[derive(Debug, Clone)]
pub struct SurfaceVelocity {
    pub v: Vec<V3>,
    pub w: Vec<f64>,
}

impl SurfaceVelocity {
    pub fn zero(g: &GeometryCache) -> Self {
        Self { v: vec![V3::zeros(); g.len()], w: vec![0.0; g.len()] }
    }

    /// Split an ambient vector field on `Γ` into tangential and normal parts.
    pub fn from_ambient(g: &GeometryCache, u: &[V3]) -> Self {
        let v = (0..g.len()).map(|i| g.project(i, &u[i])).collect();
        let w = (0..g.len()).map(|i| u[i].dot(&g.nu[i])).collect();
        Self { v, w }
    }

    pub fn normal(g: &GeometryCache, w: Vec<f64>) -> Self {
        Self { v: vec![V3::zeros(); g.len()], w }
    }

    pub fn ambient(&self, g: &GeometryCache) -> Vec<V3> {
        (0..g.len()).map(|i| self.v[i] + self.w[i] * g.nu[i]).collect()
    }

    fn check(&self, g: &GeometryCache) -> Result<()> {
        if self.v.len() != g.len() || self.w.len() != g.len() {
            return Err(Error::Shape(format!(
                "velocity has {}/{} samples, grid has {}",
                self.v.len(),
                self.w.len(),
                g.len()
            )));
        }
        Ok(())
    }
}

/// Covariant components `(D u)_{αβ}` at the nodes.
#[derive(Debug, Clone)]
pub struct RateOfStrain {
    pub d: Vec<Sym2>,
}

impl RateOfStrain {
    /// `g^{αβ} (D u)_{αβ}`.
    pub fn trace(&self, g: &GeometryCache) -> Vec<f64> {
        (0..g.len())
            .map(|i| {
                let (gi, d) = (&g.g_inv[i], &self.d[i]);
                gi[0] * d[0] + 2.0 * gi[1] * d[1] + gi[2] * d[2]
            })
            .collect()
    }

    /// `|D u|²_g` at the nodes.
    pub fn norm_sq(&self, g: &GeometryCache) -> Vec<f64> {
        (0..g.len())
            .map(|i| {
                let up = g.raise_sym(i, &self.d[i]);
                let d = &self.d[i];
                up[0] * d[0] + 2.0 * up[1] * d[1] + up[2] * d[2]
            })
            .collect()
    }
}

/// Hybrid tensor `T^i_α = ^tT_α^β x_β^i + ^nT_α ν^i`, stored with raised
/// surface indices.
#[derive(Debug, Clone)]
pub struct HybridStress {
    pub tangential: Vec<Sym2>,
    pub normal: Vec<[f64; 2]>,
}

impl HybridStress {
    pub fn zero(n: usize) -> Self {
        Self { tangential: vec![[0.0; 3]; n], normal: vec![[0.0; 2]; n] }
    }

    /// Isotropic tension `q g^{αβ}`.
    pub fn isotropic(g: &GeometryCache, q: &[f64]) -> Self {
        let tangential = (0..g.len()).map(|i| g.g_inv[i].map(|x| q[i] * x)).collect();
        Self { tangential, normal: vec![[0.0; 2]; g.len()] }
    }

    pub fn add(&self, other: &Self) -> Self {
        let tangential = self
            .tangential
            .iter()
            .zip(&other.tangential)
            .map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
            .collect();
        let normal = self
            .normal
            .iter()
            .zip(&other.normal)
            .map(|(a, b)| [a[0] + b[0], a[1] + b[1]])
            .collect();
        Self { tangential, normal }
    }
}

/// `(D u)_{αβ} = ½(v_{α;β} + v_{β;α}) − w k_{αβ}`.
pub fn rate_of_strain(g: &GeometryCache, vel: &SurfaceVelocity) -> Result<RateOfStrain> {
    vel.check(g)?;
    let dv = g.vec_derivs(&vel.v)?;
    let d = (0..g.len())
        .map(|i| {
            // for tangent v, ∂_α v · x_β = v_{β;α}
            let (vt, vp) = partials(&dv, i);
            let (xt, xp) = (&g.x_t[i], &g.x_p[i]);
            let w = vel.w[i];
            let k = &g.k[i];
            [
                vt.dot(xt) - w * k[0],
                0.5 * (vt.dot(xp) + vp.dot(xt)) - w * k[1],
                vp.dot(xp) - w * k[2],
            ]
        })
        .collect();
    Ok(RateOfStrain { d })
}

/// `Div u = div_g v − w H`.
pub fn surface_div(g: &GeometryCache, vel: &SurfaceVelocity) -> Result<Vec<f64>> {
    vel.check(g)?;
    let div_v = g.div_cartesian(&vel.v)?;
    Ok((0..g.len()).map(|i| div_v[i] - vel.w[i] * g.mean_h[i]).collect())
}

/// Bending stress `κ((H−C0)²/2 g − (H−C0) k)` with normal part
/// `−κ grad_g (H − C0)`.
pub fn helfrich_stress(g: &GeometryCache, params: &MaterialParams) -> Result<HybridStress> {
    let dh = g.derivs(&g.mean_h)?;
    let kap = params.kappa;
    let mut out = HybridStress::zero(g.len());
    for i in 0..g.len() {
        let e = g.mean_h[i] - params.c0;
        let gi = &g.g_inv[i];
        let kup = g.raise_sym(i, &g.k[i]);
        for s in 0..3 {
            out.tangential[i][s] = kap * (0.5 * e * e * gi[s] - e * kup[s]);
        }
        let c = [dh.t[i], dh.p[i]];
        out.normal[i] = [
            -kap * (gi[0] * c[0] + gi[1] * c[1]),
            -kap * (gi[1] * c[0] + gi[2] * c[1]),
        ];
    }
    Ok(out)
}

/// Boussinesq–Scriven stress `−q g^{αβ} + 2μ (D u)^{αβ}`.
pub fn fluid_stress(g: &GeometryCache, vel: &SurfaceVelocity, q: &[f64], mu: f64) -> Result<HybridStress> {
    let d = rate_of_strain(g, vel)?;
    let mut out = HybridStress::zero(g.len());
    for i in 0..g.len() {
        let up = g.raise_sym(i, &d.d[i]);
        for s in 0..3 {
            out.tangential[i][s] = -q[i] * g.g_inv[i][s] + 2.0 * mu * up[s];
        }
    }
    Ok(out)
}

/// Surface divergence of a hybrid tensor as an ambient vector field.
///
/// Each ambient row `Z^i = T^{iα} x_α` is a tangent field and
/// `(Div T)^i = div_g Z^i`, evaluated through Cartesian spectral
/// derivatives. Expanding the rows reproduces the four-term formula
/// `(div_g ᵗT) + ᵗT:k ν + (div_g ⁿT) ν − k(ⁿT)`.
pub fn hybrid_div(g: &GeometryCache, t: &HybridStress) -> Result<Vec<V3>> {
    let n = g.len();
    let mut rows: [Vec<V3>; 3] = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let tt = &t.tangential[i];
        let nt = &t.normal[i];
        let xb = [g.x_t[i], g.x_p[i]];
        // T^{·α} as ambient vectors, α = θ, φ
        let mut col = [V3::zeros(), V3::zeros()];
        for (a, c) in col.iter_mut().enumerate() {
            *c = sym(tt, a, 0) * xb[0] + sym(tt, a, 1) * xb[1] + nt[a] * g.nu[i];
        }
        for (r, row) in rows.iter_mut().enumerate() {
            row.push(col[0][r] * xb[0] + col[1][r] * xb[1]);
        }
    }
    let divs = [g.div_cartesian(&rows[0])?, g.div_cartesian(&rows[1])?, g.div_cartesian(&rows[2])?];
    Ok((0..n).map(|i| V3::new(divs[0][i], divs[1][i], divs[2][i])).collect())
}

/// Total surface force density of an incompressible membrane flow
/// (`Div u = 0`), split into tangential and normal parts:
///
/// ```text
/// −grad q + μ(Δ_g v + grad(wH) + K v − 2 div_g(w k))
/// −qH + 2μ(⟨∇v, k⟩ − w(H² − 2K)) − grad_L2 F
/// ```
pub fn div_total_stress(
    g: &GeometryCache,
    vel: &SurfaceVelocity,
    q: &[f64],
    params: &MaterialParams,
) -> Result<(Vec<V3>, Vec<f64>)> {
    vel.check(g)?;
    let n = g.len();
    let mu = params.mu;
    let dv = g.vec_derivs(&vel.v)?;
    let lap_comp: Vec<Vec<f64>> = dv.iter().map(|d| g.laplace_beltrami_from(d)).collect();
    let grad_q = g.grad(q)?;
    let wh: Vec<f64> = (0..n).map(|i| vel.w[i] * g.mean_h[i]).collect();
    let grad_wh = g.grad(&wh)?;
    let grad_w = g.grad(&vel.w)?;
    let grad_h = g.grad(&g.mean_h)?;
    let gf = grad_l2_f(g, params)?;
    let mut tan = Vec::with_capacity(n);
    let mut nor = Vec::with_capacity(n);
    for i in 0..n {
        let v = &vel.v[i];
        let w = vel.w[i];
        let (h, k) = (g.mean_h[i], g.gauss_k[i]);
        let lap_v_amb = V3::new(lap_comp[0][i], lap_comp[1][i], lap_comp[2][i]);
        let kv = g.apply_shape(i, v);
        let lap_v = g.project(i, &lap_v_amb) + g.apply_shape(i, &kv);
        // Codazzi: div_g(w k) = k(grad w) + w grad H
        let div_wk = g.apply_shape(i, &grad_w[i]) + w * grad_h[i];
        tan.push(-grad_q[i] + mu * (lap_v + grad_wh[i] + k * v - 2.0 * div_wk));
        let (vt, vp) = partials(&dv, i);
        let kup = g.raise_sym(i, &g.k[i]);
        let dvk = kup[0] * vt.dot(&g.x_t[i])
            + kup[1] * (vt.dot(&g.x_p[i]) + vp.dot(&g.x_t[i]))
            + kup[2] * vp.dot(&g.x_p[i]);
        nor.push(-q[i] * h + 2.0 * mu * (dvk - w * (h * h - 2.0 * k)) - gf[i]);
    }
    Ok((tan, nor))
}
