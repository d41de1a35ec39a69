//! Fundamental forms and intrinsic calculus of a radial graph.
//!
//! With `ρ = a + h`, `ω̂ = (sinθ cosφ, sinθ sinφ, cosθ)` and the usual frame
//! `e_θ`, `e_φ`, the embedding `x = ρ ω̂` has
//!
//! ```text
//! x_θ  = ρ_θ ω̂ + ρ e_θ
//! x_φ  = ρ_φ ω̂ + ρ sinθ e_φ
//! x_θθ = ρ_θθ ω̂ + 2ρ_θ e_θ − ρ ω̂
//! x_θφ = ρ_θφ ω̂ + ρ_φ e_θ + (ρ_θ sinθ + ρ cosθ) e_φ
//! x_φφ = ρ_φφ ω̂ + 2ρ_φ sinθ e_φ − ρ sinθ (sinθ ω̂ + cosθ e_θ)
//! ```
//!
//! Tangent fields are carried as Cartesian vectors at the grid nodes and
//! differentiated component by component through the spectral transform.

use std::sync::Arc;

use nalgebra::Vector3;

use super::SurfaceShape;
use crate::error::Result;
use crate::sphharm::{Derivs, SphGrid};

pub type V3 = Vector3<f64>;

/// Symmetric 2-tensor in `(θ, φ)` coordinates, stored as `[T11, T12, T22]`.
pub type Sym2 = [f64; 3];

#[inline]
pub(crate) fn sym(t: &Sym2, a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) => t[0],
        (1, 1) => t[2],
        _ => t[1],
    }
}

/// Geometry of `Γ_h` sampled on the evaluation grid.
#[derive(Debug, Clone)]
pub struct GeometryCache {
    pub grid: Arc<SphGrid>,
    pub rho: Vec<f64>,
    pub omega: Vec<V3>,
    pub position: Vec<V3>,
    pub x_t: Vec<V3>,
    pub x_p: Vec<V3>,
    pub x_tt: Vec<V3>,
    pub x_tp: Vec<V3>,
    pub x_pp: Vec<V3>,
    pub nu: Vec<V3>,
    pub g: Vec<Sym2>,
    pub g_inv: Vec<Sym2>,
    /// `dA/dΩ`, the area element relative to the unit-sphere element.
    pub area_density: Vec<f64>,
    pub k: Vec<Sym2>,
    /// Mixed components `k_α^β`, indexed `[α][β]`.
    pub shape_op: Vec<[[f64; 2]; 2]>,
    /// Twice the mean curvature.
    pub mean_h: Vec<f64>,
    pub gauss_k: Vec<f64>,
    pub omega_dot_nu: Vec<f64>,
}

fn frame(theta: f64, phi: f64) -> (V3, V3, V3) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (
        V3::new(st * cp, st * sp, ct),
        V3::new(ct * cp, ct * sp, -st),
        V3::new(-sp, cp, 0.0),
    )
}

impl GeometryCache {
    pub fn build(shape: &SurfaceShape) -> Result<Self> {
        let grid = shape.grid.clone();
        let mut h = shape.h.clone();
        h.data[0] += shape.domain.a * (4.0 * std::f64::consts::PI).sqrt();
        let d = grid.synthesize_derivs(&h)?;
        Ok(Self::from_radius(grid, &d))
    }

    /// Geometry of the graph `x = ρ ω̂` from `ρ` and its coordinate
    /// derivatives at the nodes.
    pub fn from_radius(grid: Arc<SphGrid>, d: &Derivs) -> Self {
        let n = grid.len();
        let mut c = Self {
            grid: grid.clone(),
            rho: d.f.clone(),
            omega: Vec::with_capacity(n),
            position: Vec::with_capacity(n),
            x_t: Vec::with_capacity(n),
            x_p: Vec::with_capacity(n),
            x_tt: Vec::with_capacity(n),
            x_tp: Vec::with_capacity(n),
            x_pp: Vec::with_capacity(n),
            nu: Vec::with_capacity(n),
            g: Vec::with_capacity(n),
            g_inv: Vec::with_capacity(n),
            area_density: Vec::with_capacity(n),
            k: Vec::with_capacity(n),
            shape_op: Vec::with_capacity(n),
            mean_h: Vec::with_capacity(n),
            gauss_k: Vec::with_capacity(n),
            omega_dot_nu: Vec::with_capacity(n),
        };
        for j in 0..grid.n_theta {
            let st = grid.sin_theta[j];
            let ct = grid.cos_theta[j];
            for kk in 0..grid.n_phi {
                let i = j * grid.n_phi + kk;
                let (w, et, ep) = frame(grid.theta[j], grid.phi[kk]);
                let (r, rt, rp) = (d.f[i], d.t[i], d.p[i]);
                let (rtt, rtp, rpp) = (d.tt[i], d.tp[i], d.pp[i]);
                let xt = rt * w + r * et;
                let xp = rp * w + r * st * ep;
                let xtt = rtt * w + 2.0 * rt * et - r * w;
                let xtp = rtp * w + rp * et + (rt * st + r * ct) * ep;
                let xpp = rpp * w + 2.0 * rp * st * ep - r * st * (st * w + ct * et);
                let cross = xt.cross(&xp);
                let nu = cross / cross.norm();
                let g = [xt.dot(&xt), xt.dot(&xp), xp.dot(&xp)];
                let det = g[0] * g[2] - g[1] * g[1];
                let gi = [g[2] / det, -g[1] / det, g[0] / det];
                let k = [nu.dot(&xtt), nu.dot(&xtp), nu.dot(&xpp)];
                // k_α^β = k_αγ g^γβ
                let so = [
                    [k[0] * gi[0] + k[1] * gi[1], k[0] * gi[1] + k[1] * gi[2]],
                    [k[1] * gi[0] + k[2] * gi[1], k[1] * gi[1] + k[2] * gi[2]],
                ];
                c.omega.push(w);
                c.position.push(r * w);
                c.x_t.push(xt);
                c.x_p.push(xp);
                c.x_tt.push(xtt);
                c.x_tp.push(xtp);
                c.x_pp.push(xpp);
                c.nu.push(nu);
                c.g.push(g);
                c.g_inv.push(gi);
                c.area_density.push(det.sqrt() / st);
                c.k.push(k);
                c.shape_op.push(so);
                c.mean_h.push(so[0][0] + so[1][1]);
                c.gauss_k.push((k[0] * k[2] - k[1] * k[1]) / det);
                c.omega_dot_nu.push(w.dot(&nu));
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `∫_Γ f dA`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.grid.integrate_unchecked(|i| f[i] * self.area_density[i])
    }

    /// `∫_Γ f(i) dA` for a node-indexed integrand.
    pub fn integrate_with<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        self.grid.integrate_unchecked(|i| f(i) * self.area_density[i])
    }

    pub fn area(&self) -> f64 {
        self.grid.integrate_unchecked(|i| self.area_density[i])
    }

    /// `(1/3)∫ x·ν dA`.
    pub fn volume(&self) -> f64 {
        self.integrate_with(|i| self.position[i].dot(&self.nu[i])) / 3.0
    }

    #[inline]
    pub fn basis(&self, i: usize, a: usize) -> &V3 {
        if a == 0 {
            &self.x_t[i]
        } else {
            &self.x_p[i]
        }
    }

    #[inline]
    pub fn second(&self, i: usize, a: usize, b: usize) -> &V3 {
        match (a, b) {
            (0, 0) => &self.x_tt[i],
            (1, 1) => &self.x_pp[i],
            _ => &self.x_tp[i],
        }
    }

    #[inline]
    pub fn ginv(&self, i: usize, a: usize, b: usize) -> f64 {
        sym(&self.g_inv[i], a, b)
    }

    /// Coordinate derivatives of a grid field through the spectral transform.
    pub fn derivs(&self, f: &[f64]) -> Result<Derivs> {
        let c = self.grid.analyze(f)?;
        self.grid.synthesize_derivs(&c)
    }

    /// Cartesian derivatives of the three components of a vector field.
    pub fn vec_derivs(&self, y: &[V3]) -> Result<[Derivs; 3]> {
        let comp = |c: usize| -> Result<Derivs> {
            let f: Vec<f64> = y.iter().map(|v| v[c]).collect();
            self.derivs(&f)
        };
        Ok([comp(0)?, comp(1)?, comp(2)?])
    }

    /// `grad_g f = g^{αβ} f_{,β} x_α` from coordinate derivatives.
    pub fn grad_from(&self, d: &Derivs) -> Vec<V3> {
        (0..self.len())
            .map(|i| {
                let fd = [d.t[i], d.p[i]];
                self.raise_vec(i, fd)
            })
            .collect()
    }

    pub fn grad(&self, f: &[f64]) -> Result<Vec<V3>> {
        Ok(self.grad_from(&self.derivs(f)?))
    }

    /// Tangent vector `g^{αβ} c_β x_α` from covariant components.
    #[inline]
    pub fn raise_vec(&self, i: usize, c: [f64; 2]) -> V3 {
        let gi = &self.g_inv[i];
        let u0 = gi[0] * c[0] + gi[1] * c[1];
        let u1 = gi[1] * c[0] + gi[2] * c[1];
        u0 * self.x_t[i] + u1 * self.x_p[i]
    }

    /// Contravariant components `Y^α` of the tangential part of `y`.
    #[inline]
    pub fn contra(&self, i: usize, y: &V3) -> [f64; 2] {
        let c = [y.dot(&self.x_t[i]), y.dot(&self.x_p[i])];
        let gi = &self.g_inv[i];
        [gi[0] * c[0] + gi[1] * c[1], gi[1] * c[0] + gi[2] * c[1]]
    }

    /// Tangential projection.
    #[inline]
    pub fn project(&self, i: usize, y: &V3) -> V3 {
        y - y.dot(&self.nu[i]) * self.nu[i]
    }

    /// Christoffel symbols `Γ^γ_{αβ} = g^{γδ} x_δ·x_{αβ}`, indexed `[γ][α][β]`.
    pub fn christoffel(&self, i: usize) -> [[[f64; 2]; 2]; 2] {
        let mut out = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            for b in a..2 {
                let s = self.second(i, a, b);
                let low = [self.x_t[i].dot(s), self.x_p[i].dot(s)];
                for c in 0..2 {
                    let v = self.ginv(i, c, 0) * low[0] + self.ginv(i, c, 1) * low[1];
                    out[c][a][b] = v;
                    out[c][b][a] = v;
                }
            }
        }
        out
    }

    /// Laplace–Beltrami `g^{αβ}(f_{,αβ} − Γ^γ_{αβ} f_{,γ})` from derivatives.
    pub fn laplace_beltrami_from(&self, d: &Derivs) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let gm = self.christoffel(i);
                let f1 = [d.t[i], d.p[i]];
                let f2 = [[d.tt[i], d.tp[i]], [d.tp[i], d.pp[i]]];
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let cov = f2[a][b] - gm[0][a][b] * f1[0] - gm[1][a][b] * f1[1];
                        acc += self.ginv(i, a, b) * cov;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn laplace_beltrami(&self, f: &[f64]) -> Result<Vec<f64>> {
        // constants have no derivatives; removing the mean keeps round-off
        // proportional to the variation of `f` rather than its size
        let mean = f.iter().sum::<f64>() / f.len().max(1) as f64;
        let centered: Vec<f64> = f.iter().map(|v| v - mean).collect();
        Ok(self.laplace_beltrami_from(&self.derivs(&centered)?))
    }

    /// `g^{αβ} ∂_α Y · x_β`. For tangent `Y` this is `div_g Y`; for a full
    /// velocity `u = v + wν` it is `div_g v − wH`.
    pub fn div_cartesian(&self, y: &[V3]) -> Result<Vec<f64>> {
        let dy = self.vec_derivs(y)?;
        Ok(self.div_cartesian_from(&dy))
    }

    pub fn div_cartesian_from(&self, dy: &[Derivs; 3]) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (yt, yp) = partials(dy, i);
                self.ginv(i, 0, 0) * yt.dot(&self.x_t[i])
                    + self.ginv(i, 0, 1) * (yt.dot(&self.x_p[i]) + yp.dot(&self.x_t[i]))
                    + self.ginv(i, 1, 1) * yp.dot(&self.x_p[i])
            })
            .collect()
    }

    /// Raise both indices of a covariant symmetric tensor.
    pub fn raise_sym(&self, i: usize, t: &Sym2) -> Sym2 {
        let gi = &self.g_inv[i];
        let mut out = [0.0; 3];
        for (slot, (a, b)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
            let mut acc = 0.0;
            for c in 0..2 {
                for e in 0..2 {
                    acc += sym(gi, *a, c) * sym(t, c, e) * sym(gi, e, *b);
                }
            }
            out[slot] = acc;
        }
        out
    }

    /// Apply the shape operator to a tangent vector: `(k v)^β = v^α k_α^β`.
    pub fn apply_shape(&self, i: usize, v: &V3) -> V3 {
        let c = self.contra(i, v);
        let so = &self.shape_op[i];
        let b0 = c[0] * so[0][0] + c[1] * so[1][0];
        let b1 = c[0] * so[0][1] + c[1] * so[1][1];
        b0 * self.x_t[i] + b1 * self.x_p[i]
    }
}

/// `(∂_θ Y, ∂_φ Y)` at node `i` from component derivatives.
#[inline]
pub(crate) fn partials(dy: &[Derivs; 3], i: usize) -> (V3, V3) {
    (
        V3::new(dy[0].t[i], dy[1].t[i], dy[2].t[i]),
        V3::new(dy[0].p[i], dy[1].p[i], dy[2].p[i]),
    )
}
