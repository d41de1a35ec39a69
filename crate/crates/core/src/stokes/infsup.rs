//! Discrete inf-sup constant of the constraint operator `(div, Div)` for one
//! harmonic degree.
//!
//! Velocities are poloidal fields `U(r) Y ω̂ + V(r) ∇₁Y`, zero at the outer
//! wall and continuous across `r = a`, normed by the dissipation form.
//! Pressures are `(P_in(r), P_out(r), q)` in `L²(Ω) × L²(Γ)`. Radial
//! functions are Chebyshev polynomials integrated by Gauss–Legendre
//! quadrature. The constant is the square root of the smallest eigenvalue of
//! the Schur complement `B A⁻¹ Bᵀ` relative to the pressure mass matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphharm::gauss_legendre;
use crate::surface::{DomainSpec, MaterialParams};

/// Default number of radial polynomials per region and field.
pub const DEFAULT_RESOLUTION: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfSupReport {
    pub l: usize,
    pub resolution: usize,
    /// Smallest singular value on the complement of the null space.
    pub sigma: f64,
    /// Number of pressure directions annihilated by the constraint operator.
    pub null_dim: usize,
    /// For `l = 0`: smallest singular value with the gauge rows appended.
    pub sigma_with_gauge: Option<f64>,
    /// For `l = 0`: null directions as `(κ_in, κ_out, κ_q)` constant triples.
    pub null_constants: Vec<[f64; 3]>,
}

/// Chebyshev `T_k(x)` and `T_k'(x)` for `k < n`.
fn chebyshev(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t = vec![0.0; n];
    let mut dt = vec![0.0; n];
    if n == 0 {
        return (t, dt);
    }
    t[0] = 1.0;
    if n > 1 {
        t[1] = x;
        dt[1] = 1.0;
    }
    for k in 2..n {
        t[k] = 2.0 * x * t[k - 1] - t[k - 2];
        dt[k] = 2.0 * t[k - 1] + 2.0 * x * dt[k - 1] - dt[k - 2];
    }
    (t, dt)
}

/// Values and derivatives of the basis functions at one radius.
struct Sample {
    r: f64,
    weight: f64,
    f: Vec<f64>,
    df: Vec<f64>,
}

/// Radial velocity basis for one scalar profile. Functions are continuous,
/// zero at the wall, and regular at the origin with leading power `e`.
/// Inner functions continue linearly into the shell; shell bubbles vanish at
/// both ends.
fn velocity_basis(n: usize, e: i32, a: f64, r_out: f64, nodes: &(Vec<f64>, Vec<f64>)) -> (Vec<Sample>, f64) {
    let n_in = n;
    let n_sh = n;
    let total = n_in + n_sh;
    let mut out = Vec::new();
    // inner region
    for (x, w) in nodes.0.iter().zip(&nodes.1) {
        let r = 0.5 * a * (x + 1.0);
        let y = 2.0 * r * r / (a * a) - 1.0;
        let (t, dt) = chebyshev(n_in, y);
        let mut f = vec![0.0; total];
        let mut df = vec![0.0; total];
        for k in 0..n_in {
            let re = r.powi(e);
            let dre = if e == 0 { 0.0 } else { e as f64 * r.powi(e - 1) };
            f[k] = re * t[k];
            df[k] = dre * t[k] + re * dt[k] * 4.0 * r / (a * a);
        }
        out.push(Sample { r, weight: 0.5 * a * w * r * r, f, df });
    }
    // inner functions at r = a: r^e T_k(1) = a^e
    let at_a = a.powi(e);
    let len = r_out - a;
    for (x, w) in nodes.0.iter().zip(&nodes.1) {
        let r = a + 0.5 * len * (x + 1.0);
        let lin = (r_out - r) / len;
        let mut f = vec![0.0; total];
        let mut df = vec![0.0; total];
        for k in 0..n_in {
            f[k] = at_a * lin;
            df[k] = -at_a / len;
        }
        let (t, dt) = chebyshev(n_sh, *x);
        let bub = (r_out - r) * (r - a);
        let dbub = r_out + a - 2.0 * r;
        for k in 0..n_sh {
            f[n_in + k] = bub * t[k];
            df[n_in + k] = dbub * t[k] + bub * dt[k] * 2.0 / len;
        }
        out.push(Sample { r, weight: 0.5 * len * w * r * r, f, df });
    }
    (out, at_a)
}

/// Pressure basis values at the same nodes: inner `r^l T_k(2r²/a² − 1)`,
/// shell `T_k(x)`. The surface pressure is one extra unknown.
fn pressure_values(n: usize, l: usize, a: f64, nodes: &(Vec<f64>, Vec<f64>)) -> Vec<Vec<f64>> {
    let total = 2 * n + 1;
    let mut out = Vec::new();
    for x in &nodes.0 {
        let r = 0.5 * a * (x + 1.0);
        let (t, _) = chebyshev(n, 2.0 * r * r / (a * a) - 1.0);
        let mut p = vec![0.0; total];
        for k in 0..n {
            p[k] = r.powi(l as i32) * t[k];
        }
        out.push(p);
    }
    for x in &nodes.0 {
        let (t, _) = chebyshev(n, *x);
        let mut p = vec![0.0; total];
        for k in 0..n {
            p[n + k] = t[k];
        }
        out.push(p);
    }
    out
}

pub fn infsup_mode(l: usize, params: &MaterialParams, domain: &DomainSpec) -> Result<InfSupReport> {
    infsup_mode_with(l, params, domain, DEFAULT_RESOLUTION)
}

/// Inf-sup report at a given radial resolution, in units `a = 1`, `μ_b = 1`.
pub fn infsup_mode_with(l: usize, params: &MaterialParams, domain: &DomainSpec, n: usize) -> Result<InfSupReport> {
    params.validate()?;
    domain.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter("inf-sup resolution must be at least 2".into()));
    }
    let a = 1.0;
    let r_out = domain.r_outer / domain.a;
    let mu = params.mu / (params.mu_b * domain.a);
    let ll = (l * (l + 1)) as f64;
    let nodes = gauss_legendre(2 * n + 12);

    // U is regular like r^{l−1} (r for l = 0), V like r^{l−1}
    let e_u = if l == 0 { 1 } else { l as i32 - 1 };
    let (su, ua) = velocity_basis(n + 2, e_u, a, r_out, &nodes);
    let (sv, va) = if l > 0 {
        velocity_basis(n + 2, l as i32 - 1, a, r_out, &nodes)
    } else {
        (Vec::new(), 0.0)
    };
    let nu = su[0].f.len();
    let nv = sv.first().map_or(0, |s| s.f.len());
    let nvel = nu + nv;
    let pv = pressure_values(n, l, a, &nodes);
    let np = 2 * n + 1;

    let mut amat = DMatrix::<f64>::zeros(nvel, nvel);
    let mut bmat = DMatrix::<f64>::zeros(np, nvel);
    let mut mmat = DMatrix::<f64>::zeros(np, np);
    for j in 0..su.len() {
        let (r, w) = (su[j].r, su[j].weight);
        // per-field pointwise quantities for each velocity basis function
        let mut u = vec![0.0; nvel];
        let mut du = vec![0.0; nvel];
        let mut v = vec![0.0; nvel];
        let mut dv = vec![0.0; nvel];
        u[..nu].copy_from_slice(&su[j].f);
        du[..nu].copy_from_slice(&su[j].df);
        if nv > 0 {
            v[nu..].copy_from_slice(&sv[j].f);
            dv[nu..].copy_from_slice(&sv[j].df);
        }
        let tau: Vec<f64> = (0..nvel).map(|k| dv[k] - v[k] / r + u[k] / r).collect();
        for p in 0..nvel {
            for q in p..nvel {
                let d = du[p] * du[q]
                    + 0.5 * ll * tau[p] * tau[q]
                    + (2.0 * u[p] * u[q] - ll * (u[p] * v[q] + v[p] * u[q]) + (ll * ll - ll) * v[p] * v[q]) / (r * r);
                amat[(p, q)] += 2.0 * w * d;
            }
        }
        for i in 0..np {
            let pi = pv[j][i];
            if pi == 0.0 {
                continue;
            }
            for k in 0..nvel {
                bmat[(i, k)] += w * pi * (du[k] + 2.0 * u[k] / r - ll * v[k] / r);
            }
            for k in 0..np {
                mmat[(i, k)] += w * pi * pv[j][k];
            }
        }
    }
    // surface terms: U(a) and V(a) come from the inner-continued functions
    let nin = nu / 2;
    let mut us = vec![0.0; nvel];
    let mut vs = vec![0.0; nvel];
    for k in 0..nin {
        us[k] = ua;
        if nv > 0 {
            vs[nu + k] = va;
        }
    }
    for p in 0..nvel {
        for q in p..nvel {
            let s = 2.0 * us[p] * us[q] - ll * (us[p] * vs[q] + vs[p] * us[q]) + (ll * ll - ll) * vs[p] * vs[q];
            amat[(p, q)] += 2.0 * mu * s;
        }
    }
    for p in 0..nvel {
        for q in 0..p {
            amat[(p, q)] = amat[(q, p)];
        }
    }
    let qi = np - 1;
    for k in 0..nvel {
        bmat[(qi, k)] = a * a * (2.0 * us[k] - ll * vs[k]) / a;
    }
    mmat[(qi, qi)] = a * a;

    let schur = |extra: Option<&DMatrix<f64>>| -> Result<(Vec<f64>, DMatrix<f64>)> {
        let chol_a = amat.clone().cholesky().ok_or_else(|| Error::Shape("velocity form not positive".into()))?;
        let ainv_bt = chol_a.solve(&bmat.transpose());
        let mut s = &bmat * ainv_bt;
        if let Some(g) = extra {
            s += g * g.transpose();
        }
        let chol_m = mmat.clone().cholesky().ok_or_else(|| Error::Shape("pressure mass not positive".into()))?;
        let lm = chol_m.l();
        let linv = lm.clone().try_inverse().ok_or_else(|| Error::Shape("mass factor singular".into()))?;
        let c = &linv * s * linv.transpose();
        let c = 0.5 * (&c + c.transpose());
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|i, j| eig.eigenvalues[*i].total_cmp(&eig.eigenvalues[*j]));
        let vals: Vec<f64> = order.iter().map(|i| eig.eigenvalues[*i]).collect();
        // back to pressure coefficients: p = L⁻ᵀ y
        let vecs = DMatrix::from_fn(np, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        let vecs = linv.transpose() * vecs;
        Ok((vals, vecs))
    };

    let (vals, vecs) = schur(None)?;
    let top = vals.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let null_dim = vals.iter().filter(|v| **v <= 1e-10 * top).count();
    let sigma = vals.iter().find(|v| **v > 1e-10 * top).copied().unwrap_or(0.0).max(0.0).sqrt();

    let mut null_constants = Vec::new();
    let mut sigma_with_gauge = None;
    if l == 0 {
        for c in 0..null_dim {
            let col = vecs.column(c);
            // constant parts read off at r = a in each region, surface pressure directly
            let at = |off: usize, x: f64| -> f64 {
                let (t, _) = chebyshev(n, x);
                (0..n).map(|k| col[off + k] * t[k]).sum()
            };
            null_constants.push([at(0, 1.0), at(n, -1.0), col[qi]]);
        }
        // gauge functionals ∫_Ω π and ∫_Γ q/H + ∫_{Ω¹} π
        let mut g = DMatrix::<f64>::zeros(np, 2);
        let h = -2.0 / a;
        for j in 0..pv.len() {
            let w = su[j].weight;
            for i in 0..np - 1 {
                g[(i, 0)] += w * pv[j][i];
                if i < n {
                    g[(i, 1)] += w * pv[j][i];
                }
            }
        }
        g[(qi, 1)] = a * a / h;
        let (vals_g, _) = schur(Some(&g))?;
        sigma_with_gauge = Some(vals_g[0].max(0.0).sqrt());
    }
    Ok(InfSupReport { l, resolution: n, sigma, null_dim, sigma_with_gauge, null_constants })
}
