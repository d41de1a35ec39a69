#![allow(dead_code)]
//! Chebyshev collocation of the single-mode interface problem. The inner
//! ball uses the parity of the regular solution on a grid over `[−a, a]`;
//! the shell uses Gauss–Lobatto points on `[a, R]`. Bulk forcing is sampled
//! pointwise, so inner forcing must have the parity of a smooth field.

use nalgebra::{DMatrix, DVector};
use vesicle_core::stokes::Monomial;

/// Chebyshev–Lobatto points `cos(πj/n)` and the differentiation matrix.
fn cheb(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = c(i) / c(j) * sign / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|j| *j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    (x, d)
}

/// First and second derivative matrices acting on the positive half of an
/// even-or-odd function sampled on `m` positive nodes of `[−a, a]`.
fn folded(m: usize, a: f64, parity: f64) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = 2 * m - 1;
    let (x, d) = cheb(n);
    let d = d / a;
    let d2 = &d * &d;
    let fold = |full: &DMatrix<f64>| DMatrix::from_fn(m, m, |i, k| full[(i, k)] + parity * full[(i, n - k)]);
    let r: Vec<f64> = x[..m].iter().map(|v| v * a).collect();
    (r, fold(&d), fold(&d2))
}

/// Surface data and bulk monomials of one mode.
#[derive(Debug, Clone, Default)]
pub struct ModeForcing {
    pub f3_nu: f64,
    pub f3_psi: f64,
    pub f3_phi: f64,
    pub f4: f64,
    pub inner: Vec<Monomial>,
    pub outer: Vec<Monomial>,
}

impl ModeForcing {
    pub fn normal(c: f64) -> Self {
        Self { f3_nu: c, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CollocationResult {
    pub w: f64,
    pub v_surf: f64,
    pub t_surf: f64,
    pub q: f64,
}

/// Right-hand sides `(radial, Ψ, Φ, div)` of `μ_b Δu − ∇π = f1 − μ_b ∇f2`,
/// `div u = f2` at radius `r`.
fn forcing(terms: &[Monomial], r: f64, mu_b: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for t in terms {
        let rp = r.powi(t.p);
        let rp1 = r.powi(t.p - 1);
        out[0] += t.c_r * rp - mu_b * t.c_div * t.p as f64 * rp1;
        out[1] += t.c_psi * rp - mu_b * t.c_div * rp1;
        out[2] += t.c_phi * rp;
        out[3] += t.c_div * rp;
    }
    out
}

/// Parameters of the collocation problem.
#[derive(Debug, Clone, Copy)]
pub struct Geom {
    pub a: f64,
    pub r_out: f64,
    pub mu_b: f64,
    pub mu: f64,
}

/// Unit normal force of degree `l ≥ 1` with `m` nodes per region.
pub fn unit_normal_force(l: usize, a: f64, r_out: f64, mu_b: f64, mu: f64, m: usize) -> CollocationResult {
    solve_mode(l, &Geom { a, r_out, mu_b, mu }, &ModeForcing::normal(1.0), m)
}

/// Solve the S1 problem of degree `l ≥ 1` with `m` nodes per region.
pub fn solve_mode(l: usize, g: &Geom, f: &ModeForcing, m: usize) -> CollocationResult {
    let (w, v_surf, q) = poloidal(l, g, f, m);
    CollocationResult { w, v_surf, q, t_surf: toroidal(l, g, f, m) }
}

fn sgn(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn poloidal(l: usize, g: &Geom, f: &ModeForcing, m: usize) -> (f64, f64, f64) {
    let Geom { a, r_out, mu_b, mu } = *g;
    let ll = (l * (l + 1)) as f64;
    // inner: U, V have parity (−1)^{l−1}, P parity (−1)^l
    let (ri, d1v, d2v) = folded(m, a, sgn(l + 1));
    let (_, d1p, _) = folded(m, a, sgn(l));
    let (xs, ds) = cheb(m - 1);
    let half = 0.5 * (r_out - a);
    let rs: Vec<f64> = xs.iter().map(|x| a + half * (x + 1.0)).collect();
    let d1s = &ds / half;
    let d2s = &d1s * &d1s;

    // unknown layout: [U_i, V_i, P_i, U_s, V_s, P_s, Q]
    let n = m;
    let (ui, vi, pi, us, vs, ps, qq) = (0, n, 2 * n, 3 * n, 4 * n, 5 * n, 6 * n);
    let nu = 6 * n + 1;
    let mut mat = DMatrix::<f64>::zeros(nu, nu);
    let mut rhs = DVector::<f64>::zeros(nu);
    let mut row = 0;

    let bulk = |mat: &mut DMatrix<f64>,
                    rhs: &mut DVector<f64>,
                    row: &mut usize,
                    r: &[f64],
                    ops: (&DMatrix<f64>, &DMatrix<f64>, &DMatrix<f64>),
                    off: (usize, usize, usize),
                    terms: &[Monomial],
                    skip: &[usize]| {
        let (d1, d2, d1p) = ops;
        let (u0, v0, p0) = off;
        for i in 0..r.len() {
            let ri = r[i];
            let fr = forcing(terms, ri, mu_b);
            // divergence everywhere
            for k in 0..r.len() {
                mat[(*row, u0 + k)] += d1[(i, k)];
            }
            mat[(*row, u0 + i)] += 2.0 / ri;
            mat[(*row, v0 + i)] += -ll / ri;
            rhs[*row] = fr[3];
            *row += 1;
            if skip.contains(&i) {
                continue;
            }
            for k in 0..r.len() {
                mat[(*row, u0 + k)] += mu_b * (d2[(i, k)] + 2.0 / ri * d1[(i, k)]);
                mat[(*row, p0 + k)] -= d1p[(i, k)];
            }
            mat[(*row, u0 + i)] -= mu_b * (ll + 2.0) / (ri * ri);
            mat[(*row, v0 + i)] += mu_b * 2.0 * ll / (ri * ri);
            rhs[*row] = fr[0];
            *row += 1;
            for k in 0..r.len() {
                mat[(*row, v0 + k)] += mu_b * (d2[(i, k)] + 2.0 / ri * d1[(i, k)]);
            }
            mat[(*row, v0 + i)] -= mu_b * ll / (ri * ri);
            mat[(*row, u0 + i)] += mu_b * 2.0 / (ri * ri);
            mat[(*row, p0 + i)] -= 1.0 / ri;
            rhs[*row] = fr[1];
            *row += 1;
        }
    };
    // inner node 0 is r = a
    bulk(&mut mat, &mut rhs, &mut row, &ri, (&d1v, &d2v, &d1p), (ui, vi, pi), &f.inner, &[0]);
    // shell node 0 is r = R, node n−1 is r = a
    bulk(&mut mat, &mut rhs, &mut row, &rs, (&d1s, &d2s, &d1s), (us, vs, ps), &f.outer, &[0, n - 1]);
    let (ia, sa, sr) = (0, n - 1, 0);
    // wall
    mat[(row, us + sr)] = 1.0;
    row += 1;
    mat[(row, vs + sr)] = 1.0;
    row += 1;
    // continuity
    mat[(row, ui + ia)] = 1.0;
    mat[(row, us + sa)] = -1.0;
    row += 1;
    mat[(row, vi + ia)] = 1.0;
    mat[(row, vs + sa)] = -1.0;
    row += 1;
    // surface incompressibility
    mat[(row, ui + ia)] = 2.0 / a;
    mat[(row, vi + ia)] = -ll / a;
    rhs[row] = f.f4;
    row += 1;
    // tangential balance: −Q/a + μ((2−2L)V + 2U)/a² + μ_b[[V' − V/r + U/r]]
    mat[(row, qq)] = -1.0 / a;
    mat[(row, vi + ia)] += mu * (2.0 - 2.0 * ll) / (a * a);
    mat[(row, ui + ia)] += mu * 2.0 / (a * a);
    for k in 0..n {
        mat[(row, vs + k)] += mu_b * d1s[(sa, k)];
        mat[(row, vi + k)] -= mu_b * d1v[(ia, k)];
    }
    mat[(row, vs + sa)] -= mu_b / a;
    mat[(row, us + sa)] += mu_b / a;
    mat[(row, vi + ia)] += mu_b / a;
    mat[(row, ui + ia)] -= mu_b / a;
    rhs[row] = f.f3_psi;
    row += 1;
    // normal balance: 2Q/a + 2μ(LV − 2U)/a² + [[−P + 2μ_b U']]
    mat[(row, qq)] = 2.0 / a;
    mat[(row, vi + ia)] += 2.0 * mu * ll / (a * a);
    mat[(row, ui + ia)] += -4.0 * mu / (a * a);
    mat[(row, ps + sa)] -= 1.0;
    mat[(row, pi + ia)] += 1.0;
    for k in 0..n {
        mat[(row, us + k)] += 2.0 * mu_b * d1s[(sa, k)];
        mat[(row, ui + k)] -= 2.0 * mu_b * d1v[(ia, k)];
    }
    rhs[row] = f.f3_nu;
    row += 1;
    assert_eq!(row, nu, "square collocation system");

    let x = mat.lu().solve(&rhs).expect("collocation system solvable");
    (x[ui + ia], x[vi + ia], x[qq])
}

fn toroidal(l: usize, g: &Geom, f: &ModeForcing, m: usize) -> f64 {
    let Geom { a, r_out, mu_b, mu } = *g;
    let ll = (l * (l + 1)) as f64;
    // inner T has parity (−1)^l
    let (ri, d1, d2) = folded(m, a, sgn(l));
    let (xs, ds) = cheb(m - 1);
    let half = 0.5 * (r_out - a);
    let rs: Vec<f64> = xs.iter().map(|x| a + half * (x + 1.0)).collect();
    let d1s = &ds / half;
    let d2s = &d1s * &d1s;

    let n = m;
    let (ti, ts) = (0, n);
    let mut mat = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let mut rhs = DVector::<f64>::zeros(2 * n);
    let mut row = 0;
    let regions = [(&ri, &d1, &d2, ti, &f.inner, vec![0]), (&rs, &d1s, &d2s, ts, &f.outer, vec![0, n - 1])];
    for (r, d1, d2, off, terms, skip) in regions {
        for i in 0..n {
            if skip.contains(&i) {
                continue;
            }
            let x = r[i];
            for k in 0..n {
                mat[(row, off + k)] += mu_b * (d2[(i, k)] + 2.0 / x * d1[(i, k)]);
            }
            mat[(row, off + i)] -= mu_b * ll / (x * x);
            rhs[row] = forcing(terms, x, mu_b)[2];
            row += 1;
        }
    }
    let (ia, sa) = (0, n - 1);
    mat[(row, ts)] = 1.0;
    row += 1;
    mat[(row, ti + ia)] = 1.0;
    mat[(row, ts + sa)] = -1.0;
    row += 1;
    // μ(2−L)T/a² + μ_b[[T' − T/r]]
    mat[(row, ti + ia)] += mu * (2.0 - ll) / (a * a);
    for k in 0..n {
        mat[(row, ts + k)] += mu_b * d1s[(sa, k)];
        mat[(row, ti + k)] -= mu_b * d1[(ia, k)];
    }
    mat[(row, ts + sa)] -= mu_b / a;
    mat[(row, ti + ia)] += mu_b / a;
    rhs[row] = f.f3_phi;
    row += 1;
    assert_eq!(row, 2 * n, "square collocation system");
    let x = mat.lu().solve(&rhs).expect("collocation system solvable");
    x[ti + ia]
}

/// Random S1 data from the library generator, seeded for tests.
pub fn random_data(lmax: usize, seed: u64) -> vesicle_core::stokes::StokesData {
    vesicle_core::verify::fields::random_data(lmax, &mut super::rng(seed))
}

/// The collocation forcing of mode `(l, m)` of `data`.
pub fn mode_forcing(data: &vesicle_core::stokes::StokesData, l: usize, m: i64) -> ModeForcing {
    use vesicle_core::stokes::Region;
    let pick = |region: Region| {
        data.bulk.iter().filter(|b| b.l == l && b.m == m && b.region == region).map(|b| b.mono).collect()
    };
    ModeForcing {
        f3_nu: data.f3_nu.get(l, m),
        f3_psi: data.f3_psi.get(l, m),
        f3_phi: data.f3_phi.get(l, m),
        f4: data.f4.get(l, m),
        inner: pick(Region::Inner),
        outer: pick(Region::Outer),
    }
}
