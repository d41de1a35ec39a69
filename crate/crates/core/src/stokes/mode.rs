//! Interface system for a single harmonic mode.

use nalgebra::{DMatrix, DVector};

use super::lamb::{self, RadialFields};
use crate::error::{Error, Result};

/// Which of the two saddle problems is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum System {
    /// Full surface momentum balance.
    S1,
    /// Tangential balance with prescribed normal velocity.
    S2,
}

/// Geometry and viscosities of a mode problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeom {
    pub a: f64,
    pub r_outer: f64,
    pub mu_b: f64,
    pub mu: f64,
}

/// Surface data of one mode plus the bulk particular solutions.
#[derive(Debug, Clone, Default)]
pub struct ModeData {
    pub f3_nu: f64,
    pub f3_psi: f64,
    pub f3_phi: f64,
    pub f4: f64,
    pub f5: f64,
    pub inner: RadialFields,
    pub outer: RadialFields,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub l: usize,
    pub m: i64,
    pub inner: RadialFields,
    pub outer: RadialFields,
    pub q: f64,
    pub sigma_min: f64,
}

impl ModeSolution {
    pub fn zero(l: usize, m: i64) -> Self {
        Self { l, m, inner: RadialFields::default(), outer: RadialFields::default(), q: 0.0, sigma_min: 1.0 }
    }

    /// Surface normal velocity, spheroidal and toroidal potentials at `r = a`.
    pub fn surface_velocity(&self, a: f64) -> (f64, f64, f64) {
        (self.inner.u.eval(a), self.inner.v.eval(a), self.inner.t.eval(a))
    }
}

/// Values of the interface functionals. The order matches [`targets`].
pub fn interface_rows(
    l: usize,
    sys: System,
    g: &ModeGeom,
    inn: &RadialFields,
    out: &RadialFields,
    q: f64,
) -> Vec<f64> {
    let ModeGeom { a, r_outer, mu_b, mu } = *g;
    let ll = (l * (l + 1)) as f64;
    let (u, v, t) = (inn.u.eval(a), inn.v.eval(a), inn.t.eval(a));
    let ti = inn.traction(a, mu_b);
    let to = out.traction(a, mu_b);
    let mut rows = vec![
        u - out.u.eval(a),
        out.u.eval(r_outer),
        (2.0 * u - ll * v) / a,
        match sys {
            System::S1 => 2.0 * q / a + 2.0 * mu * (ll * v - 2.0 * u) / (a * a) + to[0] - ti[0],
            System::S2 => u,
        },
    ];
    if l > 0 {
        rows.extend([
            v - out.v.eval(a),
            t - out.t.eval(a),
            out.v.eval(r_outer),
            out.t.eval(r_outer),
            -q / a + mu * ((2.0 - 2.0 * ll) * v + 2.0 * u) / (a * a) + to[1] - ti[1],
            mu * (2.0 - ll) * t / (a * a) + to[2] - ti[2],
        ]);
    }
    rows
}

/// Right-hand sides of [`interface_rows`].
pub fn targets(l: usize, sys: System, d: &ModeData) -> Vec<f64> {
    let mut t = vec![
        0.0,
        0.0,
        d.f4,
        match sys {
            System::S1 => d.f3_nu,
            System::S2 => d.f5,
        },
    ];
    if l > 0 {
        t.extend([0.0, 0.0, 0.0, 0.0, d.f3_psi, d.f3_phi]);
    }
    t
}

/// Homogeneous basis: `(region is inner, fields)`. The surface pressure is
/// the last unknown.
fn basis(l: usize, mu_b: f64) -> Vec<(bool, RadialFields)> {
    let mut b: Vec<(bool, RadialFields)> = lamb::poloidal_regular(l, mu_b).into_iter().map(|f| (true, f)).collect();
    b.extend(lamb::poloidal_regular(l, mu_b).into_iter().map(|f| (false, f)));
    b.extend(lamb::poloidal_singular(l, mu_b).into_iter().map(|f| (false, f)));
    if l > 0 {
        b.push((true, lamb::toroidal_regular(l)));
        b.push((false, lamb::toroidal_regular(l)));
        b.push((false, lamb::toroidal_singular(l)));
    }
    b
}

/// Solve one mode. For `l = 0` the pressure constants are pinned (inner
/// constant and `q` for S1, all three for S2); the caller shifts them to the
/// requested gauge afterwards.
pub fn solve_mode(l: usize, m: i64, sys: System, g: &ModeGeom, d: &ModeData) -> Result<ModeSolution> {
    let basis = basis(l, g.mu_b);
    let nb = basis.len();
    let zero = RadialFields::default();
    let mut cols: Vec<Vec<f64>> = basis
        .iter()
        .map(|(inner, f)| {
            if *inner {
                interface_rows(l, sys, g, f, &zero, 0.0)
            } else {
                interface_rows(l, sys, g, &zero, f, 0.0)
            }
        })
        .collect();
    cols.push(interface_rows(l, sys, g, &zero, &zero, 1.0));
    let base = interface_rows(l, sys, g, &d.inner, &d.outer, 0.0);
    let mut rhs: Vec<f64> = targets(l, sys, d).iter().zip(&base).map(|(t, b)| t - b).collect();

    let ncols = nb + 1;
    if l == 0 {
        // unknown order: inner constant, outer constant, point source, q
        let pins: &[usize] = match sys {
            System::S1 => &[0, 3],
            System::S2 => &[0, 1, 3],
        };
        for &k in pins {
            for (j, c) in cols.iter_mut().enumerate() {
                c.push(if j == k { 1.0 } else { 0.0 });
            }
            rhs.push(0.0);
        }
    }
    let nrows = rhs.len();
    let mut mat = DMatrix::from_fn(nrows, ncols, |i, j| cols[j][i]);

    // equilibrate rows and columns before the factorization
    let mut rhs_v = DVector::from_vec(rhs);
    for i in 0..nrows {
        let s = mat.row(i).amax();
        if s > 0.0 {
            mat.row_mut(i).scale_mut(1.0 / s);
            rhs_v[i] /= s;
        }
    }
    let mut col_scale = vec![1.0; ncols];
    for j in 0..ncols {
        let s = mat.column(j).amax();
        if s > 0.0 {
            mat.column_mut(j).scale_mut(1.0 / s);
            col_scale[j] = s;
        }
    }
    let svd = mat.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::SolverDegenerate { l, m, sigma_min: smin });
    }
    let x = svd.solve(&rhs_v, 0.0).map_err(|e| Error::Shape(e.to_string()))?;

    let mut inner = d.inner.clone();
    let mut outer = d.outer.clone();
    for (j, (is_inner, f)) in basis.iter().enumerate() {
        let c = x[j] / col_scale[j];
        if *is_inner {
            inner = inner.add(&f.scale(c));
        } else {
            outer = outer.add(&f.scale(c));
        }
    }
    let q = x[nb] / col_scale[nb];
    Ok(ModeSolution { l, m, inner, outer, q, sigma_min: smin / smax })
}
