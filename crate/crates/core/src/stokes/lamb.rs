//! Radial solutions of the bulk Stokes equations for one harmonic degree.
//!
//! A bulk field of degree `l` is written
//! `u = U(r) Y ω̂ + V(r) ∇₁Y + T(r) ω̂×∇₁Y`, `π = P(r) Y`, with `∇₁` the
//! gradient on the unit sphere and `L = l(l+1)`. In these variables
//!
//! ```text
//! div u        = U' + 2U/r − L V/r
//! (Δu)_r       = U'' + 2U'/r − (L+2) U/r² + 2L V/r²
//! (Δu)_Ψ       = V'' + 2V'/r − L V/r² + 2U/r²
//! (Δu)_Φ       = T'' + 2T'/r − L T/r²
//! (grad π)_r   = P',   (grad π)_Ψ = P/r
//! ```

use super::radial::RadialSeries;
use crate::error::{Error, Result};

/// Radial profiles of one bulk mode in one region.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RadialFields {
    pub u: RadialSeries,
    pub v: RadialSeries,
    pub t: RadialSeries,
    pub p: RadialSeries,
}

impl RadialFields {
    pub fn add(&self, o: &Self) -> Self {
        Self { u: self.u.add(&o.u), v: self.v.add(&o.v), t: self.t.add(&o.t), p: self.p.add(&o.p) }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { u: self.u.scale(s), v: self.v.scale(s), t: self.t.scale(s), p: self.p.scale(s) }
    }

    /// Change of units `r = λ r̃`, velocity scale `su`, pressure scale `sp`.
    pub fn rescaled(&self, lambda: f64, su: f64, sp: f64) -> Self {
        Self {
            u: self.u.rescaled(lambda, su),
            v: self.v.rescaled(lambda, su),
            t: self.t.rescaled(lambda, su),
            p: self.p.rescaled(lambda, sp),
        }
    }

    pub fn div(&self, l: usize) -> RadialSeries {
        let ll = (l * (l + 1)) as f64;
        self.u.deriv().add(&self.u.shift(-1).scale(2.0)).sub(&self.v.shift(-1).scale(ll))
    }

    /// Components `(r, Ψ, Φ)` of `μ_b Δu − grad π`.
    pub fn stokes_operator(&self, l: usize, mu_b: f64) -> [RadialSeries; 3] {
        let ll = (l * (l + 1)) as f64;
        let lap = |f: &RadialSeries| f.deriv().deriv().add(&f.deriv().shift(-1).scale(2.0));
        let r = lap(&self.u)
            .sub(&self.u.shift(-2).scale(ll + 2.0))
            .add(&self.v.shift(-2).scale(2.0 * ll))
            .scale(mu_b)
            .sub(&self.p.deriv());
        let psi = lap(&self.v)
            .sub(&self.v.shift(-2).scale(ll))
            .add(&self.u.shift(-2).scale(2.0))
            .scale(mu_b)
            .sub(&self.p.shift(-1));
        let phi = lap(&self.t).sub(&self.t.shift(-2).scale(ll)).scale(mu_b);
        [r, psi, phi]
    }

    /// Traction `S ω̂` on a sphere of radius `r`: `(normal, Ψ, Φ)` coefficients.
    pub fn traction(&self, r: f64, mu_b: f64) -> [f64; 3] {
        let (u, v, t) = (self.u.eval(r), self.v.eval(r), self.t.eval(r));
        let du = self.u.deriv().eval(r);
        let dv = self.v.deriv().eval(r);
        let dt = self.t.deriv().eval(r);
        [
            -self.p.eval(r) + 2.0 * mu_b * du,
            mu_b * (dv - v / r + u / r),
            mu_b * (dt - t / r),
        ]
    }
}

fn poloidal(u: RadialSeries, v: RadialSeries, p: RadialSeries) -> RadialFields {
    RadialFields { u, v, p, t: RadialSeries::zero() }
}

/// Pressure-driven solution with `P = rⁿ`, `n ∈ {l, −l−1}`.
fn pressure_solution(n: i32, mu_b: f64) -> RadialFields {
    let nf = n as f64;
    let d = 2.0 * mu_b * (2.0 * nf + 3.0);
    poloidal(
        RadialSeries::monomial(n + 1, nf / d),
        RadialSeries::monomial(n + 1, (nf + 3.0) / (d * (nf + 1.0))),
        RadialSeries::monomial(n, 1.0),
    )
}

/// Potential flow `u = grad(rⁿ Y)`: `U = n rⁿ⁻¹`, `V = rⁿ⁻¹`.
fn potential_solution(n: i32) -> RadialFields {
    poloidal(
        RadialSeries::monomial(n - 1, n as f64),
        RadialSeries::monomial(n - 1, 1.0),
        RadialSeries::zero(),
    )
}

/// Homogeneous poloidal solutions regular at the origin.
pub fn poloidal_regular(l: usize, mu_b: f64) -> Vec<RadialFields> {
    let n = l as i32;
    if l == 0 {
        // a constant pressure; no regular velocity
        return vec![poloidal(RadialSeries::zero(), RadialSeries::zero(), RadialSeries::monomial(0, 1.0))];
    }
    vec![pressure_solution(n, mu_b), potential_solution(n)]
}

/// Homogeneous poloidal solutions singular at the origin.
pub fn poloidal_singular(l: usize, mu_b: f64) -> Vec<RadialFields> {
    let n = l as i32;
    if l == 0 {
        // the point source U = r⁻²
        return vec![potential_solution(-1).scale(-1.0)];
    }
    vec![pressure_solution(-n - 1, mu_b), potential_solution(-n - 1)]
}

pub fn toroidal_regular(l: usize) -> RadialFields {
    RadialFields { t: RadialSeries::monomial(l as i32, 1.0), ..Default::default() }
}

pub fn toroidal_singular(l: usize) -> RadialFields {
    RadialFields { t: RadialSeries::monomial(-(l as i32) - 1, 1.0), ..Default::default() }
}

/// Monomial bulk forcing `f1 = rᵖ (c_r Y ω̂ + c_Ψ ∇₁Y + c_Φ ω̂×∇₁Y)` and
/// `f2 = c_div rᵖ Y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Monomial {
    pub p: i32,
    pub c_r: f64,
    pub c_psi: f64,
    pub c_phi: f64,
    pub c_div: f64,
}

/// Particular solution of `div S = f1`, `div u = f2` with
/// `S = −π I + 2μ_b Du`, i.e. `μ_b Δu − grad π = f1 − μ_b grad f2`.
///
/// The ansatz `U = α rˢ, V = β rˢ, P = γ rˢ⁻¹, T = τ rˢ` turns each equation
/// into a small linear system. Exponents that coincide with a homogeneous
/// solution would need logarithms and are rejected.
pub fn particular(l: usize, f: &Monomial, mu_b: f64) -> Result<RadialFields> {
    let mut out = RadialFields::default();
    // f1 part: s = p + 2
    if f.c_r != 0.0 || f.c_psi != 0.0 {
        out = out.add(&poloidal_particular(l, f.p, f.p + 2, [f.c_r, f.c_psi, 0.0], mu_b)?);
    }
    if f.c_phi != 0.0 && l > 0 {
        let s = (f.p + 2) as f64;
        let den = s * s + s - (l * (l + 1)) as f64;
        if den == 0.0 {
            return Err(Error::ResonantForcing(f.p));
        }
        out.t.push(f.p + 2, f.c_phi / (mu_b * den));
    }
    // f2 part: s = p + 1 with the momentum source −μ_b grad f2
    if f.c_div != 0.0 {
        let rhs = [-mu_b * f.c_div * f.p as f64, -mu_b * f.c_div, f.c_div];
        out = out.add(&poloidal_particular(l, f.p, f.p + 1, rhs, mu_b)?);
    }
    Ok(out)
}

/// Solve for `(α, β, γ)` with radial, Ψ and divergence right-hand sides.
fn poloidal_particular(l: usize, p: i32, s: i32, rhs: [f64; 3], mu_b: f64) -> Result<RadialFields> {
    let sf = s as f64;
    let ll = (l * (l + 1)) as f64;
    let resonant = || Error::ResonantForcing(p);
    let (alpha, beta, gamma) = if l == 0 {
        // radial:  μ_b α (s²+s−2) − γ (s−1) = c_r ;  div: α (s+2) = c_div
        if sf == -2.0 || sf == 1.0 {
            return Err(resonant());
        }
        let alpha = rhs[2] / (sf + 2.0);
        let gamma = (mu_b * alpha * (sf * sf + sf - 2.0) - rhs[0]) / (sf - 1.0);
        (alpha, 0.0, gamma)
    } else {
        let m = nalgebra::Matrix3::new(
            mu_b * (sf * sf + sf - 2.0 - ll),
            2.0 * ll * mu_b,
            -(sf - 1.0),
            2.0 * mu_b,
            mu_b * (sf * sf + sf - ll),
            -1.0,
            sf + 2.0,
            -ll,
            0.0,
        );
        let scale = m.abs().max();
        if m.determinant().abs() <= 1e-12 * scale.powi(3) {
            return Err(resonant());
        }
        let x = m.lu().solve(&nalgebra::Vector3::from(rhs)).ok_or_else(resonant)?;
        (x[0], x[1], x[2])
    };
    Ok(poloidal(
        RadialSeries::monomial(s, alpha),
        RadialSeries::monomial(s, beta),
        RadialSeries::monomial(s - 1, gamma),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_stokes(f: &RadialFields, l: usize, forcing: &Monomial) {
        let op = f.stokes_operator(l, 1.3);
        let d = f.div(l);
        // degree 0 has no tangential components
        let comps = if l == 0 { 1 } else { 3 };
        for r in [0.5f64, 1.0, 2.7] {
            let p = forcing.p;
            let f2 = forcing.c_div * r.powi(p);
            let src = [
                forcing.c_r * r.powi(p) - 1.3 * forcing.c_div * p as f64 * r.powi(p - 1),
                forcing.c_psi * r.powi(p) - 1.3 * forcing.c_div * r.powi(p - 1),
                forcing.c_phi * r.powi(p),
            ];
            for c in 0..comps {
                let got = op[c].eval(r);
                assert!((got - src[c]).abs() < 1e-11 * (1.0 + src[c].abs()), "l={l} c={c} {got} {}", src[c]);
            }
            assert!((d.eval(r) - f2).abs() < 1e-11 * (1.0 + f2.abs()));
        }
    }

    /// Exponents of the homogeneous solutions, written out independently.
    fn resonant(l: usize, f: &Monomial) -> bool {
        let li = l as i32;
        let pol: Vec<i32> = if l == 0 { vec![1, -2] } else { vec![li + 1, -li, li - 1, -li - 2] };
        let tor = [li, -li - 1];
        let s1 = f.p + 2;
        pol.contains(&s1) || pol.contains(&(f.p + 1)) || (l > 0 && tor.contains(&s1))
    }

    #[test]
    fn homogeneous_solutions_solve_stokes() {
        let zero = Monomial::default();
        for l in 0..8 {
            for f in poloidal_regular(l, 1.3).iter().chain(&poloidal_singular(l, 1.3)) {
                assert_stokes(f, l, &zero);
            }
            if l > 0 {
                assert_stokes(&toroidal_regular(l), l, &zero);
                assert_stokes(&toroidal_singular(l), l, &zero);
            }
        }
    }

    #[test]
    fn particular_solutions_solve_forced_stokes() {
        for l in 0..6 {
            for p in 0..6 {
                let f = Monomial { p, c_r: 0.7, c_psi: if l > 0 { -0.4 } else { 0.0 }, c_phi: 0.9, c_div: 0.3 };
                if resonant(l, &f) {
                    assert!(matches!(particular(l, &f, 1.3), Err(Error::ResonantForcing(_))), "l={l} p={p}");
                    continue;
                }
                let sol = particular(l, &f, 1.3).unwrap();
                let f = if l == 0 { Monomial { c_phi: 0.0, ..f } } else { f };
                assert_stokes(&sol, l, &f);
            }
        }
    }

    #[test]
    fn resonant_exponent_is_rejected() {
        // s = p + 2 = l + 1 coincides with the regular pressure solution
        let f = Monomial { p: 1, c_r: 1.0, ..Default::default() };
        assert!(matches!(particular(2, &f, 1.0), Err(Error::ResonantForcing(_))));
    }
}
