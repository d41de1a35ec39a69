//! Synthetic fields and data used by the identity checks.
//!
//! Mode amplitudes decay geometrically with ratio 0.5 so that nonlinear
//! products stay resolved on the working grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::sphharm::{ShCoeffs, SphGrid};
use crate::stokes::{BulkTerm, ModeSolution, Monomial, RadialFields, RadialSeries, Region, StokesData};
use crate::surface::{DomainSpec, SurfaceShape};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Band-limited coefficients on degrees `lmin..=lmax`, scaled so that the
/// largest nodal value is `amp`.
pub fn random_coeffs(lmax: usize, lmin: usize, amp: f64, rng: &mut ChaCha8Rng) -> Result<ShCoeffs> {
    let c = ShCoeffs::random_decaying(lmax, 1.0, 0.5, lmin, rng);
    let grid = SphGrid::build(2 * lmax)?;
    let peak = grid.synthesize(&c)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(c.scale(amp / peak))
}

/// A radial graph with `max |h| = amp · a` and no mean offset.
pub fn random_shape(domain: DomainSpec, lmax: usize, amp: f64, rng: &mut ChaCha8Rng) -> Result<SurfaceShape> {
    SurfaceShape::new(domain, random_coeffs(lmax, 1, amp * domain.a, rng)?)
}

/// Smooth random S1 data on modes `1 ≤ l ≤ lmax`: surface data plus inner
/// and shell monomials with non-resonant exponents. Inner exponents keep
/// the forcing a polynomial vector field.
pub fn random_data(lmax: usize, rng: &mut ChaCha8Rng) -> StokesData {
    let mut d = StokesData::zeros(lmax);
    for l in 1..=lmax {
        let amp = 0.5f64.powi(l as i32 - 1);
        let li = l as i32;
        for m in -(l as i64)..=l as i64 {
            let mut c = || amp * rng.gen_range(-1.0..1.0);
            d.f3_nu.set(l, m, c());
            d.f3_psi.set(l, m, c());
            d.f3_phi.set(l, m, c());
            d.f4.set(l, m, c());
            let terms = [
                (Region::Inner, Monomial { p: li + 1, c_r: c(), c_psi: c(), ..Default::default() }),
                (Region::Inner, Monomial { p: li, c_phi: c(), ..Default::default() }),
                (Region::Inner, Monomial { p: li + 2, c_div: c(), ..Default::default() }),
                (Region::Outer, Monomial { p: li + 2, c_r: c(), c_psi: c(), c_phi: c(), c_div: c() }),
                (Region::Outer, Monomial { p: -li - 5, c_r: c(), c_psi: c(), ..Default::default() }),
            ];
            d.bulk.extend(terms.into_iter().map(|(region, mono)| BulkTerm { region, l, m, mono }));
        }
    }
    d
}

fn poly(coeffs: &[(i32, f64)]) -> RadialSeries {
    let mut s = RadialSeries::zero();
    for (n, c) in coeffs {
        s.push(*n, *c);
    }
    s
}

/// `(r − x)`.
fn lin(x: f64) -> RadialSeries {
    poly(&[(1, 1.0), (0, -x)])
}

/// `V` that makes `U Y ω̂ + V ∇₁Y` divergence free.
fn companion(l: usize, u: &RadialSeries) -> RadialSeries {
    let ll = (l * (l + 1)) as f64;
    u.deriv().shift(1).add(&u.scale(2.0)).scale(1.0 / ll)
}

/// A random admissible field of degree `l ≥ 1`: divergence free, zero on
/// the outer wall, continuous across `r = a` with zero surface divergence.
///
/// Inside, `U = r^{l−1} p(r²)` with `U'(a) = 0`; the shell carries the value
/// across with a Hermite cubic and adds a bubble `(r−a)²(R−r)² c`. `T` is
/// regular inside, continued linearly to zero at the wall, plus a bubble.
pub fn admissible_mode(l: usize, m: i64, a: f64, r_out: f64, rng: &mut ChaCha8Rng) -> ModeSolution {
    let li = l as i32;
    let mut c = || rng.gen_range(-1.0..1.0);
    let (c0, c1) = (c(), c());
    let n = (li - 1) as f64;
    // U'(a) = a^{l−2}[c0 n + c1 (n+2) a² + c2 (n+4) a⁴]
    let c2 = -(c0 * n + c1 * (n + 2.0) * a * a) / ((n + 4.0) * a.powi(4));
    let u_in = poly(&[(li - 1, c0), (li + 1, c1), (li + 3, c2)]);
    let ua = u_in.eval(a);
    let h = r_out - a;
    let s = lin(a).scale(1.0 / h);
    let hermite = poly(&[(0, 1.0)]).sub(&s.mul(&s).scale(3.0)).add(&s.mul(&s).mul(&s).scale(2.0));
    let wall = lin(r_out).scale(-1.0);
    let bubble = lin(a).mul(&lin(a)).mul(&wall).mul(&wall);
    let u_out = hermite.scale(ua).add(&bubble.mul(&poly(&[(0, c()), (1, c() / r_out)])));

    let t_in = poly(&[(li, c()), (li + 2, c())]);
    let ta = t_in.eval(a);
    let t_out = wall.scale(ta / h).add(&lin(a).mul(&wall).scale(c()));

    let field = |u: RadialSeries, t: RadialSeries| RadialFields { v: companion(l, &u), u, t, p: RadialSeries::zero() };
    ModeSolution { l, m, inner: field(u_in, t_in), outer: field(u_out, t_out), q: 0.0, sigma_min: 1.0 }
}

/// Admissible fields on all modes up to `lmax`; degree 0 is identically zero.
pub fn admissible(lmax: usize, a: f64, r_out: f64, rng: &mut ChaCha8Rng) -> Vec<ModeSolution> {
    let mut out = Vec::new();
    for l in 0..=lmax {
        for m in -(l as i64)..=l as i64 {
            out.push(if l == 0 { ModeSolution::zero(0, 0) } else { admissible_mode(l, m, a, r_out, rng) });
        }
    }
    out
}

/// `∫_{S_r} |∇u|² dΩ` of one mode as a series in `r`.
pub fn grad_sq(l: usize, f: &RadialFields) -> RadialSeries {
    let ll = (l * (l + 1)) as f64;
    let (u, v, t) = (&f.u, &f.v, &f.t);
    let d = |x: &RadialSeries| x.deriv().mul(&x.deriv());
    let umv = u.sub(v);
    let ang = umv.mul(&umv).scale(ll).add(&t.mul(t).scale(ll));
    let curv = u
        .mul(u)
        .scale(2.0)
        .sub(&u.mul(v).scale(2.0 * ll))
        .add(&v.mul(v).scale(ll * ll - ll))
        .add(&t.mul(t).scale(ll * ll - ll));
    d(u).add(&d(v).scale(ll)).add(&d(t).scale(ll)).add(&ang.add(&curv).shift(-2))
}

/// `∫_Γ f·φ dA` of one mode from the surface potentials of both.
pub fn surface_work(l: usize, a: f64, f: [f64; 3], phi: (f64, f64, f64)) -> f64 {
    let ll = (l * (l + 1)) as f64;
    a * a * (f[0] * phi.0 + ll * f[1] * phi.1 + ll * f[2] * phi.2)
}

/// `∫_Ω f1·φ dx` restricted to the mode of `phi`.
pub fn bulk_work(data: &StokesData, phi: &ModeSolution, d: &DomainSpec) -> f64 {
    let ll = (phi.l * (phi.l + 1)) as f64;
    let mut total = 0.0;
    for b in data.bulk.iter().filter(|b| b.l == phi.l && b.m == phi.m) {
        let (f, r0, r1) = match b.region {
            Region::Inner => (&phi.inner, 0.0, d.a),
            Region::Outer => (&phi.outer, d.a, d.r_outer),
        };
        let t = b.mono;
        let integrand = f.u.scale(t.c_r).add(&f.v.scale(ll * t.c_psi)).add(&f.t.scale(ll * t.c_phi));
        total += integrand.shift(t.p + 2).integrate(r0, r1);
    }
    total
}
