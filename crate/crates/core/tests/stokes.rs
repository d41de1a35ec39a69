mod common;

use std::f64::consts::PI;

use common::collocation;
use common::*;
use fields::{bulk_work, surface_work};
use vesicle_core::error::Error;
use vesicle_core::sphharm::ShCoeffs;
use vesicle_core::stokes::*;
use vesicle_core::surface::{DomainSpec, MaterialParams};

fn params() -> MaterialParams {
    MaterialParams::default()
}

#[test]
fn mobility_matches_collocation() {
    let p = params();
    // collocation round-off grows with the node count; the thin shell is
    // resolved with fewer nodes
    for (a, r_out, nodes) in [(1.0, 4.0, 64), (0.7, 1.5, 32)] {
        let d = DomainSpec::new(a, r_out).unwrap();
        for l in [1usize, 2, 3, 5] {
            let col = collocation::unit_normal_force(l, a, r_out, p.mu_b, p.mu, nodes);
            let sol = solve_s1(&StokesData::normal_force(&ShCoeffs::delta(l, l, 0, 1.0)), &p, &d).unwrap();
            let s = sol.mode(l, 0);
            let (w, v, _) = s.surface_velocity(a);
            assert!(rel(w, col.w) < 1e-8, "l={l} a={a}: {w} vs {}", col.w);
            assert!(rel(v, col.v_surf) < 1e-8, "l={l}: {v} vs {}", col.v_surf);
            assert!(rel(s.q, col.q) < 1e-7, "l={l}: {} vs {}", s.q, col.q);
            assert!(rel(-w, mobility(l, &p, &d).unwrap()) < 1e-12);
        }
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    for sys in [System::S1, System::S2] {
        let d = StokesData::zeros(4);
        let sol = match sys {
            System::S1 => solve_s1(&d, &params(), &domain()),
            System::S2 => solve_s2(&d, &params(), &domain()),
        }
        .unwrap();
        for s in &sol.modes {
            for f in [&s.inner, &s.outer] {
                assert!(f.u.is_zero() && f.v.is_zero() && f.t.is_zero() && f.p.is_zero());
            }
            assert_eq!(s.q, 0.0);
        }
        assert_eq!(dissipation(&sol), 0.0);
    }
}

/// Uniform normal force on the sphere, solved by hand: with `u = 0` the
/// normal balance is `2q/a + π_in − π_out = c̄`, the volume gauge gives
/// `π_in V1 + π_out V0 = 0`, and `∫(q/a)/H dA = −∫_{Ω¹}π` gives `q = 2aπ_in/3`.
#[test]
fn uniform_normal_force_is_balanced_by_pressures() {
    for (a, r_out) in [(1.0, 4.0), (2.0, 3.0)] {
        let d = DomainSpec::new(a, r_out).unwrap();
        let c = 0.8;
        let cbar = c / (4.0 * PI).sqrt();
        let v1 = a.powi(3);
        let v0 = r_out.powi(3) - a.powi(3);
        let pi_in = cbar / (7.0 / 3.0 + v1 / v0);
        let pi_out = -pi_in * v1 / v0;
        let q = 2.0 * a * pi_in / 3.0;

        let sol = solve_s1(&StokesData::normal_force(&ShCoeffs::delta(3, 0, 0, c)), &params(), &d).unwrap();
        assert!(sol.w().max_abs() < 1e-14 && sol.v_psi().max_abs() < 1e-14);
        assert!((sol.pressure_constant(Region::Inner, 0.3 * a) - pi_in).abs() < 1e-12);
        assert!((sol.pressure_constant(Region::Outer, 1.5 * a) - pi_out).abs() < 1e-12);
        assert!((sol.q().get(0, 0) / (4.0 * PI).sqrt() - q).abs() < 1e-12);
        assert!(sol.gauge_defects().iter().all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn compatibility_examples() {
    let (d, p) = (domain(), params());
    let zero = check_compat(&StokesData::zeros(3), System::S1, &d, &p);
    assert!(zero.passed && zero.comp1_defect == Some(0.0) && zero.comp2_defect == 0.0);

    // f4 ≡ c on the sphere: ∫ c/H dA = −2πa³c
    let c = 0.3;
    let mut data = StokesData::zeros(3);
    data.f4 = ShCoeffs::constant(3, c);
    let r = check_compat(&data, System::S1, &d, &p);
    assert!(!r.passed);
    assert!((r.comp1_defect.unwrap() + 2.0 * PI * c).abs() < 1e-14);
    assert!(matches!(solve_s1(&data, &p, &d), Err(Error::Compatibility(_))));

    // f5 = Y20 and f4 = −f5 H cancel both integrals
    let mut data = StokesData::zeros(3);
    data.f5 = ShCoeffs::delta(3, 2, 0, 1.0);
    data.f4 = data.f5.scale(2.0 / d.a);
    let r = check_compat(&data, System::S2, &d, &p);
    assert!(r.passed, "{r:?}");
    assert_eq!(r.comp3_defect, Some([0.0, 0.0]));

    // a point source in the shell violates the total volume balance
    let mut data = StokesData::zeros(2);
    data.bulk.push(BulkTerm { region: Region::Outer, l: 0, m: 0, mono: Monomial { p: 0, c_div: 1.0, ..Default::default() } });
    let r = check_compat(&data, System::S1, &d, &p);
    let expected = (4.0 * PI).sqrt() * (64.0 - 1.0) / 3.0;
    assert!((r.comp2_defect - expected).abs() < 1e-12 && !r.passed);
}

/// Largest deviation of each surface output over all modes, relative to the
/// largest magnitude of that output.
fn collocation_defects(sol: &StokesSolution, data: &StokesData, g: &collocation::Geom, nodes: usize) -> [f64; 4] {
    let mut err = [0.0f64; 4];
    let mut mag = [0.0f64; 4];
    for l in 1..=data.lmax {
        for m in -(l as i64)..=l as i64 {
            let c = collocation::solve_mode(l, g, &collocation::mode_forcing(data, l, m), nodes);
            let s = sol.mode(l, m);
            let (w, v, t) = s.surface_velocity(g.a);
            for (k, (x, y)) in [(w, c.w), (v, c.v_surf), (t, c.t_surf), (s.q, c.q)].into_iter().enumerate() {
                err[k] = err[k].max((x - y).abs());
                mag[k] = mag[k].max(y.abs());
            }
        }
    }
    [0, 1, 2, 3].map(|k| err[k] / mag[k])
}

#[test]
fn random_data_matches_collocation_and_has_small_residuals() {
    let p = MaterialParams { mu_b: 1.3, mu: 0.02, ..params() };
    let d = DomainSpec::new(0.8, 2.4).unwrap();
    let g = collocation::Geom { a: d.a, r_out: d.r_outer, mu_b: p.mu_b, mu: p.mu };
    for seed in 0..3 {
        let data = collocation::random_data(4, seed);
        let sol = solve_s1(&data, &p, &d).unwrap();
        let res = residuals(&sol, &data).unwrap();
        assert!(res.max() < 1e-10, "{res:?}");
        let defects = collocation_defects(&sol, &data, &g, 40);
        assert!(defects.iter().all(|e| *e < 1e-8), "seed {seed}: {defects:?}");
    }
}

#[test]
fn gauge_shift_keeps_strong_form_and_projects_back() {
    let (d, p) = (domain(), params());
    let h = -2.0 / d.a;
    let data = collocation::random_data(3, 7);
    let sol = solve_s1(&data, &p, &d).unwrap();
    let mut shifted = sol.clone();
    // element of the gauge space: κ_in − κ_out = κ_q H
    let (k_out, k_q) = (0.37, -1.1);
    shifted.shift_pressures(k_out + h * k_q, k_out, k_q);
    assert!(residuals(&shifted, &data).unwrap().max() < 1e-10);
    assert!(shifted.gauge_defects().iter().any(|x| x.abs() > 1e-3));
    shifted.project_gauge();
    // the shift is O(1); the projection must undo it to round-off
    let close = |x: f64, y: f64| (x - y).abs() < 1e-12 * (1.0 + y.abs());
    assert!(close(shifted.pressure_constant(Region::Inner, 0.5), sol.pressure_constant(Region::Inner, 0.5)));
    assert!(close(shifted.pressure_constant(Region::Outer, 2.0), sol.pressure_constant(Region::Outer, 2.0)));
    assert!(close(shifted.q().get(0, 0), sol.q().get(0, 0)));

    let mut data2 = StokesData::zeros(3);
    data2.f5 = ShCoeffs::delta(3, 2, 1, 0.4);
    data2.f4 = ShCoeffs::delta(3, 3, -2, 0.2);
    let sol2 = solve_s2(&data2, &p, &d).unwrap();
    assert!(sol2.gauge_defects().iter().all(|x| x.abs() < 1e-13));
    let mut shifted = sol2.clone();
    // for S2 all three constants are free
    shifted.shift_pressures(0.3, -0.2, 0.9);
    assert!(residuals(&shifted, &data2).unwrap().max() < 1e-10);
    shifted.project_gauge();
    let (x, y) = (shifted.pressure_integrals(), sol2.pressure_integrals());
    assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12 && (x.2 - y.2).abs() < 1e-12);
}

#[test]
fn solution_traces_match_and_wall_is_no_slip() {
    let data = collocation::random_data(3, 11);
    let sol = solve_s1(&data, &params(), &domain()).unwrap();
    let (jump, wall) = sol.trace_defects();
    assert!(jump < 1e-10 && wall < 1e-10, "{jump} {wall}");
}

#[test]
fn resonant_forcing_is_reported() {
    let mut data = StokesData::zeros(2);
    // r^{l−1} in the radial direction alone has no power-law particular solution
    data.bulk.push(BulkTerm { region: Region::Inner, l: 2, m: 0, mono: Monomial { p: 1, c_r: 1.0, ..Default::default() } });
    assert!(matches!(solve_s1(&data, &params(), &domain()), Err(Error::ResonantForcing(1))));
}

#[test]
fn ntd_is_diagonal_linear_and_symmetric() {
    let (d, p) = (domain(), params());
    assert!(ntd_apply(&ShCoeffs::delta(4, 0, 0, 1.0), &p, &d).unwrap().max_abs() < 1e-14);

    let psi1 = random_field(6, 0, 1.0, 3);
    let psi2 = random_field(6, 0, 1.0, 4);
    let w1 = ntd_apply(&psi1, &p, &d).unwrap();
    let w2 = ntd_apply(&psi2, &p, &d).unwrap();
    let m: Vec<f64> = (0..=6).map(|l| mobility(l, &p, &d).unwrap()).collect();
    for (l, mm, c) in psi1.iter() {
        assert!((w1.get(l, mm) + m[l] * c).abs() < 1e-12 * m[1], "l={l} m={mm}");
    }
    assert!(m[1..].iter().all(|x| *x > 0.0));
    let (s12, s21) = (psi1.dot(&w2), psi2.dot(&w1));
    assert!((s12 - s21).abs() <= 1e-10 * s12.abs().max(s21.abs()));
    let w3 = ntd_apply(&psi1.scale(-2.5), &p, &d).unwrap();
    assert!(w3.add(&w1.scale(2.5)).max_abs() <= 1e-12 * w1.max_abs());
}

#[test]
fn metric_is_orthogonal_bilinear_and_matches_dissipation() {
    let (d, p) = (domain(), params());
    let y = |l, m| ShCoeffs::delta(4, l, m, 1.0);
    let g22 = metric_v(&y(2, 0), &y(2, 0), &p, &d).unwrap();
    let single = dissipation(&velocity_extension(&y(2, 0), &p, &d).unwrap());
    assert!(g22 > 0.0 && rel(g22, single) < 1e-12);
    assert!(metric_v(&y(2, 0), &y(3, 1), &p, &d).unwrap().abs() < 1e-14 * g22);
    assert!(metric_v(&y(2, 0), &y(2, 1), &p, &d).unwrap().abs() < 1e-14 * g22);

    let w1 = random_field(4, 1, 1.0, 5);
    let w2 = random_field(4, 1, 1.0, 6);
    let g = metric_v(&w1, &w2, &p, &d).unwrap();
    assert!(rel(metric_v(&w1.scale(2.0), &w2, &p, &d).unwrap(), 2.0 * g) < 1e-12);
    assert!(rel(metric_v(&w2, &w1, &p, &d).unwrap(), g) < 1e-12);
    assert!(matches!(metric_v(&y(0, 0), &y(2, 0), &p, &d), Err(Error::NotInTangentSpace(_))));
}

/// `B(u, u)` assembled from the data side: pressure work against the
/// prescribed divergences minus the work of all forces on `u`. The normal
/// surface force of S2 is the reaction read off the solution.
fn weak_energy(sol: &StokesSolution, data: &StokesData) -> f64 {
    let d = sol.domain;
    let g = ModeGeom { a: d.a, r_outer: d.r_outer, mu_b: sol.mu_b, mu: sol.mu };
    let mut total = 0.0;
    for s in &sol.modes {
        let rows = interface_rows(s.l, System::S1, &g, &s.inner, &s.outer, s.q);
        let f = if s.l == 0 { [rows[3], 0.0, 0.0] } else { [rows[3], rows[8], rows[9]] };
        total += d.a * d.a * s.q * data.f4.get(s.l, s.m);
        total -= surface_work(s.l, d.a, f, s.surface_velocity(d.a));
        total -= bulk_work(data, s, &d);
    }
    // pressure work against f2 in the bulk
    for b in data.bulk.iter().filter(|b| b.mono.c_div != 0.0) {
        let s = sol.mode(b.l, b.m);
        let (p, r0, r1) = match b.region {
            Region::Inner => (&s.inner.p, 0.0, d.a),
            Region::Outer => (&s.outer.p, d.a, d.r_outer),
        };
        total += p.scale(b.mono.c_div).shift(b.mono.p + 2).integrate(r0, r1);
    }
    total
}

#[test]
fn prescribed_normal_velocity_solutions() {
    let (d, p) = (domain(), params());
    let f5 = ShCoeffs::delta(3, 2, 0, 1.0);
    let mut data = StokesData::normal_velocity(&f5);
    data.f4 = f5.scale(2.0 / d.a);
    let sol = solve_s2(&data, &p, &d).unwrap();
    assert!(residuals(&sol, &data).unwrap().max() < 1e-10);
    assert!((sol.w().get(2, 0) - 1.0).abs() < 1e-12);
    let diss = dissipation(&sol);
    assert!(diss > 0.0);
    assert!(rel(weak_energy(&sol, &data), diss) < 1e-9);

    let data = StokesData::normal_velocity(&f5);
    let sol = solve_s2(&data, &p, &d).unwrap();
    let diss = dissipation(&sol);
    assert!(rel(metric_v(&f5, &f5, &p, &d).unwrap(), diss) < 1e-9);
    assert!(rel(weak_energy(&sol, &data), diss) < 1e-9);
}

#[test]
fn energy_identity_for_general_data() {
    let data = collocation::random_data(3, 21);
    let sol = solve_s1(&data, &params(), &domain()).unwrap();
    let diss = dissipation(&sol);
    assert!(diss > 0.0 && rel(weak_energy(&sol, &data), diss) < 1e-9);
}

#[test]
fn weak_form_holds_for_admissible_test_fields() {
    let (d, p) = (domain(), params());
    let data = collocation::random_data(4, 31);
    let sol = solve_s1(&data, &p, &d).unwrap();
    let mut r = rng(99);
    for _ in 0..20 {
        let phi = fields::admissible(4, d.a, d.r_outer, &mut r);
        let mut b = 0.0;
        let mut f = 0.0;
        let mut scale = 0.0f64;
        for (u, v) in sol.modes.iter().zip(&phi) {
            let bm = mode_dissipation_pair(&d, p.mu_b, p.mu, u, v);
            let (l, m) = (v.l, v.m);
            let f3 = [data.f3_nu.get(l, m), data.f3_psi.get(l, m), data.f3_phi.get(l, m)];
            let fm = -surface_work(l, d.a, f3, v.surface_velocity(d.a)) - bulk_work(&data, v, &d);
            b += bm;
            f += fm;
            scale = scale.max(bm.abs()).max(fm.abs());
        }
        assert!((b - f).abs() <= 1e-9 * scale, "{b} vs {f}");
    }
}

#[test]
fn strain_and_gradient_norms_agree_for_solenoidal_fields() {
    let d = domain();
    let mut r = rng(5);
    for _ in 0..10 {
        let phi = fields::admissible(5, d.a, d.r_outer, &mut r);
        let strain: f64 = phi.iter().map(|x| mode_dissipation_pair(&d, 1.0, 0.0, x, x)).sum();
        let grad: f64 = phi
            .iter()
            .map(|x| {
                fields::grad_sq(x.l, &x.inner).shift(2).integrate(0.0, d.a)
                    + fields::grad_sq(x.l, &x.outer).shift(2).integrate(d.a, d.r_outer)
            })
            .sum();
        assert!(rel(strain, grad) < 1e-9, "{strain} vs {grad}");
    }
}

#[test]
fn analytic_data_give_geometric_decay() {
    let lmax = 24;
    let mut psi = ShCoeffs::zeros(lmax);
    for l in 1..=lmax {
        psi.set(l, 0, 0.5f64.powi(l as i32));
    }
    let w = ntd_apply(&psi, &params(), &domain()).unwrap();
    let pts: Vec<(f64, f64)> = (4..=lmax).map(|l| (l as f64, w.get(l, 0).abs().ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    assert!(slope < 0.6f64.ln(), "slope {slope}");
    assert!(1.0 - ss_res / ss_tot > 0.99);
}

#[test]
fn infsup_degree_zero_has_two_gauge_directions() {
    let (d, p) = (domain(), params());
    let rep = infsup_mode(0, &p, &d).unwrap();
    assert_eq!(rep.null_dim, 2);
    assert!(rep.sigma > 0.0);
    let h = -2.0 / d.a;
    for [k_in, k_out, k_q] in &rep.null_constants {
        let scale = k_in.abs().max(k_out.abs()).max(k_q.abs());
        assert!((k_in - k_out - k_q * h).abs() < 1e-8 * scale, "{k_in} {k_out} {k_q}");
    }
    assert!(rep.sigma_with_gauge.unwrap() > 1e-3);
}

#[test]
fn infsup_is_positive_and_resolved() {
    let (d, p) = (domain(), params());
    for l in [1usize, 2, 5] {
        let coarse = infsup_mode_with(l, &p, &d, 16).unwrap();
        let fine = infsup_mode_with(l, &p, &d, 32).unwrap();
        assert_eq!(coarse.null_dim, 0);
        assert!(coarse.sigma > 0.0);
        if l == 2 {
            assert!(rel(coarse.sigma, fine.sigma) < 1e-6, "{} vs {}", coarse.sigma, fine.sigma);
        }
    }
}

/// `γ_2 = 24 M_2` at `a = 1`, `R = 4`, `κ = 1`, `μ_b = 1`, `μ = 0.01`, with
/// `M_2` the collocation-checked mobility.
const GAMMA_2: f64 = 2.405588784144653;

#[test]
fn spectrum_golden_values_and_translation_mode() {
    let (d, p) = (domain(), params());
    let t = spectrum(&p, &d, &[1, 2, 3]).unwrap();
    let g2 = t.gamma_of(2).unwrap();
    assert!(rel(g2, GAMMA_2) < 1e-8, "{g2}");
    assert!(rel(t.mobility[1] * 24.0, GAMMA_2) < 1e-14);
    assert!(t.gamma_of(1).unwrap().abs() <= 1e-8 * g2);
    for (i, l) in t.l.iter().enumerate() {
        assert!(t.mobility[i] > 0.0);
        let exact = second_variation_exact(*l, &p, &d);
        assert!((t.energy_hessian[i] - exact).abs() <= 1e-8 * exact.max(1.0), "l={l}");
    }
    assert!(matches!(spectrum(&p, &d, &[0, 2]), Err(Error::InvalidParameter(_))));
}

#[test]
fn relaxation_rates_grow_like_cube_of_degree() {
    let (d, p) = (domain(), params());
    let ls: Vec<usize> = (8..=32).collect();
    let t = spectrum(&p, &d, &ls).unwrap();
    let pts: Vec<(f64, f64)> = t.l.iter().zip(&t.gamma).map(|(l, g)| ((*l as f64).ln(), g.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 3.0).abs() <= 0.3, "slope {slope}");
}

/// The interface balance assembled on the sphere grid from the surface
/// module's force density and the bulk traction jump reproduces `f3`.
#[test]
fn interface_balance_matches_grid_surface_force() {
    use vesicle_core::surface::{div_total_stress, SurfaceShape, SurfaceVelocity};
    let d = domain();
    // the bending force vanishes on the sphere when C0 = 0
    let p = params();
    let lmax = 4;
    let mut data = collocation::random_data(lmax, 41);
    data.f4 = ShCoeffs::zeros(lmax);
    let sol = solve_s1(&data, &p, &d).unwrap();
    let g = SurfaceShape::sphere(d, lmax).unwrap().geometry().unwrap();
    let grid = g.grid.clone();
    let syn = |c: &ShCoeffs| grid.synthesize(&c.resized(lmax).with_kind(vesicle_core::sphharm::CoeffKind::Scalar)).unwrap();
    // tangent field a∇_Γψ + a ν×∇_Γφ from two potentials
    let tangent = |psi: &ShCoeffs, phi: &ShCoeffs| {
        let gp = g.grad(&syn(psi)).unwrap();
        let gf = g.grad(&syn(phi)).unwrap();
        (0..g.len()).map(|i| d.a * gp[i] + d.a * g.nu[i].cross(&gf[i])).collect::<Vec<_>>()
    };
    let vel = SurfaceVelocity { v: tangent(&sol.v_psi(), &sol.v_phi()), w: syn(&sol.w()) };
    let (tan, nor) = div_total_stress(&g, &vel, &syn(&sol.q()), &p).unwrap();

    let mut jump = [ShCoeffs::zeros(lmax), ShCoeffs::zeros(lmax), ShCoeffs::zeros(lmax)];
    for s in &sol.modes {
        let (ti, to) = (s.inner.traction(d.a, p.mu_b), s.outer.traction(d.a, p.mu_b));
        for k in 0..3 {
            jump[k].set(s.l, s.m, to[k] - ti[k]);
        }
    }
    let jt = tangent(&jump[1], &jump[2]);
    let jn = syn(&jump[0]);
    let ft = tangent(&data.f3_psi, &data.f3_phi);
    let fn_ = syn(&data.f3_nu);
    let scale = max_abs(&fn_).max(ft.iter().map(|v| v.norm()).fold(0.0, f64::max));
    for i in 0..g.len() {
        assert!((nor[i] + jn[i] - fn_[i]).abs() < 1e-9 * scale, "normal at {i}");
        assert!((tan[i] + jt[i] - ft[i]).norm() < 1e-9 * scale, "tangential at {i}");
    }
}
