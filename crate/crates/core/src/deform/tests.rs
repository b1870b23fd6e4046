use std::f64::consts::TAU;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::Rational;
use crate::field::examples::*;
use crate::field::{reduced_hamiltonian, strong_integral};
use crate::shift::GridSpec;

fn cfg() -> FlowConfig {
    FlowConfig::new(1e-10).unwrap()
}

fn rot_grid(levels: usize, angles: usize) -> (FieldSpec, IntegralSpec, NodeGrid) {
    let (fs, is) = (rotation(), unit_disk());
    let g = NodeGrid::build(&fs, &is, &GridSpec::uniform(levels, angles), &cfg()).unwrap();
    (fs, is, g)
}

fn k2() -> (FieldSpec, IntegralSpec) {
    let hp = two_ellipses();
    (reduced_hamiltonian(&hp).unwrap(), strong_integral(&hp, &Rational::one()).unwrap())
}

#[test]
fn truncation_examples() {
    let is = unit_disk();
    let p = BumpProfile::new(0.25, 0.75).unwrap();
    let lambda = ShiftFn::parse("1 + x").unwrap();
    let alpha = truncate_shift(&is, &lambda, &p);
    let inner = Point::new(0.3, 0.2);
    assert_eq!(alpha.eval(inner), lambda.eval(inner));
    assert_eq!(alpha.eval(Point::new(0.9, 0.1)), 0.0);
    let mid = Point::new(0.7, 0.0);
    assert!((alpha.eval(mid) - p.eval(0.49) * lambda.eval(mid)).abs() < 1e-14);
}

#[test]
fn homotopy_endpoints_and_fixed_points() {
    let (fs, is) = (rotation(), unit_disk());
    let p = BumpProfile::new(0.25, 0.75).unwrap();
    let lambda = ShiftFn::parse("0.5 + y/3").unwrap();
    let z = Point::new(0.6, 0.5);
    let a1 = homotopy_a(&fs, &is, &lambda, &p, 1.0, z, &cfg()).unwrap();
    assert!(a1.dist(flow_with(&fs, z, lambda.eval(z), &cfg()).unwrap()) <= 1e-9);
    let a0 = homotopy_a(&fs, &is, &lambda, &p, 0.0, z, &cfg()).unwrap();
    let alpha = truncate_shift(&is, &lambda, &p);
    assert!(a0.dist(flow_with(&fs, z, alpha.eval(z), &cfg()).unwrap()) <= 1e-9);
    let zero = ShiftFn::parse("x").unwrap();
    for t in [0.0, 0.4, 1.0] {
        let w = Point::new(0.0, 0.7);
        assert_eq!(homotopy_a(&fs, &is, &zero, &p, t, w, &cfg()).unwrap(), w);
        assert_eq!(homotopy_a(&fs, &is, &lambda, &p, t, Point::default(), &cfg()).unwrap(), Point::default());
    }
}

#[test]
fn fix_boundary_examples() {
    let (fs, is, g) = rot_grid(16, 16);
    let r = fix_boundary(&fs, &is, &MapSpec::identity(), &ShiftFn::constant(0.0), &g, None, &cfg()).unwrap();
    assert!(r.map.is_identity());

    let tau = ShiftFn::constant(0.3);
    let r = fix_boundary(&fs, &is, &MapSpec::flow_shift(tau.clone()), &tau, &g, None, &cfg()).unwrap();
    assert_eq!(r.profile, BumpProfile::new(0.375, 0.75).unwrap());
    for k in 0..12 {
        let z = Point::polar(1.0, TAU * k as f64 / 12.0);
        assert!(r.map.apply(&fs, z, &cfg()).unwrap().dist(z) <= 1e-10);
    }
    assert!(r.min_lie.abs() < 1e-8);

    let alpha = ShiftFn::parse("1/8*6.283185307179586*(1 + x/4)").unwrap();
    let m = MapSpec::flow_shift(alpha.clone());
    let p = BumpProfile::new(0.25, 0.75).unwrap();
    let r = fix_boundary(&fs, &is, &m, &alpha, &g, Some(p), &cfg()).unwrap();
    assert!(r.inner_residual <= 1e-8);
    assert!(r.boundary_residual <= 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let z = Point::polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..TAU));
        assert!(r.map.apply(&fs, z, &cfg()).unwrap().dist(m.apply(&fs, z, &cfg()).unwrap()) <= 1e-8);
        let w = Point::polar(rng.gen_range(0.87..1.0), rng.gen_range(0.0..TAU));
        assert!(r.map.apply(&fs, w, &cfg()).unwrap().dist(w) <= 1e-10);
    }
}

#[test]
fn fix_boundary_shrinks_b_and_flags_violations() {
    let (fs, is, g) = rot_grid(16, 32);
    // F(-2y) = -2x < -1 once x > 1/2, so images lose their order there
    let alpha = ShiftFn::parse("-2*y").unwrap();
    let m = MapSpec::flow_shift(alpha.clone());
    let r = fix_boundary(&fs, &is, &m, &alpha, &g, None, &cfg()).unwrap();
    assert!(r.profile.b < 0.25 && r.min_lie > -1.0, "{:?}", r.profile);
    let fixed = Some(BumpProfile::new(0.4, 0.8).unwrap());
    assert!(matches!(
        fix_boundary(&fs, &is, &m, &alpha, &g, fixed, &cfg()),
        Err(DeformError::NotInjectiveOnUb { .. })
    ));
    // a shift function disagreeing with the map triggers the criterion check
    let r = fix_boundary(&fs, &is, &MapSpec::identity(), &alpha, &g, fixed, &cfg());
    assert!(matches!(r, Err(DeformError::CriterionViolated { .. })), "{r:?}");
}

#[test]
fn collar_examples() {
    let is = unit_disk();
    let c = CollarMap::new(0.25).unwrap();
    assert_eq!(c.mu(0.2), 0.2);
    assert!((c.mu(0.5) - 1.0).abs() < 1e-15);
    let z = Point::new(0.3, 0.2);
    assert_eq!(collar_psi(&is, &c, z).unwrap(), z);
    let v = c.mu(0.4);
    let w = collar_psi(&is, &c, Point::new(0.4f64.sqrt(), 0.0)).unwrap();
    assert!(w.dist(Point::new(v.sqrt(), 0.0)) <= 1e-10, "{w:?}");
    let w = collar_psi(&is, &c, Point::new(0.5f64.sqrt(), 0.0)).unwrap();
    assert!(w.dist(Point::new(1.0, 0.0)) <= 1e-10);
    assert!(CollarMap::new(0.5).is_err());
}

#[test]
fn collar_level_identity_and_inverse() {
    let (_, is) = k2();
    let c = CollarMap::new(0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let s = rng.gen_range(0.01..0.4);
        let z = is.ray_point(s, rng.gen_range(0.0..TAU)).unwrap();
        let w = collar_psi(&is, &c, z).unwrap();
        assert!((is.level(w) - c.mu(s)).abs() <= 1e-8);
        let back = collar_psi_inv(&is, &c, w).unwrap();
        assert!(back.dist(z) <= 1e-8, "{z:?} {back:?}");
    }
    assert!(matches!(collar_psi_inv(&is, &c, Point::new(3.0, 0.0)), Err(DeformError::PsiInverseFailure { .. })));
}

#[test]
fn change_to_diffeo_examples() {
    let (fs, is, g) = rot_grid(8, 16);
    let c = CollarMap::new(0.25).unwrap();
    let id = change_to_diffeo(&is, &MapSpec::identity(), &c);
    for (_, _, z) in g.iter_nodes() {
        assert!(id.apply(&fs, z, &cfg()).unwrap().dist(z) <= 1e-10);
    }
    let m = MapSpec::flow_shift(ShiftFn::parse("0.4 + x*y").unwrap());
    let gm = change_to_diffeo(&is, &m, &c);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let z = Point::polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..TAU));
        assert!(gm.apply(&fs, z, &cfg()).unwrap().dist(m.apply(&fs, z, &cfg()).unwrap()) <= 1e-8);
    }
    let d = grid_diagnostics(&fs, &is, &gm, &g, &cfg()).unwrap();
    assert!(d.max_drift <= 1e-9 && d.injective() && d.min_jacobian_det > 0.0, "{d:?}");
}

#[test]
fn deformation_report() {
    let (fs, is, g) = rot_grid(8, 16);
    let p = BumpProfile::new(0.3, 0.7).unwrap();
    let family = |k: f64| ShiftFn::func(move |z: Point| k * (0.2 * z.x + 0.1 * z.x * z.y));
    let mut st = DeformState::new(&fs, p, vec![0.0, 0.5, 1.0], vec![0.0, 0.25, 0.5, 1.0]);
    let r = st.evaluate(&fs, &is, &family, &g, &cfg()).unwrap().clone();
    assert!(r.omega_deviation <= 1e-9 && r.omega_prime_deviation <= 1e-9);
    assert!(r.factorization_error <= 1e-6, "{}", r.factorization_error);
    assert!(r.zero_set_deviation <= 1e-8);
    assert!(r.boundary_residual <= 1e-10);
    assert!(r.min_lie > -1.0);
    assert_eq!(r.samples, 12 * 128);
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["profile"]["a"], 0.3);
}
