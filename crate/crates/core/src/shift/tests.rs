use std::f64::consts::{FRAC_PI_2, TAU};

use super::*;
use crate::field::examples::*;
use crate::field::{reduced_hamiltonian, IntegralSpec};

fn cfg() -> FlowConfig {
    FlowConfig::new(1e-10).unwrap()
}

fn rot_grid(levels: usize, angles: usize) -> (FieldSpec, IntegralSpec, NodeGrid) {
    let (fs, is) = (rotation(), unit_disk());
    let g = NodeGrid::build(&fs, &is, &GridSpec::uniform(levels, angles), &cfg()).unwrap();
    (fs, is, g)
}

#[test]
fn apply_map_examples() {
    let fs = rotation();
    let z = Point::new(0.3, -0.4);
    assert_eq!(MapSpec::identity().apply(&fs, z, &cfg()).unwrap(), z);
    let shear = MapSpec::new("shear", vec![Primitive::linear_ints(1, 1, 0, 1)]);
    assert_eq!(shear.apply(&fs, Point::new(0.0, 1.0), &cfg()).unwrap(), Point::new(1.0, 1.0));
    let quarter = MapSpec::flow_map(FRAC_PI_2);
    assert!(quarter.apply(&fs, Point::new(1.0, 0.0), &cfg()).unwrap().dist(Point::new(0.0, 1.0)) < 1e-10);
}

#[test]
fn shift_of_examples() {
    let fs = rotation();
    let z = Point::new(0.5, 0.2);
    assert_eq!(shift_of(&fs, &ShiftFn::constant(0.0), z, 1e-10).unwrap(), z);
    assert!(shift_of(&fs, &ShiftFn::constant(TAU), z, 1e-10).unwrap().dist(z) < 1e-9);
    let p = shift_of(&fs, &ShiftFn::parse("x").unwrap(), Point::new(1.0, 0.0), 1e-10).unwrap();
    assert!(p.dist(Point::new(1f64.cos(), 1f64.sin())) < 1e-10);
}

#[test]
fn map_json_round_trip() {
    let text = r#"[{"kind":"flow_shift","alpha":"1/10 + x/20"},{"kind":"linear","m":[["1","1"],["0","1"]]},{"kind":"poly","h1":"x + y^2","h2":"y"}]"#;
    let m = MapSpec::from_json(text).unwrap();
    assert_eq!(m.primitives.len(), 3);
    let again = MapSpec::from_json(&m.to_json().unwrap()).unwrap();
    let z = Point::new(0.2, 0.1);
    let fs = rotation();
    assert_eq!(m.apply(&fs, z, &cfg()).unwrap(), again.apply(&fs, z, &cfg()).unwrap());
    assert!(MapSpec::from_json(r#"[{"kind":"poly","h1":"x + 1","h2":"y"}]"#).is_err());
    assert!(MapSpec::from_json(r#"[{"kind":"warp"}]"#).is_err());
}

#[test]
fn recover_constant_and_identity() {
    let (fs, is, g) = rot_grid(6, 12);
    let z0 = g.nodes[2][3];
    let s = recover_shift(&fs, &is, &MapSpec::flow_map(0.7), Anchor { z: z0, t: 0.7 }, &g, &cfg()).unwrap();
    assert!(s.sup_diff_fn(&ShiftFn::constant(0.7)) < 1e-9);
    let s = recover_shift(&fs, &is, &MapSpec::identity(), Anchor { z: z0, t: 0.0 }, &g, &cfg()).unwrap();
    assert!(s.sup_abs() < 1e-9);
}

#[test]
fn recover_varying_shift() {
    let (fs, is, g) = rot_grid(8, 16);
    let alpha = ShiftFn::parse("1/10 + x/20").unwrap();
    let z0 = g.nodes[7][0];
    let m = MapSpec::flow_shift(alpha.clone());
    let s = recover_shift(&fs, &is, &m, Anchor { z: z0, t: alpha.eval(z0) }, &g, &cfg()).unwrap();
    assert!(s.sup_diff_fn(&alpha) <= 1e-6, "{}", s.sup_diff_fn(&alpha));
    assert!(s.max_neighbor_jump() < 0.5);
    assert!(s.to_csv().starts_with("level,angle,lambda\n"));
}

#[test]
fn branches_differ_by_whole_periods() {
    let (fs, is, g) = rot_grid(6, 12);
    let alpha = ShiftFn::parse("1/5 - y/10").unwrap();
    let m = MapSpec::flow_shift(alpha.clone());
    let z0 = g.nodes[5][0];
    let a = alpha.eval(z0);
    let s1 = recover_shift(&fs, &is, &m, Anchor { z: z0, t: a }, &g, &cfg()).unwrap();
    let s2 = recover_shift(&fs, &is, &m, Anchor { z: z0, t: a + g.thetas[5] }, &g, &cfg()).unwrap();
    assert_eq!(branch_difference(&s1, &s1).unwrap(), 0);
    assert_eq!(branch_difference(&s2, &s1).unwrap(), 1);
    assert_eq!(s2.branch - s1.branch, 1);
    let bad = s1.map_values(|i, _, _, v| v + 0.5 * s1.grid.thetas[i]);
    assert!(matches!(branch_difference(&bad, &s1), Err(ShiftError::NotMultiple { .. })));
}

#[test]
fn non_orbit_preserving_map_is_rejected() {
    let (fs, is, g) = rot_grid(4, 8);
    let m = MapSpec::new("scale", vec![Primitive::linear_ints(2, 0, 0, 2)]);
    let r = recover_shift(&fs, &is, &m, Anchor { z: Point::default(), t: 0.0 }, &g, &cfg());
    assert!(matches!(r, Err(ShiftError::NotOrbitPreserving { .. })));
}

#[test]
fn bad_anchor_is_rejected() {
    let (fs, is, g) = rot_grid(4, 8);
    let r = recover_shift(&fs, &is, &MapSpec::flow_map(0.3), Anchor { z: g.nodes[1][1], t: 0.5 }, &g, &cfg());
    assert!(matches!(r, Err(ShiftError::AnchorInconsistent { .. })));
}

#[test]
fn composition_of_constants() {
    let (fs, _, g) = rot_grid(3, 8);
    let tau = ShiftFn::constant(0.4);
    let c = compose_shift(&fs, &g, &tau, &tau, &cfg()).unwrap();
    assert!(c.sup_diff_fn(&ShiftFn::constant(0.8)) < 1e-12);
    let inv = inverse_shift(&fs, &g, &tau, &cfg()).unwrap();
    assert!(inv.sup_diff_fn(&ShiftFn::constant(-0.4)) < 1e-12);
}

#[test]
fn composition_matches_recovery() {
    let (fs, is, g) = rot_grid(6, 12);
    let ag = ShiftFn::parse("0.3 + x*y/4").unwrap();
    let ah = ShiftFn::parse("-0.2 + x/8 - y^2/5").unwrap();
    let comp = compose_shift(&fs, &g, &ag, &ah, &cfg()).unwrap();
    let m = MapSpec::flow_shift(ah.clone()).then(&MapSpec::flow_shift(ag.clone()));
    let z0 = g.nodes[0][0];
    let t0 = compose_at(&fs, &ag, &ah, z0, &cfg()).unwrap();
    let rec = recover_shift(&fs, &is, &m, Anchor { z: z0, t: t0 }, &g, &cfg()).unwrap();
    assert!(comp.sup_diff(&rec) < 1e-6, "{}", comp.sup_diff(&rec));
}

#[test]
fn lie_derivative_examples() {
    let fs = rotation();
    let is = unit_disk();
    let z = Point::new(1.0, 0.0);
    let d = lie_derivative(&fs, &ShiftFn::constant(3.0), z, 1e-2, &cfg()).unwrap();
    assert!(d.value.abs() < 1e-8);
    let d = lie_derivative(&fs, &ShiftFn::level(&is), Point::new(0.3, 0.5), 1e-2, &cfg()).unwrap();
    assert!(d.value.abs() < 1e-8);
    let d = lie_derivative(&fs, &ShiftFn::parse("y").unwrap(), z, 1e-2, &cfg()).unwrap();
    assert!((d.value - 1.0).abs() < 1e-8, "{d:?}");
    // symbolic oracle on a nonlinear field and function
    let k2 = reduced_hamiltonian(&two_ellipses()).unwrap();
    let p = crate::expr::parse_poly("x^2*y - 3*x + y^3").unwrap();
    let sym = k2.lie_derivative_poly(&p);
    let zz = Point::new(0.4, -0.3);
    let d = lie_derivative(&k2, &ShiftFn::Expr(crate::expr::ScalarExpr::from_poly(&p)), zz, 1e-2, &cfg()).unwrap();
    assert!((d.value - sym.eval(zz.x, zz.y)).abs() < 1e-8, "{} vs {}", d.value, sym.eval(zz.x, zz.y));
}

#[test]
fn local_diffeo_witnesses() {
    let fs = rotation();
    let samples: Vec<Point> = (0..24).map(|k| Point::polar(0.9, TAU * k as f64 / 24.0)).collect();
    let r = local_diffeo_report(&fs, &ShiftFn::constant(0.3), &samples, 1e-6, &cfg()).unwrap();
    assert_eq!(r.min_value, 0.0);
    assert!(r.is_clean());
    // F(-c y) = -c x reaches -1 once c |x| ≥ 1
    let r = local_diffeo_report(&fs, &ShiftFn::parse("-2*y").unwrap(), &samples, 1e-6, &cfg()).unwrap();
    assert!(!r.is_clean());
    assert!((r.min_value + 1.8).abs() < 1e-6);
    assert!(r.witnesses.iter().all(|w| w.z.x > 0.0));
}

#[test]
fn sampled_shift_interpolates_off_grid() {
    let (fs, is, g) = rot_grid(16, 32);
    let alpha = ShiftFn::parse("1/10 + x/20 - x*y/7").unwrap();
    let sampled = SampledShift::new(ShiftFunctionSample::from_fn(&g, &alpha), &is);
    for z in [Point::new(0.3, 0.2), Point::new(-0.6, 0.55), Point::new(0.05, -0.9)] {
        assert!((sampled.eval(z) - alpha.eval(z)).abs() < 1e-6);
    }
    let poly = crate::expr::parse_poly("1/10 + 1/20*x - 1/7*x*y").unwrap();
    let sym = fs.lie_derivative_poly(&poly);
    for (i, j, z) in g.iter_nodes() {
        assert!((sampled.lie_derivative_at_node(&fs, i, j) - sym.eval(z.x, z.y)).abs() < 1e-10);
    }
}
