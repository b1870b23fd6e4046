use std::f64::consts::{FRAC_PI_2, TAU};

use num_traits::One;

use super::*;
use crate::expr::Rational;
use crate::field::examples::*;
use crate::field::{reduced_hamiltonian, strong_integral};
use crate::flow::period;
use crate::shift::ShiftFn;

fn pp(h1: &str, h2: &str) -> Result<Primitive, ShiftError> {
    Primitive::poly(crate::expr::parse_poly(h1).unwrap(), crate::expr::parse_poly(h2).unwrap())
}

fn k2() -> (FieldSpec, IntegralSpec) {
    let hp = two_ellipses();
    (reduced_hamiltonian(&hp).unwrap(), strong_integral(&hp, &Rational::one()).unwrap())
}

#[test]
fn jet_at_origin_examples() {
    let fs = rotation();
    let e = jet_at_origin(&MapSpec::identity(), &fs).unwrap();
    assert!(e.exact && e.jet == Jet2::IDENTITY);
    let lin = MapSpec::new("m", vec![Primitive::linear_ints(2, 1, -1, 3)]);
    let e = jet_at_origin(&lin, &fs).unwrap();
    assert!(e.exact && e.jet == Jet2::new(2.0, 1.0, -1.0, 3.0));
    let (k2, _) = k2();
    let e = jet_at_origin(&MapSpec::flow_map(0.8), &k2).unwrap();
    assert!(!e.exact && e.jet.dist(&Jet2::IDENTITY) <= 1e-6 && e.error <= 1e-6, "{e:?}");
}

#[test]
fn poly_jet_is_its_linear_part() {
    let fs = rotation();
    let m = MapSpec::new("p", vec![pp("x + 3*y + x^2", "-y + x*y^2").unwrap()]);
    assert_eq!(jet_at_origin(&m, &fs).unwrap().jet, Jet2::new(1.0, 3.0, 0.0, -1.0));
}

#[test]
fn flow_jet_identity_per_case() {
    let (k2, _) = k2();
    let cases = [(rotation(), 1.3), (formal_nilpotent(1), 2.0), (formal_nilpotent(-3), 0.7), (k2, 0.5)];
    for (fs, tau) in cases {
        let e = jet_at_origin(&MapSpec::flow_map(tau), &fs).unwrap();
        let want = jet_of_flow_map(&fs.nabla(), tau);
        assert!(e.jet.dist(&want) <= 1e-5, "{} vs {}", e.jet, want);
        assert!(e.error <= 1e-6);
    }
}

#[test]
fn chain_rule_across_primitives() {
    let fs = rotation();
    let a = MapSpec::flow_shift(ShiftFn::parse("0.3 + x/5").unwrap());
    let b = MapSpec::new("l", vec![Primitive::linear_ints(0, -1, 1, 0)]);
    let ja = jet_at_origin(&a, &fs).unwrap().jet;
    let jb = jet_at_origin(&b, &fs).unwrap().jet;
    let jab = jet_at_origin(&a.then(&b), &fs).unwrap().jet;
    assert!(jab.dist(&(jb * ja)) <= 1e-5);
}

#[test]
fn jet_image_examples() {
    let fs = rotation();
    let img = collect_jet_image(&fs, &[MapSpec::identity()], DEFAULT_CLASS_TOL).unwrap();
    assert_eq!(img.classes.into_iter().collect::<Vec<_>>(), vec![JetTag::Kernel]);

    let nf2 = formal_nilpotent(1);
    let maps: Vec<MapSpec> = [0.5, 1.0, -2.0, 3.5].iter().map(|&t| MapSpec::flow_map(t)).collect();
    let img = collect_jet_image(&nf2, &maps, DEFAULT_CLASS_TOL).unwrap();
    assert_eq!(img.classes.into_iter().collect::<Vec<_>>(), vec![JetTag::APlus]);
    for (r, t) in img.reports.iter().zip([0.5, 1.0, -2.0, 3.5]) {
        assert!((r.d.unwrap() - t).abs() <= 1e-6);
    }

    // the mirror reverses orbit direction of the rotation but keeps orbits
    let mirror = MapSpec::new("mirror", vec![pp("x", "-y").unwrap()]).then(&MapSpec::flow_map(0.4));
    let img = collect_jet_image(&fs, &[MapSpec::identity(), mirror], DEFAULT_CLASS_TOL).unwrap();
    assert!(img.classes.len() == 2 && img.classes.contains(&JetTag::Other));
    let mirror_only = MapSpec::new("mirror", vec![pp("x", "-y").unwrap()]);
    let img = collect_jet_image(&fs, &[mirror_only], DEFAULT_CLASS_TOL).unwrap();
    assert!(img.classes.contains(&JetTag::APrimePlus));
}

#[test]
fn jet_report_json() {
    let r = jet_report(&MapSpec::flow_map(2.0), &formal_nilpotent(1), DEFAULT_CLASS_TOL).unwrap();
    let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(v["class"], "APlus");
    assert!((v["d"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn rotation_numbers() {
    let (fs, is) = (rotation(), unit_disk());
    let full = |k: f64| MapSpec::flow_map(k * TAU);
    let r = rotation_number(&fs, &is, &full, 16, 1e-10).unwrap();
    assert_eq!(r.rho, 1);
    assert!(r.margin >= 0.25);
    let constant = |_: f64| MapSpec::identity();
    assert_eq!(rotation_number(&fs, &is, &constant, 16, 1e-10).unwrap().rho, 0);
    let twice = Concat(&full, &full);
    assert_eq!(rotation_number(&fs, &is, &twice, 32, 1e-10).unwrap().rho, 2);
    let back = |k: f64| MapSpec::flow_map(-k * TAU);
    assert_eq!(rotation_number(&fs, &is, &Concat(&full, &back), 32, 1e-10).unwrap().rho, 0);
}

#[test]
fn rotation_number_on_nonlinear_field() {
    let (fs, is) = k2();
    let zb = is.ray_point(1.0, 0.0).unwrap();
    let theta = period(&fs, &is, zb, 1e-10).unwrap().theta;
    let full = move |k: f64| MapSpec::flow_map(k * theta);
    assert_eq!(rotation_number(&fs, &is, &full, 16, 1e-10).unwrap().rho, 1);
    let neg = move |k: f64| MapSpec::flow_map(-2.0 * k * theta);
    assert_eq!(rotation_number(&fs, &is, &neg, 24, 1e-10).unwrap().rho, -2);
}

#[test]
fn rotation_number_preconditions() {
    let (fs, is) = (rotation(), unit_disk());
    let half = |k: f64| MapSpec::flow_map(k * 0.5 * TAU);
    assert!(matches!(rotation_number(&fs, &is, &half, 16, 1e-10), Err(JetError::BoundaryNotFixed(_))));
    let fast = |k: f64| MapSpec::flow_map(k * 8.0 * TAU);
    assert!(matches!(rotation_number(&fs, &is, &fast, 16, 1e-10), Err(JetError::BranchConflict { .. })));
    let off = |k: f64| MapSpec::flow_map(FRAC_PI_2 + k * TAU);
    assert!(matches!(rotation_number(&fs, &is, &off, 16, 1e-10), Err(JetError::NotStartingAtIdentity(_))));
}

#[test]
fn normalization_into_kernel() {
    let fs = formal_nilpotent(1);
    let member = MapSpec::flow_map(1.5);
    let b1 = normalize_to_kernel(&fs, &member, 1.0).unwrap();
    assert!(jet_at_origin(&b1, &fs).unwrap().jet.dist(&Jet2::IDENTITY) <= 1e-6);
    assert_eq!(normalize_to_kernel(&fs, &member, 0.0).unwrap().primitives.len(), 1);
    let bh = normalize_to_kernel(&fs, &member, 0.5).unwrap();
    assert!((jet_at_origin(&bh, &fs).unwrap().jet.get(0, 1) - 0.75).abs() <= 1e-6);
    let kernel = MapSpec::identity();
    for t in [0.0, 0.3, 1.0] {
        assert!(normalize_to_kernel(&fs, &kernel, t).unwrap().is_identity());
    }
    let fs3 = formal_nilpotent(3);
    let b = normalize_to_kernel(&fs3, &MapSpec::flow_shift(ShiftFn::parse("2 + x").unwrap()), 1.0).unwrap();
    assert!(jet_at_origin(&b, &fs3).unwrap().jet.dist(&Jet2::IDENTITY) <= 1e-6);
    assert!(matches!(normalize_to_kernel(&rotation(), &member, 1.0), Err(JetError::NotNF2)));
}
