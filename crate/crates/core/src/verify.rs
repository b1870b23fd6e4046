//! Seeded verification suite over the invariants of every module, with a
//! deterministic JSON summary.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::winding_of_loop;
use crate::deform::{change_to_diffeo, collar_psi, fix_boundary, grid_diagnostics, BumpProfile, CollarMap, DeformState};
use crate::expr::Rational;
use crate::field::examples::*;
use crate::field::{reduced_hamiltonian, strong_integral, FieldSpec, IntegralSpec};
use crate::flow::{flow_with, orbit_samples, period_with, FlowConfig};
use crate::geom::Point;
use crate::jet::{classify_jet, jet_at_origin, jet_of_flow_map, rotation_number, Concat, Jet2, JetTag, DEFAULT_CLASS_TOL};
use crate::shift::{
    branch_difference, compose_at, compose_shift, lie_derivative, local_diffeo_report, recover_shift, Anchor, GridSpec,
    MapSpec, NodeGrid, ShiftFn,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: Option<f64>,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub tol: f64,
    pub levels: usize,
    pub angles: usize,
    /// Random draws per sampled check.
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, tol: 1e-10, levels: 16, angles: 16, samples: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub tol: f64,
    pub grid: [usize; 2],
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifySummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

type Measure = Result<f64, String>;

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn push(&mut self, name: &str, relation: Relation, bound: f64, m: Measure) {
        let (measured, error) = match m {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("non-finite measurement {v}"))),
            Err(e) => (None, Some(e)),
        };
        let pass = measured.is_some_and(|v| match relation {
            Relation::AtMost => v <= bound,
            Relation::Above => v > bound,
        });
        self.checks.push(Check { name: name.into(), measured, relation, bound, pass, error });
    }

    fn at_most(&mut self, name: &str, bound: f64, m: Measure) {
        self.push(name, Relation::AtMost, bound, m)
    }

    fn above(&mut self, name: &str, bound: f64, m: Measure) {
        self.push(name, Relation::Above, bound, m)
    }
}

fn k2() -> (FieldSpec, IntegralSpec) {
    let hp = two_ellipses();
    (
        reduced_hamiltonian(&hp).expect("bundled field"),
        strong_integral(&hp, &Rational::one()).expect("bundled field"),
    )
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn in_disk(rng: &mut ChaCha8Rng, r_max: f64) -> Point {
    Point::polar(r_max * rng.gen_range(0.05f64..1.0).sqrt(), rng.gen_range(0.0..TAU))
}

/// Runs every check; never panics on numerical failure, recording it
/// instead.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary, String> {
    if cfg.levels < 8 || cfg.angles < 8 {
        return Err(format!("grid {}x{} is below 8x8", cfg.levels, cfg.angles));
    }
    let fc = FlowConfig::new(cfg.tol).map_err(err)?;
    let tol = cfg.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Suite { checks: Vec::new() };
    let rot = rotation();
    let disk = unit_disk();
    let (k2f, k2i) = k2();
    let n = cfg.samples.max(1);

    // flow
    s.at_most("flow_full_turn", 1e-8, flow_with(&rot, Point::new(1.0, 0.0), TAU, &fc).map(|p| p.dist(Point::new(1.0, 0.0))).map_err(err));
    let draws: Vec<(Point, f64, f64)> = (0..n).map(|_| (in_disk(&mut rng, 1.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
    s.at_most(
        "flow_group_law",
        10.0 * tol,
        draws.iter().try_fold(0.0f64, |acc, &(z, a, b)| {
            let two = flow_with(&k2f, flow_with(&k2f, z, a, &fc)?, b, &fc)?;
            Ok(acc.max(two.dist(flow_with(&k2f, z, a + b, &fc)?)))
        }).map_err(|e: crate::flow::FlowError| err(e)),
    );
    s.at_most(
        "flow_integral_conservation",
        10.0 * tol,
        draws.iter().try_fold(0.0f64, |acc, &(z, a, _)| {
            Ok(acc.max((k2i.level(flow_with(&k2f, z, a, &fc)?) - k2i.level(z)).abs()))
        }).map_err(|e: crate::flow::FlowError| err(e)),
    );

    // period
    let z1 = in_disk(&mut rng, 1.0);
    s.at_most("period_rotation", 1e-8, period_with(&rot, &disk, z1, &fc).map(|p| (p.theta - TAU).abs()).map_err(err));
    let quad = reduced_hamiltonian(&circle_squared()).map_err(err)?;
    s.at_most("period_circle_squared", 1e-8, period_with(&quad, &disk, z1, &fc).map(|p| (p.theta - FRAC_PI_2).abs()).map_err(err));
    let c = rng.gen_range(0.25..1.0);
    let zb = k2i.ray_point(1.0, rng.gen_range(0.0..TAU)).map_err(err)?;
    s.at_most(
        "period_homogeneity",
        1e-6,
        (|| {
            let t1 = period_with(&k2f, &k2i, zb, &fc)?.theta;
            let tc = period_with(&k2f, &k2i, c * zb, &fc)?.theta;
            Ok((tc * c * c - t1).abs() / t1)
        })()
        .map_err(|e: crate::flow::FlowError| err(e)),
    );
    s.above(
        "period_blowup_min_ratio",
        1.0,
        (|| {
            let mut prev = None;
            let mut worst = f64::INFINITY;
            for lvl in [1.0, 1e-1, 1e-2, 1e-3] {
                let z = k2i.ray_point(lvl, 0.0).map_err(err)?;
                let th = period_with(&k2f, &k2i, z, &fc).map_err(err)?.theta;
                if let Some(p) = prev {
                    worst = worst.min(th / p);
                }
                prev = Some(th);
            }
            Ok(worst)
        })(),
    );

    // cover
    s.at_most(
        "orbit_winding_number",
        0.0,
        orbit_samples(&k2f, zb, 64, tol)
            .map_err(err)
            .and_then(|t| {
                let mut pts = t.points;
                pts.push(pts[0]);
                winding_of_loop(&pts, 1e-6).map_err(err)
            })
            .map(|w| (w - 1).abs() as f64),
    );

    // shift
    let grid = NodeGrid::build(&rot, &disk, &GridSpec::uniform(cfg.levels, cfg.angles), &fc).map_err(err)?;
    let cap = grid.min_theta() / 4.0;
    let (c0, c1, c2) = (rng.gen_range(-0.3..0.3) * cap, rng.gen_range(-0.3..0.3) * cap, rng.gen_range(-0.3..0.3) * cap);
    let alpha = ShiftFn::func(move |z: Point| c0 + c1 * z.x + c2 * z.x * z.y);
    let m = MapSpec::flow_shift(alpha.clone());
    let z0 = grid.nodes[cfg.levels - 1][0];
    let rec = recover_shift(&rot, &disk, &m, Anchor { z: z0, t: alpha.eval(z0) }, &grid, &fc);
    s.at_most("shift_roundtrip_sup", 1e-6, rec.as_ref().map(|r| r.sup_diff_fn(&alpha)).map_err(err));
    let shifted = recover_shift(&rot, &disk, &m, Anchor { z: z0, t: alpha.eval(z0) + TAU }, &grid, &fc);
    s.at_most(
        "shift_branch_difference",
        0.0,
        match (&shifted, &rec) {
            (Ok(a), Ok(b)) => branch_difference(a, b).map(|d| (d - 1).abs() as f64).map_err(err),
            (Err(e), _) | (_, Err(e)) => Err(err(e)),
        },
    );
    let ag = ShiftFn::func(move |z: Point| 0.5 * c0 - c2 * z.y);
    s.at_most(
        "shift_composition_sup",
        1e-6,
        (|| {
            let comp = compose_shift(&rot, &grid, &ag, &alpha, &fc)?;
            let gm = m.then(&MapSpec::flow_shift(ag.clone()));
            let t0 = compose_at(&rot, &ag, &alpha, z0, &fc)?;
            Ok(comp.sup_diff(&recover_shift(&rot, &disk, &gm, Anchor { z: z0, t: t0 }, &grid, &fc)?))
        })()
        .map_err(|e: crate::shift::ShiftError| err(e)),
    );
    s.at_most(
        "lie_constant",
        1e-8,
        lie_derivative(&rot, &ShiftFn::constant(c0), z1, 1e-2, &fc).map(|d| d.value.abs()).map_err(err),
    );
    s.at_most(
        "lie_first_integral",
        1e-8,
        lie_derivative(&k2f, &ShiftFn::level(&k2i), zb, 1e-2, &fc).map(|d| d.value.abs()).map_err(err),
    );
    let ring: Vec<Point> = (0..24).map(|k| Point::polar(0.9, TAU * k as f64 / 24.0)).collect();
    s.above(
        "local_diffeo_witnesses",
        0.0,
        ShiftFn::parse("-2*y")
            .and_then(|a| local_diffeo_report(&rot, &a, &ring, 1e-6, &fc))
            .map(|r| r.witnesses.len() as f64)
            .map_err(err),
    );

    // jet
    let tau = rng.gen_range(0.2..2.0);
    s.at_most(
        "jet_nf1_flow",
        1e-5,
        jet_at_origin(&MapSpec::flow_map(tau), &k2f).map(|e| e.jet.dist(&Jet2::IDENTITY)).map_err(err),
    );
    s.at_most(
        "jet_rotation_flow",
        1e-5,
        jet_at_origin(&MapSpec::flow_map(tau), &rot)
            .map(|e| e.jet.dist(&jet_of_flow_map(&rot.nabla(), tau)))
            .map_err(err),
    );
    let nil = jet_of_flow_map(&Jet2::new(0.0, 1.0, 0.0, 0.0), tau);
    let class = classify_jet(&nil, DEFAULT_CLASS_TOL);
    s.at_most(
        "jet_nilpotent_class",
        1e-12,
        Ok(match (class.tag, class.d) {
            (JetTag::APlus, Some(d)) => (d - tau).abs().max(nil.dist(&Jet2::new(1.0, tau, 0.0, 1.0))),
            _ => f64::INFINITY,
        }),
    );
    let full = |k: f64| MapSpec::flow_map(k * TAU);
    let rho = |f: &dyn crate::jet::MapFamily, want: i64, k: usize| {
        rotation_number(&rot, &disk, f, k, tol).map(|r| (r.rho - want).abs() as f64).map_err(err)
    };
    s.at_most("rotation_full", 0.0, rho(&full, 1, 16));
    s.at_most("rotation_constant", 0.0, rho(&|_: f64| MapSpec::identity(), 0, 16));
    s.at_most("rotation_concat", 0.0, rho(&Concat(&full, &full), 2, 32));

    // deform
    let beta_alpha = ShiftFn::func(move |z: Point| PI / 4.0 * (1.0 + z.x / 4.0));
    let bm = MapSpec::flow_shift(beta_alpha.clone());
    let fixed = fix_boundary(&rot, &disk, &bm, &beta_alpha, &grid, BumpProfile::new(0.25, 0.75).ok(), &fc);
    s.at_most("fix_boundary_inner", 1e-8, fixed.as_ref().map(|f| f.inner_residual).map_err(err));
    s.at_most("fix_boundary_outer", 1e-10, fixed.as_ref().map(|f| f.boundary_residual).map_err(err));
    let small = NodeGrid::build(&rot, &disk, &GridSpec::uniform(8, 8), &fc).map_err(err)?;
    let fam = move |k: f64| ShiftFn::func(move |z: Point| k * (c0 + c1 * z.x));
    let mut st = DeformState::new(&rot, BumpProfile::new(0.25, 0.75).map_err(err)?, vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 1.0]);
    let rep = st.evaluate(&rot, &disk, &fam, &small, &fc).cloned();
    s.at_most("homotopy_factorization", 1e-6, rep.as_ref().map(|r| r.factorization_error).map_err(err));
    s.at_most("homotopy_zero_set", 1e-8, rep.as_ref().map(|r| r.zero_set_deviation).map_err(err));
    let collar = CollarMap::new(0.25).map_err(err)?;
    let collar_pts: Vec<Point> = (0..n).map(|_| in_disk(&mut rng, 0.5f64.sqrt())).collect();
    s.at_most(
        "collar_level_identity",
        1e-8,
        collar_pts.iter().try_fold(0.0f64, |acc, z| {
            let w = collar_psi(&k2i, &collar, *z).map_err(err)?;
            Ok(acc.max((k2i.level(w) - collar.mu(k2i.level(*z))).abs()))
        }),
    );
    let gm = change_to_diffeo(&disk, &m, &collar);
    s.at_most(
        "collar_diffeo_inner",
        1e-8,
        collar_pts.iter().filter(|z| disk.level(**z) <= 0.25).try_fold(0.0f64, |acc, z| {
            Ok(acc.max(gm.apply(&rot, *z, &fc).map_err(err)?.dist(m.apply(&rot, *z, &fc).map_err(err)?)))
        }),
    );
    s.above(
        "collar_diffeo_min_det",
        0.0,
        grid_diagnostics(&rot, &disk, &gm, &small, &fc).map(|d| if d.injective() { d.min_jacobian_det } else { 0.0 }).map_err(err),
    );

    let passed = s.checks.iter().all(|c| c.pass);
    Ok(VerifySummary { seed: cfg.seed, tol, grid: [cfg.levels, cfg.angles], passed, checks: s.checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes_and_is_reproducible() {
        let cfg = VerifyConfig { samples: 8, ..Default::default() };
        let a = run_verify(&cfg).unwrap();
        let failed: Vec<_> = a.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
        assert_eq!(a.to_json(), run_verify(&cfg).unwrap().to_json());
        let v: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert!(v["checks"][0]["name"].is_string() && v["checks"][0]["bound"].is_number());
    }

    #[test]
    fn rejects_small_grids() {
        assert!(run_verify(&VerifyConfig { levels: 4, ..Default::default() }).is_err());
    }
}
