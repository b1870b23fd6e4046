use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use orbitshift::deform::{beta, fix_boundary, BumpProfile, DeformReport, DeformState};
use orbitshift::field::{CenterCase, FieldSpec, IntegralSpec};
use orbitshift::flow::{period_blowup_check, periods_to_csv, trajectory, FlowConfig};
use orbitshift::geom::Point;
use orbitshift::io::{parse_field_json, FieldInput};
use orbitshift::jet::Jet2;
use orbitshift::plot::{mapped_curves, orbit_curves, render_svg};
use orbitshift::shift::{
    default_anchor, recover_shift, Anchor, GridSpec, MapSpec, NodeGrid, SampledShift, ShiftFn,
    ShiftFunctionSample,
};
use orbitshift::verify::{run_verify, Relation, VerifyConfig};

use crate::fail::{Fail, Res};
use crate::{Cli, Cmd, Global, ShiftCmd};

const FRAME_LEVELS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn json<T: Serialize>(v: &T) -> Res<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Fail::invariant(e.to_string()))
}

struct Sink<'a> {
    dir: Option<&'a Path>,
}

impl Sink<'_> {
    fn new(g: &Global) -> Res<Sink<'_>> {
        if let Some(d) = &g.out {
            fs::create_dir_all(d)?;
        }
        Ok(Sink { dir: g.out.as_deref() })
    }

    /// Writes `name` into the output directory, or prints it.
    fn emit(&self, name: &str, content: &str) -> Res<()> {
        match self.dir {
            Some(d) => {
                let p = d.join(name);
                fs::write(&p, content)?;
                println!("wrote {}", p.display());
            }
            None => print!("{content}"),
        }
        Ok(())
    }

    fn file(&self, name: &str) -> Option<PathBuf> {
        self.dir.map(|d| d.join(name))
    }
}

fn load_field(path: &Path) -> Res<FieldInput> {
    let src = fs::read_to_string(path).map_err(|e| Fail::input(format!("{}: {e}", path.display())))?;
    Ok(parse_field_json(&src)?)
}

/// A field that is a topological center, with its integral.
fn load_tc(path: &Path) -> Res<(FieldSpec, IntegralSpec)> {
    let input = load_field(path)?;
    if input.field.case() == CenterCase::NotTc {
        return Err(Fail::invariant(format!("{}: linear part rules out a topological center", path.display())));
    }
    let is = input.require_integral()?.clone();
    Ok((input.field, is))
}

fn load_map(path: &Path) -> Res<MapSpec> {
    let src = fs::read_to_string(path).map_err(|e| Fail::input(format!("{}: {e}", path.display())))?;
    Ok(MapSpec::from_json(&src)?)
}

fn flow_cfg(g: &Global) -> Res<FlowConfig> {
    Ok(FlowConfig::new(g.tol)?)
}

fn node_grid(fs: &FieldSpec, is: &IntegralSpec, g: &Global, cfg: &FlowConfig) -> Res<NodeGrid> {
    Ok(NodeGrid::build(fs, is, &GridSpec::uniform(g.grid.0, g.grid.1), cfg)?)
}

pub fn run(cli: &Cli) -> Res<()> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Field { file } => cmd_field(g, file),
        Cmd::Flow { file, x, y, t } => cmd_flow(g, file, Point::new(*x, *y), *t),
        Cmd::Period { file, angle, levels } => cmd_period(g, file, *angle, levels),
        Cmd::Shift { op: ShiftCmd::Recover { field, map, anchor_t } } => cmd_shift_recover(g, field, map, *anchor_t),
        Cmd::Deform { field, map, a, b, frames, ks } => cmd_deform(g, field, map, (*a, *b), *frames, ks),
        Cmd::Verify { samples } => cmd_verify(g, *samples),
        Cmd::Plot { file, levels, map, points } => cmd_plot(g, file, levels, map.as_deref(), *points),
    }
}

#[derive(Serialize)]
struct FieldReport {
    #[serde(rename = "F1")]
    f1: String,
    #[serde(rename = "F2")]
    f2: String,
    nabla: Jet2,
    case: CenterCase,
    coprime: bool,
    integral: Option<String>,
}

fn cmd_field(g: &Global, file: &Path) -> Res<()> {
    let input = load_field(file)?;
    let fs = &input.field;
    let r = FieldReport {
        f1: fs.f1().to_string(),
        f2: fs.f2().to_string(),
        nabla: fs.nabla(),
        case: fs.case(),
        coprime: input.coprime()?,
        integral: input.integral.as_ref().map(|i| i.f_hat().to_string()),
    };
    let text = if g.json {
        json(&r)?
    } else {
        let [[a, b], [c, d]] = r.nabla.0;
        let mut s = format!("F1 = {}\nF2 = {}\n", r.f1, r.f2);
        s += &format!("nabla = [[{}, {}], [{}, {}]]\n", num(a), num(b), num(c), num(d));
        s += &format!("case = {}\ncoprime = {}\n", r.case, r.coprime);
        if let Some(f) = &r.integral {
            s += &format!("integral = {f}\n");
        }
        s
    };
    Sink::new(g)?.emit(if g.json { "field.json" } else { "field.txt" }, &text)?;
    if r.case == CenterCase::NotTc {
        return Err(Fail::invariant("NotTC: trace or determinant of ∇F excludes a center"));
    }
    if !r.coprime {
        return Err(Fail::invariant("F1 and F2 have a common factor"));
    }
    Ok(())
}

fn cmd_flow(g: &Global, file: &Path, z: Point, t: f64) -> Res<()> {
    let input = load_field(file)?;
    let traj = trajectory(&input.field, z, t, g.tol)?;
    let end = *traj.points.last().unwrap_or(&z);
    let sink = Sink::new(g)?;
    if g.json {
        sink.emit("flow.json", &json(&traj)?)?;
    } else {
        sink.emit("flow.csv", &traj.to_csv())?;
    }
    eprintln!("Φ(z, {}) = ({}, {}) after {} steps", num(t), num(end.x), num(end.y), traj.len().saturating_sub(1));
    Ok(())
}

fn cmd_period(g: &Global, file: &Path, angle: f64, levels: &[f64]) -> Res<()> {
    let (fs, is) = load_tc(file)?;
    let samples = period_blowup_check(&fs, &is, angle, levels, g.tol)?;
    let sink = Sink::new(g)?;
    if g.json {
        sink.emit("period.json", &json(&samples)?)
    } else {
        sink.emit("period.csv", &periods_to_csv(&samples))
    }
}

#[derive(Serialize)]
struct RecoverReport {
    map: String,
    anchor: Anchor,
    branch: i64,
    residual: f64,
    sup_abs: f64,
    max_neighbor_jump: f64,
    min_theta: f64,
    /// Sup-node distance to `α` when the map is `Sh(α)`.
    roundtrip_error: Option<f64>,
}

fn recover(
    fs: &FieldSpec,
    is: &IntegralSpec,
    m: &MapSpec,
    grid: &NodeGrid,
    anchor_t: Option<f64>,
    cfg: &FlowConfig,
) -> Res<ShiftFunctionSample> {
    let mut anchor = default_anchor(fs, m, grid, cfg)?;
    if let Some(t) = anchor_t {
        anchor.t = t;
    }
    Ok(recover_shift(fs, is, m, anchor, grid, cfg)?)
}

fn cmd_shift_recover(g: &Global, field: &Path, map: &Path, anchor_t: Option<f64>) -> Res<()> {
    let (fs, is) = load_tc(field)?;
    let m = load_map(map)?;
    let cfg = flow_cfg(g)?;
    let grid = node_grid(&fs, &is, g, &cfg)?;
    let s = recover(&fs, &is, &m, &grid, anchor_t, &cfg)?;
    let (i0, j0) = s.anchor_node;
    let r = RecoverReport {
        map: m.name.clone(),
        anchor: Anchor { z: grid.nodes[i0][j0], t: s.value(i0, j0) },
        branch: s.branch,
        residual: s.residual,
        sup_abs: s.sup_abs(),
        max_neighbor_jump: s.max_neighbor_jump(),
        min_theta: grid.min_theta(),
        roundtrip_error: m.as_flow_shift().map(|a| s.sup_diff_fn(a)),
    };
    let sink = Sink::new(g)?;
    if g.json {
        sink.emit("shift_report.json", &json(&r)?)?;
        if let Some(p) = sink.file("shift.csv") {
            fs::write(&p, s.to_csv())?;
            println!("wrote {}", p.display());
        }
    } else {
        sink.emit("shift.csv", &s.to_csv())?;
        eprintln!("branch = {}, residual = {}, sup |Λ| = {}", r.branch, num(r.residual), num(r.sup_abs));
        if let Some(e) = r.roundtrip_error {
            eprintln!("roundtrip sup error = {}", num(e));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct DeformRun {
    map: String,
    profile: BumpProfile,
    inner_residual: f64,
    boundary_residual: f64,
    min_lie_fixed: f64,
    homotopy: DeformReport,
    frames: Vec<String>,
}

fn linspace(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn cmd_deform(g: &Global, field: &Path, map: &Path, ab: (Option<f64>, Option<f64>), frames: usize, ks: &[f64]) -> Res<()> {
    let (fs, is) = load_tc(field)?;
    let m = load_map(map)?;
    let cfg = flow_cfg(g)?;
    let profile = match ab {
        (Some(a), Some(b)) => Some(BumpProfile::new(a, b)?),
        (None, Some(b)) => Some(BumpProfile::from_b(b)?),
        (None, None) => None,
        (Some(_), None) => return Err(Fail::input("--a needs --b")),
    };
    if frames == 1 {
        return Err(Fail::input("--frames must be 0 or at least 2"));
    }
    if frames > 0 && g.out.is_none() {
        return Err(Fail::input("--frames needs --out"));
    }
    let grid = node_grid(&fs, &is, g, &cfg)?;
    let lambda = match m.as_flow_shift() {
        Some(a) => a.clone(),
        None => ShiftFn::Sampled(Arc::new(SampledShift::new(recover(&fs, &is, &m, &grid, None, &cfg)?, &is))),
    };
    let fix = fix_boundary(&fs, &is, &m, &lambda, &grid, profile, &cfg)?;
    let ts = if frames >= 2 { linspace(frames) } else { linspace(5) };
    let mut state = DeformState::new(&fs, fix.profile, ks.to_vec(), ts.clone());
    let family = {
        let lambda = lambda.clone();
        move |k: f64| {
            let l = lambda.clone();
            ShiftFn::func(move |z| k * l.eval(z))
        }
    };
    let homotopy = state.evaluate(&fs, &is, &family, &grid, &cfg)?.clone();
    let sink = Sink::new(g)?;
    let mut names = Vec::new();
    if frames > 0 {
        let base = orbit_curves(&fs, &is, &FRAME_LEVELS, 128, g.tol)?;
        for (i, t) in ts.iter().enumerate() {
            let a_t = MapSpec::flow_shift(beta(&is, &lambda, &fix.profile, *t));
            let img = mapped_curves(&fs, &a_t, &base, g.tol)?;
            let name = format!("frame_{i:03}.svg");
            sink.emit(&name, &render_svg(&[base.clone(), img].concat()))?;
            names.push(name);
        }
    }
    let run = DeformRun {
        map: m.name.clone(),
        profile: fix.profile,
        inner_residual: fix.inner_residual,
        boundary_residual: fix.boundary_residual,
        min_lie_fixed: fix.min_lie,
        homotopy,
        frames: names,
    };
    if g.json || g.out.is_some() {
        sink.emit("deform.json", &json(&run)?)?;
    }
    if !g.json {
        let h = &run.homotopy;
        println!("profile a = {}, b = {}", num(run.profile.a), num(run.profile.b));
        println!("inner residual = {}", num(run.inner_residual));
        println!("boundary residual = {}", num(run.boundary_residual));
        println!("min F(β) = {}", num(h.min_lie));
        println!("factorization error = {}", num(h.factorization_error));
        println!("zero set deviation = {}", num(h.zero_set_deviation));
        println!("samples = {}", h.samples);
    }
    if run.homotopy.min_lie <= -1.0 {
        return Err(Fail::criterion(format!("F(β) reaches {} along the homotopy", num(run.homotopy.min_lie))));
    }
    Ok(())
}

fn cmd_verify(g: &Global, samples: usize) -> Res<()> {
    let cfg = VerifyConfig { seed: g.seed, tol: g.tol, levels: g.grid.0, angles: g.grid.1, samples };
    let summary = run_verify(&cfg).map_err(Fail::input)?;
    let sink = Sink::new(g)?;
    if g.json {
        sink.emit("verify.json", &(summary.to_json() + "\n"))?;
    } else {
        let mut s = String::new();
        for c in &summary.checks {
            let rel = match c.relation {
                Relation::AtMost => "<=",
                Relation::Above => ">",
            };
            let measured = c.measured.map_or_else(|| "-".to_string(), num);
            s += &format!("{} {:<40} {measured:>24} {rel} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, num(c.bound));
            if let Some(e) = &c.error {
                s += &format!("  ({e})");
            }
            s.push('\n');
        }
        let passed = summary.checks.iter().filter(|c| c.pass).count();
        s += &format!("{passed}/{} checks passed (seed {}, tol {}, grid {}x{})\n", summary.checks.len(), g.seed, num(g.tol), g.grid.0, g.grid.1);
        sink.emit("verify.txt", &s)?;
    }
    if !summary.passed {
        let names: Vec<&str> = summary.failures().map(|c| c.name.as_str()).collect();
        return Err(Fail::criterion(format!("failed checks: {}", names.join(", "))));
    }
    Ok(())
}

fn cmd_plot(g: &Global, file: &Path, levels: &[f64], map: Option<&Path>, points: usize) -> Res<()> {
    let (fs, is) = load_tc(file)?;
    if levels.is_empty() || levels.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
        return Err(Fail::input("levels must lie in (0, 1]"));
    }
    if points < 8 {
        return Err(Fail::input("need at least 8 points per orbit"));
    }
    let mut curves = orbit_curves(&fs, &is, levels, points, g.tol)?;
    if let Some(p) = map {
        let m = load_map(p)?;
        curves.extend(mapped_curves(&fs, &m, &curves, g.tol)?);
    }
    Sink::new(g)?.emit("plot.svg", &render_svg(&curves))
}
