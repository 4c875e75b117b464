//! The six commands. Each returns a finished report; files are written here.

use std::path::{Path, PathBuf};
use std::time::Instant;

use manifold_mean_core::averaging::{average_family, c1_distance, invariance_check, midpoint, morph};
use manifold_mean_core::{SolverConfig, Submanifold64};
use serde_json::{json, Value};

use crate::diagnose::{geometry_suite, radius_suite};
use crate::error::CliError;
use crate::mesh_io::{extension, obj_string, write_mesh};
use crate::report::{section_contracts, ContractRow, RunReport, SliceSummary};
use crate::scene::{MeshFormat, Scene};
use crate::selftest::{averaging_suite, derivative_suite, fixed_rotation_suite, identity_suite};

/// Largest invariance defect of an orbit average.
pub const INVARIANCE_TOL: f64 = 1e-7;
/// Default number of dyadic refinements of a morph.
pub const DEFAULT_DEPTH: u32 = 3;

/// Command-line overrides of scene settings.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub depth: Option<u32>,
    pub rescale: bool,
}

/// Settings of the selftest command.
#[derive(Debug, Clone, Copy)]
pub struct SelftestArgs {
    pub n_max: usize,
    pub k_max: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SelftestArgs {
    fn default() -> Self {
        Self { n_max: 12, k_max: 4, trials: 1000, seed: 42 }
    }
}

/// Parsed scene plus resolved overrides.
pub struct Context {
    pub scene: Scene,
    pub solver: SolverConfig<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: MeshFormat,
    pub depth: u32,
    pub rescale: bool,
}

impl Context {
    pub fn new(scene: Scene, o: &Overrides) -> Result<Self, CliError> {
        let mut solver = scene.solver.clone();
        if let Some(t) = o.tol {
            if !(t > 0.0) {
                return Err(CliError::Validation { key: "--tol".into(), message: "must be positive".into() });
            }
            solver.tol = t;
        }
        if let Some(m) = o.max_iter {
            if m == 0 {
                return Err(CliError::Validation { key: "--max-iter".into(), message: "must be positive".into() });
            }
            solver.max_iter = m;
        }
        let depth = o.depth.unwrap_or(DEFAULT_DEPTH);
        if depth == 0 {
            return Err(CliError::Validation { key: "--depth".into(), message: "must be at least 1".into() });
        }
        Ok(Self {
            seed: o.seed.unwrap_or_else(|| scene.seed()),
            out_dir: o.out_dir.clone().unwrap_or_else(|| scene.raw.outputs.dir.clone()),
            format: scene.raw.outputs.mesh_format,
            solver,
            depth,
            rescale: o.rescale,
            scene,
        })
    }

    fn report(&self, command: &str) -> RunReport {
        let scene = serde_json::to_value(&self.scene.raw).expect("scene serializes");
        let s = &self.solver;
        let solver = json!({
            "tol": s.tol,
            "max_iter": s.max_iter,
            "jacobian_step": s.jacobian_step,
            "r_max": s.r_max,
            "epsilon_max": s.epsilon_max,
        });
        RunReport::new(command, scene, self.seed, solver)
    }

    fn mesh_path(&self, stem: &str) -> PathBuf {
        self.out_dir.join(format!("{stem}.{}", extension(self.format)))
    }

    fn report_path(&self, command: &str) -> PathBuf {
        let name = self.scene.raw.outputs.report.clone().unwrap_or_else(|| format!("{command}_report.json"));
        self.out_dir.join(name)
    }

    /// Fail early when the mesh format cannot represent `topology`.
    fn check_format(&self, topology: &Submanifold64) -> Result<(), CliError> {
        if self.format == MeshFormat::Obj {
            obj_string(topology, topology.mesh_points())?;
        }
        Ok(())
    }

    fn pair(&self) -> Result<(&Submanifold64, &Submanifold64), CliError> {
        match (&self.scene.group, self.scene.members.as_slice()) {
            (None, [(_, a), (_, b)]) => Ok((a, b)),
            _ => Err(CliError::Validation {
                key: "family.members".into(),
                message: "this command needs exactly two explicit members".into(),
            }),
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), message: e.to_string() })
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

/// Write the report, stamping the wall time.
fn finish(ctx_dir: &Path, path: &Path, mut report: RunReport, start: Instant) -> Result<RunReport, CliError> {
    report.finish(start.elapsed().as_secs_f64());
    create_dir(ctx_dir)?;
    std::fs::write(path, report.to_json()).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(report)
}

fn c1_json(d: &manifold_mean_core::C1Distance<f64>) -> Value {
    json!({ "value": d.value, "c0": d.c0, "angular": d.angular })
}

pub fn cmd_average(ctx: &Context) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let family = ctx.scene.family()?;
    ctx.check_format(family.reference_member())?;
    let section = average_family(&family, &ctx.solver)?;
    let mut report = ctx.report("average");
    report.epsilon = Some(section.summary.epsilon);
    report.contracts = section_contracts(&section, ctx.solver.tol, "");
    if let Some(group) = &ctx.scene.group {
        let inv = invariance_check(group, &section);
        report.invariance = Some(inv);
        report.contracts.push(ContractRow::below("invariance", inv, INVARIANCE_TOL).with_note(format!("group of order {}", group.len())));
    }
    report.slices = Some(SliceSummary::of(&section));
    report.data = json!({
        "r_max": section.summary.r_max,
        "reference": section.reference,
        "members": family.len(),
        "member_c1": section.summary.member_c1.iter().map(c1_json).collect::<Vec<_>>(),
    });
    create_dir(&ctx.out_dir)?;
    let mesh = ctx.mesh_path("average");
    write_mesh(&mesh, ctx.format, &section.base, &section.points, &section.offset_norms())?;
    report.artifacts.push(file_name(&mesh));
    finish(&ctx.out_dir, &ctx.report_path("average"), report, start)
}

pub fn cmd_midpoint(ctx: &Context) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let (a, b) = ctx.pair()?;
    ctx.check_format(a)?;
    let section = midpoint(a, b, &ctx.solver)?;
    let mut report = ctx.report("midpoint");
    report.epsilon = Some(section.summary.epsilon);
    report.contracts = section_contracts(&section, ctx.solver.tol, "");
    report.slices = Some(SliceSummary::of(&section));
    report.data = json!({
        "r_max": section.summary.r_max,
        "weights": "equal; scene weights are not used by midpoint",
        "member_c1": section.summary.member_c1.iter().map(c1_json).collect::<Vec<_>>(),
    });
    create_dir(&ctx.out_dir)?;
    let mesh = ctx.mesh_path("midpoint");
    write_mesh(&mesh, ctx.format, &section.base, &section.points, &section.offset_norms())?;
    report.artifacts.push(file_name(&mesh));
    finish(&ctx.out_dir, &ctx.report_path("midpoint"), report, start)
}

pub fn cmd_morph(ctx: &Context) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let (a, b) = ctx.pair()?;
    ctx.check_format(a)?;
    ctx.check_format(b)?;
    let frames = morph(a, b, ctx.depth, &ctx.solver)?;
    let mut report = ctx.report("morph");
    create_dir(&ctx.out_dir)?;
    let mut rows = Vec::new();
    let mut listing = Vec::new();
    let slack = manifold_mean_core::averaging::CONTRACT_SLACK;
    let mut epsilon: f64 = 0.0;
    for (i, f) in frames.iter().enumerate() {
        let mesh = ctx.mesh_path(&format!("morph_{i:03}"));
        write_mesh(&mesh, ctx.format, &f.surface, &f.points, &f.offset_norms)?;
        report.artifacts.push(file_name(&mesh));
        let mut entry = json!({ "index": i, "time": f.time, "file": file_name(&mesh) });
        if let Some(s) = &f.summary {
            let label = format!("t={} ", f.time);
            epsilon = epsilon.max(s.epsilon);
            rows.push(ContractRow::at_most(format!("{label}c0_offset"), s.max_offset, s.c0_bound() + slack).with_ratio());
            rows.push(ContractRow::at_most(format!("{label}c1_distance"), s.max_member_c1(), s.c1_bound() + slack).with_ratio());
            rows.push(ContractRow::at_most(format!("{label}slice_radius"), s.max_offset, s.r_max));
            rows.push(ContractRow::at_most(
                format!("{label}slice_residual"),
                s.max_residual,
                ctx.solver.tol * (1.0 + s.max_offset),
            ));
            rows.push(ContractRow::above(format!("{label}slice_jacobian_min_eigenvalue"), s.min_jacobian_eigenvalue, 0.0));
            entry["epsilon"] = json!(s.epsilon);
            entry["max_offset"] = json!(s.max_offset);
            entry["max_iterations"] = json!(s.max_iterations);
        }
        listing.push(entry);
    }
    report.epsilon = Some(epsilon);
    report.contracts = rows;
    report.data = json!({ "depth": ctx.depth, "frames": listing });
    finish(&ctx.out_dir, &ctx.report_path("morph"), report, start)
}

pub fn cmd_distance(ctx: &Context) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let family = ctx.scene.family()?;
    let members = family.members();
    let mut matrix = Vec::with_capacity(members.len());
    let mut epsilon: f64 = 0.0;
    for (i, (_, a)) in members.iter().enumerate() {
        let mut row = Vec::with_capacity(members.len());
        for (j, (_, b)) in members.iter().enumerate() {
            if i == j {
                row.push(Value::Null);
                continue;
            }
            let d = c1_distance(a, b)?;
            epsilon = epsilon.max(d.value);
            row.push(c1_json(&d));
        }
        matrix.push(Value::Array(row));
    }
    let mut report = ctx.report("distance");
    report.epsilon = Some(epsilon);
    report.data = json!({
        "c1_distance": matrix,
        "note": "entry [i][j] is c1_distance(member i, member j), measured over the mesh of member j",
        "epsilon_max": ctx.solver.epsilon_max,
        "averaging_admissible": epsilon < ctx.solver.epsilon_max,
    });
    finish(&ctx.out_dir, &ctx.report_path("distance"), report, start)
}

pub fn cmd_diagnose(ctx: &Context) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let member = match (&ctx.scene.group, ctx.scene.members.as_slice()) {
        (None, [(_, m)]) => m.clone(),
        _ => {
            return Err(CliError::Validation {
                key: "family.members".into(),
                message: "diagnose needs a single explicit member".into(),
            })
        }
    };
    let before = member.gentleness_report()?;
    let factor = if ctx.rescale { before.rescale_factor() } else { 1.0 };
    let member = if factor != 1.0 { member.rescaled(factor)? } else { member };
    let gentleness = if factor != 1.0 { member.gentleness_report()? } else { before.clone() };
    let mut report = ctx.report("diagnose");
    report.estimates.push(geometry_suite(&gentleness));
    for (i, &r) in ctx.scene.diagnose.radii.iter().enumerate() {
        report.estimates.push(radius_suite(&member, r, ctx.scene.diagnose.samples, ctx.seed.wrapping_add(i as u64)));
    }
    report.data = json!({
        "rescale_factor": factor,
        "gentle": gentleness.gentle,
        "second_form_norm": gentleness.second_form_norm,
        "injectivity_estimate": gentleness.injectivity_estimate,
        "ambient_curvature_bound": gentleness.curvature_bound,
        "geometry_scale": gentleness.scale_c,
        "geometry_scale_before_rescale": before.scale_c,
    });
    finish(&ctx.out_dir, &ctx.report_path("diagnose"), report, start)
}

pub fn cmd_selftest(args: SelftestArgs, out_dir: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    if args.n_max < 2 || args.k_max == 0 {
        return Err(CliError::Validation { key: "--n-max/--k-max".into(), message: "need n_max >= 2 and k_max >= 1".into() });
    }
    let config = json!({ "n_max": args.n_max, "k_max": args.k_max, "trials": args.trials });
    let mut report = RunReport::new("selftest", config, args.seed, Value::Null);
    report.estimates = vec![
        identity_suite(args.n_max, args.k_max, args.trials, args.seed),
        averaging_suite(args.trials, 6, 0.3, args.seed.wrapping_add(1)),
        derivative_suite(args.trials, args.seed.wrapping_add(2)),
        fixed_rotation_suite(0.3),
    ];
    finish(out_dir, &out_dir.join("selftest_report.json"), report, start)
}
