//! Subcommands. Each one computes its complete result before anything is
//! written; numerical failures that still leave useful data come back as an
//! `Outcome` with `failure` set.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::scenario::{LatticeStart, ScenarioFile};
use super::table::{Cell, Table};
use crate::dynamics::{evolve, DynamicsParams, StopRule, Trajectory};
use crate::equilibria::{
    design_intensity_ratio, design_wavenumber, find_equilibrium, find_equilibrium_with, linearize_pair_in_lattice,
    normal_modes, zero_force_grid, DesignOptions, EquilibriumOptions, EquilibriumReport,
};
use crate::error::{invalid, Error, Result};
use crate::forcefield::{pair_forces_approx, ChainSystem};
use crate::lattice::{perturbed_lattice_forces, LatticeScenario};
use crate::output::{write_atomic, TOOL_VERSION};
use crate::wavecore::{intensity_profile, reflection_transmission, solve_fields};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fields,
    Forces,
    Relax,
    Evolve,
    Sweep,
    Design,
    Modes,
    Zerolines,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fields => "fields",
            Command::Forces => "forces",
            Command::Relax => "relax",
            Command::Evolve => "evolve",
            Command::Sweep => "sweep",
            Command::Design => "design",
            Command::Modes => "modes",
            Command::Zerolines => "zerolines",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a command needs: the validated scenario and its provenance.
#[derive(Debug, Clone)]
pub struct Context {
    pub scenario: ScenarioFile,
    pub hash: String,
    /// Worker count for parallel commands; `None` uses all cores.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Table(Table),
    Json(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// Appended to the file name stem.
    pub suffix: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: Command,
    pub artifacts: Vec<Artifact>,
    /// Set when the outputs are partial.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(command: Command) -> Self {
        Outcome {
            command,
            artifacts: Vec::new(),
            failure: None,
        }
    }

    fn table(&mut self, suffix: &str, t: Table) {
        self.artifacts.push(Artifact {
            suffix: suffix.into(),
            payload: Payload::Table(t),
        });
    }

    fn json(&mut self, suffix: &str, v: Value) {
        self.artifacts.push(Artifact {
            suffix: suffix.into(),
            payload: Payload::Json(v),
        });
    }

    /// File names and contents, in artifact order.
    pub fn render(&self, ctx: &Context) -> Vec<(String, String)> {
        let s = &ctx.scenario;
        let stem = s.output.prefix.clone().unwrap_or_else(|| self.command.name().to_string());
        let partial = self.failure.is_some();
        let mut extra = vec![
            ("command", self.command.name().to_string()),
            ("length_unit", tag(&s.units.length)),
        ];
        if partial {
            extra.push(("partial", "true".into()));
        }
        let provenance = |body: Value| -> String {
            let mut m = Map::new();
            m.insert("tool_version".into(), json!(TOOL_VERSION));
            m.insert("scenario_sha256".into(), json!(ctx.hash));
            m.insert("command".into(), json!(self.command.name()));
            m.insert("length_unit".into(), json!(tag(&s.units.length)));
            m.insert("partial".into(), json!(partial));
            if let Some(f) = &self.failure {
                m.insert("failure".into(), json!(f));
            }
            match body {
                Value::Object(b) => m.extend(b),
                other => {
                    m.insert("data".into(), other);
                }
            }
            serde_json::to_string_pretty(&Value::Object(m)).expect("json renders") + "\n"
        };
        let mut files = Vec::new();
        for a in &self.artifacts {
            let name = format!("{stem}{}", a.suffix);
            match &a.payload {
                Payload::Table(t) => {
                    if s.output.format.csv() {
                        files.push((format!("{name}.csv"), t.to_csv(&ctx.hash, &extra)));
                    }
                    if s.output.format.json() {
                        files.push((format!("{name}.json"), provenance(json!({"table": t.to_json()}))));
                    }
                }
                Payload::Json(v) => files.push((format!("{name}.json"), provenance(v.clone()))),
            }
        }
        files
    }

    /// Renders everything first, then writes each file atomically.
    pub fn write(&self, ctx: &Context, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let files = self.render(ctx);
        let mut written = Vec::new();
        for (name, contents) in files {
            let path = dir.join(name);
            write_atomic(&path, contents.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Serde tag of a unit-like enum value.
fn tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(Value::Object(m)) => m.get("reason").and_then(Value::as_str).unwrap_or_default().to_string(),
        _ => String::new(),
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| invalid(format!("worker pool: {e}")))
}

fn scaled(v: &[f64], unit: f64) -> Vec<f64> {
    v.iter().map(|x| x / unit).collect()
}

pub fn run(command: Command, ctx: &Context) -> Result<Outcome> {
    match command {
        Command::Fields => cmd_fields(ctx),
        Command::Forces => cmd_forces(ctx),
        Command::Relax => cmd_dynamics(ctx, Command::Relax),
        Command::Evolve => cmd_dynamics(ctx, Command::Evolve),
        Command::Sweep => cmd_sweep(ctx),
        Command::Design => cmd_design(ctx),
        Command::Modes => cmd_modes(ctx),
        Command::Zerolines => cmd_zerolines(ctx),
    }
}

fn complex_json(z: num_complex::Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn cmd_fields(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let chain = s.chain()?;
    let modes = s.modes();
    if modes.is_empty() {
        return Err(invalid("fields needs at least one mode"));
    }
    let xs = s.sample_points()?;
    let sol = solve_fields(&chain, &modes)?;
    let profile = intensity_profile(&sol, &xs);

    let mut t = Table::new(["x".to_string(), "I_total".to_string()]);
    t.columns.extend(modes.iter().map(|m| format!("I_{}", m.label)));
    for p in &profile {
        let mut row: Vec<Cell> = vec![(p.x / unit).into(), p.total.into()];
        row.extend(p.per_mode.iter().map(|v| Cell::from(*v)));
        t.push(row);
    }
    let mut out = Outcome::new(Command::Fields);
    out.table("", t);
    if !chain.is_empty() {
        let mut sc = Vec::new();
        for m in &modes {
            let r = reflection_transmission(&chain, m)?;
            sc.push(json!({
                "label": m.label,
                "r": complex_json(r.r),
                "t": complex_json(r.t),
                "r_right": complex_json(r.r_right),
                "reflectance": r.r.norm_sqr(),
                "transmittance": r.t.norm_sqr(),
            }));
        }
        out.json("_scattering", json!({ "modes": sc }));
    }
    Ok(out)
}

pub fn cmd_forces(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    if let Some(ds) = s.probe_distances() {
        pair_probe(ctx, &ds)
    } else if s.lattice.is_some() {
        lattice_forces(ctx)
    } else {
        chain_forces(ctx)
    }
}

fn pair_probe(ctx: &Context, ds: &[f64]) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let x = s.positions()?;
    if x.len() != 2 {
        return Err(invalid("a distance probe needs a two-scatterer chain"));
    }
    if ds.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("probe distances must be positive"));
    }
    let system = s.system()?;
    let pair = s.pair_params();
    let mut t = Table::new(["d", "F1_exact", "F2_exact", "F1_approx", "F2_approx"]);
    for &d in ds {
        let f = system.forces(&[x[0], x[0] + d])?;
        let (a1, a2) = pair.map_or((f64::NAN, f64::NAN), |p| pair_forces_approx(d, &p));
        t.push(vec![(d / unit).into(), f[0].into(), f[1].into(), a1.into(), a2.into()]);
    }
    let mut out = Outcome::new(Command::Forces);
    out.table("", t);
    Ok(out)
}

fn lattice_json(l: &LatticeScenario, unit: f64) -> Value {
    json!({
        "n": l.n,
        "k": l.k,
        "k_p": l.k_p,
        "zeta": l.zeta,
        "zeta_p": l.zeta_p,
        "i_l": l.i_l,
        "i_r": l.i_r,
        "i_p": l.i_p,
        "asymmetry": l.asymmetry,
        "d_sw": l.d_sw / unit,
        "x0": l.x0 / unit,
        "sites": scaled(&l.sites, unit),
    })
}

fn lattice_forces(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let l = s.lattice_scenario()?;
    let disp = s.lattice_displacement()?;
    let prof = perturbed_lattice_forces(&l, &disp)?;
    let lat = prof.mode(crate::lattice::LATTICE_LABEL).unwrap_or_default();
    let per = prof.mode(crate::lattice::PERTURBATION_LABEL).unwrap_or_default();
    let mut t = Table::new(["j", "x", "F_lattice", "F_perturbation", "F_total"]);
    for j in 0..l.n {
        t.push(vec![
            (j + 1).into(),
            ((l.sites[j] + disp[j]) / unit).into(),
            lat[j].into(),
            per[j].into(),
            prof.total[j].into(),
        ]);
    }
    let mut out = Outcome::new(Command::Forces);
    out.table("", t);
    out.json("_lattice", lattice_json(&l, unit));
    Ok(out)
}

fn chain_forces(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let x = s.positions()?;
    let prof = s.system()?.profile(&x)?;
    let mut t = Table::new(["j".to_string(), "x".to_string(), "F_total".to_string()]);
    t.columns.extend(prof.per_mode.iter().map(|m| format!("F_{}", m.label)));
    for j in 0..x.len() {
        let mut row: Vec<Cell> = vec![(j + 1).into(), (x[j] / unit).into(), prof.total[j].into()];
        row.extend(prof.per_mode.iter().map(|m| Cell::from(m.forces[j])));
        t.push(row);
    }
    let mut out = Outcome::new(Command::Forces);
    out.table("", t);
    Ok(out)
}

fn trajectory_table(traj: &Trajectory) -> Table {
    let n = traj.final_positions().len();
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|j| format!("x_{j}")));
    if traj.velocities.is_some() {
        cols.extend((1..=n).map(|j| format!("v_{j}")));
    }
    let mut t = Table::new(cols);
    for (i, time) in traj.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(*time).into()];
        row.extend(traj.positions[i].iter().map(|v| Cell::from(*v)));
        if let Some(v) = &traj.velocities {
            row.extend(v[i].iter().map(|v| Cell::from(*v)));
        }
        t.push(row);
    }
    t
}

fn intensity_table(traj: &Trajectory) -> Table {
    let mut t = Table::new(["t", "x", "I_total"]);
    for snap in &traj.intensity {
        for (x, i) in snap.x.iter().zip(&snap.total) {
            t.push(vec![snap.t.into(), (*x).into(), (*i).into()]);
        }
    }
    t
}

fn relative_stop(params: &DynamicsParams, system: &ChainSystem) -> bool {
    match params.stop {
        StopRule::Absolute => false,
        StopRule::Relative => true,
        StopRule::Auto => system.len() > 1 && system.is_translation_invariant(),
    }
}

fn report_json(r: &EquilibriumReport, unit: f64) -> Value {
    json!({
        "positions": scaled(&r.positions, unit),
        "gaps": scaled(&r.gaps, unit),
        "residual": r.residual,
        "forces": r.forces,
        "com_force": r.com_force,
        "classification": r.classification,
        "eigenvalues": r.eigenvalues,
        "jacobian": r.jacobian,
        "relative": r.relative,
        "iterations": r.iterations,
    })
}

/// Summary of a run; `traj` is already in user length units.
fn summary_json(traj: &Trajectory) -> Value {
    json!({
        "termination": traj.termination,
        "final_time": traj.final_time(),
        "final_positions": traj.final_positions(),
        "final_gaps": traj.final_gaps(),
        "com_velocity": traj.com_velocity(),
        "residual": traj.residual,
        "stored_samples": traj.times.len(),
    })
}

fn insert(v: &mut Value, key: &str, x: Value) {
    if let Value::Object(m) = v {
        m.insert(key.into(), x);
    }
}

fn polish(system: &ChainSystem, x: &[f64], relative: bool, unit: f64) -> (Value, Option<String>) {
    match find_equilibrium(system, x, relative) {
        Ok(r) => (report_json(&r, unit), None),
        Err(Error::NoConvergence { best, .. }) => {
            let msg = "equilibrium refinement did not converge".to_string();
            let mut v = report_json(&best, unit);
            insert(&mut v, "converged", json!(false));
            (v, Some(msg))
        }
        Err(e) => (Value::Null, Some(format!("equilibrium refinement failed: {e}"))),
    }
}

fn cmd_dynamics(ctx: &Context, command: Command) -> Result<Outcome> {
    let s = &ctx.scenario;
    if s.lattice.is_some() && s.chain.is_none() {
        return lattice_dynamics(ctx, command);
    }
    let unit = s.length_scale();
    let system = s.system()?;
    let params = s.dynamics()?;
    let x0 = s.positions()?;
    let v0 = s.initial_velocities()?;
    let traj = evolve(&system, &x0, v0.as_deref(), &params)?;

    let mut out = Outcome::new(command);
    let user = traj.in_length_unit(unit);
    let mut summary = summary_json(&user);
    if let Err(e) = traj.check() {
        out.failure = Some(e.to_string());
    } else if command == Command::Relax {
        let (eq, fail) = polish(&system, traj.final_positions(), relative_stop(&params, &system), unit);
        insert(&mut summary, "equilibrium", eq);
        out.failure = fail;
    }
    out.table("", trajectory_table(&user));
    if !user.intensity.is_empty() {
        out.table("_intensity", intensity_table(&user));
    }
    out.json("_summary", summary);
    Ok(out)
}

fn lattice_dynamics(ctx: &Context, command: Command) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let block = s.lattice.as_ref().expect("lattice block present");
    let l = s.lattice_scenario()?;
    let disp = s.lattice_displacement()?;
    let params = s.dynamics()?;
    let v0 = s.initial_velocities()?;
    let system = l.system()?;
    let start = match block.start {
        LatticeStart::Sites => l.sites.clone(),
        LatticeStart::Equilibrium => {
            find_equilibrium_with(&system, &l.sites, false, &EquilibriumOptions::default())?.positions
        }
    };
    let shift = |x: &[f64]| -> Vec<f64> { x.iter().zip(&disp).map(|(a, b)| a + b).collect() };
    let traj = evolve(&system, &shift(&start), v0.as_deref(), &params)?;
    let baseline = if block.compare_baseline {
        let b = l.with_perturbation_intensity(0.0);
        Some(evolve(&b.system()?, &shift(&b.sites), v0.as_deref(), &params)?)
    } else {
        None
    };

    let mut out = Outcome::new(command);
    let (t0, t1) = (0.0, params.t_end);
    let user = traj.in_length_unit(unit);
    let mut summary = summary_json(&user);
    insert(&mut summary, "lattice", lattice_json(&l, unit));
    insert(&mut summary, "start_positions", json!(scaled(&shift(&start), unit)));
    insert(&mut summary, "oscillation_amplitudes", json!(user.oscillation_amplitudes(t0, t1)));
    let ke = traj.mean_kinetic_energy(params.mass, t0, t1);
    insert(&mut summary, "mean_kinetic_energy", json!(ke));
    let mut failures = Vec::new();
    if let Err(e) = traj.check() {
        failures.push(e.to_string());
    } else if command == Command::Relax {
        let (eq, fail) = polish(&system, traj.final_positions(), false, unit);
        insert(&mut summary, "equilibrium", eq);
        failures.extend(fail);
    }
    out.table("", trajectory_table(&user));
    if !user.intensity.is_empty() {
        out.table("_intensity", intensity_table(&user));
    }
    if let Some(b) = baseline {
        let bu = b.in_length_unit(unit);
        let bke = b.mean_kinetic_energy(params.mass, t0, t1);
        let mut bs = summary_json(&bu);
        insert(&mut bs, "oscillation_amplitudes", json!(bu.oscillation_amplitudes(t0, t1)));
        insert(&mut bs, "mean_kinetic_energy", json!(bke));
        insert(&mut summary, "baseline", bs);
        if let (Some(a), Some(b)) = (&ke, &bke) {
            insert(&mut summary, "kinetic_energy_ratio_first", json!(a[0] / b[0]));
        }
        if let Err(e) = b.check() {
            failures.push(format!("baseline: {e}"));
        }
        out.table("_baseline", trajectory_table(&bu));
    }
    if !failures.is_empty() {
        out.failure = Some(failures.join("; "));
    }
    out.json("_summary", summary);
    Ok(out)
}

struct CellResult {
    status: String,
    termination: String,
    final_time: f64,
    com_velocity: f64,
    residual: f64,
    stability: String,
    gaps: Vec<f64>,
}

impl CellResult {
    fn failed(status: String) -> Self {
        CellResult {
            status,
            termination: String::new(),
            final_time: f64::NAN,
            com_velocity: f64::NAN,
            residual: f64::NAN,
            stability: String::new(),
            gaps: Vec::new(),
        }
    }
}

fn sweep_cell(base: &Value, paths: &[&str], values: &[f64]) -> CellResult {
    let mut v = base.clone();
    for (p, x) in paths.iter().zip(values) {
        if let Some(slot) = v.pointer_mut(p) {
            *slot = json!(x);
        }
    }
    let cell = match ScenarioFile::from_value(v) {
        Ok(c) => c,
        Err(e) => return CellResult::failed(format!("invalid: {e}")),
    };
    let run = || -> Result<CellResult> {
        let unit = cell.length_scale();
        let system = cell.system()?;
        let params = cell.dynamics()?;
        let v0 = cell.initial_velocities()?;
        let traj = evolve(&system, &cell.positions()?, v0.as_deref(), &params)?;
        let opts = EquilibriumOptions {
            relax_fallback: false,
            ..EquilibriumOptions::default()
        };
        let stability = if traj.is_partial() {
            String::new()
        } else {
            find_equilibrium_with(&system, traj.final_positions(), relative_stop(&params, &system), &opts)
                .map(|r| tag(&r.classification))
                .unwrap_or_else(|_| "unknown".into())
        };
        Ok(CellResult {
            status: if traj.is_partial() { "separation_violation" } else { "ok" }.into(),
            termination: tag(&traj.termination),
            final_time: traj.final_time(),
            com_velocity: traj.com_velocity().map_or(f64::NAN, |v| v / unit),
            residual: traj.residual,
            stability,
            gaps: scaled(&traj.final_gaps(), unit),
        })
    };
    run().unwrap_or_else(|e| CellResult::failed(format!("error: {e}")))
}

pub fn cmd_sweep(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let sweep = s.sweep.as_ref().ok_or_else(|| invalid("scenario has no sweep block"))?;
    if sweep.parameters.is_empty() {
        return Err(invalid("empty sweep grid"));
    }
    if s.chain.is_none() || s.dynamics.is_none() {
        return Err(invalid("sweep cells need chain and dynamics blocks"));
    }
    let mut base = serde_json::to_value(s).map_err(|e| invalid(e.to_string()))?;
    insert(&mut base, "sweep", Value::Null);
    let paths: Vec<&str> = sweep.parameters.iter().map(|p| p.path.as_str()).collect();
    for p in &paths {
        match base.pointer(p) {
            Some(Value::Number(_)) | Some(Value::Null) => {}
            Some(_) => return Err(invalid(format!("sweep path {p} does not address a number"))),
            None => return Err(invalid(format!("sweep path {p} does not exist in the scenario"))),
        }
    }
    let axes: Vec<Vec<f64>> = sweep.parameters.iter().map(|p| p.range().values()).collect();
    let total: usize = axes.iter().map(Vec::len).product();
    if total == 0 {
        return Err(invalid("empty sweep grid"));
    }
    let grid: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut vals = vec![0.0; axes.len()];
            for (a, axis) in axes.iter().enumerate().rev() {
                vals[a] = axis[idx % axis.len()];
                idx /= axis.len();
            }
            vals
        })
        .collect();
    let results: Vec<CellResult> =
        pool(ctx.threads)?.install(|| grid.par_iter().map(|vals| sweep_cell(&base, &paths, vals)).collect());

    let max_gaps = results.iter().map(|r| r.gaps.len()).max().unwrap_or(0);
    let mut cols: Vec<String> = paths.iter().map(|p| p.to_string()).collect();
    cols.extend(
        ["status", "termination", "final_time", "com_velocity", "residual", "stability"].map(String::from),
    );
    cols.extend((1..=max_gaps).map(|j| format!("gap_{j}")));
    let mut t = Table::new(cols);
    for (vals, r) in grid.iter().zip(results) {
        let mut row: Vec<Cell> = vals.iter().map(|v| Cell::from(*v)).collect();
        row.extend([
            r.status.into(),
            r.termination.into(),
            r.final_time.into(),
            r.com_velocity.into(),
            r.residual.into(),
            r.stability.into(),
        ]);
        row.extend(r.gaps.iter().map(|g| Cell::from(*g)));
        t.push(row);
    }
    let mut out = Outcome::new(Command::Sweep);
    out.table("", t);
    Ok(out)
}

pub fn cmd_design(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let block = s.design.as_ref().ok_or_else(|| invalid("scenario has no design block"))?;
    let ds = s.design_distances()?;
    if ds.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("design distances must be positive"));
    }
    let mut out = Outcome::new(Command::Design);
    if let Some(ratio) = block.kz_ratio {
        let k_z = ratio * block.k_y;
        let mut t = Table::new(["d", "k_z", "P1", "P2", "P1_physical", "P2_physical"]);
        for &d in &ds {
            let r = design_intensity_ratio(d, block.k_y, k_z, block.zeta);
            t.push(vec![
                (d / unit).into(),
                k_z.into(),
                r.p1.into(),
                r.p2.into(),
                r.p1_physical.into(),
                r.p2_physical.into(),
            ]);
        }
        out.table("", t);
        return Ok(out);
    }
    let opts = DesignOptions::band(block.k_max);
    let per_d: Vec<Result<Vec<_>>> = pool(ctx.threads)?
        .install(|| ds.par_iter().map(|&d| design_wavenumber(d, block.k_y, block.zeta, &opts)).collect());
    let mut t = Table::new([
        "d", "status", "k_z", "branch", "n", "seed", "P1", "P2", "physical", "F1", "F2", "stable",
    ]);
    for (&d, res) in ds.iter().zip(per_d) {
        match res {
            Ok(cands) if cands.is_empty() => t.push(vec![(d / unit).into(), "no_candidates".into()]),
            Ok(cands) => {
                for c in cands {
                    t.push(vec![
                        (d / unit).into(),
                        "ok".into(),
                        c.k_z.into(),
                        (c.branch as i64).into(),
                        (c.n as i64).into(),
                        c.seed.into(),
                        c.p1.into(),
                        c.p2.into(),
                        c.physical.into(),
                        c.f1.into(),
                        c.f2.into(),
                        c.stable.into(),
                    ]);
                }
            }
            Err(Error::NoSolution(_)) => t.push(vec![(d / unit).into(), "no_solution".into()]),
            Err(e) if e.is_input_error() => return Err(e),
            Err(e) => t.push(vec![(d / unit).into(), format!("error: {e}").into()]),
        }
    }
    out.table("", t);
    Ok(out)
}

pub fn cmd_modes(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let block = s.lattice.as_ref().ok_or_else(|| invalid("scenario has no lattice block"))?;
    if block.n != 2 {
        return Err(invalid("modes needs a two-site lattice (lattice.n = 2)"));
    }
    let l = s.lattice_scenario()?;
    let model = linearize_pair_in_lattice(&l, block.mass, block.fd_step)?;
    let normal = match normal_modes(&model) {
        Ok(m) => json!(m),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mut out = Outcome::new(Command::Modes);
    out.json(
        "",
        json!({
            "derivative_units": "internal (k_ref = 1)",
            "lattice": lattice_json(&l, unit),
            "model": model,
            "normal_modes": normal,
        }),
    );
    if let Some(r) = &block.i_p_sweep {
        let mut t = Table::new([
            "I_p", "status", "K", "kappa1", "kappa2", "F_ext", "F_ext1", "F_ext2", "omega1", "omega2",
        ]);
        for i_p in r.values() {
            match linearize_pair_in_lattice(&l.with_perturbation_intensity(i_p), block.mass, block.fd_step) {
                Ok(m) => t.push(vec![
                    i_p.into(),
                    "ok".into(),
                    m.k_spring.into(),
                    m.kappa1.into(),
                    m.kappa2.into(),
                    m.f_ext.into(),
                    m.f_ext1.into(),
                    m.f_ext2.into(),
                    m.omega1.unwrap_or(f64::NAN).into(),
                    m.omega2.unwrap_or(f64::NAN).into(),
                ]),
                Err(e) => t.push(vec![i_p.into(), format!("error: {e}").into()]),
            }
        }
        out.table("_ip_sweep", t);
    }
    Ok(out)
}

pub fn cmd_zerolines(ctx: &Context) -> Result<Outcome> {
    let s = &ctx.scenario;
    let unit = s.length_scale();
    let system = s.system()?;
    if system.len() != 3 {
        return Err(invalid("zerolines needs a three-scatterer chain"));
    }
    let (d1, d2) = s.grid_axes()?;
    if d1.iter().chain(&d2).any(|d| !(*d > 0.0)) {
        return Err(invalid("grid distances must be positive"));
    }
    let grid = pool(ctx.threads)?.install(|| zero_force_grid(&system, &d1, &d2))?;
    let mut t = Table::new(["d1", "d2", "F1", "F2", "F3"]);
    for i in 0..d1.len() {
        for j in 0..d2.len() {
            t.push(vec![
                (d1[i] / unit).into(),
                (d2[j] / unit).into(),
                grid.at(0, i, j).into(),
                grid.at(1, i, j).into(),
                grid.at(2, i, j).into(),
            ]);
        }
    }
    let mut c = Table::new(["d1_lo", "d1_hi", "d2_lo", "d2_hi"]);
    for (i, j) in grid.sign_change_cells() {
        c.push(vec![
            (d1[i] / unit).into(),
            (d1[i + 1] / unit).into(),
            (d2[j] / unit).into(),
            (d2[j + 1] / unit).into(),
        ]);
    }
    let mut out = Outcome::new(Command::Zerolines);
    out.table("", t);
    out.table("_crossings", c);
    Ok(out)
}
