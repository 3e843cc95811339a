//! Subcommand runners. Each returns an [`Outcome`] holding the report, the
//! CSV table and whether every requested certificate passed.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use lrlab_core::bounds::certify_with;
use lrlab_core::{
    certify, symmetric_grid, volume_difference_profile, BoundMetadata, BoundReport, Profile, SiteSet, VolumeSystem,
};

use crate::build::{Observable, Setup};
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::propcheck;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Bound,
    Simulate,
    Certify,
    Converge,
    PropagatorCheck,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Simulate => "simulate",
            Command::Certify => "certify",
            Command::Converge => "converge",
            Command::PropagatorCheck => "propagator-check",
            Command::Sweep => "sweep",
        }
    }

    pub fn parse(name: &str) -> Option<Command> {
        [
            Command::Bound,
            Command::Simulate,
            Command::Certify,
            Command::Converge,
            Command::PropagatorCheck,
            Command::Sweep,
        ]
        .into_iter()
        .find(|c| c.name() == name)
    }
}

/// Result of one run, ready to be written to disk.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub csv: String,
    pub passed: bool,
    /// One-line human readable summary.
    pub summary: String,
    /// Sweep members, written to numbered subdirectories.
    pub children: Vec<(String, Outcome)>,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct Constants {
    f_norm: f64,
    convolution: f64,
    norm_phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_factor: Option<lrlab_core::DistanceFactor>,
}

fn constants(setup: &Setup, xy: Option<(&SiteSet, &SiteSet)>) -> CliResult<Constants> {
    let distance_factor = match xy {
        Some((x, y)) => Some(setup.context.distance_factor(x, y).map_err(CliError::running)?),
        None => None,
    };
    Ok(Constants {
        f_norm: setup.context.f_norm(),
        convolution: setup.context.convolution(),
        norm_phi: setup.context.norm_phi(),
        distance_factor,
    })
}

fn metadata(setup: &Setup, a: &Observable, b: Option<&Observable>, horizon: f64) -> CliResult<BoundMetadata> {
    let distance_factor = match b {
        Some(b) => Some(setup.context.distance_factor(a.op.support(), b.op.support()).map_err(CliError::running)?),
        None => None,
    };
    Ok(BoundMetadata {
        norm_a: a.norm,
        norm_b: b.map(|b| b.norm),
        norm_phi: setup.context.norm_phi(),
        convolution: setup.context.convolution(),
        f_norm: setup.context.f_norm(),
        distance_factor,
        horizon,
    })
}

fn note_edges(setup: &Setup, sets: &[&SiteSet]) -> Vec<usize> {
    let mut edges: Vec<usize> = sets.iter().flat_map(|s| setup.edge_sites(s)).collect();
    edges.sort_unstable();
    edges.dedup();
    if !edges.is_empty() {
        log::info!("observable support touches lattice edge sites {edges:?}; boundary sets are cut off by the finite lattice");
    }
    edges
}

fn grid(cfg: &Config) -> Vec<f64> {
    symmetric_grid(cfg.grid.horizon, cfg.grid.points)
}

fn rhs_values(setup: &Setup, a: &Observable, b: &Observable, grid: &[f64]) -> CliResult<Vec<f64>> {
    grid.iter()
        .map(|&t| setup.context.lr_bound(t, a.norm, b.norm, a.op.support(), b.op.support()))
        .collect::<lrlab_core::Result<Vec<f64>>>()
        .map_err(CliError::running)
}

fn measured(setup: &Setup, a: &Observable, b: &Observable, grid: &[f64]) -> CliResult<Profile> {
    let sys = VolumeSystem::assemble(&setup.lattice.sites(), &setup.space, &setup.interaction)
        .map_err(CliError::running)?;
    sys.commutator_norm_profile(&a.op, &b.op, grid).map_err(CliError::running)
}

pub fn bound(cfg: &Config) -> CliResult<Outcome> {
    let setup = Setup::from_config(cfg)?;
    let (a, b) = setup.observable_pair(cfg)?;
    let edges = note_edges(&setup, &[a.op.support(), b.op.support()]);
    let grid = grid(cfg);
    let rhs = rhs_values(&setup, &a, &b, &grid)?;
    let mut csv = String::from("t,rhs_bound\n");
    for (t, r) in grid.iter().zip(&rhs) {
        writeln!(csv, "{},{}", fmt_f64(*t), fmt_f64(*r)).unwrap();
    }
    let report = json!({
        "command": "bound",
        "config": cfg.resolved(),
        "constants": constants(&setup, Some((a.op.support(), b.op.support())))?,
        "metadata": metadata(&setup, &a, Some(&b), cfg.grid.horizon)?,
        "edge_sites": edges,
        "times": grid,
        "rhs": rhs,
    });
    let max = rhs.iter().copied().fold(0.0, f64::max);
    Ok(Outcome { report, csv, passed: true, summary: format!("bound: max rhs {max:.6e}"), children: Vec::new() })
}

pub fn simulate(cfg: &Config) -> CliResult<Outcome> {
    let setup = Setup::from_config(cfg)?;
    let (a, b) = setup.observable_pair(cfg)?;
    let grid = grid(cfg);
    let lhs = measured(&setup, &a, &b, &grid)?;
    let mut csv = String::from("t,lhs_norm\n");
    for (t, v) in lhs.times.iter().zip(&lhs.values) {
        writeln!(csv, "{},{}", fmt_f64(*t), fmt_f64(*v)).unwrap();
    }
    let report = json!({
        "command": "simulate",
        "config": cfg.resolved(),
        "constants": constants(&setup, Some((a.op.support(), b.op.support())))?,
        "norm_a": a.norm,
        "norm_b": b.norm,
        "times": lhs.times,
        "lhs": lhs.values,
    });
    Ok(Outcome { report, csv, passed: true, summary: format!("simulate: sup lhs {:.6e}", lhs.sup()), children: Vec::new() })
}

fn certify_csv(rep: &BoundReport) -> String {
    let mut csv = String::from("t,lhs_norm,rhs_bound,margin\n");
    for i in 0..rep.times.len() {
        writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(rep.times[i]),
            fmt_f64(rep.lhs[i]),
            fmt_f64(rep.rhs[i]),
            fmt_f64(rep.margin[i])
        )
        .unwrap();
    }
    csv
}

fn verdict(rep: &BoundReport) -> String {
    match rep.worst {
        Some(w) if !rep.certified => format!("violated at t = {} with margin {:.6e}", w.t, w.margin),
        Some(w) => format!("certified, minimum margin {:.6e} at t = {}", w.margin, w.t),
        None => "empty grid".into(),
    }
}

pub fn certify_run(cfg: &Config) -> CliResult<Outcome> {
    let setup = Setup::from_config(cfg)?;
    let (a, b) = setup.observable_pair(cfg)?;
    let edges = note_edges(&setup, &[a.op.support(), b.op.support()]);
    let grid = grid(cfg);
    let lhs = measured(&setup, &a, &b, &grid)?;
    let rhs = Profile { times: grid.clone(), values: rhs_values(&setup, &a, &b, &grid)? };
    let rep = certify(&lhs, &rhs, metadata(&setup, &a, Some(&b), cfg.grid.horizon)?).map_err(CliError::running)?;
    let report = json!({
        "command": "certify",
        "config": cfg.resolved(),
        "constants": constants(&setup, Some((a.op.support(), b.op.support())))?,
        "edge_sites": edges,
        "overlap": a.op.support().intersects(b.op.support()),
        "report": rep,
    });
    let summary = format!("certify: {}", verdict(&rep));
    Ok(Outcome { report, csv: certify_csv(&rep), passed: rep.certified, summary, children: Vec::new() })
}

#[derive(Serialize)]
struct VolumePair {
    small: SiteSet,
    large: SiteSet,
    bound: lrlab_core::ThermoBound,
    report: BoundReport,
}

pub fn converge(cfg: &Config) -> CliResult<Outcome> {
    let setup = Setup::from_config(cfg)?;
    let obs = cfg.observables.as_ref().ok_or_else(|| CliError::config("observables", "missing"))?;
    let a = setup.observable(&obs.a, "observables.a")?;
    if cfg.run.volumes.len() < 2 {
        return Err(CliError::config("run.volumes", "need at least two nested volumes"));
    }
    let volumes = cfg
        .run
        .volumes
        .iter()
        .enumerate()
        .map(|(i, v)| setup.volume(v, &format!("run.volumes[{i}]")))
        .collect::<CliResult<Vec<SiteSet>>>()?;
    let large = volumes.last().unwrap().clone();
    let last = volumes.len() - 1;
    for (i, v) in volumes.iter().enumerate() {
        if !a.op.support().is_subset(v) {
            return Err(CliError::config(format!("run.volumes[{i}]"), format!("does not contain the support {} of A", a.op.support())));
        }
        if !v.is_subset(&large) {
            return Err(CliError::config(format!("run.volumes[{i}]"), format!("is not contained in the largest volume {large}")));
        }
        if i < last && v == &large {
            return Err(CliError::config(format!("run.volumes[{i}]"), "equals the largest volume"));
        }
    }
    note_edges(&setup, &[a.op.support()]);
    let horizon = cfg.grid.horizon;
    let grid = grid(cfg);
    let big = VolumeSystem::restricted(&large, &setup.space, &setup.interaction).map_err(CliError::running)?;
    let mut pairs = Vec::with_capacity(last);
    for small in &volumes[..last] {
        let sys = VolumeSystem::restricted(small, &setup.space, &setup.interaction).map_err(CliError::running)?;
        let lhs = volume_difference_profile(&sys, &big, &a.op, &grid).map_err(CliError::running)?;
        let bound = setup
            .context
            .thermo_limit_bound(horizon, a.norm, a.op.support(), small, &large)
            .map_err(CliError::running)?;
        let report = certify_with(&lhs, |_| Ok(bound.value), metadata(&setup, &a, None, horizon)?)
            .map_err(CliError::running)?;
        pairs.push(VolumePair { small: small.clone(), large: large.clone(), bound, report });
    }
    let nonincreasing = pairs.windows(2).all(|w| {
        !(w[0].small.is_subset(&w[1].small)) || w[1].bound.value <= w[0].bound.value
    });
    let mut csv = String::from("volume,t,lhs_norm,rhs_bound,margin\n");
    for p in &pairs {
        let r = &p.report;
        for i in 0..r.times.len() {
            writeln!(
                csv,
                "{},{},{},{},{}",
                p.small.len(),
                fmt_f64(r.times[i]),
                fmt_f64(r.lhs[i]),
                fmt_f64(r.rhs[i]),
                fmt_f64(r.margin[i])
            )
            .unwrap();
        }
    }
    let passed = pairs.iter().all(|p| p.report.certified);
    let failures: Vec<String> = pairs
        .iter()
        .filter(|p| !p.report.certified)
        .map(|p| format!("{} in {}: {}", p.small, p.large, verdict(&p.report)))
        .collect();
    let summary = if passed {
        format!("converge: {} volume pairs certified", pairs.len())
    } else {
        format!("converge: {}", failures.join("; "))
    };
    let report = json!({
        "command": "converge",
        "config": cfg.resolved(),
        "constants": constants(&setup, None)?,
        "horizon": horizon,
        "pairs": pairs,
        "bounds_nonincreasing": nonincreasing,
    });
    Ok(Outcome { report, csv, passed, summary, children: Vec::new() })
}

pub fn propagator_check(cfg: &Config) -> CliResult<Outcome> {
    let spec = &cfg.run.propagator;
    let results = propcheck::run_suite(spec, cfg.run.tol).map_err(CliError::running)?;
    let summary = propcheck::summarize(&results);
    let mut csv = String::from("instance,dim,unitarity,cocycle,constant,inverse,lemma_slack\n");
    for r in &results {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.instance,
            r.dim,
            fmt_f64(r.unitarity),
            fmt_f64(r.cocycle),
            fmt_f64(r.constant),
            fmt_f64(r.inverse),
            fmt_f64(r.lemma_slack)
        )
        .unwrap();
    }
    let passed = summary.passed;
    let line = format!(
        "propagator-check: {} instances, unitarity {:.2e}, cocycle {:.2e}, constant {:.2e}, inverse {:.2e}, min slack {:.2e}",
        results.len(),
        summary.unitarity,
        summary.cocycle,
        summary.constant,
        summary.inverse,
        summary.lemma_slack
    );
    let report = json!({
        "command": "propagator-check",
        "config": cfg.resolved(),
        "thresholds": propcheck::Thresholds::default(),
        "summary": summary,
        "instances": results,
    });
    Ok(Outcome { report, csv, passed, summary: line, children: Vec::new() })
}

pub fn sweep(cfg: &Config) -> CliResult<Outcome> {
    let spec = cfg.run.sweep.as_ref().ok_or_else(|| CliError::config("run.sweep", "missing"))?;
    let command = Command::parse(&spec.command)
        .filter(|c| *c != Command::Sweep)
        .ok_or_else(|| CliError::config("run.sweep.command", format!("`{}` cannot be swept", spec.command)))?;
    if spec.values.is_empty() {
        return Err(CliError::config("run.sweep.values", "no values"));
    }
    let mut base = cfg.resolved();
    if let Some(run) = base.get_mut("run").and_then(Value::as_object_mut) {
        run.remove("sweep");
    }
    match base.pointer(&spec.field) {
        Some(Value::Number(_)) => {}
        _ => return Err(CliError::config("run.sweep.field", format!("`{}` is not a scalar field of the config", spec.field))),
    }
    let configs = spec
        .values
        .iter()
        .map(|&v| {
            let mut value = base.clone();
            let n = serde_json::Number::from_f64(v)
                .ok_or_else(|| CliError::config("run.sweep.values", "values must be finite"))?;
            *value.pointer_mut(&spec.field).unwrap() = Value::Number(n);
            Config::from_value(value)
        })
        .collect::<CliResult<Vec<Config>>>()?;
    let outcomes = configs.par_iter().map(|c| run(command, c)).collect::<Vec<CliResult<Outcome>>>();
    let mut children = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        children.push(o?);
    }
    let mut csv = String::from("index,value,passed\n");
    let mut runs = Vec::new();
    for (i, (v, o)) in spec.values.iter().zip(&children).enumerate() {
        writeln!(csv, "{i},{},{}", fmt_f64(*v), o.passed).unwrap();
        runs.push(json!({ "index": i, "value": v, "passed": o.passed, "summary": o.summary }));
    }
    let passed = children.iter().all(|o| o.passed);
    let failed: Vec<String> = spec
        .values
        .iter()
        .zip(&children)
        .filter(|(_, o)| !o.passed)
        .map(|(v, o)| format!("{} = {v}: {}", spec.field, o.summary))
        .collect();
    let summary = if passed {
        format!("sweep: {} runs of {} passed", children.len(), command.name())
    } else {
        format!("sweep: {}", failed.join("; "))
    };
    let report = json!({
        "command": "sweep",
        "config": cfg.resolved(),
        "field": spec.field,
        "runs": runs,
    });
    let children = children.into_iter().enumerate().map(|(i, o)| (format!("run_{i:03}"), o)).collect();
    Ok(Outcome { report, csv, passed, summary, children })
}

pub fn run(command: Command, cfg: &Config) -> CliResult<Outcome> {
    match command {
        Command::Bound => bound(cfg),
        Command::Simulate => simulate(cfg),
        Command::Certify => certify_run(cfg),
        Command::Converge => converge(cfg),
        Command::PropagatorCheck => propagator_check(cfg),
        Command::Sweep => sweep(cfg),
    }
}
