//! The fit / aggregate / oracle / plot pipeline behind the subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use flexhull::aggregate::{fit_der, DerFit, FleetApprox};
use flexhull::oracle::{self, homothet_boundary, minkowski_sample, to_csv};
use flexhull::prototype::Homothet;
use flexhull::soscompile::audit_stats;
use flexhull::{Execution, Point};
use log::{info, warn};
use serde_json::{json, Value};

use crate::config::{ConfigError, Fleet};

/// Boundary samples written per DER for plotting and checked by `oracle`.
pub const BOUNDARY_SAMPLES: usize = 10_000;
/// Samples per inner-homothet edge checked by `oracle`.
pub const INNER_EDGE_SAMPLES: usize = 1_000;
/// Membership tolerance used by the containment checks.
pub const CHECK_TOL: f64 = 1e-6;

const PLOT_BOUNDARY_SAMPLES: usize = 720;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// One entry per failed DER: `(index, type, message)`.
    Solver(Vec<(usize, &'static str, String)>),
    Output(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Solver(_) => 2,
            RunError::Config(_) | RunError::Output(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Solver(failures) => {
                for (k, (i, kind, msg)) in failures.iter().enumerate() {
                    if k > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "DER {i} ({kind}) failed: {msg}")?;
                }
                Ok(())
            }
            RunError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// Recursively rebuilds every object with its keys in sorted order.
pub fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(
                entries
                    .into_iter()
                    .map(|(k, v)| (k, sort_keys(v)))
                    .collect(),
            )
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Pretty JSON with two-space indentation, sorted keys and a final newline.
pub fn render_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&sort_keys(v)).expect("a Value always serializes");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("output types serialize to JSON")
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)
            .map_err(|e| RunError::Output(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, body)
            .map_err(|e| RunError::Output(format!("cannot write {}: {e}", path.display())))?;
        info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, v: Value) -> Result<(), RunError> {
        self.text(name, &render_json(v))
    }

    fn csv(&mut self, name: &str, points: &[Point]) -> Result<(), RunError> {
        self.text(name, &to_csv(points))
    }
}

/// Fits the selected DERs in a parallel map; results are in `indices` order.
/// Every failure is reported, not just the first.
pub fn fit_selected(fleet: &Fleet, indices: &[usize]) -> Result<Vec<DerFit>, RunError> {
    let results = Execution::default().map_slice(indices, |_, &i| {
        fit_der(
            &fleet.domains[i],
            &fleet.prototype,
            &fleet.params,
            &fleet.degree,
        )
    });
    let mut fits = Vec::with_capacity(indices.len());
    let mut failures = Vec::new();
    for (&i, r) in indices.iter().zip(results) {
        match r {
            Ok(f) => fits.push(f),
            Err(e) => failures.push((i, fleet.config.ders[i].type_name(), e.to_string())),
        }
    }
    if failures.is_empty() {
        Ok(fits)
    } else {
        Err(RunError::Solver(failures))
    }
}

pub fn fit_all(fleet: &Fleet) -> Result<Vec<DerFit>, RunError> {
    let all: Vec<usize> = (0..fleet.domains.len()).collect();
    fit_selected(fleet, &all)
}

/// The per-DER report written as `der_<i>.json`.
pub fn der_report(fleet: &Fleet, index: usize, fit: &DerFit) -> Value {
    if let Some(r) = &fit.inner {
        if !r.monotonic {
            warn!("DER {index}: alpha decreased along the translation path; the inner fit may be suboptimal");
        }
    }
    let spec = &fleet.config.ders[index];
    json!({
        "index": index,
        "type": spec.type_name(),
        "spec": to_value(spec),
        "discrete": fleet.domains[index].is_discrete(),
        "outer": to_value(&fit.outer),
        "inner": fit.inner.as_ref().map(to_value),
    })
}

fn fleet_approx(fleet: &Fleet, fits: &[DerFit]) -> Result<FleetApprox, RunError> {
    FleetApprox::from_fits(fits, fleet.config.partial_inner)
        .map_err(|e| RunError::Output(format!("aggregation failed: {e}")))
}

/// Aggregate report written as `aggregate.json`.
pub fn aggregate_report(fleet: &Fleet, approx: &FleetApprox) -> Result<Value, RunError> {
    let mut v = approx
        .to_json()
        .map_err(|e| RunError::Output(format!("aggregation failed: {e}")))?;
    let obj = v.as_object_mut().expect("fleet report is an object");
    obj.insert("n_ders".into(), fleet.domains.len().into());
    obj.insert("prototype".into(), to_value(&fleet.config.prototype));
    Ok(v)
}

fn vertex_loop(h: &Homothet) -> Vec<Point> {
    let mut v = h.vertices();
    if let Some(&first) = v.first() {
        v.push(first);
    }
    v
}

fn write_plots(
    fleet: &Fleet,
    fits: &[DerFit],
    approx: &FleetApprox,
    seed: u64,
    w: &mut Writer,
) -> Result<(), RunError> {
    for (i, (d, fit)) in fleet.domains.iter().zip(fits).enumerate() {
        let boundary = if d.is_discrete() {
            d.anchors().to_vec()
        } else {
            d.sample_boundary(PLOT_BOUNDARY_SAMPLES)
                .map_err(|e| RunError::Output(format!("DER {i}: {e}")))?
        };
        w.csv(&format!("der_{i}_boundary.csv"), &boundary)?;
        w.csv(&format!("der_{i}_outer.csv"), &vertex_loop(&fit.outer))?;
        if let Some(r) = &fit.inner {
            w.csv(&format!("der_{i}_inner.csv"), &vertex_loop(&r.homothet))?;
        }
    }
    w.csv("aggregate_outer.csv", &vertex_loop(&approx.aggregate_outer))?;
    if let Some(inner) = &approx.aggregate_inner {
        w.csv("aggregate_inner.csv", &vertex_loop(inner))?;
    }
    let samples = minkowski_sample(
        &fleet.domains,
        fleet.config.plot_samples,
        seed,
        Execution::default(),
    );
    w.csv("minkowski_samples.csv", &samples)
}

/// `fit`: per-DER reports for one DER or all of them.
pub fn cmd_fit(fleet: &Fleet, der: Option<usize>, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let indices: Vec<usize> = match der {
        Some(i) if i >= fleet.domains.len() => {
            return Err(
                ConfigError(format!("--der {i}: fleet has {} DERs", fleet.domains.len())).into(),
            )
        }
        Some(i) => vec![i],
        None => (0..fleet.domains.len()).collect(),
    };
    let fits = fit_selected(fleet, &indices)?;
    let mut w = Writer::new(out)?;
    for (&i, fit) in indices.iter().zip(&fits) {
        w.json(&format!("der_{i}.json"), der_report(fleet, i, fit))?;
    }
    Ok(w.written)
}

/// `aggregate`: per-DER reports, the fleet report and plot data.
pub fn cmd_aggregate(fleet: &Fleet, seed: u64, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let fits = fit_all(fleet)?;
    let approx = fleet_approx(fleet, &fits)?;
    let mut w = Writer::new(out)?;
    for (i, fit) in fits.iter().enumerate() {
        w.json(&format!("der_{i}.json"), der_report(fleet, i, fit))?;
    }
    w.json("aggregate.json", aggregate_report(fleet, &approx)?)?;
    write_plots(fleet, &fits, &approx, seed, &mut w)?;
    Ok(w.written)
}

/// `emit-plots`: CSV files only.
pub fn cmd_emit_plots(fleet: &Fleet, seed: u64, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let fits = fit_all(fleet)?;
    let approx = fleet_approx(fleet, &fits)?;
    let mut w = Writer::new(out)?;
    write_plots(fleet, &fits, &approx, seed, &mut w)?;
    Ok(w.written)
}

fn homothet_brief(h: &Homothet) -> Value {
    json!({ "alpha": h.alpha, "beta": to_value(&h.beta) })
}

fn outside(points: &[Point], inside: impl Fn(Point) -> bool) -> usize {
    points.iter().filter(|&&x| !inside(x)).count()
}

/// Oracle comparison for one DER.
fn der_oracle(fleet: &Fleet, i: usize, fit: &DerFit) -> Result<Value, RunError> {
    let d = &fleet.domains[i];
    let proto = &fleet.prototype;
    let solver_err = |e: flexhull::Error| {
        RunError::Solver(vec![(i, fleet.config.ders[i].type_name(), e.to_string())])
    };
    let lp = oracle::outer_fit_lp(d, proto).map_err(solver_err)?;
    let half = d.bounding_box().half_width();
    let outer = &fit.outer;
    let boundary = if d.is_discrete() {
        d.anchors().to_vec()
    } else {
        d.sample_boundary(BOUNDARY_SAMPLES).map_err(solver_err)?
    };
    let mut v = json!({
        "index": i,
        "type": fleet.config.ders[i].type_name(),
        "outer_sos": homothet_brief(outer),
        "outer_lp": homothet_brief(&lp),
        "outer_alpha_rel_gap": (outer.alpha - lp.alpha).abs() / lp.alpha,
        "outer_beta_gap_rel": (outer.beta - lp.beta).norm() / half,
        "boundary_samples": boundary.len(),
        "boundary_outside_outer": outside(&boundary, |x| outer.contains(x, CHECK_TOL)),
        "inner_sos": Value::Null,
        "inner_grid": Value::Null,
        "inner_alpha_gap": Value::Null,
        "inner_samples_outside_domain": Value::Null,
    });
    if let Some(r) = &fit.inner {
        let grid = oracle::inner_fit_grid(
            d,
            proto,
            fleet.config.oracle_grid,
            fleet.params.bisection_tol,
            Execution::default(),
        )
        .map_err(solver_err)?;
        let per_edge = INNER_EDGE_SAMPLES.div_ceil(proto.n_edges());
        let pts = homothet_boundary(&r.homothet, per_edge);
        let obj = v.as_object_mut().expect("object");
        obj.insert("inner_sos".into(), homothet_brief(&r.homothet));
        obj.insert("inner_grid".into(), homothet_brief(&grid));
        obj.insert(
            "inner_alpha_gap".into(),
            (grid.alpha - r.homothet.alpha).into(),
        );
        obj.insert(
            "inner_samples_outside_domain".into(),
            outside(&pts, |x| d.contains(x, CHECK_TOL)).into(),
        );
    }
    Ok(v)
}

/// `oracle`: fits the fleet and compares every result with the brute-force
/// oracle; writes `oracle.json`.
pub fn cmd_oracle(fleet: &Fleet, seed: u64, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let fits = fit_all(fleet)?;
    let approx = fleet_approx(fleet, &fits)?;
    let indices: Vec<usize> = (0..fits.len()).collect();
    let per_der = Execution::default()
        .map_slice(&indices, |_, &i| der_oracle(fleet, i, &fits[i]))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let samples = minkowski_sample(
        &fleet.domains,
        fleet.config.plot_samples,
        seed,
        Execution::default(),
    );
    let agg = &approx.aggregate_outer;
    let audit = audit_stats();
    let report = json!({
        "per_der": per_der,
        "minkowski_samples": samples.len(),
        "minkowski_outside_outer": outside(&samples, |x| agg.contains(x, CHECK_TOL)),
        "sums_consistent": approx.sums_consistent(),
        "seed": seed,
        "audit": {
            "blocks": audit.blocks,
            "failures": audit.failures,
        },
    });
    let mut w = Writer::new(out)?;
    w.json("oracle.json", report)?;
    Ok(w.written)
}
