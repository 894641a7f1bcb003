//! Subcommand implementations. Each writes its artifacts under `Globals::out`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::Serialize;
use supint_core::coords::{Chart, PhaseState};
use supint_core::dynamics::{
    closed_curve_deviation, drift_report, integrate, section_of, Drift, Flow, SectionSet,
    SectionSetEntry, Trajectory,
};
use supint_core::hamiltonian::PhaseFunction;
use supint_core::integrals::{standard_integrals, System};
use supint_core::potentials::{catalog, Potential};

use crate::config::{is_config_error, ConfigError, IsoSpec, RunConfig};
use crate::figures::{isopotential_map, isopotential_svg, section_svg, zero_set_distance, IsoMap};

#[derive(Debug, Clone)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

impl Default for Globals {
    fn default() -> Self {
        Self {
            config: None,
            seed: None,
            jobs: None,
            out: PathBuf::from("."),
        }
    }
}

impl Globals {
    /// `--seed`, else the config seed, else 0.
    pub fn seed(&self, cfg: &RunConfig) -> u64 {
        self.seed.or(cfg.seed).unwrap_or(0)
    }

    pub fn load_config(&self) -> anyhow::Result<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| anyhow::Error::new(ConfigError(anyhow!("--config is required"))))?;
        RunConfig::load(path)
    }

    fn artifact(&self, name: &str) -> anyhow::Result<PathBuf> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn config_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    let e = e.into();
    if is_config_error(&e) {
        e
    } else {
        anyhow::Error::new(ConfigError(e))
    }
}

fn is_three_body_chart(c: Chart) -> bool {
    matches!(
        c,
        Chart::CartesianLine(3) | Chart::OrthogonalZ(3) | Chart::Cylindrical3
    )
}

fn is_four_dim_chart(c: Chart) -> bool {
    matches!(
        c,
        Chart::CartesianLine(4) | Chart::OrthogonalZ(4) | Chart::SphericalCylindrical4
    )
}

/// Phase functions tabulated next to a trajectory, by column name: the
/// standard integrals of the matching system, or just the Hamiltonian.
pub fn tracked_integrals(
    flow: &Flow,
    pot: &Potential,
) -> anyhow::Result<Vec<(String, Arc<dyn PhaseFunction>)>> {
    let chart = flow.chart();
    let system = if is_three_body_chart(chart) {
        Some(System::ThreeBody(Some(pot.clone())))
    } else if is_four_dim_chart(chart) && pot.id().starts_with("evans-") {
        Some(System::Evans4d(pot.clone()))
    } else {
        None
    };
    match system {
        Some(s) => Ok(standard_integrals(&s)?
            .slots()
            .iter()
            .filter_map(|slot| slot.function.clone().map(|f| (slot.name.clone(), f)))
            .collect()),
        None => {
            let h: Arc<dyn PhaseFunction> = flow.hamiltonian().clone();
            Ok(vec![("H".to_string(), h)])
        }
    }
}

struct Prepared {
    pot: Potential,
    flow: Flow,
    seed: u64,
}

fn prepare(cfg: &RunConfig, globals: &Globals) -> anyhow::Result<Prepared> {
    let pot = cfg.potential()?;
    let chart = cfg.chart(&pot)?;
    let scheme = cfg.scheme(chart)?;
    let flow = Flow::natural(chart, Some(pot.clone()), scheme).map_err(config_err)?;
    Ok(Prepared {
        pot,
        flow,
        seed: globals.seed(cfg),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRecord {
    pub set: String,
    pub trajectory: usize,
    pub t_end: f64,
    pub reason: String,
}

#[derive(Debug)]
pub struct SimulateRun {
    /// `(set id, index, trajectory, drifts)` in config order.
    pub runs: Vec<(String, usize, Trajectory, Vec<Drift>)>,
    pub truncations: Vec<TruncationRecord>,
    pub files: Vec<PathBuf>,
}

pub fn run_simulate(cfg: &RunConfig, globals: &Globals) -> anyhow::Result<SimulateRun> {
    let Prepared { pot, flow, seed } = prepare(cfg, globals)?;
    let chart = flow.chart();
    let opts = cfg.options()?;
    let sets = cfg.initial_sets(chart, &pot, seed)?;
    let (columns, tracked): (Vec<String>, Vec<Arc<dyn PhaseFunction>>) =
        tracked_integrals(&flow, &pot)?.into_iter().unzip();

    let jobs: Vec<(String, usize, PhaseState)> = sets
        .iter()
        .flat_map(|s| {
            s.states
                .iter()
                .enumerate()
                .map(|(i, x)| (s.id.clone(), i, x.clone()))
        })
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(id, i, s0)| {
            let traj =
                integrate(&flow, &s0, opts).with_context(|| format!("set {id}, state {i}"))?;
            let mut drift = drift_report(&traj, &tracked)?;
            for (d, name) in drift.iter_mut().zip(&columns) {
                d.name.clone_from(name);
            }
            Ok((id, i, traj, drift))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut files = Vec::new();
    let names = chart.coordinate_names();
    for (id, i, traj, _) in &runs {
        let path = globals.artifact(&format!("{}-{id}-{i}.csv", cfg.name))?;
        let mut w =
            csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        let mut header = vec!["t".to_string()];
        header.extend(names.iter().cloned());
        header.extend(names.iter().map(|n| format!("p_{n}")));
        header.extend(columns.iter().cloned());
        w.write_record(&header)?;
        for (t, s) in &traj.samples {
            let mut row = vec![t.to_string()];
            row.extend(s.q.iter().chain(&s.p).map(f64::to_string));
            row.extend(
                tracked
                    .iter()
                    .map(|f| f.eval(s).unwrap_or(f64::NAN).to_string()),
            );
            w.write_record(&row)?;
        }
        w.flush()?;
        files.push(path);
    }

    let path = globals.artifact(&format!("{}-drift.csv", cfg.name))?;
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "set",
        "trajectory",
        "integral",
        "initial",
        "drift",
        "relative",
    ])?;
    for (id, i, _, drifts) in &runs {
        for d in drifts {
            w.write_record([
                id.clone(),
                i.to_string(),
                d.name.clone(),
                d.initial.to_string(),
                d.drift.to_string(),
                d.relative.to_string(),
            ])?;
        }
    }
    w.flush()?;
    files.push(path);

    let truncations: Vec<TruncationRecord> = runs
        .iter()
        .filter_map(|(id, i, traj, _)| {
            traj.truncation.as_ref().map(|r| TruncationRecord {
                set: id.clone(),
                trajectory: *i,
                t_end: traj.t_end(),
                reason: r.clone(),
            })
        })
        .collect();
    if !truncations.is_empty() {
        let path = globals.artifact(&format!("{}-truncation.json", cfg.name))?;
        write(&path, &serde_json::to_string_pretty(&truncations)?)?;
        files.push(path);
    }
    Ok(SimulateRun {
        runs,
        truncations,
        files,
    })
}

#[derive(Debug)]
pub struct PoincareRun {
    pub sections: SectionSet,
    /// Closed-curve deviation per set; `None` below three points.
    pub deviations: Vec<(String, Option<f64>)>,
    pub files: Vec<PathBuf>,
}

pub fn run_poincare(cfg: &RunConfig, globals: &Globals) -> anyhow::Result<PoincareRun> {
    let Prepared { pot, flow, seed } = prepare(cfg, globals)?;
    let chart = flow.chart();
    let opts = cfg.options()?;
    let sec = cfg.section(chart)?;
    let sets = cfg.initial_sets(chart, &pot, seed)?;

    let jobs: Vec<(usize, usize, &PhaseState)> = sets
        .iter()
        .enumerate()
        .flat_map(|(k, s)| s.states.iter().enumerate().map(move |(i, x)| (k, i, x)))
        .collect();
    let results = jobs
        .into_par_iter()
        .map(|(k, i, s0)| {
            section_of(&flow, s0, &sec, opts, i)
                .map(|r| (k, r))
                .with_context(|| format!("set {}, state {i}", sets[k].id))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut sections = SectionSet {
        sets: sets
            .iter()
            .map(|s| SectionSetEntry {
                id: s.id.clone(),
                points: Vec::new(),
                truncated: Vec::new(),
            })
            .collect(),
        tangential: 0,
    };
    for (k, (points, tangential, truncation)) in results {
        let entry = &mut sections.sets[k];
        entry.points.extend(points);
        entry.truncated.extend(truncation);
        sections.tangential += tangential;
    }

    let names = chart.coordinate_names();
    let q_name = &names[sec.record_q];
    let path = globals.artifact(&format!("{}-section.csv", cfg.name))?;
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["set", q_name.as_str(), &format!("p_{q_name}"), "t"])?;
    for entry in &sections.sets {
        for p in &entry.points {
            w.write_record([
                entry.id.clone(),
                p.q.to_string(),
                p.p.to_string(),
                p.t.to_string(),
            ])?;
        }
    }
    w.flush()?;
    let mut files = vec![path];

    let title = format!(
        "{}: section {} = {:.6} (seed {seed})",
        cfg.name, names[sec.coord], sec.value
    );
    let path = globals.artifact(&format!("{}-section.svg", cfg.name))?;
    write(
        &path,
        &section_svg(&sections, &title, q_name, &format!("p_{q_name}")),
    )?;
    files.push(path);

    let deviations = sections
        .sets
        .iter()
        .map(|e| {
            let pts: Vec<(f64, f64)> = e.points.iter().map(|p| (p.q, p.p)).collect();
            (e.id.clone(), closed_curve_deviation(&pts))
        })
        .collect();
    Ok(PoincareRun {
        sections,
        deviations,
        files,
    })
}

#[derive(Debug)]
pub struct IsoRun {
    pub map: IsoMap,
    pub zero_set_distance: f64,
    pub file: PathBuf,
}

/// Platonic index of a potential, if it has an isopotential map.
pub fn platonic_index(pot: &Potential) -> Option<u8> {
    match pot.id() {
        "platonic-1" => Some(1),
        "platonic-2" => Some(2),
        "platonic-3" => Some(3),
        _ => None,
    }
}

pub fn run_isopotential(
    cfg: &RunConfig,
    globals: &Globals,
    levels: Option<usize>,
) -> anyhow::Result<IsoRun> {
    let pot = cfg.potential()?;
    let which = platonic_index(&pot).ok_or_else(|| {
        config_err(anyhow!(
            "isopotential maps exist for platonic-1..3, not {}",
            pot.id()
        ))
    })?;
    let mut spec: IsoSpec = cfg.isopotential.clone().unwrap_or_default();
    if let Some(n) = levels {
        spec.levels = n;
    }
    if spec.columns < 4 || spec.rows < 4 {
        return Err(config_err(anyhow!(
            "isopotential grid needs at least 4 columns and rows"
        )));
    }
    let map = isopotential_map(which, &spec);
    let distance = zero_set_distance(&map);
    let seed = globals.seed(cfg);
    let svg = isopotential_svg(
        &map,
        &format!(
            "{} levels, {}x{} grid, seed {seed}",
            spec.levels, spec.columns, spec.rows
        ),
    );
    let file = globals.artifact(&format!("{}-isopotential.svg", cfg.name))?;
    write(&file, &svg)?;
    Ok(IsoRun {
        map,
        zero_set_distance: distance,
        file,
    })
}

#[derive(Debug, Serialize)]
struct CatalogRow {
    id: &'static str,
    formula: &'static str,
    params: Vec<CatalogParam>,
    charts: Vec<String>,
}

#[derive(Debug, Serialize)]
struct CatalogParam {
    name: &'static str,
    default: Option<f64>,
    note: &'static str,
}

pub fn catalog_text(json: bool) -> anyhow::Result<String> {
    let rows: Vec<CatalogRow> = catalog()
        .into_iter()
        .map(|e| CatalogRow {
            id: e.id,
            formula: e.formula,
            params: e
                .params
                .iter()
                .map(|p| CatalogParam {
                    name: p.name,
                    default: p.default,
                    note: p.note,
                })
                .collect(),
            charts: e.charts.iter().map(ToString::to_string).collect(),
        })
        .collect();
    if json {
        return Ok(serde_json::to_string_pretty(&rows)? + "\n");
    }
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!("{}\n  V = {}\n", r.id, r.formula));
        if !r.params.is_empty() {
            let ps: Vec<String> = r
                .params
                .iter()
                .map(|p| match p.default {
                    Some(d) => format!("{}={d}", p.name),
                    None => p.name.to_string(),
                })
                .collect();
            out.push_str(&format!("  params: {}\n", ps.join(", ")));
        }
        out.push_str(&format!("  charts: {}\n", r.charts.join(", ")));
    }
    Ok(out)
}
