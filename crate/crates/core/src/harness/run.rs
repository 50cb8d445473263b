use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::rows::ResultRow;
use super::spec::{load_curve, Algorithm, ExperimentSpec, SweepPoint};
use crate::error::{Error, Result};
use crate::model::{generate_channels, ChannelSet, DesignSolution, EhCurve, Scenario};
use crate::optimal::{compute_bounds, goa, BoundsReport, GoaOptions};
use crate::subopt::{
    design_for, dwa_search, energy_only, mrt_directions, proposed_directions, uwa_search, zf_directions, EnergyScheme,
    ProposedDirections, PsMode, SearchOutcome,
};

/// Share of rows allowed to be solver incidents before a run counts as
/// failed.
pub const INCIDENT_THRESHOLD: f64 = 0.01;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
    /// Worker threads; `None` uses the rayon default.
    pub workers: Option<usize>,
    /// Fill the `wall_s` column. Off by default so output is reproducible.
    pub timing: bool,
    /// Keep golden-section traces.
    pub verbose: bool,
    /// Directory that relative curve paths resolve against.
    pub base_dir: Option<std::path::PathBuf>,
}

/// A solver failure or dominance violation worth reporting.
#[derive(Clone, Debug, Serialize)]
pub struct Incident {
    pub preset: String,
    pub gamma_db: f64,
    pub n: usize,
    pub k: usize,
    pub realization: u64,
    pub algorithm: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub incidents: Vec<Incident>,
    /// Golden-section traces as JSON lines, when requested.
    pub traces: Vec<String>,
    /// Realizations whose SINR targets do not fit the budget.
    pub infeasible_realizations: usize,
    pub realizations_run: usize,
}

impl RunReport {
    pub fn incident_rate(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            self.incidents.len() as f64 / self.rows.len() as f64
        }
    }

    pub fn exceeds_threshold(&self) -> bool {
        self.incident_rate() > INCIDENT_THRESHOLD
    }
}

struct Cell {
    rows: Vec<ResultRow>,
    incidents: Vec<Incident>,
    traces: Vec<String>,
    infeasible: bool,
}

/// Outcome of one design on one realization.
enum Outcome {
    Done(Box<Produced>),
    /// The design does not exist for this realization.
    Infeasible,
    /// A numerical failure.
    Failed(String),
}

#[derive(Default)]
struct Produced {
    p_star: f64,
    p_h: Option<f64>,
    rho: Vec<f64>,
    powers: Vec<f64>,
    weights: Vec<f64>,
    goa_iters: Option<usize>,
    trace: Option<String>,
}

impl Produced {
    fn from_solution(s: &DesignSolution) -> Self {
        Self {
            p_star: s.p_star,
            p_h: Some(s.p_h_min()),
            rho: s.design.rho.clone(),
            powers: s.design.powers.clone(),
            ..Self::default()
        }
    }

    fn from_search(o: &SearchOutcome) -> Self {
        Self { weights: o.weights.w.clone(), ..Self::from_solution(&o.solution) }
    }
}

fn classify(e: Error) -> Outcome {
    match e {
        Error::Infeasible | Error::SearchInfeasible | Error::DirectionInfeasible(_) | Error::UnsupportedBaseline(_) => {
            Outcome::Infeasible
        }
        other => Outcome::Failed(other.to_string()),
    }
}

fn done(p: Produced) -> Outcome {
    Outcome::Done(Box::new(p))
}

/// Per-realization state shared by the designs.
struct Realization<'a> {
    ch: ChannelSet,
    sc: &'a Scenario,
    curve: &'a EhCurve,
    spec: &'a ExperimentSpec,
    proposed: Option<Result<ProposedDirections, String>>,
    bounds: Option<Result<BoundsReport, String>>,
}

impl Realization<'_> {
    fn proposed(&mut self) -> &Result<ProposedDirections, String> {
        if self.proposed.is_none() {
            self.proposed = Some(proposed_directions(&self.ch, self.sc).map_err(|e| match e {
                Error::Infeasible => String::new(),
                other => other.to_string(),
            }));
        }
        self.proposed.as_ref().expect("just set")
    }

    fn bounds(&mut self) -> &Result<BoundsReport, String> {
        if self.bounds.is_none() {
            self.bounds = Some(compute_bounds(&self.ch, self.sc).map_err(|e| e.to_string()));
        }
        self.bounds.as_ref().expect("just set")
    }

    fn search(&mut self, uniform: bool, mode: PsMode, zf: bool) -> Outcome {
        let (f_i, f_e) = if zf {
            match (zf_directions(&self.ch), mrt_directions(&self.ch)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return classify(e),
            }
        } else {
            match self.proposed() {
                Ok(p) => (p.f_i.clone(), p.f_e.clone()),
                Err(m) if m.is_empty() => return Outcome::Infeasible,
                Err(m) => return Outcome::Failed(m.clone()),
            }
        };
        let run = if uniform { uwa_search } else { dwa_search };
        match run(&self.ch, self.sc, self.curve, &f_i, &f_e, self.spec.x, mode) {
            Ok(o) => done(Produced::from_search(&o)),
            Err(e) => classify(e),
        }
    }

    fn run(&mut self, alg: Algorithm, verbose: bool) -> Outcome {
        match alg {
            Algorithm::Goa => {
                let opts = GoaOptions { xi: self.spec.xi, bracket: None };
                match goa(&self.ch, self.sc, self.curve, &opts) {
                    Ok(o) => {
                        self.bounds = Some(Ok(o.bounds.clone()));
                        done(Produced {
                            goa_iters: Some(o.trace.c),
                            trace: verbose.then(|| o.trace.to_json_lines()),
                            ..Produced::from_solution(&o.solution)
                        })
                    }
                    Err(e) => classify(e),
                }
            }
            Algorithm::LowerBound | Algorithm::UpperBound => match self.bounds() {
                Ok(b) if !b.feasible => Outcome::Infeasible,
                Ok(b) => done(Produced {
                    p_star: if alg == Algorithm::LowerBound { b.p_lb } else { b.p_ub },
                    ..Produced::default()
                }),
                Err(m) => Outcome::Failed(m.clone()),
            },
            Algorithm::DwaUps => self.search(false, PsMode::Ups, false),
            Algorithm::UwaUps => self.search(true, PsMode::Ups, false),
            Algorithm::DwaDps => self.search(false, PsMode::Dps, false),
            Algorithm::UwaDps => self.search(true, PsMode::Dps, false),
            Algorithm::MrtZfUwaUps => self.search(true, PsMode::Ups, true),
            Algorithm::MrtZfDwaUps => self.search(false, PsMode::Ups, true),
            Algorithm::SinrUps => {
                let f_i = match self.proposed() {
                    Ok(p) => p.f_i.clone(),
                    Err(m) if m.is_empty() => return Outcome::Infeasible,
                    Err(m) => return Outcome::Failed(m.clone()),
                };
                match design_for(&self.ch, self.sc, self.curve, f_i, PsMode::Ups, alg.name()) {
                    Ok((s, _)) => done(Produced { weights: vec![1.0; self.sc.k], ..Produced::from_solution(&s) }),
                    Err(e) => classify(e),
                }
            }
            Algorithm::EfmOnly | Algorithm::MrtOnly | Algorithm::SvdOnly => {
                let scheme = match alg {
                    Algorithm::EfmOnly => EnergyScheme::Efm,
                    Algorithm::MrtOnly => EnergyScheme::Mrt,
                    _ => EnergyScheme::Svd,
                };
                match energy_only(&self.ch, self.sc, self.curve, scheme) {
                    Ok(s) => done(Produced::from_solution(&s)),
                    Err(e) => classify(e),
                }
            }
        }
    }
}

fn run_cell(spec: &ExperimentSpec, point: &SweepPoint, sc: &Scenario, curve: &EhCurve, r: u64, opts: &RunOptions) -> Cell {
    let gamma_db = point.profile.gamma_db();
    let incident = |alg: &str, message: String| Incident {
        preset: point.label.clone(),
        gamma_db,
        n: point.n,
        k: point.k,
        realization: r,
        algorithm: alg.to_string(),
        message,
    };
    let blank = |alg: &str| ResultRow::infeasible(&point.label, gamma_db, point.n, point.k, point.l, alg, r);
    let mut cell = Cell { rows: Vec::new(), incidents: Vec::new(), traces: Vec::new(), infeasible: false };
    let ch = match generate_channels(sc, r) {
        Ok(ch) => ch,
        Err(e) => {
            for alg in &spec.algorithms {
                cell.rows.push(blank(alg.name()));
                cell.incidents.push(incident(alg.name(), e.to_string()));
            }
            return cell;
        }
    };
    let mut state = Realization { ch, sc, curve, spec, proposed: None, bounds: None };
    let mut goa_p = None;
    let mut dwa_ups_p = None;
    for &alg in &spec.algorithms {
        let start = Instant::now();
        let outcome = state.run(alg, opts.verbose);
        let wall = start.elapsed().as_secs_f64();
        let mut row = blank(alg.name());
        match outcome {
            Outcome::Done(p) => {
                row.feasible = true;
                row.p_star_w = Some(p.p_star);
                row.p_h_w = p.p_h;
                row.rho = p.rho;
                row.powers = p.powers;
                row.weights = p.weights;
                row.goa_iters = p.goa_iters;
                if let Some(t) = p.trace {
                    cell.traces.extend(t.lines().enumerate().map(|(i, line)| {
                        format!(
                            "{{\"preset\":\"{}\",\"gamma_db\":{},\"N\":{},\"K\":{},\"L\":{},\"realization\":{r},\"step\":{i},\"probe\":{line}}}",
                            point.label, gamma_db, point.n, point.k, point.l
                        )
                    }));
                }
                match alg {
                    Algorithm::Goa => goa_p = Some(p.p_star),
                    Algorithm::DwaUps => dwa_ups_p = Some(p.p_star),
                    _ => {}
                }
            }
            Outcome::Infeasible => {
                if alg.needs_sinr() {
                    cell.infeasible = true;
                }
            }
            Outcome::Failed(m) => cell.incidents.push(incident(alg.name(), m)),
        }
        if opts.timing {
            row.wall_s = Some(wall);
        }
        cell.rows.push(row);
    }
    if let (Some(g), Some(d)) = (goa_p, dwa_ups_p) {
        if g < d - spec.xi {
            cell.incidents.push(incident("GOA", format!("below DWA-UPS: {g} < {d}")));
        }
    }
    cell
}

/// Runs every sweep point, realization and design of `spec`.
///
/// Realization `r` draws its channels from stream `r` of the scenario seed,
/// so the same channels are reused across SINR targets and results do not
/// depend on the number of workers.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunReport> {
    spec.validate()?;
    let mut template = spec.scenario.clone();
    if let Some(seed) = opts.seed {
        template.seed = seed;
    }
    let curve = load_curve(&spec.eh_curve, template.s_e, opts.base_dir.as_deref())?;
    let points = spec.points();
    let scenarios = points.iter().map(|p| p.scenario(&template)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| (0..spec.realizations as u64).map(move |r| (i, r)))
        .collect();
    let work = || -> Vec<Cell> {
        jobs.par_iter()
            .map(|&(i, r)| run_cell(spec, &points[i], &scenarios[i], &curve, r, opts))
            .collect()
    };
    let cells = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut report = RunReport {
        rows: Vec::new(),
        incidents: Vec::new(),
        traces: Vec::new(),
        infeasible_realizations: 0,
        realizations_run: cells.len(),
    };
    for c in cells {
        report.rows.extend(c.rows);
        report.incidents.extend(c.incidents);
        report.traces.extend(c.traces);
        report.infeasible_realizations += usize::from(c.infeasible);
    }
    Ok(report)
}

/// Writes the CSV (and traces, when present) into `dir`; returns the CSV path.
pub fn write_report(spec: &ExperimentSpec, report: &RunReport, dir: &Path) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let name = spec.output.clone().unwrap_or_else(|| format!("{}.csv", spec.name));
    let path = dir.join(name);
    let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    super::rows::write_rows(file, &report.rows, spec.fixed_k())?;
    if !report.traces.is_empty() {
        let mut text = report.traces.join("\n");
        text.push('\n');
        std::fs::write(path.with_extension("goa.jsonl"), text)?;
    }
    if !report.incidents.is_empty() {
        let lines: Vec<String> = report
            .incidents
            .iter()
            .map(|i| serde_json::to_string(i).expect("plain fields serialize"))
            .collect();
        std::fs::write(path.with_extension("incidents.jsonl"), lines.join("\n") + "\n")?;
    }
    Ok(path)
}
