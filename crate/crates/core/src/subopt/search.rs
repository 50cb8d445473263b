use super::directions::{combine, weight_grid, WeightProvenance, WeightedDirections};
use super::pa::{solve_dps, solve_ups, PsSolution};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::{ChannelSet, Design, DesignSolution, EhCurve, Scenario};

/// How the power-splitting ratios are chosen at each weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsMode {
    /// One closed-form ratio shared by all users.
    Ups,
    /// Per-user ratios from the root of the tight system.
    Dps,
}

impl PsMode {
    pub fn label(self) -> &'static str {
        match self {
            PsMode::Ups => "UPS",
            PsMode::Dps => "DPS",
        }
    }
}

/// Result of a weight search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub solution: DesignSolution,
    pub weights: WeightedDirections,
    pub ps: PsSolution,
    /// Power allocation and splitting solves performed.
    pub evaluations: usize,
    /// Grid points skipped as infeasible or degenerate.
    pub skipped: usize,
}

/// Solves powers and ratios for fixed directions.
pub fn solve_ps(ch: &ChannelSet, sc: &Scenario, directions: &[CVector], mode: PsMode) -> Result<PsSolution> {
    match mode {
        PsMode::Ups => solve_ups(ch, sc, directions),
        PsMode::Dps => solve_dps(ch, sc, directions),
    }
}

/// Evaluates a complete design for fixed directions.
pub fn design_for(
    ch: &ChannelSet,
    sc: &Scenario,
    curve: &EhCurve,
    directions: Vec<CVector>,
    mode: PsMode,
    algorithm: &str,
) -> Result<(DesignSolution, PsSolution)> {
    let ps = solve_ps(ch, sc, &directions, mode)?;
    let design = Design { directions, powers: ps.powers.clone(), rho: ps.rho.clone() };
    Ok((DesignSolution::evaluate(sc, ch, curve, design, algorithm)?, ps))
}

struct Evaluator<'a> {
    ch: &'a ChannelSet,
    sc: &'a Scenario,
    curve: &'a EhCurve,
    f_i: &'a [CVector],
    f_e: &'a [CVector],
    mode: PsMode,
    algorithm: String,
    evaluations: usize,
    skipped: usize,
}

type Point = (DesignSolution, PsSolution, Vec<CVector>);

impl Evaluator<'_> {
    /// `None` when the point is degenerate or has no feasible allocation.
    fn eval(&mut self, w: &[f64]) -> Result<Option<Point>> {
        self.evaluations += 1;
        let res = combine(self.f_i, self.f_e, w)
            .and_then(|dirs| design_for(self.ch, self.sc, self.curve, dirs.clone(), self.mode, &self.algorithm).map(|(s, p)| (s, p, dirs)));
        match res {
            Ok(point) => Ok(Some(point)),
            Err(Error::DegenerateCombination(_) | Error::DirectionInfeasible(_) | Error::NoRoot(_)) => {
                self.skipped += 1;
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}

fn check_inputs(sc: &Scenario, f_i: &[CVector], f_e: &[CVector], x: usize) -> Result<()> {
    if x < 2 {
        return Err(Error::InvalidInput(format!("weight grid needs at least 2 points, got {x}")));
    }
    if f_i.len() != sc.k || f_e.len() != sc.k {
        return Err(Error::InvalidInput("one direction per user is required".into()));
    }
    Ok(())
}

/// Scans one weight shared by all users over the `x`-point grid and keeps
/// the best minimum received power. Ties go to the lowest grid index.
pub fn uwa_search(
    ch: &ChannelSet,
    sc: &Scenario,
    curve: &EhCurve,
    f_i: &[CVector],
    f_e: &[CVector],
    x: usize,
    mode: PsMode,
) -> Result<SearchOutcome> {
    check_inputs(sc, f_i, f_e, x)?;
    let mut ev = Evaluator {
        ch,
        sc,
        curve,
        f_i,
        f_e,
        mode,
        algorithm: format!("UWA-{}", mode.label()),
        evaluations: 0,
        skipped: 0,
    };
    let mut best: Option<(f64, Point)> = None;
    for w in weight_grid(x) {
        if let Some(point) = ev.eval(&vec![w; sc.k])? {
            if best.as_ref().is_none_or(|(_, b)| point.0.p_star > b.0.p_star) {
                best = Some((w, point));
            }
        }
    }
    let (w_bar, (solution, ps, directions)) = best.ok_or(Error::SearchInfeasible)?;
    Ok(SearchOutcome {
        solution,
        weights: WeightedDirections {
            w: vec![w_bar; sc.k],
            directions,
            provenance: WeightProvenance::Uniform { w_bar, x },
        },
        ps,
        evaluations: ev.evaluations,
        skipped: ev.skipped,
    })
}

/// Users in ascending channel norm, index order on ties.
pub fn sweep_order(ch: &ChannelSet) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ch.k()).collect();
    order.sort_by(|&a, &b| ch.h[a].norm_sqr().total_cmp(&ch.h[b].norm_sqr()).then(a.cmp(&b)));
    order
}

/// Starting from all weights at 1, sweeps users from the weakest channel
/// up, scanning each user's weight over the grid with the others fixed and
/// committing the best before moving on. Ties go to the lowest grid index.
pub fn dwa_search(
    ch: &ChannelSet,
    sc: &Scenario,
    curve: &EhCurve,
    f_i: &[CVector],
    f_e: &[CVector],
    x: usize,
    mode: PsMode,
) -> Result<SearchOutcome> {
    check_inputs(sc, f_i, f_e, x)?;
    let mut ev = Evaluator {
        ch,
        sc,
        curve,
        f_i,
        f_e,
        mode,
        algorithm: format!("DWA-{}", mode.label()),
        evaluations: 0,
        skipped: 0,
    };
    let grid = weight_grid(x);
    let mut w = vec![1.0; sc.k];
    let mut best: Option<Point> = None;
    for user in sweep_order(ch) {
        let mut user_best: Option<(f64, Point)> = None;
        for &g in &grid {
            let mut trial = w.clone();
            trial[user] = g;
            if let Some(point) = ev.eval(&trial)? {
                if user_best.as_ref().is_none_or(|(_, b)| point.0.p_star > b.0.p_star) {
                    user_best = Some((g, point));
                }
            }
        }
        if let Some((g, point)) = user_best {
            w[user] = g;
            best = Some(point);
        }
    }
    let (solution, ps, directions) = best.ok_or(Error::SearchInfeasible)?;
    Ok(SearchOutcome {
        solution,
        weights: WeightedDirections { w, directions, provenance: WeightProvenance::Distinct { x } },
        ps,
        evaluations: ev.evaluations,
        skipped: ev.skipped,
    })
}
