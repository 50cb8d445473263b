use serde::Serialize;

use super::bounds::{compute_bounds_with_work, BoundsReport};
use super::op4::{solve_op4, Op4Solution, Op4Status};
use crate::error::{Error, Result};
use crate::linalg::{CVector, HermitianMatrix};
use crate::model::{received_rf_power, ChannelSet, Design, DesignSolution, EhCurve, Scenario};
use crate::subopt::solve_dps_from;

/// Interval reduction factor of the golden-section search.
pub const GOLDEN: f64 = 0.618;

/// Smallest iteration cap, used when the predicted bound is tiny or negative.
const MIN_ITERATION_CAP: i64 = 64;

#[derive(Clone, Copy, Debug)]
pub struct GoaOptions {
    /// Tolerance on `|P_T - required power|`, watts.
    pub xi: f64,
    /// Overrides the analytic `[P_lb, P_ub]` bracket.
    pub bracket: Option<(f64, f64)>,
}

impl Default for GoaOptions {
    fn default() -> Self {
        Self { xi: 1e-4, bracket: None }
    }
}

/// Probe pair after one step of the search.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GoaIteration {
    pub p_p: f64,
    pub p_q: f64,
    /// Power required at `p_p`; infinite when that level is unreachable.
    pub p_tp: f64,
    pub p_tq: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoaTrace {
    /// Initial probes first, then one entry per iteration.
    pub iterations: Vec<GoaIteration>,
    /// Number of bracket updates.
    pub c: usize,
    /// `ceil((ln xi - ln(P_ub - P_lb)) / ln 0.618) + 1`.
    pub c_star_bound: i64,
    pub p_lb: f64,
    pub p_ub: f64,
    pub p_star: f64,
}

impl GoaTrace {
    /// One JSON object per probe pair.
    pub fn to_json_lines(&self) -> String {
        self.iterations
            .iter()
            .map(|it| serde_json::to_string(it).expect("plain numbers serialize") + "\n")
            .collect()
    }
}

/// Predicted iteration count for bracket `width` and tolerance `xi`.
pub fn iteration_bound(xi: f64, width: f64) -> i64 {
    ((xi.ln() - width.ln()) / GOLDEN.ln()).ceil() as i64 + 1
}

#[derive(Clone, Debug)]
pub struct GoaOutcome {
    pub solution: DesignSolution,
    pub trace: GoaTrace,
    pub bounds: BoundsReport,
    /// Rank-one residual of each optimal covariance.
    pub rank1_residual: Vec<f64>,
}

/// `[P_lb, P_ub]`, widened to a relative `1e-9` when solver rounding makes
/// the bounds meet or cross.
fn analytic_bracket(b: &BoundsReport) -> (f64, f64) {
    let (lo, hi) = (b.p_lb.min(b.p_ub), b.p_lb.max(b.p_ub));
    let min_width = 1e-9 * hi;
    if hi - lo >= min_width {
        (lo, hi)
    } else {
        let mid = 0.5 * (lo + hi);
        (mid - min_width, mid + min_width)
    }
}

struct Probe {
    power: f64,
    sol: Option<Op4Solution>,
}

fn probe(ch: &ChannelSet, sc: &Scenario, p_hat: f64) -> Result<Probe> {
    let sol = solve_op4(ch, sc, p_hat)?;
    Ok(match sol.status {
        Op4Status::Optimal => Probe { power: sol.min_power, sol: Some(sol) },
        Op4Status::Infeasible => Probe { power: f64::INFINITY, sol: None },
    })
}

/// Golden-section search over the common received power: each probe asks
/// for the least transmit power reaching it, and the bracket shrinks toward
/// the probe whose requirement is closest to `P_T`.
///
/// The winning covariances are scaled to spend exactly `P_T` and each
/// power-splitting ratio is lowered until its SINR target is met with
/// equality, which leaves the most power for harvesting.
pub fn goa(ch: &ChannelSet, sc: &Scenario, curve: &EhCurve, opts: &GoaOptions) -> Result<GoaOutcome> {
    if !(opts.xi > 0.0 && opts.xi.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.xi)));
    }
    let work = compute_bounds_with_work(ch, sc)?;
    let (mut lb, mut ub) = opts.bracket.unwrap_or_else(|| analytic_bracket(&work.report));
    if !(lb > 0.0 && ub > lb) {
        return Err(Error::InvalidInput(format!("bad bracket [{lb}, {ub}]")));
    }
    let c_star = iteration_bound(opts.xi, ub - lb);
    let limit = (4 * c_star).max(MIN_ITERATION_CAP) as usize;
    let p_t = sc.p_t;
    let dist = |pr: &Probe| (p_t - pr.power).abs();

    let mut p_p = ub - GOLDEN * (ub - lb);
    let mut p_q = lb + GOLDEN * (ub - lb);
    let mut at_p = probe(ch, sc, p_p)?;
    let mut at_q = probe(ch, sc, p_q)?;
    let mut delta = dist(&at_p).min(dist(&at_q));
    let mut iterations = vec![GoaIteration { p_p, p_q, p_tp: at_p.power, p_tq: at_q.power, delta }];
    let mut c = 0;
    let trace = |iterations: &[GoaIteration], c: usize, p_star: f64| GoaTrace {
        iterations: iterations.to_vec(),
        c,
        c_star_bound: c_star,
        p_lb: work.report.p_lb,
        p_ub: work.report.p_ub,
        p_star,
    };

    while delta > opts.xi {
        if c >= limit {
            return Err(Error::AlgorithmFailure {
                limit,
                bound: c_star,
                trace: trace(&iterations, c, f64::NAN).to_json_lines(),
            });
        }
        if dist(&at_p) <= dist(&at_q) {
            ub = p_q;
            p_q = p_p;
            p_p = ub - GOLDEN * (ub - lb);
            at_q = at_p;
            at_p = probe(ch, sc, p_p)?;
        } else {
            lb = p_p;
            p_p = p_q;
            p_q = lb + GOLDEN * (ub - lb);
            at_p = at_q;
            at_q = probe(ch, sc, p_q)?;
        }
        delta = dist(&at_p).min(dist(&at_q));
        c += 1;
        iterations.push(GoaIteration { p_p, p_q, p_tp: at_p.power, p_tq: at_q.power, delta });
    }

    let winner = if dist(&at_p) <= dist(&at_q) { at_p } else { at_q };
    let Some(sol) = winner.sol else {
        return Err(Error::Solver("every probe of the search was unreachable".into()));
    };
    let (design, f_matrices) = polish(ch, sc, &sol)?;
    let rank1_residual = sol.rank1_residual.clone();
    let mut solution = DesignSolution::evaluate(sc, ch, curve, design, "GOA")?;
    solution.f_matrices = Some(f_matrices);
    let trace = trace(&iterations, c, solution.p_star);
    Ok(GoaOutcome {
        solution,
        trace,
        bounds: work.report,
        rank1_residual,
    })
}

/// Scales the covariances of `sol` to the budget and lowers each
/// power-splitting ratio to the smallest value meeting its SINR target.
fn polish(ch: &ChannelSet, sc: &Scenario, sol: &Op4Solution) -> Result<(Design, Vec<HermitianMatrix>)> {
    let f = sol.precoders()?;
    let total: f64 = f.iter().map(CVector::norm_sqr).sum();
    let alpha = sc.p_t / total;
    let mut directions = Vec::with_capacity(sc.k);
    let mut powers = Vec::with_capacity(sc.k);
    for fk in &f {
        directions.push(fk.normalized()?);
        powers.push(fk.norm_sqr() * alpha);
    }
    let mut rho = Vec::with_capacity(sc.k);
    for k in 0..sc.k {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for j in 0..sc.k {
            let g = powers[j] * ch.h[k].gain(&directions[j]);
            if j == k {
                signal = g;
            } else {
                interference += g;
            }
        }
        // near the interference limit the tight ratio is ill-conditioned and
        // the solver's own ratio is kept
        let margin = signal - sc.gamma_bar[k] * (interference + sc.sigma_a_sq[k]);
        let r = if margin > 0.0 { sc.gamma_bar[k] * sc.sigma_d_sq[k] / margin } else { sol.rho[k] };
        let r = r.clamp(0.0, 1.0);
        rho.push(r);
    }
    let f_matrices = sol.f_matrices.iter().map(|m| m.scale(alpha)).collect();
    let naive = Design { directions, powers, rho };
    // exact power allocation for the extracted directions; the tight ratios
    // above amplify extraction error when a user is close to its
    // interference limit
    if let Ok(ps) = solve_dps_from(ch, sc, &naive.directions, &sol.rho) {
        let floor = (0..sc.k).map(|k| received_rf_power(sc, ch, &naive, k)).fold(f64::INFINITY, f64::min);
        if ps.p_star > floor {
            return Ok((Design { directions: naive.directions, powers: ps.powers, rho: ps.rho }, f_matrices));
        }
    }
    Ok((naive, f_matrices))
}
