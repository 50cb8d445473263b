use serde::Serialize;

use super::op2::{solve_op2, Op2Solution};
use super::op3::{solve_op3, Op3Solution};
use super::op4::{solve_op4, Op4Status};
use crate::error::{Error, Result};
use crate::model::{ChannelSet, Scenario};

/// Bracket on the optimal common received power `P*`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    /// Energy-only optimum, watts.
    pub p_e: f64,
    /// Smallest received power of the SINR-only design scaled to the budget,
    /// with every ratio set to the unused budget fraction, watts.
    pub p_i: f64,
    /// The same expression evaluated on the unscaled SINR-only design.
    pub p_i_unscaled: f64,
    pub p_lb: f64,
    pub p_ub: f64,
    /// Whether the SINR targets fit in the budget.
    pub feasible: bool,
    /// Power of the SINR-only design, watts.
    pub min_power_id: f64,
}

impl BoundsReport {
    /// `P_I < P_lb < P_ub < P_E` up to a relative slack.
    pub fn is_ordered(&self, slack: f64) -> bool {
        let lt = |a: f64, b: f64| a < b * (1.0 + slack);
        lt(self.p_i, self.p_lb) && lt(self.p_lb, self.p_ub) && lt(self.p_ub, self.p_e)
    }
}

/// Everything [`compute_bounds`] solved on the way.
#[derive(Clone, Debug)]
pub struct BoundsWork {
    pub report: BoundsReport,
    pub op2: Op2Solution,
    pub op3: Op3Solution,
}

/// `P_I`, `P_lb`, `P_ub` and `P_E` for one channel realization.
///
/// Fails with [`Error::Infeasible`] when the SINR targets exceed the budget.
pub fn compute_bounds(ch: &ChannelSet, sc: &Scenario) -> Result<BoundsReport> {
    compute_bounds_with_work(ch, sc).map(|w| w.report)
}

pub fn compute_bounds_with_work(ch: &ChannelSet, sc: &Scenario) -> Result<BoundsWork> {
    let op2 = solve_op2(ch, sc)?;
    if !op2.feasible {
        return Err(Error::Infeasible);
    }
    let op3 = solve_op3(ch, sc)?;
    let p_i = id_received_floor(ch, sc, &op2, sc.p_t / op2.total_power);
    let p_i_unscaled = id_received_floor(ch, sc, &op2, 1.0);
    let p_lb = p_i * sc.p_t / required_power(ch, sc, p_i)?;
    let p_ub = op3.p_e * sc.p_t / required_power(ch, sc, op3.p_e)?;
    Ok(BoundsWork {
        report: BoundsReport {
            p_e: op3.p_e,
            p_i,
            p_i_unscaled,
            p_lb,
            p_ub,
            feasible: true,
            min_power_id: op2.total_power,
        },
        op2,
        op3,
    })
}

/// `min_k (1 - sum_j |f_jI|^2 / P_T) (up sum_j |h_k^H f_jI|^2 + sigma_a_k^2)`.
///
/// With `up = P_T / sum_j |f_jI|^2` this is the received power of a feasible
/// point: the SINR-only beams scaled to the budget and `rho_k = 1 / up` for
/// every user, which keeps each SINR at or above its target.
fn id_received_floor(ch: &ChannelSet, sc: &Scenario, op2: &Op2Solution, up: f64) -> f64 {
    let share = 1.0 - op2.total_power / sc.p_t;
    (0..sc.k)
        .map(|k| share * (up * op2.f.iter().map(|f| ch.h[k].gain(f)).sum::<f64>() + sc.sigma_a_sq[k]))
        .fold(f64::INFINITY, f64::min)
}

fn required_power(ch: &ChannelSet, sc: &Scenario, p_hat: f64) -> Result<f64> {
    let sol = solve_op4(ch, sc, p_hat)?;
    match sol.status {
        Op4Status::Optimal => Ok(sol.min_power),
        Op4Status::Infeasible => Err(Error::Infeasible),
    }
}
