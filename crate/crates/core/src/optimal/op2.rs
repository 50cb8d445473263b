use super::sdp::{require_optimal, settings, HermVar};
use crate::cone::{solve, LinExpr, ProblemBuilder, Status};
use crate::error::{Error, Result};
use crate::linalg::{rank1_extract, CVector, HermitianMatrix};
use crate::model::{ChannelSet, Scenario};

/// Minimum-power precoders meeting every SINR target with all received power
/// sent to information decoding.
#[derive(Clone, Debug)]
pub struct Op2Solution {
    /// `f_k` including power, `|f_k|^2 = p_k`.
    pub f: Vec<CVector>,
    pub f_matrices: Vec<HermitianMatrix>,
    /// `sum_k |f_k|^2`, or infinity when no power achieves the targets.
    pub total_power: f64,
    /// The targets are reachable within the budget `P_T`.
    pub feasible: bool,
    /// Rank-one residual of each `F_k`.
    pub rank1_residual: Vec<f64>,
}

/// Minimizes `sum_k tr F_k` subject to
/// `h_k^H F_k h_k - gamma_k sum_{j != k} h_k^H F_j h_k >= gamma_k (sigma_a^2 + sigma_d^2)`.
pub fn solve_op2(ch: &ChannelSet, sc: &Scenario) -> Result<Op2Solution> {
    ch.check(sc)?;
    let k = sc.k;
    let gn: Vec<f64> = ch.h.iter().map(CVector::norm_sqr).collect();
    let g: Vec<CVector> = ch.h.iter().map(|h| h.normalized()).collect::<Result<_>>()?;
    let need: Vec<f64> = (0..k).map(|i| sc.gamma_bar[i] * (sc.sigma_a_sq[i] + sc.sigma_d_sq[i]) / gn[i]).collect();
    // every user alone already needs need[i], so the optimum is at least the sum
    let scale: f64 = need.iter().sum();
    let infeasible = || Op2Solution {
        f: vec![CVector::zeros(sc.n); k],
        f_matrices: vec![HermitianMatrix::zeros(sc.n); k],
        total_power: f64::INFINITY,
        feasible: false,
        rank1_residual: vec![0.0; k],
    };
    if scale > sc.p_t {
        return Ok(infeasible());
    }

    let mut b = ProblemBuilder::new();
    let vars: Vec<HermVar> = (0..k).map(|_| HermVar::new(&mut b, sc.n)).collect();
    // rows divided by gamma_k keep every coefficient at most one
    for i in 0..k {
        let mut lhs = vars[i].quad(&g[i]) * (1.0 / sc.gamma_bar[i]);
        for (j, v) in vars.iter().enumerate() {
            if j != i {
                lhs = lhs - v.quad(&g[i]);
            }
        }
        b.add_ge(lhs, LinExpr::constant(need[i] / (scale * sc.gamma_bar[i])));
    }
    b.minimize(vars.iter().fold(LinExpr::zero(), |acc, v| acc + v.trace()));
    let sol = solve(&b.build()?, &settings())?;
    if sol.status == Status::Infeasible {
        return Ok(infeasible());
    }
    require_optimal(&sol, "minimum-power SINR problem")?;

    let mut f = Vec::with_capacity(k);
    let mut mats = Vec::with_capacity(k);
    let mut res = Vec::with_capacity(k);
    for v in &vars {
        let m = v.value(&sol.x).scale(scale);
        let (fk, r) = rank1_extract(&m, 1e-6).map_err(|e| Error::Solver(format!("SINR problem precoder: {e}")))?;
        f.push(fk);
        mats.push(m);
        res.push(r);
    }
    let total_power: f64 = f.iter().map(CVector::norm_sqr).sum();
    let shortfall = (0..k)
        .map(|i| {
            let sig = ch.h[i].gain(&f[i]);
            let int: f64 = (0..k).filter(|&j| j != i).map(|j| ch.h[i].gain(&f[j])).sum();
            1.0 - sig / (sc.gamma_bar[i] * (int + sc.sigma_a_sq[i] + sc.sigma_d_sq[i]))
        })
        .fold(0.0, f64::max);
    if shortfall > 1e-3 {
        return Err(Error::Solver(format!(
            "minimum-power SINR problem: extracted beams miss a target by {:.1e} relative",
            shortfall
        )));
    }
    Ok(Op2Solution {
        f,
        f_matrices: mats,
        total_power,
        feasible: total_power <= sc.p_t,
        rank1_residual: res,
    })
}
