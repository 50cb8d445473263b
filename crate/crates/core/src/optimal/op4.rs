use super::sdp::{settings, HermVar};
use crate::cone::{hyperbolic_to_soc, solve, ConicSolution, LinExpr, ProblemBuilder, Status, VarRange};
use crate::error::{Error, Result};
use crate::linalg::{rank1_extract, CVector, HermitianMatrix};
use crate::model::{ChannelSet, Scenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op4Status {
    Optimal,
    /// The SINR targets cannot be met at any power.
    Infeasible,
}

/// Minimum transmit power reaching a common received-power level `P_hat`
/// while meeting every SINR target.
#[derive(Clone, Debug)]
pub struct Op4Solution {
    pub status: Op4Status,
    /// `sum_k tr F_k`, infinity when infeasible.
    pub min_power: f64,
    pub f_matrices: Vec<HermitianMatrix>,
    pub rho: Vec<f64>,
    /// Rank-one residual of each `F_k`.
    pub rank1_residual: Vec<f64>,
    pub solver_iterations: usize,
}

impl Op4Solution {
    /// `f_k` with `|f_k|^2` equal to the dominant eigenvalue of `F_k`.
    pub fn precoders(&self) -> Result<Vec<CVector>> {
        self.f_matrices
            .iter()
            .map(|m| rank1_extract(m, 1e-6).map(|(v, _)| v))
            .collect()
    }
}

/// Solves
///
/// ```text
/// min sum_k tr F_k
/// s.t. rho_k (h_k^H F_k h_k - gamma_k sum_{j!=k} h_k^H F_j h_k - gamma_k sigma_a_k^2) >= gamma_k sigma_d_k^2
///      (1 - rho_k) (sum_j h_k^H F_j h_k + sigma_a_k^2) >= P_hat
///      F_k PSD, 0 <= rho_k <= 1
/// ```
///
/// Both products are written as hyperbolic second-order cone constraints.
/// Powers are measured in units of `S`, a lower bound on the optimum.
pub fn solve_op4(ch: &ChannelSet, sc: &Scenario, p_hat: f64) -> Result<Op4Solution> {
    ch.check(sc)?;
    if !(p_hat > 0.0 && p_hat.is_finite()) {
        return Err(Error::InvalidInput(format!("received-power level must be positive, got {p_hat}")));
    }
    let k = sc.k;
    let gn: Vec<f64> = ch.h.iter().map(CVector::norm_sqr).collect();
    let g: Vec<CVector> = ch.h.iter().map(|h| h.normalized()).collect::<Result<_>>()?;
    // lower bounds on the optimum: SINR alone, and received power alone
    let sinr_floor: f64 = (0..k).map(|i| sc.gamma_bar[i] * (sc.sigma_a_sq[i] + sc.sigma_d_sq[i]) / gn[i]).sum();
    let eh_floor = (0..k)
        .map(|i| (p_hat - sc.sigma_a_sq[i]).max(0.0) / gn[i])
        .fold(0.0, f64::max);
    let s = sinr_floor.max(eh_floor);
    // a breakdown of the interior-point iteration is retried under a
    // different power unit, which changes the conditioning of the cones
    let mut last = None;
    for unit in [s, 4.0 * s, 0.25 * s] {
        match solve_scaled(sc, p_hat, &g, &gn, unit) {
            Err(Error::Solver(m)) => last = Some(m),
            other => return other,
        }
    }
    Err(Error::Solver(last.unwrap_or_default()))
}

fn solve_scaled(sc: &Scenario, p_hat: f64, g: &[CVector], gn: &[f64], s: f64) -> Result<Op4Solution> {
    let (n, k) = (sc.n, sc.k);
    let beta: Vec<f64> = gn.iter().map(|x| s * x).collect();
    let c: Vec<f64> = (0..k).map(|i| sc.gamma_bar[i] * sc.sigma_d_sq[i] / beta[i]).collect();

    let mut b = ProblemBuilder::new();
    let vars: Vec<HermVar> = (0..k).map(|_| HermVar::new(&mut b, n)).collect();
    let z = b.add_nonneg(k);
    for i in 0..k {
        let q: Vec<LinExpr> = vars.iter().map(|v| v.quad(&g[i])).collect();
        let mut margin = q[i].clone() - LinExpr::constant(sc.gamma_bar[i] * sc.sigma_a_sq[i] / beta[i]);
        for (j, qj) in q.iter().enumerate() {
            if j != i {
                margin = margin - qj.clone() * sc.gamma_bar[i];
            }
        }
        hyperbolic_to_soc(&mut b, c[i], margin, z.at(i))?;
        let received = q.into_iter().fold(LinExpr::constant(sc.sigma_a_sq[i] / beta[i]), |a, e| a + e);
        let eh_share = LinExpr::constant(1.0) - z.at(i);
        hyperbolic_to_soc(&mut b, p_hat / beta[i], received, eh_share)?;
    }
    b.minimize(vars.iter().fold(LinExpr::zero(), |a, v| a + v.trace()));
    let sol = solve(&b.build()?, &settings())?;
    finish(sol, &vars, &z, s)
}

fn finish(
    sol: ConicSolution,
    vars: &[HermVar],
    z: &VarRange,
    s: f64,
) -> Result<Op4Solution> {
    match sol.status {
        Status::Optimal | Status::AlmostOptimal => {}
        Status::Infeasible => {
            return Ok(Op4Solution {
                status: Op4Status::Infeasible,
                min_power: f64::INFINITY,
                f_matrices: Vec::new(),
                rho: Vec::new(),
                rank1_residual: Vec::new(),
                solver_iterations: sol.iterations,
            })
        }
        status => {
            return Err(Error::Solver(format!(
                "minimum-power problem: {status:?} after {} iterations{}",
                sol.iterations,
                sol.diagnostics.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
            )))
        }
    }
    let f_matrices: Vec<HermitianMatrix> = vars.iter().map(|v| v.value(&sol.x).scale(s)).collect();
    let zv = z.values(&sol.x);
    let rho: Vec<f64> = zv.iter().map(|z| z.clamp(0.0, 1.0)).collect();
    let rank1_residual = f_matrices
        .iter()
        .map(|m| rank1_extract(m, 1e-6).map(|(_, r)| r))
        .collect::<Result<_>>()?;
    let min_power = f_matrices.iter().map(HermitianMatrix::trace).sum();
    Ok(Op4Solution {
        status: Op4Status::Optimal,
        min_power,
        f_matrices,
        rho,
        rank1_residual,
        solver_iterations: sol.iterations,
    })
}
