use super::directions::{mrt_directions, svd_energy_direction};
use crate::cone::{solve, LinExpr, ProblemBuilder, Settings};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::{ChannelSet, Design, DesignSolution, EhCurve, Scenario};
use crate::optimal::solve_op3;

/// Energy-only transmit designs, all with every `rho_k = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyScheme {
    /// Max-min fair energy precoders from the semidefinite program.
    Efm,
    /// MRT directions with max-min fair power allocation.
    Mrt,
    /// Full budget on the dominant singular direction.
    Svd,
}

impl EnergyScheme {
    pub fn label(self) -> &'static str {
        match self {
            EnergyScheme::Efm => "EFM-only",
            EnergyScheme::Mrt => "MRT-only",
            EnergyScheme::Svd => "SVD-only",
        }
    }
}

/// Evaluates an energy-only design; `p_star` is the minimum received power.
pub fn energy_only(ch: &ChannelSet, sc: &Scenario, curve: &EhCurve, scheme: EnergyScheme) -> Result<DesignSolution> {
    ch.check(sc)?;
    let k = sc.k;
    let (directions, powers) = match scheme {
        EnergyScheme::Efm => {
            let op3 = solve_op3(ch, sc)?;
            let dirs = op3.f.iter().map(CVector::normalized).collect::<Result<Vec<_>>>()?;
            let mut pw: Vec<f64> = op3.f.iter().map(CVector::norm_sqr).collect();
            let total: f64 = pw.iter().sum();
            pw.iter_mut().for_each(|p| *p *= sc.p_t / total);
            (dirs, pw)
        }
        EnergyScheme::Mrt => {
            let dirs = mrt_directions(ch)?;
            let pw = maxmin_powers(ch, sc, &dirs)?;
            (dirs, pw)
        }
        EnergyScheme::Svd => (vec![svd_energy_direction(ch)?; k], vec![sc.p_t / k as f64; k]),
    };
    let design = Design { directions, powers, rho: vec![0.0; k] };
    DesignSolution::evaluate(sc, ch, curve, design, scheme.label())
}

/// Powers on fixed directions maximizing `min_k sum_j p_j |h_k^H f_j|^2`
/// within the budget (a linear program).
pub fn maxmin_powers(ch: &ChannelSet, sc: &Scenario, directions: &[CVector]) -> Result<Vec<f64>> {
    let k = sc.k;
    // gains relative to the largest keep the program well scaled
    let g: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| ch.h[i].gain(&directions[j])).collect()).collect();
    let gmax = g.iter().flatten().copied().fold(0.0, f64::max);
    if !(gmax > 0.0) {
        return Err(Error::DegenerateMatrix("every direction is orthogonal to every channel".into()));
    }
    let mut b = ProblemBuilder::new();
    let p = b.add_nonneg(k);
    let t = b.add_nonneg(1);
    for row in &g {
        let mut lhs = LinExpr::zero();
        for (j, gij) in row.iter().enumerate() {
            lhs.add_term(p.start + j, gij / gmax);
        }
        b.add_ge(lhs, t.at(0));
    }
    let mut budget = LinExpr::constant(1.0);
    for j in 0..k {
        budget = budget - p.at(j);
    }
    b.add_ge(budget, LinExpr::zero());
    b.minimize(-t.at(0));
    let sol = solve(&b.build()?, &Settings::default())?;
    if !sol.status.is_solved() {
        return Err(Error::Solver(format!("max-min power allocation: {:?}", sol.status)));
    }
    let mut pw: Vec<f64> = p.values(&sol.x).into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pw.iter().sum();
    pw.iter_mut().for_each(|v| *v *= sc.p_t / total);
    Ok(pw)
}
