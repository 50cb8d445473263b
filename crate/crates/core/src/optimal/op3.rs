use super::sdp::{require_optimal, settings, HermVar};
use crate::cone::{solve, LinExpr, ProblemBuilder};
use crate::error::Result;
use crate::linalg::{herm_evd, rank1_extract, CVector, HermitianMatrix};
use crate::model::{ChannelSet, Scenario};

/// Eigenvalues below this fraction of the trace are treated as solver noise.
const EIG_FLOOR: f64 = 1e-7;

/// Max-min received RF power without SINR targets.
#[derive(Clone, Debug)]
pub struct Op3Solution {
    /// `min_k (sum_j h_k^H F_j h_k + sigma_a_k^2)`, watts.
    pub p_e: f64,
    /// Per-user covariance, each of rank one.
    pub f_matrices: Vec<HermitianMatrix>,
    /// `f_k` with `f_k f_k^H = F_k`.
    pub f: Vec<CVector>,
}

/// Maximizes the smallest received RF power over `sum_k tr F_k <= P_T`.
///
/// Only the aggregate `F = sum_k F_k` enters the problem, so it is solved for
/// `F` and the eigen-components of `F` are handed out to users afterwards:
/// components in decreasing eigenvalue order go to the not yet served user
/// with the largest gain on them; users left over share the component they
/// gain most from, splitting its power equally. Each `F_k` is then rank one
/// and the sum is unchanged.
pub fn solve_op3(ch: &ChannelSet, sc: &Scenario) -> Result<Op3Solution> {
    ch.check(sc)?;
    let (n, k) = (sc.n, sc.k);
    let gn: Vec<f64> = ch.h.iter().map(CVector::norm_sqr).collect();
    let g: Vec<CVector> = ch.h.iter().map(|h| h.normalized()).collect::<Result<_>>()?;
    // isotropic transmission gives every user P_T |h_k|^2 / N, so the optimum
    // is at least c0 and at most N c0 plus noise
    let c0 = sc.p_t * gn.iter().copied().fold(f64::INFINITY, f64::min) / n as f64;

    let mut b = ProblemBuilder::new();
    let y = HermVar::new(&mut b, n);
    let t = b.add_nonneg(1).at(0);
    for i in 0..k {
        let lhs = y.quad(&g[i]) * (sc.p_t * gn[i] / c0) + LinExpr::constant(sc.sigma_a_sq[i] / c0);
        b.add_ge(lhs, t.clone());
    }
    b.add_ge(LinExpr::constant(1.0), y.trace());
    b.minimize(-t);
    let sol = solve(&b.build()?, &settings())?;
    require_optimal(&sol, "max-min received power problem")?;

    let f_total = y.value(&sol.x).scale(sc.p_t);
    let f_matrices = split_among_users(&f_total, &ch.h);
    let f: Vec<CVector> = f_matrices
        .iter()
        .map(|m| rank1_extract(m, 1e-6).map(|(v, _)| v))
        .collect::<Result<_>>()?;
    let p_e = (0..k)
        .map(|i| f.iter().map(|fj| ch.h[i].gain(fj)).sum::<f64>() + sc.sigma_a_sq[i])
        .fold(f64::INFINITY, f64::min);
    Ok(Op3Solution { p_e, f_matrices, f })
}

fn split_among_users(total: &HermitianMatrix, h: &[CVector]) -> Vec<HermitianMatrix> {
    let k = h.len();
    let evd = herm_evd(total);
    let tr = total.trace();
    let comps: Vec<(f64, CVector)> = evd
        .eigenvalues
        .iter()
        .zip(&evd.eigenvectors)
        .filter(|(l, _)| **l > EIG_FLOOR * tr)
        .map(|(l, v)| (*l, v.clone()))
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; k];
    for (c, (_, v)) in comps.iter().enumerate() {
        let best = (0..k)
            .filter(|&u| owner[u].is_none())
            .max_by(|&a, &b| h[a].gain(v).total_cmp(&h[b].gain(v)));
        match best {
            Some(u) => owner[u] = Some(c),
            None => break,
        }
    }
    for u in 0..k {
        if owner[u].is_none() {
            let c = (0..comps.len())
                .max_by(|&a, &b| h[u].gain(&comps[a].1).total_cmp(&h[u].gain(&comps[b].1)))
                .expect("optimal covariance is nonzero");
            owner[u] = Some(c);
        }
    }
    // components nobody owns (more components than users) go to the user
    // gaining most, keeping the aggregate intact
    let mut sharers: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for (u, c) in owner.iter().enumerate() {
        sharers[c.expect("assigned")].push(u);
    }
    let mut out = vec![HermitianMatrix::zeros(total.dim()); k];
    for (c, (lam, v)) in comps.iter().enumerate() {
        let users = if sharers[c].is_empty() {
            vec![(0..k).max_by(|&a, &b| h[a].gain(v).total_cmp(&h[b].gain(v))).expect("k >= 1")]
        } else {
            sharers[c].clone()
        };
        let part = v.outer().scale(lam / users.len() as f64);
        for u in users {
            out[u] = out[u].add(&part);
        }
    }
    out
}
