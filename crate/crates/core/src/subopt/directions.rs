use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{herm_evd, CVector, HermitianMatrix, C64};
use crate::model::{ChannelSet, Scenario};
use crate::optimal::{solve_op2, solve_op3};

/// Norm below which a weighted combination counts as zero.
const COMBINATION_EPS: f64 = 1e-12;

/// `(w f_i + (1 - w) f_e) / |.|` for unit vectors `f_i` and `f_e`.
///
/// No phase alignment is applied, so antipodal inputs cancel at `w = 0.5`.
pub fn weighted_direction(f_i: &CVector, f_e: &CVector, w: f64) -> Result<CVector> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidInput(format!("weight {w} outside [0, 1]")));
    }
    if f_i.len() != f_e.len() {
        return Err(Error::InvalidInput("directions differ in length".into()));
    }
    if w == 1.0 {
        return Ok(f_i.clone());
    }
    if w == 0.0 {
        return Ok(f_e.clone());
    }
    let v = f_i.scale(w).add(&f_e.scale(1.0 - w));
    if v.norm() <= COMBINATION_EPS {
        return Err(Error::DegenerateCombination(0));
    }
    v.normalized()
}

/// The `x`-point weight grid `{0, 1/(x-1), ..., 1}`.
pub fn weight_grid(x: usize) -> Vec<f64> {
    (0..x).map(|i| if i + 1 == x { 1.0 } else { i as f64 / (x - 1) as f64 }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightProvenance {
    /// One common weight from an `x`-point grid.
    Uniform { w_bar: f64, x: usize },
    /// Per-user weights from a coordinate sweep over an `x`-point grid.
    Distinct { x: usize },
}

/// Per-user weights and the resulting unit directions.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDirections {
    pub w: Vec<f64>,
    pub directions: Vec<CVector>,
    pub provenance: WeightProvenance,
}

/// Combines the lists user by user; `f_e[k]` is first rotated into phase
/// with `f_i[k]`.
pub fn combine(f_i: &[CVector], f_e: &[CVector], w: &[f64]) -> Result<Vec<CVector>> {
    if f_i.len() != f_e.len() || f_i.len() != w.len() {
        return Err(Error::InvalidInput("direction and weight lists differ in length".into()));
    }
    (0..w.len())
        .map(|k| {
            let e = f_e[k].phase_aligned_to(&f_i[k]);
            weighted_direction(&f_i[k], &e, w[k]).map_err(|err| match err {
                Error::DegenerateCombination(_) => Error::DegenerateCombination(k),
                other => other,
            })
        })
        .collect()
}

/// Unit directions of the SINR-only precoders and of the energy-only
/// precoders.
#[derive(Clone, Debug)]
pub struct ProposedDirections {
    pub f_i: Vec<CVector>,
    pub f_e: Vec<CVector>,
}

/// Solves the minimum-power SINR problem and the energy-fairness problem
/// and normalizes their precoders.
///
/// Fails with [`Error::Infeasible`] when the SINR targets do not fit the
/// budget.
pub fn proposed_directions(ch: &ChannelSet, sc: &Scenario) -> Result<ProposedDirections> {
    let op2 = solve_op2(ch, sc)?;
    if !op2.feasible {
        return Err(Error::Infeasible);
    }
    let op3 = solve_op3(ch, sc)?;
    let f_i = op2.f.iter().map(CVector::normalized).collect::<Result<Vec<_>>>()?;
    let f_e = op3
        .f
        .iter()
        .zip(&f_i)
        .map(|(f, fi)| Ok(f.normalized()?.phase_aligned_to(fi)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProposedDirections { f_i, f_e })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaselineKind {
    Mrt,
    /// Every user gets the dominant right singular vector of the stacked
    /// channel matrix.
    SvdEnergy,
    /// `w` times zero forcing plus `1 - w` times MRT, normalized.
    MrtZfWeighted(f64),
}

pub fn mrt_directions(ch: &ChannelSet) -> Result<Vec<CVector>> {
    ch.h.iter().map(CVector::normalized).collect()
}

/// Unit projection of each `h_k` onto the null space of the other channels.
pub fn zf_directions(ch: &ChannelSet) -> Result<Vec<CVector>> {
    let (n, k) = (ch.n(), ch.k());
    if k > n {
        return Err(Error::UnsupportedBaseline(format!("zero forcing needs K <= N, got K = {k}, N = {n}")));
    }
    (0..k)
        .map(|u| {
            let h = ch.h[u].as_dvector();
            if k == 1 {
                return ch.h[u].normalized();
            }
            let others: Vec<_> = (0..k).filter(|&j| j != u).map(|j| ch.h[j].as_dvector().clone()).collect();
            let a = DMatrix::from_columns(&others);
            let gram = a.adjoint() * &a;
            let coef = gram
                .lu()
                .solve(&(a.adjoint() * h))
                .ok_or_else(|| Error::DegenerateMatrix("other users' channels are linearly dependent".into()))?;
            let proj = h - &a * coef;
            CVector::from_dvector(proj)?
                .normalized()
                .map_err(|_| Error::DegenerateMatrix(format!("channel {u} lies in the span of the others")))
        })
        .collect()
}

/// Dominant eigenvector of `sum_k h_k h_k^H`.
pub fn svd_energy_direction(ch: &ChannelSet) -> Result<CVector> {
    let n = ch.n();
    let mut gram = DMatrix::<C64>::zeros(n, n);
    for h in &ch.h {
        gram += h.outer().as_matrix();
    }
    let evd = herm_evd(&HermitianMatrix::new(gram)?);
    evd.eigenvectors[0].normalized()
}

pub fn baseline_directions(kind: BaselineKind, ch: &ChannelSet) -> Result<Vec<CVector>> {
    match kind {
        BaselineKind::Mrt => mrt_directions(ch),
        BaselineKind::SvdEnergy => Ok(vec![svd_energy_direction(ch)?; ch.k()]),
        BaselineKind::MrtZfWeighted(w) => {
            let zf = zf_directions(ch)?;
            let mrt = mrt_directions(ch)?;
            combine(&zf, &mrt, &vec![w; ch.k()])
        }
    }
}
