//! Dense primal-dual interior-point solver for cone programs
//!
//! ```text
//! minimize    c^T x
//! subject to  A x = b,   x in K = K_1 x K_2 x ... x K_p
//! ```
//!
//! where each `K_i` is a nonnegative orthant, a second-order cone
//! `{(t, u) : t >= |u|}`, or the cone of real symmetric PSD matrices. PSD
//! blocks are stored as `svec`: the lower triangle in column-major order with
//! off-diagonal entries scaled by `sqrt(2)`, so the Euclidean inner product of
//! two `svec`s equals the trace inner product of the matrices.
//!
//! The solver runs a homogeneous self-dual embedding with Nesterov-Todd
//! scaling and a Mehrotra predictor-corrector; see [`solve`].

mod builder;
mod dump;
mod ipm;

pub use builder::{hyperbolic_to_soc, LinExpr, ProblemBuilder, PsdVar, VarRange};
pub use dump::{read_problem, write_problem};
pub use ipm::solve;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// One factor of the product cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeSpec {
    /// `n` nonnegative scalars.
    NonNeg(usize),
    /// Second-order cone of dimension `n` (`n >= 2`), head first.
    Soc(usize),
    /// Real symmetric PSD matrices of the given order, stored as `svec`.
    Psd(usize),
}

impl ConeSpec {
    /// Number of entries the cone occupies in the variable vector.
    pub fn len(&self) -> usize {
        match *self {
            ConeSpec::NonNeg(n) | ConeSpec::Soc(n) => n,
            ConeSpec::Psd(order) => order * (order + 1) / 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Barrier degree, equal to `<e, e>` for the cone's identity `e`.
    pub fn degree(&self) -> usize {
        match *self {
            ConeSpec::NonNeg(n) => n,
            ConeSpec::Soc(_) => 1,
            ConeSpec::Psd(order) => order,
        }
    }
}

/// A cone program in standard form.
#[derive(Clone, Debug)]
pub struct ConicProblem {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub cones: Vec<ConeSpec>,
}

impl ConicProblem {
    pub fn new(c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>, cones: Vec<ConeSpec>) -> Result<Self> {
        let n = c.len();
        if a.ncols() != n {
            return Err(Error::InvalidInput(format!("A has {} columns, expected {n}", a.ncols())));
        }
        if a.nrows() != b.len() {
            return Err(Error::InvalidInput(format!("A has {} rows but b has {}", a.nrows(), b.len())));
        }
        let total: usize = cones.iter().map(ConeSpec::len).sum();
        if total != n {
            return Err(Error::InvalidInput(format!("cone sizes sum to {total}, expected {n}")));
        }
        for cone in &cones {
            match *cone {
                ConeSpec::Soc(k) if k < 2 => {
                    return Err(Error::InvalidInput("second-order cone needs dimension >= 2".into()))
                }
                ConeSpec::Psd(0) | ConeSpec::NonNeg(0) => {
                    return Err(Error::InvalidInput("empty cone".into()))
                }
                _ => {}
            }
        }
        if c.iter().chain(a.iter()).chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("problem data must be finite".into()));
        }
        Ok(Self { c, a, b, cones })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Sum of cone degrees.
    pub fn degree(&self) -> usize {
        self.cones.iter().map(ConeSpec::degree).sum()
    }

    /// Offsets of each cone in the variable vector.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.cones
            .iter()
            .map(|c| {
                let o = off;
                off += c.len();
                o
            })
            .collect()
    }
}

/// Solver tolerances and iteration cap.
#[derive(Clone, Copy, Debug)]
pub struct Settings {
    /// Relative primal and dual residual tolerance.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Tolerance on infeasibility certificates.
    pub infeas_tol: f64,
    /// Residual and gap tolerance for [`Status::AlmostOptimal`].
    pub reduced_tol: f64,
    pub max_iter: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-7,
            infeas_tol: 1e-8,
            reduced_tol: 1e-5,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// No `x` in the cone satisfies `A x = b`.
    Infeasible,
    /// The objective is unbounded below.
    Unbounded,
    /// The solver stalled but its best iterate meets the reduced tolerances.
    AlmostOptimal,
    MaxIterations,
}

impl Status {
    /// `Optimal` or `AlmostOptimal`.
    pub fn is_solved(self) -> bool {
        matches!(self, Status::Optimal | Status::AlmostOptimal)
    }
}

/// Per-iteration record kept for diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct IterRecord {
    /// `(x^T s + tau kappa) / (nu + 1)` at the start of the iteration.
    pub mu: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub rel_gap: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    /// Primal point. For infeasible or unbounded status, the certificate
    /// direction instead.
    pub x: DVector<f64>,
    /// Multipliers of the equality rows (`s = c - A^T y`).
    pub y: DVector<f64>,
    pub s: DVector<f64>,
    pub status: Status,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub rel_gap: f64,
    pub iterations: usize,
    pub history: Vec<IterRecord>,
    pub diagnostics: Option<String>,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Index of `(i, j)` (`i >= j`) inside an `svec` of the given order.
pub fn svec_index(order: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    // columns 0..j hold order + (order-1) + ... + (order-j+1) entries
    j * order - j * j.saturating_sub(1) / 2 + (i - j)
}

/// `svec` of a symmetric matrix.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in j..n {
            v[k] = if i == j {
                m[(i, j)]
            } else {
                std::f64::consts::SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)])
            };
            k += 1;
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], order: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(order, order);
    let mut k = 0;
    for j in 0..order {
        for i in j..order {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let x = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
            k += 1;
        }
    }
    m
}

/// Output of [`presolve`]: the reduced problem with unit-norm rows, the
/// original index of each kept row and the factor it was divided by.
pub(crate) struct Presolved {
    pub problem: ConicProblem,
    pub kept: Vec<usize>,
    pub row_scale: Vec<f64>,
}

/// Removes zero rows and duplicate rows (up to positive or negative scaling)
/// and scales the remaining rows to unit norm.
/// Returns `None` when a dropped row contradicts the kept ones.
pub(crate) fn presolve(p: &ConicProblem) -> Option<Presolved> {
    const TOL: f64 = 1e-12;
    let m = p.num_rows();
    let mut kept: Vec<usize> = Vec::with_capacity(m);
    let mut row_scale: Vec<f64> = Vec::with_capacity(m);
    let mut normalized: Vec<(DVector<f64>, f64)> = Vec::with_capacity(m);
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::with_capacity(m);
    for i in 0..m {
        let row = p.a.row(i).transpose();
        let nrm = row.norm();
        if nrm <= TOL {
            if p.b[i].abs() > TOL * (1.0 + p.b.amax()) {
                return None;
            }
            continue;
        }
        let mut r = row / nrm;
        let mut rhs = p.b[i] / nrm;
        let sign_free = (r.clone(), rhs);
        // canonical sign: first significant entry positive
        if let Some(first) = r.iter().find(|v| v.abs() > TOL) {
            if *first < 0.0 {
                r = -r;
                rhs = -rhs;
            }
        }
        let mut duplicate = false;
        for (q, qb) in &normalized {
            if (q - &r).amax() <= TOL {
                if (qb - rhs).abs() > 1e-9 * (1.0 + rhs.abs()) {
                    return None;
                }
                duplicate = true;
                break;
            }
        }
        if !duplicate {
            rows.push(sign_free);
            normalized.push((r, rhs));
            kept.push(i);
            row_scale.push(nrm);
        }
    }
    let a = DMatrix::from_fn(kept.len(), p.num_vars(), |r, c| rows[r].0[c]);
    let b = DVector::from_iterator(kept.len(), rows.iter().map(|r| r.1));
    Some(Presolved {
        problem: ConicProblem {
            c: p.c.clone(),
            a,
            b,
            cones: p.cones.clone(),
        },
        kept,
        row_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_roundtrip_and_inner_product() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, -0.5, 1.0, 3.0, 0.25, -0.5, 0.25, 1.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, -2.0, 0.0, -2.0, 0.5, 1.5, 0.0, 1.5, -1.0]);
        assert!((smat(svec(&a).as_slice(), 3) - &a).amax() < 1e-15);
        let tr = (&a * &b).trace();
        assert!((svec(&a).dot(&svec(&b)) - tr).abs() < 1e-14);
        for j in 0..3 {
            for i in j..3 {
                let mut e = DMatrix::zeros(3, 3);
                e[(i, j)] = 1.0;
                e[(j, i)] = 1.0;
                let v = svec(&e);
                assert!(v[svec_index(3, i, j)] != 0.0);
            }
        }
    }

    #[test]
    fn presolve_drops_zero_and_duplicate_rows() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 0.0, 0.0, 2.0, 2.0, 1.0, -1.0]);
        let b = DVector::from_vec(vec![1.0, 0.0, 2.0, 0.0]);
        let p = ConicProblem::new(DVector::from_vec(vec![1.0, 1.0]), a, b, vec![ConeSpec::NonNeg(2)]).unwrap();
        let pre = presolve(&p).unwrap();
        assert_eq!(pre.kept, vec![0, 3]);
        assert!((pre.row_scale[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((pre.problem.a.row(1).norm() - 1.0).abs() < 1e-15);

        let bad_b = DVector::from_vec(vec![1.0, 0.0, 3.0, 0.0]);
        let bad = ConicProblem { b: bad_b, ..p.clone() };
        assert!(presolve(&bad).is_none());
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let err = ConicProblem::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::zeros(1, 2),
            DVector::zeros(1),
            vec![ConeSpec::NonNeg(3)],
        );
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }
}
