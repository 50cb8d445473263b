use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::{smat, svec_index, ConeSpec, ConicProblem};
use crate::error::{Error, Result};

/// Affine expression `sum_i coef_i x_i + constant` over builder variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    terms: BTreeMap<usize, f64>,
    constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(index: usize) -> Self {
        Self::term(index, 1.0)
    }

    pub fn term(index: usize, coef: f64) -> Self {
        let mut e = Self::zero();
        e.add_term(index, coef);
        e
    }

    pub fn add_term(&mut self, index: usize, coef: f64) {
        *self.terms.entry(index).or_insert(0.0) += coef;
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.terms.iter().map(|(&i, &c)| (i, c))
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.constant + self.terms.iter().map(|(&i, &c)| c * x[i]).sum::<f64>()
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (i, c) in rhs.terms {
            self.add_term(i, c);
        }
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: f64) -> LinExpr {
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }
}

/// Contiguous block of scalar variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarRange {
    pub start: usize,
    pub len: usize,
}

impl VarRange {
    pub fn at(&self, i: usize) -> LinExpr {
        assert!(i < self.len, "index {i} out of range {}", self.len);
        LinExpr::var(self.start + i)
    }

    pub fn values(&self, x: &DVector<f64>) -> Vec<f64> {
        x.rows(self.start, self.len).iter().copied().collect()
    }
}

/// A symmetric PSD matrix variable stored as `svec`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsdVar {
    pub start: usize,
    pub order: usize,
}

impl PsdVar {
    /// `<C, X>` for symmetric `C`.
    pub fn inner(&self, cm: &DMatrix<f64>) -> LinExpr {
        assert_eq!(cm.nrows(), self.order);
        assert_eq!(cm.ncols(), self.order);
        let mut e = LinExpr::zero();
        for j in 0..self.order {
            for i in j..self.order {
                let coef = if i == j {
                    cm[(i, i)]
                } else {
                    std::f64::consts::FRAC_1_SQRT_2 * (cm[(i, j)] + cm[(j, i)])
                };
                if coef != 0.0 {
                    e.add_term(self.start + svec_index(self.order, i, j), coef);
                }
            }
        }
        e
    }

    pub fn trace(&self) -> LinExpr {
        self.inner(&DMatrix::identity(self.order, self.order))
    }

    pub fn value(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let len = self.order * (self.order + 1) / 2;
        smat(x.rows(self.start, len).as_slice(), self.order)
    }
}

/// Incremental construction of a [`ConicProblem`]. Variables are allocated
/// cone by cone; constraints are affine equalities between expressions.
#[derive(Clone, Debug, Default)]
pub struct ProblemBuilder {
    cones: Vec<ConeSpec>,
    num_vars: usize,
    rows: Vec<LinExpr>,
    objective: LinExpr,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn alloc(&mut self, cone: ConeSpec) -> usize {
        let start = self.num_vars;
        self.num_vars += cone.len();
        match (self.cones.last_mut(), cone) {
            (Some(ConeSpec::NonNeg(k)), ConeSpec::NonNeg(n)) => *k += n,
            _ => self.cones.push(cone),
        }
        start
    }

    pub fn add_nonneg(&mut self, n: usize) -> VarRange {
        assert!(n > 0);
        VarRange { start: self.alloc(ConeSpec::NonNeg(n)), len: n }
    }

    pub fn add_soc(&mut self, n: usize) -> VarRange {
        assert!(n >= 2);
        VarRange { start: self.alloc(ConeSpec::Soc(n)), len: n }
    }

    pub fn add_psd(&mut self, order: usize) -> PsdVar {
        assert!(order > 0);
        PsdVar { start: self.alloc(ConeSpec::Psd(order)), order }
    }

    /// `lhs == rhs`.
    pub fn add_eq(&mut self, lhs: LinExpr, rhs: LinExpr) {
        self.rows.push(lhs - rhs);
    }

    /// `lhs >= rhs`, through a fresh nonnegative slack. Returns the slack.
    pub fn add_ge(&mut self, lhs: LinExpr, rhs: LinExpr) -> LinExpr {
        let slack = self.add_nonneg(1).at(0);
        self.rows.push(lhs - rhs - slack.clone());
        slack
    }

    pub fn minimize(&mut self, objective: LinExpr) {
        self.objective = objective;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Constant term of the objective, which the standard form drops.
    pub fn objective_offset(&self) -> f64 {
        self.objective.constant
    }

    pub fn build(&self) -> Result<ConicProblem> {
        let n = self.num_vars;
        let m = self.rows.len();
        let mut c = DVector::zeros(n);
        for (i, coef) in self.objective.terms() {
            c[i] += coef;
        }
        let mut a = DMatrix::zeros(m, n);
        let mut b = DVector::zeros(m);
        for (r, row) in self.rows.iter().enumerate() {
            for (i, coef) in row.terms() {
                if i >= n {
                    return Err(Error::InvalidInput(format!("variable {i} was never allocated")));
                }
                a[(r, i)] += coef;
            }
            b[r] = -row.constant;
        }
        ConicProblem::new(c, a, b, self.cones.clone())
    }
}

/// Adds `u v >= a` with `u, v >= 0` as a three-dimensional second-order cone
/// `(u + v, 2 sqrt(a), u - v)`.
pub fn hyperbolic_to_soc(builder: &mut ProblemBuilder, a: f64, u: LinExpr, v: LinExpr) -> Result<VarRange> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!("hyperbolic bound must be nonnegative, got {a}")));
    }
    let cone = builder.add_soc(3);
    builder.add_eq(cone.at(0), u.clone() + v.clone());
    builder.add_eq(cone.at(1), LinExpr::constant(2.0 * a.sqrt()));
    builder.add_eq(cone.at(2), u - v);
    Ok(cone)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions_combine_terms() {
        let e = LinExpr::var(0) * 2.0 + LinExpr::term(1, 3.0) - LinExpr::var(0) + LinExpr::constant(1.5);
        let x = DVector::from_vec(vec![4.0, -1.0]);
        assert_eq!(e.eval(&x), 4.0 - 3.0 + 1.5);
        assert_eq!(e.terms().count(), 2);
    }

    #[test]
    fn adjacent_nonneg_blocks_merge() {
        let mut b = ProblemBuilder::new();
        b.add_nonneg(2);
        b.add_nonneg(1);
        b.add_soc(3);
        b.add_nonneg(1);
        let p = b.build().unwrap();
        assert_eq!(p.cones, vec![ConeSpec::NonNeg(3), ConeSpec::Soc(3), ConeSpec::NonNeg(1)]);
    }

    #[test]
    fn psd_inner_matches_trace_product() {
        let mut b = ProblemBuilder::new();
        let x = b.add_psd(2);
        let cm = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -3.0]);
        let xm = DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.25, 2.0]);
        let v = super::super::svec(&xm);
        assert!((x.inner(&cm).eval(&v) - (&cm * &xm).trace()).abs() < 1e-14);
        assert!((x.value(&v) - xm).amax() < 1e-15);
    }

    #[test]
    fn negative_hyperbolic_bound_is_rejected() {
        let mut b = ProblemBuilder::new();
        let u = b.add_nonneg(2);
        assert!(hyperbolic_to_soc(&mut b, -1.0, u.at(0), u.at(1)).is_err());
    }
}
