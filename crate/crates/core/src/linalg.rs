//! Dense complex vectors and Hermitian matrices, a cyclic Jacobi eigensolver,
//! and the real symmetric embedding used to hand complex PSD constraints to
//! the real cone solver.
//!
//! The embedding maps an `n x n` Hermitian `A = X + iY` to the `2n x 2n`
//! real symmetric matrix
//!
//! ```text
//! [ X  -Y ]
//! [ Y   X ]
//! ```
//!
//! Every eigenvalue of `A` appears twice in the embedding, so traces double.
//! Callers that express `tr(A)` or `h^H A h` through the embedding divide by
//! two.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;

/// Relative tolerance on `A - A^H` accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-12;

const PHASE_EPS: f64 = 1e-12;

/// A dense complex column vector with at least one entry.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector(DVector<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must have at least one entry".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("vector entries must be finite".into()));
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn from_dvector(v: DVector<C64>) -> Result<Self> {
        Self::new(v.as_slice().to_vec())
    }

    /// Builds a vector from real parts only.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n.max(1)))
    }

    /// Unit vector along coordinate `i`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn entries(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `self^H other`.
    pub fn inner(&self, other: &CVector) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `|self^H other|^2`.
    pub fn gain(&self, other: &CVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scale(&self, a: f64) -> CVector {
        Self(&self.0 * C64::new(a, 0.0))
    }

    pub fn scale_c(&self, a: C64) -> CVector {
        Self(&self.0 * a)
    }

    pub fn add(&self, other: &CVector) -> CVector {
        Self(&self.0 + &other.0)
    }

    /// Unit-norm copy; fails on a (numerically) zero vector.
    pub fn normalized(&self) -> Result<CVector> {
        let n = self.norm();
        if !(n > f64::MIN_POSITIVE * 1e10) {
            return Err(Error::DegenerateMatrix("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Rotates the global phase so the first entry with modulus above `1e-12`
    /// is real and non-negative.
    pub fn phase_normalized(&self) -> CVector {
        match self.0.iter().find(|z| z.norm() > PHASE_EPS) {
            Some(z) => {
                let rot = z.conj() / z.norm();
                self.scale_c(rot)
            }
            None => self.clone(),
        }
    }

    /// Rotates the global phase of `self` so that `reference^H self` is real
    /// and non-negative.
    pub fn phase_aligned_to(&self, reference: &CVector) -> CVector {
        let ip = reference.inner(self);
        if ip.norm() <= PHASE_EPS {
            return self.clone();
        }
        self.scale_c(ip.conj() / ip.norm())
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_distance(&self, other: &CVector) -> f64 {
        let aligned = self.phase_aligned_to(other);
        (&aligned.0 - &other.0).norm()
    }

    pub fn outer(&self) -> HermitianMatrix {
        HermitianMatrix(&self.0 * self.0.adjoint())
    }
}

/// A square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(DMatrix<C64>);

impl HermitianMatrix {
    /// Validates Hermitian symmetry within [`HERMITIAN_TOL`] (relative to the
    /// largest entry) and stores the symmetrized `(A + A^H) / 2`.
    pub fn new(a: DMatrix<C64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let n = a.nrows();
        for i in 0..n {
            for j in i..n {
                let d = (a[(i, j)] - a[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian at ({i},{j}): mismatch {d:e}"
                    )));
                }
            }
        }
        Ok(Self::symmetrized(a))
    }

    fn symmetrized(a: DMatrix<C64>) -> Self {
        let adj = a.adjoint();
        Self((a + adj) * C64::new(0.5, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// `h^H A h`, real for Hermitian `A`.
    pub fn quad_form(&self, h: &CVector) -> f64 {
        let ah = &self.0 * h.as_dvector();
        h.as_dvector().dotc(&ah).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self(&self.0 * C64::new(a, 0.0))
    }

    pub fn add(&self, other: &HermitianMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Self {
        Self(&self.0 - &other.0)
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct Eigendecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<CVector>,
}

impl Eigendecomposition {
    /// `sum_i lambda_i v_i v_i^H`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.eigenvectors[0].len();
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let vv = v.as_dvector();
            acc += (vv * vv.adjoint()) * C64::new(*lam, 0.0);
        }
        HermitianMatrix::symmetrized(acc)
    }
}

/// Cyclic Jacobi eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues in descending order and the matching orthonormal
/// eigenvectors as matrix columns.
pub fn sym_jacobi(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    const MAX_SWEEPS: usize = 100;
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_jacobi needs a square matrix");
    let mut m = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let total = m.norm();
    if total == 0.0 {
        return (vec![0.0; n], v);
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]).then(i.cmp(&j)));
    let vals = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &v.column(src));
    }
    (vals, vecs)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi on its real
/// embedding.
///
/// Each complex eigenpair shows up twice in the embedding (as `[x; y]` and
/// `[-y; x]`). Real eigenvectors are visited in descending eigenvalue order
/// and mapped to `x + iy`; a candidate is kept once complex Gram-Schmidt
/// against the already accepted vectors leaves enough of it.
pub fn herm_evd(a: &HermitianMatrix) -> Eigendecomposition {
    let n = a.dim();
    let embedded = complex_to_real_embed(a);
    let (_, rvecs) = sym_jacobi(&embedded);

    let mut accepted: Vec<DVector<C64>> = Vec::with_capacity(n);
    let mut used = vec![false; 2 * n];
    for threshold in [0.25, 1e-6] {
        for col in 0..2 * n {
            if accepted.len() == n {
                break;
            }
            if used[col] {
                continue;
            }
            let mut v = DVector::<C64>::from_fn(n, |i, _| C64::new(rvecs[(i, col)], rvecs[(i + n, col)]));
            for w in &accepted {
                let proj = w.dotc(&v);
                v -= w * proj;
            }
            let nrm = v.norm();
            if nrm * nrm >= threshold {
                used[col] = true;
                accepted.push(v / C64::new(nrm, 0.0));
            }
        }
    }
    debug_assert_eq!(accepted.len(), n);

    let mat = a.as_matrix();
    let mut pairs: Vec<(f64, CVector)> = accepted
        .into_iter()
        .map(|v| {
            let lam = v.dotc(&(mat * &v)).re;
            (lam, CVector(v).phase_normalized())
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    Eigendecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Dominant rank-one factor of a PSD matrix.
///
/// Returns `sqrt(lambda_1) v_1` (phase-normalized) and the residual
/// `1 - lambda_1 / tr(F)`, which is zero exactly when `F` has rank one.
pub fn rank1_extract(f: &HermitianMatrix, tol: f64) -> Result<(CVector, f64)> {
    let tr = f.trace();
    if !(tr > 0.0) {
        return Err(Error::DegenerateMatrix(format!("trace {tr:e} is not positive")));
    }
    let evd = herm_evd(f);
    let lam_min = *evd.eigenvalues.last().expect("non-empty");
    if lam_min < -tol * tr.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not PSD: smallest eigenvalue {lam_min:e}"
        )));
    }
    let lam1 = evd.eigenvalues[0].max(0.0);
    let v = evd.eigenvectors[0].scale(lam1.sqrt());
    let residual = (1.0 - lam1 / tr).max(0.0);
    Ok((v, residual))
}

/// Real symmetric embedding `[[Re A, -Im A], [Im A, Re A]]`.
pub fn complex_to_real_embed(a: &HermitianMatrix) -> DMatrix<f64> {
    let n = a.dim();
    let m = a.as_matrix();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`complex_to_real_embed`] after projecting `y` onto the
/// embedded structure: `X = (Y11 + Y22)/2`, `Y = (Y21 - Y12)/2`.
pub fn real_to_complex(y: &DMatrix<f64>) -> HermitianMatrix {
    let n2 = y.nrows();
    assert!(n2 % 2 == 0 && n2 == y.ncols(), "embedding must be 2n x 2n");
    let n = n2 / 2;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
        let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
        C64::new(re, im)
    });
    HermitianMatrix::symmetrized(m)
}
