//! Complex Hermitian PSD variables expressed through their real symmetric
//! embedding `Y = [[Re F, -Im F], [Im F, Re F]]`, for which
//! `tr(A F) = <embed(A), Y> / 2`.

use nalgebra::DVector;

use crate::cone::{ConicSolution, LinExpr, ProblemBuilder, PsdVar, Settings, Status};
use crate::error::{Error, Result};
use crate::linalg::{complex_to_real_embed, real_to_complex, CVector, HermitianMatrix};

/// A complex `N x N` PSD matrix variable.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HermVar {
    inner: PsdVar,
}

impl HermVar {
    pub fn new(b: &mut ProblemBuilder, n: usize) -> Self {
        Self { inner: b.add_psd(2 * n) }
    }

    /// `g^H F g`.
    pub fn quad(&self, g: &CVector) -> LinExpr {
        self.inner.inner(&complex_to_real_embed(&g.outer())) * 0.5
    }

    /// `tr F`.
    pub fn trace(&self) -> LinExpr {
        self.inner.trace() * 0.5
    }

    pub fn value(&self, x: &DVector<f64>) -> HermitianMatrix {
        real_to_complex(&self.inner.value(x))
    }
}

pub(crate) fn settings() -> Settings {
    Settings::default()
}

/// Maps a non-optimal solver outcome to an error, keeping infeasibility
/// distinguishable.
pub(crate) fn require_optimal(sol: &ConicSolution, what: &str) -> Result<()> {
    match sol.status {
        Status::Optimal | Status::AlmostOptimal => Ok(()),
        Status::Infeasible => Err(Error::Infeasible),
        status => Err(Error::Solver(format!(
            "{what}: {status:?} after {} iterations{}",
            sol.iterations,
            sol.diagnostics.as_deref().map(|d| format!(" ({d})")).unwrap_or_default()
        ))),
    }
}
