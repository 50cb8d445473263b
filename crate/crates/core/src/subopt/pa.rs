use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::{ChannelSet, Scenario};

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const MULTISTARTS: u64 = 8;
/// Largest Newton step in any log coordinate.
const MAX_STEP: f64 = 4.0;

/// `[M]_ii = |h_i^H f_i|^2 / gamma_i`, `[M]_ij = -|h_i^H f_j|^2`.
///
/// With directions fixed, the SINR equalities read `M p = sigma_a^2 +
/// sigma_d^2 / rho`.
#[derive(Clone, Debug)]
pub struct MMatrix {
    pub entries: DMatrix<f64>,
    /// `g[(i, j)] = |h_i^H f_j|^2`.
    gains: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl MMatrix {
    /// Builds `M` and checks that `M^-1` is entrywise nonnegative, which is
    /// exactly when some positive power vector meets every SINR target.
    pub fn new(ch: &ChannelSet, sc: &Scenario, directions: &[CVector]) -> Result<Self> {
        ch.check(sc)?;
        let k = sc.k;
        if directions.len() != k {
            return Err(Error::InvalidInput("one direction per user is required".into()));
        }
        let gains = DMatrix::from_fn(k, k, |i, j| ch.h[i].gain(&directions[j]));
        let entries = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                gains[(i, i)] / sc.gamma_bar[i]
            } else {
                -gains[(i, j)]
            }
        });
        if (0..k).any(|i| !(entries[(i, i)] > 0.0)) {
            return Err(Error::DirectionInfeasible("a direction is orthogonal to its own channel".into()));
        }
        let inverse = entries
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::DirectionInfeasible("M is singular".into()))?;
        let scale = inverse.amax();
        if inverse.iter().any(|v| !v.is_finite() || *v < -1e-12 * scale) {
            return Err(Error::DirectionInfeasible("M^-1 has negative entries".into()));
        }
        Ok(Self { entries, gains, inverse: inverse.map(|v| v.max(0.0)) })
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// Powers meeting every SINR target with equality at ratios `rho`.
    pub fn powers(&self, sc: &Scenario, rho: &[f64]) -> DVector<f64> {
        let b = DVector::from_fn(rho.len(), |i, _| sc.sigma_a_sq[i] + sc.sigma_d_sq[i] / rho[i]);
        &self.inverse * b
    }

    /// `sum_j p_j |h_k^H f_j|^2 + sigma_a_k^2` for every `k`.
    fn received(&self, sc: &Scenario, p: &DVector<f64>) -> DVector<f64> {
        let mut q = &self.gains * p;
        for (k, v) in q.iter_mut().enumerate() {
            *v += sc.sigma_a_sq[k];
        }
        q
    }
}

/// Powers and power-splitting ratios for fixed directions.
#[derive(Clone, Debug)]
pub struct PsSolution {
    pub powers: Vec<f64>,
    pub rho: Vec<f64>,
    /// `min_k` received RF power, watts.
    pub p_star: f64,
    /// Common received power predicted by the closed form or the root.
    pub p_star_predicted: f64,
    /// Newton iterations, zero for the closed form.
    pub iterations: usize,
}

fn min_received(m: &MMatrix, sc: &Scenario, p: &DVector<f64>, rho: &[f64]) -> f64 {
    m.received(sc, p)
        .iter()
        .zip(rho)
        .map(|(q, r)| (1.0 - r) * q)
        .fold(f64::INFINITY, f64::min)
}

/// Closed-form powers with one power-splitting ratio shared by all users.
///
/// `p_star_predicted` is user 1's received power from the closed form; it
/// equals `p_star` only when user 1 is the weakest harvester.
pub fn solve_ups(ch: &ChannelSet, sc: &Scenario, directions: &[CVector]) -> Result<PsSolution> {
    let m = MMatrix::new(ch, sc, directions)?;
    ups_with(&m, sc)
}

fn ups_with(m: &MMatrix, sc: &Scenario) -> Result<PsSolution> {
    let k = sc.k;
    let col = m.inverse.row_sum();
    let a: f64 = (0..k).map(|j| col[j] * sc.sigma_d_sq[j]).sum();
    let b: f64 = (0..k).map(|j| col[j] * sc.sigma_a_sq[j]).sum();
    let rho_bar = a / (sc.p_t - b);
    if !(rho_bar > 0.0 && rho_bar < 1.0) {
        return Err(Error::DirectionInfeasible(format!("uniform splitting ratio {rho_bar:e} outside (0, 1)")));
    }
    let rho = vec![rho_bar; k];
    let p = m.powers(sc, &rho);
    let g11 = m.gains[(0, 0)];
    let predicted = (1.0 - rho_bar) * (p[0] * g11 * (1.0 / sc.gamma_bar[0] + 1.0) - sc.sigma_d_sq[0] / rho_bar);
    Ok(PsSolution {
        p_star: min_received(m, sc, &p, &rho),
        powers: p.iter().map(|v| v.max(0.0)).collect(),
        rho,
        p_star_predicted: predicted,
        iterations: 0,
    })
}

fn sigmoid(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(r: f64) -> f64 {
    (r / (1.0 - r)).ln()
}

/// Log residuals of the `K + 1` equations at `z = (logit rho, ln P)`:
/// `ln((1 - rho_k) q_k) - ln P` and `ln(sum p) - ln P_T`.
fn residual(m: &MMatrix, sc: &Scenario, z: &DVector<f64>) -> Option<DVector<f64>> {
    let k = sc.k;
    let rho: Vec<f64> = (0..k).map(|i| sigmoid(z[i])).collect();
    if rho.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return None;
    }
    let p = m.powers(sc, &rho);
    let q = m.received(sc, &p);
    let mut r = DVector::zeros(k + 1);
    for i in 0..k {
        r[i] = (1.0 - rho[i]).ln() + q[i].ln() - z[k];
    }
    r[k] = p.sum().ln() - sc.p_t.ln();
    r.iter().all(|v| v.is_finite()).then_some(r)
}

fn jacobian(m: &MMatrix, sc: &Scenario, z: &DVector<f64>) -> DMatrix<f64> {
    let k = sc.k;
    let rho: Vec<f64> = (0..k).map(|i| sigmoid(z[i])).collect();
    let p = m.powers(sc, &rho);
    let q = m.received(sc, &p);
    let total = p.sum();
    // d b_i / d u_i
    let db: Vec<f64> = (0..k).map(|i| -sc.sigma_d_sq[i] * (1.0 - rho[i]) / rho[i]).collect();
    let gm = &m.gains * &m.inverse;
    let col = m.inverse.row_sum();
    let mut jac = DMatrix::zeros(k + 1, k + 1);
    for row in 0..k {
        for i in 0..k {
            jac[(row, i)] = gm[(row, i)] * db[i] / q[row];
        }
        jac[(row, row)] -= rho[row];
        jac[(row, k)] = -1.0;
    }
    for i in 0..k {
        jac[(k, i)] = col[i] * db[i] / total;
    }
    jac
}

/// Damped Newton from `z0`; returns the root and the iteration count.
fn newton(m: &MMatrix, sc: &Scenario, z0: DVector<f64>) -> Option<(DVector<f64>, usize)> {
    let mut z = z0;
    let mut r = residual(m, sc, &z)?;
    for it in 0..NEWTON_MAX_ITER {
        let norm = r.amax();
        if norm < NEWTON_TOL {
            return Some((z, it));
        }
        let mut step = jacobian(m, sc, &z).lu().solve(&(-&r))?;
        let big = step.amax();
        if !big.is_finite() {
            return None;
        }
        if big > MAX_STEP {
            step *= MAX_STEP / big;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &z + &step * t;
            if let Some(rt) = residual(m, sc, &trial) {
                if rt.norm() <= (1.0 - 1e-4 * t) * r.norm() {
                    z = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    (r.amax() < NEWTON_TOL).then_some((z, NEWTON_MAX_ITER))
}

/// Jointly solves the powers and per-user power-splitting ratios that make
/// every SINR target and every harvesting constraint tight at a common
/// received power, with the whole budget spent.
///
/// Newton runs in `(logit rho, ln P)` from the uniform-splitting solution,
/// then from up to eight perturbed starts.
pub fn solve_dps(ch: &ChannelSet, sc: &Scenario, directions: &[CVector]) -> Result<PsSolution> {
    dps(ch, sc, directions, None)
}

/// [`solve_dps`] trying the ratios `rho0` before the usual starts.
pub fn solve_dps_from(ch: &ChannelSet, sc: &Scenario, directions: &[CVector], rho0: &[f64]) -> Result<PsSolution> {
    if rho0.len() != sc.k {
        return Err(Error::InvalidInput("one starting ratio per user is required".into()));
    }
    dps(ch, sc, directions, Some(rho0))
}

fn dps(ch: &ChannelSet, sc: &Scenario, directions: &[CVector], rho0: Option<&[f64]>) -> Result<PsSolution> {
    let m = MMatrix::new(ch, sc, directions)?;
    let ups = ups_with(&m, sc)?;
    let k = sc.k;
    let start = |rho: &[f64]| -> DVector<f64> {
        let p = m.powers(sc, rho);
        let common = min_received(&m, sc, &p, rho).max(f64::MIN_POSITIVE);
        DVector::from_fn(k + 1, |i, _| if i < k { logit(rho[i]) } else { common.ln() })
    };
    let mut found = rho0.and_then(|r| {
        let r: Vec<f64> = r.iter().map(|v| v.clamp(1e-300, 1.0 - 1e-12)).collect();
        newton(&m, sc, start(&r))
    });
    if found.is_none() {
        found = newton(&m, sc, start(&ups.rho));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut attempt = 0;
    while found.is_none() && attempt < MULTISTARTS {
        let rho: Vec<f64> = ups
            .rho
            .iter()
            .map(|r| (r * (1.0 + rng.random_range(-0.5..=0.5))).clamp(1e-300, 1.0 - 1e-12))
            .collect();
        found = newton(&m, sc, start(&rho));
        attempt += 1;
    }
    let Some((z, iterations)) = found else {
        return Err(Error::NoRoot(format!(
            "Newton failed from the uniform start and {MULTISTARTS} perturbed starts (uniform ratio {:e})",
            ups.rho[0]
        )));
    };
    let rho: Vec<f64> = (0..k).map(|i| sigmoid(z[i])).collect();
    let p = m.powers(sc, &rho);
    Ok(PsSolution {
        p_star: min_received(&m, sc, &p, &rho),
        powers: p.iter().map(|v| v.max(0.0)).collect(),
        rho,
        p_star_predicted: z[k].exp(),
        iterations,
    })
}
