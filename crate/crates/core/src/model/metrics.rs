use serde::Serialize;

use super::channel::ChannelSet;
use super::ehcurve::EhCurve;
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::linalg::{CVector, HermitianMatrix};

/// Beamforming directions, powers and power-splitting ratios.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    /// Unit-norm direction per user.
    pub directions: Vec<CVector>,
    /// Power per user, watts.
    pub powers: Vec<f64>,
    /// Fraction of received power sent to information decoding.
    pub rho: Vec<f64>,
}

impl Design {
    /// `sqrt(p_k) f_k`.
    pub fn beam(&self, k: usize) -> CVector {
        self.directions[k].scale(self.powers[k].max(0.0).sqrt())
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// `|h_k^H f_j|^2` for all `j`, with `f_j = sqrt(p_j) fbar_j`.
fn gains<'a>(ch: &'a ChannelSet, d: &'a Design, k: usize) -> impl Iterator<Item = f64> + 'a {
    (0..d.directions.len()).map(move |j| d.powers[j] * ch.h[k].gain(&d.directions[j]))
}

/// SINR of user `k`; zero when `rho_k = 0`.
pub fn sinr(sc: &Scenario, ch: &ChannelSet, d: &Design, k: usize) -> f64 {
    let rho = d.rho[k];
    if rho <= 0.0 {
        return 0.0;
    }
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, g) in gains(ch, d, k).enumerate() {
        if j == k {
            signal = g;
        } else {
            interference += g;
        }
    }
    rho * signal / (rho * interference + rho * sc.sigma_a_sq[k] + sc.sigma_d_sq[k])
}

/// RF power reaching the harvester of user `k`:
/// `(1 - rho_k) (sum_j |h_k^H f_j|^2 + sigma_a^2)`.
pub fn received_rf_power(sc: &Scenario, ch: &ChannelSet, d: &Design, k: usize) -> f64 {
    (1.0 - d.rho[k]) * (gains(ch, d, k).sum::<f64>() + sc.sigma_a_sq[k])
}

/// A complete design with its per-user metrics.
#[derive(Clone, Debug)]
pub struct DesignSolution {
    pub design: Design,
    /// Covariance matrices when the design came from a semidefinite program.
    pub f_matrices: Option<Vec<HermitianMatrix>>,
    /// Minimum received RF power over users, watts.
    pub p_star: f64,
    pub sinr: Vec<f64>,
    pub p_r: Vec<f64>,
    pub p_h: Vec<f64>,
    /// False when `p_star` is below the harvester sensitivity.
    pub harvest_feasible: bool,
    pub algorithm: String,
}

impl DesignSolution {
    /// Evaluates `design`, checking unit-norm directions, the power budget and
    /// `rho` in `[0, 1]`.
    pub fn evaluate(
        sc: &Scenario,
        ch: &ChannelSet,
        curve: &EhCurve,
        design: Design,
        algorithm: &str,
    ) -> Result<Self> {
        let k = sc.k;
        if design.directions.len() != k || design.powers.len() != k || design.rho.len() != k {
            return Err(Error::InvalidInput("design does not have one entry per user".into()));
        }
        if let Some(i) = design.directions.iter().position(|f| (f.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidInput(format!("direction {i} is not unit norm")));
        }
        if design.powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidInput("powers must be nonnegative".into()));
        }
        if design.total_power() > sc.p_t * (1.0 + 1e-9) {
            return Err(Error::InvalidInput(format!(
                "total power {} exceeds the budget {}",
                design.total_power(),
                sc.p_t
            )));
        }
        if design.rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::InvalidInput("power-splitting ratios must lie in [0, 1]".into()));
        }
        let sinr_v: Vec<f64> = (0..k).map(|i| sinr(sc, ch, &design, i)).collect();
        let p_r: Vec<f64> = (0..k).map(|i| received_rf_power(sc, ch, &design, i)).collect();
        let p_h: Vec<f64> = p_r.iter().map(|&p| curve.harvested(p)).collect();
        let p_star = p_r.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            design,
            f_matrices: None,
            p_star,
            sinr: sinr_v,
            p_r,
            p_h,
            harvest_feasible: p_star >= sc.s_e,
            algorithm: algorithm.to_string(),
        })
    }

    /// Minimum harvested power over users.
    pub fn p_h_min(&self) -> f64 {
        self.p_h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest relative SINR shortfall `max_k (gamma_k - sinr_k) / gamma_k`,
    /// zero when every target is met.
    pub fn sinr_violation(&self, sc: &Scenario) -> f64 {
        self.sinr
            .iter()
            .zip(&sc.gamma_bar)
            .map(|(s, g)| ((g - s) / g).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            algorithm: self.algorithm.clone(),
            p_star_w: self.p_star,
            p_h_w: self.p_h_min(),
            rho: self.design.rho.clone(),
            powers: self.design.powers.clone(),
            sinr: self.sinr.clone(),
        }
    }
}

/// Serializable digest of a [`DesignSolution`].
#[derive(Clone, Debug, Serialize)]
pub struct SolutionSummary {
    pub algorithm: String,
    pub p_star_w: f64,
    pub p_h_w: f64,
    pub rho: Vec<f64>,
    pub powers: Vec<f64>,
    pub sinr: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn single(h: Vec<f64>, f: Vec<f64>, p: f64, rho: f64) -> (Scenario, ChannelSet, Design) {
        let mut sc = Scenario::reference(h.len(), 1);
        sc.sigma_a_sq = vec![0.5];
        sc.sigma_d_sq = vec![0.5];
        let ch = ChannelSet::from_vectors(vec![CVector::from_real(&h).unwrap()]).unwrap();
        let d = Design {
            directions: vec![CVector::from_real(&f).unwrap()],
            powers: vec![p],
            rho: vec![rho],
        };
        (sc, ch, d)
    }

    #[test]
    fn aligned_single_user_sinr_is_one() {
        let (sc, ch, d) = single(vec![1.0, 0.0], vec![1.0, 0.0], 1.0, 1.0);
        assert!((sinr(&sc, &ch, &d, 0) - 1.0).abs() < 1e-15);
        assert_eq!(received_rf_power(&sc, &ch, &d, 0), 0.0);
    }

    #[test]
    fn zero_rho_means_no_information() {
        let (sc, ch, d) = single(vec![0.6, 0.8], vec![0.6, 0.8], 10.0, 0.0);
        assert_eq!(sinr(&sc, &ch, &d, 0), 0.0);
        assert!((received_rf_power(&sc, &ch, &d, 0) - (10.0 + 0.5)).abs() < 1e-13);
    }

    #[test]
    fn orthogonal_interferer_is_invisible() {
        let mut sc = Scenario::reference(2, 2);
        sc.sigma_a_sq = vec![0.1; 2];
        sc.sigma_d_sq = vec![0.2; 2];
        let ch = ChannelSet::from_vectors(vec![
            CVector::new(vec![C64::new(1.0, 1.0), C64::new(0.0, 0.0)]).unwrap(),
            CVector::new(vec![C64::new(0.0, 0.0), C64::new(0.0, 2.0)]).unwrap(),
        ])
        .unwrap();
        let d = Design {
            directions: vec![CVector::basis(2, 0), CVector::basis(2, 1)],
            powers: vec![1.0, 3.0],
            rho: vec![0.5, 0.5],
        };
        let expected = 0.5 * 2.0 / (0.5 * 0.1 + 0.2);
        assert!((sinr(&sc, &ch, &d, 0) - expected).abs() < 1e-14);
    }

    #[test]
    fn evaluate_checks_invariants() {
        let (sc, ch, d) = single(vec![1.0, 0.0], vec![1.0, 0.0], 1.0, 0.5);
        let curve = EhCurve::linear(0.5, 0.0).unwrap();
        let s = DesignSolution::evaluate(&sc, &ch, &curve, d.clone(), "x").unwrap();
        assert!((s.p_star - 0.5 * 1.5).abs() < 1e-15);
        assert!((s.p_h[0] - 0.375).abs() < 1e-15);
        let mut bad = d.clone();
        bad.powers[0] = 11.0;
        assert!(DesignSolution::evaluate(&sc, &ch, &curve, bad, "x").is_err());
        let mut bad = d.clone();
        bad.rho[0] = 1.2;
        assert!(DesignSolution::evaluate(&sc, &ch, &curve, bad, "x").is_err());
        let mut bad = d;
        bad.directions[0] = CVector::from_real(&[1.0, 1.0]).unwrap();
        assert!(DesignSolution::evaluate(&sc, &ch, &curve, bad, "x").is_err());
    }
}
