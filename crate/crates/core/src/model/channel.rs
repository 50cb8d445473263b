use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::scenario::{Placement, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};

const MAX_REDRAWS: usize = 100;

/// Channel vectors of one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// `h[k]`, length `N`.
    pub h: Vec<CVector>,
    /// Transmitter-receiver distance per user, meters.
    pub d: Vec<f64>,
    /// Per-entry variance `theta d^-alpha` per user.
    pub sigma_h_sq: Vec<f64>,
}

impl ChannelSet {
    /// Wraps given channel vectors. Distances are set to 1 and the variances
    /// to the empirical per-entry power `|h_k|^2 / N`.
    pub fn from_vectors(h: Vec<CVector>) -> Result<Self> {
        let n = h.first().map(CVector::len).ok_or_else(|| Error::InvalidInput("no channels".into()))?;
        if h.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidInput("channel vectors differ in length".into()));
        }
        let sigma_h_sq = h.iter().map(|v| v.norm_sqr() / n as f64).collect();
        Ok(Self { d: vec![1.0; h.len()], sigma_h_sq, h })
    }

    pub fn n(&self) -> usize {
        self.h[0].len()
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    /// Checks that the channels fit the scenario.
    pub fn check(&self, sc: &Scenario) -> Result<()> {
        if self.k() != sc.k || self.n() != sc.n {
            return Err(Error::InvalidInput(format!(
                "channels are {}x{} but the scenario has N = {}, K = {}",
                self.k(),
                self.n(),
                sc.n,
                sc.k
            )));
        }
        if self.h.iter().any(|h| h.norm_sqr() <= 0.0) {
            return Err(Error::InvalidInput("zero channel vector".into()));
        }
        Ok(())
    }
}

/// Draws the channels of realization `index`.
///
/// A ChaCha8 generator seeded with `scenario.seed` and using `index` as its
/// stream makes every realization reproducible and independent of the order
/// in which realizations are generated.
pub fn generate_channels(sc: &Scenario, index: u64) -> Result<ChannelSet> {
    sc.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(index);
    let center = [sc.l / 2.0, sc.l / 2.0];
    let mut h = Vec::with_capacity(sc.k);
    let mut d = Vec::with_capacity(sc.k);
    let mut var = Vec::with_capacity(sc.k);
    for user in 0..sc.k {
        let mut dist = 0.0;
        for _ in 0..MAX_REDRAWS {
            let pos = match &sc.placement {
                Placement::UniformRandom => [rng.random_range(0.0..sc.l), rng.random_range(0.0..sc.l)],
                Placement::Fixed(p) => p[user],
            };
            dist = (pos[0] - center[0]).hypot(pos[1] - center[1]);
            if dist > 0.0 {
                break;
            }
        }
        if dist <= 0.0 {
            return Err(Error::DegenerateGeometry { user, attempts: MAX_REDRAWS });
        }
        let s2 = sc.theta * dist.powf(-sc.alpha);
        let amp = (s2 / 2.0).sqrt();
        let entries: Vec<C64> = (0..sc.n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(amp * re, amp * im)
            })
            .collect();
        h.push(CVector::new(entries)?);
        d.push(dist);
        var.push(s2);
    }
    Ok(ChannelSet { h, d, sigma_h_sq: var })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_user_distance_and_variance() {
        let mut sc = Scenario::reference(2, 1);
        sc.placement = Placement::Fixed(vec![[0.0, 0.0]]);
        let ch = generate_channels(&sc, 0).unwrap();
        let d = 5.0 * 2f64.sqrt() / 2.0;
        assert!((ch.d[0] - d).abs() < 1e-12);
        assert!((ch.sigma_h_sq[0] - 0.1 * d.powf(-2.5)).abs() < 1e-15);
    }

    #[test]
    fn unit_distance_variance() {
        let mut sc = Scenario::reference(1, 1);
        sc.placement = Placement::Fixed(vec![[3.5, 2.5]]);
        let ch = generate_channels(&sc, 0).unwrap();
        assert!((ch.sigma_h_sq[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn user_on_transmitter_fails() {
        let mut sc = Scenario::reference(2, 1);
        sc.placement = Placement::Fixed(vec![[2.5, 2.5]]);
        assert!(matches!(
            generate_channels(&sc, 0),
            Err(Error::DegenerateGeometry { user: 0, attempts: 100 })
        ));
    }

    #[test]
    fn realizations_are_reproducible_and_distinct() {
        let sc = Scenario::reference(4, 3);
        let a = generate_channels(&sc, 5).unwrap();
        let b = generate_channels(&sc, 5).unwrap();
        let c = generate_channels(&sc, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for k in 0..3 {
            assert!(a.d[k] > 0.0 && a.d[k] <= 5.0 * 2f64.sqrt() / 2.0);
        }
    }
}
