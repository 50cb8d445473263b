use std::path::Path;

use serde::Deserialize;

use super::units::{db_to_linear, dbm_to_w, Quantity};
use crate::error::{Error, Result};

/// How receiver positions are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Placement {
    /// Independent uniform positions on the `L x L` field for every channel
    /// realization, transmitter at the center.
    UniformRandom,
    /// Fixed coordinates in the field frame (origin at a corner), one per user.
    Fixed(Vec<[f64; 2]>),
}

/// System parameters shared by every channel realization.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    /// Transmit antennas.
    pub n: usize,
    /// Users.
    pub k: usize,
    /// Transmit power budget in watts.
    pub p_t: f64,
    /// Antenna noise variance per user, watts.
    pub sigma_a_sq: Vec<f64>,
    /// Information-decoding noise variance per user, watts.
    pub sigma_d_sq: Vec<f64>,
    /// SINR target per user, linear.
    pub gamma_bar: Vec<f64>,
    /// Side of the square field in meters.
    pub l: f64,
    /// Channel attenuation at unit distance.
    pub theta: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Energy-harvesting sensitivity in watts.
    pub s_e: f64,
    pub seed: u64,
    pub placement: Placement,
}

impl Scenario {
    /// The reference setting used throughout the crate: `P_T = 10 W`,
    /// noise `-70 dBm` / `-50 dBm`, SINR target 10 dB, a 5 m field,
    /// `theta = 0.1`, `alpha = 2.5`, sensitivity `-30 dBm`.
    pub fn reference(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            p_t: 10.0,
            sigma_a_sq: vec![dbm_to_w(-70.0); k],
            sigma_d_sq: vec![dbm_to_w(-50.0); k],
            gamma_bar: vec![db_to_linear(10.0); k],
            l: 5.0,
            theta: 0.1,
            alpha: 2.5,
            s_e: dbm_to_w(-30.0),
            seed: 1,
            placement: Placement::UniformRandom,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n == 0 || self.k == 0 {
            return bad("N and K must be at least 1".into());
        }
        for (name, v) in [("sigma_a_sq", &self.sigma_a_sq), ("sigma_d_sq", &self.sigma_d_sq), ("gamma_bar", &self.gamma_bar)] {
            if v.len() != self.k {
                return bad(format!("{name} has {} entries, expected K = {}", v.len(), self.k));
            }
            if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return bad(format!("{name} entries must be positive and finite"));
            }
        }
        if !(self.p_t.is_finite() && self.p_t > 0.0) {
            return bad(format!("P_T must be positive, got {}", self.p_t));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if !(self.alpha >= 2.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be at least 2, got {}", self.alpha));
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return bad(format!("L must be positive, got {}", self.l));
        }
        if !(self.s_e.is_finite() && self.s_e >= 0.0) {
            return bad(format!("S_E must be nonnegative, got {}", self.s_e));
        }
        if let Placement::Fixed(pos) = &self.placement {
            if pos.len() != self.k {
                return bad(format!("fixed placement lists {} positions for K = {}", pos.len(), self.k));
            }
            if pos.iter().flatten().any(|c| !c.is_finite()) {
                return bad("fixed positions must be finite".into());
            }
        }
        Ok(())
    }

    /// Same scenario with a common SINR target given in dB.
    pub fn with_gamma_db(&self, db: f64) -> Self {
        Self {
            gamma_bar: vec![db_to_linear(db); self.k],
            ..self.clone()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
pub(crate) enum OneOrMany {
    One(Quantity),
    Many(Vec<Quantity>),
}

impl OneOrMany {
    pub(crate) fn expand(&self, k: usize, conv: impl Fn(&Quantity) -> Result<f64>) -> Result<Vec<f64>> {
        match self {
            OneOrMany::One(q) => Ok(vec![conv(q)?; k]),
            OneOrMany::Many(qs) => qs.iter().map(conv).collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPlacement {
    Named(String),
    Fixed(Vec<[f64; 2]>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "P_T")]
    p_t: Quantity,
    sigma_a_sq: OneOrMany,
    sigma_d_sq: OneOrMany,
    gamma_bar: OneOrMany,
    #[serde(rename = "L")]
    l: f64,
    theta: f64,
    alpha: f64,
    #[serde(rename = "S_E")]
    s_e: Quantity,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    placement: Option<RawPlacement>,
}

fn default_seed() -> u64 {
    1
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Scenario> {
        raw.into_scenario()
    }
}

impl RawScenario {
    fn into_scenario(self) -> Result<Scenario> {
        let placement = match self.placement {
            None => Placement::UniformRandom,
            Some(RawPlacement::Named(s)) if s == "uniform" => Placement::UniformRandom,
            Some(RawPlacement::Named(s)) => return Err(Error::Config(format!("unknown placement {s:?}"))),
            Some(RawPlacement::Fixed(p)) => Placement::Fixed(p),
        };
        let sc = Scenario {
            n: self.n,
            k: self.k,
            p_t: self.p_t.watts()?,
            sigma_a_sq: self.sigma_a_sq.expand(self.k, Quantity::watts)?,
            sigma_d_sq: self.sigma_d_sq.expand(self.k, Quantity::watts)?,
            gamma_bar: self.gamma_bar.expand(self.k, Quantity::ratio)?,
            l: self.l,
            theta: self.theta,
            alpha: self.alpha,
            s_e: self.s_e.watts()?,
            seed: self.seed,
            placement,
        };
        sc.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(sc)
    }
}
