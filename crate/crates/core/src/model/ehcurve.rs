use std::io::Read;

use serde::Deserialize;

use super::units::{dbm_to_w, w_to_dbm};
use crate::error::{Error, Result};

/// Points of the bundled demo curve, `(P_R in dBm, efficiency)`.
///
/// These are illustrative values with the usual rectifier shape (efficiency
/// rising with input power, peaking, then dropping at saturation); they are
/// not measurements of any particular device.
pub const DEMO_CURVE: [(f64, f64); 8] = [
    (-30.0, 0.05),
    (-20.0, 0.18),
    (-10.0, 0.38),
    (0.0, 0.55),
    (5.0, 0.60),
    (10.0, 0.50),
    (15.0, 0.30),
    (20.0, 0.16),
];

const MONOTONE_GRID: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum EhKind {
    /// Constant RF-to-DC efficiency.
    Linear { eta: f64 },
    /// Efficiency sampled at increasing input powers (dBm), interpolated
    /// linearly in `log10(P_R)` and held constant outside the samples.
    Piecewise { p_r_dbm: Vec<f64>, eta: Vec<f64> },
}

/// RF-to-DC conversion model `P_H = eta(P_R) P_R`, zero below the
/// sensitivity `s_e`.
#[derive(Clone, Debug, PartialEq)]
pub struct EhCurve {
    pub kind: EhKind,
    /// Sensitivity in watts.
    pub s_e: f64,
}

impl EhCurve {
    pub fn linear(eta: f64, s_e: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidInput(format!("efficiency must lie in (0, 1], got {eta}")));
        }
        check_sensitivity(s_e)?;
        Ok(Self { kind: EhKind::Linear { eta }, s_e })
    }

    /// Builds a piecewise curve and checks that the implied harvested power
    /// is non-decreasing on a fine grid.
    pub fn piecewise(points: &[(f64, f64)], s_e: f64) -> Result<Self> {
        check_sensitivity(s_e)?;
        if points.is_empty() {
            return Err(Error::InvalidInput("curve needs at least one point".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidInput("curve input powers must be strictly increasing".into()));
        }
        if points.iter().any(|&(p, e)| !p.is_finite() || !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidInput("curve efficiencies must lie in [0, 1]".into()));
        }
        let curve = Self {
            kind: EhKind::Piecewise {
                p_r_dbm: points.iter().map(|p| p.0).collect(),
                eta: points.iter().map(|p| p.1).collect(),
            },
            s_e,
        };
        curve.check_monotone()?;
        Ok(curve)
    }

    /// The bundled demo curve with the given sensitivity.
    pub fn demo(s_e: f64) -> Self {
        Self::piecewise(&DEMO_CURVE, s_e).expect("demo curve is monotone")
    }

    /// Reads a two-column CSV with header `P_R_dBm,eta`. Lines starting with
    /// `#` are ignored.
    pub fn from_csv<R: Read>(reader: R, s_e: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[serde(rename = "P_R_dBm")]
            p: f64,
            eta: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let r: Row = row?;
            points.push((r.p, r.eta));
        }
        Self::piecewise(&points, s_e)
    }

    pub fn load(path: impl AsRef<std::path::Path>, s_e: f64) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv(f, s_e)
    }

    /// Efficiency at input power `p_r` (watts), ignoring the sensitivity.
    pub fn eta(&self, p_r: f64) -> f64 {
        match &self.kind {
            EhKind::Linear { eta } => *eta,
            EhKind::Piecewise { p_r_dbm, eta } => {
                if p_r <= 0.0 {
                    return eta[0];
                }
                let x = w_to_dbm(p_r);
                let last = p_r_dbm.len() - 1;
                if x <= p_r_dbm[0] {
                    return eta[0];
                }
                if x >= p_r_dbm[last] {
                    return eta[last];
                }
                let i = p_r_dbm.partition_point(|&v| v <= x) - 1;
                let t = (x - p_r_dbm[i]) / (p_r_dbm[i + 1] - p_r_dbm[i]);
                eta[i] + t * (eta[i + 1] - eta[i])
            }
        }
    }

    /// Harvested DC power in watts.
    pub fn harvested(&self, p_r: f64) -> f64 {
        if p_r < self.s_e || p_r <= 0.0 {
            return 0.0;
        }
        self.eta(p_r) * p_r
    }

    fn check_monotone(&self) -> Result<()> {
        let EhKind::Piecewise { p_r_dbm, .. } = &self.kind else {
            return Ok(());
        };
        let lo = w_to_dbm(self.s_e.max(dbm_to_w(p_r_dbm[0] - 10.0)));
        let hi = p_r_dbm[p_r_dbm.len() - 1] + 10.0;
        let mut prev = 0.0;
        for i in 0..MONOTONE_GRID {
            let x = lo + (hi - lo) * i as f64 / (MONOTONE_GRID - 1) as f64;
            let ph = self.harvested(dbm_to_w(x));
            if ph + 1e-15 < prev {
                return Err(Error::InvalidInput(format!(
                    "harvested power decreases near {x:.3} dBm; the curve must keep eta * P_R non-decreasing"
                )));
            }
            prev = ph;
        }
        Ok(())
    }
}

fn check_sensitivity(s_e: f64) -> Result<()> {
    if !(s_e.is_finite() && s_e >= 0.0) {
        return Err(Error::InvalidInput(format!("sensitivity must be nonnegative, got {s_e}")));
    }
    Ok(())
}

/// `eta(P_R) P_R` for the given curve, zero below its sensitivity.
pub fn harvested_power(curve: &EhCurve, p_r: f64) -> f64 {
    curve.harvested(p_r)
}
