use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::units::{db_to_linear, linear_to_db};
use crate::model::{EhCurve, Scenario};

/// Designs the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Goa,
    DwaUps,
    UwaUps,
    DwaDps,
    UwaDps,
    SinrUps,
    MrtZfUwaUps,
    MrtZfDwaUps,
    EfmOnly,
    MrtOnly,
    SvdOnly,
    /// Analytic lower bound on the optimum, reported as a pseudo-design.
    LowerBound,
    /// Analytic upper bound on the optimum, reported as a pseudo-design.
    UpperBound,
}

impl Algorithm {
    pub const ALL: [Algorithm; 13] = [
        Algorithm::Goa,
        Algorithm::DwaUps,
        Algorithm::UwaUps,
        Algorithm::DwaDps,
        Algorithm::UwaDps,
        Algorithm::SinrUps,
        Algorithm::MrtZfUwaUps,
        Algorithm::MrtZfDwaUps,
        Algorithm::EfmOnly,
        Algorithm::MrtOnly,
        Algorithm::SvdOnly,
        Algorithm::LowerBound,
        Algorithm::UpperBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Goa => "GOA",
            Algorithm::DwaUps => "DWA-UPS",
            Algorithm::UwaUps => "UWA-UPS",
            Algorithm::DwaDps => "DWA-DPS",
            Algorithm::UwaDps => "UWA-DPS",
            Algorithm::SinrUps => "SINR-UPS",
            Algorithm::MrtZfUwaUps => "MRT-ZF-UWA-UPS",
            Algorithm::MrtZfDwaUps => "MRT-ZF-DWA-UPS",
            Algorithm::EfmOnly => "EFM-only",
            Algorithm::MrtOnly => "MRT-only",
            Algorithm::SvdOnly => "SVD-only",
            Algorithm::LowerBound => "P_lb",
            Algorithm::UpperBound => "P_ub",
        }
    }

    /// Whether the design has to meet the SINR targets.
    pub fn needs_sinr(self) -> bool {
        !matches!(self, Algorithm::EfmOnly | Algorithm::MrtOnly | Algorithm::SvdOnly)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// SINR targets of one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub enum SinrProfile {
    /// Same target for every user, dB.
    Common(f64),
    /// One linear target per user.
    Distinct(Vec<f64>),
}

impl SinrProfile {
    /// Targets for `k` users.
    pub fn targets(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            SinrProfile::Common(db) => Ok(vec![db_to_linear(*db); k]),
            SinrProfile::Distinct(v) if v.len() == k => Ok(v.clone()),
            SinrProfile::Distinct(v) => Err(Error::Config(format!("{} per-user SINR targets for K = {k}", v.len()))),
        }
    }

    /// The common target, or the mean of the distinct ones, in dB.
    pub fn gamma_db(&self) -> f64 {
        match self {
            SinrProfile::Common(db) => *db,
            SinrProfile::Distinct(v) => linear_to_db(v.iter().sum::<f64>() / v.len() as f64),
        }
    }
}

/// Grid of sweep coordinates; every combination is one sweep point.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub gamma_db: Vec<f64>,
    /// Lists of per-user linear SINR targets, run in addition to `gamma_db`.
    #[serde(default)]
    pub distinct_gamma: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
}

/// One point of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    /// Preset label, with `-distinct` appended for per-user targets.
    pub label: String,
    pub profile: SinrProfile,
    pub n: usize,
    pub k: usize,
    pub l: f64,
}

impl SweepPoint {
    pub fn scenario(&self, template: &Scenario) -> Result<Scenario> {
        let mut sc = template.clone();
        sc.n = self.n;
        sc.k = self.k;
        sc.l = self.l;
        let resize = |v: &[f64]| -> Result<Vec<f64>> {
            match v {
                [] => Err(Error::Config("empty noise list".into())),
                [x] => Ok(vec![*x; self.k]),
                _ if v.iter().all(|x| *x == v[0]) => Ok(vec![v[0]; self.k]),
                _ if v.len() == self.k => Ok(v.to_vec()),
                _ => Err(Error::Config(format!("per-user values for K = {} do not fit K = {}", v.len(), self.k))),
            }
        };
        sc.sigma_a_sq = resize(&template.sigma_a_sq)?;
        sc.sigma_d_sq = resize(&template.sigma_d_sq)?;
        sc.gamma_bar = self.profile.targets(self.k)?;
        if let crate::model::Placement::Fixed(p) = &sc.placement {
            if p.len() != self.k {
                return Err(Error::Config("fixed placement does not match the swept K".into()));
            }
        }
        sc.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(sc)
    }
}

fn default_curve() -> String {
    "demo".into()
}

/// Loads a harvester curve by name: `"demo"` for the bundled curve,
/// `"linear:<eta>"` for a constant efficiency, anything else is a CSV path
/// (relative paths resolve against `base`).
pub fn load_curve(name: &str, s_e: f64, base: Option<&Path>) -> Result<EhCurve> {
    if name == "demo" {
        return Ok(EhCurve::demo(s_e));
    }
    if let Some(eta) = name.strip_prefix("linear:") {
        let eta: f64 = eta.trim().parse().map_err(|_| Error::Config(format!("bad efficiency in {name:?}")))?;
        return EhCurve::linear(eta, s_e).map_err(|e| Error::Config(e.to_string()));
    }
    let mut path = PathBuf::from(name);
    if path.is_relative() {
        if let Some(b) = base {
            path = b.join(path);
        }
    }
    EhCurve::load(&path, s_e).map_err(|e| Error::Config(e.to_string()))
}

fn default_x() -> usize {
    20
}

fn default_xi() -> f64 {
    1e-4
}

/// A Monte Carlo experiment: a scenario template, sweep axes, designs and
/// a realization count.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Written to the `preset` column.
    pub name: String,
    pub scenario: Scenario,
    pub sweep: Sweep,
    pub algorithms: Vec<Algorithm>,
    pub realizations: usize,
    /// See [`load_curve`].
    #[serde(default = "default_curve")]
    pub eh_curve: String,
    /// Weight grid size of the searches.
    #[serde(default = "default_x")]
    pub x: usize,
    /// Golden-section tolerance, watts.
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Output CSV file name inside the output directory.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.realizations == 0 {
            return bad("realizations must be at least 1");
        }
        let s = &self.sweep;
        if (s.gamma_db.is_empty() && s.distinct_gamma.is_empty()) || s.n.is_empty() || s.k.is_empty() || s.l.is_empty() {
            return bad("sweep axes must be non-empty");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected");
        }
        if self.x < 2 {
            return bad("x must be at least 2");
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return bad("xi must be positive");
        }
        if self.name.is_empty() || self.name.contains([',', '"', '\n']) {
            return bad("name must be non-empty and free of commas and quotes");
        }
        for p in self.points() {
            p.scenario(&self.scenario)?;
        }
        Ok(())
    }

    /// Sweep points ordered by `L`, `N`, `K`, then SINR profile.
    pub fn points(&self) -> Vec<SweepPoint> {
        let s = &self.sweep;
        let mut out = Vec::new();
        for &l in &s.l {
            for &n in &s.n {
                for &k in &s.k {
                    for &g in &s.gamma_db {
                        out.push(SweepPoint { label: self.name.clone(), profile: SinrProfile::Common(g), n, k, l });
                    }
                    for v in &s.distinct_gamma {
                        out.push(SweepPoint {
                            label: format!("{}-distinct", self.name),
                            profile: SinrProfile::Distinct(v.clone()),
                            n,
                            k,
                            l,
                        });
                    }
                }
            }
        }
        out
    }

    /// A single user count shared by every sweep point.
    pub fn fixed_k(&self) -> Option<usize> {
        match self.sweep.k.as_slice() {
            [k] => Some(*k),
            _ => None,
        }
    }
}

fn sweep(gamma_db: Vec<f64>, n: Vec<usize>, k: Vec<usize>, l: Vec<f64>) -> Sweep {
    Sweep { gamma_db, distinct_gamma: Vec::new(), n, k, l }
}

fn preset(name: &str, sweep: Sweep, algorithms: Vec<Algorithm>) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        scenario: Scenario::reference(4, 4),
        sweep,
        algorithms,
        realizations: 1000,
        eh_curve: default_curve(),
        x: 20,
        xi: 1e-4,
        output: Some(format!("{name}.csv")),
    }
}

/// Names of the figure presets.
pub const PRESET_NAMES: [&str; 11] = ["F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10", "F11", "F12"];

/// The figure presets, each with 1000 realizations.
pub fn figure_scenarios() -> Vec<ExperimentSpec> {
    use Algorithm::*;
    let gammas: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    let mut f3 = preset("F3", sweep(vec![10.0, 30.0], (4..=12).collect(), vec![4], vec![5.0, 6.0]), vec![Goa]);
    f3.sweep.distinct_gamma = vec![vec![8.0, 9.0, 11.0, 12.0], vec![500.0, 750.0, 1250.0, 1500.0]];
    vec![
        preset("F2", sweep(gammas.clone(), vec![4, 8], vec![4], vec![5.0, 6.0]), vec![Goa, DwaUps, UwaUps]),
        f3,
        preset("F4", sweep(vec![10.0, 30.0], vec![8], (1..=8).collect(), vec![5.0, 6.0]), vec![Goa]),
        preset("F5", sweep(vec![10.0], vec![8], (1..=8).collect(), vec![5.0, 6.0]), vec![Goa]),
        preset("F6", sweep(gammas.clone(), vec![4], vec![4], vec![5.0]), vec![DwaUps, UwaUps]),
        preset(
            "F7",
            sweep(vec![10.0, 30.0], vec![4, 8], vec![4], vec![5.0, 6.0]),
            vec![Goa, LowerBound, UpperBound],
        ),
        preset("F8", sweep(gammas.clone(), vec![4], vec![4], vec![5.0]), vec![Goa, DwaUps, DwaDps]),
        preset("F9", sweep(gammas.clone(), vec![4], vec![4], vec![5.0]), vec![Goa, DwaUps, DwaDps, UwaDps]),
        preset(
            "F10",
            sweep(gammas.clone(), vec![4], vec![4], vec![5.0]),
            vec![UwaUps, DwaUps, SinrUps, MrtZfUwaUps, MrtZfDwaUps],
        ),
        preset(
            "F11",
            sweep(vec![0.0, 10.0, 20.0, 30.0], vec![4], vec![4], vec![5.0]),
            vec![Goa, DwaUps, UwaUps, SinrUps, MrtZfUwaUps, MrtZfDwaUps],
        ),
        preset("F12", sweep(vec![10.0], vec![8], vec![4, 6, 8], vec![5.0, 6.0]), vec![EfmOnly, MrtOnly, SvdOnly]),
    ]
}

pub fn preset_by_name(name: &str) -> Result<ExperimentSpec> {
    figure_scenarios()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}; expected one of {}", PRESET_NAMES.join(", "))))
}
