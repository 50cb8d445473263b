//! Power and ratio conversions, and parsing of `"-70 dBm"`-style quantities.

use serde::Deserialize;

use crate::error::{Error, Result};

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1000.0).log10()
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// A number in a config file, either plain or with a unit suffix.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Quantity {
    Plain(f64),
    Text(String),
}

impl Quantity {
    /// Value in watts. Plain numbers are watts; strings may end in `W`,
    /// `mW` or `dBm`.
    pub fn watts(&self) -> Result<f64> {
        match self {
            Quantity::Plain(v) => Ok(*v),
            Quantity::Text(s) => {
                let (num, unit) = split_unit(s)?;
                match unit {
                    "W" | "" => Ok(num),
                    "mW" => Ok(num * 1e-3),
                    "dBm" => Ok(dbm_to_w(num)),
                    _ => Err(Error::Config(format!("unknown power unit in {s:?}"))),
                }
            }
        }
    }

    /// Dimensionless ratio. Plain numbers are linear; strings may end in
    /// `dB`.
    pub fn ratio(&self) -> Result<f64> {
        match self {
            Quantity::Plain(v) => Ok(*v),
            Quantity::Text(s) => {
                let (num, unit) = split_unit(s)?;
                match unit {
                    "" => Ok(num),
                    "dB" => Ok(db_to_linear(num)),
                    _ => Err(Error::Config(format!("unknown ratio unit in {s:?}"))),
                }
            }
        }
    }
}

fn split_unit(s: &str) -> Result<(f64, &str)> {
    let s = s.trim();
    let end = s
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(s.len());
    let num = s[..end]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("cannot parse number in {s:?}")))?;
    Ok((num, s[end..].trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_roundtrip() {
        assert!((dbm_to_w(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_w(-70.0) - 1e-10).abs() < 1e-24);
        assert!((w_to_dbm(1e-3)).abs() < 1e-12);
        for v in [1e-12, 3.3e-6, 0.5, 10.0] {
            assert!((dbm_to_w(w_to_dbm(v)) / v - 1.0).abs() < 1e-13);
        }
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-14);
        assert!((linear_to_db(100.0) - 20.0).abs() < 1e-14);
    }

    #[test]
    fn quantities_with_units() {
        assert_eq!(Quantity::Plain(2.5).watts().unwrap(), 2.5);
        assert!((Quantity::Text("-30 dBm".into()).watts().unwrap() - 1e-6).abs() < 1e-20);
        assert!((Quantity::Text("4mW".into()).watts().unwrap() - 4e-3).abs() < 1e-18);
        assert!((Quantity::Text("1e-2 W".into()).watts().unwrap() - 1e-2).abs() < 1e-18);
        assert!((Quantity::Text("10 dB".into()).ratio().unwrap() - 10.0).abs() < 1e-14);
        assert!(Quantity::Text("3 furlongs".into()).watts().is_err());
        assert!(Quantity::Text("dB".into()).ratio().is_err());
    }
}
