use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::model::units::w_to_dbm;

/// First line of every result file.
pub const SCHEMA_LINE: &str = "# swipt-maxmin v1";

/// Fixed columns, in order.
pub const BASE_COLUMNS: [&str; 14] = [
    "preset",
    "gamma_db",
    "N",
    "K",
    "L",
    "algorithm",
    "realization",
    "feasible",
    "P_star_W",
    "P_star_dBm",
    "P_H_W",
    "rho_mean",
    "goa_iters",
    "wall_s",
];

/// One design evaluated on one realization at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub preset: String,
    pub gamma_db: f64,
    pub n: usize,
    pub k: usize,
    pub l: f64,
    pub algorithm: String,
    pub realization: u64,
    pub feasible: bool,
    /// Minimum received RF power, watts.
    pub p_star_w: Option<f64>,
    /// Minimum harvested DC power, watts.
    pub p_h_w: Option<f64>,
    pub rho: Vec<f64>,
    pub powers: Vec<f64>,
    pub weights: Vec<f64>,
    pub goa_iters: Option<usize>,
    pub wall_s: Option<f64>,
}

impl ResultRow {
    pub fn p_star_dbm(&self) -> Option<f64> {
        self.p_star_w.filter(|w| *w > 0.0).map(w_to_dbm)
    }

    pub fn rho_mean(&self) -> Option<f64> {
        (!self.rho.is_empty()).then(|| self.rho.iter().sum::<f64>() / self.rho.len() as f64)
    }

    /// Row for a design that could not be produced.
    pub fn infeasible(preset: &str, gamma_db: f64, n: usize, k: usize, l: f64, algorithm: &str, realization: u64) -> Self {
        Self {
            preset: preset.into(),
            gamma_db,
            n,
            k,
            l,
            algorithm: algorithm.into(),
            realization,
            feasible: false,
            p_star_w: None,
            p_h_w: None,
            rho: Vec::new(),
            powers: Vec::new(),
            weights: Vec::new(),
            goa_iters: None,
            wall_s: None,
        }
    }
}

fn num(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(|x| x.to_string()).unwrap_or_default()
}

fn per_user(values: &[f64], k: usize) -> impl Iterator<Item = String> + '_ {
    (0..k).map(move |i| values.get(i).map(|v| v.to_string()).unwrap_or_default())
}

/// Header for a file; per-user columns appear only when `fixed_k` is set.
pub fn header(fixed_k: Option<usize>) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(k) = fixed_k {
        for prefix in ["rho", "p", "w"] {
            cols.extend((1..=k).map(|i| format!("{prefix}_{i}")));
        }
    }
    cols
}

/// Writes the schema line, the header and every row.
pub fn write_rows<W: Write>(mut out: W, rows: &[ResultRow], fixed_k: Option<usize>) -> Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(fixed_k))?;
    for r in rows {
        let mut rec = vec![
            r.preset.clone(),
            r.gamma_db.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.l.to_string(),
            r.algorithm.clone(),
            r.realization.to_string(),
            r.feasible.to_string(),
            num(r.p_star_w),
            num(r.p_star_dbm()),
            num(r.p_h_w),
            num(r.rho_mean()),
            r.goa_iters.map(|c| c.to_string()).unwrap_or_default(),
            num(r.wall_s),
        ];
        if let Some(k) = fixed_k {
            rec.extend(per_user(&r.rho, k));
            rec.extend(per_user(&r.powers, k));
            rec.extend(per_user(&r.weights, k));
        }
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(s: &str, col: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Config(format!("column {col}: cannot parse {s:?}")))
}

fn opt(s: &str, col: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse(s, col).map(Some)
    }
}

/// Reads a result file, checking the schema line and the fixed columns.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != SCHEMA_LINE {
        return Err(Error::Config(format!("missing schema line {SCHEMA_LINE:?}")));
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let head: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if head.len() < BASE_COLUMNS.len() || head[..BASE_COLUMNS.len()] != BASE_COLUMNS {
        return Err(Error::Config("columns do not match the result schema".into()));
    }
    let extra = head.len() - BASE_COLUMNS.len();
    if extra % 3 != 0 {
        return Err(Error::Config("per-user columns are incomplete".into()));
    }
    let k_cols = extra / 3;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let users = |block: usize| -> Result<Vec<f64>> {
            (0..k_cols)
                .map(|i| f(BASE_COLUMNS.len() + block * k_cols + i))
                .take_while(|s| !s.is_empty())
                .map(|s| parse(s, "per-user"))
                .collect()
        };
        rows.push(ResultRow {
            preset: f(0).to_string(),
            gamma_db: parse(f(1), "gamma_db")?,
            n: parse(f(2), "N")?,
            k: parse(f(3), "K")?,
            l: parse(f(4), "L")?,
            algorithm: f(5).to_string(),
            realization: parse(f(6), "realization")?,
            feasible: parse(f(7), "feasible")?,
            p_star_w: opt(f(8), "P_star_W")?,
            p_h_w: opt(f(10), "P_H_W")?,
            rho: users(0)?,
            powers: users(1)?,
            weights: users(2)?,
            goa_iters: if f(12).is_empty() { None } else { Some(parse(f(12), "goa_iters")?) },
            wall_s: opt(f(13), "wall_s")?,
        });
    }
    Ok(rows)
}
