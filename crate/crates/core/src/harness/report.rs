use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::{Error, Result};

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

impl Verdict {
    pub fn from_holds(holds: bool) -> Self {
        if holds {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }

    /// `Holds` only if every part holds.
    pub fn all(parts: &[bool]) -> Self {
        Self::from_holds(parts.iter().all(|&b| b))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not_applicable",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "holds" => Ok(Verdict::Holds),
            "violated" => Ok(Verdict::Violated),
            "not_applicable" => Ok(Verdict::NotApplicable),
            _ => Err(Error::InvalidInput(format!("unknown verdict {s:?}"))),
        }
    }
}

/// One row of a report. Information quantities `i_sx`, `i_sy` are block
/// totals in bits; `i_xy_per_symbol` is divided by `n`. Unavailable values
/// are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    #[serde(with = "float12")]
    pub gamma_n: f64,
    #[serde(with = "float12")]
    pub rate_x: f64,
    #[serde(with = "float12")]
    pub rate_y: f64,
    #[serde(with = "float12")]
    pub rate_u: f64,
    #[serde(with = "float12")]
    pub p_e: f64,
    #[serde(with = "float12")]
    pub p_x: f64,
    #[serde(with = "float12")]
    pub p_y: f64,
    #[serde(with = "float12")]
    pub i_sx: f64,
    #[serde(with = "float12")]
    pub i_sy: f64,
    #[serde(with = "float12")]
    pub i_xy_per_symbol: f64,
    #[serde(with = "float12")]
    pub exp_x: f64,
    #[serde(with = "float12")]
    pub exp_y: f64,
    /// Rate lower and upper bounds and the finite-n converse inequalities.
    pub v_rate: Verdict,
    /// Converse bound on the attack exponents.
    pub v_exp: Verdict,
    /// `I(X;Y) >= -h(alpha) - (1 - alpha) log2 beta`.
    pub v_logsum: Verdict,
    pub v_fano: Verdict,
    /// Correlation sandwich (blockwise) or correlation identity (symbolwise).
    pub v_sandwich: Verdict,
    #[serde(with = "float12")]
    pub alpha: f64,
    #[serde(with = "float12")]
    pub beta: f64,
    /// `Pr{S^n not typical}` (blockwise only).
    #[serde(with = "float12")]
    pub delta: f64,
    /// 95% half-widths of the Monte Carlo columns; zero for exact values.
    #[serde(with = "float12")]
    pub p_e_half_width: f64,
    #[serde(with = "float12")]
    pub p_x_half_width: f64,
    #[serde(with = "float12")]
    pub p_y_half_width: f64,
    pub l_n: Option<u64>,
    pub m_n: Option<u64>,
    pub note: Option<String>,
}

impl ExperimentRecord {
    /// A row with every value unavailable.
    pub fn skipped(n: usize, gamma_n: f64, note: String) -> Self {
        let nan = f64::NAN;
        Self {
            n,
            gamma_n,
            rate_x: nan,
            rate_y: nan,
            rate_u: nan,
            p_e: nan,
            p_x: nan,
            p_y: nan,
            i_sx: nan,
            i_sy: nan,
            i_xy_per_symbol: nan,
            exp_x: nan,
            exp_y: nan,
            v_rate: Verdict::NotApplicable,
            v_exp: Verdict::NotApplicable,
            v_logsum: Verdict::NotApplicable,
            v_fano: Verdict::NotApplicable,
            v_sandwich: Verdict::NotApplicable,
            alpha: nan,
            beta: nan,
            delta: nan,
            p_e_half_width: nan,
            p_x_half_width: nan,
            p_y_half_width: nan,
            l_n: None,
            m_n: None,
            note: Some(note),
        }
    }

    /// Rounds every float to the 12 significant digits used on output, so
    /// that a report read back from disk equals the one in memory.
    pub(crate) fn round_floats(&mut self) {
        for v in [
            &mut self.gamma_n,
            &mut self.rate_x,
            &mut self.rate_y,
            &mut self.rate_u,
            &mut self.p_e,
            &mut self.p_x,
            &mut self.p_y,
            &mut self.i_sx,
            &mut self.i_sy,
            &mut self.i_xy_per_symbol,
            &mut self.exp_x,
            &mut self.exp_y,
            &mut self.alpha,
            &mut self.beta,
            &mut self.delta,
            &mut self.p_e_half_width,
            &mut self.p_x_half_width,
            &mut self.p_y_half_width,
        ] {
            *v = round12(*v);
        }
    }

    pub fn verdicts(&self) -> [Verdict; 5] {
        [
            self.v_rate,
            self.v_exp,
            self.v_logsum,
            self.v_fano,
            self.v_sandwich,
        ]
    }

    fn csv_fields(&self) -> Vec<String> {
        let mut out = vec![self.n.to_string()];
        out.extend(
            [
                self.gamma_n,
                self.rate_x,
                self.rate_y,
                self.rate_u,
                self.p_e,
                self.p_x,
                self.p_y,
                self.i_sx,
                self.i_sy,
                self.i_xy_per_symbol,
                self.exp_x,
                self.exp_y,
            ]
            .iter()
            .map(|&v| format_float(v)),
        );
        out.extend(self.verdicts().iter().map(|v| v.as_str().to_string()));
        out
    }

    fn from_csv_fields(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != CSV_COLUMNS.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} columns, got {}",
                CSV_COLUMNS.len(),
                row.len()
            )));
        }
        let n = row[0]
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad n {:?}: {e}", &row[0])))?;
        let f = |i: usize| parse_float(&row[i]);
        let mut rec = Self::skipped(n, f(1)?, String::new());
        rec.note = None;
        rec.rate_x = f(2)?;
        rec.rate_y = f(3)?;
        rec.rate_u = f(4)?;
        rec.p_e = f(5)?;
        rec.p_x = f(6)?;
        rec.p_y = f(7)?;
        rec.i_sx = f(8)?;
        rec.i_sy = f(9)?;
        rec.i_xy_per_symbol = f(10)?;
        rec.exp_x = f(11)?;
        rec.exp_y = f(12)?;
        rec.v_rate = Verdict::parse(&row[13])?;
        rec.v_exp = Verdict::parse(&row[14])?;
        rec.v_logsum = Verdict::parse(&row[15])?;
        rec.v_fano = Verdict::parse(&row[16])?;
        rec.v_sandwich = Verdict::parse(&row[17])?;
        Ok(rec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub rng_algorithm: String,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub metadata: ReportMetadata,
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    pub fn has_violation(&self) -> bool {
        self.records
            .iter()
            .any(|r| r.verdicts().contains(&Verdict::Violated))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    JsonLines,
}

pub const CSV_COLUMNS: [&str; 18] = [
    "n",
    "gamma_n",
    "rate_x",
    "rate_y",
    "rate_u",
    "p_e",
    "p_x",
    "p_y",
    "i_sx",
    "i_sy",
    "i_xy_per_symbol",
    "exp_x",
    "exp_y",
    "v_rate",
    "v_exp",
    "v_logsum",
    "v_fano",
    "v_sandwich",
];

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum JsonLine {
    Metadata(ReportMetadata),
    Record(ExperimentRecord),
}

/// Writes the report. CSV carries the per-n columns only; JSON lines start
/// with a metadata line followed by one full record per line.
pub fn emit_report<W: Write>(
    report: &ExperimentReport,
    format: ReportFormat,
    mut out: W,
) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for r in &report.records {
                w.write_record(r.csv_fields())?;
            }
            w.flush()?;
        }
        ReportFormat::JsonLines => {
            serde_json::to_writer(&mut out, &JsonLine::Metadata(report.metadata.clone()))?;
            out.write_all(b"\n")?;
            for r in &report.records {
                serde_json::to_writer(&mut out, &JsonLine::Record(r.clone()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::InvalidInput("unexpected CSV header".into()));
    }
    rdr.records()
        .map(|row| ExperimentRecord::from_csv_fields(&row?))
        .collect()
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<ExperimentReport> {
    let mut metadata = None;
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line)? {
            JsonLine::Metadata(m) if metadata.is_none() => metadata = Some(m),
            JsonLine::Metadata(_) => {
                return Err(Error::InvalidInput("duplicate metadata line".into()))
            }
            JsonLine::Record(r) => records.push(r),
        }
    }
    let metadata = metadata.ok_or_else(|| Error::InvalidInput("missing metadata line".into()))?;
    Ok(ExperimentReport { metadata, records })
}

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// 12 significant digits; `inf`, `-inf` and `nan` for non-finite values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r = round12(v);
        if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|e| Error::InvalidInput(format!("bad number {s:?}: {e}"))),
    }
}

mod float12 {
    use std::fmt;

    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(super::round12(*v))
        } else {
            s.serialize_str(&super::format_float(*v))
        }
    }

    struct FloatVisitor;

    impl Visitor<'_> for FloatVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            super::parse_float(v).map_err(E::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatVisitor)
    }
}
