//! Output records and their text/JSON/CSV renderings.
//!
//! Machine formats render arbitrary-precision integers as decimal strings
//! and rationals as "num/den"; the same record type round-trips through
//! serde. Text rendering goes through the record too, so cached and freshly
//! computed results print identically.

use serde::{Deserialize, Serialize};
use subvar::{BigInt, BigUint, DegreeResult, ExactRational, FormatProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// A degree computation rendered for output; all big integers as decimal
/// strings, the rational `f` as "num/den".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub k: Vec<u32>,
    pub n: Vec<u32>,
    #[serde(rename = "N")]
    pub big_n: String,
    #[serde(rename = "K")]
    pub big_k: String,
    #[serde(rename = "D")]
    pub d: u64,
    pub dimension: String,
    pub grass_degrees: Vec<String>,
    pub f: String,
    pub degree: String,
}

pub fn rational_string(r: &ExactRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<ExactRational, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a, b),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|e| format!("bad numerator: {e}"))?;
    let den: BigInt = den.parse().map_err(|e| format!("bad denominator: {e}"))?;
    if den == BigInt::from(0) {
        return Err("zero denominator".into());
    }
    Ok(ExactRational::new(num, den))
}

impl DegreeRecord {
    pub fn from_result(result: &DegreeResult) -> Self {
        let profile = &result.profile;
        DegreeRecord {
            k: profile.rank_bounds().to_vec(),
            n: profile.ambient_dims().to_vec(),
            big_n: profile.scalar_n().to_string(),
            big_k: profile.scalar_k().to_string(),
            d: profile.scalar_d() as u64,
            dimension: result.dimension.to_string(),
            grass_degrees: result.grass_degrees.iter().map(|g| g.to_string()).collect(),
            f: rational_string(&result.degree_factor),
            degree: result.degree.to_string(),
        }
    }

    /// Rebuilds the record from cached values plus the profile (the scalar
    /// columns are derived, not cached).
    pub fn from_cached(
        profile: &FormatProfile,
        degree: &str,
        f: &str,
        grass_degrees: &[String],
    ) -> Self {
        DegreeRecord {
            k: profile.rank_bounds().to_vec(),
            n: profile.ambient_dims().to_vec(),
            big_n: profile.scalar_n().to_string(),
            big_k: profile.scalar_k().to_string(),
            d: profile.scalar_d() as u64,
            dimension: (profile.scalar_k() + BigUint::from(profile.scalar_d())).to_string(),
            grass_degrees: grass_degrees.to_vec(),
            f: f.to_string(),
            degree: degree.to_string(),
        }
    }

    /// The diagonal factorial sum, reconstructed exactly from `f`.
    fn diagonal_sum(&self) -> Result<BigInt, String> {
        let f = parse_rational(&self.f)?;
        let mode_factorials: BigInt = self
            .k
            .iter()
            .zip(&self.n)
            .map(|(&k, &n)| BigInt::from(subvar::factorial(k as u64 * (n - k) as u64)))
            .product();
        let g = f * ExactRational::from(mode_factorials);
        if !g.is_integer() {
            return Err(format!("f = {} is not a multiple of the factorial unit", self.f));
        }
        Ok(g.to_integer())
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.render_text(),
            OutputFormat::Json => serde_json::to_string(self).expect("record to JSON"),
            OutputFormat::Csv => {
                let mut out = String::from(DEGREE_CSV_HEADER);
                out.push('\n');
                out.push_str(&self.to_csv_row());
                out
            }
        }
    }

    fn render_text(&self) -> String {
        let g = self
            .diagonal_sum()
            .map(|g| g.to_string())
            .unwrap_or_else(|_| "?".into());
        format!(
            "k = ({k})\nn = ({n})\nN = {bn}, K = {bk}, D = {d}\ndimension = {dim}\n\
             grassmannian degrees = [{grass}]\ng = {g}\nf = {f}\ndegree = {degree}",
            k = csv_list(&self.k),
            n = csv_list(&self.n),
            bn = self.big_n,
            bk = self.big_k,
            d = self.d,
            dim = self.dimension,
            grass = self.grass_degrees.join(", "),
            f = self.f,
            degree = self.degree,
        )
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "\"{}\",\"{}\",{},{},{},{},{},{},{}",
            csv_list(&self.k),
            csv_list(&self.n),
            self.big_n,
            self.big_k,
            self.d,
            self.dimension,
            self.grass_degrees.join("|"),
            self.f,
            self.degree,
        )
    }
}

pub const DEGREE_CSV_HEADER: &str = "k,n,N,K,D,dimension,grass_degrees,f,degree";

pub fn csv_list(values: &[u32]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Outcome of one exact-vs-Monte-Carlo validation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateRecord {
    pub k: Vec<u32>,
    pub n: Vec<u32>,
    pub exact_degree: String,
    pub samples: u64,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub batch_std_error: f64,
    pub derived_f: f64,
    pub derived_degree: f64,
    pub z_score: f64,
    pub gate: f64,
    pub pass: bool,
}

impl ValidateRecord {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string(self).expect("record to JSON"),
            OutputFormat::Csv => format!(
                "k,n,exact_degree,samples,seed,derived_degree,z_score,pass\n\
                 \"{}\",\"{}\",{},{},{},{},{},{}",
                csv_list(&self.k),
                csv_list(&self.n),
                self.exact_degree,
                self.samples,
                self.seed,
                self.derived_degree,
                self.z_score,
                self.pass,
            ),
            OutputFormat::Text => {
                let se_degree = self.std_error * self.degree_scale();
                format!(
                    "k = ({}), n = ({})\nexact degree   = {}\n\
                     mc degree      = {:.4} +- {:.4} ({} samples, seed {})\n\
                     mc f estimate  = {:.6}\nz-score        = {:+.3} (gate {})\n{}",
                    csv_list(&self.k),
                    csv_list(&self.n),
                    self.exact_degree,
                    self.derived_degree,
                    se_degree,
                    self.samples,
                    self.seed,
                    self.derived_f,
                    self.z_score,
                    self.gate,
                    if self.pass { "PASS" } else { "FAIL" },
                )
            }
        }
    }

    fn degree_scale(&self) -> f64 {
        if self.mean == 0.0 {
            0.0
        } else {
            self.derived_degree / self.mean
        }
    }
}

/// One row of a table command; either a computed degree or an error marker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub k: Vec<u32>,
    pub n: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<String>,
    /// Closed-form oracle value, for presets that carry one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn render_table(rows: &[TableRow], with_oracle: bool, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => serde_json::to_string(rows).expect("rows to JSON"),
        OutputFormat::Csv => {
            let mut out = String::from(if with_oracle {
                "k,n,degree,closed_form,match"
            } else {
                "k,n,degree"
            });
            for row in rows {
                out.push('\n');
                let degree = row
                    .degree
                    .clone()
                    .unwrap_or_else(|| format!("error: {}", row.error.as_deref().unwrap_or("?")));
                out.push_str(&format!(
                    "\"{}\",\"{}\",{}",
                    csv_list(&row.k),
                    csv_list(&row.n),
                    degree
                ));
                if with_oracle {
                    let oracle = row.oracle.clone().unwrap_or_default();
                    let matched = row.degree.is_some() && row.degree == row.oracle;
                    out.push_str(&format!(",{oracle},{matched}"));
                }
            }
            out
        }
        OutputFormat::Text => {
            let mut lines: Vec<Vec<String>> = Vec::new();
            let mut header = vec!["k".to_string(), "n".to_string(), "degree".to_string()];
            if with_oracle {
                header.push("closed_form".into());
                header.push("match".into());
            }
            lines.push(header);
            for row in rows {
                let degree = row
                    .degree
                    .clone()
                    .unwrap_or_else(|| format!("error: {}", row.error.as_deref().unwrap_or("?")));
                let mut line = vec![
                    format!("({})", csv_list(&row.k)),
                    format!("({})", csv_list(&row.n)),
                    degree,
                ];
                if with_oracle {
                    line.push(row.oracle.clone().unwrap_or_default());
                    line.push(
                        (row.degree.is_some() && row.degree == row.oracle).to_string(),
                    );
                }
                lines.push(line);
            }
            let cols = lines[0].len();
            let widths: Vec<usize> = (0..cols)
                .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
                .collect();
            lines
                .iter()
                .map(|l| {
                    l.iter()
                        .enumerate()
                        .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                })
                .collect::<Vec<_>>()
                .join("\n")
        }
    }
}
