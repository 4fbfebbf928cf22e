//! Text and JSON reports for the command-line front end.
//!
//! JSON schema for `invert`:
//! `{variables, field, degree, m0, normalization?, inverse: [{component,
//! terms: [{exponents, coefficient}]}], trace?}` with coefficients printed
//! exactly ("a", "a/b", or a residue). Term order inside each component is
//! the crate-wide graded order, so output is byte-deterministic.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FieldElement, FieldSpec};
use crate::invert::{InversionTrace, SquareMatrix, VerifyOutcome, Witness};
use crate::lang::format_series;
use crate::series::{SeriesMap, TruncatedSeries};
use crate::symmetry::{CheckResult, CheckStatus, SymmetryReport};

/// One monomial of a reported series.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TermDto {
    pub exponents: Vec<u32>,
    /// Exact coefficient: "a", "a/b", or a prime-field residue.
    pub coefficient: String,
}

/// One component of a reported map.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ComponentDto {
    /// 1-based component index.
    pub component: usize,
    pub terms: Vec<TermDto>,
}

/// The CLI tag for a field: `q` or `fp:<p>`.
pub fn field_tag(spec: FieldSpec) -> String {
    match spec.modulus() {
        None => "q".to_string(),
        Some(p) => format!("fp:{p}"),
    }
}

/// Parse the CLI field tag.
pub fn parse_field_tag(tag: &str) -> Result<FieldSpec> {
    let lower = tag.to_ascii_lowercase();
    if lower == "q" {
        return Ok(FieldSpec::rationals());
    }
    if let Some(p) = lower.strip_prefix("fp:") {
        let p: u64 = p.parse().map_err(|_| {
            crate::error::Error::InvalidParameter(format!("cannot parse modulus in {tag:?}"))
        })?;
        return FieldSpec::prime_field(p);
    }
    Err(crate::error::Error::InvalidParameter(format!(
        "unknown field {tag:?} (expected 'q' or 'fp:<prime>')"
    )))
}

pub fn series_to_terms(series: &TruncatedSeries) -> Vec<TermDto> {
    series
        .terms()
        .map(|(m, c)| TermDto {
            exponents: m.exponents().to_vec(),
            coefficient: c.to_string(),
        })
        .collect()
}

pub fn map_to_components(map: &SeriesMap) -> Vec<ComponentDto> {
    map.components()
        .iter()
        .enumerate()
        .map(|(i, series)| ComponentDto {
            component: i + 1,
            terms: series_to_terms(series),
        })
        .collect()
}

/// Rebuild a map from reported components (the JSON round trip).
pub fn map_from_components(
    components: &[ComponentDto],
    nvars: usize,
    max_degree: u32,
    spec: FieldSpec,
) -> Result<SeriesMap> {
    let mut series = Vec::with_capacity(components.len());
    for component in components {
        series.push(TruncatedSeries::from_terms(
            nvars,
            max_degree,
            spec,
            component
                .terms
                .iter()
                .map(|t| Ok((t.exponents.clone(), spec.parse_element(&t.coefficient)?)))
                .collect::<Result<Vec<_>>>()?,
        )?);
    }
    SeriesMap::new(series)
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessDto {
    pub component: usize,
    pub exponents: Vec<u32>,
    pub expected: String,
    pub found: String,
}

impl WitnessDto {
    pub fn from_witness(w: &Witness) -> Self {
        WitnessDto {
            component: w.component,
            exponents: w.exponents.clone(),
            expected: w.expected.to_string(),
            found: w.found.to_string(),
        }
    }
}

fn witness_line(w: &Witness) -> String {
    format!(
        "component {} at {:?}: expected {}, found {}",
        w.component, w.exponents, w.expected, w.found
    )
}

// ---------------------------------------------------------------------------
// invert
// ---------------------------------------------------------------------------

/// Everything `invert` reports.
pub struct InvertOutcome {
    pub variables: Vec<String>,
    pub spec: FieldSpec,
    pub degree: u32,
    pub inverse: SeriesMap,
    pub trace: InversionTrace,
    /// The linear part L when the input needed normalization (F = L∘Ftilde;
    /// the reported inverse is of the full F).
    pub normalization: Option<SquareMatrix>,
    /// Print the trace section.
    pub show_trace: bool,
    /// Metric base for the convergence column of the trace.
    pub metric_base: Option<f64>,
}

#[derive(Serialize)]
struct InvertJson {
    variables: Vec<String>,
    field: String,
    degree: u32,
    m0: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<Vec<Vec<String>>>,
    inverse: Vec<ComponentDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceJson>,
}

#[derive(Serialize)]
struct TraceJson {
    iterates: Vec<Vec<ComponentDto>>,
    partial_sums: Vec<Vec<ComponentDto>>,
    orders: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distances: Option<Vec<f64>>,
}

impl InvertOutcome {
    fn matrix_rows(m: &SquareMatrix) -> Vec<Vec<String>> {
        m.rows()
            .iter()
            .map(|row| row.iter().map(FieldElement::to_string).collect())
            .collect()
    }

    /// Successive distances d(A_m, A_{m+1}) under the chosen metric base.
    fn distances(&self, base: f64) -> Result<Vec<f64>> {
        let sums = &self.trace.partial_sums;
        let mut out = Vec::new();
        for pair in sums.windows(2) {
            out.push(pair[0].distance(&pair[1], base)?);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let trace = if self.show_trace {
            Some(TraceJson {
                iterates: self.trace.iterates.iter().map(map_to_components).collect(),
                partial_sums: self
                    .trace
                    .partial_sums
                    .iter()
                    .map(map_to_components)
                    .collect(),
                orders: self
                    .trace
                    .orders
                    .iter()
                    .map(|row| row.iter().map(|o| o.to_string()).collect())
                    .collect(),
                distances: match self.metric_base {
                    Some(base) => Some(self.distances(base)?),
                    None => None,
                },
            })
        } else {
            None
        };
        let json = InvertJson {
            variables: self.variables.clone(),
            field: field_tag(self.spec),
            degree: self.degree,
            m0: self.trace.m0,
            normalization: self.normalization.as_ref().map(Self::matrix_rows),
            inverse: map_to_components(&self.inverse),
            trace,
        };
        Ok(serde_json::to_string_pretty(&json).expect("serializable"))
    }

    pub fn to_text(&self) -> Result<String> {
        let names: Vec<&str> = self.variables.iter().map(String::as_str).collect();
        let mut out = String::new();
        let _ = writeln!(out, "field: {}", self.spec);
        let _ = writeln!(out, "degree: {}", self.degree);
        let _ = writeln!(out, "m0: {}", self.trace.m0);
        if let Some(linear) = &self.normalization {
            let _ = writeln!(out, "normalization: F = L∘Ftilde with L =");
            for row in Self::matrix_rows(linear) {
                let _ = writeln!(out, "  [{}]", row.join(", "));
            }
        }
        for (i, g) in self.inverse.components().iter().enumerate() {
            let _ = writeln!(out, "G{} = {}", i + 1, format_series(g, &names));
        }
        if self.show_trace {
            let _ = writeln!(out, "trace:");
            for (k, p) in self.trace.iterates.iter().enumerate() {
                let orders: Vec<String> =
                    self.trace.orders[k].iter().map(|o| o.to_string()).collect();
                let _ = writeln!(out, "P_{k} (orders [{}]):", orders.join(", "));
                for (i, c) in p.components().iter().enumerate() {
                    let _ = writeln!(out, "  P_{k}[{}] = {}", i + 1, format_series(c, &names));
                }
            }
            let distances = match self.metric_base {
                Some(base) => Some(self.distances(base)?),
                None => None,
            };
            for (m, a) in self.trace.partial_sums.iter().enumerate() {
                let _ = writeln!(out, "A_{}:", m + 1);
                for (i, c) in a.components().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "  A_{}[{}] = {}",
                        m + 1,
                        i + 1,
                        format_series(c, &names)
                    );
                }
                if let Some(d) = &distances {
                    if m < d.len() {
                        let _ = writeln!(out, "  d(A_{}, A_{}) = {}", m + 1, m + 2, d[m]);
                    }
                }
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub struct VerifyReport {
    pub variables: Vec<String>,
    pub spec: FieldSpec,
    pub degree: u32,
    pub outcome: VerifyOutcome,
}

#[derive(Serialize)]
struct VerifyJson {
    variables: Vec<String>,
    field: String,
    degree: u32,
    verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDto>,
}

impl VerifyReport {
    pub fn verified(&self) -> bool {
        self.outcome.is_verified()
    }

    pub fn to_json(&self) -> String {
        let (side, witness) = match &self.outcome {
            VerifyOutcome::Verified => (None, None),
            VerifyOutcome::Failed { side, witness } => (
                Some(format!("{side:?}").to_ascii_lowercase()),
                Some(WitnessDto::from_witness(witness)),
            ),
        };
        serde_json::to_string_pretty(&VerifyJson {
            variables: self.variables.clone(),
            field: field_tag(self.spec),
            degree: self.degree,
            verified: self.verified(),
            side,
            witness,
        })
        .expect("serializable")
    }

    pub fn to_text(&self) -> String {
        match &self.outcome {
            VerifyOutcome::Verified => format!(
                "verified: true (both compositions equal the identity through degree {})\n",
                self.degree
            ),
            VerifyOutcome::Failed { side, witness } => {
                let side = match side {
                    crate::invert::InverseSide::Left => "G∘F",
                    crate::invert::InverseSide::Right => "F∘G",
                };
                format!(
                    "verified: false\nfirst mismatch in {side}: {}\n",
                    witness_line(witness)
                )
            }
        }
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

pub struct AnalyzeOutcome {
    pub variables: Vec<String>,
    pub spec: FieldSpec,
    pub degree: u32,
    pub report: SymmetryReport,
    /// Extra decomposition checks (when --smax was given).
    pub decomposition: Vec<CheckResult>,
}

#[derive(Serialize)]
struct CheckJson {
    name: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDto>,
}

#[derive(Serialize)]
struct AnalyzeJson {
    variables: Vec<String>,
    field: String,
    degree: u32,
    poly_degree: u32,
    stabilization_indices: Vec<u32>,
    stabilization_index: u32,
    candidate: Vec<ComponentDto>,
    verified: bool,
    summary: String,
    certified_degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDto>,
    residuals: Vec<ResidualJson>,
    checks: Vec<CheckJson>,
}

#[derive(Serialize)]
struct ResidualJson {
    m: u32,
    components: Vec<ComponentDto>,
}

fn status_tag(status: CheckStatus) -> &'static str {
    match status {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::InsufficientPrecision => "insufficient-precision",
    }
}

impl AnalyzeOutcome {
    pub fn all_checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.report.checks.iter().chain(self.decomposition.iter())
    }

    /// Success means a verified candidate and no failed identity check.
    pub fn passed(&self) -> bool {
        self.report.verified && self.all_checks().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        let checks = self
            .all_checks()
            .map(|c| CheckJson {
                name: c.name.clone(),
                status: status_tag(c.status).to_string(),
                witness: c.witness.as_ref().map(WitnessDto::from_witness),
            })
            .collect();
        serde_json::to_string_pretty(&AnalyzeJson {
            variables: self.variables.clone(),
            field: field_tag(self.spec),
            degree: self.degree,
            poly_degree: self.report.poly_degree,
            stabilization_indices: self.report.stabilization_indices.clone(),
            stabilization_index: self.report.stabilization_index,
            candidate: map_to_components(&self.report.candidate),
            verified: self.report.verified,
            summary: self.report.summary(),
            certified_degree: self.report.certified_degree,
            witness: self.report.witness.as_ref().map(WitnessDto::from_witness),
            residuals: self
                .report
                .residuals
                .iter()
                .map(|(m, map)| ResidualJson {
                    m: *m,
                    components: map_to_components(map),
                })
                .collect(),
            checks,
        })
        .expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let names: Vec<&str> = self.variables.iter().map(String::as_str).collect();
        let report = &self.report;
        let mut out = String::new();
        let _ = writeln!(out, "field: {}", self.spec);
        let _ = writeln!(out, "working degree: {}", self.degree);
        let _ = writeln!(out, "poly degree: {}", report.poly_degree);
        let _ = writeln!(
            out,
            "stabilization indices: [{}] (max {})",
            report
                .stabilization_indices
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(", "),
            report.stabilization_index
        );
        for (i, g) in report.candidate.components().iter().enumerate() {
            let _ = writeln!(out, "G{} = {}", i + 1, format_series(g, &names));
        }
        let _ = writeln!(out, "verified: {}", report.verified);
        let _ = writeln!(out, "summary: {}", report.summary());
        if let Some(w) = &report.witness {
            let _ = writeln!(out, "first mismatch: {}", witness_line(w));
        }
        for (m, residual) in &report.residuals {
            for (i, c) in residual.components().iter().enumerate() {
                let _ = writeln!(out, "R_{m}[{}] = {}", i + 1, format_series(c, &names));
            }
        }
        let _ = writeln!(out, "checks:");
        for c in self.all_checks() {
            match &c.witness {
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "  {:<24} {}  ({})",
                        status_tag(c.status),
                        c.name,
                        witness_line(w)
                    );
                }
                None => {
                    let _ = writeln!(out, "  {:<24} {}", status_tag(c.status), c.name);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_map;

    #[test]
    fn field_tags_round_trip() {
        let q = FieldSpec::rationals();
        let f7 = FieldSpec::prime_field(7).unwrap();
        assert_eq!(parse_field_tag(&field_tag(q)).unwrap(), q);
        assert_eq!(parse_field_tag(&field_tag(f7)).unwrap(), f7);
        assert_eq!(parse_field_tag("Q").unwrap(), q);
        assert_eq!(parse_field_tag("FP:7").unwrap(), f7);
        assert!(parse_field_tag("fp:6").is_err());
        assert!(parse_field_tag("r64").is_err());
    }

    #[test]
    fn component_dtos_round_trip() {
        let q = FieldSpec::rationals();
        let map = parse_map("vars: X, Y\nF1 = X - 1/2*X^2*Y\nF2 = Y + X*Y^2", q, 5).unwrap();
        let dto = map_to_components(&map);
        assert_eq!(dto[0].component, 1);
        let back = map_from_components(&dto, 2, 5, q).unwrap();
        assert_eq!(back, map);
    }
}
