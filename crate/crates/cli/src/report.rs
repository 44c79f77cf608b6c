//! Per-cell reduction reports and their JSON and CSV encodings.

use serde::{Deserialize, Serialize};

use greduce::reduce::ReductionMetrics;
use greduce::trace::digest_hex;

pub const REPORT_SCHEMA: &str = "greduce-report/1";

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 24] = [
    "schema",
    "case",
    "search",
    "strategy",
    "seed",
    "realign_seed",
    "timeout",
    "size_original",
    "size_final",
    "quality",
    "wall_time",
    "property_tests",
    "speed",
    "validity_rate",
    "candidates",
    "halted_candidates",
    "prog_mismatches",
    "dec_mismatches",
    "bypassed_units",
    "realigned_values",
    "removable_units",
    "timed_out",
    "sound",
    "result_digest",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentCounts {
    pub prog_mismatch: u64,
    pub dec_mismatch: u64,
    pub bypassed_units: u64,
    pub realigned_values: u64,
}

/// Outcome of one campaign cell. Sizes are scalar; graph sizes are the sum
/// of nodes and edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub schema: String,
    pub case: String,
    pub search: String,
    pub strategy: String,
    pub seed: u64,
    pub realign_seed: u64,
    /// Seconds, if a deadline was set.
    pub timeout: Option<f64>,
    pub size_original: usize,
    pub size_final: usize,
    pub quality: f64,
    pub wall_time: f64,
    pub property_tests: u64,
    /// Size units removed per second.
    pub speed: f64,
    pub validity_rate: f64,
    pub candidates: u64,
    pub halted_candidates: u64,
    pub misalignment_counts: MisalignmentCounts,
    pub removable_units: usize,
    pub timed_out: bool,
    /// The final input still exhibits the property.
    pub sound: bool,
    pub result_digest: String,
    pub final_input: String,
    pub error: Option<String>,
}

impl ReductionReport {
    #[allow(clippy::too_many_arguments)]
    pub fn from_metrics(
        case: &str,
        search: &str,
        strategy: &str,
        seed: u64,
        realign_seed: u64,
        timeout: Option<f64>,
        metrics: &ReductionMetrics,
        final_input: &str,
        sound: bool,
    ) -> Self {
        let original = metrics.size_original.total();
        let fin = metrics.size_final.total();
        let quality = if original == 0 { 1.0 } else { fin as f64 / original as f64 };
        let speed = if metrics.wall_time > 0.0 {
            original.saturating_sub(fin) as f64 / metrics.wall_time
        } else {
            0.0
        };
        ReductionReport {
            schema: REPORT_SCHEMA.to_string(),
            case: case.to_string(),
            search: search.to_string(),
            strategy: strategy.to_string(),
            seed,
            realign_seed,
            timeout,
            size_original: original,
            size_final: fin,
            quality,
            wall_time: metrics.wall_time,
            property_tests: metrics.property_tests,
            speed,
            validity_rate: metrics.validity_rate(),
            candidates: metrics.candidates,
            halted_candidates: metrics.halted,
            misalignment_counts: MisalignmentCounts {
                prog_mismatch: metrics.prog_mismatches,
                dec_mismatch: metrics.dec_mismatches,
                bypassed_units: metrics.bypassed_units,
                realigned_values: metrics.realigned_values,
            },
            removable_units: metrics.removable_units,
            timed_out: metrics.timed_out,
            sound,
            result_digest: digest_hex(final_input.as_bytes()),
            final_input: final_input.to_string(),
            error: None,
        }
    }

    /// A cell that could not be reduced at all.
    pub fn failed(case: &str, search: &str, strategy: &str, seed: u64, realign_seed: u64, error: String) -> Self {
        ReductionReport {
            schema: REPORT_SCHEMA.to_string(),
            case: case.to_string(),
            search: search.to_string(),
            strategy: strategy.to_string(),
            seed,
            realign_seed,
            timeout: None,
            size_original: 0,
            size_final: 0,
            quality: 1.0,
            wall_time: 0.0,
            property_tests: 0,
            speed: 0.0,
            validity_rate: 1.0,
            candidates: 0,
            halted_candidates: 0,
            misalignment_counts: MisalignmentCounts {
                prog_mismatch: 0,
                dec_mismatch: 0,
                bypassed_units: 0,
                realigned_values: 0,
            },
            removable_units: 0,
            timed_out: false,
            sound: false,
            result_digest: String::new(),
            final_input: String::new(),
            error: Some(error),
        }
    }

    /// Copy with the timing-dependent fields zeroed.
    pub fn without_timing(&self) -> Self {
        ReductionReport {
            wall_time: 0.0,
            speed: 0.0,
            ..self.clone()
        }
    }
}

/// JSON array with keys sorted, one trailing newline.
pub fn emit_json(reports: &[ReductionReport]) -> Vec<u8> {
    let value = serde_json::to_value(reports).expect("reports serialize");
    let mut out = serde_json::to_vec_pretty(&value).expect("values serialize");
    out.push(b'\n');
    out
}

pub fn parse_json(bytes: &[u8]) -> Result<Vec<ReductionReport>, serde_json::Error> {
    serde_json::from_slice(bytes)
}

pub fn emit_csv(reports: &[ReductionReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in reports {
        let c = &r.misalignment_counts;
        w.write_record([
            r.schema.clone(),
            r.case.clone(),
            r.search.clone(),
            r.strategy.clone(),
            r.seed.to_string(),
            r.realign_seed.to_string(),
            r.timeout.map(|t| t.to_string()).unwrap_or_default(),
            r.size_original.to_string(),
            r.size_final.to_string(),
            r.quality.to_string(),
            r.wall_time.to_string(),
            r.property_tests.to_string(),
            r.speed.to_string(),
            r.validity_rate.to_string(),
            r.candidates.to_string(),
            r.halted_candidates.to_string(),
            c.prog_mismatch.to_string(),
            c.dec_mismatch.to_string(),
            c.bypassed_units.to_string(),
            c.realigned_values.to_string(),
            r.removable_units.to_string(),
            r.timed_out.to_string(),
            r.sound.to_string(),
            r.result_digest.clone(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn emit_report(reports: &[ReductionReport], format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => emit_json(reports),
        ReportFormat::Csv => emit_csv(reports),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use greduce::gen::Size;

    fn sample() -> ReductionReport {
        let metrics = ReductionMetrics {
            size_original: Size::Graph { nodes: 5, edges: 5 },
            size_final: Size::Graph { nodes: 1, edges: 1 },
            wall_time: 0.5,
            property_tests: 6,
            candidates: 5,
            completed: 5,
            valid_completed: 5,
            halted: 0,
            generator_errors: 0,
            prog_mismatches: 1,
            dec_mismatches: 2,
            bypassed_units: 0,
            realigned_values: 3,
            removable_units: 10,
            timed_out: false,
        };
        ReductionReport::from_metrics("digraph", "tree", "realign", 33, 0, None, &metrics, "n 0\ne 0 0\n", true)
    }

    #[test]
    fn derived_metrics() {
        let r = sample();
        assert_eq!((r.size_original, r.size_final), (10, 2));
        assert_eq!(r.quality, 0.2);
        assert_eq!(r.speed, 16.0);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let bytes = emit_json(&[sample()]);
        let back = parse_json(&bytes).unwrap();
        assert_eq!(back, vec![sample()]);
        assert_eq!(emit_json(&back), bytes);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 1);
    }

    #[test]
    fn csv_header_is_fixed() {
        let bytes = emit_csv(&[sample()]);
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.count(), 1);
    }
}
