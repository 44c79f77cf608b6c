//! Canonical JSON encoding of traces.
//!
//! Documents are emitted with lexicographically sorted keys and no
//! insignificant whitespace, so equal traces always encode to equal bytes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{PathedDecision, Trace, TraceError};

pub const TRACE_VERSION: &str = "greduce-trace/1";

#[derive(Serialize)]
struct TraceDocRef<'a> {
    version: &'static str,
    generator_id: &'a str,
    seed: u64,
    output_digest: &'a str,
    decisions: Vec<PathedDecision>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDoc {
    #[allow(dead_code)]
    version: String,
    generator_id: String,
    seed: u64,
    output_digest: String,
    decisions: Vec<PathedDecision>,
}

pub fn serialize_trace(trace: &Trace) -> Vec<u8> {
    let doc = TraceDocRef {
        version: TRACE_VERSION,
        generator_id: &trace.generator_id,
        seed: trace.seed,
        output_digest: &trace.output_digest,
        decisions: (0..trace.len()).map(|i| trace.pathed(i)).collect(),
    };
    // Round-tripping through `Value` sorts object keys.
    let value = serde_json::to_value(&doc).expect("trace documents are always representable");
    serde_json::to_vec(&value).expect("serializing a JSON value cannot fail")
}

pub fn deserialize_trace(bytes: &[u8]) -> Result<Trace, TraceError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| TraceError::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    match value.get("version").and_then(Value::as_str) {
        Some(TRACE_VERSION) => {}
        Some(other) => {
            return Err(TraceError::Schema(format!(
                "unsupported version {other:?}, expected {TRACE_VERSION:?}"
            )))
        }
        None => return Err(TraceError::Schema("missing \"version\"".into())),
    }
    let doc: TraceDoc =
        serde_json::from_value(value).map_err(|e| TraceError::Schema(e.to_string()))?;
    Trace::from_pathed(doc.generator_id, doc.seed, doc.output_digest, doc.decisions).map_err(|e| match e {
        TraceError::Malformed(m) => TraceError::Schema(m),
        other => other,
    })
}

/// Converts serde_json's 1-based line/column into a byte offset.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (i, l) in bytes.split(|&b| b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(bytes.len());
        }
        offset += l.len() + 1;
    }
    bytes.len()
}
