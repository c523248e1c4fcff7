//! On-disk formats: announcement tables (JSON and CSV), encoding sets,
//! bound results, and scenario reports.
//!
//! Table JSON is an object keyed `"x,y"` with `[p0, p1, p2]` values printed
//! to 17 significant digits, which round-trips every double losslessly:
//!
//! ```json
//! { "0,0": [5.0e-1, 5.0e-1, 0.0e0], "0,1": [...], ... }
//! ```

use std::collections::BTreeMap;

use qmdiqkd_core::bound::BoundResult;
use qmdiqkd_core::qstate::{ComplexAmp, EncodingSet, QubitState};
use qmdiqkd_core::tables::{OutcomeTable, SenderPair};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("json parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("table json must be an object of \"x,y\" -> [p0,p1,p2]")]
    Shape,
    #[error("missing sender pair \"{0}\"")]
    MissingPair(String),
    #[error("invalid table: {0}")]
    Invalid(#[from] qmdiqkd_core::tables::TableError),
    #[error("invalid state: {0}")]
    State(#[from] qmdiqkd_core::qstate::QstateError),
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a table in canonical pair order with 17-significant-digit
/// values.
pub fn table_to_json_string(t: &OutcomeTable) -> String {
    let mut out = String::from("{\n");
    for (i, pair) in SenderPair::ALL.iter().enumerate() {
        let col = t.column(*pair);
        out += &format!(
            "  \"{},{}\": [{}, {}, {}]{}\n",
            pair.x(),
            pair.y(),
            fmt17(col[0]),
            fmt17(col[1]),
            fmt17(col[2]),
            if i + 1 < SenderPair::ALL.len() { "," } else { "" }
        );
    }
    out += "}\n";
    out
}

pub fn table_from_json_str(s: &str) -> Result<OutcomeTable, FormatError> {
    let parsed: BTreeMap<String, Vec<f64>> = serde_json::from_str(s)?;
    let mut cols = [[0.0; 3]; 8];
    for pair in SenderPair::ALL {
        let key = format!("{},{}", pair.x(), pair.y());
        let row = parsed.get(&key).ok_or(FormatError::MissingPair(key))?;
        if row.len() != 3 {
            return Err(FormatError::Shape);
        }
        cols[pair.column_index()] = [row[0], row[1], row[2]];
    }
    Ok(OutcomeTable::from_columns(cols)?)
}

/// CSV export with header `x,y,p0,p1,p2`.
pub fn table_to_csv(t: &OutcomeTable) -> String {
    let mut out = String::from("x,y,p0,p1,p2\n");
    for pair in SenderPair::ALL {
        let col = t.column(pair);
        out += &format!("{},{},{},{},{}\n", pair.x(), pair.y(), col[0], col[1], col[2]);
    }
    out
}

/// Encoding set as a JSON array of 4 states, each an array of 2 `[re, im]`
/// pairs.
pub fn encoding_set_to_json(e: &EncodingSet) -> Value {
    Value::Array(
        e.states()
            .iter()
            .map(|s| {
                Value::Array(
                    s.amps()
                        .iter()
                        .map(|a| json!([a.re, a.im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn encoding_set_from_json(v: &Value) -> Result<EncodingSet, FormatError> {
    let arr = v.as_array().ok_or(FormatError::Shape)?;
    if arr.len() != 4 {
        return Err(FormatError::Shape);
    }
    let mut states = Vec::with_capacity(4);
    for s in arr {
        let amps = s.as_array().ok_or(FormatError::Shape)?;
        if amps.len() != 2 {
            return Err(FormatError::Shape);
        }
        let mut parsed = [ComplexAmp::new(0.0, 0.0); 2];
        for (slot, pair) in parsed.iter_mut().zip(amps) {
            let re_im = pair.as_array().ok_or(FormatError::Shape)?;
            if re_im.len() != 2 {
                return Err(FormatError::Shape);
            }
            let re = re_im[0].as_f64().ok_or(FormatError::Shape)?;
            let im = re_im[1].as_f64().ok_or(FormatError::Shape)?;
            *slot = ComplexAmp::new(re, im);
        }
        states.push(QubitState::new(parsed)?);
    }
    Ok(EncodingSet::new([states[0], states[1], states[2], states[3]]))
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Bound result as JSON; non-finite ε (degenerate statistics with no
/// admissible branch) serializes as null.
pub fn bound_result_to_json(r: &BoundResult) -> Value {
    json!({
        "chi": r.chi,
        "chi_p": r.chi_p,
        "e_b": r.e_b,
        "epsilon": finite_or_null(r.epsilon),
        "epsilon_safe": finite_or_null(r.epsilon_safe),
        "e_p": r.e_p,
        "rate": r.rate,
        "degenerate": r.degenerate,
        "argmax": {
            "c30": r.argmax.c30,
            "c31": r.argmax.c31,
            "cp20": r.argmax.cp20,
            "cp21": r.argmax.cp21,
            "r": r.argmax.r,
            "rp": r.argmax.rp,
        },
    })
}
