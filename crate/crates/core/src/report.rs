//! Versioned JSON envelopes and CSV rows for reports.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Bumped whenever a report's shape changes.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<C, T> {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: C,
    pub result: T,
}

impl<C: Serialize, T: Serialize> Envelope<C, T> {
    pub fn new(command: &str, config: C, result: T) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// One capacity value in a probability sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub method: String,
    pub passes: usize,
    pub capacity_bits: f64,
    pub capacity_bpp: f64,
}

pub const SWEEP_HEADER: &str = "p,method,passes,capacity_bits,capacity_bpp";

/// Rows sorted by `p`, then method in the order given.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.p, r.method, r.passes, r.capacity_bits, r.capacity_bpp
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape() {
        let rows = vec![SweepRow {
            p: 0.5,
            method: "cap".into(),
            passes: 2,
            capacity_bits: 10.0,
            capacity_bpp: 0.25,
        }];
        assert_eq!(sweep_csv(&rows), format!("{SWEEP_HEADER}\n0.5,cap,2,10,0.25\n"));
        let env = Envelope::new("estimate", 1, 2);
        assert!(env.to_json().unwrap().contains("\"schema\": 1"));
    }
}
