use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Units};
use crate::error::Result;

pub const CSV_HEADER: [&str; 7] = [
    "experiment",
    "snr_db",
    "param",
    "statistic",
    "value",
    "trials",
    "stderr",
];

/// One output row. Values are stored in nats; statistics whose name starts
/// with `rate_` are converted when written in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub experiment: String,
    pub snr_db: f64,
    pub param: String,
    pub statistic: String,
    pub value: f64,
    pub trials: usize,
    pub stderr: f64,
}

impl SweepRecord {
    pub fn is_rate(&self) -> bool {
        self.statistic.starts_with("rate_")
    }

    fn in_units(&self, units: Units) -> SweepRecord {
        let mut out = self.clone();
        if self.is_rate() {
            out.value *= units.scale();
            out.stderr *= units.scale();
        }
        out
    }
}

/// CSV with a `# ...` config comment, the fixed header, then one row per record.
pub fn write_csv<W: Write>(
    out: W,
    config: &ExperimentConfig,
    records: &[SweepRecord],
) -> Result<()> {
    let mut out = out;
    writeln!(out, "# {}", config.summary_line())?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in records {
        writer.serialize(r.in_units(config.units))?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads CSV produced by [`write_csv`]; comment lines are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row?);
    }
    Ok(records)
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    config: &'a ExperimentConfig,
    records: Vec<SweepRecord>,
}

pub fn records_to_json(config: &ExperimentConfig, records: &[SweepRecord]) -> Result<String> {
    let doc = JsonDocument {
        config,
        records: records.iter().map(|r| r.in_units(config.units)).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}
