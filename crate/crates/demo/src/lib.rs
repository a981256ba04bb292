//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the `*_json` functions behind them are plain Rust so they can be
//! tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use chanshort::channels::{parse_channel, ChannelSource};
use chanshort::harness::{
    design_dump, ergodic_gmi, isi_curve, Experiment, ExperimentConfig, SnrGrid, SweepRecord, Units,
};
use chanshort::BlockSpec;

/// One named curve over the SNR grid, with optional standard errors.
#[derive(Debug, Serialize)]
pub struct Curve {
    pub name: String,
    pub values: Vec<f64>,
    pub stderr: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct Sweep {
    pub snr_db: Vec<f64>,
    pub units: Units,
    pub curves: Vec<Curve>,
    /// Extra scalars: slope estimates, indefinite onset.
    pub notes: Vec<(String, f64)>,
}

fn units_of(bits: bool) -> Units {
    if bits {
        Units::Bits
    } else {
        Units::Nats
    }
}

fn curve(records: &[SweepRecord], points: &[f64], stat: &str, scale: f64, with_err: bool) -> Curve {
    let pick = |db: f64| records.iter().find(|r| r.snr_db == db && r.statistic == stat);
    let values = points.iter().map(|db| pick(*db).map_or(f64::NAN, |r| r.value * scale)).collect();
    let stderr = with_err.then(|| {
        points
            .iter()
            .map(|db| pick(*db).map_or(f64::NAN, |r| r.stderr * scale))
            .collect()
    });
    Curve {
        name: stat.trim_start_matches("rate_").to_string(),
        values,
        stderr,
    }
}

/// Receiver design for a channel typed in the text format. `blocks` is
/// empty for a banded receiver with memory `k`.
pub fn design_json(channel: &str, n0: f64, k: usize, blocks: &str, bits: bool) -> Result<String, String> {
    let ch = parse_channel(channel, n0, ChannelSource::Explicit).map_err(|e| e.to_string())?;
    let blocks = match blocks.trim() {
        "" => None,
        text => Some(BlockSpec::parse(text).map_err(|e| e.to_string())?),
    };
    let dump = design_dump(&ch, k, blocks.as_ref()).map_err(|e| e.to_string())?;
    dump.in_units(units_of(bits)).to_json().map_err(|e| e.to_string())
}

/// Ergodic rates of IID `n_r x n_t` channels: direct and shortcut GMI
/// estimates and the full mutual information.
#[allow(clippy::too_many_arguments)]
pub fn ergodic_json(
    n_r: usize,
    n_t: usize,
    k: usize,
    blocks: &str,
    trials: usize,
    seed: u64,
    snr_db: &str,
    bits: bool,
) -> Result<String, String> {
    let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
    cfg.n_r = n_r;
    cfg.n_t = n_t;
    cfg.k = k;
    cfg.blocks = match blocks.trim() {
        "" => None,
        text => Some(BlockSpec::parse(text).map_err(|e| e.to_string())?),
    };
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.snr = SnrGrid::parse(snr_db).map_err(|e| e.to_string())?;
    let records = ergodic_gmi(&cfg).map_err(|e| e.to_string())?;
    let points = cfg.snr.points();
    let units = units_of(bits);
    let s = units.scale();
    let notes = records
        .iter()
        .filter(|r| r.statistic.starts_with("slope_"))
        .map(|r| (r.statistic.clone(), r.value))
        .collect();
    let sweep = Sweep {
        curves: vec![
            curve(&records, &points, "rate_full", s, true),
            curve(&records, &points, "rate_direct", s, true),
            curve(&records, &points, "rate_shortcut", s, true),
        ],
        snr_db: points,
        units,
        notes,
    };
    serde_json::to_string(&sweep).map_err(|e| e.to_string())
}

/// Per-symbol rates of the bandlimited ISI channel for the banded optimum,
/// the best classical receiver, and the full channel.
pub fn isi_json(beta: f64, n_t: usize, taps: usize, k: usize, snr_db: &str, bits: bool) -> Result<String, String> {
    let mut cfg = ExperimentConfig::defaults(Experiment::Isi);
    cfg.beta = beta;
    cfg.n_t = n_t;
    cfg.n_r = n_t;
    cfg.taps = taps;
    cfg.k = k;
    cfg.snr = SnrGrid::parse(snr_db).map_err(|e| e.to_string())?;
    let records = isi_curve(&cfg).map_err(|e| e.to_string())?;
    let points = cfg.snr.points();
    let units = units_of(bits);
    let s = units.scale();
    let notes = records
        .iter()
        .filter(|r| r.statistic == "indefinite_onset")
        .map(|r| (r.statistic.clone(), r.value))
        .collect();
    let sweep = Sweep {
        curves: vec![
            curve(&records, &points, "rate_full", s, false),
            curve(&records, &points, "rate_banded", s, false),
            curve(&records, &points, "rate_classical", s, false),
            curve(&records, &points, "lambda_min", 1.0, false),
        ],
        snr_db: points,
        units,
        notes,
    };
    serde_json::to_string(&sweep).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn design(channel: &str, n0: f64, k: usize, blocks: &str, bits: bool) -> Result<String, JsError> {
    design_json(channel, n0, k, blocks, bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn ergodic(
    n_r: usize,
    n_t: usize,
    k: usize,
    blocks: &str,
    trials: usize,
    seed: u64,
    snr_db: &str,
    bits: bool,
) -> Result<String, JsError> {
    ergodic_json(n_r, n_t, k, blocks, trials, seed, snr_db, bits).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn isi(beta: f64, n_t: usize, taps: usize, k: usize, snr_db: &str, bits: bool) -> Result<String, JsError> {
    isi_json(beta, n_t, taps, k, snr_db, bits).map_err(|e| JsError::new(&e))
}
