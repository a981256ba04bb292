//! Seeded Monte Carlo experiments with CSV/JSON output.

mod design;
mod experiments;
mod records;
mod runner;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shortening::BlockSpec;

pub use design::{design_dump, BlockRates, DesignDump, DesignRates, MatrixJson};
pub use experiments::{
    classical_gap, ergodic_gmi, indefinite_probability, isi_curve, run_experiment,
};
pub use records::{parse_csv, records_to_json, write_csv, SweepRecord, CSV_HEADER};
pub use runner::{run_trials, trial_rng, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ergodic,
    Indefinite,
    Isi,
    ClassicalGap,
    Design,
}

impl Experiment {
    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Ergodic => "ergodic",
            Experiment::Indefinite => "indefinite",
            Experiment::Isi => "isi",
            Experiment::ClassicalGap => "classical-gap",
            Experiment::Design => "design",
        }
    }

    /// Mixed into every trial's RNG key so experiments never share streams.
    pub(crate) fn stream_id(self) -> u64 {
        match self {
            Experiment::Ergodic => 1,
            Experiment::Indefinite => 2,
            Experiment::Isi => 3,
            Experiment::ClassicalGap => 4,
            Experiment::Design => 5,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Factor applied to a value stated in nats.
    pub fn scale(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => std::f64::consts::LOG2_E,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "nats" => Ok(Units::Nats),
            "bits" => Ok(Units::Bits),
            other => Err(Error::InvalidParameter(format!(
                "units must be bits or nats, got \"{other}\""
            ))),
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        })
    }
}

/// SNR points in dB, `start:step:stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SnrGrid {
    pub fn new(start: f64, step: f64, stop: f64) -> Result<Self> {
        if ![start, step, stop].iter().all(|v| v.is_finite()) || step <= 0.0 || stop < start {
            return Err(Error::InvalidParameter(format!(
                "SNR grid {start}:{step}:{stop} must have step > 0 and stop >= start"
            )));
        }
        Ok(SnrGrid { start, step, stop })
    }

    pub fn single(db: f64) -> Result<Self> {
        Self::new(db, 1.0, db)
    }

    /// Accepts `start:step:stop` or a single value.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("invalid SNR value \"{s}\"")))
        };
        match parts.as_slice() {
            [v] => Self::single(num(v)?),
            [a, b, c] => Self::new(num(a)?, num(b)?, num(c)?),
            _ => Err(Error::InvalidParameter(format!(
                "SNR grid must be start:step:stop, got \"{text}\""
            ))),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl Default for SnrGrid {
    fn default() -> Self {
        SnrGrid {
            start: -10.0,
            step: 2.0,
            stop: 40.0,
        }
    }
}

impl fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_r: usize,
    pub n_t: usize,
    pub k: usize,
    pub blocks: Option<BlockSpec>,
    pub alphas: Vec<f64>,
    pub beta: f64,
    pub taps: usize,
    pub snr: SnrGrid,
    pub trials: usize,
    pub seed: u64,
    pub units: Units,
    /// Stop tolerance and iteration cap of the classical ascent.
    pub eps: f64,
    pub max_iter: usize,
}

impl ExperimentConfig {
    pub const DEFAULT_TRIALS: usize = 1000;
    pub const DEFAULT_SEED: u64 = 1;

    /// Defaults for each experiment: a 4x6 IID channel for ergodic rates, a
    /// 5x5 correlated channel for the eigenvalue and classical studies, and a
    /// 64-symbol block for the ISI curve.
    pub fn defaults(experiment: Experiment) -> Self {
        let (n_r, n_t, k) = match experiment {
            Experiment::Ergodic => (4, 6, 2),
            Experiment::Indefinite | Experiment::ClassicalGap => (5, 5, 1),
            Experiment::Isi => (64, 64, 1),
            Experiment::Design => (0, 0, 1),
        };
        let alphas = match experiment {
            Experiment::ClassicalGap => vec![0.5],
            _ => vec![0.1, 0.3, 0.5],
        };
        ExperimentConfig {
            experiment,
            n_r,
            n_t,
            k,
            blocks: None,
            alphas,
            beta: 0.7,
            taps: crate::channels::IsiSpec::DEFAULT_TAPS,
            snr: SnrGrid::default(),
            trials: if experiment == Experiment::Isi { 1 } else { Self::DEFAULT_TRIALS },
            seed: Self::DEFAULT_SEED,
            units: Units::Nats,
            eps: 1e-6,
            max_iter: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.snr.points().is_empty() {
            return Err(Error::InvalidParameter("SNR grid is empty".into()));
        }
        if self.experiment != Experiment::Design && (self.n_r == 0 || self.n_t == 0) {
            return Err(Error::InvalidParameter("antenna counts must be >= 1".into()));
        }
        if let Some(blocks) = &self.blocks {
            blocks.check_dimension(self.n_t)?;
        } else if self.experiment != Experiment::Design && self.k >= self.n_t {
            return Err(Error::InvalidParameter(format!(
                "memory K={} must be below n_T={}",
                self.k, self.n_t
            )));
        }
        Ok(())
    }

    /// Receiver label used in the `param` column.
    pub fn receiver_label(&self) -> String {
        match &self.blocks {
            Some(b) => format!("blocks={}", b.sizes().iter().map(|s| s.to_string()).collect::<Vec<_>>().join("+")),
            None => format!("K={}", self.k),
        }
    }

    /// One-line summary written as the leading comment of CSV output.
    pub fn summary_line(&self) -> String {
        let mut s = format!(
            "seed={} experiment={} trials={} snr_db={} units={}",
            self.seed, self.experiment, self.trials, self.snr, self.units
        );
        match self.experiment {
            Experiment::Isi => s += &format!(" beta={} taps={} nT={}", self.beta, self.taps, self.n_t),
            Experiment::Design => {}
            _ => s += &format!(" nR={} nT={}", self.n_r, self.n_t),
        }
        s += &format!(" {}", self.receiver_label());
        if matches!(self.experiment, Experiment::Indefinite | Experiment::ClassicalGap) {
            let a: Vec<String> = self.alphas.iter().map(|a| a.to_string()).collect();
            s += &format!(" alpha={}", a.join("+"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(SnrGrid::parse("-10:2:40").unwrap().points().len(), 26);
        assert_eq!(SnrGrid::parse("30:10:40").unwrap().points(), vec![30.0, 40.0]);
        assert_eq!(SnrGrid::parse("0:0.1:0.3").unwrap().points().len(), 4);
        assert_eq!(SnrGrid::parse("7").unwrap().points(), vec![7.0]);
        assert!(SnrGrid::parse("0:0:1").is_err());
        assert!(SnrGrid::parse("5:1:0").is_err());
        assert!(SnrGrid::parse("a:1:2").is_err());
        assert_eq!(SnrGrid::default().to_string(), "-10:2:40");
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
        cfg.blocks = Some(BlockSpec::new(vec![3, 2]).unwrap());
        assert!(cfg.validate().is_err());
        cfg.k = 9;
        cfg.blocks = None;
        assert!(cfg.validate().is_err());
    }
}
