use rand_chacha::ChaCha8Rng;

use super::runner::{par_map, run_trials, Summary};
use super::{db_to_linear, Experiment, ExperimentConfig, SweepRecord};
use crate::asymptotics::{estimate_slope_offset, slope_block, slope_cs};
use crate::channels::{isi_channel, sample_iid, Channel, IsiSpec, KroneckerSpec};
use crate::error::{Error, Result};
use crate::matcore::{identity, logdet_pd, BandSpec, ComplexMatrix};
use crate::rates::{block_rate, full_rate, gmi_column_removal, gmi_logdet};
use crate::shortening::{
    classical_shortener, lambda_min_of_target, mmse_matrix, optimal_target, INDEFINITE_THRESHOLD,
};

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    match cfg.experiment {
        Experiment::Ergodic => ergodic_gmi(cfg),
        Experiment::Indefinite => indefinite_probability(cfg),
        Experiment::Isi => isi_curve(cfg),
        Experiment::ClassicalGap => classical_gap(cfg),
        Experiment::Design => Err(Error::InvalidParameter(
            "design is a single-channel report, not a sweep".into(),
        )),
    }
}

fn record(
    cfg: &ExperimentConfig,
    snr_db: f64,
    param: &str,
    statistic: &str,
    s: Summary,
) -> SweepRecord {
    SweepRecord {
        experiment: cfg.experiment.tag().to_string(),
        snr_db,
        param: param.to_string(),
        statistic: statistic.to_string(),
        value: s.mean,
        trials: s.count,
        stderr: s.stderr,
    }
}

fn exact(value: f64, trials: usize) -> Summary {
    Summary {
        mean: value,
        stderr: 0.0,
        count: trials,
    }
}

fn collect<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

fn reject_blocks(cfg: &ExperimentConfig) -> Result<()> {
    if cfg.blocks.is_some() {
        return Err(Error::InvalidParameter(format!(
            "{} supports banded receivers only",
            cfg.experiment
        )));
    }
    Ok(())
}

/// `log det(I + rho H^H H)` for one draw; an empty matrix gives 0.
fn ibar_sample(h: &ComplexMatrix, rho: f64) -> Result<f64> {
    if h.ncols() == 0 {
        return Ok(0.0);
    }
    logdet_pd(&(identity(h.ncols()) + (h.adjoint() * h).scale(rho)))
}

/// Signed `(coefficient, columns)` terms whose expectations add up to the
/// ergodic GMI of the configured receiver.
fn shortcut_terms(cfg: &ExperimentConfig) -> Vec<(f64, usize)> {
    let n_t = cfg.n_t;
    match &cfg.blocks {
        Some(blocks) => {
            let m = blocks.sizes().len() as f64;
            let mut terms = vec![(m, n_t)];
            terms.extend(blocks.sizes().iter().map(|&km| (-1.0, n_t - km)));
            terms
        }
        None => {
            let k = cfg.k;
            vec![
                (1.0, n_t),
                (-((n_t - k) as f64), n_t - k - 1),
                ((n_t - k - 1) as f64, n_t - k),
            ]
        }
    }
}

/// Ergodic GMI over IID channels at `rho = snr / n_T` per input.
///
/// Each trial draws one channel used at every SNR point (`rate_direct`,
/// `rate_full`) and separate independent matrices for the moment shortcut
/// (`rate_shortcut`), so the two estimates are statistically independent.
pub fn ergodic_gmi(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let points = cfg.snr.points();
    let terms = shortcut_terms(cfg);
    let (n_r, n_t) = (cfg.n_r, cfg.n_t);

    let per_trial = run_trials(cfg.seed, Experiment::Ergodic, cfg.trials, |_, rng| {
        ergodic_trial(cfg, &points, &terms, rng)
    });
    let per_trial = collect(per_trial)?;

    let param = format!("nR={n_r} nT={n_t} {}", cfg.receiver_label());
    let mut out = Vec::new();
    for (i, db) in points.iter().enumerate() {
        for (j, name) in ["rate_direct", "rate_shortcut", "rate_full"].iter().enumerate() {
            let vals: Vec<f64> = per_trial.iter().map(|t| t[i][j]).collect();
            out.push(record(cfg, *db, &param, name, Summary::of(&vals)));
        }
    }

    if points.len() >= 2 {
        let last = points.len() - 1;
        let slopes = per_trial
            .iter()
            .map(|t| {
                let curve = [(points[last - 1], t[last - 1][0]), (points[last], t[last][0])];
                estimate_slope_offset(&curve).map(|s| s.s_inf)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(record(cfg, points[last], &param, "slope_direct", Summary::of(&slopes)));
        let theory = match &cfg.blocks {
            Some(b) => slope_block(n_r, n_t, b),
            None => slope_cs(n_r, n_t, cfg.k),
        };
        out.push(record(cfg, points[last], &param, "slope_theory", exact(theory as f64, cfg.trials)));
    }
    Ok(out)
}

fn ergodic_trial(
    cfg: &ExperimentConfig,
    points: &[f64],
    terms: &[(f64, usize)],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<[f64; 3]>> {
    let (n_r, n_t) = (cfg.n_r, cfg.n_t);
    let h = sample_iid(rng, n_r, n_t);
    let independent: Vec<(f64, ComplexMatrix)> = terms
        .iter()
        .map(|&(c, cols)| (c, sample_iid(rng, n_r, cols)))
        .collect();
    let mut channel = Channel::new(h, 1.0, crate::channels::ChannelSource::Iid)?;

    points
        .iter()
        .map(|db| {
            let snr = db_to_linear(*db);
            channel.n0 = n_t as f64 / snr;
            let direct = match &cfg.blocks {
                Some(b) => block_rate(&channel, b)?.total,
                None => gmi_column_removal(&channel, cfg.k)?.total,
            };
            let rho = snr / n_t as f64;
            let mut shortcut = 0.0;
            for (c, m) in &independent {
                shortcut += c * ibar_sample(m, rho)?;
            }
            Ok([direct, shortcut, full_rate(&channel)?])
        })
        .collect()
}

/// Fraction of correlated channels whose banded optimum has a negative eigenvalue.
///
/// Each trial draws one white matrix and correlates it with every `alpha`, so
/// the comparison across correlation levels uses common random numbers.
pub fn indefinite_probability(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    reject_blocks(cfg)?;
    let n = square_dimension(cfg)?;
    let roots = correlation_roots(cfg, n)?;
    let points = cfg.snr.points();
    let band = BandSpec(cfg.k);

    let per_trial = run_trials(cfg.seed, Experiment::Indefinite, cfg.trials, |_, rng| {
        let hw = sample_iid(rng, n, n);
        let mut flags = Vec::with_capacity(roots.len() * points.len());
        for root in &roots {
            let h = root * &hw * root;
            for db in &points {
                let ch = Channel::explicit(h.clone(), 1.0 / db_to_linear(*db))?;
                let lam = lambda_min_of_target(&mmse_matrix(&ch)?, band)?;
                flags.push(lam < INDEFINITE_THRESHOLD);
            }
        }
        Ok(flags)
    });
    let per_trial = collect(per_trial)?;

    let mut out = Vec::new();
    for (a, alpha) in cfg.alphas.iter().enumerate() {
        let param = format!("alpha={alpha} K={}", cfg.k);
        for (i, db) in points.iter().enumerate() {
            let idx = a * points.len() + i;
            let hits = per_trial.iter().filter(|t| t[idx]).count();
            out.push(record(cfg, *db, &param, "p_indefinite", Summary::proportion(hits, cfg.trials)));
        }
    }
    Ok(out)
}

fn square_dimension(cfg: &ExperimentConfig) -> Result<usize> {
    if cfg.n_r != cfg.n_t {
        return Err(Error::DimensionMismatch(format!(
            "correlated channels are square, got {}x{}",
            cfg.n_r, cfg.n_t
        )));
    }
    Ok(cfg.n_t)
}

fn correlation_roots(cfg: &ExperimentConfig, n: usize) -> Result<Vec<ComplexMatrix>> {
    if cfg.alphas.is_empty() {
        return Err(Error::InvalidParameter("at least one alpha is required".into()));
    }
    cfg.alphas
        .iter()
        .map(|a| Ok(KroneckerSpec::new(*a, n)?.correlation_sqrt()))
        .collect()
}

/// Per-symbol rates of the truncated ideal low-pass ISI channel at `snr = 1/N0`.
pub fn isi_curve(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    reject_blocks(cfg)?;
    let spec = IsiSpec::new(cfg.beta, cfg.n_t, cfg.taps)?;
    let base = isi_channel(&spec)?;
    let points = cfg.snr.points();
    let band = BandSpec::for_dimension(cfg.k, cfg.n_t)?;
    let n_t = cfg.n_t as f64;

    let rows = par_map(&points, |db| -> Result<[f64; 4]> {
        let ch = base.clone().with_n0(1.0 / db_to_linear(*db))?;
        let b = mmse_matrix(&ch)?;
        let banded = gmi_column_removal(&ch, band.memory())?.total;
        let classical = classical_shortener(&b, band, cfg.eps, cfg.max_iter)?;
        Ok([
            banded / n_t,
            classical.achieved_rate / n_t,
            full_rate(&ch)? / n_t,
            classical.lambda_min,
        ])
    });
    let rows = collect(rows)?;

    let param = format!("beta={} K={}", cfg.beta, cfg.k);
    let mut out = Vec::new();
    for (db, row) in points.iter().zip(&rows) {
        for (name, v) in ["rate_banded", "rate_classical", "rate_full", "lambda_min"]
            .iter()
            .zip(row)
        {
            out.push(record(cfg, *db, &param, name, exact(*v, 1)));
        }
    }
    if let Some((db, _)) = points
        .iter()
        .zip(&rows)
        .find(|(_, r)| r[3] < INDEFINITE_THRESHOLD)
    {
        out.push(record(cfg, *db, &param, "indefinite_onset", exact(*db, 1)));
    }
    Ok(out)
}

/// Classical `F^H F` receivers against the banded optimum on correlated
/// channels, over the trials where the optimum is indefinite.
pub fn classical_gap(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    reject_blocks(cfg)?;
    let n = square_dimension(cfg)?;
    let roots = correlation_roots(cfg, n)?;
    let points = cfg.snr.points();
    let band = BandSpec(cfg.k);

    // (final ratio, initial ratio, iterations, converged) per indefinite case.
    type Case = Option<(f64, f64, usize, bool)>;
    let per_trial = run_trials(cfg.seed, Experiment::ClassicalGap, cfg.trials, |_, rng| {
        let hw = sample_iid(rng, n, n);
        let mut cases: Vec<Case> = Vec::with_capacity(roots.len() * points.len());
        for root in &roots {
            let h = root * &hw * root;
            for db in &points {
                let ch = Channel::explicit(h.clone(), 1.0 / db_to_linear(*db))?;
                let b = mmse_matrix(&ch)?;
                let design = classical_shortener(&b, band, cfg.eps, cfg.max_iter)?;
                if design.lambda_min >= INDEFINITE_THRESHOLD {
                    cases.push(None);
                    continue;
                }
                let optimum = gmi_logdet(&optimal_target(&b, band)?)?;
                cases.push(Some((
                    design.achieved_rate / optimum,
                    design.initial_rate / optimum,
                    design.iterations,
                    design.converged,
                )));
            }
        }
        Ok(cases)
    });
    let per_trial = collect(per_trial)?;

    let mut out = Vec::new();
    for (a, alpha) in cfg.alphas.iter().enumerate() {
        let param = format!("alpha={alpha} K={}", cfg.k);
        for (i, db) in points.iter().enumerate() {
            let idx = a * points.len() + i;
            let cases: Vec<(f64, f64, usize, bool)> =
                per_trial.iter().filter_map(|t| t[idx]).collect();
            let count = cases.len();
            out.push(record(cfg, *db, &param, "indefinite_count", exact(count as f64, cfg.trials)));
            if count == 0 {
                continue;
            }
            let finals: Vec<f64> = cases.iter().map(|c| c.0).collect();
            let inits: Vec<f64> = cases.iter().map(|c| c.1).collect();
            let iters: Vec<f64> = cases.iter().map(|c| c.2 as f64).collect();
            let converged = cases.iter().filter(|c| c.3).count();
            let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            out.push(record(cfg, *db, &param, "ratio_final", Summary::of(&finals)));
            out.push(record(cfg, *db, &param, "ratio_final_min", exact(min(&finals), count)));
            out.push(record(cfg, *db, &param, "ratio_init", Summary::of(&inits)));
            out.push(record(cfg, *db, &param, "ratio_init_min", exact(min(&inits), count)));
            out.push(record(cfg, *db, &param, "converged_fraction", Summary::proportion(converged, count)));
            out.push(record(cfg, *db, &param, "iterations_mean", Summary::of(&iters)));
            out.push(record(cfg, *db, &param, "iterations_max", exact(max(&iters), count)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SnrGrid;

    fn find<'a>(recs: &'a [SweepRecord], snr: f64, stat: &str) -> &'a SweepRecord {
        recs.iter()
            .find(|r| r.snr_db == snr && r.statistic == stat)
            .unwrap_or_else(|| panic!("missing {stat} at {snr}"))
    }

    #[test]
    fn ergodic_direct_and_shortcut_agree() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
        cfg.snr = SnrGrid::parse("10").unwrap();
        cfg.trials = 1000;
        let recs = ergodic_gmi(&cfg).unwrap();
        let d = find(&recs, 10.0, "rate_direct");
        let s = find(&recs, 10.0, "rate_shortcut");
        let se = (d.stderr.powi(2) + s.stderr.powi(2)).sqrt();
        assert!((d.value - s.value).abs() < 3.0 * se, "{} vs {} (se {se})", d.value, s.value);
    }

    #[test]
    fn ergodic_full_memory_is_full_rate() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
        cfg.k = 5;
        cfg.snr = SnrGrid::parse("0:10:20").unwrap();
        cfg.trials = 50;
        let recs = ergodic_gmi(&cfg).unwrap();
        for db in [0.0, 10.0, 20.0] {
            let d = find(&recs, db, "rate_direct").value;
            let f = find(&recs, db, "rate_full").value;
            assert!((d - f).abs() < 1e-9);
        }
    }

    #[test]
    fn single_trial_is_reproducible() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
        cfg.trials = 1;
        cfg.snr = SnrGrid::parse("5").unwrap();
        let a = ergodic_gmi(&cfg).unwrap();
        assert_eq!(a, ergodic_gmi(&cfg).unwrap());
        assert_eq!(find(&a, 5.0, "rate_direct").stderr, 0.0);
    }

    #[test]
    fn indefinite_rejects_zero_trials() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Indefinite);
        cfg.trials = 0;
        assert!(matches!(indefinite_probability(&cfg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn flat_isi_channel_has_no_loss() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Isi);
        cfg.beta = 1.0;
        cfg.taps = 1;
        cfg.n_t = 16;
        cfg.snr = SnrGrid::parse("-10:10:40").unwrap();
        let recs = isi_curve(&cfg).unwrap();
        for db in cfg.snr.points() {
            let b = find(&recs, db, "rate_banded").value;
            let f = find(&recs, db, "rate_full").value;
            assert!((b - f).abs() < 1e-6);
        }
    }

    #[test]
    fn block_shortcut_terms_cover_the_rate() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Ergodic);
        cfg.blocks = Some(crate::shortening::BlockSpec::new(vec![3, 3]).unwrap());
        cfg.snr = SnrGrid::parse("10").unwrap();
        cfg.trials = 800;
        let recs = ergodic_gmi(&cfg).unwrap();
        let d = find(&recs, 10.0, "rate_direct");
        let s = find(&recs, 10.0, "rate_shortcut");
        let se = (d.stderr.powi(2) + s.stderr.powi(2)).sqrt();
        assert!((d.value - s.value).abs() < 3.0 * se);
    }
}
