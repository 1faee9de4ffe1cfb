//! JSR sweeps over jammer models and RIS sizes, aggregated into CSV rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::config::ExperimentConfig;
use super::trial::{run_trial, Prepared, TrialResult};
use crate::error::Result;
use crate::jammer::{JammerModel, PathTopology};
use crate::receiver::JammerClass;

pub const CSV_HEADER: &str = "jsr_db,jammer,topology,ris_size,t_baseline,t_jammed,gain,detect_rate,classify_rate,tau_err,modulation,code_rate,payload_fraction,stderr_gain";

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial. Only the RIS size and trial index enter, so every
/// JSR point, jammer model and topology replays the same channel draws
/// and curves are compared on common random numbers.
pub fn derive_seed(master: u64, ris_idx: usize, trial: usize) -> u64 {
    [ris_idx as u64, trial as u64]
        .into_iter()
        .fold(mix(master), |acc, v| mix(acc ^ v.wrapping_mul(0x2545_f491_4f6c_dd1d)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub jsr_db: f64,
    pub jammer: JammerModel,
    pub topology: PathTopology,
    pub ris_size: usize,
    pub t_baseline: f64,
    pub t_jammed: f64,
    pub gain: f64,
    pub detect_rate: f64,
    pub classify_rate: f64,
    pub tau_err: f64,
    pub modulation: String,
    pub code_rate: f64,
    pub payload_fraction: f64,
    pub stderr_gain: f64,
}

impl SweepRow {
    fn csv(&self) -> String {
        format!(
            "{:.2},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6}",
            self.jsr_db,
            self.jammer.as_str(),
            self.topology.as_str(),
            self.ris_size,
            self.t_baseline,
            self.t_jammed,
            self.gain,
            self.detect_rate,
            self.classify_rate,
            self.tau_err,
            self.modulation,
            self.code_rate,
            self.payload_fraction,
            self.stderr_gain
        )
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Ratio-of-means gain with its delta-method standard error.
pub fn ratio_with_stderr(num: &[f64], den: &[f64]) -> (f64, f64) {
    let n = num.len().min(den.len());
    let xbar = mean(den.iter().copied().take(n));
    if n == 0 || xbar == 0.0 {
        return (0.0, 0.0);
    }
    let r = mean(num.iter().copied().take(n)) / xbar;
    if n < 2 {
        return (r, 0.0);
    }
    let ss: f64 = num.iter().zip(den).map(|(y, x)| (y - r * x).powi(2)).sum();
    (r, (ss / (n * (n - 1)) as f64).sqrt() / xbar)
}

fn aggregate(cfg: &ExperimentConfig, jsr_db: f64, jammer: JammerModel, ris_size: usize, trials: &[TrialResult]) -> SweepRow {
    let tl: Vec<f64> = trials.iter().map(|t| t.t_baseline).collect();
    let tj: Vec<f64> = trials.iter().map(|t| t.t_jammed).collect();
    let (gain, stderr_gain) = ratio_with_stderr(&tj, &tl);
    let detected: Vec<&TrialResult> = trials.iter().filter(|t| t.detected).collect();
    let n = trials.len().max(1) as f64;
    let nd = detected.len();
    let (classify_rate, tau_err) = if nd == 0 {
        (0.0, 0.0)
    } else {
        let want = match jammer {
            JammerModel::Drfm => JammerClass::Drfm,
            JammerModel::Ps => JammerClass::Ps,
            JammerModel::As => JammerClass::As,
        };
        (
            detected.iter().filter(|t| t.class == Some(want)).count() as f64 / nd as f64,
            mean(detected.iter().map(|t| t.tau_hat.map_or(0.0, |h| (h - t.tau_true).abs() as f64))),
        )
    };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for t in trials {
        *counts.entry(t.scheme.to_string()).or_default() += 1;
    }
    // ties go to the alphabetically first label so output is stable
    let modulation = counts
        .iter()
        .fold((String::new(), 0), |best, (k, &c)| if c > best.1 { (k.clone(), c) } else { best })
        .0;
    SweepRow {
        jsr_db,
        jammer,
        topology: cfg.experiment.topology,
        ris_size,
        t_baseline: mean(tl.iter().copied()),
        t_jammed: mean(tj.iter().copied()),
        gain,
        detect_rate: nd as f64 / n,
        classify_rate,
        tau_err,
        modulation,
        code_rate: mean(trials.iter().map(|t| t.code_rate)),
        payload_fraction: mean(trials.iter().map(|t| t.payload_fraction)),
        stderr_gain,
    }
}

/// Runs every (jammer, RIS size, JSR) cell with the configured trial count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with_jobs(cfg, None)
}

/// As [`run_sweep`] with an explicit worker count. Output does not depend
/// on `jobs`.
pub fn run_sweep_with_jobs(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Vec<SweepRow>> {
    let prep = Prepared::new(cfg)?;
    let mut jammers = cfg.experiment.jammer_models.clone();
    jammers.sort();
    jammers.dedup();
    let mut ris: Vec<(usize, usize)> = cfg.experiment.ris_sizes.iter().copied().enumerate().collect();
    ris.sort_by_key(|&(_, m)| m);
    let mut jsr = cfg.experiment.jsr_grid_db.clone();
    jsr.sort_by(f64::total_cmp);

    let mut cells = Vec::new();
    for &j in &jammers {
        for &(ri, m) in &ris {
            for &db in &jsr {
                cells.push((j, ri, m, db));
            }
        }
    }
    let trials = cfg.experiment.trials;
    let run_cell = |&(j, ri, m, db): &(JammerModel, usize, usize, f64)| -> Result<SweepRow> {
        let results = (0..trials)
            .map(|t| run_trial(&prep, db, j, ri, derive_seed(cfg.experiment.seed, ri, t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(aggregate(cfg, db, j, m, &results))
    };
    execute(&cells, run_cell, jobs)
}

#[cfg(feature = "parallel")]
fn execute<T: Sync, F>(cells: &[T], f: F, jobs: Option<usize>) -> Result<Vec<SweepRow>>
where
    F: Fn(&T) -> Result<SweepRow> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| crate::Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| cells.par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<T, F>(cells: &[T], f: F, _jobs: Option<usize>) -> Result<Vec<SweepRow>>
where
    F: Fn(&T) -> Result<SweepRow>,
{
    cells.iter().map(f).collect()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Where the gain curve of one (jammer, RIS size) series first exceeds one.
#[derive(Debug, Clone, PartialEq)]
pub struct Crossover {
    pub jammer: JammerModel,
    pub ris_size: usize,
    /// First JSR with `gain > 1`.
    pub first: Option<f64>,
    /// First JSR with `gain − 2·stderr > 1`.
    pub significant: Option<f64>,
    pub max_gain: f64,
}

pub fn crossovers(rows: &[SweepRow]) -> Vec<Crossover> {
    let mut series: BTreeMap<(JammerModel, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        series.entry((r.jammer, r.ris_size)).or_default().push(r);
    }
    series
        .into_iter()
        .map(|((jammer, ris_size), mut v)| {
            v.sort_by(|a, b| a.jsr_db.total_cmp(&b.jsr_db));
            Crossover {
                jammer,
                ris_size,
                first: v.iter().find(|r| r.gain > 1.0).map(|r| r.jsr_db),
                significant: v.iter().find(|r| r.gain - 2.0 * r.stderr_gain > 1.0).map(|r| r.jsr_db),
                max_gain: v.iter().map(|r| r.gain).fold(0.0, f64::max),
            }
        })
        .collect()
}

pub fn summary(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let mut best = 0.0f64;
    for c in crossovers(rows) {
        best = best.max(c.max_gain);
        let _ = write!(out, "{} M={}: ", c.jammer.as_str(), c.ris_size);
        match (c.first, c.significant) {
            (None, _) => {
                let _ = writeln!(out, "no antifragile region (max gain {:.3})", c.max_gain);
            }
            (Some(f), s) => {
                let sig = s.map_or("none".to_string(), |s| format!("{s:.2} dB"));
                let _ = writeln!(out, "crossover {f:.2} dB (significant {sig}), max gain {:.3}", c.max_gain);
            }
        }
    }
    let _ = writeln!(out, "max gain overall {best:.3}");
    out
}
