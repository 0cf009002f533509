//! Randomized experiment sweeps.
//!
//! For each packet count a batch of random instances is drawn; every trial
//! gets its own seed derived from the master seed, `n` and the trial index,
//! so the output does not depend on how trials are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{lower_bound, upper_bound_leader};
use crate::error::{usage, Error, Result};
use crate::field::FieldSpec;
use crate::instance::Instance;
use crate::schemes::{
    random_average_exact, random_average_mc, run_ie, verify_schedule, EXACT_ENUMERATION_CAP,
};

/// Quantities an experiment can report per packet count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    Lower,
    Ie,
    UpperLeader,
    Trivial,
    RandomExact,
    RandomMc,
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lower" => Curve::Lower,
            "ie" => Curve::Ie,
            "upper_leader" => Curve::UpperLeader,
            "trivial" => Curve::Trivial,
            "random_exact" => Curve::RandomExact,
            "random_mc" => Curve::RandomMc,
            other => return Err(usage(format!("unknown curve {other:?}"))),
        })
    }
}

/// How the coding field is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPolicy {
    /// Smallest prime at least `k`.
    Auto,
    Fixed(u32),
}

impl FieldPolicy {
    pub fn resolve(&self, k: usize) -> Result<FieldSpec> {
        match *self {
            FieldPolicy::Auto => Ok(FieldSpec::at_least(k)),
            FieldPolicy::Fixed(q) => {
                let f = FieldSpec::new(q)?;
                if f.order() < k {
                    return Err(Error::FieldTooSmall { q, required: k });
                }
                Ok(f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub k: usize,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub density: f64,
    pub seed: u64,
    pub field: FieldPolicy,
    pub curves: Vec<Curve>,
    pub mc_samples: usize,
    /// Broadcast unique packets first and add their count to every curve.
    pub normalize: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: 3,
            n_values: vec![10, 20, 30, 40, 50],
            trials: 100,
            density: 0.5,
            seed: 0,
            field: FieldPolicy::Auto,
            curves: vec![Curve::Lower, Curve::Ie, Curve::UpperLeader, Curve::Trivial],
            mc_samples: 2000,
            normalize: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(usage("k must be at least 1"));
        }
        if self.trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(usage("n values must be a non-empty list of positive integers"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(usage(format!("density {} outside (0, 1]", self.density)));
        }
        if self.has(Curve::RandomMc) && self.mc_samples < 2 {
            return Err(usage("mc_samples must be at least 2"));
        }
        if self.has(Curve::RandomExact) && self.k > EXACT_ENUMERATION_CAP {
            return Err(Error::Capacity(format!(
                "random_exact needs k <= {EXACT_ENUMERATION_CAP}; use random_mc"
            )));
        }
        self.field.resolve(self.k)?;
        Ok(())
    }

    pub fn has(&self, curve: Curve) -> bool {
        self.curves.contains(&curve)
    }

    fn random_curve(&self) -> Option<Curve> {
        if self.has(Curve::RandomExact) {
            Some(Curve::RandomExact)
        } else if self.has(Curve::RandomMc) {
            Some(Curve::RandomMc)
        } else {
            None
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for one trial, independent of execution order.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ trial as u64)
}

/// Per-trial measurements, unique-packet broadcasts included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub unique: usize,
    pub lower: usize,
    pub ie: usize,
    pub upper_leader: usize,
    pub trivial: usize,
    pub random: Option<f64>,
}

pub fn run_trial(config: &ExperimentConfig, n: usize, trial: usize) -> Result<TrialOutcome> {
    let seed = trial_seed(config.seed, n, trial);
    let field = config.field.resolve(config.k)?;
    let inst = Instance::random(n, config.k, config.density, seed)?;
    let (unique, work) = if config.normalize {
        let norm = inst.normalize_unique();
        (norm.unique_count, norm.reduced)
    } else {
        (0, inst.clone())
    };

    let (schedule, _) = run_ie(&work, field)?;
    let report = verify_schedule(&work, &schedule)?;
    if !report.ok() {
        return Err(Error::Invariant(format!(
            "greedy schedule failed replay on {}",
            inst.to_json()
        )));
    }
    let random = match config.random_curve() {
        Some(Curve::RandomExact) => {
            let r = random_average_exact(&work)?;
            Some(*r.numer() as f64 / *r.denom() as f64)
        }
        Some(_) => Some(random_average_mc(&work, config.mc_samples, seed)?.mean),
        None => None,
    };
    let out = TrialOutcome {
        seed,
        unique,
        lower: unique + lower_bound(&work),
        ie: unique + schedule.total(),
        upper_leader: unique + upper_bound_leader(&work).0,
        trivial: n,
        random: random.map(|r| r + unique as f64),
    };
    if !(out.lower <= out.ie && out.ie <= out.upper_leader.min(out.trivial)) {
        return Err(Error::Invariant(format!(
            "expected lower <= ie <= min(upper_leader, n), got {} / {} / {} / {} on {}",
            out.lower,
            out.ie,
            out.upper_leader,
            out.trivial,
            inst.to_json()
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let count = values.clone().count() as f64;
        let mean = values.clone().sum::<f64>() / count;
        let sd = if count > 1.0 {
            (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub u_mean: f64,
    pub lower: Option<Summary>,
    pub ie: Option<Summary>,
    pub upper_leader: Option<Summary>,
    pub trivial: Option<usize>,
    pub random: Option<Summary>,
    /// Mean of `ie - lower` over the trials.
    pub ie_gap_mean: f64,
    /// Mean of `upper_leader - lower` over the trials.
    pub leader_gap_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub field_q: u32,
    pub rows: Vec<ExperimentRow>,
    pub notes: Vec<String>,
}

pub const CSV_HEADER: [&str; 13] = [
    "n",
    "k",
    "trials",
    "u_mean",
    "lower_mean",
    "lower_sd",
    "ie_mean",
    "ie_sd",
    "upper_leader_mean",
    "upper_leader_sd",
    "trivial",
    "random_mean",
    "random_sd",
];

/// Runs the sweep. Trials run in parallel; aggregation is in trial order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let field = config.field.resolve(config.k)?;
    let mut rows = Vec::with_capacity(config.n_values.len());
    for &n in &config.n_values {
        let outcomes: Vec<TrialOutcome> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, n, t))
            .collect::<Result<_>>()?;
        let pick = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f);
        let gated = |c: Curve, s: Summary| config.has(c).then_some(s);
        rows.push(ExperimentRow {
            n,
            k: config.k,
            trials: config.trials,
            u_mean: Summary::of(pick(|o| o.unique as f64)).mean,
            lower: gated(Curve::Lower, Summary::of(pick(|o| o.lower as f64))),
            ie: gated(Curve::Ie, Summary::of(pick(|o| o.ie as f64))),
            upper_leader: gated(Curve::UpperLeader, Summary::of(pick(|o| o.upper_leader as f64))),
            trivial: config.has(Curve::Trivial).then_some(n),
            random: config
                .random_curve()
                .map(|_| Summary::of(pick(|o| o.random.unwrap_or(0.0)))),
            ie_gap_mean: Summary::of(pick(|o| (o.ie - o.lower) as f64)).mean,
            leader_gap_mean: Summary::of(pick(|o| (o.upper_leader - o.lower) as f64)).mean,
        });
    }
    Ok(ExperimentReport {
        config: config.clone(),
        field_q: field.q(),
        rows,
        notes: vec![
            format!(
                "instances: independent Bernoulli({}) membership per (client, packet); \
                 packets held by nobody are given to one uniformly chosen client",
                config.density
            ),
            format!("n values: {:?}", config.n_values),
            if config.normalize {
                "unique packets broadcast uncoded first; their count is included in every curve"
                    .to_string()
            } else {
                "schemes run on the raw instance".to_string()
            },
        ],
    })
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        let fmt = |x: f64| format!("{x:.4}");
        let pair = |s: Option<Summary>| match s {
            Some(s) => [fmt(s.mean), fmt(s.sd)],
            None => [String::new(), String::new()],
        };
        for r in &self.rows {
            let [lm, ls] = pair(r.lower);
            let [im, is] = pair(r.ie);
            let [um, us] = pair(r.upper_leader);
            let [rm, rs] = pair(r.random);
            w.write_record([
                r.n.to_string(),
                r.k.to_string(),
                r.trials.to_string(),
                fmt(r.u_mean),
                lm,
                ls,
                im,
                is,
                um,
                us,
                r.trivial.map(|t| t.to_string()).unwrap_or_default(),
                rm,
                rs,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Config, field and notes as JSON, for a sidecar next to the CSV.
    pub fn metadata_json(&self) -> String {
        #[derive(Serialize)]
        struct Meta<'a> {
            version: &'static str,
            config: &'a ExperimentConfig,
            field_q: u32,
            notes: &'a [String],
            mean_ie_gap: f64,
            mean_leader_gap: f64,
        }
        serde_json::to_string_pretty(&Meta {
            version: env!("CARGO_PKG_VERSION"),
            config: &self.config,
            field_q: self.field_q,
            notes: &self.notes,
            mean_ie_gap: self.mean_ie_gap(),
            mean_leader_gap: self.mean_leader_gap(),
        })
        .expect("metadata serializes")
    }

    /// Mean `ie - lower` over every trial of the sweep.
    pub fn mean_ie_gap(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.ie_gap_mean))
    }

    pub fn mean_leader_gap(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.leader_gap_mean))
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}
