//! Random-ordering scheme.
//!
//! Clients take turns in a given order. On its turn a client sends, coded,
//! the packets it holds that no earlier client held, as many times as the
//! neediest other client requires.

use itertools::Itertools;
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{initial_spaces, require_field, Schedule, SchemeKind};
use crate::error::{usage, Error, Result};
use crate::field::FieldSpec;
use crate::instance::Instance;
use crate::linalg::{find_avoiding_vector, Subspace};

/// Largest client count for which all `k!` orderings are enumerated.
pub const EXACT_ENUMERATION_CAP: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RandomOrderResult {
    /// 0-based clients in turn order.
    pub ordering: Vec<usize>,
    pub per_step: Vec<usize>,
    pub total: usize,
}

/// Sample mean of the transmission count over random orderings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub min: usize,
    pub max: usize,
}

fn check_permutation(inst: &Instance, ordering: &[usize]) -> Result<()> {
    let k = inst.k();
    let mut seen = vec![false; k];
    for &c in ordering {
        if c >= k || std::mem::replace(&mut seen[c], true) {
            return Err(usage(format!(
                "ordering {:?} is not a permutation of 1..={k}",
                ordering.iter().map(|c| c + 1).collect::<Vec<_>>()
            )));
        }
    }
    if ordering.len() != k {
        return Err(usage(format!("ordering has {} clients, expected {k}", ordering.len())));
    }
    Ok(())
}

/// Membership table `holds[c][p]` used by the counting routines.
struct Table {
    n: usize,
    holds: Vec<Vec<bool>>,
}

impl Table {
    fn new(inst: &Instance) -> Self {
        let n = inst.n();
        let holds = inst
            .holdings()
            .iter()
            .map(|h| (0..n).map(|p| h.contains(&p)).collect())
            .collect();
        Self { n, holds }
    }

    fn per_step(&self, ordering: &[usize]) -> Vec<usize> {
        let mut prefix = vec![false; self.n];
        let mut steps = Vec::with_capacity(ordering.len());
        for &c in ordering {
            let fresh: Vec<usize> = (0..self.n)
                .filter(|&p| self.holds[c][p] && !prefix[p])
                .collect();
            let need = (0..self.holds.len())
                .filter(|&i| i != c)
                .map(|i| fresh.iter().filter(|&&p| !self.holds[i][p]).count())
                .max()
                .unwrap_or(0);
            steps.push(need);
            for p in fresh {
                prefix[p] = true;
            }
        }
        steps
    }

    fn total(&self, ordering: &[usize]) -> usize {
        self.per_step(ordering).iter().sum()
    }
}

/// Transmission count for one client ordering (0-based clients).
pub fn random_tau(inst: &Instance, ordering: &[usize]) -> Result<RandomOrderResult> {
    check_permutation(inst, ordering)?;
    let per_step = Table::new(inst).per_step(ordering);
    Ok(RandomOrderResult {
        ordering: ordering.to_vec(),
        total: per_step.iter().sum(),
        per_step,
    })
}

/// Exact mean transmission count over all `k!` orderings.
pub fn random_average_exact(inst: &Instance) -> Result<Ratio<u64>> {
    let k = inst.k();
    if k > EXACT_ENUMERATION_CAP {
        return Err(Error::Capacity(format!(
            "exact average enumerates {k}! orderings (cap {EXACT_ENUMERATION_CAP}); use sampling"
        )));
    }
    let table = Table::new(inst);
    let (sum, count) = (0..k)
        .permutations(k)
        .fold((0u64, 0u64), |(s, c), perm| (s + table.total(&perm) as u64, c + 1));
    Ok(Ratio::new(sum, count))
}

/// Monte Carlo estimate of the mean over uniformly drawn orderings.
pub fn random_average_mc(inst: &Instance, samples: usize, seed: u64) -> Result<McEstimate> {
    if samples < 2 {
        return Err(usage("sampling needs at least 2 samples"));
    }
    let table = Table::new(inst);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ordering: Vec<usize> = (0..inst.k()).collect();
    let draws: Vec<usize> = (0..samples)
        .map(|_| {
            ordering.shuffle(&mut rng);
            table.total(&ordering)
        })
        .collect();
    let m = samples as f64;
    let mean = draws.iter().map(|&t| t as f64).sum::<f64>() / m;
    let var = draws.iter().map(|&t| (t as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(McEstimate {
        mean,
        stderr: (var / m).sqrt(),
        samples,
        min: draws.iter().copied().min().unwrap_or(0),
        max: draws.iter().copied().max().unwrap_or(0),
    })
}

/// Coded schedule realizing [`random_tau`] for the same ordering.
pub fn random_schedule(inst: &Instance, ordering: &[usize], field: FieldSpec) -> Result<Schedule> {
    check_permutation(inst, ordering)?;
    require_field(inst, field)?;
    let n = inst.n();
    let mut spaces = initial_spaces(inst, field);
    let mut prefix = vec![false; n];
    let mut schedule = Schedule::new(SchemeKind::Random, field);
    for &c in ordering {
        let fresh: Vec<usize> = inst
            .holding(c)
            .iter()
            .copied()
            .filter(|&p| !prefix[p])
            .collect();
        let source = Subspace::coordinate(field, n, fresh.iter().copied())?;
        loop {
            let mut lacking: Vec<&Subspace> = Vec::new();
            for s in &spaces {
                if !source.is_subspace_of(s)? {
                    lacking.push(s);
                }
            }
            if lacking.is_empty() {
                break;
            }
            let b = find_avoiding_vector(&source, &lacking)?;
            for s in spaces.iter_mut() {
                s.insert_mut(&b)?;
            }
            schedule.push(c, b);
        }
        for p in fresh {
            prefix[p] = true;
        }
    }
    Ok(schedule)
}
