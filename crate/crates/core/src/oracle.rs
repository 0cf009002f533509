//! Exact optimum by exhaustive search over structured coding matrices.
//!
//! A set of broadcasts is a matrix whose rows are coding vectors; a row sent
//! by client `i` may only use packets `i` holds. The broadcasts satisfy
//! everybody iff, for each client, those rows together with the client's own
//! unit vectors span the whole space. The optimum is the least rank of such a
//! matrix, found here by iterative deepening on the number of rows.
//!
//! Only rows that grow the span are explored: a feasible matrix of rank `r`
//! contains `r` independent rows that are already feasible, so searching
//! `t = lower, lower + 1, ...` over independent rows finds the least rank.

use serde::{Deserialize, Serialize};

use crate::bounds::{lower_bound, upper_bound_leader};
use crate::error::{usage, Error, Result};
use crate::field::FieldSpec;
use crate::instance::Instance;
use crate::linalg::{CodingVector, Subspace};
use crate::schemes::{initial_spaces, Schedule, SchemeKind};

/// Default cap on search nodes (partial matrices visited).
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Support-constrained rows; `sender` is 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingMatrix {
    pub field: FieldSpec,
    pub rows: Vec<(usize, CodingVector)>,
}

impl CodingMatrix {
    pub fn new(field: FieldSpec) -> Self {
        Self {
            field,
            rows: Vec::new(),
        }
    }

    /// Broadcast schedule sending the rows in order.
    pub fn to_schedule(&self) -> Schedule {
        let mut s = Schedule::new(SchemeKind::Oracle, self.field);
        for (sender, v) in &self.rows {
            s.push(*sender, v.clone());
        }
        s
    }

    fn check_support(&self, inst: &Instance) -> Result<()> {
        let mut per_sender = vec![0usize; inst.k()];
        for (r, (sender, v)) in self.rows.iter().enumerate() {
            if *sender >= inst.k() {
                return Err(usage(format!("row {r}: sender {} out of range", sender + 1)));
            }
            if v.len() != inst.n() {
                return Err(usage(format!("row {r}: length {} != n = {}", v.len(), inst.n())));
            }
            if let Some(p) = (0..inst.n()).find(|&p| v.0[p] != 0 && !inst.holds(*sender, p)) {
                return Err(usage(format!(
                    "row {r}: client {} does not hold packet {}",
                    sender + 1,
                    p + 1
                )));
            }
            per_sender[*sender] += 1;
            if per_sender[*sender] > inst.holding(*sender).len() {
                return Err(usage(format!(
                    "client {} has more rows than packets",
                    sender + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub tau_star: usize,
    pub witness: CodingMatrix,
    pub nodes_explored: u64,
}

#[derive(Serialize, Deserialize)]
struct WitnessRow {
    round: usize,
    sender: usize,
    vector: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct OracleDoc {
    tau_star: usize,
    field_q: u32,
    witness: Vec<WitnessRow>,
    nodes: u64,
}

impl OracleResult {
    pub fn to_json(&self) -> String {
        let doc = OracleDoc {
            tau_star: self.tau_star,
            field_q: self.witness.field.q(),
            witness: self
                .witness
                .rows
                .iter()
                .enumerate()
                .map(|(i, (s, v))| WitnessRow {
                    round: i + 1,
                    sender: s + 1,
                    vector: v.0.clone(),
                })
                .collect(),
            nodes: self.nodes_explored,
        };
        serde_json::to_string_pretty(&doc).expect("oracle result serializes")
    }
}

/// Whether the rows of `a` let every client decode.
pub fn feasible(a: &CodingMatrix, inst: &Instance) -> Result<bool> {
    a.check_support(inst)?;
    for space in initial_spaces(inst, a.field) {
        let mut space = space;
        for (_, v) in &a.rows {
            space.insert_mut(v)?;
        }
        if !space.is_full() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Number of normalized nonzero vectors on `m` coordinates, if it fits.
fn normalized_count(q: u32, m: usize) -> Option<u64> {
    let total = (q as u64).checked_pow(u32::try_from(m).ok()?)?;
    Some((total - 1) / (q as u64 - 1))
}

/// Nonzero vectors supported on `support` whose first nonzero entry is 1.
fn normalized_vectors(field: FieldSpec, n: usize, support: &[usize]) -> Vec<CodingVector> {
    let q = field.q();
    let mut out = Vec::new();
    for lead in 0..support.len() {
        let tail = &support[lead + 1..];
        let mut digits = vec![0u32; tail.len()];
        loop {
            let mut v = vec![0u32; n];
            v[support[lead]] = 1;
            for (&d, &p) in digits.iter().zip(tail) {
                v[p] = d;
            }
            out.push(CodingVector(v));
            // odometer over the trailing coordinates
            let Some(i) = digits.iter().rposition(|&d| d + 1 < q) else {
                break;
            };
            digits[i] += 1;
            digits[i + 1..].iter_mut().for_each(|d| *d = 0);
        }
    }
    out
}

struct Search<'a> {
    inst: &'a Instance,
    field: FieldSpec,
    candidates: Vec<Vec<CodingVector>>,
    budget: u64,
    nodes: u64,
}

struct OutOfBudget;

impl Search<'_> {
    /// Sender multisets of size `t` as per-client counts, capped at `n_i`.
    fn multisets(&self, t: usize) -> Vec<Vec<usize>> {
        fn rec(caps: &[usize], left: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            let at = acc.len();
            if at == caps.len() {
                if left == 0 {
                    out.push(acc.clone());
                }
                return;
            }
            let rest: usize = caps[at + 1..].iter().sum();
            for c in 0..=caps[at].min(left) {
                if left - c <= rest {
                    acc.push(c);
                    rec(caps, left - c, acc, out);
                    acc.pop();
                }
            }
        }
        let caps: Vec<usize> = self.inst.holdings().iter().map(|h| h.len()).collect();
        let mut out = Vec::new();
        rec(&caps, t, &mut Vec::new(), &mut out);
        out
    }

    /// Necessary conditions on a sender multiset: each client hears enough
    /// rows from others, and every packet it lacks is held by some sender.
    fn plausible(&self, counts: &[usize]) -> bool {
        let inst = self.inst;
        (0..inst.k()).all(|i| {
            let from_others: usize = counts
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &c)| c)
                .sum();
            from_others + inst.holding(i).len() >= inst.n()
                && inst.complement(i).iter().all(|&p| {
                    counts
                        .iter()
                        .enumerate()
                        .any(|(j, &c)| j != i && c > 0 && inst.holds(j, p))
                })
        })
    }

    fn run_multiset(
        &mut self,
        counts: &[usize],
    ) -> Result<Option<Vec<(usize, CodingVector)>>, OutOfBudget> {
        let k = self.inst.k();
        let senders: Vec<usize> = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &m)| std::iter::repeat_n(c, m))
            .collect();
        // rows at positions >= r whose sender is not client i
        let mut others_after = vec![vec![0usize; k]; senders.len() + 1];
        for r in (0..senders.len()).rev() {
            let (head, tail) = others_after.split_at_mut(r + 1);
            for (i, slot) in head[r].iter_mut().enumerate() {
                *slot = tail[0][i] + usize::from(senders[r] != i);
            }
        }
        let spaces = initial_spaces(self.inst, self.field);
        let global = Subspace::zero(self.field, self.inst.n());
        let mut rows = Vec::with_capacity(senders.len());
        let found = self.dfs(&senders, &others_after, 0, 0, &spaces, &global, &mut rows)?;
        Ok(found.then_some(rows))
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        senders: &[usize],
        others_after: &[Vec<usize>],
        r: usize,
        min_idx: usize,
        spaces: &[Subspace],
        global: &Subspace,
        rows: &mut Vec<(usize, CodingVector)>,
    ) -> Result<bool, OutOfBudget> {
        let n = self.inst.n();
        if r == senders.len() {
            return Ok(global.dim() + self.inst.n_min() >= n && spaces.iter().all(Subspace::is_full));
        }
        let sender = senders[r];
        // rows of one sender are interchangeable: keep their indices increasing
        let start = if r > 0 && senders[r - 1] == sender { min_idx } else { 0 };
        for idx in start..self.candidates[sender].len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OutOfBudget);
            }
            let v = &self.candidates[sender][idx];
            let mut next_global = global.clone();
            if !next_global.insert_mut(v).expect("dimensions agree") {
                continue;
            }
            let mut next_spaces = Vec::with_capacity(spaces.len());
            for (i, s) in spaces.iter().enumerate() {
                let mut t = s.clone();
                t.insert_mut(v).expect("dimensions agree");
                if t.dim() + others_after[r + 1][i] < n {
                    break;
                }
                next_spaces.push(t);
            }
            if next_spaces.len() < spaces.len() {
                continue;
            }
            rows.push((sender, v.clone()));
            if self.dfs(senders, others_after, r + 1, idx + 1, &next_spaces, &next_global, rows)? {
                return Ok(true);
            }
            rows.pop();
        }
        Ok(false)
    }
}

/// Least number of broadcasts over `field`, with a witness matrix.
///
/// Fails with [`Error::BudgetExceeded`] once more than `budget` partial
/// matrices have been visited, reporting the tightest bracket known so far.
pub fn optimal_tau(inst: &Instance, field: FieldSpec, budget: u64) -> Result<OracleResult> {
    let n = inst.n();
    let lower = lower_bound(inst);
    let upper = if field.order() >= inst.k() {
        upper_bound_leader(inst).0.min(n)
    } else {
        n
    };
    let exhausted = |t: usize| Error::BudgetExceeded {
        budget,
        lower: t.max(lower),
        upper,
    };

    for h in inst.holdings() {
        match normalized_count(field.q(), h.len()) {
            Some(c) if c <= budget => {}
            _ => return Err(exhausted(lower)),
        }
    }
    let candidates = inst
        .holdings()
        .iter()
        .map(|h| normalized_vectors(field, n, &h.iter().copied().collect::<Vec<_>>()))
        .collect();
    let mut search = Search {
        inst,
        field,
        candidates,
        budget,
        nodes: 0,
    };

    for t in lower..=n {
        for counts in search.multisets(t) {
            if !search.plausible(&counts) {
                continue;
            }
            match search.run_multiset(&counts) {
                Ok(Some(rows)) => {
                    return Ok(OracleResult {
                        tau_star: t,
                        witness: CodingMatrix { field, rows },
                        nodes_explored: search.nodes,
                    })
                }
                Ok(None) => {}
                Err(OutOfBudget) => return Err(exhausted(t)),
            }
        }
    }
    Err(Error::Infeasible(
        "no feasible coding matrix with at most n rows".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::verify_schedule;

    fn gf(q: u32) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn fig1() -> Instance {
        Instance::from_one_based(4, &[&[1], &[2, 4], &[2, 3], &[1, 3]]).unwrap()
    }

    fn complements() -> Instance {
        Instance::from_one_based(3, &[&[2, 3], &[1, 3], &[1, 2]]).unwrap()
    }

    fn four_client() -> Instance {
        Instance::from_one_based(4, &[&[2, 3, 4], &[1, 4], &[1, 2, 4], &[1, 3]]).unwrap()
    }

    fn cv(v: &[u32]) -> CodingVector {
        CodingVector(v.to_vec())
    }

    #[test]
    fn normalized_vector_enumeration() {
        let f = gf(3);
        let vs = normalized_vectors(f, 3, &[0, 2]);
        assert_eq!(vs, vec![cv(&[1, 0, 0]), cv(&[1, 0, 1]), cv(&[1, 0, 2]), cv(&[0, 0, 1])]);
        assert_eq!(normalized_count(3, 2), Some(4));
        assert_eq!(normalized_vectors(gf(2), 4, &[0, 1, 2, 3]).len(), 15);
        assert!(normalized_vectors(f, 2, &[]).is_empty());
    }

    #[test]
    fn feasibility_of_reference_scheme() {
        let a = CodingMatrix {
            field: gf(2),
            rows: vec![
                (1, cv(&[0, 1, 0, 1])),
                (2, cv(&[0, 1, 1, 0])),
                (3, cv(&[1, 0, 1, 0])),
            ],
        };
        assert!(feasible(&a, &fig1()).unwrap());
        assert!(!feasible(&CodingMatrix::new(gf(2)), &fig1()).unwrap());
        let all = Instance::from_one_based(2, &[&[1, 2], &[1, 2]]).unwrap();
        assert!(feasible(&CodingMatrix::new(gf(2)), &all).unwrap());
    }

    #[test]
    fn support_violations_rejected() {
        let bad = CodingMatrix {
            field: gf(2),
            rows: vec![(0, cv(&[0, 1, 0, 0]))],
        };
        assert!(matches!(feasible(&bad, &fig1()), Err(Error::Usage(_))));
        let too_many = CodingMatrix {
            field: gf(2),
            rows: vec![(0, cv(&[1, 0, 0, 0])), (0, cv(&[1, 0, 0, 0]))],
        };
        assert!(matches!(feasible(&too_many, &fig1()), Err(Error::Usage(_))));
    }

    #[test]
    fn reference_optima_over_gf2() {
        for (inst, expected) in [(fig1(), 3), (complements(), 2), (four_client(), 2)] {
            let res = optimal_tau(&inst, gf(2), DEFAULT_BUDGET).unwrap();
            assert_eq!(res.tau_star, expected);
            assert_eq!(res.witness.rows.len(), expected);
            assert!(feasible(&res.witness, &inst).unwrap());
            assert!(verify_schedule(&inst, &res.witness.to_schedule()).unwrap().ok());
        }
    }

    #[test]
    fn budget_exhaustion_reports_bracket() {
        let inst = Instance::random(9, 4, 0.5, 3).unwrap();
        match optimal_tau(&inst, gf(5), 50) {
            Err(Error::BudgetExceeded { lower, upper, budget }) => {
                assert_eq!(budget, 50);
                assert!(lower >= lower_bound(&inst));
                assert!(lower <= upper);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn trivial_instances() {
        let solo = Instance::from_one_based(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(optimal_tau(&solo, gf(2), 10).unwrap().tau_star, 0);
        let singles = Instance::from_one_based(3, &[&[1], &[2], &[3]]).unwrap();
        assert_eq!(optimal_tau(&singles, gf(3), DEFAULT_BUDGET).unwrap().tau_star, 3);
    }

    #[test]
    fn json_shape() {
        let res = optimal_tau(&complements(), gf(2), DEFAULT_BUDGET).unwrap();
        let v: serde_json::Value = serde_json::from_str(&res.to_json()).unwrap();
        assert_eq!(v["tau_star"], 2);
        assert_eq!(v["field_q"], 2);
        assert_eq!(v["witness"].as_array().unwrap().len(), 2);
        assert!(v["nodes"].as_u64().unwrap() > 0);
    }
}
