//! Problem instances: packets, clients and what each client holds.
//!
//! Packets and clients are 0-based inside the library. The JSON document
//! format uses 1-based packet indices to match the usual `x_1..x_n` naming.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};

/// A cooperative data exchange instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    n: usize,
    holdings: Vec<BTreeSet<usize>>,
}

/// A reason an instance is malformed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoClients,
    /// Packet (0-based) held by no client.
    Uncovered(usize),
    /// Client (0-based) lists a packet index `>= n`.
    OutOfRange { client: usize, packet: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoClients => write!(f, "instance has no clients"),
            Violation::Uncovered(p) => write!(f, "packet {} is held by no client", p + 1),
            Violation::OutOfRange { client, packet } => write!(
                f,
                "client {} holds packet {} outside 1..=n",
                client + 1,
                packet + 1
            ),
        }
    }
}

/// Derived holding statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stats {
    pub n_min: usize,
    pub n_max: usize,
    /// Packets each client still needs.
    pub complements: Vec<BTreeSet<usize>>,
}

/// An instance with its unique packets broadcast up front and removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedInstance {
    /// Number of packets that were held by exactly one client.
    pub unique_count: usize,
    pub reduced: Instance,
    /// `index_map[i]` is the original index of reduced packet `i`.
    pub index_map: Vec<usize>,
}

impl Instance {
    /// Builds a validated instance from 0-based holdings.
    pub fn new(n: usize, holdings: Vec<BTreeSet<usize>>) -> Result<Self> {
        let inst = Self { n, holdings };
        let violations = inst.validate();
        if let Some(v) = violations.first() {
            return Err(usage(format!("invalid instance: {v}")));
        }
        Ok(inst)
    }

    /// Convenience constructor from 1-based packet lists.
    pub fn from_one_based(n: usize, clients: &[&[usize]]) -> Result<Self> {
        let mut holdings = Vec::with_capacity(clients.len());
        for (c, list) in clients.iter().enumerate() {
            let mut set = BTreeSet::new();
            for &p in *list {
                if p == 0 || p > n {
                    return Err(usage(format!(
                        "client {} lists packet {p} outside 1..={n}",
                        c + 1
                    )));
                }
                set.insert(p - 1);
            }
            holdings.push(set);
        }
        Self::new(n, holdings)
    }

    /// Reports every violated invariant; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.holdings.is_empty() {
            out.push(Violation::NoClients);
        }
        for (client, set) in self.holdings.iter().enumerate() {
            for &packet in set.range(self.n..) {
                out.push(Violation::OutOfRange { client, packet });
            }
        }
        let mut covered = vec![false; self.n];
        for set in &self.holdings {
            for &p in set.range(..self.n) {
                covered[p] = true;
            }
        }
        out.extend(
            covered
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(p, _)| Violation::Uncovered(p)),
        );
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.holdings.len()
    }

    pub fn holdings(&self) -> &[BTreeSet<usize>] {
        &self.holdings
    }

    pub fn holding(&self, client: usize) -> &BTreeSet<usize> {
        &self.holdings[client]
    }

    pub fn holds(&self, client: usize, packet: usize) -> bool {
        self.holdings[client].contains(&packet)
    }

    /// Packets client `client` is missing.
    pub fn complement(&self, client: usize) -> BTreeSet<usize> {
        (0..self.n)
            .filter(|p| !self.holdings[client].contains(p))
            .collect()
    }

    pub fn n_min(&self) -> usize {
        self.holdings.iter().map(BTreeSet::len).min().unwrap_or(0)
    }

    pub fn n_max(&self) -> usize {
        self.holdings.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn stats(&self) -> Stats {
        Stats {
            n_min: self.n_min(),
            n_max: self.n_max(),
            complements: (0..self.k()).map(|i| self.complement(i)).collect(),
        }
    }

    /// Number of holders of each packet.
    fn holder_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for set in &self.holdings {
            for &p in set {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Packets held by exactly one client while some other client lacks them.
    ///
    /// With a single client nothing is ever needed, so no packet is unique.
    pub fn unique_packets(&self) -> BTreeSet<usize> {
        if self.k() < 2 {
            return BTreeSet::new();
        }
        self.holder_counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(p, _)| p)
            .collect()
    }

    /// Broadcasts every unique packet uncoded and drops it from the universe.
    ///
    /// The reduced instance may have `n = 0` when every packet was unique.
    pub fn normalize_unique(&self) -> NormalizedInstance {
        let unique = self.unique_packets();
        let index_map: Vec<usize> = (0..self.n).filter(|p| !unique.contains(p)).collect();
        let mut new_index = vec![usize::MAX; self.n];
        for (i, &p) in index_map.iter().enumerate() {
            new_index[p] = i;
        }
        let holdings = self
            .holdings
            .iter()
            .map(|set| {
                set.iter()
                    .filter(|p| !unique.contains(p))
                    .map(|&p| new_index[p])
                    .collect()
            })
            .collect();
        NormalizedInstance {
            unique_count: unique.len(),
            reduced: Instance {
                n: index_map.len(),
                holdings,
            },
            index_map,
        }
    }

    /// Draws an instance with independent Bernoulli(`density`) membership.
    ///
    /// Packets nobody drew are handed to one uniformly chosen client.
    pub fn random(n: usize, k: usize, density: f64, seed: u64) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(usage("random instance needs n >= 1 and k >= 1"));
        }
        if !(density > 0.0 && density <= 1.0) {
            return Err(usage(format!("density {density} outside (0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut holdings = vec![BTreeSet::new(); k];
        for set in holdings.iter_mut() {
            for p in 0..n {
                if rng.gen_bool(density) {
                    set.insert(p);
                }
            }
        }
        for p in 0..n {
            if !holdings.iter().any(|s| s.contains(&p)) {
                let c = rng.gen_range(0..k);
                holdings[c].insert(p);
            }
        }
        Self::new(n, holdings)
    }

    /// Parses the JSON instance document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        doc.try_into()
    }

    /// Serializes to the canonical (compact, sorted) JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceDoc::from(self)).expect("instance serializes")
    }
}

/// On-disk instance document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub n: usize,
    pub clients: Vec<Vec<usize>>,
}

impl From<&Instance> for InstanceDoc {
    fn from(inst: &Instance) -> Self {
        Self {
            n: inst.n,
            clients: inst
                .holdings
                .iter()
                .map(|s| s.iter().map(|p| p + 1).collect())
                .collect(),
        }
    }
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let parse_err = |location: String, message: String| Error::Parse { location, message };
        if doc.n == 0 {
            return Err(parse_err("n".into(), "n must be at least 1".into()));
        }
        if doc.clients.is_empty() {
            return Err(parse_err("clients".into(), "at least one client required".into()));
        }
        let mut holdings = Vec::with_capacity(doc.clients.len());
        for (c, list) in doc.clients.iter().enumerate() {
            let mut set = BTreeSet::new();
            for (pos, &p) in list.iter().enumerate() {
                if p == 0 || p > doc.n {
                    return Err(parse_err(
                        format!("clients[{c}][{pos}]"),
                        format!("packet index {p} outside 1..={}", doc.n),
                    ));
                }
                if !set.insert(p - 1) {
                    return Err(parse_err(
                        format!("clients[{c}][{pos}]"),
                        format!("packet index {p} repeated"),
                    ));
                }
            }
            holdings.push(set);
        }
        let inst = Instance { n: doc.n, holdings };
        if let Some(v) = inst.validate().first() {
            return Err(parse_err("clients".into(), v.to_string()));
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1() -> Instance {
        Instance::from_one_based(4, &[&[1], &[2, 4], &[2, 3], &[1, 3]]).unwrap()
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn validate_examples() {
        assert!(fig1().validate().is_empty());
        let bad = Instance {
            n: 2,
            holdings: vec![set(&[0]), set(&[0])],
        };
        assert_eq!(bad.validate(), vec![Violation::Uncovered(1)]);
        assert!(Instance::from_one_based(1, &[&[1]]).unwrap().validate().is_empty());
        let out_of_range = Instance {
            n: 1,
            holdings: vec![set(&[0, 3])],
        };
        assert_eq!(
            out_of_range.validate(),
            vec![Violation::OutOfRange { client: 0, packet: 3 }]
        );
        assert!(Instance::new(2, vec![set(&[0])]).is_err());
    }

    #[test]
    fn stats_examples() {
        let s = fig1().stats();
        assert_eq!((s.n_min, s.n_max), (1, 2));
        assert_eq!(s.complements[0], set(&[1, 2, 3]));

        let all = Instance::new(3, vec![set(&[0, 1, 2]); 2]).unwrap().stats();
        assert_eq!((all.n_min, all.n_max), (3, 3));
        assert!(all.complements.iter().all(BTreeSet::is_empty));

        let comp = Instance::from_one_based(3, &[&[2, 3], &[1, 3], &[1, 2]]).unwrap();
        assert_eq!((comp.n_min(), comp.n_max()), (2, 2));
    }

    #[test]
    fn normalize_fig1() {
        let norm = fig1().normalize_unique();
        // packet x4 (index 3) is held only by client 2
        assert_eq!(norm.unique_count, 1);
        assert_eq!(norm.index_map, vec![0, 1, 2]);
        assert_eq!(norm.reduced.n(), 3);
        assert_eq!(
            norm.reduced.holdings(),
            &[set(&[0]), set(&[1]), set(&[1, 2]), set(&[0, 2])]
        );
    }

    #[test]
    fn normalize_edge_cases() {
        let singles = Instance::from_one_based(3, &[&[1], &[2], &[3]]).unwrap();
        let norm = singles.normalize_unique();
        assert_eq!(norm.unique_count, 3);
        assert_eq!(norm.reduced.n(), 0);

        let comp = Instance::from_one_based(3, &[&[2, 3], &[1, 3], &[1, 2]]).unwrap();
        let norm = comp.normalize_unique();
        assert_eq!(norm.unique_count, 0);
        assert_eq!(norm.reduced, comp);
    }

    #[test]
    fn single_client_has_no_unique_packets() {
        let solo = Instance::from_one_based(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(solo.normalize_unique().unique_count, 0);
    }

    #[test]
    fn random_full_density() {
        let inst = Instance::random(7, 3, 1.0, 42).unwrap();
        assert!(inst.holdings().iter().all(|s| s.len() == 7));
    }

    #[test]
    fn random_is_deterministic() {
        let a = Instance::random(20, 4, 0.3, 9).unwrap();
        let b = Instance::random(20, 4, 0.3, 9).unwrap();
        assert_eq!(a, b);
        assert!(Instance::random(0, 3, 0.5, 1).is_err());
        assert!(Instance::random(3, 3, 0.0, 1).is_err());
    }

    #[test]
    fn random_membership_rate() {
        // mean |X_1| before repair is 10 with sd sqrt(20 * 0.25); repair adds
        // about 20 * 0.125 / 3 packets, so compare the mean against 10 with the
        // repair allowance folded into the tolerance.
        let seeds = 1000;
        let mean: f64 = (0..seeds)
            .map(|s| Instance::random(20, 3, 0.5, s).unwrap().holding(0).len() as f64)
            .sum::<f64>()
            / seeds as f64;
        let sigma = (20.0f64 * 0.25).sqrt() / (seeds as f64).sqrt();
        let repair = 20.0 * 0.125 / 3.0;
        assert!((mean - 10.0 - repair).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn json_round_trip() {
        let doc = r#"{"n":4,"clients":[[1],[2,4],[2,3],[1,3]]}"#;
        let inst = Instance::from_json(doc).unwrap();
        assert_eq!(inst, fig1());
        assert_eq!(inst.to_json(), doc);
    }

    #[test]
    fn json_rejects_bad_indices() {
        for doc in [
            r#"{"n":2,"clients":[[0,1],[2]]}"#,
            r#"{"n":2,"clients":[[1,3],[2]]}"#,
            r#"{"n":2,"clients":[[1],[1]]}"#,
            r#"{"n":2,"clients":[[1],[2,2]]}"#,
            r#"{"n":2,"clients":[]}"#,
            r#"{"n":2,"clients":[[1],[2]],"extra":1}"#,
            r#"{"n":2,"clients":[[1],"#,
        ] {
            assert!(matches!(Instance::from_json(doc), Err(Error::Parse { .. })), "{doc}");
        }
        let err = Instance::from_json(r#"{"n":2,"clients":[[1],[5]]}"#).unwrap_err();
        assert!(err.to_string().contains("clients[1][0]"), "{err}");
    }

    proptest! {
        #[test]
        fn random_instances_validate(n in 1usize..40, k in 1usize..8, rho in 0.01f64..=1.0, seed in any::<u64>()) {
            let inst = Instance::random(n, k, rho, seed).unwrap();
            prop_assert!(inst.validate().is_empty());
            prop_assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
        }

        #[test]
        fn normalization_properties(n in 1usize..20, k in 1usize..6, rho in 0.05f64..=1.0, seed in any::<u64>()) {
            let inst = Instance::random(n, k, rho, seed).unwrap();
            let norm = inst.normalize_unique();
            let per_client: usize = if k < 2 { 0 } else { (0..k)
                .map(|c| inst.holding(c).iter().filter(|&&p| (0..k).filter(|&o| inst.holds(o, p)).count() == 1).count())
                .sum() };
            prop_assert_eq!(per_client, norm.unique_count);
            prop_assert_eq!(norm.reduced.n(), n - norm.unique_count);
            prop_assert!(norm.reduced.validate().is_empty());
            prop_assert_eq!(norm.reduced.normalize_unique().unique_count, 0);
            let stats = inst.stats();
            for c in 0..k {
                prop_assert!(inst.holding(c).is_disjoint(&stats.complements[c]));
                prop_assert_eq!(inst.holding(c).len() + stats.complements[c].len(), n);
            }
        }
    }
}
