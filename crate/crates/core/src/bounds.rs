//! Closed-form bounds on the optimal number of transmissions.

use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// Bounds bracketing the optimum for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: usize,
    pub upper_leader: usize,
    pub ie_guarantee: usize,
    pub trivial: usize,
    /// 1-based client attaining `upper_leader`.
    pub best_leader: usize,
}

/// Every client must receive `n - n_i` innovative packets; when all clients
/// start with the same count, whoever transmits first gains nothing from its
/// own broadcast and one extra transmission is forced.
pub fn lower_bound(inst: &Instance) -> usize {
    let n = inst.n();
    let n_min = inst.n_min();
    let equal = inst.holdings().iter().all(|s| s.len() == n_min);
    if equal && n_min < n {
        n - n_min + 1
    } else {
        n - n_min
    }
}

/// Cost of the two-phase scheme led by `leader` (0-based): the leader's
/// missing packets sent uncoded, then the largest residual demand any
/// client has on the leader's own packets.
pub fn leader_cost(inst: &Instance, leader: usize) -> usize {
    let held = inst.holding(leader);
    let missing = inst.n() - held.len();
    let residual = inst
        .holdings()
        .iter()
        .map(|other| held.difference(other).count())
        .max()
        .unwrap_or(0);
    missing + residual
}

/// Minimum leader cost over all clients with the smallest 0-based leader
/// attaining it.
pub fn upper_bound_leader(inst: &Instance) -> (usize, usize) {
    (0..inst.k())
        .map(|i| (leader_cost(inst, i), i))
        .min()
        .expect("instance has at least one client")
}

/// Guarantee of the max-dimension greedy coding scheme.
pub fn ie_guarantee(inst: &Instance) -> usize {
    let n = inst.n();
    n.min(2 * n - inst.n_max() - inst.n_min())
}

pub fn bounds_report(inst: &Instance) -> BoundsReport {
    let (upper_leader, leader) = upper_bound_leader(inst);
    BoundsReport {
        lower: lower_bound(inst),
        upper_leader,
        ie_guarantee: ie_guarantee(inst),
        trivial: inst.n(),
        best_leader: leader + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn fig1() -> Instance {
        Instance::from_one_based(4, &[&[1], &[2, 4], &[2, 3], &[1, 3]]).unwrap()
    }

    fn complements() -> Instance {
        Instance::from_one_based(3, &[&[2, 3], &[1, 3], &[1, 2]]).unwrap()
    }

    fn four_client() -> Instance {
        Instance::from_one_based(4, &[&[2, 3, 4], &[1, 4], &[1, 2, 4], &[1, 3]]).unwrap()
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound(&fig1()), 3);
        assert_eq!(lower_bound(&complements()), 2);
        assert_eq!(lower_bound(&four_client()), 2);
        let solo = Instance::from_one_based(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(lower_bound(&solo), 0);
    }

    #[test]
    fn equal_branch_triggers_only_when_all_equal_and_deficient() {
        // equal sizes, deficient
        let eq = Instance::from_one_based(4, &[&[1, 2], &[3, 4], &[1, 3]]).unwrap();
        assert_eq!(lower_bound(&eq), 3);
        // unequal sizes
        let uneq = Instance::from_one_based(4, &[&[1, 2], &[3, 4], &[1, 2, 3]]).unwrap();
        assert_eq!(lower_bound(&uneq), 2);
        // equal but everyone complete
        let full = Instance::from_one_based(2, &[&[1, 2], &[1, 2]]).unwrap();
        assert_eq!(lower_bound(&full), 0);
    }

    #[test]
    fn leader_bound_examples() {
        assert_eq!(upper_bound_leader(&complements()), (2, 0));
        assert_eq!(upper_bound_leader(&four_client()).0, 3);
        // hand evaluation for fig. 1: every leader costs 4
        // c1: 3 missing + max |{x1} \ X_j| = 1
        // c2: 2 + |{x2,x4} \ X_1| = 2
        // c3: 2 + |{x2,x3} \ X_1| = 2
        // c4: 2 + |{x1,x3} \ X_2| = 2
        let f = fig1();
        for leader in 0..4 {
            assert_eq!(leader_cost(&f, leader), 4);
        }
        assert_eq!(upper_bound_leader(&f), (4, 0));
    }

    #[test]
    fn ie_guarantee_examples() {
        assert_eq!(ie_guarantee(&fig1()), 4);
        let with_full = Instance::from_one_based(4, &[&[1, 2, 3, 4], &[1]]).unwrap();
        assert_eq!(ie_guarantee(&with_full), 3);
        for n in 2..6 {
            let holdings = (0..n).map(|p| BTreeSet::from([p])).collect();
            let singles = Instance::new(n, holdings).unwrap();
            assert_eq!(ie_guarantee(&singles), n);
        }
    }

    #[test]
    fn reports() {
        assert_eq!(
            bounds_report(&fig1()),
            BoundsReport {
                lower: 3,
                upper_leader: 4,
                ie_guarantee: 4,
                trivial: 4,
                best_leader: 1
            }
        );
        let c = bounds_report(&complements());
        assert_eq!((c.lower, c.upper_leader, c.ie_guarantee, c.trivial), (2, 2, 2, 3));
        let solo = bounds_report(&Instance::from_one_based(2, &[&[1, 2]]).unwrap());
        assert_eq!((solo.lower, solo.upper_leader), (0, 0));
    }

    #[test]
    fn report_json_has_five_fields() {
        let v = serde_json::to_value(bounds_report(&fig1())).unwrap();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), 5);
        assert_eq!(obj["lower"], 3);
    }
}
