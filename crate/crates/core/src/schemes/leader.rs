//! Two-phase leader scheme.
//!
//! Phase one completes a single leader with uncoded packets sent by their
//! lowest-index holders. Phase two has the leader broadcast coded packets,
//! each innovative for every client that is still short.

use super::{initial_spaces, require_field, Schedule, SchemeKind};
use crate::bounds::upper_bound_leader;
use crate::error::{usage, Result};
use crate::field::FieldSpec;
use crate::instance::Instance;
use crate::linalg::{find_avoiding_vector, CodingVector, Subspace};

/// Runs the leader scheme; `leader` is 0-based and defaults to the client
/// minimizing the leader cost.
pub fn run_leader(inst: &Instance, field: FieldSpec, leader: Option<usize>) -> Result<Schedule> {
    require_field(inst, field)?;
    let leader = match leader {
        Some(l) if l >= inst.k() => {
            return Err(usage(format!("leader {} outside 1..={}", l + 1, inst.k())))
        }
        Some(l) => l,
        None => upper_bound_leader(inst).1,
    };
    let n = inst.n();
    let mut spaces = initial_spaces(inst, field);
    let mut schedule = Schedule::new(SchemeKind::Leader, field);

    for packet in inst.complement(leader) {
        let sender = (0..inst.k())
            .find(|&c| inst.holds(c, packet))
            .expect("every packet has a holder");
        let v = CodingVector::unit(n, packet);
        for s in spaces.iter_mut() {
            s.insert_mut(&v)?;
        }
        schedule.push(sender, v);
    }

    loop {
        let deficient: Vec<&Subspace> = spaces
            .iter()
            .enumerate()
            .filter(|&(c, s)| c != leader && !s.is_full())
            .map(|(_, s)| s)
            .collect();
        if deficient.is_empty() {
            break;
        }
        let b = find_avoiding_vector(&spaces[leader], &deficient)?;
        for s in spaces.iter_mut() {
            s.insert_mut(&b)?;
        }
        schedule.push(leader, b);
    }
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{simulate_payloads, verify_schedule};
    use super::*;
    use crate::bounds::leader_cost;
    use proptest::prelude::*;

    fn gf(q: u32) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    #[test]
    fn complements_with_first_leader() {
        let inst = complements();
        let s = run_leader(&inst, gf(3), Some(0)).unwrap();
        assert_eq!(s.total(), 2);
        // one uncoded packet for the leader, then one coded broadcast
        assert_eq!(s.transmissions[0].vector, CodingVector(vec![1, 0, 0]));
        assert_eq!(s.transmissions[1].sender, 0);
        assert!(verify_schedule(&inst, &s).unwrap().ok());
    }

    #[test]
    fn four_client_best_leader() {
        let inst = four_client();
        let s = run_leader(&inst, gf(5), None).unwrap();
        assert_eq!(s.total(), 3);
        assert!(verify_schedule(&inst, &s).unwrap().ok());
    }

    #[test]
    fn complete_leader_and_others() {
        let inst = Instance::from_one_based(2, &[&[1, 2], &[1, 2]]).unwrap();
        assert_eq!(run_leader(&inst, gf(2), Some(0)).unwrap().total(), 0);
    }

    #[test]
    fn rejects_bad_leader() {
        assert!(run_leader(&complements(), gf(3), Some(3)).is_err());
    }

    proptest! {
        #[test]
        fn leader_total_matches_cost(n in 1usize..20, k in 1usize..6, rho in 0.1f64..0.9, seed in any::<u64>(), pick in any::<usize>()) {
            let inst = Instance::random(n, k, rho, seed).unwrap();
            let field = FieldSpec::at_least(k);
            let leader = pick % k;
            let s = run_leader(&inst, field, Some(leader)).unwrap();
            prop_assert_eq!(s.total(), leader_cost(&inst, leader));
            prop_assert!(verify_schedule(&inst, &s).unwrap().ok());
            prop_assert!(simulate_payloads(&inst, &s, seed).unwrap().success());
        }
    }
}
