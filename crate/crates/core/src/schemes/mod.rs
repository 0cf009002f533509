//! Transmission schemes and schedule replay.
//!
//! Every scheme emits a [`Schedule`]: an ordered list of coded broadcasts.
//! [`verify_schedule`] replays one against an instance and
//! [`simulate_payloads`] pushes random payloads through it end to end.

mod ie;
mod leader;
mod random;

pub use ie::{run_ie, IeRound, IeTranscript, MergeEvent};
pub use leader::run_leader;
pub use random::{
    random_average_exact, random_average_mc, random_schedule, random_tau, McEstimate,
    RandomOrderResult, EXACT_ENUMERATION_CAP,
};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::field::FieldSpec;
use crate::instance::Instance;
use crate::linalg::{solve_packets, CodingVector, Subspace};

/// Which scheme produced a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Ie,
    Leader,
    Random,
    /// Witness of the exhaustive optimum search.
    Oracle,
    /// Hand-written or externally produced schedule.
    External,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Ie => "ie",
            SchemeKind::Leader => "leader",
            SchemeKind::Random => "random",
            SchemeKind::Oracle => "oracle",
            SchemeKind::External => "external",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ie" => Ok(SchemeKind::Ie),
            "leader" => Ok(SchemeKind::Leader),
            "random" => Ok(SchemeKind::Random),
            "oracle" => Ok(SchemeKind::Oracle),
            "external" => Ok(SchemeKind::External),
            other => Err(usage(format!("unknown scheme {other:?}"))),
        }
    }
}

/// One broadcast. `sender` is 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub round: usize,
    pub sender: usize,
    pub vector: CodingVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub scheme: SchemeKind,
    pub field: FieldSpec,
    pub transmissions: Vec<Transmission>,
}

impl Schedule {
    pub fn new(scheme: SchemeKind, field: FieldSpec) -> Self {
        Self {
            scheme,
            field,
            transmissions: Vec::new(),
        }
    }

    pub fn total(&self) -> usize {
        self.transmissions.len()
    }

    pub(crate) fn push(&mut self, sender: usize, vector: CodingVector) {
        let round = self.transmissions.len() + 1;
        self.transmissions.push(Transmission {
            round,
            sender,
            vector,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ScheduleDoc::from(self)).expect("schedule serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&ScheduleDoc::from(self)).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScheduleDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        doc.try_into()
    }
}

/// On-disk schedule document; senders are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub scheme: String,
    pub field_q: u32,
    pub total: usize,
    pub transmissions: Vec<TransmissionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionDoc {
    pub round: usize,
    pub sender: usize,
    pub vector: Vec<u32>,
}

impl From<&Schedule> for ScheduleDoc {
    fn from(s: &Schedule) -> Self {
        Self {
            scheme: s.scheme.to_string(),
            field_q: s.field.q(),
            total: s.total(),
            transmissions: s
                .transmissions
                .iter()
                .map(|t| TransmissionDoc {
                    round: t.round,
                    sender: t.sender + 1,
                    vector: t.vector.0.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ScheduleDoc> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        let parse_err = |location: &str, message: String| Error::Parse {
            location: location.to_string(),
            message,
        };
        let scheme = doc
            .scheme
            .parse()
            .map_err(|e: Error| parse_err("scheme", e.to_string()))?;
        let field =
            FieldSpec::new(doc.field_q).map_err(|e| parse_err("field_q", e.to_string()))?;
        if doc.total != doc.transmissions.len() {
            return Err(parse_err(
                "total",
                format!(
                    "total {} disagrees with {} transmissions",
                    doc.total,
                    doc.transmissions.len()
                ),
            ));
        }
        let mut transmissions = Vec::with_capacity(doc.transmissions.len());
        for (i, t) in doc.transmissions.into_iter().enumerate() {
            if t.sender == 0 {
                return Err(parse_err(
                    &format!("transmissions[{i}].sender"),
                    "senders are 1-based".into(),
                ));
            }
            if let Some(&c) = t.vector.iter().find(|&&c| c >= field.q()) {
                return Err(parse_err(
                    &format!("transmissions[{i}].vector"),
                    format!("coefficient {c} not in {field}"),
                ));
            }
            transmissions.push(Transmission {
                round: t.round,
                sender: t.sender - 1,
                vector: CodingVector(t.vector),
            });
        }
        Ok(Schedule {
            scheme,
            field,
            transmissions,
        })
    }
}

pub(crate) fn require_field(inst: &Instance, field: FieldSpec) -> Result<()> {
    if field.order() < inst.k() {
        return Err(Error::FieldTooSmall {
            q: field.q(),
            required: inst.k(),
        });
    }
    Ok(())
}

pub(crate) fn initial_spaces(inst: &Instance, field: FieldSpec) -> Vec<Subspace> {
    inst.holdings()
        .iter()
        .map(|h| {
            Subspace::coordinate(field, inst.n(), h.iter().copied())
                .expect("instance holdings are in range")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientReport {
    /// 1-based.
    pub client: usize,
    pub final_dim: usize,
    pub satisfied: bool,
}

/// Outcome of replaying a schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub clients: Vec<ClientReport>,
    pub all_satisfied: bool,
    /// Every vector was nonzero and known to its sender when sent.
    pub legal: bool,
    /// Rounds of the offending transmissions.
    pub illegal_rounds: Vec<usize>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.all_satisfied && self.legal
    }
}

/// Replays `schedule` over `inst`, tracking every client's knowledge.
pub fn verify_schedule(inst: &Instance, schedule: &Schedule) -> Result<VerifyReport> {
    let field = schedule.field;
    let mut spaces = initial_spaces(inst, field);
    let mut illegal_rounds = Vec::new();
    for t in &schedule.transmissions {
        if t.sender >= inst.k() {
            return Err(usage(format!(
                "round {}: sender {} outside 1..={}",
                t.round,
                t.sender + 1,
                inst.k()
            )));
        }
        if t.vector.len() != inst.n() {
            return Err(usage(format!(
                "round {}: vector length {} but n = {}",
                t.round,
                t.vector.len(),
                inst.n()
            )));
        }
        let known = spaces[t.sender].contains(&t.vector)?;
        if !known || t.vector.is_zero() {
            illegal_rounds.push(t.round);
        }
        for (c, s) in spaces.iter_mut().enumerate() {
            if c != t.sender {
                s.insert_mut(&t.vector)?;
            }
        }
    }
    let clients: Vec<ClientReport> = spaces
        .iter()
        .enumerate()
        .map(|(c, s)| ClientReport {
            client: c + 1,
            final_dim: s.dim(),
            satisfied: s.is_full(),
        })
        .collect();
    Ok(VerifyReport {
        all_satisfied: clients.iter().all(|c| c.satisfied),
        legal: illegal_rounds.is_empty(),
        illegal_rounds,
        clients,
    })
}

/// Ground truth and per-client decodes from one payload simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationReport {
    pub truth: Vec<u32>,
    pub decoded: Vec<Vec<u32>>,
}

impl SimulationReport {
    pub fn success(&self) -> bool {
        self.decoded.iter().all(|d| *d == self.truth)
    }
}

/// Encodes random payloads along the schedule and has every client decode.
pub fn simulate_payloads(
    inst: &Instance,
    schedule: &Schedule,
    seed: u64,
) -> Result<SimulationReport> {
    let field = schedule.field;
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<u32> = (0..n).map(|_| rng.gen_range(0..field.q())).collect();
    let received: Vec<(CodingVector, u32)> = schedule
        .transmissions
        .iter()
        .map(|t| {
            let y = t.vector.dot(field, &truth);
            (t.vector.clone(), y)
        })
        .collect();
    let decoded = inst
        .holdings()
        .iter()
        .map(|held| {
            let mut rows: Vec<(CodingVector, u32)> = held
                .iter()
                .map(|&p| (CodingVector::unit(n, p), truth[p]))
                .collect();
            rows.extend(received.iter().cloned());
            solve_packets(field, n, &rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport { truth, decoded })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn gf(q: u32) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn fig1_reference_schedule() -> Schedule {
        let mut s = Schedule::new(SchemeKind::External, gf(2));
        s.push(1, CodingVector(vec![0, 1, 0, 1]));
        s.push(2, CodingVector(vec![0, 1, 1, 0]));
        s.push(3, CodingVector(vec![1, 0, 1, 0]));
        s
    }

    #[test]
    fn reference_schedule_verifies_and_decodes() {
        let inst = fig1();
        let report = verify_schedule(&inst, &fig1_reference_schedule()).unwrap();
        assert!(report.ok(), "{report:?}");
        for seed in 0..20 {
            let sim = simulate_payloads(&inst, &fig1_reference_schedule(), seed).unwrap();
            assert!(sim.success());
            assert_eq!(sim.decoded.len(), 4);
        }
    }

    #[test]
    fn empty_schedule_leaves_client_one_short() {
        let report = verify_schedule(&fig1(), &Schedule::new(SchemeKind::External, gf(2))).unwrap();
        assert!(!report.all_satisfied);
        assert_eq!(report.clients[0].final_dim, 1);
        assert!(!report.clients[0].satisfied);
        assert!(report.legal);
    }

    #[test]
    fn sending_unknown_packet_is_illegal() {
        let mut s = Schedule::new(SchemeKind::External, gf(2));
        s.push(0, CodingVector::unit(4, 1));
        let report = verify_schedule(&fig1(), &s).unwrap();
        assert!(!report.legal);
        assert_eq!(report.illegal_rounds, vec![1]);
    }

    #[test]
    fn verify_rejects_malformed_schedules() {
        let mut s = Schedule::new(SchemeKind::External, gf(2));
        s.push(7, CodingVector::unit(4, 0));
        assert!(verify_schedule(&fig1(), &s).is_err());
        let mut s = Schedule::new(SchemeKind::External, gf(2));
        s.push(0, CodingVector::unit(3, 0));
        assert!(verify_schedule(&fig1(), &s).is_err());
    }

    #[test]
    fn trivial_decode() {
        let inst = Instance::from_one_based(1, &[&[1], &[1]]).unwrap();
        let sim = simulate_payloads(&inst, &Schedule::new(SchemeKind::Ie, gf(2)), 3).unwrap();
        assert!(sim.success());
    }

    #[test]
    fn schedule_json_round_trip() {
        let s = fig1_reference_schedule();
        let text = s.to_json();
        assert_eq!(
            text,
            r#"{"scheme":"external","field_q":2,"total":3,"transmissions":[{"round":1,"sender":2,"vector":[0,1,0,1]},{"round":2,"sender":3,"vector":[0,1,1,0]},{"round":3,"sender":4,"vector":[1,0,1,0]}]}"#
        );
        assert_eq!(Schedule::from_json(&text).unwrap(), s);
    }

    #[test]
    fn schedule_json_errors() {
        for doc in [
            r#"{"scheme":"ie","field_q":4,"total":0,"transmissions":[]}"#,
            r#"{"scheme":"ie","field_q":2,"total":1,"transmissions":[]}"#,
            r#"{"scheme":"nope","field_q":2,"total":0,"transmissions":[]}"#,
            r#"{"scheme":"ie","field_q":2,"total":1,"transmissions":[{"round":1,"sender":0,"vector":[1]}]}"#,
            r#"{"scheme":"ie","field_q":2,"total":1,"transmissions":[{"round":1,"sender":1,"vector":[2]}]}"#,
        ] {
            assert!(matches!(Schedule::from_json(doc), Err(Error::Parse { .. })), "{doc}");
        }
    }
}
