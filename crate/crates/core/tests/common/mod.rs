#![allow(dead_code)]

use coopex::{CodingVector, FieldSpec, Instance, Schedule, SchemeKind};

pub fn fig1() -> Instance {
    Instance::from_one_based(4, &[&[1], &[2, 4], &[2, 3], &[1, 3]]).unwrap()
}

pub fn complements() -> Instance {
    Instance::from_one_based(3, &[&[2, 3], &[1, 3], &[1, 2]]).unwrap()
}

pub fn four_client() -> Instance {
    Instance::from_one_based(4, &[&[2, 3, 4], &[1, 4], &[1, 2, 4], &[1, 3]]).unwrap()
}

/// four-client example coded exchange: c2 sends x2+x4, c3 sends x2+x3, c4 sends x1+x3.
pub fn fig1_reference_schedule() -> Schedule {
    let doc = r#"{"scheme":"external","field_q":2,"total":3,"transmissions":[
        {"round":1,"sender":2,"vector":[0,1,0,1]},
        {"round":2,"sender":3,"vector":[0,1,1,0]},
        {"round":3,"sender":4,"vector":[1,0,1,0]}]}"#;
    let s = Schedule::from_json(doc).unwrap();
    assert_eq!(s.scheme, SchemeKind::External);
    assert_eq!(s.field, FieldSpec::new(2).unwrap());
    assert_eq!(s.transmissions[0].vector, CodingVector(vec![0, 1, 0, 1]));
    s
}
