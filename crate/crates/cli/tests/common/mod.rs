//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dateline::domain::{Domain, Fluent, FluentRole, Skill, TemporalRel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random valid domain with at most two fluents and two skills, single
/// actor, no temporal actions.
pub fn tiny_domain(rng: &mut ChaCha8Rng) -> Domain {
    let nf = rng.random_range(1..=2);
    let mut fluents = Vec::new();
    for i in 0..nf {
        if i == 1 && rng.random_bool(0.3) {
            fluents.push(Fluent::resource(format!("f{i}")));
        } else {
            fluents.push(Fluent::ordinary(format!("f{i}")));
        }
    }
    let ordinary: Vec<String> = fluents
        .iter()
        .filter(|f| f.role == FluentRole::Ordinary)
        .map(|f| f.name.clone())
        .collect();
    let ns = rng.random_range(1..=2);
    let mut skills = Vec::new();
    for i in 0..ns {
        let mut s = if rng.random_bool(0.75) {
            Skill::delay(format!("s{i}"), rng.random_range(1..=3))
        } else {
            Skill::timer(format!("s{i}"))
        };
        for _ in 0..rng.random_range(0..=2) {
            let f = &fluents[rng.random_range(0..fluents.len())];
            let rel = if f.role == FluentRole::Resource && rng.random_bool(0.5) {
                TemporalRel::Equals
            } else {
                [
                    TemporalRel::Contains,
                    TemporalRel::OverlappedBy,
                    TemporalRel::Overlaps,
                ][rng.random_range(0..3)]
            };
            if !s.constraints.iter().any(|c| c.fluent == f.name) {
                s = s.with_constraint(&f.name, rel);
            }
        }
        for f in &ordinary {
            if rng.random_bool(0.4) {
                s = s.raising(f);
            }
        }
        skills.push(s);
    }
    let pick = |rng: &mut ChaCha8Rng, p: f64| -> BTreeSet<String> {
        ordinary
            .iter()
            .filter(|_| rng.random_bool(p))
            .cloned()
            .collect()
    };
    let init = pick(rng, 0.3);
    let goal = pick(rng, 0.5);
    let interference = if nf == 2 && rng.random_bool(0.2) {
        vec![("f0".to_string(), "f1".to_string())]
    } else {
        vec![]
    };
    Domain {
        fluents,
        actors: 1,
        skills,
        interference,
        temporal_actions: vec![],
        init,
        goal,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
