use std::collections::BTreeSet;

use proptest::prelude::*;

use dateline::benchgen::{gen_cushing, BenchType, GadgetSpec};
use dateline::domain::{lowers, parse_domain, Domain, Fluent, Skill};
use dateline::interval::{
    allen_relation, check_tqa, decompose, AllenRelation, History, Interval, Tqa,
};
use dateline::search::{ActionEntry, FluentEntry, Plan, TimingDiagram};

fn interval(max: u64) -> impl Strategy<Value = Interval> {
    (0..max)
        .prop_flat_map(move |l| (Just(l), l + 1..=max))
        .prop_map(|(l, r)| Interval::new(l, r).unwrap())
}

/// A well-formed plan over `n` stages for fluents `p` and `q`.
fn plan() -> impl Strategy<Value = Plan> {
    (1usize..=4)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(1u64..=4, n),
                proptest::collection::vec((any::<bool>(), any::<bool>(), 0u64..4), 2 * n),
                any::<bool>(),
                any::<bool>(),
            )
        })
        .prop_map(|(widths, stages, p0, q0)| {
            let n = widths.len();
            let mut boundaries = vec![0];
            for w in &widths {
                boundaries.push(boundaries.last().unwrap() + w);
            }
            let mut fluents = Vec::new();
            for (fi, (name, init)) in [("p", p0), ("q", q0)].into_iter().enumerate() {
                let mut v = init;
                for t in 0..n {
                    let (lo, hi) = (boundaries[t], boundaries[t + 1]);
                    let (change, _, off) = stages[fi * n + t];
                    let entry = |part, value, start, end| FluentEntry {
                        fluent: name.into(),
                        stage: t as u32 + 1,
                        part,
                        value,
                        start,
                        end,
                    };
                    if change && hi - lo >= 2 {
                        let split = lo + 1 + off % (hi - lo - 1);
                        fluents.push(entry(0, v, lo, split));
                        v = !v;
                        fluents.push(entry(1, v, split, hi));
                    } else {
                        fluents.push(entry(1, v, lo, hi));
                    }
                }
            }
            let actions = vec![ActionEntry {
                action: "a".into(),
                actor: 1,
                copy: 1,
                start: 0,
                end: *boundaries.last().unwrap(),
            }];
            Plan {
                n: n as u32,
                boundaries,
                objective: None,
                fluents,
                actions,
            }
        })
}

proptest! {
    #[test]
    fn exactly_one_relation(x in interval(40), y in interval(40)) {
        let holding: Vec<_> = AllenRelation::ALL.iter().filter(|r| r.holds(x, y)).collect();
        prop_assert_eq!(holding.len(), 1);
        prop_assert_eq!(*holding[0], allen_relation(x, y));
        prop_assert_eq!(allen_relation(y, x), allen_relation(x, y).inverse());
        prop_assert_eq!(allen_relation(x, y).inverse().inverse(), allen_relation(x, y));
    }

    #[test]
    fn decomposition_tiles_the_interval(x in interval(30), picks in proptest::collection::btree_set(1u64..30, 0..6)) {
        let cuts: Vec<u64> = picks.into_iter().filter(|&c| x.l() < c && c < x.r()).collect();
        let tqa = Tqa::new("p", true, x);
        let parts = decompose(&tqa, &cuts).unwrap();
        prop_assert_eq!(parts.len(), cuts.len() + 1);
        prop_assert_eq!(parts[0].interval.l(), x.l());
        prop_assert_eq!(parts.last().unwrap().interval.r(), x.r());
        for w in parts.windows(2) {
            prop_assert_eq!(allen_relation(w[0].interval, w[1].interval), AllenRelation::Meets);
        }
    }

    #[test]
    fn tqas_are_homogeneous(x in interval(20), sub in interval(20), value in any::<bool>()) {
        let mut h = History::new(["p"], 20);
        h.assign("p", Interval::new(0, 20).unwrap(), !value).unwrap();
        h.assign("p", x, value).unwrap();
        prop_assert!(check_tqa(&h, &Tqa::new("p", value, x)).unwrap());
        let inside = x.l() <= sub.l() && sub.r() <= x.r();
        prop_assert_eq!(check_tqa(&h, &Tqa::new("p", value, sub)).unwrap(), inside);
    }

    #[test]
    fn gadget_documents_round_trip(kind in 0u8..3, m in 1u32..4, h in 2u32..4) {
        let spec = match kind {
            0 => GadgetSpec::type_i(m),
            1 => GadgetSpec::stacked(BenchType::II, m, h),
            _ => GadgetSpec::stacked(BenchType::III, m, h),
        };
        let d = gen_cushing(&spec).unwrap();
        prop_assert_eq!(parse_domain(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn lowers_grow_with_interference(pairs in proptest::collection::vec((0usize..4, 0usize..4), 0..6), extra in (0usize..4, 0usize..4)) {
        let names = ["a", "b", "c", "d"];
        let mk = |pairs: &[(usize, usize)]| Domain {
            fluents: names.iter().map(|n| Fluent::ordinary(*n)).collect(),
            actors: 1,
            skills: vec![Skill::delay("s", 2).raising("a").raising("c")],
            interference: pairs
                .iter()
                .filter(|(x, y)| x != y)
                .map(|&(x, y)| (names[x].to_string(), names[y].to_string()))
                .collect(),
            temporal_actions: vec![],
            init: BTreeSet::new(),
            goal: BTreeSet::new(),
        };
        let small = lowers(&mk(&pairs), "s").unwrap();
        let mut more = pairs.clone();
        more.push(extra);
        let big = lowers(&mk(&more), "s").unwrap();
        prop_assert!(small.is_subset(&big));
    }

    #[test]
    fn diagrams_are_idempotent(p in plan()) {
        let dg = TimingDiagram::from_plan(&p).unwrap();
        let again = TimingDiagram::from_history(&dg.history(), dg.boundaries.clone(), dg.actions.clone());
        prop_assert_eq!(&again, &dg);
        prop_assert_eq!(Plan::from_json(&p.to_json()).unwrap(), p);
    }
}
