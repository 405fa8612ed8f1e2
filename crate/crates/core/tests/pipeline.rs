use dateline::benchgen::{gen_cushing, BenchType, GadgetSpec};
use dateline::encoder::ObjectiveKind;
use dateline::search::{find_plan, Limits, SearchOutcome};
use dateline::solver::SolverConfig;
use dateline::validator::{validate_plan, RuleId};

fn solve(spec: &GadgetSpec, objective: ObjectiveKind) -> dateline::search::Plan {
    let d = gen_cushing(spec).unwrap();
    let limits = Limits {
        copy_cap: Some(1),
        ..Limits::default()
    };
    let r = find_plan(&d, objective, &limits, &SolverConfig::default()).unwrap();
    let SearchOutcome::Found {
        plan, minimal_n, ..
    } = r.outcome
    else {
        panic!("no plan for {}", spec.instance_id());
    };
    assert!(minimal_n);
    plan
}

#[test]
fn solved_gadgets_validate() {
    for spec in [
        GadgetSpec::type_i(2),
        GadgetSpec::stacked(BenchType::II, 1, 2),
    ] {
        let d = gen_cushing(&spec).unwrap();
        let plan = solve(&spec, ObjectiveKind::None);
        let report = validate_plan(&d, &plan);
        assert!(report.is_valid(), "{}", report.to_text());
    }
}

#[test]
fn tampering_is_caught() {
    let spec = GadgetSpec::type_i(1);
    let d = gen_cushing(&spec).unwrap();
    let plan = solve(&spec, ObjectiveKind::None);

    let mut p = plan.clone();
    p.actions.retain(|a| a.action != "a3_c1");
    assert!(validate_plan(&d, &p).has(RuleId::Frame));

    let mut p = plan.clone();
    for e in p.fluents.iter_mut().filter(|e| e.fluent == "r2_c1") {
        e.value = false;
    }
    assert!(validate_plan(&d, &p).has(RuleId::ActionAxiom));

    let mut p = plan;
    let a = p.actions.iter().position(|a| a.action == "a1_c1").unwrap();
    let dup = p.actions[a].clone();
    p.actions.push(dup);
    assert!(validate_plan(&d, &p).has(RuleId::NonOverlap));
}

#[test]
fn makespan_plans_report_their_end() {
    let plan = solve(&GadgetSpec::type_i(1), ObjectiveKind::Makespan);
    let end = plan.actions.iter().map(|a| a.end).max().unwrap();
    assert_eq!(
        plan.objective,
        Some(dateline::domain::Cost::integer(end as i64))
    );
}
