//! Acceptance suite. One test per criterion; each prints a PASS line
//! with the quantities it checked (visible with `--nocapture`).
//!
//! Everything here is exact: equalities and inequalities of rationals,
//! no tolerances.

use causalkit_core::constraints::sample_constrained;
use causalkit_core::gallery::{
    builtin_fixtures, extend_state_sweep, permutation_sweep, verify_fixture, verify_pair, Fixture,
    VerifyOpts,
};
use causalkit_core::inference::{dist_equal, eliminate_ve, intervene, marginal_given};
use causalkit_core::model::{CausalGraph, Cbn, Instantiation, Variable};
use causalkit_core::rat::{parse_rat, Rat};
use causalkit_core::rng::SplitMix64;
use std::collections::BTreeSet;

fn r(s: &str) -> Rat {
    parse_rat(s).unwrap()
}

fn fixture(id: &str) -> Fixture {
    builtin_fixtures()
        .into_iter()
        .find(|f| f.id == id)
        .unwrap_or_else(|| panic!("no fixture `{id}`"))
}

fn opts(samples: usize) -> VerifyOpts {
    VerifyOpts {
        samples,
        seed: 0xACC3,
        eps: r("1/3"),
    }
}

/// Flu certificate: exact observational agreement at the stated values
/// and an exact effect separation produced by the enumeration oracle.
#[test]
fn criterion_1_flu_certificate() {
    let f = fixture("prop4-flu");
    let report = verify_pair(&f.pairs[0]).unwrap();
    assert!(report.constraints_ok_a && report.constraints_ok_b);
    assert!(report.observational_equal);
    let mut rows = 0;
    for (inst, value) in report.observational.iter() {
        rows += 1;
        match (inst.get("C").unwrap(), inst.get("R").unwrap()) {
            ("0", _) => assert_eq!(value, &r("1/16"), "at {inst}"),
            ("1", "0") => assert_eq!(value, &r("99/800"), "at {inst}"),
            ("1", "1") => assert_eq!(value, &r("1/800"), "at {inst}"),
            _ => unreachable!(),
        }
    }
    assert_eq!(rows, 16);
    assert_ne!(report.effect_a, report.effect_b);
    assert!(report.separated && report.pass);
    println!(
        "[criterion 1] PASS - flu pair: 16 observational entries at 1/16, 99/800, 1/800; \
         effects {} vs {} under do(C=1, D=0)",
        report.effect_a, report.effect_b
    );
}

/// Identification formulas equal the brute-force interventional oracle
/// on at least 100 seeded constrained models per fixture, exactly.
#[test]
fn criterion_2_estimand_oracle_equivalence() {
    let ids = [
        "prop2-salary",
        "prop4-flu",
        "flight-binary-a",
        "prop6-flight",
        "prop7-hospital",
        "prop9-immunity",
    ];
    let mut lines = Vec::new();
    for id in ids {
        let f = fixture(id);
        assert!(!f.estimands.is_empty(), "{id} must carry formulas");
        let report = verify_fixture(&f, &opts(100)).unwrap();
        for er in &report.estimands {
            assert!(
                er.pair_values_equal,
                "{id}: formula value must agree across the certificate pair"
            );
            assert_eq!(
                er.models_matched, 100,
                "{id}: formula vs oracle on 100 models ({:?}): {:?}",
                er.binding, er.first_mismatch
            );
            assert_eq!(er.mismatches, 0);
        }
        lines.push(format!(
            "{id}: {} formula binding(s) x 100 models",
            report.estimands.len()
        ));
    }
    println!(
        "[criterion 2] PASS - estimand = oracle exactly on 100 sampled models per fixture ({})",
        lines.join("; ")
    );
}

/// Separation certificates: same observational distribution, different
/// target effect, constraints satisfied by both members.
#[test]
fn criterion_3_separation_certificates() {
    let expected: &[(&str, usize)] = &[
        ("prop2-salary", 1),
        ("prop6-flight", 2),
        ("prop7-hospital", 1),
        ("prop9-immunity", 1),
    ];
    let mut checked = 0;
    for (id, pairs) in expected {
        let f = fixture(id);
        assert_eq!(f.pairs.len(), *pairs, "{id} pair count");
        for pair in &f.pairs {
            let report = verify_pair(pair).unwrap();
            assert!(
                report.constraints_ok_a && report.constraints_ok_b,
                "{id}/{}: constraints must hold on both members",
                pair.label
            );
            assert!(
                report.observational_equal,
                "{id}/{}: observational distributions must agree exactly",
                pair.label
            );
            assert!(
                report.separated,
                "{id}/{}: target effects must differ exactly",
                pair.label
            );
            assert!(report.pass);
            checked += 1;
        }
    }
    println!(
        "[criterion 3] PASS - {checked} separation certificates verified \
         (salary, both flight pairs, hospital, immunity)"
    );
}

/// Functional elimination on sampled CFD models: marginals preserved on
/// every context-consistent instantiation, and the rewritten child CPTs
/// equal the original conditionals wherever the parent event has
/// positive probability.
#[test]
fn criterion_4_elimination_preservation() {
    let f = fixture("thm1-felim");
    assert_eq!(f.drills.len(), 3);
    let report = verify_fixture(&f, &opts(50)).unwrap();
    for dr in &report.drills {
        assert_eq!(dr.cases, 50, "{}", dr.description);
        assert!(dr.pass, "{}: {:?}", dr.description, dr.failures);
    }
    assert!(report.pass);
    println!(
        "[criterion 4] PASS - marginal preservation and child-CPT equalities on 50 sampled \
         CFD models each for the flu graph (eliminate F | C=0) and the hospital graph \
         (eliminate D | B=0 and E | B=1)"
    );
}

/// State extension preserves every separated certificate: equality of
/// observations always; effects untouched for hidden or non-outcome
/// variables; exact (1-eps)/eps scaling on outcome variables.
#[test]
fn criterion_5_state_extension_preserves_certificates() {
    let mut cases = 0;
    for f in builtin_fixtures() {
        for pair in &f.pairs {
            for eps in ["1/3", "1/2", "2/5"] {
                let sweep = extend_state_sweep(pair, &r(eps)).unwrap();
                for case in sweep {
                    assert!(
                        case.pass,
                        "{}/{} eps={eps} var {} ({}): {}",
                        f.id, pair.label, case.var, case.case, case.detail
                    );
                    cases += 1;
                }
            }
        }
    }
    assert!(cases > 0);
    println!(
        "[criterion 5] PASS - {cases} state-extension cases across every gallery pair \
         (hidden, observed non-outcome, and outcome-scaling branches; eps in {{1/3, 1/2, 2/5}})"
    );
}

/// Permutation conjugation: relabeling states and rewriting treatment,
/// outcome, and constraint contexts leaves effects and constraint
/// satisfaction unchanged -- 20 rounds per pair.
#[test]
fn criterion_6_permutation_conjugation() {
    let mut pairs = 0;
    for f in builtin_fixtures() {
        for (k, pair) in f.pairs.iter().enumerate() {
            let sweep = permutation_sweep(pair, 20, 0xBEE5 + k as u64).unwrap();
            assert_eq!(sweep.len(), 20);
            for case in sweep {
                assert!(
                    case.pass,
                    "{}/{} var {} ({}): {}",
                    f.id, pair.label, case.var, case.case, case.detail
                );
            }
            pairs += 1;
        }
    }
    println!(
        "[criterion 6] PASS - effect values and constraint satisfaction invariant under \
         20 random state relabelings for each of {pairs} gallery pairs"
    );
}

fn random_graph(rng: &mut SplitMix64) -> CausalGraph {
    let n = 2 + rng.next_below(5) as usize; // 2..=6 variables
    let vars: Vec<Variable> = (0..n)
        .map(|i| {
            let card = 2 + rng.next_below(2) as usize; // 2..=3 states
            Variable::new(
                format!("V{i}"),
                (0..card).map(|s| s.to_string()).collect::<Vec<_>>(),
            )
            .unwrap()
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_below(2) == 0 {
                edges.push((format!("V{i}"), format!("V{j}")));
            }
        }
    }
    let mut observed: Vec<String> = (0..n)
        .filter(|_| rng.next_below(4) < 3)
        .map(|i| format!("V{i}"))
        .collect();
    if observed.is_empty() {
        observed.push("V0".to_string());
    }
    CausalGraph::new(vars, edges, observed).unwrap()
}

fn random_model(seed: u64) -> Cbn {
    let mut rng = SplitMix64::new(seed);
    let graph = random_graph(&mut rng);
    sample_constrained(&graph, &[], seed ^ 0x5EED, 50).unwrap()
}

fn ve_matches_oracle(
    model: &Cbn,
    targets: &BTreeSet<String>,
    evidence: &Instantiation,
    order: Option<&[String]>,
) -> bool {
    let oracle = marginal_given(model, targets, evidence).unwrap();
    let ve = eliminate_ve(model, targets, evidence, order).unwrap();
    dist_equal(&oracle, &ve).unwrap()
}

/// Variable elimination equals the enumeration oracle on every fixture
/// pair (observationally and under the pair's intervention) and on 200
/// random small models with random targets, evidence, and orders.
#[test]
fn criterion_7_ve_equals_enumeration() {
    let mut fixture_checks = 0;
    for f in builtin_fixtures() {
        for pair in &f.pairs {
            let targets: BTreeSet<String> = pair.outcome.vars().map(String::from).collect();
            for m in [&pair.model_a, &pair.model_b] {
                assert!(ve_matches_oracle(m, &targets, &pair.treatment, None));
                let mutilated = intervene(m, &pair.treatment).unwrap();
                assert!(ve_matches_oracle(
                    &mutilated,
                    &targets,
                    &pair.treatment,
                    None
                ));
                fixture_checks += 2;
            }
        }
    }
    // the immunity query at the identified treatment state: targets {Y},
    // evidence C=0, X=0, under the corresponding intervention
    {
        let f = fixture("prop9-immunity");
        let treatment = Instantiation::from_pairs([("C", "0"), ("X", "0")]);
        let targets: BTreeSet<String> = ["Y".to_string()].into_iter().collect();
        for m in [&f.pairs[0].model_a, &f.pairs[0].model_b] {
            let mutilated = intervene(m, &treatment).unwrap();
            assert!(ve_matches_oracle(&mutilated, &targets, &treatment, None));
            fixture_checks += 1;
        }
    }

    let mut random_checks = 0;
    for seed in 0..200u64 {
        let model = random_model(seed);
        let mut rng = SplitMix64::new(seed ^ 0xFACE);
        let names: Vec<String> = model
            .graph()
            .variables()
            .iter()
            .map(|v| v.name().to_string())
            .collect();
        // nonempty random target set
        let mut targets: BTreeSet<String> = names
            .iter()
            .filter(|_| rng.next_below(2) == 0)
            .cloned()
            .collect();
        if targets.is_empty() {
            targets.insert(names[0].clone());
        }
        // random evidence; occasionally overlapping the targets, which
        // both paths must report as a point mass
        let mut evidence = Instantiation::empty();
        for name in &names {
            let chance = if targets.contains(name) { 6 } else { 3 };
            if rng.next_below(chance) == 0 {
                let var = model.graph().var(name).unwrap();
                let state = var.states()[rng.next_below(var.card() as u64) as usize].clone();
                evidence = evidence.set(name.clone(), state);
            }
        }
        // half the runs hand VE an explicit random order
        let order: Option<Vec<String>> = if rng.next_below(2) == 0 {
            let mut elim: Vec<String> = names
                .iter()
                .filter(|n| !targets.contains(*n) && evidence.get(n).is_none())
                .cloned()
                .collect();
            for i in (1..elim.len()).rev() {
                let j = rng.next_below((i + 1) as u64) as usize;
                elim.swap(i, j);
            }
            Some(elim)
        } else {
            None
        };
        assert!(
            ve_matches_oracle(&model, &targets, &evidence, order.as_deref()),
            "seed {seed}"
        );
        random_checks += 1;
    }
    println!(
        "[criterion 7] PASS - variable elimination = enumeration oracle on \
         {fixture_checks} fixture queries and {random_checks} random models"
    );
}

/// Regression gate: every built-in fixture verifies end to end.
#[test]
fn gallery_regression_every_fixture_passes() {
    for f in builtin_fixtures() {
        let report = verify_fixture(&f, &opts(25)).unwrap();
        assert!(report.pass, "fixture {} failed: {report:?}", f.id);
    }
    println!("[gallery] PASS - all built-in fixtures verify");
}
