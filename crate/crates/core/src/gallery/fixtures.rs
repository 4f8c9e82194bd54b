//! The built-in certificate gallery.
//!
//! Each fixture encodes one unidentifiability construction: a graph, the
//! constraint set, two explicit parameterizations that agree
//! observationally but split on a target effect, and (where a formula
//! exists) the identification formula that the constrained sampling
//! universe must reproduce. State labels follow the numeral convention
//! used throughout: the named states of the original stories map to
//! "0", "1", ... in declaration order (entry-level -> 0, short -> 0,
//! raining -> 0, low-cost -> 0, true -> 0, severe -> 0, old -> 0).

use super::{CertificatePair, Drill, EstimandSpec, Expectation, Fixture, SamplingSpec};
use crate::constraints::Constraint;
use crate::model::{build_model, cpt_from_fn, CausalGraph, Cbn, Cpt, Instantiation, Variable};
use crate::rat::{parse_rat, Rat};
use std::collections::BTreeMap;

fn r(s: &str) -> Rat {
    parse_rat(s).unwrap()
}

fn v(name: &str, card: usize) -> Variable {
    let states: Vec<String> = (0..card).map(|i| i.to_string()).collect();
    Variable::new(name, states).unwrap()
}

fn edges(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter()
        .map(|(p, c)| (p.to_string(), c.to_string()))
        .collect()
}

fn inst(pairs: &[(&str, &str)]) -> Instantiation {
    Instantiation::from_pairs(pairs.iter().copied())
}

fn bind(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn uniform(n: usize) -> Vec<Rat> {
    (0..n).map(|_| Rat::new(1, n as u64)).collect()
}

fn point(n: usize, hit: usize) -> Vec<Rat> {
    (0..n)
        .map(|i| if i == hit { Rat::one() } else { Rat::zero() })
        .collect()
}

/// Binary row with mass 99/100 on `hit`.
fn skew(hit: usize) -> Vec<Rat> {
    if hit == 0 {
        vec![r("0.99"), r("0.01")]
    } else {
        vec![r("0.01"), r("0.99")]
    }
}

fn model(graph: &CausalGraph, cpts: Vec<Cpt>) -> Cbn {
    build_model(graph.clone(), cpts).unwrap()
}

// ---------------------------------------------------------------------------
// Salary (CSI separates state-based from variable-based identifiability)

fn salary_graph(j_card: usize) -> CausalGraph {
    CausalGraph::new(
        vec![v("A", 2), v("D", 2), v("Y", 2), v("J", j_card), v("S", 2)],
        edges(&[
            ("A", "Y"),
            ("A", "J"),
            ("D", "J"),
            ("D", "S"),
            ("Y", "S"),
            ("J", "S"),
        ]),
        ["Y", "J", "S"],
    )
    .unwrap()
}

fn salary_csi() -> Constraint {
    Constraint::csi("S", ["D"], inst(&[("J", "0")]), ["Y"])
}

fn salary_pair() -> CertificatePair {
    let g = salary_graph(3);
    let a = cpt_from_fn(&g, "A", &[], |_| uniform(2)).unwrap();
    let d = cpt_from_fn(&g, "D", &[], |_| uniform(2)).unwrap();
    let y = cpt_from_fn(&g, "Y", &["A"], |p| point(2, p.idx("A"))).unwrap();
    let j = cpt_from_fn(&g, "J", &["A", "D"], |p| {
        let hit = (p.idx("A") ^ p.idx("D")) + 1;
        vec![
            r("0.01"),
            if hit == 1 { r("0.99") } else { Rat::zero() },
            if hit == 2 { r("0.99") } else { Rat::zero() },
        ]
    })
    .unwrap();
    let s1 = cpt_from_fn(&g, "S", &["D", "Y", "J"], |p| {
        if p.idx("J") == 0 {
            uniform(2)
        } else {
            skew((p.idx("J") - 1) ^ p.idx("D") ^ p.idx("Y"))
        }
    })
    .unwrap();
    let s2 = cpt_from_fn(&g, "S", &["D", "Y", "J"], |p| {
        if p.idx("J") == 0 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let shared = vec![a, d, y, j];
    let model_a = model(&g, [shared.clone(), vec![s1]].concat());
    let model_b = model(&g, [shared, vec![s2]].concat());
    CertificatePair::new(
        "ternary-job",
        vec![salary_csi()],
        model_a,
        model_b,
        inst(&[("Y", "0")]),
        inst(&[("J", "1"), ("S", "1")]),
        Expectation::Separated,
    )
    .unwrap()
}

fn salary_fixture() -> Fixture {
    Fixture {
        id: "prop2-salary".to_string(),
        notes: "Proposition 2 (salary): under the context-specific independence \
                (S indep D | J=0, Y), the effect of Y=0 on (J=0, S=0) is computable \
                from observation as P(J=0) P(S=0 | Y=0, J=0), while the pair below \
                shows Pr_{Y=0}(J=1, S=1) stays underdetermined, so the variable-level \
                effect of Y on (J, S) is not identifiable. Numeral states: \
                entry-level -> J=0, the treated Y band -> Y=0, low -> S=0."
            .to_string(),
        pairs: vec![salary_pair()],
        sampling: Some(SamplingSpec {
            graph: salary_graph(3),
            constraints: vec![salary_csi()],
        }),
        estimands: vec![EstimandSpec {
            text: "P(J=0) * P(S=0 | Y=0, J=0)".to_string(),
            binding: bind(&[]),
            treatment: inst(&[("Y", "0")]),
            outcome: inst(&[("J", "0"), ("S", "0")]),
        }],
        drills: vec![],
    }
}

// ---------------------------------------------------------------------------
// Flu (CFD separates state-based from variable-based identifiability)

fn flu_graph() -> CausalGraph {
    CausalGraph::new(
        vec![v("C", 2), v("T", 2), v("F", 4), v("D", 2), v("R", 2)],
        edges(&[("C", "F"), ("T", "F"), ("F", "D"), ("F", "R"), ("D", "R")]),
        ["C", "T", "D", "R"],
    )
    .unwrap()
}

fn flu_cfd() -> Constraint {
    Constraint::cfd("F", ["T"], inst(&[("C", "0")]))
}

fn flu_shared(g: &CausalGraph) -> Vec<Cpt> {
    let c = cpt_from_fn(g, "C", &[], |_| uniform(2)).unwrap();
    let t = cpt_from_fn(g, "T", &[], |_| uniform(2)).unwrap();
    let f = cpt_from_fn(g, "F", &["C", "T"], |p| {
        if p.idx("C") == 0 {
            point(4, p.idx("T"))
        } else {
            vec![Rat::zero(), Rat::zero(), r("1/2"), r("1/2")]
        }
    })
    .unwrap();
    let d = cpt_from_fn(g, "D", &["F"], |p| {
        let f = p.idx("F");
        if f < 2 {
            uniform(2)
        } else {
            point(2, f - 2)
        }
    })
    .unwrap();
    vec![c, t, f, d]
}

pub(crate) fn flu_pair() -> CertificatePair {
    let g = flu_graph();
    let r1 = cpt_from_fn(&g, "R", &["D", "F"], |p| {
        let f = p.idx("F");
        if f < 2 {
            uniform(2)
        } else {
            skew(p.idx("D") ^ (f - 2))
        }
    })
    .unwrap();
    let r2 = cpt_from_fn(&g, "R", &["D", "F"], |p| {
        if p.idx("F") < 2 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let model_a = model(&g, [flu_shared(&g), vec![r1]].concat());
    let model_b = model(&g, [flu_shared(&g), vec![r2]].concat());
    CertificatePair::new(
        "quaternary-flu",
        vec![flu_cfd()],
        model_a,
        model_b,
        inst(&[("C", "1"), ("D", "0")]),
        inst(&[("R", "0")]),
        Expectation::Separated,
    )
    .unwrap()
}

fn flu_fixture() -> Fixture {
    Fixture {
        id: "prop4-flu".to_string(),
        notes: "Proposition 4 (flu): with the conditional functional dependency \
                [T, C=0] -> F on the hidden diagnosis, the recovery rate under \
                do(C=0, D=0) is sum_T P(T) P(R=0 | T, C=0, D=0), yet the pair below \
                certifies that Pr_{C=1,D=0}(R=0) is underdetermined, so Pr_{C,D}(R) \
                is not variable-level identifiable. Numeral states: true -> 0 for \
                C, D and R."
            .to_string(),
        pairs: vec![flu_pair()],
        sampling: Some(SamplingSpec {
            graph: flu_graph(),
            constraints: vec![flu_cfd()],
        }),
        estimands: vec![EstimandSpec {
            text: "sum_{T} (P(T) * P(R=0 | T, C=0, D=0))".to_string(),
            binding: bind(&[]),
            treatment: inst(&[("C", "0"), ("D", "0")]),
            outcome: inst(&[("R", "0")]),
        }],
        drills: vec![],
    }
}

// ---------------------------------------------------------------------------
// Flight with hidden country (CSIs plus a binary state declaration make
// the whole effect identifiable)

fn flight_ab_graph(a_card: usize) -> CausalGraph {
    CausalGraph::new(
        vec![v("U", 2), v("A", a_card), v("X", 2), v("Y", 2)],
        edges(&[("U", "X"), ("A", "X"), ("U", "Y"), ("X", "Y"), ("A", "Y")]),
        ["A", "X", "Y"],
    )
    .unwrap()
}

fn flight_ab_csis() -> Vec<Constraint> {
    vec![
        Constraint::csi("X", ["U"], inst(&[("A", "0")]), Vec::<String>::new()),
        Constraint::csi("Y", ["U"], inst(&[("A", "1")]), ["X"]),
    ]
}

fn flight_ab_pair() -> CertificatePair {
    let g = flight_ab_graph(3);
    let u = cpt_from_fn(&g, "U", &[], |_| uniform(2)).unwrap();
    let a = cpt_from_fn(&g, "A", &[], |_| uniform(3)).unwrap();
    let x = cpt_from_fn(&g, "X", &["U", "A"], |p| {
        if p.idx("A") < 2 {
            uniform(2)
        } else {
            point(2, p.idx("U"))
        }
    })
    .unwrap();
    let y1 = cpt_from_fn(&g, "Y", &["U", "X", "A"], |p| {
        if p.idx("A") < 2 {
            uniform(2)
        } else {
            skew(p.idx("U") ^ p.idx("X"))
        }
    })
    .unwrap();
    let y2 = cpt_from_fn(&g, "Y", &["U", "X", "A"], |p| {
        if p.idx("A") < 2 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let shared = vec![u, a, x];
    let model_a = model(&g, [shared.clone(), vec![y1]].concat());
    let model_b = model(&g, [shared, vec![y2]].concat());
    CertificatePair::new(
        "ternary-schedule",
        flight_ab_csis(),
        model_a,
        model_b,
        inst(&[("X", "0")]),
        inst(&[("Y", "0")]),
        Expectation::Separated,
    )
    .unwrap()
}

fn flight_ab_fixture() -> Fixture {
    let mut constraints = flight_ab_csis();
    constraints.push(Constraint::state_domain("A", ["0", "1"]));
    let mut estimands = Vec::new();
    for x in ["0", "1"] {
        for y in ["0", "1"] {
            estimands.push(EstimandSpec {
                text: "P(A=0) * P(Y=$y | X=$x, A=0) + P(A=1) * P(Y=$y | X=$x, A=1)".to_string(),
                binding: bind(&[("x", x), ("y", y)]),
                treatment: inst(&[("X", x)]),
                outcome: inst(&[("Y", y)]),
            });
        }
    }
    Fixture {
        id: "flight-binary-a".to_string(),
        notes: "Flight delays with hidden country of departure: under the two \
                context-specific independences (X indep U | A=0) and \
                (Y indep U | X, A=1) alone no effect of X on Y is identifiable \
                (the ternary-A pair below separates), but once A is declared \
                binary the mixture P(A=0) P(Y | X, A=0) + P(A=1) P(Y | X, A=1) \
                computes Pr_x(y) for all four state pairs. Numeral states: \
                short -> A=0, long -> A=1."
            .to_string(),
        pairs: vec![flight_ab_pair()],
        sampling: Some(SamplingSpec {
            graph: flight_ab_graph(2),
            constraints,
        }),
        estimands,
        drills: vec![],
    }
}

// ---------------------------------------------------------------------------
// Detailed flight (CSIs plus a state declaration give state-based but
// not variable-based identifiability)

fn flight_graph(b_card: usize, x_card: usize) -> CausalGraph {
    CausalGraph::new(
        vec![
            v("U1", 2),
            v("U2", 2),
            v("U3", 2),
            v("B", b_card),
            v("X", x_card),
            v("A", 2),
            v("Y", 2),
        ],
        edges(&[
            ("U1", "X"),
            ("U3", "X"),
            ("U1", "A"),
            ("U2", "A"),
            ("X", "A"),
            ("U2", "Y"),
            ("U3", "Y"),
            ("A", "Y"),
            ("B", "Y"),
        ]),
        ["B", "X", "A", "Y"],
    )
    .unwrap()
}

fn flight_csis() -> Vec<Constraint> {
    vec![
        Constraint::csi("A", ["U1"], inst(&[("X", "0")]), ["U2"]),
        Constraint::csi("Y", ["U3"], inst(&[("B", "0")]), ["U2", "A"]),
        Constraint::csi("Y", ["A"], inst(&[("B", "1")]), ["U2", "U3"]),
    ]
}

/// First pair: B has a third state carrying 9/10 of the mass; no state
/// declaration is assumed. The source construction's 0.99/0.01 case rows
/// are gated on the heavy third state (they are stated for B=1 there,
/// which collides with the B=1 context of the third independence; the
/// B=2 reading is the consistent one and is what this fixture encodes).
fn flight_pair_ternary_b() -> CertificatePair {
    let g = flight_graph(3, 2);
    let u1 = cpt_from_fn(&g, "U1", &[], |_| uniform(2)).unwrap();
    let u2 = cpt_from_fn(&g, "U2", &[], |_| uniform(2)).unwrap();
    let u3 = cpt_from_fn(&g, "U3", &[], |_| uniform(2)).unwrap();
    let b = cpt_from_fn(&g, "B", &[], |_| vec![r("0.05"), r("0.05"), r("0.9")]).unwrap();
    let x = cpt_from_fn(&g, "X", &["U1", "U3"], |p| point(2, p.idx("U3"))).unwrap();
    let a = cpt_from_fn(&g, "A", &["U1", "U2", "X"], |p| {
        point(2, p.idx("U2") ^ p.idx("X"))
    })
    .unwrap();
    let y1 = cpt_from_fn(&g, "Y", &["U2", "U3", "A", "B"], |p| {
        if p.idx("B") < 2 {
            uniform(2)
        } else {
            skew(p.idx("U2") ^ p.idx("A") ^ p.idx("U3"))
        }
    })
    .unwrap();
    let y2 = cpt_from_fn(&g, "Y", &["U2", "U3", "A", "B"], |p| {
        if p.idx("B") < 2 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let shared = vec![u1, u2, u3, b, x, a];
    let model_a = model(&g, [shared.clone(), vec![y1]].concat());
    let model_b = model(&g, [shared, vec![y2]].concat());
    CertificatePair::new(
        "ternary-weather",
        flight_csis(),
        model_a,
        model_b,
        inst(&[("X", "0")]),
        inst(&[("Y", "0")]),
        Expectation::Separated,
    )
    .unwrap()
}

/// Second pair: B is binary (the state declaration holds) but X has a
/// third state, separating Pr_{X=1}(Y=1). The source construction's
/// f(Y) reads 0.99 when A=Y with no case on B, which would contradict
/// the independence (Y indep A | B=1, ..); the fixture gates the
/// A-channel on B=0 and keeps B=1 rows flat, which preserves both the
/// observational agreement and the separation.
fn flight_pair_ternary_x() -> CertificatePair {
    let g = flight_graph(2, 3);
    let u1 = cpt_from_fn(&g, "U1", &[], |_| uniform(2)).unwrap();
    let u2 = cpt_from_fn(&g, "U2", &[], |_| uniform(2)).unwrap();
    let u3 = cpt_from_fn(&g, "U3", &[], |_| uniform(2)).unwrap();
    let b = cpt_from_fn(&g, "B", &[], |_| uniform(2)).unwrap();
    let x = cpt_from_fn(&g, "X", &["U1", "U3"], |p| {
        if p.idx("U1") == 0 {
            vec![r("0.05"), r("0.95"), Rat::zero()]
        } else {
            vec![r("0.05"), Rat::zero(), r("0.95")]
        }
    })
    .unwrap();
    let y = cpt_from_fn(&g, "Y", &["U2", "U3", "A", "B"], |p| {
        if p.idx("B") == 1 {
            uniform(2)
        } else {
            skew(p.idx("A"))
        }
    })
    .unwrap();
    let a1 = cpt_from_fn(&g, "A", &["U1", "U2", "X"], |p| {
        let x = p.idx("X");
        if x == 0 {
            uniform(2)
        } else {
            skew((x - 1) ^ p.idx("U1"))
        }
    })
    .unwrap();
    let a2 = cpt_from_fn(&g, "A", &["U1", "U2", "X"], |p| {
        if p.idx("X") == 0 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let shared = vec![u1, u2, u3, b, x, y];
    let model_a = model(&g, [shared.clone(), vec![a1]].concat());
    let model_b = model(&g, [shared, vec![a2]].concat());
    let mut constraints = flight_csis();
    constraints.push(Constraint::state_domain("B", ["0", "1"]));
    CertificatePair::new(
        "ternary-cost",
        constraints,
        model_a,
        model_b,
        inst(&[("X", "1")]),
        inst(&[("Y", "1")]),
        Expectation::Separated,
    )
    .unwrap()
}

fn flight_fixture() -> Fixture {
    let mut constraints = flight_csis();
    constraints.push(Constraint::state_domain("B", ["0", "1"]));
    Fixture {
        id: "prop6-flight".to_string(),
        notes: "Proposition 6 (detailed flight delays): three context-specific \
                independences and the declaration that weather B is binary make \
                Pr_{X=0}(Y=0) computable as \
                sum_A P(A|X=0) P(Y=0|A,B=0,X=0) P(B=0) + P(Y=0,B=1), while \
                Pr_{X=1}(Y=1) stays underdetermined, so Pr_X(Y) is not \
                variable-level identifiable even with the state declaration. \
                Numeral states: low-cost -> X=0, raining -> B=0, snowing -> B=1. \
                Both pairs adjust case rows that the source construction states \
                inconsistently; see the pair doc comments in the builder."
            .to_string(),
        pairs: vec![flight_pair_ternary_b(), flight_pair_ternary_x()],
        sampling: Some(SamplingSpec {
            graph: flight_graph(2, 2),
            constraints,
        }),
        estimands: vec![EstimandSpec {
            text: "sum_{A} (P(A | X=0) * P(Y=0 | A, B=0, X=0)) * P(B=0) + P(Y=0, B=1)".to_string(),
            binding: bind(&[]),
            treatment: inst(&[("X", "0")]),
            outcome: inst(&[("Y", "0")]),
        }],
        drills: vec![],
    }
}

// ---------------------------------------------------------------------------
// Hospital (CFDs plus a state declaration give full identifiability)

fn hospital_graph(b_card: usize, de_card: usize) -> CausalGraph {
    CausalGraph::new(
        vec![
            v("A", 2),
            v("B", b_card),
            v("C", 2),
            v("D", de_card),
            v("E", de_card),
            v("X", 2),
            v("F", 2),
            v("Y", 2),
        ],
        edges(&[
            ("A", "D"),
            ("B", "D"),
            ("B", "E"),
            ("C", "E"),
            ("D", "X"),
            ("D", "F"),
            ("E", "F"),
            ("X", "Y"),
            ("E", "Y"),
            ("F", "Y"),
        ]),
        ["A", "B", "C", "X", "F", "Y"],
    )
    .unwrap()
}

fn hospital_cfds() -> Vec<Constraint> {
    vec![
        Constraint::cfd("D", ["A"], inst(&[("B", "0")])),
        Constraint::cfd("E", ["C"], inst(&[("B", "1")])),
    ]
}

fn hospital_pair() -> CertificatePair {
    let g = hospital_graph(3, 4);
    let a = cpt_from_fn(&g, "A", &[], |_| uniform(2)).unwrap();
    let b = cpt_from_fn(&g, "B", &[], |_| uniform(3)).unwrap();
    let c = cpt_from_fn(&g, "C", &[], |_| uniform(2)).unwrap();
    let d = cpt_from_fn(&g, "D", &["A", "B"], |p| match p.idx("B") {
        0 => point(4, p.idx("A")),
        1 => vec![r("1/2"), r("1/2"), Rat::zero(), Rat::zero()],
        _ => vec![Rat::zero(), Rat::zero(), r("1/2"), r("1/2")],
    })
    .unwrap();
    let e = cpt_from_fn(&g, "E", &["B", "C"], |p| match p.idx("B") {
        1 => point(4, p.idx("C")),
        0 => vec![r("1/2"), r("1/2"), Rat::zero(), Rat::zero()],
        _ => vec![Rat::zero(), Rat::zero(), r("1/2"), r("1/2")],
    })
    .unwrap();
    let x = cpt_from_fn(&g, "X", &["D"], |p| {
        let d = p.idx("D");
        if d < 2 {
            uniform(2)
        } else {
            point(2, d - 2)
        }
    })
    .unwrap();
    let f = cpt_from_fn(&g, "F", &["D", "E"], |p| {
        let (d, e) = (p.idx("D"), p.idx("E"));
        if d < 2 || e < 2 {
            uniform(2)
        } else {
            point(2, (d - 2) ^ (e - 2))
        }
    })
    .unwrap();
    let y1 = cpt_from_fn(&g, "Y", &["X", "E", "F"], |p| {
        let e = p.idx("E");
        if e < 2 {
            uniform(2)
        } else {
            skew((e - 2) ^ p.idx("F") ^ p.idx("X"))
        }
    })
    .unwrap();
    let y2 = cpt_from_fn(&g, "Y", &["X", "E", "F"], |p| {
        if p.idx("E") < 2 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let shared = vec![a, b, c, d, e, x, f];
    let model_a = model(&g, [shared.clone(), vec![y1]].concat());
    let model_b = model(&g, [shared, vec![y2]].concat());
    CertificatePair::new(
        "ternary-age",
        hospital_cfds(),
        model_a,
        model_b,
        inst(&[("X", "0")]),
        inst(&[("Y", "0")]),
        Expectation::Separated,
    )
    .unwrap()
}

const HOSPITAL_FORMULA: &str = "P(B=0) * sum_{A,C} (P(A) * P(C) * sum_{F} (P(F | A, B=0, C) \
     * P(Y=$Y | A, B=0, C, F, X=$X))) \
     + P(B=1) * sum_{A,C} (P(A) * P(C) * sum_{F} (P(Y=$Y | B=1, C, X=$X, F) \
     * sum_{X} (P(F | A, B=1, C, X) * P(X | A, B=1))))";

fn hospital_fixture() -> Fixture {
    let mut constraints = hospital_cfds();
    constraints.push(Constraint::state_domain("B", ["0", "1"]));
    let mut estimands = Vec::new();
    for x in ["0", "1"] {
        for y in ["0", "1"] {
            estimands.push(EstimandSpec {
                text: HOSPITAL_FORMULA.to_string(),
                binding: bind(&[("X", x), ("Y", y)]),
                treatment: inst(&[("X", x)]),
                outcome: inst(&[("Y", y)]),
            });
        }
    }
    Fixture {
        id: "prop7-hospital".to_string(),
        notes: "Proposition 7 (hospital): with the conditional dependencies \
                [A, B=0] -> D and [C, B=1] -> E on the hidden severity scores \
                and age B declared binary, Pr_x(y) splits over the age branches; \
                the B=1 branch resolves through an inner sum over X that shadows \
                the treatment placeholder. Each branch carries its root weight \
                P(B=b). Without the binary-age declaration the ternary-age pair \
                below separates Pr_{X=0}(Y=0). Numeral states: old -> B=0, \
                young -> B=1."
            .to_string(),
        pairs: vec![hospital_pair()],
        sampling: Some(SamplingSpec {
            graph: hospital_graph(2, 2),
            constraints,
        }),
        estimands,
        drills: vec![],
    }
}

// ---------------------------------------------------------------------------
// Immunity (CFDs plus a state declaration give state-based but not
// variable-based identifiability)

fn immunity_graph(g_card: usize) -> CausalGraph {
    CausalGraph::new(
        vec![
            v("A", 2),
            v("B", 2),
            v("C", 2),
            v("D", 2),
            v("E", 2),
            v("G", g_card),
            v("X", 2),
            v("F", 2),
            v("Y", 2),
        ],
        edges(&[
            ("A", "D"),
            ("B", "D"),
            ("B", "E"),
            ("C", "E"),
            ("A", "G"),
            ("C", "G"),
            ("D", "X"),
            ("G", "X"),
            ("D", "F"),
            ("E", "F"),
            ("X", "Y"),
            ("E", "Y"),
            ("F", "Y"),
            ("G", "Y"),
        ]),
        ["A", "B", "C", "X", "F", "Y"],
    )
    .unwrap()
}

fn immunity_cfds() -> Vec<Constraint> {
    vec![
        Constraint::cfd("D", ["A"], inst(&[("B", "0")])),
        Constraint::cfd("E", ["C"], inst(&[("B", "1")])),
        Constraint::cfd("G", ["A"], inst(&[("C", "0")])),
    ]
}

fn immunity_pair() -> CertificatePair {
    let g = immunity_graph(4);
    let a = cpt_from_fn(&g, "A", &[], |_| uniform(2)).unwrap();
    let b = cpt_from_fn(&g, "B", &[], |_| uniform(2)).unwrap();
    let c = cpt_from_fn(&g, "C", &[], |_| uniform(2)).unwrap();
    let d = cpt_from_fn(&g, "D", &["A", "B"], |p| {
        if p.idx("B") == 0 {
            point(2, p.idx("A"))
        } else {
            uniform(2)
        }
    })
    .unwrap();
    let e = cpt_from_fn(&g, "E", &["B", "C"], |p| {
        if p.idx("B") == 1 {
            point(2, p.idx("C"))
        } else {
            uniform(2)
        }
    })
    .unwrap();
    let gg = cpt_from_fn(&g, "G", &["A", "C"], |p| {
        if p.idx("C") == 0 {
            point(4, p.idx("A"))
        } else {
            vec![Rat::zero(), Rat::zero(), r("1/2"), r("1/2")]
        }
    })
    .unwrap();
    let x = cpt_from_fn(&g, "X", &["D", "G"], |p| {
        let gv = p.idx("G");
        if gv < 2 {
            uniform(2)
        } else {
            point(2, gv - 2)
        }
    })
    .unwrap();
    let f = cpt_from_fn(&g, "F", &["D", "E"], |_| uniform(2)).unwrap();
    let y1 = cpt_from_fn(&g, "Y", &["X", "E", "F", "G"], |p| {
        let gv = p.idx("G");
        if gv < 2 {
            uniform(2)
        } else {
            skew((gv - 2) ^ p.idx("X"))
        }
    })
    .unwrap();
    let y2 = cpt_from_fn(&g, "Y", &["X", "E", "F", "G"], |p| {
        if p.idx("G") < 2 {
            uniform(2)
        } else {
            skew(0)
        }
    })
    .unwrap();
    let shared = vec![a, b, c, d, e, gg, x, f];
    let model_a = model(&g, [shared.clone(), vec![y1]].concat());
    let model_b = model(&g, [shared, vec![y2]].concat());
    let mut constraints = immunity_cfds();
    constraints.push(Constraint::state_domain("B", ["0", "1"]));
    CertificatePair::new(
        "quaternary-immunity",
        constraints,
        model_a,
        model_b,
        inst(&[("C", "1"), ("X", "0")]),
        inst(&[("Y", "0")]),
        Expectation::Separated,
    )
    .unwrap()
}

const IMMUNITY_FORMULA: &str = "P(B=0) * sum_{A} (P(A) * sum_{F} (P(F | A, B=0, C=0) \
     * P(Y=0 | A, B=0, C=0, F, X=0))) \
     + P(B=1) * sum_{A} (P(A) * sum_{F} (P(Y=0 | A, B=1, C=0, F, X=0) \
     * P(F | A, B=1, C=0)))";

fn immunity_fixture() -> Fixture {
    let mut constraints = immunity_cfds();
    constraints.push(Constraint::state_domain("B", ["0", "1"]));
    Fixture {
        id: "prop9-immunity".to_string(),
        notes: "Proposition 9 (immunity): adding the hidden immunity score G with \
                [A, C=0] -> G keeps Pr_{C=0,X=0}(Y=0) identifiable when age B is \
                binary (each branch of the formula carries its root weight \
                P(B=b)), while the quaternary-immunity pair below separates \
                Pr_{C=1,X=0}(Y=0) under the same constraints, so the \
                variable-level effect of (C, X) on Y stays unidentifiable. \
                Numeral states: severe -> C=0, yes -> X=0, Y=0."
            .to_string(),
        pairs: vec![immunity_pair()],
        sampling: Some(SamplingSpec {
            graph: immunity_graph(2),
            constraints,
        }),
        estimands: vec![EstimandSpec {
            text: IMMUNITY_FORMULA.to_string(),
            binding: bind(&[]),
            treatment: inst(&[("C", "0"), ("X", "0")]),
            outcome: inst(&[("Y", "0")]),
        }],
        drills: vec![],
    }
}

// ---------------------------------------------------------------------------
// Functional-elimination and state-extension demonstrations

fn felim_fixture() -> Fixture {
    Fixture {
        id: "thm1-felim".to_string(),
        notes: "Theorem 1 / Corollary 1 demonstration: on sampled models \
                satisfying a conditional functional dependency, functionally \
                eliminating the dependent variable preserves the observational \
                marginal on every instantiation consistent with the context, and \
                the rewritten child CPTs equal the original conditionals there."
            .to_string(),
        pairs: vec![],
        sampling: None,
        estimands: vec![],
        drills: vec![
            Drill::MarginalPreservation {
                graph: flu_graph(),
                constraints: vec![flu_cfd()],
                var: "F".to_string(),
                context: inst(&[("C", "0")]),
                samples: 50,
            },
            Drill::MarginalPreservation {
                graph: hospital_graph(2, 2),
                constraints: hospital_cfds(),
                var: "D".to_string(),
                context: inst(&[("B", "0")]),
                samples: 50,
            },
            Drill::MarginalPreservation {
                graph: hospital_graph(2, 2),
                constraints: hospital_cfds(),
                var: "E".to_string(),
                context: inst(&[("B", "1")]),
                samples: 50,
            },
        ],
    }
}

fn extend_fixture() -> Fixture {
    Fixture {
        id: "lemma1-extend".to_string(),
        notes: "Lemma 1 demonstration: splitting any variable's state mass \
                (1-eps)/eps onto a fresh clone state preserves a certificate \
                pair — observational equality always, effect values exactly when \
                the variable sits outside the outcome, and exact (1-eps)/eps \
                scaling when it carries an outcome state. The surrounding \
                equivalence claim (state declarations alone never change \
                identifiability on graphs whose hidden variables are roots with \
                two children) is represented only by this drill; its universal \
                quantification over all graphs is out of scope."
            .to_string(),
        pairs: vec![flu_pair()],
        sampling: None,
        estimands: vec![],
        drills: vec![Drill::StateExtension { eps: r("1/3") }],
    }
}

/// Every built-in fixture, in gallery order.
pub fn builtin_fixtures() -> Vec<Fixture> {
    vec![
        salary_fixture(),
        flu_fixture(),
        flight_ab_fixture(),
        flight_fixture(),
        hospital_fixture(),
        immunity_fixture(),
        felim_fixture(),
        extend_fixture(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{verify_fixture, verify_pair, VerifyOpts};
    use crate::inference::{causal_effect, joint, marginal};
    use crate::model::Instantiation;
    use std::collections::BTreeSet;

    fn quick_opts() -> VerifyOpts {
        VerifyOpts {
            samples: 5,
            seed: 7,
            eps: r("1/3"),
        }
    }

    #[test]
    fn ids_are_unique() {
        let fixtures = builtin_fixtures();
        let ids: BTreeSet<&str> = fixtures.iter().map(|f| f.id.as_str()).collect();
        assert_eq!(ids.len(), fixtures.len());
    }

    #[test]
    fn salary_pair_effects_match_hand_computation() {
        let report = verify_pair(&salary_pair()).unwrap();
        assert!(report.pass);
        assert_eq!(report.effect_a, r("99/400"));
        assert_eq!(report.effect_b, r("99/20000"));
    }

    #[test]
    fn salary_observational_facts() {
        let pair = salary_pair();
        // every row of f(J | A, D) puts 1/100 on J=0
        let targets: BTreeSet<String> = ["J".to_string()].into_iter().collect();
        let dist = marginal(&pair.model_a, &targets).unwrap();
        assert_eq!(
            dist.get(&Instantiation::from_pairs([("J", "0")])).unwrap(),
            &r("1/100")
        );
        // the independent naive loop: brute-force sum over the hidden
        // uniform roots of f(J=0 | A, D)
        let mut by_hand = Rat::zero();
        for a in 0..2u64 {
            for d in 0..2u64 {
                let _ = (a, d);
                by_hand += &(&r("1/4") * &r("1/100"));
            }
        }
        assert_eq!(by_hand, r("1/100"));
        // P(S=0 | Y=0, J=0) reads the constant 1/2 row
        let cond = crate::inference::conditional(
            &pair.model_a,
            &Instantiation::from_pairs([("S", "0")]),
            &Instantiation::from_pairs([("Y", "0"), ("J", "0")]),
        )
        .unwrap();
        assert_eq!(cond, r("1/2"));
    }

    #[test]
    fn flu_pair_marginals_match_the_stated_values() {
        let pair = flu_pair();
        let report = verify_pair(&pair).unwrap();
        assert!(report.pass);
        assert_eq!(report.effect_a, r("1/2"));
        assert_eq!(report.effect_b, r("99/100"));
        for (inst, value) in report.observational.iter() {
            match (inst.get("C").unwrap(), inst.get("R").unwrap()) {
                ("0", _) => assert_eq!(value, &r("1/16")),
                ("1", "0") => assert_eq!(value, &r("99/800")),
                ("1", "1") => assert_eq!(value, &r("1/800")),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn flu_joint_equals_independent_product_loop() {
        // second, CPT-free enumeration of the same joint
        let pair = flu_pair();
        let full = joint(&pair.model_a).unwrap();
        let states = |n: usize| (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        let mut total = Rat::zero();
        for c in states(2) {
            for t in states(2) {
                for f in states(4) {
                    for d in states(2) {
                        for rr in states(2) {
                            let ci: usize = c.parse().unwrap();
                            let ti: usize = t.parse().unwrap();
                            let fi: usize = f.parse().unwrap();
                            let di: usize = d.parse().unwrap();
                            let ri: usize = rr.parse().unwrap();
                            let p_f = if ci == 0 {
                                if fi == ti {
                                    Rat::one()
                                } else {
                                    Rat::zero()
                                }
                            } else if fi >= 2 {
                                r("1/2")
                            } else {
                                Rat::zero()
                            };
                            let p_d = if fi < 2 {
                                r("1/2")
                            } else if di == fi - 2 {
                                Rat::one()
                            } else {
                                Rat::zero()
                            };
                            let p_r = if fi < 2 {
                                r("1/2")
                            } else if ri == di ^ (fi - 2) {
                                r("0.99")
                            } else {
                                r("0.01")
                            };
                            let prob = &(&(&r("1/4") * &p_f) * &p_d) * &p_r;
                            let inst = Instantiation::from_pairs([
                                ("C", c.as_str()),
                                ("T", t.as_str()),
                                ("F", f.as_str()),
                                ("D", d.as_str()),
                                ("R", rr.as_str()),
                            ]);
                            assert_eq!(full.get(&inst).unwrap(), &prob);
                            total += &prob;
                        }
                    }
                }
            }
        }
        assert!(total.is_one());
    }

    #[test]
    fn flight_ab_pair_separates_at_the_stated_values() {
        let report = verify_pair(&flight_ab_pair()).unwrap();
        assert!(report.pass);
        assert_eq!(report.effect_a, r("1/2"));
        assert_eq!(report.effect_b, r("199/300"));
    }

    #[test]
    fn flight_pairs_separate() {
        let report = verify_pair(&flight_pair_ternary_b()).unwrap();
        assert!(report.pass, "ternary-weather: {report:?}");
        assert_eq!(report.effect_a, r("1/2"));
        assert_eq!(report.effect_b, r("941/1000"));
        let report = verify_pair(&flight_pair_ternary_x()).unwrap();
        assert!(report.pass, "ternary-cost: {report:?}");
        assert_eq!(report.effect_a, r("1/2"));
        assert_eq!(report.effect_b, r("2599/10000"));
    }

    #[test]
    fn hospital_pair_separates() {
        let report = verify_pair(&hospital_pair()).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.effect_a, r("1/2"));
        assert_eq!(report.effect_b, r("199/300"));
    }

    #[test]
    fn immunity_pair_separates() {
        let report = verify_pair(&immunity_pair()).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.effect_a, r("1/2"));
        assert_eq!(report.effect_b, r("99/100"));
    }

    #[test]
    fn hospital_effect_from_the_oracle() {
        let pair = hospital_pair();
        let effect = causal_effect(
            &pair.model_a,
            &Instantiation::from_pairs([("X", "0")]),
            &Instantiation::from_pairs([("Y", "0")]),
        )
        .unwrap();
        assert_eq!(effect, r("1/2"));
    }

    #[test]
    fn trivial_pair_is_not_separated() {
        let flu = flu_pair();
        let same = CertificatePair::new(
            "identical",
            flu.constraints.clone(),
            flu.model_a.clone(),
            flu.model_a.clone(),
            flu.treatment.clone(),
            flu.outcome.clone(),
            Expectation::NotSeparated,
        )
        .unwrap();
        let report = verify_pair(&same).unwrap();
        assert!(report.pass);
        assert!(!report.separated);
    }

    #[test]
    fn empty_fixture_passes_trivially() {
        let empty = Fixture {
            id: "empty".to_string(),
            notes: String::new(),
            pairs: vec![],
            sampling: None,
            estimands: vec![],
            drills: vec![],
        };
        let report = verify_fixture(&empty, &quick_opts()).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn salary_joint_equals_independent_product_loop() {
        // second enumeration, straight from the case analysis
        let pair = salary_pair();
        let full = joint(&pair.model_a).unwrap();
        let mut total = Rat::zero();
        for a in 0..2usize {
            for d in 0..2usize {
                for y in 0..2usize {
                    for j in 0..3usize {
                        for s in 0..2usize {
                            let p_y = if y == a { Rat::one() } else { Rat::zero() };
                            let p_j = if j == 0 {
                                r("1/100")
                            } else if (a ^ d) == j - 1 {
                                r("99/100")
                            } else {
                                Rat::zero()
                            };
                            let p_s = if j == 0 {
                                r("1/2")
                            } else if ((j - 1) ^ d ^ y) == s {
                                r("99/100")
                            } else {
                                r("1/100")
                            };
                            let prob = &(&(&r("1/4") * &p_y) * &p_j) * &p_s;
                            let inst = Instantiation::from_pairs([
                                ("A", a.to_string()),
                                ("D", d.to_string()),
                                ("Y", y.to_string()),
                                ("J", j.to_string()),
                                ("S", s.to_string()),
                            ]);
                            assert_eq!(full.get(&inst).unwrap(), &prob, "at {inst}");
                            total += &prob;
                        }
                    }
                }
            }
        }
        assert!(total.is_one());
    }

    #[test]
    fn interventional_distributions_of_a_pair_differ() {
        // observational marginals agree but the post-intervention
        // distributions split, entrywise
        let pair = flight_ab_pair();
        let targets: std::collections::BTreeSet<String> =
            ["Y".to_string()].into_iter().collect();
        let post_a =
            marginal(&crate::inference::intervene(&pair.model_a, &pair.treatment).unwrap(), &targets)
                .unwrap();
        let post_b =
            marginal(&crate::inference::intervene(&pair.model_b, &pair.treatment).unwrap(), &targets)
                .unwrap();
        assert!(!crate::inference::dist_equal(&post_a, &post_b).unwrap());
    }

    #[test]
    fn swapped_cfd_contexts_are_violations() {
        // the hospital CPTs are deterministic at B=0 for D and B=1 for E;
        // swapping the contexts must surface soft rows
        let pair = hospital_pair();
        let swapped = vec![
            Constraint::cfd("D", ["A"], inst(&[("B", "1")])),
            Constraint::cfd("E", ["C"], inst(&[("B", "0")])),
        ];
        let report = crate::constraints::check_all(&pair.model_a, &swapped).unwrap();
        assert!(!report.is_empty());
    }

    #[test]
    fn flu_elimination_rewires_to_the_test_variables() {
        use std::collections::BTreeSet;
        let pair = flu_pair();
        let out = crate::transforms::functional_eliminate(&pair.model_a, "F").unwrap();
        let d_parents: BTreeSet<&str> =
            out.graph().parents_of("D").unwrap().into_iter().collect();
        assert_eq!(d_parents, ["C", "T"].into_iter().collect());
        let r_parents: BTreeSet<&str> =
            out.graph().parents_of("R").unwrap().into_iter().collect();
        assert_eq!(r_parents, ["C", "D", "T"].into_iter().collect());
    }

    #[test]
    fn flu_conditional_is_a_ratio_of_marginals() {
        let pair = flu_pair();
        let target = Instantiation::from_pairs([("R", "0")]);
        let given = Instantiation::from_pairs([("T", "0"), ("C", "0"), ("D", "0")]);
        let direct = crate::inference::conditional(&pair.model_a, &target, &given).unwrap();
        // ratio of two marginal calls over {C, T, D, R}
        let scope: std::collections::BTreeSet<String> =
            ["C", "T", "D", "R"].iter().map(|s| s.to_string()).collect();
        let wide = marginal(&pair.model_a, &scope).unwrap();
        let num = wide.mass_consistent_with(
            &Instantiation::from_pairs([("R", "0"), ("T", "0"), ("C", "0"), ("D", "0")]),
        );
        let den = wide.mass_consistent_with(&given);
        assert_eq!(direct, &num / &den);
        assert_eq!(direct, r("1/2"));
    }

    #[test]
    fn salary_row_sum_violation_is_forced() {
        // one entry of the S table nudged from 0.99 to 0.98
        let g = salary_graph(3);
        let a = cpt_from_fn(&g, "A", &[], |_| uniform(2)).unwrap();
        let d = cpt_from_fn(&g, "D", &[], |_| uniform(2)).unwrap();
        let y = cpt_from_fn(&g, "Y", &["A"], |p| point(2, p.idx("A"))).unwrap();
        let j = salary_pair().model_a.cpt("J").unwrap().clone();
        let broken = cpt_from_fn(&g, "S", &["D", "Y", "J"], |p| {
            if p.idx("J") == 0 {
                uniform(2)
            } else if (p.idx("J") - 1) ^ p.idx("D") ^ p.idx("Y") == 0 {
                vec![r("0.98"), r("0.01")]
            } else {
                skew(1)
            }
        })
        .unwrap();
        let err = build_model(g, vec![a, d, y, j, broken]).unwrap_err();
        match err {
            crate::model::ModelError::RowSumNotOne { child, sum, .. } => {
                assert_eq!(child, "S");
                assert_eq!(sum, "99/100");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
