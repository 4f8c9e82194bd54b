//! Parameter-level constraints and a seeded sampler of models that
//! satisfy them.
//!
//! Four constraint forms are supported. For a child Y with parents P:
//!
//! - **CSI** `(Y indep X | c, S)` where `X`, the context variables `C`,
//!   and `S` partition P: every CPT row consistent with the context `c`
//!   must be identical across all states of `X` once the `S` part is
//!   fixed.
//! - **CFD** `[P1, P2 = p2] -> Y` where `P1` and the context variables
//!   `P2` partition P: every row consistent with `p2` is deterministic.
//! - **FD**: the special case of a CFD with an empty context — every row
//!   of the CPT is deterministic.
//! - **StateDomain**: the variable's declared states equal the given
//!   list, compared as sets.
//!
//! These are constraints on CPT parameters, not d-separation statements;
//! their distribution-level consequences are checked in tests by
//! enumeration.

use crate::inference::InferenceError;
use crate::model::{build_model, CausalGraph, Cbn, Cpt, Instantiation, ModelError, Odometer};
use crate::rat::Rat;
use crate::rng::SplitMix64;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("malformed constraint on `{child}`: {reason}")]
    MalformedConstraint { child: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("constraints are syntactically unsatisfiable: {0}")]
    UnsatisfiableSyntactically(String),
    #[error("sampled model has a zero observational entry at {0}")]
    PositivityCheckFailed(String),
    #[error("weight bound must be at least 1")]
    BadWeightBound,
}

/// Context-specific independence `(child indep X | context, S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csi {
    pub child: String,
    pub indep: BTreeSet<String>,
    pub context: Instantiation,
    pub free: BTreeSet<String>,
}

/// Conditional functional dependency `[P1, P2 = p2] -> child`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfd {
    pub child: String,
    pub p1: BTreeSet<String>,
    pub context: Instantiation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Csi(Csi),
    Cfd(Cfd),
    Fd { child: String },
    StateDomain { var: String, states: Vec<String> },
}

impl Constraint {
    pub fn csi(
        child: &str,
        indep: impl IntoIterator<Item = impl Into<String>>,
        context: Instantiation,
        free: impl IntoIterator<Item = impl Into<String>>,
    ) -> Constraint {
        Constraint::Csi(Csi {
            child: child.to_string(),
            indep: indep.into_iter().map(Into::into).collect(),
            context,
            free: free.into_iter().map(Into::into).collect(),
        })
    }

    pub fn cfd(
        child: &str,
        p1: impl IntoIterator<Item = impl Into<String>>,
        context: Instantiation,
    ) -> Constraint {
        Constraint::Cfd(Cfd {
            child: child.to_string(),
            p1: p1.into_iter().map(Into::into).collect(),
            context,
        })
    }

    pub fn fd(child: &str) -> Constraint {
        Constraint::Fd {
            child: child.to_string(),
        }
    }

    pub fn state_domain(
        var: &str,
        states: impl IntoIterator<Item = impl Into<String>>,
    ) -> Constraint {
        Constraint::StateDomain {
            var: var.to_string(),
            states: states.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Csi(c) => {
                let indep: Vec<&str> = c.indep.iter().map(String::as_str).collect();
                let free: Vec<&str> = c.free.iter().map(String::as_str).collect();
                write!(
                    f,
                    "csi({} indep {} | {}{}{})",
                    c.child,
                    indep.join(","),
                    c.context,
                    if free.is_empty() { "" } else { ", " },
                    free.join(",")
                )
            }
            Constraint::Cfd(c) => {
                let p1: Vec<&str> = c.p1.iter().map(String::as_str).collect();
                write!(f, "cfd([{}, {}] -> {})", p1.join(","), c.context, c.child)
            }
            Constraint::Fd { child } => write!(f, "fd({child})"),
            Constraint::StateDomain { var, states } => {
                write!(f, "states({var} in {{{}}})", states.join(","))
            }
        }
    }
}

/// One concrete way a model falls short of a constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A CSI row differs across two states of the independent set:
    /// recorded as the shared (context and free) part, the two indep
    /// parts, and the child state where the rows disagree.
    CsiMismatch {
        child: String,
        at: Instantiation,
        reference: Instantiation,
        offending: Instantiation,
        state: String,
    },
    /// A row that a CFD or FD requires to be deterministic is not.
    NotDeterministic { child: String, row: Instantiation },
    /// Declared states do not match the required set.
    StateDomainMismatch {
        var: String,
        expected: Vec<String>,
        actual: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CsiMismatch {
                child,
                at,
                reference,
                offending,
                state,
            } => write!(
                f,
                "csi violation on `{child}` at {at}: rows {reference} and {offending} differ at state {state}"
            ),
            Violation::NotDeterministic { child, row } => {
                write!(f, "`{child}` is not deterministic at row {row}")
            }
            Violation::StateDomainMismatch {
                var,
                expected,
                actual,
            } => write!(
                f,
                "`{var}` has states {{{}}}, required {{{}}}",
                actual.join(","),
                expected.join(",")
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "all constraints satisfied");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn malformed(child: &str, reason: impl Into<String>) -> ConstraintError {
    ConstraintError::MalformedConstraint {
        child: child.to_string(),
        reason: reason.into(),
    }
}

/// Checks that the named groups plus the context variables exactly
/// partition the child's parents.
fn check_partition(
    graph: &CausalGraph,
    child: &str,
    groups: &[&BTreeSet<String>],
    context: &Instantiation,
) -> Result<(), ConstraintError> {
    let parents: BTreeSet<String> = graph
        .parents_of(child)
        .map_err(ConstraintError::Model)?
        .into_iter()
        .map(String::from)
        .collect();
    let ctx_vars: BTreeSet<String> = context.vars().map(String::from).collect();
    let mut seen: BTreeSet<&String> = BTreeSet::new();
    let mut count = 0usize;
    for group in groups.iter().copied().chain([&ctx_vars]) {
        for v in group {
            if !seen.insert(v) {
                return Err(malformed(child, format!("`{v}` appears in two groups")));
            }
            if !parents.contains(v) {
                return Err(malformed(
                    child,
                    format!("`{v}` is not a parent of `{child}`"),
                ));
            }
            count += 1;
        }
    }
    if count != parents.len() {
        let missing: Vec<&str> = parents
            .iter()
            .filter(|p| !seen.contains(p))
            .map(|s| s.as_str())
            .collect();
        return Err(malformed(
            child,
            format!(
                "groups do not cover parents (missing {})",
                missing.join(",")
            ),
        ));
    }
    context.validate(graph).map_err(ConstraintError::Model)?;
    Ok(())
}

fn row_instantiation(graph: &CausalGraph, cpt: &Cpt, idxs: &[usize]) -> Instantiation {
    Instantiation::from_pairs(
        cpt.parents()
            .iter()
            .zip(idxs)
            .map(|(p, &i)| (p.clone(), graph.var(p).unwrap().states()[i].clone())),
    )
}

fn deterministic_row(row: &[Rat]) -> bool {
    row.iter().any(Rat::is_one)
}

/// Verifies one constraint against a model's parameters. An empty report
/// means the constraint is satisfied.
pub fn check_constraint(model: &Cbn, c: &Constraint) -> Result<ViolationReport, ConstraintError> {
    let graph = model.graph();
    let mut report = ViolationReport::default();
    match c {
        Constraint::Csi(csi) => {
            check_partition(graph, &csi.child, &[&csi.indep, &csi.free], &csi.context)?;
            let cpt = model.cpt(&csi.child)?;
            let cards: Vec<usize> = cpt
                .parents()
                .iter()
                .map(|p| graph.var(p).unwrap().card())
                .collect();
            // group context-consistent rows by their non-indep coordinates
            let mut groups: BTreeMap<Vec<usize>, Vec<Vec<usize>>> = BTreeMap::new();
            for idxs in Odometer::new(cards.clone()) {
                let inst = row_instantiation(graph, cpt, &idxs);
                if !csi.context.consistent_with(&inst) {
                    continue;
                }
                let key: Vec<usize> = cpt
                    .parents()
                    .iter()
                    .zip(&idxs)
                    .filter(|(p, _)| !csi.indep.contains(*p))
                    .map(|(_, &i)| i)
                    .collect();
                groups.entry(key).or_default().push(idxs);
            }
            let child_states = graph.var(&csi.child)?.states().to_vec();
            for rows in groups.values() {
                let reference = &rows[0];
                let ref_rank = crate::model::rank_of(reference, &cards);
                for other in &rows[1..] {
                    let other_rank = crate::model::rank_of(other, &cards);
                    for (s, (a, b)) in cpt
                        .row(ref_rank)
                        .iter()
                        .zip(cpt.row(other_rank))
                        .enumerate()
                    {
                        if a != b {
                            let indep_part = |idxs: &[usize]| {
                                Instantiation::from_pairs(
                                    cpt.parents()
                                        .iter()
                                        .zip(idxs)
                                        .filter(|(p, _)| csi.indep.contains(*p))
                                        .map(|(p, &i)| {
                                            (p.clone(), graph.var(p).unwrap().states()[i].clone())
                                        }),
                                )
                            };
                            let at = Instantiation::from_pairs(
                                cpt.parents()
                                    .iter()
                                    .zip(reference.iter())
                                    .filter(|(p, _)| !csi.indep.contains(*p))
                                    .map(|(p, &i)| {
                                        (p.clone(), graph.var(p).unwrap().states()[i].clone())
                                    }),
                            );
                            report.violations.push(Violation::CsiMismatch {
                                child: csi.child.clone(),
                                at,
                                reference: indep_part(reference),
                                offending: indep_part(other),
                                state: child_states[s].clone(),
                            });
                        }
                    }
                }
            }
        }
        Constraint::Cfd(cfd) => {
            check_partition(graph, &cfd.child, &[&cfd.p1], &cfd.context)?;
            let cpt = model.cpt(&cfd.child)?;
            let cards: Vec<usize> = cpt
                .parents()
                .iter()
                .map(|p| graph.var(p).unwrap().card())
                .collect();
            for (rank, idxs) in Odometer::new(cards).enumerate() {
                let inst = row_instantiation(graph, cpt, &idxs);
                if cfd.context.consistent_with(&inst) && !deterministic_row(cpt.row(rank)) {
                    report.violations.push(Violation::NotDeterministic {
                        child: cfd.child.clone(),
                        row: inst,
                    });
                }
            }
        }
        Constraint::Fd { child } => {
            let cpt = model.cpt(child)?;
            let cards: Vec<usize> = cpt
                .parents()
                .iter()
                .map(|p| graph.var(p).unwrap().card())
                .collect();
            for (rank, idxs) in Odometer::new(cards).enumerate() {
                if !deterministic_row(cpt.row(rank)) {
                    report.violations.push(Violation::NotDeterministic {
                        child: child.clone(),
                        row: row_instantiation(graph, cpt, &idxs),
                    });
                }
            }
        }
        Constraint::StateDomain { var, states } => {
            let actual = graph.var(var)?.states();
            let want: BTreeSet<&String> = states.iter().collect();
            let got: BTreeSet<&String> = actual.iter().collect();
            if want != got {
                report.violations.push(Violation::StateDomainMismatch {
                    var: var.clone(),
                    expected: states.clone(),
                    actual: actual.to_vec(),
                });
            }
        }
    }
    Ok(report)
}

/// Conjunction of [`check_constraint`] over a whole constraint set.
pub fn check_all(model: &Cbn, cs: &[Constraint]) -> Result<ViolationReport, ConstraintError> {
    let mut report = ViolationReport::default();
    for c in cs {
        report
            .violations
            .extend(check_constraint(model, c)?.violations);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Constrained sampling

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Draws a model over `graph` satisfying `cs`, deterministically in
/// `seed`. Unconstrained rows are integer weights in `[1, weight_bound]`
/// normalized to rationals, hence strictly positive; CFD/FD rows realize
/// a uniformly drawn function as 0/1 rows; CSI rows are drawn once per
/// equivalence class and copied across the independent states. The
/// observational marginal is verified to be strictly positive.
pub fn sample_constrained(
    graph: &CausalGraph,
    cs: &[Constraint],
    seed: u64,
    weight_bound: u64,
) -> Result<Cbn, ConstraintError> {
    if weight_bound == 0 {
        return Err(ConstraintError::BadWeightBound);
    }
    // state-domain constraints restrict which graphs are admissible
    for c in cs {
        if let Constraint::StateDomain { var, states } = c {
            let actual = graph.var(var)?.states();
            let want: BTreeSet<&String> = states.iter().collect();
            let got: BTreeSet<&String> = actual.iter().collect();
            if want != got {
                return Err(ConstraintError::UnsatisfiableSyntactically(format!(
                    "graph declares `{var}` with states {{{}}} but the constraint requires {{{}}}",
                    actual.join(","),
                    states.join(",")
                )));
            }
        }
    }
    // normalize per-child constraint lists; FD becomes a CFD over all parents
    let mut csis: BTreeMap<String, Vec<&Csi>> = BTreeMap::new();
    let mut cfds: BTreeMap<String, Vec<Cfd>> = BTreeMap::new();
    for c in cs {
        match c {
            Constraint::Csi(csi) => {
                check_partition(graph, &csi.child, &[&csi.indep, &csi.free], &csi.context)?;
                csis.entry(csi.child.clone()).or_default().push(csi);
            }
            Constraint::Cfd(cfd) => {
                check_partition(graph, &cfd.child, &[&cfd.p1], &cfd.context)?;
                cfds.entry(cfd.child.clone()).or_default().push(cfd.clone());
            }
            Constraint::Fd { child } => {
                let p1: BTreeSet<String> = graph
                    .parents_of(child)?
                    .into_iter()
                    .map(String::from)
                    .collect();
                cfds.entry(child.clone()).or_default().push(Cfd {
                    child: child.clone(),
                    p1,
                    context: Instantiation::empty(),
                });
            }
            Constraint::StateDomain { .. } => {}
        }
    }
    for (child, list) in &cfds {
        for i in 0..list.len() {
            for j in (i + 1)..list.len() {
                let a = &list[i];
                let b = &list[j];
                if a.context.consistent_with(&b.context) && (a.p1 != b.p1 || a.context != b.context)
                {
                    return Err(ConstraintError::UnsatisfiableSyntactically(format!(
                        "two functional dependencies on `{child}` have overlapping contexts ({} and {})",
                        a.context, b.context
                    )));
                }
            }
        }
    }

    let mut rng = SplitMix64::new(seed);
    let mut cpts = Vec::with_capacity(graph.len());
    for var in graph.variables() {
        let child = var.name();
        let parents: Vec<String> = graph
            .parents_of(child)?
            .into_iter()
            .map(String::from)
            .collect();
        let cards: Vec<usize> = parents
            .iter()
            .map(|p| graph.var(p).unwrap().card())
            .collect();
        let n_rows: usize = cards.iter().product();
        let rows: Vec<Vec<usize>> = Odometer::new(cards.clone()).collect();
        let consistent = |row: &[usize], ctx: &Instantiation| {
            parents.iter().zip(row).all(|(p, &i)| {
                ctx.get(p)
                    .is_none_or(|s| graph.var(p).unwrap().states()[i] == s)
            })
        };

        // functional rows first: one uniformly drawn function per CFD
        let mut forced: Vec<Option<usize>> = vec![None; n_rows];
        if let Some(list) = cfds.get(child) {
            for cfd in list {
                let p1_ordered: Vec<usize> = parents
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| cfd.p1.contains(*p))
                    .map(|(k, _)| k)
                    .collect();
                let p1_cards: Vec<usize> = p1_ordered.iter().map(|&k| cards[k]).collect();
                let mut function: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
                for key in Odometer::new(p1_cards) {
                    function.insert(key, rng.next_below(var.card() as u64) as usize);
                }
                for (rank, row) in rows.iter().enumerate() {
                    if consistent(row, &cfd.context) {
                        let key: Vec<usize> = p1_ordered.iter().map(|&k| row[k]).collect();
                        forced[rank] = Some(function[&key]);
                    }
                }
            }
        }

        // CSI equivalence classes over rows
        let mut uf = UnionFind::new(n_rows);
        if let Some(list) = csis.get(child) {
            for csi in list {
                let mut buckets: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
                for (rank, row) in rows.iter().enumerate() {
                    if !consistent(row, &csi.context) {
                        continue;
                    }
                    let key: Vec<usize> = parents
                        .iter()
                        .zip(row)
                        .filter(|(p, _)| !csi.indep.contains(*p))
                        .map(|(_, &i)| i)
                        .collect();
                    match buckets.get(&key) {
                        Some(&first) => uf.union(first, rank),
                        None => {
                            buckets.insert(key, rank);
                        }
                    }
                }
            }
        }

        // one distribution per class; deterministic rows dominate
        let mut class_forced: BTreeMap<usize, usize> = BTreeMap::new();
        for (rank, slot) in forced.iter().enumerate() {
            if let Some(state) = *slot {
                let root = uf.find(rank);
                if let Some(&existing) = class_forced.get(&root) {
                    if existing != state {
                        return Err(ConstraintError::UnsatisfiableSyntactically(format!(
                            "independence class of `{child}` would need two different deterministic values"
                        )));
                    }
                } else {
                    class_forced.insert(root, state);
                }
            }
        }
        let mut class_rows: BTreeMap<usize, Vec<Rat>> = BTreeMap::new();
        let mut table = Vec::with_capacity(n_rows);
        for rank in 0..n_rows {
            let root = uf.find(rank);
            class_rows.entry(root).or_insert_with(|| {
                let row: Vec<Rat> = if let Some(&state) = class_forced.get(&root) {
                    (0..var.card())
                        .map(|k| if k == state { Rat::one() } else { Rat::zero() })
                        .collect()
                } else {
                    let weights: Vec<u64> = (0..var.card())
                        .map(|_| rng.next_below(weight_bound) + 1)
                        .collect();
                    let total: u64 = weights.iter().sum();
                    weights.iter().map(|&w| Rat::new(w, total)).collect()
                };
                row
            });
            table.push(class_rows[&root].clone());
        }
        cpts.push(Cpt::new(child, parents, table));
    }

    let model = build_model(graph.clone(), cpts)?;
    let leftover = check_all(&model, cs)?;
    if !leftover.is_empty() {
        return Err(ConstraintError::UnsatisfiableSyntactically(format!(
            "sampled model cannot satisfy the combined constraints: {leftover}"
        )));
    }
    // positivity of the observational marginal, as the estimand
    // machinery assumes
    let observed: BTreeSet<String> = graph
        .observed_names()
        .iter()
        .map(|s| s.to_string())
        .collect();
    if !observed.is_empty() {
        let obs = crate::inference::marginal(&model, &observed)?;
        for (inst, v) in obs.iter() {
            if v.is_zero() {
                return Err(ConstraintError::PositivityCheckFailed(inst.to_string()));
            }
        }
    }
    Ok(model)
}
