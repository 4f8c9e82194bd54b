//! Model surgeries: functional elimination, state extension, and state
//! permutation.
//!
//! Functional elimination removes a variable W by rewiring every parent
//! of W to every child and replacing each child CPT with the summed
//! product `sum_W f_W * f_C`. The output is always a valid model (rows
//! still sum to one); when the input additionally satisfies a CFD on W
//! with context `p2`, the observational marginals over the remaining
//! variables are preserved exactly on all instantiations consistent with
//! `p2`, and each new child CPT matches the corresponding conditional of
//! the original model there. [`verify_feliminate_marginals`] and
//! [`verify_feliminate_cpts`] check those two guarantees by enumeration.
//!
//! State extension grows a variable by one fresh state that behaves like
//! a clone of an existing base state with its probability mass split
//! `(1-eps)/eps`; children treat the new state exactly like the base
//! state. State permutation relabels a variable's states everywhere.

use crate::constraints::{check_constraint, Constraint, ConstraintError};
use crate::inference::{dist_equal, marginal, InferenceError};
use crate::model::{
    build_model, rank_of, CausalGraph, Cbn, Cpt, Instantiation, ModelError, Odometer, Variable,
};
use crate::rat::Rat;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("eps must satisfy 0 < eps < 1, got {0}")]
    EpsOutOfRange(String),
    #[error("map on `{var}` is not a bijection over its states")]
    NotABijection { var: String },
    #[error("context {context} names a non-parent of `{var}`")]
    BadContext { var: String, context: String },
    #[error(
        "model does not satisfy the functional dependency [{p1}, {context}] -> {var}: {detail}"
    )]
    ConstraintNotSatisfied {
        var: String,
        p1: String,
        context: String,
        detail: String,
    },
}

/// Removes `w`, adding an edge from each parent of `w` to each child and
/// giving every child `C` the CPT `sum_w f_W(w|..) * f_C(c|.., w)` over
/// the union of both parent sets (duplicates merged). The rewritten rows
/// sum to one for arbitrary inputs.
pub fn functional_eliminate(model: &Cbn, w: &str) -> Result<Cbn, TransformError> {
    let g = model.graph();
    g.idx(w)?;
    let w_parents: Vec<String> = g.parents_of(w)?.into_iter().map(String::from).collect();
    let w_children: BTreeSet<String> = g.children_of(w)?.into_iter().map(String::from).collect();

    let variables: Vec<Variable> = g
        .variables()
        .iter()
        .filter(|v| v.name() != w)
        .cloned()
        .collect();
    let mut edges: Vec<(String, String)> = g
        .edges()
        .iter()
        .filter(|(p, c)| p != w && c != w)
        .cloned()
        .collect();
    for p in &w_parents {
        for c in &w_children {
            if !edges.contains(&(p.clone(), c.clone())) {
                edges.push((p.clone(), c.clone()));
            }
        }
    }
    let observed: Vec<String> = g
        .observed_names()
        .into_iter()
        .filter(|n| *n != w)
        .map(String::from)
        .collect();
    let graph = CausalGraph::new(variables, edges, observed)?;

    let w_cpt = model.cpt(w)?;
    let mut cpts = Vec::with_capacity(graph.len());
    for var in g.variables() {
        let name = var.name();
        if name == w {
            continue;
        }
        if !w_children.contains(name) {
            cpts.push(model.cpt(name)?.clone());
            continue;
        }
        let child_cpt = model.cpt(name)?;
        // union parent set, in declaration order of the new graph
        let new_parents: Vec<String> = graph
            .parents_of(name)?
            .into_iter()
            .map(String::from)
            .collect();
        let new_cards: Vec<usize> = new_parents
            .iter()
            .map(|p| graph.var(p).unwrap().card())
            .collect();
        let old_parents = child_cpt.parents();
        let old_cards: Vec<usize> = old_parents
            .iter()
            .map(|p| g.var(p).unwrap().card())
            .collect();
        let w_parent_cards: Vec<usize> =
            w_parents.iter().map(|p| g.var(p).unwrap().card()).collect();
        let w_pos_in_old = old_parents.iter().position(|p| p == w).unwrap();
        let mut table = Vec::new();
        for new_row in Odometer::new(new_cards.clone()) {
            let lookup: BTreeMap<&str, usize> = new_parents
                .iter()
                .map(String::as_str)
                .zip(new_row.iter().copied())
                .collect();
            let w_row_idx: Vec<usize> = w_parents.iter().map(|p| lookup[p.as_str()]).collect();
            let w_rank = rank_of(&w_row_idx, &w_parent_cards);
            let w_dist = w_cpt.row(w_rank);
            let mut out = vec![Rat::zero(); var_card(&graph, name)];
            for (w_state, w_prob) in w_dist.iter().enumerate() {
                let old_row_idx: Vec<usize> = old_parents
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        if k == w_pos_in_old {
                            w_state
                        } else {
                            lookup[p.as_str()]
                        }
                    })
                    .collect();
                let old_rank = rank_of(&old_row_idx, &old_cards);
                let child_row = child_cpt.row(old_rank);
                for (slot, v) in out.iter_mut().enumerate() {
                    *v += &(w_prob * &child_row[slot]);
                }
            }
            table.push(out);
        }
        cpts.push(Cpt::new(name, new_parents, table));
    }
    Ok(build_model(graph, cpts)?)
}

fn var_card(g: &CausalGraph, name: &str) -> usize {
    g.var(name).unwrap().card()
}

/// Outcome of checking marginal preservation after eliminating `w`.
#[derive(Debug, Clone)]
pub struct ElimReport {
    /// Instantiations compared (all of them consistent with the context).
    pub checked: usize,
    /// `(instantiation, original value, value after elimination)` triples
    /// that disagree. Empty means the guarantee held.
    pub mismatches: Vec<(Instantiation, Rat, Rat)>,
}

impl ElimReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn cfd_of(model: &Cbn, w: &str, context: &Instantiation) -> Result<Constraint, TransformError> {
    let g = model.graph();
    let parents: BTreeSet<String> = g.parents_of(w)?.into_iter().map(String::from).collect();
    for var in context.vars() {
        if !parents.contains(var) {
            return Err(TransformError::BadContext {
                var: w.to_string(),
                context: context.to_string(),
            });
        }
    }
    let p1: BTreeSet<String> = parents
        .iter()
        .filter(|p| context.get(p).is_none())
        .cloned()
        .collect();
    Ok(Constraint::cfd(w, p1, context.clone()))
}

/// Checks the marginal-preservation guarantee of functional elimination:
/// the model must satisfy the CFD on `w` whose determining set is all
/// parents outside `context`; then the observational marginal before and
/// after eliminating `w` must agree on every instantiation consistent
/// with `context`.
pub fn verify_feliminate_marginals(
    model: &Cbn,
    w: &str,
    context: &Instantiation,
) -> Result<ElimReport, TransformError> {
    let cfd = cfd_of(model, w, context)?;
    let report = check_constraint(model, &cfd)?;
    if !report.is_empty() {
        let (p1, ctx) = match &cfd {
            Constraint::Cfd(c) => (
                c.p1.iter().cloned().collect::<Vec<_>>().join(","),
                c.context.to_string(),
            ),
            _ => unreachable!(),
        };
        return Err(TransformError::ConstraintNotSatisfied {
            var: w.to_string(),
            p1,
            context: ctx,
            detail: report.to_string(),
        });
    }
    let eliminated = functional_eliminate(model, w)?;
    let scope: BTreeSet<String> = eliminated
        .graph()
        .observed_names()
        .into_iter()
        .map(String::from)
        .collect();
    let before = marginal(model, &scope)?;
    let after = marginal(&eliminated, &scope)?;
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for (inst, value_after) in after.iter() {
        if !context.consistent_with(&inst) {
            continue;
        }
        checked += 1;
        let value_before = before.get(&inst)?;
        if value_before != value_after {
            mismatches.push((inst, value_before.clone(), value_after.clone()));
        }
    }
    Ok(ElimReport {
        checked,
        mismatches,
    })
}

/// Checks the companion CPT guarantee: for each child `C` of `w`, the new
/// CPT entry `f'_C(c | p')` equals the conditional `Pr(c | p')` of the
/// original model for every parent instantiation `p'` consistent with
/// `context` that has positive probability.
pub fn verify_feliminate_cpts(
    model: &Cbn,
    w: &str,
    context: &Instantiation,
) -> Result<ElimReport, TransformError> {
    let cfd = cfd_of(model, w, context)?;
    let report = check_constraint(model, &cfd)?;
    if !report.is_empty() {
        return Err(TransformError::ConstraintNotSatisfied {
            var: w.to_string(),
            p1: String::new(),
            context: context.to_string(),
            detail: report.to_string(),
        });
    }
    let g = model.graph();
    let children: Vec<String> = g.children_of(w)?.into_iter().map(String::from).collect();
    let eliminated = functional_eliminate(model, w)?;
    let full = crate::inference::joint(model)?;
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for child in &children {
        let cpt = eliminated.cpt(child)?;
        let cards: Vec<usize> = cpt
            .parents()
            .iter()
            .map(|p| eliminated.graph().var(p).unwrap().card())
            .collect();
        let child_states = eliminated.graph().var(child)?.states().to_vec();
        for (rank, idxs) in Odometer::new(cards).enumerate() {
            let given =
                Instantiation::from_pairs(cpt.parents().iter().zip(&idxs).map(|(p, &i)| {
                    (
                        p.clone(),
                        eliminated.graph().var(p).unwrap().states()[i].clone(),
                    )
                }));
            if !context.consistent_with(&given) {
                continue;
            }
            let (per_state, given_mass) = full.state_masses(child, &given)?;
            if given_mass.is_zero() {
                continue;
            }
            for (slot, state) in child_states.iter().enumerate() {
                checked += 1;
                let expected = &per_state[slot] / &given_mass;
                let got = cpt.row(rank)[slot].clone();
                if expected != got {
                    let mut at = given.clone();
                    at = at.set(child.clone(), state.clone());
                    mismatches.push((at, expected, got));
                }
            }
        }
    }
    Ok(ElimReport {
        checked,
        mismatches,
    })
}

/// Adds a fresh state to `w` that splits the mass of `base`:
/// `f'(new|p) = eps * f(base|p)` and `f'(base|p) = (1-eps) * f(base|p)`,
/// while every child treats the new state exactly like `base`. The fresh
/// label is `<base>_ext<k>` for the smallest unused `k`.
pub fn extend_state(model: &Cbn, w: &str, base: &str, eps: &Rat) -> Result<Cbn, TransformError> {
    if eps.is_zero() || eps >= &Rat::one() {
        return Err(TransformError::EpsOutOfRange(eps.to_string()));
    }
    let g = model.graph();
    let w_var = g.var(w)?;
    let base_idx = w_var.state_index(base)?;
    let fresh = {
        let mut k = 0usize;
        loop {
            let candidate = format!("{base}_ext{k}");
            if !w_var.states().contains(&candidate) {
                break candidate;
            }
            k += 1;
        }
    };
    let mut new_states: Vec<String> = w_var.states().to_vec();
    new_states.push(fresh.clone());
    let new_card = new_states.len();

    let variables: Vec<Variable> = g
        .variables()
        .iter()
        .map(|v| {
            if v.name() == w {
                Variable::new(w, new_states.clone())
            } else {
                Ok(v.clone())
            }
        })
        .collect::<Result<_, _>>()?;
    let graph = CausalGraph::new(
        variables,
        g.edges().to_vec(),
        g.observed_names().into_iter().map(String::from),
    )?;

    let one_minus_eps = Rat::one().checked_sub(eps).unwrap();
    let mut cpts = Vec::with_capacity(graph.len());
    for var in g.variables() {
        let name = var.name();
        let cpt = model.cpt(name)?;
        if name == w {
            let mut table = Vec::with_capacity(cpt.rows().len());
            for row in cpt.rows() {
                let mut new_row = row.clone();
                let mass = new_row[base_idx].clone();
                new_row[base_idx] = &mass * &one_minus_eps;
                new_row.push(&mass * eps);
                table.push(new_row);
            }
            cpts.push(Cpt::new(name, cpt.parents().to_vec(), table));
        } else if cpt.parents().iter().any(|p| p == w) {
            let w_pos = cpt.parents().iter().position(|p| p == w).unwrap();
            let old_cards: Vec<usize> = cpt
                .parents()
                .iter()
                .map(|p| g.var(p).unwrap().card())
                .collect();
            let mut cards = old_cards.clone();
            cards[w_pos] = new_card;
            let mut table = Vec::new();
            for idxs in Odometer::new(cards) {
                let mut source = idxs.clone();
                if source[w_pos] == new_card - 1 {
                    source[w_pos] = base_idx;
                }
                table.push(cpt.row(rank_of(&source, &old_cards)).to_vec());
            }
            cpts.push(Cpt::new(name, cpt.parents().to_vec(), table));
        } else {
            cpts.push(cpt.clone());
        }
    }
    Ok(build_model(graph, cpts)?)
}

/// Relabels the states of `var` through the bijection `perm` (old label
/// to new label): the variable's own rows move their entries and every
/// child CPT's slices along `var` are re-indexed, so the induced joint
/// satisfies `Pr'(.., var=perm(s), ..) = Pr(.., var=s, ..)`.
pub fn permute_states(
    model: &Cbn,
    var: &str,
    perm: &BTreeMap<String, String>,
) -> Result<Cbn, TransformError> {
    let g = model.graph();
    let v = g.var(var)?;
    let states: BTreeSet<&str> = v.states().iter().map(String::as_str).collect();
    let keys: BTreeSet<&str> = perm.keys().map(String::as_str).collect();
    let values: BTreeSet<&str> = perm.values().map(String::as_str).collect();
    if keys != states || values != states {
        return Err(TransformError::NotABijection {
            var: var.to_string(),
        });
    }
    // forward[i] = index that old state i maps to
    let forward: Vec<usize> = v
        .states()
        .iter()
        .map(|s| v.state_index(&perm[s]).unwrap())
        .collect();
    let mut inverse = vec![0usize; forward.len()];
    for (i, &j) in forward.iter().enumerate() {
        inverse[j] = i;
    }

    let mut cpts = Vec::with_capacity(g.len());
    for variable in g.variables() {
        let name = variable.name();
        let cpt = model.cpt(name)?;
        if name == var {
            let table: Vec<Vec<Rat>> = cpt
                .rows()
                .iter()
                .map(|row| (0..row.len()).map(|j| row[inverse[j]].clone()).collect())
                .collect();
            cpts.push(Cpt::new(name, cpt.parents().to_vec(), table));
        } else if cpt.parents().iter().any(|p| p == var) {
            let w_pos = cpt.parents().iter().position(|p| p == var).unwrap();
            let cards: Vec<usize> = cpt
                .parents()
                .iter()
                .map(|p| g.var(p).unwrap().card())
                .collect();
            let mut table = Vec::new();
            for idxs in Odometer::new(cards.clone()) {
                let mut source = idxs.clone();
                source[w_pos] = inverse[idxs[w_pos]];
                table.push(cpt.row(rank_of(&source, &cards)).to_vec());
            }
            cpts.push(Cpt::new(name, cpt.parents().to_vec(), table));
        } else {
            cpts.push(cpt.clone());
        }
    }
    Ok(build_model(g.clone(), cpts)?)
}

/// Rewrites an instantiation through a state permutation of `var`.
pub fn permute_instantiation(
    inst: &Instantiation,
    var: &str,
    perm: &BTreeMap<String, String>,
) -> Instantiation {
    Instantiation::from_pairs(inst.iter().map(|(k, v)| {
        if k == var {
            (k.to_string(), perm[v].clone())
        } else {
            (k.to_string(), v.to_string())
        }
    }))
}

/// Rewrites a constraint so that it refers to the permuted state labels
/// of `var`: context values and state-domain lists move through `perm`.
pub fn permute_constraint(
    c: &Constraint,
    var: &str,
    perm: &BTreeMap<String, String>,
) -> Constraint {
    match c {
        Constraint::Csi(csi) => Constraint::csi(
            &csi.child,
            csi.indep.iter().cloned(),
            permute_instantiation(&csi.context, var, perm),
            csi.free.iter().cloned(),
        ),
        Constraint::Cfd(cfd) => Constraint::cfd(
            &cfd.child,
            cfd.p1.iter().cloned(),
            permute_instantiation(&cfd.context, var, perm),
        ),
        Constraint::Fd { child } => Constraint::fd(child),
        Constraint::StateDomain { var: v, states } => {
            if v == var {
                Constraint::state_domain(v, states.iter().map(|s| perm[s].clone()))
            } else {
                c.clone()
            }
        }
    }
}

/// Sanity helper used by tests and reports: exact equality of the
/// observational marginals of two models over their shared observed set.
pub fn observational_equal(a: &Cbn, b: &Cbn) -> Result<bool, TransformError> {
    let scope: BTreeSet<String> = a
        .graph()
        .observed_names()
        .into_iter()
        .map(String::from)
        .collect();
    let da = marginal(a, &scope)?;
    let db = marginal(b, &scope)?;
    Ok(dist_equal(&da, &db)?)
}
