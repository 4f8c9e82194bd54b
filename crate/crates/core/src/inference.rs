//! Exact observational and interventional inference.
//!
//! Two independent paths compute every query: [`joint`]/[`marginal`]
//! enumerate the full state space (the oracle every certificate check is
//! anchored to), and [`eliminate_ve`] runs factor-based sum-product
//! elimination. The two must agree exactly on all inputs.

use crate::model::rank_of;
use crate::model::{build_model, CausalGraph, Cbn, Cpt, Instantiation, ModelError, Odometer};
use crate::rat::Rat;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Enumeration refuses state spaces larger than this unless the caller
/// raises the cap explicitly.
pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state space of {size} instantiations exceeds the cap of {cap}")]
    StateSpaceTooLarge { size: u128, cap: u128 },
    #[error("empty target set")]
    EmptyTargets,
    #[error("conditioning event {0} has probability zero")]
    ZeroConditioningEvent(String),
    #[error("distributions have different scopes: {0:?} vs {1:?}")]
    ScopeMismatch(Vec<String>, Vec<String>),
    #[error("elimination order {order:?} is not a permutation of {expected:?}")]
    BadEliminationOrder {
        order: Vec<String>,
        expected: Vec<String>,
    },
}

/// An exact distribution (or sub-normalized table) over an ordered scope.
/// Entries are dense, indexed lexicographically by state over the scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    vars: Vec<String>,
    states: Vec<Vec<String>>,
    values: Vec<Rat>,
}

impl Dist {
    fn new(vars: Vec<String>, states: Vec<Vec<String>>, values: Vec<Rat>) -> Self {
        debug_assert_eq!(values.len(), states.iter().map(Vec::len).product::<usize>());
        Dist {
            vars,
            states,
            values,
        }
    }

    pub fn scope(&self) -> &[String] {
        &self.vars
    }

    pub fn states_of(&self, var: &str) -> Option<&[String]> {
        let i = self.vars.iter().position(|v| v == var)?;
        Some(&self.states[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn cards(&self) -> Vec<usize> {
        self.states.iter().map(Vec::len).collect()
    }

    /// Iterates `(full instantiation, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Instantiation, &Rat)> + '_ {
        Odometer::new(self.cards()).map(move |idxs| {
            let inst = Instantiation::from_pairs(
                self.vars
                    .iter()
                    .zip(&idxs)
                    .map(|(v, &i)| (v.clone(), self.states_of(v).unwrap()[i].clone())),
            );
            (inst, &self.values[rank_of(&idxs, &self.cards())])
        })
    }

    /// Value at a full instantiation of the scope.
    pub fn get(&self, inst: &Instantiation) -> Result<&Rat, InferenceError> {
        let mut idxs = Vec::with_capacity(self.vars.len());
        for (var, states) in self.vars.iter().zip(&self.states) {
            let label = inst
                .get(var)
                .ok_or_else(|| InferenceError::Model(ModelError::UnknownVariable(var.clone())))?;
            let i = states.iter().position(|s| s == label).ok_or_else(|| {
                InferenceError::Model(ModelError::UnknownState {
                    var: var.clone(),
                    state: label.to_string(),
                })
            })?;
            idxs.push(i);
        }
        Ok(&self.values[rank_of(&idxs, &self.cards())])
    }

    /// Total mass of all entries consistent with a partial assignment.
    /// Variables outside the scope are ignored by the caller's contract.
    pub fn mass_consistent_with(&self, partial: &Instantiation) -> Rat {
        let cards = self.cards();
        let mut fixed: Vec<Option<usize>> = vec![None; self.vars.len()];
        for (i, (var, states)) in self.vars.iter().zip(&self.states).enumerate() {
            if let Some(label) = partial.get(var) {
                match states.iter().position(|s| s == label) {
                    Some(k) => fixed[i] = Some(k),
                    None => return Rat::zero(),
                }
            }
        }
        let mut total = Rat::zero();
        let mut idxs = vec![0usize; cards.len()];
        let mut rank = 0usize;
        loop {
            if fixed
                .iter()
                .zip(&idxs)
                .all(|(f, &i)| f.is_none_or(|k| k == i))
            {
                total += &self.values[rank];
            }
            rank += 1;
            let mut pos = cards.len();
            loop {
                if pos == 0 {
                    return total;
                }
                pos -= 1;
                idxs[pos] += 1;
                if idxs[pos] < cards[pos] {
                    break;
                }
                idxs[pos] = 0;
            }
        }
    }

    /// One scan computing, for each state of `var`, the mass jointly
    /// consistent with `given`, together with the total mass of `given`.
    pub fn state_masses(
        &self,
        var: &str,
        given: &Instantiation,
    ) -> Result<(Vec<Rat>, Rat), InferenceError> {
        let vpos = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| InferenceError::Model(ModelError::UnknownVariable(var.into())))?;
        let cards = self.cards();
        let mut fixed: Vec<Option<usize>> = vec![None; self.vars.len()];
        for (i, (v, states)) in self.vars.iter().zip(&self.states).enumerate() {
            if let Some(label) = given.get(v) {
                let k = states.iter().position(|s| s == label).ok_or_else(|| {
                    InferenceError::Model(ModelError::UnknownState {
                        var: v.clone(),
                        state: label.to_string(),
                    })
                })?;
                fixed[i] = Some(k);
            }
        }
        let mut per_state = vec![Rat::zero(); cards[vpos]];
        let mut given_mass = Rat::zero();
        let mut idxs = vec![0usize; cards.len()];
        let mut rank = 0usize;
        loop {
            if fixed
                .iter()
                .zip(&idxs)
                .all(|(f, &i)| f.is_none_or(|k| k == i))
            {
                given_mass += &self.values[rank];
                per_state[idxs[vpos]] += &self.values[rank];
            }
            rank += 1;
            let mut pos = cards.len();
            loop {
                if pos == 0 {
                    return Ok((per_state, given_mass));
                }
                pos -= 1;
                idxs[pos] += 1;
                if idxs[pos] < cards[pos] {
                    break;
                }
                idxs[pos] = 0;
            }
        }
    }

    pub fn total_mass(&self) -> Rat {
        let mut t = Rat::zero();
        for v in &self.values {
            t += v;
        }
        t
    }
}

/// Exact entrywise equality of two distributions over the same scope,
/// tolerating a different scope ordering.
pub fn dist_equal(a: &Dist, b: &Dist) -> Result<bool, InferenceError> {
    let set_a: BTreeSet<&String> = a.vars.iter().collect();
    let set_b: BTreeSet<&String> = b.vars.iter().collect();
    if set_a != set_b {
        return Err(InferenceError::ScopeMismatch(
            a.vars.clone(),
            b.vars.clone(),
        ));
    }
    // position of each of a's vars inside b's scope
    let mut remap = Vec::with_capacity(a.vars.len());
    for v in &a.vars {
        let j = b.vars.iter().position(|w| w == v).unwrap();
        if a.states_of(v) != b.states_of(v) {
            return Err(InferenceError::ScopeMismatch(
                a.vars.clone(),
                b.vars.clone(),
            ));
        }
        remap.push(j);
    }
    let a_cards = a.cards();
    let b_cards = b.cards();
    for idxs in Odometer::new(a_cards.clone()) {
        let mut b_idxs = vec![0; idxs.len()];
        for (ai, &bj) in remap.iter().enumerate() {
            b_idxs[bj] = idxs[ai];
        }
        if a.values[rank_of(&idxs, &a_cards)] != b.values[rank_of(&b_idxs, &b_cards)] {
            return Ok(false);
        }
    }
    Ok(true)
}

fn state_space(graph: &CausalGraph) -> u128 {
    graph.variables().iter().map(|v| v.card() as u128).product()
}

/// Full joint over all variables by explicit enumeration of the chain-rule
/// product of CPT entries.
pub fn joint(model: &Cbn) -> Result<Dist, InferenceError> {
    joint_capped(model, DEFAULT_STATE_CAP)
}

pub fn joint_capped(model: &Cbn, cap: u128) -> Result<Dist, InferenceError> {
    let g = model.graph();
    let size = state_space(g);
    if size > cap {
        return Err(InferenceError::StateSpaceTooLarge { size, cap });
    }
    let n = g.len();
    let cards: Vec<usize> = g.variables().iter().map(|v| v.card()).collect();
    // per-variable: positions of its CPT parents in the global assignment
    let mut parent_pos: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut parent_cards: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let cpt = model.cpt_at(i);
        let pos: Vec<usize> = cpt.parents().iter().map(|p| g.idx(p).unwrap()).collect();
        parent_cards.push(pos.iter().map(|&p| cards[p]).collect());
        parent_pos.push(pos);
    }
    let mut values = Vec::with_capacity(size as usize);
    for asg in Odometer::new(cards.clone()) {
        let mut p = Rat::one();
        for i in 0..n {
            let pstates: Vec<usize> = parent_pos[i].iter().map(|&j| asg[j]).collect();
            let rank = rank_of(&pstates, &parent_cards[i]);
            p *= &model.cpt_at(i).row(rank)[asg[i]];
            if p.is_zero() {
                break;
            }
        }
        values.push(p);
    }
    Ok(Dist::new(
        g.variables().iter().map(|v| v.name().to_string()).collect(),
        g.variables().iter().map(|v| v.states().to_vec()).collect(),
        values,
    ))
}

/// Marginal over `targets` (declaration order) by summing the joint.
pub fn marginal(model: &Cbn, targets: &BTreeSet<String>) -> Result<Dist, InferenceError> {
    marginal_capped(model, targets, DEFAULT_STATE_CAP)
}

pub fn marginal_capped(
    model: &Cbn,
    targets: &BTreeSet<String>,
    cap: u128,
) -> Result<Dist, InferenceError> {
    if targets.is_empty() {
        return Err(InferenceError::EmptyTargets);
    }
    let g = model.graph();
    for t in targets {
        g.idx(t)?;
    }
    let full = joint_capped(model, cap)?;
    Ok(sum_out_to(&full, targets))
}

/// Folds a distribution down to `targets`, keeping declaration order.
fn sum_out_to(full: &Dist, targets: &BTreeSet<String>) -> Dist {
    let keep: Vec<usize> = full
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| targets.contains(*v))
        .map(|(i, _)| i)
        .collect();
    let out_vars: Vec<String> = keep.iter().map(|&i| full.vars[i].clone()).collect();
    let out_states: Vec<Vec<String>> = keep.iter().map(|&i| full.states[i].clone()).collect();
    let out_cards: Vec<usize> = out_states.iter().map(Vec::len).collect();
    let mut values = vec![Rat::zero(); out_cards.iter().product::<usize>().max(1)];
    let cards = full.cards();
    for idxs in Odometer::new(cards.clone()) {
        let out_idx: Vec<usize> = keep.iter().map(|&i| idxs[i]).collect();
        values[rank_of(&out_idx, &out_cards)] += &full.values[rank_of(&idxs, &cards)];
    }
    Dist::new(out_vars, out_states, values)
}

/// `Pr(target | given)`, exact. Errors if `Pr(given) = 0`.
pub fn conditional(
    model: &Cbn,
    target: &Instantiation,
    given: &Instantiation,
) -> Result<Rat, InferenceError> {
    let g = model.graph();
    target.validate(g)?;
    given.validate(g)?;
    let full = joint(model)?;
    let p_given = if given.is_empty() {
        Rat::one()
    } else {
        full.mass_consistent_with(given)
    };
    if p_given.is_zero() {
        return Err(InferenceError::ZeroConditioningEvent(given.to_string()));
    }
    let mut both = given.clone();
    for (k, v) in target.iter() {
        if let Some(existing) = both.get(k) {
            if existing != v {
                return Ok(Rat::zero());
            }
        }
        both = both.set(k, v);
    }
    let p_both = full.mass_consistent_with(&both);
    Ok(&p_both / &p_given)
}

/// Marginal over `targets` given fixed `evidence`, via enumeration.
/// This is the oracle twin of [`eliminate_ve`].
pub fn marginal_given(
    model: &Cbn,
    targets: &BTreeSet<String>,
    evidence: &Instantiation,
) -> Result<Dist, InferenceError> {
    marginal_given_capped(model, targets, evidence, DEFAULT_STATE_CAP)
}

pub fn marginal_given_capped(
    model: &Cbn,
    targets: &BTreeSet<String>,
    evidence: &Instantiation,
    cap: u128,
) -> Result<Dist, InferenceError> {
    if targets.is_empty() {
        return Err(InferenceError::EmptyTargets);
    }
    let g = model.graph();
    for t in targets {
        g.idx(t)?;
    }
    evidence.validate(g)?;
    let full = joint_capped(model, cap)?;
    let mut union = targets.clone();
    union.extend(evidence.vars().map(String::from));
    let wide = sum_out_to(&full, &union);
    let p_ev = if evidence.is_empty() {
        Rat::one()
    } else {
        wide.mass_consistent_with(evidence)
    };
    if p_ev.is_zero() {
        return Err(InferenceError::ZeroConditioningEvent(evidence.to_string()));
    }
    // restrict to evidence-consistent entries, then drop evidence-only vars
    let cards = wide.cards();
    let mut fixed: Vec<Option<usize>> = vec![None; wide.vars.len()];
    for (i, var) in wide.vars.iter().enumerate() {
        if let Some(label) = evidence.get(var) {
            fixed[i] = Some(wide.states[i].iter().position(|s| s == label).unwrap());
        }
    }
    let keep: Vec<usize> = wide
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| targets.contains(*v))
        .map(|(i, _)| i)
        .collect();
    let out_vars: Vec<String> = keep.iter().map(|&i| wide.vars[i].clone()).collect();
    let out_states: Vec<Vec<String>> = keep.iter().map(|&i| wide.states[i].clone()).collect();
    let out_cards: Vec<usize> = out_states.iter().map(Vec::len).collect();
    let mut values = vec![Rat::zero(); out_cards.iter().product::<usize>().max(1)];
    for idxs in Odometer::new(cards.clone()) {
        let consistent = fixed
            .iter()
            .zip(&idxs)
            .all(|(f, &i)| f.is_none_or(|k| k == i));
        if !consistent {
            continue;
        }
        let out_idx: Vec<usize> = keep.iter().map(|&i| idxs[i]).collect();
        values[rank_of(&out_idx, &out_cards)] += &wide.values[rank_of(&idxs, &cards)];
    }
    for v in &mut values {
        *v = &*v / &p_ev;
    }
    Ok(Dist::new(out_vars, out_states, values))
}

/// The do-operation: every treated variable loses its incoming edges and
/// receives a point-mass CPT on its treated state. All other CPTs are
/// untouched.
pub fn intervene(model: &Cbn, treatment: &Instantiation) -> Result<Cbn, InferenceError> {
    let g = model.graph();
    treatment.validate(g)?;
    let treated: BTreeSet<&str> = treatment.vars().collect();
    let edges: Vec<(String, String)> = g
        .edges()
        .iter()
        .filter(|(_, c)| !treated.contains(c.as_str()))
        .cloned()
        .collect();
    let graph = CausalGraph::new(
        g.variables().to_vec(),
        edges,
        g.observed_names().into_iter().map(String::from),
    )?;
    let mut cpts = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let var = g.var_at(i);
        if let Some(state) = treatment.get(var.name()) {
            let hit = var.state_index(state)?;
            let row: Vec<Rat> = (0..var.card())
                .map(|k| if k == hit { Rat::one() } else { Rat::zero() })
                .collect();
            cpts.push(Cpt::new(var.name(), Vec::<String>::new(), vec![row]));
        } else {
            cpts.push(model.cpt_at(i).clone());
        }
    }
    Ok(build_model(graph, cpts)?)
}

/// `Pr_x(y)`: intervene on `treatment`, marginalize to the outcome
/// variables, and read off the entry at `outcome`.
pub fn causal_effect(
    model: &Cbn,
    treatment: &Instantiation,
    outcome: &Instantiation,
) -> Result<Rat, InferenceError> {
    if outcome.is_empty() {
        return Err(InferenceError::EmptyTargets);
    }
    outcome.validate(model.graph())?;
    let mutilated = intervene(model, treatment)?;
    let targets: BTreeSet<String> = outcome.vars().map(String::from).collect();
    let dist = marginal(&mutilated, &targets)?;
    Ok(dist.get(outcome)?.clone())
}

// ---------------------------------------------------------------------------
// Variable elimination

#[derive(Debug, Clone)]
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<Rat>,
}

impl Factor {
    fn constant(value: Rat) -> Self {
        Factor {
            vars: vec![],
            cards: vec![],
            values: vec![value],
        }
    }

    fn multiply(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let pos_a: Vec<usize> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).unwrap())
            .collect();
        let pos_b: Vec<usize> = other
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v).unwrap())
            .collect();
        let mut values = Vec::with_capacity(cards.iter().product::<usize>().max(1));
        for idxs in Odometer::new(cards.clone()) {
            let ia: Vec<usize> = pos_a.iter().map(|&p| idxs[p]).collect();
            let ib: Vec<usize> = pos_b.iter().map(|&p| idxs[p]).collect();
            values.push(
                &self.values[rank_of(&ia, &self.cards)] * &other.values[rank_of(&ib, &other.cards)],
            );
        }
        Factor {
            vars,
            cards,
            values,
        }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut values = vec![Rat::zero(); cards.iter().product::<usize>().max(1)];
        for idxs in Odometer::new(self.cards.clone()) {
            let mut out: Vec<usize> = idxs.clone();
            out.remove(pos);
            values[rank_of(&out, &cards)] += &self.values[rank_of(&idxs, &self.cards)];
        }
        Factor {
            vars,
            cards,
            values,
        }
    }
}

/// Sum-product variable elimination. Produces exactly the same table as
/// [`marginal_given`]: `Pr(targets | evidence)` over the target variables
/// in declaration order. `order`, when supplied, must be a permutation of
/// the non-target, non-evidence variables; otherwise a min-degree
/// heuristic picks it.
pub fn eliminate_ve(
    model: &Cbn,
    targets: &BTreeSet<String>,
    evidence: &Instantiation,
    order: Option<&[String]>,
) -> Result<Dist, InferenceError> {
    if targets.is_empty() {
        return Err(InferenceError::EmptyTargets);
    }
    let g = model.graph();
    for t in targets {
        g.idx(t)?;
    }
    evidence.validate(g)?;
    let evidence_vars: BTreeSet<String> = evidence.vars().map(String::from).collect();
    let to_eliminate: Vec<String> = g
        .variables()
        .iter()
        .map(|v| v.name().to_string())
        .filter(|n| !targets.contains(n) && !evidence_vars.contains(n))
        .collect();
    let order: Vec<String> = match order {
        Some(given) => {
            let want: BTreeSet<&String> = to_eliminate.iter().collect();
            let got: BTreeSet<&String> = given.iter().collect();
            if want != got || given.len() != to_eliminate.len() {
                return Err(InferenceError::BadEliminationOrder {
                    order: given.to_vec(),
                    expected: to_eliminate,
                });
            }
            given.to_vec()
        }
        None => min_degree_order(model, &to_eliminate),
    };

    // CPT factors restricted by evidence (evidence vars leave the scope)
    let ev_idx: BTreeMap<usize, usize> = evidence
        .iter()
        .map(|(var, state)| {
            let i = g.idx(var).unwrap();
            (i, g.var_at(i).state_index(state).unwrap())
        })
        .collect();
    let mut factors: Vec<Factor> = Vec::new();
    for i in 0..g.len() {
        let cpt = model.cpt_at(i);
        let mut scope: Vec<usize> = cpt.parents().iter().map(|p| g.idx(p).unwrap()).collect();
        scope.push(i);
        let cards: Vec<usize> = scope.iter().map(|&v| g.var_at(v).card()).collect();
        let keep: Vec<usize> = (0..scope.len())
            .filter(|&k| !ev_idx.contains_key(&scope[k]))
            .collect();
        let out_vars: Vec<usize> = keep.iter().map(|&k| scope[k]).collect();
        let out_cards: Vec<usize> = keep.iter().map(|&k| cards[k]).collect();
        let mut values = Vec::with_capacity(out_cards.iter().product::<usize>().max(1));
        for out_idxs in Odometer::new(out_cards.clone()) {
            let mut full_idx = vec![0usize; scope.len()];
            for (slot, &k) in keep.iter().enumerate() {
                full_idx[k] = out_idxs[slot];
            }
            for (k, &v) in scope.iter().enumerate() {
                if let Some(&s) = ev_idx.get(&v) {
                    full_idx[k] = s;
                }
            }
            let child_state = full_idx[scope.len() - 1];
            let prank = rank_of(&full_idx[..scope.len() - 1], &cards[..scope.len() - 1]);
            values.push(cpt.row(prank)[child_state].clone());
        }
        factors.push(Factor {
            vars: out_vars,
            cards: out_cards,
            values,
        });
    }

    for name in &order {
        let v = g.idx(name).unwrap();
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&v));
        let product = touching
            .into_iter()
            .fold(Factor::constant(Rat::one()), |acc, f| acc.multiply(&f));
        factors = rest;
        factors.push(product.sum_out(v));
    }
    let combined = factors
        .into_iter()
        .fold(Factor::constant(Rat::one()), |acc, f| acc.multiply(&f));

    // normalize by Pr(evidence) and lay out over the full target scope
    // in declaration order; targets that are also evidence come back as
    // point masses, exactly as the enumeration oracle reports them
    let mass = {
        let mut t = Rat::zero();
        for v in &combined.values {
            t += v;
        }
        t
    };
    if mass.is_zero() {
        return Err(InferenceError::ZeroConditioningEvent(evidence.to_string()));
    }
    let target_idx: Vec<usize> = g
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| targets.contains(v.name()))
        .map(|(i, _)| i)
        .collect();
    let out_vars: Vec<String> = target_idx
        .iter()
        .map(|&i| g.var_at(i).name().to_string())
        .collect();
    let out_states: Vec<Vec<String>> = target_idx
        .iter()
        .map(|&i| g.var_at(i).states().to_vec())
        .collect();
    let out_cards: Vec<usize> = out_states.iter().map(Vec::len).collect();
    let combined_pos: Vec<Option<usize>> = target_idx
        .iter()
        .map(|i| combined.vars.iter().position(|v| v == i))
        .collect();
    let mut values = vec![Rat::zero(); out_cards.iter().product::<usize>().max(1)];
    for out_idx in Odometer::new(out_cards.clone()) {
        // evidence-fixed targets contribute only at their fixed state
        let consistent = target_idx
            .iter()
            .zip(&out_idx)
            .all(|(&i, &s)| ev_idx.get(&i).map_or(true, |&fixed| fixed == s));
        if !consistent {
            continue;
        }
        let mut comb_idx = vec![0usize; combined.vars.len()];
        for (slot, pos) in combined_pos.iter().enumerate() {
            if let Some(p) = pos {
                comb_idx[*p] = out_idx[slot];
            }
        }
        values[rank_of(&out_idx, &out_cards)] =
            &combined.values[rank_of(&comb_idx, &combined.cards)] / &mass;
    }
    Ok(Dist::new(out_vars, out_states, values))
}

/// Min-degree ordering over the interaction graph of the CPT scopes.
fn min_degree_order(model: &Cbn, to_eliminate: &[String]) -> Vec<String> {
    let g = model.graph();
    let n = g.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        let mut scope: Vec<usize> = model
            .cpt_at(i)
            .parents()
            .iter()
            .map(|p| g.idx(p).unwrap())
            .collect();
        scope.push(i);
        for a in 0..scope.len() {
            for b in (a + 1)..scope.len() {
                adj[scope[a]].insert(scope[b]);
                adj[scope[b]].insert(scope[a]);
            }
        }
    }
    let mut remaining: BTreeSet<usize> = to_eliminate.iter().map(|nm| g.idx(nm).unwrap()).collect();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let &next = remaining
            .iter()
            .min_by_key(|&&v| (adj[v].iter().filter(|w| remaining.contains(w)).count(), v))
            .unwrap();
        let neighbors: Vec<usize> = adj[next]
            .iter()
            .copied()
            .filter(|w| remaining.contains(w) && *w != next)
            .collect();
        for a in 0..neighbors.len() {
            for b in (a + 1)..neighbors.len() {
                adj[neighbors[a]].insert(neighbors[b]);
                adj[neighbors[b]].insert(neighbors[a]);
            }
        }
        remaining.remove(&next);
        order.push(g.var_at(next).name().to_string());
    }
    order
}
