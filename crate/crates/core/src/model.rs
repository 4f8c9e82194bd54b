//! Variables, causal graphs, CPTs, and full models.
//!
//! A [`Cbn`] is a validated pair of an acyclic [`CausalGraph`] (with an
//! observed/hidden split) and one exact-rational [`Cpt`] per variable.
//! Everything is immutable after construction; operations that "modify" a
//! model build a fresh one.

use crate::rat::Rat;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable `{0}` has an empty name or fewer than two states")]
    BadVariable(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{0}` repeats state label `{1}`")]
    DuplicateState(String, String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown state `{state}` for variable `{var}`")]
    UnknownState { var: String, state: String },
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("cycle detected through `{0}`")]
    CycleDetected(String),
    #[error("no CPT supplied for variable `{0}`")]
    MissingCpt(String),
    #[error("more than one CPT supplied for variable `{0}`")]
    DuplicateCpt(String),
    #[error("CPT for `{child}` lists parents {listed:?} but the graph gives {expected:?}")]
    ParentMismatch {
        child: String,
        listed: Vec<String>,
        expected: Vec<String>,
    },
    #[error("CPT for `{child}` has {rows} rows, expected {expected}")]
    RowCountMismatch {
        child: String,
        rows: usize,
        expected: usize,
    },
    #[error("CPT row for `{child}` given {given} has {len} entries, expected {expected}")]
    RowWidthMismatch {
        child: String,
        given: String,
        len: usize,
        expected: usize,
    },
    #[error("CPT row for `{child}` given {given} sums to {sum}, not 1")]
    RowSumNotOne {
        child: String,
        given: String,
        sum: String,
    },
}

/// A named variable with an ordered list of at least two state labels.
/// State order is significant: it fixes CPT row and column layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new(
        name: impl Into<String>,
        states: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if name.is_empty() || states.len() < 2 {
            return Err(ModelError::BadVariable(name));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.clone()) {
                return Err(ModelError::DuplicateState(name, s.clone()));
            }
        }
        Ok(Variable { name, states })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn card(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Result<usize, ModelError> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| ModelError::UnknownState {
                var: self.name.clone(),
                state: label.to_string(),
            })
    }
}

/// A DAG over declared variables plus the observed/hidden partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalGraph {
    variables: Vec<Variable>,
    edges: Vec<(String, String)>,
    observed: BTreeSet<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl CausalGraph {
    pub fn new(
        variables: Vec<Variable>,
        edges: Vec<(String, String)>,
        observed: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
        }
        let n = variables.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut seen_edges = HashSet::new();
        for (p, c) in &edges {
            let pi = *index
                .get(p)
                .ok_or_else(|| ModelError::UnknownVariable(p.clone()))?;
            let ci = *index
                .get(c)
                .ok_or_else(|| ModelError::UnknownVariable(c.clone()))?;
            if pi == ci {
                return Err(ModelError::SelfLoop(p.clone()));
            }
            if !seen_edges.insert((pi, ci)) {
                return Err(ModelError::DuplicateEdge(p.clone(), c.clone()));
            }
            parents[ci].push(pi);
            children[pi].push(ci);
        }
        // parent and child lists in declaration order
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let observed: BTreeSet<String> = observed.into_iter().map(Into::into).collect();
        for name in &observed {
            if !index.contains_key(name) {
                return Err(ModelError::UnknownVariable(name.clone()));
            }
        }
        // Kahn's algorithm; any leftover node sits on a cycle
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(&next) = ready.iter().next() {
            ready.remove(&next);
            topo.push(next);
            for &c in &children[next] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() != n {
            let stuck = (0..n).find(|i| !topo.contains(i)).unwrap();
            return Err(ModelError::CycleDetected(variables[stuck].name.clone()));
        }
        Ok(CausalGraph {
            variables,
            edges,
            observed,
            index,
            parents,
            children,
            topo,
        })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn idx(&self, name: &str) -> Result<usize, ModelError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Result<&Variable, ModelError> {
        Ok(&self.variables[self.idx(name)?])
    }

    pub fn var_at(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    /// Parent names in declaration order.
    pub fn parents_of(&self, name: &str) -> Result<Vec<&str>, ModelError> {
        let i = self.idx(name)?;
        Ok(self.parents[i]
            .iter()
            .map(|&p| self.variables[p].name.as_str())
            .collect())
    }

    pub fn children_of(&self, name: &str) -> Result<Vec<&str>, ModelError> {
        let i = self.idx(name)?;
        Ok(self.children[i]
            .iter()
            .map(|&c| self.variables[c].name.as_str())
            .collect())
    }

    pub fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn is_observed(&self, name: &str) -> bool {
        self.observed.contains(name)
    }

    /// Observed variable names in declaration order.
    pub fn observed_names(&self) -> Vec<&str> {
        self.variables
            .iter()
            .map(|v| v.name.as_str())
            .filter(|n| self.observed.contains(*n))
            .collect()
    }

    /// Hidden variable names in declaration order.
    pub fn hidden_names(&self) -> Vec<&str> {
        self.variables
            .iter()
            .map(|v| v.name.as_str())
            .filter(|n| !self.observed.contains(*n))
            .collect()
    }

    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }
}

/// Iterates the cartesian product of `cards` as index tuples, first
/// coordinate most significant (the canonical row order).
pub(crate) struct Odometer {
    cards: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(cards: Vec<usize>) -> Self {
        let done = cards.contains(&0);
        let current = vec![0; cards.len()];
        Odometer {
            cards,
            current,
            done,
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut i = self.cards.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.current[i] += 1;
            if self.current[i] < self.cards[i] {
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}

pub(crate) fn rank_of(states: &[usize], cards: &[usize]) -> usize {
    debug_assert_eq!(states.len(), cards.len());
    let mut r = 0;
    for (s, c) in states.iter().zip(cards) {
        debug_assert!(s < c);
        r = r * c + s;
    }
    r
}

/// One conditional probability table: a distribution over the child's
/// states for every instantiation of its parents. Rows follow the
/// lexicographic order of parent state indices over the recorded parent
/// order (first parent most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpt {
    child: String,
    parents: Vec<String>,
    table: Vec<Vec<Rat>>,
}

impl Cpt {
    pub fn new(
        child: impl Into<String>,
        parents: impl IntoIterator<Item = impl Into<String>>,
        table: Vec<Vec<Rat>>,
    ) -> Self {
        Cpt {
            child: child.into(),
            parents: parents.into_iter().map(Into::into).collect(),
            table,
        }
    }

    pub fn child(&self) -> &str {
        &self.child
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.table
    }

    pub fn row(&self, rank: usize) -> &[Rat] {
        &self.table[rank]
    }
}

/// Builds a CPT by calling `f` once per parent instantiation, in canonical
/// row order. `f` receives the parent state labels (parallel to `parents`)
/// and returns the child distribution in state order.
pub fn cpt_from_fn(
    graph: &CausalGraph,
    child: &str,
    parents: &[&str],
    f: impl Fn(&ParentCtx) -> Vec<Rat>,
) -> Result<Cpt, ModelError> {
    let cards: Vec<usize> = parents
        .iter()
        .map(|p| graph.var(p).map(Variable::card))
        .collect::<Result<_, _>>()?;
    let mut table = Vec::new();
    for idxs in Odometer::new(cards) {
        let labels: Vec<&str> = parents
            .iter()
            .zip(&idxs)
            .map(|(p, &i)| graph.var(p).unwrap().states()[i].as_str())
            .collect();
        let ctx = ParentCtx {
            names: parents,
            labels,
            indices: idxs,
        };
        table.push(f(&ctx));
    }
    Ok(Cpt::new(child, parents.iter().copied(), table))
}

/// Parent instantiation handed to [`cpt_from_fn`] callbacks.
pub struct ParentCtx<'a> {
    names: &'a [&'a str],
    labels: Vec<&'a str>,
    indices: Vec<usize>,
}

impl ParentCtx<'_> {
    pub fn label(&self, name: &str) -> &str {
        let i = self.names.iter().position(|n| *n == name).unwrap();
        self.labels[i]
    }

    /// State index of parent `name` in its declared state order.
    pub fn idx(&self, name: &str) -> usize {
        let i = self.names.iter().position(|n| *n == name).unwrap();
        self.indices[i]
    }
}

/// A causal Bayesian network: graph plus one validated CPT per variable,
/// stored in variable declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cbn {
    graph: CausalGraph,
    cpts: Vec<Cpt>,
}

/// Validates and assembles a model from a graph and one CPT per variable.
pub fn build_model(graph: CausalGraph, cpts: Vec<Cpt>) -> Result<Cbn, ModelError> {
    let n = graph.len();
    let mut slots: Vec<Option<Cpt>> = (0..n).map(|_| None).collect();
    for cpt in cpts {
        let i = graph.idx(&cpt.child)?;
        if slots[i].is_some() {
            return Err(ModelError::DuplicateCpt(cpt.child.clone()));
        }
        slots[i] = Some(cpt);
    }
    let mut out = Vec::with_capacity(n);
    for (i, slot) in slots.into_iter().enumerate() {
        let child = graph.var_at(i).name().to_string();
        let cpt = slot.ok_or_else(|| ModelError::MissingCpt(child.clone()))?;
        validate_cpt(&graph, &cpt)?;
        out.push(cpt);
    }
    Ok(Cbn { graph, cpts: out })
}

fn validate_cpt(graph: &CausalGraph, cpt: &Cpt) -> Result<(), ModelError> {
    let child_var = graph.var(&cpt.child)?;
    let expected: BTreeSet<&str> = graph.parents_of(&cpt.child)?.into_iter().collect();
    let listed: BTreeSet<&str> = cpt.parents.iter().map(String::as_str).collect();
    if expected != listed || cpt.parents.len() != expected.len() {
        return Err(ModelError::ParentMismatch {
            child: cpt.child.clone(),
            listed: cpt.parents.clone(),
            expected: expected.into_iter().map(String::from).collect(),
        });
    }
    let cards: Vec<usize> = cpt
        .parents
        .iter()
        .map(|p| graph.var(p).map(Variable::card))
        .collect::<Result<_, _>>()?;
    let expected_rows: usize = cards.iter().product();
    if cpt.table.len() != expected_rows {
        return Err(ModelError::RowCountMismatch {
            child: cpt.child.clone(),
            rows: cpt.table.len(),
            expected: expected_rows,
        });
    }
    for (rank, idxs) in Odometer::new(cards).enumerate() {
        let given = describe_row(graph, cpt, &idxs);
        let row = &cpt.table[rank];
        if row.len() != child_var.card() {
            return Err(ModelError::RowWidthMismatch {
                child: cpt.child.clone(),
                given,
                len: row.len(),
                expected: child_var.card(),
            });
        }
        let mut sum = Rat::zero();
        for v in row {
            sum += v;
        }
        if !sum.is_one() {
            return Err(ModelError::RowSumNotOne {
                child: cpt.child.clone(),
                given,
                sum: sum.to_string(),
            });
        }
    }
    Ok(())
}

fn describe_row(graph: &CausalGraph, cpt: &Cpt, idxs: &[usize]) -> String {
    if cpt.parents.is_empty() {
        return "()".to_string();
    }
    let parts: Vec<String> = cpt
        .parents
        .iter()
        .zip(idxs)
        .map(|(p, &i)| format!("{}={}", p, graph.var(p).unwrap().states()[i]))
        .collect();
    parts.join(",")
}

impl Cbn {
    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn cpt(&self, name: &str) -> Result<&Cpt, ModelError> {
        Ok(&self.cpts[self.graph.idx(name)?])
    }

    pub fn cpt_at(&self, i: usize) -> &Cpt {
        &self.cpts[i]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }
}

/// A partial or full assignment of state labels to variables.
#[derive(Debug, Clone, PartialEq, Eq, Default, PartialOrd, Ord)]
pub struct Instantiation {
    assignments: BTreeMap<String, String>,
}

impl Instantiation {
    pub fn empty() -> Self {
        Instantiation::default()
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Self {
        Instantiation {
            assignments: pairs
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    /// Parses `"X=0,Y=1"`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(Instantiation::empty());
        }
        for part in trimmed.split(',') {
            let (var, state) = part
                .split_once('=')
                .ok_or_else(|| ModelError::UnknownVariable(part.trim().to_string()))?;
            map.insert(var.trim().to_string(), state.trim().to_string());
        }
        Ok(Instantiation { assignments: map })
    }

    pub fn set(mut self, var: impl Into<String>, state: impl Into<String>) -> Self {
        self.assignments.insert(var.into(), state.into());
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.assignments.get(var).map(String::as_str)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.assignments.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.assignments
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// True when the two assignments agree on every shared variable.
    pub fn consistent_with(&self, other: &Instantiation) -> bool {
        self.assignments
            .iter()
            .all(|(k, v)| other.get(k).is_none_or(|w| w == v))
    }

    /// Checks that every assigned variable exists and every state is legal.
    pub fn validate(&self, graph: &CausalGraph) -> Result<(), ModelError> {
        for (var, state) in &self.assignments {
            graph.var(var)?.state_index(state)?;
        }
        Ok(())
    }
}

impl fmt::Display for Instantiation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .assignments
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::parse_rat;

    fn r(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    fn coin_graph() -> CausalGraph {
        CausalGraph::new(vec![Variable::new("X", ["0", "1"]).unwrap()], vec![], ["X"]).unwrap()
    }

    #[test]
    fn smallest_model_builds() {
        let g = coin_graph();
        let cpt = Cpt::new("X", Vec::<String>::new(), vec![vec![r("1/2"), r("1/2")]]);
        let m = build_model(g, vec![cpt]).unwrap();
        assert_eq!(m.cpt("X").unwrap().rows().len(), 1);
    }

    #[test]
    fn row_sum_violation_is_reported() {
        let g = coin_graph();
        let cpt = Cpt::new("X", Vec::<String>::new(), vec![vec![r("1/2"), r("0.49")]]);
        let err = build_model(g, vec![cpt]).unwrap_err();
        match err {
            ModelError::RowSumNotOne { child, sum, .. } => {
                assert_eq!(child, "X");
                assert_eq!(sum, "99/100");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_and_duplicate_cpts() {
        let g = CausalGraph::new(
            vec![
                Variable::new("A", ["0", "1"]).unwrap(),
                Variable::new("B", ["0", "1"]).unwrap(),
            ],
            vec![("A".into(), "B".into())],
            ["A", "B"],
        )
        .unwrap();
        let a = Cpt::new("A", Vec::<String>::new(), vec![vec![r("1/2"), r("1/2")]]);
        let err = build_model(g.clone(), vec![a.clone()]).unwrap_err();
        assert_eq!(err, ModelError::MissingCpt("B".into()));
        let err = build_model(g, vec![a.clone(), a]).unwrap_err();
        assert_eq!(err, ModelError::DuplicateCpt("A".into()));
    }

    #[test]
    fn parent_mismatch_names_child() {
        let g = CausalGraph::new(
            vec![
                Variable::new("A", ["0", "1"]).unwrap(),
                Variable::new("B", ["0", "1"]).unwrap(),
            ],
            vec![("A".into(), "B".into())],
            ["A", "B"],
        )
        .unwrap();
        let a = Cpt::new("A", Vec::<String>::new(), vec![vec![r("1/2"), r("1/2")]]);
        let b_wrong = Cpt::new("B", Vec::<String>::new(), vec![vec![r("1/2"), r("1/2")]]);
        match build_model(g, vec![a, b_wrong]).unwrap_err() {
            ModelError::ParentMismatch { child, .. } => assert_eq!(child, "B"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn cycles_and_bad_edges_are_rejected() {
        let vars = || {
            vec![
                Variable::new("A", ["0", "1"]).unwrap(),
                Variable::new("B", ["0", "1"]).unwrap(),
            ]
        };
        let err = CausalGraph::new(
            vars(),
            vec![("A".into(), "B".into()), ("B".into(), "A".into())],
            ["A"],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::CycleDetected(_)));
        let err = CausalGraph::new(vars(), vec![("A".into(), "A".into())], ["A"]).unwrap_err();
        assert_eq!(err, ModelError::SelfLoop("A".into()));
        let err = CausalGraph::new(vars(), vec![("A".into(), "Z".into())], ["A"]).unwrap_err();
        assert_eq!(err, ModelError::UnknownVariable("Z".into()));
        let err = CausalGraph::new(
            vars(),
            vec![("A".into(), "B".into()), ("A".into(), "B".into())],
            ["A"],
        )
        .unwrap_err();
        assert_eq!(err, ModelError::DuplicateEdge("A".into(), "B".into()));
    }

    #[test]
    fn odometer_is_lexicographic() {
        let rows: Vec<Vec<usize>> = Odometer::new(vec![2, 3]).collect();
        assert_eq!(
            rows,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        assert_eq!(rank_of(&[1, 2], &[2, 3]), 5);
        let empty: Vec<Vec<usize>> = Odometer::new(vec![]).collect();
        assert_eq!(empty, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn instantiation_parse_and_consistency() {
        let i = Instantiation::parse("X=0, Y=1").unwrap();
        assert_eq!(i.get("X"), Some("0"));
        assert_eq!(i.get("Y"), Some("1"));
        let j = Instantiation::from_pairs([("X", "0")]);
        assert!(j.consistent_with(&i));
        assert!(i.consistent_with(&j));
        let k = Instantiation::from_pairs([("X", "1")]);
        assert!(!k.consistent_with(&i));
        assert!(Instantiation::parse("").unwrap().is_empty());
        assert!(Instantiation::parse("X").is_err());
    }
}
