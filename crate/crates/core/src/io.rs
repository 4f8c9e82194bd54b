//! Model, graph, and constraint files.
//!
//! A model file is UTF-8 JSON with fields `variables` (name, states,
//! observed flag), `edges` (parent/child pairs), `cpts` (child ->
//! {parents, rows: [{given, dist}]}) and an optional `constraints` list.
//! All probabilities are strings accepted by [`parse_rat`]. The canonical
//! writer emits variables and cpts in declaration order, rows in
//! lexicographic order over each CPT's recorded parent order, `given`
//! keys in parent order, and `dist` keys in state order; reading a
//! canonically ordered file and writing it back is byte-identical.
//! A graph file is a model file without the `cpts` field.

use crate::constraints::Constraint;
use crate::json::{to_string_pretty, JsonValue};
use crate::model::{
    build_model, rank_of, CausalGraph, Cbn, Cpt, Instantiation, ModelError, Odometer, Variable,
};
use crate::rat::{parse_rat, RatError};
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rat(#[from] RatError),
    #[error("{0}")]
    Schema(String),
}

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

// ---------------------------------------------------------------------------
// Reading

#[derive(Deserialize)]
struct ModelFile {
    variables: Vec<VarFile>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    #[serde(default)]
    cpts: BTreeMap<String, CptFile>,
    #[serde(default)]
    constraints: Vec<ConstraintFile>,
}

#[derive(Deserialize)]
struct VarFile {
    name: String,
    states: Vec<String>,
    #[serde(default)]
    observed: bool,
}

#[derive(Deserialize)]
struct CptFile {
    #[serde(default)]
    parents: Vec<String>,
    rows: Vec<RowFile>,
}

#[derive(Deserialize)]
struct RowFile {
    #[serde(default)]
    given: BTreeMap<String, String>,
    dist: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ConstraintFile {
    Csi {
        child: String,
        #[serde(default)]
        indep: Vec<String>,
        #[serde(default)]
        context: BTreeMap<String, String>,
        #[serde(default)]
        free: Vec<String>,
    },
    Cfd {
        child: String,
        #[serde(default)]
        p1: Vec<String>,
        #[serde(default)]
        context: BTreeMap<String, String>,
    },
    Fd {
        child: String,
    },
    States {
        var: String,
        states: Vec<String>,
    },
}

impl ConstraintFile {
    fn into_constraint(self) -> Constraint {
        match self {
            ConstraintFile::Csi {
                child,
                indep,
                context,
                free,
            } => Constraint::csi(&child, indep, Instantiation::from_pairs(context), free),
            ConstraintFile::Cfd { child, p1, context } => {
                Constraint::cfd(&child, p1, Instantiation::from_pairs(context))
            }
            ConstraintFile::Fd { child } => Constraint::fd(&child),
            ConstraintFile::States { var, states } => Constraint::state_domain(&var, states),
        }
    }
}

fn graph_of(file: &ModelFile) -> Result<CausalGraph, IoError> {
    let variables: Vec<Variable> = file
        .variables
        .iter()
        .map(|v| Variable::new(&v.name, v.states.iter().cloned()))
        .collect::<Result<_, _>>()?;
    let observed: Vec<String> = file
        .variables
        .iter()
        .filter(|v| v.observed)
        .map(|v| v.name.clone())
        .collect();
    Ok(CausalGraph::new(variables, file.edges.clone(), observed)?)
}

fn cpt_of(graph: &CausalGraph, child: &str, file: &CptFile) -> Result<Cpt, IoError> {
    let child_var = graph.var(child)?;
    let cards: Vec<usize> = file
        .parents
        .iter()
        .map(|p| graph.var(p).map(Variable::card))
        .collect::<Result<_, _>>()?;
    let n_rows: usize = cards.iter().product();
    let mut table: Vec<Option<Vec<crate::rat::Rat>>> = vec![None; n_rows];
    for row in &file.rows {
        let mut idxs = Vec::with_capacity(file.parents.len());
        for p in &file.parents {
            let state = row.given.get(p).ok_or_else(|| {
                schema(format!(
                    "CPT row for `{child}` misses parent `{p}` in `given`"
                ))
            })?;
            idxs.push(graph.var(p)?.state_index(state)?);
        }
        if row.given.len() != file.parents.len() {
            let stray = row
                .given
                .keys()
                .find(|k| !file.parents.contains(k))
                .cloned()
                .unwrap_or_default();
            return Err(schema(format!(
                "CPT row for `{child}` names `{stray}` which is not a parent"
            )));
        }
        let rank = rank_of(&idxs, &cards);
        if table[rank].is_some() {
            return Err(schema(format!(
                "CPT for `{child}` repeats the row given {:?}",
                row.given
            )));
        }
        let mut dist = vec![None; child_var.card()];
        for (state, value) in &row.dist {
            let k = child_var.state_index(state)?;
            if dist[k].is_some() {
                return Err(schema(format!(
                    "CPT row for `{child}` repeats state `{state}`"
                )));
            }
            dist[k] = Some(parse_rat(value)?);
        }
        let dist: Vec<crate::rat::Rat> = dist
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or_else(|| {
                    schema(format!(
                        "CPT row for `{child}` misses state `{}`",
                        child_var.states()[k]
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        table[rank] = Some(dist);
    }
    let table: Vec<Vec<crate::rat::Rat>> = table
        .into_iter()
        .enumerate()
        .map(|(rank, row)| {
            row.ok_or_else(|| schema(format!("CPT for `{child}` misses row #{rank}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Cpt::new(child, file.parents.clone(), table))
}

/// Reads a full model file; returns the model and any embedded
/// constraints.
pub fn read_model(text: &str) -> Result<(Cbn, Vec<Constraint>), IoError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let graph = graph_of(&file)?;
    let mut cpts = Vec::new();
    for (child, cpt_file) in &file.cpts {
        cpts.push(cpt_of(&graph, child, cpt_file)?);
    }
    let model = build_model(graph, cpts)?;
    let constraints = file
        .constraints
        .into_iter()
        .map(ConstraintFile::into_constraint)
        .collect();
    Ok((model, constraints))
}

/// Reads a graph file (a model file without CPTs); constraints embedded
/// in the file are returned alongside.
pub fn read_graph(text: &str) -> Result<(CausalGraph, Vec<Constraint>), IoError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    if !file.cpts.is_empty() {
        return Err(schema(
            "expected a graph file without `cpts`; use read_model for full models",
        ));
    }
    let graph = graph_of(&file)?;
    let constraints = file
        .constraints
        .into_iter()
        .map(ConstraintFile::into_constraint)
        .collect();
    Ok((graph, constraints))
}

/// Reads a standalone constraint file: `{"constraints": [..]}` or a bare
/// JSON array.
pub fn read_constraints(text: &str) -> Result<Vec<Constraint>, IoError> {
    #[derive(Deserialize)]
    struct File {
        constraints: Vec<ConstraintFile>,
    }
    let parsed: Result<File, _> = serde_json::from_str(text);
    let list = match parsed {
        Ok(f) => f.constraints,
        Err(_) => serde_json::from_str::<Vec<ConstraintFile>>(text)
            .map_err(|e| IoError::Json(e.to_string()))?,
    };
    Ok(list
        .into_iter()
        .map(ConstraintFile::into_constraint)
        .collect())
}

// ---------------------------------------------------------------------------
// Writing

pub fn instantiation_json(inst: &Instantiation) -> JsonValue {
    JsonValue::Obj(
        inst.iter()
            .map(|(k, v)| (k.to_string(), JsonValue::str(v)))
            .collect(),
    )
}

pub fn constraint_json(c: &Constraint) -> JsonValue {
    match c {
        Constraint::Csi(csi) => JsonValue::Obj(vec![
            ("type".into(), JsonValue::str("csi")),
            ("child".into(), JsonValue::str(&csi.child)),
            (
                "indep".into(),
                JsonValue::Arr(csi.indep.iter().map(JsonValue::str).collect()),
            ),
            ("context".into(), instantiation_json(&csi.context)),
            (
                "free".into(),
                JsonValue::Arr(csi.free.iter().map(JsonValue::str).collect()),
            ),
        ]),
        Constraint::Cfd(cfd) => JsonValue::Obj(vec![
            ("type".into(), JsonValue::str("cfd")),
            ("child".into(), JsonValue::str(&cfd.child)),
            (
                "p1".into(),
                JsonValue::Arr(cfd.p1.iter().map(JsonValue::str).collect()),
            ),
            ("context".into(), instantiation_json(&cfd.context)),
        ]),
        Constraint::Fd { child } => JsonValue::Obj(vec![
            ("type".into(), JsonValue::str("fd")),
            ("child".into(), JsonValue::str(child)),
        ]),
        Constraint::StateDomain { var, states } => JsonValue::Obj(vec![
            ("type".into(), JsonValue::str("states")),
            ("var".into(), JsonValue::str(var)),
            (
                "states".into(),
                JsonValue::Arr(states.iter().map(JsonValue::str).collect()),
            ),
        ]),
    }
}

pub fn graph_json_fields(graph: &CausalGraph) -> Vec<(String, JsonValue)> {
    let variables = JsonValue::Arr(
        graph
            .variables()
            .iter()
            .map(|v| {
                JsonValue::Obj(vec![
                    ("name".into(), JsonValue::str(v.name())),
                    (
                        "states".into(),
                        JsonValue::Arr(v.states().iter().map(JsonValue::str).collect()),
                    ),
                    (
                        "observed".into(),
                        JsonValue::Bool(graph.is_observed(v.name())),
                    ),
                ])
            })
            .collect(),
    );
    let edges = JsonValue::Arr(
        graph
            .edges()
            .iter()
            .map(|(p, c)| JsonValue::Arr(vec![JsonValue::str(p), JsonValue::str(c)]))
            .collect(),
    );
    vec![("variables".into(), variables), ("edges".into(), edges)]
}

pub fn graph_json(graph: &CausalGraph) -> JsonValue {
    JsonValue::Obj(graph_json_fields(graph))
}

fn cpt_json(graph: &CausalGraph, cpt: &Cpt) -> JsonValue {
    let cards: Vec<usize> = cpt
        .parents()
        .iter()
        .map(|p| graph.var(p).unwrap().card())
        .collect();
    let child_states = graph.var(cpt.child()).unwrap().states();
    let mut rows = Vec::new();
    for (rank, idxs) in Odometer::new(cards).enumerate() {
        let given = JsonValue::Obj(
            cpt.parents()
                .iter()
                .zip(&idxs)
                .map(|(p, &i)| {
                    (
                        p.clone(),
                        JsonValue::str(&graph.var(p).unwrap().states()[i]),
                    )
                })
                .collect(),
        );
        let dist = JsonValue::Obj(
            child_states
                .iter()
                .zip(cpt.row(rank))
                .map(|(s, v)| (s.clone(), JsonValue::str(v.to_string())))
                .collect(),
        );
        rows.push(JsonValue::Obj(vec![
            ("given".into(), given),
            ("dist".into(), dist),
        ]));
    }
    JsonValue::Obj(vec![
        (
            "parents".into(),
            JsonValue::Arr(cpt.parents().iter().map(JsonValue::str).collect()),
        ),
        ("rows".into(), JsonValue::Arr(rows)),
    ])
}

pub fn cpts_json(model: &Cbn) -> JsonValue {
    JsonValue::Obj(
        model
            .graph()
            .variables()
            .iter()
            .map(|v| {
                (
                    v.name().to_string(),
                    cpt_json(model.graph(), model.cpt(v.name()).unwrap()),
                )
            })
            .collect(),
    )
}

pub fn model_json(model: &Cbn, constraints: &[Constraint]) -> JsonValue {
    let mut fields = graph_json_fields(model.graph());
    fields.push(("cpts".into(), cpts_json(model)));
    if !constraints.is_empty() {
        fields.push((
            "constraints".into(),
            JsonValue::Arr(constraints.iter().map(constraint_json).collect()),
        ));
    }
    JsonValue::Obj(fields)
}

/// Canonical text of a model file.
pub fn write_model(model: &Cbn, constraints: &[Constraint]) -> String {
    to_string_pretty(&model_json(model, constraints))
}

/// Canonical text of a graph file.
pub fn write_graph(graph: &CausalGraph, constraints: &[Constraint]) -> String {
    let mut fields = graph_json_fields(graph);
    if !constraints.is_empty() {
        fields.push((
            "constraints".into(),
            JsonValue::Arr(constraints.iter().map(constraint_json).collect()),
        ));
    }
    to_string_pretty(&JsonValue::Obj(fields))
}
