//! Certificate fixtures and their verification recipes.
//!
//! A [`CertificatePair`] is a machine-checkable witness: two models on
//! one graph that satisfy the same constraints and induce exactly the
//! same observational distribution, yet assign different values to a
//! target causal effect (`SEPARATED`) — or are expected not to
//! (`NOT_SEPARATED`). A [`Fixture`] bundles pairs with identification
//! formulas and drills; [`verify_fixture`] checks the whole bundle:
//! every pair verifies, every formula evaluates identically across each
//! pair and matches the brute-force interventional oracle on freshly
//! sampled constrained models, and every drill holds.
//!
//! The built-in gallery ([`builtin_fixtures`]) is constructed in code and
//! exported to JSON under a versioned directory; the files and the
//! built-ins are kept in lockstep by tests.

mod fixtures;

pub use fixtures::builtin_fixtures;

use crate::constraints::{check_all, sample_constrained, Constraint, ConstraintError};
use crate::estimand::{evaluate, parse_estimand, EstimandError, Evaluator};
use crate::inference::{causal_effect, dist_equal, marginal, Dist, InferenceError};
use crate::io::{
    constraint_json, cpts_json, graph_json_fields, instantiation_json, read_constraints,
    read_graph, read_model, IoError,
};
use crate::json::{to_string_pretty, JsonValue};
use crate::model::{CausalGraph, Cbn, Instantiation, ModelError};
use crate::rat::{parse_rat, Rat};
use crate::rng::SplitMix64;
use crate::transforms::{
    extend_state, observational_equal, permute_constraint, permute_instantiation, permute_states,
    verify_feliminate_cpts, verify_feliminate_marginals, TransformError,
};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("fixture load error: {0}")]
    FixtureLoadError(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Estimand(#[from] EstimandError),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Separated,
    NotSeparated,
}

impl Expectation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Expectation::Separated => "separated",
            Expectation::NotSeparated => "not-separated",
        }
    }
}

/// Two parameterizations of one graph plus a target effect: an
/// unidentifiability witness when `expectation` is `Separated`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificatePair {
    pub label: String,
    pub constraints: Vec<Constraint>,
    pub model_a: Cbn,
    pub model_b: Cbn,
    pub treatment: Instantiation,
    pub outcome: Instantiation,
    pub expectation: Expectation,
}

impl CertificatePair {
    pub fn new(
        label: impl Into<String>,
        constraints: Vec<Constraint>,
        model_a: Cbn,
        model_b: Cbn,
        treatment: Instantiation,
        outcome: Instantiation,
        expectation: Expectation,
    ) -> Result<Self, GalleryError> {
        if model_a.graph() != model_b.graph() {
            return Err(GalleryError::FixtureLoadError(
                "pair members disagree on the graph".to_string(),
            ));
        }
        treatment.validate(model_a.graph())?;
        outcome.validate(model_a.graph())?;
        Ok(CertificatePair {
            label: label.into(),
            constraints,
            model_a,
            model_b,
            treatment,
            outcome,
            expectation,
        })
    }

    pub fn graph(&self) -> &CausalGraph {
        self.model_a.graph()
    }
}

/// Sampling universe for a fixture's identification formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSpec {
    pub graph: CausalGraph,
    pub constraints: Vec<Constraint>,
}

/// One identification formula with its placeholder binding and the
/// interventional query it claims to compute.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimandSpec {
    pub text: String,
    pub binding: BTreeMap<String, String>,
    pub treatment: Instantiation,
    pub outcome: Instantiation,
}

/// Extra verification recipes a fixture can carry.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Drill {
    /// Sample models satisfying `constraints`, functionally eliminate
    /// `var`, and require marginal preservation plus the child-CPT
    /// equalities on everything consistent with `context`.
    MarginalPreservation {
        graph: CausalGraph,
        constraints: Vec<Constraint>,
        var: String,
        context: Instantiation,
        samples: usize,
    },
    /// Run the state-extension sweep over this fixture's pairs.
    StateExtension { eps: Rat },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub id: String,
    pub notes: String,
    pub pairs: Vec<CertificatePair>,
    pub sampling: Option<SamplingSpec>,
    pub estimands: Vec<EstimandSpec>,
    pub drills: Vec<Drill>,
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub label: String,
    pub constraints_ok_a: bool,
    pub constraints_ok_b: bool,
    pub observational_equal: bool,
    pub effect_a: Rat,
    pub effect_b: Rat,
    pub separated: bool,
    pub expectation: Expectation,
    pub pass: bool,
    /// The (shared) observational marginal of `model_a`, for display.
    pub observational: Dist,
}

/// Checks one pair: constraints on both members, exact equality of the
/// observed marginals, and the target effects computed by the
/// enumeration oracle. Semantic failures land in the report; only
/// computational problems error.
pub fn verify_pair(pair: &CertificatePair) -> Result<PairReport, GalleryError> {
    let constraints_ok_a = check_all(&pair.model_a, &pair.constraints)?.is_empty();
    let constraints_ok_b = check_all(&pair.model_b, &pair.constraints)?.is_empty();
    let scope: BTreeSet<String> = pair
        .graph()
        .observed_names()
        .into_iter()
        .map(String::from)
        .collect();
    let obs_a = marginal(&pair.model_a, &scope)?;
    let obs_b = marginal(&pair.model_b, &scope)?;
    let observational_equal = dist_equal(&obs_a, &obs_b)?;
    let effect_a = causal_effect(&pair.model_a, &pair.treatment, &pair.outcome)?;
    let effect_b = causal_effect(&pair.model_b, &pair.treatment, &pair.outcome)?;
    let separated = effect_a != effect_b;
    let pass = constraints_ok_a
        && constraints_ok_b
        && observational_equal
        && (separated == (pair.expectation == Expectation::Separated));
    Ok(PairReport {
        label: pair.label.clone(),
        constraints_ok_a,
        constraints_ok_b,
        observational_equal,
        effect_a,
        effect_b,
        separated,
        expectation: pair.expectation,
        pass,
        observational: obs_a,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimandReport {
    pub text: String,
    pub binding: BTreeMap<String, String>,
    /// The formula evaluates to the same value on both members of every
    /// pair (it only reads the shared observational distribution).
    pub pair_values_equal: bool,
    /// Sampled constrained models on which formula == oracle exactly.
    pub models_matched: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrillReport {
    pub description: String,
    pub cases: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureReport {
    pub id: String,
    pub pairs: Vec<PairReport>,
    pub estimands: Vec<EstimandReport>,
    pub drills: Vec<DrillReport>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOpts {
    /// Constrained models sampled per fixture for estimand checks.
    pub samples: usize,
    pub seed: u64,
    /// Mass split used by state-extension drills.
    pub eps: Rat,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts {
            samples: 100,
            seed: 0xCA05A1,
            eps: Rat::new(1, 3),
        }
    }
}

/// Samples `count` models, skipping seeds whose draw fails (for example
/// a positivity rejection); deterministic in `seed`.
pub fn sample_models(
    spec: &SamplingSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<Cbn>, GalleryError> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let mut s = seed;
    while out.len() < count {
        if attempts > 50 * count + 100 {
            return Err(GalleryError::FixtureLoadError(format!(
                "sampling keeps failing after {attempts} attempts"
            )));
        }
        match sample_constrained(&spec.graph, &spec.constraints, s, 100) {
            Ok(m) => out.push(m),
            Err(
                ConstraintError::PositivityCheckFailed(_)
                | ConstraintError::UnsatisfiableSyntactically(_),
            ) => {}
            Err(e) => return Err(e.into()),
        }
        s = s.wrapping_add(1);
        attempts += 1;
    }
    Ok(out)
}

/// Runs the full verification recipe of one fixture.
pub fn verify_fixture(f: &Fixture, opts: &VerifyOpts) -> Result<FixtureReport, GalleryError> {
    let mut pair_reports = Vec::new();
    for pair in &f.pairs {
        pair_reports.push(verify_pair(pair)?);
    }

    let mut estimand_reports = Vec::new();
    if !f.estimands.is_empty() {
        let models = match &f.sampling {
            Some(spec) => sample_models(spec, opts.samples, opts.seed)?,
            None => Vec::new(),
        };
        let evaluators: Vec<(Evaluator, &Cbn)> = models
            .iter()
            .map(|m| Evaluator::new(m).map(|ev| (ev, m)))
            .collect::<Result<_, _>>()?;
        for spec in &f.estimands {
            let parsed = parse_estimand(&spec.text)
                .map_err(|e| GalleryError::FixtureLoadError(format!("{}: {e}", f.id)))?;
            // observational-only property: identical values across a pair
            let mut pair_values_equal = true;
            for pair in &f.pairs {
                let va = evaluate(&parsed.estimand, &pair.model_a, &spec.binding)?;
                let vb = evaluate(&parsed.estimand, &pair.model_b, &spec.binding)?;
                if va != vb {
                    pair_values_equal = false;
                }
            }
            let mut matched = 0usize;
            let mut mismatches = 0usize;
            let mut first_mismatch = None;
            for (ev, m) in &evaluators {
                let value = ev.evaluate(&parsed.estimand, &spec.binding)?;
                let oracle = causal_effect(m, &spec.treatment, &spec.outcome)?;
                if value == oracle {
                    matched += 1;
                } else {
                    mismatches += 1;
                    if first_mismatch.is_none() {
                        first_mismatch =
                            Some(format!("formula gave {value}, oracle gave {oracle}"));
                    }
                }
            }
            let pass = pair_values_equal && mismatches == 0;
            estimand_reports.push(EstimandReport {
                text: spec.text.clone(),
                binding: spec.binding.clone(),
                pair_values_equal,
                models_matched: matched,
                mismatches,
                first_mismatch,
                pass,
            });
        }
    }

    let mut drill_reports = Vec::new();
    for drill in &f.drills {
        drill_reports.push(run_drill(f, drill, opts)?);
    }

    let pass = pair_reports.iter().all(|r| r.pass)
        && estimand_reports.iter().all(|r| r.pass)
        && drill_reports.iter().all(|r| r.pass);
    Ok(FixtureReport {
        id: f.id.clone(),
        pairs: pair_reports,
        estimands: estimand_reports,
        drills: drill_reports,
        pass,
    })
}

fn run_drill(f: &Fixture, drill: &Drill, opts: &VerifyOpts) -> Result<DrillReport, GalleryError> {
    match drill {
        Drill::MarginalPreservation {
            graph,
            constraints,
            var,
            context,
            samples,
        } => {
            let spec = SamplingSpec {
                graph: graph.clone(),
                constraints: constraints.clone(),
            };
            let models = sample_models(&spec, *samples, opts.seed ^ 0xE11)?;
            let mut failures = Vec::new();
            for (i, m) in models.iter().enumerate() {
                let marg = verify_feliminate_marginals(m, var, context)?;
                if !marg.ok() {
                    failures.push(format!(
                        "model #{i}: {} marginal mismatches",
                        marg.mismatches.len()
                    ));
                }
                let cpts = verify_feliminate_cpts(m, var, context)?;
                if !cpts.ok() {
                    failures.push(format!(
                        "model #{i}: {} CPT mismatches",
                        cpts.mismatches.len()
                    ));
                }
            }
            Ok(DrillReport {
                description: format!(
                    "eliminate `{var}` under context {context}: marginals and child CPTs preserved on {} sampled models",
                    models.len()
                ),
                cases: models.len(),
                pass: failures.is_empty(),
                failures,
            })
        }
        Drill::StateExtension { eps } => {
            let mut cases = 0usize;
            let mut failures = Vec::new();
            for pair in &f.pairs {
                let sweep = extend_state_sweep(pair, eps)?;
                for case in sweep {
                    cases += 1;
                    if !case.pass {
                        failures.push(format!("{}: {}", case.var, case.detail));
                    }
                }
            }
            Ok(DrillReport {
                description: format!("state extension with eps={eps} preserves every certificate"),
                cases,
                pass: failures.is_empty(),
                failures,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Sweeps shared with the acceptance suite

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub var: String,
    pub case: String,
    pub pass: bool,
    pub detail: String,
}

/// Applies `extend_state` to both members of a verified pair, once per
/// variable, and checks the preserved certificate: observational
/// equality always; effects unchanged when the extended variable is
/// hidden or outside the outcome; effects scaled by exactly `1 - eps`
/// (base branch) and `eps` (fresh branch) when it carries an outcome
/// state.
pub fn extend_state_sweep(
    pair: &CertificatePair,
    eps: &Rat,
) -> Result<Vec<SweepCase>, GalleryError> {
    let g = pair.graph();
    let effect_a = causal_effect(&pair.model_a, &pair.treatment, &pair.outcome)?;
    let effect_b = causal_effect(&pair.model_b, &pair.treatment, &pair.outcome)?;
    let one_minus_eps = Rat::one().checked_sub(eps).unwrap();
    let mut out = Vec::new();
    for var in g.variables() {
        let name = var.name().to_string();
        let outcome_state = pair.outcome.get(&name).map(String::from);
        let base = outcome_state
            .clone()
            .unwrap_or_else(|| var.states()[0].clone());
        let ext_a = extend_state(&pair.model_a, &name, &base, eps)?;
        let ext_b = extend_state(&pair.model_b, &name, &base, eps)?;
        let mut ok = true;
        let mut detail = String::new();
        if !observational_equal(&ext_a, &ext_b)? {
            ok = false;
            detail = "observational equality lost".to_string();
        }
        let new_a = causal_effect(&ext_a, &pair.treatment, &pair.outcome)?;
        let new_b = causal_effect(&ext_b, &pair.treatment, &pair.outcome)?;
        let case = match &outcome_state {
            Some(_) => {
                // base branch scales by (1 - eps), fresh branch by eps
                if new_a != &effect_a * &one_minus_eps || new_b != &effect_b * &one_minus_eps {
                    ok = false;
                    detail = format!("base-branch effect not scaled by {one_minus_eps}");
                }
                let fresh = ext_a.graph().var(&name)?.states().last().unwrap().clone();
                let fresh_outcome = pair.outcome.clone().set(name.clone(), fresh);
                let fresh_a = causal_effect(&ext_a, &pair.treatment, &fresh_outcome)?;
                let fresh_b = causal_effect(&ext_b, &pair.treatment, &fresh_outcome)?;
                if fresh_a != &effect_a * eps || fresh_b != &effect_b * eps {
                    ok = false;
                    detail = format!("fresh-branch effect not scaled by {eps}");
                }
                if pair.expectation == Expectation::Separated
                    && (new_a == new_b || fresh_a == fresh_b)
                {
                    ok = false;
                    detail = "separation lost".to_string();
                }
                "outcome variable, outcome state as base"
            }
            None => {
                if new_a != effect_a || new_b != effect_b {
                    ok = false;
                    detail = "effect value changed".to_string();
                }
                if pair.expectation == Expectation::Separated && new_a == new_b {
                    ok = false;
                    detail = "separation lost".to_string();
                }
                if g.is_observed(&name) {
                    "observed variable outside the outcome"
                } else {
                    "hidden variable"
                }
            }
        };
        out.push(SweepCase {
            var: name,
            case: case.to_string(),
            pass: ok,
            detail,
        });
    }
    Ok(out)
}

/// Conjugation sweep: relabeling any variable's states and rewriting the
/// treatment, outcome, and constraint contexts accordingly leaves the
/// effect values and constraint satisfaction unchanged.
pub fn permutation_sweep(
    pair: &CertificatePair,
    rounds: usize,
    seed: u64,
) -> Result<Vec<SweepCase>, GalleryError> {
    let g = pair.graph();
    let effect_a = causal_effect(&pair.model_a, &pair.treatment, &pair.outcome)?;
    let effect_b = causal_effect(&pair.model_b, &pair.treatment, &pair.outcome)?;
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::new();
    for round in 0..rounds {
        let var = g.var_at(rng.next_below(g.len() as u64) as usize);
        let name = var.name().to_string();
        // Fisher-Yates over the state labels
        let mut target: Vec<String> = var.states().to_vec();
        for i in (1..target.len()).rev() {
            let j = rng.next_below((i + 1) as u64) as usize;
            target.swap(i, j);
        }
        let perm: BTreeMap<String, String> = var.states().iter().cloned().zip(target).collect();
        let perm_a = permute_states(&pair.model_a, &name, &perm)?;
        let perm_b = permute_states(&pair.model_b, &name, &perm)?;
        let treatment = permute_instantiation(&pair.treatment, &name, &perm);
        let outcome = permute_instantiation(&pair.outcome, &name, &perm);
        let mut ok = true;
        let mut detail = String::new();
        if causal_effect(&perm_a, &treatment, &outcome)? != effect_a
            || causal_effect(&perm_b, &treatment, &outcome)? != effect_b
        {
            ok = false;
            detail = "effect not conjugation-invariant".to_string();
        }
        let moved: Vec<Constraint> = pair
            .constraints
            .iter()
            .map(|c| permute_constraint(c, &name, &perm))
            .collect();
        if !check_all(&perm_a, &moved)?.is_empty() || !check_all(&perm_b, &moved)?.is_empty() {
            ok = false;
            detail = "constraints lost under permutation".to_string();
        }
        out.push(SweepCase {
            var: name,
            case: format!("round {round}"),
            pass: ok,
            detail,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON

pub const GALLERY_VERSION: u64 = 1;

fn expectation_json(e: Expectation) -> JsonValue {
    JsonValue::str(e.as_str())
}

pub fn pair_json(pair: &CertificatePair) -> JsonValue {
    JsonValue::Obj(vec![
        ("label".into(), JsonValue::str(&pair.label)),
        (
            "graph".into(),
            JsonValue::Obj(graph_json_fields(pair.graph())),
        ),
        (
            "constraints".into(),
            JsonValue::Arr(pair.constraints.iter().map(constraint_json).collect()),
        ),
        (
            "model_a".into(),
            JsonValue::Obj(vec![("cpts".into(), cpts_json(&pair.model_a))]),
        ),
        (
            "model_b".into(),
            JsonValue::Obj(vec![("cpts".into(), cpts_json(&pair.model_b))]),
        ),
        ("treatment".into(), instantiation_json(&pair.treatment)),
        ("outcome".into(), instantiation_json(&pair.outcome)),
        ("expectation".into(), expectation_json(pair.expectation)),
    ])
}

pub fn write_pair(pair: &CertificatePair) -> String {
    to_string_pretty(&pair_json(pair))
}

fn drill_json(d: &Drill) -> JsonValue {
    match d {
        Drill::MarginalPreservation {
            graph,
            constraints,
            var,
            context,
            samples,
        } => JsonValue::Obj(vec![
            ("type".into(), JsonValue::str("marginal-preservation")),
            ("graph".into(), JsonValue::Obj(graph_json_fields(graph))),
            (
                "constraints".into(),
                JsonValue::Arr(constraints.iter().map(constraint_json).collect()),
            ),
            ("var".into(), JsonValue::str(var)),
            ("context".into(), instantiation_json(context)),
            ("samples".into(), JsonValue::UInt(*samples as u64)),
        ]),
        Drill::StateExtension { eps } => JsonValue::Obj(vec![
            ("type".into(), JsonValue::str("state-extension")),
            ("eps".into(), JsonValue::str(eps.to_string())),
        ]),
    }
}

pub fn fixture_json(f: &Fixture) -> JsonValue {
    let mut fields = vec![
        ("gallery_version".into(), JsonValue::UInt(GALLERY_VERSION)),
        ("id".into(), JsonValue::str(&f.id)),
        ("notes".into(), JsonValue::str(&f.notes)),
        (
            "pairs".into(),
            JsonValue::Arr(f.pairs.iter().map(pair_json).collect()),
        ),
    ];
    if let Some(spec) = &f.sampling {
        let mut sampling_fields = vec![(
            "graph".into(),
            JsonValue::Obj(graph_json_fields(&spec.graph)),
        )];
        sampling_fields.push((
            "constraints".into(),
            JsonValue::Arr(spec.constraints.iter().map(constraint_json).collect()),
        ));
        fields.push(("sampling".into(), JsonValue::Obj(sampling_fields)));
    }
    fields.push((
        "estimands".into(),
        JsonValue::Arr(
            f.estimands
                .iter()
                .map(|e| {
                    JsonValue::Obj(vec![
                        ("text".into(), JsonValue::str(&e.text)),
                        (
                            "binding".into(),
                            JsonValue::Obj(
                                e.binding
                                    .iter()
                                    .map(|(k, v)| (k.clone(), JsonValue::str(v)))
                                    .collect(),
                            ),
                        ),
                        ("treatment".into(), instantiation_json(&e.treatment)),
                        ("outcome".into(), instantiation_json(&e.outcome)),
                    ])
                })
                .collect(),
        ),
    ));
    fields.push((
        "drills".into(),
        JsonValue::Arr(f.drills.iter().map(drill_json).collect()),
    ));
    JsonValue::Obj(fields)
}

pub fn write_fixture(f: &Fixture) -> String {
    to_string_pretty(&fixture_json(f))
}

// Reading goes through serde_json values and reuses the model-file
// readers so the validation is shared.

fn value_to_map(
    v: &serde_json::Value,
    what: &str,
) -> Result<BTreeMap<String, String>, GalleryError> {
    let obj = v
        .as_object()
        .ok_or_else(|| GalleryError::FixtureLoadError(format!("{what} must be an object")))?;
    obj.iter()
        .map(|(k, val)| {
            val.as_str()
                .map(|s| (k.clone(), s.to_string()))
                .ok_or_else(|| {
                    GalleryError::FixtureLoadError(format!("{what}.{k} must be a string"))
                })
        })
        .collect()
}

fn load_err(msg: impl Into<String>) -> GalleryError {
    GalleryError::FixtureLoadError(msg.into())
}

fn model_from_parts(
    graph: &serde_json::Value,
    cpts: &serde_json::Value,
) -> Result<Cbn, GalleryError> {
    let assembled = serde_json::json!({
        "variables": graph.get("variables").cloned().unwrap_or(serde_json::Value::Null),
        "edges": graph.get("edges").cloned().unwrap_or_else(|| serde_json::json!([])),
        "cpts": cpts,
    });
    let (model, _) = read_model(&assembled.to_string())?;
    Ok(model)
}

fn constraints_from_value(v: Option<&serde_json::Value>) -> Result<Vec<Constraint>, GalleryError> {
    match v {
        None => Ok(Vec::new()),
        Some(list) => Ok(read_constraints(&list.to_string())?),
    }
}

fn graph_from_value(v: &serde_json::Value) -> Result<CausalGraph, GalleryError> {
    let assembled = serde_json::json!({
        "variables": v.get("variables").cloned().unwrap_or(serde_json::Value::Null),
        "edges": v.get("edges").cloned().unwrap_or_else(|| serde_json::json!([])),
    });
    let (graph, _) = read_graph(&assembled.to_string())?;
    Ok(graph)
}

fn pair_from_value(v: &serde_json::Value) -> Result<CertificatePair, GalleryError> {
    let graph = v
        .get("graph")
        .ok_or_else(|| load_err("pair misses `graph`"))?;
    let cpts_a = v
        .pointer("/model_a/cpts")
        .ok_or_else(|| load_err("pair misses `model_a.cpts`"))?;
    let cpts_b = v
        .pointer("/model_b/cpts")
        .ok_or_else(|| load_err("pair misses `model_b.cpts`"))?;
    let model_a = model_from_parts(graph, cpts_a)?;
    let model_b = model_from_parts(graph, cpts_b)?;
    let constraints = constraints_from_value(v.get("constraints"))?;
    let treatment = Instantiation::from_pairs(value_to_map(
        v.get("treatment").unwrap_or(&serde_json::Value::Null),
        "treatment",
    )?);
    let outcome = Instantiation::from_pairs(value_to_map(
        v.get("outcome").unwrap_or(&serde_json::Value::Null),
        "outcome",
    )?);
    let expectation = match v.get("expectation").and_then(|e| e.as_str()) {
        Some("separated") => Expectation::Separated,
        Some("not-separated") => Expectation::NotSeparated,
        other => return Err(load_err(format!("pair has unknown expectation {other:?}"))),
    };
    let label = v
        .get("label")
        .and_then(|l| l.as_str())
        .unwrap_or("pair")
        .to_string();
    CertificatePair::new(
        label,
        constraints,
        model_a,
        model_b,
        treatment,
        outcome,
        expectation,
    )
}

/// Reads a standalone pair file.
pub fn read_pair(text: &str) -> Result<CertificatePair, GalleryError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| load_err(format!("invalid JSON: {e}")))?;
    pair_from_value(&v)
}

/// Reads a fixture file.
pub fn read_fixture(text: &str) -> Result<Fixture, GalleryError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| load_err(format!("invalid JSON: {e}")))?;
    let id = v
        .get("id")
        .and_then(|x| x.as_str())
        .ok_or_else(|| load_err("fixture misses `id`"))?
        .to_string();
    let notes = v
        .get("notes")
        .and_then(|x| x.as_str())
        .unwrap_or_default()
        .to_string();
    let mut pairs = Vec::new();
    if let Some(list) = v.get("pairs").and_then(|x| x.as_array()) {
        for p in list {
            let pair = pair_from_value(p)?;
            // fixture files promise their pairs satisfy their constraints;
            // standalone pair files stay permissive so verify-pair can
            // report the failure instead
            for (model, member) in [(&pair.model_a, "model_a"), (&pair.model_b, "model_b")] {
                let report = check_all(model, &pair.constraints)?;
                if !report.is_empty() {
                    return Err(load_err(format!(
                        "fixture `{id}`, pair `{}`: {member} violates its constraints: {report}",
                        pair.label
                    )));
                }
            }
            pairs.push(pair);
        }
    }
    let sampling = match v.get("sampling") {
        Some(s) if !s.is_null() => Some(SamplingSpec {
            graph: graph_from_value(
                s.get("graph")
                    .ok_or_else(|| load_err("sampling misses `graph`"))?,
            )?,
            constraints: constraints_from_value(s.get("constraints"))?,
        }),
        _ => None,
    };
    let mut estimands = Vec::new();
    if let Some(list) = v.get("estimands").and_then(|x| x.as_array()) {
        for e in list {
            estimands.push(EstimandSpec {
                text: e
                    .get("text")
                    .and_then(|t| t.as_str())
                    .ok_or_else(|| load_err("estimand misses `text`"))?
                    .to_string(),
                binding: value_to_map(
                    e.get("binding").unwrap_or(&serde_json::json!({})),
                    "binding",
                )?,
                treatment: Instantiation::from_pairs(value_to_map(
                    e.get("treatment").unwrap_or(&serde_json::json!({})),
                    "treatment",
                )?),
                outcome: Instantiation::from_pairs(value_to_map(
                    e.get("outcome").unwrap_or(&serde_json::json!({})),
                    "outcome",
                )?),
            });
        }
    }
    let mut drills = Vec::new();
    if let Some(list) = v.get("drills").and_then(|x| x.as_array()) {
        for d in list {
            match d.get("type").and_then(|t| t.as_str()) {
                Some("marginal-preservation") => {
                    drills.push(Drill::MarginalPreservation {
                        graph: graph_from_value(
                            d.get("graph")
                                .ok_or_else(|| load_err("drill misses `graph`"))?,
                        )?,
                        constraints: constraints_from_value(d.get("constraints"))?,
                        var: d
                            .get("var")
                            .and_then(|x| x.as_str())
                            .ok_or_else(|| load_err("drill misses `var`"))?
                            .to_string(),
                        context: Instantiation::from_pairs(value_to_map(
                            d.get("context").unwrap_or(&serde_json::json!({})),
                            "context",
                        )?),
                        samples: d.get("samples").and_then(|x| x.as_u64()).unwrap_or(50) as usize,
                    });
                }
                Some("state-extension") => {
                    let eps = d
                        .get("eps")
                        .and_then(|x| x.as_str())
                        .ok_or_else(|| load_err("drill misses `eps`"))?;
                    drills.push(Drill::StateExtension {
                        eps: parse_rat(eps).map_err(|e| load_err(e.to_string()))?,
                    });
                }
                other => return Err(load_err(format!("unknown drill type {other:?}"))),
            }
        }
    }
    Ok(Fixture {
        id,
        notes,
        pairs,
        sampling,
        estimands,
        drills,
    })
}
