//! Command-line front end: exact inference, interventions, constraint
//! checks, model surgeries, identification formulas, and the certificate
//! gallery.
//!
//! Exit codes: 0 on success (and on clean verification), 1 when a
//! verification fails (constraint violations, a failing pair or
//! fixture), 2 on input or usage errors. `--json` switches stdout to a
//! stable machine-readable schema; identical inputs and seeds produce
//! byte-identical output.

use causalkit_core::constraints::{check_all, sample_constrained, Constraint};
use causalkit_core::estimand::{free_placeholders, parse_estimand, Evaluator};
use causalkit_core::gallery::{
    builtin_fixtures, read_pair, verify_fixture, verify_pair, write_fixture, write_pair,
    PairReport, VerifyOpts,
};
use causalkit_core::inference::{
    intervene, marginal_capped, marginal_given_capped, Dist, DEFAULT_STATE_CAP,
};
use causalkit_core::io::{read_constraints, read_graph, read_model, write_model};
use causalkit_core::json::{to_string_pretty, JsonValue};
use causalkit_core::model::{Cbn, Instantiation};
use causalkit_core::rat::{parse_rat, Rat};
use causalkit_core::transforms::{
    extend_state, functional_eliminate, permute_states, verify_feliminate_cpts,
    verify_feliminate_marginals,
};
use clap::{Args, Parser, Subcommand};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "causalkit",
    version,
    about = "Exact-arithmetic workbench for causal Bayesian networks and identifiability certificates"
)]
struct Cli {
    /// Emit machine-readable JSON on stdout
    #[arg(long, global = true)]
    json: bool,
    /// Cap on the number of joint instantiations enumeration will accept
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_CAP)]
    max_states: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print an exact (conditional) marginal distribution
    Infer {
        #[arg(short, long)]
        model: PathBuf,
        /// Comma-separated target variables
        #[arg(long, value_delimiter = ',')]
        targets: Vec<String>,
        /// Conditioning event, e.g. X=0,Y=1
        #[arg(long)]
        given: Option<String>,
    },
    /// Compute an interventional probability Pr_x(y)
    Do {
        #[arg(short, long)]
        model: PathBuf,
        /// Treatment instantiation, e.g. X=0,D=1
        #[arg(long)]
        set: String,
        /// Outcome instantiation, e.g. Y=0
        #[arg(long)]
        query: String,
    },
    /// Check the constraints embedded in (or supplied next to) a model
    Check {
        #[arg(short, long)]
        model: PathBuf,
        /// Extra constraint file (JSON)
        #[arg(short, long)]
        constraints: Option<PathBuf>,
    },
    /// Sample a model satisfying the given constraints
    Sample {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(short, long)]
        constraints: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Rows are integer weights in [1, bound], normalized
        #[arg(long, default_value_t = 100)]
        weight_bound: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Functionally eliminate a variable; with --context, verify the
    /// marginal-preservation and CPT guarantees first
    Feliminate {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long)]
        var: String,
        /// CFD context, e.g. C=0 (empty string for a plain FD)
        #[arg(long)]
        context: Option<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Split a state's mass onto a fresh clone state
    ExtendState {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long)]
        var: String,
        #[arg(long)]
        base: String,
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Relabel a variable's states through a bijection
    Permute {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long)]
        var: String,
        /// Mapping old:new pairs, e.g. 0:1,1:0
        #[arg(long)]
        map: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate an identification formula against a model
    EvalEstimand {
        #[arg(short, long)]
        model: PathBuf,
        /// File holding the formula text
        #[arg(short, long)]
        estimand: PathBuf,
        /// Placeholder binding, e.g. x=0,y=0
        #[arg(long)]
        bind: Option<String>,
    },
    /// Verify a certificate pair file; exit 0 iff it passes
    VerifyPair {
        #[arg(short, long)]
        pair: PathBuf,
    },
    /// Work with the built-in certificate gallery
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// List fixture ids and contents
    List,
    /// Verify fixtures; exit 0 iff all selected fixtures pass
    Verify(GalleryVerifyArgs),
    /// Write fixture and pair files under a directory
    Export {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct GalleryVerifyArgs {
    /// Verify a single fixture
    #[arg(long)]
    id: Option<String>,
    /// Constrained models sampled per fixture
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0xCA05A1)]
    seed: u64,
}

enum CliError {
    /// Bad input or usage: exit 2
    Input(String),
    /// A verification failed: exit 1
    Verification(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = Output { json: cli.json };
    let result = match &cli.command {
        Command::Infer {
            model,
            targets,
            given,
        } => cmd_infer(&out, cli.max_states, model, targets, given.as_deref()),
        Command::Do { model, set, query } => cmd_do(&out, cli.max_states, model, set, query),
        Command::Check { model, constraints } => cmd_check(&out, model, constraints.as_deref()),
        Command::Sample {
            graph,
            constraints,
            seed,
            weight_bound,
            output,
        } => cmd_sample(
            &out,
            graph,
            constraints.as_deref(),
            *seed,
            *weight_bound,
            output,
        ),
        Command::Feliminate {
            model,
            var,
            context,
            output,
        } => cmd_feliminate(&out, model, var, context.as_deref(), output),
        Command::ExtendState {
            model,
            var,
            base,
            eps,
            output,
        } => cmd_extend(&out, model, var, base, eps, output),
        Command::Permute {
            model,
            var,
            map,
            output,
        } => cmd_permute(&out, model, var, map, output),
        Command::EvalEstimand {
            model,
            estimand,
            bind,
        } => cmd_eval(&out, model, estimand, bind.as_deref()),
        Command::VerifyPair { pair } => cmd_verify_pair(pair),
        Command::Gallery { command } => match command {
            GalleryCommand::List => cmd_gallery_list(&out),
            GalleryCommand::Verify(args) => cmd_gallery_verify(&out, args),
            GalleryCommand::Export { dir } => cmd_gallery_export(&out, dir),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct Output {
    json: bool,
}

impl Output {
    fn emit(&self, json: JsonValue, text: String) {
        if self.json {
            print!("{}", to_string_pretty(&json));
        } else {
            println!("{text}");
        }
    }
}

fn schema(kind: &str, fields: Vec<(String, JsonValue)>) -> JsonValue {
    let mut all = vec![
        ("schema_version".to_string(), JsonValue::UInt(1)),
        ("kind".to_string(), JsonValue::str(kind)),
    ];
    all.extend(fields);
    JsonValue::Obj(all)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<(Cbn, Vec<Constraint>), CliError> {
    read_model(&read_file(path)?).map_err(CliError::input)
}

fn parse_inst(text: &str) -> Result<Instantiation, CliError> {
    Instantiation::parse(text).map_err(CliError::input)
}

fn rat_fields(p: &Rat) -> Vec<(String, JsonValue)> {
    vec![
        ("p".to_string(), JsonValue::str(p.to_string())),
        ("decimal".to_string(), JsonValue::str(p.to_decimal(6))),
    ]
}

fn dist_table(dist: &Dist) -> (JsonValue, String) {
    let mut entries = Vec::new();
    let mut text = String::new();
    let _ = writeln!(text, "{:<28} {:>14} {:>12}", "assignment", "p", "decimal");
    for (inst, value) in dist.iter() {
        let mut fields = vec![(
            "assignment".to_string(),
            causalkit_core::io::instantiation_json(&inst),
        )];
        fields.extend(rat_fields(value));
        entries.push(JsonValue::Obj(fields));
        let _ = writeln!(
            text,
            "{:<28} {:>14} {:>12}",
            inst.to_string(),
            value.to_string(),
            value.to_decimal(6)
        );
    }
    text.pop();
    (JsonValue::Arr(entries), text)
}

fn cmd_infer(
    out: &Output,
    cap: u128,
    model: &Path,
    targets: &[String],
    given: Option<&str>,
) -> CliResult {
    let (m, _) = load_model(model)?;
    if targets.is_empty() {
        return Err(CliError::Input(
            "--targets must name at least one variable".into(),
        ));
    }
    let targets: BTreeSet<String> = targets.iter().cloned().collect();
    let given = match given {
        Some(g) => parse_inst(g)?,
        None => Instantiation::empty(),
    };
    let dist = marginal_given_capped(&m, &targets, &given, cap).map_err(CliError::input)?;
    let (entries, table) = dist_table(&dist);
    let scope = JsonValue::Arr(dist.scope().iter().map(JsonValue::str).collect());
    out.emit(
        schema(
            "distribution",
            vec![
                ("scope".to_string(), scope),
                (
                    "given".to_string(),
                    causalkit_core::io::instantiation_json(&given),
                ),
                ("entries".to_string(), entries),
            ],
        ),
        table,
    );
    Ok(())
}

fn cmd_do(out: &Output, cap: u128, model: &Path, set: &str, query: &str) -> CliResult {
    let (m, _) = load_model(model)?;
    let treatment = parse_inst(set)?;
    let outcome = parse_inst(query)?;
    if outcome.is_empty() {
        return Err(CliError::Input(
            "--query must assign at least one variable".into(),
        ));
    }
    let mutilated = intervene(&m, &treatment).map_err(CliError::input)?;
    let targets: BTreeSet<String> = outcome.vars().map(String::from).collect();
    let dist = marginal_capped(&mutilated, &targets, cap).map_err(CliError::input)?;
    let value = dist.get(&outcome).map_err(CliError::input)?.clone();
    out.emit(
        schema(
            "effect",
            vec![
                (
                    "treatment".to_string(),
                    causalkit_core::io::instantiation_json(&treatment),
                ),
                (
                    "outcome".to_string(),
                    causalkit_core::io::instantiation_json(&outcome),
                ),
            ]
            .into_iter()
            .chain(rat_fields(&value))
            .collect(),
        ),
        format!(
            "Pr_{{{treatment}}}({outcome}) = {value} ({})",
            value.to_decimal(6)
        ),
    );
    Ok(())
}

fn cmd_check(out: &Output, model: &Path, constraints: Option<&Path>) -> CliResult {
    let (m, mut cs) = load_model(model)?;
    if let Some(path) = constraints {
        cs.extend(read_constraints(&read_file(path)?).map_err(CliError::input)?);
    }
    let report = check_all(&m, &cs).map_err(CliError::input)?;
    let clean = report.is_empty();
    let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    out.emit(
        schema(
            "check",
            vec![
                ("constraints".to_string(), JsonValue::UInt(cs.len() as u64)),
                ("clean".to_string(), JsonValue::Bool(clean)),
                (
                    "violations".to_string(),
                    JsonValue::Arr(violations.iter().map(JsonValue::str).collect()),
                ),
            ],
        ),
        if clean {
            format!("{} constraint(s): all satisfied", cs.len())
        } else {
            format!(
                "{} violation(s):\n{}",
                violations.len(),
                violations.join("\n")
            )
        },
    );
    if clean {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} constraint violation(s)",
            violations.len()
        )))
    }
}

fn cmd_sample(
    out: &Output,
    graph: &Path,
    constraints: Option<&Path>,
    seed: u64,
    weight_bound: u64,
    output: &Path,
) -> CliResult {
    let (g, mut cs) = read_graph(&read_file(graph)?).map_err(CliError::input)?;
    if let Some(path) = constraints {
        cs.extend(read_constraints(&read_file(path)?).map_err(CliError::input)?);
    }
    let model = sample_constrained(&g, &cs, seed, weight_bound).map_err(CliError::input)?;
    write_file(output, &write_model(&model, &cs))?;
    out.emit(
        schema(
            "sample",
            vec![
                (
                    "path".to_string(),
                    JsonValue::str(output.display().to_string()),
                ),
                ("seed".to_string(), JsonValue::UInt(seed)),
                ("constraints".to_string(), JsonValue::UInt(cs.len() as u64)),
            ],
        ),
        format!("wrote {} (seed {seed})", output.display()),
    );
    Ok(())
}

fn cmd_feliminate(
    out: &Output,
    model: &Path,
    var: &str,
    context: Option<&str>,
    output: &Path,
) -> CliResult {
    let (m, cs) = load_model(model)?;
    let mut checked = Vec::new();
    if let Some(ctx_text) = context {
        let ctx = parse_inst(ctx_text)?;
        let marg = verify_feliminate_marginals(&m, var, &ctx)
            .map_err(|e| CliError::Verification(e.to_string()))?;
        if !marg.ok() {
            return Err(CliError::Verification(format!(
                "{} marginal(s) changed under elimination of `{var}`",
                marg.mismatches.len()
            )));
        }
        let cpts = verify_feliminate_cpts(&m, var, &ctx)
            .map_err(|e| CliError::Verification(e.to_string()))?;
        if !cpts.ok() {
            return Err(CliError::Verification(format!(
                "{} rewritten CPT entr(ies) disagree with the original conditionals",
                cpts.mismatches.len()
            )));
        }
        checked.push((
            "marginals_checked".to_string(),
            JsonValue::UInt(marg.checked as u64),
        ));
        checked.push((
            "cpt_entries_checked".to_string(),
            JsonValue::UInt(cpts.checked as u64),
        ));
    }
    let eliminated = functional_eliminate(&m, var).map_err(CliError::input)?;
    // constraints mentioning the removed variable no longer apply
    let kept: Vec<Constraint> = cs
        .into_iter()
        .filter(|c| !constraint_mentions(c, var))
        .collect();
    write_file(output, &write_model(&eliminated, &kept))?;
    let summary = if checked.is_empty() {
        format!("eliminated `{var}`; wrote {}", output.display())
    } else {
        format!(
            "eliminated `{var}` (marginal preservation verified); wrote {}",
            output.display()
        )
    };
    let mut fields = vec![(
        "path".to_string(),
        JsonValue::str(output.display().to_string()),
    )];
    fields.extend(checked);
    out.emit(schema("feliminate", fields), summary);
    Ok(())
}

fn constraint_mentions(c: &Constraint, var: &str) -> bool {
    match c {
        Constraint::Csi(csi) => {
            csi.child == var
                || csi.indep.contains(var)
                || csi.free.contains(var)
                || csi.context.get(var).is_some()
        }
        Constraint::Cfd(cfd) => {
            cfd.child == var || cfd.p1.contains(var) || cfd.context.get(var).is_some()
        }
        Constraint::Fd { child } => child == var,
        Constraint::StateDomain { var: v, .. } => v == var,
    }
}

fn cmd_extend(
    out: &Output,
    model: &Path,
    var: &str,
    base: &str,
    eps: &str,
    output: &Path,
) -> CliResult {
    let (m, cs) = load_model(model)?;
    let eps = parse_rat(eps).map_err(CliError::input)?;
    let extended = extend_state(&m, var, base, &eps).map_err(CliError::input)?;
    let fresh = extended
        .graph()
        .var(var)
        .map_err(CliError::input)?
        .states()
        .last()
        .unwrap()
        .clone();
    // a state declaration on the extended variable no longer holds, and
    // splitting the base state's mass breaks determinism of the variable
    // itself; everything else survives (children copy the base rows)
    let kept: Vec<Constraint> = cs
        .into_iter()
        .filter(|c| match c {
            Constraint::StateDomain { var: v, .. } => v != var,
            Constraint::Cfd(cfd) => cfd.child != var,
            Constraint::Fd { child } => child != var,
            Constraint::Csi(_) => true,
        })
        .collect();
    write_file(output, &write_model(&extended, &kept))?;
    out.emit(
        schema(
            "extend-state",
            vec![
                (
                    "path".to_string(),
                    JsonValue::str(output.display().to_string()),
                ),
                ("fresh_state".to_string(), JsonValue::str(&fresh)),
            ],
        ),
        format!(
            "added state `{fresh}` to `{var}` (mass of `{base}` split by {eps}); wrote {}",
            output.display()
        ),
    );
    Ok(())
}

fn cmd_permute(out: &Output, model: &Path, var: &str, map: &str, output: &Path) -> CliResult {
    let (m, cs) = load_model(model)?;
    let mut perm = BTreeMap::new();
    for part in map.split(',') {
        let (from, to) = part
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("bad --map entry `{part}`, want old:new")))?;
        perm.insert(from.trim().to_string(), to.trim().to_string());
    }
    let permuted = permute_states(&m, var, &perm).map_err(CliError::input)?;
    let moved: Vec<Constraint> = cs
        .iter()
        .map(|c| causalkit_core::transforms::permute_constraint(c, var, &perm))
        .collect();
    write_file(output, &write_model(&permuted, &moved))?;
    out.emit(
        schema(
            "permute",
            vec![(
                "path".to_string(),
                JsonValue::str(output.display().to_string()),
            )],
        ),
        format!("permuted states of `{var}`; wrote {}", output.display()),
    );
    Ok(())
}

fn cmd_eval(out: &Output, model: &Path, estimand: &Path, bind: Option<&str>) -> CliResult {
    let (m, _) = load_model(model)?;
    let text = read_file(estimand)?;
    let parsed = parse_estimand(text.trim()).map_err(CliError::input)?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let binding: BTreeMap<String, String> = match bind {
        Some(b) => parse_inst(b)?
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        None => BTreeMap::new(),
    };
    let needed = free_placeholders(&parsed.estimand);
    let missing: Vec<&String> = needed
        .iter()
        .filter(|p| !binding.contains_key(*p))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Input(format!(
            "unbound placeholder(s): {} (bind with --bind)",
            missing
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )));
    }
    let evaluator = Evaluator::new(&m).map_err(CliError::input)?;
    let value = evaluator
        .evaluate(&parsed.estimand, &binding)
        .map_err(CliError::input)?;
    out.emit(
        schema(
            "value",
            vec![(
                "placeholders".to_string(),
                JsonValue::Obj(
                    binding
                        .iter()
                        .map(|(k, v)| (k.clone(), JsonValue::str(v)))
                        .collect(),
                ),
            )]
            .into_iter()
            .chain(rat_fields(&value))
            .collect(),
        ),
        format!("{value} ({})", value.to_decimal(6)),
    );
    Ok(())
}

fn pair_report_json(report: &PairReport) -> JsonValue {
    let (entries, _) = dist_table(&report.observational);
    schema(
        "pair-report",
        vec![
            ("label".to_string(), JsonValue::str(&report.label)),
            (
                "constraints_ok".to_string(),
                JsonValue::Obj(vec![
                    (
                        "model_a".to_string(),
                        JsonValue::Bool(report.constraints_ok_a),
                    ),
                    (
                        "model_b".to_string(),
                        JsonValue::Bool(report.constraints_ok_b),
                    ),
                ]),
            ),
            (
                "observational_equal".to_string(),
                JsonValue::Bool(report.observational_equal),
            ),
            (
                "effect_a".to_string(),
                JsonValue::str(report.effect_a.to_string()),
            ),
            (
                "effect_b".to_string(),
                JsonValue::str(report.effect_b.to_string()),
            ),
            ("separated".to_string(), JsonValue::Bool(report.separated)),
            (
                "expectation".to_string(),
                JsonValue::str(report.expectation.as_str()),
            ),
            ("pass".to_string(), JsonValue::Bool(report.pass)),
            ("observational".to_string(), entries),
        ],
    )
}

fn cmd_verify_pair(path: &Path) -> CliResult {
    let pair = read_pair(&read_file(path)?).map_err(CliError::input)?;
    let report = verify_pair(&pair).map_err(CliError::input)?;
    // the report is the contract here, so it is always JSON
    print!("{}", to_string_pretty(&pair_report_json(&report)));
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "pair `{}` did not meet expectation `{}`",
            report.label,
            report.expectation.as_str()
        )))
    }
}

fn cmd_gallery_list(out: &Output) -> CliResult {
    let fixtures = builtin_fixtures();
    let mut text = String::new();
    let mut entries = Vec::new();
    for f in &fixtures {
        let _ = writeln!(
            text,
            "{:<18} {} pair(s), {} formula(s), {} drill(s)",
            f.id,
            f.pairs.len(),
            f.estimands.len(),
            f.drills.len()
        );
        entries.push(JsonValue::Obj(vec![
            ("id".to_string(), JsonValue::str(&f.id)),
            ("pairs".to_string(), JsonValue::UInt(f.pairs.len() as u64)),
            (
                "estimands".to_string(),
                JsonValue::UInt(f.estimands.len() as u64),
            ),
            ("drills".to_string(), JsonValue::UInt(f.drills.len() as u64)),
            ("notes".to_string(), JsonValue::str(&f.notes)),
        ]));
    }
    text.pop();
    out.emit(
        schema(
            "gallery-list",
            vec![("fixtures".to_string(), JsonValue::Arr(entries))],
        ),
        text,
    );
    Ok(())
}

fn cmd_gallery_verify(out: &Output, args: &GalleryVerifyArgs) -> CliResult {
    let fixtures: Vec<_> = builtin_fixtures()
        .into_iter()
        .filter(|f| args.id.as_deref().is_none_or(|id| f.id == id))
        .collect();
    if fixtures.is_empty() {
        return Err(CliError::Input(format!(
            "no fixture named `{}`",
            args.id.as_deref().unwrap_or_default()
        )));
    }
    let opts = VerifyOpts {
        samples: args.samples,
        seed: args.seed,
        eps: Rat::new(1, 3),
    };
    let mut text = String::new();
    let mut entries = Vec::new();
    let mut all_pass = true;
    let mut passed = 0usize;
    for f in &fixtures {
        let report = verify_fixture(f, &opts).map_err(CliError::input)?;
        all_pass &= report.pass;
        passed += usize::from(report.pass);
        let _ = writeln!(
            text,
            "fixture {:<18} {}",
            f.id,
            if report.pass { "PASS" } else { "FAIL" }
        );
        for pr in &report.pairs {
            let _ = writeln!(
                text,
                "  pair {:<20} constraints={}/{} observational_equal={} effects {} vs {} -> {}",
                pr.label,
                pr.constraints_ok_a,
                pr.constraints_ok_b,
                pr.observational_equal,
                pr.effect_a,
                pr.effect_b,
                if pr.pass { "ok" } else { "FAIL" }
            );
        }
        for er in &report.estimands {
            let binding = if er.binding.is_empty() {
                String::new()
            } else {
                format!(
                    " [{}]",
                    er.binding
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join(",")
                )
            };
            let _ = writeln!(
                text,
                "  formula{binding}: pair-consistent={} oracle-matched={}/{} -> {}",
                er.pair_values_equal,
                er.models_matched,
                er.models_matched + er.mismatches,
                if er.pass { "ok" } else { "FAIL" }
            );
        }
        for dr in &report.drills {
            let _ = writeln!(
                text,
                "  drill: {} ({} case(s)) -> {}",
                dr.description,
                dr.cases,
                if dr.pass { "ok" } else { "FAIL" }
            );
        }
        entries.push(JsonValue::Obj(vec![
            ("id".to_string(), JsonValue::str(&f.id)),
            ("pass".to_string(), JsonValue::Bool(report.pass)),
            (
                "pairs".to_string(),
                JsonValue::Arr(report.pairs.iter().map(pair_report_json).collect()),
            ),
            (
                "estimands".to_string(),
                JsonValue::Arr(
                    report
                        .estimands
                        .iter()
                        .map(|er| {
                            JsonValue::Obj(vec![
                                ("text".to_string(), JsonValue::str(&er.text)),
                                (
                                    "binding".to_string(),
                                    JsonValue::Obj(
                                        er.binding
                                            .iter()
                                            .map(|(k, v)| (k.clone(), JsonValue::str(v)))
                                            .collect(),
                                    ),
                                ),
                                (
                                    "pair_values_equal".to_string(),
                                    JsonValue::Bool(er.pair_values_equal),
                                ),
                                (
                                    "models_matched".to_string(),
                                    JsonValue::UInt(er.models_matched as u64),
                                ),
                                (
                                    "mismatches".to_string(),
                                    JsonValue::UInt(er.mismatches as u64),
                                ),
                                ("pass".to_string(), JsonValue::Bool(er.pass)),
                            ])
                        })
                        .collect(),
                ),
            ),
            (
                "drills".to_string(),
                JsonValue::Arr(
                    report
                        .drills
                        .iter()
                        .map(|dr| {
                            JsonValue::Obj(vec![
                                ("description".to_string(), JsonValue::str(&dr.description)),
                                ("cases".to_string(), JsonValue::UInt(dr.cases as u64)),
                                ("pass".to_string(), JsonValue::Bool(dr.pass)),
                            ])
                        })
                        .collect(),
                ),
            ),
        ]));
    }
    let _ = write!(text, "{passed}/{} fixture(s) pass", fixtures.len());
    out.emit(
        schema(
            "gallery-report",
            vec![
                ("fixtures".to_string(), JsonValue::Arr(entries)),
                ("pass".to_string(), JsonValue::Bool(all_pass)),
            ],
        ),
        text,
    );
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Verification("gallery verification failed".into()))
    }
}

fn cmd_gallery_export(out: &Output, dir: &Path) -> CliResult {
    let fixtures = builtin_fixtures();
    let mut written = Vec::new();
    write_file(&dir.join("VERSION"), "1\n")?;
    for f in &fixtures {
        let fixture_path = dir.join(&f.id).join("fixture.json");
        write_file(&fixture_path, &write_fixture(f))?;
        written.push(fixture_path.display().to_string());
        if let Some(pair) = f.pairs.first() {
            let pair_path = dir.join(&f.id).join("pair.json");
            write_file(&pair_path, &write_pair(pair))?;
            written.push(pair_path.display().to_string());
        }
    }
    out.emit(
        schema(
            "gallery-export",
            vec![
                ("dir".to_string(), JsonValue::str(dir.display().to_string())),
                (
                    "files".to_string(),
                    JsonValue::Arr(written.iter().map(JsonValue::str).collect()),
                ),
            ],
        ),
        format!("wrote {} file(s) under {}", written.len(), dir.display()),
    );
    Ok(())
}
