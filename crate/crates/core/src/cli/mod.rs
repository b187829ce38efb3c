//! Command-line front end. Every command produces a [`Report`]; a short
//! human-readable summary goes to stdout and the JSON report to `--out`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::adjoint::{self, Partition};
use crate::detection::{self, Compatible, SumSplit};
use crate::error::Error;
use crate::flow::{self, FlowConfig, FlowReport, SolitonVerdict};
use crate::io::{self, Check, Report, Scenario};
use crate::lie_core::{self, BracketTensor};
use crate::linalg;
use crate::moment::{self, SymmetricMatrix};

pub const DEFAULT_SEED: u64 = 1;

/// `|m|^2` agreement required between restricted and full flows.
const RESTRICTED_FLOW_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "nilmoment", version, about = "Moment maps, gradient flows and orbit detection")]
pub struct Cli {
    /// Tolerance for the command's checks (each command has its own default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Overrides the flow iteration budget.
    #[arg(long, global = true)]
    pub max_steps: Option<usize>,
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a nilpotent bracket is an Einstein nilradical.
    Soliton { file: PathBuf },
    /// Run the gradient flow and dump its trajectory.
    Flow {
        file: PathBuf,
        /// Trajectory sampling interval (default: scenario setting, else 1).
        #[arg(long)]
        sample_every: Option<usize>,
    },
    /// Detection checks for the scenario's derivations and/or split.
    Detect {
        file: PathBuf,
        /// Random brackets drawn from W per check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Also compare the restricted flow with the full flow.
        #[arg(long)]
        compare_flow: bool,
    },
    /// Nilpotent orbits in sl(n).
    Adjoint {
        #[command(subcommand)]
        command: AdjointCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum AdjointCommand {
    /// Distinguished Jordan representative of a partition, e.g. `3,1`.
    Rep { partition: Partition },
    /// Partition labelling the orbit of a nilpotent matrix.
    Classify { file: PathBuf },
    /// The constant `c` with `[m(X), X] = c X`, or ABSENT.
    Verify { file: PathBuf },
    /// All partitions of `n`.
    Partitions { n: usize },
    /// Whether `m(X)` lies in the subalgebra spanned by a basis file.
    Detect { file: PathBuf, basis: PathBuf },
}

#[derive(Debug)]
pub struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

fn context(what: impl fmt::Display) -> impl FnOnce(Error) -> CliError {
    move |e| CliError(format!("{what}: {e}"))
}

/// A report and its human-readable rendering.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub text: String,
}

impl Outcome {
    fn checks(report: Report) -> Self {
        let text = report.to_text();
        Self { report, text }
    }
}

/// Parses `args` (including the program name), runs the command, prints and
/// writes the results, and returns the process exit code: 0 when every check
/// passed, 1 when some check failed, 2 on errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, outcome.report.to_json()) {
                    eprintln!("error: {}: {e}", path.display());
                    return 2;
                }
            }
            if outcome.report.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs the parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut outcome = match &cli.command {
        Command::Soliton { file } => cmd_soliton(cli, file)?,
        Command::Flow { file, sample_every } => cmd_flow(cli, file, *sample_every)?,
        Command::Detect {
            file,
            samples,
            compare_flow,
        } => cmd_detect(cli, file, *samples, *compare_flow)?,
        Command::Adjoint { command } => cmd_adjoint(cli, command)?,
    };
    if cli.timing {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        outcome.report.timing_ms = Some(ms);
        outcome.text.push_str(&format!("time: {ms:.3} ms\n"));
    }
    Ok(outcome)
}

fn inputs(cli: &Cli, files: &[&Path], tol: f64) -> Value {
    let files: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    json!({
        "files": files,
        "tol": tol,
        "seed": cli.seed,
        "max_steps": cli.max_steps,
    })
}

fn load_scenario(cli: &Cli, file: &Path) -> Result<Scenario, CliError> {
    let mut scenario = io::read_scenario(file).map_err(context("input"))?;
    if let Some(steps) = cli.max_steps {
        scenario.flow.max_steps = steps;
    }
    Ok(scenario)
}

fn flow_results(report: &FlowReport) -> Value {
    json!({
        "verdict": report.verdict,
        "steps": report.steps_taken,
        "final_grad_norm": report.final_grad_norm,
        "final_moment_norm_sq": report.final_moment_norm_sq,
        "final_objective": report.final_objective,
        "c": report.scaled_critical_constant,
        "c_unit_norm": report.critical_constant,
        "criticality_residual": report.criticality_residual,
        "limit": io::records_from_bracket(&report.final_point),
    })
}

fn push_flow_checks(out: &mut Report, report: &FlowReport, config: &FlowConfig, tol: f64) {
    out.push(Check::bounded("flow converged: |grad|", report.final_grad_norm, config.grad_tol));
    out.push(Check::bounded(
        "criticality: |m(mu).mu - c mu| at the limit",
        report.criticality_residual,
        tol,
    ));
}

fn cmd_soliton(cli: &Cli, file: &Path) -> Result<Outcome, CliError> {
    let tol = cli.tol.unwrap_or(moment::DISTINGUISHED_TOL);
    let scenario = load_scenario(cli, file)?;
    let mu = &scenario.bracket;
    let mut report = Report::new("soliton", inputs(cli, &[file], tol));
    let unit = mu.normalized().unwrap_or_else(|_| mu.clone());
    report.push(Check::bounded(
        "Jacobi residual (unit norm)",
        lie_core::jacobi_residual(&unit),
        lie_core::JACOBI_TOL,
    ));
    let analysis = flow::soliton_verdict(mu, &scenario.flow).map_err(context("brackets"))?;
    report.push(Check::info("nilpotency class", analysis.nilpotency_class));
    match &analysis.flow {
        Some(f) => push_flow_checks(&mut report, f, &scenario.flow, tol),
        None => report.push(Check::skipped("flow", "zero bracket is a fixed point")),
    }
    let (verdict, c) = match &analysis.verdict {
        SolitonVerdict::EinsteinNilradical { c, .. } => ("einstein_nilradical", Some(*c)),
        SolitonVerdict::NotEinsteinNilradical => ("not_einstein_nilradical", None),
        SolitonVerdict::Undetermined => ("undetermined", None),
    };
    let mut verdict_check = Check::pass_if("Einstein nilradical", analysis.is_einstein_nilradical())
        .with_value(verdict);
    if let Some(reason) = &analysis.reason {
        verdict_check = verdict_check.with_note(reason.clone());
    }
    report.push(verdict_check);
    if let Some(c) = c {
        report.push(Check::info("c (at the input norm)", c));
    }
    let minimal = c.map(|c| c.abs() <= tol);
    report.set_results(json!({
        "verdict": verdict,
        "c": c,
        "minimal": minimal,
        "nilpotency_class": analysis.nilpotency_class,
        "flow": analysis.flow.as_ref().map(flow_results),
    }));
    Ok(Outcome::checks(report))
}

fn cmd_flow(cli: &Cli, file: &Path, sample_every: Option<usize>) -> Result<Outcome, CliError> {
    let tol = cli.tol.unwrap_or(moment::DISTINGUISHED_TOL);
    let mut scenario = load_scenario(cli, file)?;
    if sample_every == Some(0) {
        return Err(CliError("--sample-every: must be positive".into()));
    }
    scenario.flow.sample_every = sample_every.or(scenario.flow.sample_every).or(Some(1));
    let result = flow::run_flow(&scenario.bracket, &scenario.flow).map_err(context("flow"))?;
    let mut report = Report::new("flow", inputs(cli, &[file], tol));
    push_flow_checks(&mut report, &result, &scenario.flow, tol);
    report.push(Check::info("|m|^2 at the limit", result.final_moment_norm_sq));
    let mut results = flow_results(&result);
    results["trajectory"] = serde_json::to_value(&result.trajectory).expect("serializable");
    report.set_results(results);
    Ok(Outcome::checks(report))
}

fn cmd_detect(cli: &Cli, file: &Path, samples: usize, compare_flow: bool) -> Result<Outcome, CliError> {
    let tol = cli.tol.unwrap_or(1e-9);
    let scenario = load_scenario(cli, file)?;
    if scenario.derivations.is_empty() && scenario.split.is_none() {
        return Err(CliError(format!(
            "{}: scenario has neither derivations nor split",
            file.display()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut report = Report::new("detect", inputs(cli, &[file], tol));
    let mut results = serde_json::Map::new();
    if !scenario.derivations.is_empty() {
        let r = detect_derivations(&scenario, tol, samples, compare_flow, &mut rng, &mut report)?;
        results.insert("derivations".into(), r);
    }
    if let Some(split) = scenario.split {
        let split = SumSplit::coordinate(split.dim_1, split.dim_2);
        let r = detect_split(&scenario, &split, tol, samples, &mut rng, &mut report)?;
        results.insert("split".into(), r);
    }
    report.set_results(Value::Object(results));
    Ok(Outcome::checks(report))
}

fn detect_derivations(
    scenario: &Scenario,
    tol: f64,
    samples: usize,
    compare_flow: bool,
    rng: &mut ChaCha8Rng,
    report: &mut Report,
) -> Result<Value, CliError> {
    let mu = &scenario.bracket;
    let ds: Vec<SymmetricMatrix> = scenario
        .derivations
        .iter()
        .map(|d| SymmetricMatrix::new(d.clone()))
        .collect::<Result<_, _>>()
        .map_err(context("derivations"))?;
    let mut all_in_w = true;
    for (a, d) in ds.iter().enumerate() {
        let residual = detection::in_w_residual(mu, d).map_err(context(format!("derivations[{a}]")))?;
        all_in_w &= residual <= tol;
        report.push(Check::bounded(&format!("in W: |D[{a}].mu| / (|D| |mu|)"), residual, tol));
    }
    let downstream = [
        "graded bracket",
        "detection: m(mu) in h",
        "tangent ranks",
        "W samples",
    ];
    if !all_in_w {
        for name in downstream {
            report.push(Check::skipped(name, "bracket is not in W"));
        }
        return Ok(json!({ "in_w": false }));
    }
    let blocks = detection::joint_blocks(&ds, detection::GAP_TOL).map_err(context("derivations"))?;
    report.push(Check::info("block labels", blocks.labels()));
    report.push(Check::info("block sizes", blocks.block_sizes()));
    let graded = detection::w_residual(mu, &blocks).map_err(context("graded"))?;
    report.push(Check::bounded("graded bracket: mu(V_a, V_b) in V_(a+b)", graded, tol));
    let detect = detection::detection_residual(mu, &blocks).map_err(context("detection"))?;
    report.push(Check::bounded("detection: m(mu) in h (off-block / |m|)", detect, tol));
    let ranks = detection::tangent_intersection_rank(mu, &blocks).map_err(context("tangent ranks"))?;
    report.push(Check::pass_if("tangent ranks: dim T(G.mu) cap W = dim T(H.mu)", ranks.0 == ranks.1).with_value([ranks.0, ranks.1]));

    let basis = detection::w_basis(&ds).map_err(context("W basis"))?;
    let n = mu.dim();
    let (mut worst_graded, mut worst_detect, mut rank_mismatches) = (0.0_f64, 0.0_f64, 0);
    for _ in 0..samples {
        let lambda = detection::sample_w(rng, n, &basis).map_err(context("W sample"))?;
        worst_graded = worst_graded.max(detection::w_residual(&lambda, &blocks).map_err(context("W sample"))?);
        worst_detect =
            worst_detect.max(detection::detection_residual(&lambda, &blocks).map_err(context("W sample"))?);
        let (a, b) = detection::tangent_intersection_rank(&lambda, &blocks).map_err(context("W sample"))?;
        rank_mismatches += usize::from(a != b);
    }
    let note = format!("{samples} samples, dim W = {}", basis.ncols());
    report.push(Check::bounded("W samples: graded bracket (worst)", worst_graded, tol).with_note(note.clone()));
    report.push(Check::bounded("W samples: detection (worst)", worst_detect, tol).with_note(note.clone()));
    report.push(Check::pass_if("W samples: tangent ranks equal", rank_mismatches == 0).with_value(rank_mismatches).with_note(note));

    let mut flows = Value::Null;
    if compare_flow {
        if mu.is_zero() {
            report.push(Check::skipped("restricted flow", "zero bracket"));
        } else {
            let full = flow::run_flow(mu, &scenario.flow).map_err(context("flow"))?;
            let restricted = flow::run_flow_restricted(mu, &blocks.symmetric_generators(), &scenario.flow)
                .map_err(context("restricted flow"))?;
            let gap = (full.final_moment_norm_sq - restricted.final_moment_norm_sq).abs();
            report.push(Check::bounded("restricted flow: | |m|^2 full - |m|^2 restricted |", gap, RESTRICTED_FLOW_TOL));
            report.push(Check::pass_if("restricted flow: same verdict", full.verdict == restricted.verdict).with_value([full.verdict, restricted.verdict]));
            flows = json!({ "full": flow_results(&full), "restricted": flow_results(&restricted) });
        }
    }
    Ok(json!({
        "in_w": true,
        "block_labels": blocks.labels(),
        "block_sizes": blocks.block_sizes(),
        "dim_w": basis.ncols(),
        "tangent_ranks": [ranks.0, ranks.1],
        "flows": flows,
    }))
}

fn verdict_name(a: &flow::SolitonAnalysis) -> &'static str {
    match a.verdict {
        SolitonVerdict::EinsteinNilradical { .. } => "einstein_nilradical",
        SolitonVerdict::NotEinsteinNilradical => "not_einstein_nilradical",
        SolitonVerdict::Undetermined => "undetermined",
    }
}

fn detect_split(
    scenario: &Scenario,
    split: &SumSplit,
    tol: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
    report: &mut Report,
) -> Result<Value, CliError> {
    let mu = &scenario.bracket;
    let (first, second) = match detection::split_direct_sum(mu, split, tol) {
        Ok(parts) => {
            report.push(Check::pass_if("sum of ideals", true));
            parts
        }
        Err(e @ Error::NotAnIdealSum { .. }) => {
            report.push(Check::pass_if("sum of ideals", false).with_note(e.to_string()));
            for name in ["sum detection", "split tangent ranks", "split samples", "factor verdicts"] {
                report.push(Check::skipped(name, "not a sum of ideals"));
            }
            return Ok(json!({ "ideal_sum": false }));
        }
        Err(e) => return Err(context("split")(e)),
    };
    let residual = detection::detection_residual(mu, split).map_err(context("split"))?;
    report.push(Check::bounded("sum detection: m(mu) in gl(V1) x gl(V2)", residual, tol));
    let ranks = detection::tangent_intersection_rank(mu, split).map_err(context("split"))?;
    report.push(Check::pass_if("split tangent ranks equal", ranks.0 == ranks.1).with_value([ranks.0, ranks.1]));

    let (n1, n2) = (split.dim_1(), split.dim_2());
    let random = |rng: &mut ChaCha8Rng, n: usize| {
        let v = linalg::gaussian_matrix(rng, lie_core::independent_dim(n), 1);
        BracketTensor::from_independent(n, v.as_slice()).expect("length matches")
    };
    let mut failures = 0;
    for _ in 0..samples {
        let lambda = random(rng, n1).direct_sum(&random(rng, n2));
        let ok = detection::check_sum_detection(&lambda, split, tol).map_err(context("split sample"))?;
        failures += usize::from(!ok);
    }
    report.push(Check::pass_if("split samples: sum detection", failures == 0).with_value(failures).with_note(format!("{samples} samples")));

    let mut verdicts = Vec::new();
    let mut factor_en = Vec::new();
    for (name, part) in [("V1", &first), ("V2", &second), ("sum", mu)] {
        match flow::soliton_verdict(part, &scenario.flow) {
            Ok(a) => {
                report.push(Check::info(&format!("soliton verdict on {name}"), verdict_name(&a)));
                factor_en.push(Some(a.is_einstein_nilradical()));
                verdicts.push(json!({ "part": name, "verdict": verdict_name(&a), "c": a.critical_constant() }));
            }
            Err(e) => {
                report.push(Check::skipped(&format!("soliton verdict on {name}"), &e.to_string()));
                factor_en.push(None);
                verdicts.push(json!({ "part": name, "verdict": null, "error": e.to_string() }));
            }
        }
    }
    match (factor_en[0], factor_en[1], factor_en[2]) {
        (Some(a), Some(b), Some(s)) => report.push(
            Check::pass_if("sum is Einstein iff both factors are", s == (a && b)),
        ),
        _ => report.push(Check::skipped("sum is Einstein iff both factors are", "a verdict is missing")),
    }
    Ok(json!({
        "ideal_sum": true,
        "dims": [n1, n2],
        "tangent_ranks": [ranks.0, ranks.1],
        "verdicts": verdicts,
    }))
}

fn cmd_adjoint(cli: &Cli, command: &AdjointCommand) -> Result<Outcome, CliError> {
    match command {
        AdjointCommand::Rep { partition } => {
            let tol = cli.tol.unwrap_or(1e-10);
            let x = adjoint::jordan_rep(partition).into_inner();
            let m = adjoint::adjoint_moment(&x).map_err(context("rep"))?;
            let err = (linalg::commutator(m.matrix(), &x) - &x).amax();
            let c = adjoint::verify_adjoint_distinguished(&x, tol).map_err(context("rep"))?;
            let mut report = Report::new("adjoint rep", json!({ "partition": partition.to_string(), "tol": tol }));
            report.push(Check::bounded("[m(X), X] = X (max entry error)", err, tol));
            report.push(Check::pass_if("distinguished", c.is_some()).with_value(c));
            let mut start = 0;
            let mut lambdas: Vec<Vec<f64>> = Vec::new();
            for &k in partition.parts() {
                lambdas.push((1..k).map(|i| x[(start + i - 1, start + i)]).collect());
                start += k;
            }
            report.set_results(json!({
                "partition": partition.to_string(),
                "lambdas": lambdas,
                "c": c,
                "matrix": io::matrix_file(&x),
            }));
            let mut text = String::new();
            for row in x.row_iter() {
                let cells: Vec<String> = row.iter().map(|v| format!("{:.6}", v)).collect();
                text.push_str(&cells.join(" "));
                text.push('\n');
            }
            text.push_str(&match c {
                Some(c) => format!("c = {}\n", io::rounded(json!(c))),
                None => "c = ABSENT\n".into(),
            });
            Ok(Outcome { report, text })
        }
        AdjointCommand::Classify { file } => {
            let tol = cli.tol.unwrap_or(adjoint::CLASSIFY_TOL);
            let x = io::read_matrix(file).map_err(context("input"))?;
            let p = adjoint::classify_nilpotent_orbit(&x, tol).map_err(context(file.display()))?;
            let mut report = Report::new("adjoint classify", inputs(cli, &[file], tol));
            report.push(Check::pass_if("nilpotency certificate", true).with_tolerance(adjoint::NILPOTENCY_TOL));
            report.push(Check::info("partition", p.to_string()).with_tolerance(tol));
            report.set_results(json!({ "partition": p.to_string() }));
            Ok(Outcome { report, text: format!("{p}\n") })
        }
        AdjointCommand::Verify { file } => {
            let tol = cli.tol.unwrap_or(moment::DISTINGUISHED_TOL);
            let x = io::read_matrix(file).map_err(context("input"))?;
            let c = adjoint::verify_adjoint_distinguished(&x, tol).map_err(context(file.display()))?;
            let mut report = Report::new("adjoint verify", inputs(cli, &[file], tol));
            let value = c.map_or(json!("ABSENT"), |c| json!(c));
            report.push(Check::pass_if("[m(X), X] = c X", c.is_some()).with_value(&value).with_tolerance(tol));
            report.set_results(json!({ "c": value }));
            let text = match c {
                Some(_) => format!("c = {}\n", io::rounded(value)),
                None => "ABSENT\n".into(),
            };
            Ok(Outcome { report, text })
        }
        AdjointCommand::Partitions { n } => {
            let all = adjoint::enumerate_partitions(*n).map_err(context("partitions"))?;
            let names: Vec<String> = all.iter().map(|p| p.to_string()).collect();
            let mut report = Report::new("adjoint partitions", json!({ "n": n }));
            report.push(Check::info("count", names.len()));
            let text = names.iter().map(|s| format!("{s}\n")).collect();
            report.set_results(json!({ "partitions": names }));
            Ok(Outcome { report, text })
        }
        AdjointCommand::Detect { file, basis } => {
            let tol = cli.tol.unwrap_or(1e-9);
            let x = io::read_matrix(file).map_err(context("input"))?;
            let g = io::read_basis(basis).map_err(context("basis"))?;
            let inside = adjoint::subalgebra_detection_check(&x, &g, tol).map_err(context("detect"))?;
            let mut report = Report::new("adjoint detect", inputs(cli, &[file, basis], tol));
            report.push(Check::pass_if("m(X) in span(basis)", inside).with_tolerance(tol));
            report.set_results(json!({ "dim_subalgebra": linalg::orthonormalize_maps(&g).len() }));
            Ok(Outcome::checks(report))
        }
    }
}
