//! `satmech` command-line front end.
//!
//! Machine output (JSON or CSV) goes to stdout and diagnostics to stderr.
//! Exit codes: 0 when every check passes, 1 on a property failure or a
//! disagreement between payment methods, 2 on usage or input errors.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satmech::optimal::{duality_closure, r_optimal_rule_with, r_pareto_bounds_check, DualityClosure};
use satmech::payments::run_with_method;
use satmech::rules::Implementability;
use satmech::{
    check_expost_ir, check_satisfactory, convergence_table, is_dominated_fosd, is_implementable, ConvergenceRow,
    GridSpec, Outcome, OptimalRuleReport, PaymentMethod, RankingRule, Rational, ValuationProfile,
    VerificationReport,
};

#[derive(Parser)]
#[command(name = "satmech", version, about = "Exact budget-balanced ranking mechanisms")]
struct Cli {
    /// Output format. Defaults to `human` on a terminal and `json` otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Subset,
    TwoStep,
    Recursive,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the r-optimal rule for N agents.
    Optimal {
        #[arg(long)]
        n: usize,
        /// Preferred ell when several values tie (only N=8 has a tie).
        #[arg(long)]
        ell_tie: Option<usize>,
    },
    /// Compute allocation, payments and utilities at one profile.
    Price {
        /// JSON file `{"n": N, "pi": ["p1", ...]}`.
        #[arg(long)]
        rule: PathBuf,
        /// JSON file `{"values": ["v1", ...]}`.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value = "subset")]
        method: MethodArg,
    },
    /// Sweep the satisfactory and ex-post IR checks over a profile grid.
    Verify {
        #[arg(long)]
        rule: PathBuf,
        /// `values=0,1/3,2/3,1;exhaustive` or `random=500;denom=64[;seed=S]`.
        #[arg(long, conflicts_with_all = ["random", "seed"])]
        grid: Option<String>,
        /// Number of random profiles.
        #[arg(long, requires = "seed")]
        random: Option<usize>,
        #[arg(long, requires = "random")]
        seed: Option<u64>,
        /// Denominator bound for random profiles.
        #[arg(long, default_value_t = 64, requires = "random")]
        denom: u64,
    },
    /// Convergence table of the top-rank probability.
    Table {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Test a probability vector against the implementability equation.
    Check {
        /// Comma-separated rationals, e.g. "3/4,1/4,0,0".
        #[arg(long)]
        pi: String,
    },
    /// Print the dual certificate for N agents and check strong duality.
    Certify {
        #[arg(long)]
        n: usize,
    },
    /// Check whether a rule is first-order dominated by an implementable one.
    Pareto {
        #[arg(long)]
        rule: PathBuf,
    },
}

/// Exit status for a completed command.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format.unwrap_or(if io::stdout().is_terminal() { Format::Human } else { Format::Json });
    match run(cli.command, format) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command, format: Format) -> Result<Status> {
    let mut out = io::stdout().lock();
    let status = match command {
        Command::Optimal { n, ell_tie } => cmd_optimal(&mut out, format, n, ell_tie)?,
        Command::Price { rule, profile, method } => cmd_price(&mut out, format, &rule, &profile, method)?,
        Command::Verify { rule, grid, random, seed, denom } => {
            let spec = match (grid, random, seed) {
                (Some(text), _, _) => Some(text.parse::<GridSpec>()?),
                (None, Some(count), Some(seed)) => Some(GridSpec::Random { count, denom, seed }),
                _ => None,
            };
            cmd_verify(&mut out, format, &rule, spec)?
        }
        Command::Table { from, to } => cmd_table(&mut out, format, from, to)?,
        Command::Check { pi } => cmd_check(&mut out, format, &pi)?,
        Command::Certify { n } => cmd_certify(&mut out, format, n)?,
        Command::Pareto { rule } => cmd_pareto(&mut out, format, &rule)?,
    };
    out.flush()?;
    Ok(status)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn join(values: &[Rational]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn csv_writer(out: &mut impl Write) -> csv::Writer<&mut impl Write> {
    csv::Writer::from_writer(out)
}

fn cmd_optimal(out: &mut impl Write, format: Format, n: usize, ell_tie: Option<usize>) -> Result<Status> {
    let report: OptimalRuleReport = r_optimal_rule_with(n, ell_tie)?;
    if let Some(ell) = ell_tie.filter(|&ell| ell != report.ell) {
        eprintln!(
            "warning: --ell-tie {ell} ignored; the minimizing set for n={n} is {:?}",
            report.ell_argmin_set
        );
    }
    match format {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["rank", "pi"])?;
            for (k, p) in report.pi_star.pi().iter().enumerate() {
                w.write_record([(k + 1).to_string(), p.to_string()])?;
            }
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "n = {}, ell = {} (minimizers {:?})", report.n, report.ell, report.ell_argmin_set)?;
            writeln!(out, "pi1* = {} = {}", report.pi1_star, report.pi1_decimal)?;
            writeln!(out, "pi = ({})", join(report.pi_star.pi()))?;
            writeln!(out, "unique: {}", report.unique)?;
        }
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct PricedOutcome {
    method: &'static str,
    #[serde(flatten)]
    outcome: Outcome,
}

#[derive(Serialize)]
struct PriceReport {
    agree: bool,
    outcomes: Vec<PricedOutcome>,
}

fn method_name(method: PaymentMethod) -> &'static str {
    match method {
        PaymentMethod::Subset => "subset",
        PaymentMethod::TwoStep => "two-step",
        PaymentMethod::Recursive => "recursive",
    }
}

fn cmd_price(out: &mut impl Write, format: Format, rule: &Path, profile: &Path, method: MethodArg) -> Result<Status> {
    let rule: RankingRule = read_json(rule)?;
    let v: ValuationProfile = read_json(profile)?;
    let check = is_implementable(&rule);
    if !check.implementable {
        bail!("rule is not implementable (residual {})", check.residual);
    }
    let methods = match method {
        MethodArg::Subset => vec![PaymentMethod::Subset],
        MethodArg::TwoStep => vec![PaymentMethod::TwoStep],
        MethodArg::Recursive => vec![PaymentMethod::Recursive],
        MethodArg::All => {
            let mut all = vec![PaymentMethod::Subset, PaymentMethod::Recursive];
            if rule.as_two_step().is_some() && v.is_distinct_positive() {
                all.insert(1, PaymentMethod::TwoStep);
            }
            all
        }
    };
    let outcomes = methods
        .into_iter()
        .map(|m| Ok(PricedOutcome { method: method_name(m), outcome: run_with_method(&rule, &v, m)? }))
        .collect::<Result<Vec<_>>>()?;
    let agree = outcomes.windows(2).all(|w| w[0].outcome == w[1].outcome);
    if !agree {
        eprintln!("error: payment methods disagree");
    }

    match format {
        Format::Json if outcomes.len() == 1 => write_json(out, &outcomes[0].outcome)?,
        Format::Json => write_json(out, &PriceReport { agree, outcomes })?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["method", "agent", "value", "allocation", "payment", "utility"])?;
            for priced in &outcomes {
                let o = &priced.outcome;
                for i in 0..v.n() {
                    w.write_record([
                        priced.method.to_string(),
                        (i + 1).to_string(),
                        v.value(i).to_string(),
                        o.allocation[i].to_string(),
                        o.payments[i].to_string(),
                        o.utilities[i].to_string(),
                    ])?;
                }
            }
            w.flush()?;
        }
        Format::Human => {
            for priced in &outcomes {
                let o = &priced.outcome;
                writeln!(out, "[{}]", priced.method)?;
                writeln!(out, "  allocation: ({})", join(&o.allocation))?;
                writeln!(out, "  payments:   ({})", join(&o.payments))?;
                writeln!(out, "  utilities:  ({})", join(&o.utilities))?;
                writeln!(out, "  budget:     {}", o.budget())?;
            }
            if outcomes.len() > 1 {
                writeln!(out, "methods agree: {agree}")?;
            }
        }
    }
    Ok(if agree { Status::Pass } else { Status::Fail })
}

fn default_grid(n: usize) -> GridSpec {
    if n <= 5 {
        GridSpec::default_values()
    } else {
        GridSpec::Random { count: 500, denom: 64, seed: 0 }
    }
}

fn cmd_verify(out: &mut impl Write, format: Format, rule: &Path, spec: Option<GridSpec>) -> Result<Status> {
    let rule: RankingRule = read_json(rule)?;
    let spec = spec.unwrap_or_else(|| default_grid(rule.n()));
    let profiles = spec.profiles(rule.n())?;
    let grid_values = match &spec {
        GridSpec::Exhaustive { values } => values.clone(),
        GridSpec::Random { .. } => Vec::new(),
    };
    let label = spec.to_string();
    let mut report = check_satisfactory(&rule, &profiles, &grid_values, &label)?;
    if is_implementable(&rule).implementable {
        report.checks.extend(check_expost_ir(&rule, &profiles, &label)?.checks);
    }
    write_verification(out, format, &report)?;
    Ok(if report.passed() { Status::Pass } else { Status::Fail })
}

fn write_verification(out: &mut impl Write, format: Format, report: &VerificationReport) -> Result<()> {
    match format {
        Format::Json => write_json(out, report)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["check", "passed", "informational", "profiles_checked", "counterexample", "detail"])?;
            for c in &report.checks {
                w.write_record([
                    c.name.clone(),
                    c.passed.to_string(),
                    c.informational.to_string(),
                    c.profiles_checked.to_string(),
                    c.counterexample.as_ref().map(|v| join(v.values())).unwrap_or_default(),
                    c.detail.clone().unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "grid: {}", report.grid_spec)?;
            for c in &report.checks {
                let tag = match (c.passed, c.informational) {
                    (true, _) => "pass",
                    (false, true) => "info",
                    (false, false) => "FAIL",
                };
                write!(out, "{tag:>4}  {} ({} profiles)", c.name, c.profiles_checked)?;
                if let Some(detail) = &c.detail {
                    write!(out, ": {detail}")?;
                }
                writeln!(out)?;
            }
            writeln!(out, "overall: {}", if report.passed() { "pass" } else { "FAIL" })?;
        }
    }
    Ok(())
}

fn cmd_table(out: &mut impl Write, format: Format, from: usize, to: usize) -> Result<Status> {
    let rows: Vec<ConvergenceRow> = convergence_table(from, to)?;
    match format {
        Format::Json => write_json(out, &rows)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "{:>4} {:>4} {:>12} {:>16} {:>8}", "n", "ell", "binomial", "pi1", "percent")?;
            for row in &rows {
                writeln!(
                    out,
                    "{:>4} {:>4} {:>12} {:>16} {:>7}%",
                    row.n,
                    row.ell,
                    row.top_binomial.to_string(),
                    row.pi1.to_string(),
                    row.pi1_percent
                )?;
            }
        }
    }
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct CheckReport {
    n: usize,
    pi: Vec<Rational>,
    #[serde(flatten)]
    implementability: Implementability,
    two_step_ell: Option<usize>,
}

fn cmd_check(out: &mut impl Write, format: Format, pi: &str) -> Result<Status> {
    let rule = RankingRule::parse(pi)?;
    let report = CheckReport {
        n: rule.n(),
        pi: rule.pi().to_vec(),
        implementability: is_implementable(&rule),
        two_step_ell: rule.as_two_step().map(|t| t.ell()),
    };
    match format {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "implementable", "residual", "two_step_ell"])?;
            w.write_record([
                report.n.to_string(),
                report.implementability.implementable.to_string(),
                report.implementability.residual.to_string(),
                report.two_step_ell.map(|l| l.to_string()).unwrap_or_default(),
            ])?;
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "pi = ({})", join(&report.pi))?;
            writeln!(out, "implementable: {}", report.implementability.implementable)?;
            writeln!(out, "residual: {}", report.implementability.residual)?;
            if let Some(ell) = report.two_step_ell {
                writeln!(out, "two-step rule with ell = {ell}")?;
            }
        }
    }
    Ok(if report.implementability.implementable { Status::Pass } else { Status::Fail })
}

fn cmd_certify(out: &mut impl Write, format: Format, n: usize) -> Result<Status> {
    let closure: DualityClosure = duality_closure(n)?;
    let cert = &closure.certificate;
    match format {
        Format::Json => write_json(out, &closure)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["n", "z", "y", "theta", "dual_feasible", "dual_objective", "primal_value", "closed"])?;
            w.write_record([
                n.to_string(),
                cert.z.to_string(),
                cert.y.to_string(),
                cert.theta.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "),
                closure.check.feasible.to_string(),
                closure.check.objective.to_string(),
                closure.primal_value.to_string(),
                closure.closed.to_string(),
            ])?;
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "n = {n}")?;
            writeln!(out, "z* = {}", cert.z)?;
            writeln!(out, "y = {}", cert.y)?;
            writeln!(out, "theta = ({})", join(&cert.theta))?;
            writeln!(out, "dual feasible: {}", closure.check.feasible)?;
            for violation in &closure.check.violations {
                writeln!(out, "  violated: {violation}")?;
            }
            writeln!(out, "dual objective = {}", closure.check.objective)?;
            writeln!(out, "primal optimum = {}", closure.primal_value)?;
            if closure.closed {
                writeln!(out, "primal = dual = pi1*, so by the strong duality theorem the rule is r-optimal")?;
            } else {
                writeln!(out, "duality gap: primal {} vs pi1* {}", closure.primal_value, closure.pi1_star)?;
            }
        }
    }
    Ok(if closure.closed && closure.check.feasible { Status::Pass } else { Status::Fail })
}

#[derive(Serialize)]
struct ParetoReport {
    dominated: bool,
    witness: Option<RankingRule>,
    within_bounds: bool,
}

fn cmd_pareto(out: &mut impl Write, format: Format, rule: &Path) -> Result<Status> {
    let rule: RankingRule = read_json(rule)?;
    let domination = is_dominated_fosd(&rule)?;
    let report = ParetoReport {
        dominated: domination.dominated,
        witness: domination.witness,
        within_bounds: r_pareto_bounds_check(&rule)?,
    };
    match format {
        Format::Json => write_json(out, &report)?,
        Format::Csv => {
            let mut w = csv_writer(out);
            w.write_record(["dominated", "within_bounds", "witness"])?;
            w.write_record([
                report.dominated.to_string(),
                report.within_bounds.to_string(),
                report.witness.as_ref().map(|r| join(r.pi())).unwrap_or_default(),
            ])?;
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "dominated: {}", report.dominated)?;
            if let Some(witness) = &report.witness {
                writeln!(out, "witness: ({})", join(witness.pi()))?;
            }
            writeln!(out, "within pi1 bounds: {}", report.within_bounds)?;
        }
    }
    Ok(if report.dominated { Status::Fail } else { Status::Pass })
}
