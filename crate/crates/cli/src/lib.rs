//! Command-line front end for `cisdag-core`.
//!
//! Exit status: 0 for an affirmative result, 1 for a negative one (not CIS,
//! no ordering, no MLE, no admissible candidate), 2 for usage or input
//! errors. Results go to stdout, diagnostics to stderr.

pub mod error;
pub mod io;
pub mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cisdag_core::dag::{cis_markov_class, markov_class, Dag};
use cisdag_core::mle::{fit, RowConstraint};
use cisdag_core::positivity::{enumerate_cis_orderings, positivity_report};
use cisdag_core::recovery::{find_cis_ordering_noisy, find_cis_ordering_population, EpsilonSchedule, RecoveryConfig, TieBreak};
use cisdag_core::simulate::{random_cis_model, sample_sem, SimSpec};
use cisdag_core::{CovariancePair, Ordering, Tolerance};

use crate::error::CliError;
use crate::report::*;

#[derive(Debug, Parser)]
#[command(name = "cisdag", version, about = "Positive DAG dependence analysis for Gaussian models")]
struct Cli {
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CIS, MTP2 and positive-association report for one ordering.
    Check(CheckArgs),
    /// CIS orderings of a covariance matrix.
    Orderings(OrderingsArgs),
    /// Recover a CIS ordering from a data sample.
    Recover(RecoverArgs),
    /// Maximum likelihood fit for a given ordering or DAG.
    Fit(FitArgs),
    /// Markov or CIS-Markov equivalence class of a DAG.
    Equiv(EquivArgs),
    /// Sample from a linear Gaussian SEM.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Absolute tolerance for sign decisions.
    #[arg(long, default_value_t = Tolerance::DEFAULT_ABS)]
    tol: f64,
    /// Relative tolerance for sign decisions.
    #[arg(long, default_value_t = Tolerance::DEFAULT_REL)]
    rtol: f64,
}

impl TolArgs {
    fn tolerance(&self) -> Result<Tolerance, CliError> {
        Ok(Tolerance::new(self.tol, self.rtol)?)
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Covariance matrix file.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Precision matrix file.
    #[arg(long)]
    precision: Option<PathBuf>,
}

impl ModelSource {
    fn load(&self, tol: &Tolerance) -> Result<CovariancePair, CliError> {
        match (&self.sigma, &self.precision) {
            (Some(p), _) => Ok(CovariancePair::from_sigma(io::read_sym_matrix(p)?, tol)?),
            (_, Some(p)) => Ok(CovariancePair::from_precision(io::read_sym_matrix(p)?, tol)?),
            _ => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Ordering to test, 1-based, e.g. "1,4,3,2" (default: identity).
    #[arg(long)]
    ordering: Option<String>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Debug, Args)]
struct OrderingsArgs {
    #[command(flatten)]
    source: ModelSource,
    /// List every CIS ordering (default).
    #[arg(long, conflicts_with = "one")]
    all: bool,
    /// Report a single CIS ordering found by backward search.
    #[arg(long)]
    one: bool,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieBreakArg {
    First,
    Maxmin,
}

#[derive(Debug, Args)]
struct RecoverArgs {
    /// CSV data file (header row optional).
    #[arg(long)]
    data: PathBuf,
    /// Threshold scale c in eps_n = c * n^(-1/4).
    #[arg(long, default_value_t = 0.5)]
    epsilon_scale: f64,
    #[arg(long, value_enum, default_value_t = TieBreakArg::First)]
    tie_break: TieBreakArg,
    /// Accepted for compatibility; recovery is deterministic.
    #[arg(long)]
    seedless: bool,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV data file (header row optional).
    #[arg(long)]
    data: PathBuf,
    /// Variable ordering, 1-based (default: topological order of --dag, else identity).
    #[arg(long)]
    ordering: Option<String>,
    /// Restrict each equation to the parents in this DAG.
    #[arg(long)]
    dag: Option<PathBuf>,
    /// Constrain all coefficients to be nonnegative.
    #[arg(long)]
    nonneg: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassArg {
    Markov,
    CisMarkov,
}

#[derive(Debug, Args)]
struct EquivArgs {
    /// DAG file: `m <count>` then `i j` per edge.
    #[arg(long)]
    dag: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassArg::Markov)]
    class: ClassArg,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SemSource {
    /// SEM parameters as JSON.
    #[arg(long)]
    sem: Option<PathBuf>,
    /// Random positive SEM: m,edge_prob,lo,hi.
    #[arg(long)]
    random: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SemSource,
    /// Number of rows.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => check(a, cli.json, out),
        Command::Orderings(a) => orderings(a, cli.json, out),
        Command::Recover(a) => recover(a, cli.json, out, err),
        Command::Fit(a) => fit_cmd(a, cli.json, out, err),
        Command::Equiv(a) => equiv(a, cli.json, out),
        Command::Simulate(a) => simulate(a, cli.json, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn parse_ordering(s: &str, m: usize) -> Result<Ordering, CliError> {
    let o: Ordering = s.parse()?;
    if o.len() != m {
        return Err(CliError::Input(format!("ordering has {} entries, expected {m}", o.len())));
    }
    Ok(o)
}

fn print_json<T: serde::Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn check(a: &CheckArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let tol = a.tol.tolerance()?;
    let cp = a.source.load(&tol)?;
    let sigma = match &a.ordering {
        Some(s) => parse_ordering(s, cp.dim())?,
        None => Ordering::identity(cp.dim()),
    };
    let rep = positivity_report(&cp, &sigma, &tol)?;
    if json {
        print_json(
            out,
            &CheckJson {
                ordering: sigma.to_one_based(),
                is_cis: rep.is_cis_under_given_ordering,
                is_mtp2: rep.is_mtp2,
                is_positively_associated: rep.is_positively_associated,
                violating_entries: rep
                    .violating_entries
                    .iter()
                    .map(|e| EntryJson {
                        row: e.row + 1,
                        col: e.col + 1,
                        value: e.value,
                    })
                    .collect(),
            },
        )?;
    } else {
        writeln!(out, "ordering: {sigma}")?;
        writeln!(out, "CIS under ordering: {}", yes_no(rep.is_cis_under_given_ordering))?;
        writeln!(out, "MTP2: {}", yes_no(rep.is_mtp2))?;
        writeln!(out, "positively associated: {}", yes_no(rep.is_positively_associated))?;
        if !rep.violating_entries.is_empty() {
            writeln!(out, "\nfactor entries that are positive (or zero, on the boundary):")?;
            let rows: Vec<Vec<String>> = rep
                .violating_entries
                .iter()
                .map(|e| vec![(e.row + 1).to_string(), (e.col + 1).to_string(), sig6(e.value)])
                .collect();
            write!(out, "{}", table(&["row".into(), "col".into(), "U".into()], &rows))?;
        }
    }
    Ok(if rep.is_cis_under_given_ordering { 0 } else { 1 })
}

fn orderings(a: &OrderingsArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let tol = a.tol.tolerance()?;
    let cp = a.source.load(&tol)?;
    let (mode, found) = if a.one {
        let cfg = RecoveryConfig {
            tol,
            ..Default::default()
        };
        ("one", find_cis_ordering_population(&cp, &cfg)?.into_iter().collect::<Vec<_>>())
    } else {
        ("all", enumerate_cis_orderings(&cp, &tol)?)
    };
    if json {
        print_json(
            out,
            &OrderingsJson {
                mode,
                count: found.len(),
                orderings: found.iter().map(Ordering::to_one_based).collect(),
            },
        )?;
    } else if found.is_empty() {
        writeln!(out, "NONE")?;
    } else {
        for o in &found {
            writeln!(out, "{o}")?;
        }
    }
    Ok(if found.is_empty() { 1 } else { 0 })
}

fn recover(a: &RecoverArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let data = io::read_csv(&a.data)?;
    let cfg = RecoveryConfig {
        epsilon_schedule: EpsilonSchedule::power_law(a.epsilon_scale)?,
        tie_break: match a.tie_break {
            TieBreakArg::First => TieBreak::FirstIndex,
            TieBreakArg::Maxmin => TieBreak::MaxMinCoefficient,
        },
        ..Default::default()
    };
    let epsilon = cfg.epsilon_schedule.epsilon(data.n());
    let mut report = RecoverJson {
        ordering: None,
        n: data.n(),
        m: data.m(),
        epsilon,
        steps: Vec::new(),
        failed_step: None,
        best_margin: None,
    };
    match find_cis_ordering_noisy(&data, &cfg) {
        Ok(r) => {
            report.ordering = Some(r.ordering.to_one_based());
            report.steps = r
                .steps
                .iter()
                .map(|s| StepJson {
                    step: s.step,
                    variable: s.variable + 1,
                    min_coefficient: s.min_coefficient,
                })
                .collect();
            if json {
                print_json(out, &report)?;
            } else {
                writeln!(out, "ordering: {}", r.ordering)?;
                writeln!(out, "epsilon: {} (n = {})", sig6(epsilon), data.n())?;
                if !report.steps.is_empty() {
                    let rows: Vec<Vec<String>> = report
                        .steps
                        .iter()
                        .map(|s| vec![s.step.to_string(), s.variable.to_string(), sig6(s.min_coefficient)])
                        .collect();
                    write!(out, "{}", table(&["step".into(), "placed".into(), "min coef".into()], &rows))?;
                }
            }
            Ok(0)
        }
        Err(cisdag_core::Error::NoCandidate { step, best_margin }) => {
            writeln!(
                err,
                "no variable passes the threshold -{} at step {step}; best minimum coefficient {}",
                sig6(epsilon),
                sig6(best_margin)
            )?;
            if json {
                report.failed_step = Some(step);
                report.best_margin = Some(best_margin);
                print_json(out, &report)?;
            } else {
                writeln!(out, "NONE")?;
            }
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

fn fit_cmd(a: &FitArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let data = io::read_csv(&a.data)?;
    let m = data.m();
    let dag = a.dag.as_deref().map(io::read_dag).transpose()?;
    if let Some(g) = &dag {
        if g.m() != m {
            return Err(CliError::Input(format!("DAG has {} nodes but the data has {m} columns", g.m())));
        }
    }
    let sigma = match (&a.ordering, &dag) {
        (Some(s), _) => parse_ordering(s, m)?,
        (None, Some(g)) => g.topological_order().expect("validated DAG"),
        (None, None) => Ordering::identity(m),
    };
    let constraints: Vec<RowConstraint> = (1..m)
        .map(|p| {
            let v = sigma.at(p);
            match (&dag, a.nonneg) {
                (None, false) => RowConstraint::Free,
                (None, true) => RowConstraint::Nonnegative,
                (Some(g), false) => RowConstraint::Support(g.parents(v).into_iter().collect()),
                (Some(g), true) => RowConstraint::NonnegativeSupport(g.parents(v).into_iter().collect()),
            }
        })
        .collect();
    if let Some(g) = &dag {
        if !g.is_topological(&sigma) {
            return Err(CliError::Input(format!("ordering {sigma} is not topological for the DAG")));
        }
    }
    let mut report = FitJson {
        ordering: sigma.to_one_based(),
        nonneg: a.nonneg,
        n: data.n(),
        exists: false,
        exact_fit_variable: None,
        lambda: None,
        precision_diag: None,
        intercept: None,
        loglik: None,
        residual_norms: None,
    };
    let f = match fit(&data, &sigma, &constraints) {
        Ok(f) => f,
        Err(e @ cisdag_core::Error::MleDoesNotExist { variable }) => {
            writeln!(err, "{e}")?;
            if json {
                report.exact_fit_variable = Some(variable + 1);
                print_json(out, &report)?;
            } else {
                writeln!(out, "MLE exists: no (x{} is fitted exactly)", variable + 1)?;
            }
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };
    let lambda: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| f.sem.lambda()[(i, j)]).collect()).collect();
    if json {
        report.exists = true;
        report.lambda = Some(lambda);
        report.precision_diag = Some(f.precision_diag());
        report.intercept = Some(f.sem.mean().to_vec());
        report.loglik = Some(f.loglik);
        report.residual_norms = Some(f.residual_norms.clone());
        print_json(out, &report)?;
    } else {
        writeln!(out, "ordering: {sigma}")?;
        writeln!(out, "MLE exists: yes")?;
        writeln!(out, "log-likelihood: {}", sig6(f.loglik))?;
        writeln!(out, "\ncoefficients (row: equation of x_i)")?;
        let header: Vec<String> = std::iter::once(String::new()).chain((1..=m).map(|j| format!("x{j}"))).collect();
        let rows: Vec<Vec<String>> = lambda
            .iter()
            .enumerate()
            .map(|(i, r)| std::iter::once(format!("x{}", i + 1)).chain(r.iter().map(|&v| sig6(v))).collect())
            .collect();
        write!(out, "{}", table(&header, &rows))?;
        writeln!(out)?;
        let d = f.precision_diag();
        let rows: Vec<Vec<String>> = (0..m)
            .map(|i| {
                vec![
                    format!("x{}", i + 1),
                    sig6(d[i]),
                    sig6(f.sem.noise_var().get(i)),
                    sig6(f.sem.mean()[i]),
                    sig6(f.residual_norms[i]),
                ]
            })
            .collect();
        let header = ["", "D", "noise var", "intercept", "resid norm"].map(String::from);
        write!(out, "{}", table(&header, &rows))?;
    }
    Ok(0)
}

fn edge_list(g: &Dag) -> Vec<[usize; 2]> {
    g.edges().iter().map(|&(a, b)| [a + 1, b + 1]).collect()
}

fn equiv(a: &EquivArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = io::read_dag(&a.dag)?;
    let (name, members): (&'static str, BTreeSet<Dag>) = match a.class {
        ClassArg::Markov => ("markov", markov_class(&g)?),
        ClassArg::CisMarkov => ("cis-markov", cis_markov_class(&g)?),
    };
    if json {
        print_json(
            out,
            &EquivJson {
                class: name,
                size: members.len(),
                members: members.iter().map(edge_list).collect(),
            },
        )?;
    } else {
        writeln!(out, "{name} class size: {}", members.len())?;
        for h in &members {
            writeln!(out, "{h}")?;
        }
    }
    Ok(0)
}

fn parse_random_spec(s: &str) -> Result<(usize, f64, f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || CliError::Input(format!("--random expects m,edge_prob,lo,hi, got `{s}`"));
    let [m, p, lo, hi] = parts.as_slice() else {
        return Err(bad());
    };
    Ok((
        m.parse().map_err(|_| bad())?,
        p.parse().map_err(|_| bad())?,
        lo.parse().map_err(|_| bad())?,
        hi.parse().map_err(|_| bad())?,
    ))
}

fn simulate(a: &SimulateArgs, json: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    if a.n == 0 {
        return Err(CliError::Input("--n must be at least 1".into()));
    }
    let sem = match (&a.source.sem, &a.source.random) {
        (Some(p), _) => io::read_sem(p)?,
        (_, Some(spec)) => {
            let (m, p, lo, hi) = parse_random_spec(spec)?;
            if m == 0 {
                return Err(CliError::Input("--random needs m >= 1".into()));
            }
            random_cis_model(m, p, (lo, hi), a.seed)?
        }
        _ => unreachable!("clap enforces one source"),
    };
    let data = sample_sem(&SimSpec {
        sem,
        n: a.n,
        seed: a.seed,
    })?;
    match &a.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
            io::write_csv(&data, BufWriter::new(file))?;
            if json {
                print_json(
                    out,
                    &SimulateJson {
                        n: data.n(),
                        m: data.m(),
                        seed: a.seed,
                        out: path.display().to_string(),
                    },
                )?;
            }
        }
        None => io::write_csv(&data, out)?,
    }
    Ok(0)
}
