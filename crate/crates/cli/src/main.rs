//! `tlfacp` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tlfacp::descent::Method;
use tlfacp::feasibility::{normalize, solve_feasibility, FeasibilityStatus};
use tlfacp::generate::{gen_random, gen_setcover, gen_setcover_nondegenerate, RandomParams, SetCoverReduction};
use tlfacp::instance::homogenize;
use tlfacp::io::{parse_point, parse_problem, problem_to_json, vector_to_json, AnyProblem, Problem};
use tlfacp::mincut::{find_direction_mincut, MincutMode, MincutOutcome};
use tlfacp::oracle::{
    enumerate_directions, global_opt_bruteforce, local_opt_check, transport_opt, GlobalOutcome, LocalVerdict,
    OracleLimits, TransportOutcome,
};
use tlfacp::solve::{solve, solve_from_point, RunConfig, SolveReport};
use tlfacp::tangent::build_tangent;
use tlfacp::{is_feasible, objective, Error, Instance, NumMode, Scalar, TropVector};

mod text;

#[derive(Parser, Debug)]
#[command(name = "tlfacp", version, about = "Exact descent solvers for tropical linearly factorized programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Direction finder for `solve`.
    #[arg(long, global = true, default_value = "auto")]
    method: MethodArg,
    #[arg(long, global = true, default_value_t = 100_000)]
    max_iter: u64,
    /// Largest subgraph family the min-cut engine will enumerate.
    #[arg(long, global = true, default_value_t = tlfacp::mincut::DEFAULT_SUBGRAPH_CAP)]
    subgraph_cap: usize,
    /// Comparison tolerance for float instances.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Worker threads for the global oracle.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Point as `x1,x2,...`; `-inf` allowed, rationals as `p/q`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    point: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Tree,
    Mincut,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a feasible start and descend to a local optimum.
    Solve { file: PathBuf },
    /// Greatest feasible point keeping every column with positive muMinus finite.
    Feasible { file: PathBuf },
    /// Objective value and feasibility at `--point`.
    Eval { file: PathBuf },
    /// Subset oracle and min-cut certificate at `--point`.
    CheckLocal { file: PathBuf },
    #[command(subcommand)]
    Oracle(OracleCmd),
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Rewrite an inhomogeneous file as a homogeneous one.
    Homogenize { file: PathBuf },
    /// Tangent digraph at `--point` (default: the feasible start) as DOT.
    ExportDot { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum OracleCmd {
    /// Exhaustive global optimum over spanning trees of the pattern graph.
    Global {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        max_trees: u64,
    },
    /// Optimal transportation value for the objective alone.
    Transport { file: PathBuf },
    /// Every feasible descent direction at `--point`.
    Directions { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum GenerateCmd {
    /// Seeded random instance.
    Random(RandomArgs),
    /// Set-cover instance; subsets as `1,2;2,3` over elements `1..=ground`.
    Setcover(CoverArgs),
    /// Scaled set-cover instance whose homogenization is non-degenerate.
    SetcoverNd(CoverArgs),
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long, default_value_t = 2)]
    mu_max: u64,
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    lo: i64,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    hi: i64,
    #[arg(long, default_value_t = 0.6)]
    density: f64,
    #[arg(long)]
    perturb: bool,
    #[arg(long, default_value = "int")]
    mode: String,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long)]
    ground: usize,
    #[arg(long)]
    subsets: String,
    #[arg(long, default_value = "int")]
    mode: String,
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn fail(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

macro_rules! typed {
    ($any:expr, $p:ident => $body:expr) => {
        match $any {
            AnyProblem::Int($p) => $body,
            AnyProblem::Rat($p) => $body,
            AnyProblem::Float($p) => $body,
        }
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let o = &cli.opts;
    if o.format == Format::Dot && !matches!(cli.command, Command::ExportDot { .. }) {
        return Err(fail("--format dot is only available for export-dot"));
    }
    match &cli.command {
        Command::Solve { file } => typed!(load(file, o)?, p => cmd_solve(&p, o)),
        Command::Feasible { file } => typed!(load(file, o)?, p => cmd_feasible(&p, o)),
        Command::Eval { file } => typed!(load(file, o)?, p => cmd_eval(&p, o)),
        Command::CheckLocal { file } => typed!(load(file, o)?, p => cmd_check_local(&p, o)),
        Command::Oracle(OracleCmd::Global { file, max_trees }) => {
            typed!(load(file, o)?, p => cmd_oracle_global(&p, o, *max_trees))
        }
        Command::Oracle(OracleCmd::Transport { file }) => typed!(load(file, o)?, p => cmd_transport(&p, o)),
        Command::Oracle(OracleCmd::Directions { file }) => typed!(load(file, o)?, p => cmd_directions(&p, o)),
        Command::Generate(g) => cmd_generate(g, o),
        Command::Homogenize { file } => typed!(load(file, o)?, p => cmd_homogenize(&p)),
        Command::ExportDot { file } => typed!(load(file, o)?, p => cmd_export_dot(&p, o)),
    }
}

fn load(path: &Path, o: &Opts) -> Result<AnyProblem, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let problem = parse_problem(&text)?;
    Ok(match o.tol {
        None => problem,
        Some(tol) => match problem {
            AnyProblem::Int(p) => AnyProblem::Int(retol(p, tol)),
            AnyProblem::Rat(p) => AnyProblem::Rat(retol(p, tol)),
            AnyProblem::Float(p) => AnyProblem::Float(retol(p, tol)),
        },
    })
}

fn retol<T: Scalar>(p: Problem<T>, tol: f64) -> Problem<T> {
    match p {
        Problem::Homogeneous(i) => Problem::Homogeneous(i.with_tol(tol)),
        Problem::Inhomogeneous(mut h) => {
            h.base = h.base.with_tol(tol);
            Problem::Inhomogeneous(h)
        }
    }
}

fn run_config(o: &Opts) -> RunConfig {
    let method = match o.method {
        MethodArg::Auto => Method::Auto,
        MethodArg::Tree => Method::Tree,
        MethodArg::Mincut => Method::Mincut,
    };
    RunConfig {
        method,
        max_iter: o.max_iter,
        subgraph_cap: o.subgraph_cap,
        tol: o.tol,
        seed: o.seed,
        jobs: o.jobs,
    }
}

fn emit(o: &Opts, value: &Value, text: impl FnOnce() -> String) {
    match o.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("serializable")),
        _ => print!("{}", text()),
    }
}

fn point<T: Scalar>(o: &Opts, n: usize) -> Result<TropVector<T>, Failure> {
    let raw = o.point.as_deref().ok_or_else(|| fail("this command needs --point"))?;
    let x: TropVector<T> = parse_point(raw)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() }.into());
    }
    Ok(x)
}

/// The homogeneous instance a command works on, with a map back to the
/// caller's coordinates when the file was inhomogeneous.
struct Working<T> {
    inst: Instance<T>,
    homog: Option<tlfacp::instance::Homogenized<T>>,
}

impl<T: Scalar> Working<T> {
    fn new(p: &Problem<T>) -> Result<Self, Failure> {
        Ok(match p {
            Problem::Homogeneous(i) => Working { inst: i.clone(), homog: None },
            Problem::Inhomogeneous(h) => {
                let hm = homogenize(h)?;
                Working { inst: hm.instance.clone(), homog: Some(hm) }
            }
        })
    }

    fn lift(&self, x: &TropVector<T>) -> TropVector<T> {
        match &self.homog {
            Some(h) => h.lift(x),
            None => x.clone(),
        }
    }

    fn user_point(&self, o: &Opts) -> Result<TropVector<T>, Failure> {
        let n = self.homog.as_ref().map_or(self.inst.n(), |h| h.extra_col);
        point(o, n).map(|x| self.lift(&x))
    }

    /// Caller-side point: projected when homogenized, `None` if the extra
    /// coordinate is `-inf`.
    fn project(&self, x: &TropVector<T>) -> Result<Option<TropVector<T>>, Failure> {
        match &self.homog {
            Some(h) => Ok(h.project(x)?),
            None => Ok(Some(x.clone())),
        }
    }
}

fn cmd_solve<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let w = Working::new(p)?;
    let cfg = run_config(o);
    let report: SolveReport<T> = match &o.point {
        Some(_) => solve_from_point(&w.inst, &w.user_point(o)?, &cfg)?,
        None => solve(&w.inst, &cfg)?,
    };
    let mut out = report.to_json(&cfg);
    let projected = match &report.x {
        Some(x) if w.homog.is_some() => w.project(x)?,
        _ => None,
    };
    if w.homog.is_some() {
        out["original"] = json!({ "x": projected.as_ref().map(vector_to_json) });
    }
    emit(o, &out, || text::solve(&report, &cfg, projected.as_ref()));
    Ok(report.status.exit_code() as u8)
}

fn cmd_feasible<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let w = Working::new(p)?;
    let required = w.inst.required_support();
    let res = solve_feasibility(&w.inst, &required)?;
    let (status, x, missing, code) = match &res.status {
        FeasibilityStatus::Feasible(x) => ("Feasible", Some(x), vec![], 0),
        FeasibilityStatus::InfeasibleForSupport { x, missing } => ("Infeasible", Some(x), missing.clone(), 2),
        FeasibilityStatus::IterationLimit { x } => ("IterationLimit", Some(x), vec![], 4),
    };
    let x = match x {
        Some(x) if x.max_finite().is_some() => Some(normalize(x)?),
        _ => None,
    };
    let out = json!({
        "status": status,
        "x": x.as_ref().map(vector_to_json),
        "missing": missing,
        "iterations": res.iterations,
        "entriesTouched": res.entries_touched,
    });
    emit(o, &out, || {
        let mut s = format!("status: {status}\n");
        if let Some(x) = &x {
            s += &format!("x: {x}\n");
        }
        if !missing.is_empty() {
            s += &format!("missing: {}\n", text::set(&missing));
        }
        s + &format!("iterations: {}\n", res.iterations)
    });
    Ok(code)
}

fn cmd_eval<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let (value, feasible) = match p {
        Problem::Homogeneous(i) => {
            let x = point(o, i.n())?;
            (objective(i, &x)?, is_feasible(i, &x)?)
        }
        Problem::Inhomogeneous(h) => {
            let x = point(o, h.base.n())?;
            (h.objective(&x)?, h.is_feasible(&x)?)
        }
    };
    let out = json!({ "value": value.to_json(), "feasible": feasible });
    emit(o, &out, || format!("value: {value}\nfeasible: {feasible}\n"));
    Ok(0)
}

fn cmd_check_local<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let w = Working::new(p)?;
    let x = w.user_point(o)?;
    if !is_feasible(&w.inst, &x)? {
        return Err(fail(format!("point {x} is infeasible")));
    }
    let verdict = local_opt_check(&w.inst, &x, 20)?;
    let cut = if x.is_all_finite() {
        match find_direction_mincut(&w.inst, &x, MincutMode::CertifyAll, o.subgraph_cap)? {
            MincutOutcome::Found { direction, capacities, .. } => {
                json!({ "status": "Found", "J": direction.cols, "capacities": capacities })
            }
            MincutOutcome::LocallyOptimal { capacities } => {
                json!({ "status": "LocallyOptimal", "capacities": capacities })
            }
            MincutOutcome::CapExceeded { subgraphs } => json!({ "status": "CapExceeded", "subgraphs": subgraphs }),
        }
    } else {
        Value::Null
    };
    let (name, witness) = match &verdict {
        LocalVerdict::LocallyOptimal => ("LocallyOptimal", None),
        LocalVerdict::NotLocal(j) => ("NotLocal", Some(j.clone())),
    };
    let out = json!({ "verdict": name, "J": witness, "mincut": cut, "degree": w.inst.degree() });
    emit(o, &out, || {
        let mut s = format!("verdict: {name}\n");
        if let Some(j) = &witness {
            s += &format!("descent direction: J = {}\n", text::set(j));
        }
        if let Some(caps) = cut.get("capacities") {
            s += &format!("min-cut capacities: {caps} (D = {})\n", w.inst.degree());
        }
        s
    });
    Ok(0)
}

fn cmd_oracle_global<T: Scalar>(p: &Problem<T>, o: &Opts, max_trees: u64) -> CmdResult {
    let w = Working::new(p)?;
    let limits = OracleLimits { max_trees, jobs: o.jobs.max(1), ..Default::default() };
    let report = global_opt_bruteforce(&w.inst, limits)?;
    let (status, code) = match &report.outcome {
        GlobalOutcome::Optimum { .. } => ("Optimum", 0),
        GlobalOutcome::Infeasible => ("Infeasible", 2),
        GlobalOutcome::Unbounded { .. } => ("Unbounded", 3),
        GlobalOutcome::LimitExceeded { .. } => ("LimitExceeded", 4),
    };
    let mut out = json!({ "status": status, "trees": report.trees, "supports": report.supports });
    let mut lines = format!("status: {status}\n");
    match &report.outcome {
        GlobalOutcome::Optimum { x, value } => {
            out["x"] = vector_to_json(x);
            out["value"] = value.to_json();
            lines += &format!("x: {x}\nvalue: {value}\n");
            if w.homog.is_some() {
                let y = w.project(x)?;
                out["original"] = json!({ "x": y.as_ref().map(vector_to_json) });
                if let Some(y) = y {
                    lines += &format!("original x: {y}\n");
                }
            }
        }
        GlobalOutcome::Unbounded { support } => {
            out["support"] = json!(support);
            lines += &format!("support: {}\n", text::set(support));
        }
        _ => {}
    }
    lines += &format!(
        "trees: {}\nsupports: {}\nelapsed: {:.3}s\n",
        report.trees,
        report.supports,
        report.elapsed.as_secs_f64()
    );
    emit(o, &out, || lines);
    Ok(code)
}

fn cmd_transport<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let inst = p.base();
    let (out, lines, code) = match transport_opt(inst.c(), inst.mu_plus(), inst.mu_minus())? {
        TransportOutcome::Optimal { value, flow } => {
            let flow_json: Vec<Value> = flow.iter().map(|(k, j, f)| json!([k, j, f])).collect();
            let mut s = format!("status: Optimal\nvalue: {value}\nflow:\n");
            for (k, j, f) in &flow {
                s += &format!("  u{} -> v{}: {f}\n", k + 1, j + 1);
            }
            (json!({ "status": "Optimal", "value": value.to_json(), "flow": flow_json }), s, 0)
        }
        TransportOutcome::Infeasible => (json!({ "status": "Infeasible" }), "status: Infeasible\n".to_string(), 2),
    };
    let mut lines = lines;
    if inst.m() > 0 {
        lines += "note: constraints are ignored by the transportation oracle\n";
    }
    emit(o, &out, || lines);
    Ok(code)
}

fn cmd_directions<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let w = Working::new(p)?;
    let x = w.user_point(o)?;
    let dirs = enumerate_directions(&w.inst, &x, 20)?;
    let g = build_tangent(&w.inst, &x)?;
    let rows: Vec<Value> = dirs
        .iter()
        .map(|j| json!({ "J": j, "mu": tlfacp::tangent::mu_rate(&w.inst, &g, j) }))
        .collect();
    let out = json!({ "directions": rows });
    emit(o, &out, || {
        if dirs.is_empty() {
            return "no feasible descent direction\n".to_string();
        }
        dirs.iter()
            .map(|j| format!("J = {}  mu = {}\n", text::set(j), tlfacp::tangent::mu_rate(&w.inst, &g, j)))
            .collect()
    });
    Ok(0)
}

fn cmd_homogenize<T: Scalar>(p: &Problem<T>) -> CmdResult {
    let out = match p {
        Problem::Homogeneous(_) => problem_to_json(p),
        Problem::Inhomogeneous(h) => tlfacp::io::instance_to_json(&homogenize(h)?.instance),
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(0)
}

fn cmd_export_dot<T: Scalar>(p: &Problem<T>, o: &Opts) -> CmdResult {
    let w = Working::new(p)?;
    let x = match &o.point {
        Some(_) => w.user_point(o)?,
        None => match solve_feasibility(&w.inst, &w.inst.required_support())?.status {
            FeasibilityStatus::Feasible(x) => normalize(&x)?,
            _ => return Err(Failure { code: 2, message: "no feasible point to draw".into() }),
        },
    };
    let dot = build_tangent(&w.inst, &x)?.to_dot();
    if o.format == Format::Json {
        emit(o, &json!({ "x": vector_to_json(&x), "dot": dot }), String::new);
    } else {
        print!("{dot}");
    }
    Ok(0)
}

fn parse_subsets(raw: &str, ground: usize) -> Result<Vec<Vec<usize>>, Failure> {
    raw.split(';')
        .map(|part| {
            part.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    let e: usize = t.trim().parse().map_err(|_| fail(format!("bad element {t:?}")))?;
                    if e == 0 || e > ground {
                        return Err(fail(format!("element {e} is outside 1..={ground}")));
                    }
                    Ok(e - 1)
                })
                .collect()
        })
        .collect()
}

fn cmd_generate(g: &GenerateCmd, o: &Opts) -> CmdResult {
    let out = match g {
        GenerateCmd::Random(a) => {
            let params = RandomParams {
                n: a.n,
                m: a.m,
                p: a.p,
                mu_max: a.mu_max,
                lo: a.lo,
                hi: a.hi,
                density: a.density,
                seed: o.seed,
                perturb: a.perturb,
            };
            match a.mode.parse::<NumMode>()? {
                NumMode::Int => tlfacp::io::instance_to_json(&gen_random::<i64>(&params)?),
                NumMode::Rat => tlfacp::io::instance_to_json(&gen_random::<num::BigRational>(&params)?),
                NumMode::Float => tlfacp::io::instance_to_json(&gen_random::<tlfacp::Float>(&params)?),
            }
        }
        GenerateCmd::Setcover(a) | GenerateCmd::SetcoverNd(a) => {
            let subsets = parse_subsets(&a.subsets, a.ground)?;
            let scaled = matches!(g, GenerateCmd::SetcoverNd(_));
            match a.mode.parse::<NumMode>()? {
                NumMode::Int => cover_json::<i64>(a.ground, &subsets, scaled)?,
                NumMode::Rat => cover_json::<num::BigRational>(a.ground, &subsets, scaled)?,
                NumMode::Float => cover_json::<tlfacp::Float>(a.ground, &subsets, scaled)?,
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(0)
}

fn cover_json<T: Scalar>(ground: usize, subsets: &[Vec<usize>], scaled: bool) -> Result<Value, Failure> {
    let red: SetCoverReduction<T> =
        if scaled { gen_setcover_nondegenerate(ground, subsets)? } else { gen_setcover(ground, subsets)? };
    Ok(problem_to_json(&Problem::Inhomogeneous(red.instance)))
}
