use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use qadv::report::{
    cmd_demo, cmd_robustness, cmd_simulate, cmd_synthesize, cmd_witness, exit_code_for, load_free_set, load_state,
    to_canonical_string, CommandOutput, RunConfig,
};
use qadv::synthesis::Construction;
use qadv::Error;

/// Generalized robustness certificates and advantage tasks for quantum resources.
#[derive(Parser, Debug)]
#[command(name = "qadv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Robustness value with primal and dual certificates.
    Robustness(Args),
    /// Optimal witness operator.
    Witness(Args),
    /// Build a discrimination task for a construction.
    Synthesize(Args),
    /// Sample discrimination rounds for a synthesized task.
    Simulate(Args),
    /// T-state phase-flip detection example.
    Demo(Args),
}

#[derive(clap::Args, Debug, Clone)]
struct Args {
    /// State file or name (T, T_bar, plus, minus, zero, one, bell, phi_plus:d, w:d, maximally_mixed[:d]).
    /// Repeat for a batch run.
    #[arg(long)]
    state: Vec<String>,
    /// Free-set file or name (incoherent[:d], stabilizer_qubit, stabilizer_two_qubit, separable_ppt[:AxB]).
    #[arg(long = "free-set")]
    free_set: Option<String>,
    /// thm1, thm2, thm4, prop5, prop6 or sm_demo.
    #[arg(long)]
    construction: Option<String>,
    /// Duality gap tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "psd-slack")]
    psd_slack: Option<f64>,
    #[arg(long = "bisection-width")]
    bisection_width: Option<f64>,
    /// Interior-point iteration cap per semidefinite program.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; a directory for batch runs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for batch runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Rounds for `simulate`.
    #[arg(long, default_value_t = 10_000)]
    rounds: usize,
    /// Record the wall-clock time in the certificate.
    #[arg(long)]
    timestamp: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code_for(&e) as u8, message: format!("{}: {e}", e.name()) }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn construction_arg(args: &Args, default: Option<Construction>) -> Result<Construction, Failure> {
    match &args.construction {
        Some(name) => Construction::parse(name).ok_or_else(|| input_error(format!("InvalidInput: unknown construction '{name}'"))),
        None => default.ok_or_else(|| input_error("InvalidInput: --construction is required")),
    }
}

/// Free set implied by constructions that fix it.
fn default_free_set(c: Construction, state_dim: usize) -> Option<String> {
    match c {
        Construction::Thm4 => Some("separable_ppt:2x2".into()),
        Construction::Prop5 => Some(format!("incoherent:{state_dim}")),
        Construction::Prop6 | Construction::SmDemo => Some("stabilizer_qubit".into()),
        _ => None,
    }
}

fn run_one(command: &Command, args: &Args, state_arg: &str, cfg: &RunConfig) -> Result<CommandOutput, Failure> {
    let (spec, rho) = load_state(state_arg)?;
    let construction = match command {
        Command::Synthesize(_) => Some(construction_arg(args, None)?),
        Command::Simulate(_) => Some(construction_arg(args, Some(Construction::Thm2))?),
        _ => None,
    };
    let fset_arg = match (&args.free_set, construction) {
        (Some(f), _) => f.clone(),
        (None, Some(c)) => default_free_set(c, rho.dim()).ok_or_else(|| input_error("InvalidInput: --free-set is required"))?,
        (None, None) => return Err(input_error("InvalidInput: --free-set is required")),
    };
    let (fdesc, f) = load_free_set(&fset_arg, Some(rho.dim()))?;
    let out = match (command, construction) {
        (Command::Robustness(_), _) => cmd_robustness(&spec, &rho, &fdesc, &f, cfg)?,
        (Command::Witness(_), _) => cmd_witness(&spec, &rho, &fdesc, &f, cfg)?,
        (Command::Synthesize(_), Some(c)) => cmd_synthesize(c, &spec, &rho, &fdesc, &f, cfg)?,
        (Command::Simulate(_), Some(c)) => cmd_simulate(c, &spec, &rho, &fdesc, &f, cfg)?,
        _ => unreachable!("demo takes no state"),
    };
    Ok(out)
}

fn write_output(out: &CommandOutput, path: Option<&Path>) -> Result<(), Failure> {
    let text = to_canonical_string(&out.document);
    match path {
        Some(p) => {
            std::fs::write(p, &text).map_err(|e| input_error(format!("cannot write {}: {e}", p.display())))?;
            println!("{}", out.summary);
            println!("wrote {}", p.display());
        }
        None => {
            print!("{text}");
            eprintln!("{}", out.summary);
        }
    }
    Ok(())
}

fn file_stem(state_arg: &str) -> String {
    let base = Path::new(state_arg).file_stem().and_then(|s| s.to_str()).unwrap_or(state_arg);
    base.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let args = match &cli.command {
        Command::Robustness(a) | Command::Witness(a) | Command::Synthesize(a) | Command::Simulate(a) | Command::Demo(a) => a,
    };
    let cfg = RunConfig {
        gap_tolerance: args.tol,
        psd_slack: args.psd_slack,
        bisection_width: args.bisection_width,
        max_iterations: args.max_iter,
        seed: args.seed,
        output_path: args.out.as_ref().map(|p| p.display().to_string()),
        timestamp: args.timestamp,
        rounds: args.rounds,
    };
    cfg.solver_options()?;
    if args.jobs == 0 {
        return Err(input_error("InvalidInput: --jobs must be at least 1"));
    }

    if let Command::Demo(_) = cli.command {
        let out = cmd_demo(&cfg)?;
        write_output(&out, args.out.as_deref())?;
        return Ok(out.exit_code as u8);
    }
    match args.state.as_slice() {
        [] => Err(input_error("InvalidInput: --state is required")),
        [one] => {
            let out = run_one(&cli.command, args, one, &cfg);
            match out {
                Ok(o) => {
                    write_output(&o, args.out.as_deref())?;
                    Ok(o.exit_code as u8)
                }
                Err(f) => Err(f),
            }
        }
        many => run_batch(&cli.command, args, many, &cfg),
    }
}

/// Independent states processed by `--jobs` workers; results are written in input order.
fn run_batch(command: &Command, args: &Args, states: &[String], cfg: &RunConfig) -> Result<u8, Failure> {
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))?;
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CommandOutput, Failure>>>> = Mutex::new((0..states.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.min(states.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= states.len() {
                    break;
                }
                let r = run_one(command, args, &states[i], cfg);
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    let mut code = 0u8;
    for (i, r) in results.into_inner().expect("no worker panicked").into_iter().enumerate() {
        match r.expect("every index processed") {
            Ok(o) => {
                let path = args.out.as_ref().map(|d| d.join(format!("{i:03}_{}.json", file_stem(&states[i]))));
                write_output(&o, path.as_deref())?;
                code = code.max(o.exit_code as u8);
            }
            Err(f) => {
                eprintln!("error: {}: {}", states[i], f.message);
                code = code.max(f.code);
            }
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
