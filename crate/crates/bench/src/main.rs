use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use krylov_bench::config::{self, ExperimentConfig, Instances, SolveOverrides};
use krylov_bench::fetch::{self, KNOWN_MATRICES};
use krylov_bench::runner::{self, parse_methods, parse_policies};
use krylov_bench::{emit_csv, emit_plot, read_csv, write_outputs, BenchError, Metric, PlotSpec, XAxis};
use stable_krylov::PreconditionerKind;

#[derive(Parser, Debug)]
#[command(name = "krylov-bench", version, about = "Krylov solver experiments on ill-conditioned systems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Trials per matrix cell.
    #[arg(long, global = true, default_value_t = config::DEFAULT_TRIALS)]
    trials: u32,
    /// Base seed; per-trial seeds are derived from it.
    #[arg(long, global = true, default_value_t = config::DEFAULT_SEED)]
    seed: u64,
    /// Comma-separated methods, e.g. `cg,gmres:30,lgmres:30:3`, or `all`.
    #[arg(long, global = true, default_value = "all")]
    methods: String,
    /// Comma-separated step policies (classic, linesearch, twodim) or `all`.
    #[arg(long, global = true, default_value = "all")]
    policies: String,
    #[arg(long, global = true)]
    rtol: Option<f64>,
    #[arg(long, global = true)]
    atol: Option<f64>,
    /// Iteration cap; defaults to 10n.
    #[arg(long, global = true)]
    maxiter: Option<usize>,
    #[arg(long, global = true, default_value = "identity")]
    preconditioner: PreconditionerKind,
    #[arg(long, global = true, default_value = "results")]
    out_dir: PathBuf,
    /// Check residual monotonicity and recurrence drift inside the solve loop.
    #[arg(long, global = true)]
    check_invariants: bool,
    /// Record wall-clock time per solve (makes the CSV non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    /// Worker threads for trials; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one system under every selected method and policy; CSV to stdout.
    Solve {
        /// `hilbert:<n>`, `random:<n>:<cond>[:indefinite]`, or a .mtx path.
        #[arg(long)]
        matrix: String,
    },
    /// Sweep Hilbert matrices.
    Hilbert {
        /// Sizes, e.g. `1-20,50,100`.
        #[arg(long)]
        sizes: Option<String>,
        /// Skip the dense LU baseline.
        #[arg(long)]
        no_lu: bool,
    },
    /// Sweep random symmetric matrices over condition numbers.
    Random {
        #[arg(long, default_value_t = config::DEFAULT_RANDOM_N)]
        n: usize,
        /// Comma-separated condition numbers.
        #[arg(long, default_value = "1e2,1e6,1e10,1e13")]
        conds: String,
        #[arg(long)]
        indefinite: bool,
    },
    /// Run Matrix Market files (default: the fetched real-world matrices).
    Files {
        paths: Vec<PathBuf>,
        #[arg(long)]
        no_lu: bool,
    },
    /// Download the real-world matrices into $KRYLOV_MATRIX_DIR.
    Fetch {
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Render an SVG chart from a results CSV.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "residual")]
        metric: Metric,
        #[arg(long, default_value = "n")]
        x: XAxis,
        #[arg(long)]
        family: Option<String>,
        /// Comma-separated methods to keep.
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        output: PathBuf,
    },
}

fn parse_sizes(s: &str) -> Result<Vec<usize>, BenchError> {
    let bad = || BenchError::Config(format!("bad size list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.trim().split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.parse().map_err(|_| bad())?;
                let hi: usize = hi.parse().map_err(|_| bad())?;
                out.extend(lo..=hi);
            }
            None => out.push(part.trim().parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn parse_conds(s: &str) -> Result<Vec<f64>, BenchError> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse()
                .map_err(|_| BenchError::Config(format!("bad condition number `{c}`")))
        })
        .collect()
}

impl Global {
    fn apply(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig, BenchError> {
        cfg.trials = self.trials;
        cfg.base_seed = self.seed;
        cfg.methods = parse_methods(&self.methods)?;
        cfg.policies = parse_policies(&self.policies)?;
        cfg.overrides = SolveOverrides {
            rtol: self.rtol,
            atol: self.atol,
            maxiter: self.maxiter,
            preconditioner: self.preconditioner,
            check_invariants: self.check_invariants,
        };
        cfg.timing = self.timing;
        cfg.threads = self.threads;
        cfg.out_dir = self.out_dir.clone();
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sweep(g: &Global, cfg: ExperimentConfig, stem: &str, x: XAxis) -> Result<(), BenchError> {
    let cfg = g.apply(cfg)?;
    let rows = runner::run_experiment(&cfg)?;
    let out = write_outputs(&cfg.out_dir, stem, &rows, Some(x))?;
    println!("{} rows -> {}", rows.len(), out.rows.display());
    println!("summary -> {}", out.summary.display());
    for p in out.plots {
        println!("plot -> {}", p.display());
    }
    Ok(())
}

fn solve_one(g: &Global, matrix: &str) -> Result<(), BenchError> {
    let parts: Vec<&str> = matrix.split(':').collect();
    let bad = || BenchError::Config(format!("bad matrix spec `{matrix}`"));
    let cfg = match parts.as_slice() {
        ["hilbert", n] => ExperimentConfig::hilbert(vec![n.parse().map_err(|_| bad())?]),
        ["random", n, c, rest @ ..] => {
            let mut cfg = ExperimentConfig::random(
                n.parse().map_err(|_| bad())?,
                vec![c.parse().map_err(|_| bad())?],
            );
            if let Instances::Random { indefinite, .. } = &mut cfg.instances {
                *indefinite = match rest {
                    [] => false,
                    ["indefinite"] => true,
                    _ => return Err(bad()),
                };
            }
            cfg
        }
        _ => ExperimentConfig::files(vec![PathBuf::from(matrix)]),
    };
    let cfg = ExperimentConfig {
        lu_baseline: false,
        ..g.apply(cfg)?
    };
    let cfg = ExperimentConfig { trials: 1, ..cfg };
    let rows = runner::run_experiment(&cfg)?;
    emit_csv(&rows, BufWriter::new(std::io::stdout().lock()))
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let g = &cli.global;
    match cli.command {
        Command::Solve { matrix } => solve_one(g, &matrix),
        Command::Hilbert { sizes, no_lu } => {
            let sizes = match sizes {
                Some(s) => parse_sizes(&s)?,
                None => config::default_hilbert_sizes(),
            };
            let cfg = ExperimentConfig {
                lu_baseline: !no_lu,
                ..ExperimentConfig::hilbert(sizes)
            };
            sweep(g, cfg, "hilbert", XAxis::N)
        }
        Command::Random { n, conds, indefinite } => {
            let mut cfg = ExperimentConfig::random(n, parse_conds(&conds)?);
            if let Instances::Random { indefinite: ind, .. } = &mut cfg.instances {
                *ind = indefinite;
            }
            sweep(g, cfg, "random", XAxis::Cond)
        }
        Command::Files { paths, no_lu } => {
            let paths = if paths.is_empty() {
                let dir = fetch::matrix_dir();
                let mut found = Vec::new();
                for m in KNOWN_MATRICES {
                    found.extend(fetch::locate(&dir, m.name)?);
                }
                if found.is_empty() {
                    return Err(BenchError::Config(format!(
                        "no matrices given and none fetched into {} (run `krylov-bench fetch`)",
                        dir.display()
                    )));
                }
                found
            } else {
                paths
            };
            let cfg = ExperimentConfig {
                lu_baseline: !no_lu,
                ..ExperimentConfig::files(paths)
            };
            sweep(g, cfg, "files", XAxis::N)
        }
        Command::Fetch { dir } => {
            let dir = dir.unwrap_or_else(fetch::matrix_dir);
            for m in KNOWN_MATRICES {
                let f = fetch::fetch(m, &dir)?;
                println!("{}  {}", f.sha256, f.path.display());
            }
            Ok(())
        }
        Command::Plot {
            input,
            metric,
            x,
            family,
            only,
            output,
        } => {
            let file = std::fs::File::open(&input).map_err(|e| BenchError::Io {
                path: input.display().to_string(),
                source: e,
            })?;
            let rows = read_csv(file)?;
            let spec = PlotSpec {
                family,
                methods: only.map(|s| s.split(',').map(|m| m.trim().to_string()).collect()),
                ..PlotSpec::new(metric, x)
            };
            let svg = emit_plot(&rows, &spec)?;
            std::fs::write(&output, svg).map_err(|e| BenchError::Io {
                path: output.display().to_string(),
                source: e,
            })?;
            println!("plot -> {}", output.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
