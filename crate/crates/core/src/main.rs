use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hqts::bench::{
    emit_deviation_summary, parse_key_values, render_routes_svg, report_records, run_benchmark, run_once, write_run_outputs, RunConfig,
    SamplerChoice, Variant,
};
use hqts::instance::CvrpInstance;
use hqts::solution::{round2, SolutionDocument};

const EXIT_USAGE: u8 = 1;
const EXIT_INSTANCE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// Hybrid tabu search for the capacitated vehicle routing problem.
#[derive(Parser, Debug)]
#[command(name = "hqts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance and print the best distance.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every instance in a directory or list, several seeds each.
    Bench {
        /// Instance files or directories of `.vrp` files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Runs per instance.
        #[arg(long)]
        reps: Option<usize>,
        /// Comma-separated variants to compare (default: ts_so).
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Render a solution JSON file as SVG.
    Plot {
        solution: PathBuf,
        instance: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunOpts {
    /// ts, ts_so or cw.
    #[arg(long)]
    variant: Option<String>,
    /// sa, remote or brute.
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Wallclock cap per run in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Number of routes available to the search.
    #[arg(long)]
    fleet: Option<usize>,
    /// Directory for solution, trace, plot and report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` settings; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

struct Failure(u8, String);

impl RunOpts {
    /// Defaults, then the config file, then flags.
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))?;
            let pairs = parse_key_values(&text).map_err(|e| Failure(EXIT_USAGE, format!("{}: {e}", path.display())))?;
            cfg.apply_key_values(&pairs).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
        }
        let usage = |e: hqts::bench::ConfigError| Failure(EXIT_USAGE, e.to_string());
        if let Some(v) = &self.variant {
            cfg.variant = v.parse().map_err(usage)?;
        }
        if let Some(s) = &self.sampler {
            cfg.sampler = s.parse::<SamplerChoice>().map_err(usage)?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(t) = self.time_limit {
            cfg.search.time_limit_seconds = t;
        }
        if let Some(f) = self.fleet {
            cfg.search.fleet = Some(f);
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        cfg.search.validate().map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
        Ok(cfg)
    }
}

fn load(path: &Path) -> Result<CvrpInstance, Failure> {
    CvrpInstance::from_path(path).map_err(|e| Failure(EXIT_INSTANCE, format!("{}: {e}", path.display())))
}

fn solve(instance: &Path, opts: &RunOpts) -> Result<(), Failure> {
    let cfg = opts.resolve()?;
    let inst = load(instance)?;
    let run = run_once(&inst, cfg.variant, &cfg.search, cfg.sampler, cfg.seed).map_err(|e| Failure(EXIT_RUNTIME, e.to_string()))?;
    let dev = inst
        .bks
        .map(|b| {
            format!(
                " ({:+.2}% vs {})",
                hqts::bench::deviation(run.solution.total_cost, b.distance),
                b.distance
            )
        })
        .unwrap_or_default();
    println!(
        "{} {} distance {:.2}{dev} vehicles {}",
        inst.name,
        cfg.variant,
        run.solution.total_cost,
        run.solution.vehicles_used()
    );
    if let Some(stats) = &run.stats {
        println!(
            "iterations {} stop {:?} resequence events {} solver calls {} cache hits {} wallclock {:.1}s",
            stats.iterations,
            stats.stop_reason,
            stats.resequence_events,
            stats.resequence.solver_calls,
            stats.resequence.cache_hits,
            stats.wallclock_seconds
        );
    }
    if let Some(dir) = &cfg.out_dir {
        write_run_outputs(dir, &inst, cfg.variant, &run).map_err(|e| Failure(EXIT_RUNTIME, e.to_string()))?;
        let meta = serde_json::json!({ "wallclock_seconds": run.wallclock_seconds, "stats": run.stats });
        let stem = format!("{}_{}_seed{}", inst.name, cfg.variant, cfg.seed);
        fs::write(
            dir.join(format!("{stem}_meta.json")),
            serde_json::to_string_pretty(&meta).expect("meta serializes"),
        )
        .map_err(|e| Failure(EXIT_RUNTIME, e.to_string()))?;
    }
    Ok(())
}

fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|e| Failure(EXIT_INSTANCE, format!("{}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x.eq_ignore_ascii_case("vrp")))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn bench(paths: &[PathBuf], reps: Option<usize>, variants: &[String], opts: &RunOpts) -> Result<(), Failure> {
    let mut cfg = opts.resolve()?;
    cfg.instances = expand(paths)?;
    if let Some(r) = reps {
        if r == 0 {
            return Err(Failure(EXIT_USAGE, "--reps must be at least 1".into()));
        }
        cfg.repetitions = r;
    }
    let variants: Vec<Variant> = if variants.is_empty() {
        vec![cfg.variant]
    } else {
        variants
            .iter()
            .map(|v| v.parse::<Variant>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?
    };
    let base_out = cfg.out_dir.clone();
    let mut reports = Vec::new();
    for v in &variants {
        let run_cfg = RunConfig {
            variant: *v,
            out_dir: base_out
                .as_ref()
                .map(|d| if variants.len() > 1 { d.join(v.as_str()) } else { d.clone() }),
            ..cfg.clone()
        };
        let report = run_benchmark(&run_cfg).map_err(|e| Failure(EXIT_RUNTIME, e.to_string()))?;
        print!("{}", report.to_csv_string());
        reports.push(report);
    }
    let summary = emit_deviation_summary(report_records(&reports));
    for (v, m) in &summary.means {
        println!("mean deviation {v}: {:.2}%", round2(*m));
    }
    if let Some(dir) = &base_out {
        fs::create_dir_all(dir).map_err(|e| Failure(EXIT_RUNTIME, e.to_string()))?;
        fs::write(dir.join("deviation_summary.csv"), summary.to_csv_string()).map_err(|e| Failure(EXIT_RUNTIME, e.to_string()))?;
    }
    let failed = reports.iter().flat_map(|r| &r.rows).any(|row| row.error.is_some());
    if failed {
        return Err(Failure(EXIT_RUNTIME, "some instances failed; see the error column".into()));
    }
    Ok(())
}

fn plot(solution: &Path, instance: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let inst = load(instance)?;
    let text = fs::read_to_string(solution).map_err(|e| Failure(EXIT_RUNTIME, format!("{}: {e}", solution.display())))?;
    let doc: SolutionDocument = serde_json::from_str(&text).map_err(|e| Failure(EXIT_RUNTIME, format!("{}: {e}", solution.display())))?;
    let sol = doc.to_solution(&inst).map_err(|e| Failure(EXIT_RUNTIME, e))?;
    let svg = render_routes_svg(&sol, &inst).map_err(|e| Failure(EXIT_INSTANCE, e.to_string()))?;
    match out {
        Some(p) => fs::write(p, svg).map_err(|e| Failure(EXIT_RUNTIME, e.to_string())),
        None => {
            print!("{svg}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Solve { instance, opts } => solve(instance, opts),
        Command::Bench {
            paths,
            reps,
            variants,
            opts,
        } => bench(paths, *reps, variants, opts),
        Command::Plot { solution, instance, out } => plot(solution, instance, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
