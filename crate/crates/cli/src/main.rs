use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsgc::driver::{self, Experiment, Preset, SweepAxis, TableKind};
use dsgc::{Error, Result};

#[derive(Parser)]
#[command(name = "dsgc", version, about = "Dynamical sparse grid collocation for long-time SDE statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write stats.csv and diagnostics.csv.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Vary one parameter and tabulate terminal errors.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// N, lambda, lambda_b, dt, K, T or M_samp.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Reproduce a cumulant or accuracy table (table2, table3, table4_dsgc_column).
    Table {
        which: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Monte Carlo baseline for an experiment.
    Mc {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Source {
    /// Flat `key = value` config file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset, e.g. ex3_cir.
    #[arg(long)]
    preset: Option<String>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl Source {
    fn load(&self) -> Result<Experiment> {
        let mut exp = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
                driver::parse_config(&text)?
            }
            (None, Some(name)) => name.parse::<Preset>()?.experiment(),
            (None, None) => return Err(Error::InvalidArgument("give --config <path> or --preset <name>".into())),
        };
        if let Some(seed) = self.seed {
            exp.seed = seed;
        }
        Ok(exp)
    }
}

fn show(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", ")
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { source, out } => {
            let exp = source.load()?;
            let r = driver::cmd_run(&exp, &out)?;
            println!("{}: {} restarts, {:.3} s", exp.name, r.series.restarts.len(), r.wall_time);
            println!(
                "terminal mean [{}] variance [{}]",
                show(r.series.terminal_mean()),
                show(r.series.terminal_variance())
            );
            if let Some(k) = r.series.terminal_cumulants() {
                println!("terminal cumulants [{}]", show(&k));
            }
            if let Some(e) = &r.errors {
                println!("terminal eps_mean [{}] eps_var [{}]", show(e.terminal_mean()), show(e.terminal_variance()));
            }
            report(&out);
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { source, axis, values, out } => {
            let exp = source.load()?;
            let axis: SweepAxis = axis.parse()?;
            let rows = driver::cmd_sweep(&exp, axis, &values, &out)?;
            for r in &rows {
                match &r.error {
                    None => println!(
                        "{}={}: eps_mean [{}] eps_var [{}] {:.3} s",
                        axis.name(),
                        r.value,
                        show(&r.eps_mean),
                        show(&r.eps_var),
                        r.wall_time
                    ),
                    Some(msg) => println!("{}={}: failed: {msg}", axis.name(), r.value),
                }
            }
            report(&out);
            Ok(if rows.iter().any(|r| r.error.is_some()) { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Table { which, out } => {
            let kind: TableKind = which.parse()?;
            let t = driver::cmd_table(kind, &out)?;
            for r in &t.rows {
                println!("{:<18} {}", r.label, show(&r.values));
            }
            println!("wrote {}", t.path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Mc { source, samples, repeats, out } => {
            let mut exp = source.load()?;
            if let Some(s) = samples {
                exp.mc_samples = s;
            }
            if let Some(r) = repeats {
                exp.mc_repeats = r;
            }
            let mc = driver::cmd_mc(&exp, &out)?;
            let avg = mc.averaged();
            println!(
                "{}: {} x {} paths, terminal mean [{}] variance [{}]",
                exp.name,
                exp.mc_repeats,
                exp.mc_samples,
                show(avg.terminal_mean()),
                show(avg.terminal_variance())
            );
            report(&out);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn report(out: &Path) {
    println!("output in {}", out.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(driver::exit_code(&e) as u8)
        }
    }
}
