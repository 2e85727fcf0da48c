use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use rnndcor_cli::config::ExperimentConfig;
use rnndcor_cli::experiment::{self, SweepAxes};

/// Distance-correlation analysis of Elman RNN hidden layers.
///
/// Every command reads an optional JSON config and then applies overrides of
/// the form `--dotted.name value`, e.g. `--rnn.hidden 128` or
/// `--process.form standard`. Short aliases: --process, --coeffs, --order,
/// --len, --seed, --out, --window, --hidden, --epochs, --activation, --lr,
/// --dropout. Output goes to `output_dir`, else $RNNDCOR_OUT, else
/// ./rnndcor-out.
#[derive(Parser)]
#[command(name = "rnndcor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config overrides, `--dotted.name value` or `--dotted.name=value`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

/// Removes `--name value` / `--name=value` from `args`, which clap leaves
/// there when the flag follows the first override.
fn take_flag(args: &mut Vec<String>, name: &str) -> Vec<String> {
    let flag = format!("--{name}");
    let mut found = Vec::new();
    let mut i = 0;
    while i < args.len() {
        if args[i] == flag && i + 1 < args.len() {
            found.push(args.remove(i + 1));
            args.remove(i);
        } else if let Some(v) = args[i].strip_prefix(&format!("{flag}=")) {
            found.push(v.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    found
}

impl Common {
    fn take_config(&mut self) {
        if let Some(p) = take_flag(&mut self.overrides, "config").pop() {
            self.config = Some(PathBuf::from(p));
        }
    }

    fn resolve(&mut self) -> Result<ExperimentConfig> {
        self.take_config();
        let base = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let c = base.with_overrides(&self.overrides)?;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic series (series.csv + series.json)
    Generate(Common),
    /// Train one model and write its summary, profile and forecast
    Run(Common),
    /// Run `runs` seeds and aggregate them
    Simulate(Common),
    /// Compare the layers of two models trained on the same series.
    /// Overrides starting with `--b.` apply to the second model only.
    Heatmap {
        /// Config of the second model (defaults to the first)
        #[arg(long = "config-b")]
        config_b: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate every combination of the given axes
    Sweep {
        /// Axis such as `hidden=64,128`, `lr=0.001`, `dropout=0.2`,
        /// `window=10,20` or `activation=relu,tanh`; repeatable
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a summary table from simulation outputs
    Report {
        /// Directories holding aggregate.json (searched one level deep) or
        /// the files themselves
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Also write the table to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn split_b(overrides: &[String]) -> (Vec<String>, Vec<String>) {
    let mut shared = Vec::new();
    let mut only_b = Vec::new();
    let mut it = overrides.iter().peekable();
    while let Some(a) = it.next() {
        let target = if a.starts_with("--b.") { &mut only_b } else { &mut shared };
        let flag = a.strip_prefix("--b.").map_or(a.clone(), |rest| format!("--{rest}"));
        let has_value = flag.contains('=');
        target.push(flag);
        if !has_value {
            if let Some(v) = it.next() {
                target.push(v.clone());
            }
        }
    }
    (shared, only_b)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(mut c) => {
            let config = c.resolve()?;
            let dir = experiment::output_dir(&config);
            let s = experiment::write_generate(&config, &dir)?;
            println!("wrote {} points to {}", s.len(), dir.join("series.csv").display());
        }
        Command::Run(mut c) => {
            let config = c.resolve()?;
            let dir = experiment::output_dir(&config);
            let outcome = experiment::run_once(&config, 0)?;
            experiment::write_run(&outcome, &dir)?;
            let s = &outcome.summary;
            println!(
                "{}: MSE {:.4}  max r {:.3} (layer {})  final r {:.3}  change {}%  -> {}",
                outcome.label,
                s.mse,
                s.max_r,
                s.max_layer,
                s.final_r,
                s.info_loss_rounded,
                dir.display()
            );
        }
        Command::Simulate(mut c) => {
            let config = c.resolve()?;
            let dir = experiment::output_dir(&config);
            let sim = experiment::simulate(&config)?;
            experiment::write_simulation(&sim, &dir)?;
            for f in &sim.failures {
                eprintln!("run {} (seed {}) failed: {}", f.run, f.seed, f.error);
            }
            println!("{}", experiment::TABLE_HEADER);
            println!("{}", experiment::table_row(&sim.label, &sim.aggregate, 3));
        }
        Command::Heatmap { mut config_b, mut common } => {
            common.take_config();
            if let Some(p) = take_flag(&mut common.overrides, "config-b").pop() {
                config_b = Some(PathBuf::from(p));
            }
            let (shared, only_b) = split_b(&common.overrides);
            let base_a = match &common.config {
                Some(p) => ExperimentConfig::from_file(p)?,
                None => ExperimentConfig::default(),
            };
            let a = base_a.with_overrides(&shared)?;
            let b = match &config_b {
                Some(p) => ExperimentConfig::from_file(p)?.with_overrides(&shared)?,
                None => a.clone(),
            }
            .with_overrides(&only_b)?;
            let dir = experiment::output_dir(&a);
            let h = experiment::heatmap(&a, &b)?;
            experiment::write_heatmap(&h, &dir)?;
            println!(
                "{} x {} grid over {} aligned samples -> {}",
                h.grid.grid.nrows(),
                h.grid.grid.ncols(),
                h.samples,
                dir.display()
            );
        }
        Command::Sweep { mut axes, mut common } => {
            axes.extend(take_flag(&mut common.overrides, "axis"));
            let config = common.resolve()?;
            let mut parsed = SweepAxes::default();
            for spec in &axes {
                parsed.push_spec(spec)?;
            }
            let dir = experiment::output_dir(&config);
            let rows = experiment::sweep(&config, &parsed)?;
            experiment::write_sweep(&rows, &dir)?;
            println!("{}", experiment::TABLE_HEADER);
            for (i, row) in rows.iter().enumerate() {
                let c = &row.config.rnn;
                let label = format!(
                    "{} b={} lr={} dropout={} T={} {:?}",
                    row.config.process.label(),
                    c.hidden,
                    c.learning_rate,
                    c.dropout_final,
                    c.window,
                    c.activation
                );
                match &row.result {
                    Ok(sim) => println!("{}", experiment::table_row(&label, &sim.aggregate, 3)),
                    Err(e) => eprintln!("variant {i} ({label}) failed: {e}"),
                }
            }
        }
        Command::Report { paths, out } => {
            let table = experiment::report(&paths)?;
            print!("{table}");
            if let Some(p) = out {
                std::fs::write(&p, &table).with_context(|| format!("cannot write {}", p.display()))?;
            }
        }
    }
    Ok(())
}

/// 2 for bad input, 1 for numerical or runtime failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<rnndcor::Error>()) {
        Some(e) if !e.is_user_error() => 1,
        Some(_) => 2,
        None if err.chain().any(|e| e.is::<std::io::Error>()) => 1,
        None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
