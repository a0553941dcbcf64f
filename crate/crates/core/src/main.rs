use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tradecurrency::commands::{self, SimOptions};
use tradecurrency::config::RunConfig;
use tradecurrency::output::{Format, RunManifest};
use tradecurrency::synth::BlockSpec;
use tradecurrency::{Error, Result, WeightMode};

#[derive(Parser)]
#[command(
    name = "tradecurrency",
    version,
    about = "Trade currency preference simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a flow file and report N, M, dangling countries and dropped rows.
    Validate {
        file: PathBuf,
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Ensemble simulation of one year with the full report set.
    Run(SimArgs),
    /// Ensemble statistics of one year.
    Ensemble(SimArgs),
    /// One ensemble per year across several flow files.
    Sweep {
        files: Vec<PathBuf>,
        /// Inclusive year range, e.g. 2010-2020.
        #[arg(long, value_parser = parse_years)]
        years: Option<(i32, i32)>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a block-structured synthetic flow file.
    Synth {
        #[arg(long, default_value_t = 200)]
        countries: usize,
        #[arg(long, default_value_t = 3)]
        blocks: usize,
        #[arg(long, default_value_t = 1.0)]
        internal: f64,
        #[arg(long, default_value_t = 0.1)]
        external: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2019)]
        year: i32,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SimArgs {
    /// Flow CSV (not needed with --manifest).
    file: Option<PathBuf>,
    #[arg(long)]
    year: Option<i32>,
    /// Re-run exactly what a previous manifest describes.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    weight_mode: Option<WeightMode>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for the ensemble; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Exit with code 3 if any run fails to reach a fixed point.
    #[arg(long)]
    strict: bool,
}

fn parse_years(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let a = a
        .trim()
        .parse()
        .map_err(|_| format!("bad year range {s}"))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| format!("bad year range {s}"))?;
    Ok((a, b))
}

impl CommonArgs {
    fn options(&self) -> Result<SimOptions> {
        let mut config = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        if let Some(r) = self.runs {
            config.n_runs = r;
        }
        if let Some(w) = self.weight_mode {
            config.weight_mode = w;
        }
        config.validate()?;
        Ok(SimOptions {
            config,
            out: self.out.clone(),
            format: self.format,
            workers: self.workers,
            strict: self.strict,
        })
    }
}

impl SimArgs {
    fn resolve(&self, command: &str) -> Result<(PathBuf, i32, SimOptions)> {
        let mut opts = self.common.options()?;
        if let Some(path) = &self.manifest {
            let manifest = RunManifest::load(path)?;
            if manifest.command != command
                || manifest.inputs.len() != 1
                || manifest.years.len() != 1
            {
                return Err(Error::Config(format!(
                    "{} is not a `{command}` manifest",
                    path.display()
                )));
            }
            manifest.verify_inputs()?;
            opts.config = manifest.config;
            opts.config.validate()?;
            opts.strict = manifest.strict;
            return Ok((
                PathBuf::from(&manifest.inputs[0].path),
                manifest.years[0],
                opts,
            ));
        }
        let file = self
            .file
            .clone()
            .ok_or_else(|| Error::InvalidParameter("a flow file is required".into()))?;
        let year = self
            .year
            .ok_or_else(|| Error::InvalidParameter("--year is required".into()))?;
        Ok((file, year, opts))
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { file, year, format } => {
            let reports = commands::cmd_validate(&file, year)?;
            match format {
                Format::Json => print_json(&reports),
                Format::Csv => reports.iter().for_each(|r| print!("{}", r.render_text())),
            }
        }
        Command::Run(args) => {
            let (file, year, opts) = args.resolve("run")?;
            let summary = commands::cmd_run(&file, year, &opts)?;
            report(&summary, opts.format);
        }
        Command::Ensemble(args) => {
            let (file, year, opts) = args.resolve("ensemble")?;
            let (summary, _) = commands::cmd_ensemble(&file, year, &opts)?;
            report(&summary, opts.format);
        }
        Command::Sweep {
            files,
            years,
            common,
        } => {
            if files.is_empty() {
                return Err(Error::InvalidParameter(
                    "at least one flow file is required".into(),
                ));
            }
            let opts = common.options()?;
            let summary = commands::cmd_sweep(&files, years, &opts)?;
            for y in &summary.skipped_years {
                eprintln!("warning: no data for year {y}, skipped");
            }
            match opts.format {
                Format::Json => print_json(&summary),
                Format::Csv => {
                    for r in &summary.rows {
                        println!(
                            "{} N={} counts={:?} volumes={:?}",
                            r.year, r.countries, r.count_fractions, r.volume_shares
                        );
                    }
                }
            }
        }
        Command::Synth {
            countries,
            blocks,
            internal,
            external,
            seed,
            year,
            out,
        } => {
            let spec = BlockSpec::uniform(blocks, internal, external);
            let m = commands::cmd_synth(countries, &spec, seed, year, &out)?;
            println!(
                "wrote {} ({} countries, M={})",
                display(&out),
                m.len(),
                m.total_volume()
            );
        }
    }
    Ok(())
}

fn report(summary: &commands::RunSummary, format: Format) {
    match format {
        Format::Json => print_json(summary),
        Format::Csv => print!("{}", summary.render_text()),
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
