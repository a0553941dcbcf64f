//! Implementations of the CLI subcommands.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    group_membership, score_histogram, ternary_coordinates, volume_fractions, GroupReport,
    VolumeShares,
};
use crate::config::RunConfig;
use crate::dynamics::{Currency, CurrencyConfig, Dynamics, Weights};
use crate::ensemble::{run_ensemble, EnsembleResult};
use crate::error::{Error, Result};
use crate::output::{digest_file, Cell, Format, RunManifest, Table};
use crate::svg::{render_ternary, TernaryRow};
use crate::synth::{synthetic_wtn, BlockSpec};
use crate::wtn::{self, FlowRecord, FlowStatistics, IngestReport, TradeMatrix};

/// A year of data bound to a configuration, ready to simulate.
pub struct Prepared {
    pub matrix: TradeMatrix,
    pub stats: FlowStatistics,
    pub currencies: CurrencyConfig,
    pub seeds: Vec<Option<Currency>>,
    pub weights: Weights,
    pub dynamics: Dynamics,
}

impl Prepared {
    pub fn new(matrix: TradeMatrix, config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let stats = FlowStatistics::new(&matrix);
        let currencies = config.currency_config();
        let seeds = currencies.bind_seeds(matrix.index())?;
        let weights = Weights::for_mode(&stats, config.weight_mode, config.rank_params())?;
        let dynamics = Dynamics::new(&stats, &weights, currencies.k())?;
        Ok(Self {
            matrix,
            stats,
            currencies,
            seeds,
            weights,
            dynamics,
        })
    }

    pub fn ensemble(&self, config: &RunConfig, workers: Option<usize>) -> Result<EnsembleResult> {
        let mut spec = config.ensemble_spec()?;
        spec.workers = workers;
        run_ensemble(&self.dynamics, &self.seeds, &spec)
    }

    pub fn groups(&self, prefs: &[Currency]) -> Result<GroupReport> {
        group_membership(
            prefs,
            &self.seeds,
            &self.stats,
            self.matrix.index(),
            &self.currencies.currencies,
        )
    }
}

/// Settings shared by the simulation subcommands.
#[derive(Clone, Debug)]
pub struct SimOptions {
    pub config: RunConfig,
    pub out: PathBuf,
    pub format: Format,
    pub workers: Option<usize>,
    pub strict: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub year: i32,
    pub countries: usize,
    pub total_volume: f64,
    pub records: usize,
    pub self_loops_dropped: usize,
    pub zero_trade_dropped: Vec<String>,
    pub dangling_exporters: Vec<String>,
    pub dangling_importers: Vec<String>,
}

impl ValidationReport {
    fn new(m: &TradeMatrix, ingest: &IngestReport) -> Self {
        let st = FlowStatistics::new(m);
        let codes = |v: &[usize]| v.iter().map(|&c| m.index().code(c).to_string()).collect();
        Self {
            year: m.year(),
            countries: m.len(),
            total_volume: m.total_volume(),
            records: ingest.records_for_year,
            self_loops_dropped: ingest.self_loops_dropped,
            zero_trade_dropped: ingest.zero_trade_dropped.clone(),
            dangling_exporters: codes(&st.dangling_exporters),
            dangling_importers: codes(&st.dangling_importers),
        }
    }

    pub fn render_text(&self) -> String {
        let list = |v: &[String]| {
            if v.is_empty() {
                "-".to_string()
            } else {
                v.join(",")
            }
        };
        format!(
            "year {}: N={} M={} records={} self_loops_dropped={} zero_trade_dropped={} dangling_exporters={} dangling_importers={}\n",
            self.year,
            self.countries,
            self.total_volume,
            self.records,
            self.self_loops_dropped,
            list(&self.zero_trade_dropped),
            list(&self.dangling_exporters),
            list(&self.dangling_importers),
        )
    }
}

/// Ingest the file and report on `year`, or on every year found.
pub fn cmd_validate(path: &Path, year: Option<i32>) -> Result<Vec<ValidationReport>> {
    let records = wtn::read_flow_file(path)?;
    let years = match year {
        Some(y) => vec![y],
        None => wtn::years(&records),
    };
    if years.is_empty() {
        return Err(Error::InvalidMatrix("flow file has no records".into()));
    }
    years
        .into_iter()
        .map(|y| {
            let (m, ingest) = wtn::load_trade_flows(&records, y)?;
            Ok(ValidationReport::new(&m, &ingest))
        })
        .collect()
}

fn load_year(path: &Path, year: i32) -> Result<TradeMatrix> {
    let records = wtn::read_flow_file(path)?;
    Ok(wtn::load_trade_flows(&records, year)?.0)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn strict_check(result: &EnsembleResult, strict: bool) -> Result<()> {
    let bad = result.non_converged_runs();
    if strict && bad > 0 {
        return Err(Error::RunsNotConverged {
            runs: bad,
            total: result.n_runs,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub year: i32,
    pub countries: usize,
    pub currencies: Vec<String>,
    pub mean_final_fractions: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub group_sizes: Vec<usize>,
    pub volume_shares: Vec<f64>,
    pub convergence_rate: f64,
    pub mean_tau: f64,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn render_text(&self) -> String {
        let mut s = format!(
            "year {} N={} runs converged {:.4} mean tau {:.3}\n",
            self.year, self.countries, self.convergence_rate, self.mean_tau
        );
        for (i, code) in self.currencies.iter().enumerate() {
            s.push_str(&format!(
                "  {code}: f_f={:.4} (se {:.4})",
                self.mean_final_fractions[i], self.standard_errors[i]
            ));
            if let (Some(g), Some(v)) = (self.group_sizes.get(i), self.volume_shares.get(i)) {
                s.push_str(&format!(" group={g} volume={v:.4}"));
            }
            s.push('\n');
        }
        s
    }
}

fn fraction_headers(prefix: &str, currencies: &[String]) -> Vec<String> {
    currencies.iter().map(|c| format!("{prefix}{c}")).collect()
}

fn score_cells(z: &crate::dynamics::ScoreVector) -> Vec<Cell> {
    if z.defined {
        z.z.iter().map(|v| Cell::Float(*v)).collect()
    } else {
        vec![Cell::Empty; z.z.len()]
    }
}

/// Full report for one year: ensemble statistics, modal TCP map, scores,
/// histograms, groups, trajectory and manifest.
pub fn cmd_run(flows: &Path, year: i32, opts: &SimOptions) -> Result<RunSummary> {
    let prepared = Prepared::new(load_year(flows, year)?, &opts.config)?;
    let mut manifest = RunManifest::new(
        "run",
        vec![year],
        vec![digest_file(flows)?],
        opts.config.clone(),
        opts.strict,
    );
    ensure_dir(&opts.out)?;
    let result = prepared.ensemble(&opts.config, opts.workers)?;
    let codes = &prepared.currencies.currencies;
    let k = codes.len();
    let index = prepared.matrix.index();
    let modal = result.modal_state(&prepared.seeds);
    let scores = ternary_coordinates(&modal, &prepared.dynamics);
    let groups = prepared.groups(&modal.prefs)?;
    let shares = volume_fractions(&groups, &prepared.matrix, opts.config.volume_share_mode);
    let mut files = Vec::new();

    let mut headers = vec!["country".to_string(), "tcp".to_string()];
    headers.extend(fraction_headers("z_", codes));
    let mut tcp = Table::new(headers);
    for c in 0..index.len() {
        let mut row: Vec<Cell> = vec![
            index.code(c).into(),
            codes[modal.prefs[c].id()].as_str().into(),
        ];
        row.extend(score_cells(&scores[c]));
        tcp.push(row);
    }
    files.push(tcp.write(&opts.out, "tcp_by_country", opts.format)?);

    files.push(
        fractions_table(&result, codes, Some((&groups, &shares))).write(
            &opts.out,
            "fractions",
            opts.format,
        )?,
    );

    let mut headers = vec![
        "country".to_string(),
        "tcp".to_string(),
        "defined".to_string(),
    ];
    headers.extend(fraction_headers("z_", codes));
    let mut ternary = Table::new(headers);
    for c in 0..index.len() {
        let mut row: Vec<Cell> = vec![
            index.code(c).into(),
            codes[modal.prefs[c].id()].as_str().into(),
            scores[c].defined.into(),
        ];
        row.extend(score_cells(&scores[c]));
        ternary.push(row);
    }
    files.push(ternary.write(&opts.out, "ternary", opts.format)?);
    if k == 3 {
        let rows: Vec<TernaryRow<'_>> = (0..index.len())
            .map(|c| TernaryRow {
                code: index.code(c),
                scores: &scores[c],
                tcp: modal.prefs[c],
            })
            .collect();
        let path = opts.out.join("ternary.svg");
        crate::output::write_file(&path, render_ternary(&rows, codes)?.as_bytes())?;
        files.push(path);
    }

    let hist = score_histogram(&scores, k, opts.config.bin_width)?;
    let mut table = Table::new(["currency", "bin_lo", "bin_hi", "fraction"]);
    for (j, code) in codes.iter().enumerate() {
        for (b, f) in hist.fractions[j].iter().enumerate() {
            table.push(vec![
                code.as_str().into(),
                (b as f64 / hist.bins as f64).into(),
                ((b + 1) as f64 / hist.bins as f64).into(),
                (*f).into(),
            ]);
        }
    }
    files.push(table.write(&opts.out, "histogram", opts.format)?);

    let mut table = Table::new([
        "currency",
        "rank",
        "country",
        "import_ability",
        "export_ability",
        "seed",
    ]);
    for g in &groups.groups {
        for (rank, m) in g.members.iter().enumerate() {
            table.push(vec![
                g.code.as_str().into(),
                (rank + 1).into(),
                m.code.as_str().into(),
                m.import_ability.into(),
                m.export_ability.into(),
                m.seed.into(),
            ]);
        }
    }
    files.push(table.write(&opts.out, "groups", opts.format)?);

    files.push(trajectory_table(&result, codes).write(&opts.out, "trajectory", opts.format)?);
    files.push(manifest.write(&opts.out)?);
    strict_check(&result, opts.strict)?;
    Ok(RunSummary {
        year,
        countries: index.len(),
        currencies: codes.clone(),
        mean_final_fractions: result.mean_final_fractions.clone(),
        standard_errors: result.standard_errors.clone(),
        group_sizes: groups.groups.iter().map(|g| g.size()).collect(),
        volume_shares: shares.group,
        convergence_rate: result.convergence_rate,
        mean_tau: result.mean_tau,
        files,
    })
}

fn fractions_table(
    result: &EnsembleResult,
    codes: &[String],
    groups: Option<(&GroupReport, &VolumeShares)>,
) -> Table {
    let mut headers = vec!["currency", "mean_fraction", "std_error"];
    if groups.is_some() {
        headers.extend([
            "group_size",
            "count_fraction",
            "volume_share",
            "seed_volume_share",
        ]);
    }
    let mut table = Table::new(headers);
    let n = result.per_country_frequency.len() as f64;
    for (j, code) in codes.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            code.as_str().into(),
            result.mean_final_fractions[j].into(),
            result.standard_errors[j].into(),
        ];
        if let Some((g, v)) = groups {
            let size = g.groups[j].size();
            row.extend([
                size.into(),
                (size as f64 / n).into(),
                v.group[j].into(),
                v.seed[j].into(),
            ]);
        }
        table.push(row);
    }
    table
}

fn trajectory_table(result: &EnsembleResult, codes: &[String]) -> Table {
    let mut headers = vec!["tau".to_string()];
    headers.extend(fraction_headers("f_", codes));
    let mut table = Table::new(headers);
    for (t, f) in result.mean_trajectory.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(f.iter().map(|v| Cell::Float(*v)));
        table.push(row);
    }
    table
}

/// Ensemble statistics only: mean fractions, per-country frequencies,
/// convergence and trajectory.
pub fn cmd_ensemble(
    flows: &Path,
    year: i32,
    opts: &SimOptions,
) -> Result<(RunSummary, EnsembleResult)> {
    let prepared = Prepared::new(load_year(flows, year)?, &opts.config)?;
    let mut manifest = RunManifest::new(
        "ensemble",
        vec![year],
        vec![digest_file(flows)?],
        opts.config.clone(),
        opts.strict,
    );
    ensure_dir(&opts.out)?;
    let result = prepared.ensemble(&opts.config, opts.workers)?;
    let codes = &prepared.currencies.currencies;
    let index = prepared.matrix.index();
    let mut files =
        vec![fractions_table(&result, codes, None).write(&opts.out, "fractions", opts.format)?];

    let mut headers = vec!["country".to_string(), "modal_tcp".to_string()];
    headers.extend(fraction_headers("freq_", codes));
    let mut table = Table::new(headers);
    for c in 0..index.len() {
        let mut row: Vec<Cell> = vec![
            index.code(c).into(),
            codes[result.modal_tcp[c].id()].as_str().into(),
        ];
        row.extend(
            result.per_country_frequency[c]
                .iter()
                .map(|v| Cell::Float(*v)),
        );
        table.push(row);
    }
    files.push(table.write(&opts.out, "frequency", opts.format)?);

    let mut table = Table::new([
        "runs",
        "convergence_rate",
        "mean_tau",
        "converged_within_10",
        "max_tau",
    ]);
    table.push(vec![
        result.n_runs.into(),
        result.convergence_rate.into(),
        result.mean_tau.into(),
        result.converged_within(10).into(),
        result.taus.iter().copied().max().unwrap_or(0).into(),
    ]);
    files.push(table.write(&opts.out, "convergence", opts.format)?);
    files.push(trajectory_table(&result, codes).write(&opts.out, "trajectory", opts.format)?);
    files.push(manifest.write(&opts.out)?);
    strict_check(&result, opts.strict)?;
    let summary = RunSummary {
        year,
        countries: index.len(),
        currencies: codes.clone(),
        mean_final_fractions: result.mean_final_fractions.clone(),
        standard_errors: result.standard_errors.clone(),
        group_sizes: Vec::new(),
        volume_shares: Vec::new(),
        convergence_rate: result.convergence_rate,
        mean_tau: result.mean_tau,
        files,
    };
    Ok((summary, result))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub year: i32,
    pub countries: usize,
    /// Modal group sizes over N.
    pub count_fractions: Vec<f64>,
    pub mean_fractions: Vec<f64>,
    pub volume_shares: Vec<f64>,
    pub seed_volume_shares: Vec<f64>,
    pub non_converged_runs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub skipped_years: Vec<i32>,
    pub files: Vec<PathBuf>,
}

/// One independent ensemble per year. Years in `years` without data are
/// skipped and reported.
pub fn cmd_sweep(
    files: &[PathBuf],
    years: Option<(i32, i32)>,
    opts: &SimOptions,
) -> Result<SweepSummary> {
    let mut records: Vec<FlowRecord> = Vec::new();
    let mut digests = Vec::new();
    for f in files {
        records.extend(wtn::read_flow_file(f)?);
        digests.push(digest_file(f)?);
    }
    let present = wtn::years(&records);
    let wanted: Vec<i32> = match years {
        Some((a, b)) => (a.min(b)..=a.max(b)).collect(),
        None => present.clone(),
    };
    let (run_years, skipped): (Vec<i32>, Vec<i32>) =
        wanted.into_iter().partition(|y| present.contains(y));
    if run_years.is_empty() {
        return Err(Error::InvalidMatrix("no requested year has data".into()));
    }
    let mut manifest = RunManifest::new(
        "sweep",
        run_years.clone(),
        digests,
        opts.config.clone(),
        opts.strict,
    );
    ensure_dir(&opts.out)?;

    let mut rows = Vec::new();
    let mut codes = Vec::new();
    for &year in &run_years {
        let (m, _) = wtn::load_trade_flows(&records, year)?;
        let prepared = Prepared::new(m, &opts.config)?;
        let result = prepared.ensemble(&opts.config, opts.workers)?;
        let groups = prepared.groups(&result.modal_tcp)?;
        let shares = volume_fractions(&groups, &prepared.matrix, opts.config.volume_share_mode);
        codes = prepared.currencies.currencies.clone();
        rows.push(SweepRow {
            year,
            countries: prepared.matrix.len(),
            count_fractions: groups
                .groups
                .iter()
                .map(|g| g.size() as f64 / prepared.matrix.len() as f64)
                .collect(),
            mean_fractions: result.mean_final_fractions.clone(),
            volume_shares: shares.group,
            seed_volume_shares: shares.seed,
            non_converged_runs: result.non_converged_runs(),
        });
    }

    let mut headers = vec!["year".to_string(), "countries".to_string()];
    headers.extend(fraction_headers("count_", &codes));
    headers.extend(fraction_headers("mean_", &codes));
    headers.extend(fraction_headers("volume_", &codes));
    headers.extend(fraction_headers("seed_volume_", &codes));
    let mut table = Table::new(headers);
    for r in &rows {
        let mut row: Vec<Cell> = vec![r.year.into(), r.countries.into()];
        for v in r
            .count_fractions
            .iter()
            .chain(&r.mean_fractions)
            .chain(&r.volume_shares)
            .chain(&r.seed_volume_shares)
        {
            row.push((*v).into());
        }
        table.push(row);
    }
    let mut out_files = vec![table.write(&opts.out, "sweep", opts.format)?];
    out_files.push(manifest.write(&opts.out)?);
    let bad: usize = rows.iter().map(|r| r.non_converged_runs).sum();
    if opts.strict && bad > 0 {
        return Err(Error::RunsNotConverged {
            runs: bad,
            total: rows.len() * opts.config.n_runs,
        });
    }
    Ok(SweepSummary {
        rows,
        skipped_years: skipped,
        files: out_files,
    })
}

/// Write a block-structured synthetic flow file.
pub fn cmd_synth(
    countries: usize,
    spec: &BlockSpec,
    seed: u64,
    year: i32,
    out: &Path,
) -> Result<TradeMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = synthetic_wtn(countries, spec, year, &mut rng)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    let file = std::fs::File::create(out).map_err(|e| Error::io(out, e))?;
    wtn::write_flow_csv(std::io::BufWriter::new(file), &m.to_records())?;
    Ok(m)
}
