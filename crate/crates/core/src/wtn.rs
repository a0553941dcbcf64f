//! Bilateral flow ingestion, the money matrix and its derived share matrices.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::country::{is_known_code, CountryIndex};
use crate::error::{Error, Result};

/// One row of a flow file: `value` USD exported from `exporter` to `importer`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub year: i32,
    pub exporter: String,
    pub importer: String,
    pub value: f64,
    /// 1-based line number in the source file (header is line 1), 0 if synthetic.
    #[serde(skip)]
    pub line: u64,
}

impl FlowRecord {
    pub fn new(year: i32, exporter: &str, importer: &str, value: f64) -> Self {
        Self {
            year,
            exporter: exporter.to_string(),
            importer: importer.to_string(),
            value,
            line: 0,
        }
    }
}

#[derive(Deserialize)]
struct CsvRow {
    year: i32,
    exporter: String,
    importer: String,
    value_usd: f64,
}

pub const FLOW_HEADER: [&str; 4] = ["year", "exporter", "importer", "value_usd"];

/// Parse a flow CSV with header `year,exporter,importer,value_usd`.
pub fn read_flow_csv<R: Read>(reader: R) -> Result<Vec<FlowRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::MalformedRecord {
        line: 1,
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != FLOW_HEADER {
        return Err(Error::MalformedRecord {
            line: 1,
            message: format!("expected header `{}`", FLOW_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<CsvRow>() {
        let row = row.map_err(|e| Error::MalformedRecord {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        out.push(FlowRecord {
            year: row.year,
            exporter: row.exporter,
            importer: row.importer,
            value: row.value_usd,
            line: out.len() as u64 + 2,
        });
    }
    Ok(out)
}

pub fn read_flow_file(path: impl AsRef<Path>) -> Result<Vec<FlowRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_flow_csv(std::io::BufReader::new(file))
}

pub fn write_flow_csv<W: std::io::Write>(writer: W, records: &[FlowRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::Io {
        path: "<flow output>".into(),
        source: std::io::Error::other(e),
    };
    wtr.write_record(FLOW_HEADER).map_err(map)?;
    for r in records {
        wtr.write_record([
            r.year.to_string(),
            r.exporter.clone(),
            r.importer.clone(),
            r.value.to_string(),
        ])
        .map_err(map)?;
    }
    wtr.flush().map_err(|e| Error::io("<flow output>", e))
}

/// Ingest bookkeeping reported by `validate`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub records_for_year: usize,
    pub self_loops_dropped: usize,
    /// Countries appearing only in zero-valued records for the year.
    pub zero_trade_dropped: Vec<String>,
}

/// Dense N x N money matrix. Entry (c, c') is the export from c' to c.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeMatrix {
    year: i32,
    index: CountryIndex,
    flows: Vec<f64>,
}

impl TradeMatrix {
    /// Build from a row-major importer x exporter array. The diagonal is
    /// zeroed.
    pub fn from_dense(year: i32, index: CountryIndex, mut flows: Vec<f64>) -> Result<Self> {
        let n = index.len();
        if flows.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for {n} countries, got {}",
                n * n,
                flows.len()
            )));
        }
        if let Some(v) = flows.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidMatrix(format!(
                "flow entry {v} is not a nonnegative number"
            )));
        }
        for c in 0..n {
            flows[c * n + c] = 0.0;
        }
        if !flows.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidMatrix("matrix has no positive flow".into()));
        }
        Ok(Self { year, index, flows })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn index(&self) -> &CountryIndex {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// M_{importer, exporter}.
    pub fn flow(&self, importer: usize, exporter: usize) -> f64 {
        self.flows[importer * self.len() + exporter]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flows
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale factor {factor} must be positive"
            )));
        }
        Self::from_dense(
            self.year,
            self.index.clone(),
            self.flows.iter().map(|v| v * factor).collect(),
        )
    }

    /// M_c: row sums.
    pub fn total_imports(&self) -> Vec<f64> {
        let n = self.len();
        self.flows.chunks(n).map(|row| row.iter().sum()).collect()
    }

    /// M*_c: column sums.
    pub fn total_exports(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        for row in self.flows.chunks(n) {
            for (acc, v) in out.iter_mut().zip(row) {
                *acc += v;
            }
        }
        out
    }

    /// M, the sum of all entries.
    pub fn total_volume(&self) -> f64 {
        self.total_imports().iter().sum()
    }

    /// Flow records with positive value, sorted by exporter then importer.
    pub fn to_records(&self) -> Vec<FlowRecord> {
        let n = self.len();
        let mut out = Vec::new();
        for e in 0..n {
            for i in 0..n {
                let v = self.flow(i, e);
                if v > 0.0 {
                    out.push(FlowRecord::new(
                        self.year,
                        self.index.code(e),
                        self.index.code(i),
                        v,
                    ));
                }
            }
        }
        out.sort_by(|a, b| (&a.exporter, &a.importer).cmp(&(&b.exporter, &b.importer)));
        out
    }
}

/// Aggregate the records of `year` into a money matrix.
///
/// Every record is validated (negative values and unknown codes fail even
/// outside the requested year). Self-loops are dropped and counted, countries
/// with no positive flow in the year are excluded from the index.
pub fn load_trade_flows(records: &[FlowRecord], year: i32) -> Result<(TradeMatrix, IngestReport)> {
    for r in records {
        for code in [&r.exporter, &r.importer] {
            if !is_known_code(code) {
                return Err(Error::UnknownCountry {
                    line: r.line,
                    code: code.clone(),
                });
            }
        }
        if !r.value.is_finite() {
            return Err(Error::MalformedRecord {
                line: r.line,
                message: format!("non-finite value {}", r.value),
            });
        }
        if r.value < 0.0 {
            return Err(Error::NegativeValue {
                line: r.line,
                value: r.value,
            });
        }
    }

    let mut report = IngestReport::default();
    let mut pairs: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
    let mut mentioned: BTreeSet<&str> = BTreeSet::new();
    for r in records.iter().filter(|r| r.year == year) {
        report.records_for_year += 1;
        if r.exporter == r.importer {
            report.self_loops_dropped += 1;
            continue;
        }
        mentioned.insert(&r.exporter);
        mentioned.insert(&r.importer);
        pairs
            .entry((r.exporter.as_str(), r.importer.as_str()))
            .or_default()
            .push(r.value);
    }

    // Sum each pair over its values sorted, so the result does not depend on row order.
    let mut totals: Vec<((&str, &str), f64)> = Vec::with_capacity(pairs.len());
    let mut active: BTreeSet<&str> = BTreeSet::new();
    for (key, mut values) in pairs {
        values.sort_by(f64::total_cmp);
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            active.insert(key.0);
            active.insert(key.1);
            totals.push((key, total));
        }
    }
    if active.is_empty() {
        return Err(Error::NoDataForYear(year));
    }
    report.zero_trade_dropped = mentioned
        .difference(&active)
        .map(|s| s.to_string())
        .collect();

    let index = CountryIndex::new(active.iter().copied())?;
    let n = index.len();
    let mut flows = vec![0.0; n * n];
    for ((exporter, importer), total) in totals {
        let e = index.position(exporter).expect("active exporter");
        let i = index.position(importer).expect("active importer");
        flows[i * n + e] = total;
    }
    Ok((TradeMatrix::from_dense(year, index, flows)?, report))
}

/// Years present in a record stream, ascending.
pub fn years(records: &[FlowRecord]) -> Vec<i32> {
    records
        .iter()
        .map(|r| r.year)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Import/export share matrices and trade abilities of one money matrix.
#[derive(Clone, Debug)]
pub struct FlowStatistics {
    n: usize,
    /// S_{cc'} = M_{cc'} / M*_{c'}, row-major.
    import_share: Vec<f64>,
    /// S*_{cc'} = M_{c'c} / M_{c'}, row-major.
    export_share: Vec<f64>,
    pub imports: Vec<f64>,
    pub exports: Vec<f64>,
    /// P_c = M_c / M.
    pub import_ability: Vec<f64>,
    /// P*_c = M*_c / M.
    pub export_ability: Vec<f64>,
    pub total_volume: f64,
    /// Countries with M*_c = 0; their S column is zero.
    pub dangling_exporters: Vec<usize>,
    /// Countries with M_c = 0; their S* column is zero.
    pub dangling_importers: Vec<usize>,
}

impl FlowStatistics {
    pub fn new(m: &TradeMatrix) -> Self {
        let n = m.len();
        let imports = m.total_imports();
        let exports = m.total_exports();
        let total_volume: f64 = imports.iter().sum();
        let mut import_share = vec![0.0; n * n];
        let mut export_share = vec![0.0; n * n];
        for c in 0..n {
            for cp in 0..n {
                if exports[cp] > 0.0 {
                    import_share[c * n + cp] = m.flow(c, cp) / exports[cp];
                }
                if imports[cp] > 0.0 {
                    export_share[c * n + cp] = m.flow(cp, c) / imports[cp];
                }
            }
        }
        let import_ability = imports.iter().map(|v| v / total_volume).collect();
        let export_ability = exports.iter().map(|v| v / total_volume).collect();
        let dangling_exporters = (0..n).filter(|&c| exports[c] == 0.0).collect();
        let dangling_importers = (0..n).filter(|&c| imports[c] == 0.0).collect();
        Self {
            n,
            import_share,
            export_share,
            imports,
            exports,
            import_ability,
            export_ability,
            total_volume,
            dangling_exporters,
            dangling_importers,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// S_{cc'}: share of c' exports going to c.
    pub fn s(&self, c: usize, cp: usize) -> f64 {
        self.import_share[c * self.n + cp]
    }

    /// S*_{cc'}: share of c' imports coming from c.
    pub fn s_star(&self, c: usize, cp: usize) -> f64 {
        self.export_share[c * self.n + cp]
    }

    pub fn import_share(&self) -> &[f64] {
        &self.import_share
    }

    pub fn export_share(&self) -> &[f64] {
        &self.export_share
    }
}

pub fn flow_statistics(m: &TradeMatrix) -> FlowStatistics {
    FlowStatistics::new(m)
}
