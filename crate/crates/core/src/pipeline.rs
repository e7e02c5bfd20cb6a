//! End-to-end orchestration: configuration, the cleaning stages, emitted
//! tables and the run manifest.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::incidence::{binarize, compute_rca, prune_degenerate, IncidenceError, IncidenceMatrix, SpecializationMatrix};
use crate::ingest::{left_tail_filter, open_input, parse_long_records, pivot_to_matrix, IngestError, OutputMatrix};
use crate::relatedness::{proximity, relatedness_density};
use crate::report::{compare_vectors, emit_figure_data, ComparisonReport, LabeledVector, ReportError};
use crate::spectral::{eci_and_pci, extensive_scores, largest_component, method_of_reflections, ComplexityScores};
use crate::table::TableWriter;
use crate::{Error, Scalar, Side};

/// Pipeline stage, used to tag errors and drop records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Config,
    Ingest,
    LeftTail,
    Rca,
    Binarize,
    Prune,
    Component,
    Eci,
    Extensive,
    Reflections,
    Proximity,
    Density,
    Compare,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::LeftTail => "left-tail",
            Stage::Rca => "rca",
            Stage::Binarize => "binarize",
            Stage::Prune => "prune",
            Stage::Component => "component",
            Stage::Eci => "eci",
            Stage::Extensive => "extensive",
            Stage::Reflections => "reflections",
            Stage::Proximity => "proximity",
            Stage::Density => "density",
            Stage::Compare => "compare",
            Stage::Output => "output",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl PipelineError {
    pub fn new(stage: Stage, source: impl Into<Error>) -> Self {
        Self {
            stage,
            source: source.into(),
        }
    }
}

fn at<E: Into<Error>>(stage: Stage) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::new(stage, e)
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("{key}: invalid value {value:?}")]
    InvalidValue { key: String, value: String },
    #[error("no input path given")]
    MissingInput,
    #[error("{0} must be finite and >= 0")]
    NegativeThreshold(&'static str),
    #[error("rca_threshold must be finite and > 0")]
    NonPositiveRcaThreshold,
}

/// Which tables [`run_pipeline`] writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EmitFlags {
    pub matrix: bool,
    pub rca: bool,
    pub incidence: bool,
    pub margins: bool,
    pub eci: bool,
    pub pci: bool,
    pub extensive: bool,
    pub reflections: bool,
    pub proximity: bool,
    pub density: bool,
    pub compare: bool,
    pub figures: bool,
}

impl EmitFlags {
    pub const NAMES: [&'static str; 12] = [
        "matrix",
        "rca",
        "incidence",
        "margins",
        "eci",
        "pci",
        "extensive",
        "reflections",
        "proximity",
        "density",
        "compare",
        "figures",
    ];

    pub fn all() -> Self {
        Self::from_fn(|_| true)
    }

    pub fn none() -> Self {
        Self::from_fn(|_| false)
    }

    fn from_fn(f: impl Fn(&str) -> bool) -> Self {
        Self {
            matrix: f("matrix"),
            rca: f("rca"),
            incidence: f("incidence"),
            margins: f("margins"),
            eci: f("eci"),
            pci: f("pci"),
            extensive: f("extensive"),
            reflections: f("reflections"),
            proximity: f("proximity"),
            density: f("density"),
            compare: f("compare"),
            figures: f("figures"),
        }
    }

    /// Parses a comma- or space-separated list such as `eci, pci, figures`,
    /// or `all` / `none`.
    pub fn parse_list(text: &str) -> Result<Self, ConfigError> {
        let names: Vec<&str> = text.split([',', ' ']).map(str::trim).filter(|s| !s.is_empty()).collect();
        match names.as_slice() {
            ["all"] => return Ok(Self::all()),
            ["none"] => return Ok(Self::none()),
            _ => {}
        }
        if let Some(bad) = names.iter().find(|n| !Self::NAMES.contains(n)) {
            return Err(ConfigError::InvalidValue {
                key: "emit".into(),
                value: bad.to_string(),
            });
        }
        Ok(Self::from_fn(|n| names.contains(&n)))
    }
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub delimiter: char,
    pub min_location_total: f64,
    pub min_activity_total: f64,
    pub rca_threshold: f64,
    pub out_dir: PathBuf,
    /// Smallest proximity written to the edge list.
    pub min_phi: f64,
    /// Number of reflection steps.
    pub iterations: usize,
    pub emit: EmitFlags,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            delimiter: ',',
            min_location_total: 0.0,
            min_activity_total: 0.0,
            rca_threshold: 1.0,
            out_dir: PathBuf::from("out"),
            min_phi: 0.0,
            iterations: 20,
            emit: EmitFlags::all(),
        }
    }
}

pub fn parse_delimiter(value: &str) -> Option<char> {
    match value {
        "tab" | "\\t" | "\t" => Some('\t'),
        "comma" => Some(','),
        "semicolon" => Some(';'),
        "pipe" => Some('|'),
        _ => {
            let mut chars = value.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii() => Some(c),
                _ => None,
            }
        }
    }
}

impl PipelineConfig {
    /// Reads `key = value` lines on top of the defaults. Blank lines and
    /// lines starting with `#` are ignored; keys accept `-` or `_`.
    pub fn from_kv_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_kv_text(text)?;
        Ok(cfg)
    }

    pub fn apply_kv_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = || ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let number = |v: &str| v.trim().parse::<f64>().map_err(|_| invalid());
        match key.replace('-', "_").as_str() {
            "input" => self.input = PathBuf::from(value.trim()),
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "delimiter" => self.delimiter = parse_delimiter(value).ok_or_else(invalid)?,
            "min_location_total" => self.min_location_total = number(value)?,
            "min_activity_total" => self.min_activity_total = number(value)?,
            "rca_threshold" => self.rca_threshold = number(value)?,
            "min_phi" => self.min_phi = number(value)?,
            "iterations" => self.iterations = value.trim().parse().map_err(|_| invalid())?,
            "emit" => self.emit = EmitFlags::parse_list(value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.input.as_os_str().is_empty() {
            return Err(ConfigError::MissingInput);
        }
        let nonnegative = |v: f64| v.is_finite() && v >= 0.0;
        if !nonnegative(self.min_location_total) {
            return Err(ConfigError::NegativeThreshold("min_location_total"));
        }
        if !nonnegative(self.min_activity_total) {
            return Err(ConfigError::NegativeThreshold("min_activity_total"));
        }
        if !nonnegative(self.min_phi) {
            return Err(ConfigError::NegativeThreshold("min_phi"));
        }
        if !(self.rca_threshold.is_finite() && self.rca_threshold > 0.0) {
            return Err(ConfigError::NonPositiveRcaThreshold);
        }
        Ok(())
    }
}

/// A label removed before the spectral stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DropRecord {
    pub label: String,
    pub side: Side,
    pub stage: Stage,
    pub reason: String,
}

/// Every intermediate of the cleaning stages.
#[derive(Debug, Clone)]
pub struct Prepared<T> {
    pub records: usize,
    pub raw: OutputMatrix<T>,
    /// After the left-tail cut and removal of all-zero rows and columns.
    pub filtered: OutputMatrix<T>,
    pub rca: SpecializationMatrix<T>,
    /// Binarized, pruned, restricted to the largest connected component.
    pub incidence: IncidenceMatrix,
    pub components: usize,
    pub dropped: Vec<DropRecord>,
}

fn removed_labels<'a>(before: &'a [String], after: &[String]) -> Vec<&'a String> {
    let kept: HashSet<&String> = after.iter().collect();
    before.iter().filter(|l| !kept.contains(l)).collect()
}

fn record_drops(
    dropped: &mut Vec<DropRecord>,
    stage: Stage,
    reason: &str,
    before: (&[String], &[String]),
    after: (&[String], &[String]),
) {
    for (side, b, a) in [(Side::Location, before.0, after.0), (Side::Activity, before.1, after.1)] {
        dropped.extend(removed_labels(b, a).into_iter().map(|label| DropRecord {
            label: label.clone(),
            side,
            stage,
            reason: reason.to_string(),
        }));
    }
}

/// Output of the ingest and left-tail stages.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub records: usize,
    pub raw: OutputMatrix<T>,
    /// After the left-tail cut and removal of all-zero rows and columns.
    pub filtered: OutputMatrix<T>,
    pub dropped: Vec<DropRecord>,
}

/// Reads and pivots the input, then applies the left-tail cut.
pub fn load<T: Scalar>(cfg: &PipelineConfig) -> Result<Loaded<T>, PipelineError> {
    cfg.validate().map_err(at(Stage::Config))?;
    let reader = open_input(&cfg.input).map_err(at(Stage::Ingest))?;
    let records = parse_long_records::<T, _>(reader, cfg.delimiter).map_err(at(Stage::Ingest))?;
    if records.is_empty() {
        return Err(PipelineError::new(Stage::Ingest, IngestError::EmptyInput));
    }
    let raw = pivot_to_matrix(&records).map_err(at(Stage::Ingest))?;
    let mut dropped = Vec::new();

    let cut = left_tail_filter(&raw, T::lit(cfg.min_location_total), T::lit(cfg.min_activity_total))
        .map_err(at(Stage::LeftTail))?;
    record_drops(
        &mut dropped,
        Stage::LeftTail,
        "total output below the left-tail threshold",
        (raw.location_labels(), raw.activity_labels()),
        (cut.location_labels(), cut.activity_labels()),
    );
    let filtered = cut.without_empty_margins();
    record_drops(
        &mut dropped,
        Stage::LeftTail,
        "zero total output",
        (cut.location_labels(), cut.activity_labels()),
        (filtered.location_labels(), filtered.activity_labels()),
    );
    if filtered.is_empty() {
        return Err(PipelineError::new(Stage::LeftTail, IncidenceError::EmptyMatrix));
    }
    Ok(Loaded {
        records: records.len(),
        raw,
        filtered,
        dropped,
    })
}

/// Runs [`load`], RCA, binarization, pruning and the largest-component
/// restriction.
pub fn prepare<T: Scalar>(cfg: &PipelineConfig) -> Result<Prepared<T>, PipelineError> {
    let Loaded {
        records,
        raw,
        filtered,
        mut dropped,
    } = load::<T>(cfg)?;
    let rca = compute_rca(&filtered).map_err(at(Stage::Rca))?;
    let binary = binarize(&rca, T::lit(cfg.rca_threshold)).map_err(at(Stage::Binarize))?;
    let (pruned, report) = prune_degenerate(&binary).map_err(at(Stage::Prune))?;
    for r in report.removed {
        let reason = match r.side {
            Side::Location => format!("no activity with rca >= threshold (pass {})", r.pass),
            Side::Activity => format!("no location with rca >= threshold (pass {})", r.pass),
        };
        dropped.push(DropRecord {
            label: r.label,
            side: r.side,
            stage: Stage::Prune,
            reason,
        });
    }

    let (incidence, components) = largest_component(&pruned);
    dropped.extend(components.excluded.into_iter().map(|e| DropRecord {
        label: e.label,
        side: e.side,
        stage: Stage::Component,
        reason: "outside the largest connected component".into(),
    }));

    Ok(Prepared {
        records,
        raw,
        filtered,
        rca,
        incidence,
        components: components.components,
        dropped,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub residual: f64,
    pub multiplicity: f64,
    pub sign: f64,
    pub rca_threshold: f64,
    pub rca_threshold_inclusive: bool,
    pub min_phi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignRecord {
    pub score: &'static str,
    pub eigenvalue: f64,
    pub reference: crate::SignReference,
    pub correlation: f64,
}

impl SignRecord {
    fn from_scores<T: Scalar>(s: &ComplexityScores<T>) -> Self {
        Self {
            score: s.kind.name(),
            eigenvalue: s.eigenvalue.as_f64(),
            reference: s.sign.reference,
            correlation: s.sign.value.as_f64(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counts {
    pub records: usize,
    pub raw_locations: usize,
    pub raw_activities: usize,
    pub analyzed_locations: usize,
    pub analyzed_activities: usize,
    pub components: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedComparison {
    pub a: String,
    pub b: String,
    pub reason: String,
}

/// Machine-readable record of a run, written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp: u64,
    pub scalar: &'static str,
    pub config: PipelineConfig,
    pub counts: Counts,
    pub dropped: Vec<DropRecord>,
    pub tolerances: Tolerances,
    pub sign_conventions: Vec<SignRecord>,
    pub skipped_comparisons: Vec<SkippedComparison>,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
}

fn labeled_table<T: Scalar>(delimiter: char, header: [&str; 2], labels: &[String], values: &[T]) -> String {
    let mut w = TableWriter::new(delimiter);
    w.row(header);
    for (l, v) in labels.iter().zip(values) {
        w.row([l.clone(), v.to_string()]);
    }
    w.finish()
}

fn write_all(out_dir: &Path, files: &[(String, String)]) -> std::io::Result<Vec<PathBuf>> {
    let created_dir = !out_dir.exists();
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created_dir {
                let _ = fs::remove_dir(out_dir);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

/// [`run_pipeline_with`] in `f64`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    run_pipeline_with::<f64>(cfg)
}

/// Runs every stage, then writes the selected tables and `manifest.json` to
/// `cfg.out_dir`. Nothing is written unless every stage succeeds, and files
/// already written are removed if a later write fails.
pub fn run_pipeline_with<T: Scalar>(cfg: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    let prepared = prepare::<T>(cfg)?;
    let m = &prepared.incidence;
    let d = cfg.delimiter;
    let emit = cfg.emit;
    let mut files: Vec<(String, String)> = Vec::new();
    let mut signs = Vec::new();
    let mut skipped = Vec::new();

    if emit.matrix {
        files.push(("output_matrix.csv".into(), prepared.filtered.to_delimited(d)));
    }
    if emit.rca {
        files.push(("rca.csv".into(), prepared.rca.to_delimited(d)));
    }
    if emit.incidence {
        files.push(("incidence.csv".into(), m.to_delimited(d)));
    }
    let diversity = LabeledVector::<T>::from_counts("diversity", m.location_labels(), m.diversity());
    if emit.margins {
        files.push(("diversity.csv".into(), labeled_table(d, ["location", "diversity"], &diversity.labels, &diversity.values)));
        let ubiquity = LabeledVector::<T>::from_counts("ubiquity", m.activity_labels(), m.ubiquity());
        files.push(("ubiquity.csv".into(), labeled_table(d, ["activity", "ubiquity"], &ubiquity.labels, &ubiquity.values)));
    }

    let need_intensive = emit.eci || emit.pci || emit.compare || emit.figures;
    let need_extensive = emit.extensive || emit.compare || emit.figures;
    let intensive = if need_intensive {
        Some(eci_and_pci::<T>(m).map_err(at(Stage::Eci))?)
    } else {
        None
    };
    let extensive = if need_extensive {
        Some(extensive_scores::<T>(m).map_err(at(Stage::Extensive))?)
    } else {
        None
    };
    if let Some((eci, pci)) = &intensive {
        signs.push(SignRecord::from_scores(eci));
        signs.push(SignRecord::from_scores(pci));
        if emit.eci {
            files.push(("eci.csv".into(), eci.to_delimited(d)));
        }
        if emit.pci {
            files.push(("pci.csv".into(), pci.to_delimited(d)));
        }
    }
    if let Some(ext) = &extensive {
        signs.push(SignRecord::from_scores(&ext.first));
        signs.push(SignRecord::from_scores(&ext.second));
        if emit.extensive {
            files.push(("extensive_first.csv".into(), ext.first.to_delimited(d)));
            files.push(("extensive_second.csv".into(), ext.second.to_delimited(d)));
            files.push(("extensive_eigenvalues.csv".into(), ext.solution.to_delimited(d)));
        }
    }
    if emit.reflections {
        let t = method_of_reflections::<T>(m, cfg.iterations).map_err(at(Stage::Reflections))?;
        files.push(("reflections.csv".into(), t.to_delimited(d)));
    }
    if emit.proximity || emit.density {
        let phi = proximity::<T>(m).map_err(at(Stage::Proximity))?;
        if emit.proximity {
            files.push(("proximity.csv".into(), phi.to_delimited(d)));
            files.push(("proximity_edges.csv".into(), phi.edge_list(d, T::lit(cfg.min_phi))));
        }
        if emit.density {
            let omega = relatedness_density(m, &phi).map_err(at(Stage::Density))?;
            files.push(("density.csv".into(), omega.to_delimited(d)));
        }
    }
    if let (Some((eci, _)), Some(ext)) = (&intensive, &extensive) {
        if emit.compare {
            let first = LabeledVector::from(&ext.first);
            let second = LabeledVector::from(&ext.second);
            let eci = LabeledVector::from(eci);
            let pairs = [(&first, &diversity), (&second, &diversity), (&eci, &diversity), (&eci, &second)];
            let mut reports: Vec<ComparisonReport> = Vec::new();
            for (a, b) in pairs {
                match compare_vectors(a, b) {
                    Ok(r) => reports.push(r),
                    Err(e @ (ReportError::InsufficientOverlap { .. } | ReportError::ZeroVariance(_))) => {
                        skipped.push(SkippedComparison {
                            a: a.name.clone(),
                            b: b.name.clone(),
                            reason: e.to_string(),
                        })
                    }
                    Err(e) => return Err(PipelineError::new(Stage::Compare, e)),
                }
            }
            files.push(("comparisons.csv".into(), ComparisonReport::to_delimited(&reports, d)));
        }
        if emit.figures {
            files.extend(emit_figure_data(&diversity, &[&ext.first, &ext.second, eci], d));
        }
    }

    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|t| t.as_secs()).unwrap_or(0);
    let mut outputs: Vec<String> = files.iter().map(|(n, _)| n.clone()).collect();
    outputs.push(MANIFEST_FILE.into());
    let manifest = Manifest {
        tool: "ecomplexity",
        version: env!("CARGO_PKG_VERSION"),
        timestamp,
        scalar: std::any::type_name::<T>(),
        config: cfg.clone(),
        counts: Counts {
            records: prepared.records,
            raw_locations: prepared.raw.location_labels().len(),
            raw_activities: prepared.raw.activity_labels().len(),
            analyzed_locations: m.num_locations(),
            analyzed_activities: m.num_activities(),
            components: prepared.components,
        },
        dropped: prepared.dropped,
        tolerances: Tolerances {
            residual: T::RESIDUAL_TOL.as_f64(),
            multiplicity: T::MULTIPLICITY_TOL.as_f64(),
            sign: T::SIGN_TOL.as_f64(),
            rca_threshold: cfg.rca_threshold,
            rca_threshold_inclusive: true,
            min_phi: cfg.min_phi,
        },
        sign_conventions: signs,
        skipped_comparisons: skipped,
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    files.push((MANIFEST_FILE.into(), json));
    let written = write_all(&cfg.out_dir, &files).map_err(at(Stage::Output))?;
    Ok(RunSummary {
        out_dir: cfg.out_dir.clone(),
        files: written,
        manifest,
    })
}
