use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ecomplexity::incidence::compute_rca;
use ecomplexity::pipeline::{self, parse_delimiter, PipelineConfig, PipelineError, Stage};
use ecomplexity::report::{compare_vectors, read_score_file, ComparisonReport};
use ecomplexity::{
    eci_and_pci, extensive_scores, generate_nested_world, generate_random_world, method_of_reflections, proximity,
    relatedness_density, world_to_incidence, RandomWorldParams,
};

#[derive(Parser)]
#[command(name = "ecomplexity", version, about = "Economic complexity indices from location x activity data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pivot long-format records into an output matrix (after the left-tail cut)
    Ingest(Common),
    /// Revealed comparative advantage matrix
    Rca(Common),
    /// Binary incidence matrix after pruning, restricted to the largest component
    Incidence(Common),
    /// Economic Complexity Index of every location
    Eci(Common),
    /// Product Complexity Index of every activity
    Pci(Common),
    /// First and second eigenvectors of the extensive similarity matrix
    Extensive(Common),
    /// Method of reflections trajectory
    Reflections(Common),
    /// Activity-activity proximity matrix and edge list
    Proximity(Common),
    /// Relatedness density of every location-activity pair
    Density(Common),
    /// Generate a synthetic alphabet economy
    World(WorldArgs),
    /// Compare two score files
    Compare(CompareArgs),
    /// Run the whole pipeline and write every table plus a manifest
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Long-format `location, activity, value` file (`.gz` accepted)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Field delimiter: a single character, or `tab`
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long)]
    min_location_total: Option<f64>,
    #[arg(long)]
    min_activity_total: Option<f64>,
    #[arg(long)]
    rca_threshold: Option<f64>,
    /// Write tables here instead of standard output
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Smallest proximity kept in the edge list
    #[arg(long)]
    min_phi: Option<f64>,
    /// Number of reflection steps
    #[arg(long)]
    iterations: Option<usize>,
    /// `key = value` configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Tables written by `run`, e.g. `eci,pci,density` (default: all)
    #[arg(long)]
    emit: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WorldMode {
    Nested,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum WorldFormat {
    /// Plain-text endowments and requirements
    World,
    /// Binary incidence matrix
    Incidence,
}

#[derive(Args)]
struct WorldArgs {
    #[arg(long, value_enum, default_value = "nested")]
    mode: WorldMode,
    #[arg(long, default_value_t = 10)]
    locations: usize,
    #[arg(long, default_value_t = 10)]
    activities: usize,
    /// Alphabet size (random mode)
    #[arg(long, default_value_t = 26)]
    alphabet: usize,
    /// Letters held by every location (random mode)
    #[arg(long, default_value_t = 8)]
    letters_per_location: usize,
    /// Letters required by every activity (random mode)
    #[arg(long, default_value_t = 3)]
    letters_per_word: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "world")]
    format: WorldFormat,
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Score file (`label, ...`; the `standardized` column is used when present)
    a: PathBuf,
    b: PathBuf,
    #[arg(long)]
    delimiter: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

struct Failure {
    stage: String,
    message: String,
}

impl Failure {
    fn new(stage: impl Into<String>, message: impl ToString) -> Self {
        Self {
            stage: stage.into(),
            message: message.to_string(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::new(e.stage.name(), e.source)
    }
}

type Outcome = Result<(), Failure>;

fn delimiter_arg(value: Option<&str>) -> Result<Option<char>, Failure> {
    value
        .map(|v| parse_delimiter(v).ok_or_else(|| Failure::new("config", format!("invalid delimiter {v:?}"))))
        .transpose()
}

fn build_config(args: &Common) -> Result<PipelineConfig, Failure> {
    let config_err = |e: pipeline::ConfigError| Failure::new(Stage::Config.name(), e);
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| Failure::new("config", format!("{}: {e}", path.display())))?;
        cfg.apply_kv_text(&text).map_err(config_err)?;
    }
    if let Some(v) = &args.input {
        cfg.input = v.clone();
    }
    if let Some(d) = delimiter_arg(args.delimiter.as_deref())? {
        cfg.delimiter = d;
    }
    if let Some(v) = args.min_location_total {
        cfg.min_location_total = v;
    }
    if let Some(v) = args.min_activity_total {
        cfg.min_activity_total = v;
    }
    if let Some(v) = args.rca_threshold {
        cfg.rca_threshold = v;
    }
    if let Some(v) = &args.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = args.min_phi {
        cfg.min_phi = v;
    }
    if let Some(v) = args.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = &args.emit {
        cfg.emit = pipeline::EmitFlags::parse_list(v).map_err(config_err)?;
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

/// Writes each table to `out_dir/name`, or all of them to standard output
/// separated by blank lines.
fn emit(out_dir: Option<&Path>, tables: &[(&str, String)]) -> Outcome {
    let out = |e: io::Error| Failure::new(Stage::Output.name(), e);
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(out)?;
            for (name, text) in tables {
                fs::write(dir.join(name), text).map_err(out)?;
            }
        }
        None => {
            let mut stdout = io::stdout().lock();
            for (i, (_, text)) in tables.iter().enumerate() {
                if i > 0 {
                    writeln!(stdout).map_err(out)?;
                }
                stdout.write_all(text.as_bytes()).map_err(out)?;
            }
        }
    }
    Ok(())
}

fn single(kind: &Command, args: &Common) -> Outcome {
    let cfg = build_config(args)?;
    let d = cfg.delimiter;
    let out_dir = args.out_dir.as_deref();
    let tables: Vec<(&str, String)> = match kind {
        Command::Ingest(_) => {
            let loaded = pipeline::load::<f64>(&cfg)?;
            vec![("output_matrix.csv", loaded.filtered.to_delimited(d))]
        }
        Command::Rca(_) => {
            let loaded = pipeline::load::<f64>(&cfg)?;
            let r = compute_rca(&loaded.filtered).map_err(|e| Failure::new(Stage::Rca.name(), e))?;
            vec![("rca.csv", r.to_delimited(d))]
        }
        _ => {
            let m = pipeline::prepare::<f64>(&cfg)?.incidence;
            match kind {
                Command::Incidence(_) => vec![("incidence.csv", m.to_delimited(d))],
                Command::Eci(_) | Command::Pci(_) => {
                    let (eci, pci) = eci_and_pci::<f64>(&m).map_err(|e| Failure::new(Stage::Eci.name(), e))?;
                    if matches!(kind, Command::Eci(_)) {
                        vec![("eci.csv", eci.to_delimited(d))]
                    } else {
                        vec![("pci.csv", pci.to_delimited(d))]
                    }
                }
                Command::Extensive(_) => {
                    let ext = extensive_scores::<f64>(&m).map_err(|e| Failure::new(Stage::Extensive.name(), e))?;
                    vec![
                        ("extensive_first.csv", ext.first.to_delimited(d)),
                        ("extensive_second.csv", ext.second.to_delimited(d)),
                    ]
                }
                Command::Reflections(_) => {
                    let t = method_of_reflections::<f64>(&m, cfg.iterations)
                        .map_err(|e| Failure::new(Stage::Reflections.name(), e))?;
                    vec![("reflections.csv", t.to_delimited(d))]
                }
                Command::Proximity(_) => {
                    let phi = proximity::<f64>(&m).map_err(|e| Failure::new(Stage::Proximity.name(), e))?;
                    let edges = phi.edge_list(d, cfg.min_phi);
                    vec![("proximity.csv", phi.to_delimited(d)), ("proximity_edges.csv", edges)]
                }
                Command::Density(_) => {
                    let phi = proximity::<f64>(&m).map_err(|e| Failure::new(Stage::Proximity.name(), e))?;
                    let omega = relatedness_density(&m, &phi).map_err(|e| Failure::new(Stage::Density.name(), e))?;
                    vec![("density.csv", omega.to_delimited(d))]
                }
                _ => unreachable!("handled in main"),
            }
        }
    };
    emit(out_dir, &tables)
}

fn world(args: &WorldArgs) -> Outcome {
    let fail = |e: ecomplexity::AlphabetError| Failure::new("world", e);
    let w = match args.mode {
        WorldMode::Nested => generate_nested_world(args.locations, args.activities, args.seed),
        WorldMode::Random => generate_random_world(RandomWorldParams {
            num_locations: args.locations,
            num_activities: args.activities,
            alphabet_size: args.alphabet,
            letters_per_location: args.letters_per_location,
            letters_per_word: args.letters_per_word,
            seed: args.seed,
        }),
    }
    .map_err(fail)?;
    let table = match args.format {
        WorldFormat::World => ("world.txt", w.to_text()),
        WorldFormat::Incidence => {
            let d = delimiter_arg(args.delimiter.as_deref())?.unwrap_or(',');
            ("incidence.csv", world_to_incidence(&w).map_err(fail)?.to_delimited(d))
        }
    };
    emit(args.out_dir.as_deref(), &[table])
}

fn compare(args: &CompareArgs) -> Outcome {
    let d = delimiter_arg(args.delimiter.as_deref())?.unwrap_or(',');
    let read = |path: &Path| {
        let file = fs::File::open(path).map_err(|e| Failure::new("compare", format!("{}: {e}", path.display())))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        read_score_file::<f64, _>(file, d, name).map_err(|e| Failure::new("compare", e))
    };
    let (a, b) = (read(&args.a)?, read(&args.b)?);
    let report = compare_vectors(&a, &b).map_err(|e| Failure::new("compare", e))?;
    emit(args.out_dir.as_deref(), &[("comparison.csv", ComparisonReport::to_delimited(&[report], d))])
}

fn run(args: &Common) -> Outcome {
    let cfg = build_config(args)?;
    let summary = pipeline::run_pipeline(&cfg)?;
    eprintln!(
        "wrote {} files to {} ({} locations, {} activities analyzed; {} labels dropped)",
        summary.files.len(),
        summary.out_dir.display(),
        summary.manifest.counts.analyzed_locations,
        summary.manifest.counts.analyzed_activities,
        summary.manifest.dropped.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::World(args) => world(args),
        Command::Compare(args) => compare(args),
        Command::Run(args) => run(args),
        Command::Ingest(args)
        | Command::Rca(args)
        | Command::Incidence(args)
        | Command::Eci(args)
        | Command::Pci(args)
        | Command::Extensive(args)
        | Command::Reflections(args)
        | Command::Proximity(args)
        | Command::Density(args) => single(&cli.command, args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.message);
            ExitCode::FAILURE
        }
    }
}
