use std::fmt::Display;
use std::io::Write as _;
use std::path::{Component, Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use skg_compat::equivalence::{
    build_mapping, EquivalenceMapping, LabelBackend, Matcher, MappingOptions, PropertyMode, SimilarityConfig,
};
use skg_compat::harness::{ablate, generate_synthetic, trend_summary, SyntheticSpec};
use skg_compat::importer::{import_turtle, LoadTurtleError, LowerOptions};
use skg_compat::metrics::{compare, reports_to_csv, Direction, Method};
use skg_compat::model::{load_skg_with, save_skg, validate, LoadOptions, Skg};
use skg_compat::weights::compute_weights;

/// Schema compatibility analysis: equivalence, weights, coverage and flexibility.
#[derive(Parser, Debug)]
#[command(name = "skgcompat", version)]
struct Cli {
    /// JSON run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory every written file must live under.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Treat warnings as errors and reject unknown JSON keys.
    #[arg(long, global = true, env = "SKG_COMPAT_STRICT")]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an SKG JSON file.
    Validate {
        skg: PathBuf,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Lower a Turtle file to SKG JSON.
    Import {
        ttl: PathBuf,
        #[arg(short, long)]
        output: String,
        /// Schema name; defaults to the ontology name.
        #[arg(long)]
        name: Option<String>,
    },
    /// Build an equivalence mapping across schemas.
    Equiv {
        #[arg(required = true, num_args = 2..)]
        schemas: Vec<PathBuf>,
        /// Schema whose ids name the groups; defaults to the first.
        #[arg(long)]
        reference: Option<String>,
        #[arg(short, long)]
        output: String,
        /// Keep decisions for non-equivalent pairs.
        #[arg(long)]
        record_all: bool,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Importance weights of one schema.
    Weights {
        skg: PathBuf,
        /// Flatten is-a edges first.
        #[arg(long)]
        preprocess: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Coverage and flexibility of X against Y.
    Compare {
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(short, long, default_value = "-")]
        output: String,
    },
    /// Remove each etype of X in turn and track the metrics.
    Ablate {
        x: PathBuf,
        y: PathBuf,
        #[arg(long)]
        mapping: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(short, long, default_value = "-")]
        output: String,
        /// Also write the trend report (JSON when the name ends in .json).
        #[arg(long)]
        trend: Option<String>,
    },
    /// Generate a seeded synthetic schema pair and its true mapping.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        etypes: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, default_value_t = 0.1)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        depth: u8,
        /// Directory for x.json, y.json and mapping.json.
        #[arg(short, long, default_value = ".")]
        output: String,
    },
}

#[derive(Args, Debug, Default)]
struct SimFlags {
    #[arg(long)]
    t_label: Option<f64>,
    #[arg(long)]
    t_property: Option<f64>,
    #[arg(long)]
    t_overall: Option<f64>,
    #[arg(long, value_enum)]
    property_mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    label_backend: Option<BackendArg>,
    /// Synonym pairs, one TAB-separated pair per line.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Label vectors, `label<TAB>v1,v2,...` per line.
    #[arg(long)]
    vectors: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct RunFlags {
    /// Comma-separated subset of 1,2,3.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    PaperLiteral,
    NormalizedBestMatch,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Exact,
    TokenLexical,
    VectorFile,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Xy,
    Yx,
    Both,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    similarity: SimilarityConfig,
    methods: Vec<Method>,
    directions: Direction,
    output_dir: PathBuf,
    strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            similarity: SimilarityConfig::default(),
            methods: Method::ALL.to_vec(),
            directions: Direction::Xy,
            output_dir: PathBuf::from("."),
            strict: false,
        }
    }
}

enum Failure {
    /// Bad flags or arguments; usage is printed.
    Usage(String),
    /// Invalid config, schema or mapping content.
    Invalid(anyhow::Error),
    /// Unreadable, unwritable or unparsable files.
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

fn invalid(e: impl Display) -> Failure {
    Failure::Invalid(anyhow!("{e}"))
}

fn io(e: impl Display) -> Failure {
    Failure::Io(anyhow!("{e}"))
}

type Res<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Usage(m) => {
                    eprintln!("error: {m}\n\n{}", Cli::command().render_usage());
                }
                Failure::Invalid(e) | Failure::Io(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Res<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => serde_json::from_str::<RunConfig>(&read(p)?)
            .map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.output_dir {
        cfg.output_dir = d.clone();
    }
    cfg.strict |= cli.strict;
    Ok(cfg)
}

fn apply_sim(cfg: &mut SimilarityConfig, f: &SimFlags) {
    if let Some(m) = f.property_mode {
        let mode = match m {
            ModeArg::PaperLiteral => PropertyMode::PaperLiteral,
            ModeArg::NormalizedBestMatch => PropertyMode::NormalizedBestMatch,
        };
        if mode != cfg.property_mode {
            cfg.t_property = SimilarityConfig::for_mode(mode).t_property;
            cfg.property_mode = mode;
        }
    }
    if let Some(b) = f.label_backend {
        cfg.label_backend = match b {
            BackendArg::Exact => LabelBackend::Exact,
            BackendArg::TokenLexical => LabelBackend::TokenLexical,
            BackendArg::VectorFile => LabelBackend::VectorFile,
        };
    }
    cfg.t_label = f.t_label.unwrap_or(cfg.t_label);
    cfg.t_property = f.t_property.unwrap_or(cfg.t_property);
    cfg.t_overall = f.t_overall.unwrap_or(cfg.t_overall);
    if f.lexicon.is_some() {
        cfg.lexicon_path = f.lexicon.clone();
    }
    if f.vectors.is_some() {
        cfg.vector_path = f.vectors.clone();
    }
}

fn apply_run(cfg: &mut RunConfig, f: &RunFlags) -> Res<()> {
    if let Some(list) = &f.methods {
        let mut methods = Vec::new();
        for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m = part
                .parse::<u8>()
                .map_err(|_| ())
                .and_then(|n| Method::try_from(n).map_err(|_| ()))
                .map_err(|_| Failure::Usage(format!("unknown method '{part}'; expected 1, 2 or 3")))?;
            if !methods.contains(&m) {
                methods.push(m);
            }
        }
        cfg.methods = methods;
    }
    if cfg.methods.is_empty() {
        return Err(Failure::Usage("--methods must name at least one of 1, 2, 3".into()));
    }
    if let Some(d) = f.direction {
        cfg.directions = match d {
            DirectionArg::Xy => Direction::Xy,
            DirectionArg::Yx => Direction::Yx,
            DirectionArg::Both => Direction::Both,
        };
    }
    Ok(())
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Res<Output> {
        std::fs::create_dir_all(dir).map_err(|e| io(format!("{}: {e}", dir.display())))?;
        tempfile::tempfile_in(dir).map_err(|e| io(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    fn resolve(&self, target: &str) -> Res<PathBuf> {
        let p = Path::new(target);
        let rel = if p.is_absolute() {
            p.strip_prefix(&self.dir).map_err(|_| {
                Failure::Usage(format!("{target} is outside the output directory {}", self.dir.display()))
            })?
        } else {
            p
        };
        if rel.components().any(|c| matches!(c, Component::ParentDir)) {
            return Err(Failure::Usage(format!("{target} may not contain '..'")));
        }
        Ok(self.dir.join(rel))
    }

    fn write(&self, target: &str, content: &str) -> Res<()> {
        if target == "-" {
            let mut out = std::io::stdout().lock();
            return out.write_all(content.as_bytes()).map_err(io);
        }
        let path = self.resolve(target)?;
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io(format!("{}: {e}", parent.display())))?;
        }
        std::fs::write(&path, content).map_err(|e| io(format!("{}: {e}", path.display())))
    }
}

fn load(path: &Path, strict: bool) -> Res<Skg> {
    let text = read(path)?;
    let loaded = load_skg_with(text.as_bytes(), LoadOptions { lenient: !strict })
        .map_err(|e| io(format!("{}: {e}", path.display())))?;
    for w in &loaded.warnings {
        warn!("{}: {w}", path.display());
    }
    Ok(loaded.skg)
}

fn load_mapping(path: &Path) -> Res<EquivalenceMapping> {
    EquivalenceMapping::from_json(&read(path)?).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn config_line(cfg: &RunConfig) -> String {
    format!("# config: {}\n", serde_json::to_string(cfg).expect("config serializes"))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

/// Adds the effective config to a JSON object.
fn with_config(value: impl Serialize, cfg: &RunConfig) -> String {
    let mut v = serde_json::to_value(value).expect("output serializes");
    if let Value::Object(map) = &mut v {
        map.insert("run_config".into(), serde_json::to_value(cfg).expect("config serializes"));
    }
    pretty(&v)
}

fn run(cli: Cli) -> Res<u8> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Validate { skg, output } => {
            let s = load(skg, cfg.strict)?;
            let report = validate(&s);
            let out = Output::new(&cfg.output_dir)?;
            out.write(output, &with_config(&report, &cfg))?;
            let failed = !report.is_valid() || (cfg.strict && !report.warnings.is_empty());
            Ok(if failed { 1 } else { 0 })
        }
        Command::Import { ttl, output, name } => {
            let text = read(ttl)?;
            let opts = LowerOptions {
                name: name.clone(),
                strict: cfg.strict,
            };
            let lowered = import_turtle(&text, &opts).map_err(|e| match e {
                LoadTurtleError::Parse(e) => io(format!("{}: {e}", ttl.display())),
                LoadTurtleError::Lower(e) => invalid(format!("{}: {e}", ttl.display())),
            })?;
            for w in &lowered.warnings {
                warn!("{}: {w}", ttl.display());
            }
            Output::new(&cfg.output_dir)?.write(output, &save_skg(&lowered.skg))?;
            Ok(0)
        }
        Command::Equiv {
            schemas,
            reference,
            output,
            record_all,
            sim,
        } => {
            apply_sim(&mut cfg.similarity, sim);
            cfg.similarity.validate().map_err(invalid)?;
            let loaded = schemas.iter().map(|p| load(p, cfg.strict)).collect::<Res<Vec<_>>>()?;
            let matcher = Matcher::new(cfg.similarity.clone()).map_err(|e| match e {
                skg_compat::equivalence::EquivalenceError::Io { .. } => io(e),
                other => invalid(other),
            })?;
            let mut opts = MappingOptions::new(reference.clone().unwrap_or_else(|| loaded[0].name.clone()));
            opts.record_all = *record_all;
            let mapping = build_mapping(&loaded, &matcher, &opts).map_err(invalid)?;
            Output::new(&cfg.output_dir)?.write(output, &with_config(&mapping, &cfg))?;
            Ok(0)
        }
        Command::Weights {
            skg,
            preprocess,
            format,
            output,
        } => {
            let s = load(skg, cfg.strict)?;
            let table = compute_weights(&s, *preprocess).map_err(invalid)?;
            let text = match format {
                Format::Csv => config_line(&cfg) + &table.to_csv(),
                Format::Json => with_config(&table, &cfg),
            };
            Output::new(&cfg.output_dir)?.write(output, &text)?;
            Ok(0)
        }
        Command::Compare {
            x,
            y,
            mapping,
            run,
            format,
            output,
        } => {
            apply_run(&mut cfg, run)?;
            let (x, y, m) = (load(x, cfg.strict)?, load(y, cfg.strict)?, load_mapping(mapping)?);
            let reports = compare(&x, &y, &m, &cfg.methods, cfg.directions).map_err(invalid)?;
            let text = match format {
                Format::Csv => config_line(&cfg) + &reports_to_csv(&reports),
                Format::Json => with_config(json!({ "reports": reports }), &cfg),
            };
            Output::new(&cfg.output_dir)?.write(output, &text)?;
            Ok(0)
        }
        Command::Ablate {
            x,
            y,
            mapping,
            run,
            format,
            output,
            trend,
        } => {
            apply_run(&mut cfg, run)?;
            let (x, y, m) = (load(x, cfg.strict)?, load(y, cfg.strict)?, load_mapping(mapping)?);
            let result = ablate(&x, &y, &m, &cfg.methods).map_err(invalid)?;
            for skipped in &result.skipped {
                warn!("skipped removal of '{skipped}': it is the only etype of {}", result.x_schema);
            }
            let out = Output::new(&cfg.output_dir)?;
            let text = match format {
                Format::Csv => config_line(&cfg) + &result.to_csv(),
                Format::Json => with_config(&result, &cfg),
            };
            out.write(output, &text)?;
            if let Some(target) = trend {
                let report = trend_summary(std::slice::from_ref(&result));
                let text = if target.ends_with(".json") {
                    with_config(&report, &cfg)
                } else {
                    config_line(&cfg) + &report.to_string()
                };
                out.write(target, &text)?;
            }
            Ok(0)
        }
        Command::Gen {
            seed,
            etypes,
            overlap,
            density,
            depth,
            output,
        } => {
            let spec = SyntheticSpec {
                seed: *seed,
                n_etypes: *etypes,
                edge_density: *density,
                is_a_depth: *depth,
                overlap_fraction: *overlap,
            };
            let pair = generate_synthetic(&spec).map_err(invalid)?;
            let out = Output::new(&cfg.output_dir)?;
            let dir = Path::new(output);
            let file = |name: &str| dir.join(name).to_string_lossy().into_owned();
            out.write(&file("x.json"), &save_skg(&pair.x))?;
            out.write(&file("y.json"), &save_skg(&pair.y))?;
            let mapping = serde_json::to_value(&pair.mapping).expect("mapping serializes");
            let mut v = json!({ "spec": spec });
            if let (Value::Object(m), Value::Object(extra)) = (mapping, &mut v) {
                let mut m = m;
                m.append(extra);
                out.write(&file("mapping.json"), &with_config(Value::Object(m), &cfg))?;
            }
            Ok(0)
        }
    }
}
