//! The `atlasburst` command line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use atlasburst_core::{
    build_cloud, compose_grid, compose_with_geometry, layout, profile_subset, reroot, view_for, AnatomyError,
    DiagramKind, GeneSymbol, GridSpec, LayoutParams, StageNumber, StageSet, StructureId, ViewMode,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::fixtures::{write_fixtures, FixtureSpec};
use crate::format::{docs, FormatError, ParseMode};
use crate::service::{self, load_snapshot, AtlasService, LoadError, ServiceConfig, Snapshot};
use crate::svg::{render_grid_svg, render_svg};

#[derive(Debug, Parser)]
#[command(name = "atlasburst", version, color = clap::ColorChoice::Never, about = "Sunburst and icicle diagrams of gene expression over a staged anatomy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an anatomy and annotation file pair.
    Validate(DataArgs),
    /// Draw one diagram, or a grid for several genes or stages.
    Render(RenderArgs),
    /// Print the expression containment matrix of some genes.
    Compare(CompareArgs),
    /// Write the gene cloud document for a stage.
    Cloud(CloudArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Generate synthetic data files.
    Fixtures(FixtureArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Directory holding anatomy.json and annotations.ndjson.
    #[arg(long, env = "ATLASBURST_DATA")]
    data: PathBuf,
    /// Palette config; defaults to palette.json in the data directory.
    #[arg(long)]
    palette: Option<PathBuf>,
    /// Warn about unknown keys instead of rejecting them.
    #[arg(long)]
    lenient: bool,
}

impl DataArgs {
    fn config(&self) -> ServiceConfig {
        ServiceConfig {
            palette: self.palette.clone(),
            mode: if self.lenient { ParseMode::Lenient } else { ParseMode::Strict },
            ..ServiceConfig::new(&self.data)
        }
    }

    fn load(&self) -> anyhow::Result<Snapshot> {
        Ok(load_snapshot(&self.config(), 1)?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Sunburst,
    Icicle,
}

impl From<Kind> for DiagramKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sunburst => DiagramKind::Sunburst,
            Kind::Icicle => DiagramKind::Icicle,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Staged,
    Abstract,
}

impl From<Mode> for ViewMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Staged => ViewMode::Staged,
            Mode::Abstract => ViewMode::Abstract,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Svg,
    Json,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Gene symbols, repeated or comma separated.
    #[arg(long = "gene", value_delimiter = ',', required = true)]
    genes: Vec<String>,
    /// Stages, repeated or comma separated; ranges like 12-15 allowed.
    #[arg(long = "stage", value_delimiter = ',', required = true)]
    stages: Vec<String>,
    #[arg(long, value_enum, default_value = "sunburst")]
    kind: Kind,
    #[arg(long, value_enum, default_value = "abstract")]
    mode: Mode,
    /// Pixel size of each diagram.
    #[arg(long, default_value_t = 400)]
    size: u32,
    /// Grid columns; defaults to the number of stages.
    #[arg(long)]
    columns: Option<usize>,
    /// Draw only the subtree under this structure (single diagrams).
    #[arg(long)]
    root: Option<StructureId>,
    /// Zoom as if this structure were clicked (single diagrams).
    #[arg(long, conflicts_with = "root")]
    clicked: Option<StructureId>,
    #[arg(long, value_enum, default_value = "svg")]
    format: OutputFormat,
    /// Output file, `-` for standard output.
    #[arg(long = "output", short = 'o', default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    genes: Vec<String>,
    #[arg(long)]
    stage: StageNumber,
    #[arg(long = "output", short = 'o', default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct CloudArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    stage: StageNumber,
    /// Count only annotations in this structure's subtree.
    #[arg(long)]
    structure: Option<StructureId>,
    /// Keep genes starting with this prefix.
    #[arg(long)]
    prefix: Option<String>,
    #[arg(long = "output", short = 'o', default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Cached expression state maps; 0 disables caching.
    #[arg(long, default_value_t = 256)]
    cache_size: usize,
}

#[derive(Debug, Args)]
struct FixtureArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    structures: usize,
    #[arg(long, default_value_t = 19000)]
    genes: usize,
    #[arg(long, default_value_t = 26)]
    stages: u8,
    /// Mean annotations per gene.
    #[arg(long, default_value_t = 4.0)]
    density: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Runs the command line; returns the process exit code (0 success,
/// 1 findings or failure, 2 usage error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let result = match cli.command {
        Command::Validate(args) => validate(&args, out),
        Command::Render(args) => render(&args, out).map(|()| 0),
        Command::Compare(args) => compare(&args, out).map(|()| 0),
        Command::Cloud(args) => cloud(&args, out).map(|()| 0),
        Command::Serve(args) => serve(&args, err).map(|()| 0),
        Command::Fixtures(args) => fixtures(&args, out).map(|()| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn emit(output: &str, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    if output == "-" {
        out.write_all(text.as_bytes())?;
    } else {
        fs::write(output, text).with_context(|| format!("writing {output}"))?;
    }
    Ok(())
}

fn validate(args: &DataArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    match load_snapshot(&args.config(), 1) {
        Ok(snapshot) => {
            for f in &snapshot.report.findings {
                writeln!(out, "{f}")?;
            }
            for c in &snapshot.conflicts {
                writeln!(
                    out,
                    "CONFLICT line {}: {} {} TS{} kept {} dropped {}",
                    c.record,
                    c.gene,
                    c.structure,
                    c.stage,
                    c.kept.token(),
                    c.dropped.token()
                )?;
            }
            for w in &snapshot.warnings {
                writeln!(out, "warning: {w}")?;
            }
            let n = snapshot.report.findings.len() + snapshot.conflicts.len();
            writeln!(out, "{n} findings")?;
            Ok(i32::from(n > 0))
        }
        Err(LoadError::File { path, source: FormatError::Anatomy(AnatomyError::Invalid(report)) }) => {
            writeln!(out, "{}:", path.display())?;
            for f in &report.findings {
                writeln!(out, "{f}")?;
            }
            writeln!(out, "{} findings", report.findings.len())?;
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_genes(raw: &[String]) -> anyhow::Result<Vec<GeneSymbol>> {
    raw.iter().map(|g| GeneSymbol::new(g.trim()).map_err(Into::into)).collect()
}

fn parse_stages(raw: &[String]) -> anyhow::Result<Vec<StageNumber>> {
    let mut stages = Vec::new();
    for token in raw {
        stages.extend(StageSet::parse_token(token)?.iter());
    }
    Ok(stages)
}

fn render(args: &RenderArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let snapshot = args.data.load()?;
    let (genes, stages) = (parse_genes(&args.genes)?, parse_stages(&args.stages)?);
    let (kind, mode) = (DiagramKind::from(args.kind), ViewMode::from(args.mode));
    let text = if genes.len() == 1 && stages.len() == 1 {
        let (gene, stage) = (&genes[0], stages[0]);
        let mut view = view_for(&snapshot.anatomy, stage, mode);
        if let Some(root) = args.root {
            view = view.subtree(root)?;
        } else if let Some(clicked) = args.clicked {
            view = reroot(&view, clicked)?;
        }
        let geometry = layout(&view, &LayoutParams::new(kind))?;
        let (anatomy, store, palette) = (&snapshot.anatomy, &snapshot.store, &snapshot.palette);
        let model = compose_with_geometry(anatomy, store, &view, geometry, gene, stage, mode, palette);
        match args.format {
            OutputFormat::Svg => render_svg(&model, args.size)?,
            OutputFormat::Json => docs::render_model_doc(&model),
        }
    } else {
        if args.root.is_some() || args.clicked.is_some() {
            bail!("--root and --clicked apply to single diagrams only");
        }
        let columns = args.columns.unwrap_or(stages.len());
        let spec = GridSpec::product(&genes, &stages, columns, mode, kind);
        let grid = compose_grid(&snapshot.anatomy, &snapshot.store, &spec, &snapshot.palette)?;
        match args.format {
            OutputFormat::Svg => render_grid_svg(&grid, args.size)?,
            OutputFormat::Json => docs::grid_doc(&grid),
        }
    };
    emit(&args.output, &text, out)
}

/// Containment matrix: row gene vs column gene.
pub fn containment_matrix(snapshot: &Snapshot, genes: &[GeneSymbol], stage: StageNumber) -> String {
    let width = genes.iter().map(|g| g.as_str().chars().count()).max().unwrap_or(0).max(1);
    let mut text = format!("TS{stage} {:width$}", "", width = width.saturating_sub(format!("TS{stage}").len()));
    for g in genes {
        text.push_str(&format!(" {:>width$}", g.as_str()));
    }
    text.push('\n');
    for a in genes {
        text.push_str(&format!("{:<width$}", a.as_str(), width = width.max(format!("TS{stage}").len())));
        for b in genes {
            let ab = profile_subset(&snapshot.store, &snapshot.anatomy, a, b, stage).subset;
            let ba = profile_subset(&snapshot.store, &snapshot.anatomy, b, a, stage).subset;
            let cell = match (ab, ba) {
                (true, true) => "=",
                (true, false) => "\u{2286}",
                (false, true) => "\u{2287}",
                (false, false) => "\u{b7}",
            };
            text.push_str(&format!(" {cell:>width$}"));
        }
        text.push('\n');
    }
    text
}

fn compare(args: &CompareArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let snapshot = args.data.load()?;
    let genes = parse_genes(&args.genes)?;
    emit(&args.output, &containment_matrix(&snapshot, &genes, args.stage), out)
}

fn cloud(args: &CloudArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let snapshot = args.data.load()?;
    let mut cloud = build_cloud(&snapshot.store, &snapshot.anatomy, args.stage, args.structure)?;
    if let Some(prefix) = &args.prefix {
        let keep = atlasburst_core::search_prefix(&cloud, prefix);
        cloud.nodes.retain(|n| keep.binary_search(&n.gene).is_ok());
    }
    let mut text = docs::cloud_doc(&cloud);
    text.push('\n');
    emit(&args.output, &text, out)
}

fn serve(args: &ServeArgs, err: &mut dyn Write) -> anyhow::Result<()> {
    let config = ServiceConfig { listen: args.listen, cache_size: args.cache_size, ..args.data.config() };
    let service = Arc::new(AtlasService::start(config)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.listen).await?;
        writeln!(err, "listening on http://{}", listener.local_addr()?)?;
        service::serve(service, listener).await?;
        Ok(())
    })
}

fn fixtures(args: &FixtureArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let spec = FixtureSpec {
        structures: args.structures,
        genes: args.genes,
        stages: args.stages,
        density: args.density,
        seed: args.seed,
    };
    let f = write_fixtures(&spec, Path::new(&args.out))?;
    writeln!(
        out,
        "wrote {} structures, {} genes, {} annotations to {}",
        f.anatomy.len(),
        args.genes,
        f.annotations.len(),
        args.out.display()
    )?;
    Ok(())
}
