use std::collections::BTreeSet;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use citnet_core::export::format_real;
use citnet_core::svg::render_svg;
use citnet_core::{
    build_graph, cluster, export_records, extract_core, intermediates, layout, mark,
    match_references, parse_blocks, parse_query, parse_wos_file, select_display, ClusterOptions,
    ExportFormat, ExportView, Field, IngestOptions, LayoutParams, MatchReport, PubId, QueryOptions,
    DEFAULT_CORE_K, DEFAULT_DISPLAY, DEFAULT_MIN_CLUSTER_SIZE, DEFAULT_RESOLUTION,
    DEFAULT_RESTARTS,
};
use clap::{Args, Parser, Subcommand};

use crate::files::{self, StackLevel};

#[derive(Debug, Parser)]
#[command(
    name = "citnet",
    version,
    about = "Citation network analysis and exploration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse WoS tab-delimited exports and resolve cited references into a graph file
    Ingest(IngestArgs),
    /// Network size and per-block publication and link counts
    Stats(StatsArgs),
    /// Core publications: the largest sub-network where each has at least k relations
    Cores(CoresArgs),
    /// Cluster publications at a given resolution
    Cluster(ClusterArgs),
    /// Sub-network of marked publications (and optionally intermediates)
    Drill(DrillArgs),
    /// Timeline layout of the most cited publications
    Layout(LayoutArgs),
    /// Export the displayed publications with scores, clusters and positions
    Export(ExportArgs),
    /// Serve the HTTP session API
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// WoS export file; repeat to merge several files
    #[arg(long = "wos", required = true)]
    pub wos: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1500)]
    pub min_year: i32,
    #[arg(long, default_value_t = 2100)]
    pub max_year: i32,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Year blocks, e.g. 1998-2002,2003-2007
    #[arg(long)]
    pub blocks: Option<String>,
}

#[derive(Debug, Args)]
pub struct CoresArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = DEFAULT_CORE_K)]
    pub k: usize,
    /// Write the core sub-network as a graph file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_CLUSTER_SIZE)]
    pub min_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DrillArgs {
    #[arg(long, required_unless_present = "up")]
    pub graph: Option<PathBuf>,
    /// Search query selecting the marked publications
    #[arg(long, conflicts_with = "ids", required_unless_present_any = ["ids", "up"])]
    pub query: Option<String>,
    /// Comma-separated publication ids to mark
    #[arg(long, value_delimiter = ',')]
    pub ids: Option<Vec<PubId>>,
    /// Fields searched by unprefixed terms (default: title,abstract,keywords)
    #[arg(long, value_delimiter = ',', conflicts_with = "title_only")]
    pub fields: Option<Vec<Field>>,
    /// Search titles only
    #[arg(long)]
    pub title_only: bool,
    /// Also keep publications on citation paths between marked ones
    #[arg(long)]
    pub intermediates: bool,
    /// Sub-network graph file; required with --stack
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Drill stack file; drilling pushes a level, --up pops one
    #[arg(long)]
    pub stack: Option<PathBuf>,
    /// Return to the previous network on the stack
    #[arg(long, requires = "stack", conflicts_with_all = ["graph", "query", "ids", "fields", "title_only", "intermediates", "out"])]
    pub up: bool,
}

#[derive(Debug, Args)]
pub struct LayoutArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Number of publications shown
    #[arg(long, default_value_t = DEFAULT_DISPLAY)]
    pub n: usize,
    /// Minimum horizontal distance within a year (default: 1 / widest year)
    #[arg(long)]
    pub d_min: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clustering file used to colour the SVG
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "tsv")]
    pub format: String,
    /// Layout file; its publications are the ones exported
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    /// Number of publications exported when no layout is given
    #[arg(long, default_value_t = DEFAULT_DISPLAY)]
    pub n: usize,
    /// Output file (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => ingest(a, out),
        Command::Stats(a) => stats(a, out),
        Command::Cores(a) => cores(a, out),
        Command::Cluster(a) => cluster_cmd(a, out),
        Command::Drill(a) => drill(a, out),
        Command::Layout(a) => layout_cmd(a, out),
        Command::Export(a) => export(a, out),
        Command::Serve(a) => serve(a, out),
    }
}

fn report_line(r: &MatchReport) -> String {
    format!(
        "references: {} matched ({} doi, {} source, {} author/year), {} unmatched, {} ambiguous, {} unmatchable, {} self",
        r.matched,
        r.matched_by_doi,
        r.matched_by_source,
        r.matched_by_author_year,
        r.unmatched,
        r.ambiguous,
        r.unmatchable,
        r.self_matches
    )
}

fn ingest(a: IngestArgs, out: &mut dyn Write) -> Result<()> {
    let mut options = IngestOptions {
        min_year: a.min_year,
        max_year: a.max_year,
        ..IngestOptions::default()
    };
    let mut records = Vec::new();
    for path in &a.wos {
        let bytes =
            std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        let parsed =
            parse_wos_file(&bytes, &options).with_context(|| format!("{}", path.display()))?;
        for d in &parsed.diagnostics {
            eprintln!("{}: {d}", path.display());
        }
        options.first_id += parsed.records.len() as u32;
        records.extend(parsed.records);
    }
    let (edges, report) = match_references(&records);
    let (graph, build) = build_graph(records, &edges)?;
    files::save_graph(&a.out, &graph, &build)?;
    writeln!(
        out,
        "{} records, {} edges, {} dropped",
        graph.node_count(),
        graph.edge_count(),
        build.dropped.len()
    )?;
    writeln!(out, "{}", report_line(&report))?;
    for d in &build.dropped {
        writeln!(out, "dropped {} -> {}: {}", d.citing, d.cited, d.reason)?;
    }
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let (graph, _) = files::load_graph(&a.graph)?;
    let span = graph
        .year_range()
        .map_or(String::new(), |(lo, hi)| format!(", years {lo}-{hi}"));
    writeln!(
        out,
        "{} publications, {} citation relations{span}",
        graph.node_count(),
        graph.edge_count()
    )?;
    if let Some(spec) = &a.blocks {
        let stats = graph.block_stats(&parse_blocks(spec)?)?;
        writeln!(out, "Block\tLinks\tPublications")?;
        for b in &stats.blocks {
            writeln!(
                out,
                "{}\t{}\t{}",
                b.label, b.link_count, b.publication_count
            )?;
        }
    }
    Ok(())
}

fn cores(a: CoresArgs, out: &mut dyn Write) -> Result<()> {
    let (graph, _) = files::load_graph(&a.graph)?;
    let core = extract_core(&graph, a.k);
    writeln!(
        out,
        "{} of {} publications in the {}-core",
        core.len(),
        graph.node_count(),
        a.k
    )?;
    if let Some(path) = &a.out {
        let sub = graph.induced_subgraph(&core.members)?;
        files::save_graph(path, &sub, &Default::default())?;
        writeln!(out, "core network: {} citation relations", sub.edge_count())?;
    }
    Ok(())
}

fn cluster_cmd(a: ClusterArgs, out: &mut dyn Write) -> Result<()> {
    if !(a.resolution.is_finite() && a.resolution >= 0.0) {
        bail!(
            "resolution must be a non-negative number, got {}",
            a.resolution
        );
    }
    let (graph, _) = files::load_graph(&a.graph)?;
    let c = cluster(
        &graph,
        &ClusterOptions {
            resolution: a.resolution,
            min_cluster_size: a.min_size,
            seed: a.seed,
            restarts: a.restarts,
        },
    );
    writeln!(
        out,
        "{} clusters, {} unassigned, quality {}",
        c.cluster_count(),
        c.unassigned().count(),
        format_real(c.quality)
    )?;
    let sizes: Vec<String> = c.cluster_sizes().iter().map(usize::to_string).collect();
    writeln!(out, "cluster sizes: {}", sizes.join(" "))?;
    if let Some(path) = &a.out {
        files::save_clustering(path, &c)?;
    }
    Ok(())
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (std::fs::canonicalize(a), std::fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

fn drill(a: DrillArgs, out: &mut dyn Write) -> Result<()> {
    if a.up {
        let stack_path = a.stack.as_deref().expect("clap requires --stack with --up");
        return drill_up(stack_path, out);
    }
    let graph_path = a.graph.as_deref().expect("clap requires --graph");
    if a.stack.is_some() && a.out.is_none() {
        bail!("--stack needs --out for the sub-network file");
    }
    let (graph, _) = files::load_graph(graph_path)?;
    let (marked, description) = match (&a.query, &a.ids) {
        (Some(q), _) => {
            let options = if a.title_only {
                QueryOptions::title_only()
            } else if let Some(fields) = &a.fields {
                QueryOptions {
                    default_fields: fields.clone(),
                }
            } else {
                QueryOptions::default()
            };
            (mark(&graph, &parse_query(q, &options)?), q.clone())
        }
        (None, Some(ids)) => (
            ids.iter().copied().collect::<BTreeSet<_>>(),
            "marked ids".to_string(),
        ),
        (None, None) => unreachable!("clap requires --query or --ids"),
    };
    if marked.is_empty() {
        bail!("no publications marked; nothing to drill into");
    }
    let mut keep = marked.clone();
    let found = if a.intermediates {
        intermediates(&graph, &marked)?
    } else {
        BTreeSet::new()
    };
    keep.extend(found.iter().copied());
    let sub = graph.induced_subgraph(&keep)?;
    writeln!(
        out,
        "{} marked + {} intermediates -> {} publications, {} citation relations",
        marked.len(),
        found.len(),
        sub.node_count(),
        sub.edge_count()
    )?;
    if let Some(path) = &a.out {
        files::save_graph(path, &sub, &Default::default())?;
    }
    if let Some(stack_path) = &a.stack {
        let sub_path = a.out.as_deref().expect("checked above");
        let mut levels = if stack_path.exists() {
            files::load_stack(stack_path)?
        } else {
            vec![StackLevel {
                graph: graph_path.to_path_buf(),
                marked: Vec::new(),
                description: "full network".to_string(),
            }]
        };
        let top = &levels.last().expect("stacks are never empty").graph;
        if !same_file(top, graph_path) {
            bail!(
                "{} is not the current network of {} (top is {})",
                graph_path.display(),
                stack_path.display(),
                top.display()
            );
        }
        let suffix = if a.intermediates {
            " with intermediates"
        } else {
            ""
        };
        levels.push(StackLevel {
            graph: sub_path.to_path_buf(),
            marked: marked.into_iter().collect(),
            description: format!("{description}{suffix}"),
        });
        files::save_stack(stack_path, &levels)?;
        writeln!(out, "depth {}", levels.len())?;
    }
    Ok(())
}

fn drill_up(stack_path: &Path, out: &mut dyn Write) -> Result<()> {
    let mut levels = files::load_stack(stack_path)?;
    if levels.len() == 1 {
        bail!("already at full network");
    }
    levels.pop();
    let top = levels.last().expect("stacks are never empty");
    let (graph, _) = files::load_graph(&top.graph)?;
    writeln!(
        out,
        "back to {}: {} publications, {} citation relations, {} marked",
        top.graph.display(),
        graph.node_count(),
        graph.edge_count(),
        top.marked.len()
    )?;
    files::save_stack(stack_path, &levels)?;
    writeln!(out, "depth {}", levels.len())?;
    Ok(())
}

fn layout_cmd(a: LayoutArgs, out: &mut dyn Write) -> Result<()> {
    let (graph, _) = files::load_graph(&a.graph)?;
    let clustering = a
        .clusters
        .as_deref()
        .map(files::load_clustering)
        .transpose()?;
    let display = select_display(&graph, a.n);
    let result = layout(
        &graph,
        &display,
        &LayoutParams {
            d_min: a.d_min,
            iterations: a.iterations,
            seed: a.seed,
        },
    )?;
    writeln!(
        out,
        "{} publications in {} layers, stress {} (initial {})",
        result.nodes.len(),
        result.layer_years.len(),
        format_real(result.stress),
        format_real(result.initial_stress)
    )?;
    if let Some(path) = &a.svg {
        std::fs::write(path, render_svg(&result, clustering.as_ref()))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &a.out {
        files::save_layout(path, &result)?;
    }
    Ok(())
}

fn export(a: ExportArgs, out: &mut dyn Write) -> Result<()> {
    let format: ExportFormat = a.format.parse()?;
    let (graph, _) = files::load_graph(&a.graph)?;
    let layout = a.layout.as_deref().map(files::load_layout).transpose()?;
    let clustering = a
        .clusters
        .as_deref()
        .map(files::load_clustering)
        .transpose()?;
    let view = match &layout {
        Some(l) => ExportView::from_layout(&graph, l, clustering.as_ref()),
        None => ExportView {
            graph: &graph,
            display: select_display(&graph, a.n),
            clustering: clustering.as_ref(),
            layout: None,
        },
    };
    let (bytes, warnings) = export_records(&view, format)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    match &a.out {
        Some(path) => std::fs::write(path, bytes)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => out.write_all(&bytes)?,
    }
    Ok(())
}

fn serve(a: ServeArgs, out: &mut dyn Write) -> Result<()> {
    let (graph, _) = files::load_graph(&a.graph)?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .with_context(|| format!("invalid address {}:{}", a.host, a.port))?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot listen on {addr}"))?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        crate::server::serve(listener, Arc::new(graph)).await
    })
}
