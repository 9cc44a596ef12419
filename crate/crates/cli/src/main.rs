use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bruen_core::chains::{self, Chain, ChainFile};
use bruen_core::clique::{self, SearchConfig, SearchResult};
use bruen_core::conway::ConwayTable;
use bruen_core::graphs::{self, ConeRule};
use bruen_core::io::{self as formats, ResultRow};
use bruen_core::symmetry::{self, vertex_orbits};
use bruen_core::{field, make_field, FieldCtx, FieldOptions, Graph, GraphKind};

/// Exit status for answers cut short by the time budget.
const EXIT_TRUNCATED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bruen",
    version,
    about = "Bruen chains and cone graphs over F_{q^4}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build Γ_X or Δ_X and write it as DIMACS.
    BuildGraph {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Kind::Gamma)]
        graph: Kind,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compute ω of a cone graph, or of a DIMACS file.
    CliqueNumber {
        #[command(flatten)]
        field: OptFieldArgs,
        /// Read the graph from a DIMACS file instead of building it.
        #[arg(long, conflicts_with = "q")]
        dimacs: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Kind::Gamma)]
        graph: Kind,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the witness clique here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate Bruen chains through X up to isometry and write them.
    FindChains {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Kind::Gamma)]
        graph: Kind,
        /// Directory for the chain files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        gens: Option<usize>,
    },
    /// Verify a chain file.
    VerifyChain {
        file: PathBuf,
        #[arg(long)]
        allow_non_conway: bool,
        #[arg(long)]
        force_large_field: bool,
    },
    /// Vertex orbits under the generated automorphisms.
    Orbits {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value_t = Kind::Gamma)]
        graph: Kind,
        #[arg(long)]
        gens: Option<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Clique numbers for several q, written as CSV and an SVG scatter.
    Report {
        /// Comma-separated orders, e.g. 5,7,9.
        #[arg(long, value_delimiter = ',', required = true)]
        qs: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Kind::Gamma)]
        graph: Kind,
        /// Output directory for results.csv and figure.svg.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        allow_non_conway: bool,
        #[arg(long)]
        force_large_field: bool,
    },
    /// Verify every bundled known chain.
    CorpusCheck,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    allow_non_conway: bool,
    #[arg(long)]
    force_large_field: bool,
}

#[derive(Args)]
struct OptFieldArgs {
    #[arg(long, required_unless_present = "dimacs")]
    q: Option<u64>,
    #[arg(long)]
    allow_non_conway: bool,
    #[arg(long)]
    force_large_field: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    target_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = Starters::Orbits)]
    starters: Starters,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Give up after this many seconds (exit status 2).
    #[arg(long)]
    budget_s: Option<f64>,
    /// Cap on the number of reflections scanned for automorphisms.
    #[arg(long)]
    gens: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gamma,
    Delta,
}

impl From<Kind> for GraphKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Gamma => GraphKind::Gamma,
            Kind::Delta => GraphKind::Delta,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Starters {
    None,
    Orbits,
}

fn field_options(allow_non_conway: bool, force_large: bool) -> Result<FieldOptions> {
    let conway = ConwayTable::from_env().context("loading Conway polynomial table")?;
    Ok(FieldOptions {
        allow_large: force_large,
        allow_non_conway,
        memory_budget: if force_large {
            u64::MAX
        } else {
            field::DEFAULT_MEMORY_BUDGET
        },
        conway,
    })
}

fn open_field(q: u64, allow_non_conway: bool, force_large: bool) -> Result<FieldCtx> {
    let opts = field_options(allow_non_conway, force_large)?;
    let ctx = make_field(q, &opts).with_context(|| format!("field: cannot build F_{{{q}^4}}"))?;
    if !ctx.is_conway() {
        eprintln!(
            "warning: F_{{{q}^4}} built from a non-Conway polynomial {:?}",
            ctx.modulus()
        );
    }
    Ok(ctx)
}

fn set_threads(threads: usize) {
    if threads > 0 {
        // only the first call takes effect, which is all a single command needs
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn build(ctx: &FieldCtx, kind: Kind) -> Graph {
    graphs::build_graph(ctx, kind.into(), ConeRule::Fast)
}

fn labels_line(graph: &Graph, clique: &[usize]) -> String {
    let logs: Vec<String> = clique
        .iter()
        .map(|&v| graph.label(v).index().to_string())
        .collect();
    logs.join(" ")
}

fn search_config(search: &SearchArgs, bound: Option<usize>) -> SearchConfig {
    SearchConfig {
        target_size: search.target_size,
        starters: None,
        initial_lower_bound: 0,
        upper_bound: bound,
        time_budget: search.budget_s.map(Duration::from_secs_f64),
        threads: search.threads,
    }
}

fn solve_cone_graph(ctx: &FieldCtx, graph: &Graph, search: &SearchArgs) -> SearchResult {
    let mut cfg = search_config(search, Some(graph.clique_bound()));
    if search.starters == Starters::Orbits {
        let gens = symmetry::stabilizer_generators(ctx, graph, search.gens);
        cfg.starters = Some(vertex_orbits(graph.n(), &gens).starter_set());
    }
    clique::max_clique(graph.adjacency(), &cfg)
}

fn describe(result: &SearchResult) -> String {
    match (result.omega, result.completed) {
        (Some(w), _) => format!("omega {w}"),
        (None, true) => format!(
            "clique of size {} found (target reached)",
            result.witness.len()
        ),
        (None, false) => format!(
            "budget exhausted; best clique found has size {}",
            result.witness.len()
        ),
    }
}

fn clique_number(
    field: OptFieldArgs,
    dimacs: Option<PathBuf>,
    kind: Kind,
    search: SearchArgs,
    out: Option<PathBuf>,
) -> Result<u8> {
    set_threads(search.threads);
    let (result, witness_line, header) = if let Some(path) = dimacs {
        let adj = formats::read_dimacs(&path)
            .with_context(|| format!("io: reading {}", path.display()))?;
        if search.starters == Starters::Orbits {
            eprintln!(
                "note: no automorphisms are known for a DIMACS input; searching without starters"
            );
        }
        let result = clique::max_clique(&adj, &search_config(&search, None));
        let line: Vec<String> = result.witness.iter().map(|v| (v + 1).to_string()).collect();
        let header = format!("dimacs {}\n", path.display());
        (result, line.join(" "), header)
    } else {
        let q = field.q.expect("clap enforces --q or --dimacs");
        let ctx = open_field(q, field.allow_non_conway, field.force_large_field)?;
        let graph = build(&ctx, kind);
        eprintln!(
            "{} graph: n = {}, m = {}",
            graph.kind(),
            graph.n(),
            graph.edge_count()
        );
        let result = solve_cone_graph(&ctx, &graph, &search);
        let line = labels_line(&graph, &result.witness);
        (result, line, format!("q {q}\ngraph {}\n", graph.kind()))
    };
    println!("{}", describe(&result));
    println!("witness {witness_line}");
    eprintln!(
        "nodes {}, {:.3} s",
        result.nodes,
        result.wall_time.as_secs_f64()
    );
    if let Some(path) = out {
        let text = format!("{header}size {}\n{witness_line}\n", result.witness.len());
        fs::write(&path, text).with_context(|| format!("io: writing {}", path.display()))?;
    }
    Ok(if result.completed { 0 } else { EXIT_TRUNCATED })
}

fn find_chains(
    field: FieldArgs,
    kind: Kind,
    out: Option<PathBuf>,
    run: RunArgs,
    gens: Option<usize>,
) -> Result<u8> {
    set_threads(run.threads);
    let ctx = open_field(field.q, field.allow_non_conway, field.force_large_field)?;
    let graph = build(&ctx, kind);
    let generators = symmetry::stabilizer_generators(&ctx, &graph, gens);
    let classes = chains::find_chain_classes(&ctx, &graph, &generators, run.threads);
    println!(
        "q = {}: {} chain class(es) from {} cliques of size {}",
        field.q,
        classes.class_count(),
        classes.total_cliques,
        graph.clique_bound()
    );
    if let Some(dir) = &out {
        fs::create_dir_all(dir).with_context(|| format!("io: creating {}", dir.display()))?;
    }
    let mut all_ok = true;
    for (i, (rep, size)) in classes
        .representatives
        .iter()
        .zip(&classes.class_sizes)
        .enumerate()
    {
        let chain =
            chains::clique_to_chain(&ctx, &graph, rep).context("chains: converting clique")?;
        let report = chains::verify_chain(&ctx, &chain).context("chains: verifying")?;
        let ok = report.passed() && report.extended_passed();
        all_ok &= ok;
        let exps: Vec<String> = chain
            .canonical_exponents()
            .iter()
            .map(u64::to_string)
            .collect();
        println!(
            "class {}: {} cliques, {} [{}]",
            i + 1,
            size,
            exps.join(" "),
            if ok { "verified" } else { "FAILED" }
        );
        if !ok {
            eprintln!("{report}");
        }
        if let Some(dir) = &out {
            let path = dir.join(format!("q{:02}_class{}.chain", field.q, i + 1));
            chains::write_chain_file(&chains::chain_file_for(&ctx, &chain), &path)
                .context("io: writing chain file")?;
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn load_chain(
    file: &ChainFile,
    allow_non_conway: bool,
    force_large: bool,
) -> Result<(FieldCtx, Chain)> {
    let ctx = open_field(file.q, allow_non_conway, force_large)?;
    let chain = file.to_chain(&ctx).context("chains: loading exponents")?;
    Ok((ctx, chain))
}

fn verify_chain(path: &Path, allow_non_conway: bool, force_large: bool) -> Result<u8> {
    let file = chains::read_chain_file(path)
        .with_context(|| format!("chains: reading {}", path.display()))?;
    let (ctx, chain) = load_chain(&file, allow_non_conway, force_large)?;
    let report = chains::verify_chain(&ctx, &chain).context("chains: verifying")?;
    println!("{report}");
    Ok(if report.passed() { 0 } else { 1 })
}

fn orbits(field: FieldArgs, kind: Kind, gens: Option<usize>, run: RunArgs) -> Result<u8> {
    set_threads(run.threads);
    let ctx = open_field(field.q, field.allow_non_conway, field.force_large_field)?;
    let graph = build(&ctx, kind);
    let generators = symmetry::stabilizer_generators(&ctx, &graph, gens);
    let part = vertex_orbits(graph.n(), &generators);
    println!("vertices {}", graph.n());
    println!("generators {}", generators.len());
    println!("orbits {}", part.count());
    for (i, (&rep, size)) in part.reps().iter().zip(part.sizes()).enumerate() {
        println!(
            "orbit {} rep {} (z^{}) size {}",
            i + 1,
            rep,
            graph.label(rep).index(),
            size
        );
    }
    Ok(0)
}

fn report(
    qs: Vec<u64>,
    kind: Kind,
    out: PathBuf,
    search: SearchArgs,
    allow_non_conway: bool,
    force_large: bool,
) -> Result<u8> {
    set_threads(search.threads);
    // validate every q before building anything
    for &q in &qs {
        field::odd_prime_power(q).with_context(|| format!("field: q = {q}"))?;
    }
    fs::create_dir_all(&out).with_context(|| format!("io: creating {}", out.display()))?;
    let mut rows = Vec::new();
    let mut truncated = false;
    for q in qs {
        let start = Instant::now();
        let ctx = open_field(q, allow_non_conway, force_large)?;
        let graph = build(&ctx, kind);
        let result = solve_cone_graph(&ctx, &graph, &search);
        let witness_path = out.join(format!("witness_q{q:02}.txt"));
        fs::write(
            &witness_path,
            format!("{}\n", labels_line(&graph, &result.witness)),
        )
        .context("io: writing witness")?;
        truncated |= !result.completed;
        println!("q = {q}: {}", describe(&result));
        rows.push(ResultRow {
            q,
            kind: graph.kind().to_string(),
            n: graph.n(),
            m: graph.edge_count(),
            omega: result.witness.len(),
            completed: result.completed,
            wall_time_s: start.elapsed().as_secs_f64(),
            witness_path: Some(witness_path.display().to_string()),
        });
    }
    formats::write_results_csv(&rows, &out.join("results.csv")).context("io: writing CSV")?;
    formats::write_figure_svg(&rows, &out.join("figure.svg")).context("io: writing SVG")?;
    Ok(if truncated { EXIT_TRUNCATED } else { 0 })
}

fn corpus_check() -> Result<u8> {
    let mut passed = 0;
    let corpus = chains::corpus();
    println!("{:<6} {:>3}  {:<6} {:<8}", "name", "q", "core", "extended");
    for (name, file) in &corpus {
        let (core, ext) = match load_chain(file, false, false)
            .and_then(|(ctx, chain)| Ok(chains::verify_chain(&ctx, &chain)?))
        {
            Ok(r) => (r.passed(), r.extended_passed()),
            Err(e) => {
                eprintln!("{name}: {e:#}");
                (false, false)
            }
        };
        let word = |b: bool| if b { "pass" } else { "FAIL" };
        println!(
            "{:<6} {:>3}  {:<6} {:<8}",
            name,
            file.q,
            word(core),
            word(ext)
        );
        if core && ext {
            passed += 1;
        }
    }
    println!("{passed}/{} pass", corpus.len());
    Ok(if passed == corpus.len() { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::BuildGraph {
            field,
            graph,
            out,
            run,
        } => {
            set_threads(run.threads);
            let ctx = open_field(field.q, field.allow_non_conway, field.force_large_field)?;
            let g = build(&ctx, graph);
            formats::write_dimacs(g.adjacency(), &formats::graph_comments(&g), &out)
                .with_context(|| format!("io: writing {}", out.display()))?;
            let degrees: Vec<String> = g.degree_set().iter().map(usize::to_string).collect();
            println!(
                "{} q={} n={} m={} degrees {}",
                g.kind(),
                field.q,
                g.n(),
                g.edge_count(),
                degrees.join(",")
            );
            Ok(0)
        }
        Command::CliqueNumber {
            field,
            dimacs,
            graph,
            search,
            out,
        } => clique_number(field, dimacs, graph, search, out),
        Command::FindChains {
            field,
            graph,
            out,
            run,
            gens,
        } => find_chains(field, graph, out, run, gens),
        Command::VerifyChain {
            file,
            allow_non_conway,
            force_large_field,
        } => verify_chain(&file, allow_non_conway, force_large_field),
        Command::Orbits {
            field,
            graph,
            gens,
            run,
        } => orbits(field, graph, gens, run),
        Command::Report {
            qs,
            graph,
            out,
            search,
            allow_non_conway,
            force_large_field,
        } => report(qs, graph, out, search, allow_non_conway, force_large_field),
        Command::CorpusCheck => corpus_check(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(hint) = e
                .chain()
                .find_map(|c| c.downcast_ref::<bruen_core::FieldError>())
            {
                if matches!(hint, bruen_core::FieldError::NoConwayPolynomial { .. }) {
                    eprintln!(
                        "hint: pass --allow-non-conway, or point BRUEN_CONWAY_FILE at a table"
                    );
                }
            }
            ExitCode::from(1)
        }
    }
}
