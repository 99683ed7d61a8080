//! Command-line driver: tour construction, corpus runs, structure reports,
//! decomposition and oracle queries, DOT export.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use cubic_tsp::format::{self, Format};
use cubic_tsp::pipeline::{run_pipeline, PipelineOptions, SelectionMode};
use cubic_tsp::{generate, matching, oracle, structure, Graph};

#[derive(Parser)]
#[command(name = "cubic-tsp", version, about = "Travelling-salesman tours of length at most 1.3n - 2 in bridgeless cubic graphs, with certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Input file; '-' or absent reads stdin.
    input: Option<PathBuf>,
    /// Input format: g6 (graph6, first line) or edges.
    #[arg(long, default_value = "g6")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a certified closed spanning walk.
    Tour {
        #[command(flatten)]
        input: InputArgs,
        /// 2-factor selection strategy.
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        /// Dump every applied swap as JSON lines on stderr.
        #[arg(long)]
        trace: bool,
        /// Dump the reduction record stack as JSON on stderr.
        #[arg(long)]
        dump_reductions: bool,
    },
    /// Run the pipeline over a corpus directory (plus optional random graphs).
    Corpus {
        /// Directory of .g6 (one graph per line) and .edges files.
        dir: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Seed for generated graphs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also run generated random graphs, as BxC (B vertices, C graphs).
        #[arg(long)]
        random: Option<String>,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
    },
    /// Structural report: diamonds, collections, cuts, reducibility.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Exact decomposition of the uniform 1/3 fractional perfect matching.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Brute-force optima: graphic TSP and minimum-cost even factor.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
    },
    /// DOT export, optionally annotated with the constructed tour.
    Dot {
        #[command(flatten)]
        input: InputArgs,
        /// Run the pipeline and annotate walk edges.
        #[arg(long)]
        tour: bool,
    },
}

fn read_graph(args: &InputArgs) -> Result<Graph, String> {
    let text = match &args.input {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| format!("cannot read {}: {e}", p.display()))?,
        _ => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map_err(|e| e.to_string())?;
            buf
        }
    };
    let fmt = Format::parse_tag(&args.format).map_err(|e| e.to_string())?;
    let text = match fmt {
        Format::Graph6 => text.lines().next().unwrap_or("").to_string(),
        Format::EdgeList => text,
    };
    format::parse_graph(&text, fmt).map_err(|e| e.to_string())
}

fn fail(msg: &str) -> ! {
    let diag = serde_json::json!({ "error": msg });
    eprintln!("{diag}");
    std::process::exit(1);
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Tour { input, mode, trace, dump_reductions } => {
            cmd_tour(&input, &mode, trace, dump_reductions)
        }
        Command::Corpus { dir, jobs, seed, random, mode } => {
            cmd_corpus(&dir, jobs, seed, random.as_deref(), &mode)
        }
        Command::Analyze { input } => cmd_analyze(&input),
        Command::Decompose { input } => cmd_decompose(&input),
        Command::Oracle { input } => cmd_oracle(&input),
        Command::Dot { input, tour } => cmd_dot(&input, tour),
    };
    std::process::exit(code);
}

fn pipeline_options(mode: &str) -> PipelineOptions {
    let mode = match SelectionMode::parse_tag(mode) {
        Ok(m) => m,
        Err(e) => fail(&e.to_string()),
    };
    PipelineOptions { mode, ..PipelineOptions::default() }
}

fn cmd_tour(input: &InputArgs, mode: &str, trace: bool, dump_reductions: bool) -> i32 {
    let graph = read_graph(input).unwrap_or_else(|e| fail(&e));
    let opts = pipeline_options(mode);
    match run_pipeline(&graph, &opts) {
        Ok(result) => {
            if trace {
                for t in &result.trace {
                    eprintln!("{}", serde_json::to_string(t).expect("trace serialises"));
                }
            }
            if dump_reductions {
                for r in &result.records {
                    eprintln!("{}", serde_json::to_string(r).expect("record serialises"));
                }
            }
            println!("{}", serde_json::to_string_pretty(&result).expect("result serialises"));
            if result.bound_ok && result.certificates.pass() {
                0
            } else {
                1
            }
        }
        Err(e) => fail(&e.to_string()),
    }
}

struct CorpusItem {
    name: String,
    graph: Result<Graph, String>,
}

fn load_corpus(dir: &Path) -> Vec<CorpusItem> {
    let mut entries: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).collect(),
        Err(e) => fail(&format!("cannot read corpus dir {}: {e}", dir.display())),
    };
    entries.sort();
    let mut items = Vec::new();
    for path in entries {
        let Some(ext) = path.extension().and_then(|e| e.to_str()) else { continue };
        let stem = path.file_name().unwrap().to_string_lossy().to_string();
        match ext {
            "g6" | "graph6" => {
                let Ok(text) = std::fs::read_to_string(&path) else {
                    items.push(CorpusItem { name: stem, graph: Err("unreadable".into()) });
                    continue;
                };
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    items.push(CorpusItem {
                        name: format!("{stem}:{}", i + 1),
                        graph: format::parse_graph6(line).map_err(|e| e.to_string()),
                    });
                }
            }
            "edges" => {
                let graph = std::fs::read_to_string(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| format::parse_edge_list(&t).map_err(|e| e.to_string()));
                items.push(CorpusItem { name: stem, graph });
            }
            _ => {}
        }
    }
    items
}

/// Fixed-point decimal of `num/den` with six places, via integer arithmetic
/// so reruns are byte-identical.
fn ratio_string(num: usize, den: usize) -> String {
    if den == 0 {
        return String::from("");
    }
    let scaled = num as u128 * 1_000_000 / den as u128;
    format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
}

fn cmd_corpus(dir: &Path, jobs: usize, seed: u64, random: Option<&str>, mode: &str) -> i32 {
    let opts = pipeline_options(mode);
    let mut items = load_corpus(dir);
    if let Some(spec) = random {
        let (nv, count) = match spec.split_once('x') {
            Some((a, b)) => match (a.parse::<usize>(), b.parse::<usize>()) {
                (Ok(nv), Ok(c)) => (nv, c),
                _ => fail("bad --random spec; expected BxC"),
            },
            None => fail("bad --random spec; expected BxC"),
        };
        for i in 0..count {
            let name = format!("random-n{nv}-{i}");
            let graph = generate::random_cubic_bridgeless(nv, seed.wrapping_add(i as u64))
                .map_err(|e| e.to_string());
            items.push(CorpusItem { name, graph });
        }
    }
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .unwrap_or_else(|e| fail(&format!("thread pool: {e}")));
    }
    let rows: Vec<String> = items
        .par_iter()
        .map(|item| {
            let base = format!("{}", item.name);
            match &item.graph {
                Err(e) => format!("{base},,,,,,,,,,error:{e}"),
                Ok(g) => match run_pipeline(g, &opts) {
                    Err(e) => {
                        format!("{base},{},,,,,,,,,error:{e}", g.n())
                    }
                    Ok(r) => {
                        let optimum = if g.n() <= 14 {
                            oracle::optimal_graphic_tsp(g, 14).ok()
                        } else {
                            None
                        };
                        let (opt_s, ratio) = match optimum {
                            Some(o) => (o.to_string(), ratio_string(r.tour.length, o)),
                            None => (String::new(), String::new()),
                        };
                        let pass = r.bound_ok && r.certificates.pass();
                        format!(
                            "{base},{},{},{},{},{},{},{},{},{},{}",
                            r.n,
                            r.tour.length,
                            r.bound,
                            r.bound_ok,
                            opt_s,
                            ratio,
                            r.phase1_swaps,
                            r.phase2_swaps,
                            r.reduction_count,
                            if pass { "pass" } else { "FAIL" },
                        )
                    }
                },
            }
        })
        .collect();
    println!("graph,n,length,bound,bound_ok,optimum,ratio,phase1_swaps,phase2_swaps,reductions,certificates");
    for row in &rows {
        println!("{row}");
    }
    let total = rows.len();
    let passed = rows.iter().filter(|r| r.ends_with(",pass")).count();
    let errors = rows.iter().filter(|r| r.contains(",error:")).count();
    println!("# summary: graphs={total} passed={passed} errors={errors}");
    if passed == total {
        0
    } else {
        1
    }
}

fn cmd_analyze(input: &InputArgs) -> i32 {
    let graph = read_graph(input).unwrap_or_else(|e| fail(&e));
    let validation = graph.validate();
    let diamonds = structure::find_diamonds(&graph);
    let count_kind = |k: structure::DiamondKind| diamonds.iter().filter(|d| d.kind == k).count();
    let reducible = structure::find_reducible(&graph);
    let cuts = structure::enumerate_3_edge_cuts(&graph, 24).map(|c| c.len()).ok();
    let collections: Option<Vec<serde_json::Value>> = if reducible.is_none() {
        structure::build_collections(&graph).ok().map(|cols| {
            cols.iter()
                .map(|c| {
                    serde_json::json!({
                        "kind": c.kind,
                        "members": c.members.len(),
                        "n_h": c.n_h,
                        "b_h": c.b_h,
                        "a_h": c.a_h,
                        "s_h": c.s_h.to_string(),
                        "t_h": c.t_h.to_string(),
                        "p_over_n": c.p_over_n.to_string(),
                        "a_weight": c.a_weight.to_string(),
                        "weighted_average": c.weighted_average().to_string(),
                    })
                })
                .collect()
        })
    } else {
        None
    };
    let report = serde_json::json!({
        "schema_version": 1,
        "n": graph.n(),
        "edges": graph.edge_count(),
        "validation": validation,
        "reducible": reducible.as_ref().map(|r| serde_json::json!({
            "type": r.type_tag(),
            "vertices": r.vertex_set(),
        })),
        "irreducible": reducible.is_none(),
        "diamonds": {
            "d4": count_kind(structure::DiamondKind::D4),
            "d6": count_kind(structure::DiamondKind::D6),
            "d8": count_kind(structure::DiamondKind::D8),
        },
        "three_edge_cuts": cuts,
        "collections": collections,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    0
}

fn cmd_decompose(input: &InputArgs) -> i32 {
    let graph = read_graph(input).unwrap_or_else(|e| fail(&e));
    match matching::decompose_uniform_third(&graph, 24) {
        Ok(d) => {
            let terms: Vec<serde_json::Value> = d
                .terms
                .iter()
                .map(|(lambda, m)| {
                    serde_json::json!({
                        "coefficient": lambda.to_string(),
                        "matching": m.edges,
                    })
                })
                .collect();
            let out = serde_json::json!({
                "schema_version": 1,
                "n": graph.n(),
                "matchings": d.terms.len(),
                "terms": terms,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serialises"));
            0
        }
        Err(e) => fail(&e.to_string()),
    }
}

fn cmd_oracle(input: &InputArgs) -> i32 {
    let graph = read_graph(input).unwrap_or_else(|e| fail(&e));
    let tsp = oracle::optimal_graphic_tsp(&graph, 14);
    let mef = oracle::min_cost_even_factor(&graph, 12);
    let out = serde_json::json!({
        "schema_version": 1,
        "n": graph.n(),
        "optimal_tour_length": tsp.as_ref().ok(),
        "optimal_tour_error": tsp.as_ref().err().map(|e| e.to_string()),
        "min_even_factor_cost": mef.as_ref().ok().map(|(_, c)| c),
        "min_even_factor_error": mef.as_ref().err().map(|e| e.to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serialises"));
    if tsp.is_ok() || mef.is_ok() {
        0
    } else {
        1
    }
}

fn cmd_dot(input: &InputArgs, with_tour: bool) -> i32 {
    let graph = read_graph(input).unwrap_or_else(|e| fail(&e));
    if with_tour {
        match run_pipeline(&graph, &PipelineOptions::default()) {
            Ok(r) => {
                print!("{}", format::to_dot(&graph, Some(&r.tour.walk)));
                0
            }
            Err(e) => fail(&e.to_string()),
        }
    } else {
        print!("{}", format::to_dot(&graph, None));
        0
    }
}
