use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Value};
use surfiso::budget::Budget;
use surfiso::canon::{canonical_code, Mode};
use surfiso::decomposition::{biconnected_tree, triconnected_tree};
use surfiso::embed::{enumerate_embeddings, min_euler_genus, EmbeddingQuery};
use surfiso::error::Error;
use surfiso::facewidth::face_width;
use surfiso::fixtures;
use surfiso::graph::Graph;
use surfiso::iso::{isomorphic, Engine};
use surfiso::map::CombinatorialMap;
use surfiso::oracle::{brute_iso, OracleBudget};

#[derive(Parser)]
#[command(name = "surfiso", version, about = "Isomorphism of graphs of bounded Euler genus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct Limits {
    /// Largest Euler genus to consider.
    #[arg(long, default_value_t = 2)]
    max_genus: usize,
    /// Search-node budget.
    #[arg(long, default_value_t = Budget::DEFAULT, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Free,
    Oriented,
}

#[derive(Subcommand)]
enum Command {
    /// Decide isomorphism of two edge-list graphs.
    Iso {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        limits: Limits,
        /// Print the vertex bijection.
        #[arg(long)]
        witness: bool,
        /// Print the case routing of the engine.
        #[arg(long)]
        trace: bool,
    },
    /// Least Euler genus of a graph.
    Genus {
        file: PathBuf,
        #[command(flatten)]
        limits: Limits,
    },
    /// Face-width of a map.
    Facewidth { file: PathBuf },
    /// Canonical code (hex) of a graph or a map.
    Canon {
        file: PathBuf,
        #[command(flatten)]
        limits: Limits,
        /// Map codes only.
        #[arg(long, value_enum, default_value_t = ModeArg::Free)]
        mode: ModeArg,
    },
    /// Block tree, or triconnected tree of a 2-connected graph.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        triconnected: bool,
    },
    /// A least-genus embedding, or all of them up to isomorphism.
    Embed {
        file: PathBuf,
        #[command(flatten)]
        limits: Limits,
        #[arg(long)]
        all: bool,
    },
    /// Brute-force isomorphism (independent of the engine).
    Oracle {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 50_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_nodes: u64,
        /// Seconds.
        #[arg(long, default_value_t = 120)]
        time_limit: u64,
    },
    /// Emit a fixture graph.
    Gen {
        #[command(subcommand)]
        family: Family,
        /// Relabel randomly with this seed.
        #[arg(long, global = true)]
        shuffle: Option<u64>,
    },
}

#[derive(Subcommand)]
enum Family {
    /// Flip torus with `k + 4` layers.
    Figa {
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Wheel with a handle tube of `t` segments.
    Fige {
        #[arg(long, default_value_t = 3)]
        t: usize,
    },
    /// Ring of `l` annular pieces.
    Ring {
        #[arg(long, default_value_t = 3)]
        l: usize,
    },
    /// Tube of `rings` bands of `k`-cycles with its apexes identified.
    Fw1 {
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        rings: usize,
    },
}

struct Out {
    text: String,
    json: Value,
    code: u8,
}

impl Out {
    fn ok(text: String, json: Value) -> Out {
        Out { text, json, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<Graph, Error> {
    Graph::parse(&read(path)?).map_err(|e| located(path, e))
}

fn read_map(path: &Path) -> Result<CombinatorialMap, Error> {
    CombinatorialMap::parse(&read(path)?).map_err(|e| located(path, e))
}

fn located(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    }
}

fn is_map(text: &str) -> bool {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).is_some_and(|l| l.starts_with("map"))
}

fn run(cmd: Command) -> Result<Out, Error> {
    match cmd {
        Command::Iso { a, b, limits, witness, trace } => {
            let (g1, g2) = (read_graph(&a)?, read_graph(&b)?);
            let budget = Budget::new(limits.budget);
            let v = isomorphic(&g1, &g2, limits.max_genus, &budget)?;
            let mut text = String::from(if v.isomorphic { "isomorphic\n" } else { "not isomorphic\n" });
            if trace {
                for t in &v.trace {
                    let _ = writeln!(text, "trace {t}");
                }
            }
            if witness {
                if let Some(w) = &v.witness {
                    for (x, y) in w.iter().enumerate() {
                        let _ = writeln!(text, "{x} -> {y}");
                    }
                }
            }
            let trace_json: Vec<String> = v.trace.iter().map(|t| t.to_string().trim_start().to_string()).collect();
            let json = json!({
                "isomorphic": v.isomorphic,
                "witness": if witness { json!(v.witness) } else { Value::Null },
                "trace": if trace { json!(trace_json) } else { Value::Null },
            });
            Ok(Out { text, json, code: if v.isomorphic { 0 } else { 1 } })
        }
        Command::Genus { file, limits } => {
            let g = read_graph(&file)?;
            let budget = Budget::new(limits.budget);
            let (t, _) = min_euler_genus(&g, limits.max_genus, &budget)?.ok_or(Error::GenusTooLarge(limits.max_genus))?;
            Ok(Out::ok(format!("euler-genus {t}\n"), json!({ "euler_genus": t })))
        }
        Command::Facewidth { file } => {
            let m = read_map(&file)?;
            let w = face_width(&m);
            Ok(Out::ok(format!("{w}\n"), json!({ "face_width": w.to_string() })))
        }
        Command::Canon { file, limits, mode } => {
            let text = read(&file)?;
            let hexed = if is_map(&text) {
                let m = CombinatorialMap::parse(&text).map_err(|e| located(&file, e))?;
                let mode = match mode {
                    ModeArg::Free => Mode::Free,
                    ModeArg::Oriented => Mode::Oriented,
                };
                canonical_code(&m, mode).to_hex()
            } else {
                let g = Graph::parse(&text).map_err(|e| located(&file, e))?;
                let budget = Budget::new(limits.budget);
                Engine::new(limits.max_genus, &budget).canonical_labeling(&g)?.0.to_hex()
            };
            Ok(Out::ok(format!("{hexed}\n"), json!({ "code": hexed })))
        }
        Command::Decompose { file, triconnected } => {
            let g = read_graph(&file)?;
            let t = if triconnected { triconnected_tree(&g)? } else { biconnected_tree(&g)? };
            let bags: Vec<Value> = t
                .bags
                .iter()
                .map(|b| json!({ "kind": format!("{:?}", b.kind).to_lowercase(), "vertices": b.vertices }))
                .collect();
            let links: Vec<Value> = t.links.iter().map(|l| json!({ "a": l.a, "b": l.b, "adhesion": l.adhesion })).collect();
            Ok(Out::ok(t.dump(), json!({ "bags": bags, "links": links })))
        }
        Command::Embed { file, limits, all } => {
            let g = read_graph(&file)?;
            let budget = Budget::new(limits.budget);
            let (t, m) = min_euler_genus(&g, limits.max_genus, &budget)?.ok_or(Error::GenusTooLarge(limits.max_genus))?;
            let maps = if all {
                let q = EmbeddingQuery::new(&g, t);
                enumerate_embeddings(&q, &budget)?.into_iter().filter(|x| x.total_euler_genus() == t).collect()
            } else {
                vec![m]
            };
            let text: String = maps.iter().map(|m| m.to_text()).collect::<Vec<_>>().join("\n");
            let json = json!({ "euler_genus": t, "maps": maps.iter().map(|m| m.to_text()).collect::<Vec<_>>() });
            Ok(Out::ok(text, json))
        }
        Command::Oracle { a, b, witness, max_nodes, time_limit } => {
            let (g1, g2) = (read_graph(&a)?, read_graph(&b)?);
            let limit = OracleBudget { max_nodes, time_limit: std::time::Duration::from_secs(time_limit) };
            let f = brute_iso(&g1, &g2, limit)?;
            let mut text = String::from(if f.is_some() { "isomorphic\n" } else { "not isomorphic\n" });
            if let (true, Some(f)) = (witness, &f) {
                for (x, y) in f.iter().enumerate() {
                    let _ = writeln!(text, "{x} -> {y}");
                }
            }
            let json = json!({ "isomorphic": f.is_some(), "witness": if witness { json!(f) } else { Value::Null } });
            Ok(Out { text, json, code: if f.is_some() { 0 } else { 1 } })
        }
        Command::Gen { family, shuffle } => {
            let g = match family {
                Family::Figa { k } => fixtures::figa(k),
                Family::Fige { t } => {
                    if t == 0 {
                        return Err(Error::Invalid("fige needs t >= 1".into()));
                    }
                    fixtures::fige(t).0
                }
                Family::Ring { l } => {
                    if l < 3 {
                        return Err(Error::Invalid("ring needs l >= 3".into()));
                    }
                    fixtures::algotorus_ring(l)
                }
                Family::Fw1 { k, rings } => {
                    if k < 3 || rings < 3 {
                        return Err(Error::Invalid("fw1 needs k >= 3 and rings >= 3".into()));
                    }
                    fixtures::fw1_gadget(k, rings)
                }
            };
            let g = match shuffle {
                Some(seed) => fixtures::shuffled(&g, &mut rand::rngs::StdRng::seed_from_u64(seed)).0,
                None => g,
            };
            let text = g.to_text();
            Ok(Out::ok(text.clone(), json!({ "graph": text })))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli.command) {
        Ok(out) => {
            match format {
                Format::Text => print!("{}", out.text),
                Format::Json => println!("{}", out.json),
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            match format {
                Format::Text => eprintln!("error: {e}"),
                Format::Json => println!("{}", json!({ "error": e.to_string() })),
            }
            ExitCode::from(2)
        }
    }
}
