//! `mexcode` — structural codes for mathematical expressions.
//!
//! Exit status: 0 on success, 1 on domain errors (parse failures,
//! ambiguous orderings, config mismatches), 2 on usage errors. Results go
//! to stdout, diagnostics to stderr.

use std::error::Error;
use std::fs;
use std::io::{self, BufRead};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mexcode::oracle::DEFAULT_VERTEX_LIMIT;
use mexcode::{
    code_distance, encode_graph, evaluate, index, iso_oracle, parse_str, CanonicalCode,
    CorpusIndex, EncoderConfig, TreeMode,
};

#[derive(Parser)]
#[command(
    name = "mexcode",
    version,
    about = "Structural codes for mathematical expressions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the structural code for an expression
    Encode {
        /// Expression to encode (shell-quoted), e.g. "x^2+y"
        #[arg(
            required_unless_present = "stdin",
            conflicts_with = "stdin",
            allow_hyphen_values = true
        )]
        expression: Option<String>,
        /// Encoder config file (default: $MEXCODE_CONFIG if set)
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Rewrite N-ary sums/products into nested binary nodes first
        #[arg(long)]
        binary: bool,
        /// Also print the vertex list, adjacency rows, and tie-break count
        #[arg(long, short)]
        verbose: bool,
        /// Read expressions from stdin, one per line, one code per line
        #[arg(long)]
        stdin: bool,
    },
    /// Encode two expressions and report EQUAL or DISTINCT
    Compare {
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Brute-force isomorphism check between two expression graphs
    Oracle {
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Vertex limit for the exhaustive search
        #[arg(long, default_value_t = DEFAULT_VERTEX_LIMIT)]
        limit: usize,
    },
    /// Measure code equality against the isomorphism oracle on random pairs
    Eval {
        /// Number of pairs to test (twins alternating with independent draws)
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        pairs: u64,
        /// Generator seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Build a persistent index over a line-delimited JSON corpus
    IndexBuild {
        /// Corpus file: one {"id", "expression", "metadata"?} record per line
        corpus: PathBuf,
        /// Output index file
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Query a persistent index
    IndexQuery {
        /// Index file produced by index-build
        index: PathBuf,
        /// Query expression
        #[arg(allow_hyphen_values = true)]
        expression: String,
        /// Maximum number of results
        #[arg(short = 'k', long = "top", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// Must match the index's embedded config when given
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // die quietly on SIGPIPE, like other pipeline tools, instead of
    // panicking when a downstream reader closes stdout early
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

type AnyError = Box<dyn Error>;

// Loads the config from --config, else $MEXCODE_CONFIG, else defaults.
// The bool reports whether the caller supplied one at all.
fn load_config(flag: &Option<PathBuf>) -> Result<(EncoderConfig, bool), AnyError> {
    let path = match flag {
        Some(path) => Some(path.clone()),
        None => match std::env::var("MEXCODE_CONFIG") {
            Ok(value) if !value.is_empty() => Some(PathBuf::from(value)),
            _ => None,
        },
    };
    match path {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            Ok((EncoderConfig::parse_str(&text)?, true))
        }
        None => Ok((EncoderConfig::default(), false)),
    }
}

fn run(command: Command) -> Result<(), AnyError> {
    match command {
        Command::Encode {
            expression,
            config,
            binary,
            verbose,
            stdin,
        } => {
            let (mut config, _) = load_config(&config)?;
            if binary {
                config.mode = TreeMode::Binary;
            }
            if stdin {
                encode_stream(&config)
            } else {
                encode_one(
                    &expression.expect("clap enforces presence"),
                    &config,
                    verbose,
                )
            }
        }
        Command::Compare {
            first,
            second,
            config,
        } => {
            let (config, _) = load_config(&config)?;
            let a = CanonicalCode::from_graph(&encode_graph(&first, &config)?);
            let b = CanonicalCode::from_graph(&encode_graph(&second, &config)?);
            println!("{}", if a == b { "EQUAL" } else { "DISTINCT" });
            println!("a: {a}");
            println!("b: {b}");
            println!("distance: {:.4}", code_distance(&a, &b));
            Ok(())
        }
        Command::Oracle {
            first,
            second,
            config,
            limit,
        } => {
            let (config, _) = load_config(&config)?;
            let g1 = mexcode::build_graph(&parse_str(&first)?, &config);
            let g2 = mexcode::build_graph(&parse_str(&second)?, &config);
            let verdict = iso_oracle(&g1, &g2, limit)?;
            println!("isomorphic: {}", verdict.isomorphic);
            if let Some(witness) = &verdict.witness {
                let pairs: Vec<String> = witness
                    .iter()
                    .enumerate()
                    .map(|(from, to)| format!("{from}->{to}"))
                    .collect();
                println!("witness: {}", pairs.join(" "));
            }
            println!("nodes_explored: {}", verdict.nodes_explored);
            Ok(())
        }
        Command::Eval {
            pairs,
            seed,
            config,
        } => {
            let (config, _) = load_config(&config)?;
            let report = evaluate(pairs as usize, seed, &config)?;
            println!("pairs_tested      {}", report.pairs_tested);
            println!("false_equal       {}", report.false_equal);
            println!("missed_equal      {}", report.missed_equal);
            println!("tie_break_rate    {:.4}", report.tie_break_rate);
            println!("twin_pairs        {}", report.twin_pairs);
            println!("clean_twin_pairs  {}", report.clean_twin_pairs);
            println!("clean_twin_missed {}", report.clean_twin_missed);
            Ok(())
        }
        Command::IndexBuild {
            corpus,
            output,
            config,
        } => {
            let (config, _) = load_config(&config)?;
            let entries = index::read_corpus_path(&corpus)?;
            let built = CorpusIndex::build(entries, config)?;
            built.save_to_path(&output)?;
            println!(
                "indexed {} entries ({} distinct codes)",
                built.len(),
                built.distinct_codes()
            );
            Ok(())
        }
        Command::IndexQuery {
            index,
            expression,
            k,
            config,
        } => {
            let (supplied, explicit) = load_config(&config)?;
            let loaded = CorpusIndex::load_from_path(&index)?;
            if explicit {
                loaded.ensure_config(&supplied)?;
            }
            for hit in loaded.query(&expression, k as usize)? {
                println!("{}\t{:.4}", hit.id, hit.distance);
            }
            Ok(())
        }
    }
}

fn encode_one(expression: &str, config: &EncoderConfig, verbose: bool) -> Result<(), AnyError> {
    let graph = encode_graph(expression, config)?;
    let code = CanonicalCode::from_graph(&graph);
    println!("{code}");
    if verbose {
        let details: Vec<&str> = graph.vertices().iter().map(|v| v.detail()).collect();
        println!("vertices: {}", details.join(" "));
        println!("labels: {}", code.labels().join(" "));
        println!("adjacency:");
        for row in graph.adjacency_matrix() {
            let line: String = row
                .iter()
                .map(|&b| if b == 1 { '1' } else { '0' })
                .collect();
            println!("{line}");
        }
        println!("tie_break_events: {}", graph.tie_break_events());
    }
    Ok(())
}

fn encode_stream(config: &EncoderConfig) -> Result<(), AnyError> {
    let stdin = io::stdin();
    for (idx, line) in stdin.lock().lines().enumerate() {
        let line = line?;
        let graph =
            encode_graph(&line, config).map_err(|e| format!("stdin line {}: {e}", idx + 1))?;
        println!("{}", CanonicalCode::from_graph(&graph));
    }
    Ok(())
}
