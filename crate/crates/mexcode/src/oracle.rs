//! Ground truth and measurement: a brute-force labeled-graph isomorphism
//! search for small graphs, a deterministic random expression generator,
//! and an evaluation harness that counts how often code equality and
//! oracle isomorphism disagree.
//!
//! The encoder never tests isomorphism itself; this module exists to
//! quantify what that shortcut costs. The search is exact and therefore
//! refuses graphs above a vertex limit instead of approximating.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{EncoderConfig, TreeMode};
use crate::encode::{CanonicalCode, EncodeError};
use crate::graph::{binarize, build_graph, ExpressionGraph};
use crate::parser::{unparse, Ast, FuncKind};

/// Default cap for the brute-force search. Keeps the worst case (bounded by
/// label-class-wise factorials) well under a second.
pub const DEFAULT_VERTEX_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {vertices} vertices, above the brute-force limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Outcome of the exhaustive isomorphism search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    /// Vertex bijection from the first graph into the second, when found.
    /// Maps edges onto edges and emitted labels onto equal emitted labels.
    pub witness: Option<Vec<usize>>,
    /// Assignments tried during the search.
    pub nodes_explored: u64,
}

/// Exhaustive search for a label- and edge-preserving bijection between
/// two expression graphs, with degree pruning. Exact on success and
/// failure; errors only when a graph exceeds `limit` vertices.
pub fn iso_oracle(
    g1: &ExpressionGraph,
    g2: &ExpressionGraph,
    limit: usize,
) -> Result<IsoVerdict, OracleError> {
    for g in [g1, g2] {
        if g.vertex_count() > limit {
            return Err(OracleError::TooLarge {
                vertices: g.vertex_count(),
                limit,
            });
        }
    }
    let mut nodes_explored = 0u64;
    let witness = search(g1, g2, &mut nodes_explored);
    Ok(IsoVerdict {
        isomorphic: witness.is_some(),
        witness,
        nodes_explored,
    })
}

struct Search<'g> {
    labels1: Vec<String>,
    labels2: Vec<String>,
    degrees1: Vec<usize>,
    degrees2: Vec<usize>,
    adj1: Vec<Vec<bool>>,
    adj2: Vec<Vec<bool>>,
    order: Vec<usize>,
    g2: &'g ExpressionGraph,
}

fn search(g1: &ExpressionGraph, g2: &ExpressionGraph, nodes: &mut u64) -> Option<Vec<usize>> {
    let n = g1.vertex_count();
    if n != g2.vertex_count() || g1.edges().len() != g2.edges().len() {
        return None;
    }

    let labels1: Vec<String> = g1.vertices().iter().map(|v| v.emitted()).collect();
    let labels2: Vec<String> = g2.vertices().iter().map(|v| v.emitted()).collect();
    let degrees1: Vec<usize> = (0..n).map(|v| g1.degree(v)).collect();
    let degrees2: Vec<usize> = (0..n).map(|v| g2.degree(v)).collect();

    // quick reject: the (label, degree) multisets must agree
    let mut profile1: Vec<(&String, usize)> =
        labels1.iter().zip(degrees1.iter().copied()).collect();
    let mut profile2: Vec<(&String, usize)> =
        labels2.iter().zip(degrees2.iter().copied()).collect();
    profile1.sort();
    profile2.sort();
    if profile1 != profile2 {
        return None;
    }

    // assign high-degree vertices first; they are the most constrained
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| degrees1[b].cmp(&degrees1[a]));

    let search = Search {
        adj1: adjacency(g1),
        adj2: adjacency(g2),
        labels1,
        labels2,
        degrees1,
        degrees2,
        order,
        g2,
    };
    let mut mapping: Vec<Option<usize>> = vec![None; n];
    let mut used: Vec<bool> = vec![false; n];
    if backtrack(&search, 0, &mut mapping, &mut used, nodes) {
        Some(mapping.into_iter().map(|m| m.expect("complete")).collect())
    } else {
        None
    }
}

fn backtrack(
    s: &Search,
    depth: usize,
    mapping: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    nodes: &mut u64,
) -> bool {
    if depth == s.order.len() {
        return true;
    }
    let v = s.order[depth];
    for u in 0..s.g2.vertex_count() {
        if used[u] || s.labels1[v] != s.labels2[u] || s.degrees1[v] != s.degrees2[u] {
            continue;
        }
        // adjacency with every already-mapped vertex must match exactly
        let consistent = s.order[..depth]
            .iter()
            .all(|&w| s.adj1[v][w] == s.adj2[u][mapping[w].expect("mapped")]);
        if !consistent {
            continue;
        }
        *nodes += 1;
        mapping[v] = Some(u);
        used[u] = true;
        if backtrack(s, depth + 1, mapping, used, nodes) {
            return true;
        }
        mapping[v] = None;
        used[u] = false;
    }
    false
}

fn adjacency(g: &ExpressionGraph) -> Vec<Vec<bool>> {
    let n = g.vertex_count();
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in g.edges() {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

const SYMBOL_POOL: [&str; 20] = [
    "x", "y", "z", "u", "v", "w", "a", "b", "c", "d", "p", "q", "r", "s", "t", "k", "m", "n", "g",
    "h",
];

#[derive(Clone, Copy)]
enum GenOp {
    Add,
    Mul,
    Div,
    Pow,
    Neg,
    Func(FuncKind),
}

const ALL_OPS: [GenOp; 11] = [
    GenOp::Add,
    GenOp::Mul,
    GenOp::Div,
    GenOp::Pow,
    GenOp::Neg,
    GenOp::Func(FuncKind::Sin),
    GenOp::Func(FuncKind::Cos),
    GenOp::Func(FuncKind::Tan),
    GenOp::Func(FuncKind::Log),
    GenOp::Func(FuncKind::Exp),
    GenOp::Func(FuncKind::Sqrt),
];

/// Generates a random grammatical expression, deterministic in `seed`.
/// Operators are drawn uniformly from the supported set, leaves from the
/// first `symbol_pool` symbol names and the digits. For `max_depth <= 4`
/// the expression is regenerated until its graph fits the brute-force
/// limit, so generator output is always oracle-checkable at small depths.
pub fn gen_random_expr(seed: u64, max_depth: usize, symbol_pool: usize) -> String {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    assert!(symbol_pool >= 1, "symbol_pool must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    unparse(&gen_ast_bounded(
        &mut rng,
        max_depth,
        symbol_pool,
        &EncoderConfig::default(),
    ))
}

pub(crate) fn gen_ast_bounded(
    rng: &mut impl Rng,
    max_depth: usize,
    symbol_pool: usize,
    config: &EncoderConfig,
) -> Ast {
    loop {
        let ast = gen_ast(rng, max_depth, symbol_pool);
        if max_depth > 4 {
            return ast;
        }
        if graph_for_mode(&ast, config).vertex_count() <= DEFAULT_VERTEX_LIMIT {
            return ast;
        }
    }
}

fn gen_ast(rng: &mut impl Rng, depth: usize, symbol_pool: usize) -> Ast {
    if depth <= 1 || rng.random_ratio(3, 10) {
        return gen_leaf(rng, symbol_pool);
    }
    match ALL_OPS[rng.random_range(0..ALL_OPS.len())] {
        GenOp::Add => nary(rng, depth, symbol_pool, false),
        GenOp::Mul => nary(rng, depth, symbol_pool, true),
        GenOp::Div => Ast::Div(
            Box::new(gen_ast(rng, depth - 1, symbol_pool)),
            Box::new(gen_ast(rng, depth - 1, symbol_pool)),
        ),
        GenOp::Pow => Ast::Pow(
            Box::new(gen_ast(rng, depth - 1, symbol_pool)),
            Box::new(gen_ast(rng, depth - 1, symbol_pool)),
        ),
        GenOp::Neg => Ast::Neg(Box::new(gen_ast(rng, depth - 1, symbol_pool))),
        GenOp::Func(f) => Ast::Func(f, Box::new(gen_ast(rng, depth - 1, symbol_pool))),
    }
}

// N-ary nodes draw arity 2..=3; same-kind children are spliced so the
// result keeps the flat shape the parser produces.
fn nary(rng: &mut impl Rng, depth: usize, symbol_pool: usize, product: bool) -> Ast {
    let arity = rng.random_range(2..=3usize);
    let mut children: Vec<Ast> = Vec::with_capacity(arity);
    for _ in 0..arity {
        match (product, gen_ast(rng, depth - 1, symbol_pool)) {
            (true, Ast::Mul(cs)) | (false, Ast::Add(cs)) => children.extend(cs),
            (_, child) => children.push(child),
        }
    }
    if product {
        Ast::Mul(children)
    } else {
        Ast::Add(children)
    }
}

fn gen_leaf(rng: &mut impl Rng, symbol_pool: usize) -> Ast {
    if rng.random_bool(0.5) {
        let pool = symbol_pool.min(SYMBOL_POOL.len());
        Ast::Sym(SYMBOL_POOL[rng.random_range(0..pool)].to_string())
    } else {
        Ast::Num(rng.random_range(0..10u32).to_string())
    }
}

/// Builds the graph the code actually describes under `config`: binarized
/// first when the mode asks for it.
pub(crate) fn graph_for_mode(ast: &Ast, config: &EncoderConfig) -> ExpressionGraph {
    match config.mode {
        TreeMode::Binary => build_graph(&binarize(ast), config),
        TreeMode::Nary => build_graph(ast, config),
    }
}

/// Applies a random bijective renaming (preserved names stay fixed) and
/// random reorderings of commutative children. Under the default N-ary
/// mode the result is isomorphic to the input by construction.
pub(crate) fn make_twin(ast: &Ast, config: &EncoderConfig, rng: &mut impl Rng) -> Ast {
    let mut sources = Vec::new();
    collect_symbols(ast, &mut sources);
    sources.retain(|name| !config.preserve_symbols.contains(name));

    let mut candidates: Vec<&str> = SYMBOL_POOL
        .iter()
        .copied()
        .filter(|name| !config.preserve_symbols.contains(*name))
        .collect();
    candidates.shuffle(rng);

    let mapping: Vec<(String, String)> = sources
        .into_iter()
        .zip(&candidates)
        .map(|(src, dst)| (src, dst.to_string()))
        .collect();

    let mut twin = rename(ast, &mapping);
    shuffle_commutative(&mut twin, rng);
    twin
}

fn collect_symbols(ast: &Ast, out: &mut Vec<String>) {
    match ast {
        Ast::Sym(name) => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        Ast::Num(_) => {}
        Ast::Neg(c) | Ast::Func(_, c) => collect_symbols(c, out),
        Ast::Pow(a, b) | Ast::Div(a, b) => {
            collect_symbols(a, out);
            collect_symbols(b, out);
        }
        Ast::Add(cs) | Ast::Mul(cs) => cs.iter().for_each(|c| collect_symbols(c, out)),
    }
}

fn rename(ast: &Ast, mapping: &[(String, String)]) -> Ast {
    match ast {
        Ast::Sym(name) => Ast::Sym(
            mapping
                .iter()
                .find(|(src, _)| src == name)
                .map(|(_, dst)| dst.clone())
                .unwrap_or_else(|| name.clone()),
        ),
        Ast::Num(text) => Ast::Num(text.clone()),
        Ast::Neg(c) => Ast::Neg(Box::new(rename(c, mapping))),
        Ast::Func(f, c) => Ast::Func(*f, Box::new(rename(c, mapping))),
        Ast::Pow(a, b) => Ast::Pow(Box::new(rename(a, mapping)), Box::new(rename(b, mapping))),
        Ast::Div(a, b) => Ast::Div(Box::new(rename(a, mapping)), Box::new(rename(b, mapping))),
        Ast::Add(cs) => Ast::Add(cs.iter().map(|c| rename(c, mapping)).collect()),
        Ast::Mul(cs) => Ast::Mul(cs.iter().map(|c| rename(c, mapping)).collect()),
    }
}

fn shuffle_commutative(ast: &mut Ast, rng: &mut impl Rng) {
    match ast {
        Ast::Num(_) | Ast::Sym(_) => {}
        Ast::Neg(c) | Ast::Func(_, c) => shuffle_commutative(c, rng),
        Ast::Pow(a, b) | Ast::Div(a, b) => {
            shuffle_commutative(a, rng);
            shuffle_commutative(b, rng);
        }
        Ast::Add(cs) | Ast::Mul(cs) => {
            cs.iter_mut().for_each(|c| shuffle_commutative(c, rng));
            cs.shuffle(rng);
        }
    }
}

/// Aggregated disagreement counts between code equality and the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub pairs_tested: usize,
    /// Equal codes on oracle-non-isomorphic graphs. Any count here is an
    /// encoder bug.
    pub false_equal: usize,
    /// Oracle-isomorphic graphs with unequal codes.
    pub missed_equal: usize,
    /// Fraction of generated expressions whose encoding used the
    /// last-resort tie-break.
    pub tie_break_rate: f64,
    pub twin_pairs: usize,
    /// Twin pairs where neither side used the last-resort tie-break.
    pub clean_twin_pairs: usize,
    /// Clean twin pairs that were oracle-isomorphic yet coded unequally.
    pub clean_twin_missed: usize,
}

/// Runs `n_pairs` comparisons, alternating twin pairs (renaming plus
/// commutative shuffles of a base expression) and independent pairs, and
/// checks code equality against the oracle on each. Deterministic in
/// `seed`.
///
/// # Panics
///
/// Panics if `n_pairs` is zero.
pub fn evaluate(
    n_pairs: usize,
    seed: u64,
    config: &EncoderConfig,
) -> Result<EvalReport, OracleError> {
    assert!(n_pairs >= 1, "n_pairs must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = EvalReport {
        pairs_tested: 0,
        false_equal: 0,
        missed_equal: 0,
        tie_break_rate: 0.0,
        twin_pairs: 0,
        clean_twin_pairs: 0,
        clean_twin_missed: 0,
    };
    let mut expressions = 0usize;
    let mut tied_expressions = 0usize;

    while report.pairs_tested < n_pairs {
        let base = gen_ast_bounded(&mut rng, 4, 4, config);
        let twin = make_twin(&base, config, &mut rng);

        let base_enc = Encoded::new(&base, config)?;
        let twin_enc = Encoded::new(&twin, config)?;
        expressions += 2;
        tied_expressions += usize::from(base_enc.tied) + usize::from(twin_enc.tied);

        let verdict = iso_oracle(&base_enc.graph, &twin_enc.graph, DEFAULT_VERTEX_LIMIT)?;
        let codes_equal = base_enc.code == twin_enc.code;
        report.pairs_tested += 1;
        report.twin_pairs += 1;
        if codes_equal && !verdict.isomorphic {
            report.false_equal += 1;
        }
        if verdict.isomorphic && !codes_equal {
            report.missed_equal += 1;
        }
        if !base_enc.tied && !twin_enc.tied {
            report.clean_twin_pairs += 1;
            if verdict.isomorphic && !codes_equal {
                report.clean_twin_missed += 1;
            }
        }

        if report.pairs_tested < n_pairs {
            let other = gen_ast_bounded(&mut rng, 4, 4, config);
            let other_enc = Encoded::new(&other, config)?;
            expressions += 1;
            tied_expressions += usize::from(other_enc.tied);

            let verdict = iso_oracle(&base_enc.graph, &other_enc.graph, DEFAULT_VERTEX_LIMIT)?;
            let codes_equal = base_enc.code == other_enc.code;
            report.pairs_tested += 1;
            if codes_equal && !verdict.isomorphic {
                report.false_equal += 1;
            }
            if verdict.isomorphic && !codes_equal {
                report.missed_equal += 1;
            }
        }
    }

    report.tie_break_rate = tied_expressions as f64 / expressions as f64;
    Ok(report)
}

struct Encoded {
    graph: ExpressionGraph,
    code: CanonicalCode,
    tied: bool,
}

impl Encoded {
    fn new(ast: &Ast, config: &EncoderConfig) -> Result<Encoded, OracleError> {
        let text = unparse(ast);
        let canonical = crate::encode::encode_graph(&text, config).map_err(OracleError::Encode)?;
        Ok(Encoded {
            graph: graph_for_mode(ast, config),
            code: CanonicalCode::from_graph(&canonical),
            tied: canonical.tie_break_events() > 0,
        })
    }
}
