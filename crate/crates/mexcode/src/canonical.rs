//! Canonical ordering of commutative children and of the vertex list, so
//! that structurally isomorphic expressions come out with identical
//! adjacency matrices.
//!
//! Children of `Add`/`Mul` are sorted by a three-stage cascade:
//!
//! 1. a purely structural key (operator subtrees first, then symbols, then
//!    numbers; operators by a fixed rank table; recursively by child keys),
//! 2. the symbol-incidence signature: where else the shared symbols inside
//!    the child occur, described by the operator ranks of those occurrences'
//!    ancestor chains — structural, so safe for invariance,
//! 3. last resort: the carried symbol/numeral text, alphabetically.
//!
//! Stage 3 compares the very names the code is meant to erase, so every
//! child pair whose order it decides is counted in `tie_break_events`; a
//! nonzero count marks codes whose stability across renamings is not
//! guaranteed. The vertex list is then leaves in first-visit order of the
//! canonical traversal followed by operators in post-order, root last.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::config::TieBreak;
use crate::graph::{ExpressionGraph, VertexLabel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CanonError {
    /// Two children are indistinguishable except by symbol or numeral text
    /// and the policy is [`TieBreak::Reject`].
    #[error("ambiguous ordering: children distinguishable only by their symbol or numeral text")]
    AmbiguousOrdering,
}

/// Structural sort key for a child subtree. Compares lexicographically as
/// (class_rank, op_rank, child_keys); ties between structurally identical
/// subtrees are possible and resolved by the later cascade stages.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StructuralKey {
    /// 0 = operator-rooted subtree, 1 = symbol leaf, 2 = number leaf.
    class_rank: u8,
    /// Operator rank table, or `u8::MAX` for leaves.
    op_rank: u8,
    /// Child keys, sorted ascending.
    child_keys: Vec<StructuralKey>,
}

impl StructuralKey {
    const LEAF_RANK: u8 = u8::MAX;
}

/// Graph with vertices in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGraph {
    vertices: Vec<VertexLabel>,
    edges: BTreeSet<(usize, usize)>,
    tie_break_events: u32,
}

impl CanonicalGraph {
    pub fn vertices(&self) -> &[VertexLabel] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of child pairs whose order was decided by the last-resort
    /// alphabetical stage.
    pub fn tie_break_events(&self) -> u32 {
        self.tie_break_events
    }

    pub fn emitted_labels(&self) -> Vec<String> {
        self.vertices.iter().map(|v| v.emitted()).collect()
    }

    /// Full symmetric adjacency matrix.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.vertices.len();
        let mut m = vec![vec![0u8; n]; n];
        for &(a, b) in &self.edges {
            m[a][b] = 1;
            m[b][a] = 1;
        }
        m
    }
}

/// Sorts the children of every commutative vertex by the cascade described
/// in the module docs. Non-commutative vertices keep their operand order.
pub fn sort_children(
    graph: &ExpressionGraph,
    tie_break: TieBreak,
) -> Result<ExpressionGraph, CanonError> {
    sort_children_counting(graph, tie_break).map(|(g, _)| g)
}

pub(crate) fn sort_children_counting(
    graph: &ExpressionGraph,
    tie_break: TieBreak,
) -> Result<(ExpressionGraph, u32), CanonError> {
    let mut g = graph.clone();
    let ctx = StaticCtx::new(&g);
    let mut tie_memo: Vec<Option<String>> = vec![None; g.vertex_count()];
    let mut events = 0u32;
    for &v in &ctx.ops_post_order {
        let commutative = g.vertices[v].op().is_some_and(|op| op.is_commutative());
        if commutative && g.children[v].len() > 1 {
            let mut decorated = decorate_children(&g, &ctx, v, &mut tie_memo);
            decorated.sort_by(|a, b| {
                a.key
                    .cmp(&b.key)
                    .then_with(|| a.signature.cmp(&b.signature))
                    .then_with(|| a.tie_text.cmp(&b.tie_text))
            });
            let new_events = count_stage2_pairs(&decorated);
            if new_events > 0 && tie_break == TieBreak::Reject {
                return Err(CanonError::AmbiguousOrdering);
            }
            events += new_events;
            g.children[v] = decorated.into_iter().map(|d| d.child).collect();
        }
        // children of v are final now, so its tie text may be memoized
        tie_text(&g, v, &mut tie_memo);
    }
    Ok((g, events))
}

/// Lists vertices canonically: leaves in first-visit order of the traversal
/// that follows the (sorted) child order from the root, then operators in
/// post-order. Shared symbols appear once, at their first encounter; the
/// root operator is always last.
pub fn order_vertices(graph: &ExpressionGraph) -> CanonicalGraph {
    let n = graph.vertex_count();
    let mut leaf_order = Vec::new();
    let mut op_order = Vec::new();
    let mut seen = vec![false; n];
    visit(
        graph,
        graph.root(),
        &mut seen,
        &mut leaf_order,
        &mut op_order,
    );
    let order: Vec<usize> = leaf_order.into_iter().chain(op_order).collect();
    debug_assert_eq!(order.len(), n);

    let mut new_index = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let vertices = order
        .iter()
        .map(|&old| graph.vertices[old].clone())
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (new_index[a], new_index[b]);
            (x.min(y), x.max(y))
        })
        .collect();
    CanonicalGraph {
        vertices,
        edges,
        tie_break_events: count_tie_events(graph),
    }
}

/// Full canonicalization: [`sort_children`] then [`order_vertices`].
pub fn canonicalize(
    graph: &ExpressionGraph,
    tie_break: TieBreak,
) -> Result<CanonicalGraph, CanonError> {
    let (sorted, _) = sort_children_counting(graph, tie_break)?;
    Ok(order_vertices(&sorted))
}

fn visit(
    g: &ExpressionGraph,
    v: usize,
    seen: &mut [bool],
    leaf_order: &mut Vec<usize>,
    op_order: &mut Vec<usize>,
) {
    if !g.vertices[v].is_op() {
        if !seen[v] {
            seen[v] = true;
            leaf_order.push(v);
        }
        return;
    }
    seen[v] = true;
    for &c in &g.children[v] {
        visit(g, c, seen, leaf_order, op_order);
    }
    op_order.push(v);
}

/// Counts last-resort decisions on an already child-sorted graph.
fn count_tie_events(graph: &ExpressionGraph) -> u32 {
    let ctx = StaticCtx::new(graph);
    let mut tie_memo: Vec<Option<String>> = vec![None; graph.vertex_count()];
    let mut events = 0u32;
    for &v in &ctx.ops_post_order {
        let commutative = graph.vertices[v].op().is_some_and(|op| op.is_commutative());
        if commutative && graph.children[v].len() > 1 {
            let decorated = decorate_children(graph, &ctx, v, &mut tie_memo);
            events += count_stage2_pairs(&decorated);
        }
    }
    events
}

struct Decorated {
    key: StructuralKey,
    signature: Vec<u8>,
    tie_text: String,
    child: usize,
}

fn decorate_children(
    g: &ExpressionGraph,
    ctx: &StaticCtx,
    v: usize,
    tie_memo: &mut Vec<Option<String>>,
) -> Vec<Decorated> {
    g.children[v]
        .iter()
        .map(|&c| Decorated {
            key: ctx.keys[c].clone(),
            signature: signature(g, ctx, v, c),
            tie_text: tie_text(g, c, tie_memo),
            child: c,
        })
        .collect()
}

// Adjacent sorted pairs that tie on (key, signature) but differ in text are
// exactly the orderings decided alphabetically. Pairs equal on all three
// are interchangeable (swapping them is a graph automorphism) and do not
// count.
fn count_stage2_pairs(decorated: &[Decorated]) -> u32 {
    decorated
        .windows(2)
        .filter(|pair| {
            pair[0].key == pair[1].key
                && pair[0].signature == pair[1].signature
                && pair[0].tie_text != pair[1].tie_text
        })
        .count() as u32
}

/// The symbol-incidence signature of child `c` under operator `v`: for
/// every shared symbol inside `c`'s subtree, every occurrence outside the
/// subtree contributes the operator ranks of its ancestor chain. The
/// occurrence of `c` itself under `v` is not an "other" occurrence and is
/// skipped once.
fn signature(g: &ExpressionGraph, ctx: &StaticCtx, v: usize, c: usize) -> Vec<u8> {
    let mut in_subtree = vec![false; g.vertex_count()];
    let mut stack = vec![c];
    while let Some(u) = stack.pop() {
        if in_subtree[u] {
            continue;
        }
        in_subtree[u] = true;
        stack.extend_from_slice(&g.children[u]);
    }
    let mut ranks = Vec::new();
    let mut skipped_own = false;
    for s in 0..g.vertex_count() {
        if !in_subtree[s] || !matches!(g.vertices[s], VertexLabel::Sym { .. }) {
            continue;
        }
        for &p in &ctx.sym_ops[s] {
            if in_subtree[p] {
                continue;
            }
            if !skipped_own && s == c && p == v {
                skipped_own = true;
                continue;
            }
            ranks.extend_from_slice(&ctx.chain_ranks[p]);
        }
    }
    ranks.sort_unstable();
    ranks
}

// Pre-order concatenation of carried detail texts; shared symbols
// contribute at every encounter. Memoized only once a vertex's children
// are final.
fn tie_text(g: &ExpressionGraph, v: usize, memo: &mut Vec<Option<String>>) -> String {
    if let Some(s) = &memo[v] {
        return s.clone();
    }
    let mut s = g.vertices[v].detail().to_string();
    for &c in &g.children[v].clone() {
        s.push_str(&tie_text(g, c, memo));
    }
    memo[v] = Some(s.clone());
    s
}

/// Order-independent facts about a graph: structural keys, operator
/// ancestor rank chains, symbol incidence lists, and the operator
/// post-order. None of these depend on child order or leaf names (keys use
/// sorted child keys), so they stay valid while children are being sorted.
struct StaticCtx {
    keys: Vec<StructuralKey>,
    chain_ranks: Vec<Vec<u8>>,
    sym_ops: Vec<Vec<usize>>,
    ops_post_order: Vec<usize>,
}

impl StaticCtx {
    fn new(g: &ExpressionGraph) -> StaticCtx {
        let n = g.vertex_count();

        let mut op_parent: Vec<Option<usize>> = vec![None; n];
        let mut sym_ops: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            if !g.vertices[v].is_op() {
                continue;
            }
            for &c in &g.children[v] {
                match &g.vertices[c] {
                    VertexLabel::Op(_) => op_parent[c] = Some(v),
                    VertexLabel::Sym { .. } => sym_ops[c].push(v),
                    VertexLabel::Num { .. } => {}
                }
            }
        }

        let mut chain_ranks: Vec<Vec<u8>> = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(op) = g.vertices[v].op() {
                let mut chain = vec![op.rank()];
                let mut cur = op_parent[v];
                while let Some(u) = cur {
                    chain.push(g.vertices[u].op().expect("op parent is an op").rank());
                    cur = op_parent[u];
                }
                chain_ranks[v] = chain;
            }
        }

        let mut ops_post_order = Vec::new();
        collect_ops_post_order(g, g.root(), &mut ops_post_order);

        let mut keys: Vec<Option<StructuralKey>> = vec![None; n];
        structural_key(g, g.root(), &mut keys);
        // shared leaves reachable only as children still need keys
        for v in 0..n {
            structural_key(g, v, &mut keys);
        }
        let keys = keys.into_iter().map(|k| k.expect("key computed")).collect();

        StaticCtx {
            keys,
            chain_ranks,
            sym_ops,
            ops_post_order,
        }
    }
}

fn collect_ops_post_order(g: &ExpressionGraph, v: usize, out: &mut Vec<usize>) {
    if !g.vertices[v].is_op() {
        return;
    }
    for &c in &g.children[v] {
        collect_ops_post_order(g, c, out);
    }
    out.push(v);
}

fn structural_key(
    g: &ExpressionGraph,
    v: usize,
    memo: &mut Vec<Option<StructuralKey>>,
) -> StructuralKey {
    if let Some(k) = &memo[v] {
        return k.clone();
    }
    let key = match &g.vertices[v] {
        VertexLabel::Op(op) => {
            let mut child_keys: Vec<StructuralKey> = g.children[v]
                .clone()
                .iter()
                .map(|&c| structural_key(g, c, memo))
                .collect();
            child_keys.sort();
            StructuralKey {
                class_rank: 0,
                op_rank: op.rank(),
                child_keys,
            }
        }
        VertexLabel::Sym { .. } => StructuralKey {
            class_rank: 1,
            op_rank: StructuralKey::LEAF_RANK,
            child_keys: Vec::new(),
        },
        VertexLabel::Num { .. } => StructuralKey {
            class_rank: 2,
            op_rank: StructuralKey::LEAF_RANK,
            child_keys: Vec::new(),
        },
    };
    memo[v] = Some(key.clone());
    key
}
