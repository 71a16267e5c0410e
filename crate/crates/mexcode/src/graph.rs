//! Conversion of a parsed expression into an undirected labeled graph.
//!
//! The graph is the expression tree with one twist: all occurrences of the
//! same symbol name collapse into a single shared leaf vertex, so `sin(x) *
//! cos(x)` has a single `x` vertex adjacent to both function vertices.
//! Numeric literals keep one vertex per occurrence; collapsing them would
//! leak constant values into the structure.

use std::collections::{BTreeSet, HashMap};

use crate::config::EncoderConfig;
use crate::parser::{Ast, FuncKind};

/// Operator vertex kinds. The discriminant order is also the fixed rank
/// used by the canonical child sort.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Pow,
    Mul,
    Div,
    Add,
    Neg,
    Sin,
    Cos,
    Tan,
    Log,
    Exp,
    Sqrt,
}

impl OpKind {
    /// Sort rank: powers first, trig and other functions last.
    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Pow => "Pow",
            OpKind::Mul => "Mul",
            OpKind::Div => "Div",
            OpKind::Add => "Add",
            OpKind::Neg => "Neg",
            OpKind::Sin => "Sin",
            OpKind::Cos => "Cos",
            OpKind::Tan => "Tan",
            OpKind::Log => "Log",
            OpKind::Exp => "Exp",
            OpKind::Sqrt => "Sqrt",
        }
    }

    /// Operand order is meaningless for these; the canonical sort may
    /// rearrange their children.
    pub fn is_commutative(self) -> bool {
        matches!(self, OpKind::Add | OpKind::Mul)
    }
}

impl From<FuncKind> for OpKind {
    fn from(func: FuncKind) -> OpKind {
        match func {
            FuncKind::Sin => OpKind::Sin,
            FuncKind::Cos => OpKind::Cos,
            FuncKind::Tan => OpKind::Tan,
            FuncKind::Log => OpKind::Log,
            FuncKind::Exp => OpKind::Exp,
            FuncKind::Sqrt => OpKind::Sqrt,
        }
    }
}

/// Vertex label. `preserved` leaves keep their source text in the emitted
/// code (`Sym:pi`, `Num:3.14`); everything else erases to `Sym`/`Num`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexLabel {
    Sym { name: String, preserved: bool },
    Num { text: String, preserved: bool },
    Op(OpKind),
}

impl VertexLabel {
    /// Label text as it appears in the code string.
    pub fn emitted(&self) -> String {
        match self {
            VertexLabel::Sym {
                name,
                preserved: true,
            } => format!("Sym:{name}"),
            VertexLabel::Sym { .. } => "Sym".to_string(),
            VertexLabel::Num {
                text,
                preserved: true,
            } => format!("Num:{text}"),
            VertexLabel::Num { .. } => "Num".to_string(),
            VertexLabel::Op(op) => op.name().to_string(),
        }
    }

    /// Carried source text: symbol name, numeral, or operator name. Never
    /// emitted unless preserved; used for display and last-resort ties.
    pub fn detail(&self) -> &str {
        match self {
            VertexLabel::Sym { name, .. } => name,
            VertexLabel::Num { text, .. } => text,
            VertexLabel::Op(op) => op.name(),
        }
    }

    pub fn op(&self) -> Option<OpKind> {
        match self {
            VertexLabel::Op(op) => Some(*op),
            _ => None,
        }
    }

    pub fn is_op(&self) -> bool {
        matches!(self, VertexLabel::Op(_))
    }
}

/// Undirected labeled expression graph.
///
/// Invariants: the edge set is exactly the parent-child pairs implied by
/// `children`; operator vertices form a tree rooted at `root`; symbol
/// leaves may be shared between operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpressionGraph {
    pub(crate) vertices: Vec<VertexLabel>,
    pub(crate) edges: BTreeSet<(usize, usize)>,
    pub(crate) root: usize,
    /// Operand order per vertex; empty for leaves. Kept because it is
    /// needed both before canonicalization and for non-commutative
    /// operators afterwards.
    pub(crate) children: Vec<Vec<usize>>,
}

impl ExpressionGraph {
    pub fn vertices(&self) -> &[VertexLabel] {
        &self.vertices
    }

    /// Edges as index pairs with the smaller index first.
    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn children_of(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }
}

/// Builds the expression graph for `ast`. One operator vertex per operator
/// node, one shared vertex per distinct symbol name, one vertex per numeric
/// literal occurrence.
pub fn build_graph(ast: &Ast, config: &EncoderConfig) -> ExpressionGraph {
    let mut builder = Builder {
        vertices: Vec::new(),
        edges: BTreeSet::new(),
        children: Vec::new(),
        symbols: HashMap::new(),
        config,
    };
    let root = builder.walk(ast, false);
    ExpressionGraph {
        vertices: builder.vertices,
        edges: builder.edges,
        root,
        children: builder.children,
    }
}

struct Builder<'c> {
    vertices: Vec<VertexLabel>,
    edges: BTreeSet<(usize, usize)>,
    children: Vec<Vec<usize>>,
    symbols: HashMap<String, usize>,
    config: &'c EncoderConfig,
}

impl Builder<'_> {
    fn new_vertex(&mut self, label: VertexLabel) -> usize {
        self.vertices.push(label);
        self.children.push(Vec::new());
        self.vertices.len() - 1
    }

    fn op_vertex(&mut self, op: OpKind, operands: Vec<usize>) -> usize {
        let v = self.new_vertex(VertexLabel::Op(op));
        for &c in &operands {
            self.edges.insert((v.min(c), v.max(c)));
        }
        self.children[v] = operands;
        v
    }

    // `exponent` is true only for the node sitting directly in the
    // exponent slot of a power; it does not propagate further down.
    fn walk(&mut self, ast: &Ast, exponent: bool) -> usize {
        match ast {
            Ast::Num(text) => {
                let preserved = self.config.preserve_numbers.contains(text)
                    || (exponent && self.config.preserve_exponents.contains(text));
                self.new_vertex(VertexLabel::Num {
                    text: text.clone(),
                    preserved,
                })
            }
            Ast::Sym(name) => {
                if let Some(&v) = self.symbols.get(name) {
                    return v;
                }
                let preserved = self.config.preserve_symbols.contains(name);
                let v = self.new_vertex(VertexLabel::Sym {
                    name: name.clone(),
                    preserved,
                });
                self.symbols.insert(name.clone(), v);
                v
            }
            Ast::Neg(inner) => {
                let c = self.walk(inner, false);
                self.op_vertex(OpKind::Neg, vec![c])
            }
            Ast::Func(func, inner) => {
                let c = self.walk(inner, false);
                self.op_vertex((*func).into(), vec![c])
            }
            Ast::Pow(base, exp) => {
                let b = self.walk(base, false);
                let e = self.walk(exp, true);
                self.op_vertex(OpKind::Pow, vec![b, e])
            }
            Ast::Div(num, den) => {
                let n = self.walk(num, false);
                let d = self.walk(den, false);
                self.op_vertex(OpKind::Div, vec![n, d])
            }
            Ast::Add(terms) => {
                let operands = terms.iter().map(|t| self.walk(t, false)).collect();
                self.op_vertex(OpKind::Add, operands)
            }
            Ast::Mul(factors) => {
                let operands = factors.iter().map(|f| self.walk(f, false)).collect();
                self.op_vertex(OpKind::Mul, operands)
            }
        }
    }
}

/// Rewrites every N-ary `Add`/`Mul` into nested binary nodes: the last two
/// children pair up innermost, then each earlier child wraps around the
/// accumulated subtree.
///
/// The output intentionally nests `Add` under `Add` (and `Mul` under
/// `Mul`); it is meant to feed [`build_graph`] directly, not to be printed
/// and re-parsed.
pub fn binarize(ast: &Ast) -> Ast {
    match ast {
        Ast::Num(_) | Ast::Sym(_) => ast.clone(),
        Ast::Neg(inner) => Ast::Neg(Box::new(binarize(inner))),
        Ast::Func(func, inner) => Ast::Func(*func, Box::new(binarize(inner))),
        Ast::Pow(base, exp) => Ast::Pow(Box::new(binarize(base)), Box::new(binarize(exp))),
        Ast::Div(num, den) => Ast::Div(Box::new(binarize(num)), Box::new(binarize(den))),
        Ast::Add(terms) => nest_binary(terms, Ast::Add),
        Ast::Mul(factors) => nest_binary(factors, Ast::Mul),
    }
}

fn nest_binary(children: &[Ast], make: fn(Vec<Ast>) -> Ast) -> Ast {
    let children: Vec<Ast> = children.iter().map(binarize).collect();
    let n = children.len();
    debug_assert!(n >= 2);
    let mut iter = children.into_iter().rev();
    let last = iter.next().expect("arity >= 2");
    let second_last = iter.next().expect("arity >= 2");
    let mut acc = make(vec![second_last, last]);
    for child in iter {
        acc = make(vec![acc, child]);
    }
    acc
}
