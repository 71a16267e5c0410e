//! Structural codes for mathematical expressions.
//!
//! An expression such as `x^2 + y` is parsed into an expression tree,
//! turned into an undirected labeled graph with shared symbol leaves,
//! canonically ordered, and serialized as the upper-triangular adjacency
//! bitstring followed by the vertex labels:
//!
//! ```
//! use mexcode::{encode, EncoderConfig};
//!
//! let code = encode("x^2+y", &EncoderConfig::default()).unwrap();
//! assert_eq!(code.code(), "0010010011SymNumSymPowAdd");
//!
//! // variable names never make it into the code
//! let renamed = encode("a^2+b", &EncoderConfig::default()).unwrap();
//! assert_eq!(code, renamed);
//! ```
//!
//! Equal codes witness isomorphic expression graphs (the shared canonical
//! order is the bijection), so exact structural matching is string
//! equality. The converse is approximate: expressions whose canonical
//! ordering fell back to the alphabetical tie-break may receive different
//! codes under renaming; [`CanonicalGraph::tie_break_events`] reports when
//! that happened, and the [`oracle`] module measures how often it matters.

pub mod canonical;
pub mod config;
pub mod encode;
pub mod graph;
pub mod index;
pub mod oracle;
pub mod parser;

pub use canonical::{canonicalize, order_vertices, sort_children, CanonError, CanonicalGraph};
pub use config::{ConfigError, EncoderConfig, TieBreak, TreeMode};
pub use encode::{
    code_distance, encode, encode_graph, parse_code, CanonicalCode, EncodeError, MalformedCode,
};
pub use graph::{binarize, build_graph, ExpressionGraph, OpKind, VertexLabel};
pub use index::{CorpusEntry, CorpusIndex, IndexError, QueryHit};
pub use oracle::{evaluate, gen_random_expr, iso_oracle, EvalReport, IsoVerdict, OracleError};
pub use parser::{
    parse, parse_str, tokenize, unparse, Ast, FuncKind, ParseError, Token, TokenKind,
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_types_are_shareable_across_threads() {
        fn check<T: Send + Sync>() {}
        check::<ExpressionGraph>();
        check::<CanonicalGraph>();
        check::<CanonicalCode>();
        check::<EncoderConfig>();
        check::<CorpusIndex>();
        check::<oracle::EvalReport>();
    }
}
