//! Code string emission, parsing, and the edit distance used for
//! approximate ranking.
//!
//! A code is the concatenated upper-triangular adjacency rows of the
//! canonical graph followed by the emitted vertex labels, with no
//! separators: `x^2+y` encodes to `0010010011SymNumSymPowAdd`. The split
//! point is recoverable because n labels always come with n(n-1)/2 bits and
//! no label starts with a `0` or `1`.

use std::fmt;

use thiserror::Error;

use crate::canonical::{self, CanonError, CanonicalGraph};
use crate::config::{EncoderConfig, TreeMode};
use crate::graph::{binarize, build_graph};
use crate::parser::{self, parse_str, ParseError};

/// Errors from the full encoding pipeline.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Canon(#[from] CanonError),
}

/// Error from [`parse_code`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed code: {reason}")]
pub struct MalformedCode {
    pub reason: String,
}

fn malformed(reason: impl Into<String>) -> MalformedCode {
    MalformedCode {
        reason: reason.into(),
    }
}

/// A structural code: adjacency bitstring plus emitted labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalCode {
    bits: String,
    labels: Vec<String>,
}

impl CanonicalCode {
    /// Emits the code for a canonical graph: upper-triangular rows i =
    /// 0..n-2, each covering columns j = i+1..n-1, then the labels.
    pub fn from_graph(graph: &CanonicalGraph) -> CanonicalCode {
        let n = graph.vertex_count();
        let mut bits = String::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                bits.push(if graph.edges().contains(&(i, j)) {
                    '1'
                } else {
                    '0'
                });
            }
        }
        CanonicalCode {
            bits,
            labels: graph.emitted_labels(),
        }
    }

    pub fn bits(&self) -> &str {
        &self.bits
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    /// The full code string: bits and labels concatenated.
    pub fn code(&self) -> String {
        let mut s = self.bits.clone();
        for label in &self.labels {
            s.push_str(label);
        }
        s
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// Runs the full pipeline: parse, binarize when configured, build the
/// graph, canonicalize, emit.
pub fn encode(expression: &str, config: &EncoderConfig) -> Result<CanonicalCode, EncodeError> {
    Ok(CanonicalCode::from_graph(&encode_graph(
        expression, config,
    )?))
}

/// Like [`encode`] but stops at the canonical graph, which additionally
/// carries the tie-break count and adjacency structure.
pub fn encode_graph(
    expression: &str,
    config: &EncoderConfig,
) -> Result<CanonicalGraph, EncodeError> {
    let ast = parse_str(expression)?;
    let ast = match config.mode {
        TreeMode::Binary => binarize(&ast),
        TreeMode::Nary => ast,
    };
    let graph = build_graph(&ast, config);
    Ok(canonical::canonicalize(&graph, config.tie_break)?)
}

// Label tokens; no entry is a prefix of another, so first match wins.
const LABEL_NAMES: [&str; 13] = [
    "Sqrt", "Sym", "Num", "Sin", "Cos", "Tan", "Log", "Exp", "Pow", "Mul", "Div", "Add", "Neg",
];

/// Splits a code string back into bits and labels, validating the
/// n(n-1)/2 length relation.
pub fn parse_code(code: &str) -> Result<CanonicalCode, MalformedCode> {
    let chars: Vec<char> = code.chars().collect();
    let mut split = 0;
    while split < chars.len() && (chars[split] == '0' || chars[split] == '1') {
        split += 1;
    }
    let bits: String = chars[..split].iter().collect();
    let label_chars = &chars[split..];
    if label_chars.is_empty() {
        return Err(malformed("no vertex labels"));
    }
    let labels = tokenize_labels(label_chars)?;
    let n = labels.len();
    let expected_bits = n * (n - 1) / 2;
    if bits.len() != expected_bits {
        return Err(malformed(format!(
            "{n} labels require {expected_bits} adjacency bits, found {}",
            bits.len()
        )));
    }
    Ok(CanonicalCode { bits, labels })
}

fn tokenize_labels(chars: &[char]) -> Result<Vec<String>, MalformedCode> {
    let mut labels = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let Some(name) = parser::match_name(&chars[i..], &LABEL_NAMES) else {
            let tail: String = chars[i..].iter().take(12).collect();
            return Err(malformed(format!("unknown label at {tail:?}")));
        };
        i += name.len();
        let preservable = name == "Sym" || name == "Num";
        if preservable && chars.get(i) == Some(&':') {
            i += 1;
            let detail = if name == "Sym" {
                read_symbol_name(chars, &mut i)?
            } else {
                read_numeral(chars, &mut i)?
            };
            labels.push(format!("{name}:{detail}"));
        } else {
            labels.push(name.to_string());
        }
    }
    Ok(labels)
}

fn read_symbol_name(chars: &[char], i: &mut usize) -> Result<String, MalformedCode> {
    if let Some(greek) = parser::match_name(&chars[*i..], &parser::GREEK_NAMES) {
        *i += greek.len();
        return Ok(greek.to_string());
    }
    match chars.get(*i) {
        Some(&c) if c.is_alphabetic() => {
            *i += 1;
            Ok(c.to_string())
        }
        _ => Err(malformed("preserved symbol label has no name")),
    }
}

fn read_numeral(chars: &[char], i: &mut usize) -> Result<String, MalformedCode> {
    let start = *i;
    while chars.get(*i).is_some_and(|c| c.is_ascii_digit()) {
        *i += 1;
    }
    if *i == start {
        return Err(malformed("preserved number label has no numeral"));
    }
    if chars.get(*i) == Some(&'.') && chars.get(*i + 1).is_some_and(|c| c.is_ascii_digit()) {
        *i += 1;
        while chars.get(*i).is_some_and(|c| c.is_ascii_digit()) {
            *i += 1;
        }
    }
    Ok(chars[start..*i].iter().collect())
}

/// Normalized edit distance between two code strings: Levenshtein distance
/// over characters divided by the longer length. 0 exactly when the codes
/// are equal, 1 when nothing aligns; symmetric.
///
/// Note this max-length normalization is not a true metric (the triangle
/// inequality can fail through a longer intermediate string), which is
/// acceptable for ranking.
pub fn code_distance(a: &CanonicalCode, b: &CanonicalCode) -> f64 {
    let s: Vec<char> = a.code().chars().collect();
    let t: Vec<char> = b.code().chars().collect();
    let longest = s.len().max(t.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(&s, &t) as f64 / longest as f64
}

fn levenshtein(s: &[char], t: &[char]) -> usize {
    if s.is_empty() {
        return t.len();
    }
    let mut row: Vec<usize> = (0..=t.len()).collect();
    for (i, &sc) in s.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, &tc) in t.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = (up + 1)
                .min(row[j] + 1)
                .min(diagonal + usize::from(sc != tc));
            diagonal = up;
        }
    }
    row[t.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TieBreak;

    fn code_of(source: &str) -> String {
        encode(source, &EncoderConfig::default()).unwrap().code()
    }

    #[test]
    fn golden_power_sum() {
        assert_eq!(code_of("x^2+y"), "0010010011SymNumSymPowAdd");
    }

    #[test]
    fn golden_square_of_sum() {
        assert_eq!(code_of("(x+y)^2"), "0010010011SymSymNumAddPow");
    }

    #[test]
    fn golden_quotient() {
        assert_eq!(
            code_of("(2xy+5)/y"),
            "000100001010100010101SymSymNumNumMulAddDiv"
        );
    }

    #[test]
    fn golden_trig_product() {
        // root of a product is Mul; the adjacency bits are 110011
        assert_eq!(code_of("sin(x)cos(x)"), "110011SymSinCosMul");
    }

    #[test]
    fn single_vertex_code() {
        assert_eq!(code_of("x"), "Sym");
        assert_eq!(code_of("7"), "Num");
    }

    #[test]
    fn three_vertex_sum() {
        assert_eq!(code_of("x+y"), "011SymSymAdd");
    }

    #[test]
    fn renamed_and_reordered_expressions_share_a_code() {
        let target = "0010010011SymNumSymPowAdd";
        assert_eq!(code_of("a^2+b"), target);
        assert_eq!(code_of("x+y^2"), target);
        assert_eq!(code_of("t+s^2"), target);
    }

    #[test]
    fn preserved_number_keeps_its_text() {
        let mut config = EncoderConfig::default();
        config.preserve_numbers.insert("3.14".to_string());
        let code = encode("3.14*r^2", &config).unwrap();
        assert!(code.labels().contains(&"Num:3.14".to_string()));
        // an unrelated constant is still erased
        let other = encode("2.71*r^2", &config).unwrap();
        assert!(other
            .labels()
            .iter()
            .all(|l| l == "Num" || !l.starts_with("Num:")));
    }

    #[test]
    fn preserved_symbol_keeps_its_name_under_renaming() {
        let mut config = EncoderConfig::default();
        config.preserve_symbols.insert("pi".to_string());
        let with_r = encode("pi*r^2", &config).unwrap();
        assert!(with_r.labels().contains(&"Sym:pi".to_string()));
        // the non-preserved symbol is still erasable
        let with_s = encode("pi*s^2", &config).unwrap();
        assert_eq!(with_r, with_s);
    }

    #[test]
    fn preserved_exponent_distinguishes_squares_from_cubes() {
        let mut config = EncoderConfig::default();
        config.preserve_exponents.insert("2".to_string());
        let square_x = encode("x^2", &config).unwrap();
        let square_y = encode("y^2", &config).unwrap();
        let cube_y = encode("y^3", &config).unwrap();
        assert_eq!(square_x, square_y);
        assert_ne!(square_x, cube_y);
    }

    #[test]
    fn binary_mode_produces_distinct_codes() {
        let nary = encode("a+b+c", &EncoderConfig::default()).unwrap();
        let config = EncoderConfig {
            mode: TreeMode::Binary,
            ..EncoderConfig::default()
        };
        let binary = encode("a+b+c", &config).unwrap();
        assert_ne!(nary.code(), binary.code());
        assert_eq!(binary.vertex_count(), 5); // a, b, c, Add, Add
    }

    #[test]
    fn reject_mode_propagates_ambiguity() {
        let config = EncoderConfig {
            tie_break: TieBreak::Reject,
            ..EncoderConfig::default()
        };
        assert!(matches!(
            encode("x+y", &config),
            Err(EncodeError::Canon(CanonError::AmbiguousOrdering))
        ));
    }

    #[test]
    fn parse_errors_pass_through() {
        assert!(matches!(
            encode("x+", &EncoderConfig::default()),
            Err(EncodeError::Parse(ParseError::UnexpectedToken { .. }))
        ));
    }

    #[test]
    fn parse_code_splits_golden_string() {
        let code = parse_code("0010010011SymNumSymPowAdd").unwrap();
        assert_eq!(code.bits(), "0010010011");
        assert_eq!(code.labels(), ["Sym", "Num", "Sym", "Pow", "Add"]);
    }

    #[test]
    fn parse_code_single_label() {
        let code = parse_code("Sym").unwrap();
        assert_eq!(code.bits(), "");
        assert_eq!(code.labels(), ["Sym"]);
    }

    #[test]
    fn parse_code_preserved_labels() {
        let code = parse_code("011Sym:piNum:3.14Mul").unwrap();
        assert_eq!(code.labels(), ["Sym:pi", "Num:3.14", "Mul"]);
        // preserved names may be any single letter, including non-ASCII
        let code = parse_code("011Sym:αSymAdd").unwrap();
        assert_eq!(code.labels(), ["Sym:α", "Sym", "Add"]);
    }

    #[test]
    fn preserved_unicode_symbol_round_trips_through_its_code() {
        let mut config = EncoderConfig::default();
        config.preserve_symbols.insert("α".to_string());
        let code = encode("α^2+β", &config).unwrap();
        assert!(code.labels().contains(&"Sym:α".to_string()));
        assert_eq!(parse_code(&code.code()).unwrap(), code);
    }

    #[test]
    fn parse_code_rejects_inconsistent_lengths() {
        // 3 labels need 3 bits, 10 given
        assert!(parse_code("0010010011SymNumSym").is_err());
        assert!(parse_code("01").is_err());
        assert!(parse_code("").is_err());
        assert!(parse_code("Bogus").is_err());
        assert!(parse_code("011SymSymAddQ").is_err());
    }

    #[test]
    fn parse_code_inverts_encode() {
        for source in ["x^2+y", "(2xy+5)/y", "sin(x)cos(x)", "x", "x+y"] {
            let code = encode(source, &EncoderConfig::default()).unwrap();
            assert_eq!(parse_code(&code.code()).unwrap(), code);
        }
    }

    #[test]
    fn distance_zero_only_on_equal_codes() {
        let a = encode("x^2+y", &EncoderConfig::default()).unwrap();
        let b = encode("a^2+b", &EncoderConfig::default()).unwrap();
        assert_eq!(code_distance(&a, &b), 0.0);
        let c = encode("(x+y)^2", &EncoderConfig::default()).unwrap();
        // equal bitstrings, different label suffixes
        assert_eq!(a.bits(), c.bits());
        assert!(code_distance(&a, &c) > 0.0);
    }

    #[test]
    fn distance_of_smallest_codes() {
        // "Sym" and "Num" share their trailing 'm': two substitutions over
        // length 3. Checked against the full-matrix reference below.
        let sym = parse_code("Sym").unwrap();
        let num = parse_code("Num").unwrap();
        assert_eq!(reference_levenshtein("Sym", "Num"), 2);
        assert_eq!(code_distance(&sym, &num), 2.0 / 3.0);
        assert_eq!(code_distance(&num, &sym), 2.0 / 3.0);
        // nothing aligns here, so the distance saturates at 1
        let pow = parse_code("Div").unwrap();
        assert_eq!(reference_levenshtein("Sym", "Div"), 3);
        assert_eq!(code_distance(&sym, &pow), 1.0);
    }

    fn reference_levenshtein(a: &str, b: &str) -> usize {
        let s: Vec<char> = a.chars().collect();
        let t: Vec<char> = b.chars().collect();
        let mut dp = vec![vec![0usize; t.len() + 1]; s.len() + 1];
        for (i, row) in dp.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in dp[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=s.len() {
            for j in 1..=t.len() {
                let sub = dp[i - 1][j - 1] + usize::from(s[i - 1] != t[j - 1]);
                dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
            }
        }
        dp[s.len()][t.len()]
    }
}
