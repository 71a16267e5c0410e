//! Tokenizer and recursive-descent parser for plain infix math expressions.
//!
//! The input syntax is deliberately small: single-letter identifiers (ASCII
//! or Unicode letters) plus spelled-out Greek names, decimal literals, the
//! operators `+ - * / ^`, a fixed set of function names, and implicit
//! multiplication by juxtaposition (`2xy`, `sin(x)cos(x)`, `(a)(b)`).

use std::fmt;

use thiserror::Error;

/// Token classes produced by [`tokenize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Ident,
    Func,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// A lexed token. `position` is a 0-based character (not byte) offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub position: usize,
}

/// Errors from [`tokenize`] and [`parse`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown character {ch:?} at position {position}")]
    UnknownCharacter { ch: char, position: usize },
    #[error("malformed number at position {position}")]
    MalformedNumber { position: usize },
    #[error("unexpected token at position {position}")]
    UnexpectedToken { position: usize },
    #[error("unbalanced parentheses")]
    UnbalancedParens,
    #[error("empty expression")]
    EmptyExpression,
}

/// Functions recognized by the tokenizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FuncKind {
    Sin,
    Cos,
    Tan,
    Log,
    Exp,
    Sqrt,
}

impl FuncKind {
    pub const ALL: [FuncKind; 6] = [
        FuncKind::Sin,
        FuncKind::Cos,
        FuncKind::Tan,
        FuncKind::Log,
        FuncKind::Exp,
        FuncKind::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Tan => "tan",
            FuncKind::Log => "log",
            FuncKind::Exp => "exp",
            FuncKind::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<FuncKind> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Parsed expression tree.
///
/// `Add` and `Mul` are the only N-ary nodes and are kept flat: no `Add`
/// child is itself an `Add`, and likewise for `Mul`. Subtraction is
/// represented as `Add` with a `Neg`-wrapped operand. Numeric literals keep
/// their exact source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    Num(String),
    Sym(String),
    Neg(Box<Ast>),
    Func(FuncKind, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Add(Vec<Ast>),
    Mul(Vec<Ast>),
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&unparse(self))
    }
}

// Multi-letter names, longest first so prefix matching is greedy
// ("omicron" before "omega", "psi" before "pi").
const FUNCTION_NAMES: [&str; 6] = ["sqrt", "sin", "cos", "tan", "log", "exp"];
pub(crate) const GREEK_NAMES: [&str; 24] = [
    "epsilon", "omicron", "upsilon", "lambda", "alpha", "gamma", "delta", "theta", "kappa",
    "sigma", "omega", "beta", "zeta", "iota", "rho", "eta", "tau", "phi", "chi", "psi", "xi", "mu",
    "nu", "pi",
];

pub(crate) fn match_name(chars: &[char], table: &[&'static str]) -> Option<&'static str> {
    table
        .iter()
        .copied()
        .find(|name| chars.len() >= name.len() && name.chars().zip(chars).all(|(a, &b)| a == b))
}

/// Lexes `source` into tokens. Whitespace separates tokens but is otherwise
/// ignored; concatenating the token texts reproduces the source without it.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(TokenKind::Plus),
            '-' => Some(TokenKind::Minus),
            '*' => Some(TokenKind::Star),
            '/' => Some(TokenKind::Slash),
            '^' => Some(TokenKind::Caret),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = simple {
            tokens.push(Token {
                kind,
                text: c.to_string(),
                position: i,
            });
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                if i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    // trailing dot, as in "1."
                    return Err(ParseError::MalformedNumber { position: start });
                }
            }
            tokens.push(Token {
                kind: TokenKind::Number,
                text: chars[start..i].iter().collect(),
                position: start,
            });
        } else if c == '.' {
            // a number may not start with a bare dot, as in ".5"
            return Err(ParseError::MalformedNumber { position: i });
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphabetic() {
                i += 1;
            }
            let mut k = start;
            while k < i {
                if let Some(name) = match_name(&chars[k..i], &FUNCTION_NAMES) {
                    tokens.push(Token {
                        kind: TokenKind::Func,
                        text: name.to_string(),
                        position: k,
                    });
                    k += name.len();
                } else if let Some(name) = match_name(&chars[k..i], &GREEK_NAMES) {
                    tokens.push(Token {
                        kind: TokenKind::Ident,
                        text: name.to_string(),
                        position: k,
                    });
                    k += name.len();
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Ident,
                        text: chars[k].to_string(),
                        position: k,
                    });
                    k += 1;
                }
            }
        } else {
            return Err(ParseError::UnknownCharacter { ch: c, position: i });
        }
    }
    if tokens.is_empty() {
        return Err(ParseError::EmptyExpression);
    }
    Ok(tokens)
}

/// Parses a token sequence into an [`Ast`].
///
/// Precedence, tightest first: `^` (right-associative), unary minus,
/// multiplication/division (including juxtaposition), addition. `a-b`
/// parses to `Add(a, Neg(b))`; chained sums and products flatten into a
/// single N-ary node, including across parentheses.
pub fn parse(tokens: &[Token]) -> Result<Ast, ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::EmptyExpression);
    }
    let last = tokens.last().expect("nonempty");
    let mut p = Parser {
        tokens,
        pos: 0,
        end_position: last.position + last.text.chars().count(),
    };
    let ast = p.expr()?;
    match p.peek() {
        None => Ok(ast),
        Some(t) if t.kind == TokenKind::RParen => Err(ParseError::UnbalancedParens),
        Some(t) => Err(ParseError::UnexpectedToken {
            position: t.position,
        }),
    }
}

/// Convenience composition of [`tokenize`] and [`parse`].
pub fn parse_str(source: &str) -> Result<Ast, ParseError> {
    parse(&tokenize(source)?)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    end_position: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut terms = Vec::new();
        let first = self.term()?;
        push_term(&mut terms, first, false);
        loop {
            match self.peek_kind() {
                Some(TokenKind::Plus) => {
                    self.bump();
                    let t = self.term()?;
                    push_term(&mut terms, t, false);
                }
                Some(TokenKind::Minus) => {
                    self.bump();
                    let t = self.term()?;
                    push_term(&mut terms, t, true);
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            Ast::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut current = self.unary()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::Star) => {
                    self.bump();
                    let rhs = self.unary()?;
                    current = mul_append(current, rhs);
                }
                Some(TokenKind::Slash) => {
                    self.bump();
                    let rhs = self.unary()?;
                    current = Ast::Div(Box::new(current), Box::new(rhs));
                }
                // juxtaposition: any operand start continues the product
                Some(
                    TokenKind::Number | TokenKind::Ident | TokenKind::Func | TokenKind::LParen,
                ) => {
                    let rhs = self.unary()?;
                    current = mul_append(current, rhs);
                }
                _ => break,
            }
        }
        Ok(current)
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if self.peek_kind() == Some(TokenKind::Minus) {
            self.bump();
            Ok(Ast::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if self.peek_kind() == Some(TokenKind::Caret) {
            self.bump();
            // right-associative; the exponent may carry a unary minus
            let exponent = self.unary()?;
            Ok(Ast::Pow(Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::UnexpectedToken {
                position: self.end_position,
            });
        };
        match tok.kind {
            TokenKind::Number => {
                self.bump();
                Ok(Ast::Num(tok.text))
            }
            TokenKind::Ident => {
                self.bump();
                Ok(Ast::Sym(tok.text))
            }
            TokenKind::Func => {
                self.bump();
                let func = FuncKind::from_name(&tok.text).expect("lexer emits known functions");
                match self.peek() {
                    Some(t) if t.kind == TokenKind::LParen => self.bump(),
                    Some(t) => {
                        return Err(ParseError::UnexpectedToken {
                            position: t.position,
                        })
                    }
                    None => {
                        return Err(ParseError::UnexpectedToken {
                            position: self.end_position,
                        })
                    }
                }
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(Ast::Func(func, Box::new(inner)))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            _ => Err(ParseError::UnexpectedToken {
                position: tok.position,
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::RParen => {
                self.bump();
                Ok(())
            }
            Some(t) => Err(ParseError::UnexpectedToken {
                position: t.position,
            }),
            None => Err(ParseError::UnbalancedParens),
        }
    }
}

fn push_term(terms: &mut Vec<Ast>, term: Ast, negated: bool) {
    if negated {
        terms.push(Ast::Neg(Box::new(term)));
    } else if let Ast::Add(children) = term {
        // keep sums flat across parentheses
        terms.extend(children);
    } else {
        terms.push(term);
    }
}

fn mul_append(current: Ast, rhs: Ast) -> Ast {
    let mut factors = match current {
        Ast::Mul(f) => f,
        other => vec![other],
    };
    match rhs {
        Ast::Mul(f) => factors.extend(f),
        other => factors.push(other),
    }
    Ast::Mul(factors)
}

/// Renders an [`Ast`] back to infix text. This is a debug printer: the
/// output is not guaranteed minimal, only that it re-parses to a
/// structurally identical tree.
pub fn unparse(ast: &Ast) -> String {
    render(ast, 0)
}

// requirement levels: Add=1, Mul/Div=2, Neg=3, Pow=4, leaves and calls=5
fn render(ast: &Ast, req: u8) -> String {
    let (prec, body) = match ast {
        Ast::Num(text) => (5, text.clone()),
        Ast::Sym(name) => (5, name.clone()),
        Ast::Func(func, inner) => (5, format!("{}({})", func.name(), render(inner, 0))),
        Ast::Neg(inner) => (3, format!("-{}", render(inner, 3))),
        Ast::Pow(base, exponent) => (4, format!("{}^{}", render(base, 5), render(exponent, 3))),
        Ast::Div(num, den) => (2, format!("{}/{}", render(num, 2), render(den, 3))),
        Ast::Mul(factors) => {
            let mut s = render(&factors[0], 2);
            for f in &factors[1..] {
                s.push('*');
                s.push_str(&render(f, 3));
            }
            (2, s)
        }
        Ast::Add(terms) => {
            let mut s = render(&terms[0], 1);
            for t in &terms[1..] {
                if let Ast::Neg(inner) = t {
                    s.push_str(" - ");
                    s.push_str(&render(inner, 3));
                } else {
                    s.push_str(" + ");
                    s.push_str(&render(t, 1));
                }
            }
            (1, s)
        }
    };
    if prec < req {
        format!("({body})")
    } else {
        body
    }
}
