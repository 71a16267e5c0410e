//! Acceptance suite: one test per release criterion. Each prints a
//! `criterion N ... PASS` line with the measured numbers (visible with
//! `cargo test -p mexcode-cli --test acceptance -- --nocapture`); the test
//! name doubles as the pass/fail line in normal runs.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

use mexcode::index::CorpusEntry;
use mexcode::{
    binarize, encode, encode_graph, evaluate, gen_random_expr, parse_str, unparse, Ast,
    CanonicalCode, CorpusIndex, EncoderConfig,
};

const EQ3_CODE: &str = "0010010011SymNumSymPowAdd";

fn run_binary(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_mexcode"))
        .args(args)
        .env_remove("MEXCODE_CONFIG")
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("utf-8"),
        out.status.code().unwrap_or(-1),
    )
}

#[test]
fn criterion_01_golden_power_sum_string() {
    let config = EncoderConfig::default();
    // warm-up, then time the library call
    let _ = encode("x^2+y", &config).unwrap();
    let start = Instant::now();
    let code = encode("x^2+y", &config).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(code.code(), EQ3_CODE);
    assert!(elapsed < Duration::from_millis(10), "took {elapsed:?}");

    let (stdout, status) = run_binary(&["encode", "x^2+y"]);
    assert_eq!(status, 0);
    assert_eq!(stdout, format!("{EQ3_CODE}\n"));
    println!("criterion 1: encode x^2+y -> {EQ3_CODE} in {elapsed:?} (< 10 ms) ... PASS");
}

#[test]
fn criterion_02_golden_table_strings() {
    let cases = [
        ("(x+y)^2", "0010010011SymSymNumAddPow"),
        ("(2xy+5)/y", "000100001010100010101SymSymNumNumMulAddDiv"),
    ];
    for (expression, expected) in cases {
        let code = encode(expression, &EncoderConfig::default()).unwrap();
        assert_eq!(code.code(), expected, "{expression}");
        let (stdout, status) = run_binary(&["encode", expression]);
        assert_eq!(status, 0);
        assert_eq!(stdout, format!("{expected}\n"), "{expression}");
    }
    println!("criterion 2: both golden code strings byte-exact ... PASS");
}

#[test]
fn criterion_03_trig_product_bitstring_and_root_label() {
    let code = encode("sin(x)cos(x)", &EncoderConfig::default()).unwrap();
    assert_eq!(code.bits(), "110011");
    assert_eq!(code.labels(), ["Sym", "Sin", "Cos", "Mul"]);
    assert_eq!(code.code(), "110011SymSinCosMul");

    // the README records why the label suffix ends in Mul
    let readme_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md");
    let readme = std::fs::read_to_string(readme_path).expect("README.md at workspace root");
    assert!(
        readme.contains("110011SymSinCosMul"),
        "README must document the sin(x)cos(x) code"
    );
    println!("criterion 3: sin(x)cos(x) -> bits 110011, root label Mul, documented ... PASS");
}

#[test]
fn criterion_04_motivating_equivalence() {
    let config = EncoderConfig::default();
    let a = encode("a^2+b", &config).unwrap();
    let b = encode("x+y^2", &config).unwrap();
    assert_eq!(a.code(), EQ3_CODE);
    assert_eq!(b.code(), EQ3_CODE);

    let (stdout, status) = run_binary(&["compare", "a^2+b", "x+y^2"]);
    assert_eq!(status, 0);
    assert!(stdout.starts_with("EQUAL\n"), "{stdout}");
    println!("criterion 4: a^2+b = x+y^2 = {EQ3_CODE}, compare prints EQUAL ... PASS");
}

fn distinct_symbols(ast: &Ast, out: &mut Vec<String>) {
    match ast {
        Ast::Sym(name) => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        Ast::Num(_) => {}
        Ast::Neg(c) | Ast::Func(_, c) => distinct_symbols(c, out),
        Ast::Pow(a, b) | Ast::Div(a, b) => {
            distinct_symbols(a, out);
            distinct_symbols(b, out);
        }
        Ast::Add(cs) | Ast::Mul(cs) => cs.iter().for_each(|c| distinct_symbols(c, out)),
    }
}

fn rename_symbols(ast: &Ast, mapping: &BTreeMap<String, String>) -> Ast {
    match ast {
        Ast::Sym(name) => Ast::Sym(mapping.get(name).cloned().unwrap_or_else(|| name.clone())),
        Ast::Num(t) => Ast::Num(t.clone()),
        Ast::Neg(c) => Ast::Neg(Box::new(rename_symbols(c, mapping))),
        Ast::Func(f, c) => Ast::Func(*f, Box::new(rename_symbols(c, mapping))),
        Ast::Pow(a, b) => Ast::Pow(
            Box::new(rename_symbols(a, mapping)),
            Box::new(rename_symbols(b, mapping)),
        ),
        Ast::Div(a, b) => Ast::Div(
            Box::new(rename_symbols(a, mapping)),
            Box::new(rename_symbols(b, mapping)),
        ),
        Ast::Add(cs) => Ast::Add(cs.iter().map(|c| rename_symbols(c, mapping)).collect()),
        Ast::Mul(cs) => Ast::Mul(cs.iter().map(|c| rename_symbols(c, mapping)).collect()),
    }
}

#[test]
fn criterion_05_renaming_invariance_across_1000_expressions() {
    let start = Instant::now();
    let config = EncoderConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut tie_free = 0usize;
    let mut tied = 0usize;

    for i in 0..1000u64 {
        let text = gen_random_expr(42 + i, 4, 4);
        let graph = encode_graph(&text, &config).unwrap();
        if graph.tie_break_events() > 0 {
            tied += 1;
            continue;
        }
        tie_free += 1;
        let original = CanonicalCode::from_graph(&graph);

        // random bijective renaming into uppercase letters
        let ast = parse_str(&text).unwrap();
        let mut names = Vec::new();
        distinct_symbols(&ast, &mut names);
        let mut targets: Vec<String> = (b'A'..=b'Z').map(|c| char::from(c).to_string()).collect();
        for k in (1..targets.len()).rev() {
            targets.swap(k, rng.random_range(0..=k));
        }
        let mapping: BTreeMap<String, String> = names.into_iter().zip(targets).collect();
        let renamed_text = unparse(&rename_symbols(&ast, &mapping));

        let renamed_graph = encode_graph(&renamed_text, &config).unwrap();
        assert_eq!(
            renamed_graph.tie_break_events(),
            0,
            "renaming must not introduce ties: {text} -> {renamed_text}"
        );
        let renamed = CanonicalCode::from_graph(&renamed_graph);
        assert_eq!(original.code(), renamed.code(), "{text} -> {renamed_text}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    let tie_break_rate = tied as f64 / 1000.0;
    println!(
        "criterion 5: {tie_free}/1000 tie-free expressions 100% renaming-invariant, \
         tie_break_rate {tie_break_rate:.4}, in {elapsed:?} (< 10 s) ... PASS"
    );
}

#[test]
fn criterion_06_soundness_against_the_oracle() {
    let start = Instant::now();
    let report = evaluate(1000, 42, &EncoderConfig::default()).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(report.pairs_tested, 1000);
    assert_eq!(
        report.false_equal, 0,
        "equal codes on non-isomorphic graphs: {report:?}"
    );
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 6: 1000 pairs, false_equal = 0, in {elapsed:?} (< 60 s) ... PASS");
}

#[test]
fn criterion_07_twin_completeness_without_ties() {
    let report = evaluate(1000, 42, &EncoderConfig::default()).unwrap();
    assert!(report.clean_twin_pairs > 0);
    assert_eq!(
        report.clean_twin_missed, 0,
        "tie-free twins coded unequally: {report:?}"
    );
    println!(
        "criterion 7: {} tie-free twin pairs, missed_equal = 0 among them ... PASS",
        report.clean_twin_pairs
    );
}

// Restricted generator for exact arithmetic: sums, products, quotients,
// small integer powers, negation. Leaves are symbols or the digits 1..9.
fn gen_rational_ast(rng: &mut ChaCha8Rng, depth: usize) -> Ast {
    if depth <= 1 || rng.random_ratio(3, 10) {
        return if rng.random_bool(0.5) {
            let names = ["x", "y", "z", "w"];
            Ast::Sym(names[rng.random_range(0..names.len())].to_string())
        } else {
            Ast::Num(rng.random_range(1..10u32).to_string())
        };
    }
    match rng.random_range(0..5u32) {
        0 | 1 => {
            let product = rng.random_bool(0.5);
            let arity = rng.random_range(2..=4usize);
            let mut children = Vec::new();
            for _ in 0..arity {
                match (product, gen_rational_ast(rng, depth - 1)) {
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
        2 => Ast::Div(
            Box::new(gen_rational_ast(rng, depth - 1)),
            Box::new(gen_rational_ast(rng, depth - 1)),
        ),
        3 => Ast::Pow(
            Box::new(gen_rational_ast(rng, depth - 1)),
            Box::new(Ast::Num(rng.random_range(2..=3u32).to_string())),
        ),
        _ => Ast::Neg(Box::new(gen_rational_ast(rng, depth - 1))),
    }
}

fn rational_pow(base: &BigRational, exp: i32) -> Option<BigRational> {
    if exp < 0 {
        if base.is_zero() {
            return None;
        }
        return rational_pow(&base.recip(), -exp);
    }
    let mut acc = BigRational::one();
    for _ in 0..exp {
        acc *= base;
    }
    Some(acc)
}

fn eval_rational(ast: &Ast, env: &BTreeMap<String, BigRational>) -> Option<BigRational> {
    match ast {
        Ast::Num(text) => {
            let rational = match text.split_once('.') {
                None => BigRational::from_integer(text.parse::<BigInt>().ok()?),
                Some((whole, frac)) => {
                    let digits: BigInt = format!("{whole}{frac}").parse().ok()?;
                    let scale = BigInt::from(10u32).pow(frac.len() as u32);
                    BigRational::new(digits, scale)
                }
            };
            Some(rational)
        }
        Ast::Sym(name) => env.get(name).cloned(),
        Ast::Neg(c) => Some(-eval_rational(c, env)?),
        Ast::Func(..) => None,
        Ast::Pow(base, exp) => {
            let base = eval_rational(base, env)?;
            let exp = eval_rational(exp, env)?;
            if !exp.is_integer() {
                return None;
            }
            let exp: i32 = exp.to_integer().try_into().ok()?;
            if exp.abs() > 8 {
                return None;
            }
            if base.is_zero() && exp < 0 {
                return None;
            }
            rational_pow(&base, exp)
        }
        Ast::Div(num, den) => {
            let den = eval_rational(den, env)?;
            if den.is_zero() {
                return None;
            }
            Some(eval_rational(num, env)? / den)
        }
        Ast::Add(cs) => {
            let mut acc = BigRational::zero();
            for c in cs {
                acc += eval_rational(c, env)?;
            }
            Some(acc)
        }
        Ast::Mul(cs) => {
            let mut acc = BigRational::one();
            for c in cs {
                acc *= eval_rational(c, env)?;
            }
            Some(acc)
        }
    }
}

fn max_arity(ast: &Ast) -> usize {
    match ast {
        Ast::Num(_) | Ast::Sym(_) => 0,
        Ast::Neg(c) | Ast::Func(_, c) => max_arity(c).max(1),
        Ast::Pow(a, b) | Ast::Div(a, b) => max_arity(a).max(max_arity(b)).max(2),
        Ast::Add(cs) | Ast::Mul(cs) => cs.iter().map(max_arity).max().unwrap_or(0).max(cs.len()),
    }
}

#[test]
fn criterion_08_binarize_preserves_arity_bound_and_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut defined_comparisons = 0usize;
    for _ in 0..200 {
        let nary = gen_rational_ast(&mut rng, 5);
        let binary = binarize(&nary);
        assert!(max_arity(&binary) <= 2, "{}", unparse(&nary));

        let mut names = Vec::new();
        distinct_symbols(&nary, &mut names);
        for _ in 0..20 {
            let env: BTreeMap<String, BigRational> = names
                .iter()
                .map(|name| {
                    let value =
                        BigRational::from_integer(BigInt::from(rng.random_range(-5i32..=5)));
                    (name.clone(), value)
                })
                .collect();
            let a = eval_rational(&nary, &env);
            let b = eval_rational(&binary, &env);
            assert_eq!(a, b, "{} with {env:?}", unparse(&nary));
            if a.is_some() {
                defined_comparisons += 1;
            }
        }
    }
    assert!(
        defined_comparisons > 2000,
        "only {defined_comparisons} defined evaluations; the check is too vacuous"
    );
    println!(
        "criterion 8: 200 expressions, arity <= 2 after binarize, \
         {defined_comparisons}/4000 defined evaluations all exactly equal ... PASS"
    );
}

#[test]
fn criterion_09_index_round_trip_with_100_entries() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("corpus.index.json");

    let mut entries = vec![CorpusEntry::new("std-xy", "(x+y)^2")];
    for i in 0..99u64 {
        entries.push(CorpusEntry::new(
            format!("gen-{i:03}"),
            gen_random_expr(1000 + i, 4, 4),
        ));
    }
    assert_eq!(entries.len(), 100);
    let index = CorpusIndex::build(entries.clone(), EncoderConfig::default()).unwrap();
    index.save_to_path(&path).unwrap();
    let reloaded = CorpusIndex::load_from_path(&path).unwrap();
    assert_eq!(index, reloaded);

    // the Greek-letter query finds the Latin-letter entry exactly
    let hits = reloaded.query("(α+β)^2", 100).unwrap();
    assert!(
        hits.iter().any(|h| h.id == "std-xy" && h.distance == 0.0),
        "expected std-xy at distance 0, got {hits:?}"
    );

    // every entry is retrievable by its own expression at distance 0
    for entry in &entries {
        let hits = reloaded.query(&entry.expression, 100).unwrap();
        assert!(
            hits.iter().any(|h| h.id == entry.id && h.distance == 0.0),
            "entry {} not exactly retrievable via {:?}",
            entry.id,
            entry.expression
        );
    }
    println!("criterion 9: 100-entry index persisted, reloaded, all entries exact-hit ... PASS");
}

#[test]
fn criterion_10_throughput_10k_expressions_under_5s() {
    let expressions: Vec<String> = (0..10_000u64)
        .map(|i| gen_random_expr(5000 + i, 6, 6))
        .collect();
    let config = EncoderConfig::default();
    let start = Instant::now();
    let mut emitted = 0usize;
    for expression in &expressions {
        let code = encode(expression, &config).unwrap();
        emitted += black_box(code.code().len());
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "criterion 10: 10000 expressions ({emitted} code bytes) encoded in {elapsed:?} (< 5 s) ... PASS"
    );
}
