//! cremona: evaluate and reduce words in H = ⟨C, I, P⟩, test maps against
//! ω₀ = dx∧dy/(xy), classify normal cubic forms, and inspect base points.
//!
//! Exit codes: 0 success (or "is the identity"), 1 negative verdict or a
//! computation refused on valid input, 2 parse/input errors, 3 internal
//! consistency failures (these would falsify a lemma; please report them).

use clap::{Parser, Subcommand};
use cremona::error::Error;
use cremona::forms::{
    classify_normal_cubic, is_symplectic, preserves_divisor, RationalTwoForm,
};
use cremona::geometry::base_points;
use cremona::json::{classification_json, inf_near_json, map_json, trace_json};
use cremona::maps::{equal, identity, q_base_points, q_map, BirationalMap};
use cremona::poly::{HomPoly, Q};
use cremona::words::{
    self, eval, format as format_word, reduce_with_cap, QuadraticWord,
};
use num::BigInt;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "cremona",
    about = "Words, maps and 2-forms of the symplectic plane Cremona group",
    long_about = None,
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    /// Degree cap for intermediate compositions (≥ 2); defaults to
    /// CREMONA_DEGREE_CAP or 1024
    #[arg(long, value_name = "N", global = true,
          value_parser = clap::value_parser!(u64).range(2..))]
    degree_cap: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a word over C, I, P to its polynomial map
    Eval { word: String },
    /// Rewrite a word to its linear/quadratic normal form
    Reduce {
        word: String,
        /// Print the reduction steps
        #[arg(long)]
        trace: bool,
    },
    /// Decide whether a word is the identity of H (exit 0 yes, 1 no)
    IsIdentity { word: String },
    /// Symplectic and divisor-preservation test for a map "F0 : F1 : F2"
    Symplectic { map: String },
    /// Classify the cubic attached to the form (A/B)·ω₀
    ClassifyForm { a: String, b: String },
    /// Base points of a map's homaloidal net with the Noether audit
    BasePoints { map: String },
    /// The twelve quadratic catalog elements and the parametrized families
    Catalog,
    /// Verify the defining relations of H (exit 1 on any failure)
    VerifyRelations,
}

fn main() {
    // Behave like a Unix filter when the downstream pipe closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidInput(_) => 2,
        Error::InternalCheck(_) => 3,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::InvalidInput(_) => "invalid-input",
        Error::UnaccountedBasePoint(_) => "unaccounted-base-point",
        Error::IrrationalSingularLocus(_) => "irrational-singular-locus",
        Error::DegreeCap { .. } => "degree-cap",
        Error::InternalCheck(_) => "internal-check",
    }
}

fn fail(e: &Error, as_json: bool) -> i32 {
    if as_json {
        println!("{}", json!({ "error": error_kind(e), "detail": e.to_string() }));
    } else {
        eprintln!("error: {}", e);
    }
    exit_code(e)
}

fn cap_of(cli: &Cli) -> usize {
    cli.degree_cap
        .map(|n| n as usize)
        .unwrap_or_else(words::default_degree_cap)
}

fn run(cli: &Cli) -> i32 {
    let res = match &cli.cmd {
        Cmd::Eval { word } => cmd_eval(cli, word),
        Cmd::Reduce { word, trace } => cmd_reduce(cli, word, *trace),
        Cmd::IsIdentity { word } => cmd_is_identity(cli, word),
        Cmd::Symplectic { map } => cmd_symplectic(cli, map),
        Cmd::ClassifyForm { a, b } => cmd_classify(cli, a, b),
        Cmd::BasePoints { map } => cmd_base_points(cli, map),
        Cmd::Catalog => cmd_catalog(cli),
        Cmd::VerifyRelations => cmd_verify_relations(cli),
    };
    match res {
        Ok(code) => code,
        Err(e) => fail(&e, cli.json),
    }
}

// ---------------------------------------------------------------------------
// Payload parsing
// ---------------------------------------------------------------------------

/// Text grammar: sums of terms; a term multiplies rationals, the variables
/// X, Y, Z (case-insensitive), parenthesized subexpressions and powers, with
/// '*' optional. Example: "(Y+Z)Z - 3/2 X^2".
struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
}

type Terms = BTreeMap<[u32; 3], Q>;

fn perr(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl<'a> PolyParser<'a> {
    fn new(src: &'a str) -> Self {
        PolyParser { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src.get(self.pos).map(|b| *b as char)
    }

    fn expr(&mut self) -> Result<Terms, Error> {
        let mut neg = false;
        match self.peek() {
            Some('+') => {
                self.pos += 1;
            }
            Some('-') => {
                self.pos += 1;
                neg = true;
            }
            _ => {}
        }
        let mut acc = self.term()?;
        if neg {
            for c in acc.values_mut() {
                *c = -c.clone();
            }
        }
        while let Some(op) = self.peek() {
            if op != '+' && op != '-' {
                break;
            }
            self.pos += 1;
            let t = self.term()?;
            for (e, c) in t {
                let entry = acc.entry(e).or_insert_with(|| Q::from_integer(0.into()));
                if op == '+' {
                    *entry += c;
                } else {
                    *entry -= c;
                }
            }
        }
        acc.retain(|_, c| !num::Zero::is_zero(c));
        Ok(acc)
    }

    fn term(&mut self) -> Result<Terms, Error> {
        let mut acc = self.factor()?;
        while let Some(ch) = self.peek() {
            let implicit = ch.is_ascii_digit()
                || matches!(ch.to_ascii_uppercase(), 'X' | 'Y' | 'Z')
                || ch == '(';
            if ch == '*' {
                self.pos += 1;
            } else if !implicit {
                break;
            }
            let f = self.factor()?;
            acc = mul_terms(&acc, &f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Terms, Error> {
        let mut base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let at = self.pos;
            let n = self.uint()?;
            if n > 64 {
                return Err(perr(at, "exponent too large"));
            }
            let mut out: Terms = BTreeMap::new();
            out.insert([0, 0, 0], Q::from_integer(1.into()));
            for _ in 0..n {
                out = mul_terms(&out, &base);
            }
            base = out;
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Terms, Error> {
        let ch = self.peek().ok_or_else(|| perr(self.pos, "unexpected end of polynomial"))?;
        let at = self.pos;
        let mut one: Terms = BTreeMap::new();
        match ch {
            '(' => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(perr(self.pos, "expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            'X' | 'x' => {
                self.pos += 1;
                one.insert([1, 0, 0], Q::from_integer(1.into()));
                Ok(one)
            }
            'Y' | 'y' => {
                self.pos += 1;
                one.insert([0, 1, 0], Q::from_integer(1.into()));
                Ok(one)
            }
            'Z' | 'z' => {
                self.pos += 1;
                one.insert([0, 0, 1], Q::from_integer(1.into()));
                Ok(one)
            }
            d if d.is_ascii_digit() => {
                let num = self.uint()? as i64;
                let q = if self.peek() == Some('/') {
                    self.pos += 1;
                    let dat = self.pos;
                    let den = self.uint()? as i64;
                    if den == 0 {
                        return Err(perr(dat, "zero denominator"));
                    }
                    Q::new(num.into(), den.into())
                } else {
                    Q::from_integer(num.into())
                };
                one.insert([0, 0, 0], q);
                Ok(one)
            }
            other => Err(perr(at, format!("unexpected character '{}'", other))),
        }
    }

    fn uint(&mut self) -> Result<u64, Error> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(perr(start, "expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| perr(start, "number out of range"))
    }
}

fn mul_terms(a: &Terms, b: &Terms) -> Terms {
    let mut out: Terms = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
            let entry = out.entry(e).or_insert_with(|| Q::from_integer(0.into()));
            *entry += ca * cb;
        }
    }
    out.retain(|_, c| !num::Zero::is_zero(c));
    out
}

fn terms_to_poly(t: Terms) -> Result<HomPoly, Error> {
    if t.is_empty() {
        return Err(Error::InvalidInput("polynomial is identically zero".into()));
    }
    let degs: Vec<usize> = t.keys().map(|e| (e[0] + e[1] + e[2]) as usize).collect();
    let d = degs[0];
    if degs.iter().any(|k| *k != d) {
        return Err(Error::InvalidInput(
            "polynomial is not homogeneous".into(),
        ));
    }
    Ok(HomPoly::from_terms(d, t))
}

fn poly_from_json_value(v: &Value) -> Result<HomPoly, Error> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::InvalidInput("expected a JSON array of terms".into()))?;
    let mut terms: Terms = BTreeMap::new();
    for item in arr {
        let exps = item["exponents"]
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::InvalidInput("term needs exponents [a,b,c]".into()))?;
        let mut e = [0u32; 3];
        for (i, x) in exps.iter().enumerate() {
            e[i] = x
                .as_u64()
                .ok_or_else(|| Error::InvalidInput("exponents must be non-negative".into()))?
                as u32;
        }
        let num = item["num"]
            .as_str()
            .and_then(|s| BigInt::from_str(s).ok())
            .ok_or_else(|| Error::InvalidInput("term needs a decimal string num".into()))?;
        let den = item["den"]
            .as_str()
            .and_then(|s| BigInt::from_str(s).ok())
            .filter(|d| !num::Zero::is_zero(d))
            .ok_or_else(|| Error::InvalidInput("term needs a nonzero decimal den".into()))?;
        *terms.entry(e).or_insert_with(|| Q::from_integer(0.into())) += Q::new(num, den);
    }
    terms.retain(|_, c| !num::Zero::is_zero(c));
    terms_to_poly(terms)
}

fn parse_poly_arg(s: &str) -> Result<HomPoly, Error> {
    let t = s.trim_start();
    if t.starts_with('[') {
        let v: Value = serde_json::from_str(t)
            .map_err(|e| perr(0, format!("invalid JSON polynomial: {}", e)))?;
        return poly_from_json_value(&v);
    }
    let mut p = PolyParser::new(s);
    let terms = p.expr()?;
    if p.peek().is_some() {
        return Err(perr(p.pos, "trailing input after polynomial"));
    }
    terms_to_poly(terms)
}

fn parse_map_arg(s: &str) -> Result<BirationalMap, Error> {
    let t = s.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        let v: Value = serde_json::from_str(t)
            .map_err(|e| perr(0, format!("invalid JSON map: {}", e)))?;
        let comps = if v.is_array() { &v } else { &v["components"] };
        let arr = comps
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::InvalidInput("map needs three components".into()))?;
        let c0 = poly_from_json_value(&arr[0])?;
        let c1 = poly_from_json_value(&arr[1])?;
        let c2 = poly_from_json_value(&arr[2])?;
        return BirationalMap::new([c0, c1, c2]);
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(
            "expected \"F0 : F1 : F2\" with exactly two ':' separators".into(),
        ));
    }
    BirationalMap::new([
        parse_poly_arg(parts[0])?,
        parse_poly_arg(parts[1])?,
        parse_poly_arg(parts[2])?,
    ])
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_eval(cli: &Cli, word: &str) -> Result<i32, Error> {
    let w = words::parse(word)?;
    let m = words::eval_capped(&w, cap_of(cli))?;
    if cli.json {
        println!("{}", map_json(&m));
    } else {
        println!("degree {}", m.degree());
        let c = m.components();
        println!("( {} : {} : {} )", c[0], c[1], c[2]);
    }
    Ok(0)
}

fn cmd_reduce(cli: &Cli, word: &str, trace: bool) -> Result<i32, Error> {
    let w = words::parse(word)?;
    let red = reduce_with_cap(&w, cap_of(cli))?;
    if cli.json {
        let mut out = json!({
            "word": format_word(&red.word),
            "flagged": red.flagged,
            "value-degree": red.value_degree,
        });
        if trace {
            out["trace"] = trace_json(&red.trace);
        }
        println!("{}", out);
    } else {
        if trace {
            for s in &red.trace {
                println!(
                    "step {}: D={} n={}{} {} [{}]",
                    s.step,
                    s.d_max,
                    s.n,
                    s.r.map(|r| format!(" r={}", r)).unwrap_or_default(),
                    s.action,
                    s.factors.join(" ")
                );
            }
        }
        if red.flagged {
            println!(
                "no linear/quadratic normal form (value degree {}); reduced factors:",
                red.value_degree
            );
        }
        let txt = format_word(&red.word);
        println!("{}", if txt.is_empty() { "1" } else { &txt });
    }
    Ok(0)
}

fn cmd_is_identity(cli: &Cli, word: &str) -> Result<i32, Error> {
    let w = words::parse(word)?;
    let yes = words::is_identity_with_cap(&w, cap_of(cli))?;
    if cli.json {
        println!("{}", json!({ "identity": yes }));
    } else {
        println!("{}", if yes { "identity" } else { "not the identity" });
    }
    Ok(if yes { 0 } else { 1 })
}

fn cmd_symplectic(cli: &Cli, map: &str) -> Result<i32, Error> {
    let m = parse_map_arg(map)?;
    let mu = preserves_divisor(&m);
    let symp = is_symplectic(&m);
    if cli.json {
        println!(
            "{}",
            json!({ "symplectic": symp, "divisor-preserving": mu.is_some(), "mu": mu })
        );
    } else {
        println!("symplectic: {}", symp);
        match mu {
            Some(s) => println!("divisor-preserving: true (μ = {:+})", s),
            None => println!("divisor-preserving: false"),
        }
    }
    Ok(0)
}

fn cmd_classify(cli: &Cli, a: &str, b: &str) -> Result<i32, Error> {
    let pa = parse_poly_arg(a)?;
    let pb = parse_poly_arg(b)?;
    let w = RationalTwoForm::new(pa, pb)?;
    let c = classify_normal_cubic(&w)?;
    if cli.json {
        println!("{}", classification_json(&c));
    } else {
        let label = match c.kind {
            cremona::forms::CubicKind::Triangle => "triangle of lines — type (i)",
            cremona::forms::CubicKind::ConicPlusLine => "conic plus a secant line — type (ii)",
            cremona::forms::CubicKind::NodalCubic => "irreducible nodal cubic — type (iii)",
            cremona::forms::CubicKind::NotNormal => "not a normal cubic form",
        };
        println!("{}", label);
        for p in &c.components {
            println!("component: {}", p);
        }
        for n in &c.nodes {
            println!("node: {}", n);
        }
    }
    Ok(0)
}

fn cmd_base_points(cli: &Cli, map: &str) -> Result<i32, Error> {
    let m = parse_map_arg(map)?;
    let cfg = base_points(&m.linear_system())?;
    let d = m.degree();
    let sum: usize = cfg.iter().map(|(_, k)| *k).sum();
    let sum_sq: usize = cfg.iter().map(|(_, k)| k * k).sum();
    if cli.json {
        println!(
            "{}",
            json!({
                "degree": d,
                "points": cfg
                    .iter()
                    .map(|(p, k)| json!({ "point": inf_near_json(p), "multiplicity": k }))
                    .collect::<Vec<_>>(),
                "noether": {
                    "sum": sum,
                    "sum-expected": 3 * (d - 1),
                    "sum-squares": sum_sq,
                    "sum-squares-expected": d * d - 1,
                },
            })
        );
    } else {
        println!("degree {}", d);
        for (p, k) in &cfg {
            println!("{}  multiplicity {}", p, k);
        }
        println!(
            "Noether: Σm = {} (= 3(d−1) = {}), Σm² = {} (= d²−1 = {})",
            sum,
            3 * (d - 1),
            sum_sq,
            d * d - 1
        );
    }
    Ok(0)
}

fn cmd_catalog(cli: &Cli) -> Result<i32, Error> {
    let families = [
        (
            "S(λ)",
            "(P^2 C)^-1 ρ_{-λ} P^2 C",
            "( -λX(X+Y+Z) : Y(X+Y-λZ) : λZ(λX-Y+λZ) )",
            "(0:λ:1), q2 = (1:0:-1), q3 = (1:-1:0)",
        ),
        (
            "T(λ)",
            "P^2 ρ_{-λ} C P^2",
            "( XY : (Y+Z)(Y-λZ) : -λXZ )",
            "p1 = (1:0:0), q1 = (0:1:-1), (0:λ:1)",
        ),
    ];
    if cli.json {
        let quads: Vec<Value> = (1..=12)
            .map(|i| {
                let q = QuadraticWord::new(0, i as u8, 0);
                json!({
                    "name": format!("Q{}", i),
                    "word": format_word(&q.to_word()),
                    "map": map_json(&q_map(i)),
                    "base-points": q_base_points(i)
                        .iter()
                        .map(inf_near_json)
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        let fams: Vec<Value> = families
            .iter()
            .map(|(n, w, f, bp)| {
                json!({ "name": n, "word": w, "formula": f, "base-points": bp,
                        "excluded": "λ ∈ {0, -1}" })
            })
            .collect();
        println!("{}", json!({ "quadratics": quads, "families": fams }));
    } else {
        for i in 1..=12 {
            let q = QuadraticWord::new(0, i as u8, 0);
            let m = q_map(i);
            let c = m.components();
            println!("Q{:<2} = {:<8} ( {} : {} : {} )", i, format_word(&q.to_word()), c[0], c[1], c[2]);
            let bps: Vec<String> = q_base_points(i).iter().map(|p| p.to_string()).collect();
            println!("      base points: {}", bps.join(", "));
        }
        for (n, w, f, bp) in families {
            println!("{} = {}   λ ∉ {{0, -1}}", n, w);
            println!("      {}", f);
            println!("      base points: {}", bp);
        }
    }
    Ok(0)
}

fn cmd_verify_relations(cli: &Cli) -> Result<i32, Error> {
    let relations = [
        ("I^4", "I^4 = 1"),
        ("C^3", "C^3 = 1"),
        ("C I^2 C^-1 I^-2", "[C, I^2] = 1"),
        ("P^5", "P^5 = 1"),
        ("P C P I^-1", "P C P = I"),
    ];
    let mut all = true;
    let mut rows = Vec::new();
    for (w, label) in relations {
        let holds = equal(&eval(&words::parse(w).unwrap()), &identity());
        all &= holds;
        rows.push(json!({ "relation": label, "word": w, "holds": holds }));
        if !cli.json {
            println!("{} {}", if holds { "ok  " } else { "FAIL" }, label);
        }
    }
    if cli.json {
        println!("{}", json!({ "relations": rows, "all": all }));
    }
    Ok(if all { 0 } else { 1 })
}
