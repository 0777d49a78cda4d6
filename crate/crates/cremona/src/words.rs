//! Words over {C, I, P}: parsing, evaluation, the quadratic-word calculus
//! (C^a·Q_i·C^b with the frozen inverse/conjugation/packing tables), and the
//! rewriting algorithm that decides the word problem in H = ⟨C, I, P⟩.

use crate::error::{Error, Result};
use crate::geometry::{collinear, line_contains, multiplicity, LinearSystem};
use crate::maps::{
    c_pow, compose, equal, identity, invert_linear, q_base_points, q_map, BirationalMap,
};
use crate::point::InfNearPoint;
use crate::poly::HomPoly;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

// ---------------------------------------------------------------------------
// Words
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Gen {
    C,
    I,
    P,
}

impl Gen {
    pub fn order(self) -> i64 {
        match self {
            Gen::C => 3,
            Gen::I => 4,
            Gen::P => 5,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Gen::C => 'C',
            Gen::I => 'I',
            Gen::P => 'P',
        }
    }
}

/// Freely reduced sequence of generator powers; exponents are kept as given
/// (normalization modulo generator orders is a separate operation).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Word {
    letters: Vec<(Gen, i64)>,
}

impl Word {
    pub fn new(letters: Vec<(Gen, i64)>) -> Word {
        let mut out: Vec<(Gen, i64)> = Vec::with_capacity(letters.len());
        for (g, e) in letters {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some((lg, le)) if *lg == g => {
                    *le += e;
                    if *le == 0 {
                        out.pop();
                    }
                }
                _ => out.push((g, e)),
            }
        }
        Word { letters: out }
    }

    pub fn empty() -> Word {
        Word { letters: vec![] }
    }

    pub fn letters(&self) -> &[(Gen, i64)] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut l = self.letters.clone();
        l.extend_from_slice(&other.letters);
        Word::new(l)
    }
}

/// Grammar: tokens separated by whitespace or '*';
/// token := ('C'|'I'|'P') ['^' signed-integer]. Empty input is the identity.
pub fn parse(text: &str) -> Result<Word> {
    let mut letters = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_whitespace() || ch == '*' {
            i += 1;
            continue;
        }
        let start = i;
        let g = match ch {
            'C' => Gen::C,
            'I' => Gen::I,
            'P' => Gen::P,
            _ => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("expected one of C, I, P, found '{}'", ch),
                })
            }
        };
        i += 1;
        let mut exp = 1i64;
        if i < bytes.len() && bytes[i] as char == '^' {
            i += 1;
            let num_start = i;
            if i < bytes.len() && (bytes[i] as char == '+' || bytes[i] as char == '-') {
                i += 1;
            }
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            exp = text[num_start..i].parse().map_err(|_| Error::Parse {
                pos: num_start,
                msg: "expected a signed integer exponent after '^'".into(),
            })?;
        }
        if i < bytes.len() {
            let next = bytes[i] as char;
            if !(next.is_whitespace() || next == '*') {
                return Err(Error::Parse {
                    pos: i,
                    msg: format!("unexpected character '{}' inside token", next),
                });
            }
        }
        letters.push((g, exp));
    }
    Ok(Word::new(letters))
}

pub fn format(w: &Word) -> String {
    w.letters
        .iter()
        .map(|(g, e)| {
            if *e == 1 {
                g.letter().to_string()
            } else {
                format!("{}^{}", g.letter(), e)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn gen_pow(g: Gen, e: i64) -> BirationalMap {
    match g {
        Gen::C => c_pow(e),
        Gen::I => match e.rem_euclid(4) {
            0 => identity(),
            1 => q_map(1),
            2 => q_map(3),
            _ => q_map(2),
        },
        Gen::P => crate::maps::p_pow(e),
    }
}

/// The composition w₁∘w₂∘…∘wₖ of the letters (rightmost letter applied
/// first, as maps).
pub fn eval(w: &Word) -> BirationalMap {
    w.letters
        .iter()
        .fold(identity(), |acc, (g, e)| compose(&acc, &gen_pow(*g, *e)))
}

/// eval with the reducer's degree guard applied to every partial product.
pub fn eval_capped(w: &Word, cap: usize) -> Result<BirationalMap> {
    let mut acc = identity();
    for (g, e) in &w.letters {
        acc = compose(&acc, &gen_pow(*g, *e));
        if acc.degree() > cap {
            return Err(Error::DegreeCap { degree: acc.degree(), cap });
        }
    }
    Ok(acc)
}

/// Letter-wise inverse: reverse the word and negate exponents.
pub fn invert(w: &Word) -> Word {
    Word::new(w.letters.iter().rev().map(|(g, e)| (*g, -e)).collect())
}

/// Reduce exponents modulo the generator orders (C:3, I:4, P:5) into
/// {1, …, order−1}, iterating until stable.
pub fn normalize(w: &Word) -> Word {
    let mut cur = w.clone();
    loop {
        let next = Word::new(
            cur.letters
                .iter()
                .map(|(g, e)| (*g, e.rem_euclid(g.order())))
                .collect(),
        );
        if next == cur {
            return next;
        }
        cur = next;
    }
}

// ---------------------------------------------------------------------------
// Quadratic words and the catalog
// ---------------------------------------------------------------------------

/// C^a · Q_i · C^b with a, b ∈ {0,1,2}, i ∈ {1..12}.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct QuadraticWord {
    pub a: u8,
    pub i: u8,
    pub b: u8,
}

impl QuadraticWord {
    pub fn new(a: u8, i: u8, b: u8) -> QuadraticWord {
        assert!(a < 3 && b < 3 && (1..=12).contains(&i));
        QuadraticWord { a, i, b }
    }

    /// The defining word of Q_i over {C, I, P}, wrapped in the C powers.
    pub fn to_word(&self) -> Word {
        let core: &[(Gen, i64)] = match self.i {
            1 => &[(Gen::I, 1)],
            2 => &[(Gen::I, 3)],
            3 => &[(Gen::I, 2)],
            4 => &[(Gen::P, 1)],
            5 => &[(Gen::P, 4)],
            6 => &[(Gen::P, 1), (Gen::I, 2)],
            7 => &[(Gen::P, 4), (Gen::I, 2)],
            8 => &[(Gen::I, 2), (Gen::P, 1)],
            9 => &[(Gen::I, 1), (Gen::P, 1)],
            10 => &[(Gen::P, 2)],
            11 => &[(Gen::P, 3), (Gen::C, 2)],
            12 => &[(Gen::P, 1), (Gen::I, 1), (Gen::P, 1)],
            _ => unreachable!(),
        };
        let mut letters = vec![(Gen::C, self.a as i64)];
        letters.extend_from_slice(core);
        letters.push((Gen::C, self.b as i64));
        Word::new(letters)
    }

    pub fn label(&self) -> String {
        let mut s = String::new();
        match self.a {
            0 => {}
            1 => s.push_str("C·"),
            _ => s.push_str("C^2·"),
        }
        s.push_str(&format!("Q{}", self.i));
        match self.b {
            0 => {}
            1 => s.push_str("·C"),
            _ => s.push_str("·C^2"),
        }
        s
    }
}

/// Inverses of the twelve Q_i as (a, j, b): (Q_i)⁻¹ = C^a Q_j C^b.
const Q_INV: [(u8, u8, u8); 12] = [
    (0, 2, 0),
    (0, 1, 0),
    (0, 3, 0),
    (0, 5, 0),
    (0, 4, 0),
    (0, 9, 1),
    (0, 8, 0),
    (0, 7, 0),
    (1, 6, 0),
    (0, 11, 1),
    (1, 10, 0),
    (1, 12, 1),
];

/// Conjugates τ Q_i τ by the swap τ = (Y:X:Z), as (a, j, b).
const Q_TAU: [(u8, u8, u8); 12] = [
    (0, 2, 0),
    (0, 1, 0),
    (0, 3, 0),
    (0, 5, 0),
    (0, 4, 0),
    (0, 7, 0),
    (0, 6, 0),
    (0, 9, 1),
    (0, 8, 1),
    (0, 11, 1),
    (0, 10, 1),
    (1, 12, 1),
];

/// (C^a Q_i C^b)⁻¹ = C^{−b} (Q_i)⁻¹ C^{−a}, folded back into catalog shape.
pub fn qword_invert(q: &QuadraticWord) -> QuadraticWord {
    let (ia, j, ib) = Q_INV[(q.i - 1) as usize];
    QuadraticWord::new(
        ((3 - q.b) % 3 + ia) % 3,
        j,
        (ib + (3 - q.a) % 3) % 3,
    )
}

/// τ (C^a Q_i C^b) τ = C^{−a} (τ Q_i τ) C^{−b}; the output is verified
/// against direct conjugation of the evaluated maps.
pub fn conjugate_swap(q: &QuadraticWord) -> QuadraticWord {
    let (ta, j, tb) = Q_TAU[(q.i - 1) as usize];
    let out = QuadraticWord::new(
        ((3 - q.a) % 3 + ta) % 3,
        j,
        (tb + (3 - q.b) % 3) % 3,
    );
    let tau = crate::maps::swap_map();
    let expect = compose(&tau, &compose(&qword_eval(q), &tau));
    assert!(
        equal(&qword_eval(&out), &expect),
        "swap-conjugation table disagrees with map conjugation at {:?}",
        q
    );
    out
}

struct Catalog {
    /// All 111 linear/quadratic candidates in scan order with their maps.
    all: Vec<(LinOrQuad, BirationalMap)>,
    /// Base points of Q_i C^b, keyed by (i, b); the left C power is
    /// irrelevant for the base locus.
    qwbp: BTreeMap<(u8, u8), Vec<InfNearPoint>>,
    /// Every point that occurs as a base point of some quadratic word.
    universe: BTreeSet<InfNearPoint>,
}

fn apply_linear_infnear(f: &BirationalMap, p: &InfNearPoint) -> InfNearPoint {
    assert!(f.degree() == 1);
    let base = f.apply(&p.base).unwrap();
    if p.is_proper() {
        return InfNearPoint::proper(base);
    }
    assert!(p.tower.len() == 1, "only first-neighbourhood points are transformed");
    let line = crate::point::line_with_direction(&p.base, &p.tower[0]);
    let finv = invert_linear(f).unwrap();
    let image_line = line.substitute(finv.components());
    crate::point::inf_near_on_line(&base, &image_line)
}

fn catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| {
        let cp: Vec<BirationalMap> = (0..3).map(|a| c_pow(a)).collect();
        let q: Vec<BirationalMap> = (1..=12).map(q_map).collect();
        let mut all = Vec::with_capacity(111);
        for a in 0..3u8 {
            all.push((LinOrQuad::Lin(a), cp[a as usize].clone()));
        }
        for a in 0..3u8 {
            for i in 1..=12u8 {
                for b in 0..3u8 {
                    let m = compose(
                        &cp[a as usize],
                        &compose(&q[(i - 1) as usize], &cp[b as usize]),
                    );
                    all.push((LinOrQuad::Quad(QuadraticWord::new(a, i, b)), m));
                }
            }
        }
        let mut qwbp = BTreeMap::new();
        let mut universe = BTreeSet::new();
        for i in 1..=12u8 {
            let bp = q_base_points(i as usize);
            for b in 0..3u8 {
                // base points of Q_i C^b are the C^{−b}-images
                let inv = c_pow(-(b as i64));
                let mut set: Vec<InfNearPoint> =
                    bp.iter().map(|p| apply_linear_infnear(&inv, p)).collect();
                set.sort();
                universe.extend(set.iter().cloned());
                qwbp.insert((i, b), set);
            }
        }
        Catalog { all, qwbp, universe }
    })
}

pub fn qword_eval(q: &QuadraticWord) -> BirationalMap {
    catalog().all[3 + (q.a as usize) * 36 + ((q.i - 1) as usize) * 3 + q.b as usize]
        .1
        .clone()
}

pub fn qword_base_points(q: &QuadraticWord) -> Vec<InfNearPoint> {
    catalog().qwbp[&(q.i, q.b)].clone()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LinOrQuad {
    /// C^a
    Lin(u8),
    Quad(QuadraticWord),
}

impl LinOrQuad {
    pub fn to_word(&self) -> Word {
        match self {
            LinOrQuad::Lin(a) => Word::new(vec![(Gen::C, *a as i64)]),
            LinOrQuad::Quad(q) => q.to_word(),
        }
    }
}

/// Exhaustive scan of the 3 + 108 catalog candidates for a map of degree ≤ 2.
pub fn find_word_for_map(f: &BirationalMap) -> Option<LinOrQuad> {
    if f.degree() > 2 {
        return None;
    }
    for (cand, m) in &catalog().all {
        if m.degree() == f.degree() && equal(m, f) {
            return Some(*cand);
        }
    }
    None
}

pub fn find_quadratic_word_for_map(f: &BirationalMap) -> Option<QuadraticWord> {
    match find_word_for_map(f) {
        Some(LinOrQuad::Quad(q)) => Some(q),
        _ => None,
    }
}

/// Word of the stated shape equal to f·g⁻¹ mod R, given that f and g share
/// at least two base points (so the composition has degree ≤ 2).
pub fn simplify_pair(f: &QuadraticWord, g: &QuadraticWord) -> Result<LinOrQuad> {
    let m = compose(&qword_eval(f), &qword_eval(&qword_invert(g)));
    if m.degree() > 2 {
        return Err(Error::invalid(
            "simplify_pair requires f·g⁻¹ of degree ≤ 2 (share ≥ 2 base points)",
        ));
    }
    find_word_for_map(&m).ok_or_else(|| {
        Error::internal(format!(
            "no catalog word equals {:?}·{:?}⁻¹ of degree {}",
            f.label(),
            g.label(),
            m.degree()
        ))
    })
}

/// The quadratic word with exactly the given base points, under the
/// conditions (Q) each point is a base point of some quadratic word, (P)
/// infinitely near points sit over one of the others, (◊) every triangle
/// line contains one of the points, and non-collinearity.
pub fn find_quadratic_word(
    a1: &InfNearPoint,
    a2: &InfNearPoint,
    a3: &InfNearPoint,
) -> Result<QuadraticWord> {
    let mut set = vec![a1.clone(), a2.clone(), a3.clone()];
    set.sort();
    if set[0] == set[1] || set[1] == set[2] {
        return Err(Error::invalid("points must be pairwise distinct"));
    }
    let cat = catalog();
    for p in &set {
        if !cat.universe.contains(p) {
            return Err(Error::invalid(format!(
                "(Q) fails: {} is not a base point of any quadratic word",
                p
            )));
        }
        if !p.is_proper() && !set.contains(&p.carrier()) {
            return Err(Error::invalid(format!(
                "(P) fails: carrier of {} is not among the points",
                p
            )));
        }
    }
    for line in [HomPoly::var(0), HomPoly::var(1), HomPoly::var(2)] {
        if !set.iter().any(|p| line_contains(&line, p)) {
            return Err(Error::invalid(format!(
                "(◊) fails: the line {} misses all three points",
                line
            )));
        }
    }
    if collinear(&set[0], &set[1], &set[2]) {
        return Err(Error::invalid("points are collinear (the case r = 0 is impossible)"));
    }
    for i in 1..=12u8 {
        for b in 0..3u8 {
            if cat.qwbp[&(i, b)] == set {
                return Ok(QuadraticWord::new(0, i, b));
            }
        }
    }
    Err(Error::internal(format!(
        "no quadratic word has base points {}, {}, {}",
        set[0], set[1], set[2]
    )))
}

// ---------------------------------------------------------------------------
// Packing a word into quadratic words
// ---------------------------------------------------------------------------

enum ChunkVal {
    Lin(u8),
    Quad(u8, u8, u8),
}

/// I^a P^ε → catalog form.
fn ip_chunk(a: i64, eps: i8) -> ChunkVal {
    match (a, eps) {
        (1, 1) => ChunkVal::Quad(0, 9, 0),
        (1, -1) => ChunkVal::Quad(0, 4, 1),
        (2, 1) => ChunkVal::Quad(0, 8, 0),
        (2, -1) => ChunkVal::Quad(0, 9, 1),
        (3, 1) => ChunkVal::Quad(0, 5, 2),
        (3, -1) => ChunkVal::Quad(0, 8, 1),
        _ => unreachable!(),
    }
}

/// P^ε1 I^a P^ε2 → catalog form (two of the eight degenerate to powers of C).
fn pip_chunk(e1: i8, a: i64, e2: i8) -> ChunkVal {
    match (e1, a, e2) {
        (1, 1, 1) => ChunkVal::Quad(0, 12, 0),
        (1, 2, 1) => ChunkVal::Quad(2, 11, 0),
        (1, 3, 1) => ChunkVal::Lin(2),
        (1, 1, -1) => ChunkVal::Quad(0, 10, 1),
        (1, 2, -1) => ChunkVal::Quad(0, 12, 1),
        (1, 3, -1) => ChunkVal::Quad(2, 11, 1),
        (-1, 1, 1) => ChunkVal::Quad(1, 10, 0),
        (-1, 2, 1) => ChunkVal::Quad(1, 12, 0),
        (-1, 3, 1) => ChunkVal::Quad(0, 11, 0),
        (-1, 1, -1) => ChunkVal::Lin(1),
        (-1, 2, -1) => ChunkVal::Quad(1, 10, 1),
        (-1, 3, -1) => ChunkVal::Quad(1, 12, 1),
        _ => unreachable!(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    C(i64),
    I(i64),
    Pe(i8),
}

/// w ≡ C^prefix · W_k ⋯ W_1 modulo R; the returned factors are in reading
/// order [W_k, …, W_1]. The prefix is nonzero only for pure powers of C.
pub fn to_quadratic_words(w: &Word) -> (u8, Vec<QuadraticWord>) {
    let nw = normalize(w);
    // token stream with P powers expanded into ±1 blocks
    let mut toks: Vec<Tok> = Vec::new();
    for (g, e) in nw.letters() {
        match g {
            Gen::C => toks.push(Tok::C(*e)),
            Gen::I => toks.push(Tok::I(*e)),
            Gen::P => match e {
                1 => toks.push(Tok::Pe(1)),
                2 => {
                    toks.push(Tok::Pe(1));
                    toks.push(Tok::Pe(1));
                }
                3 => {
                    toks.push(Tok::Pe(-1));
                    toks.push(Tok::Pe(-1));
                }
                4 => toks.push(Tok::Pe(-1)),
                _ => unreachable!(),
            },
        }
    }
    let mut pending: u8 = 0; // accumulated C power waiting for the next factor
    let mut out: Vec<QuadraticWord> = Vec::new();
    let push = |pending: &mut u8, out: &mut Vec<QuadraticWord>, v: ChunkVal| match v {
        ChunkVal::Lin(c) => *pending = (*pending + c) % 3,
        ChunkVal::Quad(a, i, b) => {
            out.push(QuadraticWord::new((*pending + a) % 3, i, b));
            *pending = 0;
        }
    };
    let mut idx = 0;
    while idx < toks.len() {
        match toks[idx] {
            Tok::C(e) => {
                pending = (pending + e.rem_euclid(3) as u8) % 3;
                idx += 1;
            }
            Tok::Pe(e1) => {
                // longest match: P^ε I^a P^ε'
                if idx + 2 < toks.len() {
                    if let (Tok::I(a), Tok::Pe(e2)) = (toks[idx + 1], toks[idx + 2]) {
                        push(&mut pending, &mut out, pip_chunk(e1, a, e2));
                        idx += 3;
                        continue;
                    }
                }
                let v = if e1 == 1 {
                    ChunkVal::Quad(0, 4, 0)
                } else {
                    ChunkVal::Quad(0, 5, 0)
                };
                push(&mut pending, &mut out, v);
                idx += 1;
            }
            Tok::I(a) => {
                if idx + 1 < toks.len() {
                    if let Tok::Pe(e) = toks[idx + 1] {
                        push(&mut pending, &mut out, ip_chunk(a, e));
                        idx += 2;
                        continue;
                    }
                }
                let i = match a {
                    1 => 1,
                    2 => 3,
                    _ => 2,
                };
                push(&mut pending, &mut out, ChunkVal::Quad(0, i, 0));
                idx += 1;
            }
        }
    }
    if out.is_empty() {
        (pending, out)
    } else {
        // trailing C power joins the rightmost factor
        let last = out.last_mut().unwrap();
        last.b = (last.b + pending) % 3;
        (0, out)
    }
}

// ---------------------------------------------------------------------------
// The reduction algorithm
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub step: usize,
    pub d_max: usize,
    pub n: usize,
    pub r: Option<usize>,
    pub action: String,
    pub factors: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    /// Normal form: empty, C^a, or C^a·(quadratic word); for flagged results
    /// the full simplified factor sequence.
    pub word: Word,
    /// true iff the value has degree > 2 (no normal form defined).
    pub flagged: bool,
    pub value_degree: usize,
    pub trace: Vec<TraceStep>,
}

pub fn default_degree_cap() -> usize {
    std::env::var("CREMONA_DEGREE_CAP")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1 << 10)
}

pub fn reduce(w: &Word) -> Result<Reduction> {
    reduce_with_cap(w, default_degree_cap())
}

/// Word of C^prefix · ws[k−1] ⋯ ws[0] (ws is stored rightmost-first).
fn sequence_word(prefix: u8, ws: &[QuadraticWord]) -> Word {
    let mut word = Word::new(vec![(Gen::C, prefix as i64)]);
    for q in ws.iter().rev() {
        word = word.concat(&q.to_word());
    }
    word
}

fn labels(prefix: u8, ws: &[QuadraticWord]) -> Vec<String> {
    let mut v: Vec<String> = ws.iter().rev().map(|q| q.label()).collect();
    if prefix != 0 {
        v.insert(0, format!("C^{}", prefix));
    }
    v
}

struct Reducer {
    // ws[0] = W₁ is the rightmost factor
    ws: Vec<QuadraticWord>,
    prefix: u8,
    cap: usize,
    trace: Vec<TraceStep>,
    step: usize,
    last_dn: Option<(usize, usize)>,
}

pub fn reduce_with_cap(w: &Word, cap: usize) -> Result<Reduction> {
    if cap < 2 {
        return Err(Error::invalid("degree cap must be at least 2"));
    }
    let (prefix, factors) = to_quadratic_words(w);
    let red = Reducer {
        ws: factors.into_iter().rev().collect(),
        prefix,
        cap,
        trace: vec![],
        step: 0,
        last_dn: None,
    };
    red.run()
}

impl Reducer {
    fn record(&mut self, d_max: usize, n: usize, r: Option<usize>, action: String) {
        self.step += 1;
        self.trace.push(TraceStep {
            step: self.step,
            d_max,
            n,
            r,
            action,
            factors: labels(self.prefix, &self.ws),
        });
    }

    /// N_i = (W_i ⋯ W_1)⁻¹ for i = 0..=k, with the degree guard.
    fn inverse_chain(&self) -> Result<Vec<BirationalMap>> {
        let mut n = vec![identity()];
        for q in &self.ws {
            let next = compose(n.last().unwrap(), &qword_eval(&qword_invert(q)));
            if next.degree() > self.cap {
                return Err(Error::DegreeCap { degree: next.degree(), cap: self.cap });
            }
            n.push(next);
        }
        Ok(n)
    }

    fn run(mut self) -> Result<Reduction> {
        loop {
            let k = self.ws.len();
            if k == 0 {
                let word = sequence_word(self.prefix, &[]);
                return Ok(Reduction {
                    word,
                    flagged: false,
                    value_degree: 1,
                    trace: self.trace,
                });
            }
            let chain = self.inverse_chain()?;
            let d: Vec<usize> = chain.iter().map(|m| m.degree()).collect();
            let dmax = *d[1..].iter().max().unwrap();
            if dmax <= 2 {
                if k == 1 {
                    let word = sequence_word(self.prefix, &self.ws);
                    return Ok(Reduction {
                        word,
                        flagged: false,
                        value_degree: 2,
                        trace: self.trace,
                    });
                }
                // W₂W₁ has degree ≤ 2, hence is itself a catalog element
                self.collapse_at(0, d[2])?;
                self.record(dmax, 0, None, "collapse W2·W1".into());
                continue;
            }
            let n = (1..=k).rev().find(|&i| d[i] == dmax).unwrap();
            if let Some(prev) = self.last_dn {
                if (dmax, n) >= prev {
                    return Err(Error::internal(format!(
                        "(D, n) failed to decrease: {:?} -> {:?}",
                        prev,
                        (dmax, n)
                    )));
                }
            }
            self.last_dn = Some((dmax, n));
            if n == k {
                // the value itself has degree > 2: no normal form, flag it
                let word = sequence_word(self.prefix, &self.ws);
                self.record(dmax, n, None, "value degree exceeds 2; stopping".into());
                return Ok(Reduction {
                    word,
                    flagged: true,
                    value_degree: dmax,
                    trace: self.trace,
                });
            }
            let wn = self.ws[n - 1];
            let wn1 = self.ws[n];
            let pair = compose(&qword_eval(&wn1), &qword_eval(&wn));
            let r = pair.degree();
            match r {
                1 | 2 => {
                    self.collapse_at(n - 1, r)?;
                    self.record(dmax, n, Some(r), "collapse W(n+1)·Wn".into());
                }
                3 | 4 => {
                    let lam = LinearSystem::new(chain[n].components().clone());
                    let mut memo: BTreeMap<InfNearPoint, usize> = BTreeMap::new();
                    {
                        let m_of = |memo: &mut BTreeMap<InfNearPoint, usize>,
                                    p: &InfNearPoint| {
                            *memo
                                .entry(p.clone())
                                .or_insert_with(|| multiplicity(&lam, p))
                        };
                        let s_set = qword_base_points(&wn1);
                        let t_set = qword_base_points(&qword_invert(&wn));
                        let sum_s: usize =
                            s_set.iter().map(|p| m_of(&mut memo, p)).sum();
                        let sum_t: usize =
                            t_set.iter().map(|p| m_of(&mut memo, p)).sum();
                        if sum_s != 2 * dmax - d[n + 1] || sum_t != 2 * dmax - d[n - 1] {
                            return Err(Error::internal(format!(
                                "multiplicity sums violate the degree formula: ΣS={} ΣT={} D={} d(n±1)=({}, {})",
                                sum_s, sum_t, dmax, d[n + 1], d[n - 1]
                            )));
                        }
                        let shared: Vec<InfNearPoint> =
                            s_set.iter().filter(|p| t_set.contains(p)).cloned().collect();
                        if shared.len() != 4 - r {
                            return Err(Error::internal(format!(
                                "deg(W(n+1)Wn) = {} but |S∩T| = {}",
                                r,
                                shared.len()
                            )));
                        }
                        let left = qword_eval(&wn1);
                        let right = qword_eval(&wn);
                        if r == 3 {
                            let (s1, s2) = self.split_r3(
                                &left, &s_set, &right, &t_set, &lam, &mut memo, dmax,
                            )?;
                            self.ws.splice(n - 1..=n, [s1, s2]);
                        } else {
                            let s_new = self.split_r4(
                                &left, &s_set, &right, &t_set, &lam, &mut memo, dmax,
                            )?;
                            self.ws.splice(n - 1..=n, s_new);
                        }
                    }
                    self.record(dmax, n, Some(r), format!("split degree-{} pair", r));
                }
                _ => {
                    return Err(Error::internal(format!(
                        "adjacent quadratic factors composed to degree {}",
                        r
                    )))
                }
            }
        }
    }

    /// Replace the pair (ws[idx], ws[idx+1]) = (W_right, W_left), whose
    /// composition W_left ∘ W_right has degree ≤ 2, by its catalog word.
    fn collapse_at(&mut self, idx: usize, expected_deg: usize) -> Result<()> {
        let m = compose(&qword_eval(&self.ws[idx + 1]), &qword_eval(&self.ws[idx]));
        debug_assert_eq!(m.degree(), expected_deg);
        match find_word_for_map(&m) {
            Some(LinOrQuad::Quad(q)) => {
                self.ws.splice(idx..=idx + 1, [q]);
                Ok(())
            }
            Some(LinOrQuad::Lin(c)) => {
                self.ws.splice(idx..=idx + 1, std::iter::empty());
                if idx < self.ws.len() {
                    // absorb into the right end of the left neighbour
                    let w = &mut self.ws[idx];
                    w.b = (w.b + c) % 3;
                } else {
                    self.prefix = (self.prefix + c) % 3;
                }
                Ok(())
            }
            None => Err(Error::internal(
                "degree ≤ 2 composition matched no catalog word",
            )),
        }
    }

    /// r = 3: one shared point u; candidate sets from the proof's ordering,
    /// filtered by (★★) Σm > D and (◊); returns (σ₁, σ₂) with
    /// W_left ∘ W_right = σ₂ ∘ σ₁.
    #[allow(clippy::too_many_arguments)]
    fn split_r3(
        &self,
        left: &BirationalMap,
        s_set: &[InfNearPoint],
        right: &BirationalMap,
        t_set: &[InfNearPoint],
        lam: &LinearSystem,
        memo: &mut BTreeMap<InfNearPoint, usize>,
        dmax: usize,
    ) -> Result<(QuadraticWord, QuadraticWord)> {
        let m_of = |memo: &mut BTreeMap<InfNearPoint, usize>, p: &InfNearPoint| {
            *memo.entry(p.clone()).or_insert_with(|| multiplicity(lam, p))
        };
        let shared: Vec<InfNearPoint> =
            s_set.iter().filter(|p| t_set.contains(p)).cloned().collect();
        if shared.len() != 1 {
            return Err(Error::internal("r = 3 requires exactly one shared base point"));
        }
        let u = shared[0].clone();
        let order = |memo: &mut BTreeMap<_, _>, set: &[InfNearPoint]| {
            let mut v: Vec<(usize, InfNearPoint)> = set
                .iter()
                .filter(|p| **p != u)
                .map(|p| (m_of(memo, p), p.clone()))
                .collect();
            v.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            v
        };
        let ss = order(memo, s_set);
        let ts = order(memo, t_set);
        let mu = m_of(memo, &u);
        let candidates: [Vec<InfNearPoint>; 2] = if mu + ss[0].0 + ts[1].0 > dmax {
            [
                vec![u.clone(), ss[0].1.clone(), ts[0].1.clone()],
                vec![u.clone(), ss[0].1.clone(), ts[1].1.clone()],
            ]
        } else if mu + ts[0].0 + ss[1].0 > dmax {
            [
                vec![u.clone(), ts[0].1.clone(), ss[0].1.clone()],
                vec![u.clone(), ts[0].1.clone(), ss[1].1.clone()],
            ]
        } else {
            return Err(Error::internal(
                "neither point-selection alternative exceeds the degree bound (★★)",
            ));
        };
        let chosen = candidates
            .iter()
            .find(|a| diamond(a))
            .ok_or_else(|| Error::internal("no candidate set satisfies (◊)"))?;
        let q = find_quadratic_word_checked(&lift(chosen))?;
        let qm = qword_eval(&q);
        let qi = qword_eval(&qword_invert(&q));
        let sigma1 = as_quad(find_word_for_map(&compose(&qm, right)))?;
        let sigma2 = as_quad(find_word_for_map(&compose(left, &qi)))?;
        Ok((sigma1, sigma2))
    }

    /// r = 4: no shared point; pick a one-against-two candidate set, split
    /// off one quadratic factor and recurse into an r = 3 split for the
    /// remaining degree-3 composition. Returns the three replacement factors
    /// rightmost-first.
    #[allow(clippy::too_many_arguments)]
    fn split_r4(
        &self,
        left: &BirationalMap,
        s_set: &[InfNearPoint],
        right: &BirationalMap,
        t_set: &[InfNearPoint],
        lam: &LinearSystem,
        memo: &mut BTreeMap<InfNearPoint, usize>,
        dmax: usize,
    ) -> Result<Vec<QuadraticWord>> {
        let m_of = |memo: &mut BTreeMap<InfNearPoint, usize>, p: &InfNearPoint| {
            *memo.entry(p.clone()).or_insert_with(|| multiplicity(lam, p))
        };
        let order = |memo: &mut BTreeMap<_, _>, set: &[InfNearPoint]| {
            let mut v: Vec<(usize, InfNearPoint)> =
                set.iter().map(|p| (m_of(memo, p), p.clone())).collect();
            v.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            v
        };
        let ss = order(memo, s_set);
        let ts = order(memo, t_set);
        let fam = |one: &[(usize, InfNearPoint)], two: &[(usize, InfNearPoint)]| {
            vec![
                (one[0].0 + two[1].0 + two[2].0, vec![one[0].1.clone(), two[1].1.clone(), two[2].1.clone()]),
                (one[0].0 + two[0].0 + two[2].0, vec![one[0].1.clone(), two[0].1.clone(), two[2].1.clone()]),
                (one[0].0 + two[0].0 + two[1].0, vec![one[0].1.clone(), two[0].1.clone(), two[1].1.clone()]),
            ]
        };
        // primary family: one point of S against two of T
        for (sum, cand) in fam(&ss, &ts) {
            if sum > dmax && diamond(&cand) {
                let q = find_quadratic_word_checked(&lift(&cand))?;
                let qm = qword_eval(&q);
                let qinv = qword_invert(&q);
                let qim = qword_eval(&qinv);
                // σ₀ = Q ∘ W_right has degree 2 (two of Q's points lie in T)
                let sigma0 = as_quad(find_word_for_map(&compose(&qm, right)))?;
                let qbp = qword_base_points(&q);
                let (sigma1, sigma2) =
                    self.split_r3(left, s_set, &qim, &qbp, lam, memo, dmax)?;
                return Ok(vec![sigma0, sigma1, sigma2]);
            }
        }
        // exchanged family: one point of T against two of S
        for (sum, cand) in fam(&ts, &ss) {
            if sum > dmax && diamond(&cand) {
                let q = find_quadratic_word_checked(&lift(&cand))?;
                let qm = qword_eval(&q);
                let qinv = qword_invert(&q);
                let qim = qword_eval(&qinv);
                // σ₀' = W_left ∘ Q⁻¹ has degree 2 (two of Q's points lie in S)
                let sigma0 = as_quad(find_word_for_map(&compose(left, &qim)))?;
                let qbp = qword_base_points(&q);
                let (sigma1, sigma2) =
                    self.split_r3(&qm, &qbp, right, t_set, lam, memo, dmax)?;
                return Ok(vec![sigma1, sigma2, sigma0]);
            }
        }
        Err(Error::internal(
            "no r = 4 candidate set satisfies (★★) and (◊)",
        ))
    }
}

/// (◊): every triangle line contains one of the points (strict-transform
/// containment for infinitely near points).
fn diamond(set: &[InfNearPoint]) -> bool {
    [HomPoly::var(0), HomPoly::var(1), HomPoly::var(2)]
        .iter()
        .all(|l| set.iter().any(|p| line_contains(l, p)))
}

/// Replace infinitely near points whose carrier is absent by the carrier,
/// establishing precondition (P) of `find_quadratic_word`.
fn lift(set: &[InfNearPoint]) -> Vec<InfNearPoint> {
    let mut out: Vec<InfNearPoint> = Vec::with_capacity(3);
    for p in set {
        let q = if !p.is_proper() && !set.contains(&p.carrier()) {
            p.carrier()
        } else {
            p.clone()
        };
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

fn find_quadratic_word_checked(set: &[InfNearPoint]) -> Result<QuadraticWord> {
    if set.len() != 3 {
        return Err(Error::internal(
            "lifting collapsed the candidate set below three points",
        ));
    }
    find_quadratic_word(&set[0], &set[1], &set[2])
        .map_err(|e| Error::internal(format!("quadratic-word lookup failed in reduction: {}", e)))
}

fn as_quad(c: Option<LinOrQuad>) -> Result<QuadraticWord> {
    match c {
        Some(LinOrQuad::Quad(q)) => Ok(q),
        other => Err(Error::internal(format!(
            "rewriting produced a non-quadratic factor: {:?}",
            other
        ))),
    }
}

/// f_*ω for f given as a word of H: the inverse map is the evaluation of the
/// letter-wise inverse, so no polynomial inversion is needed.
pub fn pushforward_word(
    w: &Word,
    form: &crate::forms::RationalTwoForm,
) -> crate::forms::RationalTwoForm {
    crate::forms::pullback(&eval(&invert(w)), form)
}

/// true iff w = 1 in H; the rewriting verdict is cross-checked against the
/// direct polynomial composition.
pub fn is_identity(w: &Word) -> Result<bool> {
    is_identity_with_cap(w, default_degree_cap())
}

pub fn is_identity_with_cap(w: &Word, cap: usize) -> Result<bool> {
    let red = reduce_with_cap(w, cap)?;
    let verdict = red.word.is_empty() && !red.flagged;
    let direct = equal(&eval_capped(w, cap.max(32))?, &identity());
    if verdict != direct {
        return Err(Error::internal(format!(
            "word problem verdicts disagree: reduce says {}, eval says {}",
            verdict, direct
        )));
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{p_pow, swap_map};

    fn w(s: &str) -> Word {
        parse(s).unwrap()
    }

    #[test]
    fn parse_and_format() {
        let word = w("P C P I^-1");
        assert_eq!(
            word.letters(),
            &[(Gen::P, 1), (Gen::C, 1), (Gen::P, 1), (Gen::I, -1)]
        );
        assert_eq!(format(&word), "P C P I^-1");
        assert_eq!(w("P^5").letters(), &[(Gen::P, 5)]);
        assert_eq!(w("C*I^2*P").letters(), &[(Gen::C, 1), (Gen::I, 2), (Gen::P, 1)]);
        assert!(w("").is_empty());
        match parse("Q3") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 0),
            other => panic!("expected parse error, got {:?}", other),
        }
        assert!(parse("P^").is_err());
        assert!(parse("Px").is_err());
        // free reduction merges adjacent powers
        assert_eq!(w("P P^-1 C").letters(), &[(Gen::C, 1)]);
    }

    #[test]
    fn eval_examples() {
        assert!(equal(&eval(&w("P C P")), &eval(&w("I"))));
        assert!(equal(&eval(&Word::empty()), &identity()));
        assert!(equal(&eval(&w("I I P")), &q_map(8)));
        assert!(equal(&eval(&w("P^2")), &p_pow(2)));
    }

    #[test]
    fn invert_words() {
        assert_eq!(format(&invert(&w("P C"))), "C^-1 P^-1");
        assert!(equal(
            &compose(&eval(&w("P C I^2")), &eval(&invert(&w("P C I^2")))),
            &identity()
        ));
    }

    #[test]
    fn normalize_words() {
        assert!(normalize(&w("P^5")).is_empty());
        assert_eq!(normalize(&w("I^-1")).letters(), &[(Gen::I, 3)]);
        assert_eq!(normalize(&w("C^4 C^2")).letters(), &[]);
        assert_eq!(normalize(&w("P^7")).letters(), &[(Gen::P, 2)]);
    }

    #[test]
    fn qword_inverse_table() {
        assert_eq!(qword_invert(&QuadraticWord::new(0, 4, 0)), QuadraticWord::new(0, 5, 0));
        assert_eq!(qword_invert(&QuadraticWord::new(1, 4, 0)), QuadraticWord::new(0, 5, 2));
        for i in 1..=12u8 {
            for (a, b) in [(0u8, 0u8), (1, 2), (2, 1)] {
                let q = QuadraticWord::new(a, i, b);
                let qi = qword_invert(&q);
                assert!(
                    equal(&compose(&qword_eval(&q), &qword_eval(&qi)), &identity()),
                    "inverse table fails for {:?}",
                    q
                );
            }
        }
    }

    #[test]
    fn swap_conjugation_table() {
        assert_eq!(conjugate_swap(&QuadraticWord::new(0, 6, 0)), QuadraticWord::new(0, 7, 0));
        assert_eq!(conjugate_swap(&QuadraticWord::new(0, 9, 0)), QuadraticWord::new(0, 8, 1));
        // the constructor itself verifies map equality; run the full table
        let tau = swap_map();
        for i in 1..=12u8 {
            let q = QuadraticWord::new(0, i, 0);
            let c = conjugate_swap(&q);
            let expect = compose(&tau, &compose(&qword_eval(&q), &tau));
            assert!(equal(&qword_eval(&c), &expect));
        }
    }

    #[test]
    fn packing_examples() {
        assert_eq!(to_quadratic_words(&w("I P")), (0, vec![QuadraticWord::new(0, 9, 0)]));
        assert_eq!(to_quadratic_words(&w("P I P")), (0, vec![QuadraticWord::new(0, 12, 0)]));
        assert_eq!(to_quadratic_words(&w("I^3 P^-1")), (0, vec![QuadraticWord::new(0, 8, 1)]));
        assert_eq!(to_quadratic_words(&w("C C")), (2, vec![]));
        for s in ["P C P I^-1", "I^2 C P^3", "P^2 I^3 C^2 P", "C I P I^2 P^-1 C"] {
            let word = w(s);
            let (pre, fs) = to_quadratic_words(&word);
            let mut m = c_pow(pre as i64);
            for q in &fs {
                m = compose(&m, &qword_eval(q));
            }
            assert!(equal(&m, &eval(&word)), "packing changed the value of {}", s);
        }
    }

    #[test]
    fn find_words() {
        assert_eq!(
            find_word_for_map(&identity()),
            Some(LinOrQuad::Lin(0))
        );
        assert_eq!(
            find_word_for_map(&q_map(10)),
            Some(LinOrQuad::Quad(QuadraticWord::new(0, 10, 0)))
        );
        assert_eq!(
            find_word_for_map(&compose(&p_pow(3), &c_pow(0))),
            Some(LinOrQuad::Quad(QuadraticWord::new(0, 11, 1)))
        );
        assert_eq!(find_word_for_map(&swap_map()), None);
    }

    #[test]
    fn find_quadratic_word_examples() {
        use crate::point::{p1, p2, p3, q1, q2, q3};
        let pr = InfNearPoint::proper;
        assert_eq!(
            find_quadratic_word(&pr(p1()), &pr(p2()), &pr(p3())).unwrap(),
            QuadraticWord::new(0, 3, 0)
        );
        assert_eq!(
            find_quadratic_word(&pr(p1()), &pr(q1()), &pr(q3())).unwrap(),
            QuadraticWord::new(0, 11, 0)
        );
        assert!(matches!(
            find_quadratic_word(&pr(q1()), &pr(q2()), &pr(q3())),
            Err(Error::InvalidInput(_))
        ));
        // p1, p3, q2 all lie on Y = 0: collinear, hence rejected
        assert!(find_quadratic_word(&pr(p1()), &pr(p3()), &pr(q2())).is_err());
    }

    #[test]
    fn simplify_pair_examples() {
        // (Q₇)⁻¹ = Q₈: f·g⁻¹ = identity
        let f = QuadraticWord::new(0, 8, 0);
        let g = qword_invert(&QuadraticWord::new(0, 7, 0));
        assert_eq!(simplify_pair(&f, &g).unwrap(), LinOrQuad::Lin(0));
        // P² · (P⁻¹)⁻¹ = P³
        let f = QuadraticWord::new(0, 10, 0);
        let g = QuadraticWord::new(0, 5, 0);
        assert_eq!(
            simplify_pair(&f, &g).unwrap(),
            LinOrQuad::Quad(QuadraticWord::new(0, 11, 1))
        );
    }

    #[test]
    fn reduce_relations() {
        for s in ["P P P P P", "P C P I^-1", "C C C", "I^4", "I I C I^-1 I^-1 C^-1"] {
            let red = reduce(&w(s)).unwrap();
            assert!(red.word.is_empty(), "expected {} to reduce to the identity", s);
            assert!(!red.flagged);
            assert!(is_identity(&w(s)).unwrap());
        }
        assert!(!is_identity(&w("C I C^-1 I^-1")).unwrap());
        assert!(!is_identity(&w("P")).unwrap());
    }

    #[test]
    fn reduce_soundness_fixed_words() {
        for s in [
            "P I P I",
            "I P I P I",
            "P^2 I P^2 I^2",
            "C P I^2 P C^2 I",
            "P I^3 P I P^-1",
            "I P^-1 I^2 P^2 C",
        ] {
            let word = w(s);
            let red = reduce(&word).unwrap();
            assert!(
                equal(&eval(&red.word), &eval(&word)),
                "reduction changed the value of {}",
                s
            );
            if !red.flagged {
                assert!(eval(&word).degree() <= 2);
            } else {
                assert!(eval(&word).degree() > 2);
            }
        }
    }

    #[test]
    fn reduce_flags_high_degree_values() {
        // (PI)^2 has degree 3: no linear/quadratic normal form exists
        let word = w("P I P I");
        assert_eq!(eval(&word).degree(), 3);
        let red = reduce(&word).unwrap();
        assert!(red.flagged);
        assert_eq!(red.value_degree, 3);
        assert!(equal(&eval(&red.word), &eval(&word)));
    }

    #[test]
    fn degree_cap_fires() {
        let word = w("P I P I P I P I P I P I");
        assert!(matches!(
            reduce_with_cap(&word, 4),
            Err(Error::DegreeCap { .. })
        ));
    }
}
