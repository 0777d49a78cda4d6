//! Sparse homogeneous polynomials in Q[X,Y,Z], plus the univariate and
//! bivariate helpers (Euclidean gcd, Sturm sequences, resultants) that the
//! geometry layer needs. Everything is exact; there is no floating point in
//! this crate.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Q = BigRational;
pub type Int = BigInt;

pub fn qi(n: i64) -> Q {
    Q::from_integer(Int::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(Int::from(n), Int::from(d))
}

/// Homogeneous polynomial of a fixed degree. Terms are keyed by exponent
/// triples `[a,b,c]` with `a+b+c = degree`; the `BTreeMap` order on triples is
/// lexicographic with X > Y > Z, so the lex-leading term is the last entry.
/// The zero polynomial keeps its degree tag and has an empty term map.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HomPoly {
    degree: usize,
    terms: BTreeMap<[u32; 3], Q>,
}

impl HomPoly {
    pub fn zero(degree: usize) -> Self {
        HomPoly { degree, terms: BTreeMap::new() }
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn monomial(exps: [u32; 3], c: Q) -> Self {
        let degree = (exps[0] + exps[1] + exps[2]) as usize;
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        HomPoly { degree, terms }
    }

    /// The coordinate X (i=0), Y (i=1) or Z (i=2).
    pub fn var(i: usize) -> Self {
        let mut e = [0u32; 3];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn from_terms(degree: usize, it: impl IntoIterator<Item = ([u32; 3], Q)>) -> Self {
        let mut terms: BTreeMap<[u32; 3], Q> = BTreeMap::new();
        for (e, c) in it {
            assert_eq!(
                (e[0] + e[1] + e[2]) as usize,
                degree,
                "exponent triple {:?} does not match degree {}",
                e,
                degree
            );
            let entry = terms.entry(e).or_insert_with(Q::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        HomPoly { degree, terms }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.degree == 0
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32; 3], &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn leading(&self) -> Option<(&[u32; 3], &Q)> {
        self.terms.iter().next_back()
    }

    pub fn coeff(&self, e: &[u32; 3]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn neg(&self) -> Self {
        HomPoly {
            degree: self.degree,
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(*e).or_insert_with(Q::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        HomPoly { degree: self.degree, terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let degree = self.degree + other.degree;
        if self.is_zero() || other.is_zero() {
            return HomPoly::zero(degree);
        }
        let mut terms: BTreeMap<[u32; 3], Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                let entry = terms.entry(e).or_insert_with(Q::zero);
                *entry += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        HomPoly { degree, terms }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return HomPoly::zero(self.degree);
        }
        HomPoly {
            degree: self.degree,
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = HomPoly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn evaluate(&self, p: &[Q; 3]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, pi) in p.iter().enumerate() {
                for _ in 0..e[i] {
                    t *= pi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn evaluate_int(&self, p: &[Int; 3]) -> Q {
        let pq = [
            Q::from_integer(p[0].clone()),
            Q::from_integer(p[1].clone()),
            Q::from_integer(p[2].clone()),
        ];
        self.evaluate(&pq)
    }

    /// Substitute the triple `f` for (X, Y, Z). All three substituted
    /// polynomials must share one degree e; the result has degree `deg·e`.
    pub fn substitute(&self, f: &[HomPoly; 3]) -> HomPoly {
        let e = f[0].degree;
        assert!(f.iter().all(|p| p.degree == e), "substitute needs equal degrees");
        let out_deg = self.degree * e;
        if self.is_zero() {
            return HomPoly::zero(out_deg);
        }
        // Cache powers of each component up to the maximum exponent used.
        let mut maxes = [0u32; 3];
        for (exp, _) in &self.terms {
            for i in 0..3 {
                maxes[i] = maxes[i].max(exp[i]);
            }
        }
        let mut pows: [Vec<HomPoly>; 3] = [vec![], vec![], vec![]];
        for i in 0..3 {
            let mut v = Vec::with_capacity(maxes[i] as usize + 1);
            v.push(HomPoly::one());
            for k in 1..=maxes[i] as usize {
                let next = v[k - 1].mul(&f[i]);
                v.push(next);
            }
            pows[i] = v;
        }
        let mut acc = HomPoly::zero(out_deg);
        for (exp, c) in &self.terms {
            let t = pows[0][exp[0] as usize]
                .mul(&pows[1][exp[1] as usize])
                .mul(&pows[2][exp[2] as usize]);
            acc = acc.add(&t.scale(c));
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> HomPoly {
        let degree = self.degree.saturating_sub(1);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = *e;
            e2[var] -= 1;
            terms.insert(e2, c * qi(e[var] as i64));
        }
        HomPoly { degree, terms }
    }

    /// Per-variable minimum exponents; `[0,0,0]` for the zero polynomial.
    pub fn min_exponents(&self) -> [u32; 3] {
        let mut m = [u32::MAX; 3];
        for (e, _) in &self.terms {
            for i in 0..3 {
                m[i] = m[i].min(e[i]);
            }
        }
        if self.is_zero() {
            [0, 0, 0]
        } else {
            m
        }
    }

    fn divide_monomial(&self, e: [u32; 3]) -> HomPoly {
        let degree = self.degree - (e[0] + e[1] + e[2]) as usize;
        let terms = self
            .terms
            .iter()
            .map(|(t, c)| ([t[0] - e[0], t[1] - e[1], t[2] - e[2]], c.clone()))
            .collect();
        HomPoly { degree, terms }
    }

    /// Scale so the lex-leading coefficient is 1 (no-op on zero).
    pub fn normalize_leading(&self) -> HomPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = Q::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    /// Exact division: returns q with q·d = self, or None.
    pub fn exact_divide(&self, d: &HomPoly) -> Option<HomPoly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(HomPoly::zero(self.degree.saturating_sub(d.degree)));
        }
        if self.degree < d.degree {
            return None;
        }
        let out_deg = self.degree - d.degree;
        let (de, dc) = d.leading().unwrap();
        let (de, dc) = (*de, dc.clone());
        let mut rem = self.clone();
        let mut quo: Vec<([u32; 3], Q)> = Vec::new();
        while let Some((re, rc)) = rem.leading() {
            if re[0] < de[0] || re[1] < de[1] || re[2] < de[2] {
                return None;
            }
            let qe = [re[0] - de[0], re[1] - de[1], re[2] - de[2]];
            let qc = rc / &dc;
            let t = HomPoly::monomial(qe, qc.clone());
            rem = rem.sub(&t.mul(d));
            quo.push((qe, qc));
        }
        Some(HomPoly::from_terms(out_deg, quo))
    }

    /// GCD over Q[X,Y,Z], normalized so the lex-leading coefficient is 1.
    /// Works by stripping monomial content, dehomogenizing on the variable
    /// with the lowest maximum exponent, and running a primitive-part
    /// Euclidean remainder sequence on the resulting bivariate polynomials.
    pub fn gcd(p: &HomPoly, q: &HomPoly) -> HomPoly {
        if p.is_zero() {
            return q.normalize_leading();
        }
        if q.is_zero() {
            return p.normalize_leading();
        }
        let pm = p.min_exponents();
        let qm = q.min_exponents();
        let common = [pm[0].min(qm[0]), pm[1].min(qm[1]), pm[2].min(qm[2])];
        // Stripping each argument's own monomial content is harmless: a common
        // divisor coprime to X (say) of (X^k·A, B) already divides (A, B).
        let ps = p.divide_monomial(pm);
        let qs = q.divide_monomial(qm);
        let core = Self::gcd_core(&ps, &qs);
        core.mul(&HomPoly::monomial(common, Q::one())).normalize_leading()
    }

    fn gcd_core(p: &HomPoly, q: &HomPoly) -> HomPoly {
        if p.is_constant() || q.is_constant() {
            return HomPoly::one();
        }
        // Choose the kill variable: smallest maximum exponent across both.
        let mut maxes = [0u32; 3];
        for poly in [p, q] {
            for (e, _) in &poly.terms {
                for i in 0..3 {
                    maxes[i] = maxes[i].max(e[i]);
                }
            }
        }
        let kill = (0..3).min_by_key(|&i| maxes[i]).unwrap();
        let keep: [usize; 2] = match kill {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        let deh = |h: &HomPoly| -> BiPoly {
            let mut b = BiPoly::zero();
            for (e, c) in &h.terms {
                b.add_term([e[keep[0]], e[keep[1]]], c.clone());
            }
            b
        };
        let g = BiPoly::gcd(&deh(p), &deh(q));
        // Rehomogenize: both inputs had no monomial content, so the true gcd
        // is the degree-preserving homogenization of the bivariate gcd.
        let total = g
            .terms
            .iter()
            .map(|(e, _)| e[0] + e[1])
            .max()
            .unwrap_or(0);
        let mut terms = Vec::new();
        for (e, c) in &g.terms {
            let mut t = [0u32; 3];
            t[keep[0]] = e[0];
            t[keep[1]] = e[1];
            t[kill] = total - e[0] - e[1];
            terms.push((t, c.clone()));
        }
        HomPoly::from_terms(total as usize, terms)
    }

    /// Clear denominators and divide by the integer content; the result has
    /// coprime integer coefficients and positive lex-leading coefficient.
    /// Returns the primitive polynomial (used for canonical printing).
    pub fn primitive_integer_form(&self) -> HomPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut den_lcm = Int::one();
        for (_, c) in &self.terms {
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
        }
        let mut num_gcd = Int::zero();
        for (_, c) in &self.terms {
            let n = c.numer() * &den_lcm / c.denom();
            num_gcd = num::integer::gcd(num_gcd, n);
        }
        let mut factor = Q::new(den_lcm, num_gcd);
        if (self.leading().unwrap().1 * &factor).is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }
}

impl fmt::Debug for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let vars = ["X", "Y", "Z"];
        let mut first = true;
        // print in descending lex order, X-heavy terms first
        for (e, c) in self.terms.iter().rev() {
            let mut mon = String::new();
            for (i, v) in vars.iter().enumerate() {
                match e[i] {
                    0 => {}
                    1 => mon.push_str(v),
                    k => mon.push_str(&format!("{}^{}", v, k)),
                }
            }
            let coeff_str = if mon.is_empty() {
                format!("{}", c)
            } else if c.is_one() {
                mon.clone()
            } else if (-c.clone()).is_one() {
                format!("-{}", mon)
            } else {
                format!("{}*{}", c, mon)
            };
            if first {
                write!(f, "{}", coeff_str)?;
                first = false;
            } else if coeff_str.starts_with('-') {
                write!(f, " - {}", &coeff_str[1..])?;
            } else {
                write!(f, " + {}", coeff_str)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Univariate polynomials over Q
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over Q; `coeffs[i]` multiplies x^i, trailing
/// zeros trimmed. The zero polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq)]
pub struct UniPoly {
    pub coeffs: Vec<Q>,
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly{:?}", self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>())
    }
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        UniPoly { coeffs: vec![Q::one()] }
    }

    pub fn constant(c: Q) -> Self {
        let mut p = UniPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn from_coeffs(coeffs: Vec<Q>) -> Self {
        let mut p = UniPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn lc(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut c = vec![Q::zero(); n];
        for (i, v) in self.coeffs.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in o.coeffs.iter().enumerate() {
            c[i] += v;
        }
        UniPoly::from_coeffs(c)
    }

    pub fn neg(&self) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut c = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(c)
    }

    pub fn scale(&self, k: &Q) -> Self {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Euclidean division; panics on zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.deg().unwrap();
        let mut rem = self.clone();
        let mut quo = vec![Q::zero(); self.coeffs.len().saturating_sub(dd)];
        let dlc = d.lc();
        while let Some(rd) = rem.deg() {
            if rd < dd {
                break;
            }
            let k = rem.lc() / &dlc;
            let shift = rd - dd;
            quo[shift] = k.clone();
            // rem -= k * x^shift * d
            for (i, c) in d.coeffs.iter().enumerate() {
                let idx = i + shift;
                let sub = &k * c;
                rem.coeffs[idx] -= sub;
            }
            rem.trim();
        }
        (UniPoly::from_coeffs(quo), rem)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = Q::one() / self.lc();
        self.scale(&inv)
    }

    pub fn gcd(a: &Self, b: &Self) -> Self {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.divrem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * qi(i as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// All rational roots (as a set, multiplicities dropped) via Sturm
    /// isolation of the integer roots of the monic transform
    /// h(u) = lc^(n-1)·f(u/lc). Exact and complete; no factorization.
    pub fn rational_roots(&self) -> Vec<Q> {
        assert!(!self.is_zero(), "rational_roots of zero polynomial");
        let mut roots = Vec::new();
        // strip x^k
        let k = self.coeffs.iter().position(|c| !c.is_zero()).unwrap();
        if k > 0 {
            roots.push(Q::zero());
        }
        let f = UniPoly::from_coeffs(self.coeffs[k..].to_vec());
        if f.deg() == Some(0) {
            return roots;
        }
        // squarefree part
        let g = {
            let d = UniPoly::gcd(&f, &f.derivative());
            f.divrem(&d).0
        };
        let n = g.deg().unwrap();
        if n == 0 {
            return roots;
        }
        // integer coefficients
        let mut den_lcm = Int::one();
        for c in &g.coeffs {
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
        }
        let a: Vec<Int> = g.coeffs.iter().map(|c| c.numer() * &den_lcm / c.denom()).collect();
        let lc = a[n].clone();
        // monic transform h(u) = lc^(n-1) g(u/lc): h_i = a_i · lc^(n-1-i)
        let mut h = Vec::with_capacity(n + 1);
        for (i, ai) in a.iter().enumerate() {
            let mut c = ai.clone();
            for _ in 0..(n - 1).saturating_sub(i) {
                c *= &lc;
            }
            if i == n {
                c = Int::one();
            }
            h.push(Q::from_integer(c));
        }
        let h = UniPoly::from_coeffs(h);
        for int_root in h.integer_roots_of_monic() {
            let r = Q::new(int_root, lc.clone());
            debug_assert!(g.eval(&r).is_zero());
            roots.push(r);
        }
        roots.sort();
        roots.dedup();
        roots
    }

    /// Integer roots of a squarefree monic integer polynomial, by Sturm
    /// bisection over half-integer endpoints (never roots, so the variation
    /// counts are always valid).
    fn integer_roots_of_monic(&self) -> Vec<Int> {
        let n = self.deg().unwrap();
        if n == 0 {
            return vec![];
        }
        // Cauchy bound: all roots have |r| <= 1 + max |a_i|
        let mut bound = Int::zero();
        for c in &self.coeffs[..n] {
            let v = c.numer().abs();
            if v > bound {
                bound = v;
            }
        }
        bound += 1;
        let seq = self.sturm_sequence();
        let var = |x: &Q| -> usize {
            let mut count = 0;
            let mut last: Option<bool> = None;
            for s in &seq {
                let v = s.eval(x);
                if v.is_zero() {
                    continue;
                }
                let sign = v.is_positive();
                if let Some(l) = last {
                    if l != sign {
                        count += 1;
                    }
                }
                last = Some(sign);
            }
            count
        };
        let half = qr(1, 2);
        let lo = Q::from_integer(-bound.clone()) - &half;
        let hi = Q::from_integer(bound.clone()) + &half;
        let mut out = Vec::new();
        let mut stack = vec![(lo.clone(), hi.clone(), var(&lo), var(&hi))];
        while let Some((a, b, va, vb)) = stack.pop() {
            if va <= vb {
                continue; // no roots in (a, b]
            }
            let width = (&b - &a).to_integer(); // integer by construction
            if width.is_one() {
                // unique integer candidate in (a, b]
                let cand = (&a + &half).to_integer();
                let cq = Q::from_integer(cand.clone());
                if self.eval(&cq).is_zero() {
                    out.push(cand);
                }
                continue;
            }
            let m = &a + Q::from_integer(width / 2);
            let vm = var(&m);
            stack.push((a, m.clone(), va, vm));
            stack.push((m, b, vm, vb));
        }
        out.sort();
        out
    }

    fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let k = seq.len();
            if seq[k - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[k - 2].divrem(&seq[k - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg().monic());
        }
        seq
    }
}

// ---------------------------------------------------------------------------
// Bivariate polynomials over Q (local charts, elimination)
// ---------------------------------------------------------------------------

/// General (not necessarily homogeneous) polynomial in two local variables
/// (u, v). Used for blow-up charts and resultant elimination.
#[derive(Clone, PartialEq, Eq)]
pub struct BiPoly {
    pub terms: BTreeMap<[u32; 2], Q>,
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({})u^{}v^{}", c, e[0], e[1])?;
            first = false;
        }
        Ok(())
    }
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert([0, 0], c);
        }
        BiPoly { terms: t }
    }

    pub fn var_u() -> Self {
        Self::monomial([1, 0], Q::one())
    }

    pub fn var_v() -> Self {
        Self::monomial([0, 1], Q::one())
    }

    pub fn monomial(e: [u32; 2], c: Q) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(e, c);
        }
        BiPoly { terms: t }
    }

    pub fn add_term(&mut self, e: [u32; 2], c: Q) {
        let entry = self.terms.entry(e).or_insert_with(Q::zero);
        *entry += c;
        if self.terms.get(&e).map(|v| v.is_zero()).unwrap_or(false) {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e == &[0, 0])
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(*e, c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        BiPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = BiPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term([e1[0] + e2[0], e1[1] + e2[1]], c1 * c2);
            }
        }
        r
    }

    pub fn scale(&self, k: &Q) -> Self {
        if k.is_zero() {
            return BiPoly::zero();
        }
        BiPoly { terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect() }
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = BiPoly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Order of vanishing at the origin (minimum total degree); None if zero.
    pub fn ord_origin(&self) -> Option<usize> {
        self.terms.keys().map(|e| (e[0] + e[1]) as usize).min()
    }

    /// The terms of total degree exactly d, as a binary form's coefficients
    /// indexed by the u-exponent (0..=d).
    pub fn degree_part(&self, d: usize) -> Vec<Q> {
        let mut out = vec![Q::zero(); d + 1];
        for (e, c) in &self.terms {
            if (e[0] + e[1]) as usize == d {
                out[e[0] as usize] = c.clone();
            }
        }
        out
    }

    pub fn eval(&self, u: &Q, v: &Q) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for _ in 0..e[0] {
                t *= u;
            }
            for _ in 0..e[1] {
                t *= v;
            }
            acc += t;
        }
        acc
    }

    /// Substitute u -> u + a, v -> v + b.
    pub fn translate(&self, a: &Q, b: &Q) -> Self {
        let u_shift = BiPoly::var_u().add(&BiPoly::constant(a.clone()));
        let v_shift = BiPoly::var_v().add(&BiPoly::constant(b.clone()));
        self.subst(&u_shift, &v_shift)
    }

    pub fn subst(&self, fu: &BiPoly, fv: &BiPoly) -> Self {
        let mut mu = 0;
        let mut mv = 0;
        for (e, _) in &self.terms {
            mu = mu.max(e[0]);
            mv = mv.max(e[1]);
        }
        let mut up = vec![BiPoly::one()];
        for k in 1..=mu as usize {
            let n = up[k - 1].mul(fu);
            up.push(n);
        }
        let mut vp = vec![BiPoly::one()];
        for k in 1..=mv as usize {
            let n = vp[k - 1].mul(fv);
            vp.push(n);
        }
        let mut acc = BiPoly::zero();
        for (e, c) in &self.terms {
            let t = up[e[0] as usize].mul(&vp[e[1] as usize]).scale(c);
            acc = acc.add(&t);
        }
        acc
    }

    /// Chart substitution (u,v) -> (u, u·v): term u^a v^b -> u^(a+b) v^b.
    pub fn chart_a(&self) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[0] + e[1], e[1]], c.clone()))
                .collect(),
        }
    }

    /// Chart substitution (u,v) -> (u·v, v): term u^a v^b -> u^a v^(a+b).
    pub fn chart_b(&self) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[0], e[0] + e[1]], c.clone()))
                .collect(),
        }
    }

    pub fn divide_u_pow(&self, m: usize) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    assert!(e[0] as usize >= m, "not divisible by u^{}", m);
                    ([e[0] - m as u32, e[1]], c.clone())
                })
                .collect(),
        }
    }

    pub fn divide_v_pow(&self, m: usize) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    assert!(e[1] as usize >= m, "not divisible by v^{}", m);
                    ([e[0], e[1] - m as u32], c.clone())
                })
                .collect(),
        }
    }

    /// Restrict to u = 0, producing a polynomial in v.
    pub fn at_u0(&self) -> UniPoly {
        let mut c = vec![];
        for (e, v) in &self.terms {
            if e[0] == 0 {
                let idx = e[1] as usize;
                if c.len() <= idx {
                    c.resize(idx + 1, Q::zero());
                }
                c[idx] = v.clone();
            }
        }
        UniPoly::from_coeffs(c)
    }

    /// Restrict to v = 0, producing a polynomial in u.
    pub fn at_v0(&self) -> UniPoly {
        let mut c = vec![];
        for (e, v) in &self.terms {
            if e[1] == 0 {
                let idx = e[0] as usize;
                if c.len() <= idx {
                    c.resize(idx + 1, Q::zero());
                }
                c[idx] = v.clone();
            }
        }
        UniPoly::from_coeffs(c)
    }

    pub fn deg_v(&self) -> Option<usize> {
        self.terms.keys().map(|e| e[1] as usize).max()
    }

    pub fn deg_u(&self) -> Option<usize> {
        self.terms.keys().map(|e| e[0] as usize).max()
    }

    /// Coefficients as polynomials in u, indexed by v-power.
    pub fn v_coeffs(&self) -> Vec<UniPoly> {
        let dv = match self.deg_v() {
            None => return vec![],
            Some(d) => d,
        };
        let du = self.deg_u().unwrap();
        let mut out = vec![vec![Q::zero(); du + 1]; dv + 1];
        for (e, c) in &self.terms {
            out[e[1] as usize][e[0] as usize] = c.clone();
        }
        out.into_iter().map(UniPoly::from_coeffs).collect()
    }

    pub fn from_v_coeffs(cs: &[UniPoly]) -> Self {
        let mut r = BiPoly::zero();
        for (j, p) in cs.iter().enumerate() {
            for (i, c) in p.coeffs.iter().enumerate() {
                if !c.is_zero() {
                    r.add_term([i as u32, j as u32], c.clone());
                }
            }
        }
        r
    }

    fn content_v(cs: &[UniPoly]) -> UniPoly {
        let mut g = UniPoly::zero();
        for p in cs {
            g = UniPoly::gcd(&g, p);
            if g.deg() == Some(0) {
                break;
            }
        }
        g
    }

    fn primitive_v(cs: &[UniPoly]) -> (UniPoly, Vec<UniPoly>) {
        let cont = Self::content_v(cs);
        if cont.is_zero() {
            return (cont, cs.to_vec());
        }
        let prim = cs
            .iter()
            .map(|p| {
                let (q, r) = p.divrem(&cont);
                debug_assert!(r.is_zero());
                q
            })
            .collect();
        (cont, prim)
    }

    fn pseudo_rem_v(f: &[UniPoly], g: &[UniPoly]) -> Vec<UniPoly> {
        // lc(g)^(deg f - deg g + 1) · f  mod  g, in the variable v
        let df = f.len() - 1;
        let dg = g.len() - 1;
        let lcg = g[dg].clone();
        let mut r: Vec<UniPoly> = f.to_vec();
        for _ in 0..=(df - dg) {
            let dr = r.len() - 1;
            if dr < dg || r.iter().all(|p| p.is_zero()) {
                // multiply remaining times lc once per unused step is
                // unnecessary for gcd purposes (scalar in Q[u] factors are
                // stripped by the primitive part); stop early
                break;
            }
            let lead = r[dr].clone();
            // r = lcg·r − lead·v^(dr−dg)·g
            let mut nr: Vec<UniPoly> = r.iter().map(|p| p.mul(&lcg)).collect();
            for (i, gi) in g.iter().enumerate() {
                let idx = i + dr - dg;
                nr[idx] = nr[idx].sub(&gi.mul(&lead));
            }
            while nr.len() > 1 && nr.last().map(|p| p.is_zero()).unwrap_or(false) {
                nr.pop();
            }
            r = nr;
            if r.len() - 1 < dg {
                break;
            }
        }
        r
    }

    /// Primitive-PRS gcd of two bivariate polynomials.
    pub fn gcd(a: &BiPoly, b: &BiPoly) -> BiPoly {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.is_constant() || b.is_constant() {
            return BiPoly::one();
        }
        let (ca, mut f) = Self::primitive_v(&a.v_coeffs());
        let (cb, mut g) = Self::primitive_v(&b.v_coeffs());
        let c = UniPoly::gcd(&ca, &cb);
        if f.len() < g.len() {
            std::mem::swap(&mut f, &mut g);
        }
        let pp = loop {
            if g.len() == 1 {
                // g is a nonzero element of Q[u]; primitive => unit
                break vec![UniPoly::one()];
            }
            let r = Self::pseudo_rem_v(&f, &g);
            if r.iter().all(|p| p.is_zero()) {
                break g;
            }
            let (_, rp) = Self::primitive_v(&r);
            f = g;
            g = rp;
            if f.len() < g.len() {
                std::mem::swap(&mut f, &mut g);
            }
        };
        let cpoly = BiPoly::from_v_coeffs(&[c]);
        cpoly.mul(&BiPoly::from_v_coeffs(&pp))
    }

    /// Resultant of a and b with respect to v, an element of Q[u].
    /// Computed by fraction-free (Bareiss) elimination on the Sylvester
    /// matrix with entries in Q[u]; exact divisions by previous pivots.
    pub fn resultant_v(a: &BiPoly, b: &BiPoly) -> UniPoly {
        let fa = a.v_coeffs();
        let fb = b.v_coeffs();
        let m = fa.len() - 1;
        let n = fb.len() - 1;
        assert!(m >= 1 && n >= 1, "resultant_v needs positive v-degrees");
        let dim = m + n;
        let mut mat: Vec<Vec<UniPoly>> = vec![vec![UniPoly::zero(); dim]; dim];
        for i in 0..n {
            for (j, c) in fa.iter().enumerate() {
                mat[i][i + (m - j)] = c.clone();
            }
        }
        for i in 0..m {
            for (j, c) in fb.iter().enumerate() {
                mat[n + i][i + (n - j)] = c.clone();
            }
        }
        let mut sign_neg = false;
        let mut prev = UniPoly::one();
        for k in 0..dim - 1 {
            if mat[k][k].is_zero() {
                let swap = (k + 1..dim).find(|&i| !mat[i][k].is_zero());
                match swap {
                    None => return UniPoly::zero(),
                    Some(i) => {
                        mat.swap(k, i);
                        sign_neg = !sign_neg;
                    }
                }
            }
            for i in k + 1..dim {
                for j in k + 1..dim {
                    let num = mat[k][k].mul(&mat[i][j]).sub(&mat[i][k].mul(&mat[k][j]));
                    let (q, r) = num.divrem(&prev);
                    assert!(r.is_zero(), "Bareiss division not exact");
                    mat[i][j] = q;
                }
                mat[i][k] = UniPoly::zero();
            }
            prev = mat[k][k].clone();
        }
        let det = mat[dim - 1][dim - 1].clone();
        if sign_neg {
            det.neg()
        } else {
            det
        }
    }
}
