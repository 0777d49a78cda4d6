//! Rational 2-forms ω = (A/B)·ω₀ on P², exact pullback/pushforward under
//! birational maps, the symplectic test, normal-cubic classification, and the
//! multiplicity law for blow-ups of the divisor of a form.

use crate::error::{Error, Result};
use crate::geometry::{blowup_system, common_rational_zeros};
use crate::linalg::rank;
use crate::maps::{invert_linear, invert_quadratic, BirationalMap};
use crate::point::{line_through, localization_matrix, localize, InfNearPoint, ProjPoint};
use crate::poly::{qi, BiPoly, HomPoly, Q};
use num::{One, Zero};

/// ω = (A/B)·ω₀ with A, B coprime of equal degree; the pair is scaled so that
/// B is a primitive integer polynomial with positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalTwoForm {
    a: HomPoly,
    b: HomPoly,
}

impl RationalTwoForm {
    pub fn new(a: HomPoly, b: HomPoly) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::invalid("form requires nonzero A and B"));
        }
        if a.degree() != b.degree() {
            return Err(Error::invalid("A and B must have equal degree"));
        }
        let g = HomPoly::gcd(&a, &b);
        let (a, b) = if g.is_constant() {
            (a, b)
        } else {
            (a.exact_divide(&g).unwrap(), b.exact_divide(&g).unwrap())
        };
        let bn = b.primitive_integer_form();
        // the joint factor that makes B canonical
        let factor = bn.leading().unwrap().1 / b.leading().unwrap().1;
        Ok(RationalTwoForm { a: a.scale(&factor), b: bn })
    }

    pub fn a(&self) -> &HomPoly {
        &self.a
    }

    pub fn b(&self) -> &HomPoly {
        &self.b
    }

    pub fn neg(&self) -> Self {
        RationalTwoForm { a: self.a.neg(), b: self.b.clone() }
    }
}

pub fn omega0() -> RationalTwoForm {
    RationalTwoForm::new(HomPoly::one(), HomPoly::one()).unwrap()
}

fn xyz() -> HomPoly {
    HomPoly::var(0).mul(&HomPoly::var(1)).mul(&HomPoly::var(2))
}

pub fn jacobian_det(f: &BirationalMap) -> HomPoly {
    let c = f.components();
    let d = |i: usize, j: usize| c[i].derivative(j);
    let m2 = |a: HomPoly, b: HomPoly, c2: HomPoly, dd: HomPoly| a.mul(&dd).sub(&b.mul(&c2));
    d(0, 0)
        .mul(&m2(d(1, 1), d(1, 2), d(2, 1), d(2, 2)))
        .sub(&d(0, 1).mul(&m2(d(1, 0), d(1, 2), d(2, 0), d(2, 2))))
        .add(&d(0, 2).mul(&m2(d(1, 0), d(1, 1), d(2, 0), d(2, 1))))
}

/// f*(ω): for ω = (A/B)·ω₀ the pulled-back pair is
/// (A(f)·Jac(f)·XYZ, deg(f)·B(f)·f₀f₁f₂), reduced.
pub fn pullback(f: &BirationalMap, w: &RationalTwoForm) -> RationalTwoForm {
    let comps = f.components();
    let jac = jacobian_det(f);
    assert!(!jac.is_zero(), "birational map has nonzero Jacobian");
    let a2 = w.a.substitute(comps).mul(&jac).mul(&xyz());
    let b2 = w
        .b
        .substitute(comps)
        .mul(&comps[0].mul(&comps[1]).mul(&comps[2]))
        .scale(&qi(f.degree() as i64));
    RationalTwoForm::new(a2, b2).unwrap()
}

/// An inverse for the maps the form layer supports: linear maps, quadratic
/// maps with three proper base points, and catalog quadratic words.
pub fn inverse_map(f: &BirationalMap) -> Result<BirationalMap> {
    if f.degree() == 1 {
        return invert_linear(f);
    }
    if f.degree() == 2 {
        if let Ok(inv) = invert_quadratic(f) {
            return Ok(inv);
        }
        if let Some(qw) = crate::words::find_quadratic_word_for_map(f) {
            return Ok(crate::words::qword_eval(&crate::words::qword_invert(&qw)));
        }
    }
    Err(Error::invalid(
        "no inverse available: supply a word or a catalog / three-proper-base-point map",
    ))
}

pub fn pushforward(f: &BirationalMap, w: &RationalTwoForm) -> Result<RationalTwoForm> {
    Ok(pullback(&inverse_map(f)?, w))
}

pub fn is_symplectic(f: &BirationalMap) -> bool {
    pullback(f, &omega0()) == omega0()
}

/// Some(μ) iff f*(ω₀) = μ·ω₀ (equivalently div(f₋(ω₀)) = div(ω₀)); μ ∈ {±1}.
pub fn preserves_divisor(f: &BirationalMap) -> Option<i32> {
    let p = pullback(f, &omega0());
    if !p.a.is_constant() || !p.b.is_constant() {
        return None;
    }
    // canonical B is the constant 1; the ratio is A
    let r = p.a.coeff(&[0, 0, 0]);
    if r == Q::one() {
        Some(1)
    } else if r == -Q::one() {
        Some(-1)
    } else {
        unreachable!("proportional pullback of ω₀ must have ratio ±1, got {}", r)
    }
}

// ---------------------------------------------------------------------------
// Normal cubic classification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CubicKind {
    Triangle,
    ConicPlusLine,
    NodalCubic,
    NotNormal,
}

#[derive(Clone, Debug)]
pub struct CubicClassification {
    pub kind: CubicKind,
    pub components: Vec<HomPoly>,
    pub nodes: Vec<ProjPoint>,
}

fn not_normal() -> CubicClassification {
    CubicClassification { kind: CubicKind::NotNormal, components: vec![], nodes: vec![] }
}

fn monomials_of_degree(d: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push([a as u32, b as u32, (d - a - b) as u32]);
        }
    }
    out
}

/// dim (Q[X,Y,Z]/⟨F_X,F_Y,F_Z⟩)_d — for a cubic with only nodes this is the
/// number of nodes, counted over the algebraic closure.
fn jacobian_colength(parts: &[HomPoly; 3], d: usize) -> usize {
    let cols = monomials_of_degree(d);
    let col_index: std::collections::BTreeMap<[u32; 3], usize> =
        cols.iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let mut rows = Vec::new();
    for p in parts {
        for m in monomials_of_degree(d - p.degree()) {
            let prod = p.mul(&HomPoly::monomial(m, Q::one()));
            let mut row = vec![Q::zero(); cols.len()];
            for (e, c) in prod.terms() {
                row[col_index[e]] = c.clone();
            }
            rows.push(row);
        }
    }
    cols.len() - rank(rows)
}

/// Is the singular point an ordinary double point: local order exactly 2 and
/// nondegenerate quadratic part.
fn is_node(f: &HomPoly, p: &ProjPoint) -> bool {
    let loc = localize(f, &localization_matrix(p));
    if loc.ord_origin() != Some(2) {
        return false;
    }
    let q = loc.degree_part(2);
    let disc = &q[1] * &q[1] - qi(4) * &q[2] * &q[0];
    !disc.is_zero()
}

/// Decides whether −div(ω) is a singular cubic with only nodes and returns
/// its type: (i) triangle, (ii) conic + line, (iii) nodal cubic.
pub fn classify_normal_cubic(w: &RationalTwoForm) -> Result<CubicClassification> {
    let f = match w.b.mul(&xyz()).exact_divide(&w.a) {
        Some(f) => f,
        None => return Ok(not_normal()),
    };
    if f.degree() != 3 {
        return Ok(not_normal());
    }
    let parts: [HomPoly; 3] = std::array::from_fn(|i| f.derivative(i));
    if parts.iter().any(|p| p.is_zero()) {
        return Ok(not_normal()); // cone over a binary cubic
    }
    let g = HomPoly::gcd(&HomPoly::gcd(&parts[0], &parts[1]), &parts[2]);
    if !g.is_constant() {
        return Ok(not_normal()); // multiple component
    }
    let sing = common_rational_zeros(&parts);
    for p in &sing {
        if !is_node(&f, p) {
            return Ok(not_normal());
        }
    }
    let l5 = jacobian_colength(&parts, 5);
    let l6 = jacobian_colength(&parts, 6);
    if l5 != l6 {
        return Err(Error::internal(format!(
            "Jacobian colength did not stabilize: {} vs {}",
            l5, l6
        )));
    }
    if sing.len() < l5 {
        return Err(Error::IrrationalSingularLocus(format!(
            "{} singular points over the closure, only {} rational",
            l5,
            sing.len()
        )));
    }
    if sing.len() > l5 {
        return Err(Error::internal("more rational nodes than the colength allows"));
    }
    match l5 {
        0 => Ok(not_normal()), // smooth cubic
        1 => Ok(CubicClassification {
            kind: CubicKind::NodalCubic,
            components: vec![f.primitive_integer_form()],
            nodes: sing,
        }),
        2 => {
            let line = line_through(&sing[0], &sing[1]).primitive_integer_form();
            let conic = f
                .exact_divide(&line)
                .ok_or_else(|| Error::internal("two-node line does not divide the cubic"))?;
            Ok(CubicClassification {
                kind: CubicKind::ConicPlusLine,
                components: vec![line, conic.primitive_integer_form()],
                nodes: sing,
            })
        }
        3 => {
            let lines = [
                line_through(&sing[0], &sing[1]).primitive_integer_form(),
                line_through(&sing[0], &sing[2]).primitive_integer_form(),
                line_through(&sing[1], &sing[2]).primitive_integer_form(),
            ];
            let prod = lines[0].mul(&lines[1]).mul(&lines[2]);
            if prod.primitive_integer_form() != f.primitive_integer_form() {
                return Err(Error::internal("three-node cubic is not the product of its node lines"));
            }
            Ok(CubicClassification {
                kind: CubicKind::Triangle,
                components: lines.to_vec(),
                nodes: sing,
            })
        }
        _ => Err(Error::internal("a cubic cannot have more than three nodes")),
    }
}

// ---------------------------------------------------------------------------
// Blow-up multiplicities of div(ω)
// ---------------------------------------------------------------------------

/// Multiplicity m of div(ω) at the (possibly infinitely near) point q; the
/// exceptional curve of the blow-up at q carries coefficient m+1 in the
/// pulled-back divisor (zero iff m ≥ 0, pole iff m ≤ −2).
pub fn blowup_form_multiplicity(w: &RationalTwoForm, q: &InfNearPoint) -> i64 {
    let mut comps: Vec<(HomPoly, i64)> = vec![
        (w.a.clone(), 1),
        (w.b.clone(), -1),
        (HomPoly::var(0), -1),
        (HomPoly::var(1), -1),
        (HomPoly::var(2), -1),
    ];
    comps.retain(|(p, _)| !p.is_constant());
    let m = localization_matrix(&q.base);
    let local: Vec<(BiPoly, i64)> =
        comps.iter().map(|(p, s)| (localize(p, &m), *s)).collect();
    mult_along_tower(local, &q.tower)
}

fn mult_along_tower(comps: Vec<(BiPoly, i64)>, tower: &[crate::point::Dir]) -> i64 {
    let m: i64 = comps
        .iter()
        .map(|(p, s)| s * p.ord_origin().expect("divisor component vanished") as i64)
        .sum();
    let Some((d, rest)) = tower.split_first() else {
        return m;
    };
    let mut next: Vec<(BiPoly, i64)> = comps
        .iter()
        .map(|(p, s)| {
            let ord = p.ord_origin().unwrap();
            (blowup_system(std::slice::from_ref(p), ord, d).pop().unwrap(), *s)
        })
        .collect();
    // the exceptional curve joins the divisor with coefficient m+1
    let e = if d.0[0].is_zero() { BiPoly::var_v() } else { BiPoly::var_u() };
    next.push((e, m + 1));
    mult_along_tower(next, rest)
}

/// A point is a pole of ω iff div(ω) has negative multiplicity there.
pub fn is_pole_at(w: &RationalTwoForm, q: &InfNearPoint) -> bool {
    blowup_form_multiplicity(w, q) <= -1
}
