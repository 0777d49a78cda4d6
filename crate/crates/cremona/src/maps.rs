//! Plane Cremona transformations as coprime polynomial triples: composition,
//! equality, catalog maps (C, I, P, Q₁..Q₁₂, S_λ, T_λ, torus), inversion of
//! linear and simple quadratic maps, and the two decomposition lemmas for
//! quadratic divisor-preserving maps and triangle-preserving automorphisms.

use crate::error::{Error, Result};
use crate::geometry::{base_points, collinear, LinearSystem};
use crate::linalg::{kernel_basis, mat3_adjugate, rank, Mat3};
use crate::point::{
    inf_near_on_line, localization_matrix, localize, p1, p2, p3, q1, q2, q3, InfNearPoint,
    ProjPoint,
};
use crate::poly::{HomPoly, Int, Q};
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeSet;

#[derive(Clone, PartialEq, Eq)]
pub struct BirationalMap {
    components: [HomPoly; 3],
    degree: usize,
}

impl std::fmt::Debug for BirationalMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({} : {} : {})",
            self.components[0], self.components[1], self.components[2]
        )
    }
}

/// Joint scalar normalization: integer coefficients with overall content 1
/// and a positive leading coefficient in the first component.
fn canonical_triple(comps: [HomPoly; 3]) -> [HomPoly; 3] {
    let mut den_lcm = Int::one();
    let mut num_gcd = Int::zero();
    for p in &comps {
        for (_, c) in p.terms() {
            den_lcm = den_lcm.lcm(c.denom());
            num_gcd = num_gcd.gcd(c.numer());
        }
    }
    assert!(!num_gcd.is_zero());
    let mut factor = Q::new(den_lcm, num_gcd);
    let lead = comps[0].leading().map(|(_, c)| c.clone()).unwrap();
    if (lead * &factor).is_negative() {
        factor = -factor;
    }
    comps.map(|p| p.scale(&factor))
}

impl BirationalMap {
    pub fn new(components: [HomPoly; 3]) -> Result<Self> {
        if components.iter().any(|c| c.is_zero()) {
            return Err(Error::invalid("map has a zero component"));
        }
        let d0 = components[0].degree();
        if components.iter().any(|c| c.degree() != d0) {
            return Err(Error::invalid("components must have equal degree"));
        }
        let g = HomPoly::gcd(&HomPoly::gcd(&components[0], &components[1]), &components[2]);
        let comps: [HomPoly; 3] = if g.is_constant() {
            components
        } else {
            [
                components[0].exact_divide(&g).unwrap(),
                components[1].exact_divide(&g).unwrap(),
                components[2].exact_divide(&g).unwrap(),
            ]
        };
        let cols: Vec<[u32; 3]> = comps
            .iter()
            .flat_map(|p| p.terms().map(|(e, _)| *e))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let rows: Vec<Vec<Q>> = comps.iter().map(|p| cols.iter().map(|e| p.coeff(e)).collect()).collect();
        if rank(rows) != 3 {
            return Err(Error::invalid("components are linearly dependent"));
        }
        let comps = canonical_triple(comps);
        let degree = comps[0].degree();
        Ok(BirationalMap { components: comps, degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[HomPoly; 3] {
        &self.components
    }

    pub fn linear_system(&self) -> LinearSystem {
        LinearSystem::new(self.components.clone())
    }

    /// None iff the point lies in the base locus.
    pub fn apply(&self, p: &ProjPoint) -> Option<ProjPoint> {
        let vals = [
            self.components[0].evaluate_int(&p.coords),
            self.components[1].evaluate_int(&p.coords),
            self.components[2].evaluate_int(&p.coords),
        ];
        if vals.iter().all(|v| v.is_zero()) {
            None
        } else {
            Some(ProjPoint::from_q(&vals))
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.components.iter().all(|c| c.num_terms() == 1)
    }
}

pub fn compose(f: &BirationalMap, g: &BirationalMap) -> BirationalMap {
    let comps = [
        f.components[0].substitute(&g.components),
        f.components[1].substitute(&g.components),
        f.components[2].substitute(&g.components),
    ];
    BirationalMap::new(comps).expect("composition of birational maps is birational")
}

pub fn equal(f: &BirationalMap, g: &BirationalMap) -> bool {
    f == g
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

fn x() -> HomPoly {
    HomPoly::var(0)
}
fn y() -> HomPoly {
    HomPoly::var(1)
}
fn z() -> HomPoly {
    HomPoly::var(2)
}

fn map(c: [HomPoly; 3]) -> BirationalMap {
    BirationalMap::new(c).unwrap()
}

pub fn identity() -> BirationalMap {
    map([x(), y(), z()])
}

/// C = (Y : Z : X), order 3.
pub fn c_map() -> BirationalMap {
    map([y(), z(), x()])
}

/// I = (Z² : XY : YZ), order 4.
pub fn i_map() -> BirationalMap {
    q_map(1)
}

/// P = (XY : (Y+Z)Z : XZ), order 5.
pub fn p_map() -> BirationalMap {
    q_map(4)
}

/// τ = (Y : X : Z), the coordinate swap (not in H, conjugates it).
pub fn swap_map() -> BirationalMap {
    map([y(), x(), z()])
}

/// ρ_λ = (λX : Y : Z).
pub fn rho(lambda: &Q) -> Result<BirationalMap> {
    if lambda.is_zero() {
        return Err(Error::invalid("rho requires λ ≠ 0"));
    }
    Ok(map([x().scale(lambda), y(), z()]))
}

/// Torus element (aX : bY : Z).
pub fn diag_map(a: &Q, b: &Q) -> Result<BirationalMap> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::invalid("torus element requires nonzero entries"));
    }
    Ok(map([x().scale(a), y().scale(b), z()]))
}

pub fn c_pow(k: i64) -> BirationalMap {
    match k.rem_euclid(3) {
        0 => identity(),
        1 => c_map(),
        _ => map([z(), x(), y()]),
    }
}

/// The twelve quadratic catalog maps Q₁..Q₁₂.
pub fn q_map(i: usize) -> BirationalMap {
    let yz = || y().add(&z());
    let xz = || x().add(&z());
    let xyz = || x().add(&y()).add(&z());
    let c = match i {
        1 => [z().mul(&z()), x().mul(&y()), y().mul(&z())],
        2 => [x().mul(&y()), z().mul(&z()), x().mul(&z())],
        3 => [y().mul(&z()), x().mul(&z()), x().mul(&y())],
        4 => [x().mul(&y()), yz().mul(&z()), x().mul(&z())],
        5 => [z().mul(&xz()), x().mul(&y()), y().mul(&z())],
        6 => [z().mul(&z()), yz().mul(&x()), y().mul(&z())],
        7 => [xz().mul(&y()), z().mul(&z()), x().mul(&z())],
        8 => [z().mul(&yz()), x().mul(&y()), y().mul(&yz())],
        9 => [x().mul(&z()), y().mul(&yz()), z().mul(&yz())],
        10 => [y().mul(&yz()), z().mul(&xyz()), x().mul(&y())],
        11 => [xyz().mul(&y()), z().mul(&yz()), x().mul(&z())],
        12 => [x().mul(&y()), yz().mul(&yz()), x().mul(&z())],
        _ => panic!("catalog index out of range: {}", i),
    };
    map(c)
}

/// Stored base-point sets of Q₁..Q₁₂ (the catalog data the computed base
/// points are checked against).
pub fn q_base_points(i: usize) -> Vec<InfNearPoint> {
    let pr = InfNearPoint::proper;
    let yz = || y().add(&z());
    let xz = || x().add(&z());
    match i {
        1 => vec![pr(p1()), pr(p2()), inf_near_on_line(&p1(), &y())],
        2 => vec![pr(p1()), pr(p2()), inf_near_on_line(&p2(), &x())],
        3 => vec![pr(p1()), pr(p2()), pr(p3())],
        4 => vec![pr(p1()), pr(p2()), pr(q1())],
        5 => vec![pr(p1()), pr(p2()), pr(q2())],
        6 => vec![pr(p1()), pr(p2()), inf_near_on_line(&p1(), &yz())],
        7 => vec![pr(p1()), pr(p2()), inf_near_on_line(&p2(), &xz())],
        8 => vec![pr(p1()), inf_near_on_line(&p1(), &y()), pr(q1())],
        9 => vec![pr(p1()), inf_near_on_line(&p1(), &z()), pr(q1())],
        10 => vec![pr(p1()), pr(q1()), pr(q2())],
        11 => vec![pr(p1()), pr(q1()), pr(q3())],
        12 => vec![pr(p1()), pr(q1()), inf_near_on_line(&q1(), &x())],
        _ => panic!("catalog index out of range: {}", i),
    }
}

fn check_lambda(lambda: &Q) -> Result<()> {
    if lambda.is_zero() || *lambda == -Q::one() {
        return Err(Error::invalid("λ ∈ {0, −1} is excluded"));
    }
    Ok(())
}

/// S_λ = (P²C)⁻¹ ρ_{−λ} P²C, built from the defining composition.
pub fn s_map(lambda: &Q) -> Result<BirationalMap> {
    check_lambda(lambda)?;
    let p2c = compose(&q_map(10), &c_map());
    let inv = compose(&c_pow(2), &p_pow(3));
    let r = rho(&-lambda)?;
    Ok(compose(&compose(&inv, &r), &p2c))
}

/// T_λ = P² ρ_{−λ} C P², built from the defining composition.
pub fn t_map(lambda: &Q) -> Result<BirationalMap> {
    check_lambda(lambda)?;
    let psq = q_map(10);
    let r = rho(&-lambda)?;
    Ok(compose(&compose(&psq, &r), &compose(&c_map(), &psq)))
}

pub fn s_base_points(lambda: &Q) -> Vec<InfNearPoint> {
    let pr = InfNearPoint::proper;
    vec![
        pr(ProjPoint::from_q(&[Q::zero(), lambda.clone(), Q::one()])),
        pr(q2()),
        pr(q3()),
    ]
}

pub fn t_base_points(lambda: &Q) -> Vec<InfNearPoint> {
    let pr = InfNearPoint::proper;
    vec![
        pr(p1()),
        pr(q1()),
        pr(ProjPoint::from_q(&[Q::zero(), lambda.clone(), Q::one()])),
    ]
}

pub fn p_pow(k: i64) -> BirationalMap {
    match k.rem_euclid(5) {
        0 => identity(),
        1 => p_map(),
        2 => q_map(10),
        3 => compose(&q_map(11), &c_map()),
        _ => q_map(5),
    }
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

fn linear_matrix(f: &BirationalMap) -> Mat3 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut e = [0u32; 3];
            e[j] = 1;
            f.components[i].coeff(&e)
        })
    })
}

fn map_from_matrix(m: &Mat3) -> BirationalMap {
    let comps = std::array::from_fn(|i| {
        let mut p = HomPoly::zero(1);
        for j in 0..3 {
            if !m[i][j].is_zero() {
                p = p.add(&HomPoly::var(j).scale(&m[i][j]));
            }
        }
        p
    });
    map(comps)
}

pub fn invert_linear(f: &BirationalMap) -> Result<BirationalMap> {
    if f.degree != 1 {
        return Err(Error::invalid("invert_linear requires degree 1"));
    }
    let adj = mat3_adjugate(&linear_matrix(f));
    Ok(map_from_matrix(&adj))
}

/// Inverse of a quadratic map with three proper base points: the base points
/// of the inverse are the images of the three contracted lines; the inverse
/// is found inside the net of conics through them.
pub fn invert_quadratic(f: &BirationalMap) -> Result<BirationalMap> {
    if f.degree != 2 {
        return Err(Error::invalid("invert_quadratic requires degree 2"));
    }
    let bp = base_points(&f.linear_system())?;
    if bp.len() != 3 || bp.iter().any(|(p, _)| !p.is_proper()) {
        return Err(Error::invalid(
            "invert_quadratic requires three proper base points",
        ));
    }
    let pts: Vec<&ProjPoint> = bp.iter().map(|(p, _)| &p.base).collect();
    let mut images = Vec::new();
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        images.push(contracted_image(f, pts[i], pts[j])?);
    }
    let g0 = quadratic_from_points(
        &InfNearPoint::proper(images[0].clone()),
        &InfNearPoint::proper(images[1].clone()),
        &InfNearPoint::proper(images[2].clone()),
    )?;
    let a = compose(&g0, f);
    if a.degree() != 1 {
        return Err(Error::internal("inverse construction did not linearize"));
    }
    let inv = compose(&invert_linear(&a)?, &g0);
    if !equal(&compose(&inv, f), &identity()) {
        return Err(Error::internal("inverse verification failed"));
    }
    Ok(inv)
}

/// Image of the line through two base points (the line is contracted, any
/// non-base point on it works).
fn contracted_image(f: &BirationalMap, p: &ProjPoint, q: &ProjPoint) -> Result<ProjPoint> {
    for t in 1..8i64 {
        let tb = Int::from(t);
        let r = ProjPoint::new(std::array::from_fn(|k| &p.coords[k] + &q.coords[k] * &tb));
        if let Some(img) = f.apply(&r) {
            return Ok(img);
        }
    }
    Err(Error::internal("contracted line has no free sample point"))
}

// ---------------------------------------------------------------------------
// Conics through three points
// ---------------------------------------------------------------------------

const CONIC_MONOMIALS: [[u32; 3]; 6] =
    [[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]];

/// The quadratic map spanned by the conics through three points in general
/// position (proper or first-neighbourhood, the carrier of any infinitely
/// near point being one of the others).
pub fn quadratic_from_points(
    a: &InfNearPoint,
    b: &InfNearPoint,
    c: &InfNearPoint,
) -> Result<BirationalMap> {
    let pts = [a, b, c];
    if a == b || b == c || a == c {
        return Err(Error::invalid("points must be pairwise distinct"));
    }
    for p in &pts {
        if p.tower.len() > 1 {
            return Err(Error::invalid("towers of depth > 1 are not supported here"));
        }
        if p.tower.len() == 1 && !pts.iter().any(|q| **q == p.carrier()) {
            return Err(Error::invalid(
                "infinitely near point must sit over one of the others",
            ));
        }
    }
    if collinear(a, b, c) {
        return Err(Error::invalid("points are collinear"));
    }
    let rows: Vec<Vec<Q>> = pts.iter().map(|p| conic_row(p)).collect();
    let kernel = kernel_basis(rows, 6);
    if kernel.len() != 3 {
        return Err(Error::invalid("configuration does not span a net of conics"));
    }
    let comps: [HomPoly; 3] = std::array::from_fn(|i| {
        HomPoly::from_terms(
            2,
            CONIC_MONOMIALS
                .iter()
                .zip(&kernel[i])
                .filter(|(_, c)| !c.is_zero())
                .map(|(e, c)| (*e, c.clone())),
        )
    });
    let f = BirationalMap::new(comps)
        .map_err(|_| Error::invalid("configuration does not define a birational map"))?;
    let got = base_points(&f.linear_system())
        .map_err(|_| Error::invalid("configuration does not define a homaloidal net"))?;
    let mut expect: Vec<(InfNearPoint, usize)> =
        pts.iter().map(|p| ((*p).clone(), 1usize)).collect();
    expect.sort();
    if got != expect {
        return Err(Error::invalid("net has extra or displaced base points"));
    }
    Ok(f)
}

/// Linear condition on conic coefficients: vanishing at a proper point, or
/// tangency along the prescribed direction at the carrier.
fn conic_row(p: &InfNearPoint) -> Vec<Q> {
    let m = localization_matrix(&p.base);
    CONIC_MONOMIALS
        .iter()
        .map(|e| {
            let mono = HomPoly::monomial(*e, Q::one());
            if p.is_proper() {
                mono.evaluate_int(&p.base.coords)
            } else {
                let loc = localize(&mono, &m);
                let du = loc.terms.get(&[1, 0]).cloned().unwrap_or_else(Q::zero);
                let dv = loc.terms.get(&[0, 1]).cloned().unwrap_or_else(Q::zero);
                let d = &p.tower[0].0;
                Q::from_integer(d[0].clone()) * du + Q::from_integer(d[1].clone()) * dv
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Decomposition of quadratic divisor-preserving maps (α ∘ Q ∘ β)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum CoreTag {
    ISquared,
    P,
    PSquared,
    PCubed,
    PFourth,
    S(Q),
    T(Q),
}

impl CoreTag {
    pub fn map(&self) -> BirationalMap {
        match self {
            CoreTag::ISquared => q_map(3),
            CoreTag::P => q_map(4),
            CoreTag::PSquared => p_pow(2),
            CoreTag::PCubed => p_pow(3),
            CoreTag::PFourth => p_pow(4),
            CoreTag::S(l) => s_map(l).unwrap(),
            CoreTag::T(l) => t_map(l).unwrap(),
        }
    }

    pub fn inverse_map(&self) -> BirationalMap {
        match self {
            CoreTag::ISquared => q_map(3),
            CoreTag::P => p_pow(4),
            CoreTag::PSquared => p_pow(3),
            CoreTag::PCubed => p_pow(2),
            CoreTag::PFourth => p_pow(1),
            CoreTag::S(l) => s_map(&l.recip()).unwrap(),
            CoreTag::T(l) => {
                let r = rho(&(-l).recip()).unwrap();
                compose(&compose(&p_pow(3), &c_pow(2)), &compose(&r, &p_pow(3)))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            CoreTag::ISquared => "I^2".into(),
            CoreTag::P => "P".into(),
            CoreTag::PSquared => "P^2".into(),
            CoreTag::PCubed => "P^3".into(),
            CoreTag::PFourth => "P^4".into(),
            CoreTag::S(l) => format!("S({})", l),
            CoreTag::T(l) => format!("T({})", l),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadDecomposition {
    pub alpha: BirationalMap,
    pub core: CoreTag,
    pub beta: BirationalMap,
}

impl QuadDecomposition {
    pub fn recompose(&self) -> BirationalMap {
        compose(&self.alpha, &compose(&self.core.map(), &self.beta))
    }
}

/// Which triangle line carries a non-vertex triangle point (exactly one zero
/// coordinate).
fn line_of(p: &ProjPoint) -> Option<usize> {
    let zeros: Vec<usize> = (0..3).filter(|&i| p.coords[i].is_zero()).collect();
    if zeros.len() == 1 {
        Some(zeros[0])
    } else {
        None
    }
}

fn coord_q(p: &ProjPoint, i: usize) -> Q {
    Q::from_integer(p.coords[i].clone())
}

/// Proof case analysis on k = #(vertices among the base points), after
/// rotating by C^j so that the configuration matches one of the stored
/// patterns. Returns the core tag and the diagonal part δ of β.
fn match_pattern(rot: &[ProjPoint]) -> Vec<(CoreTag, BirationalMap)> {
    let mut out = Vec::new();
    let verts: Vec<&ProjPoint> = rot.iter().filter(|p| p.is_vertex()).collect();
    let rest: Vec<&ProjPoint> = rot.iter().filter(|p| !p.is_vertex()).collect();
    let diag = |a: Q, b: Q| diag_map(&a, &b).ok();
    match verts.len() {
        3 => out.push((CoreTag::ISquared, identity())),
        2 => {
            if verts.contains(&&p1()) && verts.contains(&&p2()) {
                let u = rest[0];
                match line_of(u) {
                    Some(0) => {
                        if let Some(d) = diag(Q::one(), -coord_q(u, 2) / coord_q(u, 1)) {
                            out.push((CoreTag::P, d));
                        }
                    }
                    Some(1) => {
                        if let Some(d) = diag(-coord_q(u, 2) / coord_q(u, 0), Q::one()) {
                            out.push((CoreTag::PFourth, d));
                        }
                    }
                    _ => {}
                }
            }
        }
        1 => {
            let lines: Vec<Option<usize>> = rest.iter().map(|p| line_of(p)).collect();
            if *verts[0] == p1() && lines == vec![Some(0), Some(0)] {
                // both over L₁: T_λ with the first point sent to q₁
                let (u, v) = (rest[0], rest[1]);
                let d1 = -coord_q(u, 2) / coord_q(u, 1);
                let lambda = &d1 * coord_q(v, 1) / coord_q(v, 2);
                if let Some(d) = diag(Q::one(), d1.clone()) {
                    if check_lambda(&lambda).is_ok() {
                        out.push((CoreTag::T(lambda), d));
                    }
                }
            }
            let find_on = |k: usize| rest.iter().find(|p| line_of(p) == Some(k));
            if let (Some(u), Some(v)) = (find_on(0), find_on(1)) {
                let d1 = -coord_q(u, 2) / coord_q(u, 1);
                let d0 = -coord_q(v, 2) / coord_q(v, 0);
                if let Some(d) = diag(d0, d1) {
                    if *verts[0] == p1() {
                        out.push((CoreTag::PSquared, d));
                    } else if *verts[0] == p2() {
                        out.push((CoreTag::PCubed, d));
                    }
                }
            }
        }
        0 => {
            let find_on = |k: usize| rest.iter().find(|p| line_of(p) == Some(k));
            if let (Some(u), Some(v), Some(w)) = (find_on(0), find_on(1), find_on(2)) {
                let d0 = -coord_q(v, 2) / coord_q(v, 0);
                let d1 = -&d0 * coord_q(w, 0) / coord_q(w, 1);
                let lambda = &d1 * coord_q(u, 1) / coord_q(u, 2);
                if check_lambda(&lambda).is_ok() {
                    if let Some(d) = diag(d0, d1) {
                        out.push((CoreTag::S(lambda), d));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Writes a degree-2 map with three proper base points and div(f_*ω₀) =
/// div(ω₀) as α ∘ Q ∘ β with α a monomial automorphism, Q a catalog core and
/// β = δ∘C^j with δ diagonal.
pub fn decompose_quadratic_symplectic(f: &BirationalMap) -> Result<QuadDecomposition> {
    if f.degree != 2 {
        return Err(Error::invalid("decomposition requires degree 2"));
    }
    let bp = base_points(&f.linear_system())?;
    if bp.len() != 3 || bp.iter().any(|(p, _)| !p.is_proper()) {
        return Err(Error::invalid("three proper base points required"));
    }
    if crate::forms::preserves_divisor(f).is_none() {
        return Err(Error::invalid("map does not preserve div(ω₀)"));
    }
    let pts: Vec<ProjPoint> = bp.into_iter().map(|(p, _)| p.base).collect();
    for j in 0..3i64 {
        let cj = c_pow(j);
        let mut rot: Vec<ProjPoint> = pts.iter().map(|p| cj.apply(p).unwrap()).collect();
        rot.sort();
        for (tag, delta) in match_pattern(&rot) {
            let beta = compose(&delta, &cj);
            let alpha = compose(&compose(f, &invert_linear(&beta)?), &tag.inverse_map());
            if alpha.degree() == 1 && alpha.is_monomial() {
                let dec = QuadDecomposition { alpha, core: tag, beta };
                if equal(&dec.recompose(), f) {
                    return Ok(dec);
                }
            }
        }
    }
    Err(Error::internal(
        "divisor-preserving quadratic map matched no decomposition pattern",
    ))
}

// ---------------------------------------------------------------------------
// Triangle-preserving linear automorphisms
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AutDecomposition {
    /// (a, b) with the torus factor (aX : bY : Z).
    pub scaling: (Q, Q),
    pub torus: BirationalMap,
    pub permutation: BirationalMap,
    /// true iff the permutation lies in ⟨C⟩.
    pub symplectic: bool,
}

/// Splits a linear map preserving the triangle XYZ = 0 into a torus element
/// and a coordinate permutation (f = torus ∘ permutation).
pub fn symplectic_automorphism_decompose(f: &BirationalMap) -> Result<AutDecomposition> {
    if f.degree != 1 || !f.is_monomial() {
        return Err(Error::invalid("map must be linear and preserve the triangle"));
    }
    let m = linear_matrix(f);
    let mut perm = [0usize; 3];
    let mut d = [Q::zero(), Q::zero(), Q::zero()];
    for i in 0..3 {
        let j = (0..3).find(|&j| !m[i][j].is_zero()).unwrap();
        perm[i] = j;
        d[i] = m[i][j].clone();
    }
    let a = &d[0] / &d[2];
    let b = &d[1] / &d[2];
    let torus = diag_map(&a, &b)?;
    let permutation = map(std::array::from_fn(|i| HomPoly::var(perm[i])));
    let symplectic = perm == [0, 1, 2] || perm == [1, 2, 0] || perm == [2, 0, 1];
    let dec = AutDecomposition { scaling: (a, b), torus, permutation, symplectic };
    if !equal(&compose(&dec.torus, &dec.permutation), f) {
        return Err(Error::internal("automorphism decomposition failed to recompose"));
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{qi, qr};

    #[test]
    fn generator_relations() {
        let c = c_map();
        let i = i_map();
        let p = p_map();
        let id = identity();
        assert!(equal(&compose(&compose(&c, &c), &c), &id));
        let i2 = compose(&i, &i);
        assert!(equal(&compose(&i2, &i2), &id));
        let p2 = compose(&p, &p);
        assert!(equal(&compose(&compose(&p2, &p2), &p), &id));
        // PCP = I
        assert!(equal(&compose(&p, &compose(&c, &p)), &i));
        // [C, I²] = C I² C⁻¹ I⁻² = 1 (I⁻² = I²)
        let comm = compose(&compose(&c, &i2), &compose(&c_pow(2), &i2));
        assert!(equal(&comm, &id));
    }

    #[test]
    fn compose_p_p_is_q10() {
        assert!(equal(&compose(&p_map(), &p_map()), &q_map(10)));
    }

    #[test]
    fn catalog_words_match() {
        let i2 = compose(&i_map(), &i_map());
        assert!(equal(&q_map(3), &i2));
        assert!(equal(&q_map(2), &compose(&i2, &i_map())));
        assert!(equal(&q_map(6), &compose(&p_map(), &i2)));
        assert!(equal(&q_map(7), &compose(&p_pow(4), &i2)));
        assert!(equal(&q_map(8), &compose(&i2, &p_map())));
        assert!(equal(&q_map(9), &compose(&i_map(), &p_map())));
        assert!(equal(&q_map(11), &compose(&p_pow(3), &c_pow(2))));
        assert!(equal(&q_map(12), &compose(&p_map(), &compose(&i_map(), &p_map()))));
    }

    #[test]
    fn catalog_base_points_smoke() {
        for i in [1usize, 4, 8, 12] {
            let bp = base_points(&q_map(i).linear_system()).unwrap();
            let mut expect: Vec<(InfNearPoint, usize)> =
                q_base_points(i).into_iter().map(|p| (p, 1)).collect();
            expect.sort();
            assert_eq!(bp, expect, "catalog base points differ for Q{}", i);
        }
    }

    #[test]
    fn linear_inverse() {
        let c = c_map();
        let cinv = invert_linear(&c).unwrap();
        assert!(equal(&cinv, &c_pow(2)));
        assert!(equal(&compose(&c, &cinv), &identity()));
    }

    #[test]
    fn quadratic_inverse() {
        // I² is an involution
        let i2 = q_map(3);
        assert!(equal(&invert_quadratic(&i2).unwrap(), &i2));
        // P⁻¹ = P⁴
        assert!(equal(&invert_quadratic(&p_map()).unwrap(), &p_pow(4)));
        // maps with infinitely near base points are rejected
        assert!(invert_quadratic(&q_map(1)).is_err());
    }

    #[test]
    fn conic_nets() {
        let pr = InfNearPoint::proper;
        let f = quadratic_from_points(&pr(p1()), &pr(p2()), &pr(p3())).unwrap();
        // net equals I²'s net: f ∘ (I²)⁻¹ is linear
        assert_eq!(compose(&f, &q_map(3)).degree(), 1);
        let g = quadratic_from_points(&pr(p1()), &pr(p2()), &pr(q1())).unwrap();
        assert_eq!(compose(&g, &p_pow(4)).degree(), 1);
        assert!(quadratic_from_points(&pr(q1()), &pr(q2()), &pr(q3())).is_err());
        // tangent configuration: p1 with direction Y over it, plus p2
        let h = quadratic_from_points(
            &pr(p1()),
            &inf_near_on_line(&p1(), &y()),
            &pr(p2()),
        )
        .unwrap();
        assert_eq!(h.degree(), 2);
        // h shares Q₁'s net, so h ∘ Q₁⁻¹ = h ∘ Q₂ is linear
        assert_eq!(compose(&h, &q_map(2)).degree(), 1);
    }

    #[test]
    fn s_and_t_match_frozen_forms() {
        // closed forms of the defining compositions at λ = 1 and generic λ
        let s1 = s_map(&qi(1)).unwrap();
        let xyz = x().add(&y()).add(&z());
        let expect = BirationalMap::new([
            x().mul(&xyz).neg(),
            y().mul(&x().add(&y()).sub(&z())),
            z().mul(&x().sub(&y()).add(&z())),
        ])
        .unwrap();
        assert!(equal(&s1, &expect));
        let t2 = t_map(&qi(2)).unwrap();
        let expect_t = BirationalMap::new([
            x().mul(&y()),
            y().add(&z()).mul(&y().sub(&z().scale(&qi(2)))),
            x().mul(&z()).scale(&qi(-2)),
        ])
        .unwrap();
        assert!(equal(&t2, &expect_t));
        assert!(s_map(&qi(0)).is_err());
        assert!(s_map(&qi(-1)).is_err());
    }

    #[test]
    fn s_t_base_points() {
        for l in [qi(1), qi(2), qr(3, 5), qr(-7, 2)] {
            if l == -Q::one() {
                continue;
            }
            let s = s_map(&l).unwrap();
            let mut expect: Vec<(InfNearPoint, usize)> =
                s_base_points(&l).into_iter().map(|p| (p, 1)).collect();
            expect.sort();
            assert_eq!(base_points(&s.linear_system()).unwrap(), expect);
            let t = t_map(&l).unwrap();
            let mut expect: Vec<(InfNearPoint, usize)> =
                t_base_points(&l).into_iter().map(|p| (p, 1)).collect();
            expect.sort();
            assert_eq!(base_points(&t.linear_system()).unwrap(), expect);
        }
    }

    #[test]
    fn decompose_identity_core() {
        let dec = decompose_quadratic_symplectic(&q_map(3)).unwrap();
        assert_eq!(dec.core, CoreTag::ISquared);
        assert!(equal(&dec.alpha, &identity()));
        assert!(equal(&dec.beta, &identity()));
    }

    #[test]
    fn decompose_scaled_p() {
        // base points p1, p2, (0:1:−3)
        let f = compose(&p_map(), &diag_map(&qi(1), &qi(3)).unwrap());
        let dec = decompose_quadratic_symplectic(&f).unwrap();
        assert_eq!(dec.core, CoreTag::P);
        assert!(equal(&dec.recompose(), &f));
        // β must send (0:1:−3) to q₁
        let u = ProjPoint::from_i64([0, 1, -3]);
        assert_eq!(dec.beta.apply(&u).unwrap(), q1());
    }

    #[test]
    fn decompose_s_core() {
        let f = s_map(&qi(2)).unwrap();
        let dec = decompose_quadratic_symplectic(&f).unwrap();
        assert_eq!(dec.core, CoreTag::S(qi(2)));
        assert!(equal(&dec.recompose(), &f));
    }

    #[test]
    fn decompose_t_core() {
        let f = t_map(&qr(5, 3)).unwrap();
        let dec = decompose_quadratic_symplectic(&f).unwrap();
        assert!(matches!(dec.core, CoreTag::T(_)));
        assert!(equal(&dec.recompose(), &f));
    }

    #[test]
    fn automorphism_decomposition() {
        let dc = symplectic_automorphism_decompose(&c_map()).unwrap();
        assert!(dc.symplectic);
        assert!(equal(&dc.torus, &identity()));
        assert!(equal(&dc.permutation, &c_map()));
        let ds = symplectic_automorphism_decompose(&swap_map()).unwrap();
        assert!(!ds.symplectic);
        assert!(equal(&ds.torus, &identity()));
        let dr = symplectic_automorphism_decompose(&rho(&qi(2)).unwrap()).unwrap();
        assert!(dr.symplectic);
        assert_eq!(dr.scaling, (qi(2), qi(1)));
        assert!(equal(&dr.permutation, &identity()));
        // non-monomial linear map is rejected
        let g = map([x().add(&y()), y(), z()]);
        assert!(symplectic_automorphism_decompose(&g).is_err());
    }
}
