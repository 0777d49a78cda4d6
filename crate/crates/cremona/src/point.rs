//! Rational points of P^2 and infinitely near points (towers of blow-up
//! directions). Includes the integral localization charts used to expand
//! polynomials around a point.

use crate::linalg::Mat3;
use crate::poly::{BiPoly, HomPoly, Int, Q};
use num::{Integer, One, Signed, Zero};
use std::fmt;

/// A point of P^2 with integer coordinates, canonicalized: content 1 and the
/// first nonzero coordinate positive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    pub coords: [Int; 3],
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{}:{})", self.coords[0], self.coords[1], self.coords[2])
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{}:{})", self.coords[0], self.coords[1], self.coords[2])
    }
}

impl ProjPoint {
    pub fn new(coords: [Int; 3]) -> Self {
        assert!(!coords.iter().all(|c| c.is_zero()), "zero coordinate triple");
        let mut g = Int::zero();
        for c in &coords {
            g = g.gcd(c);
        }
        let mut coords: [Int; 3] = std::array::from_fn(|i| &coords[i] / &g);
        if coords.iter().find(|c| !c.is_zero()).unwrap().is_negative() {
            for c in coords.iter_mut() {
                *c = -c.clone();
            }
        }
        ProjPoint { coords }
    }

    pub fn from_i64(c: [i64; 3]) -> Self {
        Self::new([Int::from(c[0]), Int::from(c[1]), Int::from(c[2])])
    }

    /// From rational coordinates: clear denominators.
    pub fn from_q(c: &[Q; 3]) -> Self {
        let mut l = Int::one();
        for x in c {
            l = l.lcm(x.denom());
        }
        Self::new(std::array::from_fn(|i| c[i].numer() * &l / c[i].denom()))
    }

    pub fn to_q(&self) -> [Q; 3] {
        std::array::from_fn(|i| Q::from_integer(self.coords[i].clone()))
    }

    pub fn is_vertex(&self) -> bool {
        self.coords.iter().filter(|c| !c.is_zero()).count() == 1
    }

    pub fn on_poly(&self, p: &HomPoly) -> bool {
        p.evaluate_int(&self.coords).is_zero()
    }
}

pub fn p1() -> ProjPoint {
    ProjPoint::from_i64([1, 0, 0])
}
pub fn p2() -> ProjPoint {
    ProjPoint::from_i64([0, 1, 0])
}
pub fn p3() -> ProjPoint {
    ProjPoint::from_i64([0, 0, 1])
}
pub fn q1() -> ProjPoint {
    ProjPoint::from_i64([0, 1, -1])
}
pub fn q2() -> ProjPoint {
    ProjPoint::from_i64([1, 0, -1])
}
pub fn q3() -> ProjPoint {
    ProjPoint::from_i64([1, -1, 0])
}

/// Rational point of the exceptional P^1: a coprime integer pair, first
/// nonzero entry positive. `(a:b)` is the tangent direction with local
/// coordinates moving along (u,v) = t·(a,b).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dir(pub [Int; 2]);

impl fmt::Debug for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})", self.0[0], self.0[1])
    }
}

impl Dir {
    pub fn new(a: Int, b: Int) -> Self {
        assert!(!a.is_zero() || !b.is_zero(), "zero direction");
        let g = a.gcd(&b);
        let mut p = [&a / &g, &b / &g];
        if p.iter().find(|c| !c.is_zero()).unwrap().is_negative() {
            p = [-p[0].clone(), -p[1].clone()];
        }
        Dir(p)
    }

    pub fn from_q(a: &Q, b: &Q) -> Self {
        let l = a.denom().lcm(b.denom());
        Self::new(a.numer() * &l / a.denom(), b.numer() * &l / b.denom())
    }
}

/// A proper point (empty tower) or a point on an iterated blow-up: `base`
/// carries a sequence of exceptional-line directions, one per level.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfNearPoint {
    pub base: ProjPoint,
    pub tower: Vec<Dir>,
}

impl fmt::Debug for InfNearPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.base)?;
        for d in &self.tower {
            write!(f, "^{:?}", d)?;
        }
        Ok(())
    }
}

impl fmt::Display for InfNearPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl InfNearPoint {
    pub fn proper(base: ProjPoint) -> Self {
        InfNearPoint { base, tower: vec![] }
    }

    pub fn near(base: ProjPoint, dirs: Vec<Dir>) -> Self {
        InfNearPoint { base, tower: dirs }
    }

    pub fn is_proper(&self) -> bool {
        self.tower.is_empty()
    }

    /// The proper point or shallower infinitely near point this one sits over.
    pub fn carrier(&self) -> InfNearPoint {
        assert!(!self.tower.is_empty(), "carrier of a proper point");
        InfNearPoint {
            base: self.base.clone(),
            tower: self.tower[..self.tower.len() - 1].to_vec(),
        }
    }
}

/// First-neighbourhood point over `base` in the direction cut out by the
/// line `l` (which must pass through `base`).
pub fn inf_near_on_line(base: &ProjPoint, l: &HomPoly) -> InfNearPoint {
    assert_eq!(l.degree(), 1);
    assert!(base.on_poly(l), "line must pass through the base point");
    let m = localization_matrix(base);
    let loc = localize(l, &m);
    // loc = alpha·u + beta·v (no constant term); the line moves along (-beta, alpha)
    let alpha = loc.eval(&Q::one(), &Q::zero());
    let beta = loc.eval(&Q::zero(), &Q::one());
    InfNearPoint::near(base.clone(), vec![Dir::from_q(&-beta, &alpha)])
}

/// Unimodular integer matrix whose third column is the point's coordinate
/// vector, built deterministically from two extended gcds. Local coordinates
/// at the point are (u,v) with (X,Y,Z) = M·(u,v,1).
pub fn localization_matrix(p: &ProjPoint) -> Mat3 {
    let [p0, p1, p2] = &p.coords;
    let to_q = |m: [[Int; 3]; 3]| -> Mat3 {
        std::array::from_fn(|i| std::array::from_fn(|j| Q::from_integer(m[i][j].clone())))
    };
    if p0.is_zero() && p1.is_zero() {
        // p = (0:0:1): identity chart
        return to_q([
            [Int::one(), Int::zero(), Int::zero()],
            [Int::zero(), Int::one(), Int::zero()],
            [Int::zero(), Int::zero(), p2.clone()],
        ]);
    }
    let e1 = p0.extended_gcd(p1);
    let g1 = e1.gcd; // nonzero here
    let (u, v) = (e1.x, e1.y); // u·p0 + v·p1 = g1
    let e2 = g1.extended_gcd(p2);
    debug_assert!(e2.gcd.is_one());
    let (s, t) = (e2.x, e2.y); // s·g1 + t·p2 = 1
    // Columns B=(-v,u,0), C=(-t·p0/g1, -t·p1/g1, s), A=p give det[B C A] = 1.
    let m = [
        [-v.clone(), -&t * p0 / &g1, p0.clone()],
        [u.clone(), -&t * p1 / &g1, p1.clone()],
        [Int::zero(), s, p2.clone()],
    ];
    to_q(m)
}

/// Expand `p` in the local coordinates of the chart `m` (affine slice w = 1):
/// the result is p(M·(u,v,1)) as a bivariate polynomial.
pub fn localize(p: &HomPoly, m: &Mat3) -> BiPoly {
    let lin: Vec<BiPoly> = (0..3)
        .map(|i| {
            BiPoly::monomial([1, 0], m[i][0].clone())
                .add(&BiPoly::monomial([0, 1], m[i][1].clone()))
                .add(&BiPoly::constant(m[i][2].clone()))
        })
        .collect();
    let mut maxes = [0u32; 3];
    for (e, _) in p.terms() {
        for i in 0..3 {
            maxes[i] = maxes[i].max(e[i]);
        }
    }
    let mut pows: Vec<Vec<BiPoly>> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut v = vec![BiPoly::one()];
        for k in 1..=maxes[i] as usize {
            let n = v[k - 1].mul(&lin[i]);
            v.push(n);
        }
        pows.push(v);
    }
    let mut acc = BiPoly::zero();
    for (e, c) in p.terms() {
        let t = pows[0][e[0] as usize]
            .mul(&pows[1][e[1] as usize])
            .mul(&pows[2][e[2] as usize])
            .scale(c);
        acc = acc.add(&t);
    }
    acc
}

/// The line through two distinct points, as a degree-1 polynomial
/// (cross product of the coordinate vectors).
pub fn line_through(p: &ProjPoint, q: &ProjPoint) -> HomPoly {
    let a = &p.coords;
    let b = &q.coords;
    let c = [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ];
    assert!(!c.iter().all(|x| x.is_zero()), "points coincide");
    HomPoly::from_terms(
        1,
        (0..3).map(|i| {
            let mut e = [0u32; 3];
            e[i] = 1;
            (e, Q::from_integer(c[i].clone()))
        }),
    )
}

/// The line through `base` whose strict transform meets the exceptional
/// curve at direction `d`: the global line through base and M·(a,b,1).
pub fn line_with_direction(base: &ProjPoint, d: &Dir) -> HomPoly {
    let m = localization_matrix(base);
    let a = Q::from_integer(d.0[0].clone());
    let b = Q::from_integer(d.0[1].clone());
    let other = [
        &m[0][0] * &a + &m[0][1] * &b + &m[0][2],
        &m[1][0] * &a + &m[1][1] * &b + &m[1][2],
        &m[2][0] * &a + &m[2][1] * &b + &m[2][2],
    ];
    line_through(base, &ProjPoint::from_q(&other))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::qi;

    #[test]
    fn canonical_representatives() {
        assert_eq!(ProjPoint::from_i64([0, -1, 1]), q1());
        assert_eq!(ProjPoint::from_i64([0, 2, -2]), q1());
        assert_eq!(ProjPoint::from_i64([-3, 0, 0]), p1());
    }

    #[test]
    fn localization_is_unimodular_and_centers() {
        for pt in [p1(), p2(), p3(), q1(), q2(), q3(), ProjPoint::from_i64([6, 10, 15])] {
            let m = localization_matrix(&pt);
            let det = crate::linalg::mat3_det(&m);
            assert!(det == qi(1) || det == qi(-1), "det {:?} for {:?}", det, pt);
            // column 3 = the point
            let col: [Q; 3] = std::array::from_fn(|i| m[i][2].clone());
            assert_eq!(ProjPoint::from_q(&col), pt);
        }
    }

    #[test]
    fn localize_triangle_at_p1() {
        let m = localization_matrix(&p1());
        let x = localize(&HomPoly::var(0), &m);
        let y = localize(&HomPoly::var(1), &m);
        let z = localize(&HomPoly::var(2), &m);
        assert_eq!(x.ord_origin(), Some(0)); // X(p1) != 0
        assert_eq!(y.ord_origin(), Some(1));
        assert_eq!(z.ord_origin(), Some(1));
    }

    #[test]
    fn line_through_vertices() {
        let l = line_through(&p1(), &p2());
        // the line Z = 0 up to scalar
        assert!(l.exact_divide(&HomPoly::var(2)).is_some());
    }

    #[test]
    fn direction_line_roundtrip() {
        // the line Y = 0 through p1, recovered from its direction
        let y = HomPoly::var(1);
        let q = inf_near_on_line(&p1(), &y);
        let l = line_with_direction(&p1(), &q.tower[0]);
        assert!(l.exact_divide(&y).is_some() || y.exact_divide(&l).is_some());
        // and the two standard directions at p1 differ
        let z = HomPoly::var(2);
        let qz = inf_near_on_line(&p1(), &z);
        assert_ne!(q.tower[0], qz.tower[0]);
    }
}
