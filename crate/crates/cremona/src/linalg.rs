//! Exact linear algebra over Q: reduced row echelon form, kernels, and the
//! small fixed-size helpers used for linear maps of P^2.

use crate::poly::Q;
use num::{One, Zero};

/// Reduce `rows` to reduced row echelon form in place; returns pivot columns.
pub fn rref(rows: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let nrows = rows.len();
    if nrows == 0 {
        return vec![];
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let pivot = (r..nrows).find(|&i| !rows[i][c].is_zero());
        let pivot = match pivot {
            None => continue,
            Some(p) => p,
        };
        rows.swap(r, pivot);
        let inv = Q::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(mut rows: Vec<Vec<Q>>) -> usize {
    rref(&mut rows).len()
}

/// Basis of the right kernel {v : A·v = 0}, deterministic: one basis vector
/// per free column, with a 1 in the free column's slot.
pub fn kernel_basis(mut rows: Vec<Vec<Q>>, ncols: usize) -> Vec<Vec<Q>> {
    let pivots = rref(&mut rows);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[ri][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub type Mat3 = [[Q; 3]; 3];

#[cfg(test)]
pub fn mat3_mul_vec(m: &Mat3, v: &[Q; 3]) -> [Q; 3] {
    std::array::from_fn(|i| {
        let mut acc = Q::zero();
        for j in 0..3 {
            acc += &m[i][j] * &v[j];
        }
        acc
    })
}

#[cfg(test)]
pub fn mat3_det(m: &Mat3) -> Q {
    let a = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]);
    let b = &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0]);
    let c = &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    a - b + c
}

/// Adjugate: mat3_mul(m, adj(m)) = det·Id. Used to invert linear maps
/// projectively without dividing.
pub fn mat3_adjugate(m: &Mat3) -> Mat3 {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| -> Q {
        &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0]
    };
    [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::qi;

    #[test]
    fn kernel_of_rank_two() {
        // x + y + z = 0, y - z = 0 -> kernel spanned by (-2, 1, 1)
        let rows = vec![vec![qi(1), qi(1), qi(1)], vec![qi(0), qi(1), qi(-1)]];
        let k = kernel_basis(rows, 3);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert!((v[0].clone() + v[1].clone() + v[2].clone()).is_zero());
        assert_eq!(v[1], v[2]);
    }

    #[test]
    fn adjugate_inverts() {
        let m: Mat3 = [
            [qi(1), qi(2), qi(0)],
            [qi(0), qi(1), qi(4)],
            [qi(1), qi(0), qi(1)],
        ];
        let adj = mat3_adjugate(&m);
        let det = mat3_det(&m);
        // m · adj = det · I  (check one column)
        let col = [adj[0][0].clone(), adj[1][0].clone(), adj[2][0].clone()];
        let prod = mat3_mul_vec(&m, &col);
        assert_eq!(prod[0], det);
        assert!(prod[1].is_zero());
        assert!(prod[2].is_zero());
    }
}
