//! Dense row-major matrices over a scalar algebra.
//!
//! All operations take the algebra explicitly; the matrix stores only its
//! shape and entries. Sums never multiply by `zero` to stay correct over
//! algebras without annihilation.

use crate::scalar::{RingAlgebra, ScalarAlgebra};
use crate::signature::Permutation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix<A: ScalarAlgebra> {
    rows: usize,
    cols: usize,
    entries: Vec<A::Elem>,
}

impl<A: ScalarAlgebra> Matrix<A> {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<A::Elem>) -> Option<Self> {
        if entries.len() == rows * cols {
            Some(Matrix { rows, cols, entries })
        } else {
            None
        }
    }

    pub fn filled(rows: usize, cols: usize, value: A::Elem) -> Self {
        Matrix { rows, cols, entries: vec![value; rows * cols] }
    }

    pub fn zeros(rows: usize, cols: usize, alg: &A) -> Self {
        Self::filled(rows, cols, alg.zero())
    }

    pub fn identity(n: usize, alg: &A) -> Self {
        let mut m = Self::zeros(n, n, alg);
        for i in 0..n {
            m.set(i, i, alg.one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &A::Elem {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: A::Elem) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[A::Elem] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Matrix product; `self` is applied after `rhs` (self: B -> C,
    /// rhs: A -> B gives A -> C).
    pub fn mul(&self, rhs: &Matrix<A>, alg: &A) -> Matrix<A> {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, rhs.cols, alg);
        for i in 0..self.rows {
            for k in 0..rhs.cols {
                let mut acc = alg.zero();
                for j in 0..self.cols {
                    acc = alg.add(&acc, &alg.mul(self.get(i, j), rhs.get(j, k)));
                }
                out.set(i, k, acc);
            }
        }
        out
    }

    /// Kronecker product with the left factor major:
    /// `(self (x) rhs)[(i1, i2), (j1, j2)] = self[i1, j1] * rhs[i2, j2]`
    /// at row `i1 * rhs.rows + i2`, column `j1 * rhs.cols + j2`.
    pub fn kron(&self, rhs: &Matrix<A>, alg: &A) -> Matrix<A> {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Matrix::zeros(rows, cols, alg);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                for i2 in 0..rhs.rows {
                    for j2 in 0..rhs.cols {
                        out.set(
                            i1 * rhs.rows + i2,
                            j1 * rhs.cols + j2,
                            alg.mul(self.get(i1, j1), rhs.get(i2, j2)),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix<A> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        Matrix { rows: self.cols, cols: self.rows, entries }
    }

    pub fn conj_transpose(&self, alg: &A) -> Matrix<A> {
        let mut out = self.transpose();
        for v in &mut out.entries {
            *v = alg.conj(v);
        }
        out
    }

    /// Entrywise multiplication by a scalar.
    pub fn scale(&self, s: &A::Elem, alg: &A) -> Matrix<A> {
        let entries = self.entries.iter().map(|v| alg.mul(s, v)).collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn equal(&self, other: &Matrix<A>, alg: &A) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(other.entries.iter())
                .all(|(a, b)| alg.equal(a, b))
    }

    pub fn trace(&self, alg: &A) -> A::Elem {
        assert!(self.is_square(), "trace of a non-square matrix");
        let mut acc = alg.zero();
        for i in 0..self.rows {
            acc = alg.add(&acc, self.get(i, i));
        }
        acc
    }

    /// The unique entry of a 1x1 matrix.
    pub fn scalar_value(&self) -> &A::Elem {
        assert!(self.rows == 1 && self.cols == 1, "not a scalar matrix");
        &self.entries[0]
    }

    pub fn render(&self, alg: &A) -> String {
        let mut cells: Vec<Vec<String>> = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            cells.push((0..self.cols).map(|j| alg.format(self.get(i, j))).collect());
        }
        let width = cells
            .iter()
            .flat_map(|row| row.iter().map(|c| c.len()))
            .max()
            .unwrap_or(1);
        let mut s = String::new();
        for row in &cells {
            s.push('[');
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                for _ in c.len()..width {
                    s.push(' ');
                }
                s.push_str(c);
            }
            s.push_str("]\n");
        }
        if self.rows == 0 {
            s.push_str(&format!("[0x{} empty]\n", self.cols));
        }
        s
    }

}

impl<A: RingAlgebra> Matrix<A> {
    /// Gauss-Jordan inverse over a field-like algebra; `None` when singular.
    pub fn try_inverse(&self, alg: &A) -> Option<Matrix<A>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n, alg);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !alg.is_zero(a.get(r, col)))?;
            if pivot != col {
                a.swap_rows(col, pivot);
                inv.swap_rows(col, pivot);
            }
            let scale = alg.inv(a.get(col, col))?;
            a.scale_row(col, &scale, alg);
            inv.scale_row(col, &scale, alg);
            for r in 0..n {
                if r == col || alg.is_zero(a.get(r, col)) {
                    continue;
                }
                let factor = alg.neg(a.get(r, col));
                a.add_scaled_row(r, col, &factor, alg);
                inv.add_scaled_row(r, col, &factor, alg);
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        for j in 0..self.cols {
            self.entries.swap(r1 * self.cols + j, r2 * self.cols + j);
        }
    }

    fn scale_row(&mut self, r: usize, s: &A::Elem, alg: &A) {
        for j in 0..self.cols {
            let v = alg.mul(s, self.get(r, j));
            self.set(r, j, v);
        }
    }

    /// row r += s * row src.
    fn add_scaled_row(&mut self, r: usize, src: usize, s: &A::Elem, alg: &A) {
        for j in 0..self.cols {
            let v = alg.add(self.get(r, j), &alg.mul(s, self.get(src, j)));
            self.set(r, j, v);
        }
    }
}

/// Inverse by transpose for algebras without subtraction (booleans, meet
/// semilattices): returns the transpose when it is a two-sided inverse.
pub fn try_inverse_orthogonal<A: ScalarAlgebra>(m: &Matrix<A>, alg: &A) -> Option<Matrix<A>> {
    if !m.is_square() {
        return None;
    }
    let t = m.transpose();
    let id = Matrix::identity(m.rows(), alg);
    if m.mul(&t, alg).equal(&id, alg) && t.mul(m, alg).equal(&id, alg) {
        Some(t)
    } else {
        None
    }
}

/// Permutation of tensor factors as a matrix: factor `i` (dimension
/// `dims[i]`) moves to position `p.apply(i)`. Mixed-radix, left factor
/// major on both sides.
pub fn perm_matrix<A: ScalarAlgebra>(p: &Permutation, dims: &[usize], alg: &A) -> Matrix<A> {
    assert_eq!(p.len(), dims.len());
    let total: usize = dims.iter().product();
    let inv = p.inverse();
    let out_dims: Vec<usize> = (0..dims.len()).map(|j| dims[inv.apply(j)]).collect();
    let mut m = Matrix::zeros(total, total, alg);
    for col in 0..total {
        let digits = decode(col, dims);
        let out_digits: Vec<usize> =
            (0..dims.len()).map(|j| digits[inv.apply(j)]).collect();
        let row = encode(&out_digits, &out_dims);
        m.set(row, col, alg.one());
    }
    m
}

/// Mixed-radix decode, left digit major.
pub fn decode(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        digits[k] = idx % d;
        idx /= d;
    }
    digits
}

/// Mixed-radix encode, left digit major.
pub fn encode(digits: &[usize], dims: &[usize]) -> usize {
    debug_assert_eq!(digits.len(), dims.len());
    let mut idx = 0;
    for (d, &digit) in dims.iter().zip(digits.iter()) {
        idx = idx * d + digit;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, BoolAlg, RatAlg};

    #[test]
    fn product_and_identity() {
        let alg = RatAlg;
        let m = Matrix::<RatAlg>::from_entries(
            2,
            2,
            vec![rat(1), rat(2), rat(3), rat(4)],
        )
        .unwrap();
        let id = Matrix::identity(2, &alg);
        assert!(m.mul(&id, &alg).equal(&m, &alg));
        assert!(id.mul(&m, &alg).equal(&m, &alg));
        let m2 = m.mul(&m, &alg);
        // [[1,2],[3,4]]^2 = [[7,10],[15,22]]
        assert_eq!(m2.get(0, 0), &rat(7));
        assert_eq!(m2.get(0, 1), &rat(10));
        assert_eq!(m2.get(1, 0), &rat(15));
        assert_eq!(m2.get(1, 1), &rat(22));
    }

    #[test]
    fn kron_left_factor_major() {
        let alg = RatAlg;
        let a = Matrix::<RatAlg>::from_entries(1, 2, vec![rat(1), rat(2)]).unwrap();
        let b = Matrix::<RatAlg>::from_entries(1, 2, vec![rat(3), rat(4)]).unwrap();
        let k = a.kron(&b, &alg);
        assert_eq!(k.rows(), 1);
        assert_eq!(k.cols(), 4);
        // (j1, j2) -> j1 * 2 + j2: entries 1*3, 1*4, 2*3, 2*4.
        assert_eq!(k.entries(), &[rat(3), rat(4), rat(6), rat(8)]);
    }

    #[test]
    fn swap_permutation_matrix() {
        let alg = BoolAlg;
        let p = Permutation::from_images(vec![1, 0]).unwrap();
        let m = perm_matrix(&p, &[2, 3], &alg);
        // Column (i, j) = i*3+j maps to row (j, i) = j*2+i.
        for i in 0..2 {
            for j in 0..3 {
                assert!(*m.get(j * 2 + i, i * 3 + j));
            }
        }
        // Exactly one 1 per column.
        for col in 0..6 {
            let count = (0..6).filter(|&r| *m.get(r, col)).count();
            assert_eq!(count, 1);
        }
    }

    #[test]
    fn mixed_radix_round_trip() {
        let dims = [2, 3, 4];
        for idx in 0..24 {
            assert_eq!(encode(&decode(idx, &dims), &dims), idx);
        }
        assert_eq!(decode(23, &dims), vec![1, 2, 3]);
    }
}
