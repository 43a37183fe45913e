//! Dense matrices over a [`FieldSpec`].
//!
//! Elimination uses the first nonzero entry at or below the current row as
//! pivot (lowest row index wins), so reduced forms are reproducible.

use thiserror::Error;

use crate::galois::{FieldElem, FieldError, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrices are over different fields")]
    FieldMismatch,
    #[error("system is rank deficient (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },
    #[error("overdetermined system is inconsistent")]
    Inconsistent,
    #[error("Cauchy points are not distinct (x[{0}] + y[{1}] = 0)")]
    CoincidentPoints(usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
    field: FieldSpec,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} over {:?}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zeros(field: &FieldSpec, rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![FieldElem::ZERO; rows * cols], field: field.clone() }
    }

    pub fn identity(field: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::ONE);
        }
        m
    }

    pub fn from_fn(field: &FieldSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> FieldElem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data, field: field.clone() }
    }

    pub fn from_rows(field: &FieldSpec, rows: &[Vec<FieldElem>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Shape("ragged rows".into()));
        }
        let data: Vec<FieldElem> = rows.iter().flatten().copied().collect();
        if let Some(bad) = data.iter().find(|e| !field.contains(**e)) {
            return Err(FieldError::NotInField(bad.raw()).into());
        }
        Ok(Mat { rows: rows.len(), cols, data, field: field.clone() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(field: &FieldSpec, cols: &[Vec<FieldElem>]) -> Result<Self, MatrixError> {
        Ok(Self::from_rows(field, cols)?.transpose())
    }

    pub fn column_vector(field: &FieldSpec, v: &[FieldElem]) -> Self {
        Mat { rows: v.len(), cols: 1, data: v.to_vec(), field: field.clone() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElem {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    fn same_field(&self, other: &Mat) -> Result<(), MatrixError> {
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Mat) -> Result<Mat, MatrixError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(MatrixError::Shape(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Mat::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, c)));
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a plain vector.
    pub fn mul_vec(&self, v: &[FieldElem]) -> Result<Vec<FieldElem>, MatrixError> {
        if v.len() != self.cols {
            return Err(MatrixError::Shape(format!("{}x{} * vector of {}", self.rows, self.cols, v.len())));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r).iter().copied(), v.iter().copied())).collect())
    }

    /// `self^t * v`, i.e. the inner product of every column with `v`.
    pub fn tmul_vec(&self, v: &[FieldElem]) -> Result<Vec<FieldElem>, MatrixError> {
        if v.len() != self.rows {
            return Err(MatrixError::Shape(format!("({}x{})^t * vector of {}", self.rows, self.cols, v.len())));
        }
        let f = &self.field;
        let mut out = vec![FieldElem::ZERO; self.cols];
        for (r, &x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                *o = f.add(*o, f.mul(self.get(r, c), x));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, MatrixError> {
        self.same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::Shape("add".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.field.add(*a, *b)).collect();
        Ok(Mat { rows: self.rows, cols: self.cols, data, field: self.field.clone() })
    }

    /// Element-wise product.
    pub fn hadamard(&self, other: &Mat) -> Result<Mat, MatrixError> {
        self.same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(MatrixError::Shape(format!(
                "hadamard {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.field.mul(*a, *b)).collect();
        Ok(Mat { rows: self.rows, cols: self.cols, data, field: self.field.clone() })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        Mat::from_fn(&self.field, self.rows, cols.len(), |r, c| self.get(r, cols[c]))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Mat {
        Mat::from_fn(&self.field, rows.len(), self.cols, |r, c| self.get(rows[r], c))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(&self.field, rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]))
    }

    pub fn hstack(parts: &[&Mat]) -> Result<Mat, MatrixError> {
        let first = parts.first().ok_or_else(|| MatrixError::Shape("empty hstack".into()))?;
        let rows = first.rows;
        let mut cols = 0;
        for p in parts {
            first.same_field(p)?;
            if p.rows != rows {
                return Err(MatrixError::Shape("hstack row mismatch".into()));
            }
            cols += p.cols;
        }
        let mut out = Mat::zeros(&first.field, rows, cols);
        let mut off = 0;
        for p in parts {
            for r in 0..rows {
                for c in 0..p.cols {
                    out.set(r, off + c, p.get(r, c));
                }
            }
            off += p.cols;
        }
        Ok(out)
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref_in_place(&mut self, limit_cols: usize) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..limit_cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                let v = self.get(row, c);
                self.set(row, c, f.mul(v, inv));
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.add(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let cols = m.cols;
        m.rref_in_place(cols).len()
    }

    /// Indices of a maximal set of linearly independent columns, greedy in
    /// column order.
    pub fn independent_cols(&self) -> Vec<usize> {
        let mut m = self.clone();
        let cols = m.cols;
        m.rref_in_place(cols)
    }

    /// Solves `self * x = b` for square or overdetermined `self` with full
    /// column rank. Overdetermined systems must be consistent.
    pub fn solve(&self, b: &Mat) -> Result<Mat, MatrixError> {
        self.same_field(b)?;
        if b.rows != self.rows {
            return Err(MatrixError::Shape(format!("solve: A has {} rows, b has {}", self.rows, b.rows)));
        }
        if self.rows < self.cols {
            return Err(MatrixError::RankDeficient { rank: self.rows, needed: self.cols });
        }
        let n = self.cols;
        let mut aug = Mat::hstack(&[self, b])?;
        let pivots = aug.rref_in_place(n);
        if pivots.len() < n {
            return Err(MatrixError::RankDeficient { rank: pivots.len(), needed: n });
        }
        for r in n..aug.rows {
            if (n..aug.cols).any(|c| !aug.get(r, c).is_zero()) {
                return Err(MatrixError::Inconsistent);
            }
        }
        Ok(Mat::from_fn(&self.field, n, b.cols, |r, c| aug.get(r, n + c)))
    }

    pub fn solve_vec(&self, b: &[FieldElem]) -> Result<Vec<FieldElem>, MatrixError> {
        Ok(self.solve(&Mat::column_vector(&self.field, b))?.col(0))
    }

    pub fn inverse(&self) -> Result<Mat, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Shape("inverse of non-square matrix".into()));
        }
        self.solve(&Mat::identity(&self.field, self.rows))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Whether `v` lies in the column space.
    pub fn col_space_contains(&self, v: &[FieldElem]) -> bool {
        let with = Mat::hstack(&[self, &Mat::column_vector(&self.field, v)]).expect("row count matches");
        with.rank() == self.rank()
    }

    /// Rank over the base field `F_q`: each entry is expanded into its `m`
    /// coordinates, giving a `(rows*m) x cols` matrix over `F_q`.
    pub fn rank_over_subfield(&self) -> usize {
        self.expand_to_base().rank()
    }

    pub fn expand_to_base(&self) -> Mat {
        let base = self.field.base_field();
        let m = self.field.ext_degree() as usize;
        let mut out = Mat::zeros(&base, self.rows * m, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                for (i, coord) in self.field.coords(self.get(r, c)).into_iter().enumerate() {
                    out.set(r * m + i, c, FieldElem(u64::from(coord)));
                }
            }
        }
        out
    }

    /// Cauchy matrix with entry `(i, j) = (x_i + y_j)^{-1}`.
    pub fn cauchy(field: &FieldSpec, x: &[FieldElem], y: &[FieldElem]) -> Result<Mat, MatrixError> {
        let mut out = Mat::zeros(field, x.len(), y.len());
        for (i, &xi) in x.iter().enumerate() {
            for (j, &yj) in y.iter().enumerate() {
                let s = field.add(xi, yj);
                if s.is_zero() {
                    return Err(MatrixError::CoincidentPoints(i, j));
                }
                out.set(i, j, field.inv(s)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn e(v: u64) -> FieldElem {
        FieldElem(v)
    }

    fn gf4() -> FieldSpec {
        FieldSpec::binary(2).unwrap()
    }

    #[test]
    fn cauchy_examples() {
        let gf2 = FieldSpec::binary(1).unwrap();
        let c = Mat::cauchy(&gf2, &[e(0)], &[e(1)]).unwrap();
        assert_eq!(c.entries(), &[e(1)]);
        let c = Mat::cauchy(&gf4(), &[e(1), e(2)], &[e(3)]).unwrap();
        assert_eq!(c.col(0), vec![e(3), e(1)]);
        assert_eq!(Mat::cauchy(&gf4(), &[e(1)], &[e(1)]), Err(MatrixError::CoincidentPoints(0, 0)));
    }

    #[test]
    fn cauchy_2x2_determinants_nonzero() {
        let f = gf4();
        let c = Mat::cauchy(&f, &[e(0), e(1)], &[e(2), e(3)]).unwrap();
        // brute-force determinant ad + bc (char 2)
        let det = f.add(f.mul(c.get(0, 0), c.get(1, 1)), f.mul(c.get(0, 1), c.get(1, 0)));
        assert!(!det.is_zero());
        assert!(c.is_invertible());
    }

    #[test]
    fn every_square_cauchy_submatrix_invertible() {
        let f = FieldSpec::binary(4).unwrap();
        let x: Vec<_> = (1..=6).map(e).collect();
        let y: Vec<_> = (7..=12).map(e).collect();
        let c = Mat::cauchy(&f, &x, &y).unwrap();
        for size in 1..=6 {
            for rows in (0..6).combinations(size) {
                for cols in (0..6).combinations(size) {
                    assert!(c.submatrix(&rows, &cols).is_invertible(), "rows {rows:?} cols {cols:?}");
                }
            }
        }
    }

    #[test]
    fn solve_examples() {
        let f = gf4();
        let a = Mat::from_rows(&f, &[vec![e(1), e(1)], vec![e(1), e(2)]]).unwrap();
        let x = a.solve_vec(&[e(0), e(1)]).unwrap();
        assert_eq!(x, vec![e(2), e(2)]);
        assert_eq!(a.mul_vec(&x).unwrap(), vec![e(0), e(1)]);
        let id = Mat::identity(&f, 3);
        let b = vec![e(1), e(2), e(3)];
        assert_eq!(id.solve_vec(&b).unwrap(), b);
        let z = Mat::zeros(&f, 2, 2);
        assert!(matches!(z.solve_vec(&[e(1), e(0)]), Err(MatrixError::RankDeficient { .. })));
    }

    #[test]
    fn overdetermined_solve_checks_consistency() {
        let f = gf4();
        let a = Mat::from_rows(&f, &[vec![e(1), e(0)], vec![e(0), e(1)], vec![e(1), e(1)]]).unwrap();
        assert_eq!(a.solve_vec(&[e(2), e(3), e(1)]).unwrap(), vec![e(2), e(3)]);
        assert_eq!(a.solve_vec(&[e(2), e(3), e(2)]), Err(MatrixError::Inconsistent));
    }

    #[test]
    fn hadamard_examples() {
        let f = gf4();
        let v = Mat::column_vector(&f, &[e(1), e(2)]);
        assert_eq!(v.hadamard(&v).unwrap().col(0), vec![e(1), e(3)]);
        let ones = Mat::column_vector(&f, &[e(1), e(1)]);
        assert_eq!(ones.hadamard(&v).unwrap(), v);
        let id = Mat::identity(&f, 3);
        let e1 = Mat::column_vector(&f, &id.col(1));
        assert_eq!(e1.hadamard(&e1).unwrap(), e1);
        assert!(matches!(v.hadamard(&id), Err(MatrixError::Shape(_))));
    }

    #[test]
    fn rank_over_subfield_examples() {
        let f = FieldSpec::extension(1, 5).unwrap();
        let theta = f.basis(3);
        assert_eq!(Mat::from_rows(&f, &[vec![theta]]).unwrap().rank_over_subfield(), 1);
        assert_eq!(Mat::from_rows(&f, &[vec![theta, theta]]).unwrap().rank_over_subfield(), 1);
        let basis: Vec<_> = (0..5).map(|i| f.basis(i)).collect();
        assert_eq!(Mat::from_rows(&f, std::slice::from_ref(&basis)).unwrap().rank_over_subfield(), 5);
        // Over the big field those 5 columns have rank 1.
        assert_eq!(Mat::from_rows(&f, &[basis]).unwrap().rank(), 1);
    }

    #[test]
    fn field_mismatch_detected() {
        let a = Mat::identity(&gf4(), 2);
        let b = Mat::identity(&FieldSpec::binary(3).unwrap(), 2);
        assert_eq!(a.mul(&b), Err(MatrixError::FieldMismatch));
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::vec(0u64..256, n * n)
    }

    proptest! {
        #[test]
        fn solve_inverts_multiply(n in 1usize..=12, entries in arb_matrix(12), x in proptest::collection::vec(0u64..256, 12)) {
            let f = FieldSpec::binary(8).unwrap();
            let a = Mat::from_fn(&f, n, n, |r, c| e(entries[r * 12 + c]));
            prop_assume!(a.is_invertible());
            let x: Vec<_> = x[..n].iter().map(|&v| e(v)).collect();
            let b = a.mul_vec(&x).unwrap();
            prop_assert_eq!(a.solve_vec(&b).unwrap(), x);
        }

        #[test]
        fn hadamard_commutative_associative(a in arb_matrix(3), b in arb_matrix(3), c in arb_matrix(3)) {
            let f = FieldSpec::binary(8).unwrap();
            let m = |v: &Vec<u64>| Mat::from_fn(&f, 3, 3, |r, col| e(v[r * 3 + col]));
            let (a, b, c) = (m(&a), m(&b), m(&c));
            prop_assert_eq!(a.hadamard(&b).unwrap(), b.hadamard(&a).unwrap());
            prop_assert_eq!(a.hadamard(&b).unwrap().hadamard(&c).unwrap(), a.hadamard(&b.hadamard(&c).unwrap()).unwrap());
        }
    }
}
