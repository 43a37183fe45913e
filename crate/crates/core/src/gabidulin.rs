//! Linearized polynomials over `F_{q^m}` and the systematic Gabidulin
//! encoder used as a precoder.
//!
//! A linearized polynomial `f(x) = sum_i a_i x^{q^i}` is an `F_q`-linear map,
//! so it is pinned down by its values on any `t + 1` points that are linearly
//! independent over `F_q`. Only erasure-style recovery (interpolation) is
//! provided; there is no rank-error decoder.

use thiserror::Error;

use crate::galois::{FieldElem, FieldSpec};
use crate::matrix::{Mat, MatrixError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GabidulinError {
    #[error("evaluation points are dependent over the base field (rank {rank} of {count})")]
    DependentPoints { rank: usize, count: usize },
    #[error("need {needed} points for q-degree {degree}, got {got}")]
    PointCount { needed: usize, got: usize, degree: usize },
    #[error("{points} points do not fit an extension of degree {m}")]
    ExtensionTooSmall { points: usize, m: usize },
    #[error("value count {values} does not match point count {points}")]
    ValueCount { values: usize, points: usize },
    #[error("message of {msg} symbols exceeds code length {len}")]
    MessageTooLong { msg: usize, len: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedPoly {
    coeffs: Vec<FieldElem>,
}

impl LinearizedPoly {
    pub fn new(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(FieldElem::ZERO);
        }
        LinearizedPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn q_degree(&self) -> Option<usize> {
        if self.coeffs.len() == 1 && self.coeffs[0].is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn eval(&self, field: &FieldSpec, x: FieldElem) -> FieldElem {
        let mut acc = FieldElem::ZERO;
        let mut pow = x;
        for (i, &a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                pow = field.frobenius(pow, 1);
            }
            acc = field.add(acc, field.mul(a, pow));
        }
        acc
    }
}

/// `F_q`-linearly independent points in `F_{q^m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalPoints {
    points: Vec<FieldElem>,
}

impl EvalPoints {
    pub fn new(field: &FieldSpec, points: Vec<FieldElem>) -> Result<Self, GabidulinError> {
        let m = field.ext_degree() as usize;
        if points.len() > m {
            return Err(GabidulinError::ExtensionTooSmall { points: points.len(), m });
        }
        let rank = subfield_rank(field, &points);
        if rank != points.len() {
            return Err(GabidulinError::DependentPoints { rank, count: points.len() });
        }
        Ok(EvalPoints { points })
    }

    /// `x^0, x^1, ..., x^{count-1}` of the polynomial basis; independent by
    /// construction.
    pub fn polynomial_basis(field: &FieldSpec, count: usize) -> Result<Self, GabidulinError> {
        let m = field.ext_degree() as usize;
        if count > m {
            return Err(GabidulinError::ExtensionTooSmall { points: count, m });
        }
        Ok(EvalPoints { points: (0..count as u32).map(|i| field.basis(i)).collect() })
    }

    pub fn points(&self) -> &[FieldElem] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rank over `F_q` of a list of elements.
pub fn subfield_rank(field: &FieldSpec, points: &[FieldElem]) -> usize {
    if points.is_empty() {
        return 0;
    }
    Mat::from_fn(field, 1, points.len(), |_, c| points[c]).rank_over_subfield()
}

pub fn lin_eval(field: &FieldSpec, f: &LinearizedPoly, x: FieldElem) -> FieldElem {
    f.eval(field, x)
}

/// Moore matrix with entry `(i, j) = theta_j^{q^i}`, `i < rows`.
pub fn moore_matrix(field: &FieldSpec, points: &[FieldElem], rows: usize) -> Mat {
    let mut out = Mat::zeros(field, rows, points.len());
    for (j, &p) in points.iter().enumerate() {
        let mut v = p;
        for i in 0..rows {
            if i > 0 {
                v = field.frobenius(v, 1);
            }
            out.set(i, j, v);
        }
    }
    out
}

/// The unique linearized polynomial of q-degree at most `degree` taking
/// `values[j]` at `points[j]`.
pub fn interpolate(
    field: &FieldSpec,
    points: &[FieldElem],
    values: &[FieldElem],
    degree: usize,
) -> Result<LinearizedPoly, GabidulinError> {
    if points.len() != degree + 1 {
        return Err(GabidulinError::PointCount { needed: degree + 1, got: points.len(), degree });
    }
    if values.len() != points.len() {
        return Err(GabidulinError::ValueCount { values: values.len(), points: points.len() });
    }
    let rank = subfield_rank(field, points);
    if rank != points.len() {
        return Err(GabidulinError::DependentPoints { rank, count: points.len() });
    }
    // f(theta_j) = sum_i a_i theta_j^{q^i}  =>  Moore^t a = values
    let system = moore_matrix(field, points, degree + 1).transpose();
    let coeffs = system.solve_vec(values)?;
    Ok(LinearizedPoly::new(coeffs))
}

/// Systematic Gabidulin encoding: the first `msg.len()` outputs are the
/// message itself, the rest are evaluations of the interpolating polynomial.
pub fn systematic_encode(
    field: &FieldSpec,
    msg: &[FieldElem],
    points: &EvalPoints,
) -> Result<Vec<FieldElem>, GabidulinError> {
    let b = msg.len();
    if b > points.len() {
        return Err(GabidulinError::MessageTooLong { msg: b, len: points.len() });
    }
    if b == 0 {
        return Ok(vec![FieldElem::ZERO; points.len()]);
    }
    let f = interpolate(field, &points.points[..b], msg, b - 1)?;
    let mut out = msg.to_vec();
    out.extend(points.points[b..].iter().map(|&p| f.eval(field, p)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_elem(f: &FieldSpec, rng: &mut impl Rng) -> FieldElem {
        FieldElem(rng.gen::<u64>() & (f.order() - 1))
    }

    #[test]
    fn eval_examples() {
        let f = FieldSpec::extension(1, 2).unwrap();
        let a0 = FieldElem(3);
        let x = FieldElem(2);
        let p = LinearizedPoly::new(vec![a0]);
        assert_eq!(p.eval(&f, x), f.mul(a0, x));
        assert_eq!(p.eval(&f, FieldElem::ZERO), FieldElem::ZERO);
        let frob = LinearizedPoly::new(vec![FieldElem::ZERO, FieldElem::ONE]);
        assert_eq!(frob.eval(&f, FieldElem(2)), FieldElem(3));
        assert_eq!(frob.q_degree(), Some(1));
        assert_eq!(LinearizedPoly::zero().q_degree(), None);
    }

    #[test]
    fn moore_matrix_examples() {
        let f = FieldSpec::extension(2, 4).unwrap();
        let pts = [f.basis(0), f.basis(1), f.basis(2)];
        let m1 = moore_matrix(&f, &pts, 1);
        assert_eq!(m1.row(0), &pts);
        let square = moore_matrix(&f, &pts, 3);
        assert!(square.is_invertible());
        assert_eq!(subfield_rank(&f, &pts), 3);
        let dup = [pts[0], pts[1], pts[1]];
        assert!(!moore_matrix(&f, &dup, 3).is_invertible());
    }

    #[test]
    fn single_point_interpolation() {
        let f = FieldSpec::extension(3, 3).unwrap();
        let theta = f.basis(1);
        let v = FieldElem(0o123);
        let p = interpolate(&f, &[theta], &[v], 0).unwrap();
        assert_eq!(p.coeffs(), &[f.mul(v, f.inv(theta).unwrap())]);
    }

    #[test]
    fn dependent_points_rejected() {
        let f = FieldSpec::extension(2, 3).unwrap();
        let theta = f.basis(1);
        let c = f.base(3).unwrap();
        let err = interpolate(&f, &[theta, f.mul(c, theta)], &[FieldElem::ONE, FieldElem::ONE], 1).unwrap_err();
        assert_eq!(err, GabidulinError::DependentPoints { rank: 1, count: 2 });
        assert!(EvalPoints::new(&f, vec![theta, f.mul(c, theta)]).is_err());
    }

    #[test]
    fn interpolation_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = rng.gen_range(1..=3);
            let m = rng.gen_range(2..=8);
            let f = FieldSpec::extension(s, m).unwrap();
            let t = rng.gen_range(0..m as usize);
            let poly = LinearizedPoly::new((0..=t).map(|_| rand_elem(&f, &mut rng)).collect());
            let pts = EvalPoints::polynomial_basis(&f, t + 1).unwrap();
            let vals: Vec<_> = pts.points().iter().map(|&p| poly.eval(&f, p)).collect();
            assert_eq!(interpolate(&f, pts.points(), &vals, t).unwrap(), poly);
        }
    }

    #[test]
    fn evaluation_is_fq_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = FieldSpec::extension(2, 6).unwrap();
        for _ in 0..200 {
            let poly = LinearizedPoly::new((0..4).map(|_| rand_elem(&f, &mut rng)).collect());
            let (x1, x2) = (rand_elem(&f, &mut rng), rand_elem(&f, &mut rng));
            let b1 = f.base(rng.gen_range(0..4)).unwrap();
            let b2 = f.base(rng.gen_range(0..4)).unwrap();
            let lhs = poly.eval(&f, f.add(f.mul(b1, x1), f.mul(b2, x2)));
            let rhs = f.add(f.mul(b1, poly.eval(&f, x1)), f.mul(b2, poly.eval(&f, x2)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn combination_of_codeword_symbols_is_an_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = FieldSpec::extension(3, 6).unwrap();
        let pts = EvalPoints::polynomial_basis(&f, 6).unwrap();
        for _ in 0..50 {
            let msg: Vec<_> = (0..4).map(|_| rand_elem(&f, &mut rng)).collect();
            let cw = systematic_encode(&f, &msg, &pts).unwrap();
            let poly = interpolate(&f, &pts.points()[..4], &msg, 3).unwrap();
            let a: Vec<_> = (0..6).map(|_| f.base(rng.gen_range(0..8)).unwrap()).collect();
            let combo = f.dot(a.iter().copied(), cw.iter().copied());
            let point = f.dot(a.iter().copied(), pts.points().iter().copied());
            assert_eq!(combo, poly.eval(&f, point));
        }
    }

    #[test]
    fn systematic_encode_examples() {
        let f = FieldSpec::extension(1, 5).unwrap();
        let pts = EvalPoints::polynomial_basis(&f, 5).unwrap();
        let msg: Vec<_> = (1..=5).map(FieldElem).collect();
        assert_eq!(systematic_encode(&f, &msg, &pts).unwrap(), msg);
        let zero = vec![FieldElem::ZERO; 3];
        assert_eq!(systematic_encode(&f, &zero, &pts).unwrap(), vec![FieldElem::ZERO; 5]);
        let msg3: Vec<_> = [7, 9, 30].into_iter().map(FieldElem).collect();
        let cw = systematic_encode(&f, &msg3, &pts).unwrap();
        assert_eq!(&cw[..3], &msg3[..]);
        // any 3 positions here are independent basis points
        let poly = interpolate(&f, &pts.points()[..3], &msg3, 2).unwrap();
        let again = interpolate(&f, &[pts.points()[1], pts.points()[3], pts.points()[4]], &[cw[1], cw[3], cw[4]], 2).unwrap();
        assert_eq!(poly, again);
    }
}
