//! Product-matrix MBR codes.
//!
//! The message sits in a symmetric `d x d` matrix
//! `M = [[S, T], [T^t, 0]]` (`S` is `k x k` symmetric, `T` is `k x (d-k)`),
//! node `i` stores `M psi_i`, and the repair symbol between nodes `i` and `j`
//! is `psi_j^t M psi_i` in either direction.
//!
//! Message layout: the nonzero upper triangle of `M` row-major, i.e. rows
//! `0..k`, columns `a..d` in row `a`.

use std::sync::Arc;

use itertools::Itertools;

use crate::galois::{FieldElem, FieldSpec};
use crate::matrix::Mat;
use crate::mbr::{generator_from_encoder, CodeError, CodeInstance, MbrParams, Reconstruct, RepairPacket, Scheme, SchemeAux};

/// Matrix positions of the message symbols, in message order.
pub fn message_layout(k: usize, d: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|a| (a..d).map(move |b| (a, b))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageMatrix {
    m: Mat,
    k: usize,
    d: usize,
}

impl MessageMatrix {
    pub fn build(field: &FieldSpec, msg: &[FieldElem], k: usize, d: usize) -> Result<Self, CodeError> {
        let layout = message_layout(k, d);
        if msg.len() != layout.len() {
            return Err(CodeError::Length { expected: layout.len(), got: msg.len() });
        }
        let mut m = Mat::zeros(field, d, d);
        for (&(a, b), &v) in layout.iter().zip(msg) {
            m.set(a, b, v);
            m.set(b, a, v);
        }
        Ok(MessageMatrix { m, k, d })
    }

    /// Accepts a matrix after checking the symmetric S/T/0 structure.
    pub fn from_matrix(m: Mat, k: usize) -> Result<Self, CodeError> {
        let d = m.rows();
        if !m.is_square() || k > d {
            return Err(CodeError::Invalid("message matrix must be d x d with k <= d".into()));
        }
        if m != m.transpose() {
            return Err(CodeError::Invalid("message matrix is not symmetric".into()));
        }
        if (k..d).cartesian_product(k..d).any(|(a, b)| !m.get(a, b).is_zero()) {
            return Err(CodeError::Invalid("lower-right block of the message matrix is nonzero".into()));
        }
        Ok(MessageMatrix { m, k, d })
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn to_message(&self) -> Vec<FieldElem> {
        message_layout(self.k, self.d).into_iter().map(|(a, b)| self.m.get(a, b)).collect()
    }

    pub fn column(&self, i: usize) -> Vec<FieldElem> {
        self.m.col(i)
    }
}

/// The `d x n` encoding matrix `psi`, systematic on the first `k` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingMatrix {
    psi: Mat,
    k: usize,
    cauchy_x: Vec<FieldElem>,
    cauchy_y: Vec<FieldElem>,
}

/// Smallest field holding the `n - k + d` distinct nonzero Cauchy points.
pub fn pm_field(n: usize, k: usize, d: usize, field_bits: Option<u32>) -> Result<FieldSpec, CodeError> {
    let needed = (n - k + d + 1) as u64;
    let field = match field_bits {
        Some(s) => FieldSpec::binary(s)?,
        None => FieldSpec::smallest_binary(needed)?,
    };
    if field.order() < needed {
        return Err(CodeError::FieldTooSmall(format!(
            "product-matrix encoding needs {} distinct nonzero points, GF(2^{}) has {}",
            needed - 1,
            field.base_degree(),
            field.order() - 1
        )));
    }
    Ok(field)
}

impl EncodingMatrix {
    /// `psi^t = [[I_k, 0], C]` with `C` the `(n-k) x d` Cauchy matrix on
    /// x-points `1..=n-k` and y-points `n-k+1..=n-k+d`.
    pub fn systematic(field: &FieldSpec, n: usize, k: usize, d: usize) -> Result<Self, CodeError> {
        let needed = (n - k + d + 1) as u64;
        if field.order() < needed {
            return Err(CodeError::FieldTooSmall(format!("{field:?} cannot hold {} Cauchy points", needed - 1)));
        }
        let x: Vec<FieldElem> = (1..=(n - k) as u64).map(FieldElem).collect();
        let y: Vec<FieldElem> = ((n - k + 1) as u64..=(n - k + d) as u64).map(FieldElem).collect();
        let cauchy = Mat::cauchy(field, &x, &y)?;
        let psi_t = Mat::from_fn(field, n, d, |i, c| {
            if i < k {
                if i == c {
                    FieldElem::ONE
                } else {
                    FieldElem::ZERO
                }
            } else {
                cauchy.get(i - k, c)
            }
        });
        Ok(EncodingMatrix { psi: psi_t.transpose(), k, cauchy_x: x, cauchy_y: y })
    }

    /// Wraps an explicit `psi` after checking the independence conditions
    /// (exhaustively for `n <= 12`).
    pub fn from_psi(psi: Mat, k: usize) -> Result<Self, CodeError> {
        let enc = EncodingMatrix { psi, k, cauchy_x: Vec::new(), cauchy_y: Vec::new() };
        enc.validate()?;
        Ok(enc)
    }

    pub fn validate(&self) -> Result<(), CodeError> {
        let (d, n) = (self.psi.rows(), self.psi.cols());
        if n > 12 {
            return Ok(());
        }
        for cols in (0..n).combinations(d) {
            if !self.psi.select_cols(&cols).is_invertible() {
                return Err(CodeError::Invalid(format!("psi columns {cols:?} are dependent")));
            }
        }
        let phi_rows: Vec<usize> = (0..self.k).collect();
        for nodes in (0..n).combinations(self.k) {
            if !self.psi.submatrix(&phi_rows, &nodes).is_invertible() {
                return Err(CodeError::Invalid(format!("phi_PM rows {nodes:?} are dependent")));
            }
        }
        Ok(())
    }

    pub fn psi(&self) -> &Mat {
        &self.psi
    }

    pub fn d(&self) -> usize {
        self.psi.rows()
    }

    pub fn n(&self) -> usize {
        self.psi.cols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn column(&self, i: usize) -> Vec<FieldElem> {
        self.psi.col(i)
    }

    pub fn cauchy_points(&self) -> (&[FieldElem], &[FieldElem]) {
        (&self.cauchy_x, &self.cauchy_y)
    }

    /// `[psi_i for i in nodes]` as a `d x |nodes|` matrix.
    pub fn columns(&self, nodes: &[usize]) -> Mat {
        self.psi.select_cols(nodes)
    }
}

/// `n_i = M psi_i` for every node.
pub fn pm_encode(m: &MessageMatrix, psi: &EncodingMatrix) -> Result<Vec<Vec<FieldElem>>, CodeError> {
    let prod = m.matrix().mul(psi.psi())?;
    Ok((0..psi.n()).map(|i| prod.col(i)).collect())
}

/// Helper `i` sends `psi_j^t n_i`; `i` is immaterial for the coefficients.
pub fn pm_repair_vector(_helper: usize, failed: usize, psi: &EncodingMatrix) -> Vec<FieldElem> {
    psi.column(failed)
}

/// Solves `psi_D^t (M psi_j) = packets` for `M psi_j`.
pub fn pm_repair(psi: &EncodingMatrix, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
    let helpers: Vec<usize> = packets.iter().map(|p| p.helper).collect();
    let values: Vec<FieldElem> = packets.iter().map(|p| p.value).collect();
    psi.columns(&helpers)
        .transpose()
        .solve_vec(&values)
        .map_err(|e| CodeError::Decode(format!("helper system singular: {e}")))
}

/// Recovers the message matrix from `M psi_i` of `k` nodes: `T` first from
/// the columns that `S` does not touch, then `S`.
pub fn recover_message_matrix(
    psi: &EncodingMatrix,
    nodes: &[(usize, Vec<FieldElem>)],
) -> Result<MessageMatrix, CodeError> {
    let (k, d) = (psi.k(), psi.d());
    if nodes.len() != k {
        return Err(CodeError::Length { expected: k, got: nodes.len() });
    }
    let field = psi.psi().field().clone();
    let ids: Vec<usize> = nodes.iter().map(|(i, _)| *i).collect();
    // Y = Psi_K M, row r is (M psi_{K_r})^t by symmetry.
    let y = Mat::from_fn(&field, k, d, |r, c| nodes[r].1[c]);
    let psi_k = psi.columns(&ids).transpose();
    let left: Vec<usize> = (0..k).collect();
    let right: Vec<usize> = (k..d).collect();
    let rows: Vec<usize> = (0..k).collect();
    let phi_k = psi_k.select_cols(&left);
    let delta_k = psi_k.select_cols(&right);
    let singular = |e| CodeError::Decode(format!("phi_K singular for nodes {ids:?}: {e}"));
    let t = phi_k.solve(&y.submatrix(&rows, &right)).map_err(singular)?;
    let y_left = y.submatrix(&rows, &left);
    let interference = if d > k { delta_k.mul(&t.transpose())? } else { Mat::zeros(&field, k, k) };
    let s = phi_k.solve(&y_left.add(&interference)?).map_err(singular)?;
    let m = Mat::from_fn(&field, d, d, |a, b| match (a < k, b < k) {
        (true, true) => s.get(a, b),
        (true, false) => t.get(a, b - k),
        (false, true) => t.get(b, a - k),
        (false, false) => FieldElem::ZERO,
    });
    MessageMatrix::from_matrix(m, k).map_err(|e| CodeError::Decode(format!("recovered matrix malformed: {e}")))
}

pub fn pm_collect(psi: &EncodingMatrix, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
    let (k, d) = (psi.k(), psi.d());
    if nodes.iter().all(|(i, _)| *i < k) && nodes.len() == k {
        // systematic nodes expose rows 0..k of M directly
        let mut out = vec![FieldElem::ZERO; message_layout(k, d).len()];
        let row_of: std::collections::HashMap<usize, &[FieldElem]> = nodes.iter().copied().collect();
        for (slot, (a, b)) in message_layout(k, d).into_iter().enumerate() {
            out[slot] = row_of[&a][b];
        }
        return Ok(out);
    }
    let owned: Vec<(usize, Vec<FieldElem>)> = nodes.iter().map(|(i, c)| (*i, c.to_vec())).collect();
    Ok(recover_message_matrix(psi, &owned)?.to_message())
}

struct PmDecoder {
    psi: EncodingMatrix,
}

impl Reconstruct for PmDecoder {
    fn repair(&self, _failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
        pm_repair(&self.psi, packets)
    }

    fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
        pm_collect(&self.psi, nodes)
    }
}

pub(crate) fn psi_aux(psi: &EncodingMatrix) -> Vec<Vec<u64>> {
    (0..psi.n()).map(|i| psi.column(i).into_iter().map(FieldElem::raw).collect()).collect()
}

/// Systematic product-matrix MBR code over the smallest admissible field.
pub fn build(n: usize, k: usize, d: usize, field_bits: Option<u32>) -> Result<CodeInstance, CodeError> {
    let params = MbrParams::new(n, k, d)?;
    let field = pm_field(n, k, d, field_bits)?;
    let psi = EncodingMatrix::systematic(&field, n, k, d)?;
    psi.validate()?;
    let blocks = generator_from_encoder(&field, &params, |msg| {
        pm_encode(&MessageMatrix::build(&field, msg, k, d)?, &psi)
    })?;
    let repair = (0..n)
        .cartesian_product(0..n)
        .map(|(i, j)| (i != j).then(|| pm_repair_vector(i, j, &psi)))
        .collect();
    let (x, y) = psi.cauchy_points();
    let aux = SchemeAux {
        columns: Some(psi_aux(&psi)),
        cauchy_x: Some(x.iter().map(|e| e.raw()).collect()),
        cauchy_y: Some(y.iter().map(|e| e.raw()).collect()),
        ..SchemeAux::default()
    };
    CodeInstance::new(params, field, Scheme::Pm, blocks, repair, aux, Arc::new(PmDecoder { psi }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbr::{asymmetric_packets, verify_dc_all, verify_repair_all, LinearDecoder, VerifyOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn syms(v: &[u64]) -> Vec<FieldElem> {
        v.iter().map(|&x| FieldElem(x)).collect()
    }

    #[test]
    fn message_matrix_matches_display_layout() {
        let f = FieldSpec::binary(3).unwrap();
        let mm = MessageMatrix::build(&f, &syms(&[1, 2, 3, 4, 5]), 2, 3).unwrap();
        let expect = Mat::from_rows(&f, &[syms(&[1, 2, 3]), syms(&[2, 4, 5]), syms(&[3, 5, 0])]).unwrap();
        assert_eq!(mm.matrix(), &expect);
        assert_eq!(mm.to_message(), syms(&[1, 2, 3, 4, 5]));
        let zero = MessageMatrix::build(&f, &[FieldElem::ZERO; 5], 2, 3).unwrap();
        assert!(zero.matrix().is_zero());
        // k = d: T is empty and the upper triangle fixes everything
        let full = MessageMatrix::build(&f, &syms(&[1, 2, 3]), 2, 2).unwrap();
        assert_eq!(full.matrix(), &Mat::from_rows(&f, &[syms(&[1, 2]), syms(&[2, 3])]).unwrap());
    }

    #[test]
    fn from_matrix_rejects_bad_structure() {
        let f = FieldSpec::binary(2).unwrap();
        let asym = Mat::from_rows(&f, &[syms(&[1, 2]), syms(&[3, 0])]).unwrap();
        assert!(MessageMatrix::from_matrix(asym, 1).is_err());
        let corner = Mat::from_rows(&f, &[syms(&[1, 2]), syms(&[2, 1])]).unwrap();
        assert!(MessageMatrix::from_matrix(corner, 1).is_err());
    }

    #[test]
    fn systematic_nodes_and_oracle_product() {
        let f = pm_field(4, 2, 3, None).unwrap();
        let psi = EncodingMatrix::systematic(&f, 4, 2, 3).unwrap();
        assert_eq!(psi.column(0), syms(&[1, 0, 0]));
        assert_eq!(psi.column(1), syms(&[0, 1, 0]));
        let mm = MessageMatrix::build(&f, &syms(&[1, 2, 3, 4, 5]), 2, 3).unwrap();
        let nodes = pm_encode(&mm, &psi).unwrap();
        assert_eq!(nodes[0], mm.column(0));
        for (i, node) in nodes.iter().enumerate() {
            // independent oracle: explicit sum over rows
            let col = psi.column(i);
            let want: Vec<FieldElem> = (0..3)
                .map(|a| (0..3).fold(FieldElem::ZERO, |acc, b| f.add(acc, f.mul(mm.matrix().get(a, b), col[b]))))
                .collect();
            assert_eq!(node, &want);
        }
        let zero = MessageMatrix::build(&f, &[FieldElem::ZERO; 5], 2, 3).unwrap();
        assert!(pm_encode(&zero, &psi).unwrap().iter().flatten().all(|e| e.is_zero()));
    }

    #[test]
    fn packets_are_symmetric() {
        let inst = build(6, 3, 4, None).unwrap();
        assert!(asymmetric_packets(&inst).is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = crate::mbr::random_message(inst.field(), inst.params().b, &mut rng);
        let shards = inst.encode(&f).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    continue;
                }
                let a = inst.repair_packet(i, j, &shards[i]).unwrap().value;
                let b = inst.repair_packet(j, i, &shards[j]).unwrap().value;
                assert_eq!(a, b);
            }
        }
        // helper e_0 sends the first coordinate of the failed node
        let p = inst.repair_packet(0, 4, &shards[0]).unwrap().value;
        assert_eq!(p, shards[4][0]);
    }

    #[test]
    fn exhaustive_small() {
        let inst = build(5, 2, 3, None).unwrap();
        let opts = VerifyOptions::default();
        let rep = verify_repair_all(&inst, &opts);
        assert_eq!(rep.checked, 5 * 4);
        assert!(rep.all_passed(), "{rep:?}");
        let dc = verify_dc_all(&inst, &opts);
        assert_eq!(dc.checked, 10);
        assert!(dc.all_passed(), "{dc:?}");
    }

    #[test]
    fn collect_matches_full_linear_solve() {
        for (n, k, d) in [(5, 2, 3), (6, 3, 4), (7, 3, 3), (8, 2, 5)] {
            let inst = build(n, k, d, None).unwrap();
            let oracle = LinearDecoder::for_instance(&inst);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let f = crate::mbr::random_message(inst.field(), inst.params().b, &mut rng);
            let shards = inst.encode(&f).unwrap();
            for set in (0..n).combinations(k) {
                let view: Vec<(usize, &[FieldElem])> = set.iter().map(|&i| (i, shards[i].as_slice())).collect();
                assert_eq!(inst.collect(&view).unwrap(), f);
                assert_eq!(oracle.collect(&view).unwrap(), f);
            }
        }
    }

    #[test]
    fn field_override_checked() {
        assert!(matches!(pm_field(8, 2, 5, Some(3)), Err(CodeError::FieldTooSmall(_))));
        assert_eq!(pm_field(8, 2, 5, Some(5)).unwrap().base_degree(), 5);
    }
}
