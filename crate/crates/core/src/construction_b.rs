//! Product-matrix MBR with per-node invertible transforms.
//!
//! Node `i` stores `chi(i)^t M psi_i` where `chi(i)` collects `psi_l` for
//! `l in 0..=d, l != i` in ascending order (`chi(i) = chi(d)` past the core).
//! Within the first `d + 1` nodes every repair packet is then a stored
//! symbol. A precoder `M_i = Lambda(i)^{-t} M'_i` on the first `k` columns
//! makes those nodes systematic.

use std::sync::Arc;

use itertools::Itertools;

use crate::galois::{FieldElem, FieldSpec};
use crate::matrix::Mat;
use crate::mbr::{generator_from_encoder, CodeError, CodeInstance, MbrParams, Reconstruct, RepairPacket, Scheme, SchemeAux};
use crate::pm::{message_layout, pm_field, psi_aux, recover_message_matrix, EncodingMatrix, MessageMatrix};

/// `chi(i)` for `i <= d`; callers map later nodes to `d`.
pub fn chi(psi: &EncodingMatrix, i: usize) -> Mat {
    let d = psi.d();
    let cols: Vec<usize> = (0..=d).filter(|&l| l != i.min(d)).collect();
    psi.columns(&cols)
}

/// `Lambda(i)`: identity columns `psi_j` with column `i` replaced by `psi_d`.
pub fn lambda(psi: &EncodingMatrix, i: usize) -> Mat {
    let d = psi.d();
    let cols: Vec<usize> = (0..d).map(|j| if j == i { d } else { j }).collect();
    psi.columns(&cols)
}

struct Transforms {
    psi: EncodingMatrix,
    /// `chi(min(i, d))` per node.
    chi: Vec<Mat>,
    /// `chi(i)^{-1}`, indexed like `chi`.
    chi_inv: Vec<Mat>,
    /// `Lambda(i)` for `i < k`.
    lambda: Vec<Mat>,
}

impl Transforms {
    fn new(psi: EncodingMatrix) -> Result<Self, CodeError> {
        let (n, d, k) = (psi.n(), psi.d(), psi.k());
        let chi_core: Vec<Mat> = (0..=d.min(n - 1)).map(|i| chi(&psi, i)).collect();
        let chi_inv_core = chi_core
            .iter()
            .enumerate()
            .map(|(i, c)| c.inverse().map_err(|_| CodeError::Invalid(format!("chi({i}) is singular"))))
            .collect::<Result<Vec<_>, _>>()?;
        let lambda = (0..k)
            .map(|i| {
                let l = lambda(&psi, i);
                if l.is_invertible() {
                    Ok(l)
                } else {
                    Err(CodeError::Invalid(format!("Lambda({i}) is singular")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let pick = |i: usize| i.min(d);
        Ok(Transforms {
            chi: (0..n).map(|i| chi_core[pick(i)].clone()).collect(),
            chi_inv: (0..n).map(|i| chi_inv_core[pick(i)].clone()).collect(),
            lambda,
            psi,
        })
    }

    /// `M_i = Lambda(i)^{-t} M'_i` for `i < k`, completed symmetrically.
    fn precode(&self, m_prime: &MessageMatrix) -> Result<MessageMatrix, CodeError> {
        let (k, d) = (self.psi.k(), self.psi.d());
        let field = self.psi.psi().field().clone();
        let cols = (0..k)
            .map(|i| self.lambda[i].transpose().solve_vec(&m_prime.column(i)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut m = Mat::zeros(&field, d, d);
        for (i, col) in cols.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                if r < k && r < i && m.get(r, i) != v {
                    return Err(CodeError::Invalid(format!("precoder disagrees on entry ({r},{i})")));
                }
                m.set(r, i, v);
                m.set(i, r, v);
            }
        }
        MessageMatrix::from_matrix(m, k)
    }

    fn unprecode(&self, m: &MessageMatrix) -> Result<Vec<FieldElem>, CodeError> {
        let (k, d) = (self.psi.k(), self.psi.d());
        let cols = (0..k)
            .map(|i| self.lambda[i].tmul_vec(&m.column(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(message_layout(k, d).into_iter().map(|(a, b)| cols[a][b]).collect())
    }

    fn encode(&self, m: &MessageMatrix) -> Result<Vec<Vec<FieldElem>>, CodeError> {
        (0..self.psi.n())
            .map(|i| {
                let y = m.matrix().mul_vec(&self.psi.column(i))?;
                Ok(self.chi[i].tmul_vec(&y)?)
            })
            .collect()
    }

    fn repair_vector(&self, helper: usize, failed: usize) -> Vec<FieldElem> {
        self.chi_inv[helper].mul_vec(&self.psi.column(failed)).expect("shape")
    }

    /// Reads `M'` straight off nodes `0..k`: slot `s` of node `i` is
    /// `psi_l^t M_i` for the `l`-th column of `chi(i)`, which is `M'[l][i]`
    /// except for `l = d`, which carries `M'[i][i]`.
    fn readoff(&self, nodes: &[(usize, &[FieldElem])]) -> Vec<FieldElem> {
        let (k, d) = (self.psi.k(), self.psi.d());
        let mut by_node = vec![&[][..]; k];
        for &(i, c) in nodes {
            by_node[i] = c;
        }
        let entry = |a: usize, b: usize| {
            // column a of M', row b
            let slot = if b == a { d - 1 } else if b < a { b } else { b - 1 };
            by_node[a][slot]
        };
        message_layout(k, d).into_iter().map(|(a, b)| entry(a, b)).collect()
    }
}

struct ConsBDecoder {
    t: Transforms,
}

impl Reconstruct for ConsBDecoder {
    fn repair(&self, failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
        let y = crate::pm::pm_repair(&self.t.psi, packets)?;
        Ok(self.t.chi[failed].tmul_vec(&y)?)
    }

    fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
        let k = self.t.psi.k();
        let mut ids: Vec<usize> = nodes.iter().map(|(i, _)| *i).collect();
        ids.sort_unstable();
        if ids == (0..k).collect::<Vec<_>>() {
            return Ok(self.t.readoff(nodes));
        }
        let lifted = nodes
            .iter()
            .map(|&(i, c)| {
                let y = self.t.chi[i]
                    .transpose()
                    .solve_vec(c)
                    .map_err(|e| CodeError::Decode(format!("chi({i}) singular: {e}")))?;
                Ok((i, y))
            })
            .collect::<Result<Vec<_>, CodeError>>()?;
        let m = recover_message_matrix(&self.t.psi, &lifted)?;
        self.t.unprecode(&m)
    }
}

pub fn build(n: usize, k: usize, d: usize, field_bits: Option<u32>) -> Result<CodeInstance, CodeError> {
    let params = MbrParams::new(n, k, d)?;
    let field: FieldSpec = pm_field(n, k, d, field_bits)?;
    let psi = EncodingMatrix::systematic(&field, n, k, d)?;
    psi.validate()?;
    let t = Transforms::new(psi)?;
    let blocks = generator_from_encoder(&field, &params, |msg| {
        let m_prime = MessageMatrix::build(&field, msg, k, d)?;
        t.encode(&t.precode(&m_prime)?)
    })?;
    let repair = (0..n)
        .cartesian_product(0..n)
        .map(|(i, j)| (i != j).then(|| t.repair_vector(i, j)))
        .collect();
    let (x, y) = t.psi.cauchy_points();
    let aux = SchemeAux {
        columns: Some(psi_aux(&t.psi)),
        cauchy_x: Some(x.iter().map(|e| e.raw()).collect()),
        cauchy_y: Some(y.iter().map(|e| e.raw()).collect()),
        ..SchemeAux::default()
    };
    CodeInstance::new(params, field, Scheme::ConsB, blocks, repair, aux, Arc::new(ConsBDecoder { t }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbr::{
        hbt_for_all_helper_sets, random_message, replication_histogram, standard_basis_index, symbol_groups,
        update_complexity, verify_dc_all, verify_repair_all, VerifyOptions,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn syms(v: &[u64]) -> Vec<FieldElem> {
        v.iter().map(|&x| FieldElem(x)).collect()
    }

    #[test]
    fn example_shards() {
        let inst = build(4, 2, 3, None).unwrap();
        let m = syms(&[1, 2, 3, 4, 5]);
        let shards = inst.encode(&m).unwrap();
        assert_eq!(shards[0], syms(&[2, 3, 1]));
        assert_eq!(shards[1], syms(&[2, 5, 4]));
        let zero = inst.encode(&[FieldElem::ZERO; 5]).unwrap();
        assert!(zero.iter().flatten().all(|e| e.is_zero()));
    }

    #[test]
    fn precoder_matches_lambda_solve() {
        let f = pm_field(5, 2, 3, None).unwrap();
        let psi = EncodingMatrix::systematic(&f, 5, 2, 3).unwrap();
        let t = Transforms::new(psi.clone()).unwrap();
        let mp = MessageMatrix::build(&f, &syms(&[1, 2, 3, 4, 5]), 2, 3).unwrap();
        let m = t.precode(&mp).unwrap();
        for (i, col) in [syms(&[1, 2, 3]), syms(&[2, 4, 5])].iter().enumerate() {
            let want = lambda(&psi, i).transpose().inverse().unwrap().mul_vec(col).unwrap();
            assert_eq!(m.column(i), want);
        }
        let zero = MessageMatrix::build(&f, &[FieldElem::ZERO; 5], 2, 3).unwrap();
        assert!(t.precode(&zero).unwrap().matrix().is_zero());
    }

    #[test]
    fn precoder_consistent_random() {
        let f = pm_field(7, 3, 4, None).unwrap();
        let psi = EncodingMatrix::systematic(&f, 7, 3, 4).unwrap();
        let t = Transforms::new(psi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let msg = random_message(&f, 9, &mut rng);
            let mp = MessageMatrix::build(&f, &msg, 3, 4).unwrap();
            let m = t.precode(&mp).unwrap();
            assert_eq!(t.unprecode(&m).unwrap(), msg);
        }
    }

    #[test]
    fn core_is_rbt() {
        let inst = build(6, 3, 4, None).unwrap();
        for j in 0..=4 {
            for i in (0..=4).filter(|&i| i != j) {
                assert!(standard_basis_index(inst.repair_vector(i, j)).is_some());
            }
        }
        for j in 0..4 {
            assert!(hbt_for_all_helper_sets(&inst, j));
        }
        // each core pair value appears in exactly two core nodes
        let core_pairs = symbol_groups(&inst).into_iter().filter(|(_, nodes)| nodes.iter().all(|&x| x <= 4));
        assert_eq!(core_pairs.filter(|(_, nodes)| nodes.len() == 2).count(), 10);
    }

    #[test]
    fn exhaustive_small() {
        let inst = build(5, 2, 3, None).unwrap();
        let opts = VerifyOptions::default();
        assert!(verify_repair_all(&inst, &opts).all_passed());
        let dc = verify_dc_all(&inst, &opts);
        assert!(dc.all_passed(), "{dc:?}");
    }

    #[test]
    fn d_equal_n_minus_one_supported() {
        let inst = build(5, 2, 4, None).unwrap();
        assert_eq!(replication_histogram(&inst).keys().copied().collect::<Vec<_>>(), vec![2]);
        assert!(verify_dc_all(&inst, &VerifyOptions::default()).all_passed());
    }

    #[test]
    fn update_complexity_below_pm_when_k_equals_d() {
        let b = build(6, 4, 4, None).unwrap();
        let pm = crate::pm::build(6, 4, 4, None).unwrap();
        let ub = update_complexity(&b).unwrap();
        let up = update_complexity(&pm).unwrap();
        assert!(ub.iter().zip(&up).all(|(x, y)| x <= y), "{ub:?} vs {up:?}");
        assert!(ub.iter().sum::<usize>() < up.iter().sum::<usize>());
    }
}
