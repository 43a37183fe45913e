//! Repair-by-transfer MBR codes for `d = n - 1`.
//!
//! An outer `[C(n,2), B]` MDS code is laid on the edges of the complete graph
//! `K_n`; node `i` stores the symbols of its `n - 1` incident edges in
//! ascending neighbour order.

use std::collections::BTreeMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::galois::{FieldElem, FieldSpec};
use crate::matrix::Mat;
use crate::mbr::{CodeError, CodeInstance, MbrParams, Reconstruct, RepairPacket, Scheme, SchemeAux};

/// Canonical bijection between pairs `i < j` of `0..n` and edge positions,
/// lexicographic in `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeIndex {
    n: usize,
}

impl EdgeIndex {
    pub fn new(n: usize) -> Self {
        EdgeIndex { n }
    }

    pub fn len(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of edge `{i, j}`; order of the endpoints is irrelevant.
    pub fn position(&self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.n && j < self.n, "edge ({i},{j}) outside K_{}", self.n);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // edges starting at vertices before a, then offset inside row a
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    pub fn endpoints(&self, pos: usize) -> (usize, usize) {
        let mut rest = pos;
        for a in 0..self.n {
            let row = self.n - a - 1;
            if rest < row {
                return (a, a + 1 + rest);
            }
            rest -= row;
        }
        panic!("edge position {pos} outside K_{}", self.n)
    }

    /// Edge positions held by node `i`, ascending neighbour order.
    pub fn incident(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| j != i).map(|j| self.position(i, j)).collect()
    }

    /// Slot of edge `{i, j}` inside node `i`'s layout.
    pub fn slot(&self, i: usize, j: usize) -> usize {
        if j < i {
            j
        } else {
            j - 1
        }
    }
}

/// Systematic `[len, dim]` Reed-Solomon style code. The generator is the
/// Vandermonde matrix on points `1..=len` multiplied by the inverse of its
/// first `dim` columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterMds {
    generator: Mat,
}

impl OuterMds {
    pub fn new(field: &FieldSpec, len: usize, dim: usize) -> Result<Self, CodeError> {
        if dim > len {
            return Err(CodeError::InvalidParams(format!("MDS dimension {dim} exceeds length {len}")));
        }
        if field.order() < len as u64 + 1 {
            return Err(CodeError::FieldTooSmall(format!(
                "[{len}, {dim}] MDS code needs {len} nonzero points, GF(2^{}) has {}",
                field.base_degree(),
                field.order() - 1
            )));
        }
        let points: Vec<FieldElem> = (1..=len as u64).map(|p| field.elem(p)).collect::<Result<_, _>>()?;
        let vander = Mat::from_fn(field, dim, len, |r, c| field.pow(points[c], r as u64));
        let head: Vec<usize> = (0..dim).collect();
        let generator = vander.select_cols(&head).solve(&vander)?;
        Ok(OuterMds { generator })
    }

    pub fn generator(&self) -> &Mat {
        &self.generator
    }

    pub fn len(&self) -> usize {
        self.generator.cols()
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, msg: &[FieldElem]) -> Result<Vec<FieldElem>, CodeError> {
        Ok(self.generator.tmul_vec(msg)?)
    }

    /// Erasure decode from `(position, symbol)` pairs; at least `dim` distinct
    /// positions are needed.
    pub fn decode(&self, known: &BTreeMap<usize, FieldElem>) -> Result<Vec<FieldElem>, CodeError> {
        let dim = self.dim();
        if (0..dim).all(|p| known.contains_key(&p)) {
            return Ok((0..dim).map(|p| known[&p]).collect());
        }
        if known.len() < dim {
            return Err(CodeError::Decode(format!("{} distinct outer symbols, need {dim}", known.len())));
        }
        let cols: Vec<usize> = known.keys().copied().take(dim).collect();
        let values: Vec<FieldElem> = cols.iter().map(|p| known[p]).collect();
        self.generator
            .select_cols(&cols)
            .transpose()
            .solve_vec(&values)
            .map_err(|e| CodeError::Decode(format!("outer decode failed: {e}")))
    }
}

/// Smallest binary field with at least `C(n,2) + 1` elements.
pub fn rbt_field(n: usize, field_bits: Option<u32>) -> Result<FieldSpec, CodeError> {
    let needed = (n * (n - 1) / 2 + 1) as u64;
    let field = match field_bits {
        Some(s) => FieldSpec::binary(s)?,
        None => FieldSpec::smallest_binary(needed)?,
    };
    if field.order() < needed {
        return Err(CodeError::FieldTooSmall(format!(
            "repair-by-transfer at n={n} needs at least {needed} field elements, GF(2^{}) has {}",
            field.base_degree(),
            field.order()
        )));
    }
    Ok(field)
}

struct RbtDecoder {
    edges: EdgeIndex,
    outer: OuterMds,
}

impl Reconstruct for RbtDecoder {
    fn repair(&self, failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
        let mut out = vec![None; self.edges.n - 1];
        for p in packets {
            out[self.edges.slot(failed, p.helper)] = Some(p.value);
        }
        out.into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| CodeError::Decode(format!("missing edge packets for node {failed}")))
    }

    fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
        let mut known = BTreeMap::new();
        for &(i, content) in nodes {
            for (pos, &v) in self.edges.incident(i).into_iter().zip(content) {
                if let Some(prev) = known.insert(pos, v) {
                    if prev != v {
                        return Err(CodeError::Decode(format!("edge {pos} disagrees between collected nodes")));
                    }
                }
            }
        }
        self.outer.decode(&known)
    }
}

pub fn build(n: usize, k: usize, d: Option<usize>, field_bits: Option<u32>) -> Result<CodeInstance, CodeError> {
    let d = d.unwrap_or(n.saturating_sub(1));
    if d + 1 != n {
        return Err(CodeError::Unsupported(format!("rbt requires d = n-1 (got n={n}, d={d})")));
    }
    let params = MbrParams::new(n, k, d)?;
    let field = rbt_field(n, field_bits)?;
    let edges = EdgeIndex::new(n);
    let outer = OuterMds::new(&field, edges.len(), params.b)?;
    let blocks = (0..n).map(|i| outer.generator().select_cols(&edges.incident(i))).collect();
    let repair = (0..n)
        .cartesian_product(0..n)
        .map(|(i, j)| {
            (i != j).then(|| {
                let mut v = vec![FieldElem::ZERO; d];
                v[edges.slot(i, j)] = FieldElem::ONE;
                v
            })
        })
        .collect();
    let aux = SchemeAux {
        outer_points: Some((1..=edges.len() as u64).collect()),
        ..SchemeAux::default()
    };
    CodeInstance::new(params, field, Scheme::Rbt, blocks, repair, aux, Arc::new(RbtDecoder { edges, outer }))
}
