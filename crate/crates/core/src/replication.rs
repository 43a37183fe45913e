//! Double replication of every symbol by substituting pairwise repair data.
//!
//! Given a linear MBR base code and a simple `d`-regular graph, each edge
//! `{i, j}` gets the base code's repair functional between `i` and `j`, which
//! is stored at both endpoints. A node's new content is its incident shared
//! symbols; they span the same subspace as the original content, so the
//! result is again MBR.

use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;

use crate::construction_a::{self, ConsAOptions};
use crate::galois::FieldElem;
use crate::matrix::Mat;
use crate::mbr::{CodeError, CodeInstance, LinearDecoder, Scheme, SchemeAux};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        SimpleGraph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, CodeError> {
        let mut g = SimpleGraph::empty(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<(), CodeError> {
        let n = self.n();
        if a >= n || b >= n {
            return Err(CodeError::InvalidParams(format!("edge ({a},{b}) outside {n} vertices")));
        }
        if a == b {
            return Err(CodeError::InvalidParams(format!("self-loop at vertex {a}")));
        }
        if !self.adj[a].insert(b) {
            return Err(CodeError::InvalidParams(format!("duplicate edge ({a},{b})")));
        }
        self.adj[b].insert(a);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adj.iter().all(|s| s.len() == d)
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n()).flat_map(|a| self.adj[a].range(a + 1..).map(move |&b| (a, b))).collect()
    }

    fn union(&self, other: &SimpleGraph) -> Result<SimpleGraph, CodeError> {
        let mut g = self.clone();
        for (a, b) in other.edges() {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Relabels vertex `v` to `offset + v` inside a graph on `n` vertices.
    fn shifted(&self, offset: usize, n: usize) -> SimpleGraph {
        let mut g = SimpleGraph::empty(n);
        for (a, b) in self.edges() {
            g.add_edge(a + offset, b + offset).expect("shifted edges stay simple");
        }
        g
    }
}

/// Circulant `d`-regular graph: offsets `+-1..+-floor(d/2)`, plus `n/2`
/// when `d` is odd.
pub fn regular_graph(n: usize, d: usize) -> Result<SimpleGraph, CodeError> {
    if d >= n {
        return Err(CodeError::InvalidParams(format!("degree {d} needs more than {n} vertices")));
    }
    if (n * d) % 2 == 1 {
        return Err(CodeError::Unsupported(format!(
            "no {d}-regular graph on {n} vertices: nd odd; use near-replicate"
        )));
    }
    let mut g = SimpleGraph::empty(n);
    for v in 0..n {
        for off in 1..=d / 2 {
            let w = (v + off) % n;
            if !g.has_edge(v, w) {
                g.add_edge(v, w)?;
            }
        }
        if d % 2 == 1 && v < n / 2 {
            g.add_edge(v, v + n / 2)?;
        }
    }
    debug_assert!(g.is_regular(d));
    Ok(g)
}

pub fn complete_graph(n: usize) -> SimpleGraph {
    let edges: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    SimpleGraph::from_edges(n, &edges).expect("complete graph is simple")
}

/// Disjoint cliques `K_{d+1}` on consecutive vertex groups.
pub fn clique_union(n: usize, d: usize) -> Result<SimpleGraph, CodeError> {
    if !n.is_multiple_of(d + 1) {
        return Err(CodeError::Unsupported(format!("concat-rbt requires (d+1) | n (got n={n}, d={d})")));
    }
    let clique = complete_graph(d + 1);
    (0..n / (d + 1)).try_fold(SimpleGraph::empty(n), |g, group| g.union(&clique.shifted(group * (d + 1), n)))
}

/// `K_{d+1}` on the first `d + 1` vertices and a circulant on the rest;
/// keeps an existing repair-by-transfer core intact.
pub fn core_embedded_graph(n: usize, d: usize) -> Result<SimpleGraph, CodeError> {
    if n < 2 * (d + 1) {
        return Err(CodeError::Unsupported(format!(
            "core-embedded graph requires n >= 2(d+1) (got n={n}, d={d})"
        )));
    }
    let rest = regular_graph(n - d - 1, d)?;
    complete_graph(d + 1).shifted(0, n).union(&rest.shifted(d + 1, n))
}

/// Extra non-shared symbol for a vertex left one short of degree `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unpaired {
    pub node: usize,
    pub source: usize,
}

/// Shared functional on edge `{a, b}`: the base packet sent from the lower
/// endpoint to the higher one.
fn edge_functional(base: &CodeInstance, a: usize, b: usize) -> Vec<FieldElem> {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    base.packet_functional(lo, hi)
}

/// Places functionals into `alpha` slots: one equal to an original column
/// keeps that slot, the rest fill the free slots in order.
fn arrange(original: &Mat, functionals: Vec<Vec<FieldElem>>) -> Vec<Vec<FieldElem>> {
    let alpha = original.cols();
    let mut slots: Vec<Option<Vec<FieldElem>>> = vec![None; alpha];
    let mut rest = Vec::new();
    for f in functionals {
        match (0..alpha).find(|&c| slots[c].is_none() && original.col(c) == f) {
            Some(c) => slots[c] = Some(f),
            None => rest.push(f),
        }
    }
    let mut rest = rest.into_iter();
    slots.into_iter().map(|s| s.unwrap_or_else(|| rest.next().expect("alpha functionals"))).collect()
}

/// Substitutes node contents of `base` by shared repair data along `graph`.
pub fn transform(
    base: &CodeInstance,
    graph: &SimpleGraph,
    unpaired: Option<Unpaired>,
    scheme: Scheme,
) -> Result<CodeInstance, CodeError> {
    let params = *base.params();
    let (n, d) = (params.n, params.d);
    if graph.n() != n {
        return Err(CodeError::InvalidParams(format!("graph has {} vertices, code has {n} nodes", graph.n())));
    }
    for v in 0..n {
        let want = if unpaired.is_some_and(|u| u.node == v) { d - 1 } else { d };
        if graph.degree(v) != want {
            return Err(CodeError::InvalidParams(format!("vertex {v} has degree {}, expected {want}", graph.degree(v))));
        }
    }
    let field = base.field().clone();
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let mut fs: Vec<Vec<FieldElem>> = graph.neighbors(i).map(|j| edge_functional(base, i, j)).collect();
        if let Some(u) = unpaired.filter(|u| u.node == i) {
            if graph.has_edge(u.source, i) || u.source == i {
                return Err(CodeError::InvalidParams(format!("unpaired source {} must not be adjacent to {i}", u.source)));
            }
            fs.push(base.packet_functional(u.source, i));
        }
        let block = Mat::from_cols(&field, &arrange(base.block(i), fs))?;
        // substituted columns must span the original node subspace
        let joint = Mat::hstack(&[base.block(i), &block])?;
        if block.rank() != params.alpha || joint.rank() != params.alpha {
            return Err(CodeError::Invalid(format!("substituted content of node {i} does not span its subspace")));
        }
        blocks.push(block);
    }

    let mut repair = Vec::with_capacity(n * n);
    for (i, j) in (0..n).cartesian_product(0..n) {
        if i == j {
            repair.push(None);
            continue;
        }
        let g = if graph.has_edge(i, j) { edge_functional(base, i, j) } else { base.packet_functional(i, j) };
        // express the functional over the new content of the helper
        let r = match blocks[i].solve_vec(&g) {
            Ok(r) => r,
            Err(e) => return Err(CodeError::Invalid(format!("packet {i}->{j} outside helper subspace: {e}"))),
        };
        repair.push(Some(r));
    }

    let aux = SchemeAux {
        graph: Some(graph.edges().into_iter().map(|(a, b)| (a + 1, b + 1)).collect()),
        base_scheme: Some(base.scheme()),
        unpaired: unpaired.map(|u| (u.source + 1, u.node + 1)),
        ..base.aux().clone()
    };
    let decoder = LinearDecoder::new(field.clone(), params, blocks.clone(), repair.clone());
    CodeInstance::new(params, field, scheme, blocks, repair, aux, Arc::new(decoder))
}

pub fn transform_replicate(base: &CodeInstance, graph: &SimpleGraph) -> Result<CodeInstance, CodeError> {
    transform(base, graph, None, Scheme::Replicate)
}

/// Concatenation of `n / (d+1)` repair-by-transfer groups over a
/// construction-A base.
pub fn concatenated_rbt(n: usize, k: usize, d: usize, opts: &ConsAOptions) -> Result<CodeInstance, CodeError> {
    let graph = clique_union(n, d)?;
    let base = construction_a::build(n, k, d, opts)?;
    transform(&base, &graph, None, Scheme::ConcatRbt)
}

/// Graph for odd `nd`: a `(d-1)`-regular circulant plus a matching on
/// vertices `0..n-1`, leaving vertex `n-1` one short.
pub fn near_regular_graph(n: usize, d: usize) -> Result<(SimpleGraph, Unpaired), CodeError> {
    if (n * d).is_multiple_of(2) {
        return Err(CodeError::Unsupported(format!(
            "near-replicate requires nd odd (got n={n}, d={d}); use replicate"
        )));
    }
    if d >= n {
        return Err(CodeError::InvalidParams(format!("degree {d} needs more than {n} vertices")));
    }
    let mut g = regular_graph(n, d - 1)?;
    let half = (n - 1) / 2;
    for v in 0..half {
        g.add_edge(v, v + half)?;
    }
    let node = n - 1;
    let source = (0..n).find(|&v| v != node && !g.has_edge(v, node)).ok_or_else(|| {
        CodeError::Invalid(format!("vertex {node} is adjacent to every other vertex"))
    })?;
    Ok((g, Unpaired { node, source }))
}

pub fn near_replicate(base: &CodeInstance) -> Result<CodeInstance, CodeError> {
    let (n, d) = (base.params().n, base.params().d);
    let (g, u) = near_regular_graph(n, d)?;
    transform(base, &g, Some(u), Scheme::NearReplicate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbr::{
        every_d_subset_spans, intersection_dim, replication_histogram, repair_subspace_violations, verify_dc_all,
        verify_hbt, verify_repair_all, VerifyOptions,
    };
    use std::collections::BTreeMap;

    fn e(v: u64) -> FieldElem {
        FieldElem(v)
    }

    #[test]
    fn circulant_examples() {
        let c6 = regular_graph(6, 2).unwrap();
        assert_eq!(c6.edges(), vec![(0, 1), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5)]);
        assert_eq!(regular_graph(4, 3).unwrap(), complete_graph(4));
        assert!(matches!(regular_graph(5, 3), Err(CodeError::Unsupported(_))));
        for n in 3..14 {
            for d in 1..n {
                if n * d % 2 == 0 {
                    assert!(regular_graph(n, d).unwrap().is_regular(d), "n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn simple_graph_rejects_loops_and_duplicates() {
        assert!(SimpleGraph::from_edges(3, &[(0, 0)]).is_err());
        assert!(SimpleGraph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(SimpleGraph::from_edges(3, &[(0, 3)]).is_err());
    }

    fn word(inst: &CodeInstance, node: usize, slot: usize) -> Vec<FieldElem> {
        inst.block(node).col(slot)
    }

    #[test]
    fn concatenated_rbt_example() {
        let inst = concatenated_rbt(6, 2, 2, &ConsAOptions::default()).unwrap();
        assert_eq!(inst.aux().graph.as_ref().unwrap(), &vec![(1, 2), (1, 3), (2, 3), (4, 5), (4, 6), (5, 6)]);
        // coefficient vectors over (m1, m2, m3)
        assert_eq!(word(&inst, 3, 0), vec![e(1), e(3), e(2)]);
        assert_eq!(word(&inst, 3, 1), vec![e(1), e(2), e(3)]);
        assert_eq!(word(&inst, 5, 0), vec![e(1), e(2), e(3)]);
        assert_eq!(word(&inst, 5, 1), vec![e(1), e(1), e(1)]);
        // first group unchanged
        let base = construction_a::build(6, 2, 2, &ConsAOptions::default()).unwrap();
        for i in 0..3 {
            assert_eq!(inst.block(i), base.block(i));
        }
        assert_eq!(replication_histogram(&inst), BTreeMap::from([(2, 6)]));
        let opts = VerifyOptions::default();
        assert!(verify_repair_all(&inst, &opts).all_passed());
        assert!(verify_dc_all(&inst, &opts).all_passed());
        // in-group repair is pure transfer
        assert!(verify_hbt(&inst, 4, &[3, 5]));
        assert!(crate::mbr::repair_is_transfer(&inst, 4, &[3, 5]).unwrap());
        assert!(matches!(concatenated_rbt(7, 2, 2, &ConsAOptions::default()), Err(CodeError::Unsupported(_))));
    }

    #[test]
    fn replicate_over_pm() {
        for (n, k, d) in [(6, 2, 3), (7, 3, 4), (8, 2, 3)] {
            let base = crate::pm::build(n, k, d, None).unwrap();
            let g = regular_graph(n, d).unwrap();
            let inst = transform_replicate(&base, &g).unwrap();
            assert_eq!(inst.params(), base.params());
            assert_eq!(replication_histogram(&inst), BTreeMap::from([(2, n * d / 2)]));
            assert!(repair_subspace_violations(&inst).is_empty());
            assert!(every_d_subset_spans(&inst));
            let opts = VerifyOptions { messages: 5, ..VerifyOptions::default() };
            assert!(verify_repair_all(&inst, &opts).all_passed());
            assert!(verify_dc_all(&inst, &opts).all_passed());
        }
    }

    #[test]
    fn pairwise_intersections_are_one_dimensional() {
        let base = crate::pm::build(6, 2, 3, None).unwrap();
        for (i, j) in (0..6).tuple_combinations() {
            assert_eq!(intersection_dim(&base, i, j), 1);
        }
    }

    #[test]
    fn near_replication_histogram() {
        let base = crate::pm::build(5, 2, 3, None).unwrap();
        let inst = near_replicate(&base).unwrap();
        assert_eq!(replication_histogram(&inst), BTreeMap::from([(1, 1), (2, 7)]));
        assert_eq!(inst.aux().unpaired, Some((2, 5)));
        let opts = VerifyOptions::default();
        assert!(verify_repair_all(&inst, &opts).all_passed());
        assert!(verify_dc_all(&inst, &opts).all_passed());
        let even = crate::pm::build(6, 2, 2, None).unwrap();
        assert!(matches!(near_replicate(&even), Err(CodeError::Unsupported(_))));
    }

    #[test]
    fn core_embedded_keeps_rbt_core() {
        let base = construction_a::build(8, 2, 3, &ConsAOptions::default()).unwrap();
        let g = core_embedded_graph(8, 3).unwrap();
        let inst = transform_replicate(&base, &g).unwrap();
        for i in 0..4 {
            assert_eq!(inst.block(i), base.block(i));
        }
        assert_eq!(replication_histogram(&inst), BTreeMap::from([(2, 12)]));
        assert!(verify_dc_all(&inst, &VerifyOptions { messages: 4, ..Default::default() }).all_passed());
    }
}
