//! Scheme-agnostic model of a linear exact-repair MBR code with `beta = 1`.
//!
//! Every scheme produces a [`CodeInstance`]: per-node generator blocks
//! `G_i` (`B x alpha`, node content `n_i = G_i^t f`), one repair coefficient
//! vector per ordered (helper, failed) pair, and a scheme-supplied
//! [`Reconstruct`] implementation. The verifiers here treat the
//! reconstruction maps as black boxes and only check inputs against outputs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::gabidulin::GabidulinError;
use crate::galois::{FieldElem, FieldError, FieldSpec};
use crate::matrix::{Mat, MatrixError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported parameter combination: {0}")]
    Unsupported(String),
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("expected {expected} symbols, got {got}")]
    Length { expected: usize, got: usize },
    #[error("node index {0} out of range")]
    NodeIndex(usize),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Gabidulin(#[from] GabidulinError),
}

/// `(n, k, d)` at the MBR point with `beta = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MbrParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    pub b: usize,
}

impl MbrParams {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self, CodeError> {
        if k == 0 {
            return Err(CodeError::InvalidParams("k must be at least 1".into()));
        }
        if k > d {
            return Err(CodeError::InvalidParams(format!("k = {k} exceeds d = {d}")));
        }
        if d + 1 > n {
            return Err(CodeError::InvalidParams(format!("d = {d} must be at most n - 1 = {}", n.saturating_sub(1))));
        }
        let b = k * d - k * (k - 1) / 2;
        // file-size bound at the MBR point: sum_{i<k} min(alpha, d - i)
        let bound: usize = (0..k).map(|i| d.min(d - i)).sum();
        debug_assert_eq!(b, bound);
        Ok(MbrParams { n, k, d, alpha: d, beta: 1, b })
    }

    pub fn file_size_bound(&self) -> usize {
        (0..self.k).map(|i| self.alpha.min((self.d - i) * self.beta)).sum()
    }
}

/// Scheme tags as used on the command line and in manifests.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Pm,
    Rbt,
    ConsA,
    ConsB,
    ConcatRbt,
    Replicate,
    NearReplicate,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Pm,
        Scheme::Rbt,
        Scheme::ConsA,
        Scheme::ConsB,
        Scheme::ConcatRbt,
        Scheme::Replicate,
        Scheme::NearReplicate,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Pm => "pm",
            Scheme::Rbt => "rbt",
            Scheme::ConsA => "cons-a",
            Scheme::ConsB => "cons-b",
            Scheme::ConcatRbt => "concat-rbt",
            Scheme::Replicate => "replicate",
            Scheme::NearReplicate => "near-replicate",
        }
    }

    /// Coarse family: the three graph transforms are all `transformed`.
    pub fn family(self) -> &'static str {
        match self {
            Scheme::ConcatRbt | Scheme::Replicate | Scheme::NearReplicate => "transformed",
            other => other.tag(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.tag() == s)
            .ok_or_else(|| CodeError::Unsupported(format!("unknown scheme '{s}'")))
    }
}

/// One repair symbol sent from `helper` towards `failed` (0-based ids).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepairPacket {
    pub helper: usize,
    pub failed: usize,
    pub value: FieldElem,
}

/// Scheme-specific repair and data-collection maps.
pub trait Reconstruct: Send + Sync {
    /// Rebuilds node `failed` from exactly `d` packets.
    fn repair(&self, failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError>;
    /// Recovers the `B` message symbols from exactly `k` node contents.
    fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError>;
}

/// Descriptive data a scheme records about itself for manifests.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeAux {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precoder: Option<String>,
    /// Encoding columns as raw field values: `psi_i` per node, or the parity
    /// columns `phi_{d+2}..phi_n`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub columns: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cauchy_x: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cauchy_y: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<Vec<u64>>,
    /// 1-based edge list of the replication graph.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub graph: Option<Vec<(usize, usize)>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base_scheme: Option<Scheme>,
    /// `(source, node)`, 1-based: the unpaired symbol of a near-replicated code.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub unpaired: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub outer_points: Option<Vec<u64>>,
}

pub struct CodeInstance {
    params: MbrParams,
    field: FieldSpec,
    scheme: Scheme,
    blocks: Vec<Mat>,
    repair: Vec<Option<Vec<FieldElem>>>,
    aux: SchemeAux,
    decoder: Arc<dyn Reconstruct>,
}

impl fmt::Debug for CodeInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CodeInstance")
            .field("scheme", &self.scheme)
            .field("params", &self.params)
            .field("field", &self.field)
            .finish_non_exhaustive()
    }
}

impl CodeInstance {
    /// Assembles and validates an instance. `repair` is indexed
    /// `helper * n + failed` and must be `Some` off the diagonal.
    pub fn new(
        params: MbrParams,
        field: FieldSpec,
        scheme: Scheme,
        blocks: Vec<Mat>,
        repair: Vec<Option<Vec<FieldElem>>>,
        aux: SchemeAux,
        decoder: Arc<dyn Reconstruct>,
    ) -> Result<Self, CodeError> {
        let MbrParams { n, alpha, b, .. } = params;
        if blocks.len() != n {
            return Err(CodeError::Invalid(format!("{} generator blocks for {n} nodes", blocks.len())));
        }
        for (i, g) in blocks.iter().enumerate() {
            if g.rows() != b || g.cols() != alpha {
                return Err(CodeError::Invalid(format!(
                    "block {i} is {}x{}, expected {b}x{alpha}",
                    g.rows(),
                    g.cols()
                )));
            }
            if g.field() != &field {
                return Err(MatrixError::FieldMismatch.into());
            }
        }
        if repair.len() != n * n {
            return Err(CodeError::Invalid("repair table has wrong size".into()));
        }
        for i in 0..n {
            for j in 0..n {
                match (&repair[i * n + j], i == j) {
                    (Some(v), false) if v.len() == alpha => {}
                    (None, true) => {}
                    _ => return Err(CodeError::Invalid(format!("bad repair vector for pair ({i}, {j})"))),
                }
            }
        }
        let inst = CodeInstance { params, field, scheme, blocks, repair, aux, decoder };
        let rank = inst.stacked_generator().rank();
        if rank != b {
            return Err(CodeError::Invalid(format!("stacked generator has rank {rank}, expected {b}")));
        }
        Ok(inst)
    }

    pub fn params(&self) -> &MbrParams {
        &self.params
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn aux(&self) -> &SchemeAux {
        &self.aux
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Mat {
        &self.blocks[i]
    }

    pub fn decoder(&self) -> &Arc<dyn Reconstruct> {
        &self.decoder
    }

    pub fn stacked_generator(&self) -> Mat {
        let refs: Vec<&Mat> = self.blocks.iter().collect();
        Mat::hstack(&refs).expect("blocks share shape")
    }

    /// The coefficient vector `r` with packet `= r^t n_helper`.
    pub fn repair_vector(&self, helper: usize, failed: usize) -> &[FieldElem] {
        self.repair[helper * self.params.n + failed]
            .as_deref()
            .expect("no repair vector on the diagonal")
    }

    /// Message-space functional `G_helper r` of the packet.
    pub fn packet_functional(&self, helper: usize, failed: usize) -> Vec<FieldElem> {
        self.blocks[helper]
            .mul_vec(self.repair_vector(helper, failed))
            .expect("repair vector length is alpha")
    }

    fn check_node(&self, i: usize) -> Result<(), CodeError> {
        if i >= self.params.n {
            return Err(CodeError::NodeIndex(i));
        }
        Ok(())
    }

    /// `n_i = G_i^t f` for every node.
    pub fn encode(&self, f: &[FieldElem]) -> Result<Vec<Vec<FieldElem>>, CodeError> {
        if f.len() != self.params.b {
            return Err(CodeError::Length { expected: self.params.b, got: f.len() });
        }
        self.blocks.iter().map(|g| Ok(g.tmul_vec(f)?)).collect()
    }

    pub fn encode_node(&self, i: usize, f: &[FieldElem]) -> Result<Vec<FieldElem>, CodeError> {
        self.check_node(i)?;
        if f.len() != self.params.b {
            return Err(CodeError::Length { expected: self.params.b, got: f.len() });
        }
        Ok(self.blocks[i].tmul_vec(f)?)
    }

    pub fn repair_packet(&self, helper: usize, failed: usize, content: &[FieldElem]) -> Result<RepairPacket, CodeError> {
        self.check_node(helper)?;
        self.check_node(failed)?;
        if helper == failed {
            return Err(CodeError::InvalidParams("a node cannot help repair itself".into()));
        }
        let r = self.repair_vector(helper, failed);
        if content.len() != r.len() {
            return Err(CodeError::Length { expected: r.len(), got: content.len() });
        }
        let value = self.field.dot(r.iter().copied(), content.iter().copied());
        Ok(RepairPacket { helper, failed, value })
    }

    pub fn repair(&self, failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
        self.check_node(failed)?;
        if packets.len() != self.params.d {
            return Err(CodeError::Length { expected: self.params.d, got: packets.len() });
        }
        for p in packets {
            self.check_node(p.helper)?;
            if p.helper == failed || p.failed != failed {
                return Err(CodeError::InvalidParams(format!("packet from {} is not addressed to {failed}", p.helper)));
            }
        }
        if packets.iter().map(|p| p.helper).unique().count() != packets.len() {
            return Err(CodeError::InvalidParams("duplicate helper".into()));
        }
        self.decoder.repair(failed, packets)
    }

    pub fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
        if nodes.len() != self.params.k {
            return Err(CodeError::Length { expected: self.params.k, got: nodes.len() });
        }
        for &(i, content) in nodes {
            self.check_node(i)?;
            if content.len() != self.params.alpha {
                return Err(CodeError::Length { expected: self.params.alpha, got: content.len() });
            }
        }
        if nodes.iter().map(|(i, _)| *i).unique().count() != nodes.len() {
            return Err(CodeError::InvalidParams("duplicate node in collection".into()));
        }
        self.decoder.collect(nodes)
    }

    /// Replaces the generator blocks without revalidation; test-only mutation
    /// hook for checking that the verifiers actually catch broken codes.
    #[doc(hidden)]
    pub fn with_blocks_unchecked(&self, blocks: Vec<Mat>) -> CodeInstance {
        CodeInstance {
            params: self.params,
            field: self.field.clone(),
            scheme: self.scheme,
            blocks,
            repair: self.repair.clone(),
            aux: self.aux.clone(),
            decoder: Arc::clone(&self.decoder),
        }
    }
}

/// Generator blocks of a linear encoder, obtained by encoding unit messages.
pub fn generator_from_encoder<F>(field: &FieldSpec, params: &MbrParams, encode: F) -> Result<Vec<Mat>, CodeError>
where
    F: Fn(&[FieldElem]) -> Result<Vec<Vec<FieldElem>>, CodeError>,
{
    let MbrParams { n, alpha, b, .. } = *params;
    let mut blocks = vec![Mat::zeros(field, b, alpha); n];
    for t in 0..b {
        let mut unit = vec![FieldElem::ZERO; b];
        unit[t] = FieldElem::ONE;
        let nodes = encode(&unit)?;
        if nodes.len() != n || nodes.iter().any(|c| c.len() != alpha) {
            return Err(CodeError::Invalid("encoder output has wrong shape".into()));
        }
        for (i, content) in nodes.iter().enumerate() {
            for (a, &v) in content.iter().enumerate() {
                blocks[i].set(t, a, v);
            }
        }
    }
    Ok(blocks)
}

/// Reconstruction by plain linear algebra on the generator: used by the
/// graph transforms and as an oracle for the structured decoders.
pub struct LinearDecoder {
    field: FieldSpec,
    params: MbrParams,
    blocks: Arc<Vec<Mat>>,
    repair: Arc<Vec<Option<Vec<FieldElem>>>>,
}

impl LinearDecoder {
    pub fn new(field: FieldSpec, params: MbrParams, blocks: Vec<Mat>, repair: Vec<Option<Vec<FieldElem>>>) -> Self {
        LinearDecoder { field, params, blocks: Arc::new(blocks), repair: Arc::new(repair) }
    }

    pub fn for_instance(inst: &CodeInstance) -> Self {
        Self::new(inst.field.clone(), inst.params, inst.blocks.clone(), inst.repair.clone())
    }
}

impl Reconstruct for LinearDecoder {
    fn repair(&self, failed: usize, packets: &[RepairPacket]) -> Result<Vec<FieldElem>, CodeError> {
        let n = self.params.n;
        let functionals: Vec<Vec<FieldElem>> = packets
            .iter()
            .map(|p| {
                let r = self.repair[p.helper * n + failed].as_ref().ok_or(CodeError::NodeIndex(p.helper))?;
                Ok(self.blocks[p.helper].mul_vec(r)?)
            })
            .collect::<Result<_, CodeError>>()?;
        let p = Mat::from_cols(&self.field, &functionals)?;
        // P X = G_failed, then n_failed = X^t packets
        let x = p
            .solve(&self.blocks[failed])
            .map_err(|e| CodeError::Decode(format!("repair of node {failed}: {e}")))?;
        let values: Vec<FieldElem> = packets.iter().map(|p| p.value).collect();
        Ok(x.tmul_vec(&values)?)
    }

    fn collect(&self, nodes: &[(usize, &[FieldElem])]) -> Result<Vec<FieldElem>, CodeError> {
        let refs: Vec<&Mat> = nodes.iter().map(|(i, _)| &self.blocks[*i]).collect();
        let stacked = Mat::hstack(&refs)?.transpose();
        let values: Vec<FieldElem> = nodes.iter().flat_map(|(_, c)| c.iter().copied()).collect();
        stacked.solve_vec(&values).map_err(|e| CodeError::Decode(format!("collection: {e}")))
    }
}

/// Index of the single unit entry, when `v` is a standard basis vector.
pub fn standard_basis_index(v: &[FieldElem]) -> Option<usize> {
    let mut nz = v.iter().enumerate().filter(|(_, e)| !e.is_zero());
    match (nz.next(), nz.next()) {
        (Some((i, &e)), None) if e == FieldElem::ONE => Some(i),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub messages: usize,
    pub seed: u64,
    /// Exhaustive enumeration up to this many nodes; random sampling above.
    pub exhaustive_limit: usize,
    pub sample_scenarios: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { messages: 20, seed: 0x5eed, exhaustive_limit: 12, sample_scenarios: 2000, exec: Exec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioFailure {
    /// Failed node for repair scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed: Option<usize>,
    /// Helper set (repair) or collected set (data collection), 0-based.
    pub nodes: Vec<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub checked: usize,
    pub passed: usize,
    pub messages: usize,
    pub exhaustive: bool,
    pub failures: Vec<ScenarioFailure>,
}

impl ScenarioReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passed == self.checked
    }
}

/// Seeded test messages with their precomputed shards.
fn message_bank(inst: &CodeInstance, opts: &VerifyOptions) -> Vec<(Vec<FieldElem>, Vec<Vec<FieldElem>>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.messages.max(1))
        .map(|_| {
            let f = random_message(inst.field(), inst.params.b, &mut rng);
            let shards = inst.encode(&f).expect("message has length B");
            (f, shards)
        })
        .collect()
}

pub fn random_message(field: &FieldSpec, len: usize, rng: &mut impl Rng) -> Vec<FieldElem> {
    let mask = if field.bits() >= 64 { u64::MAX } else { field.order() - 1 };
    (0..len).map(|_| FieldElem(rng.gen::<u64>() & mask)).collect()
}

fn random_subset(rng: &mut impl Rng, pool: &[usize], size: usize) -> Vec<usize> {
    let mut pool = pool.to_vec();
    for i in 0..size {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    let mut s = pool[..size].to_vec();
    s.sort_unstable();
    s
}

fn repair_scenarios(inst: &CodeInstance, opts: &VerifyOptions) -> (Vec<(usize, Vec<usize>)>, bool) {
    let MbrParams { n, d, .. } = inst.params;
    if n <= opts.exhaustive_limit {
        let all = (0..n)
            .flat_map(|j| {
                let survivors: Vec<usize> = (0..n).filter(|&i| i != j).collect();
                survivors.into_iter().combinations(d).map(move |h| (j, h))
            })
            .collect();
        (all, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xa11);
        let all = (0..opts.sample_scenarios)
            .map(|_| {
                let j = rng.gen_range(0..n);
                let survivors: Vec<usize> = (0..n).filter(|&i| i != j).collect();
                (j, random_subset(&mut rng, &survivors, d))
            })
            .collect();
        (all, false)
    }
}

fn collection_scenarios(inst: &CodeInstance, opts: &VerifyOptions) -> (Vec<Vec<usize>>, bool) {
    let MbrParams { n, k, .. } = inst.params;
    if n <= opts.exhaustive_limit {
        ((0..n).combinations(k).collect(), true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xdc);
        let pool: Vec<usize> = (0..n).collect();
        ((0..opts.sample_scenarios).map(|_| random_subset(&mut rng, &pool, k)).collect(), false)
    }
}

fn finish(results: Vec<Option<ScenarioFailure>>, messages: usize, exhaustive: bool) -> ScenarioReport {
    let checked = results.len();
    let mut failures: Vec<ScenarioFailure> = results.into_iter().flatten().collect();
    failures.sort_by(|a, b| (a.failed, &a.nodes).cmp(&(b.failed, &b.nodes)));
    ScenarioReport { checked, passed: checked - failures.len(), messages, exhaustive, failures }
}

/// Every single-node failure against every `d`-subset of survivors.
pub fn verify_repair_all(inst: &CodeInstance, opts: &VerifyOptions) -> ScenarioReport {
    let bank = message_bank(inst, opts);
    let (scenarios, exhaustive) = repair_scenarios(inst, opts);
    let results = opts.exec.map(&scenarios, |(failed, helpers)| {
        for (_, shards) in &bank {
            let packets: Result<Vec<_>, _> = helpers
                .iter()
                .map(|&h| inst.repair_packet(h, *failed, &shards[h]))
                .collect();
            let outcome = packets.and_then(|p| inst.repair(*failed, &p));
            let reason = match outcome {
                Ok(rebuilt) if rebuilt == shards[*failed] => continue,
                Ok(_) => "reconstructed shard differs".to_string(),
                Err(e) => e.to_string(),
            };
            return Some(ScenarioFailure { failed: Some(*failed), nodes: helpers.clone(), reason });
        }
        None
    });
    finish(results, bank.len(), exhaustive)
}

/// Every `k`-subset of nodes must return the file.
pub fn verify_dc_all(inst: &CodeInstance, opts: &VerifyOptions) -> ScenarioReport {
    let bank = message_bank(inst, opts);
    let (scenarios, exhaustive) = collection_scenarios(inst, opts);
    let results = opts.exec.map(&scenarios, |nodes| {
        for (f, shards) in &bank {
            let view: Vec<(usize, &[FieldElem])> = nodes.iter().map(|&i| (i, shards[i].as_slice())).collect();
            let reason = match inst.collect(&view) {
                Ok(out) if &out == f => continue,
                Ok(_) => "recovered file differs".to_string(),
                Err(e) => e.to_string(),
            };
            return Some(ScenarioFailure { failed: None, nodes: nodes.clone(), reason });
        }
        None
    });
    finish(results, bank.len(), exhaustive)
}

/// Stored symbols grouped by identical generator column, as
/// `(column, nodes holding it)`, in first-occurrence order.
pub fn symbol_groups(inst: &CodeInstance) -> Vec<(Vec<FieldElem>, Vec<usize>)> {
    let mut index: HashMap<Vec<FieldElem>, usize> = HashMap::new();
    let mut groups: Vec<(Vec<FieldElem>, Vec<usize>)> = Vec::new();
    for (i, g) in inst.blocks.iter().enumerate() {
        for a in 0..g.cols() {
            let col = g.col(a);
            match index.get(&col) {
                Some(&gi) => {
                    if !groups[gi].1.contains(&i) {
                        groups[gi].1.push(i);
                    }
                }
                None => {
                    index.insert(col.clone(), groups.len());
                    groups.push((col, vec![i]));
                }
            }
        }
    }
    groups
}

/// Multiplicity -> number of distinct stored symbols with that multiplicity.
/// "Same symbol" means an identical generator column, not a scalar multiple.
pub fn replication_histogram(inst: &CodeInstance) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for (_, nodes) in symbol_groups(inst) {
        *hist.entry(nodes.len()).or_insert(0) += 1;
    }
    hist
}

pub fn max_replication(inst: &CodeInstance) -> usize {
    replication_histogram(inst).keys().next_back().copied().unwrap_or(0)
}

/// True when every helper in `helpers` answers with one verbatim stored symbol.
pub fn verify_hbt(inst: &CodeInstance, failed: usize, helpers: &[usize]) -> bool {
    helpers
        .iter()
        .all(|&h| h != failed && standard_basis_index(inst.repair_vector(h, failed)).is_some())
}

/// HBT against every possible helper set.
pub fn hbt_for_all_helper_sets(inst: &CodeInstance, failed: usize) -> bool {
    let others: Vec<usize> = (0..inst.params.n).filter(|&i| i != failed).collect();
    verify_hbt(inst, failed, &others)
}

/// Whether the replacement only stores received packets (no arithmetic):
/// probes the linear repair map with unit packets and checks it is a
/// permutation.
pub fn repair_is_transfer(inst: &CodeInstance, failed: usize, helpers: &[usize]) -> Result<bool, CodeError> {
    let d = inst.params.d;
    let mut hit = vec![false; inst.params.alpha];
    let mut columns = Vec::with_capacity(d);
    for t in 0..d {
        let packets: Vec<RepairPacket> = helpers
            .iter()
            .enumerate()
            .map(|(s, &h)| RepairPacket {
                helper: h,
                failed,
                value: if s == t { FieldElem::ONE } else { FieldElem::ZERO },
            })
            .collect();
        columns.push(inst.repair(failed, &packets)?);
    }
    for a in 0..inst.params.alpha {
        let row: Vec<FieldElem> = columns.iter().map(|c| c[a]).collect();
        match standard_basis_index(&row) {
            Some(t) if !hit[t] => hit[t] = true,
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// For each message coordinate, how many stored symbols depend on it.
pub fn update_complexity(inst: &CodeInstance) -> Result<Vec<usize>, CodeError> {
    let b = inst.params.b;
    let mut counts = vec![0usize; b];
    for g in &inst.blocks {
        for (r, count) in counts.iter_mut().enumerate() {
            *count += g.row(r).iter().filter(|e| !e.is_zero()).count();
        }
    }
    if let Some(r) = counts.iter().position(|&c| c == 0) {
        return Err(CodeError::Invalid(format!("message symbol {r} is not stored anywhere")));
    }
    Ok(counts)
}

/// `dim(col(G_i) ∩ col(G_j))`.
pub fn intersection_dim(inst: &CodeInstance, i: usize, j: usize) -> usize {
    let gi = &inst.blocks[i];
    let gj = &inst.blocks[j];
    gi.rank() + gj.rank() - Mat::hstack(&[gi, gj]).expect("same rows").rank()
}

/// Pairs whose packet functional does not lie in `col(G_failed)`.
pub fn repair_subspace_violations(inst: &CodeInstance) -> Vec<(usize, usize)> {
    let n = inst.params.n;
    (0..n)
        .cartesian_product(0..n)
        .filter(|(i, j)| i != j)
        .filter(|&(i, j)| !inst.blocks[j].col_space_contains(&inst.packet_functional(i, j)))
        .collect()
}

/// Pairs where the packet `i -> j` differs from `j -> i` as a functional.
pub fn asymmetric_packets(inst: &CodeInstance) -> Vec<(usize, usize)> {
    let n = inst.params.n;
    (0..n)
        .tuple_combinations()
        .filter(|&(i, j)| inst.packet_functional(i, j) != inst.packet_functional(j, i))
        .collect()
}

/// Ranks of the stacked blocks of every `d`-subset are at least `B`.
pub fn every_d_subset_spans(inst: &CodeInstance) -> bool {
    let MbrParams { n, d, b, .. } = inst.params;
    (0..n).combinations(d).all(|set| {
        let refs: Vec<&Mat> = set.iter().map(|&i| &inst.blocks[i]).collect();
        Mat::hstack(&refs).expect("same rows").rank() >= b
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_examples() {
        assert_eq!(MbrParams::new(6, 2, 2).unwrap().b, 3);
        assert_eq!(MbrParams::new(5, 2, 3).unwrap().b, 5);
        assert_eq!(MbrParams::new(8, 3, 4).unwrap().b, 9);
        let p = MbrParams::new(9, 4, 7).unwrap();
        assert_eq!(p.b, p.file_size_bound());
        assert_eq!(p.alpha, 7);
    }

    #[test]
    fn params_reject_bad_orderings() {
        assert!(MbrParams::new(5, 3, 2).is_err());
        assert!(MbrParams::new(4, 2, 4).is_err());
        assert!(MbrParams::new(4, 0, 2).is_err());
    }

    #[test]
    fn scheme_tags_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.tag().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.tag()));
        }
        assert!("raid5".parse::<Scheme>().is_err());
    }

    #[test]
    fn basis_detection() {
        let e = FieldElem;
        assert_eq!(standard_basis_index(&[e(0), e(1), e(0)]), Some(1));
        assert_eq!(standard_basis_index(&[e(0), e(2), e(0)]), None);
        assert_eq!(standard_basis_index(&[e(1), e(1)]), None);
        assert_eq!(standard_basis_index(&[e(0), e(0)]), None);
    }
}
