//! In-process storage cluster: stripes of a file spread over `n` nodes,
//! single-node failure, repair and data collection with symbol accounting.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::galois::FieldElem;
use crate::mbr::{repair_is_transfer, standard_basis_index, CodeError, CodeInstance};
use crate::shard::{bytes_to_symbols, symbols_to_bytes, Shard, ShardHeader};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("node {0} does not exist")]
    NodeIndex(usize),
    #[error("node {0} is not live")]
    NotLive(usize),
    #[error("node {0} listed twice")]
    Duplicate(usize),
    #[error("need exactly {expected} nodes, got {got}")]
    Count { expected: usize, got: usize },
    #[error("node {0} cannot help repair itself")]
    SelfHelp(usize),
    #[error("shard does not fit this code: {0}")]
    ShardMismatch(String),
    #[error("stripe {stripe}: {source}")]
    Stripe { stripe: usize, source: CodeError },
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Default)]
struct Counters {
    transferred: AtomicU64,
    helper_reads: AtomicU64,
    collection_reads: AtomicU64,
    repairs: AtomicU64,
    collections: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub transferred: u64,
    pub helper_reads: u64,
    pub collection_reads: u64,
    pub repairs: u64,
    pub collections: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub failed: usize,
    pub helpers: Vec<usize>,
    pub stripes: usize,
    /// Symbols sent by helpers, `d` per stripe.
    pub transferred: u64,
    /// Stored symbols touched at helpers to form their packets.
    pub helper_reads: u64,
    /// Every helper sent one stored symbol verbatim.
    pub hbt: bool,
    /// `hbt`, and the replacement stored the packets without arithmetic.
    pub rbt: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectReport {
    pub nodes: Vec<usize>,
    pub stripes: usize,
    pub symbols_read: u64,
}

pub struct Cluster {
    inst: Arc<CodeInstance>,
    /// Stripe-major symbols per node; `None` once failed.
    shards: Vec<Option<Vec<FieldElem>>>,
    stripes: usize,
    failed: BTreeSet<usize>,
    counters: Counters,
    exec: Exec,
}

impl Cluster {
    /// Splits `data` into `B`-symbol stripes (last one zero-padded) and
    /// encodes every stripe.
    pub fn encode(inst: Arc<CodeInstance>, data: &[u8], exec: Exec) -> Result<Self, ClusterError> {
        let p = *inst.params();
        let mut symbols = bytes_to_symbols(data, inst.field().bits());
        let stripes = symbols.len().div_ceil(p.b);
        symbols.resize(stripes * p.b, FieldElem::ZERO);
        let encoded = exec.map_range(stripes, |s| inst.encode(&symbols[s * p.b..(s + 1) * p.b]));
        let mut shards = vec![Vec::with_capacity(stripes * p.alpha); p.n];
        for (s, nodes) in encoded.into_iter().enumerate() {
            let nodes = nodes.map_err(|source| ClusterError::Stripe { stripe: s, source })?;
            for (i, content) in nodes.into_iter().enumerate() {
                shards[i].extend(content);
            }
        }
        Ok(Cluster {
            inst,
            shards: shards.into_iter().map(Some).collect(),
            stripes,
            failed: BTreeSet::new(),
            counters: Counters::default(),
            exec,
        })
    }

    /// Loads whatever shards are present; absent nodes count as failed.
    pub fn from_shards(inst: Arc<CodeInstance>, shards: Vec<Shard>, exec: Exec) -> Result<Self, ClusterError> {
        let p = *inst.params();
        let bits = inst.field().bits();
        let mut slots: Vec<Option<Vec<FieldElem>>> = vec![None; p.n];
        let mut stripes = None;
        for shard in shards {
            let h = shard.header;
            let node = (h.node_id as usize).checked_sub(1).filter(|&i| i < p.n).ok_or(ClusterError::NodeIndex(h.node_id as usize))?;
            if h.alpha as usize != p.alpha || h.symbol_bits as u32 != bits {
                return Err(ClusterError::ShardMismatch(format!(
                    "node {} header has alpha={} bits={}, code has alpha={} bits={bits}",
                    h.node_id, h.alpha, h.symbol_bits, p.alpha
                )));
            }
            if let Some(e) = shard.symbols.iter().find(|e| !inst.field().contains(**e)) {
                return Err(ClusterError::ShardMismatch(format!("symbol {:#x} outside the field", e.raw())));
            }
            match stripes {
                None => stripes = Some(shard.stripes()),
                Some(s) if s != shard.stripes() => {
                    return Err(ClusterError::ShardMismatch(format!("node {} has {} stripes, others {s}", h.node_id, shard.stripes())))
                }
                _ => {}
            }
            if slots[node].replace(shard.symbols).is_some() {
                return Err(ClusterError::Duplicate(node));
            }
        }
        let failed = (0..p.n).filter(|&i| slots[i].is_none()).collect();
        Ok(Cluster { inst, shards: slots, stripes: stripes.unwrap_or(0), failed, counters: Counters::default(), exec })
    }

    pub fn instance(&self) -> &CodeInstance {
        &self.inst
    }

    pub fn stripes(&self) -> usize {
        self.stripes
    }

    pub fn failed(&self) -> &BTreeSet<usize> {
        &self.failed
    }

    pub fn is_live(&self, node: usize) -> bool {
        self.shards.get(node).is_some_and(|s| s.is_some())
    }

    pub fn shard(&self, node: usize) -> Option<Shard> {
        let content = self.shards.get(node)?.as_ref()?;
        Some(Shard {
            header: ShardHeader {
                node_id: (node + 1) as u16,
                alpha: self.inst.params().alpha as u16,
                symbol_bits: self.inst.field().bits() as u16,
            },
            symbols: content.clone(),
        })
    }

    pub fn counters(&self) -> CounterSnapshot {
        let c = &self.counters;
        CounterSnapshot {
            transferred: c.transferred.load(Ordering::Relaxed),
            helper_reads: c.helper_reads.load(Ordering::Relaxed),
            collection_reads: c.collection_reads.load(Ordering::Relaxed),
            repairs: c.repairs.load(Ordering::Relaxed),
            collections: c.collections.load(Ordering::Relaxed),
        }
    }

    pub fn fail(&mut self, node: usize) -> Result<(), ClusterError> {
        if node >= self.shards.len() {
            return Err(ClusterError::NodeIndex(node));
        }
        self.shards[node] = None;
        self.failed.insert(node);
        Ok(())
    }

    fn stripe_of(&self, node: usize, s: usize) -> &[FieldElem] {
        let a = self.inst.params().alpha;
        &self.shards[node].as_ref().expect("live node")[s * a..(s + 1) * a]
    }

    fn check_nodes(&self, nodes: &[usize], expected: usize) -> Result<(), ClusterError> {
        if nodes.len() != expected {
            return Err(ClusterError::Count { expected, got: nodes.len() });
        }
        let mut seen = BTreeSet::new();
        for &i in nodes {
            if i >= self.shards.len() {
                return Err(ClusterError::NodeIndex(i));
            }
            if !seen.insert(i) {
                return Err(ClusterError::Duplicate(i));
            }
            if !self.is_live(i) {
                return Err(ClusterError::NotLive(i));
            }
        }
        Ok(())
    }

    /// Regenerates `failed` from `d` live helpers, stripe by stripe.
    pub fn repair(&mut self, failed: usize, helpers: &[usize]) -> Result<RepairReport, ClusterError> {
        let inst = Arc::clone(&self.inst);
        let d = inst.params().d;
        if failed >= self.shards.len() {
            return Err(ClusterError::NodeIndex(failed));
        }
        if helpers.contains(&failed) {
            return Err(ClusterError::SelfHelp(failed));
        }
        self.check_nodes(helpers, d)?;
        let rebuilt = self.exec.map_range(self.stripes, |s| {
            let packets = helpers
                .iter()
                .map(|&h| inst.repair_packet(h, failed, self.stripe_of(h, s)))
                .collect::<Result<Vec<_>, _>>()?;
            inst.repair(failed, &packets)
        });
        let mut content = Vec::with_capacity(self.stripes * inst.params().alpha);
        for (s, r) in rebuilt.into_iter().enumerate() {
            content.extend(r.map_err(|source| ClusterError::Stripe { stripe: s, source })?);
        }
        let stripes = self.stripes as u64;
        let reads_per_stripe: u64 = helpers
            .iter()
            .map(|&h| inst.repair_vector(h, failed).iter().filter(|e| !e.is_zero()).count() as u64)
            .sum();
        let transferred = d as u64 * stripes;
        let helper_reads = reads_per_stripe * stripes;
        self.counters.transferred.fetch_add(transferred, Ordering::Relaxed);
        self.counters.helper_reads.fetch_add(helper_reads, Ordering::Relaxed);
        self.counters.repairs.fetch_add(1, Ordering::Relaxed);
        let hbt = helpers.iter().all(|&h| standard_basis_index(inst.repair_vector(h, failed)).is_some());
        let rbt = hbt && repair_is_transfer(&inst, failed, helpers)?;
        self.shards[failed] = Some(content);
        self.failed.remove(&failed);
        Ok(RepairReport { failed, helpers: helpers.to_vec(), stripes: self.stripes, transferred, helper_reads, hbt, rbt })
    }

    /// Recovers all stripe messages from `k` live nodes.
    pub fn collect_symbols(&self, nodes: &[usize]) -> Result<(Vec<FieldElem>, CollectReport), ClusterError> {
        let p = *self.inst.params();
        self.check_nodes(nodes, p.k)?;
        let decoded = self.exec.map_range(self.stripes, |s| {
            let view: Vec<(usize, &[FieldElem])> = nodes.iter().map(|&i| (i, self.stripe_of(i, s))).collect();
            self.inst.collect(&view)
        });
        let mut out = Vec::with_capacity(self.stripes * p.b);
        for (s, r) in decoded.into_iter().enumerate() {
            out.extend(r.map_err(|source| ClusterError::Stripe { stripe: s, source })?);
        }
        let symbols_read = (p.k * p.alpha * self.stripes) as u64;
        self.counters.collection_reads.fetch_add(symbols_read, Ordering::Relaxed);
        self.counters.collections.fetch_add(1, Ordering::Relaxed);
        Ok((out, CollectReport { nodes: nodes.to_vec(), stripes: self.stripes, symbols_read }))
    }

    pub fn collect_bytes(&self, nodes: &[usize], payload_len: usize) -> Result<(Vec<u8>, CollectReport), ClusterError> {
        let (symbols, report) = self.collect_symbols(nodes)?;
        let capacity = symbols.len() * self.inst.field().bits() as usize / 8;
        if payload_len > capacity {
            return Err(ClusterError::ShardMismatch(format!(
                "payload of {payload_len} bytes exceeds the {capacity} bytes held by {} stripes",
                self.stripes
            )));
        }
        Ok((symbols_to_bytes(&symbols, self.inst.field().bits(), payload_len), report))
    }
}
