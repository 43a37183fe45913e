use std::sync::Arc;

use itertools::Itertools;

use mbr_codes::cluster::{Cluster, ClusterError};
use mbr_codes::manifest::Manifest;
use mbr_codes::mbr::{verify_dc_all, verify_repair_all};
use mbr_codes::{BuildSpec, Exec, Scheme, VerifyOptions};

fn data(len: usize) -> Vec<u8> {
    (0..len).map(|i| (i * 7 + i / 13) as u8).collect()
}

fn instance(scheme: Scheme, n: usize, k: usize, d: usize) -> Arc<mbr_codes::CodeInstance> {
    Arc::new(BuildSpec::new(scheme, n, k, Some(d)).unwrap().build().unwrap())
}

#[test]
fn every_k_subset_recovers_every_scheme() {
    let bytes = data(777);
    for (scheme, n, k, d) in [
        (Scheme::Pm, 6, 3, 4),
        (Scheme::Rbt, 5, 2, 4),
        (Scheme::ConsA, 8, 3, 4),
        (Scheme::ConsB, 6, 2, 3),
        (Scheme::ConcatRbt, 6, 2, 2),
        (Scheme::Replicate, 6, 3, 3),
        (Scheme::NearReplicate, 7, 3, 3),
    ] {
        let cluster = Cluster::encode(instance(scheme, n, k, d), &bytes, Exec::default()).unwrap();
        for nodes in (0..n).combinations(k) {
            let (out, report) = cluster.collect_bytes(&nodes, bytes.len()).unwrap();
            assert_eq!(out, bytes, "{scheme} nodes {nodes:?}");
            assert_eq!(report.symbols_read, (k * d * cluster.stripes()) as u64);
        }
    }
}

#[test]
fn repairs_are_exact_and_counted() {
    let bytes = data(400);
    let inst = instance(Scheme::ConsA, 7, 3, 4);
    let mut cluster = Cluster::encode(Arc::clone(&inst), &bytes, Exec::default()).unwrap();
    let originals: Vec<_> = (0..7).map(|i| cluster.shard(i).unwrap()).collect();
    let mut expected = 0;
    for (failed, original) in originals.iter().enumerate() {
        for helpers in (0..7).filter(|&h| h != failed).combinations(4).take(3) {
            cluster.fail(failed).unwrap();
            let report = cluster.repair(failed, &helpers).unwrap();
            assert_eq!(&cluster.shard(failed).unwrap(), original);
            expected += 4 * cluster.stripes() as u64;
            assert_eq!(cluster.counters().transferred, expected);
            assert_eq!(report.stripes, cluster.stripes());
        }
    }
    assert_eq!(cluster.counters().repairs, 21);
}

#[test]
fn repair_preconditions() {
    let inst = instance(Scheme::Pm, 5, 2, 3);
    let mut cluster = Cluster::encode(inst, &data(50), Exec::default()).unwrap();
    let before = cluster.shard(0).unwrap();
    cluster.repair(0, &[1, 2, 3]).unwrap();
    assert_eq!(cluster.shard(0).unwrap(), before);
    cluster.fail(0).unwrap();
    cluster.fail(1).unwrap();
    assert!(matches!(cluster.repair(0, &[1, 2, 3]), Err(ClusterError::NotLive(1))));
    assert!(cluster.repair(0, &[2, 3]).is_err());
    assert!(cluster.collect_symbols(&[0, 2]).is_err());
    cluster.repair(0, &[2, 3, 4]).unwrap();
    assert!(cluster.is_live(0));
}

#[test]
fn sequential_and_parallel_agree() {
    let bytes = data(2000);
    let inst = instance(Scheme::ConsB, 7, 3, 5);
    let seq = Cluster::encode(Arc::clone(&inst), &bytes, Exec::Sequential).unwrap();
    let par = Cluster::encode(Arc::clone(&inst), &bytes, Exec::Parallel).unwrap();
    for i in 0..7 {
        assert_eq!(seq.shard(i), par.shard(i));
    }
    let so = VerifyOptions { exec: Exec::Sequential, ..VerifyOptions::default() };
    let po = VerifyOptions { exec: Exec::Parallel, ..VerifyOptions::default() };
    assert_eq!(verify_repair_all(&inst, &so), verify_repair_all(&inst, &po));
    assert_eq!(verify_dc_all(&inst, &so), verify_dc_all(&inst, &po));
}

#[test]
fn shards_survive_serialization() {
    let bytes = data(321);
    let spec = BuildSpec::new(Scheme::ConsA, 8, 4, Some(4)).unwrap();
    let (manifest, inst) = Manifest::build(&spec).unwrap();
    let cluster = Cluster::encode(Arc::new(inst), &bytes, Exec::default()).unwrap();
    let rebuilt = Arc::new(Manifest::from_json(&manifest.to_json()).unwrap().rebuild().unwrap());
    let shards = [6, 2, 7, 0]
        .iter()
        .map(|&i| mbr_codes::shard::Shard::from_bytes(&cluster.shard(i).unwrap().to_bytes()).unwrap())
        .collect();
    let restored = Cluster::from_shards(rebuilt, shards, Exec::default()).unwrap();
    assert_eq!(restored.failed().len(), 4);
    let (out, _) = restored.collect_bytes(&[0, 2, 6, 7], bytes.len()).unwrap();
    assert_eq!(out, bytes);
}
