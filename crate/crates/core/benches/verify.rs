use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mbr_codes::cluster::Cluster;
use mbr_codes::mbr::{verify_dc_all, verify_repair_all};
use mbr_codes::{BuildSpec, Exec, Scheme, VerifyOptions};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_all");
    group.sample_size(10);
    for (scheme, n, k, d) in [(Scheme::ConsA, 8, 3, 4), (Scheme::Pm, 8, 4, 5)] {
        let inst = BuildSpec::new(scheme, n, k, Some(d)).unwrap().build().unwrap();
        for (mode, exec) in MODES {
            let opts = VerifyOptions { exec, ..VerifyOptions::default() };
            group.bench_with_input(BenchmarkId::new(format!("{scheme}-{n}-{k}-{d}"), mode), &opts, |b, opts| {
                b.iter(|| {
                    let r = verify_repair_all(&inst, opts);
                    let c = verify_dc_all(&inst, opts);
                    assert!(r.all_passed() && c.all_passed());
                })
            });
        }
    }
    group.finish();
}

fn encoding(c: &mut Criterion) {
    let mut group = c.benchmark_group("cluster_encode");
    group.sample_size(10);
    let data: Vec<u8> = (0..1 << 18).map(|i: u32| (i % 251) as u8).collect();
    let inst = Arc::new(BuildSpec::new(Scheme::ConsB, 10, 5, Some(7)).unwrap().build().unwrap());
    for (mode, exec) in MODES {
        group.bench_function(BenchmarkId::new("cons-b-10-5-7/256KiB", mode), |b| {
            b.iter(|| Cluster::encode(Arc::clone(&inst), &data, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, verification, encoding);
criterion_main!(benches);
