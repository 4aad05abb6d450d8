mod common;

use common::{random_popularity, random_q_placement};
use mccs::combinatorics::{all_demands, all_leader_groups, binomial};
use mccs::lp::optimize_mccs;
use mccs::simulator::{build_caches, deliver, deliver_with_leaders, quantize_placement, simulate_all, FileLibrary};
use mccs::{zipf_popularity, Placement, ProblemInstance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_case(seed: u64, n: usize, k: usize) -> (ProblemInstance, Placement) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_q_placement(&mut rng, n, k);
    (common::instance_for(random_popularity(&mut rng, n), k, &a), a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn layouts_partition_every_file(seed in any::<u64>(), n in 1usize..5, k in 1usize..5, extra in 0u64..500) {
        let (inst, a) = random_case(seed, n, k);
        let f = (1u64 << k) + extra;
        let layout = quantize_placement(&inst, &a, f).unwrap();
        for file in 0..n {
            let sizes = &layout.subfile_bits()[file];
            let total: u64 = sizes.iter().enumerate().map(|(l, &s)| binomial(k as i64, l as i64) * s).sum();
            prop_assert_eq!(total, f);
            let mut end = 0;
            for mask in 0..1u32 << k {
                let r = layout.subfile_range(file, mccs::combinatorics::UserSubset(mask));
                prop_assert_eq!(r.start, end);
                end = r.end;
            }
            prop_assert_eq!(end, f);
        }
        let library = FileLibrary::generate(n, f, seed);
        let slack = (n as u64) << k;
        for cache in build_caches(&layout, &library) {
            prop_assert!(cache.occupancy_bits() as f64 <= inst.cache_size() * f as f64 + slack as f64);
        }
    }

    #[test]
    fn random_placements_decode_and_track_the_analytic_rate(seed in any::<u64>(), n in 1usize..4, k in 1usize..4) {
        let (inst, a) = random_case(seed, n, k);
        let summary = simulate_all(&inst, &a, 64 << k, seed).unwrap();
        prop_assert!(summary.all_decoded());
        prop_assert_eq!(summary.bound_violations, 0);
    }
}

#[test]
fn every_demand_decodes_at_optimized_placements() {
    for (n, k) in [(2, 2), (3, 3), (4, 4)] {
        for m in [0.0, 0.5, 1.0, 2.0, n as f64] {
            let inst = ProblemInstance::new(n, k, m, zipf_popularity(n, 0.8)).unwrap();
            let a = optimize_mccs(&inst).unwrap().placement;
            let summary = simulate_all(&inst, &a, 16 << k, 5).unwrap();
            assert_eq!(summary.decoded, n.pow(k as u32), "N={n} K={k} M={m}");
            assert_eq!(summary.bound_violations, 0, "N={n} K={k} M={m}");
            if m == n as f64 {
                assert!(summary.outcomes.iter().all(|o| o.total_bits == 0));
            }
        }
    }
}

#[test]
fn exact_sizes_give_exact_rates() {
    let inst = ProblemInstance::new(3, 3, 1.0, zipf_popularity(3, 1.0)).unwrap();
    let a = Placement::from_rows(vec![
        vec![0.0, 0.25, 0.0, 0.25],
        vec![0.25, 0.125, 0.125, 0.0],
        vec![0.625, 0.125, 0.0, 0.0],
    ])
    .unwrap();
    let summary = simulate_all(&inst, &a, 64, 2).unwrap();
    assert!(summary.all_decoded());
    assert_eq!(summary.max_deviation, 0.0);
}

#[test]
fn total_bits_ignore_leader_choice() {
    let (inst, a) = random_case(77, 3, 4);
    let layout = quantize_placement(&inst, &a, 1 << 10).unwrap();
    let library = FileLibrary::generate(3, 1 << 10, 77);
    for d in all_demands(&inst).unwrap() {
        let canonical = deliver(&layout, &library, &d).unwrap().total_bits;
        for leaders in all_leader_groups(&d) {
            let log = deliver_with_leaders(&layout, &library, &d, leaders).unwrap();
            assert_eq!(log.total_bits, canonical, "{:?} with leaders {leaders}", d.labels());
        }
    }
}

#[test]
fn same_seed_same_files() {
    let a = FileLibrary::generate(3, 1000, 42);
    let b = FileLibrary::generate(3, 1000, 42);
    let c = FileLibrary::generate(3, 1000, 43);
    assert_eq!(a.file(2), b.file(2));
    assert_ne!(a.file(0), c.file(0));
}
