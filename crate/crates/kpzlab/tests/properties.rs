use proptest::prelude::*;

use kpzlab::asep::{event_identity_holds, reliable_window_start, simulate_asep, TruncationPolicy};
use kpzlab::coupling::{conditional_midpoint_pmf, kmt_couple};
use kpzlab::gibbs::{acceptance_z_exact, conditional_law_exact, weight_w, Boundary, GibbsContext};
use kpzlab::hallittlewood::{
    enumerate_plane_partitions, Cap, HahpParams, HahpSampler, Partition, PlanePartitionChain, PlanePartition,
};
use kpzlab::harness::rng_from_seed;
use kpzlab::paths::{enumerate_bridges, sample_uniform_bridge, BridgeSpec, UpRightPath};
use kpzlab::sixvertex::{sample_s6v_seeded, top_row_heights, S6VParams};

fn steps() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 1..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uniform_bridges_respect_endpoints(seed in any::<u64>(), len in 1i64..40, frac in 0.0f64..=1.0) {
        let ups = (frac * len as f64).round() as i64;
        let spec = BridgeSpec::new(-3, len - 3, 5, 5 + ups).unwrap();
        let path = sample_uniform_bridge(&mut rng_from_seed(seed), &spec);
        prop_assert_eq!(path.at(-3), 5);
        prop_assert_eq!(path.at(len - 3), 5 + ups);
        prop_assert!(path.values().windows(2).all(|w| w[1] - w[0] == 0 || w[1] - w[0] == 1));
    }

    #[test]
    fn gibbs_weight_lies_in_unit_interval(
        ell in steps(), low in steps(), t in 0.05f64..0.95, shift in -2i64..3,
    ) {
        let len = ell.len().min(low.len());
        let ell = UpRightPath::from_steps(0, 0, &ell[..len]);
        let low = UpRightPath::from_steps(0, shift - 1, &low[..len]);
        let ctx = GibbsContext::full(t, 0, len as i64, Boundary::Infinite, Boundary::Path(low.clone())).unwrap();
        let w = weight_w(&ctx, &ell);
        prop_assert!((0.0..=1.0).contains(&w));
        let crosses = (1..=len as i64).any(|i| ell.at(i) < low.at(i));
        if crosses {
            prop_assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn conditional_law_is_normalized(len in 2i64..7, b in 0i64..7, t in 0.1f64..0.9, z0 in -3i64..1) {
        let b = b.min(len);
        let low = UpRightPath::from_steps(0, z0, &vec![false; len as usize]);
        let ctx = GibbsContext::full(t, 0, len, Boundary::Infinite, Boundary::Path(low)).unwrap();
        let z = acceptance_z_exact(&ctx, 0, b).unwrap();
        prop_assert!(z > 0.0 && z <= 1.0);
        let law = conditional_law_exact(&ctx, 0, b).unwrap();
        let total: f64 = law.iter().map(|x| x.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert_eq!(law.len() as u128, ctx.bridge(0, b).unwrap().count());
        prop_assert_eq!(law.len(), enumerate_bridges(&ctx.bridge(0, b).unwrap()).unwrap().len());
    }

    #[test]
    fn conjugation_is_an_involution(mut parts in prop::collection::vec(0u32..8, 0..7)) {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let p = Partition::new(parts).unwrap();
        prop_assert_eq!(p.conjugate().conjugate(), p.clone());
        prop_assert_eq!(p.conjugate().weight(), p.weight());
    }

    #[test]
    fn hahp_samples_interlace(seed in any::<u64>(), m in 1usize..5, n in 1usize..4) {
        let params = HahpParams::new(m, n, 0.5, 0.4).unwrap();
        let sampler = HahpSampler::new(params, Cap::Weight(12)).unwrap();
        let seq = sampler.sample(&mut rng_from_seed(seed));
        prop_assert_eq!(seq.len(), m);
        for i in 1..=m {
            prop_assert!(seq.at(i).interlaces(&seq.at(i - 1)));
            prop_assert!(seq.at(i).length() <= n);
        }
        let line = seq.conjugate_line(1);
        prop_assert!(line.windows(2).all(|w| w[1] - w[0] == 0 || w[1] - w[0] == 1));
    }

    #[test]
    fn six_vertex_heights_are_monotone(seed in any::<u64>(), q in 0.05f64..0.95, zeta in 0.05f64..0.95) {
        let params = S6VParams::from_zeta(q, zeta).unwrap();
        let (x, y) = (12, 9);
        let field = sample_s6v_seeded(seed, &params, x, y).unwrap();
        for row in 1..=y {
            let h = field.height_row(row).unwrap();
            prop_assert_eq!(h[0], row as i64);
            prop_assert!(h.windows(2).all(|w| w[0] - w[1] == 0 || w[0] - w[1] == 1));
            if row > 1 {
                let below = field.height_row(row - 1).unwrap();
                prop_assert!(h.iter().zip(&below).all(|(a, b)| a - b == 0 || a - b == 1));
            }
        }
        prop_assert_eq!(top_row_heights(seed, &params, x, y).unwrap(), field.height_row(y).unwrap());
    }

    #[test]
    fn asep_event_identity_holds(seed in any::<u64>(), t in 0.0f64..0.9, time in 0.5f64..12.0) {
        let state = simulate_asep(&mut rng_from_seed(seed), t, time, TruncationPolicy::for_time(time)).unwrap();
        prop_assert!(state.positions.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(state.truncation_safe());
        let start = reliable_window_start(time);
        prop_assert!(event_identity_holds(&state, start..=state.positions[0] + 1));
    }

    #[test]
    fn coupled_walks_are_bridges(seed in any::<u64>(), k in 1u32..7, frac in 0.0f64..=1.0, p in 0.1f64..0.9) {
        let n = 1usize << k;
        let z = (frac * n as f64).round() as usize;
        let s = kmt_couple(&mut rng_from_seed(seed), n, z, p).unwrap();
        prop_assert_eq!(s.walk.at(0), 0);
        prop_assert_eq!(s.walk.at(n as i64), z as i64);
        prop_assert!(s.bridge[0].abs() < 1e-12 && s.bridge[n].abs() < 1e-12);
        prop_assert!(s.delta >= 0.0);
        let pmf = conditional_midpoint_pmf(n, n / 2, z).unwrap();
        prop_assert!((pmf.iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_partition_chain_stays_in_the_box(seed in any::<u64>(), steps in 1u64..2000) {
        let mut chain = PlanePartitionChain::new(PlanePartition::zero(2, 3), 3, 0.5, 0.5).unwrap();
        chain.run(&mut rng_from_seed(seed), steps);
        let s = chain.state();
        let states = enumerate_plane_partitions(2, 3, 3);
        prop_assert!(states.contains(s));
    }
}
