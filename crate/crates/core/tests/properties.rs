//! Property-based invariants over randomly generated operators. Proptest
//! drives seeds and dimensions; all matrix randomness flows through the
//! crate's seeded streams, so failures replay exactly.

use proptest::prelude::*;

use padec_core::decouple::ChannelEnsemble;
use padec_core::entropy::{
    renyi_cond_entropy_fixed, renyi_cond_entropy_opt, OptimizerSettings, RenyiOrder,
};
use padec_core::exec;
use padec_core::hashfam::{
    expected_deviation_two_norm, random_cq_operator, second_moment, CqDraw, HashFamily,
};
use padec_core::qops::{
    ginibre, haar_unitary, identity, partial_trace, random_density, schatten_norm, tensor,
    trace_norm, CMatrix, DensityOperator, SeededRng,
};
use padec_core::verify::{lemma_a1_check, random_normal_operator, random_tni_cp_map, CpMap};

fn rng_from(seed: u64) -> SeededRng {
    SeededRng::new(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schatten_norm_monotone_in_p(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = rng_from(seed);
        let x = ginibre(dim, dim, &mut rng);
        let ps = [1.0, 1.5, 2.0, 3.0, 6.0, f64::INFINITY];
        let norms: Vec<f64> = ps.iter().map(|&p| schatten_norm(&x, p).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-10, "norms not monotone: {norms:?}");
        }
    }

    #[test]
    fn schatten_triangle_and_homogeneity(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = rng_from(seed);
        let x = ginibre(dim, dim, &mut rng);
        let y = ginibre(dim, dim, &mut rng);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let nx = schatten_norm(&x, p).unwrap();
            let ny = schatten_norm(&y, p).unwrap();
            let nsum = schatten_norm(&(&x + &y), p).unwrap();
            prop_assert!(nsum <= nx + ny + 1e-9, "triangle fails at p={p}");

            let c = nalgebra::Complex::new(-1.7, 0.4);
            let scaled = x.map(|v| v * c);
            let nscaled = schatten_norm(&scaled, p).unwrap();
            prop_assert!((nscaled - c.norm() * nx).abs() <= 1e-9 * (1.0 + nx));
        }
    }

    #[test]
    fn schatten_unitarily_invariant(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = rng_from(seed);
        let x = ginibre(dim, dim, &mut rng);
        let u = haar_unitary(dim, &mut rng);
        let v = haar_unitary(dim, &mut rng);
        for p in [1.0, 1.7, 2.0, f64::INFINITY] {
            let a = schatten_norm(&x, p).unwrap();
            let b = schatten_norm(&(&u * &x * &v), p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a), "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn three_factor_hoelder(seed in any::<u64>(), dim in 2usize..5,
                            u in 0.06f64..0.45, v in 0.06f64..0.45) {
        let mut rng = rng_from(seed);
        let m = ginibre(dim, dim, &mut rng);
        let n = ginibre(dim, dim, &mut rng);
        let r = ginibre(dim, dim, &mut rng);
        let w = 1.0 - u - v;
        prop_assume!(w > 0.05);
        let (p1, p2, p3) = (1.0 / u, 1.0 / v, 1.0 / w);
        let lhs = trace_norm(&(&m * &n * &r));
        let rhs = schatten_norm(&m, p1).unwrap()
            * schatten_norm(&n, p2).unwrap()
            * schatten_norm(&r, p3).unwrap();
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs), "{lhs} > {rhs}");
    }

    #[test]
    fn partial_trace_recovers_product_factors(seed in any::<u64>(),
                                              da in 2usize..4, db in 2usize..4) {
        let mut rng = rng_from(seed);
        let a = random_density(da, da, &mut rng).unwrap();
        let b = random_density(db, db, &mut rng).unwrap();
        let joint = tensor(a.mat(), b.mat());
        let got_a = partial_trace(&joint, &[da, db], &[0]).unwrap();
        let got_b = partial_trace(&joint, &[da, db], &[1]).unwrap();
        prop_assert!((got_a - a.mat()).norm() < 1e-12);
        prop_assert!((got_b - b.mat()).norm() < 1e-12);
    }

    #[test]
    fn entropy_range_on_unit_trace_states(seed in any::<u64>(),
                                          da in 2usize..4, db in 2usize..4) {
        let mut rng = rng_from(seed);
        let rho = random_density(da * db, da * db, &mut rng)
            .unwrap()
            .with_dims(vec![da, db])
            .unwrap();
        let sigma = rho.marginal(&[1]).unwrap();
        let log_a = (da as f64).log2();
        for a in [0.6, 1.2, 1.7, 2.0] {
            let h = renyi_cond_entropy_fixed(&rho, &sigma, RenyiOrder::new(a).unwrap()).unwrap();
            prop_assert!(h.is_finite());
            prop_assert!(h.bits() >= -log_a - 1e-9 && h.bits() <= log_a + 1e-9,
                "alpha {a}: H = {} outside [-{log_a}, {log_a}]", h.bits());
        }
    }

    #[test]
    fn entropy_data_processing_on_b(seed in any::<u64>(), alpha_idx in 0usize..4) {
        // a channel on B cannot decrease the fixed-sigma entropy when
        // sigma is pushed through the same channel
        let alphas = [1.2, 1.5, 1.8, 2.0];
        let a = alphas[alpha_idx];
        let mut rng = rng_from(seed);
        let db = 2 + (seed % 2) as usize;
        let rho = random_density(2 * db, 2 * db, &mut rng)
            .unwrap()
            .with_dims(vec![2, db])
            .unwrap();
        let sigma = random_density(db, db, &mut rng).unwrap();
        let channel = padec_core::verify::random_cptp_map(db, db, 2, &mut rng).unwrap();

        let mut pushed_rho = CMatrix::zeros(2 * db, 2 * db);
        for k in channel.kraus() {
            let wide = tensor(&identity(2), k);
            pushed_rho += &wide * rho.mat() * wide.adjoint();
        }
        let pushed_rho = DensityOperator::new_unchecked(pushed_rho, vec![2, db]);
        let pushed_sigma =
            DensityOperator::new_unchecked(channel.apply(sigma.mat()).unwrap(), vec![db]);

        let order = RenyiOrder::new(a).unwrap();
        let before = renyi_cond_entropy_fixed(&rho, &sigma, order).unwrap();
        let after = renyi_cond_entropy_fixed(&pushed_rho, &pushed_sigma, order).unwrap();
        prop_assert!(after.bits() >= before.bits() - 1e-9,
            "alpha {a}: {} -> {}", before.bits(), after.bits());
    }

    #[test]
    fn hash_contraction_on_random_operators(seed in any::<u64>(),
                                            n in 1usize..4, kind_idx in 0usize..3) {
        let mut rng = rng_from(seed);
        let m = 1 + (seed % n as u64) as usize;
        let fam = HashFamily::affine(n, m).unwrap();
        let kind = match kind_idx {
            0 => CqDraw::State,
            1 => CqDraw::NormalBlocks,
            _ => CqDraw::GeneralBlocks,
        };
        let eta = random_cq_operator(1 << n, 2, kind, &mut rng);
        let (mean, _) = expected_deviation_two_norm(&fam, &eta, &mut rng).unwrap();
        prop_assert!(mean <= eta.two_norm() + 1e-9);

        let sm = second_moment(&fam, &eta).unwrap();
        prop_assert!(sm.expected <= sm.bound + 1e-9);
        prop_assert!((sm.expected - sm.two_universal_prediction).abs() <= 1e-9);
    }

    #[test]
    fn tni_maps_contract_trace_norm(seed in any::<u64>(),
                                    din in 2usize..6, dout in 2usize..6) {
        let mut rng = rng_from(seed);
        let map = random_tni_cp_map(din, dout, &mut rng).unwrap();
        let m = random_normal_operator(din, &mut rng);
        let check = lemma_a1_check(&map, &m).unwrap();
        prop_assert!(check.ok, "lhs {} rhs {}", check.lhs, check.rhs);
    }

    #[test]
    fn uniform_input_is_fixed_point_of_haar_channels(seed in any::<u64>()) {
        let ens = ChannelEnsemble::haar(2, 2).unwrap();
        let mut rng = rng_from(seed);
        let u = ens.sample_unitary(&mut rng);
        let flat = identity(4).scale(0.25);
        let out = ens.apply_with(&u, &flat, 1).unwrap();
        prop_assert!((out - identity(2).scale(0.5)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn optimized_entropy_dominates_marginal(seed in any::<u64>()) {
        let mut rng = rng_from(seed);
        let rho = random_density(4, 4, &mut rng).unwrap().with_dims(vec![2, 2]).unwrap();
        let marginal = rho.marginal(&[1]).unwrap();
        let order = RenyiOrder::new(2.0).unwrap();
        let opts = OptimizerSettings::default();
        let fixed = renyi_cond_entropy_fixed(&rho, &marginal, order).unwrap();
        let opt = renyi_cond_entropy_opt(&rho, order, &opts, &SeededRng::new(seed)).unwrap();
        prop_assert!(opt.value.bits() >= fixed.bits() - opts.tol);
    }

    #[test]
    fn mc_deviation_never_exceeds_trivial_bound(seed in any::<u64>()) {
        // each one-norm sample obeys the triangle bound of 2 on states
        let ens = ChannelEnsemble::haar(2, 2).unwrap();
        let mut rng = rng_from(seed);
        let rho = random_density(8, 8, &mut rng).unwrap().with_dims(vec![4, 2]).unwrap();
        let values: Vec<f64> = exec::map_indexed(16, |i| {
            let mut sub = SeededRng::new(seed).fold_in(i as u64);
            padec_core::decouple::deviation_trace_norm_sample(&ens, rho.mat(), 2, &mut sub)
                .unwrap()
        });
        for v in values {
            prop_assert!(v <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn cp_map_kraus_subset_stays_tni(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = rng_from(seed);
        let full = padec_core::verify::random_cptp_map(dim, dim, 3, &mut rng).unwrap();
        let subset: Vec<CMatrix> = full.kraus()[..2].to_vec();
        let map = CpMap::new(subset).unwrap();
        let gram = map.kraus_gram();
        let lam = padec_core::qops::herm_eigenvalues(&gram)
            .unwrap()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lam <= 1.0 + 1e-10);
    }
}
