//! Property tests for the structural invariants behind the public API:
//! verifier equivalence on random subsets, isolation-vector identities for
//! randomly chosen targets and helpers, exactness of the expectation
//! arithmetic, linearity of the evaluation map, substream reproducibility,
//! and the torus group laws.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

use rigidgen::design::{self, DesignParams};
use rigidgen::fourier::TorusPoint;
use rigidgen::framework::{ElementKey, Instance, PhiVector, SparseDomainVector};
use rigidgen::oa::{self, OaParams};
use rigidgen::sampler;

fn phi_of(instance: &Instance, vector: &SparseDomainVector) -> PhiVector {
    let mut total = PhiVector::zeros(instance.dim());
    for (key, coeff) in vector.iter() {
        let phi = instance.phi(key).expect("support stays in the ground set");
        total.add_scaled(coeff, &phi);
    }
    total
}

fn oa_params() -> impl Strategy<Value = OaParams> {
    (2u32..=3, 1u32..=4)
        .prop_flat_map(|(q, n)| (Just(q), Just(n), 1u32..=n.min(2)))
        .prop_map(|(q, n, t)| OaParams::new(q, n, t).expect("strategy keeps t <= n"))
}

fn design_triples() -> impl Strategy<Value = (u32, u32, u32)> {
    (5u32..=8, 1u32..=2).prop_flat_map(|(v, t)| ((2 * t + 1)..=v).prop_map(move |k| (v, k, t)))
}

proptest! {
    /// The framework identity and the classical column-count verifier are
    /// the same predicate on every subset, not just on curated examples.
    #[test]
    fn oa_verifiers_agree_on_random_subsets(params in oa_params(), seed in any::<u64>()) {
        let instance = oa::instance(&params).expect("instance builds");
        let mut rng = sampler::substream_rng(seed, 0);
        let n = rng.random_range(1..=instance.size());
        let subset = sampler::bernoulli_subset(&instance, n, &mut rng).expect("n in range");
        prop_assume!(!subset.is_empty());
        let framework = instance
            .verify_solution(&subset)
            .expect("non-empty subsets verify")
            .pass;
        let rows: Vec<Vec<u32>> = subset
            .iter()
            .map(|key| match key {
                ElementKey::Word(word) => word.clone(),
                _ => unreachable!("word instances only hold words"),
            })
            .collect();
        let classical = oa::verify_oa(&params, &rows).expect("rows verify").pass;
        prop_assert_eq!(framework, classical);
    }

    /// Any helper word that fixes the target's coordinates yields an
    /// isolation vector: unit evaluation, support within Hamming radius t.
    #[test]
    fn oa_gamma_isolates_any_seeded_target(params in oa_params(), seed in any::<u64>()) {
        let instance = oa::instance(&params).expect("instance builds");
        let targets = oa::canonical_indices(&params);
        let mut rng = sampler::substream_rng(seed, 1);
        let index = rng.random_range(0..targets.len());
        let target = &targets[index];
        let mut x: Vec<u32> = (0..params.n as usize)
            .map(|_| rng.random_range(1..=params.q))
            .collect();
        for (slot, &coord) in target.coords.iter().enumerate() {
            x[coord] = target.values[slot];
        }
        let gamma = oa::gamma(&params, &x, &target.coords).expect("helper word is valid");
        let unit = PhiVector::scaled_unit(instance.dim(), index, BigInt::from(1));
        prop_assert_eq!(phi_of(&instance, &gamma), unit);
        for (key, _) in gamma.iter() {
            let ElementKey::Word(word) = key else {
                unreachable!("word instances only hold words")
            };
            let moved = word.iter().zip(&x).filter(|(a, b)| a != b).count();
            prop_assert!(moved <= params.t as usize, "support left the Hamming ball");
        }
    }

    /// Any disjoint helper block yields a design isolation vector scaled by
    /// m = k!/(k-t)!.
    #[test]
    fn design_gamma_isolates_any_disjoint_helper(
        (v, k, t) in design_triples(),
        seed in any::<u64>(),
    ) {
        prop_assume!(v - t >= k);
        let params = DesignParams::new(v, k, t).expect("triple is valid");
        let instance = design::instance(&params).expect("instance builds");
        let tsets = design::canonical_tsets(&params);
        let mut rng = sampler::substream_rng(seed, 2);
        let index = rng.random_range(0..tsets.len());
        let a = &tsets[index];
        let mut rest: Vec<u32> = (1..=v).filter(|point| !a.contains(point)).collect();
        for slot in 0..k as usize {
            let other = rng.random_range(slot..rest.len());
            rest.swap(slot, other);
        }
        let mut x: Vec<u32> = rest[..k as usize].to_vec();
        x.sort_unstable();
        let gamma = design::gamma(&params, &x, a).expect("helper is disjoint");
        let scale: u64 = (u64::from(k) - u64::from(t) + 1..=u64::from(k)).product();
        let unit = PhiVector::scaled_unit(instance.dim(), index, BigInt::from(scale));
        prop_assert_eq!(phi_of(&instance, &gamma), unit);
    }

    /// E[X] is the exact rational (n/|B|)·φ(B), and it is integral exactly
    /// when the measured minimal divisor divides n.
    #[test]
    fn expectation_arithmetic_is_exact(params in oa_params(), n in 1u64..=64) {
        let instance = oa::instance(&params).expect("instance builds");
        prop_assume!(n <= instance.size());
        let expected = instance.expected_vector(n).expect("n in range");
        let totals = instance.phi_total().expect("totals compute");
        let size = BigInt::from(instance.size());
        for (entry, total) in expected.entries.iter().zip(totals.entries()) {
            let scaled = entry * &size;
            prop_assert_eq!(scaled, BigRational::from_integer(total * BigInt::from(n)));
        }
        let minimal = instance
            .check_divisibility()
            .expect("divisibility measures")
            .minimal_c0;
        let divides = (BigInt::from(n) % &minimal).is_zero();
        prop_assert_eq!(expected.as_integer().is_some(), divides);
    }

    /// Evaluation is linear over sparse domain vectors.
    #[test]
    fn evaluation_is_linear(
        seed in any::<u64>(),
        coeff_a in -5i64..=5,
        coeff_b in -5i64..=5,
    ) {
        let instance = oa::instance(&OaParams::new(2, 3, 1).expect("valid")).expect("builds");
        let mut rng = sampler::substream_rng(seed, 3);
        let sparse = |stream: &mut rand_chacha::ChaCha8Rng| {
            let mut vector = SparseDomainVector::new();
            for _ in 0..stream.random_range(1..=4) {
                let index = stream.random_range(0..instance.size());
                let key = instance.element_at(index).expect("index in range");
                vector.add_term(key, BigInt::from(stream.random_range(-3i64..=3)));
            }
            vector
        };
        let u = sparse(&mut rng);
        let w = sparse(&mut rng);
        let mut combined = SparseDomainVector::new();
        combined.add_scaled(&BigInt::from(coeff_a), &u);
        combined.add_scaled(&BigInt::from(coeff_b), &w);
        let mut by_hand = PhiVector::zeros(instance.dim());
        by_hand.add_scaled(&BigInt::from(coeff_a), &phi_of(&instance, &u));
        by_hand.add_scaled(&BigInt::from(coeff_b), &phi_of(&instance, &w));
        prop_assert_eq!(phi_of(&instance, &combined), by_hand);
    }

    /// Substreams are a pure function of (master, index), and distinct
    /// indices give distinct streams.
    #[test]
    fn substreams_are_reproducible(master in any::<u64>(), index in any::<u64>()) {
        let draw = |master: u64, index: u64| -> Vec<u64> {
            let mut rng = sampler::substream_rng(master, index);
            (0..8).map(|_| rng.random()).collect()
        };
        prop_assert_eq!(draw(master, index), draw(master, index));
        let neighbor = index.wrapping_add(1);
        prop_assert_ne!(draw(master, index), draw(master, neighbor));
    }

    /// Torus addition is commutative, associative, and inverted by
    /// scaling with -1 — on the canonical representatives, not just
    /// modulo 1.
    #[test]
    fn torus_points_form_a_group(
        a in prop::collection::vec((-8i64..=8, 1i64..=16), 3),
        b in prop::collection::vec((-8i64..=8, 1i64..=16), 3),
        c in prop::collection::vec((-8i64..=8, 1i64..=16), 3),
    ) {
        let x = TorusPoint::from_fractions(&a).expect("denominators are positive");
        let y = TorusPoint::from_fractions(&b).expect("denominators are positive");
        let z = TorusPoint::from_fractions(&c).expect("denominators are positive");
        let xy = x.add(&y).expect("dimensions match");
        let yx = y.add(&x).expect("dimensions match");
        prop_assert_eq!(&xy, &yx);
        let left = xy.add(&z).expect("dimensions match");
        let right = x.add(&y.add(&z).expect("dimensions match")).expect("dimensions match");
        prop_assert_eq!(left, right);
        let minus = x.scale(&BigRational::from_integer(BigInt::from(-1)));
        prop_assert!(x.add(&minus).expect("dimensions match").is_zero());
    }
}
