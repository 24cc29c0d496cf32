use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subelliptic_core::fredholm::{
    logarithmic_property, random_finite_rank, random_oblique_projector, random_orthogonal_projector, relative_index_kernel, relative_index_trace,
    ProjectorPair,
};
use subelliptic_core::linalg::{identity, max_abs};
use subelliptic_core::symbol::{Chirality, Covector, Side, SymbolAlgebra};
use subelliptic_core::topo::{ind_from_c1, ind_from_c2, rind_3d, rind_weinstein, FillingDescriptor, SpinCNumbers};
use subelliptic_core::{FockSpace, FockSpaceConfig, ModelSpace, C64};

fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, ..Config::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn adjoint_reverses_composition(m in 1usize..=3, j in 1usize..=3, k in 1usize..=3) {
        let space = FockSpace::new(FockSpaceConfig::new(m, 7, 2).unwrap());
        let (j, k) = (1 + (j - 1) % m, 1 + (k - 1) % m);
        let a = space.creation(j).unwrap().compose(&space.harmonic_oscillator()).unwrap();
        let b = space.annihilation(k).unwrap();
        let lhs = a.compose(&b).unwrap().adjoint();
        let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        prop_assert!(space.creation(j).unwrap().adjoint().bit_equal(&space.annihilation(j).unwrap()));
    }

    #[test]
    fn clifford_relations(m in 1usize..=3, j in 1usize..=3, k in 1usize..=3) {
        let space = ModelSpace::new(FockSpaceConfig::new(m, 4, 2).unwrap());
        let (j, k) = (1 + (j - 1) % m, 1 + (k - 1) % m);
        let e = space.contract(j).unwrap();
        let eps = space.wedge(k).unwrap();
        let anti = e.anticommutator(&eps).unwrap();
        let expected = if j == k { space.identity() } else { space.zero() };
        prop_assert_eq!(anti.sub(&expected).unwrap().max_abs(), 0.0);
        prop_assert_eq!(e.anticommutator(&space.contract(k).unwrap()).unwrap().max_abs(), 0.0);
        prop_assert_eq!(eps.anticommutator(&space.wedge(j).unwrap()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn calderon_symbol_is_homogeneous_idempotent_projector(
        n in 2usize..=3,
        xc in -3.0f64..3.0,
        perp in prop::collection::vec(-3.0f64..3.0, 4),
        lambda in 0.1f64..10.0,
    ) {
        let alg = SymbolAlgebra::new(n).unwrap();
        let xi = Covector::boundary(xc, perp[..2 * (n - 1)].to_vec());
        prop_assume!(xi.prime_norm() > 1e-3);
        for ch in [Chirality::Even, Chirality::Odd] {
            let p = alg.calderon_symbol0(ch, Side::Plus, &xi).unwrap().matrix;
            let q = alg.calderon_symbol0(ch, Side::Minus, &xi).unwrap().matrix;
            let scaled = alg.calderon_symbol0(ch, Side::Plus, &xi.scaled(lambda)).unwrap().matrix;
            prop_assert!(max_abs(&(&p * &p - &p)) < 1e-12);
            prop_assert!(max_abs(&(&p + &q - alg.identity())) < 1e-12);
            prop_assert!(max_abs(&(scaled - &p)) < 1e-12);
        }
    }
}

fn pair_strategy() -> impl Strategy<Value = (u64, usize, usize, usize, bool)> {
    (any::<u64>(), 1usize..=24).prop_flat_map(|(seed, dim)| (Just(seed), Just(dim), 0..=dim, 0..=dim, any::<bool>()))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn relative_index_identities((seed, dim, kp, kr, oblique) in pair_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_orthogonal_projector(&mut rng, dim, kp);
        let r = if oblique { random_oblique_projector(&mut rng, dim, kr) } else { random_orthogonal_projector(&mut rng, dim, kr) };
        let expected = kp as i64 - kr as i64;
        prop_assert_eq!(relative_index_kernel(&p, &r).unwrap().index, expected);
        prop_assert_eq!(relative_index_kernel(&p.complement(), &r.complement()).unwrap().index, -expected);
        let pert = random_finite_rank(&mut rng, dim, 2) * C64::new(0.2, 0.0);
        let plain = ProjectorPair::new(p.clone(), r.clone(), None).unwrap();
        let perturbed = ProjectorPair::new(p, r, Some(&pert)).unwrap();
        prop_assert_eq!(relative_index_trace(&plain).unwrap().index, expected);
        prop_assert_eq!(relative_index_trace(&perturbed).unwrap().index, expected);
        prop_assert!(perturbed.remainder_defect() < 1e-10);
    }

    #[test]
    fn logarithmic_law_holds((seed, dim, kp, kr, _) in pair_strategy(), kq_frac in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kq = (kq_frac * dim as f64).round() as usize;
        let p = random_orthogonal_projector(&mut rng, dim, kp);
        let q = random_oblique_projector(&mut rng, dim, kq);
        let r = random_orthogonal_projector(&mut rng, dim, kr);
        let rep = logarithmic_property(&p, &q, &r).unwrap();
        prop_assert!(rep.holds);
        prop_assert_eq!(rep.composite_index, kp as i64 - kr as i64);
    }
}

fn descriptor() -> impl Strategy<Value = FillingDescriptor> {
    (-20i64..20, -20i64..20, 0u64..5).prop_map(|(s, e, h)| FillingDescriptor::new(s, e, h))
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn rind_3d_is_antisymmetric_and_a_cocycle(x0 in descriptor(), x1 in descriptor(), x2 in descriptor()) {
        if let Ok(v) = rind_3d(&x0, &x1) {
            prop_assert_eq!(rind_3d(&x1, &x0), Ok(-v));
            if let (Ok(a), Ok(b)) = (rind_3d(&x1, &x2), rind_3d(&x0, &x2)) {
                prop_assert_eq!(b, v + a);
            }
        }
        prop_assert_eq!(rind_3d(&x0, &x0), Ok(0));
    }

    #[test]
    fn characteristic_formulas_agree(c1 in -200i64..200, s in -50i64..50, chi in -50i64..50) {
        let num = c1 - 3 * s - 2 * chi;
        prop_assume!(num % 4 == 0);
        let nums = SpinCNumbers::new(c1, num / 4, s, chi);
        match (ind_from_c1(&nums), ind_from_c2(&nums)) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "gates disagree: {:?} {:?}", a, b),
        }
    }

    #[test]
    fn stein_fillings_do_not_shift_the_glued_index(ind in -100i64..100, s0 in -9i64..9, e0 in -9i64..9, s1 in -9i64..9, e1 in -9i64..9) {
        let x0 = FillingDescriptor::stein(s0, e0);
        let x1 = FillingDescriptor::stein(s1, e1);
        prop_assert_eq!(rind_weinstein(ind, &x0, &x1), Ok(ind));
    }
}

#[test]
fn identity_is_neutral_for_compose() {
    let space = FockSpace::new(FockSpaceConfig::new(2, 6, 2).unwrap());
    let a = space.creation(1).unwrap().compose(&space.annihilation(2).unwrap()).unwrap();
    assert!(space.identity().compose(&a).unwrap().bit_equal(&a));
    assert!(a.adjoint().adjoint().bit_equal(&a));
    let d = DMatrix::<C64>::zeros(0, 0);
    assert_eq!(d, identity(0));
}
