use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rbs_core::graded_linear::{random_map, random_tensor, BasedAlgebra, GradedSpace, MultiMap};
use rbs_core::homotopy_rbs_checker::{HomotopyRBS, HomotopyRbsJson, Side};
use rbs_core::linfty_deformation::{random_cochain, test_space, CochainElement, CochainLInfinity, Part};
use rbs_core::rbs_minimal_model::{diff_tree, Presentation};
use rbs_core::tree_operad::Tree;
use rbs_core::yang_baxter::{f_inverse, f_map, InfinityYBPair};
use rbs_core::Rational;

type Q = Rational;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn f_is_invertible_on_graded_matrices(seed in any::<u64>(), order in 2usize..=3, deg in -1i64..=1) {
        let alg = BasedAlgebra::<Q>::matrix(&GradedSpace::with_degrees(&[0, 1]));
        let mut r = rng(seed);
        let t = random_tensor(&alg, order, deg, &mut r);
        let m = f_map(&t, &alg, deg).unwrap();
        prop_assert_eq!(f_inverse(&m, &alg).unwrap(), t);
    }

    #[test]
    fn mc_residual_is_the_evaluated_differential(seed in any::<u64>()) {
        let sp = test_space(2);
        let linf = CochainLInfinity::<Q>::new(sp.clone(), 3);
        let mut r = rng(seed);
        let slots: Vec<_> = Part::ALL.iter().flat_map(|&p| (1..=3).map(move |n| (p, n))).collect();
        let a = CochainElement::<Q>::random(&sp, -1, 3, &slots, &mut r);
        prop_assert_eq!(linf.mc_residual(&a).unwrap(), linf.evaluated_differential(&a).unwrap());
    }

    #[test]
    fn brackets_are_graded_antisymmetric_in_two_arguments(seed in any::<u64>()) {
        let sp = test_space(2);
        let linf = CochainLInfinity::<Q>::new(sp.clone(), 3);
        let mut r = rng(seed);
        let x = random_cochain::<Q, _>(&sp, 3, &mut r);
        let y = random_cochain::<Q, _>(&sp, 3, &mut r);
        let xy = linf.bracket(&[&x, &y]).unwrap();
        let yx = linf.bracket(&[&y, &x]).unwrap();
        let sign = if (x.degree * y.degree) % 2 == 0 { -1 } else { 1 };
        prop_assert_eq!(yx, xy.scaled(&Q::from_integer(sign.into())));
    }

    #[test]
    fn homotopy_structures_survive_json(seed in any::<u64>()) {
        let sp = GradedSpace::with_degrees(&[0, 1]);
        let mut r = rng(seed);
        let mut h = HomotopyRBS::<Q>::new(sp.clone(), 3);
        for n in 1..=3 {
            h.m.insert(n, random_map(&sp, n, n as i64 - 2, &mut r));
            h.r.insert(n, random_map(&sp, n, n as i64 - 1, &mut r));
        }
        let back = HomotopyRbsJson::from_structure(&h).build::<Q>(3).unwrap();
        for n in 1..=3 {
            prop_assert_eq!(back.m(n), h.m(n));
            prop_assert_eq!(back.r(n), h.r(n));
            prop_assert_eq!(back.s(n), MultiMap::zero(n, n as i64 - 1));
        }
    }

    #[test]
    fn chi_image_of_a_pair_satisfies_the_dg_identities_iff_the_pair_does(seed in any::<u64>()) {
        let alg = BasedAlgebra::<Q>::matrix(&GradedSpace::with_degrees(&[0, 1]));
        let mut r = rng(seed);
        let d = random_tensor(&alg, 1, -1, &mut r);
        let mut p = InfinityYBPair::new(alg.clone(), d, 3);
        for n in 2..=3 {
            p.r.insert(n, random_tensor(&alg, n, n as i64 - 2, &mut r));
            p.s.insert(n, random_tensor(&alg, n, n as i64 - 2, &mut r));
        }
        let h = p.chi().unwrap();
        for side in [Side::R, Side::S] {
            for n in 1..=2 {
                let t = p.aybe_residual(side, n).unwrap();
                prop_assert_eq!(t.is_zero(), h.dga_residual(side, n).unwrap().is_zero());
            }
        }
    }
}

#[test]
fn differential_squares_to_zero_on_composite_trees() {
    for s in ["m2(R1(1), S2(2, 3))", "R2(m2(1, 2), R1(3))", "m3(1, S1(2), R2(3, 4))"] {
        let t = Tree::parse(s).unwrap();
        let d = diff_tree::<Q>(Presentation::Mrs, &t).unwrap();
        assert!(!d.is_zero(), "{s}");
        let mut dd = rbs_core::tree_operad::OperadElement::zero(d.arity());
        for (tree, c) in d.terms() {
            dd = dd + diff_tree::<Q>(Presentation::Mrs, tree).unwrap().scaled(c);
        }
        assert!(dd.is_zero(), "{s}");
    }
}
