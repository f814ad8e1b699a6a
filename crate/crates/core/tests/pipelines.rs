use proptest::prelude::*;
use sepcont_core::discrete::{approximate, convergence_certificate};
use sepcont_core::zerodim::tail_containment;
use sepcont_core::{
    run_zerodim, CantorPoint, ClopenSet, Compact, Dyadic, GroupElement, GroupSpec, ProbeGrid, SepFunction,
    SubbasicNbhd, ZeroDimConfig,
};

fn table_strategy(order: u32, depth: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..order, 1 << (2 * depth))
}

fn bits_point() -> impl Strategy<Value = CantorPoint> {
    (prop::collection::vec(any::<bool>(), 0..5), any::<bool>())
        .prop_map(|(pre, t)| CantorPoint::new(pre, vec![t]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn discrete_stages_settle_on_tables(values in table_strategy(4, 2)) {
        let group = GroupSpec::cyclic(4).unwrap();
        let f = SepFunction::table(&group, 2, values.into_iter().map(GroupElement::Index).collect()).unwrap();
        let approx = approximate(&f, 10, 16).unwrap();
        let reps = ProbeGrid::new(3).representatives().to_vec();
        for x in &reps {
            for y in &reps {
                prop_assert_eq!(approx.table(10).eval(x, y).unwrap(), f.eval(x, y).unwrap());
            }
        }
    }

    #[test]
    fn certificates_hold_from_their_stage(values in table_strategy(3, 1), x in bits_point(), fixed_x in any::<bool>()) {
        let group = GroupSpec::cyclic(3).unwrap();
        let f = SepFunction::table(&group, 1, values.into_iter().map(GroupElement::Index).collect()).unwrap();
        let approx = approximate(&f, 8, 16).unwrap();
        let whole = Compact::Set(ClopenSet::whole().into());
        let nb = if fixed_x {
            SubbasicNbhd::new(Compact::Point(x), whole, vec![]).unwrap()
        } else {
            SubbasicNbhd::new(whole, Compact::Point(x), vec![]).unwrap()
        };
        let cert = convergence_certificate(&f, &approx, &nb).unwrap();
        prop_assert!(cert.m <= 8);
        prop_assert!(cert.holds());
    }

    #[test]
    fn factors_telescope_and_respect_rates(values in table_strategy(6, 1)) {
        let group = GroupSpec::cyclic(6).unwrap();
        let f = SepFunction::table(&group, 1, values.into_iter().map(GroupElement::Index).collect()).unwrap();
        let run = run_zerodim(&f, &[], &ZeroDimConfig::new(3, 2)).unwrap();
        prop_assert!(run.passed());
        let reps = ProbeGrid::new(2).representatives().to_vec();
        let fact = &run.factorization;
        for x in &reps {
            for y in &reps {
                let mut acc = fact.approximants[0].eval(x, y).unwrap();
                for (n, g) in fact.factors.iter().enumerate() {
                    acc = group.mul(&acc, &g.eval(x, y).unwrap()).unwrap();
                    prop_assert_eq!(&acc, &fact.approximants[n + 1].eval(x, y).unwrap());
                }
            }
        }
    }

    #[test]
    fn real_tables_pass_the_tower(nums in prop::collection::vec(-8i128..8, 4)) {
        let f = SepFunction::table(
            &GroupSpec::Real,
            1,
            nums.into_iter().map(|k| GroupElement::Real(Dyadic::new(k, 3))).collect(),
        )
        .unwrap();
        let mut cfg = ZeroDimConfig::new(3, 2);
        cfg.levels = vec![1];
        let run = run_zerodim(&f, &[], &cfg).unwrap();
        prop_assert!(run.passed());
        prop_assert!(tail_containment(&run.tower, 1).unwrap().is_none());
    }
}
