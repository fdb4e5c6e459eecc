use num::{BigRational, FromPrimitive, Signed};
use proptest::collection::vec;
use proptest::prelude::*;

use plausival::boolean::AtomSpace;
use plausival::rational::{format_rat, parse_rat};
use plausival::unknowns::Unknown;
use plausival::{PVModel, PlausibleValue, Proposition, Rat};

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-200i64..=200, 1i64..=40).prop_map(|(n, d)| {
        BigRational::new(n.into(), d.into())
    })
}

fn arb_pos_rat() -> impl Strategy<Value = Rat> {
    (1i64..=200, 1i64..=40).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

// a space, a strictly positive model on it, and a handful of unknowns
fn arb_model_and_values(
    unknown_count: usize,
) -> impl Strategy<Value = (PVModel, Vec<Vec<Rat>>)> {
    (1usize..=5).prop_flat_map(move |n| {
        (
            vec(arb_pos_rat(), n),
            vec(vec(arb_rat(), n), unknown_count),
        )
            .prop_map(move |(weights, values)| {
                let space = AtomSpace::with_count(n).unwrap();
                let model = PVModel::from_weights(&space, weights).unwrap();
                (model, values)
            })
    })
}

proptest! {
    #[test]
    fn rational_text_round_trips(r in arb_rat()) {
        prop_assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
    }

    #[test]
    fn unknown_ring_laws(
        (model, values) in arb_model_and_values(3),
        c in arb_rat(),
    ) {
        let space = model.space();
        let x = Unknown::new(space, values[0].clone()).unwrap();
        let y = Unknown::new(space, values[1].clone()).unwrap();
        let z = Unknown::new(space, values[2].clone()).unwrap();

        prop_assert_eq!(x.add(&y).unwrap(), y.add(&x).unwrap());
        prop_assert_eq!(x.mul(&y).unwrap(), y.mul(&x).unwrap());
        prop_assert_eq!(
            x.add(&y).unwrap().add(&z).unwrap(),
            x.add(&y.add(&z).unwrap()).unwrap()
        );
        prop_assert_eq!(
            x.mul(&y.add(&z).unwrap()).unwrap(),
            x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap()
        );
        // scaling is multiplication by the constant unknown
        let k = Unknown::constant(space, c.clone());
        prop_assert_eq!(x.scale(&c), x.mul(&k).unwrap());
    }

    #[test]
    fn indicator_lattice_homomorphism(
        (model, _) in arb_model_and_values(0),
        mask_a in any::<u64>(),
        mask_b in any::<u64>(),
    ) {
        let space = model.space();
        let full = (1u64 << space.len()) - 1;
        let a = Proposition::from_mask(space, mask_a & full);
        let b = Proposition::from_mask(space, mask_b & full);
        let ia = Unknown::indicator(&a);
        let ib = Unknown::indicator(&b);
        // I_{A∧B} = I_A·I_B and I_{A∨B} = I_A + I_B − I_A·I_B
        prop_assert_eq!(
            Unknown::indicator(&a.and(&b).unwrap()),
            ia.mul(&ib).unwrap()
        );
        let union = Unknown::indicator(&a.or(&b).unwrap());
        let sum = ia.add(&ib).unwrap();
        let minus_prod = ia.mul(&ib).unwrap().scale(&-Rat::from_i64(1).unwrap());
        prop_assert_eq!(union, sum.add(&minus_prod).unwrap());
    }

    #[test]
    fn pv_is_linear_monotone_and_sandwiched(
        (model, values) in arb_model_and_values(2),
        c in arb_rat(),
        mask in any::<u64>(),
    ) {
        let space = model.space();
        let full = (1u64 << space.len()) - 1;
        let cond = Proposition::from_mask(space, (mask & full).max(1));
        let x = Unknown::new(space, values[0].clone()).unwrap();
        let y = Unknown::new(space, values[1].clone()).unwrap();

        // linearity
        let lhs = model.pv(&x.add(&y).unwrap(), &cond).unwrap();
        prop_assert_eq!(
            &lhs,
            &(model.pv(&x, &cond).unwrap() + model.pv(&y, &cond).unwrap())
        );
        prop_assert_eq!(
            model.pv(&x.scale(&c), &cond).unwrap(),
            c * model.pv(&x, &cond).unwrap()
        );

        // order preservation via a nonnegative gap
        let gap = Unknown::new(
            space,
            values[1].iter().map(|v| v.abs()).collect(),
        )
        .unwrap();
        let bigger = x.add(&gap).unwrap();
        prop_assert!(model.pv(&x, &cond).unwrap() <= model.pv(&bigger, &cond).unwrap());

        // the conditional average stays between the extremes on the condition
        let on_cond: Vec<&Rat> = cond
            .atoms()
            .map(|i| &values[0][i])
            .collect();
        let lo = on_cond.iter().min().unwrap();
        let hi = on_cond.iter().max().unwrap();
        let pv = model.pv(&x, &cond).unwrap();
        prop_assert!(**lo <= pv && pv <= **hi);
    }

    #[test]
    fn pl_is_a_unit_interval_probability(
        (model, _) in arb_model_and_values(0),
        mask_a in any::<u64>(),
        mask_b in any::<u64>(),
    ) {
        let space = model.space();
        let full = (1u64 << space.len()) - 1;
        let a = Proposition::from_mask(space, mask_a & full);
        let b = Proposition::from_mask(space, (mask_b & full).max(1));
        let pl = model.pl(&a, &b).unwrap();
        prop_assert!(!pl.is_negative() && pl <= Rat::from_i64(1).unwrap());
        // complement rule
        prop_assert_eq!(
            pl + model.pl(&a.complement(), &b).unwrap(),
            Rat::from_i64(1).unwrap()
        );
        // conditioning collapses: PL(A|B) = PL(A∧B|B)
        prop_assert_eq!(
            model.pl(&a, &b).unwrap(),
            model.pl(&a.and(&b).unwrap(), &b).unwrap()
        );
    }
}
