mod common;

use proptest::prelude::*;
use tlfacp::trop::{scale, trop_add, trop_mul, vec_join, vec_meet};
use tlfacp::{is_feasible, objective, ExtScalar};

fn ext() -> impl Strategy<Value = ExtScalar<i64>> {
    prop_oneof![1 => Just(ExtScalar::NegInf), 6 => (-1000i64..1000).prop_map(ExtScalar::Finite)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn add_and_mul_laws(a in ext(), b in ext(), c in ext()) {
        let mul = |x: &ExtScalar<i64>, y: &ExtScalar<i64>| trop_mul(x, y).unwrap();
        prop_assert_eq!(trop_add(&a, &b), trop_add(&b, &a));
        prop_assert_eq!(trop_add(&trop_add(&a, &b), &c), trop_add(&a, &trop_add(&b, &c)));
        prop_assert_eq!(trop_add(&a, &a), a.clone());
        prop_assert_eq!(trop_add(&a, &ExtScalar::NegInf), a.clone());
        prop_assert_eq!(mul(&a, &b), mul(&b, &a));
        prop_assert_eq!(mul(&mul(&a, &b), &c), mul(&a, &mul(&b, &c)));
        prop_assert_eq!(mul(&a, &ExtScalar::zero()), a.clone());
        prop_assert_eq!(mul(&a, &ExtScalar::NegInf), ExtScalar::NegInf);
        prop_assert_eq!(mul(&a, &trop_add(&b, &c)), trop_add(&mul(&a, &b), &mul(&a, &c)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn objective_is_submodular_and_shift_covariant(seed in any::<u64>(), alpha in -20i64..20) {
        let inst = common::random_instance(seed, 5, 0, 4, 5, false);
        let mut r = common::rng(seed);
        let n = inst.n();
        let x = common::random_point(&mut r, n, -10, 10);
        let y = common::random_point(&mut r, n, -10, 10);
        let f = |z| objective(&inst, z).unwrap();
        let join = vec_join(&x, &y).unwrap();
        let meet = vec_meet(&x, &y).unwrap();
        prop_assert!(f(&x) + f(&y) >= f(&join) + f(&meet));
        let excess = inst.degree_plus() as i64 - inst.degree() as i64;
        let shifted = scale(&alpha, &x).unwrap();
        prop_assert_eq!(f(&shifted), f(&x) + alpha * excess);
    }

    #[test]
    fn solutions_form_a_cone(seed in any::<u64>(), alpha in -20i64..20) {
        let inst = common::random_instance(seed, 4, 4, 2, 3, false);
        if let Some(x0) = common::full_support_point(&inst) {
            let mut r = common::rng(seed);
            let pts = common::feasible_points(&inst, &[x0], 6, &mut r);
            for x in &pts {
                prop_assert!(is_feasible(&inst, &scale(&alpha, x).unwrap()).unwrap());
                for y in &pts {
                    prop_assert!(is_feasible(&inst, &vec_join(x, y).unwrap()).unwrap());
                }
            }
        }
    }
}
