mod common;

use proptest::prelude::*;
use tlfacp::trop::{trop_det, trop_det_dp, TropMatrix};

fn matrix() -> impl Strategy<Value = TropMatrix<i64>> {
    (1usize..=6).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(proptest::option::weighted(0.8, -4i64..4), n), n)
            .prop_map(move |rows| TropMatrix::from_options(n, rows).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dp_agrees_with_permutations(a in matrix()) {
        let full = trop_det(&a).unwrap();
        let (value, singular) = trop_det_dp(&a, 0.0).unwrap();
        prop_assert_eq!(full.value, value);
        prop_assert_eq!(full.singular, singular);
    }
}
