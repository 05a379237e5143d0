use cryptrisc::sca::{pearson, welch_t_column};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn column() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, 3..40)
}

proptest! {
    #[test]
    fn pearson_affine_rescaling(
        xy in column().prop_flat_map(|x| { let n = x.len(); (Just(x), proptest::collection::vec(-100.0f64..100.0, n)) }),
        a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
        b in -1e3f64..1e3,
    ) {
        let (x, y) = xy;
        let r = pearson(&x, &y);
        let scaled: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!(close(pearson(&scaled, &y), a.signum() * r));
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
    }

    #[test]
    fn welch_sign_follows_scale(a in column(), b in column(), c in 0.01f64..50.0) {
        let t = welch_t_column(&a, &b).unwrap();
        let neg = |v: &[f64]| v.iter().map(|x| -c * x).collect::<Vec<_>>();
        let flipped = welch_t_column(&neg(&a), &neg(&b)).unwrap();
        prop_assert!(close(flipped, -t));
    }
}
