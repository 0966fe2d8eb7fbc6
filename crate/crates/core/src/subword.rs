//! The scattered-subword order.

/// `u ⪯ v`: `u` is obtained from `v` by deleting letters.
pub fn subword_leq<T: PartialEq>(u: &[T], v: &[T]) -> bool {
    let mut it = v.iter();
    u.iter().all(|a| it.any(|b| b == a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basics() {
        assert!(subword_leq::<char>(&[], &['x']));
        assert!(subword_leq(&['a', 'b'], &['a', 'c', 'b']));
        assert!(!subword_leq(&['b', 'a'], &['a', 'b']));
    }

    proptest! {
        #[test]
        fn partial_order(u in prop::collection::vec(0u8..3, 0..6),
                         v in prop::collection::vec(0u8..3, 0..6),
                         w in prop::collection::vec(0u8..3, 0..6)) {
            prop_assert!(subword_leq(&u, &u));
            if subword_leq(&u, &v) && subword_leq(&v, &u) {
                prop_assert_eq!(&u, &v);
            }
            if subword_leq(&u, &v) && subword_leq(&v, &w) {
                prop_assert!(subword_leq(&u, &w));
            }
        }
    }
}
