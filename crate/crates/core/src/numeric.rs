//! Order-independent floating-point sums.

/// Correctly rounded sum of `terms` (Shewchuk's partials algorithm, as in
/// Python's `math.fsum`). The result does not depend on term order.
pub fn exact_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in terms {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if let Some(&last) = partials.last() {
        if (lo < 0.0 && last < 0.0) || (lo > 0.0 && last > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100, 1e-100]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([]), 0.0);
    }

    proptest! {
        #[test]
        fn order_independent(mut v in proptest::collection::vec(0.0f64..1e6, 0..40)) {
            let a = exact_sum(v.iter().copied());
            v.reverse();
            prop_assert_eq!(a, exact_sum(v.iter().copied()));
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assert_eq!(a, exact_sum(v.iter().copied()));
        }
    }
}
