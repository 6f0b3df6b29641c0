//! Unions of closed intervals on a line.

use crate::scalar::Scalar;

/// Sorts and merges overlapping or touching intervals.
pub fn merge<T: Scalar>(mut intervals: Vec<(T, T)>) -> Vec<(T, T)> {
    intervals.retain(|&(a, b)| a <= b);
    intervals.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite endpoints"));
    let mut out: Vec<(T, T)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Lebesgue measure of a finite union of intervals.
pub fn union_length<T: Scalar>(intervals: Vec<(T, T)>) -> T {
    merge(intervals)
        .into_iter()
        .fold(T::zero(), |acc, (a, b)| acc + (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merges_overlaps() {
        let m = merge(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0), (2.0, 2.5)]);
        assert_eq!(m, vec![(0.0, 2.5), (3.0, 4.0)]);
        assert_eq!(union_length(vec![(3.0, 4.0), (0.0, 1.0), (0.5, 2.0)]), 3.0);
        assert_eq!(union_length::<f64>(Vec::new()), 0.0);
    }

    proptest! {
        #[test]
        fn union_length_matches_fine_grid(
            raw in prop::collection::vec((0u32..200, 0u32..40), 0..20)
        ) {
            // Integer endpoints: a unit grid counts the union exactly.
            let intervals: Vec<(f64, f64)> =
                raw.iter().map(|&(a, l)| (a as f64, (a + l) as f64)).collect();
            let mut covered = vec![false; 260];
            for &(a, l) in &raw {
                for c in a..a + l {
                    covered[c as usize] = true;
                }
            }
            let want = covered.iter().filter(|&&c| c).count() as f64;
            prop_assert_eq!(union_length(intervals), want);
        }
    }
}
