//! Shared scalar statistics and preprocessing transforms.
//!
//! One convention throughout the crate: the sample standard deviation uses
//! the N-1 denominator, central moments for skewness/kurtosis use the N
//! denominator.

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance (N-1 denominator). Needs at least two points.
pub fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn sample_std(v: &[f64]) -> f64 {
    sample_variance(v).sqrt()
}

/// k-th central moment with the N denominator.
pub fn central_moment(v: &[f64], k: u32) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(k as i32)).sum::<f64>() / v.len() as f64
}

/// Median; for even lengths the mean of the two central order statistics.
/// Runs in O(N) via selection. Caller guarantees non-empty, finite input.
pub fn median(v: &[f64]) -> f64 {
    let mut buf = v.to_vec();
    let n = buf.len();
    let (_, &mut hi, _) = buf.select_nth_unstable_by(n / 2, |a, b| a.total_cmp(b));
    if n % 2 == 1 {
        hi
    } else {
        // largest element of the left partition is the other central statistic
        let lo = buf[..n / 2]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

/// Center to mean 0 and scale to unit sample standard deviation.
/// Returns `None` for a constant series (zero variance).
pub fn zscore(v: &[f64]) -> Option<Vec<f64>> {
    let m = mean(v);
    let s = sample_std(v);
    if !(s > 0.0) {
        return None;
    }
    Some(v.iter().map(|x| (x - m) / s).collect())
}

/// Running sum: out[t] = v[0] + ... + v[t].
pub fn cumulative_sum(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    v.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zscore_hand_example() {
        let z = zscore(&[1.0, 2.0, 3.0]).unwrap();
        assert_relative_eq!(z[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(z[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(z[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zscore_constant_is_none() {
        assert!(zscore(&[5.0, 5.0, 5.0]).is_none());
    }

    #[test]
    fn zscore_normalizes() {
        let v = [3.1, -0.4, 7.9, 2.2, 2.3, -11.0];
        let z = zscore(&v).unwrap();
        assert_relative_eq!(mean(&z), 0.0, epsilon = 1e-12);
        assert_relative_eq!(sample_std(&z), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zscore_idempotent() {
        let v = [3.0, 1.0, 4.0, 1.0, 5.0];
        let z1 = zscore(&v).unwrap();
        let z2 = zscore(&z1).unwrap();
        for (a, b) in z1.iter().zip(&z2) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cumsum_examples() {
        assert_eq!(cumulative_sum(&[1.0, 1.0, 1.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(cumulative_sum(&[-1.0, 1.0]), vec![-1.0, 0.0]);
        let v = [0.25, -3.5, 2.0, 9.75];
        let cs = cumulative_sum(&v);
        assert_relative_eq!(*cs.last().unwrap(), v.iter().sum::<f64>(), epsilon = 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }
}
