//! Small statistical helpers shared by the runner and the acceptance suite.

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value"));
    quantile(&v, 0.5)
}

/// One-sided paired sign test: p-value for the hypothesis that `a` does not
/// tend to be smaller than `b`, i.e. `P(Bin(n, 1/2) >= wins)` over tied-free
/// pairs.
pub fn sign_test_less(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut n = 0u32;
    let mut wins = 0u32;
    for (&x, &y) in a.iter().zip(b) {
        if x < y {
            wins += 1;
            n += 1;
        } else if x > y {
            n += 1;
        }
    }
    binomial_upper_tail(n, wins)
}

/// `P(Bin(n, 1/2) >= k)` via the iterative pmf recurrence.
pub fn binomial_upper_tail(n: u32, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut pmf = 0.5f64.powi(n as i32);
    let mut tail = 0.0;
    for j in 0..=n {
        if j >= k {
            tail += pmf;
        }
        if j < n {
            pmf *= (n - j) as f64 / (j + 1) as f64;
        }
    }
    tail.min(1.0)
}

/// Ordinary least-squares slope of y against x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|&a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&sorted, 0.25), 2.0);
        assert_eq!(quantile(&sorted, 1.0), 5.0);
    }

    #[test]
    fn binomial_tail_known_values() {
        // P(Bin(4, 1/2) >= 2) = 11/16.
        assert!((binomial_upper_tail(4, 2) - 11.0 / 16.0).abs() < 1e-12);
        assert_eq!(binomial_upper_tail(10, 0), 1.0);
        // P(Bin(10, 1/2) >= 10) = 2^-10.
        assert!((binomial_upper_tail(10, 10) - 0.5f64.powi(10)).abs() < 1e-15);
    }

    #[test]
    fn sign_test_detects_dominance() {
        let a = vec![0.1; 20];
        let b = vec![0.2; 20];
        assert!(sign_test_less(&a, &b) < 1e-5);
        assert_eq!(sign_test_less(&b, &a), 1.0);
        // Ties are discarded.
        assert_eq!(sign_test_less(&a, &a), 1.0);
    }

    #[test]
    fn slope_of_exact_line() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert!((ols_slope(&x, &y) - 2.0).abs() < 1e-12);
    }
}
