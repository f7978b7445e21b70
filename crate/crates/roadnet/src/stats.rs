//! Small sample-statistics helpers shared by archive spread reporting
//! and the benchmark tables.

/// Arithmetic mean; panics on empty input.
pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "mean of empty sample");
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two
/// observations.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        assert!(!xs.is_empty(), "std of empty sample");
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Quantile by linear interpolation between order statistics
/// (type 7, the spreadsheet convention): h = (n - 1) p.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// First quartile, median, third quartile.
pub fn quartiles(xs: &[f64]) -> (f64, f64, f64) {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable samples"));
    (
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    )
}

/// Interquartile range.
pub fn iqr(xs: &[f64]) -> f64 {
    let (q1, _, q3) = quartiles(xs);
    q3 - q1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_std_reference_values() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        assert!((sample_std(&xs) - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn singleton_sample() {
        assert_eq!(mean(&[3.5]), 3.5);
        assert_eq!(sample_std(&[3.5]), 0.0);
        assert_eq!(quartiles(&[3.5]), (3.5, 3.5, 3.5));
    }

    #[test]
    fn quartiles_interpolate() {
        let (q1, med, q3) = quartiles(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!((q1, med, q3), (1.75, 2.5, 3.25));
        let (q1, med, q3) = quartiles(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        assert_eq!((q1, med, q3), (2.0, 3.0, 4.0));
    }

    #[test]
    fn iqr_matches_quartiles() {
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0]), 1.5);
        assert_eq!(iqr(&[7.0, 7.0, 7.0]), 0.0);
    }
}
