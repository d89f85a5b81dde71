//! Deterministic reductions.

const BLOCK: usize = 32;

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_for_small_inputs() {
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 45.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn beats_naive_on_long_sums() {
        let v = vec![0.1; 1 << 20];
        let exact = 0.1 * (1u64 << 20) as f64;
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - exact).abs() <= (naive - exact).abs());
    }
}
