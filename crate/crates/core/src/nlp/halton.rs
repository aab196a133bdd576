const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in the `dim`-th prime base (`dim < 8`).
pub fn halton(index: u64, dim: usize) -> f64 {
    let base = PRIMES[dim] as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut i = index;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let b2: Vec<f64> = (1..5).map(|i| halton(i, 0)).collect();
        assert_eq!(b2, vec![0.5, 0.25, 0.75, 0.125]);
        assert!((halton(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((halton(5, 1) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }
}
