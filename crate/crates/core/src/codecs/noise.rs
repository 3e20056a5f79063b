//! Random bit deletion.

use rand::seq::index;
use rand::Rng;

use crate::bits::BitVector;

/// Removes each active bit independently with probability `p_del`.
///
/// Panics if `p_del` is outside `[0, 1]`.
pub fn delete_bits<R: Rng + ?Sized>(code: &BitVector, p_del: f64, rng: &mut R) -> BitVector {
    assert!((0.0..=1.0).contains(&p_del), "p_del must lie in [0, 1]");
    code.retain(|_| !rng.random_bool(p_del))
}

/// Keeps exactly `target` active bits chosen uniformly without replacement,
/// or the code unchanged when it already has at most `target` bits.
pub fn sparsify<R: Rng + ?Sized>(code: &BitVector, target: usize, rng: &mut R) -> BitVector {
    let ones = code.count_ones();
    if ones <= target {
        return code.clone();
    }
    let mut keep: Vec<usize> = index::sample(rng, ones, target)
        .into_iter()
        .map(|k| code.active()[k])
        .collect();
    keep.sort_unstable();
    BitVector::from_active(code.len(), keep).expect("subset of a valid code")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full(n: usize) -> BitVector {
        BitVector::from_active(n, (0..n).collect()).unwrap()
    }

    #[test]
    fn delete_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let code = BitVector::from_active(50, vec![1, 7, 20, 49]).unwrap();
        assert_eq!(delete_bits(&code, 0.0, &mut rng), code);
        assert!(delete_bits(&code, 1.0, &mut rng).is_zero());
    }

    #[test]
    fn delete_three_quarters_is_binomial() {
        // survivors ~ Binomial(100, 0.25): mean 25, variance 18.75
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let code = full(100);
        let trials = 4000;
        let counts: Vec<f64> = (0..trials)
            .map(|_| {
                let out = delete_bits(&code, 0.75, &mut rng);
                assert!(out.is_subset_of(&code));
                out.count_ones() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / trials as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        // standard error of the mean is ~0.068
        assert!((mean - 25.0).abs() < 0.35, "mean {mean}");
        assert!((var - 18.75).abs() < 2.5, "variance {var}");
    }

    #[test]
    fn sparsify_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let code = BitVector::from_active(20, vec![2, 3, 5, 7, 11, 13]).unwrap();
        assert_eq!(sparsify(&code, 6, &mut rng), code);
        assert_eq!(sparsify(&code, 100, &mut rng), code);
        assert!(sparsify(&code, 0, &mut rng).is_zero());
    }

    #[test]
    fn sparsify_draws_exact_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let code = BitVector::from_active(40, (0..10).map(|i| i * 4).collect()).unwrap();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            let out = sparsify(&code, 4, &mut rng);
            assert_eq!(out.count_ones(), 4);
            assert!(out.is_subset_of(&code));
            seen.insert(out.active().to_vec());
        }
        // C(10, 4) = 210 subsets; 2000 uniform draws miss any given one with
        // probability (209/210)^2000 < 1e-4
        assert_eq!(seen.len(), 210);
    }

    #[test]
    fn seeded_reproducibility() {
        let code = full(64);
        let a = delete_bits(&code, 0.5, &mut ChaCha8Rng::seed_from_u64(3));
        let b = delete_bits(&code, 0.5, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        let a = sparsify(&code, 9, &mut ChaCha8Rng::seed_from_u64(3));
        let b = sparsify(&code, 9, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
