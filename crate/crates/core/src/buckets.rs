//! Geometric weight classes and bucketings of consecutive classes.
//!
//! With a weight bound `W` and rank bound `ρ̃` there are
//! `h = ⌈3 + log₂ ρ̃⌉` classes; class `i` (1-based) holds the weights in
//! `(W / 2^(h-i+1), W / 2^(h-i)]`, so class 1 is the lightest and class `h`
//! ends at `W`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// `⌈log₂ x⌉` for `x >= 1`.
pub fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1, "ceil_log2 of zero");
    64 - (x - 1).leading_zeros()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightClassing {
    max_weight: f64,
    rho_tilde: u64,
    h: usize,
}

impl WeightClassing {
    pub fn new(max_weight: f64, rho_tilde: u64) -> Result<Self> {
        if !(max_weight.is_finite() && max_weight > 0.0) {
            return Err(Error::InvalidParams(format!(
                "weight bound must be positive, got {max_weight}"
            )));
        }
        if rho_tilde == 0 {
            return Err(Error::InvalidParams("rank bound must be at least 1".into()));
        }
        // ⌈3 + log₂ ρ̃⌉ = 3 + ⌈log₂ ρ̃⌉ for integer ρ̃
        let h = 3 + ceil_log2(rho_tilde) as usize;
        Ok(Self {
            max_weight,
            rho_tilde,
            h,
        })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    pub fn rho_tilde(&self) -> u64 {
        self.rho_tilde
    }

    /// Upper end `W / 2^(h-i)` of class `i`, for `i` in `0..=h`.
    /// Index 0 gives the lower end of class 1.
    pub fn upper(&self, i: usize) -> f64 {
        debug_assert!(i <= self.h);
        self.max_weight / 2f64.powi((self.h - i) as i32)
    }

    pub fn class_of(&self, weight: f64) -> Result<usize> {
        let (low, high) = (self.upper(0), self.max_weight);
        if !(weight > low && weight <= high) {
            return Err(Error::OutOfPromise { weight, low, high });
        }
        let steps = (self.max_weight / weight).log2().floor();
        let mut i = (self.h as f64 - steps).clamp(1.0, self.h as f64) as usize;
        while i < self.h && weight > self.upper(i) {
            i += 1;
        }
        while i > 1 && weight <= self.upper(i - 1) {
            i -= 1;
        }
        Ok(i)
    }

    /// Whether `weight` satisfies the promise `(W / (8ρ̃), W]`.
    pub fn within_promise(&self, weight: f64) -> bool {
        weight > self.promise_floor() && weight <= self.max_weight
    }

    /// `W / (8ρ̃)`.
    pub fn promise_floor(&self) -> f64 {
        self.max_weight / (8.0 * self.rho_tilde as f64)
    }
}

/// Bucket length exponent `τ` and first-bucket shift `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RandomBucketingParams {
    pub tau: u32,
    pub delta: u64,
}

impl RandomBucketingParams {
    /// `⌈log₂(h+1)⌉`, the largest legal `τ`.
    pub fn max_tau(h: usize) -> u32 {
        ceil_log2(h as u64 + 1)
    }

    pub fn validate(&self, h: usize) -> Result<()> {
        if h == 0 {
            return Err(Error::InvalidParams("h must be at least 1".into()));
        }
        let max = Self::max_tau(h);
        if self.tau > max {
            return Err(Error::InvalidParams(format!(
                "tau {} exceeds ⌈log2(h+1)⌉ = {max}",
                self.tau
            )));
        }
        if self.delta >= 1u64 << self.tau {
            return Err(Error::InvalidParams(format!(
                "delta {} must be below 2^tau = {}",
                self.delta,
                1u64 << self.tau
            )));
        }
        Ok(())
    }

    /// Every legal `(τ, Δ)` for `h` classes.
    pub fn all(h: usize) -> Vec<Self> {
        (0..=Self::max_tau(h))
            .flat_map(|tau| (0..1u64 << tau).map(move |delta| Self { tau, delta }))
            .collect()
    }
}

/// `τ` uniform on `0..=⌈log₂(h+1)⌉`, then `Δ` uniform on `0..2^τ`.
pub fn sample_params<R: Rng + ?Sized>(h: usize, rng: &mut R) -> RandomBucketingParams {
    let tau = rng.random_range(0..=RandomBucketingParams::max_tau(h));
    let delta = rng.random_range(0..1u64 << tau);
    RandomBucketingParams { tau, delta }
}

/// Ordered partition of classes `1..=h` into runs `[f(B_i), ℓ(B_i)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bucketing {
    h: usize,
    endpoints: Vec<(usize, usize)>,
    bucket_of_class: Vec<usize>,
}

impl Bucketing {
    pub fn new(h: usize, endpoints: Vec<(usize, usize)>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidBucketing(msg));
        if h == 0 {
            return bad("h must be at least 1".into());
        }
        let Some(&(first, _)) = endpoints.first() else {
            return bad("no buckets".into());
        };
        if first != 1 {
            return bad(format!("first bucket starts at class {first}, not 1"));
        }
        for (i, &(f, l)) in endpoints.iter().enumerate() {
            if f > l {
                return bad(format!("bucket {} has f = {f} > ℓ = {l}", i + 1));
            }
            if let Some(&(next, _)) = endpoints.get(i + 1) {
                if l + 1 != next {
                    return bad(format!("bucket {} ends at {l} but the next starts at {next}", i + 1));
                }
            }
        }
        let last = endpoints[endpoints.len() - 1].1;
        if last != h {
            return bad(format!("last bucket ends at {last}, not h = {h}"));
        }
        let mut bucket_of_class = vec![0; h + 1];
        for (i, &(f, l)) in endpoints.iter().enumerate() {
            bucket_of_class[f..=l].fill(i + 1);
        }
        Ok(Self {
            h,
            endpoints,
            bucket_of_class,
        })
    }

    /// One bucket per class.
    pub fn singletons(h: usize) -> Result<Self> {
        Self::new(h, (1..=h).map(|c| (c, c)).collect())
    }

    /// The shifted bucketing with `⌈(h+Δ)/2^τ⌉` buckets where bucket `i`
    /// covers classes `2^τ(i-1)-Δ+1 ..= 2^τ·i-Δ`, clipped to `1..=h`.
    pub fn from_params(h: usize, params: RandomBucketingParams) -> Result<Self> {
        params.validate(h)?;
        let len = 1i64 << params.tau;
        let (h_i, delta) = (h as i64, params.delta as i64);
        let count = (h_i + delta + len - 1) / len;
        let endpoints = (1..=count)
            .map(|i| {
                let start = (len * (i - 1) - delta + 1).max(1);
                let end = (len * i - delta).min(h_i);
                (start as usize, end as usize)
            })
            .collect();
        Self::new(h, endpoints)
    }

    pub fn h(&self) -> usize {
        self.h
    }

    /// Number of buckets `b`.
    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    /// `f(B_i)`, with `f(B_i) = 0` for `i <= 0`.
    pub fn first_class(&self, i: isize) -> usize {
        if i <= 0 {
            0
        } else {
            self.endpoints[i as usize - 1].0
        }
    }

    /// `ℓ(B_i)`, with `ℓ(B_i) = 0` for `i <= 0`.
    pub fn last_class(&self, i: isize) -> usize {
        if i <= 0 {
            0
        } else {
            self.endpoints[i as usize - 1].1
        }
    }

    /// 1-based bucket containing class `c`.
    pub fn bucket_of_class(&self, c: usize) -> usize {
        self.bucket_of_class[c]
    }
}

impl fmt::Display for Bucketing {
    /// `f:ℓ,f:ℓ,...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.endpoints.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}:{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn class_examples() {
        let wc = WeightClassing::new(16.0, 2).unwrap();
        assert_eq!(wc.h(), 4);
        assert_eq!(wc.class_of(5.0).unwrap(), 3);
        assert_eq!(wc.class_of(16.0).unwrap(), 4);
        assert_eq!(wc.class_of(2.0).unwrap(), 1);
        assert_eq!(wc.class_of(2.000001).unwrap(), 2);
        assert!(matches!(wc.class_of(1.0), Err(Error::OutOfPromise { .. })));
        assert!(wc.class_of(16.5).is_err());
    }

    #[test]
    fn h_formula() {
        for (rho, h) in [(1, 3), (2, 4), (3, 5), (4, 5), (5, 6), (8, 6), (9, 7), (1000, 13)] {
            assert_eq!(WeightClassing::new(1.0, rho).unwrap().h(), h, "rho={rho}");
        }
    }

    #[test]
    fn promise_range_is_always_classed() {
        for rho in 1..200u64 {
            let wc = WeightClassing::new(3.0, rho).unwrap();
            // W / 2^h <= W / (8 rho)
            assert!(wc.upper(0) <= wc.promise_floor());
            let just_above = wc.promise_floor() * (1.0 + 1e-12);
            assert!(wc.class_of(just_above).is_ok());
        }
    }

    #[test]
    fn bucketing_examples() {
        let b = Bucketing::from_params(6, RandomBucketingParams { tau: 2, delta: 3 }).unwrap();
        assert_eq!(b.endpoints(), &[(1, 1), (2, 5), (6, 6)]);
        assert_eq!(b.to_string(), "1:1,2:5,6:6");

        let b = Bucketing::from_params(6, RandomBucketingParams { tau: 0, delta: 0 }).unwrap();
        assert_eq!(b, Bucketing::singletons(6).unwrap());

        let b = Bucketing::from_params(10, RandomBucketingParams { tau: 2, delta: 3 }).unwrap();
        assert_eq!(b.endpoints(), &[(1, 1), (2, 5), (6, 9), (10, 10)]);
        assert_eq!(b.first_class(0), 0);
        assert_eq!(b.last_class(-1), 0);
        assert_eq!(b.bucket_of_class(7), 3);
    }

    #[test]
    fn invalid_params_and_bucketings() {
        assert!(RandomBucketingParams { tau: 0, delta: 1 }.validate(6).is_err());
        assert!(RandomBucketingParams { tau: 4, delta: 0 }.validate(6).is_err());
        assert!(RandomBucketingParams { tau: 3, delta: 7 }.validate(6).is_ok());
        assert!(Bucketing::new(3, vec![(1, 1), (3, 3)]).is_err());
        assert!(Bucketing::new(3, vec![(2, 3)]).is_err());
        assert!(Bucketing::new(3, vec![(1, 2)]).is_err());
        assert!(Bucketing::new(3, vec![(1, 0), (1, 3)]).is_err());
    }

    #[test]
    fn every_legal_bucketing_up_to_64_classes_is_valid() {
        for h in 1..=64 {
            for params in RandomBucketingParams::all(h) {
                let b = Bucketing::from_params(h, params).unwrap();
                let expected = (h as u64 + params.delta).div_ceil(1 << params.tau);
                assert_eq!(b.len() as u64, expected);
                assert_eq!(b.endpoints()[0].1 as u64, ((1u64 << params.tau) - params.delta).min(h as u64));
            }
        }
    }

    #[test]
    fn sampled_tau_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let p = sample_params(6, &mut rng);
            assert!(p.tau <= 3);
            assert!(p.validate(6).is_ok());
            if p.tau == 0 {
                assert_eq!(p.delta, 0);
            }
        }
    }

    #[test]
    fn tau_frequencies_are_uniform() {
        let h = 6;
        let draws = 100_000;
        let k = RandomBucketingParams::max_tau(h) as usize + 1;
        let mut counts = vec![0usize; k];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..draws {
            counts[sample_params(h, &mut rng).tau as usize] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        for c in counts {
            assert!((c as f64 / draws as f64 - p).abs() <= 3.0 * sigma, "{c}");
        }
    }
}
