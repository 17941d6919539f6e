//! Randomized search for exact solutions by Bernoulli sampling.
//!
//! The probabilistic model matches the analysis exactly: each ground-set
//! element enters the subset independently with probability `p = N/|B|`,
//! and a trial succeeds when the sampled counting vector `X = φ(T)` lands
//! exactly on its mean `E[X] = (N/|B|)·φ(B)`. Because the constant function
//! lies in the evaluation span, hitting the mean forces `|T| = N` as a side
//! effect, and the framework's `verify_solution` passes on every hit.
//!
//! Inclusion draws compare a full-width `u128` against
//! `⌊N·2¹²⁸/|B|⌋`, so the per-element bias is below `2⁻¹²⁸` — far beneath
//! any statistical resolution — and `N = |B|` is special-cased to
//! include-all. Trials are independent substreams of one master seed, so
//! results are reproducible regardless of thread count: the parallel search
//! returns the lowest-indexed successful trial.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::framework::{ElementKey, Instance, PhiVector, SolutionCertificate};
use crate::util;

/// A seeded generator for one trial substream: trial `index` under a master
/// seed always draws the same stream, independent of scheduling.
#[must_use]
pub fn substream_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(util::substream_seed(master_seed, index))
}

fn inclusion_threshold(n: u64, size: u64) -> Option<u128> {
    if n >= size {
        return None; // include-all
    }
    let scaled = BigInt::from(n) << 128;
    let threshold = scaled / BigInt::from(size);
    u128::try_from(&threshold).ok()
}

/// Draws a Bernoulli(`n/|B|`) subset: every element is included
/// independently, in canonical iteration order, one `u128` per element.
pub fn bernoulli_subset(
    instance: &Instance,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeSet<ElementKey>> {
    if n == 0 || n > instance.size() {
        return Err(Error::NOutOfRange {
            n,
            max: instance.size(),
        });
    }
    instance.check_budget(instance.size() as u128)?;
    let threshold = inclusion_threshold(n, instance.size());
    let mut subset = BTreeSet::new();
    for key in instance.elements() {
        let draw: u128 = rng.random();
        let include = match threshold {
            None => true,
            Some(limit) => draw < limit,
        };
        if include {
            subset.insert(key);
        }
    }
    Ok(subset)
}

/// Draws `count` elements uniformly with replacement (an i.i.d. multiset).
pub fn iid_multiset(
    instance: &Instance,
    count: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ElementKey>> {
    if count == 0 {
        return Err(Error::EmptySet("requested multiset"));
    }
    let size = instance.size();
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let rank = rng.random_range(0..size);
        out.push(
            instance
                .element_at(rank)
                .ok_or_else(|| Error::invalid(format!("element_at({rank}) failed")))?,
        );
    }
    Ok(out)
}

/// Options for [`search`] and [`estimate_success_probability`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Target sample size `N` (must make `E[X]` integral).
    pub n: u64,
    /// Number of independent trials.
    pub trials: u64,
    /// Master seed; trial `i` uses substream `i`.
    pub seed: u64,
}

/// A successful trial.
#[derive(Clone, Debug)]
pub struct SearchHit {
    /// Index of the first successful trial under the master seed.
    pub trial: u64,
    pub subset: BTreeSet<ElementKey>,
    /// Independent re-verification of the hit through the public checker.
    pub certificate: SolutionCertificate,
}

/// Result of [`search`].
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub hit: Option<SearchHit>,
    /// Trials consumed: the successful trial's index + 1, or all of them.
    pub attempts: u64,
    pub trials_requested: u64,
}

struct TrialContext {
    phi_by_rank: Vec<PhiVector>,
    target: PhiVector,
    threshold: Option<u128>,
    dim: usize,
}

impl TrialContext {
    fn new(instance: &Instance, n: u64) -> Result<Self> {
        let expected = instance.expected_vector(n)?;
        let Some(target) = expected.as_integer() else {
            let bad = expected
                .entries
                .iter()
                .position(|e| !e.is_integer())
                .expect("some entry is fractional");
            return Err(Error::Divisibility {
                index: bad,
                detail: format!(
                    "E[X] is fractional at index {} ({}): N·φ(B)_a/|B| = {}; \
                     no subset can hit a non-integer target",
                    bad,
                    instance.index_label(bad),
                    expected.entries[bad]
                ),
            });
        };
        instance.check_budget(instance.size() as u128)?;
        let mut phi_by_rank = Vec::with_capacity(instance.size() as usize);
        for key in instance.elements() {
            phi_by_rank.push(instance.phi(&key)?);
        }
        Ok(TrialContext {
            threshold: inclusion_threshold(n, instance.size()),
            dim: instance.dim(),
            phi_by_rank,
            target,
        })
    }

    /// Runs one trial; returns whether `X` landed exactly on `E[X]`.
    fn succeeds(&self, master_seed: u64, trial: u64) -> bool {
        let mut rng = substream_rng(master_seed, trial);
        let mut acc = PhiVector::zeros(self.dim);
        for phi in &self.phi_by_rank {
            let draw: u128 = rng.random();
            let include = match self.threshold {
                None => true,
                Some(limit) => draw < limit,
            };
            if include {
                acc.add_assign(phi);
            }
        }
        acc == self.target
    }

    /// Re-draws the subset of a known trial (used only on the hit).
    fn subset(&self, instance: &Instance, master_seed: u64, trial: u64) -> BTreeSet<ElementKey> {
        let mut rng = substream_rng(master_seed, trial);
        let mut subset = BTreeSet::new();
        for rank in 0..self.phi_by_rank.len() as u64 {
            let draw: u128 = rng.random();
            let include = match self.threshold {
                None => true,
                Some(limit) => draw < limit,
            };
            if include {
                subset.insert(instance.element_at(rank).expect("rank < size"));
            }
        }
        subset
    }
}

/// Runs up to `trials` independent Bernoulli trials in parallel and returns
/// the lowest-indexed one whose counting vector hits `E[X]` exactly.
///
/// A fractional `E[X]` is a configuration error (no subset can ever
/// succeed), reported as [`Error::Divisibility`] before any sampling. The
/// hit's subset is re-verified through `verify_solution` and the
/// certificate is included in the outcome.
pub fn search(instance: &Instance, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let ctx = TrialContext::new(instance, cfg.n)?;
    let found = (0..cfg.trials)
        .into_par_iter()
        .find_first(|&trial| ctx.succeeds(cfg.seed, trial));

    let hit = match found {
        None => None,
        Some(trial) => {
            let subset = ctx.subset(instance, cfg.seed, trial);
            let certificate = instance.verify_solution(&subset)?;
            debug_assert!(certificate.pass, "hit must re-verify");
            Some(SearchHit {
                trial,
                subset,
                certificate,
            })
        }
    };
    Ok(SearchOutcome {
        attempts: hit.as_ref().map_or(cfg.trials, |h| h.trial + 1),
        trials_requested: cfg.trials,
        hit,
    })
}

/// Result of [`estimate_success_probability`].
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// 95% Wilson score interval for the success probability.
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// True when `E[X]` is fractional: the probability is exactly zero and
    /// no sampling was performed.
    pub exact_zero: bool,
}

/// Estimates `P(X = E[X])` by running every trial (no early exit) and
/// counting successes, with a 95% Wilson score interval.
///
/// When `E[X]` is fractional the success probability is exactly zero — an
/// integer vector cannot equal a fractional one — and the report
/// short-circuits rather than wasting trials.
pub fn estimate_success_probability(
    instance: &Instance,
    cfg: &SearchConfig,
) -> Result<EstimateReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("estimation needs at least one trial"));
    }
    let expected = instance.expected_vector(cfg.n)?;
    if !expected.integral {
        return Ok(EstimateReport {
            trials: 0,
            successes: 0,
            p_hat: 0.0,
            wilson_low: 0.0,
            wilson_high: 0.0,
            exact_zero: true,
        });
    }
    let ctx = TrialContext::new(instance, cfg.n)?;
    let successes = (0..cfg.trials)
        .into_par_iter()
        .filter(|&trial| ctx.succeeds(cfg.seed, trial))
        .count() as u64;

    let (low, high) = wilson_interval(successes, cfg.trials, 1.96);
    Ok(EstimateReport {
        trials: cfg.trials,
        successes,
        p_hat: successes as f64 / cfg.trials as f64,
        wilson_low: low,
        wilson_high: high,
        exact_zero: false,
    })
}

/// The Wilson score interval for a binomial proportion.
fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oa::{self, OaParams};

    fn oa221() -> Instance {
        oa::instance(&OaParams::new(2, 2, 1).unwrap()).unwrap()
    }

    #[test]
    fn bernoulli_subsets_are_seed_deterministic() {
        let inst = oa221();
        let a = bernoulli_subset(&inst, 2, &mut substream_rng(7, 0)).unwrap();
        let b = bernoulli_subset(&inst, 2, &mut substream_rng(7, 0)).unwrap();
        assert_eq!(a, b);
        let c = bernoulli_subset(&inst, 2, &mut substream_rng(7, 1)).unwrap();
        assert_ne!(a, c, "different substreams should differ here");
    }

    #[test]
    fn bernoulli_full_rate_includes_everything() {
        let inst = oa221();
        let all = bernoulli_subset(&inst, 4, &mut substream_rng(0, 0)).unwrap();
        assert_eq!(all.len(), 4);
        assert!(matches!(
            bernoulli_subset(&inst, 5, &mut substream_rng(0, 0)),
            Err(Error::NOutOfRange { .. })
        ));
        assert!(matches!(
            bernoulli_subset(&inst, 0, &mut substream_rng(0, 0)),
            Err(Error::NOutOfRange { .. })
        ));
    }

    #[test]
    fn bernoulli_mean_size_tracks_the_rate() {
        // Binomial(8, 1/2): mean 4, σ/√trials ≈ 0.032 at 2000 trials
        let params = OaParams::new(2, 3, 1).unwrap();
        let inst = oa::instance(&params).unwrap();
        let trials = 2000u64;
        let mut total = 0u64;
        for i in 0..trials {
            total += bernoulli_subset(&inst, 4, &mut substream_rng(0xbead, i))
                .unwrap()
                .len() as u64;
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 4.0).abs() < 0.15, "mean subset size {mean}");
    }

    #[test]
    fn iid_multiset_draws_valid_elements() {
        let inst = oa221();
        let sample = iid_multiset(&inst, 25, &mut substream_rng(3, 0)).unwrap();
        assert_eq!(sample.len(), 25);
        assert!(sample.iter().all(|k| inst.contains(k)));
        assert!(iid_multiset(&inst, 0, &mut substream_rng(3, 0)).is_err());
    }

    #[test]
    fn search_finds_an_exact_solution_and_verifies_it() {
        // OA(2,2,1) at N = 2: exactly {11,22} and {12,21} succeed, p = 1/8
        let inst = oa221();
        let cfg = SearchConfig {
            n: 2,
            trials: 1000,
            seed: 42,
        };
        let outcome = search(&inst, &cfg).unwrap();
        let hit = outcome.hit.expect("p = 1/8 over 1000 trials");
        assert!(hit.certificate.pass);
        assert_eq!(hit.subset.len(), 2, "hitting E[X] forces |T| = N");
        assert_eq!(outcome.attempts, hit.trial + 1);

        // deterministic: the same config reproduces the same hit
        let again = search(&inst, &cfg).unwrap();
        let hit2 = again.hit.unwrap();
        assert_eq!(hit.trial, hit2.trial);
        assert_eq!(hit.subset, hit2.subset);
    }

    #[test]
    fn search_rejects_fractional_expectation_upfront() {
        let inst = oa221();
        let cfg = SearchConfig {
            n: 1,
            trials: 10,
            seed: 0,
        };
        // N = 1 makes E[X] fractional on the singleton coordinates
        match search(&inst, &cfg) {
            Err(Error::Divisibility { detail, .. }) => {
                assert!(detail.contains("fractional"), "{detail}");
            }
            other => panic!("expected a divisibility error, got {other:?}"),
        }
    }

    #[test]
    fn search_exhausts_trials_without_a_hit() {
        let inst = oa221();
        // seed 5 was checked to fail its first two trials at N = 2
        let cfg = SearchConfig {
            n: 2,
            trials: 2,
            seed: 5,
        };
        let outcome = search(&inst, &cfg).unwrap();
        assert!(outcome.hit.is_none());
        assert_eq!(outcome.attempts, 2);
        assert_eq!(outcome.trials_requested, 2);
    }

    #[test]
    fn estimate_brackets_the_exact_probability() {
        // exact success probability is 2/16 = 0.125
        let inst = oa221();
        let cfg = SearchConfig {
            n: 2,
            trials: 10_000,
            seed: 271828,
        };
        let report = estimate_success_probability(&inst, &cfg).unwrap();
        assert!(!report.exact_zero);
        assert!(
            report.wilson_low <= 0.125 && 0.125 <= report.wilson_high,
            "Wilson interval [{}, {}] should contain 1/8",
            report.wilson_low,
            report.wilson_high
        );
        // the interval is meaningfully tight at 10⁴ trials
        assert!(report.wilson_high - report.wilson_low < 0.03);
    }

    #[test]
    fn estimate_short_circuits_on_fractional_expectation() {
        let inst = oa221();
        let cfg = SearchConfig {
            n: 1,
            trials: 1000,
            seed: 0,
        };
        let report = estimate_success_probability(&inst, &cfg).unwrap();
        assert!(report.exact_zero);
        assert_eq!(report.successes, 0);
        assert_eq!(report.trials, 0, "no sampling was performed");
    }

    #[test]
    fn wilson_interval_basics() {
        let (low, high) = wilson_interval(0, 100, 1.96);
        assert_eq!(low, 0.0);
        assert!(high > 0.0 && high < 0.05, "rule-of-three scale: {high}");
        let (low, high) = wilson_interval(50, 100, 1.96);
        assert!(low < 0.5 && 0.5 < high);
        let (low, high) = wilson_interval(100, 100, 1.96);
        assert!(low > 0.95);
        assert!((high - 1.0).abs() < 1e-12, "upper endpoint: {high}");
    }
}
