//! Seeded random search for algebras where the distance formula fails.
//!
//! Sample `k` draws from its own ChaCha stream `(seed, k)`, so results do
//! not depend on thread scheduling and any single hit can be replayed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NpError, Result};
use crate::finite_algebra::{build_algebra, mask_of, np_gap, DistanceReport, OptimizerOptions, DEFAULT_SINGULAR_TOL};
use crate::numerics::{c, singular_values, CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum Sampler {
    /// Integer entries drawn uniformly from `[lo, hi]`.
    Integer { lo: i64, hi: i64 },
    /// Standard complex Gaussian entries.
    Gaussian,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler::Integer { lo: -3, hi: 3 }
    }
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> C64 {
        match *self {
            Sampler::Integer { lo, hi } => c(rng.random_range(lo..=hi) as f64, 0.0),
            Sampler::Gaussian => {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                c(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }
}

/// A fixed instance evaluated alongside the random samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub s: CMatrix,
    pub a: Vec<C64>,
    /// 0-based members of `E`.
    pub e: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub n: usize,
    pub e_size: usize,
    pub sampler: Sampler,
    pub seed: u64,
    pub budget: usize,
    pub threshold: f64,
    /// Similarities with a larger condition number are redrawn.
    pub max_condition: f64,
    pub optimizer: OptimizerOptions,
    pub inject: Vec<Candidate>,
}

impl SearchParams {
    pub fn new(n: usize, e_size: usize) -> Self {
        Self {
            n,
            e_size,
            sampler: Sampler::default(),
            seed: 0,
            budget: 1000,
            threshold: 1e-4,
            max_condition: 1e4,
            optimizer: OptimizerOptions {
                restarts: 4,
                ..OptimizerOptions::default()
            },
            inject: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Sample index, or `None` for injected candidates.
    pub sample: Option<usize>,
    pub injected: Option<usize>,
    #[serde(serialize_with = "crate::io::serialize_matrix")]
    pub s: CMatrix,
    pub a: Vec<C64>,
    /// 1-based members of `E`.
    pub e: Vec<usize>,
    pub report: DistanceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub violations: Vec<Violation>,
    pub evaluated: usize,
    /// Samples whose optimizer failed its restart-agreement check.
    pub failures: usize,
    pub max_gap: f64,
}

fn draw_instance(params: &SearchParams, index: usize) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(index as u64);
    let n = params.n;
    let s = loop {
        let s = CMatrix::from_fn(n, n, |_, _| params.sampler.draw(&mut rng));
        let sv = singular_values(&s);
        let (smin, smax) = (sv[n - 1], sv[0]);
        if smin > 0.0 && smax / smin <= params.max_condition {
            break s;
        }
    };
    let a: Vec<C64> = (0..n).map(|_| params.sampler.draw(&mut rng)).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let mut e = idx[..params.e_size].to_vec();
    e.sort_unstable();
    Candidate { s, a, e }
}

fn evaluate(candidate: &Candidate, opt: &OptimizerOptions) -> Result<DistanceReport> {
    let alg = build_algebra(&candidate.s, DEFAULT_SINGULAR_TOL)?;
    np_gap(&alg, &candidate.a, mask_of(&candidate.e), opt)
}

pub fn search_violations(params: &SearchParams) -> Result<SearchOutcome> {
    if params.n < 2 {
        return Err(NpError::InvalidParameter("search needs n >= 2".into()));
    }
    if params.e_size == 0 || params.e_size >= params.n {
        return Err(NpError::InvalidParameter(format!(
            "E size must lie in 1..{}, got {}",
            params.n, params.e_size
        )));
    }
    if params.budget == 0 {
        return Err(NpError::InvalidParameter("budget must be at least 1".into()));
    }
    if let Sampler::Integer { lo, hi } = params.sampler {
        if lo > hi {
            return Err(NpError::InvalidParameter("empty integer range".into()));
        }
    }

    let sampled: Vec<(Option<usize>, Option<usize>, Candidate, Result<DistanceReport>)> = (0..params.budget)
        .into_par_iter()
        .map(|k| {
            let cand = draw_instance(params, k);
            let rep = evaluate(&cand, &params.optimizer);
            (Some(k), None, cand, rep)
        })
        .collect();
    let injected = params.inject.iter().enumerate().map(|(k, cand)| {
        let rep = evaluate(cand, &params.optimizer);
        (None, Some(k), cand.clone(), rep)
    });

    let mut violations = Vec::new();
    let mut failures = 0;
    let mut max_gap = f64::NEG_INFINITY;
    let mut evaluated = 0;
    for (sample, inj, cand, rep) in sampled.into_iter().chain(injected) {
        evaluated += 1;
        let rep = match rep {
            Ok(r) => r,
            Err(e) if e.is_numerical() => {
                failures += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        max_gap = max_gap.max(rep.gap);
        if rep.gap > params.threshold {
            violations.push(Violation {
                sample,
                injected: inj,
                s: cand.s,
                a: cand.a,
                e: cand.e.iter().map(|i| i + 1).collect(),
                report: rep,
            });
        }
    }
    violations.sort_by(|x, y| {
        y.report
            .gap
            .total_cmp(&x.report.gap)
            .then(x.sample.cmp(&y.sample))
            .then(x.injected.cmp(&y.injected))
    });
    Ok(SearchOutcome {
        violations,
        evaluated,
        failures,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_algebra::tests::{example_element, example_similarity};

    #[test]
    fn deterministic_per_seed() {
        let mut p = SearchParams::new(3, 1);
        p.budget = 5;
        p.seed = 99;
        assert_eq!(draw_instance(&p, 3), draw_instance(&p, 3));
        assert_ne!(draw_instance(&p, 3), draw_instance(&p, 4));
        p.threshold = -1.0;
        let a = search_violations(&p).unwrap();
        let b = search_violations(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluated, 5);
    }

    #[test]
    fn small_n_has_no_violations() {
        let mut p = SearchParams::new(2, 1);
        p.budget = 100;
        p.seed = 1;
        let out = search_violations(&p).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.max_gap);
    }

    #[test]
    fn injected_example_is_reported() {
        let mut p = SearchParams::new(5, 3);
        p.budget = 4;
        p.inject.push(Candidate {
            s: example_similarity(),
            a: example_element(),
            e: vec![0, 1, 2],
        });
        let out = search_violations(&p).unwrap();
        let hit = out.violations.iter().find(|v| v.injected == Some(0)).unwrap();
        assert!(hit.report.gap > 1.2);
        assert_eq!(hit.e, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(search_violations(&SearchParams::new(1, 1)).is_err());
        assert!(search_violations(&SearchParams::new(3, 3)).is_err());
        let mut p = SearchParams::new(3, 1);
        p.budget = 0;
        assert!(search_violations(&p).is_err());
    }
}
