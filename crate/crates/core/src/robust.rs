//! Locally optimized RANSAC with PROSAC sampling.
//!
//! The engine is generic over an [`Estimator`]; homography estimation with
//! the six minimal/refit solver combinations and fundamental-matrix
//! estimation (seven-point minimal, eight-point refit, Sampson residual) are
//! built on top of it.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index;
use rand::Rng;

use crate::affine::SiftCorrespondence;
use crate::epipolar::{estimate_f_7pt, estimate_f_8pt, sampson_distance, FundamentalMatrix, PointPair};
use crate::error::{Error, Result};
use crate::homography::{h_3pt, h_4pt, h_dlt, h_fcompatible, haf_from_ac, reprojection_error, Homography};
use crate::numerics::seeded_rng;
use crate::recovery::{filter_candidates, recover_affine, DEFAULT_MAX_SCALE, DEFAULT_MAX_SHEAR};

/// Refits on the final inlier set after the threshold schedule of local
/// optimization, stopping early once the set stops growing.
const MAX_POLISH_ITERATIONS: usize = 10;

/// Upper bound on the PROSAC horizon `T_N`.
pub const PROSAC_MAX_HORIZON: f64 = 200_000.0;

/// A model family fitted by [`lo_ransac`].
pub trait Estimator {
    type Model: Clone;

    /// Number of data points.
    fn len(&self) -> usize;
    /// Minimal sample size `m`.
    fn sample_size(&self) -> usize;
    /// Smallest inlier set the refit solver accepts.
    fn refine_size(&self) -> usize;
    /// Models from a minimal sample; empty when the sample is degenerate.
    fn fit_minimal(&self, sample: &[usize]) -> Vec<Self::Model>;
    /// Least-squares model over a (non-minimal) inlier set.
    fn fit_refine(&self, inliers: &[usize]) -> Option<Self::Model>;
    fn residual(&self, model: &Self::Model, index: usize) -> f64;
}

/// Engine parameters shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoConfig {
    pub threshold: f64,
    pub confidence: f64,
    pub max_samples: usize,
    pub lo_iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<M> {
    pub model: Option<M>,
    pub inliers: Vec<usize>,
    /// Every sample drawn, degenerate ones included.
    pub samples_drawn: usize,
    /// Samples that produced at least one model.
    pub valid_samples: usize,
    pub lo_runs: usize,
    /// Largest inlier count of any single hypothesis scored during the run.
    pub max_hypothesis_inliers: usize,
}

/// `ceil(log(1 − confidence) / log(1 − inlier_ratioᵐ))`, at least 1 and at
/// most `max_samples`.
pub fn required_iterations(confidence: f64, inlier_ratio: f64, m: usize, max_samples: usize) -> usize {
    if inlier_ratio <= 0.0 {
        return max_samples;
    }
    if inlier_ratio >= 1.0 {
        return 1.min(max_samples);
    }
    let denom = (1.0 - inlier_ratio.powi(m as i32)).ln();
    if denom >= 0.0 || !denom.is_finite() {
        return max_samples;
    }
    let n = ((1.0 - confidence).ln() / denom).ceil();
    if !n.is_finite() || n >= max_samples as f64 {
        max_samples
    } else {
        (n as usize).max(1)
    }
}

/// Ordering used by the PROSAC schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProsacOrder {
    pub order: Vec<usize>,
    /// No qualities were supplied; the identity order is used.
    pub uniform: bool,
}

/// Indices sorted by descending quality (stable); identity without qualities.
pub fn prosac_order(len: usize, qualities: Option<&[f64]>) -> Result<ProsacOrder> {
    match qualities {
        None => Ok(ProsacOrder {
            order: (0..len).collect(),
            uniform: true,
        }),
        Some(q) => {
            if q.len() != len {
                return Err(Error::InvalidInput(format!(
                    "{} qualities for {len} correspondences",
                    q.len()
                )));
            }
            let mut order: Vec<usize> = (0..len).collect();
            order.sort_by(|&a, &b| q[b].total_cmp(&q[a]));
            Ok(ProsacOrder {
                order,
                uniform: false,
            })
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// PROSAC horizon: `min(PROSAC_MAX_HORIZON, C(N, m))`.
pub fn prosac_horizon(n_total: usize, m: usize) -> f64 {
    binomial(n_total, m).min(PROSAC_MAX_HORIZON)
}

/// `T′ₙ` for `n = m..=N`: the iteration after which the sampling pool grows
/// past the `n` best correspondences, from
/// `Tₙ₊₁ = Tₙ·(n + 1)/(n + 1 − m)` and `T′ₙ₊₁ = T′ₙ + ⌈Tₙ₊₁ − Tₙ⌉`.
pub fn prosac_growth_schedule(n_total: usize, m: usize, horizon: f64) -> Vec<usize> {
    assert!(m >= 1 && m <= n_total, "sample size must be in 1..=N");
    let mut t_n = horizon;
    for i in 0..m {
        t_n *= (m - i) as f64 / (n_total - i) as f64;
    }
    let mut t_prime = 1usize;
    let mut out = Vec::with_capacity(n_total - m + 1);
    out.push(t_prime);
    for n in m..n_total {
        let next = t_n * (n + 1) as f64 / (n + 1 - m) as f64;
        t_prime += ceil_tolerant(next - t_n);
        t_n = next;
        out.push(t_prime);
    }
    out
}

/// Ceiling that ignores round-off just above an integer.
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as usize
}

/// Draws PROSAC samples over a fixed ordering.
#[derive(Debug, Clone)]
pub struct ProsacSampler {
    order: Vec<usize>,
    m: usize,
    n: usize,
    t: usize,
    schedule: Vec<usize>,
}

impl ProsacSampler {
    pub fn new(order: Vec<usize>, m: usize) -> Result<Self> {
        if m == 0 || order.len() < m {
            return Err(Error::TooFewCorrespondences {
                needed: m,
                got: order.len(),
            });
        }
        let schedule = prosac_growth_schedule(order.len(), m, prosac_horizon(order.len(), m));
        Ok(ProsacSampler {
            order,
            m,
            n: m,
            t: 0,
            schedule,
        })
    }

    /// Current size of the sampling pool.
    pub fn pool_size(&self) -> usize {
        self.n
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> Vec<usize> {
        self.t += 1;
        let total = self.order.len();
        while self.n < total && self.schedule[self.n - self.m] < self.t {
            self.n += 1;
        }
        if self.schedule[self.n - self.m] < self.t {
            // schedule exhausted: uniform over everything
            return index::sample(rng, total, self.m)
                .into_iter()
                .map(|i| self.order[i])
                .collect();
        }
        let mut out = Vec::with_capacity(self.m);
        out.push(self.order[self.n - 1]);
        out.extend(
            index::sample(rng, self.n - 1, self.m - 1)
                .into_iter()
                .map(|i| self.order[i]),
        );
        out
    }
}

fn inliers_of<E: Estimator>(est: &E, model: &E::Model, threshold: f64) -> Vec<usize> {
    (0..est.len())
        .filter(|&i| est.residual(model, i) <= threshold)
        .collect()
}

/// Iterated least-squares refits with the threshold annealed from 3× down
/// to 1× the base value. Returns the best refit and its inliers when it
/// beats `inlier_count`.
fn local_optimize<E: Estimator>(
    est: &E,
    model: &E::Model,
    cfg: &LoConfig,
    inlier_count: usize,
) -> Option<(E::Model, Vec<usize>)> {
    let iterations = cfg.lo_iterations;
    let mut best: Option<(E::Model, Vec<usize>)> = None;
    let mut best_count = inlier_count;
    let mut current = model.clone();
    for k in 0..iterations {
        let factor = if iterations > 1 {
            3.0 - 2.0 * k as f64 / (iterations - 1) as f64
        } else {
            1.0
        };
        let pool = inliers_of(est, &current, cfg.threshold * factor);
        if pool.len() < est.refine_size() {
            break;
        }
        let Some(refit) = est.fit_refine(&pool) else {
            break;
        };
        let inl = inliers_of(est, &refit, cfg.threshold);
        if inl.len() > best_count {
            best_count = inl.len();
            best = Some((refit.clone(), inl));
        }
        current = refit;
    }
    // polish at the final threshold while the consensus keeps growing
    for _ in 0..MAX_POLISH_ITERATIONS {
        let Some((_, inl)) = &best else { break };
        let Some(refit) = est.fit_refine(inl) else { break };
        let next = inliers_of(est, &refit, cfg.threshold);
        if next.len() <= inl.len() {
            break;
        }
        best = Some((refit, next));
    }
    best
}

/// LO-RANSAC over `est` with PROSAC sampling along `order`.
pub fn lo_ransac<E: Estimator>(est: &E, order: &[usize], cfg: &LoConfig) -> Result<Outcome<E::Model>> {
    let m = est.sample_size();
    let n = est.len();
    if n < m {
        return Err(Error::TooFewCorrespondences { needed: m, got: n });
    }
    if order.len() != n {
        return Err(Error::InvalidInput("PROSAC order does not cover the data".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut sampler = ProsacSampler::new(order.to_vec(), m)?;

    let mut best: Option<(E::Model, Vec<usize>)> = None;
    let mut best_count = 0usize;
    let mut required = cfg.max_samples;
    let mut out = Outcome {
        model: None,
        inliers: Vec::new(),
        samples_drawn: 0,
        valid_samples: 0,
        lo_runs: 0,
        max_hypothesis_inliers: 0,
    };

    while out.samples_drawn < cfg.max_samples && out.valid_samples < required {
        let sample = sampler.sample(&mut rng);
        out.samples_drawn += 1;
        let models = est.fit_minimal(&sample);
        if models.is_empty() {
            continue;
        }
        out.valid_samples += 1;
        for model in models {
            let inl = inliers_of(est, &model, cfg.threshold);
            out.max_hypothesis_inliers = out.max_hypothesis_inliers.max(inl.len());
            if inl.len() <= best_count {
                continue;
            }
            best_count = inl.len();
            best = Some((model.clone(), inl));
            if cfg.lo_iterations > 0 && best_count >= est.refine_size() {
                out.lo_runs += 1;
                if let Some((lm, linl)) = local_optimize(est, &model, cfg, best_count) {
                    out.max_hypothesis_inliers = out.max_hypothesis_inliers.max(linl.len());
                    best_count = linl.len();
                    best = Some((lm, linl));
                }
            }
            required = required_iterations(cfg.confidence, best_count as f64 / n as f64, m, cfg.max_samples);
        }
    }

    if let Some((model, inliers)) = best {
        if inliers.len() > m {
            out.model = Some(model);
            out.inliers = inliers;
        }
    }
    Ok(out)
}

/// Solver used on minimal samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum MinimalSolver {
    /// Affine recovery from one SIFT correspondence, then HAF.
    OneSift,
    FourPoint,
    ThreePoint,
}

/// Solver used for least-squares fitting during local optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RefitSolver {
    FourPoint,
    ThreePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SolverCombo {
    pub minimal: MinimalSolver,
    pub refit: RefitSolver,
}

impl SolverCombo {
    pub const ALL: [SolverCombo; 6] = [
        SolverCombo::new(MinimalSolver::OneSift, RefitSolver::FourPoint),
        SolverCombo::new(MinimalSolver::OneSift, RefitSolver::ThreePoint),
        SolverCombo::new(MinimalSolver::FourPoint, RefitSolver::FourPoint),
        SolverCombo::new(MinimalSolver::FourPoint, RefitSolver::ThreePoint),
        SolverCombo::new(MinimalSolver::ThreePoint, RefitSolver::FourPoint),
        SolverCombo::new(MinimalSolver::ThreePoint, RefitSolver::ThreePoint),
    ];

    pub const fn new(minimal: MinimalSolver, refit: RefitSolver) -> Self {
        SolverCombo { minimal, refit }
    }

    pub fn sample_size(&self) -> usize {
        match self.minimal {
            MinimalSolver::OneSift => 1,
            MinimalSolver::FourPoint => 4,
            MinimalSolver::ThreePoint => 3,
        }
    }

    pub fn needs_fundamental(&self) -> bool {
        self.minimal != MinimalSolver::FourPoint || self.refit == RefitSolver::ThreePoint
    }
}

impl fmt::Display for SolverCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let min = match self.minimal {
            MinimalSolver::OneSift => "1S",
            MinimalSolver::FourPoint => "4P",
            MinimalSolver::ThreePoint => "3P",
        };
        let refit = match self.refit {
            RefitSolver::FourPoint => "4P",
            RefitSolver::ThreePoint => "3P",
        };
        write!(f, "{min}{refit}")
    }
}

impl FromStr for SolverCombo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverCombo::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown solver combination {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    /// Inlier-outlier threshold in pixels.
    pub threshold: f64,
    pub confidence: f64,
    pub max_samples: usize,
    pub seed: u64,
    pub lo_iterations: usize,
    pub combo: SolverCombo,
    /// Candidate filter applied to recovered affinities.
    pub max_scale: f64,
    pub max_shear: f64,
    /// Score every real recovery candidate as its own hypothesis.
    pub score_all_candidates: bool,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            threshold: 2.0,
            confidence: 0.99,
            max_samples: 100_000,
            seed: 0,
            lo_iterations: 4,
            combo: SolverCombo::new(MinimalSolver::OneSift, RefitSolver::FourPoint),
            max_scale: DEFAULT_MAX_SCALE,
            max_shear: DEFAULT_MAX_SHEAR,
            score_all_candidates: true,
        }
    }
}

impl RansacConfig {
    fn lo_config(&self) -> LoConfig {
        LoConfig {
            threshold: self.threshold,
            confidence: self.confidence,
            max_samples: self.max_samples,
            lo_iterations: self.lo_iterations,
            seed: self.seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidInput("threshold must be positive".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidInput("confidence must lie in (0, 1)".into()));
        }
        if self.max_samples == 0 {
            return Err(Error::InvalidInput("max_samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    /// `None` when no model reached `m + 1` inliers.
    pub model: Option<Homography>,
    pub inliers: Vec<usize>,
    pub samples_drawn: usize,
    pub wall_time_ms: f64,
    pub lo_runs: usize,
    pub max_hypothesis_inliers: usize,
}

struct HomographyProblem<'a> {
    corrs: &'a [SiftCorrespondence],
    pairs: Vec<PointPair>,
    f: Option<&'a FundamentalMatrix>,
    cfg: &'a RansacConfig,
}

impl HomographyProblem<'_> {
    fn pairs_at(&self, idx: &[usize]) -> Vec<PointPair> {
        idx.iter().map(|&i| self.pairs[i]).collect()
    }
}

impl Estimator for HomographyProblem<'_> {
    type Model = Homography;

    fn len(&self) -> usize {
        self.corrs.len()
    }

    fn sample_size(&self) -> usize {
        self.cfg.combo.sample_size()
    }

    fn refine_size(&self) -> usize {
        match self.cfg.combo.refit {
            RefitSolver::FourPoint => 4,
            RefitSolver::ThreePoint => 3,
        }
    }

    fn fit_minimal(&self, sample: &[usize]) -> Vec<Homography> {
        match self.cfg.combo.minimal {
            MinimalSolver::OneSift => {
                let f = self.f.expect("checked before the run");
                let rec = filter_candidates(
                    recover_affine(f, &self.corrs[sample[0]]),
                    self.cfg.max_scale,
                    self.cfg.max_shear,
                );
                let take = if self.cfg.score_all_candidates { usize::MAX } else { 1 };
                rec.candidates
                    .iter()
                    .take(take)
                    .filter_map(|c| haf_from_ac(f, &c.ac).ok())
                    .collect()
            }
            MinimalSolver::FourPoint => h_4pt(&self.pairs_at(sample)).into_iter().collect(),
            MinimalSolver::ThreePoint => {
                let f = self.f.expect("checked before the run");
                h_3pt(f, &self.pairs_at(sample)).into_iter().collect()
            }
        }
    }

    fn fit_refine(&self, inliers: &[usize]) -> Option<Homography> {
        let pairs = self.pairs_at(inliers);
        match self.cfg.combo.refit {
            RefitSolver::FourPoint => h_dlt(&pairs).ok(),
            RefitSolver::ThreePoint => h_fcompatible(self.f?, &pairs).ok(),
        }
    }

    fn residual(&self, model: &Homography, i: usize) -> f64 {
        let (p1, p2) = self.pairs[i];
        reprojection_error(model, &p1, &p2)
    }
}

/// Robust homography estimation with the configured solver combination.
pub fn lo_ransac_homography(
    corrs: &[SiftCorrespondence],
    f: Option<&FundamentalMatrix>,
    cfg: &RansacConfig,
    qualities: Option<&[f64]>,
) -> Result<RansacResult> {
    cfg.validate()?;
    if cfg.combo.needs_fundamental() && f.is_none() {
        return Err(Error::InvalidInput(format!(
            "solver combination {} needs a fundamental matrix",
            cfg.combo
        )));
    }
    let order = prosac_order(corrs.len(), qualities)?;
    let problem = HomographyProblem {
        corrs,
        pairs: corrs.iter().map(|c| c.points()).collect(),
        f,
        cfg,
    };
    let start = Instant::now();
    let out = lo_ransac(&problem, &order.order, &cfg.lo_config())?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RansacResult {
        model: out.model,
        inliers: out.inliers,
        samples_drawn: out.samples_drawn,
        wall_time_ms,
        lo_runs: out.lo_runs,
        max_hypothesis_inliers: out.max_hypothesis_inliers,
    })
}

struct FundamentalProblem<'a> {
    pairs: &'a [PointPair],
}

impl Estimator for FundamentalProblem<'_> {
    type Model = FundamentalMatrix;

    fn len(&self) -> usize {
        self.pairs.len()
    }

    fn sample_size(&self) -> usize {
        7
    }

    fn refine_size(&self) -> usize {
        8
    }

    fn fit_minimal(&self, sample: &[usize]) -> Vec<FundamentalMatrix> {
        let pairs: Vec<_> = sample.iter().map(|&i| self.pairs[i]).collect();
        estimate_f_7pt(&pairs).unwrap_or_default()
    }

    fn fit_refine(&self, inliers: &[usize]) -> Option<FundamentalMatrix> {
        let pairs: Vec<_> = inliers.iter().map(|&i| self.pairs[i]).collect();
        estimate_f_8pt(&pairs).ok()
    }

    fn residual(&self, model: &FundamentalMatrix, i: usize) -> f64 {
        let (p1, p2) = self.pairs[i];
        sampson_distance(model, &p1, &p2).value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalRansacResult {
    pub model: Option<FundamentalMatrix>,
    pub inliers: Vec<usize>,
    pub samples_drawn: usize,
    pub wall_time_ms: f64,
}

/// Fundamental matrix by LO-RANSAC: seven-point minimal solver, normalized
/// eight-point refits and the Sampson distance as residual.
pub fn lo_ransac_fundamental(
    pairs: &[PointPair],
    cfg: &LoConfig,
    qualities: Option<&[f64]>,
) -> Result<FundamentalRansacResult> {
    let order = prosac_order(pairs.len(), qualities)?;
    let start = Instant::now();
    let out = lo_ransac(&FundamentalProblem { pairs }, &order.order, cfg)?;
    Ok(FundamentalRansacResult {
        model: out.model,
        inliers: out.inliers,
        samples_drawn: out.samples_drawn,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_bounds() {
        assert_eq!(required_iterations(0.99, 1.0, 4, 1000), 1);
        assert_eq!(required_iterations(0.99, 0.5, 1, 1000), 7);
        assert_eq!(required_iterations(0.99, 0.5, 4, 1000), 72);
        assert_eq!(required_iterations(0.99, 0.0, 4, 1000), 1000);
        assert_eq!(required_iterations(0.99, 0.01, 4, 1000), 1000);
    }

    #[test]
    fn iteration_bound_matches_formula() {
        for &(c, w, m) in &[(0.95f64, 0.3f64, 4usize), (0.99, 0.7, 3), (0.95, 0.5, 7), (0.99, 0.25, 1)] {
            let direct = ((1.0f64 - c).ln() / (1.0 - w.powi(m as i32)).ln()).ceil() as usize;
            assert_eq!(required_iterations(c, w, m, usize::MAX), direct);
        }
    }

    #[test]
    fn order_examples() {
        let o = prosac_order(3, Some(&[0.1, 0.9, 0.5])).unwrap();
        assert_eq!(o.order, vec![1, 2, 0]);
        assert!(!o.uniform);
        let o = prosac_order(4, Some(&[0.3; 4])).unwrap();
        assert_eq!(o.order, vec![0, 1, 2, 3]);
        let o = prosac_order(3, None).unwrap();
        assert_eq!(o.order, vec![0, 1, 2]);
        assert!(o.uniform);
        assert!(prosac_order(3, Some(&[1.0])).is_err());
    }

    fn binomial_exact(n: u128, k: u128) -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn growth_schedule_matches_closed_form() {
        for &(n_total, m) in &[(20usize, 4usize), (20, 1), (50, 3), (200, 4)] {
            let horizon = prosac_horizon(n_total, m);
            let schedule = prosac_growth_schedule(n_total, m, horizon);
            // Tₙ = T_N·C(n, m)/C(N, m)
            let total = binomial_exact(n_total as u128, m as u128) as f64;
            let t = |n: usize| horizon * binomial_exact(n as u128, m as u128) as f64 / total;
            let mut t_prime = 1usize;
            assert_eq!(schedule[0], 1);
            for n in m..n_total {
                t_prime += ceil_tolerant(t(n + 1) - t(n));
                assert_eq!(schedule[n + 1 - m], t_prime, "N={n_total} m={m} n={n}");
            }
        }
    }

    #[test]
    fn single_point_schedule_walks_the_order() {
        let mut sampler = ProsacSampler::new(vec![4, 2, 0, 1, 3], 1).unwrap();
        let mut rng = seeded_rng(0);
        let drawn: Vec<_> = (0..5).map(|_| sampler.sample(&mut rng)[0]).collect();
        assert_eq!(drawn, vec![4, 2, 0, 1, 3]);
    }

    #[test]
    fn samples_are_distinct_and_include_newest() {
        let mut sampler = ProsacSampler::new((0..30).collect(), 4).unwrap();
        let mut rng = seeded_rng(1);
        for _ in 0..500 {
            let s = sampler.sample(&mut rng);
            let mut sorted = s.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), 4);
            assert!(s.iter().all(|&i| i < sampler.pool_size().max(30)));
        }
    }

    #[test]
    fn combo_names_round_trip() {
        let names: Vec<_> = SolverCombo::ALL.iter().map(|c| c.to_string()).collect();
        assert_eq!(names, ["1S4P", "1S3P", "4P4P", "4P3P", "3P4P", "3P3P"]);
        for c in SolverCombo::ALL {
            assert_eq!(c.to_string().parse::<SolverCombo>().unwrap(), c);
        }
        assert!("2P2P".parse::<SolverCombo>().is_err());
    }
}
