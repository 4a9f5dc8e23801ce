//! Per-plane evaluation of a solver combination on labelled match lists.
//!
//! F is estimated once from all matches. Then, for each labelled plane and
//! each repeat, the matches of the other planes and the outliers are
//! replaced by the same number of random correspondences, the combination
//! is run, and its mapping of the labelled inliers is compared with that of
//! a DLT fit to them.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{SiftCorrespondence, SiftFeature};
use crate::epipolar::{FundamentalMatrix, PointPair};
use crate::error::{Error, Result};
use crate::homography::{h_dlt, reprojection_error, Homography};
use crate::numerics::derived_rng;
use crate::robust::{lo_ransac_fundamental, lo_ransac_homography, LoConfig, RansacConfig, SolverCombo};
use crate::synthbench::{bounding_box, uniform_in};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub combo: SolverCombo,
    pub confidence: f64,
    pub threshold: f64,
    pub repeats: usize,
    /// Runs with mean error above this many pixels count as not found.
    pub fn_threshold: f64,
    pub seed: u64,
    pub lo_iterations: usize,
    pub max_samples: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let r = RansacConfig::default();
        EvalConfig {
            combo: r.combo,
            confidence: r.confidence,
            threshold: r.threshold,
            repeats: 100,
            fn_threshold: 10.0,
            seed: 0,
            lo_iterations: r.lo_iterations,
            max_samples: r.max_samples,
        }
    }
}

/// Outcome for one plane, averaged over repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneRow {
    pub label: i64,
    pub inliers: usize,
    /// Too few labelled inliers to evaluate; all metrics are NaN.
    pub skipped: bool,
    /// Percentage of repeats that did not find the plane.
    pub fn_percent: f64,
    /// Mean reprojection error over the found repeats, in pixels.
    pub epsilon: f64,
    pub samples: f64,
    pub time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub fn_percent: f64,
    pub epsilon: f64,
    pub samples: f64,
    pub time_ms: f64,
    pub planes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<PlaneRow>,
    pub aggregate: Aggregate,
    /// Inliers and samples of the F estimation; all matches and 0 when F
    /// was given.
    pub f_inliers: usize,
    pub f_samples: usize,
    pub fundamental: [f64; 9],
}

/// Mean over the evaluated rows; ε only over rows where it is defined.
pub fn aggregate(rows: &[PlaneRow]) -> Aggregate {
    let used: Vec<&PlaneRow> = rows.iter().filter(|r| !r.skipped).collect();
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            f64::NAN
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    Aggregate {
        fn_percent: mean(used.iter().map(|r| r.fn_percent).collect()),
        epsilon: mean(used.iter().map(|r| r.epsilon).filter(|e| e.is_finite()).collect()),
        samples: mean(used.iter().map(|r| r.samples).collect()),
        time_ms: mean(used.iter().map(|r| r.time_ms).collect()),
        planes: used.len(),
    }
}

struct Run {
    error: Option<f64>,
    samples: usize,
    time_ms: f64,
}

fn random_correspondence<R: Rng>(
    rng: &mut R,
    boxes: &[(nalgebra::Vector2<f64>, nalgebra::Vector2<f64>); 2],
    scales: (f64, f64),
) -> Result<SiftCorrespondence> {
    let tau = std::f64::consts::TAU;
    let mut feature = |b: &(nalgebra::Vector2<f64>, nalgebra::Vector2<f64>)| {
        let p = uniform_in(rng, &b.0, &b.1);
        let s = if scales.1 > scales.0 {
            rng.random_range(scales.0..scales.1)
        } else {
            scales.0
        };
        SiftFeature::new(p.x, p.y, s, rng.random_range(0.0..tau))
    };
    Ok(SiftCorrespondence::new(feature(&boxes[0])?, feature(&boxes[1])?))
}

/// Runs the protocol on a labelled match list. A `known_f` replaces the
/// estimation of F; a single plane alone does not determine it.
pub fn evaluate(
    corrs: &[SiftCorrespondence],
    labels: &[i64],
    qualities: Option<&[f64]>,
    known_f: Option<&FundamentalMatrix>,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    if labels.len() != corrs.len() {
        return Err(Error::InvalidInput("one label per correspondence is required".into()));
    }
    if cfg.repeats == 0 {
        return Err(Error::InvalidInput("repeats must be at least 1".into()));
    }
    if let Some(q) = qualities {
        if q.len() != corrs.len() {
            return Err(Error::InvalidInput("one quality per correspondence is required".into()));
        }
    }

    let pairs: Vec<PointPair> = corrs.iter().map(|c| c.points()).collect();
    let (f, f_inliers, f_samples) = match known_f {
        Some(f) => (*f, corrs.len(), 0),
        None => {
            let run = lo_ransac_fundamental(
                &pairs,
                &LoConfig {
                    threshold: cfg.threshold,
                    confidence: cfg.confidence,
                    max_samples: cfg.max_samples,
                    lo_iterations: cfg.lo_iterations,
                    seed: cfg.seed,
                },
                qualities,
            )?;
            let f = run.model.ok_or(Error::Degenerate("no fundamental matrix found"))?;
            (f, run.inliers.len(), run.samples_drawn)
        }
    };

    let boxes = [
        bounding_box(pairs.iter().map(|p| p.0)),
        bounding_box(pairs.iter().map(|p| p.1)),
    ];
    let scale_range = corrs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), c| {
        let (a, b) = (c.first.scale, c.second.scale);
        (lo.min(a).min(b), hi.max(a).max(b))
    });
    let quality_range = qualities.map(|q| {
        q.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    });

    let mut planes: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            planes.entry(l).or_default().push(i);
        }
    }
    let min_inliers = 4.max(cfg.combo.sample_size() + 1);

    let mut rows = Vec::with_capacity(planes.len());
    for (&label, members) in &planes {
        let skipped_row = || PlaneRow {
            label,
            inliers: members.len(),
            skipped: true,
            fn_percent: f64::NAN,
            epsilon: f64::NAN,
            samples: f64::NAN,
            time_ms: f64::NAN,
        };
        if members.len() < min_inliers {
            rows.push(skipped_row());
            continue;
        }
        let plane_pairs: Vec<PointPair> = members.iter().map(|&i| pairs[i]).collect();
        let Ok(gt) = h_dlt(&plane_pairs) else {
            rows.push(skipped_row());
            continue;
        };
        let plane_seed = derived_rng(cfg.seed, label as u64 + 1).random::<u64>();
        let runs = (0..cfg.repeats)
            .into_par_iter()
            .map(|r| {
                run_once(
                    corrs,
                    members,
                    qualities,
                    quality_range,
                    &f,
                    &gt,
                    &boxes,
                    scale_range,
                    cfg,
                    derived_rng(plane_seed, r as u64).random(),
                )
            })
            .collect::<Result<Vec<Run>>>()?;
        let found: Vec<f64> = runs
            .iter()
            .filter_map(|r| r.error.filter(|&e| e <= cfg.fn_threshold))
            .collect();
        let n = runs.len() as f64;
        rows.push(PlaneRow {
            label,
            inliers: members.len(),
            skipped: false,
            fn_percent: 100.0 * (runs.len() - found.len()) as f64 / n,
            epsilon: if found.is_empty() {
                f64::NAN
            } else {
                found.iter().sum::<f64>() / found.len() as f64
            },
            samples: runs.iter().map(|r| r.samples as f64).sum::<f64>() / n,
            time_ms: runs.iter().map(|r| r.time_ms).sum::<f64>() / n,
        });
    }
    Ok(EvalReport {
        aggregate: aggregate(&rows),
        rows,
        f_inliers,
        f_samples,
        fundamental: f.row_major(),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_once(
    corrs: &[SiftCorrespondence],
    members: &[usize],
    qualities: Option<&[f64]>,
    quality_range: Option<(f64, f64)>,
    f: &FundamentalMatrix,
    gt: &Homography,
    boxes: &[(nalgebra::Vector2<f64>, nalgebra::Vector2<f64>); 2],
    scale_range: (f64, f64),
    cfg: &EvalConfig,
    seed: u64,
) -> Result<Run> {
    let mut rng = derived_rng(seed, 0);
    let replaced = corrs.len() - members.len();
    let mut set: Vec<(SiftCorrespondence, Option<f64>)> = members
        .iter()
        .map(|&i| (corrs[i], qualities.map(|q| q[i])))
        .collect();
    for _ in 0..replaced {
        let c = random_correspondence(&mut rng, boxes, scale_range)?;
        let q = quality_range.map(|(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo });
        set.push((c, q));
    }
    for i in (1..set.len()).rev() {
        let j = rng.random_range(0..=i);
        set.swap(i, j);
    }
    let (sample, qs): (Vec<SiftCorrespondence>, Vec<Option<f64>>) = set.into_iter().unzip();
    let qs: Option<Vec<f64>> = qs.into_iter().collect();
    let rcfg = RansacConfig {
        threshold: cfg.threshold,
        confidence: cfg.confidence,
        max_samples: cfg.max_samples,
        seed: rng.random(),
        lo_iterations: cfg.lo_iterations,
        combo: cfg.combo,
        ..RansacConfig::default()
    };
    let res = lo_ransac_homography(&sample, Some(f), &rcfg, qs.as_deref())?;
    // distance between the estimated and the ground-truth mapping of every
    // labelled inlier
    let error = res.model.map(|h| {
        members
            .iter()
            .map(|&i| {
                let p1 = corrs[i].first.pos;
                gt.map(&p1).map_or(f64::INFINITY, |g| reprojection_error(&h, &p1, &g))
            })
            .sum::<f64>()
            / members.len() as f64
    });
    Ok(Run {
        error,
        samples: res.samples_drawn,
        time_ms: res.wall_time_ms,
    })
}
