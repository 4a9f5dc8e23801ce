//! Synthetic two-view scenes and the experiment drivers built on them.
//!
//! Cameras sit on a sphere of radius 10 looking at the origin, a plane with a
//! random normal passes through the origin, and points sampled on the plane
//! are projected into both views. Intrinsics are fixed at f = 1000 px with
//! the principal point at (500, 500).

use nalgebra::{Matrix2, Matrix3, Matrix3x4, Vector2, Vector3, Vector4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{
    affine_from_homography, rotation, simulate_sift_from_affine, AffineCorrespondence, SiftCorrespondence,
    SiftFeature,
};
use crate::epipolar::{estimate_f_8pt, FundamentalMatrix, PointPair};
use crate::error::{Error, Result};
use crate::homography::{h_3pt, h_4pt, haf_from_ac, reprojection_error, Homography};
use crate::numerics::{derived_rng, seeded_rng};
use crate::recovery::{filter_candidates, recover_affine, RecoveryResult, DEFAULT_MAX_SCALE, DEFAULT_MAX_SHEAR};

pub const FOCAL: f64 = 1000.0;
pub const PRINCIPAL_POINT: (f64, f64) = (500.0, 500.0);
pub const SPHERE_RADIUS: f64 = 10.0;
/// Points per scene, both for the correspondences and the held-out set.
pub const POINTS_PER_SCENE: usize = 10;
/// Off-plane points used when F is estimated from the data.
pub const GENERAL_POINTS: usize = 20;
/// Half-width of the square patch of the plane that points are drawn from.
const PLANE_EXTENT: f64 = 3.0;
/// Smallest triangle of the H-defining points, as a fraction of the patch
/// area; nearly collinear quadruples make the noisy homography explode.
const MIN_DEFINING_AREA: f64 = 0.05;
/// Minimum |cos| between the plane normal and a camera direction.
const MIN_INCIDENCE: f64 = 0.2;
const MAX_RETRIES: usize = 1000;

/// A generated two-view scene. All `*_exact` data is noise-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub cameras: [Matrix3x4<f64>; 2],
    pub centers: [Vector3<f64>; 2],
    /// `(n, d)` with `n·X + d = 0`; here `d = 0`.
    pub plane: Vector4<f64>,
    pub gt_h: Homography,
    pub gt_f: FundamentalMatrix,
    /// Exact projections of the four plane points defining `gt_h`.
    pub defining_exact: [PointPair; 4],
    pub defining_noisy: [PointPair; 4],
    /// Ground-truth affine correspondences.
    pub points: Vec<AffineCorrespondence>,
    /// Noisy correspondences; `A` comes from the homography re-derived from
    /// the noisy defining points.
    pub noisy: Vec<AffineCorrespondence>,
    /// Simulated detector output for `noisy`.
    pub sift: Vec<SiftCorrespondence>,
    pub betas: Vec<f64>,
    /// Exact in-plane pairs held out for evaluating homographies.
    pub holdout: Vec<PointPair>,
    /// Noisy pairs of off-plane points, for estimating F.
    pub general_noisy: Vec<PointPair>,
    pub noise_sigma: f64,
    /// Camera distance as a percentage of the sphere radius.
    pub baseline_ratio: f64,
}

fn intrinsics() -> Matrix3<f64> {
    Matrix3::new(FOCAL, 0.0, PRINCIPAL_POINT.0, 0.0, FOCAL, PRINCIPAL_POINT.1, 0.0, 0.0, 1.0)
}

fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v: Vector3<f64> = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

fn orthonormal_complement(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Camera at `center` looking at the origin, rolled by `up`.
fn look_at(center: &Vector3<f64>, up: &Vector3<f64>) -> Matrix3x4<f64> {
    let z = -center.normalize();
    let x = up.cross(&z).normalize();
    let y = z.cross(&x);
    let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let t = -(r * center);
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    rt.set_column(3, &t);
    intrinsics() * rt
}

fn random_up<R: Rng>(rng: &mut R, center: &Vector3<f64>) -> Vector3<f64> {
    let dir = center.normalize();
    loop {
        let up = random_unit(rng);
        if up.dot(&dir).abs() < 0.9 {
            return up;
        }
    }
}

fn project(p: &Matrix3x4<f64>, x: &Vector3<f64>) -> Option<Vector2<f64>> {
    let h = p * x.push(1.0);
    (h.z > 1e-9).then(|| Vector2::new(h.x / h.z, h.y / h.z))
}

fn project_pair(cams: &[Matrix3x4<f64>; 2], x: &Vector3<f64>) -> Option<PointPair> {
    Some((project(&cams[0], x)?, project(&cams[1], x)?))
}

fn gaussian_pair<R: Rng>(rng: &mut R, noise: &Normal<f64>, p: &PointPair) -> PointPair {
    (
        p.0 + Vector2::new(noise.sample(rng), noise.sample(rng)),
        p.1 + Vector2::new(noise.sample(rng), noise.sample(rng)),
    )
}

/// Camera centers, plane and cameras; shared by every scene generator.
struct Rig {
    centers: [Vector3<f64>; 2],
    cameras: [Matrix3x4<f64>; 2],
    normal: Vector3<f64>,
    basis: (Vector3<f64>, Vector3<f64>),
    baseline_ratio: f64,
}

impl Rig {
    fn sample<R: Rng>(rng: &mut R, baseline_ratio: Option<f64>) -> Result<Rig> {
        for _ in 0..MAX_RETRIES {
            let c1 = random_unit(rng) * SPHERE_RADIUS;
            let c2 = match baseline_ratio {
                None => random_unit(rng) * SPHERE_RADIUS,
                Some(ratio) => {
                    let chord = ratio / 100.0 * SPHERE_RADIUS;
                    let theta = 2.0 * (chord / (2.0 * SPHERE_RADIUS)).asin();
                    let dir = c1.normalize();
                    let t = orthonormal_complement(&dir);
                    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let tangent = t.0 * phi.cos() + t.1 * phi.sin();
                    (dir * theta.cos() + tangent * theta.sin()) * SPHERE_RADIUS
                }
            };
            let normal = random_unit(rng);
            let d1 = normal.dot(&c1) / SPHERE_RADIUS;
            let d2 = normal.dot(&c2) / SPHERE_RADIUS;
            // both cameras must see the same side of the plane, not at grazing angles
            if d1 * d2 <= 0.0 || d1.abs() < MIN_INCIDENCE || d2.abs() < MIN_INCIDENCE {
                continue;
            }
            let up1 = random_up(rng, &c1);
            let up2 = random_up(rng, &c2);
            let cameras = [look_at(&c1, &up1), look_at(&c2, &up2)];
            return Ok(Rig {
                centers: [c1, c2],
                cameras,
                normal,
                basis: orthonormal_complement(&normal),
                baseline_ratio: (c1 - c2).norm() / SPHERE_RADIUS * 100.0,
            });
        }
        Err(Error::Degenerate("could not place cameras and plane"))
    }

    fn plane_point<R: Rng>(&self, rng: &mut R) -> Vector3<f64> {
        let a: f64 = rng.random_range(-PLANE_EXTENT..PLANE_EXTENT);
        let b: f64 = rng.random_range(-PLANE_EXTENT..PLANE_EXTENT);
        self.basis.0 * a + self.basis.1 * b
    }

    fn plane_pair<R: Rng>(&self, rng: &mut R) -> Result<PointPair> {
        project_pair(&self.cameras, &self.plane_point(rng)).ok_or(Error::Degenerate("plane point behind a camera"))
    }

    /// Ground truth from four plane points in general position: every
    /// triangle they form covers at least [`MIN_DEFINING_AREA`] of the patch.
    fn homography<R: Rng>(&self, rng: &mut R) -> Result<([PointPair; 4], Homography)> {
        let patch = (2.0 * PLANE_EXTENT).powi(2);
        for _ in 0..MAX_RETRIES {
            let x = [0; 4].map(|_| self.plane_point(rng));
            let smallest = (0..4)
                .map(|skip| {
                    let t: Vec<_> = (0..4).filter(|&i| i != skip).map(|i| x[i]).collect();
                    0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm()
                })
                .fold(f64::INFINITY, f64::min);
            if smallest < MIN_DEFINING_AREA * patch {
                continue;
            }
            let mut defining = [(Vector2::zeros(), Vector2::zeros()); 4];
            for (d, p) in defining.iter_mut().zip(&x) {
                *d = project_pair(&self.cameras, p).ok_or(Error::Degenerate("plane point behind a camera"))?;
            }
            let h = h_4pt(&defining)?;
            return Ok((defining, h));
        }
        Err(Error::Degenerate("no well-spread defining points"))
    }

    fn fundamental(&self) -> Result<FundamentalMatrix> {
        FundamentalMatrix::from_projections(&self.cameras[0], &self.cameras[1])
    }
}

/// Generates a scene from `seed`.
///
/// Geometry and noise are drawn from separate streams, so scenes generated
/// with the same seed and different `noise_sigma` share their geometry.
pub fn generate_scene(seed: u64, noise_sigma: f64, baseline_ratio: Option<f64>) -> Result<SyntheticScene> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("noise sigma must be ≥ 0, got {noise_sigma}")));
    }
    if let Some(r) = baseline_ratio {
        if !(r > 0.0 && r <= 200.0) {
            return Err(Error::InvalidInput(format!("baseline ratio must lie in (0, 200], got {r}")));
        }
    }
    let noise = Normal::new(0.0, noise_sigma).expect("sigma checked above");
    let mut geo = derived_rng(seed, 0);
    let mut last = Error::Degenerate("scene generation did not run");
    for attempt in 0..MAX_RETRIES as u64 {
        let mut noise_rng = derived_rng(seed, 1 + attempt);
        match build_scene(&mut geo, &mut noise_rng, &noise, noise_sigma, baseline_ratio) {
            Ok(s) => return Ok(s),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn build_scene(
    geo: &mut ChaCha8Rng,
    noise_rng: &mut ChaCha8Rng,
    noise: &Normal<f64>,
    noise_sigma: f64,
    baseline_ratio: Option<f64>,
) -> Result<SyntheticScene> {
    let rig = Rig::sample(geo, baseline_ratio)?;
    let gt_f = rig.fundamental()?;
    let (defining_exact, gt_h) = rig.homography(geo)?;

    let mut points = Vec::with_capacity(POINTS_PER_SCENE);
    for _ in 0..POINTS_PER_SCENE {
        let (p1, p2) = rig.plane_pair(geo)?;
        let (_, a) = affine_from_homography(&gt_h, &p1)?;
        points.push(AffineCorrespondence { p1, p2, a });
    }
    let holdout = (0..POINTS_PER_SCENE)
        .map(|_| rig.plane_pair(geo))
        .collect::<Result<Vec<_>>>()?;
    let general_exact = (0..GENERAL_POINTS)
        .map(|_| {
            let x = random_unit(geo) * geo.random_range(0.0..PLANE_EXTENT);
            project_pair(&rig.cameras, &x).ok_or(Error::Degenerate("point behind a camera"))
        })
        .collect::<Result<Vec<_>>>()?;
    let betas: Vec<f64> = (0..POINTS_PER_SCENE)
        .map(|_| geo.random_range(0.0..std::f64::consts::TAU))
        .collect();

    let defining_noisy = defining_exact.map(|p| gaussian_pair(noise_rng, noise, &p));
    let noisy_h = if noise_sigma > 0.0 { h_4pt(&defining_noisy)? } else { gt_h };
    let mut noisy = Vec::with_capacity(POINTS_PER_SCENE);
    let mut sift = Vec::with_capacity(POINTS_PER_SCENE);
    for (ac, &beta) in points.iter().zip(&betas) {
        let (p1, p2) = gaussian_pair(noise_rng, noise, &(ac.p1, ac.p2));
        let (_, a) = affine_from_homography(&noisy_h, &ac.p1)?;
        let n = AffineCorrespondence { p1, p2, a };
        sift.push(simulate_sift_from_affine(&n, beta)?);
        noisy.push(n);
    }
    let general_noisy = general_exact.iter().map(|p| gaussian_pair(noise_rng, noise, p)).collect();

    Ok(SyntheticScene {
        cameras: rig.cameras,
        centers: rig.centers,
        plane: rig.normal.push(0.0),
        gt_h,
        gt_f,
        defining_exact,
        defining_noisy,
        points,
        noisy,
        sift,
        betas,
        holdout,
        general_noisy,
        noise_sigma,
        baseline_ratio: rig.baseline_ratio,
    })
}

/// Similarity approximations of `A` built from detector output alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApproxVariant {
    /// `R(α₂ − α₁)·diag(q, q)`
    RotTimesScale,
    /// `R(α₂)·diag(q, q)·R(−α₁)`
    RotScaleRot,
}

pub fn approx_affine(alpha1: f64, alpha2: f64, variant: ApproxVariant, q: f64) -> Matrix2<f64> {
    let d = Matrix2::from_diagonal_element(q);
    match variant {
        ApproxVariant::RotTimesScale => rotation(alpha2 - alpha1) * d,
        ApproxVariant::RotScaleRot => rotation(alpha2) * d * rotation(-alpha1),
    }
}

/// One line of a curve table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub sigma: f64,
    /// Set for baseline sweeps only.
    pub baseline: Option<f64>,
    pub method: String,
    pub mean_error: f64,
    pub std_error: f64,
    /// Trials that produced an estimate.
    pub trials: usize,
}

fn summarize(sigma: f64, baseline: Option<f64>, method: &str, errors: &[f64]) -> CurveRow {
    let n = errors.len();
    let mean = if n == 0 { f64::NAN } else { errors.iter().sum::<f64>() / n as f64 };
    let std_error = if n < 2 {
        0.0
    } else {
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    CurveRow {
        sigma,
        baseline,
        method: method.to_string(),
        mean_error: mean,
        std_error,
        trials: n,
    }
}

/// CSV rendering with a fixed header; the `baseline` column appears only
/// when some row carries a baseline.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let sweep = rows.iter().any(|r| r.baseline.is_some());
    let mut out = String::from(if sweep {
        "sigma,baseline,method,mean_error,std_error,trials\n"
    } else {
        "sigma,method,mean_error,std_error,trials\n"
    });
    for r in rows {
        if sweep {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{}\n",
                r.sigma,
                r.baseline.unwrap_or(f64::NAN),
                r.method,
                r.mean_error,
                r.std_error,
                r.trials
            ));
        } else {
            out.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                r.sigma, r.method, r.mean_error, r.std_error, r.trials
            ));
        }
    }
    out
}

/// Scene seed of trial `trial` in an experiment seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    derived_rng(seed, trial as u64).random()
}

pub const AFFINE_METHODS: [&str; 3] = ["proposed", "rot_times_scale", "rot_scale_rot"];

/// Per-trial mean Frobenius errors `[proposed, rot_times_scale, rot_scale_rot]`.
///
/// The proposed entry keeps, per point, the candidate closest to the ground
/// truth among those passing the default scale and shear filter, and
/// averages over the points that kept one; it is `None` when none did.
pub fn affine_errors(scene: &SyntheticScene) -> [Option<f64>; 3] {
    let n = scene.points.len() as f64;
    let mut proposed = (0.0, 0usize);
    let mut approx = [0.0; 2];
    for (gt, corr) in scene.points.iter().zip(&scene.sift) {
        let best = filtered_recovery(&scene.gt_f, corr)
            .candidates
            .iter()
            .map(|c| (c.ac.a - gt.a).norm())
            .min_by(f64::total_cmp);
        if let Some(e) = best {
            proposed = (proposed.0 + e, proposed.1 + 1);
        }
        let (a1, a2, q) = (corr.first.orientation, corr.second.orientation, corr.relative_scale());
        for (slot, variant) in [(0, ApproxVariant::RotTimesScale), (1, ApproxVariant::RotScaleRot)] {
            approx[slot] += (approx_affine(a1, a2, variant, q) - gt.a).norm();
        }
    }
    [
        (proposed.1 > 0).then(|| proposed.0 / proposed.1 as f64),
        Some(approx[0] / n),
        Some(approx[1] / n),
    ]
}

/// Recovery followed by the default candidate filter, as in robust
/// estimation.
fn filtered_recovery(f: &FundamentalMatrix, corr: &SiftCorrespondence) -> RecoveryResult {
    filter_candidates(recover_affine(f, corr), DEFAULT_MAX_SCALE, DEFAULT_MAX_SHEAR)
}

/// Mean Frobenius error of the recovered affinity (best candidate) and of
/// both similarity approximations, per noise level.
pub fn run_affine_error_experiment(sigmas: &[f64], trials: usize, seed: u64) -> Result<Vec<CurveRow>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let per_trial = (0..trials)
            .into_par_iter()
            .map(|t| generate_scene(trial_seed(seed, t), sigma, None).map(|s| affine_errors(&s)))
            .collect::<Result<Vec<_>>>()?;
        for (k, method) in AFFINE_METHODS.iter().enumerate() {
            let errs: Vec<f64> = per_trial.iter().filter_map(|e| e[k]).collect();
            rows.push(summarize(sigma, None, method, &errs));
        }
    }
    Ok(rows)
}

/// Source of the fundamental matrix in homography experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    GroundTruth,
    /// Normalized eight-point algorithm on noisy off-plane correspondences.
    EstimatedEightPoint,
}

pub const HOMOGRAPHY_METHODS: [&str; 3] = ["haf", "4pt", "3pt"];

fn mean_holdout_error(h: &Homography, holdout: &[PointPair]) -> f64 {
    holdout.iter().map(|(p1, p2)| reprojection_error(h, p1, p2)).sum::<f64>() / holdout.len() as f64
}

/// Mean held-out reprojection errors `[haf, 4pt, 3pt]` for one scene; `None`
/// where a solver failed. HAF uses the first correspondence (best filtered
/// recovery candidate), 4PT the first four and 3PT the first three.
pub fn homography_errors(scene: &SyntheticScene, f_mode: FMode) -> [Option<f64>; 3] {
    let f = match f_mode {
        FMode::GroundTruth => Some(scene.gt_f),
        FMode::EstimatedEightPoint => estimate_f_8pt(&scene.general_noisy).ok(),
    };
    let pairs: Vec<PointPair> = scene.noisy.iter().map(|ac| (ac.p1, ac.p2)).collect();
    let haf = f.and_then(|f| {
        filtered_recovery(&f, &scene.sift[0])
            .candidates
            .iter()
            .filter_map(|c| haf_from_ac(&f, &c.ac).ok())
            .map(|h| mean_holdout_error(&h, &scene.holdout))
            .min_by(f64::total_cmp)
    });
    let four = h_4pt(&pairs[..4]).ok().map(|h| mean_holdout_error(&h, &scene.holdout));
    let three = f
        .and_then(|f| h_3pt(&f, &pairs[..3]).ok())
        .map(|h| mean_holdout_error(&h, &scene.holdout));
    [haf, four, three].map(|e| e.filter(|v| v.is_finite()))
}

/// Homography accuracy of HAF, 4PT and 3PT per noise level, and per
/// baseline ratio when `baselines` is given.
pub fn run_homography_experiment(
    sigmas: &[f64],
    trials: usize,
    f_mode: FMode,
    baselines: Option<&[f64]>,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let configs: Vec<Option<f64>> = match baselines {
        None => vec![None],
        Some(b) => b.iter().copied().map(Some).collect(),
    };
    let mut rows = Vec::new();
    for baseline in configs {
        for &sigma in sigmas {
            let per_trial = (0..trials)
                .into_par_iter()
                .map(|t| generate_scene(trial_seed(seed, t), sigma, baseline).map(|s| homography_errors(&s, f_mode)))
                .collect::<Result<Vec<_>>>()?;
            for (k, method) in HOMOGRAPHY_METHODS.iter().enumerate() {
                let errs: Vec<f64> = per_trial.iter().filter_map(|e| e[k]).collect();
                rows.push(summarize(sigma, baseline, method, &errs));
            }
        }
    }
    Ok(rows)
}

/// A planar match set with uniformly random outliers, for robust estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWithOutliers {
    pub corrs: Vec<SiftCorrespondence>,
    pub is_inlier: Vec<bool>,
    pub gt_h: Homography,
    pub gt_f: FundamentalMatrix,
    /// Higher for matches closer to the ground truth, with noise added.
    pub qualities: Vec<f64>,
}

/// `inliers` plane matches (noise `sigma` on coordinates) shuffled together
/// with `outliers` random matches inside the bounding box of the inliers.
pub fn plane_with_outliers(seed: u64, inliers: usize, outliers: usize, sigma: f64) -> Result<PlaneWithOutliers> {
    let noise = Normal::new(0.0, sigma).map_err(|_| Error::InvalidInput(format!("bad sigma {sigma}")))?;
    let mut rng = seeded_rng(seed);
    'retry: for _ in 0..MAX_RETRIES {
        let rig = Rig::sample(&mut rng, None)?;
        let gt_f = rig.fundamental()?;
        let Ok((_, gt_h)) = rig.homography(&mut rng) else { continue };
        let mut items: Vec<(SiftCorrespondence, bool)> = Vec::with_capacity(inliers + outliers);
        for _ in 0..inliers {
            let Ok((p1, p2)) = rig.plane_pair(&mut rng) else { continue 'retry };
            let Ok((_, a)) = affine_from_homography(&gt_h, &p1) else { continue 'retry };
            let (n1, n2) = gaussian_pair(&mut rng, &noise, &(p1, p2));
            let beta = rng.random_range(0.0..std::f64::consts::TAU);
            let Ok(s) = simulate_sift_from_affine(&AffineCorrespondence { p1: n1, p2: n2, a }, beta) else {
                continue 'retry;
            };
            items.push((s, true));
        }
        let (lo1, hi1) = bounding_box(items.iter().map(|c| c.0.first.pos));
        let (lo2, hi2) = bounding_box(items.iter().map(|c| c.0.second.pos));
        for _ in 0..outliers {
            let p1 = uniform_in(&mut rng, &lo1, &hi1);
            let p2 = uniform_in(&mut rng, &lo2, &hi2);
            let f1 = SiftFeature::new(p1.x, p1.y, 1.0, rng.random_range(0.0..std::f64::consts::TAU))?;
            let f2 = SiftFeature::new(
                p2.x,
                p2.y,
                rng.random_range(0.25..4.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            )?;
            items.push((SiftCorrespondence::new(f1, f2), false));
        }
        // Fisher-Yates so inliers and outliers interleave
        for i in (1..items.len()).rev() {
            let j = rng.random_range(0..=i);
            items.swap(i, j);
        }
        let qualities = items
            .iter()
            .map(|(c, _)| {
                let (p1, p2) = c.points();
                let r = reprojection_error(&gt_h, &p1, &p2);
                1.0 / (1.0 + r) + rng.random_range(0.0..0.5)
            })
            .collect();
        let (corrs, is_inlier) = items.into_iter().unzip();
        return Ok(PlaneWithOutliers {
            corrs,
            is_inlier,
            gt_h,
            gt_f,
            qualities,
        });
    }
    Err(Error::Degenerate("could not generate a planar match set"))
}

pub(crate) fn bounding_box(points: impl Iterator<Item = Vector2<f64>>) -> (Vector2<f64>, Vector2<f64>) {
    let mut lo = Vector2::repeat(f64::INFINITY);
    let mut hi = Vector2::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    (lo, hi)
}

pub(crate) fn uniform_in<R: Rng>(rng: &mut R, lo: &Vector2<f64>, hi: &Vector2<f64>) -> Vector2<f64> {
    let pick = |rng: &mut R, a: f64, b: f64| if b > a { rng.random_range(a..b) } else { a };
    Vector2::new(pick(rng, lo.x, hi.x), pick(rng, lo.y, hi.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epipolar::af_consistency_residual;

    #[test]
    fn noise_free_scene_invariants() {
        for seed in 0..50 {
            let s = generate_scene(seed, 0.0, None).unwrap();
            for c in &s.centers {
                assert!((c.norm() - SPHERE_RADIUS).abs() < 1e-9);
            }
            for ac in &s.points {
                let scale = ac.p1.norm().max(ac.p2.norm());
                assert!(s.gt_f.algebraic_residual(&ac.p1, &ac.p2).abs() < 1e-9 * scale);
                let (p2, a) = affine_from_homography(&s.gt_h, &ac.p1).unwrap();
                assert!((p2 - ac.p2).norm() < 1e-9 * scale);
                assert!((a - ac.a).norm() < 1e-9);
                assert!(af_consistency_residual(&s.gt_f, ac).unwrap() < 1e-9);
            }
            assert_eq!(s.noisy, s.points);
        }
    }

    #[test]
    fn scenes_are_reproducible_and_share_geometry_across_noise() {
        let a = generate_scene(7, 0.5, None).unwrap();
        assert_eq!(a, generate_scene(7, 0.5, None).unwrap());
        let b = generate_scene(7, 0.0, None).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.cameras, b.cameras);
        assert_ne!(a.noisy, b.noisy);
    }

    #[test]
    fn gt_affinity_matches_finite_differences() {
        let s = generate_scene(3, 0.0, None).unwrap();
        let h = 1e-4;
        for ac in &s.points {
            let m = |p: Vector2<f64>| s.gt_h.map(&p).unwrap();
            let du = (m(ac.p1 + Vector2::new(h, 0.0)) - m(ac.p1 - Vector2::new(h, 0.0))) / (2.0 * h);
            let dv = (m(ac.p1 + Vector2::new(0.0, h)) - m(ac.p1 - Vector2::new(0.0, h))) / (2.0 * h);
            let fd = Matrix2::from_columns(&[du, dv]);
            assert!((fd - ac.a).norm() < 1e-5, "{fd} vs {}", ac.a);
        }
    }

    #[test]
    fn baseline_ratio_is_honored() {
        for &r in &[5.0, 20.0, 50.0] {
            let s = generate_scene(11, 0.0, Some(r)).unwrap();
            assert!((s.baseline_ratio - r).abs() < 1e-9);
        }
    }

    #[test]
    fn approximations() {
        let id = approx_affine(0.7, 0.7, ApproxVariant::RotTimesScale, 1.0);
        assert!((id - Matrix2::identity()).norm() < 1e-15);
        let mut rng = seeded_rng(5);
        for _ in 0..1000 {
            let (a1, a2, q) = (rng.random_range(0.0..7.0), rng.random_range(0.0..7.0), rng.random_range(0.1..5.0));
            let x = approx_affine(a1, a2, ApproxVariant::RotTimesScale, q);
            let y = approx_affine(a1, a2, ApproxVariant::RotScaleRot, q);
            assert!((x - y).norm() < 1e-14 * q.max(1.0));
        }
    }

    #[test]
    fn approximation_error_positive_for_anisotropic_affinity() {
        let s = generate_scene(2, 0.0, None).unwrap();
        let e = affine_errors(&s);
        assert!(e[0].unwrap() < 1e-8);
        assert!(e[1].unwrap() > 0.0 && e[2].unwrap() > 0.0);
    }

    #[test]
    fn curve_csv_layout() {
        let rows = vec![summarize(0.5, None, "haf", &[1.0, 3.0])];
        assert_eq!(curve_csv(&rows), "sigma,method,mean_error,std_error,trials\n0.5,haf,2e0,1e0,2\n");
    }

    #[test]
    fn planted_outliers() {
        let p = plane_with_outliers(1, 30, 30, 0.0).unwrap();
        assert_eq!(p.corrs.len(), 60);
        assert_eq!(p.is_inlier.iter().filter(|&&b| b).count(), 30);
        for (c, &inl) in p.corrs.iter().zip(&p.is_inlier) {
            if inl {
                let (p1, p2) = c.points();
                assert!(reprojection_error(&p.gt_h, &p1, &p2) < 1e-6);
            }
        }
    }
}
