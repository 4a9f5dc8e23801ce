//! Small numerical kernel: low-degree polynomial roots, least squares,
//! Hartley normalization, null spaces and the seeded RNG contract.

use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default relative threshold below which a polynomial coefficient is treated as zero.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Default cap on the condition number accepted by [`least_squares`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Real roots of `a·x² + b·x + c`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadraticRoots {
    /// Ascending.
    pub roots: Vec<f64>,
    /// The leading coefficient vanished and the equation was solved as linear.
    pub degenerate_linear: bool,
    /// Every coefficient vanished.
    pub identically_degenerate: bool,
}

/// Solves `a·x² + b·x + c = 0`.
///
/// `eps` is relative to `max(|a|, |b|, |c|)`: a coefficient below `eps` times
/// that magnitude is treated as zero.
pub fn solve_quadratic(a: f64, b: f64, c: f64, eps: f64) -> QuadraticRoots {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if !(scale.is_finite() && scale > 0.0) {
        return QuadraticRoots {
            identically_degenerate: true,
            ..Default::default()
        };
    }
    let tol = eps * scale;

    if a.abs() <= tol {
        if b.abs() <= tol {
            return QuadraticRoots::default();
        }
        return QuadraticRoots {
            roots: vec![-c / b],
            degenerate_linear: true,
            identically_degenerate: false,
        };
    }

    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return QuadraticRoots::default();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = if q == 0.0 {
        // b = 0 and c = 0
        vec![0.0]
    } else {
        vec![q / a, c / q]
    };
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    QuadraticRoots {
        roots,
        degenerate_linear: false,
        identically_degenerate: false,
    }
}

/// Real roots of `a·x³ + b·x² + c·x + d`, ascending. Falls back to
/// [`solve_quadratic`] when the cubic coefficient vanishes.
pub fn solve_cubic(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if !(scale.is_finite() && scale > 0.0) {
        return Vec::new();
    }
    if a.abs() <= DEFAULT_EPS * scale {
        return solve_quadratic(b, c, d, DEFAULT_EPS).roots;
    }

    let (b, c, d) = (b / a, c / a, d / a);
    // x = t - b/3 gives t³ + p·t + q = 0
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let mut roots = Vec::with_capacity(3);
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let delta = half_q * half_q + third_p * third_p * third_p;
    if delta < 0.0 {
        // three distinct real roots
        let r = (-third_p).sqrt();
        let phi = (-half_q / (r * r * r)).clamp(-1.0, 1.0).acos();
        for k in 0..3 {
            let t = 2.0 * r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
            roots.push(t - shift);
        }
    } else {
        let sq = delta.sqrt();
        let t = (-half_q + sq).cbrt() + (-half_q - sq).cbrt();
        roots.push(t - shift);
    }

    let poly = |x: f64| ((x + b) * x + c) * x + d;
    let deriv = |x: f64| (3.0 * x + 2.0 * b) * x + c;
    for r in &mut roots {
        for _ in 0..3 {
            let dp = deriv(*r);
            if dp == 0.0 {
                break;
            }
            let step = poly(*r) / dp;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Solution of an overdetermined linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: DVector<f64>,
    /// `‖M·x − b‖₂`
    pub residual: f64,
}

/// Minimizes `‖M·x − b‖₂` for a full-column-rank `M` (m ≥ n).
pub fn least_squares(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<LeastSquares> {
    least_squares_with_cap(m, b, DEFAULT_CONDITION_CAP)
}

/// [`least_squares`] with an explicit condition-number cap.
pub fn least_squares_with_cap(
    m: &DMatrix<f64>,
    b: &DVector<f64>,
    condition_cap: f64,
) -> Result<LeastSquares> {
    let (rows, cols) = m.shape();
    if rows < cols || b.len() != rows {
        return Err(Error::InvalidInput(format!(
            "least squares needs an m×n matrix with m ≥ n and an m-vector, got {rows}×{cols} and {}",
            b.len()
        )));
    }
    let svd = m.clone().svd(true, true);
    let sigma = &svd.singular_values;
    let sigma_max = sigma.max();
    let rank = sigma
        .iter()
        .filter(|&&s| s > 0.0 && s * condition_cap > sigma_max)
        .count();
    if rank < cols || !sigma_max.is_finite() {
        return Err(Error::RankDeficient { rank, cols });
    }
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let utb = u.transpose() * b;
    let scaled = DVector::from_iterator(cols, utb.iter().zip(sigma.iter()).map(|(x, s)| x / s));
    let x = v_t.transpose() * scaled;
    let residual = (m * &x - b).norm();
    Ok(LeastSquares { x, residual })
}

/// Similarity moving the centroid of `points` to the origin with RMS distance √2.
///
/// Returns the 3×3 transform and the transformed points.
pub fn hartley_normalize(points: &[Vector2<f64>]) -> Result<(Matrix3<f64>, Vec<Vector2<f64>>)> {
    if points.len() < 2 {
        return Err(Error::TooFewCorrespondences {
            needed: 2,
            got: points.len(),
        });
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector2::zeros(), |acc, p| acc + p) / n;
    let mean_sq = points
        .iter()
        .map(|p| (p - centroid).norm_squared())
        .sum::<f64>()
        / n;
    let rms = mean_sq.sqrt();
    if !(rms > 1e-14 * (1.0 + centroid.norm())) {
        return Err(Error::CoincidentPoints);
    }
    let s = std::f64::consts::SQRT_2 / rms;
    let t = Matrix3::new(
        s,
        0.0,
        -s * centroid.x,
        0.0,
        s,
        -s * centroid.y,
        0.0,
        0.0,
        1.0,
    );
    let normalized = points.iter().map(|p| (p - centroid) * s).collect();
    Ok((t, normalized))
}

/// Unit vector spanning the (numerical) null space of a rank ≤ 2 matrix.
///
/// Fails when the smallest singular value exceeds `1e-8·‖M‖_F`.
pub fn null_vector_3x3(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    null_vector_3x3_with_tol(m, 1e-8)
}

pub fn null_vector_3x3_with_tol(m: &Matrix3<f64>, rel_tol: f64) -> Result<Vector3<f64>> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, &smallest) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three singular values");
    if smallest > rel_tol * m.norm() {
        return Err(Error::FullRank {
            smallest_singular_value: smallest,
        });
    }
    Ok(v_t.row(idx).transpose().normalize())
}

/// Right singular vectors of `a` ordered by ascending singular value, with
/// the matching singular values. Rows are zero-padded so that every column
/// direction is represented even when `a` is wide.
pub fn right_singular_vectors(a: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| v_t.row(i).transpose().into_owned())
        .collect();
    (values, vectors)
}

/// Deterministic generator for `seed`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent deterministic stream `stream` derived from `seed`; used to give
/// every trial or repeat its own generator regardless of scheduling.
pub fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
