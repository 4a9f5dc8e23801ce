//! Affine correspondence algebra.
//!
//! The local affinity is modelled as `A = R(α₂)·U·R(−α₁)` with
//! `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]` and the upper-triangular
//! `U = [[q_u, w], [0, q_v]]`, so that `det A = q_u·q_v`.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::homography::Homography;

/// Position, scale and orientation of a detected feature in one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftFeature {
    pub pos: Vector2<f64>,
    /// Strictly positive.
    pub scale: f64,
    /// Radians in `[0, 2π)`.
    pub orientation: f64,
}

impl SiftFeature {
    pub fn new(u: f64, v: f64, scale: f64, orientation: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature position".into()));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidInput(format!("feature scale must be positive, got {scale}")));
        }
        if !orientation.is_finite() {
            return Err(Error::InvalidInput("non-finite feature orientation".into()));
        }
        Ok(SiftFeature {
            pos: Vector2::new(u, v),
            scale,
            orientation: wrap_angle(orientation),
        })
    }
}

/// A matched pair of orientation- and scale-invariant features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftCorrespondence {
    pub first: SiftFeature,
    pub second: SiftFeature,
}

impl SiftCorrespondence {
    pub fn new(first: SiftFeature, second: SiftFeature) -> Self {
        SiftCorrespondence { first, second }
    }

    /// `q = q₂ / q₁`
    pub fn relative_scale(&self) -> f64 {
        self.second.scale / self.first.scale
    }

    pub fn points(&self) -> (Vector2<f64>, Vector2<f64>) {
        (self.first.pos, self.second.pos)
    }
}

/// The five parameters of `A = R(α₂)·U(q_u, w, q_v)·R(−α₁)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineComponents {
    pub alpha1: f64,
    pub alpha2: f64,
    pub q_u: f64,
    pub q_v: f64,
    pub w: f64,
}

/// Point pair with the local affine transformation `a = [[a1, a2], [a3, a4]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCorrespondence {
    pub p1: Vector2<f64>,
    pub p2: Vector2<f64>,
    pub a: Matrix2<f64>,
}

/// One solution of `A = R(γ)·U·R(δ)` for a fixed `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub gamma: f64,
    pub delta: f64,
    pub q_u: f64,
    pub q_v: f64,
    pub w: f64,
    /// Spectral norm of `A − R(γ)·U·R(δ)`.
    pub residual: f64,
}

impl Decomposition {
    pub fn upper(&self) -> Matrix2<f64> {
        Matrix2::new(self.q_u, self.w, 0.0, self.q_v)
    }
}

pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// `R(α₂)·U·R(−α₁)`, expanded.
pub fn compose_affine(c: &AffineComponents) -> Matrix2<f64> {
    let (s1, c1) = (-c.alpha1).sin_cos();
    let (s2, c2) = c.alpha2.sin_cos();
    let (qu, qv, w) = (c.q_u, c.q_v, c.w);
    Matrix2::new(
        c1 * c2 * qu - s1 * s2 * qv + s1 * c2 * w,
        -s1 * c2 * qu - c1 * s2 * qv + c1 * c2 * w,
        c1 * s2 * qu + s1 * c2 * qv + s1 * s2 * w,
        -s1 * s2 * qu + c1 * c2 * qv + c1 * s2 * w,
    )
}

/// Image of `p1` under `h` and the Jacobian of the projective map there.
pub fn affine_from_homography(h: &Homography, p1: &Vector2<f64>) -> Result<(Vector2<f64>, Matrix2<f64>)> {
    let m = h.matrix();
    let s = m[(2, 0)] * p1.x + m[(2, 1)] * p1.y + m[(2, 2)];
    if s.abs() <= 1e-12 * m.norm() {
        return Err(Error::PointAtInfinity(s));
    }
    let u2 = (m[(0, 0)] * p1.x + m[(0, 1)] * p1.y + m[(0, 2)]) / s;
    let v2 = (m[(1, 0)] * p1.x + m[(1, 1)] * p1.y + m[(1, 2)]) / s;
    let a = Matrix2::new(
        (m[(0, 0)] - m[(2, 0)] * u2) / s,
        (m[(0, 1)] - m[(2, 1)] * u2) / s,
        (m[(1, 0)] - m[(2, 0)] * v2) / s,
        (m[(1, 1)] - m[(2, 1)] * v2) / s,
    );
    Ok((Vector2::new(u2, v2), a))
}

pub(crate) fn spectral_norm(m: &Matrix2<f64>) -> f64 {
    m.singular_values().max()
}

/// Decomposes `a = R(γ)·U·R(δ)` for the given `γ`.
///
/// Returns both solutions `(δ, U)` and `(δ + π, −U)`, best first: lowest
/// residual, with positive `q_v` preferred when residuals tie.
pub fn decompose_affine(a: &Matrix2<f64>, gamma: f64) -> Result<Vec<Decomposition>> {
    let norm = spectral_norm(a);
    if !(norm.is_finite() && a.determinant().abs() > 1e-300 && a.determinant().abs() > 1e-14 * norm * norm) {
        return Err(Error::SingularAffine);
    }
    // R(γ)ᵀ·A = U·R(δ); the bottom row is q_v·(sin δ, cos δ)
    let m = rotation(gamma).transpose() * a;
    let (m11, m12, m21, m22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let qv = m21.hypot(m22);
    if qv <= 1e-14 * norm {
        return Err(Error::Degenerate("affinity has vanishing q_v"));
    }
    let delta = m21.atan2(m22);
    let mut out = Vec::with_capacity(2);
    for (d, sign) in [(delta, 1.0), (delta + PI, -1.0)] {
        let (sd, cd) = d.sin_cos();
        let q_u = m11 * cd - m12 * sd;
        let w = m11 * sd + m12 * cd;
        let q_v = sign * qv;
        let u = Matrix2::new(q_u, w, 0.0, q_v);
        let residual = spectral_norm(&(a - rotation(gamma) * u * rotation(d)));
        out.push(Decomposition {
            gamma,
            delta: wrap_angle(d),
            q_u,
            q_v,
            w,
            residual,
        });
    }
    let tie = 1e-9 * norm;
    out.sort_by(|x, y| {
        if (x.residual - y.residual).abs() <= tie {
            // positive scales first
            y.q_v.total_cmp(&0.0).cmp(&x.q_v.total_cmp(&0.0))
        } else {
            x.residual.total_cmp(&y.residual)
        }
    });
    Ok(out)
}

/// Simulates detector output for an affine correspondence: the first feature
/// gets unit scale, the second `det A`, and the orientations are `α₁ = −δ`,
/// `α₂ = β` from the decomposition `A = R(β)·U·R(δ)`.
pub fn simulate_sift_from_affine(ac: &AffineCorrespondence, beta: f64) -> Result<SiftCorrespondence> {
    let best = decompose_affine(&ac.a, beta)?[0];
    let det = ac.a.determinant();
    if det <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "orientation-reversing affinity (det {det}) has no positive scale ratio"
        )));
    }
    let first = SiftFeature::new(ac.p1.x, ac.p1.y, 1.0, -best.delta)?;
    let second = SiftFeature::new(ac.p2.x, ac.p2.y, det, beta)?;
    Ok(SiftCorrespondence { first, second })
}
