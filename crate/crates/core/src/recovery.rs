//! Closed-form recovery of the local affine transformation of a SIFT-like
//! correspondence when the fundamental matrix is known.
//!
//! Substituting `A = R(α₂)·U·R(−α₁)` into the two linear epipolar
//! constraints `B·a1 + C·a3 = D`, `B·a2 + C·a4 = E` gives
//!
//! ```text
//! G·q_u + P·q_v + I·w = D
//! J·q_u + K·q_v + G·w = E        (J = −I)
//! ```
//!
//! and eliminating `w` together with `q_u·q_v = q` yields a quadratic in
//! `q_v` (see [`RecoveryCoefficients::quadratic`]). With this composition
//! order its leading coefficient `K·I − G·P` cancels identically, so there is
//! at most one solution. [`recover_affine`] solves the equivalent decoupled
//! linear form directly, which avoids the cancellation.

use nalgebra::Matrix2;

use crate::affine::{compose_affine, AffineComponents, AffineCorrespondence, SiftCorrespondence};
use crate::epipolar::FundamentalMatrix;

/// Default bound on `q_u/q_v` (and its inverse) for [`filter_candidates`].
pub const DEFAULT_MAX_SCALE: f64 = 10.0;
/// Default bound on `|w|/√|q_u·q_v|` for [`filter_candidates`].
pub const DEFAULT_MAX_SHEAR: f64 = 5.0;

/// Relative zero threshold for the linear coefficients.
const COEFF_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryCoefficients {
    pub b_c: f64,
    pub c_c: f64,
    pub d_c: f64,
    pub e_c: f64,
    pub g_c: f64,
    pub p_c: f64,
    pub i_c: f64,
    pub j_c: f64,
    pub k_c: f64,
}

impl RecoveryCoefficients {
    /// `(a, b, c)` of `a·q_v² + b·q_v + c = 0`, multiplied through by `I`.
    pub fn quadratic(&self, q: f64) -> (f64, f64, f64) {
        let Self {
            d_c: d,
            e_c: e,
            g_c: g,
            p_c: p,
            i_c: i,
            j_c: j,
            k_c: k,
            ..
        } = *self;
        (k * i - g * p, g * d - e * i, (j * i - g * g) * q)
    }

    fn zero_tol(&self) -> f64 {
        COEFF_EPS * self.b_c.abs().max(self.c_c.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    /// The second orientation is aligned with the epipolar line; `w` cannot
    /// be determined and is reported as zero.
    ShearUnobservable,
    NoRealRoot,
    CoefficientsDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredAffine {
    pub ac: AffineCorrespondence,
    pub components: AffineComponents,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub candidates: Vec<RecoveredAffine>,
    pub degeneracy: Degeneracy,
}

/// Coefficients of the linear system in `(q_u, q_v, w)`.
pub fn recovery_coefficients(f: &FundamentalMatrix, corr: &SiftCorrespondence) -> RecoveryCoefficients {
    let [f1, f2, f3, f4, f5, f6, f7, f8, _] = f.row_major();
    let (u1, v1) = (corr.first.pos.x, corr.first.pos.y);
    let (u2, v2) = (corr.second.pos.x, corr.second.pos.y);
    let b = u1 * f1 + v1 * f2 + f3;
    let c = u1 * f4 + v1 * f5 + f6;
    let d = -u2 * f1 - v2 * f4 - f7;
    let e = -u2 * f2 - v2 * f5 - f8;
    let (s1, c1) = (-corr.first.orientation).sin_cos();
    let (s2, c2) = corr.second.orientation.sin_cos();
    RecoveryCoefficients {
        b_c: b,
        c_c: c,
        d_c: d,
        e_c: e,
        g_c: b * c1 * c2 + c * c1 * s2,
        p_c: c * s1 * c2 - b * s1 * s2,
        i_c: b * s1 * c2 + c * s1 * s2,
        j_c: -b * s1 * c2 - c * s1 * s2,
        k_c: c * c1 * c2 - b * c1 * s2,
    }
}

/// Recovers the candidate affine correspondences consistent with `f`.
pub fn recover_affine(f: &FundamentalMatrix, corr: &SiftCorrespondence) -> RecoveryResult {
    let k = recovery_coefficients(f, corr);
    let q = corr.relative_scale();
    let tol = k.zero_tol();
    let build = |q_u: f64, q_v: f64, w: f64| {
        let components = AffineComponents {
            alpha1: corr.first.orientation,
            alpha2: corr.second.orientation,
            q_u,
            q_v,
            w,
        };
        RecoveredAffine {
            ac: AffineCorrespondence {
                p1: corr.first.pos,
                p2: corr.second.pos,
                a: compose_affine(&components),
            },
            components,
        }
    };

    // G = c₁·Y, I = s₁·Y, P = s₁·X, K = c₁·X; rotating the two equations by
    // α₁ separates them into Y·q_u = c₁D − s₁E and X·q_v + Y·w = s₁D + c₁E.
    let (s1, c1) = (-corr.first.orientation).sin_cos();
    let (s2, c2) = corr.second.orientation.sin_cos();
    let y = k.b_c * c2 + k.c_c * s2;
    let x = k.c_c * c2 - k.b_c * s2;
    let lhs_u = c1 * k.d_c - s1 * k.e_c;
    let lhs_w = s1 * k.d_c + c1 * k.e_c;

    if y.abs() <= tol {
        // w drops out of both equations: P·q_v = D and K·q_v = E
        if x.abs() <= tol {
            return RecoveryResult {
                candidates: Vec::new(),
                degeneracy: Degeneracy::CoefficientsDegenerate,
            };
        }
        let q_v = lhs_w / x;
        if q_v.abs() <= tol || !q_v.is_finite() {
            return RecoveryResult {
                candidates: Vec::new(),
                degeneracy: Degeneracy::NoRealRoot,
            };
        }
        return RecoveryResult {
            candidates: vec![build(q / q_v, q_v, 0.0)],
            degeneracy: Degeneracy::ShearUnobservable,
        };
    }

    let q_u = lhs_u / y;
    let mut candidates = Vec::new();
    if q_u.is_finite() && q_u.abs() > 1e-12 * q.abs().max(1.0) {
        let q_v = q / q_u;
        let w = (lhs_w - x * q_v) / y;
        let cand = build(q_u, q_v, w);
        if satisfies_linear_constraints(&k, &cand.ac.a, 1e-8) {
            candidates.push(cand);
        }
    }
    let degeneracy = if candidates.is_empty() {
        Degeneracy::NoRealRoot
    } else {
        Degeneracy::None
    };
    RecoveryResult {
        candidates,
        degeneracy,
    }
}

/// Residuals `(|B·a1 + C·a3 − D|, |B·a2 + C·a4 − E|)` of the linear epipolar
/// constraints.
pub fn linear_constraint_residuals(k: &RecoveryCoefficients, a: &Matrix2<f64>) -> (f64, f64) {
    (
        (k.b_c * a[(0, 0)] + k.c_c * a[(1, 0)] - k.d_c).abs(),
        (k.b_c * a[(0, 1)] + k.c_c * a[(1, 1)] - k.e_c).abs(),
    )
}

/// Both constraints hold to `rel_tol` of the magnitude of their terms.
pub fn satisfies_linear_constraints(k: &RecoveryCoefficients, a: &Matrix2<f64>, rel_tol: f64) -> bool {
    let (r1, r2) = linear_constraint_residuals(k, a);
    let scale1 = (k.b_c * a[(0, 0)]).abs() + (k.c_c * a[(1, 0)]).abs() + k.d_c.abs();
    let scale2 = (k.b_c * a[(0, 1)]).abs() + (k.c_c * a[(1, 1)]).abs() + k.e_c.abs();
    r1 <= rel_tol * scale1.max(f64::MIN_POSITIVE) && r2 <= rel_tol * scale2.max(f64::MIN_POSITIVE)
}

/// Drops candidates with extreme anisotropy or shear.
pub fn filter_candidates(r: RecoveryResult, max_scale: f64, max_shear: f64) -> RecoveryResult {
    let candidates = r
        .candidates
        .into_iter()
        .filter(|c| {
            let AffineComponents { q_u, q_v, w, .. } = c.components;
            let ratio = q_u / q_v;
            ratio.is_finite()
                && ratio >= 1.0 / max_scale
                && ratio <= max_scale
                && w.abs() / (q_u * q_v).abs().sqrt() <= max_shear
        })
        .collect();
    RecoveryResult {
        candidates,
        degeneracy: r.degeneracy,
    }
}
