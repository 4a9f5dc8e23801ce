//! Homography solvers: single affine correspondence with known F (HAF),
//! normalized DLT, the F-compatible three-point method, and residuals.

use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};

use crate::affine::AffineCorrespondence;
use crate::epipolar::{skew, FundamentalMatrix, PointPair};
use crate::error::{Error, Result};
use crate::numerics::{hartley_normalize, least_squares, right_singular_vectors};

/// Plane-induced projective map with unit Frobenius norm and its first
/// non-negligible entry positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let norm = m.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput("homography must be finite and nonzero".into()));
        }
        let mut m = m / norm;
        let first = m
            .transpose()
            .iter()
            .copied()
            .find(|x| x.abs() > 1e-12)
            .unwrap_or(1.0);
        if first < 0.0 {
            m = -m;
        }
        Ok(Homography { m })
    }

    pub fn from_row_major(h: [f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(&h))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Projective depth `h7·u + h8·v + h9` of `p`.
    pub fn depth(&self, p: &Vector2<f64>) -> f64 {
        self.m[(2, 0)] * p.x + self.m[(2, 1)] * p.y + self.m[(2, 2)]
    }

    /// Dehomogenized image of `p`; `None` when `p` maps to infinity.
    pub fn map(&self, p: &Vector2<f64>) -> Option<Vector2<f64>> {
        let x = self.m * p.push(1.0);
        if x.z.abs() <= 1e-12 * self.m.norm() {
            return None;
        }
        Some(x.xy() / x.z)
    }

    /// Frobenius distance to `other`, minimized over the global sign.
    pub fn distance(&self, other: &Homography) -> f64 {
        (self.m - other.m).norm().min((self.m + other.m).norm())
    }

    pub fn inverse(&self) -> Option<Homography> {
        self.m.try_inverse().and_then(|m| Homography::new(m).ok())
    }
}

/// Distance in the second image between `h·p1` and `p2`; infinite when `p1`
/// maps to infinity.
pub fn reprojection_error(h: &Homography, p1: &Vector2<f64>, p2: &Vector2<f64>) -> f64 {
    match h.map(p1) {
        Some(q) => (q - p2).norm(),
        None => f64::INFINITY,
    }
}

/// Mean of the forward and backward reprojection errors.
pub fn symmetric_reprojection_error(h: &Homography, p1: &Vector2<f64>, p2: &Vector2<f64>) -> f64 {
    let back = match h.inverse() {
        Some(inv) => reprojection_error(&inv, p2, p1),
        None => f64::INFINITY,
    };
    0.5 * (reprojection_error(h, p1, p2) + back)
}

/// The 6×3 system `C·x = b` of the HAF solver, `x = (h7, h8, h9)`.
pub fn haf_system(
    f: &FundamentalMatrix,
    ac: &AffineCorrespondence,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let e = f.epipole_second();
    if e.at_infinity {
        return Err(Error::EpipoleAtInfinity);
    }
    let (eu, ev) = (e.e_u, e.e_v);
    let (u1, v1, u2, v2) = (ac.p1.x, ac.p1.y, ac.p2.x, ac.p2.y);
    let (a1, a2, a3, a4) = (ac.a[(0, 0)], ac.a[(0, 1)], ac.a[(1, 0)], ac.a[(1, 1)]);
    let [f1, f2, f3, f4, f5, f6, ..] = f.row_major();
    #[rustfmt::skip]
    let c = DMatrix::from_row_slice(6, 3, &[
        a1 * u1 + u2 - eu, a1 * v1,           a1,
        a2 * u1,           a2 * v1 + u2 - eu, a2,
        a3 * u1 + v2 - ev, a3 * v1,           a3,
        a4 * u1,           a4 * v1 + v2 - ev, a4,
        u1 * eu - u1 * u2, v1 * eu - v1 * u2, eu - u2,
        u1 * ev - u1 * v2, v1 * ev - v1 * v2, ev - v2,
    ]);
    // The last entry is +f3: it follows from F = [e′]ₓ·H, row 1.
    let b = DVector::from_vec(vec![
        f4,
        f5,
        -f1,
        -f2,
        -u1 * f4 - v1 * f5 - f6,
        u1 * f1 + v1 * f2 + f3,
    ]);
    Ok((c, b))
}

fn translate_scale(center: &Vector2<f64>, k: f64) -> Matrix3<f64> {
    Matrix3::new(k, 0.0, -k * center.x, 0.0, k, -k * center.y, 0.0, 0.0, 1.0)
}

/// Homography from one affine correspondence and the fundamental matrix.
///
/// Both images are moved so the point sits at the origin and scaled by the
/// distance between the second point and the epipole; the same factor in
/// both images leaves `A` unchanged.
pub fn haf_from_ac(f: &FundamentalMatrix, ac: &AffineCorrespondence) -> Result<Homography> {
    let e = f.epipole_second();
    if e.at_infinity {
        return Err(Error::EpipoleAtInfinity);
    }
    let k = 1.0 / (ac.p2 - Vector2::new(e.e_u, e.e_v)).norm().max(1.0);
    let t1 = translate_scale(&ac.p1, k);
    let t1_inv = translate_scale(&(-ac.p1 * k), 1.0 / k);
    let t2_inv = translate_scale(&(-ac.p2 * k), 1.0 / k);
    let fn_ = FundamentalMatrix::new(t2_inv.transpose() * f.matrix() * t1_inv)?;
    let local = AffineCorrespondence {
        p1: Vector2::zeros(),
        p2: Vector2::zeros(),
        a: ac.a,
    };
    let hn = haf_raw(&fn_, &local)?;
    Homography::new(t2_inv * hn.matrix() * t1)
}

fn haf_raw(f: &FundamentalMatrix, ac: &AffineCorrespondence) -> Result<Homography> {
    let (c, b) = haf_system(f, ac)?;
    let x = least_squares(&c, &b)?.x;
    let (h7, h8, h9) = (x[0], x[1], x[2]);
    let (u1, v1, u2, v2) = (ac.p1.x, ac.p1.y, ac.p2.x, ac.p2.y);
    let s = u1 * h7 + v1 * h8 + h9;
    if s.abs() <= 1e-12 * x.norm() {
        return Err(Error::PointAtInfinity(s));
    }
    let (a1, a2, a3, a4) = (ac.a[(0, 0)], ac.a[(0, 1)], ac.a[(1, 0)], ac.a[(1, 1)]);
    let h1 = a1 * s + h7 * u2;
    let h2 = a2 * s + h8 * u2;
    let h4 = a3 * s + h7 * v2;
    let h5 = a4 * s + h8 * v2;
    let h3 = s * u2 - h1 * u1 - h2 * v1;
    let h6 = s * v2 - h4 * u1 - h5 * v1;
    Homography::from_row_major([h1, h2, h3, h4, h5, h6, h7, h8, h9])
}

fn collinear(a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>) -> bool {
    let ab = b - a;
    let ac = c - a;
    let cross = ab.x * ac.y - ab.y * ac.x;
    cross.abs() <= 1e-9 * ab.norm().max(ac.norm()).powi(2).max(f64::MIN_POSITIVE)
}

/// Normalized four-point DLT.
pub fn h_4pt(pairs: &[PointPair]) -> Result<Homography> {
    if pairs.len() != 4 {
        return Err(Error::InvalidInput(format!(
            "four-point algorithm needs exactly 4 pairs, got {}",
            pairs.len()
        )));
    }
    for side in 0..2 {
        let pts: Vec<_> = pairs.iter().map(|p| if side == 0 { p.0 } else { p.1 }).collect();
        for skip in 0..4 {
            let tri: Vec<_> = (0..4).filter(|&i| i != skip).map(|i| pts[i]).collect();
            if collinear(&tri[0], &tri[1], &tri[2]) {
                return Err(Error::Degenerate("three of the four points are collinear"));
            }
        }
    }
    h_dlt(pairs)
}

/// Normalized DLT over ≥ 4 pairs, least squares in the algebraic sense.
pub fn h_dlt(pairs: &[PointPair]) -> Result<Homography> {
    if pairs.len() < 4 {
        return Err(Error::TooFewCorrespondences {
            needed: 4,
            got: pairs.len(),
        });
    }
    let first: Vec<_> = pairs.iter().map(|p| p.0).collect();
    let second: Vec<_> = pairs.iter().map(|p| p.1).collect();
    let (t1, n1) = hartley_normalize(&first)?;
    let (t2, n2) = hartley_normalize(&second)?;
    let mut a = DMatrix::zeros(2 * pairs.len(), 9);
    for (i, (p, q)) in n1.iter().zip(&n2).enumerate() {
        let (x, y, u, v) = (p.x, p.y, q.x, q.y);
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for j in 0..9 {
            a[(2 * i, j)] = r0[j];
            a[(2 * i + 1, j)] = r1[j];
        }
    }
    let (values, vectors) = right_singular_vectors(&a);
    if values[1] <= 1e-12 * values[8] {
        return Err(Error::Degenerate("DLT system has a multi-dimensional null space"));
    }
    let hn = Matrix3::from_row_slice(vectors[0].as_slice());
    let t2_inv = t2
        .try_inverse()
        .ok_or(Error::Degenerate("normalization not invertible"))?;
    Homography::new(t2_inv * hn * t1)
}

/// F-compatible homography `H = [e′]ₓ·F + e′·vᵀ` from exactly three pairs.
pub fn h_3pt(f: &FundamentalMatrix, pairs: &[PointPair]) -> Result<Homography> {
    if pairs.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "three-point algorithm needs exactly 3 pairs, got {}",
            pairs.len()
        )));
    }
    h_fcompatible(f, pairs)
}

/// Least-squares F-compatible homography over ≥ 3 pairs: two equations per
/// pair from `p2 × (H·p1) = 0`, linear in `v`.
pub fn h_fcompatible(f: &FundamentalMatrix, pairs: &[PointPair]) -> Result<Homography> {
    if pairs.len() < 3 {
        return Err(Error::TooFewCorrespondences {
            needed: 3,
            got: pairs.len(),
        });
    }
    let e = f.epipole_second();
    if e.at_infinity {
        return Err(Error::EpipoleAtInfinity);
    }
    let ep = Vector3::new(e.e_u, e.e_v, 1.0);
    let base = skew(&ep) * f.matrix();
    let mut m = DMatrix::zeros(2 * pairs.len(), 3);
    let mut b = DVector::zeros(2 * pairs.len());
    for (i, (p1, p2)) in pairs.iter().enumerate() {
        let x1 = p1.push(1.0);
        let x2 = p2.push(1.0);
        let ce = x2.cross(&ep);
        let ca = x2.cross(&(base * x1));
        for k in 0..2 {
            for j in 0..3 {
                m[(2 * i + k, j)] = ce[k] * x1[j];
            }
            b[2 * i + k] = -ca[k];
        }
    }
    let v = least_squares(&m, &b)
        .map_err(|_| Error::Degenerate("three-point system is rank deficient"))?
        .x;
    Homography::new(base + ep * Vector3::new(v[0], v[1], v[2]).transpose())
}
