//! Fundamental matrices: data model, epipoles, residuals and the normalized
//! eight-point and seven-point estimators.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, Vector2, Vector3, Vector4};

use crate::affine::AffineCorrespondence;
use crate::error::{Error, Result};
use crate::numerics::{hartley_normalize, null_vector_3x3_with_tol, right_singular_vectors, solve_cubic};

/// A point pair `(p1, p2)` in pixels.
pub type PointPair = (Vector2<f64>, Vector2<f64>);

/// Rank-2 fundamental matrix with unit Frobenius norm.
///
/// Elements are addressed in row-major order, so `f[0]..f[8]` are the
/// classical `f1..f9` and `p2ᵀ·F·p1 = 0` holds for corresponding points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    m: Matrix3<f64>,
}

/// Epipole in pixel coordinates, or a direction when it lies at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epipole {
    pub e_u: f64,
    pub e_v: f64,
    pub at_infinity: bool,
}

impl Epipole {
    fn from_homogeneous(e: Vector3<f64>) -> Self {
        let e = e.normalize();
        if e.z.abs() < 1e-10 {
            Epipole {
                e_u: e.x,
                e_v: e.y,
                at_infinity: true,
            }
        } else {
            Epipole {
                e_u: e.x / e.z,
                e_v: e.y / e.z,
                at_infinity: false,
            }
        }
    }

    pub fn homogeneous(&self) -> Vector3<f64> {
        if self.at_infinity {
            Vector3::new(self.e_u, self.e_v, 0.0)
        } else {
            Vector3::new(self.e_u, self.e_v, 1.0)
        }
    }
}

impl FundamentalMatrix {
    /// Projects `m` onto the rank-2 matrices (smallest singular value
    /// truncated) and fixes the Frobenius norm to one.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite fundamental matrix".into()));
        }
        let norm = m.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero fundamental matrix".into()));
        }
        let unit = m / norm;
        let mut svd = unit.svd(true, true);
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("three singular values");
        // already rank 2: keep the entries exactly as given
        if svd.singular_values[idx] <= 1e-14 {
            return Ok(FundamentalMatrix { m: unit });
        }
        svd.singular_values[idx] = 0.0;
        let r2 = svd.recompose().expect("U and V^T were computed");
        let n = r2.norm();
        if n == 0.0 {
            return Err(Error::InvalidInput("rank of fundamental matrix below 2".into()));
        }
        Ok(FundamentalMatrix { m: r2 / n })
    }

    /// Builds from `f1..f9` in row-major order.
    pub fn from_row_major(f: [f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(&f))
    }

    /// Fundamental matrix of two finite projective cameras: `F = [e′]ₓ·P₂·P₁⁺`.
    pub fn from_projections(p1: &Matrix3x4<f64>, p2: &Matrix3x4<f64>) -> Result<Self> {
        // finite cameras P = M·[I | −C]: F = M₂⁻ᵀ·[C₁ − C₂]ₓ·M₁⁻¹, which avoids
        // the badly conditioned pseudo-inverse of a pixel-scaled P
        let m1 = p1.fixed_view::<3, 3>(0, 0).into_owned();
        let m2 = p2.fixed_view::<3, 3>(0, 0).into_owned();
        if let (Some(m1_inv), Some(m2_inv)) = (m1.try_inverse(), m2.try_inverse()) {
            let c1 = -(m1_inv * p1.column(3));
            let c2 = -(m2_inv * p2.column(3));
            return Self::new(m2_inv.transpose() * skew(&(c1 - c2)) * m1_inv);
        }
        let center = camera_center(p1)?;
        let e2 = p2 * center;
        let pinv = p1.transpose()
            * (p1 * p1.transpose())
                .try_inverse()
                .ok_or(Error::Degenerate("camera matrix without full row rank"))?;
        Self::new(skew(&e2) * p2 * pinv)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// `[f1, …, f9]`
    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    /// Epipole in the second image: `Fᵀ·e′ = 0`.
    pub fn epipole_second(&self) -> Epipole {
        Epipole::from_homogeneous(self.null_vector(&self.m.transpose()))
    }

    /// Epipole in the first image: `F·e = 0`.
    pub fn epipole_first(&self) -> Epipole {
        Epipole::from_homogeneous(self.null_vector(&self.m))
    }

    fn null_vector(&self, m: &Matrix3<f64>) -> Vector3<f64> {
        // The null vector is orthogonal to every row, so the largest cross
        // product of two rows spans it. Pixel-scaled F has a tiny second
        // singular value, which makes the SVD null vector inaccurate.
        let rows = [m.row(0).transpose(), m.row(1).transpose(), m.row(2).transpose()];
        let best = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| rows[i].cross(&rows[j]))
            .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))
            .expect("three row pairs");
        if best.norm() > 0.0 {
            best.normalize()
        } else {
            // rank 1 or less cannot occur after construction; stay total
            null_vector_3x3_with_tol(m, 1.0).expect("tolerance admits any matrix")
        }
    }

    /// `p2ᵀ·F·p1`
    pub fn algebraic_residual(&self, p1: &Vector2<f64>, p2: &Vector2<f64>) -> f64 {
        p2.push(1.0).dot(&(self.m * p1.push(1.0)))
    }
}

pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn camera_center(p: &Matrix3x4<f64>) -> Result<Vector4<f64>> {
    let mut padded = Matrix4::zeros();
    padded.fixed_view_mut::<3, 4>(0, 0).copy_from(p);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i < 4)
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four singular values");
    let c = v_t.row(idx).transpose();
    if (p * c).norm() > 1e-9 * p.norm() {
        return Err(Error::Degenerate("camera matrix without a null vector"));
    }
    Ok(c)
}

/// Normals of the epipolar lines through `p1` and `p2`:
/// `n1 = (Fᵀ·p2)₁:₂` and `n2 = (F·p1)₁:₂`, unnormalized.
pub fn epipolar_normals(
    f: &FundamentalMatrix,
    p1: &Vector2<f64>,
    p2: &Vector2<f64>,
) -> (Vector2<f64>, Vector2<f64>) {
    let n1 = f.m.transpose() * p2.push(1.0);
    let n2 = f.m * p1.push(1.0);
    (n1.xy(), n2.xy())
}

/// `‖A⁻ᵀ·n1 + n2‖ / max(‖n1‖, ‖n2‖, 1)`; zero iff the affine correspondence
/// is consistent with `f`.
pub fn af_consistency_residual(f: &FundamentalMatrix, ac: &AffineCorrespondence) -> Result<f64> {
    let inv = ac.a.try_inverse().ok_or(Error::SingularAffine)?;
    if !inv.iter().all(|x| x.is_finite()) {
        return Err(Error::SingularAffine);
    }
    let (n1, n2) = epipolar_normals(f, &ac.p1, &ac.p2);
    let r = inv.transpose() * n1 + n2;
    Ok(r.norm() / n1.norm().max(n2.norm()).max(1.0))
}

/// First-order geometric residual of the epipolar constraint, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampsonDistance {
    pub value: f64,
    /// Every gradient term vanished; `value` is the algebraic residual magnitude.
    pub degenerate: bool,
}

pub fn sampson_distance(f: &FundamentalMatrix, p1: &Vector2<f64>, p2: &Vector2<f64>) -> SampsonDistance {
    sampson_distance_raw(&f.m, p1, p2)
}

pub(crate) fn sampson_distance_raw(
    m: &Matrix3<f64>,
    p1: &Vector2<f64>,
    p2: &Vector2<f64>,
) -> SampsonDistance {
    let x1 = p1.push(1.0);
    let x2 = p2.push(1.0);
    let fx1 = m * x1;
    let ftx2 = m.transpose() * x2;
    let algebraic = x2.dot(&fx1);
    let denom = fx1.x * fx1.x + fx1.y * fx1.y + ftx2.x * ftx2.x + ftx2.y * ftx2.y;
    if denom <= f64::MIN_POSITIVE {
        return SampsonDistance {
            value: algebraic.abs(),
            degenerate: true,
        };
    }
    SampsonDistance {
        value: algebraic.abs() / denom.sqrt(),
        degenerate: false,
    }
}

struct Normalized {
    t1: Matrix3<f64>,
    t2: Matrix3<f64>,
    design: DMatrix<f64>,
}

fn normalized_design(pairs: &[PointPair]) -> Result<Normalized> {
    let first: Vec<_> = pairs.iter().map(|p| p.0).collect();
    let second: Vec<_> = pairs.iter().map(|p| p.1).collect();
    let (t1, n1) = hartley_normalize(&first)?;
    let (t2, n2) = hartley_normalize(&second)?;
    let mut design = DMatrix::zeros(pairs.len(), 9);
    for (i, (a, b)) in n1.iter().zip(&n2).enumerate() {
        let row = [
            b.x * a.x,
            b.x * a.y,
            b.x,
            b.y * a.x,
            b.y * a.y,
            b.y,
            a.x,
            a.y,
            1.0,
        ];
        for (j, v) in row.into_iter().enumerate() {
            design[(i, j)] = v;
        }
    }
    Ok(Normalized { t1, t2, design })
}

fn reshape(v: &nalgebra::DVector<f64>) -> Matrix3<f64> {
    Matrix3::from_row_slice(v.as_slice())
}

/// Rank below this relative singular value counts as a degenerate design.
const DESIGN_RANK_TOL: f64 = 1e-9;

/// Normalized eight-point algorithm over ≥ 8 pairs.
pub fn estimate_f_8pt(pairs: &[PointPair]) -> Result<FundamentalMatrix> {
    if pairs.len() < 8 {
        return Err(Error::TooFewCorrespondences {
            needed: 8,
            got: pairs.len(),
        });
    }
    let norm = normalized_design(pairs)?;
    let (values, vectors) = right_singular_vectors(&norm.design);
    let largest = values[8];
    if values[1] <= DESIGN_RANK_TOL * largest {
        return Err(Error::Degenerate("eight-point design matrix has rank below 8"));
    }
    let f_norm = FundamentalMatrix::new(reshape(&vectors[0]))?;
    FundamentalMatrix::new(norm.t2.transpose() * f_norm.m * norm.t1)
}

/// Coefficients `[c3, c2, c1, c0]` of `det(λ·F1 + (1 − λ)·F2)`.
pub fn seven_point_cubic(f1: &Matrix3<f64>, f2: &Matrix3<f64>) -> [f64; 4] {
    let det = |l: f64| (f1 * l + f2 * (1.0 - l)).determinant();
    let d0 = det(0.0);
    let d1 = det(1.0);
    let dm = det(-1.0);
    let d2 = det(2.0);
    let c0 = d0;
    let c2 = 0.5 * (d1 + dm) - d0;
    let odd = 0.5 * (d1 - dm);
    let c3 = (d2 - 4.0 * c2 - c0 - 2.0 * odd) / 6.0;
    let c1 = odd - c3;
    [c3, c2, c1, c0]
}

/// Seven-point algorithm: one to three candidates.
pub fn estimate_f_7pt(pairs: &[PointPair]) -> Result<Vec<FundamentalMatrix>> {
    if pairs.len() != 7 {
        return Err(Error::InvalidInput(format!(
            "seven-point algorithm needs exactly 7 pairs, got {}",
            pairs.len()
        )));
    }
    let norm = normalized_design(pairs)?;
    let (values, vectors) = right_singular_vectors(&norm.design);
    // values[0], values[1] span the null space; the padded rows add exact zeros
    if values[2] <= DESIGN_RANK_TOL * values[8] {
        return Err(Error::Degenerate("seven-point null space is not two-dimensional"));
    }
    let f1 = reshape(&vectors[0]);
    let f2 = reshape(&vectors[1]);
    let [a, b, c, d] = seven_point_cubic(&f1, &f2);
    let mut out = Vec::with_capacity(3);
    for lambda in solve_cubic(a, b, c, d) {
        let fl = f1 * lambda + f2 * (1.0 - lambda);
        if let Ok(fm) = FundamentalMatrix::new(norm.t2.transpose() * fl * norm.t1) {
            out.push(fm);
        }
    }
    if out.is_empty() {
        return Err(Error::Degenerate("seven-point cubic has no usable root"));
    }
    Ok(out)
}
