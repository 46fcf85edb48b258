//! Least-squares rigid alignment of paired point sets (Kabsch/Umeyama).

use super::{GeometryError, Matrix3, Point3, RigidTransform, Vector3};

/// Solves `argmin_T Σ |T(src_i) − dst_i|²` over rigid transforms via SVD of
/// the centred cross-covariance, with the usual reflection correction.
///
/// Requires ≥ 3 non-collinear pairs.
pub fn kabsch_align(src: &[Point3], dst: &[Point3]) -> Result<RigidTransform, GeometryError> {
    if src.len() != dst.len() {
        return Err(GeometryError::InvalidArg(format!(
            "point sets differ in length: {} vs {}",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            needed: 3,
            got: src.len(),
        });
    }
    let n = src.len() as f64;
    let mut cs = Vector3::zeros();
    let mut cd = Vector3::zeros();
    for (s, d) in src.iter().zip(dst) {
        cs += s.coords;
        cd += d.coords;
    }
    cs /= n;
    cd /= n;

    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s.coords - cs) * (d.coords - cd).transpose();
    }

    let svd = h.svd(true, true);
    let sv = svd.singular_values;
    let mut sorted = [sv[0], sv[1], sv[2]];
    sorted.sort_by(|a, b| b.total_cmp(a));
    // Collinear (or coincident) input: the two smallest singular values
    // vanish and the in-plane rotation is unconstrained.
    if sorted[1] <= 1e-9 * sorted[0].max(1e-300) {
        return Err(GeometryError::DegenerateConfiguration(
            "source points are collinear or coincident".into(),
        ));
    }
    let u = svd.u.ok_or_else(|| {
        GeometryError::DegenerateConfiguration("SVD failed to produce U".into())
    })?;
    let v_t = svd.v_t.ok_or_else(|| {
        GeometryError::DegenerateConfiguration("SVD failed to produce Vᵀ".into())
    })?;
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let translation = cd - rotation * cs;
    Ok(RigidTransform::from_parts_unchecked(rotation, translation))
}
