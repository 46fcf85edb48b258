//! Point clouds with optional oriented normals and PCA normal estimation.

use super::{GeometryError, KdTree, Matrix3, Point3, RigidTransform, Vector3};

/// Point cloud in millimetres. `viewpoint` is the sensor origin that produced
/// the cloud; normals, when present, are unit length and oriented toward it.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<Vector3>>,
    viewpoint: Point3,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, viewpoint: Point3) -> Self {
        Self {
            points,
            normals: None,
            viewpoint,
        }
    }

    /// Attaches normals; validates length and unit norm, and flips any normal
    /// pointing away from the viewpoint.
    pub fn with_normals(
        points: Vec<Point3>,
        normals: Vec<Vector3>,
        viewpoint: Point3,
    ) -> Result<Self, GeometryError> {
        if normals.len() != points.len() {
            return Err(GeometryError::InvalidArg(format!(
                "{} normals for {} points",
                normals.len(),
                points.len()
            )));
        }
        let mut oriented = normals;
        for (n, p) in oriented.iter_mut().zip(&points) {
            if (n.norm() - 1.0).abs() > 1e-9 {
                return Err(GeometryError::InvalidArg("normals must be unit length".into()));
            }
            if n.dot(&(viewpoint - p)) < 0.0 {
                *n = -*n;
            }
        }
        Ok(Self {
            points,
            normals: Some(oriented),
            viewpoint,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3]> {
        self.normals.as_deref()
    }

    pub fn viewpoint(&self) -> Point3 {
        self.viewpoint
    }

    pub fn centroid(&self) -> Point3 {
        let mut acc = Vector3::zeros();
        for p in &self.points {
            acc += p.coords;
        }
        Point3::from(acc / self.points.len().max(1) as f64)
    }

    /// Rigidly transforms points, normals and viewpoint together.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self {
            points: self.points.iter().map(|p| t.apply_point(p)).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| t.apply_vector(n)).collect()),
            viewpoint: t.apply_point(&self.viewpoint),
        }
    }

    /// Sub-cloud from indices (normals carried along when present).
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| indices.iter().map(|&i| ns[i]).collect()),
            viewpoint: self.viewpoint,
        }
    }

    /// Deterministic uniform subsample down to at most `max_points`.
    pub fn subsampled(&self, max_points: usize) -> Self {
        if self.points.len() <= max_points || max_points == 0 {
            return self.clone();
        }
        // Evenly spaced picks over the original ordering.
        let n = self.points.len();
        let indices: Vec<usize> = (0..max_points).map(|i| i * n / max_points).collect();
        self.select(&indices)
    }

    pub fn merged(clouds: &[&PointCloud], viewpoint: Point3) -> Self {
        let mut points = Vec::new();
        let all_normals = clouds.iter().all(|c| c.normals.is_some());
        let mut normals = all_normals.then(Vec::new);
        for c in clouds {
            points.extend_from_slice(&c.points);
            if let (Some(out), Some(ns)) = (normals.as_mut(), c.normals.as_ref()) {
                out.extend_from_slice(ns);
            }
        }
        Self {
            points,
            normals,
            viewpoint,
        }
    }
}

/// Result of normal estimation: the cloud with normals attached plus the
/// indices whose neighbourhoods were degenerate (normal direction ambiguous,
/// chosen arbitrarily within the null space).
#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub cloud: PointCloud,
    pub degenerate: Vec<usize>,
}

/// Estimates a normal per point from the PCA of its `k` nearest neighbours
/// (eigenvector of the smallest covariance eigenvalue), flipped toward the
/// cloud viewpoint.
///
/// A point is flagged degenerate when the two smallest eigenvalues coincide
/// within 1e-12 (e.g. collinear neighbourhoods).
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<NormalEstimate, GeometryError> {
    if k < 3 {
        return Err(GeometryError::InvalidArg("k must be at least 3".into()));
    }
    if cloud.len() < k {
        return Err(GeometryError::TooFewPoints {
            needed: k,
            got: cloud.len(),
        });
    }
    let tree = KdTree::build(cloud.points());
    let viewpoint = cloud.viewpoint();
    let mut normals = vec![Vector3::zeros(); cloud.len()];
    let mut degenerate = Vec::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let neigh = tree.nearest(p, k)?;
        let mut centroid = Vector3::zeros();
        for (j, _) in &neigh {
            centroid += cloud.points()[*j].coords;
        }
        centroid /= k as f64;
        let mut cov = Matrix3::zeros();
        for (j, _) in &neigh {
            let d = cloud.points()[*j].coords - centroid;
            cov += d * d.transpose();
        }
        let eig = cov.symmetric_eigen();
        // Smallest-eigenvalue eigenvector; detect a tied null space.
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        if (eig.eigenvalues[order[0]] - eig.eigenvalues[order[1]]).abs() <= 1e-12 {
            degenerate.push(i);
        }
        let mut n = eig.eigenvectors.column(order[0]).into_owned();
        let len = n.norm();
        if len < 1e-12 {
            n = Vector3::z();
        } else {
            n /= len;
        }
        if n.dot(&(viewpoint - p)) < 0.0 {
            n = -n;
        }
        normals[i] = n;
    }
    Ok(NormalEstimate {
        cloud: PointCloud {
            points: cloud.points.clone(),
            normals: Some(normals),
            viewpoint,
        },
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_cloud() -> PointCloud {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(Point3::new(i as f64 * 10.0, j as f64 * 10.0, 0.0));
            }
        }
        PointCloud::new(pts, Point3::new(0.0, 0.0, 1000.0))
    }

    #[test]
    fn planar_grid_normals_point_up() {
        let est = estimate_normals(&grid_cloud(), 8).unwrap();
        for n in est.cloud.normals().unwrap() {
            assert!((n - Vector3::z()).norm() < 1e-6, "normal {n:?}");
        }
    }

    #[test]
    fn sphere_normals_match_analytic_within_two_degrees() {
        // 2000 evenly spaced samples (Fibonacci spiral) on a 100 mm sphere.
        let n = 2000;
        let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
        let pts: Vec<Point3> = (0..n)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let theta = golden * i as f64;
                Point3::new(100.0 * r * theta.cos(), 100.0 * r * theta.sin(), 100.0 * z)
            })
            .collect();
        let viewpoint = Point3::new(0.0, 0.0, 1000.0);
        let cloud = PointCloud::new(pts, viewpoint);
        let est = estimate_normals(&cloud, 12).unwrap();
        let mut good = 0;
        for (p, n) in est.cloud.points().iter().zip(est.cloud.normals().unwrap()) {
            let mut analytic = p.coords / p.coords.norm();
            if analytic.dot(&(viewpoint - p)) < 0.0 {
                analytic = -analytic;
            }
            let angle = n.dot(&analytic).clamp(-1.0, 1.0).acos().to_degrees();
            if angle < 2.0 {
                good += 1;
            }
        }
        assert!(
            good as f64 >= 0.99 * est.cloud.len() as f64,
            "{good} of {} within 2 degrees",
            est.cloud.len()
        );
    }

    #[test]
    fn too_few_points_errors() {
        let cloud = PointCloud::new(vec![Point3::origin(); 5], Point3::origin());
        assert!(matches!(
            estimate_normals(&cloud, 8),
            Err(GeometryError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn collinear_neighbourhoods_are_flagged() {
        let pts: Vec<Point3> = (0..20).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let cloud = PointCloud::new(pts, Point3::new(0.0, 0.0, 100.0));
        let est = estimate_normals(&cloud, 5).unwrap();
        assert_eq!(est.degenerate.len(), 20);
    }

    #[test]
    fn estimation_commutes_with_rigid_motion() {
        let cloud = {
            let mut rng = ChaCha8Rng::seed_from_u64(32);
            let pts: Vec<Point3> = (0..500)
                .map(|_| {
                    Point3::new(
                        rng.gen_range(-50.0..50.0),
                        rng.gen_range(-50.0..50.0),
                        0.1 * rng.gen_range(-1.0..1.0f64).powi(3),
                    )
                })
                .collect();
            PointCloud::new(pts, Point3::new(10.0, -20.0, 800.0))
        };
        let t = RigidTransform::from_axis_angle(&Vector3::new(0.3, 1.0, -0.2), 1.1)
            .compose(&RigidTransform::from_translation(Vector3::new(100.0, 50.0, -30.0)));
        let a = estimate_normals(&cloud, 10).unwrap().cloud.transformed(&t);
        let b = estimate_normals(&cloud.transformed(&t), 10).unwrap().cloud;
        for (na, nb) in a.normals().unwrap().iter().zip(b.normals().unwrap()) {
            assert!((na - nb).norm() < 1e-6);
        }
    }

    #[test]
    fn normals_flip_toward_viewpoint_on_attach() {
        let points = vec![Point3::new(0.0, 0.0, 0.0)];
        let normals = vec![-Vector3::z()];
        let cloud =
            PointCloud::with_normals(points, normals, Point3::new(0.0, 0.0, 10.0)).unwrap();
        assert!((cloud.normals().unwrap()[0] - Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn subsample_is_deterministic_and_bounded() {
        let cloud = grid_cloud();
        let s1 = cloud.subsampled(37);
        let s2 = cloud.subsampled(37);
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 37);
        assert_eq!(cloud.subsampled(1000).len(), 100);
    }
}
