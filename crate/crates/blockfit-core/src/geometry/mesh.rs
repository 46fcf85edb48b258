//! Triangle meshes with a bounding-volume hierarchy for ray casting and
//! proximity queries.

use super::{GeometryError, Point3, RigidTransform, Vector3};

/// Intersections closer than this along the ray are ignored, so rays started
/// on a surface (or inside a mesh) hit the next face forward.
pub const RAY_EPS: f64 = 1e-6;

/// Triangles with area below this (mm²) are dropped at construction.
const DEGENERATE_AREA: f64 = 1e-12;

const BVH_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: &Point3) {
        for a in 0..3 {
            self.min[a] = self.min[a].min(p[a]);
            self.max[a] = self.max[a].max(p[a]);
        }
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        out.grow(&other.min);
        out.grow(&other.max);
        out
    }

    pub fn center(&self) -> Point3 {
        Point3::from((self.min.coords + self.max.coords) * 0.5)
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn distance_sq_to_point(&self, p: &Point3) -> f64 {
        let mut d2 = 0.0;
        for a in 0..3 {
            let v = p[a].clamp(self.min[a], self.max[a]) - p[a];
            d2 += v * v;
        }
        d2
    }

    /// Squared distance between two boxes (0 if they overlap).
    pub fn distance_sq_to_box(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for a in 0..3 {
            let gap = (self.min[a] - other.max[a]).max(other.min[a] - self.max[a]).max(0.0);
            d2 += gap * gap;
        }
        d2
    }

    /// Slab test; returns entry distance if the ray hits the box in [0, t_max].
    fn ray_hit(&self, origin: &Point3, inv_dir: &Vector3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let lo = (self.min[a] - origin[a]) * inv_dir[a];
            let hi = (self.max[a] - origin[a]) * inv_dir[a];
            let (near, far) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
enum BvhNode {
    Leaf {
        bounds: Aabb,
        start: usize,
        count: usize,
    },
    Inner {
        bounds: Aabb,
        left: usize,
        right: usize,
    },
}

impl BvhNode {
    fn bounds(&self) -> &Aabb {
        match self {
            BvhNode::Leaf { bounds, .. } | BvhNode::Inner { bounds, .. } => bounds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub point: Point3,
    /// Unit triangle normal, oriented against the ray direction.
    pub normal: Vector3,
    pub distance: f64,
    pub triangle: usize,
}

/// Indexed triangle mesh, cleaned of degenerate faces, with a precomputed
/// BVH. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
    nodes: Vec<BvhNode>,
    /// Triangle indices reordered so leaves own contiguous runs.
    tri_order: Vec<u32>,
    bounds: Aabb,
}

impl TriangleMesh {
    /// Validates indices and drops zero-area triangles.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        if vertices.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let nv = vertices.len() as u32;
        let mut clean = Vec::with_capacity(triangles.len());
        for t in triangles {
            if t.iter().any(|&i| i >= nv) {
                return Err(GeometryError::InvalidArg(format!(
                    "triangle index out of range: {t:?} with {nv} vertices"
                )));
            }
            let [a, b, c] = [
                vertices[t[0] as usize],
                vertices[t[1] as usize],
                vertices[t[2] as usize],
            ];
            if (b - a).cross(&(c - a)).norm() * 0.5 > DEGENERATE_AREA {
                clean.push(t);
            }
        }
        if clean.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let mut mesh = Self {
            vertices,
            triangles: clean,
            nodes: Vec::new(),
            tri_order: Vec::new(),
            bounds: Aabb::empty(),
        };
        mesh.build_bvh();
        Ok(mesh)
    }

    fn build_bvh(&mut self) {
        let n = self.triangles.len();
        self.tri_order = (0..n as u32).collect();
        let tri_bounds: Vec<Aabb> = (0..n)
            .map(|i| {
                let [a, b, c] = self.triangle_points(i);
                let mut bb = Aabb::empty();
                bb.grow(&a);
                bb.grow(&b);
                bb.grow(&c);
                bb
            })
            .collect();
        self.nodes.clear();
        let root = build_bvh_rec(&tri_bounds, &mut self.tri_order, 0, n, &mut self.nodes);
        debug_assert_eq!(root, 0);
        self.bounds = *self.nodes[0].bounds();
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_points(&self, i: usize) -> [Point3; 3] {
        let t = self.triangles[i];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn aabb(&self) -> Aabb {
        self.bounds
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.triangle_points(i);
                (b - a).cross(&(c - a)).norm() * 0.5
            })
            .sum()
    }

    /// Area-weighted centroid of the triangle surfaces.
    pub fn area_centroid(&self) -> Point3 {
        let mut acc = Vector3::zeros();
        let mut area_sum = 0.0;
        for i in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(i);
            let area = (b - a).cross(&(c - a)).norm() * 0.5;
            acc += (a.coords + b.coords + c.coords) / 3.0 * area;
            area_sum += area;
        }
        Point3::from(acc / area_sum)
    }

    /// Radius of the smallest origin-free sphere about `center` containing
    /// every vertex.
    pub fn circumscribed_radius_about(&self, center: &Point3) -> f64 {
        self.vertices
            .iter()
            .map(|v| (v - center).norm())
            .fold(0.0, f64::max)
    }

    pub fn translated(&self, offset: &Vector3) -> TriangleMesh {
        let vertices = self.vertices.iter().map(|v| v + offset).collect();
        TriangleMesh::new(vertices, self.triangles.clone()).expect("translated mesh stays valid")
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriangleMesh {
        let vertices = self.vertices.iter().map(|v| t.apply_point(v)).collect();
        TriangleMesh::new(vertices, self.triangles.clone()).expect("posed mesh stays valid")
    }

    /// Concatenates meshes into one (re-indexing triangles).
    pub fn merged(meshes: &[&TriangleMesh]) -> Result<TriangleMesh, GeometryError> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in meshes {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
        }
        TriangleMesh::new(vertices, triangles)
    }

    /// Nearest intersection of the ray with the mesh at parameter > [`RAY_EPS`].
    pub fn raycast(&self, origin: &Point3, dir: &Vector3) -> Option<RayHit> {
        let inv_dir = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<RayHit> = None;
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            let t_max = best.as_ref().map_or(f64::INFINITY, |h| h.distance);
            match &self.nodes[node] {
                BvhNode::Leaf { bounds, start, count } => {
                    if bounds.ray_hit(origin, &inv_dir, t_max).is_none() {
                        continue;
                    }
                    for &ti in &self.tri_order[*start..*start + *count] {
                        let [a, b, c] = self.triangle_points(ti as usize);
                        if let Some(t) = ray_triangle(origin, dir, &a, &b, &c) {
                            if t > RAY_EPS && best.as_ref().map_or(true, |h| t < h.distance) {
                                let mut normal = (b - a).cross(&(c - a)).normalize();
                                if normal.dot(dir) > 0.0 {
                                    normal = -normal;
                                }
                                best = Some(RayHit {
                                    point: origin + dir * t,
                                    normal,
                                    distance: t,
                                    triangle: ti as usize,
                                });
                            }
                        }
                    }
                }
                BvhNode::Inner { bounds, left, right } => {
                    if bounds.ray_hit(origin, &inv_dir, t_max).is_none() {
                        continue;
                    }
                    // Visit the nearer child first for earlier pruning.
                    let dl = self.nodes[*left].bounds().ray_hit(origin, &inv_dir, t_max);
                    let dr = self.nodes[*right].bounds().ray_hit(origin, &inv_dir, t_max);
                    match (dl, dr) {
                        (Some(a), Some(b)) if a <= b => {
                            stack.push(*right);
                            stack.push(*left);
                        }
                        (Some(_), Some(_)) => {
                            stack.push(*left);
                            stack.push(*right);
                        }
                        (Some(_), None) => stack.push(*left),
                        (None, Some(_)) => stack.push(*right),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }

    pub(super) fn node_bounds(&self, node: usize) -> &Aabb {
        self.nodes[node].bounds()
    }

    pub(super) fn node_children(&self, node: usize) -> Option<(usize, usize)> {
        match &self.nodes[node] {
            BvhNode::Inner { left, right, .. } => Some((*left, *right)),
            BvhNode::Leaf { .. } => None,
        }
    }

    pub(super) fn leaf_triangles(&self, node: usize) -> Option<&[u32]> {
        match &self.nodes[node] {
            BvhNode::Leaf { start, count, .. } => Some(&self.tri_order[*start..*start + *count]),
            BvhNode::Inner { .. } => None,
        }
    }
}

fn build_bvh_rec(
    tri_bounds: &[Aabb],
    order: &mut [u32],
    start: usize,
    count: usize,
    nodes: &mut Vec<BvhNode>,
) -> usize {
    let mut bounds = Aabb::empty();
    for &i in &order[start..start + count] {
        bounds = bounds.merge(&tri_bounds[i as usize]);
    }
    let id = nodes.len();
    if count <= BVH_LEAF_SIZE {
        nodes.push(BvhNode::Leaf { bounds, start, count });
        return id;
    }
    // Median split on the widest axis of the centroid bounds.
    let mut cb = Aabb::empty();
    for &i in &order[start..start + count] {
        cb.grow(&tri_bounds[i as usize].center());
    }
    let extent = cb.max - cb.min;
    let axis = (0..3).max_by(|&a, &b| extent[a].total_cmp(&extent[b])).unwrap();
    if extent[axis] <= 0.0 {
        nodes.push(BvhNode::Leaf { bounds, start, count });
        return id;
    }
    let mid = count / 2;
    order[start..start + count].select_nth_unstable_by(mid, |&a, &b| {
        tri_bounds[a as usize]
            .center()[axis]
            .total_cmp(&tri_bounds[b as usize].center()[axis])
            .then(a.cmp(&b))
    });
    nodes.push(BvhNode::Inner { bounds, left: 0, right: 0 });
    let left = build_bvh_rec(tri_bounds, order, start, mid, nodes);
    let right = build_bvh_rec(tri_bounds, order, start + mid, count - mid, nodes);
    match &mut nodes[id] {
        BvhNode::Inner { left: l, right: r, .. } => {
            *l = left;
            *r = right;
        }
        _ => unreachable!(),
    }
    id
}

/// Möller–Trumbore ray/triangle intersection; returns the ray parameter.
pub(super) fn ray_triangle(
    origin: &Point3,
    dir: &Vector3,
    a: &Point3,
    b: &Point3,
    c: &Point3,
) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    (t > 0.0).then_some(t)
}

/// Axis-aligned cuboid as a 12-triangle mesh, for tests and fixtures.
pub fn cuboid_mesh(min: Point3, max: Point3) -> TriangleMesh {
    let v = vec![
        Point3::new(min.x, min.y, min.z),
        Point3::new(max.x, min.y, min.z),
        Point3::new(max.x, max.y, min.z),
        Point3::new(min.x, max.y, min.z),
        Point3::new(min.x, min.y, max.z),
        Point3::new(max.x, min.y, max.z),
        Point3::new(max.x, max.y, max.z),
        Point3::new(min.x, max.y, max.z),
    ];
    let t = vec![
        [0, 2, 1],
        [0, 3, 2], // bottom (z = min)
        [4, 5, 6],
        [4, 6, 7], // top (z = max)
        [0, 1, 5],
        [0, 5, 4], // front (y = min)
        [2, 3, 7],
        [2, 7, 6], // back (y = max)
        [1, 2, 6],
        [1, 6, 5], // right (x = max)
        [3, 0, 4],
        [3, 4, 7], // left (x = min)
    ];
    TriangleMesh::new(v, t).expect("cuboid is a valid mesh")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_cube() -> TriangleMesh {
        cuboid_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(100.0, 100.0, 100.0))
    }

    #[test]
    fn ray_hits_cube_face_at_analytic_distance() {
        let cube = unit_cube();
        let hit = cube
            .raycast(&Point3::new(50.0, 50.0, -100.0), &Vector3::z())
            .unwrap();
        assert_relative_eq!(hit.distance, 100.0, epsilon = 1e-9);
        assert_relative_eq!(hit.point.z, 0.0, epsilon = 1e-9);
        assert_relative_eq!(hit.point.x, 50.0, epsilon = 1e-9);
        // Normal faces the ray origin.
        assert!(hit.normal.dot(&Vector3::z()) < 0.0);
    }

    #[test]
    fn parallel_outside_ray_misses() {
        let cube = unit_cube();
        assert!(cube
            .raycast(&Point3::new(-50.0, -50.0, -10.0), &Vector3::z())
            .is_none());
    }

    #[test]
    fn origin_inside_hits_forward_face() {
        let cube = unit_cube();
        let hit = cube
            .raycast(&Point3::new(50.0, 50.0, 30.0), &Vector3::z())
            .unwrap();
        assert_relative_eq!(hit.distance, 70.0, epsilon = 1e-9);
        assert_relative_eq!(hit.point.z, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn ray_on_surface_skips_the_starting_face() {
        let cube = unit_cube();
        let hit = cube
            .raycast(&Point3::new(50.0, 50.0, 0.0), &Vector3::z())
            .unwrap();
        assert_relative_eq!(hit.distance, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_triangles_are_dropped() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(10.0, 0.0, 0.0),
            Point3::new(20.0, 0.0, 0.0), // collinear with the others
            Point3::new(0.0, 10.0, 0.0),
        ];
        let mesh = TriangleMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(mesh.triangles().len(), 1);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let v = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        assert!(TriangleMesh::new(v, vec![[0, 1, 7]]).is_err());
    }

    #[test]
    fn area_centroid_of_cube_is_center() {
        let cube = unit_cube();
        let c = cube.area_centroid();
        assert_relative_eq!(c.x, 50.0, epsilon = 1e-9);
        assert_relative_eq!(c.y, 50.0, epsilon = 1e-9);
        assert_relative_eq!(c.z, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn raycast_agrees_with_brute_force_on_random_rays() {
        use rand::{Rng, SeedableRng};
        let cube = unit_cube();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let origin = Point3::new(
                rng.gen_range(-200.0..300.0),
                rng.gen_range(-200.0..300.0),
                rng.gen_range(-200.0..300.0),
            );
            let dir = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if dir.norm() < 1e-3 {
                continue;
            }
            let dir = dir.normalize();
            let bvh_hit = cube.raycast(&origin, &dir).map(|h| h.distance);
            let brute = (0..cube.triangles().len())
                .filter_map(|i| {
                    let [a, b, c] = cube.triangle_points(i);
                    ray_triangle(&origin, &dir, &a, &b, &c).filter(|&t| t > RAY_EPS)
                })
                .fold(None::<f64>, |acc, t| Some(acc.map_or(t, |a| a.min(t))));
            match (bvh_hit, brute) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
                (None, None) => {}
                other => panic!("BVH and brute force disagree: {other:?}"),
            }
        }
    }
}
