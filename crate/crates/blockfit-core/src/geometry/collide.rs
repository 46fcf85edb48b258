//! Mesh proximity queries: triangle–triangle distance and posed mesh
//! collision via dual BVH descent.

use super::mesh::ray_triangle;
use super::{Point3, RigidTransform, TriangleMesh};

/// Distances at or below this count as contact.
pub const CONTACT_EPS: f64 = 1e-9;

/// Squared distance between segments `[p1,q1]` and `[p2,q2]` (Eberly-style
/// clamped closest-point computation).
fn segment_segment_sq(p1: &Point3, q1: &Point3, p2: &Point3, q2: &Point3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (mut s, mut t);
    if a <= 1e-30 && e <= 1e-30 {
        return (p1 - p2).norm_squared();
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            s = if denom > 1e-30 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm_squared()
}

/// Squared distance from `p` to triangle `abc` (closest point on the face,
/// an edge, or a vertex).
fn point_triangle_sq(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm_squared();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm_squared();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (p - (a + ab * t)).norm_squared();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm_squared();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (p - (a + ac * t)).norm_squared();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * t)).norm_squared();
    }
    let n = ab.cross(&ac);
    let dist = ap.dot(&n);
    dist * dist / n.norm_squared()
}

/// Does segment `[a, b]` pass through triangle `t`'s interior?
fn segment_hits_triangle(a: &Point3, b: &Point3, t: &[Point3; 3]) -> bool {
    let dir = b - a;
    let len = dir.norm();
    if len < 1e-30 {
        return false;
    }
    let dir = dir / len;
    matches!(ray_triangle(a, &dir, &t[0], &t[1], &t[2]), Some(d) if d <= len)
}

/// Minimum distance between two triangles; 0 when they intersect or touch.
pub fn triangle_distance(t1: &[Point3; 3], t2: &[Point3; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let (p1, q1) = (&t1[i], &t1[(i + 1) % 3]);
        for j in 0..3 {
            let (p2, q2) = (&t2[j], &t2[(j + 1) % 3]);
            best = best.min(segment_segment_sq(p1, q1, p2, q2));
        }
    }
    for v in t1 {
        best = best.min(point_triangle_sq(v, &t2[0], &t2[1], &t2[2]));
    }
    for v in t2 {
        best = best.min(point_triangle_sq(v, &t1[0], &t1[1], &t1[2]));
    }
    if best > 0.0 {
        // Edge-through-face intersections are not caught by the feature
        // distances above.
        for i in 0..3 {
            if segment_hits_triangle(&t1[i], &t1[(i + 1) % 3], t2)
                || segment_hits_triangle(&t2[i], &t2[(i + 1) % 3], t1)
            {
                return 0.0;
            }
        }
    }
    best.sqrt()
}

struct PosedMesh<'a> {
    mesh: &'a TriangleMesh,
    pose: &'a RigidTransform,
}

impl PosedMesh<'_> {
    fn triangle(&self, i: usize) -> [Point3; 3] {
        let [a, b, c] = self.mesh.triangle_points(i);
        [
            self.pose.apply_point(&a),
            self.pose.apply_point(&b),
            self.pose.apply_point(&c),
        ]
    }

    fn node_bounds_posed(&self, node: usize) -> super::Aabb {
        // Conservative posed box: transform the 8 corners of the local box.
        let bb = self.mesh.node_bounds(node);
        let mut out = super::Aabb::empty();
        for &x in &[bb.min.x, bb.max.x] {
            for &y in &[bb.min.y, bb.max.y] {
                for &z in &[bb.min.z, bb.max.z] {
                    out.grow(&self.pose.apply_point(&Point3::new(x, y, z)));
                }
            }
        }
        out
    }
}

fn descend(
    a: &PosedMesh,
    na: usize,
    b: &PosedMesh,
    nb: usize,
    best: &mut f64,
    stop_below: f64,
) {
    if *best <= stop_below {
        return;
    }
    let ba = a.node_bounds_posed(na);
    let bb = b.node_bounds_posed(nb);
    if ba.distance_sq_to_box(&bb) >= *best * *best {
        return;
    }
    match (a.mesh.node_children(na), b.mesh.node_children(nb)) {
        (None, None) => {
            for &ta in a.mesh.leaf_triangles(na).unwrap() {
                let tri_a = a.triangle(ta as usize);
                for &tb in b.mesh.leaf_triangles(nb).unwrap() {
                    let tri_b = b.triangle(tb as usize);
                    let d = triangle_distance(&tri_a, &tri_b);
                    if d < *best {
                        *best = d;
                        if *best <= stop_below {
                            return;
                        }
                    }
                }
            }
        }
        (Some((l, r)), None) => {
            descend(a, l, b, nb, best, stop_below);
            descend(a, r, b, nb, best, stop_below);
        }
        (None, Some((l, r))) => {
            descend(a, na, b, l, best, stop_below);
            descend(a, na, b, r, best, stop_below);
        }
        (Some((al, ar)), Some((bl, br))) => {
            descend(a, al, b, bl, best, stop_below);
            descend(a, al, b, br, best, stop_below);
            descend(a, ar, b, bl, best, stop_below);
            descend(a, ar, b, br, best, stop_below);
        }
    }
}

/// Minimum distance between two posed meshes (0 when intersecting/touching),
/// computed exactly down to `stop_below` (branch-and-bound terminates early
/// once the result is at or below it).
pub fn mesh_distance_bounded(
    a: &TriangleMesh,
    pose_a: &RigidTransform,
    b: &TriangleMesh,
    pose_b: &RigidTransform,
    stop_below: f64,
) -> f64 {
    let pa = PosedMesh { mesh: a, pose: pose_a };
    let pb = PosedMesh { mesh: b, pose: pose_b };
    let mut best = f64::INFINITY;
    descend(&pa, 0, &pb, 0, &mut best, stop_below);
    best
}

/// Exact minimum distance between two posed meshes.
pub fn mesh_distance(
    a: &TriangleMesh,
    pose_a: &RigidTransform,
    b: &TriangleMesh,
    pose_b: &RigidTransform,
) -> f64 {
    mesh_distance_bounded(a, pose_a, b, pose_b, 0.0)
}

/// True iff the posed meshes come closer than `clearance`. Contact
/// (distance ≤ [`CONTACT_EPS`]) counts as collision at any clearance, so
/// `clearance = 0` is an exact intersection/contact test.
pub fn mesh_collides(
    a: &TriangleMesh,
    pose_a: &RigidTransform,
    b: &TriangleMesh,
    pose_b: &RigidTransform,
    clearance: f64,
) -> bool {
    let d = mesh_distance_bounded(a, pose_a, b, pose_b, clearance.max(CONTACT_EPS) * 0.999_999);
    d < clearance || d <= CONTACT_EPS
}
