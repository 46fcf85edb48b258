//! Icosphere subdivision and farthest-point subsampling, shared by the
//! camera-sphere generator and the grasp-sample dome.

use super::Vector3;
use std::collections::HashMap;

/// Vertex count of an icosphere at subdivision `level`: 10·4^level + 2.
pub fn icosphere_vertex_count(level: u32) -> usize {
    10 * 4usize.pow(level) + 2
}

/// Unit icosahedron vertices and faces.
fn icosahedron() -> (Vec<Vector3>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let vertices: Vec<Vector3> = raw
        .iter()
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (vertices, faces)
}

/// Unit sphere triangulation: icosahedron subdivided `level` times with
/// midpoints reprojected onto the sphere. Deterministic vertex order.
pub fn icosphere(level: u32) -> (Vec<Vector3>, Vec<[u32; 3]>) {
    let (mut vertices, mut faces) = icosahedron();
    for _ in 0..level {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next_faces = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vector3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let m = (vertices[a as usize] + vertices[b as usize]).normalize();
                vertices.push(m);
                (vertices.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next_faces.push([a, ab, ca]);
            next_faces.push([b, bc, ab]);
            next_faces.push([c, ca, bc]);
            next_faces.push([ab, bc, ca]);
        }
        faces = next_faces;
    }
    (vertices, faces)
}

/// Greedy farthest-point subsample of unit directions: starts from the
/// direction closest to +Z, then repeatedly adds the direction maximising the
/// minimum angle to the chosen set. Ties break to the lower index.
pub fn farthest_point_subsample(dirs: &[Vector3], n: usize) -> Vec<usize> {
    assert!(n <= dirs.len());
    if n == 0 {
        return Vec::new();
    }
    let start = dirs
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.z.total_cmp(&b.z).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();
    let mut chosen = vec![start];
    // min_dot[i]: max cosine from dirs[i] to the chosen set (higher = closer).
    let mut closest: Vec<f64> = dirs.iter().map(|d| d.dot(&dirs[start])).collect();
    while chosen.len() < n {
        let next = closest
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.total_cmp(b).then(ia.cmp(ib)))
            .map(|(i, _)| i)
            .unwrap();
        chosen.push(next);
        for (c, d) in closest.iter_mut().zip(dirs) {
            *c = c.max(d.dot(&dirs[next]));
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts_follow_the_subdivision_formula() {
        for level in 0..3 {
            let (v, f) = icosphere(level);
            assert_eq!(v.len(), icosphere_vertex_count(level));
            assert_eq!(f.len(), 20 * 4usize.pow(level));
        }
        assert_eq!(icosphere_vertex_count(0), 12);
        assert_eq!(icosphere_vertex_count(1), 42);
        assert_eq!(icosphere_vertex_count(2), 162);
    }

    #[test]
    fn icosahedron_min_pairwise_separation() {
        let (v, _) = icosphere(0);
        let mut min_angle = f64::INFINITY;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                min_angle = min_angle.min(v[i].dot(&v[j]).clamp(-1.0, 1.0).acos());
            }
        }
        assert!((min_angle.to_degrees() - 63.43).abs() < 0.1);
    }

    #[test]
    fn all_vertices_unit_length() {
        let (v, _) = icosphere(2);
        for d in v {
            assert!((d.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subsample_of_full_set_is_everything() {
        let (v, _) = icosphere(0);
        let mut picks = farthest_point_subsample(&v, 12);
        picks.sort_unstable();
        assert_eq!(picks, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn subsample_is_deterministic_and_spread() {
        let (v, _) = icosphere(2);
        let a = farthest_point_subsample(&v, 80);
        let b = farthest_point_subsample(&v, 80);
        assert_eq!(a, b);
        assert_eq!(a.len(), 80);
        // Spacing sanity: no two picks closer than half the ideal spacing.
        let mut min_angle = f64::INFINITY;
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                min_angle = min_angle.min(v[a[i]].dot(&v[a[j]]).clamp(-1.0, 1.0).acos());
            }
        }
        assert!(min_angle.to_degrees() > 10.0, "min separation {min_angle}");
    }
}
