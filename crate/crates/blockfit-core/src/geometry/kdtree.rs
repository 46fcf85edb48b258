//! Exact k-nearest-neighbour search over 3-D points.
//!
//! Plain median-split k-d tree. Queries are exact (verified against brute
//! force); ties on distance break toward the lower point index.

use super::{GeometryError, Point3};

const LEAF_SIZE: usize = 12;

enum Node {
    Leaf {
        start: usize,
        count: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub struct KdTree {
    points: Vec<Point3>,
    /// Point indices, reordered so every leaf owns a contiguous slice.
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        if !points.is_empty() {
            let n = points.len();
            build_rec(points, &mut order, 0, n, &mut nodes);
        }
        Self {
            points: points.to_vec(),
            order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `n` nearest points to `query`, sorted by (distance, index).
    pub fn nearest(&self, query: &Point3, n: usize) -> Result<Vec<(usize, f64)>, GeometryError> {
        if self.points.is_empty() {
            return Err(GeometryError::EmptyIndex);
        }
        if n == 0 || n > self.points.len() {
            return Err(GeometryError::InvalidArg(format!(
                "requested {n} neighbours from an index of {}",
                self.points.len()
            )));
        }
        // Bounded worst-first list keyed by (dist², index).
        let mut best: Vec<(f64, u32)> = Vec::with_capacity(n + 1);
        self.search(0, query, n, &mut best);
        Ok(best
            .into_iter()
            .map(|(d2, i)| (i as usize, d2.sqrt()))
            .collect())
    }

    fn search(&self, node: usize, query: &Point3, n: usize, best: &mut Vec<(f64, u32)>) {
        match &self.nodes[node] {
            Node::Leaf { start, count } => {
                for &idx in &self.order[*start..*start + *count] {
                    let d2 = (self.points[idx as usize] - query).norm_squared();
                    push_candidate(best, n, (d2, idx));
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta <= 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, query, n, best);
                if best.len() < n || delta * delta <= best.last().unwrap().0 {
                    self.search(far, query, n, best);
                }
            }
        }
    }

    /// Indices of all points within `radius` of `query`, ascending by index.
    pub fn within_radius(&self, query: &Point3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.points.is_empty() {
            self.radius_rec(0, query, radius * radius, radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn radius_rec(&self, node: usize, query: &Point3, r2: f64, r: f64, out: &mut Vec<usize>) {
        match &self.nodes[node] {
            Node::Leaf { start, count } => {
                for &idx in &self.order[*start..*start + *count] {
                    if (self.points[idx as usize] - query).norm_squared() <= r2 {
                        out.push(idx as usize);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let delta = query[*axis] - value;
                if delta - r <= 0.0 {
                    self.radius_rec(*left, query, r2, r, out);
                }
                if delta + r >= 0.0 {
                    self.radius_rec(*right, query, r2, r, out);
                }
            }
        }
    }
}

fn push_candidate(best: &mut Vec<(f64, u32)>, n: usize, cand: (f64, u32)) {
    if best.len() == n {
        let worst = *best.last().unwrap();
        if (cand.0, cand.1) >= (worst.0, worst.1) {
            return;
        }
    }
    let pos = best.partition_point(|b| (b.0, b.1) < (cand.0, cand.1));
    best.insert(pos, cand);
    if best.len() > n {
        best.pop();
    }
}

fn build_rec(points: &[Point3], order: &mut [u32], start: usize, count: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if count <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, count });
        return id;
    }
    // Split on the widest axis at the median.
    let slice = &order[start..start + count];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in slice.iter() {
        let p = &points[i as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..3).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap();
    if hi[axis] - lo[axis] <= 0.0 {
        // All points coincide; no useful split.
        nodes.push(Node::Leaf { start, count });
        return id;
    }
    let mid = count / 2;
    order[start..start + count].select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .total_cmp(&points[b as usize][axis])
            .then(a.cmp(&b))
    });
    let value = points[order[start + mid] as usize][axis];
    nodes.push(Node::Split {
        axis,
        value,
        left: 0,
        right: 0,
    });
    let left = build_rec(points, order, start, mid, nodes);
    let right = build_rec(points, order, start + mid, count - mid, nodes);
    match &mut nodes[id] {
        Node::Split { left: l, right: r, .. } => {
            *l = left;
            *r = right;
        }
        _ => unreachable!(),
    }
    id
}

/// One-shot exact n-nearest-neighbour query.
pub fn kdtree_nn(
    points: &[Point3],
    query: &Point3,
    n: usize,
) -> Result<Vec<(usize, f64)>, GeometryError> {
    KdTree::build(points).nearest(query, n)
}
