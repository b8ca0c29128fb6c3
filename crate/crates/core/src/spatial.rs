//! Exact Euclidean k-nearest-neighbor and closed-ball queries.
//!
//! [`SpatialIndex`] is a kd-tree with per-node bounding boxes. Pruning uses a
//! lower bound that never exceeds the floating-point distance computed for
//! any point inside the box, so tree answers match the linear scan in
//! [`brute`] bit for bit. Equal distances are ordered by ascending point id.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default number of points stored in a kd-tree leaf.
pub const DEFAULT_LEAF_CAPACITY: usize = 32;

/// Above this dimension the index answers every query by linear scan.
pub const BRUTE_FORCE_DIMENSION: usize = 20;

/// `n` points in `R^d`, row-major. Always holds at least two points with
/// finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetRepr", into = "PointSetRepr")]
pub struct PointSet {
    coords: Vec<f64>,
    n: usize,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct PointSetRepr {
    dim: usize,
    coords: Vec<f64>,
}

impl TryFrom<PointSetRepr> for PointSet {
    type Error = crate::Error;
    fn try_from(r: PointSetRepr) -> Result<Self> {
        PointSet::new(r.coords, r.dim)
    }
}

impl From<PointSet> for PointSetRepr {
    fn from(p: PointSet) -> Self {
        PointSetRepr { dim: p.dim, coords: p.coords }
    }
}

impl PointSet {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(invalid(format!("{} coordinates do not form rows of dimension {dim}", coords.len())));
        }
        let n = coords.len() / dim;
        if n < 2 {
            return Err(invalid(format!("need at least 2 points, got {n}")));
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite coordinate at point {}, dimension {}", pos / dim, pos % dim)));
        }
        Ok(Self { coords, n, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if let Some(i) = rows.iter().position(|r| r.as_ref().len() != dim) {
            return Err(invalid(format!("row {i} has a different length than row 0")));
        }
        Self::new(rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect(), dim)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a point set holds at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    /// The single-coordinate projection onto dimension `j`.
    pub fn column(&self, j: usize) -> Result<PointSet> {
        if j >= self.dim {
            return Err(invalid(format!("column {j} out of range for dimension {}", self.dim)));
        }
        Self::new((0..self.n).map(|i| self.coords[i * self.dim + j]).collect(), 1)
    }

    /// The points with the given ids, in the given order.
    pub fn subset(&self, ids: &[usize]) -> Result<PointSet> {
        let mut coords = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            if i >= self.n {
                return Err(invalid(format!("point id {i} out of range")));
            }
            coords.extend_from_slice(self.point(i));
        }
        Self::new(coords, self.dim)
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.point(i), self.point(j)).sqrt()
    }
}

/// Squared Euclidean distance accumulated in coordinate order.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

/// A neighbor of a query point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Neighbor {
    pub id: usize,
    pub distance: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct Candidate {
    sq: f64,
    id: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq.total_cmp(&other.sq).then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_k(points: &PointSet, i: usize, k: usize) -> Result<()> {
    if i >= points.len() {
        return Err(invalid(format!("point id {i} out of range for {} points", points.len())));
    }
    if k == 0 || k >= points.len() {
        return Err(invalid(format!("k = {k} outside 1..={} for {} points", points.len() - 1, points.len())));
    }
    Ok(())
}

fn check_radius(points: &PointSet, i: usize, radius: f64) -> Result<()> {
    if i >= points.len() {
        return Err(invalid(format!("point id {i} out of range for {} points", points.len())));
    }
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be finite and nonnegative, got {radius}")));
    }
    Ok(())
}

/// Linear-scan queries. Reference implementation and high-dimension fallback.
pub mod brute {
    use super::*;

    /// The `k` nearest neighbors of point `i` (excluding `i`), ordered by
    /// distance then id.
    pub fn knn(points: &PointSet, i: usize, k: usize) -> Result<Vec<Neighbor>> {
        check_k(points, i, k)?;
        Ok(knn_unchecked(points, i, k))
    }

    pub(super) fn knn_unchecked(points: &PointSet, i: usize, k: usize) -> Vec<Neighbor> {
        let q = points.point(i);
        let mut all: Vec<Candidate> = (0..points.len())
            .filter(|&j| j != i)
            .map(|j| Candidate { sq: sq_dist(q, points.point(j)), id: j })
            .collect();
        all.select_nth_unstable(k - 1);
        all.truncate(k);
        all.sort_unstable();
        all.into_iter().map(|c| Neighbor { id: c.id, distance: c.sq.sqrt() }).collect()
    }

    /// Ids `j != i` with `distance(i, j) <= radius`, ascending.
    pub fn within(points: &PointSet, i: usize, radius: f64) -> Result<Vec<usize>> {
        check_radius(points, i, radius)?;
        Ok(within_unchecked(points, i, radius))
    }

    pub(super) fn within_unchecked(points: &PointSet, i: usize, radius: f64) -> Vec<usize> {
        let q = points.point(i);
        (0..points.len()).filter(|&j| j != i && sq_dist(q, points.point(j)).sqrt() <= radius).collect()
    }
}

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct KdTree {
    perm: Vec<usize>,
    nodes: Vec<Node>,
    /// `2 * dim` entries per node: lower corner then upper corner.
    bounds: Vec<f64>,
}

impl KdTree {
    fn build(points: &PointSet, leaf_capacity: usize) -> Self {
        let dim = points.dim();
        let mut tree = KdTree { perm: (0..points.len()).collect(), nodes: Vec::new(), bounds: Vec::new() };
        tree.build_node(points, 0, points.len(), leaf_capacity, dim);
        tree
    }

    fn build_node(&mut self, points: &PointSet, start: usize, end: usize, leaf: usize, dim: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { start, end, children: None });
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &p in &self.perm[start..end] {
            for (j, &c) in points.point(p).iter().enumerate() {
                lo[j] = lo[j].min(c);
                hi[j] = hi[j].max(c);
            }
        }
        let split_dim = (0..dim).max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b]))).unwrap_or(0);
        let spread = hi[split_dim] - lo[split_dim];
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);
        if end - start <= leaf || spread == 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points.point(a)[split_dim].total_cmp(&points.point(b)[split_dim])
        });
        let left = self.build_node(points, start, mid, leaf, dim);
        let right = self.build_node(points, mid, end, leaf, dim);
        self.nodes[id].children = Some((left, right));
        id
    }

    /// Squared distance from `q` to node `id`'s box; never larger than the
    /// computed squared distance to any point inside it.
    #[inline]
    fn lower_bound(&self, id: usize, q: &[f64]) -> f64 {
        let dim = q.len();
        let b = &self.bounds[2 * dim * id..2 * dim * (id + 1)];
        let mut s = 0.0;
        for j in 0..dim {
            let gap = if q[j] < b[j] {
                b[j] - q[j]
            } else if q[j] > b[dim + j] {
                q[j] - b[dim + j]
            } else {
                0.0
            };
            s += gap * gap;
        }
        s
    }

    fn knn(&self, points: &PointSet, i: usize, k: usize) -> Vec<Neighbor> {
        let q = points.point(i);
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        self.knn_node(points, 0, q, i, k, &mut heap);
        heap.into_sorted_vec().into_iter().map(|c| Neighbor { id: c.id, distance: c.sq.sqrt() }).collect()
    }

    fn knn_node(
        &self,
        points: &PointSet,
        id: usize,
        q: &[f64],
        skip: usize,
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        let node = &self.nodes[id];
        match node.children {
            None => {
                for &p in &self.perm[node.start..node.end] {
                    if p == skip {
                        continue;
                    }
                    let c = Candidate { sq: sq_dist(q, points.point(p)), id: p };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap holds k items") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Some((l, r)) => {
                let (bl, br) = (self.lower_bound(l, q), self.lower_bound(r, q));
                let order = if bl <= br { [(l, bl), (r, br)] } else { [(r, br), (l, bl)] };
                for (child, bound) in order {
                    // Equal bounds must be visited: a tie may carry a smaller id.
                    if heap.len() < k || bound <= heap.peek().expect("nonempty").sq {
                        self.knn_node(points, child, q, skip, k, heap);
                    }
                }
            }
        }
    }

    fn within(&self, points: &PointSet, i: usize, radius: f64, out: &mut Vec<usize>) {
        let q = points.point(i);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if self.lower_bound(id, q).sqrt() > radius {
                continue;
            }
            let node = &self.nodes[id];
            match node.children {
                None => {
                    for &p in &self.perm[node.start..node.end] {
                        if p != i && sq_dist(q, points.point(p)).sqrt() <= radius {
                            out.push(p);
                        }
                    }
                }
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        out.sort_unstable();
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Brute,
    Tree(KdTree),
}

/// Immutable exact neighbor index over a borrowed [`PointSet`].
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    points: &'a PointSet,
    leaf_capacity: usize,
    backend: Backend,
}

impl<'a> SpatialIndex<'a> {
    pub fn build(points: &'a PointSet, leaf_capacity: usize) -> Result<Self> {
        if leaf_capacity == 0 {
            return Err(invalid("leaf capacity must be positive"));
        }
        let backend = if points.dim() > BRUTE_FORCE_DIMENSION {
            Backend::Brute
        } else {
            Backend::Tree(KdTree::build(points, leaf_capacity))
        };
        Ok(Self { points, leaf_capacity, backend })
    }

    pub fn with_default_capacity(points: &'a PointSet) -> Result<Self> {
        Self::build(points, DEFAULT_LEAF_CAPACITY)
    }

    pub fn points(&self) -> &'a PointSet {
        self.points
    }

    pub fn leaf_capacity(&self) -> usize {
        self.leaf_capacity
    }

    pub fn is_brute_force(&self) -> bool {
        matches!(self.backend, Backend::Brute)
    }

    /// The `k` nearest neighbors of point `i`, excluding `i`, ordered by
    /// distance and then by ascending id.
    pub fn knn(&self, i: usize, k: usize) -> Result<Vec<Neighbor>> {
        check_k(self.points, i, k)?;
        Ok(match &self.backend {
            Backend::Brute => brute::knn_unchecked(self.points, i, k),
            Backend::Tree(t) => t.knn(self.points, i, k),
        })
    }

    /// Distance from point `i` to its `k`-th nearest neighbor.
    pub fn kth_neighbor_distance(&self, i: usize, k: usize) -> Result<f64> {
        Ok(self.knn(i, k)?.last().expect("k >= 1").distance)
    }

    /// Ids of all other points in the closed ball of `radius` around point
    /// `i`, ascending.
    pub fn neighbors_within(&self, i: usize, radius: f64) -> Result<Vec<usize>> {
        check_radius(self.points, i, radius)?;
        Ok(match &self.backend {
            Backend::Brute => brute::within_unchecked(self.points, i, radius),
            Backend::Tree(t) => {
                let mut out = Vec::new();
                t.within(self.points, i, radius, &mut out);
                out
            }
        })
    }
}
