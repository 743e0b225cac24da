//! Exact nearest-neighbour queries over an [`EmbeddingSet`].
//!
//! Every estimator reduces to two primitives: the distance from a point to
//! its kth-nearest neighbour in a set, and the number of set members inside
//! a closed ball. Both are answered by a kd-tree whose results are identical
//! to a linear scan: squared distances are accumulated in coordinate order,
//! box bounds are monotone lower/upper bounds on those same floating-point
//! sums, and ties are broken by ascending row index.
//!
//! Self-exclusion is by row identity, never by coordinate equality, so a
//! duplicated row still counts as a neighbour of its twin.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

const LEAF_SIZE: usize = 16;

/// Squared Euclidean distance, summed in coordinate order.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A neighbour found by a query: original row index and squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist2: f64,
}

impl Neighbor {
    pub fn distance(&self) -> f64 {
        self.dist2.sqrt()
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.index.cmp(&other.index))
    }
}

// max-heap entry keyed by (dist2, index)
struct HeapEntry(Neighbor);

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.key_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

/// Ball membership test. Both forms are monotone in the squared distance,
/// which is what lets whole tree nodes be accepted or rejected exactly.
#[derive(Debug, Clone, Copy)]
enum Ball {
    /// `dist2 <= r2`
    Squared(f64),
    /// `sqrt(dist2) <= r`
    Radius(f64),
}

impl Ball {
    #[inline]
    fn admits(self, dist2: f64) -> bool {
        match self {
            Ball::Squared(r2) => dist2 <= r2,
            Ball::Radius(r) => dist2.sqrt() <= r,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Closed-ball boundary convention: a point at exactly the radius is inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    #[default]
    ClosedBall,
}

/// Immutable kd-tree over the rows of an embedding set.
#[derive(Debug, Clone)]
pub struct NeighborIndex<'a> {
    set: &'a EmbeddingSet,
    // rows copied in tree order
    points: Vec<f64>,
    order: Vec<usize>,
    position: Vec<usize>,
    nodes: Vec<Node>,
    // per node: d lower bounds then d upper bounds
    bounds: Vec<f64>,
}

impl<'a> NeighborIndex<'a> {
    pub fn build(set: &'a EmbeddingSet) -> Self {
        let n = set.n();
        let d = set.d();
        let mut index = NeighborIndex {
            set,
            points: Vec::new(),
            order: (0..n).collect(),
            position: Vec::new(),
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        index.build_node(0, n);
        let mut points = Vec::with_capacity(n * d);
        for &row in &index.order {
            points.extend_from_slice(set.row(row));
        }
        let mut position = vec![0; n];
        for (p, &row) in index.order.iter().enumerate() {
            position[row] = p;
        }
        index.points = points;
        index.position = position;
        index
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let d = self.set.d();
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            children: None,
        });
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &row in &self.order[start..end] {
            for (j, &v) in self.set.row(row).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let (split_dim, spread) = (0..d)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        if end - start > LEAF_SIZE && spread > 0.0 {
            let mid = start + (end - start) / 2;
            let set = self.set;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                set.row(a)[split_dim]
                    .total_cmp(&set.row(b)[split_dim])
                    .then(a.cmp(&b))
            });
            let left = self.build_node(start, mid);
            let right = self.build_node(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    /// The indexed set.
    pub fn set(&self) -> &'a EmbeddingSet {
        self.set
    }

    pub fn len(&self) -> usize {
        self.set.n()
    }

    pub fn is_empty(&self) -> bool {
        self.set.n() == 0
    }

    pub fn d(&self) -> usize {
        self.set.d()
    }

    #[inline]
    fn point(&self, p: usize) -> &[f64] {
        let d = self.set.d();
        &self.points[p * d..(p + 1) * d]
    }

    /// Lower and upper bounds on the squared distance from `q` to any point
    /// in the node's box.
    #[inline]
    fn box_bounds(&self, node: usize, q: &[f64]) -> (f64, f64) {
        let d = self.set.d();
        let lo = &self.bounds[2 * d * node..2 * d * node + d];
        let hi = &self.bounds[2 * d * node + d..2 * d * (node + 1)];
        let mut near = 0.0;
        let mut far = 0.0;
        for j in 0..d {
            let (a, b) = (q[j] - lo[j], hi[j] - q[j]);
            let gap = if a < 0.0 {
                -a
            } else if b < 0.0 {
                -b
            } else {
                0.0
            };
            let wide = a.abs().max(b.abs());
            near += gap * gap;
            far += wide * wide;
        }
        (near, far)
    }

    fn check_query(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.d() {
            return Err(Error::DimensionMismatch {
                left: query.len(),
                right: self.d(),
            });
        }
        Ok(())
    }

    /// The `k` nearest rows to `query`, ascending by (distance, row index).
    /// `exclude` removes one row by identity.
    pub fn k_nearest(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<Neighbor>> {
        self.check_query(query)?;
        let available = self.len() - usize::from(exclude.is_some_and(|r| r < self.len()));
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if k > available {
            return Err(Error::KOutOfRange { k, available });
        }

        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
        let mut stack = vec![(0usize, self.box_bounds(0, query).0)];
        while let Some((node, near)) = stack.pop() {
            if heap.len() == k && near > heap.peek().unwrap().0.dist2 {
                continue;
            }
            let Node { start, end, children } = self.nodes[node];
            match children {
                Some((left, right)) => {
                    let l = self.box_bounds(left, query).0;
                    let r = self.box_bounds(right, query).0;
                    if l <= r {
                        stack.push((right, r));
                        stack.push((left, l));
                    } else {
                        stack.push((left, l));
                        stack.push((right, r));
                    }
                }
                None => {
                    for p in start..end {
                        let row = self.order[p];
                        if Some(row) == exclude {
                            continue;
                        }
                        let cand = Neighbor {
                            index: row,
                            dist2: squared_distance(query, self.point(p)),
                        };
                        if heap.len() < k {
                            heap.push(HeapEntry(cand));
                        } else if cand.key_cmp(&heap.peek().unwrap().0) == Ordering::Less {
                            heap.pop();
                            heap.push(HeapEntry(cand));
                        }
                    }
                }
            }
        }
        let mut out: Vec<Neighbor> = heap.into_iter().map(|e| e.0).collect();
        out.sort_by(Neighbor::key_cmp);
        Ok(out)
    }

    /// Squared distance to the kth-nearest retained row.
    pub fn kth_dist2(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<f64> {
        Ok(self.k_nearest(query, k, exclude)?[k - 1].dist2)
    }

    /// `D_k`: Euclidean distance from `query` to its kth-nearest retained row.
    pub fn kth_distance(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<f64> {
        Ok(self.kth_dist2(query, k, exclude)?.sqrt())
    }

    /// kth-nearest-neighbour distance of member row `row`, itself excluded.
    pub fn kth_distance_of_row(&self, row: usize, k: usize) -> Result<f64> {
        self.kth_distance(self.set.row(row), k, Some(row))
    }

    /// Nearest row to `query`.
    pub fn nearest(&self, query: &[f64]) -> Result<Neighbor> {
        Ok(self.k_nearest(query, 1, None)?[0])
    }

    fn count(&self, center: &[f64], ball: Ball, exclude: Option<usize>) -> usize {
        let excluded_pos = exclude.filter(|&r| r < self.len()).map(|r| self.position[r]);
        let mut total = 0;
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            let (near, far) = self.box_bounds(node, center);
            if !ball.admits(near) {
                continue;
            }
            let Node { start, end, children } = self.nodes[node];
            if ball.admits(far) {
                total += end - start;
                if excluded_pos.is_some_and(|p| (start..end).contains(&p)) {
                    total -= 1;
                }
                continue;
            }
            match children {
                Some((left, right)) => {
                    stack.push(right);
                    stack.push(left);
                }
                None => {
                    for p in start..end {
                        if Some(p) != excluded_pos && ball.admits(squared_distance(center, self.point(p))) {
                            total += 1;
                        }
                    }
                }
            }
        }
        total
    }

    /// `#(set, B)`: rows `p` with `‖p − center‖ ≤ radius`.
    pub fn count_within(&self, center: &[f64], radius: f64, exclude: Option<usize>) -> Result<usize> {
        self.check_query(center)?;
        Ok(self.count(center, Ball::Radius(radius), exclude))
    }

    /// Rows with squared distance `≤ radius2`. Pairs exactly with
    /// [`kth_dist2`](Self::kth_dist2), which is how all estimators use it.
    pub fn count_within_squared(&self, center: &[f64], radius2: f64, exclude: Option<usize>) -> Result<usize> {
        self.check_query(center)?;
        Ok(self.count(center, Ball::Squared(radius2), exclude))
    }

    /// Self-excluded kth-NN squared distance of every row, in row order.
    pub fn kth_dist2_all_rows(&self, k: usize) -> Result<Vec<f64>> {
        (0..self.len())
            .into_par_iter()
            .map(|i| self.kth_dist2(self.set.row(i), k, Some(i)))
            .collect()
    }

    /// kth-NN squared distance into this set for every row of `queries`.
    pub fn kth_dist2_for(&self, queries: &EmbeddingSet, k: usize) -> Result<Vec<f64>> {
        self.check_query(queries.row(0))?;
        (0..queries.n())
            .into_par_iter()
            .map(|i| self.kth_dist2(queries.row(i), k, None))
            .collect()
    }
}

/// Which of the two indexed sets a ball centre belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Counts inside the ball `B_{k,A∪B}(center)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedBall {
    /// Squared kth-NN distance of the centre within the union, self excluded.
    pub radius2: f64,
    pub count_a: usize,
    pub count_b: usize,
}

impl MixedBall {
    pub fn radius(&self) -> f64 {
        self.radius2.sqrt()
    }
}

/// Ball over the union `A ∪ B` centred on row `row` of set `side`: the radius
/// is the centre's kth-NN distance within the union (centre excluded), and
/// each set's closed-ball count excludes the centre itself.
pub fn mixed_ball_stats(
    a: &NeighborIndex<'_>,
    b: &NeighborIndex<'_>,
    side: Side,
    row: usize,
    k: usize,
) -> Result<MixedBall> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            left: a.d(),
            right: b.d(),
        });
    }
    let (center, excl_a, excl_b) = match side {
        Side::A => (a.set().row(row), Some(row), None),
        Side::B => (b.set().row(row), None, Some(row)),
    };
    let avail_a = a.len() - usize::from(excl_a.is_some());
    let avail_b = b.len() - usize::from(excl_b.is_some());
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > avail_a + avail_b {
        return Err(Error::KOutOfRange {
            k,
            available: avail_a + avail_b,
        });
    }
    let mut d2: Vec<f64> = Vec::with_capacity(2 * k);
    if avail_a > 0 {
        d2.extend(a.k_nearest(center, k.min(avail_a), excl_a)?.iter().map(|n| n.dist2));
    }
    if avail_b > 0 {
        d2.extend(b.k_nearest(center, k.min(avail_b), excl_b)?.iter().map(|n| n.dist2));
    }
    d2.sort_by(f64::total_cmp);
    let radius2 = d2[k - 1];
    Ok(MixedBall {
        radius2,
        count_a: a.count(center, Ball::Squared(radius2), excl_a),
        count_b: b.count(center, Ball::Squared(radius2), excl_b),
    })
}
