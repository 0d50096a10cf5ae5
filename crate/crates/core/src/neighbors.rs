//! Exact K-nearest-neighbor index.
//!
//! Neighbors are ordered by `(distance, id)`, so equal distances resolve to
//! the smaller id. The O(n²) scan in [`NeighborIndex::brute_force`] is the
//! reference definition; the kd-tree must reproduce it exactly.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::distance::{euclidean, DistanceSource};
use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub id: usize,
    pub dist: T,
}

#[inline]
fn neighbor_order<T: Scalar>(a: &Neighbor<T>, b: &Neighbor<T>) -> Ordering {
    cmp_scalar(a.dist, b.dist).then(a.id.cmp(&b.id))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex<T> {
    k: usize,
    lists: Vec<Vec<Neighbor<T>>>,
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    if k >= n {
        return Err(Error::param(format!("k = {k} requires more than {k} points, got {n}")));
    }
    Ok(())
}

impl<T: Scalar> NeighborIndex<T> {
    /// Builds the index, using a kd-tree when coordinates are available.
    pub fn build(source: &DistanceSource<'_, T>, k: usize) -> Result<Self> {
        check_k(source.len(), k)?;
        match source {
            DistanceSource::Metric(ds) => Ok(Self::kd_tree(ds, k)),
            DistanceSource::Matrix(_) => Self::brute_force(source, k),
        }
    }

    /// Exhaustive scan over all pairs.
    pub fn brute_force(source: &DistanceSource<'_, T>, k: usize) -> Result<Self> {
        let n = source.len();
        check_k(n, k)?;
        let lists = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut all: Vec<Neighbor<T>> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| Neighbor {
                        id: j,
                        dist: source.dist(i, j),
                    })
                    .collect();
                if k < all.len() {
                    all.select_nth_unstable_by(k - 1, neighbor_order);
                    all.truncate(k);
                }
                all.sort_by(neighbor_order);
                all
            })
            .collect();
        Ok(NeighborIndex { k, lists })
    }

    fn kd_tree(dataset: &Dataset<T>, k: usize) -> Self {
        let tree = KdTree::new(dataset);
        let lists = (0..dataset.len())
            .into_par_iter()
            .map(|i| tree.knn(dataset.coords(i), i, k))
            .collect();
        NeighborIndex { k, lists }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn neighbors(&self, id: usize) -> &[Neighbor<T>] {
        &self.lists[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Neighbor<T>]> {
        self.lists.iter().map(Vec::as_slice)
    }
}

const LEAF_SIZE: usize = 8;

enum Node<T> {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: T, left: usize, right: usize },
}

struct KdTree<'a, T> {
    dataset: &'a Dataset<T>,
    order: Vec<usize>,
    nodes: Vec<Node<T>>,
}

/// Bounded candidate list kept sorted by `(dist, id)`.
struct Candidates<T> {
    k: usize,
    items: Vec<Neighbor<T>>,
}

impl<T: Scalar> Candidates<T> {
    fn offer(&mut self, cand: Neighbor<T>) {
        if self.items.len() == self.k {
            let worst = self.items[self.k - 1];
            if neighbor_order(&cand, &worst) != Ordering::Less {
                return;
            }
            self.items.pop();
        }
        let pos = self
            .items
            .partition_point(|x| neighbor_order(x, &cand) == Ordering::Less);
        self.items.insert(pos, cand);
    }

    /// Whether a region whose distance lower bound is `bound` can still contribute.
    fn may_improve(&self, bound: T) -> bool {
        if self.items.len() < self.k {
            return true;
        }
        let worst = self.items[self.k - 1].dist;
        // slack keeps equal-distance candidates (smaller ids) reachable despite rounding
        bound <= worst + worst * T::epsilon() * T::lit(64.0)
    }
}

impl<'a, T: Scalar> KdTree<'a, T> {
    fn new(dataset: &'a Dataset<T>) -> Self {
        let mut tree = KdTree {
            dataset,
            order: (0..dataset.len()).collect(),
            nodes: Vec::new(),
        };
        let n = dataset.len();
        tree.build(0, n);
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        let ds = self.dataset;
        let axis = (0..ds.dim())
            .map(|d| {
                let (lo, hi) = self.order[start..end].iter().fold(
                    (T::infinity(), T::neg_infinity()),
                    |(lo, hi), &i| (lo.min(ds.coords(i)[d]), hi.max(ds.coords(i)[d])),
                );
                (d, hi - lo)
            })
            .max_by(|a, b| cmp_scalar(a.1, b.1).then(b.0.cmp(&a.0)))
            .map(|(d, _)| d)
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            cmp_scalar(ds.coords(a)[axis], ds.coords(b)[axis]).then(a.cmp(&b))
        });
        let value = ds.coords(self.order[mid])[axis];
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[slot] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        slot
    }

    fn knn(&self, query: &[T], exclude: usize, k: usize) -> Vec<Neighbor<T>> {
        let mut cands = Candidates {
            k,
            items: Vec::with_capacity(k + 1),
        };
        self.search(0, query, exclude, &mut cands);
        cands.items
    }

    fn search(&self, node: usize, query: &[T], exclude: usize, cands: &mut Candidates<T>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &j in &self.order[start..end] {
                    if j != exclude {
                        cands.offer(Neighbor {
                            id: j,
                            dist: euclidean(query, self.dataset.coords(j)),
                        });
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                // left holds coordinates <= value, right holds >= value
                let (near, far) = if diff <= T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, query, exclude, cands);
                if cands.may_improve(diff.abs()) {
                    self.search(far, query, exclude, cands);
                }
            }
        }
    }
}
