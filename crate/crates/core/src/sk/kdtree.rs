//! Static 4-d tree for nearest-neighbour lookups on the unit sphere.

use alloc::vec::Vec;

pub(crate) struct KdTree {
    points: Vec<[f64; 4]>,
    /// Implicit balanced tree: the median of each range is its root.
    order: Vec<u32>,
}

fn dist2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()
}

impl KdTree {
    pub(crate) fn new(points: Vec<[f64; 4]>) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        Self::build(&points, &mut order, 0);
        Self { points, order }
    }

    fn build(points: &[[f64; 4]], idx: &mut [u32], depth: usize) {
        if idx.len() <= 1 {
            return;
        }
        let axis = depth % 4;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |a, b| points[*a as usize][axis].total_cmp(&points[*b as usize][axis]));
        let (left, right) = idx.split_at_mut(mid);
        Self::build(points, left, depth + 1);
        Self::build(points, &mut right[1..], depth + 1);
    }

    /// Index of the point closest to `t`, with its squared distance.
    pub(crate) fn nearest(&self, t: &[f64; 4]) -> Option<(usize, f64)> {
        if self.order.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(&self.order, 0, t, &mut best);
        Some(best)
    }

    fn search(&self, idx: &[u32], depth: usize, t: &[f64; 4], best: &mut (usize, f64)) {
        if idx.is_empty() {
            return;
        }
        let mid = idx.len() / 2;
        let p = idx[mid] as usize;
        let d = dist2(&self.points[p], t);
        if d < best.1 {
            *best = (p, d);
        }
        let axis = depth % 4;
        let diff = t[axis] - self.points[p][axis];
        let (near, far) = if diff < 0.0 { (&idx[..mid], &idx[mid + 1..]) } else { (&idx[mid + 1..], &idx[..mid]) };
        self.search(near, depth + 1, t, best);
        if diff * diff < best.1 {
            self.search(far, depth + 1, t, best);
        }
    }
}
