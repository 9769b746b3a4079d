//! Univariate B-splines on local index vectors, trivariate blending
//! functions, the knot-vector overlap predicate and the dual-compatibility
//! checker.
//!
//! Evaluation is floating point; every combinatorial predicate (overlap,
//! support intersection) runs on exact m-adic values, so verdicts do not
//! hinge on rounding.

use crate::error::{Error, Result};
use crate::index::{
    active_nodes, active_region, local_index_vectors_in, skeletons, ActiveRegion, LocalIndexVector,
    Skeleton,
};
use crate::madic::{Madic, Point3};
use crate::mesh::Mesh;
use std::cmp::Ordering;

/// Value of the degree-`len−2` B-spline on the given simple knots at `t`.
///
/// Zero outside the knot range; right-continuous at knots except at the
/// final knot, where the left limit is taken.
pub fn bspline_eval(knots: &[f64], t: f64) -> f64 {
    let n = knots.len();
    let p = n - 2;
    if t < knots[0] || t > knots[n - 1] {
        return 0.0;
    }
    if t == knots[n - 1] {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    let mut vals = vec![0.0; p + 1];
    for i in 0..=p {
        vals[i] = if knots[i] <= t && t < knots[i + 1] { 1.0 } else { 0.0 };
    }
    for k in 1..=p {
        for i in 0..=(p - k) {
            let d1 = knots[i + k] - knots[i];
            let d2 = knots[i + k + 1] - knots[i + 1];
            let left = if d1 > 0.0 { (t - knots[i]) / d1 * vals[i] } else { 0.0 };
            let right = if d2 > 0.0 { (knots[i + k + 1] - t) / d2 * vals[i + 1] } else { 0.0 };
            vals[i] = left + right;
        }
    }
    vals[0]
}

/// Checked variant rejecting non-increasing knots.
pub fn bspline_eval_checked(knots: &[f64], t: f64) -> Result<f64> {
    if knots.len() < 2 || knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidKnots);
    }
    Ok(bspline_eval(knots, t))
}

/// The trivariate blending function anchored at an active node: the product
/// of the univariate B-splines on the node's three local index vectors.
#[derive(Clone, Debug)]
pub struct BlendingFunction {
    pub anchor: Point3,
    pub vectors: [LocalIndexVector; 3],
}

impl BlendingFunction {
    /// Support box: the product of the index-vector ranges.
    pub fn support(&self) -> [(&Madic, &Madic); 3] {
        [
            self.vectors[0].support(),
            self.vectors[1].support(),
            self.vectors[2].support(),
        ]
    }

    pub fn support_f64(&self, m: u32) -> [[f64; 2]; 3] {
        self.support().map(|(lo, hi)| [lo.to_f64(m), hi.to_f64(m)])
    }

    pub fn eval(&self, p: [f64; 3], m: u32) -> f64 {
        let mut acc = 1.0;
        for a in 0..3 {
            acc *= bspline_eval(&self.vectors[a].knots_f64(m), p[a]);
            if acc == 0.0 {
                return 0.0;
            }
        }
        acc
    }
}

/// Precomputed spline data of one mesh: skeletons, the active region, the
/// sorted active nodes and their blending functions. Global index sets are
/// memoized per queried line during construction.
pub struct SplineSet {
    m: u32,
    pub skeletons: [Skeleton; 3],
    pub active_region: ActiveRegion,
    pub nodes: Vec<Point3>,
    pub functions: Vec<BlendingFunction>,
}

impl SplineSet {
    pub fn build(g: &Mesh) -> Result<SplineSet> {
        use crate::index::{global_index_set, index_window};
        use std::collections::HashMap;
        let m = g.m();
        let ar = active_region(g)?;
        let skels = skeletons(g);
        let nodes = active_nodes(g)?;
        let mut memo: HashMap<(usize, Madic, Madic), Vec<Madic>> = HashMap::new();
        let mut functions = Vec::with_capacity(nodes.len());
        for v in &nodes {
            let mut vectors: [Option<LocalIndexVector>; 3] = [None, None, None];
            for axis in crate::madic::Axis::ALL {
                let [pa, pb] = axis.others();
                let key = (axis.index(), v[pa].clone(), v[pb].clone());
                let xs = memo
                    .entry(key)
                    .or_insert_with(|| global_index_set(&skels[axis.index()], (&v[pa], &v[pb]), m));
                vectors[axis.index()] =
                    Some(index_window(xs, &v[axis], g.degree()[axis.index()], axis, v, m)?);
            }
            functions.push(BlendingFunction {
                anchor: v.clone(),
                vectors: vectors.map(Option::unwrap),
            });
        }
        Ok(SplineSet { m, skeletons: skels, active_region: ar, nodes, functions })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn function_of(&self, v: &Point3) -> Option<&BlendingFunction> {
        self.nodes
            .binary_search_by(|n| n.cmp_in(v, self.m))
            .ok()
            .map(|i| &self.functions[i])
    }

    /// Do two support boxes intersect with positive volume?
    pub fn supports_share_volume(&self, i: usize, j: usize) -> bool {
        let m = self.m;
        let a = self.functions[i].support();
        let b = self.functions[j].support();
        (0..3).all(|ax| {
            let lo = if a[ax].0.cmp_in(b[ax].0, m) == Ordering::Greater { a[ax].0 } else { b[ax].0 };
            let hi = if a[ax].1.cmp_in(b[ax].1, m) == Ordering::Less { a[ax].1 } else { b[ax].1 };
            lo.cmp_in(hi, m) == Ordering::Less
        })
    }

    /// Pairs `(i, j)`, `i < j`, whose supports intersect with positive
    /// volume, found by a sweep along x over support intervals. Equals the
    /// brute-force pair set.
    pub fn support_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.m;
        let n = self.functions.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| {
            self.functions[a].vectors[0]
                .support()
                .0
                .cmp_in(self.functions[b].vectors[0].support().0, m)
        });
        let mut out = Vec::new();
        for oi in 0..n {
            let i = order[oi];
            let hi_x = self.functions[i].vectors[0].support().1;
            for &j in order.iter().skip(oi + 1) {
                if self.functions[j].vectors[0].support().0.cmp_in(hi_x, m) != Ordering::Less {
                    break;
                }
                if self.supports_share_volume(i, j) {
                    out.push((i.min(j), i.max(j)));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// The two-sided knot-vector overlap condition: every knot of one vector
/// that lies within the other's range is a knot of the other.
pub fn overlap(a: &LocalIndexVector, b: &LocalIndexVector, m: u32) -> Result<bool> {
    if a.entries.len() != b.entries.len() {
        return Err(Error::DegreeMismatch(a.degree(), b.degree()));
    }
    Ok(overlap_one_way(a, b, m) && overlap_one_way(b, a, m))
}

fn overlap_one_way(a: &LocalIndexVector, b: &LocalIndexVector, m: u32) -> bool {
    let (blo, bhi) = b.support();
    a.entries.iter().all(|x| {
        let inside = blo.cmp_in(x, m) != Ordering::Greater && x.cmp_in(bhi, m) != Ordering::Greater;
        !inside || b.contains_knot(x, m)
    })
}

/// Overlap in at least two of the three axes.
pub fn partial_overlap_vectors(
    a: &[LocalIndexVector; 3],
    b: &[LocalIndexVector; 3],
    m: u32,
) -> Result<bool> {
    let mut count = 0;
    for ax in 0..3 {
        if overlap(&a[ax], &b[ax], m)? {
            count += 1;
        }
    }
    Ok(count >= 2)
}

/// Convenience entry for two active nodes of a mesh.
pub fn partial_overlap(g: &Mesh, v: &Point3, w: &Point3) -> Result<bool> {
    let skels = skeletons(g);
    let a = local_index_vectors_in(g, &skels, v)?;
    let b = local_index_vectors_in(g, &skels, w)?;
    partial_overlap_vectors(&a, &b, g.m())
}

/// Dual-compatibility verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DcVerdict {
    Compatible,
    /// The lexicographically first pair of active nodes whose supports share
    /// positive volume without partially overlapping.
    Witness { v: Point3, w: Point3 },
}

impl DcVerdict {
    pub fn is_compatible(&self) -> bool {
        matches!(self, DcVerdict::Compatible)
    }
}

/// Check every support-sharing pair of active nodes for partial overlap.
pub fn is_dual_compatible(g: &Mesh) -> Result<DcVerdict> {
    let set = SplineSet::build(g)?;
    is_dual_compatible_in(&set)
}

pub fn is_dual_compatible_in(set: &SplineSet) -> Result<DcVerdict> {
    let m = set.m;
    let mut worst: Option<(usize, usize)> = None;
    for (i, j) in set.support_pairs() {
        if !partial_overlap_vectors(&set.functions[i].vectors, &set.functions[j].vectors, m)? {
            let key = (i, j);
            if worst.map_or(true, |w| key < w) {
                worst = Some(key);
            }
        }
    }
    Ok(match worst {
        None => DcVerdict::Compatible,
        Some((i, j)) => DcVerdict::Witness { v: set.nodes[i].clone(), w: set.nodes[j].clone() },
    })
}
