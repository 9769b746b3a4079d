//! Exact unions of closed axis-aligned rectangles in a coordinate plane.
//!
//! The carrier of skeleton faces and slice perturbations. Rectangles may be
//! degenerate (segments or points): unions of closed boxes and their
//! intersections produce them, and the verdicts downstream depend on them.
//! Canonical form is a slab decomposition — maximal runs of x-columns with
//! identical merged y-interval lists, plus degenerate residuals on column
//! boundaries — which is a pure function of the point set, so `==` decides
//! point-set equality.

use crate::madic::Madic;
use std::cmp::Ordering;

/// A closed rectangle `[lo0,hi0] × [lo1,hi1]`; degenerate sides allowed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Rect2 {
    pub lo: [Madic; 2],
    pub hi: [Madic; 2],
}

impl Rect2 {
    pub fn new(lo: [Madic; 2], hi: [Madic; 2]) -> Self {
        Rect2 { lo, hi }
    }

    fn is_valid(&self, m: u32) -> bool {
        (0..2).all(|a| self.lo[a].cmp_in(&self.hi[a], m) != Ordering::Greater)
    }

    pub fn contains(&self, p: &[Madic; 2], m: u32) -> bool {
        (0..2).all(|a| {
            self.lo[a].cmp_in(&p[a], m) != Ordering::Greater
                && p[a].cmp_in(&self.hi[a], m) != Ordering::Greater
        })
    }

    fn intersect(&self, other: &Rect2, m: u32) -> Option<Rect2> {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for a in 0..2 {
            if other.lo[a].cmp_in(&lo[a], m) == Ordering::Greater {
                lo[a] = other.lo[a].clone();
            }
            if other.hi[a].cmp_in(&hi[a], m) == Ordering::Less {
                hi[a] = other.hi[a].clone();
            }
            if lo[a].cmp_in(&hi[a], m) == Ordering::Greater {
                return None;
            }
        }
        Some(Rect2 { lo, hi })
    }
}

type Interval = (Madic, Madic);

fn merge_intervals(mut v: Vec<Interval>, m: u32) -> Vec<Interval> {
    v.sort_unstable_by(|a, b| a.0.cmp_in(&b.0, m).then_with(|| a.1.cmp_in(&b.1, m)));
    let mut out: Vec<Interval> = Vec::new();
    for (lo, hi) in v {
        if let Some(last) = out.last_mut() {
            if lo.cmp_in(&last.1, m) != Ordering::Greater {
                if hi.cmp_in(&last.1, m) == Ordering::Greater {
                    last.1 = hi;
                }
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

/// Closure of `∪a ∖ ∪b`; both inputs sorted and disjoint.
fn subtract_intervals(a: &[Interval], b: &[Interval], m: u32) -> Vec<Interval> {
    let mut out = Vec::new();
    for (alo, ahi) in a {
        let mut cur = alo.clone();
        let mut alive = true;
        for (blo, bhi) in b {
            if bhi.cmp_in(&cur, m) == Ordering::Less {
                continue;
            }
            if blo.cmp_in(ahi, m) == Ordering::Greater {
                break;
            }
            if cur.cmp_in(blo, m) == Ordering::Less {
                out.push((cur.clone(), blo.clone()));
            }
            if bhi.cmp_in(ahi, m) == Ordering::Less {
                cur = bhi.clone();
            } else {
                alive = false;
                break;
            }
        }
        if alive && cur.cmp_in(ahi, m) != Ordering::Greater {
            out.push((cur, ahi.clone()));
        }
    }
    out
}

fn intervals_equal(a: &[Interval], b: &[Interval]) -> bool {
    a == b
}

/// A finite union of closed rectangles, kept canonical.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RectUnion2D {
    m: u32,
    rects: Vec<Rect2>,
}

impl RectUnion2D {
    pub fn empty(m: u32) -> Self {
        RectUnion2D { m, rects: Vec::new() }
    }

    pub fn from_rects(m: u32, rects: Vec<Rect2>) -> Self {
        RectUnion2D { m, rects: canonicalize(m, rects) }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rects(&self) -> &[Rect2] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn contains(&self, p: &[Madic; 2], m: u32) -> bool {
        self.rects.iter().any(|r| r.contains(p, m))
    }

    pub fn union(&self, other: &RectUnion2D) -> RectUnion2D {
        debug_assert_eq!(self.m, other.m);
        let mut rects = self.rects.clone();
        rects.extend(other.rects.iter().cloned());
        RectUnion2D::from_rects(self.m, rects)
    }

    pub fn intersect(&self, other: &RectUnion2D) -> RectUnion2D {
        debug_assert_eq!(self.m, other.m);
        let m = self.m;
        let mut rects = Vec::new();
        for a in &self.rects {
            for b in &other.rects {
                if let Some(r) = a.intersect(b, m) {
                    rects.push(r);
                }
            }
        }
        RectUnion2D::from_rects(m, rects)
    }

    pub fn is_subset_of(&self, other: &RectUnion2D) -> bool {
        &self.intersect(other) == self
    }

    /// The closed intervals of the other plane axis cut out by the line
    /// `plane_axis = coord`; sorted and merged.
    pub fn slice(&self, plane_axis: usize, coord: &Madic) -> Vec<(Madic, Madic)> {
        let m = self.m;
        let other = 1 - plane_axis;
        let hits: Vec<Interval> = self
            .rects
            .iter()
            .filter(|r| {
                r.lo[plane_axis].cmp_in(coord, m) != Ordering::Greater
                    && coord.cmp_in(&r.hi[plane_axis], m) != Ordering::Greater
            })
            .map(|r| (r.lo[other].clone(), r.hi[other].clone()))
            .collect();
        merge_intervals(hits, m)
    }
}

/// First nonempty intersection of two closed interval lists, if any.
pub fn intervals_common(a: &[(Madic, Madic)], b: &[(Madic, Madic)], m: u32) -> Option<(Madic, Madic)> {
    for (alo, ahi) in a {
        for (blo, bhi) in b {
            let lo = if alo.cmp_in(blo, m) == Ordering::Greater { alo } else { blo };
            let hi = if ahi.cmp_in(bhi, m) == Ordering::Less { ahi } else { bhi };
            if lo.cmp_in(hi, m) != Ordering::Greater {
                return Some((lo.clone(), hi.clone()));
            }
        }
    }
    None
}

fn canonicalize(m: u32, rects: Vec<Rect2>) -> Vec<Rect2> {
    let rects: Vec<Rect2> = rects.into_iter().filter(|r| r.is_valid(m)).collect();
    if rects.is_empty() {
        return Vec::new();
    }
    let mut xbreaks: Vec<Madic> = Vec::with_capacity(rects.len() * 2);
    for r in &rects {
        xbreaks.push(r.lo[0].clone());
        xbreaks.push(r.hi[0].clone());
    }
    xbreaks.sort_unstable_by(|a, b| a.cmp_in(b, m));
    xbreaks.dedup();
    let nx = xbreaks.len();

    // Merged y-interval list of every open column (xbreaks[i], xbreaks[i+1]).
    let open_list = |i: usize| -> Vec<Interval> {
        let hits: Vec<Interval> = rects
            .iter()
            .filter(|r| {
                r.lo[0].cmp_in(&xbreaks[i], m) != Ordering::Greater
                    && xbreaks[i + 1].cmp_in(&r.hi[0], m) != Ordering::Greater
            })
            .map(|r| (r.lo[1].clone(), r.hi[1].clone()))
            .collect();
        merge_intervals(hits, m)
    };
    // Merged y-interval list of the point column at xbreaks[j].
    let point_list = |j: usize| -> Vec<Interval> {
        let hits: Vec<Interval> = rects
            .iter()
            .filter(|r| {
                r.lo[0].cmp_in(&xbreaks[j], m) != Ordering::Greater
                    && xbreaks[j].cmp_in(&r.hi[0], m) != Ordering::Greater
            })
            .map(|r| (r.lo[1].clone(), r.hi[1].clone()))
            .collect();
        merge_intervals(hits, m)
    };

    let open_lists: Vec<Vec<Interval>> = (0..nx.saturating_sub(1)).map(open_list).collect();

    let mut out: Vec<Rect2> = Vec::new();

    // Bands: maximal runs of open columns with identical nonempty lists.
    // Point columns between them are covered automatically: the union of
    // closed rectangles is closed, so the closure of a covered open strip
    // stays inside the union.
    let mut i = 0;
    while i < open_lists.len() {
        if open_lists[i].is_empty() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < open_lists.len() && intervals_equal(&open_lists[j + 1], &open_lists[i]) {
            j += 1;
        }
        for (ylo, yhi) in &open_lists[i] {
            out.push(Rect2 {
                lo: [xbreaks[i].clone(), ylo.clone()],
                hi: [xbreaks[j + 1].clone(), yhi.clone()],
            });
        }
        i = j + 1;
    }

    // Residuals on point columns: coverage not implied by the neighbouring
    // open columns, emitted as degenerate rectangles.
    for j in 0..nx {
        let mut neighbours: Vec<Interval> = Vec::new();
        if j > 0 {
            neighbours.extend(open_lists[j - 1].iter().cloned());
        }
        if j < open_lists.len() {
            neighbours.extend(open_lists[j].iter().cloned());
        }
        let neighbours = merge_intervals(neighbours, m);
        let residual = subtract_intervals(&point_list(j), &neighbours, m);
        for (ylo, yhi) in residual {
            out.push(Rect2 {
                lo: [xbreaks[j].clone(), ylo],
                hi: [xbreaks[j].clone(), yhi],
            });
        }
    }

    out.sort_unstable_by(|a, b| {
        a.lo[0]
            .cmp_in(&b.lo[0], m)
            .then_with(|| a.lo[1].cmp_in(&b.lo[1], m))
            .then_with(|| a.hi[0].cmp_in(&b.hi[0], m))
            .then_with(|| a.hi[1].cmp_in(&b.hi[1], m))
    });
    out
}
