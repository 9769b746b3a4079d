//! Slices, node slice sets, slice perturbations and the analysis-suitability
//! checker.
//!
//! The slice perturbation at a coordinate is the active-region cross-section
//! intersected with the union of support cross-sections of the nodes lying
//! on the slice's skeleton and with the union over the remaining active
//! nodes. A mesh is analysis-suitable when the three perturbed regions are
//! pairwise disjoint; everything is computed as exact rectangle unions with
//! closed-set semantics.

use crate::error::Result;
use crate::madic::{Axis, Madic, Point3};
use crate::mesh::Mesh;
use crate::rect::{intervals_common, Rect2, RectUnion2D};
use crate::spline::SplineSet;
use std::cmp::Ordering;
use std::collections::HashSet;

/// The nonempty slice perturbations of one axis, keyed by slice coordinate.
#[derive(Clone, Debug)]
pub struct PerturbedRegion {
    pub axis: Axis,
    pub slices: Vec<(Madic, RectUnion2D)>,
}

impl PerturbedRegion {
    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }
}

/// Active nodes whose projection onto the slice lies on a skeleton face.
pub fn node_slice_set(set: &SplineSet, axis: Axis, coord: &Madic) -> Vec<Point3> {
    let m = set.m();
    let [pa, pb] = axis.others();
    let Some(face) = set.skeletons[axis.index()].face_at(coord, m) else {
        return Vec::new();
    };
    set.nodes
        .iter()
        .filter(|v| face.contains(&[v[pa].clone(), v[pb].clone()], m))
        .cloned()
        .collect()
}

/// Convenience entry building the spline data first.
pub fn node_slice_set_of(g: &Mesh, axis: Axis, coord: &Madic) -> Result<Vec<Point3>> {
    let set = SplineSet::build(g)?;
    Ok(node_slice_set(&set, axis, coord))
}

/// The slice perturbation at `coord`, as an exact rectangle union in the
/// slice plane (plane axes in global order). Empty when either node set is
/// empty.
pub fn slice_perturbation(set: &SplineSet, axis: Axis, coord: &Madic) -> RectUnion2D {
    let m = set.m();
    let [pa, pb] = axis.others();
    let Some(face) = set.skeletons[axis.index()].face_at(coord, m) else {
        return RectUnion2D::empty(m);
    };
    let mut on_slice: HashSet<Rect2> = HashSet::new();
    let mut off_slice: HashSet<Rect2> = HashSet::new();
    for (v, f) in set.nodes.iter().zip(&set.functions) {
        let (lo, hi) = f.vectors[axis.index()].support();
        let covers = lo.cmp_in(coord, m) != Ordering::Greater
            && coord.cmp_in(hi, m) != Ordering::Greater;
        if !covers {
            continue; // the support's cross-section at this slice is empty
        }
        let (alo, ahi) = f.vectors[pa.index()].support();
        let (blo, bhi) = f.vectors[pb.index()].support();
        let rect = Rect2::new([alo.clone(), blo.clone()], [ahi.clone(), bhi.clone()]);
        if face.contains(&[v[pa].clone(), v[pb].clone()], m) {
            on_slice.insert(rect);
        } else {
            off_slice.insert(rect);
        }
    }
    if on_slice.is_empty() || off_slice.is_empty() {
        return RectUnion2D::empty(m);
    }
    let section = RectUnion2D::from_rects(m, vec![set.active_region.cross_section(axis)]);
    let on_u = RectUnion2D::from_rects(m, on_slice.into_iter().collect());
    let off_u = RectUnion2D::from_rects(m, off_slice.into_iter().collect());
    section.intersect(&on_u).intersect(&off_u)
}

/// All three perturbed regions: slice perturbations collected over the
/// skeleton face coordinates (all other coordinates yield empty slices).
pub fn perturbed_regions_in(set: &SplineSet) -> [PerturbedRegion; 3] {
    Axis::ALL.map(|axis| {
        let coords: Vec<Madic> = set.skeletons[axis.index()].coords().cloned().collect();
        let slices: Vec<(Madic, RectUnion2D)> = coords
            .into_iter()
            .filter_map(|c| {
                let r = slice_perturbation(set, axis, &c);
                if r.is_empty() {
                    None
                } else {
                    Some((c, r))
                }
            })
            .collect();
        PerturbedRegion { axis, slices }
    })
}

pub fn perturbed_regions(g: &Mesh) -> Result<[PerturbedRegion; 3]> {
    let set = SplineSet::build(g)?;
    Ok(perturbed_regions_in(&set))
}

/// Analysis-suitability verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AsVerdict {
    Suitable,
    /// Two perturbed regions meet along the line `{axes.0 = coords.0,
    /// axes.1 = coords.1}`, sharing the closed `interval` on the remaining
    /// axis. `positive_measure` reports whether the shared interval has
    /// positive length (diagnostic only; any nonempty intersection fails).
    Witness {
        axes: (Axis, Axis),
        coords: (Madic, Madic),
        interval: (Madic, Madic),
        positive_measure: bool,
    },
}

impl AsVerdict {
    pub fn is_suitable(&self) -> bool {
        matches!(self, AsVerdict::Suitable)
    }
}

/// Pairwise disjointness of the perturbed regions, checked along every
/// coordinate line shared by two slices.
pub fn is_analysis_suitable(g: &Mesh) -> Result<AsVerdict> {
    let set = SplineSet::build(g)?;
    Ok(is_analysis_suitable_in(&set))
}

pub fn is_analysis_suitable_in(set: &SplineSet) -> AsVerdict {
    let m = set.m();
    let regions = perturbed_regions_in(set);
    let pairs = [(Axis::X, Axis::Y), (Axis::Y, Axis::Z), (Axis::Z, Axis::X)];
    for (a, b) in pairs {
        let ra = &regions[a.index()];
        let rb = &regions[b.index()];
        // position of b's axis within a's slice plane and vice versa
        let pos_b_in_a = a.others().iter().position(|&x| x == b).unwrap();
        let pos_a_in_b = b.others().iter().position(|&x| x == a).unwrap();
        for (qa, ua) in &ra.slices {
            for (qb, ub) in &rb.slices {
                let ia = ua.slice(pos_b_in_a, qb);
                let ib = ub.slice(pos_a_in_b, qa);
                if let Some((lo, hi)) = intervals_common(&ia, &ib, m) {
                    let positive = lo.cmp_in(&hi, m) == Ordering::Less;
                    return AsVerdict::Witness {
                        axes: (a, b),
                        coords: (qa.clone(), qb.clone()),
                        interval: (lo, hi),
                        positive_measure: positive,
                    };
                }
            }
        }
    }
    AsVerdict::Suitable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Element;
    use crate::refine::{cascade, refine};
    use crate::spline::{is_dual_compatible_in, overlap};

    fn p3() -> [u32; 3] {
        [3, 3, 3]
    }

    fn mi(v: i64) -> Madic {
        Madic::from_int(v)
    }

    #[test]
    fn node_slice_sets_on_uniform_meshes() {
        let g = Mesh::initial([6, 6, 6], p3(), 2).unwrap();
        let set = SplineSet::build(&g).unwrap();
        // every integer plane carries every active node's projection
        let all = node_slice_set(&set, Axis::X, &mi(3));
        assert_eq!(all.len(), set.len());
        // non-face coordinates yield the empty set
        let half = Madic::new(1.into(), 1, 2);
        assert!(node_slice_set(&set, Axis::X, &half).is_empty());
    }

    #[test]
    fn uniform_meshes_have_empty_perturbations_and_are_suitable() {
        let g = Mesh::initial([6, 7, 8], p3(), 2).unwrap();
        let set = SplineSet::build(&g).unwrap();
        let regions = perturbed_regions_in(&set);
        assert!(regions.iter().all(|r| r.is_empty()));
        assert_eq!(is_analysis_suitable_in(&set), AsVerdict::Suitable);
    }

    /// Pointwise oracle for slice perturbation membership, straight from the
    /// set definition: a plane point lies in the perturbation iff it lies in
    /// the active-region cross-section, in some support cross-section of a
    /// slice node, and in some support cross-section of a non-slice node.
    fn perturbation_contains_oracle(
        set: &SplineSet,
        axis: Axis,
        coord: &Madic,
        p: &[Madic; 2],
    ) -> bool {
        let m = set.m();
        let [pa, pb] = axis.others();
        let Some(face) = set.skeletons[axis.index()].face_at(coord, m) else {
            return false;
        };
        let section = set.active_region.cross_section(axis);
        if !section.contains(p, m) {
            return false;
        }
        let covers = |f: &crate::spline::BlendingFunction| {
            let (lo, hi) = f.vectors[axis.index()].support();
            lo.cmp_in(coord, m) != Ordering::Greater && coord.cmp_in(hi, m) != Ordering::Greater
        };
        let in_cross = |f: &crate::spline::BlendingFunction| {
            let (alo, ahi) = f.vectors[pa.index()].support();
            let (blo, bhi) = f.vectors[pb.index()].support();
            alo.cmp_in(&p[0], m) != Ordering::Greater
                && p[0].cmp_in(ahi, m) != Ordering::Greater
                && blo.cmp_in(&p[1], m) != Ordering::Greater
                && p[1].cmp_in(bhi, m) != Ordering::Greater
        };
        let mut hit_on = false;
        let mut hit_off = false;
        for (v, f) in set.nodes.iter().zip(&set.functions) {
            if !covers(f) || !in_cross(f) {
                continue;
            }
            if face.contains(&[v[pa].clone(), v[pb].clone()], m) {
                hit_on = true;
            } else {
                hit_off = true;
            }
            if hit_on && hit_off {
                return true;
            }
        }
        false
    }

    fn sample_plane_coords(set: &SplineSet, axis: Axis, which: usize, m: u32) -> Vec<Madic> {
        let [pa, pb] = axis.others();
        let plane_axis = [pa, pb][which];
        let mut breaks: Vec<Madic> = Vec::new();
        for f in &set.functions {
            let (lo, hi) = f.vectors[plane_axis.index()].support();
            breaks.push(lo.clone());
            breaks.push(hi.clone());
        }
        breaks.sort_unstable_by(|a, b| a.cmp_in(b, m));
        breaks.dedup();
        let mut out = Vec::new();
        for w in breaks.windows(2) {
            out.push(w[0].clone());
            let gap = w[1].sub(&w[0], m);
            out.push(w[0].add(&gap.div_m(m), m));
        }
        if let Some(last) = breaks.last() {
            out.push(last.clone());
        }
        out
    }

    fn assert_perturbation_matches_oracle(set: &SplineSet, axis: Axis, coord: &Madic) {
        let m = set.m();
        let r = slice_perturbation(set, axis, coord);
        for px in sample_plane_coords(set, axis, 0, m) {
            for py in sample_plane_coords(set, axis, 1, m) {
                let p = [px.clone(), py.clone()];
                assert_eq!(
                    r.contains(&p, m),
                    perturbation_contains_oracle(set, axis, coord, &p),
                    "perturbation mismatch at {:?} on slice {}={:?}",
                    p,
                    axis.name(),
                    coord
                );
            }
        }
    }

    #[test]
    fn single_admissible_subdivision_produces_a_hanging_face_perturbation() {
        // Subdividing one central cube of a 7^3 grid is admissible; the new
        // x-faces at 2+1/2 produce a nonempty x-perturbation, nothing else.
        let m = 2;
        let g0 = Mesh::initial([7, 7, 7], p3(), m).unwrap();
        let g = refine(&g0, &[Element::unit_cube(2, 2, 2)]).unwrap().output;
        let set = SplineSet::build(&g).unwrap();
        let half5 = Madic::new(5.into(), 1, m); // 2.5
        let rx = slice_perturbation(&set, Axis::X, &half5);
        assert!(!rx.is_empty());
        // contained in the active-region cross-section
        let section = RectUnion2D::from_rects(m, vec![set.active_region.cross_section(Axis::X)]);
        assert!(rx.is_subset_of(&section));
        // the y- and z-perturbed regions are empty: those skeletons kept
        // full integer planes only
        let regions = perturbed_regions_in(&set);
        assert!(regions[Axis::Y.index()].is_empty());
        assert!(regions[Axis::Z.index()].is_empty());
        assert_eq!(is_analysis_suitable_in(&set), AsVerdict::Suitable);

        assert_perturbation_matches_oracle(&set, Axis::X, &half5);
        assert_perturbation_matches_oracle(&set, Axis::X, &mi(2));
        assert_perturbation_matches_oracle(&set, Axis::Y, &mi(3));
    }

    #[test]
    fn cascade_is_not_suitable_and_agrees_with_dual_compatibility() {
        let g = cascade([8, 8, 8], p3(), 2, [3, 3, 3], 4).unwrap();
        let set = SplineSet::build(&g).unwrap();
        let verdict = is_analysis_suitable_in(&set);
        match &verdict {
            AsVerdict::Witness { axes, coords, interval, .. } => {
                let (lo, hi) = interval;
                assert!(lo.cmp_in(hi, 2) != Ordering::Greater);
                assert_ne!(axes.0, axes.1);
                let _ = coords;
            }
            AsVerdict::Suitable => panic!("cascade must not be analysis-suitable"),
        }
        assert!(!is_dual_compatible_in(&set).unwrap().is_compatible());

        // perturbations still match the pointwise definition on this mesh
        let half7 = Madic::new(7.into(), 1, 2); // 3.5
        assert_perturbation_matches_oracle(&set, Axis::X, &half7);
        assert_perturbation_matches_oracle(&set, Axis::Y, &half7);
    }

    #[test]
    fn corner_cascade_agrees_with_dual_compatibility_vacuously() {
        let g = cascade([5, 5, 5], p3(), 2, [0, 0, 0], 4).unwrap();
        let set = SplineSet::build(&g).unwrap();
        assert_eq!(is_analysis_suitable_in(&set), AsVerdict::Suitable);
        assert!(is_dual_compatible_in(&set).unwrap().is_compatible());
    }

    #[test]
    fn refine_chains_stay_suitable() {
        let m = 3;
        let g0 = Mesh::initial([7, 7, 7], p3(), m).unwrap();
        let r1 = refine(&g0, &[Element::unit_cube(3, 3, 3)]).unwrap();
        let lvl1 = r1.output.elements().iter().find(|e| e.level == 1).unwrap().clone();
        let r2 = refine(&r1.output, &[lvl1]).unwrap();
        assert!(is_analysis_suitable(&r2.output).unwrap().is_suitable());
    }

    #[test]
    fn slice_nodes_against_remote_nodes_do_not_overlap_where_supports_meet() {
        // On any mesh: if v1 lies on the slice skeleton at q, v2 does not,
        // and their supports both cross the slice with a common plane point,
        // then their index vectors along the slice axis cannot overlap.
        let meshes = [
            cascade([8, 8, 8], p3(), 2, [3, 3, 3], 4).unwrap(),
            {
                let g0 = Mesh::initial([7, 7, 7], p3(), 2).unwrap();
                refine(&g0, &[Element::unit_cube(2, 2, 2)]).unwrap().output
            },
        ];
        let mut checked = 0usize;
        for g in &meshes {
            let m = g.m();
            let set = SplineSet::build(g).unwrap();
            for axis in Axis::ALL {
                let coords: Vec<Madic> =
                    set.skeletons[axis.index()].coords().cloned().collect();
                for coord in coords.iter().filter(|c| !c.is_integer()) {
                    let on: HashSet<usize> = node_slice_set(&set, axis, coord)
                        .iter()
                        .map(|v| set.nodes.binary_search_by(|n| n.cmp_in(v, m)).unwrap())
                        .collect();
                    for i in 0..set.len() {
                        if !on.contains(&i) {
                            continue;
                        }
                        for j in 0..set.len() {
                            if on.contains(&j) {
                                continue;
                            }
                            let fi = &set.functions[i];
                            let fj = &set.functions[j];
                            let covers = |f: &crate::spline::BlendingFunction| {
                                let (lo, hi) = f.vectors[axis.index()].support();
                                lo.cmp_in(coord, m) != Ordering::Greater
                                    && coord.cmp_in(hi, m) != Ordering::Greater
                            };
                            if !covers(fi) || !covers(fj) {
                                continue;
                            }
                            // plane cross-sections must meet (closed)
                            let [pa, pb] = axis.others();
                            let meet = [pa, pb].iter().all(|&ax| {
                                let (alo, ahi) = fi.vectors[ax.index()].support();
                                let (blo, bhi) = fj.vectors[ax.index()].support();
                                let lo = if alo.cmp_in(blo, m) == Ordering::Greater { alo } else { blo };
                                let hi = if ahi.cmp_in(bhi, m) == Ordering::Less { ahi } else { bhi };
                                lo.cmp_in(hi, m) != Ordering::Greater
                            });
                            if !meet {
                                continue;
                            }
                            assert!(
                                !overlap(&fi.vectors[axis.index()], &fj.vectors[axis.index()], m)
                                    .unwrap(),
                                "slice/non-slice pair with meeting supports overlapped"
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 0, "property was tested vacuously");
    }
}
