//! Skeletons, the active region, nodes, global index sets and local index
//! vectors.
//!
//! The x-orthogonal skeleton is the union of all closed x-orthogonal element
//! faces, stored per face coordinate as a canonical rectangle union in the
//! (y,z) plane. Global index sets are line sections of a skeleton; the local
//! index vector of an active node takes the `p+2` consecutive entries of the
//! global index set centred at the node coordinate.

use crate::error::{Error, Result};
use crate::madic::{Axis, Madic, Point3};
use crate::mesh::Mesh;
use crate::rect::{Rect2, RectUnion2D};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

/// All closed element faces orthogonal to one axis, merged per coordinate.
#[derive(Clone, Debug)]
pub struct Skeleton {
    axis: Axis,
    faces: Vec<(Madic, RectUnion2D)>,
}

impl Skeleton {
    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Face coordinates, ascending.
    pub fn coords(&self) -> impl Iterator<Item = &Madic> {
        self.faces.iter().map(|(c, _)| c)
    }

    pub fn faces(&self) -> &[(Madic, RectUnion2D)] {
        &self.faces
    }

    pub fn face_at(&self, coord: &Madic, m: u32) -> Option<&RectUnion2D> {
        self.faces
            .binary_search_by(|(c, _)| c.cmp_in(coord, m))
            .ok()
            .map(|i| &self.faces[i].1)
    }

    /// Is the point `(coord, p0, p1)` (in axis-plane order) on the skeleton?
    pub fn contains(&self, coord: &Madic, p: &[Madic; 2], m: u32) -> bool {
        self.face_at(coord, m).is_some_and(|u| u.contains(p, m))
    }
}

/// The three skeletons of a mesh.
pub fn skeletons(g: &Mesh) -> [Skeleton; 3] {
    let m = g.m();
    Axis::ALL.map(|axis| {
        let [pa, pb] = axis.others();
        let mut per_coord: HashMap<Madic, Vec<Rect2>> = HashMap::new();
        for e in g.elements() {
            let rect = Rect2::new(
                [e.lo[pa].clone(), e.lo[pb].clone()],
                [e.hi[pa].clone(), e.hi[pb].clone()],
            );
            per_coord.entry(e.lo[axis].clone()).or_default().push(rect.clone());
            per_coord.entry(e.hi[axis].clone()).or_default().push(rect);
        }
        let mut faces: Vec<(Madic, RectUnion2D)> = per_coord
            .into_iter()
            .map(|(c, rects)| (c, RectUnion2D::from_rects(m, rects)))
            .collect();
        faces.sort_unstable_by(|a, b| a.0.cmp_in(&b.0, m));
        Skeleton { axis, faces }
    })
}

/// The sub-box of the index domain whose contained nodes carry blending
/// functions: the domain shrunk by `⌈p/2⌉` per side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveRegion {
    pub lo: [u32; 3],
    pub hi: [u32; 3],
}

impl ActiveRegion {
    pub fn contains(&self, p: &Point3, m: u32) -> bool {
        Axis::ALL.iter().all(|&a| {
            let i = a.index();
            let lo = Madic::from_int(self.lo[i] as i64);
            let hi = Madic::from_int(self.hi[i] as i64);
            lo.cmp_in(&p[a], m) != Ordering::Greater && p[a].cmp_in(&hi, m) != Ordering::Greater
        })
    }

    /// Cross-section in the plane orthogonal to `axis` (plane axes in
    /// global order); degenerate when the region is flat.
    pub fn cross_section(&self, axis: Axis) -> Rect2 {
        let [pa, pb] = axis.others();
        Rect2::new(
            [
                Madic::from_int(self.lo[pa.index()] as i64),
                Madic::from_int(self.lo[pb.index()] as i64),
            ],
            [
                Madic::from_int(self.hi[pa.index()] as i64),
                Madic::from_int(self.hi[pb.index()] as i64),
            ],
        )
    }
}

pub fn active_region(g: &Mesh) -> Result<ActiveRegion> {
    let mut lo = [0u32; 3];
    let mut hi = [0u32; 3];
    for i in 0..3 {
        let half = (g.degree()[i] + 1) / 2;
        if g.dims()[i] < 2 * half {
            return Err(Error::EmptyActiveRegion { dim: g.dims()[i], degree: g.degree()[i] });
        }
        lo[i] = half;
        hi[i] = g.dims()[i] - half;
    }
    Ok(ActiveRegion { lo, hi })
}

/// All element vertices, deduplicated and sorted.
pub fn nodes(g: &Mesh) -> Vec<Point3> {
    let mut set: HashSet<Point3> = HashSet::new();
    for e in g.elements() {
        for v in e.vertices() {
            set.insert(v);
        }
    }
    let mut out: Vec<Point3> = set.into_iter().collect();
    out.sort_unstable_by(|a, b| a.cmp_in(b, g.m()));
    out
}

/// The nodes inside the closed active region.
pub fn active_nodes(g: &Mesh) -> Result<Vec<Point3>> {
    let ar = active_region(g)?;
    let m = g.m();
    Ok(nodes(g).into_iter().filter(|v| ar.contains(v, m)).collect())
}

/// The global index set along one axis line: all skeleton coordinates whose
/// face covers the line point. For axis x the line is given by (y, z).
pub fn global_index_set(skel: &Skeleton, line: (&Madic, &Madic), m: u32) -> Vec<Madic> {
    let p = [line.0.clone(), line.1.clone()];
    skel.faces
        .iter()
        .filter(|(_, u)| u.contains(&p, m))
        .map(|(c, _)| c.clone())
        .collect()
}

/// Convenience entry that builds the skeleton first.
pub fn global_index_set_of(g: &Mesh, axis: Axis, line: (&Madic, &Madic)) -> Vec<Madic> {
    let skels = skeletons(g);
    global_index_set(&skels[axis.index()], line, g.m())
}

/// The `p+2` consecutive global index entries centred at a node coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalIndexVector {
    pub axis: Axis,
    pub entries: Vec<Madic>,
}

impl LocalIndexVector {
    pub fn degree(&self) -> usize {
        self.entries.len() - 2
    }

    /// The anchor is the middle entry.
    pub fn anchor(&self) -> &Madic {
        &self.entries[(self.entries.len() - 1) / 2]
    }

    pub fn support(&self) -> (&Madic, &Madic) {
        (self.entries.first().unwrap(), self.entries.last().unwrap())
    }

    pub fn contains_knot(&self, x: &Madic, m: u32) -> bool {
        self.entries.binary_search_by(|e| e.cmp_in(x, m)).is_ok()
    }

    pub fn knots_f64(&self, m: u32) -> Vec<f64> {
        self.entries.iter().map(|e| e.to_f64(m)).collect()
    }
}

/// Extract the window centred at `coord` from a global index set.
pub(crate) fn index_window(
    xs: &[Madic],
    coord: &Madic,
    degree: u32,
    axis: Axis,
    node: &Point3,
    m: u32,
) -> Result<LocalIndexVector> {
    let pos = xs
        .binary_search_by(|e| e.cmp_in(coord, m))
        .map_err(|_| Error::NotActive(Box::new(node.clone())))?;
    let half = ((degree + 1) / 2) as usize;
    if pos < half || pos + half >= xs.len() {
        return Err(Error::TruncatedIndexVector { node: Box::new(node.clone()), axis: axis.name() });
    }
    Ok(LocalIndexVector {
        axis,
        entries: xs[pos - half..=pos + half].to_vec(),
    })
}

/// The three local index vectors of an active node.
pub fn local_index_vectors(g: &Mesh, v: &Point3) -> Result<[LocalIndexVector; 3]> {
    let ar = active_region(g)?;
    if !ar.contains(v, g.m()) {
        return Err(Error::NotActive(Box::new(v.clone())));
    }
    let skels = skeletons(g);
    local_index_vectors_in(g, &skels, v)
}

pub(crate) fn local_index_vectors_in(
    g: &Mesh,
    skels: &[Skeleton; 3],
    v: &Point3,
) -> Result<[LocalIndexVector; 3]> {
    let m = g.m();
    let mut out: [Option<LocalIndexVector>; 3] = [None, None, None];
    for axis in Axis::ALL {
        let [pa, pb] = axis.others();
        let xs = global_index_set(&skels[axis.index()], (&v[pa], &v[pb]), m);
        out[axis.index()] = Some(index_window(
            &xs,
            &v[axis],
            g.degree()[axis.index()],
            axis,
            v,
            m,
        )?);
    }
    Ok(out.map(Option::unwrap))
}
