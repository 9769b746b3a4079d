//! Exact geometric core: elements, meshes, levels, distances, patch
//! environments and elementary graded subdivisions.
//!
//! A mesh partitions the index domain `[0,X]×[0,Y]×[0,Z]` into closed boxes.
//! Every box is a cell of the m-ary subdivision tree of one unit cube: the
//! subdivision direction cycles x → y → z with the level, and each
//! subdivision replaces an element by `m` equal slabs one level finer.

use crate::error::{Error, Result};
use crate::madic::{m_pow, Axis, HalfMadic, Madic, Point3};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

/// Side lengths of a level-`k` element.
///
/// A unit cube shrinks along x first, then y, then z, so within one cycle the
/// exponents are `(j,j,j)`, `(j+1,j,j)`, `(j+1,j+1,j)` for `k = 3j, 3j+1, 3j+2`.
pub fn size_of_level(level: u32, m: u32) -> [Madic; 3] {
    let exps = size_exponents(level);
    exps.map(|e| Madic::new(BigInt::one(), e, m))
}

pub(crate) fn size_exponents(level: u32) -> [u32; 3] {
    let j = level / 3;
    match level % 3 {
        0 => [j, j, j],
        1 => [j + 1, j, j],
        _ => [j + 1, j + 1, j],
    }
}

/// Patch radius `D(k)`: the per-axis half-extent of the open environment of a
/// level-`k` element. Components contain halves, hence the `HalfMadic`.
pub fn patch_radius(level: u32, degree: [u32; 3], m: u32) -> [HalfMadic; 3] {
    patch_radius_doubled(level, degree, m).map(HalfMadic::from_twice)
}

/// `2·D(k)`, which is exactly m-adic: `(2p_i + 3) / m^{…}` per axis.
pub(crate) fn patch_radius_doubled(level: u32, degree: [u32; 3], m: u32) -> [Madic; 3] {
    let j = level / 3;
    let bumps: [u32; 3] = match level % 3 {
        0 => [0, 0, 0],
        1 => [1, 0, 0],
        _ => [1, 1, 0],
    };
    let mut out: [Madic; 3] = [Madic::zero(), Madic::zero(), Madic::zero()];
    for a in 0..3 {
        out[a] = Madic::new(BigInt::from(2 * degree[a] + 3), j + bumps[a], m);
    }
    out
}

/// A closed axis-aligned box of the partition, with its subdivision level.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Element {
    pub lo: Point3,
    pub hi: Point3,
    pub level: u32,
}

impl Element {
    pub fn unit_cube(x: u32, y: u32, z: u32) -> Self {
        Element {
            lo: Point3::from_ints(x as i64, y as i64, z as i64),
            hi: Point3::from_ints(x as i64 + 1, y as i64 + 1, z as i64 + 1),
            level: 0,
        }
    }

    pub fn sides(&self, m: u32) -> [Madic; 3] {
        Axis::ALL.map(|a| self.hi[a].sub(&self.lo[a], m))
    }

    /// Doubled midpoint `lo + hi`, exact.
    pub fn midpoint_doubled(&self, m: u32) -> [Madic; 3] {
        Axis::ALL.map(|a| self.lo[a].add(&self.hi[a], m))
    }

    pub fn contains_point(&self, p: &Point3, m: u32) -> bool {
        Axis::ALL.iter().all(|&a| {
            self.lo[a].cmp_in(&p[a], m) != Ordering::Greater
                && p[a].cmp_in(&self.hi[a], m) != Ordering::Greater
        })
    }

    /// The eight vertices.
    pub fn vertices(&self) -> Vec<Point3> {
        let mut out = Vec::with_capacity(8);
        for xi in [&self.lo, &self.hi] {
            for yi in [&self.lo, &self.hi] {
                for zi in [&self.lo, &self.hi] {
                    out.push(Point3([
                        xi[Axis::X].clone(),
                        yi[Axis::Y].clone(),
                        zi[Axis::Z].clone(),
                    ]));
                }
            }
        }
        out
    }

    /// The `m` children of the level-dependent subdivision: equal slabs
    /// orthogonal to x, y or z according to `level mod 3`.
    pub fn children(&self, m: u32) -> Vec<Element> {
        let axis = Axis::from_level(self.level);
        let width = self.hi[axis].sub(&self.lo[axis], m);
        let step = width.div_m(m);
        let mut out = Vec::with_capacity(m as usize);
        for j in 0..m {
            let lo_a = self.lo[axis].add(&step.scale(j, m), m);
            let hi_a = self.lo[axis].add(&step.scale(j + 1, m), m);
            let mut lo = self.lo.clone();
            let mut hi = self.hi.clone();
            lo.0[axis.index()] = lo_a;
            hi.0[axis.index()] = hi_a;
            out.push(Element { lo, hi, level: self.level + 1 });
        }
        out
    }

    /// The unique level-`(level−1)` lattice cell containing this element.
    pub fn parent(&self, m: u32) -> Option<Element> {
        if self.level == 0 {
            return None;
        }
        let plevel = self.level - 1;
        let exps = size_exponents(plevel);
        let mut lo = [Madic::zero(), Madic::zero(), Madic::zero()];
        let mut hi = [Madic::zero(), Madic::zero(), Madic::zero()];
        for a in Axis::ALL {
            let t = exps[a.index()];
            let idx = lattice_index(&self.lo[a], t, m);
            lo[a.index()] = Madic::new(idx.clone(), t, m);
            hi[a.index()] = Madic::new(idx + 1, t, m);
        }
        Some(Element { lo: Point3(lo), hi: Point3(hi), level: plevel })
    }

    /// Index of the containing unit cube.
    pub fn cell(&self, m: u32) -> [u32; 3] {
        Axis::ALL.map(|a| self.lo[a].floor(m).to_u32().unwrap_or(0))
    }

    pub(crate) fn cmp_key(&self, other: &Element, m: u32) -> Ordering {
        self.lo
            .cmp_in(&other.lo, m)
            .then_with(|| self.level.cmp(&other.level))
            .then_with(|| self.hi.cmp_in(&other.hi, m))
    }
}

/// `floor(coord · m^t)`.
fn lattice_index(coord: &Madic, t: u32, m: u32) -> BigInt {
    let scaled = coord.numer() * m_pow(m, t);
    scaled.div_floor(&m_pow(m, coord.exp()))
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:?},{:?}]x[{:?},{:?}]x[{:?},{:?}]@{}",
            self.lo[Axis::X],
            self.hi[Axis::X],
            self.lo[Axis::Y],
            self.hi[Axis::Y],
            self.lo[Axis::Z],
            self.hi[Axis::Z],
            self.level
        )
    }
}

/// Componentwise distance between element midpoints, exact.
pub fn dist_elements(a: &Element, b: &Element, m: u32) -> [HalfMadic; 3] {
    let ma = a.midpoint_doubled(m);
    let mb = b.midpoint_doubled(m);
    [0, 1, 2].map(|i| HalfMadic::from_twice(ma[i].sub(&mb[i], m).abs()))
}

/// Componentwise distance between an element midpoint and a point, exact.
pub fn dist_to_point(a: &Element, p: &Point3, m: u32) -> [HalfMadic; 3] {
    let ma = a.midpoint_doubled(m);
    Axis::ALL.map(|ax| HalfMadic::from_twice(ma[ax.index()].sub(&p[ax].scale(2, m), m).abs()))
}

/// An immutable partition of the index domain plus its parameters.
///
/// Elements are kept sorted lexicographically on `(lo, level)` and bucketed
/// per unit cube for patch queries. Subdivision produces a new mesh.
#[derive(Clone)]
pub struct Mesh {
    m: u32,
    degree: [u32; 3],
    dims: [u32; 3],
    elements: Vec<Element>,
    buckets: HashMap<[u32; 3], Vec<u32>>,
}

impl fmt::Debug for Mesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Mesh {{ m: {}, p: {:?}, dims: {:?}, elements: {} }}",
            self.m,
            self.degree,
            self.dims,
            self.elements.len()
        )
    }
}

impl PartialEq for Mesh {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
            && self.degree == other.degree
            && self.dims == other.dims
            && self.elements == other.elements
    }
}

impl Eq for Mesh {}

impl Mesh {
    /// The initial tensor-product mesh of unit cubes.
    pub fn initial(dims: [u32; 3], degree: [u32; 3], m: u32) -> Result<Mesh> {
        if m < 2 {
            return Err(Error::InvalidGrading(m));
        }
        for p in degree {
            if p < 3 || p % 2 == 0 {
                return Err(Error::InvalidDegree(p));
            }
        }
        for d in dims {
            if d == 0 {
                return Err(Error::InvalidDims(d));
            }
        }
        let mut elements = Vec::with_capacity((dims[0] * dims[1] * dims[2]) as usize);
        for x in 0..dims[0] {
            for y in 0..dims[1] {
                for z in 0..dims[2] {
                    elements.push(Element::unit_cube(x, y, z));
                }
            }
        }
        Ok(Mesh::from_parts(m, degree, dims, elements))
    }

    /// Assemble a mesh from raw parts: sorts canonically and rebuilds the
    /// cube buckets. Callers are responsible for structural validity; use
    /// [`Mesh::validate`] for untrusted input.
    pub(crate) fn from_parts(m: u32, degree: [u32; 3], dims: [u32; 3], mut elements: Vec<Element>) -> Mesh {
        elements.sort_unstable_by(|a, b| a.cmp_key(b, m));
        let mut buckets: HashMap<[u32; 3], Vec<u32>> = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            buckets.entry(e.cell(m)).or_default().push(i as u32);
        }
        Mesh { m, degree, dims, elements, buckets }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn degree(&self) -> [u32; 3] {
        self.degree
    }

    pub fn dims(&self) -> [u32; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn max_level(&self) -> u32 {
        self.elements.iter().map(|e| e.level).max().unwrap_or(0)
    }

    /// Exact membership lookup.
    pub fn position(&self, e: &Element) -> Option<usize> {
        let bucket = self.buckets.get(&e.cell(self.m))?;
        bucket.iter().map(|&i| i as usize).find(|&i| &self.elements[i] == e)
    }

    /// All elements whose closed box contains `p`, sorted; the first entry
    /// has the lexicographically smallest `lo`.
    pub fn elements_at_point(&self, p: &Point3) -> Vec<usize> {
        let m = self.m;
        let mut cubes: Vec<[i64; 3]> = vec![[0, 0, 0]];
        let mut base = [0i64; 3];
        for a in Axis::ALL {
            base[a.index()] = p[a].floor(m).to_i64().unwrap_or(i64::MIN);
        }
        cubes[0] = base;
        for a in 0..3 {
            if p[Axis::ALL[a]].is_integer() {
                // A boundary coordinate also touches the previous cube.
                let mut extra = Vec::new();
                for c in &cubes {
                    let mut c2 = *c;
                    c2[a] -= 1;
                    extra.push(c2);
                }
                cubes.extend(extra);
            }
        }
        let mut out = Vec::new();
        for c in cubes {
            if c.iter().any(|&v| v < 0)
                || c[0] >= self.dims[0] as i64
                || c[1] >= self.dims[1] as i64
                || c[2] >= self.dims[2] as i64
            {
                continue;
            }
            let key = [c[0] as u32, c[1] as u32, c[2] as u32];
            if let Some(bucket) = self.buckets.get(&key) {
                for &i in bucket {
                    if self.elements[i as usize].contains_point(p, m) {
                        out.push(i as usize);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Elements overlapping the slab `lo ≤ axis ≤ hi` with positive extent.
    pub fn elements_overlapping_slab(&self, axis: Axis, lo: i64, hi: i64) -> Vec<usize> {
        let m = self.m;
        let lo = Madic::from_int(lo);
        let hi = Madic::from_int(hi);
        (0..self.elements.len())
            .filter(|&i| {
                let e = &self.elements[i];
                e.lo[axis].cmp_in(&hi, m) == Ordering::Less && e.hi[axis].cmp_in(&lo, m) == Ordering::Greater
            })
            .collect()
    }

    /// The patch of `k`: all mesh elements meeting the open environment
    /// around `k`'s midpoint with radius `D(level(k))`. `k` need not be a
    /// member of the mesh. Returns sorted element indices.
    pub fn patch(&self, k: &Element) -> Vec<usize> {
        let m = self.m;
        let r2 = patch_radius_doubled(k.level, self.degree, m);
        let mid2 = k.midpoint_doubled(m);
        let mut lo2 = [Madic::zero(), Madic::zero(), Madic::zero()];
        let mut hi2 = [Madic::zero(), Madic::zero(), Madic::zero()];
        for a in 0..3 {
            lo2[a] = mid2[a].sub(&r2[a], m);
            hi2[a] = mid2[a].add(&r2[a], m);
        }

        // Cube index range intersecting the open doubled interval (lo2, hi2).
        let mut jmin = [0i64; 3];
        let mut jmax = [0i64; 3];
        for a in 0..3 {
            let fmin = lo2[a].floor_half(m);
            let fmax_raw = hi2[a].floor_half(m);
            // A cube starting exactly at the open upper bound is excluded.
            let exact_top = {
                let twice = &fmax_raw * 2;
                hi2[a].cmp_in(&Madic::new(twice, 0, m), m) == Ordering::Equal
            };
            let fmax = if exact_top { fmax_raw - 1 } else { fmax_raw };
            jmin[a] = fmin.to_i64().unwrap_or(0).max(0);
            jmax[a] = fmax.to_i64().unwrap_or(-1).min(self.dims[a] as i64 - 1);
        }

        let mut out = Vec::new();
        for x in jmin[0]..=jmax[0] {
            for y in jmin[1]..=jmax[1] {
                for z in jmin[2]..=jmax[2] {
                    let key = [x as u32, y as u32, z as u32];
                    let Some(bucket) = self.buckets.get(&key) else { continue };
                    for &i in bucket {
                        let e = &self.elements[i as usize];
                        if element_meets_open_box(e, &lo2, &hi2, m) {
                            out.push(i as usize);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Replace one element by its children.
    pub fn subdivide(&self, k: &Element) -> Result<Mesh> {
        self.subdivide_many(std::slice::from_ref(k))
    }

    /// Replace each marked element by its children; set semantics, so the
    /// result is independent of the order of `marks`.
    pub fn subdivide_many(&self, marks: &[Element]) -> Result<Mesh> {
        let mut remove = vec![false; self.elements.len()];
        let mut unique: Vec<usize> = Vec::with_capacity(marks.len());
        for mk in marks {
            let idx = self
                .position(mk)
                .ok_or_else(|| Error::StaleElement(Box::new(mk.clone())))?;
            if !remove[idx] {
                remove[idx] = true;
                unique.push(idx);
            }
        }
        let mut elements: Vec<Element> = Vec::with_capacity(self.elements.len() + unique.len() * (self.m as usize - 1));
        for (i, e) in self.elements.iter().enumerate() {
            if !remove[i] {
                elements.push(e.clone());
            }
        }
        for idx in unique {
            elements.extend(self.elements[idx].children(self.m));
        }
        Ok(Mesh::from_parts(self.m, self.degree, self.dims, elements))
    }

    /// Full structural validation: every element is a lattice cell of its
    /// level inside the domain, no element is an ancestor of another, and
    /// the elements partition every unit cube exactly (volume accounting).
    pub fn validate(&self) -> Result<()> {
        let m = self.m;
        if m < 2 {
            return Err(Error::InvalidGrading(m));
        }
        for p in self.degree {
            if p < 3 || p % 2 == 0 {
                return Err(Error::InvalidDegree(p));
            }
        }
        for d in self.dims {
            if d == 0 {
                return Err(Error::InvalidDims(d));
            }
        }
        if self.elements.is_empty() {
            return Err(Error::Format("mesh has no elements".into()));
        }
        let index: HashSet<&Element> = self.elements.iter().collect();
        if index.len() != self.elements.len() {
            return Err(Error::Format("duplicate elements".into()));
        }
        let mut cube_sums: HashMap<[u32; 3], (u32, BigInt)> = HashMap::new();
        for e in &self.elements {
            let exps = size_exponents(e.level);
            let size = size_of_level(e.level, m);
            for a in Axis::ALL {
                let i = a.index();
                if e.lo[a].is_negative() {
                    return Err(Error::Format(format!("element outside domain: {:?}", e)));
                }
                if e.hi[a].cmp_in(&Madic::from_int(self.dims[i] as i64), m) == Ordering::Greater {
                    return Err(Error::Format(format!("element outside domain: {:?}", e)));
                }
                if e.hi[a].sub(&e.lo[a], m) != size[i] {
                    return Err(Error::Format(format!(
                        "element sides do not match level {}: {:?}",
                        e.level, e
                    )));
                }
                if e.lo[a].exp() > exps[i] {
                    return Err(Error::Format(format!("element not lattice-aligned: {:?}", e)));
                }
            }
            // No proper ancestor of an element may coexist with it.
            let mut anc = e.parent(m);
            while let Some(p) = anc {
                if index.contains(&p) {
                    return Err(Error::Format(format!(
                        "overlapping elements: {:?} contains {:?}",
                        p, e
                    )));
                }
                anc = p.parent(m);
            }
            // Exact volume accounting per unit cube, scaled to the deepest level.
            let cell = e.cell(m);
            let entry = cube_sums.entry(cell).or_insert((0, BigInt::zero()));
            if e.level > entry.0 {
                let shift = m_pow(m, e.level - entry.0);
                entry.1 *= shift;
                entry.0 = e.level;
            }
            entry.1 += m_pow(m, entry.0 - e.level);
        }
        let expected_cubes = (self.dims[0] as u64) * (self.dims[1] as u64) * (self.dims[2] as u64);
        if cube_sums.len() as u64 != expected_cubes {
            return Err(Error::Format(format!(
                "domain not covered: {} of {} unit cubes present",
                cube_sums.len(),
                expected_cubes
            )));
        }
        for (cell, (level, sum)) in &cube_sums {
            if *sum != m_pow(m, *level) {
                return Err(Error::Format(format!(
                    "unit cube {:?} is not partitioned exactly",
                    cell
                )));
            }
        }
        Ok(())
    }

    /// Exact total volume, as a sanity check for partition invariants.
    pub fn total_volume(&self) -> Madic {
        let m = self.m;
        let mut acc = Madic::zero();
        for e in &self.elements {
            acc = acc.add(&Madic::new(BigInt::one(), e.level, m), m);
        }
        acc
    }
}

fn element_meets_open_box(e: &Element, lo2: &[Madic; 3], hi2: &[Madic; 3], m: u32) -> bool {
    for a in Axis::ALL {
        let i = a.index();
        let elo2 = e.lo[a].scale(2, m);
        let ehi2 = e.hi[a].scale(2, m);
        // max(2·lo_e, lo2) < min(2·hi_e, hi2), strictly: closed element
        // against open environment.
        let left = if elo2.cmp_in(&lo2[i], m) == Ordering::Greater { elo2 } else { lo2[i].clone() };
        let right = if ehi2.cmp_in(&hi2[i], m) == Ordering::Less { ehi2 } else { hi2[i].clone() };
        if left.cmp_in(&right, m) != Ordering::Less {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> [u32; 3] {
        [3, 3, 3]
    }

    #[test]
    fn initial_mesh_counts() {
        let g = Mesh::initial([4, 5, 8], p3(), 2).unwrap();
        assert_eq!(g.len(), 160);
        assert!(g.elements().iter().all(|e| e.level == 0));
        g.validate().unwrap();

        let tiny = Mesh::initial([1, 1, 1], p3(), 2).unwrap();
        assert_eq!(tiny.len(), 1);
        assert_eq!(tiny.element(0), &Element::unit_cube(0, 0, 0));

        let two = Mesh::initial([2, 1, 1], p3(), 2).unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(two.element(0), &Element::unit_cube(0, 0, 0));
        assert_eq!(two.element(1), &Element::unit_cube(1, 0, 0));
    }

    #[test]
    fn initial_mesh_rejects_bad_parameters() {
        assert!(Mesh::initial([4, 4, 4], [2, 3, 3], 2).is_err());
        assert!(Mesh::initial([4, 4, 4], [1, 3, 3], 2).is_err());
        assert!(Mesh::initial([4, 4, 4], p3(), 1).is_err());
        assert!(Mesh::initial([0, 4, 4], p3(), 2).is_err());
    }

    #[test]
    fn size_of_level_cases() {
        let one = Madic::from_int(1);
        assert_eq!(size_of_level(0, 3), [one.clone(), one.clone(), one.clone()]);
        let third = Madic::from_int(1).div_m(3);
        assert_eq!(size_of_level(1, 3), [third.clone(), one.clone(), one.clone()]);
        assert_eq!(size_of_level(3, 3), [third.clone(), third.clone(), third.clone()]);
    }

    #[test]
    fn size_matches_successive_children() {
        // Three successive subdivisions of a unit cube land on size_of_level(3).
        let m = 3;
        let mut e = Element::unit_cube(0, 0, 0);
        for _ in 0..3 {
            e = e.children(m).into_iter().next().unwrap();
        }
        assert_eq!(e.sides(m), size_of_level(3, m));
        assert_eq!(e.level, 3);
    }

    #[test]
    fn children_directions() {
        let m = 3;
        let e = Element::unit_cube(0, 0, 0);
        let kids = e.children(m);
        assert_eq!(kids.len(), 3);
        let third = Madic::from_int(1).div_m(m);
        assert_eq!(kids[0].sides(m), [third.clone(), Madic::from_int(1), Madic::from_int(1)]);

        // level 1 splits along y
        let k1 = kids[0].clone();
        let gk = k1.children(m);
        assert_eq!(gk[0].sides(m), [third.clone(), third.clone(), Madic::from_int(1)]);

        // level 3 splits along x again
        let mut e = Element::unit_cube(0, 0, 0);
        for _ in 0..3 {
            e = e.children(m).into_iter().next().unwrap();
        }
        assert_eq!(Axis::from_level(e.level), Axis::X);
    }

    #[test]
    fn parent_inverts_children() {
        let m = 3;
        let e = Element::unit_cube(2, 1, 0);
        let mut cur = e.clone();
        for _ in 0..5 {
            let kids = cur.children(m);
            for k in &kids {
                assert_eq!(k.parent(m).unwrap(), cur);
            }
            cur = kids.into_iter().last().unwrap();
        }
    }

    #[test]
    fn distances() {
        let m = 2;
        let a = Element::unit_cube(0, 0, 0);
        let d = dist_elements(&a, &a, m);
        assert!(d.iter().all(|c| c.is_zero()));

        let b = Element::unit_cube(1, 0, 0);
        let d = dist_elements(&a, &b, m);
        assert_eq!(d[0].to_f64(m), 1.0);
        assert_eq!(d[1].to_f64(m), 0.0);
        assert_eq!(d[2].to_f64(m), 0.0);

        let origin = Point3::from_ints(0, 0, 0);
        let d = dist_to_point(&a, &origin, m);
        assert!(d.iter().all(|c| c.to_f64(m) == 0.5));
    }

    #[test]
    fn patch_radius_cases() {
        let r = patch_radius(0, p3(), 3);
        assert_eq!(r.map(|c| c.to_f64(3)), [4.5, 4.5, 4.5]);
        let r = patch_radius(1, p3(), 3);
        assert_eq!(r.map(|c| c.to_f64(3)), [1.5, 4.5, 4.5]);
        let r = patch_radius(4, p3(), 3);
        assert_eq!(r.map(|c| c.to_f64(3)), [0.5, 1.5, 1.5]);
    }

    #[test]
    fn patch_radius_shift_and_monotonicity() {
        let m = 3;
        for k in 0..9u32 {
            let rk = patch_radius_doubled(k, p3(), m);
            let rk3 = patch_radius_doubled(k + 3, p3(), m);
            let rk1 = patch_radius_doubled(k + 1, p3(), m);
            for a in 0..3 {
                // one full cycle divides every component by m exactly
                assert_eq!(rk[a].div_m(m), rk3[a]);
                // weakly decreasing per step; the stepped axis strictly
                assert_ne!(rk1[a].cmp_in(&rk[a], m), Ordering::Greater);
            }
            let stepped = (k % 3) as usize;
            assert_eq!(rk1[stepped].cmp_in(&rk[stepped], m), Ordering::Less);
        }
        // decreasing in m; strictly once every component carries a power of m
        for k in 0..6u32 {
            let r2 = patch_radius(k, p3(), 2).map(|c| c.to_f64(2));
            let r4 = patch_radius(k, p3(), 4).map(|c| c.to_f64(4));
            for a in 0..3 {
                assert!(r4[a] <= r2[a]);
                if k >= 3 {
                    assert!(r4[a] < r2[a]);
                }
            }
        }
    }

    /// Brute-force patch oracle: enumerate all elements and test the open
    /// box intersection with f64-free exact arithmetic on doubled values.
    fn patch_oracle(g: &Mesh, k: &Element) -> Vec<usize> {
        let m = g.m();
        let r2 = patch_radius_doubled(k.level, g.degree(), m);
        let mid2 = k.midpoint_doubled(m);
        let mut lo2 = [Madic::zero(), Madic::zero(), Madic::zero()];
        let mut hi2 = [Madic::zero(), Madic::zero(), Madic::zero()];
        for a in 0..3 {
            lo2[a] = mid2[a].sub(&r2[a], m);
            hi2[a] = mid2[a].add(&r2[a], m);
        }
        (0..g.len())
            .filter(|&i| element_meets_open_box(g.element(i), &lo2, &hi2, m))
            .collect()
    }

    #[test]
    fn patch_counts_on_initial_meshes() {
        let g = Mesh::initial([4, 5, 8], p3(), 2).unwrap();
        let corner = Element::unit_cube(0, 0, 0);
        let patch = g.patch(&corner);
        assert_eq!(patch.len(), 100);
        assert_eq!(patch, patch_oracle(&g, &corner));
        // all with x-index 1..4, y-index 1..5, z-index 1..5 (1-based)
        for &i in &patch {
            let c = g.element(i).cell(2);
            assert!(c[0] < 4 && c[1] < 5 && c[2] < 5);
        }

        let g = Mesh::initial([11, 11, 11], p3(), 2).unwrap();
        let center = Element::unit_cube(5, 5, 5);
        let patch = g.patch(&center);
        assert_eq!(patch.len(), 729);
        assert_eq!(patch, patch_oracle(&g, &center));
    }

    #[test]
    fn patch_does_not_require_membership() {
        let g = Mesh::initial([4, 4, 4], p3(), 2).unwrap();
        // a child element that is not a member of g
        let child = Element::unit_cube(0, 0, 0).children(2).remove(0);
        let patch = g.patch(&child);
        assert!(!patch.is_empty());
        assert_eq!(patch, patch_oracle(&g, &child));
    }

    #[test]
    fn subdivide_basics() {
        let m = 3;
        let g = Mesh::initial([1, 1, 1], p3(), m).unwrap();
        let only = g.element(0).clone();
        let g1 = g.subdivide(&only).unwrap();
        assert_eq!(g1.len(), 3);
        g1.validate().unwrap();

        // empty marking is a no-op
        let same = g.subdivide_many(&[]).unwrap();
        assert_eq!(same, g);

        // stale handle errors out
        let stale = Element::unit_cube(0, 0, 0).children(m).remove(1);
        assert!(matches!(g1.subdivide(&g1.element(0).clone()), Ok(_)));
        assert!(matches!(g.subdivide(&stale), Err(Error::StaleElement(_))));
    }

    #[test]
    fn subdivide_many_is_order_independent() {
        let g = Mesh::initial([3, 2, 2], p3(), 2).unwrap();
        let a = g.element(0).clone();
        let b = g.element(5).clone();
        let c = g.element(9).clone();
        let g1 = g.subdivide_many(&[a.clone(), b.clone(), c.clone()]).unwrap();
        let g2 = g.subdivide_many(&[c, a, b]).unwrap();
        assert_eq!(g1, g2);
        g1.validate().unwrap();
    }

    #[test]
    fn partition_volume_is_exact() {
        let m = 3;
        let mut g = Mesh::initial([2, 2, 2], p3(), m).unwrap();
        // subdivide a few elements repeatedly, no admissibility involved
        for round in 0..4 {
            let k = g.element(round % g.len()).clone();
            g = g.subdivide(&k).unwrap();
        }
        g.validate().unwrap();
        assert_eq!(g.total_volume(), Madic::from_int(8));
        for e in g.elements() {
            assert_eq!(e.sides(m), size_of_level(e.level, m));
        }
    }

    #[test]
    fn deep_levels_and_wide_domains_remain_exact() {
        // raw subdivision chain down to level 60 at grading 16: numerators
        // near 16^20 exceed u64 and must stay exact
        let m = 16;
        let mut g = Mesh::initial([1, 1, 1], p3(), m).unwrap();
        let mut target = g.element(0).clone();
        for _ in 0..60 {
            let next = target.children(m).into_iter().nth(1).unwrap();
            g = g.subdivide(&target).unwrap();
            target = next;
        }
        assert_eq!(g.max_level(), 60);
        g.validate().unwrap();
        assert_eq!(g.total_volume(), Madic::from_int(1));

        let wide = Mesh::initial([128, 1, 1], p3(), 2).unwrap();
        wide.validate().unwrap();
        assert_eq!(wide.len(), 128);
    }

    #[test]
    fn point_lookup_breaks_ties_lexicographically() {
        let g = Mesh::initial([2, 2, 2], p3(), 2).unwrap();
        let shared = Point3::from_ints(1, 1, 1);
        let hits = g.elements_at_point(&shared);
        assert_eq!(hits.len(), 8);
        let first = g.element(hits[0]);
        assert_eq!(first, &Element::unit_cube(0, 0, 0));
        let origin = g.elements_at_point(&Point3::from_ints(0, 0, 0));
        assert_eq!(origin.len(), 1);
    }
}
