//! Closure and refinement: the marked-set closure fixpoint, level-ascending
//! subdivision, admissible-subdivision checks and the admissibility verifier.

use crate::error::{Error, Result};
use crate::madic::Axis;
use crate::mesh::{Element, Mesh};
use std::collections::{BTreeMap, HashSet};

/// A validated set of marked elements of one mesh.
#[derive(Clone, Debug)]
pub struct Marking<'g> {
    mesh: &'g Mesh,
    elements: Vec<Element>,
}

impl<'g> Marking<'g> {
    pub fn new(mesh: &'g Mesh, mut elements: Vec<Element>) -> Result<Self> {
        for e in &elements {
            if mesh.position(e).is_none() {
                return Err(Error::StaleElement(Box::new(e.clone())));
            }
        }
        elements.sort_unstable_by(|a, b| a.cmp_key(b, mesh.m()));
        elements.dedup();
        Ok(Marking { mesh, elements })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }
}

/// Everything one refinement call did: inputs, the closure actually
/// subdivided, the output mesh and per-level subdivision counts.
#[derive(Clone)]
pub struct RefinementRecord {
    pub input: Mesh,
    pub marked: Vec<Element>,
    pub closure: Vec<Element>,
    pub output: Mesh,
    pub per_level: BTreeMap<u32, usize>,
}

impl RefinementRecord {
    pub fn marked_count(&self) -> usize {
        self.marked.len()
    }

    pub fn closure_count(&self) -> usize {
        self.closure.len()
    }

    /// `|output ∖ input|`: every child created is new, so this is
    /// `m · |closure|`.
    pub fn created_count(&self) -> usize {
        self.closure.len() * self.input.m() as usize
    }
}

/// Least fixpoint of marking: repeatedly add every patch element coarser
/// than an already-marked element. Worklist schedule; the result is the
/// same fixpoint as a repeat-until-stable sweep and independent of order.
pub fn closure(g: &Mesh, marks: &[Element]) -> Result<Vec<Element>> {
    let mut set: HashSet<Element> = HashSet::new();
    let mut work: Vec<Element> = Vec::new();
    for mk in marks {
        if g.position(mk).is_none() {
            return Err(Error::StaleElement(Box::new(mk.clone())));
        }
        if set.insert(mk.clone()) {
            work.push(mk.clone());
        }
    }
    while let Some(k) = work.pop() {
        for i in g.patch(&k) {
            let e = g.element(i);
            if e.level < k.level && !set.contains(e) {
                set.insert(e.clone());
                work.push(e.clone());
            }
        }
    }
    let mut out: Vec<Element> = set.into_iter().collect();
    out.sort_unstable_by(|a, b| a.cmp_key(b, g.m()));
    Ok(out)
}

/// True iff every patch element of `k` is at least as fine as `k`.
pub fn is_admissible_subdivision(g: &Mesh, k: &Element) -> Result<bool> {
    if g.position(k).is_none() {
        return Err(Error::StaleElement(Box::new(k.clone())));
    }
    Ok(first_coarser_in_patch(g, k).is_none())
}

fn first_coarser_in_patch(g: &Mesh, k: &Element) -> Option<Element> {
    g.patch(k)
        .into_iter()
        .map(|i| g.element(i))
        .find(|e| e.level < k.level)
        .cloned()
}

/// Subdivide the closure of the marked set, grouped by level in ascending
/// order. Each subdivision is verified admissible at its turn, which
/// surfaces a violation error when the input mesh was not admissible.
pub fn refine(g: &Mesh, marks: &[Element]) -> Result<RefinementRecord> {
    let closure_set = closure(g, marks)?;
    let mut by_level: BTreeMap<u32, Vec<Element>> = BTreeMap::new();
    for e in &closure_set {
        by_level.entry(e.level).or_default().push(e.clone());
    }
    let mut cur = g.clone();
    let mut per_level = BTreeMap::new();
    for (level, group) in &by_level {
        for k in group {
            if let Some(coarser) = first_coarser_in_patch(&cur, k) {
                return Err(Error::NotAdmissible {
                    subdivided: Box::new(k.clone()),
                    coarser: Box::new(coarser),
                });
            }
        }
        per_level.insert(*level, group.len());
        cur = cur.subdivide_many(group)?;
    }
    let mut marked: Vec<Element> = marks.to_vec();
    marked.sort_unstable_by(|a, b| a.cmp_key(b, g.m()));
    marked.dedup();
    Ok(RefinementRecord {
        input: g.clone(),
        marked,
        closure: closure_set,
        output: cur,
        per_level,
    })
}

/// Outcome of [`verify_admissible`].
#[derive(Clone, Debug)]
pub enum Admissibility {
    /// The mesh is reachable by admissible subdivisions; `replay` is the
    /// certifying subdivision sequence in ascending level order.
    Admissible { replay: Vec<Element> },
    /// A witness pair: subdividing `subdivided` was (or would have been)
    /// inadmissible because `coarser` sits in its patch.
    Violation { subdivided: Element, coarser: Element },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { .. })
    }
}

/// Two-stage admissibility check.
///
/// Stage one is the fast necessary test: local quasi-uniformity (no patch
/// element more than one level coarser). Stage two replays the subdivision
/// history — all proper ancestors of mesh elements, in ascending level
/// order — from the initial grid, checking each subdivision at its turn.
pub fn verify_admissible(g: &Mesh) -> Result<Admissibility> {
    for i in 0..g.len() {
        let k = g.element(i);
        if k.level == 0 {
            continue;
        }
        for j in g.patch(k) {
            let e = g.element(j);
            if e.level + 1 < k.level {
                return Ok(Admissibility::Violation { subdivided: k.clone(), coarser: e.clone() });
            }
        }
    }

    let m = g.m();
    let mut ancestors: HashSet<Element> = HashSet::new();
    for e in g.elements() {
        let mut cur = e.parent(m);
        while let Some(p) = cur {
            if !ancestors.insert(p.clone()) {
                break;
            }
            cur = p.parent(m);
        }
    }
    let mut replay: Vec<Element> = ancestors.into_iter().collect();
    replay.sort_unstable_by(|a, b| a.level.cmp(&b.level).then_with(|| a.cmp_key(b, m)));

    let mut cur = Mesh::initial(g.dims(), g.degree(), m)?;
    let mut by_level: BTreeMap<u32, Vec<Element>> = BTreeMap::new();
    for e in &replay {
        by_level.entry(e.level).or_default().push(e.clone());
    }
    for group in by_level.values() {
        for k in group {
            if cur.position(k).is_none() {
                return Err(Error::Format(format!(
                    "mesh is not derivable from its initial grid: missing cell {:?}",
                    k
                )));
            }
            if let Some(coarser) = first_coarser_in_patch(&cur, k) {
                return Ok(Admissibility::Violation { subdivided: k.clone(), coarser });
            }
        }
        cur = cur.subdivide_many(group)?;
    }
    if &cur != g {
        return Err(Error::Format(
            "mesh does not equal the replayed subdivision of its initial grid".into(),
        ));
    }
    Ok(Admissibility::Admissible { replay })
}

/// Local quasi-uniformity: every patch element is at most one level coarser.
/// Holds on every admissible mesh; exposed for property checks.
pub fn is_locally_quasi_uniform(g: &Mesh) -> bool {
    (0..g.len()).all(|i| {
        let k = g.element(i);
        g.patch(k).into_iter().all(|j| g.element(j).level + 1 >= k.level)
    })
}

/// Build a deliberately non-admissible mesh: subdivide `depth` times at the
/// element containing `at`, never closing. Used for negative tests.
pub fn cascade(dims: [u32; 3], degree: [u32; 3], m: u32, at: [u32; 3], depth: u32) -> Result<Mesh> {
    let mut g = Mesh::initial(dims, degree, m)?;
    let mut target = Element::unit_cube(at[0], at[1], at[2]);
    for _ in 0..depth {
        let next = target.children(m).into_iter().next().unwrap();
        g = g.subdivide(&target)?;
        target = next;
    }
    Ok(g)
}

/// Axis-slab marking helper: all elements overlapping `lo ≤ axis ≤ hi`.
pub fn band_marks(g: &Mesh, axis: Axis, lo: i64, hi: i64) -> Vec<Element> {
    g.elements_overlapping_slab(axis, lo, hi)
        .into_iter()
        .map(|i| g.element(i).clone())
        .collect()
}
