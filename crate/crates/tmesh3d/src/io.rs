//! Canonical mesh JSON, marking files and VTK export.
//!
//! The JSON format carries every coordinate as a `[numerator, exponent]`
//! pair meaning `numerator / m^exponent`, with arbitrary-precision
//! numerators. Writers emit normalized coordinates and lexicographically
//! sorted elements; readers validate every invariant and reject on failure,
//! so export-then-import is bit-exact.

use crate::error::{Error, Result};
use crate::madic::{Axis, Madic, Point3};
use crate::mesh::{Element, Mesh};
use num_bigint::BigInt;
use num_traits::One;
use serde_json::Value;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

pub(crate) fn write_coord(out: &mut String, c: &Madic) {
    let _ = write!(out, "[{},{}]", c.numer(), c.exp());
}

pub(crate) fn write_point(out: &mut String, p: &Point3) {
    out.push('[');
    for (i, a) in Axis::ALL.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_coord(out, &p[*a]);
    }
    out.push(']');
}

/// Serialize a mesh in canonical form.
pub fn mesh_to_json(g: &Mesh) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"m\":{},\"p\":[{},{},{}],\"dims\":[{},{},{}],\"elements\":[",
        g.m(),
        g.degree()[0],
        g.degree()[1],
        g.degree()[2],
        g.dims()[0],
        g.dims()[1],
        g.dims()[2]
    );
    for (i, e) in g.elements().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"lo\":");
        write_point(&mut out, &e.lo);
        out.push_str(",\"hi\":");
        write_point(&mut out, &e.hi);
        let _ = write!(out, ",\"level\":{}}}", e.level);
    }
    out.push_str("]}");
    out
}

fn as_u32(v: &Value, what: &str) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| Error::Format(format!("{what} must be a small non-negative integer")))
}

fn parse_bigint(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => BigInt::from_str(&n.to_string())
            .map_err(|_| Error::Format(format!("{what} must be an integer, got {n}"))),
        _ => Err(Error::Format(format!("{what} must be an integer"))),
    }
}

fn parse_coord(v: &Value, m: u32, what: &str) -> Result<Madic> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::Format(format!("{what} must be a [numerator, exponent] pair")))?;
    let numer = parse_bigint(&arr[0], what)?;
    let exp = as_u32(&arr[1], what)?;
    let normalized = Madic::new(numer.clone(), exp, m);
    if *normalized.numer() != numer || normalized.exp() != exp {
        return Err(Error::Format(format!(
            "{what} is not normalized: {numer}/m^{exp}"
        )));
    }
    Ok(normalized)
}

fn parse_point(v: &Value, m: u32, what: &str) -> Result<Point3> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::Format(format!("{what} must have three coordinates")))?;
    Ok(Point3([
        parse_coord(&arr[0], m, what)?,
        parse_coord(&arr[1], m, what)?,
        parse_coord(&arr[2], m, what)?,
    ]))
}

fn parse_triple(v: &Value, what: &str) -> Result<[u32; 3]> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::Format(format!("{what} must have three entries")))?;
    Ok([
        as_u32(&arr[0], what)?,
        as_u32(&arr[1], what)?,
        as_u32(&arr[2], what)?,
    ])
}

/// Parse and fully validate a canonical mesh.
pub fn mesh_from_json(text: &str) -> Result<Mesh> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::Format("mesh must be a JSON object".into()))?;
    let m = as_u32(
        obj.get("m").ok_or_else(|| Error::Format("missing field m".into()))?,
        "m",
    )?;
    let degree = parse_triple(
        obj.get("p").ok_or_else(|| Error::Format("missing field p".into()))?,
        "p",
    )?;
    let dims = parse_triple(
        obj.get("dims").ok_or_else(|| Error::Format("missing field dims".into()))?,
        "dims",
    )?;
    if m < 2 {
        return Err(Error::InvalidGrading(m));
    }
    let elements_v = obj
        .get("elements")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Format("missing elements array".into()))?;
    let mut elements = Vec::with_capacity(elements_v.len());
    for ev in elements_v {
        let eo = ev
            .as_object()
            .ok_or_else(|| Error::Format("element must be an object".into()))?;
        let lo = parse_point(
            eo.get("lo").ok_or_else(|| Error::Format("element missing lo".into()))?,
            m,
            "lo",
        )?;
        let hi = parse_point(
            eo.get("hi").ok_or_else(|| Error::Format("element missing hi".into()))?,
            m,
            "hi",
        )?;
        let level = as_u32(
            eo.get("level").ok_or_else(|| Error::Format("element missing level".into()))?,
            "level",
        )?;
        elements.push(Element { lo, hi, level });
    }
    for w in elements.windows(2) {
        if w[0].cmp_key(&w[1], m) != Ordering::Less {
            return Err(Error::Format(
                "elements are not in canonical order (sorted, no duplicates)".into(),
            ));
        }
    }
    let mesh = Mesh::from_parts(m, degree, dims, elements);
    mesh.validate()?;
    Ok(mesh)
}

/// An exact coordinate for containment queries: m-adic or a binary rational
/// recovered from a JSON float.
enum ExactCoord {
    Madic(Madic),
    Ratio(BigInt, BigInt), // numerator, positive denominator
}

impl ExactCoord {
    /// Compare against an m-adic value.
    fn cmp_madic(&self, other: &Madic, m: u32) -> Ordering {
        match self {
            ExactCoord::Madic(v) => v.cmp_in(other, m),
            ExactCoord::Ratio(num, den) => {
                let lhs = num * crate::madic::m_pow(m, other.exp());
                let rhs = other.numer() * den;
                lhs.cmp(&rhs)
            }
        }
    }
}

fn f64_to_rational(v: f64) -> Option<(BigInt, BigInt)> {
    if !v.is_finite() {
        return None;
    }
    let bits = v.to_bits();
    let negative = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    let mut num = BigInt::from(mant);
    if negative {
        num = -num;
    }
    let mut den = BigInt::one();
    if e >= 0 {
        num <<= e as usize;
    } else {
        den <<= (-e) as usize;
    }
    Some((num, den))
}

fn parse_exact_coord(v: &Value, m: u32) -> Result<ExactCoord> {
    match v {
        Value::Array(_) => Ok(ExactCoord::Madic(parse_coord(v, m, "point coordinate")?)),
        Value::Number(n) => {
            if let Ok(i) = BigInt::from_str(&n.to_string()) {
                return Ok(ExactCoord::Madic(Madic::from_int(i)));
            }
            let f = n
                .as_f64()
                .ok_or_else(|| Error::Format("point coordinate is not a number".into()))?;
            let (num, den) = f64_to_rational(f)
                .ok_or_else(|| Error::Format("point coordinate is not finite".into()))?;
            Ok(ExactCoord::Ratio(num, den))
        }
        _ => Err(Error::Format("point coordinate must be a number or [num, exp]".into())),
    }
}

fn element_contains_exact(e: &Element, p: &[ExactCoord; 3], m: u32) -> bool {
    Axis::ALL.iter().all(|&a| {
        let c = &p[a.index()];
        c.cmp_madic(&e.lo[a], m) != Ordering::Less && c.cmp_madic(&e.hi[a], m) != Ordering::Greater
    })
}

/// Resolve a marking file against a mesh: a JSON list of selectors, each an
/// exact box (`{"lo": …, "hi": …}`) or a containment point
/// (`{"point": [x, y, z]}`, ties broken by lexicographically smallest lo).
pub fn parse_marks(g: &Mesh, text: &str) -> Result<Vec<Element>> {
    let root: Value = serde_json::from_str(text)?;
    let list = root
        .as_array()
        .ok_or_else(|| Error::Format("marks must be a JSON list".into()))?;
    let m = g.m();
    let mut out = Vec::with_capacity(list.len());
    for sel in list {
        let so = sel
            .as_object()
            .ok_or_else(|| Error::Format("selector must be an object".into()))?;
        if let Some(pv) = so.get("point") {
            let arr = pv
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::Format("point must have three coordinates".into()))?;
            let p = [
                parse_exact_coord(&arr[0], m)?,
                parse_exact_coord(&arr[1], m)?,
                parse_exact_coord(&arr[2], m)?,
            ];
            // elements are sorted, so the first hit has the smallest lo
            let hit = g
                .elements()
                .iter()
                .find(|e| element_contains_exact(e, &p, m))
                .ok_or_else(|| Error::NoSuchElement(sel.to_string()))?;
            out.push(hit.clone());
        } else if so.contains_key("lo") && so.contains_key("hi") {
            let lo = parse_point(so.get("lo").unwrap(), m, "selector lo")?;
            let hi = parse_point(so.get("hi").unwrap(), m, "selector hi")?;
            let hit = g
                .elements()
                .iter()
                .find(|e| e.lo == lo && e.hi == hi)
                .ok_or_else(|| Error::NoSuchElement(sel.to_string()))?;
            out.push(hit.clone());
        } else {
            return Err(Error::Format(
                "selector must have either a point or lo and hi".into(),
            ));
        }
    }
    Ok(out)
}

/// Legacy ASCII VTK export (lossy: coordinates as decimals, one-way).
pub fn mesh_to_vtk(g: &Mesh) -> String {
    let m = g.m();
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut index: HashMap<Point3, usize> = HashMap::new();
    let mut cells: Vec<[usize; 8]> = Vec::with_capacity(g.len());
    for e in g.elements() {
        // hexahedron corner order: bottom face counter-clockwise, then top
        let corners = [
            [&e.lo, &e.lo, &e.lo],
            [&e.hi, &e.lo, &e.lo],
            [&e.hi, &e.hi, &e.lo],
            [&e.lo, &e.hi, &e.lo],
            [&e.lo, &e.lo, &e.hi],
            [&e.hi, &e.lo, &e.hi],
            [&e.hi, &e.hi, &e.hi],
            [&e.lo, &e.hi, &e.hi],
        ];
        let mut cell = [0usize; 8];
        for (slot, c) in corners.iter().enumerate() {
            let p = Point3([
                c[0][Axis::X].clone(),
                c[1][Axis::Y].clone(),
                c[2][Axis::Z].clone(),
            ]);
            let next = points.len();
            let id = *index.entry(p.clone()).or_insert_with(|| {
                points.push(p.to_f64(m));
                next
            });
            cell[slot] = id;
        }
        cells.push(cell);
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("graded T-mesh\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(out, "{} {} {}", p[0], p[1], p[2]);
    }
    let _ = writeln!(out, "CELLS {} {}", cells.len(), cells.len() * 9);
    for c in &cells {
        let _ = writeln!(
            out,
            "8 {} {} {} {} {} {} {} {}",
            c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]
        );
    }
    let _ = writeln!(out, "CELL_TYPES {}", cells.len());
    for _ in &cells {
        out.push_str("12\n");
    }
    let _ = writeln!(out, "CELL_DATA {}", cells.len());
    out.push_str("SCALARS level int 1\nLOOKUP_TABLE default\n");
    for e in g.elements() {
        let _ = writeln!(out, "{}", e.level);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexity::random_experiment;
    use crate::refine::refine;

    fn p3() -> [u32; 3] {
        [3, 3, 3]
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = Mesh::initial([3, 4, 5], p3(), 3).unwrap();
        let json = mesh_to_json(&g);
        let back = mesh_from_json(&json).unwrap();
        assert_eq!(back, g);
        assert_eq!(mesh_to_json(&back), json);

        for seed in [1u64, 7, 99] {
            let (g, _) = random_experiment([4, 4, 4], p3(), 2, 3, 2, seed).unwrap();
            let json = mesh_to_json(&g);
            let back = mesh_from_json(&json).unwrap();
            assert_eq!(back, g);
            assert_eq!(mesh_to_json(&back), json);
        }
    }

    #[test]
    fn reader_rejects_malformed_meshes() {
        // bad grading
        assert!(mesh_from_json(r#"{"m":1,"p":[3,3,3],"dims":[1,1,1],"elements":[]}"#).is_err());
        // bad degree
        assert!(mesh_from_json(
            r#"{"m":2,"p":[2,3,3],"dims":[1,1,1],"elements":[{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,0],[1,0],[1,0]],"level":0}]}"#
        )
        .is_err());
        // non-normalized coordinate: 2/2^1 should be 1
        assert!(mesh_from_json(
            r#"{"m":2,"p":[3,3,3],"dims":[1,1,1],"elements":[{"lo":[[0,0],[0,0],[0,0]],"hi":[[2,1],[1,0],[1,0]],"level":0}]}"#
        )
        .is_err());
        // missing cube: dims say 2 cubes, only one present
        assert!(mesh_from_json(
            r#"{"m":2,"p":[3,3,3],"dims":[2,1,1],"elements":[{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,0],[1,0],[1,0]],"level":0}]}"#
        )
        .is_err());
        // level inconsistent with the box
        assert!(mesh_from_json(
            r#"{"m":2,"p":[3,3,3],"dims":[1,1,1],"elements":[{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,0],[1,0],[1,0]],"level":1}]}"#
        )
        .is_err());
    }

    #[test]
    fn reader_rejects_unsorted_and_overlapping() {
        let g = Mesh::initial([2, 1, 1], p3(), 2).unwrap();
        let json = mesh_to_json(&g);
        // swap the two element objects
        let a = r#"{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,0],[1,0],[1,0]],"level":0}"#;
        let b = r#"{"lo":[[1,0],[0,0],[0,0]],"hi":[[2,0],[1,0],[1,0]],"level":0}"#;
        let swapped = json.replace(&format!("{a},{b}"), &format!("{b},{a}"));
        assert_ne!(swapped, json);
        assert!(mesh_from_json(&swapped).is_err());

        // an element together with its own child overlaps
        let bad = r#"{"m":2,"p":[3,3,3],"dims":[1,1,1],"elements":[{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,1],[1,0],[1,0]],"level":1},{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,0],[1,0],[1,0]],"level":0}]}"#;
        assert!(mesh_from_json(bad).is_err());
    }

    #[test]
    fn point_marks_select_with_lexicographic_ties() {
        let g = Mesh::initial([2, 2, 2], p3(), 2).unwrap();
        let marks = parse_marks(&g, r#"[{"point":[1,1,1]}]"#).unwrap();
        assert_eq!(marks[0], Element::unit_cube(0, 0, 0));

        let marks = parse_marks(&g, r#"[{"point":[0.5,1.75,0.25]}]"#).unwrap();
        assert_eq!(marks[0], Element::unit_cube(0, 1, 0));

        let marks = parse_marks(&g, r#"[{"point":[[3,1],1,1]}]"#).unwrap();
        assert_eq!(marks[0], Element::unit_cube(1, 0, 0));

        assert!(parse_marks(&g, r#"[{"point":[5,0,0]}]"#).is_err());
    }

    #[test]
    fn box_marks_select_exact_elements() {
        let g0 = Mesh::initial([2, 2, 2], p3(), 2).unwrap();
        let g = refine(&g0, &[Element::unit_cube(0, 0, 0)]).unwrap().output;
        let sel = r#"[{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,1],[1,0],[1,0]],"level":1}]"#;
        let marks = parse_marks(&g, sel).unwrap();
        assert_eq!(marks[0].level, 1);
        // a box that is not a member
        let bad = r#"[{"lo":[[0,0],[0,0],[0,0]],"hi":[[1,0],[1,0],[1,0]]}]"#;
        assert!(parse_marks(&g, bad).is_err());
    }

    #[test]
    fn vtk_export_shape() {
        let g = Mesh::initial([2, 1, 1], p3(), 2).unwrap();
        let vtk = mesh_to_vtk(&g);
        assert!(vtk.contains("POINTS 12 double"));
        assert!(vtk.contains("CELLS 2 18"));
        assert!(vtk.contains("CELL_TYPES 2"));
        assert!(vtk.contains("SCALARS level int 1"));
    }
}
