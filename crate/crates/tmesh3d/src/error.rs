use crate::madic::Point3;
use crate::mesh::Element;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("grading parameter must be at least 2, got {0}")]
    InvalidGrading(u32),
    #[error("polynomial degree must be odd and at least 3, got {0}")]
    InvalidDegree(u32),
    #[error("domain dimensions must be positive, got {0}")]
    InvalidDims(u32),
    #[error("active region is empty: dimension {dim} is too small for degree {degree}")]
    EmptyActiveRegion { dim: u32, degree: u32 },
    #[error("element is not a member of the mesh (stale handle): {0:?}")]
    StaleElement(Box<Element>),
    #[error("subdivision of {subdivided:?} is not admissible: patch contains coarser {coarser:?}")]
    NotAdmissible { subdivided: Box<Element>, coarser: Box<Element> },
    #[error("mesh is not dual-compatible: nodes {v:?} and {w:?} share support but do not partially overlap")]
    NotDualCompatible { v: Box<Point3>, w: Box<Point3> },
    #[error("node is not active or not a mesh node: {0:?}")]
    NotActive(Box<Point3>),
    #[error("index vector for node {node:?} along {axis} is truncated by the domain boundary")]
    TruncatedIndexVector { node: Box<Point3>, axis: &'static str },
    #[error("knot vector must be strictly increasing")]
    InvalidKnots,
    #[error("knot vectors have mismatched degrees: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("invalid mesh data: {0}")]
    Format(String),
    #[error("no element matches the marking selector: {0}")]
    NoSuchElement(String),
    #[error("complexity bound violated: {new_elements} new elements > {bound} allowed for {marked} marked")]
    BoundViolated { new_elements: usize, marked: usize, bound: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
