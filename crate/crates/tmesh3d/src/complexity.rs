//! Complexity constants, the marking-experiment harness and the linear
//! bound check: over any sequence of refinements, the number of generated
//! elements is at most `C_{p,m}` times the number of marked elements.

use crate::error::{Error, Result};
use crate::madic::{m_pow, Madic, Point3};
use crate::mesh::{dist_elements, Element, Mesh};
use crate::refine::refine;
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::Instant;

/// The constants of the linear complexity bound.
#[derive(Clone, Debug)]
pub struct ComplexityConstants {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub c: f64,
    pub degree: [u32; 3],
    pub m: u32,
}

/// Evaluate the printed formulas: `d_i` bound the distance between a
/// generated element and some responsible marked element, and `C` combines
/// them into the per-marked-element generation bound.
pub fn constants(degree: [u32; 3], m: u32) -> ComplexityConstants {
    let mf = m as f64;
    let m13 = mf.cbrt();
    let m23 = m13 * m13;
    let geo = 1.0 / (1.0 - 1.0 / m13);
    let inner = |p: u32| p as f64 + (3.0 + m13) / 2.0 + (m13 - 1.0) / (mf * mf);
    let d1 = geo * inner(degree[0]);
    let d2 = m13 * geo * inner(degree[1]);
    let d3 = m23 * geo * inner(degree[2]);
    let c = m13 * geo * (4.0 * d1 + 1.0) * (4.0 * d2 + m13) * (4.0 * d3 + m23);
    ComplexityConstants { d1, d2, d3, c, degree, m }
}

/// One refinement step of an experiment.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub marked: usize,
    pub closure_size: usize,
    pub new_elements: usize,
    pub cumulative_new: usize,
    pub max_level: u32,
    pub ratio: f64,
    pub wall_ms: f64,
}

/// A logged marking sequence: per-step records plus the final totals
/// `|G_J ∖ G_0|` and the generated-to-marked ratio.
#[derive(Clone, Debug)]
pub struct ExperimentLog {
    pub dims: [u32; 3],
    pub degree: [u32; 3],
    pub m: u32,
    pub steps: Vec<StepRecord>,
    pub total_marked: usize,
    pub new_elements: usize,
    pub ratio: f64,
    pub seed: Option<u64>,
}

impl ExperimentLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,marked,closure_size,new_elements,cumulative_new,max_level,ratio\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.step, s.marked, s.closure_size, s.new_elements, s.cumulative_new, s.max_level, s.ratio
            );
        }
        out
    }
}

/// `side ≤ 1/denom`, exactly: `numer·denom ≤ m^exp`.
fn side_at_most_inverse(side: &Madic, denom: u64, m: u32) -> bool {
    side.numer() * BigInt::from(denom) <= m_pow(m, side.exp())
}

struct ExperimentTracker {
    initial: HashSet<Element>,
    steps: Vec<StepRecord>,
    total_marked: usize,
}

impl ExperimentTracker {
    fn new(g: &Mesh) -> Self {
        ExperimentTracker {
            initial: g.elements().iter().cloned().collect(),
            steps: Vec::new(),
            total_marked: 0,
        }
    }

    fn record(&mut self, rec: &crate::refine::RefinementRecord, wall_ms: f64) {
        self.total_marked += rec.marked_count();
        let cumulative_new = rec
            .output
            .elements()
            .iter()
            .filter(|e| !self.initial.contains(e))
            .count();
        self.steps.push(StepRecord {
            step: self.steps.len() + 1,
            marked: rec.marked_count(),
            closure_size: rec.closure_count(),
            new_elements: rec.created_count(),
            cumulative_new,
            max_level: rec.output.max_level(),
            ratio: if self.total_marked == 0 {
                0.0
            } else {
                cumulative_new as f64 / self.total_marked as f64
            },
            wall_ms,
        });
    }

    fn finish(self, g: &Mesh, dims: [u32; 3], degree: [u32; 3], m: u32, seed: Option<u64>) -> ExperimentLog {
        let new_elements = g.elements().iter().filter(|e| !self.initial.contains(e)).count();
        let ratio = if self.total_marked == 0 {
            0.0
        } else {
            new_elements as f64 / self.total_marked as f64
        };
        ExperimentLog {
            dims,
            degree,
            m,
            steps: self.steps,
            total_marked: self.total_marked,
            new_elements,
            ratio,
            seed,
        }
    }
}

/// Repeatedly mark the element containing the origin corner and refine,
/// until its side lengths are all at most `1/target_denom`.
pub fn corner_experiment(
    dims: [u32; 3],
    degree: [u32; 3],
    m: u32,
    target_denom: u64,
) -> Result<(Mesh, ExperimentLog)> {
    let mut g = Mesh::initial(dims, degree, m)?;
    let mut tracker = ExperimentTracker::new(&g);
    let origin = Point3::from_ints(0, 0, 0);
    loop {
        let corner = g.element(g.elements_at_point(&origin)[0]).clone();
        if corner
            .sides(m)
            .iter()
            .all(|s| side_at_most_inverse(s, target_denom, m))
        {
            break;
        }
        let t0 = Instant::now();
        let rec = refine(&g, &[corner])?;
        let wall = t0.elapsed().as_secs_f64() * 1e3;
        tracker.record(&rec, wall);
        g = rec.output;
        if tracker.steps.len() > 4000 {
            return Err(Error::Format("corner experiment did not terminate".into()));
        }
    }
    let log = tracker.finish(&g, dims, degree, m, None);
    Ok((g, log))
}

/// Seeded random marking: `rounds` refinement calls, each marking
/// `marks_per_round` distinct elements drawn uniformly.
pub fn random_experiment(
    dims: [u32; 3],
    degree: [u32; 3],
    m: u32,
    rounds: usize,
    marks_per_round: usize,
    seed: u64,
) -> Result<(Mesh, ExperimentLog)> {
    let mut g = Mesh::initial(dims, degree, m)?;
    let mut tracker = ExperimentTracker::new(&g);
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..rounds {
        let mut idxs: HashSet<usize> = HashSet::new();
        while idxs.len() < marks_per_round.min(g.len()) {
            idxs.insert(rng.random_range(0..g.len()));
        }
        let mut marks: Vec<Element> = idxs.iter().map(|&i| g.element(i).clone()).collect();
        marks.sort_unstable_by(|a, b| a.cmp_key(b, m));
        let t0 = Instant::now();
        let rec = refine(&g, &marks)?;
        let wall = t0.elapsed().as_secs_f64() * 1e3;
        tracker.record(&rec, wall);
        g = rec.output;
    }
    let log = tracker.finish(&g, dims, degree, m, Some(seed));
    Ok((g, log))
}

/// Outcome of checking a log against the linear bound.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub new_elements: usize,
    pub total_marked: usize,
    pub bound: f64,
    pub observed_ratio: f64,
    pub ratio_vs_c: f64,
    pub c: f64,
}

/// Assert `|G_J ∖ G_0| ≤ C_{p,m} · Σ|M_j|`; a violation is a hard error.
pub fn bound_check(log: &ExperimentLog, c: &ComplexityConstants) -> Result<BoundReport> {
    let bound = c.c * log.total_marked as f64;
    if log.new_elements as f64 > bound {
        return Err(Error::BoundViolated {
            new_elements: log.new_elements,
            marked: log.total_marked,
            bound,
        });
    }
    Ok(BoundReport {
        new_elements: log.new_elements,
        total_marked: log.total_marked,
        bound,
        observed_ratio: log.ratio,
        ratio_vs_c: if c.c > 0.0 { log.ratio / c.c } else { 0.0 },
        c: c.c,
    })
}

/// The experimental-constant estimator: per-prefix generated-to-marked
/// ratios of a corner run and their running maximum.
#[derive(Clone, Debug)]
pub struct RatioSeries {
    pub m: u32,
    pub log: ExperimentLog,
    pub running_max: Vec<f64>,
}

impl RatioSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,ratio,running_max\n");
        for (s, rm) in self.log.steps.iter().zip(&self.running_max) {
            let _ = writeln!(out, "{},{},{}", s.step, s.ratio, rm);
        }
        out
    }
}

/// Run `steps` corner refinements and report the prefix-ratio series.
pub fn estimate_experimental_constant(
    dims: [u32; 3],
    degree: [u32; 3],
    m: u32,
    steps: usize,
) -> Result<RatioSeries> {
    let mut g = Mesh::initial(dims, degree, m)?;
    let mut tracker = ExperimentTracker::new(&g);
    let origin = Point3::from_ints(0, 0, 0);
    for _ in 0..steps {
        let corner = g.element(g.elements_at_point(&origin)[0]).clone();
        let t0 = Instant::now();
        let rec = refine(&g, &[corner])?;
        let wall = t0.elapsed().as_secs_f64() * 1e3;
        tracker.record(&rec, wall);
        g = rec.output;
    }
    let log = tracker.finish(&g, dims, degree, m, None);
    let mut running_max = Vec::with_capacity(log.steps.len());
    let mut cur = 0.0f64;
    for s in &log.steps {
        cur = cur.max(s.ratio);
        running_max.push(cur);
    }
    Ok(RatioSeries { m, log, running_max })
}

/// Distance part of the responsibility property: every element created by a
/// refinement call lies within `m^{−ℓ/3}·(d1,d2,d3)` of some marked element
/// that is at most one level coarser.
pub fn created_elements_near_marks(rec: &crate::refine::RefinementRecord, c: &ComplexityConstants) -> bool {
    let m = rec.input.m();
    let mf = m as f64;
    rec.output.elements().iter().all(|k| {
        if rec.input.position(k).is_some() {
            return true; // not newly created
        }
        let scale = mf.powf(-(k.level as f64) / 3.0);
        let bounds = [c.d1 * scale, c.d2 * scale, c.d3 * scale];
        rec.marked.iter().any(|km| {
            if k.level > km.level + 1 {
                return false;
            }
            let d = dist_elements(k, km, m);
            (0..3).all(|a| d[a].to_f64(m) <= bounds[a] + 1e-9)
        })
    })
}
