//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (visible with `--nocapture`).
//!
//! The shared corpus holds 52 refinement chains (corner, random and band
//! markings; gradings 2, 3, 4 and 16; degrees (3,3,3) and (5,5,5); at most
//! three rounds each) plus 12 deliberately non-admissible cascade meshes.

use std::sync::LazyLock;
use std::time::Instant;
use tmesh3d::asuit::is_analysis_suitable;
use tmesh3d::complexity::{
    bound_check, constants, corner_experiment, estimate_experimental_constant, random_experiment,
    ExperimentLog,
};
use tmesh3d::dual::{
    dual_basis_check, lambda_1d_with_nodes, perfect_bspline, rank_oracle,
    rank_oracle_with_duplicate, transition,
};
use tmesh3d::madic::Point3;
use tmesh3d::mesh::{Element, Mesh};
use tmesh3d::refine::{band_marks, cascade, is_locally_quasi_uniform, refine, verify_admissible};
use tmesh3d::spline::{is_dual_compatible, SplineSet};
use tmesh3d::Axis;

struct CorpusEntry {
    name: String,
    mesh: Mesh,
    total_marked: usize,
    new_elements: usize,
}

struct Corpus {
    admissible: Vec<CorpusEntry>,
    cascades: Vec<(String, Mesh)>,
}

static CORPUS: LazyLock<Corpus> = LazyLock::new(build_corpus);

/// Run a chain of at most three refinement rounds; marks are produced per
/// round from the current mesh.
fn chain(
    name: String,
    dims: [u32; 3],
    degree: [u32; 3],
    m: u32,
    mut mark: impl FnMut(&Mesh, usize) -> Vec<Element>,
    rounds: usize,
) -> CorpusEntry {
    let g0 = Mesh::initial(dims, degree, m).expect("corpus initial mesh");
    let initial: std::collections::HashSet<Element> = g0.elements().iter().cloned().collect();
    let mut g = g0;
    let mut total_marked = 0;
    for round in 0..rounds {
        let marks = mark(&g, round);
        assert!(!marks.is_empty(), "empty marking in corpus chain {name}");
        total_marked += marks.len();
        g = refine(&g, &marks).expect("corpus refine").output;
    }
    let new_elements = g.elements().iter().filter(|e| !initial.contains(e)).count();
    CorpusEntry { name, mesh: g, total_marked, new_elements }
}

fn corner_mark(g: &Mesh, _round: usize) -> Vec<Element> {
    let origin = Point3::from_ints(0, 0, 0);
    vec![g.element(g.elements_at_point(&origin)[0]).clone()]
}

fn random_mark(seed: u64) -> impl FnMut(&Mesh, usize) -> Vec<Element> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    move |g: &Mesh, _round: usize| {
        let mut idxs = std::collections::BTreeSet::new();
        while idxs.len() < 2.min(g.len()) {
            idxs.insert(rng.random_range(0..g.len()));
        }
        idxs.iter().map(|&i| g.element(i).clone()).collect()
    }
}

fn band_mark(g: &Mesh, round: usize) -> Vec<Element> {
    let axis = [Axis::X, Axis::Y, Axis::Z][round % 3];
    band_marks(g, axis, 0, 1)
}

fn build_corpus() -> Corpus {
    let mut admissible = Vec::new();
    let p3 = [3u32, 3, 3];
    let p5 = [5u32, 5, 5];

    for dims in [[4u32, 5, 8], [8, 8, 8], [6, 7, 9]] {
        for m in [2u32, 3, 4, 16] {
            admissible.push(chain(
                format!("p3-{dims:?}-m{m}-corner"),
                dims,
                p3,
                m,
                corner_mark,
                3,
            ));
            admissible.push(chain(
                format!("p3-{dims:?}-m{m}-random"),
                dims,
                p3,
                m,
                random_mark(0xC0FFEE ^ (m as u64) ^ (dims[0] as u64) << 8),
                2,
            ));
            admissible.push(chain(
                format!("p3-{dims:?}-m{m}-band"),
                dims,
                p3,
                m,
                band_mark,
                2,
            ));
        }
    }
    for dims in [[7u32, 7, 7], [8, 7, 9]] {
        for m in [2u32, 3, 4, 16] {
            admissible.push(chain(
                format!("p5-{dims:?}-m{m}-corner"),
                dims,
                p5,
                m,
                corner_mark,
                3,
            ));
            admissible.push(chain(
                format!("p5-{dims:?}-m{m}-random"),
                dims,
                p5,
                m,
                random_mark(0xBEEF ^ (m as u64) ^ (dims[2] as u64) << 8),
                2,
            ));
        }
    }

    let mut cascades: Vec<(String, Mesh)> = Vec::new();
    // corner cascades: hanging structure far from the active region
    for (dims, m, depth) in [
        ([5u32, 5, 5], 2u32, 4u32),
        ([5, 5, 5], 2, 6),
        ([6, 6, 6], 3, 3),
        ([6, 6, 6], 2, 5),
        ([7, 7, 7], 4, 3),
    ] {
        cascades.push((
            format!("cascade-corner-{dims:?}-m{m}-d{depth}"),
            cascade(dims, [3, 3, 3], m, [0, 0, 0], depth).unwrap(),
        ));
    }
    // central cascades: hanging faces crossing active node lines
    for (dims, m, depth, at) in [
        ([8u32, 8, 8], 2u32, 4u32, [3u32, 3, 3]),
        ([8, 8, 8], 2, 5, [3, 3, 3]),
        ([8, 8, 8], 3, 4, [3, 3, 3]),
        ([9, 9, 9], 2, 4, [4, 4, 4]),
        ([7, 8, 9], 2, 4, [3, 3, 4]),
        ([8, 8, 8], 4, 4, [3, 3, 3]),
    ] {
        cascades.push((
            format!("cascade-center-{dims:?}-m{m}-d{depth}"),
            cascade(dims, [3, 3, 3], m, at, depth).unwrap(),
        ));
    }
    cascades.push((
        "cascade-center-p5".into(),
        cascade([8, 8, 8], [5, 5, 5], 2, [3, 3, 3], 4).unwrap(),
    ));

    Corpus { admissible, cascades }
}

#[test]
fn criterion_1_corner_experiment_reproduction() {
    let cases = [(2u32, 12usize, 10728usize), (4, 6, 3175), (16, 3, 1030)];
    for (m, steps, new_elements) in cases {
        let t0 = Instant::now();
        let (mesh, log) = corner_experiment([4, 5, 8], [3, 3, 3], m, 16).unwrap();
        let wall = t0.elapsed().as_secs_f64();
        assert_eq!(log.steps.len(), steps, "m={m}: refinement step count");
        assert_eq!(log.new_elements, new_elements, "m={m}: new element count");
        mesh.validate().unwrap();
        assert!(wall < 60.0, "m={m} took {wall:.1}s, limit 60s");
        println!(
            "CRITERION 1 [m={m}]: PASS — {steps} steps, {new_elements} new elements, {wall:.2}s"
        );
    }
}

#[test]
fn criterion_2_theorem_chain_on_corpus() {
    let corpus = &CORPUS;
    assert!(corpus.admissible.len() >= 50, "corpus too small: {}", corpus.admissible.len());
    for entry in &corpus.admissible {
        let adm = verify_admissible(&entry.mesh).unwrap();
        assert!(adm.is_admissible(), "{} failed admissibility", entry.name);
        let asv = is_analysis_suitable(&entry.mesh).unwrap();
        assert!(asv.is_suitable(), "{} failed analysis-suitability", entry.name);
        let dcv = is_dual_compatible(&entry.mesh).unwrap();
        assert!(dcv.is_compatible(), "{} failed dual-compatibility", entry.name);
    }
    println!(
        "CRITERION 2: PASS — {} corpus meshes admissible, analysis-suitable and dual-compatible",
        corpus.admissible.len()
    );
}

#[test]
fn criterion_3_as_equals_dc_cross_validation() {
    let corpus = &CORPUS;
    assert!(corpus.cascades.len() >= 10, "need at least 10 cascades");
    let mut checked = 0;
    let mut unsuitable = 0;
    for (name, mesh) in corpus
        .cascades
        .iter()
        .map(|(n, g)| (n.as_str(), g))
        .chain(corpus.admissible.iter().map(|e| (e.name.as_str(), &e.mesh)))
    {
        let asv = is_analysis_suitable(mesh).unwrap().is_suitable();
        let dcv = is_dual_compatible(mesh).unwrap().is_compatible();
        assert_eq!(asv, dcv, "checker disagreement on {name}: as={asv} dc={dcv}");
        checked += 1;
        if !asv {
            unsuitable += 1;
        }
    }
    assert!(unsuitable >= 4, "cascade set exercised too few failing meshes");
    println!(
        "CRITERION 3: PASS — AS and DC verdicts identical on {checked} meshes ({unsuitable} unsuitable)"
    );
}

#[test]
fn criterion_4_dual_basis_delta_property() {
    let corpus = &CORPUS;
    let mut checked = 0;
    let mut worst_overall = 0.0f64;
    for entry in &corpus.admissible {
        let set = SplineSet::build(&entry.mesh).unwrap();
        if set.len() > 500 {
            continue;
        }
        let t0 = Instant::now();
        let report = dual_basis_check(&entry.mesh, 1e-8).unwrap();
        let wall = t0.elapsed().as_secs_f64();
        assert!(
            report.pass,
            "{}: max |λ_v(B_w) − δ| = {:e} exceeds 1e-8",
            entry.name, report.max_deviation
        );
        assert!(wall < 300.0, "{} took {wall:.1}s, limit 5 min", entry.name);
        worst_overall = worst_overall.max(report.max_deviation);
        checked += 1;
    }
    assert!(checked >= 50, "delta property exercised on too few meshes: {checked}");
    println!(
        "CRITERION 4: PASS — delta property on {checked} meshes, worst deviation {worst_overall:.3e}"
    );
}

#[test]
fn criterion_5_linear_independence_rank() {
    let corpus = &CORPUS;
    let mut checked = 0;
    for entry in &corpus.admissible {
        let set = SplineSet::build(&entry.mesh).unwrap();
        if set.len() > 500 {
            continue;
        }
        let report = rank_oracle(&entry.mesh).unwrap();
        assert!(
            report.full_rank(),
            "{}: rank {} of {} active nodes",
            entry.name,
            report.rank,
            report.active_nodes
        );
        checked += 1;
    }
    assert!(checked >= 50);

    // duplicated-function control: deficiency exactly one
    let g = Mesh::initial([6, 6, 6], [3, 3, 3], 2).unwrap();
    let dup = rank_oracle_with_duplicate(&g, 13).unwrap();
    assert_eq!(dup.deficiency(), 1, "duplicate control must lose exactly one rank");
    println!(
        "CRITERION 5: PASS — full rank on {checked} meshes; duplicate control deficiency 1"
    );
}

#[test]
fn criterion_6_complexity_bound() {
    // the three full corner experiments
    let mut logs: Vec<(String, ExperimentLog)> = Vec::new();
    for m in [2u32, 4, 16] {
        let (_, log) = corner_experiment([4, 5, 8], [3, 3, 3], m, 16).unwrap();
        logs.push((format!("corner-m{m}"), log));
    }
    // ratio-series runs
    for m in [2u32, 3, 4, 5] {
        let series = estimate_experimental_constant([5, 5, 5], [3, 3, 3], m, 8).unwrap();
        logs.push((format!("ratio-m{m}"), series.log));
    }
    // random sequences
    for seed in [7u64, 1234] {
        let (_, log) = random_experiment([6, 6, 6], [3, 3, 3], 2, 3, 2, seed).unwrap();
        logs.push((format!("random-{seed}"), log));
    }
    for (name, log) in &logs {
        let c = constants(log.degree, log.m);
        let report = bound_check(log, &c).unwrap();
        println!(
            "CRITERION 6 [{name}]: ratio {:.1} vs C = {:.4e} (ratio/C = {:.2e}{})",
            report.observed_ratio,
            report.c,
            report.ratio_vs_c,
            if report.observed_ratio < report.c / 3000.0 {
                ", below C/3000"
            } else {
                ""
            }
        );
    }
    // every corpus chain is a logged marking sequence as well
    for entry in &CORPUS.admissible {
        let c = constants(entry.mesh.degree(), entry.mesh.m());
        assert!(
            entry.new_elements as f64 <= c.c * entry.total_marked as f64,
            "{}: {} new elements exceed the bound for {} marks",
            entry.name,
            entry.new_elements,
            entry.total_marked
        );
    }
    println!(
        "CRITERION 6: PASS — bound holds on {} experiment logs and {} corpus chains",
        logs.len(),
        CORPUS.admissible.len()
    );
}

#[test]
fn criterion_7_local_quasi_uniformity() {
    let corpus = &CORPUS;
    for entry in &corpus.admissible {
        assert!(
            is_locally_quasi_uniform(&entry.mesh),
            "{} violates local quasi-uniformity",
            entry.name
        );
    }
    println!(
        "CRITERION 7: PASS — local quasi-uniformity on {} corpus meshes",
        corpus.admissible.len()
    );
}

#[test]
fn criterion_8_numerical_structure() {
    // unit integral of the perfect B-spline
    for p in [3u32, 5, 9] {
        let b = perfect_bspline(p);
        let err = (b.integral() - 1.0).abs();
        assert!(err <= 1e-12, "degree {p}: integral error {err:e}");
    }

    // transition endpoints 0 and 1
    for knots in [
        vec![0.0, 1.0, 2.0, 3.0, 4.0],
        vec![1.0, 1.5, 2.0, 2.5, 3.0],
        vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0],
    ] {
        let g = transition(&knots);
        assert!(g.eval(knots[0]).abs() <= 1e-12);
        assert!((g.eval(*knots.last().unwrap()) - 1.0).abs() <= 1e-12);
    }

    // quadrature-doubling stability
    let pairs: [(&[f64], &[f64]); 3] = [
        (&[0.0, 1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0, 5.0]),
        (&[1.0, 1.5, 2.0, 2.5, 3.0], &[1.5, 2.0, 2.5, 3.0, 4.0]),
        (&[0.0, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0], &[0.0, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0]),
    ];
    for (x, t) in pairs {
        let base = lambda_1d_with_nodes(x, t, x.len());
        let doubled = lambda_1d_with_nodes(x, t, 2 * x.len());
        assert!((base - doubled).abs() <= 1e-11, "{x:?} against {t:?}");
    }

    // partition of unity at the domain midpoint of a uniform 12^3 mesh;
    // the cardinal B-spline identity makes the exact sum 1
    let g = Mesh::initial([12, 12, 12], [3, 3, 3], 2).unwrap();
    let set = SplineSet::build(&g).unwrap();
    let mid = [6.0, 6.0, 6.0];
    let sum: f64 = set.functions.iter().map(|f| f.eval(mid, 2)).sum();
    assert!((sum - 1.0).abs() <= 1e-12, "partition of unity sum {sum}");

    println!("CRITERION 8: PASS — perfect-B-spline integrals, transition endpoints, quadrature stability, partition of unity");
}
