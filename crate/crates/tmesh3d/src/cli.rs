//! Command-line front end.
//!
//! Exit codes: 0 on success and passing checks, 2 when a checker rejects the
//! mesh (verdict JSON still goes to stdout), 1 for malformed input or any
//! processing error (machine-readable error JSON on stderr). Stdout carries
//! JSON or CSV only.

use crate::complexity::{
    bound_check, constants, corner_experiment, estimate_experimental_constant, random_experiment,
};
use crate::dual::{dual_basis_check, rank_oracle};
use crate::error::{Error, Result};
use crate::io::{mesh_from_json, mesh_to_json, mesh_to_vtk, parse_marks, write_coord, write_point};
use crate::madic::{Madic, Point3};
use crate::mesh::Mesh;
use crate::refine::{refine, verify_admissible, Admissibility};
use crate::{asuit, spline};
use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "tmesh3d", version, about = "Locally refined trivariate T-meshes with adjustable grading")]
struct Cli {
    /// Worker threads for parallel checks and assembly (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an initial tensor-product mesh of unit cubes.
    Init {
        #[arg(long, num_args = 3, value_names = ["X", "Y", "Z"])]
        dims: Vec<u32>,
        #[arg(long, num_args = 3, value_names = ["P1", "P2", "P3"])]
        p: Vec<u32>,
        #[arg(long)]
        m: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Refine a mesh by a marking file (closure + graded subdivision).
    Refine {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        marks: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a mesh checker; exit 0 = pass, 2 = fail with witness on stdout.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Verify the Kronecker-delta property of the dual functionals.
    Dualcheck {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Numerical rank of the blending-function collocation matrix.
    Rank {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Refinement experiments with CSV logs.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCmd,
    },
    /// Print the linear-complexity constants for given degree and grading.
    Constants {
        #[arg(long, num_args = 3, value_names = ["P1", "P2", "P3"])]
        p: Vec<u32>,
        #[arg(long)]
        m: u32,
    },
    /// Export to other formats.
    Export {
        #[command(subcommand)]
        which: ExportCmd,
    },
    /// Element count, level histogram and active node count.
    Stats {
        #[arg(short, long)]
        input: PathBuf,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum CheckKind {
    As,
    Dc,
    Admissible,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Mark the origin corner element until it reaches 1/target per side.
    Corner {
        #[arg(long, num_args = 3)]
        dims: Vec<u32>,
        #[arg(long, num_args = 3)]
        p: Vec<u32>,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 16)]
        target: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Prefix generated-to-marked ratio series of corner runs, per grading.
    Ratio {
        #[arg(long, num_args = 3, default_values_t = [5u32, 5, 5])]
        dims: Vec<u32>,
        #[arg(long, num_args = 3, default_values_t = [3u32, 3, 3])]
        p: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 4, 5])]
        m_list: Vec<u32>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Write one CSV per grading under this prefix.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Seeded uniform random marking.
    Random {
        #[arg(long, num_args = 3)]
        dims: Vec<u32>,
        #[arg(long, num_args = 3)]
        p: Vec<u32>,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 2)]
        marks_per_round: usize,
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Legacy ASCII VTK unstructured hexahedra (lossy, one-way).
    Vtk {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Skeleton faces as JSON: per axis, coordinate and rectangle list.
    Skeleton {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Local index vectors of every active node, as JSON.
    IndexVectors {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Nonempty slice perturbations as JSON rectangle lists, for plotting.
    Regions {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// CSV of (v, w, λ_v(B_w)) over all active-node pairs.
    DualTable {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// CSV samples of the perfect B-spline and its antiderivative.
    BsplineSamples {
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn triple(v: &[u32]) -> [u32; 3] {
    [v[0], v[1], v[2]]
}

fn json_coord(c: &Madic) -> String {
    let mut s = String::new();
    write_coord(&mut s, c);
    s
}

fn json_point(p: &Point3) -> String {
    let mut s = String::new();
    write_point(&mut s, p);
    s
}

fn json_element(e: &crate::mesh::Element) -> String {
    format!(
        "{{\"lo\":{},\"hi\":{},\"level\":{}}}",
        json_point(&e.lo),
        json_point(&e.hi),
        e.level
    )
}

fn json_rects(rects: &[crate::rect::Rect2]) -> String {
    let mut out = String::from("[");
    for (i, r) in rects.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"lo\":[{},{}],\"hi\":[{},{}]}}",
            json_coord(&r.lo[0]),
            json_coord(&r.lo[1]),
            json_coord(&r.hi[0]),
            json_coord(&r.hi[1])
        );
    }
    out.push(']');
    out
}

fn load_mesh(path: &PathBuf) -> Result<Mesh> {
    let text = fs::read_to_string(path)?;
    mesh_from_json(&text)
}

/// Run with the given argv; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{{\"error\":{},\"kind\":\"{}\"}}",
                serde_json::to_string(&e.to_string()).unwrap_or_else(|_| "\"?\"".into()),
                error_kind(&e)
            );
            1
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidGrading(_) | Error::InvalidDegree(_) | Error::InvalidDims(_) => "parameters",
        Error::EmptyActiveRegion { .. } => "active-region",
        Error::StaleElement(_) | Error::NoSuchElement(_) => "marking",
        Error::NotAdmissible { .. } => "admissibility",
        Error::NotDualCompatible { .. } => "dual-compatibility",
        Error::BoundViolated { .. } => "complexity-bound",
        Error::Io(_) => "io",
        Error::Json(_) | Error::Format(_) => "format",
        _ => "internal",
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Init { dims, p, m, output } => {
            let g = Mesh::initial(triple(&dims), triple(&p), m)?;
            fs::write(&output, mesh_to_json(&g))?;
            println!("{{\"ok\":true,\"elements\":{}}}", g.len());
            Ok(0)
        }
        Command::Refine { input, marks, output, log } => {
            let g = load_mesh(&input)?;
            let marks_text = fs::read_to_string(&marks)?;
            let marked = parse_marks(&g, &marks_text)?;
            let rec = refine(&g, &marked)?;
            fs::write(&output, mesh_to_json(&rec.output))?;
            if let Some(path) = log {
                let mut csv = String::from(
                    "step,marked,closure_size,new_elements,cumulative_new,max_level,ratio\n",
                );
                let created = rec.created_count();
                let ratio = created as f64 / rec.marked_count().max(1) as f64;
                let _ = writeln!(
                    csv,
                    "1,{},{},{},{},{},{}",
                    rec.marked_count(),
                    rec.closure_count(),
                    created,
                    created,
                    rec.output.max_level(),
                    ratio
                );
                fs::write(path, csv)?;
            }
            println!(
                "{{\"ok\":true,\"marked\":{},\"closure\":{},\"created\":{},\"elements\":{}}}",
                rec.marked_count(),
                rec.closure_count(),
                rec.created_count(),
                rec.output.len()
            );
            Ok(0)
        }
        Command::Check { what, input } => {
            let g = load_mesh(&input)?;
            match what {
                CheckKind::As => {
                    let verdict = asuit::is_analysis_suitable(&g)?;
                    match verdict {
                        asuit::AsVerdict::Suitable => {
                            println!("{{\"as\":true,\"witness\":null}}");
                            Ok(0)
                        }
                        asuit::AsVerdict::Witness { axes, coords, interval, positive_measure } => {
                            println!(
                                "{{\"as\":false,\"witness\":{{\"axes\":[\"{}\",\"{}\"],\"coords\":[{},{}],\"interval\":[{},{}],\"positive_measure\":{}}}}}",
                                axes.0.name(),
                                axes.1.name(),
                                json_coord(&coords.0),
                                json_coord(&coords.1),
                                json_coord(&interval.0),
                                json_coord(&interval.1),
                                positive_measure
                            );
                            Ok(2)
                        }
                    }
                }
                CheckKind::Dc => {
                    let verdict = spline::is_dual_compatible(&g)?;
                    match verdict {
                        spline::DcVerdict::Compatible => {
                            println!("{{\"dc\":true,\"witness\":null}}");
                            Ok(0)
                        }
                        spline::DcVerdict::Witness { v, w } => {
                            println!(
                                "{{\"dc\":false,\"witness\":[{},{}]}}",
                                json_point(&v),
                                json_point(&w)
                            );
                            Ok(2)
                        }
                    }
                }
                CheckKind::Admissible => match verify_admissible(&g)? {
                    Admissibility::Admissible { replay } => {
                        println!(
                            "{{\"admissible\":true,\"certificate_length\":{}}}",
                            replay.len()
                        );
                        Ok(0)
                    }
                    Admissibility::Violation { subdivided, coarser } => {
                        println!(
                            "{{\"admissible\":false,\"violation\":{{\"subdivided\":{},\"coarser\":{}}}}}",
                            json_element(&subdivided),
                            json_element(&coarser)
                        );
                        Ok(2)
                    }
                },
            }
        }
        Command::Dualcheck { input, tol } => {
            let g = load_mesh(&input)?;
            match dual_basis_check(&g, tol) {
                Ok(report) => {
                    println!(
                        "{{\"pass\":{},\"dual_compatible\":true,\"nodes\":{},\"max_deviation\":{:e},\"tol\":{:e},\"worst\":[{},{}]}}",
                        report.pass,
                        report.nodes,
                        report.max_deviation,
                        report.tol,
                        json_point(&report.worst.0),
                        json_point(&report.worst.1)
                    );
                    Ok(if report.pass { 0 } else { 2 })
                }
                Err(Error::NotDualCompatible { v, w }) => {
                    println!(
                        "{{\"pass\":false,\"dual_compatible\":false,\"witness\":[{},{}]}}",
                        json_point(&v),
                        json_point(&w)
                    );
                    Ok(2)
                }
                Err(e) => Err(e),
            }
        }
        Command::Rank { input } => {
            let g = load_mesh(&input)?;
            let report = rank_oracle(&g)?;
            println!(
                "{{\"full_rank\":{},\"rank\":{},\"active_nodes\":{},\"rows\":{},\"sigma_max\":{:e},\"threshold\":{:e}}}",
                report.full_rank(),
                report.rank,
                report.active_nodes,
                report.rows,
                report.sigma_max,
                report.threshold
            );
            Ok(if report.full_rank() { 0 } else { 2 })
        }
        Command::Experiment { which } => match which {
            ExperimentCmd::Corner { dims, p, m, target, output } => {
                let (_, log) = corner_experiment(triple(&dims), triple(&p), m, target)?;
                let c = constants(triple(&p), m);
                let report = bound_check(&log, &c)?;
                let csv = log.to_csv();
                match output {
                    Some(path) => {
                        fs::write(path, csv)?;
                        println!(
                            "{{\"steps\":{},\"new_elements\":{},\"ratio\":{},\"c\":{}}}",
                            log.steps.len(),
                            log.new_elements,
                            report.observed_ratio,
                            report.c
                        );
                    }
                    None => print!("{csv}"),
                }
                eprintln!(
                    "corner experiment: {} steps, {} new elements, ratio {:.3} (C = {:.4e})",
                    log.steps.len(),
                    log.new_elements,
                    report.observed_ratio,
                    report.c
                );
                Ok(0)
            }
            ExperimentCmd::Ratio { dims, p, m_list, steps, output } => {
                let mut summary = String::from("{\"series\":{");
                for (i, m) in m_list.iter().enumerate() {
                    let series = estimate_experimental_constant(triple(&dims), triple(&p), *m, steps)?;
                    let c = constants(triple(&p), *m);
                    bound_check(&series.log, &c)?;
                    if let Some(prefix) = &output {
                        let path = prefix.with_file_name(format!(
                            "{}_m{}.csv",
                            prefix.file_name().and_then(|s| s.to_str()).unwrap_or("ratio"),
                            m
                        ));
                        fs::write(path, series.to_csv())?;
                    }
                    if i > 0 {
                        summary.push(',');
                    }
                    let _ = write!(summary, "\"{m}\":[");
                    for (j, (s, rm)) in series.log.steps.iter().zip(&series.running_max).enumerate()
                    {
                        if j > 0 {
                            summary.push(',');
                        }
                        let _ = write!(summary, "[{},{},{}]", s.step, s.ratio, rm);
                    }
                    summary.push(']');
                }
                summary.push_str("}}");
                println!("{summary}");
                Ok(0)
            }
            ExperimentCmd::Random { dims, p, m, rounds, marks_per_round, seed, output } => {
                let (_, log) =
                    random_experiment(triple(&dims), triple(&p), m, rounds, marks_per_round, seed)?;
                let c = constants(triple(&p), m);
                bound_check(&log, &c)?;
                let csv = log.to_csv();
                match output {
                    Some(path) => {
                        fs::write(path, csv)?;
                        println!(
                            "{{\"seed\":{},\"steps\":{},\"new_elements\":{}}}",
                            seed,
                            log.steps.len(),
                            log.new_elements
                        );
                    }
                    None => print!("{csv}"),
                }
                Ok(0)
            }
        },
        Command::Constants { p, m } => {
            let c = constants(triple(&p), m);
            println!(
                "{{\"p\":[{},{},{}],\"m\":{},\"d1\":{},\"d2\":{},\"d3\":{},\"C\":{}}}",
                c.degree[0], c.degree[1], c.degree[2], c.m, c.d1, c.d2, c.d3, c.c
            );
            Ok(0)
        }
        Command::Export { which } => match which {
            ExportCmd::Vtk { input, output } => {
                let g = load_mesh(&input)?;
                fs::write(&output, mesh_to_vtk(&g))?;
                println!("{{\"ok\":true,\"cells\":{}}}", g.len());
                Ok(0)
            }
            ExportCmd::Skeleton { input } => {
                let g = load_mesh(&input)?;
                let skels = crate::index::skeletons(&g);
                let mut out = String::from("[");
                let mut first = true;
                for skel in &skels {
                    for (coord, union) in skel.faces() {
                        if !first {
                            out.push(',');
                        }
                        first = false;
                        let _ = write!(
                            out,
                            "{{\"axis\":\"{}\",\"coord\":{},\"rects\":{}}}",
                            skel.axis().name(),
                            json_coord(coord),
                            json_rects(union.rects())
                        );
                    }
                }
                out.push(']');
                println!("{out}");
                Ok(0)
            }
            ExportCmd::IndexVectors { input } => {
                let g = load_mesh(&input)?;
                let set = spline::SplineSet::build(&g)?;
                let mut out = String::from("[");
                for (i, f) in set.functions.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{{\"node\":{}", json_point(&f.anchor));
                    for (axis, lv) in ["x", "y", "z"].iter().zip(&f.vectors) {
                        let _ = write!(out, ",\"{axis}\":[");
                        for (j, e) in lv.entries.iter().enumerate() {
                            if j > 0 {
                                out.push(',');
                            }
                            out.push_str(&json_coord(e));
                        }
                        out.push(']');
                    }
                    out.push('}');
                }
                out.push(']');
                println!("{out}");
                Ok(0)
            }
            ExportCmd::Regions { input } => {
                let g = load_mesh(&input)?;
                let regions = asuit::perturbed_regions(&g)?;
                let mut out = String::from("{");
                for (i, region) in regions.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "\"{}\":[", region.axis.name());
                    for (j, (coord, union)) in region.slices.iter().enumerate() {
                        if j > 0 {
                            out.push(',');
                        }
                        let _ = write!(
                            out,
                            "{{\"coord\":{},\"rects\":{}}}",
                            json_coord(coord),
                            json_rects(union.rects())
                        );
                    }
                    out.push(']');
                }
                out.push('}');
                println!("{out}");
                Ok(0)
            }
            ExportCmd::DualTable { input } => {
                let g = load_mesh(&input)?;
                let set = spline::SplineSet::build(&g)?;
                let m = g.m();
                println!("v_x,v_y,v_z,w_x,w_y,w_z,lambda");
                for v in &set.nodes {
                    for w in &set.nodes {
                        let value = crate::dual::lambda_node_in(&set, v, w)?;
                        let vf = v.to_f64(m);
                        let wf = w.to_f64(m);
                        println!(
                            "{},{},{},{},{},{},{:e}",
                            vf[0], vf[1], vf[2], wf[0], wf[1], wf[2], value
                        );
                    }
                }
                Ok(0)
            }
            ExportCmd::BsplineSamples { p, samples } => {
                if p < 3 || p % 2 == 0 {
                    return Err(Error::InvalidDegree(p));
                }
                let b = crate::dual::perfect_bspline(p);
                let a = b.antiderivative();
                println!("x,value,antiderivative");
                for i in 0..=samples {
                    let x = -1.0 + 2.0 * i as f64 / samples as f64;
                    println!("{},{},{}", x, b.eval(x), a.eval(x));
                }
                Ok(0)
            }
        },
        Command::Stats { input } => {
            let g = load_mesh(&input)?;
            let mut levels: BTreeMap<u32, usize> = BTreeMap::new();
            for e in g.elements() {
                *levels.entry(e.level).or_default() += 1;
            }
            let active = crate::index::active_nodes(&g).map(|v| v.len());
            let mut hist = String::from("{");
            for (i, (lvl, count)) in levels.iter().enumerate() {
                if i > 0 {
                    hist.push(',');
                }
                let _ = write!(hist, "\"{lvl}\":{count}");
            }
            hist.push('}');
            println!(
                "{{\"elements\":{},\"max_level\":{},\"levels\":{},\"active_nodes\":{},\"dims\":[{},{},{}],\"p\":[{},{},{}],\"m\":{}}}",
                g.len(),
                g.max_level(),
                hist,
                active.map_or("null".to_string(), |n| n.to_string()),
                g.dims()[0],
                g.dims()[1],
                g.dims()[2],
                g.degree()[0],
                g.degree()[1],
                g.degree()[2],
                g.m()
            );
            Ok(0)
        }
    }
}
