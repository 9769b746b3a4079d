//! Perfect B-splines, dual functionals, the dual-basis verification and a
//! brute-force linear-independence oracle for the blending functions.
//!
//! The univariate dual functional integrates a test function against
//! `D^(p+1)(G·φ)`, where `G` is the antiderivative of the perfect B-spline
//! pulled back onto the knot span and `φ` the normalized product of the
//! interior knot monomials. On overlapping knot vectors it reproduces the
//! Kronecker delta, which makes the trivariate products a dual basis on
//! dual-compatible meshes.

use crate::error::{Error, Result};
use crate::madic::{Axis, Madic, Point3};
use crate::mesh::Mesh;
use crate::poly::{poly_mul, PiecewisePolynomial};
use crate::spline::{bspline_eval, is_dual_compatible_in, DcVerdict, SplineSet};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Cosine nodes `−1 = y_0 < … < y_{p+1} = 1`.
fn cosine_nodes(p: u32) -> Vec<f64> {
    let n = (p + 1) as f64;
    (0..=(p + 1) as usize)
        .map(|j| -(std::f64::consts::PI * j as f64 / n).cos())
        .collect()
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Compensated double-word arithmetic for the divided-difference table:
/// the truncated-power coefficients cancel almost completely, and plain f64
/// leaves errors above 1e−12 at degree 9.
mod dd {
    #[derive(Copy, Clone, Default)]
    pub struct Dd {
        hi: f64,
        lo: f64,
    }

    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    impl Dd {
        pub fn from(a: f64) -> Dd {
            Dd { hi: a, lo: 0.0 }
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }

        pub fn add(self, o: Dd) -> Dd {
            let s = two_sum(self.hi, o.hi);
            let e = self.lo + o.lo + s.lo;
            quick_two_sum(s.hi, e)
        }

        pub fn sub(self, o: Dd) -> Dd {
            self.add(Dd { hi: -o.hi, lo: -o.lo })
        }

        pub fn mul(self, o: Dd) -> Dd {
            let p = two_prod(self.hi, o.hi);
            let e = self.hi * o.lo + self.lo * o.hi + p.lo;
            quick_two_sum(p.hi, e)
        }

        pub fn div_by(self, b: f64) -> Dd {
            let q1 = self.hi / b;
            let r = self.sub(two_prod(q1, b));
            let q2 = (r.hi + r.lo) / b;
            quick_two_sum(q1, q2)
        }
    }
}

/// The perfect B-spline of degree `p` on the cosine nodes, normalized to
/// unit integral over [−1, 1]. Built by a divided-difference table on the
/// truncated powers `(y_j − x)_+^p`, carried in compensated arithmetic.
pub fn perfect_bspline(p: u32) -> PiecewisePolynomial {
    use dd::Dd;
    assert!(p >= 3 && p % 2 == 1, "degree must be odd and at least 3");
    let y = cosine_nodes(p);
    let n = y.len();
    let deg = p as usize;

    // table[j][i][k]: coefficient of (x − y_i)^k on piece i of (y_j − x)_+^p
    let mut table: Vec<Vec<Vec<Dd>>> = (0..n)
        .map(|j| {
            (0..n - 1)
                .map(|i| {
                    if i < j {
                        let d = Dd::from(y[j]).sub(Dd::from(y[i]));
                        let mut pows = vec![Dd::from(1.0); deg + 1];
                        for t in 1..=deg {
                            pows[t] = pows[t - 1].mul(d);
                        }
                        (0..=deg)
                            .map(|k| {
                                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                                pows[deg - k].mul(Dd::from(sign * binomial(p, k as u32)))
                            })
                            .collect()
                    } else {
                        vec![Dd::default(); deg + 1]
                    }
                })
                .collect()
        })
        .collect();

    for k in 1..n {
        for i in 0..n - k {
            let denom = y[i + k] - y[i];
            let next = table[i + 1].clone();
            for (piece, row) in table[i].iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = next[piece][c].sub(*v).div_by(denom);
                }
            }
        }
    }

    let sign = if (p + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let scale = Dd::from((p as f64 + 1.0) * sign);
    let coeffs: Vec<Vec<f64>> = table[0]
        .iter()
        .map(|row| row.iter().map(|v| v.mul(scale).to_f64()).collect())
        .collect();
    PiecewisePolynomial::new(y, coeffs)
}

/// The transition `G` of a knot vector: the perfect-B-spline antiderivative
/// pulled back affinely onto `[x_1, x_{p+2}]`; rises from 0 to 1.
pub fn transition(knots: &[f64]) -> PiecewisePolynomial {
    let x1 = knots[0];
    let xe = *knots.last().unwrap();
    let p = knots.len() - 2;
    let antider = perfect_bspline(p as u32).antiderivative();
    let s = 2.0 / (xe - x1);
    let t = -(x1 + xe) / (xe - x1);
    let g = antider.precompose_affine(s, t);
    let mut breaks = g.breaks().to_vec();
    breaks[0] = x1;
    let last = breaks.len() - 1;
    breaks[last] = xe;
    g.with_breaks(breaks)
}

/// The dual-functional integrand `D^(p+1)(G·φ)` of a knot vector; piecewise
/// degree at most `p` on the mapped cosine breakpoints.
pub fn dual_integrand(knots: &[f64]) -> PiecewisePolynomial {
    let p = knots.len() - 2;
    let g = transition(knots);
    let mut phi = vec![1.0];
    for knot in &knots[1..=p] {
        phi = poly_mul(&phi, &[-knot, 1.0]);
    }
    let fact = factorial(p);
    let phi: Vec<f64> = phi.iter().map(|c| c / fact).collect();
    g.mul_poly(&phi).derivative_n(p + 1)
}

/// Gauss–Legendre nodes and weights on [−1, 1], cached per node count.
fn gauss_legendre(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut nodes = vec![0.0; n];
            let mut weights = vec![0.0; n];
            for i in 0..n {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                for _ in 0..100 {
                    // Legendre polynomial and derivative by recurrence
                    let mut p0 = 1.0;
                    let mut p1 = x;
                    for k in 2..=n {
                        let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = pk;
                    }
                    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-15 {
                        break;
                    }
                }
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = pk;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                nodes[i] = x;
                weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
            }
            Arc::new((nodes, weights))
        })
        .clone()
}

fn quadrature_against(
    psi: &PiecewisePolynomial,
    test_knots: &[f64],
    lo: f64,
    hi: f64,
    n_nodes: usize,
) -> f64 {
    let mut breaks: Vec<f64> = psi.breaks().to_vec();
    breaks.extend(test_knots.iter().copied().filter(|&t| t > lo && t < hi));
    breaks.push(lo);
    breaks.push(hi);
    breaks.retain(|&b| b >= lo && b <= hi);
    breaks.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let gl = gauss_legendre(n_nodes);
    let (nodes, weights) = (&gl.0, &gl.1);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let half = (w[1] - w[0]) / 2.0;
        let mid = (w[0] + w[1]) / 2.0;
        let mut piece = 0.0;
        for (x, wt) in nodes.iter().zip(weights) {
            let t = mid + half * x;
            piece += wt * bspline_eval(test_knots, t) * psi.eval(t);
        }
        acc += piece * half;
    }
    acc
}

/// The univariate dual functional of `x_vec` applied to the B-spline on
/// `test_vec`: per-subinterval Gauss quadrature on the merged breakpoints,
/// exact for the piecewise-polynomial integrand up to roundoff.
pub fn lambda_1d(x_vec: &[f64], test_vec: &[f64]) -> f64 {
    lambda_1d_with_nodes(x_vec, test_vec, x_vec.len())
}

/// Same with an explicit node count per subinterval (for stability checks).
pub fn lambda_1d_with_nodes(x_vec: &[f64], test_vec: &[f64], n_nodes: usize) -> f64 {
    let psi = dual_integrand(x_vec);
    quadrature_against(&psi, test_vec, x_vec[0], *x_vec.last().unwrap(), n_nodes)
}

/// The trivariate dual functional of node `v` applied to the blending
/// function of node `w`: the product of the three univariate values.
pub fn lambda_node(g: &Mesh, v: &Point3, w: &Point3) -> Result<f64> {
    let set = SplineSet::build(g)?;
    lambda_node_in(&set, v, w)
}

/// Same against a prebuilt spline set.
pub fn lambda_node_in(set: &SplineSet, v: &Point3, w: &Point3) -> Result<f64> {
    let m = set.m();
    let fv = set.function_of(v).ok_or_else(|| Error::NotActive(Box::new(v.clone())))?;
    let fw = set.function_of(w).ok_or_else(|| Error::NotActive(Box::new(w.clone())))?;
    let mut acc = 1.0;
    for ax in 0..3 {
        acc *= lambda_1d(&fv.vectors[ax].knots_f64(m), &fw.vectors[ax].knots_f64(m));
    }
    Ok(acc)
}

/// Result of the dual-basis verification.
#[derive(Clone, Debug)]
pub struct DualBasisReport {
    pub nodes: usize,
    pub max_deviation: f64,
    pub worst: (Point3, Point3),
    pub tol: f64,
    pub pass: bool,
}

/// Verify the Kronecker-delta property of the dual functionals over all
/// ordered pairs of active nodes. Refuses meshes that are not
/// dual-compatible, returning the witness pair.
pub fn dual_basis_check(g: &Mesh, tol: f64) -> Result<DualBasisReport> {
    let set = SplineSet::build(g)?;
    if let DcVerdict::Witness { v, w } = is_dual_compatible_in(&set)? {
        return Err(Error::NotDualCompatible { v: Box::new(v), w: Box::new(w) });
    }
    let m = set.m();
    let n = set.len();
    let knots: Vec<[Vec<f64>; 3]> = set
        .functions
        .iter()
        .map(|f| [0, 1, 2].map(|ax| f.vectors[ax].knots_f64(m)))
        .collect();
    // integrands depend on the row node only
    let integrands: Vec<[PiecewisePolynomial; 3]> = knots
        .par_iter()
        .map(|k| [0, 1, 2].map(|ax| dual_integrand(&k[ax])))
        .collect();

    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut local: (f64, usize, usize) = (-1.0, 0, 0);
            for j in 0..n {
                let mut value = 1.0;
                for ax in 0..3 {
                    let xk = &knots[i][ax];
                    value *= quadrature_against(
                        &integrands[i][ax],
                        &knots[j][ax],
                        xk[0],
                        *xk.last().unwrap(),
                        xk.len(),
                    );
                }
                let delta = if i == j { 1.0 } else { 0.0 };
                let dev = (value - delta).abs();
                if dev > local.0 || (dev == local.0 && (i, j) < (local.1, local.2)) {
                    local = (dev, i, j);
                }
            }
            local
        })
        .reduce(
            || (-1.0, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
                    b
                } else {
                    a
                }
            },
        );

    let (max_deviation, wi, wj) = worst;
    let max_deviation = max_deviation.max(0.0);
    Ok(DualBasisReport {
        nodes: n,
        max_deviation,
        worst: (set.nodes[wi.min(n - 1)].clone(), set.nodes[wj.min(n - 1)].clone()),
        tol,
        pass: max_deviation <= tol,
    })
}

/// Result of the collocation rank oracle.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub active_nodes: usize,
    pub columns: usize,
    pub rows: usize,
    pub rank: usize,
    pub sigma_max: f64,
    pub threshold: f64,
}

impl RankReport {
    pub fn full_rank(&self) -> bool {
        self.rank == self.active_nodes
    }

    pub fn deficiency(&self) -> usize {
        self.columns - self.rank
    }
}

/// Numerical rank of the blending-function evaluation matrix on a
/// deterministic sample: a Chebyshev tensor grid in every element meeting
/// the active region, at least `(p+1)^3` points per element (enlarged
/// automatically until the sample is at least as large as the node count).
pub fn rank_oracle(g: &Mesh) -> Result<RankReport> {
    rank_oracle_impl(g, None)
}

/// Same, with the column of node index `dup` appended twice: the control
/// experiment must report a rank deficiency of exactly one.
pub fn rank_oracle_with_duplicate(g: &Mesh, dup: usize) -> Result<RankReport> {
    rank_oracle_impl(g, Some(dup))
}

fn rank_oracle_impl(g: &Mesh, dup: Option<usize>) -> Result<RankReport> {
    let set = SplineSet::build(g)?;
    let m = g.m();
    let n = set.len();
    let cols = n + usize::from(dup.is_some());

    // closed intersections of elements with the active region, as f64 boxes
    let ar = &set.active_region;
    let mut boxes: Vec<[[f64; 2]; 3]> = Vec::new();
    'elem: for e in g.elements() {
        let mut b = [[0.0f64; 2]; 3];
        for a in Axis::ALL {
            let i = a.index();
            let lo = Madic::from_int(ar.lo[i] as i64);
            let hi = Madic::from_int(ar.hi[i] as i64);
            let clo = if e.lo[a].cmp_in(&lo, m) == Ordering::Greater { &e.lo[a] } else { &lo };
            let chi = if e.hi[a].cmp_in(&hi, m) == Ordering::Less { &e.hi[a] } else { &hi };
            if clo.cmp_in(chi, m) == Ordering::Greater {
                continue 'elem;
            }
            b[i] = [clo.to_f64(m), chi.to_f64(m)];
        }
        boxes.push(b);
    }

    let mut per_axis: [usize; 3] = [0, 1, 2].map(|i| g.degree()[i] as usize + 1);
    while boxes.len() * per_axis[0] * per_axis[1] * per_axis[2] < cols {
        per_axis = per_axis.map(|v| v + 1);
    }

    let chebyshev = |lo: f64, hi: f64, k: usize, count: usize| -> f64 {
        if lo == hi {
            return lo;
        }
        let c = (std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * count as f64)).cos();
        (lo + hi) / 2.0 + (hi - lo) / 2.0 * c
    };

    let supports: Vec<[[f64; 2]; 3]> = set.functions.iter().map(|f| f.support_f64(m)).collect();
    let rows: Vec<Vec<(usize, f64)>> = boxes
        .par_iter()
        .flat_map_iter(|b| {
            let mut rows = Vec::with_capacity(per_axis[0] * per_axis[1] * per_axis[2]);
            for kx in 0..per_axis[0] {
                for ky in 0..per_axis[1] {
                    for kz in 0..per_axis[2] {
                        let pt = [
                            chebyshev(b[0][0], b[0][1], kx, per_axis[0]),
                            chebyshev(b[1][0], b[1][1], ky, per_axis[1]),
                            chebyshev(b[2][0], b[2][1], kz, per_axis[2]),
                        ];
                        let mut row: Vec<(usize, f64)> = Vec::new();
                        for (c, f) in set.functions.iter().enumerate() {
                            let s = &supports[c];
                            if (0..3).any(|a| pt[a] < s[a][0] || pt[a] > s[a][1]) {
                                continue;
                            }
                            let v = f.eval(pt, m);
                            if v != 0.0 {
                                row.push((c, v));
                            }
                        }
                        if let Some(d) = dup {
                            if let Some(&(_, v)) = row.iter().find(|(c, _)| *c == d) {
                                row.push((n, v));
                            }
                        }
                        if !row.is_empty() {
                            rows.push(row);
                        }
                    }
                }
            }
            rows
        })
        .collect();

    // Accumulate the triangular factor by Givens rotations; singular values
    // of R equal those of the full matrix.
    let mut r = vec![0.0f64; cols * cols];
    let mut dense = vec![0.0f64; cols];
    let total_rows = rows.len();
    for row in rows {
        dense.iter_mut().for_each(|v| *v = 0.0);
        for (c, v) in row {
            dense[c] = v;
        }
        for j in 0..cols {
            if dense[j] == 0.0 {
                continue;
            }
            let rjj = r[j * cols + j];
            let h = rjj.hypot(dense[j]);
            if h == 0.0 {
                continue;
            }
            let c = rjj / h;
            let s = dense[j] / h;
            for k in j..cols {
                let a = r[j * cols + k];
                let b = dense[k];
                r[j * cols + k] = c * a + s * b;
                dense[k] = -s * a + c * b;
            }
        }
    }

    let mat = DMatrix::from_row_slice(cols, cols, &r);
    let sv = mat.singular_values();
    let sigma_max = sv.iter().cloned().fold(0.0f64, f64::max);
    let threshold = 1e-9 * sigma_max;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    Ok(RankReport {
        active_nodes: n,
        columns: cols,
        rows: total_rows,
        rank,
        sigma_max,
        threshold,
    })
}
