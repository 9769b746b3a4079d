//! Piecewise polynomials over a shared breakpoint list, with per-interval
//! coefficients in the local power basis centred at the interval's left
//! endpoint. Closed under differentiation and antidifferentiation; the
//! carrier of perfect B-splines, transition functions and dual-functional
//! integrands.

#[derive(Clone, Debug)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Self {
        assert!(breaks.len() >= 2);
        assert_eq!(coeffs.len(), breaks.len() - 1);
        assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        PiecewisePolynomial { breaks, coeffs }
    }

    pub fn zero(breaks: Vec<f64>) -> Self {
        let n = breaks.len() - 1;
        PiecewisePolynomial::new(breaks, vec![vec![0.0]; n])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.len().saturating_sub(1)).max().unwrap_or(0)
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        let n = self.breaks.len();
        if x < self.breaks[0] || x > self.breaks[n - 1] {
            return None;
        }
        if x == self.breaks[n - 1] {
            return Some(n - 2);
        }
        // right-continuous: piece i covers [breaks[i], breaks[i+1])
        let mut i = match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if i == n - 1 {
            i -= 1;
        }
        Some(i)
    }

    /// Evaluate; zero outside the breakpoint range, right-continuous at
    /// interior breaks, left-continuous at the final break.
    pub fn eval(&self, x: f64) -> f64 {
        let Some(i) = self.piece_index(x) else { return 0.0 };
        horner(&self.coeffs[i], x - self.breaks[i])
    }

    pub fn scale(&self, f: f64) -> Self {
        PiecewisePolynomial {
            breaks: self.breaks.clone(),
            coeffs: self.coeffs.iter().map(|c| c.iter().map(|v| v * f).collect()).collect(),
        }
    }

    /// Pointwise difference; requires identical breakpoints.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.breaks, other.breaks);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let n = a.len().max(b.len());
                (0..n)
                    .map(|k| a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        PiecewisePolynomial { breaks: self.breaks.clone(), coeffs }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.len() <= 1 {
                    vec![0.0]
                } else {
                    c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect()
                }
            })
            .collect();
        PiecewisePolynomial { breaks: self.breaks.clone(), coeffs }
    }

    pub fn derivative_n(&self, n: usize) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.derivative();
        }
        out
    }

    /// The continuous antiderivative vanishing at the first break.
    pub fn antiderivative(&self) -> Self {
        let mut acc = 0.0;
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut row = Vec::with_capacity(c.len() + 1);
            row.push(acc);
            for (k, v) in c.iter().enumerate() {
                row.push(v / (k as f64 + 1.0));
            }
            let width = self.breaks[i + 1] - self.breaks[i];
            acc = horner(&row, width);
            coeffs.push(row);
        }
        PiecewisePolynomial { breaks: self.breaks.clone(), coeffs }
    }

    pub fn integral(&self) -> f64 {
        let a = self.antiderivative();
        let n = a.breaks.len();
        a.eval(a.breaks[n - 1])
    }

    /// Multiply by a global polynomial given in the power basis at zero.
    pub fn mul_poly(&self, global: &[f64]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let local = shift_basis(global, self.breaks[i]);
                poly_mul(c, &local)
            })
            .collect();
        PiecewisePolynomial { breaks: self.breaks.clone(), coeffs }
    }

    /// Precompose with the affine map `u = s·x + t` (s > 0): the result
    /// satisfies `out(x) = self(s·x + t)` with breaks `(y − t)/s`.
    pub fn precompose_affine(&self, s: f64, t: f64) -> Self {
        assert!(s > 0.0);
        let breaks: Vec<f64> = self.breaks.iter().map(|y| (y - t) / s).collect();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(k, v)| v * s.powi(k as i32))
                    .collect()
            })
            .collect();
        PiecewisePolynomial { breaks, coeffs }
    }

    /// Replace the breakpoint values without touching coefficients; used to
    /// pin endpoints to exact values after an affine pullback.
    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        assert_eq!(breaks.len(), self.breaks.len());
        self.breaks = breaks;
        self
    }

    /// Largest jump across interior breakpoints.
    pub fn max_interior_jump(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..self.breaks.len() - 1 {
            let x = self.breaks[i];
            let left = horner(&self.coeffs[i - 1], x - self.breaks[i - 1]);
            let right = self.coeffs[i].first().copied().unwrap_or(0.0);
            worst = worst.max((left - right).abs());
        }
        worst
    }
}

pub(crate) fn horner(coeffs: &[f64], dx: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * dx + c;
    }
    acc
}

/// Coefficients of the same polynomial in the basis `(x − c)^k`.
pub(crate) fn shift_basis(coeffs: &[f64], c: f64) -> Vec<f64> {
    let mut b = coeffs.to_vec();
    let n = b.len();
    for k in 0..n {
        for i in (k..n - 1).rev() {
            b[i] += c * b[i + 1];
        }
    }
    b
}

pub(crate) fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_boundaries() {
        // x^2 on [0,1], 1 + 2(x−1) on [1,2]
        let p = PiecewisePolynomial::new(
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0, 0.0, 1.0], vec![1.0, 2.0]],
        );
        assert_eq!(p.eval(-0.5), 0.0);
        assert_eq!(p.eval(0.5), 0.25);
        assert_eq!(p.eval(1.0), 1.0);
        assert_eq!(p.eval(1.5), 2.0);
        assert_eq!(p.eval(2.0), 3.0); // final break: left piece value
        assert_eq!(p.eval(2.5), 0.0);
    }

    #[test]
    fn derivative_and_antiderivative_are_inverse() {
        let p = PiecewisePolynomial::new(
            vec![-1.0, 0.5, 2.0],
            vec![vec![1.0, -2.0, 3.0, 0.5], vec![0.25, 1.0, -1.0]],
        );
        let round = p.antiderivative().derivative();
        for i in 0..=100 {
            let x = -1.0 + 3.0 * i as f64 / 100.0;
            assert!((p.eval(x) - round.eval(x)).abs() < 1e-12, "at {x}");
        }
    }

    #[test]
    fn antiderivative_is_continuous_and_integrates() {
        // piecewise constant: 1 on [0,1], 3 on [1,2]
        let p = PiecewisePolynomial::new(vec![0.0, 1.0, 2.0], vec![vec![1.0], vec![3.0]]);
        let a = p.antiderivative();
        assert!(a.max_interior_jump() < 1e-15);
        assert!((a.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((p.integral() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn global_multiplication() {
        // f = 1 on [0,2]; multiply by x^2 − 1
        let p = PiecewisePolynomial::new(vec![0.0, 2.0], vec![vec![1.0]]);
        let q = p.mul_poly(&[-1.0, 0.0, 1.0]);
        for i in 0..=20 {
            let x = 2.0 * i as f64 / 20.0;
            assert!((q.eval(x) - (x * x - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn affine_precompose() {
        // f(u) = u^2 on [-1,1]; g(x) = f(2x − 3) on [1,2]
        let f = PiecewisePolynomial::new(vec![-1.0, 1.0], vec![vec![1.0, -2.0, 1.0]]);
        assert!((f.eval(0.5) - 0.25).abs() < 1e-15);
        let g = f.precompose_affine(2.0, -3.0);
        assert_eq!(g.breaks(), &[1.0, 2.0]);
        for i in 0..=20 {
            let x = 1.0 + i as f64 / 20.0;
            let u = 2.0 * x - 3.0;
            assert!((g.eval(x) - u * u).abs() < 1e-13);
        }
    }

    #[test]
    fn basis_shift() {
        // x^3 − x in the basis (x−2)^k
        let shifted = shift_basis(&[0.0, -1.0, 0.0, 1.0], 2.0);
        for i in 0..=10 {
            let x = -1.0 + 4.0 * i as f64 / 10.0;
            assert!((horner(&shifted, x - 2.0) - (x * x * x - x)).abs() < 1e-12);
        }
    }
}
