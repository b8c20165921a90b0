//! Complex polynomials and their roots via a balanced companion matrix.

use nalgebra::Schur;
use num_complex::Complex64;

use super::{CMatrix, ONE, ZERO};

/// Leading coefficients below this fraction of the largest one are dropped.
const TRIM_REL: f64 = 1e-12;

/// Polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Roots {
    /// The polynomial vanishes identically.
    ZeroPolynomial,
    /// All roots with multiplicity; empty for nonzero constants.
    Finite(Vec<Complex64>),
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == ZERO)
    }

    /// Copy with negligible leading coefficients removed.
    pub fn trimmed(&self) -> Polynomial {
        let scale = self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while let Some(last) = coeffs.last() {
            if last.norm() <= TRIM_REL * scale {
                coeffs.pop();
            } else {
                break;
            }
        }
        Polynomial { coeffs }
    }

    /// Degree after trimming; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let t = self.trimmed();
        if t.coeffs.is_empty() {
            None
        } else {
            Some(t.coeffs.len() - 1)
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn roots(&self) -> Roots {
        let t = self.trimmed();
        if t.coeffs.is_empty() {
            return Roots::ZeroPolynomial;
        }
        let deg = t.coeffs.len() - 1;
        if deg == 0 {
            return Roots::Finite(Vec::new());
        }
        let lead = t.coeffs[deg];
        let monic: Vec<Complex64> = t.coeffs.iter().map(|&c| c / lead).collect();
        let mut roots = companion_eigenvalues(&monic).unwrap_or_else(|| aberth(&monic));
        for r in roots.iter_mut() {
            *r = t.polish(*r);
        }
        Roots::Finite(roots)
    }

    /// A few guarded Newton steps; only accepted while |p| decreases.
    fn polish(&self, mut z: Complex64) -> Complex64 {
        let mut best = self.eval(z).norm();
        for _ in 0..3 {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let cand = z - p / dp;
            let val = self.eval(cand).norm();
            if val < best && cand.re.is_finite() && cand.im.is_finite() {
                z = cand;
                best = val;
            } else {
                break;
            }
        }
        z
    }
}

fn companion(monic: &[Complex64]) -> CMatrix {
    let d = monic.len() - 1;
    let mut m = CMatrix::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..d {
        m[(i, d - 1)] = -monic[i];
    }
    m
}

/// Diagonal similarity scaling by powers of two (Parlett–Reinsch).
fn balance(m: &mut CMatrix) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].norm();
                    row += m[(i, j)].norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix * radix;
            }
            if (col + row) / f < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

fn companion_eigenvalues(monic: &[Complex64]) -> Option<Vec<Complex64>> {
    let mut m = companion(monic);
    balance(&mut m);
    let schur = Schur::try_new(m, 1e-15, 10_000)?;
    let ev = schur.eigenvalues()?;
    let roots: Vec<Complex64> = ev.iter().copied().collect();
    if roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Some(roots)
    } else {
        None
    }
}

/// Aberth–Ehrlich simultaneous iteration; fallback when the QR iteration fails.
fn aberth(monic: &[Complex64]) -> Vec<Complex64> {
    let p = Polynomial::new(monic.to_vec());
    let d = monic.len() - 1;
    let radius = 1.0 + monic[..d].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for k in 0..d {
            let (pk, dpk) = p.eval_with_derivative(z[k]);
            if pk.norm() == 0.0 {
                continue;
            }
            let ratio = pk / dpk;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| ONE / (z[k] - z[j]))
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            z[k] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-15 * radius {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn finite(r: Roots) -> Vec<Complex64> {
        match r {
            Roots::Finite(v) => sorted(v),
            Roots::ZeroPolynomial => panic!("unexpected zero polynomial"),
        }
    }

    #[test]
    fn quadratic() {
        let r = finite(Polynomial::from_real(&[-1.0, 0.0, 1.0]).roots());
        assert_eq!(r.len(), 2);
        assert!((r[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn constants_and_zero() {
        assert_eq!(Polynomial::from_real(&[1.0]).roots(), Roots::Finite(vec![]));
        assert_eq!(Polynomial::from_real(&[]).roots(), Roots::ZeroPolynomial);
        assert_eq!(Polynomial::from_real(&[0.0, 0.0]).roots(), Roots::ZeroPolynomial);
    }

    #[test]
    fn determinant_of_swap_pencil() {
        // det((I + λX)/√2) = (1 - λ²)/2
        let r = finite(Polynomial::from_real(&[0.5, 0.0, -0.5]).roots());
        assert!((r[0] + 1.0).norm() < 1e-14);
        assert!((r[1] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn trims_spurious_leading_terms() {
        let p = Polynomial::from_real(&[-2.0, 1.0, 1e-14]);
        assert_eq!(p.degree(), Some(1));
        let r = finite(p.roots());
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).norm() < 1e-14);
    }

    #[test]
    fn wilkinson_like_degree_eight() {
        let roots: Vec<f64> = (1..=8).map(|k| k as f64).collect();
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in &roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        let found = finite(Polynomial::new(coeffs).roots());
        for (f, r) in found.iter().zip(&roots) {
            assert!((f - r).norm() < 1e-8, "{f} vs {r}");
        }
    }

    #[test]
    fn aberth_agrees_with_companion() {
        let monic = vec![
            Complex64::new(2.0, 1.0),
            Complex64::new(-1.0, 0.5),
            Complex64::new(0.0, -3.0),
            ONE,
        ];
        let a = sorted(aberth(&monic));
        let b = sorted(companion_eigenvalues(&monic).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }
}
