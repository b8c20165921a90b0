//! Left invertibility, relative joint spectra and pencil singular sets.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, numerical_rank, smallest_right_singular, smallest_singular_value,
    vstack, CMatrix, CVector, Polynomial, Roots, Tolerance, ZERO,
};
use crate::rng;
use crate::Field;

/// A nonempty list of operators sharing one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTuple {
    ops: Vec<CMatrix>,
}

impl OperatorTuple {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("operator tuple must be nonempty".into()))?;
        let shape = first.shape();
        if let Some(bad) = ops.iter().position(|a| a.shape() != shape) {
            return Err(Error::DimensionMismatch(format!(
                "operator {bad} is {:?}, expected {:?}",
                ops[bad].shape(),
                shape
            )));
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Number of columns (the dimension of the common domain).
    pub fn domain_dim(&self) -> usize {
        self.ops[0].ncols()
    }

    pub fn stacked(&self) -> CMatrix {
        vstack(&self.ops)
    }
}

/// A tuple is left invertible iff its stacked operator has full column rank.
pub fn is_left_invertible(t: &OperatorTuple, tol: &Tolerance) -> bool {
    numerical_rank(&t.stacked(), tol) == t.domain_dim()
}

/// Tests whether `Λ` (shaped `|B| × |A|`) lies in the left `B`-relative joint
/// spectrum of `A`, i.e. `A_j − Σ_i λ_ij B_i` share a kernel vector.
pub fn in_relative_spectrum(
    a: &OperatorTuple,
    b: &OperatorTuple,
    lambda: &CMatrix,
    tol: &Tolerance,
) -> Result<(bool, Option<CVector>)> {
    if lambda.shape() != (b.len(), a.len()) {
        return Err(Error::DimensionMismatch(format!(
            "Λ is {:?}, expected {}x{}",
            lambda.shape(),
            b.len(),
            a.len()
        )));
    }
    if a.ops[0].shape() != b.ops[0].shape() {
        return Err(Error::DimensionMismatch(
            "tuples act between different spaces".into(),
        ));
    }
    let residuals: Vec<CMatrix> = a
        .ops
        .iter()
        .enumerate()
        .map(|(j, aj)| {
            let mut r = aj.clone();
            for (i, bi) in b.ops.iter().enumerate() {
                r -= bi * lambda[(i, j)];
            }
            r
        })
        .collect();
    let stack = vstack(&residuals);
    let (sigma, v) = smallest_right_singular(&stack);
    if sigma <= tol.residual_abs {
        Ok((true, Some(v)))
    } else {
        Ok((false, None))
    }
}

/// The set of `λ` for which a pencil `P + λQ` fails to be injective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "roots", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SingularSet {
    Finite(Vec<Complex64>),
    AllOfC,
}

impl SingularSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SingularSet::Finite(r) if r.is_empty())
    }

    pub fn roots(&self) -> &[Complex64] {
        match self {
            SingularSet::Finite(r) => r,
            SingularSet::AllOfC => &[],
        }
    }

    /// Keeps only (numerically) real roots, snapping them onto the real axis.
    pub fn real_part(&self, tol: &Tolerance) -> SingularSet {
        match self {
            SingularSet::AllOfC => SingularSet::AllOfC,
            SingularSet::Finite(r) => SingularSet::Finite(
                r.iter()
                    .filter(|z| z.im.abs() <= tol.root_cluster)
                    .map(|z| c(z.re, 0.0))
                    .collect(),
            ),
        }
    }
}

/// Absolute σ_min threshold below which `P + λQ` counts as non-injective.
pub fn pencil_margin(p: &CMatrix, q: &CMatrix, tol: &Tolerance) -> f64 {
    100.0 * tol.residual_abs * (p.norm() + q.norm())
}

pub fn pencil_singular_set(p: &CMatrix, q: &CMatrix, tol: &Tolerance) -> Result<SingularSet> {
    pencil_singular_set_seeded(p, q, tol, 0)
}

/// Singular set of `P + λQ`. Candidate roots come from the first nonzero
/// maximal minor and a random combination of all maximal minors; each
/// candidate is kept only if `σ_min(P + λQ)` is below [`pencil_margin`].
pub fn pencil_singular_set_seeded(
    p: &CMatrix,
    q: &CMatrix,
    tol: &Tolerance,
    seed: u64,
) -> Result<SingularSet> {
    if p.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!(
            "pencil parts are {:?} and {:?}",
            p.shape(),
            q.shape()
        )));
    }
    let (m, n) = p.shape();
    if n == 0 {
        return Ok(SingularSet::Finite(Vec::new()));
    }
    // a wide pencil has a kernel at every λ
    if m < n {
        return Ok(SingularSet::AllOfC);
    }
    let margin = pencil_margin(p, q, tol);
    let scale = p.norm() + q.norm();
    if scale == 0.0 {
        return Ok(SingularSet::AllOfC);
    }

    let mut rng = rng::stream(seed, 0x5eed_0001);
    let probes: Vec<Complex64> = (0..3)
        .map(|_| rng::gaussian_scalar(&mut rng, Field::Complex))
        .collect();
    if probes
        .iter()
        .all(|&l| smallest_singular_value(&(p + q * l)) <= margin)
    {
        return Ok(SingularSet::AllOfC);
    }

    let mut candidates = Vec::new();
    if let Some(minor) = first_nonzero_minor(p, q, scale) {
        if let Roots::Finite(r) = minor.roots() {
            candidates.extend(r);
        }
    }
    let mix = rng::gaussian_matrix(&mut rng, n, m, Field::Complex);
    let guard = pencil_determinant(&(&mix * p), &(&mix * q));
    if let Roots::Finite(r) = guard.roots() {
        candidates.extend(r);
    }

    let verified: Vec<Complex64> = candidates
        .into_iter()
        .filter(|&l| smallest_singular_value(&(p + q * l)) <= margin)
        .collect();
    Ok(SingularSet::Finite(cluster_roots(verified, tol.root_cluster)))
}

/// `det(P + λQ)` for square `P, Q`, interpolated at roots of unity.
pub fn pencil_determinant(p: &CMatrix, q: &CMatrix) -> Polynomial {
    let n = p.nrows();
    let k = n + 1;
    let nodes: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64))
        .collect();
    let values: Vec<Complex64> = nodes.iter().map(|&w| (p + q * w).determinant()).collect();
    let coeffs = (0..k)
        .map(|deg| {
            let s: Complex64 = values
                .iter()
                .zip(&nodes)
                .map(|(v, w)| v * w.powi(-(deg as i32)))
                .sum();
            s / k as f64
        })
        .collect();
    Polynomial::new(coeffs)
}

fn first_nonzero_minor(p: &CMatrix, q: &CMatrix, scale: f64) -> Option<Polynomial> {
    let (m, n) = p.shape();
    let zero_cut = 1e-12 * scale.powi(n as i32);
    let mut rows: Vec<usize> = (0..n).collect();
    loop {
        let ps = p.select_rows(rows.iter());
        let qs = q.select_rows(rows.iter());
        let minor = pencil_determinant(&ps, &qs);
        if minor.max_abs_coeff() > zero_cut {
            return Some(minor);
        }
        if !next_combination(&mut rows, m) {
            return None;
        }
    }
}

/// Advances `idx` to the next lexicographic `k`-subset of `0..m`.
pub(crate) fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Merges roots closer than `radius` (single linkage), averaging each cluster.
pub fn cluster_roots(mut roots: Vec<Complex64>, radius: f64) -> Vec<Complex64> {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for r in roots {
        if let Some(cl) = clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|z| (z - r).norm() <= radius))
        {
            cl.push(r);
        } else {
            clusters.push(vec![r]);
        }
    }
    let mut out: Vec<Complex64> = clusters
        .into_iter()
        .map(|cl| cl.iter().sum::<Complex64>() / cl.len() as f64)
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Eigenvalues of a 2×2 matrix satisfying
/// `1 + |a₁|² − |a₂|² = 0`, `1 + |b₂|² − |b₁|² = 0`, `a₁ b̄₁ = a₂ b̄₂`
/// for `A = [[a₁, b₁], [a₂, b₂]]`. Such a matrix has two distinct eigenvalues
/// with `λ₁ λ̄₂ = −1`.
pub fn constrained_2x2_eigenpair(a: &CMatrix, tol: &Tolerance) -> Result<(Complex64, Complex64)> {
    if a.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("expected a 2x2 matrix".into()));
    }
    let (a1, b1, a2, b2) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let r1 = (1.0 + a1.norm_sqr() - a2.norm_sqr()).abs();
    let r2 = (1.0 + b2.norm_sqr() - b1.norm_sqr()).abs();
    let r3 = (a1 * b1.conj() - a2 * b2.conj()).norm();
    let worst = r1.max(r2).max(r3);
    if worst > tol.residual_abs {
        return Err(Error::ConstraintViolated(worst));
    }
    let (l1, l2) = eig2(a);
    Ok(if (l1.re, l1.im) >= (l2.re, l2.im) {
        (l1, l2)
    } else {
        (l2, l1)
    })
}

/// Both eigenvalues of a 2×2 matrix, avoiding cancellation in the quadratic formula.
fn eig2(a: &CMatrix) -> (Complex64, Complex64) {
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let s = if (tr.conj() * disc).re >= 0.0 { tr + disc } else { tr - disc };
    if s == ZERO {
        return (ZERO, ZERO);
    }
    let l1 = s / 2.0;
    let l2 = det / l1;
    (l1, l2)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
    }

    fn assert_roots(set: &SingularSet, want: &[f64]) {
        match set {
            SingularSet::Finite(r) => {
                assert_eq!(r.len(), want.len(), "{r:?}");
                for (z, w) in r.iter().zip(want) {
                    assert!((z - c(*w, 0.0)).norm() < 1e-10, "{z} vs {w}");
                }
            }
            SingularSet::AllOfC => panic!("unexpected ALL_OF_C"),
        }
    }

    #[test]
    fn left_invertibility_examples() {
        let tol = Tolerance::default();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let id = OperatorTuple::new(vec![CMatrix::identity(2, 2)]).unwrap();
        assert!(is_left_invertible(&id, &tol));
        let iz = OperatorTuple::new(vec![
            real(2, 2, &[s, 0.0, 0.0, s]),
            real(2, 2, &[s, 0.0, 0.0, -s]),
        ])
        .unwrap();
        assert!(is_left_invertible(&iz, &tol));
        let proj = OperatorTuple::new(vec![real(2, 2, &[1.0, 0.0, 0.0, 0.0])]).unwrap();
        assert!(!is_left_invertible(&proj, &tol));
        assert!(OperatorTuple::new(vec![CMatrix::identity(2, 2), CMatrix::identity(3, 3)]).is_err());
    }

    #[test]
    fn relative_spectrum_membership() {
        let tol = Tolerance::default();
        let a = 1.0 / 3f64.sqrt();
        let b = 1.0 / 6f64.sqrt();
        let a1 = real(2, 2, &[a, 0.0, 0.0, a]);
        let a2 = real(2, 2, &[0.0, a, a, 0.0]);
        let a3 = real(2, 2, &[b, -b, -b, b]);
        let big_a = OperatorTuple::new(vec![a2, a3]).unwrap();
        let big_b = OperatorTuple::new(vec![a1]).unwrap();

        let (hit, w) = in_relative_spectrum(&big_a, &big_b, &real(1, 2, &[1.0, 0.0]), &tol).unwrap();
        assert!(hit);
        let w = w.unwrap();
        assert!((w[0] - w[1]).norm() < 1e-12, "witness ∝ (1,1): {w}");

        let l = real(1, 2, &[-1.0, 2f64.sqrt()]);
        let (hit, w) = in_relative_spectrum(&big_a, &big_b, &l, &tol).unwrap();
        assert!(hit);
        let w = w.unwrap();
        assert!((w[0] + w[1]).norm() < 1e-12, "witness ∝ (1,-1): {w}");

        let (hit, w) = in_relative_spectrum(&big_a, &big_b, &real(1, 2, &[0.0, 0.0]), &tol).unwrap();
        assert!(!hit && w.is_none());

        assert!(in_relative_spectrum(&big_a, &big_b, &real(2, 1, &[0.0, 0.0]), &tol).is_err());
    }

    #[test]
    fn pencil_examples() {
        let tol = Tolerance::default();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = real(2, 2, &[s, 0.0, 0.0, s]);
        let q = real(2, 2, &[s, 0.0, 0.0, -s]);
        assert_roots(&pencil_singular_set(&p, &q, &tol).unwrap(), &[-1.0, 1.0]);

        let p = real(2, 2, &[s, 0.0, 0.0, 1.0]);
        let q = real(2, 2, &[s, 0.0, 0.0, 0.0]);
        assert_roots(&pencil_singular_set(&p, &q, &tol).unwrap(), &[-1.0]);

        let z = CMatrix::zeros(2, 2);
        assert_eq!(pencil_singular_set(&z, &z, &tol).unwrap(), SingularSet::AllOfC);

        // common kernel vector e₂ makes every λ singular
        let p = real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let q = real(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        assert_eq!(pencil_singular_set(&p, &q, &tol).unwrap(), SingularSet::AllOfC);

        assert!(pencil_singular_set(&p, &CMatrix::zeros(3, 2), &tol).is_err());
    }

    #[test]
    fn rectangular_pencils() {
        let tol = Tolerance::default();
        // [[1],[λ]] never vanishes
        let p = real(2, 1, &[1.0, 0.0]);
        let q = real(2, 1, &[0.0, 1.0]);
        assert!(pencil_singular_set(&p, &q, &tol).unwrap().is_empty());
        // [[1+λ],[2+2λ]] vanishes at λ = -1
        let p = real(2, 1, &[1.0, 2.0]);
        let q = real(2, 1, &[1.0, 2.0]);
        assert_roots(&pencil_singular_set(&p, &q, &tol).unwrap(), &[-1.0]);
        // first minor (rows 0,1) vanishes identically; rows 1,2 carry the root
        let p = real(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 3.0]);
        let q = real(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert_roots(&pencil_singular_set(&p, &q, &tol).unwrap(), &[-3.0, -1.0]);
    }

    #[test]
    fn constrained_eigenpair_examples() {
        let tol = Tolerance::default();
        let (l1, l2) = constrained_2x2_eigenpair(&real(2, 2, &[0.0, 1.0, 1.0, 0.0]), &tol).unwrap();
        assert!((l1 - 1.0).norm() < 1e-15 && (l2 + 1.0).norm() < 1e-15);
        assert!((l1 * l2.conj() + 1.0).norm() < 1e-15);

        let r2 = 2f64.sqrt();
        let (l1, l2) = constrained_2x2_eigenpair(&real(2, 2, &[1.0, r2, r2, 1.0]), &tol).unwrap();
        assert!((l1 - (1.0 + r2)).norm() < 1e-14);
        assert!((l2 - (1.0 - r2)).norm() < 1e-14);
        assert!((l1 * l2.conj() + 1.0).norm() < 1e-14);

        assert!(matches!(
            constrained_2x2_eigenpair(&CMatrix::identity(2, 2), &tol),
            Err(Error::ConstraintViolated(_))
        ));
    }

    #[test]
    fn combinations_enumerate_in_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn clustering_merges_split_double_roots() {
        let r = cluster_roots(vec![c(1.0, 1e-9), c(1.0, -1e-9), c(2.0, 0.0)], 1e-7);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0).norm() < 1e-12);
    }
}
