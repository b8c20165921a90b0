//! Phase-retrievability verdicts for quantum channels.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, fix_phase, normalized, outer, right_singular_pairs, smallest_right_singular,
    smallest_right_singular_real, to_real, vstack, CMatrix, CVector, Tolerance, ZERO,
};
use crate::oracle::{self, OracleConfig, OracleOutcome, TensorKind, TensorMap};
use crate::spectra::{self, SingularSet};
use crate::{Field, QuantumChannel};

/// Lower bound on `‖ρ_x − ρ_y‖_F` for a state witness to count as distinct states.
pub const MIN_SEPARATION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pr,
    NotPr,
    LikelyPr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Rank1,
    Rank2Exact,
    NecessaryViolation,
    OracleWitness,
    OracleNoWitness,
    /// Decided from the kernel of the superoperator alone (trivial kernel,
    /// or a one-dimensional kernel whose generator has rank ≥ 2).
    KernelExact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Certificate {
    /// `(A₁ + λA₂)x ≈ 0` and `(−λ̄A₁ + A₂)y ≈ 0`.
    PencilClash {
        #[serde(with = "crate::io::complex")]
        lambda: Complex64,
        #[serde(with = "crate::io::vector")]
        x: CVector,
        #[serde(with = "crate::io::vector")]
        y: CVector,
    },
    /// Spectrum points `λ, μ` of `σ_{A_j}` with `1 + ⟨λ, μ⟩ ≈ 0` and witnesses `x, y`.
    InnerProductViolation {
        j: usize,
        #[serde(with = "crate::io::complex_list")]
        lambda: Vec<Complex64>,
        #[serde(with = "crate::io::complex_list")]
        mu: Vec<Complex64>,
        #[serde(with = "crate::io::vector")]
        x: CVector,
        #[serde(with = "crate::io::vector")]
        y: CVector,
    },
    TensorWitness {
        #[serde(with = "crate::io::vector")]
        x: CVector,
        #[serde(with = "crate::io::vector")]
        y: CVector,
        kind: TensorKind,
    },
    /// Unit vectors with `Φ(ρ_x) ≈ Φ(ρ_y)` and `ρ_x ≠ ρ_y`.
    StateWitness {
        #[serde(with = "crate::io::vector")]
        x: CVector,
        #[serde(with = "crate::io::vector")]
        y: CVector,
    },
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRVerdict {
    pub status: Status,
    pub method: Method,
    pub certificate: Certificate,
    pub floor: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
}

impl PRVerdict {
    fn new(status: Status, method: Method, certificate: Certificate) -> Self {
        Self {
            status,
            method,
            certificate,
            floor: None,
            residuals: BTreeMap::new(),
        }
    }

    fn with_residual(mut self, key: &str, value: f64) -> Self {
        self.residuals.insert(key.to_string(), value);
        self
    }
}

/// Outcome of re-checking a certificate against a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub ok: bool,
    pub residual: f64,
}

fn simple_image(ch: &QuantumChannel, x: &CVector, y: &CVector) -> f64 {
    ch.apply_unchecked(&outer(x, y)).norm() / (x.norm() * y.norm())
}

/// `(‖Φ(ρ_x) − Φ(ρ_y)‖_F, ‖ρ_x − ρ_y‖_F)` for the states of `x, y` (normalized first).
pub fn state_residuals(ch: &QuantumChannel, x: &CVector, y: &CVector) -> (f64, f64) {
    let (x, y) = (normalized(x), normalized(y));
    let (rx, ry) = (outer(&x, &x), outer(&y, &y));
    let d = &rx - &ry;
    (ch.apply_unchecked(&d).norm(), d.norm())
}

/// Re-verifies a certificate using channel operations only.
pub fn verify_certificate(ch: &QuantumChannel, cert: &Certificate, tol: &Tolerance) -> Verification {
    let dims_ok = |x: &CVector, y: &CVector| x.len() == ch.dim_in() && y.len() == ch.dim_in();
    let (ok, residual) = match cert {
        Certificate::Empty => (true, 0.0),
        Certificate::PencilClash { x, y, .. } | Certificate::TensorWitness { x, y, kind: TensorKind::Simple } => {
            if !dims_ok(x, y) {
                return Verification { ok: false, residual: f64::INFINITY };
            }
            let r = simple_image(ch, x, y);
            (r <= tol.residual_abs, r)
        }
        Certificate::TensorWitness { x, y, kind: TensorKind::Symmetric } => {
            if !dims_ok(x, y) {
                return Verification { ok: false, residual: f64::INFINITY };
            }
            let s = outer(x, y) + outer(y, x);
            let norm = s.norm();
            let r = if norm == 0.0 { f64::INFINITY } else { ch.apply_unchecked(&s).norm() / norm };
            (r <= tol.residual_abs, r)
        }
        Certificate::InnerProductViolation { lambda, mu, x, y, .. } => {
            if !dims_ok(x, y) || lambda.len() != mu.len() {
                return Verification { ok: false, residual: f64::INFINITY };
            }
            let ip = inner_product_defect(lambda, mu);
            let r = simple_image(ch, x, y);
            (ip <= tol.residual_abs && r <= tol.residual_abs, r.max(ip))
        }
        Certificate::StateWitness { x, y } => {
            if !dims_ok(x, y) {
                return Verification { ok: false, residual: f64::INFINITY };
            }
            let (img, sep) = state_residuals(ch, x, y);
            (img <= tol.residual_abs && sep >= MIN_SEPARATION, img)
        }
    };
    Verification { ok, residual }
}

/// `|1 + Σ_i λ_i μ̄_i|`
pub fn inner_product_defect(lambda: &[Complex64], mu: &[Complex64]) -> f64 {
    let s: Complex64 = lambda.iter().zip(mu).map(|(l, m)| l * m.conj()).sum();
    (c(1.0, 0.0) + s).norm()
}

/// Converts a pair with `Φ(u v* + v u*) = 0` into unit state vectors
/// `(u+v)/‖u+v‖`, `(u−v)/‖u−v‖`, provided the result re-verifies.
pub fn state_witness_from_pair(
    ch: &QuantumChannel,
    u: &CVector,
    v: &CVector,
    tol: &Tolerance,
) -> Option<(CVector, CVector)> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    let (u, v) = (u / c(nu, 0.0), v / c(nv, 0.0));
    let (mut x, mut y) = (normalized(&(&u + &v)), normalized(&(&u - &v)));
    fix_phase(&mut x);
    fix_phase(&mut y);
    let cert = Certificate::StateWitness { x: x.clone(), y: y.clone() };
    verify_certificate(ch, &cert, tol).ok.then_some((x, y))
}

fn to_state_certificate(ch: &QuantumChannel, cert: Certificate, tol: &Tolerance) -> Certificate {
    let pair = match &cert {
        Certificate::PencilClash { x, y, .. } | Certificate::TensorWitness { x, y, .. } => {
            state_witness_from_pair(ch, x, y, tol)
        }
        _ => None,
    };
    match pair {
        Some((x, y)) => Certificate::StateWitness { x, y },
        None => cert,
    }
}

fn attach_state_residuals(ch: &QuantumChannel, mut v: PRVerdict) -> PRVerdict {
    if let Certificate::StateWitness { x, y } = &v.certificate {
        let (img, sep) = state_residuals(ch, x, y);
        v = v.with_residual("state_image", img).with_residual("state_separation", sep);
    }
    v
}

pub fn decide_rank1(ch: &QuantumChannel, tol: &Tolerance) -> Result<PRVerdict> {
    let r = ch.choi_rank(tol);
    if r != 1 {
        return Err(Error::WrongRank { expected: 1, found: r });
    }
    Ok(PRVerdict::new(Status::Pr, Method::Rank1, Certificate::Empty))
}

/// A Kraus pair spanning the Kraus space of a Choi-rank-2 channel.
fn rank2_pair(ch: &QuantumChannel, tol: &Tolerance) -> Result<(CMatrix, CMatrix)> {
    let r = ch.choi_rank(tol);
    if r != 2 {
        return Err(Error::WrongRank { expected: 2, found: r });
    }
    let ops = if ch.kraus().len() == 2 {
        ch.kraus().to_vec()
    } else {
        let m = ch.minimized(tol)?;
        match ch.field() {
            Field::Real => QuantumChannel::new_projected(m.kraus().to_vec(), Field::Real)?.kraus().to_vec(),
            Field::Complex => m.kraus().to_vec(),
        }
    };
    Ok((ops[0].clone(), ops[1].clone()))
}

fn min_kernel_vector(m: &CMatrix, real: bool) -> (f64, CVector) {
    let (s, mut v) = if real {
        let (s, v) = smallest_right_singular_real(&to_real(m));
        (s, v.map(|t| c(t, 0.0)))
    } else {
        smallest_right_singular(m)
    };
    fix_phase(&mut v);
    (s, v)
}

/// Exact decision for Choi rank 2: PR iff no `λ` makes both `A₁ + λA₂` and
/// `−λ̄A₁ + A₂` non-injective (real `λ` for real channels).
pub fn decide_rank2(ch: &QuantumChannel, tol: &Tolerance) -> Result<PRVerdict> {
    let (a1, a2) = rank2_pair(ch, tol)?;
    let real = ch.field() == Field::Real;
    let mut s1 = spectra::pencil_singular_set(&a1, &a2, tol)?;
    let mut t = spectra::pencil_singular_set(&a2, &a1, tol)?;
    if real {
        s1 = s1.real_part(tol);
        t = t.real_part(tol);
    }
    let s2: Vec<Complex64> = t.roots().iter().map(|m| -m.conj()).collect();

    let candidates: Vec<Complex64> = match (&s1, &t) {
        (SingularSet::AllOfC, SingularSet::AllOfC) => vec![ZERO],
        (SingularSet::AllOfC, SingularSet::Finite(_)) => s2.clone(),
        (SingularSet::Finite(r), SingularSet::AllOfC) => r.clone(),
        (SingularSet::Finite(r), SingularSet::Finite(_)) => r
            .iter()
            .flat_map(|l| {
                s2.iter()
                    .filter(move |m| (*m - l).norm() <= tol.root_cluster)
                    .map(move |m| (l + m) / 2.0)
            })
            .collect(),
    };

    let margin = spectra::pencil_margin(&a1, &a2, tol);
    let map = TensorMap::from_channel(ch);
    for lambda in candidates {
        let p1 = &a1 + &a2 * lambda;
        let p2 = &a1 * (-lambda.conj()) + &a2;
        let (sx, x) = min_kernel_vector(&p1, real);
        let (sy, y) = min_kernel_vector(&p2, real);
        if sx > margin || sy > margin {
            continue;
        }
        let (px, py, res) = oracle::polish_simple(&map, &x, &y, 20);
        let (x, y) = if res < simple_image(ch, &x, &y) { (px, py) } else { (x, y) };
        let verdict = PRVerdict::new(Status::NotPr, Method::Rank2Exact, Certificate::PencilClash {
            lambda,
            x: x.clone(),
            y: y.clone(),
        })
        .with_residual("pencil_x", sx)
        .with_residual("pencil_y", sy)
        .with_residual("tensor", simple_image(ch, &x, &y));
        return Ok(verdict);
    }
    Ok(PRVerdict::new(Status::Pr, Method::Rank2Exact, Certificate::Empty))
}

/// A point `λ` of `σ_{A_j}` (coordinates over the other Kraus operators in
/// order) with a unit kernel vector `x`: `A_i x = λ_i A_j x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    #[serde(with = "crate::io::complex_list")]
    pub lambda: Vec<Complex64>,
    #[serde(with = "crate::io::vector")]
    pub witness: CVector,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarSpectrum {
    Finite(Vec<SpectrumPoint>),
    NotFinite,
}

/// Orthonormal basis (columns) of `{x ∈ range(basis) : ‖M x‖ ≤ margin}`.
fn sub_kernel(m: &CMatrix, basis: &CMatrix, margin: f64) -> CMatrix {
    let pairs = right_singular_pairs(&(m * basis));
    let cols: Vec<CVector> = pairs
        .into_iter()
        .take_while(|(s, _)| *s <= margin)
        .map(|(_, w)| basis * w)
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(basis.nrows(), 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

struct Partial {
    lambda: Vec<Complex64>,
    basis: CMatrix,
}

enum Extension {
    Points(Vec<Partial>),
    Continuum,
}

fn extend(
    ops: &[CMatrix],
    aj: &CMatrix,
    partial: Partial,
    tol: &Tolerance,
    seed: u64,
) -> Result<Extension> {
    let k = partial.lambda.len();
    if k == ops.len() {
        return Ok(Extension::Points(vec![partial]));
    }
    let ai = &ops[k];
    let p = ai * &partial.basis;
    let q = -(aj * &partial.basis);
    let margin = spectra::pencil_margin(ai, aj, tol);
    let roots = match spectra::pencil_singular_set_seeded(&p, &q, tol, seed)? {
        SingularSet::Finite(r) => r,
        SingularSet::AllOfC => {
            // singular at every λ: probe whether the remaining system survives
            let mut rng = crate::rng::stream(seed, 0x9e0be + k as u64);
            for _ in 0..3 {
                let l = crate::rng::gaussian_scalar(&mut rng, Field::Complex);
                let basis = sub_kernel(&(ai - aj * l), &partial.basis, margin);
                if basis.ncols() == 0 {
                    continue;
                }
                let mut lambda = partial.lambda.clone();
                lambda.push(l);
                match extend(ops, aj, Partial { lambda, basis }, tol, seed)? {
                    Extension::Points(p) if p.is_empty() => {}
                    _ => return Ok(Extension::Continuum),
                }
            }
            return Err(Error::SpectrumUndetermined(format!(
                "coordinate pencil {k} is singular everywhere but random probes find no point"
            )));
        }
    };
    let mut out = Vec::new();
    for l in roots {
        let basis = sub_kernel(&(ai - aj * l), &partial.basis, margin);
        if basis.ncols() == 0 {
            continue;
        }
        let mut lambda = partial.lambda.clone();
        lambda.push(l);
        match extend(ops, aj, Partial { lambda, basis }, tol, seed)? {
            Extension::Points(p) => out.extend(p),
            Extension::Continuum => return Ok(Extension::Continuum),
        }
    }
    Ok(Extension::Points(out))
}

/// Least-squares refinement of a spectrum point from its witness.
fn refine_point(others: &[CMatrix], aj: &CMatrix, lambda: &[Complex64], x: &CVector) -> SpectrumPoint {
    let mut lambda = lambda.to_vec();
    let mut x = x.clone();
    for _ in 0..2 {
        let ajx = aj * &x;
        let d = ajx.norm_squared();
        if d == 0.0 {
            break;
        }
        for (l, ai) in lambda.iter_mut().zip(others) {
            *l = ajx.dotc(&(ai * &x)) / d;
        }
        let stack = vstack(
            &others
                .iter()
                .zip(&lambda)
                .map(|(ai, l)| ai - aj * *l)
                .collect::<Vec<_>>(),
        );
        x = smallest_right_singular(&stack).1;
    }
    fix_phase(&mut x);
    let residual = others
        .iter()
        .zip(&lambda)
        .map(|(ai, l)| ((ai - aj * *l) * &x).norm_squared())
        .sum::<f64>()
        .sqrt();
    SpectrumPoint { lambda, witness: x, residual }
}

/// Enumerates `σ_{A_j}(A_i : i ≠ j)` for square Kraus operators (`j` is 0-based).
pub fn scalar_relative_spectrum(ch: &QuantumChannel, j: usize, tol: &Tolerance) -> Result<ScalarSpectrum> {
    if !ch.is_square() {
        return Err(Error::NotSquare);
    }
    let kraus = ch.kraus();
    if j >= kraus.len() {
        return Err(Error::InvalidInput(format!(
            "index {j} out of range for {} Kraus operators",
            kraus.len()
        )));
    }
    let aj = &kraus[j];
    let others: Vec<CMatrix> = kraus
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != j)
        .map(|(_, a)| a.clone())
        .collect();
    if others.is_empty() {
        return Ok(ScalarSpectrum::Finite(Vec::new()));
    }
    let n = ch.dim_in();
    let joint = vstack(kraus);
    if crate::linalg::numerical_rank(&joint, tol) < n {
        return Ok(ScalarSpectrum::NotFinite);
    }
    let start = Partial { lambda: Vec::new(), basis: CMatrix::identity(n, n) };
    let partials = match extend(&others, aj, start, tol, j as u64)? {
        Extension::Continuum => return Ok(ScalarSpectrum::NotFinite),
        Extension::Points(p) => p,
    };

    let mut points: Vec<SpectrumPoint> = Vec::new();
    for p in partials {
        let pt = refine_point(&others, aj, &p.lambda, &p.basis.column(0).into_owned());
        if pt.residual > tol.residual_abs {
            continue;
        }
        let dup = points.iter().any(|q| {
            q.lambda
                .iter()
                .zip(&pt.lambda)
                .all(|(a, b)| (a - b).norm() <= tol.root_cluster)
        });
        if !dup {
            points.push(pt);
        }
    }
    points.sort_by(|a, b| {
        for (x, y) in a.lambda.iter().zip(&b.lambda) {
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    Ok(ScalarSpectrum::Finite(points))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NecessaryOutcome {
    Violation(PRVerdict),
    Pass,
}

/// Necessary condition: `1 + ⟨λ, μ⟩ ≠ 0` for all `λ, μ ∈ σ_{A_j}` and all `j`.
pub fn necessary_inner_product_check(ch: &QuantumChannel, tol: &Tolerance) -> Result<NecessaryOutcome> {
    if !ch.is_square() {
        return Err(Error::NotSquare);
    }
    for j in 0..ch.kraus().len() {
        let points = match scalar_relative_spectrum(ch, j, tol)? {
            ScalarSpectrum::Finite(p) => p,
            ScalarSpectrum::NotFinite => return Err(Error::NotFinite),
        };
        for a in &points {
            for b in &points {
                let defect = inner_product_defect(&a.lambda, &b.lambda);
                if defect <= tol.residual_abs {
                    let cert = Certificate::InnerProductViolation {
                        j,
                        lambda: a.lambda.clone(),
                        mu: b.lambda.clone(),
                        x: a.witness.clone(),
                        y: b.witness.clone(),
                    };
                    let tensor = verify_certificate(ch, &cert, tol).residual;
                    let v = PRVerdict::new(Status::NotPr, Method::NecessaryViolation, cert)
                        .with_residual("inner_product", defect)
                        .with_residual("tensor", tensor);
                    return Ok(NecessaryOutcome::Violation(v));
                }
            }
        }
    }
    Ok(NecessaryOutcome::Pass)
}

/// `Σ_j (u_j v_j* + v_j u_j*)` vanishes, relative to `max(1, Σ ‖u_j‖‖v_j‖)`.
pub fn is_skew_commutative(u: &[CVector], v: &[CVector], tol: &Tolerance) -> Result<bool> {
    if u.len() != v.len() || u.is_empty() {
        return Err(Error::DimensionMismatch("lists must be nonempty and of equal length".into()));
    }
    let n = u[0].len();
    if u.iter().chain(v).any(|w| w.len() != n) {
        return Err(Error::DimensionMismatch("vectors must share one dimension".into()));
    }
    let mut s = CMatrix::zeros(n, n);
    let mut scale = 0.0;
    for (a, b) in u.iter().zip(v) {
        s += outer(a, b) + outer(b, a);
        scale += a.norm() * b.norm();
    }
    Ok(s.norm() <= tol.residual_abs * scale.max(1.0))
}

/// `(A_j x)_j` and `(A_j y)_j`, skew-commutative exactly when `Φ(x y* + y x*) = 0`.
pub fn skew_pair(ch: &QuantumChannel, x: &CVector, y: &CVector) -> (Vec<CVector>, Vec<CVector>) {
    ch.kraus().iter().map(|a| (a * x, a * y)).unzip()
}

/// Restricts which parts of the decision pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pipeline {
    #[default]
    Full,
    Exact,
    Oracle,
}

/// Full decision: rank 1 and rank 2 are exact, larger ranks are screened by
/// the necessary inner-product check and then handed to the tensor oracle.
pub fn decide(ch: &QuantumChannel, cfg: &OracleConfig, tol: &Tolerance) -> PRVerdict {
    decide_with(ch, cfg, tol, Pipeline::Full).expect("the full pipeline always yields a verdict")
}

pub fn decide_with(
    ch: &QuantumChannel,
    cfg: &OracleConfig,
    tol: &Tolerance,
    pipeline: Pipeline,
) -> Result<PRVerdict> {
    let rank = ch.choi_rank(tol);
    if pipeline != Pipeline::Oracle {
        if rank == 1 {
            return decide_rank1(ch, tol);
        }
        if ch.is_square() && ch.kraus().len() >= 3 {
            if let Ok(NecessaryOutcome::Violation(v)) = necessary_inner_product_check(ch, tol) {
                return Ok(v);
            }
        }
        if rank == 2 {
            let mut v = decide_rank2(ch, tol)?;
            if v.status == Status::NotPr {
                v.certificate = to_state_certificate(ch, v.certificate, tol);
            }
            return Ok(attach_state_residuals(ch, v));
        }
        if pipeline == Pipeline::Exact {
            return Err(Error::InvalidInput(format!(
                "no exact decider for Choi rank {rank}; use the oracle"
            )));
        }
    }
    cfg.validate()?;
    Ok(attach_state_residuals(ch, oracle_verdict(ch, cfg, tol)))
}

fn oracle_verdict(ch: &QuantumChannel, cfg: &OracleConfig, tol: &Tolerance) -> PRVerdict {
    let map = TensorMap::from_channel(ch);
    let outcome = match ch.field() {
        Field::Real => oracle::simple_tensor_oracle_map(&map, cfg, tol),
        Field::Complex => oracle::symmetric_tensor_oracle_map(&map, cfg, tol),
    };
    let floor = outcome.floor();
    let mut v = match outcome {
        OracleOutcome::Witness { x, y, kind, residual, .. } => {
            let cert = to_state_certificate(ch, Certificate::TensorWitness { x, y, kind }, tol);
            PRVerdict::new(Status::NotPr, Method::OracleWitness, cert).with_residual("tensor", residual)
        }
        OracleOutcome::NoWitness { exact: true, .. } => {
            PRVerdict::new(Status::Pr, Method::KernelExact, Certificate::Empty)
        }
        OracleOutcome::NoWitness { exact: false, .. } => {
            PRVerdict::new(Status::LikelyPr, Method::OracleNoWitness, Certificate::Empty)
        }
    };
    v.floor = Some(floor);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::fixture;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn assert_point(p: &SpectrumPoint, lambda: &[f64], witness: &[f64]) {
        for (z, w) in p.lambda.iter().zip(lambda) {
            assert!((z - c(*w, 0.0)).norm() < 1e-8, "{:?} vs {lambda:?}", p.lambda);
        }
        let w = CVector::from_iterator(witness.len(), witness.iter().map(|&t| c(t, 0.0))).normalize();
        assert!((w.dotc(&p.witness).norm() - 1.0).abs() < 1e-10, "witness {}", p.witness);
    }

    #[test]
    fn rank1_examples() {
        assert_eq!(decide_rank1(&fixture("identity2").unwrap(), &tol()).unwrap().status, Status::Pr);
        let mut v = CMatrix::zeros(3, 2);
        v[(0, 0)] = c(1.0, 0.0);
        v[(2, 1)] = c(0.0, 1.0);
        let iso = QuantumChannel::new(vec![v], Field::Complex).unwrap();
        assert_eq!(decide_rank1(&iso, &tol()).unwrap().method, Method::Rank1);
        assert!(matches!(
            decide_rank1(&fixture("dephasing").unwrap(), &tol()),
            Err(Error::WrongRank { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn rank2_examples() {
        let deph = fixture("dephasing").unwrap();
        let v = decide_rank2(&deph, &tol()).unwrap();
        assert_eq!(v.status, Status::NotPr);
        match &v.certificate {
            Certificate::PencilClash { lambda, x, y } => {
                assert!((lambda - c(1.0, 0.0)).norm() < 1e-7 || (lambda + c(1.0, 0.0)).norm() < 1e-7);
                assert!(verify_certificate(&deph, &v.certificate, &tol()).ok);
                assert!(x.dotc(y).norm() < 1e-10);
            }
            other => panic!("{other:?}"),
        }

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a1 = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), ZERO, ZERO, c(1.0, 0.0)]);
        let a2 = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), ZERO, ZERO, ZERO]);
        let ch = QuantumChannel::new(vec![a1, a2], Field::Complex).unwrap();
        assert_eq!(decide_rank2(&ch, &tol()).unwrap().status, Status::Pr);
        let sym = oracle::symmetric_tensor_oracle(&ch, &OracleConfig::default(), &tol()).unwrap();
        assert!(!sym.is_witness());

        assert!(matches!(
            decide_rank2(&fixture("identity2").unwrap(), &tol()),
            Err(Error::WrongRank { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn remark_counterexamples_are_not_pr() {
        for name in ["remark_rank2", "remark_rank3"] {
            let ch = fixture(name).unwrap();
            let v = decide(&ch, &OracleConfig::default(), &tol());
            assert_eq!(v.status, Status::NotPr, "{name}");
            assert!(verify_certificate(&ch, &v.certificate, &tol()).ok, "{name}");
        }
    }

    #[test]
    fn spectrum_examples() {
        let t = tol();
        let pts = match scalar_relative_spectrum(&fixture("example_2_11").unwrap(), 0, &t).unwrap() {
            ScalarSpectrum::Finite(p) => p,
            ScalarSpectrum::NotFinite => panic!("finite expected"),
        };
        assert_eq!(pts.len(), 2);
        assert_point(&pts[0], &[-1.0, 2f64.sqrt()], &[1.0, -1.0]);
        assert_point(&pts[1], &[1.0, 0.0], &[1.0, 1.0]);
        assert!(pts.iter().all(|p| p.residual <= t.residual_abs));

        let id = CMatrix::identity(2, 2);
        let ii = QuantumChannel::new(vec![id.clone(), id.clone()], Field::Complex).unwrap();
        match scalar_relative_spectrum(&ii, 0, &t).unwrap() {
            ScalarSpectrum::Finite(p) => {
                assert_eq!(p.len(), 1);
                assert!((p[0].lambda[0] - 1.0).norm() < 1e-10);
            }
            ScalarSpectrum::NotFinite => panic!("finite expected"),
        }

        let z = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]);
        let iz = QuantumChannel::new(vec![id, z], Field::Complex).unwrap();
        match scalar_relative_spectrum(&iz, 0, &t).unwrap() {
            ScalarSpectrum::Finite(p) => {
                assert_eq!(p.len(), 2);
                assert_point(&p[0], &[-1.0], &[0.0, 1.0]);
                assert_point(&p[1], &[1.0], &[1.0, 0.0]);
            }
            ScalarSpectrum::NotFinite => panic!("finite expected"),
        }

        let rect = QuantumChannel::new(vec![CMatrix::identity(3, 2)], Field::Complex).unwrap();
        assert!(matches!(scalar_relative_spectrum(&rect, 0, &t), Err(Error::NotSquare)));
    }

    #[test]
    fn joint_kernel_gives_continuum() {
        let p = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, ZERO]);
        let ch = QuantumChannel::new(vec![p.clone(), p * c(2.0, 0.0)], Field::Complex).unwrap();
        assert_eq!(scalar_relative_spectrum(&ch, 0, &tol()).unwrap(), ScalarSpectrum::NotFinite);
        assert!(matches!(necessary_inner_product_check(&ch, &tol()), Err(Error::NotFinite)));
    }

    #[test]
    fn necessary_check_examples() {
        let ex = fixture("example_2_11").unwrap();
        match necessary_inner_product_check(&ex, &tol()).unwrap() {
            NecessaryOutcome::Violation(v) => {
                assert_eq!(v.method, Method::NecessaryViolation);
                match &v.certificate {
                    Certificate::InnerProductViolation { j, lambda, mu, .. } => {
                        assert_eq!(*j, 0);
                        assert!((lambda[0] + 1.0).norm() < 1e-8 && (lambda[1] - 2f64.sqrt()).norm() < 1e-8);
                        assert!((mu[0] - 1.0).norm() < 1e-8 && mu[1].norm() < 1e-8);
                        assert!(inner_product_defect(lambda, mu) <= 1e-10);
                    }
                    other => panic!("{other:?}"),
                }
                assert!(verify_certificate(&ex, &v.certificate, &tol()).ok);
            }
            NecessaryOutcome::Pass => panic!("violation expected"),
        }
        match necessary_inner_product_check(&fixture("dephasing").unwrap(), &tol()).unwrap() {
            NecessaryOutcome::Violation(v) => {
                assert!(verify_certificate(&fixture("dephasing").unwrap(), &v.certificate, &tol()).ok)
            }
            NecessaryOutcome::Pass => panic!("violation expected"),
        }
        assert_eq!(
            necessary_inner_product_check(&fixture("identity2").unwrap(), &tol()).unwrap(),
            NecessaryOutcome::Pass
        );
    }

    #[test]
    fn skew_commutativity_examples() {
        let t = tol();
        let e1 = CVector::from_vec(vec![c(1.0, 0.0), ZERO]);
        let e2 = CVector::from_vec(vec![ZERO, c(1.0, 0.0)]);
        let ie1 = &e1 * c(0.0, 1.0);
        assert!(is_skew_commutative(std::slice::from_ref(&e1), &[ie1], &t).unwrap());
        assert!(!is_skew_commutative(std::slice::from_ref(&e1), &[e2], &t).unwrap());
        assert!(is_skew_commutative(std::slice::from_ref(&e1), &[], &t).is_err());

        let ch = fixture("example_2_6").unwrap();
        match oracle::symmetric_tensor_oracle(&ch, &OracleConfig::with_seed(2), &t).unwrap() {
            OracleOutcome::Witness { x, y, .. } => {
                let (u, v) = skew_pair(&ch, &x, &y);
                assert!(is_skew_commutative(&u, &v, &t).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dispatcher_examples() {
        let cfg = OracleConfig::default();
        let t = tol();
        let v = decide(&fixture("identity2").unwrap(), &cfg, &t);
        assert_eq!((v.status, v.method), (Status::Pr, Method::Rank1));

        let deph = fixture("dephasing").unwrap();
        let v = decide(&deph, &cfg, &t);
        assert_eq!((v.status, v.method), (Status::NotPr, Method::Rank2Exact));
        match &v.certificate {
            Certificate::StateWitness { x, y } => {
                let (img, sep) = state_residuals(&deph, x, y);
                assert!(img < 1e-12 && sep > 1.0);
                // the pair (1, ±1)/√2 up to order and phase
                for w in [x, y] {
                    assert!((w[0].norm() - w[1].norm()).abs() < 1e-10);
                }
            }
            other => panic!("{other:?}"),
        }

        let v = decide(&fixture("example_2_11").unwrap(), &cfg, &t);
        assert_eq!((v.status, v.method), (Status::NotPr, Method::NecessaryViolation));

        let v = decide(&fixture("example_2_6").unwrap(), &cfg, &t);
        assert_eq!((v.status, v.method), (Status::NotPr, Method::OracleWitness));
        assert!(verify_certificate(&fixture("example_2_6").unwrap(), &v.certificate, &t).ok);
        assert!(matches!(v.certificate, Certificate::StateWitness { .. }));
    }

    #[test]
    fn verdict_json_round_trip() {
        let v = decide(&fixture("dephasing").unwrap(), &OracleConfig::default(), &tol());
        let text = crate::io::to_json(&v);
        let back: PRVerdict = crate::io::from_json(&text).unwrap();
        assert_eq!(back, v);
        assert!(text.contains("\"STATE_WITNESS\""));
    }
}
