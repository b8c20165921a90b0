//! Finite frames and phase retrievability of vector families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermitian_eig, inv_sqrt_psd, kernel_basis, numerical_rank, outer, vec_of, CMatrix, CVector,
    Tolerance, I,
};
use crate::oracle::{self, OracleConfig, OracleOutcome, TensorMap};
use crate::rng;
use crate::Field;

/// Largest frame for which the complement property is checked exhaustively.
pub const MAX_EXHAUSTIVE: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    dim: usize,
    field: Field,
    vectors: Vec<CVector>,
}

impl Frame {
    pub fn new(dim: usize, vectors: Vec<CVector>, field: Field) -> Result<Self> {
        if dim == 0 || vectors.is_empty() {
            return Err(Error::InvalidInput("frame needs a positive dimension and vectors".into()));
        }
        for (j, f) in vectors.iter().enumerate() {
            if f.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "vector {j} has length {}, expected {dim}",
                    f.len()
                )));
            }
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput(format!("vector {j} has non-finite entries")));
            }
            if field == Field::Real && f.iter().any(|z| z.im != 0.0) {
                return Err(Error::WrongField);
            }
        }
        if vectors.iter().all(|f| f.iter().all(|z| z.norm_sqr() == 0.0)) {
            return Err(Error::InvalidInput("all frame vectors are zero".into()));
        }
        Ok(Self { dim, field, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `S = Σ f_j f_j*`
    pub fn frame_operator(&self) -> CMatrix {
        self.vectors.iter().map(|f| outer(f, f)).sum()
    }

    /// Phaseless measurements `(|⟨x, f_j⟩|²)_j`.
    pub fn measure(&self, x: &CVector) -> Vec<f64> {
        self.vectors.iter().map(|f| x.dotc(f).norm_sqr()).collect()
    }

    pub fn is_frame(&self, tol: &Tolerance) -> bool {
        let (a, b) = frame_bounds(self);
        a > tol.rank_rel * b
    }

    fn columns(&self, pick: impl Fn(usize) -> bool) -> CMatrix {
        let cols: Vec<CVector> = (0..self.len())
            .filter(|&j| pick(j))
            .map(|j| self.vectors[j].clone())
            .collect();
        if cols.is_empty() {
            CMatrix::zeros(self.dim, 0)
        } else {
            CMatrix::from_columns(&cols)
        }
    }
}

/// Optimal frame bounds: extreme eigenvalues of the frame operator.
pub fn frame_bounds(f: &Frame) -> (f64, f64) {
    let eig = hermitian_eig(&f.frame_operator(), &Tolerance::default())
        .expect("frame operator is Hermitian");
    let hi = eig.values[0];
    let lo = *eig.values.last().expect("dim ≥ 1");
    (lo.max(0.0), hi)
}

/// `{S^{−1/2} f_j}`
pub fn parseval_normalize(f: &Frame, tol: &Tolerance) -> Result<Frame> {
    if !f.is_frame(tol) {
        return Err(Error::NotAFrame);
    }
    let s = inv_sqrt_psd(&f.frame_operator(), tol)?;
    let mut vectors: Vec<CVector> = f.vectors.iter().map(|v| &s * v).collect();
    if f.field == Field::Real {
        for v in &mut vectors {
            v.iter_mut().for_each(|z| z.im = 0.0);
        }
    }
    Frame::new(f.dim, vectors, f.field)
}

/// A bipartition `(Ω, Ωᶜ)` of the frame with neither side spanning, as a bitmask of Ω.
pub fn failing_split(f: &Frame, tol: &Tolerance) -> Result<Option<u32>> {
    let n = f.len();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooManyVectors(n));
    }
    let spans = |m: &CMatrix| m.ncols() >= f.dim && numerical_rank(m, tol) == f.dim;
    // the last vector always sits in Ωᶜ, which enumerates each unordered split once
    let half = 1u32 << (n - 1);
    Ok((0..half).into_par_iter().find_first(|&mask| {
        let omega = f.columns(|j| mask >> j & 1 == 1);
        let rest = f.columns(|j| mask >> j & 1 == 0);
        !spans(&omega) && !spans(&rest)
    }))
}

/// Every bipartition has a side spanning the space (exhaustive, `N ≤ 24`).
pub fn complement_property(f: &Frame, tol: &Tolerance) -> Result<bool> {
    Ok(failing_split(f, tol)?.is_none())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PrStatus {
    Yes,
    No,
    LikelyYes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub is_frame: bool,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub is_parseval: bool,
    /// `None` when the frame is too long for the exhaustive check.
    pub complement_property: Option<bool>,
    pub phase_retrievable: PrStatus,
    #[serde(with = "crate::io::vector_pair")]
    pub witness: Option<(CVector, CVector)>,
}

/// Turns `u, v` with `L(u v* + v u*) = 0` into `x, y` with equal phaseless
/// measurements and `‖x x* − y y*‖_F = 1`.
pub fn witness_from_symmetric(u: &CVector, v: &CVector) -> (CVector, CVector) {
    let (u, v) = oracle::normalize_symmetric(u, v);
    let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ((&u + &v) * s, (&u - &v) * s)
}

fn split_witness(f: &Frame, mask: u32, tol: &Tolerance) -> (CVector, CVector) {
    // u ⊥ f_Ω and v ⊥ f_Ωᶜ, so x = u + v and y = u − v agree in modulus on every f_j
    let perp = |pick: &dyn Fn(usize) -> bool| -> CVector {
        let m = f.columns(pick);
        if m.ncols() == 0 {
            let mut e = CVector::zeros(f.dim);
            e[0] = c(1.0, 0.0);
            return e;
        }
        let mut ker = kernel_basis(&m.adjoint(), tol);
        let mut v = ker.swap_remove(0);
        if f.field == Field::Real {
            crate::linalg::fix_phase(&mut v);
            v.iter_mut().for_each(|z| z.im = 0.0);
        }
        v.normalize()
    };
    let u = perp(&|j| mask >> j & 1 == 1);
    let mut v = perp(&|j| mask >> j & 1 == 0);
    // u v* + v u* vanishes only for v ∈ iℝu
    let sym = outer(&u, &v) + outer(&v, &u);
    if sym.norm() < 1e-6 {
        v *= -I;
    }
    witness_from_symmetric(&u, &v)
}

/// Residual `(Σ_j (|⟨x,f_j⟩|² − |⟨y,f_j⟩|²)²)^{1/2}`.
pub fn witness_residual(f: &Frame, x: &CVector, y: &CVector) -> f64 {
    f.measure(x)
        .iter()
        .zip(f.measure(y))
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn is_phase_retrievable_frame(f: &Frame, cfg: &OracleConfig, tol: &Tolerance) -> FrameReport {
    let (lower_bound, upper_bound) = frame_bounds(f);
    let is_frame = lower_bound > tol.rank_rel * upper_bound;
    let is_parseval = (f.frame_operator() - CMatrix::identity(f.dim, f.dim)).norm() <= 1e-10;
    let split = failing_split(f, tol).ok();
    let complement = split.map(|s| s.is_none());

    let mut report = FrameReport {
        is_frame,
        lower_bound,
        upper_bound,
        is_parseval,
        complement_property: complement,
        phase_retrievable: PrStatus::No,
        witness: None,
    };
    if let Some(Some(mask)) = split {
        report.witness = Some(split_witness(f, mask, tol));
        return report;
    }
    if f.field == Field::Real && complement == Some(true) {
        report.phase_retrievable = PrStatus::Yes;
        return report;
    }

    let map = TensorMap::from_vectors(&f.vectors, f.dim, f.field == Field::Real)
        .expect("vector lengths were validated");
    let outcome = match f.field {
        Field::Real => oracle::simple_tensor_oracle_map(&map, cfg, tol),
        Field::Complex => oracle::symmetric_tensor_oracle_map(&map, cfg, tol),
    };
    match outcome {
        OracleOutcome::Witness { x, y, .. } => {
            let (x, y) = witness_from_symmetric(&x, &y);
            if witness_residual(f, &x, &y) < tol.residual_abs {
                report.witness = Some((x, y));
            } else {
                report.phase_retrievable = PrStatus::LikelyYes;
            }
        }
        OracleOutcome::NoWitness { exact, .. } => {
            report.phase_retrievable = if exact { PrStatus::Yes } else { PrStatus::LikelyYes };
        }
    }
    report
}

/// `N` vectors with i.i.d. standard Gaussian entries.
pub fn random_generic_frame(n: usize, count: usize, field: Field, seed: u64) -> Result<Frame> {
    let mut rng = rng::stream(seed, 0xf4a3e);
    let vectors = (0..count)
        .map(|_| rng::gaussian_vector(&mut rng, n, field))
        .collect();
    Frame::new(n, vectors, field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Exactness {
    Exact,
    UpperBound,
}

/// Minimal length `d_n` of a phase retrievable frame in dimension `n ≥ 2`.
pub fn minimal_pr_length(n: usize, field: Field) -> Result<(usize, Exactness)> {
    if n < 2 {
        return Err(Error::InvalidInput("minimal length needs n ≥ 2".into()));
    }
    Ok(match field {
        Field::Real => (2 * n - 1, Exactness::Exact),
        Field::Complex if (n - 1).is_power_of_two() => (4 * n - 4, Exactness::Exact),
        Field::Complex => (4 * n - 4, Exactness::UpperBound),
    })
}

/// The outer products `f_j f_j*` are linearly independent.
pub fn rank_one_independent(f: &Frame, tol: &Tolerance) -> bool {
    let cols: Vec<CVector> = f.vectors.iter().map(|v| vec_of(&outer(v, v))).collect();
    let m = CMatrix::from_columns(&cols);
    let gram = m.adjoint() * &m;
    numerical_rank(&gram, tol) == f.len()
}
