//! Quantum channels in Kraus form and their Choi matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermitian_eig, numerical_rank, unvec, vec_of, CMatrix, Tolerance,
};

/// Scalar field of the underlying Hilbert spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// A completely positive map `T ↦ Σ A_i T A_i*` from `dim_in`-square to
/// `dim_out`-square matrices. The Kraus list is the source of truth; the
/// Choi matrix is derived on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    field: Field,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>, field: Field) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidInput("Kraus operators must be nonempty".into()));
        }
        for (i, a) in kraus.iter().enumerate() {
            if a.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {i} is {}x{}, expected {dim_out}x{dim_in}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if !linalg::is_finite(a) {
                return Err(Error::InvalidInput(format!(
                    "Kraus operator {i} has non-finite entries"
                )));
            }
            if field == Field::Real && !linalg::is_real(a) {
                return Err(Error::InvalidInput(format!(
                    "Kraus operator {i} has imaginary parts but the channel is real"
                )));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            field,
            kraus,
        })
    }

    /// Builds a channel, discarding imaginary parts when `field` is real.
    /// Intended for computed operators that are real up to rounding.
    pub fn new_projected(kraus: Vec<CMatrix>, field: Field) -> Result<Self> {
        let kraus = match field {
            Field::Real => kraus
                .into_iter()
                .map(|a| a.map(|z| linalg::c(z.re, 0.0)))
                .collect(),
            Field::Complex => kraus,
        };
        Self::new(kraus, field)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    /// Same Kraus operators, relabelled as a complex channel.
    pub fn complexified(&self) -> Self {
        Self {
            field: Field::Complex,
            ..self.clone()
        }
    }

    pub fn apply(&self, t: &CMatrix) -> Result<CMatrix> {
        if t.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, channel expects {n}x{n}",
                t.nrows(),
                t.ncols(),
                n = self.dim_in
            )));
        }
        Ok(self.apply_unchecked(t))
    }

    pub(crate) fn apply_unchecked(&self, t: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus {
            out += a * t * a.adjoint();
        }
        out
    }

    /// `Φ*(S) = Σ A_i* S A_i`, the Hilbert–Schmidt adjoint.
    pub fn adjoint_apply(&self, s: &CMatrix) -> Result<CMatrix> {
        if s.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, adjoint expects {m}x{m}",
                s.nrows(),
                s.ncols(),
                m = self.dim_out
            )));
        }
        let mut out = CMatrix::zeros(self.dim_in, self.dim_in);
        for a in &self.kraus {
            out += a.adjoint() * s * a;
        }
        Ok(out)
    }

    /// Block matrix `[Φ(E_ij)]`, of size `(n·m) × (n·m)`.
    pub fn choi_matrix(&self) -> CMatrix {
        let d = self.dim_in * self.dim_out;
        let mut choi = CMatrix::zeros(d, d);
        for a in &self.kraus {
            let v = vec_of(a);
            choi += &v * v.adjoint();
        }
        choi
    }

    pub fn choi_rank(&self, tol: &Tolerance) -> usize {
        numerical_rank(&self.choi_matrix(), tol)
    }

    /// Gram matrix `[⟨A_j, A_i⟩]` of the vectorized Kraus operators.
    pub fn kraus_gram(&self) -> CMatrix {
        let r = self.kraus.len();
        CMatrix::from_fn(r, r, |i, j| linalg::hs_inner(&self.kraus[i], &self.kraus[j]))
    }

    /// Matrix `K = Σ conj(A_i) ⊗ A_i` with `vec Φ(T) = K vec T`.
    pub fn superoperator(&self) -> CMatrix {
        let mut k = CMatrix::zeros(self.dim_out * self.dim_out, self.dim_in * self.dim_in);
        for a in &self.kraus {
            k += a.conjugate().kronecker(a);
        }
        k
    }

    /// Equivalent channel with exactly `choi_rank` Kraus operators.
    pub fn minimized(&self, tol: &Tolerance) -> Result<Self> {
        let mut ch = minimal_kraus_from_choi(&self.choi_matrix(), self.dim_in, self.dim_out, tol)?;
        if self.field == Field::Real {
            ch = Self::new_projected(ch.kraus, Field::Real)?;
        }
        Ok(ch)
    }

    pub fn validate(&self, tol: &Tolerance) -> ValidationReport {
        let mut effect = CMatrix::zeros(self.dim_in, self.dim_in);
        let mut unit = CMatrix::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus {
            effect += a.adjoint() * a;
            unit += a * a.adjoint();
        }
        let tp_residual = (effect - CMatrix::identity(self.dim_in, self.dim_in)).norm();
        let unital_residual = (unit - CMatrix::identity(self.dim_out, self.dim_out)).norm();
        ValidationReport {
            is_trace_preserving: tp_residual <= tol.residual_abs,
            tp_residual,
            is_completely_positive: true,
            is_unital: unital_residual <= tol.residual_abs,
            unital_residual,
            choi_rank: self.choi_rank(tol),
        }
    }

    /// `‖C_Φ − C_Ψ‖_F`
    pub fn choi_distance(&self, other: &Self) -> Result<f64> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "channels map {}->{} and {}->{}",
                self.dim_in, self.dim_out, other.dim_in, other.dim_out
            )));
        }
        Ok((self.choi_matrix() - other.choi_matrix()).norm())
    }

    /// Channels compare equal when their Choi matrices agree.
    pub fn equals(&self, other: &Self, tol: &Tolerance) -> Result<bool> {
        let d = self.choi_distance(other)?;
        Ok(d <= tol.residual_abs * (1.0 + self.choi_matrix().norm()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_trace_preserving: bool,
    pub tp_residual: f64,
    pub is_completely_positive: bool,
    pub is_unital: bool,
    pub unital_residual: f64,
    pub choi_rank: usize,
}

/// Kraus operators from the scaled eigenvectors of a PSD Choi matrix.
pub fn minimal_kraus_from_choi(
    choi: &CMatrix,
    dim_in: usize,
    dim_out: usize,
    tol: &Tolerance,
) -> Result<QuantumChannel> {
    let d = dim_in * dim_out;
    if choi.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "Choi matrix is {}x{}, expected {d}x{d}",
            choi.nrows(),
            choi.ncols()
        )));
    }
    let eig = hermitian_eig(choi, tol)?;
    let lmin = eig.values.last().copied().unwrap_or(0.0);
    if lmin < -tol.residual_abs {
        return Err(Error::NotPsd(lmin));
    }
    let lmax = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let mut kraus = Vec::new();
    for (k, &l) in eig.values.iter().enumerate() {
        if l > tol.rank_rel * lmax && l > 0.0 {
            let v = eig.vectors.column(k).scale(l.sqrt());
            kraus.push(unvec(&v.into_owned(), dim_out, dim_in));
        }
    }
    if kraus.is_empty() {
        kraus.push(CMatrix::zeros(dim_out, dim_in));
    }
    QuantumChannel::new(kraus, Field::Complex)
}
