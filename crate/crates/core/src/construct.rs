//! Channels and observables built from frames, plus the named fixtures.

use serde::{Deserialize, Serialize};

use crate::decide::{state_residuals, Status};
use crate::error::{Error, Result};
use crate::frame::{self, Frame, PrStatus};
use crate::linalg::{
    c, hermitian_eig, inv_sqrt_psd, numerical_rank, outer, sqrt_psd, vec_of, CMatrix, CVector,
    Tolerance, ONE, ZERO,
};
use crate::oracle::OracleConfig;
use crate::rng::{self, Rng};
use crate::{Field, QuantumChannel};

/// Maximum frame re-draws when extending to a phase retrievable frame.
pub const FRAME_EXTENSION_DRAWS: usize = 50;
/// Maximum resamples when the sampled rank-one parts are dependent.
pub const RANKR_RESAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub struct POVM {
    pub dim: usize,
    #[serde(with = "crate::io::matrix_list")]
    pub elements: Vec<CMatrix>,
    /// The first `rank_one_count` elements are `c² f f*`.
    pub rank_one_count: usize,
}

impl POVM {
    /// `{c² f_j f_j*}` with `c² = 1/λ_max(Σ f_j f_j*)`, completed by `I − c² Σ f_j f_j*`
    /// when that remainder is nonzero.
    pub fn scale_and_complete(vectors: &[CVector], tol: &Tolerance) -> Result<Self> {
        let dim = vectors
            .first()
            .ok_or_else(|| Error::InvalidInput("no observables".into()))?
            .len();
        let rank_one: Vec<CMatrix> = vectors.iter().map(|f| outer(f, f)).collect();
        let total: CMatrix = rank_one.iter().sum();
        let lmax = hermitian_eig(&total, tol)?.values[0];
        if lmax <= 0.0 {
            return Err(Error::NotAFrame);
        }
        let scale = c(1.0 / lmax, 0.0);
        let mut elements: Vec<CMatrix> = rank_one.into_iter().map(|f| f * scale).collect();
        let rest = CMatrix::identity(dim, dim) - total * scale;
        if rest.norm() > tol.residual_abs {
            elements.push(rest);
        }
        Ok(Self { dim, elements, rank_one_count: vectors.len() })
    }

    /// `(‖Σ F − I‖_F, min eigenvalue over all elements)`
    pub fn defects(&self, tol: &Tolerance) -> Result<(f64, f64)> {
        let sum: CMatrix = self.elements.iter().sum();
        let dev = (sum - CMatrix::identity(self.dim, self.dim)).norm();
        let mut lmin = f64::INFINITY;
        for f in &self.elements {
            lmin = lmin.min(*hermitian_eig(f, tol)?.values.last().expect("dim ≥ 1"));
        }
        Ok((dev, lmin))
    }

    /// Phaseless data `⟨Φ(ρ), F_j⟩` of a state after the channel.
    pub fn measure(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|f| crate::linalg::hs_inner(rho, f).re)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub channel: QuantumChannel,
    pub povm: POVM,
    pub claimed_status: Status,
    #[serde(with = "crate::io::vector_pair")]
    pub witness: Option<(CVector, CVector)>,
}

fn tp_normalize(ops: Vec<CMatrix>, field: Field, tol: &Tolerance) -> Result<QuantumChannel> {
    let s: CMatrix = ops.iter().map(|a| a.adjoint() * a).sum();
    let s_inv = inv_sqrt_psd(&s, tol)?;
    QuantumChannel::new_projected(ops.iter().map(|a| a * &s_inv).collect(), field)
}

/// Kraus operators `ρ_j = f_j f_j*`, or `ρ_j S^{−1/2}` with `S = Σ ρ_j²` when `normalize`.
pub fn projector_channel_from_frame(f: &Frame, normalize: bool, tol: &Tolerance) -> Result<QuantumChannel> {
    if !f.is_frame(tol) {
        return Err(Error::NotAFrame);
    }
    let rho: Vec<CMatrix> = f.vectors().iter().map(|v| outer(v, v)).collect();
    if normalize {
        tp_normalize(rho, f.field(), tol)
    } else {
        QuantumChannel::new_projected(rho, f.field())
    }
}

fn accept_pr(status: PrStatus) -> bool {
    matches!(status, PrStatus::Yes | PrStatus::LikelyYes)
}

/// Appends Gaussian vectors to `base` until `total` vectors form a phase
/// retrievable frame, redrawing the tail up to [`FRAME_EXTENSION_DRAWS`] times.
fn extend_to_pr_frame(
    base: &[CVector],
    n: usize,
    total: usize,
    field: Field,
    rng: &mut Rng,
    tol: &Tolerance,
) -> Result<Vec<CVector>> {
    let cfg = OracleConfig { restarts: 16, ..OracleConfig::with_seed(0) };
    for _ in 0..FRAME_EXTENSION_DRAWS {
        let mut vs = base.to_vec();
        while vs.len() < total {
            vs.push(rng::gaussian_vector(rng, n, field));
        }
        let f = Frame::new(n, vs.clone(), field)?;
        if accept_pr(frame::is_phase_retrievable_frame(&f, &cfg, tol).phase_retrievable) {
            return Ok(vs);
        }
    }
    Err(Error::FrameExtensionFailed(FRAME_EXTENSION_DRAWS))
}

fn d_n(n: usize, field: Field) -> Result<usize> {
    Ok(frame::minimal_pr_length(n, field)?.0)
}

/// Norm of the rank-one Kraus operator in [`rank2_injective_plus_rankone`].
pub const RANK_ONE_NORM: f64 = 0.6;

/// `A₂ = c v u*` rank one with `c < 1`, `A₁ = (I − A₂*A₂)^{1/2}` injective,
/// and `d_n` rank-one observables `f_j = A₁^{−1} u_j` from a phase retrievable
/// frame `{u, u₂, …}`.
pub fn rank2_injective_plus_rankone(n: usize, field: Field, seed: u64, tol: &Tolerance) -> Result<ConstructionResult> {
    if n < 2 {
        return Err(Error::InvalidInput("rank-2 construction needs n ≥ 2".into()));
    }
    let mut rng = rng::stream(seed, 0xa2);
    let u = rng::unit_vector(&mut rng, n, field);
    let v = rng::unit_vector(&mut rng, n, field);
    let a2 = outer(&v, &u) * c(RANK_ONE_NORM, 0.0);
    let a1 = sqrt_psd(&(CMatrix::identity(n, n) - a2.adjoint() * &a2), tol)?;
    let channel = QuantumChannel::new_projected(vec![a1.clone(), a2], field)?;

    let us = extend_to_pr_frame(&[u], n, d_n(n, field)?, field, &mut rng, tol)?;
    let a1_inv = a1.clone().try_inverse().ok_or(Error::NotIndependent)?;
    let fs: Vec<CVector> = us.iter().map(|uj| project(&(&a1_inv * uj), field)).collect();
    Ok(ConstructionResult {
        channel,
        povm: POVM::scale_and_complete(&fs, tol)?,
        claimed_status: Status::Pr,
        witness: None,
    })
}

fn project(v: &CVector, field: Field) -> CVector {
    match field {
        Field::Real => v.map(|z| c(z.re, 0.0)),
        Field::Complex => v.clone(),
    }
}

/// Smallest eigenvalue of `M = I + [|⟨u_i, f_j⟩|²]`.
pub fn m_matrix_min_eigenvalue(us: &[CVector], fs: &[CVector], tol: &Tolerance) -> Result<f64> {
    let k = us.len();
    let m = CMatrix::from_fn(k, k, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        c(d + fs[j].dotc(&us[i]).norm_sqr(), 0.0)
    });
    let sym = (&m + m.adjoint()) * c(0.5, 0.0);
    Ok(*hermitian_eig(&sym, tol)?.values.last().expect("k ≥ 1"))
}

/// Positive invertible `A_r` and rank-one positive `A_j = u_j u_j*` with
/// `u_j = A_r f_j`, made trace preserving by `A_i S^{−1/2}`. The observables are
/// the `f_j` together with `A_r^{−1}` of a phase retrievable extension of the `u_j`.
pub fn rankr_positive_construction(
    n: usize,
    r: usize,
    field: Field,
    seed: u64,
    tol: &Tolerance,
) -> Result<ConstructionResult> {
    if n < 2 || r < 2 || r > n * n {
        return Err(Error::InvalidInput(format!("need n ≥ 2 and 2 ≤ r ≤ n² = {}, got r = {r}", n * n)));
    }
    let mut rng = rng::stream(seed, 0xa7);
    for _ in 0..RANKR_RESAMPLES {
        let g = rng::gaussian_matrix(&mut rng, n, n, field);
        let ar = (&g * g.adjoint()) * c(1.0 / n as f64, 0.0) + CMatrix::identity(n, n) * c(0.5, 0.0);
        let fs: Vec<CVector> = (0..r - 1).map(|_| rng::unit_vector(&mut rng, n, field)).collect();
        let us: Vec<CVector> = fs.iter().map(|f| &ar * f).collect();
        let mut ops: Vec<CMatrix> = us.iter().map(|u| outer(u, u)).collect();
        ops.push(ar.clone());
        let span = CMatrix::from_columns(&ops.iter().map(vec_of).collect::<Vec<_>>());
        if numerical_rank(&span, tol) < r {
            continue;
        }
        let lmin = m_matrix_min_eigenvalue(&us, &fs, tol)?;
        if lmin < 1.0 - 1e-10 {
            continue;
        }
        let channel = tp_normalize(ops, field, tol)?;
        let total = d_n(n, field)?.max(r - 1);
        let ext = extend_to_pr_frame(&us, n, total, field, &mut rng, tol)?;
        let ar_inv = ar.clone().try_inverse().ok_or(Error::NotIndependent)?;
        let mut obs = fs.clone();
        obs.extend(ext[r - 1..].iter().map(|u| project(&(&ar_inv * u), field)));
        return Ok(ConstructionResult {
            channel,
            povm: POVM::scale_and_complete(&obs, tol)?,
            claimed_status: Status::Pr,
            witness: None,
        });
    }
    Err(Error::DependentOuterProducts(RANKR_RESAMPLES))
}

/// Index `k` such that `I ∈ span{f_j f_j* : j ≠ k}`, if any. Spans shrink with
/// the index set, so the maximal proper subsets decide every proper subset.
pub fn identity_span_violation(vectors: &[CVector], tol: &Tolerance) -> Option<usize> {
    let n = vectors.first()?.len();
    let id = vec_of(&CMatrix::identity(n, n));
    (0..vectors.len()).find(|&k| {
        let mut cols: Vec<CVector> = vectors
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, f)| vec_of(&outer(f, f)))
            .collect();
        let without = if cols.is_empty() { 0 } else { numerical_rank(&CMatrix::from_columns(&cols), tol) };
        cols.push(id.clone());
        numerical_rank(&CMatrix::from_columns(&cols), tol) == without
    })
}

/// `Φ(T) = Σ_{j<r} A_j T A_j* + U T U*` with `A_j = f_j f_j* U`, made trace
/// preserving on the right; the observables `f_j f_j*` retrieve every pure state.
pub fn channel_from_observables(
    f: &Frame,
    r: usize,
    seed: u64,
    cfg: &OracleConfig,
    tol: &Tolerance,
) -> Result<ConstructionResult> {
    let n = f.dim();
    let big_n = f.len();
    if r == 0 || r > big_n {
        return Err(Error::InvalidInput(format!("r must lie in 1..={big_n}, got {r}")));
    }
    if !frame::rank_one_independent(f, tol) {
        return Err(Error::NotIndependent);
    }
    if !accept_pr(frame::is_phase_retrievable_frame(f, cfg, tol).phase_retrievable) {
        return Err(Error::NotPhaseRetrievableFrame);
    }
    if let Some(k) = identity_span_violation(f.vectors(), tol) {
        return Err(Error::SpanConditionFailed(k));
    }
    let u = if seed == 0 {
        CMatrix::identity(n, n)
    } else {
        rng::haar_unitary(&mut rng::stream(seed, 0xb3), n, f.field())
    };
    let mut ops: Vec<CMatrix> = f.vectors()[..r - 1].iter().map(|v| outer(v, v) * &u).collect();
    ops.push(u);
    let channel = tp_normalize(ops, f.field(), tol)?;
    let rank = channel.choi_rank(tol);
    if rank != r {
        return Err(Error::WrongRank { expected: r, found: rank });
    }
    Ok(ConstructionResult {
        channel,
        povm: POVM::scale_and_complete(f.vectors(), tol)?,
        claimed_status: Status::Pr,
        witness: None,
    })
}

/// `Φ(T) = Σ P_i T P_i` for the coordinate blocks of sizes `dims`, with the
/// collision `x, y = (e_a ± e_b)/√2` from the first two blocks.
pub fn orthogonal_projection_channel(dims: &[usize]) -> Result<ConstructionResult> {
    if dims.len() < 2 {
        return Err(Error::BadPartition("need at least two blocks".into()));
    }
    if dims.contains(&0) {
        return Err(Error::BadPartition("blocks must be nonempty".into()));
    }
    let n: usize = dims.iter().sum();
    let mut ops = Vec::new();
    let mut start = 0;
    for &d in dims {
        let mut p = CMatrix::zeros(n, n);
        for i in start..start + d {
            p[(i, i)] = ONE;
        }
        ops.push(p);
        start += d;
    }
    let channel = QuantumChannel::new(ops, Field::Complex)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = (0, dims[0]);
    let x = CVector::from_fn(n, |i, _| if i == a || i == b { c(s, 0.0) } else { ZERO });
    let y = CVector::from_fn(n, |i, _| if i == a { c(s, 0.0) } else if i == b { c(-s, 0.0) } else { ZERO });
    let basis: Vec<CVector> = (0..n)
        .map(|i| CVector::from_fn(n, |k, _| if k == i { ONE } else { ZERO }))
        .collect();
    Ok(ConstructionResult {
        channel,
        povm: POVM::scale_and_complete(&basis, &Tolerance::default())?,
        claimed_status: Status::NotPr,
        witness: Some((x, y)),
    })
}

/// Checks a construction's claim: decide for PR claims, exact witness re-verification
/// (`‖Φ(ρ_x)−Φ(ρ_y)‖ ≤ 1e-10`, `‖ρ_x−ρ_y‖ ≥ 0.5`) for NOT_PR claims.
pub fn verify_claim(res: &ConstructionResult, cfg: &OracleConfig, tol: &Tolerance) -> bool {
    match res.claimed_status {
        Status::NotPr => res.witness.as_ref().is_some_and(|(x, y)| {
            let (img, sep) = state_residuals(&res.channel, x, y);
            img <= 1e-10 && sep >= 0.5
        }),
        _ => {
            let v = crate::decide::decide(&res.channel, cfg, tol);
            match v.status {
                Status::Pr => true,
                Status::LikelyPr => v.floor.is_some_and(|f| f > cfg.decision_floor),
                Status::NotPr => false,
            }
        }
    }
}

/// Random TP channel of Choi rank 2. With `clash`, a pencil clash is planted at
/// a random `λ` (real for the real field), making the channel not phase retrievable.
pub fn random_rank2_channel(
    dim_in: usize,
    dim_out: usize,
    field: Field,
    clash: bool,
    seed: u64,
    tol: &Tolerance,
) -> Result<QuantumChannel> {
    let mut rng = rng::stream(seed, 0xc1);
    let a2 = rng::gaussian_matrix(&mut rng, dim_out, dim_in, field);
    let mut a1 = rng::gaussian_matrix(&mut rng, dim_out, dim_in, field);
    if clash {
        let lambda = rng::gaussian_scalar(&mut rng, field);
        let x = rng::unit_vector(&mut rng, dim_in, field);
        let y = rng::unit_vector(&mut rng, dim_in, field);
        // force A₁x = −λA₂x and A₁y = A₂y/λ̄
        let xy = CMatrix::from_columns(&[x.clone(), y.clone()]);
        let target = CMatrix::from_columns(&[-(&a2 * &x) * lambda, (&a2 * &y) / lambda.conj()]);
        let pinv = xy.clone().pseudo_inverse(1e-12).map_err(|e| Error::InvalidInput(e.into()))?;
        a1 += (target - &a1 * &xy) * pinv;
    }
    tp_normalize(vec![a1, a2], field, tol)
}

/// Random TP channel with `r` Gaussian Kraus operators.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    r: usize,
    field: Field,
    seed: u64,
    tol: &Tolerance,
) -> Result<QuantumChannel> {
    if r == 0 || r * dim_out < dim_in {
        return Err(Error::InvalidInput(format!(
            "{r} Kraus operators of size {dim_out}x{dim_in} cannot be trace preserving"
        )));
    }
    let mut rng = rng::stream(seed, 0xc0);
    let ops = (0..r)
        .map(|_| rng::gaussian_matrix(&mut rng, dim_out, dim_in, field))
        .collect();
    tp_normalize(ops, field, tol)
}

/// The named channels used throughout the tests and the CLI.
pub fn fixture(name: &str) -> Result<QuantumChannel> {
    let tol = Tolerance::default();
    let r = |rows: usize, cols: usize, v: &[f64]| {
        CMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| c(x, 0.0)))
    };
    match name {
        "example_2_11" => {
            let a = 1.0 / 3f64.sqrt();
            let b = 1.0 / 6f64.sqrt();
            QuantumChannel::new(
                vec![
                    r(2, 2, &[a, 0.0, 0.0, a]),
                    r(2, 2, &[0.0, a, a, 0.0]),
                    r(2, 2, &[b, -b, -b, b]),
                ],
                Field::Complex,
            )
        }
        "dephasing" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            QuantumChannel::new(vec![r(2, 2, &[s, 0.0, 0.0, s]), r(2, 2, &[s, 0.0, 0.0, -s])], Field::Complex)
        }
        "example_2_6" => projector_channel_from_frame(&three_vector_frame(Field::Complex), true, &tol),
        "remark_rank2" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            QuantumChannel::new(vec![r(2, 2, &[s, 0.0, 0.0, s]), r(2, 2, &[0.0, s, s, 0.0])], Field::Complex)
        }
        "remark_rank3" => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            QuantumChannel::new(
                vec![r(2, 2, &[s, 0.0, 0.0, s]), r(2, 2, &[0.0, s, 0.0, 0.0]), r(2, 2, &[0.0, 0.0, s, 0.0])],
                Field::Complex,
            )
        }
        _ => {
            let n = name
                .strip_prefix("identity")
                .map(|rest| if rest.is_empty() { Ok(2) } else { rest.parse::<usize>() });
            match n {
                Some(Ok(n)) if n >= 1 => QuantumChannel::new(vec![CMatrix::identity(n, n)], Field::Complex),
                _ => Err(Error::UnknownFixture(name.to_string())),
            }
        }
    }
}

pub const FIXTURE_NAMES: [&str; 6] = [
    "example_2_11",
    "dephasing",
    "example_2_6",
    "remark_rank2",
    "remark_rank3",
    "identity2",
];

/// `{e₁, e₂, e₁ + e₂}` in dimension 2.
pub fn three_vector_frame(field: Field) -> Frame {
    let e = |a: f64, b: f64| CVector::from_vec(vec![c(a, 0.0), c(b, 0.0)]);
    Frame::new(2, vec![e(1.0, 0.0), e(0.0, 1.0), e(1.0, 1.0)], field).expect("valid frame")
}
