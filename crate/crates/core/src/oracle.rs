//! Multistart alternating searches for simple and symmetric tensors in the
//! kernel of a linear map on `n × n` matrices.
//!
//! A map is given by a matrix `K` with `vec L(T) = K vec T` (column-major
//! vec). Since `vec(x y*) = ȳ ⊗ x`, the image of a simple tensor is
//! `Σ_b ȳ_b K_b x` where `K_b` is the `b`-th block of `n` columns.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, kernel_basis, numerical_rank, realify_rows, smallest_right_singular,
    smallest_right_singular_real, smallest_singular_value, to_real, unvec, CMatrix, CVector,
    RMatrix, Tolerance, I,
};
use crate::rng;
use crate::{Field, QuantumChannel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub decision_floor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            seed: 0,
            decision_floor: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0
            || self.max_iters == 0
            || !(self.decision_floor.is_finite() && self.decision_floor > 0.0)
        {
            return Err(Error::InvalidInput(
                "oracle restarts, iterations and decision floor must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TensorKind {
    Simple,
    Symmetric,
}

/// Result of a tensor search.
///
/// `exact` marks answers that come from a kernel computation rather than the
/// multistart search. For an exact `NoWitness` the floor is `σ_min(K)`, a lower
/// bound for the objective; otherwise it is the best objective found.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Witness {
        x: CVector,
        y: CVector,
        kind: TensorKind,
        residual: f64,
        exact: bool,
    },
    NoWitness {
        floor: f64,
        exact: bool,
    },
}

impl OracleOutcome {
    pub fn is_witness(&self) -> bool {
        matches!(self, OracleOutcome::Witness { .. })
    }

    pub fn floor(&self) -> f64 {
        match self {
            OracleOutcome::Witness { residual, .. } => *residual,
            OracleOutcome::NoWitness { floor, .. } => *floor,
        }
    }
}

/// A linear map on `n × n` matrices in superoperator form.
#[derive(Debug, Clone)]
pub struct TensorMap {
    k: CMatrix,
    n: usize,
    real: bool,
    blocks: Vec<CMatrix>,
}

impl TensorMap {
    pub fn new(k: CMatrix, n: usize, real: bool) -> Result<Self> {
        if k.ncols() != n * n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "map has {} columns, expected {}",
                k.ncols(),
                n * n
            )));
        }
        let blocks = (0..n).map(|b| k.columns(b * n, n).into_owned()).collect();
        Ok(Self { k, n, real, blocks })
    }

    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self::new(ch.superoperator(), ch.dim_in(), ch.field() == Field::Real)
            .expect("superoperator has dim_in² columns")
    }

    /// The phaseless measurement map `T ↦ (⟨T f_j, f_j⟩)_j`.
    pub fn from_vectors(vectors: &[CVector], n: usize, real: bool) -> Result<Self> {
        let mut k = CMatrix::zeros(vectors.len(), n * n);
        for (j, f) in vectors.iter().enumerate() {
            if f.len() != n {
                return Err(Error::DimensionMismatch(format!("vector {j} has length {}", f.len())));
            }
            for b in 0..n {
                for a in 0..n {
                    k[(j, a + n * b)] = f[a].conj() * f[b];
                }
            }
        }
        Self::new(k, n, real)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.k
    }

    fn field(&self) -> Field {
        if self.real {
            Field::Real
        } else {
            Field::Complex
        }
    }

    /// `[K_0 x, …, K_{n−1} x]`, so that `vec L(x y*) = M_x ȳ`.
    fn left_matrix(&self, x: &CVector) -> CMatrix {
        let cols: Vec<CVector> = self.blocks.iter().map(|kb| kb * x).collect();
        CMatrix::from_columns(&cols)
    }

    /// `Σ_b ȳ_b K_b`, so that `vec L(x y*) = N_y x`.
    fn right_matrix(&self, y: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(self.k.nrows(), self.n);
        for (kb, yb) in self.blocks.iter().zip(y.iter()) {
            out += kb * yb.conj();
        }
        out
    }

    /// Real matrix of `(p, q) ↦ vec L(x y* + y x*)` with `y = p + iq`.
    fn symmetric_matrix(&self, x: &CVector) -> RMatrix {
        let m = self.left_matrix(x);
        let nx = self.right_matrix(x);
        let sum = &m + &nx;
        let diff = (&nx - &m) * I;
        let mut l = CMatrix::zeros(self.k.nrows(), 2 * self.n);
        l.columns_mut(0, self.n).copy_from(&sum);
        l.columns_mut(self.n, self.n).copy_from(&diff);
        realify_rows(&l)
    }

    pub fn apply_outer(&self, x: &CVector, y: &CVector) -> CVector {
        self.right_matrix(y) * x
    }

    pub fn simple_residual(&self, x: &CVector, y: &CVector) -> f64 {
        self.apply_outer(x, y).norm()
    }

    /// `‖L(x y* + y x*)‖ / ‖x y* + y x*‖`
    pub fn symmetric_residual(&self, x: &CVector, y: &CVector) -> f64 {
        let img = self.apply_outer(x, y) + self.apply_outer(y, x);
        let s = crate::linalg::outer(x, y) + crate::linalg::outer(y, x);
        let norm = s.norm();
        if norm == 0.0 {
            f64::INFINITY
        } else {
            img.norm() / norm
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    x: CVector,
    y: CVector,
    residual: f64,
}

fn converged(prev: f64, cur: f64, tol: &Tolerance) -> bool {
    cur <= 1e-3 * tol.residual_abs || prev - cur <= 1e-12 * prev
}

fn best_of(cands: Vec<Candidate>) -> Candidate {
    // ties resolve to the lowest restart index
    cands
        .into_iter()
        .reduce(|best, c| if c.residual < best.residual { c } else { best })
        .expect("at least one restart")
}

/// Minimizer of `‖M w‖` over unit `w` (real when `real`).
fn min_direction(m: &CMatrix, real: bool) -> (f64, CVector) {
    if real {
        let (s, v) = smallest_right_singular_real(&to_real(m));
        (s, v.map(|t| c(t, 0.0)))
    } else {
        smallest_right_singular(m)
    }
}

fn simple_restart(map: &TensorMap, cfg: &OracleConfig, tol: &Tolerance, idx: usize) -> Candidate {
    let mut rng = rng::stream(cfg.seed, idx as u64);
    let mut x = rng::unit_vector(&mut rng, map.n, map.field());
    let (mut res, w) = min_direction(&map.left_matrix(&x), map.real);
    let mut y = w.conjugate();
    for _ in 0..cfg.max_iters {
        let (r1, nx) = min_direction(&map.right_matrix(&y), map.real);
        x = nx;
        let (r2, w) = min_direction(&map.left_matrix(&x), map.real);
        y = w.conjugate();
        let prev = res;
        res = r1.min(r2);
        if converged(prev, res, tol) {
            break;
        }
    }
    let (x, y, residual) = newton_simple(map, &x.normalize(), &y.normalize(), NEWTON_STEPS);
    Candidate { x, y, residual }
}

/// Gauss-Newton steps finishing each restart.
const NEWTON_STEPS: usize = 30;

/// Minimum-norm least-squares step `J d = −F`, singular values below
/// `1e-10 σ_max` dropped.
fn least_squares_step<T>(j: nalgebra::DMatrix<T>, f: nalgebra::DVector<T>) -> Option<nalgebra::DVector<T>>
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    let svd = j.svd(true, true);
    let eps = 1e-10 * svd.singular_values.max();
    svd.solve(&(-f), eps).ok()
}

/// First of the step lengths `1, 1/2, …, 2^{−10}` whose trial improves on `current`.
fn backtrack<F>(current: f64, mut trial: F) -> Option<(CVector, CVector, f64)>
where
    F: FnMut(f64) -> Option<(CVector, CVector, f64)>,
{
    let mut t = 1.0;
    for _ in 0..=10 {
        if let Some(cand) = trial(t) {
            if cand.2 < current {
                return Some(cand);
            }
        }
        t *= 0.5;
    }
    None
}

/// `I − v v* / ‖v‖²`. Steps along `v` only rescale a bilinear residual, and
/// its value always lies in the span of those directions.
fn tangent_projector(v: &CVector) -> CMatrix {
    let n = v.len();
    CMatrix::identity(n, n) - v * v.adjoint() / c(v.norm_squared(), 0.0)
}

/// Real form of [`tangent_projector`] on `(Re v, Im v)`.
fn real_tangent_projector(v: &CVector) -> RMatrix {
    let r = DVector::from_iterator(2 * v.len(), v.iter().map(|z| z.re).chain(v.iter().map(|z| z.im)));
    RMatrix::identity(r.len(), r.len()) - &r * r.transpose() / r.norm_squared()
}

/// Gauss-Newton on the bilinear residual `vec L(x y*) = N_y x = M_x ȳ`, with
/// `(x, ȳ)` as unknowns. Keeps the best unit-normalized iterate.
fn newton_simple(map: &TensorMap, x: &CVector, y: &CVector, steps: usize) -> (CVector, CVector, f64) {
    let mut best = (x.clone(), y.clone(), map.simple_residual(x, y));
    let n = map.n;
    for _ in 0..steps {
        if best.2 == 0.0 {
            break;
        }
        let (x, y) = (&best.0, &best.1);
        let nr = map.right_matrix(y) * tangent_projector(x);
        let ml = map.left_matrix(x) * tangent_projector(&y.conjugate());
        let mut j = CMatrix::zeros(nr.nrows(), 2 * n);
        j.columns_mut(0, n).copy_from(&nr);
        j.columns_mut(n, n).copy_from(&ml);
        let Some(d) = least_squares_step(j, map.apply_outer(x, y)) else { break };
        let dx: CVector = d.rows(0, n).into_owned();
        let dy: CVector = d.rows(n, n).conjugate();
        let trial = backtrack(best.2, |t| {
            let mut nx = x + &dx * c(t, 0.0);
            let mut ny = y + &dy * c(t, 0.0);
            if map.real {
                nx = nx.map(|z| c(z.re, 0.0));
                ny = ny.map(|z| c(z.re, 0.0));
            }
            if nx.norm() == 0.0 || ny.norm() == 0.0 {
                return None;
            }
            let (nx, ny) = (nx.normalize(), ny.normalize());
            let r = map.simple_residual(&nx, &ny);
            Some((nx, ny, r))
        });
        match trial {
            Some(t) => best = t,
            None => break,
        }
    }
    best
}

/// Gauss-Newton on `vec L(x y* + y x*)`, real-bilinear and symmetric in
/// `(x, y)`, so its real Jacobian is `[S_y | S_x]`.
fn newton_symmetric(map: &TensorMap, x: &CVector, y: &CVector, steps: usize) -> (CVector, CVector, f64) {
    let mut best = (x.clone(), y.clone(), map.symmetric_residual(x, y));
    let n = map.n;
    let complex_of = |v: &DVector<f64>, off: usize| CVector::from_fn(n, |i, _| c(v[off + i], v[off + n + i]));
    for _ in 0..steps {
        if best.2 == 0.0 {
            break;
        }
        let (x, y) = (&best.0, &best.1);
        let sy = map.symmetric_matrix(y) * real_tangent_projector(x);
        let sx = map.symmetric_matrix(x) * real_tangent_projector(y);
        let mut j = RMatrix::zeros(sx.nrows(), 4 * n);
        j.columns_mut(0, 2 * n).copy_from(&sy);
        j.columns_mut(2 * n, 2 * n).copy_from(&sx);
        let img = map.apply_outer(x, y) + map.apply_outer(y, x);
        let f = DVector::from_iterator(2 * img.len(), img.iter().map(|z| z.re).chain(img.iter().map(|z| z.im)));
        let Some(d) = least_squares_step(j, f) else { break };
        let (dx, dy) = (complex_of(&d, 0), complex_of(&d, 2 * n));
        let trial = backtrack(best.2, |t| {
            let (nx, ny) = normalize_symmetric(&(x + &dx * c(t, 0.0)), &(y + &dy * c(t, 0.0)));
            let r = map.symmetric_residual(&nx, &ny);
            Some((nx, ny, r))
        });
        match trial {
            Some(t) => best = t,
            None => break,
        }
    }
    best
}

/// Continues the simple alternation from a given pair, keeping the best iterate.
pub fn polish_simple(
    map: &TensorMap,
    x: &CVector,
    y: &CVector,
    iters: usize,
) -> (CVector, CVector, f64) {
    let mut best = (x.normalize(), y.normalize(), map.simple_residual(x, y) / (x.norm() * y.norm()));
    let mut y = best.1.clone();
    for _ in 0..iters {
        let (_, nx) = min_direction(&map.right_matrix(&y), map.real);
        let (_, w) = min_direction(&map.left_matrix(&nx), map.real);
        y = w.conjugate();
        let r = map.simple_residual(&nx, &y);
        if r < best.2 {
            best = (nx, y.clone(), r);
        } else {
            break;
        }
    }
    best
}

/// Multistart alternating minimization of `‖L(x y*)‖` over unit `x, y`, each
/// restart finished by Gauss-Newton steps.
pub fn simple_search(map: &TensorMap, cfg: &OracleConfig, tol: &Tolerance) -> (CVector, CVector, f64) {
    let cands: Vec<Candidate> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| simple_restart(map, cfg, tol, i))
        .collect();
    let best = best_of(cands);
    (best.x, best.y, best.residual)
}

/// Minimizes `‖L(x y* + y x*)‖ / ‖x y* + y x*‖` over `y` for fixed `x`.
struct SymmetricStep {
    identity: TensorMap,
}

impl SymmetricStep {
    fn new(n: usize) -> Self {
        Self {
            identity: TensorMap::new(CMatrix::identity(n * n, n * n), n, false)
                .expect("square identity"),
        }
    }

    fn solve(&self, map: &TensorMap, x: &CVector, tol: &Tolerance) -> (f64, CVector) {
        let n = map.n;
        let norm_map = self.identity.symmetric_matrix(x);
        let svd = norm_map.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol.rank_rel * smax)
            .collect();
        // columns span the complement of the null direction y = i t x, scaled so
        // the normalization map becomes an isometry on them
        let mut basis = RMatrix::zeros(2 * n, keep.len());
        for (col, &i) in keep.iter().enumerate() {
            let v = v_t.row(i).transpose() / svd.singular_values[i];
            basis.set_column(col, &v);
        }
        let l = map.symmetric_matrix(x) * &basis;
        let (s, w) = smallest_right_singular_real(&l);
        let z: DVector<f64> = &basis * w;
        let y = CVector::from_fn(n, |i, _| c(z[i], z[n + i]));
        (s, y)
    }
}

fn symmetric_restart(
    map: &TensorMap,
    step: &SymmetricStep,
    cfg: &OracleConfig,
    tol: &Tolerance,
    idx: usize,
) -> Candidate {
    let mut rng = rng::stream(cfg.seed, idx as u64);
    let mut x = rng::unit_vector(&mut rng, map.n, Field::Complex);
    let (mut res, mut y) = step.solve(map, &x, tol);
    for _ in 0..cfg.max_iters {
        let (_, nx) = step.solve(map, &y, tol);
        x = nx;
        let (r, ny) = step.solve(map, &x, tol);
        y = ny;
        let prev = res;
        res = r;
        if converged(prev, res, tol) {
            break;
        }
    }
    let (x, y) = normalize_symmetric(&x, &y);
    let (x, y, residual) = newton_symmetric(map, &x, &y, NEWTON_STEPS);
    Candidate { x, y, residual }
}

/// Rescales `(x, y)` so that `‖x‖ = ‖y‖` and `‖x y* + y x*‖_F = 1`.
pub fn normalize_symmetric(x: &CVector, y: &CVector) -> (CVector, CVector) {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return (x.clone(), y.clone());
    }
    let t = (ny / nx).sqrt();
    let (x, y) = (x * c(t, 0.0), y / c(t, 0.0));
    let s = crate::linalg::outer(&x, &y) + crate::linalg::outer(&y, &x);
    let k = s.norm().sqrt();
    (x / c(k, 0.0), y / c(k, 0.0))
}

/// Multistart alternating minimization of the normalized symmetric objective.
pub fn symmetric_search(
    map: &TensorMap,
    cfg: &OracleConfig,
    tol: &Tolerance,
) -> (CVector, CVector, f64) {
    let step = SymmetricStep::new(map.n);
    let cands: Vec<Candidate> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| symmetric_restart(map, &step, cfg, tol, i))
        .collect();
    let best = best_of(cands);
    (best.x, best.y, best.residual)
}

/// Searches for unit `x, y` with `Φ(x y*) = 0`.
///
/// Kernels of dimension 0 or 1 are decided exactly. Real channels are searched
/// over real vectors.
pub fn simple_tensor_oracle(ch: &QuantumChannel, cfg: &OracleConfig, tol: &Tolerance) -> OracleOutcome {
    let map = TensorMap::from_channel(ch);
    simple_tensor_oracle_map(&map, cfg, tol)
}

pub fn simple_tensor_oracle_map(map: &TensorMap, cfg: &OracleConfig, tol: &Tolerance) -> OracleOutcome {
    let n = map.n;
    let ker = kernel_basis(&map.k, tol);
    match ker.len() {
        0 => {
            return OracleOutcome::NoWitness {
                floor: smallest_singular_value(&map.k),
                exact: true,
            }
        }
        1 => {
            let mut v = ker[0].clone();
            if map.real {
                crate::linalg::fix_phase(&mut v);
            }
            let t = unvec(&v, n, n);
            if numerical_rank(&t, tol) == 1 {
                let svd = t.svd(true, true);
                let (i, _) = svd.singular_values.argmax();
                let mut x = svd.u.expect("requested U").column(i).into_owned();
                let mut y = svd.v_t.expect("requested V^*").row(i).adjoint();
                if map.real {
                    x = x.map(|z| c(z.re, 0.0)).normalize();
                    y = y.map(|z| c(z.re, 0.0)).normalize();
                }
                let residual = map.simple_residual(&x, &y);
                return OracleOutcome::Witness {
                    x,
                    y,
                    kind: TensorKind::Simple,
                    residual,
                    exact: true,
                };
            }
            let (_, _, floor) = simple_search(map, cfg, tol);
            return OracleOutcome::NoWitness { floor, exact: true };
        }
        _ => {}
    }
    let (x, y, residual) = simple_search(map, cfg, tol);
    if residual < tol.residual_abs {
        OracleOutcome::Witness {
            x,
            y,
            kind: TensorKind::Simple,
            residual,
            exact: false,
        }
    } else {
        OracleOutcome::NoWitness {
            floor: residual,
            exact: false,
        }
    }
}

/// Searches for `x, y` with `Φ(x y* + y x*) = 0` and `‖x y* + y x*‖_F = 1`.
pub fn symmetric_tensor_oracle(
    ch: &QuantumChannel,
    cfg: &OracleConfig,
    tol: &Tolerance,
) -> Result<OracleOutcome> {
    if ch.field() != Field::Complex {
        return Err(Error::WrongField);
    }
    Ok(symmetric_tensor_oracle_map(&TensorMap::from_channel(ch), cfg, tol))
}

pub fn symmetric_tensor_oracle_map(
    map: &TensorMap,
    cfg: &OracleConfig,
    tol: &Tolerance,
) -> OracleOutcome {
    if kernel_basis(&map.k, tol).is_empty() {
        return OracleOutcome::NoWitness {
            floor: smallest_singular_value(&map.k),
            exact: true,
        };
    }
    let (x, y, residual) = symmetric_search(map, cfg, tol);
    if residual < tol.residual_abs {
        OracleOutcome::Witness {
            x,
            y,
            kind: TensorKind::Symmetric,
            residual,
            exact: false,
        }
    } else {
        OracleOutcome::NoWitness {
            floor: residual,
            exact: false,
        }
    }
}
