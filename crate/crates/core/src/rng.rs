//! Seeded randomness. Every random draw in the crate comes from a ChaCha
//! stream selected by `(seed, stream)`, so results are reproducible and
//! independent of evaluation order.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, CMatrix, CVector};
use crate::Field;

pub type Rng = ChaCha8Rng;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard Gaussian scalar: `N(0,1)` for real, `(N(0,1) + iN(0,1))/√2` for complex.
pub fn gaussian_scalar(rng: &mut Rng, field: Field) -> num_complex::Complex64 {
    match field {
        Field::Real => c(normal(rng), 0.0),
        Field::Complex => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            c(s * normal(rng), s * normal(rng))
        }
    }
}

pub fn gaussian_vector(rng: &mut Rng, n: usize, field: Field) -> CVector {
    DVector::from_fn(n, |_, _| gaussian_scalar(rng, field))
}

pub fn unit_vector(rng: &mut Rng, n: usize, field: Field) -> CVector {
    loop {
        let v = gaussian_vector(rng, n, field);
        let norm = v.norm();
        if norm > 1e-12 {
            return v.unscale(norm);
        }
    }
}

pub fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, field: Field) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_scalar(rng, field))
}

/// Haar-distributed unitary (orthogonal for the real field): QR of a Gaussian
/// matrix with the phases of `diag(R)` folded back into `Q`.
pub fn haar_unitary(rng: &mut Rng, n: usize, field: Field) -> CMatrix {
    let g = gaussian_matrix(rng, n, n, field);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    if field == Field::Real {
        q = q.map(|z| c(z.re, 0.0));
    }
    q
}
