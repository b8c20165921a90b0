use num_complex::Complex64;
use proptest::prelude::*;

use prchannel::construct::{random_channel, random_rank2_channel, POVM};
use prchannel::decide::{decide_rank2, state_residuals, verify_certificate, Status, MIN_SEPARATION};
use prchannel::frame::{complement_property, is_phase_retrievable_frame, parseval_normalize, random_generic_frame, PrStatus};
use prchannel::linalg::{c, numerical_rank, outer, CMatrix, CVector};
use prchannel::oracle::{simple_tensor_oracle, OracleConfig};
use prchannel::spectra::{is_left_invertible, pencil_singular_set, OperatorTuple, SingularSet};
use prchannel::{minimal_kraus_from_choi, rng, Field, QuantumChannel, Tolerance};

fn field_of(b: bool) -> Field {
    if b {
        Field::Complex
    } else {
        Field::Real
    }
}

/// Brute-force complement property: every split leaves a spanning half.
fn complement_by_subsets(vs: &[CVector], n: usize, tol: &Tolerance) -> bool {
    let spans = |mask: u32, want: bool| {
        let cols: Vec<CVector> = (0..vs.len())
            .filter(|&j| (mask >> j & 1 == 1) == want)
            .map(|j| vs[j].clone())
            .collect();
        !cols.is_empty() && numerical_rank(&CMatrix::from_columns(&cols), tol) == n
    };
    (0..1u32 << vs.len()).all(|m| spans(m, true) || spans(m, false))
}

fn conjugated(ch: &QuantumChannel, u: &CMatrix, v: &CMatrix) -> QuantumChannel {
    let ops = ch.kraus().iter().map(|a| u * a * v.adjoint()).collect();
    QuantumChannel::new_projected(ops, ch.field()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn left_invertibility_matches_planted_kernel(seed in any::<u64>(), n in 1usize..4, k in 1usize..4, plant: bool) {
        let tol = Tolerance::default();
        let mut r = rng::stream(seed, 1);
        let col = (seed % n as u64) as usize;
        let ops: Vec<CMatrix> = (0..k)
            .map(|_| {
                let mut a = rng::gaussian_matrix(&mut r, n, n, Field::Complex);
                if plant {
                    a.column_mut(col).fill(c(0.0, 0.0));
                }
                a
            })
            .collect();
        let t = OperatorTuple::new(ops).unwrap();
        prop_assert_eq!(is_left_invertible(&t, &tol), !plant);
    }

    #[test]
    fn square_pencil_roots_are_generalized_eigenvalues(seed in any::<u64>(), n in 1usize..5) {
        let tol = Tolerance::default();
        let mut r = rng::stream(seed, 2);
        let p = rng::gaussian_matrix(&mut r, n, n, Field::Complex);
        let q = rng::gaussian_matrix(&mut r, n, n, Field::Complex);
        let set = pencil_singular_set(&p, &q, &tol).unwrap();
        let SingularSet::Finite(mut roots) = set else { panic!("generic square pencil is finite") };
        // det(P + λQ) = 0 ⇔ λ is an eigenvalue of −Q⁻¹P
        let m = -(q.clone().try_inverse().unwrap() * &p);
        let mut eig: Vec<Complex64> = m.schur().eigenvalues().unwrap().iter().copied().collect();
        let key = |z: &Complex64| (z.re, z.im);
        roots.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        eig.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        prop_assert_eq!(roots.len(), eig.len());
        for (a, b) in roots.iter().zip(&eig) {
            prop_assert!((a - b).norm() <= 1e-6 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn complement_property_matches_brute_force(seed in any::<u64>(), n in 2usize..4, extra in 0usize..4, complex: bool) {
        let tol = Tolerance::default();
        let field = field_of(complex);
        let mut f = random_generic_frame(n, n + extra, field, seed).unwrap();
        if extra > 1 {
            // a repeated vector makes failing splits likelier
            let mut vs = f.vectors().to_vec();
            vs[1] = vs[0].clone() * c(2.0, 0.0);
            f = prchannel::frame::Frame::new(n, vs, field).unwrap();
        }
        prop_assert_eq!(complement_property(&f, &tol).unwrap(), complement_by_subsets(f.vectors(), n, &tol));
    }

    #[test]
    fn real_pr_iff_complement_property(seed in any::<u64>(), n in 2usize..4, extra in 0usize..4) {
        let tol = Tolerance::default();
        let f = random_generic_frame(n, n + extra, Field::Real, seed).unwrap();
        let cfg = OracleConfig::with_seed(seed);
        let pr = is_phase_retrievable_frame(&f, &cfg, &tol).phase_retrievable == PrStatus::Yes;
        prop_assert_eq!(pr, complement_by_subsets(f.vectors(), n, &tol));
    }

    #[test]
    fn parseval_normalization_preserves_pr(seed in any::<u64>(), n in 2usize..4, extra in 0usize..4, complex: bool) {
        let tol = Tolerance::default();
        let cfg = OracleConfig { restarts: 16, ..OracleConfig::with_seed(seed) };
        let f = random_generic_frame(n, n + extra, field_of(complex), seed).unwrap();
        let g = parseval_normalize(&f, &tol).unwrap();
        let (a, b) = prchannel::frame::frame_bounds(&g);
        prop_assert!((a - 1.0).abs() < 1e-10 && (b - 1.0).abs() < 1e-10);
        let before = is_phase_retrievable_frame(&f, &cfg, &tol).phase_retrievable == PrStatus::No;
        let after = is_phase_retrievable_frame(&g, &cfg, &tol).phase_retrievable == PrStatus::No;
        prop_assert_eq!(before, after);
    }

    #[test]
    fn rank2_certificates_verify(seed in any::<u64>(), n in 2usize..4, complex: bool) {
        let tol = Tolerance::default();
        let ch = random_rank2_channel(n, n, field_of(complex), true, seed, &tol).unwrap();
        let v = decide_rank2(&ch, &tol).unwrap();
        prop_assert_eq!(v.status, Status::NotPr);
        prop_assert!(verify_certificate(&ch, &v.certificate, &tol).ok);
        if let prchannel::decide::Certificate::PencilClash { x, y, .. } = &v.certificate {
            let tx = outer(x, y);
            let img = ch.apply(&tx).unwrap();
            prop_assert!(img.norm() <= 1e-8 * tx.norm());
        }
    }

    #[test]
    fn rank2_status_is_unitarily_covariant(seed in any::<u64>(), n in 2usize..4, clash: bool, complex: bool) {
        let tol = Tolerance::default();
        let field = field_of(complex);
        let ch = random_rank2_channel(n, n, field, clash, seed, &tol).unwrap();
        let mut r = rng::stream(seed, 3);
        let u = rng::haar_unitary(&mut r, n, field);
        let w = rng::haar_unitary(&mut r, n, field);
        let a = decide_rank2(&ch, &tol).unwrap();
        let b = decide_rank2(&conjugated(&ch, &u, &w), &tol).unwrap();
        prop_assert_eq!(a.status, b.status);
    }

    #[test]
    fn state_witnesses_separate(seed in any::<u64>(), n in 2usize..4) {
        let tol = Tolerance::default();
        let cfg = OracleConfig::with_seed(seed);
        let ch = random_rank2_channel(n, n, Field::Complex, true, seed, &tol).unwrap();
        let v = prchannel::decide::decide(&ch, &cfg, &tol);
        prop_assert_eq!(v.status, Status::NotPr);
        if let prchannel::decide::Certificate::StateWitness { x, y } = &v.certificate {
            let (img, sep) = state_residuals(&ch, x, y);
            prop_assert!(img <= 1e-8 && sep >= MIN_SEPARATION, "{img} {sep}");
        }
    }

    #[test]
    fn oracle_is_deterministic(seed in any::<u64>(), n in 2usize..4, r in 2usize..5) {
        let tol = Tolerance::default();
        let ch = random_channel(n, n, r, Field::Complex, seed, &tol).unwrap();
        let cfg = OracleConfig { restarts: 8, ..OracleConfig::with_seed(seed) };
        prop_assert_eq!(simple_tensor_oracle(&ch, &cfg, &tol), simple_tensor_oracle(&ch, &cfg, &tol));
    }

    #[test]
    fn povm_completion_sums_to_identity(seed in any::<u64>(), n in 1usize..5, k in 1usize..8, complex: bool) {
        let tol = Tolerance::default();
        let mut r = rng::stream(seed, 4);
        let vs: Vec<CVector> = (0..k).map(|_| rng::gaussian_vector(&mut r, n, field_of(complex))).collect();
        let povm = POVM::scale_and_complete(&vs, &tol).unwrap();
        let (dev, lmin) = povm.defects(&tol).unwrap();
        prop_assert!(dev <= 1e-10 && lmin >= -1e-10, "{dev} {lmin}");
        prop_assert_eq!(povm.rank_one_count, k);
    }

    #[test]
    fn choi_round_trip(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, r in 1usize..5, complex: bool) {
        prop_assume!(r * m >= n);
        let tol = Tolerance::default();
        let ch = random_channel(n, m, r, field_of(complex), seed, &tol).unwrap();
        let back = minimal_kraus_from_choi(&ch.choi_matrix(), n, m, &tol).unwrap();
        prop_assert!(ch.choi_distance(&back).unwrap() <= 1e-10);
        prop_assert_eq!(back.kraus().len(), ch.choi_rank(&tol));
    }
}
