//! Property tests over seeded random inputs.

use finrank::ensembles::{case_rng, complex_atoms, holomorphic_polynomial, matching_error, real_atoms, AtomBounds};
use finrank::linalg::{random_unitary, to_rows};
use finrank::moments::{analytic_moment_matrix, coordinate_submatrix, harmonic_moment_matrix, twist};
use finrank::polyalg::{BiPolynomial, MultiIndex};
use finrank::recovery::{numerical_rank, recover_1d};
use finrank::vandermonde::{check_annihilation, vandermonde_factor};
use finrank::weights::{decode_complex, Ambient, Weight, WeightBody};
use finrank::wiener::{atom_mass, atom_mass_closed_form, atom_mass_quadrature, fourier, project, sphere_average_check_with};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_bi(rng: &mut ChaCha8Rng, d: usize, degree: u32) -> BiPolynomial {
    BiPolynomial::from_terms(
        d,
        MultiIndex::up_to_degree(2 * d, degree).into_iter().map(|g| {
            let (a, b) = g.split(d);
            (a, b, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        }),
    )
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<Complex64> {
    (0..d).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

fn positive_atoms(rng: &mut ChaCha8Rng, d: usize, m: usize) -> Weight {
    let points: Vec<Vec<Complex64>> = (0..m).map(|_| random_point(rng, d)).collect();
    let masses: Vec<Complex64> = (0..m).map(|_| Complex64::new(rng.random_range(0.1..1.0), 0.0)).collect();
    Weight::complex_atoms(&points, &masses).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairing_is_linear(seed in any::<u64>(), s_re in -2.0..2.0f64, s_im in -2.0..2.0f64) {
        let mut rng = case_rng(seed, 0);
        let w = complex_atoms(&mut rng, 2, 3, &AtomBounds::default()).unwrap();
        let p = random_bi(&mut rng, 2, 3);
        let q = random_bi(&mut rng, 2, 3);
        let s = Complex64::new(s_re, s_im);
        let lhs = w.pair_bi(&p.add(&q.scale(s)).unwrap()).unwrap();
        let rhs = w.pair_bi(&p).unwrap() + s * w.pair_bi(&q).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn pairing_conjugate_symmetry(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 1);
        let w = positive_atoms(&mut rng, 2, 4);
        let p = random_bi(&mut rng, 2, 3);
        let a = w.pair_bi(&p.conj()).unwrap();
        let b = w.pair_bi(&p).unwrap().conj();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn uniform_box_moments_match_closed_form(a in -1.0..0.0f64, b in 0.1..1.0f64, g0 in 0u32..6, g1 in 0u32..6) {
        let w = Weight::uniform_box(Ambient::real(2), vec![(a, b), (a, 2.0 * b)], Complex64::new(1.0, 0.0)).unwrap();
        let got = w.real_moment(&MultiIndex::new(vec![g0, g1])).unwrap();
        let integral = |lo: f64, hi: f64, k: u32| (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / (k as f64 + 1.0);
        let want = integral(a, b, g0) * integral(a, 2.0 * b, g1);
        prop_assert!((got.re - want).abs() <= 1e-12 * (1.0 + want.abs()) && got.im.abs() < 1e-14);
    }

    #[test]
    fn multiplication_commutes_and_associates(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 2);
        let p = random_bi(&mut rng, 2, 2);
        let q = random_bi(&mut rng, 2, 2);
        let r = random_bi(&mut rng, 2, 1);
        let pq = p.multiply(&q).unwrap();
        prop_assert!(pq.as_sparse().max_coefficient_difference(q.multiply(&p).unwrap().as_sparse()) < 1e-12);
        let left = pq.multiply(&r).unwrap();
        let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
        prop_assert!(left.as_sparse().max_coefficient_difference(right.as_sparse()) < 1e-12);
    }

    #[test]
    fn complexify_is_a_homomorphism(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 3);
        let p = random_bi(&mut rng, 1, 3);
        let q = random_bi(&mut rng, 1, 2);
        let lhs = p.multiply(&q).unwrap().complexify();
        let rhs = p.complexify().multiply(&q.complexify()).unwrap();
        prop_assert!(lhs.as_sparse().max_coefficient_difference(rhs.as_sparse()) < 1e-12);
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        prop_assert!(close(p.eval_real(&x).unwrap(), p.complexify().eval(&x).unwrap(), 1e-12));
    }

    #[test]
    fn moment_matrix_of_positive_measure_is_psd(seed in any::<u64>(), n in 1u32..4) {
        let mut rng = case_rng(seed, 4);
        let w = positive_atoms(&mut rng, 2, 3);
        let a = analytic_moment_matrix(&w, n).unwrap();
        let scale = a.entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
        prop_assert!(a.hermitian_defect().unwrap() <= 1e-12 * scale);
        prop_assert!(a.min_hermitian_eigenvalue().unwrap() >= -1e-10 * scale);
    }

    #[test]
    fn twist_never_raises_rank(seed in any::<u64>(), deg in 0u32..4) {
        let mut rng = case_rng(seed, 5);
        let m = rng.random_range(1..=5usize);
        let w = complex_atoms(&mut rng, 1, m, &AtomBounds::default()).unwrap();
        let g = holomorphic_polynomial(&mut rng, 1, deg);
        let (tr, _) = numerical_rank(&twist(&w, &g, 2).unwrap(), 1e-8).unwrap();
        let (ur, _) = numerical_rank(&analytic_moment_matrix(&w, 2 + deg).unwrap(), 1e-8).unwrap();
        prop_assert!(tr <= ur);
    }

    #[test]
    fn rank_is_unitarily_invariant(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 6);
        let m = rng.random_range(1..=4usize);
        let w = complex_atoms(&mut rng, 2, m, &AtomBounds::default()).unwrap();
        let u = random_unitary(2, &mut rng);
        let moved = w.transform_unitary(&to_rows(&u)).unwrap();
        let r0 = numerical_rank(&analytic_moment_matrix(&w, 3).unwrap(), 1e-8).unwrap().0;
        let r1 = numerical_rank(&analytic_moment_matrix(&moved, 3).unwrap(), 1e-8).unwrap().0;
        prop_assert_eq!(r0, r1);
        prop_assert_eq!(r0, m);
    }

    #[test]
    fn coordinate_submatrix_is_marginal_matrix(seed in any::<u64>(), j in 0usize..2) {
        let mut rng = case_rng(seed, 7);
        let w = complex_atoms(&mut rng, 2, 3, &AtomBounds::default()).unwrap();
        let sub = coordinate_submatrix(&w, j, 3).unwrap();
        let marginal = analytic_moment_matrix(&w.forget_coordinate(j).unwrap(), 3).unwrap();
        prop_assert_eq!(sub.nrows(), marginal.nrows());
        prop_assert!((&sub.entries - &marginal.entries).norm() <= 1e-12 * (1.0 + marginal.entries.norm()));
    }

    #[test]
    fn realified_harmonic_rank_dominates_analytic(seed in any::<u64>(), k in 2u32..6) {
        let mut rng = case_rng(seed, 8);
        let m = rng.random_range(1..=4usize);
        let w = complex_atoms(&mut rng, 1, m, &AtomBounds::default()).unwrap();
        let h = numerical_rank(&harmonic_moment_matrix(&w.as_real().unwrap(), k).unwrap(), 1e-8).unwrap().0;
        let a = numerical_rank(&analytic_moment_matrix(&w, k).unwrap(), 1e-8).unwrap().0;
        prop_assert!(h >= a);
    }

    #[test]
    fn recovery_round_trips_and_scales(seed in any::<u64>(), s_re in 0.5..2.0f64, s_im in -1.0..1.0f64) {
        let mut rng = case_rng(seed, 9);
        let m = rng.random_range(1..=5usize);
        let w = complex_atoms(&mut rng, 1, m, &AtomBounds::default()).unwrap();
        let WeightBody::Atomic { points, masses } = w.body() else { unreachable!() };
        let truth: Vec<Vec<Complex64>> = points.iter().map(|p| decode_complex(p)).collect();
        let rep = recover_1d(&w, m + 1, 0).unwrap();
        prop_assert!(rep.support.len() <= m + 1);
        prop_assert!(rep.stage_polynomials.len() <= 1);
        let (e, assign) = matching_error(&truth, &rep.support);
        prop_assert!(e <= 1e-6, "support error {e}");
        let s = Complex64::new(s_re, s_im);
        let scaled = recover_1d(&w.scale(s).unwrap(), m + 1, 0).unwrap();
        let (e2, assign2) = matching_error(&truth, &scaled.support);
        prop_assert!(e2 <= 1e-6);
        for (i, c) in masses.iter().enumerate() {
            prop_assert!(close(rep.masses()[assign[i]], *c, 1e-6));
            prop_assert!(close(scaled.masses()[assign2[i]], s * c, 1e-6));
        }
    }

    #[test]
    fn projection_fourier_identity(seed in any::<u64>(), t in -6.0..6.0f64) {
        let mut rng = case_rng(seed, 10);
        let w = real_atoms(&mut rng, 3, 4, &AtomBounds::default()).unwrap();
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
        let zeta: Vec<f64> = v.iter().map(|x| x / n).collect();
        let lhs = fourier(&project(&w, &zeta).unwrap(), &[t]).unwrap();
        let rhs = fourier(&w, &zeta.iter().map(|z| t * z).collect::<Vec<_>>()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn atom_mass_closed_form_matches_quadrature(seed in any::<u64>(), r in 1.0..8.0f64) {
        let mut rng = case_rng(seed, 11);
        let w = real_atoms(&mut rng, 1, 3, &AtomBounds::default()).unwrap();
        let exact = atom_mass_closed_form(&w, r).unwrap();
        let quad = atom_mass_quadrature(&w, r, 6.0 * r).unwrap();
        prop_assert!((exact - quad).abs() < 1e-8, "{exact} vs {quad}");
    }

    /// Every cross term `c_j c_k e^{−R²|x_j−x_k|²/4}` is then positive and
    /// decreasing; with signed masses the gaps need not be monotone.
    #[test]
    fn atom_mass_converges_monotonically_for_positive_masses(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 12);
        let signed = real_atoms(&mut rng, 2, 4, &AtomBounds::default()).unwrap();
        let WeightBody::Atomic { points, masses } = signed.body() else { unreachable!() };
        let w = Weight::atomic(
            Ambient::real(2),
            points.clone(),
            masses.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect(),
        )
        .unwrap();
        let est = atom_mass(&w, &[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]).unwrap();
        let gaps: Vec<f64> = est.values.iter().map(|v| (v - est.limit).abs()).collect();
        prop_assert!(gaps.windows(2).all(|p| p[1] <= p[0] + 1e-15), "{gaps:?}");
    }

    #[test]
    fn sphere_average_recovers_total_square_mass(seed in any::<u64>()) {
        let mut rng = case_rng(seed, 13);
        let m = rng.random_range(1..=5usize);
        let w = real_atoms(&mut rng, 3, m, &AtomBounds::default()).unwrap();
        let WeightBody::Atomic { masses, .. } = w.body() else { unreachable!() };
        let direct: f64 = masses.iter().map(|c| c.norm_sqr()).sum();
        let (avg, _) = sphere_average_check_with(&w, 500).unwrap();
        prop_assert!((avg - direct).abs() / direct < 0.01);
    }

    #[test]
    fn vandermonde_pairing_factorizes(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = case_rng(seed, 14);
        let h1 = holomorphic_polynomial(&mut rng, n, 3);
        let h2 = holomorphic_polynomial(&mut rng, n, 3);
        let lhs = check_annihilation(&h1, &h2, n).unwrap();
        let rhs = vandermonde_factor(&h1).unwrap() * vandermonde_factor(&h2).unwrap().conj();
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }
}
