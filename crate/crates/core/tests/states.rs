use std::f64::consts::FRAC_PI_4;

use cvqkd::states::{
    coherent_fock, linspace, mixture_weights, psi_state, purification_state, truncation_for, wigner, FockVector,
};
use cvqkd::Constellation;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

fn outer_mixture(states: &[FockVector]) -> DMatrix<Complex64> {
    let d = states[0].amplitudes().len();
    let w = 1.0 / states.len() as f64;
    let mut rho = DMatrix::zeros(d, d);
    for s in states {
        let a = s.amplitudes();
        for i in 0..d {
            for j in 0..d {
                rho[(i, j)] += a[i] * a[j].conj() * w;
            }
        }
    }
    rho
}

fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let eig = SymmetricEigen::new(a - b);
    0.5 * eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
}

fn reduced_b(constellation: Constellation, alpha: f64, n_cut: usize) -> DMatrix<Complex64> {
    let state = purification_state(constellation, alpha, n_cut).unwrap();
    let d = n_cut + 1;
    DMatrix::from_row_slice(d, d, &state.reduced_density_b())
}

#[test]
fn two_state_partial_trace_is_the_mixture() {
    for alpha in [0.1, 0.5, 1.0] {
        let n_cut = truncation_for(alpha * alpha);
        let gamma = Complex64::from_polar(alpha, -FRAC_PI_4);
        let mixture = outer_mixture(&[coherent_fock(gamma, n_cut).unwrap(), coherent_fock(-gamma, n_cut).unwrap()]);
        let dist = trace_distance(&reduced_b(Constellation::Two, alpha, n_cut), &mixture);
        assert!(dist <= 1e-8, "alpha {alpha}: trace distance {dist:e}");
    }
}

#[test]
fn four_state_partial_trace_is_the_mixture() {
    for alpha in [0.1, 0.5, 1.0] {
        let n_cut = truncation_for(alpha * alpha);
        let gamma = Complex64::from_polar(alpha, -FRAC_PI_4);
        let states: Vec<FockVector> = [gamma, -gamma, gamma.conj(), -gamma.conj()]
            .iter()
            .map(|&b| coherent_fock(b, n_cut).unwrap())
            .collect();
        let dist = trace_distance(&reduced_b(Constellation::Four, alpha, n_cut), &outer_mixture(&states));
        assert!(dist <= 1e-8, "alpha {alpha}: trace distance {dist:e}");
    }
}

#[test]
fn two_state_psi_zero_sits_in_the_first_quadrant() {
    let alpha = 0.1;
    let n_cut = truncation_for(alpha * alpha);
    let psi0 = psi_state(Constellation::Two, 0, alpha, n_cut).unwrap();
    let mean = psi0.expect_annihilation();
    assert!(mean.re > 0.0 && mean.im > 0.0, "<a> = {mean}");

    let axis = linspace(-3.0, 3.0, 121);
    let (x, p, _) = wigner(&psi0, &axis, &axis).unwrap().argmax();
    assert!(x > 0.0 && p > 0.0, "peak at ({x}, {p})");
}

#[test]
fn four_state_wigner_functions_are_quarter_turns() {
    let alpha = 0.5f64.sqrt();
    let n_cut = truncation_for(0.5);
    let axis = linspace(-4.0, 4.0, 41);
    let last = axis.len() - 1;
    let grids: Vec<_> = (0..4)
        .map(|k| wigner(&psi_state(Constellation::Four, k, alpha, n_cut).unwrap(), &axis, &axis).unwrap())
        .collect();
    for k in 0..4 {
        let (cur, next) = (&grids[k], &grids[(k + 1) % 4]);
        let mut worst: f64 = 0.0;
        for i in 0..axis.len() {
            for j in 0..axis.len() {
                // W_{k+1}(x, p) = W_k(p, −x)
                worst = worst.max((next.at(i, j) - cur.at(j, last - i)).abs());
            }
        }
        assert!(worst < 1e-10, "k = {k}: max deviation {worst:e}");
    }
}

#[test]
fn wigner_grids_integrate_to_one() {
    let axis = linspace(-7.0, 7.0, 141);
    for constellation in [Constellation::Two, Constellation::Four] {
        for k in 0..constellation.size() {
            let psi = psi_state(constellation, k, 0.5, truncation_for(0.25)).unwrap();
            let grid = wigner(&psi, &axis, &axis).unwrap();
            assert!(grid.values.iter().all(|v| v.is_finite()));
            assert!((grid.integral() - 1.0).abs() < 1e-6, "integral {}", grid.integral());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixture_weights_sum_to_one(alpha in 1e-3f64..2.0) {
        for constellation in [Constellation::Two, Constellation::Four] {
            let w = mixture_weights(constellation, alpha).unwrap();
            prop_assert!(w.weights.iter().all(|&v| v >= 0.0));
            prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_basis_is_orthonormal(alpha in 0.05f64..2.0) {
        let n_cut = truncation_for(alpha * alpha);
        for constellation in [Constellation::Two, Constellation::Four] {
            let basis: Vec<_> = (0..constellation.size())
                .map(|k| psi_state(constellation, k, alpha, n_cut).unwrap())
                .collect();
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((a.inner(b) - expected).norm() < 1e-8);
                }
            }
        }
    }
}
