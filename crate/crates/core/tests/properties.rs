use proptest::prelude::*;
use thermalcat_core::dynamics::{displaced_frame_hamiltonian, displaced_hamiltonian, AtomState, CavitySystem};
use thermalcat_core::echo::{echo_run, phase_kick, EchoSchedule};
use thermalcat_core::entanglement::{branch_overlap, fidelity, negativity, BipartiteSplit};
use thermalcat_core::fock::{
    displaced_thermal_fock_coeff, displaced_thermal_state, displacement_matrix_element, fock_series_cutoff,
    truncation_for, FockSpace, TailPolicy, ThermalParams,
};
use thermalcat_core::linalg::{
    hermitian_eig, kron, partial_trace, singular_values, ComplexMatrix, CompositeSpace, Propagator,
};
use thermalcat_core::lindblad::{lindblad_series, DecayParams, LindbladOptions};
use thermalcat_core::phase_space::{wigner, PhaseSpaceGrid};
use thermalcat_core::state::DensityMatrix;
use thermalcat_core::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let m = ComplexMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1));
        m.hermitian_part()
    })
}

/// `A A† / Tr(A A†)` for a random `A`.
fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let a = ComplexMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1));
        DensityMatrix::normalized(a.matmul_adjoint(&a).hermitian_part()).unwrap()
    })
}

fn amplitude() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigendecomposition_reconstructs(h in (2usize..12).prop_flat_map(hermitian)) {
        let eig = hermitian_eig(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-12);
        let v = &eig.vectors;
        let n = h.rows();
        prop_assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn propagators_are_unitary_and_compose(h in hermitian(8), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let p = Propagator::new(&h).unwrap();
        let (us, ut) = (p.unitary(s), p.unitary(t));
        prop_assert!(us.matmul_adjoint(&us).max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
        prop_assert!(us.matmul(&ut).max_abs_diff(&p.unitary(s + t)) < 1e-12);
    }

    #[test]
    fn expectation_series_matches_explicit_conjugation(h in hermitian(6), o in hermitian(6), rho in density(6), t in 0.0f64..4.0) {
        let p = Propagator::new(&h).unwrap();
        let series = p.expectation_series(rho.matrix(), &[&o], &[t]);
        let direct = rho.conjugated(&p.unitary(t)).expectation(&o).re;
        prop_assert!((series[0][0] - direct).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_is_dual_to_embedding(rho in density(24), a in hermitian(3)) {
        // factors 2 ⊗ 3 ⊗ 4, keep the middle one
        let space = CompositeSpace::new(&[2, 3, 4]).unwrap();
        let reduced = partial_trace(rho.matrix(), &space, &[1]).unwrap();
        let lifted = kron(&kron(&ComplexMatrix::identity(2), &a), &ComplexMatrix::identity(4));
        let lhs = rho.matrix().trace_product(&lifted);
        let rhs = reduced.trace_product(&a);
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((reduced.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(hermitian_eig(&reduced.hermitian_part()).unwrap().values[0] > -1e-12);
    }

    #[test]
    fn singular_values_are_root_gram_eigenvalues(h in hermitian(7), g in hermitian(7)) {
        let a = h.matmul(&g);
        let s = singular_values(&a).unwrap();
        let mut e: Vec<f64> = hermitian_eig(&a.adjoint().matmul(&a).hermitian_part())
            .unwrap()
            .values
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .collect();
        e.sort_by(|x, y| y.total_cmp(x));
        for (x, y) in s.iter().zip(&e) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + y));
        }
        // Frobenius norm is the root sum of squared singular values
        let fro: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((fro - a.frobenius_norm()).abs() < 1e-10 * (1.0 + fro));
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(rho in density(6), sigma in density(6)) {
        let f = fidelity(&rho, &sigma).unwrap();
        let r = fidelity(&sigma, &rho).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - r).abs() < 1e-10);
        prop_assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        // Fuchs–van de Graaf: 1 - √F ≤ D
        let d = 0.5 * hermitian_eig(&(rho.matrix() - sigma.matrix())).unwrap().values.iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!(1.0 - f.sqrt() <= d + 1e-10);
    }

    #[test]
    fn product_states_have_no_negativity(a in density(2), b in density(4)) {
        let rho = DensityMatrix::new(kron(a.matrix(), b.matrix())).unwrap();
        let split = BipartiteSplit::new(CompositeSpace::new(&[2, 4]).unwrap(), &[0], &[1]).unwrap();
        prop_assert!(negativity(&rho, &split).unwrap().abs() < 1e-12);
    }

    #[test]
    fn displaced_thermal_moments(alpha in amplitude(), n_bar in 0.0f64..1.5) {
        let params = ThermalParams::new(n_bar).unwrap();
        let n = truncation_for(alpha.into(), params, 1e-14) + 6;
        let space = FockSpace::new(n).unwrap();
        let rho = displaced_thermal_state(alpha.into(), params, &space).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.matrix().hermiticity_defect() < 1e-12);
        let mean_a = rho.expectation(space.annihilation());
        let mean_n = rho.expectation(space.number()).re;
        prop_assert!((mean_a - alpha).norm() < 1e-9);
        prop_assert!((mean_n - alpha.norm_sqr() - n_bar).abs() < 1e-8);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-12);
        // purity of a Gaussian state with occupation n̄
        prop_assert!((rho.purity() - 1.0 / (2.0 * n_bar + 1.0)).abs() < 1e-8);
    }

    #[test]
    fn fock_series_agrees_with_matrix(alpha in amplitude(), n_bar in 0.0f64..1.0, m in 0usize..10, k in 0usize..10) {
        let params = ThermalParams::new(n_bar).unwrap();
        let space = FockSpace::new(truncation_for(alpha.into(), params, 1e-15) + 12).unwrap();
        let rho = displaced_thermal_state(alpha.into(), params, &space).unwrap();
        let cutoff = fock_series_cutoff(n_bar, 1e-14);
        let series = displaced_thermal_fock_coeff(alpha, n_bar, m, k, cutoff).unwrap();
        prop_assert!((series - rho.matrix()[(m, k)]).norm() < 1e-10);
    }

    #[test]
    fn displacement_elements_form_a_unitary_block(alpha in amplitude()) {
        // columns of D restricted to low Fock states are normalized once enough rows are kept
        let rows = 80;
        for col in 0..6 {
            let norm: f64 = (0..rows).map(|r| displacement_matrix_element(alpha, r, col).norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
        // ⟨0|D(α)|0⟩ = e^{-|α|²/2}
        prop_assert!((displacement_matrix_element(alpha, 0, 0).re - (-alpha.norm_sqr() / 2.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_wigner_matches_closed_form(alpha in amplitude(), n_bar in 0.0f64..1.0) {
        let params = ThermalParams::new(n_bar).unwrap();
        let space = FockSpace::new(truncation_for(alpha.into(), params, 1e-13) + 6).unwrap();
        let rho = displaced_thermal_state(alpha.into(), params, &space).unwrap();
        let half = 3.0 * (n_bar + 0.5).sqrt() + 1.0;
        let grid = PhaseSpaceGrid::new((alpha.re - half, alpha.re + half), (alpha.im - half, alpha.im + half), 9, 9).unwrap();
        let w = wigner(&rho, &grid, &space).unwrap();
        let s = 2.0 * n_bar + 1.0;
        for i in 0..9 {
            for j in 0..9 {
                let gamma = c(grid.x(i), grid.p(j));
                let exact = 2.0 / (std::f64::consts::PI * s) * (-2.0 * (gamma - alpha).norm_sqr() / s).exp();
                prop_assert!((w.at(i, j) - exact).abs() < 1e-9, "{} vs {}", w.at(i, j), exact);
            }
        }
    }

    #[test]
    fn wigner_translates_with_displacement(alpha in amplitude(), shift in amplitude()) {
        let params = ThermalParams::new(0.3).unwrap();
        let reach = c(alpha.norm().max((alpha + shift).norm()), 0.0);
        let space = FockSpace::new(truncation_for(reach.into(), params, 1e-13) + 8).unwrap();
        let base = displaced_thermal_state(alpha.into(), params, &space).unwrap();
        let moved = displaced_thermal_state((alpha + shift).into(), params, &space).unwrap();
        let grid = PhaseSpaceGrid::new((alpha.re - 3.0, alpha.re + 3.0), (alpha.im - 3.0, alpha.im + 3.0), 7, 7).unwrap();
        let w0 = wigner(&base, &grid, &space).unwrap();
        let w1 = wigner(&moved, &grid.translated(shift), &space).unwrap();
        for (x, y) in w0.values.iter().zip(&w1.values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn displaced_hamiltonian_matches_matrix_transform(alpha in amplitude()) {
        // D†HD from truncated matrices is exact away from the cutoff
        let n = 60;
        let space = FockSpace::new(n).unwrap();
        let via_matrices = displaced_hamiltonian(1.0, alpha, &space).unwrap();
        let algebraic = displaced_frame_hamiltonian(1.0, alpha, &space);
        let keep = 12;
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..keep {
                    for j in 0..keep {
                        let (r, c) = (a * n + i, b * n + j);
                        let d = (via_matrices[(r, c)] - algebraic[(r, c)]).norm();
                        prop_assert!(d < 1e-9, "({r}, {c}) {d:.3e}");
                    }
                }
            }
        }
    }

    #[test]
    fn branch_overlap_ignores_the_common_displacement(a1 in amplitude(), a2 in amplitude(), beta in amplitude(), n_bar in 0.0f64..1.0) {
        let params = ThermalParams::new(n_bar).unwrap();
        let x = branch_overlap(a1, params, beta * 0.5).unwrap();
        let y = branch_overlap(a2, params, beta * 0.5).unwrap();
        prop_assert!((x - y).abs() < 1e-12);
        prop_assert!(x > 0.0 && x <= 1.0 / (2.0 * n_bar + 1.0) + 1e-12);
    }

    #[test]
    fn kick_is_an_involution(rho in density(10)) {
        let space = CompositeSpace::new(&[2, 5]).unwrap();
        let state = thermalcat_core::state::JointState::new(rho, space).unwrap();
        let twice = phase_kick(&phase_kick(&state));
        prop_assert!(twice.rho.matrix().max_abs_diff(state.rho.matrix()) < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn echo_restores_ground_state(alpha in 0.5f64..3.0, n_bar in 0.0f64..0.8, t_kick in 0.3f64..2.0) {
        let params = ThermalParams::new(n_bar).unwrap();
        let reach = c(alpha + t_kick / 2.0 + 1.0, 0.0);
        let space = FockSpace::new(truncation_for(reach.into(), params, 1e-13) + 8).unwrap();
        let schedule = EchoSchedule::new(t_kick, 2.0 * t_kick, 5).unwrap();
        let out = echo_run(1.0, c(alpha, 0.0), params, &schedule, &space).unwrap();
        prop_assert!((out.revival_pg.unwrap() - 1.0).abs() < 1e-9);
        prop_assert!((out.revival_fidelity.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn master_equation_preserves_trace_and_hermiticity(kappa in 0.0f64..0.5, n_b in 0.0f64..0.5, alpha in amplitude()) {
        let params = ThermalParams::new(0.2).unwrap();
        let dim = truncation_for((alpha * 1.5).into(), params, 1e-12) + 8;
        let system = CavitySystem::single(1.0, FockSpace::new(dim).unwrap()).unwrap();
        let initial = system.initial_state(AtomState::Plus, &[params], &[alpha], &TailPolicy::default()).unwrap();
        let decay = DecayParams::new(kappa, n_b).unwrap();
        let (last, _, report) = lindblad_series(&initial, &system.hamiltonian(), &decay, &[0.5], &LindbladOptions::with_dt(0.01), &[]).unwrap();
        prop_assert!(report.total_trace_drift < 1e-10);
        prop_assert!((last.rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(last.rho.matrix().hermiticity_defect() < 1e-12);
        prop_assert!(report.min_eigenvalue > -1e-8);
    }
}
