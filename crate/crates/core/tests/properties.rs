use parity_photons::analysis::{fidelity_trace, partial_trace, purity, reduce_pure, target_state, von_neumann_entropy, TargetKind};
use parity_photons::dynamics::{evolve_lindblad, uniform_grid, DissipatorSet, EvolveOptions, Hamiltonian};
use parity_photons::network::{build_effective, build_full, mode_b, NetworkParams};
use parity_photons::spectrum::{dress, RabiParams};
use parity_photons::tensor::{embed, hermitian_eig, kron, ComplexMatrix, SpaceDescriptor, Subspace};
use parity_photons::C64;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
        .prop_map(move |v| ComplexMatrix::from_fn(rows, cols, |i, j| C64::new(v[i * cols + j].0, v[i * cols + j].1)))
}

fn hermitian(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim, dim).prop_map(|a| (&a + &a.adjoint()).scale_real(0.5))
}

fn density(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(dim, dim).prop_map(|a| {
        let m = &a * &a.adjoint();
        let t = m.trace().re;
        m.scale_real(1.0 / t)
    })
}

fn spectral_radius(m: &ComplexMatrix) -> f64 {
    hermitian_eig(m, 1e-10).unwrap().values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kron_is_associative(
        (x, y, z) in (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(a, b, c)| (matrix(a, b), matrix(b, c), matrix(c, a)))
    ) {
        let left = kron(&kron(&x, &y).unwrap(), &z).unwrap();
        let right = kron(&x, &kron(&y, &z).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn embed_keeps_spectral_radius(op in hermitian(3), pos in 0usize..3) {
        let space = SpaceDescriptor::from_dims([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let label = ["a", "b", "c"][pos];
        let local = if label == "b" { op } else { op.select(&[0, 1]) };
        let big = embed(&local, &space, label).unwrap();
        prop_assert!((spectral_radius(&big) - spectral_radius(&local)).abs() < 1e-10);
    }

    #[test]
    fn eigen_reconstructs(m in (1usize..40).prop_flat_map(hermitian)) {
        let e = hermitian_eig(&m, 1e-10).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&m) < 1e-9);
        prop_assert!(e.unitarity_deviation() < 1e-9);
    }

    #[test]
    fn partial_trace_keeps_trace(rho in density(12), keep in 0usize..3) {
        let space = SpaceDescriptor::from_dims([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let all = partial_trace(&rho, &space, &["a", "b", "c"]).unwrap();
        prop_assert!(all.rho.max_abs_diff(&rho) < 1e-14);
        let r = partial_trace(&rho, &space, &[["a", "b", "c"][keep]]).unwrap();
        prop_assert!((r.rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(r.rho.hermiticity_deviation() < 1e-14);
    }

    #[test]
    fn fidelity_with_itself_is_purity(rho in density(4)) {
        let f = fidelity_trace(&rho, &rho).unwrap();
        prop_assert!((f - purity(&rho)).abs() < 1e-12);
        prop_assert!(f <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rabi_spectrum_is_even_in_g(wq in 0.3f64..1.2, g in 0.05f64..0.8) {
        let plus = dress(&RabiParams::new(wq, g)).unwrap();
        let minus = dress(&RabiParams::new(wq, -g)).unwrap();
        for k in 0..6 {
            prop_assert!((plus.energies[k] - minus.energies[k]).abs() < 1e-10);
        }
        prop_assert_eq!(plus.nu(2, 0), plus.nu(2, 1) + plus.nu(1, 0));
    }

    #[test]
    fn selection_rules_hold(wq in 0.3f64..1.2, g in 0.05f64..0.8) {
        let s = dress(&RabiParams::new(wq, g)).unwrap();
        for k in 0..6 {
            for j in 0..6 {
                if s.parities[k] == s.parities[j] {
                    prop_assert!(s.x(k, j).norm() < 1e-10);
                } else {
                    prop_assert!(s.sz(k, j).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn built_hamiltonians_are_hermitian(n in 1usize..3, rwa in any::<bool>(), scale in 0.5f64..2.0) {
        let spec = dress(&RabiParams::reference()).unwrap();
        let mut net = NetworkParams::reference(n, spec.nu(2, 0));
        net.rwa = rwa;
        net.j1.iter_mut().chain(net.j2.iter_mut()).for_each(|j| *j *= scale);
        prop_assert!(build_full(&spec, &net).unwrap().hamiltonian.hermiticity_deviation() < 1e-12);
        let eff = build_effective(&spec, &net).unwrap();
        prop_assert!(eff.hamiltonian.hermiticity_deviation() < 1e-12);
        let grading = eff.grading().unwrap();
        prop_assert!(grading.hermiticity_deviation() < 1e-12);
        prop_assert!(eff.hamiltonian.commutator(&grading).max_abs() < 1e-12);
    }

    #[test]
    fn lindblad_is_linear(r1 in density(3), r2 in density(3), h in hermitian(3), l in matrix(3, 3), alpha in 0.0f64..1.0) {
        let mut diss = DissipatorSet::default();
        diss.push("l", 0.3, &l);
        let grid = uniform_grid(2.0, 3);
        let opts = EvolveOptions::default();
        let hh = Hamiltonian::from(h);
        let run = |rho: &ComplexMatrix| evolve_lindblad(&hh, &diss, rho, &grid, &[], &opts).unwrap().final_state.density();
        let mix = &r1.scale_real(alpha) + &r2.scale_real(1.0 - alpha);
        let expected = &run(&r1).scale_real(alpha) + &run(&r2).scale_real(1.0 - alpha);
        prop_assert!(run(&mix).max_abs_diff(&expected) < 1e-8);
    }
}

#[test]
fn targets_are_normalized_and_entangled() {
    for (kind, n) in [(TargetKind::Single, 1), (TargetKind::Bell, 2), (TargetKind::W, 3), (TargetKind::W, 4)] {
        let t = target_state(kind, n, 2).unwrap();
        let norm: f64 = t.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        let labels: Vec<(String, usize)> =
            (0..n).map(|l| (mode_b(l), 2)).chain((0..n).map(|l| (format!("c{}", l + 1), 2))).collect();
        let space = SpaceDescriptor::from_dims(labels).unwrap();
        let keep: Vec<String> = (0..n).map(mode_b).collect();
        let keep: Vec<&str> = keep.iter().map(String::as_str).collect();
        let w1 = reduce_pure(&t, &Subspace::full(space), &keep).unwrap();
        assert!(von_neumann_entropy(&w1.rho).unwrap().abs() < 1e-9);
        if n > 1 {
            let one = partial_trace(&w1.rho, &w1.space, &["b1"]).unwrap();
            assert!(von_neumann_entropy(&one.rho).unwrap() > 0.1);
        }
    }
}
