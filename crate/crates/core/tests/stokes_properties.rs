use std::sync::Arc;

use mimetic_core::analysis::{error_norms, ExactSolution};
use mimetic_core::assembly::{assemble_stokes, mass_matrix, vorticity_kind};
use mimetic_core::cases::{problem_from_exact, Case, Trig2d};
use mimetic_core::mimetic::Discretization;
use mimetic_core::solver::{solve_stokes, solve_system};
use mimetic_core::topology::{FormKind, MeshSpec};
use mimetic_core::Point;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn unit(dim: usize, k: usize, n: usize) -> Discretization {
    Discretization::new(MeshSpec::unit(dim, k, n).unwrap()).unwrap()
}

#[test]
fn first_equation_holds_per_test_function() {
    for case in [Case::Lid2d, Case::Trig2d, Case::Lid3d] {
        let d = unit(case.dim(), 2, 3);
        let sys = assemble_stokes(&d, &case.problem()).unwrap();
        let sol = solve_system(&d, &sys).unwrap();
        let mw = mass_matrix(&d, vorticity_kind(d.dim()));
        let mv = mass_matrix(&d, FormKind::Flux);
        // (curl ε_i, u) = (Cᵀ M_V u)_i
        let ctmvu = sys
            .curl
            .to_f64()
            .transpose()
            .mul_vec(&mv.mul_vec(sol.velocity.values()));
        let mww = mw.mul_vec(sol.vorticity.values());
        let scale = mww.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..mww.len() {
            let r = mww[i] - ctmvu[i] - sys.boundary.tangential[i];
            assert!(r.abs() < 1e-10 * scale, "{case} row {i}: {r:e}");
        }
    }
}

#[test]
fn adding_a_constant_to_the_pressure_changes_nothing() {
    struct Shifted(Trig2d);
    impl ExactSolution for Shifted {
        fn dim(&self) -> usize {
            2
        }
        fn velocity(&self, x: &Point) -> [f64; 3] {
            self.0.velocity(x)
        }
        fn vorticity(&self, x: &Point) -> [f64; 3] {
            self.0.vorticity(x)
        }
        fn curl_vorticity(&self, x: &Point) -> [f64; 3] {
            self.0.curl_vorticity(x)
        }
        fn pressure(&self, x: &Point) -> f64 {
            self.0.pressure(x) + 17.0
        }
        fn pressure_gradient(&self, x: &Point) -> [f64; 3] {
            self.0.pressure_gradient(x)
        }
    }
    let d = unit(2, 2, 3);
    let a = solve_stokes(&d, &problem_from_exact(Arc::new(Trig2d::default()))).unwrap();
    let b = solve_stokes(&d, &problem_from_exact(Arc::new(Shifted(Trig2d::default())))).unwrap();
    assert_eq!(a.velocity, b.velocity);
    assert_eq!(a.pressure, b.pressure);
    let ea = error_norms(&a, &Trig2d::default()).unwrap();
    let eb = error_norms(&b, &Shifted(Trig2d::default())).unwrap();
    assert!((ea.p_l2 - eb.p_l2).abs() < 1e-12);
}

#[test]
fn lid_driven_flow_is_mirror_symmetric() {
    // Stokes flow is reversible: reflecting x -> 1 - x keeps u_x and flips u_y
    let d = unit(2, 2, 6);
    let sol = solve_stokes(&d, &Case::Lid2d.problem()).unwrap();
    let u = sol.velocity_field();
    for x in [[0.1, 0.2, 0.0], [0.3, 0.9, 0.0], [0.45, 0.55, 0.0]] {
        let m = [1.0 - x[0], x[1], 0.0];
        let (a, b) = (u.value(&x).unwrap(), u.value(&m).unwrap());
        assert!((a[0] - b[0]).abs() < 1e-10);
        assert!((a[1] + b[1]).abs() < 1e-10);
    }
    // the lid drags fluid along -x just below it and back along +x near the bottom
    assert!(u.value(&[0.5, 0.95, 0.0]).unwrap()[0] < -0.3);
    assert!(u.value(&[0.5, 0.2, 0.0]).unwrap()[0] > 0.0);
}

#[test]
fn lid_driven_3d_speed_peaks_under_the_lid() {
    let d = unit(3, 2, 3);
    let sol = solve_stokes(&d, &Case::Lid3d.problem()).unwrap();
    for y in [0.1, 0.5, 0.9] {
        let slice = sol.sample_plane(1, y, 10).unwrap();
        let speed = |s: &mimetic_core::solver::Sample| s.velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
        let interior: Vec<_> = slice.iter().filter(|s| s.point[2] < 0.999).collect();
        let top = interior.iter().max_by(|a, b| speed(a).total_cmp(&speed(b))).unwrap();
        assert!(top.point[2] >= 0.8, "y={y}: max speed at {:?}", top.point);
        assert!(slice.iter().all(|s| s.divergence.abs() < 1e-10));
    }
}

#[test]
fn constant_pressure_cochain_samples_constant() {
    let d = unit(2, 2, 2);
    let sol = solve_stokes(&d, &Case::Lid2d.problem()).unwrap();
    let mut s = sol.clone();
    let cell = 0.25 / 4.0;
    s.pressure.values_mut().iter_mut().for_each(|p| *p = 3.0 * cell);
    for smp in s.sample_grid(1).unwrap() {
        assert!((smp.pressure - 3.0).abs() < 1e-12);
    }
    assert_eq!(s.sample_grid(1).unwrap().len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solutions_are_divergence_free_for_any_data(a in 0.2f64..3.0, b in 0.2f64..3.0, k in 1usize..=3, n in 1usize..=4) {
        let exact = Trig2d { a, b };
        let d = unit(2, k, n);
        let sol = solve_stokes(&d, &problem_from_exact(Arc::new(exact))).unwrap();
        let scale = sol.velocity.max_abs().max(1.0);
        prop_assert!(sol.divergence_cochain().max_abs() <= 1e-10 * scale);
        for s in sol.sample_grid(7).unwrap() {
            prop_assert!(s.divergence.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn mass_matrices_are_positive(seed in any::<u64>(), dim in 2usize..=3, n in 1usize..=3) {
        let d = unit(dim, 2, n);
        for kind in FormKind::ALL {
            let m = mass_matrix(&d, kind);
            let mut rng = StdRng::seed_from_u64(seed);
            let a: Vec<f64> = (0..m.nrows()).map(|_| rng.random_range(-0.5..0.5)).collect();
            let ma = m.mul_vec(&a);
            let q: f64 = a.iter().zip(&ma).map(|(x, y)| x * y).sum();
            prop_assert!(q > 0.0);
        }
    }
}
