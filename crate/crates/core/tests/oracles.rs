//! Cross-checks between independent solution paths.

use liouville::dynamics::{
    analytic_gaussian_linear, ensemble_trajectory, evolve_semilagrangian, Evolver, IntegratorConfig, SolverConfig,
};
use liouville::moments::evolve_moments;
use liouville::{GaussianState, GridDensity, GridSpec, Hamiltonian, Interpolation, Potential};

#[test]
fn grid_matches_ensemble_in_anharmonic_well() {
    let s = GaussianState::new(0.5, 0.5, 0.6, 0.6).unwrap();
    let h = Hamiltonian::new(1.0, Potential::new(vec![0.0, 0.0, 0.5, 0.0, 0.25]).unwrap()).unwrap();
    let integrator = IntegratorConfig::leapfrog(1e-2).unwrap();
    let times = [0.5, 1.0, 2.0];
    let ens = ensemble_trajectory(&s, &h, &times, 200_000, 5, &integrator, 1).unwrap();
    let grid = GridDensity::from_gaussian(&s, GridSpec::square(5.0, 192).unwrap()).unwrap();
    let mut ev = Evolver::new(grid, &h, SolverConfig::default().with_integrator(integrator)).unwrap();
    for (t, r) in times.iter().zip(&ens) {
        ev.advance_to(*t).unwrap();
        let g = ev.density().moments();
        for ((x, y), se) in g.as_array().iter().zip(r.moments.as_array()).zip(r.std_errors.as_array()) {
            assert!((x - y).abs() <= 4.0 * se + 1e-4, "t={t}: grid {x} ensemble {y} se {se}");
        }
    }
}

#[test]
fn grid_matches_linear_analytic_in_inverted_well() {
    let s = GaussianState::new(0.0, 0.2, 0.5, 0.5).unwrap();
    let h = Hamiltonian::new(1.0, Potential::harmonic(-0.5)).unwrap();
    let grid = GridDensity::from_gaussian(&s, GridSpec::square(6.0, 192).unwrap()).unwrap();
    let cfg = SolverConfig::default().with_integrator(IntegratorConfig::leapfrog(1e-2).unwrap());
    let out = evolve_semilagrangian(&grid, &h, 1.0, &cfg).unwrap();
    let m = out.density.moments();
    let exact = analytic_gaussian_linear(&s, &h, 1.0).unwrap();
    for (x, y) in m.as_array().iter().zip(exact.as_array()) {
        assert!((x - y).abs() < 1e-3, "{m:?} vs {exact:?}");
    }
}

#[test]
fn closure_matches_analytic_for_quadratic_potentials() {
    let s = GaussianState::new(0.7, -0.4, 0.8, 1.3).unwrap();
    for k in [2.0, 0.0, -1.0] {
        let h = Hamiltonian::new(1.5, Potential::new(vec![0.1, 0.3, 0.5 * k]).unwrap()).unwrap();
        let clo = evolve_moments(&s.moments(), &h, 1.7, 1e-3).unwrap().last().1;
        let lin = analytic_gaussian_linear(&s, &h, 1.7).unwrap();
        for (x, y) in clo.as_array().iter().zip(lin.as_array()) {
            assert!((x - y).abs() < 1e-9, "k={k}: {clo:?} vs {lin:?}");
        }
    }
}

#[test]
fn bilinear_is_more_diffusive_than_cubic() {
    let s = GaussianState::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let h = Hamiltonian::free(1.0).unwrap();
    let grid = GridDensity::from_gaussian(&s, GridSpec::square(10.0, 96).unwrap()).unwrap();
    let base = SolverConfig::default().with_integrator(IntegratorConfig::leapfrog(0.01).unwrap());
    let cubic = evolve_semilagrangian(&grid, &h, 1.0, &base).unwrap().density.moments();
    let bilinear = evolve_semilagrangian(&grid, &h, 1.0, &base.with_interpolation(Interpolation::Bilinear))
        .unwrap()
        .density
        .moments();
    assert!((cubic.var_q - 1.0).abs() < (bilinear.var_q - 1.0).abs());
}
