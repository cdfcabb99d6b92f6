use multiphoton::algebra::{restricted_norm, Operator};
use multiphoton::dynamics::{dominant_frequency, evolve, TimeGrid};
use multiphoton::fock::ModeDim;
use multiphoton::models::{
    block_decompose, block_of, build_three_level, build_two_level, Level2, Level3, ThreeLevelParams, TwoLevelParams,
};
use multiphoton::verify::{self, check_level_identity_against, check_inversion_identity, check_inversion_identity_against};
use multiphoton::{Ket, C64};
use proptest::prelude::*;

fn two_level() -> impl Strategy<Value = TwoLevelParams> {
    (0.3..2.0f64, 0.3..3.0f64, 0.02..0.5f64, 1..=3u32, 0..8usize).prop_map(|(omega, omega0, g, m, extra)| TwoLevelParams {
        omega,
        omega0,
        g,
        m,
        fock_dim: ModeDim::new(m as usize + 6 + extra).unwrap(),
    })
}

fn three_level() -> impl Strategy<Value = ThreeLevelParams> {
    (
        (0.2..1.5f64, 0.2..1.5f64, 0.3..2.0f64, 0.3..2.0f64, 0.02..0.5f64),
        (1..=2u32, 0..=1u32, 0..3usize, 0..3usize),
    )
        .prop_map(|((omega_l1, omega_l2, omega0, omega1, g), (m, extra_k, e1, e2))| {
            let ntot = m + extra_k;
            ThreeLevelParams {
                omega_l1,
                omega_l2,
                omega0,
                omega1,
                g,
                m,
                ntot,
                dims: [
                    ModeDim::new(m as usize + 3 + e1).unwrap(),
                    ModeDim::new(extra_k as usize + 3 + e2).unwrap(),
                ],
            }
        })
}

fn shifted(h: &Operator, c: f64) -> Operator {
    h + &Operator::identity(h.factors()).scale_real(c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonians_hermitian_and_conserving(p in two_level(), q in three_level()) {
        let two = build_two_level(&p).unwrap();
        prop_assert!(two.hamiltonian.hermiticity_residual() < 1e-12);
        let r = verify::check_constants(&two.hamiltonian, &[&two.excitation], &two.buffered()).unwrap();
        prop_assert!(r[0] < 1e-12);

        let three = build_three_level(&q).unwrap();
        prop_assert!(three.hamiltonian.hermiticity_residual() < 1e-12);
        let r = verify::check_constants(&three.hamiltonian, &[&three.n1, &three.n2, &three.s_squared], &three.buffered()).unwrap();
        prop_assert!(r.iter().all(|&x| x < 1e-12));
    }

    #[test]
    fn commutator_residuals_ignore_energy_shift(p in two_level(), c in -5.0..5.0f64) {
        let model = build_two_level(&p).unwrap();
        let keep = model.buffered();
        let h = shifted(&model.hamiltonian, c);
        for x in [&model.excitation, &model.sigma_z, &model.annihilation] {
            let before = multiphoton::commutator(x, &model.hamiltonian).unwrap();
            let after = multiphoton::commutator(x, &h).unwrap();
            prop_assert!(restricted_norm(&(&after - &before), &keep) <= 1e-12 * restricted_norm(&before, &keep).max(1.0));
        }
        prop_assert!(verify::check_constants(&h, &[&model.excitation], &keep).unwrap()[0] < 1e-12);
        // σ̇_z written out from its own commutator: residual 0 either way
        let rhs = multiphoton::commutator(&model.hamiltonian, &model.sigma_z).unwrap().scale(C64::new(0.0, 1.0));
        prop_assert!(verify::heisenberg_residual(&h, &model.sigma_z, &rhs, &keep).unwrap() < 1e-12);
    }

    #[test]
    fn inversion_identity_sensitive_to_each_coefficient(p in two_level(), which in 0..3usize) {
        let p = TwoLevelParams { m: 1, ..p };
        let mut wrong = p;
        match which {
            0 => wrong.omega *= 1.1,
            1 => wrong.omega0 *= 1.1,
            _ => wrong.g *= 1.1,
        }
        prop_assert!(check_inversion_identity(&p).unwrap().matched);
        prop_assert!(check_inversion_identity_against(&p, &wrong).unwrap().residual > 1e-3);
    }

    #[test]
    fn level_identity_sensitive_to_each_coefficient(q in three_level(), which in 0..5usize) {
        let base = check_level_identity_against(&q, &q).unwrap().residual;
        let mut wrong = q;
        match which {
            0 => wrong.omega_l1 *= 1.1,
            1 => wrong.omega_l2 *= 1.1,
            2 => wrong.omega0 *= 1.1,
            3 => wrong.omega1 *= 1.1,
            _ => wrong.g *= 1.1,
        }
        let perturbed = check_level_identity_against(&q, &wrong).unwrap().residual;
        prop_assert!(perturbed > 1e-3, "base {base:.3e}, perturbed {perturbed:.3e}");
    }

    #[test]
    fn three_level_trajectories_respect_bounds_and_constants(q in three_level(), seed in 0u64..1000) {
        let model = build_three_level(&q).unwrap();
        let amps: Vec<C64> = (0..model.dim())
            .map(|k| {
                let x = ((k as u64 + 1) * (seed + 7)) as f64;
                C64::new((0.37 * x).sin(), (0.61 * x).cos())
            })
            .collect();
        let psi = Ket::new(amps).unwrap();
        let grid = TimeGrid::new(0.4, 80).unwrap();
        let evo = evolve(
            &model.hamiltonian,
            &psi,
            &grid,
            &[("s", &model.s), ("s2", &model.s_squared), ("n1", &model.n1), ("n2", &model.n2)],
        )
        .unwrap();
        prop_assert!(evo.max_norm_error < 1e-10);
        let tol = 1e-12;
        prop_assert!(evo.get("s").unwrap().values.iter().all(|v| v.abs() <= 1.0 + tol));
        prop_assert!(evo.get("s2").unwrap().values.iter().all(|v| *v >= -tol && *v <= 1.0 + tol));
        for name in ["n1", "n2", "s2"] {
            let v = &evo.get(name).unwrap().values;
            prop_assert!(v.iter().all(|x| (x - v[0]).abs() < 1e-10), "{name} drifted");
        }
    }

    #[test]
    fn block_supported_states_oscillate_at_the_splitting(p in two_level(), n in 0usize..4, mix in 0.05..0.95f64) {
        let p = TwoLevelParams { fock_dim: ModeDim::new(n + p.m as usize + 2).unwrap(), ..p };
        let model = build_two_level(&p).unwrap();
        let e = model.index(n, Level2::Excited);
        let g = model.index(n + p.m as usize, Level2::Ground);
        let blocks = block_decompose(&model.hamiltonian, &[&model.excitation]).unwrap();
        let split = block_of(&blocks, e).unwrap().splitting.unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); model.dim()];
        amps[e] = C64::new(mix.sqrt(), 0.0);
        amps[g] = C64::new(0.0, (1.0 - mix).sqrt());
        let grid = TimeGrid::default_for(split);
        let evo = evolve(&model.hamiltonian, &Ket::new(amps).unwrap(), &grid, &[("sz", &model.sigma_z)]).unwrap();
        let peak = dominant_frequency(evo.get("sz").unwrap()).unwrap();
        // a block eigenstate does not oscillate; anything else must sit at the splitting
        if let Some(f) = peak.frequency() {
            prop_assert!((f - split).abs() < peak.bin_width());
        }
    }
}

#[test]
fn inversion_convention_stable_over_twenty_draws() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(55);
    let winners: std::collections::BTreeSet<String> = (0..20)
        .map(|_| {
            let p = TwoLevelParams {
                omega: rng.gen_range(0.3..2.0),
                omega0: rng.gen_range(0.3..3.0),
                g: rng.gen_range(0.02..0.5),
                m: 1,
                fock_dim: ModeDim::new(rng.gen_range(8..=20)).unwrap(),
            };
            let r = check_inversion_identity(&p).unwrap();
            assert!(r.matched, "{}", r.summary());
            r.best_convention.to_string()
        })
        .collect();
    assert_eq!(winners.len(), 1, "{winners:?}");
}

#[test]
fn middle_level_stays_put() {
    let q = ThreeLevelParams {
        omega_l1: 0.7,
        omega_l2: 0.3,
        omega0: 1.0,
        omega1: 0.6,
        g: 0.3,
        m: 1,
        ntot: 2,
        dims: [ModeDim::new(5).unwrap(), ModeDim::new(5).unwrap()],
    };
    let model = build_three_level(&q).unwrap();
    let psi = Ket::basis(model.dim(), model.index(2, 2, Level3::Middle));
    let grid = TimeGrid::new(0.3, 64).unwrap();
    let evo = evolve(&model.hamiltonian, &psi, &grid, &[("s2", &model.s_squared)]).unwrap();
    assert!(evo.get("s2").unwrap().values.iter().all(|v| v.abs() < 1e-14));
}
