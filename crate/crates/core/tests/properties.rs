use doublewell::analysis::{cat_fidelity, splitting_symmetric, u_crit, LogEnergy};
use doublewell::hamiltonian::well_swap;
use doublewell::spectrum::{KrylovOptions, Parity};
use doublewell::{
    build, solve_dense, solve_lowest, Basis, EnergyUnit, FockState, Levels, ModelParams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (
        0.0..0.1f64,
        0.0..0.2f64,
        0.0..0.05f64,
        0.0..0.05f64,
        0.0..0.05f64,
        -0.5..0.5f64,
    )
        .prop_map(|(j0, j1, u0, u1, u01, dv)| ModelParams {
            j0,
            j1,
            u0,
            u1,
            u01,
            dv,
            hw: Some(1.0),
            unit: EnergyUnit::HbarOmega,
        })
}

fn sorted_eigenvalues(p: &ModelParams, b: &Basis) -> Vec<f64> {
    solve_dense(&build(p, b).unwrap(), 4000)
        .unwrap()
        .eigenvalues
}

/// All N-particle energies over four independent single-particle modes.
fn noninteracting(n: u32, modes: [f64; 4]) -> Vec<f64> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                let d = n - a - b - c;
                out.push(
                    a as f64 * modes[0]
                        + b as f64 * modes[1]
                        + c as f64 * modes[2]
                        + d as f64 * modes[3],
                );
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_exactly_symmetric(p in params(), n in 1u32..8) {
        let h = build(&p, &Basis::enumerate(n)).unwrap().to_dense();
        prop_assert_eq!(h.transpose(), h);
    }

    #[test]
    fn well_swap_commutes_without_tilt(p in params(), n in 1u32..8) {
        let p = p.with_tilt(0.0);
        let b = Basis::enumerate(n);
        let h = build(&p, &b).unwrap().to_dense();
        let perm = well_swap(&b);
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                prop_assert_eq!(h[(perm[i], perm[j])], h[(i, j)]);
            }
        }
    }

    #[test]
    fn tilt_mirror_spectrum(p in params(), n in 1u32..8) {
        let b = Basis::enumerate(n);
        let a = sorted_eigenvalues(&p, &b);
        let m = sorted_eigenvalues(&p.with_tilt(-p.dv), &b);
        for (x, y) in a.iter().zip(&m) {
            prop_assert!((x - y).abs() <= 1e-10, "{} vs {}", x, y);
        }
    }

    #[test]
    fn noninteracting_spectrum_is_analytic(p in params(), n in 1u32..7) {
        let p = ModelParams { u0: 0.0, u1: 0.0, u01: 0.0, ..p };
        let half = 0.5 * p.dv;
        let r0 = (p.j0 * p.j0 + half * half).sqrt();
        let r1 = (p.j1 * p.j1 + half * half).sqrt();
        let expect = noninteracting(n, [-r0, r0, 1.0 - r1, 1.0 + r1]);
        let got = sorted_eigenvalues(&p, &Basis::enumerate(n));
        prop_assert_eq!(got.len(), expect.len());
        for (x, y) in got.iter().zip(&expect) {
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0), "{} vs {}", x, y);
        }
    }

    #[test]
    fn index_round_trip(n in 0u32..30) {
        let b = Basis::enumerate(n);
        for i in 0..b.dim() {
            let s = b.state_at(i).unwrap();
            prop_assert_eq!(b.index_of(&s).unwrap(), i);
            prop_assert_eq!(s.total(), n);
        }
    }

    #[test]
    fn log_energy_round_trip(x in prop_oneof![-1e300..-1e-300f64, 1e-300..1e300f64]) {
        let l = LogEnergy::from_linear(x);
        prop_assert!((l.to_linear() - x).abs() <= 1e-13 * x.abs());
    }

    #[test]
    fn fidelity_is_bounded(v in prop::collection::vec(-1.0..1.0f64, 11), nu in 0u32..5, p in 0u32..3) {
        prop_assume!(2 * nu + p < 10);
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(nrm > 1e-6);
        let v: Vec<f64> = v.iter().map(|x| x / nrm).collect();
        let b = Basis::one_level(10);
        let fp = cat_fidelity(&v, &b, nu, p, Parity::Symmetric).unwrap();
        let fm = cat_fidelity(&v, &b, nu, p, Parity::Antisymmetric).unwrap();
        prop_assert!((0.0..=1.0).contains(&fp) && (0.0..=1.0).contains(&fm));
        // the two signs split the weight on the two branches
        let i = b.index_of(&FockState::new(nu, 10 - nu, 0, 0)).unwrap();
        let j = b.index_of(&FockState::new(10 - nu - p, nu + p, 0, 0)).unwrap();
        prop_assert!((fp + fm - v[i] * v[i] - v[j] * v[j]).abs() < 1e-12);
    }

    #[test]
    fn splitting_grows_with_tunneling(n in 2u32..200, j in 0.001..0.2f64) {
        let a = splitting_symmetric(n, 0, j, 1.0).unwrap();
        let b = splitting_symmetric(n, 0, 1.1 * j, 1.0).unwrap();
        prop_assert!(b.log10 > a.log10);
    }

    #[test]
    fn critical_interaction_falls_with_n(n in 1u32..1000, hw in 0.1..10.0f64) {
        prop_assert!(u_crit(n + 1, hw) < u_crit(n, hw));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn dense_and_krylov_agree(p in params(), n in 8u32..21) {
        let b = Basis::new(n, Levels::Two);
        prop_assume!(b.dim() <= 2000);
        let h = build(&p, &b).unwrap();
        let dense = solve_dense(&h, 4000).unwrap();
        let k = 8;
        let it = solve_lowest(&h, k, &KrylovOptions::default()).unwrap();
        let scale = h.norm_bound();
        for i in 0..k {
            let (x, y) = (it.eigenvalues[i], dense.eigenvalues[i]);
            prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(scale), "{}: {} vs {}", i, x, y);
        }
    }
}
