use num_complex::Complex64;
use proptest::prelude::*;

use lvn_core::density::{density_from_state, integrate_lvn, LvnDrive, TwoLevelParams};
use lvn_core::invariant::propagate_invariant;
use lvn_core::numeric::cumulative_trapezoid;
use lvn_core::operator::{check_hermitian, unitarity_defect};
use lvn_core::susy::{
    count_below, ladder_operators, partner_hamiltonians, partner_potentials, BandMatrix, PhysParams, SpatialGrid,
    SuperpotentialField,
};
use lvn_core::{commutator, eigh, step_propagator, ComplexMatrix, OperatorPath, StateVector, TimeGrid};

fn hermitian(dim: usize, entries: &[f64]) -> ComplexMatrix {
    let mut m = ComplexMatrix::from_fn(dim, |i, j| {
        let k = 2 * (i * dim + j);
        Complex64::new(entries[k], entries[k + 1])
    });
    m = m.hermitian_part();
    m
}

fn entries(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim)
}

fn state(dim: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim)
        .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 0.1))
        .prop_map(move |v| {
            StateVector::new((0..dim).map(|k| Complex64::new(v[2 * k], v[2 * k + 1])).collect()).normalized()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn commutator_is_antisymmetric_and_traceless(a in entries(3), b in entries(3)) {
        let (a, b) = (hermitian(3, &a), hermitian(3, &b));
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!((&ab + &ba).max_norm() < 1e-14);
        prop_assert!(ab.trace().norm() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_and_propagator_is_unitary(e in entries(4), dt in 1e-3f64..2.0) {
        let h = hermitian(4, &e);
        let d = eigh(&h).unwrap();
        prop_assert!(d.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((&d.reconstruct() - &h).max_norm() < 1e-12);
        prop_assert!(unitarity_defect(&step_propagator(&h, dt).unwrap()) < 1e-12);
    }

    /// Propagated invariants keep their spectrum and stay Hermitian.
    #[test]
    fn invariant_spectrum_is_conserved(h0 in entries(3), h1 in entries(3), seed in entries(3), w in 0.2f64..3.0) {
        let (h0, h1, seed) = (hermitian(3, &h0), hermitian(3, &h1), hermitian(3, &seed));
        let grid = TimeGrid::spanning(0.0, 2.0, 200).unwrap();
        let h = OperatorPath::from_fn(grid, |t| &h0 + &(&h1 * (w * t).cos())).unwrap();
        let inv = propagate_invariant(&h, &seed).unwrap();
        let want = eigh(&seed).unwrap().values;
        for s in inv.path().samples() {
            prop_assert!(check_hermitian(s, 1e-12).hermitian);
            let got = eigh(s).unwrap().values;
            for (a, b) in got.iter().zip(&want) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    /// Trace, Hermiticity and purity of a pure state survive RK4.
    #[test]
    fn density_guards_hold(h0 in entries(3), h1 in entries(3), psi in state(3)) {
        let (h0, h1) = (hermitian(3, &h0), hermitian(3, &h1));
        let grid = TimeGrid::spanning(0.0, 1.0, 1000).unwrap();
        let h = OperatorPath::from_fn(grid, |t| &h0 + &(&h1 * t.sin())).unwrap();
        let dp = integrate_lvn(LvnDrive::Matrix(&h), &density_from_state(&psi).unwrap()).unwrap();
        prop_assert!(dp.max_trace_drift() < 1e-12);
        prop_assert!(dp.max_hermiticity_defect() < 1e-12);
        prop_assert!(dp.purity_drift() < 1e-8);
    }

    #[test]
    fn two_level_populations_sum_to_one(wa in -2.0f64..2.0, wb in -2.0f64..2.0, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let grid = TimeGrid::spanning(0.0, 3.0, 3000).unwrap();
        let p = TwoLevelParams::from_fn(wa, wb, grid, |t| Complex64::new(re, im) * (1.0 + 0.5 * t.cos())).unwrap();
        let dp = integrate_lvn(LvnDrive::TwoLevel(&p), &density_from_state(&StateVector::basis(2, 0)).unwrap()).unwrap();
        for rho in dp.samples() {
            prop_assert!((rho.entry(0, 0).re + rho.entry(1, 1).re - 1.0).abs() < 1e-13);
            prop_assert!(rho.entry(0, 0).re >= -1e-9 && rho.entry(1, 1).re >= -1e-9);
        }
        prop_assert!(dp.purity_drift() < 1e-8);
    }

    /// `A† = Aᵀ`, `H∓` symmetric, `V₊ − V₋ = 2sW′`.
    #[test]
    fn ladder_structure(c in prop::collection::vec(-1.0f64..1.0, 4), hbar in 0.5f64..2.0, mass in 0.2f64..2.0) {
        let grid = SpatialGrid::new(-3.0, 3.0, 121).unwrap();
        let w = SuperpotentialField::from_fn(
            grid,
            |x| c[0] + c[1] * x + c[2] * x * x + c[3] * x.sin(),
            |x| c[1] + 2.0 * c[2] * x + c[3] * x.cos(),
        ).unwrap();
        let params = PhysParams::new(hbar, mass).unwrap();
        let (a, adag) = ladder_operators(&w, params).unwrap();
        prop_assert_eq!(&a.transpose(), &adag);
        let (hm, hp) = partner_hamiltonians(&a, &adag).unwrap();
        let n = hm.matrix().n();
        prop_assert!(hm.matrix().asymmetry(0..n) < 1e-12);
        prop_assert!(hp.matrix().asymmetry(0..n) < 1e-12);
        let pp = partner_potentials(&w, params);
        let s = params.ladder_scale();
        for j in 0..grid.len() {
            prop_assert!((pp.v_plus[j] - pp.v_minus[j] - 2.0 * s * w.w_prime()[j]).abs() < 1e-12);
        }
    }

    /// Inertia count of a symmetric band matrix agrees with dense eigenvalues.
    #[test]
    fn band_inertia_matches_dense(d in prop::collection::vec(-2.0f64..2.0, 12), off in prop::collection::vec(-1.0f64..1.0, 24), sigma in -3.0f64..3.0) {
        let n = 12;
        let mut m = BandMatrix::zeros(n, 2, 2);
        for i in 0..n {
            m.set(i, i, d[i]);
            for k in 1..=2 {
                if i + k < n {
                    let v = off[2 * i + k - 1];
                    m.set(i, i + k, v);
                    m.set(i + k, i, v);
                }
            }
        }
        let dense = ComplexMatrix::from_fn(n, |i, j| Complex64::new(m.get(i, j), 0.0));
        let values = eigh(&dense).unwrap().values;
        prop_assume!(values.iter().all(|v| (v - sigma).abs() > 1e-9));
        prop_assert_eq!(count_below(&m, sigma), values.iter().filter(|v| **v < sigma).count());
    }

    #[test]
    fn trapezoid_is_exact_for_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, h in 1e-3f64..0.5) {
        let v: Vec<f64> = (0..50).map(|k| a + b * k as f64 * h).collect();
        let c = cumulative_trapezoid(&v, h);
        for (k, ck) in c.iter().enumerate() {
            let x = k as f64 * h;
            prop_assert!((ck - (a * x + 0.5 * b * x * x)).abs() < 1e-10);
        }
    }
}
