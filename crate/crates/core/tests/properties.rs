use opensusy::scattering::amplitudes;
use opensusy::spectral::{current_zero_count, eigenfunction, find_modes, wronskian_scaled_at, wronskian_value};
use opensusy::{Cx, ModeKind, Potential, Region, SolverOptions, Which};
use proptest::prelude::*;

/// Piecewise-constant profile on `[-1, 1]` with `values.len()` equal cells.
fn steps(values: Vec<f64>) -> Potential<f64> {
    let n = values.len();
    let edges = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    Potential::piecewise(edges, values).unwrap()
}

fn profile() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-12.0f64..8.0, 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wronskian_is_independent_of_matching_point(v in profile(), re in 0.3f64..5.0, im in -1.0f64..1.0) {
        let p = steps(v);
        let so = SolverOptions::default();
        let w = Cx::new(re, im);
        let js: Vec<Cx<f64>> = [-0.9, -0.35, 0.0, 0.4, 0.85].iter().map(|&x| wronskian_scaled_at(&p, w, Which::Q, x, &so).unwrap().value()).collect();
        for j in &js {
            prop_assert!((j - js[0]).norm() <= 1e-8 * js[0].norm(), "{j} {}", js[0]);
        }
    }

    #[test]
    fn flux_is_conserved_for_real_frequencies(v in profile(), w in 0.1f64..6.0) {
        let p = steps(v);
        let s = amplitudes(&p, Cx::new(w, 0.0), &SolverOptions::default()).unwrap();
        prop_assert!(s.unitarity_defect().abs() < 1e-8);
        prop_assert!((s.r_r.norm_sqr() + s.t_r.norm_sqr() - 1.0).abs() < 1e-8);
        prop_assert!((s.r_l.norm() - s.r_r.norm()).abs() < 1e-8);
    }

    #[test]
    fn wronskian_commutes_with_reflection(v in profile(), re in 0.3f64..5.0, im in -1.0f64..1.0) {
        // real V: J(-w*) = J(w)*, so zeros come in pairs w, -w*
        let p = steps(v);
        let so = SolverOptions::default();
        let w = Cx::new(re, im);
        let a = wronskian_value(&p, w, Which::Q, &so).unwrap();
        let b = wronskian_value(&p, -w.conj(), Which::Q, &so).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-9 * a.norm().max(1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn off_axis_modes_have_at_most_one_node_or_antinode(v in profile()) {
        let p = steps(v);
        let so = SolverOptions::default();
        let modes = find_modes(&p, Region::new(0.3, 6.0, -1.5, -0.02), Which::Q, &so).unwrap().modes;
        let grid: Vec<f64> = (0..=800).map(|i| -2.0 + 0.005 * i as f64).collect();
        for m in modes.iter().filter(|m| m.kind == ModeKind::Qnm) {
            let f = eigenfunction(&p, m, &grid, &so).unwrap();
            prop_assert!(current_zero_count(&f.values, &f.derivs) <= 1, "{}", m.omega);
        }
    }
}
