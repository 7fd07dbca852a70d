use std::sync::Arc;

use opensusy::bilinear::{bilinear, evolution_symmetry_check, frequency_shift, jordan_norm, mixed_norm, mode_state_on, perturbation_shift, project, qnm_norm, susy_norm_ratio, susy_norm_ratio_numeric, Grid, TwoComponentState};
use opensusy::pt::pt_susy_generator;
use opensusy::spectral::{find_modes, wronskian_derivative, wronskian_value};
use opensusy::susy::{make_generator, GenType, GeneratorOptions, Request};
use opensusy::{Cx, Potential, PtParams, Region, SolverOptions, Which};

fn well() -> Potential<f64> {
    Potential::square(-20.0, 1.0).unwrap()
}

fn barrier_modes(p: &Potential<f64>) -> Vec<opensusy::Mode<f64>> {
    find_modes(p, Region::new(0.5, 6.0, -3.0, -0.05), Which::Q, &SolverOptions::default()).unwrap().modes
}

#[test]
fn mixed_norm_is_minus_wronskian_derivative() {
    let p = Potential::square(4.0, 1.0).unwrap();
    let so = SolverOptions::default();
    for w in [Cx::new(1.3, -0.4), Cx::new(2.1, 0.2), Cx::new(0.6, -1.0)] {
        let b = mixed_norm(&p, w, &so).unwrap();
        let d = wronskian_derivative(&p, w, Which::Q, &so).unwrap();
        let j = wronskian_value(&p, w, Which::Q, &so).unwrap();
        // off a mode the surface points at -1, 1 leave i (hi - lo) J behind
        let want = -d + Cx::new(0.0, 2.0) * j;
        assert!((b - want).norm() < 1e-7 * want.norm(), "{w}: {b} {want}");
    }
}

#[test]
fn qnm_norm_matches_wronskian_and_is_surface_invariant() {
    let p = Potential::square(4.0, 1.0).unwrap();
    let so = SolverOptions::default();
    let m = &barrier_modes(&p)[0];
    let n = qnm_norm(&p, m, &so).unwrap().value;
    // g = f / c at a mode, c = -J_q'... up to normalisation g(x) ~ e^{i w x}; compare the ratio
    let moved = opensusy::bilinear::qnm_norm_at(&p, m, -1.7, 2.4, &so).unwrap().value;
    assert!((n - moved).norm() < 1e-7 * n.norm(), "{n} {moved}");
    assert!(wronskian_value(&p, m.omega, Which::Q, &so).unwrap().norm() < 1e-8);
}

#[test]
fn partner_norm_ratio() {
    let g = make_generator(&well(), -4.28f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default()).unwrap();
    let so = SolverOptions::default();
    let modes = find_modes(&well(), Region::new(0.5, 6.0, -2.0, -0.05), Which::Q, &so).unwrap().modes;
    assert!(!modes.is_empty());
    for m in modes.iter().take(3) {
        let want = susy_norm_ratio(m.omega, g.omega()).unwrap();
        let got = susy_norm_ratio_numeric(&g, m, &so).unwrap();
        assert!((got - want).norm() < 1e-6 * want.norm(), "{}: {got} {want}", m.omega);
    }
}

#[test]
fn first_order_shift_matches_re_solve() {
    let so = SolverOptions::default();
    let p = well();
    let modes = find_modes(&p, Region::new(0.5, 8.0, -2.0, -0.05), Which::Q, &so).unwrap().modes;
    let eps = 1e-3;
    let q = Potential::square(-20.0 + eps, 1.0).unwrap();
    for m in modes.iter().take(3) {
        let shift = perturbation_shift(&p, m, |_| eps, &so).unwrap();
        let d = 0.02;
        let moved = find_modes(&q, Region::new(m.omega.re - d, m.omega.re + d, m.omega.im - d, m.omega.im + d), Which::Q, &so).unwrap().modes;
        let direct = moved[0].omega * moved[0].omega - m.omega * m.omega;
        assert!((direct - shift).norm() < 10.0 * eps * eps, "{}: {direct} {shift}", m.omega);
        let dw = frequency_shift(&p, m, |_| eps, &so).unwrap();
        assert!((dw - (moved[0].omega - m.omega)).norm() < 10.0 * eps * eps);
    }
    // odd perturbation on an even potential
    let odd = perturbation_shift(&p, &modes[0], |x| if x.abs() < 1.0 { 1e-3 * x } else { 0.0 }, &so).unwrap();
    assert!(odd.norm() < 1e-8, "{odd}");
    assert_eq!(perturbation_shift(&p, &modes[0], |_| 0.0, &so).unwrap(), Cx::new(0.0, 0.0));
}

fn mode_states(p: &Potential<f64>, count: usize) -> Vec<TwoComponentState<f64>> {
    let so = SolverOptions::default();
    let modes = barrier_modes(p);
    let grid = Arc::new(Grid::for_potential(p, -1.0, 1.0, 800.0));
    modes.iter().take(count).map(|m| mode_state_on(p, m, grid.clone(), &so).unwrap()).collect()
}

#[test]
fn modes_are_orthogonal_and_evolution_symmetric() {
    let p = Potential::square(4.0, 1.0).unwrap();
    let s = mode_states(&p, 3);
    for i in 0..s.len() {
        let nii = bilinear(&s[i], &s[i]).unwrap().norm();
        for j in 0..s.len() {
            let r = evolution_symmetry_check(&s[i], &s[j], &p).unwrap();
            assert!(r < 1e-6 * nii.max(1.0), "{i} {j}: {r}");
            if i != j {
                let o = bilinear(&s[i], &s[j]).unwrap().norm();
                let njj = bilinear(&s[j], &s[j]).unwrap().norm();
                assert!(o < 1e-6 * (nii * njj).sqrt(), "{i} {j}: {o}");
            }
        }
    }
}

#[test]
fn projection_recovers_coefficients() {
    let p = Potential::square(4.0, 1.0).unwrap();
    let s = mode_states(&p, 3);
    let n0 = bilinear(&s[0], &s[0]).unwrap();
    let unit = s[0].scaled(Cx::new(1.0, 0.0) / n0.sqrt());
    let a = project(&unit, &s).unwrap();
    assert!((a[0] * n0.sqrt() - 1.0).norm() < 1e-6 && a[1].norm() < 1e-6 && a[2].norm() < 1e-6, "{a:?}");
    let mix = s[1].scaled(Cx::new(2.0, 0.0)).add(&s[2].scaled(Cx::new(3.0, 0.0))).unwrap();
    let a = project(&mix, &s).unwrap();
    assert!(a[0].norm() < 1e-6 && (a[1] - 2.0).norm() < 1e-6 && (a[2] - 3.0).norm() < 1e-6, "{a:?}");
}

#[test]
fn jordan_block_normalisation() {
    let pt = PtParams::<f64>::from_q(1.0, 1.0).unwrap();
    let gen = pt_susy_generator::<f64>(&pt, 0, -1).unwrap();
    assert!((gen.k() - 0.5).abs() < 1e-14);
    let so = SolverOptions::default();
    let r = jordan_norm(&gen, 13.0, &so).unwrap();
    let want = Cx::new(0.0, -1.0);
    assert!((r.expected - want).norm() < 1e-14);
    assert!((r.ratio_wronskian - want).norm() < 1e-4, "{:?}", r);
    assert!((r.ratio_bilinear - want).norm() < 1e-4, "{:?}", r);
    assert!((r.reverse_ratio + 1.0).norm() < 1e-4, "{:?}", r);
}
