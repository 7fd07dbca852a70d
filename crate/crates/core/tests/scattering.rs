use opensusy::scattering::{amplitudes, susy_amplitudes};
use opensusy::spectral::find_modes;
use opensusy::susy::{make_generator, GenType, GeneratorOptions, Request};
use opensusy::{Cx, Error, Potential, PtParams, Region, SolverOptions, Which};

fn real_grid(n: usize, lo: f64, hi: f64) -> Vec<Cx<f64>> {
    (0..n).map(|i| Cx::new(lo + (hi - lo) * i as f64 / (n - 1) as f64, 0.0)).collect()
}

#[test]
fn type1_transformed_amplitudes_match_direct_partner() {
    let well = Potential::square(-20.0, 1.0).unwrap();
    let g = make_generator(&well, -4.28f64.powi(2), Request::Type(GenType::T1), &GeneratorOptions::default()).unwrap();
    let so = SolverOptions::default();
    for w in real_grid(10, 0.3, 6.0) {
        let s = amplitudes(&well, w, &so).unwrap();
        let t = susy_amplitudes(&s, &g).unwrap();
        let d = amplitudes(g.partner(), w, &so).unwrap();
        assert!((s.r_l.norm() - t.r_l.norm()).abs() < 1e-8 && (s.t_l.norm() - t.t_l.norm()).abs() < 1e-8);
        assert!(d.unitarity_defect().abs() < 1e-8, "{w}");
        for (a, b) in [(t.r_l, d.r_l), (t.t_l, d.t_l), (t.r_r, d.r_r), (t.t_r, d.t_r)] {
            assert!((a - b).norm() < 1e-6, "{w}: {a} {b}");
        }
    }
}

#[test]
fn type3_keeps_transmission() {
    let p = Potential::multi_step(-10.0, 1.0, 0.1, 1.0).unwrap();
    let g = make_generator(&p, -0.990f64.powi(2), Request::Type(GenType::T3a), &GeneratorOptions::default()).unwrap();
    assert_eq!(g.w_minus(), g.w_plus());
    let so = SolverOptions::default();
    for w in real_grid(12, 0.2, 5.0) {
        let s = amplitudes(&p, w, &so).unwrap();
        let t = susy_amplitudes(&s, &g).unwrap();
        assert!((t.t_l - s.t_l).norm() < 1e-8 && (t.t_r - s.t_r).norm() < 1e-8);
        assert!((t.r_l.norm() - s.r_l.norm()).abs() < 1e-8 && (t.r_r.norm() - s.r_r.norm()).abs() < 1e-8);
        let d = amplitudes(g.partner(), w, &so).unwrap();
        assert!((d.t_l - s.t_l).norm() < 1e-6, "{w}");
    }
}

#[test]
fn reflectionless_poschl_teller() {
    let so = SolverOptions::default();
    for strength in [-2.0, -6.0] {
        let p = Potential::poschl_teller(PtParams::new(strength, 1.0).unwrap());
        for w in real_grid(20, 0.1, 6.0) {
            let s = amplitudes(&p, w, &so).unwrap();
            assert!((s.t_l.norm() - 1.0).abs() < 1e-8, "{strength} {w}: {}", s.t_l.norm());
            assert!(s.r_l.norm() < 1e-8);
        }
    }
}

#[test]
fn poles_of_transmission_are_modes() {
    let p = Potential::square(4.0, 1.0).unwrap();
    let so = SolverOptions::default();
    let modes = find_modes(&p, Region::new(0.5, 6.0, -2.0, -0.05), Which::Q, &so).unwrap().modes;
    for m in modes {
        match amplitudes(&p, m.omega, &so) {
            Err(Error::AtModeFrequency(_)) => {}
            other => panic!("{}: {other:?}", m.omega),
        }
        // 1/T vanishes linearly towards the mode
        let near = amplitudes(&p, m.omega + Cx::new(1e-6, 0.0), &so).unwrap();
        assert!(1.0 / near.t_l.norm() < 1e-4, "{}", near.t_l.norm());
    }
}

#[test]
fn left_right_relations_off_the_axis() {
    let p = Potential::piecewise(vec![-1.0, 0.2, 1.5], vec![2.0, -3.0]).unwrap();
    let so = SolverOptions::default();
    for w in [Cx::new(1.0, 0.3), Cx::new(2.5, -0.4)] {
        let s = amplitudes(&p, w, &so).unwrap();
        assert_eq!(s.t_l, s.t_r);
        // an asymmetric profile reflects differently from each side
        assert!((s.r_l - s.r_r).norm() > 1e-6);
    }
    let w = Cx::new(1.7, 0.0);
    let s = amplitudes(&p, w, &so).unwrap();
    // for real w: R_R T_L* + R_L* T_L = 0
    assert!((s.r_r * s.t_l.conj() + s.r_l.conj() * s.t_l).norm() < 1e-8);
}
