use opensusy::spectral::{axis_roots, eigenfunction, find_modes, node_count, root_order};
use opensusy::{Cx, Error, Mode, ModeKind, Potential, PtParams, Region, SolverOptions, Which};

/// Bound states of the square well by bisection on the matching conditions
/// `k tan k = kappa` (even) and `-k cot k = kappa` (odd), `k^2 + kappa^2 = depth`, `a = 1`.
fn well_oracle(depth: f64) -> Vec<f64> {
    let even = |kap: f64| {
        let k = (depth - kap * kap).sqrt();
        k * k.sin() - kap * k.cos()
    };
    let odd = |kap: f64| {
        let k = (depth - kap * kap).sqrt();
        -k * k.cos() - kap * k.sin()
    };
    let mut out = Vec::new();
    for f in [&even as &dyn Fn(f64) -> f64, &odd] {
        let n = 20000;
        let top = depth.sqrt();
        for i in 0..n {
            let (mut a, mut b) = (top * i as f64 / n as f64 + 1e-12, top * (i + 1) as f64 / n as f64 - 1e-12);
            if f(a).signum() == f(b).signum() {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(m).signum() == f(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

#[test]
fn square_well_normal_modes_match_the_matching_conditions() {
    let so = SolverOptions::default();
    for depth in [5.0f64, 20.0, 45.0] {
        let p = Potential::square(-depth, 1.0).unwrap();
        let found = find_modes(&p, Region::new(-0.5, 0.5, 0.02, depth.sqrt()), Which::Q, &so).unwrap().modes;
        let want = well_oracle(depth);
        assert_eq!(found.len(), want.len(), "{depth}");
        for (m, k) in found.iter().zip(&want) {
            assert_eq!(m.kind, ModeKind::Nm);
            assert!((m.omega - Cx::new(0.0, *k)).norm() < 1e-9, "{depth}: {} {k}", m.omega);
        }
    }
}

#[test]
fn nth_normal_mode_has_n_nodes() {
    let so = SolverOptions::default();
    let p = Potential::square(-45.0, 1.0).unwrap();
    let modes = find_modes(&p, Region::new(-0.5, 0.5, 0.02, 7.0), Which::Q, &so).unwrap().modes;
    let grid: Vec<f64> = (0..=1000).map(|i| -2.0 + 0.004 * i as f64).collect();
    for (n, m) in modes.iter().enumerate() {
        let f = eigenfunction(&p, m, &grid, &so).unwrap();
        assert_eq!(node_count(&f.values).unwrap(), n, "{}", m.omega);
    }
}

#[test]
fn barrier_zero_mode_profile_is_cosh() {
    let so = SolverOptions::default();
    let p = Potential::square(0.16, 1.0).unwrap();
    let z = axis_roots(&p, -1.0, -0.01, Which::Q, &so).unwrap();
    assert_eq!(z.len(), 1);
    let w = z[0].0;
    let m = Mode::new(w, ModeKind::ZeroMode, 1, 0.0);
    let grid: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
    let f = eigenfunction(&p, &m, &grid, &so).unwrap();
    assert_eq!(node_count(&f.values).unwrap(), 0);
    let alpha = (0.16 + w.im * w.im).sqrt();
    let c = f.values[100];
    for (x, v) in grid.iter().zip(&f.values) {
        assert!((v / c - (alpha * x).cosh()).norm() < 1e-9, "{x}");
    }
}

#[test]
fn empty_region_gives_no_modes() {
    let p = Potential::square(-20.0, 1.0).unwrap();
    let r = find_modes(&p, Region::new(1.0, 0.0, 0.0, 1.0), Which::Q, &SolverOptions::default()).unwrap();
    assert!(r.modes.is_empty() && r.failures.is_empty());
}

#[test]
fn regions_below_the_band_are_refused() {
    let p = Potential::poschl_teller(PtParams::new(3.0 / 16.0, 1.0).unwrap());
    let e = find_modes(&p, Region::new(-1.0, 1.0, -3.0, 0.5), Which::Q, &SolverOptions::default()).unwrap_err();
    assert!(matches!(e, Error::BandViolation { .. }), "{e:?}");
}

#[test]
fn poschl_teller_ladder_within_the_band() {
    let so = SolverOptions::default();
    let p = Potential::poschl_teller(PtParams::new(3.0 / 16.0, 1.0).unwrap());
    let z = axis_roots(&p, -0.85, -0.01, Which::Q, &so).unwrap();
    let got: Vec<f64> = z.iter().map(|r| r.0.im).collect();
    assert_eq!(got.len(), 2, "{got:?}");
    assert!((got[0] + 0.75).abs() < 1e-7 && (got[1] + 0.25).abs() < 1e-7, "{got:?}");
}

#[test]
fn multiplicity() {
    let so = SolverOptions::default();
    let q0 = Potential::poschl_teller(PtParams::from_q(0.0, 1.0).unwrap());
    assert_eq!(root_order(&q0, Cx::new(0.0, -0.5), Which::Q, &so).unwrap(), 2);
    let well = Potential::square(-20.0, 1.0).unwrap();
    let ground = axis_roots(&well, 4.0, 4.5, Which::Q, &so).unwrap()[0].0;
    assert_eq!(root_order(&well, ground, Which::Q, &so).unwrap(), 1);
}

#[test]
fn mode_lists_are_sorted_and_closed_under_reflection() {
    let so = SolverOptions::default();
    let p = Potential::square(4.0, 1.0).unwrap();
    let modes = find_modes(&p, Region::new(-6.0, 6.0, -2.0, 1.0), Which::Q, &so).unwrap().modes;
    assert!(modes.len() >= 4);
    for w in modes.windows(2) {
        assert!(w[0].omega.im >= w[1].omega.im);
    }
    for m in &modes {
        let mirror = Cx::new(-m.omega.re, m.omega.im);
        assert!(modes.iter().any(|o| (o.omega - mirror).norm() < 1e-8), "{}", m.omega);
    }
}

#[test]
fn total_transmission_modes_of_the_multistep() {
    let so = SolverOptions::default();
    let p = Potential::multi_step(-10.0, 1.0, 0.1, 1.0).unwrap();
    let t = axis_roots::<f64>(&p, -1.5, -0.5, Which::T, &so).unwrap();
    assert_eq!(t.len(), 1);
    assert!((t[0].0.im + 0.990).abs() < 0.002);
    let found = find_modes(&p, Region::new(-0.3, 0.3, -1.5, -0.5), Which::T, &so).unwrap().modes;
    assert!(found.iter().any(|m| m.kind == ModeKind::TtmL && (m.omega - t[0].0).norm() < 1e-8), "{found:?}");
}
