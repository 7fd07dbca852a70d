use opensusy::spectral::{find_modes, wronskian, wronskian_value};
use opensusy::susy::{make_generator, spectral_delta, transform_wronskian, type4_tail, verify_isospectral, Class, GenType, GeneratorOptions, Request};
use opensusy::{Cx, ModeKind, Potential, PtParams, Region, Side, SolverOptions, Which};

fn opts() -> GeneratorOptions<f64> {
    GeneratorOptions::default()
}

fn well() -> Potential<f64> {
    Potential::square(-20.0, 1.0).unwrap()
}

#[test]
fn type1_partner_keeps_excited_states() {
    let g = make_generator(&well(), -4.28f64.powi(2), Request::Type(GenType::T1), &opts()).unwrap();
    let so = SolverOptions::default();
    let modes = find_modes(&well(), Region::new(-6.0, 6.0, -3.0, 5.0), Which::Q, &so).unwrap().modes;
    let rep = verify_isospectral(&g, &modes, &so);
    assert!(rep.all_ok(), "{rep:?}");
    assert!(rep.entries.iter().any(|e| (e.omega - Cx::new(0.0, 3.682135)).norm() < 1e-4));
    let found = find_modes(g.partner(), Region::new(-1.0, 1.0, -4.6, -4.0), Which::Q, &so).unwrap().modes;
    assert!(found.iter().any(|m| (m.omega - Cx::new(0.0, -g.k())).norm() < 1e-6), "{found:?}");
}

#[test]
fn square_well_partner_inside() {
    let g = make_generator(&well(), -4.28f64.powi(2), Request::Type(GenType::T1), &opts()).unwrap();
    let q = (20.0 - g.k() * g.k()).sqrt();
    for x in [-0.8, -0.1, 0.4, 0.95] {
        let want = -20.0 + 2.0 * q * q / (q * x).cos().powi(2);
        assert!((g.partner().value(x) - want).abs() < 1e-7 * want.abs(), "{x}");
    }
    // jumps mirror with opposite sign
    for &a in &[-1.0f64, 1.0] {
        let s = well().value(a + 1e-9 * a.signum()) - well().value(a - 1e-9 * a.signum());
        let t = g.partner().value(a + 1e-9 * a.signum()) - g.partner().value(a - 1e-9 * a.signum());
        assert!((s + t).abs() < 1e-6, "{s} {t}");
    }
}

#[test]
fn barrier_type2_partners() {
    let b = Potential::square(0.16, 1.0).unwrap();
    let so = SolverOptions::default();
    for k in [0.1813846, 2.5004562] {
        let g = make_generator(&b, -k * k, Request::Type(GenType::T2), &opts()).unwrap();
        assert_eq!(g.gen_type(), GenType::T2);
        let d = spectral_delta(&g).unwrap();
        assert_eq!([d.d_nm, d.d_qnm], [1, -1]);
        let other = if k < 1.0 { 2.5004562 } else { 0.1813846 };
        let modes = vec![opensusy::Mode::new(Cx::new(0.0, -other), ModeKind::ZeroMode, 1, 0.0)];
        let rep = verify_isospectral(&g, &modes, &so);
        assert!(rep.all_ok(), "{rep:?}");
    }
}

#[test]
fn multistep_type3() {
    let p = Potential::multi_step(-10.0, 1.0, 0.1, 1.0).unwrap();
    let g = make_generator(&p, -0.990f64.powi(2), Request::Type(GenType::T3a), &opts()).unwrap();
    assert!((g.k() - 0.98978).abs() < 1e-4, "{}", g.k());
    let so = SolverOptions::default();
    let partner = g.partner();
    let nm = find_modes(partner, Region::new(-0.3, 0.3, 0.3, 0.7), Which::Q, &so).unwrap().modes;
    assert!(nm.iter().any(|m| (m.omega - Cx::new(0.0, 0.498)).norm() < 0.002), "{nm:?}");
    let q = find_modes(partner, Region::new(-0.3, 0.3, -1.8, -1.3), Which::Q, &so).unwrap().modes;
    assert!(q.iter().any(|m| (m.omega - Cx::new(0.0, -1.570)).norm() < 0.002), "{q:?}");
    // transformation law for both Wronskians on a grid
    for i in 0..20 {
        let w = Cx::new(-2.0 + 0.2 * i as f64 + 0.05, -0.3 + 0.04 * i as f64);
        let j = wronskian(&p, w, &so).unwrap();
        let jt = transform_wronskian(&j, &g).unwrap();
        let dq = wronskian_value(partner, w, Which::Q, &so).unwrap();
        let dt = wronskian_value(partner, w, Which::T, &so).unwrap();
        assert!((jt.jq - dq).norm() < 1e-6 * dq.norm(), "{w}: {} {dq}", jt.jq);
        assert!((jt.jt - dt).norm() < 1e-6 * dt.norm(), "{w}: {} {dt}", jt.jt);
    }
}

#[test]
fn type4_barrier_tail() {
    let b = Potential::square(0.16, 1.0).unwrap();
    let g = make_generator(&b, -9.0, Request::Symmetric, &opts()).unwrap();
    let (c, d) = match g.classes().1 {
        Class::M { c, d } => (c, d),
        other => panic!("{other:?}"),
    };
    assert!((d / c + 0.829).abs() < 1e-3);
    for x in [1.2, 1.5, 2.0, 3.0, -2.0, -1.1] {
        let want = type4_tail(3.0, c, d, x);
        assert!((g.partner().value(x) - want).abs() < 1e-8, "{x}: {} {want}", g.partner().value(x));
    }
}

#[test]
fn free_field_type4_wronskian() {
    let g = make_generator(&Potential::<f64>::free(), -9.0, Request::Mix { side: Side::Right, c: 0.5, d: 0.5 }, &opts()).unwrap();
    let direct = Potential::poschl_teller(PtParams::new(-18.0, 1.0 / 3.0).unwrap());
    let so = SolverOptions::default();
    let w = Cx::new(1.0, 0.0);
    let j = wronskian(&Potential::free(), w, &so).unwrap();
    let jt = transform_wronskian(&j, &g).unwrap();
    let d = wronskian_value(&direct, w, Which::Q, &so).unwrap();
    assert!((jt.jq - d).norm() < 1e-6 * d.norm(), "{} {d}", jt.jq);
    let s = wronskian_value(g.partner(), w, Which::Q, &so).unwrap();
    assert!((s - d).norm() < 1e-6 * d.norm(), "{s} {d}");
}

#[test]
fn factorization_and_intertwining() {
    let g = make_generator(&well(), -4.28f64.powi(2), Request::Type(GenType::T1), &opts()).unwrap();
    let om2 = g.omega2();
    // test function phi = exp(-x^2) sin(3x) + i x
    let f = |x: f64| Cx::new((-x * x).exp() * (3.0 * x).sin(), x);
    let df = |x: f64| Cx::new((-x * x).exp() * (3.0 * (3.0 * x).cos() - 2.0 * x * (3.0 * x).sin()), 1.0);
    let d2f = |x: f64| {
        let e = (-x * x).exp();
        Cx::new(e * ((4.0 * x * x - 2.0 - 9.0) * (3.0 * x).sin() - 12.0 * x * (3.0 * x).cos()), 0.0)
    };
    for x in [-0.7, -0.2, 0.3, 0.8] {
        let w = g.w(x);
        let dw = g.dw(x);
        let v = well().value(x);
        // A^dag A phi = -phi'' + (W^2 - W') phi
        let a = df(x) + f(x) * w;
        let da = d2f(x) + df(x) * w + f(x) * dw;
        let lhs = -da + a * w;
        let rhs = -d2f(x) + f(x) * (v - om2);
        assert!((lhs - rhs).norm() < 1e-6, "{x}");
    }
    // A annihilates Phi
    let phi = g.phi();
    let xs = g.grid();
    let i = xs.len() / 3;
    let h = xs[i + 1] - xs[i - 1];
    let dphi = (phi[i + 1] - phi[i - 1]) / h;
    assert!((dphi + g.w(xs[i]) * phi[i]).abs() < 1e-4 * phi.iter().cloned().fold(0.0, f64::max));
}
