use opensusy::spectral::find_modes;
use opensusy::wekge::{kge_to_we, map_state, map_state_check, we_to_kge, WeOptions, WeOutcome, WeProfile};
use opensusy::{Cx, Error, Potential, PtParams, Region, SolverOptions, Which};

fn bump(z: f64) -> f64 {
    (1.0 + 0.3 * (-z * z).exp()).powi(2)
}

fn bump_profile() -> WeProfile<f64> {
    WeProfile::from_fn(bump, -8.0, 8.0, 8000).unwrap()
}

#[test]
fn uniform_density_is_free() {
    let p = WeProfile::<f64>::from_fn(|_| 1.0, -3.0, 3.0, 600).unwrap();
    let img = we_to_kge(&p).unwrap();
    assert!(img.v.iter().all(|v| v.abs() < 1e-12));
    for (x, z) in img.x.iter().zip(p.zs()) {
        assert!((x - z).abs() < 1e-12);
    }
    let back = kge_to_we(&Potential::<f64>::free(), &WeOptions::default()).unwrap();
    assert_eq!(back.outcome, WeOutcome::FullLine { left_value: 1.0 });
    assert!(back.profile.unwrap().rho().iter().all(|r| (r - 1.0).abs() < 1e-14));
}

#[test]
fn bump_density_round_trip() {
    let prof = bump_profile();
    let img = we_to_kge(&prof).unwrap();
    // the image is bound-state free and q -> 1 on both sides
    let back = kge_to_we(&img.potential, &WeOptions::default()).unwrap();
    match back.outcome {
        WeOutcome::FullLine { left_value } => assert!((left_value - 1.0).abs() < 1e-6, "{left_value}"),
        other => panic!("{other:?}"),
    }
    let r = back.profile.unwrap();
    let mut worst = 0.0f64;
    for (i, z) in r.zs().into_iter().enumerate() {
        worst = worst.max((r.rho()[i] - bump(z)).abs());
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn transformed_field_solves_the_kge() {
    // time-harmonic WE solution psi'' = -w^2 rho psi by RK4 on the profile grid
    let prof = bump_profile();
    let img = we_to_kge(&prof).unwrap();
    let w = 1.3;
    let h = prof.spacing();
    let zs = prof.zs();
    let f = |z: f64, y: [f64; 2]| [y[1], -w * w * bump(z) * y[0]];
    let mut y = [1.0, 0.0];
    let mut psi = vec![y[0]];
    for k in 0..zs.len() - 1 {
        let z = zs[k];
        let k1 = f(z, y);
        let k2 = f(z + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(z + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]]);
        let k4 = f(z + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        y = [y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]), y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])];
        psi.push(y[0]);
    }
    // phi = sqrt(n) psi; phi_xx = (1/n) d/dz ((1/n) phi_z)
    let n = prof.n();
    let phi: Vec<f64> = psi.iter().zip(&img.prefactor).map(|(p, s)| p * s).collect();
    let mut worst = 0.0f64;
    let scale = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 4..phi.len() - 4 {
        let dz = |g: &dyn Fn(usize) -> f64, j: usize| (g(j - 2) - 8.0 * g(j - 1) + 8.0 * g(j + 1) - g(j + 2)) / (12.0 * h);
        let phix = |j: usize| dz(&|k| phi[k], j) / n[j];
        let phixx = dz(&phix, i) / n[i];
        let res = -phixx + img.v[i] * phi[i] - w * w * phi[i];
        worst = worst.max(res.abs());
    }
    assert!(worst < 1e-6 * scale.max(1.0), "{worst}");
}

#[test]
fn bound_states_obstruct_the_map() {
    let so = SolverOptions::default();
    let well = Potential::square(-20.0, 1.0).unwrap();
    assert!(matches!(kge_to_we(&well, &WeOptions::default()).unwrap().outcome, WeOutcome::BoundStateObstruction { .. }));
    assert_eq!(find_modes(&well, Region::new(-0.5, 0.5, 0.1, 5.0), Which::Q, &so).unwrap().modes.len(), 3);
    let pt = Potential::poschl_teller(PtParams::new(-2.0, 1.0).unwrap());
    assert!(matches!(kge_to_we(&pt, &WeOptions::default()).unwrap().outcome, WeOutcome::BoundStateObstruction { .. }));
}

#[test]
fn barrier_maps_to_a_half_line() {
    let barrier = Potential::<f64>::square(0.16, 1.0).unwrap();
    let so = SolverOptions::default();
    assert!(find_modes(&barrier, Region::new(-0.5, 0.5, 0.05, 3.0), Which::Q, &so).unwrap().modes.is_empty());
    let img = kge_to_we(&barrier, &WeOptions::default()).unwrap();
    let z_min = match img.outcome {
        WeOutcome::SemiInfinite { z_min } => z_min,
        other => panic!("{other:?}"),
    };
    let prof = img.profile.unwrap();
    assert!(prof.rho().iter().all(|&r| r > 0.0));
    assert!(prof.z(0) > z_min);
    // round trip V away from the jumps
    let back = we_to_kge(&prof).unwrap();
    let mut checked = 0;
    for (x, v) in back.x.iter().zip(&back.v) {
        if ((x.abs() - 1.0).abs()) > 0.02 && (x - back.x[0]).abs() > 0.02 && (x - back.x[back.x.len() - 1]).abs() > 0.02 {
            let want = if x.abs() < 1.0 { 0.16 } else { 0.0 };
            assert!((v - want).abs() < 1e-6, "{x}: {v}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn rough_and_negative_densities_are_rejected() {
    let step = WeProfile::from_fn(|z: f64| if z.abs() < 1.0 { 2.0 } else { 1.0 }, -3.0, 3.0, 600).unwrap();
    assert_eq!(we_to_kge(&step).unwrap_err(), Error::InsufficientSmoothness);
    assert!(matches!(WeProfile::from_fn(|z: f64| 1.0 - 2.0 * (-z * z).exp(), -6.0, 6.0, 600), Err(Error::NonPositiveDensity(_))));
}

#[test]
fn bilinear_map_is_invariant() {
    let prof = bump_profile();
    let img = we_to_kge(&prof).unwrap();
    let zs = prof.zs();
    let state = |a: f64, b: f64, c: f64| -> (Vec<Cx<f64>>, Vec<Cx<f64>>) {
        let s1 = zs.iter().map(|&z| Cx::new((a * z).sin() * (-0.1 * z * z).exp(), b * z.cos())).collect();
        let s2 = zs.iter().map(|&z| Cx::new(c * (-(z - 1.0).powi(2)).exp(), z / (1.0 + z * z))).collect();
        (s1, s2)
    };
    let u = state(0.7, 0.2, 1.5);
    let v = state(1.9, -0.4, 0.3);
    let (r, scale) = map_state_check(&prof, &img, (&u.0, &u.1), (&v.0, &v.1)).unwrap();
    assert!(r < 1e-6 * scale, "{r} {scale}");
    let flat = WeProfile::<f64>::from_fn(|_| 1.0, -8.0, 8.0, 8000).unwrap();
    let fi = we_to_kge(&flat).unwrap();
    let (r, scale) = map_state_check(&flat, &fi, (&u.0, &u.1), (&v.0, &v.1)).unwrap();
    assert!(r < 1e-12 * scale, "{r}");
    let (a, _) = map_state(&flat, &u.0, &u.1);
    assert_eq!(a, u.0);
}
