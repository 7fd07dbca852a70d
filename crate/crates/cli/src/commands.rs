use std::path::PathBuf;

use opensusy::bilinear::jordan_norm;
use opensusy::blackhole::{bh_superpotential, rw_potential, special_frequency, verify_bh_riccati, zerilli_potential};
use opensusy::pt::{pt_partner, pt_spectrum, pt_susy_generator, self_replication};
use opensusy::regression::{criteria, lookup, property_checks, run_criterion, Check};
use opensusy::scattering::{amplitudes, susy_amplitudes};
use opensusy::spectral::{find_modes, root_order};
use opensusy::susy::{make_generator, spectral_delta, verify_isospectral, GenType, Generator, IsoEntry};
use opensusy::wekge::{kge_to_we, we_to_kge, WeOptions, WeOutcome, WeProfile};
use opensusy::{BhParams, Cx, NumericTable, Potential, PtParams, Which};
use serde_json::{json, Value};

use crate::config::{floats, range, read_two_columns, region, which, GeneratorSpec, PotentialSpec, RunConfig};
use crate::output::{cx, modes_csv, modes_json, num, render, table_csv, write, CliError};
use crate::{Command, Common, GenArgs};

struct Ctx<'a> {
    cfg: RunConfig,
    common: &'a Common,
}

impl Ctx<'_> {
    fn potential(&self) -> Result<(PotentialSpec, Potential<f64>), CliError> {
        let spec = match (&self.common.potential, &self.cfg.potential) {
            (Some(s), _) => PotentialSpec::parse(s)?,
            (None, Some(s)) => s.clone(),
            (None, None) => return Err(CliError::validation("no potential given (--potential or config key 'potential')".into())),
        };
        let p = spec.build()?;
        Ok((spec, p))
    }

    fn region(&self, flag: &Option<String>) -> Result<Option<opensusy::Region<f64>>, CliError> {
        match (flag, self.cfg.region) {
            (Some(s), _) => {
                let v = floats(s, 4, "region")?;
                Ok(Some(region([v[0], v[1], v[2], v[3]])?))
            }
            (None, Some(r)) => Ok(Some(region(r)?)),
            (None, None) => Ok(None),
        }
    }

    fn generator(&self, args: &GenArgs) -> GeneratorSpec {
        let mut g = self.cfg.generator.clone().unwrap_or_default();
        if args.gen_type.is_some() {
            g.gen_type = args.gen_type.clone();
        }
        if args.omega.is_some() {
            g.omega = args.omega;
        }
        if args.symmetric {
            g.symmetric = Some(true);
        }
        if let Some(m) = &args.mix {
            let parts: Vec<&str> = m.split(',').collect();
            if parts.len() == 3 {
                if let (Ok(c), Ok(d)) = (parts[1].trim().parse(), parts[2].trim().parse()) {
                    g.mix = Some((parts[0].trim().to_string(), c, d));
                    return g;
                }
            }
            g.mix = Some(("invalid".into(), f64::NAN, f64::NAN));
        }
        g
    }

    fn build_generator(&self, p: &Potential<f64>, spec: &GeneratorSpec) -> Result<Generator<f64>, CliError> {
        let opts = self.cfg.tolerances().generator()?;
        Ok(make_generator(p, spec.omega2()?, spec.request()?, &opts)?)
    }

    fn json_path(&self) -> Option<PathBuf> {
        self.common.json.clone().or_else(|| self.cfg.json.clone())
    }

    fn csv_path(&self) -> Option<PathBuf> {
        self.common.csv.clone().or_else(|| self.cfg.csv.clone())
    }

    fn emit(&self, v: &Value) -> Result<(), CliError> {
        let text = render(v);
        print!("{text}");
        if let Some(p) = self.json_path() {
            write(&p, &text)?;
        }
        Ok(())
    }

    fn emit_csv(&self, text: &str) -> Result<(), CliError> {
        if let Some(p) = self.csv_path() {
            write(&p, text)?;
        }
        Ok(())
    }
}

pub fn dispatch(common: &Common, cmd: Command) -> Result<u8, CliError> {
    let cfg = RunConfig::load(common.config.as_deref())?;
    let ctx = Ctx { cfg, common };
    match cmd {
        Command::Spectrum { region, which } => spectrum(&ctx, &region, which),
        Command::Susy { generator, region, x_range } => susy(&ctx, &generator, &region, &x_range),
        Command::Scatter { omega_range, generator } => scatter(&ctx, &omega_range, &generator),
        Command::Verify { region } => verify(&ctx, &region),
        Command::Blackhole { action, l, mass } => blackhole(&ctx, &action, l, mass),
        Command::Convert { direction, input, output } => convert(&ctx, direction, input, output),
        Command::Pt { strength, width, n_max, partner, jordan, alpha } => pt(&ctx, strength, width, n_max, partner, jordan, alpha),
        Command::Regression { names, scale, list } => regression(&ctx, &names, scale, list),
    }
}

fn spectrum(ctx: &Ctx, region_flag: &Option<String>, which_flag: Option<String>) -> Result<u8, CliError> {
    let (spec, p) = ctx.potential()?;
    let r = ctx.region(region_flag)?.ok_or_else(|| CliError::validation("spectrum needs a region".into()))?;
    let w = which(which_flag.as_deref().or(ctx.cfg.which.as_deref()))?;
    let so = ctx.cfg.tolerances().solver()?;
    let search = find_modes(&p, r, w, &so)?;
    let failures: Vec<String> = search.failures.iter().map(|e| e.to_string()).collect();
    ctx.emit(&json!({
        "command": "spectrum",
        "potential": spec,
        "region": [num(r.re_min), num(r.re_max), num(r.im_min), num(r.im_max)],
        "which": if w == Which::Q { "q" } else { "t" },
        "modes": modes_json(&search.modes),
        "failures": failures,
    }))?;
    ctx.emit_csv(&modes_csv(&search.modes))?;
    Ok(0)
}

fn iso_entry(e: &IsoEntry<f64>) -> Value {
    json!({
        "re_omega": num(e.omega.re),
        "im_omega": num(e.omega.im),
        "kind": e.kind.label(),
        "partner_value": e.partner_value.map(num),
        "scale": e.scale.map(num),
        "ok": e.ok,
    })
}

fn susy(ctx: &Ctx, g: &GenArgs, region_flag: &Option<String>, x_range: &Option<String>) -> Result<u8, CliError> {
    let (spec, p) = ctx.potential()?;
    let gspec = ctx.generator(g);
    let gen = ctx.build_generator(&p, &gspec)?;
    let (l, r) = gen.classes();
    let delta = spectral_delta(&gen).ok().map(|d| {
        json!({
            "d_nm": d.d_nm, "d_qnm": d.d_qnm, "d_ttm_l": d.d_ttm_l, "d_ttm_r": d.d_ttm_r,
            "removed": cx(d.removed), "added": cx(d.added),
        })
    });
    let mut report = json!({
        "command": "susy",
        "potential": spec,
        "generator": gspec,
        "type": gen.gen_type().label(),
        "k": num(gen.k()),
        "omega": cx(gen.omega()),
        "classes": [l.letter().to_string(), r.letter().to_string()],
        "w_minus": num(gen.w_minus()),
        "w_plus": num(gen.w_plus()),
        "riccati_residual": num(gen.riccati_residual()),
        "delta": delta,
    });
    if let Some(reg) = ctx.region(region_flag)? {
        let so = ctx.cfg.tolerances().solver()?;
        let mut modes = find_modes(&p, reg, Which::Q, &so)?.modes;
        if matches!(gen.gen_type(), GenType::T3a | GenType::T3b) {
            modes.extend(find_modes(&p, reg, Which::T, &so)?.modes);
        }
        let rep = verify_isospectral(&gen, &modes, &so);
        report["isospectral"] = json!({
            "all_ok": rep.all_ok(),
            "entries": rep.entries.iter().map(iso_entry).collect::<Vec<_>>(),
            "added": rep.added.as_ref().map(iso_entry),
            "removed": rep.removed.as_ref().map(iso_entry),
        });
    }
    ctx.emit(&report)?;
    let xs = gen.grid();
    let (lo, hi, count) = match x_range.as_deref() {
        Some(s) => {
            let v = floats(s, 3, "x-range")?;
            (v[0], v[1], v[2].max(2.0) as usize)
        }
        None => ctx.cfg.x_range.unwrap_or((xs[0], xs[xs.len() - 1], 2001)),
    };
    let inside: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= lo && xs[i] <= hi).collect();
    let stride = inside.len().div_ceil(count.max(2)).max(1);
    let ln_phi = gen.ln_phi();
    let rows: Vec<Vec<f64>> = inside.iter().step_by(stride).map(|&i| vec![xs[i], p.value(xs[i]), gen.partner().value(xs[i]), gen.w(xs[i]), ln_phi[i]]).collect();
    ctx.emit_csv(&table_csv("x,v,v_tilde,w,ln_phi", &rows))?;
    Ok(0)
}

fn scatter(ctx: &Ctx, range_flag: &Option<String>, g: &GenArgs) -> Result<u8, CliError> {
    let (spec, p) = ctx.potential()?;
    let so = ctx.cfg.tolerances().solver()?;
    let r = match range_flag {
        Some(s) => {
            let v = floats(s, 3, "omega-range")?;
            (v[0], v[1], v[2] as usize)
        }
        None => ctx.cfg.omega_range.unwrap_or((0.1, 6.0, 60)),
    };
    let omegas = range(r, "omega-range")?;
    let gspec = ctx.generator(g);
    let gen = if gspec.is_set() { Some(ctx.build_generator(&p, &gspec)?) } else { None };
    let mut rows = Vec::new();
    let (mut defect, mut moduli, mut direct) = (0.0f64, 0.0f64, 0.0f64);
    for &w in &omegas {
        let s = amplitudes(&p, Cx::new(w, 0.0), &so)?;
        defect = defect.max(s.unitarity_defect().abs());
        let mut row = vec![w, s.r_l.re, s.r_l.im, s.t_l.re, s.t_l.im, s.r_r.re, s.r_r.im, s.r_l.norm_sqr(), s.t_l.norm_sqr()];
        if let Some(gen) = &gen {
            let t = susy_amplitudes(&s, gen)?;
            let d = amplitudes(gen.partner(), Cx::new(w, 0.0), &so)?;
            for (a, b) in [(s.r_l, t.r_l), (s.t_l, t.t_l), (s.r_r, t.r_r)] {
                moduli = moduli.max((a.norm() - b.norm()).abs());
            }
            for (a, b) in [(t.r_l, d.r_l), (t.t_l, d.t_l), (t.r_r, d.r_r)] {
                direct = direct.max((a - b).norm());
            }
            row.extend([t.r_l.re, t.r_l.im, t.t_l.re, t.t_l.im, d.r_l.re, d.r_l.im, d.t_l.re, d.t_l.im]);
        }
        rows.push(row);
    }
    let mut report = json!({
        "command": "scatter",
        "potential": spec,
        "omega_range": [num(r.0), num(r.1), r.2],
        "max_unitarity_defect": num(defect),
    });
    let mut header = String::from("omega,re_r_l,im_r_l,re_t_l,im_t_l,re_r_r,im_r_r,abs2_r_l,abs2_t_l");
    if let Some(gen) = &gen {
        report["type"] = json!(gen.gen_type().label());
        report["max_modulus_change"] = num(moduli);
        report["max_transformed_minus_direct"] = num(direct);
        header.push_str(",re_r_l_tilde,im_r_l_tilde,re_t_l_tilde,im_t_l_tilde,re_r_l_partner,im_r_l_partner,re_t_l_partner,im_t_l_partner");
    }
    ctx.emit(&report)?;
    ctx.emit_csv(&table_csv(&header, &rows))?;
    Ok(0)
}

fn checks_json(checks: &[Check], scale: f64) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "value": num(c.value),
                    "tolerance": if c.exact { num(c.tolerance) } else { num(c.tolerance * scale) },
                    "pass": c.passes(scale),
                    "detail": c.detail,
                })
            })
            .collect(),
    )
}

fn verify(ctx: &Ctx, region_flag: &Option<String>) -> Result<u8, CliError> {
    let (spec, p) = ctx.potential()?;
    let r = ctx.region(region_flag)?.ok_or_else(|| CliError::validation("verify needs a region".into()))?;
    let so = ctx.cfg.tolerances().solver()?;
    let checks = property_checks(&p, r, &so)?;
    let pass = checks.iter().all(|c| c.passes(1.0));
    ctx.emit(&json!({ "command": "verify", "potential": spec, "pass": pass, "checks": checks_json(&checks, 1.0) }))?;
    Ok(if pass { 0 } else { 1 })
}

fn blackhole(ctx: &Ctx, action: &str, l: Option<u32>, mass: Option<f64>) -> Result<u8, CliError> {
    if action != "verify" {
        return Err(CliError::validation(format!("unknown blackhole action '{action}' (verify)")));
    }
    let l = l.or(ctx.cfg.l).unwrap_or(2);
    let mass = mass.or(ctx.cfg.mass).unwrap_or(1.0);
    crate::config::finite(&[mass], "mass")?;
    let bh = BhParams::new(mass, l)?;
    let xs = range(ctx.cfg.x_range.unwrap_or((-60.0 * mass, 90.0 * mass, 3001)), "x-range")?;
    let rep = verify_bh_riccati(&bh, &xs);
    let pass = rep.passes(1e-8);
    ctx.emit(&json!({
        "command": "blackhole verify",
        "l": l,
        "mass": num(mass),
        "special_frequency": cx(special_frequency(&bh)),
        "rw_residual": num(rep.rw_residual),
        "zerilli_residual": num(rep.zerilli_residual),
        "rw_peak": num(rep.rw_peak),
        "zerilli_peak": num(rep.zerilli_peak),
        "tolerance": num(1e-8),
        "pass": pass,
    }))?;
    let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, rw_potential(&bh, x), zerilli_potential(&bh, x), bh_superpotential(&bh, x)]).collect();
    ctx.emit_csv(&table_csv("x,v_rw,v_zerilli,w", &rows))?;
    Ok(if pass { 0 } else { 1 })
}

fn convert(ctx: &Ctx, direction: Option<String>, input: Option<PathBuf>, output: Option<PathBuf>) -> Result<u8, CliError> {
    let dir = direction.or(ctx.cfg.direction.clone()).ok_or_else(|| CliError::validation("convert needs --direction".into()))?;
    let output = output.or(ctx.cfg.output.clone());
    let input = input.or(ctx.cfg.input.clone());
    match dir.as_str() {
        "we-to-kge" => {
            let path = input.ok_or_else(|| CliError::validation("we-to-kge needs --input z,rho CSV".into()))?;
            let (zs, rho) = read_two_columns(&path)?;
            if zs.len() < 8 {
                return Err(CliError::validation("density needs at least 8 samples".into()));
            }
            let h = (zs[zs.len() - 1] - zs[0]) / (zs.len() - 1) as f64;
            if zs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * (1.0 + h.abs())) {
                return Err(CliError::validation("density must be sampled on a uniform z grid".into()));
            }
            let prof = WeProfile::new(zs[0], h, rho)?;
            let img = we_to_kge(&prof)?;
            let rows: Vec<Vec<f64>> = (0..prof.len()).map(|i| vec![img.x[i], img.v[i], prof.z(i), img.prefactor[i]]).collect();
            if let Some(o) = &output {
                write(o, &table_csv("x,v,z,prefactor", &rows))?;
            }
            let vmax = img.v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            ctx.emit(&json!({
                "command": "convert",
                "direction": dir,
                "samples": prof.len(),
                "x_range": [num(img.x[0]), num(img.x[img.x.len() - 1])],
                "max_abs_v": num(vmax),
            }))?;
            Ok(0)
        }
        "kge-to-we" => {
            let p = match (input, &ctx.common.potential, &ctx.cfg.potential) {
                (Some(path), _, _) => {
                    let (xs, vs) = read_two_columns(&path)?;
                    Potential::numeric(NumericTable::new(xs, vs)?)
                }
                _ => ctx.potential()?.1,
            };
            let img = kge_to_we(&p, &WeOptions::default())?;
            let outcome = match img.outcome {
                WeOutcome::FullLine { left_value } => json!({ "kind": "full_line", "left_value": num(left_value) }),
                WeOutcome::SemiInfinite { z_min } => json!({ "kind": "semi_infinite", "z_min": num(z_min) }),
                WeOutcome::BoundStateObstruction { x_node } => json!({ "kind": "bound_state_obstruction", "x_node": num(x_node) }),
            };
            if let (Some(o), Some(prof)) = (&output, &img.profile) {
                let rows: Vec<Vec<f64>> = (0..prof.len()).map(|i| vec![prof.z(i), prof.rho()[i]]).collect();
                write(o, &table_csv("z,rho", &rows))?;
            }
            ctx.emit(&json!({ "command": "convert", "direction": dir, "outcome": outcome, "samples": img.profile.as_ref().map(|p| p.len()) }))?;
            Ok(0)
        }
        other => Err(CliError::validation(format!("direction '{other}' (we-to-kge or kge-to-we)"))),
    }
}

fn pt(ctx: &Ctx, strength: Option<f64>, width: Option<f64>, n_max: Option<usize>, partner: Option<String>, jordan: Option<f64>, alpha: Option<f64>) -> Result<u8, CliError> {
    let strength = strength.or(ctx.cfg.strength).unwrap_or(3.0 / 16.0);
    let width = width.or(ctx.cfg.width).unwrap_or(1.0);
    crate::config::finite(&[strength, width], "pt")?;
    let pt = PtParams::new(strength, width)?;
    let n_max = n_max.or(ctx.cfg.n_max).unwrap_or(3);
    let levels: Vec<Value> = pt_spectrum(pt.q(), width, n_max)
        .iter()
        .map(|l| {
            json!({
                "n": l.n, "sign": l.sign, "parity": l.parity,
                "re_omega": num(l.mode.omega.re), "im_omega": num(l.mode.omega.im),
                "kind": l.mode.kind.label(), "order": l.mode.order,
            })
        })
        .collect();
    let mut report = json!({ "command": "pt", "strength": num(strength), "width": num(width), "q": cx(pt.q()), "levels": levels });
    let partner = match partner {
        Some(s) => {
            let v = floats(&s, 2, "partner")?;
            Some((v[0] as usize, if v[1] < 0.0 { -1i8 } else { 1 }))
        }
        None => ctx.cfg.partner,
    };
    if let Some((n, sign)) = partner {
        let p = pt_partner(&pt, n, sign)?;
        let mut info = json!({ "n": n, "sign": sign });
        if let opensusy::PotentialKind::PoschlTeller(q) = p.kind() {
            info["strength"] = num(q.strength);
            info["reduced_strength"] = num(q.strength * q.width * q.width);
        }
        let xs = range(ctx.cfg.x_range.unwrap_or((-10.0 * width, 10.0 * width, 2001)), "x-range")?;
        let base = Potential::poschl_teller(pt);
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x, base.value(x), p.value(x)]).collect();
        ctx.emit_csv(&table_csv("x,v,v_tilde", &rows))?;
        if let Some(hw) = jordan.or(ctx.cfg.jordan_half_width) {
            let gen = pt_susy_generator(&pt, n, sign)?;
            let so = ctx.cfg.tolerances().solver()?;
            let order = root_order(gen.partner(), -gen.omega(), Which::Q, &so).unwrap_or(0);
            if order != 2 {
                return Err(CliError::validation(format!("partner ({n},{sign}) has no double zero at {}", opensusy::io::fmt_complex(-gen.omega()))));
            }
            let r = jordan_norm(&gen, hw, &so)?;
            info["jordan"] = json!({
                "root_order": order,
                "ratio_wronskian": cx(r.ratio_wronskian),
                "ratio_bilinear": cx(r.ratio_bilinear),
                "reverse_ratio": cx(r.reverse_ratio),
                "expected": cx(r.expected),
                "expected_reverse": cx(r.expected_reverse),
            });
        }
        report["partner"] = info;
    }
    if let Some(a) = alpha.or(ctx.cfg.alpha) {
        let s = self_replication(a, 1.0)?;
        let (v, vt) = s.as_pt()?;
        report["self_replication"] = json!({
            "alpha": num(a), "beta": num(s.beta), "k": num(s.k),
            "v_strength": num(v.strength), "v_tilde_strength": num(vt.strength), "width": num(v.width),
        });
    }
    ctx.emit(&report)?;
    Ok(0)
}

fn regression(ctx: &Ctx, names: &[String], scale: f64, list: bool) -> Result<u8, CliError> {
    if list {
        let all: Vec<Value> = criteria().into_iter().map(|(i, n)| json!({ "id": i, "name": n })).collect();
        ctx.emit(&json!({ "criteria": all }))?;
        return Ok(0);
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(CliError::validation(format!("scale = {scale} must be positive")));
    }
    let ids: Vec<usize> = if names.is_empty() {
        criteria().into_iter().map(|c| c.0).collect()
    } else {
        names.iter().map(|n| lookup(n).ok_or_else(|| CliError::validation(format!("unknown criterion '{n}'")))).collect::<Result<_, _>>()?
    };
    let mut out = Vec::new();
    let mut all = true;
    for id in ids {
        let r = run_criterion(id, scale);
        eprintln!("[{}] {:>2} {}", if r.passed() { "PASS" } else { "FAIL" }, r.id, r.name);
        all &= r.passed();
        out.push(json!({
            "id": r.id,
            "name": r.name,
            "pass": r.passed(),
            "error": r.error,
            "checks": checks_json(&r.checks, scale),
        }));
    }
    ctx.emit(&json!({ "command": "regression", "scale": num(scale), "pass": all, "criteria": out }))?;
    Ok(if all { 0 } else { 1 })
}
