use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opensusy")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("opensusy-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn well_has_three_normal_modes() {
    let o = run(&["spectrum", "--potential", "well", "--region=-6,6,0.01,5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let modes = v["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 3);
    assert!(modes.iter().all(|m| m["kind"] == "NM"));
    let top = modes[0]["im_omega"].as_f64().unwrap();
    assert!((top - 4.28492).abs() < 1e-4, "{top}");
}

#[test]
fn barrier_type2_partner_moves_the_zero_mode() {
    let o = run(&["susy", "--potential", "barrier", "--type", "2", "--omega=-0.181"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["type"], "T2");
    assert_eq!(v["delta"]["d_nm"], 1);
    assert_eq!(v["delta"]["d_qnm"], -1);
    assert!((v["delta"]["added"]["im"].as_f64().unwrap() - 0.1814).abs() < 1e-3);
}

#[test]
fn empty_region_is_not_an_error() {
    let o = run(&["spectrum", "--potential", "well", "--region=1,0,0,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["modes"].as_array().unwrap().len(), 0);
}

#[test]
fn invalid_input_exits_2_with_a_json_record() {
    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"potential": {"kind": "square", "v0": -20, "a": -1}, "region": [-1, 1, 0, 1]}"#).unwrap();
    for o in [
        run(&["spectrum", "--config", cfg.to_str().unwrap()]),
        run(&["spectrum", "--potential", "{\"kind\":\"square\",\"v0\":\"x\"}", "--region=0,1,0,1"]),
        run(&["spectrum", "--potential", "well", "--region=0,1,0"]),
        run(&["spectrum", "--bogus"]),
    ] {
        assert_eq!(o.status.code(), Some(2));
        let e: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(e["exit_code"], 2);
        assert!(e["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let cfg = scratch("well.json");
    std::fs::write(&cfg, r#"{"potential": "well", "region": [-6, 6, 3, 5], "which": "q"}"#).unwrap();
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(json(&o)["modes"].as_array().unwrap().len(), 2);
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap(), "--region=-6,6,0.01,5"]);
    assert_eq!(json(&o)["modes"].as_array().unwrap().len(), 3);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["spectrum", "--potential", "barrier", "--region=-4,4,-1,1"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let csv = scratch("modes.csv");
    let o = run(&["spectrum", "--potential", "barrier", "--region=-4,4,-1,1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.stdout, a.stdout);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("re_omega,im_omega,kind,order,residual\n"));
    assert_eq!(text.lines().count(), 1 + json(&a)["modes"].as_array().unwrap().len());
}

#[test]
fn regression_reports_values_and_tightening_fails() {
    let o = run(&["regression", "barrier-zero-modes"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["criteria"][0]["id"], 3);
    assert!(v["criteria"][0]["checks"].as_array().unwrap().iter().all(|c| c["value"].is_number() && c["tolerance"].is_number()));
    let o = run(&["regression", "3", "--scale", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);
    let o = run(&["regression", "--list"]);
    assert_eq!(json(&o)["criteria"].as_array().unwrap().len(), 16);
}

#[test]
fn black_hole_partners_verify() {
    let o = run(&["blackhole", "verify", "--l", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert!(v["rw_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn verify_passes_on_the_barrier() {
    let o = run(&["verify", "--potential", "barrier", "--region=-4,4,-1,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn scatter_with_a_generator_matches_the_direct_partner() {
    let o = run(&["scatter", "--potential", "barrier", "--omega-range", "0.5,3,6", "--type", "2", "--omega=-0.181"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["max_unitarity_defect"].as_f64().unwrap() < 1e-10);
    assert!(v["max_modulus_change"].as_f64().unwrap() < 1e-10);
    assert!(v["max_transformed_minus_direct"].as_f64().unwrap() < 1e-8);
}

#[test]
fn density_converts_to_a_potential() {
    let rho = scratch("rho.csv");
    let mut text = String::from("z,rho\n");
    for i in 0..=800 {
        let z = -8.0 + 0.02 * i as f64;
        text.push_str(&format!("{z},{}\n", 1.0 + 0.5 * (-z * z).exp()));
    }
    std::fs::write(&rho, text).unwrap();
    let out = scratch("v.csv");
    let o = run(&["convert", "--direction", "we-to-kge", "--input", rho.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 802);
    assert!(json(&o)["max_abs_v"].as_f64().unwrap() > 0.0);
}

#[test]
fn jordan_block_of_the_critical_partner() {
    let o = run(&["pt", "--strength=-0.75", "--partner", "0,-1", "--jordan", "13"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let j = &json(&o)["partner"]["jordan"];
    assert_eq!(j["root_order"], 2);
    assert!((j["ratio_wronskian"]["im"].as_f64().unwrap() + 1.0).abs() < 1e-4);
    let o = run(&["pt", "--partner", "0,1", "--jordan", "13"]);
    assert_eq!(o.status.code(), Some(2));
}
