//! JSON run configuration and its validation.

use std::fs;
use std::path::{Path, PathBuf};

use opensusy::ode::Tolerances;
use opensusy::susy::{GenType, GeneratorOptions, Request};
use opensusy::{BhParams, NumericTable, Potential, PtParams, Region, Side, SolverOptions, Which};
use serde::{Deserialize, Serialize};

use crate::output::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Free,
    Square { v0: f64, a: f64 },
    MultiStep { v1: f64, v0: f64, b: f64, a: f64 },
    Piecewise { edges: Vec<f64>, values: Vec<f64> },
    PoschlTeller { strength: f64, width: f64 },
    TruncatedPoschlTeller { strength: f64, width: f64, a: f64 },
    ReggeWheeler { mass: f64, l: u32 },
    Zerilli { mass: f64, l: u32 },
    /// Two-column CSV `x,V` on increasing `x`.
    Table { path: PathBuf },
}

impl PotentialSpec {
    /// A JSON object, or one of the named fixtures.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let t = s.trim();
        if t.starts_with('{') {
            return serde_json::from_str(t).map_err(|e| CliError::validation(format!("potential: {e}")));
        }
        Ok(match t {
            "free" => Self::Free,
            "well" => Self::Square { v0: -20.0, a: 1.0 },
            "barrier" => Self::Square { v0: 0.16, a: 1.0 },
            "multistep" => Self::MultiStep { v1: -10.0, v0: 1.0, b: 0.1, a: 1.0 },
            "pt" => Self::PoschlTeller { strength: 3.0 / 16.0, width: 1.0 },
            "truncated-pt" => Self::TruncatedPoschlTeller { strength: 3.0 / 16.0, width: 1.0, a: 2.0 },
            _ => return Err(CliError::validation(format!("unknown potential '{t}' (use a JSON object or free, well, barrier, multistep, pt, truncated-pt)"))),
        })
    }

    fn numbers(&self) -> Vec<f64> {
        match self {
            Self::Free | Self::Table { .. } => vec![],
            Self::Square { v0, a } => vec![*v0, *a],
            Self::MultiStep { v1, v0, b, a } => vec![*v1, *v0, *b, *a],
            Self::Piecewise { edges, values } => edges.iter().chain(values).copied().collect(),
            Self::PoschlTeller { strength, width } => vec![*strength, *width],
            Self::TruncatedPoschlTeller { strength, width, a } => vec![*strength, *width, *a],
            Self::ReggeWheeler { mass, .. } | Self::Zerilli { mass, .. } => vec![*mass],
        }
    }

    pub fn build(&self) -> Result<Potential<f64>, CliError> {
        finite(&self.numbers(), "potential")?;
        Ok(match self {
            Self::Free => Potential::free(),
            Self::Square { v0, a } => Potential::square(*v0, *a)?,
            Self::MultiStep { v1, v0, b, a } => Potential::multi_step(*v1, *v0, *b, *a)?,
            Self::Piecewise { edges, values } => Potential::piecewise(edges.clone(), values.clone())?,
            Self::PoschlTeller { strength, width } => Potential::poschl_teller(PtParams::new(*strength, *width)?),
            Self::TruncatedPoschlTeller { strength, width, a } => Potential::truncated_poschl_teller(PtParams::new(*strength, *width)?, *a)?,
            Self::ReggeWheeler { mass, l } => Potential::regge_wheeler(BhParams::new(*mass, *l)?),
            Self::Zerilli { mass, l } => Potential::zerilli(BhParams::new(*mass, *l)?),
            Self::Table { path } => {
                let (xs, vs) = read_two_columns(path)?;
                Potential::numeric(NumericTable::new(xs, vs)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub dedup: Option<f64>,
    pub grid_re: Option<usize>,
    pub grid_im: Option<usize>,
    pub axis_samples: Option<usize>,
    pub newton_max_iter: Option<usize>,
}

impl ToleranceSpec {
    pub fn solver(&self) -> Result<SolverOptions<f64>, CliError> {
        let mut so = SolverOptions::default();
        if let Some(v) = self.rtol {
            so.prop.tol.rtol = tolerance(v, "rtol")?;
        }
        if let Some(v) = self.atol {
            so.prop.tol.atol = tolerance(v, "atol")?;
        }
        if let Some(v) = self.dedup {
            so.dedup = tolerance(v, "dedup")?;
        }
        if let Some(n) = self.grid_re {
            so.grid_re = n.max(3);
        }
        if let Some(n) = self.grid_im {
            so.grid_im = n.max(3);
        }
        if let Some(n) = self.axis_samples {
            so.axis_samples = n.max(8);
        }
        if let Some(n) = self.newton_max_iter {
            so.newton_max_iter = n.max(1);
        }
        Ok(so)
    }

    pub fn generator(&self) -> Result<GeneratorOptions<f64>, CliError> {
        let mut g = GeneratorOptions::default();
        let mut tol: Tolerances<f64> = g.tol;
        if let Some(v) = self.rtol {
            tol.rtol = tolerance(v, "rtol")?;
        }
        if let Some(v) = self.atol {
            tol.atol = tolerance(v, "atol")?;
        }
        g.tol = tol;
        g.prop.tol = tol;
        Ok(g)
    }
}

/// Generator request: `omega` is `Im Omega`, so `Omega^2 = -omega^2`.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(rename = "type")]
    pub gen_type: Option<String>,
    pub omega: Option<f64>,
    pub symmetric: Option<bool>,
    /// `[side, c, d]` with side `left` or `right`.
    pub mix: Option<(String, f64, f64)>,
}

impl GeneratorSpec {
    pub fn is_set(&self) -> bool {
        self.gen_type.is_some() || self.symmetric == Some(true) || self.mix.is_some()
    }

    pub fn omega2(&self) -> Result<f64, CliError> {
        let w = self.omega.ok_or_else(|| CliError::validation("generator needs omega (Im Omega)".into()))?;
        finite(&[w], "generator omega")?;
        Ok(-w * w)
    }

    pub fn request(&self) -> Result<Request<f64>, CliError> {
        if let Some((side, c, d)) = &self.mix {
            finite(&[*c, *d], "mix")?;
            let side = match side.as_str() {
                "left" => Side::Left,
                "right" => Side::Right,
                other => return Err(CliError::validation(format!("mix side '{other}' (left or right)"))),
            };
            return Ok(Request::Mix { side, c: *c, d: *d });
        }
        if self.symmetric == Some(true) {
            return Ok(Request::Symmetric);
        }
        let t = match self.gen_type.as_deref() {
            Some("1") => GenType::T1,
            Some("2") => GenType::T2,
            Some("3a") | Some("3") => GenType::T3a,
            Some("3b") => GenType::T3b,
            Some("4") => return Err(CliError::validation("type 4 needs mix coefficients or symmetric".into())),
            Some(other) => return Err(CliError::validation(format!("unknown generator type '{other}'"))),
            None => return Err(CliError::validation("no generator requested".into())),
        };
        Ok(Request::Type(t))
    }
}

fn potential_or_name<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<PotentialSpec>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Name(String),
        Spec(serde_json::Value),
    }
    let spec = match Raw::deserialize(d)? {
        Raw::Name(n) => PotentialSpec::parse(&n),
        Raw::Spec(v) => PotentialSpec::parse(&v.to_string()),
    };
    spec.map(Some).map_err(|e| serde::de::Error::custom(e.message))
}

/// One flat JSON document; each subcommand reads the keys it needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// A potential object or a fixture name.
    #[serde(default, deserialize_with = "potential_or_name")]
    pub potential: Option<PotentialSpec>,
    /// `[re_min, re_max, im_min, im_max]`
    pub region: Option<[f64; 4]>,
    pub which: Option<String>,
    pub generator: Option<GeneratorSpec>,
    pub tolerances: Option<ToleranceSpec>,
    /// `[lo, hi, count]` real frequencies.
    pub omega_range: Option<(f64, f64, usize)>,
    /// `[lo, hi, count]` sample points for profiles.
    pub x_range: Option<(f64, f64, usize)>,
    pub mass: Option<f64>,
    pub l: Option<u32>,
    pub strength: Option<f64>,
    pub width: Option<f64>,
    pub n_max: Option<usize>,
    pub partner: Option<(usize, i8)>,
    pub jordan_half_width: Option<f64>,
    pub alpha: Option<f64>,
    pub direction: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }

    pub fn tolerances(&self) -> ToleranceSpec {
        self.tolerances.unwrap_or_default()
    }
}

pub fn finite(xs: &[f64], what: &str) -> Result<(), CliError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CliError::validation(format!("{what}: non-finite value")))
    }
}

fn tolerance(v: f64, what: &str) -> Result<f64, CliError> {
    if !(v.is_finite() && v >= 1e-14) {
        return Err(CliError::validation(format!("{what} = {v} must be finite and >= 1e-14")));
    }
    Ok(v)
}

pub fn region(r: [f64; 4]) -> Result<Region<f64>, CliError> {
    finite(&r, "region")?;
    Ok(Region::new(r[0], r[1], r[2], r[3]))
}

pub fn which(s: Option<&str>) -> Result<Which, CliError> {
    match s.unwrap_or("q") {
        "q" | "Q" => Ok(Which::Q),
        "t" | "T" => Ok(Which::T),
        other => Err(CliError::validation(format!("which = '{other}' (q or t)"))),
    }
}

pub fn range(r: (f64, f64, usize), what: &str) -> Result<Vec<f64>, CliError> {
    finite(&[r.0, r.1], what)?;
    if r.2 < 1 {
        return Err(CliError::validation(format!("{what}: count must be positive")));
    }
    if r.2 == 1 {
        return Ok(vec![r.0]);
    }
    Ok((0..r.2).map(|i| r.0 + (r.1 - r.0) * i as f64 / (r.2 - 1) as f64).collect())
}

/// Comma-separated floats, `a,b,c`.
pub fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n => {
            finite(&v, what)?;
            Ok(v)
        }
        _ => Err(CliError::validation(format!("{what}: expected {n} comma-separated numbers, got '{s}'"))),
    }
}

/// Two numeric columns; a non-numeric first line is taken as a header.
pub fn read_two_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = (cols.len() >= 2).then(|| (cols[0].parse::<f64>(), cols[1].parse::<f64>()));
        match parsed {
            Some((Ok(x), Ok(y))) => {
                finite(&[x, y], &format!("{} line {}", path.display(), i + 1))?;
                a.push(x);
                b.push(y);
            }
            _ if i == 0 => continue,
            _ => return Err(CliError::validation(format!("{} line {}: expected two numbers", path.display(), i + 1))),
        }
    }
    Ok((a, b))
}
