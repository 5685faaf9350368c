//! Density scans and table output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::bogoliubov::{reference_energy, SecondOrder};
use crate::error::{Error, Result};
use crate::first_order::{dyson_upper, ly_lower, BoundReport, DysonMode};
use crate::numerics::geometry::s_n;
use crate::potentials::RadialPotential;
use crate::scattering::{solve_zero_energy, ScatterOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl RhoGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match (i, self.spacing) {
                    (0, _) => self.min,
                    (i, _) if i + 1 == self.points => self.max,
                    (_, Spacing::Linear) => self.min + t * (self.max - self.min),
                    (_, Spacing::Log) => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundSet {
    pub lower: bool,
    pub upper_first: bool,
    pub upper_second: bool,
}

impl FromStr for BoundSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = BoundSet::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "lower" => set.lower = true,
                "upper_first" => set.upper_first = true,
                "upper_second" => set.upper_second = true,
                "all" => set = BoundSet { lower: true, upper_first: true, upper_second: true },
                other => return Err(Error::Parse(format!("unknown bound '{other}'"))),
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parse(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    /// `None` writes to stdout.
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub potential: String,
    pub rho_grid: RhoGrid,
    pub bounds: BoundSet,
    pub outputs: Vec<OutputSpec>,
}

/// Keys accepted in a TOML run file; all optional so the command line can fill gaps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PartialConfig {
    pub dim: Option<u32>,
    pub potential: Option<String>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub rho_points: Option<usize>,
    pub rho_log: Option<bool>,
    pub bounds: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        PartialConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `self` win over `other`.
    pub fn or(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            dim: self.dim.or(other.dim),
            potential: self.potential.or(other.potential),
            rho_min: self.rho_min.or(other.rho_min),
            rho_max: self.rho_max.or(other.rho_max),
            rho_points: self.rho_points.or(other.rho_points),
            rho_log: self.rho_log.or(other.rho_log),
            bounds: self.bounds.or(other.bounds),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
        }
    }

    pub fn finish(self) -> Result<RunConfig> {
        let missing = |k: &str| Error::Parse(format!("missing required setting '{k}'"));
        let rho_min = self.rho_min.ok_or_else(|| missing("rho-min"))?;
        let points = self.rho_points.unwrap_or(1);
        let cfg = RunConfig {
            n: self.dim.ok_or_else(|| missing("dim"))?,
            potential: self.potential.ok_or_else(|| missing("potential"))?,
            rho_grid: RhoGrid {
                min: rho_min,
                max: self.rho_max.unwrap_or(rho_min),
                points,
                spacing: if self.rho_log.unwrap_or(false) { Spacing::Log } else { Spacing::Linear },
            },
            bounds: self.bounds.as_deref().unwrap_or("all").parse()?,
            outputs: vec![OutputSpec {
                path: self.out,
                format: self.format.as_deref().unwrap_or("csv").parse()?,
            }],
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Domain(format!("dimension must be at least 3, got {}", self.n)));
        }
        let g = &self.rho_grid;
        if !(g.min > 0.0 && g.min.is_finite()) {
            return Err(Error::Domain(format!("rho-min must be positive, got {}", g.min)));
        }
        if g.points < 1 {
            return Err(Error::Domain("rho-points must be at least 1".into()));
        }
        if !(g.max >= g.min && g.max.is_finite()) {
            return Err(Error::Domain(format!("rho-max {} must be ≥ rho-min {}", g.max, g.min)));
        }
        Ok(())
    }
}

fn flag(tag: &str, e: &Error) -> String {
    format!("{tag}: {e}")
}

/// Solves the scattering problem once and evaluates the requested bounds at each density.
pub fn run_scan(cfg: &RunConfig) -> Result<Vec<BoundReport>> {
    cfg.validate()?;
    let pot: RadialPotential = cfg.potential.parse()?;
    let n = cfg.n;
    let sol = solve_zero_energy(&pot, n, ScatterOptions::default())?;
    let second = SecondOrder::new(&sol);
    let a_pow = sol.a_pow();
    let a = sol.a();
    let rows = cfg
        .rho_grid
        .values()
        .into_par_iter()
        .map(|rho| {
            let mut flags = Vec::new();
            let leading = s_n(n) * a_pow * rho;
            let mut row = BoundReport {
                n,
                rho,
                y: a_pow * a * a * rho,
                leading,
                lower: None,
                upper_first: None,
                q: None,
                q_tilde: None,
                omega: None,
                upper_second: None,
                reference: Some(reference_energy(n, a_pow, rho)),
                flags: Vec::new(),
            };
            if cfg.bounds.lower {
                match pot.support_radius() {
                    None => flags.push("lower: potential has no compact support".to_string()),
                    Some(_) if a_pow == 0.0 => row.lower = Some(0.0),
                    Some(r0) => match ly_lower(a_pow, r0, rho, n) {
                        Ok(lb) => row.lower = Some(lb.value),
                        Err(e) => flags.push(flag("lower", &e)),
                    },
                }
            }
            if cfg.bounds.upper_first {
                match dyson_upper(&sol, rho, DysonMode::Quadrature) {
                    Ok(du) => row.upper_first = Some(du.value),
                    Err(e) => flags.push(flag("upper_first", &e)),
                }
            }
            if cfg.bounds.upper_second {
                if a_pow == 0.0 {
                    row.q = Some(0.0);
                    row.q_tilde = Some(0.0);
                    row.omega = Some(0.0);
                    row.upper_second = Some(0.0);
                } else {
                    match second.samples(rho) {
                        Ok(s) => {
                            let q = second.q(&s);
                            row.q = Some(q);
                            match (second.q_tilde(&s), second.omega(&s)) {
                                (Ok(qt), Ok(om)) => {
                                    row.q_tilde = Some(qt);
                                    row.omega = Some(om);
                                    row.upper_second = Some(leading + q + qt + om);
                                }
                                (Err(e), _) | (_, Err(e)) => flags.push(flag("upper_second", &e)),
                            }
                        }
                        Err(e) => flags.push(flag("upper_second", &e)),
                    }
                }
            }
            row.flags = flags;
            row
        })
        .collect();
    Ok(rows)
}

pub const CSV_COLUMNS: [&str; 12] = [
    "n", "rho", "Y", "leading", "lower", "upper_first", "Q", "Q_tilde", "Omega", "upper_second", "reference", "flags",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(rows: &[BoundReport]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Domain("no rows to emit".into()));
    }
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            r.n.to_string(),
            num(r.rho),
            num(r.y),
            num(r.leading),
            opt(r.lower),
            opt(r.upper_first),
            opt(r.q),
            opt(r.q_tilde),
            opt(r.omega),
            opt(r.upper_second),
            opt(r.reference),
            csv_field(&r.flags.join("; ")),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn json_num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => num(v),
        _ => "null".into(),
    }
}

pub fn to_json(rows: &[BoundReport]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Domain("no rows to emit".into()));
    }
    let mut out = String::from("[\n");
    for (i, r) in rows.iter().enumerate() {
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("n", r.n.to_string());
        m.insert("rho", json_num(Some(r.rho)));
        m.insert("Y", json_num(Some(r.y)));
        m.insert("leading", json_num(Some(r.leading)));
        m.insert("lower", json_num(r.lower));
        m.insert("upper_first", json_num(r.upper_first));
        m.insert("Q", json_num(r.q));
        m.insert("Q_tilde", json_num(r.q_tilde));
        m.insert("Omega", json_num(r.omega));
        m.insert("upper_second", json_num(r.upper_second));
        m.insert("reference", json_num(r.reference));
        m.insert("flags", serde_json::to_string(&r.flags).map_err(|e| Error::Parse(e.to_string()))?);
        let body: Vec<String> = m.iter().map(|(k, v)| format!("\"{k}\": {v}")).collect();
        let _ = write!(out, "  {{{}}}", body.join(", "));
        out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    Ok(out)
}

pub fn render(rows: &[BoundReport], format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

/// Writes rows to `path`.
pub fn emit(rows: &[BoundReport], format: Format, path: &Path) -> Result<()> {
    let text = render(rows, format)?;
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
