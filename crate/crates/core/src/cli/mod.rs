//! Configuration and artifact writing for the `conjloc` binary.
//!
//! A configuration is a flat `key = value` file; `--set key=value` overrides
//! are applied on top. Every mode writes CSV data, JSON summaries and one SVG
//! into `output_dir`.

pub mod svg;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::diffgeo::ChartPoint;
use crate::error::{Error, Result};
use crate::locus::{
    beta_curve, sweep_R, sweep_rho, AClass, CuspRecord, LocusCurve, Orientation, RhoBranch, RhoContour, SweepOptions,
};
use crate::ode::IntegrateOptions;
use crate::scan::{path_scan, region_map, PathScanResult, RegionMap, RegionMapOptions, ScanDirection, ScanPath};
use crate::surfaces::{Family, SurfaceModel};
use svg::{runs, Frame, Svg, PALETTE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Locus,
    Contours,
    PathScan,
    RegionMap,
    Beta,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Locus => "locus",
            Mode::Contours => "contours",
            Mode::PathScan => "path-scan",
            Mode::RegionMap => "region-map",
            Mode::Beta => "beta",
        }
    }

    fn needs_base_point(self) -> bool {
        matches!(self, Mode::Locus | Mode::Contours | Mode::Beta)
    }
}

/// Recognized configuration keys.
pub const KEYS: &[&str] = &[
    "family",
    "a",
    "b",
    "c",
    "n",
    "epsilon",
    "theta",
    "phi",
    "n_psi",
    "tol",
    "s_max",
    "psi_tol",
    "class_tol",
    "branch",
    "path",
    "path_phi",
    "t_start",
    "t_end",
    "n_samples",
    "direction",
    "theta_min",
    "theta_max",
    "phi_min",
    "phi_max",
    "n_theta",
    "n_phi",
    "region_n_psi",
    "threads",
    "output_dir",
    "svg",
];

/// A validated run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub family: Family,
    pub base: Option<ChartPoint>,
    pub n_psi: usize,
    pub integrate: IntegrateOptions,
    pub psi_tol: f64,
    pub class_tol: f64,
    pub branch: RhoBranch,
    pub path: ScanPath,
    pub n_samples: usize,
    pub directions: Vec<ScanDirection>,
    pub region: RegionMapOptions,
    /// Worker threads; 0 uses one per core.
    pub threads: usize,
    pub output_dir: PathBuf,
    pub svg: bool,
}

/// Parse `key = value` lines. `#` starts a comment; repeated keys are an error.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line).ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        if out.insert(k.clone(), v).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k}", no + 1)));
        }
    }
    Ok(out)
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty()).then(|| (k.to_string(), v.to_string()))
}

struct Values(BTreeMap<String, String>);

impl Values {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("cannot parse {key} = {v}"))),
        }
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn require<T: std::str::FromStr>(&self, key: &str, why: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::Config(format!("missing key {key} ({why})")))
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

impl RunConfig {
    /// Read `file` (if any), apply `overrides` and validate.
    pub fn load(mode: Mode, file: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
        let mut pairs = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                parse_pairs(&text)?
            }
            None => BTreeMap::new(),
        };
        for o in overrides {
            let (k, v) = split_pair(o).ok_or_else(|| Error::Config(format!("--set expects key=value, got {o}")))?;
            pairs.insert(k, v);
        }
        RunConfig::from_pairs(mode, pairs)
    }

    pub fn from_pairs(mode: Mode, pairs: BTreeMap<String, String>) -> Result<RunConfig> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key {k}")));
        }
        let v = Values(pairs);
        let family = match v.str("family") {
            Some("sphere") => Family::Sphere,
            Some("ellipsoid") => Family::Ellipsoid {
                a: v.require("a", "ellipsoid axis")?,
                b: v.require("b", "ellipsoid axis")?,
                c: v.require("c", "ellipsoid axis")?,
            },
            Some("sectoral_harmonic") => Family::SectoralHarmonic {
                n: v.require("n", "harmonic order")?,
                epsilon: v.require("epsilon", "harmonic amplitude")?,
            },
            Some(other) => return Err(Error::Config(format!("unknown family {other}"))),
            None => return Err(Error::Config("missing key family".into())),
        };
        let allowed: &[&str] = match family {
            Family::Sphere => &[],
            Family::Ellipsoid { .. } => &["a", "b", "c"],
            Family::SectoralHarmonic { .. } => &["n", "epsilon"],
        };
        for k in ["a", "b", "c", "n", "epsilon"] {
            if v.0.contains_key(k) && !allowed.contains(&k) {
                return Err(Error::Config(format!("key {k} does not apply to this family")));
            }
        }

        let base = match (v.get::<f64>("theta")?, v.get::<f64>("phi")?) {
            (Some(t), Some(p)) => Some(ChartPoint::standard(t, p)),
            (None, None) if !mode.needs_base_point() => None,
            _ => return Err(Error::Config(format!("{} needs both theta and phi", mode.name()))),
        };
        let tol: f64 = v.or("tol", 1e-10)?;
        let integrate = IntegrateOptions {
            s_max: v.or("s_max", TAU)?,
            ..IntegrateOptions::default().with_tolerance(tol)
        };
        let branch = match v.str("branch").unwrap_or("nearest") {
            "nearest" => RhoBranch::NearestToConjugate,
            "first" => RhoBranch::First,
            other => return Err(Error::Config(format!("branch must be nearest or first, got {other}"))),
        };
        let path = match v.str("path").unwrap_or("equator") {
            "equator" => ScanPath::Equator {
                t_start: v.or("t_start", 0.0)?,
                t_end: v.or("t_end", TAU)?,
            },
            "meridian" => ScanPath::Meridian {
                phi: v.or("path_phi", 0.0)?,
                t_start: v.or("t_start", 0.3)?,
                t_end: v.or("t_end", PI - 0.3)?,
            },
            other => return Err(Error::Config(format!("path must be equator or meridian, got {other}"))),
        };
        let directions = match v.str("direction").unwrap_or("both") {
            "forward" => vec![ScanDirection::Forward],
            "backward" => vec![ScanDirection::Backward],
            "both" => vec![ScanDirection::Forward, ScanDirection::Backward],
            other => return Err(Error::Config(format!("direction must be forward, backward or both, got {other}"))),
        };
        let rd = RegionMapOptions::default();
        let region = RegionMapOptions {
            theta_range: (v.or("theta_min", rd.theta_range.0)?, v.or("theta_max", rd.theta_range.1)?),
            phi_range: (v.or("phi_min", rd.phi_range.0)?, v.or("phi_max", rd.phi_range.1)?),
            n_theta: v.or("n_theta", rd.n_theta)?,
            n_phi: v.or("n_phi", rd.n_phi)?,
            sweep: SweepOptions {
                n_psi: v.or("region_n_psi", rd.sweep.n_psi)?,
                integrate,
                ..rd.sweep
            },
        };
        let svg = match v.str("svg").unwrap_or("true") {
            "true" => true,
            "false" => false,
            other => return Err(Error::Config(format!("svg must be true or false, got {other}"))),
        };
        let cfg = RunConfig {
            mode,
            family,
            base,
            n_psi: v.or("n_psi", 256)?,
            integrate,
            psi_tol: v.or("psi_tol", 1e-8)?,
            class_tol: v.or("class_tol", 1e-5)?,
            branch,
            path,
            n_samples: v.or("n_samples", 96)?,
            directions,
            region,
            threads: v.or("threads", 0)?,
            output_dir: PathBuf::from(v.str("output_dir").unwrap_or("conjloc-out")),
            svg,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let surface = self.surface()?;
        if !(self.integrate.rtol > 0.0 && self.integrate.rtol < 1e-3) {
            return bad(format!("tol must lie in (0, 1e-3), got {}", self.integrate.rtol));
        }
        if !(self.integrate.s_max > 0.0) {
            return bad("s_max must be positive".into());
        }
        if !(self.psi_tol > 0.0) || !(self.class_tol > 0.0) {
            return bad("psi_tol and class_tol must be positive".into());
        }
        match self.mode {
            Mode::Locus | Mode::Contours | Mode::Beta => {
                if self.n_psi < 8 {
                    return bad(format!("n_psi must be at least 8, got {}", self.n_psi));
                }
                let p = self.base.expect("checked while parsing");
                p.check_domain().map_err(|e| Error::Config(format!("base point: {e}")))?;
            }
            Mode::PathScan => {
                if self.n_samples < 2 {
                    return bad("n_samples must be at least 2".into());
                }
                if !surface.symmetry_lines().contains(&self.path.line()) {
                    return bad(format!("{:?} is not a symmetry line of this surface", self.path.line()));
                }
                for t in self.path.samples(self.n_samples) {
                    self.path
                        .point(t)
                        .check_domain()
                        .map_err(|e| Error::Config(format!("path sample t = {t}: {e}")))?;
                }
            }
            Mode::RegionMap => {
                let r = &self.region;
                if r.n_theta == 0 || r.n_phi == 0 || r.sweep.n_psi < 8 {
                    return bad("region grid needs n_theta, n_phi >= 1 and region_n_psi >= 8".into());
                }
                if !(r.theta_range.0 < r.theta_range.1) || !(r.phi_range.0 < r.phi_range.1) {
                    return bad("region ranges must be increasing".into());
                }
                let (t0, t1) = r.theta_range;
                for i in 0..r.n_theta {
                    let t = t0 + (t1 - t0) * (i as f64 + 0.5) / r.n_theta as f64;
                    ChartPoint::standard(t, 0.0)
                        .check_domain()
                        .map_err(|e| Error::Config(format!("region row θ = {t}: {e}")))?;
                }
            }
        }
        Ok(())
    }

    pub fn surface(&self) -> Result<SurfaceModel> {
        SurfaceModel::from_family(self.family).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            n_psi: self.n_psi,
            integrate: self.integrate,
            psi_tol: self.psi_tol,
            class_tol: self.class_tol,
            ..SweepOptions::default()
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Some samples are missing or a cusp could not be classified.
    pub partial: bool,
    pub summary: serde_json::Value,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.partial {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

/// Exit code for the result of [`run`].
pub fn exit_code(r: &Result<RunOutcome>) -> i32 {
    match r {
        Ok(o) => o.exit_code(),
        Err(Error::Config(_)) => EXIT_USAGE,
        Err(_) => EXIT_FAILURE,
    }
}

/// Run the configured experiment and write its artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| compute(cfg))?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(io_error(&cfg.output_dir))?;
    let mut files = Vec::new();
    for (name, body) in &artifacts.files {
        if name.ends_with(".svg") && !cfg.svg {
            continue;
        }
        let path = cfg.output_dir.join(name);
        std::fs::write(&path, body).map_err(io_error(&path))?;
        files.push(path);
    }
    Ok(RunOutcome {
        files,
        partial: artifacts.partial,
        summary: artifacts.summary,
    })
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Precondition(format!("cannot write {}: {e}", path.display()))
}

struct Artifacts {
    files: Vec<(String, String)>,
    partial: bool,
    summary: serde_json::Value,
}

fn compute(cfg: &RunConfig) -> Result<Artifacts> {
    let surface = cfg.surface()?;
    match cfg.mode {
        Mode::Locus => {
            let curve = sweep_R(&surface, cfg.base.unwrap(), &cfg.sweep_options())?;
            let summary = locus_summary(cfg, &curve);
            Ok(Artifacts {
                partial: locus_partial(&curve),
                files: vec![
                    ("locus.csv".into(), locus_csv(&curve)),
                    ("cusps.json".into(), pretty(&cusp_json(&curve.cusps))),
                    ("summary.json".into(), pretty(&summary)),
                    ("locus.svg".into(), locus_svg(&curve)),
                ],
                summary,
            })
        }
        Mode::Contours => {
            let opts = cfg.sweep_options();
            let curve = sweep_R(&surface, cfg.base.unwrap(), &opts)?;
            let rho = sweep_rho(&surface, cfg.base.unwrap(), &opts, cfg.branch)?;
            let mut summary = locus_summary(cfg, &curve);
            summary["intersection_count"] = json!(rho.intersections.len());
            summary["intersections"] = json!(rho.intersections);
            summary["rho_missing"] = json!(rho_missing(&rho));
            Ok(Artifacts {
                partial: locus_partial(&curve),
                files: vec![
                    ("contours.csv".into(), contours_csv(&rho)),
                    ("locus.csv".into(), locus_csv(&curve)),
                    ("cusps.json".into(), pretty(&cusp_json(&curve.cusps))),
                    ("summary.json".into(), pretty(&summary)),
                    ("contours.svg".into(), contours_svg(&curve, &rho)),
                ],
                summary,
            })
        }
        Mode::Beta => {
            let opts = cfg.sweep_options();
            let p = cfg.base.unwrap();
            let curve = sweep_R(&surface, p, &opts)?;
            let rho = sweep_rho(&surface, p, &opts, cfg.branch)?;
            let beta = beta_curve(&surface, p, &rho, &curve)?;
            let mut summary = locus_summary(cfg, &curve);
            summary["loop_count"] = json!(beta.loop_count);
            summary["passages"] = json!(beta.passages);
            summary["passage_distances"] = json!(beta.passage_distances);
            summary["min_singularity_metric"] = json!(beta.min_metric);
            summary["psi_at_min_metric"] = json!(beta.psi_at_min_metric);
            summary["rho_missing"] = json!(rho_missing(&rho));
            let proj: Vec<Option<[f64; 2]>> = beta.points.iter().map(|b| b.map(|x| curve.plane.project(x))).collect();
            let mut csv = String::from("psi,rho,x,y,z,proj_u,proj_v,metric\n");
            for (k, s) in rho.samples.iter().enumerate() {
                let b = beta.points[k];
                let row = [
                    Some(s.psi),
                    s.rho,
                    b.map(|b| b[0]),
                    b.map(|b| b[1]),
                    b.map(|b| b[2]),
                    proj[k].map(|q| q[0]),
                    proj[k].map(|q| q[1]),
                    beta.singularity_metric[k],
                ];
                csv_row(&mut csv, &row);
            }
            Ok(Artifacts {
                partial: locus_partial(&curve),
                files: vec![
                    ("beta.csv".into(), csv),
                    ("locus.csv".into(), locus_csv(&curve)),
                    ("cusps.json".into(), pretty(&cusp_json(&curve.cusps))),
                    ("summary.json".into(), pretty(&summary)),
                    ("beta.svg".into(), beta_svg(&curve, &split_branches(&rho, proj.clone()))),
                ],
                summary,
            })
        }
        Mode::PathScan => {
            let scans = cfg
                .directions
                .iter()
                .map(|&d| path_scan(&surface, cfg.path, d, cfg.n_samples, &cfg.integrate))
                .collect::<Result<Vec<_>>>()?;
            let mut csv = String::from("t,theta,phi,direction,R,xi3_R\n");
            for s in scans.iter().flat_map(|r| &r.samples) {
                write!(csv, "{},{},{},{},", f(s.t), f(s.theta), f(s.phi), s.direction.label()).unwrap();
                csv.push_str(&opt(s.r));
                csv.push(',');
                csv.push_str(&opt(s.xi3_at_r));
                csv.push('\n');
            }
            let zeros: Vec<_> = scans
                .iter()
                .flat_map(|r| r.zeros.iter().map(move |&t| json!({"direction": r.direction, "t": t})))
                .collect();
            let summary = json!({
                "mode": cfg.mode,
                "surface": cfg.family,
                "path": path_json(cfg.path),
                "n_samples": cfg.n_samples,
                "scans": scans.iter().map(|r| json!({
                    "direction": r.direction,
                    "zero_count": r.zeros.len(),
                    "zeros": r.zeros,
                    "degenerate": r.degenerate,
                    "partial": r.is_partial(),
                })).collect::<Vec<_>>(),
            });
            Ok(Artifacts {
                partial: scans.iter().any(PathScanResult::is_partial),
                files: vec![
                    ("path_scan.csv".into(), csv),
                    ("zeros.json".into(), pretty(&json!(zeros))),
                    ("summary.json".into(), pretty(&summary)),
                    ("path_scan.svg".into(), path_scan_svg(&scans)),
                ],
                summary,
            })
        }
        Mode::RegionMap => {
            let map = region_map(&surface, &cfg.region)?;
            let mut csv = String::from("theta,phi,cusp_count,boundary_flag\n");
            for (i, &t) in map.theta.iter().enumerate() {
                for (j, &p) in map.phi.iter().enumerate() {
                    let c = map.count(i, j).map_or(String::new(), |c| c.to_string());
                    writeln!(csv, "{},{},{},{}", f(t), f(p), c, u8::from(map.is_boundary(i, j))).unwrap();
                }
            }
            let unknown = map.counts.iter().filter(|c| c.is_none()).count();
            let summary = json!({
                "mode": cfg.mode,
                "surface": cfg.family,
                "n_theta": map.theta.len(),
                "n_phi": map.phi.len(),
                "n_psi": cfg.region.sweep.n_psi,
                "theta_range": [cfg.region.theta_range.0, cfg.region.theta_range.1],
                "phi_range": [cfg.region.phi_range.0, cfg.region.phi_range.1],
                "distinct_counts": map.distinct_counts(),
                "unknown_cells": unknown,
                "boundary_cells": map.boundary.iter().filter(|b| **b).count(),
            });
            Ok(Artifacts {
                partial: unknown > 0,
                files: vec![
                    ("region_map.csv".into(), csv),
                    ("summary.json".into(), pretty(&summary)),
                    ("region_map.svg".into(), region_svg(&map)),
                ],
                summary,
            })
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), f)
}

fn csv_row(out: &mut String, row: &[Option<f64>]) {
    for (i, x) in row.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&opt(*x));
    }
    out.push('\n');
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

// directions without a ξ₂ zero before s_max; gaps in ρ are expected
fn rho_missing(rho: &RhoContour) -> usize {
    rho.samples.iter().filter(|s| s.rho.is_none()).count()
}

fn locus_partial(curve: &LocusCurve) -> bool {
    curve.is_partial() || curve.cusps.iter().any(|c| c.near_bifurcation)
}

fn path_json(p: ScanPath) -> serde_json::Value {
    match p {
        ScanPath::Equator { t_start, t_end } => json!({"kind": "equator", "t_start": t_start, "t_end": t_end}),
        ScanPath::Meridian { phi, t_start, t_end } => {
            json!({"kind": "meridian", "phi": phi, "t_start": t_start, "t_end": t_end})
        }
    }
}

pub fn cusp_json(cusps: &[CuspRecord]) -> serde_json::Value {
    json!(cusps
        .iter()
        .map(|c| json!({
            "psi_star": c.psi_star,
            "R_star": c.r_star,
            "a_class": c.a_class,
            "local_type": [c.local_type.0, c.local_type.1],
            "orientation": match c.orientation {
                Orientation::TowardP => "toward_p",
                Orientation::AwayFromP => "away_from_p",
                Orientation::Undetermined => "undetermined",
            },
            "symmetric": c.symmetric,
            "xi3_value": c.xi3_value,
        }))
        .collect::<Vec<_>>())
}

fn locus_summary(cfg: &RunConfig, curve: &LocusCurve) -> serde_json::Value {
    let p = cfg.base.unwrap();
    let (r_min, r_max) = curve.r_range();
    let classes = |k: AClass| curve.cusps.iter().filter(|c| c.a_class == k).count();
    json!({
        "mode": cfg.mode,
        "surface": cfg.family,
        "base": {"theta": p.u1, "phi": p.u2},
        "n_psi": cfg.n_psi,
        "tol": cfg.integrate.rtol,
        "cusp_count": curve.cusp_count(),
        "class_counts": {"A1": classes(AClass::A1), "A2": classes(AClass::A2), "A3": classes(AClass::A3)},
        "cusps": cusp_json(&curve.cusps),
        "candidates": curve.candidates,
        "partial": locus_partial(curve),
        "missing_directions": curve.records.iter().filter(|r| r.is_none()).count(),
        "diameter": curve.diameter(),
        "r_min": r_min,
        "r_max": r_max,
    })
}

pub fn locus_csv(curve: &LocusCurve) -> String {
    let mut out = String::from("psi,R,dxi1_R,xi2_R,xi3_R,x,y,z,proj_u,proj_v,polar_u,polar_v\n");
    for (k, rec) in curve.records.iter().enumerate() {
        let row = match rec {
            Some(r) => [
                Some(r.psi),
                Some(r.r),
                Some(r.dxi1_at_r),
                Some(r.xi2_at_r),
                Some(r.xi3_at_r),
                Some(r.point.xyz[0]),
                Some(r.point.xyz[1]),
                Some(r.point.xyz[2]),
                Some(r.tangent_plane_uv[0]),
                Some(r.tangent_plane_uv[1]),
                Some(r.polar_uv[0]),
                Some(r.polar_uv[1]),
            ],
            None => {
                let mut row = [None; 12];
                row[0] = Some(curve.psi_grid[k]);
                row
            }
        };
        csv_row(&mut out, &row);
    }
    out
}

fn contours_csv(rho: &RhoContour) -> String {
    let mut out = String::from("psi,R,rho,xi1_rho,xi2_R,degenerate\n");
    for s in &rho.samples {
        write!(out, "{},{},{},{},{},", f(s.psi), opt(s.r), opt(s.rho), opt(s.xi1_at_rho), opt(s.xi2_at_r)).unwrap();
        out.push_str(if s.degenerate { "1\n" } else { "0\n" });
    }
    out
}

// Projected locus below this extent is drawn as a single point.
const POINT_LOCUS: f64 = 1e-6;

fn locus_svg(curve: &LocusCurve) -> String {
    let pts: Vec<Option<[f64; 2]>> = curve.records.iter().map(|r| r.map(|r| r.tangent_plane_uv)).collect();
    let mut doc = Svg::new("conjugate locus, tangent plane at the antipode");
    if curve.diameter() < POINT_LOCUS {
        let frame = Frame::fit(&[[-1.0, -1.0], [1.0, 1.0]], true);
        doc.circle(frame.map([0.0, 0.0]), 3.0, "point", "black");
        return doc.finish();
    }
    let all: Vec<[f64; 2]> = pts.iter().flatten().copied().collect();
    let frame = Frame::fit(&all, true);
    draw_closed(&mut doc, &frame, &pts, "locus", PALETTE[0]);
    for c in &curve.cusps {
        doc.circle(frame.map(curve.plane.project(c.point.xyz)), 4.0, "cusp", PALETTE[3]);
    }
    doc.finish()
}

fn draw_closed(doc: &mut Svg, frame: &Frame, pts: &[Option<[f64; 2]>], class: &str, stroke: &str) {
    let r = runs(frame, pts);
    if r.len() == 1 && pts.iter().all(Option::is_some) {
        doc.polyline(&r[0], true, class, stroke);
    } else {
        for run in &r {
            doc.polyline(run, false, class, stroke);
        }
    }
}

fn contours_svg(curve: &LocusCurve, rho: &RhoContour) -> String {
    let r_pts: Vec<Option<[f64; 2]>> = curve.records.iter().map(|r| r.map(|r| r.polar_uv)).collect();
    let polar = |psi: f64, s: f64| [s * psi.cos(), s * psi.sin()];
    let rho_pts = split_branches(rho, rho.samples.iter().map(|s| s.rho.map(|r| polar(s.psi, r))).collect());
    let all: Vec<[f64; 2]> = r_pts.iter().chain(&rho_pts).flatten().copied().collect();
    let frame = Frame::fit(&all, true);
    let mut doc = Svg::new("R and rho contours in polar coordinates");
    draw_closed(&mut doc, &frame, &r_pts, "r-contour", PALETTE[0]);
    draw_closed(&mut doc, &frame, &rho_pts, "rho-contour", PALETTE[1]);
    for x in &rho.intersections {
        doc.circle(frame.map(polar(x.psi, x.r)), 4.0, "intersection", PALETTE[3]);
    }
    doc.finish()
}

// A jump in ρ between neighbours is a change of zero branch, not a curve.
fn split_branches(rho: &RhoContour, pts: Vec<Option<[f64; 2]>>) -> Vec<Option<[f64; 2]>> {
    let mut out = Vec::with_capacity(pts.len());
    for (k, p) in pts.into_iter().enumerate() {
        if k > 0 {
            if let (Some(a), Some(b)) = (rho.samples[k - 1].rho, rho.samples[k].rho) {
                if (a - b).abs() > 0.5 {
                    out.push(None);
                }
            }
        }
        out.push(p);
    }
    out
}

fn beta_svg(curve: &LocusCurve, beta: &[Option<[f64; 2]>]) -> String {
    let locus: Vec<Option<[f64; 2]>> = curve.records.iter().map(|r| r.map(|r| r.tangent_plane_uv)).collect();
    let all: Vec<[f64; 2]> = locus.iter().chain(beta).flatten().copied().collect();
    let frame = Frame::fit(&all, true);
    let mut doc = Svg::new("conjugate locus and beta curve, tangent plane at the antipode");
    draw_closed(&mut doc, &frame, &locus, "locus", PALETTE[0]);
    for run in runs(&frame, beta) {
        doc.polyline(&run, false, "beta", PALETTE[2]);
    }
    for c in &curve.cusps {
        doc.circle(frame.map(curve.plane.project(c.point.xyz)), 4.0, "cusp", PALETTE[3]);
    }
    doc.finish()
}

fn path_scan_svg(scans: &[PathScanResult]) -> String {
    let all: Vec<[f64; 2]> = scans
        .iter()
        .flat_map(|r| r.samples.iter().filter_map(|s| s.xi3_at_r.map(|x| [s.t, x])))
        .chain(scans.iter().flat_map(|r| r.samples.first().map(|s| [s.t, 0.0])))
        .collect();
    let frame = Frame::fit(&all, false);
    let mut doc = Svg::new("xi3(R) along the path");
    let (lo, hi) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
    doc.line(frame.map([lo, 0.0]), frame.map([hi, 0.0]), "black");
    for (i, r) in scans.iter().enumerate() {
        let pts: Vec<Option<[f64; 2]>> = r.samples.iter().map(|s| s.xi3_at_r.map(|x| [s.t, x])).collect();
        let color = PALETTE[i % PALETTE.len()];
        for run in runs(&frame, &pts) {
            doc.polyline(&run, false, r.direction.label(), color);
        }
        for &t in &r.zeros {
            doc.circle(frame.map([t, 0.0]), 3.5, "zero", color);
        }
        let at = frame.map([lo, 0.0]);
        doc.text([at[0], 44.0 + 14.0 * i as f64], r.direction.label(), "start");
    }
    doc.finish()
}

fn region_svg(map: &RegionMap) -> String {
    let (nt, np) = (map.theta.len(), map.phi.len());
    let dt = if nt > 1 { map.theta[1] - map.theta[0] } else { 1.0 };
    let dp = if np > 1 { map.phi[1] - map.phi[0] } else { 1.0 };
    let corners = [
        [map.phi[0] - dp / 2.0, map.theta[0] - dt / 2.0],
        [map.phi[np - 1] + dp / 2.0, map.theta[nt - 1] + dt / 2.0],
    ];
    let frame = Frame::fit(&corners, false);
    let [sx, sy] = frame.scale();
    let counts = map.distinct_counts();
    let mut doc = Svg::new("cusp count by base point (phi across, theta down)");
    for i in 0..nt {
        for j in 0..np {
            // θ grows downwards, so flip the row
            let top = frame.map([map.phi[j] - dp / 2.0, map.theta[nt - 1 - i] + dt / 2.0]);
            let fill = match map.count(i, j) {
                Some(c) => PALETTE[counts.iter().position(|&x| x == c).unwrap() % PALETTE.len()],
                None => "#bbbbbb",
            };
            let stroke = map.is_boundary(i, j).then_some("black");
            doc.rect(top, [dp * sx, dt * sy], fill, stroke);
        }
    }
    for (k, c) in counts.iter().enumerate() {
        doc.rect([16.0 + 70.0 * k as f64, 452.0], [12.0, 12.0], PALETTE[k % PALETTE.len()], None);
        doc.text([32.0 + 70.0 * k as f64, 462.0], &format!("{c} cusps"), "start");
    }
    doc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn pairs(s: &str) -> BTreeMap<String, String> {
        parse_pairs(s).unwrap()
    }

    #[test]
    fn parses_comments_and_overrides() {
        let p = pairs("family = ellipsoid # triaxial\na=1.05\nb = 1\nc = 0.95\n\ntheta=1.0\nphi = 0.6\n");
        let cfg = RunConfig::from_pairs(Mode::Locus, p).unwrap();
        assert_eq!(cfg.family, Family::Ellipsoid { a: 1.05, b: 1.0, c: 0.95 });
        assert_eq!(cfg.n_psi, 256);
        assert_eq!(cfg.base, Some(ChartPoint::standard(1.0, 0.6)));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let e = RunConfig::from_pairs(Mode::Locus, pairs("family = sphere\ntheta=1\nphi=0\nfoo = 1")).unwrap_err();
        assert!(matches!(e, Error::Config(ref m) if m.contains("foo")), "{e}");
        assert!(parse_pairs("a = 1\na = 2").is_err());
        assert!(parse_pairs("just words").is_err());
    }

    #[test]
    fn rejects_keys_of_other_families() {
        let e = RunConfig::from_pairs(Mode::Locus, pairs("family = sphere\nepsilon = 0.1\ntheta=1\nphi=0")).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn rejects_invalid_surfaces_and_paths() {
        let bad_axes = pairs("family = ellipsoid\na = 1\nb = 1\nc = 0.9\ntheta = 1\nphi = 0");
        assert!(matches!(RunConfig::from_pairs(Mode::Locus, bad_axes), Err(Error::Config(_))));
        let off_line = pairs("family = sectoral_harmonic\nn = 3\nepsilon = 0.1\npath = meridian\npath_phi = 0.5");
        assert!(matches!(RunConfig::from_pairs(Mode::PathScan, off_line), Err(Error::Config(_))));
        let pole = pairs("family = sphere\ntheta = 0.01\nphi = 0");
        assert!(matches!(RunConfig::from_pairs(Mode::Locus, pole), Err(Error::Config(_))));
        let no_base = pairs("family = sphere");
        assert!(matches!(RunConfig::from_pairs(Mode::Locus, no_base), Err(Error::Config(_))));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Err(Error::Config("x".into()))), EXIT_USAGE);
        assert_eq!(exit_code(&Err(Error::MaxSteps(3))), EXIT_FAILURE);
    }

    #[test]
    fn floats_round_trip() {
        for x in [PI, -1e-300, 1.0 / 3.0, 6.02e23, FRAC_PI_2] {
            assert_eq!(f(x).parse::<f64>().unwrap(), x);
        }
    }
}
