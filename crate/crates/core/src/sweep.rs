//! Grid sweeps over `(L, K, n)` and their CSV/JSON output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{propagate, GainProfile, LinkConfig};
use crate::optimize::{self, OptimizationResult, SolveStatus};
use crate::se;

/// Columns always present, in order.
pub const BASE_COLUMNS: [&str; 14] = [
    "L_km",
    "K",
    "n",
    "se_shannon_op",
    "se_shannon_noamp",
    "se_holevo_noamp",
    "AE",
    "E_sh",
    "E_egs",
    "E_regs",
    "savings_egs_pct",
    "savings_regs_pct",
    "egs_converged",
    "regs_converged",
];
/// Appended when `segs` is requested.
pub const SEGS_COLUMNS: [&str; 1] = ["se_holevo_segs"];
/// Appended when `homodyne-egs` is requested.
pub const HOMODYNE_COLUMNS: [&str; 3] =
    ["E_homodyne_egs", "savings_homodyne_pct", "homodyne_status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Segs,
    Egs,
    Regs,
    HomodyneEgs,
}

impl std::str::FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "segs" => Ok(Self::Segs),
            "egs" => Ok(Self::Egs),
            "regs" => Ok(Self::Regs),
            "homodyne-egs" => Ok(Self::HomodyneEgs),
            other => Err(Error::domain(format!("unknown problem `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::domain(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub alpha: f64,
    #[serde(rename = "L_values")]
    pub lengths: Vec<f64>,
    #[serde(rename = "K_values")]
    pub segments: Vec<usize>,
    pub n_values: Vec<f64>,
    #[serde(default)]
    pub problems: Vec<Problem>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::domain(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.lengths.is_empty() || self.segments.is_empty() || self.n_values.is_empty() {
            return Err(Error::domain(
                "L_values, K_values and n_values must be non-empty",
            ));
        }
        if let Some(l) = self.lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::domain(format!("lengths must be > 0, got {l}")));
        }
        if self.segments.contains(&0) {
            return Err(Error::domain("K values must be >= 1"));
        }
        if let Some(n) = self
            .n_values
            .iter()
            .find(|n| !(**n > 0.0) || !n.is_finite())
        {
            return Err(Error::domain(format!(
                "photon numbers must be > 0, got {n}"
            )));
        }
        Ok(())
    }

    pub fn has(&self, p: Problem) -> bool {
        self.problems.contains(&p)
    }

    /// Grid points in lexicographic `(L, K, n)` order.
    pub fn configs(&self) -> Vec<LinkConfig> {
        let mut out =
            Vec::with_capacity(self.lengths.len() * self.segments.len() * self.n_values.len());
        for &length in &self.lengths {
            for &segments in &self.segments {
                for &photons in &self.n_values {
                    out.push(LinkConfig {
                        alpha: self.alpha,
                        length,
                        segments,
                        photons,
                    });
                }
            }
        }
        out
    }

    pub fn columns(&self) -> Vec<&'static str> {
        let mut cols = BASE_COLUMNS.to_vec();
        if self.has(Problem::Segs) {
            cols.extend(SEGS_COLUMNS);
        }
        if self.has(Problem::HomodyneEgs) {
            cols.extend(HOMODYNE_COLUMNS);
        }
        cols
    }
}

/// One row of a sweep. Optimizer fields stay `None` when the problem was not
/// requested or when it has no feasible solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    #[serde(rename = "L_km")]
    pub length: f64,
    #[serde(rename = "K")]
    pub segments: usize,
    pub n: f64,
    pub se_shannon_op: f64,
    pub se_shannon_noamp: f64,
    pub se_holevo_noamp: f64,
    #[serde(rename = "AE")]
    pub ae: f64,
    #[serde(rename = "E_sh")]
    pub e_sh: f64,
    #[serde(rename = "E_egs")]
    pub e_egs: Option<f64>,
    #[serde(rename = "E_regs")]
    pub e_regs: Option<f64>,
    pub savings_egs_pct: Option<f64>,
    pub savings_regs_pct: Option<f64>,
    pub egs_converged: Option<bool>,
    pub regs_converged: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se_holevo_segs: Option<f64>,
    #[serde(
        rename = "E_homodyne_egs",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub e_homodyne_egs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub savings_homodyne_pct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub homodyne_status: Option<SolveStatus>,
}

fn pct(energy: f64, baseline: f64) -> f64 {
    if baseline > 0.0 {
        (100.0 * (1.0 - energy / baseline)).clamp(0.0, 100.0)
    } else {
        0.0
    }
}

/// Amplification enhancement: fully amplified over unamplified heterodyne rate.
pub fn amplification_enhancement(config: &LinkConfig) -> f64 {
    let bare = propagate(config, &GainProfile::unamplified(config.segments))
        .expect("unamplified profile matches K");
    optimize::shannon_optimal_se(config) / se::shannon_se(&bare, config.photons)
}

/// Evaluates every requested problem at one grid point. Solver trouble is
/// recorded in the row, never returned as an error.
pub fn run_point(config: &LinkConfig, problems: &[Problem]) -> Result<SweepCell> {
    config.validate()?;
    let k = config.segments;
    let n = config.photons;
    let bare = propagate(config, &GainProfile::unamplified(k))?;
    let se_shannon_op = optimize::shannon_optimal_se(config);
    let se_shannon_noamp = se::shannon_se(&bare, n);
    let se_holevo_noamp = se::holevo_se(&bare, n);
    let e_sh = optimize::baseline_energy(config);

    let mut cell = SweepCell {
        length: config.length,
        segments: k,
        n,
        se_shannon_op,
        se_shannon_noamp,
        se_holevo_noamp,
        ae: se_shannon_op / se_shannon_noamp,
        e_sh,
        e_egs: None,
        e_regs: None,
        savings_egs_pct: None,
        savings_regs_pct: None,
        egs_converged: None,
        regs_converged: None,
        se_holevo_segs: None,
        e_homodyne_egs: None,
        savings_homodyne_pct: None,
        homodyne_status: None,
    };

    let feasible = |r: &Result<OptimizationResult>| match r {
        Ok(r) if r.status != SolveStatus::Infeasible => Some(r.clone()),
        _ => None,
    };
    if problems.contains(&Problem::Egs) {
        let r = optimize::solve_holevo_egs(config);
        cell.egs_converged = Some(matches!(&r, Ok(r) if r.converged));
        if let Some(r) = feasible(&r) {
            cell.e_egs = Some(r.energy);
            cell.savings_egs_pct = Some(pct(r.energy, e_sh));
        }
    }
    if problems.contains(&Problem::Regs) {
        let r = optimize::solve_regs(config);
        cell.regs_converged = Some(matches!(&r, Ok(r) if r.converged));
        if let Some(r) = feasible(&r) {
            cell.e_regs = Some(r.energy);
            cell.savings_regs_pct = Some(pct(r.energy, e_sh));
        }
    }
    if problems.contains(&Problem::Segs) {
        cell.se_holevo_segs = optimize::segs_holevo(config).ok().map(|r| r.se_achieved);
    }
    if problems.contains(&Problem::HomodyneEgs) {
        match optimize::solve_homodyne_egs(config) {
            Ok(r) => {
                cell.homodyne_status = Some(r.status);
                if r.status != SolveStatus::Infeasible {
                    cell.e_homodyne_egs = Some(r.energy);
                    cell.savings_homodyne_pct = Some(pct(r.energy, e_sh));
                }
            }
            Err(_) => cell.homodyne_status = Some(SolveStatus::NotConverged),
        }
    }
    Ok(cell)
}

/// Runs the whole grid in parallel; rows come back in grid order.
/// An empty problem set yields no rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    if spec.problems.is_empty() {
        return Ok(Vec::new());
    }
    spec.configs()
        .par_iter()
        .map(|c| run_point(c, &spec.problems))
        .collect()
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

fn status_str(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::NotConverged => "not-converged",
        SolveStatus::Infeasible => "infeasible",
    }
}

/// Renders rows as CSV with the column set implied by `spec`.
pub fn to_csv(spec: &SweepSpec, cells: &[SweepCell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(spec.columns()).map_err(ser)?;
    for c in cells {
        let mut rec = vec![
            float(c.length),
            c.segments.to_string(),
            float(c.n),
            float(c.se_shannon_op),
            float(c.se_shannon_noamp),
            float(c.se_holevo_noamp),
            float(c.ae),
            float(c.e_sh),
            opt_float(c.e_egs),
            opt_float(c.e_regs),
            opt_float(c.savings_egs_pct),
            opt_float(c.savings_regs_pct),
            opt_bool(c.egs_converged),
            opt_bool(c.regs_converged),
        ];
        if spec.has(Problem::Segs) {
            rec.push(opt_float(c.se_holevo_segs));
        }
        if spec.has(Problem::HomodyneEgs) {
            rec.push(opt_float(c.e_homodyne_egs));
            rec.push(opt_float(c.savings_homodyne_pct));
            rec.push(
                c.homodyne_status
                    .map(status_str)
                    .unwrap_or_default()
                    .to_string(),
            );
        }
        w.write_record(&rec).map_err(ser)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn to_json(cells: &[SweepCell]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(cells).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Renders in `format`, writes to `path` and returns the byte count.
pub fn emit(spec: &SweepSpec, cells: &[SweepCell], format: Format, path: &Path) -> Result<usize> {
    let body = match format {
        Format::Csv => to_csv(spec, cells)?,
        Format::Json => to_json(cells)?,
    };
    fs::write(path, body.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(body.len())
}

/// Point on the `AE = level` curve for one photon number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeTracePoint {
    pub n: f64,
    #[serde(rename = "L_km")]
    pub length: f64,
    pub cell: SweepCell,
}

/// For each `n`, finds the length at which AE reaches `level` at fixed `K`
/// and evaluates `problems` there. Lengths are searched in
/// `(0, max_length]`; photon numbers with no crossing are skipped.
pub fn ae_trace(
    alpha: f64,
    segments: usize,
    n_values: &[f64],
    level: f64,
    max_length: f64,
    problems: &[Problem],
) -> Result<Vec<AeTracePoint>> {
    if !(level > 1.0) {
        return Err(Error::domain("AE level must exceed 1"));
    }
    if segments < 2 {
        return Err(Error::domain("AE trace needs K >= 2"));
    }
    n_values
        .par_iter()
        .filter_map(|&n| {
            let ae = |length: f64| {
                amplification_enhancement(&LinkConfig {
                    alpha,
                    length,
                    segments,
                    photons: n,
                })
            };
            let (mut lo, mut hi) = (1e-6, max_length);
            if ae(hi) < level {
                return None;
            }
            while hi - lo > 1e-9 * hi {
                let mid = 0.5 * (lo + hi);
                if ae(mid) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let config = LinkConfig {
                alpha,
                length: hi,
                segments,
                photons: n,
            };
            Some(run_point(&config, problems).map(|cell| AeTracePoint {
                n,
                length: hi,
                cell,
            }))
        })
        .collect()
}

/// Scalar fields that can be contoured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Ae,
    SeShannonOp,
    SavingsEgs,
    SavingsRegs,
}

impl Field {
    pub fn of(&self, c: &SweepCell) -> Option<f64> {
        match self {
            Self::Ae => Some(c.ae),
            Self::SeShannonOp => Some(c.se_shannon_op),
            Self::SavingsEgs => c.savings_egs_pct,
            Self::SavingsRegs => c.savings_regs_pct,
        }
    }
}

/// Iso-line of `field` at `level`: for every `(K, n)` row, each crossing
/// between neighbouring lengths, located by linear interpolation. Returns
/// `(K, n, L)` triples.
pub fn iso_line(cells: &[SweepCell], field: Field, level: f64) -> Vec<(usize, f64, f64)> {
    let mut rows: Vec<&SweepCell> = cells.iter().collect();
    rows.sort_by(|a, b| {
        (a.segments, a.n)
            .partial_cmp(&(b.segments, b.n))
            .unwrap()
            .then(a.length.total_cmp(&b.length))
    });
    let mut out = Vec::new();
    for pair in rows.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.segments != b.segments || a.n != b.n {
            continue;
        }
        let (Some(fa), Some(fb)) = (field.of(a), field.of(b)) else {
            continue;
        };
        if (fa - level) * (fb - level) <= 0.0 && fa != fb {
            let t = (level - fa) / (fb - fa);
            out.push((a.segments, a.n, a.length + t * (b.length - a.length)));
        }
    }
    out.dedup();
    out
}

/// Writes iso-line triples as a small CSV table.
pub fn iso_line_csv(points: &[(usize, f64, f64)]) -> String {
    let mut s = String::from("K,n,L_km\n");
    for (k, n, l) in points {
        let _ = writeln!(s, "{k},{},{}", float(*n), float(*l));
    }
    s
}
