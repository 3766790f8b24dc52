//! File formats and helpers behind the `frechet3` command-line tool.
//!
//! JSON specs are read into `frechet3-core` types and validated; results are
//! written as CSV with every number printed to 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use frechet3_core::sampler::{chunk_count, sample_chunk, SampleBatch};
use frechet3_core::{BoundsReport, CopulaSpec2, FamilyPath, GridSpec, LiftedCopula3, QuadratureConfig};

/// Significant digits of every printed number.
pub const SIG_DIGITS: usize = 12;

/// `x` rounded to [`SIG_DIGITS`] significant digits, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    // round first so the exponent reflects carries such as 9.9999…e-1 → 1
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// A comma-separated point such as `0.5,0.25`, each coordinate in `[0,1]`.
pub fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("bad coordinate {c:?} in {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    ensure!(coords.len() == dim, "expected {dim} coordinates, got {} in {s:?}", coords.len());
    for &c in &coords {
        ensure!((0.0..=1.0).contains(&c), "coordinate {c} outside [0,1]");
    }
    Ok(coords)
}

/// Decimal or `0x`-prefixed hexadecimal seed.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.with_context(|| format!("bad seed {s:?}"))
}

/// The three bivariate marginals of a trivariate copula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple {
    pub c12: CopulaSpec2,
    pub c13: CopulaSpec2,
    pub c23: CopulaSpec2,
}

impl Triple {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("c12", &self.c12), ("c13", &self.c13), ("c23", &self.c23)] {
            c.validate().with_context(|| format!("invalid {name}"))?;
        }
        Ok(())
    }

    /// Replaces the parameter of every Clayton member. Fails if none is Clayton.
    pub fn with_clayton_alpha(mut self, alpha: f64) -> Result<Self> {
        let mut hits = 0;
        for c in [&mut self.c12, &mut self.c13, &mut self.c23] {
            hits += set_clayton_alpha(c, alpha);
        }
        ensure!(hits > 0, "--alpha given but the triple has no clayton member");
        self.validate()?;
        Ok(self)
    }
}

fn set_clayton_alpha(c: &mut CopulaSpec2, value: f64) -> usize {
    match c {
        CopulaSpec2::Clayton { alpha } => {
            *alpha = value;
            1
        }
        CopulaSpec2::Transpose { inner } => set_clayton_alpha(inner, value),
        _ => 0,
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

fn from_value<T: serde::de::DeserializeOwned>(v: serde_json::Value, path: &Path) -> Result<T> {
    serde_json::from_value(v).with_context(|| format!("invalid spec in {}", path.display()))
}

pub fn load_spec(path: &Path) -> Result<CopulaSpec2> {
    let spec: CopulaSpec2 = from_value(read_json(path)?, path)?;
    spec.validate().with_context(|| format!("invalid spec in {}", path.display()))?;
    Ok(spec)
}

/// A [`FamilyPath`], or a single copula spec meaning a constant family.
pub fn load_family(path: &Path) -> Result<FamilyPath> {
    let value = read_json(path)?;
    if value.get("breakpoints").is_some() || value.get("pieces").is_some() {
        from_value(value, path)
    } else {
        let c: CopulaSpec2 = from_value(value, path)?;
        c.validate().with_context(|| format!("invalid family in {}", path.display()))?;
        Ok(FamilyPath::constant(c))
    }
}

pub fn load_triple(path: &Path) -> Result<Triple> {
    let t: Triple = from_value(read_json(path)?, path)?;
    t.validate().with_context(|| format!("invalid triple in {}", path.display()))?;
    Ok(t)
}

pub fn load_lift(path: &Path) -> Result<LiftedCopula3> {
    let l: LiftedCopula3 = from_value(read_json(path)?, path)?;
    l.validate().with_context(|| format!("invalid lifting in {}", path.display()))?;
    Ok(l)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("core types serialize infallibly")
}

/// Quadrature overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadOverrides {
    pub nodes: Option<usize>,
    pub panels: Option<usize>,
    pub tol: Option<f64>,
}

impl QuadOverrides {
    pub fn apply(&self, mut q: QuadratureConfig) -> Result<QuadratureConfig> {
        if let Some(n) = self.nodes {
            q.nodes = n;
        }
        if let Some(p) = self.panels {
            q.panels = p;
        }
        if let Some(t) = self.tol {
            q.tol = t;
        }
        q.validate()?;
        Ok(q)
    }
}

/// Checks that `path` can be created: its parent directory must exist.
pub fn check_output_path(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    ensure!(parent.is_dir(), "output directory {} does not exist", parent.display());
    ensure!(!path.is_dir(), "output path {} is a directory", path.display());
    Ok(())
}

/// Writes `body` to `path`, or to standard output when `path` is `None`.
pub fn write_output(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?);
            w.write_all(body.as_bytes())?;
            w.flush()?;
        }
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_num(*v));
    }
    out.push('\n');
}

/// `u1,u2,value` rows over the grid, row-major.
pub fn grid_csv2(c: &CopulaSpec2, grid: GridSpec) -> String {
    let mut out = String::from("u1,u2,value\n");
    for [u, v] in grid.points2() {
        push_row(&mut out, &[u, v, c.eval2(u, v)]);
    }
    out
}

/// `u1,u2,u3,value` rows over the grid, row-major.
pub fn grid_csv3(l: &LiftedCopula3, grid: GridSpec) -> Result<String> {
    let mut out = String::from("u1,u2,u3,value\n");
    for u in grid.points3() {
        push_row(&mut out, &[u[0], u[1], u[2], l.eval(u[0], u[1], u[2])?]);
    }
    Ok(out)
}

pub fn samples_csv(batch: &SampleBatch) -> String {
    let mut out = String::with_capacity(40 * batch.len() + 9);
    out.push_str("u1,u2,u3\n");
    for p in &batch.points {
        push_row(&mut out, p);
    }
    out
}

pub fn report_csv(r: &BoundsReport) -> String {
    let mut out = String::from("u1,u2,u3,FL,CL,CU,FU\n");
    for x in &r.records {
        push_row(&mut out, &[x.u[0], x.u[1], x.u[2], x.fl, x.cl, x.cu, x.fu]);
    }
    out
}

/// JSON summary of an improvement report.
pub fn report_summary(r: &BoundsReport) -> serde_json::Value {
    let violations: Vec<_> = r
        .violations
        .iter()
        .map(|v| {
            serde_json::json!({
                "index": v.index,
                "point": r.records[v.index].u,
                "kind": v.kind,
                "amount": v.amount,
            })
        })
        .collect();
    serde_json::json!({
        "max_gap_lower": r.max_gap_lower,
        "max_gap_upper": r.max_gap_upper,
        "violations": violations,
        "tol": r.tol,
        "grid": r.grid.points_per_axis(),
        "min_volume_lower": r.min_volume_lower,
        "min_volume_upper": r.min_volume_upper,
    })
}

/// [`frechet3_core::sampler::sample_lift`] with chunks spread over `workers`
/// threads; the result is identical for every worker count.
pub fn sample_parallel(l: &LiftedCopula3, n: usize, seed: u64, workers: usize) -> Result<SampleBatch> {
    l.validate()?;
    let chunks = chunk_count(n);
    let workers = workers.clamp(1, chunks.max(1));
    let mut parts: Vec<Vec<[f64; 3]>> = vec![Vec::new(); chunks];
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..chunks)
                        .step_by(workers)
                        .map(|i| (i, sample_chunk(l, n, seed, i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, part) in h.join().expect("sampling worker panicked") {
                parts[i] = part;
            }
        }
    });
    Ok(SampleBatch {
        points: parts.concat(),
        seed,
        lift: l.clone(),
    })
}

/// `key=value` lines.
pub fn key_values(pairs: &[(&str, f64)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}={}", fmt_num(*v));
    }
    out
}

pub fn grid(points: usize) -> Result<GridSpec> {
    GridSpec::new(points).map_err(|e| anyhow!(e))
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    match value {
        Some(v) => Ok(v),
        None => bail!("missing required flag {flag}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(fmt_num(0.4375), "0.4375");
        assert_eq!(fmt_num(0.5000000000000001), "0.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(0.99999999999999), "1");
        assert_eq!(fmt_num(123456.7890123456), "123456.789012");
        assert_eq!(fmt_num(2.5e-7), "0.00000025");
        assert_eq!(fmt_num(-1.5), "-1.5");
        assert_eq!(fmt_num(-1e-30), "-0.000000000000000000000000000001");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(3.0), "3");
    }

    #[test]
    fn points_and_seeds() {
        assert_eq!(parse_point("0.5, 0.25", 2).unwrap(), [0.5, 0.25]);
        assert!(parse_point("0.5", 2).is_err());
        assert!(parse_point("0.5,1.5", 2).is_err());
        assert!(parse_point("a,b", 2).is_err());
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0xff").unwrap(), 255);
        assert!(parse_seed("0xzz").is_err());
    }

    #[test]
    fn alpha_override_reaches_transposed_members() {
        let t = Triple {
            c12: CopulaSpec2::fgm(1.0).unwrap(),
            c13: CopulaSpec2::clayton(1.0).unwrap().transposed(),
            c23: CopulaSpec2::Pi,
        };
        let t = t.with_clayton_alpha(20.0).unwrap();
        assert_eq!(t.c13, CopulaSpec2::clayton(20.0).unwrap().transposed());
        assert!(t.clone().with_clayton_alpha(-1.0).is_err());
        let no_clayton = Triple { c13: CopulaSpec2::Pi, ..t };
        assert!(no_clayton.with_clayton_alpha(2.0).is_err());
    }

    #[test]
    fn parallel_sampling_is_schedule_independent() {
        let l = LiftedCopula3::constant(CopulaSpec2::fgm(0.3).unwrap(), CopulaSpec2::Pi, CopulaSpec2::M).unwrap();
        let n = 5000;
        let one = sample_parallel(&l, n, 8, 1).unwrap();
        let four = sample_parallel(&l, n, 8, 4).unwrap();
        assert_eq!(one.points, four.points);
        assert_eq!(one.points, frechet3_core::sampler::sample_lift(&l, n, 8).unwrap().points);
    }
}
