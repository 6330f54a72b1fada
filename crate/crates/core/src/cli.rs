//! Command-line front end shared by the `ceslab` binary and the tests.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::claims::{run_claims, Status};
use crate::eigen::{biorthogonality, verify_dual_eigenpair, verify_eigenpair};
use crate::error::{CeslabError, Result};
use crate::hahn;
use crate::numeric::{render_f64, Mode, Rational, Real, Scalar};
use crate::spaces::SpaceSpec;
use crate::spectral::{ergodic_distances, finite_section_spectrum, operator_norm, pseudospectrum, Grid};

#[derive(Parser, Debug)]
#[command(name = "ceslab", version, about = "Generalized Cesaro operators on sequence spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Sequence space, e.g. l1, l2, linf, c0, c, cs, ces2, d1, bv, bv2, hd:log
    #[arg(long, global = true)]
    pub space: Option<String>,
    /// Parameter t as "p/q" or a decimal
    #[arg(long, global = true)]
    pub t: Option<String>,
    /// Section size
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Secondary depth: powers, eigen indices or Hahn coordinates
    #[arg(long = "M", global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, value_parser = ["exact", "float"])]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub filter: Option<String>,
    /// JSON file with defaults for the flags above
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Operator norm enclosure of C_t
    Norm,
    /// Eigenvalues of the N x N section
    Spectrum,
    /// Resolvent estimates on a grid: re0,re1,im0,im1,nx,ny
    Pseudospectrum {
        #[arg(long)]
        grid: Option<String>,
    },
    /// Distances ||C_t^n - P|| and ||(C_t)_[n] - P||
    Ergodic,
    /// Exact eigenpair, dual eigenpair and biorthogonality checks
    EigenVerify,
    /// Existence of C_t in a generalized Hahn space
    HahnExists,
    /// Table of checked statements
    Claims,
}

#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct Config {
    space: Option<String>,
    t: Option<String>,
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "M")]
    m: Option<usize>,
    mode: Option<String>,
    json: Option<bool>,
    filter: Option<String>,
    grid: Option<String>,
}

/// Resolved settings: flags override the config file, which overrides defaults.
struct Settings {
    space: Option<String>,
    t: Option<String>,
    n: Option<usize>,
    m: Option<usize>,
    mode: Option<Mode>,
    json: bool,
    filter: Option<String>,
    grid: Option<String>,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<CeslabError> for Failure {
    fn from(e: CeslabError) -> Self {
        match e {
            CeslabError::Parse(_) | CeslabError::UnsupportedSpace(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: Vec<&'static str>) -> Self {
        Table { headers, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn csv(&self) -> std::result::Result<Vec<u8>, String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(|e| e.to_string())?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| e.to_string())?;
        }
        w.into_inner().map_err(|e| e.to_string())
    }

    fn json(&self) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> =
                    self.headers.iter().zip(r).map(|(h, v)| (h.to_string(), Value::String(v.clone()))).collect();
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_vec_pretty(&Value::Array(rows)).expect("json");
        s.push(b'\n');
        s
    }
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(render_f64).unwrap_or_else(|| "inf".into())
}

fn parse_t(s: &Settings, default: &str) -> Result<Scalar> {
    let t = Scalar::parse(s.t.as_deref().unwrap_or(default))?;
    match s.mode {
        Some(m) => t.in_mode(m),
        None => Ok(t),
    }
}

fn parse_space(s: &Settings, default: &str) -> Result<SpaceSpec> {
    s.space.as_deref().unwrap_or(default).parse()
}

fn exact_t(t: &Scalar) -> Result<Rational> {
    t.to_rational().ok_or_else(|| CeslabError::Parse("t has no exact form".into()))
}

fn cmd_norm(s: &Settings) -> std::result::Result<(Table, bool), Failure> {
    let space = parse_space(s, "l1")?;
    let t = parse_t(s, "1/2")?;
    let n = s.n.unwrap_or(4096);
    let e = operator_norm(&space, &t, n)?;
    let mut tab = Table::new(vec![
        "space", "t", "N", "lower", "upper", "method", "upper_method", "witness_lower", "iterations", "capped",
    ]);
    tab.push(vec![
        space.name(),
        t.render(),
        n.to_string(),
        e.enclosure.lower.render(),
        e.enclosure.upper.as_ref().map(Scalar::render).unwrap_or_else(|| "inf".into()),
        e.method.name().into(),
        e.upper_method.map(|m| m.name()).unwrap_or("none").into(),
        render_f64(e.witness_lower),
        e.iterations.to_string(),
        e.capped.to_string(),
    ]);
    Ok((tab, true))
}

fn cmd_spectrum(s: &Settings) -> std::result::Result<(Table, bool), Failure> {
    let t = parse_t(s, "1/2")?;
    let n = s.n.unwrap_or(16);
    let r = finite_section_spectrum(&t, n)?;
    let mut tab = Table::new(vec!["n", "eigenvalue"]);
    for (k, v) in r.eigenvalues.iter().enumerate() {
        tab.push(vec![k.to_string(), v.render()]);
    }
    Ok((tab, true))
}

fn parse_grid(g: &str) -> Result<Grid> {
    let parts: Vec<&str> = g.split(',').map(str::trim).collect();
    let bad = || CeslabError::Parse(format!("grid '{g}' must be re0,re1,im0,im1,nx,ny"));
    if parts.len() != 6 {
        return Err(bad());
    }
    let f = |i: usize| parts[i].parse::<f64>().map_err(|_| bad());
    let u = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
    Ok(Grid { re: (f(0)?, f(1)?), im: (f(2)?, f(3)?), nx: u(4)?, ny: u(5)? })
}

fn cmd_pseudospectrum(s: &Settings) -> std::result::Result<(Table, bool), Failure> {
    let t = parse_t(s, "1")?.to_f64();
    let n = s.n.unwrap_or(1024);
    let grid = parse_grid(s.grid.as_deref().unwrap_or("-0.5,2.5,-1.5,1.5,16,16"))?;
    let vals = pseudospectrum(t, &grid, n)?;
    let mut tab = Table::new(vec!["re", "im", "resolvent"]);
    for v in vals {
        tab.push(vec![render_f64(v.re), render_f64(v.im), render_f64(v.value)]);
    }
    Ok((tab, true))
}

fn cmd_ergodic(s: &Settings) -> std::result::Result<(Table, bool), Failure> {
    let space = parse_space(s, "l1")?;
    let t = parse_t(s, "1/2")?.to_f64();
    let n = s.n.unwrap_or(1024);
    let m = s.m.unwrap_or(64);
    let r = ergodic_distances(&space, t, m, n)?;
    let mut tab = Table::new(vec!["n", "power_distance", "mean_distance"]);
    for (k, (p, q)) in r.powers.iter().zip(&r.means).enumerate() {
        tab.push(vec![(k + 1).to_string(), render_f64(*p), render_f64(*q)]);
    }
    Ok((tab, true))
}

fn cmd_eigen_verify(s: &Settings) -> std::result::Result<(Table, bool), Failure> {
    let t = exact_t(&parse_t(s, "1/2")?)?;
    let n = s.n.unwrap_or(256);
    let m_max = s.m.unwrap_or(20);
    if m_max >= n {
        return Err(Failure::Usage(format!("--M ({m_max}) must be below --N ({n})")));
    }
    let mut tab = Table::new(vec!["check", "m", "n", "outcome", "reason"]);
    let mut ok = true;
    for m in 0..=m_max {
        let v = verify_eigenpair(&t, m, n);
        ok &= v.is_yes();
        tab.push(vec!["eigenpair".into(), m.to_string(), String::new(), v.outcome.to_string(), v.reason]);
    }
    for k in 0..=m_max {
        let v = verify_dual_eigenpair(&t, k, n);
        ok &= v.is_yes();
        tab.push(vec!["dual_eigenpair".into(), String::new(), k.to_string(), v.outcome.to_string(), v.reason]);
    }
    if t < Rational::from_i64(1) {
        for m in 0..=m_max.min(12) {
            for k in 0..=m {
                let b = biorthogonality(&t, m, k);
                let want = if k == m { Rational::from_i64(1) } else { Rational::from_i64(0) };
                let pass = b == want;
                ok &= pass;
                tab.push(vec![
                    "biorthogonality".into(),
                    m.to_string(),
                    k.to_string(),
                    if pass { "CertifiedYes" } else { "CertifiedNo" }.into(),
                    crate::numeric::render_rational(&b),
                ]);
            }
        }
    }
    Ok((tab, ok))
}

fn cmd_hahn(s: &Settings) -> std::result::Result<(Table, bool), Failure> {
    let space = parse_space(s, "hd:log")?;
    let SpaceSpec::HahnD(w) = space else {
        return Err(Failure::Usage(format!("hahn-exists needs a Hahn space such as hd:log, got {space}")));
    };
    let t = parse_t(s, "1")?.to_f64();
    let m = s.m.unwrap_or(hahn::DEFAULT_M);
    let n = s.n.unwrap_or(hahn::DEFAULT_N);
    let r = hahn::existence_test(&w, t, m, n);
    let sup = r.sup();
    let mut tab = Table::new(vec!["weight", "t", "M", "N", "verdict", "sup_lower", "sup_upper", "beyond", "reason"]);
    tab.push(vec![
        w.label(),
        render_f64(t),
        m.to_string(),
        n.to_string(),
        r.verdict.outcome.to_string(),
        render_f64(sup.lower),
        opt_f64(sup.upper),
        r.beyond.map(render_f64).unwrap_or_default(),
        r.verdict.reason.clone(),
    ]);
    Ok((tab, !r.verdict.is_inconclusive()))
}

fn cmd_claims(s: &Settings) -> (Table, bool) {
    let rows = run_claims(s.filter.as_deref());
    let mut tab = Table::new(vec!["claim_id", "topic", "statement", "computed", "expected", "status", "note"]);
    let ok = rows.iter().all(|r| r.status != Status::Fail);
    for r in rows {
        tab.push(vec![r.claim_id, r.topic, r.statement, r.computed, r.expected, r.status.to_string(), r.note]);
    }
    (tab, ok)
}

fn settings(common: &Common, cli_grid: Option<String>) -> std::result::Result<Settings, Failure> {
    let cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<Config>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };
    let mode = common.mode.clone().or(cfg.mode).map(|m| m.parse::<Mode>()).transpose()?;
    Ok(Settings {
        space: common.space.clone().or(cfg.space),
        t: common.t.clone().or(cfg.t),
        n: common.n.or(cfg.n),
        m: common.m.or(cfg.m),
        mode,
        json: common.json || cfg.json.unwrap_or(false),
        filter: common.filter.clone().or(cfg.filter),
        grid: cli_grid.or(cfg.grid),
    })
}

fn threads() -> Option<usize> {
    std::env::var("CESLAB_THREADS").ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Runs one command line; returns the exit code (0 pass, 1 failure, 2 usage error).
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let work = || -> std::result::Result<(Table, bool, bool), Failure> {
        let grid = match &cli.command {
            Command::Pseudospectrum { grid } => grid.clone(),
            _ => None,
        };
        let s = settings(&cli.common, grid)?;
        let (tab, ok) = match &cli.command {
            Command::Norm => cmd_norm(&s)?,
            Command::Spectrum => cmd_spectrum(&s)?,
            Command::Pseudospectrum { .. } => cmd_pseudospectrum(&s)?,
            Command::Ergodic => cmd_ergodic(&s)?,
            Command::EigenVerify => cmd_eigen_verify(&s)?,
            Command::HahnExists => cmd_hahn(&s)?,
            Command::Claims => cmd_claims(&s),
        };
        Ok((tab, ok, s.json))
    };
    let result = match threads() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => Err(Failure::Run(e.to_string())),
        },
        None => work(),
    };
    let (tab, ok, json) = match result {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
        Err(Failure::Run(m)) => {
            let _ = writeln!(err, "error: {m}");
            return 1;
        }
    };
    let bytes = if json {
        tab.json()
    } else {
        match tab.csv() {
            Ok(b) => b,
            Err(m) => {
                let _ = writeln!(err, "error: {m}");
                return 1;
            }
        }
    };
    let written = match &cli.common.out {
        Some(p) => std::fs::write(p, &bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(m) = written {
        let _ = writeln!(err, "error: {m}");
        return 1;
    }
    if ok {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ceslab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn norm_l1() {
        let (code, out, _) = call(&["norm", "--space", "l1", "--t", "0.5", "--N", "4096"]);
        assert_eq!(code, 0);
        let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
        let lo: f64 = row[3].parse().unwrap();
        let hi: f64 = row[4].parse().unwrap();
        assert!(lo <= 1.3862943611198906 && 1.3862943611198906 <= hi && hi - lo < 1e-6);
    }

    #[test]
    fn norm_linf_exact() {
        let (code, out, _) = call(&["norm", "--space", "linf", "--t", "0.3", "--N", "16"]);
        assert_eq!(code, 0);
        assert!(out.lines().nth(1).unwrap().starts_with("linf,3/10,16,1,1,"), "{out}");
    }

    #[test]
    fn norm_l1_at_one_fails() {
        let (code, _, err) = call(&["norm", "--space", "l1", "--t", "1", "--N", "16"]);
        assert_eq!(code, 1);
        assert!(err.contains("C_1 does not exist in l1"), "{err}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["norm", "--space", "nope"]).0, 2);
        assert_eq!(call(&["norm", "--t", "x/y"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["pseudospectrum", "--grid", "1,2"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let (code, _, err) = call(&["pseudospectrum", "--t", "1", "--N", "64", "--grid", "0,1,0,1,0,4"]);
        assert_eq!(code, 1);
        assert!(err.contains("empty grid"));
    }

    #[test]
    fn spectrum_rationals() {
        let (_, out, _) = call(&["spectrum", "--t", "1/2", "--N", "4"]);
        assert_eq!(out, "n,eigenvalue\n0,1\n1,1/2\n2,1/3\n3,1/4\n");
        let (_, out, _) = call(&["spectrum", "--t", "1/2", "--N", "2", "--mode", "float", "--json"]);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v[1]["eigenvalue"], "5.0000000000000000e-1");
    }

    #[test]
    fn eigen_verify_and_hahn() {
        let (code, out, _) = call(&["eigen-verify", "--t", "3/4", "--M", "6", "--N", "64"]);
        assert_eq!(code, 0);
        assert!(!out.contains("CertifiedNo"));
        let (code, out, _) = call(&["hahn-exists", "--space", "hd:power:1", "--t", "1", "--M", "16", "--N", "4096"]);
        assert_eq!(code, 0);
        assert!(out.contains("CertifiedNo"));
    }

    #[test]
    fn config_file_and_override() {
        let dir = std::env::temp_dir().join(format!("ceslab-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, r#"{"space": "linf", "t": "1/4", "N": 8}"#).unwrap();
        let (code, out, _) = call(&["norm", "--config", p.to_str().unwrap(), "--N", "12"]);
        assert_eq!(code, 0);
        assert!(out.lines().nth(1).unwrap().starts_with("linf,1/4,12,"), "{out}");
        std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
        assert_eq!(call(&["norm", "--config", p.to_str().unwrap()]).0, 2);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn ergodic_output_is_deterministic() {
        let a = call(&["ergodic", "--t", "1/2", "--N", "128", "--M", "16"]);
        let b = call(&["ergodic", "--t", "1/2", "--N", "128", "--M", "16"]);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
    }
}
