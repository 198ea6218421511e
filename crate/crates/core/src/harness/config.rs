//! Study configuration: a `key = value` file overridden by command-line flags.

use crate::harness::output::Format;
use crate::wiener::TruncationPolicy;
use crate::{Error, Result, C64};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Everything a study needs besides the command itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub lambdas: Vec<C64>,
    pub n_grid: Vec<usize>,
    /// Explicit coefficient indices; empty means the command's default set.
    pub k_list: Vec<usize>,
    pub zetas: Vec<C64>,
    /// Power-bound constant of the resolvent bounds.
    pub c: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub truncation: TruncationPolicy,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![C64::new(0.5, 0.0)],
            n_grid: Vec::new(),
            k_list: Vec::new(),
            zetas: vec![C64::new(0.0, 0.0)],
            c: 1.0,
            alpha: None,
            beta: None,
            truncation: TruncationPolicy::default(),
            out: None,
            format: Format::Csv,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// Raw settings, as read from a config file or from flags. Later sources
/// override earlier ones key by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub lambda: Option<String>,
    pub n: Option<String>,
    pub k: Option<String>,
    pub zeta: Option<String>,
    pub c: Option<String>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub degree: Option<String>,
    pub cap: Option<String>,
    pub rel_tol: Option<String>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub workers: Option<String>,
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", no + 1)))?;
            let value = Some(value.trim().to_string());
            match key.trim().to_ascii_lowercase().as_str() {
                "lambda" => s.lambda = value,
                "n" => s.n = value,
                "k" => s.k = value,
                "zeta" => s.zeta = value,
                "c" => s.c = value,
                "alpha" => s.alpha = value,
                "beta" => s.beta = value,
                "degree" => s.degree = value,
                "cap" => s.cap = value,
                "rel_tol" => s.rel_tol = value,
                "out" => s.out = value,
                "format" => s.format = value,
                "workers" => s.workers = value,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", no + 1))),
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overridden_by(mut self, other: Settings) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(lambda, n, k, zeta, c, alpha, beta, degree, cap, rel_tol, out, format, workers);
        self
    }

    pub fn resolve(&self) -> Result<StudyConfig> {
        let mut cfg = StudyConfig::default();
        if let Some(v) = &self.lambda {
            cfg.lambdas = parse_list(v, parse_complex)?;
        }
        if let Some(v) = &self.n {
            cfg.n_grid = parse_index_list(v)?;
        }
        if let Some(v) = &self.k {
            cfg.k_list = parse_index_list(v)?;
        }
        if let Some(v) = &self.zeta {
            cfg.zetas = parse_list(v, parse_complex)?;
        }
        if let Some(v) = &self.c {
            cfg.c = parse_f64(v)?;
        }
        if let Some(v) = &self.alpha {
            cfg.alpha = Some(parse_f64(v)?);
        }
        if let Some(v) = &self.beta {
            cfg.beta = Some(parse_f64(v)?);
        }
        if let Some(v) = &self.degree {
            cfg.truncation.initial = Some(parse_usize(v)?);
        }
        if let Some(v) = &self.cap {
            cfg.truncation.cap = parse_usize(v)?;
        }
        if let Some(v) = &self.rel_tol {
            cfg.truncation.rel_tol = parse_f64(v)?;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(PathBuf::from(v));
        }
        if let Some(v) = &self.format {
            cfg.format = Format::parse(v)?;
        }
        if let Some(v) = &self.workers {
            cfg.workers = parse_usize(v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl StudyConfig {
    /// Checks that hold for every command.
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::Config("empty lambda list".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(l.norm() <= 1.0)) {
            return Err(Error::Config(format!("lambda = {l} lies outside the closed unit disk")));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Config("n values must be positive".into()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n grid must be strictly increasing".into()));
        }
        if !(self.c >= 1.0) {
            return Err(Error::Config(format!("C = {} must be at least 1", self.c)));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let t = &self.truncation;
        if t.initial == Some(0) || t.cap == 0 || !(t.rel_tol > 0.0) {
            return Err(Error::Config("truncation policy needs positive degree, cap and rel_tol".into()));
        }
        Ok(())
    }

    /// The n grid, rejecting an empty one.
    pub fn require_n_grid(&self) -> Result<&[usize]> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("empty n grid; pass --n".into()));
        }
        Ok(&self.n_grid)
    }

    /// The λ list as reals in `(0, 1)`.
    pub fn real_unit_lambdas(&self) -> Result<Vec<f64>> {
        self.lambdas
            .iter()
            .map(|l| {
                if l.im == 0.0 && l.re > 0.0 && l.re < 1.0 {
                    Ok(l.re)
                } else {
                    Err(Error::Config(format!("lambda = {l} must be real and in (0, 1) for this study")))
                }
            })
            .collect()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Config(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::Config(format!("not a non-negative integer: {s:?}")))
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| item(p.trim())).collect()
}

/// Comma-separated integers; `a..b` (exclusive) and `a..=b` ranges allowed.
pub fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..=") {
            out.extend(parse_usize(lo)?..=parse_usize(hi)?);
        } else if let Some((lo, hi)) = part.split_once("..") {
            out.extend(parse_usize(lo)?..parse_usize(hi)?);
        } else {
            out.push(parse_usize(part)?);
        }
    }
    Ok(out)
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("not a complex number: {s:?}"));
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(C64::new(parse_f64(&t).map_err(|_| bad())?, 0.0));
    };
    // Split at the last sign that is not a leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(C64::new(parse_f64(re).map_err(|_| bad())?, parse_f64(im).map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.3+0.4i").unwrap(), C64::new(0.3, 0.4));
        assert_eq!(parse_complex("-0.3-0.4i").unwrap(), C64::new(-0.3, -0.4));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e-1j").unwrap(), C64::new(1e-3, 0.2));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn index_ranges() {
        assert_eq!(parse_index_list("1,4..6,8..=9").unwrap(), vec![1, 4, 5, 8, 9]);
        assert!(parse_index_list("x").is_err());
    }

    #[test]
    fn file_then_flags() {
        let file = Settings::parse("# study\nlambda = 0.3, 0.7\nn = 8,16\nformat = json\n").unwrap();
        let flags = Settings { n: Some("4".into()), ..Default::default() };
        let cfg = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(cfg.lambdas, vec![C64::new(0.3, 0.0), C64::new(0.7, 0.0)]);
        assert_eq!(cfg.n_grid, vec![4]);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn invalid_settings_rejected() {
        assert!(Settings::parse("bogus = 1").is_err());
        assert!(Settings::parse("no equals sign").is_err());
        let decreasing = Settings { n: Some("8,4".into()), ..Default::default() };
        assert!(matches!(decreasing.resolve(), Err(Error::Config(_))));
        let outside = Settings { lambda: Some("1.5".into()), ..Default::default() };
        assert!(outside.resolve().is_err());
        assert!(StudyConfig::default().require_n_grid().is_err());
    }
}
