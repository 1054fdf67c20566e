//! Parsing of flag values: distributions, operators, number lists and grids.

use std::io::Read;

use stein_core::scalar::{self, int, Scalar};
use stein_core::steinops::DistributionSpec;
use stein_core::OperatorPoly;

use crate::CliError;

/// Reads `@path`, `-` (stdin) or returns the value itself.
pub fn resolve_source(flag: &'static str, raw: &str) -> Result<String, CliError> {
    if raw == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::usage(flag, format!("reading stdin: {e}")))?;
        Ok(s)
    } else if let Some(path) = raw.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(flag, format!("reading {path}: {e}")))
    } else {
        Ok(raw.to_string())
    }
}

/// An operator as JSON (`{"terms":[...]}`) or text (`M D^2 + D - M`).
pub fn operator(flag: &'static str, raw: &str) -> Result<OperatorPoly, CliError> {
    let body = resolve_source(flag, raw)?;
    let body = body.trim();
    let op = if body.starts_with('{') {
        OperatorPoly::from_json(body)
    } else {
        OperatorPoly::parse_text(body)
    };
    op.map_err(|e| CliError::usage(flag, e.to_string()))
}

/// Distribution shorthand or JSON; see [`parse_dist`].
pub fn distribution(flag: &'static str, raw: &str) -> Result<DistributionSpec, CliError> {
    let body = resolve_source(flag, raw)?;
    let spec = parse_dist(body.trim()).map_err(|e| CliError::usage(flag, e))?;
    spec.validate()
        .map_err(|e| CliError::usage(flag, e.to_string()))?;
    Ok(spec)
}

/// `normal:mu,var`, `gamma:r,shift`, `vg:r,theta,sigma[,mu]`,
/// `prodnormal:mu_x,mu_y[,var_x,var_y]`, prefixed by any number of
/// `sum<n>:` and `scale<c>:`; anything starting with `{` is JSON.
pub fn parse_dist(s: &str) -> Result<DistributionSpec, String> {
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("bad distribution JSON: {e}"));
    }
    let (head, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("expected <family>:<params>, got {s:?}"))?;
    if let Some(n) = head.strip_prefix("sum") {
        let n: u32 = n.parse().map_err(|_| format!("bad sum count {n:?}"))?;
        return Ok(DistributionSpec::sum_iid(n, parse_dist(rest)?));
    }
    if let Some(c) = head.strip_prefix("scale") {
        return Ok(DistributionSpec::scaled(number(c)?, parse_dist(rest)?));
    }
    let p = numbers(rest)?;
    let arity = |lo: usize, hi: usize| {
        if p.len() < lo || p.len() > hi {
            Err(format!(
                "{head} takes {lo}..={hi} parameters, got {}",
                p.len()
            ))
        } else {
            Ok(())
        }
    };
    match head {
        "normal" => {
            arity(2, 2)?;
            Ok(DistributionSpec::normal(p[0].clone(), p[1].clone()))
        }
        "gamma" => {
            arity(2, 2)?;
            Ok(DistributionSpec::shifted_gamma(p[0].clone(), p[1].clone()))
        }
        "vg" => {
            arity(3, 4)?;
            let mu = p.get(3).cloned().unwrap_or_else(|| int(0));
            Ok(DistributionSpec::variance_gamma(
                p[0].clone(),
                p[1].clone(),
                p[2].clone(),
                mu,
            ))
        }
        "prodnormal" => {
            if p.len() != 2 && p.len() != 4 {
                return Err(format!(
                    "prodnormal takes 2 or 4 parameters, got {}",
                    p.len()
                ));
            }
            let (vx, vy) = if p.len() == 4 {
                (p[2].clone(), p[3].clone())
            } else {
                (int(1), int(1))
            };
            Ok(DistributionSpec::product(
                DistributionSpec::normal(p[0].clone(), vx),
                DistributionSpec::normal(p[1].clone(), vy),
            ))
        }
        other => Err(format!("unknown family {other:?}")),
    }
}

fn number(s: &str) -> Result<Scalar, String> {
    scalar::parse(s.trim()).map_err(|e| e.to_string())
}

/// Comma separated exact numbers.
pub fn numbers(s: &str) -> Result<Vec<Scalar>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(number).collect()
}

/// `(mu_x, mu_y)` when `spec` is a product of two unit-variance normals.
pub fn unit_normal_means(spec: &DistributionSpec) -> Option<(f64, f64)> {
    let DistributionSpec::ProductIndep { left, right } = spec else {
        return None;
    };
    match (left.as_ref(), right.as_ref()) {
        (
            DistributionSpec::Normal {
                mean: mx,
                variance: vx,
            },
            DistributionSpec::Normal {
                mean: my,
                variance: vy,
            },
        ) if *vx == int(1) && *vy == int(1) => Some((scalar::to_f64(mx), scalar::to_f64(my))),
        _ => None,
    }
}

/// `lo:hi:n`, `n >= 2` evenly spaced points, or a comma list.
pub fn grid(flag: &'static str, s: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: String| CliError::usage(flag, why);
    let float = |v: &str| -> Result<f64, CliError> {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("not a finite number: {v:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi) = (float(lo)?, float(hi)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad point count {n:?}")))?;
            if n < 2 {
                return Err(bad("need at least 2 points".into()));
            }
            Ok((0..n)
                .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                .collect())
        }
        [list] => list.split(',').map(float).collect(),
        _ => Err(bad(format!("expected lo:hi:n or a comma list, got {s:?}"))),
    }
}
