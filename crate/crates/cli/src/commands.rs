//! One function per subcommand.

use serde_json::json;
use stein_core::analytic::{charfn_closed, charfn_ode, density_table, dual_density_ode, mgf};
use stein_core::minimality::{self, default_scan_k, minimality_scan, ShapeGrid};
use stein_core::moments::{for_spec, moment_recurrence_solve};
use stein_core::scalar;
use stein_core::steinops::{
    product_iid, product_iid_linear, reduction_check, stein_operator, sum_transform,
    to_linear_form, Reduction, ShiftParam,
};
use stein_core::verify::{default_bank, exact_check, mc_check_with, residual_f64};
use stein_core::{Exec, OperatorPoly, Sampler, UPoly};

use crate::input::{self, unit_normal_means};
use crate::render::{csv_table, float, json, line};
use crate::{
    CharfnArgs, CliError, ConstructArgs, DensityArgs, FlagContext, Format, MinimalityArgs,
    MomentsArgs, Outcome, ReduceArgs, ReduceKind, VerifyArgs,
};

fn exact(flag: &'static str, v: &Option<String>) -> Result<stein_core::Scalar, CliError> {
    let raw = v
        .as_deref()
        .ok_or_else(|| CliError::usage(flag, "missing value"))?;
    scalar::parse(raw).flag(flag)
}

fn operator_output(op: &OperatorPoly, format: Format) -> String {
    match format {
        Format::Text => line(op.to_text()),
        Format::Latex => line(op.to_latex()),
        Format::Json => line(op.to_json()),
        Format::Csv => csv_table(
            &["m", "d", "coeff"],
            op.terms()
                .map(|(m, d, c)| vec![m.to_string(), d.to_string(), scalar::fmt(c)]),
        ),
    }
}

pub fn construct(a: &ConstructArgs) -> Result<Outcome, CliError> {
    let mut op = if let Some(d) = &a.dist {
        let spec = input::distribution("--dist", d)?;
        stein_operator(&spec).flag("--dist")?
    } else if a.product_iid_linear {
        let shift = |flag: &'static str, v: &Option<String>| {
            ShiftParam::parse(v.as_deref().unwrap_or_default()).flag(flag)
        };
        product_iid_linear(
            &exact("--alpha", &a.alpha)?,
            &exact("--beta", &a.beta)?,
            &shift("--a", &a.a)?,
            &shift("--b", &a.b)?,
        )
        .flag("--alpha")?
    } else {
        let poly = |flag: &'static str, v: &Option<String>| {
            input::numbers(v.as_deref().unwrap_or_default())
                .map(UPoly::new)
                .map_err(|e| CliError::usage(flag, e))
        };
        product_iid(&poly("--p", &a.p)?, &poly("--q", &a.q)?).flag("--p")?
    };
    if let Some(n) = a.sum {
        if n == 0 {
            return Err(CliError::usage("--sum", "needs n >= 1"));
        }
        op = sum_transform(&to_linear_form(&op).flag("--sum")?, n).flag("--sum")?;
    }
    if a.scale.is_some() {
        op = op.rescale(&exact("--scale", &a.scale)?).flag("--scale")?;
    }
    if a.normalize {
        op = op.normalized();
    }
    Ok(Outcome::ok(operator_output(&op, a.format)))
}

pub fn verify(a: &VerifyArgs, exec: Exec) -> Result<Outcome, CliError> {
    let format = a
        .format
        .require(&[Format::Text, Format::Json, Format::Csv])?;
    let op = input::operator("--op", &a.op)?;
    let spec = input::distribution("--dist", &a.dist)?;
    if a.threshold.is_nan() || a.threshold <= 0.0 {
        return Err(CliError::usage("--threshold", "must be > 0"));
    }
    let exact_report = if a.mc_only {
        None
    } else {
        let mut m = for_spec(&spec).flag("--dist")?;
        Some(exact_check(&op, &mut m, a.max_k).flag("--max-k")?)
    };
    let mc_report = if a.mc || a.mc_only {
        if a.n < 2 {
            return Err(CliError::usage("--n", "needs at least 2 samples"));
        }
        let sampler = Sampler::new(&spec, a.seed).flag("--dist")?;
        Some(mc_check_with(
            &op,
            &sampler,
            &default_bank(),
            a.n,
            a.threshold,
            exec,
        ))
    } else {
        None
    };
    let ok =
        exact_report.as_ref().is_none_or(|r| r.pass) && mc_report.as_ref().is_none_or(|r| r.pass);
    let output = match format {
        Format::Json => json(&json!({ "pass": ok, "exact": exact_report, "mc": mc_report })),
        Format::Csv => {
            let mut rows = Vec::new();
            if let Some(r) = &exact_report {
                for (k, v) in r.residuals.iter().enumerate() {
                    rows.push(vec![
                        "exact".into(),
                        format!("x^{k}"),
                        scalar::fmt(v),
                        String::new(),
                        String::new(),
                    ]);
                }
            }
            if let Some(r) = &mc_report {
                for e in &r.entries {
                    rows.push(vec![
                        "mc".into(),
                        e.function.clone(),
                        float(e.estimate),
                        float(e.std_error),
                        float(e.z),
                    ]);
                }
            }
            csv_table(&["check", "item", "value", "std_error", "z"], rows)
        }
        _ => {
            let mut s = String::new();
            if let Some(r) = &exact_report {
                match r.first_nonzero() {
                    None => {
                        s += &line(format!("exact: pass, E[A x^k] = 0 for k = 0..={}", r.max_k))
                    }
                    Some(k) => {
                        let v = &r.residuals[k];
                        s += &line(format!(
                            "exact: FAIL, E[A x^{k}] = {} (~{:e})",
                            scalar::fmt(v),
                            residual_f64(v)
                        ))
                    }
                }
            }
            if let Some(r) = &mc_report {
                s += &line(format!(
                    "mc: {}, n = {}, seed = {}, max |z| = {:.3} (threshold {})",
                    if r.pass { "pass" } else { "FAIL" },
                    r.n,
                    r.seed,
                    r.max_abs_z(),
                    r.threshold
                ));
                for e in &r.entries {
                    s += &line(format!(
                        "  {:<24} mean {:+.6e}  se {:.3e}  z {:+.3}",
                        e.function, e.estimate, e.std_error, e.z
                    ));
                }
            }
            s
        }
    };
    Ok(Outcome { output, ok })
}

pub fn moments(a: &MomentsArgs, exec: Exec) -> Result<Outcome, CliError> {
    let format = a
        .format
        .require(&[Format::Text, Format::Json, Format::Csv])?;
    let (mut seq, spec) = if let Some(d) = &a.dist {
        let spec = input::distribution("--dist", d)?;
        (for_spec(&spec).flag("--dist")?, Some(spec))
    } else {
        let op = input::operator("--op", a.op.as_deref().unwrap_or_default())?;
        let init = input::numbers(a.initial.as_deref().unwrap_or_default())
            .map_err(|e| CliError::usage("--initial", e))?;
        (moment_recurrence_solve(&op, &init).flag("--initial")?, None)
    };
    let exact: Vec<String> = seq
        .prefix(a.max_k + 1)
        .flag("--max-k")?
        .iter()
        .map(scalar::fmt)
        .collect();
    let empirical: Option<Vec<f64>> = match (a.sample, &spec) {
        (Some(n), Some(spec)) => {
            if n == 0 {
                return Err(CliError::usage("--sample", "needs at least 1 draw"));
            }
            let xs = Sampler::new(spec, a.seed)
                .flag("--dist")?
                .sample_with(n, exec);
            Some(
                (0..=a.max_k)
                    .map(|k| xs.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n as f64)
                    .collect(),
            )
        }
        _ => None,
    };
    let output = match format {
        Format::Json => json(
            &json!({ "moments": exact, "empirical": empirical, "seed": empirical.as_ref().map(|_| a.seed) }),
        ),
        Format::Csv => {
            let rows = exact.iter().enumerate().map(|(k, m)| {
                let mut r = vec![k.to_string(), m.clone()];
                if let Some(e) = &empirical {
                    r.push(float(e[k]));
                }
                r
            });
            if empirical.is_some() {
                csv_table(&["k", "moment", "empirical"], rows)
            } else {
                csv_table(&["k", "moment"], rows)
            }
        }
        _ => exact
            .iter()
            .enumerate()
            .map(|(k, m)| match &empirical {
                Some(e) => line(format!("m{k} = {m}  (sample {:.6})", e[k])),
                None => line(format!("m{k} = {m}")),
            })
            .collect(),
    };
    Ok(Outcome::ok(output))
}

fn parse_shape(s: &str) -> Result<ShapeGrid, CliError> {
    let bad = || CliError::usage("--shape", format!("expected <order>x<degree>, got {s:?}"));
    let (o, d) = s.split_once('x').ok_or_else(bad)?;
    Ok(ShapeGrid::new(
        o.trim().parse().map_err(|_| bad())?,
        d.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn minimality(a: &MinimalityArgs, exec: Exec) -> Result<Outcome, CliError> {
    let format = a
        .format
        .require(&[Format::Text, Format::Json, Format::Csv])?;
    let spec = input::distribution("--dist", &a.dist)?;
    let mut m = for_spec(&spec).flag("--dist")?;
    if let Some(s) = &a.shape {
        let shape = parse_shape(s)?;
        let k_max = a.k_max.unwrap_or_else(|| shape.square_k());
        let mx = minimality::build_matrix(&mut m, shape, k_max).flag("--dist")?;
        let det = minimality::determinant(&mx).ok().map(|d| scalar::fmt(&d));
        let basis: Vec<OperatorPoly> = minimality::nullspace(&mx)
            .iter()
            .map(|v| shape.operator_of(v))
            .collect();
        let rank = minimality::rank(&mx);
        let output = match format {
            Format::Json => json(&json!({
                "order": shape.max_order,
                "degree": shape.max_degree,
                "unknowns": shape.unknowns(),
                "k_max": k_max,
                "rows": mx.rows.len(),
                "rank": rank,
                "nullity": basis.len(),
                "determinant": det,
                "nullspace": basis.iter().map(|b| json!({
                    "text": b.to_text(),
                    "operator": b.to_json_value(),
                })).collect::<Vec<_>>(),
            })),
            Format::Csv => csv_table(
                &[
                    "order",
                    "degree",
                    "unknowns",
                    "rows",
                    "rank",
                    "nullity",
                    "determinant",
                ],
                [vec![
                    shape.max_order.to_string(),
                    shape.max_degree.to_string(),
                    shape.unknowns().to_string(),
                    mx.rows.len().to_string(),
                    rank.to_string(),
                    basis.len().to_string(),
                    det.clone().unwrap_or_default(),
                ]],
            ),
            _ => {
                let mut s = line(format!(
                    "shape {}x{}: {} unknowns, {} rows, rank {rank}, nullity {}",
                    shape.max_order,
                    shape.max_degree,
                    shape.unknowns(),
                    mx.rows.len(),
                    basis.len()
                ));
                if let Some(d) = &det {
                    s += &line(format!("determinant {d}"));
                }
                for b in &basis {
                    s += &line(format!("nullspace: {}", b.to_text()));
                }
                s
            }
        };
        return Ok(Outcome::ok(output));
    }
    let (mo, md) = (a.max_order.unwrap_or(0), a.max_degree.unwrap_or(0));
    let k_max = a.k_max.unwrap_or_else(|| default_scan_k(mo, md));
    let report = minimality_scan(&mut m, mo, md, k_max, exec).flag("--k-max")?;
    let output = match format {
        Format::Json => json(&report),
        Format::Csv => csv_table(
            &[
                "order",
                "degree",
                "unknowns",
                "rows",
                "rank",
                "nullity",
                "determinant",
                "minimal",
                "witness",
            ],
            report.cells.iter().map(|c| {
                vec![
                    c.order.to_string(),
                    c.degree.to_string(),
                    c.unknowns.to_string(),
                    c.rows.to_string(),
                    c.rank.to_string(),
                    c.nullity.to_string(),
                    c.determinant.clone().unwrap_or_default(),
                    c.minimal.to_string(),
                    c.witness.clone().unwrap_or_default(),
                ]
            }),
        ),
        _ => report
            .cells
            .iter()
            .map(|c| {
                let tail = match &c.witness {
                    Some(w) => format!("  minimal: {w}"),
                    None => String::new(),
                };
                line(format!(
                    "{}x{}: nullity {}{tail}",
                    c.order, c.degree, c.nullity
                ))
            })
            .collect(),
    };
    Ok(Outcome::ok(output))
}

/// The operator named by `--op`, or the constructed one for `--dist`.
fn operator_of(
    op: &Option<String>,
    dist: &Option<String>,
) -> Result<(OperatorPoly, &'static str), CliError> {
    match (op, dist) {
        (Some(o), _) => Ok((input::operator("--op", o)?, "--op")),
        (None, Some(d)) => {
            let spec = input::distribution("--dist", d)?;
            Ok((stein_operator(&spec).flag("--dist")?, "--dist"))
        }
        (None, None) => Err(CliError::usage("--op", "either --op or --dist is required")),
    }
}

fn normal_means(dist: &Option<String>, what: &'static str) -> Result<(f64, f64), CliError> {
    let spec = input::distribution("--dist", dist.as_deref().unwrap_or_default())?;
    unit_normal_means(&spec).ok_or_else(|| {
        CliError::usage(
            "--dist",
            format!("{what} needs prodnormal:<mu_x>,<mu_y> with unit variances"),
        )
    })
}

pub fn charfn(a: &CharfnArgs) -> Result<Outcome, CliError> {
    if let Some(s) = a.mgf {
        let format = a.format.require(&[Format::Text, Format::Json])?;
        let (mx, my) = normal_means(&a.dist, "--mgf")?;
        let v = mgf(s, mx, my).flag("--mgf")?;
        let output = match format {
            Format::Json => json(&json!({ "s": s, "mgf": v })),
            _ => line(float(v)),
        };
        return Ok(Outcome::ok(output));
    }
    if let Some(g) = &a.grid {
        let format = a
            .format
            .require(&[Format::Csv, Format::Json, Format::Text])?;
        let (mx, my) = normal_means(&a.dist, "--grid")?;
        let ts = input::grid("--grid", g)?;
        let vals: Vec<(f64, f64, f64)> = ts
            .iter()
            .map(|&t| {
                let z = charfn_closed(t, mx, my);
                (t, z.re, z.im)
            })
            .collect();
        let output = match format {
            Format::Json => json(
                &vals
                    .iter()
                    .map(|(t, re, im)| json!({ "t": t, "re": re, "im": im }))
                    .collect::<Vec<_>>(),
            ),
            Format::Text => vals
                .iter()
                .map(|(t, re, im)| line(format!("phi({t}) = {re:.15e} {im:+.15e}i")))
                .collect(),
            _ => csv_table(
                &["t", "re", "im"],
                vals.iter()
                    .map(|(t, re, im)| vec![float(*t), float(*re), float(*im)]),
            ),
        };
        return Ok(Outcome::ok(output));
    }
    let format = a
        .format
        .require(&[Format::Text, Format::Latex, Format::Json])?;
    let (op, flag) = operator_of(&a.op, &a.dist)?;
    let ode = charfn_ode(&to_linear_form(&op).flag(flag)?)
        .flag(flag)?
        .monic();
    let output = match format {
        Format::Latex => line(ode.to_latex()),
        Format::Json => json(&json!({ "p": ode.p, "q": ode.q, "text": ode.to_text() })),
        _ => line(ode.to_text()),
    };
    Ok(Outcome::ok(output))
}

pub fn density(a: &DensityArgs, exec: Exec) -> Result<Outcome, CliError> {
    if let Some(g) = &a.grid {
        let format = a
            .format
            .require(&[Format::Csv, Format::Json, Format::Text])?;
        let (mx, my) = normal_means(&a.dist, "--grid")?;
        let xs = input::grid("--grid", g)?;
        if a.terms == 0 {
            return Err(CliError::usage("--terms", "needs at least 1 term"));
        }
        let rows = density_table(&xs, mx, my, a.terms, exec).flag("--grid")?;
        let output = match format {
            Format::Json => json(&rows),
            Format::Text => rows
                .iter()
                .map(|r| {
                    line(format!(
                        "x = {:<8} series {:.12e}  conv {:.12e}  |diff| {:.2e}",
                        r.x, r.series, r.conv, r.abs_diff
                    ))
                })
                .collect(),
            _ => csv_table(
                &["x", "series", "conv", "abs_diff"],
                rows.iter().map(|r| {
                    vec![
                        float(r.x),
                        float(r.series),
                        float(r.conv),
                        float(r.abs_diff),
                    ]
                }),
            ),
        };
        return Ok(Outcome::ok(output));
    }
    let format = a
        .format
        .require(&[Format::Text, Format::Latex, Format::Json])?;
    let (op, flag) = operator_of(&a.op, &a.dist)?;
    let ode = dual_density_ode(&op).flag(flag)?.normalized();
    let output = match format {
        Format::Latex => line(ode.to_latex()),
        Format::Json => json(&json!({ "coeffs": ode.coeff_strings(), "text": ode.to_text() })),
        _ => line(ode.to_text()),
    };
    Ok(Outcome::ok(output))
}

pub fn reduce(a: &ReduceArgs) -> Result<Outcome, CliError> {
    let format = a.format.require(&[Format::Text, Format::Json])?;
    let op = input::operator("--op", &a.op)?;
    let l = input::operator("--by", &a.by)?;
    let b = input::operator("--target", &a.target)?;
    let (kind, shown) = match a.kind {
        ReduceKind::Compose => (Reduction::Compose, "A L = B"),
        ReduceKind::Factor => (Reduction::Factor, "A = B L"),
    };
    let holds = reduction_check(&op, &l, &b, kind);
    let output = match format {
        Format::Json => json(&json!({ "identity": shown, "holds": holds })),
        _ => line(format!(
            "{shown}: {}",
            if holds { "holds" } else { "FAILS" }
        )),
    };
    Ok(Outcome { output, ok: holds })
}
