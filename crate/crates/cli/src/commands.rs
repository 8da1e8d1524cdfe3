use std::fs;

use serde_json::{json, Value};
use treediff::io::{parse_named_function, parse_scalar, FunctionFile};
use treediff::operators::{
    eigen_classify, hardy_alpha, non_isometry_witness, non_surjectivity_witness, spectrum_bounds,
    truncation_matrix, OperatorDescriptor, FINITE_SECTION_WARNING,
};
use treediff::{Expr, NormReport, Space, TreeFunction, Witness, TOLERANCE};

use crate::report::{Report, Table};
use crate::{CliError, RunConfig};

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("results serialise")
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::Vertex(v) => format!("vertex {v}"),
        Witness::Level(n) => format!("level {n}"),
    }
}

/// A built-in name (`chi:[0,1]`, `hardy-witness`, `alt-witness`, `const:c`,
/// `zero`, `expr:<dsl>`) or a path to a function file.
pub fn resolve_function(cfg: &RunConfig, space: &Space, text: &str) -> Result<TreeFunction, CliError> {
    let weight = match space {
        Space::Weighted(w) => Some(w.clone()),
        _ => cfg.weight()?,
    };
    let f = match parse_named_function(text, weight.as_ref(), &cfg.params).map_err(CliError::usage)? {
        Some(f) => f,
        None => {
            let contents = fs::read_to_string(text)
                .map_err(|e| CliError::Usage(format!("cannot read function file `{text}`: {e}")))?;
            FunctionFile::from_json(&contents)
                .and_then(|file| file.into_function(&cfg.params))
                .map_err(CliError::usage)?
        }
    };
    if let TreeFunction::Sparse(s) = &f {
        for (v, _) in s.entries() {
            cfg.shape.validate(v).map_err(CliError::usage)?;
        }
    }
    Ok(f)
}

fn partial_rows(label: &str, report: &NormReport, rows: &mut Vec<Vec<String>>) {
    let last = report.partials.len().saturating_sub(1);
    for (i, (depth, value)) in report.partials.iter().enumerate() {
        let (witness, attained) = if i == last {
            (witness_text(&report.witness), report.attained_exactly.to_string())
        } else {
            (String::new(), String::new())
        };
        rows.push(vec![label.to_string(), depth.to_string(), value.to_string(), witness, attained]);
    }
}

/// `||f||` and `||op f||` on the configured space, and their ratio.
pub fn norm(cfg: &RunConfig, function: &str, op: &str) -> Result<Report, CliError> {
    let space = cfg.space()?;
    let f = resolve_function(cfg, &space, function)?;
    let op: OperatorDescriptor = op.parse().map_err(CliError::usage)?;
    let nf = space.partial_norm(&f, &cfg.shape, cfg.depth)?;
    let g = op.apply(&f, &cfg.shape)?;
    let nof = space.partial_norm(&g, &cfg.shape, cfg.depth)?;
    let ratio = (nf.value() > TOLERANCE).then(|| nof.value() / nf.value());
    let certified = ratio.is_some() && nf.attained_exactly && nof.attained_exactly;
    let mut rows = Vec::new();
    partial_rows("f", &nf, &mut rows);
    partial_rows("op_f", &nof, &mut rows);
    let results = json!({
        "function": f.describe(),
        "operator": op.to_string(),
        "space": space.to_string(),
        "norm_f": to_json(&nf),
        "norm_op_f": to_json(&nof),
        "ratio": ratio,
        "certified": certified,
    });
    Ok(Report::new("norm", cfg.echo(), results).with_table(Table {
        columns: vec!["report", "depth", "value", "witness", "attained"],
        rows,
    }))
}

/// `alpha_1 .. alpha_N` on the `(q+1)`-homogeneous tree.
pub fn alpha(cfg: &RunConfig, q: Option<u32>) -> Result<Report, CliError> {
    let q = match q.or(cfg.shape.homogeneous_degree()) {
        Some(q) => q,
        None => return Err(CliError::Usage(format!("alpha needs --q or a homogeneous shape, got {}", cfg.shape))),
    };
    let values = (1..=cfg.depth)
        .map(|n| hardy_alpha(q, n))
        .collect::<treediff::Result<Vec<_>>>()?;
    let sup = values.iter().copied().fold(hardy_alpha(q, 0)?, f64::max);
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, a)| vec![(i + 1).to_string(), a.to_string()])
        .collect();
    let results = json!({
        "q": q,
        "levels": (1..=cfg.depth).collect::<Vec<_>>(),
        "alpha": values,
        "sup": sup,
    });
    Ok(Report::new("alpha", cfg.echo(), results).with_table(Table {
        columns: vec!["n", "alpha"],
        rows,
    }))
}

/// Classifies `lambda` as an eigenvalue of `D` on the configured space.
pub fn eigen(cfg: &RunConfig, lambda: &str) -> Result<Report, CliError> {
    let space = cfg.space()?;
    let lambda = parse_scalar(lambda).map_err(CliError::usage)?;
    let (has_constants, certain) = space.contains_constants(cfg.depth)?;
    let c = eigen_classify(lambda, &cfg.shape, cfg.depth, has_constants)?;
    let results = json!({
        "space": space.to_string(),
        "has_constants": has_constants,
        "has_constants_certain": certain,
        "classification": to_json(&c),
    });
    Ok(Report::new("eigen", cfg.echo(), results))
}

/// Bounding disks and known members of `sigma(D)`.
pub fn spectrum(cfg: &RunConfig, cap: f64) -> Result<Report, CliError> {
    let space = cfg.space()?;
    let bounds = spectrum_bounds(&space, &cfg.shape, cfg.depth, cap)?;
    let surjectivity = non_surjectivity_witness(&cfg.shape, cfg.depth.max(2))?;
    let isometry = non_isometry_witness(&space, &cfg.shape, cfg.depth)?;
    let results = json!({
        "space": space.to_string(),
        "spectrum": to_json(&bounds),
        "exact_is_analytic": bounds.exact.is_some(),
        "cb_not_surjective": to_json(&surjectivity),
        "d_not_isometry": to_json(&isometry),
    });
    Ok(Report::new("spectrum", cfg.echo(), results))
}

/// Finite section of `op` on `B(o, N)`.
pub fn matrix(cfg: &RunConfig, op: &str, cap: u64) -> Result<Report, CliError> {
    let op: OperatorDescriptor = op.parse().map_err(CliError::usage)?;
    let m = truncation_matrix(&op, &cfg.shape, cfg.depth, cap)?;
    let diagonal: Vec<Value> = m
        .diagonal_multiset()
        .into_iter()
        .map(|(z, k)| json!({"value": [z.re, z.im], "multiplicity": k}))
        .collect();
    let results = json!({
        "operator": op.to_string(),
        "dim": m.dim(),
        "matrix": m.to_dense_json(),
        "diagonal": diagonal,
        "lower_triangular": m.is_lower_triangular(),
        "warning": FINITE_SECTION_WARNING,
    });
    Ok(Report::new("matrix", cfg.echo(), results))
}

/// Parses a DSL expression and evaluates it on levels `0..=N`.
pub fn parse(cfg: &RunConfig, text: &str) -> Result<Report, CliError> {
    let expr = Expr::parse(text).map_err(|e| CliError::Usage(format!("`{text}`: {e}")))?;
    let mut rows = Vec::new();
    let values: Vec<Value> = (0..=cfg.depth as u64)
        .map(|n| {
            let v = match expr.eval(n, &cfg.params) {
                Ok(x) => json!(x),
                Err(e) => json!({"error": e.to_string()}),
            };
            rows.push(vec![n.to_string(), match &v {
                Value::Number(x) => x.to_string(),
                other => other["error"].as_str().unwrap_or_default().to_string(),
            }]);
            v
        })
        .collect();
    let results = json!({
        "input": text,
        "canonical": expr.to_string(),
        "depends_on_level": expr.depends_on_level(),
        "values": values,
    });
    Ok(Report::new("parse", cfg.echo(), results).with_table(Table {
        columns: vec!["n", "value"],
        rows,
    }))
}
