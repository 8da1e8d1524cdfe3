//! Function file schema and named function specs.
//!
//! ```json
//! {"kind":"sparse","entries":[{"v":[0,1],"re":1,"im":0}]}
//! {"kind":"radial","values":[[-1,0],[1,0]],"tail":[0,0]}
//! {"kind":"expr","text":"pow(2,n)","params":{"M":3}}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, ParamEnv};
use crate::func::{Scalar, TreeFunction};
use crate::tree::Vertex;
use crate::weight::Weight;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub v: Vertex,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FunctionFile {
    Sparse {
        entries: Vec<SparseEntry>,
    },
    Radial {
        values: Vec<[f64; 2]>,
        tail: [f64; 2],
    },
    Expr {
        text: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

fn finite(re: f64, im: f64) -> Result<Scalar> {
    if re.is_finite() && im.is_finite() {
        Ok(Scalar::new(re, im))
    } else {
        Err(Error::InvalidArgument("function values must be finite".into()))
    }
}

impl FunctionFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad function file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("function file serialises")
    }

    /// Parameters in the file override `env`.
    pub fn into_function(self, env: &ParamEnv) -> Result<TreeFunction> {
        match self {
            FunctionFile::Sparse { entries } => {
                let values = entries
                    .into_iter()
                    .map(|e| Ok((e.v, finite(e.re, e.im)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TreeFunction::sparse(values))
            }
            FunctionFile::Radial { values, tail } => {
                let values = values
                    .into_iter()
                    .map(|[re, im]| finite(re, im))
                    .collect::<Result<Vec<_>>>()?;
                Ok(TreeFunction::radial(values, finite(tail[0], tail[1])?))
            }
            FunctionFile::Expr { text, params } => {
                let mut env = env.clone();
                for (k, v) in params {
                    env.insert(&k, v);
                }
                Ok(TreeFunction::radial_expr(Expr::parse(&text)?, env))
            }
        }
    }

    /// Sparse and radial functions only; rules have no file form.
    pub fn from_function(f: &TreeFunction) -> Option<Self> {
        match f {
            TreeFunction::Sparse(s) => Some(FunctionFile::Sparse {
                entries: s
                    .entries()
                    .map(|(v, x)| SparseEntry {
                        v: v.clone(),
                        re: x.re,
                        im: x.im,
                    })
                    .collect(),
            }),
            TreeFunction::Radial(r) => Some(FunctionFile::Radial {
                values: r.values().iter().map(|x| [x.re, x.im]).collect(),
                tail: [r.tail().re, r.tail().im],
            }),
            TreeFunction::Rule(_) => None,
        }
    }
}

/// Parses `re` or `re,im`.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let bad = || Error::InvalidArgument(format!("bad complex literal `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [re] => finite(num(re)?, 0.0),
        [re, im] => finite(num(re)?, num(im)?),
        _ => Err(bad()),
    }
}

/// Built-in function names: `chi:<address>`, `hardy-witness`, `alt-witness`
/// (needs a weight), `const:<re>[,<im>]`, `zero`, `expr:<dsl>`.
/// Returns `Ok(None)` for anything else so callers can fall back to files.
pub fn parse_named_function(
    text: &str,
    weight: Option<&Weight>,
    env: &ParamEnv,
) -> Result<Option<TreeFunction>> {
    let text = text.trim();
    let f = if let Some(addr) = text.strip_prefix("chi:") {
        TreeFunction::characteristic(addr.parse()?)
    } else if let Some(c) = text.strip_prefix("const:") {
        TreeFunction::constant(parse_scalar(c)?)
    } else if let Some(body) = text.strip_prefix("expr:") {
        TreeFunction::radial_expr(Expr::parse(body)?, env.clone())
    } else {
        match text {
            "hardy-witness" => TreeFunction::hardy_witness(),
            "zero" => TreeFunction::zero(),
            "alt-witness" => {
                let weight = weight.ok_or_else(|| {
                    Error::InvalidArgument("alt-witness needs a weighted space or --weight".into())
                })?;
                TreeFunction::alternating_witness(weight)
            }
            _ => return Ok(None),
        }
    };
    Ok(Some(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_examples() {
        let env = ParamEnv::new();
        let sparse = FunctionFile::from_json(r#"{"kind":"sparse","entries":[{"v":[0,1],"re":1,"im":0}]}"#)
            .unwrap()
            .into_function(&env)
            .unwrap();
        assert_eq!(sparse.evaluate(&Vertex::new(vec![0, 1])).unwrap(), Scalar::new(1.0, 0.0));

        let radial = FunctionFile::from_json(r#"{"kind":"radial","values":[[-1,0],[1,0]],"tail":[0,0]}"#)
            .unwrap()
            .into_function(&env)
            .unwrap();
        assert_eq!(radial.evaluate(&Vertex::root()).unwrap(), Scalar::new(-1.0, 0.0));

        let expr = FunctionFile::from_json(r#"{"kind":"expr","text":"pow(M-1,n)","params":{"M":3}}"#)
            .unwrap()
            .into_function(&env)
            .unwrap();
        assert_eq!(expr.evaluate(&Vertex::new(vec![0, 0, 0])).unwrap(), Scalar::new(8.0, 0.0));
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(FunctionFile::from_json(r#"{"kind":"dense"}"#).is_err());
        assert!(FunctionFile::from_json(r#"{"kind":"sparse","entries":[{"v":[0],"im":1}]}"#).is_err());
    }

    #[test]
    fn named_functions() {
        let env = ParamEnv::new();
        let chi = parse_named_function("chi:[0,1]", None, &env).unwrap().unwrap();
        assert_eq!(chi.evaluate(&Vertex::new(vec![0, 1])).unwrap(), Scalar::new(1.0, 0.0));
        let c = parse_named_function("const:2,-1", None, &env).unwrap().unwrap();
        assert_eq!(c.evaluate(&Vertex::new(vec![3])).unwrap(), Scalar::new(2.0, -1.0));
        assert!(parse_named_function("alt-witness", None, &env).is_err());
        assert!(parse_named_function("alt-witness", Some(&Weight::unit()), &env).unwrap().is_some());
        assert!(parse_named_function("some/file.json", None, &env).unwrap().is_none());
    }

    #[test]
    fn scalar_literals() {
        assert_eq!(parse_scalar("1,0").unwrap(), Scalar::new(1.0, 0.0));
        assert_eq!(parse_scalar("0.5").unwrap(), Scalar::new(0.5, 0.0));
        assert!(parse_scalar("1,2,3").is_err());
        assert!(parse_scalar("nan").is_err());
    }

    proptest! {
        #[test]
        fn file_round_trip(
            entries in proptest::collection::vec(
                (proptest::collection::vec(0u32..3, 0..4), -1e3f64..1e3, -1e3f64..1e3),
                0..8,
            ),
            values in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..5),
        ) {
            let env = ParamEnv::new();
            let sparse = TreeFunction::sparse(
                entries.into_iter().map(|(a, re, im)| (Vertex::new(a), Scalar::new(re, im))),
            );
            let radial = TreeFunction::radial(
                values.into_iter().map(|(re, im)| Scalar::new(re, im)).collect(),
                Scalar::new(0.0, 0.0),
            );
            for f in [sparse, radial] {
                let file = FunctionFile::from_function(&f).unwrap();
                let back = FunctionFile::from_json(&file.to_json()).unwrap();
                prop_assert_eq!(&back, &file);
                let g = back.into_function(&env).unwrap();
                prop_assert_eq!(FunctionFile::from_function(&g).unwrap(), file);
            }
        }
    }
}
