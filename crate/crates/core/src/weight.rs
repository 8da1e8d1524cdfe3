//! Radial weights `mu(v) = w(|v|)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Expr, ParamEnv};

#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// A DSL expression in the level variable `n`.
    Expr {
        text: String,
        expr: Expr,
        env: ParamEnv,
    },
    /// Values by level; the last entry repeats beyond the table.
    Table(Vec<f64>),
}

/// What is known about `sup mu` over the whole tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Unknown,
}

impl Weight {
    /// `mu == 1`.
    pub fn unit() -> Self {
        Weight::Table(vec![1.0])
    }

    /// `mu_M(v) = (M-1)^|v|`, for which `||D|| = M`.
    pub fn geometric(m: f64) -> Self {
        Self::expr("pow(M-1,n)", ParamEnv::new().with("M", m)).expect("static expression")
    }

    /// `mu(v) = |v|` on odd levels and `1` on even levels; `D` is unbounded.
    pub fn odd_even() -> Self {
        Self::expr("ifodd(n,1)", ParamEnv::new()).expect("static expression")
    }

    pub fn expr(text: &str, env: ParamEnv) -> Result<Self> {
        Ok(Weight::Expr {
            text: text.to_string(),
            expr: Expr::parse(text)?,
            env,
        })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("weight table must be non-empty".into()));
        }
        if let Some(level) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::WeightDomain {
                level,
                value: values[level],
            });
        }
        Ok(Weight::Table(values))
    }

    /// Parses `expr:<dsl>` or `table:1,2,1`.
    pub fn parse(text: &str, env: &ParamEnv) -> Result<Self> {
        let text = text.trim();
        if let Some(body) = text.strip_prefix("expr:") {
            Self::expr(body, env.clone())
        } else if let Some(body) = text.strip_prefix("table:") {
            let values = body
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad weight table `{text}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            Self::table(values)
        } else {
            Err(Error::InvalidArgument(format!(
                "weight must be `expr:<text>` or `table:<values>`, got `{text}`"
            )))
        }
    }

    /// `mu` on level `n`, checked to be finite and strictly positive.
    pub fn at_level(&self, n: usize) -> Result<f64> {
        let value = match self {
            Weight::Expr { expr, env, .. } => expr.eval(n as u64, env)?,
            Weight::Table(values) => values[n.min(values.len() - 1)],
        };
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(Error::WeightDomain { level: n, value })
        }
    }

    /// `mu(v) / mu(b(v))` for a vertex on level `n >= 1`.
    pub fn ratio_at(&self, n: usize) -> Result<f64> {
        debug_assert!(n >= 1);
        Ok(self.at_level(n)? / self.at_level(n - 1)?)
    }

    /// `(coef, base)` when `mu(n) = coef * base^n` for every level.
    pub fn geometric_form(&self) -> Option<(f64, f64)> {
        match self {
            Weight::Expr { expr, env, .. } => expr
                .geometric_form(env)
                .filter(|&(c, b)| c > 0.0 && b > 0.0),
            Weight::Table(values) => (values.len() == 1).then(|| (values[0], 1.0)),
        }
    }

    /// `sup_{v in T*} mu(v)/mu(b(v))` when it is known in closed form.
    pub fn exact_ratio_sup(&self) -> Option<f64> {
        match self {
            Weight::Table(values) => {
                // Beyond the table the weight is constant, so the ratio is 1 there.
                let explicit = values.windows(2).map(|w| w[1] / w[0]);
                Some(explicit.fold(1.0, f64::max))
            }
            Weight::Expr { .. } => self.geometric_form().map(|(_, base)| base),
        }
    }

    pub fn boundedness(&self) -> Boundedness {
        match self {
            Weight::Table(_) => Boundedness::Bounded,
            Weight::Expr { .. } => match self.geometric_form() {
                Some((_, base)) if base <= 1.0 => Boundedness::Bounded,
                Some(_) => Boundedness::Unbounded,
                None => Boundedness::Unknown,
            },
        }
    }

    /// Heuristic verdict from levels `0..=depth`: bounded when the second half
    /// of the levels does not exceed the maximum of the first half by more
    /// than a relative `1e-9`.
    pub fn estimate_bounded(&self, depth: usize) -> Result<bool> {
        let split = depth / 2;
        let mut early: f64 = 0.0;
        let mut late: f64 = 0.0;
        for n in 0..=depth {
            let value = self.at_level(n)?;
            if n <= split {
                early = early.max(value);
            } else {
                late = late.max(value);
            }
        }
        Ok(late <= early * (1.0 + 1e-9))
    }

    /// Depth beyond which the weight is constant, when there is one.
    pub fn settled_level(&self) -> Option<usize> {
        match self {
            Weight::Table(values) => Some(values.len() - 1),
            Weight::Expr { .. } => match self.geometric_form() {
                Some((_, 1.0)) => Some(0),
                _ => None,
            },
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Expr { text, .. } => write!(f, "expr:{text}"),
            Weight::Table(values) => {
                let parts: Vec<String> = values.iter().map(f64::to_string).collect();
                write!(f, "table:{}", parts.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_weight_levels_and_ratio() {
        let mu = Weight::geometric(3.0);
        assert_eq!(mu.at_level(0).unwrap(), 1.0);
        assert_eq!(mu.at_level(2).unwrap(), 4.0);
        for n in 1..10 {
            assert_eq!(mu.ratio_at(n).unwrap(), 2.0);
        }
        assert_eq!(mu.exact_ratio_sup(), Some(2.0));
        assert_eq!(mu.boundedness(), Boundedness::Unbounded);
        assert_eq!(Weight::geometric(1.5).boundedness(), Boundedness::Bounded);
        assert_eq!(Weight::geometric(1.5).exact_ratio_sup(), Some(0.5));
    }

    #[test]
    fn odd_even_weight() {
        let mu = Weight::odd_even();
        let levels: Vec<f64> = (0..6).map(|n| mu.at_level(n).unwrap()).collect();
        assert_eq!(levels, vec![1.0, 1.0, 1.0, 3.0, 1.0, 5.0]);
        assert_eq!(mu.exact_ratio_sup(), None);
        assert_eq!(mu.boundedness(), Boundedness::Unknown);
        assert!(!mu.estimate_bounded(20).unwrap());
    }

    #[test]
    fn table_weight_extends_last_entry() {
        let mu = Weight::parse("table:1,2,1", &ParamEnv::new()).unwrap();
        assert_eq!(mu.at_level(1).unwrap(), 2.0);
        assert_eq!(mu.at_level(9).unwrap(), 1.0);
        assert_eq!(mu.exact_ratio_sup(), Some(2.0));
        assert_eq!(mu.settled_level(), Some(2));
        assert_eq!(mu.to_string(), "table:1,2,1");
        assert_eq!(Weight::unit().exact_ratio_sup(), Some(1.0));
    }

    #[test]
    fn positivity_is_checked_where_used() {
        let mu = Weight::parse("expr:2-n", &ParamEnv::new()).unwrap();
        assert_eq!(mu.at_level(1).unwrap(), 1.0);
        assert_eq!(mu.at_level(2).unwrap_err(), Error::WeightDomain { level: 2, value: 0.0 });
        assert!(Weight::parse("table:1,0", &ParamEnv::new()).is_err());
        assert!(Weight::parse("1,2", &ParamEnv::new()).is_err());
    }

    #[test]
    fn unbound_parameter_surfaces_at_evaluation() {
        let mu = Weight::parse("expr:pow(M-1,n)", &ParamEnv::new()).unwrap();
        assert!(matches!(mu.at_level(0), Err(Error::Eval(_))));
    }

    #[test]
    fn linear_weight_is_estimated_unbounded() {
        let mu = Weight::parse("expr:n+1", &ParamEnv::new()).unwrap();
        assert!(!mu.estimate_bounded(64).unwrap());
        let saturating = Weight::parse("expr:2-0.5^n", &ParamEnv::new()).unwrap();
        assert!(saturating.estimate_bounded(80).unwrap());
    }
}
