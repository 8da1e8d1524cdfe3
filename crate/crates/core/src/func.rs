//! Complex-valued functions on tree vertices.
//!
//! Three representations, chosen so the named witnesses stay exact:
//!
//! * [`SparseFn`] — finitely supported, zero elsewhere. Closed under the
//!   derivative and `C_b` (the support grows by one level).
//! * [`RadialFn`] — a value per level plus a constant tail. Closed under the
//!   derivative and `C_b`.
//! * [`RuleFn`] — an arbitrary pure evaluator. Everything degrades to this.
//!
//! Operations that need children (the sparse derivative and `C_b`) take the
//! tree shape explicitly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Expr, ParamEnv};
use crate::tree::{TreeShape, Vertex};
use crate::weight::Weight;

pub type Scalar = Complex64;

const ZERO: Scalar = Complex64::new(0.0, 0.0);

type RuleEval = Arc<dyn Fn(&Vertex) -> Result<Scalar> + Send + Sync>;

/// Structural facts about a rule function that the norm code can use to
/// certify a truncated supremum.
#[derive(Clone, Debug, PartialEq)]
pub enum RuleTag {
    Opaque,
    /// `g(v) = (-1)^|v| / mu(v)`, so `mu |g| == 1` everywhere.
    AlternatingWitness(Weight),
    /// `g'` for the alternating witness of the same weight; `mu |g'|` equals
    /// `1 + mu(v)/mu(b(v))` off the root.
    AlternatingWitnessDerivative(Weight),
}

#[derive(Clone)]
pub struct RuleFn {
    eval: RuleEval,
    description: String,
    radial: bool,
    tag: RuleTag,
}

impl RuleFn {
    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    pub fn tag(&self) -> &RuleTag {
        &self.tag
    }
}

impl fmt::Debug for RuleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RuleFn")
            .field("description", &self.description)
            .field("radial", &self.radial)
            .field("tag", &self.tag)
            .finish_non_exhaustive()
    }
}

/// Finite support; absent vertices evaluate to zero. Never stores a zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseFn {
    entries: BTreeMap<Vertex, Scalar>,
}

impl SparseFn {
    pub fn from_entries<I: IntoIterator<Item = (Vertex, Scalar)>>(entries: I) -> Self {
        let mut out = SparseFn::default();
        for (v, value) in entries {
            out.insert(v, value);
        }
        out
    }

    /// Sets `f(v) = value`; a zero value removes the entry.
    pub fn insert(&mut self, v: Vertex, value: Scalar) {
        if value == ZERO {
            self.entries.remove(&v);
        } else {
            self.entries.insert(v, value);
        }
    }

    pub fn get(&self, v: &Vertex) -> Scalar {
        self.entries.get(v).copied().unwrap_or(ZERO)
    }

    /// Entries in shortlex order.
    pub fn entries(&self) -> impl Iterator<Item = (&Vertex, Scalar)> {
        self.entries.iter().map(|(v, x)| (v, *x))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.entries.keys().next_back().map(Vertex::depth)
    }

    /// Entries on level `n`, lexicographically.
    pub fn level_entries(&self, n: usize) -> impl Iterator<Item = (&Vertex, Scalar)> {
        let start = Vertex::leftmost(n);
        self.entries
            .range(start..)
            .take_while(move |(v, _)| v.depth() == n)
            .map(|(v, x)| (v, *x))
    }
}

/// `values[n]` on level `n`, `tail` beyond. Trailing values equal to the
/// tail are trimmed so equal functions compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialFn {
    values: Vec<Scalar>,
    tail: Scalar,
}

impl RadialFn {
    pub fn new(mut values: Vec<Scalar>, tail: Scalar) -> Self {
        while values.last() == Some(&tail) {
            values.pop();
        }
        RadialFn { values, tail }
    }

    pub fn at_level(&self, n: usize) -> Scalar {
        self.values.get(n).copied().unwrap_or(self.tail)
    }

    pub fn values(&self) -> &[Scalar] {
        &self.values
    }

    pub fn tail(&self) -> Scalar {
        self.tail
    }
}

type MapFn = dyn Fn(&Vertex) -> Result<Vertex> + Send + Sync;

/// A vertex self-map `phi` inducing the composition operator `C_phi`.
#[derive(Clone)]
pub struct VertexMap {
    name: String,
    map: Arc<MapFn>,
}

impl VertexMap {
    pub fn new<F>(name: &str, map: F) -> Self
    where
        F: Fn(&Vertex) -> Result<Vertex> + Send + Sync + 'static,
    {
        VertexMap {
            name: name.to_string(),
            map: Arc::new(map),
        }
    }

    pub fn identity() -> Self {
        Self::new("id", |v| Ok(v.clone()))
    }

    pub fn backward_shift() -> Self {
        Self::new("b", |v| Ok(v.parent()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, v: &Vertex) -> Result<Vertex> {
        (self.map)(v)
    }
}

impl fmt::Debug for VertexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VertexMap({})", self.name)
    }
}

#[derive(Clone, Debug)]
pub enum TreeFunction {
    Sparse(SparseFn),
    Radial(RadialFn),
    Rule(RuleFn),
}

impl TreeFunction {
    pub fn zero() -> Self {
        TreeFunction::Sparse(SparseFn::default())
    }

    pub fn sparse<I: IntoIterator<Item = (Vertex, Scalar)>>(entries: I) -> Self {
        TreeFunction::Sparse(SparseFn::from_entries(entries))
    }

    pub fn radial(values: Vec<Scalar>, tail: Scalar) -> Self {
        TreeFunction::Radial(RadialFn::new(values, tail))
    }

    /// `chi_w`.
    pub fn characteristic(w: Vertex) -> Self {
        Self::sparse([(w, Scalar::new(1.0, 0.0))])
    }

    pub fn constant(c: Scalar) -> Self {
        Self::radial(Vec::new(), c)
    }

    /// `-1` at the root, `1` on level 1, `0` elsewhere: `||f||_p = 1` and
    /// `||Df||_p = 2` on every Hardy space.
    pub fn hardy_witness() -> Self {
        Self::radial(vec![Scalar::new(-1.0, 0.0), Scalar::new(1.0, 0.0)], ZERO)
    }

    /// `g(v) = (-1)^|v| / mu(v)`. Non-positive weight values surface when evaluated.
    pub fn alternating_witness(weight: &Weight) -> Self {
        let mu = weight.clone();
        let eval: RuleEval = Arc::new(move |v: &Vertex| {
            let sign = if v.depth().is_multiple_of(2) { 1.0 } else { -1.0 };
            Ok(Scalar::new(sign / mu.at_level(v.depth())?, 0.0))
        });
        TreeFunction::Rule(RuleFn {
            eval,
            description: format!("alt-witness[{weight}]"),
            radial: true,
            tag: RuleTag::AlternatingWitness(weight.clone()),
        })
    }

    /// Radial real-valued function `v -> expr(|v|)`.
    pub fn radial_expr(expr: Expr, env: ParamEnv) -> Self {
        let description = format!("expr:{expr}");
        let eval: RuleEval = Arc::new(move |v: &Vertex| {
            Ok(Scalar::new(expr.eval(v.depth() as u64, &env)?, 0.0))
        });
        TreeFunction::Rule(RuleFn {
            eval,
            description,
            radial: true,
            tag: RuleTag::Opaque,
        })
    }

    /// Arbitrary rule. `radial` promises the value depends only on `|v|`.
    pub fn rule<F>(description: &str, radial: bool, eval: F) -> Self
    where
        F: Fn(&Vertex) -> Result<Scalar> + Send + Sync + 'static,
    {
        TreeFunction::Rule(RuleFn {
            eval: Arc::new(eval),
            description: description.to_string(),
            radial,
            tag: RuleTag::Opaque,
        })
    }

    pub fn evaluate(&self, v: &Vertex) -> Result<Scalar> {
        match self {
            TreeFunction::Sparse(f) => Ok(f.get(v)),
            TreeFunction::Radial(f) => Ok(f.at_level(v.depth())),
            TreeFunction::Rule(f) => (f.eval)(v),
        }
    }

    pub fn is_radial(&self) -> bool {
        match self {
            TreeFunction::Sparse(f) => f.entries.keys().all(Vertex::is_root),
            TreeFunction::Radial(_) => true,
            TreeFunction::Rule(f) => f.radial,
        }
    }

    /// `(d, c)` such that `f(v) = c` whenever `|v| >= d`, if the
    /// representation guarantees one.
    pub fn settled(&self) -> Option<(usize, Scalar)> {
        match self {
            TreeFunction::Sparse(f) => Some((f.max_depth().map_or(0, |d| d + 1), ZERO)),
            TreeFunction::Radial(f) => Some((f.values.len(), f.tail)),
            TreeFunction::Rule(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            TreeFunction::Sparse(f) => format!("sparse({} entries)", f.support_len()),
            TreeFunction::Radial(f) => {
                format!("radial({} levels, tail {})", f.values.len(), f.tail)
            }
            TreeFunction::Rule(f) => f.description.clone(),
        }
    }

    /// `f'(v) = f(v) - f(b(v))`, `f'(o) = 0`.
    pub fn derivative(&self, shape: &TreeShape) -> Result<TreeFunction> {
        match self {
            TreeFunction::Sparse(f) => {
                let mut candidates = BTreeSet::new();
                for (w, _) in f.entries() {
                    candidates.extend(shape.children(w)?);
                    if !w.is_root() {
                        candidates.insert(w.clone());
                    }
                }
                Ok(Self::sparse(
                    candidates
                        .into_iter()
                        .map(|v| {
                            let value = f.get(&v) - f.get(&v.parent());
                            (v, value)
                        })
                        .collect::<Vec<_>>(),
                ))
            }
            TreeFunction::Radial(f) => {
                let levels = f.values.len() + 1;
                let mut values = Vec::with_capacity(levels);
                values.push(ZERO);
                values.extend((1..levels).map(|n| f.at_level(n) - f.at_level(n - 1)));
                Ok(Self::radial(values, ZERO))
            }
            TreeFunction::Rule(f) => {
                let inner = f.eval.clone();
                let tag = match &f.tag {
                    RuleTag::AlternatingWitness(mu) => {
                        RuleTag::AlternatingWitnessDerivative(mu.clone())
                    }
                    _ => RuleTag::Opaque,
                };
                let eval: RuleEval = Arc::new(move |v: &Vertex| {
                    if v.is_root() {
                        Ok(ZERO)
                    } else {
                        Ok(inner(v)? - inner(&v.parent())?)
                    }
                });
                Ok(TreeFunction::Rule(RuleFn {
                    eval,
                    description: format!("D({})", f.description),
                    radial: f.radial,
                    tag,
                }))
            }
        }
    }

    /// `C_b f = f o b`.
    pub fn compose_backward(&self, shape: &TreeShape) -> Result<TreeFunction> {
        match self {
            TreeFunction::Sparse(f) => {
                let mut out = Vec::new();
                for (w, value) in f.entries() {
                    if w.is_root() {
                        out.push((w.clone(), value));
                    }
                    out.extend(shape.children(w)?.into_iter().map(|u| (u, value)));
                }
                Ok(Self::sparse(out))
            }
            TreeFunction::Radial(f) => {
                let levels = f.values.len() + 1;
                let values = (0..levels)
                    .map(|n| f.at_level(n.saturating_sub(1)))
                    .collect();
                Ok(Self::radial(values, f.tail))
            }
            TreeFunction::Rule(f) => {
                let inner = f.eval.clone();
                Ok(TreeFunction::Rule(RuleFn {
                    eval: Arc::new(move |v: &Vertex| inner(&v.parent())),
                    description: format!("Cb({})", f.description),
                    radial: f.radial,
                    tag: RuleTag::Opaque,
                }))
            }
        }
    }

    /// `C_phi f = f o phi`, always as a rule.
    pub fn compose(&self, phi: &VertexMap) -> TreeFunction {
        let inner = self.clone();
        let map = phi.clone();
        let description = format!("({}) o {}", self.describe(), phi.name());
        Self::rule(&description, false, move |v| inner.evaluate(&map.apply(v)?))
    }

    pub fn scale(&self, alpha: Scalar) -> TreeFunction {
        match self {
            TreeFunction::Sparse(f) => Self::sparse(
                f.entries()
                    .map(|(v, x)| (v.clone(), alpha * x))
                    .collect::<Vec<_>>(),
            ),
            TreeFunction::Radial(f) => Self::radial(
                f.values.iter().map(|x| alpha * x).collect(),
                alpha * f.tail,
            ),
            TreeFunction::Rule(f) => {
                let inner = f.eval.clone();
                TreeFunction::Rule(RuleFn {
                    eval: Arc::new(move |v: &Vertex| Ok(alpha * inner(v)?)),
                    description: format!("{alpha}*({})", f.description),
                    radial: f.radial,
                    tag: RuleTag::Opaque,
                })
            }
        }
    }
}

/// `alpha f + beta g`. Sparse+sparse stays sparse, radial+radial stays
/// radial, anything else becomes a rule.
pub fn linear_combine(
    alpha: Scalar,
    f: &TreeFunction,
    beta: Scalar,
    g: &TreeFunction,
) -> TreeFunction {
    if beta == ZERO {
        return f.scale(alpha);
    }
    if alpha == ZERO {
        return g.scale(beta);
    }
    match (f, g) {
        (TreeFunction::Sparse(a), TreeFunction::Sparse(b)) => {
            let keys: BTreeSet<&Vertex> = a.entries.keys().chain(b.entries.keys()).collect();
            TreeFunction::sparse(
                keys.into_iter()
                    .map(|v| (v.clone(), alpha * a.get(v) + beta * b.get(v)))
                    .collect::<Vec<_>>(),
            )
        }
        (TreeFunction::Radial(a), TreeFunction::Radial(b)) => {
            let levels = a.values.len().max(b.values.len());
            TreeFunction::radial(
                (0..levels)
                    .map(|n| alpha * a.at_level(n) + beta * b.at_level(n))
                    .collect(),
                alpha * a.tail + beta * b.tail,
            )
        }
        _ => {
            let (f2, g2) = (f.clone(), g.clone());
            let description = format!("{alpha}*({}) + {beta}*({})", f.describe(), g.describe());
            TreeFunction::rule(&description, f.is_radial() && g.is_radial(), move |v| {
                Ok(alpha * f2.evaluate(v)? + beta * g2.evaluate(v)?)
            })
        }
    }
}

/// Maps a rule failure that is not already typed onto an evaluation error.
pub fn evaluation_error(v: &Vertex, message: impl Into<String>) -> Error {
    Error::Evaluation {
        address: v.clone(),
        message: message.into(),
    }
}
