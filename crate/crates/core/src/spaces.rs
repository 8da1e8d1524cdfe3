//! Truncated norms on the Lipschitz space, weighted `L^inf_mu` spaces and
//! Hardy spaces `T_p` of a homogeneous tree.
//!
//! Every norm is a supremum over the infinite tree. The functions here take
//! the supremum over the closed ball `B(o, N)` and record the running value
//! per depth. Those partials are lower bounds of the true norm; the report's
//! `attained_exactly` flag is set only when the representation of the
//! function proves nothing beyond depth `N` can raise the value.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ParamEnv;
use crate::func::{RuleTag, Scalar, TreeFunction};
use crate::summation::PairwiseSum;
use crate::tree::{TreeShape, Vertex};
use crate::weight::{Boundedness, Weight};
use crate::TOLERANCE;

/// Where the last partial supremum was first attained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Vertex(Vertex),
    Level(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    /// `(depth, partial supremum)`, nondecreasing in both coordinates.
    pub partials: Vec<(usize, f64)>,
    /// Lexicographically least maximiser at the smallest depth.
    pub witness: Witness,
    #[serde(rename = "attained")]
    pub attained_exactly: bool,
}

impl NormReport {
    pub fn value(&self) -> f64 {
        self.partials.last().map_or(0.0, |&(_, v)| v)
    }

    pub fn depth(&self) -> usize {
        self.partials.last().map_or(0, |&(d, _)| d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyParams {
    q: u32,
    p: f64,
}

impl HardyParams {
    pub fn new(q: u32, p: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("Hardy spaces need q >= 1".into()));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Hardy exponent must satisfy 1 <= p < inf, got {p}"
            )));
        }
        Ok(HardyParams { q, p })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn shape(&self) -> TreeShape {
        TreeShape::homogeneous(self.q).expect("q >= 1")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Lipschitz,
    Weighted(Weight),
    Hardy(HardyParams),
}

impl Space {
    /// `lipschitz`, `weighted:<expr:..|table:..>`, `hardy:q=<q>,p=<p>`.
    /// `p=inf` is the bounded functions with the sup norm, i.e. `mu == 1`.
    pub fn parse(text: &str, env: &ParamEnv) -> Result<Self> {
        let text = text.trim();
        if text == "lipschitz" {
            return Ok(Space::Lipschitz);
        }
        if let Some(weight) = text.strip_prefix("weighted:") {
            return Ok(Space::Weighted(Weight::parse(weight, env)?));
        }
        if let Some(body) = text.strip_prefix("hardy:") {
            let bad = || Error::InvalidArgument(format!("bad Hardy descriptor `{text}`"));
            let mut q = None;
            let mut p = None;
            for part in body.split(',') {
                let (key, value) = part.split_once('=').ok_or_else(bad)?;
                match key.trim() {
                    "q" => q = Some(value.trim().parse::<u32>().map_err(|_| bad())?),
                    "p" if value.trim() == "inf" => p = Some(f64::INFINITY),
                    "p" => p = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
                    _ => return Err(bad()),
                }
            }
            let (q, p) = (q.ok_or_else(bad)?, p.ok_or_else(bad)?);
            if p.is_infinite() {
                HardyParams::new(q, 1.0)?;
                return Ok(Space::Weighted(Weight::unit()));
            }
            return Ok(Space::Hardy(HardyParams::new(q, p)?));
        }
        Err(Error::InvalidArgument(format!("unknown space `{text}`")))
    }

    /// Hardy spaces only live on the matching homogeneous tree.
    pub fn check_shape(&self, shape: &TreeShape) -> Result<()> {
        match self {
            Space::Hardy(params) if shape.homogeneous_degree() != Some(params.q) => {
                Err(Error::InvalidArgument(format!(
                    "hardy space with q={} needs shape homogeneous:{}, got {shape}",
                    params.q, params.q
                )))
            }
            _ => Ok(()),
        }
    }

    /// Whether the constant functions belong to the space, and whether that
    /// answer is proved (`true`) or estimated from levels `0..=depth`.
    pub fn contains_constants(&self, depth: usize) -> Result<(bool, bool)> {
        match self {
            Space::Lipschitz | Space::Hardy(_) => Ok((true, true)),
            Space::Weighted(weight) => match weight.boundedness() {
                Boundedness::Bounded => Ok((true, true)),
                Boundedness::Unbounded => Ok((false, true)),
                Boundedness::Unknown => Ok((weight.estimate_bounded(depth)?, false)),
            },
        }
    }

    pub fn partial_norm(&self, f: &TreeFunction, shape: &TreeShape, depth: usize) -> Result<NormReport> {
        self.check_shape(shape)?;
        match self {
            Space::Lipschitz => lipschitz_partial_norm(f, shape, depth),
            Space::Weighted(weight) => weighted_partial_norm(f, weight, shape, depth),
            Space::Hardy(params) => hardy_partial_norm(f, params, depth),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Lipschitz => f.write_str("lipschitz"),
            Space::Weighted(weight) => write!(f, "weighted:{weight}"),
            Space::Hardy(params) => write!(f, "hardy:q={},p={}", params.q, params.p),
        }
    }
}

/// Largest `modulus(f(v))` over level `n` with the lexicographically least
/// maximiser. `modulus` must vanish at zero and be positive elsewhere.
fn level_max(
    f: &TreeFunction,
    shape: &TreeShape,
    n: usize,
    modulus: impl Fn(Scalar) -> f64,
) -> Result<(f64, Vertex)> {
    match f {
        TreeFunction::Sparse(s) => {
            let mut best: Option<(f64, &Vertex)> = None;
            for (v, x) in s.level_entries(n) {
                let m = modulus(x);
                if best.is_none_or(|(b, _)| m > b) {
                    best = Some((m, v));
                }
            }
            Ok(best.map_or_else(|| (0.0, Vertex::leftmost(n)), |(m, v)| (m, v.clone())))
        }
        _ if f.is_radial() => {
            let v = Vertex::leftmost(n);
            Ok((modulus(f.evaluate(&v)?), v))
        }
        _ => {
            shape.level_size(n)?;
            let mut best: Option<(f64, Vertex)> = None;
            for v in shape.level(n) {
                let m = modulus(f.evaluate(&v)?);
                if best.as_ref().is_none_or(|(b, _)| m > *b) {
                    best = Some((m, v));
                }
            }
            Ok(best.expect("levels are non-empty"))
        }
    }
}

#[derive(Default)]
struct Running {
    best: Option<(f64, Witness)>,
    partials: Vec<(usize, f64)>,
}

impl Running {
    fn offer(&mut self, value: f64, witness: Witness) {
        if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
            self.best = Some((value, witness));
        }
    }

    fn best(&self) -> f64 {
        self.best.as_ref().map_or(0.0, |(b, _)| *b)
    }

    fn record(&mut self, depth: usize, value: f64) {
        self.partials.push((depth, value));
    }

    fn finish(self, attained_exactly: bool) -> NormReport {
        NormReport {
            partials: self.partials,
            witness: self.best.map_or(Witness::Level(0), |(_, w)| w),
            attained_exactly,
        }
    }
}

/// True when the supremum over all levels of a sequence that equals `|c|`
/// from level `settle` on is already covered by levels `first..=depth`.
fn settled_within(settled: Option<(usize, Scalar)>, depth: usize) -> bool {
    match settled {
        Some((d, c)) => depth >= d || (c == Scalar::new(0.0, 0.0) && depth + 1 >= d),
        None => false,
    }
}

pub(crate) struct LipschitzParts {
    pub root: f64,
    pub derivative_sup: f64,
    pub report: NormReport,
}

pub(crate) fn lipschitz_parts(f: &TreeFunction, shape: &TreeShape, depth: usize) -> Result<LipschitzParts> {
    if depth == 0 {
        return Err(Error::InvalidArgument("Lipschitz norm needs depth >= 1".into()));
    }
    let root = f.evaluate(&Vertex::root())?.norm();
    let derivative = f.derivative(shape)?;
    let mut running = Running::default();
    for n in 1..=depth {
        let (m, v) = level_max(&derivative, shape, n, |x| x.norm())?;
        running.offer(m, Witness::Vertex(v));
        let partial = root + running.best();
        running.record(n, partial);
    }
    let derivative_sup = running.best();
    let attained = settled_within(derivative.settled(), depth);
    Ok(LipschitzParts {
        root,
        derivative_sup,
        report: running.finish(attained),
    })
}

/// `|f(o)| + max_{1 <= |v| <= N} |f'(v)|`.
pub fn lipschitz_partial_norm(f: &TreeFunction, shape: &TreeShape, depth: usize) -> Result<NormReport> {
    Ok(lipschitz_parts(f, shape, depth)?.report)
}

/// `max_{|v| <= N} mu(v) |f(v)|`.
pub fn weighted_partial_norm(
    f: &TreeFunction,
    weight: &Weight,
    shape: &TreeShape,
    depth: usize,
) -> Result<NormReport> {
    let mut running = Running::default();
    for n in 0..=depth {
        let mu = weight.at_level(n)?;
        let (m, v) = level_max(f, shape, n, |x| x.norm())?;
        running.offer(mu * m, Witness::Vertex(v));
        let partial = running.best();
        running.record(n, partial);
    }
    let attained = weighted_attained(f, weight, depth, running.best());
    Ok(running.finish(attained))
}

fn weighted_attained(f: &TreeFunction, weight: &Weight, depth: usize, partial: f64) -> bool {
    if let Some((d, c)) = f.settled() {
        if c == Scalar::new(0.0, 0.0) {
            return depth + 1 >= d;
        }
        // Nonzero tail: the weight beyond the truncation matters.
        return match weight.settled_level() {
            Some(l) => depth >= d.max(l),
            None => matches!(weight.geometric_form(), Some((_, base)) if base <= 1.0) && depth >= d,
        };
    }
    match f {
        TreeFunction::Rule(rule) => match rule.tag() {
            RuleTag::AlternatingWitness(mu) => mu == weight,
            RuleTag::AlternatingWitnessDerivative(mu) if mu == weight && depth >= 1 => {
                // mu |g'| = 1 + mu(v)/mu(b(v)) off the root.
                weight
                    .exact_ratio_sup()
                    .is_some_and(|r| partial >= 1.0 + r - TOLERANCE * (1.0 + r))
            }
            _ => false,
        },
        _ => false,
    }
}

/// `M_p(n, f)`. Radial functions use one representative per level;
/// everything else is summed over the whole level in lexicographic order
/// with pairwise reduction.
pub fn hardy_level_mean(f: &TreeFunction, params: &HardyParams, n: usize) -> Result<f64> {
    if n == 0 || f.is_radial() {
        return Ok(f.evaluate(&Vertex::leftmost(n))?.norm());
    }
    hardy_level_mean_enumerated(f, params, n)
}

/// `M_p(n, f)` by full enumeration of level `n`, no shortcuts.
pub fn hardy_level_mean_enumerated(f: &TreeFunction, params: &HardyParams, n: usize) -> Result<f64> {
    let shape = params.shape();
    if n == 0 {
        return Ok(f.evaluate(&Vertex::root())?.norm());
    }
    let size = shape.level_size(n)?;
    let mut sum = PairwiseSum::new();
    for v in shape.level(n) {
        sum.add(f.evaluate(&v)?.norm().powf(params.p));
    }
    let mean = sum.total() / size as f64;
    Ok(if params.p == 1.0 { mean } else { mean.powf(1.0 / params.p) })
}

/// `max_{n <= N} M_p(n, f)`; the witness is the smallest maximising level.
pub fn hardy_partial_norm(f: &TreeFunction, params: &HardyParams, depth: usize) -> Result<NormReport> {
    let mut running = Running::default();
    for n in 0..=depth {
        running.offer(hardy_level_mean(f, params, n)?, Witness::Level(n));
        let partial = running.best();
        running.record(n, partial);
    }
    let attained = settled_within(f.settled(), depth);
    Ok(running.finish(attained))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointEvalCheck {
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub holds: bool,
    /// False when the bound fails but the norm was only a partial supremum,
    /// so the failure is not a refutation.
    pub conclusive: bool,
}

/// Checks the point-evaluation bound of `space` at `v`:
///
/// * Lipschitz: `|f(v)| <= |f(o)| + |v| sup |f'|`
/// * weighted: `|f(v)| <= ||f||_mu / mu(v)`
/// * Hardy: `|f(v)| <= c_|v|^(1/p) ||f||_p` with `c_n` the level size
pub fn point_eval_bound_check(
    space: &Space,
    f: &TreeFunction,
    shape: &TreeShape,
    v: &Vertex,
    depth: usize,
) -> Result<PointEvalCheck> {
    space.check_shape(shape)?;
    shape.validate(v)?;
    if v.depth() > depth {
        return Err(Error::InvalidArgument(format!(
            "vertex {v} lies beyond truncation depth {depth}"
        )));
    }
    let value = f.evaluate(v)?.norm();
    let (bound, attained) = match space {
        Space::Lipschitz => {
            let parts = lipschitz_parts(f, shape, depth.max(1))?;
            (
                parts.root + v.depth() as f64 * parts.derivative_sup,
                parts.report.attained_exactly,
            )
        }
        Space::Weighted(weight) => {
            let report = weighted_partial_norm(f, weight, shape, depth)?;
            (report.value() / weight.at_level(v.depth())?, report.attained_exactly)
        }
        Space::Hardy(params) => {
            let report = hardy_partial_norm(f, params, depth)?;
            let c = shape.level_size(v.depth())? as f64;
            (c.powf(1.0 / params.p) * report.value(), report.attained_exactly)
        }
    };
    let slack = bound - value;
    let holds = slack >= -TOLERANCE;
    Ok(PointEvalCheck {
        value,
        bound,
        slack,
        holds,
        conclusive: holds || attained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::linear_combine;
    use proptest::prelude::*;

    fn v(indices: &[u32]) -> Vertex {
        Vertex::new(indices.to_vec())
    }

    fn re(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOLERANCE
    }

    #[test]
    fn lipschitz_characteristic_norms() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        let root = lipschitz_partial_norm(&TreeFunction::characteristic(Vertex::root()), &h2, 3).unwrap();
        assert_eq!(root.value(), 2.0);
        assert!(root.attained_exactly);
        assert_eq!(root.witness, Witness::Vertex(v(&[0])));

        let deep = lipschitz_partial_norm(&TreeFunction::characteristic(v(&[1, 1])), &h2, 4).unwrap();
        assert_eq!(deep.value(), 1.0);
        assert!(deep.attained_exactly);
        assert_eq!(deep.witness, Witness::Vertex(v(&[1, 1])));
        assert_eq!(deep.partials, vec![(1, 0.0), (2, 1.0), (3, 1.0), (4, 1.0)]);

        let c = lipschitz_partial_norm(&TreeFunction::constant(re(7.0)), &h2, 5).unwrap();
        assert_eq!(c.value(), 7.0);
        assert!(c.attained_exactly);
    }

    #[test]
    fn lipschitz_attainment_needs_children_level() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        // chi_w with |w| = 2 has derivative -1 on level 3.
        let f = TreeFunction::characteristic(v(&[0, 1]));
        assert!(!lipschitz_partial_norm(&f, &h2, 2).unwrap().attained_exactly);
        assert!(lipschitz_partial_norm(&f, &h2, 3).unwrap().attained_exactly);
        assert!(lipschitz_partial_norm(&TreeFunction::zero(), &h2, 1).unwrap().attained_exactly);
        assert!(lipschitz_partial_norm(&f, &h2, 0).is_err());
    }

    #[test]
    fn weighted_norm_examples() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        for weight in [Weight::unit(), Weight::geometric(3.0), Weight::geometric(1.5), Weight::odd_even()] {
            let g = TreeFunction::alternating_witness(&weight);
            let report = weighted_partial_norm(&g, &weight, &h2, 5).unwrap();
            assert!(close(report.value(), 1.0), "{weight}");
            assert!(report.attained_exactly);
        }
        let chi = TreeFunction::characteristic(v(&[2, 1]));
        let report = weighted_partial_norm(&chi, &Weight::unit(), &h2, 3).unwrap();
        assert_eq!(report.value(), 1.0);
        assert!(report.attained_exactly);

        let table = Weight::table(vec![1.0, 2.0, 1.0]).unwrap();
        let report = weighted_partial_norm(&TreeFunction::constant(re(1.0)), &table, &h2, 3).unwrap();
        assert_eq!(report.value(), 2.0);
        assert!(report.attained_exactly);
        assert_eq!(report.witness, Witness::Vertex(v(&[0])));
    }

    #[test]
    fn weighted_constant_with_growing_weight_is_not_certified() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        let report =
            weighted_partial_norm(&TreeFunction::constant(re(1.0)), &Weight::geometric(3.0), &h2, 4).unwrap();
        assert_eq!(report.value(), 16.0);
        assert!(!report.attained_exactly);
        let decaying =
            weighted_partial_norm(&TreeFunction::constant(re(1.0)), &Weight::geometric(1.5), &h2, 4).unwrap();
        assert_eq!(decaying.value(), 1.0);
        assert!(decaying.attained_exactly);
    }

    #[test]
    fn alternating_derivative_certified_only_for_closed_form_ratio() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        let mu = Weight::geometric(3.0);
        let dg = TreeFunction::alternating_witness(&mu).derivative(&h2).unwrap();
        let report = weighted_partial_norm(&dg, &mu, &h2, 5).unwrap();
        assert!(close(report.value(), 3.0));
        assert!(report.attained_exactly);

        let odd = Weight::odd_even();
        let dg = TreeFunction::alternating_witness(&odd).derivative(&h2).unwrap();
        assert!(!weighted_partial_norm(&dg, &odd, &h2, 5).unwrap().attained_exactly);
    }

    #[test]
    fn weighted_rejects_nonpositive_weight() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        let bad = Weight::expr("2-n", ParamEnv::new()).unwrap();
        let err = weighted_partial_norm(&TreeFunction::zero(), &bad, &h2, 3).unwrap_err();
        assert_eq!(err, Error::WeightDomain { level: 2, value: 0.0 });
    }

    #[test]
    fn hardy_level_means_of_witness() {
        let p2 = HardyParams::new(2, 2.0).unwrap();
        let f = TreeFunction::hardy_witness();
        assert_eq!(hardy_level_mean(&f, &p2, 1).unwrap(), 1.0);
        let df = f.derivative(&p2.shape()).unwrap();
        assert_eq!(hardy_level_mean(&df, &p2, 1).unwrap(), 2.0);

        let p1 = HardyParams::new(2, 1.0).unwrap();
        let report = hardy_partial_norm(&f, &p1, 4).unwrap();
        assert_eq!(report.value(), 1.0);
        assert_eq!(report.witness, Witness::Level(0));
        assert!(report.attained_exactly);

        let p = HardyParams::new(3, 2.0).unwrap();
        let report = hardy_partial_norm(&f.derivative(&p.shape()).unwrap(), &p, 4).unwrap();
        assert_eq!(report.value(), 2.0);
        assert_eq!(report.witness, Witness::Level(1));

        assert_eq!(hardy_partial_norm(&TreeFunction::zero(), &p, 3).unwrap().value(), 0.0);
    }

    #[test]
    fn hardy_constant_norm() {
        let c = Scalar::new(3.0, -4.0);
        for q in 1..=3 {
            for p in [1.0, 2.0, 2.5] {
                let params = HardyParams::new(q, p).unwrap();
                for n in 0..5 {
                    assert_eq!(hardy_level_mean(&TreeFunction::constant(c), &params, n).unwrap(), 5.0);
                }
            }
        }
    }

    #[test]
    fn hardy_characteristic_level_mean_by_enumeration() {
        let params = HardyParams::new(2, 1.0).unwrap();
        let chi = TreeFunction::characteristic(v(&[1, 0]));
        let m = hardy_level_mean(&chi, &params, 2).unwrap();
        assert!(close(m, 1.0 / 6.0));
    }

    #[test]
    fn hardy_params_validation() {
        assert!(HardyParams::new(0, 2.0).is_err());
        assert!(HardyParams::new(2, 0.5).is_err());
        assert!(HardyParams::new(2, f64::INFINITY).is_err());
        assert!(HardyParams::new(2, f64::NAN).is_err());
    }

    #[test]
    fn space_descriptors() {
        let env = ParamEnv::new().with("M", 3.0);
        assert_eq!(Space::parse("lipschitz", &env).unwrap(), Space::Lipschitz);
        let w = Space::parse("weighted:expr:pow(M-1,n)", &env).unwrap();
        assert_eq!(w, Space::Weighted(Weight::geometric(3.0)));
        assert_eq!(w.to_string(), "weighted:expr:pow(M-1,n)");
        let h = Space::parse("hardy:q=2,p=2", &env).unwrap();
        assert_eq!(h, Space::Hardy(HardyParams::new(2, 2.0).unwrap()));
        assert_eq!(h.to_string(), "hardy:q=2,p=2");
        assert_eq!(Space::parse("hardy:q=2,p=inf", &env).unwrap(), Space::Weighted(Weight::unit()));
        assert!(Space::parse("hardy:q=2", &env).is_err());
        assert!(Space::parse("bergman", &env).is_err());
        assert!(h.check_shape(&TreeShape::homogeneous(3).unwrap()).is_err());
        assert!(h.check_shape(&TreeShape::homogeneous(2).unwrap()).is_ok());
    }

    #[test]
    fn point_evaluation_examples() {
        let h2 = TreeShape::homogeneous(2).unwrap();
        let w = v(&[0, 1, 1]);
        let chi = TreeFunction::characteristic(w.clone());
        let lip = point_eval_bound_check(&Space::Lipschitz, &chi, &h2, &w, 5).unwrap();
        assert_eq!((lip.bound, lip.slack), (3.0, 2.0));
        assert!(lip.holds && lip.conclusive);

        let hardy = Space::Hardy(HardyParams::new(2, 1.0).unwrap());
        let w2 = v(&[0, 1]);
        let chi2 = TreeFunction::characteristic(w2.clone());
        let check = point_eval_bound_check(&hardy, &chi2, &h2, &w2, 4).unwrap();
        assert!(close(check.bound, 1.0));
        assert!(close(check.slack, 0.0));
        assert!(check.holds);

        assert!(point_eval_bound_check(&Space::Lipschitz, &chi, &h2, &w, 2).is_err());
    }

    #[test]
    fn radial_rule_uses_fast_path_consistently() {
        let params = HardyParams::new(2, 3.0).unwrap();
        let f = TreeFunction::radial_expr(crate::Expr::parse("n-2").unwrap(), ParamEnv::new());
        for n in 0..6 {
            let fast = hardy_level_mean(&f, &params, n).unwrap();
            let slow = hardy_level_mean_enumerated(&f, &params, n).unwrap();
            assert!((fast - slow).abs() <= 1e-12 * fast.max(1.0));
        }
    }

    fn arb_sparse() -> impl Strategy<Value = TreeFunction> {
        let shape = TreeShape::homogeneous(2).unwrap();
        proptest::collection::vec(
            (proptest::collection::vec(0u32..6, 0..=4), -5.0f64..5.0, -5.0f64..5.0),
            0..10,
        )
        .prop_map(move |entries| {
            TreeFunction::sparse(entries.into_iter().map(|(raw, a, b)| {
                let idx = raw
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x % shape.branching_at(i) as u32)
                    .collect();
                (Vertex::new(idx), Scalar::new(a, b))
            }))
        })
    }

    fn all_norms(f: &TreeFunction) -> Vec<f64> {
        let h2 = TreeShape::homogeneous(2).unwrap();
        vec![
            lipschitz_partial_norm(f, &h2, 5).unwrap().value(),
            weighted_partial_norm(f, &Weight::geometric(1.5), &h2, 5).unwrap().value(),
            hardy_partial_norm(f, &HardyParams::new(2, 2.0).unwrap(), 5).unwrap().value(),
        ]
    }

    proptest! {
        #[test]
        fn partials_are_monotone(f in arb_sparse()) {
            let h2 = TreeShape::homogeneous(2).unwrap();
            let reports = [
                lipschitz_partial_norm(&f, &h2, 5).unwrap(),
                weighted_partial_norm(&f, &Weight::odd_even(), &h2, 5).unwrap(),
                hardy_partial_norm(&f, &HardyParams::new(2, 1.5).unwrap(), 5).unwrap(),
            ];
            for r in reports {
                prop_assert!(r.partials.windows(2).all(|w| w[0].1 <= w[1].1 && w[0].0 < w[1].0));
            }
        }

        #[test]
        fn norms_are_homogeneous(f in arb_sparse(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let alpha = Scalar::new(a, b);
            let scaled = all_norms(&f.scale(alpha));
            for (s, n) in scaled.iter().zip(all_norms(&f)) {
                prop_assert!((s - alpha.norm() * n).abs() <= 1e-12 * (1.0 + s.abs()));
            }
        }

        #[test]
        fn triangle_inequality(f in arb_sparse(), g in arb_sparse()) {
            let sum = linear_combine(re(1.0), &f, re(1.0), &g);
            for ((s, a), b) in all_norms(&sum).into_iter().zip(all_norms(&f)).zip(all_norms(&g)) {
                prop_assert!(s <= a + b + 1e-12);
            }
        }

        #[test]
        fn point_evaluation_bounds_hold(f in arb_sparse()) {
            let h2 = TreeShape::homogeneous(2).unwrap();
            let spaces = [
                Space::Lipschitz,
                Space::Weighted(Weight::geometric(3.0)),
                Space::Hardy(HardyParams::new(2, 2.0).unwrap()),
            ];
            for space in &spaces {
                for u in h2.vertices_through(4) {
                    let check = point_eval_bound_check(space, &f, &h2, &u, 5).unwrap();
                    prop_assert!(check.holds, "{space} at {u}: {check:?}");
                }
            }
        }
    }
}
