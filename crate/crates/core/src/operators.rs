//! Operator-level analysis of `D = I - C_b`: norm bounds and witnesses,
//! eigenvalue classification, spectrum bounding disks, surjectivity and
//! isometry witnesses, and finite-section matrices.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::{linear_combine, Scalar, TreeFunction, VertexMap};
use crate::spaces::{NormReport, Space, Witness};
use crate::tree::{TreeShape, Vertex};
use crate::weight::Weight;
use crate::TOLERANCE;

const ONE: Scalar = Scalar::new(1.0, 0.0);
const ZERO: Scalar = Scalar::new(0.0, 0.0);

/// Default divergence cap for the weight-ratio criterion.
pub const DEFAULT_RATIO_CAP: f64 = 1e6;

/// Default cap on the dimension of a truncation matrix.
pub const DEFAULT_MATRIX_CAP: u64 = 20_000;

#[derive(Clone, Debug)]
pub enum OperatorDescriptor {
    Identity,
    Differentiation,
    BackwardComposition,
    Composition(VertexMap),
    AffineCombo(Vec<(Scalar, OperatorDescriptor)>),
}

impl OperatorDescriptor {
    /// `I - C_b`, the representation of `D` as a combination.
    pub fn d_as_combo() -> Self {
        OperatorDescriptor::AffineCombo(vec![
            (ONE, OperatorDescriptor::Identity),
            (-ONE, OperatorDescriptor::BackwardComposition),
        ])
    }

    /// Flattens nested combinations, multiplies coefficients through and
    /// merges repeated `I`, `D`, `C_b` terms. Zero terms are dropped.
    pub fn normalize(&self) -> Self {
        fn flatten(op: &OperatorDescriptor, scale: Scalar, out: &mut Vec<(Scalar, OperatorDescriptor)>) {
            match op {
                OperatorDescriptor::AffineCombo(terms) => {
                    for (c, inner) in terms {
                        flatten(inner, scale * c, out);
                    }
                }
                atom => {
                    let merged = out.iter_mut().find(|(_, o)| o.same_atom(atom));
                    match merged {
                        Some((c, _)) => *c += scale,
                        None => out.push((scale, atom.clone())),
                    }
                }
            }
        }
        match self {
            OperatorDescriptor::AffineCombo(_) => {
                let mut terms = Vec::new();
                flatten(self, ONE, &mut terms);
                terms.retain(|(c, _)| *c != ZERO);
                OperatorDescriptor::AffineCombo(terms)
            }
            atom => atom.clone(),
        }
    }

    fn same_atom(&self, other: &OperatorDescriptor) -> bool {
        use OperatorDescriptor::*;
        matches!(
            (self, other),
            (Identity, Identity) | (Differentiation, Differentiation) | (BackwardComposition, BackwardComposition)
        )
    }

    /// True for operators whose finite sections are exact (everything but
    /// arbitrary compositions).
    pub fn is_local(&self) -> bool {
        match self {
            OperatorDescriptor::Composition(_) => false,
            OperatorDescriptor::AffineCombo(terms) => terms.iter().all(|(_, op)| op.is_local()),
            _ => true,
        }
    }

    pub fn apply(&self, f: &TreeFunction, shape: &TreeShape) -> Result<TreeFunction> {
        match self {
            OperatorDescriptor::Identity => Ok(f.clone()),
            OperatorDescriptor::Differentiation => f.derivative(shape),
            OperatorDescriptor::BackwardComposition => f.compose_backward(shape),
            OperatorDescriptor::Composition(phi) => Ok(f.compose(phi)),
            OperatorDescriptor::AffineCombo(terms) => {
                let mut acc: Option<TreeFunction> = None;
                for (c, op) in terms {
                    let g = op.apply(f, shape)?;
                    acc = Some(match acc {
                        None => g.scale(*c),
                        Some(a) => linear_combine(ONE, &a, *c, &g),
                    });
                }
                Ok(acc.unwrap_or_else(TreeFunction::zero))
            }
        }
    }

    /// Coefficients of row `v`: `(op f)(v) = sum c_u f(u)`.
    fn row(&self, v: &Vertex) -> Result<Vec<(Vertex, Scalar)>> {
        let mut out = Vec::new();
        self.accumulate_row(v, ONE, &mut out)?;
        out.retain(|(_, c)| *c != ZERO);
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    fn accumulate_row(&self, v: &Vertex, scale: Scalar, out: &mut Vec<(Vertex, Scalar)>) -> Result<()> {
        let mut add = |u: Vertex, c: Scalar| match out.iter_mut().find(|(w, _)| *w == u) {
            Some((_, x)) => *x += c,
            None => out.push((u, c)),
        };
        match self {
            OperatorDescriptor::Identity => add(v.clone(), scale),
            OperatorDescriptor::BackwardComposition => add(v.parent(), scale),
            OperatorDescriptor::Differentiation => {
                if !v.is_root() {
                    add(v.clone(), scale);
                    add(v.parent(), -scale);
                }
            }
            OperatorDescriptor::Composition(phi) => add(phi.apply(v)?, scale),
            OperatorDescriptor::AffineCombo(terms) => {
                for (c, op) in terms {
                    op.accumulate_row(v, scale * c, out)?;
                }
            }
        }
        Ok(())
    }
}

fn fmt_coef(c: Scalar) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({},{})", c.re, c.im)
    }
}

impl fmt::Display for OperatorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorDescriptor::Identity => f.write_str("I"),
            OperatorDescriptor::Differentiation => f.write_str("D"),
            OperatorDescriptor::BackwardComposition => f.write_str("Cb"),
            OperatorDescriptor::Composition(phi) => write!(f, "C[{}]", phi.name()),
            OperatorDescriptor::AffineCombo(terms) => {
                if terms.is_empty() {
                    return f.write_str("0");
                }
                let parts: Vec<String> = terms
                    .iter()
                    .map(|(c, op)| format!("{}*{op}", fmt_coef(*c)))
                    .collect();
                f.write_str(&parts.join(" + "))
            }
        }
    }
}

/// Accepts `I`, `D`, `Cb` and real combinations such as `I-Cb`, `2*D + Cb`.
impl FromStr for OperatorDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad operator `{s}`; expected e.g. D, Cb, I-Cb, 2*D"));
        let atom = |name: &str| match name.trim() {
            "I" => Ok(OperatorDescriptor::Identity),
            "D" => Ok(OperatorDescriptor::Differentiation),
            "Cb" | "C_b" => Ok(OperatorDescriptor::BackwardComposition),
            _ => Err(bad()),
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1.0, &rest[1..]),
                b'-' => (-1.0, &rest[1..]),
                _ if terms.is_empty() => (1.0, rest),
                _ => return Err(bad()),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let (term, tail) = body.split_at(end);
            let (coef, name) = match term.split_once('*') {
                Some((c, name)) => (c.parse::<f64>().map_err(|_| bad())?, name),
                None => (1.0, term),
            };
            terms.push((Scalar::new(sign * coef, 0.0), atom(name)?));
            rest = tail;
        }
        if terms.len() == 1 && terms[0].0 == ONE {
            return Ok(terms.pop().expect("one term").1);
        }
        Ok(OperatorDescriptor::AffineCombo(terms))
    }
}

/// `lambda_b = sup_{v in T*} d(b(v), b(b(v)))` over `1 <= |v| <= N`.
///
/// The distance only depends on `|v|`, so one vertex per level is enough:
/// it is `0` on level 1 (both points are the root) and `1` from level 2 on.
pub fn lipschitz_lambda_b(shape: &TreeShape, depth: usize) -> Result<f64> {
    if depth == 0 {
        return Err(Error::InvalidArgument("lambda_b needs depth >= 1".into()));
    }
    let mut sup = 0usize;
    for n in 1..=depth {
        let v = Vertex::leftmost(n);
        let bv = v.parent();
        sup = sup.max(shape.distance(&bv, &bv.parent())?);
    }
    Ok(sup as f64)
}

/// Partial suprema of `mu(v)/mu(b(v))` over `1 <= |v| <= N`. Weights are
/// radial, so this is a supremum over levels; the witness is the smallest
/// maximising level. `attained` when the closed-form supremum is reached.
pub fn weighted_ratio_sup(weight: &Weight, depth: usize) -> Result<NormReport> {
    weighted_ratio_check(weight, depth, f64::INFINITY)
}

/// As [`weighted_ratio_sup`], but a ratio above `cap` at any level stops
/// the scan with [`Error::Unbounded`].
pub fn weighted_ratio_check(weight: &Weight, depth: usize, cap: f64) -> Result<NormReport> {
    if depth == 0 {
        return Err(Error::InvalidArgument("ratio supremum needs depth >= 1".into()));
    }
    let mut best = (f64::NEG_INFINITY, 1);
    let mut partials = Vec::with_capacity(depth);
    for n in 1..=depth {
        let ratio = weight.ratio_at(n)?;
        if ratio > cap {
            return Err(Error::Unbounded {
                depth: n,
                value: ratio,
                cap,
            });
        }
        if ratio > best.0 {
            best = (ratio, n);
        }
        partials.push((n, best.0));
    }
    let attained = weight
        .exact_ratio_sup()
        .is_some_and(|r| best.0 >= r - TOLERANCE * r.max(1.0));
    Ok(NormReport {
        partials,
        witness: Witness::Level(best.1),
        attained_exactly: attained,
    })
}

/// `N_{m,n} = max_{|w| = m} |b^{-1}(w) ∩ {|v| = n}|`, read off the branching
/// law: `b^{-1}(w) = ch(w)`, plus `o` itself when `w = o`.
pub fn preimage_count(shape: &TreeShape, m: usize, n: usize) -> u64 {
    let children = if n == m + 1 { shape.branching_at(m) } else { 0 };
    let root = u64::from(m == 0 && n == 0);
    children + root
}

/// `alpha_n = (1/c_n) sum_m N_{m,n} c_m` on the `(q+1)`-homogeneous tree,
/// computed in integers and divided once.
pub fn hardy_alpha(q: u32, n: usize) -> Result<f64> {
    let shape = TreeShape::homogeneous(q)?;
    let mut numerator: u128 = 0;
    for m in 0..=n {
        let count = preimage_count(&shape, m, n);
        if count > 0 {
            numerator += u128::from(count) * u128::from(shape.level_size(m)?);
        }
    }
    Ok(numerator as f64 / shape.level_size(n)? as f64)
}

/// `alpha_n` for `n = 0..=N` and their supremum.
pub fn hardy_alpha_sup(q: u32, depth: usize) -> Result<(Vec<f64>, f64)> {
    let values = (0..=depth)
        .map(|n| hardy_alpha(q, n))
        .collect::<Result<Vec<_>>>()?;
    let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((values, sup))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBounds {
    pub cb_norm: f64,
    /// `max(0, 1 - ||C_b||)`.
    pub lower: f64,
    /// `1 + ||C_b||`.
    pub upper: f64,
    /// `||D||` where it is known for the space.
    pub d_norm: Option<f64>,
    pub d_norm_exact: bool,
    pub source: String,
}

/// The bounds `1 - ||C_b|| <= ||D|| <= 1 + ||C_b||` with `||C_b||` from
/// the space's boundedness criterion.
///
/// * Lipschitz: `||C_b|| = lambda_b`, which is constant from level 2 on, so
///   it is evaluated at depth `max(N, 2)`; `||D|| = 2`.
/// * weighted: `||C_b|| = sup_T mu(v)/mu(b(v)) = max(1, sup_{T*})` (the
///   root contributes 1) and `||D|| = 1 + sup_{T*}`.
/// * Hardy: `||C_b|| = alpha^(1/p)`; `||D|| = 2`.
pub fn operator_norm_bounds(space: &Space, shape: &TreeShape, depth: usize, cap: f64) -> Result<NormBounds> {
    space.check_shape(shape)?;
    let (cb_norm, d_norm, d_norm_exact, source) = match space {
        Space::Lipschitz => {
            let lambda = lipschitz_lambda_b(shape, depth.max(2))?;
            (lambda, Some(2.0), true, format!("lambda_b = {lambda}; ||D|| = 2 on the Lipschitz space"))
        }
        Space::Weighted(weight) => {
            let report = weighted_ratio_check(weight, depth.max(1), cap)?;
            let sup = report.value();
            (
                sup.max(1.0),
                Some(1.0 + sup),
                report.attained_exactly,
                format!(
                    "sup mu(v)/mu(b(v)) = {sup} through depth {}{}",
                    report.depth(),
                    if report.attained_exactly { " (exact)" } else { " (partial)" }
                ),
            )
        }
        Space::Hardy(params) => {
            let (_, alpha) = hardy_alpha_sup(params.q(), depth)?;
            let cb = alpha.powf(1.0 / params.p());
            (cb, Some(2.0), true, format!("alpha = {alpha} through level {depth}; ||C_b|| = alpha^(1/p)"))
        }
    };
    Ok(NormBounds {
        cb_norm,
        lower: (1.0 - cb_norm).max(0.0),
        upper: 1.0 + cb_norm,
        d_norm,
        d_norm_exact,
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerWitness {
    /// `max ||op f|| / ||f||` over the family.
    pub value: f64,
    pub best: usize,
    pub ratios: Vec<f64>,
    pub f_report: NormReport,
    pub op_f_report: NormReport,
    /// Both reports of the best member are exact, so `value` is a proved
    /// lower bound of the operator norm.
    pub certified: bool,
}

/// Best ratio `||op f||_N / ||f||_N` over a family of test functions.
pub fn operator_norm_lower_witness(
    op: &OperatorDescriptor,
    family: &[TreeFunction],
    space: &Space,
    shape: &TreeShape,
    depth: usize,
) -> Result<LowerWitness> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("empty witness family".into()));
    }
    let mut best: Option<(usize, NormReport, NormReport)> = None;
    let mut ratios = Vec::with_capacity(family.len());
    for (i, f) in family.iter().enumerate() {
        let nf = space.partial_norm(f, shape, depth)?;
        if nf.value() <= TOLERANCE {
            return Err(Error::ZeroNorm(format!(
                "family member {i} ({}) has partial norm {} at depth {depth}",
                f.describe(),
                nf.value()
            )));
        }
        let nof = space.partial_norm(&op.apply(f, shape)?, shape, depth)?;
        let ratio = nof.value() / nf.value();
        ratios.push(ratio);
        if best.as_ref().is_none_or(|(b, _, _)| ratio > ratios[*b]) {
            best = Some((i, nf, nof));
        }
    }
    let (i, nf, nof) = best.expect("non-empty family");
    Ok(LowerWitness {
        value: ratios[i],
        best: i,
        certified: nf.attained_exactly && nof.attained_exactly,
        ratios,
        f_report: nf,
        op_f_report: nof,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EigenVerdict {
    OnlyZeroFunction,
    ConstantsOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenClassification {
    pub lambda: Scalar,
    pub verdict: EigenVerdict,
    /// For `lambda = 0` the root value is free and the trace holds
    /// coefficients of `g(o)`; otherwise it holds the forced values.
    pub root_free: bool,
    /// Forced value at the leftmost vertex of each level `0..=N`.
    pub trace: Vec<(Vertex, Scalar)>,
    /// Vertices whose value the propagation fixed.
    pub vertices_forced: u64,
    pub depth: usize,
}

/// Solves `Dg = lambda g` level by level on `B(o, N)`.
///
/// The root equation reads `lambda g(o) = 0`; off the root
/// `(1 - lambda) g(v) = g(b(v))`. For `lambda = 1` the second equation forces
/// `g(b(v)) = 0`, and since no vertex is terminal every vertex is some
/// `b(v)`. Each step is exact, so the verdict holds for the whole tree.
pub fn eigen_classify(lambda: Scalar, shape: &TreeShape, depth: usize, has_constants: bool) -> Result<EigenClassification> {
    if depth == 0 {
        return Err(Error::InvalidArgument("eigen classification needs depth >= 1".into()));
    }
    let root_free = lambda == ZERO;
    let is_one = lambda == ONE;
    // Coefficient of g(o) when the root is free, otherwise the value itself.
    let mut level = vec![if root_free { ONE } else { ZERO }];
    let mut trace = vec![(Vertex::root(), level[0])];
    let mut forced: u64 = 1;
    for n in 1..=depth {
        let fan = shape.branching_at(n - 1) as usize;
        shape.level_size(n)?;
        let next: Vec<Scalar> = if is_one {
            // Every vertex of level n-1 is b(v) for its children, hence zero;
            // level n is in turn zeroed by its own children.
            vec![ZERO; level.len() * fan]
        } else {
            let inv = (ONE - lambda).inv();
            level.iter().flat_map(|&g| std::iter::repeat_n(g * inv, fan)).collect()
        };
        forced += next.len() as u64;
        trace.push((Vertex::leftmost(n), next[0]));
        level = next;
    }
    let nonzero = root_free && has_constants;
    Ok(EigenClassification {
        lambda,
        verdict: if nonzero {
            EigenVerdict::ConstantsOnly
        } else {
            EigenVerdict::OnlyZeroFunction
        },
        root_free,
        trace,
        vertices_forced: forced,
        depth,
    })
}

/// A 100-point grid on `[-3, 3]^2` with both axes sampled at
/// `-3, -2, -1, -0.5, 0, 0.5, 1, 1.5, 2, 3`; the origin is left out.
pub fn eigen_grid() -> Vec<Scalar> {
    const AXIS: [f64; 10] = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0];
    let mut out = Vec::with_capacity(99);
    for &re in &AXIS {
        for &im in &AXIS {
            if re != 0.0 || im != 0.0 {
                out.push(Scalar::new(re, im));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiskRegion {
    pub center: Scalar,
    pub radius: f64,
}

impl DiskRegion {
    pub fn new(center: Scalar, radius: f64) -> Self {
        DiskRegion { center, radius }
    }

    pub fn contains(&self, z: Scalar) -> bool {
        (z - self.center).norm() <= self.radius + TOLERANCE
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSpectrum {
    /// `{0}`: the constants are eigenvectors for 0.
    Zero,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumBounds {
    /// `sigma(D)` lies in the intersection of these disks.
    pub regions: Vec<DiskRegion>,
    /// Known closed form of `sigma(D)`; taken from the analytic result, not
    /// computed.
    pub exact: Option<DiskRegion>,
    pub members: Vec<Scalar>,
    pub point_spectrum: PointSpectrum,
    /// False when the point spectrum rests on an estimate of whether the
    /// weight is bounded.
    pub point_spectrum_certain: bool,
    pub bounds: NormBounds,
}

/// `sigma(D)` is inside `Disk(0, ||D||) ∩ Disk(1, ||C_b||)`. `1` is a member
/// when `C_b` is not surjective, witnessed by a characteristic function that
/// is not constant on children (needs a vertex with two children).
pub fn spectrum_bounds(space: &Space, shape: &TreeShape, depth: usize, cap: f64) -> Result<SpectrumBounds> {
    let bounds = operator_norm_bounds(space, shape, depth, cap)?;
    let d_norm = bounds.d_norm.unwrap_or(bounds.upper);
    let regions = vec![
        DiskRegion::new(ZERO, d_norm),
        DiskRegion::new(ONE, bounds.cb_norm),
    ];
    let exact = matches!(space, Space::Lipschitz).then(|| DiskRegion::new(ONE, 1.0));
    let members = if non_surjectivity_witness(shape, depth.max(2))?.is_some() {
        vec![ONE]
    } else {
        Vec::new()
    };
    let (constants, certain) = space.contains_constants(depth)?;
    Ok(SpectrumBounds {
        regions,
        exact,
        members,
        point_spectrum: if constants {
            PointSpectrum::Zero
        } else {
            PointSpectrum::Empty
        },
        point_spectrum_certain: certain,
        bounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChildrenCheck {
    pub constant_on_children: bool,
    /// `(first child, first child with a different value)`.
    pub counterexample: Option<(Vertex, Vertex)>,
}

/// Whether `f` is constant on `ch(v)` for every `|v| <= N - 1`.
pub fn constant_on_children_check(f: &TreeFunction, shape: &TreeShape, depth: usize) -> Result<ChildrenCheck> {
    if depth == 0 {
        return Err(Error::InvalidArgument("children check needs depth >= 1".into()));
    }
    for n in 0..depth {
        shape.level_size(n + 1)?;
        for v in shape.level(n) {
            let children = shape.children(&v)?;
            let first = f.evaluate(&children[0])?;
            for u in &children[1..] {
                if (f.evaluate(u)? - first).norm() > TOLERANCE {
                    return Ok(ChildrenCheck {
                        constant_on_children: false,
                        counterexample: Some((children[0].clone(), u.clone())),
                    });
                }
            }
        }
    }
    Ok(ChildrenCheck {
        constant_on_children: true,
        counterexample: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonSurjectivity {
    /// `w` such that `chi_w` is not in the range of `C_b`.
    pub w: Vertex,
    pub check: ChildrenCheck,
}

/// Every function in the range of `C_b` is constant on children, so a
/// characteristic function of a non-first child is outside the range.
/// Characteristic functions have finite support and lie in every space
/// here. The same `chi_w` has `||chi_w|| = 1` while `D` moves it a fixed
/// distance, which is the non-compactness witness. `None` on the path tree.
pub fn non_surjectivity_witness(shape: &TreeShape, depth: usize) -> Result<Option<NonSurjectivity>> {
    let Some(level) = shape.first_branching_level() else {
        return Ok(None);
    };
    let w = Vertex::leftmost(level).child(1);
    let check = constant_on_children_check(&TreeFunction::characteristic(w.clone()), shape, depth.max(level + 1))?;
    Ok((!check.constant_on_children).then_some(NonSurjectivity { w, check }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsometryWitness {
    pub function: String,
    pub norm_f: f64,
    pub norm_df: f64,
    /// `||f|| = 1` is exact and the gap is proved: either `||Df||` is exact
    /// or its partial (a lower bound) already exceeds `||f||`.
    pub certified: bool,
}

/// A unit-norm `f` with `||Df|| != ||f||`: the constant `1` where the
/// space holds constants, otherwise the alternating witness of the weight.
pub fn non_isometry_witness(space: &Space, shape: &TreeShape, depth: usize) -> Result<IsometryWitness> {
    space.check_shape(shape)?;
    let depth = depth.max(1);
    let (name, f) = match space {
        Space::Weighted(weight) => ("alt-witness", TreeFunction::alternating_witness(weight)),
        _ => ("const:1", TreeFunction::constant(ONE)),
    };
    let nf = space.partial_norm(&f, shape, depth)?;
    let ndf = space.partial_norm(&f.derivative(shape)?, shape, depth)?;
    let gap = (ndf.value() - nf.value()).abs() > TOLERANCE;
    let proved_gap = ndf.attained_exactly || ndf.value() > nf.value() + TOLERANCE;
    Ok(IsometryWitness {
        function: name.into(),
        norm_f: nf.value(),
        norm_df: ndf.value(),
        certified: nf.attained_exactly && gap && proved_gap,
    })
}

/// Shown with every finite section of `D`.
pub const FINITE_SECTION_WARNING: &str = "finite sections are triangular, so their eigenvalues are only 0 and 1; \
     they do not approximate sigma(D), which on the Lipschitz space is the closed disk D(1,1)";

/// Matrix of an operator on `B(o, N)` in shortlex vertex order:
/// `rows[i]` lists `(j, c)` with `(op f)(v_i) = sum c f(v_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationMatrix {
    pub order: Vec<Vertex>,
    pub rows: Vec<Vec<(usize, Scalar)>>,
}

impl TruncationMatrix {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        self.rows[i]
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(ZERO, |&(_, c)| c)
    }

    pub fn diagonal(&self) -> Vec<Scalar> {
        (0..self.dim()).map(|i| self.entry(i, i)).collect()
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().all(|&(j, _)| j <= i))
    }

    /// Diagonal values with multiplicities, in first-seen order. For a
    /// triangular matrix these are the eigenvalues.
    pub fn diagonal_multiset(&self) -> Vec<(Scalar, usize)> {
        let mut out: Vec<(Scalar, usize)> = Vec::new();
        for d in self.diagonal() {
            match out.iter_mut().find(|(x, _)| *x == d) {
                Some((_, k)) => *k += 1,
                None => out.push((d, 1)),
            }
        }
        out
    }

    /// Dense row-major export with the vertex order as legend; entries are
    /// `[re, im]`.
    pub fn to_dense_json(&self) -> serde_json::Value {
        let legend: Vec<String> = self.order.iter().map(Vertex::to_string).collect();
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let c = self.entry(i, j);
                        [c.re, c.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "legend": legend, "rows": rows })
    }
}

/// Finite section of `op` on `B(o, N)`. Refuses dimensions above `cap` and
/// compositions that leave the ball.
pub fn truncation_matrix(op: &OperatorDescriptor, shape: &TreeShape, depth: usize, cap: u64) -> Result<TruncationMatrix> {
    let mut dim: u64 = 0;
    for n in 0..=depth {
        dim = dim.saturating_add(shape.level_size(n)?);
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
    }
    let order: Vec<Vertex> = shape.vertices_through(depth).collect();
    let op = op.normalize();
    let mut rows = Vec::with_capacity(order.len());
    for v in &order {
        let mut row = Vec::new();
        for (u, c) in op.row(v)? {
            if u.depth() > depth {
                return Err(Error::InvalidArgument(format!(
                    "{op} maps {v} outside the ball of radius {depth}"
                )));
            }
            shape.validate(&u)?;
            let j = order.binary_search(&u).expect("vertices of the ball are listed");
            row.push((j, c));
        }
        row.sort_by_key(|&(j, _)| j);
        rows.push(row);
    }
    Ok(TruncationMatrix { order, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ParamEnv;
    use crate::spaces::HardyParams;
    use proptest::prelude::*;

    fn v(indices: &[u32]) -> Vertex {
        Vertex::new(indices.to_vec())
    }

    fn re(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    fn h(q: u32) -> TreeShape {
        TreeShape::homogeneous(q).unwrap()
    }

    #[test]
    fn parses_operator_text() {
        assert!(matches!("D".parse::<OperatorDescriptor>().unwrap(), OperatorDescriptor::Differentiation));
        assert!(matches!("Cb".parse::<OperatorDescriptor>().unwrap(), OperatorDescriptor::BackwardComposition));
        let combo: OperatorDescriptor = "I - Cb".parse().unwrap();
        assert_eq!(combo.to_string(), "1*I + -1*Cb");
        assert_eq!("2*D".parse::<OperatorDescriptor>().unwrap().to_string(), "2*D");
        assert!("X".parse::<OperatorDescriptor>().is_err());
        assert!("D+".parse::<OperatorDescriptor>().is_err());
    }

    #[test]
    fn normalize_flattens_and_merges() {
        let nested = OperatorDescriptor::AffineCombo(vec![
            (re(2.0), OperatorDescriptor::d_as_combo()),
            (re(1.0), OperatorDescriptor::BackwardComposition),
            (re(-2.0), OperatorDescriptor::Identity),
        ]);
        let flat = nested.normalize();
        assert_eq!(flat.to_string(), "-1*Cb");
    }

    #[test]
    fn apply_examples() {
        let shape = h(2);
        let f = TreeFunction::characteristic(v(&[0, 1]));
        let d = OperatorDescriptor::Differentiation.apply(&f, &shape).unwrap();
        let combo = OperatorDescriptor::d_as_combo().apply(&f, &shape).unwrap();
        for u in shape.vertices_through(4) {
            assert_eq!(d.evaluate(&u).unwrap(), combo.evaluate(&u).unwrap());
        }
        let same = OperatorDescriptor::Identity.apply(&f, &shape).unwrap();
        assert_eq!(same.evaluate(&v(&[0, 1])).unwrap(), re(1.0));
        let c = OperatorDescriptor::Differentiation
            .apply(&TreeFunction::constant(re(3.0)), &shape)
            .unwrap();
        assert!(shape.vertices_through(4).all(|u| c.evaluate(&u).unwrap() == ZERO));
    }

    #[test]
    fn lambda_b_values() {
        for shape in [h(2), TreeShape::path()] {
            assert_eq!(lipschitz_lambda_b(&shape, 5).unwrap(), 1.0);
            assert_eq!(lipschitz_lambda_b(&shape, 1).unwrap(), 0.0);
        }
        assert!(lipschitz_lambda_b(&h(2), 0).is_err());
    }

    #[test]
    fn weighted_ratio_examples() {
        let r = weighted_ratio_sup(&Weight::geometric(3.0), 6).unwrap();
        assert!(r.partials.iter().all(|&(_, x)| x == 2.0));
        assert!(r.attained_exactly);
        assert_eq!(r.witness, Witness::Level(1));

        let unit = weighted_ratio_sup(&Weight::unit(), 4).unwrap();
        assert_eq!(unit.value(), 1.0);
        assert!(unit.attained_exactly);

        let odd = weighted_ratio_sup(&Weight::odd_even(), 11).unwrap();
        for n in 0..=5 {
            assert_eq!(odd.partials[2 * n].1, (2 * n + 1) as f64);
        }
        assert_eq!(odd.value(), 11.0);
        assert!(!odd.attained_exactly);
    }

    #[test]
    fn unbounded_signal_fires_past_cap() {
        let mu = Weight::odd_even();
        assert!(weighted_ratio_check(&mu, 10, 10.0).is_ok());
        for depth in 11..15 {
            assert!(matches!(
                weighted_ratio_check(&mu, depth, 10.0),
                Err(Error::Unbounded { depth: 11, .. })
            ));
        }
    }

    #[test]
    fn alpha_values() {
        assert_eq!(hardy_alpha(2, 0).unwrap(), 1.0);
        assert_eq!(hardy_alpha(2, 1).unwrap(), 1.0);
        assert_eq!(hardy_alpha(3, 5).unwrap(), 1.0);
        for q in 1..=3 {
            let (values, sup) = hardy_alpha_sup(q, 12).unwrap();
            assert!(values.iter().all(|&a| a == 1.0));
            assert_eq!(sup, 1.0);
        }
        let shape = h(2);
        assert_eq!(preimage_count(&shape, 0, 0), 1);
        assert_eq!(preimage_count(&shape, 0, 1), 3);
        assert_eq!(preimage_count(&shape, 3, 4), 2);
        assert_eq!(preimage_count(&shape, 2, 4), 0);
    }

    #[test]
    fn norm_bound_examples() {
        let env = ParamEnv::new();
        let lip = operator_norm_bounds(&Space::Lipschitz, &h(2), 4, DEFAULT_RATIO_CAP).unwrap();
        assert_eq!((lip.lower, lip.upper), (0.0, 2.0));
        let hardy = Space::Hardy(HardyParams::new(2, 2.0).unwrap());
        let hb = operator_norm_bounds(&hardy, &h(2), 6, DEFAULT_RATIO_CAP).unwrap();
        assert_eq!((hb.lower, hb.upper, hb.cb_norm), (0.0, 2.0, 1.0));
        let w = Space::parse("weighted:expr:pow(M-1,n)", &ParamEnv::new().with("M", 3.0)).unwrap();
        let wb = operator_norm_bounds(&w, &h(2), 5, DEFAULT_RATIO_CAP).unwrap();
        assert_eq!((wb.lower, wb.upper, wb.cb_norm, wb.d_norm), (0.0, 3.0, 2.0, Some(3.0)));
        assert!(wb.d_norm_exact);
        let odd = Space::Weighted(Weight::odd_even());
        assert!(matches!(
            operator_norm_bounds(&odd, &h(2), 12, 10.0),
            Err(Error::Unbounded { .. })
        ));
        let _ = env;
    }

    #[test]
    fn lower_witness_examples() {
        let shape = h(2);
        let d = OperatorDescriptor::Differentiation;
        let lip = operator_norm_lower_witness(&d, &[TreeFunction::characteristic(v(&[0, 1]))], &Space::Lipschitz, &shape, 4)
            .unwrap();
        assert_eq!(lip.value, 2.0);
        assert!(lip.certified);

        let hardy = Space::Hardy(HardyParams::new(2, 2.0).unwrap());
        let hw = operator_norm_lower_witness(&d, &[TreeFunction::hardy_witness()], &hardy, &shape, 4).unwrap();
        assert_eq!(hw.value, 2.0);
        assert!(hw.certified);

        let mu = Weight::geometric(3.0);
        let w = Space::Weighted(mu.clone());
        let ww = operator_norm_lower_witness(&d, &[TreeFunction::alternating_witness(&mu)], &w, &shape, 5).unwrap();
        assert!((ww.value - 3.0).abs() <= TOLERANCE);
        assert!(ww.certified);

        assert!(matches!(
            operator_norm_lower_witness(&d, &[TreeFunction::zero()], &Space::Lipschitz, &shape, 3),
            Err(Error::ZeroNorm(_))
        ));
    }

    #[test]
    fn eigen_examples() {
        let shape = h(2);
        let zero = eigen_classify(ZERO, &shape, 8, true).unwrap();
        assert_eq!(zero.verdict, EigenVerdict::ConstantsOnly);
        assert!(zero.trace.iter().all(|&(_, c)| c == ONE));
        assert_eq!(eigen_classify(ZERO, &shape, 8, false).unwrap().verdict, EigenVerdict::OnlyZeroFunction);
        assert_eq!(eigen_classify(ONE, &shape, 8, true).unwrap().verdict, EigenVerdict::OnlyZeroFunction);
        let half = eigen_classify(Scalar::new(0.5, 0.5), &shape, 4, true).unwrap();
        assert_eq!(half.verdict, EigenVerdict::OnlyZeroFunction);
        assert_eq!(half.trace[0], (Vertex::root(), ZERO));
        assert!(half.trace.iter().all(|&(_, c)| c == ZERO));
        assert_eq!(half.vertices_forced, 1 + 3 + 6 + 12 + 24);
    }

    #[test]
    fn eigen_grid_has_no_origin() {
        let grid = eigen_grid();
        assert_eq!(grid.len(), 99);
        assert!(!grid.contains(&ZERO));
        assert!(grid.contains(&ONE) && grid.contains(&re(2.0)));
        assert!(grid.iter().all(|z| z.re.abs() <= 3.0 && z.im.abs() <= 3.0));
    }

    #[test]
    fn spectrum_examples() {
        let shape = h(2);
        let lip = spectrum_bounds(&Space::Lipschitz, &shape, 6, DEFAULT_RATIO_CAP).unwrap();
        assert_eq!(lip.exact, Some(DiskRegion::new(ONE, 1.0)));
        assert_eq!(lip.members, vec![ONE]);
        assert_eq!(lip.point_spectrum, PointSpectrum::Zero);

        let hardy = Space::Hardy(HardyParams::new(2, 1.0).unwrap());
        let hs = spectrum_bounds(&hardy, &shape, 6, DEFAULT_RATIO_CAP).unwrap();
        assert_eq!(hs.regions[1], DiskRegion::new(ONE, 1.0));
        assert_eq!(hs.point_spectrum, PointSpectrum::Zero);

        let w = Space::Weighted(Weight::geometric(3.0));
        let ws = spectrum_bounds(&w, &shape, 6, DEFAULT_RATIO_CAP).unwrap();
        assert_eq!(ws.regions, vec![DiskRegion::new(ZERO, 3.0), DiskRegion::new(ONE, 2.0)]);
        assert_eq!(ws.point_spectrum, PointSpectrum::Empty);
        assert!(ws.point_spectrum_certain);
        for s in [&lip, &hs, &ws] {
            for m in &s.members {
                assert!(s.regions.iter().all(|r| r.contains(*m)));
            }
        }

        let path = spectrum_bounds(&Space::Lipschitz, &TreeShape::path(), 6, DEFAULT_RATIO_CAP).unwrap();
        assert!(path.members.is_empty());
    }

    #[test]
    fn children_check_examples() {
        let shape = h(2);
        let chi = constant_on_children_check(&TreeFunction::characteristic(v(&[0, 1])), &shape, 3).unwrap();
        assert!(!chi.constant_on_children);
        assert_eq!(chi.counterexample, Some((v(&[0, 0]), v(&[0, 1]))));
        assert!(constant_on_children_check(&TreeFunction::constant(re(2.0)), &shape, 3).unwrap().constant_on_children);
        assert!(constant_on_children_check(&TreeFunction::hardy_witness(), &shape, 3).unwrap().constant_on_children);
        assert!(non_surjectivity_witness(&TreeShape::path(), 4).unwrap().is_none());
        assert_eq!(non_surjectivity_witness(&shape, 4).unwrap().unwrap().w, v(&[1]));
    }

    #[test]
    fn isometry_witnesses() {
        let shape = h(2);
        let spaces = [
            Space::Lipschitz,
            Space::Hardy(HardyParams::new(2, 2.0).unwrap()),
            Space::Weighted(Weight::unit()),
            Space::Weighted(Weight::geometric(3.0)),
            Space::Weighted(Weight::odd_even()),
        ];
        for space in &spaces {
            let w = non_isometry_witness(space, &shape, 5).unwrap();
            assert_eq!(w.norm_f, 1.0, "{space}");
            assert!((w.norm_df - w.norm_f).abs() > TOLERANCE, "{space}");
            assert!(w.certified, "{space}");
        }
    }

    #[test]
    fn matrix_examples() {
        let shape = h(2);
        let cb = truncation_matrix(&OperatorDescriptor::BackwardComposition, &shape, 1, DEFAULT_MATRIX_CAP).unwrap();
        assert_eq!(cb.dim(), 4);
        assert_eq!(cb.diagonal(), vec![ONE, ZERO, ZERO, ZERO]);
        assert!(cb.is_lower_triangular());
        let d = truncation_matrix(&OperatorDescriptor::Differentiation, &shape, 1, DEFAULT_MATRIX_CAP).unwrap();
        assert_eq!(d.diagonal(), vec![ZERO, ONE, ONE, ONE]);
        let id = truncation_matrix(&OperatorDescriptor::Identity, &shape, 2, DEFAULT_MATRIX_CAP).unwrap();
        for i in 0..id.dim() {
            for j in 0..id.dim() {
                assert_eq!(id.entry(i, j), if i == j { ONE } else { ZERO });
            }
        }
        assert!(matches!(
            truncation_matrix(&OperatorDescriptor::Identity, &shape, 12, 1000),
            Err(Error::DimensionCap { .. })
        ));
        let json = cb.to_dense_json();
        assert_eq!(json["legend"][1], "[0]");
        assert_eq!(json["rows"][1][0], serde_json::json!([1.0, 0.0]));
    }

    fn arb_function() -> impl Strategy<Value = TreeFunction> {
        let sparse = proptest::collection::vec(
            (proptest::collection::vec(0u32..2, 0..5), -5.0f64..5.0, -5.0f64..5.0),
            0..8,
        )
        .prop_map(|entries| {
            TreeFunction::sparse(
                entries
                    .into_iter()
                    .map(|(a, x, y)| (Vertex::new(a), Scalar::new(x, y))),
            )
        });
        let radial = (proptest::collection::vec(-5.0f64..5.0, 0..6), -5.0f64..5.0)
            .prop_map(|(values, tail)| TreeFunction::radial(values.into_iter().map(re).collect(), re(tail)));
        prop_oneof![sparse, radial]
    }

    proptest! {
        #[test]
        fn d_equals_identity_minus_cb(f in arb_function()) {
            let shape = h(2);
            let d = OperatorDescriptor::Differentiation.apply(&f, &shape).unwrap();
            let i = OperatorDescriptor::Identity.apply(&f, &shape).unwrap();
            let cb = OperatorDescriptor::BackwardComposition.apply(&f, &shape).unwrap();
            for u in shape.vertices_through(6) {
                let lhs = d.evaluate(&u).unwrap();
                let rhs = i.evaluate(&u).unwrap() - cb.evaluate(&u).unwrap();
                prop_assert!((lhs - rhs).norm() <= TOLERANCE);
            }
        }

        #[test]
        fn lambda_b_is_one_for_every_shape(kind in 0usize..2, k in 1u32..4, depth in 2usize..9) {
            let shape = if kind == 0 { h(k) } else { TreeShape::constant(k).unwrap() };
            prop_assert_eq!(lipschitz_lambda_b(&shape, depth).unwrap(), 1.0);
        }

        #[test]
        fn d_plus_cb_is_identity(q in 1u32..4, depth in 0usize..4) {
            let shape = h(q);
            let d = truncation_matrix(&OperatorDescriptor::Differentiation, &shape, depth, DEFAULT_MATRIX_CAP).unwrap();
            let cb = truncation_matrix(&OperatorDescriptor::BackwardComposition, &shape, depth, DEFAULT_MATRIX_CAP).unwrap();
            for i in 0..d.dim() {
                for j in 0..d.dim() {
                    let expected = if i == j { ONE } else { ZERO };
                    prop_assert_eq!(d.entry(i, j) + cb.entry(i, j), expected);
                }
            }
        }

        #[test]
        fn witness_never_exceeds_upper_bound(f in arb_function(), which in 0usize..3) {
            let shape = h(2);
            let space = match which {
                0 => Space::Lipschitz,
                1 => Space::Hardy(HardyParams::new(2, 2.0).unwrap()),
                _ => Space::Weighted(Weight::geometric(3.0)),
            };
            let norm = space.partial_norm(&f, &shape, 7).unwrap();
            prop_assume!(norm.value() > 1e-6);
            let bounds = operator_norm_bounds(&space, &shape, 7, DEFAULT_RATIO_CAP).unwrap();
            let w = operator_norm_lower_witness(&OperatorDescriptor::Differentiation, &[f], &space, &shape, 7).unwrap();
            prop_assert!(w.value <= bounds.upper + TOLERANCE);
        }
    }
}
