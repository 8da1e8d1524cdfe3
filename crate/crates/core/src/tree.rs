//! Lazily defined infinite rooted trees.
//!
//! A vertex is the word of child indices on the path from the root `o`; the
//! root is the empty word. A [`TreeShape`] assigns a child count to every
//! level, which is enough to describe every tree the crate works with: all of
//! them are spherically symmetric, so the number of children of `v` depends
//! only on `|v|`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Address word of a vertex. The root is the empty word.
///
/// Ordering is shortlex: shorter addresses first, then lexicographic. Within
/// a level this is plain lexicographic order, which is the canonical
/// tie-break for witness reporting.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn new(indices: Vec<u32>) -> Self {
        Vertex(indices)
    }

    /// Leftmost vertex of level `n`, i.e. `[0; n]`.
    pub fn leftmost(n: usize) -> Self {
        Vertex(vec![0; n])
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    /// `|v|`, the distance from the root.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The backward shift `b(v)`: the parent, or the root itself.
    pub fn parent(&self) -> Vertex {
        let mut indices = self.0.clone();
        indices.pop();
        Vertex(indices)
    }

    pub fn child(&self, index: u32) -> Vertex {
        let mut indices = Vec::with_capacity(self.0.len() + 1);
        indices.extend_from_slice(&self.0);
        indices.push(index);
        Vertex(indices)
    }

    pub fn common_prefix_len(&self, other: &Vertex) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// True when `self` lies on the path from the root to `other` (inclusive).
    pub fn is_ancestor_of(&self, other: &Vertex) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, index) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{index}")?;
        }
        f.write_str("]")
    }
}

impl From<Vec<u32>> for Vertex {
    fn from(indices: Vec<u32>) -> Self {
        Vertex(indices)
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Accepts `[0,1,2]`, `0,1,2`, `[]`, `o` or the empty string.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let inner = trimmed
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(trimmed)
            .trim();
        if inner.is_empty() || inner == "o" {
            return Ok(Vertex::root());
        }
        inner
            .split(',')
            .map(|part| {
                part.trim().parse::<u32>().map_err(|_| {
                    Error::InvalidArgument(format!("bad vertex address `{s}`"))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

/// `b(v)`: drop the last index; the root is fixed.
pub fn backward_shift(v: &Vertex) -> Vertex {
    v.parent()
}

/// Length of the unique path between two addresses. Does not validate them.
pub fn address_distance(v: &Vertex, w: &Vertex) -> usize {
    v.depth() + w.depth() - 2 * v.common_prefix_len(w)
}

/// `w` lies in the sector `S_ancestor` (the ancestor and all its descendants).
pub fn in_sector(ancestor: &Vertex, w: &Vertex) -> bool {
    ancestor.is_ancestor_of(w)
}

/// Membership in the open ball `B(center, radius)`.
pub fn in_open_ball(center: &Vertex, radius: usize, w: &Vertex) -> bool {
    address_distance(center, w) < radius
}

/// Membership in the closed ball of the given radius.
pub fn in_closed_ball(center: &Vertex, radius: usize, w: &Vertex) -> bool {
    address_distance(center, w) <= radius
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Law {
    Homogeneous(u32),
    Constant(u32),
    PerLevel(Vec<u32>),
}

/// Branching law of an infinite tree without terminal vertices.
///
/// * `homogeneous:q` — every vertex has `q+1` neighbours, so the root has
///   `q+1` children and every other vertex has `q`.
/// * `constant:k` — every vertex has `k` children; `constant:1` is the path tree.
/// * `perlevel:a,b,c` — level `i` vertices have `table[i]` children; the last
///   entry repeats forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeShape(Law);

impl TreeShape {
    pub fn homogeneous(q: u32) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("homogeneous tree needs q >= 1".into()));
        }
        Ok(TreeShape(Law::Homogeneous(q)))
    }

    pub fn constant(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("constant tree needs k >= 1".into()));
        }
        Ok(TreeShape(Law::Constant(k)))
    }

    pub fn path() -> Self {
        TreeShape(Law::Constant(1))
    }

    pub fn per_level(table: Vec<u32>) -> Result<Self> {
        if table.is_empty() || table.contains(&0) {
            return Err(Error::InvalidArgument(
                "per-level table must be non-empty with entries >= 1".into(),
            ));
        }
        Ok(TreeShape(Law::PerLevel(table)))
    }

    /// `Some(q)` for a `(q+1)`-homogeneous tree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        match self.0 {
            Law::Homogeneous(q) => Some(q),
            _ => None,
        }
    }

    /// Number of children of any vertex at the given level.
    pub fn branching_at(&self, level: usize) -> u64 {
        match &self.0 {
            Law::Homogeneous(q) if level == 0 => u64::from(*q) + 1,
            Law::Homogeneous(q) => u64::from(*q),
            Law::Constant(k) => u64::from(*k),
            Law::PerLevel(table) => u64::from(table[level.min(table.len() - 1)]),
        }
    }

    pub fn branching(&self, v: &Vertex) -> u64 {
        self.branching_at(v.depth())
    }

    pub fn validate(&self, v: &Vertex) -> Result<()> {
        for (position, &index) in v.indices().iter().enumerate() {
            let branching = self.branching_at(position);
            if u64::from(index) >= branching {
                return Err(Error::InvalidVertex {
                    address: v.clone(),
                    shape: self.to_string(),
                    position,
                    index,
                    branching,
                });
            }
        }
        Ok(())
    }

    /// `ch(v)` in index order.
    pub fn children(&self, v: &Vertex) -> Result<Vec<Vertex>> {
        self.validate(v)?;
        let count = u32::try_from(self.branching(v)).expect("branching fits u32");
        Ok((0..count).map(|i| v.child(i)).collect())
    }

    /// `d(v, w)` after validating both addresses.
    pub fn distance(&self, v: &Vertex, w: &Vertex) -> Result<usize> {
        self.validate(v)?;
        self.validate(w)?;
        Ok(address_distance(v, w))
    }

    /// Exact number of vertices with `|v| = n`.
    pub fn level_size(&self, n: usize) -> Result<u64> {
        let mut size: u64 = 1;
        for level in 0..n {
            size = size
                .checked_mul(self.branching_at(level))
                .ok_or(Error::LevelOverflow {
                    level: level + 1,
                    max_safe_depth: level,
                })?;
        }
        Ok(size)
    }

    /// Every vertex of level `n`, lexicographically, without materialising the level.
    pub fn level(&self, n: usize) -> Level {
        Level {
            bounds: (0..n).map(|i| self.branching_at(i)).collect(),
            current: Some(vec![0; n]),
        }
    }

    /// Levels `0..=depth` chained, i.e. the closed ball `B(o, depth)` in shortlex order.
    pub fn vertices_through(&self, depth: usize) -> impl Iterator<Item = Vertex> + '_ {
        (0..=depth).flat_map(move |n| self.level(n))
    }

    /// Shallowest level whose vertices have at least two children.
    pub fn first_branching_level(&self) -> Option<usize> {
        match &self.0 {
            Law::Homogeneous(_) => Some(0),
            Law::Constant(k) => (*k >= 2).then_some(0),
            Law::PerLevel(table) => table.iter().position(|&c| c >= 2),
        }
    }

    /// True unless every vertex has exactly one child.
    pub fn has_branching_vertex(&self) -> bool {
        self.first_branching_level().is_some()
    }
}

impl fmt::Display for TreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Law::Homogeneous(q) => write!(f, "homogeneous:{q}"),
            Law::Constant(k) => write!(f, "constant:{k}"),
            Law::PerLevel(table) => {
                let parts: Vec<String> = table.iter().map(u32::to_string).collect();
                write!(f, "perlevel:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for TreeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad tree shape `{s}`"));
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        let number = |t: &str| t.trim().parse::<u32>().map_err(|_| bad());
        match kind.trim() {
            "homogeneous" => TreeShape::homogeneous(number(arg)?),
            "constant" => TreeShape::constant(number(arg)?),
            "perlevel" => {
                TreeShape::per_level(arg.split(',').map(number).collect::<Result<Vec<_>>>()?)
            }
            _ => Err(bad()),
        }
    }
}

/// Odometer over the addresses of one level.
#[derive(Clone, Debug)]
pub struct Level {
    bounds: Vec<u64>,
    current: Option<Vec<u32>>,
}

impl Iterator for Level {
    type Item = Vertex;

    fn next(&mut self) -> Option<Vertex> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut position = next.len();
        let advanced = loop {
            if position == 0 {
                break false;
            }
            position -= 1;
            next[position] += 1;
            if u64::from(next[position]) < self.bounds[position] {
                break true;
            }
            next[position] = 0;
        };
        if advanced {
            self.current = Some(next);
        }
        Some(Vertex(out))
    }
}
