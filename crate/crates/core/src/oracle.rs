//! Slow, independent reference computations used to cross-check the fast
//! paths. Nothing here shares code with the closed-form routines beyond
//! [`TreeShape::children`] and function evaluation: trees are built
//! explicitly, sums are naive, and operators are applied to basis vectors.

use std::collections::{BTreeMap, VecDeque};

use crate::error::Result;
use crate::func::{Scalar, TreeFunction};
use crate::operators::OperatorDescriptor;
use crate::tree::{TreeShape, Vertex};
use crate::weight::Weight;

/// `B(o, depth)` built by repeatedly expanding children, with parent links.
pub struct ExplicitTree {
    pub vertices: Vec<Vertex>,
    pub parent: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    index: BTreeMap<Vertex, usize>,
}

impl ExplicitTree {
    pub fn build(shape: &TreeShape, depth: usize) -> Result<Self> {
        let mut vertices = vec![Vertex::root()];
        let mut parent = vec![0];
        let mut frontier = vec![0usize];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &i in &frontier {
                for child in shape.children(&vertices[i].clone())? {
                    vertices.push(child);
                    parent.push(i);
                    next.push(vertices.len() - 1);
                }
            }
            frontier = next;
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, &p) in parent.iter().enumerate().skip(1) {
            adjacency[i].push(p);
            adjacency[p].push(i);
        }
        let index = vertices.iter().cloned().zip(0..).collect();
        Ok(ExplicitTree {
            vertices,
            parent,
            adjacency,
            index,
        })
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// Vertices at graph distance `n` from the root.
    pub fn level(&self, n: usize) -> Vec<&Vertex> {
        let dist = self.bfs(0);
        self.vertices
            .iter()
            .zip(dist)
            .filter_map(|(v, d)| (d == Some(n)).then_some(v))
            .collect()
    }

    /// Unweighted shortest-path distances from `source` along tree edges.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(i) = queue.pop_front() {
            let d = dist[i].expect("queued vertices are reached");
            for &j in &self.adjacency[i] {
                if dist[j].is_none() {
                    dist[j] = Some(d + 1);
                    queue.push_back(j);
                }
            }
        }
        dist
    }
}

/// `d(v, w)` by breadth-first search on the explicit ball containing both.
pub fn bfs_distance(shape: &TreeShape, v: &Vertex, w: &Vertex) -> Result<usize> {
    let tree = ExplicitTree::build(shape, v.depth().max(w.depth()))?;
    let (i, j) = (
        tree.index_of(v).expect("v lies in the ball"),
        tree.index_of(w).expect("w lies in the ball"),
    );
    Ok(tree.bfs(i)[j].expect("trees are connected"))
}

/// `sup_{1 <= |v| <= N} d(b(v), b(b(v)))` over every vertex, with BFS distances.
pub fn lambda_b_enumerated(shape: &TreeShape, depth: usize) -> Result<f64> {
    let tree = ExplicitTree::build(shape, depth)?;
    let mut seen = BTreeMap::new();
    for i in 1..tree.vertices.len() {
        let b = tree.parent[i];
        seen.entry(b)
            .or_insert_with(|| tree.bfs(b)[tree.parent[b]].expect("connected"));
    }
    let sup = seen.values().copied().max().unwrap_or(0);
    Ok(sup as f64)
}

/// `M_p(n, f)` with a plain left-to-right sum over the explicit level.
pub fn hardy_mean_naive(f: &TreeFunction, q: u32, p: f64, n: usize) -> Result<f64> {
    let shape = TreeShape::homogeneous(q)?;
    let tree = ExplicitTree::build(&shape, n)?;
    let level = tree.level(n);
    let mut sum = 0.0;
    for v in &level {
        sum += f.evaluate(v)?.norm().powf(p);
    }
    Ok((sum / level.len() as f64).powf(1.0 / p))
}

/// `N_{m,n}` by applying `b` to every vertex of level `n` and counting
/// preimages per vertex of level `m`.
pub fn preimage_count_enumerated(shape: &TreeShape, m: usize, n: usize) -> Result<u64> {
    let tree = ExplicitTree::build(shape, m.max(n))?;
    let dist = tree.bfs(0);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for i in 0..tree.vertices.len() {
        if dist[i] == Some(n) {
            let b = tree.parent[i];
            if dist[b] == Some(m) {
                *counts.entry(b).or_default() += 1;
            }
        }
    }
    Ok(counts.values().copied().max().unwrap_or(0))
}

/// `alpha_n` from enumerated preimage counts and enumerated level sizes.
pub fn hardy_alpha_enumerated(q: u32, n: usize) -> Result<f64> {
    let shape = TreeShape::homogeneous(q)?;
    let tree = ExplicitTree::build(&shape, n)?;
    let size = |m: usize| tree.level(m).len() as f64;
    let mut total = 0.0;
    for m in 0..=n {
        total += preimage_count_enumerated(&shape, m, n)? as f64 * size(m);
    }
    Ok(total / size(n))
}

/// Dense matrix of `op` on `B(o, N)`: column `u` is `op chi_u` read off at
/// every vertex.
pub fn operator_matrix(op: &OperatorDescriptor, shape: &TreeShape, depth: usize) -> Result<(Vec<Vertex>, Vec<Vec<Scalar>>)> {
    let tree = ExplicitTree::build(shape, depth)?;
    let mut order = tree.vertices.clone();
    order.sort();
    let dim = order.len();
    let mut matrix = vec![vec![Scalar::new(0.0, 0.0); dim]; dim];
    for (j, u) in order.iter().enumerate() {
        let column = op.apply(&TreeFunction::characteristic(u.clone()), shape)?;
        for (i, v) in order.iter().enumerate() {
            matrix[i][j] = column.evaluate(v)?;
        }
    }
    Ok((order, matrix))
}

/// `|f(o)| + max |f(v) - f(parent)|` over the explicit ball.
pub fn lipschitz_norm_naive(f: &TreeFunction, shape: &TreeShape, depth: usize) -> Result<f64> {
    let tree = ExplicitTree::build(shape, depth)?;
    let mut sup: f64 = 0.0;
    for i in 1..tree.vertices.len() {
        let d = f.evaluate(&tree.vertices[i])? - f.evaluate(&tree.vertices[tree.parent[i]])?;
        sup = sup.max(d.norm());
    }
    Ok(f.evaluate(&Vertex::root())?.norm() + sup)
}

/// `max mu(v) |f(v)|` over the explicit ball.
pub fn weighted_norm_naive(f: &TreeFunction, weight: &Weight, shape: &TreeShape, depth: usize) -> Result<f64> {
    let tree = ExplicitTree::build(shape, depth)?;
    let mut sup: f64 = 0.0;
    for v in &tree.vertices {
        sup = sup.max(weight.at_level(v.depth())? * f.evaluate(v)?.norm());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_tree_sizes() {
        let tree = ExplicitTree::build(&TreeShape::homogeneous(2).unwrap(), 3).unwrap();
        assert_eq!(tree.vertices.len(), 1 + 3 + 6 + 12);
        assert_eq!(tree.level(2).len(), 6);
    }

    #[test]
    fn bfs_matches_examples() {
        let shape = TreeShape::homogeneous(2).unwrap();
        let v = |a: &[u32]| Vertex::new(a.to_vec());
        assert_eq!(bfs_distance(&shape, &v(&[0]), &v(&[1])).unwrap(), 2);
        assert_eq!(bfs_distance(&shape, &v(&[0, 1]), &v(&[0])).unwrap(), 1);
        assert_eq!(bfs_distance(&shape, &v(&[0, 1]), &v(&[0, 1])).unwrap(), 0);
    }
}
