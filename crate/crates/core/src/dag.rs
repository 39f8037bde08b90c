//! Directed acyclic graphs and their (CIS-)Markov equivalence classes.
//!
//! Two DAGs are Markov equivalent iff they share skeleton and v-structures,
//! and the class is connected under reversals of covered edges. CIS-Markov
//! classes are connected under reversals of trivially covered edges only.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::Tolerance;
use crate::model::CovariancePair;
use crate::ordering::Ordering;
use crate::positivity::ENUMERATION_CAP;

/// Directed edge `(from, to)`, 0-based.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dag {
    m: usize,
    edges: BTreeSet<Edge>,
}

/// Unshielded collider `left → collider ← right` with `left < right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VStructure {
    pub left: usize,
    pub collider: usize,
    pub right: usize,
}

/// Which edges may be reversed when closing an equivalence class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipRule {
    Covered,
    TriviallyCovered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traversal {
    BreadthFirst,
    DepthFirst,
}

impl Dag {
    pub fn new(m: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= m || b >= m {
                return Err(Error::InvalidInput(format!("edge {} -> {} references a node outside 1..={m}", a + 1, b + 1)));
            }
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at node {}", a + 1)));
            }
            if !set.insert((a, b)) {
                return Err(Error::InvalidInput(format!("duplicate edge {} -> {}", a + 1, b + 1)));
            }
        }
        let g = Self { m, edges: set };
        if g.topological_order().is_none() {
            return Err(Error::Cyclic);
        }
        Ok(g)
    }

    pub fn empty(m: usize) -> Self {
        Self { m, edges: BTreeSet::new() }
    }

    /// Complete DAG whose unique topological ordering is `sigma`.
    pub fn complete(sigma: &Ordering) -> Self {
        let s = sigma.as_slice();
        let edges = (0..s.len())
            .flat_map(|p| ((p + 1)..s.len()).map(move |q| (s[p], s[q])))
            .collect();
        Self { m: s.len(), edges }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn parents(&self, j: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|e| e.1 == j).map(|e| e.0).collect()
    }

    /// Undirected edges `(min, max)`.
    pub fn skeleton(&self) -> BTreeSet<Edge> {
        self.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect()
    }

    /// Graph with `from → to` replaced by `to → from`.
    pub fn reversed(&self, from: usize, to: usize) -> Result<Dag> {
        if !self.has_edge(from, to) {
            return Err(Error::InvalidInput(format!("no edge {} -> {}", from + 1, to + 1)));
        }
        let mut edges = self.edges.clone();
        edges.remove(&(from, to));
        edges.insert((to, from));
        let g = Dag { m: self.m, edges };
        match g.topological_order() {
            Some(_) => Ok(g),
            None => Err(Error::Cyclic),
        }
    }

    /// Smallest-label-first topological order, `None` if the edges contain a cycle.
    pub fn topological_order(&self) -> Option<Ordering> {
        let mut indeg = vec![0usize; self.m];
        for &(_, b) in &self.edges {
            indeg[b] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..self.m).filter(|&v| indeg[v] == 0).collect();
        let mut out = Vec::with_capacity(self.m);
        while let Some(v) = ready.pop_first() {
            out.push(v);
            for &(a, b) in &self.edges {
                if a == v {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        ready.insert(b);
                    }
                }
            }
        }
        (out.len() == self.m).then(|| Ordering::new(out).expect("Kahn order is a permutation"))
    }

    pub fn is_topological(&self, sigma: &Ordering) -> bool {
        let pos = sigma.positions();
        sigma.len() == self.m && self.edges.iter().all(|&(a, b)| pos[a] < pos[b])
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|&(a, b)| format!("{}->{}", a + 1, b + 1)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Every topological ordering of `g`, in lexicographic order.
pub fn topological_orderings(g: &Dag) -> Result<Vec<Ordering>> {
    if g.m > ENUMERATION_CAP {
        return Err(Error::DimensionTooLarge {
            dim: g.m,
            cap: ENUMERATION_CAP,
        });
    }
    let parents: Vec<BTreeSet<usize>> = (0..g.m).map(|j| g.parents(j)).collect();
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(g.m);
    let mut placed = vec![false; g.m];
    topo_rec(&parents, &mut prefix, &mut placed, &mut out);
    Ok(out)
}

fn topo_rec(parents: &[BTreeSet<usize>], prefix: &mut Vec<usize>, placed: &mut [bool], out: &mut Vec<Ordering>) {
    let m = parents.len();
    if prefix.len() == m {
        out.push(Ordering::new(prefix.clone()).expect("prefix is a permutation"));
        return;
    }
    for v in 0..m {
        if !placed[v] && parents[v].iter().all(|&p| placed[p]) {
            placed[v] = true;
            prefix.push(v);
            topo_rec(parents, prefix, placed, out);
            prefix.pop();
            placed[v] = false;
        }
    }
}

pub fn v_structures(g: &Dag) -> BTreeSet<VStructure> {
    let mut out = BTreeSet::new();
    for k in 0..g.m {
        let pa: Vec<usize> = g.parents(k).into_iter().collect();
        for (a, &i) in pa.iter().enumerate() {
            for &j in &pa[a + 1..] {
                if !g.adjacent(i, j) {
                    out.insert(VStructure {
                        left: i,
                        collider: k,
                        right: j,
                    });
                }
            }
        }
    }
    out
}

pub fn markov_equivalent(g: &Dag, h: &Dag) -> Result<bool> {
    if g.m != h.m {
        return Err(Error::DimensionMismatch {
            expected: g.m,
            found: h.m,
        });
    }
    Ok(g.skeleton() == h.skeleton() && v_structures(g) == v_structures(h))
}

/// Edges `i → j` with `Pa(i) = Pa(j) \ {i}` whose reversal stays acyclic.
pub fn covered_edges(g: &Dag) -> BTreeSet<Edge> {
    g.edges
        .iter()
        .copied()
        .filter(|&(i, j)| {
            let mut pj = g.parents(j);
            pj.remove(&i);
            g.parents(i) == pj && g.reversed(i, j).is_ok()
        })
        .collect()
}

/// Edges `i → j` with `Pa(i) = ∅` and `Pa(j) = {i}`.
pub fn trivially_covered_edges(g: &Dag) -> BTreeSet<Edge> {
    g.edges
        .iter()
        .copied()
        .filter(|&(i, j)| g.parents(i).is_empty() && g.parents(j).len() == 1)
        .collect()
}

/// Closure of `{g}` under single reversals allowed by `rule`.
pub fn flip_closure(g: &Dag, rule: FlipRule, traversal: Traversal) -> Result<BTreeSet<Dag>> {
    if g.m > ENUMERATION_CAP {
        return Err(Error::DimensionTooLarge {
            dim: g.m,
            cap: ENUMERATION_CAP,
        });
    }
    let mut seen = BTreeSet::from([g.clone()]);
    let mut frontier = VecDeque::from([g.clone()]);
    loop {
        let next = match traversal {
            Traversal::BreadthFirst => frontier.pop_front(),
            Traversal::DepthFirst => frontier.pop_back(),
        };
        let Some(cur) = next else { break };
        let flippable = match rule {
            FlipRule::Covered => covered_edges(&cur),
            FlipRule::TriviallyCovered => trivially_covered_edges(&cur),
        };
        for (i, j) in flippable {
            let h = cur.reversed(i, j)?;
            if seen.insert(h.clone()) {
                frontier.push_back(h);
            }
        }
    }
    Ok(seen)
}

pub fn markov_class(g: &Dag) -> Result<BTreeSet<Dag>> {
    flip_closure(g, FlipRule::Covered, Traversal::BreadthFirst)
}

pub fn cis_markov_class(g: &Dag) -> Result<BTreeSet<Dag>> {
    flip_closure(g, FlipRule::TriviallyCovered, Traversal::BreadthFirst)
}

/// Parents of v-structures `i → k ← j` with `K_ij > 0`. None of them can
/// finish a CIS ordering of a distribution in the positive DAG model of `g`.
pub fn forbidden_last_nodes(g: &Dag, cp: &CovariancePair, tol: &Tolerance) -> Result<BTreeSet<usize>> {
    if cp.dim() != g.m {
        return Err(Error::DimensionMismatch {
            expected: g.m,
            found: cp.dim(),
        });
    }
    let k = cp.precision();
    let mut out = BTreeSet::new();
    for v in v_structures(g) {
        let (i, j) = (v.left, v.right);
        if !tol.is_nonpositive(k.get(i, j), k.entry_scale(i, j)) {
            out.insert(i);
            out.insert(j);
        }
    }
    Ok(out)
}
