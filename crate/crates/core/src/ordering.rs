use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A permutation of `0..m` in one-line notation: `perm[p]` is the variable
/// placed at position `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ordering {
    perm: Vec<usize>,
}

impl Ordering {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let m = perm.len();
        if m == 0 {
            return Err(Error::InvalidInput("ordering must be non-empty".into()));
        }
        let mut seen = vec![false; m];
        for &v in &perm {
            if v >= m || seen[v] {
                return Err(Error::InvalidInput(format!(
                    "{perm:?} is not a permutation of 0..{m}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            perm: (0..m).collect(),
        }
    }

    /// Builds an ordering from 1-based labels, as written by users.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        let perm = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::InvalidInput("labels are 1-based".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|v| v + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Variable at position `p`.
    pub fn at(&self, p: usize) -> usize {
        self.perm[p]
    }

    /// `positions()[v]` is the position of variable `v`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.perm.len()];
        for (p, &v) in self.perm.iter().enumerate() {
            pos[v] = p;
        }
        pos
    }

    pub fn inverse(&self) -> Self {
        Self {
            perm: self.positions(),
        }
    }

    /// Relabels variables: variable `v` becomes `relabel[v]`.
    pub fn relabeled(&self, relabel: &Ordering) -> Self {
        Self {
            perm: self.perm.iter().map(|&v| relabel.perm[v]).collect(),
        }
    }

    /// Same ordering with the first two positions exchanged.
    pub fn swap_first_two(&self) -> Self {
        let mut perm = self.perm.clone();
        if perm.len() >= 2 {
            perm.swap(0, 1);
        }
        Self { perm }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(p, &v)| p == v)
    }

    /// All `m!` orderings in lexicographic order.
    pub fn all(m: usize) -> Vec<Ordering> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(m);
        let mut used = vec![false; m];
        fn rec(m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Ordering>) {
            if cur.len() == m {
                out.push(Ordering { perm: cur.clone() });
                return;
            }
            for v in 0..m {
                if !used[v] {
                    used[v] = true;
                    cur.push(v);
                    rec(m, cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        rec(m, &mut current, &mut used, &mut out);
        out
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.perm.iter().map(|v| (v + 1).to_string()).collect();
        f.write_str(&labels.join(","))
    }
}

/// Parses 1-based comma- or whitespace-separated labels such as `"1,4,3,2"`.
impl FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidInput(format!("bad ordering label `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(&labels)
    }
}
