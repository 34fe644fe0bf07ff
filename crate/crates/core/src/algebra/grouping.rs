use std::fmt;

use crate::error::{Error, Result};

/// One variable group: a name and the indices of its variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub vars: Vec<usize>,
}

/// A partition of the variables `0..nvars` into named groups.
///
/// Groups produced by the parser are contiguous, but coarsening and
/// refinement may produce groups whose variables are interleaved with
/// those of other groups, so each group keeps an explicit index list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableGrouping {
    names: Vec<String>,
    groups: Vec<Group>,
    group_of: Vec<usize>,
}

impl VariableGrouping {
    pub fn new(names: Vec<String>, groups: Vec<Group>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidArgument("grouping needs at least one group".into()));
        }
        let n = names.len();
        let mut group_of = vec![usize::MAX; n];
        for (gi, g) in groups.iter().enumerate() {
            if g.vars.is_empty() {
                return Err(Error::InvalidArgument(format!("group {} is empty", g.name)));
            }
            for &v in &g.vars {
                if v >= n || group_of[v] != usize::MAX {
                    return Err(Error::InvalidArgument(format!("group {} does not partition the variables", g.name)));
                }
                group_of[v] = gi;
            }
        }
        if group_of.contains(&usize::MAX) {
            return Err(Error::InvalidArgument("some variable belongs to no group".into()));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidArgument(format!("duplicate variable name {a}")));
            }
        }
        for (i, g) in groups.iter().enumerate() {
            if groups[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::DuplicateGroup(g.name.clone()));
            }
        }
        Ok(VariableGrouping { names, groups, group_of })
    }

    /// Contiguous groups; a group `x` of size 1 holds the variable `x`,
    /// a group `x` of size n holds `x1..xn`.
    pub fn standard(decls: &[(&str, usize)]) -> Result<Self> {
        let mut names = Vec::new();
        let mut groups = Vec::new();
        for &(name, size) in decls {
            let start = names.len();
            if size == 1 {
                names.push(name.to_string());
            } else {
                for j in 1..=size {
                    names.push(format!("{name}{j}"));
                }
            }
            groups.push(Group { name: name.to_string(), vars: (start..start + size).collect() });
        }
        Self::new(names, groups)
    }

    /// A single group holding every variable.
    pub fn single(names: Vec<String>, group_name: &str) -> Result<Self> {
        let vars = (0..names.len()).collect();
        Self::new(names, vec![Group { name: group_name.to_string(), vars }])
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn ngroups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &Group {
        &self.groups[i]
    }

    pub fn size(&self, i: usize) -> usize {
        self.groups[i].vars.len()
    }

    /// The vector ṅ of group sizes.
    pub fn nvec(&self) -> MultiIndex {
        MultiIndex(self.groups.iter().map(|g| g.vars.len()).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn group_of(&self, var: usize) -> usize {
        self.group_of[var]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Merge the listed groups into one group placed at the position of the
    /// smallest listed index. Returns the new grouping and the new index of
    /// the merged group.
    pub fn merge(&self, which: &[usize]) -> Result<(VariableGrouping, usize)> {
        let mut which = which.to_vec();
        which.sort_unstable();
        which.dedup();
        if which.len() < 2 || *which.last().unwrap() >= self.ngroups() {
            return Err(Error::InvalidArgument("merge needs two or more valid groups".into()));
        }
        let mut groups = Vec::new();
        let mut merged_at = 0;
        for (i, g) in self.groups.iter().enumerate() {
            if i == which[0] {
                let mut vars: Vec<usize> = which.iter().flat_map(|&j| self.groups[j].vars.iter().copied()).collect();
                vars.sort_unstable();
                let name = which.iter().map(|&j| self.groups[j].name.as_str()).collect::<String>();
                merged_at = groups.len();
                groups.push(Group { name, vars });
            } else if !which.contains(&i) {
                groups.push(g.clone());
            }
        }
        Ok((VariableGrouping::new(self.names.clone(), groups)?, merged_at))
    }

    /// Split group `i` into the variables listed in `first` and the rest.
    pub fn split(&self, i: usize, first: &[usize]) -> Result<VariableGrouping> {
        let g = self.groups.get(i).ok_or_else(|| Error::InvalidArgument(format!("no group {i}")))?;
        let a: Vec<usize> = g.vars.iter().copied().filter(|v| first.contains(v)).collect();
        let b: Vec<usize> = g.vars.iter().copied().filter(|v| !first.contains(v)).collect();
        if a.len() != first.len() || a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("split must divide the group into two nonempty parts".into()));
        }
        let mut groups = self.groups.clone();
        groups[i] = Group { name: format!("{}_a", g.name), vars: a };
        groups.insert(i + 1, Group { name: format!("{}_b", g.name), vars: b });
        VariableGrouping::new(self.names.clone(), groups)
    }

    /// Keep only the listed groups, renumbering their variables in order.
    /// Returns the new grouping and, for each new variable, its old index.
    pub fn restrict(&self, keep: &[usize]) -> Result<(VariableGrouping, Vec<usize>)> {
        let mut old: Vec<usize> = keep.iter().flat_map(|&g| self.groups[g].vars.iter().copied()).collect();
        old.sort_unstable();
        let names = old.iter().map(|&v| self.names[v].clone()).collect();
        let groups = keep
            .iter()
            .map(|&g| Group {
                name: self.groups[g].name.clone(),
                vars: self.groups[g].vars.iter().map(|v| old.binary_search(v).unwrap()).collect(),
            })
            .collect();
        Ok((VariableGrouping::new(names, groups)?, old))
    }
}

/// A vector of nonnegative integers indexed by variable groups.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zeros(k: usize) -> Self {
        MultiIndex(vec![0; k])
    }

    /// The unit vector ε_i.
    pub fn unit(k: usize, i: usize) -> Self {
        let mut e = vec![0; k];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |e| = Σ e_i.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    /// Componentwise e ≤ bound.
    pub fn fits(&self, bound: &MultiIndex) -> bool {
        self.0.len() == bound.0.len() && self.0.iter().zip(&bound.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Key without separators, e.g. `1100`; falls back to the comma form if
    /// some entry has more than one digit.
    pub fn compact(&self) -> String {
        if self.0.iter().all(|&v| v < 10) {
            self.0.iter().map(|v| char::from(b'0' + *v as u8)).collect()
        } else {
            self.comma()
        }
    }

    pub fn comma(&self) -> String {
        self.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Parse either the compact or the comma form.
    pub fn parse(s: &str, k: usize) -> Result<MultiIndex> {
        let bad = || Error::InvalidArgument(format!("malformed multi-index {s:?}"));
        let v: Vec<usize> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect::<Result<_>>()?
        };
        if v.len() != k {
            return Err(bad());
        }
        Ok(MultiIndex(v))
    }

    /// All e ≤ bound with |e| = total, in lexicographic order.
    pub fn all_with_total(bound: &MultiIndex, total: usize) -> Vec<MultiIndex> {
        fn rec(bound: &[usize], i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if i == bound.len() {
                if left == 0 {
                    out.push(MultiIndex(cur.clone()));
                }
                return;
            }
            let rest: usize = bound[i + 1..].iter().sum();
            for v in 0..=bound[i].min(left) {
                if left - v > rest {
                    continue;
                }
                cur.push(v);
                rec(bound, i + 1, left - v, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(&bound.0, 0, total, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.compact())
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        MultiIndex(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grouping_names() {
        let g = VariableGrouping::standard(&[("x", 1), ("y", 3)]).unwrap();
        assert_eq!(g.names(), &["x", "y1", "y2", "y3"]);
        assert_eq!(g.nvec(), MultiIndex(vec![1, 3]));
        assert_eq!(g.group_of(2), 1);
    }

    #[test]
    fn merge_keeps_position_of_first() {
        let g = VariableGrouping::standard(&[("x", 1), ("y", 1), ("z", 1), ("w", 1)]).unwrap();
        let (m, at) = g.merge(&[1, 3]).unwrap();
        assert_eq!(at, 1);
        assert_eq!(m.ngroups(), 3);
        assert_eq!(m.group(1).vars, vec![1, 3]);
        assert_eq!(m.group(2).name, "z");
    }

    #[test]
    fn multi_index_parse_and_print() {
        let e = MultiIndex::parse("1100", 4).unwrap();
        assert_eq!(e.compact(), "1100");
        assert_eq!(MultiIndex::parse("1,1,0,0", 4).unwrap(), e);
        assert!(MultiIndex::parse("110", 4).is_err());
        assert_eq!(MultiIndex(vec![12, 0]).compact(), "12,0");
    }

    #[test]
    fn enumerate_hexagon() {
        let pts = MultiIndex::all_with_total(&MultiIndex(vec![3, 3, 3]), 5);
        assert_eq!(pts.len(), 12);
        let oct = MultiIndex::all_with_total(&MultiIndex(vec![1, 1, 1, 1]), 2);
        assert_eq!(oct.len(), 6);
    }
}
