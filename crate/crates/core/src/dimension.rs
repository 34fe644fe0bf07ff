//! Local multidimension, dimension polytopes and product structure.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::algebra::{numerical_rank, Complex, MultiIndex, PolySystem};
use crate::error::{Error, Result};

/// Largest number of groups for which all subsets are enumerated.
pub const MAX_GROUPS: usize = 16;

/// `dim X` and the projected dimensions `dim_I(X)` for every `I ⊆ {0..k-1}`,
/// indexed by bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DimensionProfile {
    pub total_dim: usize,
    pub nvec: MultiIndex,
    proj: Vec<usize>,
}

fn members(mask: usize, k: usize) -> impl Iterator<Item = usize> {
    (0..k).filter(move |i| mask >> i & 1 == 1)
}

fn mask_of(groups: &[usize]) -> usize {
    groups.iter().fold(0, |m, &i| m | 1 << i)
}

impl DimensionProfile {
    /// Build from a full table indexed by bitmask (`table[0] = 0`, last entry
    /// is the total dimension).
    pub fn from_table(nvec: MultiIndex, table: Vec<usize>) -> Result<Self> {
        let k = nvec.len();
        if k > MAX_GROUPS {
            return Err(Error::InvalidArgument(format!("at most {MAX_GROUPS} groups are supported")));
        }
        if table.len() != 1 << k {
            return Err(Error::DimensionMismatch { expected: 1 << k, got: table.len() });
        }
        let p = DimensionProfile { total_dim: table[(1 << k) - 1], nvec, proj: table };
        p.check()?;
        Ok(p)
    }

    pub fn ngroups(&self) -> usize {
        self.nvec.len()
    }

    /// `dim_I` for the groups set in `mask`.
    pub fn proj_dim_mask(&self, mask: usize) -> usize {
        self.proj[mask]
    }

    /// `dim_I` for a list of groups.
    pub fn proj_dim(&self, groups: &[usize]) -> usize {
        self.proj[mask_of(groups)]
    }

    /// Monotone, bounded by the total and by the ambient sizes, `dim_∅ = 0`.
    pub fn check(&self) -> Result<()> {
        let k = self.ngroups();
        if self.proj[0] != 0 {
            return Err(Error::Inconsistent("projection to no factors has positive dimension".into()));
        }
        for mask in 0..1usize << k {
            let d = self.proj[mask];
            let ambient: usize = members(mask, k).map(|i| self.nvec.get(i)).sum();
            if d > self.total_dim || d > ambient {
                return Err(Error::Inconsistent(format!("projected dimension {d} too large for subset {mask:#b}")));
            }
            for i in 0..k {
                if self.proj[mask | 1 << i] < d {
                    return Err(Error::Inconsistent(format!("projected dimensions not monotone at {mask:#b}")));
                }
            }
        }
        Ok(())
    }

    /// Projected dimensions for the subsets, labelled by 1-based group
    /// numbers (`"13"` is groups 1 and 3).
    pub fn to_json(&self) -> Value {
        let k = self.ngroups();
        let proj: serde_json::Map<String, Value> =
            (1..(1usize << k) - 1).map(|m| (subset_label(m, k), json!(self.proj[m]))).collect();
        json!({ "total": self.total_dim, "projections": proj })
    }
}

fn subset_label(mask: usize, k: usize) -> String {
    members(mask, k).map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for DimensionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.ngroups();
        write!(f, "dim {}", self.total_dim)?;
        for m in 1..(1usize << k) - 1 {
            write!(f, " [{}]={}", subset_label(m, k), self.proj[m])?;
        }
        Ok(())
    }
}

fn stable_rank(m: &crate::algebra::CMatrix, rel_tol: f64) -> Result<usize> {
    let r = numerical_rank(m, rel_tol);
    if numerical_rank(m, rel_tol * 10.0) != r {
        return Err(Error::IllConditioned(format!(
            "rank of a {}x{} Jacobian changes between tolerances {rel_tol:e} and {:e}",
            m.rows(),
            m.cols(),
            rel_tol * 10.0
        )));
    }
    Ok(r)
}

/// `Dim_x(F)` from ranks of Jacobian column blocks at a smooth point.
pub fn local_multidimension(f: &PolySystem, point: &[Complex], rel_tol: f64) -> Result<DimensionProfile> {
    let g = &f.grouping;
    let k = g.ngroups();
    if k > MAX_GROUPS {
        return Err(Error::InvalidArgument(format!("at most {MAX_GROUPS} groups are supported")));
    }
    let n = f.nvars();
    let full = f.jacobian(point, &[])?;
    let ker = n - stable_rank(&full, rel_tol)?;
    let mut table = vec![0; 1 << k];
    for mask in 1..1usize << k {
        if mask == (1 << k) - 1 {
            table[mask] = ker;
            continue;
        }
        let omit: Vec<usize> = members(mask, k).collect();
        let sub = f.jacobian(point, &omit)?;
        let sub_ker = sub.cols() - if sub.rows() == 0 { 0 } else { stable_rank(&sub, rel_tol)? };
        table[mask] = ker.checked_sub(sub_ker).ok_or_else(|| {
            Error::IllConditioned(format!("fiber over groups {} exceeds the tangent space", subset_label(mask, k)))
        })?;
    }
    DimensionProfile::from_table(g.nvec(), table)
}

/// Lattice points `Dim(X)` of the polymatroid polytope of a profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionPolytope {
    pub points: BTreeSet<MultiIndex>,
}

impl DimensionPolytope {
    pub fn new(points: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let points: BTreeSet<MultiIndex> = points.into_iter().collect();
        let first = points.iter().next().ok_or_else(|| Error::Inconsistent("empty dimension polytope".into()))?;
        if points.iter().any(|e| e.total() != first.total() || e.len() != first.len()) {
            return Err(Error::InvalidArgument("dimension polytope points must share length and total".into()));
        }
        Ok(DimensionPolytope { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ngroups(&self) -> usize {
        self.points.iter().next().map_or(0, MultiIndex::len)
    }

    pub fn total(&self) -> usize {
        self.points.iter().next().map_or(0, MultiIndex::total)
    }

    pub fn contains(&self, e: &MultiIndex) -> bool {
        self.points.contains(e)
    }

    /// Coordinate projection onto `groups` (in the given order).
    pub fn project(&self, groups: &[usize]) -> BTreeSet<MultiIndex> {
        self.points.iter().map(|e| MultiIndex(groups.iter().map(|&i| e.get(i)).collect())).collect()
    }

    /// `max Σ_{i∈I} e_i`, which is `dim_I` for a polymatroid polytope.
    pub fn proj_dim(&self, groups: &[usize]) -> usize {
        self.points.iter().map(|e| groups.iter().map(|&i| e.get(i)).sum()).max().unwrap_or(0)
    }

    /// Polytope of `X ∩ V(ℓ)` for a general form `ℓ` in group `i`:
    /// `{e − ε_i : e ∈ Dim, e_i > 0}`. `None` when that is empty.
    pub fn slice(&self, i: usize) -> Option<DimensionPolytope> {
        let pts: BTreeSet<MultiIndex> = self
            .points
            .iter()
            .filter(|e| e.get(i) > 0)
            .map(|e| {
                let mut v = e.0.clone();
                v[i] -= 1;
                MultiIndex(v)
            })
            .collect();
        (!pts.is_empty()).then_some(DimensionPolytope { points: pts })
    }

    pub fn to_json(&self) -> Value {
        json!(self.points.iter().map(MultiIndex::compact).collect::<Vec<_>>())
    }
}

impl fmt::Display for DimensionPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let keys: Vec<String> = self.points.iter().map(MultiIndex::compact).collect();
        write!(f, "{{{}}}", keys.join(", "))
    }
}

/// All `e ≤ n` with `|e| = dim X` and `Σ_{i∈I} e_i ≤ dim_I` for proper `I`.
pub fn dimension_polytope(profile: &DimensionProfile, nvec: &MultiIndex) -> Result<DimensionPolytope> {
    let k = profile.ngroups();
    if nvec.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: nvec.len() });
    }
    let full = (1usize << k) - 1;
    let points: BTreeSet<MultiIndex> = MultiIndex::all_with_total(nvec, profile.total_dim)
        .into_iter()
        .filter(|e| {
            (1..full).all(|mask| members(mask, k).map(|i| e.get(i)).sum::<usize>() <= profile.proj_dim_mask(mask))
        })
        .collect();
    if points.is_empty() {
        return Err(Error::Inconsistent(format!("profile ({profile}) admits no slice vector")));
    }
    Ok(DimensionPolytope { points })
}

/// Partition points by local dimension profile. Parts come in order of
/// first appearance and hold indices into `points`.
pub fn equidim_partition(
    f: &PolySystem,
    points: &[Vec<Complex>],
    rel_tol: f64,
) -> Result<Vec<(DimensionProfile, Vec<usize>)>> {
    let profiles: Vec<DimensionProfile> =
        points.par_iter().map(|p| local_multidimension(f, p, rel_tol)).collect::<Result<_>>()?;
    let mut parts: Vec<(DimensionProfile, Vec<usize>)> = Vec::new();
    for (i, prof) in profiles.into_iter().enumerate() {
        match parts.iter_mut().find(|(p, _)| *p == prof) {
            Some((_, idx)) => idx.push(i),
            None => parts.push((prof, vec![i])),
        }
    }
    Ok(parts)
}

/// Whether `dp` is the product of its projections to `s` and the complement.
fn separates(dp: &DimensionPolytope, mask: usize, k: usize) -> bool {
    let a: Vec<usize> = members(mask, k).collect();
    let b: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 0).collect();
    // dp always sits inside the product, so equal sizes mean equality
    dp.project(&a).len() * dp.project(&b).len() == dp.len()
}

/// Finest partition of the groups into blocks such that `dp` is the product
/// of its projections to the blocks. Blocks are sorted, and listed by their
/// smallest group.
pub fn product_factorization(dp: &DimensionPolytope) -> Vec<Vec<usize>> {
    let k = dp.ngroups();
    if k == 0 {
        return vec![];
    }
    let full = (1usize << k) - 1;
    let k = k.min(MAX_GROUPS);
    // separators are closed under complement and intersection; the block of
    // i is the intersection of all separators containing i
    let seps: Vec<usize> = (1..full).filter(|&m| separates(dp, m, k)).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut seen = 0usize;
    for i in 0..k {
        if seen >> i & 1 == 1 {
            continue;
        }
        let block = seps.iter().filter(|&&m| m >> i & 1 == 1).fold(full, |acc, &m| acc & m);
        seen |= block;
        blocks.push(members(block, k).collect());
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MultiIndex as M;

    fn dp(keys: &[&str]) -> DimensionPolytope {
        DimensionPolytope::new(keys.iter().map(|s| M(s.bytes().map(|b| (b - b'0') as usize).collect()))).unwrap()
    }

    #[test]
    fn factorization_examples() {
        assert_eq!(product_factorization(&dp(&["012", "021"])), vec![vec![0], vec![1, 2]]);
        assert_eq!(product_factorization(&dp(&["111"])), vec![vec![0], vec![1], vec![2]]);
        let octa = dp(&["1100", "1010", "1001", "0110", "0101", "0011"]);
        assert_eq!(product_factorization(&octa), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn octahedron_pairs_look_independent() {
        // each pair projection of the octahedron is a full square, which is
        // why pairwise merging cannot detect that it does not factor
        let octa = dp(&["1100", "1010", "1001", "0110", "0101", "0011"]);
        for a in 0..4 {
            for b in a + 1..4 {
                let pair = octa.project(&[a, b]);
                let pa = octa.project(&[a]).len();
                let pb = octa.project(&[b]).len();
                assert_eq!(pair.len(), pa * pb);
            }
        }
    }

    #[test]
    fn polytope_from_profiles() {
        // cubic: dim 1, each factor a curve
        let cubic = DimensionProfile::from_table(M(vec![1, 1]), vec![0, 1, 1, 1]).unwrap();
        assert_eq!(dimension_polytope(&cubic, &M(vec![1, 1])).unwrap().to_string(), "{01, 10}");
        // surface in four lines with every single projection onto
        let mut t = vec![0; 16];
        for (m, v) in t.iter_mut().enumerate() {
            *v = (m.count_ones() as usize).min(2);
        }
        let p = DimensionProfile::from_table(M(vec![1; 4]), t).unwrap();
        assert_eq!(dimension_polytope(&p, &M(vec![1; 4])).unwrap().len(), 6);
        // Richardson hexagon
        let mut t = vec![0; 8];
        for (m, v) in t.iter_mut().enumerate() {
            *v = [0, 3, 5][(m.count_ones() as usize).min(2)];
        }
        let p = DimensionProfile::from_table(M(vec![3; 3]), t).unwrap();
        let hex = dimension_polytope(&p, &M(vec![3; 3])).unwrap();
        assert_eq!(hex.to_string(), "{023, 032, 113, 122, 131, 203, 212, 221, 230, 302, 311, 320}");
        assert_eq!(product_factorization(&hex).len(), 1);
    }

    #[test]
    fn inconsistent_profiles_rejected() {
        assert!(DimensionProfile::from_table(M(vec![1, 1]), vec![0, 2, 1, 1]).is_err());
        assert!(DimensionProfile::from_table(M(vec![2, 2]), vec![0, 2, 1, 1]).is_err());
    }

    #[test]
    fn slicing_the_polytope() {
        let octa = dp(&["1100", "1010", "1001", "0110", "0101", "0011"]);
        assert_eq!(octa.slice(0).unwrap().to_string(), "{0001, 0010, 0100}");
        assert_eq!(octa.proj_dim(&[0, 1]), 2);
        assert!(dp(&["0011"]).slice(0).is_none());
    }

    #[test]
    fn cubic_profile_at_a_point() {
        let f = crate::fixtures::cubic();
        // (x, y) = (1, 0) lies on y² − 2xy − x³ + x
        let p = vec![Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)];
        let prof = local_multidimension(&f, &p, 1e-8).unwrap();
        assert_eq!((prof.total_dim, prof.proj_dim(&[0]), prof.proj_dim(&[1])), (1, 1, 1));
        let parts = equidim_partition(&f, &[p.clone(), p], 1e-8).unwrap();
        assert_eq!(parts.len(), 1);
        assert!(equidim_partition(&f, &[], 1e-8).unwrap().is_empty());
    }
}
