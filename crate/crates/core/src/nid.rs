//! Numerical irreducible decomposition: breakup of affine curve witness
//! sets, and sorting of general points of a multiaffine variety by
//! irreducible component.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::algebra::{points_match, AffineForm, Complex, MultiIndex, PolySystem, Polynomial};
use crate::dimension::{dimension_polytope, equidim_partition, DimensionPolytope, DimensionProfile};
use crate::error::{Error, Result};
use crate::monodromy::{breakup, grow_witness, MonodromyOptions};
use crate::sysio::RandomSource;
use crate::tracker::TrackOptions;
use crate::witness::{membership, track_slices, SliceBank, SliceSelection, WitnessCollection, WitnessSet};

/// One part of a curve witness set.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePart {
    pub indices: Vec<usize>,
    pub degree: usize,
    pub certified: bool,
}

/// Decompose a complete witness set of an equidimensional affine variety.
pub fn nid_curve_affine(ws: &WitnessSet, rs: &mut RandomSource, mopts: &MonodromyOptions) -> Result<Vec<CurvePart>> {
    let st = breakup(ws, rs, mopts)?;
    Ok(st
        .partition
        .iter()
        .zip(&st.certified)
        .map(|(p, &c)| CurvePart { indices: p.clone(), degree: p.len(), certified: c })
        .collect())
}

/// How a component is cut down to an irreducible affine curve.
#[derive(Clone, Debug, PartialEq)]
pub struct SlicePlan {
    /// Slices per group that keep irreducibility.
    pub m: MultiIndex,
    /// Polytope after those slices; every `π_i` has dimension at most one.
    pub sliced: DimensionPolytope,
    pub e: MultiIndex,
    /// Groups with `e_i = 1`, ordered so that the first `j` of them project
    /// onto a `j`-dimensional image.
    pub order: Vec<usize>,
}

/// Slice group `i` (ascending) while its projection has dimension ≥ 2, then
/// pick the lexicographically smallest `e` of the sliced polytope.
pub fn slice_plan(dp: &DimensionPolytope) -> Result<SlicePlan> {
    let k = dp.ngroups();
    let mut cur = dp.clone();
    let mut m = vec![0; k];
    for (i, mi) in m.iter_mut().enumerate() {
        while cur.proj_dim(&[i]) >= 2 {
            cur = cur.slice(i).ok_or_else(|| Error::Inconsistent(format!("slicing group {i} emptied the polytope")))?;
            *mi += 1;
        }
    }
    let e = cur.points.iter().next().cloned().ok_or_else(|| Error::Inconsistent("empty polytope".into()))?;
    if e.0.iter().any(|&v| v > 1) {
        return Err(Error::Inconsistent(format!("sliced polytope contains {}", e.compact())));
    }
    let order: Vec<usize> = (0..k).filter(|&i| e.get(i) == 1).collect();
    for j in 1..=order.len() {
        if cur.proj_dim(&order[..j]) != j {
            return Err(Error::Inconsistent(format!(
                "projection to the first {j} sliced groups is not {j}-dimensional"
            )));
        }
    }
    Ok(SlicePlan { m: MultiIndex(m), sliced: cur, e, order })
}

/// An irreducible component found by [`nid_multi`].
#[derive(Clone, Debug)]
pub struct ComponentRecord {
    pub profile: DimensionProfile,
    pub polytope: DimensionPolytope,
    pub plan: SlicePlan,
    /// `L`: the slices `L^m` followed by `ℓ_1 … ℓ_{|e|-1}`, all through the
    /// representative.
    pub forms: Vec<AffineForm>,
    /// Witness set of the curve `X_p ∩ V(L)` for one more general slice.
    pub curve: WitnessSet,
    pub certified: bool,
    pub representative: Vec<Complex>,
    /// Indices of the input points on this component.
    pub members: Vec<usize>,
}

impl ComponentRecord {
    pub fn curve_degree(&self) -> usize {
        self.curve.points.len()
    }

    /// Whether `q` lies on this component: move every slice to pass
    /// through `q` and look for `q` among the endpoints.
    pub fn contains(&self, f: &PolySystem, q: &[Complex], rs: &mut RandomSource, opts: &TrackOptions) -> Result<bool> {
        if f.relative_residual(q)? > 1e-6 {
            return Ok(false);
        }
        let all: Vec<&AffineForm> = self.forms.iter().chain(&self.curve.selection.forms).collect();
        let start: Vec<Polynomial> = all.iter().map(|l| l.to_poly()).collect();
        let target: Vec<Polynomial> = all.iter().map(|l| l.through(q).to_poly()).collect();
        let tr = track_slices(f, &[], &start, &target, &self.curve.points, rs, opts)?;
        if tr.endpoints.iter().flatten().any(|x| points_match(x, q, opts.match_tol)) {
            return Ok(true);
        }
        if tr.stats.failed > 0 {
            return Err(Error::Indeterminate(format!(
                "{} of {} membership paths failed",
                tr.stats.failed, tr.stats.paths
            )));
        }
        Ok(false)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "profile": self.profile.to_json(),
            "polytope": self.polytope.to_json(),
            "m": self.plan.m.compact(),
            "e": self.plan.e.compact(),
            "order": self.plan.order.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "curve_degree": self.curve_degree(),
            "certified": self.certified,
            "points": self.members,
        })
    }
}

/// Output of [`nid_multi`].
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub components: Vec<ComponentRecord>,
    /// Component index of every input point.
    pub assignment: Vec<usize>,
}

impl Decomposition {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.components.iter().map(|c| c.members.len()).collect();
        s.sort_unstable();
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "components": self.components.iter().map(ComponentRecord::to_json).collect::<Vec<_>>(),
            "assignment": self.assignment,
        })
    }
}

/// Cut the component through `p` down to a curve and complete its witness
/// set by monodromy from `p`.
fn build_component(
    f: &PolySystem,
    p: &[Complex],
    profile: &DimensionProfile,
    polytope: &DimensionPolytope,
    rs: &mut RandomSource,
    mopts: &MonodromyOptions,
) -> Result<ComponentRecord> {
    let plan = slice_plan(polytope)?;
    let g = &f.grouping;
    let n = f.nvars();
    let mut forms = Vec::new();
    for i in 0..g.ngroups() {
        for _ in 0..plan.m.get(i) {
            forms.push(rs.affine_form(n, &g.group(i).vars).through(p));
        }
    }
    for j in 1..plan.order.len() {
        let vars: Vec<usize> = plan.order[..=j].iter().flat_map(|&i| g.group(i).vars.iter().copied()).collect();
        forms.push(rs.affine_form(n, &vars).through(p));
    }
    let all: Vec<usize> = (0..n).collect();
    let ell = rs.affine_form(n, &all).through(p);
    let lpolys: Vec<Polynomial> = forms.iter().map(AffineForm::to_poly).collect();
    let curve_sys = f.extended(&lpolys);
    let seed = WitnessSet::new(curve_sys, SliceSelection::new(plan.e.clone(), vec![ell]), vec![p.to_vec()]);
    let grown = grow_witness(&seed, true, rs, mopts)?;
    Ok(ComponentRecord {
        profile: profile.clone(),
        polytope: polytope.clone(),
        plan,
        forms,
        curve: grown.witness,
        certified: grown.stable,
        representative: p.to_vec(),
        members: vec![],
    })
}

/// Sort general smooth points of `V(F)` by irreducible component.
pub fn nid_multi(
    f: &PolySystem,
    points: &[Vec<Complex>],
    rs: &mut RandomSource,
    mopts: &MonodromyOptions,
) -> Result<Decomposition> {
    let nvec = f.grouping.nvec();
    let mut components: Vec<ComponentRecord> = Vec::new();
    let mut assignment = vec![usize::MAX; points.len()];
    for (profile, idx) in equidim_partition(f, points, mopts.rank_tol)? {
        let dp = dimension_polytope(&profile, &nvec)?;
        let mut remaining = idx;
        while let Some(&pi) = remaining.first() {
            let mut rec = build_component(f, &points[pi], &profile, &dp, rs, mopts)?;
            let mut members = vec![pi];
            for &q in &remaining[1..] {
                if rec.contains(f, &points[q], rs, &mopts.track)? {
                    members.push(q);
                }
            }
            remaining.retain(|i| !members.contains(i));
            for &q in &members {
                assignment[q] = components.len();
            }
            rec.members = members;
            components.push(rec);
        }
    }
    Ok(Decomposition { components, assignment })
}

/// Per-factor and combined answers of [`membership_product`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductMembership {
    pub factors: Vec<bool>,
    pub combined: bool,
}

/// Witness collection of the factor of `wc` on the groups `block`, cut out
/// by `F` with the other coordinates fixed at a witness point.
pub fn factor_collection(wc: &WitnessCollection, block: &[usize]) -> Result<(WitnessCollection, Vec<usize>)> {
    let g = wc.grouping();
    let n = g.nvars();
    let anchor = wc
        .entries
        .values()
        .flat_map(|v| v.first())
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty witness collection".into()))?
        .clone();
    let mut block = block.to_vec();
    block.sort_unstable();
    let (sub, old) = g.restrict(&block)?;
    let values: Vec<Option<Complex>> =
        (0..n).map(|v| if old.binary_search(&v).is_ok() { None } else { Some(anchor[v]) }).collect();
    let polys: Vec<Polynomial> = wc
        .system
        .polys
        .iter()
        .map(|p| p.substitute(&values, &old))
        .filter(|p| p.terms().any(|(e, _)| e.degree() > 0))
        .collect();
    let system = PolySystem::new(polys, sub.clone())?;
    let restrict = |f: &AffineForm| AffineForm::new(f.constant, old.iter().map(|&v| f.coeffs[v]).collect());
    let forms = block.iter().map(|&gi| wc.bank.forms(gi).iter().map(restrict).collect()).collect();
    let bank = SliceBank::from_forms(wc.bank.seed(), &sub, forms)?;
    let mut entries: BTreeMap<MultiIndex, Vec<Vec<Complex>>> = BTreeMap::new();
    for (e, pts) in &wc.entries {
        let key = MultiIndex(block.iter().map(|&i| e.get(i)).collect());
        let slot = entries.entry(key).or_default();
        for p in pts {
            let q: Vec<Complex> = old.iter().map(|&v| p[v]).collect();
            if !slot.iter().any(|s| points_match(s, &q, 1e-8)) {
                slot.push(q);
            }
        }
    }
    Ok((WitnessCollection { system, bank, entries, complete: wc.complete }, old))
}

/// Membership in `X = X_1 × … × X_r` factor by factor, for the blocks of a
/// product factorization of `Dim(X)`.
pub fn membership_product(
    wc: &WitnessCollection,
    point: &[Complex],
    blocks: &[Vec<usize>],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<ProductMembership> {
    if point.len() != wc.system.nvars() {
        return Err(Error::DimensionMismatch { expected: wc.system.nvars(), got: point.len() });
    }
    let mut factors = Vec::with_capacity(blocks.len());
    for block in blocks {
        let (fc, old) = factor_collection(wc, block)?;
        let q: Vec<Complex> = old.iter().map(|&v| point[v]).collect();
        factors.push(membership(&fc, &q, rs, opts)?);
    }
    let combined = factors.iter().all(|&b| b);
    Ok(ProductMembership { factors, combined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::startsys::solve_zero_dim;
    use crate::witness::compute_witness_collection;

    fn dp(keys: &[&str]) -> DimensionPolytope {
        DimensionPolytope::new(keys.iter().map(|s| MultiIndex(s.bytes().map(|b| (b - b'0') as usize).collect())))
            .unwrap()
    }

    #[test]
    fn plans() {
        let octa = slice_plan(&dp(&["1100", "1010", "1001", "0110", "0101", "0011"])).unwrap();
        assert_eq!(
            (octa.m.compact(), octa.e.compact(), octa.order.clone()),
            ("0000".into(), "0011".into(), vec![2, 3])
        );
        let rich =
            slice_plan(&dp(&["023", "032", "113", "122", "131", "203", "212", "221", "230", "302", "311", "320"]))
                .unwrap();
        assert_eq!(rich.m.total() + rich.e.total(), 5);
        assert!(rich.sliced.points.iter().all(|e| e.0.iter().all(|&v| v <= 1)));
    }

    #[test]
    fn crossing_lines_split() {
        let f = fixtures::crossing_lines();
        let mut rs = RandomSource::new(8, 0);
        let bank = SliceBank::random(&f.grouping, &mut rs);
        let sel = bank.selection(&MultiIndex(vec![1])).unwrap();
        let pts = solve_zero_dim(&f, &sel.forms, &mut rs, &TrackOptions::default()).unwrap();
        let ws = WitnessSet::new(f.clone(), sel, pts.clone());
        let parts = nid_curve_affine(&ws, &mut rs, &MonodromyOptions::default()).unwrap();
        assert_eq!(parts.iter().map(|p| p.degree).collect::<Vec<_>>(), vec![1, 1]);
        let d = nid_multi(&f, &pts, &mut rs, &MonodromyOptions::default()).unwrap();
        assert_eq!(d.sizes(), vec![1, 1]);
        assert!(d.components.iter().all(|c| c.certified));
    }

    #[test]
    fn point_times_surface_membership() {
        let f = fixtures::point_times_surface();
        let mut rs = RandomSource::new(9, 0);
        let keys = [MultiIndex(vec![0, 1, 2]), MultiIndex(vec![0, 2, 1])];
        let wc = compute_witness_collection(&f, &keys, &mut rs, &TrackOptions::default()).unwrap();
        assert_eq!(wc.degrees().len(), 2);
        let blocks =
            crate::dimension::product_factorization(&DimensionPolytope::new(wc.entries.keys().cloned()).unwrap());
        assert_eq!(blocks, vec![vec![0], vec![1, 2]]);
        let w = wc.entries.values().next().unwrap()[0].clone();
        let opts = TrackOptions::default();
        let r = membership_product(&wc, &w, &blocks, &mut rs, &opts).unwrap();
        assert_eq!(r, ProductMembership { factors: vec![true, true], combined: true });
        let mut bad = w.clone();
        bad[0] = Complex::new(0.5, 0.0);
        let r = membership_product(&wc, &bad, &blocks, &mut rs, &opts).unwrap();
        assert_eq!(r, ProductMembership { factors: vec![false, true], combined: false });
        let mut off = w.clone();
        off[4] += Complex::new(0.25, -0.5);
        let r = membership_product(&wc, &off, &blocks, &mut rs, &opts).unwrap();
        assert_eq!(r, ProductMembership { factors: vec![true, false], combined: false });
    }
}
