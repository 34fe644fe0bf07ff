use std::collections::BTreeMap;

use crate::algebra::{AffineForm, Complex, Group, MultiIndex, PolySystem, Polynomial, VariableGrouping};
use crate::error::{Error, Result};
use crate::startsys::solve_zero_dim;
use crate::sysio::{print_system, ArchiveGroup, RandomSource, WitnessArchive, ARCHIVE_VERSION};
use crate::tracker::{TrackOptions, TrackStats};

use super::set::{move_slice, track_slices, witness_set_contains};
use super::{MultidegreeMap, SliceBank, SliceSelection, WitnessSet};

/// Witness point sets `W_e` for several `e` of one total, all cut by
/// prefixes of one slice bank.
///
/// `complete` marks collections whose key set covers every `e` of the total
/// that can be nonempty; a missing key then means `Deg(e) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCollection {
    pub system: PolySystem,
    pub bank: SliceBank,
    pub entries: BTreeMap<MultiIndex, Vec<Vec<Complex>>>,
    pub complete: bool,
}

impl WitnessCollection {
    pub fn grouping(&self) -> &VariableGrouping {
        &self.system.grouping
    }

    /// The common `|e|` of the keys.
    pub fn dim(&self) -> Option<usize> {
        self.entries.keys().next().map(MultiIndex::total)
    }

    pub fn degrees(&self) -> MultidegreeMap {
        self.entries.iter().map(|(k, v)| (k.clone(), v.len() as u64)).collect()
    }

    /// Points of `W_e`; keys absent from a complete collection are empty.
    pub fn points(&self, e: &MultiIndex) -> Result<&[Vec<Complex>]> {
        match self.entries.get(e) {
            Some(p) => Ok(p),
            None if self.complete => Ok(&[]),
            None => Err(Error::MissingEntry(e.compact())),
        }
    }

    pub fn witness_set(&self, e: &MultiIndex) -> Result<WitnessSet> {
        let pts = self.points(e)?.to_vec();
        Ok(WitnessSet::new(self.system.clone(), self.bank.selection(e)?, pts))
    }

    /// Largest residual of any stored point against system and slices.
    pub fn max_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for e in self.entries.keys() {
            worst = worst.max(self.witness_set(e)?.max_residual()?);
        }
        Ok(worst)
    }
}

/// Solve `V(F) ∩ V(L^e)` for every candidate `e` against a fresh bank.
pub fn compute_witness_collection(
    f: &PolySystem,
    candidates: &[MultiIndex],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<WitnessCollection> {
    let bank = SliceBank::random(&f.grouping, rs);
    compute_with_bank(f, bank, candidates, rs, opts)
}

pub fn compute_with_bank(
    f: &PolySystem,
    bank: SliceBank,
    candidates: &[MultiIndex],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<WitnessCollection> {
    let total = candidates.first().map(MultiIndex::total);
    if candidates.iter().any(|e| Some(e.total()) != total) {
        return Err(Error::InvalidArgument("candidate slice vectors must share one total".into()));
    }
    let mut entries = BTreeMap::new();
    for e in candidates {
        let sel = bank.selection(e)?;
        let pts = solve_zero_dim(f, &sel.forms, rs, opts)?;
        if !pts.is_empty() {
            entries.insert(e.clone(), pts);
        }
    }
    let complete = match total {
        Some(d) => MultiIndex::all_with_total(&f.grouping.nvec(), d).iter().all(|e| candidates.contains(e)),
        None => false,
    };
    Ok(WitnessCollection { system: f.clone(), bank, entries, complete })
}

/// Intersect with the first bank form of `group`: the form joins the system,
/// keys drop by `ε_group`, points are reused unchanged.
pub fn slice(wc: &WitnessCollection, group: usize) -> Result<WitnessCollection> {
    if group >= wc.bank.ngroups() {
        return Err(Error::InvalidArgument(format!("no group {group}")));
    }
    let mut bank = wc.bank.clone();
    let entries: BTreeMap<MultiIndex, Vec<Vec<Complex>>> = wc
        .entries
        .iter()
        .filter(|(e, _)| e.get(group) > 0)
        .map(|(e, p)| {
            let mut k = e.0.clone();
            k[group] -= 1;
            (MultiIndex(k), p.clone())
        })
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptySlice(group));
    }
    let form = bank.pop(group).ok_or(Error::EmptySlice(group))?;
    let system = wc.system.extended(&[form.to_poly()]);
    Ok(WitnessCollection { system, bank, entries, complete: wc.complete })
}

/// Old group index → new group index after merging `groups`.
fn merge_map(k: usize, groups: &[usize]) -> Vec<usize> {
    let low = *groups.iter().min().unwrap();
    let mut out = vec![0; k];
    let mut next = 0;
    for (g, slot) in out.iter_mut().enumerate() {
        if groups.contains(&g) && g != low {
            continue;
        }
        *slot = next;
        next += 1;
    }
    for &g in groups {
        out[g] = out[low];
    }
    out
}

/// Outcome of one coarsening run.
#[derive(Clone, Debug)]
pub struct CoarsenReport {
    pub witness: WitnessSet,
    /// Paths of the coarsening homotopy itself (δ of them).
    pub stats: TrackStats,
    /// Paths spent moving bank witness sets to the product start slices.
    pub setup: TrackStats,
}

/// Coarsen by merging `groups` into one group and compute the witness set
/// for `target` (a key of the merged grouping), with `merged_forms` as the
/// slices of the merged group.
///
/// Start points are `⊔_σ W_σ` over maps `σ : {1..e} → groups`, where `W_σ`
/// is cut by `{ℓ^{σ(j)}_j}`; the start system is `M_j = ∏_g ℓ^g_j`.
pub fn coarsen_with_forms(
    wc: &WitnessCollection,
    groups: &[usize],
    target: &MultiIndex,
    merged_forms: &[AffineForm],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<CoarsenReport> {
    let g = wc.grouping();
    let k = g.ngroups();
    let (coarse, merged) = g.merge(groups)?;
    let mut groups = groups.to_vec();
    groups.sort_unstable();
    groups.dedup();
    if target.len() != coarse.ngroups() {
        return Err(Error::DimensionMismatch { expected: coarse.ngroups(), got: target.len() });
    }
    if !target.fits(&coarse.nvec()) {
        return Err(Error::InvalidArgument(format!("slice vector {} exceeds the group sizes", target.compact())));
    }
    if let Some(d) = wc.dim() {
        if d != target.total() {
            return Err(Error::InvalidArgument(format!("target {} must have total {d}", target.compact())));
        }
    }
    let em = target.get(merged);
    if merged_forms.len() != em {
        return Err(Error::DimensionMismatch { expected: em, got: merged_forms.len() });
    }
    let map = merge_map(k, &groups);
    let n = g.nvars();
    // key of the old grouping for given counts on the merged groups
    let old_key = |counts: &[usize]| -> MultiIndex {
        MultiIndex(
            (0..k)
                .map(|j| match groups.iter().position(|&x| x == j) {
                    Some(p) => counts[p],
                    None => target.get(map[j]),
                })
                .collect(),
        )
    };
    // slices of the unmerged groups, in coarse group order
    let mut rest_forms: Vec<(usize, Vec<AffineForm>)> = Vec::new();
    for j in 0..k {
        if !groups.contains(&j) {
            rest_forms.push((map[j], wc.bank.forms(j)[..target.get(map[j])].to_vec()));
        }
    }
    let coarse_forms = |merged_part: Vec<AffineForm>| -> Vec<AffineForm> {
        let mut parts = rest_forms.clone();
        parts.push((merged, merged_part));
        parts.sort_by_key(|(i, _)| *i);
        parts.into_iter().flat_map(|(_, f)| f).collect()
    };
    let system = wc.system.regrouped(coarse.clone())?;
    if em == 0 {
        let pts = wc.points(&old_key(&vec![0; groups.len()]))?.to_vec();
        let sel = SliceSelection::new(target.clone(), coarse_forms(vec![]));
        return Ok(CoarsenReport {
            witness: WitnessSet::new(system, sel, pts),
            stats: TrackStats::default(),
            setup: TrackStats::default(),
        });
    }
    // ℓ^g_j for each merged group g and j = 1..e
    let factor_forms: Vec<Vec<AffineForm>> =
        groups.iter().map(|&gi| (0..em).map(|_| rs.affine_form(n, &g.group(gi).vars)).collect()).collect();
    let mut setup = TrackStats::default();
    let mut starts: Vec<Vec<Complex>> = Vec::new();
    let r = groups.len();
    for code in 0..r.pow(em as u32) {
        let mut sigma = Vec::with_capacity(em);
        let mut c = code;
        for _ in 0..em {
            sigma.push(c % r);
            c /= r;
        }
        let mut counts = vec![0; r];
        for &s in &sigma {
            counts[s] += 1;
        }
        if counts.iter().zip(&groups).any(|(&cnt, &gi)| cnt > g.size(gi)) {
            continue;
        }
        let key = old_key(&counts);
        let pts = wc.points(&key)?;
        if pts.is_empty() {
            continue;
        }
        let ws = WitnessSet::new(wc.system.clone(), wc.bank.selection(&key)?, pts.to_vec());
        // same layout as the bank selection: group by group, bank order
        let mut new_forms = Vec::new();
        for j in 0..k {
            match groups.iter().position(|&x| x == j) {
                Some(p) => {
                    for (idx, &s) in sigma.iter().enumerate() {
                        if s == p {
                            new_forms.push(factor_forms[p][idx].clone());
                        }
                    }
                }
                None => new_forms.extend(wc.bank.forms(j)[..key.get(j)].iter().cloned()),
            }
        }
        let (moved, st) = move_slice(&ws, &new_forms, rs, opts)?;
        setup.add(&st);
        if moved.points.len() != pts.len() {
            return Err(Error::Tracking(format!(
                "moving W_{} to product slices kept {} of {} points",
                key.compact(),
                moved.points.len(),
                pts.len()
            )));
        }
        starts.extend(moved.points);
    }
    let fixed: Vec<Polynomial> = rest_forms.iter().flat_map(|(_, f)| f.iter().map(AffineForm::to_poly)).collect();
    let start: Vec<Polynomial> = (0..em)
        .map(|j| {
            factor_forms
                .iter()
                .fold(Polynomial::constant(n, Complex::new(1.0, 0.0)), |acc, fs| acc.mul(&fs[j].to_poly()))
        })
        .collect();
    let target_polys: Vec<Polynomial> = merged_forms.iter().map(AffineForm::to_poly).collect();
    let tr = track_slices(&wc.system, &fixed, &start, &target_polys, &starts, rs, opts)?;
    let sel = SliceSelection::new(target.clone(), coarse_forms(merged_forms.to_vec()));
    Ok(CoarsenReport { witness: WitnessSet::new(system, sel, tr.points), stats: tr.stats, setup })
}

/// [`coarsen_with_forms`] with random slices for the merged group.
pub fn coarsen(
    wc: &WitnessCollection,
    groups: &[usize],
    target: &MultiIndex,
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<CoarsenReport> {
    let (coarse, merged) = wc.grouping().merge(groups)?;
    let n = coarse.nvars();
    let em = target.0.get(merged).copied().unwrap_or(0);
    let forms: Vec<AffineForm> = (0..em).map(|_| rs.affine_form(n, &coarse.group(merged).vars)).collect();
    coarsen_with_forms(wc, groups, target, &forms, rs, opts)
}

/// Coarsen a whole collection. The new bank keeps the forms of unmerged
/// groups and draws fresh forms for the merged group.
pub fn coarsen_collection(
    wc: &WitnessCollection,
    groups: &[usize],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<(WitnessCollection, BTreeMap<MultiIndex, CoarsenReport>)> {
    let d = wc.dim().ok_or_else(|| Error::InvalidArgument("empty witness collection".into()))?;
    if !wc.complete {
        return Err(Error::MissingEntry("coarsening needs a complete collection".into()));
    }
    let g = wc.grouping();
    let (coarse, merged) = g.merge(groups)?;
    let mut sorted = groups.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let n = g.nvars();
    let mut bank = wc.bank.clone();
    for &gi in sorted.iter().rev() {
        bank.remove_group(gi);
    }
    let fresh: Vec<AffineForm> =
        (0..coarse.size(merged)).map(|_| rs.affine_form(n, &coarse.group(merged).vars)).collect();
    bank.insert_group(merged, fresh.clone());
    let bank = SliceBank::from_forms(
        wc.bank.seed(),
        &coarse,
        (0..coarse.ngroups()).map(|i| bank.forms(i).to_vec()).collect(),
    )?;
    let mut entries = BTreeMap::new();
    let mut reports = BTreeMap::new();
    for key in MultiIndex::all_with_total(&coarse.nvec(), d) {
        let em = key.get(merged);
        let rep = coarsen_with_forms(wc, &sorted, &key, &fresh[..em], rs, opts)?;
        if !rep.witness.points.is_empty() {
            entries.insert(key.clone(), rep.witness.points.clone());
        }
        reports.insert(key, rep);
    }
    let system = wc.system.regrouped(coarse)?;
    Ok((WitnessCollection { system, bank, entries, complete: true }, reports))
}

/// Whether `point` lies on the variety represented by `wc`.
pub fn membership(
    wc: &WitnessCollection,
    point: &[Complex],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<bool> {
    if point.len() != wc.system.nvars() {
        return Err(Error::DimensionMismatch { expected: wc.system.nvars(), got: point.len() });
    }
    if wc.system.relative_residual(point)? > 1e-6 {
        return Ok(false);
    }
    for e in wc.entries.keys() {
        if witness_set_contains(&wc.witness_set(e)?, point, rs, opts)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn flatten(points: &[Vec<Complex>]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().flat_map(|z| [z.re, z.im]).collect()).collect()
}

fn unflatten(row: &[f64]) -> Vec<Complex> {
    row.chunks(2).map(|c| Complex::new(c[0], c[1])).collect()
}

impl WitnessCollection {
    pub fn to_archive(&self, seed: u64) -> WitnessArchive {
        let g = self.grouping();
        let groups = g
            .groups()
            .iter()
            .map(|gr| ArchiveGroup {
                name: gr.name.clone(),
                vars: gr.vars.iter().map(|&v| g.names()[v].clone()).collect(),
            })
            .collect();
        let slices = (0..g.ngroups())
            .map(|i| {
                let rows = self
                    .bank
                    .forms(i)
                    .iter()
                    .map(|f| {
                        let mut row = vec![f.constant.re, f.constant.im];
                        for &v in &g.group(i).vars {
                            row.extend([f.coeffs[v].re, f.coeffs[v].im]);
                        }
                        row
                    })
                    .collect();
                (g.group(i).name.clone(), rows)
            })
            .collect();
        let witness = self.entries.iter().map(|(k, p)| (k.comma(), flatten(p))).collect();
        WitnessArchive {
            version: ARCHIVE_VERSION,
            seed,
            groups,
            system: print_system(&self.system, None),
            slices,
            witness,
        }
    }

    pub fn from_archive(a: &WitnessArchive) -> Result<WitnessCollection> {
        let doc = crate::sysio::parse_system(&a.system)?;
        let names = doc.system.grouping.names().to_vec();
        let mut groups = Vec::new();
        for ag in &a.groups {
            let vars = ag
                .vars
                .iter()
                .map(|v| {
                    names.iter().position(|n| n == v).ok_or_else(|| Error::Archive(format!("unknown variable {v}")))
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(Group { name: ag.name.clone(), vars });
        }
        let grouping = VariableGrouping::new(names, groups).map_err(|e| Error::Archive(e.to_string()))?;
        let n = grouping.nvars();
        let system = doc.system.regrouped(grouping.clone())?;
        let mut forms = Vec::new();
        for gr in grouping.groups() {
            let rows = a.slices.get(&gr.name).cloned().unwrap_or_default();
            let mut fs = Vec::new();
            for row in rows {
                let vals = unflatten(&row);
                let mut coeffs = vec![Complex::new(0.0, 0.0); n];
                for (&v, c) in gr.vars.iter().zip(&vals[1..]) {
                    coeffs[v] = *c;
                }
                fs.push(AffineForm::new(vals[0], coeffs));
            }
            forms.push(fs);
        }
        let bank = SliceBank::from_forms(a.seed, &grouping, forms)?;
        let mut entries = BTreeMap::new();
        for (k, rows) in &a.witness {
            let e = MultiIndex::parse(k, grouping.ngroups()).map_err(|e| Error::Archive(e.to_string()))?;
            if !e.fits(&bank.available()) {
                return Err(Error::Archive(format!("key {k} exceeds the stored slices")));
            }
            entries.insert(e, rows.iter().map(|r| unflatten(r)).collect());
        }
        Ok(WitnessCollection { system, bank, entries, complete: true })
    }
}
