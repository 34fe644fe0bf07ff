use crate::algebra::{points_match, AffineForm, Complex, MultiIndex, PolySystem, Polynomial};
use crate::error::{Error, Result};
use crate::startsys::square_up;
use crate::sysio::RandomSource;
use crate::tracker::{track_many, Homotopy, PathResult, TrackOptions, TrackStats};

use super::SliceSelection;

/// Residual bound every stored witness point satisfies.
pub const WITNESS_RESIDUAL: f64 = 1e-8;

/// `(F, L, V(F) ∩ V(L))` for one slice selection.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSet {
    pub system: PolySystem,
    pub selection: SliceSelection,
    pub points: Vec<Vec<Complex>>,
}

impl WitnessSet {
    pub fn new(system: PolySystem, selection: SliceSelection, points: Vec<Vec<Complex>>) -> Self {
        WitnessSet { system, selection, points }
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    /// Largest relative residual of any point on the system and the slices.
    pub fn max_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in &self.points {
            worst = worst.max(self.system.relative_residual(p)?).max(self.selection.max_residual(p));
        }
        Ok(worst)
    }
}

/// Result of moving a point set along a slice homotopy.
#[derive(Clone, Debug)]
pub struct Tracked {
    pub points: Vec<Vec<Complex>>,
    /// Endpoint (when kept) for every input index, in input order.
    pub endpoints: Vec<Option<Vec<Complex>>>,
    pub results: Vec<PathResult>,
    pub stats: TrackStats,
}

/// Track `points` of `V(F) ∩ V(start)` to `V(F) ∩ V(target)` under
/// `(RF, fixed, γ·t·start + (1−t)·target)`, where `RF` is `F` squared up to
/// fill the remaining equations.
///
/// Converged endpoints are kept when they satisfy the original `F`, `fixed`
/// and `target`; duplicates are dropped from `points` (but stay in
/// `endpoints`).
pub fn track_slices(
    f: &PolySystem,
    fixed: &[Polynomial],
    start: &[Polynomial],
    target: &[Polynomial],
    points: &[Vec<Complex>],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<Tracked> {
    let n = f.nvars();
    let need = n
        .checked_sub(fixed.len() + start.len())
        .ok_or_else(|| Error::InvalidArgument("more slices than variables".into()))?;
    if f.len() < need {
        return Err(Error::InvalidArgument(format!(
            "{} equations cannot fill {need} rows of a slice homotopy",
            f.len()
        )));
    }
    let mut block = square_up(&f.polys, need, rs);
    block.extend(fixed.iter().cloned());
    let gamma = rs.unit_complex();
    if points.is_empty() {
        return Ok(Tracked { points: vec![], endpoints: vec![], results: vec![], stats: TrackStats::default() });
    }
    let h = Homotopy::new(n, &block, start, target, gamma)?;
    let results = track_many(&h, points, opts);
    let stats = TrackStats::from_results(&results);
    let check = f.extended(fixed).extended(target);
    let mut kept: Vec<Vec<Complex>> = Vec::new();
    let mut endpoints = Vec::with_capacity(results.len());
    for r in &results {
        let ok = match r.converged() {
            Some(x) => check.relative_residual(x)? < WITNESS_RESIDUAL,
            None => false,
        };
        if ok {
            if !kept.iter().any(|p| points_match(p, &r.endpoint, opts.match_tol)) {
                kept.push(r.endpoint.clone());
            }
            endpoints.push(Some(r.endpoint.clone()));
        } else {
            endpoints.push(None);
        }
    }
    Ok(Tracked { points: kept, endpoints, results, stats })
}

const MOVE_ATTEMPTS: usize = 3;

/// Move a witness set to new slices with the same per-group counts.
pub fn move_slice(
    ws: &WitnessSet,
    new_forms: &[AffineForm],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<(WitnessSet, TrackStats)> {
    if new_forms.len() != ws.selection.len() {
        return Err(Error::DimensionMismatch { expected: ws.selection.len(), got: new_forms.len() });
    }
    if new_forms == ws.selection.forms.as_slice() {
        return Ok((ws.clone(), TrackStats::default()));
    }
    let target: Vec<Polynomial> = new_forms.iter().map(AffineForm::to_poly).collect();
    // every path of a general move stays finite; a loss means the real path
    // passed close to a singular parameter, so try again with a fresh gamma
    let mut stats = TrackStats::default();
    let mut best: Vec<Vec<Complex>> = Vec::new();
    for _ in 0..MOVE_ATTEMPTS {
        let tr = track_slices(&ws.system, &[], &ws.selection.polys(), &target, &ws.points, rs, opts)?;
        stats.add(&tr.stats);
        if tr.points.len() > best.len() {
            best = tr.points;
        }
        if best.len() >= ws.points.len() {
            break;
        }
    }
    let sel = SliceSelection::new(ws.selection.e.clone(), new_forms.to_vec());
    Ok((WitnessSet::new(ws.system.clone(), sel, best), stats))
}

/// Split group `group` of the witness set's grouping into `first_vars` and
/// the rest, and move the witness points to the slice pattern `target_e` of
/// the refined grouping. Paths that diverge correspond to points that do not
/// persist under the finer structure.
pub fn refine(
    ws: &WitnessSet,
    group: usize,
    first_vars: &[usize],
    target_e: &MultiIndex,
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<(WitnessSet, TrackStats)> {
    let g = &ws.system.grouping;
    let fine = g.split(group, first_vars)?;
    let e = &ws.selection.e;
    if target_e.len() != fine.ngroups() || e.len() != g.ngroups() {
        return Err(Error::DimensionMismatch { expected: fine.ngroups(), got: target_e.len() });
    }
    for j in 0..g.ngroups() {
        let (lo, hi) = match j.cmp(&group) {
            std::cmp::Ordering::Less => (target_e.get(j), target_e.get(j)),
            std::cmp::Ordering::Equal => (target_e.get(j), target_e.get(j + 1)),
            std::cmp::Ordering::Greater => (target_e.get(j + 1), target_e.get(j + 1)),
        };
        let want = if j == group { lo + hi } else { lo };
        if want != e.get(j) || (j != group && lo != hi) {
            return Err(Error::InvalidArgument(format!(
                "refined slice vector {} does not match {}",
                target_e.compact(),
                e.compact()
            )));
        }
    }
    if !target_e.fits(&fine.nvec()) {
        return Err(Error::InvalidArgument(format!("slice vector {} exceeds the group sizes", target_e.compact())));
    }
    let n = g.nvars();
    // the selection lists forms group by group; locate group `group`'s block
    let offset: usize = (0..group).map(|j| e.get(j)).sum();
    let count = e.get(group);
    let mut fixed = Vec::new();
    for (i, f) in ws.selection.forms.iter().enumerate() {
        if i < offset || i >= offset + count {
            fixed.push(f.to_poly());
        }
    }
    let start: Vec<Polynomial> = ws.selection.forms[offset..offset + count].iter().map(AffineForm::to_poly).collect();
    let mut new_forms: Vec<AffineForm> = Vec::new();
    for part in [group, group + 1] {
        for _ in 0..target_e.get(part) {
            new_forms.push(rs.affine_form(n, &fine.group(part).vars));
        }
    }
    let target: Vec<Polynomial> = new_forms.iter().map(AffineForm::to_poly).collect();
    let tr = track_slices(&ws.system, &fixed, &start, &target, &ws.points, rs, opts)?;
    let mut forms = ws.selection.forms[..offset].to_vec();
    forms.extend(new_forms);
    forms.extend(ws.selection.forms[offset + count..].iter().cloned());
    let system = ws.system.regrouped(fine)?;
    Ok((WitnessSet::new(system, SliceSelection::new(target_e.clone(), forms), tr.points), tr.stats))
}

/// Whether `point` lies on the variety of one witness set: move the slices
/// to general slices through `point` and look for it among the endpoints.
pub fn witness_set_contains(
    ws: &WitnessSet,
    point: &[Complex],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<bool> {
    if point.len() != ws.system.nvars() {
        return Err(Error::DimensionMismatch { expected: ws.system.nvars(), got: point.len() });
    }
    if ws.points.iter().any(|p| points_match(p, point, opts.match_tol)) {
        return Ok(true);
    }
    if ws.points.is_empty() {
        return Ok(false);
    }
    let n = ws.system.nvars();
    let new_forms: Vec<AffineForm> =
        ws.selection.forms.iter().map(|f| rs.affine_form(n, &f.support()).through(point)).collect();
    let target: Vec<Polynomial> = new_forms.iter().map(AffineForm::to_poly).collect();
    let tr = track_slices(&ws.system, &[], &ws.selection.polys(), &target, &ws.points, rs, opts)?;
    if tr.endpoints.iter().flatten().any(|p| points_match(p, point, opts.match_tol)) {
        return Ok(true);
    }
    if tr.stats.failed > 0 {
        return Err(Error::Indeterminate(format!("{} of {} membership paths failed", tr.stats.failed, tr.stats.paths)));
    }
    Ok(false)
}
