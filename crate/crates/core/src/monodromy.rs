//! Monodromy loops, completion of partial witness sets, breakup into
//! irreducible pieces and the linear trace test.

use std::collections::{BTreeMap, HashSet};

use crate::algebra::{norm, points_match, AffineForm, Complex, MultiIndex, PolySystem, Polynomial, DEFAULT_RANK_TOL};
use crate::dimension::{dimension_polytope, local_multidimension};
use crate::error::{Error, Result};
use crate::sysio::RandomSource;
use crate::tracker::{TrackOptions, TrackStats};
use crate::witness::{track_slices, SliceBank, SliceSelection, WitnessCollection, WitnessSet};

/// Knobs for loops, stopping rules and the trace test.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyOptions {
    pub track: TrackOptions,
    /// Loop budget per completion or breakup.
    pub max_loops: usize,
    /// Consecutive loops without new points before a set counts as stable.
    pub stable_loops: usize,
    pub trace_tol: f64,
    pub s1: f64,
    pub s2: f64,
    pub rank_tol: f64,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        MonodromyOptions {
            track: TrackOptions::default(),
            max_loops: 60,
            stable_loops: 5,
            trace_tol: 1e-9,
            s1: 0.5,
            s2: 1.0,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// The intermediate slices of a loop `L → L′ → L″ → L`.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSpec {
    pub first: SliceSelection,
    pub second: SliceSelection,
    pub opts: TrackOptions,
}

impl LoopSpec {
    /// Two random selections with the supports of `sel`, drawn from
    /// independent child streams.
    pub fn random(sel: &SliceSelection, rs: &mut RandomSource, opts: &TrackOptions) -> Self {
        let label = (rs.uniform() * 9.007_199_254_740_992e15) as u64;
        let mut a = rs.child(2 * label);
        let mut b = rs.child(2 * label + 1);
        let draw = |r: &mut RandomSource| {
            let forms = sel.forms.iter().map(|f| r.affine_form(f.coeffs.len(), &f.support())).collect();
            SliceSelection::new(sel.e.clone(), forms)
        };
        LoopSpec { first: draw(&mut a), second: draw(&mut b), opts: opts.clone() }
    }

    /// The loop that never leaves `sel`.
    pub fn trivial(sel: &SliceSelection, opts: &TrackOptions) -> Self {
        LoopSpec { first: sel.clone(), second: sel.clone(), opts: opts.clone() }
    }
}

/// Result of one loop.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopOutcome {
    /// `perm[i]` is the start index the path from point `i` returned to;
    /// `None` for failed paths and for endpoints that are new points.
    pub perm: Vec<Option<usize>>,
    pub new_points: Vec<Vec<Complex>>,
    pub stats: TrackStats,
}

/// Track each point through consecutive slice legs; `None` once a path fails.
fn track_legs(
    f: &PolySystem,
    legs: &[&SliceSelection],
    points: &[Vec<Complex>],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<(Vec<Option<Vec<Complex>>>, TrackStats)> {
    let mut cur: Vec<Option<Vec<Complex>>> = points.iter().cloned().map(Some).collect();
    let mut stats = TrackStats::default();
    for w in legs.windows(2) {
        if w[0].forms == w[1].forms {
            continue;
        }
        let idx: Vec<usize> = (0..cur.len()).filter(|&i| cur[i].is_some()).collect();
        let starts: Vec<Vec<Complex>> = idx.iter().map(|&i| cur[i].clone().unwrap()).collect();
        let tr = track_slices(f, &[], &w[0].polys(), &w[1].polys(), &starts, rs, opts)?;
        stats.add(&tr.stats);
        for (k, &i) in idx.iter().enumerate() {
            cur[i] = tr.endpoints[k].clone();
        }
    }
    Ok((cur, stats))
}

/// Move the points of `ws` around `lp` and read off the permutation.
///
/// An endpoint within matching tolerance of two start points, or two
/// endpoints at one point, abort the loop with [`Error::Indeterminate`].
pub fn monodromy_permutation(ws: &WitnessSet, lp: &LoopSpec, rs: &mut RandomSource) -> Result<LoopOutcome> {
    let sel = &ws.selection;
    if lp.first.len() != sel.len() || lp.second.len() != sel.len() {
        return Err(Error::DimensionMismatch { expected: sel.len(), got: lp.first.len() });
    }
    let tol = lp.opts.match_tol;
    let (ends, stats) = track_legs(&ws.system, &[sel, &lp.first, &lp.second, sel], &ws.points, rs, &lp.opts)?;
    let mut perm = vec![None; ends.len()];
    let mut new_points: Vec<Vec<Complex>> = Vec::new();
    let mut hit = vec![false; ws.points.len()];
    for (i, end) in ends.iter().enumerate() {
        let Some(x) = end else { continue };
        let cands: Vec<usize> = (0..ws.points.len()).filter(|&j| points_match(x, &ws.points[j], tol)).collect();
        match cands.as_slice() {
            [] => {
                if new_points.iter().any(|p| points_match(p, x, tol)) {
                    return Err(Error::Indeterminate("two loop endpoints coincide at a new point".into()));
                }
                new_points.push(x.clone());
            }
            [j] => {
                if hit[*j] {
                    return Err(Error::Indeterminate(format!("two loop endpoints return to start point {j}")));
                }
                hit[*j] = true;
                perm[i] = Some(*j);
            }
            _ => return Err(Error::Indeterminate(format!("loop endpoint {i} matches several start points"))),
        }
    }
    Ok(LoopOutcome { perm, new_points, stats })
}

/// A pencil form for the trace test: a random unit constant.
pub fn trace_pencil(nvars: usize, rs: &mut RandomSource) -> AffineForm {
    AffineForm::new(rs.unit_complex(), vec![Complex::new(0.0, 0.0); nvars])
}

fn centroid(points: &[Vec<Complex>]) -> Vec<Complex> {
    let n = points[0].len();
    let mut c = vec![Complex::new(0.0, 0.0); n];
    for p in points {
        for (a, b) in c.iter_mut().zip(p) {
            *a += b;
        }
    }
    let k = points.len() as f64;
    c.iter().map(|z| z / k).collect()
}

/// Linear trace test: replace the first slice form `ℓ` by `ℓ + s·pencil`,
/// move `part` to `s1` and `s2`, and check that the centroid moves linearly
/// in `s`. Only meaningful for affine slice data.
pub fn trace_test(
    f: &PolySystem,
    selection: &SliceSelection,
    pencil: &AffineForm,
    part: &[Vec<Complex>],
    rs: &mut RandomSource,
    mopts: &MonodromyOptions,
) -> Result<bool> {
    if selection.is_empty() {
        return Err(Error::InvalidArgument("trace test needs at least one slice form".into()));
    }
    if part.is_empty() {
        return Err(Error::InvalidArgument("trace test of an empty part".into()));
    }
    let fixed: Vec<Polynomial> = selection.forms[1..].iter().map(AffineForm::to_poly).collect();
    let l0 = &selection.forms[0];
    let start = [l0.to_poly()];
    let mut cents = vec![centroid(part)];
    for s in [mopts.s1, mopts.s2] {
        let moved = AffineForm::new(
            l0.constant + pencil.constant * s,
            l0.coeffs.iter().zip(&pencil.coeffs).map(|(a, b)| a + b * s).collect(),
        );
        let tr = track_slices(f, &fixed, &start, &[moved.to_poly()], part, rs, &mopts.track)?;
        let ends: Vec<Vec<Complex>> = tr.endpoints.into_iter().flatten().collect();
        if ends.len() != part.len() {
            return Err(Error::Indeterminate(format!(
                "{} of {} trace paths failed",
                part.len() - ends.len(),
                part.len()
            )));
        }
        cents.push(centroid(&ends));
    }
    let slope = |c: &[Complex], s: f64| -> Vec<Complex> { c.iter().zip(&cents[0]).map(|(a, b)| (a - b) / s).collect() };
    let d1 = slope(&cents[1], mopts.s1);
    let d2 = slope(&cents[2], mopts.s2);
    let diff: Vec<Complex> = d1.iter().zip(&d2).map(|(a, b)| a - b).collect();
    // measured against how far the centroid moves, never below unit scale
    let scale = norm(&d1).max(norm(&d2)).max(1.0);
    Ok(norm(&diff) < mopts.trace_tol * scale)
}

/// Outcome of growing a partial witness point set by monodromy.
#[derive(Clone, Debug)]
pub struct Growth {
    pub witness: WitnessSet,
    /// The stopping rule fired within the loop budget.
    pub stable: bool,
    pub loops_run: usize,
    pub stats: TrackStats,
}

/// Grow `ws` by loops until `stable_loops` loops in a row find nothing new
/// and, when `use_trace`, the trace test accepts the whole set.
pub fn grow_witness(
    ws: &WitnessSet,
    use_trace: bool,
    rs: &mut RandomSource,
    mopts: &MonodromyOptions,
) -> Result<Growth> {
    let mut ws = ws.clone();
    let mut quiet = 0;
    let mut loops = 0;
    let mut stats = TrackStats::default();
    let n = ws.system.nvars();
    loop {
        if quiet >= mopts.stable_loops {
            if !use_trace || trace_test(&ws.system, &ws.selection, &trace_pencil(n, rs), &ws.points, rs, mopts)? {
                return Ok(Growth { witness: ws, stable: true, loops_run: loops, stats });
            }
            quiet = 0;
        }
        if loops >= mopts.max_loops {
            return Ok(Growth { witness: ws, stable: false, loops_run: loops, stats });
        }
        loops += 1;
        let lp = LoopSpec::random(&ws.selection, rs, &mopts.track);
        match monodromy_permutation(&ws, &lp, rs) {
            Ok(out) => {
                stats.add(&out.stats);
                if out.new_points.is_empty() {
                    quiet += 1;
                } else {
                    quiet = 0;
                    ws.points.extend(out.new_points);
                }
            }
            Err(Error::Indeterminate(_)) => quiet = 0,
            Err(e) => return Err(e),
        }
    }
}

/// Result of [`complete_witness`].
#[derive(Clone, Debug)]
pub struct Completion {
    pub collection: WitnessCollection,
    /// Keys whose point sets reached the stopping rule.
    pub stable: BTreeMap<MultiIndex, bool>,
    pub loops_run: usize,
}

impl Completion {
    pub fn all_stable(&self) -> bool {
        self.stable.values().all(|&s| s)
    }
}

/// Witness collection of the component through a general smooth `seed`:
/// slices through the seed for every `e ∈ Dim`, grown by monodromy.
pub fn complete_witness(
    f: &PolySystem,
    seed: &[Complex],
    rs: &mut RandomSource,
    mopts: &MonodromyOptions,
) -> Result<Completion> {
    let profile = local_multidimension(f, seed, mopts.rank_tol)?;
    let dp = dimension_polytope(&profile, &f.grouping.nvec())?;
    let bank = SliceBank::through(&f.grouping, seed, rs);
    let use_trace = f.grouping.ngroups() == 1;
    let mut entries = BTreeMap::new();
    let mut stable = BTreeMap::new();
    let mut loops = 0;
    for e in &dp.points {
        let ws = WitnessSet::new(f.clone(), bank.selection(e)?, vec![seed.to_vec()]);
        let g = grow_witness(&ws, use_trace, rs, mopts)?;
        loops += g.loops_run;
        stable.insert(e.clone(), g.stable);
        entries.insert(e.clone(), g.witness.points);
    }
    Ok(Completion {
        collection: WitnessCollection { system: f.clone(), bank, entries, complete: true },
        stable,
        loops_run: loops,
    })
}

/// Partition of a witness point set into putative components.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromyState {
    pub points: Vec<Vec<Complex>>,
    /// Parts as sorted index lists, ordered by smallest index.
    pub partition: Vec<Vec<usize>>,
    pub certified: Vec<bool>,
    pub loops_run: usize,
}

impl MonodromyState {
    pub fn all_certified(&self) -> bool {
        self.certified.iter().all(|&c| c)
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.partition.iter().map(Vec::len).collect();
        s.sort_unstable();
        s
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut j = i;
    while parent[j] != r {
        let next = parent[j];
        parent[j] = r;
        j = next;
    }
    r
}

fn parts_of(parent: &mut [usize]) -> Vec<Vec<usize>> {
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..parent.len() {
        let r = find(parent, i);
        by_root.entry(r).or_default().push(i);
    }
    let mut parts: Vec<Vec<usize>> = by_root.into_values().collect();
    parts.sort_by_key(|p| p[0]);
    parts
}

/// Merge points joined by monodromy until every part passes the trace
/// test or the loop budget runs out. Only meaningful for affine slice data.
pub fn breakup(ws: &WitnessSet, rs: &mut RandomSource, mopts: &MonodromyOptions) -> Result<MonodromyState> {
    let mut points = ws.points.clone();
    let mut parent: Vec<usize> = (0..points.len()).collect();
    let mut certified: HashSet<Vec<usize>> = HashSet::new();
    let mut rejected: HashSet<Vec<usize>> = HashSet::new();
    let n = ws.system.nvars();
    let mut loops = 0;
    loop {
        let parts = parts_of(&mut parent);
        for part in &parts {
            if certified.contains(part) || rejected.contains(part) {
                continue;
            }
            let pts: Vec<Vec<Complex>> = part.iter().map(|&i| points[i].clone()).collect();
            let pencil = trace_pencil(n, rs);
            if trace_test(&ws.system, &ws.selection, &pencil, &pts, rs, mopts)? {
                certified.insert(part.clone());
            } else {
                rejected.insert(part.clone());
            }
        }
        let open: Vec<usize> = parts.iter().filter(|p| !certified.contains(*p)).flatten().copied().collect();
        if open.is_empty() || loops >= mopts.max_loops {
            let flags = parts.iter().map(|p| certified.contains(p)).collect();
            return Ok(MonodromyState { points, partition: parts, certified: flags, loops_run: loops });
        }
        loops += 1;
        let sub =
            WitnessSet::new(ws.system.clone(), ws.selection.clone(), open.iter().map(|&i| points[i].clone()).collect());
        let lp = LoopSpec::random(&ws.selection, rs, &mopts.track);
        let out = match monodromy_permutation(&sub, &lp, rs) {
            Ok(o) => o,
            Err(Error::Indeterminate(_)) => continue,
            Err(e) => return Err(e),
        };
        for (a, b) in out.perm.iter().enumerate() {
            if let Some(b) = b {
                let (ra, rb) = (find(&mut parent, open[a]), find(&mut parent, open[*b]));
                parent[ra] = rb;
            }
        }
        for p in out.new_points {
            parent.push(points.len());
            points.push(p);
        }
    }
}
