//! Root counts, multidegree classes of complete intersections, classical
//! start systems, and a solver for square-able zero-dimensional systems.

use std::collections::BTreeMap;

use crate::algebra::{points_match, AffineForm, Complex, MultiIndex, PolySystem, Polynomial};
use crate::error::{Error, Result};
use crate::sysio::RandomSource;
use crate::tracker::{track_many, Homotopy, PathStatus, TrackOptions};
use crate::witness::MultidegreeMap;

/// Product `∏_j (Σ_i d_{j,i} s_i)` truncated modulo `s_i^{n_i+1}`, as a map
/// from exponent vectors to coefficients.
fn truncated_product(degrees: &[MultiIndex], nvec: &MultiIndex) -> Result<BTreeMap<Vec<usize>, u64>> {
    let k = nvec.len();
    let mut acc: BTreeMap<Vec<usize>, u64> = BTreeMap::from([(vec![0; k], 1)]);
    for d in degrees {
        if d.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: d.len() });
        }
        let mut next: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for (exp, c) in &acc {
            for i in 0..k {
                let di = d.get(i) as u64;
                if di == 0 || exp[i] == nvec.get(i) {
                    continue;
                }
                let mut e = exp.clone();
                e[i] += 1;
                let term = c.checked_mul(di).ok_or(Error::Overflow("class coefficient"))?;
                let slot = next.entry(e).or_insert(0);
                *slot = slot.checked_add(term).ok_or(Error::Overflow("class coefficient"))?;
            }
        }
        acc = next;
    }
    Ok(acc)
}

/// Multidegree class of a general complete intersection with the given
/// per-equation multidegrees: the coefficient of `∏ s_i^{n_i − a_i}` is
/// reported as `Deg(a)`.
pub fn complete_intersection_class(degrees: &[MultiIndex], nvec: &MultiIndex) -> Result<MultidegreeMap> {
    if degrees.len() > nvec.total() {
        return Err(Error::InvalidArgument(format!(
            "{} equations exceed the ambient dimension {}",
            degrees.len(),
            nvec.total()
        )));
    }
    let prod = truncated_product(degrees, nvec)?;
    Ok(prod
        .into_iter()
        .map(|(exp, c)| (MultiIndex(exp.iter().zip(&nvec.0).map(|(e, n)| n - e).collect()), c))
        .collect())
}

/// Multihomogeneous Bézout number of a square system.
pub fn mbezout(degrees: &[MultiIndex], nvec: &MultiIndex) -> Result<u64> {
    if degrees.len() != nvec.total() {
        return Err(Error::InvalidArgument(format!(
            "multihomogeneous Bézout count needs a square system, got {} equations for dimension {}",
            degrees.len(),
            nvec.total()
        )));
    }
    Ok(truncated_product(degrees, nvec)?.get(&nvec.0).copied().unwrap_or(0))
}

/// Which classical start system to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartKind {
    TotalDegree,
    LinearProduct,
}

/// A start system with all of its solutions.
#[derive(Clone, Debug)]
pub struct StartPackage {
    pub start: PolySystem,
    pub solutions: Vec<Vec<Complex>>,
    pub predicted_count: u64,
}

fn total_degrees(target: &PolySystem) -> Result<Vec<u32>> {
    target
        .polys
        .iter()
        .map(|p| match p.total_degree() {
            0 => Err(Error::InvalidArgument("constant equation in target system".into())),
            d => Ok(d),
        })
        .collect()
}

fn check_square(target: &PolySystem) -> Result<()> {
    if target.len() != target.nvars() {
        return Err(Error::InvalidArgument(format!(
            "start system needs a square target, got {} equations in {} variables",
            target.len(),
            target.nvars()
        )));
    }
    Ok(())
}

/// Total-degree count `∏ deg f_j`, or `None` on overflow.
pub fn bezout(target: &PolySystem) -> Option<u64> {
    target.polys.iter().try_fold(1u64, |acc, p| acc.checked_mul(p.total_degree() as u64))
}

pub fn start_package(target: &PolySystem, kind: StartKind, rs: &mut RandomSource) -> Result<StartPackage> {
    check_square(target)?;
    match kind {
        StartKind::TotalDegree => total_degree_start(target),
        StartKind::LinearProduct => linear_product_start(target, rs),
    }
}

fn total_degree_start(target: &PolySystem) -> Result<StartPackage> {
    let n = target.nvars();
    let degs = total_degrees(target)?;
    let count = bezout(target).ok_or(Error::Overflow("Bézout number"))?;
    let polys = degs
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let mut e = vec![0; n];
            e[j] = d;
            Polynomial::from_terms(n, [(e, Complex::new(1.0, 0.0)), (vec![0; n], Complex::new(-1.0, 0.0))])
        })
        .collect();
    let mut solutions = vec![Vec::with_capacity(n)];
    for &d in &degs {
        let roots: Vec<Complex> =
            (0..d).map(|k| Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64)).collect();
        solutions = solutions
            .into_iter()
            .flat_map(|s: Vec<Complex>| {
                roots.iter().map(move |r| {
                    let mut t = s.clone();
                    t.push(*r);
                    t
                })
            })
            .collect();
    }
    Ok(StartPackage { start: target.with_polys(polys), solutions, predicted_count: count })
}

fn linear_product_start(target: &PolySystem, rs: &mut RandomSource) -> Result<StartPackage> {
    let g = &target.grouping;
    let n = target.nvars();
    let degrees = target.multidegrees();
    let count = mbezout(&degrees, &g.nvec())?;
    // factors[j][i] = the d_{j,i} random forms of equation j in group i
    let mut factors: Vec<Vec<Vec<AffineForm>>> = Vec::new();
    let mut polys = Vec::new();
    for d in &degrees {
        if d.total() == 0 {
            return Err(Error::InvalidArgument("constant equation in target system".into()));
        }
        let mut per_group = Vec::new();
        let mut p = Polynomial::constant(n, Complex::new(1.0, 0.0));
        for i in 0..g.ngroups() {
            let forms: Vec<AffineForm> = (0..d.get(i)).map(|_| rs.affine_form(n, &g.group(i).vars)).collect();
            for f in &forms {
                p = p.mul(&f.to_poly());
            }
            per_group.push(forms);
        }
        polys.push(p);
        factors.push(per_group);
    }
    let mut solutions = Vec::new();
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![0usize; g.ngroups()];
    cells(target, &factors, &mut chosen, &mut used, &mut solutions)?;
    if solutions.len() as u64 != count {
        return Err(Error::Inconsistent(format!(
            "linear-product start produced {} solutions, expected {count}",
            solutions.len()
        )));
    }
    Ok(StartPackage { start: target.with_polys(polys), solutions, predicted_count: count })
}

/// Depth-first enumeration of factor choices, one per equation, that use
/// exactly `n_i` forms of each group; each full choice is solved group by
/// group.
fn cells(
    target: &PolySystem,
    factors: &[Vec<Vec<AffineForm>>],
    chosen: &mut Vec<(usize, usize)>,
    used: &mut [usize],
    out: &mut Vec<Vec<Complex>>,
) -> Result<()> {
    let g = &target.grouping;
    let j = chosen.len();
    if j == factors.len() {
        out.push(solve_cell(target, factors, chosen)?);
        return Ok(());
    }
    for i in 0..g.ngroups() {
        if used[i] == g.size(i) {
            continue;
        }
        for r in 0..factors[j][i].len() {
            used[i] += 1;
            chosen.push((i, r));
            cells(target, factors, chosen, used, out)?;
            chosen.pop();
            used[i] -= 1;
        }
    }
    Ok(())
}

fn solve_cell(
    target: &PolySystem,
    factors: &[Vec<Vec<AffineForm>>],
    chosen: &[(usize, usize)],
) -> Result<Vec<Complex>> {
    let g = &target.grouping;
    let mut x = vec![Complex::new(0.0, 0.0); target.nvars()];
    for gi in 0..g.ngroups() {
        let vars = &g.group(gi).vars;
        let m = vars.len();
        let mut a = Vec::with_capacity(m * m);
        let mut b = Vec::with_capacity(m);
        for (j, &(i, r)) in chosen.iter().enumerate() {
            if i == gi {
                let f = &factors[j][i][r];
                a.extend(vars.iter().map(|&v| f.coeffs[v]));
                b.push(-f.constant);
            }
        }
        crate::algebra::lu_solve_in_place(&mut a, m, &mut b)?;
        for (&v, val) in vars.iter().zip(b) {
            x[v] = val;
        }
    }
    Ok(x)
}

/// Outcome of [`solve_zero_dim_report`].
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub points: Vec<Vec<Complex>>,
    pub paths: usize,
    pub converged: usize,
    pub diverged: usize,
    pub failed: usize,
}

/// Random square-up: `nrows` random combinations of the rows of `polys`.
pub fn square_up(polys: &[Polynomial], nrows: usize, rs: &mut RandomSource) -> Vec<Polynomial> {
    if polys.len() == nrows {
        return polys.to_vec();
    }
    (0..nrows)
        .map(|_| polys.iter().fold(Polynomial::zero(polys[0].nvars()), |acc, p| acc.add(&p.scale(rs.gaussian()))))
        .collect()
}

/// Isolated nonsingular points of `V(F) ∩ V(slices)`.
pub fn solve_zero_dim(
    f: &PolySystem,
    slices: &[AffineForm],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<Vec<Vec<Complex>>> {
    Ok(solve_zero_dim_report(f, slices, rs, opts)?.points)
}

pub fn solve_zero_dim_report(
    f: &PolySystem,
    slices: &[AffineForm],
    rs: &mut RandomSource,
    opts: &TrackOptions,
) -> Result<SolveReport> {
    let n = f.nvars();
    if slices.len() > n {
        return Err(Error::InvalidArgument("more slices than variables".into()));
    }
    let need = n - slices.len();
    if f.len() < need {
        return Err(Error::InvalidArgument(format!(
            "{} equations and {} slices cannot cut out points in {} variables",
            f.len(),
            slices.len(),
            n
        )));
    }
    for s in slices {
        if s.coeffs.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.coeffs.len() });
        }
    }
    let mut polys = square_up(&f.polys, need, rs);
    polys.extend(slices.iter().map(AffineForm::to_poly));
    let target = f.with_polys(polys);
    let td = bezout(&target);
    let mb = mbezout(&target.multidegrees(), &target.grouping.nvec()).ok();
    let kind = match (td, mb) {
        (Some(t), Some(m)) if m < t => StartKind::LinearProduct,
        (None, Some(_)) => StartKind::LinearProduct,
        _ => StartKind::TotalDegree,
    };
    let pkg = start_package(&target, kind, rs)?;
    let gamma = rs.unit_complex();
    let h = Homotopy::convex(&pkg.start, &target, gamma)?;
    let results = track_many(&h, &pkg.solutions, opts);
    let mut report = SolveReport { points: Vec::new(), paths: results.len(), converged: 0, diverged: 0, failed: 0 };
    let slice_sys = f.with_polys(slices.iter().map(AffineForm::to_poly).collect());
    for r in &results {
        match r.status {
            PathStatus::Converged => report.converged += 1,
            PathStatus::Diverged => report.diverged += 1,
            PathStatus::Failed => report.failed += 1,
        }
        let Some(x) = r.converged() else { continue };
        if f.relative_residual(x)? > 1e-8 || slice_sys.relative_residual(x)? > 1e-8 {
            continue;
        }
        if !report.points.iter().any(|p| points_match(p, x, opts.match_tol)) {
            report.points.push(x.to_vec());
        }
    }
    if report.paths > 0 && 2 * report.failed > report.paths {
        return Err(Error::Tracking(format!("{} of {} paths failed", report.failed, report.paths)));
    }
    Ok(report)
}
