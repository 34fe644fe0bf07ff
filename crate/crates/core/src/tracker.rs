//! Predictor–corrector continuation of solution paths of `H(x;t)` from
//! `t = 1` to `t = 0`.

use std::cell::Cell;

use rayon::prelude::*;

use crate::algebra::{lu_solve_in_place, norm, points_match, CMatrix, CompiledSystem, Complex, PolySystem, Polynomial};
use crate::error::{Error, Result};

/// Tracking parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackOptions {
    /// Relative Newton step size accepted by the corrector.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub divergence_norm: f64,
    /// Relative residual required of a converged endpoint.
    pub end_tol: f64,
    pub max_steps: usize,
    /// Tolerance for treating two endpoints as the same point.
    pub match_tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            newton_tol: 1e-9,
            max_newton_iters: 3,
            initial_step: 0.02,
            min_step: 1e-14,
            max_step: 0.1,
            divergence_norm: 1e8,
            end_tol: 1e-9,
            max_steps: 20_000,
            match_tol: 1e-6,
        }
    }
}

impl TrackOptions {
    /// Same options with smaller steps, used to re-run suspicious paths.
    pub fn cautious(&self, factor: f64) -> TrackOptions {
        TrackOptions {
            initial_step: (self.initial_step / factor).max(self.min_step),
            max_step: (self.max_step / factor).max(self.min_step),
            ..self.clone()
        }
    }
}

/// Outcome class of one path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStatus {
    Converged,
    Diverged,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    /// Final point (the endpoint when converged, the last iterate otherwise).
    pub endpoint: Vec<Complex>,
    pub steps_taken: usize,
    pub final_residual: f64,
    pub t_reached: f64,
    pub diagnostic: Option<String>,
}

impl PathResult {
    pub fn converged(&self) -> Option<&[Complex]> {
        (self.status == PathStatus::Converged).then_some(self.endpoint.as_slice())
    }
}

/// Status counts of a batch of paths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrackStats {
    pub paths: usize,
    pub converged: usize,
    pub diverged: usize,
    pub failed: usize,
}

impl TrackStats {
    pub fn from_results(results: &[PathResult]) -> Self {
        let mut s = TrackStats { paths: results.len(), ..Default::default() };
        for r in results {
            match r.status {
                PathStatus::Converged => s.converged += 1,
                PathStatus::Diverged => s.diverged += 1,
                PathStatus::Failed => s.failed += 1,
            }
        }
        s
    }

    pub fn add(&mut self, other: &TrackStats) {
        self.paths += other.paths;
        self.converged += other.converged;
        self.diverged += other.diverged;
        self.failed += other.failed;
    }
}

/// `H(x;t) = (fixed(x), γ·t·start(x) + (1−t)·target(x))`.
///
/// With an empty fixed block this is the plain convex homotopy; with the
/// defining equations of a variety in the fixed block and slices in the
/// moving block it is the linear-slice form used for witness set motion.
#[derive(Clone, Debug)]
pub struct Homotopy {
    nvars: usize,
    gamma: Complex,
    fixed: CompiledSystem,
    start: CompiledSystem,
    target: CompiledSystem,
    fixed_src: Vec<Polynomial>,
    start_src: Vec<Polynomial>,
    target_src: Vec<Polynomial>,
    proj: Option<Box<Projective>>,
}

/// The same homotopy in homogeneous coordinates `(x, x₀)` restricted to a
/// fixed random affine chart `a·(x, x₀) = 1`. Paths heading to infinity stay
/// bounded there and end with `x₀ → 0`.
#[derive(Clone, Debug)]
struct Projective {
    h: Homotopy,
    patch: Vec<Complex>,
}

fn homogenize_to(p: &Polynomial, d: u32) -> Polynomial {
    let n = p.nvars();
    Polynomial::from_terms(
        n + 1,
        p.terms().map(|(e, c)| {
            let mut v = e.0.clone();
            v.push(d - e.degree());
            (v, *c)
        }),
    )
}

fn projective(
    n: usize,
    fixed: &[Polynomial],
    start: &[Polynomial],
    target: &[Polynomial],
    gamma: Complex,
) -> Projective {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0x9e37_79b9 ^ n as u64);
    let patch: Vec<Complex> =
        (0..=n).map(|_| Complex::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
    let mut hfixed: Vec<Polynomial> = fixed.iter().map(|p| homogenize_to(p, p.total_degree())).collect();
    hfixed.push(Polynomial::from_terms(
        n + 1,
        patch
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut e = vec![0; n + 1];
                e[i] = 1;
                (e, *c)
            })
            .chain(std::iter::once((vec![0; n + 1], Complex::new(-1.0, 0.0)))),
    ));
    let mut hs = Vec::with_capacity(start.len());
    let mut ht = Vec::with_capacity(start.len());
    for (s, t) in start.iter().zip(target) {
        let d = s.total_degree().max(t.total_degree());
        hs.push(homogenize_to(s, d));
        ht.push(homogenize_to(t, d));
    }
    let h = Homotopy {
        nvars: n + 1,
        gamma,
        fixed: CompiledSystem::new(&hfixed, n + 1),
        start: CompiledSystem::new(&hs, n + 1),
        target: CompiledSystem::new(&ht, n + 1),
        fixed_src: hfixed,
        start_src: hs,
        target_src: ht,
        proj: None,
    };
    Projective { h, patch }
}

impl Projective {
    fn lift(&self, x: &[Complex]) -> Option<Vec<Complex>> {
        let mut v = x.to_vec();
        v.push(Complex::new(1.0, 0.0));
        let s: Complex = v.iter().zip(&self.patch).map(|(a, b)| a * b).sum();
        if s.norm() < 1e-12 * (1.0 + norm(&v)) {
            return None;
        }
        Some(v.into_iter().map(|z| z / s).collect())
    }

    /// Ratio `|x₀| / ‖X‖`; small values mean the point is near infinity.
    fn finiteness(v: &[Complex]) -> f64 {
        v[v.len() - 1].norm() / norm(v).max(f64::MIN_POSITIVE)
    }

    fn drop_chart(v: &[Complex]) -> Vec<Complex> {
        let n = v.len() - 1;
        v[..n].iter().map(|z| z / v[n]).collect()
    }
}

impl Homotopy {
    pub fn new(
        nvars: usize,
        fixed: &[Polynomial],
        start: &[Polynomial],
        target: &[Polynomial],
        gamma: Complex,
    ) -> Result<Self> {
        if start.len() != target.len() {
            return Err(Error::InvalidArgument("start and target blocks differ in length".into()));
        }
        if fixed.len() + start.len() != nvars {
            return Err(Error::InvalidArgument(format!(
                "homotopy is not square: {} equations in {} variables",
                fixed.len() + start.len(),
                nvars
            )));
        }
        if gamma.norm() == 0.0 {
            return Err(Error::InvalidArgument("gamma must be nonzero".into()));
        }
        Ok(Homotopy {
            nvars,
            gamma,
            fixed: CompiledSystem::new(fixed, nvars),
            start: CompiledSystem::new(start, nvars),
            target: CompiledSystem::new(target, nvars),
            fixed_src: fixed.to_vec(),
            start_src: start.to_vec(),
            target_src: target.to_vec(),
            proj: Some(Box::new(projective(nvars, fixed, start, target, gamma))),
        })
    }

    /// Convex homotopy between two square systems.
    pub fn convex(start: &PolySystem, target: &PolySystem, gamma: Complex) -> Result<Self> {
        Self::new(target.nvars(), &[], &start.polys, &target.polys, gamma)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn gamma(&self) -> Complex {
        self.gamma
    }

    /// The equations at `t = 0`.
    pub fn target_polys(&self) -> Vec<Polynomial> {
        self.fixed_src.iter().chain(&self.target_src).cloned().collect()
    }

    /// The equations at `t = 1` (start block multiplied by γ).
    pub fn start_polys(&self) -> Vec<Polynomial> {
        self.fixed_src.iter().cloned().chain(self.start_src.iter().map(|p| p.scale(self.gamma))).collect()
    }

    fn row_scales(&self, x: &[Complex]) -> Vec<f64> {
        self.fixed_src.iter().chain(&self.target_src).map(|p| p.scale_at(x)).collect()
    }

    /// Values of H and its t-derivative, and the Jacobian in x.
    fn eval(&self, x: &[Complex], t: f64, ws: &mut Workspace) {
        let n = self.nvars;
        let nf = self.fixed.len();
        let m = self.start.len();
        self.fixed.eval_jac(x, &mut ws.h[..nf], &mut ws.jac, 0, n);
        self.start.eval_jac(x, &mut ws.sv, &mut ws.sj, 0, n);
        self.target.eval_jac(x, &mut ws.tv, &mut ws.tj, 0, n);
        let a = self.gamma * t;
        let b = Complex::new(1.0 - t, 0.0);
        for r in 0..m {
            ws.h[nf + r] = a * ws.sv[r] + b * ws.tv[r];
            ws.ht[nf + r] = self.gamma * ws.sv[r] - ws.tv[r];
            for c in 0..n {
                ws.jac[(nf + r) * n + c] = a * ws.sj[r * n + c] + b * ws.tj[r * n + c];
            }
        }
        for r in 0..nf {
            ws.ht[r] = Complex::new(0.0, 0.0);
        }
    }

    /// H(x;t) as a vector (used by tests and diagnostics).
    pub fn evaluate(&self, x: &[Complex], t: f64) -> Vec<Complex> {
        let mut ws = Workspace::new(self.nvars, self.start.len());
        self.eval(x, t, &mut ws);
        ws.h.clone()
    }
}

struct Workspace {
    h: Vec<Complex>,
    ht: Vec<Complex>,
    jac: Vec<Complex>,
    sv: Vec<Complex>,
    tv: Vec<Complex>,
    sj: Vec<Complex>,
    tj: Vec<Complex>,
    lu: Vec<Complex>,
}

impl Workspace {
    fn new(n: usize, m: usize) -> Self {
        let z = Complex::new(0.0, 0.0);
        Workspace {
            h: vec![z; n],
            ht: vec![z; n],
            jac: vec![z; n * n],
            sv: vec![z; m],
            tv: vec![z; m],
            sj: vec![z; m * n],
            tj: vec![z; m * n],
            lu: vec![z; n * n],
        }
    }
}

thread_local! {
    static PATHS: Cell<u64> = const { Cell::new(0) };
}

/// Number of paths whose tracking was requested from the current thread.
pub fn thread_path_count() -> u64 {
    PATHS.with(|c| c.get())
}

fn count_paths(k: usize) {
    PATHS.with(|c| c.set(c.get() + k as u64));
}

/// dx/dt = −H_x⁻¹ H_t at (x, t).
fn velocity(h: &Homotopy, x: &[Complex], t: f64, ws: &mut Workspace) -> Option<Vec<Complex>> {
    h.eval(x, t, ws);
    ws.lu.copy_from_slice(&ws.jac);
    let mut v: Vec<Complex> = ws.ht.iter().map(|z| -z).collect();
    lu_solve_in_place(&mut ws.lu, h.nvars, &mut v).ok()?;
    Some(v)
}

fn axpy(x: &[Complex], a: f64, d: &[Complex]) -> Vec<Complex> {
    x.iter().zip(d).map(|(p, q)| p + q * a).collect()
}

const NOISE_TOL: f64 = 1e-7;

/// Newton at fixed t. Returns the corrected point when the last update is
/// below `tol` relative to the point size.
fn correct(h: &Homotopy, x: &[Complex], t: f64, tol: f64, iters: usize, ws: &mut Workspace) -> Option<Vec<Complex>> {
    let mut x = x.to_vec();
    let mut prev = f64::INFINITY;
    for _ in 0..iters {
        h.eval(&x, t, ws);
        ws.lu.copy_from_slice(&ws.jac);
        let mut dx = ws.h.clone();
        lu_solve_in_place(&mut ws.lu, h.nvars, &mut dx).ok()?;
        let d = norm(&dx);
        let scale = 1.0 + norm(&x);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
        }
        if !d.is_finite() {
            return None;
        }
        if d < tol * scale {
            return Some(x);
        }
        // demand fast contraction once the corrections are above noise level
        if d > 0.25 * prev {
            // stalled at rounding noise on an ill-conditioned Jacobian
            if prev < NOISE_TOL * scale {
                return Some(x);
            }
            return None;
        }
        prev = d;
    }
    None
}

fn residual(h: &Homotopy, x: &[Complex], ws: &mut Workspace) -> f64 {
    h.eval(x, 0.0, ws);
    ws.h.iter().zip(h.row_scales(x)).map(|(v, s)| v.norm() / s).fold(0.0, f64::max)
}

/// Track one path from `t = 1` to `t = 0`.
pub fn track_path(h: &Homotopy, start_point: &[Complex], opts: &TrackOptions) -> PathResult {
    count_paths(1);
    track_inner(h, start_point, opts)
}

fn failed(x: Vec<Complex>, steps: usize, t: f64, msg: &str) -> PathResult {
    PathResult {
        status: PathStatus::Failed,
        endpoint: x,
        steps_taken: steps,
        final_residual: f64::INFINITY,
        t_reached: t,
        diagnostic: Some(msg.to_string()),
    }
}

fn diverged(x: Vec<Complex>, steps: usize, t: f64) -> PathResult {
    PathResult {
        status: PathStatus::Diverged,
        endpoint: x,
        steps_taken: steps,
        final_residual: f64::INFINITY,
        t_reached: t,
        diagnostic: None,
    }
}

// Close to the target with a huge point: the path is heading to infinity.
fn at_infinity(size: f64, t: f64, start_norm: f64, opts: &TrackOptions) -> bool {
    t < 1e-2 && size > opts.divergence_norm.sqrt().max(1e3 * (1.0 + start_norm))
}

fn track_inner(h: &Homotopy, start_point: &[Complex], opts: &TrackOptions) -> PathResult {
    let n = h.nvars;
    if start_point.len() != n {
        return failed(start_point.to_vec(), 0, 1.0, "start point has the wrong length");
    }
    let Some(p) = &h.proj else {
        let start_norm = norm(start_point);
        let far = |x: &[Complex], t: f64| norm(x) > opts.divergence_norm || at_infinity(norm(x), t, start_norm, opts);
        return match continue_path(h, start_point, opts, &far, &far) {
            Ok((x, steps)) => finish(h, x, steps, opts, false),
            Err(r) => r,
        };
    };
    let Some(lifted) = p.lift(start_point) else {
        return failed(start_point.to_vec(), 0, 1.0, "start point lies on the chart boundary");
    };
    let ratio = 1.0 / opts.divergence_norm.sqrt().max(1e3 * (1.0 + norm(start_point)));
    let far = |x: &[Complex], t: f64| t < 1e-2 && Projective::finiteness(x) < ratio;
    let gone = |x: &[Complex], _: f64| Projective::finiteness(x) < 1.0 / opts.divergence_norm;
    match continue_path(&p.h, &lifted, opts, &gone, &far) {
        Ok((v, steps)) => {
            if Projective::finiteness(&v) < 1.0 / opts.divergence_norm {
                return diverged(v[..n].to_vec(), steps, 0.0);
            }
            let near = far(&v, 0.0);
            // a huge endpoint on a singular projective solution that Newton
            // keeps pushing outwards is a point at infinity reached slowly
            if near && conditioning(&p.h, &v) < SINGULAR_AT_INFINITY && drift(&p.h, &v) < 0.5 {
                return diverged(v[..n].to_vec(), steps, 0.0);
            }
            finish(h, Projective::drop_chart(&v), steps, opts, near)
        }
        Err(mut r) => {
            r.endpoint = if Projective::finiteness(&r.endpoint) > 0.0 {
                Projective::drop_chart(&r.endpoint)
            } else {
                r.endpoint[..n].to_vec()
            };
            r
        }
    }
}

const SINGULAR_AT_INFINITY: f64 = 1e-6;

/// Finiteness after a few plain Newton steps at `t = 0`, relative to the
/// finiteness at `x`.
fn drift(h: &Homotopy, x: &[Complex]) -> f64 {
    let n = h.nvars;
    let mut ws = Workspace::new(n, h.start.len());
    let mut v = x.to_vec();
    for _ in 0..6 {
        h.eval(&v, 0.0, &mut ws);
        ws.lu.copy_from_slice(&ws.jac);
        let mut dx = ws.h.clone();
        if lu_solve_in_place(&mut ws.lu, n, &mut dx).is_err() {
            return 0.0;
        }
        for (a, b) in v.iter_mut().zip(&dx) {
            *a -= b;
        }
        if !v.iter().all(|z| z.is_finite()) {
            return 0.0;
        }
    }
    Projective::finiteness(&v) / Projective::finiteness(x)
}

/// Smallest over largest singular value of the Jacobian at `t = 0`, rows
/// scaled by the size of their polynomial at `x`.
fn conditioning(h: &Homotopy, x: &[Complex]) -> f64 {
    let n = h.nvars;
    let mut ws = Workspace::new(n, h.start.len());
    h.eval(x, 0.0, &mut ws);
    for (r, m) in h.row_scales(x).into_iter().enumerate() {
        if m > 0.0 {
            ws.jac[r * n..(r + 1) * n].iter_mut().for_each(|z| *z /= m);
        }
    }
    let s = CMatrix::from_rows(n, n, ws.jac.clone()).map(|m| m.singular_values()).unwrap_or_default();
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    }
}

/// The predictor–corrector loop. Returns the point at `t = 0`, or the final
/// result of a path that ended early. `gone` stops a path that is clearly at
/// infinity; `far` decides whether a path that cannot go on is diverging.
fn continue_path(
    h: &Homotopy,
    start_point: &[Complex],
    opts: &TrackOptions,
    gone: &dyn Fn(&[Complex], f64) -> bool,
    far: &dyn Fn(&[Complex], f64) -> bool,
) -> std::result::Result<(Vec<Complex>, usize), PathResult> {
    let mut ws = Workspace::new(h.nvars, h.start.len());
    let mut x = match correct(h, start_point, 1.0, opts.newton_tol, opts.max_newton_iters.max(3), &mut ws) {
        Some(x) => x,
        None => return Err(failed(start_point.to_vec(), 0, 1.0, "start point does not satisfy the start system")),
    };
    let mut t = 1.0f64;
    let mut step = opts.initial_step;
    let mut successes = 0;
    let mut steps = 0;
    while t > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            if far(&x, t) {
                return Err(diverged(x, steps, t));
            }
            return Err(failed(x, steps, t, "step budget exhausted"));
        }
        let dt = step.min(t);
        let t1 = if dt >= t { 0.0 } else { t - dt };
        let dt = t - t1;
        let predicted = rk4(h, &x, t, dt, &mut ws);
        let corrected = predicted.and_then(|p| correct(h, &p, t1, opts.newton_tol, opts.max_newton_iters, &mut ws));
        match corrected {
            Some(xn) => {
                x = xn;
                t = t1;
                successes += 1;
                if successes >= 4 {
                    step = (step * 2.0).min(opts.max_step);
                    successes = 0;
                }
                if gone(&x, t) {
                    return Err(diverged(x, steps, t));
                }
            }
            None => {
                step *= 0.5;
                successes = 0;
                if step < opts.min_step {
                    if far(&x, t) {
                        return Err(diverged(x, steps, t));
                    }
                    return Err(failed(x, steps, t, "step size underflow"));
                }
            }
        }
    }
    Ok((x, steps))
}

/// Sharpen an endpoint on the target system and classify it.
fn finish(h: &Homotopy, mut x: Vec<Complex>, steps: usize, opts: &TrackOptions, near_infinity: bool) -> PathResult {
    let n = h.nvars;
    let mut ws = Workspace::new(n, h.start.len());
    for _ in 0..3 {
        match correct(h, &x, 0.0, 1e-15, 1, &mut ws) {
            Some(xn) => {
                x = xn;
                break;
            }
            None => {
                h.eval(&x, 0.0, &mut ws);
                ws.lu.copy_from_slice(&ws.jac);
                let mut dx = ws.h.clone();
                if lu_solve_in_place(&mut ws.lu, n, &mut dx).is_err() {
                    break;
                }
                let xn: Vec<Complex> = x.iter().zip(&dx).map(|(a, b)| a - b).collect();
                if norm(&dx) > 1e-6 * (1.0 + norm(&x)) || !xn.iter().all(|z| z.is_finite()) {
                    break;
                }
                x = xn;
            }
        }
    }
    let res = residual(h, &x, &mut ws);
    if res >= opts.end_tol && near_infinity {
        return diverged(x, steps, 0.0);
    }
    let status = if res < opts.end_tol { PathStatus::Converged } else { PathStatus::Failed };
    PathResult {
        status,
        diagnostic: (status == PathStatus::Failed).then(|| format!("endpoint residual {res:.3e}")),
        endpoint: x,
        steps_taken: steps,
        final_residual: res,
        t_reached: 0.0,
    }
}

fn rk4(h: &Homotopy, x: &[Complex], t: f64, dt: f64, ws: &mut Workspace) -> Option<Vec<Complex>> {
    let d = -dt;
    let k1 = velocity(h, x, t, ws)?;
    let k2 = velocity(h, &axpy(x, d / 2.0, &k1), t + d / 2.0, ws)?;
    let k3 = velocity(h, &axpy(x, d / 2.0, &k2), t + d / 2.0, ws)?;
    let k4 = velocity(h, &axpy(x, d, &k3), t + d, ws)?;
    let out: Vec<Complex> = (0..x.len()).map(|i| x[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (d / 6.0)).collect();
    out.iter().all(|z| z.is_finite()).then_some(out)
}

/// Track a batch of paths. Results come back in input order and do not
/// depend on the number of worker threads.
///
/// Converged endpoints that coincide signal a path jump; those paths are
/// re-tracked with smaller steps (twice at most).
pub fn track_many(h: &Homotopy, starts: &[Vec<Complex>], opts: &TrackOptions) -> Vec<PathResult> {
    count_paths(starts.len());
    let mut results: Vec<PathResult> = starts.par_iter().map(|s| track_inner(h, s, opts)).collect();
    let mut factor = 1.0;
    for _ in 0..2 {
        let suspects = colliding(&results, opts.match_tol);
        if suspects.is_empty() {
            break;
        }
        factor *= 8.0;
        let careful = opts.cautious(factor);
        let redo: Vec<PathResult> = suspects.par_iter().map(|&i| track_inner(h, &starts[i], &careful)).collect();
        for (i, r) in suspects.into_iter().zip(redo) {
            results[i] = r;
        }
    }
    results
}

fn colliding(results: &[PathResult], tol: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..results.len() {
        let Some(a) = results[i].converged() else { continue };
        for (j, r) in results.iter().enumerate() {
            if j != i {
                if let Some(b) = r.converged() {
                    if points_match(a, b, tol) {
                        out.push(i);
                        break;
                    }
                }
            }
        }
    }
    out
}

/// Newton's method on a (possibly overdetermined) system.
///
/// Fails with [`Error::SingularJacobian`] when the Jacobian is numerically
/// singular or when the iteration only contracts linearly, which is what
/// Newton does near a singular root.
pub fn newton_refine(system: &PolySystem, point: &[Complex], tol: f64, max_iters: usize) -> Result<Vec<Complex>> {
    let n = system.nvars();
    if point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: point.len() });
    }
    let cs = CompiledSystem::new(&system.polys, n);
    let m = system.len();
    let mut x = point.to_vec();
    let mut vals = vec![Complex::new(0.0, 0.0); m];
    let mut jac = vec![Complex::new(0.0, 0.0); m * n];
    let mut prev = f64::INFINITY;
    let mut slow = 0;
    for _ in 0..=max_iters {
        cs.eval_jac(&x, &mut vals, &mut jac, 0, n);
        let res = vals.iter().zip(&system.polys).map(|(v, p)| v.norm() / p.scale_at(&x)).fold(0.0, f64::max);
        if res < tol {
            return Ok(x);
        }
        let j = CMatrix::from_rows(m, n, jac.clone())?;
        if m < n || crate::algebra::numerical_rank(&j, 1e-12) < n {
            return Err(Error::SingularJacobian);
        }
        let dx = if m == n {
            let mut a = jac.clone();
            let mut b = vals.clone();
            lu_solve_in_place(&mut a, n, &mut b)?;
            b
        } else {
            j.solve_least_squares(&vals)?
        };
        let d = norm(&dx);
        if d > 0.25 * prev {
            slow += 1;
            if slow >= 3 {
                return Err(Error::SingularJacobian);
            }
        } else {
            slow = 0;
        }
        prev = d;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
        }
    }
    Err(Error::NonConvergence(max_iters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::VariableGrouping;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn univariate(coeffs: &[f64]) -> Polynomial {
        Polynomial::from_terms(1, coeffs.iter().enumerate().map(|(k, a)| (vec![k as u32], c(*a))))
    }

    fn sys(p: Polynomial) -> PolySystem {
        PolySystem::new(vec![p], VariableGrouping::standard(&[("x", 1)]).unwrap()).unwrap()
    }

    #[test]
    fn square_root_path() {
        let h =
            Homotopy::convex(&sys(univariate(&[-1.0, 0.0, 1.0])), &sys(univariate(&[-4.0, 0.0, 1.0])), c(1.0)).unwrap();
        let r = track_path(&h, &[c(1.0)], &TrackOptions::default());
        assert_eq!(r.status, PathStatus::Converged);
        assert!((r.endpoint[0] - c(2.0)).norm() < 1e-10);
    }

    #[test]
    fn no_finite_root_diverges() {
        let gamma = Complex::new(0.6, 0.8);
        let h = Homotopy::convex(&sys(univariate(&[-1.0, 1.0])), &sys(univariate(&[-1.0])), gamma).unwrap();
        let r = track_path(&h, &[c(1.0)], &TrackOptions::default());
        assert_eq!(r.status, PathStatus::Diverged);
    }

    #[test]
    fn endpoint_consistency() {
        let gamma = Complex::new(0.28, -0.96);
        let s = univariate(&[-1.0, 0.0, 0.0, 1.0]);
        let t = univariate(&[-8.0, 0.0, 0.0, 1.0]);
        let h = Homotopy::convex(&sys(s.clone()), &sys(t.clone()), gamma).unwrap();
        let x = [Complex::new(0.3, -0.7)];
        assert_eq!(h.evaluate(&x, 0.0)[0], t.evaluate(&x));
        assert!((h.evaluate(&x, 1.0)[0] - gamma * s.evaluate(&x)).norm() < 1e-15);
    }

    #[test]
    fn cube_roots_are_distinct() {
        let gamma = Complex::new(0.6, 0.8);
        let s = univariate(&[-1.0, 0.0, 0.0, 1.0]);
        let t = univariate(&[-8.0, 0.0, 0.0, 1.0]);
        let h = Homotopy::convex(&sys(s), &sys(t), gamma).unwrap();
        let starts: Vec<Vec<Complex>> =
            (0..3).map(|k| vec![Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0)]).collect();
        let res = track_many(&h, &starts, &TrackOptions::default());
        let ends: Vec<&[Complex]> = res.iter().map(|r| r.converged().unwrap()).collect();
        for i in 0..3 {
            assert!((ends[i][0].powu(3) - c(8.0)).norm() < 1e-9);
            for j in 0..i {
                assert!(!points_match(ends[i], ends[j], 1e-6));
            }
        }
    }

    #[test]
    fn newton_examples() {
        let s = sys(univariate(&[-4.0, 0.0, 1.0]));
        let x = newton_refine(&s, &[c(2.0001)], 1e-14, 20).unwrap();
        assert!((x[0] - c(2.0)).norm() < 1e-12);
        assert_eq!(newton_refine(&s, &[c(2.0)], 1e-14, 20).unwrap(), vec![c(2.0)]);
        let sq = sys(univariate(&[0.0, 0.0, 1.0]));
        assert_eq!(newton_refine(&sq, &[c(0.1)], 1e-14, 50).unwrap_err(), Error::SingularJacobian);
    }

    #[test]
    fn empty_batch() {
        let h = Homotopy::convex(&sys(univariate(&[-1.0, 1.0])), &sys(univariate(&[-2.0, 1.0])), c(1.0)).unwrap();
        assert!(track_many(&h, &[], &TrackOptions::default()).is_empty());
    }

    #[test]
    fn far_root_converges() {
        // roots 1e5 and 1: the large one is finite and must not be called diverged
        let gamma = Complex::new(0.6, 0.8);
        let s = univariate(&[-1.0, 0.0, 1.0]);
        let t = univariate(&[1e5, -1e5 - 1.0, 1.0]);
        let h = Homotopy::convex(&sys(s), &sys(t), gamma).unwrap();
        let res = track_many(&h, &[vec![c(1.0)], vec![c(-1.0)]], &TrackOptions::default());
        let mut ends: Vec<f64> = res.iter().map(|r| r.converged().unwrap()[0].re).collect();
        ends.sort_by(f64::total_cmp);
        assert!((ends[0] - 1.0).abs() < 1e-9);
        assert!((ends[1] - 1e5).abs() < 1e-4);
    }

    #[test]
    fn double_root_at_infinity() {
        // x³ − 1 → x − 2: one finite root, two paths to infinity
        let gamma = Complex::new(0.28, -0.96);
        let s = univariate(&[-1.0, 0.0, 0.0, 1.0]);
        let t = univariate(&[-2.0, 1.0]);
        let h = Homotopy::convex(&sys(s), &sys(t), gamma).unwrap();
        let starts: Vec<Vec<Complex>> =
            (0..3).map(|k| vec![Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / 3.0)]).collect();
        let st = TrackStats::from_results(&track_many(&h, &starts, &TrackOptions::default()));
        assert_eq!((st.converged, st.diverged, st.failed), (1, 2, 0));
    }

    #[test]
    fn row_scaling_is_harmless() {
        let mut a = vec![c(1e-20), c(2e-20), c(3.0), c(4.0)];
        let mut b = vec![c(5e-20), c(11.0)];
        lu_solve_in_place(&mut a, 2, &mut b).unwrap();
        assert!((b[0] - c(1.0)).norm() < 1e-12 && (b[1] - c(2.0)).norm() < 1e-12);
    }
}
