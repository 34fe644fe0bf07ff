//! Complex polynomials over grouped variables and the dense linear algebra
//! used by the numerical routines.

mod compiled;
mod grouping;
mod linalg;
mod poly;

pub use compiled::CompiledSystem;
pub use grouping::{Group, MultiIndex, VariableGrouping};
pub use linalg::{lu_solve_in_place, numerical_rank, CMatrix};
pub use num_complex::Complex64 as Complex;
pub use poly::{
    dehomogenize, homogenize, homogenize_dehomogenize, homogenized_grouping, multidegree_of, AffineForm, Direction,
    Exponent, PolySystem, Polynomial,
};

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Euclidean norm of a complex vector.
pub fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance between two complex vectors.
pub fn distance(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Two points agree when their distance is below `tol · max(1, ‖a‖, ‖b‖)`.
pub fn points_match(a: &[Complex], b: &[Complex], tol: f64) -> bool {
    distance(a, b) <= tol * 1f64.max(norm(a)).max(norm(b))
}
