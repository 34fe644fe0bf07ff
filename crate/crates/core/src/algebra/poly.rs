use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64 as Complex;

use super::grouping::{Group, MultiIndex, VariableGrouping};
use super::linalg::CMatrix;
use crate::error::{Error, Result};

/// Dense exponent vector, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with complex coefficients in `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, Complex>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Complex::new(1.0, 0.0));
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Complex)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Add `c·x^e`, dropping the term if the coefficient cancels to zero.
    pub fn add_term(&mut self, e: Vec<u32>, c: Complex) {
        assert_eq!(e.len(), self.nvars, "exponent length must match the variable count");
        if c == Complex::new(0.0, 0.0) {
            return;
        }
        let key = Exponent(e);
        let entry = self.terms.entry(key.clone()).or_insert(Complex::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &Complex)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[u32]) -> Complex {
        self.terms.get(&Exponent(e.to_vec())).copied().unwrap_or_default()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.0.clone(), *c);
        }
        p
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.0.clone(), c * s);
        }
        p
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Self::constant(self.nvars, Complex::new(1.0, 0.0));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn evaluate(&self, x: &[Complex]) -> Complex {
        self.terms.iter().map(|(e, c)| c * monomial(&e.0, x)).sum()
    }

    pub fn partial(&self, var: usize) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e.0[var];
            if k > 0 {
                let mut d = e.0.clone();
                d[var] -= 1;
                p.add_term(d, c * k as f64);
            }
        }
        p
    }

    /// Per-group maximum total degree across terms.
    pub fn multidegree(&self, grouping: &VariableGrouping) -> MultiIndex {
        let mut d = vec![0usize; grouping.ngroups()];
        for e in self.terms.keys() {
            for (gi, g) in grouping.groups().iter().enumerate() {
                let s: u32 = g.vars.iter().map(|&v| e.0[v]).sum();
                d[gi] = d[gi].max(s as usize);
            }
        }
        MultiIndex(d)
    }

    /// Substitute values for some variables and re-index the rest.
    /// `keep[j]` is the old index of new variable j.
    pub fn substitute(&self, values: &[Option<Complex>], keep: &[usize]) -> Polynomial {
        let mut p = Self::zero(keep.len());
        for (e, c) in &self.terms {
            let mut coef = *c;
            for (v, val) in values.iter().enumerate() {
                if let Some(val) = val {
                    if e.0[v] > 0 {
                        coef *= val.powu(e.0[v]);
                    }
                }
            }
            p.add_term(keep.iter().map(|&v| e.0[v]).collect(), coef);
        }
        p
    }

    /// Re-embed into a larger variable set; variable i goes to `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Polynomial {
        let mut p = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0; nvars];
            for (i, &k) in e.0.iter().enumerate() {
                f[map[i]] += k;
            }
            p.add_term(f, *c);
        }
        p
    }

    /// Largest coefficient modulus (1 for the zero polynomial).
    pub fn coefficient_scale(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max).max(if self.is_zero() { 1.0 } else { 0.0 })
    }

    /// Largest `|c_a| r^|a|` with `r = max(1, ‖x‖_∞)`: the size of the terms
    /// near `x`, used to measure residuals of far away points.
    pub fn scale_at(&self, x: &[Complex]) -> f64 {
        let r = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
        self.terms
            .iter()
            .map(|(e, c)| c.norm() * r.powi(e.degree() as i32))
            .fold(0.0, f64::max)
            .max(self.coefficient_scale())
    }
}

fn monomial(e: &[u32], x: &[Complex]) -> Complex {
    let mut m = Complex::new(1.0, 0.0);
    for (k, xi) in e.iter().zip(x) {
        if *k > 0 {
            m *= xi.powu(*k);
        }
    }
    m
}

/// An ordered list of polynomials over one variable grouping.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    pub polys: Vec<Polynomial>,
    pub grouping: VariableGrouping,
}

impl PolySystem {
    pub fn new(polys: Vec<Polynomial>, grouping: VariableGrouping) -> Result<Self> {
        for p in &polys {
            if p.nvars() != grouping.nvars() {
                return Err(Error::DimensionMismatch { expected: grouping.nvars(), got: p.nvars() });
            }
        }
        Ok(PolySystem { polys, grouping })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.grouping.nvars()
    }

    fn check_point(&self, x: &[Complex]) -> Result<()> {
        if x.len() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: x.len() });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[Complex]) -> Result<Vec<Complex>> {
        self.check_point(x)?;
        Ok(self.polys.iter().map(|p| p.evaluate(x)).collect())
    }

    /// DF(x) with the column blocks of the groups in `omit` removed.
    pub fn jacobian(&self, x: &[Complex], omit: &[usize]) -> Result<CMatrix> {
        self.check_point(x)?;
        let cols: Vec<usize> = (0..self.nvars()).filter(|&v| !omit.contains(&self.grouping.group_of(v))).collect();
        let mut m = CMatrix::zeros(self.len(), cols.len());
        for (r, p) in self.polys.iter().enumerate() {
            for (c, &v) in cols.iter().enumerate() {
                m[(r, c)] = p.partial(v).evaluate(x);
            }
        }
        Ok(m)
    }

    /// Largest `|f_i(x)| / scale_at(x)` over the equations.
    pub fn relative_residual(&self, x: &[Complex]) -> Result<f64> {
        let v = self.evaluate(x)?;
        let mut worst = 0.0f64;
        for (p, fx) in self.polys.iter().zip(&v) {
            worst = worst.max(fx.norm() / p.scale_at(x));
        }
        Ok(worst)
    }

    pub fn multidegrees(&self) -> Vec<MultiIndex> {
        self.polys.iter().map(|p| p.multidegree(&self.grouping)).collect()
    }

    pub fn with_polys(&self, polys: Vec<Polynomial>) -> PolySystem {
        PolySystem { polys, grouping: self.grouping.clone() }
    }

    pub fn regrouped(&self, grouping: VariableGrouping) -> Result<PolySystem> {
        if grouping.nvars() != self.nvars() {
            return Err(Error::DimensionMismatch { expected: self.nvars(), got: grouping.nvars() });
        }
        Ok(PolySystem { polys: self.polys.clone(), grouping })
    }

    /// Append more polynomials.
    pub fn extended(&self, more: &[Polynomial]) -> PolySystem {
        let mut polys = self.polys.clone();
        polys.extend(more.iter().cloned());
        PolySystem { polys, grouping: self.grouping.clone() }
    }
}

/// Homogenization direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Homogenize,
    Dehomogenize,
}

/// Grouping of the homogenized variables: the original variables followed by
/// one extra coordinate `<group>0` per group, appended at the end.
pub fn homogenized_grouping(grouping: &VariableGrouping) -> Result<VariableGrouping> {
    let n = grouping.nvars();
    let mut names = grouping.names().to_vec();
    let mut groups = Vec::new();
    for (i, g) in grouping.groups().iter().enumerate() {
        names.push(format!("{}0", g.name));
        let mut vars = vec![n + i];
        vars.extend(g.vars.iter().copied());
        groups.push(Group { name: g.name.clone(), vars });
    }
    VariableGrouping::new(names, groups)
}

/// Pad every term with powers of the extra group coordinates so that each
/// group has total degree exactly `degrees[i]`.
pub fn homogenize(p: &Polynomial, grouping: &VariableGrouping, degrees: &MultiIndex) -> Result<Polynomial> {
    let own = p.multidegree(grouping);
    if !own.fits(degrees) {
        return Err(Error::InvalidArgument(format!(
            "target multidegree {degrees} is below the polynomial's multidegree {own}"
        )));
    }
    let n = grouping.nvars();
    let k = grouping.ngroups();
    let mut out = Polynomial::zero(n + k);
    for (e, c) in p.terms() {
        let mut f = e.0.clone();
        f.resize(n + k, 0);
        for (gi, g) in grouping.groups().iter().enumerate() {
            let s: u32 = g.vars.iter().map(|&v| e.0[v]).sum();
            f[n + gi] = degrees.0[gi] as u32 - s;
        }
        out.add_term(f, *c);
    }
    Ok(out)
}

/// Set the extra coordinates of a homogenized polynomial (the last `k`
/// variables) to 1.
pub fn dehomogenize(p: &Polynomial, grouping: &VariableGrouping) -> Result<Polynomial> {
    let n = grouping.nvars();
    if p.nvars() != n + grouping.ngroups() {
        return Err(Error::DimensionMismatch { expected: n + grouping.ngroups(), got: p.nvars() });
    }
    let mut out = Polynomial::zero(n);
    for (e, c) in p.terms() {
        out.add_term(e.0[..n].to_vec(), *c);
    }
    Ok(out)
}

/// Dispatch for [`homogenize`] / [`dehomogenize`].
pub fn homogenize_dehomogenize(
    p: &Polynomial,
    grouping: &VariableGrouping,
    direction: Direction,
    degrees: Option<&MultiIndex>,
) -> Result<Polynomial> {
    match direction {
        Direction::Homogenize => {
            let d = degrees.cloned().unwrap_or_else(|| p.multidegree(grouping));
            homogenize(p, grouping, &d)
        }
        Direction::Dehomogenize => dehomogenize(p, grouping),
    }
}

pub fn multidegree_of(p: &Polynomial, grouping: &VariableGrouping) -> MultiIndex {
    p.multidegree(grouping)
}

/// An affine linear form `c + Σ a_j x_j` over all variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm {
    pub constant: Complex,
    pub coeffs: Vec<Complex>,
}

impl AffineForm {
    pub fn new(constant: Complex, coeffs: Vec<Complex>) -> Self {
        AffineForm { constant, coeffs }
    }

    pub fn evaluate(&self, x: &[Complex]) -> Complex {
        self.constant + self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum::<Complex>()
    }

    pub fn to_poly(&self) -> Polynomial {
        let n = self.coeffs.len();
        let mut p = Polynomial::constant(n, self.constant);
        for (j, a) in self.coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[j] = 1;
            p.add_term(e, *a);
        }
        p
    }

    /// Same linear part, constant shifted so the form vanishes at `x`.
    pub fn through(&self, x: &[Complex]) -> AffineForm {
        let lin: Complex = self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        AffineForm { constant: -lin, coeffs: self.coeffs.clone() }
    }

    pub fn shifted(&self, delta: Complex) -> AffineForm {
        AffineForm { constant: self.constant + delta, coeffs: self.coeffs.clone() }
    }

    /// Variables with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&j| self.coeffs[j] != Complex::new(0.0, 0.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn octahedron_f() -> (PolySystem, VariableGrouping) {
        let g = VariableGrouping::standard(&[("x", 1), ("y", 1), ("z", 1), ("w", 1)]).unwrap();
        let f = Polynomial::from_terms(
            4,
            vec![
                (vec![0, 0, 0, 0], c(1.0)),
                (vec![1, 0, 0, 0], c(2.0)),
                (vec![0, 2, 0, 0], c(3.0)),
                (vec![0, 0, 3, 0], c(4.0)),
                (vec![0, 0, 0, 4], c(5.0)),
            ],
        );
        (PolySystem::new(vec![f], g.clone()).unwrap(), g)
    }

    fn cubic() -> PolySystem {
        let g = VariableGrouping::standard(&[("x", 1), ("y", 1)]).unwrap();
        let p = Polynomial::from_terms(
            2,
            vec![(vec![0, 2], c(1.0)), (vec![1, 1], c(-2.0)), (vec![3, 0], c(-1.0)), (vec![1, 0], c(1.0))],
        );
        PolySystem::new(vec![p], g).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let (f, _) = octahedron_f();
        assert_eq!(f.evaluate(&[c(0.0); 4]).unwrap(), vec![c(1.0)]);
        let g = Polynomial::from_terms(
            4,
            vec![
                (vec![0, 0, 0, 0], c(1.0)),
                (vec![1, 0, 0, 0], c(2.0)),
                (vec![0, 1, 0, 0], c(3.0)),
                (vec![0, 0, 1, 0], c(5.0)),
                (vec![0, 0, 0, 1], c(7.0)),
            ],
        );
        assert_eq!(g.evaluate(&[c(1.0); 4]), c(18.0));
        assert_eq!(cubic().evaluate(&[c(1.0), c(1.0)]).unwrap(), vec![c(-1.0)]);
        assert!(cubic().evaluate(&[c(1.0)]).is_err());
    }

    #[test]
    fn jacobian_blocks() {
        let s = cubic();
        let x = [c(1.0), c(1.0)];
        let full = s.jacobian(&x, &[]).unwrap();
        assert_eq!((full.rows(), full.cols()), (1, 2));
        assert_eq!(full[(0, 0)], c(-4.0));
        assert_eq!(full[(0, 1)], c(0.0));
        let keep_y = s.jacobian(&x, &[0]).unwrap();
        assert_eq!((keep_y.rows(), keep_y.cols()), (1, 1));
        assert_eq!(keep_y[(0, 0)], c(0.0));
    }

    #[test]
    fn multidegree_examples() {
        let (f, g) = octahedron_f();
        assert_eq!(f.polys[0].multidegree(&g), MultiIndex(vec![1, 2, 3, 4]));
        assert_eq!(Polynomial::constant(4, c(1.0)).multidegree(&g), MultiIndex(vec![0; 4]));
        assert_eq!(Polynomial::zero(4).multidegree(&g), MultiIndex(vec![0; 4]));
    }

    #[test]
    fn dehomogenize_single_group() {
        // x0 + 2 x1 with the extra coordinate stored last
        let g = VariableGrouping::standard(&[("y", 1)]).unwrap();
        let p = Polynomial::from_terms(2, vec![(vec![0, 1], c(1.0)), (vec![1, 0], c(2.0))]);
        let d = dehomogenize(&p, &g).unwrap();
        assert_eq!(d, Polynomial::from_terms(1, vec![(vec![0], c(1.0)), (vec![1], c(2.0))]));
    }

    #[test]
    fn homogenize_round_trip() {
        let (f, g) = octahedron_f();
        let h = homogenize_dehomogenize(&f.polys[0], &g, Direction::Homogenize, None).unwrap();
        let hg = homogenized_grouping(&g).unwrap();
        for (e, _) in h.terms() {
            for grp in hg.groups() {
                let s: u32 = grp.vars.iter().map(|&v| e.0[v]).sum();
                let gi = hg.groups().iter().position(|x| x == grp).unwrap();
                assert_eq!(s as usize, [1, 2, 3, 4][gi]);
            }
        }
        assert_eq!(dehomogenize(&h, &g).unwrap(), f.polys[0]);
        let too_small = MultiIndex(vec![1, 1, 1, 1]);
        assert!(homogenize(&f.polys[0], &g, &too_small).is_err());
    }

    #[test]
    fn affine_form_through_point() {
        let l = AffineForm::new(c(3.0), vec![c(1.0), Complex::new(0.0, 2.0)]);
        let x = [Complex::new(0.5, 1.0), c(-2.0)];
        assert!(l.through(&x).evaluate(&x).norm() < 1e-15);
        assert_eq!(l.to_poly().evaluate(&x), l.evaluate(&x));
    }
}
