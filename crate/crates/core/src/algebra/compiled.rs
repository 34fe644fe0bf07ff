use num_complex::Complex64 as Complex;

use super::poly::Polynomial;

#[derive(Clone, Debug)]
struct Term {
    coef: Complex,
    support: Vec<(usize, u32)>,
}

/// Polynomials flattened to sparse term lists for repeated evaluation of
/// values and Jacobians inside path tracking.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    polys: Vec<Vec<Term>>,
}

impl CompiledSystem {
    pub fn new(polys: &[Polynomial], nvars: usize) -> Self {
        let polys = polys
            .iter()
            .map(|p| {
                debug_assert_eq!(p.nvars(), nvars);
                p.terms()
                    .map(|(e, c)| Term {
                        coef: *c,
                        support: e.0.iter().enumerate().filter(|(_, k)| **k > 0).map(|(i, k)| (i, *k)).collect(),
                    })
                    .collect()
            })
            .collect();
        CompiledSystem { nvars, polys }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn eval(&self, x: &[Complex], out: &mut [Complex]) {
        for (p, o) in self.polys.iter().zip(out.iter_mut()) {
            let mut s = Complex::new(0.0, 0.0);
            for t in p {
                let mut m = t.coef;
                for &(i, k) in &t.support {
                    m *= pow(x[i], k);
                }
                s += m;
            }
            *o = s;
        }
    }

    /// Values into `out`, Jacobian rows into `jac` (row-major, `nvars` columns
    /// per row, starting at row offset `row0`).
    pub fn eval_jac(&self, x: &[Complex], out: &mut [Complex], jac: &mut [Complex], row0: usize, stride: usize) {
        let mut pw: Vec<Complex> = Vec::with_capacity(8);
        let mut dpw: Vec<Complex> = Vec::with_capacity(8);
        let mut suffix: Vec<Complex> = Vec::with_capacity(9);
        for (r, p) in self.polys.iter().enumerate() {
            let row = &mut jac[(row0 + r) * stride..(row0 + r) * stride + self.nvars];
            row.iter_mut().for_each(|z| *z = Complex::new(0.0, 0.0));
            let mut s = Complex::new(0.0, 0.0);
            for t in p {
                pw.clear();
                dpw.clear();
                for &(i, k) in &t.support {
                    let lower = pow(x[i], k - 1);
                    pw.push(lower * x[i]);
                    dpw.push(lower * k as f64);
                }
                let m = t.support.len();
                suffix.clear();
                suffix.resize(m + 1, Complex::new(1.0, 0.0));
                for j in (0..m).rev() {
                    suffix[j] = suffix[j + 1] * pw[j];
                }
                s += t.coef * suffix[0];
                let mut prefix = t.coef;
                for j in 0..m {
                    row[t.support[j].0] += prefix * dpw[j] * suffix[j + 1];
                    prefix *= pw[j];
                }
            }
            out[r] = s;
        }
    }
}

#[inline]
fn pow(z: Complex, k: u32) -> Complex {
    match k {
        0 => Complex::new(1.0, 0.0),
        1 => z,
        2 => z * z,
        3 => z * z * z,
        _ => z.powu(k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{PolySystem, VariableGrouping};

    #[test]
    fn matches_symbolic_jacobian() {
        let g = VariableGrouping::standard(&[("x", 1), ("y", 1)]).unwrap();
        let p = Polynomial::from_terms(
            2,
            vec![
                (vec![0, 2], Complex::new(1.0, 0.0)),
                (vec![1, 1], Complex::new(-2.0, 0.0)),
                (vec![3, 0], Complex::new(-1.0, 0.5)),
                (vec![1, 0], Complex::new(1.0, 0.0)),
                (vec![0, 0], Complex::new(0.0, 3.0)),
            ],
        );
        let sys = PolySystem::new(vec![p], g).unwrap();
        let x = [Complex::new(0.3, -1.2), Complex::new(2.0, 0.7)];
        let cs = CompiledSystem::new(&sys.polys, 2);
        let mut v = [Complex::default()];
        let mut j = [Complex::default(); 2];
        cs.eval_jac(&x, &mut v, &mut j, 0, 2);
        let jm = sys.jacobian(&x, &[]).unwrap();
        assert!((v[0] - sys.evaluate(&x).unwrap()[0]).norm() < 1e-12);
        assert!((j[0] - jm[(0, 0)]).norm() < 1e-12);
        assert!((j[1] - jm[(0, 1)]).norm() < 1e-12);
    }
}
