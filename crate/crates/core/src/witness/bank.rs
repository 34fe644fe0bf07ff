use crate::algebra::{numerical_rank, AffineForm, CMatrix, Complex, MultiIndex, Polynomial, VariableGrouping};
use crate::error::{Error, Result};
use crate::sysio::RandomSource;

/// Per-group sequences of affine forms from which every slice selection
/// takes prefixes. Forms of group `i` only involve the variables of group `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceBank {
    seed: u64,
    forms: Vec<Vec<AffineForm>>,
}

impl SliceBank {
    /// `n_i` random forms for every group.
    pub fn random(grouping: &VariableGrouping, rs: &mut RandomSource) -> Self {
        let n = grouping.nvars();
        let forms =
            grouping.groups().iter().map(|g| (0..g.vars.len()).map(|_| rs.affine_form(n, &g.vars)).collect()).collect();
        SliceBank { seed: rs.seed(), forms }
    }

    /// Random forms constrained to vanish at `point`.
    pub fn through(grouping: &VariableGrouping, point: &[Complex], rs: &mut RandomSource) -> Self {
        let mut bank = Self::random(grouping, rs);
        for forms in &mut bank.forms {
            for f in forms.iter_mut() {
                *f = f.through(point);
            }
        }
        bank
    }

    pub fn from_forms(seed: u64, grouping: &VariableGrouping, forms: Vec<Vec<AffineForm>>) -> Result<Self> {
        if forms.len() != grouping.ngroups() {
            return Err(Error::DimensionMismatch { expected: grouping.ngroups(), got: forms.len() });
        }
        for (i, fs) in forms.iter().enumerate() {
            for f in fs {
                if f.coeffs.len() != grouping.nvars() || f.support().iter().any(|&v| grouping.group_of(v) != i) {
                    return Err(Error::InvalidArgument(format!("bank form does not live in group {i}")));
                }
            }
        }
        Ok(SliceBank { seed, forms })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ngroups(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self, group: usize) -> &[AffineForm] {
        &self.forms[group]
    }

    /// Number of forms left in each group.
    pub fn available(&self) -> MultiIndex {
        MultiIndex(self.forms.iter().map(Vec::len).collect())
    }

    /// `L^e`: the first `e_i` forms of each group, groups in order.
    pub fn selection(&self, e: &MultiIndex) -> Result<SliceSelection> {
        if e.len() != self.forms.len() {
            return Err(Error::DimensionMismatch { expected: self.forms.len(), got: e.len() });
        }
        if !e.fits(&self.available()) {
            return Err(Error::InvalidArgument(format!("slice vector {} exceeds the bank", e.compact())));
        }
        let forms = self.forms.iter().zip(&e.0).flat_map(|(fs, &k)| fs[..k].iter().cloned()).collect();
        Ok(SliceSelection { e: e.clone(), forms })
    }

    /// Remove and return the first form of `group`.
    pub fn pop(&mut self, group: usize) -> Option<AffineForm> {
        let fs = self.forms.get_mut(group)?;
        (!fs.is_empty()).then(|| fs.remove(0))
    }

    pub(crate) fn remove_group(&mut self, group: usize) -> Vec<AffineForm> {
        self.forms.remove(group)
    }

    pub(crate) fn insert_group(&mut self, at: usize, forms: Vec<AffineForm>) {
        self.forms.insert(at, forms);
    }

    /// Every group's forms have independent linear parts.
    pub fn in_general_position(&self, grouping: &VariableGrouping, rel_tol: f64) -> bool {
        self.forms.iter().enumerate().all(|(i, fs)| {
            let vars = &grouping.group(i).vars;
            let data = fs.iter().flat_map(|f| vars.iter().map(|&v| f.coeffs[v])).collect();
            match CMatrix::from_rows(fs.len(), vars.len(), data) {
                Ok(m) => fs.is_empty() || numerical_rank(&m, rel_tol) == fs.len(),
                Err(_) => false,
            }
        })
    }
}

/// The slice forms of one witness set.
///
/// For selections taken from a bank, `e` counts the forms per group. Hand
/// built selections (e.g. forms through several groups) keep `e` only as a
/// label.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceSelection {
    pub e: MultiIndex,
    pub forms: Vec<AffineForm>,
}

impl SliceSelection {
    pub fn new(e: MultiIndex, forms: Vec<AffineForm>) -> Self {
        SliceSelection { e, forms }
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn polys(&self) -> Vec<Polynomial> {
        self.forms.iter().map(AffineForm::to_poly).collect()
    }

    /// Same linear parts, constants shifted so every form vanishes at `x`.
    pub fn through(&self, x: &[Complex]) -> SliceSelection {
        SliceSelection { e: self.e.clone(), forms: self.forms.iter().map(|f| f.through(x)).collect() }
    }

    pub fn max_residual(&self, x: &[Complex]) -> f64 {
        self.forms
            .iter()
            .map(|f| {
                let scale = f.coeffs.iter().map(|c| c.norm()).fold(f.constant.norm(), f64::max).max(1e-300);
                f.evaluate(x).norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherent_prefixes() {
        let g = VariableGrouping::standard(&[("x", 2), ("y", 3)]).unwrap();
        let mut rs = RandomSource::new(9, 0);
        let bank = SliceBank::random(&g, &mut rs);
        assert!(bank.in_general_position(&g, 1e-8));
        let small = bank.selection(&MultiIndex(vec![1, 1])).unwrap();
        let big = bank.selection(&MultiIndex(vec![2, 2])).unwrap();
        assert_eq!(small.forms[0], big.forms[0]);
        assert_eq!(small.forms[1], big.forms[2]);
        assert!(bank.selection(&MultiIndex(vec![3, 0])).is_err());
    }

    #[test]
    fn bank_through_point() {
        let g = VariableGrouping::standard(&[("x", 2), ("y", 1)]).unwrap();
        let mut rs = RandomSource::new(1, 1);
        let p = vec![Complex::new(0.3, 1.0), Complex::new(-2.0, 0.5), Complex::new(0.0, -1.0)];
        let bank = SliceBank::through(&g, &p, &mut rs);
        let sel = bank.selection(&bank.available()).unwrap();
        assert!(sel.max_residual(&p) < 1e-14);
    }
}
