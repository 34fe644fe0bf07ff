use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::MultiIndex;
use crate::error::{Error, Result};

/// Map `e ↦ Deg(e)` over multi-indices of one total `|e|`. Zero values are
/// never stored, so the key set is the support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultidegreeMap {
    entries: BTreeMap<MultiIndex, u64>,
}

impl MultidegreeMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from compact or comma keys, e.g. `[("1100", 7), ("0011", 3)]`.
    pub fn from_pairs(k: usize, pairs: &[(&str, u64)]) -> Result<Self> {
        let mut m = MultidegreeMap::new();
        for (key, v) in pairs {
            m.insert(MultiIndex::parse(key, k)?, *v)?;
        }
        Ok(m)
    }

    pub fn insert(&mut self, e: MultiIndex, value: u64) -> Result<()> {
        if let Some(d) = self.total() {
            if e.total() != d {
                return Err(Error::InvalidArgument(format!("key {} does not have total {d}", e.compact())));
            }
        }
        if value > 0 {
            self.entries.insert(e, value);
        } else {
            self.entries.remove(&e);
        }
        Ok(())
    }

    pub fn get(&self, e: &MultiIndex) -> u64 {
        self.entries.get(e).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, u64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = &MultiIndex> {
        self.entries.keys()
    }

    /// Common `|e|`, or `None` for the empty map.
    pub fn total(&self) -> Option<usize> {
        self.entries.keys().next().map(MultiIndex::total)
    }

    /// Degrees after intersecting with one general form in group `i`:
    /// `Deg'(e) = Deg(e + ε_i)`.
    pub fn slice(&self, i: usize) -> Result<MultidegreeMap> {
        let mut out = MultidegreeMap::new();
        for (e, v) in &self.entries {
            if i >= e.len() {
                return Err(Error::InvalidArgument(format!("group {i} out of range")));
            }
            if e.get(i) > 0 {
                let mut f = e.0.clone();
                f[i] -= 1;
                out.entries.insert(MultiIndex(f), *v);
            }
        }
        if out.is_empty() {
            return Err(Error::EmptySlice(i));
        }
        Ok(out)
    }

    /// `Σ_e binom(|e|; e) · Deg(e)`.
    pub fn segre_degree(&self) -> Result<u64> {
        let mut total: u64 = 0;
        let d = self.total();
        for (e, v) in &self.entries {
            if Some(e.total()) != d {
                return Err(Error::InvalidArgument("mixed totals in multidegree map".into()));
            }
            let term = multinomial(&e.0)?.checked_mul(*v).ok_or(Error::Overflow("segre degree"))?;
            total = total.checked_add(term).ok_or(Error::Overflow("segre degree"))?;
        }
        Ok(total)
    }

    /// JSON object with compact keys.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.entries.iter().map(|(k, v)| (k.compact(), serde_json::Value::from(*v))).collect(),
        )
    }
}

impl fmt::Display for MultidegreeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(k, v)| format!("{}:{v}", k.compact())).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl FromIterator<(MultiIndex, u64)> for MultidegreeMap {
    fn from_iter<T: IntoIterator<Item = (MultiIndex, u64)>>(iter: T) -> Self {
        MultidegreeMap { entries: iter.into_iter().filter(|(_, v)| *v > 0).collect() }
    }
}

/// Multinomial coefficient `(Σ e)! / ∏ e_i!`, overflow-checked.
pub fn multinomial(e: &[usize]) -> Result<u64> {
    let mut acc: u64 = 1;
    let mut n: u64 = 0;
    for &ei in e {
        for j in 1..=ei as u64 {
            n += 1;
            // acc * n / j stays integral: acc*C(n, j) built incrementally
            let num = (acc as u128) * (n as u128);
            acc = u64::try_from(num / j as u128).map_err(|_| Error::Overflow("multinomial"))?;
        }
    }
    Ok(acc)
}

/// Binomial coefficient, overflow-checked.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    multinomial(&[k, n - k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomials() {
        assert_eq!(multinomial(&[2, 1]).unwrap(), 3);
        assert_eq!(multinomial(&[1, 1, 1]).unwrap(), 6);
        assert_eq!(multinomial(&[0, 3, 2]).unwrap(), 10);
        assert_eq!(binomial(6, 3).unwrap(), 20);
        assert_eq!(binomial(2, 3).unwrap(), 0);
    }

    #[test]
    fn segre_examples() {
        let m = MultidegreeMap::from_pairs(1, &[("3", 7)]).unwrap();
        assert_eq!(m.segre_degree().unwrap(), 7);
        let cubic = MultidegreeMap::from_pairs(2, &[("10", 2), ("01", 3)]).unwrap();
        assert_eq!(cubic.segre_degree().unwrap(), 5);
    }

    #[test]
    fn mixed_totals_rejected() {
        let mut m = MultidegreeMap::new();
        m.insert(MultiIndex(vec![1, 0]), 1).unwrap();
        assert!(m.insert(MultiIndex(vec![1, 1]), 1).is_err());
    }

    #[test]
    fn slicing_shifts_keys() {
        let m = MultidegreeMap::from_pairs(
            4,
            &[("1100", 7), ("1010", 6), ("1001", 5), ("0110", 5), ("0101", 4), ("0011", 3)],
        )
        .unwrap();
        let s = m.slice(0).unwrap();
        assert_eq!(s, MultidegreeMap::from_pairs(4, &[("0100", 7), ("0010", 6), ("0001", 5)]).unwrap());
        let t = MultidegreeMap::from_pairs(2, &[("01", 3)]).unwrap();
        assert_eq!(t.slice(0).unwrap_err(), Error::EmptySlice(0));
    }
}
