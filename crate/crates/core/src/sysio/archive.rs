use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{Error, Result};

pub const ARCHIVE_VERSION: u64 = 1;

/// Group record of an archive: name and variable names.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveGroup {
    pub name: String,
    pub vars: Vec<String>,
}

/// On-disk witness data.
///
/// `slices` maps a group name to its remaining bank forms, each stored as
/// `[c.re, c.im, a_1.re, a_1.im, …]` (constant, then the coefficients of the
/// group's variables in group order). `witness` maps a comma-separated
/// multi-index to its points, each a flat `[re, im, …]` list over all
/// variables.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessArchive {
    pub version: u64,
    pub seed: u64,
    pub groups: Vec<ArchiveGroup>,
    pub system: String,
    pub slices: BTreeMap<String, Vec<Vec<f64>>>,
    pub witness: BTreeMap<String, Vec<Vec<f64>>>,
}

fn num(v: f64) -> String {
    // 17 significant digits identify every finite double exactly
    format!("{v:.16e}")
}

fn write_rows(out: &mut String, rows: &[Vec<f64>]) {
    out.push('[');
    for (i, r) in rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        let parts: Vec<String> = r.iter().map(|&v| num(v)).collect();
        out.push_str(&parts.join(","));
        out.push(']');
    }
    out.push(']');
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

impl WitnessArchive {
    pub fn nvars(&self) -> usize {
        self.groups.iter().map(|g| g.vars.len()).sum()
    }

    /// Serialize with fields in the fixed order
    /// `version, seed, groups, system, slices, witness`.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{{\"version\":{},\"seed\":{},\"groups\":[", self.version, self.seed);
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let vars: Vec<String> = g.vars.iter().map(|v| quote(v)).collect();
            let _ = write!(out, "{{\"name\":{},\"vars\":[{}]}}", quote(&g.name), vars.join(","));
        }
        let _ = write!(out, "],\"system\":{},\"slices\":{{", quote(&self.system));
        for (i, (k, rows)) in self.slices.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&quote(k));
            out.push(':');
            write_rows(&mut out, rows);
        }
        out.push_str("},\"witness\":{");
        for (i, (k, rows)) in self.witness.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&quote(k));
            out.push(':');
            write_rows(&mut out, rows);
        }
        out.push_str("}}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<WitnessArchive> {
        let v: Value = serde_json::from_str(text).map_err(|e| {
            if e.is_eof() {
                Error::Archive(format!("truncated archive: {e}"))
            } else {
                Error::Archive(format!("malformed archive: {e}"))
            }
        })?;
        let obj = v.as_object().ok_or_else(|| Error::Archive("archive must be a JSON object".into()))?;
        let expected = ["version", "seed", "groups", "system", "slices", "witness"];
        for k in obj.keys() {
            if !expected.contains(&k.as_str()) {
                return Err(Error::Archive(format!("unexpected field {k}")));
            }
        }
        let field = |k: &str| obj.get(k).ok_or_else(|| Error::Archive(format!("missing field {k}")));
        let version = field("version")?.as_u64().ok_or_else(|| Error::Archive("version must be an integer".into()))?;
        if version != ARCHIVE_VERSION {
            return Err(Error::Archive(format!("unsupported archive version {version}")));
        }
        let seed = field("seed")?.as_u64().ok_or_else(|| Error::Archive("seed must be an integer".into()))?;
        let mut groups = Vec::new();
        for g in field("groups")?.as_array().ok_or_else(|| Error::Archive("groups must be a list".into()))? {
            let name =
                g.get("name").and_then(Value::as_str).ok_or_else(|| Error::Archive("group without name".into()))?;
            let vars = g
                .get("vars")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Archive(format!("group {name} without vars")))?
                .iter()
                .map(|s| {
                    s.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::Archive("variable names must be strings".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            groups.push(ArchiveGroup { name: name.to_string(), vars });
        }
        let system =
            field("system")?.as_str().ok_or_else(|| Error::Archive("system must be a string".into()))?.to_string();
        let archive = WitnessArchive {
            version,
            seed,
            slices: rows_map(field("slices")?)?,
            witness: rows_map(field("witness")?)?,
            groups,
            system,
        };
        archive.check_arity()?;
        Ok(archive)
    }

    fn check_arity(&self) -> Result<()> {
        let n = self.nvars();
        for (k, pts) in &self.witness {
            if k.split(',').count() != self.groups.len() {
                return Err(Error::Archive(format!("witness key {k} does not match {} groups", self.groups.len())));
            }
            for p in pts {
                if p.len() != 2 * n {
                    return Err(Error::Archive(format!(
                        "point under key {k} has {} reals, expected {}",
                        p.len(),
                        2 * n
                    )));
                }
            }
        }
        for (name, forms) in &self.slices {
            let g = self
                .groups
                .iter()
                .find(|g| &g.name == name)
                .ok_or_else(|| Error::Archive(format!("slices for unknown group {name}")))?;
            for f in forms {
                if f.len() != 2 * (g.vars.len() + 1) {
                    return Err(Error::Archive(format!("slice form of group {name} has wrong length")));
                }
            }
        }
        Ok(())
    }
}

fn rows_map(v: &Value) -> Result<BTreeMap<String, Vec<Vec<f64>>>> {
    let obj = v.as_object().ok_or_else(|| Error::Archive("expected an object of lists".into()))?;
    let mut out = BTreeMap::new();
    for (k, rows) in obj {
        let rows = rows
            .as_array()
            .ok_or_else(|| Error::Archive(format!("entry {k} must be a list")))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Archive(format!("entry {k} must hold lists of numbers")))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| Error::Archive(format!("non-numeric value under {k}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(k.clone(), rows);
    }
    Ok(out)
}

/// Save then load; the result must equal the input.
pub fn save_load_witness(archive: &WitnessArchive) -> Result<WitnessArchive> {
    WitnessArchive::from_json(&archive.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> WitnessArchive {
        WitnessArchive {
            version: 1,
            seed: 42,
            groups: vec![
                ArchiveGroup { name: "x".into(), vars: vec!["x".into()] },
                ArchiveGroup { name: "y".into(), vars: vec!["y".into()] },
            ],
            system: "group x;\ngroup y;\nf1 = y^2 - x;\n".into(),
            slices: BTreeMap::from([("x".to_string(), vec![vec![0.1, -0.2, 1.0 / 3.0, 2.0f64.sqrt()]])]),
            witness: BTreeMap::new(),
        }
    }

    #[test]
    fn empty_collection_round_trips() {
        let a = sample();
        assert_eq!(save_load_witness(&a).unwrap(), a);
    }

    #[test]
    fn points_round_trip_bit_exactly() {
        let mut a = sample();
        let pts = vec![
            vec![0.1 + 0.2, -1e-300, std::f64::consts::PI, -0.0],
            vec![1.0 / 7.0, 6.02214076e23, -2.5e-17, 5e-324],
        ];
        a.witness.insert("1,0".into(), pts.clone());
        let b = save_load_witness(&a).unwrap();
        for (p, q) in pts.iter().zip(&b.witness["1,0"]) {
            for (u, v) in p.iter().zip(q) {
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn rejects_other_versions() {
        let text = sample().to_json().replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(WitnessArchive::from_json(&text), Err(Error::Archive(_))));
    }

    #[test]
    fn rejects_truncation_and_bad_arity() {
        let text = sample().to_json();
        assert!(WitnessArchive::from_json(&text[..text.len() / 2]).is_err());
        let mut a = sample();
        a.witness.insert("1,0".into(), vec![vec![1.0, 2.0, 3.0]]);
        assert!(WitnessArchive::from_json(&a.to_json()).is_err());
    }
}
