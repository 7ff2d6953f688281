//! Sampled fields of diagonals: a finite set of named cells, each with its own
//! sequence, plus the split/glue plumbing used to evaluate one branch at a time.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seq::DiagonalSpec;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub cell: String,
    pub spec: DiagonalSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Cell>", into = "Vec<Cell>")]
pub struct CellField {
    cells: Vec<Cell>,
}

impl TryFrom<Vec<Cell>> for CellField {
    type Error = Error;

    fn try_from(cells: Vec<Cell>) -> Result<Self> {
        CellField::new(cells)
    }
}

impl From<CellField> for Vec<Cell> {
    fn from(f: CellField) -> Self {
        f.cells
    }
}

impl CellField {
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &cells {
            if !seen.insert(c.cell.as_str()) {
                return Err(Error::invalid(format!("duplicate cell id '{}'", c.cell)));
            }
        }
        Ok(CellField { cells })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.cells.iter().map(|c| c.cell.clone()).collect()
    }

    /// Groups cells by `key`, keeping field order inside each group.
    pub fn split<K: Ord>(&self, key: impl Fn(&Cell) -> K) -> BTreeMap<K, Vec<Cell>> {
        let mut out: BTreeMap<K, Vec<Cell>> = BTreeMap::new();
        for c in &self.cells {
            out.entry(key(c)).or_default().push(c.clone());
        }
        out
    }
}

/// Merges per-part outputs back into one output per cell of `ids`, in the
/// order of `ids`. Parts must be pairwise disjoint and together cover `ids`.
pub fn glue<T>(ids: &[String], parts: Vec<Vec<(String, T)>>) -> Result<Vec<(String, T)>> {
    let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
    let mut by_id: BTreeMap<String, T> = BTreeMap::new();
    for part in parts {
        for (id, value) in part {
            if !wanted.contains(id.as_str()) {
                return Err(Error::Partition(format!("cell '{id}' is not in the field")));
            }
            if by_id.insert(id.clone(), value).is_some() {
                return Err(Error::Partition(format!("cell '{id}' appears in two parts")));
            }
        }
    }
    ids.iter()
        .map(|id| {
            by_id
                .remove(id)
                .map(|v| (id.clone(), v))
                .ok_or_else(|| Error::Partition(format!("cell '{id}' is not covered by any part")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn field(n: usize) -> CellField {
        let cells = (0..n)
            .map(|i| Cell {
                cell: format!("c{i}"),
                spec: DiagonalSpec::finite(vec![rat(i as i64 % 3, 3)]).unwrap(),
            })
            .collect();
        CellField::new(cells).unwrap()
    }

    #[test]
    fn two_singletons_glue_to_union() {
        let ids = vec!["x".to_string(), "y".to_string()];
        let out = glue(&ids, vec![vec![("y".into(), 2)], vec![("x".into(), 1)]]).unwrap();
        assert_eq!(out, vec![("x".to_string(), 1), ("y".to_string(), 2)]);
    }

    #[test]
    fn empty_field_glues_to_empty() {
        let out: Vec<(String, u8)> = glue(&[], vec![]).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn three_parts_cover_five_cells() {
        let f = field(5);
        let parts = f.split(|c| c.cell.len() + c.spec.prefix()[0].numer().to_string().len() % 3);
        let parts: Vec<Vec<(String, String)>> = parts
            .into_values()
            .map(|cs| cs.into_iter().map(|c| (c.cell.clone(), c.cell)).collect())
            .collect();
        let out = glue(&f.ids(), parts).unwrap();
        assert_eq!(out.len(), 5);
        for (id, v) in out {
            assert_eq!(id, v);
        }
    }

    #[test]
    fn overlap_and_gap_are_partition_errors() {
        let ids = vec!["x".to_string(), "y".to_string()];
        let overlap = glue(&ids, vec![vec![("x".into(), 1)], vec![("x".into(), 1), ("y".into(), 2)]]);
        assert!(matches!(overlap, Err(Error::Partition(_))));
        let gap = glue(&ids, vec![vec![("x".into(), 1)]]);
        assert!(matches!(gap, Err(Error::Partition(_))));
    }

    #[test]
    fn split_then_glue_is_identity() {
        let f = field(7);
        let parts = f.split(|c| c.spec.prefix()[0].clone());
        let parts = parts
            .into_values()
            .map(|cs| cs.into_iter().map(|c| (c.cell.clone(), c.spec)).collect())
            .collect();
        let out = glue(&f.ids(), parts).unwrap();
        let back: Vec<Cell> = out.into_iter().map(|(cell, spec)| Cell { cell, spec }).collect();
        assert_eq!(CellField::new(back).unwrap(), f);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"[{"cell":"a","spec":{"prefix":[],"tail":{"kind":"zero"}}},
                       {"cell":"a","spec":{"prefix":[],"tail":{"kind":"zero"}}}]"#;
        assert!(CellField::from_json(text).is_err());
    }
}
