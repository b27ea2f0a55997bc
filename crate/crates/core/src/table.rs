//! Column-oriented sweep results.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TableError {
    LengthMismatch { column: String, expected: usize, found: usize },
    DuplicateColumn(String),
}

impl fmt::Display for TableError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableError::LengthMismatch { column, expected, found } => {
                write!(f, "column `{column}` has {found} entries, axis has {expected}")
            }
            TableError::DuplicateColumn(c) => write!(f, "duplicate column `{c}`"),
        }
    }
}

impl core::error::Error for TableError {}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// A sweep axis plus named value columns and free-form metadata.
///
/// Masked cells hold NaN.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumTable {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub columns: Vec<Column>,
    pub metadata: Vec<(String, String)>,
}

impl SpectrumTable {
    pub fn new(axis_name: &str, axis: Vec<f64>) -> Self {
        SpectrumTable { axis_name: axis_name.to_string(), axis, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<(), TableError> {
        if values.len() != self.axis.len() {
            return Err(TableError::LengthMismatch {
                column: name.to_string(),
                expected: self.axis.len(),
                found: values.len(),
            });
        }
        if self.column(name).is_some() {
            return Err(TableError::DuplicateColumn(name.to_string()));
        }
        self.columns.push(Column { name: name.to_string(), values });
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.metadata.push((key.to_string(), value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Index of the largest finite entry of a column.
    pub fn argmax(&self, name: &str) -> Option<usize> {
        let col = self.column(name)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in col.iter().enumerate() {
            if v.is_finite() && best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Appends rows of another table with the same columns.
    pub fn extend(&mut self, other: &SpectrumTable) -> Result<(), TableError> {
        for c in &self.columns {
            if other.column(&c.name).is_none() {
                return Err(TableError::LengthMismatch {
                    column: c.name.clone(),
                    expected: other.len(),
                    found: 0,
                });
            }
        }
        self.axis.extend_from_slice(&other.axis);
        for c in self.columns.iter_mut() {
            c.values.extend_from_slice(other.column(&c.name).unwrap_or(&[]));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_ragged_columns() {
        let mut t = SpectrumTable::new("delta", vec![0.0, 1.0]);
        assert!(t.push_column("T", vec![1.0]).is_err());
        t.push_column("T", vec![0.2, f64::NAN]).unwrap();
        assert!(t.push_column("T", vec![0.0, 0.0]).is_err());
        assert_eq!(t.argmax("T"), Some(0));
    }

    #[test]
    fn metadata_overwrites() {
        let mut t = SpectrumTable::new("x", vec![]);
        t.set_meta("solver", "a");
        t.set_meta("solver", "b");
        assert_eq!(t.meta("solver"), Some("b"));
        assert_eq!(t.metadata.len(), 1);
    }
}
