use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{domain, Result};

/// A named column of samples aligned with a [`TimeSeries`] grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Sampled observables on a strictly increasing time grid (units of 1/g).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    times: Vec<f64>,
    columns: Vec<Column>,
    metadata: Vec<(String, String)>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(domain!("time grid is empty"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(domain!("time grid contains a non-finite value"));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(domain!("time grid is not strictly increasing at {} -> {}", w[0], w[1]));
        }
        Ok(TimeSeries { times, columns: Vec::new(), metadata: Vec::new() })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(domain!("column {} has {} values for {} time points", name, values.len(), self.times.len()));
        }
        if self.column(name).is_some() {
            return Err(domain!("duplicate column {}", name));
        }
        self.columns.push(Column { name: name.to_string(), values });
        Ok(())
    }

    pub fn with_column(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.push_column(name, values)?;
        Ok(self)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
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

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => (0..n).map(|k| start + (end - start) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_grid_and_columns() {
        assert!(TimeSeries::new(alloc::vec![]).is_err());
        assert!(TimeSeries::new(alloc::vec![0.0, 0.0]).is_err());
        let mut ts = TimeSeries::new(uniform_grid(0.0, 1.0, 3)).unwrap();
        assert!(ts.push_column("x", alloc::vec![1.0]).is_err());
        ts.push_column("x", alloc::vec![1.0, 2.0, 3.0]).unwrap();
        assert!(ts.push_column("x", alloc::vec![1.0, 2.0, 3.0]).is_err());
        assert_eq!(ts.column("x").unwrap()[2], 3.0);
        ts.set_meta("g", 1.0);
        ts.set_meta("g", 2.0);
        assert_eq!(ts.meta("g"), Some("2"));
    }
}
