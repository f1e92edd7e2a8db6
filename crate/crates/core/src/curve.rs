use rayon::prelude::*;

use crate::error::Result;

/// A sampled series over dimensionless time `t/τ_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// What the values are, e.g. `gamma_over_Gamma_T` or `g`.
    pub quantity: String,
    /// Short label for the parameter set, used as a column name.
    pub label: String,
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    /// Parameter echo, in insertion order.
    pub meta: Vec<(String, String)>,
}

/// `n` uniform samples on `[start, end]`, both ends included.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let h = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        end
                    } else {
                        start + i as f64 * h
                    }
                })
                .collect()
        }
    }
}

impl Curve {
    /// Evaluates `f` at every abscissa point. Points are evaluated in
    /// parallel; the output order always follows `abscissa`.
    pub fn sample<F>(
        quantity: impl Into<String>,
        label: impl Into<String>,
        abscissa: Vec<f64>,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let values = abscissa
            .par_iter()
            .map(|&x| f(x))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Curve {
            quantity: quantity.into(),
            label: label.into(),
            abscissa,
            values,
            meta: Vec::new(),
        })
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// Abscissa strictly increasing and as many values as abscissa points.
    pub fn is_well_formed(&self) -> bool {
        self.abscissa.len() == self.values.len() && self.abscissa.windows(2).all(|w| w[1] > w[0])
    }

    /// `(abscissa, value)` at the largest value.
    pub fn argmax(&self) -> Option<(f64, f64)> {
        self.extremum(|a, b| a > b)
    }

    /// `(abscissa, value)` at the smallest value.
    pub fn argmin(&self) -> Option<(f64, f64)> {
        self.extremum(|a, b| a < b)
    }

    fn extremum(&self, better: impl Fn(f64, f64) -> bool) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (&x, &v) in self.abscissa.iter().zip(&self.values) {
            if best.is_none_or(|(_, b)| better(v, b)) {
                best = Some((x, v));
            }
        }
        best
    }

    /// Indices of strict interior local minima.
    pub fn interior_minima(&self) -> Vec<usize> {
        let v = &self.values;
        (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])
            .collect()
    }
}
