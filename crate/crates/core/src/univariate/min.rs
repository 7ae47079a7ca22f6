use crate::error::{Error, Result};

use super::{Marginal, MarginalRef};

/// Law of the minimum of independent lifetimes: survival is the product of
/// the component survivals.
#[derive(Debug, Clone)]
pub struct MinOfIndependent {
    parts: Vec<MarginalRef>,
}

impl MinOfIndependent {
    pub fn new(parts: Vec<MarginalRef>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("minimum of zero lifetimes".into()));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[MarginalRef] {
        &self.parts
    }

    fn survivals(&self, x: f64) -> Vec<f64> {
        self.parts.iter().map(|p| p.survival(x)).collect()
    }
}

fn product_except(values: &[f64], skip: &[usize]) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, v)| *v)
        .product()
}

impl Marginal for MinOfIndependent {
    fn label(&self) -> String {
        let names: Vec<String> = self.parts.iter().map(|p| p.label()).collect();
        format!("min({})", names.join(", "))
    }

    fn survival(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.survival(x)).product()
    }

    fn density(&self, x: f64) -> f64 {
        let s = self.survivals(x);
        self.parts
            .iter()
            .enumerate()
            .map(|(i, p)| p.density(x) * product_except(&s, &[i]))
            .sum()
    }

    fn density_derivative(&self, x: f64) -> f64 {
        let s = self.survivals(x);
        let f: Vec<f64> = self.parts.iter().map(|p| p.density(x)).collect();
        let mut total = 0.0;
        for (i, p) in self.parts.iter().enumerate() {
            total += p.density_derivative(x) * product_except(&s, &[i]);
            for j in 0..self.parts.len() {
                if j != i {
                    total -= f[i] * f[j] * product_except(&s, &[i, j]);
                }
            }
        }
        total
    }

    fn cumulative_hazard(&self, x: f64) -> f64 {
        self.parts.iter().map(|p| p.cumulative_hazard(x)).sum()
    }

    fn left_extremity(&self) -> f64 {
        self.parts.iter().map(|p| p.left_extremity()).fold(0.0, f64::max)
    }
}
