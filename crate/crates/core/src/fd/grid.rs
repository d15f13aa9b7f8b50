use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[−L, L] × [0, d]`.
///
/// `n1` interior columns (the Dirichlet walls are not unknowns) and `n2`
/// interior rows; the two boundary rows `x₂ = 0, d` are unknowns as well, so
/// each column carries `n2 + 2` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripGrid {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2")]
    pub n2: usize,
    pub d: f64,
}

impl StripGrid {
    pub fn new(l: f64, n1: usize, n2: usize, d: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite() && d > 0.0 && d.is_finite()) {
            return Err(Error::Grid(format!("need L > 0 and d > 0, got L = {l}, d = {d}")));
        }
        if n1 < 1 || n2 < 2 {
            return Err(Error::Grid(format!("need N1 >= 1 and N2 >= 2, got {n1}, {n2}")));
        }
        Ok(Self { l, n1, n2, d })
    }

    /// Grid with steps closest to `h1`, `h2` from above.
    pub fn with_steps(l: f64, h1: f64, h2: f64, d: f64) -> Result<Self> {
        let n1 = ((2.0 * l / h1).ceil() as usize).max(2) - 1;
        let n2 = ((d / h2).ceil() as usize).max(3) - 1;
        Self::new(l, n1, n2, d)
    }

    pub fn h1(&self) -> f64 {
        2.0 * self.l / (self.n1 + 1) as f64
    }

    pub fn h2(&self) -> f64 {
        self.d / (self.n2 + 1) as f64
    }

    pub fn x1(&self, i: usize) -> f64 {
        -self.l + (i + 1) as f64 * self.h1()
    }

    pub fn x2(&self, k: usize) -> f64 {
        k as f64 * self.h2()
    }

    /// Unknowns per column.
    pub fn column_len(&self) -> usize {
        self.n2 + 2
    }

    pub fn dim(&self) -> usize {
        self.n1 * self.column_len()
    }

    /// Linear index with `x₂` running fastest.
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.column_len() + k
    }

    /// Both steps halved.
    pub fn refined(&self) -> Self {
        Self {
            n1: 2 * (self.n1 + 1) - 1,
            n2: 2 * (self.n2 + 1) - 1,
            ..*self
        }
    }

    /// Rejects perturbations reaching within five steps of the truncation walls.
    pub fn check_support(&self, support: (f64, f64)) -> Result<()> {
        let margin = 5.0 * self.h1();
        if support.0 <= -self.l + margin || support.1 >= self.l - margin {
            return Err(Error::Grid(format!(
                "perturbation support [{}, {}] not inside (-L + 5h1, L - 5h1) = ({}, {})",
                support.0,
                support.1,
                -self.l + margin,
                self.l - margin
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_and_nodes() {
        let g = StripGrid::new(2.0, 3, 4, 1.0).unwrap();
        assert_eq!(g.h1(), 1.0);
        assert_eq!(g.h2(), 0.2);
        assert_eq!(g.x1(0), -1.0);
        assert_eq!(g.x1(2), 1.0);
        assert_eq!(g.x2(5), 1.0);
        assert_eq!(g.dim(), 18);
        assert_eq!(g.index(1, 2), 8);
    }

    #[test]
    fn refinement_halves_steps() {
        let g = StripGrid::new(3.0, 29, 7, 2.0).unwrap();
        let r = g.refined();
        assert!((r.h1() - g.h1() / 2.0).abs() < 1e-15);
        assert!((r.h2() - g.h2() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn support_margin() {
        let g = StripGrid::new(5.0, 99, 8, 1.0).unwrap();
        assert!(g.check_support((-4.0, 4.0)).is_ok());
        assert!(matches!(g.check_support((-4.6, 0.0)), Err(Error::Grid(_))));
        assert!(StripGrid::new(0.0, 3, 3, 1.0).is_err());
        assert!(StripGrid::new(1.0, 3, 1, 1.0).is_err());
    }
}
