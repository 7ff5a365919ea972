use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// An electronic potential-energy curve `V_n(r)` in hartree.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialCurve {
    /// `V∞ - Dₑ + Dₑ (1 - e^{-a(r - rₑ)})²`
    Morse {
        depth: f64,
        width: f64,
        r_eq: f64,
        asymptote: f64,
    },
    /// `A e^{-b r} + V∞`
    RepulsiveExponential {
        amplitude: f64,
        decay: f64,
        asymptote: f64,
    },
    Tabulated(Table),
}

impl PotentialCurve {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            PotentialCurve::Morse {
                depth,
                width,
                r_eq,
                asymptote,
            } => {
                let x = 1.0 - (-width * (r - r_eq)).exp();
                asymptote - depth + depth * x * x
            }
            PotentialCurve::RepulsiveExponential {
                amplitude,
                decay,
                asymptote,
            } => amplitude * (-decay * r).exp() + asymptote,
            PotentialCurve::Tabulated(ref table) => table.value(r),
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        let values: Vec<f64> = grid.points().iter().map(|&r| self.value(r)).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "potential is not finite at r = {}",
                grid.points()[i]
            )));
        }
        Ok(values)
    }

    /// Large-`r` limit of the curve.
    pub fn asymptote(&self) -> f64 {
        match *self {
            PotentialCurve::Morse { asymptote, .. } => asymptote,
            PotentialCurve::RepulsiveExponential { asymptote, .. } => asymptote,
            PotentialCurve::Tabulated(ref t) => *t.values.last().expect("non-empty table"),
        }
    }
}

/// Transition dipole `μ₀₁(r)` in atomic units.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionDipole {
    Constant(f64),
    Tabulated(Table),
}

impl TransitionDipole {
    pub fn value(&self, r: f64) -> f64 {
        match self {
            TransitionDipole::Constant(mu) => *mu,
            TransitionDipole::Tabulated(t) => t.value(r),
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        let values: Vec<f64> = grid.points().iter().map(|&r| self.value(r)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("transition dipole is not finite".into()));
        }
        Ok(values)
    }
}

/// Two-column table interpolated with a natural cubic spline. Values are
/// held constant beyond the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    r: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Table {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() {
            return Err(Error::Shape {
                expected: r.len(),
                got: values.len(),
            });
        }
        if r.len() < 2 {
            return Err(Error::Config("a table needs at least two rows".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("table radii must be strictly increasing".into()));
        }
        if r.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Domain("table contains non-finite entries".into()));
        }
        let second = natural_spline_second_derivatives(&r, &values);
        Ok(Table { r, values, second })
    }

    /// Reads whitespace-separated `r value` rows; `#` starts a comment.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    path: String::new(),
                    message: format!("line {}: `{s}` is not a number", lineno + 1),
                })
            };
            if cols.len() != 2 {
                return Err(Error::Parse {
                    path: String::new(),
                    message: format!("line {}: expected two columns", lineno + 1),
                });
            }
            r.push(parse(cols[0])?);
            v.push(parse(cols[1])?);
        }
        Table::new(r, v)
    }

    /// The tabulated `(r, value)` columns.
    pub fn rows(&self) -> (&[f64], &[f64]) {
        (&self.r, &self.values)
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return self.values[0];
        }
        if x >= self.r[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.r.partition_point(|&ri| ri <= x);
        let lo = hi - 1;
        let h = self.r[hi] - self.r[lo];
        let a = (self.r[hi] - x) / h;
        let b = (x - self.r[lo]) / h;
        let (s_lo, s_hi) = (self.second[lo], self.second[hi]);
        a * self.values[lo]
            + b * self.values[hi]
            + ((a * a * a - a) * s_lo + (b * b * b - b) * s_hi) * h * h / 6.0
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut second = vec![0.0; n];
    if n < 3 {
        return second;
    }
    let mut u = vec![0.0; n];
    for i in 1..n - 1 {
        let sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        let p = sig * second[i - 1] + 2.0;
        second[i] = (sig - 1.0) / p;
        let slope = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
        u[i] = (6.0 * slope / (x[i + 1] - x[i - 1]) - sig * u[i - 1]) / p;
    }
    second[n - 1] = 0.0;
    for k in (0..n - 1).rev() {
        second[k] = second[k] * second[k + 1] + u[k];
    }
    second
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn morse_minimum_at_equilibrium() {
        let m = PotentialCurve::Morse {
            depth: 0.1,
            width: 1.2,
            r_eq: 2.5,
            asymptote: 0.02,
        };
        assert!((m.value(2.5) - (0.02 - 0.1)).abs() < 1e-15);
        assert!(m.value(2.4) > m.value(2.5));
        assert!(m.value(2.6) > m.value(2.5));
        assert!((m.value(200.0) - 0.02).abs() < 1e-12);
    }

    #[test]
    fn spline_reproduces_nodes_and_cubics_between() {
        let r: Vec<f64> = (0..40).map(|i| 1.0 + 0.25 * i as f64).collect();
        let v: Vec<f64> = r.iter().map(|x| (-x).exp()).collect();
        let t = Table::new(r.clone(), v.clone()).unwrap();
        for (x, y) in r.iter().zip(&v) {
            assert!((t.value(*x) - y).abs() < 1e-15);
        }
        let x = 3.13;
        assert!((t.value(x) - (-x as f64).exp()).abs() < 1e-4);
        assert_eq!(t.value(0.0), v[0]);
        assert_eq!(t.value(100.0), *v.last().unwrap());
    }

    #[test]
    fn parse_table_text() {
        let t = Table::parse("# r V\n1.0 0.5\n2.0 0.25 # comment\n\n3.0 0.125\n").unwrap();
        assert_eq!(t.value(2.0), 0.25);
        assert!(Table::parse("1.0 0.5\n0.5 0.2\n").is_err());
        let err = Table::parse("1.0 x\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }
}
