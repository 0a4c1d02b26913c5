use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{dot, squared_distance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Polynomial { offset: f64, degree: u32 },
    Linear,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::Config(format!("RBF gamma must be positive, got {gamma}")))
            }
            KernelSpec::Polynomial { degree: 0, .. } => Err(Error::Config("polynomial degree must be >= 1".into())),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        Ok(self.eval_unchecked(x, y))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { gamma } => (-gamma * squared_distance(x, y)).exp(),
            KernelSpec::Polynomial { offset, degree } => (dot(x, y) + offset).powi(degree as i32),
            KernelSpec::Linear => dot(x, y),
        }
    }

    /// Distance in the kernel-induced feature space, evaluated without the self terms
    /// when they are known constants.
    pub(crate) fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let radicand = match self {
            KernelSpec::Rbf { .. } => 2.0 - 2.0 * self.eval_unchecked(x, y),
            _ => self.eval_unchecked(x, x) + self.eval_unchecked(y, y) - 2.0 * self.eval_unchecked(x, y),
        };
        radicand.max(0.0).sqrt()
    }
}

/// `sqrt(K(x,x) + K(y,y) - 2K(x,y))`, clamped at zero.
pub fn kernel_distance(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    Ok(spec.distance_unchecked(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_examples() {
        let rbf = KernelSpec::Rbf { gamma: 2.0 };
        assert_eq!(rbf.eval(&[0.3, -1.0], &[0.3, -1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(rbf.eval(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.135335, epsilon = 1e-6);
        let poly = KernelSpec::Polynomial { offset: 1.0, degree: 2 };
        assert_eq!(poly.eval(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(KernelSpec::Linear.eval(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            KernelSpec::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(kernel_distance(&KernelSpec::Linear, &[1.0], &[]).is_err());
    }

    #[test]
    fn distance_to_self_is_zero() {
        for spec in [KernelSpec::Rbf { gamma: 0.7 }, KernelSpec::Polynomial { offset: 1.0, degree: 3 }, KernelSpec::Linear] {
            assert_eq!(kernel_distance(&spec, &[0.2, 0.5, -0.1], &[0.2, 0.5, -0.1]).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_polynomial_distance_is_euclidean() {
        let spec = KernelSpec::Polynomial { offset: 0.0, degree: 1 };
        let (x, y) = ([1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]);
        let euclid = squared_distance(&x, &y).sqrt();
        assert_abs_diff_eq!(kernel_distance(&spec, &x, &y).unwrap(), euclid, epsilon = 1e-9);
    }

    #[test]
    fn validation() {
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Polynomial { offset: 0.0, degree: 0 }.validate().is_err());
        assert!(KernelSpec::Rbf { gamma: 2.0 }.validate().is_ok());
    }
}
