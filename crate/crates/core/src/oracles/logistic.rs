use super::{OptimalValue, RegularityClass, SmoothOracle};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Tikhonov-regularized logistic loss
/// `f(x) = (1/m) Σ log(1 + exp(−yᵢ aᵢᵀx)) + (reg/2)‖x‖²`.
#[derive(Clone, Debug)]
pub struct Logistic {
    features: Matrix,
    labels: Vector,
    reg: f64,
    class: RegularityClass,
    optimum: Option<OptimalValue>,
}

/// `L = ‖A‖²/(4m) + reg`, `μ = reg`. `f*` is left unset.
pub fn make_logistic(features: Matrix, labels: Vector, reg: f64) -> Result<Logistic> {
    if features.nrows() == 0 || features.ncols() == 0 {
        return Err(Error::EmptyData);
    }
    linalg::check_dim(&labels, features.nrows())?;
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "regularization {reg} must be >= 0"
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidLabel(bad));
    }
    let m = features.nrows() as f64;
    let mut l = linalg::operator_norm_sq(&features) / (4.0 * m) + reg;
    if l <= reg {
        // all-zero features: the loss is constant, any L > reg works
        l = reg + f64::EPSILON.max(reg * 1e-12);
    }
    let class = RegularityClass::new(reg, l)?;
    Ok(Logistic {
        features,
        labels,
        reg,
        class,
        optimum: None,
    })
}

// log(1 + exp(z)) without overflow
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Logistic {
    pub fn with_optimum(mut self, optimum: OptimalValue) -> Self {
        self.optimum = Some(optimum);
        self
    }

    pub fn reg(&self) -> f64 {
        self.reg
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &Vector {
        &self.labels
    }
}

impl SmoothOracle for Logistic {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.value_and_gradient(x).0
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.value_and_gradient(x).1
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let m = self.features.nrows() as f64;
        let margins = &self.features * x;
        let mut loss = 0.0;
        let mut weights = Vector::zeros(margins.len());
        for (i, (&z, &y)) in margins.iter().zip(self.labels.iter()).enumerate() {
            loss += softplus(-y * z);
            weights[i] = -y * sigmoid(-y * z) / m;
        }
        let value = loss / m + 0.5 * self.reg * x.norm_squared();
        let grad = self.features.tr_mul(&weights) + self.reg * x;
        (value, grad)
    }

    fn class(&self) -> RegularityClass {
        self.class
    }

    fn optimum(&self) -> Option<OptimalValue> {
        self.optimum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_feature_gives_log2() {
        let reg = 0.3;
        let f = make_logistic(Matrix::zeros(1, 2), Vector::from_vec(vec![1.0]), reg).unwrap();
        let x = Vector::from_vec(vec![1.5, -2.0]);
        let expected = 2f64.ln() + 0.5 * reg * x.norm_squared();
        assert!((f.value(&x) - expected).abs() < 1e-14);
    }

    #[test]
    fn separable_infimum_is_zero() {
        let f = make_logistic(
            Matrix::from_row_slice(1, 1, &[1.0]),
            Vector::from_vec(vec![1.0]),
            0.0,
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for t in [1.0, 10.0, 100.0, 700.0] {
            let v = f.value(&Vector::from_vec(vec![t]));
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        assert!(prev < 1e-300);
        assert_eq!(f.class().mu(), 0.0);
    }

    #[test]
    fn class_constants() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let f = make_logistic(a, Vector::from_vec(vec![1.0, -1.0]), 1e-3).unwrap();
        assert!((f.class().l() - (4.0 / 8.0 + 1e-3)).abs() < 1e-12);
        assert_eq!(f.class().mu(), 1e-3);
        assert!(f.optimum().is_none());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            make_logistic(Matrix::zeros(0, 2), Vector::zeros(0), 0.1),
            Err(Error::EmptyData)
        ));
        assert!(matches!(
            make_logistic(
                Matrix::identity(2, 2),
                Vector::from_vec(vec![1.0, 0.0]),
                0.1
            ),
            Err(Error::InvalidLabel(_))
        ));
        assert!(make_logistic(
            Matrix::identity(2, 2),
            Vector::from_vec(vec![1.0, -1.0]),
            -1.0
        )
        .is_err());
    }

    #[test]
    fn extreme_margins_stay_finite() {
        let f = make_logistic(
            Matrix::from_row_slice(1, 1, &[1.0]),
            Vector::from_vec(vec![-1.0]),
            0.0,
        )
        .unwrap();
        let (v, g) = f.value_and_gradient(&Vector::from_vec(vec![1e4]));
        assert!((v - 1e4).abs() < 1e-9);
        assert!((g[0] - 1.0).abs() < 1e-12);
    }
}
