//! Box-Cox power transformation with grid-search maximum-likelihood λ
//! selection, and column-wise z-score standardization.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Box-Cox transform of one value: (x^λ − 1)/λ, ln x at λ = 0.
///
/// Evaluated as expm1(λ ln x)/λ so the λ → 0 limit is continuous to
/// machine precision.
fn boxcox_one(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        x.ln()
    } else {
        (lambda * x.ln()).exp_m1() / lambda
    }
}

/// Apply the Box-Cox transform elementwise. All inputs must be strictly
/// positive; zero or negative values are an error rather than being
/// silently shifted.
pub fn boxcox(values: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if values.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveInput);
    }
    Ok(values.iter().map(|&x| boxcox_one(x, lambda)).collect())
}

/// λ search grid. Defaults to [−3, 3] sampled at 601 points (0.01 spacing).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid {
            lo: -3.0,
            hi: 3.0,
            steps: 601,
        }
    }
}

impl LambdaGrid {
    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "need lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 grid points, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    fn point(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxCoxResult {
    pub lambda: f64,
    pub transformed: Vec<f64>,
    pub log_likelihood: f64,
}

/// Profile log-likelihood of the Box-Cox model at a fixed λ:
/// −(n/2)·ln(population variance of transformed) + (λ−1)·Σ ln x_i.
pub fn boxcox_log_likelihood(values: &[f64], lambda: f64) -> Result<f64> {
    let transformed = boxcox(values, lambda)?;
    let n = transformed.len() as f64;
    let mean = transformed.iter().sum::<f64>() / n;
    let var = transformed.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateData);
    }
    let log_sum: f64 = values.iter().map(|x| x.ln()).sum();
    Ok(-0.5 * n * var.ln() + (lambda - 1.0) * log_sum)
}

/// Select λ by maximizing the profile log-likelihood over the grid.
/// Exact likelihood ties break toward the λ nearest 1 (least distortion).
pub fn boxcox_mle(values: &[f64], grid: LambdaGrid) -> Result<BoxCoxResult> {
    grid.validate()?;
    if values.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            available: values.len(),
        });
    }
    if values.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveInput);
    }
    let first = values[0];
    if values.iter().all(|&x| x == first) {
        return Err(Error::DegenerateData);
    }

    let mut best: Option<(f64, f64)> = None; // (lambda, ll)
    for i in 0..grid.steps {
        let lambda = grid.point(i);
        let ll = boxcox_log_likelihood(values, lambda)?;
        let better = match best {
            None => true,
            Some((best_lambda, best_ll)) => {
                ll > best_ll
                    || (ll == best_ll && (lambda - 1.0).abs() < (best_lambda - 1.0).abs())
            }
        };
        if better {
            best = Some((lambda, ll));
        }
    }
    let (lambda, log_likelihood) = best.expect("grid has at least 2 points");
    Ok(BoxCoxResult {
        lambda,
        transformed: boxcox(values, lambda)?,
        log_likelihood,
    })
}

/// Column-standardized matrix together with the means and standard
/// deviations needed to invert the mapping. Standard deviations use the
/// population divisor n, so each output column has variance exactly 1
/// under that convention (the sample-variance alternative would leave
/// columns at variance n/(n−1)).
#[derive(Debug, Clone)]
pub struct StandardizedMatrix {
    pub data: DMatrix<f64>,
    pub means: Vec<f64>,
    pub stdevs: Vec<f64>,
}

impl StandardizedMatrix {
    /// Undo the standardization: data .* stdevs + means.
    pub fn restore(&self) -> DMatrix<f64> {
        let mut out = self.data.clone();
        for j in 0..out.ncols() {
            for i in 0..out.nrows() {
                out[(i, j)] = out[(i, j)] * self.stdevs[j] + self.means[j];
            }
        }
        out
    }
}

/// Column-wise z-scores with population variance (divisor n).
pub fn standardize(matrix: &DMatrix<f64>) -> Result<StandardizedMatrix> {
    let n = matrix.nrows();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: n,
        });
    }
    let p = matrix.ncols();
    let mut data = matrix.clone();
    let mut means = Vec::with_capacity(p);
    let mut stdevs = Vec::with_capacity(p);
    for j in 0..p {
        let col = matrix.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        if var <= 0.0 {
            return Err(Error::ZeroVarianceColumn(j));
        }
        let sd = var.sqrt();
        for i in 0..n {
            data[(i, j)] = (matrix[(i, j)] - mean) / sd;
        }
        means.push(mean);
        stdevs.push(sd);
    }
    Ok(StandardizedMatrix { data, means, stdevs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256StarStar;
    use approx::assert_relative_eq;

    #[test]
    fn direct_formula_arithmetic() {
        let out = boxcox(&[3.0], 2.0).unwrap();
        assert_relative_eq!(out[0], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn log_branch_at_lambda_zero() {
        let out = boxcox(&[std::f64::consts::E], 0.0).unwrap();
        assert_relative_eq!(out[0], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn continuity_at_lambda_zero() {
        let a = boxcox(&[5.0], 1e-9).unwrap()[0];
        let b = boxcox(&[5.0], 0.0).unwrap()[0];
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn non_positive_input_rejected() {
        assert!(matches!(boxcox(&[1.0, 0.0], 0.5), Err(Error::NonPositiveInput)));
        assert!(matches!(boxcox(&[-2.0], 1.0), Err(Error::NonPositiveInput)));
    }

    #[test]
    fn mle_recovers_log_transform_for_lognormal() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(20240601);
        let values: Vec<f64> = (0..500).map(|_| rng.next_normal().exp()).collect();
        let fit = boxcox_mle(&values, LambdaGrid::default()).unwrap();
        assert!(fit.lambda.abs() <= 0.15, "lambda {}", fit.lambda);
    }

    #[test]
    fn mle_near_identity_for_already_normal() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(77);
        let values: Vec<f64> = (0..500).map(|_| 10.0 + rng.next_normal()).collect();
        let fit = boxcox_mle(&values, LambdaGrid::default()).unwrap();
        assert!((fit.lambda - 1.0).abs() <= 0.3, "lambda {}", fit.lambda);
    }

    #[test]
    fn mle_is_grid_argmax() {
        // the returned likelihood dominates every grid point
        let mut rng = Xoshiro256StarStar::seed_from_u64(5);
        let values: Vec<f64> = (0..100).map(|_| (1.0 + rng.next_f64()) * 3.0).collect();
        let grid = LambdaGrid { lo: -2.0, hi: 2.0, steps: 81 };
        let fit = boxcox_mle(&values, grid).unwrap();
        for i in 0..grid.steps {
            let ll = boxcox_log_likelihood(&values, grid.point(i)).unwrap();
            assert!(fit.log_likelihood >= ll);
        }
    }

    #[test]
    fn mle_rejects_constant_vector() {
        let err = boxcox_mle(&[2.0, 2.0, 2.0], LambdaGrid::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateData));
    }

    #[test]
    fn standardize_small_column() {
        let m = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let s = standardize(&m).unwrap();
        let expect = (1.5f64).sqrt();
        assert_relative_eq!(s.data[(0, 0)], -expect, max_relative = 1e-12);
        assert_relative_eq!(s.data[(1, 0)], 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.data[(2, 0)], expect, max_relative = 1e-12);
        assert_relative_eq!(s.means[0], 2.0);
        assert_relative_eq!(s.stdevs[0], (2.0f64 / 3.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn standardize_is_idempotent() {
        let m = DMatrix::from_column_slice(4, 1, &[-1.0, 3.0, 0.5, -2.5]);
        let once = standardize(&m).unwrap();
        let twice = standardize(&once.data).unwrap();
        for i in 0..4 {
            assert_relative_eq!(once.data[(i, 0)], twice.data[(i, 0)], epsilon = 1e-12);
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let m = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 5.0, 5.0, 5.0]);
        let err = standardize(&m).unwrap_err();
        assert!(matches!(err, Error::ZeroVarianceColumn(1)));
    }

    #[test]
    fn standardized_columns_have_mean_zero_var_one() {
        let mut rng = Xoshiro256StarStar::seed_from_u64(31);
        let m = DMatrix::from_fn(50, 3, |_, j| rng.next_normal() * (j + 1) as f64 + 7.0);
        let s = standardize(&m).unwrap();
        for j in 0..3 {
            let col = s.data.column(j);
            let mean = col.sum() / 50.0;
            let var = col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 50.0;
            assert!(mean.abs() < 1e-10);
            assert!((var - 1.0).abs() < 1e-10);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn boxcox_strictly_increasing(
                (a, b) in (1e-6f64..1e6, 1e-6f64..1e6),
                lambda in -3.0f64..3.0,
            ) {
                prop_assume!(a != b);
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let out = boxcox(&[lo, hi], lambda).unwrap();
                prop_assert!(out[0] < out[1], "boxcox({lo}) >= boxcox({hi}) at lambda {lambda}");
            }

            #[test]
            fn standardize_roundtrip(
                raw in proptest::collection::vec(-1e4f64..1e4, 6..40),
            ) {
                let n = raw.len() / 2;
                let m = DMatrix::from_fn(n, 2, |i, j| raw[i * 2 + j]);
                match standardize(&m) {
                    Ok(s) => {
                        let back = s.restore();
                        for i in 0..n {
                            for j in 0..2 {
                                prop_assert!((back[(i, j)] - m[(i, j)]).abs()
                                    <= 1e-10 * m[(i, j)].abs().max(1.0));
                            }
                        }
                    }
                    Err(Error::ZeroVarianceColumn(_)) => {}
                    Err(e) => return Err(TestCaseError::fail(format!("unexpected {e}"))),
                }
            }
        }
    }
}
