//! Design-matrix construction and the least-squares fit.
//!
//! The estimator solves min ‖y − Xβ‖² through the singular value
//! decomposition of X rather than forming (XᵀX)⁻¹ explicitly; the design
//! matrix condition number κ = σ_max/σ_min comes from the same
//! factorization. κ is computed on the raw design, intercept column
//! included and without any standardization — raw regressor units are what
//! drive κ into the 1e12 range on real panel data, and rescaling first
//! would hide exactly the instability this toolkit reports.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::CaseTable;

/// Relative singular-value cutoff: σ_min < RCOND · σ_max is rank deficient.
const RCOND: f64 = 1e-12;

/// Ill-conditioning threshold; strictly greater counts as ill-conditioned.
pub const CONDITION_LIMIT: f64 = 1e6;

/// n×(k+1) regressor matrix with an explicit leading intercept column,
/// paired with the response vector.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// k+1 labels, "Intercept" first.
    pub column_names: Vec<String>,
}

impl DesignMatrix {
    /// Validating constructor for callers that assemble X themselves.
    /// `x` must already carry the intercept column.
    pub fn from_parts(x: DMatrix<f64>, y: DVector<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, m) = x.shape();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if column_names.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: column_names.len(),
            });
        }
        if n <= m {
            return Err(Error::TooFewObservations { n, params: m });
        }
        for i in 0..n {
            if x[(i, 0)] != 1.0 {
                return Err(Error::InvalidSpec(
                    "first design column must be the intercept (all ones)".into(),
                ));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &column_names {
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateColumnName(name.clone()));
            }
        }
        Ok(DesignMatrix { x, y, column_names })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of indicators (parameters minus the intercept).
    pub fn k(&self) -> usize {
        self.x.ncols() - 1
    }
}

/// Build a design matrix from complete-case rows: intercept column first,
/// then the named indicators in the given order.
pub fn build_design(table: &CaseTable, indicator_names: &[String], response_name: &str) -> Result<DesignMatrix> {
    let mut seen = std::collections::BTreeSet::new();
    for name in indicator_names {
        if !seen.insert(name.clone()) {
            return Err(Error::DuplicateColumnName(name.clone()));
        }
    }
    if table.response_name != response_name {
        return Err(Error::UnknownIndicator(response_name.to_string()));
    }
    let n = table.n();
    let k = indicator_names.len();
    if n <= k + 1 {
        return Err(Error::TooFewObservations { n, params: k + 1 });
    }
    let mut idx = Vec::with_capacity(k);
    for name in indicator_names {
        let j = table
            .column_index(name)
            .ok_or_else(|| Error::UnknownIndicator(name.clone()))?;
        idx.push(j);
    }
    let x = DMatrix::from_fn(n, k + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            table.rows[i][idx[j - 1]]
        }
    });
    let y = DVector::from_iterator(n, table.response.iter().copied());
    let mut names = Vec::with_capacity(k + 1);
    names.push("Intercept".to_string());
    names.extend(indicator_names.iter().cloned());
    DesignMatrix::from_parts(x, y, names)
}

/// Least-squares fit summary.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    pub std_errs: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    pub tss: f64,
    /// RSS / (n − k − 1).
    pub sigma2: f64,
    pub df_resid: usize,
    pub cond_number: f64,
}

/// Fit by SVD. Rank deficiency within σ_min < 1e-12·σ_max is an error; the
/// explicit normal-equation route exists only as a test oracle.
pub fn ols_fit(design: &DesignMatrix) -> Result<OlsFit> {
    let n = design.n();
    let m = design.x.ncols();
    let svd = design.x.clone().svd(true, true);
    let sv = &svd.singular_values;
    debug_assert!(sv.iter().zip(sv.iter().skip(1)).all(|(a, b)| a >= b));
    let s_max = sv[0];
    let s_min = sv[m - 1];
    if s_max <= 0.0 || s_min < RCOND * s_max {
        return Err(Error::SingularDesign);
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");

    // beta = V Σ⁻¹ Uᵀ y
    let mut uty = u.transpose() * &design.y;
    for i in 0..m {
        uty[i] /= sv[i];
    }
    let beta = v_t.transpose() * uty;

    let residuals = &design.y - &design.x * &beta;
    let rss = residuals.dot(&residuals);
    let y_mean = design.y.sum() / n as f64;
    let tss = design.y.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let df_resid = n - m;
    let sigma2 = rss / df_resid as f64;

    // [(XᵀX)⁻¹]_jj = Σ_k V[j,k]² / σ_k²
    let std_errs = DVector::from_fn(m, |j, _| {
        let mut acc = 0.0;
        for k in 0..m {
            let v_jk = v_t[(k, j)];
            acc += (v_jk / sv[k]) * (v_jk / sv[k]);
        }
        (sigma2 * acc).sqrt()
    });

    Ok(OlsFit {
        beta,
        std_errs,
        residuals,
        rss,
        tss,
        sigma2,
        df_resid,
        cond_number: s_max / s_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionClass {
    WellConditioned,
    IllConditioned,
    Singular,
}

impl std::fmt::Display for ConditionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConditionClass::WellConditioned => write!(f, "well-conditioned"),
            ConditionClass::IllConditioned => write!(f, "ill-conditioned"),
            ConditionClass::Singular => write!(f, "singular"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionVerdict {
    pub kappa: f64,
    pub classification: ConditionClass,
}

/// κ = σ_max/σ_min of X with the classification used throughout:
/// singular when σ_min vanishes within tolerance, ill-conditioned when
/// κ is finite and strictly exceeds 1e6.
pub fn condition_number(x: &DMatrix<f64>) -> ConditionVerdict {
    let m = x.nrows().min(x.ncols());
    let svd = x.clone().svd(false, false);
    let sv = &svd.singular_values;
    let s_max = sv[0];
    let s_min = sv[m - 1];
    if s_max <= 0.0 {
        return ConditionVerdict {
            kappa: f64::INFINITY,
            classification: ConditionClass::Singular,
        };
    }
    if s_min < RCOND * s_max {
        let kappa = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
        return ConditionVerdict {
            kappa,
            classification: ConditionClass::Singular,
        };
    }
    let kappa = s_max / s_min;
    let classification = if kappa > CONDITION_LIMIT {
        ConditionClass::IllConditioned
    } else {
        ConditionClass::WellConditioned
    };
    ConditionVerdict { kappa, classification }
}

/// ŷ = Xβ̂ for a design with the same column layout as the fit.
pub fn predict(fit: &OlsFit, design: &DesignMatrix) -> Result<DVector<f64>> {
    if design.x.ncols() != fit.beta.len() {
        return Err(Error::DimensionMismatch {
            expected: fit.beta.len(),
            found: design.x.ncols(),
        });
    }
    Ok(&design.x * &fit.beta)
}
