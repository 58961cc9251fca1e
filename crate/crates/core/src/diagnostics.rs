//! Regression summary statistics: R², adjusted R², VIF, residual moments,
//! Jarque-Bera, Durbin-Watson, the D'Agostino-Pearson omnibus test, and
//! per-coefficient t-tests with confidence intervals.
//!
//! Moment estimators use population divisors (n) throughout, and kurtosis
//! is reported non-excess (a normal sample sits near 3).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::dist::{chi2_survival, student_t_critical, student_t_tail};
use crate::error::{Error, Result};
use crate::ols::{ols_fit, ConditionClass, DesignMatrix, OlsFit};
use crate::panel::CaseTable;

/// R² = 1 − RSS/TSS.
pub fn r_squared(rss: f64, tss: f64) -> Result<f64> {
    if tss <= 0.0 {
        return Err(Error::ZeroTotalVariance);
    }
    Ok(1.0 - rss / tss)
}

/// Adjusted R² = 1 − (1 − R²)·(n − 1)/(n − (k + 1)).
pub fn adjusted_r_squared(r2: f64, n: usize, k: usize) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::DegenerateDegreesOfFreedom { n, k });
    }
    Ok(1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n - (k + 1)) as f64)
}

/// VIF_i = 1/(1 − R_i²); perfect collinearity (R_i² within 1e-12 of 1)
/// reports as infinite.
pub fn vif(r2_i: f64) -> f64 {
    debug_assert!(r2_i >= 0.0, "auxiliary R² cannot be negative, got {r2_i}");
    if r2_i >= 1.0 - 1e-12 {
        f64::INFINITY
    } else {
        1.0 / (1.0 - r2_i)
    }
}

/// Regress each named indicator (with intercept) on all the others and map
/// the auxiliary R² through the VIF formula. A singular auxiliary design
/// surfaces as an infinite VIF for that indicator.
pub fn vif_table(table: &CaseTable, indicator_names: &[String]) -> Result<BTreeMap<String, f64>> {
    if indicator_names.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: indicator_names.len(),
        });
    }
    let n = table.n();
    if n <= indicator_names.len() + 1 {
        return Err(Error::TooFewObservations {
            n,
            params: indicator_names.len() + 1,
        });
    }
    let mut columns = Vec::with_capacity(indicator_names.len());
    for name in indicator_names {
        columns.push(table.column(name)?);
    }

    let mut out = BTreeMap::new();
    for (i, name) in indicator_names.iter().enumerate() {
        let others: Vec<usize> = (0..indicator_names.len()).filter(|&j| j != i).collect();
        let x = DMatrix::from_fn(n, others.len() + 1, |r, c| {
            if c == 0 {
                1.0
            } else {
                columns[others[c - 1]][r]
            }
        });
        let y = DVector::from_iterator(n, columns[i].iter().copied());
        let mut names = vec!["Intercept".to_string()];
        names.extend(others.iter().map(|&j| indicator_names[j].clone()));
        let design = DesignMatrix::from_parts(x, y, names)?;
        let value = match ols_fit(&design) {
            Ok(fit) => match r_squared(fit.rss, fit.tss) {
                Ok(r2) => vif(r2.clamp(0.0, 1.0)),
                Err(Error::ZeroTotalVariance) => f64::INFINITY,
                Err(e) => return Err(e),
            },
            Err(Error::SingularDesign) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        out.insert(name.clone(), value);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    pub skew: f64,
    /// Non-excess kurtosis: m4/m2², 3 for a normal population.
    pub kurtosis: f64,
}

/// Third and fourth standardized moments with population divisors.
pub fn moments(values: &[f64]) -> Result<Moments> {
    if values.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            available: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 <= 0.0 {
        return Err(Error::DegenerateData);
    }
    Ok(Moments {
        skew: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JarqueBera {
    pub jb: f64,
    pub prob: f64,
}

/// JB = (n/6)·(S² + (K − 3)²/4), referred to chi-square with 2 df.
pub fn jarque_bera(skew: f64, kurtosis: f64, n: usize) -> JarqueBera {
    let nf = n as f64;
    let jb = nf / 6.0 * (skew * skew + (kurtosis - 3.0).powi(2) / 4.0);
    let prob = chi2_survival(jb, 2).expect("jb >= 0");
    JarqueBera { jb, prob }
}

/// DW = Σ(e_t − e_{t−1})² / Σ e_t², in [0, 4].
pub fn durbin_watson(residuals: &[f64]) -> Result<f64> {
    if residuals.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: residuals.len(),
        });
    }
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom <= 0.0 {
        return Err(Error::DegenerateResiduals);
    }
    let numer: f64 = residuals
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    Ok(numer / denom)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Omnibus {
    pub k2: f64,
    pub prob: f64,
}

/// Normal transform of the sample skewness (D'Agostino 1970).
fn skew_z(skew: f64, n: usize) -> f64 {
    let n = n as f64;
    let y = skew * (((n + 1.0) * (n + 3.0)) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = (2.0 * (beta2 - 1.0)).sqrt() - 1.0;
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    delta * (y / alpha).asinh()
}

/// Normal transform of the sample kurtosis (Anscombe & Glynn 1983).
fn kurtosis_z(kurtosis: f64, n: usize) -> f64 {
    let n = n as f64;
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (kurtosis - e) / var.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    (term1 - term2) / (2.0 / (9.0 * a)).sqrt()
}

/// D'Agostino-Pearson K² = Z₁(skew)² + Z₂(kurtosis)², referred to
/// chi-square with 2 df. Requires n ≥ 8 for the normalizing transforms.
pub fn omnibus(values: &[f64]) -> Result<Omnibus> {
    if values.len() < 8 {
        return Err(Error::SampleTooSmall {
            required: 8,
            available: values.len(),
        });
    }
    let m = moments(values)?;
    let z1 = skew_z(m.skew, values.len());
    let z2 = kurtosis_z(m.kurtosis, values.len());
    let k2 = z1 * z1 + z2 * z2;
    let prob = chi2_survival(k2, 2).expect("k2 >= 0");
    Ok(Omnibus { k2, prob })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TTest {
    pub t_stat: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Two-tailed t-test of H₀: coefficient = 0, with the (1 − alpha)
/// confidence interval coef ± t_{1−alpha/2, df}·std_err.
pub fn t_test(coef: f64, std_err: f64, df: usize, alpha: f64) -> Result<TTest> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if !(std_err > 0.0) || !std_err.is_finite() {
        return Err(Error::NonPositiveStdErr(std_err));
    }
    if df < 1 {
        return Err(Error::DegenerateDegreesOfFreedom { n: df, k: 0 });
    }
    let t_stat = coef / std_err;
    let p_value = student_t_tail(t_stat, df as u64);
    let t_crit = student_t_critical(alpha, df as u64)?;
    Ok(TTest {
        t_stat,
        p_value,
        ci_low: coef - t_crit * std_err,
        ci_high: coef + t_crit * std_err,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KurtosisClass {
    Platykurtic,
    Mesokurtic,
    Leptokurtic,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormalityVerdict {
    pub skew: f64,
    pub kurtosis: f64,
    pub skew_ok: bool,
    pub kurtosis_class: KurtosisClass,
    pub passes: bool,
}

/// Normality screen: skewness must lie in [−0.5, 0.5]; the kurtosis class
/// (above/below 3) is reported but not gated on.
pub fn normality_gate(values: &[f64]) -> Result<NormalityVerdict> {
    let m = moments(values)?;
    let skew_ok = (-0.5..=0.5).contains(&m.skew);
    let kurtosis_class = if m.kurtosis > 3.0 {
        KurtosisClass::Leptokurtic
    } else if m.kurtosis < 3.0 {
        KurtosisClass::Platykurtic
    } else {
        KurtosisClass::Mesokurtic
    };
    Ok(NormalityVerdict {
        skew: m.skew,
        kurtosis: m.kurtosis,
        skew_ok,
        kurtosis_class,
        passes: skew_ok,
    })
}

/// One row of the coefficient table.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub name: String,
    pub coef: f64,
    pub std_err: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Full fit summary: coefficient table plus the eight summary statistics.
/// Residual-shape statistics are NaN (serialized as null) when they are
/// undefined: a perfect fit leaves no residual variance, and the omnibus
/// transforms need n ≥ 8.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub rows: Vec<CoefficientRow>,
    pub r2: f64,
    pub adj_r2: f64,
    pub skew: f64,
    pub kurtosis: f64,
    pub omnibus: f64,
    pub prob_omnibus: f64,
    pub durbin_watson: f64,
    pub jarque_bera: f64,
    pub prob_jb: f64,
    #[serde(rename = "cond_no")]
    pub cond_number: f64,
    pub n: usize,
    pub k: usize,
}

impl FitReport {
    pub fn condition_class(&self) -> ConditionClass {
        condition_class_of(self.cond_number)
    }
}

fn condition_class_of(kappa: f64) -> ConditionClass {
    if !kappa.is_finite() {
        ConditionClass::Singular
    } else if kappa > crate::ols::CONDITION_LIMIT {
        ConditionClass::IllConditioned
    } else {
        ConditionClass::WellConditioned
    }
}

/// Assemble the report for a fitted design at significance level `alpha`.
pub fn fit_report(design: &DesignMatrix, fit: &OlsFit, alpha: f64) -> Result<FitReport> {
    let n = design.n();
    let k = design.k();
    let mut rows = Vec::with_capacity(design.column_names.len());
    for (j, name) in design.column_names.iter().enumerate() {
        let t = t_test(fit.beta[j], fit.std_errs[j], fit.df_resid, alpha)?;
        rows.push(CoefficientRow {
            name: name.clone(),
            coef: fit.beta[j],
            std_err: fit.std_errs[j],
            t_stat: t.t_stat,
            p_value: t.p_value,
            ci_low: t.ci_low,
            ci_high: t.ci_high,
        });
    }

    let r2 = r_squared(fit.rss, fit.tss)?;
    let adj_r2 = adjusted_r_squared(r2, n, k)?;

    let residuals: Vec<f64> = fit.residuals.iter().copied().collect();
    let (skew, kurtosis, jb, prob_jb) = match moments(&residuals) {
        Ok(m) => {
            let jb = jarque_bera(m.skew, m.kurtosis, n);
            (m.skew, m.kurtosis, jb.jb, jb.prob)
        }
        Err(Error::DegenerateData) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        Err(e) => return Err(e),
    };
    let (omni, prob_omni) = match omnibus(&residuals) {
        Ok(o) => (o.k2, o.prob),
        Err(Error::SampleTooSmall { .. }) | Err(Error::DegenerateData) => (f64::NAN, f64::NAN),
        Err(e) => return Err(e),
    };
    let dw = match durbin_watson(&residuals) {
        Ok(d) => d,
        Err(Error::DegenerateResiduals) => f64::NAN,
        Err(e) => return Err(e),
    };

    Ok(FitReport {
        rows,
        r2,
        adj_r2,
        skew,
        kurtosis,
        omnibus: omni,
        prob_omnibus: prob_omni,
        durbin_watson: dw,
        jarque_bera: jb,
        prob_jb,
        cond_number: fit.cond_number,
        n,
        k,
    })
}
