//! Deterministic synthetic-data generator for stress tests: controlled
//! near-collinearity (for condition-number regimes), heteroscedastic noise,
//! and a post-hoc skew distortion. Stands in for real panel data when
//! exercising the pipeline end to end.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::CaseTable;
use crate::rng::Xoshiro256StarStar;

pub const SYNTH_COUNTRY: &str = "SYN";
pub const RESPONSE_NAME: &str = "response";

#[derive(Debug, Clone, Serialize)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    /// When set, the last feature becomes feature 1 plus eps-scaled noise;
    /// eps = 0 duplicates the column exactly (a singular design). When
    /// unset, all features are independent draws.
    pub collinearity_eps: Option<f64>,
    /// Error s.d. scales with |x₁|^gamma (0 = homoscedastic).
    pub hetero_gamma: f64,
    /// Base error s.d.; 0 gives a noise-free response.
    pub noise_sd: f64,
    /// Post-hoc power distortion of the response (0 = none): the
    /// standardized response t is mapped through (exp(λt) − 1)/λ and
    /// rescaled, inducing skew for λ ≠ 0.
    pub skew_lambda: f64,
    pub seed: u64,
    /// Intercept first, then one coefficient per feature (p+1 entries).
    pub true_beta: Vec<f64>,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidSpec("need p >= 1 features".into()));
        }
        if self.n <= self.p + 1 {
            return Err(Error::InvalidSpec(format!(
                "need n > p + 1, got n={} p={}",
                self.n, self.p
            )));
        }
        if self.true_beta.len() != self.p + 1 {
            return Err(Error::InvalidSpec(format!(
                "true_beta needs p + 1 = {} entries, got {}",
                self.p + 1,
                self.true_beta.len()
            )));
        }
        if let Some(eps) = self.collinearity_eps {
            if !(eps >= 0.0) {
                return Err(Error::InvalidSpec("collinearity_eps must be >= 0".into()));
            }
            if self.p < 2 {
                return Err(Error::InvalidSpec(
                    "collinearity injection needs p >= 2 features".into(),
                ));
            }
        }
        if !(self.hetero_gamma >= 0.0) {
            return Err(Error::InvalidSpec("hetero_gamma must be >= 0".into()));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidSpec("noise_sd must be >= 0".into()));
        }
        if !self.skew_lambda.is_finite() {
            return Err(Error::InvalidSpec("skew_lambda must be finite".into()));
        }
        Ok(())
    }
}

/// Feature names x1..xp, zero-padded so they sort in index order.
pub fn feature_names(p: usize) -> Vec<String> {
    let width = p.to_string().len();
    (1..=p).map(|j| format!("x{j:0width$}")).collect()
}

/// Generate the table and echo the planted coefficients.
///
/// Draw order is fixed (features row-major, then the collinear column's
/// noise, then response noise), so a seed pins the output exactly.
pub fn generate(spec: &SynthSpec) -> Result<(CaseTable, Vec<f64>)> {
    spec.validate()?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    let n = spec.n;
    let p = spec.p;

    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.next_normal()).collect())
        .collect();

    if let Some(eps) = spec.collinearity_eps {
        for row in &mut rows {
            row[p - 1] = row[0] + eps * rng.next_normal();
        }
    }

    let mut response: Vec<f64> = rows
        .iter()
        .map(|row| {
            spec.true_beta[0]
                + row
                    .iter()
                    .zip(&spec.true_beta[1..])
                    .map(|(x, b)| x * b)
                    .sum::<f64>()
        })
        .collect();

    if spec.noise_sd > 0.0 {
        for (y, row) in response.iter_mut().zip(&rows) {
            let scale = if spec.hetero_gamma > 0.0 {
                row[0].abs().powf(spec.hetero_gamma)
            } else {
                1.0
            };
            *y += spec.noise_sd * scale * rng.next_normal();
        }
    }

    if spec.skew_lambda != 0.0 {
        let nf = n as f64;
        let mean = response.iter().sum::<f64>() / nf;
        let var = response.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / nf;
        if var > 0.0 {
            let sd = var.sqrt();
            let lambda = spec.skew_lambda;
            for y in &mut response {
                let t = (*y - mean) / sd;
                *y = mean + sd * ((lambda * t).exp_m1() / lambda);
            }
        }
    }

    let table = CaseTable {
        indicator_names: feature_names(p),
        response_name: RESPONSE_NAME.to_string(),
        countries: vec![SYNTH_COUNTRY.to_string(); n],
        years: (1..=n as i32).collect(),
        rows,
        response,
    };
    Ok((table, spec.true_beta.clone()))
}

/// Long CSV in the ingest layout: one row per (year, indicator) cell for
/// country "SYN", features first then the response, years ascending.
pub fn to_long_csv(table: &CaseTable) -> String {
    let mut out = String::from("country,year,indicator,value\n");
    for i in 0..table.n() {
        let year = table.years[i];
        let country = &table.countries[i];
        for (j, name) in table.indicator_names.iter().enumerate() {
            out.push_str(&format!("{country},{year},{name},{}\n", table.rows[i][j]));
        }
        out.push_str(&format!(
            "{country},{year},{},{}\n",
            table.response_name, table.response[i]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ols::{build_design, condition_number, ols_fit, ConditionClass};
    use crate::panel::{parse_panel, CsvSchema};

    fn base_spec() -> SynthSpec {
        SynthSpec {
            n: 200,
            p: 6,
            collinearity_eps: None,
            hetero_gamma: 0.0,
            noise_sd: 0.0,
            skew_lambda: 0.0,
            seed: 1,
            true_beta: vec![1.0, 2.0, -1.0, 0.5, 3.0, -2.0, 0.25],
        }
    }

    #[test]
    fn same_seed_identical_output() {
        let spec = base_spec();
        let (a, _) = generate(&spec).unwrap();
        let (b, _) = generate(&spec).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.response, b.response);
        assert_eq!(to_long_csv(&a), to_long_csv(&b));
    }

    #[test]
    fn noiseless_recovery_of_true_beta() {
        let spec = base_spec();
        let (table, beta) = generate(&spec).unwrap();
        let design = build_design(&table, &table.indicator_names.clone(), RESPONSE_NAME).unwrap();
        let fit = ols_fit(&design).unwrap();
        for (j, b) in beta.iter().enumerate() {
            assert!(
                (fit.beta[j] - b).abs() <= 1e-8 * b.abs().max(1.0),
                "beta[{j}] {} vs {}",
                fit.beta[j],
                b
            );
        }
    }

    #[test]
    fn exact_duplicate_is_singular() {
        let spec = SynthSpec {
            collinearity_eps: Some(0.0),
            ..base_spec()
        };
        let (table, _) = generate(&spec).unwrap();
        let design = build_design(&table, &table.indicator_names.clone(), RESPONSE_NAME).unwrap();
        let verdict = condition_number(&design.x);
        assert_eq!(verdict.classification, ConditionClass::Singular);
    }

    #[test]
    fn tiny_eps_is_ill_conditioned() {
        let spec = SynthSpec {
            collinearity_eps: Some(1e-9),
            ..base_spec()
        };
        let (table, _) = generate(&spec).unwrap();
        let design = build_design(&table, &table.indicator_names.clone(), RESPONSE_NAME).unwrap();
        let verdict = condition_number(&design.x);
        assert_eq!(verdict.classification, ConditionClass::IllConditioned);
        assert!(verdict.kappa > 1e6, "kappa {}", verdict.kappa);
    }

    #[test]
    fn kappa_monotone_as_eps_shrinks() {
        let mut last = 0.0;
        for eps in [1e-3, 1e-6, 1e-9] {
            let spec = SynthSpec {
                collinearity_eps: Some(eps),
                ..base_spec()
            };
            let (table, _) = generate(&spec).unwrap();
            let design =
                build_design(&table, &table.indicator_names.clone(), RESPONSE_NAME).unwrap();
            let verdict = condition_number(&design.x);
            assert!(
                verdict.kappa > last,
                "kappa {} not above {last} at eps {eps}",
                verdict.kappa
            );
            last = verdict.kappa;
        }
    }

    #[test]
    fn csv_roundtrips_through_ingest() {
        let spec = SynthSpec {
            n: 50,
            p: 4,
            true_beta: vec![1.0; 5],
            ..base_spec()
        };
        let (table, _) = generate(&spec).unwrap();
        let csv = to_long_csv(&table);
        let panel = parse_panel(&csv, &CsvSchema::default()).unwrap();
        assert_eq!(panel.countries(), [SYNTH_COUNTRY]);
        assert_eq!(panel.years(), 1..=50);
        assert_eq!(panel.indicators().len(), 5); // 4 features + response
        let (back, dropped) = panel
            .complete_cases(&table.indicator_names, RESPONSE_NAME, None)
            .unwrap();
        assert_eq!(dropped, 0);
        assert_eq!(back.n(), 50);
        for i in 0..50 {
            for j in 0..4 {
                assert_eq!(back.rows[i][j], table.rows[i][j]);
            }
            assert_eq!(back.response[i], table.response[i]);
        }
    }

    #[test]
    fn skew_distortion_skews_response() {
        let clean = SynthSpec {
            noise_sd: 1.0,
            ..base_spec()
        };
        let skewed_spec = SynthSpec {
            skew_lambda: 1.5,
            ..clean.clone()
        };
        let (a, _) = generate(&clean).unwrap();
        let (b, _) = generate(&skewed_spec).unwrap();
        let skew = |v: &[f64]| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let m2 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let m3 = v.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
            m3 / m2.powf(1.5)
        };
        assert!(skew(&b.response) > skew(&a.response) + 0.5);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = base_spec();
        spec.n = 5;
        spec.p = 10;
        spec.true_beta = vec![0.0; 11];
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));

        let mut spec = base_spec();
        spec.true_beta = vec![0.0; 3];
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));

        let mut spec = base_spec();
        spec.noise_sd = -1.0;
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn feature_names_are_zero_padded() {
        assert_eq!(feature_names(3), ["x1", "x2", "x3"]);
        let ten = feature_names(10);
        assert_eq!(ten[0], "x01");
        assert_eq!(ten[9], "x10");
        let mut sorted = ten.clone();
        sorted.sort();
        assert_eq!(sorted, ten);
    }
}
