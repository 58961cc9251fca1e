//! Stochastic indicator-subset search: greedy VIF elimination over the
//! candidate pool, uniform sampling of subsets of size 4–7 (configurable)
//! with mandatory inclusion of designated indicators, one least-squares fit
//! per subset, and a deterministic ranking.
//!
//! The ranking never depends on execution order: results sort on
//! (score desc, condition number asc, indicator names asc), so parallel
//! fitting would produce the identical list. The PRNG is consumed only in
//! the serial sampling phase.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::diagnostics::{fit_report, vif_table, FitReport};
use crate::error::{Error, Result};
use crate::ols::{build_design, ols_fit, ConditionClass};
use crate::panel::{CaseTable, IndicatorPanel};
use crate::rng::Xoshiro256StarStar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScoreMetric {
    AdjustedR2,
    R2,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub min_size: usize,
    pub max_size: usize,
    pub samples: usize,
    pub seed: u64,
    pub forced_indicators: Vec<String>,
    pub vif_threshold: f64,
    pub score: ScoreMetric,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            min_size: 4,
            max_size: 7,
            samples: 1000,
            seed: 0,
            forced_indicators: Vec::new(),
            vif_threshold: 5.0,
            score: ScoreMetric::AdjustedR2,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        if self.min_size == 0 || self.min_size > self.max_size {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= min_size <= max_size, got {}..{}",
                self.min_size, self.max_size
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Greedy VIF elimination: while any indicator has VIF >= threshold, drop
/// the worst offender and recompute. Forced indicators are never dropped;
/// ties on the maximum VIF drop the lexicographically last name.
pub fn vif_filter(
    table: &CaseTable,
    indicator_names: &[String],
    threshold: f64,
    forced: &[String],
) -> Result<(Vec<String>, Vec<(String, f64)>)> {
    if indicator_names.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: indicator_names.len(),
        });
    }
    for f in forced {
        if !indicator_names.contains(f) {
            return Err(Error::UnknownIndicator(f.clone()));
        }
    }
    let mut kept: Vec<String> = indicator_names.to_vec();
    let mut dropped: Vec<(String, f64)> = Vec::new();

    while kept.len() >= 2 {
        let vifs = vif_table(table, &kept)?;
        let mut worst: Option<(&String, f64)> = None;
        for name in &kept {
            if forced.contains(name) {
                continue;
            }
            let v = vifs[name];
            worst = match worst {
                None => Some((name, v)),
                Some((wn, wv)) => {
                    // strictly larger VIF wins; equal VIF prefers the
                    // lexicographically later name
                    if v > wv || (v == wv && name > wn) {
                        Some((name, v))
                    } else {
                        Some((wn, wv))
                    }
                }
            };
        }
        match worst {
            Some((name, v)) if v >= threshold => {
                let name = name.clone();
                kept.retain(|n| n != &name);
                dropped.push((name, v));
            }
            _ => break,
        }
    }
    Ok((kept, dropped))
}

/// C(n, k) without overflow for the pool sizes this search handles.
fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of subsets of sizes min..=max drawn from `pool_size` items.
pub fn count_subsets(pool_size: usize, min_size: usize, max_size: usize) -> Result<u64> {
    if pool_size < max_size {
        return Err(Error::PoolTooSmall(format!(
            "pool of {pool_size} cannot form subsets of size {max_size}"
        )));
    }
    let total: u128 = (min_size..=max_size)
        .map(|s| binomial(pool_size as u64, s as u64))
        .sum();
    u64::try_from(total).map_err(|_| Error::InvalidSpec("subset count overflows u64".into()))
}

/// One uniform draw over all subsets of size min..=max that contain the
/// forced indicators (forced names count toward the size). `rest` must be
/// the sorted pool minus the forced names.
pub fn draw_subset(
    rng: &mut Xoshiro256StarStar,
    rest: &[String],
    forced: &[String],
    min_size: usize,
    max_size: usize,
) -> Result<Vec<String>> {
    let f = forced.len();
    let m = rest.len();
    let lo = min_size.max(f);
    // weight each admissible size by its combination count
    let mut weights: Vec<(usize, u128)> = Vec::new();
    let mut total: u128 = 0;
    for s in lo..=max_size {
        if s - f <= m {
            let w = binomial(m as u64, (s - f) as u64);
            if w > 0 {
                weights.push((s, w));
                total += w;
            }
        }
    }
    if total == 0 {
        return Err(Error::PoolTooSmall(format!(
            "no subsets of size {min_size}..={max_size} with {f} forced from a pool of {}",
            m + f
        )));
    }
    let draw = rng.next_below(u64::try_from(total).expect("pool sizes keep counts in u64")) as u128;
    let mut acc: u128 = 0;
    let mut size = weights[0].0;
    for (s, w) in &weights {
        acc += w;
        if draw < acc {
            size = *s;
            break;
        }
    }

    // partial Fisher-Yates for a uniform (size-f)-combination of rest
    let take = size - f;
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..take {
        let j = i + rng.next_below((m - i) as u64) as usize;
        idx.swap(i, j);
    }
    let mut subset: Vec<String> = forced.to_vec();
    subset.extend(idx[..take].iter().map(|&i| rest[i].clone()));
    subset.sort();
    Ok(subset)
}

fn lexicographic_combinations(rest: &[String], take: usize) -> Vec<Vec<String>> {
    let m = rest.len();
    let mut out = Vec::new();
    if take > m {
        return out;
    }
    if take == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut idx: Vec<usize> = (0..take).collect();
    loop {
        out.push(idx.iter().map(|&i| rest[i].clone()).collect());
        // advance to the next combination
        let mut i = take;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - take {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..take {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Draw `config.samples` distinct subsets uniformly over all sets of size
/// min..=max that include the forced indicators. When the total number of
/// valid subsets does not exceed the requested sample count, the full
/// enumeration is returned instead (sizes ascending, lexicographic within
/// a size). Deterministic for a fixed seed.
pub fn sample_subsets(pool: &[String], config: &SearchConfig) -> Result<Vec<Vec<String>>> {
    config.validate()?;
    let mut pool_sorted: Vec<String> = pool.to_vec();
    pool_sorted.sort();
    pool_sorted.dedup();
    if pool_sorted.len() != pool.len() {
        return Err(Error::DuplicateColumnName("duplicate name in pool".into()));
    }
    for f in &config.forced_indicators {
        if !pool_sorted.contains(f) {
            return Err(Error::UnknownIndicator(f.clone()));
        }
    }
    let mut forced: Vec<String> = config.forced_indicators.clone();
    forced.sort();
    forced.dedup();
    if forced.len() > config.max_size {
        return Err(Error::PoolTooSmall(format!(
            "{} forced indicators cannot fit in subsets of size <= {}",
            forced.len(),
            config.max_size
        )));
    }
    let rest: Vec<String> = pool_sorted
        .iter()
        .filter(|n| !forced.contains(n))
        .cloned()
        .collect();

    let f = forced.len();
    let m = rest.len();
    let lo = config.min_size.max(f);
    let mut total: u128 = 0;
    for s in lo..=config.max_size {
        if s >= f && s - f <= m {
            total += binomial(m as u64, (s - f) as u64);
        }
    }
    if total == 0 {
        return Err(Error::PoolTooSmall(format!(
            "no subsets of size {}..={} available from a pool of {}",
            config.min_size,
            config.max_size,
            pool_sorted.len()
        )));
    }

    if total <= config.samples as u128 {
        let mut out = Vec::with_capacity(total as usize);
        for s in lo..=config.max_size {
            if s < f || s - f > m {
                continue;
            }
            for combo in lexicographic_combinations(&rest, s - f) {
                let mut subset = forced.clone();
                subset.extend(combo);
                subset.sort();
                out.push(subset);
            }
        }
        return Ok(out);
    }

    let mut rng = Xoshiro256StarStar::seed_from_u64(config.seed);
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut out = Vec::with_capacity(config.samples);
    while out.len() < config.samples {
        let subset = draw_subset(&mut rng, &rest, &forced, config.min_size, config.max_size)?;
        if seen.insert(subset.clone()) {
            out.push(subset);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetResult {
    /// Sorted indicator names; always a superset of the forced indicators.
    pub indicators: Vec<String>,
    /// Configured fit score; −∞ (serialized null) for singular subsets.
    pub score: f64,
    /// None when the subset's design was singular.
    pub fit_summary: Option<FitReport>,
    pub cond_classification: ConditionClass,
}

/// Sample subsets from the pool, fit each one on its own complete-case
/// rows, and rank. Subsets with singular designs are kept in the output
/// with score −∞ so the ranking stays a total order over the draws.
pub fn run_search(
    panel: &IndicatorPanel,
    pool: &[String],
    response: &str,
    countries: Option<&[String]>,
    config: &SearchConfig,
) -> Result<Vec<SubsetResult>> {
    let subsets = sample_subsets(pool, config)?;
    let mut results = Vec::with_capacity(subsets.len());
    for subset in subsets {
        let (table, _) = panel.complete_cases(&subset, response, countries)?;
        let design = build_design(&table, &subset, response)?;
        match ols_fit(&design) {
            Ok(fit) => {
                let report = fit_report(&design, &fit, 0.05)?;
                let score = match config.score {
                    ScoreMetric::AdjustedR2 => report.adj_r2,
                    ScoreMetric::R2 => report.r2,
                };
                let cond_classification = report.condition_class();
                results.push(SubsetResult {
                    indicators: subset,
                    score,
                    fit_summary: Some(report),
                    cond_classification,
                });
            }
            Err(Error::SingularDesign) => {
                results.push(SubsetResult {
                    indicators: subset,
                    score: f64::NEG_INFINITY,
                    fit_summary: None,
                    cond_classification: ConditionClass::Singular,
                });
            }
            Err(e) => return Err(e),
        }
    }

    results.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are never NaN")
            .then_with(|| {
                let ka = a.fit_summary.as_ref().map_or(f64::INFINITY, |r| r.cond_number);
                let kb = b.fit_summary.as_ref().map_or(f64::INFINITY, |r| r.cond_number);
                ka.partial_cmp(&kb).expect("kappa is never NaN")
            })
            .then_with(|| a.indicators.cmp(&b.indicators))
    });
    Ok(results)
}
