//! Long-format CSV ingest into an in-memory indicator panel, plus histogram
//! binning and complete-case extraction.
//!
//! The panel is keyed by (country, year, indicator). A cell can be present
//! with a value, present-but-missing (empty value field in the CSV), or
//! absent entirely; the latter two are both "missing" for modelling
//! purposes, but recorded-missing cells survive serialization round trips.
//! Missing means an empty value field only — sentinel numbers are never
//! reinterpreted.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names used to read a long-format CSV.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub country_col: String,
    pub year_col: String,
    pub indicator_col: String,
    pub value_col: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            country_col: "country".into(),
            year_col: "year".into(),
            indicator_col: "indicator".into(),
            value_col: "value".into(),
        }
    }
}

/// Country × year × indicator observations with explicit missingness.
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPanel {
    countries: Vec<String>,
    year_start: i32,
    year_end: i32,
    indicators: Vec<String>,
    values: BTreeMap<(String, i32, String), Option<f64>>,
}

/// Canonical JSON form of a panel: axes plus a sparse, sorted cell list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelDoc {
    pub countries: Vec<String>,
    pub years: YearSpan,
    pub indicators: Vec<String>,
    pub values: Vec<CellDoc>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct YearSpan {
    pub start: i32,
    pub end: i32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellDoc {
    pub country: String,
    pub year: i32,
    pub indicator: String,
    pub value: Option<f64>,
}

fn valid_country_code(code: &str) -> bool {
    code.len() == 3 && code.bytes().all(|b| b.is_ascii_uppercase())
}

/// Parse long-format CSV text (`country,year,indicator,value` by default)
/// into a panel. Axes are inferred from the data; an empty value field is
/// recorded as a missing cell.
pub fn parse_panel(csv_text: &str, schema: &CsvSchema) -> Result<IndicatorPanel> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_text.as_bytes());

    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let c_idx = col(&schema.country_col)?;
    let y_idx = col(&schema.year_col)?;
    let i_idx = col(&schema.indicator_col)?;
    let v_idx = col(&schema.value_col)?;

    let mut values: BTreeMap<(String, i32, String), Option<f64>> = BTreeMap::new();

    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                // Unequal field counts surface here; report with the line.
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                return Err(Error::MalformedRow {
                    line,
                    reason: "wrong column count".into(),
                });
            }
        };
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let malformed = |reason: &str| Error::MalformedRow {
            line,
            reason: reason.to_string(),
        };

        let country = record.get(c_idx).ok_or_else(|| malformed("wrong column count"))?;
        let year_s = record.get(y_idx).ok_or_else(|| malformed("wrong column count"))?;
        let ind = record.get(i_idx).ok_or_else(|| malformed("wrong column count"))?;
        let value_s = record.get(v_idx).ok_or_else(|| malformed("wrong column count"))?;

        if !valid_country_code(country) {
            return Err(malformed(&format!(
                "country code {country:?} is not 3 uppercase ASCII letters"
            )));
        }
        let year: i32 = year_s
            .trim()
            .parse()
            .map_err(|_| malformed(&format!("year {year_s:?} is not an integer")))?;
        if ind.is_empty() {
            return Err(malformed("empty indicator name"));
        }
        let value = if value_s.trim().is_empty() {
            None
        } else {
            let v: f64 = value_s
                .trim()
                .parse()
                .map_err(|_| malformed(&format!("value {value_s:?} is not a number")))?;
            if !v.is_finite() {
                return Err(malformed(&format!("value {value_s:?} is not finite")));
            }
            Some(v)
        };

        let key = (country.to_string(), year, ind.to_string());
        if values.contains_key(&key) {
            return Err(Error::DuplicateKey {
                country: key.0,
                year: key.1,
                indicator: key.2,
            });
        }
        values.insert(key, value);
    }

    if values.is_empty() {
        return Err(Error::EmptyInput);
    }

    let countries: BTreeSet<String> = values.keys().map(|k| k.0.clone()).collect();
    let indicators: BTreeSet<String> = values.keys().map(|k| k.2.clone()).collect();
    let year_start = values.keys().map(|k| k.1).min().expect("non-empty");
    let year_end = values.keys().map(|k| k.1).max().expect("non-empty");

    Ok(IndicatorPanel {
        countries: countries.into_iter().collect(),
        year_start,
        year_end,
        indicators: indicators.into_iter().collect(),
        values,
    })
}

impl IndicatorPanel {
    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn indicators(&self) -> &[String] {
        &self.indicators
    }

    pub fn years(&self) -> RangeInclusive<i32> {
        self.year_start..=self.year_end
    }

    /// Observed value at a cell; `None` covers both recorded-missing and
    /// never-recorded cells.
    pub fn get(&self, country: &str, year: i32, indicator: &str) -> Option<f64> {
        self.values
            .get(&(country.to_string(), year, indicator.to_string()))
            .copied()
            .flatten()
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    /// One entry per year in `years`, ascending; missing preserved as `None`.
    pub fn extract_series(
        &self,
        country: &str,
        indicator: &str,
        years: RangeInclusive<i32>,
    ) -> Result<Vec<Option<f64>>> {
        if !self.countries.iter().any(|c| c == country) {
            return Err(Error::UnknownCountry(country.to_string()));
        }
        if !self.indicators.iter().any(|i| i == indicator) {
            return Err(Error::UnknownIndicator(indicator.to_string()));
        }
        Ok(years.map(|y| self.get(country, y, indicator)).collect())
    }

    /// Listwise deletion: keep the (country, year) rows where every named
    /// indicator and the response are present. Candidate rows are the
    /// selected countries crossed with the panel's year range; the second
    /// return value counts candidates that were dropped. Row order is
    /// (country code, then year).
    pub fn complete_cases(
        &self,
        indicators: &[String],
        response: &str,
        countries: Option<&[String]>,
    ) -> Result<(CaseTable, usize)> {
        for ind in indicators {
            if !self.indicators.iter().any(|i| i == ind) {
                return Err(Error::UnknownIndicator(ind.clone()));
            }
        }
        if !self.indicators.iter().any(|i| i == response) {
            return Err(Error::UnknownIndicator(response.to_string()));
        }
        let selected: Vec<String> = match countries {
            Some(list) => {
                for c in list {
                    if !self.countries.iter().any(|p| p == c) {
                        return Err(Error::UnknownCountry(c.clone()));
                    }
                }
                let mut sorted = list.to_vec();
                sorted.sort();
                sorted.dedup();
                sorted
            }
            None => self.countries.clone(),
        };

        let mut table = CaseTable {
            indicator_names: indicators.to_vec(),
            response_name: response.to_string(),
            countries: Vec::new(),
            years: Vec::new(),
            rows: Vec::new(),
            response: Vec::new(),
        };
        let mut dropped = 0usize;

        for country in &selected {
            for year in self.years() {
                let mut row = Vec::with_capacity(indicators.len());
                let mut complete = true;
                for ind in indicators {
                    match self.get(country, year, ind) {
                        Some(v) => row.push(v),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                let resp = self.get(country, year, response);
                if complete && resp.is_some() {
                    table.countries.push(country.clone());
                    table.years.push(year);
                    table.rows.push(row);
                    table.response.push(resp.expect("checked"));
                } else {
                    dropped += 1;
                }
            }
        }

        if table.rows.is_empty() {
            return Err(Error::NoCompleteRows);
        }
        Ok((table, dropped))
    }

    pub fn to_doc(&self) -> PanelDoc {
        PanelDoc {
            countries: self.countries.clone(),
            years: YearSpan {
                start: self.year_start,
                end: self.year_end,
            },
            indicators: self.indicators.clone(),
            values: self
                .values
                .iter()
                .map(|((c, y, i), v)| CellDoc {
                    country: c.clone(),
                    year: *y,
                    indicator: i.clone(),
                    value: *v,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: PanelDoc) -> Result<Self> {
        if doc.values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if doc.years.start > doc.years.end {
            return Err(Error::InvalidSpec("year span start > end".into()));
        }
        let countries: BTreeSet<String> = doc.countries.into_iter().collect();
        let indicators: BTreeSet<String> = doc.indicators.into_iter().collect();
        let mut values = BTreeMap::new();
        for cell in doc.values {
            if !valid_country_code(&cell.country) {
                return Err(Error::MalformedRow {
                    line: 0,
                    reason: format!("country code {:?}", cell.country),
                });
            }
            if !countries.contains(&cell.country) {
                return Err(Error::UnknownCountry(cell.country));
            }
            if !indicators.contains(&cell.indicator) {
                return Err(Error::UnknownIndicator(cell.indicator));
            }
            if cell.year < doc.years.start || cell.year > doc.years.end {
                return Err(Error::InvalidSpec(format!(
                    "year {} outside declared span",
                    cell.year
                )));
            }
            let key = (cell.country, cell.year, cell.indicator);
            if values.insert(key.clone(), cell.value).is_some() {
                return Err(Error::DuplicateKey {
                    country: key.0,
                    year: key.1,
                    indicator: key.2,
                });
            }
        }
        Ok(IndicatorPanel {
            countries: countries.into_iter().collect(),
            year_start: doc.years.start,
            year_end: doc.years.end,
            indicators: indicators.into_iter().collect(),
            values,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("panel doc serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PanelDoc =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(format!("panel JSON: {e}")))?;
        Self::from_doc(doc)
    }

    /// Normalized long CSV: header plus cells sorted by (country, year,
    /// indicator), missing cells emitted with an empty value field. Parsing
    /// this output reproduces the panel exactly.
    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["country", "year", "indicator", "value"])
            .expect("write to Vec");
        for ((c, y, i), v) in &self.values {
            let value = match v {
                Some(x) => format!("{x}"),
                None => String::new(),
            };
            wtr.write_record([c.as_str(), &y.to_string(), i.as_str(), &value])
                .expect("write to Vec");
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
    }
}

impl Serialize for IndicatorPanel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndicatorPanel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = PanelDoc::deserialize(deserializer)?;
        IndicatorPanel::from_doc(doc).map_err(serde::de::Error::custom)
    }
}

/// Dense complete-case rows ready for design-matrix construction.
#[derive(Debug, Clone, Serialize)]
pub struct CaseTable {
    pub indicator_names: Vec<String>,
    pub response_name: String,
    /// Per-row country code.
    pub countries: Vec<String>,
    /// Per-row year.
    pub years: Vec<i32>,
    /// One inner vector per observation, aligned with `indicator_names`.
    pub rows: Vec<Vec<f64>>,
    pub response: Vec<f64>,
}

impl CaseTable {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.indicator_names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| Error::UnknownIndicator(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Equal-width histogram over finite values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// B+1 strictly increasing edges spanning [min, max].
    pub bin_edges: Vec<f64>,
    /// B per-bin counts; the maximum value lands in the last bin.
    pub counts: Vec<u64>,
    pub n: usize,
}

/// Bin values into `bins` equal-width bins, or Sturges' rule
/// (ceil(log2 n) + 1) when `bins` is omitted.
pub fn bin_series(values: &[f64], bins: Option<usize>) -> Result<Histogram> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: values.len(),
        });
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateRange);
    }
    let b = match bins {
        Some(0) => return Err(Error::InvalidBinCount),
        Some(b) => b,
        None => (values.len() as f64).log2().ceil() as usize + 1,
    };

    let width = (max - min) / b as f64;
    let mut edges = Vec::with_capacity(b + 1);
    for i in 0..=b {
        edges.push(min + width * i as f64);
    }
    edges[b] = max; // pin the last edge against fp drift

    let mut counts = vec![0u64; b];
    for &v in values {
        let mut idx = ((v - min) / width) as usize;
        if idx >= b {
            idx = b - 1;
        }
        counts[idx] += 1;
    }
    Ok(Histogram {
        bin_edges: edges,
        counts,
        n: values.len(),
    })
}
