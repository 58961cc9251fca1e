//! Principal component analysis over (standardized) feature matrices:
//! explained-variance ratios for scree plots, loading scores, and 2D
//! projections. Deterministic: SVD-based with a fixed sign convention, no
//! randomized solver.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcaModel {
    /// c×p matrix; rows are orthonormal loading vectors, strongest first.
    pub components: DMatrix<f64>,
    /// Eigenvalues of the sample covariance (divisor n−1), descending.
    pub explained_variance: Vec<f64>,
    /// Eigenvalue shares of the total variance, in [0, 1].
    pub explained_variance_ratio: Vec<f64>,
    pub p: usize,
    pub c: usize,
}

/// Fit the top `n_components` principal components. Columns are centered
/// internally; callers standardize first when unit-variance features are
/// wanted (the pipeline does). Eigenvector sign is fixed by making the
/// largest-magnitude entry of each loading vector positive.
pub fn pca_fit(data: &DMatrix<f64>, n_components: usize) -> Result<PcaModel> {
    let n = data.nrows();
    let p = data.ncols();
    if n < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            available: n,
        });
    }
    let max_components = (n - 1).min(p);
    if n_components == 0 || n_components > max_components {
        return Err(Error::TooManyComponents {
            requested: n_components,
            max: max_components,
        });
    }

    let mut centered = data.clone();
    for j in 0..p {
        let mean = centered.column(j).sum() / n as f64;
        for i in 0..n {
            centered[(i, j)] -= mean;
        }
    }

    let svd = centered.svd(false, true);
    let sv = &svd.singular_values;
    debug_assert!(sv.iter().zip(sv.iter().skip(1)).all(|(a, b)| a >= b));
    let v_t = svd.v_t.expect("v_t requested");

    let denom = (n - 1) as f64;
    let r = sv.len();
    let eigenvalues: Vec<f64> = (0..r).map(|i| sv[i] * sv[i] / denom).collect();
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateData);
    }

    let mut components = DMatrix::zeros(n_components, p);
    for comp in 0..n_components {
        let row = v_t.row(comp);
        // largest-|entry| positive; first index wins ties
        let mut arg = 0;
        for j in 1..p {
            if row[j].abs() > row[arg].abs() {
                arg = j;
            }
        }
        let flip = if row[arg] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..p {
            components[(comp, j)] = flip * row[j];
        }
    }

    Ok(PcaModel {
        components,
        explained_variance: eigenvalues[..n_components].to_vec(),
        explained_variance_ratio: eigenvalues[..n_components]
            .iter()
            .map(|ev| ev / total)
            .collect(),
        p,
        c: n_components,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PcaProjection {
    /// n×c score matrix, row i = data row i expressed in component space.
    pub scores: Vec<Vec<f64>>,
    pub color_values: Vec<f64>,
    pub point_labels: Vec<String>,
}

/// scores = data · componentsᵀ, with the color channel and labels carried
/// through for plotting.
pub fn pca_project(
    model: &PcaModel,
    data: &DMatrix<f64>,
    color: &[f64],
    labels: &[String],
) -> Result<PcaProjection> {
    if data.ncols() != model.p {
        return Err(Error::DimensionMismatch {
            expected: model.p,
            found: data.ncols(),
        });
    }
    let n = data.nrows();
    if color.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: color.len(),
        });
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len(),
        });
    }
    let score_matrix = data * model.components.transpose();
    let scores = (0..n)
        .map(|i| (0..model.c).map(|j| score_matrix[(i, j)]).collect())
        .collect();
    Ok(PcaProjection {
        scores,
        color_values: color.to_vec(),
        point_labels: labels.to_vec(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScreeData {
    pub ratios: Vec<f64>,
    /// Each ratio divided by the first (PC1 = 1 by construction).
    pub relative_to_pc1: Vec<f64>,
    pub two_pc_share: f64,
    /// False when the first two components explain less than half the
    /// variance, the robustness criterion for 2D views.
    pub robust: bool,
}

pub fn scree(model: &PcaModel) -> Result<ScreeData> {
    if model.c < 2 {
        return Err(Error::TooFewComponents {
            required: 2,
            available: model.c,
        });
    }
    let ratios = model.explained_variance_ratio.clone();
    let pc1 = ratios[0];
    let relative_to_pc1 = ratios.iter().map(|r| r / pc1).collect();
    let two_pc_share = ratios[0] + ratios[1];
    Ok(ScreeData {
        ratios,
        relative_to_pc1,
        two_pc_share,
        robust: two_pc_share >= 0.5,
    })
}

/// Features ranked by |loading| on one component.
pub fn loading_scores(
    model: &PcaModel,
    component_index: usize,
    feature_names: &[String],
) -> Result<Vec<(String, f64)>> {
    if component_index >= model.c {
        return Err(Error::IndexOutOfRange {
            index: component_index,
            count: model.c,
        });
    }
    if feature_names.len() != model.p {
        return Err(Error::DimensionMismatch {
            expected: model.p,
            found: feature_names.len(),
        });
    }
    let mut scored: Vec<(String, f64)> = feature_names
        .iter()
        .cloned()
        .zip(model.components.row(component_index).iter().copied())
        .collect();
    scored.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .unwrap()
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(scored)
}
