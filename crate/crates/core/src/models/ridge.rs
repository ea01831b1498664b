use nalgebra::{DMatrix, DVector};

use super::{check_columns, ModelError};

/// L2-regularized least squares with an unpenalized intercept, one weight
/// vector per output (a single output for regression, one per class for the
/// one-vs-rest classifier).
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
}

impl RidgeModel {
    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len() + 1).sum()
    }

    /// Raw scores, one vector per output.
    pub fn scores(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ModelError> {
        if x.len() != self.n_features() {
            return Err(ModelError::FeatureMismatch { expected: self.n_features(), found: x.len() });
        }
        let n = x.first().map_or(0, Vec::len);
        Ok(self
            .weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, &b)| {
                let mut out = vec![b; n];
                for (col, &wj) in x.iter().zip(w) {
                    for (o, v) in out.iter_mut().zip(col) {
                        *o += wj * v;
                    }
                }
                out
            })
            .collect())
    }
}

/// Fits every column of `targets` (row-major `n × k`) against the same design.
///
/// Solves `(XcᵀXc + λI) w = Xcᵀ yc` on column-centered data, then
/// `b = ȳ − x̄·w`. Cholesky first; SVD least squares when the system is
/// singular (only possible with `lambda = 0`).
pub(crate) fn fit_multi(x: &[Vec<f64>], targets: &[Vec<f64>], lambda: f64) -> Result<RidgeModel, ModelError> {
    let n = targets.first().map_or(0, Vec::len);
    check_columns(x, n)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ModelError::InvalidSpec(format!("ridge lambda must be finite and >= 0, got {lambda}")));
    }
    if targets.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let p = x.len();
    let nf = n as f64;
    let means: Vec<f64> = x.iter().map(|c| c.iter().sum::<f64>() / nf).collect();
    let centered: Vec<Vec<f64>> = x.iter().zip(&means).map(|(c, m)| c.iter().map(|v| v - m).collect()).collect();

    let mut gram = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            gram[(i, j)] = s;
            gram[(j, i)] = s;
        }
        gram[(i, i)] += lambda;
    }
    let k = targets.len();
    let ybar: Vec<f64> = targets.iter().map(|t| t.iter().sum::<f64>() / nf).collect();
    let mut rhs = DMatrix::<f64>::zeros(p, k);
    for (o, t) in targets.iter().enumerate() {
        for (j, c) in centered.iter().enumerate() {
            rhs[(j, o)] = c.iter().zip(t).map(|(a, y)| a * (y - ybar[o])).sum();
        }
    }
    if gram.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }

    let w = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.svd(true, true).solve(&rhs, 1e-12).map_err(|e| ModelError::Numerical(e.to_string()))?,
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    let weights: Vec<Vec<f64>> = (0..k).map(|o| w.column(o).iter().copied().collect()).collect();
    let intercepts = weights
        .iter()
        .zip(&ybar)
        .map(|(wo, yb)| yb - wo.iter().zip(&means).map(|(a, m)| a * m).sum::<f64>())
        .collect();
    Ok(RidgeModel { weights, intercepts })
}

/// Single-output ridge regression.
pub fn ridge_fit(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<RidgeModel, ModelError> {
    fit_multi(x, &[y.to_vec()], lambda)
}

/// One-vs-rest ridge on ±1 targets for class codes `0..n_classes`.
/// Classes absent from `codes` still get an output (it learns "never").
pub fn ridge_classify_fit(
    x: &[Vec<f64>],
    codes: &[usize],
    n_classes: usize,
    lambda: f64,
) -> Result<RidgeModel, ModelError> {
    let mut present = vec![false; n_classes];
    for &c in codes {
        present[c] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(ModelError::TooFewClasses);
    }
    let targets: Vec<Vec<f64>> =
        (0..n_classes).map(|k| codes.iter().map(|&c| if c == k { 1.0 } else { -1.0 }).collect()).collect();
    fit_multi(x, &targets, lambda)
}

/// Argmax over outputs; ties go to the smaller class index.
pub fn argmax_rows(scores: &[Vec<f64>]) -> Vec<usize> {
    let n = scores.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let mut best = 0;
            for (k, s) in scores.iter().enumerate().skip(1) {
                if s[i] > scores[best][i] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Exposed for solver diagnostics: `‖(XcᵀXc + λI)w − Xcᵀyc‖ / ‖Xcᵀyc‖` computed directly.
pub fn normal_equation_residual(x: &[Vec<f64>], y: &[f64], lambda: f64, w: &[f64]) -> f64 {
    let n = y.len() as f64;
    let xc: Vec<Vec<f64>> = x
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n;
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let ym = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
    let xm = DMatrix::from_fn(y.len(), x.len(), |i, j| xc[j][i]);
    let wv = DVector::from_column_slice(w);
    let yv = DVector::from_column_slice(&yc);
    let lhs = xm.transpose() * (&xm * &wv) + wv * lambda;
    let rhs = xm.transpose() * yv;
    (lhs - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE)
}
