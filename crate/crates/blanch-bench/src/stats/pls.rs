use super::dataset::RegressionDataset;
use super::ols::r_squared;
use super::StatsError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

/// Upper bound on components tried by leave-one-out selection.
pub const MAX_CV_COMPONENTS: usize = 10;

/// PLS1 regression model fitted by NIPALS.
///
/// `coefficients` are in original units: predictions are
/// `y_mean + (x - x_mean) . coefficients`, so centering and any column
/// scaling used during fitting are already folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct PlsModel {
    /// Achieved component count; may be less than requested if a residual
    /// became numerically zero.
    pub n_components: usize,
    pub scaled: bool,
    pub x_mean: DVector<f64>,
    pub x_scale: DVector<f64>,
    pub y_mean: f64,
    pub y_scale: f64,
    /// Unit-norm weight vectors, one column per component.
    pub weights: DMatrix<f64>,
    pub x_loadings: DMatrix<f64>,
    pub y_loadings: DVector<f64>,
    pub coefficients: DVector<f64>,
    /// y-variance captured per component, in centered/scaled units.
    pub explained_y_ss: DVector<f64>,
    /// Frobenius norm of the X residual: initial value, then one entry per
    /// extracted component. Nonincreasing because deflation projects.
    pub x_residual_norms: Vec<f64>,
    pub fitted_r2: f64,
}

/// Leave-one-out selection outcome: chosen component count and the PRESS
/// value per candidate A (index 0 is A = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentChoice {
    pub n_components: usize,
    pub press: Vec<f64>,
}

/// Per-condition regression summary written next to the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsReport {
    pub n_components: usize,
    pub r2: f64,
    pub scaled: bool,
    pub depth_mm: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub vip: Vec<f64>,
    pub vip_above_one: Vec<bool>,
}

/// Fits a PLS1 model with NIPALS: center (and optionally unit-variance
/// scale) X and y, then per component take the weight vector proportional
/// to the X-residual/y-residual covariance, extract scores, and deflate.
///
/// Sign convention: each weight vector's largest-magnitude element is made
/// positive (first index wins ties), so refits are bit-identical.
pub fn pls_fit(
    data: &RegressionDataset,
    n_components: usize,
    scale: bool,
) -> Result<PlsModel, StatsError> {
    let n = data.x.nrows();
    let p = data.x.ncols();
    if n < 2 {
        return Err(StatsError::TooFewSamples { needed: 2, actual: n });
    }
    let a_max = (n - 1).min(p);
    if n_components < 1 || n_components > a_max {
        return Err(StatsError::InvalidParameter(format!(
            "n_components must lie in [1, {a_max}], got {n_components}"
        )));
    }

    let mut x_mean = DVector::zeros(p);
    for j in 0..p {
        x_mean[j] = data.x.column(j).sum() / n as f64;
    }
    let y_mean = data.y.sum() / n as f64;
    let y_ss: f64 = data.y.iter().map(|&v| (v - y_mean).powi(2)).sum();
    if y_ss == 0.0 {
        return Err(StatsError::ConstantInput("y"));
    }

    let mut x_scale = DVector::from_element(p, 1.0);
    let mut y_scale = 1.0;
    if scale {
        for j in 0..p {
            let ss: f64 = data.x.column(j).iter().map(|&v| (v - x_mean[j]).powi(2)).sum();
            let std = (ss / (n - 1) as f64).sqrt();
            // Constant columns stay unscaled; they carry zero weight anyway.
            if std > 0.0 {
                x_scale[j] = std;
            }
        }
        y_scale = (y_ss / (n - 1) as f64).sqrt();
    }

    let mut x_r = data.x.clone();
    for j in 0..p {
        let mut col = x_r.column_mut(j);
        for v in col.iter_mut() {
            *v = (*v - x_mean[j]) / x_scale[j];
        }
    }
    let mut y_r = DVector::from_iterator(n, data.y.iter().map(|&v| (v - y_mean) / y_scale));

    let mut weights = DMatrix::zeros(p, n_components);
    let mut x_loadings = DMatrix::zeros(p, n_components);
    let mut y_loadings = DVector::zeros(n_components);
    let mut explained = DVector::zeros(n_components);
    let mut x_residual_norms = vec![x_r.norm()];

    let w_floor = 1e-12 * (x_r.transpose() * &y_r).norm().max(f64::MIN_POSITIVE);
    let mut achieved = 0;
    for a in 0..n_components {
        let mut w = x_r.transpose() * &y_r;
        let w_norm = w.norm();
        if w_norm <= w_floor {
            break;
        }
        w /= w_norm;
        let mut pivot = 0;
        for j in 1..p {
            if w[j].abs() > w[pivot].abs() {
                pivot = j;
            }
        }
        if w[pivot] < 0.0 {
            w.neg_mut();
        }

        let t = &x_r * &w;
        let tt = t.norm_squared();
        if tt <= 1e-30 {
            break;
        }
        let p_a = x_r.transpose() * &t / tt;
        let q_a = y_r.dot(&t) / tt;

        x_r -= &t * p_a.transpose();
        y_r -= &t * q_a;

        weights.set_column(a, &w);
        x_loadings.set_column(a, &p_a);
        y_loadings[a] = q_a;
        explained[a] = q_a * q_a * tt;
        x_residual_norms.push(x_r.norm());
        achieved = a + 1;
    }

    let weights = weights.columns(0, achieved).into_owned();
    let x_loadings = x_loadings.columns(0, achieved).into_owned();
    let y_loadings = y_loadings.rows(0, achieved).into_owned();
    let explained = explained.rows(0, achieved).into_owned();

    let coefficients = if achieved == 0 {
        DVector::zeros(p)
    } else {
        let ptw = x_loadings.transpose() * &weights;
        let z = ptw.lu().solve(&y_loadings).ok_or_else(|| {
            StatsError::DegenerateModel("loading/weight system is singular".into())
        })?;
        let b_scaled = &weights * z;
        DVector::from_iterator(p, (0..p).map(|j| y_scale * b_scaled[j] / x_scale[j]))
    };

    let mut model = PlsModel {
        n_components: achieved,
        scaled: scale,
        x_mean,
        x_scale,
        y_mean,
        y_scale,
        weights,
        x_loadings,
        y_loadings,
        coefficients,
        explained_y_ss: explained,
        x_residual_norms,
        fitted_r2: 0.0,
    };
    if achieved > 0 {
        let fitted = pls_predict(&model, &data.x)?;
        model.fitted_r2 = r_squared(data.y.as_slice(), fitted.as_slice())?.clamp(0.0, 1.0);
    }
    Ok(model)
}

/// Predicts responses for rows of `x` (original units).
pub fn pls_predict(model: &PlsModel, x: &DMatrix<f64>) -> Result<DVector<f64>, StatsError> {
    let p = model.x_mean.len();
    if x.ncols() != p {
        return Err(StatsError::DimensionMismatch {
            context: "pls_predict columns",
            expected: p,
            actual: x.ncols(),
        });
    }
    let mut y_hat = DVector::from_element(x.nrows(), model.y_mean);
    for i in 0..x.nrows() {
        let mut acc = 0.0;
        for j in 0..p {
            acc += (x[(i, j)] - model.x_mean[j]) * model.coefficients[j];
        }
        y_hat[i] += acc;
    }
    Ok(y_hat)
}

/// Variable importance in projection:
/// VIP_j = sqrt(p * sum_a SSY_a w_aj^2 / sum_a SSY_a) with unit-norm w_a.
/// Squared scores average to exactly one.
pub fn vip_scores(model: &PlsModel) -> Result<Vec<f64>, StatsError> {
    let total: f64 = model.explained_y_ss.iter().sum();
    if model.n_components == 0 || !(total > 0.0) {
        return Err(StatsError::DegenerateModel(
            "no explained variance to attribute".into(),
        ));
    }
    let p = model.weights.nrows();
    let mut vip = vec![0.0; p];
    for (j, v) in vip.iter_mut().enumerate() {
        let mut acc = 0.0;
        for a in 0..model.n_components {
            acc += model.explained_y_ss[a] * model.weights[(j, a)].powi(2);
        }
        *v = (p as f64 * acc / total).sqrt();
    }
    Ok(vip)
}

/// Chooses the component count by leave-one-out cross-validation over
/// A in [1, min(MAX_CV_COMPONENTS, p, n-2)], minimizing PRESS; ties go to
/// the smaller A. Folds that cannot be fitted fall back to predicting the
/// fold mean.
pub fn select_components_loo(
    data: &RegressionDataset,
    scale: bool,
) -> Result<ComponentChoice, StatsError> {
    let n = data.x.nrows();
    if n < 3 {
        return Err(StatsError::TooFewSamples { needed: 3, actual: n });
    }
    let a_cap = MAX_CV_COMPONENTS.min(data.x.ncols()).min(n - 2);
    let mut press = vec![0.0; a_cap];
    for i in 0..n {
        let fold_x = data.x.clone().remove_row(i);
        let fold_y = data.y.clone().remove_row(i);
        let fold_mean = fold_y.sum() / fold_y.len() as f64;
        let mut fold_lateral = data.lateral_mm.clone();
        fold_lateral.remove(i);
        let fold = RegressionDataset::from_parts(
            fold_x,
            fold_y,
            fold_lateral,
            data.depth_mm.clone(),
        )?;
        let row = data.x.row(i).into_owned();
        let row = DMatrix::from_row_slice(1, data.x.ncols(), row.as_slice());
        for (slot, a) in press.iter_mut().zip(1..=a_cap) {
            let prediction = match pls_fit(&fold, a, scale) {
                Ok(model) => pls_predict(&model, &row)?[0],
                Err(_) => fold_mean,
            };
            *slot += (prediction - data.y[i]).powi(2);
        }
    }
    let mut best = 0;
    for (k, &value) in press.iter().enumerate() {
        if value < press[best] {
            best = k;
        }
    }
    Ok(ComponentChoice {
        n_components: best + 1,
        press,
    })
}

/// Fits with the component count chosen by [`select_components_loo`].
pub fn pls_fit_cv(data: &RegressionDataset, scale: bool) -> Result<PlsModel, StatsError> {
    let choice = select_components_loo(data, scale)?;
    pls_fit(data, choice.n_components, scale)
}

impl PlsReport {
    pub fn from_model(model: &PlsModel, depth_mm: &[f64]) -> Result<Self, StatsError> {
        if depth_mm.len() != model.coefficients.len() {
            return Err(StatsError::DimensionMismatch {
                context: "report depths",
                expected: model.coefficients.len(),
                actual: depth_mm.len(),
            });
        }
        let vip = vip_scores(model)?;
        Ok(PlsReport {
            n_components: model.n_components,
            r2: model.fitted_r2,
            scaled: model.scaled,
            depth_mm: depth_mm.to_vec(),
            coefficients: model.coefficients.as_slice().to_vec(),
            vip_above_one: vip.iter().map(|&v| v > 1.0).collect(),
            vip,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<(), StatsError> {
        let mut writer = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self, StatsError> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}
