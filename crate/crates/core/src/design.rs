//! Centering and scaling of the predictor matrix and the response.
//!
//! Every column of the stored matrix has mean zero and second moment
//! `(1/n) Σ x_ij² = 1`; the response is treated the same way. The divisor is
//! `n`, not `n - 1`. The centering and scaling factors are kept so fitted
//! coefficients can be taken back to raw units together with an intercept.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, ShapeBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{dims, Error, Result};
use crate::CoefficientBundle;

/// Relative spread below which a column is treated as constant.
const DEGENERATE_SPREAD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedDesign {
    x: Array2<f64>,
    y: Array1<f64>,
    col_center: Array1<f64>,
    col_scale: Array1<f64>,
    y_center: f64,
    y_scale: f64,
}

/// Returns `(mean, root mean square about the mean)` using the `1/n` convention.
fn moments(values: ArrayView1<'_, f64>) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.sum() / n;
    let ms = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, ms.sqrt())
}

fn is_degenerate(values: ArrayView1<'_, f64>, mean: f64, spread: f64) -> bool {
    let magnitude = values.iter().fold(mean.abs(), |m, v| m.max(v.abs()));
    spread <= DEGENERATE_SPREAD * magnitude.max(f64::MIN_POSITIVE) || spread == 0.0
}

/// Standardizes `x_raw` (n × p) and `y_raw` (length n).
pub fn standardize(x_raw: ArrayView2<'_, f64>, y_raw: ArrayView1<'_, f64>) -> Result<StandardizedDesign> {
    let (n, p) = x_raw.dim();
    if y_raw.len() != n {
        return Err(dims(format!("response of length {n}"), format!("length {}", y_raw.len())));
    }
    if n < 2 {
        return Err(Error::TooFewObservations { required: 2, got: n });
    }
    if p == 0 {
        return Err(Error::InvalidParameter { name: "x", reason: "design has no columns".into() });
    }
    if x_raw.iter().chain(y_raw.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input data"));
    }

    // Column-major so each feature is a contiguous slice for the solver.
    let mut x = Array2::<f64>::zeros((n, p).f());
    let mut col_center = Array1::zeros(p);
    let mut col_scale = Array1::zeros(p);
    for (j, column) in x_raw.axis_iter(Axis(1)).enumerate() {
        let (mean, spread) = moments(column);
        if is_degenerate(column, mean, spread) {
            return Err(Error::ConstantColumn { column: j });
        }
        col_center[j] = mean;
        col_scale[j] = spread;
        x.column_mut(j).assign(&column.mapv(|v| (v - mean) / spread));
    }

    let (y_center, y_scale) = moments(y_raw);
    if is_degenerate(y_raw, y_center, y_scale) {
        return Err(Error::ConstantResponse);
    }
    let y = y_raw.mapv(|v| (v - y_center) / y_scale);

    Ok(StandardizedDesign { x, y, col_center, col_scale, y_center, y_scale })
}

impl StandardizedDesign {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Standardized predictors, stored column-major.
    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn col_center(&self) -> &Array1<f64> {
        &self.col_center
    }

    pub fn col_scale(&self) -> &Array1<f64> {
        &self.col_scale
    }

    pub fn y_center(&self) -> f64 {
        self.y_center
    }

    pub fn y_scale(&self) -> f64 {
        self.y_scale
    }

    /// Standardized column `j` as a contiguous slice.
    pub(crate) fn column(&self, j: usize) -> &[f64] {
        self.x
            .column(j)
            .to_slice()
            .expect("design is stored column-major")
    }

    /// `r_j = yᵀx_j / n` for every feature.
    pub fn marginal_correlations(&self) -> Array1<f64> {
        self.x.t().dot(&self.y) / self.n() as f64
    }

    /// Runs the stored centering/scaling over new raw rows.
    pub fn transform(&self, x_raw: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x_raw.ncols() != self.p() {
            return Err(dims(format!("{} columns", self.p()), format!("{} columns", x_raw.ncols())));
        }
        let mut out = x_raw.to_owned();
        for (j, mut column) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (c, s) = (self.col_center[j], self.col_scale[j]);
            column.mapv_inplace(|v| (v - c) / s);
        }
        Ok(out)
    }

    /// Restricts to a subset of rows and standardizes the result afresh.
    pub fn restandardize_rows(&self, rows: &[usize]) -> Result<StandardizedDesign> {
        let x = self.x.select(Axis(0), rows);
        let y = self.y.select(Axis(0), rows);
        standardize(x.view(), y.view())
    }
}

/// Maps a standardized bundle back to raw units.
///
/// Returns the p × G raw coefficient matrix and one intercept per model, so
/// that `intercept_g + x_rawᵀ coef_g` reproduces
/// `y_center + y_scale · x_stdᵀ β_g`.
pub fn destandardize(bundle: &CoefficientBundle, design: &StandardizedDesign) -> Result<(Array2<f64>, Array1<f64>)> {
    if bundle.num_features() != design.p() {
        return Err(dims(format!("{} features", design.p()), format!("{} features", bundle.num_features())));
    }
    if !bundle.on_standardized_scale() {
        return Err(Error::InvalidParameter {
            name: "bundle",
            reason: "coefficients are already in raw units".into(),
        });
    }
    let mut raw = bundle.beta().to_owned();
    for (j, mut row) in raw.axis_iter_mut(Axis(0)).enumerate() {
        let factor = design.y_scale / design.col_scale[j];
        row.mapv_inplace(|b| b * factor);
    }
    let intercepts = raw
        .axis_iter(Axis(1))
        .map(|coef| design.y_center - coef.dot(&design.col_center))
        .collect();
    Ok((raw, intercepts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    #[test]
    fn three_point_column() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![1.0, 0.0, 2.0];
        let d = standardize(x.view(), y.view()).unwrap();
        let h = (1.5f64).sqrt();
        assert_abs_diff_eq!(d.x()[[0, 0]], -h, epsilon = 1e-15);
        assert_abs_diff_eq!(d.x()[[1, 0]], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.x()[[2, 0]], h, epsilon = 1e-15);
    }

    #[test]
    fn moment_conditions_hold() {
        let x = array![[1.0, 10.0], [4.0, -3.0], [2.5, 7.0], [9.0, 0.5], [-1.0, 2.0]];
        let y = array![3.0, -1.0, 2.0, 8.0, 0.0];
        let d = standardize(x.view(), y.view()).unwrap();
        let n = d.n() as f64;
        for col in d.x().columns() {
            assert!(col.sum().abs() / n < 1e-10);
            assert_abs_diff_eq!(col.dot(&col) / n, 1.0, epsilon = 1e-10);
        }
        assert!(d.y().sum().abs() / n < 1e-10);
        assert_abs_diff_eq!(d.y().dot(d.y()) / n, 1.0, epsilon = 1e-10);
        assert!(d.col_scale().iter().all(|&s| s > 0.0));
    }

    #[test]
    fn idempotent_on_standardized_input() {
        let x = array![[1.0, 2.0], [0.5, -1.0], [-3.0, 0.0], [2.0, 4.0]];
        let y = array![1.0, 2.0, 0.0, -1.0];
        let once = standardize(x.view(), y.view()).unwrap();
        let twice = standardize(once.x().view(), once.y().view()).unwrap();
        for (a, b) in once.x().iter().zip(twice.x().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for c in twice.col_center() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }
        for s in twice.col_scale() {
            assert_abs_diff_eq!(*s, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(twice.y_center(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(twice.y_scale(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_column_is_named() {
        let x = array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        let y = array![1.0, 2.0, 4.0];
        assert_eq!(standardize(x.view(), y.view()).unwrap_err(), Error::ConstantColumn { column: 1 });
    }

    #[test]
    fn constant_response_and_tiny_inputs() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = array![2.0, 2.0, 2.0];
        assert_eq!(standardize(x.view(), y.view()).unwrap_err(), Error::ConstantResponse);

        let x = Array2::<f64>::zeros((1, 2));
        let y = array![1.0];
        assert!(matches!(standardize(x.view(), y.view()), Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn destandardize_identity_and_zero() {
        let x = array![[1.0, 2.0], [0.5, -1.0], [-3.0, 0.0], [2.0, 4.0]];
        let y = array![1.0, 2.0, 0.0, -1.0];
        let d = standardize(x.view(), y.view()).unwrap();
        let d = standardize(d.x().view(), d.y().view()).unwrap();
        let beta = array![[0.3, -0.1], [0.0, 0.7]];
        let bundle = CoefficientBundle::from_matrix(beta.clone()).unwrap();
        let (raw, icpt) = destandardize(&bundle, &d).unwrap();
        for (a, b) in raw.iter().zip(beta.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for c in icpt.iter() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }

        let d = standardize(x.view(), y.view()).unwrap();
        let (raw, icpt) = destandardize(&CoefficientBundle::zeros(2, 3), &d).unwrap();
        assert!(raw.iter().all(|&v| v == 0.0));
        assert!(icpt.iter().all(|&c| c == d.y_center()));
    }
}
