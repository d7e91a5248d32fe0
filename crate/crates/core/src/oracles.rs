//! Closed-form reference solutions for small special cases.
//!
//! These are used to check the solver, not to fit data: two models on an
//! orthogonal design, two models on two correlated predictors, and the
//! prediction-error bound for global minimizers.

use nalgebra::{Matrix4, Vector4};
use ndarray::{array, ArrayView1};

use crate::error::{Error, Result};
use crate::objective::{CoefficientBundle, PenaltySpec};
use crate::solver::soft_threshold;

/// Two models on a design with `X/√n` orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalCase {
    /// `r_j = yᵀx_j / n`.
    pub r: Vec<f64>,
    pub spec: PenaltySpec,
}

/// Solution set for one feature of an [`OrthogonalCase`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureSolution {
    /// Inactive in both models.
    Zero,
    /// Both models carry the same value.
    Shared(f64),
    /// Exactly one model carries the value, the other is zero.
    Split(f64),
    /// Non-unique: any pair with `β¹ + β² = total` and `β¹β² ≥ 0`.
    Boundary { total: f64 },
}

impl FeatureSolution {
    /// Whether `(b1, b2)` belongs to the solution set, up to `tol`.
    pub fn admits(&self, b1: f64, b2: f64, tol: f64) -> bool {
        match *self {
            FeatureSolution::Zero => b1.abs() <= tol && b2.abs() <= tol,
            FeatureSolution::Shared(v) => (b1 - v).abs() <= tol && (b2 - v).abs() <= tol,
            FeatureSolution::Split(v) => {
                (b1.abs() <= tol && (b2 - v).abs() <= tol) || (b2.abs() <= tol && (b1 - v).abs() <= tol)
            }
            FeatureSolution::Boundary { total } => (b1 + b2 - total).abs() <= tol && b1 * b2 >= -tol,
        }
    }
}

fn require_two_models(spec: &PenaltySpec) -> Result<()> {
    spec.validate()?;
    if spec.num_models != 2 {
        return Err(Error::InvalidParameter { name: "num_models", reason: format!("closed forms need G = 2, got {}", spec.num_models) });
    }
    Ok(())
}

/// Per-feature closed form for two models on an orthogonal design.
pub fn orthogonal_solution(case: &OrthogonalCase) -> Result<Vec<FeatureSolution>> {
    let spec = &case.spec;
    require_two_models(spec)?;
    let l1 = spec.alpha * spec.lambda_s;
    let ridge = spec.ridge_denominator();
    Ok(case
        .r
        .iter()
        .map(|&r| {
            if r.abs() <= l1 {
                FeatureSolution::Zero
            } else {
                let shrunk = soft_threshold(r, l1);
                if spec.lambda_d < ridge {
                    FeatureSolution::Shared(shrunk / (ridge + spec.lambda_d))
                } else if spec.lambda_d > ridge {
                    FeatureSolution::Split(shrunk / ridge)
                } else {
                    FeatureSolution::Boundary { total: shrunk / ridge }
                }
            }
        })
        .collect())
}

/// Two models, two predictors with `ρ = x₂ᵀx₁ / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPredictorCase {
    pub r1: f64,
    pub r2: f64,
    pub rho: f64,
    pub spec: PenaltySpec,
}

impl TwoPredictorCase {
    /// `T_j = soft(r_j, αλs) / (1 + (1-α)λs)`, the disjoint-model coefficients.
    pub fn marginal_coefficients(&self) -> (f64, f64) {
        let l1 = self.spec.alpha * self.spec.lambda_s;
        let ridge = self.spec.ridge_denominator();
        (soft_threshold(self.r1, l1) / ridge, soft_threshold(self.r2, l1) / ridge)
    }

    /// Stationarity system for both variables active in both models with
    /// matching signs, unknowns ordered `(β¹₁, β²₁, β²₂, β¹₂)`.
    pub fn both_active_system(&self) -> (Matrix4<f64>, Vector4<f64>) {
        let (l, rho) = (self.spec.lambda_d, self.rho);
        #[rustfmt::skip]
        let a = Matrix4::new(
            1.0, l,   0.0, rho,
            l,   1.0, rho, 0.0,
            0.0, rho, 1.0, l,
            rho, 0.0, l,   1.0,
        );
        (a, Vector4::new(self.r1, self.r1, self.r2, self.r2))
    }

    /// Max-norm residual of the both-active system at `bundle` (p = 2, G = 2).
    pub fn system_residual(&self, bundle: &CoefficientBundle) -> f64 {
        let (a, rhs) = self.both_active_system();
        let unknowns = Vector4::new(bundle.get(0, 0), bundle.get(0, 1), bundle.get(1, 1), bundle.get(1, 0));
        (a * unknowns - rhs).amax()
    }

    fn validate(&self) -> Result<()> {
        require_two_models(&self.spec)?;
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("|{}| is not < 1", self.rho) });
        }
        Ok(())
    }
}

/// Unique solution when both variables are active in both models, `λs = 0`
/// and `λd < 1 - |ρ|`.
///
/// The smallest eigenvalue of the system matrix is `1 - λd - |ρ|`, so for
/// negative `ρ` the weaker condition `λd < 1 - ρ` does not rule out a
/// singular system.
pub fn two_predictor_both_active(case: &TwoPredictorCase) -> Result<CoefficientBundle> {
    case.validate()?;
    if case.spec.lambda_s != 0.0 {
        return Err(Error::InvalidParameter { name: "lambda_s", reason: "the both-active closed form needs lambda_s = 0".into() });
    }
    let bound = 1.0 - case.rho.abs();
    if case.spec.lambda_d >= bound {
        return Err(Error::NotUnique { lambda_d: case.spec.lambda_d, bound });
    }
    let (a, rhs) = case.both_active_system();
    let sol = a.lu().solve(&rhs).ok_or(Error::NotUnique { lambda_d: case.spec.lambda_d, bound })?;
    // sol = (β¹₁, β²₁, β²₂, β¹₂)
    CoefficientBundle::from_matrix(array![[sol[0], sol[1]], [sol[3], sol[2]]])
}

/// Smallest `λd` compatible with the two models being disjoint.
pub fn disjoint_lambda_d_bound(case: &TwoPredictorCase) -> Result<f64> {
    case.validate()?;
    let (t1, t2) = case.marginal_coefficients();
    if t1 == 0.0 {
        return Err(Error::UndefinedThreshold { index: 1 });
    }
    if t2 == 0.0 {
        return Err(Error::UndefinedThreshold { index: 2 });
    }
    let l1 = case.spec.alpha * case.spec.lambda_s;
    let first = ((case.r1 - case.rho * t2).abs() - l1) / t1;
    let second = ((case.r2 - case.rho * t1).abs() - l1) / t2;
    Ok(first.max(second))
}

/// Right-hand side of the prediction-error bound for a global minimizer,
/// `2αλs‖β₀‖₁ + λs(1-α)/2 ‖β₀‖² + λd(G-1)/2 ‖β₀‖²`.
pub fn prediction_risk_bound(beta0: ArrayView1<'_, f64>, spec: &PenaltySpec) -> f64 {
    let l1: f64 = beta0.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta0.iter().map(|b| b * b).sum();
    2.0 * spec.alpha * spec.lambda_s * l1
        + spec.lambda_s * (1.0 - spec.alpha) / 2.0 * l2
        + spec.lambda_d * (spec.num_models as f64 - 1.0) / 2.0 * l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(alpha: f64, ls: f64, ld: f64) -> PenaltySpec {
        PenaltySpec::new(alpha, ls, ld, 2).unwrap()
    }

    #[test]
    fn orthogonal_regimes() {
        let zero = OrthogonalCase { r: vec![0.2], spec: spec(1.0, 0.3, 0.5) };
        assert_eq!(orthogonal_solution(&zero).unwrap(), vec![FeatureSolution::Zero]);

        let shared = OrthogonalCase { r: vec![0.8], spec: spec(1.0, 0.3, 0.5) };
        match orthogonal_solution(&shared).unwrap()[0] {
            FeatureSolution::Shared(v) => assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }

        let split = OrthogonalCase { r: vec![0.8], spec: spec(1.0, 0.3, 2.0) };
        match orthogonal_solution(&split).unwrap()[0] {
            FeatureSolution::Split(v) => assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }

        let edge = OrthogonalCase { r: vec![-0.8], spec: spec(1.0, 0.3, 1.0) };
        let sol = orthogonal_solution(&edge).unwrap()[0];
        assert!(matches!(sol, FeatureSolution::Boundary { total } if (total + 0.5).abs() < 1e-15));
        assert!(sol.admits(-0.2, -0.3, 1e-12));
        assert!(!sol.admits(0.2, -0.7, 1e-12));
    }

    #[test]
    fn orthogonal_needs_two_models() {
        let case = OrthogonalCase { r: vec![0.5], spec: PenaltySpec::new(1.0, 0.1, 0.0, 3).unwrap() };
        assert!(orthogonal_solution(&case).is_err());
    }

    #[test]
    fn both_active_identity_and_hand_solution() {
        let c = TwoPredictorCase { r1: 0.4, r2: -0.3, rho: 0.0, spec: spec(1.0, 0.0, 0.0) };
        let b = two_predictor_both_active(&c).unwrap();
        assert_eq!(b.beta(), &array![[0.4, 0.4], [-0.3, -0.3]]);

        // Symmetric solution of x + 0.5x = 1.
        let c = TwoPredictorCase { r1: 1.0, r2: 1.0, rho: 0.0, spec: spec(1.0, 0.0, 0.5) };
        let b = two_predictor_both_active(&c).unwrap();
        for v in b.beta().iter() {
            assert_abs_diff_eq!(*v, 2.0 / 3.0, epsilon = 1e-14);
        }
        assert!(c.system_residual(&b) < 1e-14);
    }

    #[test]
    fn both_active_rejects_non_unique() {
        let c = TwoPredictorCase { r1: 1.0, r2: 1.0, rho: 0.4, spec: spec(1.0, 0.0, 0.6) };
        assert!(matches!(two_predictor_both_active(&c), Err(Error::NotUnique { .. })));
        // 1 - λd + ρ = 0 here although λd < 1 - ρ.
        let c = TwoPredictorCase { r1: 1.0, r2: 0.5, rho: -0.4, spec: spec(1.0, 0.0, 0.6) };
        assert!(matches!(two_predictor_both_active(&c), Err(Error::NotUnique { .. })));
    }

    #[test]
    fn system_eigenvalues() {
        let c = TwoPredictorCase { r1: 0.0, r2: 0.0, rho: 0.3, spec: spec(1.0, 0.0, 0.2) };
        let (a, _) = c.both_active_system();
        let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let mut expect = vec![1.0 - 0.2 - 0.3, 1.0 - 0.2 + 0.3, 1.0 + 0.2 - 0.3, 1.0 + 0.2 + 0.3];
        expect.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&expect) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn disjoint_bound_values() {
        let c = TwoPredictorCase { r1: 0.5, r2: 0.5, rho: 0.3, spec: spec(1.0, 0.0, 0.0) };
        assert_abs_diff_eq!(disjoint_lambda_d_bound(&c).unwrap(), 0.7, epsilon = 1e-15);
        let c = TwoPredictorCase { r1: 0.9, r2: -0.2, rho: 0.0, spec: spec(1.0, 0.0, 0.0) };
        assert_abs_diff_eq!(disjoint_lambda_d_bound(&c).unwrap(), 1.0, epsilon = 1e-15);
        // max{|0.9 - 0.5·0.6| / 0.9, |0.6 - 0.5·0.9| / 0.6} = max{2/3, 1/4}
        let c = TwoPredictorCase { r1: 0.9, r2: 0.6, rho: 0.5, spec: spec(1.0, 0.0, 0.0) };
        assert_abs_diff_eq!(disjoint_lambda_d_bound(&c).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let c = TwoPredictorCase { r1: 0.9, r2: 0.05, rho: 0.5, spec: spec(1.0, 0.1, 0.0) };
        assert!(matches!(disjoint_lambda_d_bound(&c), Err(Error::UndefinedThreshold { index: 2 })));
    }

    #[test]
    fn bound_arithmetic() {
        let b0 = array![1.0, 1.0];
        assert_eq!(prediction_risk_bound(array![0.0, 0.0].view(), &spec(0.5, 0.1, 0.2)), 0.0);
        assert_abs_diff_eq!(prediction_risk_bound(b0.view(), &spec(1.0, 0.1, 0.0)), 0.4, epsilon = 1e-15);
        let s = PenaltySpec::new(0.5, 0.1, 0.2, 3).unwrap();
        assert_abs_diff_eq!(prediction_risk_bound(b0.view(), &s), 0.65, epsilon = 1e-14);
    }
}
