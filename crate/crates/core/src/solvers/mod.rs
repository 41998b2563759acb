//! The three estimators the model graph is built from.

pub mod combination;
pub mod isotonic;
pub mod lasso;

pub use combination::{
    combination_objective, fit_combination, predict_combination, CombinationWeights, ConstraintMode,
};
pub use isotonic::{eval_supply_curve, fit_weighted_isotonic, SupplyCurve};
pub use lasso::{fit_lasso, fit_lasso_path, LassoFit, DEFAULT_MAX_ITER, DEFAULT_TOL};
