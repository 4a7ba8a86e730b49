//! Convergence studies on closed-form test curves.

mod curves;
mod diagnostics;
mod order;
mod study;

pub use curves::{builtin_curve, TestCurve, BUILTIN_CURVES, GREAT_CIRCLE_LENGTH};
pub use diagnostics::{diagnostics, Check, Diagnostics, CHECK_NAMES};
pub use order::{fit_order, OrderFit};
pub use study::{run_study, ConvergenceReport, Method, StudyRow};
