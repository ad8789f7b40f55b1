//! Solovay-Kitaev compilation over SU(2).

mod compile;
mod kdtree;
mod net;
mod study;
mod su2;

pub use compile::{
    group_commutator, predicted_depth, recompute_distance, recompute_product, shrink_constant, sk_approximate, sk_compile, CompileOptions,
    CompileReport, GateSequence,
};
pub use net::{BasisGate, BasisNet, GateSet};
pub use study::{lower_bound_demo, scaling_study, LowerBoundReport, ScalingReport, ScalingRow};
pub use su2::Su2;
