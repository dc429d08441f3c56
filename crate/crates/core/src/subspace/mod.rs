//! Leading and trailing singular-space approximation.
//!
//! Leading spaces come from sketches `Aᵀ(AAᵀ)ʰH`; trailing spaces come from
//! northern, northwestern or additive preprocessing, or as the complement
//! of a leading basis. The residual metrics used by the benchmark tables
//! live in [`metrics`].

mod leading;
pub mod metrics;
mod trailing;

pub use leading::{
    compress_to_rank, leading_sketch, numrank_search, numrank_search_traced, orth_range,
    power_transform, svd_from_right_basis, NumRankTrace, SketchResult,
};
pub use metrics::{
    leading_error_link, phi_diagnostics, subspace_residual, ErrorLink, PhiDiagnostics,
};
pub use trailing::{
    nmb, rect_reduce, recursive_refine, trailing_attempt, trailing_via_additive,
    trailing_via_leading, trailing_via_north, trailing_via_nw, ComplementMethod, Reduction,
    SquareProblem, TrailingMethod, TrailingResult, DEFAULT_TAU,
};
