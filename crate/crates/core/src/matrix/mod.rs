//! Subset-indexed embedding matrices and their operator norms.

mod embedding;
mod indexer;
mod khintchine;
mod norms;
mod sparse;

pub use embedding::{
    aggregate_mi_tau, build_mij, default_prune_threshold, default_subset_size, lift,
    pairs_per_point, prune, prune_distance, support_sign_sum, verify_lower_bound_chain,
    verify_mstz_identity, ChainCheck, EmbeddingMatrix, MstzCheck, DEFAULT_DIMENSION_CAP,
};
pub use indexer::{choose, SubsetIndexer};
pub use khintchine::{khintchine_bench, random_symmetric_family, KhintchineReport};
pub use norms::{
    dense_spectral, norm_inf_to_1, norm_one_to_one, norm_report, norm_spectral, InfToOne,
    InfToOneMode, NormReport, SpectralNorm, SpectralOptions, EXACT_INF_TO_ONE_LIMIT,
};
pub use sparse::SparseMatrix;
