//! Stratified zero loci, statistical k-amoebas, sign-vector regions and
//! tropical limits of signed exponential sums
//! `Z(x) = sum_a g_a exp(f_a(x))`.

pub mod cli;
pub mod error;
pub mod eval;
pub mod export;
pub mod grid;
pub mod loci;
pub mod model;
pub mod polygon;
pub mod regions;
pub mod sampling;
pub mod tropical;
pub mod verify;

pub use error::{Error, Result};
pub use eval::{log_sum_exp, sign_of, sign_vector, z0, zk_log_gap, zk_value, LogGap, SignVector, DEFAULT_TOL};
pub use grid::GridSpec;
pub use model::{
    binomial, dedup_for_loci, enumerate_subsets, preset, validate_family, FunctionFamily, FunctionSpec, SubsetMask,
};
pub use regions::{classify_grid, domain_class, label_subdomains, mean_spin, spin_thermodynamics, RegionMap};

/// Runs `f` on a dedicated pool with `threads` workers (`0` = automatic).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}
