//! Schema-compatibility analysis for schema knowledge graphs (SKGs).
//!
//! The pipeline: load or import schemas ([`model`], [`importer`]), decide which
//! etypes are semantically equivalent across schemas ([`equivalence`]), weight
//! each etype by its object-property incidence ([`weights`]), then measure how
//! well one schema covers another ([`metrics`]). [`harness`] runs the
//! etype-removal ablation and generates synthetic schema pairs.

pub mod equivalence;
pub mod harness;
pub mod importer;
pub mod metrics;
pub mod model;
pub mod weights;

mod par {
    /// Order-preserving map, parallel when the `parallel` feature is on.
    #[cfg(feature = "parallel")]
    pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        items.iter().map(f).collect()
    }
}
