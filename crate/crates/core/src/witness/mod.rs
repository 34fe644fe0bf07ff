//! Witness sets and witness collections over a coherent slice bank.

mod bank;
mod collection;
mod degree;
mod set;

pub use bank::{SliceBank, SliceSelection};
pub use collection::{
    coarsen, coarsen_collection, coarsen_with_forms, compute_with_bank, compute_witness_collection, membership, slice,
    CoarsenReport, WitnessCollection,
};
pub use degree::{binomial, multinomial, MultidegreeMap};
pub use set::{move_slice, refine, track_slices, witness_set_contains, Tracked, WitnessSet, WITNESS_RESIDUAL};

/// `Σ_{|e|=d} binom(d; e) · Deg(e)`.
pub fn segre_degree(md: &MultidegreeMap) -> crate::Result<u64> {
    md.segre_degree()
}
