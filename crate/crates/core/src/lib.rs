//! Multiprojective witness sets: computation, manipulation and numerical
//! irreducible decomposition of varieties in products of affine spaces.

pub mod algebra;
pub mod dimension;
pub mod error;
pub mod fixtures;
pub mod monodromy;
pub mod nid;
pub mod startsys;
pub mod sysio;
pub mod tracker;
pub mod witness;

pub use error::{Error, Result};
