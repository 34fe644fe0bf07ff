//! Text input, witness archives and seeded randomness.

mod archive;
mod parse;
mod rng;

pub use archive::{save_load_witness, ArchiveGroup, WitnessArchive, ARCHIVE_VERSION};
pub use parse::{parse_system, print_polynomial, print_system, SystemDocument};
pub use rng::{DrawKind, RandomSource};
