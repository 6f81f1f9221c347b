//! Time partitions, reference-slab bases and the discrete characteristic construction.

pub mod basis;
pub mod characteristic;
pub mod partition;

pub use basis::{make_time_basis, DgTimeOperators, TimeBasis};
pub use characteristic::{
    characteristic_apply, discrete_characteristic, discrete_characteristic_explicit,
    sup_norm_scan, CharacteristicPoly, SupNormScan,
};
pub use partition::TimePartition;
