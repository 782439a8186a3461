//! Hopping amplitudes from Wannier functions, their symmetry relations, and
//! truncated lattice models.

mod hopping;
mod model;
mod relations;
mod scan;

pub use hopping::{hoppings_from_bands, hoppings_real_space, HoppingTable, Provenance};
pub use model::{compare, tb_ep_positions, BandDeviation, Comparison, TbModel};
pub use relations::{
    asymmetry_ratio, verify_relations, RelationCheck, RelationContext, RelationId, RelationReport, SymmetryClass,
};
pub use scan::{hopping_decay_scan, DecayRatio, DecayRow};
