//! Subgroup handles, coset metrics, packing profiles and transfer laws.

mod handle;
mod laws;
mod profile;

pub use handle::{CosetMetric, Lengths, Oracle, SubgroupHandle};
pub use laws::{check_transfer_law, Law, LawCheck, LawInstance, LawReport};
pub use profile::{
    enumerate_cosets, normal_close_count, packing_profile, Coset, Mode, NormalCount, PackingProfile, PairCert,
    ProfileOptions, ProfileRow,
};
