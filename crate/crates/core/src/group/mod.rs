//! Discrete groups given by a finite generating alphabet: loading, ball
//! enumeration, conjugacy data and `⟨γ̂⟩`-coset representatives.

mod conj;
mod enumerate;
mod spec;

pub use conj::{
    canonical_shift, conj_data, coset_canonicalize, ConjClass, CosetRep, DEFAULT_ROOT_BOUND,
};
pub use enumerate::{
    enumerate_ball, enumerate_ball_with, Ball, Certificate, DedupIndex, EnumOptions, GroupElement,
    BOUNDARY_EPS, DEDUP_TOL,
};
pub use spec::{bolza_circumradius, load_group, GroupConfig, GroupSpec, BUILTIN_NAMES};
