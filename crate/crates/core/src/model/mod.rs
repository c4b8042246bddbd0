//! Instance, point and inequality data model plus the closed-form
//! constructions built on it.

pub mod construct;
pub mod inequality;
pub mod instance;
pub mod rational;

pub use construct::{
    compute_pitch, is_valid, is_valid_budgeted, kc_inequality, pitch2_canonical, pitch_reduce,
    reduce_maxknap, MaxKnapReduction, Pitch2Canonical,
};
pub use inequality::{Family, Inequality};
pub use instance::{char_vector, Instance, Point, RawInstance, RawItem};
pub use rational::Rational;
