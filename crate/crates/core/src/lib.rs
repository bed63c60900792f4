//! Semigroup actions generated by finitely many maps, skew products over the
//! full shift, and locally constant linear cocycles.
//!
//! Modules follow the layers of the toolkit: metric spaces and words
//! ([`spaces`]), generator systems ([`semigroup`]), frequent hitting
//! certification ([`hitting`]), irregular-point witnesses ([`irregular`]),
//! linear cocycles ([`cocycle`]) and entropy estimators ([`entropy`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod entropy;
pub mod error;
pub mod hitting;
mod index;
pub mod irregular;
pub mod presets;
pub mod report;
pub mod semigroup;
pub mod spaces;

pub use cocycle::{Cocycle, ConePair, DirectionWitness, Resonance, SpectrumReport, SpectrumVerdict};
pub use entropy::{EntropyEstimate, EntropyKind, EntropyOptions};
pub use error::{Error, Result};
pub use hitting::{HittingCertificate, HittingOptions, HittingOutcome, Refutation};
pub use irregular::{BirkhoffTrace, IrregularOptions, IrregularWitness, Schedule};
pub use presets::{list_presets, load_preset, Preset, PresetSystem};
pub use semigroup::{Generator, GeneratorSystem};
pub use spaces::{Ball, FiniteWord, Point, Space, Symbol, WordStream};
