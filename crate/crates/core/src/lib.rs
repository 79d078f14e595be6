//! Verification toolkit for Moran measures with three-element digit sets.

pub mod cli;
pub mod criteria;
pub mod exactnum;
pub mod fourier;
pub mod moran;
pub mod report;
pub mod spectra;

pub use exactnum::{ComplexVal, Rational, Real, UnitPhase};
pub use fourier::TriState;
pub use moran::{DigitTriple, MoranSystem, SequenceExpr};
pub use report::{CheckReport, Verdict};
pub use spectra::{MaximalMapping, SpectrumSet, Word};

pub type ComplexF64 = ComplexVal<f64>;
pub type ComplexF32 = ComplexVal<f32>;
