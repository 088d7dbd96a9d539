use alloc::string::String;
use core::fmt;

/// Errors raised by the algebra core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    PresetMismatch,
    /// The preset carries no Witt ring model (custom presets).
    NoWittModel(String),
    InvalidPreset(String),
    NotInSubalgebra,
    NotInImage,
    /// Element is not a valid member of the requested graded piece.
    InvalidElement(String),
    IncompatiblePair { residue_a: String, residue_b: String },
    /// Lifts of `ρτ_j` are not unique over this preset.
    LiftsNotUnique(String),
    /// Predictor only defined when `ρ³ = 0`.
    PredictorRefused(String),
    GeneratorCap(usize),
    MalformedIndexSet(String),
    IndexOverlap,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::PresetMismatch => write!(f, "elements belong to different field presets"),
            Error::NoWittModel(p) => write!(f, "preset {p} has no Witt ring model"),
            Error::InvalidPreset(m) => write!(f, "invalid preset: {m}"),
            Error::NotInSubalgebra => write!(f, "element is not in the subalgebra"),
            Error::NotInImage => write!(f, "element is not in the image of d"),
            Error::InvalidElement(m) => write!(f, "invalid element: {m}"),
            Error::IncompatiblePair { residue_a, residue_b } => write!(
                f,
                "incompatible pair: residues differ ({residue_a} vs {residue_b})"
            ),
            Error::LiftsNotUnique(m) => write!(f, "lifts are not unique: {m}"),
            Error::PredictorRefused(m) => write!(f, "predictor refused: {m}"),
            Error::GeneratorCap(i) => write!(f, "generator index {i} exceeds the cap"),
            Error::MalformedIndexSet(m) => write!(f, "malformed index set: {m}"),
            Error::IndexOverlap => write!(f, "disjoint union of overlapping index sets"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
