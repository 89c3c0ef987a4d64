//! Merger patterns of pairwise eigenvalue confluences.
//!
//! * [`matchings`]: patterns as non-crossing perfect matchings of `2J`
//!   levels, their enumeration, reflection symmetry and text symbols.
//! * [`counting`]: exact counts `T(J)` (all patterns) and `P(J)` (centrally
//!   symmetric patterns) by recurrence, closed form and generating series.
//! * [`spectral`]: eigenvalue path tracking for `A + lambda * B`, merger
//!   detection, pattern classification and witness families.

pub mod counting;
mod eigen;
pub mod matchings;
pub mod spectral;

pub use counting::{
    count_p_closed, count_p_recurrence, count_t_closed, count_t_recurrence, series_f, series_g,
    BigCount, CountTable, Series,
};
pub use matchings::{
    enumerate_noncrossing, enumerate_noncrossing_capped, enumerate_symmetric,
    enumerate_symmetric_capped, format_symbol, parse_symbol, LevelIndex, MergerPattern,
    PatternError, DEFAULT_ENUM_CAP,
};
pub use spectral::{
    build_witness, check_central_symmetry, classify, detect_confluences, spectrum, track_paths,
    witness_lambda_max, ConfluenceEvent, EigenPath, FamilyConfig, MatrixFamily, ObservedPattern,
    SpectralError, SpectrumCenter, SymmetryCheck, Tolerances,
};
