//! Budgeted program-length complexity and entropy coding.

pub mod coding;
pub mod search;

pub use coding::{
    arithmetic_roundtrip, sample_sequence, shannon_code_length, ArithmeticCoder, BitString, CodeLength, NoiseModel,
};
pub use search::{
    compressibility_census, conditional_upper_bound, mutual_information_estimate, shortest_program_upper_bound,
    CensusReport, ComplexityBound, ComplexityRecord, MutualInformation, SearchLimits,
};
