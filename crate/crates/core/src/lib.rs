pub mod engine;
pub mod pauli;
pub mod seed;
pub mod spectrum;
pub mod noise;
pub mod spsa;
pub mod runtime;
pub mod experiment;
