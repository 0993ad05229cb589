//! Numerical lab for fractal measures: self-similar and atomic measures, their
//! Fourier transforms, normalized averages over growing balls, and Hardy-type
//! inequalities checked against finite-L bands.

pub mod asymptotics;
pub mod config;
pub mod experiment;
pub mod fourier;
pub mod geometry;
pub mod hardy;
pub mod measures;
pub mod numeric;
