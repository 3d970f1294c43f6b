//! Waveguide-QED correlation toolkit.
//!
//! Models the collective emission of two (and small-N) quantum emitters
//! coupled to one guided optical mode, simulates a Hanbury Brown–Twiss
//! photon-correlation measurement of that emission through a realistic
//! detection chain, and recovers the physical parameters by fitting.
//!
//! Module map:
//! - [`units`] — domain types and unit conversions (ns, rad/ns, μeV, μm).
//! - [`analytic`] — closed-form first/second-order correlation functions,
//!   detector-response convolution, background correction, visibility.
//! - [`dicke`] — exact small-N Lindblad engine: collective jump operator,
//!   bright/dark states, decay spectra, two-time correlation oracle.
//! - [`hbt`] — quantum-trajectory photon-stream generator plus beamsplitter,
//!   detectors and coincidence histogrammer.
//! - [`estimation`] — dark-count subtraction and the least-squares fits
//!   (pulsed/CW g², Lorentzian spectra, lifetimes, Purcell/β extraction).
//! - [`device`] — group index, Purcell formula, efficiency chain and the
//!   empirical thermal-tuning model.

pub mod analytic;
pub mod device;
pub mod dicke;
pub mod estimation;
pub mod hbt;
pub mod units;

pub(crate) mod linalg;
