//! Simulation toolkit for counterfactual communication over a chained
//! Mach-Zehnder interferometer mesh.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`] — complex amplitudes, two-mode MZI transfer matrices and
//!   coherent propagation through a planar mesh of nodes.
//! * [`zeno`] — the chained-MZI protocol circuit for a given chain length
//!   and sender bit, with per-photon outcome probabilities under the
//!   quantum Zeno collapse model and optical noise.
//! * [`detect`] — heralding, detector efficiency, dark counts and seeded
//!   Monte Carlo sampling of recorded bits.
//! * [`message`] — bit- and image-level transmission: average bit error,
//!   counterfactual-violation accounting, photons-per-bit optimisation,
//!   image fidelity and a plain portable-bitmap codec ([`pbm`]).
//!
//! All numeric code is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the `*64` aliases below fix the default precision.

pub mod detect;
pub mod mesh;
pub mod message;
pub mod pbm;
pub mod rng;
pub mod scalar;
pub mod zeno;

pub use scalar::Scalar;

/// Default-precision complex amplitude.
pub type Amp64 = mesh::Amplitude<f64>;
/// Default-precision mode vector.
pub type ModeState64 = mesh::ModeState<f64>;
/// Default-precision mesh node.
pub type MziNode64 = mesh::MziNode<f64>;
/// Default-precision mesh circuit.
pub type MeshCircuit64 = mesh::MeshCircuit<f64>;
/// Default-precision protocol description.
pub type ProtocolSpec64 = zeno::ProtocolSpec<f64>;
/// Default-precision per-photon outcome.
pub type PhotonOutcome64 = zeno::PhotonOutcome<f64>;
/// Default-precision noise parameter set.
pub type NoiseParams64 = detect::NoiseParams<f64>;
/// Default-precision per-photon click probabilities.
pub type ClickProbabilities64 = detect::ClickProbabilities<f64>;
