//! Chained-MZI counterfactual protocol: circuit construction for a given
//! chain length and sender bit, and per-photon outcome probabilities under
//! the per-stage collapse model.
//!
//! The simulated channel uses three modes:
//!
//! * mode 0 — the transmission line; its terminal amplitude is the photon
//!   Alice detects at `D_A`,
//! * mode 1 — the arm inside Bob's laboratory; its terminal amplitude is
//!   Bob's detector `D_B`,
//! * mode 2 — Bob's exit channel, fed by his nodes when they are SWAPs.
//!
//! Each of the `n` beamsplitters couples modes (0, 1) with reflectivity
//! `R(n) = cos^2(pi / 2n)`; after every beamsplitter a Bob node couples
//! modes (1, 2). For a logic 0 the Bob nodes are mirrors, the chain
//! interferes coherently and the photon exits in `D_B`. For a logic 1 they
//! are SWAPs: crossed amplitude is routed out and removed from the
//! coherent state after every stage (the Zeno collapse), so the photon
//! stays in the line with probability `R(n)^n`.
//!
//! All functions are pure; concurrent use needs no synchronisation.

use thiserror::Error;

use crate::mesh::{self, MeshCircuit, MeshError, ModeState, MziNode};
use crate::rng::TrialRng;
use crate::scalar::{count, real, Scalar};

/// Transmission-line mode, terminating at Alice's detector.
pub const ALICE_MODE: usize = 0;
/// Bob's interferometer arm, terminating at his detector.
pub const BOB_MODE: usize = 1;
/// Bob's exit channel for out-routed amplitude.
pub const EXIT_MODE: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZenoError {
    #[error("the chain needs at least two beamsplitters, got {0}")]
    TooFewBeamsplitters(usize),
    #[error("visibility {0} is outside [0, 1]")]
    InvalidVisibility(f64),
    #[error("visibility {0} is at or below 0.5; the dephasing model does not apply")]
    VisibilityTooLow(f64),
    #[error("swap backscatter {0} is outside [0, 1]")]
    InvalidBackscatter(f64),
    #[error("an ideal protocol cannot carry noise (visibility {0}, backscatter {1})")]
    IdealWithNoise(f64, f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn f64_of<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parameters of one protocol run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec<T> {
    /// Chain length `n >= 2`.
    pub num_beamsplitters: usize,
    /// The bit Bob encodes: `false` = logic 0 (mirrors), `true` = logic 1
    /// (open paths).
    pub bob_bit: bool,
    /// Mean interferometric visibility of each MZI, in `[0, 1]`.
    pub visibility: T,
    /// Probability that a SWAP reflects amplitude back into the line.
    pub swap_backscatter: T,
    /// Ideal optics: forces visibility 1 and backscatter 0.
    pub ideal: bool,
}

impl<T: Scalar> ProtocolSpec<T> {
    pub fn ideal(num_beamsplitters: usize, bob_bit: bool) -> Result<Self, ZenoError> {
        let spec = Self {
            num_beamsplitters,
            bob_bit,
            visibility: T::one(),
            swap_backscatter: T::zero(),
            ideal: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn noisy(
        num_beamsplitters: usize,
        bob_bit: bool,
        visibility: T,
        swap_backscatter: T,
    ) -> Result<Self, ZenoError> {
        let spec = Self {
            num_beamsplitters,
            bob_bit,
            visibility,
            swap_backscatter,
            ideal: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ZenoError> {
        if self.num_beamsplitters < 2 {
            return Err(ZenoError::TooFewBeamsplitters(self.num_beamsplitters));
        }
        if !(self.visibility >= T::zero() && self.visibility <= T::one()) {
            return Err(ZenoError::InvalidVisibility(f64_of(self.visibility)));
        }
        if !(self.swap_backscatter >= T::zero() && self.swap_backscatter <= T::one()) {
            return Err(ZenoError::InvalidBackscatter(f64_of(self.swap_backscatter)));
        }
        if self.ideal && (self.visibility < T::one() || self.swap_backscatter > T::zero()) {
            return Err(ZenoError::IdealWithNoise(
                f64_of(self.visibility),
                f64_of(self.swap_backscatter),
            ));
        }
        Ok(())
    }
}

/// Where a photon ends up, per injected photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonOutcome<T> {
    /// Probability of exiting at Alice's port `D_A`.
    pub p_alice: T,
    /// Probability of exiting at Bob's port `D_B`.
    pub p_bob: T,
    /// Probability of being absorbed or routed out of the chain.
    pub p_lost: T,
    /// Summed squared amplitude that crossed between the laboratories
    /// against the protocol's counterfactual claim: line leakage into
    /// `D_A` for a logic 0, SWAP backscatter re-entering the line for a
    /// logic 1.
    pub p_violation_amp: T,
}

/// Removal of out-routed amplitude from the coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollapseEvent {
    /// Column index after which the projection is applied.
    pub after_column: usize,
    /// Mode whose amplitude is removed.
    pub mode: usize,
}

/// A protocol compiled to a mesh plus its collapse schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledProtocol<T> {
    pub circuit: MeshCircuit<T>,
    pub collapse: Vec<CollapseEvent>,
}

/// Beamsplitter reflectivity of an `n`-stage chain, `cos^2(pi / 2n)`.
pub fn chain_reflectivity<T: Scalar>(n: usize) -> Result<T, ZenoError> {
    if n < 2 {
        return Err(ZenoError::TooFewBeamsplitters(n));
    }
    let theta = T::FRAC_PI_2() / count(n);
    Ok(theta.cos().powi(2))
}

/// Logic-1 error of the ideal chain, `1 - R(n)^n`.
pub fn ideal_p1_error<T: Scalar>(n: usize) -> Result<T, ZenoError> {
    let r = chain_reflectivity::<T>(n)?;
    Ok(T::one() - r.powi(n as i32))
}

/// Build the protocol circuit: `n` beamsplitters on modes (0, 1), each
/// followed by a Bob node on modes (1, 2). `bs_phases`, when given, sets
/// the external phase of each beamsplitter (length `n`).
fn build_chain<T: Scalar>(
    n: usize,
    bob_bit: bool,
    bs_phases: Option<&[T]>,
) -> Result<CompiledProtocol<T>, ZenoError> {
    let mut circuit = MeshCircuit::new(3)?;
    let mut collapse = Vec::new();
    for stage in 0..n {
        let mut bs = MziNode::beamsplitter(ALICE_MODE, n);
        if let Some(phases) = bs_phases {
            bs = bs.with_phase(phases[stage]);
        }
        circuit.push_column(vec![bs])?;
        let bob = if bob_bit {
            MziNode::swap(BOB_MODE)
        } else {
            MziNode::mirror(BOB_MODE)
        };
        circuit.push_column(vec![bob])?;
        if bob_bit {
            collapse.push(CollapseEvent {
                after_column: circuit.num_columns() - 1,
                mode: EXIT_MODE,
            });
        }
    }
    Ok(CompiledProtocol { circuit, collapse })
}

/// Compile a protocol description to a circuit and collapse schedule.
pub fn build_circuit<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<CompiledProtocol<T>, ZenoError> {
    spec.validate()?;
    build_chain(spec.num_beamsplitters, spec.bob_bit, None)
}

/// Propagate through a compiled protocol, applying the collapse schedule.
///
/// Returns the surviving coherent state and the total collapsed
/// probability.
pub fn propagate_with_collapse<T: Scalar>(
    protocol: &CompiledProtocol<T>,
    input: &ModeState<T>,
) -> Result<(ModeState<T>, T), MeshError> {
    if input.num_modes() != protocol.circuit.num_modes() {
        return Err(MeshError::DimensionMismatch {
            got: input.num_modes(),
            want: protocol.circuit.num_modes(),
        });
    }
    let mut state = input.clone();
    let mut collapsed = T::zero();
    for (ci, column) in protocol.circuit.columns().iter().enumerate() {
        mesh::apply_column(column, &mut state)?;
        for event in &protocol.collapse {
            if event.after_column == ci {
                collapsed = collapsed + state.project_out(event.mode);
            }
        }
    }
    state.validate_finite()?;
    debug_assert!(f64_of(state.norm_sqr()) <= 1.0 + 1e-9);
    Ok((state, collapsed))
}

/// How per-MZI visibility is turned into a logic-0 leakage probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisibilityMode {
    /// Each of the `n - 1` chained MZIs is dephased on its own and the
    /// leaked probabilities are added; stages decohere independently, so
    /// this equals the mean of the random-phase model. Default.
    IncoherentStages,
    /// All stages dephased together with aligned signs; upper envelope of
    /// the random-phase model.
    WorstCaseAligned,
    /// One random draw of per-stage phase-error signs.
    RandomPhase { seed: u64 },
}

/// Leakage into `D_A` for a logic 0 when the interior stage phases are
/// offset by `phase_errors[k]` (length `n - 1`), by coherent propagation.
fn bit0_leak_with_stage_errors<T: Scalar>(n: usize, phase_errors: &[T]) -> Result<T, ZenoError> {
    debug_assert_eq!(phase_errors.len(), n - 1);
    // A node's external phase acts after its own mixing, so the phase
    // field of beamsplitter k carries the dephasing of the loop between
    // beamsplitters k and k + 1. A phase on the line mode equals the
    // opposite phase on Bob's arm up to a global phase.
    let mut bs_phases = vec![T::zero(); n];
    for (k, err) in phase_errors.iter().enumerate() {
        bs_phases[k] = *err;
    }
    let protocol = build_chain(n, false, Some(&bs_phases))?;
    let out = mesh::propagate(&protocol.circuit, &ModeState::basis(3, ALICE_MODE))?;
    Ok(out.probability(ALICE_MODE))
}

/// Per-stage phase error with the dark-port floor `(1 - v) / 2`: a single
/// MZI whose arms pick up this differential phase leaks exactly that
/// fraction at its dark output.
fn dephasing_angle<T: Scalar>(visibility: T) -> T {
    let two = real::<T>(2.0);
    two * ((T::one() - visibility) / two).sqrt().asin()
}

/// Probability of a `D_A` click for a logic 0 with per-MZI visibility `v`,
/// by coherent propagation of dephased chains. Deterministic for the
/// default [`VisibilityMode::IncoherentStages`].
pub fn p0_error_from_visibility<T: Scalar>(n: usize, visibility: T) -> Result<T, ZenoError> {
    p0_error_from_visibility_mode(n, visibility, VisibilityMode::IncoherentStages)
}

/// Same as [`p0_error_from_visibility`] with an explicit accumulation
/// mode.
pub fn p0_error_from_visibility_mode<T: Scalar>(
    n: usize,
    visibility: T,
    mode: VisibilityMode,
) -> Result<T, ZenoError> {
    if n < 2 {
        return Err(ZenoError::TooFewBeamsplitters(n));
    }
    if visibility.is_nan() || visibility > T::one() {
        return Err(ZenoError::InvalidVisibility(f64_of(visibility)));
    }
    if visibility <= real(0.5) {
        return Err(ZenoError::VisibilityTooLow(f64_of(visibility)));
    }
    if visibility == T::one() {
        // Zero dephasing leaks nothing; skip the propagation residue.
        return Ok(T::zero());
    }
    let delta = dephasing_angle(visibility);
    let stages = n - 1;
    match mode {
        VisibilityMode::IncoherentStages => {
            let mut total = T::zero();
            for k in 0..stages {
                let mut errors = vec![T::zero(); stages];
                errors[k] = delta;
                total = total + bit0_leak_with_stage_errors(n, &errors)?;
            }
            Ok(total)
        }
        VisibilityMode::WorstCaseAligned => {
            let errors = vec![delta; stages];
            bit0_leak_with_stage_errors(n, &errors)
        }
        VisibilityMode::RandomPhase { seed } => {
            let mut rng = TrialRng::new(seed, 0);
            let errors: Vec<T> = (0..stages)
                .map(|_| if rng.next_bool(0.5) { delta } else { -delta })
                .collect();
            bit0_leak_with_stage_errors(n, &errors)
        }
    }
}

/// Per-photon outcome probabilities for one protocol setting.
///
/// Logic 0 is evaluated coherently with the visibility model (collapse
/// never fires); logic 1 is evaluated with per-stage collapse, where
/// visibility plays no role because interference is already suppressed,
/// and a fraction `swap_backscatter` of every out-routed amplitude
/// re-enters the transmission line. The re-entering wave counter-
/// propagates toward Alice's laboratory, so it is counted in
/// `p_violation_amp` (squared amplitudes summed in quadrature) and in
/// `p_lost`, and never interferes with the forward state.
pub fn run_photon<T: Scalar>(spec: &ProtocolSpec<T>) -> Result<PhotonOutcome<T>, ZenoError> {
    spec.validate()?;
    if spec.bob_bit {
        let protocol = build_circuit(spec)?;
        let input = ModeState::basis(3, ALICE_MODE);
        let (state, collapsed) = propagate_with_collapse(&protocol, &input)?;
        let p_alice = state.probability(ALICE_MODE);
        let p_bob = state.probability(BOB_MODE);
        Ok(PhotonOutcome {
            p_alice,
            p_bob,
            p_lost: collapsed,
            p_violation_amp: spec.swap_backscatter * collapsed,
        })
    } else {
        let p_alice = p0_error_from_visibility(spec.num_beamsplitters, spec.visibility)?;
        Ok(PhotonOutcome {
            p_alice,
            p_bob: T::one() - p_alice,
            p_lost: T::zero(),
            p_violation_amp: p_alice,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Half-angle route: `R(n) = (1 + cos(pi / n)) / 2`.
    fn reflectivity_oracle(n: usize) -> f64 {
        (1.0 + (std::f64::consts::PI / n as f64).cos()) / 2.0
    }

    /// Closed-form leakage of the dephased chain, first principles:
    /// a stage-k phase error `delta` leaks
    /// `4 sin^2(delta/2) [sin((n-k) theta) sin(k theta)]^2` because the
    /// bar and cross products are equal at the interference null.
    fn incoherent_leak_oracle(n: usize, v: f64) -> f64 {
        let theta = std::f64::consts::FRAC_PI_2 / n as f64;
        (1..n)
            .map(|k| {
                let weight = ((n - k) as f64 * theta).sin() * (k as f64 * theta).sin();
                2.0 * (1.0 - v) * weight * weight
            })
            .sum()
    }

    #[test]
    fn reflectivity_matches_half_angle_identity() {
        for n in 2..=6 {
            let r: f64 = chain_reflectivity(n).unwrap();
            assert!((r - reflectivity_oracle(n)).abs() < 1e-14, "n = {n}");
        }
        assert!((chain_reflectivity::<f64>(2).unwrap() - 0.5).abs() < 1e-14);
        let quoted4 = (2.0 + 2.0f64.sqrt()) / 4.0;
        assert!((chain_reflectivity::<f64>(4).unwrap() - quoted4).abs() < 1e-14);
        let quoted6 = (2.0 + 3.0f64.sqrt()) / 4.0;
        assert!((chain_reflectivity::<f64>(6).unwrap() - quoted6).abs() < 1e-14);
    }

    #[test]
    fn too_short_chains_are_rejected() {
        assert!(matches!(
            chain_reflectivity::<f64>(1),
            Err(ZenoError::TooFewBeamsplitters(1))
        ));
        assert!(ideal_p1_error::<f64>(0).is_err());
        assert!(ProtocolSpec::<f64>::ideal(1, false).is_err());
    }

    #[test]
    fn logic1_error_values() {
        assert!((ideal_p1_error::<f64>(2).unwrap() - 0.75).abs() < 1e-14);
        let oracle6 = 1.0 - reflectivity_oracle(6).powi(6);
        let got6: f64 = ideal_p1_error(6).unwrap();
        assert!((got6 - oracle6).abs() < 1e-12);
        assert!((got6 - 0.34033).abs() < 5e-6);
        // Zeno limit: the error vanishes as the chain grows.
        let big: f64 = ideal_p1_error(1000).unwrap();
        assert!(big < 0.0025, "p1_err(1000) = {big}");
    }

    #[test]
    fn spec_validation_rejects_bad_noise() {
        assert!(matches!(
            ProtocolSpec::noisy(4, true, 1.2, 0.0),
            Err(ZenoError::InvalidVisibility(_))
        ));
        assert!(matches!(
            ProtocolSpec::noisy(4, true, 0.99, -0.5),
            Err(ZenoError::InvalidBackscatter(_))
        ));
        let mut spec = ProtocolSpec::ideal(4, true).unwrap();
        spec.visibility = 0.9;
        assert!(matches!(
            spec.validate(),
            Err(ZenoError::IdealWithNoise(_, _))
        ));
    }

    #[test]
    fn bit0_circuit_concentrates_in_bobs_port() {
        for n in 2..=6 {
            let spec = ProtocolSpec::<f64>::ideal(n, false).unwrap();
            let protocol = build_circuit(&spec).unwrap();
            assert!(protocol.collapse.is_empty());
            let out = mesh::propagate(&protocol.circuit, &ModeState::basis(3, ALICE_MODE)).unwrap();
            assert!(out.probability(ALICE_MODE) < 1e-20, "n = {n}");
            assert!((out.probability(BOB_MODE) - 1.0).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn bit1_collapse_reproduces_the_power_law() {
        for n in 2..=6 {
            let spec = ProtocolSpec::<f64>::ideal(n, true).unwrap();
            let outcome = run_photon(&spec).unwrap();
            let expect = reflectivity_oracle(n).powi(n as i32);
            assert!((outcome.p_alice - expect).abs() < 1e-10, "n = {n}");
            assert!(outcome.p_bob.abs() < 1e-20, "n = {n}");
            assert!((outcome.p_alice + outcome.p_bob + outcome.p_lost - 1.0).abs() < 1e-10);
            assert_eq!(outcome.p_violation_amp, 0.0);
        }
        let two = run_photon(&ProtocolSpec::<f64>::ideal(2, true).unwrap()).unwrap();
        assert!((two.p_alice - 0.25).abs() < 1e-12);
        let six = run_photon(&ProtocolSpec::<f64>::ideal(6, true).unwrap()).unwrap();
        assert!((six.p_alice - 0.65967).abs() < 5e-6);
    }

    #[test]
    fn ideal_bit0_outcome_is_noise_free() {
        let out = run_photon(&ProtocolSpec::<f64>::ideal(6, false).unwrap()).unwrap();
        assert!(out.p_alice < 1e-20);
        assert!((out.p_bob - 1.0).abs() < 1e-12);
        assert_eq!(out.p_lost, 0.0);
    }

    #[test]
    fn backscatter_sums_squared_reentry_amplitudes() {
        // Oracle: one-reflection paths entering Bob's node k carry
        // amplitude i sin(theta) cos(theta)^{k-1}; quadrature sum over k
        // is a geometric series equal to eps * (1 - R^n).
        let n = 6;
        let eps = 0.01;
        let theta = std::f64::consts::FRAC_PI_2 / n as f64;
        let oracle: f64 = (1..=n)
            .map(|k| {
                let amp = theta.sin() * theta.cos().powi(k as i32 - 1);
                eps * amp * amp
            })
            .sum();

        let spec = ProtocolSpec::noisy(n, true, 1.0, eps).unwrap();
        let out = run_photon(&spec).unwrap();
        assert!((out.p_violation_amp - oracle).abs() < 1e-14);
        assert!(out.p_violation_amp <= n as f64 * eps);
        // Alice's statistics are untouched by the counter-propagating wave.
        let r6 = reflectivity_oracle(6).powi(6);
        assert!((out.p_alice - r6).abs() < 1e-10);
        assert!((out.p_alice + out.p_bob + out.p_lost - 1.0).abs() < 1e-10);
    }

    #[test]
    fn backscatter_bound_holds_across_eps() {
        for n in [2usize, 4, 6] {
            for eps in [0.001, 0.01, 0.05] {
                let spec = ProtocolSpec::noisy(n, true, 1.0, eps).unwrap();
                let out = run_photon(&spec).unwrap();
                let bound = n as f64 * eps * (1.0 + 10.0 * eps);
                assert!(
                    out.p_violation_amp <= bound,
                    "n = {n}, eps = {eps}: {} > {bound}",
                    out.p_violation_amp
                );
            }
        }
    }

    #[test]
    fn survival_grows_monotonically_with_chain_length() {
        let mut previous = 0.0f64;
        for n in 2..=1000 {
            let survival = 1.0 - ideal_p1_error::<f64>(n).unwrap();
            assert!(survival > previous, "n = {n}");
            previous = survival;
        }
    }

    #[test]
    fn single_mzi_dephasing_equals_the_dark_port_floor() {
        // For n = 2 the chain is one MZI, whose logic-0 leakage must be
        // exactly (1 - v) / 2 by the definition of visibility.
        for v in [0.9994f64, 0.999, 0.99, 0.9] {
            let leak = p0_error_from_visibility(2, v).unwrap();
            assert!((leak - (1.0 - v) / 2.0).abs() < 1e-15, "v = {v}");
        }
    }

    #[test]
    fn dephased_chain_matches_propagation_oracle() {
        for n in 2..=8 {
            for v in [0.9994f64, 0.995, 0.95] {
                let got = p0_error_from_visibility(n, v).unwrap();
                let oracle = incoherent_leak_oracle(n, v);
                assert!(
                    (got - oracle).abs() < 1e-12 * (1.0 + oracle),
                    "n = {n}, v = {v}: {got} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn perfect_visibility_leaks_nothing() {
        for n in 2..=6 {
            let leak: f64 = p0_error_from_visibility(n, 1.0).unwrap();
            assert!(leak < 1e-20, "n = {n}: {leak}");
        }
    }

    #[test]
    fn lower_visibility_leaks_more() {
        for n in 2..=6 {
            let worse: f64 = p0_error_from_visibility(n, 0.99).unwrap();
            let better: f64 = p0_error_from_visibility(n, 0.999).unwrap();
            assert!(worse > better, "n = {n}");
        }
    }

    #[test]
    fn visibility_domain_is_enforced() {
        assert!(matches!(
            p0_error_from_visibility::<f64>(4, 0.5),
            Err(ZenoError::VisibilityTooLow(_))
        ));
        assert!(matches!(
            p0_error_from_visibility::<f64>(4, 0.3),
            Err(ZenoError::VisibilityTooLow(_))
        ));
        assert!(p0_error_from_visibility::<f64>(4, 1.0 + 1e-9).is_err());
    }

    #[test]
    fn accumulation_modes_are_ordered() {
        let n = 6;
        let v = 0.9994;
        let incoherent: f64 =
            p0_error_from_visibility_mode(n, v, VisibilityMode::IncoherentStages).unwrap();
        let aligned: f64 =
            p0_error_from_visibility_mode(n, v, VisibilityMode::WorstCaseAligned).unwrap();
        assert!(aligned > incoherent);
        // A sampled draw is reproducible and bounded by the aligned case
        // (up to the first-order envelope).
        let a: f64 =
            p0_error_from_visibility_mode(n, v, VisibilityMode::RandomPhase { seed: 11 }).unwrap();
        let b: f64 =
            p0_error_from_visibility_mode(n, v, VisibilityMode::RandomPhase { seed: 11 }).unwrap();
        assert_eq!(a, b);
        assert!(a <= aligned * 1.01);
    }

    #[test]
    fn noisy_bit0_outcome_uses_the_dephasing_model() {
        let spec = ProtocolSpec::noisy(6, false, 0.9994, 0.01).unwrap();
        let out = run_photon(&spec).unwrap();
        let expect = incoherent_leak_oracle(6, 0.9994);
        assert!((out.p_alice - expect).abs() < 1e-12);
        assert_eq!(out.p_violation_amp, out.p_alice);
        assert!((out.p_alice + out.p_bob + out.p_lost - 1.0).abs() < 1e-10);
    }

    #[test]
    fn outcome_closure_over_a_parameter_sweep() {
        for n in 2..=8 {
            for &bit in &[false, true] {
                for &(v, eps) in &[(1.0, 0.0), (0.9994, 0.01), (0.99, 0.05)] {
                    let spec = if v == 1.0 && eps == 0.0 {
                        ProtocolSpec::<f64>::ideal(n, bit).unwrap()
                    } else {
                        ProtocolSpec::noisy(n, bit, v, eps).unwrap()
                    };
                    let out = run_photon(&spec).unwrap();
                    for p in [out.p_alice, out.p_bob, out.p_lost] {
                        assert!((0.0..=1.0 + 1e-12).contains(&p));
                    }
                    assert!(
                        (out.p_alice + out.p_bob + out.p_lost - 1.0).abs() < 1e-10,
                        "n = {n}, bit = {bit}, v = {v}, eps = {eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn compiled_circuit_shape() {
        let spec = ProtocolSpec::<f64>::ideal(4, true).unwrap();
        let protocol = build_circuit(&spec).unwrap();
        assert_eq!(protocol.circuit.num_columns(), 8);
        assert_eq!(protocol.collapse.len(), 4);
        for event in &protocol.collapse {
            assert_eq!(event.mode, EXIT_MODE);
            assert_eq!(event.after_column % 2, 1);
        }
    }
}
