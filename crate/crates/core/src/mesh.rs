//! Pure linear-optics core: complex amplitudes, two-mode MZI transfer
//! matrices, planar mesh layout and coherent single-photon propagation.
//!
//! A mesh is a sequence of columns; nodes within a column act on disjoint
//! neighbouring mode pairs and therefore commute. Light traverses the
//! columns in order. Every operation here is a pure function of immutable
//! inputs and is safe to call concurrently.
//!
//! Conventions: a node with mixing angle `theta` and external phase `phi`
//! implements `U(theta, phi) = diag(e^{i phi}, 1) * exp(i theta X)`, i.e.
//! bar amplitude `cos(theta)`, cross amplitude `i sin(theta)`, so the bar
//! (reflection) probability is exactly `cos^2(theta)`.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Scalar;

/// Complex amplitude of one waveguide mode.
pub type Amplitude<T> = Complex<T>;

/// Row-major 2x2 transfer matrix of a single node.
pub type NodeUnitary<T> = [[Amplitude<T>; 2]; 2];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeshError {
    #[error("mixing angle {0} is outside [0, pi/2]")]
    AngleOutOfRange(String),
    #[error("node acts on modes ({0}, {1}) but the mesh has {2} modes")]
    ModeOutOfRange(usize, usize, usize),
    #[error("column {0} has two nodes acting on mode {1}")]
    OverlappingNodes(usize, usize),
    #[error("state has {got} modes but the circuit expects {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("non-finite amplitude in mode {0}")]
    NonFiniteAmplitude(usize),
    #[error("a mesh needs at least two modes, got {0}")]
    TooFewModes(usize),
}

fn angle_error<T: Scalar>(theta: T) -> MeshError {
    MeshError::AngleOutOfRange(format!("{}", theta.to_f64().unwrap_or(f64::NAN)))
}

/// Operating point of a mesh node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    /// Bar state, reflectivity 1.
    Mirror,
    /// Cross state, reflectivity 0.
    Swap,
    /// Partial reflector, `theta = pi / (2 n)` for a chain of `n`.
    Beamsplitter,
    /// Anything else.
    Custom,
}

/// One tunable MZI acting on modes `(upper_mode, upper_mode + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziNode<T> {
    /// Column index inside the owning circuit; assigned on insertion.
    pub column: usize,
    pub upper_mode: usize,
    /// Mixing angle in `[0, pi/2]`; bar probability is `cos^2`.
    pub mixing_angle: T,
    /// External phase on the upper input, in `[0, 2 pi)`.
    pub phase: T,
    pub role: NodeRole,
}

impl<T: Scalar> MziNode<T> {
    pub fn mirror(upper_mode: usize) -> Self {
        Self {
            column: 0,
            upper_mode,
            mixing_angle: T::zero(),
            phase: T::zero(),
            role: NodeRole::Mirror,
        }
    }

    pub fn swap(upper_mode: usize) -> Self {
        Self {
            column: 0,
            upper_mode,
            mixing_angle: T::FRAC_PI_2(),
            phase: T::zero(),
            role: NodeRole::Swap,
        }
    }

    /// Beamsplitter for an `n`-stage chain: `theta = pi / (2 n)`.
    pub fn beamsplitter(upper_mode: usize, n: usize) -> Self {
        assert!(n >= 1, "beamsplitter chain length must be at least 1");
        Self {
            column: 0,
            upper_mode,
            mixing_angle: T::FRAC_PI_2() / crate::scalar::count(n),
            phase: T::zero(),
            role: NodeRole::Beamsplitter,
        }
    }

    pub fn custom(upper_mode: usize, mixing_angle: T, phase: T) -> Result<Self, MeshError> {
        if !(mixing_angle >= T::zero() && mixing_angle <= T::FRAC_PI_2()) {
            return Err(angle_error(mixing_angle));
        }
        Ok(Self {
            column: 0,
            upper_mode,
            mixing_angle,
            phase: wrap_phase(phase),
            role: NodeRole::Custom,
        })
    }

    /// Same node with a different external phase.
    pub fn with_phase(mut self, phase: T) -> Self {
        self.phase = wrap_phase(phase);
        self
    }

    /// The pair of modes the node couples.
    pub fn modes(&self) -> (usize, usize) {
        (self.upper_mode, self.upper_mode + 1)
    }
}

/// Wrap an angle into `[0, 2 pi)`.
fn wrap_phase<T: Scalar>(phi: T) -> T {
    let tau = T::TAU();
    let r = phi - tau * (phi / tau).floor();
    if r == tau {
        T::zero()
    } else {
        r
    }
}

/// 2x2 transfer matrix of a node.
pub fn node_unitary<T: Scalar>(node: &MziNode<T>) -> Result<NodeUnitary<T>, MeshError> {
    let theta = node.mixing_angle;
    if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
        return Err(angle_error(theta));
    }
    let (s, c) = theta.sin_cos();
    let ph = Complex::from_polar(T::one(), node.phase);
    let i = Complex::new(T::zero(), T::one());
    Ok([[ph * c, ph * i * s], [i * s, Complex::new(c, T::zero())]])
}

/// Single-photon state: one complex amplitude per waveguide mode.
///
/// The squared norm is the survival probability; it stays within
/// `[0, 1 + eps]` and drops below one only after collapse or loss events.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<T> {
    amplitudes: Vec<Amplitude<T>>,
}

impl<T: Scalar> ModeState<T> {
    pub fn new(amplitudes: Vec<Amplitude<T>>) -> Self {
        Self { amplitudes }
    }

    /// Unit amplitude in `mode`, zero elsewhere.
    pub fn basis(num_modes: usize, mode: usize) -> Self {
        assert!(mode < num_modes, "basis mode out of range");
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); num_modes];
        amplitudes[mode] = Complex::new(T::one(), T::zero());
        Self { amplitudes }
    }

    pub fn num_modes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude<T>] {
        &self.amplitudes
    }

    pub fn amplitude(&self, mode: usize) -> Amplitude<T> {
        self.amplitudes[mode]
    }

    /// Occupation probability of one mode.
    pub fn probability(&self, mode: usize) -> T {
        self.amplitudes[mode].norm_sqr()
    }

    /// Total survival probability.
    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Remove the amplitude in `mode` and return its squared magnitude.
    pub fn project_out(&mut self, mode: usize) -> T {
        let p = self.probability(mode);
        self.amplitudes[mode] = Complex::new(T::zero(), T::zero());
        p
    }

    pub fn validate_finite(&self) -> Result<(), MeshError> {
        for (m, a) in self.amplitudes.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(MeshError::NonFiniteAmplitude(m));
            }
        }
        Ok(())
    }
}

/// Planar mesh: columns of MZI nodes over `num_modes` waveguides.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshCircuit<T> {
    num_modes: usize,
    columns: Vec<Vec<MziNode<T>>>,
}

impl<T: Scalar> MeshCircuit<T> {
    pub fn new(num_modes: usize) -> Result<Self, MeshError> {
        if num_modes < 2 {
            return Err(MeshError::TooFewModes(num_modes));
        }
        Ok(Self {
            num_modes,
            columns: Vec::new(),
        })
    }

    /// Append a column. Nodes must couple disjoint in-range mode pairs;
    /// their `column` field is set to the new index.
    pub fn push_column(&mut self, mut nodes: Vec<MziNode<T>>) -> Result<(), MeshError> {
        let column = self.columns.len();
        let mut used = vec![false; self.num_modes];
        for node in &mut nodes {
            node.column = column;
            let (a, b) = node.modes();
            if b >= self.num_modes {
                return Err(MeshError::ModeOutOfRange(a, b, self.num_modes));
            }
            for m in [a, b] {
                if used[m] {
                    return Err(MeshError::OverlappingNodes(column, m));
                }
                used[m] = true;
            }
        }
        self.columns.push(nodes);
        Ok(())
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<MziNode<T>>] {
        &self.columns
    }
}

/// Apply one column of nodes to a state in place.
pub fn apply_column<T: Scalar>(
    nodes: &[MziNode<T>],
    state: &mut ModeState<T>,
) -> Result<(), MeshError> {
    for node in nodes {
        let (a, b) = node.modes();
        if b >= state.num_modes() {
            return Err(MeshError::ModeOutOfRange(a, b, state.num_modes()));
        }
        let u = node_unitary(node)?;
        let (x, y) = (state.amplitudes[a], state.amplitudes[b]);
        state.amplitudes[a] = u[0][0] * x + u[0][1] * y;
        state.amplitudes[b] = u[1][0] * x + u[1][1] * y;
    }
    Ok(())
}

/// Propagate a state through the whole circuit, column by column.
pub fn propagate<T: Scalar>(
    circuit: &MeshCircuit<T>,
    input: &ModeState<T>,
) -> Result<ModeState<T>, MeshError> {
    if input.num_modes() != circuit.num_modes() {
        return Err(MeshError::DimensionMismatch {
            got: input.num_modes(),
            want: circuit.num_modes(),
        });
    }
    let mut state = input.clone();
    for column in circuit.columns() {
        apply_column(column, &mut state)?;
    }
    state.validate_finite()?;
    Ok(state)
}

/// Full transfer matrix of the circuit, `u[i][j] = <i|U|j>`.
///
/// Verification aid: propagating any vector must agree with applying
/// this matrix.
pub fn total_unitary<T: Scalar>(
    circuit: &MeshCircuit<T>,
) -> Result<Vec<Vec<Amplitude<T>>>, MeshError> {
    let w = circuit.num_modes();
    let zero = Complex::new(T::zero(), T::zero());
    let mut u = vec![vec![zero; w]; w];
    for j in 0..w {
        let out = propagate(circuit, &ModeState::basis(w, j))?;
        for (i, row) in u.iter_mut().enumerate() {
            row[j] = out.amplitude(i);
        }
    }
    Ok(u)
}
