//! Exact small-N open-system engine for emitters sharing one guided mode.
//!
//! States live in the 2^N tensor-product space |q₁ q₂ …⟩ with q ∈ {g, e},
//! emitter 1 leftmost (most significant bit) and |g⟩ ↦ 0, |e⟩ ↦ 1, so the
//! all-ground state is basis index 0. The collective waveguide channel
//! carries one jump operator
//!
//! ```text
//! a = Σ_i √γ_wg,i · e^{i k x_i} · σ⁻_i
//! ```
//!
//! whose interference between emitters produces the bright/dark splitting:
//! for two emitters the single-excitation sector splits into a state that
//! radiates at twice the single-emitter waveguide rate and one that does not
//! radiate at all. Non-guided decay (rate γ − γ_wg per emitter), pure
//! dephasing (σ_z at rate 1/(2T₂), so coherences decay at 1/T₂) and optional
//! incoherent repumping (σ⁺ at rate r) complete the generator.
//!
//! Integration is fixed-step RK4 with dt = 0.005/max-rate by default;
//! reproducibility is preferred over speed at these dimensions.
//!
//! [`two_time_g2_oracle`] computes the normalized two-time correlation of
//! the waveguide output numerically via the quantum regression theorem and
//! serves as the brute-force reference for the closed forms in
//! [`crate::analytic`].

use ndarray::linalg::{general_mat_mul, kron};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::analytic::{G2Curve, G2Form};
use crate::linalg::{dagger, hermitian_eigenvalues, trace};
pub use crate::linalg::{CMatrix, CVector};
use crate::units::TwoEmitterSystem;

/// Hard cap on emitter number (2^N state dimension).
pub const MAX_EMITTERS: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum DickeError {
    #[error("at most {MAX_EMITTERS} emitters supported, got {0}")]
    TooManyEmitters(usize),
    #[error("need at least one emitter")]
    NoEmitters,
    #[error("channel rate must be nonnegative, got {0}")]
    NegativeRate(f64),
    #[error("integration step {dt} ns exceeds 0.01/max-rate = {limit} ns")]
    StepSizeViolation { dt: f64, limit: f64 },
    #[error("evolution time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("delay grid must be sorted, nonnegative and nonempty")]
    BadDelayGrid,
    #[error("matrix is not a valid density matrix: {0}")]
    InvalidState(String),
    #[error("steady-state intensity vanished; enable repumping")]
    ZeroIntensity,
}

/* Operators ******************************************************************/

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// 2×2 lowering operator |g⟩⟨e|.
pub fn sigma_minus() -> CMatrix {
    let mut m = CMatrix::zeros((2, 2));
    m[[0, 1]] = c(1.0);
    m
}

/// 2×2 raising operator |e⟩⟨g|.
pub fn sigma_plus() -> CMatrix {
    let mut m = CMatrix::zeros((2, 2));
    m[[1, 0]] = c(1.0);
    m
}

/// 2×2 σ_z with |e⟩ eigenvalue +1.
pub fn sigma_z() -> CMatrix {
    let mut m = CMatrix::zeros((2, 2));
    m[[0, 0]] = c(-1.0);
    m[[1, 1]] = c(1.0);
    m
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::eye(dim)
}

/// Embed a single-emitter operator on emitter `which` (0-based, leftmost
/// first) into the N-emitter product space.
pub fn embed(op: &CMatrix, n_emitters: usize, which: usize) -> CMatrix {
    assert!(which < n_emitters);
    let mut out = identity(1 << which);
    out = kron(&out, op);
    let right = n_emitters - which - 1;
    if right > 0 {
        out = kron(&out, &identity(1 << right));
    }
    out
}

/// Collective waveguide jump operator `Σ_i √γ_wg,i e^{iθ_i} σ⁻_i` for
/// per-emitter couplings `(γ_wg,i, θ_i = k·x_i)`.
pub fn collective_jump_general(couplings: &[(f64, f64)]) -> Result<CMatrix, DickeError> {
    let n = couplings.len();
    if n == 0 {
        return Err(DickeError::NoEmitters);
    }
    if n > MAX_EMITTERS {
        return Err(DickeError::TooManyEmitters(n));
    }
    let dim = 1 << n;
    let mut a = CMatrix::zeros((dim, dim));
    let sm = sigma_minus();
    for (i, &(gamma_wg, theta)) in couplings.iter().enumerate() {
        if gamma_wg < 0.0 {
            return Err(DickeError::NegativeRate(gamma_wg));
        }
        let weight = C64::from_polar(gamma_wg.sqrt(), theta);
        a = a + embed(&sm, n, i).mapv(|z| z * weight);
    }
    Ok(a)
}

/// Collective jump operator for a two-emitter system.
pub fn collective_jump(system: &TwoEmitterSystem) -> CMatrix {
    collective_jump_general(&[
        (system.emitter_a.gamma_wg, system.k * system.emitter_a.position),
        (system.emitter_b.gamma_wg, system.k * system.emitter_b.position),
    ])
    .expect("two validated emitters")
}

/* Density matrices ***********************************************************/

/// Validated density matrix over the emitter product space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Wrap a matrix, checking squareness, power-of-two dimension,
    /// hermiticity (1e-12) and unit trace (1e-9).
    pub fn from_matrix(mat: CMatrix) -> Result<Self, DickeError> {
        let dm = Self { mat };
        dm.validate()?;
        Ok(dm)
    }

    /// Projector |ψ⟩⟨ψ| onto a (normalized) pure state.
    pub fn pure(state: &CVector) -> Result<Self, DickeError> {
        let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(DickeError::InvalidState("zero state vector".into()));
        }
        let dim = state.len();
        let mut mat = CMatrix::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                mat[[i, j]] = state[i] * state[j].conj() / norm;
            }
        }
        Self::from_matrix(mat)
    }

    /// All emitters in the ground state.
    pub fn ground(n_emitters: usize) -> Self {
        let dim = 1 << n_emitters;
        let mut mat = CMatrix::zeros((dim, dim));
        mat[[0, 0]] = c(1.0);
        Self { mat }
    }

    /// All emitters excited.
    pub fn all_excited(n_emitters: usize) -> Self {
        let dim = 1 << n_emitters;
        let mut mat = CMatrix::zeros((dim, dim));
        mat[[dim - 1, dim - 1]] = c(1.0);
        Self { mat }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    /// Population of one basis state.
    pub fn population(&self, index: usize) -> f64 {
        self.mat[[index, index]].re
    }

    /// Probability of at least one excitation, 1 − ⟨g…g|ρ|g…g⟩.
    pub fn excited_population(&self) -> f64 {
        1.0 - self.population(0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *hermitian_eigenvalues(&self.mat)
            .last()
            .expect("nonempty spectrum")
    }

    pub fn validate(&self) -> Result<(), DickeError> {
        let (r, cdim) = (self.mat.nrows(), self.mat.ncols());
        if r != cdim || !r.is_power_of_two() {
            return Err(DickeError::InvalidState(format!("bad dimensions {r}×{cdim}")));
        }
        let tr = trace(&self.mat);
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(DickeError::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let herm_dev = (&self.mat - &dagger(&self.mat))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm_dev > 1e-12 {
            return Err(DickeError::InvalidState(format!(
                "hermiticity deviation {herm_dev:.2e}"
            )));
        }
        if self.min_eigenvalue() < -1e-9 {
            return Err(DickeError::InvalidState(format!(
                "negative eigenvalue {:.2e}",
                self.min_eigenvalue()
            )));
        }
        Ok(())
    }
}

/* Lindblad generator *********************************************************/

/// Which dissipation channels to include when building a generator from a
/// two-emitter system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSet {
    /// Collective waveguide decay through the shared jump operator.
    pub waveguide_collective: bool,
    /// Per-emitter decay into non-guided modes at rate γ − γ_wg.
    pub nonguided_individual: bool,
    /// Per-emitter pure dephasing, σ_z at rate 1/(2T₂).
    pub dephasing: bool,
    /// Per-emitter incoherent repump rate (1/ns); 0 disables the channel.
    pub repump_rate: f64,
}

impl ChannelSet {
    pub fn none() -> Self {
        Self {
            waveguide_collective: false,
            nonguided_individual: false,
            dephasing: false,
            repump_rate: 0.0,
        }
    }

    pub fn decay_only() -> Self {
        Self {
            waveguide_collective: true,
            nonguided_individual: true,
            dephasing: true,
            repump_rate: 0.0,
        }
    }

    pub fn waveguide_only() -> Self {
        Self {
            waveguide_collective: true,
            nonguided_individual: false,
            dephasing: false,
            repump_rate: 0.0,
        }
    }

    pub fn with_repump(rate: f64) -> Self {
        Self { repump_rate: rate, ..Self::decay_only() }
    }
}

/// Lindblad generator L(ρ) = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ}).
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    /// G = −iH − ½ Σ L†L; the full drift term is Gρ + ρG†.
    drift: CMatrix,
    drift_dag: CMatrix,
    jumps: Vec<CMatrix>,
    jump_daggers: Vec<CMatrix>,
    max_rate: f64,
}

impl LindbladGenerator {
    /// Build from an explicit Hamiltonian and jump operators (rates folded
    /// into the operators). `rate_scale` should bound the fastest rate or
    /// frequency in the generator; it controls the default step size.
    pub fn new(hamiltonian: CMatrix, jumps: Vec<CMatrix>, rate_scale: f64) -> Self {
        let dim = hamiltonian.nrows();
        let minus_i = C64::new(0.0, -1.0);
        let mut drift = hamiltonian.mapv(|z| z * minus_i);
        for l in &jumps {
            let ldl = dagger(l).dot(l);
            drift = drift - ldl.mapv(|z| z * 0.5);
        }
        let drift_dag = dagger(&drift);
        let jump_daggers = jumps.iter().map(dagger).collect();
        Self { dim, drift, drift_dag, jumps, jump_daggers, max_rate: rate_scale.max(1e-12) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fastest rate/frequency scale in the generator (1/ns).
    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    /// Default integration step, 0.005/max-rate.
    pub fn default_dt(&self) -> f64 {
        0.005 / self.max_rate
    }

    /// Largest admissible step, 0.01/max-rate.
    pub fn max_dt(&self) -> f64 {
        0.01 / self.max_rate
    }

    /// Apply the generator to an arbitrary (not necessarily Hermitian)
    /// matrix; used both for density-matrix evolution and for quantum
    /// regression of two-time correlations.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros((self.dim, self.dim));
        let mut tmp = CMatrix::zeros((self.dim, self.dim));
        self.apply_into(rho, &mut out, &mut tmp);
        out
    }

    fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix, tmp: &mut CMatrix) {
        let one = c(1.0);
        let zero = c(0.0);
        // out = G ρ + ρ G†
        general_mat_mul(one, &self.drift, rho, zero, out);
        general_mat_mul(one, rho, &self.drift_dag, one, out);
        // out += Σ L ρ L†
        for (l, ld) in self.jumps.iter().zip(&self.jump_daggers) {
            general_mat_mul(one, l, rho, zero, tmp);
            general_mat_mul(one, tmp, ld, one, out);
        }
    }
}

/// Generator with each emitter damped independently at its full rate γ, no
/// cross-emitter dissipative coupling.
///
/// This is the dissipation model behind the closed-form correlation
/// functions: the emitters radiate independently and the guided field
/// enters only as the measured output operator. Contrast with
/// [`lindblad_generator`] with the collective channel enabled, where the
/// shared waveguide mode also mediates collective decay (bright/dark
/// physics) — that generator drives the superradiant decay dynamics, while
/// this one backs the stationary-correlation oracle.
pub fn independent_decay_generator(
    system: &TwoEmitterSystem,
    repump_rate: f64,
) -> Result<LindbladGenerator, DickeError> {
    if repump_rate < 0.0 {
        return Err(DickeError::NegativeRate(repump_rate));
    }
    let n = 2;
    let emitters = [system.emitter_a, system.emitter_b];
    let dim = 1 << n;
    let mut h = CMatrix::zeros((dim, dim));
    let number = sigma_plus().dot(&sigma_minus());
    let mut jumps = Vec::new();
    for (i, em) in emitters.iter().enumerate() {
        h = h + embed(&number, n, i).mapv(|z| z * em.detuning);
        jumps.push(embed(&sigma_minus(), n, i).mapv(|z| z * em.gamma.sqrt()));
        let kappa = em.dephasing_rate() / 2.0;
        if kappa > 0.0 {
            jumps.push(embed(&sigma_z(), n, i).mapv(|z| z * kappa.sqrt()));
        }
        if repump_rate > 0.0 {
            jumps.push(embed(&sigma_plus(), n, i).mapv(|z| z * repump_rate.sqrt()));
        }
    }
    let mut rate_scale = repump_rate;
    for em in &emitters {
        rate_scale = rate_scale
            .max(em.gamma)
            .max(em.detuning.abs())
            .max(em.dephasing_rate());
    }
    Ok(LindbladGenerator::new(h, jumps, rate_scale))
}

/// Build the generator for a two-emitter system with the given channels.
pub fn lindblad_generator(
    system: &TwoEmitterSystem,
    channels: &ChannelSet,
) -> Result<LindbladGenerator, DickeError> {
    if channels.repump_rate < 0.0 {
        return Err(DickeError::NegativeRate(channels.repump_rate));
    }
    let n = 2;
    let emitters = [system.emitter_a, system.emitter_b];

    let dim = 1 << n;
    let mut h = CMatrix::zeros((dim, dim));
    let number = sigma_plus().dot(&sigma_minus());
    for (i, em) in emitters.iter().enumerate() {
        h = h + embed(&number, n, i).mapv(|z| z * em.detuning);
    }

    let mut jumps = Vec::new();
    if channels.waveguide_collective {
        jumps.push(collective_jump(system));
    }
    if channels.nonguided_individual {
        for (i, em) in emitters.iter().enumerate() {
            let rate = em.gamma_nonguided();
            if rate > 0.0 {
                jumps.push(embed(&sigma_minus(), n, i).mapv(|z| z * rate.sqrt()));
            }
        }
    }
    if channels.dephasing {
        for (i, em) in emitters.iter().enumerate() {
            let rate = em.dephasing_rate() / 2.0;
            if rate > 0.0 {
                jumps.push(embed(&sigma_z(), n, i).mapv(|z| z * rate.sqrt()));
            }
        }
    }
    if channels.repump_rate > 0.0 {
        for i in 0..n {
            jumps.push(embed(&sigma_plus(), n, i).mapv(|z| z * channels.repump_rate.sqrt()));
        }
    }

    let mut rate_scale = channels.repump_rate;
    for em in &emitters {
        rate_scale = rate_scale
            .max(em.gamma)
            .max(em.detuning.abs())
            .max(em.dephasing_rate());
    }
    Ok(LindbladGenerator::new(h, jumps, rate_scale))
}

/* Time evolution *************************************************************/

struct Rk4 {
    k1: CMatrix,
    k2: CMatrix,
    k3: CMatrix,
    k4: CMatrix,
    stage: CMatrix,
    tmp: CMatrix,
}

impl Rk4 {
    fn new(dim: usize) -> Self {
        let z = || CMatrix::zeros((dim, dim));
        Self { k1: z(), k2: z(), k3: z(), k4: z(), stage: z(), tmp: z() }
    }

    fn step(&mut self, gen: &LindbladGenerator, rho: &mut CMatrix, dt: f64) {
        gen.apply_into(rho, &mut self.k1, &mut self.tmp);
        self.stage.assign(rho);
        self.stage.scaled_add(c(dt / 2.0), &self.k1);
        gen.apply_into(&self.stage, &mut self.k2, &mut self.tmp);
        self.stage.assign(rho);
        self.stage.scaled_add(c(dt / 2.0), &self.k2);
        gen.apply_into(&self.stage, &mut self.k3, &mut self.tmp);
        self.stage.assign(rho);
        self.stage.scaled_add(c(dt), &self.k3);
        gen.apply_into(&self.stage, &mut self.k4, &mut self.tmp);

        rho.scaled_add(c(dt / 6.0), &self.k1);
        rho.scaled_add(c(dt / 3.0), &self.k2);
        rho.scaled_add(c(dt / 3.0), &self.k3);
        rho.scaled_add(c(dt / 6.0), &self.k4);
    }
}

fn march(gen: &LindbladGenerator, rho: &mut CMatrix, rk: &mut Rk4, span: f64, dt: f64) {
    if span <= 0.0 {
        return;
    }
    let n_steps = (span / dt).ceil().max(1.0) as usize;
    let h = span / n_steps as f64;
    for _ in 0..n_steps {
        rk.step(gen, rho, h);
    }
}

fn check_dt(gen: &LindbladGenerator, dt: f64) -> Result<(), DickeError> {
    if !(dt > 0.0) || dt > gen.max_dt() {
        return Err(DickeError::StepSizeViolation { dt, limit: gen.max_dt() });
    }
    Ok(())
}

/// Evolve a density matrix for time `t` with fixed-step RK4.
pub fn evolve(
    rho0: &DensityMatrix,
    gen: &LindbladGenerator,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix, DickeError> {
    if t < 0.0 {
        return Err(DickeError::NegativeTime(t));
    }
    check_dt(gen, dt)?;
    let mut rho = rho0.matrix().clone();
    let mut rk = Rk4::new(gen.dim());
    march(gen, &mut rho, &mut rk, t, dt);
    DensityMatrix::from_matrix(rho)
}

/// Evolve and hand the state to `observer` at each requested time.
/// `times` must be sorted ascending and nonnegative.
pub fn evolve_observed(
    rho0: &DensityMatrix,
    gen: &LindbladGenerator,
    times: &[f64],
    dt: f64,
    mut observer: impl FnMut(f64, &CMatrix),
) -> Result<(), DickeError> {
    if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(DickeError::BadDelayGrid);
    }
    check_dt(gen, dt)?;
    let mut rho = rho0.matrix().clone();
    let mut rk = Rk4::new(gen.dim());
    let mut now = 0.0;
    for &t in times {
        march(gen, &mut rho, &mut rk, t - now, dt);
        now = t;
        observer(t, &rho);
    }
    Ok(())
}

/* Dicke states ***************************************************************/

/// Bright/dark single-excitation pair for a propagation phase φ.
#[derive(Debug, Clone, PartialEq)]
pub struct DickePair {
    /// (|eg⟩ + e^{iφ}|ge⟩)/√2.
    pub bright: CVector,
    /// (|eg⟩ − e^{iφ}|ge⟩)/√2.
    pub dark: CVector,
}

/// Construct the bright and dark states for phase φ, as written for the
/// emitted-field superposition.
///
/// Note the pairing with [`collective_jump`]: the state maximally coupled
/// to `a ∝ σ⁻₁ + e^{iφ}σ⁻₂` is the one built with the *conjugate* phase,
/// `bright_dark(−φ).bright ∝ a†|gg⟩`. Use [`matched_pair`] when the pair
/// must diagonalize a specific system's collective decay.
pub fn bright_dark(phi: f64) -> DickePair {
    let amp = 1.0 / 2.0_f64.sqrt();
    let phase = C64::from_polar(amp, phi);
    let mut bright = CVector::zeros(4);
    let mut dark = CVector::zeros(4);
    // |eg⟩ = index 2, |ge⟩ = index 1.
    bright[2] = c(amp);
    bright[1] = phase;
    dark[2] = c(amp);
    dark[1] = -phase;
    DickePair { bright, dark }
}

/// The bright/dark pair that diagonalizes the collective decay of `system`
/// (bright ∝ a†|gg⟩).
pub fn matched_pair(system: &TwoEmitterSystem) -> DickePair {
    bright_dark(-system.phase())
}

/* Collective decay spectrum **************************************************/

/// Collective decay rates of N equally-coupled emitters at phases θ_i = k·x_i:
/// the eigenvalues of M_ij = γ_wg·e^{i(θ_i−θ_j)} (single-excitation sector),
/// sorted descending. Their sum is N·γ_wg by the trace.
pub fn decay_spectrum(phases: &[f64], gamma_wg: f64) -> Result<Vec<f64>, DickeError> {
    let n = phases.len();
    if n == 0 {
        return Err(DickeError::NoEmitters);
    }
    if n > MAX_EMITTERS {
        return Err(DickeError::TooManyEmitters(n));
    }
    if gamma_wg < 0.0 {
        return Err(DickeError::NegativeRate(gamma_wg));
    }
    let mut m = CMatrix::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            m[[i, j]] = C64::from_polar(gamma_wg, phases[i] - phases[j]);
        }
    }
    Ok(hermitian_eigenvalues(&m))
}

/* Two-time correlation oracle ************************************************/

/// Controls for [`two_time_g2_oracle`]. `None` fields fall back to
/// weak-excitation defaults computed from the system.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleOptions {
    /// Incoherent repump rate (1/ns). Default 1e-4·γ_a: weak enough that the
    /// O(r/γ) corrections stay below the 1e-3 comparison tolerance.
    pub repump_rate: Option<f64>,
    /// RK4 step (ns). Default 0.005/max-rate.
    pub dt: Option<f64>,
    /// Settling evolution applied to the constructed steady state (ns).
    /// The product of single-emitter pumped steady states is already
    /// stationary for the independent-decay generator, so the default
    /// 5/min(γ) only guards against construction error.
    pub settle_time: Option<f64>,
}

/// Numerically exact normalized g²(τ) of the waveguide output under weak
/// incoherent repumping, via the quantum regression theorem:
/// the steady state is propagated, the conditional operator a·ρ_ss·a† is
/// evolved under the same generator, and the correlation is read off as
/// tr(a†a · B(τ)) / tr(a†a · ρ_ss)².
///
/// The dissipation is [`independent_decay_generator`] — independently
/// damped emitters whose fields superpose in the measured operator. A fully
/// collective dissipator would trap population in the dark state under
/// stationary pumping and is not the model the closed forms describe.
pub fn two_time_g2_oracle(
    system: &TwoEmitterSystem,
    taus: &[f64],
    opts: &OracleOptions,
) -> Result<G2Curve, DickeError> {
    if taus.is_empty() || taus[0] < 0.0 || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(DickeError::BadDelayGrid);
    }
    let gamma_a = system.emitter_a.gamma;
    let gamma_min = gamma_a.min(system.emitter_b.gamma);
    let repump = opts.repump_rate.unwrap_or(1e-4 * gamma_a);
    if repump <= 0.0 {
        return Err(DickeError::ZeroIntensity);
    }

    let gen = independent_decay_generator(system, repump)?;
    let dt = opts.dt.unwrap_or_else(|| gen.default_dt());
    check_dt(&gen, dt)?;
    let settle = opts.settle_time.unwrap_or(5.0 / gamma_min);

    // Product of single-emitter pumped steady states: exactly stationary
    // under independent decay (diagonal per-emitter balance r·P_g = γ·P_e).
    let mut rho = {
        let single = |em: &crate::units::EmitterParams| {
            let p = repump / (repump + em.gamma);
            let mut m = CMatrix::zeros((2, 2));
            m[[0, 0]] = c(1.0 - p);
            m[[1, 1]] = c(p);
            m
        };
        kron(&single(&system.emitter_a), &single(&system.emitter_b))
    };
    let mut rk = Rk4::new(gen.dim());
    march(&gen, &mut rho, &mut rk, settle, dt);

    let a = collective_jump(system);
    let a_dag = dagger(&a);
    let n_op = a_dag.dot(&a);

    let intensity = trace(&n_op.dot(&rho)).re;
    if intensity <= 1e-300 {
        return Err(DickeError::ZeroIntensity);
    }

    // B(0) = a ρ_ss a†, evolved under the same generator.
    let mut b = a.dot(&rho).dot(&a_dag);
    let mut values = Vec::with_capacity(taus.len());
    let mut now = 0.0;
    for &tau in taus {
        march(&gen, &mut b, &mut rk, tau - now, dt);
        now = tau;
        values.push(trace(&n_op.dot(&b)).re / (intensity * intensity));
    }
    Ok(G2Curve::new(taus.to_vec(), values, G2Form::NumericOracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{g2_two_emitter, ExponentForm};
    use crate::units::{energy_to_angular, EmitterParams};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn symmetric_system(delta: f64, gamma: f64, gamma_wg: f64, t2: f64, phi: f64) -> TwoEmitterSystem {
        let a = EmitterParams::new(delta / 2.0, gamma, gamma_wg, t2, 0.0).unwrap();
        let b = EmitterParams::new(-delta / 2.0, gamma, gamma_wg, t2, phi).unwrap();
        TwoEmitterSystem::new(a, b, 1.0).unwrap()
    }

    #[test]
    fn basis_order_via_single_emitter_embeddings() {
        // Emitter 1 is the most significant bit: σ⁻ on emitter 0 maps
        // |eg⟩ (index 2) to |gg⟩ (index 0), on emitter 1 |ge⟩ (1) → |gg⟩.
        let s0 = embed(&sigma_minus(), 2, 0);
        let s1 = embed(&sigma_minus(), 2, 1);
        assert_eq!(s0[[0, 2]], c(1.0));
        assert_eq!(s0[[1, 3]], c(1.0));
        assert_eq!(s1[[0, 1]], c(1.0));
        assert_eq!(s1[[2, 3]], c(1.0));
    }

    #[test]
    fn collective_jump_single_emitter() {
        let a = collective_jump_general(&[(0.64, 0.0)]).unwrap();
        let expected = sigma_minus().mapv(|z| z * 0.8);
        assert_eq!(a.nrows(), 2);
        for (x, y) in a.iter().zip(expected.iter()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn collective_jump_in_phase_pair() {
        let a = collective_jump_general(&[(1.0, 0.0), (1.0, 0.0)]).unwrap();
        let expected = embed(&sigma_minus(), 2, 0) + embed(&sigma_minus(), 2, 1);
        for (x, y) in a.iter().zip(expected.iter()) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bright_state_emission_rate_is_doubled() {
        // ⟨B|a†a|B⟩ = 2γ_wg for the matched pair, any phase.
        for phi in [0.0, 0.8, 2.9] {
            let sys = symmetric_system(0.0, 1.0, 0.7, f64::INFINITY, phi);
            let a = collective_jump(&sys);
            let n_op = dagger(&a).dot(&a);
            let pair = matched_pair(&sys);
            let rate: f64 = (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| (pair.bright[i].conj() * n_op[[i, j]] * pair.bright[j]).re)
                        .sum::<f64>()
                })
                .sum();
            assert_relative_eq!(rate, 2.0 * 0.7, max_relative = 1e-12);
        }
    }

    #[test]
    fn bright_dark_phase_cases() {
        let amp = 1.0 / 2.0_f64.sqrt();
        let p0 = bright_dark(0.0);
        assert_abs_diff_eq!((p0.bright[1] - c(amp)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((p0.bright[2] - c(amp)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((p0.dark[1] + c(amp)).norm(), 0.0, epsilon = 1e-15);
        // φ = π flips the relative sign.
        let ppi = bright_dark(std::f64::consts::PI);
        assert_abs_diff_eq!((ppi.bright[1] + c(amp)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bright_dark_orthonormal() {
        for phi in [0.0, 0.3, 1.7, 4.4] {
            let p = bright_dark(phi);
            let dot: C64 = p.bright.iter().zip(p.dark.iter()).map(|(b, d)| b.conj() * d).sum();
            let nb: f64 = p.bright.iter().map(|z| z.norm_sqr()).sum();
            let nd: f64 = p.dark.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(dot.norm(), 0.0, epsilon = 1e-12);
            assert_relative_eq!(nb, 1.0, max_relative = 1e-12);
            assert_relative_eq!(nd, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_generator_when_channels_off() {
        let sys = symmetric_system(0.0, 1.0, 0.5, 1.0, 0.0);
        let gen = lindblad_generator(&sys, &ChannelSet::none()).unwrap();
        let rho = DensityMatrix::all_excited(2);
        let rhs = gen.apply(rho.matrix());
        let max = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert_abs_diff_eq!(max, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_emitter_population_decay() {
        // Emitter a excited, emitter b waveguide-decoupled and in |g⟩ (a
        // coupled partner would hybridize through the collective channel):
        // population e^{−γt}.
        let gamma = 1.3;
        let a = EmitterParams::new(0.0, gamma, 0.9, f64::INFINITY, 0.0).unwrap();
        let b = EmitterParams::new(0.0, gamma, 0.0, f64::INFINITY, 1.0).unwrap();
        let sys = TwoEmitterSystem::new(a, b, 1.0).unwrap();
        let gen = lindblad_generator(&sys, &ChannelSet::decay_only()).unwrap();
        let mut rho0 = CMatrix::zeros((4, 4));
        rho0[[2, 2]] = c(1.0); // |eg⟩
        let rho0 = DensityMatrix::from_matrix(rho0).unwrap();
        let rho = evolve(&rho0, &gen, 1.0 / gamma, gen.default_dt()).unwrap();
        assert_relative_eq!(rho.excited_population(), (-1.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn generator_is_trace_free_on_random_states() {
        let sys = symmetric_system(3.0, 1.1, 0.8, 0.4, 1.2);
        let gen = lindblad_generator(&sys, &ChannelSet::with_repump(0.2)).unwrap();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..100 {
            let mut a = CMatrix::zeros((4, 4));
            for i in 0..4 {
                for j in 0..4 {
                    a[[i, j]] = C64::new(next(), next());
                }
            }
            let rho_raw = a.dot(&dagger(&a));
            let tr = trace(&rho_raw);
            let rho = rho_raw.mapv(|z| z / tr);
            let rhs = gen.apply(&rho);
            assert_abs_diff_eq!(trace(&rhs).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let sys = symmetric_system(0.0, 1.0, 0.5, 1.0, 0.0);
        let gen = lindblad_generator(&sys, &ChannelSet::decay_only()).unwrap();
        let rho0 = DensityMatrix::all_excited(2);
        let rho = evolve(&rho0, &gen, 0.0, gen.default_dt()).unwrap();
        assert_eq!(rho.matrix(), rho0.matrix());
    }

    #[test]
    fn evolve_rejects_oversized_step() {
        let sys = symmetric_system(0.0, 1.0, 0.5, 1.0, 0.0);
        let gen = lindblad_generator(&sys, &ChannelSet::decay_only()).unwrap();
        let rho0 = DensityMatrix::all_excited(2);
        let err = evolve(&rho0, &gen, 1.0, 10.0 * gen.max_dt()).unwrap_err();
        assert!(matches!(err, DickeError::StepSizeViolation { .. }));
    }

    #[test]
    fn bright_state_decays_superradiantly() {
        // |B⟩⟨B| under the waveguide channel only: population e^{−2γ_wg t}.
        let gamma_wg = 0.7;
        let sys = symmetric_system(0.0, gamma_wg, gamma_wg, f64::INFINITY, 1.3);
        let gen = lindblad_generator(&sys, &ChannelSet::waveguide_only()).unwrap();
        let pair = matched_pair(&sys);
        let rho0 = DensityMatrix::pure(&pair.bright).unwrap();
        for t in [0.3, 1.0, 2.5] {
            let rho = evolve(&rho0, &gen, t, gen.default_dt()).unwrap();
            assert_relative_eq!(
                rho.excited_population(),
                (-2.0 * gamma_wg * t).exp(),
                max_relative = 1e-7
            );
            rho.validate().unwrap();
        }
    }

    #[test]
    fn dark_state_does_not_decay() {
        let gamma_wg = 0.7;
        let sys = symmetric_system(0.0, gamma_wg, gamma_wg, f64::INFINITY, 2.1);
        let gen = lindblad_generator(&sys, &ChannelSet::waveguide_only()).unwrap();
        let pair = matched_pair(&sys);
        let rho0 = DensityMatrix::pure(&pair.dark).unwrap();
        let rho = evolve(&rho0, &gen, 10.0 / gamma_wg, gen.default_dt()).unwrap();
        assert!((rho.excited_population() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn evolution_preserves_trace_and_positivity() {
        let sys = symmetric_system(4.0, 1.0, 0.8, 0.3, 0.9);
        let gen = lindblad_generator(&sys, &ChannelSet::with_repump(0.05)).unwrap();
        let rho0 = DensityMatrix::all_excited(2);
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.7).collect();
        evolve_observed(&rho0, &gen, &times, gen.default_dt(), |_, m| {
            let dm = DensityMatrix::from_matrix(m.clone()).unwrap();
            assert!((dm.trace() - 1.0).abs() < 1e-9);
            assert!(dm.min_eigenvalue() > -1e-9);
        })
        .unwrap();
    }

    #[test]
    fn decay_spectrum_pair() {
        let e = decay_spectrum(&[0.0, 0.0], 0.6).unwrap();
        assert_abs_diff_eq!(e[0], 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 0.0, epsilon = 1e-12);
        // Rates are phase-independent; only eigenvectors rotate.
        let e = decay_spectrum(&[0.0, std::f64::consts::FRAC_PI_2], 0.6).unwrap();
        assert_abs_diff_eq!(e[0], 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn decay_spectrum_triple_in_phase() {
        let e = decay_spectrum(&[0.0, 0.0, 0.0], 0.5).unwrap();
        assert_abs_diff_eq!(e[0], 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn decay_spectrum_sum_rule() {
        for n in 1..=6 {
            let phases: Vec<f64> = (0..n).map(|i| 0.37 * i as f64 * i as f64).collect();
            let e = decay_spectrum(&phases, 0.83).unwrap();
            let total: f64 = e.iter().sum();
            assert_relative_eq!(total, n as f64 * 0.83, max_relative = 1e-12);
        }
        assert!(decay_spectrum(&[0.0; 7], 1.0).is_err());
    }

    #[test]
    fn oracle_single_emitter_antibunching() {
        // Emitter b carries no waveguide coupling, so the output field sees
        // only emitter a: g²(τ) = 1 − e^{−γτ}.
        let gamma = 1.0;
        let a = EmitterParams::new(0.0, gamma, 0.8, f64::INFINITY, 0.0).unwrap();
        let b = EmitterParams::new(5.0, gamma, 0.0, f64::INFINITY, 1.0).unwrap();
        let sys = TwoEmitterSystem::new(a, b, 1.0).unwrap();
        let taus: Vec<f64> = (0..=30).map(|i| i as f64 * 0.2).collect();
        let curve = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();
        for (t, v) in curve.delays.iter().zip(&curve.values) {
            assert_abs_diff_eq!(*v, 1.0 - (-gamma * t).exp(), epsilon = 1e-4);
        }
    }

    #[test]
    fn oracle_flat_for_degenerate_undephased_pair() {
        // Δ = 0 and T₂ = ∞: the derived closed form is exactly 1 for all τ
        // and the oracle confirms it; the published exponent form is not.
        let sys = symmetric_system(0.0, 1.0, 0.8, f64::INFINITY, 0.7);
        let taus: Vec<f64> = (0..=25).map(|i| i as f64 * 0.2).collect();
        let curve = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();
        for v in &curve.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn oracle_fast_beat_averages_to_half() {
        // 145 μeV beat bin-averaged over ±100 ps around τ = 0 lands on the
        // distinguishable value ½.
        let delta = energy_to_angular(145.0);
        let gamma = 0.5;
        let beta = 1.0 / (2.0 * 0.140);
        let t2 = 1.0 / (beta - gamma / 2.0);
        let sys = symmetric_system(delta, gamma, 0.4, t2, 0.0);
        let taus: Vec<f64> = (0..=50).map(|i| i as f64 * 0.002).collect();
        let curve = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();
        let mean: f64 = curve.values.iter().sum::<f64>() / curve.values.len() as f64;
        assert_abs_diff_eq!(mean, 0.5, epsilon = 2e-2);
    }

    #[test]
    fn oracle_matches_derived_form() {
        let sys = symmetric_system(4.0, 1.0, 0.75, 0.45, 1.9);
        let taus: Vec<f64> = (0..=40).map(|i| i as f64 * 0.15).collect();
        let curve = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();
        let mut sup = 0.0f64;
        for (t, v) in curve.delays.iter().zip(&curve.values) {
            sup = sup.max((v - g2_two_emitter(&sys, *t, ExponentForm::Derived)).abs());
        }
        assert!(sup < 1e-3, "sup-norm deviation {sup}");
    }

    #[test]
    fn oracle_invariant_under_emitter_swap() {
        let sys = symmetric_system(6.0, 1.2, 0.9, 0.5, 1.1);
        let taus: Vec<f64> = (0..=20).map(|i| i as f64 * 0.2).collect();
        let c1 = two_time_g2_oracle(&sys, &taus, &OracleOptions::default()).unwrap();
        let c2 = two_time_g2_oracle(&sys.swapped(), &taus, &OracleOptions::default()).unwrap();
        for (a, b) in c1.values.iter().zip(&c2.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }
}
