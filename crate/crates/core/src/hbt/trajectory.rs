//! Quantum-trajectory photon-stream generator for one or two emitters.
//!
//! The two-emitter master equation is unraveled into pure-state trajectories
//! with jump channels {collective waveguide, per-emitter non-guided decay,
//! per-emitter dephasing, per-emitter repump}. Between jumps the state
//! evolves under the non-Hermitian drift exp(−i·H_eff·t), which for two
//! emitters is block-diagonal: scalars on |gg⟩ and |ee⟩ and a 2×2 block on
//! the single-excitation sector. All three blocks exponentiate in closed
//! form, so jump times are sampled exactly by root-finding the survival
//! probability — there is no integration step and the cost scales with the
//! number of events, not with the simulated duration.
//!
//! Two exact shortcuts keep long runs cheap:
//! - dephasing jumps act on σ_z eigenstates as a global phase, so while the
//!   state is exactly |gg⟩ only the repump channels can change anything and
//!   the waiting time is sampled from their total rate directly;
//! - once an undriven trajectory reaches |gg⟩ it is fast-forwarded to the
//!   next excitation pulse.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Channel, ExcitationSchedule, HbtError, PhotonEvent, PhotonStream};
use crate::linalg::exp_2x2;
use crate::units::TwoEmitterSystem;

const GROUND_SNAP: f64 = 1e-24;

type State = [C64; 4];

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn norm_sqr(psi: &State) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum()
}

fn normalize(psi: &mut State) {
    let n = norm_sqr(psi).sqrt();
    for z in psi.iter_mut() {
        *z /= n;
    }
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

fn gaussian_sample(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one value per call keeps the draw sequence simple.
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn poisson_sample(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    // Knuth multiplication; fine for the small means used here.
    if mean <= 0.0 {
        return 0;
    }
    let threshold = (-mean).exp();
    let mut k = 0usize;
    let mut p = 1.0;
    loop {
        p *= rng.gen::<f64>();
        if p <= threshold {
            return k;
        }
        k += 1;
    }
}

/* Propagator *****************************************************************/

/// Single-excitation 2×2 drift block, eigendecomposed when possible so the
/// survival probability costs a couple of exponentials per evaluation.
enum MidBlock {
    /// mid = V·diag(λ)·V⁻¹.
    Eigen { lambda: [C64; 2], v: [[C64; 2]; 2], v_inv: [[C64; 2]; 2] },
    /// Near-defective fallback: exponentiate directly.
    Direct([[C64; 2]; 2]),
}

impl MidBlock {
    fn new(mid: [[C64; 2]; 2]) -> Self {
        let mu = (mid[0][0] + mid[1][1]) * 0.5;
        let d = (mid[0][0] - mid[1][1]) * 0.5;
        let q = (d * d + mid[0][1] * mid[1][0]).sqrt();
        let scale = mid.iter().flatten().map(|z| z.norm()).fold(1e-300, f64::max);
        if q.norm() < 1e-9 * scale {
            return MidBlock::Direct(mid);
        }
        let lambda = [mu + q, mu - q];
        // Eigenvector columns; pick the better-conditioned construction.
        let col = |lam: C64| -> [C64; 2] {
            if mid[0][1].norm() >= mid[1][0].norm() {
                [mid[0][1], lam - mid[0][0]]
            } else {
                [lam - mid[1][1], mid[1][0]]
            }
        };
        let (c0, c1) = (col(lambda[0]), col(lambda[1]));
        let det = c0[0] * c1[1] - c1[0] * c0[1];
        if det.norm() < 1e-12 * scale * scale {
            return MidBlock::Direct(mid);
        }
        let v = [[c0[0], c1[0]], [c0[1], c1[1]]];
        let v_inv = [[c1[1] / det, -c1[0] / det], [-c0[1] / det, c0[0] / det]];
        MidBlock::Eigen { lambda, v, v_inv }
    }

    fn apply(&self, x: [C64; 2], t: f64) -> [C64; 2] {
        match self {
            MidBlock::Eigen { lambda, v, v_inv } => {
                let w0 = (v_inv[0][0] * x[0] + v_inv[0][1] * x[1]) * (lambda[0] * t).exp();
                let w1 = (v_inv[1][0] * x[0] + v_inv[1][1] * x[1]) * (lambda[1] * t).exp();
                [v[0][0] * w0 + v[0][1] * w1, v[1][0] * w0 + v[1][1] * w1]
            }
            MidBlock::Direct(mid) => {
                let um = exp_2x2([
                    [mid[0][0] * t, mid[0][1] * t],
                    [mid[1][0] * t, mid[1][1] * t],
                ]);
                [um[0][0] * x[0] + um[0][1] * x[1], um[1][0] * x[0] + um[1][1] * x[1]]
            }
        }
    }
}

/// Closed-form exp(−i·H_eff·t) for the two-emitter effective Hamiltonian.
struct Propagator {
    /// −Γ₀₀/2: total rate out of |gg⟩ (pump + dephasing).
    m00: f64,
    /// −i(Δ₁+Δ₂) − Γ₃₃/2 for |ee⟩.
    m33: C64,
    mid: MidBlock,
}

impl Propagator {
    fn apply(&self, psi: &State, t: f64) -> State {
        let u00 = (self.m00 * t).exp();
        let u33 = C64::from_polar((self.m33.re * t).exp(), self.m33.im * t);
        let m = self.mid.apply([psi[1], psi[2]], t);
        [psi[0] * u00, m[0], m[1], psi[3] * u33]
    }
}

/// Precomputed survival-probability evaluator for one waiting period:
/// S(t) = ‖U(t)ψ‖² with the eigenbasis projection of ψ done once.
struct SurvivalCtx {
    w0: f64,
    rate0: f64,
    w3: f64,
    rate3: f64,
    mid: MidEval,
}

enum MidEval {
    /// Column vectors V[:,i]·(V⁻¹ψ)_i; S_mid(t) = ‖e^{λ₁t}c₁ + e^{λ₂t}c₂‖².
    Eigen { lambda: [C64; 2], c1: [C64; 2], c2: [C64; 2] },
    Direct { mid: [[C64; 2]; 2], x: [C64; 2] },
}

impl SurvivalCtx {
    fn new(prop: &Propagator, psi: &State) -> Self {
        let mid = match &prop.mid {
            MidBlock::Eigen { lambda, v, v_inv } => {
                let w0 = v_inv[0][0] * psi[1] + v_inv[0][1] * psi[2];
                let w1 = v_inv[1][0] * psi[1] + v_inv[1][1] * psi[2];
                MidEval::Eigen {
                    lambda: *lambda,
                    c1: [v[0][0] * w0, v[1][0] * w0],
                    c2: [v[0][1] * w1, v[1][1] * w1],
                }
            }
            MidBlock::Direct(mid) => MidEval::Direct { mid: *mid, x: [psi[1], psi[2]] },
        };
        Self {
            w0: psi[0].norm_sqr(),
            rate0: 2.0 * prop.m00,
            w3: psi[3].norm_sqr(),
            rate3: 2.0 * prop.m33.re,
            mid,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let mid = match &self.mid {
            MidEval::Eigen { lambda, c1, c2 } => {
                let e1 = (lambda[0] * t).exp();
                let e2 = (lambda[1] * t).exp();
                (e1 * c1[0] + e2 * c2[0]).norm_sqr() + (e1 * c1[1] + e2 * c2[1]).norm_sqr()
            }
            MidEval::Direct { mid, x } => {
                let um = exp_2x2([
                    [mid[0][0] * t, mid[0][1] * t],
                    [mid[1][0] * t, mid[1][1] * t],
                ]);
                (um[0][0] * x[0] + um[0][1] * x[1]).norm_sqr()
                    + (um[1][0] * x[0] + um[1][1] * x[1]).norm_sqr()
            }
        };
        self.w0 * (self.rate0 * t).exp() + mid + self.w3 * (self.rate3 * t).exp()
    }
}

/* Jump channels **************************************************************/

#[derive(Debug, Clone, Copy, PartialEq)]
enum JumpKind {
    Waveguide,
    Nonguided(usize),
    Dephase(usize),
    Pump(usize),
}

struct Channels {
    /// Collective amplitudes c_i = √γ_wg,i·e^{ikx_i}.
    c: [C64; 2],
    /// Non-guided rates γ_i − γ_wg,i.
    ng: [f64; 2],
    /// Dephasing jump rates 1/(2T₂,i).
    kappa: [f64; 2],
    /// Repump rates (0 for pulsed operation).
    pump: [f64; 2],
    active: Vec<JumpKind>,
}

impl Channels {
    fn weight(&self, kind: JumpKind, psi: &State) -> f64 {
        match kind {
            JumpKind::Waveguide => {
                let out0 = self.c[0] * psi[2] + self.c[1] * psi[1];
                out0.norm_sqr()
                    + (self.c[0] * psi[3]).norm_sqr()
                    + (self.c[1] * psi[3]).norm_sqr()
            }
            JumpKind::Nonguided(0) => self.ng[0] * (psi[2].norm_sqr() + psi[3].norm_sqr()),
            JumpKind::Nonguided(_) => self.ng[1] * (psi[1].norm_sqr() + psi[3].norm_sqr()),
            JumpKind::Dephase(i) => self.kappa[i] * norm_sqr(psi),
            JumpKind::Pump(0) => self.pump[0] * (psi[0].norm_sqr() + psi[1].norm_sqr()),
            JumpKind::Pump(_) => self.pump[1] * (psi[0].norm_sqr() + psi[2].norm_sqr()),
        }
    }

    fn apply(&self, kind: JumpKind, psi: &State) -> State {
        match kind {
            JumpKind::Waveguide => [
                self.c[0] * psi[2] + self.c[1] * psi[1],
                self.c[0] * psi[3],
                self.c[1] * psi[3],
                czero(),
            ],
            JumpKind::Nonguided(0) => [psi[2], psi[3], czero(), czero()],
            JumpKind::Nonguided(_) => [psi[1], czero(), psi[3], czero()],
            JumpKind::Dephase(0) => [-psi[0], -psi[1], psi[2], psi[3]],
            JumpKind::Dephase(_) => [-psi[0], psi[1], -psi[2], psi[3]],
            JumpKind::Pump(0) => [czero(), czero(), psi[0], psi[1]],
            JumpKind::Pump(_) => [czero(), psi[0], czero(), psi[2]],
        }
    }
}

/* Engine *********************************************************************/

struct Engine {
    rng: ChaCha8Rng,
    prop: Propagator,
    channels: Channels,
    psi: State,
    now: f64,
    duration: f64,
    events: Vec<PhotonEvent>,
}

impl Engine {
    fn new(system: &TwoEmitterSystem, repump: f64, duration: f64, seed: u64) -> Self {
        let em = [system.emitter_a, system.emitter_b];
        let c = [
            C64::from_polar(em[0].gamma_wg.sqrt(), system.k * em[0].position),
            C64::from_polar(em[1].gamma_wg.sqrt(), system.k * em[1].position),
        ];
        let ng = [em[0].gamma_nonguided(), em[1].gamma_nonguided()];
        let kappa = [em[0].dephasing_rate() / 2.0, em[1].dephasing_rate() / 2.0];
        let pump = [repump, repump];

        // Dephasing jumps fire at a state-independent rate (σ_z is unitary),
        // so they run on their own exact Poisson clock and are kept out of
        // the survival-threshold machinery; `active` holds only the
        // state-dependent channels.
        let mut active = vec![JumpKind::Waveguide];
        for i in 0..2 {
            if ng[i] > 0.0 {
                active.push(JumpKind::Nonguided(i));
            }
        }
        for i in 0..2 {
            if pump[i] > 0.0 {
                active.push(JumpKind::Pump(i));
            }
        }

        let pump_sum = pump[0] + pump[1];
        // Γ diagonal without the constant dephasing part: out-rates of the
        // four basis states under the state-dependent channels.
        let g00 = pump_sum;
        let g11 = em[1].gamma + pump[0];
        let g22 = em[0].gamma + pump[1];
        let g33 = em[0].gamma + em[1].gamma;
        let prop = Propagator {
            m00: -0.5 * g00,
            m33: C64::new(-0.5 * g33, -(em[0].detuning + em[1].detuning)),
            mid: MidBlock::new([
                [
                    C64::new(-0.5 * g11, -em[1].detuning),
                    c[1].conj() * c[0] * -0.5,
                ],
                [
                    c[0].conj() * c[1] * -0.5,
                    C64::new(-0.5 * g22, -em[0].detuning),
                ],
            ]),
        };

        let mut psi = [czero(); 4];
        psi[0] = C64::new(1.0, 0.0);
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            prop,
            channels: Channels { c, ng, kappa, pump, active },
            psi,
            now: 0.0,
            duration,
            events: Vec::new(),
        }
    }

    fn is_ground(&self) -> bool {
        self.psi[1].norm_sqr() + self.psi[2].norm_sqr() + self.psi[3].norm_sqr() < GROUND_SNAP
    }

    fn snap_ground(&mut self) {
        if self.is_ground() {
            self.psi = [C64::new(1.0, 0.0), czero(), czero(), czero()];
        } else {
            normalize(&mut self.psi);
        }
    }

    /// Root of survival(t) = u on (0, span) by the Illinois method.
    fn jump_time(ctx: &SurvivalCtx, span: f64, s_span: f64, u: f64) -> f64 {
        let (mut a, mut fa) = (0.0, 1.0 - u);
        let (mut b, mut fb) = (span, s_span - u);
        let mut side = 0i8;
        for _ in 0..200 {
            if b - a < 1e-9 * (1.0 + b) || fb == 0.0 {
                break;
            }
            let mut t = (a * fb - b * fa) / (fb - fa);
            if !(t > a && t < b) {
                t = 0.5 * (a + b);
            }
            let ft = ctx.eval(t) - u;
            if ft > 0.0 {
                a = t;
                fa = ft;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = t;
                fb = ft;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        b
    }

    fn record(&mut self, kind: JumpKind, t: f64) {
        let channel = match kind {
            JumpKind::Waveguide => Some(Channel::Waveguide),
            JumpKind::Nonguided(_) => Some(Channel::Nonguided),
            _ => None,
        };
        if let Some(channel) = channel {
            if t <= self.duration {
                self.events.push(PhotonEvent { t_ns: t, channel });
            }
        }
    }

    /// Perform the stochastic jump at the (already reached) current time.
    fn do_jump(&mut self) {
        let weights: Vec<f64> = self
            .channels
            .active
            .iter()
            .map(|&k| self.channels.weight(k, &self.psi))
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            // No channel can act (numerically dead state); leave unchanged.
            return;
        }
        let mut pick = self.rng.gen::<f64>() * total;
        let mut chosen = *self.channels.active.last().expect("nonempty");
        for (k, w) in self.channels.active.iter().zip(&weights) {
            if pick < *w {
                chosen = *k;
                break;
            }
            pick -= w;
        }
        self.psi = self.channels.apply(chosen, &self.psi);
        self.record(chosen, self.now);
        self.snap_ground();
    }

    /// Collapse emitter `which` to |e⟩ (incoherent above-band excitation),
    /// sampling between the raise-from-ground and already-excited branches.
    fn apply_excitation(&mut self, which: usize) {
        let (gi, ei) = if which == 0 { ([0, 1], [2, 3]) } else { ([0, 2], [1, 3]) };
        let wg = self.psi[gi[0]].norm_sqr() + self.psi[gi[1]].norm_sqr();
        let we = self.psi[ei[0]].norm_sqr() + self.psi[ei[1]].norm_sqr();
        let mut next = [czero(); 4];
        if self.rng.gen::<f64>() * (wg + we) < wg {
            next[ei[0]] = self.psi[gi[0]];
            next[ei[1]] = self.psi[gi[1]];
        } else {
            next[ei[0]] = self.psi[ei[0]];
            next[ei[1]] = self.psi[ei[1]];
        }
        self.psi = next;
        self.snap_ground();
    }

    /// Evolve until `duration`, interleaving the scheduled excitation list
    /// (sorted by time; `usize` selects the emitter).
    fn run(&mut self, schedule: &[(f64, usize)]) {
        let mut idx = 0usize;
        let pump_total = self.channels.pump[0] + self.channels.pump[1];
        let kappa_total = self.channels.kappa[0] + self.channels.kappa[1];

        while self.now < self.duration {
            let (horizon, excitation) = if idx < schedule.len() {
                (schedule[idx].0.min(self.duration), Some(schedule[idx]))
            } else {
                (self.duration, None)
            };

            // Fast path: in |gg⟩ dephasing jumps are a global phase, so only
            // the pump channels matter and their waiting time is exponential.
            if self.is_ground() {
                if pump_total > 0.0 {
                    let wait = exp_sample(&mut self.rng, pump_total);
                    if self.now + wait < horizon {
                        self.now += wait;
                        let which =
                            if self.rng.gen::<f64>() * pump_total < self.channels.pump[0] { 0 } else { 1 };
                        self.psi = self.channels.apply(JumpKind::Pump(which), &self.psi);
                        normalize(&mut self.psi);
                        continue;
                    }
                }
                self.now = horizon;
                if let Some(&(t, which)) = excitation.as_ref() {
                    if t <= self.duration {
                        self.apply_excitation(which);
                    }
                    idx += 1;
                }
                continue;
            }

            // General waiting period from a (partially) excited state.
            // Dephasing runs on an independent exponential clock (its rate
            // is state-independent); the state-dependent channels compete
            // through the survival threshold.
            let u = 1.0 - self.rng.gen::<f64>();
            let t_deph = if kappa_total > 0.0 {
                exp_sample(&mut self.rng, kappa_total)
            } else {
                f64::INFINITY
            };
            let span = horizon - self.now;
            let t_lim = span.min(t_deph);
            let ctx = SurvivalCtx::new(&self.prop, &self.psi);
            let s_lim = if t_lim > 0.0 { ctx.eval(t_lim) } else { 1.0 };

            if s_lim < u {
                // A photon/pump jump fires first.
                let t_star = Self::jump_time(&ctx, t_lim, s_lim, u);
                self.psi = self.prop.apply(&self.psi, t_star);
                self.now += t_star;
                self.do_jump();
                continue;
            }
            if t_deph < span {
                // The dephasing clock fires first.
                self.psi = self.prop.apply(&self.psi, t_deph);
                self.now += t_deph;
                let which = if self.rng.gen::<f64>() * kappa_total < self.channels.kappa[0] {
                    0
                } else {
                    1
                };
                self.psi = self.channels.apply(JumpKind::Dephase(which), &self.psi);
                self.snap_ground();
                continue;
            }
            // Nothing fired before the horizon.
            if span > 0.0 {
                self.psi = self.prop.apply(&self.psi, span);
                self.snap_ground();
            }
            self.now = horizon;
            if let Some(&(t, which)) = excitation.as_ref() {
                if t <= self.duration {
                    self.apply_excitation(which);
                }
                idx += 1;
            }
        }
    }
}

/* Public API *****************************************************************/

/// Generate the emission timestamps of a driven two-emitter system by
/// quantum-trajectory Monte Carlo. Deterministic given `seed`.
pub fn simulate_stream(
    system: &TwoEmitterSystem,
    schedule: &ExcitationSchedule,
    duration_ns: f64,
    seed: u64,
) -> Result<PhotonStream, HbtError> {
    system
        .emitter_a
        .validate()
        .and(system.emitter_b.validate())
        .map_err(|e| HbtError::MalformedRecord(e.to_string()))?;
    schedule.validate()?;
    if !(duration_ns > 0.0) {
        return Err(HbtError::NonPositive { name: "duration_ns", value: duration_ns });
    }

    let repump = match *schedule {
        ExcitationSchedule::Cw { repump_per_ns } => repump_per_ns,
        ExcitationSchedule::Pulsed { .. } => 0.0,
    };
    let mut engine = Engine::new(system, repump, duration_ns, seed);

    // Pre-draw the pulsed excitation schedule so the trajectory loop only
    // consumes RNG for quantum events.
    let mut excitations: Vec<(f64, usize)> = Vec::new();
    if let ExcitationSchedule::Pulsed { period_ns, p_excite_a, p_excite_b, capture_tau_ns } = *schedule
    {
        let n_pulses = (duration_ns / period_ns).floor() as usize;
        for n in 0..n_pulses {
            let t0 = n as f64 * period_ns;
            for (which, p) in [(0usize, p_excite_a), (1usize, p_excite_b)] {
                if p > 0.0 && engine.rng.gen::<f64>() < p {
                    let delay = if capture_tau_ns > 0.0 {
                        exp_sample(&mut engine.rng, 1.0 / capture_tau_ns)
                    } else {
                        0.0
                    };
                    excitations.push((t0 + delay, which));
                }
            }
        }
        excitations.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
    }

    engine.run(&excitations);

    let mut events = engine.events;
    events.sort_by(|a, b| a.t_ns.partial_cmp(&b.t_ns).expect("finite times"));
    let stream = PhotonStream { events, duration_ns, seed };
    stream.validate()?;
    Ok(stream)
}

/// Uncorrelated background entering the waveguide alongside the emitter
/// signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundKind {
    /// Homogeneous Poisson process (CW operation).
    Cw { rate_per_ns: f64 },
    /// Pulse-synchronized background (co-excited residual emission):
    /// Poisson-many photons per pulse with an exponential delay envelope.
    Pulsed { period_ns: f64, mean_per_pulse: f64, decay_ns: f64 },
}

/// Merge background photons into a stream. Deterministic given `seed`.
pub fn add_background(
    stream: &PhotonStream,
    kind: &BackgroundKind,
    seed: u64,
) -> Result<PhotonStream, HbtError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = Vec::new();
    match *kind {
        BackgroundKind::Cw { rate_per_ns } => {
            if rate_per_ns < 0.0 {
                return Err(HbtError::Negative { name: "rate_per_ns", value: rate_per_ns });
            }
            if rate_per_ns > 0.0 {
                let mut t = exp_sample(&mut rng, rate_per_ns);
                while t < stream.duration_ns {
                    extra.push(PhotonEvent { t_ns: t, channel: Channel::Waveguide });
                    t += exp_sample(&mut rng, rate_per_ns);
                }
            }
        }
        BackgroundKind::Pulsed { period_ns, mean_per_pulse, decay_ns } => {
            if !(period_ns > 0.0) {
                return Err(HbtError::NonPositive { name: "period_ns", value: period_ns });
            }
            for (name, value) in [("mean_per_pulse", mean_per_pulse), ("decay_ns", decay_ns)] {
                if value < 0.0 {
                    return Err(HbtError::Negative { name, value });
                }
            }
            let n_pulses = (stream.duration_ns / period_ns).floor() as usize;
            for n in 0..n_pulses {
                let t0 = n as f64 * period_ns;
                let k = poisson_sample(&mut rng, mean_per_pulse);
                for _ in 0..k {
                    let delay = if decay_ns > 0.0 { exp_sample(&mut rng, 1.0 / decay_ns) } else { 0.0 };
                    let t = t0 + delay;
                    if t <= stream.duration_ns {
                        extra.push(PhotonEvent { t_ns: t, channel: Channel::Waveguide });
                    }
                }
            }
        }
    }
    let mut events = stream.events.clone();
    events.extend(extra);
    events.sort_by(|a, b| a.t_ns.partial_cmp(&b.t_ns).expect("finite times"));
    Ok(PhotonStream { events, duration_ns: stream.duration_ns, seed: stream.seed })
}

/// Gaussian detector-jitter draw, exposed for the detection stage.
pub(super) fn jitter_draw(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    sigma * gaussian_sample(rng)
}

/// Exponential inter-arrival draw, exposed for the detection stage.
pub(super) fn exp_draw(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    exp_sample(rng, rate)
}
