//! Constants behind individual and common learning: the KL gap `b`, the
//! admissible radius, Sanov exponents and bounds, the posterior floor, the
//! belief exponent `β*`, and the time threshold `T`.

use serde::{Deserialize, Serialize};

use crate::contraction;
use crate::counts::{CountSpace, LogFactorials};
use crate::divergence;
use crate::engine::{self, EngineConfig};
use crate::error::{Error, Result};
use crate::infostructure::InfoStructure;
use crate::operators::{self, ball_probability};
use crate::partition::{common_identification, identification_partition};
use crate::rational;

/// `b_lθ(ε)` with the maximizing alternative and point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlGap {
    pub agent: usize,
    pub state: usize,
    /// `+∞` (serialized as null) when every state shares the cell.
    pub value: f64,
    pub rival: Option<usize>,
    pub vertex: Option<Vec<f64>>,
}

impl KlGap {
    pub fn is_positive(&self) -> bool {
        self.value > 0.0
    }
}

/// Maximizes `Σ c(x) φ(x)` over `φ` in the simplex within TV distance `ε`
/// of `center`: move up to `ε` of mass from the lowest-coefficient
/// coordinates onto the highest one. Returns the maximizer.
fn maximize_linear(c: &[f64], center: &[f64], epsilon: f64) -> Vec<f64> {
    let mut phi = center.to_vec();
    let top = (0..c.len())
        .max_by(|&i, &j| c[i].partial_cmp(&c[j]).unwrap())
        .expect("nonempty alphabet");
    let mut order: Vec<usize> = (0..c.len()).filter(|&i| i != top).collect();
    order.sort_by(|&i, &j| c[i].partial_cmp(&c[j]).unwrap());
    let mut budget = epsilon.min(1.0 - center[top]);
    for i in order {
        if budget <= 0.0 || c[i] >= c[top] {
            break;
        }
        let m = phi[i].min(budget);
        phi[i] -= m;
        phi[top] += m;
        budget -= m;
    }
    phi
}

/// `Σ φ(x) c(x)` with `0 · (±∞) = 0`.
fn linear_value(c: &[f64], phi: &[f64]) -> f64 {
    if c.iter().zip(phi).any(|(&c, &p)| p > 0.0 && c == f64::INFINITY) {
        return f64::INFINITY;
    }
    c.iter()
        .zip(phi)
        .filter(|(_, &p)| p > 0.0)
        .map(|(c, p)| c * p)
        .sum()
}

fn log_ratio(num: f64, den: f64) -> f64 {
    match (num > 0.0, den > 0.0) {
        (true, true) => (num / den).ln(),
        (false, false) => 0.0,
        (true, false) => f64::INFINITY,
        (false, true) => f64::NEG_INFINITY,
    }
}

/// `b_lθ(ε) = −max_{θ' ∉ Q_l(θ)} max_{φ ∈ N_ε(φ^θ_l)} Σ φ log(φ^θ'_l / φ^θ_l)`.
/// The objective is linear in `φ`, so the inner maximum is solved exactly.
pub fn kl_gap(info: &InfoStructure, agent: usize, state: usize, epsilon: f64) -> Result<KlGap> {
    info.check_state(state)?;
    info.check_agent(agent)?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let cells = identification_partition(info, agent)?;
    let home = cells.cell_index(state);
    let center = info.marginal_f64(state, agent);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for rival in 0..info.num_states() {
        if cells.cell_index(rival) == home {
            continue;
        }
        let c: Vec<f64> = info
            .marginal_f64(rival, agent)
            .iter()
            .zip(center)
            .map(|(&a, &b)| log_ratio(a, b))
            .collect();
        let phi = maximize_linear(&c, center, epsilon);
        let v = linear_value(&c, &phi);
        if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
            best = Some((v, rival, phi));
        }
    }
    Ok(match best {
        None => KlGap {
            agent,
            state,
            value: f64::INFINITY,
            rival: None,
            vertex: None,
        },
        Some((v, rival, phi)) => KlGap {
            agent,
            state,
            value: -v,
            rival: Some(rival),
            vertex: Some(phi),
        },
    })
}

/// Minimum of `kl_gap` over agents and states.
pub fn global_kl_gap(info: &InfoStructure, epsilon: f64) -> Result<KlGap> {
    let mut best: Option<KlGap> = None;
    for agent in 0..info.num_agents() {
        for state in 0..info.num_states() {
            let g = kl_gap(info, agent, state, epsilon)?;
            if best.as_ref().is_none_or(|b| g.value < b.value) {
                best = Some(g);
            }
        }
    }
    Ok(best.expect("at least one agent and state"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    /// Largest `ε` on the bisection grid with a positive gap; `+∞` when
    /// nothing needs separating.
    pub value: f64,
    pub degenerate: bool,
    pub resolution: f64,
}

/// Bisection for the admissible radius `ε̄`, to resolution 1e-6.
pub fn max_epsilon(info: &InfoStructure) -> Result<RadiusEstimate> {
    const RESOLUTION: f64 = 1e-6;
    let positive = |e: f64| global_kl_gap(info, e).map(|g| g.value > 0.0);
    if global_kl_gap(info, 0.0)?.value == f64::INFINITY {
        return Ok(RadiusEstimate {
            value: f64::INFINITY,
            degenerate: true,
            resolution: RESOLUTION,
        });
    }
    if !positive(0.0)? {
        return Ok(RadiusEstimate {
            value: 0.0,
            degenerate: false,
            resolution: RESOLUTION,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if positive(hi)? {
        lo = hi;
    }
    while hi - lo > RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RadiusEstimate {
        value: lo,
        degenerate: false,
        resolution: RESOLUTION,
    })
}

/// `α_lθ(ε) = inf { KL(φ ‖ φ^θ_l) : ‖φ − φ^θ_l‖_TV > ε }`.
///
/// Since `‖φ − p‖_TV = max_S φ(S) − p(S)`, the infimum is the least binary
/// divergence `kl(p(S) + ε ‖ p(S))` over signal sets `S` with
/// `p(S) + ε < 1`, and `+∞` when there is none.
pub fn sanov_exponent(info: &InfoStructure, agent: usize, state: usize, epsilon: f64) -> Result<f64> {
    info.check_state(state)?;
    info.check_agent(agent)?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(sanov_exponent_of(info.marginal_f64(state, agent), epsilon))
}

pub fn sanov_exponent_of(p: &[f64], epsilon: f64) -> f64 {
    let k = p.len();
    assert!(k < 26, "alphabet too large for subset enumeration");
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) - 1 {
        let ps: f64 = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| p[i]).sum();
        if ps + epsilon < 1.0 {
            best = best.min(divergence::kl_bernoulli(ps + epsilon, ps));
        }
    }
    best
}

/// `(lower, upper)` bounds on `P^θ(φ̂_lt ∈ N_ε(φ^θ_l))`:
/// `1 − (t+1)^|X| e^{−tα} ≤ P ≤ 1 − (t+1)^{−|X|} e^{−tα}`, lower clamped at 0.
pub fn sanov_bounds_of(alpha: f64, alphabet: usize, t: u32) -> (f64, f64) {
    if alpha == f64::INFINITY {
        return (1.0, 1.0);
    }
    let k = alphabet as f64;
    let lt = (t as f64 + 1.0).ln();
    let upper = 1.0 - (-(t as f64) * alpha - k * lt).exp();
    let lower = (1.0 - (-(t as f64) * alpha + k * lt).exp()).max(0.0);
    (lower, upper)
}

pub fn sanov_bounds(info: &InfoStructure, agent: usize, state: usize, epsilon: f64, t: u32) -> Result<(f64, f64)> {
    if t == 0 {
        return Err(Error::InvalidArgument("Sanov bounds need t >= 1".into()));
    }
    let alpha = sanov_exponent(info, agent, state, epsilon)?;
    Ok(sanov_bounds_of(alpha, info.alphabet(agent), t))
}

/// Exact `P^θ(‖φ̂_lt − φ^θ_l‖_TV ≤ ε)` from the multinomial law of one
/// agent's counts.
pub fn own_ball_probability(info: &InfoStructure, agent: usize, state: usize, epsilon: f64, t: u32) -> Result<f64> {
    info.check_state(state)?;
    info.check_agent(agent)?;
    if t == 0 {
        return Err(Error::InvalidArgument("empirical measures need t >= 1".into()));
    }
    let eps = operators::epsilon_exact(epsilon)?;
    let m = info.marginal(state, agent)?;
    let lf = LogFactorials::new(t);
    let marginal = info.marginal_f64(state, agent);
    Ok(CountSpace::new(t, info.alphabet(agent))
        .vectors()
        .iter()
        .filter(|c| operators::in_ball(c, m, &eps))
        .map(|c| (lf.multinomial(c.counts()) + engine::log_likelihood_unchecked(marginal, c.counts())).exp())
        .sum())
}

/// `1 − e^{−tb}/p_θ` clamped to `[0, 1]`, with `b = global_kl_gap(ε)`.
pub fn posterior_floor(info: &InfoStructure, state: usize, epsilon: f64, t: u32) -> Result<f64> {
    info.check_state(state)?;
    let b = global_kl_gap(info, epsilon)?.value;
    posterior_floor_with(b, info.prior_f64()[state], epsilon, t)
}

pub fn posterior_floor_with(b: f64, prior: f64, epsilon: f64, t: u32) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::GapNotPositive { epsilon, gap: b });
    }
    Ok((1.0 - (-(t as f64) * b).exp() / prior).clamp(0.0, 1.0))
}

/// `β*(q, L)`: the supremum of `β` with `q^β (1 − L(1 − q^β)) > q`.
///
/// With `y = q^β` the condition is `L y² + (1 − L) y − q > 0`, i.e. `y` above
/// the positive root, which lies in `(q, 1)`. Bisection on `β ∈ [0, 1]` to
/// 1e-10.
pub fn beta_for(q: f64, agents: usize) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("q must lie in (0, 1), got {q}")));
    }
    if agents == 0 {
        return Err(Error::InvalidArgument("at least one agent is required".into()));
    }
    let l = agents as f64;
    let admissible = |beta: f64| {
        let y = q.powf(beta);
        y * (1.0 - l * (1.0 - y)) > q
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellProbability {
    pub state: usize,
    pub cell: Vec<usize>,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCertificate {
    pub q: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub b: f64,
    pub q_beta: f64,
    /// First `t` from which every ball probability exceeds `q^β` over a
    /// window of `window` consecutive horizons.
    pub t_prime: u32,
    pub window: u32,
    /// `⌈max_θ log((1 − q^β) p_θ) / (−b)⌉`, floored at 0.
    pub t_log: u32,
    /// `max(t_prime, t_log)`.
    pub t: u32,
    /// `P^θ(I_Tε(Q*))` for each `θ ∈ Q*`, each cell `Q*` of the join.
    pub ball_probabilities: Vec<CellProbability>,
    /// `e^{−Tb} / p_θ`, which must not exceed `1 − q^β`.
    pub tail_ratios: Vec<f64>,
    pub holds: bool,
}

const WINDOW: u32 = 10;

/// `T = max(T′, ⌈max_θ log((1 − q^β) p_θ) / (−b)⌉)` where `T′` is the first
/// horizon from which `P^θ(I_tε(Q*)) > q^β` for every cell `Q*` of the join
/// and every `θ ∈ Q*`, over a window of ten consecutive horizons. The
/// search doubles from t = 16, bisects, then confirms the window.
pub fn time_threshold(
    info: &InfoStructure,
    q: f64,
    beta: f64,
    epsilon: f64,
    config: &EngineConfig,
) -> Result<ThresholdCertificate> {
    let b = global_kl_gap(info, epsilon)?.value;
    if !(b > 0.0) {
        return Err(Error::GapNotPositive { epsilon, gap: b });
    }
    let star = beta_for(q, info.num_agents())?;
    if !(beta > 0.0 && beta < star) {
        return Err(Error::InvalidArgument(format!("beta must lie in (0, {star:.10}), got {beta}")));
    }
    let q_beta = q.powf(beta);
    let cells = common_identification(info)?;
    let pairs: Vec<(usize, Vec<usize>)> = cells
        .cells()
        .iter()
        .flat_map(|c| c.iter().map(move |&s| (s, c.clone())))
        .collect();

    let probabilities = |t: u32| -> Result<Vec<CellProbability>> {
        pairs
            .iter()
            .map(|(s, cell)| {
                Ok(CellProbability {
                    state: *s,
                    cell: cell.clone(),
                    probability: ball_probability(info, *s, t, epsilon, cell, config)?,
                })
            })
            .collect()
    };
    let passes = |t: u32| -> Result<bool> { Ok(probabilities(t)?.iter().all(|c| c.probability > q_beta)) };

    let cap = config.search_cap;
    let not_found = |best: Vec<CellProbability>| Error::ThresholdNotFound {
        cap,
        detail: format!(
            "ball probabilities at t={cap}: {}",
            best.iter()
                .map(|c| format!("θ#{}={:.6}", c.state + 1, c.probability))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };

    let mut start = 1u32;
    let t_prime = 'search: loop {
        // doubling
        let mut lo = start - 1;
        let mut hi = start.max(16);
        loop {
            if hi > cap {
                hi = cap;
            }
            if passes(hi)? {
                break;
            }
            if hi == cap {
                return Err(not_found(probabilities(cap)?));
            }
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        // bisection for the first passing t in (lo, hi]
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if passes(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        for j in 1..WINDOW {
            let t = hi + j;
            if t > cap {
                return Err(not_found(probabilities(cap)?));
            }
            if !passes(t)? {
                start = t + 1;
                continue 'search;
            }
        }
        break hi;
    };

    let t_log = info
        .prior_f64()
        .iter()
        .map(|&p| (((1.0 - q_beta) * p).ln() / -b).ceil())
        .fold(0.0f64, f64::max) as u32;
    let t = t_prime.max(t_log);
    let ball_probabilities = probabilities(t)?;
    let tail_ratios: Vec<f64> = info
        .prior_f64()
        .iter()
        .map(|&p| (-(t as f64) * b).exp() / p)
        .collect();
    let holds = ball_probabilities.iter().all(|c| c.probability > q_beta)
        && tail_ratios.iter().all(|&r| r <= 1.0 - q_beta);
    Ok(ThresholdCertificate {
        q,
        beta,
        epsilon,
        b,
        q_beta,
        t_prime,
        window: WINDOW,
        t_log,
        t,
        ball_probabilities,
        tail_ratios,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanovEntry {
    pub agent: usize,
    pub state: usize,
    /// `+∞` serializes as null.
    pub alpha: f64,
}

/// All constants for one `(q, ε)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub q: f64,
    pub epsilon: f64,
    pub b: KlGap,
    pub epsilon_bar: RadiusEstimate,
    pub alpha: Vec<SanovEntry>,
    pub beta_star: f64,
    pub beta: f64,
    pub lambda: String,
    pub lambda_f64: f64,
    /// Present when `b > 0` and the search succeeded.
    pub threshold: Option<ThresholdCertificate>,
    pub threshold_error: Option<String>,
    /// How the two lower bounds on `T` are combined.
    pub threshold_rule: String,
}

/// Computes every constant; `beta` defaults to `β*/2`.
pub fn bound_set(info: &InfoStructure, q: f64, epsilon: f64, beta: Option<f64>, config: &EngineConfig) -> Result<BoundSet> {
    let b = global_kl_gap(info, epsilon)?;
    let epsilon_bar = max_epsilon(info)?;
    let mut alpha = Vec::new();
    for agent in 0..info.num_agents() {
        for state in 0..info.num_states() {
            alpha.push(SanovEntry {
                agent,
                state,
                alpha: sanov_exponent(info, agent, state, epsilon)?,
            });
        }
    }
    let beta_star = beta_for(q, info.num_agents())?;
    let beta = beta.unwrap_or(beta_star / 2.0);
    let lambda = contraction::global_contraction_coefficient(info)?;
    let (threshold, threshold_error) = match time_threshold(info, q, beta, epsilon, config) {
        Ok(c) => (Some(c), None),
        Err(e @ (Error::GapNotPositive { .. } | Error::ThresholdNotFound { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(BoundSet {
        q,
        epsilon,
        b,
        epsilon_bar,
        alpha,
        beta_star,
        beta,
        lambda: rational::format(&lambda),
        lambda_f64: rational::to_f64(&lambda),
        threshold,
        threshold_error,
        threshold_rule: "max".into(),
    })
}
