//! Path simulation and estimation beyond the exact range.
//!
//! Path `i` of a plan with seed `s` draws from a ChaCha8 generator seeded
//! with `s` on stream `i`, so every path is reproducible on its own and
//! results do not depend on how paths are spread over workers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contraction;
use crate::counts::{CountProfile, CountVector, ProfileSpace};
use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::events::EpistemicEvent;
use crate::infostructure::InfoStructure;
use crate::operators::{self, CommonBeliefRule, Horizon};
use crate::parallel;

const CHUNK: usize = 1024;

/// Minimum number of paths in an own-count bin for its conditional
/// frequency to be reported.
pub const MIN_BIN: u64 = 30;

#[derive(Clone, Copy, Debug)]
pub struct SimulationPlan<'a> {
    pub info: &'a InfoStructure,
    pub state: usize,
    pub t: u32,
    pub n: u64,
    pub seed: u64,
}

impl<'a> SimulationPlan<'a> {
    pub fn new(info: &'a InfoStructure, state: usize, t: u32, n: u64, seed: u64) -> Result<Self> {
        info.check_state(state)?;
        if n == 0 {
            return Err(Error::InvalidArgument("path count n must be >= 1".into()));
        }
        Ok(SimulationPlan { info, state, t, n, seed })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub se: f64,
    pub n: u64,
    pub hits: u64,
    /// `3 · se`.
    pub half_width: f64,
}

impl Estimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        Estimate {
            p_hat: p,
            se,
            n,
            hits,
            half_width: 3.0 * se,
        }
    }

    /// `|p̂ − p| ≤ 3 · se`.
    pub fn covers(&self, p: f64) -> bool {
        (self.p_hat - p).abs() <= self.half_width
    }
}

/// Inverse-CDF sampler over the flattened joint tensor of one state.
struct Sampler {
    cdf: Vec<f64>,
    last: usize,
    signals: Vec<Vec<usize>>,
    alphabets: Vec<usize>,
}

impl Sampler {
    fn new(info: &InfoStructure, state: usize) -> Self {
        let joint = info.joint_f64(state);
        let mut acc = 0.0;
        let cdf: Vec<f64> = joint
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        let last = joint.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let signals = (0..joint.len())
            .map(|f| (0..info.num_agents()).map(|a| info.signal_of(f, a)).collect())
            .collect();
        Sampler {
            cdf,
            last,
            signals,
            alphabets: info.alphabets().to_vec(),
        }
    }

    /// Per-agent counts of one path.
    fn path(&self, seed: u64, index: u64, t: u32) -> Vec<Vec<u32>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut joint = vec![0u32; self.cdf.len()];
        for _ in 0..t {
            let u: f64 = rng.random();
            let f = self.cdf.partition_point(|&c| c <= u).min(self.last);
            joint[f] += 1;
        }
        let mut counts: Vec<Vec<u32>> = self.alphabets.iter().map(|&k| vec![0; k]).collect();
        for (f, &n) in joint.iter().enumerate() {
            if n > 0 {
                for (a, &x) in self.signals[f].iter().enumerate() {
                    counts[a][x] += n;
                }
            }
        }
        counts
    }
}

/// Applies `f` to the counts of every path and returns the results in path
/// order.
pub fn map_paths<T, F>(plan: &SimulationPlan, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[Vec<u32>]) -> T + Sync + Send,
{
    let sampler = Sampler::new(plan.info, plan.state);
    let n = plan.n as usize;
    let chunks = n.div_ceil(CHUNK);
    parallel::map_range(chunks, |c| {
        (c * CHUNK..((c + 1) * CHUNK).min(n))
            .map(|i| f(&sampler.path(plan.seed, i as u64, plan.t)))
            .collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Count profiles of all paths, in path order.
pub fn sample_paths(plan: &SimulationPlan) -> Vec<CountProfile> {
    map_paths(plan, |c| {
        CountProfile::new(c.iter().map(|v| CountVector::new(v.clone())).collect()).expect("equal horizons")
    })
}

fn count_hits<F>(plan: &SimulationPlan, f: F) -> u64
where
    F: Fn(&[Vec<u32>]) -> bool + Sync + Send,
{
    let sampler = Sampler::new(plan.info, plan.state);
    let n = plan.n as usize;
    parallel::map_range(n.div_ceil(CHUNK), |c| {
        (c * CHUNK..((c + 1) * CHUNK).min(n))
            .filter(|&i| f(&sampler.path(plan.seed, i as u64, plan.t)))
            .count() as u64
    })
    .into_iter()
    .sum()
}

/// A test on one path's final counts, indexed `[agent][signal]`.
pub type PathPredicate<'e> = Box<dyn Fn(&[Vec<u32>]) -> bool + Sync + Send + 'e>;

pub enum Target<'e> {
    /// Membership in the plan state's row of an exact event.
    Event(&'e EpistemicEvent),
    Predicate(PathPredicate<'e>),
}

pub fn estimate_event(plan: &SimulationPlan, target: &Target) -> Result<Estimate> {
    let hits = match target {
        Target::Event(f) => {
            if f.horizon() != plan.t {
                return Err(Error::HorizonMismatch {
                    expected: plan.t,
                    found: f.horizon(),
                });
            }
            if f.num_states() != plan.info.num_states() || f.alphabets() != plan.info.alphabets() {
                return Err(Error::InvalidArgument("event does not match the structure".into()));
            }
            let space = ProfileSpace::new(plan.t, f.alphabets());
            let row = f.slice(plan.state);
            count_hits(plan, |c| {
                let idx: usize = c
                    .iter()
                    .enumerate()
                    .map(|(a, v)| space.agent_space(a).index_of_counts(v).expect("counts at horizon") * space.stride(a))
                    .sum();
                row[idx]
            })
        }
        Target::Predicate(p) => count_hits(plan, p),
    };
    Ok(Estimate::from_counts(hits, plan.n))
}

/// Membership test for `I_tε(Q)` on raw counts, usable at any horizon the
/// per-agent count spaces fit in memory.
pub fn ball_predicate(
    info: &InfoStructure,
    t: u32,
    epsilon: f64,
    set: &[usize],
) -> Result<impl Fn(&[Vec<u32>]) -> bool + Sync + Send + use<>> {
    operators::state_mask(info, set)?;
    let balls: Vec<Vec<Vec<bool>>> = set
        .iter()
        .map(|&s| operators::ball_sets(info, t, epsilon, s))
        .collect::<Result<_>>()?;
    let spaces: Vec<_> = info.alphabets().iter().map(|&k| crate::counts::CountSpace::new(t, k)).collect();
    Ok(move |c: &[Vec<u32>]| {
        let idx: Vec<usize> = c
            .iter()
            .zip(&spaces)
            .map(|(v, s)| s.index_of_counts(v).expect("counts at horizon"))
            .collect();
        balls
            .iter()
            .any(|sets| sets.iter().zip(&idx).all(|(set, &i)| set[i]))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub counts: Vec<u32>,
    pub paths: u64,
    pub hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPrediction {
    pub state: usize,
    pub from: usize,
    pub to: usize,
    pub t: u32,
    pub epsilon: f64,
    pub lambda: f64,
    /// `(1 − λ) ε`.
    pub threshold: f64,
    pub estimate: Estimate,
    /// Least conditional frequency over bins with at least [`MIN_BIN`] paths.
    pub min_conditional: Option<f64>,
    pub bins: Vec<Bin>,
    /// Bins observed fewer than [`MIN_BIN`] times.
    pub sparse_bins: usize,
    pub sparse_paths: u64,
}

/// Estimates `P^θ(‖φ̂_ℓ M − φ̂_ℓ'‖_TV ≤ (1 − λ) ε)` with `λ` the global
/// contraction coefficient, and the same frequency within each bin of
/// agent `from`'s own counts.
#[allow(clippy::too_many_arguments)]
pub fn verify_conditional_prediction(
    info: &InfoStructure,
    state: usize,
    from: usize,
    to: usize,
    t: u32,
    epsilon: f64,
    n: u64,
    seed: u64,
) -> Result<ConditionalPrediction> {
    info.check_agent(from)?;
    info.check_agent(to)?;
    if from == to {
        return Err(Error::InvalidArgument("the two agents must differ".into()));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("empirical measures need t >= 1".into()));
    }
    let plan = SimulationPlan::new(info, state, t, n, seed)?;
    let m = contraction::prediction_matrix(info, state, from, to)?;
    let lambda = crate::rational::to_f64(&contraction::global_contraction_coefficient(info)?);
    let threshold = (1.0 - lambda) * epsilon;
    let rows = m.rows_f64();
    let tf = t as f64;
    let space = crate::counts::CountSpace::new(t, info.alphabet(from));
    let outcomes = map_paths(&plan, |c| {
        let own = &c[from];
        let mut predicted = vec![0.0; info.alphabet(to)];
        for (x, &k) in own.iter().enumerate() {
            for (y, p) in predicted.iter_mut().enumerate() {
                *p += k as f64 / tf * rows[x][y];
            }
        }
        let tv: f64 = 0.5
            * predicted
                .iter()
                .zip(&c[to])
                .map(|(p, &k)| (p - k as f64 / tf).abs())
                .sum::<f64>();
        (space.index_of_counts(own).expect("counts at horizon"), tv <= threshold + 1e-12)
    });
    let mut paths = vec![0u64; space.len()];
    let mut hits = vec![0u64; space.len()];
    for &(i, ok) in &outcomes {
        paths[i] += 1;
        hits[i] += ok as u64;
    }
    let total: u64 = hits.iter().sum();
    let mut bins = Vec::new();
    let (mut sparse_bins, mut sparse_paths) = (0, 0);
    for i in 0..space.len() {
        if paths[i] >= MIN_BIN {
            bins.push(Bin {
                counts: space.vector(i).counts().to_vec(),
                paths: paths[i],
                hits: hits[i],
            });
        } else if paths[i] > 0 {
            sparse_bins += 1;
            sparse_paths += paths[i];
        }
    }
    let min_conditional = bins
        .iter()
        .map(|b| b.hits as f64 / b.paths as f64)
        .min_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ConditionalPrediction {
        state,
        from,
        to,
        t,
        epsilon,
        lambda,
        threshold,
        estimate: Estimate::from_counts(total, n),
        min_conditional,
        bins,
        sparse_bins,
        sparse_paths,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    Exact,
    MonteCarlo { n: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: u32,
    pub ball: f64,
    /// Standard error of `ball` in Monte Carlo mode.
    pub ball_se: Option<f64>,
    pub n: Option<u64>,
    /// `P^θ(B^q_t(Q))`, exact mode only.
    pub mutual: Option<f64>,
    /// `P^θ(C^q_t(Q))`, exact mode only.
    pub common: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn convergence_curve(
    info: &InfoStructure,
    state: usize,
    q: f64,
    epsilon: f64,
    set: &[usize],
    t_grid: &[u32],
    mode: CurveMode,
    config: &EngineConfig,
) -> Result<Vec<CurveRow>> {
    info.check_state(state)?;
    operators::state_mask(info, set)?;
    t_grid
        .iter()
        .map(|&t| match mode {
            CurveMode::Exact => {
                let h = Horizon::new(info, t, *config)?;
                let ball = h.identified_ball_event(epsilon, set)?;
                let f = h.state_event(set)?;
                let b = h.mutual_belief_operator(q, &f)?;
                let c = h.common_belief_event(q, &f, CommonBeliefRule::Literal)?;
                Ok(CurveRow {
                    t,
                    ball: h.event_probability(&ball, Some(state))?,
                    ball_se: None,
                    n: None,
                    mutual: Some(h.event_probability(&b, Some(state))?),
                    common: Some(h.event_probability(&c.event, Some(state))?),
                })
            }
            CurveMode::MonteCarlo { n, seed } => {
                let plan = SimulationPlan::new(info, state, t, n, seed)?;
                let p = ball_predicate(info, t, epsilon, set)?;
                let e = estimate_event(&plan, &Target::Predicate(Box::new(p)))?;
                Ok(CurveRow {
                    t,
                    ball: e.p_hat,
                    ball_se: Some(e.se),
                    n: Some(n),
                    mutual: None,
                    common: None,
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example1::{self, THETA1, THETA2, THETA3, THETA4};

    #[test]
    fn zero_horizon_paths() {
        let info = example1::structure();
        let plan = SimulationPlan::new(&info, THETA1, 0, 5, 1).unwrap();
        for p in sample_paths(&plan) {
            assert!(p.vectors().iter().all(|v| v.counts() == [0, 0]));
        }
        assert!(SimulationPlan::new(&info, THETA1, 1, 0, 1).is_err());
    }

    #[test]
    fn paths_are_reproducible() {
        let info = example1::structure();
        let plan = SimulationPlan::new(&info, THETA2, 17, 3000, 99).unwrap();
        let a = sample_paths(&plan);
        assert_eq!(a, sample_paths(&plan));
        let other = SimulationPlan { seed: 100, ..plan };
        assert_ne!(a, sample_paths(&other));
        // a prefix of paths is the same in a shorter plan
        let short = SimulationPlan { n: 10, ..plan };
        assert_eq!(&a[..10], sample_paths(&short).as_slice());
    }

    #[test]
    fn law_of_large_numbers() {
        let info = example1::structure();
        let plan = SimulationPlan::new(&info, THETA4, 10_000, 1, 7).unwrap();
        let p = &sample_paths(&plan)[0];
        let freq = p.agent(0).counts()[0] as f64 / 10_000.0;
        assert!((freq - 0.6).abs() < 0.02, "{freq}");
    }

    #[test]
    fn full_event_and_mismatch() {
        let info = example1::structure();
        let space = ProfileSpace::new(5, &[2, 2]);
        let full = EpistemicEvent::full(&space, 4);
        let plan = SimulationPlan::new(&info, THETA3, 5, 200, 3).unwrap();
        let e = estimate_event(&plan, &Target::Event(&full)).unwrap();
        assert_eq!((e.p_hat, e.se, e.half_width), (1.0, 0.0, 0.0));
        let other = SimulationPlan { t: 6, ..plan };
        assert!(matches!(
            estimate_event(&other, &Target::Event(&full)),
            Err(Error::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn event_and_predicate_agree() {
        let info = example1::structure();
        let h = Horizon::new(&info, 40, EngineConfig::default()).unwrap();
        let f = h.identified_ball_event(0.05, &[THETA1, THETA2, THETA3]).unwrap();
        let plan = SimulationPlan::new(&info, THETA2, 40, 5000, 11).unwrap();
        let a = estimate_event(&plan, &Target::Event(&f)).unwrap();
        let p = ball_predicate(&info, 40, 0.05, &[THETA1, THETA2, THETA3]).unwrap();
        let b = estimate_event(&plan, &Target::Predicate(Box::new(p))).unwrap();
        assert_eq!(a, b);
        let exact = h.event_probability(&f, Some(THETA2)).unwrap();
        assert!((a.p_hat - exact).abs() <= 4.0 * a.se, "{a:?} {exact}");
    }

    #[test]
    fn conditional_prediction_extremes() {
        let info = example1::structure();
        let r = verify_conditional_prediction(&info, THETA1, 0, 1, 50, 1.0, 2000, 5).unwrap();
        assert_eq!(r.estimate.p_hat, 1.0);
        let r = verify_conditional_prediction(&info, THETA1, 0, 1, 1, 1e-6, 2000, 5).unwrap();
        assert_eq!(r.estimate.p_hat, 0.0);
        assert_eq!(r.lambda, 0.5);
        assert_eq!(r.bins.iter().map(|b| b.paths).sum::<u64>() + r.sparse_paths, 2000);
        assert!(verify_conditional_prediction(&info, THETA1, 0, 0, 5, 0.1, 10, 5).is_err());
    }

    #[test]
    fn curve_at_q_zero() {
        let info = example1::structure();
        let rows = convergence_curve(&info, THETA4, 0.0, 0.05, &[THETA4], &[5, 10], CurveMode::Exact, &EngineConfig::default())
            .unwrap();
        for r in &rows {
            assert!((r.mutual.unwrap() - 1.0).abs() < 1e-12);
            assert!((r.common.unwrap() - 1.0).abs() < 1e-12);
        }
        let mc = convergence_curve(
            &info,
            THETA4,
            0.9,
            0.05,
            &[THETA4],
            &[10],
            CurveMode::MonteCarlo { n: 500, seed: 1 },
            &EngineConfig::default(),
        )
        .unwrap();
        assert!(mc[0].mutual.is_none() && mc[0].ball_se.is_some());
    }

    #[test]
    fn estimate_formula() {
        let e = Estimate::from_counts(25, 100);
        assert_eq!(e.p_hat, 0.25);
        assert!((e.se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert!((e.half_width - 3.0 * e.se).abs() < 1e-15);
        assert!(e.covers(0.3) && !e.covers(0.5));
    }
}
