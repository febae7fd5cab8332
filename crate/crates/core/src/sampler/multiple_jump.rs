//! The multiple-jump chain: flips element i with probability q_i(m)·ε_s,
//! independently per element, so a single iteration can move anywhere in the
//! space.

use std::time::Instant;

use super::{validate_burn_in, MaxJumpCap};
use crate::error::SamplerError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::posterior::PosteriorModel;
use crate::rates::{compute_rates, RateVector};
use crate::rng::{streams, CounterRng};
use crate::schedule::EpsilonSchedule;
use crate::trace::{BurnInRule, ChainTrace, TraceBuilder, TraceKind, TraceOptions};

/// One multiple-jump transition. Element i flips iff its uniform draw at
/// counter (iteration, i) falls below q_i·ε; when an active cap is exceeded,
/// a uniformly random subset of the sampled flips of size ⌈r·k⌉ is kept.
/// Returns the new state and the applied flip indices (ascending).
pub fn mj_step<S: Real>(
    m: &BinaryModel,
    rates: &RateVector<S>,
    epsilon: S,
    cap: Option<&MaxJumpCap>,
    rng: &CounterRng,
    iteration: usize,
) -> (BinaryModel, Vec<u32>) {
    debug_assert!(epsilon > S::zero() && epsilon < S::one());
    debug_assert_eq!(
        rates.state_fingerprint(),
        m.fingerprint(),
        "rates were computed at a different state"
    );
    let k = m.len();
    let mut flips: Vec<u32> = Vec::new();
    for i in 0..k {
        let u = S::from_f64(rng.uniform(streams::FLIP, iteration as u64, i as u64));
        if u < rates.get(i) * epsilon {
            flips.push(i as u32);
        }
    }
    if let Some(cap) = cap {
        if cap.is_active(iteration) {
            let limit = cap.flip_limit(k);
            if flips.len() > limit {
                // Partial Fisher-Yates over the sampled set.
                for j in 0..limit {
                    let u = rng.uniform(streams::CAP_SELECT, iteration as u64, j as u64);
                    let pick = (j + (u * (flips.len() - j) as f64) as usize).min(flips.len() - 1);
                    flips.swap(j, pick);
                }
                flips.truncate(limit);
                flips.sort_unstable();
            }
        }
    }
    let mut next = m.clone();
    for &i in &flips {
        next.flip(i as usize);
    }
    (next, flips)
}

#[derive(Clone, Debug)]
pub struct MjStepRecord<S> {
    pub iteration: usize,
    pub epsilon: S,
    pub flips: Vec<u32>,
}

/// Stepping interface to the multiple-jump chain; use this directly when you
/// need per-iteration control (metric snapshots, custom stopping rules,
/// per-sample parameter draws).
pub struct MjChain<'m, S: Real, M: PosteriorModel<S> + ?Sized> {
    model: &'m M,
    schedule: EpsilonSchedule<S>,
    cap: Option<MaxJumpCap>,
    rng: CounterRng,
    state: BinaryModel,
    iteration: usize,
}

impl<'m, S: Real, M: PosteriorModel<S> + ?Sized> MjChain<'m, S, M> {
    pub fn new(
        model: &'m M,
        initial: &BinaryModel,
        schedule: EpsilonSchedule<S>,
        cap: Option<MaxJumpCap>,
        seed: u64,
    ) -> Result<Self, SamplerError> {
        if initial.len() != model.dim() {
            return Err(SamplerError::InvalidInput(format!(
                "initial model has {} elements, model space has {}",
                initial.len(),
                model.dim()
            )));
        }
        Ok(Self {
            model,
            schedule,
            cap,
            rng: CounterRng::new(seed),
            state: initial.clone(),
            iteration: 0,
        })
    }

    pub fn state(&self) -> &BinaryModel {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn step(&mut self) -> Result<MjStepRecord<S>, SamplerError> {
        let s = self.iteration + 1;
        let rates = compute_rates(self.model, &self.state)
            .map_err(|source| SamplerError::Eval { iteration: s, source })?;
        let epsilon = self.schedule.evaluate(s)?;
        let (next, flips) = mj_step(
            &self.state,
            &rates,
            epsilon,
            self.cap.as_ref(),
            &self.rng,
            s,
        );
        self.state = next;
        self.iteration = s;
        Ok(MjStepRecord {
            iteration: s,
            epsilon,
            flips,
        })
    }
}

/// Runs the multiple-jump chain for `iterations` steps and records a trace.
/// Sample s is the state before iteration s; inclusion accumulators cover
/// samples with s > burn_in·S. Identical inputs and seed give a bit-identical
/// trace for any thread count.
pub fn run_mj_mcmc<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    initial: &BinaryModel,
    schedule: &EpsilonSchedule<S>,
    iterations: usize,
    cap: Option<MaxJumpCap>,
    burn_in: f64,
    seed: u64,
    opts: &TraceOptions,
) -> Result<ChainTrace<S>, SamplerError> {
    run_mj_mcmc_with_observer(
        model, initial, schedule, iterations, cap, burn_in, seed, opts,
        |_, _| {},
    )
}

/// [`run_mj_mcmc`] with a per-sample callback receiving (s, m^(s)) for every
/// sample of the chain. This is the hook for drawing model-associated
/// parameters θ ~ p(θ | m, y) alongside the model chain: sampling θ for each
/// visited model yields draws from the joint posterior.
#[allow(clippy::too_many_arguments)]
pub fn run_mj_mcmc_with_observer<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    initial: &BinaryModel,
    schedule: &EpsilonSchedule<S>,
    iterations: usize,
    cap: Option<MaxJumpCap>,
    burn_in: f64,
    seed: u64,
    opts: &TraceOptions,
    mut observer: impl FnMut(usize, &BinaryModel),
) -> Result<ChainTrace<S>, SamplerError> {
    if iterations == 0 {
        return Err(SamplerError::InvalidInput("iterations must be >= 1".into()));
    }
    validate_burn_in(burn_in)?;
    let burn_in_iters = (burn_in * iterations as f64).floor() as usize;
    let mut chain = MjChain::new(model, initial, schedule.clone(), cap, seed)?;
    let mut builder = TraceBuilder::new(
        TraceKind::Discrete,
        initial,
        seed,
        BurnInRule::Iterations(burn_in_iters),
        opts,
    );
    for s in 1..=iterations {
        let started = Instant::now();
        let sample = chain.state().clone();
        observer(s, &sample);
        let rec = chain.step()?;
        builder.push(
            s,
            &sample,
            &rec.flips,
            Some(rec.epsilon),
            None,
            S::zero(),
            started.elapsed().as_secs_f64(),
            chain.state(),
        );
    }
    Ok(builder.finish(chain.state()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posterior::TabledPosterior;

    fn uniform_posterior(k: usize) -> TabledPosterior<f64> {
        TabledPosterior::from_log_probabilities(k, vec![0.0; 1 << k])
    }

    #[test]
    fn transition_probability_of_the_worked_example() {
        // q1 = q2 = 1 at (0,0); with ε = 0.9 the chance of jumping straight
        // to (1,1) is 0.81. Monte Carlo with a 3σ band.
        let model = TabledPosterior::from_probabilities(2, &[0.33, 0.33, 0.33, 0.01]);
        let m = BinaryModel::zeros(2);
        let rates = compute_rates(&model, &m).unwrap();
        let rng = CounterRng::new(2024);
        let trials = 100_000;
        let mut both = 0;
        for t in 0..trials {
            let (_, flips) = mj_step(&m, &rates, 0.9, None, &rng, t);
            if flips.len() == 2 {
                both += 1;
            }
        }
        let freq = both as f64 / trials as f64;
        let sigma = (0.81 * 0.19 / trials as f64).sqrt();
        assert!(
            (freq - 0.81).abs() < 3.0 * sigma,
            "freq {} not within 3σ of 0.81",
            freq
        );
    }

    #[test]
    fn flip_count_mean_matches_binomial() {
        // k=3, all q=1, ε=0.5: flips per step ~ Binomial(3, 0.5).
        let model = uniform_posterior(3);
        let m = BinaryModel::zeros(3);
        let rates = compute_rates(&model, &m).unwrap();
        let rng = CounterRng::new(7);
        let steps = 1_000_000;
        let mut total = 0u64;
        for t in 0..steps {
            let (_, flips) = mj_step(&m, &rates, 0.5, None, &rng, t);
            total += flips.len() as u64;
        }
        let mean = total as f64 / steps as f64;
        let sigma_mean = (3.0 * 0.25f64).sqrt() / (steps as f64).sqrt();
        assert!(
            (mean - 1.5).abs() < 3.0 * sigma_mean,
            "mean {} not within 3σ of 1.5",
            mean
        );
    }

    #[test]
    fn vanishing_epsilon_means_self_transitions() {
        let model = uniform_posterior(4);
        let m = BinaryModel::from_index(9, 4);
        let rates = compute_rates(&model, &m).unwrap();
        let rng = CounterRng::new(1);
        for t in 0..10_000 {
            let (next, flips) = mj_step(&m, &rates, 1e-9, None, &rng, t);
            assert!(flips.is_empty());
            assert_eq!(next, m);
        }
    }

    #[test]
    fn active_cap_limits_flips() {
        let model = uniform_posterior(8);
        let m = BinaryModel::zeros(8);
        let rates = compute_rates(&model, &m).unwrap();
        let rng = CounterRng::new(3);
        let cap = MaxJumpCap::new(0.25, 5).unwrap(); // limit = 2
        for t in 1..=5 {
            let (_, flips) = mj_step(&m, &rates, 0.9, Some(&cap), &rng, t);
            assert!(flips.len() <= 2, "cap violated at iteration {}", t);
            assert!(flips.windows(2).all(|w| w[0] < w[1]));
        }
        // Past the window the cap no longer binds; ε=0.9 with q=1 flips ~7.2
        // of 8 elements on average, so some step exceeds 2.
        let mut saw_large = false;
        for t in 6..30 {
            let (_, flips) = mj_step(&m, &rates, 0.9, Some(&cap), &rng, t);
            saw_large |= flips.len() > 2;
        }
        assert!(saw_large);
    }

    #[test]
    fn two_state_inclusion_is_half() {
        // k=1, π uniform: inclusion probability 0.5; with ε=0.5 the chain is
        // iid so the 3σ band is the Bernoulli one.
        let model = uniform_posterior(1);
        let schedule = EpsilonSchedule::constant(0.5).unwrap();
        let trace = run_mj_mcmc(
            &model,
            &BinaryModel::zeros(1),
            &schedule,
            100_000,
            None,
            0.0,
            42,
            &TraceOptions::default(),
        )
        .unwrap();
        let incl = trace.inclusion_probabilities().unwrap()[0];
        let band = 3.0 * (0.25f64 / 100_000.0).sqrt();
        assert!((incl - 0.5).abs() < band, "inclusion {} off 0.5", incl);
    }

    #[test]
    fn trace_is_deterministic_across_thread_counts() {
        let model = TabledPosterior::<f64>::random(6, 1.0, 5);
        let schedule = EpsilonSchedule::slow_decay(0.4).unwrap();
        let run = || {
            run_mj_mcmc(
                &model,
                &BinaryModel::zeros(6),
                &schedule,
                500,
                Some(MaxJumpCap::with_default_window(0.5).unwrap()),
                0.25,
                99,
                &TraceOptions::default(),
            )
            .unwrap()
        };
        let a = run();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = single.install(run);
        assert!(a.deterministic_eq(&b));
    }

    #[test]
    fn observer_sees_every_sample() {
        let model = uniform_posterior(2);
        let schedule = EpsilonSchedule::constant(0.5).unwrap();
        let mut seen = Vec::new();
        run_mj_mcmc_with_observer(
            &model,
            &BinaryModel::zeros(2),
            &schedule,
            50,
            None,
            0.0,
            8,
            &TraceOptions::default(),
            |s, m| seen.push((s, m.to_index())),
        )
        .unwrap();
        assert_eq!(seen.len(), 50);
        assert_eq!(seen[0], (1, 0)); // sample 1 is the initial model
    }
}
