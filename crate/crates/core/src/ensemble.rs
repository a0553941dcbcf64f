//! Seeded Monte Carlo ensembles of independent trajectories.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{init_state_with, Currency, Dynamics, InitFractions, TcpState};
use crate::error::{Error, Result};

pub const DEFAULT_RUNS: usize = 10_000;

/// How a run chooses the initial fractions of non-seed countries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitPolicy {
    Fixed(Vec<f64>),
    /// 1/K for every country.
    Uniform,
    /// A fresh point drawn uniformly on the simplex for each run.
    Resampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_runs: usize,
    pub master_seed: u64,
    pub init: InitPolicy,
    pub tau_max: usize,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl EnsembleSpec {
    pub fn new(n_runs: usize, master_seed: u64, init: InitPolicy, tau_max: usize) -> Self {
        Self {
            n_runs,
            master_seed,
            init,
            tau_max,
            workers: None,
        }
    }
}

/// RNG stream of run `run` under `master_seed`.
pub fn run_rng(master_seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run);
    rng
}

/// Point drawn uniformly from the (k-1)-simplex.
pub fn sample_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut e: Vec<f64> = (0..k)
        .map(|_| {
            let u: f64 = rng.random();
            -(1.0 - u).ln()
        })
        .collect();
    let total: f64 = e.iter().sum();
    if total == 0.0 {
        return vec![1.0 / k as f64; k];
    }
    e.iter_mut().for_each(|v| *v /= total);
    e
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub final_state: TcpState,
    pub tau: usize,
    pub converged: bool,
    pub trajectory: Vec<Vec<f64>>,
}

/// One trajectory of the ensemble, fully determined by `(master_seed, run)`.
pub fn simulate_run(
    dynamics: &Dynamics,
    seeds: &[Option<Currency>],
    spec: &EnsembleSpec,
    run: u64,
) -> Result<RunOutcome> {
    let k = dynamics.k();
    let mut rng = run_rng(spec.master_seed, run);
    let probs = match &spec.init {
        InitPolicy::Fixed(f) => InitFractions::Fixed(f.clone()).probabilities(k)?,
        InitPolicy::Uniform => InitFractions::Uniform.probabilities(k)?,
        InitPolicy::Resampled => sample_simplex(k, &mut rng),
    };
    let state = init_state_with(seeds, &probs, &mut rng);
    let steady = dynamics.run_to_steady(state, spec.tau_max, &mut rng)?;
    Ok(RunOutcome {
        final_state: steady.state,
        tau: steady.tau,
        converged: steady.converged,
        trajectory: steady.trajectory,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub n_runs: usize,
    /// f_f: mean final fraction of countries per currency.
    pub mean_final_fractions: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// N x K: how often each country ended with each currency.
    pub per_country_frequency: Vec<Vec<f64>>,
    pub modal_tcp: Vec<Currency>,
    pub convergence_rate: f64,
    pub mean_tau: f64,
    pub taus: Vec<usize>,
    pub converged: Vec<bool>,
    /// Mean currency fractions at tau = 0, 1, ...; finished runs hold their
    /// final fractions.
    pub mean_trajectory: Vec<Vec<f64>>,
}

impl EnsembleResult {
    pub fn k(&self) -> usize {
        self.mean_final_fractions.len()
    }

    /// Fraction of runs that converged within `tau` sweeps.
    pub fn converged_within(&self, tau: usize) -> f64 {
        let ok = self
            .taus
            .iter()
            .zip(&self.converged)
            .filter(|(t, c)| **c && **t <= tau)
            .count();
        ok as f64 / self.n_runs as f64
    }

    pub fn non_converged_runs(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    pub fn modal_state(&self, seeds: &[Option<Currency>]) -> TcpState {
        TcpState {
            prefs: self.modal_tcp.clone(),
            frozen: seeds.iter().map(Option::is_some).collect(),
        }
    }
}

/// Run `spec.n_runs` independent trajectories and aggregate them in run
/// order, so the result does not depend on the number of workers.
pub fn run_ensemble(
    dynamics: &Dynamics,
    seeds: &[Option<Currency>],
    spec: &EnsembleSpec,
) -> Result<EnsembleResult> {
    if spec.n_runs == 0 {
        return Err(Error::InvalidParameter("n_runs must be at least 1".into()));
    }
    if seeds.len() != dynamics.len() {
        return Err(Error::InvalidParameter(
            "seed assignment does not match the network".into(),
        ));
    }
    let runs = || -> Result<Vec<RunOutcome>> {
        (0..spec.n_runs as u64)
            .into_par_iter()
            .map(|i| simulate_run(dynamics, seeds, spec, i))
            .collect()
    };
    let outcomes = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(runs)?,
        None => runs()?,
    };
    Ok(aggregate(&outcomes, dynamics.k(), dynamics.len()))
}

fn aggregate(outcomes: &[RunOutcome], k: usize, n: usize) -> EnsembleResult {
    let runs = outcomes.len();
    let rf = runs as f64;
    // Integer per-run counts keep the moments exact.
    let mut sum = vec![0u128; k];
    let mut sum_sq = vec![0u128; k];
    for o in outcomes {
        let mut held = vec![0u128; k];
        for p in &o.final_state.prefs {
            held[p.id()] += 1;
        }
        for j in 0..k {
            sum[j] += held[j];
            sum_sq[j] += held[j] * held[j];
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|&s| s as f64 / (rf * nf)).collect();
    let standard_errors = (0..k)
        .map(|j| {
            if runs < 2 {
                return 0.0;
            }
            let r = runs as u128;
            let ss = (r * sum_sq[j] - sum[j] * sum[j]) as f64 / (rf * nf * nf);
            (ss / (rf - 1.0) / rf).sqrt()
        })
        .collect();

    let mut counts = vec![vec![0usize; k]; n];
    for o in outcomes {
        for (c, p) in o.final_state.prefs.iter().enumerate() {
            counts[c][p.id()] += 1;
        }
    }
    let modal_tcp = counts
        .iter()
        .map(|row| {
            let max = *row.iter().max().expect("k >= 1");
            Currency(row.iter().position(|&v| v == max).expect("max exists") as u8)
        })
        .collect();
    let per_country_frequency = counts
        .iter()
        .map(|row| row.iter().map(|&v| v as f64 / rf).collect())
        .collect();

    let max_len = outcomes
        .iter()
        .map(|o| o.trajectory.len())
        .max()
        .unwrap_or(1);
    let mut mean_trajectory = vec![vec![0.0; k]; max_len];
    for o in outcomes {
        let last = o.trajectory.last().expect("trajectory has tau = 0");
        for (t, acc) in mean_trajectory.iter_mut().enumerate() {
            let point = o.trajectory.get(t).unwrap_or(last);
            for (a, v) in acc.iter_mut().zip(point) {
                *a += v;
            }
        }
    }
    for row in &mut mean_trajectory {
        row.iter_mut().for_each(|v| *v /= rf);
    }

    let taus: Vec<usize> = outcomes.iter().map(|o| o.tau).collect();
    let converged: Vec<bool> = outcomes.iter().map(|o| o.converged).collect();
    EnsembleResult {
        n_runs: runs,
        mean_final_fractions: mean,
        standard_errors,
        per_country_frequency,
        modal_tcp,
        convergence_rate: converged.iter().filter(|c| **c).count() as f64 / rf,
        mean_tau: taus.iter().sum::<usize>() as f64 / rf,
        taus,
        converged,
        mean_trajectory,
    }
}

/// Mean final fractions under several initial policies and their spread.
#[derive(Clone, Debug, Serialize)]
pub struct InitSensitivity {
    pub means: Vec<Vec<f64>>,
    pub standard_errors: Vec<Vec<f64>>,
    /// Largest |difference| between any two policies over all currencies.
    pub max_deviation: f64,
    /// That deviation divided by the combined standard error of the pair.
    pub max_deviation_in_se: f64,
}

pub fn initial_condition_check(
    dynamics: &Dynamics,
    seeds: &[Option<Currency>],
    base: &EnsembleSpec,
    policies: &[InitPolicy],
) -> Result<InitSensitivity> {
    let results = policies
        .iter()
        .map(|p| {
            let spec = EnsembleSpec {
                init: p.clone(),
                ..base.clone()
            };
            run_ensemble(dynamics, seeds, &spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut max_deviation: f64 = 0.0;
    let mut max_in_se: f64 = 0.0;
    for a in 0..results.len() {
        for b in a + 1..results.len() {
            for j in 0..dynamics.k() {
                let d =
                    (results[a].mean_final_fractions[j] - results[b].mean_final_fractions[j]).abs();
                let se = results[a].standard_errors[j].hypot(results[b].standard_errors[j]);
                max_deviation = max_deviation.max(d);
                let ratio = if se > 0.0 {
                    d / se
                } else if d > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                };
                max_in_se = max_in_se.max(ratio);
            }
        }
    }
    Ok(InitSensitivity {
        means: results
            .iter()
            .map(|r| r.mean_final_fractions.clone())
            .collect(),
        standard_errors: results.iter().map(|r| r.standard_errors.clone()).collect(),
        max_deviation,
        max_deviation_in_se: max_in_se,
    })
}
