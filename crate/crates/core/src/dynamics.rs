//! Trade currency preference (TCP) states and their zero-temperature
//! asynchronous dynamics.
//!
//! Each non-seed country `c` scores every currency by the coupling-weighted
//! share of its partners currently holding it,
//!
//! ```text
//! Z_k(c) = sum_{c' != c, tcp(c') = k} A(c, c') / sum_{c' != c} A(c, c')
//! A(c, c') = (S_{c'c} + S*_{c'c}) (w_{c'} + w*_{c'})
//! ```
//!
//! and adopts the currency with the largest score. A sweep visits every
//! non-seed country once in a fresh random order, each update seeing the
//! earlier ones.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::centrality;
use crate::country::CountryIndex;
use crate::error::{Error, Result};
use crate::wtn::FlowStatistics;

/// Index into the ordered currency list of a [`CurrencyConfig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Currency(pub u8);

impl Currency {
    pub fn id(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Import and export abilities (P, P*).
    #[default]
    Direct,
    /// PageRank and CheiRank of the Google matrices of S and S*.
    Centrality,
}

pub const DEFAULT_TAU_MAX: usize = 50;

/// Currencies, seed groups and dynamics parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrencyConfig {
    pub currencies: Vec<String>,
    /// Currency code -> seed country codes.
    pub seed_groups: BTreeMap<String, Vec<String>>,
    pub weight_mode: WeightMode,
    pub tau_max: usize,
}

impl Default for CurrencyConfig {
    fn default() -> Self {
        let groups = [
            ("USD", &["AU", "US", "GB", "CA", "NZ"][..]),
            (
                "EUR",
                &["AT", "BE", "FR", "DE", "IT", "LU", "NL", "PT", "ES"][..],
            ),
            ("BRI", &["BR", "RU", "IN", "CN", "ZA"][..]),
        ];
        Self {
            currencies: vec!["USD".into(), "EUR".into(), "BRI".into()],
            seed_groups: groups
                .iter()
                .map(|(c, s)| (c.to_string(), s.iter().map(|x| x.to_string()).collect()))
                .collect(),
            weight_mode: WeightMode::Direct,
            tau_max: DEFAULT_TAU_MAX,
        }
    }
}

impl CurrencyConfig {
    pub fn k(&self) -> usize {
        self.currencies.len()
    }

    pub fn currency(&self, code: &str) -> Option<Currency> {
        self.currencies
            .iter()
            .position(|c| c == code)
            .map(|i| Currency(i as u8))
    }

    pub fn validate(&self) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::Config("at least two currencies are required".into()));
        }
        if self.k() > u8::MAX as usize {
            return Err(Error::Config("too many currencies".into()));
        }
        let unique: BTreeSet<_> = self.currencies.iter().collect();
        if unique.len() != self.k() {
            return Err(Error::Config("currency codes must be unique".into()));
        }
        if self.tau_max < 1 {
            return Err(Error::Config("tau_max must be at least 1".into()));
        }
        let mut seen: BTreeMap<&str, &str> = BTreeMap::new();
        for (cur, countries) in &self.seed_groups {
            if self.currency(cur).is_none() {
                return Err(Error::Config(format!(
                    "seed group for unknown currency {cur}"
                )));
            }
            for country in countries {
                if let Some(prev) = seen.insert(country, cur) {
                    return Err(Error::Config(format!(
                        "country {country} is a seed of both {prev} and {cur}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Per-country seed currency over `index`. Every seed country must be
    /// present in the index.
    pub fn bind_seeds(&self, index: &CountryIndex) -> Result<Vec<Option<Currency>>> {
        self.validate()?;
        let mut seeds = vec![None; index.len()];
        for (cur, countries) in &self.seed_groups {
            let id = self.currency(cur).expect("validated");
            for country in countries {
                let pos = index.position(country).ok_or_else(|| {
                    Error::Config(format!(
                        "seed country {country} ({cur}) has no trade in this year"
                    ))
                })?;
                seeds[pos] = Some(id);
            }
        }
        Ok(seeds)
    }
}

/// Per-country partner weights (w, w*) entering the coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub import: Vec<f64>,
    pub export: Vec<f64>,
}

/// Google matrix parameters used by [`WeightMode::Centrality`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        Self {
            damping: centrality::DEFAULT_DAMPING,
            tol: centrality::DEFAULT_TOL,
            max_iter: centrality::DEFAULT_MAX_ITER,
        }
    }
}

impl Weights {
    pub fn direct(stats: &FlowStatistics) -> Self {
        Self {
            import: stats.import_ability.clone(),
            export: stats.export_ability.clone(),
        }
    }

    pub fn centrality(stats: &FlowStatistics, params: RankParams) -> Result<Self> {
        let pr = centrality::pagerank_of(stats, params.damping, params.tol, params.max_iter)?;
        let cr = centrality::cheirank(stats, params.damping, params.tol, params.max_iter)?;
        Ok(Self {
            import: pr.values,
            export: cr.values,
        })
    }

    pub fn for_mode(stats: &FlowStatistics, mode: WeightMode, params: RankParams) -> Result<Self> {
        match mode {
            WeightMode::Direct => Ok(Self::direct(stats)),
            WeightMode::Centrality => Self::centrality(stats, params),
        }
    }
}

/// Currency preference of every country plus the frozen-seed mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TcpState {
    pub prefs: Vec<Currency>,
    pub frozen: Vec<bool>,
}

impl TcpState {
    pub fn len(&self) -> usize {
        self.prefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefs.is_empty()
    }

    /// Fraction of all countries holding each currency.
    pub fn fractions(&self, k: usize) -> Vec<f64> {
        let mut counts = vec![0usize; k];
        for p in &self.prefs {
            counts[p.id()] += 1;
        }
        let n = self.prefs.len() as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }
}

/// Initial currency distribution of non-seed countries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitFractions {
    /// Probability 1/K for each currency.
    Uniform,
    Fixed(Vec<f64>),
}

impl InitFractions {
    pub fn probabilities(&self, k: usize) -> Result<Vec<f64>> {
        match self {
            InitFractions::Uniform => Ok(vec![1.0 / k as f64; k]),
            InitFractions::Fixed(f) => {
                if f.len() != k {
                    return Err(Error::Dimension {
                        expected: k,
                        got: f.len(),
                    });
                }
                let sum: f64 = f.iter().sum();
                if f.iter().any(|v| v.is_nan() || *v < 0.0) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "initial fractions {f:?} are not on the simplex"
                    )));
                }
                Ok(f.clone())
            }
        }
    }
}

/// Seeds take their currency and are frozen; every other country draws its
/// currency independently from `fractions`.
pub fn init_state<R: Rng + ?Sized>(
    seeds: &[Option<Currency>],
    k: usize,
    fractions: &InitFractions,
    rng: &mut R,
) -> Result<TcpState> {
    let probs = fractions.probabilities(k)?;
    Ok(init_state_with(seeds, &probs, rng))
}

pub(crate) fn init_state_with<R: Rng + ?Sized>(
    seeds: &[Option<Currency>],
    probs: &[f64],
    rng: &mut R,
) -> TcpState {
    let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let prefs = seeds
        .iter()
        .map(|seed| match seed {
            Some(c) => *c,
            None => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = last_positive;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc && *p > 0.0 {
                        pick = i;
                        break;
                    }
                }
                Currency(pick as u8)
            }
        })
        .collect();
    TcpState {
        prefs,
        frozen: seeds.iter().map(Option::is_some).collect(),
    }
}

/// Scores Z_k of one country. `defined` is false for isolated countries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreVector {
    pub z: Vec<f64>,
    pub defined: bool,
}

/// Argmax with ties resolved in favour of `current`, then the lowest id.
pub fn choose_currency(z: &[f64], current: Currency) -> Currency {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if z[current.id()] == max {
        return current;
    }
    Currency(z.iter().position(|&v| v == max).expect("nonempty scores") as u8)
}

/// Precomputed couplings of one (statistics, weights) pair. All dynamics
/// operations run through this.
#[derive(Clone, Debug)]
pub struct Dynamics {
    n: usize,
    k: usize,
    /// A(c, c'), row-major, zero diagonal.
    coupling: Vec<f64>,
    /// Row sums of `coupling`.
    norm: Vec<f64>,
}

impl Dynamics {
    pub fn new(stats: &FlowStatistics, weights: &Weights, k: usize) -> Result<Self> {
        let n = stats.len();
        if weights.import.len() != n || weights.export.len() != n {
            return Err(Error::InvalidParameter(
                "weight vectors do not match the country index".into(),
            ));
        }
        if k == 0 || k > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "unsupported currency count {k}"
            )));
        }
        let mut coupling = vec![0.0; n * n];
        let mut norm = vec![0.0; n];
        for c in 0..n {
            let row = &mut coupling[c * n..(c + 1) * n];
            for (cp, a) in row.iter_mut().enumerate() {
                if cp != c {
                    *a = (stats.s(cp, c) + stats.s_star(cp, c))
                        * (weights.import[cp] + weights.export[cp]);
                }
            }
            norm[c] = row.iter().sum();
        }
        Ok(Self {
            n,
            k,
            coupling,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coupling(&self, c: usize, partner: usize) -> f64 {
        self.coupling[c * self.n + partner]
    }

    fn check(&self, state: &TcpState) -> Result<()> {
        if state.len() != self.n || state.frozen.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "state covers {} countries, network has {}",
                state.len(),
                self.n
            )));
        }
        if let Some(p) = state.prefs.iter().find(|p| p.id() >= self.k) {
            return Err(Error::InvalidParameter(format!(
                "currency id {} out of range",
                p.0
            )));
        }
        Ok(())
    }

    /// Writes Z into `z` (length K); returns false if undefined.
    fn scores_into(&self, c: usize, prefs: &[Currency], z: &mut [f64]) -> bool {
        z.iter_mut().for_each(|v| *v = 0.0);
        let norm = self.norm[c];
        if norm == 0.0 {
            return false;
        }
        let row = &self.coupling[c * self.n..(c + 1) * self.n];
        for (a, p) in row.iter().zip(prefs) {
            z[p.id()] += a;
        }
        z.iter_mut().for_each(|v| *v /= norm);
        true
    }

    pub fn scores(&self, c: usize, state: &TcpState) -> ScoreVector {
        let mut z = vec![0.0; self.k];
        let defined = self.scores_into(c, &state.prefs, &mut z);
        ScoreVector { z, defined }
    }

    fn target(&self, c: usize, prefs: &[Currency], z: &mut [f64]) -> Currency {
        let current = prefs[c];
        if self.scores_into(c, prefs, z) {
            choose_currency(z, current)
        } else {
            current
        }
    }

    /// Move country `c` to its best currency. Fails on frozen countries.
    pub fn update_country(&self, c: usize, state: &mut TcpState) -> Result<(Currency, bool)> {
        if state.frozen[c] {
            return Err(Error::FrozenCountry(c.to_string()));
        }
        let mut z = vec![0.0; self.k];
        let next = self.target(c, &state.prefs, &mut z);
        let changed = next != state.prefs[c];
        state.prefs[c] = next;
        Ok((next, changed))
    }

    /// Update the listed countries sequentially. Frozen entries are skipped.
    pub fn sweep_in_order(&self, state: &mut TcpState, order: &[usize]) -> usize {
        let mut z = vec![0.0; self.k];
        let mut changes = 0;
        for &c in order {
            if state.frozen[c] {
                continue;
            }
            let next = self.target(c, &state.prefs, &mut z);
            if next != state.prefs[c] {
                state.prefs[c] = next;
                changes += 1;
            }
        }
        changes
    }

    /// One asynchronous sweep over a fresh random permutation of the
    /// non-frozen countries. Returns the number of changed preferences.
    pub fn sweep<R: Rng + ?Sized>(&self, state: &mut TcpState, rng: &mut R) -> usize {
        let order = sweep_order(state, rng);
        self.sweep_in_order(state, &order)
    }

    /// True iff no non-frozen country would change when updated against the
    /// current state.
    pub fn is_fixed_point(&self, state: &TcpState) -> bool {
        let mut z = vec![0.0; self.k];
        (0..self.n)
            .all(|c| state.frozen[c] || self.target(c, &state.prefs, &mut z) == state.prefs[c])
    }

    /// Sweep until a fixed point or `tau_max` sweeps.
    pub fn run_to_steady<R: Rng + ?Sized>(
        &self,
        mut state: TcpState,
        tau_max: usize,
        rng: &mut R,
    ) -> Result<SteadyState> {
        self.check(&state)?;
        if tau_max < 1 {
            return Err(Error::InvalidParameter("tau_max must be at least 1".into()));
        }
        let mut trajectory = vec![state.fractions(self.k)];
        let mut tau = 0;
        let mut converged = self.is_fixed_point(&state);
        while !converged && tau < tau_max {
            let changes = self.sweep(&mut state, rng);
            tau += 1;
            trajectory.push(state.fractions(self.k));
            // A sweep without changes evaluated every country against the final state.
            converged = changes == 0 || self.is_fixed_point(&state);
        }
        Ok(SteadyState {
            state,
            tau,
            converged,
            trajectory,
        })
    }
}

/// Uniformly random permutation of the non-frozen countries.
pub fn sweep_order<R: Rng + ?Sized>(state: &TcpState, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..state.len()).filter(|&c| !state.frozen[c]).collect();
    order.shuffle(rng);
    order
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: TcpState,
    /// Sweeps performed.
    pub tau: usize,
    pub converged: bool,
    /// Currency fractions before the first sweep and after each sweep.
    pub trajectory: Vec<Vec<f64>>,
}

/// Z of country `c` against `state`.
pub fn currency_scores(
    c: usize,
    state: &TcpState,
    stats: &FlowStatistics,
    weights: &Weights,
    k: usize,
) -> Result<ScoreVector> {
    let dynamics = Dynamics::new(stats, weights, k)?;
    dynamics.check(state)?;
    Ok(dynamics.scores(c, state))
}
