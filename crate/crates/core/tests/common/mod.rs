//! Test-only oracles that recompute everything from the raw money matrix,
//! independently of the engine's precomputed couplings.
#![allow(dead_code, clippy::too_many_arguments, clippy::type_complexity)]

use std::collections::HashMap;

use rand::Rng;
use tradecurrency::country::ISO_ALPHA2;
use tradecurrency::{CountryIndex, TradeMatrix};

/// flows[i][e] = money exported from e to i.
pub type Flows = Vec<Vec<f64>>;

pub fn flows_of(m: &TradeMatrix) -> Flows {
    (0..m.len())
        .map(|i| (0..m.len()).map(|e| m.flow(i, e)).collect())
        .collect()
}

pub fn matrix_of(flows: &Flows, codes: &[&str]) -> TradeMatrix {
    let n = flows.len();
    let idx = CountryIndex::new(codes.iter().copied()).unwrap();
    TradeMatrix::from_dense(
        2019,
        idx,
        flows.iter().flatten().copied().collect::<Vec<_>>(),
    )
    .unwrap_or_else(|e| panic!("{e} ({n})"))
}

pub fn codes(n: usize) -> Vec<&'static str> {
    ISO_ALPHA2[..n].to_vec()
}

/// Eq. (1) evaluated term by term from M. `None` when the denominator is 0.
pub fn oracle_scores(
    flows: &Flows,
    prefs: &[usize],
    c: usize,
    k: usize,
    weights: Option<(&[f64], &[f64])>,
) -> Option<Vec<f64>> {
    let n = flows.len();
    let m_imp: Vec<f64> = (0..n).map(|x| (0..n).map(|y| flows[x][y]).sum()).collect();
    let m_exp: Vec<f64> = (0..n).map(|x| (0..n).map(|y| flows[y][x]).sum()).collect();
    let total: f64 = m_imp.iter().sum();
    // S_{c'c} = M_{c'c} / M*_c ; S*_{c'c} = M_{cc'} / M_c
    let s = |cp: usize| {
        if m_exp[c] > 0.0 {
            flows[cp][c] / m_exp[c]
        } else {
            0.0
        }
    };
    let s_star = |cp: usize| {
        if m_imp[c] > 0.0 {
            flows[c][cp] / m_imp[c]
        } else {
            0.0
        }
    };
    let w = |cp: usize| match weights {
        Some((a, b)) => a[cp] + b[cp],
        None => m_imp[cp] / total + m_exp[cp] / total,
    };
    let mut num = vec![0.0; k];
    let mut den = 0.0;
    for cp in 0..n {
        if cp == c {
            continue;
        }
        let term = (s(cp) + s_star(cp)) * w(cp);
        num[prefs[cp]] += term;
        den += term;
    }
    if den == 0.0 {
        return None;
    }
    Some(num.iter().map(|v| v / den).collect())
}

pub fn oracle_choice(z: &[f64], current: usize) -> usize {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if z[current] == max {
        current
    } else {
        z.iter().position(|&v| v == max).unwrap()
    }
}

pub fn oracle_target(flows: &Flows, prefs: &[usize], c: usize, k: usize) -> usize {
    match oracle_scores(flows, prefs, c, k, None) {
        Some(z) => oracle_choice(&z, prefs[c]),
        None => prefs[c],
    }
}

pub fn oracle_sweep(
    flows: &Flows,
    prefs: &mut [usize],
    frozen: &[bool],
    order: &[usize],
    k: usize,
) -> usize {
    let mut changes = 0;
    for &c in order {
        if frozen[c] {
            continue;
        }
        let t = oracle_target(flows, prefs, c, k);
        if t != prefs[c] {
            prefs[c] = t;
            changes += 1;
        }
    }
    changes
}

pub fn oracle_fixed(flows: &Flows, prefs: &[usize], frozen: &[bool], k: usize) -> bool {
    (0..prefs.len()).all(|c| frozen[c] || oracle_target(flows, prefs, c, k) == prefs[c])
}

pub fn random_flows<R: Rng>(n: usize, density: f64, rng: &mut R) -> Flows {
    loop {
        let mut f = vec![vec![0.0; n]; n];
        for (i, row) in f.iter_mut().enumerate() {
            for (e, v) in row.iter_mut().enumerate() {
                if i != e && rng.random::<f64>() < density {
                    *v = rng.random::<f64>() * 100.0;
                }
            }
        }
        if f.iter().flatten().any(|&v| v > 0.0) {
            return f;
        }
    }
}

/// Stationary vector of G by a direct dense solve of (I - G) p = 0 with the
/// last equation replaced by sum(p) = 1.
pub fn dense_stationary(share: &[f64], n: usize, damping: f64) -> Vec<f64> {
    let mut g = nalgebra::DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        let colsum: f64 = (0..n).map(|r| share[r * n + col]).sum();
        for row in 0..n {
            let s = if colsum == 0.0 {
                1.0 / n as f64
            } else {
                share[row * n + col]
            };
            g[(row, col)] = damping * s + (1.0 - damping) / n as f64;
        }
    }
    let mut a = nalgebra::DMatrix::<f64>::identity(n, n) - g;
    let mut b = nalgebra::DVector::<f64>::zeros(n);
    for col in 0..n {
        a[(n - 1, col)] = 1.0;
    }
    b[n - 1] = 1.0;
    let p = a.lu().solve(&b).expect("nonsingular");
    p.iter().copied().collect()
}

/// Share matrices from raw flows, row-major: S_{cc'} = M_{cc'}/M*_{c'}.
pub fn oracle_shares(flows: &Flows) -> (Vec<f64>, Vec<f64>) {
    let n = flows.len();
    let m_imp: Vec<f64> = (0..n).map(|x| flows[x].iter().sum()).collect();
    let m_exp: Vec<f64> = (0..n).map(|x| (0..n).map(|y| flows[y][x]).sum()).collect();
    let mut s = vec![0.0; n * n];
    let mut s_star = vec![0.0; n * n];
    for c in 0..n {
        for cp in 0..n {
            if m_exp[cp] > 0.0 {
                s[c * n + cp] = flows[c][cp] / m_exp[cp];
            }
            if m_imp[cp] > 0.0 {
                s_star[c * n + cp] = flows[cp][c] / m_imp[cp];
            }
        }
    }
    (s, s_star)
}

/// Six-country, three-currency fixture: seeds CN (BRI), FR (EUR), US (USD),
/// free KE, MX, TR. Index order (sorted): CN, FR, KE, MX, TR, US.
pub const FIXTURE_CODES: [&str; 6] = ["CN", "FR", "KE", "MX", "TR", "US"];

pub fn fixture_flows() -> Flows {
    // (exporter, importer, value)
    let links: [(usize, usize, f64); 18] = [
        (2, 3, 9.0),
        (3, 2, 7.5),
        (2, 4, 8.0),
        (4, 2, 6.0),
        (3, 4, 10.0),
        (4, 3, 8.5),
        (0, 2, 11.0),
        (2, 0, 4.0),
        (5, 3, 7.0),
        (3, 5, 5.5),
        (1, 4, 6.0),
        (4, 1, 5.0),
        (0, 1, 20.0),
        (1, 0, 15.0),
        (1, 5, 18.0),
        (5, 1, 16.0),
        (5, 0, 25.0),
        (0, 5, 30.0),
    ];
    let mut f = vec![vec![0.0; 6]; 6];
    for (e, i, v) in links {
        f[i][e] = v;
    }
    f
}

/// USD = 0, EUR = 1, BRI = 2.
pub fn fixture_seeds() -> Vec<Option<usize>> {
    vec![Some(2), Some(1), None, None, None, Some(0)]
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

pub struct Exact {
    /// Expected final fraction per currency.
    pub mean: Vec<f64>,
    /// Expected probability of convergence within `tau` sweeps, by tau.
    pub converged_within: Vec<f64>,
}

/// Exact expectation of the engine's stopping rule: every uniform initial
/// assignment of the free countries, every permutation at every sweep, at
/// most `tau_max` sweeps.
pub fn exhaustive(flows: &Flows, seeds: &[Option<usize>], k: usize, tau_max: usize) -> Exact {
    let n = flows.len();
    let frozen: Vec<bool> = seeds.iter().map(Option::is_some).collect();
    let free: Vec<usize> = (0..n).filter(|&c| !frozen[c]).collect();
    let perms = permutations(&free);
    let fractions = |p: &[usize]| {
        let mut f = vec![0.0; k];
        for &x in p {
            f[x] += 1.0 / n as f64;
        }
        f
    };
    // value(state, sweeps_left) -> (expected fractions, P(converged))
    fn value(
        prefs: &[usize],
        left: usize,
        flows: &Flows,
        frozen: &[bool],
        perms: &[Vec<usize>],
        k: usize,
        memo: &mut HashMap<(Vec<usize>, usize), (Vec<f64>, f64)>,
        fractions: &dyn Fn(&[usize]) -> Vec<f64>,
    ) -> (Vec<f64>, f64) {
        if let Some(v) = memo.get(&(prefs.to_vec(), left)) {
            return v.clone();
        }
        let out = if oracle_fixed(flows, prefs, frozen, k) {
            (fractions(prefs), 1.0)
        } else if left == 0 {
            (fractions(prefs), 0.0)
        } else {
            let mut acc = vec![0.0; k];
            let mut conv = 0.0;
            for order in perms {
                let mut next = prefs.to_vec();
                oracle_sweep(flows, &mut next, frozen, order, k);
                let (f, c) = value(&next, left - 1, flows, frozen, perms, k, memo, fractions);
                for (a, v) in acc.iter_mut().zip(f) {
                    *a += v / perms.len() as f64;
                }
                conv += c / perms.len() as f64;
            }
            (acc, conv)
        };
        memo.insert((prefs.to_vec(), left), out.clone());
        out
    }

    let mut memo = HashMap::new();
    let assignments = k.pow(free.len() as u32);
    let mut mean = vec![0.0; k];
    let mut converged_within = vec![0.0; tau_max + 1];
    for code in 0..assignments {
        let mut prefs: Vec<usize> = seeds.iter().map(|s| s.unwrap_or(0)).collect();
        let mut x = code;
        for &c in &free {
            prefs[c] = x % k;
            x /= k;
        }
        let (f, _) = value(
            &prefs, tau_max, flows, &frozen, &perms, k, &mut memo, &fractions,
        );
        for (m, v) in mean.iter_mut().zip(f) {
            *m += v / assignments as f64;
        }
        for (t, slot) in converged_within.iter_mut().enumerate() {
            let (_, c) = value(&prefs, t, flows, &frozen, &perms, k, &mut memo, &fractions);
            *slot += c / assignments as f64;
        }
    }
    Exact {
        mean,
        converged_within,
    }
}

/// Same countries and seeds as [`fixture_flows`], wired as a dependency
/// chain KE→CN, MX→KE, TR→MX with a single steady state that a sweep may
/// need several passes to reach.
pub fn chain_fixture_flows() -> Flows {
    let links: [(usize, usize, f64); 14] = [
        (2, 0, 100.0),
        (0, 2, 90.0),
        (2, 3, 20.0),
        (3, 2, 18.0),
        (3, 5, 4.0),
        (5, 3, 3.0),
        (3, 4, 9.0),
        (4, 3, 8.0),
        (4, 1, 2.0),
        (1, 4, 1.5),
        (1, 5, 50.0),
        (5, 1, 45.0),
        (0, 1, 40.0),
        (1, 0, 35.0),
    ];
    let mut f = vec![vec![0.0; 6]; 6];
    for (e, i, v) in links {
        f[i][e] = v;
    }
    f
}
