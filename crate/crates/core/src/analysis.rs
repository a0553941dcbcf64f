//! Report quantities derived from a final (or modal) TCP assignment.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::country::CountryIndex;
use crate::dynamics::{Currency, Dynamics, ScoreVector, TcpState};
use crate::error::{Error, Result};
use crate::wtn::{FlowStatistics, TradeMatrix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupMember {
    pub country: usize,
    pub code: String,
    pub import_ability: f64,
    pub export_ability: f64,
    pub seed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurrencyGroup {
    pub currency: Currency,
    pub code: String,
    pub members: Vec<GroupMember>,
}

impl CurrencyGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupReport {
    pub groups: Vec<CurrencyGroup>,
}

/// Descending max(P, P*), then descending P*, then ascending code.
pub fn member_order(a: &GroupMember, b: &GroupMember) -> Ordering {
    let ma = a.import_ability.max(a.export_ability);
    let mb = b.import_ability.max(b.export_ability);
    mb.total_cmp(&ma)
        .then_with(|| b.export_ability.total_cmp(&a.export_ability))
        .then_with(|| a.code.cmp(&b.code))
}

pub fn group_membership(
    prefs: &[Currency],
    seeds: &[Option<Currency>],
    stats: &FlowStatistics,
    index: &CountryIndex,
    currencies: &[String],
) -> Result<GroupReport> {
    let n = index.len();
    if prefs.len() != n || seeds.len() != n || stats.len() != n {
        return Err(Error::InvalidParameter(
            "group inputs cover different country sets".into(),
        ));
    }
    let mut groups: Vec<CurrencyGroup> = currencies
        .iter()
        .enumerate()
        .map(|(i, code)| CurrencyGroup {
            currency: Currency(i as u8),
            code: code.clone(),
            members: Vec::new(),
        })
        .collect();
    for (c, p) in prefs.iter().enumerate() {
        let group = groups.get_mut(p.id()).ok_or(Error::Dimension {
            expected: currencies.len(),
            got: p.id() + 1,
        })?;
        group.members.push(GroupMember {
            country: c,
            code: index.code(c).to_string(),
            import_ability: stats.import_ability[c],
            export_ability: stats.export_ability[c],
            seed: seeds[c] == Some(*p),
        });
    }
    for g in &mut groups {
        g.members.sort_by(member_order);
    }
    Ok(GroupReport { groups })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VolumeShareMode {
    /// (M_c + M*_c) / 2M
    #[default]
    Symmetric,
    /// M_c / M
    Import,
    /// M*_c / M
    Export,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeShares {
    pub group: Vec<f64>,
    /// Share carried by the seed countries of each group.
    pub seed: Vec<f64>,
}

pub fn volume_fractions(
    groups: &GroupReport,
    m: &TradeMatrix,
    mode: VolumeShareMode,
) -> VolumeShares {
    let imports = m.total_imports();
    let exports = m.total_exports();
    let total = m.total_volume();
    let weight = |c: usize| match mode {
        VolumeShareMode::Symmetric => (imports[c] + exports[c]) / (2.0 * total),
        VolumeShareMode::Import => imports[c] / total,
        VolumeShareMode::Export => exports[c] / total,
    };
    let group = groups
        .groups
        .iter()
        .map(|g| g.members.iter().map(|mem| weight(mem.country)).sum())
        .collect();
    let seed = groups
        .groups
        .iter()
        .map(|g| {
            g.members
                .iter()
                .filter(|mem| mem.seed)
                .map(|mem| weight(mem.country))
                .sum()
        })
        .collect();
    VolumeShares { group, seed }
}

/// Scores of every country, seeds included, against `state`.
pub fn ternary_coordinates(state: &TcpState, dynamics: &Dynamics) -> Vec<ScoreVector> {
    (0..state.len())
        .map(|c| dynamics.scores(c, state))
        .collect()
}

pub fn require_ternary(k: usize) -> Result<()> {
    if k != 3 {
        return Err(Error::Dimension {
            expected: 3,
            got: k,
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoreHistogram {
    pub bin_width: f64,
    pub bins: usize,
    /// Per currency, fraction of all countries whose score falls in each bin.
    pub fractions: Vec<Vec<f64>>,
}

pub const DEFAULT_BIN_WIDTH: f64 = 0.1;

/// Bins `[i w, (i + 1) w)`, the last bin closed at 1.
pub fn score_histogram(scores: &[ScoreVector], k: usize, bin_width: f64) -> Result<ScoreHistogram> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bin width {bin_width} must lie in (0, 1]"
        )));
    }
    let bins_f = 1.0 / bin_width;
    let bins = bins_f.round() as usize;
    if (bins_f - bins as f64).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "bin width {bin_width} does not divide 1"
        )));
    }
    let total = scores.len() as f64;
    let mut fractions = vec![vec![0.0; bins]; k];
    for s in scores.iter().filter(|s| s.defined) {
        if s.z.len() != k {
            return Err(Error::Dimension {
                expected: k,
                got: s.z.len(),
            });
        }
        for (j, z) in s.z.iter().enumerate() {
            // tolerance absorbs decimal representation error at bin edges
            let idx = ((z * bins as f64) + 1e-9).floor() as usize;
            fractions[j][idx.min(bins - 1)] += 1.0 / total;
        }
    }
    Ok(ScoreHistogram {
        bin_width,
        bins,
        fractions,
    })
}
