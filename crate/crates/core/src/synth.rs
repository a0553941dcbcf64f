//! Random block-structured trade networks for tests and benchmarks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::country::{CountryIndex, ISO_ALPHA2};
use crate::error::{Error, Result};
use crate::wtn::TradeMatrix;

/// Flow intensity of one bloc: `internal` scales flows between two members,
/// `external` scales exports from a member to countries outside the bloc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockIntensity {
    pub internal: f64,
    pub external: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub blocks: Vec<BlockIntensity>,
}

impl BlockSpec {
    pub fn uniform(blocks: usize, internal: f64, external: f64) -> Self {
        Self {
            blocks: vec![BlockIntensity { internal, external }; blocks],
        }
    }

    /// Block of each of `n` countries; blocks are contiguous and as equal as possible.
    pub fn assignment(&self, n: usize) -> Vec<usize> {
        let b = self.blocks.len();
        (0..n).map(|i| i * b / n).collect()
    }
}

/// Flow from c' to c is `intensity * -ln(u)`, u uniform, with the intensity
/// taken from the exporter's bloc. Countries are labelled with the first `n`
/// ISO codes.
pub fn synthetic_wtn<R: Rng + ?Sized>(
    n: usize,
    spec: &BlockSpec,
    year: i32,
    rng: &mut R,
) -> Result<TradeMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "a synthetic network needs at least 2 countries".into(),
        ));
    }
    if n > ISO_ALPHA2.len() {
        return Err(Error::InvalidParameter(format!(
            "at most {} synthetic countries are supported",
            ISO_ALPHA2.len()
        )));
    }
    if spec.blocks.is_empty() || spec.blocks.len() > n {
        return Err(Error::InvalidParameter(
            "block count must lie in 1..=n".into(),
        ));
    }
    let valid = |v: f64| v.is_finite() && v >= 0.0;
    if spec
        .blocks
        .iter()
        .any(|b| !valid(b.internal) || !valid(b.external))
    {
        return Err(Error::InvalidParameter(
            "block intensities must be nonnegative".into(),
        ));
    }
    let block = spec.assignment(n);
    let mut flows = vec![0.0; n * n];
    for importer in 0..n {
        for exporter in 0..n {
            let u: f64 = rng.random();
            if importer == exporter {
                continue;
            }
            let b = spec.blocks[block[exporter]];
            let intensity = if block[importer] == block[exporter] {
                b.internal
            } else {
                b.external
            };
            flows[importer * n + exporter] = intensity * -(1.0 - u).ln();
        }
    }
    if !flows.iter().any(|&v| v > 0.0) {
        return Err(Error::InvalidParameter(
            "block spec produces no positive flow".into(),
        ));
    }
    let index = CountryIndex::new(ISO_ALPHA2[..n].iter().copied())?;
    TradeMatrix::from_dense(year, index, flows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wtn::flow_statistics;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn disconnected_blocks_are_block_diagonal() {
        let spec = BlockSpec::uniform(2, 1.0, 0.0);
        let m = synthetic_wtn(6, &spec, 2019, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let st = flow_statistics(&m);
        let block = spec.assignment(6);
        for c in 0..6 {
            for cp in 0..6 {
                if block[c] != block[cp] {
                    assert_eq!(st.s(c, cp), 0.0);
                    assert_eq!(st.s_star(c, cp), 0.0);
                }
            }
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let spec = BlockSpec::uniform(3, 1.0, 0.1);
        let a = synthetic_wtn(20, &spec, 2019, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = synthetic_wtn(20, &spec, 2019, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scaled_intensities_give_same_statistics() {
        let spec = BlockSpec::uniform(3, 1.0, 0.1);
        let big = BlockSpec::uniform(3, 7.5, 0.75);
        let a = flow_statistics(
            &synthetic_wtn(15, &spec, 2019, &mut ChaCha8Rng::seed_from_u64(5)).unwrap(),
        );
        let b = flow_statistics(
            &synthetic_wtn(15, &big, 2019, &mut ChaCha8Rng::seed_from_u64(5)).unwrap(),
        );
        for (x, y) in a.import_share().iter().zip(b.import_share()) {
            assert!((x - y).abs() < 1e-12);
        }
        for (x, y) in a.export_share().iter().zip(b.export_share()) {
            assert!((x - y).abs() < 1e-12);
        }
        for c in 0..15 {
            assert!((a.import_ability[c] - b.import_ability[c]).abs() < 1e-12);
            assert!((a.export_ability[c] - b.export_ability[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_specs_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(synthetic_wtn(5, &BlockSpec::uniform(2, 0.0, 0.0), 2019, &mut rng).is_err());
        assert!(synthetic_wtn(1, &BlockSpec::uniform(1, 1.0, 0.0), 2019, &mut rng).is_err());
        assert!(synthetic_wtn(5, &BlockSpec::uniform(2, -1.0, 0.0), 2019, &mut rng).is_err());
    }
}
