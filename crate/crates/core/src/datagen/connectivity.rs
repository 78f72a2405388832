//! Connectivity query sets with balanced labels.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hypergraph::TaskTarget;
use crate::oracles::connectivity_oracle;
use crate::seed;

use super::er::{gen_er_graph_rng, EdgeTier};
use super::{balanced_pair_mask, DatagenError, GenOptions, Sample};

const MAX_RETRIES: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConnectivityProvenance {
    n: usize,
    seed: u64,
    k: Option<usize>,
    er: super::er::ErProvenance,
    queries: usize,
    retries: usize,
}

/// Generates one all-pairs connectivity sample: an Erdős–Rényi graph (tier
/// drawn per sample unless fixed) with a query mask holding equally many
/// positive and negative ordered pairs. Graphs whose pairs are all-true or
/// all-false are regenerated from a derived seed.
pub fn gen_connectivity_sample(
    n: usize,
    k: Option<usize>,
    sample_seed: u64,
    options: &GenOptions,
) -> Result<Sample, DatagenError> {
    for retry in 0..MAX_RETRIES {
        let mut rng = seed::rng(sample_seed, "connectivity", retry as u64);
        let tier = options
            .tier
            .unwrap_or_else(|| *EdgeTier::ALL.choose(&mut rng).unwrap());
        let (graph, er) = gen_er_graph_rng(n, tier, options.duplicate, &mut rng)?;
        let oracle = connectivity_oracle(&graph, k);
        let Some(mask) = balanced_pair_mask(&oracle, &mut rng) else {
            continue;
        };
        let queries = mask.data().iter().filter(|&&v| v != 0.0).count();
        let target = TaskTarget::new(n, 2, oracle, Some(mask))?;
        let provenance = ConnectivityProvenance {
            n,
            seed: sample_seed,
            k,
            er,
            queries,
            retries: retry,
        };
        return Ok(Sample {
            graph,
            target,
            provenance: serde_json::to_value(provenance)?,
        });
    }
    Err(DatagenError::GenerationFailed {
        task: match k {
            Some(k) => format!("connectivity{k}"),
            None => "connectivity".to_string(),
        },
        seed: sample_seed,
        retries: MAX_RETRIES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::Hypergraph;
    use crate::oracles::connectivity_oracle as oracle;

    #[test]
    fn path_graph_pairs_behave_under_the_hop_bound() {
        let path = Hypergraph::from_edge_list(
            10,
            &(0..9).map(|i| (i, i + 1)).collect::<Vec<_>>(),
            &[],
            false,
        )
        .unwrap();
        let within4 = oracle(&path, Some(4));
        assert_eq!(within4.data()[0 * 10 + 4], 1.0);
        assert_eq!(within4.data()[0 * 10 + 5], 0.0);
    }

    #[test]
    fn masks_are_balanced_and_nonempty() {
        for seed in 0..10 {
            let sample =
                gen_connectivity_sample(10, None, seed, &GenOptions::default()).unwrap();
            let mask = sample.target.mask().unwrap();
            let values = sample.target.values();
            let mut pos = 0;
            let mut neg = 0;
            for (m, v) in mask.data().iter().zip(values.data()) {
                if *m != 0.0 {
                    if *v != 0.0 {
                        pos += 1;
                    } else {
                        neg += 1;
                    }
                }
            }
            assert!(pos + neg >= 2, "mask too small");
            assert_eq!(pos, neg, "mask unbalanced: {pos} vs {neg}");
        }
    }

    #[test]
    fn determinism_per_seed() {
        let a = gen_connectivity_sample(12, Some(4), 9, &GenOptions::default()).unwrap();
        let b = gen_connectivity_sample(12, Some(4), 9, &GenOptions::default()).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.target, b.target);
    }
}
