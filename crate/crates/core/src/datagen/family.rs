//! Family-tree records and their seeded generator.
//!
//! People are added one at a time. With probability `p` the generator tries
//! to marry a single woman to a single man and makes the new person their
//! child; otherwise the new person joins as an unrelated single. `p` tracks
//! the single ratio of the existing population: 0.7 when more than 40% are
//! single, 0.3 when less than 20% are, 0.5 otherwise. Genders are fair
//! coin flips and every new person starts single.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hypergraph::{GraphError, Hypergraph, HypergraphBuilder};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
}

/// People, genders, parent edges, and marriage links.
///
/// Parent edges are stored as raw `(parent, child)` lists so that loaded
/// records can be validated (the kinship oracle rejects a child with two
/// mothers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub n: usize,
    pub genders: Vec<Gender>,
    /// `(mother, child)` pairs.
    pub mother_of: Vec<(usize, usize)>,
    /// `(father, child)` pairs.
    pub father_of: Vec<(usize, usize)>,
    /// `(wife, husband)` pairs.
    pub marriages: Vec<(usize, usize)>,
    /// Times a birth was drawn but no eligible couple existed.
    pub fallbacks: usize,
}

fn marriage_probability(single: usize, population: usize) -> f64 {
    if population == 0 {
        return 0.5;
    }
    let ratio = single as f64 / population as f64;
    if ratio > 0.4 {
        0.7
    } else if ratio < 0.2 {
        0.3
    } else {
        0.5
    }
}

/// Generates an `n`-person family record.
pub fn gen_family_tree(n: usize, seed_value: u64) -> FamilyRecord {
    let mut rng = seed::rng(seed_value, "family", 0);
    gen_family_tree_rng(n, &mut rng)
}

pub fn gen_family_tree_rng(n: usize, rng: &mut impl Rng) -> FamilyRecord {
    let mut genders = Vec::with_capacity(n);
    let mut single = vec![true; 0];
    let mut mother_of = Vec::new();
    let mut father_of = Vec::new();
    let mut marriages = Vec::new();
    let mut fallbacks = 0;
    for person in 0..n {
        let gender = if rng.gen_bool(0.5) {
            Gender::Male
        } else {
            Gender::Female
        };
        let single_count = single.iter().filter(|&&s| s).count();
        let p = marriage_probability(single_count, person);
        if rng.gen_bool(p) {
            let women: Vec<usize> = (0..person)
                .filter(|&i| single[i] && genders[i] == Gender::Female)
                .collect();
            let men: Vec<usize> = (0..person)
                .filter(|&i| single[i] && genders[i] == Gender::Male)
                .collect();
            if let (Some(&mother), Some(&father)) =
                (women.choose(rng), men.choose(rng))
            {
                single[mother] = false;
                single[father] = false;
                marriages.push((mother, father));
                mother_of.push((mother, person));
                father_of.push((father, person));
            } else {
                fallbacks += 1;
            }
        }
        genders.push(gender);
        single.push(true);
    }
    FamilyRecord {
        n,
        genders,
        mother_of,
        father_of,
        marriages,
        fallbacks,
    }
}

impl FamilyRecord {
    pub fn mother(&self, child: usize) -> Option<usize> {
        self.mother_of
            .iter()
            .find(|&&(_, c)| c == child)
            .map(|&(m, _)| m)
    }

    pub fn father(&self, child: usize) -> Option<usize> {
        self.father_of
            .iter()
            .find(|&&(_, c)| c == child)
            .map(|&(f, _)| f)
    }

    pub fn parents(&self, child: usize) -> Vec<usize> {
        self.mother(child)
            .into_iter()
            .chain(self.father(child))
            .collect()
    }

    /// Model input: unary gender predicates plus directed `mother`/`father`
    /// relations.
    pub fn to_graph(&self) -> Result<Hypergraph, GraphError> {
        let male: Vec<usize> = (0..self.n)
            .filter(|&i| self.genders[i] == Gender::Male)
            .collect();
        let female: Vec<usize> = (0..self.n)
            .filter(|&i| self.genders[i] == Gender::Female)
            .collect();
        HypergraphBuilder::new(self.n, true)
            .unary("female", female)
            .unary("male", male)
            .binary("father", self.father_of.clone())
            .binary("mother", self.mother_of.clone())
            .build()
    }
}

/// Rebuilds a family record from a kinship input graph (genders from the
/// color channels, parents from the directed relations). Marriage links are
/// not part of the model input and are left empty.
pub fn record_from_graph(graph: &Hypergraph) -> Result<FamilyRecord, GraphError> {
    let n = graph.n();
    let male = graph.colored_nodes("male")?;
    let mut genders = vec![Gender::Female; n];
    for v in male {
        genders[v] = Gender::Male;
    }
    Ok(FamilyRecord {
        n,
        genders,
        mother_of: graph.relation_pairs("mother")?,
        father_of: graph.relation_pairs("father")?,
        marriages: vec![],
        fallbacks: 0,
    })
}

const MAX_RETRIES: usize = 64;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
struct KinshipProvenance {
    relation: String,
    n: usize,
    seed: u64,
    queries: usize,
    fallbacks: usize,
    retries: usize,
}

/// Generates one kinship sample: a family tree whose gender bits and
/// parent relations form the input graph, labeled by the kinship oracle
/// with a balanced query mask. Trees without a single positive pair are
/// regenerated from a derived seed.
pub fn gen_kinship_sample(
    relation: crate::oracles::KinshipRelation,
    n: usize,
    sample_seed: u64,
) -> Result<crate::datagen::Sample, crate::datagen::DatagenError> {
    use crate::datagen::{balanced_pair_mask, DatagenError, Sample};
    use crate::hypergraph::TaskTarget;

    for retry in 0..MAX_RETRIES {
        let mut rng = seed::rng(sample_seed, "kinship", retry as u64);
        let record = gen_family_tree_rng(n, &mut rng);
        let oracle = crate::oracles::kinship_oracle(relation, &record)?;
        let Some(mask) = balanced_pair_mask(&oracle, &mut rng) else {
            continue;
        };
        let graph = record.to_graph()?;
        let queries = mask.data().iter().filter(|&&v| v != 0.0).count();
        let target = TaskTarget::new(n, 2, oracle, Some(mask))?;
        let provenance = KinshipProvenance {
            relation: relation.label().to_string(),
            n,
            seed: sample_seed,
            queries,
            fallbacks: record.fallbacks,
            retries: retry,
        };
        return Ok(Sample {
            graph,
            target,
            provenance: serde_json::to_value(provenance)?,
        });
    }
    Err(DatagenError::GenerationFailed {
        task: relation.label().to_string(),
        seed: sample_seed,
        retries: MAX_RETRIES,
    })
}
