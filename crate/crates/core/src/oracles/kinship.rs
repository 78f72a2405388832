//! Kinship ground truth over family records.

use serde::{Deserialize, Serialize};

use crate::datagen::family::{FamilyRecord, Gender};
use crate::tensor::Tensor;

use super::OracleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KinshipRelation {
    Grandparent,
    /// Blood uncle: a male who shares a parent with one of the child's
    /// parents and is not that parent himself.
    Uncle,
}

impl KinshipRelation {
    pub fn label(&self) -> &'static str {
        match self {
            KinshipRelation::Grandparent => "grandparent",
            KinshipRelation::Uncle => "uncle",
        }
    }
}

fn validated_parents(record: &FamilyRecord) -> Result<Vec<Vec<usize>>, OracleError> {
    let n = record.n;
    let mut mothers: Vec<Option<usize>> = vec![None; n];
    let mut fathers: Vec<Option<usize>> = vec![None; n];
    for (list, slots, relation) in [
        (&record.mother_of, &mut mothers, "mother"),
        (&record.father_of, &mut fathers, "father"),
    ] {
        for &(parent, child) in *list {
            if parent >= n || child >= n {
                return Err(OracleError::PersonOutOfRange {
                    index: parent.max(child),
                    n,
                });
            }
            if slots[child].replace(parent).is_some() {
                return Err(OracleError::DuplicateParent { child, relation });
            }
        }
    }
    Ok((0..n)
        .map(|c| mothers[c].into_iter().chain(fathers[c]).collect())
        .collect())
}

/// `[n, n]` 0/1 tensor: entry `(a, c)` is 1 iff `a` stands in the relation
/// to `c`.
pub fn kinship_oracle(
    relation: KinshipRelation,
    record: &FamilyRecord,
) -> Result<Tensor, OracleError> {
    let n = record.n;
    let parents = validated_parents(record)?;
    let mut out = vec![0.0; n * n];
    match relation {
        KinshipRelation::Grandparent => {
            for c in 0..n {
                for &p in &parents[c] {
                    for &g in &parents[p] {
                        out[g * n + c] = 1.0;
                    }
                }
            }
        }
        KinshipRelation::Uncle => {
            for c in 0..n {
                for &p in &parents[c] {
                    for u in 0..n {
                        if u == p || record.genders[u] != Gender::Male {
                            continue;
                        }
                        let shares_parent = parents[u]
                            .iter()
                            .any(|pu| parents[p].contains(pu));
                        if shares_parent {
                            out[u * n + c] = 1.0;
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::new(vec![n, n], out).expect("kinship tensor volume"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        n: usize,
        genders: Vec<Gender>,
        mother_of: Vec<(usize, usize)>,
        father_of: Vec<(usize, usize)>,
    ) -> FamilyRecord {
        FamilyRecord {
            n,
            genders,
            mother_of,
            father_of,
            marriages: vec![],
            fallbacks: 0,
        }
    }

    #[test]
    fn grandparent_chain() {
        // 0 is mother of 1; 1 is father of 2.
        let fam = record(
            3,
            vec![Gender::Female, Gender::Male, Gender::Male],
            vec![(0, 1)],
            vec![(1, 2)],
        );
        let g = kinship_oracle(KinshipRelation::Grandparent, &fam).unwrap();
        assert_eq!(g.data()[0 * 3 + 2], 1.0);
        assert_eq!(g.data()[0 * 3 + 1], 0.0);
        assert_eq!(g.data()[1 * 3 + 2], 0.0);
    }

    #[test]
    fn only_child_parents_mean_no_uncles() {
        // 0,1 are parents of 2; 2 is a parent of 3. No siblings anywhere.
        let fam = record(
            4,
            vec![Gender::Female, Gender::Male, Gender::Female, Gender::Male],
            vec![(0, 2), (2, 3)],
            vec![(1, 2)],
        );
        let u = kinship_oracle(KinshipRelation::Uncle, &fam).unwrap();
        assert!(u.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn brother_of_a_parent_is_an_uncle() {
        // 0 (f) and 1 (m) have two children: 2 (m) and 3 (f).
        // 3 is mother of 4; 2 is 4's uncle.
        let fam = record(
            5,
            vec![
                Gender::Female,
                Gender::Male,
                Gender::Male,
                Gender::Female,
                Gender::Male,
            ],
            vec![(0, 2), (0, 3), (3, 4)],
            vec![(1, 2), (1, 3)],
        );
        let u = kinship_oracle(KinshipRelation::Uncle, &fam).unwrap();
        assert_eq!(u.data()[2 * 5 + 4], 1.0);
        // A female sibling is not an uncle.
        assert_eq!(u.data()[3 * 5 + 4], 0.0);
    }

    #[test]
    fn duplicate_mother_is_rejected() {
        let fam = record(
            3,
            vec![Gender::Female, Gender::Female, Gender::Male],
            vec![(0, 2), (1, 2)],
            vec![],
        );
        assert!(matches!(
            kinship_oracle(KinshipRelation::Grandparent, &fam),
            Err(OracleError::DuplicateParent {
                child: 2,
                relation: "mother"
            })
        ));
    }
}
