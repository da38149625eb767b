//! Empirical uniformity search: the least approximation level m at which a
//! premise's level-m approximation forces a target's level-n approximation
//! across a concrete family of finite structures.
//!
//! Verdicts are relative to the family that was searched, never claims
//! about the full axiomatized class. The search is parallel across the
//! structures of each level; aggregation always reports the least
//! counterexample index, so the outcome is independent of scheduling.

use crate::approx::approximate;
use crate::evaluator::{describe_witness, eval, eval_with_witness, FiniteNormedStructure};
use crate::la::almost::require_sentence;
use crate::syntax::ast::PBFormula;
use crate::{Error, Result};
use rayon::prelude::*;

/// A level that failed during the search: the first structure (in family
/// order) satisfying the hypothesis while falsifying the conclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformFailure {
    pub m: u32,
    pub structure_index: usize,
    pub witness: String,
}

/// Outcome of the uniformity search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniformOutcome {
    /// The least level m whose hypothesis excludes every counterexample
    /// in the family.
    Found { m: u32 },
    /// No level up to the cap worked; one counterexample per level.
    Exhausted { failures: Vec<UniformFailure> },
}

fn scan_level(
    hypothesis: &PBFormula,
    conclusion: &PBFormula,
    family: &[FiniteNormedStructure],
    m: u32,
    n: u32,
) -> Result<Option<UniformFailure>> {
    let verdicts = family
        .par_iter()
        .map(|st| -> Result<Option<String>> {
            if !eval(hypothesis, st)? {
                return Ok(None);
            }
            let (holds, steps) = eval_with_witness(conclusion, st)?;
            if holds {
                return Ok(None);
            }
            let path = describe_witness(&steps);
            Ok(Some(if path.is_empty() {
                format!(
                    "satisfies the level-{m} hypothesis but falsifies the level-{n} \
                     conclusion outright"
                )
            } else {
                format!(
                    "satisfies the level-{m} hypothesis but falsifies the level-{n} \
                     conclusion: {path}"
                )
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(verdicts.into_iter().enumerate().find_map(|(structure_index, v)| {
        v.map(|witness| UniformFailure { m, structure_index, witness })
    }))
}

/// Search for the least m ≤ m_max such that no structure in the family
/// satisfies the level-m approximation of the premise while falsifying the
/// level-n approximation of the target.
pub fn search_uniform_index(
    sigma: &PBFormula,
    theta: &PBFormula,
    n: u32,
    family: &[FiniteNormedStructure],
    m_max: u32,
) -> Result<UniformOutcome> {
    if n < 1 || m_max < 1 {
        return Err(Error::Domain("approximation levels must be at least 1".into()));
    }
    if family.is_empty() {
        return Err(Error::Domain("the structure family is empty".into()));
    }
    require_sentence(sigma, "the premise")?;
    require_sentence(theta, "the target")?;

    let conclusion = approximate(theta, n)?;
    let mut failures = Vec::new();
    for m in 1..=m_max {
        let hypothesis = approximate(sigma, m)?;
        match scan_level(&hypothesis, &conclusion, family, m, n)? {
            None => return Ok(UniformOutcome::Found { m }),
            Some(fail) => failures.push(fail),
        }
    }
    Ok(UniformOutcome::Exhausted { failures })
}

/// Re-check a candidate uniform index: true when no structure in the
/// family satisfies the level-m hypothesis while falsifying the level-n
/// conclusion.
pub fn verify_uniform_index(
    sigma: &PBFormula,
    theta: &PBFormula,
    n: u32,
    m: u32,
    family: &[FiniteNormedStructure],
) -> Result<bool> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("approximation levels must be at least 1".into()));
    }
    if family.is_empty() {
        return Err(Error::Domain("the structure family is empty".into()));
    }
    require_sentence(sigma, "the premise")?;
    require_sentence(theta, "the target")?;
    let hypothesis = approximate(sigma, m)?;
    let conclusion = approximate(theta, n)?;
    Ok(scan_level(&hypothesis, &conclusion, family, m, n)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::Norm;
    use crate::rational::{rat, Rational};
    use crate::syntax::parse::parse_pb;

    fn structure_with_c(norm_value: Rational) -> FiniteNormedStructure {
        let carrier = if norm_value == rat(0, 1) {
            vec![vec![norm_value.clone()]]
        } else {
            vec![vec![rat(0, 1)], vec![norm_value.clone()], vec![-norm_value.clone()]]
        };
        let mut st = FiniteNormedStructure::new(1, Norm::LInf, carrier).unwrap();
        st.add_const("c", vec![norm_value]).unwrap();
        st
    }

    #[test]
    fn least_index_separates_the_relaxed_bound() {
        let sigma = parse_pb("(le (norm (c)) 1)").unwrap();
        let family = vec![structure_with_c(rat(1, 1)), structure_with_c(rat(2, 1))];
        let got = search_uniform_index(&sigma, &sigma, 2, &family, 10).unwrap();
        assert_eq!(got, UniformOutcome::Found { m: 2 });
        assert!(verify_uniform_index(&sigma, &sigma, 2, 2, &family).unwrap());
        assert!(!verify_uniform_index(&sigma, &sigma, 2, 1, &family).unwrap());
    }

    #[test]
    fn unbridgeable_gap_exhausts_with_a_failure_per_level() {
        let sigma = parse_pb("(le (norm (c)) 1)").unwrap();
        let theta = parse_pb("(ge (norm (c)) 2)").unwrap();
        let family = vec![structure_with_c(rat(1, 1))];
        let got = search_uniform_index(&sigma, &theta, 3, &family, 5).unwrap();
        match got {
            UniformOutcome::Exhausted { failures } => {
                assert_eq!(failures.len(), 5);
                for (i, f) in failures.iter().enumerate() {
                    assert_eq!(f.m, i as u32 + 1);
                    assert_eq!(f.structure_index, 0);
                    assert!(f.witness.contains("falsifies"), "{}", f.witness);
                }
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn counterexamples_report_the_least_structure_index() {
        let sigma = parse_pb("(le (norm (c)) 1)").unwrap();
        let family = vec![
            structure_with_c(rat(1, 1)),
            structure_with_c(rat(2, 1)),
            structure_with_c(rat(2, 1)),
        ];
        let got = search_uniform_index(&sigma, &sigma, 4, &family, 1).unwrap();
        match got {
            UniformOutcome::Exhausted { failures } => {
                assert_eq!(failures.len(), 1);
                assert_eq!(failures[0].structure_index, 1);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn empty_families_and_open_sentences_are_rejected() {
        let sigma = parse_pb("(le (norm (c)) 1)").unwrap();
        let open = parse_pb("(le (norm x1) 1)").unwrap();
        let family = vec![structure_with_c(rat(1, 1))];
        assert!(search_uniform_index(&sigma, &sigma, 1, &[], 1).is_err());
        assert!(search_uniform_index(&open, &sigma, 1, &family, 1).is_err());
        assert!(search_uniform_index(&sigma, &open, 1, &family, 1).is_err());
    }

    #[test]
    fn witnesses_surface_the_falsifying_quantifier_path() {
        let sigma = parse_pb("(le (norm (c)) 1)").unwrap();
        let theta = parse_pb("(forall (y1 1) (le (norm y1) 1/4))").unwrap();
        let family = vec![structure_with_c(rat(1, 2))];
        let got = search_uniform_index(&sigma, &theta, 8, &family, 2).unwrap();
        match got {
            UniformOutcome::Exhausted { failures } => {
                assert!(failures[0].witness.contains("violated by"), "{}", failures[0].witness);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}
