//! Decoding almost versions: from an implication between sentences to the
//! finitary hypothesis/conclusion pair a desk-scale check can consume.
//!
//! Implication is not a connective of the logic, so the decoded schema is a
//! pair of finitary sentences plus the obstruction whose failure carries a
//! model from the hypothesis to the conclusion. A structure satisfying the
//! hypothesis either satisfies the obstruction (it sits inside the
//! negation's slack) or satisfies the conclusion.

use crate::approx::{approximate, weak_negation};
use crate::la::{branch_approx, constant_neg_branch};
use crate::syntax::ast::{LAFormula, PBFormula};
use crate::syntax::print::print_pb;
use crate::syntax::vars::{free_index_binders_pb, free_vars_pb};
use crate::{Error, Result};

/// The decoded almost version of "every model of the premise models the
/// target": finitary hypothesis and conclusion, the obstruction separating
/// them, and the derivation trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlmostSchema {
    pub hypothesis: PBFormula,
    pub obstruction: PBFormula,
    pub conclusion: PBFormula,
    pub trace: Vec<String>,
    pub uses_trusted: bool,
}

pub(crate) fn require_sentence(f: &PBFormula, what: &str) -> Result<()> {
    if !free_vars_pb(f).is_empty() {
        return Err(Error::Domain(format!("{what} must be a closed sentence")));
    }
    if !free_index_binders_pb(f).is_empty() {
        return Err(Error::Template(format!("{what} has unresolved index binders")));
    }
    Ok(())
}

/// Decode the almost version of "premise implies target" at hypothesis
/// level m and conclusion level n.
pub fn decode_almost(
    sigma: &PBFormula,
    theta: &PBFormula,
    n: u32,
    m: u32,
) -> Result<AlmostSchema> {
    if n < 1 || m < 1 {
        return Err(Error::Domain("approximation levels must be at least 1".into()));
    }
    require_sentence(sigma, "the premise")?;
    require_sentence(theta, "the target")?;

    let hypothesis = approximate(sigma, m)?;
    let conclusion = approximate(theta, n)?;
    let embedded = LAFormula::Embed(theta.clone());
    let branch = constant_neg_branch(&embedded, n)?;
    let uses_trusted = branch.has_trusted();
    let negated = LAFormula::not(embedded.clone());
    let obstruction = branch_approx(&negated, &branch, m)?;

    let weak = weak_negation(theta, n + 1)?;
    let trace = vec![
        format!("premise: {}", print_pb(sigma)),
        format!("target: {}", print_pb(theta)),
        format!(
            "hypothesis = level-{m} approximation of the premise: {}",
            print_pb(&hypothesis)
        ),
        format!(
            "weak negation of the target at level {}: {}",
            n + 1,
            print_pb(&weak)
        ),
        format!(
            "obstruction = level-{m} approximation of the {m}-step constant negation \
             branch over the target: {}",
            print_pb(&obstruction)
        ),
        format!(
            "a structure satisfying the hypothesis while falsifying the obstruction \
             falsifies the level-{m} approximation of the level-{} weak negation of \
             the target",
            n + 1
        ),
        format!(
            "falsifying that approximation forces the level-{n} approximation of the \
             target, because every margin 1/{} - 1/{m} it relaxes by stays strictly \
             below 1/{n}",
            n + 1
        ),
        format!(
            "conclusion = level-{n} approximation of the target: {}",
            print_pb(&conclusion)
        ),
    ];

    Ok(AlmostSchema { hypothesis, obstruction, conclusion, trace, uses_trusted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::eval;
    use crate::syntax::parse::parse_pb;
    use crate::syntax::print::print_pb;

    fn pb(src: &str) -> PBFormula {
        parse_pb(src).unwrap()
    }

    #[test]
    fn norm_bound_schema_matches_the_hand_decoding() {
        let sigma = pb("(le (norm (c)) 1)");
        let theta = pb("(le (norm (c)) 2)");
        let got = decode_almost(&sigma, &theta, 2, 4).unwrap();
        assert_eq!(print_pb(&got.hypothesis), "(le (norm (c)) 5/4)");
        assert_eq!(print_pb(&got.conclusion), "(le (norm (c)) 5/2)");
        let conjunct = pb("(ge (norm (c)) 25/12)");
        assert_eq!(
            got.obstruction,
            PBFormula::And(vec![conjunct.clone(); 4])
        );
        assert!(!got.uses_trusted);
        assert_eq!(got.trace.len(), 8);
        assert!(got.trace[2].contains("(le (norm (c)) 5/4)"));
        assert!(got.trace[4].contains("(ge (norm (c)) 25/12)"));
    }

    #[test]
    fn symmetric_relaxation_at_level_one() {
        let sigma = pb("(le (norm (c)) 1)");
        let got = decode_almost(&sigma, &sigma, 1, 1).unwrap();
        assert_eq!(print_pb(&got.hypothesis), "(le (norm (c)) 2)");
        assert_eq!(print_pb(&got.conclusion), "(le (norm (c)) 2)");
        assert_eq!(
            got.obstruction,
            PBFormula::And(vec![pb("(ge (norm (c)) 1/2)")])
        );
    }

    #[test]
    fn open_formulas_are_rejected() {
        let open = pb("(le (norm x1) 1)");
        let closed = pb("(le (norm (c)) 1)");
        assert!(decode_almost(&open, &closed, 1, 1).is_err());
        assert!(decode_almost(&closed, &open, 1, 1).is_err());
    }

    #[test]
    fn schema_is_sound_on_finite_structures() {
        use crate::evaluator::FiniteNormedStructure;
        use crate::rational::rat;

        let sigma = pb("(le (norm (c)) 1)");
        let theta = pb("(le (norm (c)) 2)");
        // Structures with ‖c‖ sweeping through and beyond both bounds.
        for num in 0..=12i64 {
            let v = rat(num, 4);
            let carrier = if num == 0 {
                vec![vec![v.clone()]]
            } else {
                vec![vec![rat(0, 1)], vec![v.clone()], vec![-v.clone()]]
            };
            let mut st =
                FiniteNormedStructure::new(1, crate::evaluator::Norm::LInf, carrier).unwrap();
            st.add_const("c", vec![v.clone()]).unwrap();
            for (n, m) in [(1u32, 1u32), (2, 4), (3, 2), (4, 7)] {
                let schema = decode_almost(&sigma, &theta, n, m).unwrap();
                let hyp = eval(&schema.hypothesis, &st).unwrap();
                let obs = eval(&schema.obstruction, &st).unwrap();
                let ccl = eval(&schema.conclusion, &st).unwrap();
                assert!(
                    !(hyp && !obs) || ccl,
                    "soundness broken at ||c||={num}/4, n={n}, m={m}"
                );
            }
        }
    }
}
