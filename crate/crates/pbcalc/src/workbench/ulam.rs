//! Isometry rigidity on the unit ball: the theory of a k-bounded
//! surjection fixing zero, the premise that the map is a unit-ball
//! isometry, the additivity target, and the implication sentence
//! relating them.
//!
//! The encodings use the unary symbol `T`. Decoding the sentence's
//! almost version and searching the perturbed-isometry family
//! ([`crate::workbench::ulam_family`]) for its uniformity index are the
//! desk-scale checks these builders exist for.

use crate::approx::{real_eq, real_le, RealExpr};
use crate::rational::{rat, rat_int};
use crate::signature::Signature;
use crate::syntax::ast::{IdxExpr, LAFormula, PBFormula, QuantVar, Term};
use crate::syntax::domains::IndexDomain;
use crate::{Error, Result};

fn t(v: Term) -> Term {
    Term::apply("T", vec![v])
}

fn unit_pair(body: PBFormula) -> PBFormula {
    PBFormula::forall(
        QuantVar::new("x", 1),
        IdxExpr::int(1),
        PBFormula::forall(QuantVar::new("y", 1), IdxExpr::int(1), body),
    )
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Domain("the growth constant k must be at least 1".into()));
    }
    Ok(())
}

/// The premise: `T` is an isometry on the unit ball,
/// ‖T(x) − T(y)‖ = ‖x − y‖.
pub fn sigma() -> PBFormula {
    let x = Term::var("x", 1);
    let y = Term::var("y", 1);
    let image = RealExpr::norm(Term::diff(t(x.clone()), t(y.clone())));
    let source = RealExpr::norm(Term::diff(x, y));
    unit_pair(real_eq(&image, &source, "q", "r"))
}

/// The target: additivity against the identity on the unit ball,
/// ‖T(x) + T(y) − x − y‖ = 0.
pub fn theta() -> PBFormula {
    let x = Term::var("x", 1);
    let y = Term::var("y", 1);
    let dev = Term::diff(Term::sum(t(x.clone()), t(y.clone())), Term::sum(x, y));
    unit_pair(PBFormula::norm_eq(dev, IdxExpr::int(0)))
}

/// The theory of a k-bounded surjection fixing zero: on every ball,
/// ‖T(x)‖ ≤ k‖x‖; T(0) = 0; and every x has a preimage candidate within
/// the k-times-larger ball.
pub fn axioms(k: u32) -> Result<Vec<PBFormula>> {
    check_k(k)?;
    let x = Term::var("x", 1);
    let y = Term::var("y", 1);
    let k_idx = IdxExpr::int(k as i64);

    let bounded = PBFormula::countable_and(
        "n",
        IndexDomain::Naturals,
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::binder("n"),
            real_le(
                &RealExpr::norm(t(x.clone())),
                &RealExpr::scaled_norm(k_idx.clone(), x.clone()),
                "q",
            ),
        ),
    );

    let fixes_zero = PBFormula::norm_eq(t(Term::Zero), IdxExpr::int(0));

    let onto = PBFormula::countable_and(
        "n",
        IndexDomain::Naturals,
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::binder("n"),
            PBFormula::exists(
                QuantVar::new("y", 1),
                IdxExpr::mul(k_idx, IdxExpr::binder("n")),
                PBFormula::norm_eq(Term::diff(t(x), y), IdxExpr::int(0)),
            ),
        ),
    );

    Ok(vec![bounded, fixes_zero, onto])
}

/// The theory together with the rigidity sentence ¬(σ ∧ ¬θ).
pub fn build_ulam(k: u32) -> Result<(Vec<PBFormula>, LAFormula)> {
    let sentence = LAFormula::implies(LAFormula::Embed(sigma()), LAFormula::Embed(theta()));
    Ok((axioms(k)?, sentence))
}

/// The signature a k-bounded structure induces: `T` with linear norm
/// bound K(N) = kN and linear modulus δ = ε/k.
pub fn ulam_signature(k: u32) -> Result<Signature> {
    check_k(k)?;
    let mut sig = Signature::new();
    sig.declare_fn("T", 1)?;
    let decl = sig.fn_decl_mut("T").expect("just declared");
    decl.bounds.set_linear(rat_int(k as i64), rat_int(0))?;
    decl.modulus.set_linear(rat(1, k as i64))?;
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::approximate;
    use crate::evaluator::{eval, FiniteNormedStructure, Norm};
    use crate::la::{decode_almost, search_uniform_index, verify_uniform_index, UniformOutcome};
    use crate::rational::Rational;
    use crate::signature::check_structure_conformance;
    use crate::syntax::parse::{parse_la, parse_pb};
    use crate::syntax::print::{print_la, print_pb};
    use crate::workbench::ulam_family;

    #[test]
    fn premise_and_target_print_to_their_displayed_shapes() {
        let image = "(norm (+ (T x1) (scale -1 (T y1))))";
        let source = "(norm (+ x1 (scale -1 y1)))";
        assert_eq!(
            print_pb(&sigma()),
            format!(
                "(forall (x1 1) (forall (y1 1) (and \
                 (And q Q (or (le {image} q) (ge {source} q))) \
                 (And r Q (or (ge {image} r) (le {source} r))))))"
            )
        );
        let dev = "(norm (+ (+ (T x1) (T y1)) (scale -1 (+ x1 y1))))";
        assert_eq!(
            print_pb(&theta()),
            format!("(forall (x1 1) (forall (y1 1) (and (le {dev} 0) (ge {dev} 0))))")
        );
    }

    #[test]
    fn theory_has_the_three_displayed_axiom_families() {
        let axs = axioms(2).unwrap();
        assert_eq!(axs.len(), 3);
        assert_eq!(
            print_pb(&axs[0]),
            "(And n Nat (forall (x1 n) (And q Q (or (le (norm (T x1)) q) \
             (ge (norm (scale 2 x1)) q)))))"
        );
        assert_eq!(print_pb(&axs[1]), "(and (le (norm (T 0)) 0) (ge (norm (T 0)) 0))");
        assert_eq!(
            print_pb(&axs[2]),
            "(And n Nat (forall (x1 n) (exists (y1 (* 2 n)) (and \
             (le (norm (+ (T x1) (scale -1 y1))) 0) \
             (ge (norm (+ (T x1) (scale -1 y1))) 0)))))"
        );
        assert!(axioms(0).is_err());
    }

    #[test]
    fn builders_round_trip_through_text() {
        let (axs, sentence) = build_ulam(3).unwrap();
        for f in axs.iter().chain([sigma(), theta()].iter()) {
            assert_eq!(parse_pb(&print_pb(f)).unwrap(), *f);
        }
        assert_eq!(parse_la(&print_la(&sentence)).unwrap(), sentence);
        let printed = print_la(&sentence);
        assert!(printed.starts_with("(not (and ("), "{printed}");
    }

    #[test]
    fn identity_satisfies_the_theory_and_a_shift_breaks_zero_fixing() {
        let family = ulam_family().unwrap();
        let id = &family[0];
        for axiom in axioms(1).unwrap() {
            for m in [1, 2, 3] {
                assert!(eval(&approximate(&axiom, m).unwrap(), id).unwrap());
            }
        }
        assert!(eval(&theta(), id).unwrap());
        for m in [1, 4, 13] {
            assert!(eval(&approximate(&sigma(), m).unwrap(), id).unwrap());
        }

        let carrier = id.carrier().to_vec();
        let mut shifted = FiniteNormedStructure::new(2, Norm::Lp(2), carrier.clone()).unwrap();
        let entries = carrier
            .iter()
            .map(|p| (p.clone(), vec![&p[0] + Rational::new(1.into(), 8.into()), p[1].clone()]))
            .collect();
        shifted.add_table_fn("T", 1, entries).unwrap();
        let fixes_zero = &axioms(1).unwrap()[1];
        assert!(eval(&approximate(fixes_zero, 4).unwrap(), &shifted).unwrap());
        assert!(!eval(&approximate(fixes_zero, 9).unwrap(), &shifted).unwrap());
    }

    #[test]
    fn the_whole_family_conforms_to_the_k2_signature() {
        let sig = ulam_signature(2).unwrap();
        for st in ulam_family().unwrap() {
            let report = check_structure_conformance(&sig, &st).unwrap();
            assert!(report.is_conformant(), "{:?}", report.violations);
        }
        assert!(ulam_signature(0).is_err());
    }

    #[test]
    fn uniformity_search_pins_the_separating_level() {
        let family = ulam_family().unwrap();
        let got = search_uniform_index(&sigma(), &theta(), 4, &family, 16).unwrap();
        assert_eq!(got, UniformOutcome::Found { m: 13 });
        assert!(verify_uniform_index(&sigma(), &theta(), 4, 13, &family).unwrap());
        assert!(!verify_uniform_index(&sigma(), &theta(), 4, 12, &family).unwrap());

        let early = search_uniform_index(&sigma(), &theta(), 4, &family, 3).unwrap();
        match early {
            UniformOutcome::Exhausted { failures } => {
                assert_eq!(failures.len(), 3);
                for f in &failures {
                    assert_eq!(f.structure_index, 3, "doubling map should fail first");
                }
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn decoded_almost_version_carries_the_displayed_margins() {
        let schema = decode_almost(&sigma(), &theta(), 2, 2).unwrap();
        let hyp = print_pb(&schema.hypothesis);
        assert!(hyp.starts_with("(forall (x1 1/2) (forall (y1 1/2)"), "{hyp}");
        assert!(hyp.contains("(ge (norm (+ x1 (scale -1 y1))) -1/2)"), "{hyp}");
        let concl = print_pb(&schema.conclusion);
        assert!(concl.starts_with("(forall (x1 1/2)"), "{concl}");
        assert!(concl.contains("1/2)"), "{concl}");
        let obs = print_pb(&schema.obstruction);
        assert!(obs.contains("(exists (x1 7/6)"), "{obs}");
        assert!(obs.contains("-1/6"), "{obs}");
    }
}
