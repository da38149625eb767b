//! Commuting-projection rigidity: the theory of two k-bounded linear
//! projections with norm-power witnesses and a two-dimensional floor, the
//! premise that both projections split their norm-power exactly, and the
//! conclusion that the projections commute while the two norm-powers
//! agree.
//!
//! Symbols: unary functions `P`, `Q`, constants `e1`, `e2`, unary
//! relations `fp`, `fq`. The relation exponents never appear in the
//! premise or conclusion; they enter through the window axioms and the
//! induced signature.

use crate::approx::{real_eq, sum_eq, RealExpr};
use crate::rational::{pow_nat, rat, rat_int};
use crate::signature::Signature;
use crate::syntax::ast::{CmpOp, IdxExpr, LAFormula, PBFormula, QuantVar, Term};
use crate::syntax::domains::IndexDomain;
use crate::{Error, Result};

fn ap(func: &str, arg: Term) -> Term {
    Term::apply(func, vec![arg])
}

fn cst(name: &str) -> Term {
    Term::apply(name, vec![])
}

/// ⋀ over rational (a, b, r): the projection is linear on every ball,
/// ‖F(ax + by) − aF(x) − bF(y)‖ = 0.
fn linearity(func: &str) -> PBFormula {
    let a = || IdxExpr::comp("abr", IdxExpr::int(1));
    let b = || IdxExpr::comp("abr", IdxExpr::int(2));
    let r = || IdxExpr::comp("abr", IdxExpr::int(3));
    let x = Term::var("x", 1);
    let y = Term::var("y", 1);
    let mixed = ap(func, Term::sum(Term::scale(a(), x.clone()), Term::scale(b(), y.clone())));
    let split = Term::sum(
        Term::scale(a(), ap(func, x.clone())),
        Term::scale(b(), ap(func, y.clone())),
    );
    PBFormula::countable_and(
        "abr",
        IndexDomain::RationalTuples(IdxExpr::int(3)),
        PBFormula::forall(
            QuantVar::new("x", 1),
            r(),
            PBFormula::forall(
                QuantVar::new("y", 1),
                r(),
                PBFormula::norm_eq(Term::diff(mixed, split), IdxExpr::int(0)),
            ),
        ),
    )
}

/// ⋀ over rational r: ‖F(F(x)) − F(x)‖ = 0 on every ball.
fn idempotence(func: &str) -> PBFormula {
    let x = Term::var("x", 1);
    let once = ap(func, x.clone());
    PBFormula::countable_and(
        "r",
        IndexDomain::Rationals,
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::binder("r"),
            PBFormula::norm_eq(Term::diff(ap(func, once.clone()), once), IdxExpr::int(0)),
        ),
    )
}

/// ⋀ over rational radii 0 ≤ s < r: on the r-ball, every point outside
/// the s-ball has its `rel` value inside [s^e, r^e]. Pairs with s < 0 or
/// s ≥ r are filtered by guards.
fn power_window(rel: &str, exponent: u32) -> PBFormula {
    let s = || IdxExpr::comp("sr", IdxExpr::int(1));
    let r = || IdxExpr::comp("sr", IdxExpr::int(2));
    let e = IdxExpr::int(exponent as i64);
    let x = Term::var("x", 1);
    let window = PBFormula::And(vec![
        PBFormula::rel_ge(rel, vec![x.clone()], IdxExpr::Pow(Box::new(s()), Box::new(e.clone()))),
        PBFormula::rel_le(rel, vec![x.clone()], IdxExpr::Pow(Box::new(r()), Box::new(e))),
    ]);
    PBFormula::countable_and(
        "sr",
        IndexDomain::RationalTuples(IdxExpr::int(2)),
        PBFormula::Or(vec![
            PBFormula::guard(CmpOp::Lt, s(), IdxExpr::int(0)),
            PBFormula::guard(CmpOp::Ge, s(), r()),
            PBFormula::forall(
                QuantVar::new("x", 1),
                r(),
                PBFormula::Or(vec![PBFormula::norm_le(x, s()), window]),
            ),
        ]),
    )
}

/// ‖e₁‖ = ‖e₂‖ = 1 and ‖e₁ − e₂‖ ≥ 1/2: the dimension floor.
fn dimension_floor() -> PBFormula {
    PBFormula::And(vec![
        PBFormula::norm_eq(cst("e1"), IdxExpr::int(1)),
        PBFormula::norm_eq(cst("e2"), IdxExpr::int(1)),
        PBFormula::norm_ge(Term::diff(cst("e1"), cst("e2")), IdxExpr::rat(rat(1, 2))),
    ])
}

/// The premise: on the unit ball both projections split their norm-power
/// witness, fp(P(x)) + fp(x − P(x)) = fp(x) and likewise for Q with fq.
pub fn sigma() -> PBFormula {
    let x = Term::var("x", 1);
    let split = |func: &str, rel: &str| {
        let projected = RealExpr::rel(rel, vec![ap(func, x.clone())]);
        let residual = RealExpr::rel(rel, vec![Term::diff(x.clone(), ap(func, x.clone()))]);
        let total = RealExpr::rel(rel, vec![x.clone()]);
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::int(1),
            sum_eq(&projected, &residual, &total, "u", "v"),
        )
    };
    PBFormula::And(vec![split("P", "fp"), split("Q", "fq")])
}

/// The conclusion: on the unit ball the projections commute and the two
/// norm-power witnesses agree.
pub fn theta() -> PBFormula {
    let x = Term::var("x", 1);
    let commuted = Term::diff(ap("P", ap("Q", x.clone())), ap("Q", ap("P", x.clone())));
    PBFormula::forall(
        QuantVar::new("x", 1),
        IdxExpr::int(1),
        PBFormula::And(vec![
            PBFormula::norm_eq(commuted, IdxExpr::int(0)),
            real_eq(
                &RealExpr::rel("fp", vec![x.clone()]),
                &RealExpr::rel("fq", vec![x]),
                "u",
                "v",
            ),
        ]),
    )
}

fn check_params(k: u32, p: u32, q: u32) -> Result<()> {
    if k < 1 || p < 1 || q < 1 {
        return Err(Error::Domain(
            "the projection constant and both exponents must be at least 1".into(),
        ));
    }
    Ok(())
}

/// The seven axiom families: linearity and idempotence of each
/// projection, the two norm-power windows, and the dimension floor. The
/// projection constant k enters through the induced signature only.
pub fn axioms(k: u32, p: u32, q: u32) -> Result<Vec<PBFormula>> {
    check_params(k, p, q)?;
    Ok(vec![
        linearity("P"),
        linearity("Q"),
        idempotence("P"),
        idempotence("Q"),
        power_window("fp", p),
        power_window("fq", q),
        dimension_floor(),
    ])
}

/// The theory together with the sentence ¬(σ ∧ ¬θ).
pub fn build_behrends(k: u32, p: u32, q: u32) -> Result<(Vec<PBFormula>, LAFormula)> {
    let sentence = LAFormula::implies(LAFormula::Embed(sigma()), LAFormula::Embed(theta()));
    Ok((axioms(k, p, q)?, sentence))
}

/// The signature induced by a k-bounded pair of projections with
/// norm-power witnesses of the given exponents: P, Q with linear bound kN
/// and modulus ε/k; unit-norm constants e₁, e₂; fp, fq with the bounds
/// N^e tabulated through N = 4 and moduli δ = ε/(e·N^(e−1)).
pub fn behrends_signature(k: u32, p: u32, q: u32) -> Result<Signature> {
    check_params(k, p, q)?;
    let mut sig = Signature::new();
    for name in ["P", "Q"] {
        sig.declare_fn(name, 1)?;
        let decl = sig.fn_decl_mut(name).expect("just declared");
        decl.bounds.set_linear(rat_int(k as i64), rat_int(0))?;
        decl.modulus.set_linear(rat(1, k as i64))?;
    }
    for name in ["e1", "e2"] {
        sig.declare_fn(name, 0)?;
        let decl = sig.fn_decl_mut(name).expect("just declared");
        decl.bounds.set_linear(rat_int(0), rat_int(1))?;
    }
    for (name, exponent) in [("fp", p), ("fq", q)] {
        sig.declare_rel(name, 1)?;
        let decl = sig.rel_decl_mut(name).expect("just declared");
        if exponent == 1 {
            decl.bounds.set_linear(rat_int(1), rat_int(0))?;
            decl.modulus.set_linear(rat_int(1))?;
        } else {
            for n in 1..=4u32 {
                let level = rat_int(n as i64);
                decl.bounds.insert_entry(n, pow_nat(&level, exponent))?;
                let slope = rat_int(exponent as i64) * pow_nat(&level, exponent - 1);
                for eps in [rat(1, 4), rat(1, 2), rat_int(1), rat_int(2)] {
                    decl.modulus.insert_entry(n, eps.clone(), eps / slope.clone())?;
                }
            }
        }
    }
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::approximate;
    use crate::evaluator::{eval, FiniteNormedStructure, Norm};
    use crate::rational::Rational;
    use crate::signature::{check_structure_conformance, Violation};
    use crate::syntax::parse::{parse_la, parse_pb};
    use crate::syntax::print::{print_la, print_pb};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat_int(x)).collect()
    }

    /// ℓ₁³ over the signed unit vectors, with the coordinate projections
    /// onto the first and second axes and exact norm-power witnesses of
    /// exponents 1 and 2.
    fn witness_structure() -> FiniteNormedStructure {
        let mut carrier = vec![v(&[0, 0, 0])];
        for axis in 0..3 {
            for sign in [1i64, -1] {
                let mut p = v(&[0, 0, 0]);
                p[axis] = rat_int(sign);
                carrier.push(p);
            }
        }
        let mut st = FiniteNormedStructure::new(3, Norm::Lp(1), carrier).unwrap();
        let zero = v(&[0, 0, 0]);
        st.add_affine_fn("P", vec![v(&[1, 0, 0]), v(&[0, 0, 0]), v(&[0, 0, 0])], zero.clone())
            .unwrap();
        st.add_affine_fn("Q", vec![v(&[0, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 0])], zero)
            .unwrap();
        st.add_const("e1", v(&[1, 0, 0])).unwrap();
        st.add_const("e2", v(&[0, 1, 0])).unwrap();
        st.add_normpower_rel("fp", 1).unwrap();
        st.add_normpower_rel("fq", 2).unwrap();
        st
    }

    #[test]
    fn axiom_families_print_to_their_displayed_shapes() {
        let axs = axioms(1, 2, 3).unwrap();
        assert_eq!(axs.len(), 7);
        let idem = "(+ (P (P x1)) (scale -1 (P x1)))";
        assert_eq!(
            print_pb(&axs[2]),
            format!(
                "(And r Q (forall (x1 r) (and (le (norm {idem}) 0) (ge (norm {idem}) 0))))"
            )
        );
        assert_eq!(
            print_pb(&axs[4]),
            "(And sr (Qtuple 2) (or (guard lt (comp sr 1) 0) \
             (guard ge (comp sr 1) (comp sr 2)) \
             (forall (x1 (comp sr 2)) (or (le (norm x1) (comp sr 1)) \
             (and (ge (rel fp x1) (pow (comp sr 1) 2)) \
             (le (rel fp x1) (pow (comp sr 2) 2)))))))"
        );
        assert_eq!(
            print_pb(&axs[6]),
            "(and (and (le (norm (e1)) 1) (ge (norm (e1)) 1)) \
             (and (le (norm (e2)) 1) (ge (norm (e2)) 1)) \
             (ge (norm (+ (e1) (scale -1 (e2)))) 1/2))"
        );
        let lin = print_pb(&axs[0]);
        assert!(
            lin.starts_with("(And abr (Qtuple 3) (forall (x1 (comp abr 3)) (forall (y1 (comp abr 3))"),
            "{lin}"
        );
        assert!(lin.contains("(P (+ (scale (comp abr 1) x1) (scale (comp abr 2) y1)))"), "{lin}");
    }

    #[test]
    fn premise_and_conclusion_mention_each_witness_once_per_side() {
        let s = print_pb(&sigma());
        assert!(s.contains("(rel fp (P x1))"), "{s}");
        assert!(s.contains("(rel fp (+ x1 (scale -1 (P x1))))"), "{s}");
        assert!(s.contains("(rel fq (Q x1))"), "{s}");
        assert!(s.contains("(rel fq (+ x1 (scale -1 (Q x1))))"), "{s}");
        assert!(!s.contains("(rel fq (P x1))"), "{s}");
        let t = print_pb(&theta());
        assert!(t.contains("(norm (+ (P (Q x1)) (scale -1 (Q (P x1)))))"), "{t}");
        assert!(t.contains("(rel fp x1)") && t.contains("(rel fq x1)"), "{t}");
    }

    #[test]
    fn builders_round_trip_through_text() {
        let (axs, sentence) = build_behrends(2, 1, 2).unwrap();
        for f in axs.iter().chain([sigma(), theta()].iter()) {
            assert_eq!(parse_pb(&print_pb(f)).unwrap(), *f);
        }
        assert_eq!(parse_la(&print_la(&sentence)).unwrap(), sentence);
        assert!(build_behrends(0, 1, 1).is_err());
        assert!(build_behrends(1, 0, 1).is_err());
    }

    #[test]
    fn coordinate_projections_satisfy_theory_premise_and_conclusion() {
        let st = witness_structure();
        for axiom in axioms(1, 1, 2).unwrap() {
            for m in [2, 4] {
                let approx = approximate(&axiom, m).unwrap();
                assert!(eval(&approx, &st).unwrap(), "axiom failed at level {m}: {}", print_pb(&axiom));
            }
        }
        for m in [1, 3, 5] {
            assert!(eval(&approximate(&sigma(), m).unwrap(), &st).unwrap());
            assert!(eval(&approximate(&theta(), m).unwrap(), &st).unwrap());
        }
        let commuting = parse_pb(
            "(forall (x1 1) (and (le (norm (+ (P (Q x1)) (scale -1 (Q (P x1))))) 0) \
             (ge (norm (+ (P (Q x1)) (scale -1 (Q (P x1))))) 0)))",
        )
        .unwrap();
        assert!(eval(&commuting, &st).unwrap());
    }

    #[test]
    fn broken_interpretations_falsify_the_matching_family() {
        let mut st = witness_structure();
        st.add_const("e3", v(&[1, 0, 0])).unwrap();

        let mut doubled = FiniteNormedStructure::new(
            1,
            Norm::Lp(1),
            vec![v(&[0]), v(&[1]), v(&[-1]), vec![rat(1, 2)], vec![rat(-1, 2)]],
        )
        .unwrap();
        doubled.add_affine_fn("P", vec![v(&[2])], v(&[0])).unwrap();
        let idem = &axioms(1, 1, 1).unwrap()[2];
        assert!(!eval(&approximate(idem, 2).unwrap(), &doubled).unwrap());

        let mut collapsed = st;
        collapsed.add_const("e4", v(&[0, 0, 1])).unwrap();
        let mut same = FiniteNormedStructure::new(1, Norm::Lp(1), vec![v(&[0]), v(&[1]), v(&[-1])])
            .unwrap();
        same.add_const("e1", v(&[1])).unwrap();
        same.add_const("e2", v(&[1])).unwrap();
        let floor = &axioms(1, 1, 1).unwrap()[6];
        assert!(!eval(&approximate(floor, 3).unwrap(), &same).unwrap());
        assert!(eval(&approximate(floor, 3).unwrap(), &collapsed).unwrap());
    }

    #[test]
    fn induced_signature_accepts_the_witness_and_flags_wrong_exponents() {
        let st = witness_structure();
        let sig = behrends_signature(1, 1, 2).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.is_conformant(), "{:?}", report.violations);

        let mut stretched =
            FiniteNormedStructure::new(1, Norm::Lp(1), vec![v(&[0]), v(&[1]), v(&[-1]), v(&[2]), v(&[-2])])
                .unwrap();
        stretched.add_affine_fn("P", vec![v(&[1])], v(&[0])).unwrap();
        stretched.add_affine_fn("Q", vec![v(&[1])], v(&[0])).unwrap();
        stretched.add_const("e1", v(&[1])).unwrap();
        stretched.add_const("e2", v(&[-1])).unwrap();
        stretched.add_normpower_rel("fp", 2).unwrap();
        stretched.add_normpower_rel("fq", 2).unwrap();
        let mismatched = behrends_signature(1, 1, 2).unwrap();
        let report = check_structure_conformance(&mismatched, &stretched).unwrap();
        assert!(
            report
                .violations
                .iter()
                .any(|viol| matches!(viol, Violation::Bound { symbol, .. } if symbol == "fp")),
            "{:?}",
            report.violations
        );
    }
}
