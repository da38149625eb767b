//! The two core transforms: the n-approximation `φ ↦ φ_n` and the weak
//! approximate negation `neg(φ, n)`. Both land in the finitary fragment.
//!
//! The n-approximation relaxes every atom and quantifier bound by the
//! margin 1/n and truncates countable conjunctions to their first n
//! enumerated instances. The weak negation dualizes atoms with the same
//! margin, swaps the connectives, turns a countable conjunction into the
//! n-fold disjunction of negated instances, and swaps the bounded
//! quantifiers with relaxed (existential) or tightened (universal) bounds.
//!
//! A tightened universal bound may go negative; the approximation keeps it
//! (the quantifier is then vacuous, which is the intended semantics). The
//! weak negation instead must produce a satisfiable existential region, so
//! a negative existential bound collapses to the single point 0: the
//! result is the negated body with the variable replaced by the zero term.
//!
//! No other simplification is performed: outputs are structurally
//! auditable, vacuous atoms and all.

use crate::rational::one_over;
use crate::syntax::ast::{AtomicFormula, IdxExpr, PBFormula, Term};
use crate::syntax::domains::enumerate_clamped;
use crate::syntax::subst::instantiate_binder_pb;
use crate::syntax::vars::subst_space_var_pb;
use crate::{Error, Rational, Result};
use num::traits::Signed;

fn check_level(n: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("approximation level must be at least 1".into()));
    }
    Ok(())
}

fn ground_bound(e: &IdxExpr) -> Result<&Rational> {
    e.as_const().ok_or_else(|| {
        Error::Template("transforms require a ground formula (symbolic bound found)".into())
    })
}

fn shifted(e: &IdxExpr, delta: &Rational) -> Result<IdxExpr> {
    Ok(IdxExpr::Const(ground_bound(e)? + delta))
}

/// The n-approximation φ_n.
pub fn approximate(f: &PBFormula, n: u32) -> Result<PBFormula> {
    check_level(n)?;
    approx_rec(f, n, &one_over(n))
}

fn approx_rec(f: &PBFormula, n: u32, margin: &Rational) -> Result<PBFormula> {
    match f {
        PBFormula::Atom(a) => Ok(PBFormula::Atom(match a {
            AtomicFormula::NormLe(t, r) => AtomicFormula::NormLe(t.clone(), shifted(r, margin)?),
            AtomicFormula::NormGe(t, r) => {
                AtomicFormula::NormGe(t.clone(), shifted(r, &-margin.clone())?)
            }
            AtomicFormula::RelLe { rel, args, bound } => AtomicFormula::RelLe {
                rel: rel.clone(),
                args: args.clone(),
                bound: shifted(bound, margin)?,
            },
            AtomicFormula::RelGe { rel, args, bound } => AtomicFormula::RelGe {
                rel: rel.clone(),
                args: args.clone(),
                bound: shifted(bound, &-margin.clone())?,
            },
        })),
        PBFormula::And(parts) => Ok(PBFormula::And(
            parts.iter().map(|p| approx_rec(p, n, margin)).collect::<Result<_>>()?,
        )),
        PBFormula::Or(parts) => Ok(PBFormula::Or(
            parts.iter().map(|p| approx_rec(p, n, margin)).collect::<Result<_>>()?,
        )),
        PBFormula::CountableAnd { binder, domain, body } => {
            let values = enumerate_clamped(domain, n as u64)?;
            let mut parts = Vec::with_capacity(values.len());
            for v in &values {
                let inst = instantiate_binder_pb(body, binder, v)?;
                parts.push(approx_rec(&inst, n, margin)?);
            }
            Ok(PBFormula::And(parts))
        }
        PBFormula::Exists { var, bound, body } => Ok(PBFormula::Exists {
            var: var.clone(),
            bound: shifted(bound, margin)?,
            body: Box::new(approx_rec(body, n, margin)?),
        }),
        PBFormula::Forall { var, bound, body } => Ok(PBFormula::Forall {
            var: var.clone(),
            bound: shifted(bound, &-margin.clone())?,
            body: Box::new(approx_rec(body, n, margin)?),
        }),
        PBFormula::Guard { .. } => Err(Error::Template(
            "transforms require a ground formula (unresolved guard found)".into(),
        )),
    }
}

/// The weak approximate negation neg(φ, n).
pub fn weak_negation(f: &PBFormula, n: u32) -> Result<PBFormula> {
    check_level(n)?;
    neg_rec(f, n, &one_over(n))
}

fn neg_rec(f: &PBFormula, n: u32, margin: &Rational) -> Result<PBFormula> {
    match f {
        PBFormula::Atom(a) => Ok(PBFormula::Atom(match a {
            AtomicFormula::NormLe(t, r) => AtomicFormula::NormGe(t.clone(), shifted(r, margin)?),
            AtomicFormula::NormGe(t, r) => {
                AtomicFormula::NormLe(t.clone(), shifted(r, &-margin.clone())?)
            }
            AtomicFormula::RelLe { rel, args, bound } => AtomicFormula::RelGe {
                rel: rel.clone(),
                args: args.clone(),
                bound: shifted(bound, margin)?,
            },
            AtomicFormula::RelGe { rel, args, bound } => AtomicFormula::RelLe {
                rel: rel.clone(),
                args: args.clone(),
                bound: shifted(bound, &-margin.clone())?,
            },
        })),
        PBFormula::And(parts) => Ok(PBFormula::Or(
            parts.iter().map(|p| neg_rec(p, n, margin)).collect::<Result<_>>()?,
        )),
        PBFormula::Or(parts) => Ok(PBFormula::And(
            parts.iter().map(|p| neg_rec(p, n, margin)).collect::<Result<_>>()?,
        )),
        PBFormula::CountableAnd { binder, domain, body } => {
            let values = enumerate_clamped(domain, n as u64)?;
            let mut parts = Vec::with_capacity(values.len());
            for v in &values {
                let inst = instantiate_binder_pb(body, binder, v)?;
                parts.push(neg_rec(&inst, n, margin)?);
            }
            Ok(PBFormula::Or(parts))
        }
        PBFormula::Exists { var, bound, body } => Ok(PBFormula::Forall {
            var: var.clone(),
            bound: shifted(bound, margin)?,
            body: Box::new(neg_rec(body, n, margin)?),
        }),
        PBFormula::Forall { var, bound, body } => {
            let tightened = ground_bound(bound)? - margin;
            let negated = neg_rec(body, n, margin)?;
            if tightened.is_negative() {
                // The existential ball would be empty; collapse it to the
                // one point that is always present, the zero vector.
                Ok(subst_space_var_pb(&negated, &var.family, var.index, &Term::Zero))
            } else {
                Ok(PBFormula::Exists {
                    var: var.clone(),
                    bound: IdxExpr::Const(tightened),
                    body: Box::new(negated),
                })
            }
        }
        PBFormula::Guard { .. } => Err(Error::Template(
            "transforms require a ground formula (unresolved guard found)".into(),
        )),
    }
}

/// Margin-free truncation: countable conjunctions keep their first `depth`
/// enumerated instances while atoms and quantifier bounds stay exact. The
/// result is a subconjunction of the original, so full satisfaction implies
/// it; it is the "checked prefix" an approximate satisfier is tested
/// against when no slack is wanted.
pub fn truncate_prefix(f: &PBFormula, depth: u32) -> Result<PBFormula> {
    check_level(depth)?;
    match f {
        PBFormula::Atom(_) => Ok(f.clone()),
        PBFormula::And(parts) => Ok(PBFormula::And(
            parts.iter().map(|p| truncate_prefix(p, depth)).collect::<Result<_>>()?,
        )),
        PBFormula::Or(parts) => Ok(PBFormula::Or(
            parts.iter().map(|p| truncate_prefix(p, depth)).collect::<Result<_>>()?,
        )),
        PBFormula::CountableAnd { binder, domain, body } => {
            let values = enumerate_clamped(domain, depth as u64)?;
            let mut parts = Vec::with_capacity(values.len());
            for v in &values {
                let inst = instantiate_binder_pb(body, binder, v)?;
                parts.push(truncate_prefix(&inst, depth)?);
            }
            Ok(PBFormula::And(parts))
        }
        PBFormula::Exists { var, bound, body } => Ok(PBFormula::Exists {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(truncate_prefix(body, depth)?),
        }),
        PBFormula::Forall { var, bound, body } => Ok(PBFormula::Forall {
            var: var.clone(),
            bound: bound.clone(),
            body: Box::new(truncate_prefix(body, depth)?),
        }),
        PBFormula::Guard { .. } => Err(Error::Template(
            "transforms require a ground formula (unresolved guard found)".into(),
        )),
    }
}

/// Real-valued expression of the logic: a norm or a relation value.
/// These are the `R` sides of the comparison abbreviations below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealExpr {
    Norm(Term),
    Rel(String, Vec<Term>),
}

impl RealExpr {
    pub fn norm(t: Term) -> RealExpr {
        RealExpr::Norm(t)
    }

    /// `k·‖t‖` as the norm of the scaled term.
    pub fn scaled_norm(k: IdxExpr, t: Term) -> RealExpr {
        RealExpr::Norm(Term::scale(k, t))
    }

    pub fn rel(name: &str, args: Vec<Term>) -> RealExpr {
        RealExpr::Rel(name.to_string(), args)
    }

    pub fn le(&self, bound: IdxExpr) -> PBFormula {
        match self {
            RealExpr::Norm(t) => PBFormula::norm_le(t.clone(), bound),
            RealExpr::Rel(name, args) => PBFormula::rel_le(name, args.clone(), bound),
        }
    }

    pub fn ge(&self, bound: IdxExpr) -> PBFormula {
        match self {
            RealExpr::Norm(t) => PBFormula::norm_ge(t.clone(), bound),
            RealExpr::Rel(name, args) => PBFormula::rel_ge(name, args.clone(), bound),
        }
    }
}

/// `A ≤ B` between two real-valued expressions, as the countable
/// conjunction over q ∈ Q of `A ≤ q ∨ B ≥ q`. The transforms then handle
/// the abbreviation through their generic clauses.
pub fn real_le(a: &RealExpr, b: &RealExpr, binder: &str) -> PBFormula {
    PBFormula::countable_and(
        binder,
        crate::syntax::domains::IndexDomain::Rationals,
        PBFormula::Or(vec![a.le(IdxExpr::binder(binder)), b.ge(IdxExpr::binder(binder))]),
    )
}

/// `A ≥ B`, as the countable conjunction of `A ≥ q ∨ B ≤ q`.
pub fn real_ge(a: &RealExpr, b: &RealExpr, binder: &str) -> PBFormula {
    PBFormula::countable_and(
        binder,
        crate::syntax::domains::IndexDomain::Rationals,
        PBFormula::Or(vec![a.ge(IdxExpr::binder(binder)), b.le(IdxExpr::binder(binder))]),
    )
}

/// `A = B` as the conjunction of the two one-sided comparisons.
pub fn real_eq(a: &RealExpr, b: &RealExpr, binder_le: &str, binder_ge: &str) -> PBFormula {
    PBFormula::And(vec![real_le(a, b, binder_le), real_ge(a, b, binder_ge)])
}

/// `A + B ≤ r` for a threshold expression r, as the countable conjunction
/// over s ∈ Q of `A ≤ s ∨ B ≤ r − s`.
pub fn sum_le(a: &RealExpr, b: &RealExpr, r: IdxExpr, binder: &str) -> PBFormula {
    PBFormula::countable_and(
        binder,
        crate::syntax::domains::IndexDomain::Rationals,
        PBFormula::Or(vec![
            a.le(IdxExpr::binder(binder)),
            b.le(IdxExpr::sub(r, IdxExpr::binder(binder))),
        ]),
    )
}

/// `A + B ≥ r`, as the countable conjunction of `A ≥ s ∨ B ≥ r − s`.
pub fn sum_ge(a: &RealExpr, b: &RealExpr, r: IdxExpr, binder: &str) -> PBFormula {
    PBFormula::countable_and(
        binder,
        crate::syntax::domains::IndexDomain::Rationals,
        PBFormula::Or(vec![
            a.ge(IdxExpr::binder(binder)),
            b.ge(IdxExpr::sub(r, IdxExpr::binder(binder))),
        ]),
    )
}

/// `A + B = C` for real-valued expressions, via two nested one-sided
/// encodings: ⋀_q ((A+B ≤ q) ∨ C ≥ q) and ⋀_q ((A+B ≥ q) ∨ C ≤ q).
pub fn sum_eq(a: &RealExpr, b: &RealExpr, c: &RealExpr, outer: &str, inner: &str) -> PBFormula {
    let le_side = PBFormula::countable_and(
        outer,
        crate::syntax::domains::IndexDomain::Rationals,
        PBFormula::Or(vec![
            sum_le(a, b, IdxExpr::binder(outer), inner),
            c.ge(IdxExpr::binder(outer)),
        ]),
    );
    let ge_side = PBFormula::countable_and(
        outer,
        crate::syntax::domains::IndexDomain::Rationals,
        PBFormula::Or(vec![
            sum_ge(a, b, IdxExpr::binder(outer), inner),
            c.le(IdxExpr::binder(outer)),
        ]),
    );
    PBFormula::And(vec![le_side, ge_side])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse_pb;
    use crate::syntax::print::print_pb;

    fn approx_str(src: &str, n: u32) -> String {
        print_pb(&approximate(&parse_pb(src).unwrap(), n).unwrap())
    }

    fn neg_str(src: &str, n: u32) -> String {
        print_pb(&weak_negation(&parse_pb(src).unwrap(), n).unwrap())
    }

    #[test]
    fn atom_margins() {
        assert_eq!(approx_str("(le (norm x1) 1)", 4), "(le (norm x1) 5/4)");
        assert_eq!(approx_str("(ge (norm x1) 0)", 4), "(ge (norm x1) -1/4)");
        assert_eq!(neg_str("(le (norm x1) 1)", 4), "(ge (norm x1) 5/4)");
        assert_eq!(neg_str("(ge (norm x1) 1)", 4), "(le (norm x1) 3/4)");
    }

    #[test]
    fn quantifier_bounds_relax_and_tighten() {
        assert_eq!(
            approx_str("(exists (y1 2) (and (le (norm y1) 2) (ge (norm (+ y1 (scale -1 x1))) 1)))", 2),
            "(exists (y1 5/2) (and (le (norm y1) 5/2) (ge (norm (+ y1 (scale -1 x1))) 1/2)))"
        );
        assert_eq!(
            approx_str("(forall (y1 1) (le (norm y1) 3))", 4),
            "(forall (y1 3/4) (le (norm y1) 13/4))"
        );
    }

    #[test]
    fn universal_bound_may_go_negative_without_clamping() {
        assert_eq!(
            approx_str("(forall (y1 1/4) (le (norm y1) 1))", 2),
            "(forall (y1 -1/4) (le (norm y1) 3/2))"
        );
    }

    #[test]
    fn countable_conjunction_truncates_to_n_instances() {
        let got = approx_str("(And i Nat (le (norm x1) (+ 1 (/ 1 i))))", 3);
        assert_eq!(
            got,
            "(and (le (norm x1) 7/3) (le (norm x1) 11/6) (le (norm x1) 5/3))"
        );
    }

    #[test]
    fn countable_conjunction_negates_to_a_disjunction() {
        let got = neg_str("(And i Nat (le (norm x1) (+ 1 (/ 1 i))))", 2);
        assert_eq!(got, "(or (ge (norm x1) 5/2) (ge (norm x1) 2))");
    }

    #[test]
    fn finite_explicit_domains_truncate_at_their_size() {
        let got = approx_str("(And i (list 1 2) (le (norm x1) i))", 5);
        assert_eq!(got, "(and (le (norm x1) 6/5) (le (norm x1) 11/5))");
    }

    #[test]
    fn negation_swaps_quantifiers() {
        assert_eq!(
            neg_str("(exists (y1 1) (and (le (norm y1) 1) (ge (norm y1) 2)))", 2),
            "(forall (y1 3/2) (or (ge (norm y1) 3/2) (le (norm y1) 3/2)))"
        );
        assert_eq!(
            neg_str("(forall (y1 1) (le (norm y1) 1/2))", 2),
            "(exists (y1 1/2) (ge (norm y1) 1))"
        );
    }

    #[test]
    fn degenerate_universal_negation_clamps_to_the_zero_point() {
        assert_eq!(
            neg_str("(forall (y1 1/4) (le (norm y1) 1/8))", 2),
            "(ge (norm 0) 5/8)"
        );
    }

    #[test]
    fn outputs_are_finitary() {
        let srcs = [
            "(And i Nat (le (norm x1) i))",
            "(And q Q (or (le (norm x1) q) (ge (norm x1) q)))",
            "(exists (y1 1) (And i Nat (le (norm y1) i)))",
        ];
        for src in srcs {
            let f = parse_pb(src).unwrap();
            for n in 1..=4 {
                assert!(approximate(&f, n).unwrap().is_finitary(), "{src} at {n}");
                assert!(weak_negation(&f, n).unwrap().is_finitary(), "{src} at {n}");
            }
        }
    }

    #[test]
    fn level_zero_is_rejected() {
        let f = parse_pb("(le (norm x1) 1)").unwrap();
        assert!(approximate(&f, 0).is_err());
        assert!(weak_negation(&f, 0).is_err());
    }

    #[test]
    fn real_comparison_abbreviation_prints_as_the_template() {
        let a = RealExpr::rel("R", vec![Term::var("x", 1)]);
        let b = RealExpr::rel("S", vec![Term::var("x", 1)]);
        let f = real_le(&a, &b, "q");
        assert_eq!(
            print_pb(&f),
            "(And q Q (or (le (rel R x1) q) (ge (rel S x1) q)))"
        );
        let got = print_pb(&approximate(&f, 2).unwrap());
        assert_eq!(
            got,
            "(and (or (le (rel R x1) 1/2) (ge (rel S x1) -1/2)) (or (le (rel R x1) 3/2) (ge (rel S x1) 1/2)))"
        );
    }

    #[test]
    fn scaled_norm_builder_uses_a_scaled_term() {
        let e = RealExpr::scaled_norm(IdxExpr::int(2), Term::var("x", 1));
        assert_eq!(print_pb(&e.ge(IdxExpr::int(1))), "(ge (norm (scale 2 x1)) 1)");
    }

    #[test]
    fn prefix_truncation_keeps_atoms_and_bounds_exact() {
        let f = parse_pb("(And i Nat (le (norm (c)) (/ 1 i)))").unwrap();
        let got = print_pb(&truncate_prefix(&f, 3).unwrap());
        assert_eq!(got, "(and (le (norm (c)) 1) (le (norm (c)) 1/2) (le (norm (c)) 1/3))");

        let f = parse_pb("(forall (x1 2) (exists (y1 1) (ge (norm y1) 1/2)))").unwrap();
        assert_eq!(print_pb(&truncate_prefix(&f, 5).unwrap()), print_pb(&f));
    }

    #[test]
    fn prefix_truncation_resolves_guards_under_the_binder() {
        let f = parse_pb("(And q Q (or (guard lt q 0) (ge (norm x1) q)))").unwrap();
        let got = print_pb(&truncate_prefix(&f, 3).unwrap());
        assert_eq!(got, "(and (or (ge (norm x1) 0)) (or (ge (norm x1) 1)) (and))");
        let bare = parse_pb("(guard lt 1 0)").unwrap();
        assert!(truncate_prefix(&bare, 1).is_err());
    }

    #[test]
    fn prefix_truncation_is_a_subconjunction_of_the_approximation_limit() {
        // The depth-d prefix of ⋀_i ||c|| ≤ 1+1/i is implied by the full
        // formula and never relaxes: its bounds agree with the display.
        let f = parse_pb("(And i Nat (le (norm (c)) (+ 1 (/ 1 i))))").unwrap();
        let got = print_pb(&truncate_prefix(&f, 2).unwrap());
        assert_eq!(got, "(and (le (norm (c)) 2) (le (norm (c)) 3/2))");
    }
}
