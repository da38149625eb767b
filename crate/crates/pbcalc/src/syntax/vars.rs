//! Free-variable analysis and space-variable substitution.
//!
//! Space variables (`x1`, `y2`, …) are pairs of a family name and a
//! positive index. Index binders (the variables of countable conjunctions
//! and indexed sums) live in a separate namespace and are handled by the
//! instantiation machinery instead.

use crate::syntax::ast::{
    AtomicFormula, IdxExpr, LAFormula, PBFormula, Term, VarRef,
};
use std::collections::{BTreeMap, BTreeSet};

/// Free space variables of a term or formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeVars {
    /// Variables with ground indices.
    pub ground: BTreeSet<(String, u32)>,
    /// Families that occur with a symbolic (template) index.
    pub symbolic_families: BTreeSet<String>,
}

impl FreeVars {
    pub fn is_empty(&self) -> bool {
        self.ground.is_empty() && self.symbolic_families.is_empty()
    }

    /// Largest ground index of the family, 0 when absent.
    pub fn max_index(&self, family: &str) -> u32 {
        self.ground
            .iter()
            .filter(|(f, _)| f == family)
            .map(|(_, i)| *i)
            .max()
            .unwrap_or(0)
    }

    pub fn contains_family(&self, family: &str) -> bool {
        self.symbolic_families.contains(family)
            || self.ground.iter().any(|(f, _)| f == family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Binding<'a> {
    Var(&'a str, u32),
    Family(&'a str),
}

fn is_bound(bound: &[Binding<'_>], family: &str, index: u32) -> bool {
    bound.iter().any(|b| match b {
        Binding::Var(f, i) => *f == family && *i == index,
        Binding::Family(f) => *f == family,
    })
}

fn family_is_bound(bound: &[Binding<'_>], family: &str) -> bool {
    bound.iter().any(|b| matches!(b, Binding::Family(f) if *f == family))
}

fn collect_term(t: &Term, bound: &[Binding<'_>], acc: &mut FreeVars) {
    match t {
        Term::Var(v) => match v.as_ground() {
            Some((family, index)) => {
                if !is_bound(bound, family, index) {
                    acc.ground.insert((family.to_string(), index));
                }
            }
            None => {
                if !family_is_bound(bound, &v.family) {
                    acc.symbolic_families.insert(v.family.clone());
                }
            }
        },
        Term::Zero => {}
        Term::Sum(a, b) => {
            collect_term(a, bound, acc);
            collect_term(b, bound, acc);
        }
        Term::Scale(_, inner) => collect_term(inner, bound, acc),
        Term::Apply { args, .. } => {
            for a in args {
                collect_term(a, bound, acc);
            }
        }
        Term::SumOver { body, .. } => collect_term(body, bound, acc),
    }
}

fn collect_atom(a: &AtomicFormula, bound: &[Binding<'_>], acc: &mut FreeVars) {
    match a {
        AtomicFormula::NormLe(t, _) | AtomicFormula::NormGe(t, _) => {
            collect_term(t, bound, acc)
        }
        AtomicFormula::RelLe { args, .. } | AtomicFormula::RelGe { args, .. } => {
            for t in args {
                collect_term(t, bound, acc);
            }
        }
    }
}

fn collect_pb<'a>(f: &'a PBFormula, bound: &mut Vec<Binding<'a>>, acc: &mut FreeVars) {
    match f {
        PBFormula::Atom(a) => collect_atom(a, bound, acc),
        PBFormula::And(parts) | PBFormula::Or(parts) => {
            for p in parts {
                collect_pb(p, bound, acc);
            }
        }
        PBFormula::CountableAnd { body, .. } => collect_pb(body, bound, acc),
        PBFormula::Exists { var, body, .. } | PBFormula::Forall { var, body, .. } => {
            bound.push(Binding::Var(&var.family, var.index));
            collect_pb(body, bound, acc);
            bound.pop();
        }
        PBFormula::Guard { .. } => {}
    }
}

fn collect_la<'a>(f: &'a LAFormula, bound: &mut Vec<Binding<'a>>, acc: &mut FreeVars) {
    match f {
        LAFormula::Embed(pb) => collect_pb(pb, bound, acc),
        LAFormula::AndN(parts) => {
            for p in parts {
                collect_la(p, bound, acc);
            }
        }
        LAFormula::AndW { body, .. } => collect_la(body, bound, acc),
        LAFormula::Not(inner) => collect_la(inner, bound, acc),
        LAFormula::ExistsSeq { family, body, .. } => {
            bound.push(Binding::Family(family));
            collect_la(body, bound, acc);
            bound.pop();
        }
    }
}

pub fn free_vars_term(t: &Term) -> FreeVars {
    let mut acc = FreeVars::default();
    collect_term(t, &[], &mut acc);
    acc
}

pub fn free_vars_pb(f: &PBFormula) -> FreeVars {
    let mut acc = FreeVars::default();
    collect_pb(f, &mut Vec::new(), &mut acc);
    acc
}

pub fn free_vars_la(f: &LAFormula) -> FreeVars {
    let mut acc = FreeVars::default();
    collect_la(f, &mut Vec::new(), &mut acc);
    acc
}

/// Free index binders of an expression tree (names used in index
/// expressions without an enclosing countable conjunction or indexed
/// sum binding them). A formula is a closed template when this is empty.
pub fn free_index_binders_la(f: &LAFormula) -> BTreeSet<String> {
    let mut acc = BTreeSet::new();
    binders_la(f, &mut Vec::new(), &mut acc);
    acc
}

pub fn free_index_binders_pb(f: &PBFormula) -> BTreeSet<String> {
    let mut acc = BTreeSet::new();
    binders_pb(f, &mut Vec::new(), &mut acc);
    acc
}

fn binders_idx(e: &IdxExpr, scope: &mut Vec<String>, acc: &mut BTreeSet<String>) {
    match e {
        IdxExpr::Const(_) | IdxExpr::Infinity => {}
        IdxExpr::Binder(name) => {
            if !scope.iter().any(|s| s == name) {
                acc.insert(name.clone());
            }
        }
        IdxExpr::Comp(name, idx) => {
            if !scope.iter().any(|s| s == name) {
                acc.insert(name.clone());
            }
            binders_idx(idx, scope, acc);
        }
        IdxExpr::Add(a, b)
        | IdxExpr::Sub(a, b)
        | IdxExpr::Mul(a, b)
        | IdxExpr::Div(a, b)
        | IdxExpr::Pow(a, b) => {
            binders_idx(a, scope, acc);
            binders_idx(b, scope, acc);
        }
        IdxExpr::Neg(a) | IdxExpr::Abs(a) => binders_idx(a, scope, acc),
        IdxExpr::SumOver { var, lo, hi, body } | IdxExpr::MaxOver { var, lo, hi, body } => {
            binders_idx(lo, scope, acc);
            binders_idx(hi, scope, acc);
            scope.push(var.clone());
            binders_idx(body, scope, acc);
            scope.pop();
        }
    }
}

fn binders_term(t: &Term, scope: &mut Vec<String>, acc: &mut BTreeSet<String>) {
    match t {
        Term::Var(VarRef { index, .. }) => binders_idx(index, scope, acc),
        Term::Zero => {}
        Term::Sum(a, b) => {
            binders_term(a, scope, acc);
            binders_term(b, scope, acc);
        }
        Term::Scale(k, inner) => {
            binders_idx(k, scope, acc);
            binders_term(inner, scope, acc);
        }
        Term::Apply { args, .. } => {
            for a in args {
                binders_term(a, scope, acc);
            }
        }
        Term::SumOver { var, lo, hi, body } => {
            binders_idx(lo, scope, acc);
            binders_idx(hi, scope, acc);
            scope.push(var.clone());
            binders_term(body, scope, acc);
            scope.pop();
        }
    }
}

fn binders_pb(f: &PBFormula, scope: &mut Vec<String>, acc: &mut BTreeSet<String>) {
    match f {
        PBFormula::Atom(a) => match a {
            AtomicFormula::NormLe(t, b) | AtomicFormula::NormGe(t, b) => {
                binders_term(t, scope, acc);
                binders_idx(b, scope, acc);
            }
            AtomicFormula::RelLe { args, bound, .. }
            | AtomicFormula::RelGe { args, bound, .. } => {
                for t in args {
                    binders_term(t, scope, acc);
                }
                binders_idx(bound, scope, acc);
            }
        },
        PBFormula::And(parts) | PBFormula::Or(parts) => {
            for p in parts {
                binders_pb(p, scope, acc);
            }
        }
        PBFormula::CountableAnd { binder, domain, body } => {
            domain_binders(domain, scope, acc);
            scope.push(binder.clone());
            binders_pb(body, scope, acc);
            scope.pop();
        }
        PBFormula::Exists { bound, body, .. } | PBFormula::Forall { bound, body, .. } => {
            binders_idx(bound, scope, acc);
            binders_pb(body, scope, acc);
        }
        PBFormula::Guard { lhs, rhs, .. } => {
            binders_idx(lhs, scope, acc);
            binders_idx(rhs, scope, acc);
        }
    }
}

fn binders_la(f: &LAFormula, scope: &mut Vec<String>, acc: &mut BTreeSet<String>) {
    match f {
        LAFormula::Embed(pb) => binders_pb(pb, scope, acc),
        LAFormula::AndN(parts) => {
            for p in parts {
                binders_la(p, scope, acc);
            }
        }
        LAFormula::AndW { binder, domain, body } => {
            domain_binders(domain, scope, acc);
            scope.push(binder.clone());
            binders_la(body, scope, acc);
            scope.pop();
        }
        LAFormula::Not(inner) => binders_la(inner, scope, acc),
        LAFormula::ExistsSeq { body, .. } => binders_la(body, scope, acc),
    }
}

fn domain_binders(
    domain: &crate::syntax::domains::IndexDomain,
    scope: &mut Vec<String>,
    acc: &mut BTreeSet<String>,
) {
    use crate::syntax::domains::IndexDomain as D;
    match domain {
        D::ConvexCoeffs(e) | D::IncreasingIntTuples(e) | D::RationalTuples(e) => {
            binders_idx(e, scope, acc)
        }
        _ => {}
    }
}

/// Substitute a ground space variable by a term throughout a formula.
/// Quantifiers binding the same variable shadow the substitution, as does
/// a sequence quantifier over the variable's family.
pub fn subst_space_var_pb(
    f: &PBFormula,
    family: &str,
    index: u32,
    replacement: &Term,
) -> PBFormula {
    match f {
        PBFormula::Atom(a) => PBFormula::Atom(subst_atom(a, family, index, replacement)),
        PBFormula::And(parts) => PBFormula::And(
            parts.iter().map(|p| subst_space_var_pb(p, family, index, replacement)).collect(),
        ),
        PBFormula::Or(parts) => PBFormula::Or(
            parts.iter().map(|p| subst_space_var_pb(p, family, index, replacement)).collect(),
        ),
        PBFormula::CountableAnd { binder, domain, body } => PBFormula::CountableAnd {
            binder: binder.clone(),
            domain: domain.clone(),
            body: Box::new(subst_space_var_pb(body, family, index, replacement)),
        },
        PBFormula::Exists { var, bound, body } => {
            let body = if var.family == family && var.index == index {
                body.as_ref().clone()
            } else {
                subst_space_var_pb(body, family, index, replacement)
            };
            PBFormula::Exists { var: var.clone(), bound: bound.clone(), body: Box::new(body) }
        }
        PBFormula::Forall { var, bound, body } => {
            let body = if var.family == family && var.index == index {
                body.as_ref().clone()
            } else {
                subst_space_var_pb(body, family, index, replacement)
            };
            PBFormula::Forall { var: var.clone(), bound: bound.clone(), body: Box::new(body) }
        }
        PBFormula::Guard { .. } => f.clone(),
    }
}

pub fn subst_space_var_la(
    f: &LAFormula,
    family: &str,
    index: u32,
    replacement: &Term,
) -> LAFormula {
    match f {
        LAFormula::Embed(pb) => {
            LAFormula::Embed(subst_space_var_pb(pb, family, index, replacement))
        }
        LAFormula::AndN(parts) => LAFormula::AndN(
            parts.iter().map(|p| subst_space_var_la(p, family, index, replacement)).collect(),
        ),
        LAFormula::AndW { binder, domain, body } => LAFormula::AndW {
            binder: binder.clone(),
            domain: domain.clone(),
            body: Box::new(subst_space_var_la(body, family, index, replacement)),
        },
        LAFormula::Not(inner) => {
            LAFormula::Not(Box::new(subst_space_var_la(inner, family, index, replacement)))
        }
        LAFormula::ExistsSeq { family: seq_family, bounds, body } => {
            let body = if seq_family == family {
                body.as_ref().clone()
            } else {
                subst_space_var_la(body, family, index, replacement)
            };
            LAFormula::ExistsSeq {
                family: seq_family.clone(),
                bounds: bounds.clone(),
                body: Box::new(body),
            }
        }
    }
}

fn subst_atom(
    a: &AtomicFormula,
    family: &str,
    index: u32,
    replacement: &Term,
) -> AtomicFormula {
    match a {
        AtomicFormula::NormLe(t, b) => {
            AtomicFormula::NormLe(subst_term(t, family, index, replacement), b.clone())
        }
        AtomicFormula::NormGe(t, b) => {
            AtomicFormula::NormGe(subst_term(t, family, index, replacement), b.clone())
        }
        AtomicFormula::RelLe { rel, args, bound } => AtomicFormula::RelLe {
            rel: rel.clone(),
            args: args.iter().map(|t| subst_term(t, family, index, replacement)).collect(),
            bound: bound.clone(),
        },
        AtomicFormula::RelGe { rel, args, bound } => AtomicFormula::RelGe {
            rel: rel.clone(),
            args: args.iter().map(|t| subst_term(t, family, index, replacement)).collect(),
            bound: bound.clone(),
        },
    }
}

fn subst_term(t: &Term, family: &str, index: u32, replacement: &Term) -> Term {
    match t {
        Term::Var(v) => match v.as_ground() {
            Some((f, i)) if f == family && i == index => replacement.clone(),
            _ => t.clone(),
        },
        Term::Zero => Term::Zero,
        Term::Sum(a, b) => Term::Sum(
            Box::new(subst_term(a, family, index, replacement)),
            Box::new(subst_term(b, family, index, replacement)),
        ),
        Term::Scale(k, inner) => {
            Term::Scale(k.clone(), Box::new(subst_term(inner, family, index, replacement)))
        }
        Term::Apply { func, args } => Term::Apply {
            func: func.clone(),
            args: args.iter().map(|a| subst_term(a, family, index, replacement)).collect(),
        },
        Term::SumOver { var, lo, hi, body } => Term::SumOver {
            var: var.clone(),
            lo: lo.clone(),
            hi: hi.clone(),
            body: Box::new(subst_term(body, family, index, replacement)),
        },
    }
}

/// Build a map from each family to the largest quantifier index appearing
/// anywhere in the formula (bound or free), used to pick fresh indices.
pub fn quantifier_index_ceiling(f: &LAFormula) -> BTreeMap<String, u32> {
    let mut acc = BTreeMap::new();
    ceiling_la(f, &mut acc);
    acc
}

fn bump(acc: &mut BTreeMap<String, u32>, family: &str, index: u32) {
    let e = acc.entry(family.to_string()).or_insert(0);
    *e = (*e).max(index);
}

fn ceiling_la(f: &LAFormula, acc: &mut BTreeMap<String, u32>) {
    match f {
        LAFormula::Embed(pb) => ceiling_pb(pb, acc),
        LAFormula::AndN(parts) => parts.iter().for_each(|p| ceiling_la(p, acc)),
        LAFormula::AndW { body, .. } => ceiling_la(body, acc),
        LAFormula::Not(inner) => ceiling_la(inner, acc),
        LAFormula::ExistsSeq { body, .. } => ceiling_la(body, acc),
    }
}

fn ceiling_pb(f: &PBFormula, acc: &mut BTreeMap<String, u32>) {
    match f {
        PBFormula::Atom(a) => ceiling_atom(a, acc),
        PBFormula::And(parts) | PBFormula::Or(parts) => {
            parts.iter().for_each(|p| ceiling_pb(p, acc))
        }
        PBFormula::CountableAnd { body, .. } => ceiling_pb(body, acc),
        PBFormula::Exists { var, body, .. } | PBFormula::Forall { var, body, .. } => {
            bump(acc, &var.family, var.index);
            ceiling_pb(body, acc);
        }
        PBFormula::Guard { .. } => {}
    }
}

fn ceiling_atom(a: &AtomicFormula, acc: &mut BTreeMap<String, u32>) {
    let mut on_term = |t: &Term| ceiling_term(t, acc);
    match a {
        AtomicFormula::NormLe(t, _) | AtomicFormula::NormGe(t, _) => on_term(t),
        AtomicFormula::RelLe { args, .. } | AtomicFormula::RelGe { args, .. } => {
            args.iter().for_each(on_term)
        }
    }
}

fn ceiling_term(t: &Term, acc: &mut BTreeMap<String, u32>) {
    match t {
        Term::Var(v) => {
            if let Some((f, i)) = v.as_ground() {
                bump(acc, f, i);
            }
        }
        Term::Zero => {}
        Term::Sum(a, b) => {
            ceiling_term(a, acc);
            ceiling_term(b, acc);
        }
        Term::Scale(_, inner) => ceiling_term(inner, acc),
        Term::Apply { args, .. } => args.iter().for_each(|a| ceiling_term(a, acc)),
        Term::SumOver { body, .. } => ceiling_term(body, acc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::{PBFormula, QuantVar, Term};

    fn x(i: u32) -> Term {
        Term::var("x", i)
    }

    #[test]
    fn free_vars_respect_quantifier_binding() {
        let f = PBFormula::exists(
            QuantVar::new("y", 1),
            IdxExpr::int(1),
            PBFormula::norm_le(Term::sum(Term::var("y", 1), x(2)), IdxExpr::int(1)),
        );
        let fv = free_vars_pb(&f);
        assert!(fv.ground.contains(&("x".to_string(), 2)));
        assert!(!fv.ground.contains(&("y".to_string(), 1)));
        assert_eq!(fv.max_index("x"), 2);
    }

    #[test]
    fn sequence_quantifier_binds_whole_family() {
        let inner = LAFormula::Embed(PBFormula::norm_le(
            Term::sum(x(1), x(7)),
            IdxExpr::int(1),
        ));
        let bounds = crate::syntax::ast::BoundSeq::constant(crate::rational::rat_int(1));
        let f = LAFormula::exists_seq("x", bounds, inner);
        assert!(free_vars_la(&f).is_empty());
    }

    #[test]
    fn substitution_replaces_ground_occurrences_only() {
        let f = PBFormula::norm_le(Term::sum(x(1), x(2)), IdxExpr::int(1));
        let g = subst_space_var_pb(&f, "x", 1, &Term::Zero);
        let expect = PBFormula::norm_le(Term::sum(Term::Zero, x(2)), IdxExpr::int(1));
        assert_eq!(g, expect);
    }

    #[test]
    fn substitution_is_shadowed_by_binding_quantifier() {
        let f = PBFormula::forall(
            QuantVar::new("y", 1),
            IdxExpr::int(1),
            PBFormula::norm_ge(Term::var("y", 1), IdxExpr::int(0)),
        );
        let g = subst_space_var_pb(&f, "y", 1, &Term::Zero);
        assert_eq!(f, g);
    }

    #[test]
    fn symbolic_indices_are_reported_by_family() {
        let t = Term::Var(VarRef::symbolic("x", IdxExpr::binder("i")));
        let fv = free_vars_term(&t);
        assert!(fv.ground.is_empty());
        assert!(fv.symbolic_families.contains("x"));
    }
}
