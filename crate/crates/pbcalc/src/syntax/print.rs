//! Canonical single-line printer.
//!
//! Printing and parsing are mutually inverse on canonical forms: parsing a
//! printed formula reproduces it structurally, and printing a parsed
//! canonical string reproduces the string byte for byte. Abbreviations
//! (implication, disjunction at the infinitary layer, bounded universal
//! sequence quantification) print as their definitions.

use crate::rational::format_rational;
use crate::syntax::ast::{
    AtomicFormula, BoundSeq, IdxExpr, LAFormula, PBFormula, QuantVar, Term, VarRef,
};
use crate::syntax::domains::{IndexDomain, IndexValue};
use std::fmt::Write;

pub fn print_idx(e: &IdxExpr) -> String {
    let mut s = String::new();
    write_idx(&mut s, e);
    s
}

fn write_idx(out: &mut String, e: &IdxExpr) {
    match e {
        IdxExpr::Const(q) => out.push_str(&format_rational(q)),
        IdxExpr::Infinity => out.push_str("inf"),
        IdxExpr::Binder(name) => out.push_str(name),
        IdxExpr::Comp(name, idx) => {
            write!(out, "(comp {name} ").unwrap();
            write_idx(out, idx);
            out.push(')');
        }
        IdxExpr::Add(a, b) => write_idx_binary(out, "+", a, b),
        IdxExpr::Sub(a, b) => write_idx_binary(out, "-", a, b),
        IdxExpr::Mul(a, b) => write_idx_binary(out, "*", a, b),
        IdxExpr::Div(a, b) => write_idx_binary(out, "/", a, b),
        IdxExpr::Pow(a, b) => write_idx_binary(out, "pow", a, b),
        IdxExpr::Neg(a) => {
            out.push_str("(neg ");
            write_idx(out, a);
            out.push(')');
        }
        IdxExpr::Abs(a) => {
            out.push_str("(abs ");
            write_idx(out, a);
            out.push(')');
        }
        IdxExpr::SumOver { var, lo, hi, body } => write_idx_range(out, "isum", var, lo, hi, body),
        IdxExpr::MaxOver { var, lo, hi, body } => write_idx_range(out, "imax", var, lo, hi, body),
    }
}

fn write_idx_binary(out: &mut String, op: &str, a: &IdxExpr, b: &IdxExpr) {
    write!(out, "({op} ").unwrap();
    write_idx(out, a);
    out.push(' ');
    write_idx(out, b);
    out.push(')');
}

fn write_idx_range(out: &mut String, op: &str, var: &str, lo: &IdxExpr, hi: &IdxExpr, body: &IdxExpr) {
    write!(out, "({op} {var} ").unwrap();
    write_idx(out, lo);
    out.push(' ');
    write_idx(out, hi);
    out.push(' ');
    write_idx(out, body);
    out.push(')');
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(v) => write_varref(out, v),
        Term::Zero => out.push('0'),
        Term::Sum(a, b) => {
            out.push_str("(+ ");
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        Term::Scale(k, inner) => {
            out.push_str("(scale ");
            write_idx(out, k);
            out.push(' ');
            write_term(out, inner);
            out.push(')');
        }
        Term::Apply { func, args } => {
            write!(out, "({func}").unwrap();
            for a in args {
                out.push(' ');
                write_term(out, a);
            }
            out.push(')');
        }
        Term::SumOver { var, lo, hi, body } => {
            write!(out, "(tsum {var} ").unwrap();
            write_idx(out, lo);
            out.push(' ');
            write_idx(out, hi);
            out.push(' ');
            write_term(out, body);
            out.push(')');
        }
    }
}

fn write_varref(out: &mut String, v: &VarRef) {
    match v.as_ground() {
        Some((family, index)) => write!(out, "{family}{index}").unwrap(),
        None => {
            write!(out, "(var {} ", v.family).unwrap();
            write_idx(out, &v.index);
            out.push(')');
        }
    }
}

fn write_quant_var(out: &mut String, v: &QuantVar) {
    write!(out, "{}{}", v.family, v.index).unwrap();
}

fn write_atom(out: &mut String, a: &AtomicFormula) {
    match a {
        AtomicFormula::NormLe(t, b) => write_norm_atom(out, "le", t, b),
        AtomicFormula::NormGe(t, b) => write_norm_atom(out, "ge", t, b),
        AtomicFormula::RelLe { rel, args, bound } => write_rel_atom(out, "le", rel, args, bound),
        AtomicFormula::RelGe { rel, args, bound } => write_rel_atom(out, "ge", rel, args, bound),
    }
}

fn write_norm_atom(out: &mut String, cmp: &str, t: &Term, b: &IdxExpr) {
    write!(out, "({cmp} (norm ").unwrap();
    write_term(out, t);
    out.push_str(") ");
    write_idx(out, b);
    out.push(')');
}

fn write_rel_atom(out: &mut String, cmp: &str, rel: &str, args: &[Term], bound: &IdxExpr) {
    write!(out, "({cmp} (rel {rel}").unwrap();
    for a in args {
        out.push(' ');
        write_term(out, a);
    }
    out.push_str(") ");
    write_idx(out, bound);
    out.push(')');
}

pub fn print_value(v: &IndexValue) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s
}

fn write_value(out: &mut String, v: &IndexValue) {
    match v {
        IndexValue::Rat(q) => out.push_str(&format_rational(q)),
        IndexValue::Infinity => out.push_str("inf"),
        IndexValue::Tuple(items) => {
            out.push_str("(tuple");
            for item in items {
                out.push(' ');
                write_value(out, item);
            }
            out.push(')');
        }
    }
}

pub fn print_domain(d: &IndexDomain) -> String {
    let mut s = String::new();
    write_domain(&mut s, d);
    s
}

fn write_domain(out: &mut String, d: &IndexDomain) {
    match d {
        IndexDomain::Naturals => out.push_str("Nat"),
        IndexDomain::Rationals => out.push_str("Q"),
        IndexDomain::RationalsGE1Inf => out.push_str("Qsharp"),
        IndexDomain::IntsGE1Inf => out.push_str("QsharpInt"),
        IndexDomain::ConvexCoeffs(e) => {
            out.push_str("(CO ");
            write_idx(out, e);
            out.push(')');
        }
        IndexDomain::IncreasingIntTuples(e) => {
            out.push_str("(V ");
            write_idx(out, e);
            out.push(')');
        }
        IndexDomain::RationalTuples(e) => {
            out.push_str("(Qtuple ");
            write_idx(out, e);
            out.push(')');
        }
        IndexDomain::ExplicitList(items) => {
            out.push_str("(list");
            for item in items {
                out.push(' ');
                write_value(out, item);
            }
            out.push(')');
        }
    }
}

pub fn print_pb(f: &PBFormula) -> String {
    let mut s = String::new();
    write_pb(&mut s, f);
    s
}

fn write_pb(out: &mut String, f: &PBFormula) {
    match f {
        PBFormula::Atom(a) => write_atom(out, a),
        PBFormula::And(parts) => write_parts(out, "and", parts),
        PBFormula::Or(parts) => write_parts(out, "or", parts),
        PBFormula::CountableAnd { binder, domain, body } => {
            write!(out, "(And {binder} ").unwrap();
            write_domain(out, domain);
            out.push(' ');
            write_pb(out, body);
            out.push(')');
        }
        PBFormula::Exists { var, bound, body } => write_quant(out, "exists", var, bound, body),
        PBFormula::Forall { var, bound, body } => write_quant(out, "forall", var, bound, body),
        PBFormula::Guard { op, lhs, rhs } => {
            write!(out, "(guard {} ", op.token()).unwrap();
            write_idx(out, lhs);
            out.push(' ');
            write_idx(out, rhs);
            out.push(')');
        }
    }
}

fn write_parts(out: &mut String, head: &str, parts: &[PBFormula]) {
    write!(out, "({head}").unwrap();
    for p in parts {
        out.push(' ');
        write_pb(out, p);
    }
    out.push(')');
}

fn write_quant(out: &mut String, head: &str, var: &QuantVar, bound: &IdxExpr, body: &PBFormula) {
    write!(out, "({head} (").unwrap();
    write_quant_var(out, var);
    out.push(' ');
    write_idx(out, bound);
    out.push_str(") ");
    write_pb(out, body);
    out.push(')');
}

fn write_bounds(out: &mut String, b: &BoundSeq) {
    if b.prefix.is_empty() {
        out.push_str("(const ");
        out.push_str(&format_rational(&b.tail));
        out.push(')');
    } else {
        out.push_str("(list");
        for r in &b.prefix {
            out.push(' ');
            out.push_str(&format_rational(r));
        }
        out.push_str(" then ");
        out.push_str(&format_rational(&b.tail));
        out.push(')');
    }
}

/// Print a formula of the infinitary layer (the entry point; embedded
/// positive bounded formulas print without any wrapper).
pub fn print_la(f: &LAFormula) -> String {
    let mut s = String::new();
    write_la(&mut s, f);
    s
}

fn write_la(out: &mut String, f: &LAFormula) {
    match f {
        LAFormula::Embed(pb) => write_pb(out, pb),
        LAFormula::AndN(parts) => {
            out.push_str("(and");
            for p in parts {
                out.push(' ');
                write_la(out, p);
            }
            out.push(')');
        }
        LAFormula::AndW { binder, domain, body } => {
            write!(out, "(And {binder} ").unwrap();
            write_domain(out, domain);
            out.push(' ');
            write_la(out, body);
            out.push(')');
        }
        LAFormula::Not(inner) => {
            out.push_str("(not ");
            write_la(out, inner);
            out.push(')');
        }
        LAFormula::ExistsSeq { family, bounds, body } => {
            write!(out, "(existsSeq ({family} ").unwrap();
            write_bounds(out, bounds);
            out.push_str(") ");
            write_la(out, body);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use crate::syntax::ast::QuantVar;

    #[test]
    fn atoms_print_in_the_frozen_shape() {
        let f = PBFormula::norm_le(Term::var("x", 1), IdxExpr::rat(rat(5, 4)));
        assert_eq!(print_pb(&f), "(le (norm x1) 5/4)");
        let g = PBFormula::rel_ge("R", vec![Term::var("x", 1)], IdxExpr::int(0));
        assert_eq!(print_pb(&g), "(ge (rel R x1) 0)");
    }

    #[test]
    fn difference_prints_as_scaled_sum() {
        let t = Term::diff(Term::var("y", 1), Term::var("x", 1));
        assert_eq!(print_term(&t), "(+ y1 (scale -1 x1))");
    }

    #[test]
    fn quantifiers_print_with_bound_groups() {
        let f = PBFormula::exists(
            QuantVar::new("y", 1),
            IdxExpr::rat(rat(5, 2)),
            PBFormula::norm_ge(Term::var("y", 1), IdxExpr::rat(rat(1, 2))),
        );
        assert_eq!(print_pb(&f), "(exists (y1 5/2) (ge (norm y1) 1/2))");
    }

    #[test]
    fn countable_conjunction_prints_domain() {
        let body = PBFormula::norm_le(
            Term::var("x", 1),
            IdxExpr::add(IdxExpr::int(1), IdxExpr::div(IdxExpr::int(1), IdxExpr::binder("i"))),
        );
        let f = PBFormula::countable_and("i", IndexDomain::Naturals, body);
        assert_eq!(print_pb(&f), "(And i Nat (le (norm x1) (+ 1 (/ 1 i))))");
    }

    #[test]
    fn sequence_quantifier_prints_bound_spec() {
        let inner = LAFormula::Embed(PBFormula::truth());
        let c = LAFormula::exists_seq("x", BoundSeq::constant(rat_int(1)), inner.clone());
        assert_eq!(print_la(&c), "(existsSeq (x (const 1)) (and))");
        let b = BoundSeq { prefix: vec![rat_int(2), rat(1, 2)], tail: rat_int(1) };
        let l = LAFormula::exists_seq("x", b, inner);
        assert_eq!(print_la(&l), "(existsSeq (x (list 2 1/2 then 1)) (and))");
    }

    #[test]
    fn empty_connectives_print_bare() {
        assert_eq!(print_pb(&PBFormula::truth()), "(and)");
        assert_eq!(print_pb(&PBFormula::falsity()), "(or)");
    }
}
