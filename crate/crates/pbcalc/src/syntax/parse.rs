//! Parser from the s-expression surface syntax to the formula ASTs.
//!
//! The reading is maximally positive bounded: a form whose children all lie
//! in the positive bounded fragment parses into that fragment, so `(and …)`
//! over atoms is a `PBFormula::And` rather than an infinitary conjunction.
//! Together with the canonicalizing constructors this makes parse and print
//! mutually inverse on canonical forms.
//!
//! Abbreviations `imp`, `orI`, and `forallSeq` desugar at parse time to
//! their definitions over `not`, `and`, and `existsSeq`.

use crate::rational::parse_rational;
use crate::sexpr::{read_one, Pos, SExpr};
use crate::syntax::ast::{
    AtomicFormula, BoundSeq, CmpOp, IdxExpr, LAFormula, PBFormula, QuantVar, Term, VarRef,
};
use crate::syntax::domains::{IndexDomain, IndexValue};
use crate::{Error, Result};

fn err(pos: Pos, msg: impl Into<String>) -> Error {
    Error::parse(pos.line, pos.col, msg)
}

fn expect_arity(args: &[SExpr], n: usize, what: &str, pos: Pos) -> Result<()> {
    if args.len() != n {
        return Err(err(pos, format!("{what} takes {n} arguments, found {}", args.len())));
    }
    Ok(())
}

/// Parse a formula of the infinitary layer (the general entry point).
pub fn parse_la(src: &str) -> Result<LAFormula> {
    parse_la_sexpr(&read_one(src)?)
}

/// Parse a positive bounded formula; infinitary connectives are rejected.
pub fn parse_pb(src: &str) -> Result<PBFormula> {
    let pos = Pos { line: 1, col: 1 };
    match parse_la(src)? {
        LAFormula::Embed(pb) => Ok(pb),
        _ => Err(err(pos, "formula is not positive bounded")),
    }
}

pub fn parse_term_str(src: &str) -> Result<Term> {
    parse_term(&read_one(src)?)
}

pub fn parse_idx_str(src: &str) -> Result<IdxExpr> {
    parse_idx(&read_one(src)?)
}

pub fn parse_la_sexpr(e: &SExpr) -> Result<LAFormula> {
    match e {
        SExpr::Atom(_, pos) => Err(err(*pos, "expected a formula")),
        SExpr::List(..) => {
            let (head, args, pos) = e.head()?;
            match head {
                "le" | "ge" => Ok(LAFormula::Embed(PBFormula::Atom(parse_atom(head, args, pos)?))),
                "guard" => Ok(LAFormula::Embed(parse_guard(args, pos)?)),
                "and" => {
                    let parts = args.iter().map(parse_la_sexpr).collect::<Result<Vec<_>>>()?;
                    Ok(LAFormula::and_n(parts))
                }
                "or" => {
                    let mut parts = Vec::with_capacity(args.len());
                    for a in args {
                        match parse_la_sexpr(a)? {
                            LAFormula::Embed(pb) => parts.push(pb),
                            _ => {
                                return Err(err(
                                    a.pos(),
                                    "finite disjunction is positive bounded; use orI for the infinitary layer",
                                ))
                            }
                        }
                    }
                    Ok(LAFormula::Embed(PBFormula::Or(parts)))
                }
                "And" => {
                    expect_arity(args, 3, "And", pos)?;
                    let binder = parse_binder_name(&args[0])?;
                    let domain = parse_domain(&args[1])?;
                    let body = parse_la_sexpr(&args[2])?;
                    Ok(LAFormula::and_w(&binder, domain, body))
                }
                "exists" | "forall" => {
                    expect_arity(args, 2, head, pos)?;
                    let (var, bound) = parse_quant_group(&args[0])?;
                    let body = match parse_la_sexpr(&args[1])? {
                        LAFormula::Embed(pb) => pb,
                        _ => {
                            return Err(err(
                                args[1].pos(),
                                "bounded quantifier body must be positive bounded",
                            ))
                        }
                    };
                    Ok(LAFormula::Embed(if head == "exists" {
                        PBFormula::exists(var, bound, body)
                    } else {
                        PBFormula::forall(var, bound, body)
                    }))
                }
                "not" => {
                    expect_arity(args, 1, "not", pos)?;
                    Ok(LAFormula::not(parse_la_sexpr(&args[0])?))
                }
                "existsSeq" => {
                    expect_arity(args, 2, "existsSeq", pos)?;
                    let (family, bounds) = parse_seq_group(&args[0])?;
                    Ok(LAFormula::exists_seq(&family, bounds, parse_la_sexpr(&args[1])?))
                }
                "forallSeq" => {
                    expect_arity(args, 2, "forallSeq", pos)?;
                    let (family, bounds) = parse_seq_group(&args[0])?;
                    Ok(LAFormula::forall_seq(&family, bounds, parse_la_sexpr(&args[1])?))
                }
                "imp" => {
                    expect_arity(args, 2, "imp", pos)?;
                    Ok(LAFormula::implies(parse_la_sexpr(&args[0])?, parse_la_sexpr(&args[1])?))
                }
                "orI" => {
                    expect_arity(args, 2, "orI", pos)?;
                    Ok(LAFormula::or_abbrev(
                        parse_la_sexpr(&args[0])?,
                        parse_la_sexpr(&args[1])?,
                    ))
                }
                other => Err(err(pos, format!("unknown formula head `{other}`"))),
            }
        }
    }
}

fn parse_atom(cmp: &str, args: &[SExpr], pos: Pos) -> Result<AtomicFormula> {
    expect_arity(args, 2, cmp, pos)?;
    let bound = parse_idx(&args[1])?;
    let (inner_head, inner_args, inner_pos) = args[0].head()?;
    match inner_head {
        "norm" => {
            expect_arity(inner_args, 1, "norm", inner_pos)?;
            let t = parse_term(&inner_args[0])?;
            Ok(if cmp == "le" {
                AtomicFormula::NormLe(t, bound)
            } else {
                AtomicFormula::NormGe(t, bound)
            })
        }
        "rel" => {
            if inner_args.is_empty() {
                return Err(err(inner_pos, "rel needs a relation symbol"));
            }
            let rel = inner_args[0].atom("a relation symbol")?.to_string();
            let ts = inner_args[1..].iter().map(parse_term).collect::<Result<Vec<_>>>()?;
            Ok(if cmp == "le" {
                AtomicFormula::RelLe { rel, args: ts, bound }
            } else {
                AtomicFormula::RelGe { rel, args: ts, bound }
            })
        }
        other => Err(err(inner_pos, format!("expected norm or rel, found `{other}`"))),
    }
}

fn parse_guard(args: &[SExpr], pos: Pos) -> Result<PBFormula> {
    expect_arity(args, 3, "guard", pos)?;
    let op_text = args[0].atom("a comparison operator")?;
    let op = match op_text {
        "le" => CmpOp::Le,
        "lt" => CmpOp::Lt,
        "ge" => CmpOp::Ge,
        "gt" => CmpOp::Gt,
        "eq" => CmpOp::Eq,
        "ne" => CmpOp::Ne,
        other => return Err(err(args[0].pos(), format!("unknown comparison `{other}`"))),
    };
    Ok(PBFormula::guard(op, parse_idx(&args[1])?, parse_idx(&args[2])?))
}

fn parse_quant_group(e: &SExpr) -> Result<(QuantVar, IdxExpr)> {
    let items = e.list("a (variable bound) group")?;
    if items.len() != 2 {
        return Err(err(e.pos(), "quantifier group takes a variable and a bound"));
    }
    let name = items[0].atom("a variable")?;
    let (family, index) = split_var_name(name, items[0].pos())?;
    Ok((QuantVar { family, index }, parse_idx(&items[1])?))
}

fn parse_seq_group(e: &SExpr) -> Result<(String, BoundSeq)> {
    let items = e.list("a (family bounds) group")?;
    if items.len() != 2 {
        return Err(err(e.pos(), "sequence group takes a family and a bound spec"));
    }
    let family = parse_binder_name(&items[0])?;
    let bounds = parse_bound_seq(&items[1])?;
    if !bounds.all_nonneg() {
        return Err(Error::NegativeBound(
            "sequence quantifier bounds must be non-negative".into(),
        ));
    }
    Ok((family, bounds))
}

fn parse_bound_seq(e: &SExpr) -> Result<BoundSeq> {
    let (head, args, pos) = e.head()?;
    match head {
        "const" => {
            expect_arity(args, 1, "const", pos)?;
            Ok(BoundSeq::constant(parse_rational_atom(&args[0])?))
        }
        "list" => {
            let then_at = args
                .iter()
                .position(|a| matches!(a, SExpr::Atom(s, _) if s == "then"))
                .ok_or_else(|| err(pos, "bound list needs `then` before the tail"))?;
            if then_at == 0 || then_at + 2 != args.len() {
                return Err(err(pos, "bound list shape is (list r1 … rk then r)"));
            }
            let prefix = args[..then_at]
                .iter()
                .map(parse_rational_atom)
                .collect::<Result<Vec<_>>>()?;
            let tail = parse_rational_atom(&args[then_at + 1])?;
            Ok(BoundSeq { prefix, tail })
        }
        other => Err(err(pos, format!("expected const or list bound spec, found `{other}`"))),
    }
}

fn parse_rational_atom(e: &SExpr) -> Result<crate::Rational> {
    let text = e.atom("a rational")?;
    parse_rational(text).map_err(|_| err(e.pos(), format!("`{text}` is not a rational")))
}

fn parse_binder_name(e: &SExpr) -> Result<String> {
    let name = e.atom("a name")?;
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(err(e.pos(), format!("`{name}` is not a valid name (letters only)")));
    }
    Ok(name.to_string())
}

fn split_var_name(name: &str, pos: Pos) -> Result<(String, u32)> {
    let split = name.find(|c: char| c.is_ascii_digit()).ok_or_else(|| {
        err(pos, format!("variable `{name}` must end with a positive index"))
    })?;
    let (family, digits) = name.split_at(split);
    if family.is_empty() || !family.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(err(pos, format!("variable `{name}` has an invalid family name")));
    }
    let index: u32 = digits
        .parse()
        .map_err(|_| err(pos, format!("variable `{name}` has an invalid index")))?;
    if index == 0 {
        return Err(err(pos, "variable indices start at 1"));
    }
    Ok((family.to_string(), index))
}

pub fn parse_term(e: &SExpr) -> Result<Term> {
    match e {
        SExpr::Atom(s, pos) => {
            if s == "0" {
                return Ok(Term::Zero);
            }
            let (family, index) = split_var_name(s, *pos)?;
            Ok(Term::var(&family, index))
        }
        SExpr::List(..) => {
            let (head, args, pos) = e.head()?;
            match head {
                "+" => {
                    expect_arity(args, 2, "+", pos)?;
                    Ok(Term::sum(parse_term(&args[0])?, parse_term(&args[1])?))
                }
                "-" => {
                    expect_arity(args, 2, "-", pos)?;
                    Ok(Term::diff(parse_term(&args[0])?, parse_term(&args[1])?))
                }
                "scale" => {
                    expect_arity(args, 2, "scale", pos)?;
                    Ok(Term::scale(parse_idx(&args[0])?, parse_term(&args[1])?))
                }
                "var" => {
                    expect_arity(args, 2, "var", pos)?;
                    let family = parse_binder_name(&args[0])?;
                    Ok(Term::Var(VarRef { family, index: parse_idx(&args[1])? }))
                }
                "tsum" => {
                    expect_arity(args, 4, "tsum", pos)?;
                    Ok(Term::SumOver {
                        var: parse_binder_name(&args[0])?,
                        lo: parse_idx(&args[1])?,
                        hi: parse_idx(&args[2])?,
                        body: Box::new(parse_term(&args[3])?),
                    })
                }
                "norm" | "rel" => Err(err(pos, format!("`{head}` is not a term"))),
                func => {
                    let well_formed = func.starts_with(|c: char| c.is_ascii_alphabetic())
                        && func.chars().all(|c| c.is_ascii_alphanumeric());
                    if !well_formed {
                        return Err(err(pos, format!("unknown term head `{func}`")));
                    }
                    let ts = args.iter().map(parse_term).collect::<Result<Vec<_>>>()?;
                    Ok(Term::Apply { func: func.to_string(), args: ts })
                }
            }
        }
    }
}

pub fn parse_idx(e: &SExpr) -> Result<IdxExpr> {
    match e {
        SExpr::Atom(s, pos) => {
            if s == "inf" {
                return Ok(IdxExpr::Infinity);
            }
            if let Ok(q) = parse_rational(s) {
                return Ok(IdxExpr::Const(q));
            }
            if s.chars().all(|c| c.is_ascii_alphabetic()) && !s.is_empty() {
                return Ok(IdxExpr::Binder(s.clone()));
            }
            Err(err(*pos, format!("`{s}` is not an index expression")))
        }
        SExpr::List(..) => {
            let (head, args, pos) = e.head()?;
            match head {
                "+" | "-" | "*" | "/" | "pow" => {
                    expect_arity(args, 2, head, pos)?;
                    let a = Box::new(parse_idx(&args[0])?);
                    let b = Box::new(parse_idx(&args[1])?);
                    Ok(match head {
                        "+" => IdxExpr::Add(a, b),
                        "-" => IdxExpr::Sub(a, b),
                        "*" => IdxExpr::Mul(a, b),
                        "/" => IdxExpr::Div(a, b),
                        _ => IdxExpr::Pow(a, b),
                    })
                }
                "neg" | "abs" => {
                    expect_arity(args, 1, head, pos)?;
                    let a = Box::new(parse_idx(&args[0])?);
                    Ok(if head == "neg" { IdxExpr::Neg(a) } else { IdxExpr::Abs(a) })
                }
                "comp" => {
                    expect_arity(args, 2, "comp", pos)?;
                    let name = parse_binder_name(&args[0])?;
                    Ok(IdxExpr::Comp(name, Box::new(parse_idx(&args[1])?)))
                }
                "isum" | "imax" => {
                    expect_arity(args, 4, head, pos)?;
                    let var = parse_binder_name(&args[0])?;
                    let lo = Box::new(parse_idx(&args[1])?);
                    let hi = Box::new(parse_idx(&args[2])?);
                    let body = Box::new(parse_idx(&args[3])?);
                    Ok(if head == "isum" {
                        IdxExpr::SumOver { var, lo, hi, body }
                    } else {
                        IdxExpr::MaxOver { var, lo, hi, body }
                    })
                }
                other => Err(err(pos, format!("unknown index operator `{other}`"))),
            }
        }
    }
}

pub fn parse_domain(e: &SExpr) -> Result<IndexDomain> {
    match e {
        SExpr::Atom(s, pos) => match s.as_str() {
            "Nat" => Ok(IndexDomain::Naturals),
            "Q" => Ok(IndexDomain::Rationals),
            "Qsharp" => Ok(IndexDomain::RationalsGE1Inf),
            "QsharpInt" => Ok(IndexDomain::IntsGE1Inf),
            other => Err(err(*pos, format!("unknown domain `{other}`"))),
        },
        SExpr::List(..) => {
            let (head, args, pos) = e.head()?;
            match head {
                "CO" | "V" | "Qtuple" => {
                    expect_arity(args, 1, head, pos)?;
                    let param = parse_idx(&args[0])?;
                    Ok(match head {
                        "CO" => IndexDomain::ConvexCoeffs(param),
                        "V" => IndexDomain::IncreasingIntTuples(param),
                        _ => IndexDomain::RationalTuples(param),
                    })
                }
                "list" => {
                    if args.is_empty() {
                        return Err(err(pos, "explicit domain list must be non-empty"));
                    }
                    let items =
                        args.iter().map(parse_value).collect::<Result<Vec<_>>>()?;
                    Ok(IndexDomain::ExplicitList(items))
                }
                other => Err(err(pos, format!("unknown domain head `{other}`"))),
            }
        }
    }
}

pub fn parse_value(e: &SExpr) -> Result<IndexValue> {
    match e {
        SExpr::Atom(s, pos) => {
            if s == "inf" {
                return Ok(IndexValue::Infinity);
            }
            parse_rational(s)
                .map(IndexValue::Rat)
                .map_err(|_| err(*pos, format!("`{s}` is not an index value")))
        }
        SExpr::List(..) => {
            let (head, args, pos) = e.head()?;
            if head != "tuple" {
                return Err(err(pos, format!("expected a tuple value, found `{head}`")));
            }
            let items = args.iter().map(parse_value).collect::<Result<Vec<_>>>()?;
            Ok(IndexValue::Tuple(items))
        }
    }
}
