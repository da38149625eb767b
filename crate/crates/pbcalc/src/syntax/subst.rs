//! Template instantiation: substituting index binders and folding the
//! resulting index expressions.
//!
//! Instantiation is partial. Substituting one binder of a nested template
//! folds every expression that becomes constant, expands indexed sums whose
//! ranges are ground, and resolves guards whose sides are ground, while
//! leaving anything that still mentions other binders symbolic.
//!
//! Connectives simplify truth values away during instantiation: a resolved
//! guard becomes truth or falsity, a true child collapses a disjunction and
//! disappears from a conjunction, and a false child does the opposite.
//! Children are processed left to right and a collapse discards the
//! remaining siblings unprocessed, so a guard placed before the subtree it
//! protects keeps instantiation from folding expressions that are undefined
//! outside the guard (an infinite exponent, say).

use crate::rational::{pow_nat, Rational};
use crate::syntax::ast::{
    AtomicFormula, CmpOp, IdxExpr, LAFormula, PBFormula, Term, VarRef,
};
use crate::syntax::domains::{IndexDomain, IndexValue};
use crate::{Error, Result};
use num::traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Binder environment for instantiation.
#[derive(Debug, Clone, Default)]
pub struct Env {
    map: BTreeMap<String, IndexValue>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn single(binder: &str, value: IndexValue) -> Env {
        let mut env = Env::new();
        env.map.insert(binder.to_string(), value);
        env
    }

    pub fn bind(&self, binder: &str, value: IndexValue) -> Env {
        let mut next = self.clone();
        next.map.insert(binder.to_string(), value);
        next
    }

    pub fn without(&self, binder: &str) -> Env {
        let mut next = self.clone();
        next.map.remove(binder);
        next
    }

    fn get(&self, binder: &str) -> Option<&IndexValue> {
        self.map.get(binder)
    }
}

/// Result of folding an index expression: a value, or a simplified
/// expression that still mentions unbound binders.
enum Folded {
    Rat(Rational),
    Inf,
    Tuple,
    Sym(IdxExpr),
}

impl Folded {
    fn from_value(v: &IndexValue) -> Folded {
        match v {
            IndexValue::Rat(q) => Folded::Rat(q.clone()),
            IndexValue::Infinity => Folded::Inf,
            IndexValue::Tuple(_) => Folded::Tuple,
        }
    }

    /// Rebuild as an expression; tuple values have no scalar form.
    fn into_expr(self) -> Result<IdxExpr> {
        match self {
            Folded::Rat(q) => Ok(IdxExpr::Const(q)),
            Folded::Inf => Ok(IdxExpr::Infinity),
            Folded::Sym(e) => Ok(e),
            Folded::Tuple => Err(Error::Template("tuple-valued binder used as a scalar".into())),
        }
    }

    fn rat(self, what: &str) -> Result<Rational> {
        match self {
            Folded::Rat(q) => Ok(q),
            Folded::Inf => Err(Error::Template(format!("{what} is infinite"))),
            Folded::Tuple => Err(Error::Template(format!("{what} is a tuple"))),
            Folded::Sym(_) => Err(Error::Template(format!("{what} is not ground"))),
        }
    }
}

fn rational_to_i64(q: &Rational, what: &str) -> Result<i64> {
    if !q.is_integer() {
        return Err(Error::Template(format!("{what} is not an integer")));
    }
    q.to_integer()
        .to_i64()
        .ok_or_else(|| Error::Template(format!("{what} out of range")))
}

fn fold_binary(
    op: fn(Box<IdxExpr>, Box<IdxExpr>) -> IdxExpr,
    a: Folded,
    b: Folded,
    compute: impl FnOnce(Rational, Rational) -> Result<Rational>,
) -> Result<Folded> {
    match (a, b) {
        (Folded::Rat(x), Folded::Rat(y)) => Ok(Folded::Rat(compute(x, y)?)),
        (Folded::Inf, _) | (_, Folded::Inf) => {
            Err(Error::Template("infinite index in arithmetic".into()))
        }
        (a, b) => Ok(Folded::Sym(op(Box::new(a.into_expr()?), Box::new(b.into_expr()?)))),
    }
}

fn fold_idx(e: &IdxExpr, env: &Env) -> Result<Folded> {
    match e {
        IdxExpr::Const(q) => Ok(Folded::Rat(q.clone())),
        IdxExpr::Infinity => Ok(Folded::Inf),
        IdxExpr::Binder(name) => Ok(match env.get(name) {
            Some(v) => Folded::from_value(v),
            None => Folded::Sym(e.clone()),
        }),
        IdxExpr::Comp(name, idx) => {
            let idx_f = fold_idx(idx, env)?;
            match env.get(name) {
                Some(IndexValue::Tuple(items)) => {
                    let q = idx_f.rat("component index")?;
                    let k = crate::rational::as_positive_int(&q).ok_or_else(|| {
                        Error::Template("component index is not a positive integer".into())
                    })?;
                    let item = items.get(k as usize - 1).ok_or_else(|| {
                        Error::Template(format!(
                            "component {k} of a {}-tuple",
                            items.len()
                        ))
                    })?;
                    Ok(Folded::from_value(item))
                }
                Some(_) => Err(Error::Template(format!(
                    "component of non-tuple binder {name}"
                ))),
                None => Ok(Folded::Sym(IdxExpr::Comp(
                    name.clone(),
                    Box::new(idx_f.into_expr()?),
                ))),
            }
        }
        IdxExpr::Add(a, b) => {
            fold_binary(IdxExpr::Add, fold_idx(a, env)?, fold_idx(b, env)?, |x, y| Ok(x + y))
        }
        IdxExpr::Sub(a, b) => {
            fold_binary(IdxExpr::Sub, fold_idx(a, env)?, fold_idx(b, env)?, |x, y| Ok(x - y))
        }
        IdxExpr::Mul(a, b) => {
            fold_binary(IdxExpr::Mul, fold_idx(a, env)?, fold_idx(b, env)?, |x, y| Ok(x * y))
        }
        IdxExpr::Div(a, b) => {
            fold_binary(IdxExpr::Div, fold_idx(a, env)?, fold_idx(b, env)?, |x, y| {
                if y.is_zero() {
                    Err(Error::Template("division by zero in index expression".into()))
                } else {
                    Ok(x / y)
                }
            })
        }
        IdxExpr::Pow(base, exp) => {
            let b = fold_idx(base, env)?;
            let x = fold_idx(exp, env)?;
            match (b, x) {
                (Folded::Rat(b), Folded::Rat(x)) => {
                    let k = rational_to_i64(&x, "exponent")?;
                    if k < 0 {
                        return Err(Error::Template("negative exponent".into()));
                    }
                    Ok(Folded::Rat(pow_nat(&b, k as u32)))
                }
                (_, Folded::Inf) | (Folded::Inf, _) => Err(Error::Exactness(
                    "infinite exponent reached arithmetic; guard the branch".into(),
                )),
                (b, x) => Ok(Folded::Sym(IdxExpr::Pow(
                    Box::new(b.into_expr()?),
                    Box::new(x.into_expr()?),
                ))),
            }
        }
        IdxExpr::Neg(a) => match fold_idx(a, env)? {
            Folded::Rat(q) => Ok(Folded::Rat(-q)),
            Folded::Inf => Err(Error::Template("infinite index in arithmetic".into())),
            f => Ok(Folded::Sym(IdxExpr::Neg(Box::new(f.into_expr()?)))),
        },
        IdxExpr::Abs(a) => match fold_idx(a, env)? {
            Folded::Rat(q) => Ok(Folded::Rat(q.abs())),
            Folded::Inf => Err(Error::Template("infinite index in arithmetic".into())),
            f => Ok(Folded::Sym(IdxExpr::Abs(Box::new(f.into_expr()?)))),
        },
        IdxExpr::SumOver { var, lo, hi, body } => {
            let lo_f = fold_idx(lo, env)?;
            let hi_f = fold_idx(hi, env)?;
            match (&lo_f, &hi_f) {
                (Folded::Rat(lo_q), Folded::Rat(hi_q)) => {
                    let lo_i = rational_to_i64(lo_q, "sum lower bound")?;
                    let hi_i = rational_to_i64(hi_q, "sum upper bound")?;
                    let mut pieces = Vec::new();
                    let mut total = Some(Rational::zero());
                    for k in lo_i..=hi_i {
                        let inner = env.bind(var, IndexValue::int(k));
                        let piece = fold_idx(body, &inner)?;
                        if let (Some(acc), Folded::Rat(q)) = (&mut total, &piece) {
                            *acc += q;
                        } else {
                            total = None;
                        }
                        pieces.push(piece);
                    }
                    match total {
                        Some(q) => Ok(Folded::Rat(q)),
                        None => {
                            let mut iter = pieces.into_iter();
                            let mut acc = iter.next().expect("non-empty").into_expr()?;
                            for p in iter {
                                acc = IdxExpr::add(acc, p.into_expr()?);
                            }
                            Ok(Folded::Sym(acc))
                        }
                    }
                }
                _ => {
                    let inner = env.without(var);
                    Ok(Folded::Sym(IdxExpr::SumOver {
                        var: var.clone(),
                        lo: Box::new(lo_f.into_expr()?),
                        hi: Box::new(hi_f.into_expr()?),
                        body: Box::new(fold_idx(body, &inner)?.into_expr()?),
                    }))
                }
            }
        }
        IdxExpr::MaxOver { var, lo, hi, body } => {
            let lo_f = fold_idx(lo, env)?;
            let hi_f = fold_idx(hi, env)?;
            match (&lo_f, &hi_f) {
                (Folded::Rat(lo_q), Folded::Rat(hi_q)) => {
                    let lo_i = rational_to_i64(lo_q, "max lower bound")?;
                    let hi_i = rational_to_i64(hi_q, "max upper bound")?;
                    if lo_i > hi_i {
                        return Err(Error::Template("empty range in imax".into()));
                    }
                    let mut values = Vec::new();
                    let mut all_ground = true;
                    for k in lo_i..=hi_i {
                        let inner = env.bind(var, IndexValue::int(k));
                        let piece = fold_idx(body, &inner)?;
                        if !matches!(piece, Folded::Rat(_)) {
                            all_ground = false;
                        }
                        values.push(piece);
                    }
                    if all_ground {
                        let max = values
                            .into_iter()
                            .map(|p| match p {
                                Folded::Rat(q) => q,
                                _ => unreachable!(),
                            })
                            .max()
                            .expect("non-empty");
                        Ok(Folded::Rat(max))
                    } else {
                        let inner = env.without(var);
                        Ok(Folded::Sym(IdxExpr::MaxOver {
                            var: var.clone(),
                            lo: Box::new(lo_f.into_expr()?),
                            hi: Box::new(hi_f.into_expr()?),
                            body: Box::new(fold_idx(body, &inner)?.into_expr()?),
                        }))
                    }
                }
                _ => {
                    let inner = env.without(var);
                    Ok(Folded::Sym(IdxExpr::MaxOver {
                        var: var.clone(),
                        lo: Box::new(lo_f.into_expr()?),
                        hi: Box::new(hi_f.into_expr()?),
                        body: Box::new(fold_idx(body, &inner)?.into_expr()?),
                    }))
                }
            }
        }
    }
}

/// Fold an index expression under an environment, returning the simplified
/// expression (a constant when everything resolved).
pub fn fold_idx_expr(e: &IdxExpr, env: &Env) -> Result<IdxExpr> {
    fold_idx(e, env)?.into_expr()
}

/// Fold to a rational, erroring when the expression is not ground.
pub fn fold_idx_rational(e: &IdxExpr, env: &Env) -> Result<Rational> {
    fold_idx(e, env)?.rat("index expression")
}

fn fold_bound(e: &IdxExpr, env: &Env) -> Result<IdxExpr> {
    match fold_idx(e, env)? {
        Folded::Inf => Err(Error::Template("infinite bound".into())),
        f => f.into_expr(),
    }
}

pub fn fold_term(t: &Term, env: &Env) -> Result<Term> {
    match t {
        Term::Var(VarRef { family, index }) => {
            let folded = fold_idx(index, env)?;
            if let Folded::Rat(q) = &folded {
                if crate::rational::as_positive_int(q).is_none() {
                    return Err(Error::Template(format!(
                        "variable index {} is not a positive integer",
                        crate::rational::format_rational(q)
                    )));
                }
            }
            Ok(Term::Var(VarRef { family: family.clone(), index: folded.into_expr()? }))
        }
        Term::Zero => Ok(Term::Zero),
        Term::Sum(a, b) => Ok(Term::sum(fold_term(a, env)?, fold_term(b, env)?)),
        Term::Scale(k, inner) => {
            let k = fold_bound(k, env)
                .map_err(|_| Error::Template("scale coefficient must be finite".into()))?;
            Ok(Term::Scale(k, Box::new(fold_term(inner, env)?)))
        }
        Term::Apply { func, args } => Ok(Term::Apply {
            func: func.clone(),
            args: args.iter().map(|a| fold_term(a, env)).collect::<Result<_>>()?,
        }),
        Term::SumOver { var, lo, hi, body } => {
            let lo_f = fold_idx(lo, env)?;
            let hi_f = fold_idx(hi, env)?;
            match (&lo_f, &hi_f) {
                (Folded::Rat(lo_q), Folded::Rat(hi_q)) => {
                    let lo_i = rational_to_i64(lo_q, "sum lower bound")?;
                    let hi_i = rational_to_i64(hi_q, "sum upper bound")?;
                    let mut acc: Option<Term> = None;
                    for k in lo_i..=hi_i {
                        let inner = env.bind(var, IndexValue::int(k));
                        let piece = fold_term(body, &inner)?;
                        acc = Some(match acc {
                            None => piece,
                            Some(prev) => Term::sum(prev, piece),
                        });
                    }
                    Ok(acc.unwrap_or(Term::Zero))
                }
                _ => {
                    let inner = env.without(var);
                    Ok(Term::SumOver {
                        var: var.clone(),
                        lo: lo_f.into_expr()?,
                        hi: hi_f.into_expr()?,
                        body: Box::new(fold_term(body, &inner)?),
                    })
                }
            }
        }
    }
}

fn fold_atom(a: &AtomicFormula, env: &Env) -> Result<AtomicFormula> {
    Ok(match a {
        AtomicFormula::NormLe(t, b) => {
            AtomicFormula::NormLe(fold_term(t, env)?, fold_bound(b, env)?)
        }
        AtomicFormula::NormGe(t, b) => {
            AtomicFormula::NormGe(fold_term(t, env)?, fold_bound(b, env)?)
        }
        AtomicFormula::RelLe { rel, args, bound } => AtomicFormula::RelLe {
            rel: rel.clone(),
            args: args.iter().map(|t| fold_term(t, env)).collect::<Result<_>>()?,
            bound: fold_bound(bound, env)?,
        },
        AtomicFormula::RelGe { rel, args, bound } => AtomicFormula::RelGe {
            rel: rel.clone(),
            args: args.iter().map(|t| fold_term(t, env)).collect::<Result<_>>()?,
            bound: fold_bound(bound, env)?,
        },
    })
}

/// Compare two resolved index values; infinity is greater than every
/// rational and equal to itself.
fn cmp_values(op: CmpOp, lhs: &Folded, rhs: &Folded) -> Option<bool> {
    use std::cmp::Ordering;
    let ord = match (lhs, rhs) {
        (Folded::Rat(a), Folded::Rat(b)) => a.cmp(b),
        (Folded::Inf, Folded::Inf) => Ordering::Equal,
        (Folded::Inf, Folded::Rat(_)) => Ordering::Greater,
        (Folded::Rat(_), Folded::Inf) => Ordering::Less,
        _ => return None,
    };
    Some(match op {
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Ge => ord != Ordering::Less,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Eq => ord == Ordering::Equal,
        CmpOp::Ne => ord != Ordering::Equal,
    })
}

fn fold_domain(domain: &IndexDomain, env: &Env) -> Result<IndexDomain> {
    Ok(match domain {
        IndexDomain::ConvexCoeffs(e) => IndexDomain::ConvexCoeffs(fold_idx_expr(e, env)?),
        IndexDomain::IncreasingIntTuples(e) => {
            IndexDomain::IncreasingIntTuples(fold_idx_expr(e, env)?)
        }
        IndexDomain::RationalTuples(e) => IndexDomain::RationalTuples(fold_idx_expr(e, env)?),
        other => other.clone(),
    })
}

/// Instantiate a positive bounded formula under the environment.
pub fn instantiate_pb(f: &PBFormula, env: &Env) -> Result<PBFormula> {
    match f {
        PBFormula::Atom(a) => Ok(PBFormula::Atom(fold_atom(a, env)?)),
        PBFormula::And(parts) => {
            let mut out = Vec::with_capacity(parts.len());
            for p in parts {
                let inst = instantiate_pb(p, env)?;
                if inst == PBFormula::truth() {
                    continue;
                }
                if inst == PBFormula::falsity() {
                    return Ok(PBFormula::falsity());
                }
                out.push(inst);
            }
            Ok(PBFormula::And(out))
        }
        PBFormula::Or(parts) => {
            let mut out = Vec::with_capacity(parts.len());
            for p in parts {
                let inst = instantiate_pb(p, env)?;
                if inst == PBFormula::falsity() {
                    continue;
                }
                if inst == PBFormula::truth() {
                    return Ok(PBFormula::truth());
                }
                out.push(inst);
            }
            Ok(PBFormula::Or(out))
        }
        PBFormula::CountableAnd { binder, domain, body } => {
            let inner = env.without(binder);
            Ok(PBFormula::CountableAnd {
                binder: binder.clone(),
                domain: fold_domain(domain, env)?,
                body: Box::new(instantiate_pb(body, &inner)?),
            })
        }
        PBFormula::Exists { var, bound, body } => Ok(PBFormula::Exists {
            var: var.clone(),
            bound: fold_bound(bound, env)?,
            body: Box::new(instantiate_pb(body, env)?),
        }),
        PBFormula::Forall { var, bound, body } => Ok(PBFormula::Forall {
            var: var.clone(),
            bound: fold_bound(bound, env)?,
            body: Box::new(instantiate_pb(body, env)?),
        }),
        PBFormula::Guard { op, lhs, rhs } => {
            let l = fold_idx(lhs, env)?;
            let r = fold_idx(rhs, env)?;
            match cmp_values(*op, &l, &r) {
                Some(true) => Ok(PBFormula::truth()),
                Some(false) => Ok(PBFormula::falsity()),
                None => Ok(PBFormula::Guard {
                    op: *op,
                    lhs: l.into_expr()?,
                    rhs: r.into_expr()?,
                }),
            }
        }
    }
}

/// Instantiate a formula of the infinitary layer. Connective arity is
/// preserved at this layer (branch pairing depends on it); simplification
/// happens inside embedded positive bounded formulas only.
pub fn instantiate_la(f: &LAFormula, env: &Env) -> Result<LAFormula> {
    match f {
        LAFormula::Embed(pb) => Ok(LAFormula::Embed(instantiate_pb(pb, env)?)),
        LAFormula::AndN(parts) => Ok(LAFormula::AndN(
            parts.iter().map(|p| instantiate_la(p, env)).collect::<Result<_>>()?,
        )),
        LAFormula::AndW { binder, domain, body } => {
            let inner = env.without(binder);
            Ok(LAFormula::AndW {
                binder: binder.clone(),
                domain: fold_domain(domain, env)?,
                body: Box::new(instantiate_la(body, &inner)?),
            })
        }
        LAFormula::Not(inner) => Ok(LAFormula::not(instantiate_la(inner, env)?)),
        LAFormula::ExistsSeq { family, bounds, body } => Ok(LAFormula::ExistsSeq {
            family: family.clone(),
            bounds: bounds.clone(),
            body: Box::new(instantiate_la(body, env)?),
        }),
    }
}

/// Instantiate the body of a countable conjunction at one domain value.
pub fn instantiate_binder_pb(
    body: &PBFormula,
    binder: &str,
    value: &IndexValue,
) -> Result<PBFormula> {
    instantiate_pb(body, &Env::single(binder, value.clone()))
}

pub fn instantiate_binder_la(
    body: &LAFormula,
    binder: &str,
    value: &IndexValue,
) -> Result<LAFormula> {
    instantiate_la(body, &Env::single(binder, value.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;
    use crate::rational::rat;
    use crate::syntax::ast::QuantVar;

    fn isum(var: &str, lo: IdxExpr, hi: IdxExpr, body: IdxExpr) -> IdxExpr {
        IdxExpr::SumOver {
            var: var.to_string(),
            lo: Box::new(lo),
            hi: Box::new(hi),
            body: Box::new(body),
        }
    }

    #[test]
    fn ground_sum_folds_to_a_constant() {
        let e = isum("i", IdxExpr::int(1), IdxExpr::int(3), IdxExpr::binder("i"));
        let got = fold_idx_rational(&e, &Env::new()).unwrap();
        assert_eq!(got, rat_int(6));
    }

    #[test]
    fn empty_sum_is_zero() {
        let e = isum("i", IdxExpr::int(2), IdxExpr::int(1), IdxExpr::binder("i"));
        assert_eq!(fold_idx_rational(&e, &Env::new()).unwrap(), rat_int(0));
    }

    #[test]
    fn sum_with_free_binder_unrolls_symbolically() {
        let body = IdxExpr::mul(IdxExpr::binder("q"), IdxExpr::binder("i"));
        let e = isum("i", IdxExpr::int(1), IdxExpr::int(2), body);
        let got = fold_idx_expr(&e, &Env::new()).unwrap();
        let expect = IdxExpr::add(
            IdxExpr::mul(IdxExpr::binder("q"), IdxExpr::int(1)),
            IdxExpr::mul(IdxExpr::binder("q"), IdxExpr::int(2)),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn sum_variable_shadows_environment() {
        let e = isum("i", IdxExpr::int(1), IdxExpr::int(2), IdxExpr::binder("i"));
        let env = Env::single("i", IndexValue::int(100));
        assert_eq!(fold_idx_rational(&e, &env).unwrap(), rat_int(3));
    }

    #[test]
    fn components_resolve_from_tuple_binders() {
        let env = Env::single(
            "c",
            IndexValue::tuple_of_rats(vec![rat(1, 2), rat(1, 3)]),
        );
        let e = IdxExpr::comp("c", IdxExpr::int(2));
        assert_eq!(fold_idx_rational(&e, &env).unwrap(), rat(1, 3));
        let out_of_range = IdxExpr::comp("c", IdxExpr::int(3));
        assert!(fold_idx_rational(&out_of_range, &env).is_err());
    }

    #[test]
    fn term_sum_unrolls_with_tuple_coefficients() {
        let t = Term::SumOver {
            var: "i".to_string(),
            lo: IdxExpr::int(1),
            hi: IdxExpr::comp("q", IdxExpr::int(1)),
            body: Box::new(Term::scale(
                IdxExpr::comp("b", IdxExpr::binder("i")),
                Term::Var(VarRef::symbolic("x", IdxExpr::binder("i"))),
            )),
        };
        let env = Env::new()
            .bind("q", IndexValue::tuple_of_rats(vec![rat_int(2)]))
            .bind("b", IndexValue::tuple_of_rats(vec![rat(1, 2), rat(1, 3)]));
        let got = fold_term(&t, &env).unwrap();
        let expect = Term::sum(
            Term::scale(IdxExpr::rat(rat(1, 2)), Term::var("x", 1)),
            Term::scale(IdxExpr::rat(rat(1, 3)), Term::var("x", 2)),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn empty_term_sum_is_the_zero_term() {
        let t = Term::SumOver {
            var: "i".to_string(),
            lo: IdxExpr::int(3),
            hi: IdxExpr::int(2),
            body: Box::new(Term::var("x", 1)),
        };
        assert_eq!(fold_term(&t, &Env::new()).unwrap(), Term::Zero);
    }

    #[test]
    fn true_guard_collapses_a_disjunction_before_its_siblings_fold() {
        // The sibling would error if folded: its exponent is infinite.
        let dead = PBFormula::norm_le(
            Term::var("x", 1),
            IdxExpr::Pow(Box::new(IdxExpr::int(2)), Box::new(IdxExpr::binder("p"))),
        );
        let f = PBFormula::Or(vec![
            PBFormula::guard(CmpOp::Eq, IdxExpr::binder("p"), IdxExpr::Infinity),
            dead,
        ]);
        let inf = instantiate_pb(&f, &Env::single("p", IndexValue::Infinity)).unwrap();
        assert_eq!(inf, PBFormula::truth());
        let fin = instantiate_pb(&f, &Env::single("p", IndexValue::int(3))).unwrap();
        let expect = PBFormula::Or(vec![PBFormula::norm_le(
            Term::var("x", 1),
            IdxExpr::int(8),
        )]);
        assert_eq!(fin, expect);
    }

    #[test]
    fn false_guard_collapses_a_conjunction() {
        let f = PBFormula::And(vec![
            PBFormula::guard(CmpOp::Lt, IdxExpr::binder("q"), IdxExpr::int(0)),
            PBFormula::norm_le(Term::var("x", 1), IdxExpr::binder("q")),
        ]);
        let got = instantiate_pb(&f, &Env::single("q", IndexValue::int(1))).unwrap();
        assert_eq!(got, PBFormula::falsity());
    }

    #[test]
    fn unresolved_guards_survive_with_folded_sides() {
        let f = PBFormula::guard(
            CmpOp::Le,
            IdxExpr::add(IdxExpr::binder("q"), IdxExpr::int(0)),
            IdxExpr::int(1),
        );
        let got = instantiate_pb(&f, &Env::new()).unwrap();
        match got {
            PBFormula::Guard { .. } => {}
            other => panic!("expected guard, got {other:?}"),
        }
    }

    #[test]
    fn countable_binder_shadows_instantiation() {
        let body = PBFormula::norm_le(Term::var("x", 1), IdxExpr::binder("i"));
        let f = PBFormula::countable_and(
            "i",
            IndexDomain::Naturals,
            body.clone(),
        );
        let got = instantiate_pb(&f, &Env::single("i", IndexValue::int(7))).unwrap();
        assert_eq!(got, f);
    }

    #[test]
    fn quantifier_bounds_fold() {
        let f = PBFormula::exists(
            QuantVar::new("y", 1),
            IdxExpr::add(IdxExpr::binder("n"), IdxExpr::int(1)),
            PBFormula::norm_le(Term::var("y", 1), IdxExpr::int(1)),
        );
        let got = instantiate_pb(&f, &Env::single("n", IndexValue::int(2))).unwrap();
        match got {
            PBFormula::Exists { bound, .. } => assert_eq!(bound, IdxExpr::int(3)),
            other => panic!("expected exists, got {other:?}"),
        }
    }

    #[test]
    fn comparisons_with_infinity_resolve() {
        for (op, expect) in [
            (CmpOp::Lt, true),
            (CmpOp::Le, true),
            (CmpOp::Eq, false),
            (CmpOp::Ge, false),
        ] {
            let f = PBFormula::guard(op, IdxExpr::int(5), IdxExpr::Infinity);
            let got = instantiate_pb(&f, &Env::new()).unwrap();
            let want = if expect { PBFormula::truth() } else { PBFormula::falsity() };
            assert_eq!(got, want, "op {op:?}");
        }
    }

    #[test]
    fn domain_parameters_fold() {
        let f = PBFormula::countable_and(
            "b",
            IndexDomain::RationalTuples(IdxExpr::add(
                IdxExpr::comp("qv", IdxExpr::int(3)),
                IdxExpr::int(1),
            )),
            PBFormula::truth(),
        );
        let qv = IndexValue::Tuple(vec![
            IndexValue::int(0),
            IndexValue::int(1),
            IndexValue::int(4),
        ]);
        let got = instantiate_pb(&f, &Env::single("qv", qv)).unwrap();
        match got {
            PBFormula::CountableAnd { domain: IndexDomain::RationalTuples(k), .. } => {
                assert_eq!(k, IdxExpr::int(5));
            }
            other => panic!("expected countable conjunction, got {other:?}"),
        }
    }
}
