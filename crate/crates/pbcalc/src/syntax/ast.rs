//! Formula and term ASTs for both logic layers.
//!
//! Ground formulas (every index expression a constant, no guards) are the
//! currency of the transforms and the evaluator. Templates generalize them:
//! index positions — atom thresholds, quantifier bounds, scale
//! coefficients, variable indices, sum ranges, domain parameters — may hold
//! expressions over enclosing countable-conjunction binders. Instantiating
//! a binder folds expressions to constants, expands indexed sums, and
//! resolves guards, so the bodies the transforms recurse into are always
//! ground one level down.

use crate::syntax::domains::IndexDomain;
use crate::Rational;

/// Comparison operator used by template guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn token(self) -> &'static str {
        match self {
            CmpOp::Le => "le",
            CmpOp::Lt => "lt",
            CmpOp::Ge => "ge",
            CmpOp::Gt => "gt",
            CmpOp::Eq => "eq",
            CmpOp::Ne => "ne",
        }
    }
}

/// Rational-valued index expression over countable-conjunction binders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxExpr {
    /// Rational literal.
    Const(Rational),
    /// The point at infinity (exponent domains only).
    Infinity,
    /// Value of a scalar binder.
    Binder(String),
    /// 1-based component of a tuple binder: `(comp a i)`.
    Comp(String, Box<IdxExpr>),
    Add(Box<IdxExpr>, Box<IdxExpr>),
    Sub(Box<IdxExpr>, Box<IdxExpr>),
    Mul(Box<IdxExpr>, Box<IdxExpr>),
    Div(Box<IdxExpr>, Box<IdxExpr>),
    Neg(Box<IdxExpr>),
    Abs(Box<IdxExpr>),
    /// `base^exp`; the exponent must instantiate to a non-negative integer.
    Pow(Box<IdxExpr>, Box<IdxExpr>),
    /// `(isum v lo hi body)`: sum of `body` for `v` over an integer range.
    SumOver { var: String, lo: Box<IdxExpr>, hi: Box<IdxExpr>, body: Box<IdxExpr> },
    /// `(imax v lo hi body)`: maximum of `body` over an integer range.
    MaxOver { var: String, lo: Box<IdxExpr>, hi: Box<IdxExpr>, body: Box<IdxExpr> },
}

impl IdxExpr {
    pub fn int(n: i64) -> IdxExpr {
        IdxExpr::Const(crate::rational::rat_int(n))
    }

    pub fn rat(q: Rational) -> IdxExpr {
        IdxExpr::Const(q)
    }

    pub fn binder(name: &str) -> IdxExpr {
        IdxExpr::Binder(name.to_string())
    }

    pub fn add(a: IdxExpr, b: IdxExpr) -> IdxExpr {
        IdxExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: IdxExpr, b: IdxExpr) -> IdxExpr {
        IdxExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: IdxExpr, b: IdxExpr) -> IdxExpr {
        IdxExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: IdxExpr, b: IdxExpr) -> IdxExpr {
        IdxExpr::Div(Box::new(a), Box::new(b))
    }

    pub fn comp(tuple: &str, i: IdxExpr) -> IdxExpr {
        IdxExpr::Comp(tuple.to_string(), Box::new(i))
    }

    /// The constant value, when this expression is a literal.
    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            IdxExpr::Const(q) => Some(q),
            _ => None,
        }
    }
}

/// A variable reference: family name plus 1-based index.
///
/// Ground references have a constant index; templates may compute it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarRef {
    pub family: String,
    pub index: IdxExpr,
}

impl VarRef {
    pub fn new(family: &str, index: u32) -> VarRef {
        VarRef { family: family.to_string(), index: IdxExpr::int(index as i64) }
    }

    pub fn symbolic(family: &str, index: IdxExpr) -> VarRef {
        VarRef { family: family.to_string(), index }
    }

    /// Ground (family, index) pair, when the index is a constant.
    pub fn as_ground(&self) -> Option<(&str, u32)> {
        let q = self.index.as_const()?;
        let i = crate::rational::as_positive_int(q)?;
        Some((self.family.as_str(), i))
    }
}

/// Concrete quantified variable. Quantifier binders are always ground.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct QuantVar {
    pub family: String,
    pub index: u32,
}

impl QuantVar {
    pub fn new(family: &str, index: u32) -> QuantVar {
        QuantVar { family: family.to_string(), index }
    }
}

/// Vector-valued term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(VarRef),
    Zero,
    Sum(Box<Term>, Box<Term>),
    Scale(IdxExpr, Box<Term>),
    Apply { func: String, args: Vec<Term> },
    /// `(tsum v lo hi body)`: indexed sum, expanded on instantiation.
    SumOver { var: String, lo: IdxExpr, hi: IdxExpr, body: Box<Term> },
}

impl Term {
    pub fn var(family: &str, index: u32) -> Term {
        Term::Var(VarRef::new(family, index))
    }

    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(Box::new(a), Box::new(b))
    }

    /// `a - b`, encoded as `a + (-1)·b`.
    pub fn diff(a: Term, b: Term) -> Term {
        Term::sum(a, Term::scale(IdxExpr::int(-1), b))
    }

    pub fn scale(c: IdxExpr, t: Term) -> Term {
        Term::Scale(c, Box::new(t))
    }

    pub fn apply(func: &str, args: Vec<Term>) -> Term {
        Term::Apply { func: func.to_string(), args }
    }
}

/// Atomic formula: a norm or relation value compared to a threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomicFormula {
    NormLe(Term, IdxExpr),
    NormGe(Term, IdxExpr),
    RelLe { rel: String, args: Vec<Term>, bound: IdxExpr },
    RelGe { rel: String, args: Vec<Term>, bound: IdxExpr },
}

/// Positive bounded formula.
///
/// Empty `And` denotes truth and empty `Or` denotes falsity. `Guard` is a
/// template-only leaf: a decidable comparison between index expressions
/// that instantiation resolves away (a ground formula contains none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PBFormula {
    Atom(AtomicFormula),
    And(Vec<PBFormula>),
    Or(Vec<PBFormula>),
    CountableAnd { binder: String, domain: IndexDomain, body: Box<PBFormula> },
    Exists { var: QuantVar, bound: IdxExpr, body: Box<PBFormula> },
    Forall { var: QuantVar, bound: IdxExpr, body: Box<PBFormula> },
    Guard { op: CmpOp, lhs: IdxExpr, rhs: IdxExpr },
}

impl PBFormula {
    pub fn truth() -> PBFormula {
        PBFormula::And(Vec::new())
    }

    pub fn falsity() -> PBFormula {
        PBFormula::Or(Vec::new())
    }

    pub fn atom(a: AtomicFormula) -> PBFormula {
        PBFormula::Atom(a)
    }

    pub fn norm_le(t: Term, bound: IdxExpr) -> PBFormula {
        PBFormula::Atom(AtomicFormula::NormLe(t, bound))
    }

    pub fn norm_ge(t: Term, bound: IdxExpr) -> PBFormula {
        PBFormula::Atom(AtomicFormula::NormGe(t, bound))
    }

    pub fn rel_le(rel: &str, args: Vec<Term>, bound: IdxExpr) -> PBFormula {
        PBFormula::Atom(AtomicFormula::RelLe { rel: rel.to_string(), args, bound })
    }

    pub fn rel_ge(rel: &str, args: Vec<Term>, bound: IdxExpr) -> PBFormula {
        PBFormula::Atom(AtomicFormula::RelGe { rel: rel.to_string(), args, bound })
    }

    /// `‖t‖ = r`, encoded as the conjunction of the two closed atoms.
    pub fn norm_eq(t: Term, bound: IdxExpr) -> PBFormula {
        PBFormula::And(vec![
            PBFormula::norm_le(t.clone(), bound.clone()),
            PBFormula::norm_ge(t, bound),
        ])
    }

    pub fn countable_and(binder: &str, domain: IndexDomain, body: PBFormula) -> PBFormula {
        PBFormula::CountableAnd { binder: binder.to_string(), domain, body: Box::new(body) }
    }

    pub fn exists(var: QuantVar, bound: IdxExpr, body: PBFormula) -> PBFormula {
        PBFormula::Exists { var, bound, body: Box::new(body) }
    }

    pub fn forall(var: QuantVar, bound: IdxExpr, body: PBFormula) -> PBFormula {
        PBFormula::Forall { var, bound, body: Box::new(body) }
    }

    pub fn guard(op: CmpOp, lhs: IdxExpr, rhs: IdxExpr) -> PBFormula {
        PBFormula::Guard { op, lhs, rhs }
    }

    /// True when the formula contains no countable conjunction.
    pub fn is_finitary(&self) -> bool {
        match self {
            PBFormula::Atom(_) | PBFormula::Guard { .. } => true,
            PBFormula::And(ps) | PBFormula::Or(ps) => ps.iter().all(|p| p.is_finitary()),
            PBFormula::CountableAnd { .. } => false,
            PBFormula::Exists { body, .. } | PBFormula::Forall { body, .. } => body.is_finitary(),
        }
    }
}

/// Eventually constant bound sequence for sequence existentials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundSeq {
    pub prefix: Vec<Rational>,
    pub tail: Rational,
}

impl BoundSeq {
    pub fn constant(r: Rational) -> BoundSeq {
        BoundSeq { prefix: Vec::new(), tail: r }
    }

    /// Bound for the i-th variable of the family, 1-based.
    pub fn bound(&self, i: u32) -> &Rational {
        self.prefix.get(i as usize - 1).unwrap_or(&self.tail)
    }

    pub fn all_nonneg(&self) -> bool {
        use num::traits::Signed;
        !self.tail.is_negative() && self.prefix.iter().all(|r| !r.is_negative())
    }
}

/// Formula of the infinitary layer.
///
/// Disjunction, implication, and the bounded universal sequence quantifier
/// are parse-time abbreviations (`¬⋀¬`, `¬(· ∧ ¬·)`, `¬∃¬`); no such node
/// exists here. The constructors canonicalize: finite or countable
/// conjunctions whose parts all embed positive bounded formulas collapse
/// into a single embedded formula, so parsing and printing are mutually
/// inverse on constructor-built values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LAFormula {
    Embed(PBFormula),
    AndN(Vec<LAFormula>),
    AndW { binder: String, domain: IndexDomain, body: Box<LAFormula> },
    Not(Box<LAFormula>),
    ExistsSeq { family: String, bounds: BoundSeq, body: Box<LAFormula> },
}

impl LAFormula {
    /// Finite conjunction, collapsing the all-embedded case.
    pub fn and_n(parts: Vec<LAFormula>) -> LAFormula {
        if parts.iter().all(|p| matches!(p, LAFormula::Embed(_))) {
            let inner = parts
                .into_iter()
                .map(|p| match p {
                    LAFormula::Embed(pb) => pb,
                    _ => unreachable!(),
                })
                .collect();
            LAFormula::Embed(PBFormula::And(inner))
        } else {
            LAFormula::AndN(parts)
        }
    }

    /// Countable conjunction, collapsing an embedded body into the
    /// positive bounded countable conjunction.
    pub fn and_w(binder: &str, domain: IndexDomain, body: LAFormula) -> LAFormula {
        match body {
            LAFormula::Embed(pb) => LAFormula::Embed(PBFormula::countable_and(binder, domain, pb)),
            other => LAFormula::AndW {
                binder: binder.to_string(),
                domain,
                body: Box::new(other),
            },
        }
    }

    pub fn not(f: LAFormula) -> LAFormula {
        LAFormula::Not(Box::new(f))
    }

    /// `φ ∨ ψ` as the abbreviation `¬(¬φ ∧ ¬ψ)`.
    pub fn or_abbrev(a: LAFormula, b: LAFormula) -> LAFormula {
        LAFormula::not(LAFormula::and_n(vec![LAFormula::not(a), LAFormula::not(b)]))
    }

    /// `φ ⇒ ψ` as the abbreviation `¬(φ ∧ ¬ψ)`.
    pub fn implies(a: LAFormula, b: LAFormula) -> LAFormula {
        LAFormula::not(LAFormula::and_n(vec![a, LAFormula::not(b)]))
    }

    /// Countable disjunction `⋁` as `¬⋀¬`.
    pub fn or_w(binder: &str, domain: IndexDomain, body: LAFormula) -> LAFormula {
        LAFormula::not(LAFormula::and_w(binder, domain, LAFormula::not(body)))
    }

    pub fn exists_seq(family: &str, bounds: BoundSeq, body: LAFormula) -> LAFormula {
        LAFormula::ExistsSeq { family: family.to_string(), bounds, body: Box::new(body) }
    }

    /// `∀y⃗(‖y⃗‖ ≤ r⃗ ⇒ φ)` as the abbreviation `¬∃y⃗(‖y⃗‖ ≤ r⃗ ∧ ¬φ)`.
    pub fn forall_seq(family: &str, bounds: BoundSeq, body: LAFormula) -> LAFormula {
        LAFormula::not(LAFormula::exists_seq(family, bounds, LAFormula::not(body)))
    }

    /// True when the formula is (an embedding of) a finitary positive
    /// bounded formula.
    pub fn is_finitary(&self) -> bool {
        matches!(self, LAFormula::Embed(pb) if pb.is_finitary())
    }

    /// True when no `Not` occurs outside embedded positive bounded
    /// formulas; such formulas have the one-point branch set.
    pub fn is_not_free(&self) -> bool {
        match self {
            LAFormula::Embed(_) => true,
            LAFormula::AndN(parts) => parts.iter().all(|p| p.is_not_free()),
            LAFormula::AndW { body, .. } => body.is_not_free(),
            LAFormula::Not(_) => false,
            LAFormula::ExistsSeq { body, .. } => body.is_not_free(),
        }
    }
}
