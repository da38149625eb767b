//! Exact evaluation of finitary formulas over finite rational normed
//! structures, and the approximation-prefix semantics built on top of it.
//!
//! Evaluation is total and exact on finitary ground formulas: norms are
//! compared as radicals, relation values as rationals. Countable
//! conjunctions and unresolved template guards are evaluation errors by
//! design; they must go through the approximation transforms first.
//!
//! Quantifiers range over the carrier in file order, so witnesses are
//! deterministic: the reported vector is always the first one in carrier
//! order that decides the quantifier.

use crate::evaluator::structure::FiniteNormedStructure;
use crate::rational::Rational;
use crate::syntax::ast::{AtomicFormula, IdxExpr, PBFormula, QuantVar, Term};
use crate::syntax::print::print_pb;
use crate::syntax::subst::{fold_term, Env};
use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Assignment of concrete carrier-space vectors to free variables.
#[derive(Debug, Clone, Default)]
pub struct Assignment {
    map: BTreeMap<(String, u32), Vec<Rational>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn bind(&mut self, family: &str, index: u32, vector: Vec<Rational>) {
        self.map.insert((family.to_string(), index), vector);
    }

    fn get(&self, family: &str, index: u32) -> Option<&Vec<Rational>> {
        self.map.get(&(family.to_string(), index))
    }
}

/// One step of the decisive quantifier path of an evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub var: QuantVar,
    pub vector: Vec<Rational>,
    pub role: WitnessRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessRole {
    /// The vector satisfies the body of an existential quantifier.
    Satisfies,
    /// The vector violates the body of a universal quantifier.
    Violates,
}

pub fn describe_witness(steps: &[WitnessStep]) -> String {
    steps
        .iter()
        .map(|s| {
            let role = match s.role {
                WitnessRole::Satisfies => "satisfied by",
                WitnessRole::Violates => "violated by",
            };
            format!(
                "{}{} {role} ({})",
                s.var.family,
                s.var.index,
                s.vector
                    .iter()
                    .map(crate::rational::format_rational)
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Evaluate a ground finitary sentence.
pub fn eval(f: &PBFormula, st: &FiniteNormedStructure) -> Result<bool> {
    Ok(eval_with_witness(f, st)?.0)
}

/// Evaluate with free variables bound by an explicit assignment.
pub fn eval_under(f: &PBFormula, st: &FiniteNormedStructure, asg: &Assignment) -> Result<bool> {
    let mut asg = asg.clone();
    Ok(eval_rec(f, st, &mut asg)?.0)
}

/// Evaluate a sentence and report the decisive quantifier path: for a true
/// existential the first satisfying carrier vector, for a false universal
/// the first violating one, chained down the branch that decided the value.
pub fn eval_with_witness(
    f: &PBFormula,
    st: &FiniteNormedStructure,
) -> Result<(bool, Vec<WitnessStep>)> {
    let mut asg = Assignment::new();
    eval_rec(f, st, &mut asg)
}

fn ground_threshold(e: &IdxExpr) -> Result<&Rational> {
    e.as_const()
        .ok_or_else(|| Error::Eval("evaluation requires ground bounds".into()))
}

fn eval_rec(
    f: &PBFormula,
    st: &FiniteNormedStructure,
    asg: &mut Assignment,
) -> Result<(bool, Vec<WitnessStep>)> {
    match f {
        PBFormula::Atom(a) => Ok((eval_atom(a, st, asg)?, Vec::new())),
        PBFormula::And(parts) => {
            for p in parts {
                let (val, steps) = eval_rec(p, st, asg)?;
                if !val {
                    return Ok((false, steps));
                }
            }
            Ok((true, Vec::new()))
        }
        PBFormula::Or(parts) => {
            for p in parts {
                let (val, steps) = eval_rec(p, st, asg)?;
                if val {
                    return Ok((true, steps));
                }
            }
            Ok((false, Vec::new()))
        }
        PBFormula::CountableAnd { .. } => Err(Error::Eval(
            "countable conjunctions cannot be evaluated directly; take an approximation first"
                .into(),
        )),
        PBFormula::Guard { .. } => Err(Error::Eval(
            "unresolved template guard in evaluation".into(),
        )),
        PBFormula::Exists { var, bound, body } => {
            let r = ground_threshold(bound)?;
            let key = (var.family.clone(), var.index);
            let saved = asg.map.get(&key).cloned();
            for (i, v) in st.carrier().iter().enumerate() {
                if st.carrier_norm(i).cmp_rational(r) == Ordering::Greater {
                    continue;
                }
                asg.map.insert(key.clone(), v.clone());
                let (val, inner) = eval_rec(body, st, asg)?;
                if val {
                    restore(asg, &key, saved);
                    let mut steps = vec![WitnessStep {
                        var: var.clone(),
                        vector: v.clone(),
                        role: WitnessRole::Satisfies,
                    }];
                    steps.extend(inner);
                    return Ok((true, steps));
                }
            }
            restore(asg, &key, saved);
            Ok((false, Vec::new()))
        }
        PBFormula::Forall { var, bound, body } => {
            let r = ground_threshold(bound)?;
            let key = (var.family.clone(), var.index);
            let saved = asg.map.get(&key).cloned();
            for (i, v) in st.carrier().iter().enumerate() {
                if st.carrier_norm(i).cmp_rational(r) == Ordering::Greater {
                    continue;
                }
                asg.map.insert(key.clone(), v.clone());
                let (val, inner) = eval_rec(body, st, asg)?;
                if !val {
                    restore(asg, &key, saved);
                    let mut steps = vec![WitnessStep {
                        var: var.clone(),
                        vector: v.clone(),
                        role: WitnessRole::Violates,
                    }];
                    steps.extend(inner);
                    return Ok((false, steps));
                }
            }
            restore(asg, &key, saved);
            Ok((true, Vec::new()))
        }
    }
}

fn restore(asg: &mut Assignment, key: &(String, u32), saved: Option<Vec<Rational>>) {
    match saved {
        Some(v) => {
            asg.map.insert(key.clone(), v);
        }
        None => {
            asg.map.remove(key);
        }
    }
}

fn eval_atom(a: &AtomicFormula, st: &FiniteNormedStructure, asg: &Assignment) -> Result<bool> {
    match a {
        AtomicFormula::NormLe(t, r) => {
            let v = eval_term(t, st, asg)?;
            Ok(st.norm_of(&v)?.cmp_rational(ground_threshold(r)?) != Ordering::Greater)
        }
        AtomicFormula::NormGe(t, r) => {
            let v = eval_term(t, st, asg)?;
            Ok(st.norm_of(&v)?.cmp_rational(ground_threshold(r)?) != Ordering::Less)
        }
        AtomicFormula::RelLe { rel, args, bound } => {
            let value = eval_rel(rel, args, st, asg)?;
            Ok(value <= *ground_threshold(bound)?)
        }
        AtomicFormula::RelGe { rel, args, bound } => {
            let value = eval_rel(rel, args, st, asg)?;
            Ok(value >= *ground_threshold(bound)?)
        }
    }
}

fn eval_rel(
    rel: &str,
    args: &[Term],
    st: &FiniteNormedStructure,
    asg: &Assignment,
) -> Result<Rational> {
    let vectors = args
        .iter()
        .map(|t| eval_term(t, st, asg))
        .collect::<Result<Vec<_>>>()?;
    st.rel_value(rel, &vectors)
}

/// Evaluate a ground term to a rational vector.
pub fn eval_term(
    t: &Term,
    st: &FiniteNormedStructure,
    asg: &Assignment,
) -> Result<Vec<Rational>> {
    match t {
        Term::Var(v) => {
            let (family, index) = v.as_ground().ok_or_else(|| {
                Error::Eval(format!(
                    "symbolic variable index `{}` in evaluation",
                    v.family
                ))
            })?;
            asg.get(family, index)
                .cloned()
                .ok_or_else(|| Error::Eval(format!("unassigned variable {family}{index}")))
        }
        Term::Zero => Ok(vec![Rational::from_integer(0.into()); st.dim()]),
        Term::Sum(a, b) => {
            let mut acc = eval_term(a, st, asg)?;
            let rhs = eval_term(b, st, asg)?;
            if rhs.len() != acc.len() {
                return Err(Error::Eval("dimension mismatch in sum".into()));
            }
            for (l, r) in acc.iter_mut().zip(&rhs) {
                *l += r;
            }
            Ok(acc)
        }
        Term::Scale(k, inner) => {
            let q = k
                .as_const()
                .ok_or_else(|| Error::Eval("symbolic scale factor in evaluation".into()))?;
            let v = eval_term(inner, st, asg)?;
            Ok(v.into_iter().map(|x| x * q).collect())
        }
        Term::Apply { func, args } => {
            let vectors = args
                .iter()
                .map(|a| eval_term(a, st, asg))
                .collect::<Result<Vec<_>>>()?;
            st.apply_fn(func, &vectors)
        }
        Term::SumOver { .. } => {
            let folded = fold_term(t, &Env::new())?;
            if matches!(folded, Term::SumOver { .. }) {
                return Err(Error::Eval(
                    "indexed sum with symbolic bounds in evaluation".into(),
                ));
            }
            eval_term(&folded, st, asg)
        }
    }
}

/// Verdict of an approximation-prefix sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApVerdict {
    /// Every level 1..=N evaluated to true.
    HoldsToDepth(u32),
    /// The first failing level, the approximated formula at that level,
    /// and its decisive quantifier path (empty when an atom decides).
    FailsAt {
        level: u32,
        formula: String,
        witness: Vec<WitnessStep>,
    },
}

impl ApVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ApVerdict::HoldsToDepth(_))
    }
}

/// Evaluate the approximation prefix (φ_1, …, φ_N) of a sentence.
///
/// The sweep always evaluates every level and asserts coherence: the
/// approximations weaken as n shrinks, so the value sequence must be a
/// (possibly empty) block of trues followed by falses. Any true after a
/// false indicates a broken transform or structure and is an error.
pub fn eval_ap_prefix(
    f: &PBFormula,
    st: &FiniteNormedStructure,
    n_max: u32,
) -> Result<ApVerdict> {
    if n_max < 1 {
        return Err(Error::Domain("prefix depth must be at least 1".into()));
    }
    let mut first_fail: Option<(u32, String, Vec<WitnessStep>)> = None;
    for n in 1..=n_max {
        let level = crate::approx::approximate(f, n)?;
        let (val, steps) = eval_with_witness(&level, st)?;
        match (&first_fail, val) {
            (None, false) => first_fail = Some((n, print_pb(&level), steps)),
            (Some((level_failed, _, _)), true) => {
                return Err(Error::Eval(format!(
                    "incoherent approximation prefix: false at level {level_failed} but true at level {n}"
                )));
            }
            _ => {}
        }
    }
    Ok(match first_fail {
        None => ApVerdict::HoldsToDepth(n_max),
        Some((level, formula, witness)) => ApVerdict::FailsAt { level, formula, witness },
    })
}

/// Evaluate the branch-approximation prefix of an infinitary sentence
/// along a fixed branch, with the same coherence contract as
/// [`eval_ap_prefix`].
pub fn eval_la_prefix(
    f: &crate::syntax::ast::LAFormula,
    branch: &crate::la::Branch,
    st: &FiniteNormedStructure,
    n_max: u32,
) -> Result<ApVerdict> {
    if n_max < 1 {
        return Err(Error::Domain("prefix depth must be at least 1".into()));
    }
    let mut first_fail: Option<(u32, String, Vec<WitnessStep>)> = None;
    for n in 1..=n_max {
        let level = crate::la::branch_approx(f, branch, n)?;
        let (val, steps) = eval_with_witness(&level, st)?;
        match (&first_fail, val) {
            (None, false) => first_fail = Some((n, print_pb(&level), steps)),
            (Some((level_failed, _, _)), true) => {
                return Err(Error::Eval(format!(
                    "incoherent approximation prefix: false at level {level_failed} but true at level {n}"
                )));
            }
            _ => {}
        }
    }
    Ok(match first_fail {
        None => ApVerdict::HoldsToDepth(n_max),
        Some((level, formula, witness)) => ApVerdict::FailsAt { level, formula, witness },
    })
}
