//! Block finite representability: the basis-constant theory BaseK, the
//! two-sided ℓ_p-equivalence formulas θ^{n,p,ε}, the negated existential
//! sentence built from them, and the two finitary search utilities the
//! encoding motivates: a brute-force block-basis distortion search and an
//! empirical estimator for the approximation-transfer index w(n,p,ε).
//!
//! Finite p is restricted to integers: the equivalence cuts compare
//! s^p against Σ|c_i|^p, and only integer exponents fold to rationals.
//! Non-integer candidates surface as exactness errors (or are reported
//! as skipped by the bundle builder), never silently approximated.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::approx::{approximate, real_le, truncate_prefix, RealExpr};
use crate::evaluator::{eval_under, Assignment, FiniteNormedStructure, RadicalRatio, RadicalValue};
use crate::rational::{as_positive_int, format_rational, pow_nat, rat_int, Rational};
use crate::syntax::ast::{BoundSeq, CmpOp, IdxExpr, LAFormula, PBFormula, Term, VarRef};
use crate::syntax::domains::{enumerate, IndexDomain, IndexValue};
use crate::syntax::vars::subst_space_var_pb;
use crate::{Error, Result};
use num::traits::{Signed, Zero};

fn comp_at(tuple: &str, i: i64) -> IdxExpr {
    IdxExpr::comp(tuple, IdxExpr::int(i))
}

fn symbolic_var(family: &str, index: IdxExpr) -> Term {
    Term::Var(VarRef { family: family.to_string(), index })
}

/// Σ_{j=1}^n c_j·y_j with ground block variables, so the sentence can
/// substitute block terms for each y_j.
fn block_combination(n: u32) -> Term {
    let mut acc: Option<Term> = None;
    for j in 1..=n {
        let piece = Term::scale(comp_at("c", j as i64), Term::var("y", j));
        acc = Some(match acc {
            None => piece,
            Some(prev) => Term::sum(prev, piece),
        });
    }
    acc.expect("block count is at least 1")
}

/// Σ_{i=1}^n |c_i|^e as an index expression.
fn coeff_power_sum(n: u32, exponent: IdxExpr) -> IdxExpr {
    IdxExpr::SumOver {
        var: "i".to_string(),
        lo: Box::new(IdxExpr::int(1)),
        hi: Box::new(IdxExpr::int(n as i64)),
        body: Box::new(IdxExpr::Pow(
            Box::new(IdxExpr::Abs(Box::new(IdxExpr::comp("c", IdxExpr::binder("i"))))),
            Box::new(exponent),
        )),
    }
}

/// max_{i=1}^n |c_i| as an index expression.
fn coeff_max(n: u32) -> IdxExpr {
    IdxExpr::MaxOver {
        var: "i".to_string(),
        lo: Box::new(IdxExpr::int(1)),
        hi: Box::new(IdxExpr::int(n as i64)),
        body: Box::new(IdxExpr::Abs(Box::new(IdxExpr::comp("c", IdxExpr::binder("i"))))),
    }
}

fn one_plus(epsilon: &Rational) -> IdxExpr {
    IdxExpr::rat(rat_int(1) + epsilon.clone())
}

/// The ⋀_c body for finite integer p, via rational cuts over s:
/// ‖Σc_jy_j‖ ≥ s whenever s^p ≤ Σ|c_i|^p, and ≤ (1+ε)s whenever
/// 0 ≤ s and s^p ≥ Σ|c_i|^p.
fn equivalence_cuts(n: u32, exponent: IdxExpr, epsilon: &Rational) -> PBFormula {
    let sum = || coeff_power_sum(n, exponent.clone());
    let s = || IdxExpr::binder("s");
    let s_pow = || IdxExpr::Pow(Box::new(s()), Box::new(exponent.clone()));
    let lower = PBFormula::countable_and(
        "s",
        IndexDomain::Rationals,
        PBFormula::Or(vec![
            PBFormula::guard(CmpOp::Gt, s_pow(), sum()),
            PBFormula::norm_ge(block_combination(n), s()),
        ]),
    );
    let upper = PBFormula::countable_and(
        "s",
        IndexDomain::Rationals,
        PBFormula::Or(vec![
            PBFormula::guard(CmpOp::Lt, s(), IdxExpr::int(0)),
            PBFormula::guard(CmpOp::Lt, s_pow(), sum()),
            PBFormula::norm_le(
                block_combination(n),
                IdxExpr::Mul(Box::new(one_plus(epsilon)), Box::new(s())),
            ),
        ]),
    );
    PBFormula::And(vec![lower, upper])
}

/// The ⋀_c body for p = ∞: max|c_i| ≤ ‖Σc_jy_j‖ ≤ (1+ε)·max|c_i|.
fn equivalence_max(n: u32, epsilon: &Rational) -> PBFormula {
    PBFormula::And(vec![
        PBFormula::norm_ge(block_combination(n), coeff_max(n)),
        PBFormula::norm_le(
            block_combination(n),
            IdxExpr::Mul(Box::new(one_plus(epsilon)), Box::new(coeff_max(n))),
        ),
    ])
}

fn check_theta_params(n: u32, epsilon: &Rational) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("the block count must be at least 1".into()));
    }
    if epsilon.is_negative() {
        return Err(Error::Domain("the equivalence slack must be nonnegative".into()));
    }
    Ok(())
}

fn finite_exponent(p: &Rational) -> Result<u32> {
    if p < &rat_int(1) {
        return Err(Error::Domain("the exponent must be at least 1".into()));
    }
    as_positive_int(p).ok_or_else(|| {
        Error::Exactness(format!(
            "equivalence cuts for p = {} need irrational powers; only integer or infinite p instantiate",
            format_rational(p)
        ))
    })
}

/// θ^{n,p,ε}(y₁,…,y_n): the usual basis of ℓ_p^n is (1+ε)-equivalent to
/// the block variables, as a CountableAnd over coefficient tuples c.
pub fn theta(n: u32, p: &IndexValue, epsilon: &Rational) -> Result<PBFormula> {
    check_theta_params(n, epsilon)?;
    let body = match p {
        IndexValue::Infinity => equivalence_max(n, epsilon),
        IndexValue::Rat(q) => {
            let e = finite_exponent(q)?;
            equivalence_cuts(n, IdxExpr::int(e as i64), epsilon)
        }
        IndexValue::Tuple(_) => {
            return Err(Error::Domain("the exponent must be a scalar, not a tuple".into()))
        }
    };
    Ok(PBFormula::countable_and("c", IndexDomain::RationalTuples(IdxExpr::int(n as i64)), body))
}

/// θ with the exponent left as the free binder `p`; a guard pair splits
/// the p = ∞ and finite cases, and the guards come first so that
/// instantiation short-circuits before any s^p with an infinite exponent
/// is folded.
fn theta_symbolic(n: u32, epsilon: &Rational) -> PBFormula {
    let p = || IdxExpr::binder("p");
    let infinite = PBFormula::And(vec![
        PBFormula::guard(CmpOp::Eq, p(), IdxExpr::Infinity),
        PBFormula::countable_and(
            "c",
            IndexDomain::RationalTuples(IdxExpr::int(n as i64)),
            equivalence_max(n, epsilon),
        ),
    ]);
    let finite = PBFormula::And(vec![
        PBFormula::guard(CmpOp::Lt, p(), IdxExpr::Infinity),
        PBFormula::countable_and(
            "c",
            IndexDomain::RationalTuples(IdxExpr::int(n as i64)),
            equivalence_cuts(n, p(), epsilon),
        ),
    ]);
    PBFormula::Or(vec![infinite, finite])
}

/// BaseK(x⃗): every x_i has norm 1, and for all prefix lengths n, all
/// extensions by m, and all rational coefficient tuples a⃗ of length n+m,
/// ‖Σ_{i≤n} a_i x_i‖ ≤ K·‖Σ_{i≤n+m} a_i x_i‖.
pub fn base_k(k: &Rational) -> Result<PBFormula> {
    if k < &rat_int(1) {
        return Err(Error::Domain("the basis constant must be at least 1".into()));
    }
    let partial_sum = |hi: IdxExpr| Term::SumOver {
        var: "i".to_string(),
        lo: IdxExpr::int(1),
        hi,
        body: Box::new(Term::scale(
            IdxExpr::comp("a", IdxExpr::binder("i")),
            symbolic_var("x", IdxExpr::binder("i")),
        )),
    };
    let unit_norms = PBFormula::countable_and(
        "i",
        IndexDomain::Naturals,
        PBFormula::norm_eq(symbolic_var("x", IdxExpr::binder("i")), IdxExpr::int(1)),
    );
    let total = IdxExpr::Add(Box::new(IdxExpr::binder("n")), Box::new(IdxExpr::binder("m")));
    let inequality = real_le(
        &RealExpr::norm(partial_sum(IdxExpr::binder("n"))),
        &RealExpr::scaled_norm(IdxExpr::rat(k.clone()), partial_sum(total.clone())),
        "q",
    );
    let basis = PBFormula::countable_and(
        "n",
        IndexDomain::Naturals,
        PBFormula::countable_and(
            "m",
            IndexDomain::Naturals,
            PBFormula::countable_and(
                "a",
                IndexDomain::RationalTuples(total),
                inequality,
            ),
        ),
    );
    Ok(PBFormula::And(vec![unit_norms, basis]))
}

/// The j-th block Σ_{i=q_j+1}^{q_{j+1}} b_i·x_i, with qv and b left as
/// the sentence's tuple binders.
fn block_term(j: u32) -> Term {
    Term::SumOver {
        var: "i".to_string(),
        lo: IdxExpr::Add(Box::new(comp_at("qv", j as i64)), Box::new(IdxExpr::int(1))),
        hi: comp_at("qv", j as i64 + 1),
        body: Box::new(Term::scale(
            IdxExpr::comp("b", IdxExpr::binder("i")),
            symbolic_var("x", IdxExpr::binder("i")),
        )),
    }
}

/// The negated sentence: no unit-ball sequence x⃗ satisfies BaseK while
/// every exponent p, every partition qv, and every coefficient tuple b
/// fails θ on the induced blocks.
pub fn krivine_sentence(k: &Rational, n: u32, epsilon: &Rational) -> Result<LAFormula> {
    if epsilon <= &Rational::zero() {
        return Err(Error::Domain("the equivalence slack must be positive".into()));
    }
    let base = base_k(k)?;
    let mut blocks_fail = theta_symbolic(n, epsilon);
    for j in 1..=n {
        blocks_fail = subst_space_var_pb(&blocks_fail, "y", j, &block_term(j));
    }
    let inner = LAFormula::and_w(
        "p",
        IndexDomain::RationalsGE1Inf,
        LAFormula::and_w(
            "qv",
            IndexDomain::IncreasingIntTuples(IdxExpr::int(n as i64)),
            LAFormula::and_w(
                "b",
                IndexDomain::RationalTuples(comp_at("qv", n as i64 + 1)),
                LAFormula::not(LAFormula::Embed(blocks_fail)),
            ),
        ),
    );
    Ok(LAFormula::not(LAFormula::exists_seq(
        "x",
        BoundSeq::constant(rat_int(1)),
        LAFormula::and_n(vec![LAFormula::Embed(base), inner]),
    )))
}

/// The formula bundle for one (K, n, ε): the BaseK template, one concrete
/// θ template per representable exponent among the first `truncation`
/// canonical Q^# values (non-integer finite values are reported in
/// `skipped`, not silently dropped), and the negated sentence.
pub struct KrivineFormulas {
    pub base: PBFormula,
    pub thetas: Vec<(IndexValue, PBFormula)>,
    pub skipped: Vec<IndexValue>,
    pub sentence: LAFormula,
}

pub fn build_krivine_formulas(
    k: &Rational,
    n: u32,
    epsilon: &Rational,
    truncation: u32,
) -> Result<KrivineFormulas> {
    if truncation < 1 {
        return Err(Error::Domain("the exponent truncation must be at least 1".into()));
    }
    let base = base_k(k)?;
    let sentence = krivine_sentence(k, n, epsilon)?;
    let mut thetas = Vec::new();
    let mut skipped = Vec::new();
    for p in enumerate(&IndexDomain::RationalsGE1Inf, truncation as u64)? {
        match theta(n, &p, epsilon) {
            Ok(f) => thetas.push((p, f)),
            Err(Error::Exactness(_)) => skipped.push(p),
            Err(e) => return Err(e),
        }
    }
    Ok(KrivineFormulas { base, thetas, skipped, sentence })
}

/// A block-basis distortion query: which exponent p among the candidates
/// admits blocks of the given vectors (1+ε)-equivalent to the ℓ_p^n
/// basis, as witnessed on an enumeration prefix.
pub struct KrivineQuery {
    pub vectors: Vec<Vec<Rational>>,
    pub n: u32,
    pub p_candidates: Vec<IndexValue>,
    pub epsilon: Rational,
    /// How many coefficient tuples c ∈ Q^n each candidate is checked on.
    pub coeff_depth: u64,
    /// How many partition tuples qv ∈ V_n are enumerated.
    pub q_depth: u64,
    /// How many coefficient tuples b per partition are enumerated.
    pub b_depth: u64,
}

/// The best candidate found: its exponent, partition, block coefficients,
/// and the exact worst distortion over the checked coefficient tuples.
/// The verdict covers only the reported `checked_tuples` prefix.
pub struct KrivineCandidate {
    pub p: IndexValue,
    pub partition: Vec<i64>,
    pub coefficients: Vec<Rational>,
    pub distortion: RadicalRatio,
    pub within_epsilon: bool,
    pub checked_tuples: usize,
}

fn tuple_rationals(v: &IndexValue) -> Result<Vec<Rational>> {
    match v {
        IndexValue::Tuple(items) => items
            .iter()
            .map(|it| match it {
                IndexValue::Rat(q) => Ok(q.clone()),
                _ => Err(Error::Domain("tuple component is not rational".into())),
            })
            .collect(),
        _ => Err(Error::Domain("expected a tuple value".into())),
    }
}

fn tuple_integers(v: &IndexValue) -> Result<Vec<i64>> {
    tuple_rationals(v)?
        .into_iter()
        .map(|q| {
            if q.is_integer() {
                Ok(q.to_integer().try_into().map_err(|_| {
                    Error::Domain("partition entry out of range".into())
                })?)
            } else {
                Err(Error::Domain("partition entry is not an integer".into()))
            }
        })
        .collect()
}

/// ℓ_p(c) as an exact radical: (Σ|c_i|^p)^(1/p) for integer p, max|c_i|
/// for p = ∞.
fn lp_norm(c: &[Rational], p: &IndexValue) -> Result<RadicalValue> {
    match p {
        IndexValue::Infinity => {
            let m = c.iter().map(|q| q.abs()).max().unwrap_or_else(Rational::zero);
            RadicalValue::from_rational(m)
        }
        IndexValue::Rat(q) => {
            let e = finite_exponent(q)?;
            let sum = c.iter().fold(Rational::zero(), |acc, ci| acc + pow_nat(&ci.abs(), e));
            RadicalValue::new(sum, e)
        }
        IndexValue::Tuple(_) => Err(Error::Domain("the exponent must be a scalar".into())),
    }
}

struct BlockChoice {
    partition: Vec<i64>,
    coefficients: Vec<Rational>,
    blocks: Vec<Vec<Rational>>,
}

fn enumerate_blocks(query: &KrivineQuery, dim: usize) -> Result<Vec<BlockChoice>> {
    let m = query.vectors.len() as i64;
    let n = query.n as usize;
    let mut choices = Vec::new();
    let partitions =
        enumerate(&IndexDomain::IncreasingIntTuples(IdxExpr::int(query.n as i64)), query.q_depth)?;
    for qv in &partitions {
        let partition = tuple_integers(qv)?;
        let last = *partition.last().expect("nonempty partition");
        if last > m || partition[0] < 0 {
            continue;
        }
        let coeff_domain = IndexDomain::RationalTuples(IdxExpr::int(last));
        for b in enumerate(&coeff_domain, query.b_depth)? {
            let coefficients = tuple_rationals(&b)?;
            let mut blocks = Vec::with_capacity(n);
            let mut degenerate = false;
            for j in 0..n {
                let mut block = vec![Rational::zero(); dim];
                for i in (partition[j] + 1)..=partition[j + 1] {
                    let vec = &query.vectors[i as usize - 1];
                    let coeff = &coefficients[i as usize - 1];
                    for (acc, x) in block.iter_mut().zip(vec) {
                        *acc += coeff * x;
                    }
                }
                if block.iter().all(|x| x.is_zero()) {
                    degenerate = true;
                    break;
                }
                blocks.push(block);
            }
            if !degenerate {
                choices.push(BlockChoice {
                    partition: partition.clone(),
                    coefficients,
                    blocks,
                });
            }
        }
    }
    Ok(choices)
}

/// Worst distortion of the blocks against the ℓ_p^n basis over the
/// checked coefficient tuples, or None when some nonzero combination
/// collapses to norm zero.
fn block_distortion(
    st: &FiniteNormedStructure,
    blocks: &[Vec<Rational>],
    p: &IndexValue,
    coeffs: &[Vec<Rational>],
) -> Result<Option<RadicalRatio>> {
    let dim = st.dim();
    let mut worst = RadicalRatio::one();
    for c in coeffs {
        let mut combo = vec![Rational::zero(); dim];
        for (cj, block) in c.iter().zip(blocks) {
            for (acc, x) in combo.iter_mut().zip(block) {
                *acc += cj * x;
            }
        }
        let num = st.norm_of(&combo)?;
        if num.is_zero() {
            return Ok(None);
        }
        let den = lp_norm(c, p)?;
        let ratio = RadicalRatio::new(num.clone(), den.clone())?;
        let spread = if ratio.cmp_rational(&rat_int(1))? == Ordering::Less {
            RadicalRatio::new(den, num)?
        } else {
            ratio
        };
        if spread.cmp_ratio(&worst)? == Ordering::Greater {
            worst = spread;
        }
    }
    Ok(Some(worst))
}

/// Brute-force search over (p, partition, block coefficients) for the
/// candidate with the least worst-case distortion on the coefficient
/// prefix; ties go to the earliest candidate in enumeration order.
pub fn krivine_search(
    st: &FiniteNormedStructure,
    query: &KrivineQuery,
) -> Result<KrivineCandidate> {
    if query.n < 1 || (query.vectors.len() as u64) < query.n as u64 {
        return Err(Error::Domain(
            "the query needs at least as many vectors as blocks, and at least one block".into(),
        ));
    }
    if query.epsilon <= Rational::zero() {
        return Err(Error::Domain("the equivalence slack must be positive".into()));
    }
    if query.p_candidates.is_empty() {
        return Err(Error::Domain("the candidate exponent set is empty".into()));
    }
    if query.coeff_depth < 1 || query.q_depth < 1 || query.b_depth < 1 {
        return Err(Error::Domain("all enumeration depths must be at least 1".into()));
    }
    for v in &query.vectors {
        if v.len() != st.dim() {
            return Err(Error::Domain("query vector dimension does not match the structure".into()));
        }
        if st.norm_of(v)?.is_zero() {
            return Err(Error::Domain("query vectors must be nonzero".into()));
        }
    }
    for p in &query.p_candidates {
        lp_norm(&[rat_int(1)], p)?;
    }

    let coeffs: Vec<Vec<Rational>> =
        enumerate(&IndexDomain::RationalTuples(IdxExpr::int(query.n as i64)), query.coeff_depth)?
            .iter()
            .map(tuple_rationals)
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|c| !c.iter().all(|q| q.is_zero()))
            .collect();
    let checked_tuples = coeffs.len();
    if checked_tuples == 0 {
        return Err(Error::Exhausted(format!(
            "no nonzero coefficient tuple within coeff_depth {}",
            query.coeff_depth
        )));
    }
    let choices = enumerate_blocks(query, st.dim())?;

    let mut candidates = Vec::new();
    for (pi, p) in query.p_candidates.iter().enumerate() {
        for (ci, choice) in choices.iter().enumerate() {
            candidates.push((pi, ci, p, choice));
        }
    }
    let evaluated: Vec<Option<RadicalRatio>> = candidates
        .par_iter()
        .map(|(_, _, p, choice)| block_distortion(st, &choice.blocks, p, &coeffs))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(usize, RadicalRatio)> = None;
    for (idx, dist) in evaluated.into_iter().enumerate() {
        let Some(dist) = dist else { continue };
        let better = match &best {
            None => true,
            Some((_, cur)) => dist.cmp_ratio(cur)? == Ordering::Less,
        };
        if better {
            best = Some((idx, dist));
        }
    }
    let Some((idx, distortion)) = best else {
        return Err(Error::Exhausted(format!(
            "no block candidate within q_depth {}, b_depth {} (checked {} coefficient tuples)",
            query.q_depth, query.b_depth, checked_tuples
        )));
    };
    let (_, _, p, choice) = &candidates[idx];
    let threshold = rat_int(1) + query.epsilon.clone();
    let within_epsilon = distortion.cmp_rational(&threshold)? != Ordering::Greater;
    Ok(KrivineCandidate {
        p: (*p).clone(),
        partition: choice.partition.clone(),
        coefficients: choice.coefficients.clone(),
        distortion,
        within_epsilon,
        checked_tuples,
    })
}

/// An empirically certified transfer index: on the recorded family,
/// every nonzero-block assignment satisfying approximate(θ^{n,p,ε}, w)
/// also satisfied the checked prefix of θ^{n,p,2ε}. The certificate
/// covers exactly the family and depth it reports, nothing more.
pub struct WEstimate {
    pub w: u32,
    pub family_size: usize,
    pub check_depth: u32,
    pub assignments_checked: u64,
}

fn assignments_over(st: &FiniteNormedStructure, n: u32) -> Vec<Vec<usize>> {
    let nonzero: Vec<usize> = (0..st.carrier().len())
        .filter(|&i| !st.carrier_norm(i).is_zero())
        .collect();
    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(tuples.len() * nonzero.len());
        for t in &tuples {
            for &i in &nonzero {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        tuples = next;
    }
    tuples
}

/// Search for the least w ≤ w_max such that on every structure of the
/// family, every assignment of nonzero carrier points to the block
/// variables that satisfies approximate(θ^{n,p,ε}, w) also satisfies the
/// first `check_depth` instances of θ^{n,p,2ε}.
pub fn estimate_w(
    n: u32,
    p: &IndexValue,
    epsilon: &Rational,
    family: &[FiniteNormedStructure],
    w_max: u32,
    check_depth: u32,
) -> Result<WEstimate> {
    if epsilon <= &Rational::zero() {
        return Err(Error::Domain("the equivalence slack must be positive".into()));
    }
    if w_max < 1 || check_depth < 1 {
        return Err(Error::Domain("w_max and check_depth must be at least 1".into()));
    }
    if family.is_empty() {
        return Err(Error::Domain("the test family is empty".into()));
    }
    let hypothesis_template = theta(n, p, epsilon)?;
    let conclusion = theta(n, p, &(epsilon.clone() + epsilon.clone()))?;
    let conclusion_prefix = truncate_prefix(&conclusion, check_depth)?;
    for w in 1..=w_max {
        let hypothesis = approximate(&hypothesis_template, w)?;
        let mut checked: u64 = 0;
        let mut certified = true;
        'family: for st in family {
            for tuple in assignments_over(st, n) {
                let mut asg = Assignment::new();
                for (j, &i) in tuple.iter().enumerate() {
                    asg.bind("y", j as u32 + 1, st.carrier()[i].clone());
                }
                checked += 1;
                if eval_under(&hypothesis, st, &asg)?
                    && !eval_under(&conclusion_prefix, st, &asg)?
                {
                    certified = false;
                    break 'family;
                }
            }
        }
        if certified {
            return Ok(WEstimate {
                w,
                family_size: family.len(),
                check_depth,
                assignments_checked: checked,
            });
        }
    }
    Err(Error::Exhausted(format!(
        "no w up to {w_max} certified the transfer at check depth {check_depth}"
    )))
}

/// A heuristic fallback of the form ceil(c/ε). This is not a certificate:
/// it encodes only the rule of thumb that the transfer slack ε must
/// dominate the 1/w approximation margins up to a scale constant c.
pub fn analytic_w_fallback(c: &Rational, epsilon: &Rational) -> Result<u32> {
    if c <= &Rational::zero() || epsilon <= &Rational::zero() {
        return Err(Error::Domain("the fallback needs positive c and ε".into()));
    }
    let q = c / epsilon;
    let ceil = q.ceil().to_integer();
    u32::try_from(ceil.max(1.into())).map_err(|_| {
        Error::Domain("the fallback index does not fit in a machine integer".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::syntax::parse::{parse_la, parse_pb};
    use crate::syntax::print::{print_la, print_pb};
    use crate::syntax::subst::instantiate_binder_pb;
    use crate::syntax::vars::free_index_binders_la;
    use crate::workbench::families::{l1_grid, single_point_structure, standard_w_family, unit_basis_lp};

    fn qsharp_prefix(k: u64) -> Vec<IndexValue> {
        enumerate(&IndexDomain::RationalsGE1Inf, k).unwrap()
    }

    #[test]
    fn theta_at_a_single_unit_coefficient_is_a_two_sided_unit_atom() {
        let th = theta(1, &IndexValue::int(2), &Rational::zero()).unwrap();
        let PBFormula::CountableAnd { body, .. } = &th else {
            panic!("theta is a CountableAnd over c");
        };
        let instance = instantiate_binder_pb(
            body,
            "c",
            &IndexValue::Tuple(vec![IndexValue::int(1)]),
        )
        .unwrap();
        assert_eq!(
            print_pb(&truncate_prefix(&instance, 2).unwrap()),
            "(and (and (or (ge (norm (scale 1 y1)) 0)) (or (ge (norm (scale 1 y1)) 1))) \
             (and (and) (or (le (norm (scale 1 y1)) 1))))"
        );
    }

    #[test]
    fn theta_at_infinity_prints_max_comparisons() {
        let th = theta(2, &IndexValue::Infinity, &rat(1, 2)).unwrap();
        let combo = "(+ (scale (comp c 1) y1) (scale (comp c 2) y2))";
        assert_eq!(
            print_pb(&th),
            format!(
                "(And c (Qtuple 2) (and (ge (norm {combo}) (imax i 1 2 (abs (comp c i)))) \
                 (le (norm {combo}) (* 3/2 (imax i 1 2 (abs (comp c i)))))))"
            )
        );
    }

    #[test]
    fn theta_rejects_non_integer_and_malformed_exponents() {
        assert!(matches!(
            theta(1, &IndexValue::Rat(rat(3, 2)), &rat_int(1)),
            Err(Error::Exactness(_))
        ));
        assert!(theta(1, &IndexValue::Rat(rat(1, 2)), &rat_int(1)).is_err());
        assert!(theta(0, &IndexValue::int(1), &rat_int(1)).is_err());
        assert!(theta(1, &IndexValue::Tuple(vec![]), &rat_int(1)).is_err());
        assert!(theta(1, &IndexValue::int(1), &rat_int(-1)).is_err());
    }

    #[test]
    fn base_truncation_matches_the_hand_expansion() {
        let base = base_k(&rat_int(2)).unwrap();
        assert_eq!(
            print_pb(&truncate_prefix(&base, 1).unwrap()),
            "(and (and (and (le (norm x1) 1) (ge (norm x1) 1))) \
             (and (and (and (and (or (le (norm (scale 0 x1)) 0) \
             (ge (norm (scale 2 (+ (scale 0 x1) (scale 0 x2)))) 0)))))))"
        );
        let depth2 = print_pb(&truncate_prefix(&base, 2).unwrap());
        assert!(
            depth2.contains(
                "(or (le (norm (scale 1 x1)) 1) \
                 (ge (norm (scale 2 (+ (scale 1 x1) (scale 0 x2)))) 1))"
            ),
            "{depth2}"
        );
        assert!(base_k(&rat(1, 2)).is_err());
    }

    #[test]
    fn unit_basis_satisfies_base_one_and_cancellation_falsifies_it() {
        let st = unit_basis_lp(&IndexValue::int(1)).unwrap();
        let base = base_k(&rat_int(1)).unwrap();
        let truncated = truncate_prefix(&base, 2).unwrap();
        let mut asg = Assignment::new();
        for i in 0..4 {
            let mut e = vec![Rational::zero(); 4];
            e[i] = rat_int(1);
            asg.bind("x", i as u32 + 1, e);
        }
        assert!(eval_under(&truncated, &st, &asg).unwrap());

        let deeper = truncate_prefix(&base, 5).unwrap();
        let mut asg = Assignment::new();
        for i in 0..10u32 {
            let mut e = vec![Rational::zero(); 4];
            e[0] = if i == 1 { rat_int(-1) } else { rat_int(1) };
            asg.bind("x", i + 1, e);
        }
        assert!(!eval_under(&deeper, &st, &asg).unwrap());
    }

    #[test]
    fn sentence_is_closed_and_substitutes_block_sums() {
        let s = krivine_sentence(&rat_int(2), 2, &rat(1, 4)).unwrap();
        let text = print_la(&s);
        assert!(text.starts_with("(not (existsSeq (x (const 1)) (and "), "{text}");
        assert!(
            text.contains("(tsum i (+ (comp qv 1) 1) (comp qv 2) (scale (comp b i) (var x i)))"),
            "{text}"
        );
        assert!(
            text.contains("(And b (Qtuple (comp qv 3)) (not "),
            "{text}"
        );
        assert!(free_index_binders_la(&s).is_empty());
        assert_eq!(parse_la(&text).unwrap(), s);
    }

    #[test]
    fn formula_bundle_reports_the_non_integer_exponent_as_skipped() {
        let bundle = build_krivine_formulas(&rat_int(1), 2, &rat(1, 2), 4).unwrap();
        let ps: Vec<IndexValue> = bundle.thetas.iter().map(|(p, _)| p.clone()).collect();
        assert_eq!(ps, vec![IndexValue::Infinity, IndexValue::int(1), IndexValue::int(2)]);
        assert_eq!(bundle.skipped, vec![IndexValue::Rat(rat(3, 2))]);
        for (_, th) in &bundle.thetas {
            assert_eq!(parse_pb(&print_pb(th)).unwrap(), *th);
        }
        assert_eq!(parse_pb(&print_pb(&bundle.base)).unwrap(), bundle.base);
    }

    fn unit_query(depths: (u64, u64, u64)) -> KrivineQuery {
        let mut vectors = Vec::new();
        for i in 0..4 {
            let mut e = vec![Rational::zero(); 4];
            e[i] = rat_int(1);
            vectors.push(e);
        }
        KrivineQuery {
            vectors,
            n: 2,
            p_candidates: qsharp_prefix(3),
            epsilon: rat(1, 4),
            coeff_depth: depths.0,
            q_depth: depths.1,
            b_depth: depths.2,
        }
    }

    #[test]
    fn matching_exponent_wins_with_distortion_exactly_one() {
        for (p, expected) in [
            (IndexValue::int(1), IndexValue::int(1)),
            (IndexValue::int(2), IndexValue::int(2)),
            (IndexValue::Infinity, IndexValue::Infinity),
        ] {
            let st = unit_basis_lp(&p).unwrap();
            let found = krivine_search(&st, &unit_query((25, 1, 5))).unwrap();
            assert_eq!(found.p, expected);
            assert!(found.distortion.is_one(), "{}", found.distortion.display());
            assert!(found.within_epsilon);
            assert_eq!(found.partition, vec![0, 1, 2]);
            assert_eq!(found.coefficients, vec![rat_int(1), rat_int(1)]);
            assert_eq!(found.checked_tuples, 24);
        }
    }

    #[test]
    fn mismatched_candidate_reports_its_distortion_honestly() {
        let st = unit_basis_lp(&IndexValue::int(2)).unwrap();
        let mut query = unit_query((25, 1, 5));
        query.p_candidates = vec![IndexValue::int(1)];
        let found = krivine_search(&st, &query).unwrap();
        assert_eq!(found.p, IndexValue::int(1));
        assert!(!found.distortion.is_one());
        assert!(!found.within_epsilon);
        // ‖e₁+e₂‖₂ / ℓ₁(1,1) = √2/2, inverted to √2.
        assert_eq!(found.distortion.cmp_rational(&rat(7, 5)).unwrap(), Ordering::Greater);
        assert_eq!(found.distortion.cmp_rational(&rat(3, 2)).unwrap(), Ordering::Less);
    }

    #[test]
    fn degenerate_queries_are_rejected_or_exhausted() {
        let st = unit_basis_lp(&IndexValue::int(2)).unwrap();
        let mut query = unit_query((1, 1, 5));
        assert!(matches!(krivine_search(&st, &query), Err(Error::Exhausted(_))));
        query = unit_query((25, 1, 1));
        assert!(matches!(krivine_search(&st, &query), Err(Error::Exhausted(_))));
        query = unit_query((25, 1, 5));
        query.p_candidates = vec![IndexValue::Rat(rat(3, 2))];
        assert!(matches!(krivine_search(&st, &query), Err(Error::Exactness(_))));
        query = unit_query((25, 1, 5));
        query.vectors[0] = vec![Rational::zero(); 4];
        assert!(krivine_search(&st, &query).is_err());
        query = unit_query((25, 1, 5));
        query.n = 5;
        assert!(krivine_search(&st, &query).is_err());
    }

    #[test]
    fn transfer_index_is_one_on_the_standard_family_when_slack_is_large() {
        let family = standard_w_family().unwrap();
        let est = estimate_w(1, &IndexValue::int(2), &rat_int(1), &family, 3, 4).unwrap();
        assert_eq!(est.w, 1);
        assert_eq!(est.family_size, 3);
        assert_eq!(est.assignments_checked, 24);
    }

    #[test]
    fn transfer_index_is_vacuous_on_a_single_point_structure() {
        let family = vec![single_point_structure().unwrap()];
        let est = estimate_w(2, &IndexValue::Infinity, &rat(1, 3), &family, 2, 3).unwrap();
        assert_eq!(est.w, 1);
        assert_eq!(est.assignments_checked, 0);
    }

    #[test]
    fn transfer_index_on_the_grid_needs_the_hand_derived_level() {
        let family = vec![l1_grid().unwrap()];
        let est = estimate_w(2, &IndexValue::int(1), &rat(1, 2), &family, 8, 6).unwrap();
        assert_eq!(est.w, 6);
        assert_eq!(est.assignments_checked, 64);
    }

    #[test]
    fn transfer_index_is_monotone_in_the_family() {
        let family = standard_w_family().unwrap();
        let small = estimate_w(1, &IndexValue::int(1), &rat(1, 2), &family[..1], 6, 5).unwrap();
        let large = estimate_w(1, &IndexValue::int(1), &rat(1, 2), &family, 6, 5).unwrap();
        assert!(small.w <= large.w);
    }

    #[test]
    fn fallback_index_is_a_plain_ceiling() {
        assert_eq!(analytic_w_fallback(&rat_int(5), &rat(1, 2)).unwrap(), 10);
        assert_eq!(analytic_w_fallback(&rat_int(1), &rat_int(1)).unwrap(), 1);
        assert_eq!(analytic_w_fallback(&rat(1, 3), &rat_int(1)).unwrap(), 1);
        assert!(analytic_w_fallback(&Rational::zero(), &rat_int(1)).is_err());
        assert!(analytic_w_fallback(&rat_int(1), &Rational::zero()).is_err());
    }
}
