//! The infinitary layer: branch families I(φ), branch approximations
//! ([φ]_h)_n, almost-version decoding, and the empirical uniformity search.
//!
//! Every infinitary formula φ owns a countable family of branches. The
//! canonical enumeration built here is what certifies diagonal negation
//! branches: it is deterministic, total, and visits every finite-depth
//! modification of the default branch, which is exactly the coverage the
//! level-truncated approximations can distinguish.
//!
//! Family shape by variant:
//!   - embedded finitary formulas have the single empty branch;
//!   - finite conjunctions take the product of their parts' families;
//!   - countable conjunctions take finite-prefix modifications of the
//!     all-default instance assignment;
//!   - negations take diagonals with finitely many overridden steps;
//!   - sequence quantifiers wrap the body family.
//!
//! A formula with no negation outside embedded finitary parts has a
//! singleton family; that fact certifies constant negation branches.

pub mod almost;
pub mod branch;
pub mod uniform;

pub use almost::{decode_almost, AlmostSchema};
pub use branch::{parse_branch, print_branch, validate_pairing, Branch, Certificate, NegTail};
pub use uniform::{search_uniform_index, verify_uniform_index, UniformFailure, UniformOutcome};

use crate::approx::{approximate, weak_negation};
use crate::rational::one_over;
use crate::syntax::ast::{IdxExpr, LAFormula, PBFormula, QuantVar};
use crate::syntax::domains::{decode_tuple, enumerate_clamped, unpair};
use crate::syntax::subst::instantiate_binder_la;
use crate::syntax::vars::free_vars_pb;
use crate::{Error, Result};

/// Size of the canonical branch family: `Some(k)` when finite, `None`
/// when countably infinite.
pub fn family_size(f: &LAFormula) -> Option<u64> {
    match f {
        LAFormula::Embed(_) => Some(1),
        LAFormula::AndN(parts) => {
            let mut product = 1u64;
            for p in parts {
                product = product.checked_mul(family_size(p)?)?;
            }
            Some(product)
        }
        LAFormula::AndW { body, .. } => match family_size(body) {
            Some(1) => Some(1),
            _ => None,
        },
        LAFormula::Not(_) => None,
        LAFormula::ExistsSeq { body, .. } => family_size(body),
    }
}

/// The unique branch of a formula whose family is a singleton, i.e. a
/// formula with no negation outside embedded finitary parts.
pub fn singleton_branch(f: &LAFormula) -> Option<Branch> {
    if family_size(f) != Some(1) {
        return None;
    }
    Some(default_branch(f))
}

/// The canonical default branch: member 0 of the family.
fn default_branch(f: &LAFormula) -> Branch {
    match f {
        LAFormula::Embed(_) => Branch::Empty,
        LAFormula::AndN(parts) => Branch::Tuple {
            components: parts.iter().map(default_branch).collect(),
            rest: None,
        },
        LAFormula::AndW { body, .. } => Branch::Tuple {
            components: Vec::new(),
            rest: Some(Box::new(default_branch(body))),
        },
        LAFormula::Not(_) => Branch::Neg {
            prefix: Vec::new(),
            tail: NegTail::Diagonal,
            certificate: Certificate::DiagonalEnumeration,
        },
        LAFormula::ExistsSeq { body, .. } => Branch::Ex(Box::new(default_branch(body))),
    }
}

const FAMILY_SCAN_CAP: u64 = 4_000_000;

/// The `a`-th tuple (0-indexed) of the diagonal enumeration of ℕ^k
/// restricted coordinatewise by the limits (`None` = unbounded).
fn product_decode(limits: &[Option<u64>], a: u64) -> Result<Vec<u64>> {
    let k = limits.len() as u32;
    if k == 0 {
        return if a == 0 {
            Ok(Vec::new())
        } else {
            Err(Error::Domain("empty product has a single member".into()))
        };
    }
    if limits.iter().all(Option::is_none) {
        return Ok(decode_tuple(k, a));
    }
    let mut seen = 0u64;
    for code in 0..FAMILY_SCAN_CAP {
        let t = decode_tuple(k, code);
        if t.iter().zip(limits).all(|(v, lim)| lim.map_or(true, |l| *v < l)) {
            if seen == a {
                return Ok(t);
            }
            seen += 1;
        }
    }
    Err(Error::Domain(
        "branch family scan exceeded its cap; the requested member index is too deep".into(),
    ))
}

/// The `e`-th pair (u, v) in diagonal order with u below the limit.
fn pair_decode_filtered(limit_u: Option<u64>, e: u64) -> Result<(u64, u64)> {
    match limit_u {
        None => Ok(unpair(e)),
        Some(l) => {
            let mut seen = 0u64;
            for code in 0..FAMILY_SCAN_CAP {
                let (u, v) = unpair(code);
                if u < l {
                    if seen == e {
                        return Ok((u, v));
                    }
                    seen += 1;
                }
            }
            Err(Error::Domain(
                "branch family scan exceeded its cap; the requested member index is too deep"
                    .into(),
            ))
        }
    }
}

/// The `a`-th member (0-indexed) of the canonical branch family of `f`.
pub fn family_member(f: &LAFormula, a: u64) -> Result<Branch> {
    if let Some(size) = family_size(f) {
        if a >= size {
            return Err(Error::Domain(format!(
                "branch family of this formula has {size} members; index {a} is out of range"
            )));
        }
    }
    match f {
        LAFormula::Embed(_) => Ok(Branch::Empty),
        LAFormula::AndN(parts) => {
            let limits: Vec<Option<u64>> = parts.iter().map(family_size).collect();
            let coords = product_decode(&limits, a)?;
            let components = parts
                .iter()
                .zip(&coords)
                .map(|(p, &c)| family_member(p, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(Branch::Tuple { components, rest: None })
        }
        LAFormula::AndW { body, .. } => {
            if a == 0 {
                return Ok(default_branch(f));
            }
            let (len_minus_1, code) = unpair(a - 1);
            let len = usize::try_from(len_minus_1)
                .map_err(|_| Error::Domain("branch prefix length overflow".into()))?
                + 1;
            let limits = vec![family_size(body); len];
            let coords = product_decode(&limits, code)?;
            let components = coords
                .iter()
                .map(|&c| family_member(body, c))
                .collect::<Result<Vec<_>>>()?;
            Ok(Branch::Tuple {
                components,
                rest: Some(Box::new(default_branch(body))),
            })
        }
        LAFormula::Not(inner) => {
            if a == 0 {
                return Ok(default_branch(f));
            }
            let (len_minus_1, code) = unpair(a - 1);
            let len = usize::try_from(len_minus_1)
                .map_err(|_| Error::Domain("branch prefix length overflow".into()))?
                + 1;
            let limits = vec![None; len];
            let entry_codes = product_decode(&limits, code)?;
            let mut prefix = Vec::with_capacity(len);
            for e in entry_codes {
                let (u, v) = pair_decode_filtered(family_size(inner), e)?;
                let level = u32::try_from(v + 1)
                    .map_err(|_| Error::Domain("branch level overflow".into()))?;
                prefix.push((family_member(inner, u)?, level));
            }
            Ok(Branch::Neg {
                prefix,
                tail: NegTail::Diagonal,
                certificate: Certificate::DiagonalEnumeration,
            })
        }
        LAFormula::ExistsSeq { body, .. } => Ok(Branch::Ex(Box::new(family_member(body, a)?))),
    }
}

/// The constant negation branch for `Not(f)`: every step visits the
/// unique branch of `f` at level n+1. Only certified when f's family is a
/// singleton.
pub fn constant_neg_branch(f: &LAFormula, n: u32) -> Result<Branch> {
    if n < 1 {
        return Err(Error::Domain("approximation level must be at least 1".into()));
    }
    let member = singleton_branch(f).ok_or_else(|| {
        Error::BranchShape(
            "a constant negation branch requires a formula with a single branch (no negation outside embedded finitary parts)"
                .into(),
        )
    })?;
    Ok(Branch::Neg {
        prefix: Vec::new(),
        tail: NegTail::Constant { branch: Box::new(member), level: n + 1 },
        certificate: Certificate::ConstantOnSingleton(n + 1),
    })
}

/// The canonical certified diagonal branch for `Not(f)`.
pub fn diagonal_neg_branch(_f: &LAFormula) -> Branch {
    Branch::Neg {
        prefix: Vec::new(),
        tail: NegTail::Diagonal,
        certificate: Certificate::DiagonalEnumeration,
    }
}

/// The `j`-th step (0-indexed) of the canonical diagonal over `inner`'s
/// family: the pair enumeration of (member, level) filtered to the family.
fn diagonal_step(inner: &LAFormula, j: u64) -> Result<(Branch, u32)> {
    let (u, v) = pair_decode_filtered(family_size(inner), j)?;
    let level =
        u32::try_from(v + 1).map_err(|_| Error::Domain("branch level overflow".into()))?;
    Ok((family_member(inner, u)?, level))
}

/// The (f1(s), f2(s)) pair of a negation branch at step s ≥ 1.
fn neg_step(
    inner: &LAFormula,
    prefix: &[(Branch, u32)],
    tail: &NegTail,
    s: u32,
) -> Result<(Branch, u32)> {
    let s0 = s as usize;
    if s0 >= 1 && s0 <= prefix.len() {
        return Ok(prefix[s0 - 1].clone());
    }
    match tail {
        NegTail::Constant { branch, level } => Ok(((**branch).clone(), *level)),
        NegTail::Diagonal => diagonal_step(inner, (s0 - prefix.len() - 1) as u64),
        NegTail::Exhausted => Err(Error::BranchShape(format!(
            "negation branch is exhausted at step {s}: its prefix has {} entries and no tail",
            prefix.len()
        ))),
    }
}

fn shape_err(f: &LAFormula, h: &Branch) -> Error {
    Error::BranchShape(format!(
        "branch `{}` does not match the formula variant {}",
        print_branch(h),
        match f {
            LAFormula::Embed(_) => "embedded finitary",
            LAFormula::AndN(_) => "finite conjunction",
            LAFormula::AndW { .. } => "countable conjunction",
            LAFormula::Not(_) => "negation",
            LAFormula::ExistsSeq { .. } => "sequence quantifier",
        }
    ))
}

/// The branch of a countable conjunction's i-th instance (0-indexed):
/// the explicit prefix while it lasts, then the rest template.
fn instance_branch<'a>(
    components: &'a [Branch],
    rest: &'a Option<Box<Branch>>,
    i: usize,
) -> Result<&'a Branch> {
    if i < components.len() {
        return Ok(&components[i]);
    }
    rest.as_deref().ok_or_else(|| {
        Error::BranchShape(format!(
            "countable conjunction branch is exhausted at instance {}: {} explicit components and no rest template",
            i + 1,
            components.len()
        ))
    })
}

/// The branch approximation ([f]_h)_n: a finitary formula.
pub fn branch_approx(f: &LAFormula, h: &Branch, n: u32) -> Result<PBFormula> {
    if n < 1 {
        return Err(Error::Domain("approximation level must be at least 1".into()));
    }
    match (f, h) {
        (LAFormula::Embed(pb), Branch::Empty) => approximate(pb, n),
        (LAFormula::AndN(parts), Branch::Tuple { components, rest }) => {
            if rest.is_some() || components.len() != parts.len() {
                return Err(shape_err(f, h));
            }
            let approx_parts = parts
                .iter()
                .zip(components)
                .map(|(p, c)| branch_approx(p, c, n))
                .collect::<Result<Vec<_>>>()?;
            Ok(PBFormula::And(approx_parts))
        }
        (LAFormula::AndW { binder, domain, body }, Branch::Tuple { components, rest }) => {
            let values = enumerate_clamped(domain, n as u64)?;
            let mut parts = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                let instance = instantiate_binder_la(body, binder, v)?;
                parts.push(branch_approx(&instance, instance_branch(components, rest, i)?, n)?);
            }
            Ok(PBFormula::And(parts))
        }
        (LAFormula::Not(inner), Branch::Neg { prefix, tail, certificate }) => {
            if matches!(certificate, Certificate::ConstantOnSingleton(_)) && !inner.is_not_free() {
                return Err(Error::BranchShape(
                    "a constant negation branch is only certified over a formula with a single branch (no inner negation)"
                        .into(),
                ));
            }
            let mut conjuncts = Vec::with_capacity(n as usize);
            for s in 1..=n {
                let (b, level) = neg_step(inner, prefix, tail, s)?;
                conjuncts.push(neg_branch_level(inner, &b, level)?);
            }
            approximate(&PBFormula::And(conjuncts), n)
        }
        (LAFormula::ExistsSeq { family, bounds, body }, Branch::Ex(inner)) => {
            let psi = branch_approx(body, inner, n)?;
            let ind = free_vars_pb(&psi).max_index(family);
            let margin = one_over(n);
            let mut out = psi;
            for i in (1..=ind).rev() {
                let bound = bounds.bound(i) + &margin;
                out = PBFormula::Exists {
                    var: QuantVar { family: family.clone(), index: i },
                    bound: IdxExpr::Const(bound),
                    body: Box::new(out),
                };
            }
            Ok(out)
        }
        (f, h) => Err(shape_err(f, h)),
    }
}

/// The level-m weak negation of the branch formula [f]_h, computed by
/// structural recursion without materializing the (possibly infinitary)
/// branch formula itself.
pub fn neg_branch_level(f: &LAFormula, h: &Branch, m: u32) -> Result<PBFormula> {
    if m < 1 {
        return Err(Error::Domain("approximation level must be at least 1".into()));
    }
    match (f, h) {
        (LAFormula::Embed(pb), Branch::Empty) => weak_negation(pb, m),
        (LAFormula::AndN(parts), Branch::Tuple { components, rest }) => {
            if rest.is_some() || components.len() != parts.len() {
                return Err(shape_err(f, h));
            }
            let neg_parts = parts
                .iter()
                .zip(components)
                .map(|(p, c)| neg_branch_level(p, c, m))
                .collect::<Result<Vec<_>>>()?;
            Ok(PBFormula::Or(neg_parts))
        }
        (LAFormula::AndW { binder, domain, body }, Branch::Tuple { components, rest }) => {
            let values = enumerate_clamped(domain, m as u64)?;
            let mut parts = Vec::with_capacity(values.len());
            for (i, v) in values.iter().enumerate() {
                let instance = instantiate_binder_la(body, binder, v)?;
                parts.push(neg_branch_level(
                    &instance,
                    instance_branch(components, rest, i)?,
                    m,
                )?);
            }
            Ok(PBFormula::Or(parts))
        }
        (LAFormula::Not(inner), Branch::Neg { prefix, tail, .. }) => {
            let mut parts = Vec::with_capacity(m as usize);
            for s in 1..=m {
                let (b, level) = neg_step(inner, prefix, tail, s)?;
                let conjunct = neg_branch_level(inner, &b, level)?;
                parts.push(weak_negation(&conjunct, m)?);
            }
            Ok(PBFormula::Or(parts))
        }
        (LAFormula::ExistsSeq { family, bounds, body }, Branch::Ex(inner)) => {
            let mut parts = Vec::with_capacity(m as usize);
            for t in 1..=m {
                let psi = branch_approx(body, inner, t)?;
                let ind = free_vars_pb(&psi).max_index(family);
                let mut chain = psi;
                for i in (1..=ind).rev() {
                    chain = PBFormula::Exists {
                        var: QuantVar { family: family.clone(), index: i },
                        bound: IdxExpr::Const(bounds.bound(i).clone()),
                        body: Box::new(chain),
                    };
                }
                parts.push(weak_negation(&chain, m)?);
            }
            Ok(PBFormula::Or(parts))
        }
        (f, h) => Err(shape_err(f, h)),
    }
}
