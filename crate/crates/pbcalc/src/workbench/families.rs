//! Deterministic structure families: grid structures for the fuzz suites,
//! the perturbed-isometry family for the uniformity search, and unit-basis
//! ℓ_p structures for the block-basis search.
//!
//! Everything here is data. The generators take no randomness and no
//! configuration; the suites and acceptance fixtures pin the exact
//! carriers and interpretations below, so changes here are contract
//! changes.

use crate::evaluator::{FiniteNormedStructure, Norm};
use crate::rational::{rat, rat_int, Rational};
use crate::syntax::domains::IndexValue;
use crate::{Error, Result};
use num::traits::Signed;

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&n| rat_int(n)).collect()
}

/// The symmetric one-dimensional carrier {lo/den, …, hi/den}.
fn line_carrier(lo: i64, hi: i64, den: i64) -> Vec<Vec<Rational>> {
    (lo..=hi).map(|k| vec![rat(k, den)]).collect()
}

/// The square grid {lo/den, …, hi/den}².
fn square_carrier(lo: i64, hi: i64, den: i64) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for a in lo..=hi {
        for b in lo..=hi {
            out.push(vec![rat(a, den), rat(b, den)]);
        }
    }
    out
}

/// Six structures for the fuzz suites: dimensions 1 through 3, every norm
/// in {ℓ₁, ℓ₂, ℓ_∞}, carriers of at most 27 points, and a shared fuzz
/// vocabulary: constant `c`, unary function `T`, unary relation `R`.
pub fn fuzz_structures() -> Result<Vec<FiniteNormedStructure>> {
    let mut out = Vec::new();

    let mut st = FiniteNormedStructure::new(1, Norm::Lp(1), line_carrier(-4, 4, 2))?;
    st.add_const("c", ints(&[1]))?;
    st.add_affine_fn("T", vec![vec![rat(1, 2)]], ints(&[0]))?;
    st.add_normpower_rel("R", 1)?;
    out.push(st);

    let mut st = FiniteNormedStructure::new(1, Norm::LInf, line_carrier(-4, 4, 4))?;
    st.add_const("c", vec![rat(1, 2)])?;
    st.add_affine_fn("T", vec![ints(&[-1])], ints(&[0]))?;
    st.add_normpower_rel("R", 2)?;
    out.push(st);

    let mut carrier = square_carrier(-1, 1, 1);
    carrier.extend(square_carrier(-1, 1, 2).into_iter().filter(|p| {
        let half = rat(1, 2);
        (p[0].clone().abs() == half && p[1] == rat_int(0))
            || (p[1].clone().abs() == half && p[0] == rat_int(0))
    }));
    let mut st = FiniteNormedStructure::new(2, Norm::Lp(2), carrier)?;
    st.add_const("c", ints(&[1, 0]))?;
    st.add_affine_fn("T", vec![ints(&[0, -1]), ints(&[1, 0])], ints(&[0, 0]))?;
    st.add_normpower_rel("R", 2)?;
    out.push(st);

    let mut st = FiniteNormedStructure::new(2, Norm::Lp(1), square_carrier(-1, 1, 2))?;
    st.add_const("c", vec![rat(1, 2), rat(-1, 2)])?;
    st.add_affine_fn("T", vec![ints(&[1, 1]), ints(&[0, 1])], vec![rat(1, 4), rat_int(0)])?;
    st.add_normpower_rel("R", 1)?;
    out.push(st);

    let mut carrier = vec![ints(&[0, 0, 0])];
    for axis in 0..3 {
        for sign in [1i64, -1] {
            let mut p = ints(&[0, 0, 0]);
            p[axis] = rat_int(sign);
            carrier.push(p);
        }
    }
    carrier.push(ints(&[1, 1, 1]));
    carrier.push(ints(&[-1, -1, -1]));
    let mut st = FiniteNormedStructure::new(3, Norm::Lp(2), carrier)?;
    st.add_const("c", ints(&[1, 1, 1]))?;
    st.add_affine_fn(
        "T",
        vec![ints(&[1, 0, 0]), vec![rat_int(0), rat(1, 2), rat_int(0)], ints(&[0, 0, 0])],
        ints(&[0, 0, 0]),
    )?;
    st.add_normpower_rel("R", 2)?;
    out.push(st);

    let mut carrier = Vec::new();
    for a in -1..=1i64 {
        for b in -1..=1i64 {
            for c in -1..=1i64 {
                carrier.push(ints(&[a, b, c]));
            }
        }
    }
    let mut st = FiniteNormedStructure::new(3, Norm::LInf, carrier)?;
    st.add_const("c", ints(&[1, -1, 0]))?;
    st.add_affine_fn(
        "T",
        vec![ints(&[0, 1, 0]), ints(&[0, 0, 1]), ints(&[1, 0, 0])],
        ints(&[0, 0, 0]),
    )?;
    st.add_normpower_rel("R", 2)?;
    out.push(st);

    Ok(out)
}

/// Carrier of the perturbed-isometry family: the quarter grid
/// {−1/2, 0, 1/2}² together with the four axis points of norm 3/4.
fn ulam_carrier() -> Vec<Vec<Rational>> {
    let mut carrier = square_carrier(-1, 1, 2);
    for (a, b) in [(3i64, 0i64), (-3, 0), (0, 3), (0, -3)] {
        carrier.push(vec![rat(a, 4), rat(b, 4)]);
    }
    carrier
}

fn table_map(
    st: &mut FiniteNormedStructure,
    carrier: &[Vec<Rational>],
    f: impl Fn(&[Rational]) -> Vec<Rational>,
) -> Result<()> {
    let entries = carrier.iter().map(|p| (p.clone(), f(p))).collect();
    st.add_table_fn("T", 1, entries)
}

/// The uniformity-search family: six 13-point planar structures whose `T`
/// tables perturb the identity on the 1/8 grid.
///
/// The family is tuned so that the level at which the isometry hypothesis
/// first excludes each additivity counterexample is known: the doubling
/// map survives through level 3 and the two swap maps through level 12,
/// where the enumerated threshold 2/3 finally separates the stretched
/// pair (1/2,0) ↦ (3/4,0) from its preimage distance 1/2. The identity
/// and the 1/8-shift satisfy the additivity conclusion and never count.
pub fn ulam_family() -> Result<Vec<FiniteNormedStructure>> {
    let carrier = ulam_carrier();
    let mut out = Vec::new();

    for norm in [Norm::Lp(2), Norm::LInf] {
        let mut st = FiniteNormedStructure::new(2, norm, carrier.clone())?;
        table_map(&mut st, &carrier, |p| p.to_vec())?;
        out.push(st);
    }

    let mut st = FiniteNormedStructure::new(2, Norm::Lp(2), carrier.clone())?;
    table_map(&mut st, &carrier, |p| {
        if p == [rat_int(0), rat(3, 4)] {
            vec![rat(1, 8), rat(3, 4)]
        } else {
            p.to_vec()
        }
    })?;
    out.push(st);

    let mut st = FiniteNormedStructure::new(2, Norm::Lp(2), carrier.clone())?;
    table_map(&mut st, &carrier, |p| p.iter().map(|x| x * rat_int(2)).collect())?;
    out.push(st);

    for norm in [Norm::Lp(2), Norm::LInf] {
        let mut st = FiniteNormedStructure::new(2, norm, carrier.clone())?;
        table_map(&mut st, &carrier, |p| {
            if p == [rat(1, 2), rat_int(0)] {
                vec![rat(3, 4), rat_int(0)]
            } else {
                p.to_vec()
            }
        })?;
        out.push(st);
    }

    Ok(out)
}

/// The unit-basis structure of ℓ_p⁴: carrier {0, ±e₁, …, ±e₄} under the
/// requested norm, with no interpreted symbols. `p` is a Q^# value:
/// infinity or a positive integer.
pub fn unit_basis_lp(p: &IndexValue) -> Result<FiniteNormedStructure> {
    let norm = norm_for(p)?;
    let mut carrier = vec![ints(&[0, 0, 0, 0])];
    for axis in 0..4 {
        for sign in [1i64, -1] {
            let mut v = ints(&[0, 0, 0, 0]);
            v[axis] = rat_int(sign);
            carrier.push(v);
        }
    }
    FiniteNormedStructure::new(4, norm, carrier)
}

pub fn norm_for(p: &IndexValue) -> Result<Norm> {
    match p {
        IndexValue::Infinity => Ok(Norm::LInf),
        IndexValue::Rat(q) => crate::rational::as_positive_int(q).map(Norm::Lp).ok_or_else(|| {
            Error::Exactness(format!(
                "exponent {} is not exactly representable; use a positive integer or infinity",
                crate::rational::format_rational(q)
            ))
        }),
        IndexValue::Tuple(_) => Err(Error::Domain("a norm exponent cannot be a tuple".into())),
    }
}

/// A 9-point planar ℓ₁ grid with no interpreted symbols.
pub fn l1_grid() -> Result<FiniteNormedStructure> {
    FiniteNormedStructure::new(2, Norm::Lp(1), square_carrier(-1, 1, 2))
}

/// The degenerate one-point structure {0}.
pub fn single_point_structure() -> Result<FiniteNormedStructure> {
    FiniteNormedStructure::new(1, Norm::LInf, vec![ints(&[0])])
}

/// The family the uniformity-index estimate is certified against by
/// default: the three unit-basis structures of ℓ₁⁴, ℓ₂⁴, and ℓ_∞⁴.
pub fn standard_w_family() -> Result<Vec<FiniteNormedStructure>> {
    Ok(vec![
        unit_basis_lp(&IndexValue::int(1))?,
        unit_basis_lp(&IndexValue::int(2))?,
        unit_basis_lp(&IndexValue::Infinity)?,
    ])
}
