//! The property battery: seeded formula fuzzers and the desk-scale
//! suites that the calculus's metatheorems reduce to on finite
//! structures — approximation monotonicity, weak-negation soundness,
//! branch coherence and negation exclusion, enumeration sanity, and
//! print/parse round-trips.
//!
//! Every suite is deterministic: the fuzzers run on fixed-seed ChaCha
//! streams, parallel sweeps aggregate in input order, and reports render
//! identically across runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt::Write as _;

use crate::approx::{approximate, weak_negation};
use crate::evaluator::{eval, eval_la_prefix, FiniteNormedStructure};
use crate::la::{
    branch_approx, constant_neg_branch, diagonal_neg_branch, family_member, family_size,
    validate_pairing, Branch,
};
use crate::rational::{rat, rat_int, Rational};
use crate::syntax::ast::{BoundSeq, IdxExpr, LAFormula, PBFormula, QuantVar, Term};
use crate::syntax::domains::{enumerate, IndexDomain, IndexValue};
use crate::syntax::parse::{parse_la, parse_pb};
use crate::syntax::print::{print_la, print_pb};
use crate::syntax::vars::{free_index_binders_la, free_index_binders_pb, free_vars_la, free_vars_pb};
use crate::workbench::families::fuzz_structures;
use crate::Result;

const WITNESS_CAP: usize = 5;

/// One suite's verdict: how many individual checks ran and the first few
/// failure witnesses, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    fn gather(name: &'static str, results: Vec<(u64, Vec<String>)>) -> SuiteOutcome {
        let mut checks = 0;
        let mut failures = Vec::new();
        for (c, mut f) in results {
            checks += c;
            failures.append(&mut f);
        }
        failures.truncate(WITNESS_CAP);
        SuiteOutcome { name, checks, failures }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suites: Vec<SuiteOutcome>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteOutcome::passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let verdict = if s.passed() { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{}: {} checks, {} failures — {verdict}", s.name, s.checks, s.failures.len());
            for w in &s.failures {
                let _ = writeln!(out, "  witness: {w}");
            }
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.all_passed() { "pass" } else { "FAIL" }
        );
        out
    }
}

/// The full battery at contract scale.
pub fn run_all() -> Result<SuiteReport> {
    Ok(SuiteReport {
        suites: vec![
            roundtrip_suite(1000, 100)?,
            natural_suite(500)?,
            negando_suite(500)?,
            branch_suite(100)?,
            exclusion_suite(100)?,
            enumeration_suite()?,
        ],
    })
}

fn bound_palette(rng: &mut ChaCha8Rng) -> Rational {
    const NUM_DEN: [(i64, i64); 10] =
        [(0, 1), (1, 2), (1, 1), (3, 2), (2, 1), (5, 2), (3, 1), (1, 3), (2, 3), (1, 4)];
    let (n, d) = NUM_DEN[rng.gen_range(0..NUM_DEN.len())];
    rat(n, d)
}

fn scale_palette(rng: &mut ChaCha8Rng) -> Rational {
    const NUM_DEN: [(i64, i64); 6] = [(1, 1), (-1, 1), (1, 2), (2, 1), (-1, 2), (3, 1)];
    let (n, d) = NUM_DEN[rng.gen_range(0..NUM_DEN.len())];
    rat(n, d)
}

fn gen_term(rng: &mut ChaCha8Rng, scope: u32, depth: u32) -> Term {
    let leaf = depth == 0;
    match rng.gen_range(0..10u32) {
        0..=2 if scope > 0 => Term::var("x", rng.gen_range(1..=scope)),
        3 if leaf => Term::Zero,
        4..=6 if !leaf => Term::apply("T", vec![gen_term(rng, scope, depth - 1)]),
        7 if !leaf => Term::sum(gen_term(rng, scope, depth - 1), gen_term(rng, scope, depth - 1)),
        8..=9 if !leaf => {
            Term::scale(IdxExpr::rat(scale_palette(rng)), gen_term(rng, scope, depth - 1))
        }
        _ => Term::apply("c", Vec::new()),
    }
}

fn gen_atom(rng: &mut ChaCha8Rng, scope: u32, bound: IdxExpr) -> PBFormula {
    let t = gen_term(rng, scope, 2);
    match rng.gen_range(0..4u32) {
        0 => PBFormula::norm_le(t, bound),
        1 => PBFormula::norm_ge(t, bound),
        2 => PBFormula::rel_le("R", vec![t], bound),
        _ => PBFormula::rel_ge("R", vec![t], bound),
    }
}

struct PbBudget {
    depth: u32,
    quants: u32,
    countable: u32,
}

fn gen_pb(rng: &mut ChaCha8Rng, scope: u32, budget: &mut PbBudget) -> PBFormula {
    let roll = rng.gen_range(0..100u32);
    if budget.depth == 0 || roll < 35 {
        return gen_atom(rng, scope, IdxExpr::rat(bound_palette(rng)));
    }
    budget.depth -= 1;
    if roll < 55 {
        let parts = (0..rng.gen_range(2..=3usize)).map(|_| gen_pb(rng, scope, budget)).collect();
        PBFormula::And(parts)
    } else if roll < 75 {
        let parts = (0..rng.gen_range(2..=3usize)).map(|_| gen_pb(rng, scope, budget)).collect();
        PBFormula::Or(parts)
    } else if roll < 90 && budget.quants > 0 {
        budget.quants -= 1;
        let var = QuantVar::new("x", scope + 1);
        let bound = IdxExpr::rat(bound_palette(rng));
        let body = gen_pb(rng, scope + 1, budget);
        if rng.gen_bool(0.5) {
            PBFormula::exists(var, bound, body)
        } else {
            PBFormula::forall(var, bound, body)
        }
    } else if budget.countable > 0 {
        budget.countable -= 1;
        let body_bound = IdxExpr::add(
            IdxExpr::rat(bound_palette(rng)),
            IdxExpr::div(IdxExpr::int(1), IdxExpr::binder("i")),
        );
        let body = gen_atom(rng, scope, body_bound);
        PBFormula::countable_and("i", IndexDomain::Naturals, body)
    } else {
        gen_atom(rng, scope, IdxExpr::rat(bound_palette(rng)))
    }
}

/// Closed fuzz sentences over the shared vocabulary (constant `c`, unary
/// function `T`, unary relation `R`): depth ≤ 4, at most two quantifiers,
/// at most one countable conjunction. The tail of the pool is a fixed
/// set of degenerate-bound quantifier shapes that exercise the clamped
/// weak-negation clause.
pub fn fuzz_pb_sentences(count: usize, seed: u64) -> Vec<PBFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let clamped = clamp_shapes();
    while out.len() + clamped.len() < count {
        let mut budget = PbBudget { depth: 3, quants: 2, countable: 1 };
        out.push(gen_pb(&mut rng, 0, &mut budget));
    }
    out.extend(clamped.into_iter().take(count.saturating_sub(out.len())));
    out
}

/// Quantifier shapes whose bounds clamp under weak negation (∀ with
/// bound below the 1/n margin).
fn clamp_shapes() -> Vec<PBFormula> {
    let x1 = || Term::var("x", 1);
    vec![
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::rat(rat(1, 2)),
            PBFormula::norm_le(x1(), IdxExpr::int(1)),
        ),
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::rat(rat(1, 4)),
            PBFormula::norm_ge(x1(), IdxExpr::rat(rat(1, 2))),
        ),
        PBFormula::forall(
            QuantVar::new("x", 1),
            IdxExpr::rat(rat(1, 5)),
            PBFormula::rel_le("R", vec![Term::apply("T", vec![x1()])], IdxExpr::int(2)),
        ),
        PBFormula::exists(
            QuantVar::new("x", 1),
            IdxExpr::int(1),
            PBFormula::forall(
                QuantVar::new("x", 2),
                IdxExpr::rat(rat(1, 3)),
                PBFormula::norm_ge(Term::diff(Term::var("x", 1), Term::var("x", 2)), IdxExpr::rat(rat(1, 2))),
            ),
        ),
    ]
}

fn gen_la(rng: &mut ChaCha8Rng, depth: u32) -> LAFormula {
    let roll = rng.gen_range(0..100u32);
    if depth == 0 || roll < 30 {
        let mut budget = PbBudget { depth: 2, quants: 1, countable: 0 };
        return LAFormula::Embed(gen_pb(rng, 0, &mut budget));
    }
    if roll < 55 {
        LAFormula::not(gen_la(rng, depth - 1))
    } else if roll < 70 {
        LAFormula::and_n(vec![gen_la(rng, depth - 1), gen_la(rng, depth - 1)])
    } else if roll < 85 {
        let bound = IdxExpr::add(
            IdxExpr::rat(bound_palette(rng)),
            IdxExpr::div(IdxExpr::int(1), IdxExpr::binder("i")),
        );
        let body = LAFormula::not(LAFormula::Embed(gen_atom(rng, 0, bound)));
        LAFormula::and_w("i", IndexDomain::Naturals, body)
    } else {
        let atom = PBFormula::norm_ge(Term::var("y", 1), IdxExpr::rat(bound_palette(rng)));
        let inner = if rng.gen_bool(0.5) {
            LAFormula::Embed(atom)
        } else {
            LAFormula::not(LAFormula::Embed(atom))
        };
        LAFormula::exists_seq("y", BoundSeq::constant(rat_int(1)), inner)
    }
}

/// Closed infinitary fuzz sentences with nesting depth ≤ 3.
pub fn fuzz_la_sentences(count: usize, seed: u64) -> Vec<LAFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gen_la(&mut rng, 3)).collect()
}

/// Print/parse round-trips over fuzzed finitary and infinitary formulas.
pub fn roundtrip_suite(pb_count: usize, la_count: usize) -> Result<SuiteOutcome> {
    let pb = fuzz_pb_sentences(pb_count, 11);
    let la = fuzz_la_sentences(la_count, 13);
    let mut checks = 0;
    let mut failures = Vec::new();
    for f in &pb {
        checks += 1;
        let text = print_pb(f);
        match parse_pb(&text) {
            Ok(back) if &back == f => {}
            Ok(_) => failures.push(format!("reparse changed `{text}`")),
            Err(e) => failures.push(format!("`{text}` failed to parse back: {e}")),
        }
    }
    for f in &la {
        checks += 1;
        let text = print_la(f);
        match parse_la(&text) {
            Ok(back) if &back == f => {}
            Ok(_) => failures.push(format!("reparse changed `{text}`")),
            Err(e) => failures.push(format!("`{text}` failed to parse back: {e}")),
        }
    }
    failures.truncate(WITNESS_CAP);
    Ok(SuiteOutcome { name: "roundtrip", checks, failures })
}

fn structure_label(i: usize, st: &FiniteNormedStructure) -> String {
    format!("structure #{i} (dim {}, {} points)", st.dim(), st.carrier().len())
}

/// Approximation monotonicity: φ_{n+1} implies φ_n on every structure,
/// and exact truth implies every approximation for finitary φ.
pub fn natural_suite(formulas: usize) -> Result<SuiteOutcome> {
    let pool = fuzz_pb_sentences(formulas, 17);
    let structures = fuzz_structures()?;
    let results: Vec<(u64, Vec<String>)> = pool
        .par_iter()
        .map(|f| {
            let mut checks = 0;
            let mut failures = Vec::new();
            for (si, st) in structures.iter().enumerate() {
                let levels: Vec<Result<bool>> =
                    (1..=6).map(|n| approximate(f, n).and_then(|a| eval(&a, st))).collect();
                for n in 1..=5usize {
                    checks += 1;
                    match (&levels[n], &levels[n - 1]) {
                        (Ok(true), Ok(false)) => failures.push(format!(
                            "{} true at level {} but false at level {} on {}",
                            print_pb(f),
                            n + 1,
                            n,
                            structure_label(si, st)
                        )),
                        (Err(e), _) | (_, Err(e)) => {
                            failures.push(format!("{}: {e}", print_pb(f)))
                        }
                        _ => {}
                    }
                }
                if f.is_finitary() {
                    checks += 1;
                    match eval(f, st) {
                        Ok(true) => {
                            if let Some(n) =
                                (1..=5usize).find(|&n| !matches!(levels[n - 1], Ok(true)))
                            {
                                failures.push(format!(
                                    "{} holds exactly but fails at level {n} on {}",
                                    print_pb(f),
                                    structure_label(si, st)
                                ));
                            }
                        }
                        Ok(false) => {}
                        Err(e) => failures.push(format!("{}: {e}", print_pb(f))),
                    }
                }
            }
            (checks, failures)
        })
        .collect();
    Ok(SuiteOutcome::gather("natural", results))
}

/// Weak-negation soundness: whenever φ_n fails, neg(φ, n+1) holds.
pub fn negando_suite(formulas: usize) -> Result<SuiteOutcome> {
    let pool = fuzz_pb_sentences(formulas, 17);
    let structures = fuzz_structures()?;
    let results: Vec<(u64, Vec<String>)> = pool
        .par_iter()
        .map(|f| {
            let mut checks = 0;
            let mut failures = Vec::new();
            for (si, st) in structures.iter().enumerate() {
                for n in 1..=5u32 {
                    checks += 1;
                    let holds = approximate(f, n).and_then(|a| eval(&a, st));
                    match holds {
                        Ok(true) => {}
                        Ok(false) => {
                            match weak_negation(f, n + 1).and_then(|g| eval(&g, st)) {
                                Ok(true) => {}
                                Ok(false) => failures.push(format!(
                                    "{} fails at level {n} but its weak negation at {} fails too on {}",
                                    print_pb(f),
                                    n + 1,
                                    structure_label(si, st)
                                )),
                                Err(e) => failures.push(format!("{}: {e}", print_pb(f))),
                            }
                        }
                        Err(e) => failures.push(format!("{}: {e}", print_pb(f))),
                    }
                }
            }
            (checks, failures)
        })
        .collect();
    Ok(SuiteOutcome::gather("negando", results))
}

fn certified_members(f: &LAFormula) -> Vec<Branch> {
    let picks = match family_size(f) {
        Some(k) => [0, 2].iter().copied().filter(|&j| j < k).collect::<Vec<_>>(),
        None => vec![0, 2],
    };
    picks.into_iter().filter_map(|j| family_member(f, j).ok()).collect()
}

/// Branch approximations along certified branches are finitary, stay
/// inside the formula's free variables, and are level-coherent (the
/// prefix sweep asserts the true-block-then-false shape).
pub fn branch_suite(formulas: usize) -> Result<SuiteOutcome> {
    let pool = fuzz_la_sentences(formulas, 29);
    let structures = fuzz_structures()?;
    let results: Vec<(u64, Vec<String>)> = pool
        .par_iter()
        .map(|f| {
            let mut checks = 0;
            let mut failures = Vec::new();
            for h in certified_members(f) {
                if let Err(e) = validate_pairing(f, &h) {
                    failures.push(format!("{}: pairing rejected: {e}", print_la(f)));
                    continue;
                }
                if h.has_trusted() {
                    failures.push(format!("{}: canonical member is uncertified", print_la(f)));
                }
                for n in 1..=6u32 {
                    checks += 1;
                    match branch_approx(f, &h, n) {
                        Ok(g) => {
                            if !g.is_finitary() {
                                failures.push(format!(
                                    "{} level {n} is not finitary",
                                    print_la(f)
                                ));
                            }
                            let free_after = free_vars_pb(&g);
                            let free_before = free_vars_la(f);
                            if !free_after.ground.iter().all(|v| free_before.ground.contains(v)) {
                                failures.push(format!(
                                    "{} level {n} introduced free variables",
                                    print_la(f)
                                ));
                            }
                        }
                        Err(e) => failures.push(format!("{} level {n}: {e}", print_la(f))),
                    }
                }
                for (si, st) in structures.iter().enumerate() {
                    checks += 1;
                    if let Err(e) = eval_la_prefix(f, &h, st, 6) {
                        failures.push(format!(
                            "{} on {}: {e}",
                            print_la(f),
                            structure_label(si, st)
                        ));
                    }
                }
            }
            (checks, failures)
        })
        .collect();
    Ok(SuiteOutcome::gather("branch coherence", results))
}

/// Negation exclusion: no structure satisfies both every approximation
/// of a finitary φ and every branch approximation of ¬φ up to level 6,
/// for the two library-certified negation branches.
pub fn exclusion_suite(formulas: usize) -> Result<SuiteOutcome> {
    const DEPTH: u32 = 6;
    let pool: Vec<PBFormula> = fuzz_pb_sentences(formulas * 3, 31)
        .into_iter()
        .filter(|f| f.is_finitary())
        .take(formulas)
        .collect();
    let structures = fuzz_structures()?;
    let results: Vec<(u64, Vec<String>)> = pool
        .par_iter()
        .map(|f| {
            let mut checks = 0;
            let mut failures = Vec::new();
            let embedded = LAFormula::Embed(f.clone());
            let negated = LAFormula::not(embedded.clone());
            let branches = match constant_neg_branch(&embedded, 1) {
                Ok(c) => vec![c, diagonal_neg_branch(&embedded)],
                Err(e) => {
                    failures.push(format!("{}: {e}", print_pb(f)));
                    return (checks, failures);
                }
            };
            for (si, st) in structures.iter().enumerate() {
                let positive = (1..=DEPTH)
                    .try_fold(true, |acc, n| {
                        approximate(f, n).and_then(|a| eval(&a, st)).map(|v| acc && v)
                    });
                let positive = match positive {
                    Ok(v) => v,
                    Err(e) => {
                        failures.push(format!("{}: {e}", print_pb(f)));
                        continue;
                    }
                };
                for h in &branches {
                    checks += 1;
                    if !positive {
                        continue;
                    }
                    let negative = (1..=DEPTH).try_fold(true, |acc, n| {
                        branch_approx(&negated, h, n).and_then(|g| eval(&g, st)).map(|v| acc && v)
                    });
                    match negative {
                        Ok(true) => failures.push(format!(
                            "{} and its negation both hold to depth {DEPTH} on {}",
                            print_pb(f),
                            structure_label(si, st)
                        )),
                        Ok(false) => {}
                        Err(e) => failures.push(format!("{}: {e}", print_pb(f))),
                    }
                }
            }
            (checks, failures)
        })
        .collect();
    Ok(SuiteOutcome::gather("negation exclusion", results))
}

/// Frozen prefixes of the canonical enumerations and the structural
/// invariants of the tuple domains.
pub fn enumeration_suite() -> Result<SuiteOutcome> {
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut expect = |name: &str, got: Vec<IndexValue>, want: Vec<IndexValue>| {
        checks += 1;
        if got != want {
            failures.push(format!("{name} prefix drifted: got {got:?}"));
        }
    };

    let q = enumerate(&IndexDomain::Rationals, 12)?;
    expect(
        "Q",
        q,
        [
            (0, 1),
            (1, 1),
            (-1, 1),
            (1, 2),
            (-1, 2),
            (2, 1),
            (-2, 1),
            (1, 3),
            (-1, 3),
            (3, 2),
            (-3, 2),
            (2, 3),
        ]
        .iter()
        .map(|&(n, d)| IndexValue::Rat(rat(n, d)))
        .collect(),
    );

    let nat = enumerate(&IndexDomain::Naturals, 4)?;
    expect("Nat", nat, (1..=4).map(IndexValue::int).collect());

    let qs = enumerate(&IndexDomain::RationalsGE1Inf, 4)?;
    expect(
        "Qsharp",
        qs,
        vec![
            IndexValue::Infinity,
            IndexValue::int(1),
            IndexValue::int(2),
            IndexValue::Rat(rat(3, 2)),
        ],
    );

    let qsi = enumerate(&IndexDomain::IntsGE1Inf, 4)?;
    expect(
        "QsharpInt",
        qsi,
        vec![
            IndexValue::Infinity,
            IndexValue::int(1),
            IndexValue::int(2),
            IndexValue::int(3),
        ],
    );

    let co = enumerate(&IndexDomain::ConvexCoeffs(IdxExpr::int(2)), 16)?;
    checks += 1;
    for v in &co {
        let parts = match v {
            IndexValue::Tuple(parts) => parts,
            other => {
                failures.push(format!("CO(2) produced a non-tuple {other:?}"));
                continue;
            }
        };
        let mut total = rat_int(0);
        let mut ok = parts.len() == 2;
        for p in parts {
            match p {
                IndexValue::Rat(r) if *r >= rat_int(0) => total += r.clone(),
                _ => ok = false,
            }
        }
        if !ok || total != rat_int(1) {
            failures.push(format!("CO(2) entry is not convex: {v:?}"));
        }
    }

    let v2 = enumerate(&IndexDomain::IncreasingIntTuples(IdxExpr::int(2)), 8)?;
    checks += 1;
    for v in &v2 {
        let parts = match v {
            IndexValue::Tuple(parts) => parts,
            other => {
                failures.push(format!("V(2) produced a non-tuple {other:?}"));
                continue;
            }
        };
        let ints: Vec<_> = parts
            .iter()
            .filter_map(|p| match p {
                IndexValue::Rat(r) => Some(r.clone()),
                _ => None,
            })
            .collect();
        if ints.len() != 3 || !ints.windows(2).all(|w| w[0] < w[1]) {
            failures.push(format!("V(2) entry is not strictly increasing: {v:?}"));
        }
    }

    failures.truncate(WITNESS_CAP);
    Ok(SuiteOutcome { name: "enumeration", checks, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fuzzers_are_deterministic_and_closed() {
        let a = fuzz_pb_sentences(60, 11);
        let b = fuzz_pb_sentences(60, 11);
        assert_eq!(a, b);
        for f in &a {
            assert!(free_vars_pb(f).is_empty(), "{}", print_pb(f));
            assert!(free_index_binders_pb(f).is_empty(), "{}", print_pb(f));
        }
        let c = fuzz_la_sentences(40, 13);
        let d = fuzz_la_sentences(40, 13);
        assert_eq!(c, d);
        for f in &c {
            assert!(free_vars_la(f).is_empty(), "{}", print_la(f));
            assert!(free_index_binders_la(f).is_empty(), "{}", print_la(f));
        }
        assert_ne!(fuzz_pb_sentences(60, 12), a);
    }

    #[test]
    fn fuzz_pool_respects_the_advertised_budget() {
        fn quants(f: &PBFormula) -> u32 {
            match f {
                PBFormula::Atom(_) | PBFormula::Guard { .. } => 0,
                PBFormula::And(ps) | PBFormula::Or(ps) => ps.iter().map(quants).sum(),
                PBFormula::CountableAnd { body, .. } => quants(body),
                PBFormula::Exists { body, .. } | PBFormula::Forall { body, .. } => 1 + quants(body),
            }
        }
        fn countables(f: &PBFormula) -> u32 {
            match f {
                PBFormula::Atom(_) | PBFormula::Guard { .. } => 0,
                PBFormula::And(ps) | PBFormula::Or(ps) => ps.iter().map(countables).sum(),
                PBFormula::CountableAnd { body, .. } => 1 + countables(body),
                PBFormula::Exists { body, .. } | PBFormula::Forall { body, .. } => countables(body),
            }
        }
        for f in fuzz_pb_sentences(120, 17) {
            assert!(quants(&f) <= 2, "{}", print_pb(&f));
            assert!(countables(&f) <= 1, "{}", print_pb(&f));
        }
    }

    #[test]
    fn small_battery_passes() {
        let report = SuiteReport {
            suites: vec![
                roundtrip_suite(80, 20).unwrap(),
                natural_suite(40).unwrap(),
                negando_suite(40).unwrap(),
                branch_suite(12).unwrap(),
                exclusion_suite(12).unwrap(),
                enumeration_suite().unwrap(),
            ],
        };
        assert!(report.all_passed(), "{}", report.render());
        assert!(report.render().contains("natural"));
    }

    #[test]
    fn reports_render_failures_with_witnesses() {
        let report = SuiteReport {
            suites: vec![SuiteOutcome {
                name: "demo",
                checks: 3,
                failures: vec!["something broke".into()],
            }],
        };
        assert!(!report.all_passed());
        let text = report.render();
        assert!(text.contains("demo: 3 checks, 1 failures — FAIL"));
        assert!(text.contains("witness: something broke"));
        assert!(text.contains("overall: FAIL"));
    }
}
