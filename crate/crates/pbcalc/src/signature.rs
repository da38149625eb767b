//! Signatures: symbol declarations with norm bounds and uniform-continuity
//! moduli, plus conformance checking of finite structures against them.
//!
//! A declaration carries two tables. The bound table promises
//! ‖f(x⃗)‖ ≤ K(N) (or |R(x⃗)| ≤ K(N)) whenever every argument lies in the
//! N-ball; entries tabulate specific N and an optional linear default
//! K(N) = a·N + b covers the rest. The modulus table promises that
//! arguments within δ of each other (inside the N-ball) give values within
//! ε; entries tabulate (N, ε) ↦ δ and an optional linear default δ = c·ε.
//! Tabulated δ are normalized per N to be monotone in ε by running max: a
//! δ that works for some ε also works for every larger ε.
//!
//! Conformance checks are exhaustive over the (finite) carrier and exact.
//! All hypothesis and conclusion inequalities are non-strict, so a modulus
//! that is tight on the carrier (a doubling map with δ = ε/2, say) still
//! conforms. A failed check is a reported violation with a concrete
//! witness, never an error; errors are reserved for malformed inputs.

use crate::evaluator::radical::RadicalValue;
use crate::evaluator::structure::{
    parse_bound_line, parse_modulus_line, BoundLine, FiniteNormedStructure, ModulusLine,
    RawTables,
};
use crate::rational::{format_rational, Rational};
use crate::syntax::ast::{AtomicFormula, LAFormula, PBFormula, Term};
use crate::{Error, Result};
use num::traits::Signed;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Norm bounds K(N), tabulated and optionally linearly defaulted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundTable {
    entries: BTreeMap<u32, Rational>,
    linear: Option<(Rational, Rational)>,
}

impl BoundTable {
    pub fn new() -> BoundTable {
        BoundTable::default()
    }

    pub fn insert_entry(&mut self, n: u32, k: Rational) -> Result<()> {
        if n < 1 {
            return Err(Error::Structure("bound level N must be at least 1".into()));
        }
        if !k.is_positive() {
            return Err(Error::Structure("bound K must be positive".into()));
        }
        if self.entries.insert(n, k).is_some() {
            return Err(Error::Structure(format!("duplicate bound entry for N={n}")));
        }
        Ok(())
    }

    /// Linear default K(N) = a·N + b; must be positive for every N ≥ 1.
    pub fn set_linear(&mut self, a: Rational, b: Rational) -> Result<()> {
        if a.is_negative() || !(a.clone() + b.clone()).is_positive() {
            return Err(Error::Structure(
                "linear bound must be nondecreasing and positive from N=1".into(),
            ));
        }
        if self.linear.is_some() {
            return Err(Error::Structure("duplicate linear bound default".into()));
        }
        self.linear = Some((a, b));
        Ok(())
    }

    pub fn bound_for(&self, n: u32) -> Option<Rational> {
        if let Some(k) = self.entries.get(&n) {
            return Some(k.clone());
        }
        self.linear
            .as_ref()
            .map(|(a, b)| a * Rational::from_integer(n.into()) + b)
    }

    pub fn tabulated(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.entries.iter().map(|(n, k)| (*n, k))
    }

    pub fn has_linear(&self) -> bool {
        self.linear.is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.linear.is_none()
    }

    fn lines(&self, name: &str, out: &mut String) {
        for (n, k) in &self.entries {
            writeln!(out, "{name} {n} {}", format_rational(k)).unwrap();
        }
        if let Some((a, b)) = &self.linear {
            writeln!(out, "{name} linear {} {}", format_rational(a), format_rational(b)).unwrap();
        }
    }
}

/// Uniform-continuity moduli δ(N, ε), tabulated and optionally linear.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModulusTable {
    entries: BTreeMap<u32, BTreeMap<Rational, Rational>>,
    linear: Option<Rational>,
}

impl ModulusTable {
    pub fn new() -> ModulusTable {
        ModulusTable::default()
    }

    pub fn insert_entry(&mut self, n: u32, eps: Rational, delta: Rational) -> Result<()> {
        if n < 1 {
            return Err(Error::Structure("modulus level N must be at least 1".into()));
        }
        if !eps.is_positive() || !delta.is_positive() {
            return Err(Error::Structure("modulus entries must have positive eps and delta".into()));
        }
        if self.entries.entry(n).or_default().insert(eps, delta).is_some() {
            return Err(Error::Structure(format!("duplicate modulus entry for N={n}")));
        }
        Ok(())
    }

    /// Linear default δ = c·ε with c > 0.
    pub fn set_linear(&mut self, c: Rational) -> Result<()> {
        if !c.is_positive() {
            return Err(Error::Structure("linear modulus factor must be positive".into()));
        }
        if self.linear.is_some() {
            return Err(Error::Structure("duplicate linear modulus default".into()));
        }
        self.linear = Some(c);
        Ok(())
    }

    /// Tabulated entries at level N, sorted by ε, with δ made monotone in
    /// ε by running max.
    pub fn normalized_entries(&self, n: u32) -> Vec<(Rational, Rational)> {
        let mut out = Vec::new();
        if let Some(map) = self.entries.get(&n) {
            let mut best: Option<Rational> = None;
            for (eps, delta) in map {
                let d = match &best {
                    Some(b) if b > delta => b.clone(),
                    _ => delta.clone(),
                };
                best = Some(d.clone());
                out.push((eps.clone(), d));
            }
        }
        out
    }

    pub fn levels(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.keys().copied()
    }

    pub fn linear_factor(&self) -> Option<&Rational> {
        self.linear.as_ref()
    }

    /// δ for a requested (N, ε): the normalized tabulated value at the
    /// largest tabulated ε′ ≤ ε, else the linear default.
    pub fn delta_for(&self, n: u32, eps: &Rational) -> Option<Rational> {
        let mut found = None;
        for (e, d) in self.normalized_entries(n) {
            if &e <= eps {
                found = Some(d);
            }
        }
        found.or_else(|| self.linear.as_ref().map(|c| c * eps))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.linear.is_none()
    }

    fn lines(&self, name: &str, out: &mut String) {
        for (n, map) in &self.entries {
            for (eps, delta) in map {
                writeln!(
                    out,
                    "{name} {n} {} {}",
                    format_rational(eps),
                    format_rational(delta)
                )
                .unwrap();
            }
        }
        if let Some(c) = &self.linear {
            writeln!(out, "{name} linear {}", format_rational(c)).unwrap();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnDecl {
    pub name: String,
    pub arity: usize,
    pub bounds: BoundTable,
    pub modulus: ModulusTable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelDecl {
    pub name: String,
    pub arity: usize,
    pub bounds: BoundTable,
    pub modulus: ModulusTable,
}

/// A signature: function and relation declarations with their tables.
/// Constants are 0-ary function symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    fns: BTreeMap<String, FnDecl>,
    rels: BTreeMap<String, RelDecl>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn declare_fn(&mut self, name: &str, arity: usize) -> Result<()> {
        if self.fns.contains_key(name) {
            return Err(Error::Structure(format!("duplicate function declaration `{name}`")));
        }
        self.fns.insert(
            name.to_string(),
            FnDecl {
                name: name.to_string(),
                arity,
                bounds: BoundTable::new(),
                modulus: ModulusTable::new(),
            },
        );
        Ok(())
    }

    pub fn declare_rel(&mut self, name: &str, arity: usize) -> Result<()> {
        if self.rels.contains_key(name) {
            return Err(Error::Structure(format!("duplicate relation declaration `{name}`")));
        }
        self.rels.insert(
            name.to_string(),
            RelDecl {
                name: name.to_string(),
                arity,
                bounds: BoundTable::new(),
                modulus: ModulusTable::new(),
            },
        );
        Ok(())
    }

    pub fn fns(&self) -> impl Iterator<Item = &FnDecl> {
        self.fns.values()
    }

    pub fn rels(&self) -> impl Iterator<Item = &RelDecl> {
        self.rels.values()
    }

    pub fn fn_decl(&self, name: &str) -> Option<&FnDecl> {
        self.fns.get(name)
    }

    pub fn rel_decl(&self, name: &str) -> Option<&RelDecl> {
        self.rels.get(name)
    }

    pub fn fn_decl_mut(&mut self, name: &str) -> Option<&mut FnDecl> {
        self.fns.get_mut(name)
    }

    pub fn rel_decl_mut(&mut self, name: &str) -> Option<&mut RelDecl> {
        self.rels.get_mut(name)
    }

    /// Route a raw `[bounds]` line to the declared symbol. Symbol names
    /// shared between a function and a relation would be ambiguous here
    /// and are rejected.
    pub fn apply_bound_line(&mut self, name: &str, line: &BoundLine) -> Result<()> {
        let table = self.route_tables(name)?.0;
        match line {
            BoundLine::Entry { n, k } => table.insert_entry(*n, k.clone()),
            BoundLine::Linear { a, b } => table.set_linear(a.clone(), b.clone()),
        }
    }

    /// Route a raw `[moduli]` line to the declared symbol.
    pub fn apply_modulus_line(&mut self, name: &str, line: &ModulusLine) -> Result<()> {
        let table = self.route_tables(name)?.1;
        match line {
            ModulusLine::Entry { n, eps, delta } => {
                table.insert_entry(*n, eps.clone(), delta.clone())
            }
            ModulusLine::Linear { c } => table.set_linear(c.clone()),
        }
    }

    fn route_tables(&mut self, name: &str) -> Result<(&mut BoundTable, &mut ModulusTable)> {
        let in_fns = self.fns.contains_key(name);
        let in_rels = self.rels.contains_key(name);
        match (in_fns, in_rels) {
            (true, true) => Err(Error::Structure(format!(
                "symbol `{name}` names both a function and a relation; table lines are ambiguous"
            ))),
            (true, false) => {
                let d = self.fns.get_mut(name).expect("checked");
                Ok((&mut d.bounds, &mut d.modulus))
            }
            (false, true) => {
                let d = self.rels.get_mut(name).expect("checked");
                Ok((&mut d.bounds, &mut d.modulus))
            }
            (false, false) => Err(Error::UnknownSymbol(format!("symbol `{name}` in table line"))),
        }
    }

    pub fn apply_raw_tables(&mut self, raw: &RawTables) -> Result<()> {
        for (name, line) in &raw.bounds {
            self.apply_bound_line(name, line)?;
        }
        for (name, line) in &raw.moduli {
            self.apply_modulus_line(name, line)?;
        }
        Ok(())
    }

    /// Infer a signature from a structure: every interpreted symbol is
    /// declared at its interpreted arity, and the structure's raw table
    /// sections are applied.
    pub fn from_structure(st: &FiniteNormedStructure) -> Result<Signature> {
        let mut sig = Signature::new();
        for name in st.consts().keys() {
            sig.declare_fn(name, 0)?;
        }
        for (name, interp) in st.fns() {
            sig.declare_fn(name, interp.arity())?;
        }
        for (name, interp) in st.rels() {
            sig.declare_rel(name, interp.arity())?;
        }
        sig.apply_raw_tables(&st.tables)?;
        Ok(sig)
    }

    pub fn parse(text: &str) -> Result<Signature> {
        let mut sig = Signature::new();
        let mut raw = RawTables::default();
        #[derive(PartialEq)]
        enum Section {
            None,
            Sig,
            Bounds,
            Moduli,
        }
        let mut section = Section::None;
        for (idx, rawline) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match rawline.find('#') {
                Some(pos) => &rawline[..pos],
                None => rawline,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[sig]" => {
                    section = Section::Sig;
                    continue;
                }
                "[bounds]" => {
                    section = Section::Bounds;
                    continue;
                }
                "[moduli]" => {
                    section = Section::Moduli;
                    continue;
                }
                _ if line.starts_with('[') => {
                    return Err(Error::Structure(format!(
                        "line {lineno}: unknown section `{line}`"
                    )))
                }
                _ => {}
            }
            match section {
                Section::None => {
                    return Err(Error::Structure(format!(
                        "line {lineno}: content outside any section"
                    )))
                }
                Section::Sig => {
                    let words: Vec<&str> = line.split_whitespace().collect();
                    match words.as_slice() {
                        [kind @ ("fn" | "rel"), name, arity] => {
                            let m = arity
                                .strip_prefix("arity=")
                                .and_then(|v| v.parse::<usize>().ok())
                                .ok_or_else(|| {
                                    Error::Structure(format!(
                                        "line {lineno}: expected arity=<m>, got `{arity}`"
                                    ))
                                })?;
                            if *kind == "fn" {
                                sig.declare_fn(name, m)?;
                            } else {
                                sig.declare_rel(name, m)?;
                            }
                        }
                        _ => {
                            return Err(Error::Structure(format!(
                                "line {lineno}: expected `fn <name> arity=<m>` or `rel <name> arity=<m>`"
                            )))
                        }
                    }
                }
                Section::Bounds => raw.bounds.push(parse_bound_line(line, lineno)?),
                Section::Moduli => raw.moduli.push(parse_modulus_line(line, lineno)?),
            }
        }
        sig.apply_raw_tables(&raw)?;
        Ok(sig)
    }

    pub fn load(path: &std::path::Path) -> Result<Signature> {
        let text = std::fs::read_to_string(path)?;
        Signature::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("[sig]\n");
        for decl in self.fns.values() {
            writeln!(out, "fn {} arity={}", decl.name, decl.arity).unwrap();
        }
        for decl in self.rels.values() {
            writeln!(out, "rel {} arity={}", decl.name, decl.arity).unwrap();
        }
        let mut bounds = String::new();
        for decl in self.fns.values() {
            decl.bounds.lines(&decl.name, &mut bounds);
        }
        for decl in self.rels.values() {
            decl.bounds.lines(&decl.name, &mut bounds);
        }
        if !bounds.is_empty() {
            out.push_str("[bounds]\n");
            out.push_str(&bounds);
        }
        let mut moduli = String::new();
        for decl in self.fns.values() {
            decl.modulus.lines(&decl.name, &mut moduli);
        }
        for decl in self.rels.values() {
            decl.modulus.lines(&decl.name, &mut moduli);
        }
        if !moduli.is_empty() {
            out.push_str("[moduli]\n");
            out.push_str(&moduli);
        }
        out
    }

    /// Check every symbol occurrence in a term against the declarations.
    pub fn validate_term(&self, t: &Term) -> Result<()> {
        match t {
            Term::Var(_) | Term::Zero => Ok(()),
            Term::Sum(a, b) => {
                self.validate_term(a)?;
                self.validate_term(b)
            }
            Term::Scale(_, inner) => self.validate_term(inner),
            Term::Apply { func, args } => {
                let decl = self
                    .fns
                    .get(func)
                    .ok_or_else(|| Error::UnknownSymbol(format!("function `{func}`")))?;
                if args.len() != decl.arity {
                    return Err(Error::ArityMismatch {
                        symbol: func.clone(),
                        expected: decl.arity,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.validate_term(a))
            }
            Term::SumOver { body, .. } => self.validate_term(body),
        }
    }

    pub fn validate_pb(&self, f: &PBFormula) -> Result<()> {
        match f {
            PBFormula::Atom(a) => match a {
                AtomicFormula::NormLe(t, _) | AtomicFormula::NormGe(t, _) => self.validate_term(t),
                AtomicFormula::RelLe { rel, args, .. } | AtomicFormula::RelGe { rel, args, .. } => {
                    let decl = self
                        .rels
                        .get(rel)
                        .ok_or_else(|| Error::UnknownSymbol(format!("relation `{rel}`")))?;
                    if args.len() != decl.arity {
                        return Err(Error::ArityMismatch {
                            symbol: rel.clone(),
                            expected: decl.arity,
                            got: args.len(),
                        });
                    }
                    args.iter().try_for_each(|t| self.validate_term(t))
                }
            },
            PBFormula::And(parts) | PBFormula::Or(parts) => {
                parts.iter().try_for_each(|p| self.validate_pb(p))
            }
            PBFormula::CountableAnd { body, .. } => self.validate_pb(body),
            PBFormula::Exists { body, .. } | PBFormula::Forall { body, .. } => {
                self.validate_pb(body)
            }
            PBFormula::Guard { .. } => Ok(()),
        }
    }

    pub fn validate_la(&self, f: &LAFormula) -> Result<()> {
        match f {
            LAFormula::Embed(pb) => self.validate_pb(pb),
            LAFormula::AndN(parts) => parts.iter().try_for_each(|p| self.validate_la(p)),
            LAFormula::AndW { body, .. } => self.validate_la(body),
            LAFormula::Not(inner) => self.validate_la(inner),
            LAFormula::ExistsSeq { body, .. } => self.validate_la(body),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Function,
    Relation,
}

/// A conformance failure with its concrete witness.
#[derive(Debug, Clone)]
pub enum Violation {
    MissingInterpretation {
        symbol: String,
        kind: SymbolKind,
    },
    ArityMismatch {
        symbol: String,
        declared: usize,
        interpreted: usize,
    },
    /// ‖f(x⃗)‖ (or |R(x⃗)|) exceeded K(N).
    Bound {
        symbol: String,
        level: u32,
        limit: Rational,
        args: Vec<Vec<Rational>>,
        observed: String,
    },
    /// Arguments within δ produced values further than ε apart. `level`
    /// is None for the linear default, which is checked on the whole
    /// carrier.
    Modulus {
        symbol: String,
        level: Option<u32>,
        eps: Option<Rational>,
        delta: Rational,
        args: Vec<Vec<Rational>>,
        args2: Vec<Vec<Rational>>,
        observed: String,
    },
    /// A table interpretation has no entry at a point the tables demand.
    Gap {
        symbol: String,
        args: Vec<Vec<Rational>>,
        message: String,
    },
}

fn fmt_tuple(args: &[Vec<Rational>]) -> String {
    args.iter()
        .map(|v| {
            format!(
                "({})",
                v.iter().map(format_rational).collect::<Vec<_>>().join(" ")
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingInterpretation { symbol, kind } => {
                let k = match kind {
                    SymbolKind::Function => "function",
                    SymbolKind::Relation => "relation",
                };
                write!(f, "{k} `{symbol}` has no interpretation")
            }
            Violation::ArityMismatch { symbol, declared, interpreted } => write!(
                f,
                "`{symbol}` declared with arity {declared} but interpreted with arity {interpreted}"
            ),
            Violation::Bound { symbol, level, limit, args, observed } => write!(
                f,
                "`{symbol}` exceeds bound {} at N={level}: value {observed} at {}",
                format_rational(limit),
                fmt_tuple(args)
            ),
            Violation::Modulus { symbol, level, eps, delta, args, args2, observed } => {
                let scope = match level {
                    Some(n) => format!("N={n}"),
                    None => "linear default".to_string(),
                };
                let eps_str = match eps {
                    Some(e) => format!("eps={}", format_rational(e)),
                    None => "all eps".to_string(),
                };
                write!(
                    f,
                    "`{symbol}` breaks its modulus ({scope}, {eps_str}, delta={}): values {observed} apart at {} and {}",
                    format_rational(delta),
                    fmt_tuple(args),
                    fmt_tuple(args2)
                )
            }
            Violation::Gap { symbol, args, message } => {
                write!(f, "`{symbol}` is not defined at {}: {message}", fmt_tuple(args))
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConformanceReport {
    pub violations: Vec<Violation>,
    pub bound_checks: u64,
    pub modulus_checks: u64,
}

impl ConformanceReport {
    pub fn is_conformant(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively check a structure against a signature's tables.
pub fn check_structure_conformance(
    sig: &Signature,
    st: &FiniteNormedStructure,
) -> Result<ConformanceReport> {
    let mut report = ConformanceReport::default();
    let saturation = ceil_max_norm(st);

    for decl in sig.fns() {
        let interp_arity = match st.fn_arity(&decl.name) {
            Some(a) => a,
            None => {
                report.violations.push(Violation::MissingInterpretation {
                    symbol: decl.name.clone(),
                    kind: SymbolKind::Function,
                });
                continue;
            }
        };
        if interp_arity != decl.arity {
            report.violations.push(Violation::ArityMismatch {
                symbol: decl.name.clone(),
                declared: decl.arity,
                interpreted: interp_arity,
            });
            continue;
        }
        check_fn_bounds(decl, st, saturation, &mut report)?;
        check_fn_modulus(decl, st, &mut report)?;
    }

    for decl in sig.rels() {
        let interp_arity = match st.rel_arity(&decl.name) {
            Some(a) => a,
            None => {
                report.violations.push(Violation::MissingInterpretation {
                    symbol: decl.name.clone(),
                    kind: SymbolKind::Relation,
                });
                continue;
            }
        };
        if interp_arity != decl.arity {
            report.violations.push(Violation::ArityMismatch {
                symbol: decl.name.clone(),
                declared: decl.arity,
                interpreted: interp_arity,
            });
            continue;
        }
        check_rel_bounds(decl, st, saturation, &mut report)?;
        check_rel_modulus(decl, st, &mut report)?;
    }

    Ok(report)
}

/// Smallest integer N ≥ 1 whose ball contains the whole carrier.
fn ceil_max_norm(st: &FiniteNormedStructure) -> u32 {
    let mut n = 1u32;
    'grow: loop {
        let r = Rational::from_integer(n.into());
        for i in 0..st.carrier().len() {
            if st.carrier_norm(i).cmp_rational(&r) == Ordering::Greater {
                n += 1;
                continue 'grow;
            }
        }
        return n;
    }
}

fn ball(st: &FiniteNormedStructure, n: u32) -> Vec<usize> {
    let r = Rational::from_integer(n.into());
    (0..st.carrier().len())
        .filter(|&i| st.carrier_norm(i).cmp_rational(&r) != Ordering::Greater)
        .collect()
}

fn tuples(indices: &[usize], arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::with_capacity(out.len() * indices.len());
        for prefix in &out {
            for &i in indices {
                let mut t = prefix.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn tuple_vectors(st: &FiniteNormedStructure, tuple: &[usize]) -> Vec<Vec<Rational>> {
    tuple.iter().map(|&i| st.carrier()[i].clone()).collect()
}

/// Levels a bound table must be checked at: every tabulated N, plus, when
/// a linear default is present, every N up to the ball that saturates the
/// carrier (larger balls add no points and linear bounds only grow).
fn bound_levels(table: &BoundTable, saturation: u32) -> Vec<u32> {
    let mut levels: Vec<u32> = table.tabulated().map(|(n, _)| n).collect();
    if table.has_linear() {
        for n in 1..=saturation {
            if !levels.contains(&n) {
                levels.push(n);
            }
        }
    }
    levels.sort_unstable();
    levels
}

fn diff_norm(
    st: &FiniteNormedStructure,
    xs: &[Vec<Rational>],
    ys: &[Vec<Rational>],
) -> Result<RadicalValue> {
    let mut best: Option<RadicalValue> = None;
    for (x, y) in xs.iter().zip(ys) {
        let d: Vec<Rational> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let nd = st.norm_of(&d)?;
        best = Some(match best {
            None => nd,
            Some(b) => {
                if nd.cmp_radical(&b) == Ordering::Greater {
                    nd
                } else {
                    b
                }
            }
        });
    }
    best.ok_or_else(|| Error::Structure("modulus check needs positive arity".into()))
}

fn check_fn_bounds(
    decl: &FnDecl,
    st: &FiniteNormedStructure,
    saturation: u32,
    report: &mut ConformanceReport,
) -> Result<()> {
    for n in bound_levels(&decl.bounds, saturation) {
        let k = decl.bounds.bound_for(n).expect("level came from the table");
        let b = ball(st, n);
        for tuple in tuples(&b, decl.arity) {
            let args = tuple_vectors(st, &tuple);
            report.bound_checks += 1;
            let value = match st.apply_fn(&decl.name, &args) {
                Ok(v) => v,
                Err(e) => {
                    report.violations.push(Violation::Gap {
                        symbol: decl.name.clone(),
                        args,
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            let norm = st.norm_of(&value)?;
            if norm.cmp_rational(&k) == Ordering::Greater {
                report.violations.push(Violation::Bound {
                    symbol: decl.name.clone(),
                    level: n,
                    limit: k.clone(),
                    args,
                    observed: format!(
                        "({})^(1/{})",
                        format_rational(norm.base()),
                        norm.root()
                    ),
                });
            }
        }
    }
    Ok(())
}

fn check_fn_modulus(
    decl: &FnDecl,
    st: &FiniteNormedStructure,
    report: &mut ConformanceReport,
) -> Result<()> {
    if decl.arity == 0 || decl.modulus.is_empty() {
        return Ok(());
    }
    let value_of = |args: &[Vec<Rational>]| st.apply_fn(&decl.name, args);
    for n in decl.modulus.levels().collect::<Vec<_>>() {
        let entries = decl.modulus.normalized_entries(n);
        let b = ball(st, n);
        let ts = tuples(&b, decl.arity);
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                let xs = tuple_vectors(st, &ts[i]);
                let ys = tuple_vectors(st, &ts[j]);
                let d = diff_norm(st, &xs, &ys)?;
                let (fx, fy) = match (value_of(&xs), value_of(&ys)) {
                    (Ok(a), Ok(b)) => (a, b),
                    // Gaps are already reported by the bound sweep.
                    _ => continue,
                };
                let vd: Vec<Rational> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
                let value_dist = st.norm_of(&vd)?;
                for (eps, delta) in &entries {
                    report.modulus_checks += 1;
                    if d.cmp_rational(delta) != Ordering::Greater
                        && value_dist.cmp_rational(eps) == Ordering::Greater
                    {
                        report.violations.push(Violation::Modulus {
                            symbol: decl.name.clone(),
                            level: Some(n),
                            eps: Some(eps.clone()),
                            delta: delta.clone(),
                            args: xs.clone(),
                            args2: ys.clone(),
                            observed: format!(
                                "({})^(1/{})",
                                format_rational(value_dist.base()),
                                value_dist.root()
                            ),
                        });
                    }
                }
            }
        }
    }
    if let Some(c) = decl.modulus.linear_factor() {
        // δ = c·ε for every ε at once: the claim fails at some ε exactly
        // when c·‖f(x⃗) − f(y⃗)‖ > max‖x_i − y_i‖.
        let all: Vec<usize> = (0..st.carrier().len()).collect();
        let ts = tuples(&all, decl.arity);
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                let xs = tuple_vectors(st, &ts[i]);
                let ys = tuple_vectors(st, &ts[j]);
                report.modulus_checks += 1;
                let d = diff_norm(st, &xs, &ys)?;
                let (fx, fy) = match (value_of(&xs), value_of(&ys)) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                let vd: Vec<Rational> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
                let scaled = st.norm_of(&vd)?.scale(c)?;
                if scaled.cmp_radical(&d) == Ordering::Greater {
                    report.violations.push(Violation::Modulus {
                        symbol: decl.name.clone(),
                        level: None,
                        eps: None,
                        delta: c.clone(),
                        args: xs,
                        args2: ys,
                        observed: format!(
                            "c-scaled ({})^(1/{})",
                            format_rational(scaled.base()),
                            scaled.root()
                        ),
                    });
                }
            }
        }
    }
    Ok(())
}

fn check_rel_bounds(
    decl: &RelDecl,
    st: &FiniteNormedStructure,
    saturation: u32,
    report: &mut ConformanceReport,
) -> Result<()> {
    for n in bound_levels(&decl.bounds, saturation) {
        let k = decl.bounds.bound_for(n).expect("level came from the table");
        let b = ball(st, n);
        for tuple in tuples(&b, decl.arity) {
            let args = tuple_vectors(st, &tuple);
            report.bound_checks += 1;
            let value = match st.rel_value(&decl.name, &args) {
                Ok(v) => v,
                Err(e) => {
                    report.violations.push(Violation::Gap {
                        symbol: decl.name.clone(),
                        args,
                        message: e.to_string(),
                    });
                    continue;
                }
            };
            if value.abs() > k {
                report.violations.push(Violation::Bound {
                    symbol: decl.name.clone(),
                    level: n,
                    limit: k.clone(),
                    args,
                    observed: format_rational(&value),
                });
            }
        }
    }
    Ok(())
}

fn check_rel_modulus(
    decl: &RelDecl,
    st: &FiniteNormedStructure,
    report: &mut ConformanceReport,
) -> Result<()> {
    if decl.arity == 0 || decl.modulus.is_empty() {
        return Ok(());
    }
    for n in decl.modulus.levels().collect::<Vec<_>>() {
        let entries = decl.modulus.normalized_entries(n);
        let b = ball(st, n);
        let ts = tuples(&b, decl.arity);
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                let xs = tuple_vectors(st, &ts[i]);
                let ys = tuple_vectors(st, &ts[j]);
                let d = diff_norm(st, &xs, &ys)?;
                let (rx, ry) = match (
                    st.rel_value(&decl.name, &xs),
                    st.rel_value(&decl.name, &ys),
                ) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                let value_dist = (rx - ry).abs();
                for (eps, delta) in &entries {
                    report.modulus_checks += 1;
                    if d.cmp_rational(delta) != Ordering::Greater && value_dist > *eps {
                        report.violations.push(Violation::Modulus {
                            symbol: decl.name.clone(),
                            level: Some(n),
                            eps: Some(eps.clone()),
                            delta: delta.clone(),
                            args: xs.clone(),
                            args2: ys.clone(),
                            observed: format_rational(&value_dist),
                        });
                    }
                }
            }
        }
    }
    if let Some(c) = decl.modulus.linear_factor() {
        let all: Vec<usize> = (0..st.carrier().len()).collect();
        let ts = tuples(&all, decl.arity);
        for i in 0..ts.len() {
            for j in (i + 1)..ts.len() {
                let xs = tuple_vectors(st, &ts[i]);
                let ys = tuple_vectors(st, &ts[j]);
                report.modulus_checks += 1;
                let d = diff_norm(st, &xs, &ys)?;
                let (rx, ry) = match (
                    st.rel_value(&decl.name, &xs),
                    st.rel_value(&decl.name, &ys),
                ) {
                    (Ok(a), Ok(b)) => (a, b),
                    _ => continue,
                };
                let value_dist = (rx - ry).abs();
                if d.cmp_rational(&(c * &value_dist)) == Ordering::Less {
                    report.violations.push(Violation::Modulus {
                        symbol: decl.name.clone(),
                        level: None,
                        eps: None,
                        delta: c.clone(),
                        args: xs,
                        args2: ys,
                        observed: format_rational(&value_dist),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::structure::Norm;
    use crate::rational::{rat, rat_int};
    use crate::syntax::parse::{parse_la, parse_pb};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat_int(x)).collect()
    }

    fn line_structure() -> FiniteNormedStructure {
        FiniteNormedStructure::new(
            1,
            Norm::Lp(2),
            vec![v(&[0]), v(&[1]), v(&[-1]), v(&[2]), v(&[-2])],
        )
        .unwrap()
    }

    #[test]
    fn bound_table_lookup() {
        let mut t = BoundTable::new();
        t.insert_entry(2, rat_int(3)).unwrap();
        t.set_linear(rat_int(1), rat_int(1)).unwrap();
        assert_eq!(t.bound_for(2), Some(rat_int(3)));
        assert_eq!(t.bound_for(5), Some(rat_int(6)));
        assert!(t.insert_entry(2, rat_int(4)).is_err());
        assert!(BoundTable::new().insert_entry(0, rat_int(1)).is_err());
        assert!(BoundTable::new().insert_entry(1, rat_int(0)).is_err());
        assert!(BoundTable::new().set_linear(rat_int(-1), rat_int(5)).is_err());
    }

    #[test]
    fn modulus_normalization_is_a_running_max() {
        let mut t = ModulusTable::new();
        t.insert_entry(1, rat(1, 4), rat(1, 3)).unwrap();
        t.insert_entry(1, rat(1, 2), rat(1, 4)).unwrap();
        let entries = t.normalized_entries(1);
        assert_eq!(entries, vec![(rat(1, 4), rat(1, 3)), (rat(1, 2), rat(1, 3))]);
        assert_eq!(t.delta_for(1, &rat(1, 2)), Some(rat(1, 3)));
        t.set_linear(rat(1, 2)).unwrap();
        assert_eq!(t.delta_for(2, &rat_int(1)), Some(rat(1, 2)));
    }

    #[test]
    fn validation_catches_unknown_symbols_and_arities() {
        let mut sig = Signature::new();
        sig.declare_fn("T", 1).unwrap();
        sig.declare_rel("R", 1).unwrap();
        assert!(sig.validate_pb(&parse_pb("(le (norm (T x1)) 1)").unwrap()).is_ok());
        assert!(sig.validate_pb(&parse_pb("(le (norm (U x1)) 1)").unwrap()).is_err());
        let err = sig.validate_pb(&parse_pb("(le (norm (T x1 x2)) 1)").unwrap()).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { expected: 1, got: 2, .. }), "{err}");
        assert!(sig.validate_pb(&parse_pb("(ge (rel R x1) 0)").unwrap()).is_ok());
        assert!(sig.validate_pb(&parse_pb("(ge (rel S x1) 0)").unwrap()).is_err());
        assert!(sig
            .validate_la(&parse_la("(not (le (norm (T (T x1))) 1))").unwrap())
            .is_ok());
    }

    #[test]
    fn signature_text_round_trips() {
        let mut sig = Signature::new();
        sig.declare_fn("T", 1).unwrap();
        sig.declare_fn("c", 0).unwrap();
        sig.declare_rel("R", 2).unwrap();
        let d = sig.fn_decl_mut("T").unwrap();
        d.bounds.insert_entry(1, rat_int(2)).unwrap();
        d.bounds.set_linear(rat_int(2), rat_int(0)).unwrap();
        d.modulus.insert_entry(1, rat(1, 2), rat(1, 4)).unwrap();
        d.modulus.set_linear(rat(1, 2)).unwrap();
        let text = sig.to_text();
        let back = Signature::parse(&text).unwrap();
        assert_eq!(back, sig);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn conformant_isometry_passes() {
        let mut st = line_structure();
        st.add_affine_fn("neg", vec![v(&[-1])], v(&[0])).unwrap();
        let mut sig = Signature::new();
        sig.declare_fn("neg", 1).unwrap();
        let d = sig.fn_decl_mut("neg").unwrap();
        d.bounds.set_linear(rat_int(1), rat_int(0)).unwrap();
        d.modulus.set_linear(rat_int(1)).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.is_conformant(), "{:?}", report.violations);
        assert!(report.bound_checks > 0 && report.modulus_checks > 0);
    }

    #[test]
    fn tight_doubling_modulus_conforms_non_strictly() {
        let mut st = line_structure();
        st.add_affine_fn("D", vec![v(&[2])], v(&[0])).unwrap();
        let mut sig = Signature::new();
        sig.declare_fn("D", 1).unwrap();
        let d = sig.fn_decl_mut("D").unwrap();
        d.bounds.set_linear(rat_int(2), rat_int(0)).unwrap();
        d.modulus.set_linear(rat(1, 2)).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.is_conformant(), "{:?}", report.violations);

        // Claiming δ = ε is broken for a doubling map; any distinct pair
        // witnesses it.
        let mut sig = Signature::new();
        sig.declare_fn("D", 1).unwrap();
        sig.fn_decl_mut("D").unwrap().modulus.set_linear(rat_int(1)).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(!report.is_conformant());
        assert!(matches!(report.violations[0], Violation::Modulus { level: None, .. }));
    }

    #[test]
    fn bound_violations_carry_witnesses() {
        let mut st = line_structure();
        st.add_affine_fn("D", vec![v(&[2])], v(&[0])).unwrap();
        let mut sig = Signature::new();
        sig.declare_fn("D", 1).unwrap();
        sig.fn_decl_mut("D")
            .unwrap()
            .bounds
            .insert_entry(2, rat_int(3))
            .unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        let bound = report
            .violations
            .iter()
            .find_map(|v| match v {
                Violation::Bound { level, args, .. } => Some((level, args)),
                _ => None,
            })
            .expect("a bound violation");
        assert_eq!(*bound.0, 2);
        assert_eq!(bound.1[0], v(&[2]));
    }

    #[test]
    fn tabulated_modulus_entries_are_checked_inside_the_ball() {
        let mut st = line_structure();
        st.add_affine_fn("D", vec![v(&[2])], v(&[0])).unwrap();
        let mut sig = Signature::new();
        sig.declare_fn("D", 1).unwrap();
        // Within the 1-ball, points at distance ≤ 1 can differ by 2 after
        // doubling, so eps = 1 with delta = 1 must fail.
        sig.fn_decl_mut("D")
            .unwrap()
            .modulus
            .insert_entry(1, rat_int(1), rat_int(1))
            .unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(!report.is_conformant());
        // delta = 1/2 makes the same claim true on this carrier: the only
        // pairs within 1/2 are identical.
        let mut sig = Signature::new();
        sig.declare_fn("D", 1).unwrap();
        sig.fn_decl_mut("D")
            .unwrap()
            .modulus
            .insert_entry(1, rat_int(1), rat(1, 2))
            .unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.is_conformant(), "{:?}", report.violations);
    }

    #[test]
    fn gaps_and_missing_symbols_are_reported() {
        let mut st = line_structure();
        st.add_table_fn("T", 1, vec![(v(&[0]), v(&[0]))]).unwrap();
        let mut sig = Signature::new();
        sig.declare_fn("T", 1).unwrap();
        sig.declare_fn("U", 1).unwrap();
        sig.fn_decl_mut("T").unwrap().bounds.insert_entry(1, rat_int(1)).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Gap { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MissingInterpretation { .. })));
    }

    #[test]
    fn conformance_is_monotone_under_carrier_shrink() {
        let big = {
            let mut st = line_structure();
            st.add_affine_fn("neg", vec![v(&[-1])], v(&[0])).unwrap();
            st
        };
        let small = {
            let mut st =
                FiniteNormedStructure::new(1, Norm::Lp(2), vec![v(&[0]), v(&[1]), v(&[-1])])
                    .unwrap();
            st.add_affine_fn("neg", vec![v(&[-1])], v(&[0])).unwrap();
            st
        };
        let mut sig = Signature::new();
        sig.declare_fn("neg", 1).unwrap();
        let d = sig.fn_decl_mut("neg").unwrap();
        d.bounds.set_linear(rat_int(1), rat_int(0)).unwrap();
        d.modulus.set_linear(rat_int(1)).unwrap();
        let on_big = check_structure_conformance(&sig, &big).unwrap();
        let on_small = check_structure_conformance(&sig, &small).unwrap();
        assert!(on_big.is_conformant());
        assert!(on_small.is_conformant());
    }

    #[test]
    fn relations_check_absolute_values_and_moduli() {
        let mut st = line_structure();
        st.add_normpower_rel("f", 2).unwrap();
        let mut sig = Signature::new();
        sig.declare_rel("f", 1).unwrap();
        let d = sig.rel_decl_mut("f").unwrap();
        // |‖x‖²| ≤ N² on the N-ball: linear K(N) = 4N covers N ≤ 4.
        d.bounds.set_linear(rat_int(4), rat_int(0)).unwrap();
        // |x² − y²| = |x−y|·|x+y| ≤ 4|x−y| on this carrier: δ = ε/4.
        d.modulus.set_linear(rat(1, 4)).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.is_conformant(), "{:?}", report.violations);

        // δ = ε is broken: x = 2, y = 1 are at distance 1 with values 3 apart.
        let mut sig = Signature::new();
        sig.declare_rel("f", 1).unwrap();
        sig.rel_decl_mut("f").unwrap().modulus.set_linear(rat_int(1)).unwrap();
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(!report.is_conformant());
    }

    #[test]
    fn inferred_signatures_cover_all_interpretations() {
        let mut st = line_structure();
        st.add_const("c", v(&[1])).unwrap();
        st.add_affine_fn("neg", vec![v(&[-1])], v(&[0])).unwrap();
        st.add_normpower_rel("f", 2).unwrap();
        st.tables.bounds.push(("neg".into(), BoundLine::Linear { a: rat_int(1), b: rat_int(0) }));
        let sig = Signature::from_structure(&st).unwrap();
        assert_eq!(sig.fn_decl("c").unwrap().arity, 0);
        assert_eq!(sig.fn_decl("neg").unwrap().arity, 1);
        assert_eq!(sig.rel_decl("f").unwrap().arity, 1);
        assert!(sig.fn_decl("neg").unwrap().bounds.has_linear());
        let report = check_structure_conformance(&sig, &st).unwrap();
        assert!(report.is_conformant(), "{:?}", report.violations);
    }
}
