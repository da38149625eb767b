//! Finite rational normed structures: the concrete models the evaluator
//! runs against.
//!
//! A structure is a finite set of rational vectors (the carrier) inside
//! Q^dim under an ℓ_p or ℓ_∞ norm, together with interpretations for
//! function, relation, and constant symbols. Carriers must contain the
//! zero vector and be closed under negation; quantifiers range over the
//! carrier in file order, which keeps witnesses deterministic.
//!
//! Interpretations:
//!   - constants: a fixed vector;
//!   - functions: affine maps (matrix · concatenated arguments + offset)
//!     or finite lookup tables;
//!   - relations: `normpower` (the norm of the single argument raised to
//!     an exponent that keeps the value rational) or finite tables.
//!
//! Functions need not map the carrier into itself; term evaluation is
//! free-standing vector arithmetic. A table lookup outside the tabulated
//! points is an evaluation error, not a silent default.
//!
//! The text format is line-oriented with `[section]` headers; `#` starts
//! a comment. Structures may also carry `[bounds]` and `[moduli]`
//! sections with raw signature data (per-symbol bound and modulus lines)
//! that the signature layer consumes for conformance checking.

use crate::evaluator::radical::RadicalValue;
use crate::rational::{format_rational, parse_rational, pow_nat, Rational};
use crate::{Error, Result};
use num::traits::Signed;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    Lp(u32),
    LInf,
}

impl Norm {
    pub fn label(&self) -> String {
        match self {
            Norm::Lp(p) => format!("lp:{p}"),
            Norm::LInf => "linf".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum FnInterp {
    /// d×(arity·d) matrix applied to the concatenated arguments, plus offset.
    Affine { arity: usize, matrix: Vec<Vec<Rational>>, offset: Vec<Rational> },
    /// Finite lookup table keyed by the concatenated arguments.
    Table { arity: usize, map: BTreeMap<Vec<Rational>, Vec<Rational>> },
}

impl FnInterp {
    pub fn arity(&self) -> usize {
        match self {
            FnInterp::Affine { arity, .. } | FnInterp::Table { arity, .. } => *arity,
        }
    }
}

#[derive(Debug, Clone)]
pub enum RelInterp {
    /// R(x) = ‖x‖^exponent, arity 1. The exponent must make the value
    /// rational: a multiple of p under ℓ_p, any positive integer under ℓ_∞.
    NormPower { exponent: u32 },
    /// Finite lookup table keyed by the concatenated arguments.
    Table { arity: usize, map: BTreeMap<Vec<Rational>, Rational> },
}

impl RelInterp {
    pub fn arity(&self) -> usize {
        match self {
            RelInterp::NormPower { .. } => 1,
            RelInterp::Table { arity, .. } => *arity,
        }
    }
}

/// One raw `[bounds]` line: a tabulated entry or the linear default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundLine {
    Entry { n: u32, k: Rational },
    Linear { a: Rational, b: Rational },
}

/// One raw `[moduli]` line: a tabulated entry or the linear default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModulusLine {
    Entry { n: u32, eps: Rational, delta: Rational },
    Linear { c: Rational },
}

/// Raw signature data carried inside a structure file.
#[derive(Debug, Clone, Default)]
pub struct RawTables {
    pub bounds: Vec<(String, BoundLine)>,
    pub moduli: Vec<(String, ModulusLine)>,
}

#[derive(Debug, Clone)]
pub struct FiniteNormedStructure {
    dim: usize,
    norm: Norm,
    carrier: Vec<Vec<Rational>>,
    carrier_norms: Vec<RadicalValue>,
    consts: BTreeMap<String, Vec<Rational>>,
    fns: BTreeMap<String, FnInterp>,
    rels: BTreeMap<String, RelInterp>,
    pub tables: RawTables,
}

fn zero_vec(dim: usize) -> Vec<Rational> {
    vec![Rational::from_integer(0.into()); dim]
}

fn neg_vec(v: &[Rational]) -> Vec<Rational> {
    v.iter().map(|x| -x.clone()).collect()
}

impl FiniteNormedStructure {
    pub fn new(dim: usize, norm: Norm, carrier: Vec<Vec<Rational>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Structure("dimension must be at least 1".into()));
        }
        if let Norm::Lp(p) = norm {
            if p == 0 {
                return Err(Error::Structure("lp norm exponent must be at least 1".into()));
            }
        }
        for v in &carrier {
            if v.len() != dim {
                return Err(Error::Structure(format!(
                    "carrier vector has {} components, expected {dim}",
                    v.len()
                )));
            }
        }
        if !carrier.iter().any(|v| v == &zero_vec(dim)) {
            return Err(Error::Structure("carrier must contain the zero vector".into()));
        }
        for v in &carrier {
            if !carrier.iter().any(|w| *w == neg_vec(v)) {
                return Err(Error::Structure(format!(
                    "carrier is not closed under negation: missing -({})",
                    fmt_vec(v)
                )));
            }
        }
        for (i, v) in carrier.iter().enumerate() {
            if carrier[..i].contains(v) {
                return Err(Error::Structure(format!("duplicate carrier vector {}", fmt_vec(v))));
            }
        }
        let carrier_norms = carrier
            .iter()
            .map(|v| norm_of_vec(norm, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteNormedStructure {
            dim,
            norm,
            carrier,
            carrier_norms,
            consts: BTreeMap::new(),
            fns: BTreeMap::new(),
            rels: BTreeMap::new(),
            tables: RawTables::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn carrier(&self) -> &[Vec<Rational>] {
        &self.carrier
    }

    pub fn carrier_norm(&self, i: usize) -> &RadicalValue {
        &self.carrier_norms[i]
    }

    pub fn consts(&self) -> &BTreeMap<String, Vec<Rational>> {
        &self.consts
    }

    pub fn fns(&self) -> &BTreeMap<String, FnInterp> {
        &self.fns
    }

    pub fn rels(&self) -> &BTreeMap<String, RelInterp> {
        &self.rels
    }

    pub fn add_const(&mut self, name: &str, value: Vec<Rational>) -> Result<()> {
        if value.len() != self.dim {
            return Err(Error::Structure(format!(
                "constant `{name}` has {} components, expected {}",
                value.len(),
                self.dim
            )));
        }
        self.check_fresh_fn_name(name)?;
        self.consts.insert(name.to_string(), value);
        Ok(())
    }

    pub fn add_affine_fn(
        &mut self,
        name: &str,
        matrix: Vec<Vec<Rational>>,
        offset: Vec<Rational>,
    ) -> Result<()> {
        if matrix.len() != self.dim || offset.len() != self.dim {
            return Err(Error::Structure(format!(
                "affine interpretation of `{name}` must have {} rows and offset entries",
                self.dim
            )));
        }
        let cols = matrix[0].len();
        if cols == 0 || cols % self.dim != 0 {
            return Err(Error::Structure(format!(
                "affine matrix of `{name}` must have a positive multiple of {} columns",
                self.dim
            )));
        }
        if matrix.iter().any(|row| row.len() != cols) {
            return Err(Error::Structure(format!("ragged affine matrix for `{name}`")));
        }
        self.check_fresh_fn_name(name)?;
        let arity = cols / self.dim;
        self.fns.insert(name.to_string(), FnInterp::Affine { arity, matrix, offset });
        Ok(())
    }

    pub fn add_table_fn(
        &mut self,
        name: &str,
        arity: usize,
        entries: Vec<(Vec<Rational>, Vec<Rational>)>,
    ) -> Result<()> {
        if arity == 0 {
            return Err(Error::Structure(format!(
                "table function `{name}` must have positive arity; use a constant"
            )));
        }
        self.check_fresh_fn_name(name)?;
        let mut map = BTreeMap::new();
        for (key, value) in entries {
            if key.len() != arity * self.dim {
                return Err(Error::Structure(format!(
                    "table entry for `{name}` has {} input components, expected {}",
                    key.len(),
                    arity * self.dim
                )));
            }
            if value.len() != self.dim {
                return Err(Error::Structure(format!(
                    "table entry for `{name}` has {} output components, expected {}",
                    value.len(),
                    self.dim
                )));
            }
            if map.insert(key, value).is_some() {
                return Err(Error::Structure(format!("duplicate table entry for `{name}`")));
            }
        }
        self.fns.insert(name.to_string(), FnInterp::Table { arity, map });
        Ok(())
    }

    pub fn add_normpower_rel(&mut self, name: &str, exponent: u32) -> Result<()> {
        if exponent == 0 {
            return Err(Error::Structure(format!(
                "normpower exponent of `{name}` must be at least 1"
            )));
        }
        if let Norm::Lp(p) = self.norm {
            if exponent % p != 0 {
                return Err(Error::Structure(format!(
                    "normpower exponent {exponent} of `{name}` is not a multiple of the norm exponent {p}, so values would be irrational"
                )));
            }
        }
        if self.rels.contains_key(name) {
            return Err(Error::Structure(format!("duplicate relation symbol `{name}`")));
        }
        self.rels.insert(name.to_string(), RelInterp::NormPower { exponent });
        Ok(())
    }

    pub fn add_table_rel(
        &mut self,
        name: &str,
        arity: usize,
        entries: Vec<(Vec<Rational>, Rational)>,
    ) -> Result<()> {
        if arity == 0 {
            return Err(Error::Structure(format!(
                "table relation `{name}` must have positive arity"
            )));
        }
        if self.rels.contains_key(name) {
            return Err(Error::Structure(format!("duplicate relation symbol `{name}`")));
        }
        let mut map = BTreeMap::new();
        for (key, value) in entries {
            if key.len() != arity * self.dim {
                return Err(Error::Structure(format!(
                    "table entry for `{name}` has {} input components, expected {}",
                    key.len(),
                    arity * self.dim
                )));
            }
            if map.insert(key, value).is_some() {
                return Err(Error::Structure(format!("duplicate table entry for `{name}`")));
            }
        }
        self.rels.insert(name.to_string(), RelInterp::Table { arity, map });
        Ok(())
    }

    fn check_fresh_fn_name(&self, name: &str) -> Result<()> {
        if self.consts.contains_key(name) || self.fns.contains_key(name) {
            return Err(Error::Structure(format!("duplicate function symbol `{name}`")));
        }
        Ok(())
    }

    /// Exact norm of an arbitrary rational vector of the right dimension.
    pub fn norm_of(&self, v: &[Rational]) -> Result<RadicalValue> {
        if v.len() != self.dim {
            return Err(Error::Eval(format!(
                "vector has {} components, expected {}",
                v.len(),
                self.dim
            )));
        }
        norm_of_vec(self.norm, v)
    }

    /// Arity of a function symbol (constants count as arity 0).
    pub fn fn_arity(&self, name: &str) -> Option<usize> {
        if self.consts.contains_key(name) {
            return Some(0);
        }
        self.fns.get(name).map(|f| f.arity())
    }

    pub fn rel_arity(&self, name: &str) -> Option<usize> {
        self.rels.get(name).map(|r| r.arity())
    }

    pub fn const_value(&self, name: &str) -> Option<&Vec<Rational>> {
        self.consts.get(name)
    }

    /// Apply a function symbol to concrete argument vectors.
    pub fn apply_fn(&self, name: &str, args: &[Vec<Rational>]) -> Result<Vec<Rational>> {
        if args.is_empty() {
            if let Some(v) = self.consts.get(name) {
                return Ok(v.clone());
            }
        }
        let interp = self
            .fns
            .get(name)
            .ok_or_else(|| Error::UnknownSymbol(format!("function `{name}`")))?;
        if args.len() != interp.arity() {
            return Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected: interp.arity(),
                got: args.len(),
            });
        }
        for a in args {
            if a.len() != self.dim {
                return Err(Error::Eval(format!(
                    "argument to `{name}` has {} components, expected {}",
                    a.len(),
                    self.dim
                )));
            }
        }
        match interp {
            FnInterp::Affine { matrix, offset, .. } => {
                let flat: Vec<&Rational> = args.iter().flatten().collect();
                let mut out = Vec::with_capacity(self.dim);
                for (row, off) in matrix.iter().zip(offset) {
                    let mut acc = off.clone();
                    for (m, x) in row.iter().zip(&flat) {
                        acc += m * *x;
                    }
                    out.push(acc);
                }
                Ok(out)
            }
            FnInterp::Table { map, .. } => {
                let key: Vec<Rational> = args.iter().flatten().cloned().collect();
                map.get(&key).cloned().ok_or_else(|| {
                    Error::Eval(format!(
                        "table of `{name}` has no entry at ({})",
                        fmt_vec(&key)
                    ))
                })
            }
        }
    }

    /// Exact rational value of a relation symbol at concrete arguments.
    pub fn rel_value(&self, name: &str, args: &[Vec<Rational>]) -> Result<Rational> {
        let interp = self
            .rels
            .get(name)
            .ok_or_else(|| Error::UnknownSymbol(format!("relation `{name}`")))?;
        if args.len() != interp.arity() {
            return Err(Error::ArityMismatch {
                symbol: name.to_string(),
                expected: interp.arity(),
                got: args.len(),
            });
        }
        for a in args {
            if a.len() != self.dim {
                return Err(Error::Eval(format!(
                    "argument to `{name}` has {} components, expected {}",
                    a.len(),
                    self.dim
                )));
            }
        }
        match interp {
            RelInterp::NormPower { exponent } => match self.norm {
                Norm::Lp(p) => {
                    let sum: Rational = args[0]
                        .iter()
                        .map(|x| pow_nat(&x.abs(), p))
                        .sum();
                    Ok(pow_nat(&sum, exponent / p))
                }
                Norm::LInf => {
                    let m = max_abs(&args[0]);
                    Ok(pow_nat(&m, *exponent))
                }
            },
            RelInterp::Table { map, .. } => {
                let key: Vec<Rational> = args.iter().flatten().cloned().collect();
                map.get(&key).cloned().ok_or_else(|| {
                    Error::Eval(format!(
                        "table of `{name}` has no entry at ({})",
                        fmt_vec(&key)
                    ))
                })
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_structure(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_structure(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "[space] dim={} norm={}", self.dim, self.norm.label()).unwrap();
        writeln!(out, "[carrier]").unwrap();
        for v in &self.carrier {
            writeln!(out, "{}", fmt_vec(v)).unwrap();
        }
        for (name, v) in &self.consts {
            writeln!(out, "[const {name}]").unwrap();
            writeln!(out, "{}", fmt_vec(v)).unwrap();
        }
        for (name, interp) in &self.fns {
            match interp {
                FnInterp::Affine { matrix, offset, .. } => {
                    writeln!(out, "[fn {name} affine]").unwrap();
                    for row in matrix {
                        writeln!(out, "{}", fmt_vec(row)).unwrap();
                    }
                    writeln!(out, "{}", fmt_vec(offset)).unwrap();
                }
                FnInterp::Table { map, .. } => {
                    writeln!(out, "[fn {name} table]").unwrap();
                    for (key, value) in map {
                        writeln!(out, "{} -> {}", fmt_vec(key), fmt_vec(value)).unwrap();
                    }
                }
            }
        }
        for (name, interp) in &self.rels {
            match interp {
                RelInterp::NormPower { exponent } => {
                    writeln!(out, "[rel {name} normpower]").unwrap();
                    writeln!(out, "exponent={exponent}").unwrap();
                }
                RelInterp::Table { map, .. } => {
                    writeln!(out, "[rel {name} table]").unwrap();
                    for (key, value) in map {
                        writeln!(out, "{} -> {}", fmt_vec(key), format_rational(value)).unwrap();
                    }
                }
            }
        }
        if !self.tables.bounds.is_empty() {
            writeln!(out, "[bounds]").unwrap();
            for (name, line) in &self.tables.bounds {
                match line {
                    BoundLine::Entry { n, k } => {
                        writeln!(out, "{name} {n} {}", format_rational(k)).unwrap()
                    }
                    BoundLine::Linear { a, b } => writeln!(
                        out,
                        "{name} linear {} {}",
                        format_rational(a),
                        format_rational(b)
                    )
                    .unwrap(),
                }
            }
        }
        if !self.tables.moduli.is_empty() {
            writeln!(out, "[moduli]").unwrap();
            for (name, line) in &self.tables.moduli {
                match line {
                    ModulusLine::Entry { n, eps, delta } => writeln!(
                        out,
                        "{name} {n} {} {}",
                        format_rational(eps),
                        format_rational(delta)
                    )
                    .unwrap(),
                    ModulusLine::Linear { c } => {
                        writeln!(out, "{name} linear {}", format_rational(c)).unwrap()
                    }
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn max_abs(v: &[Rational]) -> Rational {
    let mut m = Rational::from_integer(0.into());
    for x in v {
        let a = x.abs();
        if a > m {
            m = a;
        }
    }
    m
}

fn norm_of_vec(norm: Norm, v: &[Rational]) -> Result<RadicalValue> {
    match norm {
        Norm::Lp(p) => {
            let sum: Rational = v.iter().map(|x| pow_nat(&x.abs(), p)).sum();
            RadicalValue::new(sum, p)
        }
        Norm::LInf => RadicalValue::new(max_abs(v), 1),
    }
}

fn fmt_vec(v: &[Rational]) -> String {
    v.iter().map(format_rational).collect::<Vec<_>>().join(" ")
}

fn parse_vec(line: &str, lineno: usize) -> Result<Vec<Rational>> {
    line.split_whitespace()
        .map(|tok| {
            parse_rational(tok).map_err(|_| {
                Error::Structure(format!("line {lineno}: `{tok}` is not a rational"))
            })
        })
        .collect()
}

fn parse_structure(text: &str) -> Result<FiniteNormedStructure> {
    enum Section {
        None,
        Carrier,
        Const(String),
        AffineFn(String),
        TableFn(String),
        NormPowerRel(String),
        TableRel(String),
        Bounds,
        Moduli,
    }

    let mut dim: Option<usize> = None;
    let mut norm: Option<Norm> = None;
    let mut carrier: Vec<Vec<Rational>> = Vec::new();
    let mut consts: Vec<(String, Vec<Rational>)> = Vec::new();
    let mut affine_fns: Vec<(String, Vec<Vec<Rational>>)> = Vec::new();
    let mut table_fns: Vec<(String, Vec<(Vec<Rational>, Vec<Rational>)>)> = Vec::new();
    let mut normpower_rels: Vec<(String, u32)> = Vec::new();
    let mut table_rels: Vec<(String, Vec<(Vec<Rational>, Rational)>)> = Vec::new();
    let mut tables = RawTables::default();
    let mut section = Section::None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            let header = line
                .strip_prefix('[')
                .and_then(|s| {
                    // `[space] dim=.. norm=..` keeps its payload after the bracket.
                    s.find(']').map(|i| (&s[..i], s[i + 1..].trim()))
                })
                .ok_or_else(|| Error::Structure(format!("line {lineno}: malformed section header")))?;
            let (name, payload) = header;
            let words: Vec<&str> = name.split_whitespace().collect();
            section = match words.as_slice() {
                ["space"] => {
                    let mut d = None;
                    let mut nm = None;
                    for field in payload.split_whitespace() {
                        if let Some(v) = field.strip_prefix("dim=") {
                            d = Some(v.parse::<usize>().map_err(|_| {
                                Error::Structure(format!("line {lineno}: bad dim `{v}`"))
                            })?);
                        } else if let Some(v) = field.strip_prefix("norm=") {
                            nm = Some(parse_norm(v, lineno)?);
                        } else {
                            return Err(Error::Structure(format!(
                                "line {lineno}: unknown space field `{field}`"
                            )));
                        }
                    }
                    dim = Some(d.ok_or_else(|| {
                        Error::Structure(format!("line {lineno}: [space] is missing dim="))
                    })?);
                    norm = Some(nm.ok_or_else(|| {
                        Error::Structure(format!("line {lineno}: [space] is missing norm="))
                    })?);
                    Section::None
                }
                ["carrier"] => Section::Carrier,
                ["const", sym] => Section::Const(sym.to_string()),
                ["fn", sym, "affine"] => {
                    affine_fns.push((sym.to_string(), Vec::new()));
                    Section::AffineFn(sym.to_string())
                }
                ["fn", sym, "table"] => {
                    table_fns.push((sym.to_string(), Vec::new()));
                    Section::TableFn(sym.to_string())
                }
                ["rel", sym, "normpower"] => Section::NormPowerRel(sym.to_string()),
                ["rel", sym, "table"] => {
                    table_rels.push((sym.to_string(), Vec::new()));
                    Section::TableRel(sym.to_string())
                }
                ["bounds"] => Section::Bounds,
                ["moduli"] => Section::Moduli,
                _ => {
                    return Err(Error::Structure(format!(
                        "line {lineno}: unknown section `[{name}]`"
                    )))
                }
            };
            continue;
        }
        match &section {
            Section::None => {
                return Err(Error::Structure(format!(
                    "line {lineno}: content outside any section"
                )))
            }
            Section::Carrier => carrier.push(parse_vec(line, lineno)?),
            Section::Const(sym) => consts.push((sym.clone(), parse_vec(line, lineno)?)),
            Section::AffineFn(sym) => {
                let rows = &mut affine_fns
                    .iter_mut()
                    .rev()
                    .find(|(s, _)| s == sym)
                    .expect("section just pushed")
                    .1;
                rows.push(parse_vec(line, lineno)?);
            }
            Section::TableFn(sym) => {
                let (lhs, rhs) = split_arrow(line, lineno)?;
                let entry = (parse_vec(lhs, lineno)?, parse_vec(rhs, lineno)?);
                table_fns
                    .iter_mut()
                    .rev()
                    .find(|(s, _)| s == sym)
                    .expect("section just pushed")
                    .1
                    .push(entry);
            }
            Section::NormPowerRel(sym) => {
                let v = line.strip_prefix("exponent=").ok_or_else(|| {
                    Error::Structure(format!("line {lineno}: expected exponent=<k>"))
                })?;
                let k = v.parse::<u32>().map_err(|_| {
                    Error::Structure(format!("line {lineno}: bad exponent `{v}`"))
                })?;
                normpower_rels.push((sym.clone(), k));
            }
            Section::TableRel(sym) => {
                let (lhs, rhs) = split_arrow(line, lineno)?;
                let value = parse_rational(rhs.trim()).map_err(|_| {
                    Error::Structure(format!("line {lineno}: `{rhs}` is not a rational"))
                })?;
                table_rels
                    .iter_mut()
                    .rev()
                    .find(|(s, _)| s == sym)
                    .expect("section just pushed")
                    .1
                    .push((parse_vec(lhs, lineno)?, value));
            }
            Section::Bounds => tables.bounds.push(parse_bound_line(line, lineno)?),
            Section::Moduli => tables.moduli.push(parse_modulus_line(line, lineno)?),
        }
    }

    let dim = dim.ok_or_else(|| Error::Structure("missing [space] section".into()))?;
    let norm = norm.ok_or_else(|| Error::Structure("missing [space] section".into()))?;
    let mut st = FiniteNormedStructure::new(dim, norm, carrier)?;
    for (name, v) in consts {
        st.add_const(&name, v)?;
    }
    for (name, mut rows) in affine_fns {
        if rows.len() != dim + 1 {
            return Err(Error::Structure(format!(
                "affine section of `{name}` needs {dim} matrix rows plus an offset row"
            )));
        }
        let offset = rows.pop().expect("len checked");
        st.add_affine_fn(&name, rows, offset)?;
    }
    for (name, entries) in table_fns {
        let arity = table_arity(&name, entries.first().map(|(k, _)| k.len()), dim)?;
        st.add_table_fn(&name, arity, entries)?;
    }
    for (name, k) in normpower_rels {
        st.add_normpower_rel(&name, k)?;
    }
    for (name, entries) in table_rels {
        let arity = table_arity(&name, entries.first().map(|(k, _)| k.len()), dim)?;
        st.add_table_rel(&name, arity, entries)?;
    }
    st.tables = tables;
    Ok(st)
}

/// Parse one `[bounds]` line: `<sym> <N> <K>` or `<sym> linear <a> <b>`.
pub fn parse_bound_line(line: &str, lineno: usize) -> Result<(String, BoundLine)> {
    let words: Vec<&str> = line.split_whitespace().collect();
    match words.as_slice() {
        [sym, "linear", a, b] => Ok((
            sym.to_string(),
            BoundLine::Linear {
                a: parse_rational(a).map_err(|_| bad_rat(lineno, a))?,
                b: parse_rational(b).map_err(|_| bad_rat(lineno, b))?,
            },
        )),
        [sym, n, k] => Ok((
            sym.to_string(),
            BoundLine::Entry {
                n: n
                    .parse()
                    .map_err(|_| Error::Structure(format!("line {lineno}: bad level `{n}`")))?,
                k: parse_rational(k).map_err(|_| bad_rat(lineno, k))?,
            },
        )),
        _ => Err(Error::Structure(format!(
            "line {lineno}: expected `<sym> <N> <K>` or `<sym> linear <a> <b>`"
        ))),
    }
}

/// Parse one `[moduli]` line: `<sym> <N> <eps> <delta>` or `<sym> linear <c>`.
pub fn parse_modulus_line(line: &str, lineno: usize) -> Result<(String, ModulusLine)> {
    let words: Vec<&str> = line.split_whitespace().collect();
    match words.as_slice() {
        [sym, "linear", c] => Ok((
            sym.to_string(),
            ModulusLine::Linear { c: parse_rational(c).map_err(|_| bad_rat(lineno, c))? },
        )),
        [sym, n, eps, delta] => Ok((
            sym.to_string(),
            ModulusLine::Entry {
                n: n
                    .parse()
                    .map_err(|_| Error::Structure(format!("line {lineno}: bad level `{n}`")))?,
                eps: parse_rational(eps).map_err(|_| bad_rat(lineno, eps))?,
                delta: parse_rational(delta).map_err(|_| bad_rat(lineno, delta))?,
            },
        )),
        _ => Err(Error::Structure(format!(
            "line {lineno}: expected `<sym> <N> <eps> <delta>` or `<sym> linear <c>`"
        ))),
    }
}

fn table_arity(name: &str, first_key_len: Option<usize>, dim: usize) -> Result<usize> {
    let len = first_key_len
        .ok_or_else(|| Error::Structure(format!("table of `{name}` has no entries")))?;
    if len == 0 || len % dim != 0 {
        return Err(Error::Structure(format!(
            "table entry for `{name}` has {len} input components, not a positive multiple of {dim}"
        )));
    }
    Ok(len / dim)
}

fn bad_rat(lineno: usize, tok: &str) -> Error {
    Error::Structure(format!("line {lineno}: `{tok}` is not a rational"))
}

fn split_arrow(line: &str, lineno: usize) -> Result<(&str, &str)> {
    line.split_once("->")
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| Error::Structure(format!("line {lineno}: expected `... -> ...`")))
}

fn parse_norm(v: &str, lineno: usize) -> Result<Norm> {
    if v == "linf" {
        return Ok(Norm::LInf);
    }
    if let Some(p) = v.strip_prefix("lp:") {
        let p: u32 = p
            .parse()
            .map_err(|_| Error::Structure(format!("line {lineno}: bad norm exponent `{p}`")))?;
        if p == 0 {
            return Err(Error::Structure(format!(
                "line {lineno}: lp norm exponent must be at least 1"
            )));
        }
        return Ok(Norm::Lp(p));
    }
    Err(Error::Structure(format!(
        "line {lineno}: norm must be `lp:<p>` or `linf`, got `{v}`"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};
    use std::cmp::Ordering;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat_int(x)).collect()
    }

    fn small() -> FiniteNormedStructure {
        FiniteNormedStructure::new(
            2,
            Norm::Lp(2),
            vec![v(&[0, 0]), v(&[1, 0]), v(&[-1, 0]), v(&[1, 1]), v(&[-1, -1])],
        )
        .unwrap()
    }

    #[test]
    fn carrier_invariants_are_enforced() {
        assert!(FiniteNormedStructure::new(2, Norm::Lp(2), vec![v(&[1, 0]), v(&[-1, 0])]).is_err());
        assert!(FiniteNormedStructure::new(2, Norm::Lp(2), vec![v(&[0, 0]), v(&[1, 0])]).is_err());
        assert!(FiniteNormedStructure::new(
            2,
            Norm::Lp(2),
            vec![v(&[0, 0]), v(&[0, 0])]
        )
        .is_err());
        assert!(FiniteNormedStructure::new(2, Norm::Lp(2), vec![v(&[0, 0, 0])]).is_err());
    }

    #[test]
    fn norms_are_exact_radicals() {
        let st = small();
        // ‖(1,1)‖_2 = 2^(1/2).
        let n = st.norm_of(&v(&[1, 1])).unwrap();
        assert_eq!(n.cmp_rational(&rat(3, 2)), Ordering::Less);
        assert_eq!(n.cmp_rational(&rat_int(1)), Ordering::Greater);
        let st =
            FiniteNormedStructure::new(2, Norm::LInf, vec![v(&[0, 0]), v(&[2, 1]), v(&[-2, -1])])
                .unwrap();
        let n = st.norm_of(&v(&[2, 1])).unwrap();
        assert_eq!(n.cmp_rational(&rat_int(2)), Ordering::Equal);
    }

    #[test]
    fn affine_functions_apply() {
        let mut st = small();
        // f(x) = -x + (1,0).
        st.add_affine_fn(
            "f",
            vec![v(&[-1, 0]), v(&[0, -1])],
            v(&[1, 0]),
        )
        .unwrap();
        assert_eq!(st.apply_fn("f", &[v(&[1, 1])]).unwrap(), v(&[0, -1]));
        assert_eq!(st.fn_arity("f"), Some(1));
        // g(x, y) = x + y as a 2x4 matrix.
        st.add_affine_fn(
            "g",
            vec![v(&[1, 0, 1, 0]), v(&[0, 1, 0, 1])],
            v(&[0, 0]),
        )
        .unwrap();
        assert_eq!(st.apply_fn("g", &[v(&[1, 0]), v(&[1, 1])]).unwrap(), v(&[2, 1]));
        assert_eq!(st.fn_arity("g"), Some(2));
    }

    #[test]
    fn table_lookups_error_off_table() {
        let mut st = small();
        st.add_table_fn("T", 1, vec![(v(&[0, 0]), v(&[0, 0])), (v(&[1, 0]), v(&[1, 1]))])
            .unwrap();
        assert_eq!(st.apply_fn("T", &[v(&[1, 0])]).unwrap(), v(&[1, 1]));
        assert!(st.apply_fn("T", &[v(&[5, 5])]).is_err());
    }

    #[test]
    fn normpower_relations_are_rational() {
        let mut st = small();
        st.add_normpower_rel("f", 2).unwrap();
        assert_eq!(st.rel_value("f", &[v(&[1, 1])]).unwrap(), rat_int(2));
        assert!(st.add_normpower_rel("g", 3).is_err());
        let mut st =
            FiniteNormedStructure::new(1, Norm::LInf, vec![v(&[0]), v(&[2]), v(&[-2])]).unwrap();
        st.add_normpower_rel("h", 3).unwrap();
        assert_eq!(st.rel_value("h", &[v(&[-2])]).unwrap(), rat_int(8));
    }

    #[test]
    fn constants_are_zero_ary_functions() {
        let mut st = small();
        st.add_const("c", v(&[1, 0])).unwrap();
        assert_eq!(st.apply_fn("c", &[]).unwrap(), v(&[1, 0]));
        assert_eq!(st.fn_arity("c"), Some(0));
        assert!(st.add_table_fn("c", 1, vec![(v(&[0, 0]), v(&[0, 0]))]).is_err());
    }

    #[test]
    fn text_round_trip_is_stable() {
        let mut st = small();
        st.add_const("c", v(&[1, 0])).unwrap();
        st.add_affine_fn("f", vec![v(&[-1, 0]), v(&[0, -1])], v(&[0, 0])).unwrap();
        st.add_table_fn("T", 1, vec![(v(&[1, 0]), v(&[1, 1]))]).unwrap();
        st.add_normpower_rel("R", 2).unwrap();
        st.add_table_rel("S", 2, vec![(v(&[1, 0, 1, 1]), rat(1, 2))]).unwrap();
        st.tables.bounds.push(("f".into(), BoundLine::Entry { n: 1, k: rat_int(2) }));
        st.tables.bounds.push(("f".into(), BoundLine::Linear { a: rat_int(1), b: rat_int(1) }));
        st.tables.moduli.push((
            "f".into(),
            ModulusLine::Entry { n: 1, eps: rat(1, 2), delta: rat(1, 4) },
        ));
        st.tables.moduli.push(("f".into(), ModulusLine::Linear { c: rat(1, 2) }));

        let text = st.to_text();
        let back = FiniteNormedStructure::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.dim(), 2);
        assert_eq!(back.rel_value("S", &[v(&[1, 0]), v(&[1, 1])]).unwrap(), rat(1, 2));
        assert_eq!(back.tables.bounds.len(), 2);
        assert_eq!(back.tables.moduli.len(), 2);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "[space] dim=2 norm=lp:2\n[carrier]\n0 0\n1 x\n";
        let err = FiniteNormedStructure::parse(text).unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# a structure\n[space] dim=1 norm=lp:1\n\n[carrier]\n0 # origin\n1\n-1\n";
        let st = FiniteNormedStructure::parse(text).unwrap();
        assert_eq!(st.carrier().len(), 3);
    }
}
