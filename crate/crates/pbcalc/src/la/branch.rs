//! Branch trees: the index objects h that select one "way of unfolding"
//! an infinitary formula into approximable finitary stages.
//!
//! A branch mirrors the formula it indexes: embedded finitary formulas
//! need no choices (`Empty`), finite conjunctions carry one branch per
//! part (`Tuple` with exact arity), countable conjunctions carry a finite
//! prefix of instance branches plus a default template for the rest
//! (`Tuple` with `rest`), negations carry the pair of functions
//! (f1, f2) — step s of the negation visits sub-branch f1(s) at
//! approximation level f2(s) — encoded as a finite prefix plus a tail
//! rule, and sequence quantifiers wrap the body branch (`Ex`).
//!
//! Negation branches are only sound when (f1, f2) eventually visits every
//! (branch, level) class; that property is undecidable for arbitrary
//! functions, so branches record how they were built. The two
//! library-built certificates are `ConstantOnSingleton` (a constant
//! function, sound exactly when the inner formula has a single branch)
//! and `DiagonalEnumeration` (the canonical diagonal over the inner
//! family). Branches read from files are `Trusted`: the caller asserts
//! the property and every downstream report carries the flag.
//!
//! The file grammar is shape-only (certificates are not serialized):
//!
//! ```text
//! branch  := (empty)
//!          | (tuple branch*)
//!          | (tuple branch* (rest branch))
//!          | (negb (pairs (branch level)*) negtail)
//!          | (ex branch)
//! negtail := (const branch level) | (diag) | (exhausted)
//! ```

use crate::sexpr::{read_one, SExpr};
use crate::syntax::ast::LAFormula;
use crate::{Error, Result};
use std::fmt::Write as _;

/// How the negation branch continues beyond its explicit prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NegTail {
    /// Visit the same (branch, level) pair at every further step.
    Constant { branch: Box<Branch>, level: u32 },
    /// Follow the canonical diagonal enumeration of the inner formula's
    /// branch family; the pairs are computed from the formula on demand.
    Diagonal,
    /// No further steps: using the branch beyond the prefix is an error.
    Exhausted,
}

/// Provenance of a negation branch's weak-surjectivity claim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Constant (f1, f2) = (the unique inner branch, n); certified when
    /// the inner branch family is a singleton.
    ConstantOnSingleton(u32),
    /// The canonical diagonal over the inner family.
    DiagonalEnumeration,
    /// Asserted by the caller, not checked. Propagated into reports.
    Trusted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Branch {
    /// For embedded finitary formulas: nothing to choose.
    Empty,
    /// For conjunctions: one branch per part. Finite conjunctions use
    /// exactly `components` (no `rest`); countable conjunctions use
    /// `components` as the instance prefix and `rest` as the template for
    /// every later instance.
    Tuple {
        components: Vec<Branch>,
        rest: Option<Box<Branch>>,
    },
    /// For negations: step s visits `prefix[s-1]` while it lasts, then
    /// follows `tail`.
    Neg {
        prefix: Vec<(Branch, u32)>,
        tail: NegTail,
        certificate: Certificate,
    },
    /// For sequence quantifiers: the branch of the body.
    Ex(Box<Branch>),
}

impl Branch {
    /// True when any negation node in the tree carries an uncertified
    /// (caller-asserted) weak-surjectivity claim.
    pub fn has_trusted(&self) -> bool {
        match self {
            Branch::Empty => false,
            Branch::Tuple { components, rest } => {
                components.iter().any(Branch::has_trusted)
                    || rest.as_deref().is_some_and(Branch::has_trusted)
            }
            Branch::Neg { prefix, tail, certificate } => {
                matches!(certificate, Certificate::Trusted)
                    || prefix.iter().any(|(b, _)| b.has_trusted())
                    || match tail {
                        NegTail::Constant { branch, .. } => branch.has_trusted(),
                        NegTail::Diagonal | NegTail::Exhausted => false,
                    }
            }
            Branch::Ex(inner) => inner.has_trusted(),
        }
    }
}

/// Check that a branch has the shape the formula demands, recursively.
/// Also enforces the certificate side condition: `ConstantOnSingleton`
/// requires the negated formula's branch family to be a singleton, which
/// holds exactly when that formula has no negation outside embedded
/// finitary parts.
pub fn validate_pairing(f: &LAFormula, h: &Branch) -> Result<()> {
    match (f, h) {
        (LAFormula::Embed(_), Branch::Empty) => Ok(()),
        (LAFormula::AndN(parts), Branch::Tuple { components, rest }) => {
            if rest.is_some() {
                return Err(Error::BranchShape(
                    "a finite conjunction branch cannot have a rest template".into(),
                ));
            }
            if components.len() != parts.len() {
                return Err(Error::BranchShape(format!(
                    "conjunction has {} parts but the branch has {} components",
                    parts.len(),
                    components.len()
                )));
            }
            parts
                .iter()
                .zip(components)
                .try_for_each(|(p, c)| validate_pairing(p, c))
        }
        (LAFormula::AndW { body, .. }, Branch::Tuple { components, rest }) => {
            // The formula's shape is invariant under index instantiation,
            // so every instance branch validates against the template body.
            components
                .iter()
                .try_for_each(|c| validate_pairing(body, c))?;
            if let Some(r) = rest {
                validate_pairing(body, r)?;
            }
            Ok(())
        }
        (LAFormula::Not(inner), Branch::Neg { prefix, tail, certificate }) => {
            if matches!(certificate, Certificate::ConstantOnSingleton(_)) && !inner.is_not_free() {
                return Err(Error::BranchShape(
                    "a constant negation branch is only certified over a formula with a single branch (no inner negation)"
                        .into(),
                ));
            }
            for (b, level) in prefix {
                if *level < 1 {
                    return Err(Error::BranchShape(
                        "negation branch levels must be at least 1".into(),
                    ));
                }
                validate_pairing(inner, b)?;
            }
            match tail {
                NegTail::Constant { branch, level } => {
                    if *level < 1 {
                        return Err(Error::BranchShape(
                            "negation branch levels must be at least 1".into(),
                        ));
                    }
                    validate_pairing(inner, branch)
                }
                NegTail::Diagonal | NegTail::Exhausted => Ok(()),
            }
        }
        (LAFormula::ExistsSeq { body, .. }, Branch::Ex(inner)) => validate_pairing(body, inner),
        (f, h) => Err(Error::BranchShape(format!(
            "branch `{}` does not match the formula variant {}",
            print_branch(h),
            match f {
                LAFormula::Embed(_) => "embedded finitary",
                LAFormula::AndN(_) => "finite conjunction",
                LAFormula::AndW { .. } => "countable conjunction",
                LAFormula::Not(_) => "negation",
                LAFormula::ExistsSeq { .. } => "sequence quantifier",
            }
        ))),
    }
}

/// Canonical single-line rendering (shape only; certificates are not
/// serialized and parse back as `Trusted`).
pub fn print_branch(b: &Branch) -> String {
    let mut out = String::new();
    write_branch(&mut out, b);
    out
}

fn write_branch(out: &mut String, b: &Branch) {
    match b {
        Branch::Empty => out.push_str("(empty)"),
        Branch::Tuple { components, rest } => {
            out.push_str("(tuple");
            for c in components {
                out.push(' ');
                write_branch(out, c);
            }
            if let Some(r) = rest {
                out.push_str(" (rest ");
                write_branch(out, r);
                out.push(')');
            }
            out.push(')');
        }
        Branch::Neg { prefix, tail, .. } => {
            out.push_str("(negb (pairs");
            for (b, level) in prefix {
                out.push_str(" (");
                write_branch(out, b);
                write!(out, " {level})").unwrap();
            }
            out.push(')');
            match tail {
                NegTail::Constant { branch, level } => {
                    out.push_str(" (const ");
                    write_branch(out, branch);
                    write!(out, " {level})").unwrap();
                }
                NegTail::Diagonal => out.push_str(" (diag)"),
                NegTail::Exhausted => out.push_str(" (exhausted)"),
            }
            out.push(')');
        }
        Branch::Ex(inner) => {
            out.push_str("(ex ");
            write_branch(out, inner);
            out.push(')');
        }
    }
}

/// Parse a branch from its s-expression text. Negation branches read this
/// way carry the `Trusted` certificate.
pub fn parse_branch(text: &str) -> Result<Branch> {
    let e = read_one(text)?;
    branch_from_sexpr(&e)
}

fn parse_level(e: &SExpr) -> Result<u32> {
    let s = e.atom("a branch level")?;
    let level: u32 = s
        .parse()
        .map_err(|_| Error::parse(e.pos().line, e.pos().col, format!("bad level `{s}`")))?;
    if level < 1 {
        return Err(Error::parse(
            e.pos().line,
            e.pos().col,
            "branch levels must be at least 1".to_string(),
        ));
    }
    Ok(level)
}

fn branch_from_sexpr(e: &SExpr) -> Result<Branch> {
    let (head, args, pos) = e.head()?;
    match head {
        "empty" => {
            if !args.is_empty() {
                return Err(Error::parse(pos.line, pos.col, "(empty) takes no arguments"));
            }
            Ok(Branch::Empty)
        }
        "tuple" => {
            let mut components = Vec::new();
            let mut rest = None;
            for (i, a) in args.iter().enumerate() {
                if let Ok(("rest", rest_args, rpos)) = a.head() {
                    if i + 1 != args.len() {
                        return Err(Error::parse(
                            rpos.line,
                            rpos.col,
                            "(rest ...) must come last in a tuple branch",
                        ));
                    }
                    if rest_args.len() != 1 {
                        return Err(Error::parse(
                            rpos.line,
                            rpos.col,
                            "(rest ...) takes exactly one branch",
                        ));
                    }
                    rest = Some(Box::new(branch_from_sexpr(&rest_args[0])?));
                } else {
                    components.push(branch_from_sexpr(a)?);
                }
            }
            Ok(Branch::Tuple { components, rest })
        }
        "negb" => {
            if args.len() != 2 {
                return Err(Error::parse(
                    pos.line,
                    pos.col,
                    "(negb ...) takes a (pairs ...) list and a tail",
                ));
            }
            let (phead, pargs, ppos) = args[0].head()?;
            if phead != "pairs" {
                return Err(Error::parse(
                    ppos.line,
                    ppos.col,
                    format!("expected (pairs ...), got `{phead}`"),
                ));
            }
            let mut prefix = Vec::new();
            for pe in pargs {
                let items = pe.list("a (branch level) pair")?;
                if items.len() != 2 {
                    return Err(Error::parse(
                        pe.pos().line,
                        pe.pos().col,
                        "each prefix pair is (branch level)",
                    ));
                }
                prefix.push((branch_from_sexpr(&items[0])?, parse_level(&items[1])?));
            }
            let (thead, targs, tpos) = args[1].head()?;
            let tail = match thead {
                "const" => {
                    if targs.len() != 2 {
                        return Err(Error::parse(
                            tpos.line,
                            tpos.col,
                            "(const branch level) takes two arguments",
                        ));
                    }
                    NegTail::Constant {
                        branch: Box::new(branch_from_sexpr(&targs[0])?),
                        level: parse_level(&targs[1])?,
                    }
                }
                "diag" => {
                    if !targs.is_empty() {
                        return Err(Error::parse(tpos.line, tpos.col, "(diag) takes no arguments"));
                    }
                    NegTail::Diagonal
                }
                "exhausted" => {
                    if !targs.is_empty() {
                        return Err(Error::parse(
                            tpos.line,
                            tpos.col,
                            "(exhausted) takes no arguments",
                        ));
                    }
                    NegTail::Exhausted
                }
                other => {
                    return Err(Error::parse(
                        tpos.line,
                        tpos.col,
                        format!("unknown negation tail `{other}`"),
                    ))
                }
            };
            Ok(Branch::Neg { prefix, tail, certificate: Certificate::Trusted })
        }
        "ex" => {
            if args.len() != 1 {
                return Err(Error::parse(pos.line, pos.col, "(ex ...) takes one branch"));
            }
            Ok(Branch::Ex(Box::new(branch_from_sexpr(&args[0])?)))
        }
        other => Err(Error::parse(pos.line, pos.col, format!("unknown branch head `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse_la;

    #[test]
    fn print_parse_round_trip() {
        let srcs = [
            "(empty)",
            "(tuple (empty) (empty))",
            "(tuple (empty) (rest (empty)))",
            "(tuple)",
            "(negb (pairs) (diag))",
            "(negb (pairs ((empty) 1) ((empty) 3)) (const (empty) 2))",
            "(negb (pairs) (exhausted))",
            "(ex (tuple (empty) (rest (empty))))",
        ];
        for src in srcs {
            let b = parse_branch(src).unwrap();
            assert_eq!(print_branch(&b), src);
            assert_eq!(parse_branch(&print_branch(&b)).unwrap(), b);
        }
    }

    #[test]
    fn parsed_negation_branches_are_trusted() {
        let b = parse_branch("(negb (pairs) (diag))").unwrap();
        assert!(b.has_trusted());
        let b = parse_branch("(tuple (negb (pairs) (exhausted)) (rest (empty)))").unwrap();
        assert!(b.has_trusted());
        assert!(!Branch::Empty.has_trusted());
    }

    #[test]
    fn malformed_branches_are_rejected() {
        assert!(parse_branch("(empty extra)").is_err());
        assert!(parse_branch("(tuple (rest (empty)) (empty))").is_err());
        assert!(parse_branch("(negb (pairs ((empty) 0)) (diag))").is_err());
        assert!(parse_branch("(negb (pairs) (const (empty)))").is_err());
        assert!(parse_branch("(branchy)").is_err());
    }

    #[test]
    fn pairing_checks_shapes() {
        // A conjunction of embedded parts is itself embedded and takes the
        // empty branch, not a tuple.
        let embedded = parse_la("(and (le (norm x1) 1) (ge (norm x1) 0))").unwrap();
        assert!(validate_pairing(&embedded, &Branch::Empty).is_ok());
        let tuple = parse_branch("(tuple (empty) (empty))").unwrap();
        assert!(validate_pairing(&embedded, &tuple).is_err());

        let f = parse_la("(and (not (le (norm x1) 1)) (ge (norm x1) 0))").unwrap();
        let good = parse_branch("(tuple (negb (pairs) (diag)) (empty))").unwrap();
        assert!(validate_pairing(&f, &good).is_ok());
        let short = parse_branch("(tuple (empty))").unwrap();
        assert!(validate_pairing(&f, &short).is_err());
        let with_rest =
            parse_branch("(tuple (negb (pairs) (diag)) (empty) (rest (empty)))").unwrap();
        assert!(validate_pairing(&f, &with_rest).is_err());

        let f = parse_la("(not (le (norm x1) 1))").unwrap();
        let neg = parse_branch("(negb (pairs) (const (empty) 2))").unwrap();
        assert!(validate_pairing(&f, &neg).is_ok());
        assert!(validate_pairing(&f, &Branch::Empty).is_err());
    }

    #[test]
    fn constant_certificates_demand_singleton_families() {
        let single = parse_la("(not (le (norm x1) 1))").unwrap();
        let nested = parse_la("(not (not (le (norm x1) 1)))").unwrap();
        let b = Branch::Neg {
            prefix: vec![],
            tail: NegTail::Constant { branch: Box::new(Branch::Empty), level: 2 },
            certificate: Certificate::ConstantOnSingleton(2),
        };
        assert!(validate_pairing(&single, &b).is_ok());
        assert!(validate_pairing(&nested, &b).is_err());
    }
}
