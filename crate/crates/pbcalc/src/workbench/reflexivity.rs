//! The reflexivity sentence: along every unit-ball sequence, some convex
//! block of an initial window nearly agrees with some convex block of the
//! window after it, at every agreement threshold 1/n.
//!
//! The disjunctions over the window lengths and the coefficient tuples
//! are countable, so the whole sentence lives strictly outside the
//! finitary fragment; it is the smallest of the built-in examples that
//! exercises every infinitary connective at once.

use crate::syntax::ast::{BoundSeq, IdxExpr, LAFormula, PBFormula, Term, VarRef};
use crate::syntax::domains::IndexDomain;

/// Σ_{v=1}^{hi} coeffs_v · x_{index(v)}.
fn convex_block(coeffs: &str, var: &str, hi: IdxExpr, index: IdxExpr) -> Term {
    Term::SumOver {
        var: var.to_string(),
        lo: IdxExpr::int(1),
        hi,
        body: Box::new(Term::scale(
            IdxExpr::comp(coeffs, IdxExpr::binder(var)),
            Term::Var(VarRef { family: "x".to_string(), index }),
        )),
    }
}

/// ‖Σ_{i≤k} a_i x_i − Σ_{j≤r} b_j x_{k+j}‖ ≤ 1/n.
fn agreement_atom() -> PBFormula {
    let head = convex_block("a", "i", IdxExpr::binder("k"), IdxExpr::binder("i"));
    let tail = convex_block(
        "b",
        "j",
        IdxExpr::binder("r"),
        IdxExpr::Add(Box::new(IdxExpr::binder("k")), Box::new(IdxExpr::binder("j"))),
    );
    PBFormula::norm_le(
        Term::diff(head, tail),
        IdxExpr::div(IdxExpr::int(1), IdxExpr::binder("n")),
    )
}

/// ⋀_n ∀x⃗ (‖x_i‖ ≤ 1 ⇒ ⋁_k ⋁_r ⋁_{a ∈ CO(k)} ⋁_{b ∈ CO(r)}
/// ‖Σ_{i≤k} a_i x_i − Σ_{j≤r} b_j x_{k+j}‖ ≤ 1/n).
pub fn build_reflexivity_sentence() -> LAFormula {
    let blocks_agree = LAFormula::or_w(
        "k",
        IndexDomain::Naturals,
        LAFormula::or_w(
            "r",
            IndexDomain::Naturals,
            LAFormula::or_w(
                "a",
                IndexDomain::ConvexCoeffs(IdxExpr::binder("k")),
                LAFormula::or_w(
                    "b",
                    IndexDomain::ConvexCoeffs(IdxExpr::binder("r")),
                    LAFormula::Embed(agreement_atom()),
                ),
            ),
        ),
    );
    LAFormula::and_w(
        "n",
        IndexDomain::Naturals,
        LAFormula::forall_seq(
            "x",
            BoundSeq::constant(crate::rational::rat_int(1)),
            blocks_agree,
        ),
    )
}
