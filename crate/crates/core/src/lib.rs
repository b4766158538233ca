//! Decision toolkit for the conjunctive fragment of pure first-order logic.
//!
//! The refutability of NNFs without disjunction is decided purely by
//! equivalence transformations in a rewrite calculus for negation normal
//! forms: scopes are minimized, shared existential quantifiers are
//! multiplied under a sat-equivalence guard, a substitution list and the
//! optimized prenex forms are computed, and — when the formula is
//! contradictory — universal quantifier elimination yields an explicit
//! contradiction together with a replayable derivation certificate. No
//! skolemization happens on this path; a classical skolemization plus
//! unification back-end and a small-model evaluator live in [`oracle`] as
//! independent cross-checks.

pub mod calculus;
pub mod canon;
pub mod decide;
pub mod foldnf;
pub mod formula;
pub mod nnf;
pub mod oracle;
pub mod parse;
pub mod prune;
pub mod psi;
pub mod rectify;
pub mod sigma;
pub mod subscript;
pub mod var;

pub use calculus::{
    apply_rule, is_explicit_contradiction, verify_certificate, Certificate, CertificateDocument,
    DerivationStep, Dir, Payload, RuleId, VerifyOutcome,
};
pub use decide::{decide_foldnf, decide_psi, decide_wedge_nnf, Decision, FoldnfDecision, Verdict};
pub use foldnf::{anti_prenex, dnf_matrix, to_foldnf};
pub use formula::{Atom, Formula, LiteralOccurrence, Path, Polarity};
pub use nnf::to_nnf;
pub use parse::{parse, parse_allow_y0, ParseError};
pub use prune::{dinonwid_check, prune, unifiable_pairs, DinonwidResult, PruneResult};
pub use psi::{
    connected_pairs, em_applicable, em_free_route, em_optimize, extract_subformula,
    minimize_scopes, xx_lists, xy_yx_pairs, ConnectedPair, EmApplicability,
};
pub use rectify::rectify;
pub use sigma::{
    enumerate_optimized_prenexes, optimal_prenexes, substitution_list, PrenexForm,
    SubstitutionList, XList,
};
pub use subscript::max_subscript;
pub use var::{Var, VarKind};
