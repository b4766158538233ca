use crate::var::{Var, VarKind};
use std::collections::BTreeSet;
use std::fmt;

/// Formula of pure first-order logic: predicates over variables, no function
/// symbols, no constants, no identity.
///
/// `Not` may wrap an arbitrary formula after parsing; the NNF invariant
/// (negation only directly on atoms) is established by [`crate::nnf::to_nnf`]
/// and checked by [`Formula::is_nnf`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Var>) -> Atom {
        Atom { pred: pred.into(), args }
    }
}

/// Path from the root to a subformula: child index per step.
/// `And`/`Or` have children 0 and 1, `Not`/`Forall`/`Exists` a single child 0.
pub type Path = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Pos,
    Neg,
}

/// One literal occurrence inside a host formula. The path resolves to the
/// `Atom` node for positive literals and to the `Not` node for negative ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LiteralOccurrence {
    pub path: Path,
    pub polarity: Polarity,
    pub pred: String,
    pub args: Vec<Var>,
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Var>) -> Formula {
        Formula::Atom(Atom::new(pred, args))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(a) => vec![a],
            Formula::And(l, r) | Formula::Or(l, r) => vec![l, r],
            Formula::Forall(_, b) | Formula::Exists(_, b) => vec![b],
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in path {
            cur = match (cur, i) {
                (Formula::Not(a), 0) => a,
                (Formula::And(l, _), 0) | (Formula::Or(l, _), 0) => l,
                (Formula::And(_, r), 1) | (Formula::Or(_, r), 1) => r,
                (Formula::Forall(_, b), 0) | (Formula::Exists(_, b), 0) => b,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Rebuild with the subformula at `path` replaced by `new`.
    pub fn replace_at(&self, path: &[usize], new: Formula) -> Option<Formula> {
        if path.is_empty() {
            return Some(new);
        }
        let (i, rest) = (path[0], &path[1..]);
        Some(match (self, i) {
            (Formula::Not(a), 0) => Formula::not(a.replace_at(rest, new)?),
            (Formula::And(l, r), 0) => Formula::and(l.replace_at(rest, new)?, (**r).clone()),
            (Formula::And(l, r), 1) => Formula::and((**l).clone(), r.replace_at(rest, new)?),
            (Formula::Or(l, r), 0) => Formula::or(l.replace_at(rest, new)?, (**r).clone()),
            (Formula::Or(l, r), 1) => Formula::or((**l).clone(), r.replace_at(rest, new)?),
            (Formula::Forall(v, b), 0) => Formula::forall(v.clone(), b.replace_at(rest, new)?),
            (Formula::Exists(v, b), 0) => Formula::exists(v.clone(), b.replace_at(rest, new)?),
            _ => return None,
        })
    }

    /// Free variables (occurrences in atoms not bound by an enclosing
    /// quantifier of this subformula).
    pub fn free_vars(&self) -> BTreeSet<Var> {
        fn go(f: &Formula, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(a) => out.extend(a.args.iter().cloned()),
                Formula::Not(a) => go(a, out),
                Formula::And(l, r) | Formula::Or(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                Formula::Forall(v, b) | Formula::Exists(v, b) => {
                    let mut inner = BTreeSet::new();
                    go(b, &mut inner);
                    inner.remove(v);
                    out.extend(inner);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    pub fn has_free(&self, v: &Var) -> bool {
        match self {
            Formula::Atom(a) => a.args.contains(v),
            Formula::Not(a) => a.has_free(v),
            Formula::And(l, r) | Formula::Or(l, r) => l.has_free(v) || r.has_free(v),
            Formula::Forall(b, body) | Formula::Exists(b, body) => {
                b != v && body.has_free(v)
            }
        }
    }

    /// All variables occurring anywhere (binders and argument positions).
    pub fn all_vars(&self) -> BTreeSet<Var> {
        fn go(f: &Formula, out: &mut BTreeSet<Var>) {
            match f {
                Formula::Atom(a) => out.extend(a.args.iter().cloned()),
                Formula::Not(a) => go(a, out),
                Formula::And(l, r) | Formula::Or(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                Formula::Forall(v, b) | Formula::Exists(v, b) => {
                    out.insert(v.clone());
                    go(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Capture-naive substitution of free occurrences of `from` by `to`.
    /// Occurrences shadowed by an inner `from` binder are left alone.
    pub fn subst_var(&self, from: &Var, to: &Var) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom {
                pred: a.pred.clone(),
                args: a
                    .args
                    .iter()
                    .map(|v| if v == from { to.clone() } else { v.clone() })
                    .collect(),
            }),
            Formula::Not(a) => Formula::not(a.subst_var(from, to)),
            Formula::And(l, r) => Formula::and(l.subst_var(from, to), r.subst_var(from, to)),
            Formula::Or(l, r) => Formula::or(l.subst_var(from, to), r.subst_var(from, to)),
            Formula::Forall(v, b) => {
                if v == from {
                    self.clone()
                } else {
                    Formula::forall(v.clone(), b.subst_var(from, to))
                }
            }
            Formula::Exists(v, b) => {
                if v == from {
                    self.clone()
                } else {
                    Formula::exists(v.clone(), b.subst_var(from, to))
                }
            }
        }
    }

    /// Negation normal form: `Not` only directly on atoms.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(a) => matches!(**a, Formula::Atom(_)),
            Formula::And(l, r) | Formula::Or(l, r) => l.is_nnf() && r.is_nnf(),
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.is_nnf(),
        }
    }

    /// NNF without any disjunction.
    pub fn is_wedge_nnf(&self) -> bool {
        self.is_nnf() && !self.contains_or()
    }

    pub fn contains_or(&self) -> bool {
        match self {
            Formula::Or(_, _) => true,
            _ => self.children().iter().any(|c| c.contains_or()),
        }
    }

    pub fn contains_forall(&self) -> bool {
        match self {
            Formula::Forall(_, _) => true,
            _ => self.children().iter().any(|c| c.contains_forall()),
        }
    }

    pub fn contains_exists(&self) -> bool {
        match self {
            Formula::Exists(_, _) => true,
            _ => self.children().iter().any(|c| c.contains_exists()),
        }
    }

    /// Every quantifier binds a distinct variable, universal binders carry
    /// universal-kind variables and existential binders existential-kind ones.
    pub fn is_rectified(&self) -> bool {
        fn go(f: &Formula, seen: &mut BTreeSet<Var>) -> bool {
            match f {
                Formula::Forall(v, b) => {
                    v.kind == VarKind::Universal && seen.insert(v.clone()) && go(b, seen)
                }
                Formula::Exists(v, b) => {
                    v.kind == VarKind::Existential && seen.insert(v.clone()) && go(b, seen)
                }
                _ => f.children().iter().all(|c| go(c, seen)),
            }
        }
        go(self, &mut BTreeSet::new())
    }

    /// No free variables.
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All literal occurrences in pre-order. On non-NNF input, only literal
    /// shaped nodes (atoms and negated atoms) are reported.
    pub fn literals(&self) -> Vec<LiteralOccurrence> {
        fn go(f: &Formula, path: &mut Path, out: &mut Vec<LiteralOccurrence>) {
            match f {
                Formula::Atom(a) => out.push(LiteralOccurrence {
                    path: path.clone(),
                    polarity: Polarity::Pos,
                    pred: a.pred.clone(),
                    args: a.args.clone(),
                }),
                Formula::Not(inner) => {
                    if let Formula::Atom(a) = &**inner {
                        out.push(LiteralOccurrence {
                            path: path.clone(),
                            polarity: Polarity::Neg,
                            pred: a.pred.clone(),
                            args: a.args.clone(),
                        });
                    } else {
                        path.push(0);
                        go(inner, path, out);
                        path.pop();
                    }
                }
                Formula::And(l, r) | Formula::Or(l, r) => {
                    path.push(0);
                    go(l, path, out);
                    path.pop();
                    path.push(1);
                    go(r, path, out);
                    path.pop();
                }
                Formula::Forall(_, b) | Formula::Exists(_, b) => {
                    path.push(0);
                    go(b, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Number of quantifier nodes.
    pub fn quantifier_count(&self) -> usize {
        let own = matches!(self, Formula::Forall(_, _) | Formula::Exists(_, _)) as usize;
        own + self.children().iter().map(|c| c.quantifier_count()).sum::<usize>()
    }
}

pub fn path_to_string(path: &[usize]) -> String {
    if path.is_empty() {
        "-".to_string()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

pub fn path_from_str(s: &str) -> Option<Path> {
    if s == "-" {
        return Some(Vec::new());
    }
    s.split('.').map(|p| p.parse::<usize>().ok()).collect()
}

impl fmt::Display for LiteralOccurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.polarity == Polarity::Neg {
            write!(f, "~")?;
        }
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, ")")
    }
}

// Concrete syntax. Precedence: `|` < `&` < unit, quantifiers bind the
// smallest complete formula after the binder. Parentheses are emitted
// exactly where the grammar needs them so parsing printed text restores
// the identical tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f, Prec::Disj)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Disj,
    Conj,
    Unit,
}

fn write_formula(fm: &Formula, f: &mut fmt::Formatter<'_>, prec: Prec) -> fmt::Result {
    match fm {
        Formula::Atom(a) => {
            write!(f, "{}(", a.pred)?;
            for (i, v) in a.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", v)?;
            }
            write!(f, ")")
        }
        Formula::Not(inner) => {
            write!(f, "~")?;
            if matches!(**inner, Formula::Atom(_)) {
                write_formula(inner, f, Prec::Unit)
            } else {
                write!(f, "(")?;
                write_formula(inner, f, Prec::Disj)?;
                write!(f, ")")
            }
        }
        Formula::And(l, r) => {
            if prec > Prec::Conj {
                write!(f, "(")?;
                write_formula(fm, f, Prec::Conj)?;
                return write!(f, ")");
            }
            // left child may itself be a conjunction chain
            write_formula(l, f, Prec::Conj)?;
            write!(f, " & ")?;
            write_formula(r, f, Prec::Unit)
        }
        Formula::Or(l, r) => {
            if prec > Prec::Disj {
                write!(f, "(")?;
                write_formula(fm, f, Prec::Disj)?;
                return write!(f, ")");
            }
            write_formula(l, f, Prec::Disj)?;
            write!(f, " | ")?;
            write_formula(r, f, Prec::Conj)
        }
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            if prec > Prec::Unit {
                // quantifiers are units; never reached with current callers
                write!(f, "(")?;
                write_formula(fm, f, Prec::Unit)?;
                return write!(f, ")");
            }
            let q = if matches!(fm, Formula::Forall(_, _)) { 'A' } else { 'E' };
            write!(f, "{} {} ", q, v)?;
            match **b {
                Formula::And(_, _) | Formula::Or(_, _) => {
                    write!(f, "(")?;
                    write_formula(b, f, Prec::Disj)?;
                    write!(f, ")")
                }
                _ => write_formula(b, f, Prec::Unit),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: u32) -> Var {
        Var::universal(n)
    }
    fn y(n: u32) -> Var {
        Var::existential(n)
    }

    #[test]
    fn display_precedence() {
        let f = Formula::and(
            Formula::or(Formula::atom("F", vec![x(1)]), Formula::atom("G", vec![x(1)])),
            Formula::atom("H", vec![x(1)]),
        );
        assert_eq!(f.to_string(), "(F(x1) | G(x1)) & H(x1)");
        let g = Formula::or(
            Formula::and(Formula::atom("F", vec![x(1)]), Formula::atom("G", vec![x(1)])),
            Formula::atom("H", vec![x(1)]),
        );
        assert_eq!(g.to_string(), "F(x1) & G(x1) | H(x1)");
    }

    #[test]
    fn display_quantifier_scope() {
        let f = Formula::forall(
            x(1),
            Formula::exists(
                y(1),
                Formula::and(
                    Formula::atom("F", vec![x(1), y(1)]),
                    Formula::not(Formula::atom("F", vec![y(1), x(1)])),
                ),
            ),
        );
        assert_eq!(f.to_string(), "A x1 E y1 (F(x1,y1) & ~F(y1,x1))");
    }

    #[test]
    fn paths_resolve() {
        let f = Formula::and(
            Formula::atom("F", vec![x(1)]),
            Formula::forall(x(2), Formula::atom("G", vec![x(2)])),
        );
        assert!(matches!(f.at(&[1, 0]), Some(Formula::Atom(_))));
        assert!(f.at(&[2]).is_none());
        let lits = f.literals();
        assert_eq!(lits.len(), 2);
        assert_eq!(lits[0].path, vec![0]);
        assert_eq!(lits[1].path, vec![1, 0]);
    }

    #[test]
    fn rectified_checks_kind_and_distinctness() {
        let good = Formula::forall(x(1), Formula::atom("F", vec![x(1)]));
        assert!(good.is_rectified());
        let shadow = Formula::forall(
            x(1),
            Formula::and(
                Formula::atom("F", vec![x(1)]),
                Formula::forall(x(1), Formula::atom("G", vec![x(1)])),
            ),
        );
        assert!(!shadow.is_rectified());
        let wrong_kind = Formula::exists(x(1), Formula::atom("F", vec![x(1)]));
        assert!(!wrong_kind.is_rectified());
    }
}
