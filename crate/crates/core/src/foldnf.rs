use crate::formula::{Formula, LiteralOccurrence, Path};
use crate::rectify::make_binders_distinct;
use crate::var::Var;

/// Drive quantifiers inward as far as the PN laws allow. Disjunction is
/// split under existential quantifiers (PN10), so `|` floats upward while
/// quantifiers sink. Universal quantifiers over a disjunction mentioning the
/// variable on both sides stay put, as do existential quantifiers over such
/// conjunctions.
pub fn anti_prenex(f: &Formula) -> Formula {
    let mut cur = f.clone();
    loop {
        match try_push(&cur) {
            Some(next) => cur = next,
            None => return cur,
        }
    }
}

// One leftmost-outermost PN application, or None at fixpoint.
fn try_push(f: &Formula) -> Option<Formula> {
    if let Some(new) = push_at(f) {
        return Some(new);
    }
    match f {
        Formula::Atom(_) | Formula::Not(_) => None,
        Formula::And(l, r) => {
            if let Some(nl) = try_push(l) {
                Some(Formula::and(nl, (**r).clone()))
            } else {
                try_push(r).map(|nr| Formula::and((**l).clone(), nr))
            }
        }
        Formula::Or(l, r) => {
            if let Some(nl) = try_push(l) {
                Some(Formula::or(nl, (**r).clone()))
            } else {
                try_push(r).map(|nr| Formula::or((**l).clone(), nr))
            }
        }
        Formula::Forall(v, b) => try_push(b).map(|nb| Formula::forall(v.clone(), nb)),
        Formula::Exists(v, b) => try_push(b).map(|nb| Formula::exists(v.clone(), nb)),
    }
}

fn push_at(f: &Formula) -> Option<Formula> {
    match f {
        Formula::Forall(v, b) => match &**b {
            Formula::And(l, r) => {
                if !l.has_free(v) {
                    // PN1
                    Some(Formula::and((**l).clone(), Formula::forall(v.clone(), (**r).clone())))
                } else if !r.has_free(v) {
                    // PN2
                    Some(Formula::and(Formula::forall(v.clone(), (**l).clone()), (**r).clone()))
                } else {
                    // PN9
                    Some(Formula::and(
                        Formula::forall(v.clone(), (**l).clone()),
                        Formula::forall(v.clone(), (**r).clone()),
                    ))
                }
            }
            Formula::Or(l, r) => {
                if !l.has_free(v) {
                    // PN3
                    Some(Formula::or((**l).clone(), Formula::forall(v.clone(), (**r).clone())))
                } else if !r.has_free(v) {
                    // PN4
                    Some(Formula::or(Formula::forall(v.clone(), (**l).clone()), (**r).clone()))
                } else {
                    None
                }
            }
            _ => None,
        },
        Formula::Exists(v, b) => match &**b {
            Formula::And(l, r) => {
                if !l.has_free(v) {
                    // PN5
                    Some(Formula::and((**l).clone(), Formula::exists(v.clone(), (**r).clone())))
                } else if !r.has_free(v) {
                    // PN6
                    Some(Formula::and(Formula::exists(v.clone(), (**l).clone()), (**r).clone()))
                } else {
                    None
                }
            }
            Formula::Or(l, r) => {
                if !l.has_free(v) {
                    // PN7
                    Some(Formula::or((**l).clone(), Formula::exists(v.clone(), (**r).clone())))
                } else if !r.has_free(v) {
                    // PN8
                    Some(Formula::or(Formula::exists(v.clone(), (**l).clone()), (**r).clone()))
                } else {
                    // PN10
                    Some(Formula::or(
                        Formula::exists(v.clone(), (**l).clone()),
                        Formula::exists(v.clone(), (**r).clone()),
                    ))
                }
            }
            _ => None,
        },
        _ => None,
    }
}

/// Convert a closed NNF into a list of disjuncts whose disjunction is
/// equivalent to the input: quantifiers driven inward, top-level `|`
/// distributed outward over `&`, binders made jointly distinct. Disjuncts
/// may still contain `|` under quantifiers; those fall outside the
/// conjunctive fragment.
pub fn to_foldnf(f: &Formula) -> Vec<Formula> {
    let pushed = anti_prenex(f);
    let disjuncts = split_top(&pushed);
    // rectify jointly so no binder is reused across disjuncts
    let joined = disjuncts
        .into_iter()
        .reduce(|a, b| Formula::or(a, b))
        .expect("at least one disjunct");
    let (fixed, _) = make_binders_distinct(&joined);
    split_or_chain(&fixed)
}

// DNF at the propositional top level, treating quantified subformulas as units.
fn split_top(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::Or(l, r) => {
            let mut out = split_top(l);
            out.extend(split_top(r));
            out
        }
        Formula::And(l, r) => {
            let ls = split_top(l);
            let rs = split_top(r);
            let mut out = Vec::new();
            for a in &ls {
                for b in &rs {
                    out.push(Formula::and(a.clone(), b.clone()));
                }
            }
            out
        }
        _ => vec![f.clone()],
    }
}

fn split_or_chain(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::Or(l, r) => {
            let mut out = split_or_chain(l);
            out.extend(split_or_chain(r));
            out
        }
        _ => vec![f.clone()],
    }
}

/// Prenex prefix of a deterministic prenex form plus the DNF of its scope.
/// Existential quantifiers are pulled out first wherever the PN laws allow,
/// mirroring the optimized-prenex strategy; ties between two
/// existential-bearing sides go to the left conjunct.
pub fn dnf_matrix(f: &Formula) -> (Vec<Var>, Vec<Vec<LiteralOccurrence>>) {
    let (prefix, matrix) = prenex(f, &mut Vec::new());
    (prefix, dnf(&matrix))
}

#[derive(Clone)]
enum MatrixNode {
    Lit(LiteralOccurrence),
    And(Box<MatrixNode>, Box<MatrixNode>),
    Or(Box<MatrixNode>, Box<MatrixNode>),
}

fn prenex(f: &Formula, path: &mut Path) -> (Vec<Var>, MatrixNode) {
    match f {
        Formula::Atom(_) | Formula::Not(_) => {
            let lit = &f.literals()[0];
            (
                Vec::new(),
                MatrixNode::Lit(LiteralOccurrence {
                    path: path.iter().chain(lit.path.iter()).cloned().collect(),
                    ..lit.clone()
                }),
            )
        }
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            path.push(0);
            let (mut prefix, m) = prenex(b, path);
            path.pop();
            prefix.insert(0, v.clone());
            (prefix, m)
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            path.push(0);
            let (pl, ml) = prenex(l, path);
            path.pop();
            path.push(1);
            let (pr, mr) = prenex(r, path);
            path.pop();
            let prefix = merge_prefixes(pl, pr);
            let node = if matches!(f, Formula::And(_, _)) {
                MatrixNode::And(Box::new(ml), Box::new(mr))
            } else {
                MatrixNode::Or(Box::new(ml), Box::new(mr))
            };
            (prefix, node)
        }
    }
}

// Interleave two quantifier chains, preferring existentials, then the side
// whose remainder still holds existentials.
fn merge_prefixes(mut l: Vec<Var>, mut r: Vec<Var>) -> Vec<Var> {
    let mut out = Vec::new();
    let mut li = 0;
    let mut ri = 0;
    while li < l.len() || ri < r.len() {
        let lh = l.get(li);
        let rh = r.get(ri);
        let take_left = match (lh, rh) {
            (Some(a), _) if a.is_existential() => true,
            (_, Some(b)) if b.is_existential() => false,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(_), Some(_)) => {
                let l_rest_has_e = l[li..].iter().any(|v| v.is_existential());
                let r_rest_has_e = r[ri..].iter().any(|v| v.is_existential());
                match (l_rest_has_e, r_rest_has_e) {
                    (false, true) => false, // left all-universal: drain right first
                    (true, false) => true,
                    _ => true, // branch point: left first
                }
            }
            (None, None) => break,
        };
        if take_left {
            out.push(l[li].clone());
            li += 1;
        } else {
            out.push(r[ri].clone());
            ri += 1;
        }
    }
    l.clear();
    r.clear();
    out
}

fn dnf(m: &MatrixNode) -> Vec<Vec<LiteralOccurrence>> {
    match m {
        MatrixNode::Lit(l) => vec![vec![l.clone()]],
        MatrixNode::Or(l, r) => {
            let mut out = dnf(l);
            out.extend(dnf(r));
            out
        }
        MatrixNode::And(l, r) => {
            let ls = dnf(l);
            let rs = dnf(r);
            let mut out = Vec::new();
            for a in &ls {
                for b in &rs {
                    let mut row = a.clone();
                    row.extend(b.iter().cloned());
                    out.push(row);
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn pn10_splits_and_rectifies() {
        let f = parse("E y1 (F(y1) | G(y1))").unwrap();
        let ds = to_foldnf(&f);
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].to_string(), "E y1 F(y1)");
        assert_eq!(ds[1].to_string(), "E y2 G(y2)");
    }

    #[test]
    fn wedge_nnf_is_single_disjunct() {
        let f = parse("A x1 E y1 (F(x1,y1) & ~F(y1,x1))").unwrap();
        let ds = to_foldnf(&f);
        assert_eq!(ds, vec![f]);
    }

    #[test]
    fn dnf_matrix_simple() {
        let f = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        let (prefix, matrix) = dnf_matrix(&f);
        assert_eq!(prefix, vec![crate::var::Var::existential(1)]);
        assert_eq!(matrix.len(), 1);
        assert_eq!(matrix[0].len(), 2);
        assert_eq!(matrix[0][0].to_string(), "F(y1)");
        assert_eq!(matrix[0][1].to_string(), "~F(y1)");
    }

    #[test]
    fn dnf_matrix_distributes() {
        let f = parse("A x1 (F(x1) | G(x1)) & E y1 H(y1)").unwrap();
        let (_, matrix) = dnf_matrix(&f);
        let rows: Vec<Vec<String>> = matrix
            .iter()
            .map(|r| r.iter().map(|l| l.to_string()).collect())
            .collect();
        assert_eq!(rows, vec![vec!["F(x1)", "H(y1)"], vec!["G(x1)", "H(y1)"]]);
    }
}
