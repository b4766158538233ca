use crate::formula::Formula;
use crate::var::{Var, VarKind};
use std::collections::BTreeSet;

/// Canonically rectify: every binder gets a distinct variable, universal
/// binders are renamed to `x1, x2, …` and existential binders to
/// `y1, y2, …` in left-to-right traversal order. Occurrences resolve to the
/// nearest enclosing binder, so shadowed input is handled.
pub fn rectify(f: &Formula) -> Formula {
    let mut next_x = 1u32;
    let mut next_y = 1u32;
    let mut scope: Vec<(Var, Var)> = Vec::new();
    go(f, &mut next_x, &mut next_y, &mut scope)
}

fn go(f: &Formula, next_x: &mut u32, next_y: &mut u32, scope: &mut Vec<(Var, Var)>) -> Formula {
    match f {
        Formula::Atom(a) => Formula::atom(
            a.pred.clone(),
            a.args
                .iter()
                .map(|v| {
                    scope
                        .iter()
                        .rev()
                        .find(|(old, _)| old == v)
                        .map(|(_, new)| new.clone())
                        .unwrap_or_else(|| v.clone())
                })
                .collect(),
        ),
        Formula::Not(inner) => Formula::not(go(inner, next_x, next_y, scope)),
        Formula::And(l, r) => Formula::and(
            go(l, next_x, next_y, scope),
            go(r, next_x, next_y, scope),
        ),
        Formula::Or(l, r) => Formula::or(
            go(l, next_x, next_y, scope),
            go(r, next_x, next_y, scope),
        ),
        Formula::Forall(v, b) => {
            let new = Var::universal(*next_x);
            *next_x += 1;
            scope.push((v.clone(), new.clone()));
            let body = go(b, next_x, next_y, scope);
            scope.pop();
            Formula::forall(new, body)
        }
        Formula::Exists(v, b) => {
            let new = Var::existential(*next_y);
            *next_y += 1;
            scope.push((v.clone(), new.clone()));
            let body = go(b, next_x, next_y, scope);
            scope.pop();
            Formula::exists(new, body)
        }
    }
}

/// Repair duplicate binders after a rule application that multiplied
/// quantifiers: the leftmost binder of each duplicated variable keeps its
/// name, every later one is renamed to a fresh variable of the same kind
/// with the smallest unused base index (a SUB1/SUB2 application). Returns
/// the repaired formula and one `(path, old, new)` entry per renaming, in
/// application order.
pub fn make_binders_distinct(f: &Formula) -> (Formula, Vec<(Vec<usize>, Var, Var)>) {
    let mut used = f.all_vars();
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    let mut renames = Vec::new();
    let mut current = f.clone();
    loop {
        // find the first binder (pre-order) whose variable was already bound
        let target = find_duplicate(&current, &mut BTreeSet::new(), &mut Vec::new());
        seen.clear();
        let Some((path, old)) = target else { break };
        let new = fresh_var(old.kind, &used);
        used.insert(new.clone());
        let node = current.at(&path).expect("path");
        let renamed = rename_binder(node, &new);
        current = current.replace_at(&path, renamed).expect("path");
        renames.push((path, old, new));
    }
    (current, renames)
}

fn find_duplicate(
    f: &Formula,
    seen: &mut BTreeSet<Var>,
    path: &mut Vec<usize>,
) -> Option<(Vec<usize>, Var)> {
    match f {
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            if !seen.insert(v.clone()) {
                return Some((path.clone(), v.clone()));
            }
            path.push(0);
            let r = find_duplicate(b, seen, path);
            path.pop();
            r
        }
        Formula::Not(a) => {
            path.push(0);
            let r = find_duplicate(a, seen, path);
            path.pop();
            r
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            path.push(0);
            if let Some(hit) = find_duplicate(l, seen, path) {
                path.pop();
                return Some(hit);
            }
            path.pop();
            path.push(1);
            let hit = find_duplicate(r, seen, path);
            path.pop();
            hit
        }
        Formula::Atom(_) => None,
    }
}

/// Rename the binder node itself and the occurrences it binds (stopping at
/// inner shadowing binders of the same variable).
pub fn rename_binder(node: &Formula, new: &Var) -> Formula {
    match node {
        Formula::Forall(v, b) => Formula::forall(new.clone(), b.subst_var(v, new)),
        Formula::Exists(v, b) => Formula::exists(new.clone(), b.subst_var(v, new)),
        _ => node.clone(),
    }
}

/// Smallest-base fresh variable of the given kind with no sub-indices.
pub fn fresh_var(kind: VarKind, used: &BTreeSet<Var>) -> Var {
    let mut base = 1u32;
    loop {
        let cand = Var { kind, base, subs: Vec::new() };
        if !used.contains(&cand) {
            return cand;
        }
        base += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn shadowed_binders_renamed_in_traversal_order() {
        let f = parse("A v1 (F(v1) & A v1 G(v1))").unwrap();
        assert_eq!(rectify(&f).to_string(), "A x1 (F(x1) & A x2 G(x2))");
    }

    #[test]
    fn canonical_input_unchanged() {
        let f = parse("E y1 A x1 (F(y1,x1) & ~F(x1,y1))").unwrap();
        assert_eq!(rectify(&f), f);
    }

    #[test]
    fn kind_assignment_follows_binder() {
        let f = parse("E v1 A w1 (F(v1,w1) & ~F(w1,v1))").unwrap();
        assert_eq!(rectify(&f).to_string(), "E y1 A x1 (F(y1,x1) & ~F(x1,y1))");
    }

    #[test]
    fn rectify_output_satisfies_invariants() {
        let f = parse("A v1 (F(v1) & E v1 G(v1))").unwrap();
        let r = rectify(&f);
        assert!(r.is_rectified());
        assert!(r.is_nnf());
        assert!(r.is_closed());
    }

    #[test]
    fn duplicate_binders_get_fresh_bases() {
        // the shape PN9 leaves behind
        let f = parse("E y1 (A x1 A x2 F(x1,x2,y1,y1) & A x1 E y2 E y3 ~F(y2,y3,x1,y1))")
            .unwrap();
        let (fixed, renames) = make_binders_distinct(&f);
        assert_eq!(
            fixed.to_string(),
            "E y1 (A x1 A x2 F(x1,x2,y1,y1) & A x3 E y2 E y3 ~F(y2,y3,x3,y1))"
        );
        assert_eq!(renames.len(), 1);
        assert_eq!(renames[0].1.to_string(), "x1");
        assert_eq!(renames[0].2.to_string(), "x3");
    }
}
