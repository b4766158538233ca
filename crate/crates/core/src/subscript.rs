use crate::formula::Formula;
use crate::var::Var;
use std::collections::BTreeMap;

/// Maximal subscription: after a rule duplicated binders (conjunct
/// multiplication, existential quantifier multiplication, PN9), each binder
/// occurrence of a duplicated variable receives a distinct variable by
/// appending a new deepest sub-index level — 1 for the leftmost copy, 2 for
/// the next, counting on for further copies. Already-distinct binders are
/// untouched.
pub fn max_subscript(f: &Formula) -> Formula {
    let mut counts: BTreeMap<Var, u32> = BTreeMap::new();
    count_binders(f, &mut counts);
    let duplicated: BTreeMap<Var, u32> =
        counts.into_iter().filter(|(_, c)| *c > 1).map(|(v, _)| (v, 0)).collect();
    if duplicated.is_empty() {
        return f.clone();
    }
    let mut next = duplicated;
    subscript(f, &mut next)
}

fn count_binders(f: &Formula, counts: &mut BTreeMap<Var, u32>) {
    if let Formula::Forall(v, _) | Formula::Exists(v, _) = f {
        *counts.entry(v.clone()).or_insert(0) += 1;
    }
    for c in f.children() {
        count_binders(c, counts);
    }
}

fn subscript(f: &Formula, next: &mut BTreeMap<Var, u32>) -> Formula {
    match f {
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            let rebound = if let Some(n) = next.get_mut(v) {
                *n += 1;
                Some(v.with_sub(*n))
            } else {
                None
            };
            let body = subscript(b, next);
            let (var, body) = match rebound {
                Some(new) => (new.clone(), body.subst_var(v, &new)),
                None => (v.clone(), body),
            };
            if matches!(f, Formula::Forall(_, _)) {
                Formula::forall(var, body)
            } else {
                Formula::exists(var, body)
            }
        }
        Formula::Not(a) => Formula::not(subscript(a, next)),
        Formula::And(l, r) => {
            let l2 = subscript(l, next);
            let r2 = subscript(r, next);
            Formula::and(l2, r2)
        }
        Formula::Or(l, r) => {
            let l2 = subscript(l, next);
            let r2 = subscript(r, next);
            Formula::or(l2, r2)
        }
        Formula::Atom(_) => f.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn duplicated_universal_binders() {
        let f = parse("A x1 F(x1) & A x1 G(x1)").unwrap();
        assert_eq!(max_subscript(&f).to_string(), "A x1_1 F(x1_1) & A x1_2 G(x1_2)");
    }

    #[test]
    fn duplicated_existential_binders() {
        let f = parse("E y1 F(y1) & E y1 G(y1)").unwrap();
        assert_eq!(max_subscript(&f).to_string(), "E y1_1 F(y1_1) & E y1_2 G(y1_2)");
    }

    #[test]
    fn rectified_input_unchanged() {
        let f = parse("A x1 F(x1) & A x2 G(x2)").unwrap();
        assert_eq!(max_subscript(&f), f);
    }

    #[test]
    fn deep_indices_grow_one_level() {
        let f = parse("A x1_1 F(x1_1) & A x1_1 G(x1_1)").unwrap();
        assert_eq!(
            max_subscript(&f).to_string(),
            "A x1_1_1 F(x1_1_1) & A x1_1_2 G(x1_1_2)"
        );
    }
}
