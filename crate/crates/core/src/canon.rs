use crate::formula::Formula;
use crate::var::Var;

/// Equality modulo commutation of adjacent same-kind quantifiers.
/// Variable names must match; only the order inside maximal runs of
/// `Forall`s (or of `Exists`s) is normalized. This is the equality used when
/// comparing certificate outcomes, where quantifier-block commutation is a
/// presumed law rather than an explicit derivation step.
pub fn eq_commuted(a: &Formula, b: &Formula) -> bool {
    sort_runs(a) == sort_runs(b)
}

fn sort_runs(f: &Formula) -> Formula {
    match f {
        Formula::Forall(_, _) | Formula::Exists(_, _) => {
            let universal = matches!(f, Formula::Forall(_, _));
            let mut vars = Vec::new();
            let mut cur = f;
            loop {
                match cur {
                    Formula::Forall(v, b) if universal => {
                        vars.push(v.clone());
                        cur = b;
                    }
                    Formula::Exists(v, b) if !universal => {
                        vars.push(v.clone());
                        cur = b;
                    }
                    _ => break,
                }
            }
            vars.sort();
            let mut out = sort_runs(cur);
            for v in vars.into_iter().rev() {
                out = if universal {
                    Formula::forall(v, out)
                } else {
                    Formula::exists(v, out)
                };
            }
            out
        }
        Formula::Not(a) => Formula::not(sort_runs(a)),
        Formula::And(l, r) => Formula::and(sort_runs(l), sort_runs(r)),
        Formula::Or(l, r) => Formula::or(sort_runs(l), sort_runs(r)),
        Formula::Atom(_) => f.clone(),
    }
}

/// Alpha-equivalence modulo quantifier-run commutation: binder names are
/// forgotten, each same-kind run is ordered by the first use position of its
/// variable in the scope, and the results are compared structurally.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    debruijn(&order_runs_by_use(a), &mut Vec::new()) == debruijn(&order_runs_by_use(b), &mut Vec::new())
}

fn order_runs_by_use(f: &Formula) -> Formula {
    match f {
        Formula::Forall(_, _) | Formula::Exists(_, _) => {
            let universal = matches!(f, Formula::Forall(_, _));
            let mut vars = Vec::new();
            let mut cur = f;
            loop {
                match cur {
                    Formula::Forall(v, b) if universal => {
                        vars.push(v.clone());
                        cur = b;
                    }
                    Formula::Exists(v, b) if !universal => {
                        vars.push(v.clone());
                        cur = b;
                    }
                    _ => break,
                }
            }
            let body = order_runs_by_use(cur);
            let positions = occurrence_order(&body);
            vars.sort_by_key(|v| {
                positions.iter().position(|p| p == v).unwrap_or(usize::MAX)
            });
            let mut out = body;
            for v in vars.into_iter().rev() {
                out = if universal {
                    Formula::forall(v, out)
                } else {
                    Formula::exists(v, out)
                };
            }
            out
        }
        Formula::Not(a) => Formula::not(order_runs_by_use(a)),
        Formula::And(l, r) => Formula::and(order_runs_by_use(l), order_runs_by_use(r)),
        Formula::Or(l, r) => Formula::or(order_runs_by_use(l), order_runs_by_use(r)),
        Formula::Atom(_) => f.clone(),
    }
}

fn occurrence_order(f: &Formula) -> Vec<Var> {
    let mut seen = Vec::new();
    fn go(f: &Formula, seen: &mut Vec<Var>) {
        match f {
            Formula::Atom(a) => {
                for v in &a.args {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
            }
            _ => {
                for c in f.children() {
                    go(c, seen);
                }
            }
        }
    }
    go(f, &mut seen);
    seen
}

#[derive(PartialEq, Eq, Debug)]
enum Db {
    Atom(String, Vec<Option<usize>>, bool),
    And(Box<Db>, Box<Db>),
    Or(Box<Db>, Box<Db>),
    Forall(Box<Db>),
    Exists(Box<Db>),
}

fn debruijn(f: &Formula, env: &mut Vec<Var>) -> Db {
    match f {
        Formula::Atom(a) => Db::Atom(
            a.pred.clone(),
            a.args
                .iter()
                .map(|v| env.iter().rev().position(|e| e == v))
                .collect(),
            true,
        ),
        Formula::Not(inner) => {
            if let Formula::Atom(a) = &**inner {
                Db::Atom(
                    a.pred.clone(),
                    a.args
                        .iter()
                        .map(|v| env.iter().rev().position(|e| e == v))
                        .collect(),
                    false,
                )
            } else {
                // non-NNF input: treat as opaque wrapper
                Db::Forall(Box::new(debruijn(inner, env)))
            }
        }
        Formula::And(l, r) => Db::And(Box::new(debruijn(l, env)), Box::new(debruijn(r, env))),
        Formula::Or(l, r) => Db::Or(Box::new(debruijn(l, env)), Box::new(debruijn(r, env))),
        Formula::Forall(v, b) => {
            env.push(v.clone());
            let d = Db::Forall(Box::new(debruijn(b, env)));
            env.pop();
            d
        }
        Formula::Exists(v, b) => {
            env.push(v.clone());
            let d = Db::Exists(Box::new(debruijn(b, env)));
            env.pop();
            d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse, parse_allow_y0};

    #[test]
    fn commuted_existential_runs_equal() {
        let a = parse_allow_y0("E y1_1 E y1_2 (F(y1_1) & ~F(y1_2))").unwrap();
        let b = parse_allow_y0("E y1_2 E y1_1 (F(y1_1) & ~F(y1_2))").unwrap();
        assert!(eq_commuted(&a, &b));
    }

    #[test]
    fn mixed_runs_do_not_commute() {
        let a = parse("A x1 E y1 F(x1,y1)").unwrap();
        let b = parse("E y1 A x1 F(x1,y1)").unwrap();
        assert!(!eq_commuted(&a, &b));
    }

    #[test]
    fn alpha_equivalent_renamings() {
        let a = parse("A x1 E y1_1 A x3 F(y1_1,x1,x3) & E y1_2 A x2 ~F(x2,y1_2,y1_2)").unwrap();
        let b = parse("A x1_1 E y1_1 A x3_1 F(y1_1,x1_1,x3_1) & E y1_2 A x2_2 ~F(x2_2,y1_2,y1_2)")
            .unwrap();
        assert!(alpha_eq(&a, &b));
    }

    #[test]
    fn alpha_distinguishes_structure() {
        let a = parse("A x1 F(x1,x1)").unwrap();
        let b = parse("A x1 A x2 F(x1,x2)").unwrap();
        assert!(!alpha_eq(&a, &b));
    }
}
