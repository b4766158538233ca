use crate::formula::Formula;

/// Push negations down to the atoms (De Morgan, quantifier duality,
/// double-negation elimination). Idempotent on NNF input.
pub fn to_nnf(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::And(l, r) => Formula::and(to_nnf(l), to_nnf(r)),
        Formula::Or(l, r) => Formula::or(to_nnf(l), to_nnf(r)),
        Formula::Forall(v, b) => Formula::forall(v.clone(), to_nnf(b)),
        Formula::Exists(v, b) => Formula::exists(v.clone(), to_nnf(b)),
        Formula::Not(inner) => negate(inner),
    }
}

fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => Formula::not(f.clone()),
        Formula::Not(inner) => to_nnf(inner),
        Formula::And(l, r) => Formula::or(negate(l), negate(r)),
        Formula::Or(l, r) => Formula::and(negate(l), negate(r)),
        Formula::Forall(v, b) => Formula::exists(v.clone(), negate(b)),
        Formula::Exists(v, b) => Formula::forall(v.clone(), negate(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    #[test]
    fn quantifier_duality() {
        let f = parse("~ (A x1 F(x1))").unwrap();
        assert_eq!(to_nnf(&f).to_string(), "E x1 ~F(x1)");
    }

    #[test]
    fn de_morgan_under_quantifier() {
        let f = parse("E y1 ~ (F(y1) & G(y1))").unwrap();
        assert_eq!(to_nnf(&f).to_string(), "E y1 (~F(y1) | ~G(y1))");
    }

    #[test]
    fn idempotent_on_nnf() {
        let f = parse("A x1 (F(x1) & ~G(x1))").unwrap();
        assert!(f.is_nnf());
        assert_eq!(to_nnf(&f), f);
    }

    #[test]
    fn double_negation() {
        let f = parse("~ ~ F(x1)");
        // x1 unbound, build by hand instead
        assert!(f.is_err());
        let g = parse("A x1 ~ ~ F(x1)").unwrap();
        assert_eq!(to_nnf(&g).to_string(), "A x1 F(x1)");
    }
}
