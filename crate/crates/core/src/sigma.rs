use crate::calculus::{apply_rule, DerivationStep, Dir, Payload, RuleId};
use crate::formula::{Formula, Path};
use crate::psi::ConnectedPair;
use crate::var::Var;
use std::collections::BTreeSet;
use std::fmt;

/// One entry of the substitution list: a universal variable together with
/// every existential variable it must take for unification. `y0` marks an
/// unconstrained variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XList {
    pub xvar: Var,
    pub yvars: BTreeSet<Var>,
}

impl XList {
    pub fn is_unambiguous(&self) -> bool {
        self.yvars.len() == 1
    }
}

/// The maximal substitution list σ: one x list per universal variable of the
/// pair, sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SubstitutionList {
    pub entries: Vec<XList>,
}

impl SubstitutionList {
    pub fn is_unambiguous(&self) -> bool {
        self.entries.iter().all(XList::is_unambiguous)
    }

    pub fn is_ambiguous(&self) -> bool {
        !self.is_unambiguous()
    }

    pub fn lookup(&self, x: &Var) -> Option<&BTreeSet<Var>> {
        self.entries.iter().find(|e| &e.xvar == x).map(|e| &e.yvars)
    }
}

impl fmt::Display for SubstitutionList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{{}", e.xvar)?;
            for y in &e.yvars {
                write!(f, ",{}", y)?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// Argument-like values the σ computation runs over. The unifiability
/// filters re-run the algorithm with side-tagged universal variables, so the
/// core is generic over the variable representation.
pub trait SigmaVar: Clone + Ord {
    fn is_x(&self) -> bool;
}

impl SigmaVar for Var {
    fn is_x(&self) -> bool {
        self.is_universal()
    }
}

impl SigmaVar for (Var, u8) {
    fn is_x(&self) -> bool {
        self.0.is_universal()
    }
}

/// The maximal substitution list of a connected pair.
pub fn substitution_list(p: &ConnectedPair) -> SubstitutionList {
    let pairs = sigma_core(&p.l1.args, &p.l2.args);
    SubstitutionList {
        entries: pairs
            .into_iter()
            .map(|(xvar, yvars)| XList { xvar, yvars })
            .collect(),
    }
}

/// σ1/σ2/σ3 over arbitrary aligned argument lists. Returns, per universal
/// variable, the set of existential variables it must take; the set `{y0}`
/// stands for "unconstrained" and is produced by the caller-supplied default.
pub fn sigma_core<V: SigmaVar>(args1: &[V], args2: &[V]) -> Vec<(V, BTreeSet<V>)>
where
    V: SigmaVarDefault,
{
    // σ1: aligned pairs containing at least one x variable
    let mut lists: Vec<BTreeSet<V>> = Vec::new();
    for (a, b) in args1.iter().zip(args2.iter()) {
        if a.is_x() || b.is_x() {
            let mut set = BTreeSet::new();
            set.insert(a.clone());
            set.insert(b.clone());
            if !lists.contains(&set) {
                lists.push(set);
            }
        }
    }
    // σ2: grow y-carrying lists along shared x variables, drop absorbed
    // pure-x lists, repeat to a fixpoint
    loop {
        let mut changed = false;
        for i in 0..lists.len() {
            if lists[i].iter().filter(|v| !v.is_x()).count() != 1 {
                continue;
            }
            let xs: Vec<V> = lists[i].iter().filter(|v| v.is_x()).cloned().collect();
            let mut additions: BTreeSet<V> = BTreeSet::new();
            for x in &xs {
                for (j, other) in lists.iter().enumerate() {
                    if j != i && other.contains(x) {
                        additions.extend(other.iter().filter(|v| v.is_x()).cloned());
                    }
                }
            }
            for a in additions {
                if lists[i].insert(a) {
                    changed = true;
                }
            }
        }
        let y_carrying: Vec<BTreeSet<V>> = lists
            .iter()
            .filter(|l| l.iter().any(|v| !v.is_x()))
            .cloned()
            .collect();
        let before = lists.len();
        lists.retain(|l| {
            let pure_x = l.iter().all(|v| v.is_x());
            !(pure_x && l.iter().all(|x| y_carrying.iter().any(|yl| yl.contains(x))))
        });
        if lists.len() != before {
            changed = true;
        }
        // growth can make two lists equal; keep one
        let mut deduped: Vec<BTreeSet<V>> = Vec::new();
        for l in lists.drain(..) {
            if !deduped.contains(&l) {
                deduped.push(l);
            }
        }
        lists = deduped;
        if !changed {
            break;
        }
    }
    // σ3: per x variable, every co-listed y variable, defaulting to y0
    let mut xs: Vec<V> = Vec::new();
    for l in &lists {
        for v in l.iter().filter(|v| v.is_x()) {
            if !xs.contains(v) {
                xs.push(v.clone());
            }
        }
    }
    xs.sort();
    xs.into_iter()
        .map(|x| {
            let ys: BTreeSet<V> = lists
                .iter()
                .filter(|l| l.contains(&x))
                .flat_map(|l| l.iter().filter(|v| !v.is_x()).cloned())
                .collect();
            let ys = if ys.is_empty() {
                let mut d = BTreeSet::new();
                d.insert(V::y_default());
                d
            } else {
                ys
            };
            (x, ys)
        })
        .collect()
}

/// Supplies the `y0` default for the generic σ computation.
pub trait SigmaVarDefault {
    fn y_default() -> Self;
}

impl SigmaVarDefault for Var {
    fn y_default() -> Var {
        Var::y_zero()
    }
}

impl SigmaVarDefault for (Var, u8) {
    fn y_default() -> (Var, u8) {
        (Var::y_zero(), 0)
    }
}

/// A prenex normal form: quantifier prefix plus quantifier-free matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrenexForm {
    pub prefix: Vec<Var>,
    pub matrix: Formula,
}

impl PrenexForm {
    pub fn to_formula(&self) -> Formula {
        let mut out = self.matrix.clone();
        for v in self.prefix.iter().rev() {
            out = if v.is_universal() {
                Formula::forall(v.clone(), out)
            } else {
                Formula::exists(v.clone(), out)
            };
        }
        out
    }
}

impl fmt::Display for PrenexForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// All optimized prenex normal forms of a disjunction-free formula:
/// existential quantifiers are pulled out before universal ones, a side
/// whose remainder is purely universal waits for the other side, and when
/// both conjuncts still hold existentials the enumeration branches on which
/// universal to pull first. Deterministic, branch-left-first, deduplicated
/// by prefix.
pub fn enumerate_optimized_prenexes(psi2: &Formula) -> Vec<PrenexForm> {
    enumerate_traced(psi2)
        .into_iter()
        .map(|(form, _)| form)
        .collect()
}

/// Traced variant: each form carries the PN steps (right-to-left pulls) that
/// produce it from the input, for certificate assembly.
pub fn enumerate_traced(psi2: &Formula) -> Vec<(PrenexForm, Vec<DerivationStep>)> {
    let mut out: Vec<(PrenexForm, Vec<DerivationStep>)> = Vec::new();
    explore(psi2.clone(), prefix_len(psi2), Vec::new(), &mut out);
    let mut seen: Vec<Vec<Var>> = Vec::new();
    out.retain(|(form, _)| {
        if seen.contains(&form.prefix) {
            false
        } else {
            seen.push(form.prefix.clone());
            true
        }
    });
    out
}

fn prefix_len(f: &Formula) -> usize {
    let mut n = 0;
    let mut cur = f;
    while let Formula::Forall(_, b) | Formula::Exists(_, b) = cur {
        n += 1;
        cur = b;
    }
    n
}

fn chain_vars(f: &Formula) -> Vec<Var> {
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Forall(v, b) | Formula::Exists(v, b) = cur {
        vars.push(v.clone());
        cur = b;
    }
    vars
}

fn explore(
    mut cur: Formula,
    mut m: usize,
    mut steps: Vec<DerivationStep>,
    out: &mut Vec<(PrenexForm, Vec<DerivationStep>)>,
) {
    loop {
        let path: Path = vec![0; m];
        let node = cur.at(&path).expect("prefix chain leads to the conjunction");
        let Formula::And(a, b) = node else {
            // a single-literal chain is already prenex
            out.push((
                PrenexForm { prefix: chain_vars(&cur), matrix: node.clone() },
                steps,
            ));
            return;
        };
        let a_has_q = a.contains_forall() || a.contains_exists();
        let b_has_q = b.contains_forall() || b.contains_exists();
        if !a_has_q && !b_has_q {
            out.push((
                PrenexForm { prefix: chain_vars(&cur), matrix: node.clone() },
                steps,
            ));
            return;
        }
        let rule = if matches!(**a, Formula::Exists(_, _)) {
            RuleId::PN6
        } else if matches!(**b, Formula::Exists(_, _)) {
            RuleId::PN5
        } else if !a.contains_exists() && matches!(**b, Formula::Forall(_, _)) {
            RuleId::PN1
        } else if !b.contains_exists() && matches!(**a, Formula::Forall(_, _)) {
            RuleId::PN2
        } else {
            // both conjuncts still hold existentials behind universal heads
            let left = pull(&cur, &path, RuleId::PN2);
            let mut left_steps = steps.clone();
            left_steps.push(left.1);
            explore(left.0, m + 1, left_steps, out);
            let right = pull(&cur, &path, RuleId::PN1);
            steps.push(right.1);
            explore(right.0, m + 1, steps, out);
            return;
        };
        let (next, step) = pull(&cur, &path, rule);
        steps.push(step);
        cur = next;
        m += 1;
    }
}

fn pull(f: &Formula, path: &[usize], rule: RuleId) -> (Formula, DerivationStep) {
    let payload = Payload::Dir(Dir::Rl);
    let next = apply_rule(f, rule, path, &payload).expect("selected pull must apply");
    (
        next.clone(),
        DerivationStep { rule, path: path.to_vec(), payload, result: next },
    )
}

/// The optimal prenex forms: those in which, for every x list, the universal
/// quantifier stands to the right of each required existential. `y0`
/// requirements are treated as satisfied (the fresh existential is prepended
/// outermost by universal quantifier elimination).
pub fn optimal_prenexes(forms: &[PrenexForm], sigma: &SubstitutionList) -> Vec<PrenexForm> {
    forms
        .iter()
        .filter(|form| is_optimal(form, sigma))
        .cloned()
        .collect()
}

fn is_optimal(form: &PrenexForm, sigma: &SubstitutionList) -> bool {
    sigma.entries.iter().all(|entry| {
        let Some(xpos) = form.prefix.iter().position(|v| v == &entry.xvar) else {
            // variable absent from this prefix: no constraint to violate
            return true;
        };
        entry.yvars.iter().all(|y| {
            if y.is_y_zero() {
                return true;
            }
            match form.prefix.iter().position(|v| v == y) {
                Some(ypos) => ypos < xpos,
                None => false,
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::psi::connected_pairs;

    fn sigma_of(text: &str) -> SubstitutionList {
        let f = parse(text).unwrap();
        let pair = connected_pairs(&f).into_iter().next().expect("pair");
        substitution_list(&pair)
    }

    #[test]
    fn sigma_paper_example() {
        let s = sigma_of(
            "E y2 A x1 A x2 A x3 A x4 (F(x1,x2,x2,x4) & ~F(y2,x1,x3,x4))",
        );
        assert_eq!(s.to_string(), "{{x1,y2}, {x2,y2}, {x3,y2}, {x4,y0}}");
    }

    #[test]
    fn sigma_ambiguous_example() {
        let s = sigma_of("E y1 E y2 A x1 E y3 (F(y1,x1,y3) & ~F(x1,y2,y3))");
        assert_eq!(s.to_string(), "{{x1,y1,y2}}");
        assert!(s.is_ambiguous());
    }

    #[test]
    fn sigma_maximal_not_minimal() {
        let s = sigma_of("A x1 A x2 E y1 E y2 (F(x1,x1,y1) & ~F(x2,y2,x2))");
        assert_eq!(s.to_string(), "{{x1,y1,y2}, {x2,y1,y2}}");
    }

    #[test]
    fn prenex_enumeration_schema() {
        let f = parse(
            "E y1 A x1 E y2 A x2 F(y1,x1,y2,x2) & A x3 E y3 A x4 A x5 ~F(x3,y3,x4,x5)",
        )
        .unwrap();
        let forms = enumerate_optimized_prenexes(&f);
        assert_eq!(forms.len(), 2);
        let p0: Vec<String> = forms[0].prefix.iter().map(|v| v.to_string()).collect();
        let p1: Vec<String> = forms[1].prefix.iter().map(|v| v.to_string()).collect();
        assert_eq!(p0, vec!["y1", "x1", "y2", "x3", "y3", "x4", "x5", "x2"]);
        assert_eq!(p1, vec!["y1", "x3", "y3", "x1", "y2", "x4", "x5", "x2"]);
    }

    #[test]
    fn quantifier_free_matrix() {
        let f = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        let forms = enumerate_optimized_prenexes(&f);
        assert_eq!(forms.len(), 1);
        assert_eq!(forms[0].prefix, vec![Var::existential(1)]);
    }

    #[test]
    fn optimal_filter_schema_sigma() {
        let f = parse(
            "E y1 A x1 E y2 A x2 F(y1,x1,y2,x2) & A x3 E y3 A x4 A x5 ~F(x3,y3,x4,x5)",
        )
        .unwrap();
        let forms = enumerate_optimized_prenexes(&f);
        let pair = connected_pairs(&f).into_iter().next().unwrap();
        let sigma = substitution_list(&pair);
        assert_eq!(sigma.to_string(), "{{x1,y3}, {x2,y0}, {x3,y1}, {x4,y2}, {x5,y0}}");
        let optimal = optimal_prenexes(&forms, &sigma);
        assert_eq!(optimal.len(), 1);
        assert_eq!(optimal[0], forms[1]);
    }

    #[test]
    fn empty_sigma_accepts_all() {
        let f = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        let forms = enumerate_optimized_prenexes(&f);
        let sigma = SubstitutionList::default();
        assert_eq!(optimal_prenexes(&forms, &sigma).len(), forms.len());
    }
}
