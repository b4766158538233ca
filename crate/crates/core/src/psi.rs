use crate::calculus::{apply_rule, DerivationStep, Dir, Payload, RuleId};
use crate::formula::{Formula, LiteralOccurrence, Path, Polarity};
use crate::rectify::make_binders_distinct;
use crate::var::Var;
use std::collections::BTreeSet;

/// Two literal occurrences forming a connected pair: `l1` positive, `l2`
/// negative, same predicate and arity, and no position carrying two distinct
/// existential variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectedPair {
    pub l1: LiteralOccurrence,
    pub l2: LiteralOccurrence,
}

impl ConnectedPair {
    pub fn aligned(&self) -> impl Iterator<Item = (&Var, &Var)> {
        self.l1.args.iter().zip(self.l2.args.iter())
    }
}

/// All connected pairs of a rectified NNF, ordered by (positive path,
/// negative path).
pub fn connected_pairs(f: &Formula) -> Vec<ConnectedPair> {
    let lits = f.literals();
    let mut out = Vec::new();
    for l1 in lits.iter().filter(|l| l.polarity == Polarity::Pos) {
        for l2 in lits.iter().filter(|l| l.polarity == Polarity::Neg) {
            if l1.pred != l2.pred || l1.args.len() != l2.args.len() {
                continue;
            }
            let clash = l1.args.iter().zip(l2.args.iter()).any(|(a, b)| {
                a.is_existential() && b.is_existential() && a != b
            });
            if !clash {
                out.push(ConnectedPair { l1: l1.clone(), l2: l2.clone() });
            }
        }
    }
    out.sort_by(|a, b| (&a.l1.path, &a.l2.path).cmp(&(&b.l1.path, &b.l2.path)));
    out
}

/// The subformula ψ of a pair: all other literals deleted, quantifiers kept
/// only when they bind a variable of the pair, connectives collapsed to the
/// single one joining the two literals, with `|` turned into `&` at that
/// join.
pub fn extract_subformula(f: &Formula, p: &ConnectedPair) -> Formula {
    let mut keep_vars: BTreeSet<Var> = p.l1.args.iter().cloned().collect();
    keep_vars.extend(p.l2.args.iter().cloned());
    let keep_paths = [p.l1.path.clone(), p.l2.path.clone()];
    extract(f, &mut Vec::new(), &keep_paths, &keep_vars)
        .expect("pair literals occur in the host formula")
}

fn extract(
    f: &Formula,
    path: &mut Path,
    keep: &[Path; 2],
    keep_vars: &BTreeSet<Var>,
) -> Option<Formula> {
    match f {
        Formula::Atom(_) => keep.contains(path).then(|| f.clone()),
        Formula::Not(inner) => {
            if matches!(**inner, Formula::Atom(_)) {
                keep.contains(path).then(|| f.clone())
            } else {
                path.push(0);
                let r = extract(inner, path, keep, keep_vars);
                path.pop();
                r.map(Formula::not)
            }
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            path.push(0);
            let a = extract(l, path, keep, keep_vars);
            path.pop();
            path.push(1);
            let b = extract(r, path, keep, keep_vars);
            path.pop();
            match (a, b) {
                (None, None) => None,
                (Some(x), None) | (None, Some(x)) => Some(x),
                // the join of the two literals; a joining `|` becomes `&`
                (Some(x), Some(y)) => Some(Formula::and(x, y)),
            }
        }
        Formula::Forall(v, b) | Formula::Exists(v, b) => {
            path.push(0);
            let inner = extract(b, path, keep, keep_vars);
            path.pop();
            let inner = inner?;
            if keep_vars.contains(v) {
                Some(if matches!(f, Formula::Forall(_, _)) {
                    Formula::forall(v.clone(), inner)
                } else {
                    Formula::exists(v.clone(), inner)
                })
            } else {
                Some(inner)
            }
        }
    }
}

/// Scope minimization: PN1, PN2, PN5, PN6, PN9 in that priority, restarting
/// at PN1 after every hit, scanning leftmost-outermost; duplicated binders
/// are then renamed apart with fresh base indices.
pub fn minimize_scopes(psi: &Formula) -> Formula {
    minimize_scopes_traced(psi).0
}

/// Like [`minimize_scopes`] but also returns the derivation steps and the
/// number of PN applications (bounded by the quantifier count).
pub fn minimize_scopes_traced(psi: &Formula) -> (Formula, Vec<DerivationStep>, usize) {
    let mut cur = psi.clone();
    let mut steps = Vec::new();
    let mut pn_count = 0usize;
    const ORDER: [RuleId; 5] = [RuleId::PN1, RuleId::PN2, RuleId::PN5, RuleId::PN6, RuleId::PN9];
    'outer: loop {
        for rule in ORDER {
            if let Some(path) = find_pn(&cur, rule, &mut Vec::new()) {
                let payload = Payload::Dir(Dir::Lr);
                let next = apply_rule(&cur, rule, &path, &payload)
                    .expect("scanned pattern must apply");
                steps.push(DerivationStep { rule, path, payload, result: next.clone() });
                cur = next;
                pn_count += 1;
                continue 'outer;
            }
        }
        break;
    }
    let (fixed, renames) = make_binders_distinct(&cur);
    let mut replay = cur;
    for (path, old, new) in renames {
        let rule = if old.is_universal() { RuleId::Sub2 } else { RuleId::Sub1 };
        let payload = Payload::Sub { old, new };
        replay = apply_rule(&replay, rule, &path, &payload).expect("rename must apply");
        steps.push(DerivationStep { rule, path, payload, result: replay.clone() });
    }
    debug_assert_eq!(replay, fixed);
    (fixed, steps, pn_count)
}

fn find_pn(f: &Formula, rule: RuleId, path: &mut Path) -> Option<Path> {
    if pn_matches(f, rule) {
        return Some(path.clone());
    }
    let kids: &[&Formula] = &f.children();
    for (i, k) in kids.iter().enumerate() {
        path.push(if kids.len() == 1 { 0 } else { i });
        if let Some(hit) = find_pn(k, rule, path) {
            path.pop();
            return Some(hit);
        }
        path.pop();
    }
    None
}

fn pn_matches(f: &Formula, rule: RuleId) -> bool {
    match (rule, f) {
        (RuleId::PN1, Formula::Forall(v, b)) => {
            matches!(&**b, Formula::And(l, _) if !l.has_free(v))
        }
        (RuleId::PN2, Formula::Forall(v, b)) => {
            matches!(&**b, Formula::And(_, r) if !r.has_free(v))
        }
        (RuleId::PN5, Formula::Exists(v, b)) => {
            matches!(&**b, Formula::And(l, _) if !l.has_free(v))
        }
        (RuleId::PN6, Formula::Exists(v, b)) => {
            matches!(&**b, Formula::And(_, r) if !r.has_free(v))
        }
        (RuleId::PN9, Formula::Forall(v, b)) => {
            matches!(&**b, Formula::And(l, r) if l.has_free(v) && r.has_free(v))
        }
        _ => false,
    }
}

/// Maximal lists of universal variables linked through identical positions
/// of the pair, closed transitively. Sorted for determinism.
pub fn xx_lists(p: &ConnectedPair) -> Vec<BTreeSet<Var>> {
    let mut lists: Vec<BTreeSet<Var>> = Vec::new();
    for (a, b) in p.aligned() {
        if a.is_universal() && b.is_universal() {
            let mut set: BTreeSet<Var> = BTreeSet::new();
            set.insert(a.clone());
            set.insert(b.clone());
            lists.push(set);
        }
    }
    // merge overlapping sets to a fixpoint
    loop {
        let mut merged = false;
        'scan: for i in 0..lists.len() {
            for j in i + 1..lists.len() {
                if !lists[i].is_disjoint(&lists[j]) {
                    let other = lists.remove(j);
                    lists[i].extend(other);
                    merged = true;
                    break 'scan;
                }
            }
        }
        if !merged {
            break;
        }
    }
    lists.sort();
    lists
}

/// Aligned x/y position pairs: `xy` pairs have the universal variable in L1,
/// `yx` pairs have it in L2.
pub fn xy_yx_pairs(p: &ConnectedPair) -> (Vec<(Var, Var)>, Vec<(Var, Var)>) {
    let mut xy = Vec::new();
    let mut yx = Vec::new();
    for (a, b) in p.aligned() {
        if a.is_universal() && b.is_existential() {
            let pair = (a.clone(), b.clone());
            if !xy.contains(&pair) {
                xy.push(pair);
            }
        } else if a.is_existential() && b.is_universal() {
            let pair = (a.clone(), b.clone());
            if !yx.contains(&pair) {
                yx.push(pair);
            }
        }
    }
    xy.sort();
    yx.sort();
    (xy, yx)
}

/// Outcome of the ∃M guard.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmApplicability {
    Applicable,
    /// The multiplied variable sits at an identical position in both
    /// literals; separating it would disconnect the pair.
    BlockedDirect,
    /// An xx list is forced onto both copies of the multiplied variable via
    /// an xy and a yx pair, with every binder of the list inside its scope.
    BlockedIndirect,
}

/// Decide whether multiplying the existential quantifier at `path` is
/// sat-equivalent. The node must be an existential whose scope, behind a
/// possibly empty run of further existentials, is a conjunction mentioning
/// its variable on both sides.
pub fn em_applicable(
    f: &Formula,
    path: &[usize],
) -> Result<EmApplicability, crate::calculus::RuleError> {
    use crate::calculus::RuleError;
    let node = f.at(path).ok_or_else(|| RuleError::PatternMismatch {
        rule: RuleId::ExistsM,
        path: crate::formula::path_to_string(path),
        msg: "no subformula at this position".into(),
    })?;
    let Some(mu) = em_shape(node) else {
        return Err(RuleError::PatternMismatch {
            rule: RuleId::ExistsM,
            path: crate::formula::path_to_string(path),
            msg: "not an existential run over a conjunction mentioning the variable twice".into(),
        });
    };
    let Some(pair) = two_literal_pair(f) else {
        // no connected pair: the formula cannot be contradictory, so the
        // multiplication is vacuously sat-equivalent
        return Ok(EmApplicability::Applicable);
    };
    if pair.aligned().any(|(a, b)| a == mu && b == mu) {
        return Ok(EmApplicability::BlockedDirect);
    }
    let (xy, yx) = xy_yx_pairs(&pair);
    let xy_partners: BTreeSet<&Var> =
        xy.iter().filter(|(_, y)| y == mu).map(|(x, _)| x).collect();
    let yx_partners: BTreeSet<&Var> =
        yx.iter().filter(|(y, _)| y == mu).map(|(_, x)| x).collect();
    for list in xx_lists(&pair) {
        let two_distinct = list.iter().any(|v1| {
            xy_partners.contains(v1)
                && list.iter().any(|v2| v2 != v1 && yx_partners.contains(v2))
        });
        if two_distinct && list.iter().all(|v| binder_inside(f, path, v)) {
            return Ok(EmApplicability::BlockedIndirect);
        }
    }
    Ok(EmApplicability::Applicable)
}

// Exists(mu, E v1 … E vk (A ∧ B)) with mu free in both conjuncts.
fn em_shape(node: &Formula) -> Option<&Var> {
    let Formula::Exists(mu, body) = node else { return None };
    let mut cur: &Formula = body;
    loop {
        match cur {
            Formula::Exists(_, b) => cur = b,
            Formula::And(l, r) => {
                return (l.has_free(mu) && r.has_free(mu)).then_some(mu);
            }
            _ => return None,
        }
    }
}

fn binder_inside(f: &Formula, scope_path: &[usize], v: &Var) -> bool {
    fn find_binder(f: &Formula, v: &Var, path: &mut Path) -> Option<Path> {
        if let Formula::Forall(b, _) | Formula::Exists(b, _) = f {
            if b == v {
                return Some(path.clone());
            }
        }
        let kids = f.children();
        for (i, k) in kids.iter().enumerate() {
            path.push(if kids.len() == 1 { 0 } else { i });
            if let Some(hit) = find_binder(k, v, path) {
                path.pop();
                return Some(hit);
            }
            path.pop();
        }
        None
    }
    match find_binder(f, v, &mut Vec::new()) {
        Some(p) => p.len() > scope_path.len() && p[..scope_path.len()] == *scope_path,
        None => false,
    }
}

/// The connected pair of a two-literal formula, if its literals form one.
pub fn two_literal_pair(f: &Formula) -> Option<ConnectedPair> {
    let lits = f.literals();
    if lits.len() != 2 {
        return None;
    }
    connected_pairs(f).into_iter().next()
}

/// ∃M-optimization: alternate scope minimization with guarded existential
/// multiplication until neither changes the formula.
pub fn em_optimize(psi: &Formula) -> Formula {
    em_optimize_traced(psi).0
}

/// Traced variant; also reports the number of ∃M applications and the
/// positions (in the formula current at the time) where they fired.
pub fn em_optimize_traced(psi: &Formula) -> (Formula, Vec<DerivationStep>, usize) {
    let mut steps = Vec::new();
    let mut em_count = 0usize;
    let mut cur = psi.clone();
    loop {
        let (minimized, min_steps, _) = minimize_scopes_traced(&cur);
        steps.extend(min_steps);
        cur = minimized;
        let Some(cand_path) = next_em_position(&cur) else { break };
        let next = apply_rule(&cur, RuleId::ExistsM, &cand_path, &Payload::None)
            .expect("guarded candidate must apply");
        steps.push(DerivationStep {
            rule: RuleId::ExistsM,
            path: cand_path,
            payload: Payload::None,
            result: next.clone(),
        });
        cur = next;
        em_count += 1;
    }
    (cur, steps, em_count)
}

// Outermost existential of the run directly above the conjunction whose
// multiplication the guard permits.
fn next_em_position(f: &Formula) -> Option<Path> {
    let and_path = top_and_path(f)?;
    let mut chain: Vec<Path> = Vec::new();
    let mut len = and_path.len();
    while len > 0 {
        let parent = &and_path[..len - 1];
        match f.at(parent) {
            Some(Formula::Exists(_, _)) => {
                chain.push(parent.to_vec());
                len -= 1;
            }
            _ => break,
        }
    }
    // chain is inner-to-outer; try outermost first
    for cand in chain.into_iter().rev() {
        if em_applicable(f, &cand) == Ok(EmApplicability::Applicable) {
            return Some(cand);
        }
    }
    None
}

fn top_and_path(f: &Formula) -> Option<Path> {
    let mut path = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::And(_, _) => return Some(path),
            Formula::Forall(_, b) | Formula::Exists(_, b) => {
                path.push(0);
                cur = b;
            }
            _ => return None,
        }
    }
}

/// The alternative route that replaces every ∃M with a single conjunct
/// multiplication: duplicate the outermost multiplied existential, keep only
/// one literal per copy together with its private quantifiers, and minimize
/// scopes again. Degenerates to plain scope minimization when no ∃M fires.
pub fn em_free_route(psi: &Formula) -> Formula {
    let (psi1, _, _) = minimize_scopes_traced(psi);
    let Some(mu_path) = next_em_position(&psi1) else {
        return psi1;
    };
    let doubled = apply_rule(&psi1, RuleId::AndI, &mu_path, &Payload::None)
        .expect("conjunct multiplication always applies");
    let left_path: Path = mu_path.iter().chain([0].iter()).cloned().collect();
    let right_path: Path = mu_path.iter().chain([1].iter()).cloned().collect();
    let left = keep_only(doubled.at(&left_path).unwrap(), Polarity::Pos);
    let right = keep_only(doubled.at(&right_path).unwrap(), Polarity::Neg);
    let pruned = doubled
        .replace_at(&left_path, left)
        .unwrap()
        .replace_at(&right_path, right)
        .unwrap();
    minimize_scopes_traced(&pruned).0
}

// Keep the literal of the given polarity, deleting the other one and every
// quantifier binding only its variables.
fn keep_only(f: &Formula, keep: Polarity) -> Formula {
    let lits = f.literals();
    let target = lits
        .iter()
        .find(|l| l.polarity == keep)
        .expect("copy contains a literal of each polarity");
    let vars: BTreeSet<Var> = target.args.iter().cloned().collect();
    let paths = [target.path.clone(), target.path.clone()];
    extract(f, &mut Vec::new(), &paths, &vars).expect("kept literal exists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn pair_of(f: &Formula) -> ConnectedPair {
        connected_pairs(f).into_iter().next().expect("connected pair")
    }

    #[test]
    fn connected_pairs_conditions() {
        let f = parse("E y1 (F(y1) & ~G(y1))").unwrap();
        assert!(connected_pairs(&f).is_empty());
        let g = parse("E y1 E y2 (F(y1) & ~F(y2))").unwrap();
        assert!(connected_pairs(&g).is_empty());
        let h = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        assert_eq!(connected_pairs(&h).len(), 1);
    }

    #[test]
    fn minimize_scopes_paper_table() {
        let f = parse("E y1 A x1 E y2 A x2 E y3 (F(x1,x2,y1,y1) & ~F(y2,y3,x1,y1))").unwrap();
        let (out, _, pn) = minimize_scopes_traced(&f);
        assert_eq!(
            out.to_string(),
            "E y1 (A x1 A x2 F(x1,x2,y1,y1) & A x3 E y2 E y3 ~F(y2,y3,x3,y1))"
        );
        assert!(pn <= f.quantifier_count());
    }

    #[test]
    fn minimize_scopes_fixpoints() {
        let f = parse("F(y1) & G(y1)");
        assert!(f.is_err()); // unbound; quantifier-free formulas are built by hand
        let g = parse("A x1 E y1 (A x3 F(y1,x1,x3) & A x2 ~F(x2,y1,y1))").unwrap();
        assert_eq!(minimize_scopes(&g), g);
    }

    #[test]
    fn xx_lists_merge_transitively() {
        let f =
            parse("E y1 (A x1 A x2 F(y1,x1,x1,x2,x2) & A x3 A x4 ~F(x3,x3,x4,x4,y1))").unwrap();
        let lists = xx_lists(&pair_of(&f));
        assert_eq!(lists.len(), 1);
        let names: Vec<String> = lists[0].iter().map(|v| v.to_string()).collect();
        assert_eq!(names, vec!["x1", "x2", "x3", "x4"]);
        let (xy, yx) = xy_yx_pairs(&pair_of(&f));
        assert_eq!(xy, vec![(Var::universal(2), Var::existential(1))]);
        assert_eq!(yx, vec![(Var::existential(1), Var::universal(3))]);
    }

    #[test]
    fn xx_lists_simple_cases() {
        let f = parse("A x1 A x2 A x3 A x4 (F(x1,x2) & ~F(x3,x4))").unwrap();
        let lists = xx_lists(&pair_of(&f));
        assert_eq!(lists.len(), 2);
        let g = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        assert!(xx_lists(&pair_of(&g)).is_empty());
    }

    #[test]
    fn em_guard_direct_case() {
        let f = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        assert_eq!(em_applicable(&f, &[]).unwrap(), EmApplicability::BlockedDirect);
    }

    #[test]
    fn em_guard_indirect_case() {
        let f =
            parse("E y1 (A x1 A x2 F(y1,x1,x1,x2,x2) & A x3 A x4 ~F(x3,x3,x4,x4,y1))").unwrap();
        assert_eq!(em_applicable(&f, &[]).unwrap(), EmApplicability::BlockedIndirect);
    }

    #[test]
    fn em_guard_allows_embedded_example() {
        let f = parse("A x1 E y1 (A x3 F(y1,x1,x3) & A x2 ~F(x2,y1,y1))").unwrap();
        assert_eq!(em_applicable(&f, &[0]).unwrap(), EmApplicability::Applicable);
    }

    #[test]
    fn em_optimize_embedded_example() {
        let f = parse("A x1 E y1 (A x3 F(y1,x1,x3) & A x2 ~F(x2,y1,y1))").unwrap();
        let out = em_optimize(&f);
        assert_eq!(
            out.to_string(),
            "A x1 E y1_1 A x3 F(y1_1,x1,x3) & E y1_2 A x2 ~F(x2,y1_2,y1_2)"
        );
    }

    #[test]
    fn em_optimize_blocked_cases_unchanged() {
        let direct = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        assert_eq!(em_optimize(&direct), direct);
        let maxsep = parse("E y1 E y2 A x1 E y3 (F(y1,x1,y3) & ~F(x1,y2,y3))").unwrap();
        assert_eq!(em_optimize(&maxsep), maxsep);
    }

    #[test]
    fn extraction_from_wedge_host() {
        let f = parse(
            "A x1 E y2 (~G(y2,y2) & E y1 (A x3 F(y1,x1,x3) & A x2 ~F(x2,y1,y1)) & G(x1,y2))",
        )
        .unwrap();
        let pairs = connected_pairs(&f);
        assert_eq!(pairs.len(), 2);
        let texts: Vec<String> = pairs
            .iter()
            .map(|p| extract_subformula(&f, p).to_string())
            .collect();
        assert!(texts.contains(&"A x1 E y2 (~G(y2,y2) & G(x1,y2))".to_string()));
        assert!(
            texts.contains(&"A x1 E y1 (A x3 F(y1,x1,x3) & A x2 ~F(x2,y1,y1))".to_string())
        );
    }

    #[test]
    fn em_free_route_matches_em_optimize() {
        let f = parse("A x1 E y1 (A x3 F(y1,x1,x3) & A x2 ~F(x2,y1,y1))").unwrap();
        let via_em = em_optimize(&f);
        let via_andi = em_free_route(&f);
        assert!(crate::canon::alpha_eq(&via_em, &via_andi), "{via_em} vs {via_andi}");
    }
}
