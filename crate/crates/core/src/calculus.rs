use crate::canon::eq_commuted;
use crate::foldnf::dnf_matrix;
use crate::formula::{path_from_str, path_to_string, Formula, Path, Polarity};
use crate::subscript::max_subscript;
use crate::var::{Var, VarKind};
use std::fmt;
use thiserror::Error;

/// The rewrite rules of the NNF-calculus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RuleId {
    PN1,
    PN2,
    PN3,
    PN4,
    PN5,
    PN6,
    PN7,
    PN8,
    PN9,
    PN10,
    Sub1,
    Sub2,
    ForallE,
    AndI,
    ExistsM,
    Sat1,
    Sat2,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleId::PN1 => "PN1",
            RuleId::PN2 => "PN2",
            RuleId::PN3 => "PN3",
            RuleId::PN4 => "PN4",
            RuleId::PN5 => "PN5",
            RuleId::PN6 => "PN6",
            RuleId::PN7 => "PN7",
            RuleId::PN8 => "PN8",
            RuleId::PN9 => "PN9",
            RuleId::PN10 => "PN10",
            RuleId::Sub1 => "SUB1",
            RuleId::Sub2 => "SUB2",
            RuleId::ForallE => "ForallE",
            RuleId::AndI => "AndI",
            RuleId::ExistsM => "ExistsM",
            RuleId::Sat1 => "SAT1",
            RuleId::Sat2 => "SAT2",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for RuleId {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "PN1" => RuleId::PN1,
            "PN2" => RuleId::PN2,
            "PN3" => RuleId::PN3,
            "PN4" => RuleId::PN4,
            "PN5" => RuleId::PN5,
            "PN6" => RuleId::PN6,
            "PN7" => RuleId::PN7,
            "PN8" => RuleId::PN8,
            "PN9" => RuleId::PN9,
            "PN10" => RuleId::PN10,
            "SUB1" => RuleId::Sub1,
            "SUB2" => RuleId::Sub2,
            "ForallE" => RuleId::ForallE,
            "AndI" => RuleId::AndI,
            "ExistsM" => RuleId::ExistsM,
            "SAT1" => RuleId::Sat1,
            "SAT2" => RuleId::Sat2,
            _ => return Err(()),
        })
    }
}

/// PN laws are equivalences; `Lr` reads the table left to right (quantifier
/// driven inward), `Rl` right to left (quantifier pulled out).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Lr,
    Rl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    None,
    Dir(Dir),
    /// SUB1/SUB2: rename `old` (the binder at the position) to `new`.
    Sub { old: Var, new: Var },
    /// ForallE: eliminate `universal`, substituting `existential` for it.
    /// `existential = y0` with `y0` absent from the formula is the
    /// fresh-variable case and prepends `E y0` to the whole formula.
    ForallElim { universal: Var, existential: Var },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {rule} does not match at {path}: {msg}")]
    PatternMismatch { rule: RuleId, path: String, msg: String },
    #[error("side condition of {rule} violated at {path}: {msg}")]
    SideConditionViolated { rule: RuleId, path: String, msg: String },
}

fn mismatch(rule: RuleId, path: &[usize], msg: impl Into<String>) -> RuleError {
    RuleError::PatternMismatch { rule, path: path_to_string(path), msg: msg.into() }
}

fn side(rule: RuleId, path: &[usize], msg: impl Into<String>) -> RuleError {
    RuleError::SideConditionViolated { rule, path: path_to_string(path), msg: msg.into() }
}

/// Apply one named rule at an explicit position. Deterministic; every
/// precondition failure is reported rather than silently repaired.
pub fn apply_rule(
    f: &Formula,
    rule: RuleId,
    path: &[usize],
    payload: &Payload,
) -> Result<Formula, RuleError> {
    let node = f
        .at(path)
        .ok_or_else(|| mismatch(rule, path, "no subformula at this position"))?;
    match rule {
        RuleId::PN1 | RuleId::PN2 | RuleId::PN5 | RuleId::PN6 => {
            let dir = dir_of(rule, path, payload)?;
            let rewritten = pn_conj(rule, dir, node, path)?;
            Ok(f.replace_at(path, rewritten).unwrap())
        }
        RuleId::PN3 | RuleId::PN4 | RuleId::PN7 | RuleId::PN8 => {
            let dir = dir_of(rule, path, payload)?;
            let rewritten = pn_disj(rule, dir, node, path)?;
            Ok(f.replace_at(path, rewritten).unwrap())
        }
        RuleId::PN9 => {
            let dir = dir_of(rule, path, payload)?;
            let rewritten = pn9(dir, node, path)?;
            Ok(f.replace_at(path, rewritten).unwrap())
        }
        RuleId::PN10 => {
            let dir = dir_of(rule, path, payload)?;
            let rewritten = pn10(dir, node, path)?;
            Ok(f.replace_at(path, rewritten).unwrap())
        }
        RuleId::Sub1 | RuleId::Sub2 => {
            let Payload::Sub { old, new } = payload else {
                return Err(mismatch(rule, path, "SUB payload required"));
            };
            let rewritten = sub(rule, node, old, new, path)?;
            Ok(f.replace_at(path, rewritten).unwrap())
        }
        RuleId::ForallE => {
            let Payload::ForallElim { universal, existential } = payload else {
                return Err(mismatch(rule, path, "ForallE payload required"));
            };
            forall_e(f, path, node, universal, existential)
        }
        RuleId::AndI => {
            let doubled = max_subscript(&Formula::and(node.clone(), node.clone()));
            Ok(f.replace_at(path, doubled).unwrap())
        }
        RuleId::ExistsM => {
            let rewritten = exists_m(node, path)?;
            Ok(f.replace_at(path, rewritten).unwrap())
        }
        RuleId::Sat1 | RuleId::Sat2 => Err(mismatch(
            rule,
            path,
            "sat rules operate on the pruning pipeline's marked formulas only",
        )),
    }
}

fn dir_of(rule: RuleId, path: &[usize], payload: &Payload) -> Result<Dir, RuleError> {
    match payload {
        Payload::Dir(d) => Ok(*d),
        _ => Err(mismatch(rule, path, "direction payload required")),
    }
}

// PN1/PN2/PN5/PN6: quantifier vs conjunction with a variable-free side.
fn pn_conj(rule: RuleId, dir: Dir, node: &Formula, path: &[usize]) -> Result<Formula, RuleError> {
    let universal = matches!(rule, RuleId::PN1 | RuleId::PN2);
    let left_side_free = matches!(rule, RuleId::PN1 | RuleId::PN5); // the `A` part is the left conjunct
    match dir {
        Dir::Lr => {
            let (v, body) = expect_quant(rule, node, universal, path)?;
            let Formula::And(l, r) = body else {
                return Err(mismatch(rule, path, "quantifier scope is not a conjunction"));
            };
            let (a, b) = if left_side_free { (l, r) } else { (r, l) };
            if a.has_free(v) {
                return Err(side(rule, path, format!("{} occurs in the quantifier-free part", v)));
            }
            let quantified = mk_quant(universal, v.clone(), (**b).clone());
            Ok(if left_side_free {
                Formula::and((**a).clone(), quantified)
            } else {
                Formula::and(quantified, (**a).clone())
            })
        }
        Dir::Rl => {
            let Formula::And(l, r) = node else {
                return Err(mismatch(rule, path, "not a conjunction"));
            };
            let (a, q) = if left_side_free { (l, r) } else { (r, l) };
            let (v, b) = expect_quant(rule, q, universal, path)?;
            if a.has_free(v) {
                return Err(side(rule, path, format!("{} occurs in the other conjunct", v)));
            }
            let inner = if left_side_free {
                Formula::and((**a).clone(), b.clone())
            } else {
                Formula::and(b.clone(), (**a).clone())
            };
            Ok(mk_quant(universal, v.clone(), inner))
        }
    }
}

// PN3/PN4/PN7/PN8: same shapes over disjunction.
fn pn_disj(rule: RuleId, dir: Dir, node: &Formula, path: &[usize]) -> Result<Formula, RuleError> {
    let universal = matches!(rule, RuleId::PN3 | RuleId::PN4);
    let left_side_free = matches!(rule, RuleId::PN3 | RuleId::PN7);
    match dir {
        Dir::Lr => {
            let (v, body) = expect_quant(rule, node, universal, path)?;
            let Formula::Or(l, r) = body else {
                return Err(mismatch(rule, path, "quantifier scope is not a disjunction"));
            };
            let (a, b) = if left_side_free { (l, r) } else { (r, l) };
            if a.has_free(v) {
                return Err(side(rule, path, format!("{} occurs in the quantifier-free part", v)));
            }
            let quantified = mk_quant(universal, v.clone(), (**b).clone());
            Ok(if left_side_free {
                Formula::or((**a).clone(), quantified)
            } else {
                Formula::or(quantified, (**a).clone())
            })
        }
        Dir::Rl => {
            let Formula::Or(l, r) = node else {
                return Err(mismatch(rule, path, "not a disjunction"));
            };
            let (a, q) = if left_side_free { (l, r) } else { (r, l) };
            let (v, b) = expect_quant(rule, q, universal, path)?;
            if a.has_free(v) {
                return Err(side(rule, path, format!("{} occurs in the other disjunct", v)));
            }
            let inner = if left_side_free {
                Formula::or((**a).clone(), b.clone())
            } else {
                Formula::or(b.clone(), (**a).clone())
            };
            Ok(mk_quant(universal, v.clone(), inner))
        }
    }
}

fn pn9(dir: Dir, node: &Formula, path: &[usize]) -> Result<Formula, RuleError> {
    match dir {
        Dir::Lr => {
            let (v, body) = expect_quant(RuleId::PN9, node, true, path)?;
            let Formula::And(l, r) = body else {
                return Err(mismatch(RuleId::PN9, path, "quantifier scope is not a conjunction"));
            };
            if !l.has_free(v) || !r.has_free(v) {
                return Err(side(
                    RuleId::PN9,
                    path,
                    format!("{} must occur in both conjuncts", v),
                ));
            }
            Ok(Formula::and(
                Formula::forall(v.clone(), (**l).clone()),
                Formula::forall(v.clone(), (**r).clone()),
            ))
        }
        Dir::Rl => match node {
            Formula::And(l, r) => match (&**l, &**r) {
                (Formula::Forall(v1, b1), Formula::Forall(v2, b2)) if v1 == v2 => Ok(
                    Formula::forall(v1.clone(), Formula::and((**b1).clone(), (**b2).clone())),
                ),
                _ => Err(mismatch(RuleId::PN9, path, "not a conjunction of equal universals")),
            },
            _ => Err(mismatch(RuleId::PN9, path, "not a conjunction")),
        },
    }
}

fn pn10(dir: Dir, node: &Formula, path: &[usize]) -> Result<Formula, RuleError> {
    match dir {
        Dir::Lr => {
            let (v, body) = expect_quant(RuleId::PN10, node, false, path)?;
            let Formula::Or(l, r) = body else {
                return Err(mismatch(RuleId::PN10, path, "quantifier scope is not a disjunction"));
            };
            let _ = v;
            Ok(Formula::or(
                Formula::exists(v.clone(), (**l).clone()),
                Formula::exists(v.clone(), (**r).clone()),
            ))
        }
        Dir::Rl => match node {
            Formula::Or(l, r) => match (&**l, &**r) {
                (Formula::Exists(v1, b1), Formula::Exists(v2, b2)) if v1 == v2 => Ok(
                    Formula::exists(v1.clone(), Formula::or((**b1).clone(), (**b2).clone())),
                ),
                _ => Err(mismatch(RuleId::PN10, path, "not a disjunction of equal existentials")),
            },
            _ => Err(mismatch(RuleId::PN10, path, "not a disjunction")),
        },
    }
}

fn sub(
    rule: RuleId,
    node: &Formula,
    old: &Var,
    new: &Var,
    path: &[usize],
) -> Result<Formula, RuleError> {
    let universal = rule == RuleId::Sub2;
    let (v, body) = expect_quant(rule, node, universal, path)?;
    if v != old {
        return Err(mismatch(rule, path, format!("binder is {}, not {}", v, old)));
    }
    if body.all_vars().contains(new) {
        return Err(side(rule, path, format!("{} already occurs in the scope", new)));
    }
    Ok(mk_quant(universal, new.clone(), body.subst_var(old, new)))
}

fn forall_e(
    f: &Formula,
    path: &[usize],
    node: &Formula,
    universal: &Var,
    existential: &Var,
) -> Result<Formula, RuleError> {
    let rule = RuleId::ForallE;
    let Formula::Forall(v, body) = node else {
        return Err(mismatch(rule, path, "not a universal quantifier"));
    };
    if v != universal {
        return Err(mismatch(rule, path, format!("binder is {}, not {}", v, universal)));
    }
    if existential.kind != VarKind::Existential {
        return Err(side(rule, path, "replacement variable must be existential"));
    }
    if binds_somewhere(body, existential) {
        return Err(side(rule, path, format!("{} is re-bound inside the scope", existential)));
    }
    let substituted = body.subst_var(v, existential);
    // in-scope case: some ancestor existential binds the replacement
    let mut in_scope = false;
    for i in 0..path.len() {
        if let Some(Formula::Exists(anc, _)) = f.at(&path[..i]) {
            if anc == existential {
                in_scope = true;
                break;
            }
        }
    }
    if in_scope {
        return Ok(f.replace_at(path, substituted).unwrap());
    }
    if existential.is_y_zero() {
        if f.all_vars().contains(&Var::y_zero()) {
            return Err(side(rule, path, "y0 already occurs in the formula"));
        }
        let replaced = f.replace_at(path, substituted).unwrap();
        return Ok(Formula::exists(Var::y_zero(), replaced));
    }
    Err(side(
        rule,
        path,
        format!("no enclosing existential quantifier binds {}", existential),
    ))
}

// ∃M, allowing the multiplied quantifier to stand above further existential
// binders of the run (their commutation is a presumed law).
fn exists_m(node: &Formula, path: &[usize]) -> Result<Formula, RuleError> {
    let rule = RuleId::ExistsM;
    let Formula::Exists(mu, body) = node else {
        return Err(mismatch(rule, path, "not an existential quantifier"));
    };
    let mut chain: Vec<Var> = Vec::new();
    let mut cur: &Formula = body;
    loop {
        match cur {
            Formula::Exists(v, b) => {
                chain.push(v.clone());
                cur = b;
            }
            Formula::And(l, r) => {
                if !l.has_free(mu) || !r.has_free(mu) {
                    return Err(side(
                        rule,
                        path,
                        format!("{} must occur in both conjuncts", mu),
                    ));
                }
                let mu1 = mu.with_sub(1);
                let mu2 = mu.with_sub(2);
                let mut out = Formula::and(
                    Formula::exists(mu1.clone(), l.subst_var(mu, &mu1)),
                    Formula::exists(mu2.clone(), r.subst_var(mu, &mu2)),
                );
                for v in chain.into_iter().rev() {
                    out = Formula::exists(v, out);
                }
                return Ok(max_subscript(&out));
            }
            _ => {
                return Err(mismatch(
                    rule,
                    path,
                    "scope is not a conjunction under an existential run",
                ))
            }
        }
    }
}

fn expect_quant<'a>(
    rule: RuleId,
    node: &'a Formula,
    universal: bool,
    path: &[usize],
) -> Result<(&'a Var, &'a Formula), RuleError> {
    match node {
        Formula::Forall(v, b) if universal => Ok((v, b)),
        Formula::Exists(v, b) if !universal => Ok((v, b)),
        _ => Err(mismatch(
            rule,
            path,
            if universal { "not a universal quantifier" } else { "not an existential quantifier" },
        )),
    }
}

fn mk_quant(universal: bool, v: Var, body: Formula) -> Formula {
    if universal {
        Formula::forall(v, body)
    } else {
        Formula::exists(v, body)
    }
}

fn binds_somewhere(f: &Formula, v: &Var) -> bool {
    match f {
        Formula::Forall(b, body) | Formula::Exists(b, body) => b == v || binds_somewhere(body, v),
        _ => f.children().iter().any(|c| binds_somewhere(c, v)),
    }
}

/// True iff the formula has no universal quantifier and every disjunct of
/// its DNF matrix contains an atom together with its negation on identical
/// argument lists.
pub fn is_explicit_contradiction(f: &Formula) -> bool {
    if f.contains_forall() {
        return false;
    }
    let (_, matrix) = dnf_matrix(f);
    matrix.iter().all(|row| {
        row.iter().any(|lit| {
            lit.polarity == Polarity::Pos
                && row.iter().any(|other| {
                    other.polarity == Polarity::Neg
                        && other.pred == lit.pred
                        && other.args == lit.args
                })
        })
    })
}

/// One derivation step: rule, position, rule-specific payload, and the
/// formula obtained. Verification re-derives the result instead of trusting
/// it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationStep {
    pub rule: RuleId,
    pub path: Path,
    pub payload: Payload,
    pub result: Formula,
}

/// A replayable refutation: the initial formula, the steps, and the claimed
/// final formula, which must be an explicit contradiction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub initial: Formula,
    pub steps: Vec<DerivationStep>,
    pub final_formula: Formula,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    Verified,
    Rejected { step: usize, reason: String },
}

impl VerifyOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, VerifyOutcome::Verified)
    }
}

/// Replay every step and check the final formula: each stored result must
/// re-derive exactly, the stored final must equal the derived one modulo
/// quantifier-run commutation, and the final must be an explicit
/// contradiction.
pub fn verify_certificate(cert: &Certificate) -> VerifyOutcome {
    let mut cur = cert.initial.clone();
    for (i, step) in cert.steps.iter().enumerate() {
        match apply_rule(&cur, step.rule, &step.path, &step.payload) {
            Ok(next) => {
                if next != step.result {
                    return VerifyOutcome::Rejected {
                        step: i,
                        reason: format!(
                            "stored result differs from re-derived formula: {} vs {}",
                            step.result, next
                        ),
                    };
                }
                cur = next;
            }
            Err(e) => {
                return VerifyOutcome::Rejected { step: i, reason: e.to_string() };
            }
        }
    }
    if !eq_commuted(&cur, &cert.final_formula) {
        return VerifyOutcome::Rejected {
            step: cert.steps.len(),
            reason: "final formula does not match the derivation".into(),
        };
    }
    if !is_explicit_contradiction(&cur) {
        return VerifyOutcome::Rejected {
            step: cert.steps.len(),
            reason: "final formula is not an explicit contradiction".into(),
        };
    }
    VerifyOutcome::Verified
}

/// A step as written in the line-oriented certificate text, before results
/// are re-derived.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepSpec {
    pub rule: RuleId,
    pub path: Path,
    pub payload: Payload,
}

/// Line-oriented certificate document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateDocument {
    pub initial: Formula,
    pub steps: Vec<StepSpec>,
    pub final_formula: Formula,
}

impl CertificateDocument {
    /// Replay the document; on success, materialize the certificate with
    /// per-step results.
    pub fn replay(&self) -> Result<Certificate, VerifyOutcome> {
        let mut cur = self.initial.clone();
        let mut steps = Vec::new();
        for (i, s) in self.steps.iter().enumerate() {
            match apply_rule(&cur, s.rule, &s.path, &s.payload) {
                Ok(next) => {
                    steps.push(DerivationStep {
                        rule: s.rule,
                        path: s.path.clone(),
                        payload: s.payload.clone(),
                        result: next.clone(),
                    });
                    cur = next;
                }
                Err(e) => return Err(VerifyOutcome::Rejected { step: i, reason: e.to_string() }),
            }
        }
        Ok(Certificate {
            initial: self.initial.clone(),
            steps,
            final_formula: self.final_formula.clone(),
        })
    }
}

pub fn payload_to_string(p: &Payload) -> String {
    match p {
        Payload::None => String::new(),
        Payload::Dir(Dir::Lr) => " dir=lr".into(),
        Payload::Dir(Dir::Rl) => " dir=rl".into(),
        Payload::Sub { old, new } => format!(" old={} new={}", old, new),
        Payload::ForallElim { universal, existential } => {
            format!(" x={} y={}", universal, existential)
        }
    }
}

/// Render a certificate in the text format: `initial:` line, one
/// `<rule> @ <path> <payload>` line per step (path `-` is the root), and a
/// `final:` line.
pub fn certificate_to_text(cert: &Certificate) -> String {
    let mut out = String::new();
    out.push_str(&format!("initial: {}\n", cert.initial));
    for s in &cert.steps {
        out.push_str(&format!(
            "{} @ {}{}\n",
            s.rule,
            path_to_string(&s.path),
            payload_to_string(&s.payload)
        ));
    }
    out.push_str(&format!("final: {}\n", cert.final_formula));
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: formula error: {source}")]
    Formula {
        line: usize,
        #[source]
        source: crate::parse::ParseError,
    },
}

pub fn certificate_from_text(text: &str) -> Result<CertificateDocument, CertificateParseError> {
    let mut initial = None;
    let mut final_formula = None;
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("initial:") {
            let f = crate::parse::parse_allow_y0(rest.trim())
                .map_err(|e| CertificateParseError::Formula { line: line_no, source: e })?;
            initial = Some(f);
        } else if let Some(rest) = line.strip_prefix("final:") {
            let f = crate::parse::parse_allow_y0(rest.trim())
                .map_err(|e| CertificateParseError::Formula { line: line_no, source: e })?;
            final_formula = Some(f);
        } else {
            steps.push(parse_step_line(line, line_no)?);
        }
    }
    let initial = initial.ok_or(CertificateParseError::Malformed {
        line: 0,
        msg: "missing initial: line".into(),
    })?;
    let final_formula = final_formula.ok_or(CertificateParseError::Malformed {
        line: 0,
        msg: "missing final: line".into(),
    })?;
    Ok(CertificateDocument { initial, steps, final_formula })
}

fn parse_step_line(line: &str, line_no: usize) -> Result<StepSpec, CertificateParseError> {
    let bad = |msg: &str| CertificateParseError::Malformed { line: line_no, msg: msg.into() };
    let mut parts = line.split_whitespace();
    let rule: RuleId = parts
        .next()
        .ok_or_else(|| bad("empty step"))?
        .parse()
        .map_err(|_| bad("unknown rule"))?;
    if parts.next() != Some("@") {
        return Err(bad("expected '@' after rule name"));
    }
    let path = path_from_str(parts.next().ok_or_else(|| bad("missing path"))?)
        .ok_or_else(|| bad("malformed path"))?;
    let mut kv = std::collections::BTreeMap::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| bad("payload must be k=v"))?;
        kv.insert(k.to_string(), v.to_string());
    }
    let payload = match rule {
        RuleId::Sub1 | RuleId::Sub2 => Payload::Sub {
            old: parse_payload_var(kv.get("old").ok_or_else(|| bad("missing old="))?)
                .ok_or_else(|| bad("bad old= variable"))?,
            new: parse_payload_var(kv.get("new").ok_or_else(|| bad("missing new="))?)
                .ok_or_else(|| bad("bad new= variable"))?,
        },
        RuleId::ForallE => Payload::ForallElim {
            universal: parse_payload_var(kv.get("x").ok_or_else(|| bad("missing x="))?)
                .ok_or_else(|| bad("bad x= variable"))?,
            existential: parse_payload_var(kv.get("y").ok_or_else(|| bad("missing y="))?)
                .ok_or_else(|| bad("bad y= variable"))?,
        },
        RuleId::AndI | RuleId::ExistsM | RuleId::Sat1 | RuleId::Sat2 => Payload::None,
        _ => match kv.get("dir").map(String::as_str) {
            Some("lr") => Payload::Dir(Dir::Lr),
            Some("rl") => Payload::Dir(Dir::Rl),
            _ => return Err(bad("PN rules need dir=lr or dir=rl")),
        },
    };
    Ok(StepSpec { rule, path, payload })
}

/// Parse a canonical variable name (`x…`, `y…`) as used in step payloads.
pub fn parse_payload_var(s: &str) -> Option<Var> {
    let mut chars = s.chars();
    let kind = match chars.next()? {
        'x' => VarKind::Universal,
        'y' => VarKind::Existential,
        _ => return None,
    };
    let rest: String = chars.collect();
    let mut pieces = rest.split('_');
    let base: u32 = pieces.next()?.parse().ok()?;
    let mut subs = Vec::new();
    for p in pieces {
        subs.push(p.parse().ok()?);
    }
    Some(Var { kind, base, subs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse, parse_allow_y0};

    #[test]
    fn forall_e_in_scope() {
        let f = parse("E y1 A x1 F(y1,x1)").unwrap();
        let out = apply_rule(
            &f,
            RuleId::ForallE,
            &[0],
            &Payload::ForallElim {
                universal: Var::universal(1),
                existential: Var::existential(1),
            },
        )
        .unwrap();
        assert_eq!(out.to_string(), "E y1 F(y1,y1)");
    }

    #[test]
    fn forall_e_scope_violation() {
        let f = parse("A x1 F(x1) & E y1 G(y1)").unwrap();
        let err = apply_rule(
            &f,
            RuleId::ForallE,
            &[0],
            &Payload::ForallElim {
                universal: Var::universal(1),
                existential: Var::existential(1),
            },
        )
        .unwrap_err();
        assert!(matches!(err, RuleError::SideConditionViolated { .. }));
    }

    #[test]
    fn forall_e_fresh_y0() {
        let f = parse("A x1 F(x1)").unwrap();
        let out = apply_rule(
            &f,
            RuleId::ForallE,
            &[],
            &Payload::ForallElim { universal: Var::universal(1), existential: Var::y_zero() },
        )
        .unwrap();
        assert_eq!(out.to_string(), "E y0 F(y0)");
        // second use of y0 reuses the prepended quantifier
        let g = parse_allow_y0("E y0 (F(y0) & A x1 G(x1))").unwrap();
        let out2 = apply_rule(
            &g,
            RuleId::ForallE,
            &[0, 1],
            &Payload::ForallElim { universal: Var::universal(1), existential: Var::y_zero() },
        )
        .unwrap();
        assert_eq!(out2.to_string(), "E y0 (F(y0) & G(y0))");
    }

    #[test]
    fn and_i_subscripts_copies() {
        let f = parse("A x1 F(x1)").unwrap();
        let out = apply_rule(&f, RuleId::AndI, &[], &Payload::None).unwrap();
        assert_eq!(out.to_string(), "A x1_1 F(x1_1) & A x1_2 F(x1_2)");
    }

    #[test]
    fn exists_m_splits_and_subscripts() {
        let f = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        let out = apply_rule(&f, RuleId::ExistsM, &[], &Payload::None).unwrap();
        assert_eq!(out.to_string(), "E y1_1 F(y1_1) & E y1_2 ~F(y1_2)");
    }

    #[test]
    fn exists_m_through_existential_run() {
        let f = parse("E y1 E y2 (F(y1,y2) & ~F(y2,y1))").unwrap();
        let out = apply_rule(&f, RuleId::ExistsM, &[], &Payload::None).unwrap();
        assert_eq!(
            out.to_string(),
            "E y2 (E y1_1 F(y1_1,y2) & E y1_2 ~F(y2,y1_2))"
        );
    }

    #[test]
    fn pn_rules_both_directions() {
        let f = parse("E y1 (F(y1) & E y2 G(y2))").unwrap();
        // PN5 lr pushes E y2? pattern is at the inner conjunction's parent
        let lr = apply_rule(&f, RuleId::PN5, &[], &Payload::Dir(Dir::Lr));
        // y1 occurs in the left conjunct, so PN5 at root must fail
        assert!(lr.is_err());
        let g = parse("E y2 (F(y1) & G(y2))");
        assert!(g.is_err()); // y1 unbound there
        let h = parse("E y1 (F(y1) & E y2 (G(y2) & H(y2)))").unwrap();
        let pulled = apply_rule(&h, RuleId::PN5, &[0], &Payload::Dir(Dir::Rl)).unwrap();
        assert_eq!(pulled.to_string(), "E y1 E y2 (F(y1) & (G(y2) & H(y2)))");
    }

    #[test]
    fn explicit_contradiction_examples() {
        let yes =
            parse_allow_y0("E y1_1 E y1_2 (F(y1_1,y1_2,y1_2) & ~F(y1_1,y1_2,y1_2))").unwrap();
        assert!(is_explicit_contradiction(&yes));
        let no = parse("E y1 (F(y1) & F(y1))").unwrap();
        assert!(!is_explicit_contradiction(&no));
        let universal = parse("A x1 (F(x1) & ~F(x1))").unwrap();
        assert!(!is_explicit_contradiction(&universal));
    }

    #[test]
    fn trivial_certificate_verifies() {
        let f = parse("E y1 (F(y1) & ~F(y1))").unwrap();
        let cert = Certificate {
            initial: f.clone(),
            steps: vec![],
            final_formula: f,
        };
        assert!(verify_certificate(&cert).is_verified());
    }

    #[test]
    fn certificate_text_round_trip() {
        let f = parse("E y1 A x1 F(y1,x1)").unwrap();
        let step = DerivationStep {
            rule: RuleId::ForallE,
            path: vec![0],
            payload: Payload::ForallElim {
                universal: Var::universal(1),
                existential: Var::existential(1),
            },
            result: parse("E y1 F(y1,y1)").unwrap(),
        };
        let cert = Certificate {
            initial: f,
            steps: vec![step],
            final_formula: parse("E y1 F(y1,y1)").unwrap(),
        };
        let text = certificate_to_text(&cert);
        let doc = certificate_from_text(&text).unwrap();
        assert_eq!(doc.steps.len(), 1);
        let replayed = doc.replay().unwrap();
        assert_eq!(replayed.steps[0].result, cert.steps[0].result);
    }
}
