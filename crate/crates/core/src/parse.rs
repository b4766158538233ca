use crate::formula::Formula;
use crate::var::{Var, VarKind};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("predicate {pred} at {line}:{col} has no arguments")]
    ZeroArity { pred: String, line: usize, col: usize },
    #[error("unbound variable {name} at {line}:{col}")]
    UnboundVariable { name: String, line: usize, col: usize },
    #[error("variable y0 at {line}:{col} is reserved")]
    ReservedVariable { line: usize, col: usize },
}

/// Parse a closed formula in the concrete syntax.
///
/// Quantifiers bind the smallest complete formula after the binder variable;
/// `~` is accepted in front of any unit (conversion to NNF is a separate
/// step). `y0` is reserved and rejected.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, false).run()
}

/// Like [`parse`] but allows the reserved `y0`, for reading back formulas
/// from certificate documents.
pub fn parse_allow_y0(text: &str) -> Result<Formula, ParseError> {
    Parser::new(text, true).run()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Name {
    letter: char,
    base: u32,
    subs: Vec<u32>,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    allow_y0: bool,
    // names like v3 that carry no x/y kind information get fresh bases
    fresh: HashMap<(Name, VarKind), u32>,
    next_fresh: u32,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, allow_y0: bool) -> Parser<'a> {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            allow_y0,
            fresh: HashMap::new(),
            next_fresh: 1_000_000,
            text,
        }
    }

    fn run(mut self) -> Result<Formula, ParseError> {
        let _ = self.text;
        let mut scope: Vec<(Name, Var)> = Vec::new();
        let f = self.formula(&mut scope)?;
        self.skip_ws();
        if self.pos < self.chars.len() {
            return Err(self.syntax("unexpected trailing input"));
        }
        Ok(f)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected '{}'", c)))
        }
    }

    fn formula(&mut self, scope: &mut Vec<(Name, Var)>) -> Result<Formula, ParseError> {
        let mut f = self.conj(scope)?;
        loop {
            self.skip_ws();
            if self.peek() == Some('|') {
                self.bump();
                let r = self.conj(scope)?;
                f = Formula::or(f, r);
            } else {
                return Ok(f);
            }
        }
    }

    fn conj(&mut self, scope: &mut Vec<(Name, Var)>) -> Result<Formula, ParseError> {
        let mut f = self.unit(scope)?;
        loop {
            self.skip_ws();
            if self.peek() == Some('&') {
                self.bump();
                let r = self.unit(scope)?;
                f = Formula::and(f, r);
            } else {
                return Ok(f);
            }
        }
    }

    fn unit(&mut self, scope: &mut Vec<(Name, Var)>) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('~') => {
                self.bump();
                let inner = self.unit(scope)?;
                Ok(Formula::not(inner))
            }
            Some('(') => {
                self.bump();
                let f = self.formula(scope)?;
                self.expect(')')?;
                Ok(f)
            }
            Some(c) if c.is_ascii_uppercase() => {
                let (ident, line, col) = self.upper_ident()?;
                if ident == "A" || ident == "E" {
                    self.skip_ws();
                    if matches!(self.peek(), Some(c2) if c2.is_ascii_lowercase()) {
                        return self.quantifier(ident == "A", scope);
                    }
                }
                self.atom_args(ident, line, col, scope)
            }
            Some(c) if c.is_ascii_lowercase() => Err(self.syntax(format!(
                "expected a formula, found variable-like token starting with '{}'",
                c
            ))),
            _ => Err(self.syntax("expected a formula")),
        }
    }

    fn quantifier(
        &mut self,
        universal: bool,
        scope: &mut Vec<(Name, Var)>,
    ) -> Result<Formula, ParseError> {
        let (name, line, col) = self.var_name()?;
        let kind = if universal { VarKind::Universal } else { VarKind::Existential };
        let var = self.resolve_binder(&name, kind, line, col)?;
        scope.push((name, var.clone()));
        let body = self.unit(scope)?;
        scope.pop();
        Ok(if universal {
            Formula::forall(var, body)
        } else {
            Formula::exists(var, body)
        })
    }

    fn atom_args(
        &mut self,
        pred: String,
        pline: usize,
        pcol: usize,
        scope: &mut Vec<(Name, Var)>,
    ) -> Result<Formula, ParseError> {
        self.skip_ws();
        if self.peek() != Some('(') {
            return Err(self.syntax(format!("expected '(' after predicate {}", pred)));
        }
        self.bump();
        self.skip_ws();
        if self.peek() == Some(')') {
            return Err(ParseError::ZeroArity { pred, line: pline, col: pcol });
        }
        let mut args = Vec::new();
        loop {
            let (name, line, col) = self.var_name()?;
            let var = self.resolve_occurrence(&name, scope, line, col)?;
            args.push(var);
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.bump();
                }
                Some(')') => {
                    self.bump();
                    break;
                }
                _ => return Err(self.syntax("expected ',' or ')' in argument list")),
            }
        }
        Ok(Formula::atom(pred, args))
    }

    fn upper_ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let mut s = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
            s.push(self.bump().unwrap());
        }
        if s.is_empty() {
            return Err(self.syntax("expected identifier"));
        }
        Ok((s, line, col))
    }

    fn var_name(&mut self) -> Result<(Name, usize, usize), ParseError> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let letter = match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {
                self.bump();
                c
            }
            _ => return Err(self.syntax("expected a variable")),
        };
        let base = self.number()?;
        let mut subs = Vec::new();
        while self.peek() == Some('_') {
            self.bump();
            subs.push(self.number()?);
        }
        Ok((Name { letter, base, subs }, line, col))
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        let mut s = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            s.push(self.bump().unwrap());
        }
        if s.is_empty() {
            return Err(self.syntax("expected digits in variable name"));
        }
        s.parse::<u32>().map_err(|_| self.syntax("variable index out of range"))
    }

    /// Variables written as x<n>/y<n> map directly onto kinded variables;
    /// any other letter gets a fresh base so distinct names stay distinct.
    fn resolve_binder(
        &mut self,
        name: &Name,
        kind: VarKind,
        line: usize,
        col: usize,
    ) -> Result<Var, ParseError> {
        let var = match name.letter {
            'x' => Var { kind: VarKind::Universal, base: name.base, subs: name.subs.clone() },
            'y' => Var { kind: VarKind::Existential, base: name.base, subs: name.subs.clone() },
            _ => {
                let key = (name.clone(), kind);
                let base = *self.fresh.entry(key).or_insert_with(|| {
                    let b = self.next_fresh;
                    self.next_fresh += 1;
                    b
                });
                Var { kind, base, subs: Vec::new() }
            }
        };
        if !self.allow_y0 && var.is_y_zero() {
            return Err(ParseError::ReservedVariable { line, col });
        }
        Ok(var)
    }

    fn resolve_occurrence(
        &mut self,
        name: &Name,
        scope: &[(Name, Var)],
        line: usize,
        col: usize,
    ) -> Result<Var, ParseError> {
        match scope.iter().rev().find(|(n, _)| n == name) {
            Some((_, var)) => {
                if !self.allow_y0 && var.is_y_zero() {
                    return Err(ParseError::ReservedVariable { line, col });
                }
                Ok(var.clone())
            }
            None => Err(ParseError::UnboundVariable {
                name: format!(
                    "{}{}{}",
                    name.letter,
                    name.base,
                    name.subs.iter().map(|s| format!("_{}", s)).collect::<String>()
                ),
                line,
                col,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Formula;
    use crate::var::Var;

    #[test]
    fn parses_quantified_conjunction() {
        let f = parse("A x1 E y1 (F(x1,y1) & ~F(y1,x1))").unwrap();
        match &f {
            Formula::Forall(v, _) => assert_eq!(*v, Var::universal(1)),
            _ => panic!("expected Forall at root"),
        }
        assert_eq!(f.to_string(), "A x1 E y1 (F(x1,y1) & ~F(y1,x1))");
    }

    #[test]
    fn smallest_scope_binding() {
        let f = parse("A x1 E y1 F(x1,y1) & A x2 ~F(x2,x2)").unwrap();
        assert!(matches!(f, Formula::And(_, _)));
        assert_eq!(f.to_string(), "A x1 E y1 F(x1,y1) & A x2 ~F(x2,x2)");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse("F(x1").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn unbound_variable_rejected() {
        let err = parse("A x1 F(x1,z9)").unwrap_err();
        match err {
            ParseError::UnboundVariable { name, .. } => assert_eq!(name, "z9"),
            other => panic!("expected unbound variable error, got {other:?}"),
        }
    }

    #[test]
    fn zero_arity_rejected() {
        assert!(matches!(parse("F()"), Err(ParseError::ZeroArity { .. })));
    }

    #[test]
    fn y0_reserved() {
        assert!(matches!(parse("E y0 F(y0)"), Err(ParseError::ReservedVariable { .. })));
        assert!(parse_allow_y0("E y0 F(y0)").is_ok());
    }

    #[test]
    fn negation_of_compound_accepted() {
        let f = parse("~ (A x1 F(x1))").unwrap();
        assert!(matches!(f, Formula::Not(_)));
    }

    #[test]
    fn subscripted_variables() {
        let f = parse("E y1_2 F(y1_2)").unwrap();
        assert_eq!(f.to_string(), "E y1_2 F(y1_2)");
    }

    #[test]
    fn shadowing_parses_to_duplicate_binders() {
        let f = parse("A x1 (F(x1) & A x1 G(x1))").unwrap();
        assert!(!f.is_rectified());
    }

    #[test]
    fn noncanonical_names_stay_distinct() {
        let f = parse("A v1 E w1 F(v1,w1)").unwrap();
        if let Formula::Forall(v, body) = &f {
            if let Formula::Exists(w, _) = &**body {
                assert_ne!(v.base, w.base);
                return;
            }
        }
        panic!("unexpected shape");
    }
}
