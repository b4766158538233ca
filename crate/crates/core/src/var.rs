use std::fmt;

/// Whether a variable is meant to be bound universally (`x…`) or
/// existentially (`y…`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Universal,
    Existential,
}

/// A subscripted variable.
///
/// Universal variables print as `x<base>`, existential ones as `y<base>`.
/// Every duplication rule (conjunct multiplication, existential quantifier
/// multiplication) appends one more sub-index level, so `y1` becomes `y1_1`
/// and `y1_2`, and a further duplication of `y1_1` yields `y1_1_1` / `y1_1_2`.
/// The depth of a variable is `1 + subs.len()`.
///
/// `y0` (existential, base 0, no subs) is reserved for the fresh variable
/// introduced by universal quantifier elimination and is rejected in user
/// input.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub kind: VarKind,
    pub base: u32,
    pub subs: Vec<u32>,
}

impl Var {
    pub fn universal(base: u32) -> Var {
        Var { kind: VarKind::Universal, base, subs: Vec::new() }
    }

    pub fn existential(base: u32) -> Var {
        Var { kind: VarKind::Existential, base, subs: Vec::new() }
    }

    /// The reserved fresh variable for universal quantifier elimination.
    pub fn y_zero() -> Var {
        Var::existential(0)
    }

    pub fn is_y_zero(&self) -> bool {
        self.kind == VarKind::Existential && self.base == 0 && self.subs.is_empty()
    }

    pub fn is_universal(&self) -> bool {
        self.kind == VarKind::Universal
    }

    pub fn is_existential(&self) -> bool {
        self.kind == VarKind::Existential
    }

    /// Number of index levels: `x1` has depth 1, `x1_2` depth 2.
    pub fn depth(&self) -> usize {
        1 + self.subs.len()
    }

    /// This variable with one more sub-index level appended.
    pub fn with_sub(&self, sub: u32) -> Var {
        let mut subs = self.subs.clone();
        subs.push(sub);
        Var { kind: self.kind, base: self.base, subs }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.kind {
            VarKind::Universal => 'x',
            VarKind::Existential => 'y',
        };
        write!(f, "{}{}", letter, self.base)?;
        for s in &self.subs {
            write!(f, "_{}", s)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_depth() {
        let v = Var::universal(1).with_sub(2);
        assert_eq!(v.to_string(), "x1_2");
        assert_eq!(v.depth(), 2);
        assert_eq!(Var::existential(3).to_string(), "y3");
        assert_eq!(Var::y_zero().to_string(), "y0");
    }

    #[test]
    fn equality_includes_subs() {
        assert_ne!(Var::universal(1), Var::universal(1).with_sub(1));
        assert_ne!(Var::universal(1), Var::existential(1));
    }
}
