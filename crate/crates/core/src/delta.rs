//! Delta rules: a finite partial map telling how one constant applies to
//! another.

use std::collections::BTreeMap;

use crate::syntax::{ConstName, Constant, Term};

/// A finite table of delta rules `(c1, c2) -> result`.
///
/// Results must be closed terms: reduction substitutes delta results into
/// arbitrary contexts, and an open result would break the substitution and
/// equivariance properties of every relation built on top of the table.
#[derive(Clone, Debug, Default)]
pub struct DeltaTable<C: Constant = ConstName> {
    rules: BTreeMap<(C, C), Term<C>>,
}

#[derive(Debug, thiserror::Error)]
#[error("delta result for ({left}, {right}) has free variables: {result}")]
pub struct OpenDeltaResult {
    pub left: String,
    pub right: String,
    pub result: String,
}

impl<C: Constant> DeltaTable<C> {
    pub fn new() -> Self {
        DeltaTable {
            rules: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, c1: C, c2: C, result: Term<C>) -> Result<(), OpenDeltaResult> {
        if !result.free_vars().is_empty() {
            return Err(OpenDeltaResult {
                left: format!("{c1}"),
                right: format!("{c2}"),
                result: format!("{result}"),
            });
        }
        self.rules.insert((c1, c2), result);
        Ok(())
    }

    /// The paper-style partial application of constants: `Some` or `None`.
    pub fn lookup(&self, c1: &C, c2: &C) -> Option<&Term<C>> {
        self.rules.get(&(c1.clone(), c2.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(C, C), &Term<C>)> {
        self.rules.iter()
    }
}

impl DeltaTable<ConstName> {
    /// The table shipped for tests: constants `num0 .. numN` and `succ`,
    /// with `succ` applied to `numK` rewriting to `num(K+1)` for `K < N`.
    pub fn sample_succ(max: u32) -> Self {
        let mut table = DeltaTable::new();
        let succ = ConstName::new("succ");
        for k in 0..max {
            let from = ConstName::new(format!("num{k}"));
            let to = Term::ct(ConstName::new(format!("num{}", k + 1)));
            table
                .insert(succ.clone(), from, to)
                .expect("numerals are closed");
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::VarName;

    #[test]
    fn sample_table_steps_numerals() {
        let t = DeltaTable::sample_succ(3);
        let succ = ConstName::new("succ");
        let n0 = ConstName::new("num0");
        let hit = t.lookup(&succ, &n0).unwrap();
        assert!(hit.alpha_eq(&Term::ct(ConstName::new("num1"))));
        assert!(t.lookup(&n0, &succ).is_none());
        assert!(t.lookup(&succ, &ConstName::new("num3")).is_none());
    }

    #[test]
    fn open_results_are_rejected() {
        let mut t: DeltaTable = DeltaTable::new();
        let err = t.insert(
            ConstName::new("a"),
            ConstName::new("b"),
            Term::var(VarName::new("x", 0)),
        );
        assert!(err.is_err());
    }
}
