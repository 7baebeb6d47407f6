//! The two-sorted syntax of the call-by-value calculus: values (variables,
//! constants, abstractions) and terms (value injections and applications),
//! with the standard operators on both sorts and the embedding into the
//! single-sorted syntax.

use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::{AvoidSet, ConstName, LnTerm, Term, VarName};

/// Values: the only terms substitutable for variables in this calculus.
#[derive(Clone, Debug)]
pub enum ValueV {
    Var(VarName),
    Ct(ConstName),
    Lm(VarName, Box<TermV>),
}

/// Terms: injected values and applications.
#[derive(Clone, Debug)]
pub enum TermV {
    Val(ValueV),
    App(Box<TermV>, Box<TermV>),
}

/// A finite table of delta rules returning values.
#[derive(Clone, Debug, Default)]
pub struct DeltaTableV {
    rules: BTreeMap<(ConstName, ConstName), ValueV>,
}

#[derive(Debug, thiserror::Error)]
#[error("delta result for ({left}, {right}) has free variables: {result}")]
pub struct OpenDeltaResultV {
    pub left: String,
    pub right: String,
    pub result: String,
}

impl DeltaTableV {
    pub fn new() -> Self {
        DeltaTableV {
            rules: BTreeMap::new(),
        }
    }

    pub fn insert(
        &mut self,
        c1: ConstName,
        c2: ConstName,
        result: ValueV,
    ) -> Result<(), OpenDeltaResultV> {
        if !result.free_vars().is_empty() {
            return Err(OpenDeltaResultV {
                left: c1.to_string(),
                right: c2.to_string(),
                result: format!("{result}"),
            });
        }
        self.rules.insert((c1, c2), result);
        Ok(())
    }

    pub fn lookup(&self, c1: &ConstName, c2: &ConstName) -> Option<&ValueV> {
        self.rules.get(&(c1.clone(), c2.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(ConstName, ConstName), &ValueV)> {
        self.rules.iter()
    }

    /// Value-sorted counterpart of the sample successor table.
    pub fn sample_succ(max: u32) -> Self {
        let mut table = DeltaTableV::new();
        let succ = ConstName::new("succ");
        for k in 0..max {
            table
                .insert(
                    succ.clone(),
                    ConstName::new(format!("num{k}")),
                    ValueV::Ct(ConstName::new(format!("num{}", k + 1))),
                )
                .expect("numerals are closed");
        }
        table
    }
}

#[derive(Debug, thiserror::Error)]
#[error("expected an abstraction value, got {0}")]
pub struct NotAnAbstractionV(pub String);

impl ValueV {
    pub fn lm(binder: VarName, body: TermV) -> Self {
        ValueV::Lm(binder, Box::new(body))
    }

    pub fn fresh_in(&self, x: &VarName) -> bool {
        match self {
            ValueV::Var(y) => x != y,
            ValueV::Ct(_) => true,
            ValueV::Lm(y, b) => x == y || b.fresh_in(x),
        }
    }

    pub fn free_vars(&self) -> AvoidSet {
        self.to_unsorted().free_vars()
    }

    pub fn count_occ(&self, x: &VarName) -> u64 {
        match self {
            ValueV::Var(y) => u64::from(x == y),
            ValueV::Ct(_) => 0,
            ValueV::Lm(y, b) => {
                if x == y {
                    0
                } else {
                    b.count_occ(x)
                }
            }
        }
    }

    pub fn swap(&self, z1: &VarName, z2: &VarName) -> ValueV {
        let sw = |x: &VarName| {
            if x == z1 {
                z2.clone()
            } else if x == z2 {
                z1.clone()
            } else {
                x.clone()
            }
        };
        match self {
            ValueV::Var(x) => ValueV::Var(sw(x)),
            ValueV::Ct(c) => ValueV::Ct(c.clone()),
            ValueV::Lm(x, b) => ValueV::lm(sw(x), b.swap(z1, z2)),
        }
    }

    /// Capture-avoiding substitution of a value for a variable, value sort.
    pub fn subst(&self, v: &ValueV, y: &VarName) -> ValueV {
        match self {
            ValueV::Var(x) => {
                if x == y {
                    v.clone()
                } else {
                    self.clone()
                }
            }
            ValueV::Ct(_) => self.clone(),
            ValueV::Lm(x, b) => {
                if x == y || !v.fresh_in(x) {
                    let mut avoid = b.free_vars();
                    avoid.extend(v.free_vars());
                    avoid.insert(y.clone());
                    avoid.insert(x.clone());
                    let z = crate::syntax::fresh_var(&avoid, x.base());
                    ValueV::lm(z.clone(), b.swap(x, &z).subst(v, y))
                } else {
                    ValueV::lm(x.clone(), b.subst(v, y))
                }
            }
        }
    }

    pub fn alpha_eq(&self, other: &ValueV) -> bool {
        self.to_unsorted().alpha_eq(&other.to_unsorted())
    }

    pub fn to_unsorted(&self) -> Term {
        match self {
            ValueV::Var(x) => Term::var(x.clone()),
            ValueV::Ct(c) => Term::ct(c.clone()),
            ValueV::Lm(x, b) => Term::lm(x.clone(), b.to_unsorted()),
        }
    }

    /// Opens an abstraction value exactly like [`Term::unbind`].
    pub fn unbind(&self, avoid: &AvoidSet) -> Result<(VarName, TermV), NotAnAbstractionV> {
        match self {
            ValueV::Lm(x, b) => {
                if !avoid.contains(x) {
                    Ok((x.clone(), (**b).clone()))
                } else {
                    let mut all = avoid.clone();
                    all.extend(b.free_vars());
                    all.insert(x.clone());
                    let y = crate::syntax::fresh_var(&all, x.base());
                    let body = b.swap(x, &y);
                    Ok((y, body))
                }
            }
            other => Err(NotAnAbstractionV(format!("{other}"))),
        }
    }
}

impl TermV {
    pub fn val(v: ValueV) -> Self {
        TermV::Val(v)
    }

    pub fn app(f: TermV, a: TermV) -> Self {
        TermV::App(Box::new(f), Box::new(a))
    }

    /// True iff the term is an injected value.
    pub fn as_value(&self) -> Option<&ValueV> {
        match self {
            TermV::Val(v) => Some(v),
            TermV::App(..) => None,
        }
    }

    pub fn size(&self) -> usize {
        self.to_unsorted().size()
    }

    pub fn depth(&self) -> u64 {
        self.to_unsorted().depth()
    }

    pub fn fresh_in(&self, x: &VarName) -> bool {
        match self {
            TermV::Val(v) => v.fresh_in(x),
            TermV::App(f, a) => f.fresh_in(x) && a.fresh_in(x),
        }
    }

    pub fn free_vars(&self) -> AvoidSet {
        self.to_unsorted().free_vars()
    }

    pub fn count_occ(&self, x: &VarName) -> u64 {
        match self {
            TermV::Val(v) => v.count_occ(x),
            TermV::App(f, a) => f.count_occ(x) + a.count_occ(x),
        }
    }

    pub fn swap(&self, z1: &VarName, z2: &VarName) -> TermV {
        match self {
            TermV::Val(v) => TermV::Val(v.swap(z1, z2)),
            TermV::App(f, a) => TermV::app(f.swap(z1, z2), a.swap(z1, z2)),
        }
    }

    /// Capture-avoiding substitution of a value for a variable, term sort.
    pub fn subst(&self, v: &ValueV, y: &VarName) -> TermV {
        match self {
            TermV::Val(w) => TermV::Val(w.subst(v, y)),
            TermV::App(f, a) => TermV::app(f.subst(v, y), a.subst(v, y)),
        }
    }

    pub fn alpha_eq(&self, other: &TermV) -> bool {
        self.to_unsorted().alpha_eq(&other.to_unsorted())
    }

    pub fn to_ln(&self) -> LnTerm {
        self.to_unsorted().to_ln()
    }

    /// Forgets the sort distinction. Injective up to alpha-equivalence.
    pub fn to_unsorted(&self) -> Term {
        match self {
            TermV::Val(v) => v.to_unsorted(),
            TermV::App(f, a) => Term::app(f.to_unsorted(), a.to_unsorted()),
        }
    }
}

/// Reads the sort structure back off a single-sorted term. Total: every
/// term position is an application or a value former.
pub fn from_unsorted(t: &Term) -> TermV {
    match t {
        Term::Var(x) => TermV::Val(ValueV::Var(x.clone())),
        Term::Ct(c) => TermV::Val(ValueV::Ct(c.clone())),
        Term::Lm(x, b) => TermV::Val(ValueV::lm(x.clone(), from_unsorted(b))),
        Term::App(f, a) => TermV::app(from_unsorted(f), from_unsorted(a)),
    }
}

impl fmt::Display for TermV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_unsorted())
    }
}

impl fmt::Display for ValueV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_unsorted())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> VarName {
        VarName::from_ident(s)
    }

    fn vvar(s: &str) -> TermV {
        TermV::Val(ValueV::Var(v(s)))
    }

    fn vct(s: &str) -> TermV {
        TermV::Val(ValueV::Ct(ConstName::new(s)))
    }

    #[test]
    fn subst_term_replaces_free_variable() {
        let t = vvar("y").subst(&ValueV::Ct(ConstName::new("c")), &v("y"));
        assert!(t.alpha_eq(&vct("c")));
    }

    #[test]
    fn subst_value_is_shielded_by_binder() {
        let w = ValueV::lm(v("y"), vvar("y"));
        let got = w.subst(&ValueV::Ct(ConstName::new("c")), &v("y"));
        assert!(got.alpha_eq(&w));
    }

    #[test]
    fn embedding_commutes_with_substitution() {
        let t = TermV::app(
            TermV::Val(ValueV::lm(v("z"), TermV::app(vvar("z"), vvar("y")))),
            vvar("y"),
        );
        let payload = ValueV::lm(v("w"), vvar("z"));
        let lhs = t.subst(&payload, &v("y")).to_unsorted();
        let rhs = t
            .to_unsorted()
            .subst(&payload.to_unsorted(), &v("y"));
        assert!(lhs.alpha_eq(&rhs));
    }

    #[test]
    fn embedding_round_trips() {
        let t = TermV::app(
            TermV::Val(ValueV::lm(v("x"), TermV::app(vvar("x"), vct("c")))),
            vvar("y"),
        );
        assert!(from_unsorted(&t.to_unsorted()).alpha_eq(&t));
    }

    #[test]
    fn open_value_results_are_rejected() {
        let mut t = DeltaTableV::new();
        assert!(t
            .insert(
                ConstName::new("a"),
                ConstName::new("b"),
                ValueV::Var(v("x")),
            )
            .is_err());
    }
}
