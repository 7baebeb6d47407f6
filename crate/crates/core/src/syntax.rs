//! Named lambda-terms and the standard operators on them.
//!
//! Terms are ordinary named trees, but the library's equality contract is
//! alpha-equivalence: every operator in this module returns results that are
//! stable under [`Term::alpha_eq`] replacement of its inputs. Structural
//! `PartialEq` is deliberately *not* derived for [`Term`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hash;

/// A variable name: a base identifier plus a numeric index.
///
/// The pair `(base, index)` is the identity; the supply is made countably
/// infinite by incrementing the index. Index `0` renders as the bare base
/// (`x`), higher indices append the number (`x1`, `x2`, ...). Bases must not
/// end in a digit so the rendering stays unambiguous.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName {
    base: String,
    index: u32,
}

impl VarName {
    pub fn new(base: impl Into<String>, index: u32) -> Self {
        let base = base.into();
        debug_assert!(
            !base.is_empty()
                && base.chars().next().unwrap().is_ascii_alphabetic()
                && base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && !base.ends_with(|c: char| c.is_ascii_digit()),
            "invalid variable base {base:?}"
        );
        VarName { base, index }
    }

    /// Parses a rendered name back into `(base, index)`, e.g. `x1 -> (x, 1)`.
    /// A missing digit suffix means index 0.
    pub fn from_ident(ident: &str) -> Self {
        let split = ident
            .rfind(|c: char| !c.is_ascii_digit())
            .map(|i| i + 1)
            .unwrap_or(0);
        let (base, digits) = ident.split_at(split);
        let index = if digits.is_empty() {
            0
        } else {
            digits.parse().unwrap_or(u32::MAX)
        };
        VarName::new(base, index)
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    pub fn index(&self) -> u32 {
        self.index
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{}{}", self.base, self.index)
        }
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A constant name; equality is label equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstName {
    label: String,
}

impl ConstName {
    pub fn new(label: impl Into<String>) -> Self {
        let label = label.into();
        debug_assert!(!label.is_empty(), "empty constant label");
        ConstName { label }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for ConstName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl fmt::Debug for ConstName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.label)
    }
}

/// Bound on the constant type a term is built over. The calculus never
/// inspects constants beyond equality, ordering and display.
pub trait Constant: Clone + Eq + Ord + Hash + fmt::Display + fmt::Debug {}

impl<T: Clone + Eq + Ord + Hash + fmt::Display + fmt::Debug> Constant for T {}

/// A finite set of variables to stay clear of when inventing fresh names.
pub type AvoidSet = BTreeSet<VarName>;

/// Lambda-terms over variables and constants of type `C`.
///
/// Equality of terms is alpha-equivalence ([`Term::alpha_eq`]), not structural
/// equality of representatives.
#[derive(Clone, Debug)]
pub enum Term<C: Constant = ConstName> {
    Var(VarName),
    Ct(C),
    App(Box<Term<C>>, Box<Term<C>>),
    Lm(VarName, Box<Term<C>>),
}

/// Locally-nameless image of a term: bound occurrences become de Bruijn
/// indices, free ones keep their name. Two terms are alpha-equivalent exactly
/// when their images are equal, so this type is the canonical form used for
/// hashing and deduplication.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LnTerm<C: Constant = ConstName> {
    Free(VarName),
    Bound(u32),
    Ct(C),
    App(Box<LnTerm<C>>, Box<LnTerm<C>>),
    Lm(Box<LnTerm<C>>),
}

#[derive(Debug, thiserror::Error)]
#[error("unbind expects an abstraction, got {0}")]
pub struct NotAnAbstraction(pub String);

impl<C: Constant> Term<C> {
    pub fn var(x: VarName) -> Self {
        Term::Var(x)
    }

    pub fn ct(c: C) -> Self {
        Term::Ct(c)
    }

    pub fn app(fun: Term<C>, arg: Term<C>) -> Self {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn lm(binder: VarName, body: Term<C>) -> Self {
        Term::Lm(binder, Box::new(body))
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Ct(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lm(_, b) => 1 + b.size(),
        }
    }

    /// Height of the tree; leaves have depth 1.
    pub fn depth(&self) -> u64 {
        match self {
            Term::Var(_) | Term::Ct(_) => 1,
            Term::App(f, a) => 1 + f.depth().max(a.depth()),
            Term::Lm(_, b) => 1 + b.depth(),
        }
    }

    /// True iff `x` has no free occurrence in `self`.
    pub fn fresh_in(&self, x: &VarName) -> bool {
        match self {
            Term::Var(y) => x != y,
            Term::Ct(_) => true,
            Term::App(f, a) => f.fresh_in(x) && a.fresh_in(x),
            Term::Lm(y, b) => x == y || b.fresh_in(x),
        }
    }

    /// The set of free variables.
    pub fn free_vars(&self) -> AvoidSet {
        fn go<C: Constant>(t: &Term<C>, bound: &mut Vec<VarName>, out: &mut AvoidSet) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Term::Ct(_) => {}
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::Lm(x, b) => {
                    bound.push(x.clone());
                    go(b, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = AvoidSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Number of free occurrences of `x`.
    pub fn count_occ(&self, x: &VarName) -> u64 {
        match self {
            Term::Var(y) => u64::from(x == y),
            Term::Ct(_) => 0,
            Term::App(f, a) => f.count_occ(x) + a.count_occ(x),
            Term::Lm(y, b) => {
                if x == y {
                    0
                } else {
                    b.count_occ(x)
                }
            }
        }
    }

    /// Transposes all occurrences of `z1` and `z2`, binders included.
    /// Involutive up to alpha-equivalence (in fact on the nose).
    pub fn swap(&self, z1: &VarName, z2: &VarName) -> Term<C> {
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
            Term::Var(x) => Term::Var(sw(x)),
            Term::Ct(c) => Term::Ct(c.clone()),
            Term::App(f, a) => Term::app(f.swap(z1, z2), a.swap(z1, z2)),
            Term::Lm(x, b) => Term::lm(sw(x), b.swap(z1, z2)),
        }
    }

    /// Capture-avoiding substitution of `u` for the free occurrences of `y`:
    /// the classic `t[u/y]`.
    ///
    /// A binder is renamed only when it occurs free in `u` or equals `y`;
    /// otherwise the original name survives, which keeps traces readable.
    pub fn subst(&self, u: &Term<C>, y: &VarName) -> Term<C> {
        match self {
            Term::Var(x) => {
                if x == y {
                    u.clone()
                } else {
                    self.clone()
                }
            }
            Term::Ct(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst(u, y), a.subst(u, y)),
            Term::Lm(x, b) => {
                if x == y || !u.fresh_in(x) {
                    let mut avoid = b.free_vars();
                    avoid.extend(u.free_vars());
                    avoid.insert(y.clone());
                    avoid.insert(x.clone());
                    let z = fresh_var(&avoid, x.base());
                    Term::lm(z.clone(), b.swap(x, &z).subst(u, y))
                } else {
                    Term::lm(x.clone(), b.subst(u, y))
                }
            }
        }
    }

    /// Simultaneous capture-avoiding substitution; `sigma` acts as the
    /// identity outside its domain.
    pub fn psubst(&self, sigma: &BTreeMap<VarName, Term<C>>) -> Term<C> {
        if sigma.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| self.clone()),
            Term::Ct(_) => self.clone(),
            Term::App(f, a) => Term::app(f.psubst(sigma), a.psubst(sigma)),
            Term::Lm(x, b) => {
                // The binder shadows its own entry.
                let mut inner: BTreeMap<VarName, Term<C>> = sigma
                    .iter()
                    .filter(|(v, _)| *v != x && !b.fresh_in(v))
                    .map(|(v, t)| (v.clone(), t.clone()))
                    .collect();
                let captures = inner.values().any(|t| !t.fresh_in(x));
                if captures {
                    let mut avoid = b.free_vars();
                    for t in inner.values() {
                        avoid.extend(t.free_vars());
                    }
                    avoid.extend(inner.keys().cloned());
                    avoid.insert(x.clone());
                    let z = fresh_var(&avoid, x.base());
                    let renamed = b.swap(x, &z);
                    inner.remove(&z);
                    Term::lm(z, renamed.psubst(&inner))
                } else {
                    Term::lm(x.clone(), b.psubst(&inner))
                }
            }
        }
    }

    /// Alpha-equivalence: equality of locally-nameless images. Implemented by
    /// an on-the-fly comparison that never materializes those images.
    pub fn alpha_eq(&self, other: &Term<C>) -> bool {
        fn go<C: Constant>(
            t: &Term<C>,
            u: &Term<C>,
            lt: &mut Vec<VarName>,
            lu: &mut Vec<VarName>,
        ) -> bool {
            match (t, u) {
                (Term::Var(x), Term::Var(y)) => {
                    let ix = lt.iter().rposition(|v| v == x);
                    let iy = lu.iter().rposition(|v| v == y);
                    match (ix, iy) {
                        (Some(i), Some(j)) => i == j,
                        (None, None) => x == y,
                        _ => false,
                    }
                }
                (Term::Ct(c), Term::Ct(d)) => c == d,
                (Term::App(f1, a1), Term::App(f2, a2)) => {
                    go(f1, f2, lt, lu) && go(a1, a2, lt, lu)
                }
                (Term::Lm(x, b1), Term::Lm(y, b2)) => {
                    lt.push(x.clone());
                    lu.push(y.clone());
                    let r = go(b1, b2, lt, lu);
                    lt.pop();
                    lu.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// The locally-nameless image, the canonical form of the alpha-class.
    pub fn to_ln(&self) -> LnTerm<C> {
        fn go<C: Constant>(t: &Term<C>, bound: &mut Vec<VarName>) -> LnTerm<C> {
            match t {
                Term::Var(x) => match bound.iter().rposition(|v| v == x) {
                    Some(i) => LnTerm::Bound((bound.len() - 1 - i) as u32),
                    None => LnTerm::Free(x.clone()),
                },
                Term::Ct(c) => LnTerm::Ct(c.clone()),
                Term::App(f, a) => {
                    LnTerm::App(Box::new(go(f, bound)), Box::new(go(a, bound)))
                }
                Term::Lm(x, b) => {
                    bound.push(x.clone());
                    let b = go(b, bound);
                    bound.pop();
                    LnTerm::Lm(Box::new(b))
                }
            }
        }
        go(self, &mut Vec::new())
    }

    /// Maps the constants of a term, leaving the binding structure untouched.
    pub fn map_consts<D: Constant>(&self, f: &impl Fn(&C) -> D) -> Term<D> {
        match self {
            Term::Var(x) => Term::Var(x.clone()),
            Term::Ct(c) => Term::Ct(f(c)),
            Term::App(a, b) => Term::app(a.map_consts(f), b.map_consts(f)),
            Term::Lm(x, b) => Term::lm(x.clone(), b.map_consts(f)),
        }
    }

    /// Opens an abstraction with a binder that avoids `avoid` and is fresh
    /// for the abstraction itself, so `Lm y B` is alpha-equivalent to the
    /// input. Keeps the original binder whenever it is admissible.
    pub fn unbind(&self, avoid: &AvoidSet) -> Result<(VarName, Term<C>), NotAnAbstraction> {
        match self {
            Term::Lm(x, b) => {
                if !avoid.contains(x) {
                    Ok((x.clone(), (**b).clone()))
                } else {
                    let mut all = avoid.clone();
                    all.extend(b.free_vars());
                    all.insert(x.clone());
                    let y = fresh_var(&all, x.base());
                    let body = b.swap(x, &y);
                    Ok((y, body))
                }
            }
            other => Err(NotAnAbstraction(format!("{other}"))),
        }
    }
}

/// Smallest-index-first deterministic fresh-name supply: returns the first
/// `(base, i)` not in `avoid`, where `base` is the hint with any trailing
/// digits stripped.
pub fn fresh_var(avoid: &AvoidSet, base_hint: &str) -> VarName {
    let trimmed = base_hint.trim_end_matches(|c: char| c.is_ascii_digit());
    let base = if trimmed.is_empty() { "v" } else { trimmed };
    for i in 0.. {
        let v = VarName::new(base, i);
        if !avoid.contains(&v) {
            return v;
        }
    }
    unreachable!("the variable supply is infinite")
}

impl<C: Constant> fmt::Display for Term<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // term ::= '\' IDENT '.' term | app ; app ::= atom { atom } ;
        // atom ::= IDENT | '#' IDENT | '(' term ')'
        fn atom<C: Constant>(t: &Term<C>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::Var(x) => write!(f, "{x}"),
                Term::Ct(c) => write!(f, "#{c}"),
                _ => {
                    write!(f, "(")?;
                    full(t, f)?;
                    write!(f, ")")
                }
            }
        }
        fn appl<C: Constant>(t: &Term<C>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::App(fun, arg) => {
                    appl(fun, f)?;
                    write!(f, " ")?;
                    atom(arg, f)
                }
                _ => atom(t, f),
            }
        }
        fn full<C: Constant>(t: &Term<C>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::Lm(x, b) => {
                    write!(f, "\\{x}. ")?;
                    full(b, f)
                }
                _ => appl(t, f),
            }
        }
        full(self, f)
    }
}
