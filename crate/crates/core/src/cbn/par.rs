//! Labeled parallel reduction with first-class derivation trees.
//!
//! A [`ParDerivation`] records *how* a parallel step was performed; its
//! source, target and label (the number of contracted redexes, counted with
//! duplication multiplicity) are recomputed by replay rather than stored.
//! Making derivations first-class is what lets the standardization pipeline
//! consume them: the inductive relation alone gives no access to its
//! derivation trees.

use crate::cbn::step::{step_left, step_left_with_path, Dir, RedexKind, RedexPath, Trace};
use crate::delta::DeltaTable;
use crate::syntax::{AvoidSet, ConstName, Constant, Term, VarName};

/// Derivation tree for one labeled parallel-reduction step.
///
/// `ReflLeaf` is only admissible on variables and constants; reflexivity at
/// other terms is expressed by composite derivations (every term has a
/// label-0 derivation, see [`refl_derivation`]).
#[derive(Clone, Debug)]
pub enum ParDerivation<C: Constant = ConstName> {
    ReflLeaf(Term<C>),
    DeltaLeaf {
        c1: C,
        c2: C,
        result: Term<C>,
    },
    BetaNode {
        binder: VarName,
        body: Box<ParDerivation<C>>,
        arg: Box<ParDerivation<C>>,
    },
    AppNode {
        fun: Box<ParDerivation<C>>,
        arg: Box<ParDerivation<C>>,
    },
    XiNode {
        binder: VarName,
        body: Box<ParDerivation<C>>,
    },
}

/// Source, target and label recomputed from a derivation tree.
#[derive(Clone, Debug)]
pub struct Replay<C: Constant = ConstName> {
    pub source: Term<C>,
    pub target: Term<C>,
    pub label: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum DerivationError {
    #[error("malformed derivation node: {0}")]
    Malformed(String),
    #[error("delta mismatch: {0}")]
    DeltaMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
}

use DerivationError as Err;

impl<C: Constant> ParDerivation<C> {
    pub fn beta(binder: VarName, body: ParDerivation<C>, arg: ParDerivation<C>) -> Self {
        ParDerivation::BetaNode {
            binder,
            body: Box::new(body),
            arg: Box::new(arg),
        }
    }

    pub fn app(fun: ParDerivation<C>, arg: ParDerivation<C>) -> Self {
        ParDerivation::AppNode {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn xi(binder: VarName, body: ParDerivation<C>) -> Self {
        ParDerivation::XiNode {
            binder,
            body: Box::new(body),
        }
    }

    /// Recomputes `(source, target, label)` from the tree. Beta targets are
    /// assembled with capture-avoiding substitution; the beta label follows
    /// `1 + m + n * occ(binder, developed body)`.
    pub fn replay(&self) -> Result<Replay<C>, DerivationError> {
        match self {
            ParDerivation::ReflLeaf(t) => match t {
                Term::Var(_) | Term::Ct(_) => Ok(Replay {
                    source: t.clone(),
                    target: t.clone(),
                    label: 0,
                }),
                other => Err(Err::Malformed(format!(
                    "reflexivity leaf on a composite term: {other}"
                ))),
            },
            ParDerivation::DeltaLeaf { c1, c2, result } => Ok(Replay {
                source: Term::app(Term::ct(c1.clone()), Term::ct(c2.clone())),
                target: result.clone(),
                label: 1,
            }),
            ParDerivation::BetaNode { binder, body, arg } => {
                let b = body.replay()?;
                let a = arg.replay()?;
                let label = 1 + b.label + a.label * b.target.count_occ(binder);
                Ok(Replay {
                    source: Term::app(Term::lm(binder.clone(), b.source), a.source),
                    target: b.target.subst(&a.target, binder),
                    label,
                })
            }
            ParDerivation::AppNode { fun, arg } => {
                let f = fun.replay()?;
                let a = arg.replay()?;
                Ok(Replay {
                    source: Term::app(f.source, a.source),
                    target: Term::app(f.target, a.target),
                    label: f.label + a.label,
                })
            }
            ParDerivation::XiNode { binder, body } => {
                let b = body.replay()?;
                Ok(Replay {
                    source: Term::lm(binder.clone(), b.source),
                    target: Term::lm(binder.clone(), b.target),
                    label: b.label,
                })
            }
        }
    }

    /// [`replay`](Self::replay) plus a check that every delta leaf matches
    /// the table.
    pub fn validate(&self, delta: &DeltaTable<C>) -> Result<Replay<C>, DerivationError> {
        self.check_deltas(delta)?;
        self.replay()
    }

    fn check_deltas(&self, delta: &DeltaTable<C>) -> Result<(), DerivationError> {
        match self {
            ParDerivation::ReflLeaf(_) => Ok(()),
            ParDerivation::DeltaLeaf { c1, c2, result } => match delta.lookup(c1, c2) {
                Some(z) if z.alpha_eq(result) => Ok(()),
                Some(z) => Err(Err::DeltaMismatch(format!(
                    "table maps ({c1}, {c2}) to {z}, derivation stores {result}"
                ))),
                None => Err(Err::DeltaMismatch(format!(
                    "table has no rule for ({c1}, {c2})"
                ))),
            },
            ParDerivation::BetaNode { body, arg, .. } => {
                body.check_deltas(delta)?;
                arg.check_deltas(delta)
            }
            ParDerivation::AppNode { fun, arg } => {
                fun.check_deltas(delta)?;
                arg.check_deltas(delta)
            }
            ParDerivation::XiNode { body, .. } => body.check_deltas(delta),
        }
    }
}

/// Public replay entry point: `(source, target, label)` of a valid
/// derivation, with delta leaves checked against the table.
pub fn replay_derivation<C: Constant>(
    d: &ParDerivation<C>,
    delta: &DeltaTable<C>,
) -> Result<(Term<C>, Term<C>, u64), DerivationError> {
    let r = d.validate(delta)?;
    Ok((r.source, r.target, r.label))
}

/// The label-0 derivation `t => t` that exists for every term.
pub fn refl_derivation<C: Constant>(t: &Term<C>) -> ParDerivation<C> {
    match t {
        Term::Var(_) | Term::Ct(_) => ParDerivation::ReflLeaf(t.clone()),
        Term::App(f, a) => ParDerivation::app(refl_derivation(f), refl_derivation(a)),
        Term::Lm(x, b) => ParDerivation::xi(x.clone(), refl_derivation(b)),
    }
}

/// Enumerates the complete, finite set of parallel-step derivations out of
/// `t`. Every term gets at least its reflexive derivation; distinct
/// derivations may share a target while carrying different labels, so no
/// target deduplication happens here.
pub fn step_par<C: Constant>(t: &Term<C>, delta: &DeltaTable<C>) -> Vec<ParDerivation<C>> {
    match t {
        Term::Var(_) | Term::Ct(_) => vec![ParDerivation::ReflLeaf(t.clone())],
        Term::Lm(x, b) => step_par(b, delta)
            .into_iter()
            .map(|d| ParDerivation::xi(x.clone(), d))
            .collect(),
        Term::App(f, a) => {
            let dfs = step_par(f, delta);
            let das = step_par(a, delta);
            let mut out = Vec::new();
            for df in &dfs {
                for da in &das {
                    out.push(ParDerivation::app(df.clone(), da.clone()));
                }
            }
            if let Term::Lm(y, body) = &**f {
                for db in step_par(body, delta) {
                    for da in &das {
                        out.push(ParDerivation::beta(y.clone(), db.clone(), da.clone()));
                    }
                }
            }
            if let (Term::Ct(c1), Term::Ct(c2)) = (&**f, &**a) {
                if let Some(z) = delta.lookup(c1, c2) {
                    out.push(ParDerivation::DeltaLeaf {
                        c1: c1.clone(),
                        c2: c2.clone(),
                        result: z.clone(),
                    });
                }
            }
            out
        }
    }
}

/// Transposes two variables throughout a derivation. Preserves validity and
/// the label; source and target are swapped accordingly.
pub fn swap_derivation<C: Constant>(
    d: &ParDerivation<C>,
    y: &VarName,
    z: &VarName,
) -> ParDerivation<C> {
    let sw = |x: &VarName| {
        if x == y {
            z.clone()
        } else if x == z {
            y.clone()
        } else {
            x.clone()
        }
    };
    match d {
        ParDerivation::ReflLeaf(t) => ParDerivation::ReflLeaf(t.swap(y, z)),
        ParDerivation::DeltaLeaf { c1, c2, result } => ParDerivation::DeltaLeaf {
            c1: c1.clone(),
            c2: c2.clone(),
            result: result.swap(y, z),
        },
        ParDerivation::BetaNode { binder, body, arg } => ParDerivation::beta(
            sw(binder),
            swap_derivation(body, y, z),
            swap_derivation(arg, y, z),
        ),
        ParDerivation::AppNode { fun, arg } => {
            ParDerivation::app(swap_derivation(fun, y, z), swap_derivation(arg, y, z))
        }
        ParDerivation::XiNode { binder, body } => {
            ParDerivation::xi(sw(binder), swap_derivation(body, y, z))
        }
    }
}

/// Substitutes one derivation into another: from `dx : X => X'` and
/// `dy : Y => Y'` builds a derivation `X[Y/y] => X'[Y'/y]` (endpoints up to
/// alpha) whose label `k` satisfies `k <= dx.label + occ(y, X') * dy.label`.
pub fn subst_par<C: Constant>(
    dx: &ParDerivation<C>,
    dy: &ParDerivation<C>,
    y: &VarName,
    delta: &DeltaTable<C>,
) -> Result<ParDerivation<C>, DerivationError> {
    let ry = dy.validate(delta)?;
    let mut fv_y: AvoidSet = ry.source.free_vars();
    fv_y.extend(ry.target.free_vars());
    subst_par_inner(dx, dy, y, &fv_y, delta)
}

fn subst_par_inner<C: Constant>(
    dx: &ParDerivation<C>,
    dy: &ParDerivation<C>,
    y: &VarName,
    fv_y: &AvoidSet,
    delta: &DeltaTable<C>,
) -> Result<ParDerivation<C>, DerivationError> {
    match dx {
        ParDerivation::ReflLeaf(Term::Var(x)) => {
            if x == y {
                Ok(dy.clone())
            } else {
                Ok(dx.clone())
            }
        }
        ParDerivation::ReflLeaf(_) => Ok(dx.clone()),
        ParDerivation::DeltaLeaf { result, .. } => {
            // Delta results are closed, so substitution cannot touch them.
            if result.fresh_in(y) {
                Ok(dx.clone())
            } else {
                Err(Err::Precondition(format!(
                    "delta result {result} is not closed (free {y})"
                )))
            }
        }
        ParDerivation::AppNode { fun, arg } => Ok(ParDerivation::app(
            subst_par_inner(fun, dy, y, fv_y, delta)?,
            subst_par_inner(arg, dy, y, fv_y, delta)?,
        )),
        ParDerivation::XiNode { binder, body } => {
            if binder == y {
                // The binder shadows the substituted variable.
                Ok(dx.clone())
            } else if fv_y.contains(binder) {
                let (z, body2) = rename_binder(binder, body, fv_y, y)?;
                Ok(ParDerivation::xi(
                    z,
                    subst_par_inner(&body2, dy, y, fv_y, delta)?,
                ))
            } else {
                Ok(ParDerivation::xi(
                    binder.clone(),
                    subst_par_inner(body, dy, y, fv_y, delta)?,
                ))
            }
        }
        ParDerivation::BetaNode { binder, body, arg } => {
            let arg2 = subst_par_inner(arg, dy, y, fv_y, delta)?;
            if binder == y {
                Ok(ParDerivation::beta(binder.clone(), (**body).clone(), arg2))
            } else if fv_y.contains(binder) {
                let (z, body2) = rename_binder(binder, body, fv_y, y)?;
                Ok(ParDerivation::beta(
                    z,
                    subst_par_inner(&body2, dy, y, fv_y, delta)?,
                    arg2,
                ))
            } else {
                Ok(ParDerivation::beta(
                    binder.clone(),
                    subst_par_inner(body, dy, y, fv_y, delta)?,
                    arg2,
                ))
            }
        }
    }
}

/// Picks a fresh name for a binder and swaps the body derivation over to it.
fn rename_binder<C: Constant>(
    binder: &VarName,
    body: &ParDerivation<C>,
    fv_extra: &AvoidSet,
    also: &VarName,
) -> Result<(VarName, ParDerivation<C>), DerivationError> {
    let rb = body.replay()?;
    let mut avoid = rb.source.free_vars();
    avoid.extend(rb.target.free_vars());
    avoid.extend(fv_extra.iter().cloned());
    avoid.insert(binder.clone());
    avoid.insert(also.clone());
    let z = crate::syntax::fresh_var(&avoid, binder.base());
    Ok((z.clone(), swap_derivation(body, binder, &z)))
}

/// Result of inverting a derivation whose source is an abstraction.
#[derive(Clone, Debug)]
pub enum LmInversion<C: Constant = ConstName> {
    /// The derivation is reflexive (label 0), so target equals source.
    Reflexive,
    /// A body derivation `Y => Y'`, synchronized on the requested binder:
    /// the original target is alpha-equivalent to `Lm y Y'`.
    Xi(ParDerivation<C>),
}

/// Binder-synchronized inversion: given `d` with source alpha-equivalent to
/// `Lm y Y`, returns either reflexivity or a body derivation out of `Y` with
/// the same label, swapping the recorded binder over to `y` if it differs.
pub fn invert_lm<C: Constant>(
    d: &ParDerivation<C>,
    y: &VarName,
) -> Result<LmInversion<C>, DerivationError> {
    let rep = d.replay()?;
    let ok = match &rep.source {
        Term::Lm(z, body) => z == y || body.fresh_in(y),
        _ => false,
    };
    if !ok {
        return Err(Err::Precondition(format!(
            "source {} is not an abstraction binding {y} up to alpha",
            rep.source
        )));
    }
    if rep.label == 0 {
        return Ok(LmInversion::Reflexive);
    }
    match d {
        ParDerivation::XiNode { binder, body } => {
            if binder == y {
                Ok(LmInversion::Xi((**body).clone()))
            } else {
                Ok(LmInversion::Xi(swap_derivation(body, y, binder)))
            }
        }
        _ => Err(Err::Malformed(format!(
            "derivation with abstraction source {} is not a xi node",
            rep.source
        ))),
    }
}

/// From `d : X => Y1` builds a derivation `Y1 => cdev X`: the constructive
/// triangle underneath the diamond property. Recursion follows the depth of
/// the source, with the beta case delegated to [`subst_par`].
pub fn cdev_join<C: Constant>(
    d: &ParDerivation<C>,
    delta: &DeltaTable<C>,
) -> Result<ParDerivation<C>, DerivationError> {
    d.validate(delta)?;
    cdev_join_inner(d, delta)
}

fn cdev_join_inner<C: Constant>(
    d: &ParDerivation<C>,
    delta: &DeltaTable<C>,
) -> Result<ParDerivation<C>, DerivationError> {
    match d {
        ParDerivation::ReflLeaf(t) => Ok(ParDerivation::ReflLeaf(t.clone())),
        ParDerivation::DeltaLeaf { result, .. } => Ok(refl_derivation(result)),
        ParDerivation::XiNode { binder, body } => Ok(ParDerivation::xi(
            binder.clone(),
            cdev_join_inner(body, delta)?,
        )),
        ParDerivation::BetaNode { binder, body, arg } => {
            let jb = cdev_join_inner(body, delta)?;
            let ja = cdev_join_inner(arg, delta)?;
            subst_par(&jb, &ja, binder, delta)
        }
        ParDerivation::AppNode { fun, arg } => {
            let rf = fun.replay()?;
            let ra = arg.replay()?;
            // Mirror cdev's three-way application split on the source.
            if let (Term::Ct(c1), Term::Ct(c2)) = (&rf.source, &ra.source) {
                if let Some(z) = delta.lookup(c1, c2) {
                    return Ok(ParDerivation::DeltaLeaf {
                        c1: c1.clone(),
                        c2: c2.clone(),
                        result: z.clone(),
                    });
                }
            }
            if matches!(rf.source, Term::Lm(..)) {
                // A valid derivation out of an abstraction is a xi node.
                if let ParDerivation::XiNode { binder, body } = &**fun {
                    return Ok(ParDerivation::beta(
                        binder.clone(),
                        cdev_join_inner(body, delta)?,
                        cdev_join_inner(arg, delta)?,
                    ));
                }
                return Err(Err::Malformed(
                    "abstraction source without a xi derivation".into(),
                ));
            }
            Ok(ParDerivation::app(
                cdev_join_inner(fun, delta)?,
                cdev_join_inner(arg, delta)?,
            ))
        }
    }
}

/// Contracts the top redex of a derivation whose source is a beta or delta
/// redex: returns the left step performing the contraction and a derivation
/// with a strictly smaller label from the contractum to the old target.
fn contract_top<C: Constant>(
    d: &ParDerivation<C>,
    delta: &DeltaTable<C>,
) -> Result<(RedexPath, Term<C>, ParDerivation<C>), DerivationError> {
    match d {
        ParDerivation::BetaNode { binder, body, arg } => {
            let rb = body.replay()?;
            let ra = arg.replay()?;
            let contractum = rb.source.subst(&ra.source, binder);
            let rest = subst_par(body, arg, binder, delta)?;
            Ok((RedexPath::here(RedexKind::Beta), contractum, rest))
        }
        ParDerivation::DeltaLeaf { result, .. } => Ok((
            RedexPath::here(RedexKind::Delta),
            result.clone(),
            refl_derivation(result),
        )),
        _ => Err(Err::Malformed("contract_top expects a redex node".into())),
    }
}

/// Commutation of a parallel step with a following left step: from
/// `d : X => Y` and `Y -L-> z`, produces a left trace `X -L->* Y1` and a
/// derivation `Y1 => z` (endpoints up to alpha). Recursion is lexicographic
/// on `(label, depth of the source)`.
pub fn commute_par_left<C: Constant>(
    d: &ParDerivation<C>,
    z: &Term<C>,
    delta: &DeltaTable<C>,
) -> Result<(Trace<C>, ParDerivation<C>), DerivationError> {
    let rep = d.validate(delta)?;
    match step_left(&rep.target, delta) {
        Some(actual) if actual.alpha_eq(z) => {}
        Some(actual) => {
            return Err(Err::Precondition(format!(
                "left step of {} is {actual}, not {z}",
                rep.target
            )))
        }
        None => {
            return Err(Err::Precondition(format!(
                "target {} has no left step",
                rep.target
            )))
        }
    }
    commute_inner(d, delta)
}

fn commute_inner<C: Constant>(
    d: &ParDerivation<C>,
    delta: &DeltaTable<C>,
) -> Result<(Trace<C>, ParDerivation<C>), DerivationError> {
    let rep = d.replay()?;
    if rep.label == 0 {
        // Label 0 forces target == source, so the left step applies directly.
        let (path, z) = step_left_with_path(&rep.source, delta)
            .ok_or_else(|| Err::Precondition(format!("{} has no left step", rep.source)))?;
        let mut tr = Trace::empty(rep.source);
        tr.push(path, z.clone());
        return Ok((tr, refl_derivation(&z)));
    }
    match d {
        ParDerivation::ReflLeaf(_) | ParDerivation::XiNode { .. } => Err(Err::Precondition(
            "target of a variable, constant or abstraction has no left step".into(),
        )),
        ParDerivation::DeltaLeaf { .. } | ParDerivation::BetaNode { .. } => {
            // Contract the top redex by an actual left step, then commute
            // the remaining, smaller-label derivation.
            let (path, contractum, rest) = contract_top(d, delta)?;
            let (t2, dd) = commute_inner(&rest, delta)?;
            let mut tr = Trace::empty(rep.source);
            tr.push(path, contractum);
            tr.append(t2);
            Ok((tr, dd))
        }
        ParDerivation::AppNode { fun, arg } => {
            let rf = fun.replay()?;
            let ra = arg.replay()?;
            if matches!(
                &**fun,
                ParDerivation::BetaNode { .. } | ParDerivation::DeltaLeaf { .. }
            ) {
                // The function side turns into an abstraction or constant
                // only after its top redex fires; fire it first, on the left.
                let (path, f1, rest_f) = contract_top(fun, delta)?;
                let d2 = ParDerivation::app(rest_f, (**arg).clone());
                let (t2, dd) = commute_inner(&d2, delta)?;
                let mut tr = Trace::empty(rep.source);
                tr.push(prefix_path(path, Dir::FunSide), Term::app(f1, ra.source));
                tr.append(t2);
                return Ok((tr, dd));
            }
            // fun is Refl / Xi / App, so the target's function shape is knowable.
            match &rf.target {
                Term::Lm(..) => {
                    // Top beta fires on the target; the fun derivation is a
                    // xi node, so the redex already exists in the source.
                    if let ParDerivation::XiNode { binder, body } = &**fun {
                        let rb = body.replay()?;
                        let contractum = rb.source.subst(&ra.source, binder);
                        let dd = subst_par(body, arg, binder, delta)?;
                        let mut tr = Trace::empty(rep.source);
                        tr.push(RedexPath::here(RedexKind::Beta), contractum);
                        Ok((tr, dd))
                    } else {
                        Err(Err::Malformed(
                            "abstraction target without a xi derivation".into(),
                        ))
                    }
                }
                Term::Var(_) | Term::Ct(_) => {
                    // fun is a reflexivity leaf; the left step is a top
                    // delta or goes into the argument side.
                    if matches!(
                        &**arg,
                        ParDerivation::BetaNode { .. } | ParDerivation::DeltaLeaf { .. }
                    ) {
                        let (path, a1, rest_a) = contract_top(arg, delta)?;
                        let d2 = ParDerivation::app((**fun).clone(), rest_a);
                        let (t2, dd) = commute_inner(&d2, delta)?;
                        let mut tr = Trace::empty(rep.source.clone());
                        tr.push(
                            prefix_path(path, Dir::ArgSide),
                            Term::app(rf.source.clone(), a1),
                        );
                        tr.append(t2);
                        Ok((tr, dd))
                    } else {
                        let (ta, dda) = commute_inner(arg, delta)?;
                        let fun_src = rf.source.clone();
                        let tr =
                            ta.map_into(Dir::ArgSide, |a| Term::app(fun_src.clone(), a));
                        Ok((tr, ParDerivation::app((**fun).clone(), dda)))
                    }
                }
                Term::App(..) => {
                    // The left step happens inside the function side.
                    let (tf, ddf) = commute_inner(fun, delta)?;
                    let arg_src = ra.source.clone();
                    let tr = tf.map_into(Dir::FunSide, |f| Term::app(f, arg_src.clone()));
                    Ok((tr, ParDerivation::app(ddf, (**arg).clone())))
                }
            }
        }
    }
}

fn prefix_path(mut path: RedexPath, dir: Dir) -> RedexPath {
    path.dirs.insert(0, dir);
    path
}

/// Checks that `chain` is a valid derivation chain starting at `start` and
/// returns the replays of its links.
pub fn validate_chain<C: Constant>(
    start: &Term<C>,
    chain: &[ParDerivation<C>],
    delta: &DeltaTable<C>,
) -> Result<Vec<Replay<C>>, DerivationError> {
    let mut cur = start.clone();
    let mut reps = Vec::with_capacity(chain.len());
    for (i, d) in chain.iter().enumerate() {
        let rep = d.validate(delta)?;
        if !rep.source.alpha_eq(&cur) {
            return Err(Err::InvalidChain(format!(
                "link {i}: expected source {cur}, found {}",
                rep.source
            )));
        }
        cur = rep.target.clone();
        reps.push(rep);
    }
    Ok(reps)
}

/// Joins two derivation chains out of the same term: returns a common
/// reduct together with valid chains from both endpoints to it, built by
/// tiling the triangle property of [`cdev_join`].
pub fn join_multi<C: Constant>(
    start: &Term<C>,
    chain1: &[ParDerivation<C>],
    chain2: &[ParDerivation<C>],
    delta: &DeltaTable<C>,
) -> Result<(Term<C>, Vec<ParDerivation<C>>, Vec<ParDerivation<C>>), DerivationError> {
    let reps1 = validate_chain(start, chain1, delta)?;
    validate_chain(start, chain2, delta)?;

    // Strips one derivation against a whole chain out of the same term:
    // d : X => Y and chain : X =>* Z give (W, Y =>* W, Z => W).
    fn strip<C: Constant>(
        d: &ParDerivation<C>,
        chain: &[ParDerivation<C>],
        delta: &DeltaTable<C>,
    ) -> Result<(Term<C>, Vec<ParDerivation<C>>, ParDerivation<C>), DerivationError> {
        match chain.split_first() {
            None => {
                let rep = d.replay()?;
                Ok((rep.target, Vec::new(), d.clone()))
            }
            Some((e, rest)) => {
                let dd = cdev_join(d, delta)?; // Y => cdev X
                let de = cdev_join(e, delta)?; // E1 => cdev X
                let (w, mut cw, zw) = strip(&de, rest, delta)?;
                let mut chain_out = vec![dd];
                chain_out.append(&mut cw);
                Ok((w, chain_out, zw))
            }
        }
    }

    match chain1.split_first() {
        None => {
            let end2 = chain2
                .last()
                .map(|d| d.replay().map(|r| r.target))
                .transpose()?
                .unwrap_or_else(|| start.clone());
            Ok((end2, chain2.to_vec(), Vec::new()))
        }
        Some((d1, rest1)) => {
            let (_, chain_a, s2) = strip(d1, chain2, delta)?;
            let x1 = reps1[0].target.clone();
            let (z, ext1, mut ext_a) = join_multi(&x1, rest1, &chain_a, delta)?;
            let mut ext2 = vec![s2];
            ext2.append(&mut ext_a);
            Ok((z, ext1, ext2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbn::step::cdev;
    use crate::syntax::ConstName;

    fn v(s: &str) -> VarName {
        VarName::from_ident(s)
    }

    fn var(s: &str) -> Term {
        Term::var(v(s))
    }

    fn ct(s: &str) -> Term {
        Term::ct(ConstName::new(s))
    }

    fn app(f: Term, a: Term) -> Term {
        Term::app(f, a)
    }

    fn lm(x: &str, b: Term) -> Term {
        Term::lm(v(x), b)
    }

    fn no_delta() -> DeltaTable {
        DeltaTable::new()
    }

    /// (\x1. x1 x1) ((\x. x) #c)
    fn running_example() -> Term {
        app(
            lm("x1", app(var("x1"), var("x1"))),
            app(lm("x", var("x")), ct("c")),
        )
    }

    #[test]
    fn step_par_on_variable_is_reflexive() {
        let ds = step_par(&var("x"), &no_delta());
        assert_eq!(ds.len(), 1);
        let r = ds[0].replay().unwrap();
        assert!(r.source.alpha_eq(&var("x")));
        assert!(r.target.alpha_eq(&var("x")));
        assert_eq!(r.label, 0);
    }

    #[test]
    fn every_term_has_a_reflexive_derivation() {
        for t in [running_example(), lm("x", var("x")), app(var("x"), ct("c"))] {
            let r = refl_derivation(&t).validate(&no_delta()).unwrap();
            assert!(r.source.alpha_eq(&t));
            assert!(r.target.alpha_eq(&t));
            assert_eq!(r.label, 0);
        }
    }

    #[test]
    fn y1_parallel_reduces_to_z_in_one_step() {
        // Y1 = ((\x. x) #c) ((\x. x) #c) steps to #c #c by contracting both
        // redexes in parallel.
        let x1 = app(lm("x", var("x")), ct("c"));
        let y1 = app(x1.clone(), x1);
        let z = app(ct("c"), ct("c"));
        let found = step_par(&y1, &no_delta())
            .into_iter()
            .any(|d| d.replay().unwrap().target.alpha_eq(&z));
        assert!(found);
    }

    #[test]
    fn beta_label_arithmetic() {
        // (\y. y y) ((\x. x) #c) has a derivation to #c #c with label
        // 1 + 0 + 1 * 2 = 3.
        let t = app(
            lm("y", app(var("y"), var("y"))),
            app(lm("x", var("x")), ct("c")),
        );
        let z = app(ct("c"), ct("c"));
        let labels: Vec<u64> = step_par(&t, &no_delta())
            .into_iter()
            .filter_map(|d| {
                let r = d.replay().unwrap();
                r.target.alpha_eq(&z).then_some(r.label)
            })
            .collect();
        assert!(labels.contains(&3), "labels to z: {labels:?}");
    }

    #[test]
    fn replay_examples() {
        let r = ParDerivation::ReflLeaf(var("x")).replay().unwrap();
        assert!(r.source.alpha_eq(&var("x")) && r.target.alpha_eq(&var("x")));
        assert_eq!(r.label, 0);

        let d = DeltaTable::sample_succ(2);
        let leaf: ParDerivation = ParDerivation::DeltaLeaf {
            c1: ConstName::new("succ"),
            c2: ConstName::new("num0"),
            result: ct("num1"),
        };
        let (src, tgt, label) = replay_derivation(&leaf, &d).unwrap();
        assert!(src.alpha_eq(&app(ct("succ"), ct("num0"))));
        assert!(tgt.alpha_eq(&ct("num1")));
        assert_eq!(label, 1);

        // a mismatching delta leaf is rejected
        let bad: ParDerivation = ParDerivation::DeltaLeaf {
            c1: ConstName::new("succ"),
            c2: ConstName::new("num0"),
            result: ct("num2"),
        };
        assert!(replay_derivation(&bad, &d).is_err());

        let malformed: ParDerivation = ParDerivation::ReflLeaf(app(var("x"), var("y")));
        assert!(malformed.replay().is_err());
    }

    #[test]
    fn cdev_join_closes_the_triangle_on_the_running_example() {
        let t = running_example();
        let want = cdev(&t, &no_delta());
        for d in step_par(&t, &no_delta()) {
            let j = cdev_join(&d, &no_delta()).unwrap();
            let rd = d.replay().unwrap();
            let rj = j.validate(&no_delta()).unwrap();
            assert!(rj.source.alpha_eq(&rd.target));
            assert!(rj.target.alpha_eq(&want), "join lands on cdev");
        }
    }

    #[test]
    fn cdev_join_of_the_full_development_is_reflexive() {
        let t = running_example();
        let want = cdev(&t, &no_delta());
        let full = step_par(&t, &no_delta())
            .into_iter()
            .find(|d| d.replay().unwrap().target.alpha_eq(&want))
            .expect("the complete development is a parallel step");
        let j = cdev_join(&full, &no_delta()).unwrap();
        let rj = j.validate(&no_delta()).unwrap();
        assert_eq!(rj.label, 0);
        assert!(rj.source.alpha_eq(&want) && rj.target.alpha_eq(&want));
    }

    #[test]
    fn subst_par_boundary_cases() {
        let d = no_delta();
        // both reflexive, y absent: label 0
        let dx = ParDerivation::ReflLeaf(var("x"));
        let dy = refl_derivation(&ct("c"));
        let out = subst_par(&dx, &dy, &v("y"), &d).unwrap();
        assert_eq!(out.validate(&d).unwrap().label, 0);

        // dx reflexive on Var y: the result is dy itself
        let t = app(lm("x", var("x")), ct("c"));
        let dy = step_par(&t, &d)
            .into_iter()
            .find(|d| d.replay().unwrap().label == 1)
            .unwrap();
        let dx = ParDerivation::ReflLeaf(var("y"));
        let out = subst_par(&dx, &dy, &v("y"), &d).unwrap();
        let r = out.validate(&d).unwrap();
        assert!(r.source.alpha_eq(&t));
        assert_eq!(r.label, 1);
    }

    #[test]
    fn subst_par_respects_the_label_bound() {
        let d = no_delta();
        // dx : (\z. y y) #c => y y (label 1); target has two ys
        let dx_src = app(lm("z", app(var("y"), var("y"))), ct("c"));
        let dy_src = app(lm("x", var("x")), ct("d"));
        for dx in step_par(&dx_src, &d) {
            for dy in step_par(&dy_src, &d) {
                let rx = dx.replay().unwrap();
                let ry = dy.replay().unwrap();
                let out = subst_par(&dx, &dy, &v("y"), &d).unwrap();
                let r = out.validate(&d).unwrap();
                assert!(r.source.alpha_eq(&rx.source.subst(&ry.source, &v("y"))));
                assert!(r.target.alpha_eq(&rx.target.subst(&ry.target, &v("y"))));
                assert!(r.label <= rx.label + rx.target.count_occ(&v("y")) * ry.label);
            }
        }
    }

    #[test]
    fn subst_par_avoids_capture() {
        let d = no_delta();
        // X = \z. y, substituting z for y must rename the binder
        let dx = refl_derivation(&lm("z", var("y")));
        let dy = ParDerivation::ReflLeaf(var("z"));
        let out = subst_par(&dx, &dy, &v("y"), &d).unwrap();
        let r = out.validate(&d).unwrap();
        assert!(r.source.alpha_eq(&lm("w", var("z"))));
        assert!(r.target.alpha_eq(&lm("w", var("z"))));
    }

    #[test]
    fn swap_derivation_preserves_labels_and_validity() {
        let d = no_delta();
        let t = app(lm("x", app(var("x"), var("y"))), var("z"));
        for dv in step_par(&t, &d) {
            let r0 = dv.validate(&d).unwrap();
            let sw = swap_derivation(&dv, &v("y"), &v("z"));
            let r1 = sw.validate(&d).unwrap();
            assert_eq!(r0.label, r1.label);
            assert!(r1.source.alpha_eq(&r0.source.swap(&v("y"), &v("z"))));
            assert!(r1.target.alpha_eq(&r0.target.swap(&v("y"), &v("z"))));
            let back = swap_derivation(&sw, &v("y"), &v("z"));
            let r2 = back.validate(&d).unwrap();
            assert!(r2.source.alpha_eq(&r0.source));
            assert!(r2.target.alpha_eq(&r0.target));
        }
    }

    #[test]
    fn invert_lm_cases() {
        let d = refl_derivation(&lm("y", app(var("y"), var("w"))));
        assert!(matches!(
            invert_lm(&d, &v("y")).unwrap(),
            LmInversion::Reflexive
        ));

        // already synchronized
        let body_src = app(lm("x", var("x")), ct("c"));
        let db = step_par(&body_src, &no_delta())
            .into_iter()
            .find(|d| d.replay().unwrap().label == 1)
            .unwrap();
        let d = ParDerivation::xi(v("y"), db.clone());
        match invert_lm(&d, &v("y")).unwrap() {
            LmInversion::Xi(b) => {
                assert!(b.replay().unwrap().source.alpha_eq(&body_src));
            }
            LmInversion::Reflexive => panic!("expected xi case"),
        }

        // binder differs: synchronize by swapping
        let body_src_z = app(lm("x", var("x")), var("z"));
        let db = step_par(&body_src_z, &no_delta())
            .into_iter()
            .find(|d| d.replay().unwrap().label == 1)
            .unwrap();
        let d = ParDerivation::xi(v("z"), db);
        let rd = d.replay().unwrap();
        match invert_lm(&d, &v("y")).unwrap() {
            LmInversion::Xi(b) => {
                let rb = b.validate(&no_delta()).unwrap();
                assert_eq!(rb.label, rd.label);
                assert!(Term::lm(v("y"), rb.source).alpha_eq(&rd.source));
                assert!(Term::lm(v("y"), rb.target).alpha_eq(&rd.target));
            }
            LmInversion::Reflexive => panic!("expected xi case"),
        }

        assert!(invert_lm(&refl_derivation(&var("x")), &v("x")).is_err());
    }

    #[test]
    fn commute_par_left_example() {
        // X = (\y. y) ((\x. x) #c); reduce the inner redex in parallel,
        // then left-step the result.
        let x = app(lm("y", var("y")), app(lm("x", var("x")), ct("c")));
        let y = app(lm("y", var("y")), ct("c"));
        let d = step_par(&x, &no_delta())
            .into_iter()
            .find(|d| {
                let r = d.replay().unwrap();
                r.target.alpha_eq(&y) && matches!(d, ParDerivation::AppNode { .. })
            })
            .unwrap();
        let z = step_left(&y, &no_delta()).unwrap();
        assert!(z.alpha_eq(&ct("c")));
        let (trace, dd) = commute_par_left(&d, &z, &no_delta()).unwrap();
        trace.validate(&no_delta()).unwrap();
        assert!(trace.start.alpha_eq(&x));
        let r = dd.validate(&no_delta()).unwrap();
        assert!(trace.end().alpha_eq(&r.source));
        assert!(r.target.alpha_eq(&z));
        // every trace step is a left step
        let terms = trace.terms();
        for w in terms.windows(2) {
            assert!(step_left(&w[0], &no_delta()).unwrap().alpha_eq(&w[1]));
        }
    }

    #[test]
    fn commute_label_zero_uses_the_same_left_step() {
        let x = app(lm("y", var("y")), ct("c"));
        let d = refl_derivation(&x);
        let z = step_left(&x, &no_delta()).unwrap();
        let (trace, dd) = commute_par_left(&d, &z, &no_delta()).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(trace.end().alpha_eq(&z));
        assert_eq!(dd.validate(&no_delta()).unwrap().label, 0);
    }

    #[test]
    fn join_multi_examples() {
        let x = running_example();
        // empty chains join trivially
        let (z, e1, e2) = join_multi(&x, &[], &[], &no_delta()).unwrap();
        assert!(z.alpha_eq(&x));
        assert!(e1.is_empty() && e2.is_empty());

        // the two one-step reducts of the running example join at #c #c
        let x1 = app(lm("x", var("x")), ct("c"));
        let y1 = app(x1.clone(), x1.clone());
        let y2 = app(lm("x1", app(var("x1"), var("x1"))), ct("c"));
        let ds = step_par(&x, &no_delta());
        let d1 = ds
            .iter()
            .find(|d| d.replay().unwrap().target.alpha_eq(&y1))
            .unwrap()
            .clone();
        let d2 = ds
            .iter()
            .find(|d| d.replay().unwrap().target.alpha_eq(&y2))
            .unwrap()
            .clone();
        let (z, ext1, ext2) = join_multi(&x, &[d1], &[d2], &no_delta()).unwrap();
        let cc = app(ct("c"), ct("c"));
        assert!(z.alpha_eq(&cc));
        validate_chain(&y1, &ext1, &no_delta()).unwrap();
        let reps2 = validate_chain(&y2, &ext2, &no_delta()).unwrap();
        assert!(reps2.last().unwrap().target.alpha_eq(&cc));
        assert!(reps2[0].source.alpha_eq(&y2));
    }
}
