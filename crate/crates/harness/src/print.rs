//! Printing terms in the named, de Bruijn and JSON styles.

use lambda_core::{Constant, LnTerm, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrintStyle {
    Named,
    DeBruijn,
    Json,
}

/// Renders a term. The named style round-trips through the parser up to
/// alpha-equivalence; the de Bruijn style shows bound occurrences as
/// indices; the JSON style follows the serialization schema.
pub fn print_term<C: Constant>(t: &Term<C>, style: PrintStyle) -> String {
    match style {
        PrintStyle::Named => t.to_string(),
        PrintStyle::DeBruijn => print_ln(&t.to_ln()),
        PrintStyle::Json => crate::json::term_to_json(t).to_string(),
    }
}

fn print_ln<C: Constant>(t: &LnTerm<C>) -> String {
    fn atom<C: Constant>(t: &LnTerm<C>, out: &mut String) {
        match t {
            LnTerm::Bound(i) => out.push_str(&i.to_string()),
            LnTerm::Free(x) => out.push_str(&x.to_string()),
            LnTerm::Ct(c) => {
                out.push('#');
                out.push_str(&c.to_string());
            }
            _ => {
                out.push('(');
                full(t, out);
                out.push(')');
            }
        }
    }
    fn appl<C: Constant>(t: &LnTerm<C>, out: &mut String) {
        match t {
            LnTerm::App(f, a) => {
                appl(f, out);
                out.push(' ');
                atom(a, out);
            }
            _ => atom(t, out),
        }
    }
    fn full<C: Constant>(t: &LnTerm<C>, out: &mut String) {
        match t {
            LnTerm::Lm(b) => {
                out.push_str("\\. ");
                full(b, out);
            }
            _ => appl(t, out),
        }
    }
    let mut out = String::new();
    full(t, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;

    #[test]
    fn named_round_trips() {
        let t = parse_term("\\x. x (y #c)").unwrap();
        let back = parse_term(&print_term(&t, PrintStyle::Named)).unwrap();
        assert!(back.alpha_eq(&t));
    }

    #[test]
    fn debruijn_replaces_bound_names() {
        let t = parse_term("\\x. x y").unwrap();
        assert_eq!(print_term(&t, PrintStyle::DeBruijn), "\\. 0 y");
        let u = parse_term("\\z. z y").unwrap();
        assert_eq!(
            print_term(&t, PrintStyle::DeBruijn),
            print_term(&u, PrintStyle::DeBruijn)
        );
    }

    #[test]
    fn json_style_matches_schema() {
        let t = parse_term("x").unwrap();
        assert_eq!(print_term(&t, PrintStyle::Json), "{\"var\":\"x\"}");
    }
}
