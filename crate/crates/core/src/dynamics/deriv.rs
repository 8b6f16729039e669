//! Brzozowski derivatives over regular expressions extended with shuffle.
//!
//! Every constructor below normalizes, so a term other than `Nul` always
//! denotes a nonempty language. `next_symbols` and the enumeration rely on it.

use std::collections::BTreeSet;
use std::rc::Rc;

pub(crate) type Sym = u32;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Re {
    Nul,
    Eps,
    Sym(Sym),
    Cat(Rc<Re>, Rc<Re>),
    Or(Rc<Vec<Re>>),
    Star(Rc<Re>),
    Shuffle(Rc<Re>, Rc<Re>),
}

pub(crate) fn cat(a: Re, b: Re) -> Re {
    match (a, b) {
        (Re::Nul, _) | (_, Re::Nul) => Re::Nul,
        (Re::Eps, b) => b,
        (a, Re::Eps) => a,
        (Re::Cat(x, y), b) => cat((*x).clone(), cat((*y).clone(), b)),
        (a, b) => Re::Cat(Rc::new(a), Rc::new(b)),
    }
}

pub(crate) fn or(terms: impl IntoIterator<Item = Re>) -> Re {
    let mut flat = Vec::new();
    for t in terms {
        match t {
            Re::Nul => {}
            Re::Or(xs) => flat.extend(xs.iter().cloned()),
            t => flat.push(t),
        }
    }
    flat.sort();
    flat.dedup();
    match flat.len() {
        0 => Re::Nul,
        1 => flat.pop().expect("one term"),
        _ => Re::Or(Rc::new(flat)),
    }
}

pub(crate) fn star(a: Re) -> Re {
    match a {
        Re::Nul | Re::Eps => Re::Eps,
        s @ Re::Star(_) => s,
        a => Re::Star(Rc::new(a)),
    }
}

pub(crate) fn shuffle(a: Re, b: Re) -> Re {
    match (a, b) {
        (Re::Nul, _) | (_, Re::Nul) => Re::Nul,
        (Re::Eps, b) => b,
        (a, Re::Eps) => a,
        (a, b) if a <= b => Re::Shuffle(Rc::new(a), Rc::new(b)),
        (a, b) => Re::Shuffle(Rc::new(b), Rc::new(a)),
    }
}

impl Re {
    pub(crate) fn nullable(&self) -> bool {
        match self {
            Re::Nul | Re::Sym(_) => false,
            Re::Eps | Re::Star(_) => true,
            Re::Cat(a, b) | Re::Shuffle(a, b) => a.nullable() && b.nullable(),
            Re::Or(xs) => xs.iter().any(Re::nullable),
        }
    }

    pub(crate) fn derive(&self, c: Sym) -> Re {
        match self {
            Re::Nul | Re::Eps => Re::Nul,
            Re::Sym(s) => {
                if *s == c {
                    Re::Eps
                } else {
                    Re::Nul
                }
            }
            Re::Cat(a, b) => {
                let left = cat(a.derive(c), (**b).clone());
                if a.nullable() {
                    or([left, b.derive(c)])
                } else {
                    left
                }
            }
            Re::Or(xs) => or(xs.iter().map(|x| x.derive(c))),
            Re::Star(a) => cat(a.derive(c), self.clone()),
            Re::Shuffle(a, b) => or([
                shuffle(a.derive(c), (**b).clone()),
                shuffle((**a).clone(), b.derive(c)),
            ]),
        }
    }

    /// Symbols that begin some word of the language.
    pub(crate) fn first_symbols(&self, out: &mut BTreeSet<Sym>) {
        match self {
            Re::Nul | Re::Eps => {}
            Re::Sym(s) => {
                out.insert(*s);
            }
            Re::Cat(a, b) => {
                a.first_symbols(out);
                if a.nullable() {
                    b.first_symbols(out);
                }
            }
            Re::Or(xs) => xs.iter().for_each(|x| x.first_symbols(out)),
            Re::Star(a) => a.first_symbols(out),
            Re::Shuffle(a, b) => {
                a.first_symbols(out);
                b.first_symbols(out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(re: &Re, w: &[Sym]) -> bool {
        w.iter().fold(re.clone(), |r, &c| r.derive(c)).nullable()
    }

    #[test]
    fn shuffle_of_two_symbols_has_both_orders() {
        let r = shuffle(Re::Sym(0), Re::Sym(1));
        assert!(word(&r, &[0, 1]));
        assert!(word(&r, &[1, 0]));
        assert!(!word(&r, &[0]));
        assert!(!word(&r, &[0, 0]));
    }

    #[test]
    fn plus_requires_one_iteration() {
        let body = cat(Re::Sym(0), Re::Sym(1));
        let plus = cat(body.clone(), star(body));
        assert!(!word(&plus, &[]));
        assert!(word(&plus, &[0, 1]));
        assert!(word(&plus, &[0, 1, 0, 1, 0, 1]));
        assert!(!word(&plus, &[0, 1, 0]));
    }

    #[test]
    fn constructors_normalize_empty_language() {
        assert_eq!(cat(Re::Sym(0), Re::Nul), Re::Nul);
        assert_eq!(or([Re::Nul, Re::Nul]), Re::Nul);
        assert_eq!(shuffle(Re::Nul, Re::Sym(1)), Re::Nul);
        assert_eq!(or([Re::Sym(1), Re::Sym(1)]), Re::Sym(1));
    }
}
