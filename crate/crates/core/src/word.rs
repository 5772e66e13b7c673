//! Letters, words and their textual form.
//!
//! A letter is a generator index together with an inversion bit. Letters are
//! ordered `a, a^-1, b, b^-1, ...`, which is the order used for every
//! deterministic search in the crate.

use std::fmt;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u16);

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter((gen as u16) << 1 | inverse as u16)
    }

    pub fn from_code(code: usize) -> Self {
        Letter(code as u16)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn gen(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }
}

pub type Word = Vec<Letter>;

/// All letters over `ngens` generators, in search order.
pub fn alphabet(ngens: usize) -> Vec<Letter> {
    (0..2 * ngens).map(Letter::from_code).collect()
}

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inverse()).collect()
}

/// Free reduction.
pub fn reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn is_reduced(w: &[Letter]) -> bool {
    w.windows(2).all(|p| p[0] != p[1].inverse())
}

/// Default generator labels `a, b, c, ...`.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(default_label).collect()
}

pub fn default_label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("g{i}")
    }
}

/// Renders a word as `a*b^-1*a`. The empty word renders as the empty string.
pub fn render(w: &[Letter], labels: &[String]) -> String {
    let mut parts = Vec::with_capacity(w.len());
    for l in w {
        let name = &labels[l.gen()];
        if l.is_inverse() {
            parts.push(format!("{name}^-1"));
        } else {
            parts.push(name.clone());
        }
    }
    parts.join("*")
}

/// Parses `a*b^-1`, also accepting integer exponents (`a^3`, `b^-2`) and the
/// identity spellings `""`, `"1"`, `"e"` (when `e` is not a label).
pub fn parse(s: &str, labels: &[String]) -> Result<Word, Error> {
    let s = s.trim();
    if s.is_empty() || s == "1" || (s == "e" && !labels.iter().any(|l| l == "e")) {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for token in s.split('*') {
        let token = token.trim();
        let (name, exp) = match token.split_once('^') {
            Some((n, e)) => {
                let e: i64 = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::BadWord(format!("bad exponent in {token:?}")))?;
                (n.trim(), e)
            }
            None => (token, 1),
        };
        let gen = labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))?;
        let letter = Letter::new(gen, exp < 0);
        for _ in 0..exp.unsigned_abs() {
            out.push(letter);
        }
    }
    Ok(out)
}

/// Reduced words of length at most `r` over `ngens` generators, in shortlex
/// order.
pub fn free_ball(ngens: usize, r: usize) -> Vec<Word> {
    let mut out: Vec<Word> = vec![Vec::new()];
    let mut start = 0;
    for _ in 0..r {
        let end = out.len();
        for i in start..end {
            for l in alphabet(ngens) {
                if out[i].last() == Some(&l.inverse()) {
                    continue;
                }
                let mut w = out[i].clone();
                w.push(l);
                out.push(w);
            }
        }
        start = end;
    }
    out
}

pub struct Rendered<'a>(pub &'a [Letter], pub &'a [String]);

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.0, self.1))
    }
}
