//! Words over a surface-group alphabet and conjugacy-class keys.
//!
//! Letters are encoded the way the table file stores them: generator `i`
//! (zero-based) is byte `i + 1`, its inverse is `i + 129`. The alphabet order
//! used for lexicographic tie-breaks is the byte order.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::fuchsian::Mat2;

const INVERSE_BIT: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    /// Generator with zero-based index `i`.
    pub fn gen(i: usize) -> Letter {
        assert!(i < 127, "alphabet supports at most 127 generators");
        Letter(i as u8 + 1)
    }

    pub fn gen_inv(i: usize) -> Letter {
        Letter::gen(i).inverse()
    }

    pub fn from_byte(b: u8) -> Option<Letter> {
        let idx = b & !INVERSE_BIT;
        (idx >= 1 && idx <= 127).then_some(Letter(b))
    }

    pub fn byte(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        ((self.0 & !INVERSE_BIT) - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & INVERSE_BIT != 0
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ INVERSE_BIT)
    }

    /// +1 for a generator, −1 for an inverse.
    pub fn sign(self) -> i64 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.index();
        if i < 26 {
            let c = (b'a' + i as u8) as char;
            if self.is_inverse() {
                write!(f, "{}", c.to_ascii_uppercase())
            } else {
                write!(f, "{c}")
            }
        } else if self.is_inverse() {
            write!(f, "G{i}")
        } else {
            write!(f, "g{i}")
        }
    }
}

/// A word in the generators; freely reduced unless built with
/// [`Word::from_letters_unreduced`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    /// Builds a word and freely reduces it.
    pub fn new(letters: Vec<Letter>) -> Word {
        Word(free_reduce(letters))
    }

    pub fn from_letters_unreduced(letters: Vec<Letter>) -> Word {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word::new(v)
    }

    pub fn pow(&self, k: usize) -> Word {
        let mut v = Vec::with_capacity(self.len() * k);
        for _ in 0..k {
            v.extend_from_slice(&self.0);
        }
        Word::new(v)
    }

    /// Cyclically reduced conjugate: strips matching first/last inverse pairs.
    pub fn cyclically_reduced(&self) -> Word {
        Word(cyclic_reduce(free_reduce(self.0.clone())))
    }

    /// Exponent-sum vector of length `dim`.
    pub fn homology(&self, dim: usize) -> Vec<i64> {
        let mut h = vec![0i64; dim];
        for l in &self.0 {
            h[l.index()] += l.sign();
        }
        h
    }

    /// Evaluates the word as a product of generator matrices.
    pub fn evaluate(&self, generators: &[Mat2]) -> Mat2 {
        self.0.iter().fold(Mat2::IDENTITY, |acc, l| {
            let g = generators[l.index()];
            acc * if l.is_inverse() { g.inverse() } else { g }
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().map(|l| l.byte()).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = String;

    /// Parses `a`–`z` as generators and `A`–`Z` as their inverses; `1` is the
    /// empty word.
    fn from_str(s: &str) -> Result<Word, String> {
        if s == "1" {
            return Ok(Word::empty());
        }
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                'a'..='z' => Ok(Letter::gen(c as usize - 'a' as usize)),
                'A'..='Z' => Ok(Letter::gen_inv(c as usize - 'A' as usize)),
                _ => Err(format!("bad letter {c:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word::new)
    }
}

fn free_reduce(letters: Vec<Letter>) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for l in letters {
        if out.last() == Some(&l.inverse()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn cyclic_reduce(mut v: Vec<Letter>) -> Vec<Letter> {
    let mut lo = 0;
    let mut hi = v.len();
    while hi - lo >= 2 && v[lo] == v[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    v.truncate(hi);
    v.drain(..lo);
    v
}

/// Lexicographically least rotation.
pub fn min_rotation(v: &[Letter]) -> Vec<Letter> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0;
    for i in 1..n {
        for k in 0..n {
            let a = v[(i + k) % n];
            let b = v[(best + k) % n];
            if a != b {
                if a < b {
                    best = i;
                }
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&v[best..]);
    out.extend_from_slice(&v[..best]);
    out
}

/// Smallest `p` dividing `len` with `v` invariant under rotation by `p`.
fn cyclic_period(v: &[Letter]) -> usize {
    let n = v.len();
    (1..=n)
        .filter(|p| n % p == 0)
        .find(|&p| (0..n).all(|i| v[i] == v[(i + p) % n]))
        .unwrap_or(n)
}

/// Smallest-period root of a cyclically reduced word: `w = root^k`.
pub fn primitive_decompose(w: &Word) -> (Word, u32) {
    if w.is_empty() {
        return (Word::empty(), 1);
    }
    let p = cyclic_period(w.letters());
    (Word(w.letters()[..p].to_vec()), (w.len() / p) as u32)
}

/// Precomputed cyclic rotations of a relator and its inverse.
#[derive(Debug, Clone)]
pub struct Relator {
    word: Word,
    rotations: Vec<Vec<Letter>>,
    by_pair: HashMap<(Letter, Letter), Vec<usize>>,
}

impl Relator {
    pub fn new(word: Word) -> Relator {
        let mut rotations = Vec::new();
        for w in [word.letters().to_vec(), word.inverse().letters().to_vec()] {
            let n = w.len();
            for i in 0..n {
                let mut r = w[i..].to_vec();
                r.extend_from_slice(&w[..i]);
                if !rotations.contains(&r) {
                    rotations.push(r);
                }
            }
        }
        let mut by_pair: HashMap<(Letter, Letter), Vec<usize>> = HashMap::new();
        if word.len() >= 2 {
            for (i, r) in rotations.iter().enumerate() {
                by_pair.entry((r[0], r[1])).or_default().push(i);
            }
        }
        Relator { word, rotations, by_pair }
    }

    /// A relator-free presentation (free group).
    pub fn none() -> Relator {
        Relator::new(Word::empty())
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Longest match of a relator rotation starting at cyclic position `i`
    /// of `v`: returns (rotation index, match length).
    fn longest_match(&self, v: &[Letter], i: usize) -> Option<(usize, usize)> {
        let n = v.len();
        if n < 2 {
            return None;
        }
        let key = (v[i], v[(i + 1) % n]);
        let cands = self.by_pair.get(&key)?;
        let mut best: Option<(usize, usize)> = None;
        for &ri in cands {
            let r = &self.rotations[ri];
            let lim = r.len().min(n);
            let mut m = 0;
            while m < lim && v[(i + m) % n] == r[m] {
                m += 1;
            }
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((ri, m));
            }
        }
        best
    }

    /// Replaces the `m`-letter match at cyclic position `i` by the inverse of
    /// the complementary relator piece and cyclically reduces.
    fn replace(&self, v: &[Letter], i: usize, ri: usize, m: usize) -> Vec<Letter> {
        let n = v.len();
        let r = &self.rotations[ri];
        let mut out: Vec<Letter> = r[m..].iter().rev().map(|l| l.inverse()).collect();
        out.extend((m..n).map(|k| v[(i + k) % n]));
        cyclic_reduce(free_reduce(out))
    }

    /// Cyclic Dehn reduction: replaces any cyclic subword longer than half a
    /// relator by its shorter complement until none remains.
    pub fn dehn_reduce_cyclic(&self, w: &[Letter]) -> Vec<Letter> {
        let mut v = cyclic_reduce(free_reduce(w.to_vec()));
        if self.is_empty() {
            return v;
        }
        let half = self.len() / 2;
        'again: loop {
            for i in 0..v.len() {
                if let Some((ri, m)) = self.longest_match(&v, i) {
                    if m > half {
                        v = self.replace(&v, i, ri, m);
                        continue 'again;
                    }
                }
            }
            return v;
        }
    }

    /// Words obtained by swapping one exact half-relator subword for its
    /// complement.
    fn half_swaps(&self, v: &[Letter]) -> Vec<Vec<Letter>> {
        let mut out = Vec::new();
        if self.is_empty() || self.len() % 2 != 0 {
            return out;
        }
        let half = self.len() / 2;
        for i in 0..v.len() {
            let Some(cands) = (v.len() >= 2).then(|| self.by_pair.get(&(v[i], v[(i + 1) % v.len()]))).flatten() else {
                continue;
            };
            for &ri in cands {
                let r = &self.rotations[ri];
                if half <= v.len() && (0..half).all(|k| v[(i + k) % v.len()] == r[k]) {
                    out.push(self.replace(v, i, ri, half));
                }
            }
        }
        out
    }
}

/// Conjugacy-class key of a word: canonical cyclic representative plus the
/// largest power it is known to be.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassKey {
    pub canon: Word,
    pub power: u32,
}

/// Computes the class key.
///
/// The word is cyclically Dehn-reduced, then the set of all equal-length
/// cyclic words reachable by half-relator swaps is explored; a shorter word
/// found on the way restarts the search. The key is the lexicographically
/// least rotation over that set, and the power is the largest cyclic period
/// count seen in it.
pub fn class_key(w: &Word, relator: &Relator) -> ClassKey {
    let mut cur = relator.dehn_reduce_cyclic(w.letters());
    'restart: loop {
        if cur.is_empty() {
            return ClassKey { canon: Word::empty(), power: 1 };
        }
        let n = cur.len();
        let start = min_rotation(&cur);
        let mut seen: HashSet<Vec<Letter>> = HashSet::new();
        let mut queue = vec![start.clone()];
        seen.insert(start);
        while let Some(x) = queue.pop() {
            for y in relator.half_swaps(&x) {
                let y = if y.len() == n { relator.dehn_reduce_cyclic(&y) } else { y };
                if y.len() < n {
                    cur = relator.dehn_reduce_cyclic(&y);
                    continue 'restart;
                }
                let r = min_rotation(&y);
                if seen.insert(r.clone()) {
                    queue.push(r);
                }
            }
        }
        let power = seen.iter().map(|s| n / cyclic_period(s)).max().unwrap_or(1) as u32;
        let canon = seen.into_iter().min().expect("nonempty closure");
        return ClassKey { canon: Word(canon), power };
    }
}

/// Canonical cyclic representative of the conjugacy class of `w`.
pub fn canonical_cyclic(w: &Word, relator: &Relator) -> Word {
    class_key(w, relator).canon
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn genus2() -> Relator {
        Relator::new(w("abABcdCD"))
    }

    #[test]
    fn letter_encoding() {
        assert_eq!(Letter::gen(0).byte(), 1);
        assert_eq!(Letter::gen_inv(3).byte(), 132);
        assert_eq!(Letter::from_byte(129), Some(Letter::gen_inv(0)));
        assert_eq!(Letter::from_byte(0), None);
        assert_eq!(Letter::from_byte(128), None);
        assert!(Letter::gen(2) < Letter::gen_inv(0));
    }

    #[test]
    fn parse_and_free_reduce() {
        assert_eq!(w("aAb").to_string(), "b");
        assert_eq!(w("abBA").to_string(), "1");
        assert_eq!(w("abAB").inverse().to_string(), "baBA");
    }

    #[test]
    fn conjugate_reduces_cyclically() {
        let r = genus2();
        assert_eq!(canonical_cyclic(&w("abA"), &r), w("b"));
        assert_eq!(canonical_cyclic(&w("a"), &r), w("a"));
        assert_eq!(canonical_cyclic(&w("bca"), &r), canonical_cyclic(&w("abc"), &r));
    }

    #[test]
    fn relator_is_trivial() {
        let r = genus2();
        assert!(canonical_cyclic(&w("abABcdCD"), &r).is_empty());
        assert!(canonical_cyclic(&w("dCDabABc"), &r).is_empty());
        assert!(canonical_cyclic(&w("dcDCbaBA"), &r).is_empty());
    }

    #[test]
    fn more_than_half_is_shortened() {
        let r = genus2();
        // abABc is five letters of the relator; equals D c d C... complement
        let long = w("abABce");
        let c = canonical_cyclic(&long, &r);
        assert!(c.len() < long.len(), "{c}");
    }

    #[test]
    fn half_swaps_give_same_key() {
        let r = genus2();
        // abAB = dcDC in the group, so these are the same class
        let x = w("abABe");
        let y = w("dcDCe");
        assert_eq!(class_key(&x, &r), class_key(&y, &r));
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_decompose(&w("abab")), (w("ab"), 2));
        assert_eq!(primitive_decompose(&w("ab")), (w("ab"), 1));
        assert_eq!(primitive_decompose(&w("ababab")), (w("ab"), 3));
    }

    #[test]
    fn power_survives_half_swaps() {
        let r = genus2();
        let base = w("abABe");
        let key = class_key(&base.pow(3), &r);
        assert_eq!(key.power, 3);
        assert_eq!(class_key(&base, &r).power, 1);
    }

    #[test]
    fn homology_counts_exponents() {
        assert_eq!(w("abAB").homology(4), vec![0, 0, 0, 0]);
        assert_eq!(w("aab").homology(4), vec![2, 1, 0, 0]);
        assert_eq!(w("aab").inverse().homology(4), vec![-2, -1, 0, 0]);
    }
}
