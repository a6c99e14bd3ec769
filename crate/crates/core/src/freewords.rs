//! Exact word engine for a free group `F_k`.
//!
//! Elements are freely reduced words over signed generator indices. Because
//! reduced words are canonical in a free group, equality of elements is
//! equality of letter sequences, and hashing is exact.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A generator `g<i>` or its inverse `G<i>`, stored as a nonzero signed index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: u32, inverse: bool) -> Letter {
        assert!(generator >= 1, "generator indices start at 1");
        let g = generator as i32;
        Letter(if inverse { -g } else { g })
    }

    pub fn from_signed(index: i32) -> Option<Letter> {
        (index != 0).then_some(Letter(index))
    }

    pub fn generator(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Position in the fixed generator order `g1 < G1 < g2 < G2 < ...`.
    pub fn ordinal(self) -> u32 {
        2 * (self.generator() - 1) + self.is_inverse() as u32
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordinal().cmp(&other.ordinal())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.is_inverse() { 'G' } else { 'g' };
        write!(f, "{}{}", prefix, self.generator())
    }
}

/// Parses a single `g<i>` / `G<i>` token.
pub(crate) fn parse_letter_token(token: &str) -> Option<Letter> {
    let mut chars = token.chars();
    let inverse = match chars.next()? {
        'g' => false,
        'G' => true,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index: u32 = digits.parse().ok()?;
    if index == 0 || index > i32::MAX as u32 {
        return None;
    }
    Some(Letter::new(index, inverse))
}

/// Splits on ASCII whitespace and yields `(token_position, byte_offset, token)`.
pub(crate) fn tokenize(input: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    input
        .split_ascii_whitespace()
        .enumerate()
        .map(move |(pos, tok)| {
            let offset = tok.as_ptr() as usize - input.as_ptr() as usize;
            (pos, offset, tok)
        })
}

/// A freely reduced word. The invariant (no letter adjacent to its inverse)
/// is maintained by every constructor.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord::default()
    }

    pub fn generator(letter: Letter) -> Self {
        ReducedWord {
            letters: vec![letter],
        }
    }

    /// Free reduction with a stack. Does not check generator ranges; use
    /// [`Alphabet::reduce`] for validated input.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(raw: I) -> Self {
        let mut letters: Vec<Letter> = Vec::new();
        for x in raw {
            if letters.last() == Some(&x.inverse()) {
                letters.pop();
            } else {
                letters.push(x);
            }
        }
        ReducedWord { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn max_generator(&self) -> u32 {
        self.letters.iter().map(|l| l.generator()).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Number of letters cancelled from each side when forming `self * other`.
    pub fn cancellation(&self, other: &ReducedWord) -> usize {
        let n = self.len().min(other.len());
        let mut k = 0;
        while k < n && self.letters[self.len() - 1 - k] == other.letters[k].inverse() {
            k += 1;
        }
        k
    }

    /// `|self * other|` without building the product.
    pub fn product_len(&self, other: &ReducedWord) -> usize {
        self.len() + other.len() - 2 * self.cancellation(other)
    }

    pub fn mul(&self, other: &ReducedWord) -> ReducedWord {
        let k = self.cancellation(other);
        let mut letters = Vec::with_capacity(self.len() + other.len() - 2 * k);
        letters.extend_from_slice(&self.letters[..self.len() - k]);
        letters.extend_from_slice(&other.letters[k..]);
        ReducedWord { letters }
    }

    pub fn pow(&self, k: i64) -> ReducedWord {
        cyclic_reduce(self).power(k)
    }

    /// Whether the first letter is not the inverse of the last.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(a), Some(b)) => *a != b.inverse(),
            _ => true,
        }
    }
}

/// Shortlex order: shorter words first, then lexicographic in the letter order.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl Serialize for ReducedWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReducedWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_word(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses and freely reduces a word without an alphabet bound.
pub fn parse_word(input: &str) -> Result<ReducedWord> {
    let mut letters = Vec::new();
    for (position, offset, token) in tokenize(input) {
        let letter = parse_letter_token(token).ok_or_else(|| Error::MalformedToken {
            token: token.to_string(),
            position,
            offset,
        })?;
        letters.push(letter);
    }
    Ok(ReducedWord::from_letters(letters))
}

/// `original = conjugator * core * conjugator^-1` with `core` cyclically reduced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CyclicDecomposition {
    pub conjugator: ReducedWord,
    pub core: ReducedWord,
}

impl CyclicDecomposition {
    /// `conjugator * core^k * conjugator^-1`, already reduced.
    pub fn power(&self, k: i64) -> ReducedWord {
        if k == 0 || self.core.is_empty() {
            return ReducedWord::identity();
        }
        let z = self.conjugator.letters();
        let unit = if k > 0 {
            self.core.letters().to_vec()
        } else {
            self.core.inverse().letters
        };
        let reps = k.unsigned_abs() as usize;
        let mut letters = Vec::with_capacity(2 * z.len() + reps * unit.len());
        letters.extend_from_slice(z);
        for _ in 0..reps {
            letters.extend_from_slice(&unit);
        }
        letters.extend(z.iter().rev().map(|l| l.inverse()));
        ReducedWord { letters }
    }

    /// `|original^k|` for any integer `k`.
    pub fn power_len(&self, k: i64) -> u64 {
        if k == 0 || self.core.is_empty() {
            0
        } else {
            2 * self.conjugator.len() as u64 + k.unsigned_abs() * self.core.len() as u64
        }
    }
}

pub fn cyclic_reduce(w: &ReducedWord) -> CyclicDecomposition {
    let l = w.letters();
    let mut k = 0;
    while 2 * k + 1 < l.len() && l[k] == l[l.len() - 1 - k].inverse() {
        k += 1;
    }
    CyclicDecomposition {
        conjugator: ReducedWord {
            letters: l[..k].to_vec(),
        },
        core: ReducedWord {
            letters: l[k..l.len() - k].to_vec(),
        },
    }
}

/// Smallest period of `s` that divides its length.
fn primitive_period(s: &[Letter]) -> usize {
    let n = s.len();
    (1..=n)
        .filter(|d| n % d == 0)
        .find(|&d| (d..n).all(|i| s[i] == s[i - d]))
        .unwrap_or(n)
}

/// The generator of the centralizer of `w` and the exponent with `root^exponent = w`.
pub fn root_of(w: &ReducedWord) -> Result<(ReducedWord, u32)> {
    if w.is_empty() {
        return Err(Error::TrivialWord);
    }
    let dec = cyclic_reduce(w);
    let core = dec.core.letters();
    let d = primitive_period(core);
    let root = CyclicDecomposition {
        conjugator: dec.conjugator.clone(),
        core: ReducedWord {
            letters: core[..d].to_vec(),
        },
    }
    .power(1);
    Ok((root, (core.len() / d) as u32))
}

/// The unique `k` with `u^k = g`, if any.
pub fn power_membership(u: &ReducedWord, g: &ReducedWord) -> Option<i64> {
    if g.is_empty() {
        return Some(0);
    }
    if u.is_empty() {
        return None;
    }
    let dec = cyclic_reduce(u);
    power_membership_with(&dec, g)
}

pub(crate) fn power_membership_with(dec: &CyclicDecomposition, g: &ReducedWord) -> Option<i64> {
    if g.is_empty() {
        return Some(0);
    }
    let z = dec.conjugator.len();
    let v = dec.core.len();
    // |u^k| = 2|z| + |k||v| for k != 0, so the length pins down |k|.
    if v == 0 || g.len() < 2 * z + v || (g.len() - 2 * z) % v != 0 {
        return None;
    }
    let k = ((g.len() - 2 * z) / v) as i64;
    [k, -k].into_iter().find(|&e| dec.power(e) == *g)
}

/// Whether `a^i` and `b^j` are conjugate for some nonzero `i`, `j`.
pub fn commensurable_up_to_conjugacy(a: &ReducedWord, b: &ReducedWord) -> Result<bool> {
    let (ra, _) = root_of(a)?;
    let (rb, _) = root_of(b)?;
    let ca = cyclic_reduce(&ra).core;
    let cb = cyclic_reduce(&rb).core;
    Ok(is_rotation(ca.letters(), cb.letters())
        || is_rotation(ca.letters(), cb.inverse().letters()))
}

fn is_rotation(a: &[Letter], b: &[Letter]) -> bool {
    a.len() == b.len() && (0..a.len().max(1)).any(|s| (0..a.len()).all(|i| a[(i + s) % a.len()] == b[i]))
}

/// `u_left^left_exp * middle * u_right^right_exp`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CosetStrip {
    pub left_exp: i64,
    pub middle: ReducedWord,
    pub right_exp: i64,
}

/// Half-width of the exponent window searched on one side of a double coset.
///
/// A minimizing exponent places its orbit point within
/// `|g| + |u_left| + |u_right|` of the projection of the identity onto the
/// axis, so the window below contains every minimizer.
fn strip_window(core_len: usize, g_len: usize, left_len: usize, right_len: usize) -> i64 {
    ((g_len + left_len + right_len).div_ceil(core_len) + 2) as i64
}

/// Every `(s, h, t)` with `u_left^s h u_right^t = g` and `|h|` minimal over the
/// double coset `<u_left> g <u_right>`. A missing side means the trivial
/// subgroup on that side.
pub fn double_coset_minimizers(
    left: Option<&ReducedWord>,
    g: &ReducedWord,
    right: Option<&ReducedWord>,
) -> Vec<CosetStrip> {
    let left = left.filter(|u| !u.is_empty()).map(cyclic_reduce);
    let right = right.filter(|u| !u.is_empty()).map(cyclic_reduce);
    let l_len = left.as_ref().map_or(0, |d| d.power_len(1) as usize);
    let r_len = right.as_ref().map_or(0, |d| d.power_len(1) as usize);
    let lw = left
        .as_ref()
        .map_or(0, |d| strip_window(d.core.len(), g.len(), l_len, r_len));
    let rw = right
        .as_ref()
        .map_or(0, |d| strip_window(d.core.len(), g.len(), l_len, r_len));

    let right_powers: Vec<ReducedWord> = (-rw..=rw)
        .map(|b| right.as_ref().map_or_else(ReducedWord::identity, |d| d.power(-b)))
        .collect();

    let mut best = usize::MAX;
    let mut hits: Vec<(i64, i64)> = Vec::new();
    let mut lefts: Vec<ReducedWord> = Vec::with_capacity((2 * lw + 1) as usize);
    for a in -lw..=lw {
        let lp = left
            .as_ref()
            .map_or_else(ReducedWord::identity, |d| d.power(-a))
            .mul(g);
        for (bi, rp) in right_powers.iter().enumerate() {
            let len = lp.product_len(rp);
            let b = bi as i64 - rw;
            match len.cmp(&best) {
                Ordering::Less => {
                    best = len;
                    hits.clear();
                    hits.push((a, b));
                }
                Ordering::Equal => hits.push((a, b)),
                Ordering::Greater => {}
            }
        }
        lefts.push(lp);
    }
    hits.into_iter()
        .map(|(a, b)| CosetStrip {
            left_exp: a,
            middle: lefts[(a + lw) as usize].mul(&right_powers[(b + rw) as usize]),
            right_exp: b,
        })
        .collect()
}

/// Canonical representative of `<u_left> g <u_right>`: the shortlex-least
/// word among the shortest ones. Depends only on the double coset.
pub fn canonical_double_coset(
    left: Option<&ReducedWord>,
    g: &ReducedWord,
    right: Option<&ReducedWord>,
) -> CosetStrip {
    double_coset_minimizers(left, g, right)
        .into_iter()
        .min_by(|x, y| {
            x.middle
                .cmp(&y.middle)
                .then_with(|| (x.left_exp.abs(), x.right_exp.abs()).cmp(&(y.left_exp.abs(), y.right_exp.abs())))
        })
        .expect("the search window always contains the origin")
}

/// `g = u^s h u^t` with `h` shortest in `<u> g <u>`; ties go to the smallest
/// `|s|`, then the smallest `|t|`, then positive before negative.
pub fn coset_strip(u: &ReducedWord, g: &ReducedWord) -> Result<CosetStrip> {
    if u.is_empty() {
        return Err(Error::TrivialWord);
    }
    if power_membership(u, g).is_some() {
        return Err(Error::InCyclicSubgroup {
            element: g.to_string(),
            u: u.to_string(),
        });
    }
    let strip = double_coset_minimizers(Some(u), g, Some(u))
        .into_iter()
        .min_by_key(|c| (c.left_exp.abs(), c.right_exp.abs(), c.left_exp < 0, c.right_exp < 0))
        .expect("nonempty window");
    Ok(strip)
}

/// The generating set of `F_rank` and validated entry points.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Alphabet {
    rank: u32,
}

impl Alphabet {
    pub fn new(rank: u32) -> Result<Alphabet> {
        if rank < 2 {
            return Err(Error::RankTooSmall(rank));
        }
        Ok(Alphabet { rank })
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// `g1, G1, g2, G2, ...`
    pub fn letters(&self) -> Vec<Letter> {
        (1..=self.rank)
            .flat_map(|i| [Letter::new(i, false), Letter::new(i, true)])
            .collect()
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        if l.generator() > self.rank {
            return Err(Error::GeneratorOutOfRange {
                index: l.generator(),
                rank: self.rank,
            });
        }
        Ok(())
    }

    pub fn check(&self, w: &ReducedWord) -> Result<()> {
        w.letters().iter().try_for_each(|&l| self.check_letter(l))
    }

    pub fn reduce(&self, raw: &[Letter]) -> Result<ReducedWord> {
        raw.iter().try_for_each(|&l| self.check_letter(l))?;
        Ok(ReducedWord::from_letters(raw.iter().copied()))
    }

    pub fn concat(&self, x: &ReducedWord, y: &ReducedWord) -> Result<ReducedWord> {
        self.check(x)?;
        self.check(y)?;
        Ok(x.mul(y))
    }

    pub fn parse(&self, input: &str) -> Result<ReducedWord> {
        let w = parse_word(input)?;
        self.check(&w)?;
        Ok(w)
    }

    /// `|B_R(F_rank)| = 1 + 2k((2k-1)^R - 1)/(2k-2)`.
    pub fn ball_size(&self, radius: u32) -> u128 {
        let k = self.rank as u128;
        let mut total = 1u128;
        let mut sphere = 2 * k;
        for _ in 0..radius {
            total = total.saturating_add(sphere);
            sphere = sphere.saturating_mul(2 * k - 1);
        }
        total
    }

    /// All reduced words of length at most `radius`, shortlex ordered.
    pub fn ball(&self, radius: u32, cap: u128) -> Result<Vec<ReducedWord>> {
        let needed = self.ball_size(radius);
        if needed > cap {
            return Err(Error::BudgetExceeded {
                what: "free group ball",
                needed,
                cap,
            });
        }
        let gens = self.letters();
        let mut out = vec![ReducedWord::identity()];
        let mut frontier = vec![ReducedWord::identity()];
        for _ in 0..radius {
            let mut next = Vec::with_capacity(frontier.len() * (gens.len() - 1));
            for w in &frontier {
                for &x in &gens {
                    if w.letters.last() == Some(&x.inverse()) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(x);
                    next.push(ReducedWord { letters });
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        Ok(out)
    }
}
