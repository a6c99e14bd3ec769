//! Extensions of centralizers `G' = F *_<u> (<u> × Z^n)` over a free base,
//! and star-shaped towers of them where every stage's `u` lies in `F`.
//!
//! Elements are kept as alternating sequences of base syllables (reduced
//! words) and abelian syllables `u^e t_1^{v_1} ... t_n^{v_n}` with `v ≠ 0`.
//! Base syllables are replaced by the shortlex-least shortest word of their
//! double coset with respect to the neighbouring stages, which makes the
//! sequence a canonical form.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freewords::{
    self, canonical_double_coset, cyclic_reduce, power_membership_with, root_of, Alphabet,
    CyclicDecomposition, Letter, ReducedWord,
};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct StageSpec {
    pub u: ReducedWord,
    pub rank: u32,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EocSpec {
    pub free_rank: u32,
    #[serde(default)]
    pub stages: Vec<StageSpec>,
}

impl EocSpec {
    pub fn single(free_rank: u32, u: ReducedWord, rank: u32) -> Self {
        EocSpec {
            free_rank,
            stages: vec![StageSpec { u, rank }],
        }
    }
}

/// A letter of the presentation: a base letter or `t_{stage,index}^{±1}`.
/// Stages and indices are 0-based here and 1-based in text.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Token {
    Base(Letter),
    T {
        stage: usize,
        index: usize,
        inverse: bool,
    },
}

impl Token {
    pub fn inverse(self) -> Token {
        match self {
            Token::Base(l) => Token::Base(l.inverse()),
            Token::T {
                stage,
                index,
                inverse,
            } => Token::T {
                stage,
                index,
                inverse: !inverse,
            },
        }
    }

    pub fn is_t(self) -> bool {
        matches!(self, Token::T { .. })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Base(l) => write!(f, "{l}"),
            Token::T {
                stage,
                index,
                inverse,
            } => {
                let c = if *inverse { 'T' } else { 't' };
                write!(f, "{c}{}.{}", stage + 1, index + 1)
            }
        }
    }
}

fn parse_t_token(tok: &str) -> Option<Token> {
    let inverse = match tok.as_bytes().first()? {
        b't' => false,
        b'T' => true,
        _ => return None,
    };
    let (s, i) = tok[1..].split_once('.')?;
    let num = |x: &str| -> Option<usize> {
        if x.is_empty() || !x.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        x.parse::<usize>().ok().filter(|&v| v >= 1)
    };
    Some(Token::T {
        stage: num(s)? - 1,
        index: num(i)? - 1,
        inverse,
    })
}

/// Splits a whitespace-separated token string. Ranges are checked by the group.
pub fn parse_tokens(input: &str) -> Result<Vec<Token>> {
    freewords::tokenize(input)
        .map(|(position, offset, tok)| {
            freewords::parse_letter_token(tok)
                .map(Token::Base)
                .or_else(|| parse_t_token(tok))
                .ok_or_else(|| Error::MalformedToken {
                    token: tok.to_string(),
                    position,
                    offset,
                })
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Syllable {
    Base(ReducedWord),
    /// `u_stage^u_exp * t_1^{t_exps[0]} ... t_n^{t_exps[n-1]}`, never with all `t_exps` zero.
    Abelian {
        stage: usize,
        u_exp: i64,
        t_exps: Vec<i64>,
    },
}

/// An element in canonical form. Equal elements have equal syllables.
#[derive(Clone, Default, PartialEq, Eq, Hash, Debug)]
pub struct EocElement {
    syllables: Vec<Syllable>,
}

impl EocElement {
    pub fn identity() -> Self {
        EocElement::default()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_trivial(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Whether no t-letter occurs.
    pub fn is_base(&self) -> bool {
        self.syllables.iter().all(|s| matches!(s, Syllable::Base(_)))
    }

    pub fn as_base(&self) -> Option<ReducedWord> {
        match self.syllables.as_slice() {
            [] => Some(ReducedWord::identity()),
            [Syllable::Base(g)] => Some(g.clone()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Stage {
    u: ReducedWord,
    rank: usize,
    dec: CyclicDecomposition,
}

/// A validated group. Immutable; every operation is a pure function.
#[derive(Clone, Debug)]
pub struct EocGroup {
    spec: EocSpec,
    alphabet: Alphabet,
    stages: Vec<Stage>,
}

impl EocGroup {
    pub fn new(spec: EocSpec) -> Result<Self> {
        let alphabet = Alphabet::new(spec.free_rank)?;
        let mut stages = Vec::with_capacity(spec.stages.len());
        for (i, st) in spec.stages.iter().enumerate() {
            let invalid = |reason: String| Error::InvalidStage {
                stage: i + 1,
                reason,
            };
            alphabet.check(&st.u).map_err(|e| invalid(e.to_string()))?;
            if st.rank == 0 {
                return Err(invalid("rank must be positive".into()));
            }
            let (root, exponent) = root_of(&st.u).map_err(|e| invalid(e.to_string()))?;
            if exponent > 1 {
                let e = Error::ProperPower {
                    word: st.u.to_string(),
                    root: root.to_string(),
                    exponent,
                };
                return Err(invalid(e.to_string()));
            }
            for (j, prev) in spec.stages[..i].iter().enumerate() {
                if freewords::commensurable_up_to_conjugacy(&prev.u, &st.u)? {
                    return Err(Error::Commensurable {
                        first: j + 1,
                        second: i + 1,
                    });
                }
            }
            stages.push(Stage {
                u: st.u.clone(),
                rank: st.rank as usize,
                dec: cyclic_reduce(&st.u),
            });
        }
        Ok(EocGroup {
            spec,
            alphabet,
            stages,
        })
    }

    pub fn spec(&self) -> &EocSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn stage_u(&self, stage: usize) -> &ReducedWord {
        &self.stages[stage].u
    }

    pub fn stage_rank(&self, stage: usize) -> usize {
        self.stages[stage].rank
    }

    /// Total number of t-letters.
    pub fn t_count(&self) -> usize {
        self.stages.iter().map(|s| s.rank).sum()
    }

    /// The group with one stage dropped; later stages shift down by one.
    pub fn without_stage(&self, stage: usize) -> Result<EocGroup> {
        if stage >= self.stages.len() {
            return Err(Error::InvalidArgument(format!("no stage {}", stage + 1)));
        }
        let mut spec = self.spec.clone();
        spec.stages.remove(stage);
        EocGroup::new(spec)
    }

    pub fn u_power(&self, stage: usize, e: i64) -> ReducedWord {
        self.stages[stage].dec.power(e)
    }

    /// `g1, G1, g2, G2, ..., t1.1, T1.1, t1.2, ...`
    pub fn generators(&self) -> Vec<Token> {
        let mut out: Vec<Token> = self.alphabet.letters().into_iter().map(Token::Base).collect();
        for (stage, st) in self.stages.iter().enumerate() {
            for index in 0..st.rank {
                for inverse in [false, true] {
                    out.push(Token::T {
                        stage,
                        index,
                        inverse,
                    });
                }
            }
        }
        out
    }

    fn token_ordinal(&self, tok: Token) -> usize {
        match tok {
            Token::Base(l) => l.ordinal() as usize,
            Token::T {
                stage,
                index,
                inverse,
            } => {
                let before: usize = self.stages[..stage].iter().map(|s| s.rank).sum();
                2 * self.alphabet.rank() as usize + 2 * (before + index) + inverse as usize
            }
        }
    }

    pub fn check_token(&self, tok: Token) -> Result<()> {
        match tok {
            Token::Base(l) => self.alphabet.check_letter(l),
            Token::T { stage, index, .. } => match self.stages.get(stage) {
                None => Err(Error::InvalidArgument(format!(
                    "{tok}: the group has {} stage(s)",
                    self.stages.len()
                ))),
                Some(st) if index >= st.rank => Err(Error::InvalidArgument(format!(
                    "{tok}: stage {} has rank {}",
                    stage + 1,
                    st.rank
                ))),
                Some(_) => Ok(()),
            },
        }
    }

    fn push_token(&self, r: &mut Reducer, tok: Token) {
        match tok {
            Token::Base(l) => r.push_base(ReducedWord::generator(l)),
            Token::T {
                stage,
                index,
                inverse,
            } => {
                let mut v = vec![0; self.stages[stage].rank];
                v[index] = if inverse { -1 } else { 1 };
                r.push_abelian(self, stage, 0, v);
            }
        }
    }

    pub fn normalize(&self, raw: &[Token]) -> Result<EocElement> {
        let mut r = Reducer::default();
        for &tok in raw {
            self.check_token(tok)?;
            self.push_token(&mut r, tok);
        }
        Ok(self.canonicalize(r.stack))
    }

    pub fn parse(&self, input: &str) -> Result<EocElement> {
        self.normalize(&parse_tokens(input)?)
    }

    pub fn from_base(&self, g: &ReducedWord) -> Result<EocElement> {
        self.alphabet.check(g)?;
        let mut r = Reducer::default();
        r.push_base(g.clone());
        Ok(self.canonicalize(r.stack))
    }

    /// Multiplies out a syllable sequence that need not be reduced.
    pub fn from_syllables<I: IntoIterator<Item = Syllable>>(&self, syllables: I) -> Result<EocElement> {
        let mut r = Reducer::default();
        for s in syllables {
            match s {
                Syllable::Base(g) => {
                    self.alphabet.check(&g)?;
                    r.push_base(g);
                }
                Syllable::Abelian {
                    stage,
                    u_exp,
                    t_exps,
                } => {
                    let Some(st) = self.stages.get(stage) else {
                        return Err(Error::InvalidArgument(format!("no stage {}", stage + 1)));
                    };
                    if t_exps.len() != st.rank {
                        return Err(Error::DimensionMismatch {
                            expected: st.rank,
                            actual: t_exps.len(),
                        });
                    }
                    r.push_abelian(self, stage, u_exp, t_exps);
                }
            }
        }
        Ok(self.canonicalize(r.stack))
    }

    fn push_element(&self, r: &mut Reducer, x: &EocElement) {
        for s in &x.syllables {
            match s {
                Syllable::Base(g) => r.push_base(g.clone()),
                Syllable::Abelian {
                    stage,
                    u_exp,
                    t_exps,
                } => r.push_abelian(self, *stage, *u_exp, t_exps.clone()),
            }
        }
    }

    pub fn mul(&self, x: &EocElement, y: &EocElement) -> EocElement {
        let mut r = Reducer::default();
        self.push_element(&mut r, x);
        self.push_element(&mut r, y);
        self.canonicalize(r.stack)
    }

    pub fn mul_token(&self, x: &EocElement, tok: Token) -> EocElement {
        let mut r = Reducer::default();
        self.push_element(&mut r, x);
        self.push_token(&mut r, tok);
        self.canonicalize(r.stack)
    }

    pub fn inverse(&self, x: &EocElement) -> EocElement {
        let mut r = Reducer::default();
        for s in x.syllables.iter().rev() {
            match s {
                Syllable::Base(g) => r.push_base(g.inverse()),
                Syllable::Abelian {
                    stage,
                    u_exp,
                    t_exps,
                } => r.push_abelian(self, *stage, -u_exp, t_exps.iter().map(|v| -v).collect()),
            }
        }
        self.canonicalize(r.stack)
    }

    /// A representative token sequence: base letters as written, abelian
    /// syllables as `u^e` followed by the t-powers in index order.
    pub fn tokens(&self, x: &EocElement) -> Vec<Token> {
        let mut out = Vec::new();
        for s in &x.syllables {
            match s {
                Syllable::Base(g) => out.extend(g.letters().iter().map(|&l| Token::Base(l))),
                Syllable::Abelian {
                    stage,
                    u_exp,
                    t_exps,
                } => {
                    out.extend(self.u_power(*stage, *u_exp).letters().iter().map(|&l| Token::Base(l)));
                    for (index, &v) in t_exps.iter().enumerate() {
                        let tok = Token::T {
                            stage: *stage,
                            index,
                            inverse: v < 0,
                        };
                        out.extend(std::iter::repeat_n(tok, v.unsigned_abs() as usize));
                    }
                }
            }
        }
        out
    }

    pub fn serialize(&self, x: &EocElement) -> String {
        let toks: Vec<String> = self.tokens(x).iter().map(Token::to_string).collect();
        toks.join(" ")
    }

    fn sort_key(&self, x: &EocElement) -> Vec<usize> {
        self.tokens(x).into_iter().map(|t| self.token_ordinal(t)).collect()
    }

    /// Replaces each base syllable by its canonical double-coset
    /// representative and moves the stripped `u`-powers into the neighbours.
    fn canonicalize(&self, mut syl: Vec<Syllable>) -> EocElement {
        let stage_at = |syl: &[Syllable], j: Option<usize>| -> Option<usize> {
            match j.and_then(|j| syl.get(j)) {
                Some(Syllable::Abelian { stage, .. }) => Some(*stage),
                _ => None,
            }
        };
        let mut shifts = Vec::new();
        for j in 0..syl.len() {
            if let Syllable::Base(g) = &syl[j] {
                let left = stage_at(&syl, j.checked_sub(1));
                let right = stage_at(&syl, Some(j + 1));
                let strip = canonical_double_coset(
                    left.map(|s| &self.stages[s].u),
                    g,
                    right.map(|s| &self.stages[s].u),
                );
                shifts.push((j, strip));
            }
        }
        for (j, strip) in shifts {
            if strip.left_exp != 0 {
                if let Syllable::Abelian { u_exp, .. } = &mut syl[j - 1] {
                    *u_exp += strip.left_exp;
                }
            }
            if strip.right_exp != 0 {
                if let Syllable::Abelian { u_exp, .. } = &mut syl[j + 1] {
                    *u_exp += strip.right_exp;
                }
            }
            syl[j] = Syllable::Base(strip.middle);
        }
        syl.retain(|s| !matches!(s, Syllable::Base(g) if g.is_empty()));
        EocElement { syllables: syl }
    }

    /// `(2k + 2N)^R`, the number of raw words the ball search may touch.
    pub fn ball_branching(&self, radius: u32) -> u128 {
        let g = self.generators().len() as u128;
        g.checked_pow(radius).unwrap_or(u128::MAX)
    }

    /// The ball of radius `R` in BFS layers; each layer is sorted by token order.
    pub fn ball_layers(&self, radius: u32, cap: u128) -> Result<BallLayers> {
        let needed = self.ball_branching(radius);
        if needed > cap {
            return Err(Error::BudgetExceeded {
                what: "ball enumeration",
                needed,
                cap,
            });
        }
        let mut layers = BallLayers::new();
        for _ in 0..radius {
            if !layers.grow(self) {
                break;
            }
        }
        Ok(layers)
    }

    pub fn enumerate_ball(&self, radius: u32, cap: u128) -> Result<Vec<EocElement>> {
        Ok(self.ball_layers(radius, cap)?.into_elements())
    }

    /// Minimal number of tokens spelling `x`, by BFS. `cap` bounds the number
    /// of elements visited.
    pub fn word_length(&self, x: &EocElement, cap: u128) -> Result<u32> {
        let upper = self.tokens(x).len() as u32;
        let mut layers = BallLayers::new();
        loop {
            if let Some(&r) = layers.radius_of.get(x) {
                return Ok(r);
            }
            if layers.radius() >= upper {
                unreachable!("the serialized form bounds the length");
            }
            layers.grow(self);
            if layers.len() as u128 > cap {
                return Err(Error::BudgetExceeded {
                    what: "word length search",
                    needed: layers.len() as u128,
                    cap,
                });
            }
        }
    }
}

/// BFS layers of a ball with a membership index.
#[derive(Clone, Debug)]
pub struct BallLayers {
    layers: Vec<Vec<EocElement>>,
    radius_of: HashMap<EocElement, u32>,
}

impl BallLayers {
    fn new() -> Self {
        let id = EocElement::identity();
        BallLayers {
            layers: vec![vec![id.clone()]],
            radius_of: HashMap::from([(id, 0)]),
        }
    }

    pub fn radius(&self) -> u32 {
        self.layers.len() as u32 - 1
    }

    pub fn len(&self) -> usize {
        self.radius_of.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn layers(&self) -> &[Vec<EocElement>] {
        &self.layers
    }

    pub fn radius_of(&self, x: &EocElement) -> Option<u32> {
        self.radius_of.get(x).copied()
    }

    pub fn into_elements(self) -> Vec<EocElement> {
        self.layers.into_iter().flatten().collect()
    }

    /// Adds the next layer. Returns false if it is empty (finite group, never
    /// the case here but kept honest).
    fn grow(&mut self, group: &EocGroup) -> bool {
        let r = self.radius() + 1;
        let gens = group.generators();
        let mut next = Vec::new();
        for x in self.layers.last().unwrap() {
            for &g in &gens {
                let y = group.mul_token(x, g);
                if !self.radius_of.contains_key(&y) {
                    self.radius_of.insert(y.clone(), r);
                    next.push(y);
                }
            }
        }
        let mut keyed: Vec<(Vec<usize>, EocElement)> =
            next.into_iter().map(|y| (group.sort_key(&y), y)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let nonempty = !keyed.is_empty();
        self.layers.push(keyed.into_iter().map(|(_, y)| y).collect());
        nonempty
    }
}

/// Left-to-right reduction keeping the stack free of mergeable neighbours.
#[derive(Default)]
struct Reducer {
    stack: Vec<Syllable>,
}

impl Reducer {
    fn push_base(&mut self, g: ReducedWord) {
        if g.is_empty() {
            return;
        }
        if let Some(Syllable::Base(h)) = self.stack.last_mut() {
            *h = h.mul(&g);
            if h.is_empty() {
                self.stack.pop();
            }
        } else {
            self.stack.push(Syllable::Base(g));
        }
    }

    fn push_abelian(&mut self, group: &EocGroup, stage: usize, e: i64, v: Vec<i64>) {
        if v.iter().all(|&x| x == 0) {
            self.push_base(group.u_power(stage, e));
            return;
        }
        let n = self.stack.len();
        match self.stack.last() {
            Some(Syllable::Abelian { stage: s, .. }) if *s == stage => {
                let Some(Syllable::Abelian { u_exp, t_exps, .. }) = self.stack.pop() else {
                    unreachable!()
                };
                let sum = t_exps.iter().zip(&v).map(|(a, b)| a + b).collect();
                self.push_abelian(group, stage, u_exp + e, sum);
            }
            Some(Syllable::Base(h)) if n >= 2 => {
                let below_same =
                    matches!(&self.stack[n - 2], Syllable::Abelian { stage: s, .. } if *s == stage);
                let k = if below_same {
                    power_membership_with(&group.stages[stage].dec, h)
                } else {
                    None
                };
                match k {
                    Some(k) => {
                        self.stack.pop();
                        let Some(Syllable::Abelian { u_exp, t_exps, .. }) = self.stack.pop() else {
                            unreachable!()
                        };
                        let sum = t_exps.iter().zip(&v).map(|(a, b)| a + b).collect();
                        self.push_abelian(group, stage, u_exp + k + e, sum);
                    }
                    None => self.stack.push(Syllable::Abelian {
                        stage,
                        u_exp: e,
                        t_exps: v,
                    }),
                }
            }
            _ => self.stack.push(Syllable::Abelian {
                stage,
                u_exp: e,
                t_exps: v,
            }),
        }
    }
}

/// Every token sequence of length at most `max_len` over `gens`, with no
/// token followed by its inverse.
pub fn raw_words(gens: &[Token], max_len: usize) -> Vec<Vec<Token>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &g in gens {
                if w.last() == Some(&g.inverse()) {
                    continue;
                }
                let mut x: Vec<Token> = w.clone();
                x.push(g);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
