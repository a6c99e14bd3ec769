//! Big powers in free groups: padded words
//! `g_0 u^{r_0} g_1 u^{r_1} ... g_k u^{r_k} g_{k+1}` and an exact threshold
//! `N` such that every exponent tuple with all `|r_i| > N` gives a
//! nontrivial word.
//!
//! Everything is computed after conjugating by `z`, where `u = z v z^-1` with
//! `v` cyclically reduced. Each `g_i` is stripped to `v^{s_i} h_i v^{t_i}`,
//! the offsets are folded into the exponent blocks, and every junction
//! `v^{±M} h_i v^{±M}` is reduced once to learn how many letters it eats.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freewords::{
    coset_strip, cyclic_reduce, power_membership, Alphabet, CyclicDecomposition, ReducedWord,
};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PaddedWordSpec {
    pub u: ReducedWord,
    pub gs: Vec<ReducedWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_flank: Option<ReducedWord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_flank: Option<ReducedWord>,
}

impl PaddedWordSpec {
    pub fn new(u: ReducedWord, gs: Vec<ReducedWord>) -> Result<Self> {
        let spec = PaddedWordSpec {
            u,
            gs,
            left_flank: None,
            right_flank: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_flanks(mut self, left: ReducedWord, right: ReducedWord) -> Self {
        self.left_flank = Some(left);
        self.right_flank = Some(right);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.u.is_empty() {
            return Err(Error::TrivialWord);
        }
        for g in &self.gs {
            if power_membership(&self.u, g).is_some() {
                return Err(Error::InCyclicSubgroup {
                    element: g.to_string(),
                    u: self.u.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.gs.len()
    }

    fn left(&self) -> ReducedWord {
        self.left_flank.clone().unwrap_or_default()
    }

    fn right(&self) -> ReducedWord {
        self.right_flank.clone().unwrap_or_default()
    }

    fn has_flanks(&self) -> bool {
        !self.left().is_empty() || !self.right().is_empty()
    }

    /// `Σ|g_i| + |u|`, flanks included.
    pub fn size(&self) -> usize {
        self.gs.iter().map(ReducedWord::len).sum::<usize>()
            + self.u.len()
            + self.left().len()
            + self.right().len()
    }

    fn check_r(&self, r: &[i64]) -> Result<()> {
        if r.len() != self.k() + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.k() + 1,
                actual: r.len(),
            });
        }
        Ok(())
    }
}

/// `u^{r_0} g_1 u^{r_1} ... g_k u^{r_k}`, reduced, without flanks.
pub fn build_core(spec: &PaddedWordSpec, r: &[i64]) -> Result<ReducedWord> {
    spec.check_r(r)?;
    let dec = cyclic_reduce(&spec.u);
    let mut w = dec.power(r[0]);
    for (g, &ri) in spec.gs.iter().zip(&r[1..]) {
        w = w.mul(g).mul(&dec.power(ri));
    }
    Ok(w)
}

/// The padded word with both flanks (missing flanks are trivial).
pub fn build_padded(spec: &PaddedWordSpec, r: &[i64]) -> Result<ReducedWord> {
    Ok(spec.left().mul(&build_core(spec, r)?).mul(&spec.right()))
}

/// `w`, `g_0 w`, `w g_{k+1}`, `g_0 w g_{k+1}`.
pub fn flanked_variants(spec: &PaddedWordSpec, r: &[i64]) -> Result<[ReducedWord; 4]> {
    let w = build_core(spec, r)?;
    let (l, rt) = (spec.left(), spec.right());
    Ok([w.clone(), l.mul(&w), w.mul(&rt), l.mul(&w).mul(&rt)])
}

/// Letters cancelled on each side when reducing `v^{σM} h v^{τM}` for large `M`.
fn consumption_at(v: &CyclicDecomposition, h: &ReducedWord, sigma: i64, tau: i64, m: i64) -> u64 {
    let left = v.power(sigma * m);
    let right = v.power(tau * m);
    let total = left.len() + h.len() + right.len();
    let reduced = left.mul(h).mul(&right).len();
    ((total - reduced) / 2) as u64
}

/// Stable consumption of a junction, indexed `[σ < 0][τ < 0]`.
fn junction_consumption(v: &CyclicDecomposition, h: &ReducedWord) -> [[u64; 2]; 2] {
    let mut out = [[0; 2]; 2];
    for (i, sigma) in [1i64, -1].into_iter().enumerate() {
        for (j, tau) in [1i64, -1].into_iter().enumerate() {
            let mut m = h.len() as i64 + 2;
            loop {
                let c = consumption_at(v, h, sigma, tau, m);
                if (1..=2).all(|d| consumption_at(v, h, sigma, tau, m + d) == c) {
                    out[i][j] = c;
                    break;
                }
                m += 1;
            }
        }
    }
    out
}

/// One `g_i` after conjugation and stripping.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct JunctionLedger {
    pub g: ReducedWord,
    pub s: i64,
    pub h: ReducedWord,
    pub t: i64,
    /// Cancelled letter pairs in `v^{σM} h v^{τM}`, rows `σ = +,-`, columns `τ = +,-`.
    pub consumption: [[u64; 2]; 2],
}

impl JunctionLedger {
    pub fn max_consumption(&self) -> u64 {
        self.consumption.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// `v^{r_0 + off_0} h_1 v^{r_1 + off_1} ... h_k v^{r_k + off_k}`, conjugated
/// back by `z` and flanked.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SymbolicBlockWord {
    pub conjugator: ReducedWord,
    pub core: ReducedWord,
    pub offsets: Vec<i64>,
    pub junctions: Vec<JunctionLedger>,
}

impl SymbolicBlockWord {
    pub fn new(spec: &PaddedWordSpec) -> Result<Self> {
        spec.validate()?;
        let dec = cyclic_reduce(&spec.u);
        let z = &dec.conjugator;
        let zi = z.inverse();
        let mut junctions = Vec::with_capacity(spec.k());
        for g in &spec.gs {
            let gc = zi.mul(g).mul(z);
            let strip = coset_strip(&dec.core, &gc)?;
            let core_dec = cyclic_reduce(&dec.core);
            junctions.push(JunctionLedger {
                g: g.clone(),
                s: strip.left_exp,
                consumption: junction_consumption(&core_dec, &strip.middle),
                h: strip.middle,
                t: strip.right_exp,
            });
        }
        let k = junctions.len();
        let offsets = (0..=k)
            .map(|j| {
                let t = if j > 0 { junctions[j - 1].t } else { 0 };
                let s = if j < k { junctions[j].s } else { 0 };
                t + s
            })
            .collect();
        Ok(SymbolicBlockWord {
            conjugator: dec.conjugator,
            core: dec.core,
            offsets,
            junctions,
        })
    }

    /// Letters that block `j` can lose to its two junctions.
    pub fn block_exposure(&self, j: usize) -> u64 {
        let left = j.checked_sub(1).map_or(0, |i| self.junctions[i].max_consumption());
        let right = self.junctions.get(j).map_or(0, JunctionLedger::max_consumption);
        left + right
    }

    /// Rebuilds the core word from the symbolic form.
    pub fn instantiate(&self, r: &[i64]) -> Result<ReducedWord> {
        if r.len() != self.offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.offsets.len(),
                actual: r.len(),
            });
        }
        let v = cyclic_reduce(&self.core);
        let mut w = v.power(r[0] + self.offsets[0]);
        for (j, jl) in self.junctions.iter().enumerate() {
            w = w.mul(&jl.h).mul(&v.power(r[j + 1] + self.offsets[j + 1]));
        }
        Ok(self.conjugator.mul(&w).mul(&self.conjugator.inverse()))
    }

    /// Lower bound on `|core word|` when every `|r_j| ≥ m` and `m ≥ |off_j|`.
    fn length_floor(&self, m: u64) -> i128 {
        let v = self.core.len() as i128;
        let blocks: i128 = self
            .offsets
            .iter()
            .map(|o| (m as i128 - o.unsigned_abs() as i128) * v)
            .sum();
        let hs: i128 = self.junctions.iter().map(|j| j.h.len() as i128).sum();
        let eaten: i128 = self.junctions.iter().map(|j| 2 * j.max_consumption() as i128).sum();
        blocks + hs - eaten - 2 * self.conjugator.len() as i128
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ThresholdReport {
    pub spec: PaddedWordSpec,
    pub symbolic: SymbolicBlockWord,
    /// Least bound keeping every exponent block nonempty after reduction.
    pub block_bound: u64,
    /// Present when flanks are nontrivial: the bound making the core word
    /// longer than both flanks together.
    pub flank_bound: Option<u64>,
    pub threshold: u64,
}

pub fn threshold_report(spec: &PaddedWordSpec) -> Result<ThresholdReport> {
    let symbolic = SymbolicBlockWord::new(spec)?;
    let v = symbolic.core.len() as u64;
    let block_bound = if spec.k() == 0 {
        0
    } else {
        (0..symbolic.offsets.len())
            .map(|j| symbolic.offsets[j].unsigned_abs() + symbolic.block_exposure(j) / v)
            .max()
            .unwrap_or(0)
    };
    let flank_bound = spec.has_flanks().then(|| {
        let excess = (spec.left().len() + spec.right().len()) as i128;
        let mut n = block_bound;
        while symbolic.length_floor(n + 1) <= excess {
            n += 1;
        }
        n
    });
    Ok(ThresholdReport {
        spec: spec.clone(),
        threshold: flank_bound.unwrap_or(block_bound).max(block_bound),
        symbolic,
        block_bound,
        flank_bound,
    })
}

pub fn threshold(spec: &PaddedWordSpec) -> Result<u64> {
    Ok(threshold_report(spec)?.threshold)
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CertifyReport {
    pub spec: PaddedWordSpec,
    pub threshold: u64,
    pub seed: u64,
    pub samples: u64,
    pub sweep_radius: u64,
    pub sweep_count: u64,
    /// Exponent tuples in the sweep making some variant trivial.
    pub trivializing: Vec<Vec<i64>>,
}

fn any_trivial(spec: &PaddedWordSpec, r: &[i64]) -> Result<bool> {
    Ok(flanked_variants(spec, r)?.iter().any(ReducedWord::is_empty))
}

/// Random and exhaustive validation of a claimed threshold. Fails with
/// [`Error::Counterexample`] if any tuple with every `|r_i| > n` trivializes.
pub fn certify(
    spec: &PaddedWordSpec,
    n: u64,
    samples: u64,
    seed: u64,
    sweep_cap: u64,
) -> Result<CertifyReport> {
    spec.validate()?;
    let len = spec.k() + 1;
    let above = |r: &[i64]| r.iter().all(|x| x.unsigned_abs() > n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let r: Vec<i64> = (0..len)
            .map(|_| {
                let m = rng.gen_range(n + 1..=n + 10) as i64;
                if rng.gen_bool(0.5) { m } else { -m }
            })
            .collect();
        if any_trivial(spec, &r)? {
            return Err(Error::Counterexample { threshold: n, r });
        }
    }
    let radius = (n + 2).min(sweep_cap);
    let l = radius as i64;
    let mut r = vec![-l; len];
    let mut trivializing = Vec::new();
    let mut count = 0u64;
    'sweep: loop {
        count += 1;
        if any_trivial(spec, &r)? {
            if above(&r) {
                return Err(Error::Counterexample {
                    threshold: n,
                    r: r.clone(),
                });
            }
            trivializing.push(r.clone());
        }
        for i in 0..len {
            if r[i] < l {
                r[i] += 1;
                continue 'sweep;
            }
            r[i] = -l;
        }
        break;
    }
    Ok(CertifyReport {
        spec: spec.clone(),
        threshold: n,
        seed,
        samples,
        sweep_radius: radius,
        sweep_count: count,
        trivializing,
    })
}

/// A single bound valid for every padded word whose pieces have total length
/// at most `max_len`, with arbitrary flanks inside that budget.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct UniformThreshold {
    pub u: ReducedWord,
    pub max_len: u32,
    /// Largest `|s|`, `|t|` over stripped pieces.
    pub max_offset: u64,
    /// Largest junction consumption.
    pub max_consumption: u64,
    pub bound: u64,
}

/// `2 M_s + ⌊(2 M_c + 2|z| + L) / |v|⌋` over every piece `g ∉ <u>` with `|g| ≤ L`.
pub fn uniform_threshold(
    alphabet: Alphabet,
    u: &ReducedWord,
    max_len: u32,
    cap: u128,
) -> Result<UniformThreshold> {
    alphabet.check(u)?;
    if u.is_empty() {
        return Err(Error::TrivialWord);
    }
    let dec = cyclic_reduce(u);
    let v = cyclic_reduce(&dec.core);
    let zi = dec.conjugator.inverse();
    let mut max_offset = 0u64;
    let mut max_consumption = 0u64;
    for g in alphabet.ball(max_len, cap)? {
        if power_membership(u, &g).is_some() {
            continue;
        }
        let gc = zi.mul(&g).mul(&dec.conjugator);
        let strip = coset_strip(&dec.core, &gc)?;
        max_offset = max_offset
            .max(strip.left_exp.unsigned_abs())
            .max(strip.right_exp.unsigned_abs());
        let c = junction_consumption(&v, &strip.middle);
        max_consumption = max_consumption.max(c.iter().flatten().copied().max().unwrap_or(0));
    }
    let vl = dec.core.len() as u64;
    let bound = 2 * max_offset
        + (2 * max_consumption + 2 * dec.conjugator.len() as u64 + max_len as u64) / vl;
    Ok(UniformThreshold {
        u: u.clone(),
        max_len,
        max_offset,
        max_consumption,
        bound,
    })
}

/// Regression corpus over `F_2`: `|u| ≤ 4`, `Σ|g_i| ≤ 8`.
pub fn corpus() -> Vec<PaddedWordSpec> {
    let raw: &[(&str, &[&str], Option<(&str, &str)>)] = &[
        ("g1", &["g2"], None),
        ("g1", &["g1 g1 g1 g2 G1 G1"], None),
        ("g1 g2", &["G2 g1"], None),
        ("g1", &[], None),
        ("g1 g2", &[], Some(("G2 G1 G2", "g2"))),
        ("g1", &["g2", "G2"], None),
        ("g1", &["g2 g1 g2", "G2 G1"], None),
        ("g1 g2", &["g1", "g2"], None),
        ("g1 g2", &["g2 g1"], None),
        ("g1 g2", &["G1 G2 g1"], None),
        ("g1 g1 g2", &["g2"], None),
        ("g1 g1 g2", &["g1 g1", "G2"], None),
        ("g2 g1 G2", &["g1 g2"], None),
        ("g2 g1 G2", &["g2", "G2 g2 g2"], None),
        ("g1 g2 G1 G2", &["g1"], None),
        ("g1 g2 G1 G2", &["g2 g1", "G1 G2"], None),
        ("g1 g2 g2", &["G2 G2 G1 g2"], None),
        ("g1", &["g2"], Some(("G1 G1 G1", "g1 g1"))),
        ("g1 g2", &["g1 g1"], Some(("G2 G1 G2 G1", "g2 g1"))),
        ("g1 G2", &["g1", "g2 g2", "G1"], None),
        ("g2", &["g1 g2 G1", "g1 G2"], Some(("g2 g2", ""))),
        ("g1 g1 g2 G1", &["g2 g1", "g1"], None),
    ];
    raw.iter()
        .map(|(u, gs, flanks)| {
            let p = |s: &str| crate::freewords::parse_word(s).expect("corpus word");
            let spec = PaddedWordSpec::new(p(u), gs.iter().map(|g| p(g)).collect())
                .expect("corpus spec");
            match flanks {
                Some((l, r)) => spec.with_flanks(p(l), p(r)),
                None => spec,
            }
        })
        .collect()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if points.len() < 2 || sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
