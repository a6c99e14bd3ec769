//! The retractions `Θ^p_{n,R}` sending `t_i ↦ u^{p(2R+1)^{i-1}}`, the least
//! `p` that keeps a ball apart, complexity curves and stage-by-stage
//! composition for towers.
//!
//! "Discriminates radius `R`" here means injective on `B_R`, equivalently
//! nonzero on every nontrivial element of `B_{2R}`.

use std::collections::HashMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::bigpowers::{linear_fit, uniform_threshold};
use crate::eoc::{EocElement, EocGroup, Syllable, Token};
use crate::error::{Error, Result};
use crate::freewords::ReducedWord;
use crate::zdiscrim::lower_bound_value;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct ThetaSpec {
    pub stage: usize,
    pub radius: u32,
    pub p: u64,
}

impl ThetaSpec {
    /// `p (2R+1)^{i-1}` for `i = 1..=rank`.
    pub fn exponents(&self, rank: usize) -> Result<Vec<i64>> {
        let base = 2 * self.radius as i64 + 1;
        let mut c = i64::try_from(self.p).map_err(|_| Error::Overflow("theta exponent"))?;
        let mut out = Vec::with_capacity(rank);
        for i in 0..rank {
            if i > 0 {
                c = c.checked_mul(base).ok_or(Error::Overflow("theta exponent"))?;
            }
            out.push(c);
        }
        Ok(out)
    }
}

fn substituted_exp(u_exp: i64, t_exps: &[i64], exps: &[i64]) -> Result<i64> {
    t_exps.iter().zip(exps).try_fold(u_exp, |acc, (v, c)| {
        v.checked_mul(*c)
            .and_then(|x| acc.checked_add(x))
            .ok_or(Error::Overflow("theta image exponent"))
    })
}

/// `Θ` applied to an element whose t-letters all belong to `spec.stage`.
pub fn apply_theta(group: &EocGroup, spec: ThetaSpec, x: &EocElement) -> Result<ReducedWord> {
    let exps = spec.exponents(group.stage_rank(spec.stage))?;
    let mut letters = Vec::new();
    for s in x.syllables() {
        match s {
            Syllable::Base(g) => letters.extend_from_slice(g.letters()),
            Syllable::Abelian {
                stage,
                u_exp,
                t_exps,
            } => {
                if *stage != spec.stage {
                    return Err(Error::ForeignStage {
                        stage: stage + 1,
                        expected: spec.stage + 1,
                    });
                }
                let e = substituted_exp(*u_exp, t_exps, &exps)?;
                letters.extend_from_slice(group.u_power(*stage, e).letters());
            }
        }
    }
    Ok(ReducedWord::from_letters(letters))
}

/// `Θ` for one stage of a tower, landing in `target = group.without_stage(stage)`.
pub fn apply_stage(
    group: &EocGroup,
    target: &EocGroup,
    spec: ThetaSpec,
    x: &EocElement,
) -> Result<EocElement> {
    let exps = spec.exponents(group.stage_rank(spec.stage))?;
    let mut out = Vec::with_capacity(x.syllables().len());
    for s in x.syllables() {
        out.push(match s {
            Syllable::Abelian {
                stage,
                u_exp,
                t_exps,
            } if *stage == spec.stage => {
                Syllable::Base(group.u_power(*stage, substituted_exp(*u_exp, t_exps, &exps)?))
            }
            Syllable::Abelian {
                stage,
                u_exp,
                t_exps,
            } => Syllable::Abelian {
                stage: if *stage > spec.stage { stage - 1 } else { *stage },
                u_exp: *u_exp,
                t_exps: t_exps.clone(),
            },
            base => base.clone(),
        });
    }
    target.from_syllables(out)
}

/// Substitutes `t_{s,i} ↦ u_s^{exps[s][i]}` for every stage.
pub fn apply_all(group: &EocGroup, exps: &[Vec<i64>], x: &EocElement) -> Result<ReducedWord> {
    let mut letters = Vec::new();
    for s in x.syllables() {
        match s {
            Syllable::Base(g) => letters.extend_from_slice(g.letters()),
            Syllable::Abelian {
                stage,
                u_exp,
                t_exps,
            } => {
                let e = substituted_exp(*u_exp, t_exps, &exps[*stage])?;
                letters.extend_from_slice(group.u_power(*stage, e).letters());
            }
        }
    }
    Ok(ReducedWord::from_letters(letters))
}

/// The same substitution on a raw token sequence, bypassing normal forms.
pub fn apply_raw(group: &EocGroup, exps: &[Vec<i64>], raw: &[Token]) -> ReducedWord {
    let mut letters = Vec::new();
    for &t in raw {
        match t {
            Token::Base(l) => letters.push(l),
            Token::T {
                stage,
                index,
                inverse,
            } => {
                let e = if inverse {
                    -exps[stage][index]
                } else {
                    exps[stage][index]
                };
                letters.extend_from_slice(group.u_power(stage, e).letters());
            }
        }
    }
    ReducedWord::from_letters(letters)
}

/// `max_x |φ(x)|` over base letters and t-letters, where substituted
/// t-letters go to `u_s^{exps[s][i]}` and the rest stay generators.
pub fn hom_complexity(group: &EocGroup, exps: &[Option<Vec<i64>>]) -> u64 {
    let mut m = 1;
    for (s, e) in exps.iter().enumerate() {
        if let Some(e) = e {
            let dec = crate::freewords::cyclic_reduce(group.stage_u(s));
            for &x in e {
                m = m.max(dec.power_len(x));
            }
        }
    }
    m
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Cap on `(2k+2N)^R` for ball enumeration.
    pub ball_cap: u128,
    /// Largest `p` tried when no a-priori ceiling is available.
    pub p_cap: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            ball_cap: 1 << 40,
            p_cap: 256,
        }
    }
}

/// Two ball elements with the same image; `kernel = x^-1 y`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Collision {
    pub p: u64,
    pub x: String,
    pub y: String,
    pub kernel: String,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ComplexityRecord {
    pub radius: u32,
    pub rank: usize,
    pub p_min: u64,
    pub complexity: u64,
    #[serde(serialize_with = "ser_rational")]
    pub lower_bound: BigRational,
    pub upper_model: u64,
    pub ball_size: usize,
    pub ceiling: Option<u64>,
    /// The first collision at `p_min - 1`, if `p_min > 1`.
    pub failure_below: Option<Collision>,
}

fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// First pair in ball order with equal images, or `None` if injective.
fn first_collision<T, F>(ball: &[EocElement], mut image: F) -> Result<Option<(usize, usize)>>
where
    T: std::hash::Hash + Eq,
    F: FnMut(&EocElement) -> Result<T>,
{
    let mut seen: HashMap<T, usize> = HashMap::with_capacity(ball.len());
    for (j, y) in ball.iter().enumerate() {
        if let Some(i) = seen.insert(image(y)?, j) {
            return Ok(Some((i, j)));
        }
    }
    Ok(None)
}

fn collision(group: &EocGroup, ball: &[EocElement], p: u64, (i, j): (usize, usize)) -> Collision {
    let (x, y) = (&ball[i], &ball[j]);
    Collision {
        p,
        x: group.serialize(x),
        y: group.serialize(y),
        kernel: group.serialize(&group.mul(&group.inverse(x), y)),
    }
}

/// A p that certainly works for a single stage: one more than the uniform
/// big-powers bound for pieces of total length `2R`.
pub fn p_ceiling(group: &EocGroup, stage: usize, radius: u32, cap: u128) -> Result<u64> {
    let ut = uniform_threshold(group.alphabet(), group.stage_u(stage), 2 * radius, cap)?;
    Ok(ut.bound + 1)
}

/// Least `p ≥ 1` such that `Θ^p_{n,R}` for `stage` is injective on `B_R`.
pub fn minimal_discriminating_p(
    group: &EocGroup,
    stage: usize,
    radius: u32,
    opts: SearchOptions,
) -> Result<ComplexityRecord> {
    if stage >= group.stage_count() {
        return Err(Error::InvalidArgument(format!("no stage {}", stage + 1)));
    }
    let ball = group.enumerate_ball(radius, opts.ball_cap)?;
    let target = group.without_stage(stage)?;
    let ceiling = if group.stage_count() == 1 {
        Some(p_ceiling(group, stage, radius, opts.ball_cap)?)
    } else {
        None
    };
    let limit = ceiling.unwrap_or(opts.p_cap);
    let mut failure_below = None;
    for p in 1..=limit {
        let spec = ThetaSpec { stage, radius, p };
        match first_collision(&ball, |x| apply_stage(group, &target, spec, x))? {
            Some(pair) => failure_below = Some(collision(group, &ball, p, pair)),
            None => {
                let n = group.stage_rank(stage);
                let exps = spec.exponents(n)?;
                let mut all = vec![None; group.stage_count()];
                all[stage] = Some(exps);
                let model = (group.stage_u(stage).len() as u64)
                    .checked_mul(p)
                    .and_then(|x| x.checked_mul((2 * radius as u64 + 1).checked_pow(n as u32 - 1)?))
                    .ok_or(Error::Overflow("upper model"))?;
                return Ok(ComplexityRecord {
                    radius,
                    rank: n,
                    p_min: p,
                    complexity: hom_complexity(group, &all),
                    lower_bound: lower_bound_value(n + 1, radius)?,
                    upper_model: model,
                    ball_size: ball.len(),
                    ceiling,
                    failure_below: failure_below.filter(|c: &Collision| c.p + 1 == p),
                });
            }
        }
    }
    Err(Error::NoSolutionWithinBound { bound: limit as i64 })
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct Curve {
    pub records: Vec<ComplexityRecord>,
    /// Set when a later radius ran out of budget.
    pub truncated: Option<String>,
    pub loglog_slope: Option<f64>,
}

/// Slope of `log complexity` against `log R` over `R ≥ 1`. Metadata only.
pub fn loglog_slope(records: &[ComplexityRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.radius >= 1)
        .map(|r| ((r.radius as f64).ln(), (r.complexity as f64).ln()))
        .collect();
    linear_fit(&pts).map(|(m, _)| m)
}

pub fn complexity_curve(
    group: &EocGroup,
    stage: usize,
    r_max: u32,
    opts: SearchOptions,
) -> Result<Curve> {
    let mut records = Vec::new();
    let mut truncated = None;
    for r in 0..=r_max {
        match minimal_discriminating_p(group, stage, r, opts) {
            Ok(rec) => records.push(rec),
            Err(e @ Error::BudgetExceeded { .. }) if !records.is_empty() => {
                truncated = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let loglog_slope = loglog_slope(&records);
    Ok(Curve {
        records,
        truncated,
        loglog_slope,
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct StageStep {
    pub stage: usize,
    pub p: u64,
    /// `|Θ_s|` as a map onto the tower with this stage removed.
    pub complexity: u64,
    pub failure_below: Option<Collision>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ChainReport {
    pub radius: u32,
    /// In order of application, outermost stage first.
    pub steps: Vec<StageStep>,
    pub exponents: Vec<Vec<i64>>,
    pub complexity: u64,
    pub stage_product: u64,
    /// `|Φ(Θ_s(x))| ≤ |Θ_s(x)| |Φ|` held for every generator at every level.
    pub generatorwise: bool,
    pub injective: bool,
    pub ball_size: usize,
}

impl ChainReport {
    pub fn submultiplicative(&self) -> bool {
        self.generatorwise && self.complexity <= self.stage_product
    }
}

/// Removes stages from the last to the first, each time choosing the least
/// `p` keeping the current image of `B_R` injective.
pub fn compose_chain(group: &EocGroup, radius: u32, opts: SearchOptions) -> Result<ChainReport> {
    let k = group.stage_count();
    if k == 0 {
        return Err(Error::InvalidArgument("the group has no stages".into()));
    }
    let ball = group.enumerate_ball(radius, opts.ball_cap)?;
    let mut current = ball.clone();
    let mut cur_group = group.clone();
    let mut steps = Vec::with_capacity(k);
    for stage in (0..k).rev() {
        let target = cur_group.without_stage(stage)?;
        let limit = if k == 1 {
            p_ceiling(group, stage, radius, opts.ball_cap)?
        } else {
            opts.p_cap
        };
        let mut found = None;
        let mut failure_below = None;
        for p in 1..=limit {
            let spec = ThetaSpec { stage, radius, p };
            match first_collision(&current, |x| apply_stage(&cur_group, &target, spec, x))? {
                Some(pair) => failure_below = Some(collision(&cur_group, &current, p, pair)),
                None => {
                    found = Some(p);
                    break;
                }
            }
        }
        let p = found.ok_or(Error::NoSolutionWithinBound { bound: limit as i64 })?;
        let spec = ThetaSpec { stage, radius, p };
        let mut exps = vec![None; cur_group.stage_count()];
        exps[stage] = Some(spec.exponents(cur_group.stage_rank(stage))?);
        steps.push(StageStep {
            stage,
            p,
            complexity: hom_complexity(&cur_group, &exps),
            failure_below: failure_below.filter(|c: &Collision| c.p + 1 == p),
        });
        current = current
            .iter()
            .map(|x| apply_stage(&cur_group, &target, spec, x))
            .collect::<Result<_>>()?;
        cur_group = target;
    }
    steps.reverse();
    let exponents: Vec<Vec<i64>> = steps
        .iter()
        .map(|st| {
            ThetaSpec {
                stage: st.stage,
                radius,
                p: st.p,
            }
            .exponents(group.stage_rank(st.stage))
        })
        .collect::<Result<_>>()?;
    let all: Vec<Option<Vec<i64>>> = exponents.iter().cloned().map(Some).collect();
    let complexity = hom_complexity(group, &all);
    let stage_product = steps
        .iter()
        .try_fold(1u64, |acc, st| acc.checked_mul(st.complexity))
        .ok_or(Error::Overflow("stage product"))?;

    // Level s: Θ_s on the tower of stages 0..=s, then the composite Φ of the
    // stages below. Θ_s(t_{s,i}) is a base word, and a base word has the
    // same length in any extension as in F (kill the t-letters).
    let mut generatorwise = true;
    for s in 0..k {
        let truncated = |m: usize| {
            let mut spec = group.spec().clone();
            spec.stages.truncate(m);
            EocGroup::new(spec)
        };
        let (below, upto) = (truncated(s)?, truncated(s + 1)?);
        let phi = hom_complexity(&below, &all[..s]);
        let dec = crate::freewords::cyclic_reduce(group.stage_u(s));
        for tok in upto.generators() {
            let x = upto.normalize(&[tok])?;
            let composite_len = apply_all(&upto, &exponents[..=s], &x)?.len() as u64;
            let theta_len = match tok {
                Token::T { stage, index, .. } if stage == s => dec.power_len(exponents[s][index]),
                _ => 1,
            };
            generatorwise &= composite_len <= theta_len * phi;
        }
    }

    let mut seen = HashMap::new();
    let mut injective = true;
    for x in &ball {
        if seen.insert(apply_all(group, &exponents, x)?, ()).is_some() {
            injective = false;
        }
    }
    Ok(ChainReport {
        radius,
        steps,
        exponents,
        complexity,
        stage_product,
        generatorwise,
        injective,
        ball_size: ball.len(),
    })
}

/// Every token sequence of length at most `max_len`, cancelling pairs included.
pub fn all_raw_words(gens: &[Token], max_len: usize) -> Vec<Vec<Token>> {
    let mut out = vec![Vec::new()];
    let mut start = 0;
    for _ in 0..max_len {
        let end = out.len();
        for i in start..end {
            for &g in gens {
                let mut w = out[i].clone();
                w.push(g);
                out.push(w);
            }
        }
        start = end;
    }
    out
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CrosscheckReport {
    pub radius: u32,
    pub max_len: usize,
    pub exponents: Vec<Vec<i64>>,
    pub words: u64,
    pub disagreements: u64,
    /// Up to the first 20 disagreeing raw words.
    pub examples: Vec<String>,
}

/// Compares `normalize(w).is_trivial()` with the triviality of the raw
/// substitution image, for every raw word up to `max_len` tokens. The
/// exponents come from the chain at radius `R` unless `p_override` forces one
/// `p` for every stage.
pub fn crosscheck(
    group: &EocGroup,
    radius: u32,
    max_len: usize,
    p_override: Option<u64>,
    opts: SearchOptions,
) -> Result<CrosscheckReport> {
    let exponents = match p_override {
        Some(p) => (0..group.stage_count())
            .map(|stage| ThetaSpec { stage, radius, p }.exponents(group.stage_rank(stage)))
            .collect::<Result<_>>()?,
        None => compose_chain(group, radius, opts)?.exponents,
    };
    let gens = group.generators();
    let needed = (gens.len() as u128).checked_pow(max_len as u32).unwrap_or(u128::MAX);
    if needed > opts.ball_cap {
        return Err(Error::BudgetExceeded {
            what: "raw word enumeration",
            needed,
            cap: opts.ball_cap,
        });
    }
    let mut words = 0;
    let mut disagreements = 0;
    let mut examples = Vec::new();
    for raw in all_raw_words(&gens, max_len) {
        words += 1;
        let nf = group.normalize(&raw)?.is_trivial();
        let img = apply_raw(group, &exponents, &raw).is_empty();
        if nf != img {
            disagreements += 1;
            if examples.len() < 20 {
                let s: Vec<String> = raw.iter().map(Token::to_string).collect();
                examples.push(s.join(" "));
            }
        }
    }
    Ok(CrosscheckReport {
        radius,
        max_len,
        exponents,
        words,
        disagreements,
        examples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eoc::{EocSpec, StageSpec};
    use crate::freewords::parse_word;
    use crate::zdiscrim;

    fn w(s: &str) -> ReducedWord {
        parse_word(s).unwrap()
    }

    fn group(stages: &[(&str, u32)]) -> EocGroup {
        EocGroup::new(EocSpec {
            free_rank: 2,
            stages: stages
                .iter()
                .map(|&(u, rank)| StageSpec { u: w(u), rank })
                .collect(),
        })
        .unwrap()
    }

    fn opts() -> SearchOptions {
        SearchOptions::default()
    }

    #[test]
    fn theta_examples() {
        let g = group(&[("g1", 1)]);
        let spec = ThetaSpec { stage: 0, radius: 2, p: 7 };
        assert_eq!(apply_theta(&g, spec, &g.parse("t1.1").unwrap()).unwrap(), w("g1").pow(7));
        assert_eq!(apply_theta(&g, spec, &g.parse("g2 g1").unwrap()).unwrap(), w("g2 g1"));
        let g = group(&[("g1", 2)]);
        assert_eq!(apply_theta(&g, spec, &g.parse("t1.2").unwrap()).unwrap(), w("g1").pow(35));
        let g = group(&[("g1", 1), ("g2", 1)]);
        assert_eq!(
            apply_theta(&g, spec, &g.parse("t2.1").unwrap()).unwrap_err(),
            Error::ForeignStage { stage: 2, expected: 1 }
        );
    }

    #[test]
    fn p_min_examples() {
        let g = group(&[("g1", 1)]);
        let r0 = minimal_discriminating_p(&g, 0, 0, opts()).unwrap();
        assert_eq!((r0.p_min, r0.complexity), (1, 1));
        let r1 = minimal_discriminating_p(&g, 0, 1, opts()).unwrap();
        assert_eq!(r1.p_min, 2);
        let c = r1.failure_below.unwrap();
        assert_eq!((c.p, c.kernel.as_str()), (1, "G1 t1.1"));
        assert!(r1.p_min <= r1.ceiling.unwrap());
        let g2 = group(&[("g1", 2)]);
        let r = minimal_discriminating_p(&g2, 0, 1, opts()).unwrap();
        assert_eq!(r.p_min, 2);
        assert_eq!(r.complexity, 6);
        assert_eq!(r.failure_below.unwrap().kernel, "G1 t1.1");
    }

    #[test]
    fn complexity_matches_model_for_cyclically_reduced_u() {
        for u in ["g1", "g1 g2"] {
            let g = group(&[(u, 2)]);
            for r in 0..=2 {
                let rec = minimal_discriminating_p(&g, 0, r, opts()).unwrap();
                assert_eq!(rec.complexity, rec.upper_model.max(1));
            }
        }
        let g = group(&[("g2 g1 G2", 1)]);
        let rec = minimal_discriminating_p(&g, 0, 1, opts()).unwrap();
        assert!(rec.complexity <= rec.upper_model);
    }

    #[test]
    fn theta_retracts_onto_base() {
        let g = group(&[("g1 g2", 2)]);
        let spec = ThetaSpec { stage: 0, radius: 3, p: 5 };
        for b in g.alphabet().ball(4, u128::MAX).unwrap() {
            let x = g.from_base(&b).unwrap();
            assert_eq!(apply_theta(&g, spec, &x).unwrap(), b);
        }
    }

    #[test]
    fn theta_is_a_homomorphism() {
        let g = group(&[("g1", 2)]);
        let spec = ThetaSpec { stage: 0, radius: 1, p: 3 };
        let ball = g.enumerate_ball(2, u128::MAX).unwrap();
        for x in &ball {
            let tx = apply_theta(&g, spec, x).unwrap();
            for y in &ball {
                let lhs = apply_theta(&g, spec, &g.mul(x, y)).unwrap();
                assert_eq!(lhs, tx.mul(&apply_theta(&g, spec, y).unwrap()));
            }
        }
    }

    #[test]
    fn p_min_decides_the_word_problem_on_the_ball() {
        for (u, n, rmax) in [("g1", 1, 4), ("g1", 2, 2), ("g1 g2", 1, 3)] {
            let g = group(&[(u, n)]);
            for r in 0..=rmax {
                let rec = minimal_discriminating_p(&g, 0, r, opts()).unwrap();
                let spec = ThetaSpec { stage: 0, radius: r, p: rec.p_min };
                for x in g.enumerate_ball(r, u128::MAX).unwrap() {
                    assert_eq!(x.is_trivial(), apply_theta(&g, spec, &x).unwrap().is_empty());
                }
            }
        }
    }

    #[test]
    fn abelian_part_is_scaled_theta() {
        for (n, r) in [(1usize, 1u32), (1, 3), (2, 1), (2, 2)] {
            let g = group(&[("g1", n as u32)]);
            let rec = minimal_discriminating_p(&g, 0, r, opts()).unwrap();
            let rr = r as i64;
            let theta = zdiscrim::theta(n + 1, r).unwrap();
            let mut box_images = HashMap::new();
            let mut ball_images = HashMap::new();
            let mut pt = vec![-rr; n + 1];
            loop {
                let x = g
                    .from_syllables([Syllable::Abelian {
                        stage: 0,
                        u_exp: pt[0],
                        t_exps: pt[1..].to_vec(),
                    }])
                    .unwrap();
                // At p = 2R+1 the map is θ_{n+1,R} on exponent vectors.
                let wide = ThetaSpec { stage: 0, radius: r, p: 2 * r as u64 + 1 };
                let img = apply_theta(&g, wide, &x).unwrap();
                let v = zdiscrim::IntVector::from_i64s(&pt).unwrap();
                let e = crate::freewords::power_membership(&w("g1"), &img).unwrap();
                assert_eq!(num_bigint::BigInt::from(e), theta.apply(&v).unwrap());
                assert!(box_images.insert(img, pt.clone()).is_none());
                if pt.iter().map(|c| c.abs()).sum::<i64>() <= rr {
                    let spec = ThetaSpec { stage: 0, radius: r, p: rec.p_min };
                    let img = apply_theta(&g, spec, &x).unwrap();
                    assert!(ball_images.insert(img, pt.clone()).is_none());
                }
                let Some(i) = pt.iter().position(|&c| c < rr) else { break };
                pt[i] += 1;
                pt[..i].iter_mut().for_each(|c| *c = -rr);
            }
        }
    }

    #[test]
    fn curve_shapes() {
        let c1 = complexity_curve(&group(&[("g1", 1)]), 0, 4, opts()).unwrap();
        let c2 = complexity_curve(&group(&[("g1", 2)]), 0, 4, opts()).unwrap();
        assert_eq!(c1.records.len(), 5);
        assert_eq!(c1.records[0].complexity, 1);
        for c in [&c1, &c2] {
            assert!(c.records.windows(2).all(|w| w[0].complexity <= w[1].complexity));
            for rec in &c.records {
                assert!(BigRational::from_integer(rec.complexity.into()) >= rec.lower_bound);
                assert!(rec.p_min <= rec.ceiling.unwrap());
            }
        }
        for r in 2..=4 {
            assert!(c2.records[r].complexity >= c1.records[r].complexity);
        }
        assert!(c1.loglog_slope.is_some());
    }

    #[test]
    fn chain_single_stage_matches_search() {
        let g = group(&[("g1", 1)]);
        for r in 0..=3 {
            let chain = compose_chain(&g, r, opts()).unwrap();
            let rec = minimal_discriminating_p(&g, 0, r, opts()).unwrap();
            assert_eq!(chain.steps[0].p, rec.p_min);
            assert_eq!(chain.complexity, rec.complexity);
            assert!(chain.injective && chain.submultiplicative());
        }
    }

    #[test]
    fn chain_two_stages() {
        let g = group(&[("g1", 1), ("g2", 1)]);
        let chain = compose_chain(&g, 1, opts()).unwrap();
        let (p1, p2) = (chain.steps[0].p, chain.steps[1].p);
        assert_eq!(chain.exponents, vec![vec![p1 as i64], vec![p2 as i64]]);
        assert!(chain.complexity <= p1 * p2);
        assert!(chain.injective && chain.generatorwise && chain.submultiplicative());
        for b in g.alphabet().ball(3, u128::MAX).unwrap() {
            let x = g.from_base(&b).unwrap();
            assert_eq!(apply_all(&g, &chain.exponents, &x).unwrap(), b);
        }
        let g = group(&[("g1", 2), ("g2 g1", 1)]);
        let chain = compose_chain(&g, 1, opts()).unwrap();
        assert!(chain.injective && chain.submultiplicative());
    }

    #[test]
    fn crosscheck_agrees_and_detects_corruption() {
        let g = group(&[("g1", 1)]);
        let rep = crosscheck(&g, 2, 4, None, opts()).unwrap();
        assert_eq!(rep.disagreements, 0);
        assert_eq!(rep.words, (0..=4).map(|l| 6u64.pow(l)).sum::<u64>());
        let bad = crosscheck(&g, 1, 2, Some(1), opts()).unwrap();
        assert!(bad.examples.contains(&"G1 t1.1".to_string()));
    }

    #[test]
    fn exponents_overflow_is_reported() {
        let spec = ThetaSpec { stage: 0, radius: 1000, p: 1 << 40 };
        assert!(spec.exponents(3).is_ok());
        assert_eq!(spec.exponents(4).unwrap_err(), Error::Overflow("theta exponent"));
    }
}
