//! Discriminating homomorphisms `Z^n → Z`.
//!
//! `θ_{n,R}` sends the standard basis to `1, 2R+1, (2R+1)^2, ...`, a
//! mixed-radix encoding that is injective on the box `[-R,R]^n`. The exact
//! minimum over all homomorphisms is found by shell search and sandwiched
//! between the small-kernel lower bound and `(2R+1)^{n-1}`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonempty tuple of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntVector(Vec<BigInt>);

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("vectors need at least one entry".into()));
        }
        Ok(IntVector(entries))
    }

    pub fn from_i64s(entries: &[i64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn max_abs(&self) -> BigInt {
        self.0.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    pub fn dot(&self, other: &IntVector) -> Result<BigInt> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    fn to_i64s(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// A homomorphism `Z^n → Z`, stored as the images of the standard basis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ZnHom {
    coefficients: IntVector,
}

impl ZnHom {
    pub fn new(coefficients: IntVector) -> Self {
        ZnHom { coefficients }
    }

    pub fn coefficients(&self) -> &IntVector {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.dim()
    }

    /// `max_i |φ(e_i)|`.
    pub fn complexity(&self) -> BigInt {
        self.coefficients.max_abs()
    }

    pub fn apply(&self, v: &IntVector) -> Result<BigInt> {
        self.coefficients.dot(v)
    }

    pub fn scaled(&self, p: &BigInt) -> ZnHom {
        ZnHom {
            coefficients: IntVector(self.coefficients.0.iter().map(|c| c * p).collect()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallShape {
    /// `{x : Σ|x_i| ≤ R}`, the word-metric ball for the standard basis.
    L1,
    /// `[-R,R]^n`.
    Box,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BallSpec {
    pub shape: BallShape,
    pub radius: u32,
}

impl BallSpec {
    pub fn l1(radius: u32) -> Self {
        BallSpec {
            shape: BallShape::L1,
            radius,
        }
    }

    pub fn boxed(radius: u32) -> Self {
        BallSpec {
            shape: BallShape::Box,
            radius,
        }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let r = self.radius as i64;
        match self.shape {
            BallShape::L1 => x.iter().map(|v| v.abs()).sum::<i64>() <= r,
            BallShape::Box => x.iter().all(|v| v.abs() <= r),
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    Ok(())
}

/// `θ_{n,R}` with coefficients `((2R+1)^0, ..., (2R+1)^{n-1})`.
pub fn theta(n: usize, radius: u32) -> Result<ZnHom> {
    check_dim(n)?;
    let base = BigInt::from(2 * radius as u64 + 1);
    let mut c = BigInt::one();
    let mut coefficients = Vec::with_capacity(n);
    for _ in 0..n {
        coefficients.push(c.clone());
        c *= &base;
    }
    Ok(ZnHom::new(IntVector(coefficients)))
}

/// `((2R+1)^n - 1) / 2`, the half-width of `θ_{n,R}([-R,R]^n)`.
pub fn interval_half_width(n: usize, radius: u32) -> Result<BigInt> {
    check_dim(n)?;
    let base = BigInt::from(2 * radius as u64 + 1);
    Ok((base.pow(n as u32) - 1u32) / 2u32)
}

/// Visits every point of `[-r, r]^n` in odometer order.
fn for_each_box_point(n: usize, r: i64, mut f: impl FnMut(&[i64]) -> bool) {
    let mut x = vec![-r; n];
    loop {
        if !f(&x) {
            return;
        }
        let mut i = 0;
        loop {
            if i == n {
                return;
            }
            if x[i] < r {
                x[i] += 1;
                break;
            }
            x[i] = -r;
            i += 1;
        }
    }
}

fn box_points(n: usize, r: u32, cap: u128) -> Result<u128> {
    let needed = (2 * r as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::BudgetExceeded {
            what: "box enumeration",
            needed,
            cap,
        });
    }
    Ok(needed)
}

/// Exhaustively checks that `θ_{n,R}` maps `[-R,R]^n` one-to-one onto the
/// integers of magnitude at most `interval_half_width(n, R)`.
pub fn verify_bijection(n: usize, radius: u32, cap: u128) -> Result<bool> {
    check_dim(n)?;
    let count = box_points(n, radius, cap)?;
    let half = interval_half_width(n, radius)?
        .to_i64()
        .ok_or(Error::Overflow("interval half-width"))?;
    let coeffs: Vec<i64> = theta(n, radius)?
        .coefficients()
        .entries()
        .iter()
        .map(|c| c.to_i64().ok_or(Error::Overflow("theta coefficient")))
        .collect::<Result<_>>()?;
    if count != (2 * half + 1) as u128 {
        return Ok(false);
    }
    // Odometer order is the mixed-radix order, so a correct map yields the
    // consecutive run -half, ..., half. Anything else falls back to a bitmap.
    let r = radius as i64;
    let mut x = vec![-r; n];
    let mut v: i64 = -coeffs.iter().sum::<i64>() * r;
    let mut expected = -half;
    loop {
        // Innermost coordinate as a tight loop.
        // Values stay within ±half, so wrapping never actually wraps.
        let mut diff = 0;
        for _ in 0..2 * r + 1 {
            diff |= v ^ expected;
            expected = expected.wrapping_add(1);
            v = v.wrapping_add(coeffs[0]);
        }
        if diff != 0 {
            return Ok(bitmap_bijection(n, r, &coeffs, half, count as usize));
        }
        v -= (2 * r + 1) * coeffs[0];
        let mut i = 1;
        while i < n && x[i] == r {
            x[i] = -r;
            v -= 2 * r * coeffs[i];
            i += 1;
        }
        if i >= n {
            break;
        }
        x[i] += 1;
        v += coeffs[i];
    }
    Ok(expected == half + 1)
}

fn bitmap_bijection(n: usize, r: i64, coeffs: &[i64], half: i64, count: usize) -> bool {
    let mut hit = vec![false; count];
    let mut ok = true;
    for_each_box_point(n, r, |x| {
        let v: i64 = x.iter().zip(coeffs).map(|(a, c)| a * c).sum();
        ok = v.abs() <= half && !std::mem::replace(&mut hit[(v + half) as usize], true);
        ok
    });
    ok && hit.iter().all(|&h| h)
}

/// Order used inside a max-norm shell: coordinate-wise by `(|c_i|, c_i < 0)`.
fn shell_key_cmp(a: &[i64], b: &[i64]) -> Ordering {
    a.iter()
        .map(|x| (x.abs(), *x < 0))
        .cmp(b.iter().map(|x| (x.abs(), *x < 0)))
}

fn leading_positive(x: &[i64]) -> bool {
    x.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

/// Vectors of max-norm exactly `m` whose first nonzero entry is positive, in
/// the shell order.
fn shell(n: usize, m: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for_each_box_point(n, m, |x| {
        if x.iter().any(|v| v.abs() == m) && leading_positive(x) {
            out.push(x.to_vec());
        }
        true
    });
    out.sort_by(|a, b| shell_key_cmp(a, b));
    out
}

/// Nonzero points of the ball, one from each `±x` pair.
fn half_ball(n: usize, ball: BallSpec) -> Vec<Vec<i64>> {
    let mut pts = Vec::new();
    for_each_box_point(n, ball.radius as i64, |x| {
        if leading_positive(x) && ball.contains(x) {
            pts.push(x.to_vec());
        }
        true
    });
    pts
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whether `c` kills no nonzero point of the ball.
pub fn discriminates(hom: &ZnHom, ball: BallSpec) -> Result<bool> {
    let c = hom
        .coefficients()
        .to_i64s()
        .ok_or(Error::Overflow("coefficients"))?;
    Ok(half_ball(hom.dim(), ball).iter().all(|x| dot(&c, x) != 0))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MinimalComplexity {
    pub value: u64,
    pub witness: ZnHom,
}

/// The least complexity of a nonzero homomorphism `Z^n → Z` whose kernel
/// misses the punctured ball, with its shell-order-first witness.
///
/// Shells of increasing max-norm are searched up to `(2R+1)^{n-1}`, which
/// `θ_{n,R}` always attains.
pub fn minimal_complexity(n: usize, ball: BallSpec, cap: u128) -> Result<MinimalComplexity> {
    check_dim(n)?;
    let ceiling = (2 * ball.radius as u128 + 1).pow(n as u32 - 1);
    let needed = (2 * ceiling + 1)
        .checked_pow(n as u32)
        .and_then(|c| c.checked_mul(box_points(n, ball.radius, u128::MAX).ok()?))
        .unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::BudgetExceeded {
            what: "minimal complexity search",
            needed,
            cap,
        });
    }
    let pts = half_ball(n, ball);
    for m in 1..=ceiling as i64 {
        for c in shell(n, m) {
            if pts.iter().all(|x| dot(&c, x) != 0) {
                return Ok(MinimalComplexity {
                    value: m as u64,
                    witness: ZnHom::new(IntVector::from_i64s(&c)?),
                });
            }
        }
    }
    unreachable!("theta_(n,R) lies within the searched shells")
}

/// Largest `K` with `K^e ≤ x`.
fn integer_root(x: u64, e: u32) -> u64 {
    if e == 1 {
        return x;
    }
    let mut k = (x as f64).powf(1.0 / e as f64) as u64;
    while k > 0 && k.checked_pow(e).is_none_or(|p| p > x) {
        k -= 1;
    }
    while (k + 1).checked_pow(e).is_some_and(|p| p <= x) {
        k += 1;
    }
    k
}

/// `⌊(nB)^{1/(n-1)}⌋`, the entry bound for a small kernel vector of one
/// equation in `n` unknowns with coefficients bounded by `B`.
pub fn siegel_bound(n: usize, b: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two unknowns".into()));
    }
    let nb = (n as u64).checked_mul(b).ok_or(Error::Overflow("n * B"))?;
    Ok(integer_root(nb, n as u32 - 1))
}

/// A nonzero `x` with `a · x = 0` and `max|x_i| ≤ ⌊(nB)^{1/(n-1)}⌋`: the first
/// solution in shell order (smallest max-norm, then coordinate-wise by
/// `(|x_i|, x_i < 0)`, leading entry positive).
pub fn siegel_small_kernel(a: &IntVector, b: u64, cap: u128) -> Result<IntVector> {
    let n = a.dim();
    let coeffs = a.to_i64s().ok_or(Error::Overflow("coefficients"))?;
    if a.is_zero() {
        return Err(Error::InvalidArgument("coefficient vector must be nonzero".into()));
    }
    if coeffs.iter().any(|c| c.unsigned_abs() > b) {
        return Err(Error::InvalidArgument(format!("an entry of {a} exceeds B = {b}")));
    }
    let bound = siegel_bound(n, b)?;
    box_points(n, bound as u32, cap)?;
    for m in 1..=bound as i64 {
        if let Some(x) = shell(n, m).into_iter().find(|x| dot(&coeffs, x) == 0) {
            return IntVector::from_i64s(&x);
        }
    }
    Err(Error::NoSolutionWithinBound { bound: bound as i64 })
}

/// `(R - n)^{n-1} / n^n`, exactly. Nonpositive values carry no information.
pub fn lower_bound_value(n: usize, radius: u32) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::InvalidArgument("the lower bound needs n ≥ 2".into()));
    }
    let num = (BigInt::from(radius) - BigInt::from(n)).pow(n as u32 - 1);
    let den = BigInt::from(n).pow(n as u32);
    Ok(BigRational::new(num, den))
}

/// One row of the `Z^n` sandwich.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SandwichRow {
    pub n: usize,
    pub radius: u32,
    pub lower_bound_num: String,
    pub lower_bound_den: String,
    pub exact_min: u64,
    pub theta_upper: String,
    #[serde(skip)]
    pub witness: Vec<i64>,
}

impl SandwichRow {
    pub fn holds(&self) -> bool {
        let lower = BigRational::new(
            self.lower_bound_num.parse().unwrap(),
            self.lower_bound_den.parse().unwrap(),
        );
        let upper: BigInt = self.theta_upper.parse().unwrap();
        let exact = BigInt::from(self.exact_min);
        lower <= BigRational::from(exact.clone()) && exact <= upper
    }
}

/// Lower bound, exact minimum and `θ` upper bound for one `(n, R)`.
pub fn sandwich_row(n: usize, ball: BallSpec, cap: u128) -> Result<SandwichRow> {
    let min = minimal_complexity(n, ball, cap)?;
    let (num, den) = if n >= 2 {
        let lb = lower_bound_value(n, ball.radius)?;
        (lb.numer().to_string(), lb.denom().to_string())
    } else {
        ("0".to_string(), "1".to_string())
    };
    Ok(SandwichRow {
        n,
        radius: ball.radius,
        lower_bound_num: num,
        lower_bound_den: den,
        exact_min: min.value,
        theta_upper: theta(n, ball.radius)?.complexity().to_string(),
        witness: min.witness.coefficients().to_i64s().unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64s(x).unwrap()
    }

    fn coeffs(h: &ZnHom) -> Vec<i64> {
        h.coefficients().to_i64s().unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(coeffs(&theta(2, 1).unwrap()), vec![1, 3]);
        assert_eq!(coeffs(&theta(1, 5).unwrap()), vec![1]);
        assert_eq!(coeffs(&theta(3, 2).unwrap()), vec![1, 5, 25]);
        assert_eq!(theta(3, 2).unwrap().complexity(), BigInt::from(25));
        assert!(theta(0, 2).is_err());
    }

    #[test]
    fn theta_stays_exact_for_large_parameters() {
        let h = theta(30, 1000).unwrap();
        assert_eq!(h.complexity(), BigInt::from(2001).pow(29u32));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(theta(2, 1).unwrap().apply(&v(&[1, 1])).unwrap(), BigInt::from(4));
        assert_eq!(theta(3, 7).unwrap().apply(&v(&[0, 0, 0])).unwrap(), BigInt::zero());
        let x = theta(3, 2).unwrap().apply(&v(&[2, -1, 2])).unwrap();
        assert_eq!(x, BigInt::from(47));
        assert!(x <= interval_half_width(3, 2).unwrap());
        assert_eq!(
            theta(2, 1).unwrap().apply(&v(&[1])).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                actual: 1
            }
        );
    }

    #[test]
    fn half_width_examples() {
        assert_eq!(interval_half_width(2, 1).unwrap(), BigInt::from(4));
        assert_eq!(interval_half_width(1, 9).unwrap(), BigInt::from(9));
        assert_eq!(interval_half_width(3, 2).unwrap(), BigInt::from(62));
    }

    #[test]
    fn bitmap_check_agrees() {
        assert!(bitmap_bijection(2, 1, &[1, 3], 4, 9));
        assert!(bitmap_bijection(2, 1, &[3, 1], 4, 9));
        assert!(!bitmap_bijection(2, 1, &[1, 2], 4, 9));
    }

    #[test]
    fn bijection_examples() {
        assert!(verify_bijection(2, 1, 1 << 20).unwrap());
        assert!(verify_bijection(1, 10, 1 << 20).unwrap());
        assert!(verify_bijection(4, 2, 1 << 20).unwrap());
        assert!(matches!(
            verify_bijection(10, 10, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    /// Brute force over a coefficient box that certainly contains the optimum.
    fn brute_min(n: usize, ball: BallSpec) -> u64 {
        let ceiling = (2 * ball.radius as i64 + 1).pow(n as u32 - 1);
        let pts = half_ball(n, ball);
        let mut best = i64::MAX;
        for_each_box_point(n, ceiling, |c| {
            if c.iter().any(|&x| x != 0) && pts.iter().all(|x| dot(c, x) != 0) {
                best = best.min(c.iter().map(|x| x.abs()).max().unwrap());
            }
            true
        });
        best as u64
    }

    #[test]
    fn minimal_complexity_examples() {
        let m = minimal_complexity(2, BallSpec::l1(1), u128::MAX).unwrap();
        assert_eq!((m.value, coeffs(&m.witness)), (1, vec![1, 1]));
        let m = minimal_complexity(2, BallSpec::l1(2), u128::MAX).unwrap();
        assert_eq!((m.value, coeffs(&m.witness)), (2, vec![1, 2]));
        for r in 0..6 {
            let m = minimal_complexity(1, BallSpec::l1(r), u128::MAX).unwrap();
            assert_eq!((m.value, coeffs(&m.witness)), (1, vec![1]));
        }
    }

    #[test]
    fn complexity_one_maps_fail_at_radius_two() {
        for c in shell(2, 1) {
            let h = ZnHom::new(v(&c));
            assert!(!discriminates(&h, BallSpec::l1(2)).unwrap(), "{c:?}");
        }
    }

    #[test]
    fn minimal_complexity_matches_brute_force() {
        for (n, rmax) in [(2, 5), (3, 2)] {
            for r in 0..=rmax {
                for ball in [BallSpec::l1(r), BallSpec::boxed(r)] {
                    let m = minimal_complexity(n, ball, u128::MAX).unwrap();
                    assert_eq!(m.value, brute_min(n, ball), "n={n} {ball:?}");
                    assert!(discriminates(&m.witness, ball).unwrap());
                }
            }
        }
    }

    #[test]
    fn box_minimum_never_below_l1_minimum() {
        for r in 0..5 {
            let l1 = minimal_complexity(2, BallSpec::l1(r), u128::MAX).unwrap().value;
            let bx = minimal_complexity(2, BallSpec::boxed(r), u128::MAX).unwrap().value;
            assert!(l1 <= bx);
        }
    }

    #[test]
    fn siegel_examples() {
        assert_eq!(siegel_bound(2, 1).unwrap(), 2);
        assert_eq!(siegel_small_kernel(&v(&[1, 1]), 1, u128::MAX).unwrap(), v(&[1, -1]));
        assert_eq!(siegel_small_kernel(&v(&[1, 0]), 1, u128::MAX).unwrap(), v(&[0, 1]));
        assert_eq!(siegel_bound(3, 5).unwrap(), 3);
        let x = siegel_small_kernel(&v(&[2, 3, 5]), 5, u128::MAX).unwrap();
        assert_eq!(x, v(&[1, 1, -1]));
        assert!(siegel_small_kernel(&v(&[0, 0]), 1, u128::MAX).is_err());
        assert!(siegel_small_kernel(&v(&[3, 1]), 2, u128::MAX).is_err());
    }

    #[test]
    fn integer_roots() {
        assert_eq!(integer_root(15, 2), 3);
        assert_eq!(integer_root(16, 2), 4);
        assert_eq!(integer_root(40, 3), 3);
        assert_eq!(integer_root(7, 1), 7);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(lower_bound_value(2, 6).unwrap(), BigRational::from(BigInt::from(1)));
        assert_eq!(lower_bound_value(2, 10).unwrap(), BigRational::from(BigInt::from(2)));
        assert!(lower_bound_value(2, 2).unwrap().is_zero());
        assert_eq!(
            lower_bound_value(3, 9).unwrap(),
            BigRational::new(BigInt::from(4), BigInt::from(3))
        );
        assert!(lower_bound_value(1, 3).is_err());
    }

    #[test]
    fn scaled_theta_images_exceed_scale() {
        for (n, r) in [(1, 3), (2, 2), (3, 1)] {
            let h = theta(n, r).unwrap();
            let c = coeffs(&h);
            for p in [-3i64, -1, 1, 2, 5] {
                for_each_box_point(n, r as i64, |x| {
                    if x.iter().any(|&t| t != 0) {
                        let img = p * dot(&c, x);
                        assert!(img != 0 && img.abs() > p.abs() - 1);
                    }
                    true
                });
            }
        }
    }

    #[test]
    fn shells_are_sorted_and_complete() {
        let s = shell(2, 1);
        assert_eq!(s, vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![1, -1]]);
        // (2m+1)^n - (2m-1)^n vectors per shell, halved by the sign convention.
        for m in 1..4 {
            assert_eq!(shell(3, m).len() as i64, ((2 * m + 1).pow(3) - (2 * m - 1).pow(3)) / 2);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn siegel_solution_is_valid(
                entries in proptest::collection::vec(-10i64..=10, 2..=4),
                slack in 0u64..=5,
            ) {
                prop_assume!(entries.iter().any(|&e| e != 0));
                let b = entries.iter().map(|e| e.unsigned_abs()).max().unwrap() + slack;
                let b = b.min(10);
                let a = v(&entries);
                let x = siegel_small_kernel(&a, b, u128::MAX).unwrap();
                prop_assert!(!x.is_zero());
                prop_assert!(a.dot(&x).unwrap().is_zero());
                prop_assert!(x.max_abs() <= BigInt::from(siegel_bound(entries.len(), b).unwrap()));
            }

            #[test]
            fn apply_is_linear(
                x in proptest::collection::vec(-50i64..50, 3),
                y in proptest::collection::vec(-50i64..50, 3),
                r in 0u32..6,
            ) {
                let h = theta(3, r).unwrap();
                let sum: Vec<i64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                prop_assert_eq!(
                    h.apply(&v(&sum)).unwrap(),
                    h.apply(&v(&x)).unwrap() + h.apply(&v(&y)).unwrap()
                );
            }
        }
    }
}
