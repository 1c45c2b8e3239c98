//! Compensated accumulation.
//!
//! Everything that adds more than a handful of terms goes through [`Neumaier`]
//! (or its complex twin). Parallel callers reduce fixed chunks and fold the
//! partial results in index order, so results never depend on thread count.

use num_complex::Complex64;

/// Error-free transformation: `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Neumaier's variant of Kahan summation. The pair `(sum, comp)` is an
/// unnormalised double-double, which [`PrefixSums`] relies on.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        // branch-free TwoSum; the error term equals Neumaier's case split
        let (t, e) = two_sum(self.sum, v);
        self.comp += e;
        self.sum = t;
    }

    /// Adds another accumulator, keeping both of its components.
    #[inline]
    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    #[inline]
    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.comp)
    }
}

impl std::iter::FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    #[inline]
    pub fn merge(&mut self, other: &ComplexNeumaier) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl std::iter::FromIterator<Complex64> for ComplexNeumaier {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = ComplexNeumaier::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<Neumaier>().value()
}

pub fn sum_complex(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    values.into_iter().collect::<ComplexNeumaier>().value()
}

/// Running double-double sums. Entry `i` holds the sum of the first `i`
/// values, so range sums are a difference of two entries and keep close to
/// full precision even when the prefix is much larger than the range.
#[derive(Debug, Clone, Default)]
pub struct PrefixSums {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixSums {
    pub fn new(values: impl IntoIterator<Item = f64>) -> Self {
        let iter = values.into_iter();
        let cap = iter.size_hint().0 + 1;
        let mut hi = Vec::with_capacity(cap);
        let mut lo = Vec::with_capacity(cap);
        hi.push(0.0);
        lo.push(0.0);
        let mut acc = Neumaier::new();
        for v in iter {
            acc.add(v);
            let (s, c) = acc.parts();
            hi.push(s);
            lo.push(c);
        }
        Self { hi, lo }
    }

    /// Number of summed values.
    pub fn len(&self) -> usize {
        self.hi.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sum of values with 0-based positions `start..end`.
    #[inline]
    pub fn range(&self, start: usize, end: usize) -> f64 {
        debug_assert!(start <= end && end <= self.len());
        if start == end {
            return 0.0;
        }
        let (d, e) = two_sum(self.hi[end], -self.hi[start]);
        d + (e + (self.lo[end] - self.lo[start]))
    }

    pub fn total(&self) -> f64 {
        self.range(0, self.len())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ComplexPrefixSums {
    re: PrefixSums,
    im: PrefixSums,
}

impl ComplexPrefixSums {
    pub fn new(values: &[Complex64]) -> Self {
        Self { re: PrefixSums::new(values.iter().map(|v| v.re)), im: PrefixSums::new(values.iter().map(|v| v.im)) }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    #[inline]
    pub fn range(&self, start: usize, end: usize) -> Complex64 {
        Complex64::new(self.re.range(start, end), self.im.range(start, end))
    }
}

/// Suffix maxima: `out[i] = max(values[i..])`. Empty suffix maps to 0.
pub fn suffix_max(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0f64; values.len() + 1];
    for i in (0..values.len()).rev() {
        out[i] = out[i + 1].max(values[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_is_exact() {
        let (s, e) = two_sum(1.0, 1e-20);
        assert_eq!(s, 1.0);
        assert_eq!(e, 1e-20);
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        // naive summation returns 0 here
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(v), 2.0);
        let naive: f64 = v.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn harmonic_partial_sum_matches_reference() {
        // H_100000 to 17 digits
        let h = sum((1..=100_000).map(|k| 1.0 / k as f64));
        assert!((h - 12.090_146_129_863_428).abs() < 1e-14);
    }

    #[test]
    fn prefix_range_matches_direct_sum() {
        let vals: Vec<f64> = (1..=5000).map(|k| (k as f64).sin() / k as f64).collect();
        let p = PrefixSums::new(vals.iter().copied());
        for &(a, b) in &[(0, 5000), (10, 20), (4000, 4999), (7, 7), (1234, 4321)] {
            let direct = sum(vals[a..b].iter().copied());
            assert!((p.range(a, b) - direct).abs() <= 1e-16 * direct.abs().max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn prefix_range_survives_large_prefix() {
        // a huge leading value would wipe the tail out of a plain f64 prefix
        let mut vals = vec![1e16];
        vals.extend(std::iter::repeat(0.1).take(100));
        let p = PrefixSums::new(vals);
        assert!((p.range(1, 101) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn complex_sum_tracks_both_parts() {
        let z = sum_complex((1..=4).map(|k| Complex64::new(k as f64, -(k as f64))));
        assert_eq!(z, Complex64::new(10.0, -10.0));
    }

    #[test]
    fn suffix_max_basic() {
        assert_eq!(suffix_max(&[1.0, 3.0, 2.0]), vec![3.0, 3.0, 2.0, 0.0]);
    }
}
