//! Finite sums of integer powers of `r`.

use std::collections::BTreeMap;

/// `Σ c_n rⁿ` with integer exponents, kept merged and sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RadialSeries {
    terms: BTreeMap<i32, f64>,
}

impl RadialSeries {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(n: i32, c: f64) -> Self {
        let mut s = Self::zero();
        s.push(n, c);
        s
    }

    pub fn push(&mut self, n: i32, c: f64) {
        if c != 0.0 {
            *self.terms.entry(n).or_insert(0.0) += c;
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.terms.iter().map(|(n, c)| (*n, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| *c == 0.0)
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.terms.iter().find(|(_, c)| **c != 0.0).map(|(n, _)| *n)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms.iter().map(|(n, c)| c * r.powi(*n)).sum()
    }

    pub fn deriv(&self) -> Self {
        let mut out = Self::zero();
        for (n, c) in self.terms() {
            if n != 0 {
                out.push(n - 1, c * n as f64);
            }
        }
        out
    }

    /// Multiply by `r^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self { terms: self.terms.iter().map(|(n, c)| (n + k, *c)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (n, c) in self.terms() {
            out.push(n, c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in other.terms() {
            out.push(n, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (n, c) in self.terms() {
            for (k, d) in other.terms() {
                out.push(n + k, c * d);
            }
        }
        out
    }

    /// `∫_{r0}^{r1} f dr`, exact. A term `r⁻¹` integrates to a logarithm.
    /// With `r0 = 0` every exponent must exceed `−1`.
    pub fn integrate(&self, r0: f64, r1: f64) -> f64 {
        self.terms
            .iter()
            .map(|(n, c)| {
                if *n == -1 {
                    assert!(r0 > 0.0, "log-divergent radial integral");
                    c * (r1 / r0).ln()
                } else {
                    let e = n + 1;
                    if r0 == 0.0 {
                        assert!(e > 0, "radial integral diverges at the origin (r^{n})");
                        c * r1.powi(e) / e as f64
                    } else {
                        c * (r1.powi(e) - r0.powi(e)) / e as f64
                    }
                }
            })
            .sum()
    }

    /// Rescale the variable: returns `g(r) = s · f(r / λ)`.
    pub fn rescaled(&self, lambda: f64, s: f64) -> Self {
        let mut out = Self::zero();
        for (n, c) in self.terms() {
            out.push(n, s * c * lambda.powi(-n));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_and_calculus() {
        let mut f = RadialSeries::monomial(2, 3.0);
        f.push(-2, 1.0);
        assert!((f.eval(2.0) - 12.25).abs() < 1e-15);
        let d = f.deriv();
        assert!((d.eval(2.0) - (12.0 - 0.25)).abs() < 1e-15);
        let p = f.mul(&f);
        assert!((p.eval(1.5) - f.eval(1.5).powi(2)).abs() < 1e-12);
        let i = f.integrate(1.0, 2.0);
        assert!((i - (7.0 + 0.5)).abs() < 1e-14);
        let g = RadialSeries::monomial(-1, 2.0);
        assert!((g.integrate(1.0, std::f64::consts::E) - 2.0).abs() < 1e-14);
        assert!((RadialSeries::monomial(0, 1.0).integrate(0.0, 3.0) - 3.0).abs() < 1e-15);
        assert!(f.sub(&f).is_zero());
        let r = f.rescaled(2.0, 5.0);
        assert!((r.eval(3.0) - 5.0 * f.eval(1.5)).abs() < 1e-12);
        assert_eq!(f.min_exponent(), Some(-2));
    }
}
