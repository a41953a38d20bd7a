//! Dense real polynomials with compensated evaluation and complete real-root
//! isolation on an interval.

use std::ops::{Add, Mul, Neg, Sub};

/// Relative threshold below which a local extremum of `p` counts as a
/// (double) root.
pub const TOUCH_TOL: f64 = 1e-14;

/// Coefficients in ascending order: `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `a + b x`
    pub fn linear(a: f64, b: f64) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc.mul_add(x, c))
    }

    /// Horner evaluation with error-free transformations; the result is as
    /// accurate as plain Horner in twice the working precision.
    pub fn eval_compensated(&self, x: f64) -> f64 {
        let mut iter = self.coeffs.iter().rev();
        let mut s = *iter.next().unwrap();
        let mut r = 0.0f64;
        for &c in iter {
            let p = s * x;
            let pe = s.mul_add(x, -p);
            let sum = p + c;
            let z = sum - p;
            let se = (p - (sum - z)) + (c - z);
            s = sum;
            r = r.mul_add(x, pe + se);
        }
        s + r
    }

    /// `sum_k |c_k| |x|^k`, the natural magnitude of an evaluation at `x`.
    pub fn eval_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc.mul_add(ax, c.abs()))
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Fujiwara bound on the magnitude of every complex root.
    pub fn root_bound(&self) -> f64 {
        let n = self.degree();
        if n == 0 {
            return 0.0;
        }
        let lead = self.leading().abs();
        let mut bound: f64 = 0.0;
        for k in 1..=n {
            let c = self.coeffs[n - k].abs() / lead;
            let term = if k == n {
                (0.5 * c).powf(1.0 / k as f64)
            } else {
                c.powf(1.0 / k as f64)
            };
            bound = bound.max(term);
        }
        // the bound can be attained exactly; keep roots off the boundary
        2.0 * bound * (1.0 + 1e-12)
    }

    /// All real roots in `[lo, hi]`, ascending, merged within `merge_radius`.
    ///
    /// Roots are isolated between consecutive real critical points (found
    /// recursively from the derivative), so every simple root is bracketed.
    /// Local extrema whose value is within [`TOUCH_TOL`] of zero relative to
    /// [`Poly::eval_scale`] are reported as double roots.
    pub fn real_roots_in(&self, lo: f64, hi: f64, merge_radius: f64) -> Vec<f64> {
        let mut roots = self.isolate(lo, hi);
        roots.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
        for r in roots {
            match merged.last_mut() {
                Some(last) if (r - *last).abs() <= merge_radius * last.abs().max(1.0) => {
                    // keep the point with the smaller residual
                    if self.eval_compensated(r).abs() < self.eval_compensated(*last).abs() {
                        *last = r;
                    }
                }
                _ => merged.push(r),
            }
        }
        merged
    }

    fn isolate(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || lo > hi {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if (lo..=hi).contains(&r) {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let crit = self.derivative().isolate(lo, hi);
                let mut knots = Vec::with_capacity(crit.len() + 2);
                knots.push(lo);
                knots.extend(crit.iter().copied().filter(|&c| c > lo && c < hi));
                knots.push(hi);
                knots.dedup();

                let mut roots = Vec::new();
                let values: Vec<f64> = knots.iter().map(|&x| self.eval_compensated(x)).collect();
                for (i, (&x, &v)) in knots.iter().zip(&values).enumerate() {
                    if v == 0.0 {
                        roots.push(x);
                        continue;
                    }
                    let interior = i > 0 && i + 1 < knots.len();
                    // a near-zero extremum is a touching root only when no
                    // sign change brackets a pair of simple roots around it
                    let crosses = interior
                        && (values[i - 1].signum() != v.signum()
                            || values[i + 1].signum() != v.signum());
                    if interior && !crosses && v.abs() <= TOUCH_TOL * self.eval_scale(x) {
                        roots.push(x);
                    }
                }
                for w in 0..knots.len() - 1 {
                    let (a, b) = (knots[w], knots[w + 1]);
                    let (fa, fb) = (values[w], values[w + 1]);
                    if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                        roots.push(self.bisect(a, b, fa));
                    }
                }
                roots
            }
        }
    }

    /// Bisection to adjacent floats on a sign-changing bracket.
    pub fn bisect(&self, mut a: f64, mut b: f64, fa: f64) -> f64 {
        let sa = fa.signum();
        for _ in 0..2100 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let fm = self.eval_compensated(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        if self.eval_compensated(a).abs() <= self.eval_compensated(b).abs() {
            a
        } else {
            b
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = a.mul_add(*b, out[i + j]);
            }
        }
        Poly::new(out)
    }
}
