//! Truncated one-variable power series with rational coefficients.

use std::fmt;

use num_traits::{One, Zero};

use crate::grading::{qi, Q};

/// Power series `Σ c_k t^k` known up to and including `t^prec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<Q>,
    prec: usize,
}

impl Series {
    pub fn zero(prec: usize) -> Self {
        Self { coeffs: vec![Q::zero(); prec + 1], prec }
    }

    pub fn one(prec: usize) -> Self {
        let mut s = Self::zero(prec);
        s.coeffs[0] = Q::one();
        s
    }

    /// The identity series `t`.
    pub fn var(prec: usize) -> Self {
        let mut s = Self::zero(prec);
        if prec >= 1 {
            s.coeffs[1] = Q::one();
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Q>, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        for (i, c) in coeffs.into_iter().enumerate().take(prec + 1) {
            s.coeffs[i] = c;
        }
        s
    }

    pub fn monomial(c: Q, k: usize, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        if k <= prec {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn set_coeff(&mut self, k: usize, c: Q) {
        if k <= self.prec {
            self.coeffs[k] = c;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn with_prec(&self, prec: usize) -> Self {
        let mut s = Self::zero(prec);
        for k in 0..=prec.min(self.prec) {
            s.coeffs[k] = self.coeffs[k].clone();
        }
        s
    }

    pub fn add(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        Series::from_coeffs((0..=prec).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect(), prec)
    }

    pub fn sub(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        Series::from_coeffs((0..=prec).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect(), prec)
    }

    pub fn scale(&self, c: &Q) -> Series {
        Series::from_coeffs(self.coeffs.iter().map(|v| v * c).collect(), self.prec)
    }

    pub fn mul(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        let mut out = Series::zero(prec);
        for (i, a) in self.coeffs.iter().enumerate().take(prec + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(prec + 1 - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }

    /// Multiplies by `t^k` (precision grows by `k`).
    pub fn shift_up(&self, k: usize) -> Series {
        let mut coeffs = vec![Q::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Series::from_coeffs(coeffs, self.prec + k)
    }

    /// Divides by `t^k`; the first `k` coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Series {
        assert!(self.coeffs.iter().take(k).all(Zero::is_zero), "series not divisible by t^{k}");
        assert!(k <= self.prec, "shift past precision");
        Series::from_coeffs(self.coeffs[k..].to_vec(), self.prec - k)
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Series {
        let c0 = &self.coeffs[0];
        assert!(!c0.is_zero(), "series inverse needs a unit");
        let inv0 = c0.recip();
        let mut out = Series::zero(self.prec);
        out.coeffs[0] = inv0.clone();
        for n in 1..=self.prec {
            let mut acc = Q::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    acc += &self.coeffs[k] * &out.coeffs[n - k];
                }
            }
            out.coeffs[n] = -acc * &inv0;
        }
        out
    }

    pub fn div(&self, other: &Series) -> Series {
        self.mul(&other.inverse())
    }

    pub fn derivative(&self) -> Series {
        if self.prec == 0 {
            return Series::zero(0);
        }
        Series::from_coeffs(
            (1..=self.prec).map(|k| &self.coeffs[k] * qi(k as i64)).collect(),
            self.prec - 1,
        )
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Series {
        let mut coeffs = vec![Q::zero()];
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / qi(k as i64 + 1)),
        );
        Series::from_coeffs(coeffs, self.prec + 1)
    }

    /// Integer power; negative exponents need a unit.
    pub fn powi(&self, e: i64) -> Series {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut acc = Series::one(self.prec);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Rational power of a series with constant term 1.
    pub fn pow_rational(&self, e: &Q) -> Series {
        assert!(self.coeffs[0].is_one(), "rational powers need constant term 1");
        // y = f^e satisfies f·y' = e·f'·y
        let mut out = Series::zero(self.prec);
        out.coeffs[0] = Q::one();
        for n in 1..=self.prec {
            let mut acc = Q::zero();
            for k in 1..=n {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                let factor = (e + Q::one()) * qi(k as i64) - qi(n as i64);
                acc += factor * &self.coeffs[k] * &out.coeffs[n - k];
            }
            out.coeffs[n] = acc / qi(n as i64);
        }
        out
    }

    /// `self ∘ inner`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Series) -> Series {
        assert!(inner.coeffs[0].is_zero(), "composition needs inner(0) = 0");
        let prec = self.prec.min(inner.prec);
        let mut out = Series::zero(prec);
        let mut power = Series::one(prec);
        for k in 0..=prec {
            if k > 0 {
                power = power.mul(&inner.with_prec(prec));
            }
            let c = &self.coeffs[k];
            if !c.is_zero() {
                for (i, p) in power.coeffs.iter().enumerate() {
                    if !p.is_zero() {
                        out.coeffs[i] += c * p;
                    }
                }
            }
        }
        out
    }

    /// Compositional inverse of a series `t + O(t^2)`.
    pub fn reversion(&self) -> Series {
        assert!(self.coeffs[0].is_zero() && self.coeff(1).is_one(), "reversion needs t + O(t^2)");
        let mut inv = Series::var(self.prec);
        for n in 2..=self.prec {
            let err = self.compose(&inv).coeff(n);
            inv.coeffs[n] = -err;
        }
        inv
    }

    /// Time-one map `exp(v·d/dt)(t)` of the field `v(t)∂t` with `v(0) = 0`,
    /// `v'(0) = 0`.
    pub fn flow_time_one(field: &Series) -> Series {
        let prec = field.prec;
        let mut term = Series::var(prec);
        let mut out = term.clone();
        let mut k = 1i64;
        loop {
            // L_v(f) = v·f'
            term = field.mul(&term.derivative().with_prec(prec)).scale(&Q::new(1.into(), k.into()));
            if term.is_zero() {
                return out;
            }
            out = out.add(&term);
            k += 1;
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::grading::format_univariate(&self.coeffs, "t"))
    }
}
