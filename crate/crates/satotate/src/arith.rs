//! Prime-field utilities (primitive roots, discrete-log tables) and exact
//! arithmetic in the ring of integers of `Q(zeta_{l^2})`.
//!
//! Cyclotomic integers are stored non-canonically on the full power basis
//! `1, zeta, ..., zeta^{l^2-1}` so that Jacobi-sum accumulation is a single
//! array increment per field element; [`CyclotomicInteger::reduce`] brings a
//! value to the canonical basis (degree below `phi(l^2)`) when exact
//! comparison is needed.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result, DEFAULT_MEMORY_GUARD};

/// Deterministic primality test by trial division; fine for the `q < 2^26`
/// range this crate operates in.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// `base^exp mod m` by square-and-multiply.
pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut result = 1u128;
    let mut b = (base % m) as u128;
    let m = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root of `F_q*`.
///
/// Deterministic by construction (residues are tried in increasing order),
/// so everything derived from the discrete-log table is reproducible.
pub fn primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if q == 2 {
        return Ok(1);
    }
    let exponents: Vec<u64> = distinct_prime_factors(q - 1)
        .into_iter()
        .map(|f| (q - 1) / f)
        .collect();
    'candidate: for g in 2..q {
        for &e in &exponents {
            if mod_pow(g, e, q) == 1 {
                continue 'candidate;
            }
        }
        return Ok(g);
    }
    unreachable!("every prime field has a primitive root")
}

/// Discrete-logarithm table for `F_q*` with respect to a fixed primitive root.
///
/// `index(x) = t` with `root^t = x (mod q)`; `index(1) = 0`, `index(root) = 1`.
#[derive(Debug, Clone)]
pub struct DlogTable {
    q: u64,
    root: u64,
    index: Vec<u32>,
}

impl DlogTable {
    /// Build the table for the smallest primitive root, one `O(q)` pass.
    pub fn build(q: u64) -> Result<Self> {
        Self::build_with_guard(q, DEFAULT_MEMORY_GUARD)
    }

    pub fn build_with_guard(q: u64, guard: u64) -> Result<Self> {
        if q > guard {
            return Err(Error::MemoryGuard { q, guard });
        }
        let root = primitive_root(q)?;
        Ok(Self::build_for_root(q, root))
    }

    /// Build for an explicitly chosen primitive root (used by the Galois
    /// invariance tests; callers must pass a genuine generator).
    pub fn build_for_root(q: u64, root: u64) -> Self {
        let mut index = vec![0u32; q as usize];
        let mut cur = 1u64;
        for t in 0..q - 1 {
            index[cur as usize] = t as u32;
            cur = cur * root % q;
        }
        debug_assert_eq!(cur, 1, "{root} is not a primitive root mod {q}");
        Self { q, root, index }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Discrete log of `x`; `x` must lie in `1..q`.
    #[inline]
    pub fn index(&self, x: u64) -> u64 {
        debug_assert!(x >= 1 && x < self.q);
        self.index[x as usize] as u64
    }
}

/// Trace of `zeta^k` from `Q(zeta_{l^2})` down to `Q`, in closed form:
/// `phi(l^2)` when `l^2 | k`, `-l` when `l | k` but `l^2` does not, else 0.
///
/// The orbit-sum tests validate this against the literal sum over
/// `(Z/l^2 Z)*` of `zeta^{ks}`.
pub fn trace_of_zeta_power(k: u64, ell: u64) -> Result<i64> {
    let level = ell * ell;
    if k >= level {
        return Err(Error::ExponentOutOfRange { k, level });
    }
    Ok(if k == 0 {
        (level - ell) as i64
    } else if k % ell == 0 {
        -(ell as i64)
    } else {
        0
    })
}

/// An element of `Z[zeta_{l^2}]` as an integer vector on the (non-canonical)
/// power basis `zeta^0 .. zeta^{l^2-1}`.
#[derive(Debug, Clone)]
pub struct CyclotomicInteger {
    ell: u64,
    coeffs: Vec<BigInt>,
}

impl CyclotomicInteger {
    /// The zero element at level `l^2`.
    pub fn zero(ell: u64) -> Self {
        let level = (ell * ell) as usize;
        Self {
            ell,
            coeffs: vec![BigInt::zero(); level],
        }
    }

    /// `zeta^k`; `k` is reduced mod `l^2`.
    pub fn zeta_power(ell: u64, k: u64) -> Self {
        let mut out = Self::zero(ell);
        let level = ell * ell;
        out.coeffs[(k % level) as usize] = BigInt::from(1);
        out
    }

    /// The rational integer `n`.
    pub fn from_integer(ell: u64, n: impl Into<BigInt>) -> Self {
        let mut out = Self::zero(ell);
        out.coeffs[0] = n.into();
        out
    }

    /// Build from a full-length coefficient vector (e.g. Jacobi-sum counts).
    pub fn from_coeffs(ell: u64, coeffs: Vec<BigInt>) -> Result<Self> {
        let level = (ell * ell) as usize;
        if coeffs.len() != level {
            return Err(Error::LevelMismatch(coeffs.len(), level));
        }
        Ok(Self { ell, coeffs })
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    /// `l^2`, the order of the root of unity.
    pub fn level(&self) -> u64 {
        self.ell * self.ell
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Product, exponents folded mod `l^2` (`zeta^{l^2} = 1`). The result is
    /// not canonically reduced.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ell != other.ell {
            return Err(Error::LevelMismatch(
                self.level() as usize,
                other.level() as usize,
            ));
        }
        let level = self.level() as usize;
        let mut coeffs = vec![BigInt::zero(); level];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[(i + j) % level] += a * b;
            }
        }
        Ok(Self {
            ell: self.ell,
            coeffs,
        })
    }

    /// Complex conjugation `zeta -> zeta^{-1}`: coefficient at `k` moves to
    /// `(l^2 - k) mod l^2`.
    pub fn conj(&self) -> Self {
        let level = self.level() as usize;
        let mut coeffs = vec![BigInt::zero(); level];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(level - k) % level] = c.clone();
        }
        Self {
            ell: self.ell,
            coeffs,
        }
    }

    /// Canonical form: remainder modulo the `l^2`-th cyclotomic polynomial
    /// `Phi(x) = 1 + x^l + x^{2l} + ... + x^{(l-1)l}`, so every coefficient at
    /// degree `>= phi(l^2)` is zero.
    pub fn reduce(&self) -> Self {
        let ell = self.ell as usize;
        let level = self.level() as usize;
        let degree = level - ell; // phi(l^2)
        let mut coeffs = self.coeffs.clone();
        for k in (degree..level).rev() {
            if coeffs[k].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut coeffs[k]);
            let shift = k - degree;
            // subtract c * x^shift * (1 + x^l + ... + x^{(l-2)l});
            // the leading term x^{(l-1)l} cancels coeffs[k] itself.
            for i in 0..ell - 1 {
                coeffs[shift + i * ell] -= &c;
            }
        }
        Self {
            ell: self.ell,
            coeffs,
        }
    }

    /// Exact equality as algebraic numbers (compares canonical forms).
    pub fn canonical_eq(&self, other: &Self) -> bool {
        self.ell == other.ell && self.reduce().coeffs == other.reduce().coeffs
    }

    /// If the element is a rational integer, return it.
    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.reduce();
        if r.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(r.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Trace down to `Q` by linearity over [`trace_of_zeta_power`];
    /// invariant under [`CyclotomicInteger::reduce`].
    pub fn trace(&self) -> BigInt {
        let ell = self.ell;
        let mut total = BigInt::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = trace_of_zeta_power(k as u64, ell).expect("k < level by construction");
            total += c * t;
        }
        total
    }

    /// Floating-point embedding `zeta -> exp(2 pi i / l^2)`.
    pub fn to_complex(&self) -> num_complex::Complex64 {
        let level = self.level() as f64;
        let mut z = num_complex::Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = c.to_f64().expect("coefficient out of f64 range");
            let theta = 2.0 * std::f64::consts::PI * k as f64 / level;
            z += num_complex::Complex64::from_polar(c, theta);
        }
        z
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Largest coefficient magnitude, a cheap size diagnostic.
    pub fn max_coeff_abs(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}
