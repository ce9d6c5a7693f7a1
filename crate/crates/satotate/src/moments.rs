//! Moment statistics of the Sato-Tate group `<U(1)^g, gamma>`: exact
//! a1-moments via the multinomial formula, and Monte-Carlo moments of all
//! L-polynomial coefficients via characteristic polynomials of sampled
//! group elements.
//!
//! Characteristic polynomials of `U gamma^i` are computed through the
//! permutation-cycle structure of `gamma^i`: each cycle contributes a real
//! self-reciprocal factor `T^{2m} + c T^m + 1`, so coefficients come out
//! exactly real and exactly palindromic, and `a_1` is exactly zero on every
//! component with nontrivial Galois element. A dense Faddeev-LeVerrier
//! route over the realized `2g x 2g` complex matrix cross-checks the cycle
//! decomposition.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::stgroup::{
    gamma_matrix, smallest_generator, BlockTag, CurveParams, SignedBlockMatrix,
};
use crate::{Error, Result};

/// Largest supported matrix dimension `2g` for sampling routines.
pub const MAX_MATRIX_DIM: usize = 110;

/// `n`-th moment of `u + conj(u)` on `U(1)`: `0` for odd `n`, the central
/// binomial `C(n, n/2)` for even `n` (`1, 0, 2, 0, 6, 0, 20, ...`).
pub fn u1_moment(n: u32) -> BigUint {
    if n % 2 == 1 {
        BigUint::zero()
    } else {
        num_integer::binomial(BigUint::from(n), BigUint::from(n / 2))
    }
}

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Falling factorial `g (g-1) ... (g-m+1)`.
fn falling(g: u64, m: u64) -> BigUint {
    (0..m).map(|i| BigUint::from(g - i)).product()
}

/// Visit the partitions of `n` into at most `max_parts` even parts
/// (descending part lists).
fn for_each_even_partition(n: u32, max_parts: usize, mut f: impl FnMut(&[u32])) {
    fn rec(rem: u32, cap: u32, left: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if rem == 0 {
            f(cur);
            return;
        }
        if left == 0 {
            return;
        }
        let mut part = cap.min(rem);
        part -= part % 2;
        while part >= 2 {
            cur.push(part);
            rec(rem - part, part, left - 1, cur, f);
            cur.pop();
            part -= 2;
        }
    }
    let mut cur = Vec::new();
    rec(n, n, max_parts, &mut cur, &mut f);
}

/// `n`-th moment of `a_1` restricted to the identity component `U(1)^g`,
/// exactly: the multinomial expansion of `E[(alpha_0 + ... + alpha_{g-1})^n]`
/// collapsed onto integer partitions of `n` into at most `g` even parts
/// (odd single-factor moments vanish), weighted by the number of index
/// assignments.
pub fn exact_a1_moment_component0(ell: u64, n: u32) -> Result<BigInt> {
    let params = CurveParams::new(ell)?;
    let g = params.genus as u64;
    let mut total = BigUint::zero();
    let n_fact = factorial(n as u64);
    for_each_even_partition(n, params.genus, |parts| {
        // multinomial n! / prod(part!)
        let mut denom = BigUint::one();
        for &p in parts {
            denom *= factorial(p as u64);
        }
        let multinomial = &n_fact / denom;
        // index assignments: (g)_m / prod over repeated part sizes
        let m = parts.len() as u64;
        let mut repeat = BigUint::one();
        let mut run = 1u64;
        for w in parts.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                repeat *= factorial(run);
                run = 1;
            }
        }
        repeat *= factorial(run);
        let assignments = falling(g, m) / repeat;
        let mut term = multinomial * assignments;
        for &p in parts {
            term *= u1_moment(p);
        }
        total += term;
    });
    if n == 0 {
        total = BigUint::one();
    }
    Ok(BigInt::from(total))
}

/// `n`-th moment of `a_1` over the full Sato-Tate group: the component-0
/// value divided by the component count `l(l-1)` (`a_1` vanishes identically
/// on every other component). Exactly zero for odd `n`; `n = 0` gives 1.
pub fn exact_a1_moment(ell: u64, n: u32) -> Result<BigRational> {
    let params = CurveParams::new(ell)?;
    if n == 0 {
        return Ok(BigRational::one());
    }
    let numer = exact_a1_moment_component0(ell, n)?;
    Ok(BigRational::new(
        numer,
        BigInt::from(params.component_count),
    ))
}

/// An element of `U(1)^g` stored as `g` angles; the realized matrix is
/// `diag(u_0, conj(u_0), ..., u_{g-1}, conj(u_{g-1}))` with
/// `u_j = exp(i angle_j)`.
#[derive(Debug, Clone)]
pub struct DiagonalUnitary {
    angles: Vec<f64>,
}

impl DiagonalUnitary {
    pub fn from_angles(angles: Vec<f64>) -> Self {
        Self { angles }
    }

    pub fn genus(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn u(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.angles[j])
    }
}

/// Haar-random element of the identity component `U(1)^g`: `g` independent
/// angles uniform on `[0, 2 pi)`.
pub fn sample_identity_component(ell: u64, rng: &mut impl Rng) -> Result<DiagonalUnitary> {
    let params = CurveParams::new(ell)?;
    Ok(sample_angles(params.genus, rng))
}

fn sample_angles(genus: usize, rng: &mut impl Rng) -> DiagonalUnitary {
    let angles = (0..genus)
        .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
        .collect();
    DiagonalUnitary::from_angles(angles)
}

/// Multiply `poly` (ascending coefficients) by `T^{2m} + mid T^m + 1`.
fn mul_cycle_factor(poly: &[f64], m: usize, mid: f64) -> Vec<f64> {
    let mut out = vec![0.0; poly.len() + 2 * m];
    for (i, &c) in poly.iter().enumerate() {
        out[i] += c;
        out[i + m] += mid * c;
        out[i + 2 * m] += c;
    }
    out
}

/// Coefficients `a_1 .. a_{2g}` of `det(T Id - U M)` for a signed block
/// permutation `M`, through its permutation cycles.
///
/// Each cycle of length `m` contributes `det(T^m Id_2 - P)` where `P` is the
/// ordered product of the 2x2 blocks along the cycle. `P` is either
/// `diag(w, conj w)` (factor `T^{2m} - 2 Re(w) T^m + 1`) or antidiagonal
/// (factor `T^{2m} + 1`), so the characteristic polynomial is assembled from
/// real self-reciprocal factors and the palindromic symmetry is enforced
/// exactly by mirroring the computed lower half.
pub fn charpoly_coeffs_of(u: &DiagonalUnitary, m: &SignedBlockMatrix) -> Result<Vec<f64>> {
    let g = m.size();
    if u.genus() != g {
        return Err(Error::SizeMismatch(u.genus(), g));
    }
    let perm = m.permutation()?;
    let mut visited = vec![false; g];
    let mut poly = vec![1.0f64];
    for start in 0..g {
        if visited[start] {
            continue;
        }
        let mut row = start;
        let mut len = 0usize;
        // running product over {diag(w, conj w), antidiag(w)}; signs fold
        // into w
        let mut anti = false;
        let mut w = Complex64::new(1.0, 0.0);
        loop {
            visited[row] = true;
            len += 1;
            let (next, tag) = perm[row];
            let (block_anti, v) = match tag {
                BlockTag::I => (false, u.u(row)),
                BlockTag::NegI => (false, -u.u(row)),
                BlockTag::J => (true, u.u(row)),
                BlockTag::NegJ => (true, -u.u(row)),
                BlockTag::Zero => unreachable!("permutation() yields nonzero tags"),
            };
            match (anti, block_anti) {
                (false, false) => w *= v,
                (false, true) => {
                    w *= v;
                    anti = true;
                }
                (true, false) => w *= v.conj(),
                (true, true) => {
                    w = -(w * v.conj());
                    anti = false;
                }
            }
            row = next;
            if row == start {
                break;
            }
        }
        let mid = if anti { 0.0 } else { -2.0 * w.re };
        poly = mul_cycle_factor(&poly, len, mid);
    }
    debug_assert_eq!(poly.len(), 2 * g + 1);
    // the true polynomial is self-reciprocal; mirror the lower half
    for i in 0..=g {
        debug_assert!(
            (poly[2 * g - i] - poly[i]).abs() <= 1e-9 * poly[i].abs().max(1.0),
            "palindromy drift at {i}"
        );
        poly[2 * g - i] = poly[i];
    }
    Ok((1..=2 * g).map(|k| poly[2 * g - k]).collect())
}

/// Coefficients `a_1 .. a_{2g}` of `det(T Id - U gamma^i)` in the normalized
/// L-polynomial convention (`a_k` multiplies `T^{2g-k}`, `a_{2g} = 1`).
pub fn charpoly_coeffs(
    u: &DiagonalUnitary,
    gamma: &SignedBlockMatrix,
    i: usize,
) -> Result<Vec<f64>> {
    let count = 2 * gamma.size();
    if i >= count {
        return Err(Error::ComponentOutOfRange { index: i, count });
    }
    charpoly_coeffs_of(u, &gamma.pow(i)?)
}

/// Dense cross-check of [`charpoly_coeffs`]: realize `U M` as a `2g x 2g`
/// complex matrix and run the Faddeev-LeVerrier trace recursion. Returns
/// complex coefficients; imaginary parts measure the numerical error.
pub fn charpoly_coeffs_dense(u: &DiagonalUnitary, m: &SignedBlockMatrix) -> Result<Vec<Complex64>> {
    let g = m.size();
    if u.genus() != g {
        return Err(Error::SizeMismatch(u.genus(), g));
    }
    let n = 2 * g;
    let mut mat = vec![Complex64::zero(); n * n];
    for i in 0..g {
        for j in 0..g {
            let tag = m.block(i, j);
            if tag.is_zero() {
                continue;
            }
            let ui = u.u(i);
            let (r, c) = (2 * i, 2 * j);
            match tag {
                BlockTag::I => {
                    mat[r * n + c] = ui;
                    mat[(r + 1) * n + c + 1] = ui.conj();
                }
                BlockTag::NegI => {
                    mat[r * n + c] = -ui;
                    mat[(r + 1) * n + c + 1] = -ui.conj();
                }
                BlockTag::J => {
                    mat[r * n + c + 1] = ui;
                    mat[(r + 1) * n + c] = -ui.conj();
                }
                BlockTag::NegJ => {
                    mat[r * n + c + 1] = -ui;
                    mat[(r + 1) * n + c] = ui.conj();
                }
                BlockTag::Zero => unreachable!(),
            }
        }
    }
    let trace = |m: &[Complex64]| -> Complex64 { (0..n).map(|d| m[d * n + d]).sum() };
    let mut coeffs = Vec::with_capacity(n);
    let mut mk = mat.clone();
    let mut ck = -trace(&mk);
    coeffs.push(ck);
    for k in 2..=n {
        let mut shifted = mk;
        for d in 0..n {
            shifted[d * n + d] += ck;
        }
        let mut next = vec![Complex64::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = mat[i * n + l];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[i * n + j] += a * shifted[l * n + j];
                }
            }
        }
        mk = next;
        ck = -trace(&mk) / k as f64;
        coeffs.push(ck);
    }
    Ok(coeffs)
}

/// Configuration for Monte-Carlo moments of the coefficients `a_1 .. a_k`.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub ell: u64,
    pub k_max: usize,
    pub n_max: u32,
    pub samples: u64,
    pub seed: u64,
    /// `None`: draw the component uniformly per sample (Haar on the full
    /// group). `Some(i)`: restrict to the component of `gamma^i`.
    pub component: Option<usize>,
}

/// Monte-Carlo moment estimates with standard errors.
#[derive(Debug, Clone)]
pub struct McMomentTable {
    pub ell: u64,
    pub k_max: usize,
    pub n_max: u32,
    pub samples: u64,
    pub seed: u64,
    pub component: Option<usize>,
    mean: Vec<f64>,
    std_err: Vec<f64>,
}

impl McMomentTable {
    fn idx(&self, k: usize, n: u32) -> usize {
        assert!(k >= 1 && k <= self.k_max && n >= 1 && n <= self.n_max);
        (k - 1) * self.n_max as usize + (n - 1) as usize
    }

    /// Estimated `E[a_k^n]`.
    pub fn mean(&self, k: usize, n: u32) -> f64 {
        self.mean[self.idx(k, n)]
    }

    /// Standard error of the mean estimate.
    pub fn std_err(&self, k: usize, n: u32) -> f64 {
        self.std_err[self.idx(k, n)]
    }
}

/// Samples are drawn in fixed-size chunks, one independent RNG stream per
/// chunk, and partial sums are reduced in chunk order; results therefore do
/// not depend on how many worker threads rayon uses.
const MC_CHUNK: u64 = 8192;

/// Monte-Carlo moments: per sample draw a component and a Haar element of
/// `U(1)^g`, take the characteristic polynomial of the product, and average
/// powers of its coefficients. Deterministic given `(seed, samples)`.
pub fn mc_moments(config: &McConfig) -> Result<McMomentTable> {
    let params = CurveParams::new(config.ell)?;
    if 2 * params.genus > MAX_MATRIX_DIM {
        return Err(Error::ResourceGuard(format!(
            "matrix dimension {} exceeds {MAX_MATRIX_DIM}",
            2 * params.genus
        )));
    }
    if config.samples == 0 {
        return Err(Error::ResourceGuard("samples must be >= 1".into()));
    }
    if config.samples > 1 << 34 {
        return Err(Error::ResourceGuard(format!(
            "samples {} exceeds 2^34",
            config.samples
        )));
    }
    if config.k_max < 1 || config.k_max > 2 * params.genus {
        return Err(Error::ResourceGuard(format!(
            "k_max {} outside 1..={}",
            config.k_max,
            2 * params.genus
        )));
    }
    let cc = params.component_count;
    if let Some(i) = config.component {
        if i >= cc {
            return Err(Error::ComponentOutOfRange { index: i, count: cc });
        }
    }
    let n = smallest_generator(config.ell)?;
    let gamma = gamma_matrix(config.ell, n)?;
    let powers: Vec<SignedBlockMatrix> = (0..cc)
        .map(|i| gamma.pow(i))
        .collect::<Result<_>>()?;

    let genus = params.genus;
    let k_max = config.k_max;
    let n_max = config.n_max as usize;
    let cells = k_max * n_max;
    let chunks = config.samples.div_ceil(MC_CHUNK);

    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(chunk + 1);
            let lo = chunk * MC_CHUNK;
            let hi = (lo + MC_CHUNK).min(config.samples);
            let mut sum = vec![0.0f64; cells];
            let mut sum_sq = vec![0.0f64; cells];
            for _ in lo..hi {
                let comp = match config.component {
                    Some(i) => i,
                    None => rng.gen_range(0..cc),
                };
                let u = sample_angles(genus, &mut rng);
                let coeffs = charpoly_coeffs_of(&u, &powers[comp])
                    .expect("gamma powers are block permutations");
                for (k, &a) in coeffs.iter().take(k_max).enumerate() {
                    let mut p = 1.0f64;
                    for nn in 0..n_max {
                        p *= a;
                        sum[k * n_max + nn] += p;
                        sum_sq[k * n_max + nn] += p * p;
                    }
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let mut sum = vec![0.0f64; cells];
    let mut sum_sq = vec![0.0f64; cells];
    for (s, s2) in &partials {
        for i in 0..cells {
            sum[i] += s[i];
            sum_sq[i] += s2[i];
        }
    }
    let count = config.samples as f64;
    let mut mean = vec![0.0f64; cells];
    let mut std_err = vec![0.0f64; cells];
    for i in 0..cells {
        mean[i] = sum[i] / count;
        let var = (sum_sq[i] / count - mean[i] * mean[i]).max(0.0);
        std_err[i] = (var / count).sqrt();
    }
    Ok(McMomentTable {
        ell: config.ell,
        k_max: config.k_max,
        n_max: config.n_max,
        samples: config.samples,
        seed: config.seed,
        component: config.component,
        mean,
        std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    /// Direct composition-sum route for the component-0 moment: the
    /// small-instance oracle for the partition-based implementation.
    fn comp0_moment_by_compositions(g: usize, n: u32) -> BigUint {
        fn rec(left: usize, rem: u32, coeff: BigUint, total: &mut BigUint) {
            if left == 1 {
                *total += coeff * u1_moment(rem);
                return;
            }
            for b in 0..=rem {
                let c = coeff.clone()
                    * num_integer::binomial(BigUint::from(rem), BigUint::from(b))
                    * u1_moment(b);
                if !c.is_zero() {
                    rec(left - 1, rem - b, c, total);
                }
            }
        }
        let mut total = BigUint::zero();
        rec(g, n, BigUint::one(), &mut total);
        total
    }

    #[test]
    fn u1_moment_sequence() {
        let got: Vec<u64> = (0..9).map(|n| u1_moment(n).to_u64().unwrap()).collect();
        assert_eq!(got, [1, 0, 2, 0, 6, 0, 20, 0, 70]);
    }

    #[test]
    fn component0_examples() {
        assert_eq!(exact_a1_moment_component0(5, 2).unwrap(), BigInt::from(20));
        assert_eq!(
            exact_a1_moment_component0(5, 4).unwrap(),
            BigInt::from(1140)
        );
        assert_eq!(exact_a1_moment_component0(3, 4).unwrap(), BigInt::from(90));
        // frozen from the composition-sum oracle
        assert_eq!(
            exact_a1_moment_component0(3, 6).unwrap(),
            BigInt::from(1860)
        );
        assert_eq!(
            exact_a1_moment_component0(3, 8).unwrap(),
            BigInt::from(44730)
        );
        assert_eq!(
            exact_a1_moment_component0(5, 6).unwrap(),
            BigInt::from(102800)
        );
        assert_eq!(
            exact_a1_moment_component0(5, 8).unwrap(),
            BigInt::from(12310900)
        );
    }

    #[test]
    fn partition_route_matches_composition_route() {
        for n in 0..=6 {
            assert_eq!(
                exact_a1_moment_component0(3, n).unwrap(),
                BigInt::from(comp0_moment_by_compositions(3, n)),
                "n={n}"
            );
        }
    }

    #[test]
    fn full_group_moments_table() {
        // exact theoretical moments for l = 5
        for (n, expected) in [(2u32, 1i64), (4, 57), (6, 5140), (8, 615545)] {
            let m = exact_a1_moment(5, n).unwrap();
            assert_eq!(m, BigRational::from(BigInt::from(expected)), "n={n}");
        }
        assert_eq!(exact_a1_moment(3, 2).unwrap(), BigRational::one());
        assert_eq!(exact_a1_moment(5, 3).unwrap(), BigRational::zero());
        assert_eq!(exact_a1_moment(5, 0).unwrap(), BigRational::one());
    }

    #[test]
    fn second_moment_is_one_for_all_ell() {
        for ell in [3u64, 5, 7, 11] {
            assert_eq!(exact_a1_moment(ell, 2).unwrap(), BigRational::one());
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let mut rng1 = ChaCha8Rng::seed_from_u64(7);
        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let a = sample_identity_component(5, &mut rng1).unwrap();
        let b = sample_identity_component(5, &mut rng2).unwrap();
        assert_eq!(a.angles(), b.angles());
        assert!(a.angles().iter().all(|&t| (0.0..std::f64::consts::TAU).contains(&t)));
    }

    #[test]
    fn sampling_first_angle_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let u = sample_identity_component(3, &mut rng).unwrap();
            let alpha = 2.0 * u.angles()[0].cos();
            sum += alpha;
            sum_sq += alpha * alpha;
        }
        let se = (2.0f64 / n as f64).sqrt();
        assert!((sum / n as f64).abs() < 3.0 * se, "mean {}", sum / n as f64);
        // E[alpha^2] = 2, Var[alpha^2] = M4 - M2^2 = 6 - 4 = 2
        assert!(
            (sum_sq / n as f64 - 2.0).abs() < 3.0 * se,
            "second moment {}",
            sum_sq / n as f64
        );
    }

    #[test]
    fn charpoly_identity_element() {
        // U = Id, i = 0: det(T Id - Id) = (T - 1)^{2g}
        let gamma = gamma_matrix(3, 2).unwrap();
        let u = DiagonalUnitary::from_angles(vec![0.0; 3]);
        let coeffs = charpoly_coeffs(&u, &gamma, 0).unwrap();
        for (k, &a) in coeffs.iter().enumerate() {
            let k = (k + 1) as u32;
            let expected = num_integer::binomial(BigUint::from(6u32), BigUint::from(k))
                .to_f64()
                .unwrap()
                * if k % 2 == 1 { -1.0 } else { 1.0 };
            assert!((a - expected).abs() < 1e-12, "k={k}: {a} vs {expected}");
        }
    }

    #[test]
    fn charpoly_a1_is_minus_trace_on_component0() {
        let gamma = gamma_matrix(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..32 {
            let u = sample_identity_component(5, &mut rng).unwrap();
            let coeffs = charpoly_coeffs(&u, &gamma, 0).unwrap();
            let trace: f64 = u.angles().iter().map(|t| 2.0 * t.cos()).sum();
            assert!((coeffs[0] + trace).abs() < 1e-12);
        }
    }

    #[test]
    fn charpoly_a1_exactly_zero_off_identity_component() {
        for (ell, genus) in [(3u64, 3usize), (5, 10)] {
            let n = smallest_generator(ell).unwrap();
            let gamma = gamma_matrix(ell, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for i in 1..2 * genus {
                let u = sample_identity_component(ell, &mut rng).unwrap();
                let coeffs = charpoly_coeffs(&u, &gamma, i).unwrap();
                assert_eq!(coeffs[0], 0.0, "l={ell} i={i}");
                assert_eq!(coeffs[2 * genus - 2], 0.0, "palindromic mate, l={ell} i={i}");
            }
        }
    }

    #[test]
    fn charpoly_palindromic_and_monic() {
        let gamma = gamma_matrix(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..20 {
            let u = sample_identity_component(5, &mut rng).unwrap();
            let a = charpoly_coeffs(&u, &gamma, i).unwrap();
            assert_eq!(a.len(), 20);
            assert_eq!(a[19], 1.0); // a_{2g} = det = 1
            for k in 1..=19usize {
                assert_eq!(a[k - 1], a[20 - k - 1], "i={i} k={k}");
            }
        }
    }

    #[test]
    fn charpoly_rejects_out_of_range_component() {
        let gamma = gamma_matrix(3, 2).unwrap();
        let u = DiagonalUnitary::from_angles(vec![0.0; 3]);
        assert!(matches!(
            charpoly_coeffs(&u, &gamma, 6),
            Err(Error::ComponentOutOfRange { index: 6, count: 6 })
        ));
    }

    #[test]
    fn cycle_route_matches_dense_route() {
        // the dense Faddeev-LeVerrier extraction gates the cycle fast path
        for ell in [3u64, 5] {
            let n = smallest_generator(ell).unwrap();
            let gamma = gamma_matrix(ell, n).unwrap();
            let cc = 2 * gamma.size();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            for i in 0..cc {
                let u = sample_identity_component(ell, &mut rng).unwrap();
                let power = gamma.pow(i).unwrap();
                let fast = charpoly_coeffs_of(&u, &power).unwrap();
                let dense = charpoly_coeffs_dense(&u, &power).unwrap();
                let scale = fast.iter().fold(1.0f64, |m, &c| m.max(c.abs()));
                for (k, (&f, d)) in fast.iter().zip(&dense).enumerate() {
                    assert!(
                        (f - d.re).abs() <= 1e-8 * scale,
                        "l={ell} i={i} k={} re: {f} vs {}",
                        k + 1,
                        d.re
                    );
                    assert!(d.im.abs() <= 1e-8 * scale, "l={ell} i={i} k={}", k + 1);
                }
            }
        }
    }

    #[test]
    fn mc_moments_deterministic() {
        let config = McConfig {
            ell: 3,
            k_max: 2,
            n_max: 4,
            samples: 20_000,
            seed: 99,
            component: None,
        };
        let a = mc_moments(&config).unwrap();
        let b = mc_moments(&config).unwrap();
        for k in 1..=2 {
            for n in 1..=4 {
                assert_eq!(a.mean(k, n), b.mean(k, n));
                assert_eq!(a.std_err(k, n), b.std_err(k, n));
            }
        }
    }

    #[test]
    fn mc_moments_match_exact_a1() {
        let config = McConfig {
            ell: 5,
            k_max: 1,
            n_max: 4,
            samples: 200_000,
            seed: 4,
            component: None,
        };
        let table = mc_moments(&config).unwrap();
        for n in [2u32, 4] {
            let exact = exact_a1_moment(5, n).unwrap().to_f64().unwrap();
            let diff = (table.mean(1, n) - exact).abs();
            assert!(
                diff < 3.0 * table.std_err(1, n),
                "n={n}: {} vs {exact} (se {})",
                table.mean(1, n),
                table.std_err(1, n)
            );
        }
        let exact1 = table.mean(1, 1).abs();
        assert!(exact1 < 3.0 * table.std_err(1, 1).max(1e-12));
    }

    #[test]
    fn mc_moments_component0_matches_component_moment() {
        let config = McConfig {
            ell: 3,
            k_max: 1,
            n_max: 4,
            samples: 200_000,
            seed: 10,
            component: Some(0),
        };
        let table = mc_moments(&config).unwrap();
        let exact = exact_a1_moment_component0(3, 4)
            .unwrap()
            .to_f64()
            .unwrap();
        assert!((table.mean(1, 4) - exact).abs() < 3.0 * table.std_err(1, 4));
    }

    #[test]
    fn mc_moments_guards() {
        let bad = McConfig {
            ell: 13,
            k_max: 1,
            n_max: 2,
            samples: 10,
            seed: 0,
            component: None,
        };
        assert!(matches!(mc_moments(&bad), Err(Error::ResourceGuard(_))));
        let no_samples = McConfig {
            ell: 3,
            k_max: 1,
            n_max: 2,
            samples: 0,
            seed: 0,
            component: None,
        };
        assert!(mc_moments(&no_samples).is_err());
    }
}
