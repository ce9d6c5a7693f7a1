//! The exponent calculus behind the CM endomorphism of `Jac(C_l)` and the
//! block-signed permutation matrix `gamma` generating the component group
//! of the Sato-Tate group.
//!
//! Everything here is exact: `gamma` lives in the block algebra
//! `{0, +-I, +-J}` (`I` the 2x2 identity, `J = [[0,1],[-1,0]]`), so the
//! identities of the component-group argument are verified with integer
//! computations only.

use crate::{Error, Result};

/// Family parameters for `C_l : y^l = x(x^l - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveParams {
    pub ell: u64,
    pub genus: usize,
    pub modulus: u64,
    pub component_count: usize,
}

impl CurveParams {
    pub fn new(ell: u64) -> Result<Self> {
        if ell < 3 || !crate::arith::is_prime(ell) {
            return Err(Error::NotOddPrime(ell));
        }
        let genus = (ell * (ell - 1) / 2) as usize;
        Ok(Self {
            ell,
            genus,
            modulus: ell * ell,
            component_count: 2 * genus,
        })
    }
}

/// A regular differential `x^a dx / y^b` with `0 <= a <= l-2`,
/// `a+1 <= b <= l-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneForm {
    pub a: u64,
    pub b: u64,
}

/// Ordered basis of regular 1-forms: increasing `a`, then increasing `b`.
pub fn one_form_basis(ell: u64) -> Result<Vec<OneForm>> {
    let params = CurveParams::new(ell)?;
    let mut forms = Vec::with_capacity(params.genus);
    for a in 0..=ell - 2 {
        for b in a + 1..=ell - 1 {
            forms.push(OneForm { a, b });
        }
    }
    debug_assert_eq!(forms.len(), params.genus);
    Ok(forms)
}

/// The CM endomorphism as an exponent list: the `j`-th diagonal block is
/// `Z^{e_j}` with `e_j = <l(a_j + 1 - b_j) - b_j> mod l^2`, together with
/// the set `S` of all exponents.
#[derive(Debug, Clone)]
pub struct ExponentData {
    pub params: CurveParams,
    pub forms: Vec<OneForm>,
    pub e: Vec<u64>,
    /// Membership table over `0..l^2`: `in_s[x]` iff `x` is some `e_j`.
    in_s: Vec<bool>,
}

impl ExponentData {
    pub fn contains(&self, x: u64) -> bool {
        self.in_s[x as usize]
    }

    /// The exponents as a sorted set.
    pub fn set(&self) -> Vec<u64> {
        let mut s = self.e.clone();
        s.sort_unstable();
        s
    }
}

/// Compute the exponent data for `C_l` and check its structural invariants:
/// the `e_j` are distinct units mod `l^2`, none divisible by `l`, no two
/// summing to `l^2`, and they fill exactly half of `(Z/l^2 Z)*`.
pub fn exponent_set(ell: u64) -> Result<ExponentData> {
    let params = CurveParams::new(ell)?;
    let m = params.modulus;
    let forms = one_form_basis(ell)?;
    let mut e = Vec::with_capacity(forms.len());
    let mut in_s = vec![false; m as usize];
    for &OneForm { a, b } in &forms {
        // <l(a + 1 - b) - b> mod l^2, computed without going negative
        let raw = (ell * (a + 1 + m - b) + m * m - b) % m;
        assert!(raw % ell != 0, "exponent divisible by l: form ({a},{b})");
        assert!(!in_s[raw as usize], "duplicate exponent {raw}");
        in_s[raw as usize] = true;
        e.push(raw);
    }
    assert_eq!(e.len(), params.genus);
    for &x in &e {
        assert!(
            !in_s[(m - x) as usize],
            "exponents {x} and {} both present",
            m - x
        );
    }
    Ok(ExponentData {
        params,
        forms,
        e,
        in_s,
    })
}

/// Action of the Galois automorphism `sigma_n : zeta -> zeta^n` on the CM
/// endomorphism. Per index `i` the image block is `Z^{g_i}` when
/// `g_i = <n e_i>` lies in `S`, else `conj(Z)^{l^2 - g_i}`; `exponent` is
/// always the representative in `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisAction {
    pub n: u64,
    pub targets: Vec<GaloisTarget>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaloisTarget {
    /// Representative exponent in `S`.
    pub exponent: u64,
    /// True when the block is conjugated, i.e. `<n e_i>` fell outside `S`.
    pub conjugated: bool,
}

pub fn galois_action(ell: u64, n: u64) -> Result<GaloisAction> {
    let data = exponent_set(ell)?;
    galois_action_of(&data, n)
}

pub fn galois_action_of(data: &ExponentData, n: u64) -> Result<GaloisAction> {
    let m = data.params.modulus;
    let n = n % m;
    if n == 0 || n % data.params.ell == 0 {
        return Err(Error::NotAUnit(n, m));
    }
    let targets = data
        .e
        .iter()
        .map(|&e| {
            let g = n * e % m;
            if data.contains(g) {
                GaloisTarget {
                    exponent: g,
                    conjugated: false,
                }
            } else {
                GaloisTarget {
                    exponent: m - g,
                    conjugated: true,
                }
            }
        })
        .collect();
    Ok(GaloisAction { n, targets })
}

/// Multiplicative order of `n` in `(Z/l^2 Z)*`.
pub fn unit_order(ell: u64, n: u64) -> Result<usize> {
    let m = ell * ell;
    let n = n % m;
    if n == 0 || n % ell == 0 {
        return Err(Error::NotAUnit(n, m));
    }
    let mut cur = n;
    let mut ord = 1;
    while cur != 1 {
        cur = cur * n % m;
        ord += 1;
    }
    Ok(ord)
}

/// Whether `n` generates `(Z/l^2 Z)*`.
pub fn is_generator(ell: u64, n: u64) -> Result<bool> {
    Ok(unit_order(ell, n)? as u64 == ell * (ell - 1))
}

/// Smallest generator of `(Z/l^2 Z)*`, found by order testing.
pub fn smallest_generator(ell: u64) -> Result<u64> {
    CurveParams::new(ell)?;
    for n in 2..ell * ell {
        if n % ell == 0 {
            continue;
        }
        if is_generator(ell, n)? {
            return Ok(n);
        }
    }
    unreachable!("(Z/l^2 Z)* is cyclic for odd prime l")
}

/// One 2x2 block of a signed block matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockTag {
    Zero,
    I,
    NegI,
    J,
    NegJ,
}

impl BlockTag {
    pub fn mul(self, other: BlockTag) -> BlockTag {
        use BlockTag::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (I, x) | (x, I) => x,
            (NegI, x) | (x, NegI) => x.neg(),
            (J, J) => NegI,
            (J, NegJ) | (NegJ, J) => I,
            (NegJ, NegJ) => NegI,
        }
    }

    pub fn neg(self) -> BlockTag {
        use BlockTag::*;
        match self {
            Zero => Zero,
            I => NegI,
            NegI => I,
            J => NegJ,
            NegJ => J,
        }
    }

    /// Transpose of the 2x2 block: `I` and `-I` are symmetric, `J` is
    /// antisymmetric.
    pub fn transpose(self) -> BlockTag {
        use BlockTag::*;
        match self {
            J => NegJ,
            NegJ => J,
            other => other,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, BlockTag::Zero)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BlockTag::Zero => "0",
            BlockTag::I => "I",
            BlockTag::NegI => "-I",
            BlockTag::J => "J",
            BlockTag::NegJ => "-J",
        }
    }
}

/// A `g x g` grid of 2x2 block tags; the matrices of interest have exactly
/// one nonzero block per row and per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedBlockMatrix {
    size: usize,
    blocks: Vec<BlockTag>,
}

impl SignedBlockMatrix {
    pub fn zero(size: usize) -> Self {
        Self {
            size,
            blocks: vec![BlockTag::Zero; size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zero(size);
        for i in 0..size {
            m.set_block(i, i, BlockTag::I);
        }
        m
    }

    /// `Omega = diag(J, ..., J)`, the symplectic form.
    pub fn symplectic_form(size: usize) -> Self {
        let mut m = Self::zero(size);
        for i in 0..size {
            m.set_block(i, i, BlockTag::J);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn block(&self, i: usize, j: usize) -> BlockTag {
        self.blocks[i * self.size + j]
    }

    pub fn set_block(&mut self, i: usize, j: usize, tag: BlockTag) {
        self.blocks[i * self.size + j] = tag;
    }

    /// Nonzero blocks as `(row, col, tag)` triples.
    pub fn nonzero_blocks(&self) -> Vec<(usize, usize, BlockTag)> {
        let mut out = Vec::new();
        for i in 0..self.size {
            for j in 0..self.size {
                let t = self.block(i, j);
                if !t.is_zero() {
                    out.push((i, j, t));
                }
            }
        }
        out
    }

    /// Exactly one nonzero block per row and per column.
    pub fn is_block_permutation(&self) -> bool {
        let mut row = vec![0usize; self.size];
        let mut col = vec![0usize; self.size];
        for i in 0..self.size {
            for j in 0..self.size {
                if !self.block(i, j).is_zero() {
                    row[i] += 1;
                    col[j] += 1;
                }
            }
        }
        row.iter().all(|&c| c == 1) && col.iter().all(|&c| c == 1)
    }

    /// For a block permutation, the column of the nonzero block in each row
    /// and its tag.
    pub fn permutation(&self) -> Result<Vec<(usize, BlockTag)>> {
        if !self.is_block_permutation() {
            return Err(Error::NotBlockPermutation);
        }
        Ok((0..self.size)
            .map(|i| {
                (0..self.size)
                    .find_map(|j| {
                        let t = self.block(i, j);
                        (!t.is_zero()).then_some((j, t))
                    })
                    .expect("row of a block permutation has a nonzero block")
            })
            .collect())
    }

    /// Block transpose: the tag at `(i, j)` moves to `(j, i)` transposed.
    pub fn block_transpose(&self) -> Self {
        let mut out = Self::zero(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                out.set_block(j, i, self.block(i, j).transpose());
            }
        }
        out
    }

    /// Inverse of a signed block permutation; equals the block transpose
    /// (`J -> -J` on each block).
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_block_permutation() {
            return Err(Error::NotBlockPermutation);
        }
        Ok(self.block_transpose())
    }

    /// `self^k` by repeated composition.
    pub fn pow(&self, k: usize) -> Result<Self> {
        let mut acc = Self::identity(self.size);
        for _ in 0..k {
            acc = block_compose(&acc, self)?;
        }
        Ok(acc)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.size)
    }

    /// Block-diagonal with every diagonal block `+I` or `-I`: the condition
    /// for membership in the identity component `U(1)^g`.
    pub fn is_plus_minus_identity(&self) -> bool {
        for i in 0..self.size {
            for j in 0..self.size {
                let t = self.block(i, j);
                if i == j {
                    if !matches!(t, BlockTag::I | BlockTag::NegI) {
                        return false;
                    }
                } else if !t.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// Composition in the block algebra. Fails if two nonzero products land in
/// the same cell (possible only for inputs that are not signed block
/// permutations, whose sums leave the `{0, +-I, +-J}` algebra).
pub fn block_compose(a: &SignedBlockMatrix, b: &SignedBlockMatrix) -> Result<SignedBlockMatrix> {
    if a.size != b.size {
        return Err(Error::SizeMismatch(a.size, b.size));
    }
    let n = a.size;
    let mut out = SignedBlockMatrix::zero(n);
    for i in 0..n {
        for k in 0..n {
            let left = a.block(i, k);
            if left.is_zero() {
                continue;
            }
            for j in 0..n {
                let right = b.block(k, j);
                if right.is_zero() {
                    continue;
                }
                let prod = left.mul(right);
                if !out.block(i, j).is_zero() {
                    return Err(Error::NotBlockPermutation);
                }
                out.set_block(i, j, prod);
            }
        }
    }
    Ok(out)
}

/// The generator `gamma` of the Sato-Tate component group for the Galois
/// element `sigma_n`: block `(i, j)` is `I` when `g_i = e_j`, `J` when
/// `g_i = l^2 - e_j`, zero otherwise.
///
/// Any unit `n` is accepted; only generators of `(Z/l^2 Z)*` make `gamma`
/// generate the full component group (see [`is_generator`]).
pub fn gamma_matrix(ell: u64, n: u64) -> Result<SignedBlockMatrix> {
    let data = exponent_set(ell)?;
    gamma_matrix_of(&data, n)
}

pub fn gamma_matrix_of(data: &ExponentData, n: u64) -> Result<SignedBlockMatrix> {
    let m = data.params.modulus;
    let n = n % m;
    if n == 0 || n % data.params.ell == 0 {
        return Err(Error::NotAUnit(n, m));
    }
    let g = data.params.genus;
    let mut gamma = SignedBlockMatrix::zero(g);
    for i in 0..g {
        let gi = n * data.e[i] % m;
        for j in 0..g {
            if gi == data.e[j] {
                gamma.set_block(i, j, BlockTag::I);
            } else if gi == m - data.e[j] {
                gamma.set_block(i, j, BlockTag::J);
            }
        }
    }
    debug_assert!(gamma.is_block_permutation());
    Ok(gamma)
}

/// Inverse of `gamma` from its explicit definition (`i`/`j` swapped, `J`
/// replaced by `-J`), used to cross-check [`SignedBlockMatrix::inverse`].
pub fn gamma_inverse_explicit(data: &ExponentData, n: u64) -> Result<SignedBlockMatrix> {
    let m = data.params.modulus;
    let n = n % m;
    if n == 0 || n % data.params.ell == 0 {
        return Err(Error::NotAUnit(n, m));
    }
    let g = data.params.genus;
    let mut inv = SignedBlockMatrix::zero(g);
    for i in 0..g {
        for j in 0..g {
            let gj = n * data.e[j] % m;
            if gj == data.e[i] {
                inv.set_block(i, j, BlockTag::I);
            } else if gj == m - data.e[i] {
                inv.set_block(i, j, BlockTag::NegJ);
            }
        }
    }
    Ok(inv)
}

/// Diagonal blocks of `gamma . diag(Z^{e_j}) . gamma^{-1}`, each expressed
/// as an exponent with a conjugation flag.
///
/// For the 2x2 blocks, `I Z^e I = Z^e` and `-J Z^e J = conj(Z)^e`, so the
/// flag records whether the carrying block was `+-J`.
pub fn conjugate_alpha(gamma: &SignedBlockMatrix, exponents: &[u64]) -> Result<Vec<GaloisTarget>> {
    let diag: Vec<GaloisTarget> = exponents
        .iter()
        .map(|&e| GaloisTarget {
            exponent: e,
            conjugated: false,
        })
        .collect();
    conjugate_diagonal(gamma, &diag)
}

/// As [`conjugate_alpha`] but the diagonal entries may already carry
/// conjugation flags, so conjugations compose (needed to iterate the
/// action).
pub fn conjugate_diagonal(
    gamma: &SignedBlockMatrix,
    diag: &[GaloisTarget],
) -> Result<Vec<GaloisTarget>> {
    if diag.len() != gamma.size() {
        return Err(Error::SizeMismatch(diag.len(), gamma.size()));
    }
    let perm = gamma.permutation()?;
    Ok(perm
        .into_iter()
        .map(|(k, tag)| {
            let entry = diag[k];
            match tag {
                BlockTag::I | BlockTag::NegI => entry,
                BlockTag::J | BlockTag::NegJ => GaloisTarget {
                    exponent: entry.exponent,
                    conjugated: !entry.conjugated,
                },
                BlockTag::Zero => unreachable!("permutation() yields nonzero tags"),
            }
        })
        .collect())
}

/// Smallest `d > 0` with `gamma^d` in the identity component (block-diagonal
/// with `+-I` blocks); equals `l(l-1)` when `n` generates `(Z/l^2 Z)*`.
pub fn component_order(gamma: &SignedBlockMatrix) -> Result<usize> {
    let mut acc = gamma.clone();
    let limit = 8 * gamma.size() * gamma.size() + 8;
    for d in 1..=limit {
        if acc.is_plus_minus_identity() {
            return Ok(d);
        }
        acc = block_compose(&acc, gamma)?;
    }
    Err(Error::NotBlockPermutation)
}

/// Smallest `d > 0` with `gamma^d` the identity matrix. May be twice the
/// component order when `gamma^{l(l-1)}` has `-I` blocks; reported as a
/// diagnostic alongside [`component_order`].
pub fn matrix_order(gamma: &SignedBlockMatrix) -> Result<usize> {
    let mut acc = gamma.clone();
    let limit = 16 * gamma.size() * gamma.size() + 16;
    for d in 1..=limit {
        if acc.is_identity() {
            return Ok(d);
        }
        acc = block_compose(&acc, gamma)?;
    }
    Err(Error::NotBlockPermutation)
}

/// `gamma^T Omega gamma = Omega` in the block algebra, with
/// `Omega = diag(J, ..., J)`.
pub fn is_symplectic(gamma: &SignedBlockMatrix) -> bool {
    let omega = SignedBlockMatrix::symplectic_form(gamma.size());
    let Ok(inner) = block_compose(&omega, gamma) else {
        return false;
    };
    let Ok(product) = block_compose(&gamma.block_transpose(), &inner) else {
        return false;
    };
    product == omega
}
