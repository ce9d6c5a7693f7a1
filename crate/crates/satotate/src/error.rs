use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not an odd prime >= 3")]
    NotOddPrime(u64),

    #[error("bad reduction: q = {0} equals the family parameter l")]
    BadReduction(u64),

    #[error("q = {q} exceeds the memory guard {guard}")]
    MemoryGuard { q: u64, guard: u64 },

    #[error("cyclotomic level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),

    #[error("exponent {k} out of range for level {level}")]
    ExponentOutOfRange { k: u64, level: u64 },

    #[error("q = {q} is not congruent to 1 mod {modulus}")]
    NotSplit { q: u64, modulus: u64 },

    #[error("degenerate character exponent {0} (0 mod l^2)")]
    DegenerateCharacter(u64),

    #[error("{0} is not a unit modulo {1}")]
    NotAUnit(u64, u64),

    #[error("block matrix size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("not a signed block permutation matrix")]
    NotBlockPermutation,

    #[error("component index {index} out of range ({count} components)")]
    ComponentOutOfRange { index: usize, count: usize },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("cache {path}, line {line}: {reason}")]
    CacheFormat {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("cache holds conflicting counts for l = {ell}, p = {p}: {a} vs {b}")]
    CacheConflict { ell: u64, p: u64, a: u64, b: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
