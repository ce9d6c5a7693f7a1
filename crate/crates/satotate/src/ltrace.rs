//! Numerical a1 statistics over prime ranges: enumerate good primes,
//! compute point counts (with a persistent text cache), aggregate moments,
//! and bin histograms.
//!
//! Only primes `p = 1 mod l^2` require field computation; for the rest the
//! count is `p + 1` and `a1 = 0` by the congruence lemmas, which is what
//! makes scans to `2^22` tractable.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::counting::{count_points, CountMethod, PointCountRecord};
use crate::stgroup::CurveParams;
use crate::{Error, Result, DEFAULT_MEMORY_GUARD};

/// All primes `p <= bound` except `l`, ascending (sieve of Eratosthenes).
pub fn good_primes(ell: u64, bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        if p as u64 != ell {
            primes.push(p as u64);
        }
        let mut multiple = p * p;
        while multiple <= n {
            composite[multiple] = true;
            multiple += p;
        }
    }
    primes
}

/// a1 data for all good primes up to a bound.
#[derive(Debug, Clone)]
pub struct A1Dataset {
    pub ell: u64,
    pub bound: u64,
    /// One record per good prime, ascending in `q`.
    pub records: Vec<PointCountRecord>,
}

impl A1Dataset {
    /// `(p, a1)` pairs for records passing the filter.
    pub fn a1_values(&self, filter: HistFilter) -> impl Iterator<Item = (u64, f64)> + '_ {
        let m = self.ell * self.ell;
        self.records.iter().filter_map(move |r| {
            filter
                .accepts(r.q, m)
                .then_some((r.q, r.a1()))
        })
    }
}

/// Counters describing how a scan obtained its records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanStats {
    /// Records settled by the congruence lemmas alone.
    pub fast_path: usize,
    /// Records taken from the cache.
    pub cache_hits: usize,
    /// Records that required a fresh field computation.
    pub computed: usize,
}

/// Cached counts keyed by `(l, p)`.
pub type CacheFragment = BTreeMap<(u64, u64), u64>;

const CACHE_HEADER: &str = "l,p,count";

/// Load a cache file. Rows may be unsorted; duplicate rows must agree
/// (conflicts are an error naming `p`). An empty or missing-at-caller file
/// yields an empty fragment.
pub fn cache_load(path: &Path) -> Result<CacheFragment> {
    let text = fs::read_to_string(path)?;
    let mut fragment = CacheFragment::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Ok(fragment),
        Some((_, header)) if header.trim() == CACHE_HEADER => {}
        Some((_, _)) => {
            return Err(Error::CacheFormat {
                path: path.display().to_string(),
                line: 1,
                reason: format!("expected header '{CACHE_HEADER}'"),
            })
        }
    }
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next_u64 = |name: &str| -> Result<u64> {
            fields
                .next()
                .ok_or(())
                .and_then(|f| f.trim().parse::<u64>().map_err(|_| ()))
                .map_err(|_| Error::CacheFormat {
                    path: path.display().to_string(),
                    line: line_no,
                    reason: format!("malformed {name}"),
                })
        };
        let ell = next_u64("l")?;
        let p = next_u64("p")?;
        let count = next_u64("count")?;
        if fields.next().is_some() {
            return Err(Error::CacheFormat {
                path: path.display().to_string(),
                line: line_no,
                reason: "too many fields".into(),
            });
        }
        if let Some(&existing) = fragment.get(&(ell, p)) {
            if existing != count {
                return Err(Error::CacheConflict {
                    ell,
                    p,
                    a: existing,
                    b: count,
                });
            }
        } else {
            fragment.insert((ell, p), count);
        }
    }
    Ok(fragment)
}

/// Write a dataset to the cache format: header plus `l,p,count` rows sorted
/// ascending by `p`. Load-then-store round-trips byte-identically.
pub fn cache_store(dataset: &A1Dataset, path: &Path) -> Result<()> {
    let mut out = String::from(CACHE_HEADER);
    out.push('\n');
    for r in &dataset.records {
        out.push_str(&format!("{},{},{}\n", dataset.ell, r.q, r.count));
    }
    fs::write(path, out)?;
    Ok(())
}

fn append_rows(path: &Path, ell: u64, rows: &[(u64, u64)]) -> Result<()> {
    let need_header = !path.exists() || fs::metadata(path)?.len() == 0;
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut buf = String::new();
    if need_header {
        buf.push_str(CACHE_HEADER);
        buf.push('\n');
    }
    for &(p, count) in rows {
        buf.push_str(&format!("{ell},{p},{count}\n"));
    }
    file.write_all(buf.as_bytes())?;
    file.flush()?;
    Ok(())
}

/// Primes per parallel batch; freshly computed rows are appended to the
/// cache after each batch so an interrupted scan keeps its progress.
const SCAN_BATCH: usize = 512;

/// Build the a1 dataset for all good primes `p <= bound`.
///
/// Primes `p != 1 mod l^2` are settled as `count = p + 1` without touching
/// the field. The rest are looked up in the cache (when given) and computed
/// via the Jacobi-sum path otherwise; fresh results are appended to the
/// cache as batches complete. Batches are merged in prime order, so the
/// result is independent of worker count.
pub fn build_dataset(
    ell: u64,
    bound: u64,
    cache_path: Option<&Path>,
) -> Result<(A1Dataset, ScanStats)> {
    CurveParams::new(ell)?;
    if bound > DEFAULT_MEMORY_GUARD {
        return Err(Error::ResourceGuard(format!(
            "bound {bound} exceeds {DEFAULT_MEMORY_GUARD}"
        )));
    }
    let m = ell * ell;
    let cache = match cache_path {
        Some(path) if path.exists() => cache_load(path)?,
        _ => CacheFragment::new(),
    };

    let primes = good_primes(ell, bound);
    let mut stats = ScanStats::default();
    let mut known: BTreeMap<u64, PointCountRecord> = BTreeMap::new();
    let mut to_compute: Vec<u64> = Vec::new();

    for &p in &primes {
        if p % m != 1 {
            // cached rows for congruence-path primes must agree with the
            // lemma value
            if let Some(&count) = cache.get(&(ell, p)) {
                if count != p + 1 {
                    return Err(Error::CacheConflict {
                        ell,
                        p,
                        a: count,
                        b: p + 1,
                    });
                }
            }
            known.insert(
                p,
                PointCountRecord {
                    ell,
                    q: p,
                    count: p + 1,
                    method: CountMethod::LemmaCongruence,
                },
            );
            stats.fast_path += 1;
        } else if let Some(&count) = cache.get(&(ell, p)) {
            let record = PointCountRecord {
                ell,
                q: p,
                count,
                method: CountMethod::JacobiTrace,
            };
            if !record.weil_bound_holds() {
                return Err(Error::CacheConflict {
                    ell,
                    p,
                    a: count,
                    b: p + 1,
                });
            }
            known.insert(p, record);
            stats.cache_hits += 1;
        } else {
            to_compute.push(p);
        }
    }

    for batch in to_compute.chunks(SCAN_BATCH) {
        let computed: Vec<PointCountRecord> = batch
            .par_iter()
            .map(|&p| count_points(ell, p))
            .collect::<Result<_>>()?;
        if let Some(path) = cache_path {
            let rows: Vec<(u64, u64)> = computed.iter().map(|r| (r.q, r.count)).collect();
            append_rows(path, ell, &rows)?;
        }
        for record in computed {
            known.insert(record.q, record);
            stats.computed += 1;
        }
    }

    let records: Vec<PointCountRecord> = known.into_values().collect();
    debug_assert!(records.windows(2).all(|w| w[0].q < w[1].q));
    Ok((
        A1Dataset {
            ell,
            bound,
            records,
        },
        stats,
    ))
}

/// Numerical moments `M_n = (sum_p a1(p)^n) / #records`.
#[derive(Debug, Clone)]
pub struct NumericalMoments {
    pub ell: u64,
    pub bound: u64,
    /// True when the average runs over `p = 1 mod l^2` only.
    pub restrict: bool,
    pub records_used: usize,
    values: BTreeMap<u32, f64>,
}

impl NumericalMoments {
    pub fn value(&self, n: u32) -> Option<f64> {
        self.values.get(&n).copied()
    }

    pub fn values(&self) -> &BTreeMap<u32, f64> {
        &self.values
    }
}

/// Average `a1^n` over the dataset for `n = 1 ..= n_max`. With
/// `restrict = false` every good prime enters the denominator (the
/// convention under which the second moment is near 1); with
/// `restrict = true` only primes `p = 1 mod l^2` are averaged.
pub fn numerical_moments(
    dataset: &A1Dataset,
    n_max: u32,
    restrict: bool,
) -> Result<NumericalMoments> {
    let filter = if restrict {
        HistFilter::Res1
    } else {
        HistFilter::All
    };
    let a1s: Vec<f64> = dataset.a1_values(filter).map(|(_, a1)| a1).collect();
    if a1s.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut values = BTreeMap::new();
    for n in 1..=n_max {
        let sum: f64 = a1s.iter().map(|&a| a.powi(n as i32)).sum();
        values.insert(n, sum / a1s.len() as f64);
    }
    Ok(NumericalMoments {
        ell: dataset.ell,
        bound: dataset.bound,
        restrict,
        records_used: a1s.len(),
        values,
    })
}

/// Which primes enter a histogram or a restricted average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistFilter {
    /// Every good prime.
    All,
    /// Only `p = 1 mod l^2`.
    Res1,
}

impl HistFilter {
    fn accepts(self, p: u64, modulus: u64) -> bool {
        match self {
            HistFilter::All => true,
            HistFilter::Res1 => p % modulus == 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HistFilter::All => "all",
            HistFilter::Res1 => "res1",
        }
    }
}

/// Binned a1 counts over `[-2g, 2g]`.
#[derive(Debug, Clone)]
pub struct HistogramData {
    pub ell: u64,
    pub filter: HistFilter,
    /// `bins + 1` uniform edges spanning `[-2g, 2g]`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl HistogramData {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Uniform histogram of a1 values over `[-2g, 2g]`; values on the upper
/// edge land in the last bin.
pub fn histogram(dataset: &A1Dataset, bins: usize, filter: HistFilter) -> Result<HistogramData> {
    if bins == 0 {
        return Err(Error::ResourceGuard("bins must be >= 1".into()));
    }
    let params = CurveParams::new(dataset.ell)?;
    let half_width = params.component_count as f64; // 2g
    let lo = -half_width;
    let width = 2.0 * half_width / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u64; bins];
    for (_, a1) in dataset.a1_values(filter) {
        let idx = (((a1 - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    Ok(HistogramData {
        ell: dataset.ell,
        filter,
        edges,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn good_primes_examples() {
        assert_eq!(good_primes(5, 30), [2, 3, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(good_primes(3, 10), [2, 5, 7]);
        assert_eq!(good_primes(5, 2), [2]);
        assert!(good_primes(5, 1).is_empty());
    }

    #[test]
    fn dataset_below_first_split_prime() {
        let (ds, stats) = build_dataset(5, 100, None).unwrap();
        assert_eq!(ds.records.len(), 24);
        assert!(ds.records.iter().all(|r| r.a1() == 0.0));
        assert_eq!(stats.fast_path, 24);
        assert_eq!(stats.computed, 0);
    }

    #[test]
    fn dataset_includes_first_split_prime() {
        let (ds, stats) = build_dataset(5, 101, None).unwrap();
        assert_eq!(stats.computed, 1);
        let nonzero: Vec<u64> = ds
            .records
            .iter()
            .filter(|r| r.method == CountMethod::JacobiTrace)
            .map(|r| r.q)
            .collect();
        assert_eq!(nonzero, [101]);
        let rec = ds.records.iter().find(|r| r.q == 101).unwrap();
        assert_eq!(rec.count, 157); // pinned naive count
    }

    #[test]
    fn warm_cache_skips_all_field_computation() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        let (_, cold) = build_dataset(3, 200, Some(&path)).unwrap();
        assert!(cold.computed > 0);
        let (ds, warm) = build_dataset(3, 200, Some(&path)).unwrap();
        assert_eq!(warm.computed, 0);
        assert_eq!(warm.cache_hits, cold.computed);
        let (ds_nocache, _) = build_dataset(3, 200, None).unwrap();
        assert_eq!(ds.records, ds_nocache.records);
    }

    #[test]
    fn cache_round_trip_is_byte_identical() {
        let dir = tempdir().unwrap();
        let (ds, _) = build_dataset(3, 100, None).unwrap();
        let p1 = dir.path().join("a.csv");
        cache_store(&ds, &p1).unwrap();
        let frag = cache_load(&p1).unwrap();
        assert_eq!(frag.len(), ds.records.len());
        for r in &ds.records {
            assert_eq!(frag[&(3, r.q)], r.count);
        }
        // store a dataset rebuilt from the loaded fragment
        let rebuilt = A1Dataset {
            ell: ds.ell,
            bound: ds.bound,
            records: ds.records.clone(),
        };
        let p2 = dir.path().join("b.csv");
        cache_store(&rebuilt, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn cache_load_empty_and_errors() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cache.csv");

        fs::write(&path, "").unwrap();
        assert!(cache_load(&path).unwrap().is_empty());

        fs::write(&path, "l,p,count\n").unwrap();
        assert!(cache_load(&path).unwrap().is_empty());

        fs::write(&path, "l,p,count\n3,19,14\n3,19,14\n").unwrap();
        assert_eq!(cache_load(&path).unwrap().len(), 1);

        fs::write(&path, "l,p,count\n3,19,14\n3,19,15\n").unwrap();
        match cache_load(&path) {
            Err(Error::CacheConflict { p: 19, a: 14, b: 15, .. }) => {}
            other => panic!("expected conflict, got {other:?}"),
        }

        fs::write(&path, "l,p,count\n3,xx,14\n").unwrap();
        match cache_load(&path) {
            Err(Error::CacheFormat { line: 2, .. }) => {}
            other => panic!("expected format error, got {other:?}"),
        }

        fs::write(&path, "p,l,whatever\n").unwrap();
        match cache_load(&path) {
            Err(Error::CacheFormat { line: 1, .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn conflicting_cache_against_lemma_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        // 7 != 1 mod 9, so count must be 8
        fs::write(&path, "l,p,count\n3,7,9\n").unwrap();
        assert!(matches!(
            build_dataset(3, 10, Some(&path)),
            Err(Error::CacheConflict { p: 7, .. })
        ));
    }

    #[test]
    fn a1_zero_exactly_off_split_primes() {
        let (ds, _) = build_dataset(3, 300, None).unwrap();
        for r in &ds.records {
            if r.q % 9 != 1 {
                assert_eq!(r.a1(), 0.0);
            }
        }
    }

    #[test]
    fn moments_hand_example() {
        // dataset with a1 values {0, 0, x} has M2 = x^2 / 3
        let records = vec![
            PointCountRecord {
                ell: 3,
                q: 2,
                count: 3,
                method: CountMethod::LemmaCongruence,
            },
            PointCountRecord {
                ell: 3,
                q: 5,
                count: 6,
                method: CountMethod::LemmaCongruence,
            },
            PointCountRecord {
                ell: 3,
                q: 19,
                count: 14,
                method: CountMethod::JacobiTrace,
            },
        ];
        let ds = A1Dataset {
            ell: 3,
            bound: 20,
            records,
        };
        let x = (20.0 - 14.0) / (19.0f64).sqrt();
        let m = numerical_moments(&ds, 2, false).unwrap();
        assert!((m.value(2).unwrap() - x * x / 3.0).abs() < 1e-15);
        assert_eq!(m.records_used, 3);

        let restricted = numerical_moments(&ds, 2, true).unwrap();
        assert_eq!(restricted.records_used, 1);
        assert!((restricted.value(2).unwrap() - x * x).abs() < 1e-15);
    }

    #[test]
    fn restricted_and_full_averages_are_consistent() {
        let (ds, _) = build_dataset(3, 500, None).unwrap();
        let full = numerical_moments(&ds, 4, false).unwrap();
        let restricted = numerical_moments(&ds, 4, true).unwrap();
        for n in [2u32, 4] {
            let lhs = full.value(n).unwrap() * full.records_used as f64;
            let rhs = restricted.value(n).unwrap() * restricted.records_used as f64;
            assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn moments_empty_restriction_errors() {
        let (ds, _) = build_dataset(5, 100, None).unwrap();
        assert!(matches!(
            numerical_moments(&ds, 2, true),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn histogram_all_zero_dataset() {
        let (ds, _) = build_dataset(5, 100, None).unwrap();
        let h = histogram(&ds, 3, HistFilter::All).unwrap();
        assert_eq!(h.counts, [0, 24, 0]);
        assert_eq!(h.total(), 24);
        assert_eq!(h.edges.len(), 4);

        // no prime <= 100 is 1 mod 25
        let empty = histogram(&ds, 3, HistFilter::Res1).unwrap();
        assert_eq!(empty.total(), 0);
    }

    #[test]
    fn histogram_total_invariant_under_bin_count() {
        let (ds, _) = build_dataset(3, 400, None).unwrap();
        let t5 = histogram(&ds, 5, HistFilter::All).unwrap().total();
        let t101 = histogram(&ds, 101, HistFilter::All).unwrap().total();
        assert_eq!(t5, t101);
        assert_eq!(t5, ds.records.len() as u64);
    }

    #[test]
    fn parallel_build_matches_serial() {
        let (par, _) = build_dataset(3, 800, None).unwrap();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| build_dataset(3, 800, None).unwrap().0);
        assert_eq!(par.records, serial.records);
    }

    #[test]
    fn bound_guard() {
        assert!(matches!(
            build_dataset(3, DEFAULT_MEMORY_GUARD + 1, None),
            Err(Error::ResourceGuard(_))
        ));
    }
}
