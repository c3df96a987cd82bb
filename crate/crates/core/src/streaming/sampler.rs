use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use crate::error::{domain, Result};
use crate::generators::rng_from_seed;
use crate::graph::ceil_log2;

/// The Mersenne prime `2^61 - 1`; all hashing and fingerprints live mod it.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    let wide = u128::from(a) * u128::from(b);
    let folded = (wide & u128::from(MERSENNE_61)) + (wide >> 61);
    let r = folded as u64;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

/// `a*x + b mod p`: a pairwise-independent hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct LinearHash {
    a: u64,
    b: u64,
}

impl LinearHash {
    fn random<R: Rng>(rng: &mut R) -> Self {
        LinearHash {
            a: rng.gen_range(1..MERSENNE_61),
            b: rng.gen_range(0..MERSENNE_61),
        }
    }

    fn apply(&self, x: u64) -> u64 {
        let r = mul_mod(self.a, x % MERSENNE_61) + self.b;
        if r >= MERSENNE_61 {
            r - MERSENNE_61
        } else {
            r
        }
    }
}

/// Degree-`d - 1` polynomial over `Z_p`: a `d`-wise independent hash.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PolyHash {
    coeffs: Vec<u64>,
}

impl PolyHash {
    fn random<R: Rng>(rng: &mut R, independence: usize) -> Self {
        PolyHash {
            coeffs: (0..independence).map(|_| rng.gen_range(0..MERSENNE_61)).collect(),
        }
    }

    fn apply(&self, x: u64) -> u64 {
        let x = x % MERSENNE_61;
        self.coeffs.iter().fold(0, |acc, &c| {
            let r = mul_mod(acc, x) + c;
            if r >= MERSENNE_61 {
                r - MERSENNE_61
            } else {
                r
            }
        })
    }
}

/// Independence of the level hash. Pairwise independence leaves visible bias
/// on structured supports such as arithmetic progressions.
const LEVEL_INDEPENDENCE: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Repetition {
    level_hash: PolyHash,
    /// Fingerprint base `z`; an index `i` contributes `x_i * z^i`.
    z: u64,
}

/// Shared randomness of a family of samplers: one level hash and one
/// fingerprint base per repetition. Samplers built from the same family are
/// linear in a common sketch space and can be merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashFamily {
    dimension: u64,
    levels: u32,
    reps: Vec<Repetition>,
}

impl HashFamily {
    /// Repetitions: `ceil(log2(1/delta))`; levels: `ceil(log2 m) + 1`.
    pub fn new(dimension: u64, delta: f64, seed: u64) -> Result<Self> {
        if dimension == 0 {
            return Err(domain("sampler dimension must be positive"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(domain(format!(
                "sampler failure probability must be in (0, 1), got {delta}"
            )));
        }
        let reps = ((1.0 / delta).log2().ceil() as usize).max(1);
        let mut rng = rng_from_seed(seed);
        let reps = (0..reps)
            .map(|_| Repetition {
                level_hash: PolyHash::random(&mut rng, LEVEL_INDEPENDENCE),
                z: rng.gen_range(2..MERSENNE_61),
            })
            .collect();
        Ok(HashFamily {
            dimension,
            levels: ceil_log2(dimension) + 1,
            reps,
        })
    }

    pub fn dimension(&self) -> u64 {
        self.dimension
    }

    pub fn repetitions(&self) -> usize {
        self.reps.len()
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Words of a fully allocated sampler: three per detector.
    pub fn worst_case_words(&self) -> u64 {
        3 * self.reps.len() as u64 * u64::from(self.levels)
    }

    /// Level `j` holds the indices whose hash has exactly `j` trailing zeros
    /// (capped at the top level), so it sees about a `2^-(j+1)` fraction.
    fn level_of(&self, rep: usize, index: u64) -> u32 {
        let h = self.reps[rep].level_hash.apply(index);
        h.trailing_zeros().min(self.levels - 1)
    }
}

/// 1-sparse detector: `sum x_i`, `sum x_i * i` and `sum x_i * z^i mod p`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Detector {
    count: i64,
    weighted: i128,
    fingerprint: u64,
}

impl Detector {
    fn add(&mut self, index: u64, delta: i64, z_pow: u64) {
        self.count += delta;
        self.weighted += i128::from(delta) * i128::from(index);
        let scaled = mul_mod(delta.rem_euclid(MERSENNE_61 as i64) as u64, z_pow);
        self.fingerprint = (self.fingerprint + scaled) % MERSENNE_61;
    }

    fn merge(&mut self, other: &Detector) {
        self.count += other.count;
        self.weighted += other.weighted;
        self.fingerprint = (self.fingerprint + other.fingerprint) % MERSENNE_61;
    }

    fn is_zero(&self) -> bool {
        self.count == 0 && self.weighted == 0 && self.fingerprint == 0
    }

    /// The single nonzero index, if the detector holds exactly one.
    fn recover(&self, z: u64, dimension: u64) -> Option<u64> {
        if self.count == 0 || self.weighted % i128::from(self.count) != 0 {
            return None;
        }
        let index = u64::try_from(self.weighted / i128::from(self.count)).ok()?;
        if index >= dimension {
            return None;
        }
        let expected = mul_mod(self.count.rem_euclid(MERSENNE_61 as i64) as u64, pow_mod(z, index));
        (expected == self.fingerprint).then_some(index)
    }
}

/// A linear sketch of a vector in `Z^m` that returns a uniformly random index
/// of its support, or fails with probability at most `delta`.
///
/// Detectors are stored sparsely: only those with nonzero state count
/// towards [`L0Sampler::words`].
#[derive(Clone, Debug)]
pub struct L0Sampler {
    family: Arc<HashFamily>,
    /// `(rep * levels + level, detector)`, sorted by key.
    cells: Vec<(u32, Detector)>,
}

impl L0Sampler {
    pub fn new(dimension: u64, delta: f64, seed: u64) -> Result<Self> {
        Ok(Self::with_family(Arc::new(HashFamily::new(dimension, delta, seed)?)))
    }

    pub fn with_family(family: Arc<HashFamily>) -> Self {
        L0Sampler {
            family,
            cells: Vec::new(),
        }
    }

    pub fn family(&self) -> &Arc<HashFamily> {
        &self.family
    }

    pub fn update(&mut self, index: u64, delta: i64) -> Result<()> {
        if index >= self.family.dimension {
            return Err(domain(format!(
                "sampler index {index} out of range for dimension {}",
                self.family.dimension
            )));
        }
        if delta == 0 {
            return Ok(());
        }
        let levels = self.family.levels;
        for rep in 0..self.family.reps.len() {
            let key = rep as u32 * levels + self.family.level_of(rep, index);
            let z_pow = pow_mod(self.family.reps[rep].z, index);
            let slot = match self.cells.binary_search_by_key(&key, |c| c.0) {
                Ok(i) => i,
                Err(i) => {
                    self.cells.insert(i, (key, Detector::default()));
                    i
                }
            };
            self.cells[slot].1.add(index, delta, z_pow);
            if self.cells[slot].1.is_zero() {
                self.cells.remove(slot);
            }
        }
        Ok(())
    }

    /// Adds another sampler's state; both must share one hash family.
    pub fn merge(&mut self, other: &L0Sampler) -> Result<()> {
        if !Arc::ptr_eq(&self.family, &other.family) && self.family != other.family {
            return Err(domain("cannot merge samplers built from different hash families"));
        }
        let mut merged: BTreeMap<u32, Detector> = self.cells.iter().copied().collect();
        for (key, d) in &other.cells {
            merged.entry(*key).or_default().merge(d);
        }
        self.cells = merged.into_iter().filter(|(_, d)| !d.is_zero()).collect();
        Ok(())
    }

    /// The first repetition holding a 1-sparse level wins; within it, the
    /// lowest such level. `None` means FAIL, which includes an empty support.
    pub fn query(&self) -> Option<u64> {
        let levels = self.family.levels;
        self.cells.iter().find_map(|(key, d)| {
            let rep = (key / levels) as usize;
            d.recover(self.family.reps[rep].z, self.family.dimension)
        })
    }

    /// Whether the sketched vector is identically zero (exact for linear
    /// combinations that cancel, up to fingerprint collisions).
    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    /// Machine words currently allocated: three per live detector.
    pub fn words(&self) -> u64 {
        3 * self.cells.len() as u64
    }
}

impl PartialEq for L0Sampler {
    fn eq(&self, other: &Self) -> bool {
        *self.family == *other.family && self.cells == other.cells
    }
}

/// Recovers one support index per key from a vector whose indices are
/// grouped by key (for example, a vertex's edges grouped by the cluster at
/// the far end). Each of `tables` rows hashes keys into `buckets` samplers;
/// a key is recovered when it sits alone in some bucket. Buckets are
/// allocated on first touch.
#[derive(Clone, Debug)]
pub struct GroupSampler {
    family: Arc<HashFamily>,
    bucket_hashes: Arc<Vec<u64>>,
    buckets: u64,
    cells: BTreeMap<(u32, u64), L0Sampler>,
}

/// Bucket hashes shared by every [`GroupSampler`] of one pass.
#[derive(Clone, Debug)]
pub struct GroupShape {
    family: Arc<HashFamily>,
    bucket_hashes: Arc<Vec<u64>>,
    buckets: u64,
}

impl GroupShape {
    pub fn new(family: Arc<HashFamily>, tables: usize, buckets: u64, seed: u64) -> Result<Self> {
        if tables == 0 || buckets == 0 {
            return Err(domain("group sampler needs at least one table and one bucket"));
        }
        let mut rng = rng_from_seed(seed);
        let hashes = (0..tables)
            .flat_map(|_| {
                let h = LinearHash::random(&mut rng);
                [h.a, h.b]
            })
            .collect();
        Ok(GroupShape {
            family,
            bucket_hashes: Arc::new(hashes),
            buckets,
        })
    }

    pub fn tables(&self) -> usize {
        self.bucket_hashes.len() / 2
    }

    pub fn buckets(&self) -> u64 {
        self.buckets
    }

    pub fn worst_case_words(&self) -> u64 {
        self.tables() as u64 * self.buckets * self.family.worst_case_words()
    }

    pub fn sampler(&self) -> GroupSampler {
        GroupSampler {
            family: Arc::clone(&self.family),
            bucket_hashes: Arc::clone(&self.bucket_hashes),
            buckets: self.buckets,
            cells: BTreeMap::new(),
        }
    }
}

impl GroupSampler {
    pub fn update(&mut self, key: u64, index: u64, delta: i64) -> Result<()> {
        for (t, h) in self.bucket_hashes.chunks_exact(2).enumerate() {
            let bucket = LinearHash { a: h[0], b: h[1] }.apply(key) % self.buckets;
            self.cells
                .entry((t as u32, bucket))
                .or_insert_with(|| L0Sampler::with_family(Arc::clone(&self.family)))
                .update(index, delta)?;
        }
        Ok(())
    }

    /// Every index some bucket returns, sorted and deduplicated.
    pub fn recover(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.cells.values().filter_map(L0Sampler::query).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn words(&self) -> u64 {
        self.cells.values().map(L0Sampler::words).sum()
    }
}
