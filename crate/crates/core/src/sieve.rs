//! Segmented sieves and tables of the classical arithmetic functions.
//!
//! [`SpfTable`] stores the smallest prime factor of every integer up to a
//! limit, which gives O(log n) factorization for anything covered by the
//! sieve. All tables are immutable after construction and safe to share
//! across threads; construction parallelizes over segments with
//! schedule-independent output.

use crate::kahan::KahanComplex;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::{Read, Write};
use std::path::Path;

/// Default segment length for sieve construction. A memory/locality knob,
/// not a correctness parameter.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

/// Sentinel for `p_min(1) = +infinity`.
pub const PMIN_INFINITY: u64 = u64::MAX;

/// Smallest-prime-factor table over `[2..N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpfTable {
    limit: u64,
    /// Indexed by n; entries 0 and 1 are unused (zero).
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, 2 <= n <= limit.
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        debug_assert!(n >= 2 && n <= self.limit);
        self.spf[n as usize] as u64
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }

    /// Smallest prime factor with the convention `p_min(1) = +infinity`
    /// (represented by [`PMIN_INFINITY`]).
    #[inline]
    pub fn p_min(&self, n: u64) -> u64 {
        if n == 1 {
            PMIN_INFINITY
        } else {
            self.spf(n)
        }
    }

    /// Largest prime factor by repeated division, with `p_max(1) = 1`.
    pub fn p_max(&self, n: u64) -> u64 {
        let mut n = n;
        let mut best = 1;
        while n > 1 {
            let p = self.spf(n);
            best = p;
            while n % p == 0 {
                n /= p;
            }
        }
        best
    }
}

/// Builds the smallest-prime-factor table for `[2..n]` with the default
/// segment length. Memory is 4 bytes per integer, so N = 10^8 needs ~400 MB.
pub fn build_spf(limit: u64) -> Result<SpfTable> {
    build_spf_with_segment(limit, DEFAULT_SEGMENT)
}

pub fn build_spf_with_segment(limit: u64, segment: usize) -> Result<SpfTable> {
    if limit < 2 {
        return Err(Error::Domain(format!("build_spf requires N >= 2, got {limit}")));
    }
    let segment = segment.max(1 << 10);
    let n = limit as usize;
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = small_primes(root);

    let mut spf = vec![0u32; n + 1];
    // Segments are disjoint slices, so writes never race and the result is
    // independent of the parallel schedule.
    spf[2..].par_chunks_mut(segment).enumerate().for_each(|(ci, chunk)| {
        let lo = 2 + ci * segment; // absolute index of chunk[0]
        let hi = lo + chunk.len(); // exclusive
        for &p in &base {
            let p = p as usize;
            if p * p >= hi {
                break;
            }
            let mut m = (lo + p - 1) / p * p;
            if m < p * p {
                m = p * p;
            }
            while m < hi {
                let slot = &mut chunk[m - lo];
                if *slot == 0 {
                    *slot = p as u32;
                }
                m += p;
            }
        }
        for (i, slot) in chunk.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = (lo + i) as u32;
            }
        }
    });

    Ok(SpfTable { limit, spf })
}

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Factorization `n = prod p_i^{e_i}` with strictly increasing primes.
/// `n = 1` yields the empty list.
pub fn factorize(n: u64, t: &SpfTable) -> Result<Vec<(u64, u32)>> {
    if n < 1 || n > t.limit() {
        return Err(Error::Domain(format!(
            "factorize: n = {n} outside [1, {}]",
            t.limit()
        )));
    }
    let mut out = Vec::new();
    let mut m = n;
    while m > 1 {
        let p = t.spf(m);
        let mut e = 0u32;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        out.push((p, e));
    }
    Ok(out)
}

/// Ascending primes up to `limit` by a standalone odd-only sieve, for uses
/// that do not need the full factor table (Euler products, constants).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n / 2 + 1]; // index i <-> odd 2i+1
    let mut primes = vec![2u64];
    let mut p = 3usize;
    while p * p <= n {
        if !composite[p / 2] {
            let mut m = p * p;
            while m <= n {
                composite[m / 2] = true;
                m += 2 * p;
            }
        }
        p += 2;
    }
    let mut q = 3usize;
    while q <= n {
        if !composite[q / 2] {
            primes.push(q as u64);
        }
        q += 2;
    }
    primes
}

/// Ascending list of all primes up to `limit`.
#[derive(Debug, Clone)]
pub struct PrimeList {
    pub limit: u64,
    pub primes: Vec<u64>,
}

impl PrimeList {
    pub fn from_spf(t: &SpfTable) -> Self {
        let primes = (2..=t.limit()).filter(|&n| t.is_prime(n)).collect();
        PrimeList {
            limit: t.limit(),
            primes,
        }
    }

    /// Primes in the half-open interval `(lo, hi]`.
    pub fn in_window(&self, lo: f64, hi: f64) -> &[u64] {
        let a = self.primes.partition_point(|&p| p as f64 <= lo);
        let b = self.primes.partition_point(|&p| p as f64 <= hi);
        &self.primes[a..b]
    }
}

/// Table of complex values of an arithmetic function on `[1..N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionTable {
    limit: u64,
    /// Indexed by n, entry 0 unused.
    values: Vec<Complex64>,
    label: String,
}

impl FunctionTable {
    pub fn new(limit: u64, values: Vec<Complex64>, label: impl Into<String>) -> Self {
        assert_eq!(values.len() as u64, limit + 1, "values must cover [0..N]");
        FunctionTable {
            limit,
            values,
            label: label.into(),
        }
    }

    /// Builds a table by evaluating `f(n)` for every n in `[1..N]`,
    /// parallelizing over fixed chunks.
    pub fn from_fn(limit: u64, label: impl Into<String>, f: impl Fn(u64) -> Complex64 + Sync) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); limit as usize + 1];
        values[1..]
            .par_chunks_mut(1 << 16)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let lo = 1 + ci * (1 << 16);
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = f((lo + i) as u64);
                }
            });
        FunctionTable::new(limit, values, label)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        debug_assert!(n >= 1 && n <= self.limit);
        self.values[n as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Binary cache dump: magic, version, N, label, then little-endian
    /// 16-byte complex entries for n = 1..N. Round-trips bit-exactly.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&self.limit.to_le_bytes())?;
        let label = self.label.as_bytes();
        w.write_all(&(label.len() as u32).to_le_bytes())?;
        w.write_all(label)?;
        for z in &self.values[1..] {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<FunctionTable> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::CacheFormat("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != 1 {
            return Err(Error::CacheFormat("unsupported version".into()));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let limit = u64::from_le_bytes(b8);
        r.read_exact(&mut b4)?;
        let label_len = u32::from_le_bytes(b4) as usize;
        if label_len > 1 << 16 {
            return Err(Error::CacheFormat("label too long".into()));
        }
        let mut label = vec![0u8; label_len];
        r.read_exact(&mut label)?;
        let label =
            String::from_utf8(label).map_err(|_| Error::CacheFormat("label not utf-8".into()))?;
        let mut values = vec![Complex64::new(0.0, 0.0); limit as usize + 1];
        for slot in values[1..].iter_mut() {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            *slot = Complex64::new(re, im);
        }
        Ok(FunctionTable::new(limit, values, label))
    }
}

const MAGIC: &[u8; 4] = b"NTFT";

/// The classical arithmetic functions available from [`sieve_classical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classical {
    Phi,
    Sigma,
    Mu,
    /// Von Mangoldt.
    Lambda,
    Tau,
    Omega,
    BigOmega,
}

impl std::str::FromStr for Classical {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "phi" => Classical::Phi,
            "sigma" => Classical::Sigma,
            "mu" => Classical::Mu,
            "lambda" => Classical::Lambda,
            "tau" => Classical::Tau,
            "omega" => Classical::Omega,
            "bigomega" => Classical::BigOmega,
            other => return Err(Error::Usage(format!("unknown function name '{other}'"))),
        })
    }
}

/// Euler totient on `[0..N]` by the smallest-prime-factor recurrence.
pub fn phi_u64(t: &SpfTable, limit: u64) -> Vec<u64> {
    assert!(limit <= t.limit());
    let n = limit as usize;
    let mut phi = vec![0u64; n + 1];
    if n >= 1 {
        phi[1] = 1;
    }
    for i in 2..=n {
        let p = t.spf(i as u64) as usize;
        let m = i / p;
        phi[i] = if m % p == 0 {
            phi[m] * p as u64
        } else {
            phi[m] * (p as u64 - 1)
        };
    }
    phi
}

/// Divisor-sum function sigma on `[0..N]`.
pub fn sigma_u64(t: &SpfTable, limit: u64) -> Vec<u64> {
    assert!(limit <= t.limit());
    let n = limit as usize;
    let mut sigma = vec![0u64; n + 1];
    // pk[i]: the spf(i)-power part of i.
    let mut pk = vec![0u32; n + 1];
    if n >= 1 {
        sigma[1] = 1;
        pk[1] = 1;
    }
    for i in 2..=n {
        let p = t.spf(i as u64) as usize;
        let m = i / p;
        pk[i] = if m % p == 0 { pk[m] * p as u32 } else { p as u32 };
        let pp = pk[i] as u64;
        let rest = i as u64 / pp;
        // sigma(p^e) = (p^{e+1} - 1)/(p - 1)
        let sig_pp = (pp * p as u64 - 1) / (p as u64 - 1);
        sigma[i] = sigma[rest as usize] * sig_pp;
    }
    sigma
}

/// Moebius function on `[0..N]`.
pub fn mu_i8(t: &SpfTable, limit: u64) -> Vec<i8> {
    assert!(limit <= t.limit());
    let n = limit as usize;
    let mut mu = vec![0i8; n + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    for i in 2..=n {
        let p = t.spf(i as u64) as usize;
        let m = i / p;
        mu[i] = if m % p == 0 { 0 } else { -mu[m] };
    }
    mu
}

/// Table of a classical function as complex values. Integer-valued
/// functions are produced by integer arithmetic and then widened.
pub fn sieve_classical(name: Classical, limit: u64, t: &SpfTable) -> Result<FunctionTable> {
    if limit < 1 {
        return Err(Error::Domain("sieve_classical requires N >= 1".into()));
    }
    if limit > t.limit() {
        return Err(Error::Domain(format!(
            "sieve_classical: N = {limit} exceeds sieve limit {}",
            t.limit()
        )));
    }
    let n = limit as usize;
    let real = |v: f64| Complex64::new(v, 0.0);
    let mut values = vec![Complex64::new(0.0, 0.0); n + 1];
    match name {
        Classical::Phi => {
            for (i, &v) in phi_u64(t, limit).iter().enumerate().skip(1) {
                values[i] = real(v as f64);
            }
        }
        Classical::Sigma => {
            for (i, &v) in sigma_u64(t, limit).iter().enumerate().skip(1) {
                values[i] = real(v as f64);
            }
        }
        Classical::Mu => {
            for (i, &v) in mu_i8(t, limit).iter().enumerate().skip(1) {
                values[i] = real(v as f64);
            }
        }
        Classical::Lambda => {
            // Lambda(n) = log p when n = p^nu, else 0; values[1] = 0.
            for i in 2..=n {
                let p = t.spf(i as u64);
                let mut m = i as u64;
                while m % p == 0 {
                    m /= p;
                }
                if m == 1 {
                    values[i] = real((p as f64).ln());
                }
            }
        }
        Classical::Tau | Classical::Omega | Classical::BigOmega => {
            if n >= 1 {
                values[1] = match name {
                    Classical::Tau => real(1.0),
                    _ => real(0.0),
                };
            }
            let mut tau = vec![0u64; n + 1];
            let mut expo = vec![0u8; n + 1];
            let mut omega = vec![0u32; n + 1];
            let mut big = vec![0u32; n + 1];
            let mut pk = vec![0u64; n + 1];
            if n >= 1 {
                tau[1] = 1;
                pk[1] = 1;
            }
            for i in 2..=n {
                let p = t.spf(i as u64) as usize;
                let m = i / p;
                if m % p == 0 {
                    expo[i] = expo[m] + 1;
                    pk[i] = pk[m] * p as u64;
                    omega[i] = omega[m];
                } else {
                    expo[i] = 1;
                    pk[i] = p as u64;
                    omega[i] = omega[m] + 1;
                }
                big[i] = big[m] + 1;
                let rest = i as u64 / pk[i];
                tau[i] = tau[rest as usize] * (expo[i] as u64 + 1);
                values[i] = match name {
                    Classical::Tau => real(tau[i] as f64),
                    Classical::Omega => real(omega[i] as f64),
                    _ => real(big[i] as f64),
                };
            }
        }
    }
    let label = format!("{name:?}").to_lowercase();
    Ok(FunctionTable::new(limit, values, label))
}

/// Dirichlet convolution `(f * g)[n] = sum_{d|n} f[d] g[n/d]` by the
/// divisor-loop method, O(N log N).
pub fn dirichlet_convolve(f: &FunctionTable, g: &FunctionTable) -> Result<FunctionTable> {
    if f.limit() != g.limit() {
        return Err(Error::Domain(format!(
            "dirichlet_convolve: mismatched limits {} vs {}",
            f.limit(),
            g.limit()
        )));
    }
    let n = f.limit() as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    for d in 1..=n {
        let fd = f.value(d as u64);
        if fd.re == 0.0 && fd.im == 0.0 {
            continue;
        }
        for k in 1..=(n / d) {
            out[d * k] += fd * g.value(k as u64);
        }
    }
    let label = format!("{}*{}", f.label(), g.label());
    Ok(FunctionTable::new(f.limit(), out, label))
}

/// Streaming prefix sums of `f(n)` at ascending checkpoints.
pub fn prefix_sums_at(
    limit: u64,
    checkpoints: &[f64],
    f: impl Fn(u64) -> Complex64,
) -> Result<Vec<(f64, Complex64)>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("checkpoints must be strictly ascending".into()));
    }
    if let Some(&last) = checkpoints.last() {
        if last.floor() as u64 > limit {
            return Err(Error::Domain(format!(
                "checkpoint {last} exceeds table limit {limit}"
            )));
        }
    }
    let mut acc = KahanComplex::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut n = 1u64;
    for &x in checkpoints {
        let hi = x.floor() as u64;
        while n <= hi {
            acc.add(f(n));
            n += 1;
        }
        out.push((x, acc.value()));
    }
    Ok(out)
}
