//! The special multiplicative functions: the generalized divisor function
//! tau_alpha for complex order, the Goldbach singular series and its
//! odd-prime core, and the four summand families profiled in the error lab.

use crate::kahan::KahanSum;
use crate::sieve::{factorize, SpfTable};
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Complex order for tau_alpha and the family exponents. Capped at
/// |alpha| <= 64 as a sanity limit on binomial growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(Complex64);

impl Alpha {
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Domain("alpha must be finite".into()));
        }
        if value.norm() > 64.0 {
            return Err(Error::Domain(format!("|alpha| = {} exceeds cap 64", value.norm())));
        }
        Ok(Alpha(value))
    }

    pub fn real(x: f64) -> Self {
        Alpha::new(Complex64::new(x, 0.0)).expect("finite real alpha")
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// `base^alpha` for positive real base, by the principal branch
/// exp(alpha log base). The base 0 maps to 0 for every alpha in scope.
pub fn cpow_pos(base: f64, alpha: Complex64) -> Complex64 {
    if base == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    debug_assert!(base > 0.0);
    (alpha * base.ln()).exp()
}

/// tau_alpha at a prime power: prod_{l=1..nu} (alpha + l - 1) / l,
/// a running product so no factorial is ever formed.
pub fn tau_alpha_prime_power(alpha: Complex64, nu: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for l in 1..=nu {
        acc *= (alpha + (l - 1) as f64) / l as f64;
    }
    acc
}

/// Generalized divisor function tau_alpha(n), the Dirichlet coefficients
/// of zeta(s)^alpha; multiplicative with tau_alpha(p) = alpha.
pub fn tau_alpha(n: u64, a: Alpha, t: &SpfTable) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (_, e) in factorize(n, t)? {
        acc *= tau_alpha_prime_power(a.value(), e);
    }
    Ok(acc)
}

/// Odd-prime core of the singular series:
/// sfrak(n) = prod_{p | n, p > 2} (p-1)/(p-2). Depends only on the odd
/// prime support of n.
pub fn sfrak(n: u64, t: &SpfTable) -> Result<f64> {
    let mut acc = 1.0;
    for (p, _) in factorize(n, t)? {
        if p > 2 {
            acc *= (p - 1) as f64 / (p - 2) as f64;
        }
    }
    Ok(acc)
}

/// Default prime cutoff for the twin-prime-type constant. The tail of the
/// product is below sum_{p > 1e7} 1/(p-1)^2 < 1e-8.
pub const SFRAK2_DEFAULT_CUTOFF: u64 = 10_000_000;

/// The constant 2 prod_{p>2} (1 - 1/(p-1)^2), truncated at `cutoff`.
/// Returns (value, heuristic tail estimate).
pub fn sfrak2_with_cutoff(cutoff: u64) -> (f64, f64) {
    // Odd-only segmented bit sieve; log-product accumulated per segment,
    // segments folded in index order.
    const SEG: u64 = 1 << 22;
    let root = (cutoff as f64).sqrt() as u64 + 1;
    let base: Vec<u64> = {
        let mut composite = vec![false; root as usize + 1];
        let mut ps = Vec::new();
        for p in 3..=root {
            if !composite[p as usize] {
                ps.push(p);
                let mut m = p * p;
                while m <= root {
                    composite[m as usize] = true;
                    m += p;
                }
            }
        }
        ps
    };
    let n_segs = cutoff / SEG + 1;
    let partials: Vec<f64> = (0..n_segs)
        .into_par_iter()
        .map(|si| {
            let lo = (si * SEG).max(3);
            let hi = ((si + 1) * SEG - 1).min(cutoff);
            if lo > hi {
                return 0.0;
            }
            // mark odd composites in [lo, hi]
            let len = (hi - lo) as usize + 1;
            let mut composite = vec![false; len];
            for &p in &base {
                if p * p > hi {
                    break;
                }
                let mut m = (lo + p - 1) / p * p;
                if m < p * p {
                    m = p * p;
                }
                if m % 2 == 0 {
                    m += p;
                }
                while m <= hi {
                    composite[(m - lo) as usize] = true;
                    m += 2 * p;
                }
            }
            let mut acc = KahanSum::<f64>::new();
            let start = if lo % 2 == 0 { lo + 1 } else { lo };
            let mut n = start;
            while n <= hi {
                if !composite[(n - lo) as usize] {
                    let d = (n - 1) as f64;
                    acc.add((-1.0 / (d * d)).ln_1p());
                }
                n += 2;
            }
            acc.value()
        })
        .collect();
    let mut log_prod = KahanSum::<f64>::new();
    for p in partials {
        log_prod.add(p);
    }
    let value = 2.0 * log_prod.value().exp();
    // tail ~ sum_{p > cutoff} 1/(p-1)^2 ~ 1/(cutoff log cutoff)
    let tail = 2.0 / (cutoff as f64 * (cutoff as f64).ln());
    (value, tail)
}

/// Cached value at the default cutoff.
pub fn sfrak2() -> f64 {
    static CACHE: OnceLock<f64> = OnceLock::new();
    *CACHE.get_or_init(|| sfrak2_with_cutoff(SFRAK2_DEFAULT_CUTOFF).0)
}

/// Goldbach singular series: sfrak2 * sfrak(n) at even n, 0 at odd n.
pub fn sfrak_big(n: u64, t: &SpfTable) -> Result<f64> {
    if n % 2 == 1 {
        // factorize still validates the range
        factorize(n, t)?;
        return Ok(0.0);
    }
    Ok(sfrak2() * sfrak(n, t)?)
}

/// The summand families of the error lab.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyId {
    /// (sigma(n)/n)^alpha
    SigmaRatio,
    /// (n/phi(n))^alpha
    PhiRatio,
    /// (sigma(n)/phi(n))^(alpha/2)
    SigmaOverPhi,
    /// Sfrak(n)^alpha, supported on even n
    Singular,
    /// tau_alpha(n)
    TauAlpha,
    /// phi(n) itself
    PhiRaw,
}

impl FamilyId {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::SigmaRatio => "sigma_ratio",
            FamilyId::PhiRatio => "phi_ratio",
            FamilyId::SigmaOverPhi => "sigma_over_phi",
            FamilyId::Singular => "singular",
            FamilyId::TauAlpha => "tau_alpha",
            FamilyId::PhiRaw => "phi_raw",
        }
    }
}

impl std::str::FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sigma_ratio" => FamilyId::SigmaRatio,
            "phi_ratio" => FamilyId::PhiRatio,
            "sigma_over_phi" => FamilyId::SigmaOverPhi,
            "singular" => FamilyId::Singular,
            "tau_alpha" => FamilyId::TauAlpha,
            "phi_raw" => FamilyId::PhiRaw,
            other => return Err(Error::Usage(format!("unknown family id '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilySpec {
    pub id: FamilyId,
    pub alpha: Alpha,
}

impl FamilySpec {
    pub fn new(id: FamilyId, alpha: Alpha) -> Self {
        FamilySpec { id, alpha }
    }
}

impl std::str::FromStr for FamilySpec {
    type Err = Error;

    /// Grammar: `<id>:alpha=<re>[+<im>i]`, e.g. `sigma_ratio:alpha=0.5+0i`.
    fn from_str(s: &str) -> Result<Self> {
        let (id_str, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("family spec '{s}' missing ':'")))?;
        let id: FamilyId = id_str.parse()?;
        let alpha_str = rest
            .strip_prefix("alpha=")
            .ok_or_else(|| Error::Usage(format!("family spec '{s}' missing 'alpha='")))?;
        let alpha = parse_alpha(alpha_str)?;
        Ok(FamilySpec { id, alpha })
    }
}

/// Parses `<re>[+<im>i]` / `<re>[-<im>i]`.
pub fn parse_alpha(s: &str) -> Result<Alpha> {
    let bad = || Error::Usage(format!("cannot parse alpha '{s}'"));
    if let Some(body) = s.strip_suffix('i') {
        // find the sign splitting re and im, skipping a leading sign
        let mut split = None;
        for (i, c) in body.char_indices().skip(1) {
            if (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E') {
                split = Some(i);
            }
        }
        let i = split.ok_or_else(bad)?;
        let re: f64 = body[..i].parse().map_err(|_| bad())?;
        let sign = if body.as_bytes()[i] == b'-' { -1.0 } else { 1.0 };
        let im: f64 = body[i + 1..].parse().map_err(|_| bad())?;
        Alpha::new(Complex64::new(re, sign * im))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Alpha::new(Complex64::new(re, 0.0))
    }
}

/// Point evaluation of a family summand at n.
pub fn family_value(spec: &FamilySpec, n: u64, t: &SpfTable) -> Result<Complex64> {
    let a = spec.alpha.value();
    let fac = factorize(n, t)?;
    let val = match spec.id {
        FamilyId::SigmaRatio | FamilyId::PhiRatio | FamilyId::SigmaOverPhi => {
            let mut sigma = 1.0f64;
            let mut phi = 1.0f64;
            for &(p, e) in &fac {
                let pe = (p as f64).powi(e as i32);
                sigma *= (pe * p as f64 - 1.0) / (p as f64 - 1.0);
                phi *= pe - pe / p as f64;
            }
            match spec.id {
                FamilyId::SigmaRatio => cpow_pos(sigma / n as f64, a),
                FamilyId::PhiRatio => cpow_pos(n as f64 / phi, a),
                _ => cpow_pos(sigma / phi, a / 2.0),
            }
        }
        FamilyId::Singular => {
            if n % 2 == 1 {
                Complex64::new(0.0, 0.0)
            } else {
                cpow_pos(sfrak2() * sfrak(n, t)?, a)
            }
        }
        FamilyId::TauAlpha => tau_alpha(n, spec.alpha, t)?,
        FamilyId::PhiRaw => {
            let mut phi = 1.0f64;
            for &(p, e) in &fac {
                let pe = (p as f64).powi(e as i32);
                phi *= pe - pe / p as f64;
            }
            Complex64::new(phi, 0.0)
        }
    };
    Ok(val)
}

/// Full table of a family on [1..N], sieved through the spf recurrences
/// where possible and parallelized over fixed chunks.
pub fn family_table(spec: &FamilySpec, limit: u64, t: &SpfTable) -> Result<crate::sieve::FunctionTable> {
    if limit > t.limit() {
        return Err(Error::Domain(format!(
            "family_table: N = {limit} exceeds sieve limit {}",
            t.limit()
        )));
    }
    let a = spec.alpha.value();
    let label = format!("{}:alpha={}", spec.id.name(), a);
    let table = match spec.id {
        FamilyId::SigmaRatio | FamilyId::PhiRatio | FamilyId::SigmaOverPhi | FamilyId::PhiRaw => {
            let phi = crate::sieve::phi_u64(t, limit);
            let sigma = match spec.id {
                FamilyId::PhiRatio | FamilyId::PhiRaw => Vec::new(),
                _ => crate::sieve::sigma_u64(t, limit),
            };
            build_table(limit, label, |n| {
                let i = n as usize;
                match spec.id {
                    FamilyId::SigmaRatio => cpow_pos(sigma[i] as f64 / n as f64, a),
                    FamilyId::PhiRatio => cpow_pos(n as f64 / phi[i] as f64, a),
                    FamilyId::SigmaOverPhi => cpow_pos(sigma[i] as f64 / phi[i] as f64, a / 2.0),
                    _ => Complex64::new(phi[i] as f64, 0.0),
                }
            })
        }
        FamilyId::Singular => {
            let sf = sfrak_table(t, limit);
            let s2 = sfrak2();
            build_table(limit, label, |n| {
                if n % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    cpow_pos(s2 * sf[n as usize], a)
                }
            })
        }
        FamilyId::TauAlpha => build_table(limit, label, |n| {
            let mut acc = Complex64::new(1.0, 0.0);
            let mut m = n;
            while m > 1 {
                let p = t.spf(m);
                let mut e = 0u32;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                acc *= tau_alpha_prime_power(a, e);
            }
            acc
        }),
    };
    Ok(table)
}

fn build_table(
    limit: u64,
    label: String,
    f: impl Fn(u64) -> Complex64 + Sync,
) -> crate::sieve::FunctionTable {
    crate::sieve::FunctionTable::from_fn(limit, label, f)
}

/// sfrak on [0..N] by the spf recurrence.
pub fn sfrak_table(t: &SpfTable, limit: u64) -> Vec<f64> {
    assert!(limit <= t.limit());
    let n = limit as usize;
    let mut sf = vec![0.0f64; n + 1];
    if n >= 1 {
        sf[1] = 1.0;
    }
    for i in 2..=n {
        let p = t.spf(i as u64);
        let m = i / p as usize;
        sf[i] = if p == 2 || m as u64 % p == 0 {
            sf[m]
        } else {
            sf[m] * ((p - 1) as f64 / (p - 2) as f64)
        };
    }
    sf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::{build_spf, mu_i8, sieve_classical, Classical};

    #[test]
    fn tau_alpha_at_primes_is_alpha() {
        let t = build_spf(10_000).unwrap();
        let a = Alpha::new(Complex64::new(0.3, -1.7)).unwrap();
        for p in [2u64, 3, 97, 9973] {
            assert!((tau_alpha(p, a, &t).unwrap() - a.value()).norm() < 1e-15);
        }
        assert_eq!(tau_alpha(1, a, &t).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn tau_two_is_divisor_function() {
        let n = 100_000;
        let t = build_spf(n).unwrap();
        let tau = sieve_classical(Classical::Tau, n, &t).unwrap();
        let two = Alpha::real(2.0);
        for k in 1..=n {
            let v = tau_alpha(k, two, &t).unwrap();
            assert!((v.re - tau.value(k).re).abs() < 1e-9 && v.im == 0.0, "tau_2({k})");
        }
    }

    #[test]
    fn tau_minus_one_is_moebius() {
        let n = 100_000;
        let t = build_spf(n).unwrap();
        let mu = mu_i8(&t, n);
        let neg = Alpha::real(-1.0);
        for k in 1..=n {
            let v = tau_alpha(k, neg, &t).unwrap();
            assert!((v.re - mu[k as usize] as f64).abs() < 1e-12, "tau_-1({k})");
        }
    }

    #[test]
    fn tau_alpha_bounded_by_tau_power() {
        let n = 100_000;
        let t = build_spf(n).unwrap();
        let tau = sieve_classical(Classical::Tau, n, &t).unwrap();
        for a in [Alpha::real(0.5), Alpha::new(Complex64::new(0.0, 1.0)).unwrap(), Alpha::real(3.0)] {
            let cap = 2.0 * a.value().norm();
            for k in 1..=n {
                let lhs = tau_alpha(k, a, &t).unwrap().norm();
                let rhs = tau.value(k).re.powf(cap);
                assert!(lhs <= rhs * (1.0 + 1e-12), "|tau_a({k})| = {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn alpha_cap_enforced() {
        assert!(Alpha::new(Complex64::new(65.0, 0.0)).is_err());
        assert!(Alpha::new(Complex64::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn sfrak_examples() {
        let t = build_spf(1 << 16).unwrap();
        for nu in 1..10 {
            assert_eq!(sfrak(1 << nu, &t).unwrap(), 1.0);
        }
        assert!((sfrak(15, &t).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(sfrak(9, &t).unwrap(), sfrak(3, &t).unwrap());
        assert_eq!(sfrak(3, &t).unwrap(), 2.0);
        assert_eq!(sfrak(1, &t).unwrap(), 1.0);
    }

    #[test]
    fn sfrak_is_support_only_and_multiplicative() {
        let n = 100_000;
        let t = build_spf(n).unwrap();
        let sf = sfrak_table(&t, n);
        for k in 2..=n {
            // rad(k)
            let rad: u64 = factorize(k, &t).unwrap().iter().map(|&(p, _)| p).product();
            assert_eq!(sf[k as usize], sf[rad as usize], "sfrak({k}) vs rad");
            assert!((sf[k as usize] - sfrak(k, &t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_series_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(sfrak_big(7, &t).unwrap(), 0.0);
        let r = sfrak_big(2, &t).unwrap() / sfrak_big(6, &t).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        // sfrak(10) = sfrak(5) = 4/3
        let v = sfrak_big(10, &t).unwrap();
        assert!((v - sfrak2() * 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sfrak2_truncation_converges() {
        let (a, tail_a) = sfrak2_with_cutoff(1_000_000);
        let (b, _) = sfrak2_with_cutoff(10_000_000);
        assert!((a - b).abs() <= tail_a, "|{a} - {b}| > {tail_a}");
        // literature anchor: 2 * twin prime constant = 1.32032363169...
        assert!((b - 1.3203236316937).abs() < 1e-7);
    }

    #[test]
    #[ignore = "slow truncation-convergence oracle at cutoffs 1e8 and 1e9"]
    fn sfrak2_truncation_deep() {
        let (a, _) = sfrak2_with_cutoff(100_000_000);
        let (b, _) = sfrak2_with_cutoff(1_000_000_000);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn family_spec_parsing() {
        let s: FamilySpec = "sigma_ratio:alpha=0.5+0i".parse().unwrap();
        assert_eq!(s.id, FamilyId::SigmaRatio);
        assert_eq!(s.alpha.value(), Complex64::new(0.5, 0.0));
        let s: FamilySpec = "tau_alpha:alpha=-1".parse().unwrap();
        assert_eq!(s.alpha.value(), Complex64::new(-1.0, 0.0));
        let s: FamilySpec = "singular:alpha=1-2i".parse().unwrap();
        assert_eq!(s.alpha.value(), Complex64::new(1.0, -2.0));
        assert!("sigma_ratio".parse::<FamilySpec>().is_err());
        assert!("bogus:alpha=1".parse::<FamilySpec>().is_err());
        assert!("phi_ratio:alpha=99".parse::<FamilySpec>().is_err());
    }

    #[test]
    fn family_point_values() {
        let t = build_spf(1000).unwrap();
        // phi_ratio alpha=0 is identically 1
        let zero = FamilySpec::new(FamilyId::PhiRatio, Alpha::real(0.0));
        for n in 1..=100 {
            assert_eq!(family_value(&zero, n, &t).unwrap(), Complex64::new(1.0, 0.0));
        }
        // sigma_ratio alpha=1 at 6: sigma(6)/6 = 12/6 = 2
        let one = FamilySpec::new(FamilyId::SigmaRatio, Alpha::real(1.0));
        assert!((family_value(&one, 6, &t).unwrap().re - 2.0).abs() < 1e-15);
        // singular alpha=1 at 10: sfrak2 * 4/3
        let sing = FamilySpec::new(FamilyId::Singular, Alpha::real(1.0));
        let v = family_value(&sing, 10, &t).unwrap();
        assert!((v.re - sfrak2() * 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(family_value(&sing, 7, &t).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn family_table_matches_point_evaluator() {
        let t = build_spf(3000).unwrap();
        let alpha = Alpha::new(Complex64::new(0.7, 0.4)).unwrap();
        for id in [
            FamilyId::SigmaRatio,
            FamilyId::PhiRatio,
            FamilyId::SigmaOverPhi,
            FamilyId::Singular,
            FamilyId::TauAlpha,
            FamilyId::PhiRaw,
        ] {
            let spec = FamilySpec::new(id, alpha);
            let tab = family_table(&spec, 3000, &t).unwrap();
            for n in 1..=3000 {
                let p = family_value(&spec, n, &t).unwrap();
                assert!(
                    (tab.value(n) - p).norm() <= 1e-12 * (1.0 + p.norm()),
                    "{id:?} mismatch at {n}"
                );
            }
        }
    }

    #[test]
    fn family_bases_at_least_one_and_modulus_law() {
        use rand::{Rng, SeedableRng};
        let n = 100_000;
        let t = build_spf(n).unwrap();
        let phi = crate::sieve::phi_u64(&t, n);
        let sigma = crate::sieve::sigma_u64(&t, n);
        let a = Complex64::new(0.8, 1.3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let k = rng.gen_range(1..=n);
            let i = k as usize;
            for base in [
                sigma[i] as f64 / k as f64,
                k as f64 / phi[i] as f64,
                sigma[i] as f64 / phi[i] as f64,
            ] {
                assert!(base >= 1.0, "base < 1 at n = {k}");
                let z = cpow_pos(base, a);
                assert!((z.norm() - base.powf(a.re)).abs() <= 1e-9 * base.powf(a.re));
            }
        }
    }

    #[test]
    fn tau_convolution_law() {
        // tau_a * tau_b = tau_{a+b} on [1, 1e4]
        let n = 10_000;
        let t = build_spf(n).unwrap();
        let pairs = [
            (Alpha::real(1.0), Alpha::real(-1.0)),
            (Alpha::real(0.5), Alpha::real(0.5)),
            (
                Alpha::new(Complex64::new(0.0, 1.0)).unwrap(),
                Alpha::real(1.0),
            ),
        ];
        for (a, b) in pairs {
            let fa = family_table(&FamilySpec::new(FamilyId::TauAlpha, a), n, &t).unwrap();
            let fb = family_table(&FamilySpec::new(FamilyId::TauAlpha, b), n, &t).unwrap();
            let ab = Alpha::new(a.value() + b.value()).unwrap();
            let fab = family_table(&FamilySpec::new(FamilyId::TauAlpha, ab), n, &t).unwrap();
            let conv = crate::sieve::dirichlet_convolve(&fa, &fb).unwrap();
            for k in 1..=n {
                let want = fab.value(k);
                assert!(
                    (conv.value(k) - want).norm() <= 1e-9 * (1.0 + want.norm()),
                    "convolution law fails at {k} for ({:?}, {:?})",
                    a.value(),
                    b.value()
                );
            }
        }
    }
}
