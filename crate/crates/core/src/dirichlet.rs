//! Dirichlet-series machinery: local Euler factors of the convolution
//! decomposition v = tau_alpha * b behind each summand family, truncated
//! Euler products for the correction factor f(s), and extraction of the
//! main-term coefficients (linear part and log-power polynomial) by
//! least-squares fitting or by a Selberg--Delange-shaped candidate formula.
//!
//! The analytic frame: each family's summand a(n) satisfies
//! a(n) = sum_{m | n} v(m)/m with v multiplicative, and
//! sum v(n) n^{-s} = zeta(s)^alpha f(s) with f(s) = sum b(n) n^{-s}
//! absolutely convergent past the line sigma = 1. Then
//! sum_{n<=x} a(n) = zeta(2)^alpha f(2) x + sum_r A_r (log x)^{alpha-r} + osc.

use crate::families::{cpow_pos, tau_alpha_prime_power, Alpha, FamilyId, FamilySpec};
use crate::kahan::KahanSum;
use crate::sieve::primes_up_to;
use crate::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

// ---------------------------------------------------------------------------
// Scalar special functions
// ---------------------------------------------------------------------------

/// Bernoulli numbers B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta for real s > 1 by Euler--Maclaurin; absolute error below
/// 1e-12 throughout s in (1, 60].
pub fn zeta_em(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::Domain(format!("zeta_em: s = {s} not > 1")));
    }
    const N: u64 = 25;
    let mut sum = KahanSum::<f64>::new();
    for n in 1..N {
        sum.add((n as f64).powf(-s));
    }
    let nf = N as f64;
    sum.add(nf.powf(1.0 - s) / (s - 1.0));
    sum.add(0.5 * nf.powf(-s));
    // correction terms B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
    let mut rising = s; // product s(s+1)...(s+2k-2), seeded at k=1
    let mut fact = 2.0f64; // (2k)!
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = k + 1;
        sum.add(b / fact * rising * nf.powf(-s - 2.0 * k as f64 + 1.0));
        rising *= (s + 2.0 * k as f64 - 1.0) * (s + 2.0 * k as f64);
        fact *= (2.0 * k as f64 + 1.0) * (2.0 * k as f64 + 2.0);
    }
    Ok(sum.value())
}

/// Stieltjes constants gamma_0..gamma_7 (literature values; gamma_0 is
/// the Euler--Mascheroni constant).
const STIELTJES: [f64; 8] = [
    0.577_215_664_901_532_9,
    -0.072_815_845_483_676_72,
    -0.009_690_363_192_872_318,
    0.002_053_834_420_303_346,
    0.002_325_370_065_467_3,
    0.000_793_323_817_301_062_7,
    -0.000_238_769_345_430_199_6,
    -0.000_527_289_567_057_751,
];

/// (s-1) * zeta(s) near s = 1 via the Stieltjes expansion
/// 1 + sum_k (-1)^k gamma_k (s-1)^{k+1} / k!. Accurate to ~|s-1|^9.
pub fn zeta_completed_near_one(s: f64) -> f64 {
    let d = s - 1.0;
    let mut acc = KahanSum::<f64>::new();
    acc.add(1.0);
    let mut dk = d; // (s-1)^{k+1}
    let mut sign_over_fact = 1.0; // (-1)^k / k!
    for (k, g) in STIELTJES.iter().enumerate() {
        acc.add(sign_over_fact * g * dk);
        dk *= d;
        sign_over_fact *= -1.0 / (k as f64 + 1.0);
    }
    acc.value()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Complex gamma function by the Lanczos approximation (g = 7, n = 9),
/// with the reflection formula for Re z < 1/2. Relative error ~1e-13.
pub fn gamma_lanczos(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let pi = std::f64::consts::PI;
        return pi / ((pi * z).sin() * gamma_lanczos(Complex64::new(1.0, 0.0) - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    let sqrt_two_pi = (2.0 * std::f64::consts::PI).sqrt();
    sqrt_two_pi * t.powc(z + 0.5) * (-t).exp() * x
}

// ---------------------------------------------------------------------------
// Local factors
// ---------------------------------------------------------------------------

/// Coefficients of a local Dirichlet polynomial sum_nu c_nu p^{-nu s}
/// at one prime, truncated at order K.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFactor {
    pub p: u64,
    /// c_0 = 1 always; length K + 1.
    pub coeffs: Vec<Complex64>,
}

impl LocalFactor {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value of the truncated local polynomial at real s.
    pub fn eval(&self, s: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let w = (self.p as f64).powf(-s);
        for &c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc
    }
}

fn check_prime(p: u64) -> Result<()> {
    let composite = p < 2 || (p > 2 && p % 2 == 0) || {
        let mut d = 3u64;
        let mut hit = false;
        while d * d <= p {
            if p % d == 0 {
                hit = true;
                break;
            }
            d += 2;
        }
        hit
    };
    if composite {
        return Err(Error::Domain(format!("p = {p} is not prime")));
    }
    Ok(())
}

fn check_order(k: usize) -> Result<()> {
    if !(2..=64).contains(&k) {
        return Err(Error::Usage(format!("truncation order K = {k} outside [2, 64]")));
    }
    Ok(())
}

/// The family's base value a(p^nu) (with a(1) = 1). For the singular
/// family this is the odd-prime core, the factor-2 normalization living
/// in the summatory layer.
pub fn family_prime_power(spec: &FamilySpec, p: u64, nu: u32) -> Complex64 {
    if nu == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let a = spec.alpha.value();
    let pf = p as f64;
    match spec.id {
        FamilyId::SigmaRatio => {
            // sigma(p^nu)/p^nu = 1 + 1/p + ... + 1/p^nu
            let mut base = 0.0;
            for j in 0..=nu {
                base += pf.powi(-(j as i32));
            }
            cpow_pos(base, a)
        }
        FamilyId::PhiRatio => cpow_pos(pf / (pf - 1.0), a),
        FamilyId::SigmaOverPhi => {
            let sigma = (pf.powi(nu as i32 + 1) - 1.0) / (pf - 1.0);
            let phi = pf.powi(nu as i32) - pf.powi(nu as i32 - 1);
            cpow_pos(sigma / phi, a / 2.0)
        }
        FamilyId::Singular => {
            if p == 2 {
                Complex64::new(1.0, 0.0)
            } else {
                cpow_pos((pf - 1.0) / (pf - 2.0), a)
            }
        }
        FamilyId::PhiRaw => Complex64::new(1.0 - 1.0 / pf, 0.0),
        FamilyId::TauAlpha => unreachable!("tau_alpha handled by direct local values"),
    }
}

/// The zeta-power order of the family's Dirichlet series: the family's
/// own alpha, except phi_raw whose normalized summand phi(n)/n has the
/// Moebius function as its v, i.e. order -1.
pub fn zeta_order(spec: &FamilySpec) -> Complex64 {
    match spec.id {
        FamilyId::PhiRaw => Complex64::new(-1.0, 0.0),
        _ => spec.alpha.value(),
    }
}

/// Local factor of v at p, with c_nu = v(p^nu)/p^nu. For the divisor-sum
/// families this is the difference a(p^nu) - a(p^{nu-1}); the tau_alpha
/// family is its own v.
pub fn local_factor_of_family(spec: &FamilySpec, p: u64, k: usize) -> Result<LocalFactor> {
    check_prime(p)?;
    check_order(k)?;
    let mut coeffs = Vec::with_capacity(k + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    if spec.id == FamilyId::TauAlpha {
        let a = spec.alpha.value();
        for nu in 1..=k as u32 {
            coeffs.push(tau_alpha_prime_power(a, nu) / (p as f64).powi(nu as i32));
        }
    } else {
        let mut prev = Complex64::new(1.0, 0.0);
        for nu in 1..=k as u32 {
            let cur = family_prime_power(spec, p, nu);
            coeffs.push(cur - prev);
            prev = cur;
        }
    }
    Ok(LocalFactor { p, coeffs })
}

/// Local factor of b = tau_{-alpha} * v at p, stored unnormalized:
/// coefficient nu is b(p^nu) = sum_{i+j=nu} tau_{-alpha}(p^i) v(p^j).
pub fn b_local_factor(spec: &FamilySpec, a: Alpha, p: u64, k: usize) -> Result<LocalFactor> {
    let v = local_factor_of_family(spec, p, k)?;
    let neg = -zeta_order(&FamilySpec::new(spec.id, a));
    let pf = p as f64;
    let mut coeffs = Vec::with_capacity(k + 1);
    for nu in 0..=k {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=nu {
            // v(p^j) = c_j * p^j
            acc += tau_alpha_prime_power(neg, (nu - j) as u32) * v.coeffs[j] * pf.powi(j as i32);
        }
        coeffs.push(acc);
    }
    debug_assert!((coeffs[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    coeffs[0] = Complex64::new(1.0, 0.0);
    Ok(LocalFactor { p, coeffs })
}

// ---------------------------------------------------------------------------
// Euler products
// ---------------------------------------------------------------------------

/// Truncation order making the local tail negligible at this prime.
fn adaptive_order(p: u64, s: f64) -> usize {
    let mut k = 2usize;
    let lp = (p as f64).ln();
    while k < 64 && ((k + 1) as f64).ln() * 3.0 - (k as f64 + 1.0) * s * lp > -42.0 {
        k += 1;
    }
    k
}

/// Truncated Euler product f(s) = prod_{p <= P_max} sum_nu b(p^nu) p^{-nu s}
/// over a precomputed ascending prime list. Returns (value, heuristic tail
/// estimate, max over primes of |b(p)| * p).
fn euler_product_over(
    spec: &FamilySpec,
    a: Alpha,
    s: f64,
    primes: &[u64],
) -> Result<(Complex64, f64, f64)> {
    const BLOCK: usize = 4096;
    let partials: Vec<Result<(Complex64, f64)>> = primes
        .par_chunks(BLOCK)
        .map(|block| {
            let mut prod = Complex64::new(1.0, 0.0);
            let mut cmax = 0.0f64;
            for &p in block {
                let k = adaptive_order(p, s);
                let b = b_local_factor(spec, a, p, k)?;
                prod *= b.eval(s);
                cmax = cmax.max(b.coeffs[1].norm() * p as f64);
            }
            Ok((prod, cmax))
        })
        .collect();
    let mut value = Complex64::new(1.0, 0.0);
    let mut cmax = 0.0f64;
    for r in partials {
        let (prod, c) = r?;
        value *= prod;
        cmax = cmax.max(c);
    }
    let pm = *primes.last().unwrap_or(&2) as f64;
    // sum_{p > P} |b(p)| p^{-s} <~ cmax * P^{-s} / (s log P); factor 3 slack.
    let tail = 3.0 * cmax.max(1e-3) * pm.powf(-s) / (s * pm.ln()) * value.norm().max(1.0);
    Ok((value, tail, cmax))
}

/// Truncated Euler product of the correction factor f at real s, with a
/// heuristic tail estimate. Requires s >= 0.75 (margin inside the
/// convergence half-plane sigma > 1/2) and P_max >= 10^3.
pub fn euler_product(spec: &FamilySpec, a: Alpha, s: f64, p_max: u64) -> Result<(Complex64, f64)> {
    if !(s >= 0.75) {
        return Err(Error::Domain(format!("euler_product: s = {s} below 0.75")));
    }
    if p_max < 1000 {
        return Err(Error::Domain(format!("euler_product: P_max = {p_max} below 1e3")));
    }
    let primes = primes_up_to(p_max);
    let (v, tail, _) = euler_product_over(spec, a, s, &primes)?;
    Ok((v, tail))
}

// ---------------------------------------------------------------------------
// Main-term coefficients
// ---------------------------------------------------------------------------

/// Coefficients of the main term: `linear` multiplies x, `logpoly[r]`
/// multiplies (log x)^{alpha - r} for r = 0..R with R = floor(Re alpha)
/// (empty when Re alpha < 0). `alpha` here is the zeta-power order.
#[derive(Debug, Clone, PartialEq)]
pub struct MainTermCoeffs {
    pub alpha: Complex64,
    pub linear: Complex64,
    pub logpoly: Vec<Complex64>,
}

impl MainTermCoeffs {
    pub fn log_degree(alpha: Complex64) -> i64 {
        if alpha.re >= 0.0 {
            alpha.re.floor() as i64
        } else {
            -1
        }
    }

    /// Value of the full main term at x.
    pub fn eval(&self, x: f64) -> Complex64 {
        let lx = x.ln();
        let mut acc = self.linear * x;
        for (r, &c) in self.logpoly.iter().enumerate() {
            acc += c * cpow_pos(lx, self.alpha - r as f64);
        }
        acc
    }
}

/// Fit output: coefficients plus conditioning and residual diagnostics.
/// `constant` is the fitted pure-constant term; when alpha is a
/// non-negative integer the last log power is itself constant, so the two
/// merge and `constant` repeats the merged value.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coeffs: MainTermCoeffs,
    pub constant: Complex64,
    pub condition: f64,
    pub rms_residual: f64,
}

/// Geometric abscissa grid for main-term fits: 40 points from 10^3 to
/// x_max, rounded to integers and deduplicated.
pub fn fit_grid(x_max: f64) -> Vec<u64> {
    assert!(x_max >= 2e3, "fit grid needs x_max well above 1e3");
    let n = 40;
    let ratio = (x_max / 1e3).powf(1.0 / (n - 1) as f64);
    let mut xs: Vec<u64> = (0..n).map(|i| (1e3 * ratio.powi(i)).round() as u64).collect();
    xs.dedup();
    xs
}

/// One fit observation. `value` is either the raw summatory value S(x)
/// at `center`, or the mean of S over a window around `center`; in the
/// averaged case `x_mean` carries the matching window mean of x so the
/// linear basis column stays exact.
#[derive(Debug, Clone, Copy)]
pub struct FitSample {
    pub center: u64,
    pub x_mean: f64,
    pub value: Complex64,
}

impl FitSample {
    pub fn raw(x: u64, value: Complex64) -> Self {
        FitSample { center: x, x_mean: x as f64, value }
    }
}

/// Half-width, relative to the center, of the averaging windows used by
/// [`averaged_samples`]. Averaging over a +-10% window suppresses the
/// sawtooth oscillation of the summatory function, which otherwise drowns
/// the (log x)-coefficients at desk scale.
pub const AVG_WINDOW: f64 = 0.1;

/// Summatory samples for fitting: the running sum of `f` is averaged over
/// the window [0.9 c, 1.1 c] around each grid center c. One sequential
/// streaming pass, compensated accumulation.
pub fn averaged_samples(x_max: u64, f: impl Fn(u64) -> Complex64) -> Vec<FitSample> {
    let centers = fit_grid(x_max as f64 / (1.0 + AVG_WINDOW));
    let windows: Vec<(u64, u64)> = centers
        .iter()
        .map(|&c| {
            let a = ((c as f64) * (1.0 - AVG_WINDOW)).ceil() as u64;
            let b = ((c as f64) * (1.0 + AVG_WINDOW)).floor() as u64;
            (a.max(1), b)
        })
        .collect();
    let hi = windows.last().map(|&(_, b)| b).unwrap_or(0);
    let mut running = crate::kahan::KahanComplex::new();
    let mut acc_s = vec![crate::kahan::KahanComplex::new(); windows.len()];
    let mut acc_x = vec![crate::kahan::KahanSum::<f64>::new(); windows.len()];
    let mut counts = vec![0u64; windows.len()];
    let mut wi = 0usize; // first window whose end is not yet passed
    for n in 1..=hi {
        running.add(f(n));
        while wi < windows.len() && windows[wi].1 < n {
            wi += 1;
        }
        for (j, &(a, b)) in windows.iter().enumerate().skip(wi) {
            if a > n {
                break;
            }
            if n <= b {
                acc_s[j].add(running.value());
                acc_x[j].add(n as f64);
                counts[j] += 1;
            }
        }
    }
    centers
        .iter()
        .zip(windows.iter().enumerate())
        .map(|(&c, (j, _))| {
            let k = counts[j] as f64;
            FitSample {
                center: c,
                x_mean: acc_x[j].value() / k,
                value: acc_s[j].value() / k,
            }
        })
        .collect()
}

/// Weighted least squares of summatory samples against the basis
/// {x} + {(log x)^{alpha-r}} + {1}, weights 1/x. Errors out when the
/// design matrix has condition number above 1e12.
pub fn main_term_fit(spec: &FamilySpec, samples: &[FitSample]) -> Result<FitResult> {
    let alpha = zeta_order(spec);
    let deg = MainTermCoeffs::log_degree(alpha);
    // basis exponents for the log columns, skipping an exponent that
    // degenerates to the constant column
    let exps: Vec<Complex64> = (0..=deg.max(-1))
        .map(|r| alpha - r as f64)
        .filter(|e| e.norm() > 1e-12)
        .collect();
    let ncols = 2 + exps.len();
    if samples.len() < ncols + 2 {
        return Err(Error::Usage(format!(
            "fit needs at least {} samples, got {}",
            ncols + 2,
            samples.len()
        )));
    }
    let m = samples.len();
    let mut a = DMatrix::<Complex<f64>>::zeros(m, ncols);
    let mut y = DVector::<Complex<f64>>::zeros(m);
    for (i, s) in samples.iter().enumerate() {
        let w = 1.0 / s.center as f64;
        let lx = (s.center as f64).ln();
        a[(i, 0)] = Complex::new(w * s.x_mean, 0.0);
        for (j, &e) in exps.iter().enumerate() {
            a[(i, 1 + j)] = cpow_pos(lx, e) * w;
        }
        a[(i, ncols - 1)] = Complex::new(w, 0.0);
        y[i] = s.value * w;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin.max(f64::MIN_POSITIVE);
    if condition > 1e12 {
        return Err(Error::IllConditioned { condition });
    }
    let sol = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Usage(format!("svd solve failed: {e}")))?;
    let residual = (&a * &sol - &y).norm() / (m as f64).sqrt();
    let constant = sol[ncols - 1];
    let mut logpoly = Vec::new();
    let mut j = 1;
    for r in 0..=deg.max(-1) {
        let e = alpha - r as f64;
        if e.norm() > 1e-12 {
            logpoly.push(sol[j]);
            j += 1;
        } else {
            // the (log x)^0 column merged with the constant column
            logpoly.push(constant);
        }
    }
    Ok(FitResult {
        coeffs: MainTermCoeffs {
            alpha,
            linear: sol[0],
            logpoly,
        },
        constant,
        condition,
        rms_residual: residual,
    })
}

fn binomial_f64(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// r-th derivative at 1 of a function sampled on a central stencil with
/// step h, Richardson-extrapolated from steps h and h/2.
fn central_derivative(g: &impl Fn(f64) -> Complex64, r: u32, h: f64) -> Complex64 {
    let diff = |h: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=r {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let offset = (r as f64 / 2.0 - k as f64) * h;
            acc += sign * binomial_f64(r, k) * g(1.0 + offset);
        }
        acc / h.powi(r as i32)
    };
    if r == 0 {
        return g(1.0);
    }
    let d1 = diff(h);
    let d2 = diff(h / 2.0);
    (4.0 * d2 - d1) / 3.0
}

/// Selberg--Delange-shaped candidate for the log-polynomial coefficients:
/// A_r = -g_r / (2 Gamma(alpha + 1 - r)) with g_r the r-th Taylor
/// coefficient at s = 1 of ((s-1) zeta(s))^alpha f(s). The -1/2 prefactor
/// is the mean of the sawtooth correction 1/2 + psi(x/n) applied to each
/// divisor count; it makes the candidate reproduce the exact count
/// sum_{n<=x} 1 = x - 1/2 - psi(x) in the alpha = 0 case.
pub fn main_term_selberg_delange(spec: &FamilySpec, p_max: u64) -> Result<MainTermCoeffs> {
    let alpha = zeta_order(spec);
    if alpha.re < 0.0 && MainTermCoeffs::log_degree(alpha) >= 0 {
        unreachable!()
    }
    let primes = primes_up_to(p_max.max(1000));
    let a = spec.alpha;
    let f_at = |s: f64| -> Result<Complex64> {
        let (v, _, _) = euler_product_over(spec, a, s, &primes)?;
        Ok(v)
    };
    let (f2, _, _) = euler_product_over(spec, a, 2.0, &primes)?;
    let linear = cpow_pos(std::f64::consts::PI.powi(2) / 6.0, alpha) * f2;
    let deg = MainTermCoeffs::log_degree(alpha);
    let mut logpoly = Vec::new();
    if deg >= 0 {
        // sample G once per stencil point; the truncation error of f is
        // smooth in s, so differencing the truncated G is stable
        let g = |s: f64| -> Complex64 {
            let zc = zeta_completed_near_one(s);
            cpow_pos(zc, alpha) * f_at(s).expect("euler product inside stencil")
        };
        let h = 1e-3;
        let mut fact = 1.0;
        for r in 0..=deg as u32 {
            if r > 0 {
                fact *= r as f64;
            }
            let gr = central_derivative(&g, r, h) / fact;
            let denom = gamma_lanczos(alpha + Complex64::new(1.0 - r as f64, 0.0));
            logpoly.push(-0.5 * gr / denom);
        }
    }
    Ok(MainTermCoeffs { alpha, linear, logpoly })
}

/// One CSV row (with header) for a coefficient report.
pub fn coeffs_csv(
    spec: &FamilySpec,
    method: &str,
    c: &MainTermCoeffs,
    condition: f64,
    tail: f64,
) -> String {
    let mut header = String::from("family,alpha,method,A");
    let mut row = format!(
        "{},{},{},{}",
        spec.id.name(),
        crate::report::fmt_complex(spec.alpha.value()),
        method,
        crate::report::fmt_complex(c.linear)
    );
    for (r, &v) in c.logpoly.iter().enumerate() {
        header.push_str(&format!(",A_{r}"));
        row.push_str(&format!(",{}", crate::report::fmt_complex(v)));
    }
    header.push_str(",condition,tail");
    row.push_str(&format!(",{condition:.6e},{tail:.6e}"));
    format!("{header}\n{row}\n")
}
