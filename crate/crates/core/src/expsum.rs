//! Exponential sums over dyadic windows: direct sums of e(Q/n), the
//! Kusmin--Landau and Walfisz-shaped envelopes, Karatsuba-style parameter
//! selection, Vaughan's identity and its sum decomposition, bilinear
//! Type II sums, prime-supported sums with an Abel-summation cross-check,
//! and the smooth/rough and square-free-rough partitions.

use crate::kahan::{par_sum_complex, KahanComplex, KahanSum};
use crate::sieve::{mu_i8, sieve_classical, Classical, FunctionTable, PrimeList, SpfTable};
use crate::{Error, Result};
use num_complex::Complex64;

/// Dyadic summation window (P, P'] with modulus parameter Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumWindow {
    pub p: f64,
    pub p_prime: f64,
    pub q: f64,
}

impl SumWindow {
    pub fn new(p: f64, p_prime: f64, q: f64) -> Result<Self> {
        if !(p >= 4.0 && p < p_prime && p_prime <= 2.0 * p) {
            return Err(Error::Domain(format!(
                "window needs 4 <= P < P' <= 2P, got P = {p}, P' = {p_prime}"
            )));
        }
        if !(q >= 4.0) {
            return Err(Error::Domain(format!("window needs Q >= 4, got Q = {q}")));
        }
        Ok(SumWindow { p, p_prime, q })
    }

    /// First integer in (P, P'].
    pub fn lo(&self) -> u64 {
        self.p.floor() as u64 + 1
    }

    /// Last integer in (P, P'].
    pub fn hi(&self) -> u64 {
        self.p_prime.floor() as u64
    }

    pub fn n_terms(&self) -> u64 {
        let (lo, hi) = (self.lo(), self.hi());
        if hi >= lo {
            hi - lo + 1
        } else {
            0
        }
    }
}

/// e(x) = exp(2 pi i x).
pub fn e_of(x: f64) -> Complex64 {
    let t = 2.0 * std::f64::consts::PI * x;
    Complex64::new(t.cos(), t.sin())
}

/// e(Q/n) with the argument reduced mod 1 before multiplying by 2 pi.
/// The integer part is removed through a fused multiply-add so the
/// residual Q - k n is exact; naive reduction of Q/n loses the phase
/// entirely once Q/n is large.
pub fn phase(q: f64, n: u64) -> Complex64 {
    let nf = n as f64;
    let k = (q / nf).floor();
    let r = (-k).mul_add(nf, q);
    let mut frac = r / nf;
    if frac >= 1.0 {
        frac -= 1.0;
    }
    if frac < 0.0 {
        frac += 1.0;
    }
    e_of(frac)
}

/// Envelope values attached to a computed sum. Absent entries mean the
/// regime of the corresponding estimate does not apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// sum of |coefficients| over the window
    pub trivial: f64,
    pub kusmin_landau: Option<f64>,
    pub walfisz_gamma1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumRecord {
    pub window: SumWindow,
    pub value: Complex64,
    pub n_terms: u64,
    pub bounds: Bounds,
}

impl ExpSumRecord {
    pub fn csv_header() -> &'static str {
        "P,P_prime,Q,re,im,abs,n_terms,bound_kl,bound_walfisz_gamma1,ratio_kl,ratio_walfisz"
    }

    pub fn csv_row(&self) -> String {
        let a = self.value.norm();
        let (kl, rkl) = match self.bounds.kusmin_landau {
            Some(b) => (format!("{b:.6e}"), format!("{:.6e}", a / b)),
            None => (String::new(), String::new()),
        };
        let wf = self.bounds.walfisz_gamma1;
        format!(
            "{},{},{},{:.12e},{:.12e},{:.12e},{},{},{:.6e},{},{:.6e}",
            self.window.p,
            self.window.p_prime,
            self.window.q,
            self.value.re,
            self.value.im,
            a,
            self.n_terms,
            kl,
            wf,
            rkl,
            a / wf
        )
    }
}

/// Direct evaluation of sum_{P<n<=P'} c(n) e(Q/n); unit coefficients when
/// `coeff` is absent. Deterministic chunked parallel accumulation.
pub fn exp_sum_direct(w: &SumWindow, coeff: Option<&FunctionTable>) -> Result<ExpSumRecord> {
    if let Some(c) = coeff {
        if w.hi() > c.limit() {
            return Err(Error::Domain(format!(
                "window end {} exceeds coefficient table limit {}",
                w.hi(),
                c.limit()
            )));
        }
    }
    let (lo, hi) = (w.lo(), w.hi());
    let q = w.q;
    let value = match coeff {
        Some(c) => par_sum_complex(lo, hi, |n| c.value(n) * phase(q, n)),
        None => par_sum_complex(lo, hi, |n| phase(q, n)),
    };
    let trivial = match coeff {
        Some(c) => par_sum_complex(lo, hi, |n| Complex64::new(c.value(n).norm(), 0.0)).re,
        None => w.n_terms() as f64,
    };
    Ok(ExpSumRecord {
        window: *w,
        value,
        n_terms: w.n_terms(),
        bounds: Bounds {
            trivial,
            kusmin_landau: kusmin_landau_check(w).map(|(_, b)| b),
            walfisz_gamma1: walfisz_envelope(w, 1.0)?,
        },
    })
}

/// Derivative-based envelope for the unweighted sum: with f(x) = Q/x the
/// derivative -Q/x^2 is monotone, and when its range fits inside
/// [lambda, 1 - lambda] for lambda = min(Q/P'^2, 1 - Q/P^2) > 0 the sum
/// is bounded by 1/lambda + 1. Returns (lambda, bound), or None when the
/// regime does not apply.
pub fn kusmin_landau_check(w: &SumWindow) -> Option<(f64, f64)> {
    let d_min = w.q / (w.p_prime * w.p_prime);
    let d_max = w.q / (w.p * w.p);
    if d_min > 0.0 && d_max < 1.0 - d_min {
        let lambda = d_min.min(1.0 - d_max);
        Some((lambda, 1.0 / lambda + 1.0))
    } else {
        None
    }
}

/// Walfisz-shaped envelope P exp(-gamma (log P)^3 / (log Q)^2) + P^2/Q.
/// gamma is report-only: the underlying absolute constant is not pinned,
/// so this is never asserted as an inequality.
pub fn walfisz_envelope(w: &SumWindow, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("walfisz_envelope: gamma = {gamma} not > 0")));
    }
    let lp = w.p.ln();
    let lq = w.q.ln();
    Ok(w.p * (-gamma * lp.powi(3) / (lq * lq)).exp() + w.p * w.p / w.q)
}

/// Parameter selection for the Vinogradov-type estimate: degree k,
/// the four shape constants, and the dyadic j-range with its length r.
#[derive(Debug, Clone, PartialEq)]
pub struct KaratsubaParams {
    pub k: u32,
    /// (c0, c1, c2, c3) = (1/39, 25/26, 23/24, 1/4)
    pub c: [f64; 4],
    pub j_lo: u32,
    pub j_hi: u32,
    pub r: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KaratsubaChecks {
    /// (A): Q/P^{k+2} <= P^{-c1 (k+1)}
    pub a_ok: bool,
    /// (B): P^{-c2 j} <= Q/x^{j+1} <= P^{-c3 j} on the window, all j in range
    pub b_ok: bool,
    pub failures: Vec<String>,
}

pub fn karatsuba_params(p: f64, q: f64) -> Result<(KaratsubaParams, KaratsubaChecks)> {
    if !(p > 4096.0) {
        return Err(Error::Regime(format!("karatsuba: P = {p} violates P > 2^12")));
    }
    let cap = q.powf(2.0 / 3.0) / 2.0;
    if !(p <= cap) {
        return Err(Error::Regime(format!(
            "karatsuba: P = {p} violates P <= Q^(2/3)/2 = {cap}"
        )));
    }
    let lp = p.ln();
    let lq = q.ln();
    let k = (26.0 * lq / lp).floor() as u32;
    let c = [1.0 / 39.0, 25.0 / 26.0, 23.0 / 24.0, 0.25];
    let big_l = (2.0 / 3.0) * lq / lp; // log(Q^{2/3}) / log P
    let j_lo = (2.0 * big_l).floor() as u32;
    let j_hi = (4.0 * big_l).floor() as u32;
    let r = j_hi - j_lo;
    let params = KaratsubaParams { k, c, j_lo, j_hi, r };
    let mut failures = Vec::new();
    if !(c[0] * k as f64 <= r as f64 && r <= k) {
        failures.push(format!("c0 k <= r <= k fails: k = {k}, r = {r}"));
    }
    // (A): max over x in (P, 2P] of |f^{(k+1)}(x)/(k+1)!| = Q/x^{k+2} is at x = P
    let a_ok = lq - (k as f64 + 2.0) * lp <= -c[1] * (k as f64 + 1.0) * lp;
    if !a_ok {
        failures.push(format!("(A) Q/P^(k+2) <= P^(-c1(k+1)) fails at k = {k}"));
    }
    let mut b_ok = true;
    for j in (j_lo + 1)..=j_hi {
        let jf = j as f64;
        // Q/x^{j+1} is decreasing in x: extremes at x = 2P (min) and x = P (max)
        let min_log = lq - (jf + 1.0) * (lp + std::f64::consts::LN_2);
        let max_log = lq - (jf + 1.0) * lp;
        if !(-c[2] * jf * lp <= min_log) {
            b_ok = false;
            failures.push(format!("(B) lower inequality fails at j = {j}"));
        }
        if !(max_log <= -c[3] * jf * lp) {
            b_ok = false;
            failures.push(format!("(B) upper inequality fails at j = {j}"));
        }
    }
    Ok((params, KaratsubaChecks { a_ok, b_ok, failures }))
}

// ---------------------------------------------------------------------------
// Vaughan's identity
// ---------------------------------------------------------------------------

/// Per-n terms of Vaughan's three-fold decomposition at parameter z:
/// a1 - a2 + a3 = Lambda(n) for every n > z.
#[derive(Debug, Clone)]
pub struct VaughanTerms {
    pub z: f64,
    pub n_max: u64,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl VaughanTerms {
    /// a1(n) - a2(n) + a3(n).
    pub fn combined(&self, n: u64) -> f64 {
        let i = n as usize;
        self.a1[i] - self.a2[i] + self.a3[i]
    }
}

/// Builds a1, a2, a3 on [1, n_max] by forward divisor loops.
/// a1(n) = sum_{uv=n, u<=z} mu(u) log v;
/// a2(n) = sum_{uv=n, u<=z^2} c2(u) with c2(u) = sum_{dm=u, d,m<=z} mu(d) Lambda(m);
/// a3(n) = sum_{uv=n, u,v>z} c3(u) Lambda(v) with c3(u) = sum_{dm=u, d>z} mu(d).
pub fn vaughan_terms(n_max: u64, z: f64, t: &SpfTable) -> Result<VaughanTerms> {
    if z < 2.0 {
        return Err(Error::Domain(format!("vaughan_terms: z = {z} < 2")));
    }
    if n_max > t.limit() {
        return Err(Error::Domain(format!(
            "vaughan_terms: n_max = {n_max} exceeds sieve limit {}",
            t.limit()
        )));
    }
    let n = n_max as usize;
    let mu = mu_i8(t, n_max);
    let lam_tab = sieve_classical(Classical::Lambda, n_max, t)?;
    let lambda: Vec<f64> = (0..=n).map(|i| lam_tab.value(i.max(1) as u64).re).collect();
    let zi = z.floor() as usize;
    let z2i = (z * z).floor() as usize;

    let mut a1 = vec![0.0f64; n + 1];
    for u in 1..=zi.min(n) {
        if mu[u] == 0 {
            continue;
        }
        let m = mu[u] as f64;
        for v in 1..=(n / u) {
            a1[u * v] += m * (v as f64).ln();
        }
    }

    let mut c2 = vec![0.0f64; z2i.min(n) + 1];
    for d in 1..=zi.min(n) {
        if mu[d] == 0 {
            continue;
        }
        let md = mu[d] as f64;
        for m in 1..=zi.min(c2.len().saturating_sub(1) / d) {
            if lambda[m] != 0.0 {
                c2[d * m] += md * lambda[m];
            }
        }
    }
    let mut a2 = vec![0.0f64; n + 1];
    for (u, &c) in c2.iter().enumerate().skip(1) {
        if c == 0.0 || u > n {
            continue;
        }
        for v in 1..=(n / u) {
            a2[u * v] += c;
        }
    }

    let mut c3 = vec![0.0f64; n + 1];
    for d in (zi + 1)..=n {
        if mu[d] == 0 {
            continue;
        }
        let md = mu[d] as f64;
        for m in 1..=(n / d) {
            c3[d * m] += md;
        }
    }
    let mut a3 = vec![0.0f64; n + 1];
    for u in (zi + 1)..=n {
        if c3[u] == 0.0 {
            continue;
        }
        for v in (zi + 1)..=(n / u) {
            if lambda[v] != 0.0 {
                a3[u * v] += c3[u] * lambda[v];
            }
        }
    }

    Ok(VaughanTerms { z, n_max, a1, a2, a3, lambda })
}

/// The three partial exponential sums of the decomposition
/// sum_{P<n<=P'} Lambda(n) e(Q/n) = S1 - S2 + S3 at cutoff z.
/// S1 carries mu(u) log v over u <= z; S2 carries c2(u) over u <= z^2;
/// S3 carries c3(u) Lambda(v) over u, v > z.
pub fn vaughan_sum_split(
    w: &SumWindow,
    z: f64,
    t: &SpfTable,
) -> Result<(Complex64, Complex64, Complex64)> {
    if z < 2.0 {
        return Err(Error::Domain(format!("vaughan_sum_split: z = {z} < 2")));
    }
    let hi = w.hi();
    if hi > t.limit() {
        return Err(Error::Domain(format!(
            "vaughan_sum_split: window end {hi} exceeds sieve limit {}",
            t.limit()
        )));
    }
    let q = w.q;
    let zi = z.floor() as u64;
    let z2i = (z * z).floor() as u64;
    let mu = mu_i8(t, hi);
    let lam_tab = sieve_classical(Classical::Lambda, hi, t)?;

    let range_v = |u: u64| -> (u64, u64) {
        let lo_v = (w.p / u as f64).floor() as u64 + 1;
        let hi_v = (w.p_prime / u as f64).floor() as u64;
        (lo_v, hi_v)
    };

    let mut s1 = KahanComplex::new();
    for u in 1..=zi.min(hi) {
        if mu[u as usize] == 0 {
            continue;
        }
        let m = mu[u as usize] as f64;
        let (lo_v, hi_v) = range_v(u);
        for v in lo_v..=hi_v {
            s1.add(m * (v as f64).ln() * phase(q, u * v));
        }
    }

    // c2 on [1, min(z^2, P')]
    let c2_max = z2i.min(hi);
    let mut c2 = vec![0.0f64; c2_max as usize + 1];
    for d in 1..=zi.min(c2_max) {
        if mu[d as usize] == 0 {
            continue;
        }
        let md = mu[d as usize] as f64;
        for m in 1..=zi.min(c2_max / d) {
            let l = lam_tab.value(m).re;
            if l != 0.0 {
                c2[(d * m) as usize] += md * l;
            }
        }
    }
    let mut s2 = KahanComplex::new();
    for u in 1..=c2_max {
        let c = c2[u as usize];
        if c == 0.0 {
            continue;
        }
        let (lo_v, hi_v) = range_v(u);
        for v in lo_v..=hi_v {
            s2.add(c * phase(q, u * v));
        }
    }

    // c3 on (z, P'/z]
    let c3_max = (w.p_prime / z).floor() as u64;
    let mut c3 = vec![0.0f64; c3_max as usize + 1];
    for d in (zi + 1)..=c3_max {
        if mu[d as usize] == 0 {
            continue;
        }
        let md = mu[d as usize] as f64;
        for m in 1..=(c3_max / d) {
            c3[(d * m) as usize] += md;
        }
    }
    let mut s3 = KahanComplex::new();
    for u in (zi + 1)..=c3_max {
        let c = c3[u as usize];
        if c == 0.0 {
            continue;
        }
        let (lo_v, hi_v) = range_v(u);
        for v in lo_v.max(zi + 1)..=hi_v {
            let l = lam_tab.value(v).re;
            if l != 0.0 {
                s3.add(c * l * phase(q, u * v));
            }
        }
    }

    Ok((s1.value(), s2.value(), s3.value()))
}

// ---------------------------------------------------------------------------
// Type II bilinear sums
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeIIReport {
    pub value: Complex64,
    pub norm_a: f64,
    pub norm_b: f64,
    /// (P^{1/2} (log Q)^{-A} + P Q^{-1/2}) ||A|| ||B|| (log Q)^{1/2}
    pub rhs: f64,
}

/// Exact bilinear double sum over P < uv <= P', U < u <= U', V < v <= V'
/// with the comparison envelope for a caller-chosen log-power A.
#[allow(clippy::too_many_arguments)]
pub fn type2_bilinear(
    alpha: &(dyn Fn(u64) -> Complex64 + Sync),
    beta: &(dyn Fn(u64) -> Complex64 + Sync),
    w: &SumWindow,
    u: f64,
    u_prime: f64,
    v: f64,
    v_prime: f64,
    a_param: f64,
) -> Result<TypeIIReport> {
    if !(u >= 4.0 && u < u_prime && u_prime <= 2.0 * u) {
        return Err(Error::Domain(format!("type2: need 4 <= U < U' <= 2U, got {u}, {u_prime}")));
    }
    // the source statement's "V < V' <= 2V'" is vacuous as written; the
    // intended dyadic condition V' <= 2V is what we enforce
    if !(v >= 4.0 && v < v_prime && v_prime <= 2.0 * v) {
        return Err(Error::Domain(format!("type2: need 4 <= V < V' <= 2V, got {v}, {v_prime}")));
    }
    let q = w.q;
    let (u_lo, u_hi) = (u.floor() as u64 + 1, u_prime.floor() as u64);
    let (v_lo, v_hi) = (v.floor() as u64 + 1, v_prime.floor() as u64);
    let mut acc = KahanComplex::new();
    for uu in u_lo..=u_hi {
        let au = alpha(uu);
        if au.re == 0.0 && au.im == 0.0 {
            continue;
        }
        let lo = v_lo.max((w.p / uu as f64).floor() as u64 + 1);
        let hi = v_hi.min((w.p_prime / uu as f64).floor() as u64);
        for vv in lo..=hi {
            acc.add(au * beta(vv) * phase(q, uu * vv));
        }
    }
    let mut na = KahanSum::<f64>::new();
    for uu in u_lo..=u_hi {
        na.add(alpha(uu).norm_sqr());
    }
    let mut nb = KahanSum::<f64>::new();
    for vv in v_lo..=v_hi {
        nb.add(beta(vv).norm_sqr());
    }
    let (norm_a, norm_b) = (na.value().sqrt(), nb.value().sqrt());
    let lq = w.q.ln();
    let rhs = (w.p.sqrt() * lq.powf(-a_param) + w.p / w.q.sqrt()) * norm_a * norm_b * lq.sqrt();
    Ok(TypeIIReport { value: acc.value(), norm_a, norm_b, rhs })
}

// ---------------------------------------------------------------------------
// Prime-supported sums
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum PrimeWeight<'a> {
    Unit,
    /// log p (the von Mangoldt weight restricted to primes)
    LogP,
    Table(&'a FunctionTable),
}

/// sum_{P<p<=P'} weight(p) e(Q/p), evaluated directly and re-derived by
/// Abel summation against the running unweighted sum; the two paths must
/// agree to 1e-9 relative (internal consistency check).
pub fn exp_sum_primes(w: &SumWindow, weight: PrimeWeight, primes: &PrimeList) -> Result<ExpSumRecord> {
    if w.p_prime > primes.limit as f64 {
        return Err(Error::Domain(format!(
            "exp_sum_primes: window end {} exceeds prime list limit {}",
            w.p_prime, primes.limit
        )));
    }
    if let PrimeWeight::Table(t) = weight {
        if w.hi() > t.limit() {
            return Err(Error::Domain("exp_sum_primes: weight table too short".into()));
        }
    }
    let ps = primes.in_window(w.p, w.p_prime);
    let q = w.q;
    let wt = |p: u64| -> Complex64 {
        match weight {
            PrimeWeight::Unit => Complex64::new(1.0, 0.0),
            PrimeWeight::LogP => Complex64::new((p as f64).ln(), 0.0),
            PrimeWeight::Table(t) => t.value(p),
        }
    };
    let mut direct = KahanComplex::new();
    let mut trivial = KahanSum::<f64>::new();
    for &p in ps {
        direct.add(wt(p) * phase(q, p));
        trivial.add(wt(p).norm());
    }
    let direct = direct.value();

    // Abel path: with S(x) = sum_{P<p<=x} e(Q/p) over the indexed primes,
    // sum v(p) e(Q/p) = sum_{n<N} (v(q_n) - v(q_{n+1})) S(q_n) + v(q_N) S(q_N)
    let mut abel = KahanComplex::new();
    let mut running = KahanComplex::new();
    for (i, &p) in ps.iter().enumerate() {
        running.add(phase(q, p));
        let dv = if i + 1 < ps.len() { wt(p) - wt(ps[i + 1]) } else { wt(p) };
        abel.add(dv * running.value());
    }
    let abel = abel.value();
    let scale = direct.norm().max(1e-6);
    if (abel - direct).norm() / scale > 1e-9 {
        return Err(Error::Domain(format!(
            "abel cross-check failed: |{abel} - {direct}| too large"
        )));
    }
    Ok(ExpSumRecord {
        window: *w,
        value: direct,
        n_terms: ps.len() as u64,
        bounds: Bounds {
            trivial: trivial.value(),
            kusmin_landau: kusmin_landau_check(w).map(|(_, b)| b),
            walfisz_gamma1: walfisz_envelope(w, 1.0)?,
        },
    })
}

// ---------------------------------------------------------------------------
// Square-free rough sums and the smooth/rough partition
// ---------------------------------------------------------------------------

/// Tuple-partition diagnostics for the symmetrized square-free rough sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionDiagnostics {
    /// ordered nu-tuples of primes > z with product in (P, P']
    pub p_count: u64,
    /// those with pairwise distinct entries
    pub q_count: u64,
    pub p_minus_q: u64,
    /// Type I cell sizes, r = 1..=nu: first coordinate above P^{1/3}
    pub type1_cells: Vec<u64>,
    /// Type II cell sizes, r = 2..=nu-1 (all coordinates <= P^{1/3})
    pub type2_cells: Vec<u64>,
    /// the direct sum over square-free rough q with omega(q) = nu
    pub direct: Complex64,
}

/// Direct and symmetrized evaluation of the sum over square-free q in
/// (P, P'] with p_min(q) > z and omega(q) = nu, weighted by the
/// multiplicative table v. Returns (1/nu!) S(Q_distinct) plus partition
/// diagnostics; the direct path sits in the diagnostics for comparison.
pub fn squarefree_rough_sum(
    w: &SumWindow,
    z: f64,
    nu: u32,
    v: &FunctionTable,
    t: &SpfTable,
    primes: &PrimeList,
) -> Result<(Complex64, PartitionDiagnostics)> {
    if z < 4.0 {
        return Err(Error::Domain(format!("squarefree_rough_sum: z = {z} < 4")));
    }
    if nu < 1 {
        return Err(Error::Domain("squarefree_rough_sum: nu >= 1 required".into()));
    }
    let hi = w.hi();
    if hi > t.limit() || hi > v.limit() {
        return Err(Error::Domain("squarefree_rough_sum: tables too short".into()));
    }
    let q = w.q;

    // direct path
    let mut direct = KahanComplex::new();
    for n in w.lo()..=hi {
        let fac = crate::sieve::factorize(n, t)?;
        if fac.len() == nu as usize
            && fac.iter().all(|&(_, e)| e == 1)
            && fac.iter().all(|&(p, _)| p as f64 > z)
        {
            direct.add(v.value(n) * phase(q, n));
        }
    }
    let direct = direct.value();

    // symmetrized tuple path with w(p) = v(p) completely multiplicative
    let vp = |p: u64| v.value(p);
    let pool: Vec<u64> = primes
        .primes
        .iter()
        .copied()
        .filter(|&p| p as f64 > z && p as f64 <= w.p_prime)
        .collect();
    let third = w.p.powf(1.0 / 3.0);
    let mut diag = PartitionDiagnostics {
        p_count: 0,
        q_count: 0,
        p_minus_q: 0,
        type1_cells: vec![0; nu as usize],
        type2_cells: vec![0; (nu as usize).saturating_sub(1).max(1) - 1],
        direct,
    };
    let mut distinct_sum = KahanComplex::new();
    let mut stack: Vec<u64> = Vec::with_capacity(nu as usize);
    enumerate_tuples(
        w,
        &pool,
        nu,
        1,
        &mut stack,
        &mut |tuple: &[u64]| {
            diag.p_count += 1;
            let mut weight = Complex64::new(1.0, 0.0);
            let mut prod = 1u64;
            for &p in tuple {
                weight *= vp(p);
                prod *= p;
            }
            let all_distinct = tuple.iter().enumerate().all(|(i, &p)| !tuple[..i].contains(&p));
            if all_distinct {
                diag.q_count += 1;
                distinct_sum.add(weight * phase(q, prod));
            }
            // cell classification
            if let Some(r) = tuple.iter().position(|&p| p as f64 > third) {
                diag.type1_cells[r] += 1;
            } else {
                // all coordinates <= P^{1/3}: find r with p_1..p_r > P^{1/3}
                let mut pref = 1.0f64;
                for (i, &p) in tuple.iter().enumerate() {
                    pref *= p as f64;
                    if pref > third {
                        debug_assert!(i >= 1 && i < nu as usize - 1 || nu <= 2);
                        if i >= 1 && i - 1 < diag.type2_cells.len() {
                            diag.type2_cells[i - 1] += 1;
                        }
                        break;
                    }
                }
            }
        },
    );
    diag.p_minus_q = diag.p_count - diag.q_count;
    // sum over decreasing (distinct) tuples equals (1/nu!) of the
    // symmetrized distinct sum; we accumulated ordered distinct tuples
    let mut fact = 1.0f64;
    for i in 2..=nu {
        fact *= i as f64;
    }
    let value = distinct_sum.value() / fact;
    Ok((value, diag))
}

fn enumerate_tuples(
    w: &SumWindow,
    pool: &[u64],
    nu: u32,
    partial: u64,
    stack: &mut Vec<u64>,
    visit: &mut impl FnMut(&[u64]),
) {
    if stack.len() == nu as usize {
        let m = partial as f64;
        if m > w.p && m <= w.p_prime {
            visit(stack);
        }
        return;
    }
    let remaining = (nu as usize - stack.len() - 1) as i32;
    for &p in pool {
        let pf = p as f64;
        // smallest completion uses the smallest pool prime for each slot
        let min_rest = (pool[0] as f64).powi(remaining);
        if partial as f64 * pf * min_rest > w.p_prime {
            if pf * min_rest > w.p_prime {
                break;
            }
            continue;
        }
        stack.push(p);
        enumerate_tuples(w, pool, nu, partial * p, stack, visit);
        stack.pop();
    }
}

/// The smooth/rough split of the v-weighted window sum: each n factors
/// uniquely as n = m q with p_max(m) <= z < p_min(q), z as below; Sigma_1
/// collects m <= P^{1/2} and Sigma_2 the rest.
pub fn smooth_rough_split(w: &SumWindow, v: &FunctionTable, t: &SpfTable) -> Result<(Complex64, Complex64)> {
    let z = smooth_rough_z(w);
    if z < 4.0 {
        return Err(Error::Regime(format!(
            "smooth_rough_split: z = {z} < 4 (P too small relative to Q)"
        )));
    }
    let hi = w.hi();
    if hi > t.limit() || hi > v.limit() {
        return Err(Error::Domain("smooth_rough_split: tables too short".into()));
    }
    let root_p = w.p.sqrt();
    let mut s1 = KahanComplex::new();
    let mut s2 = KahanComplex::new();
    for n in w.lo()..=hi {
        let mut m = 1u64;
        for (p, e) in crate::sieve::factorize(n, t)? {
            if p as f64 <= z {
                m *= p.pow(e);
            }
        }
        let qq = n / m;
        let term = v.value(m) * v.value(qq) * phase(w.q, n);
        if (m as f64) <= root_p {
            s1.add(term);
        } else {
            s2.add(term);
        }
    }
    Ok((s1.value(), s2.value()))
}

/// z = exp(log P / (2 log log Q)), the smooth/rough cutoff.
pub fn smooth_rough_z(w: &SumWindow) -> f64 {
    (w.p.ln() / (2.0 * w.q.ln().ln())).exp()
}
