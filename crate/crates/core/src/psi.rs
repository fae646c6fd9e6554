//! The sawtooth psi(x) = {x} - 1/2, Vaaler's trigonometric approximant
//! with its Fejer-kernel error majorant, and the weighted sums
//! sum_{n<=y} v(n)/n psi(x/n) that drive the error-term analysis.

use crate::expsum::{e_of, SumWindow};
use crate::kahan::{par_sum_complex, KahanComplex, KahanSum};
use crate::sieve::FunctionTable;
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// psi(x) = {x} - 1/2; value in [-1/2, 1/2), period 1, integers map to -1/2.
pub fn psi(x: f64) -> f64 {
    let mut frac = x - x.floor();
    if frac >= 1.0 {
        frac = 0.0;
    }
    frac - 0.5
}

/// Truncated trigonometric approximation psi_N(x) = sum_{0<|h|<=N} c_N(h) e(hx)
/// with |c_N(h)| <= 1/(2 pi |h|) and the pointwise error majorant
/// |psi - psi_N| <= (1/(2(N+1))) sum_{|h|<=N} (1 - |h|/(N+1)) e(hx).
#[derive(Debug, Clone)]
pub struct VaalerApprox {
    pub n: u32,
    /// c_N(h) for h = 1..=N; negative h by conjugate symmetry
    coeffs: Vec<Complex64>,
}

/// Taper Phi(t) = pi t (1-t) cot(pi t) + t, decreasing from 1 to 0 on (0, 1).
fn vaaler_phi(t: f64) -> f64 {
    PI * t * (1.0 - t) * (PI * t).cos() / (PI * t).sin() + t
}

pub fn vaaler_build(n: u32) -> Result<VaalerApprox> {
    if !(1..=10_000).contains(&n) {
        return Err(Error::Domain(format!("vaaler_build: N = {n} outside [1, 10^4]")));
    }
    let coeffs = (1..=n)
        .map(|h| {
            let t = h as f64 / (n as f64 + 1.0);
            Complex64::new(0.0, vaaler_phi(t) / (2.0 * PI * h as f64))
        })
        .collect();
    Ok(VaalerApprox { n, coeffs })
}

impl VaalerApprox {
    /// c_N(h) for 0 < |h| <= N.
    pub fn coeff(&self, h: i64) -> Complex64 {
        assert!(h != 0 && h.unsigned_abs() <= self.n as u64, "h = {h} out of range");
        let c = self.coeffs[h.unsigned_abs() as usize - 1];
        if h > 0 {
            c
        } else {
            c.conj()
        }
    }

    /// psi_N(x), returned as a complex number so callers can check that the
    /// imaginary part vanishes.
    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = KahanComplex::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            let e = e_of((i as f64 + 1.0) * x);
            acc.add(c * e + c.conj() * e.conj());
        }
        acc.value()
    }

    /// The Fejer-kernel error majorant (1/(2(N+1))) sum_{|h|<=N} (1-|h|/(N+1)) e(hx).
    pub fn majorant(&self, x: f64) -> f64 {
        let np1 = self.n as f64 + 1.0;
        let mut acc = KahanSum::<f64>::new();
        acc.add(1.0);
        for h in 1..=self.n {
            let w = 1.0 - h as f64 / np1;
            acc.add(2.0 * w * (2.0 * PI * h as f64 * x).cos());
        }
        acc.value() / (2.0 * np1)
    }
}

/// sum_{n<=y} v(n)/n * psi(x/n), the central weighted sawtooth sum.
pub fn psi_weighted_sum(v: &FunctionTable, x: f64, y: f64) -> Result<Complex64> {
    if !(4.0 <= y && y <= x) {
        return Err(Error::Domain(format!("psi_weighted_sum: need 4 <= y <= x, got y = {y}, x = {x}")));
    }
    let hi = y.floor() as u64;
    if hi > v.limit() {
        return Err(Error::Domain(format!(
            "psi_weighted_sum: y = {y} exceeds table limit {}",
            v.limit()
        )));
    }
    Ok(par_sum_complex(1, hi, |n| {
        v.value(n) * (psi(x / n as f64) / n as f64)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub h: f64,
}

/// Checks the sawtooth-to-exponential transfer inequality on a window:
/// |sum_{P<n<=P'} v(n) psi(x/n)| against
/// sum_{0<|h|<=H} |sum v(n) e(h x/n)|/|h| + (1/H) sum_{0<=h<=H} |sum |v(n)| e(h x/n)|,
/// asserting LHS <= 4 RHS (the absolute constant frozen after calibration).
pub fn vaaler_transfer_check(
    v: &FunctionTable,
    x: f64,
    window: &SumWindow,
    h_cap: f64,
) -> Result<TransferReport> {
    if h_cap < 1.0 {
        return Err(Error::Domain(format!("vaaler_transfer_check: H = {h_cap} < 1")));
    }
    let (lo, hi) = (window.lo(), window.hi());
    if hi > v.limit() {
        return Err(Error::Domain("vaaler_transfer_check: window exceeds table limit".into()));
    }
    let mut lhs_acc = KahanComplex::new();
    for n in lo..=hi {
        lhs_acc.add(v.value(n) * psi(x / n as f64));
    }
    let lhs = lhs_acc.value().norm();

    let inner = |h: f64, abs: bool| -> f64 {
        let mut acc = KahanComplex::new();
        for n in lo..=hi {
            let g = if abs {
                Complex64::new(v.value(n).norm(), 0.0)
            } else {
                v.value(n)
            };
            acc.add(g * e_of(h * x / n as f64));
        }
        acc.value().norm()
    };
    let hmax = h_cap.floor() as i64;
    let mut rhs = KahanSum::<f64>::new();
    for h in 1..=hmax {
        rhs.add(inner(h as f64, false) / h as f64);
        rhs.add(inner(-(h as f64), false) / h as f64);
    }
    let mut g_part = KahanSum::<f64>::new();
    for h in 0..=hmax {
        g_part.add(inner(h as f64, true));
    }
    rhs.add(g_part.value() / h_cap);
    let rhs = rhs.value();
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    if lhs > 4.0 * rhs + 1e-12 {
        return Err(Error::Domain(format!(
            "transfer inequality violated: {lhs} > 4 * {rhs}"
        )));
    }
    Ok(TransferReport { lhs, rhs, ratio, h: h_cap })
}
