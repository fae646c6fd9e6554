//! Error-term experiments: exact summatory functions of the weight
//! families, error profiles against the classical envelopes, and the
//! totient-summatory experiment with its calibrated error cap.

use crate::dirichlet::{averaged_samples, main_term_fit, FitResult, MainTermCoeffs};
use crate::families::{family_table, FamilySpec};
use crate::report::{csv_table, fmt_f64, svg_polylines};
use crate::sieve::{prefix_sums_at, SpfTable};
use crate::verify::geometric_grid;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummatorySample {
    pub x: f64,
    pub exact: Complex64,
    pub main: Complex64,
    pub error: Complex64,
}

/// Per-sample envelope values and normalized ratios for one family.
#[derive(Debug, Clone)]
pub struct ErrorProfile {
    pub spec: FamilySpec,
    pub samples: Vec<SummatorySample>,
    /// x log x
    pub env_mertens: Vec<f64>,
    /// x (log x)^{2/3} (log log x)^{4/3}
    pub env_walfisz: Vec<f64>,
    /// x (log x)^{2/3} (log log x)^{1/3}
    pub env_liu: Vec<f64>,
    /// (log x)^{2|alpha|/3} (log log x)^{|alpha|/3}
    pub env_bp: Vec<f64>,
}

/// The four envelope values at x; requires x > e^e so both logs are positive.
pub fn envelopes(x: f64, alpha_norm: f64) -> (f64, f64, f64, f64) {
    let lx = x.ln();
    let llx = lx.ln();
    (
        x * lx,
        x * lx.powf(2.0 / 3.0) * llx.powf(4.0 / 3.0),
        x * lx.powf(2.0 / 3.0) * llx.powf(1.0 / 3.0),
        lx.powf(2.0 * alpha_norm / 3.0) * llx.powf(alpha_norm / 3.0),
    )
}

/// Least-squares slope of ln(y) against ln(x); the non-growth heuristic.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x.ln(), y.max(1e-300).ln()))
        .collect();
    let n = pts.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

impl ErrorProfile {
    pub fn liu_ratios(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(&self.env_liu)
            .map(|(s, &e)| s.error.norm() / e)
            .collect()
    }

    pub fn liu_trend_slope(&self) -> f64 {
        let xs: Vec<f64> = self.samples.iter().map(|s| s.x).collect();
        loglog_slope(&xs, &self.liu_ratios())
    }

    pub fn csv(&self) -> String {
        let header = [
            "family", "alpha_re", "alpha_im", "x", "exact_re", "exact_im", "main_re", "main_im",
            "err_abs", "env_mertens", "env_walfisz", "env_liu", "env_bp", "ratio_mertens",
            "ratio_walfisz", "ratio_liu", "ratio_bp",
        ];
        let a = self.spec.alpha.value();
        let rows: Vec<Vec<String>> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let e = s.error.norm();
                vec![
                    self.spec.id.name().to_string(),
                    fmt_f64(a.re),
                    fmt_f64(a.im),
                    fmt_f64(s.x),
                    format!("{:.12e}", s.exact.re),
                    format!("{:.12e}", s.exact.im),
                    format!("{:.12e}", s.main.re),
                    format!("{:.12e}", s.main.im),
                    format!("{:.12e}", e),
                    format!("{:.6e}", self.env_mertens[i]),
                    format!("{:.6e}", self.env_walfisz[i]),
                    format!("{:.6e}", self.env_liu[i]),
                    format!("{:.6e}", self.env_bp[i]),
                    format!("{:.6e}", e / self.env_mertens[i]),
                    format!("{:.6e}", e / self.env_walfisz[i]),
                    format!("{:.6e}", e / self.env_liu[i]),
                    format!("{:.6e}", e / self.env_bp[i]),
                ]
            })
            .collect();
        csv_table(&header, &rows)
    }

    /// Normalized-ratio chart (log10 x on the horizontal axis).
    pub fn svg(&self) -> String {
        let xs: Vec<f64> = self.samples.iter().map(|s| s.x.log10()).collect();
        let mk = |env: &[f64]| -> Vec<(f64, f64)> {
            self.samples
                .iter()
                .zip(env)
                .zip(&xs)
                .map(|((s, &e), &lx)| (lx, s.error.norm() / e))
                .collect()
        };
        let (m, w, l, b) = (
            mk(&self.env_mertens),
            mk(&self.env_walfisz),
            mk(&self.env_liu),
            mk(&self.env_bp),
        );
        svg_polylines(
            &[("mertens", &m), ("walfisz", &w), ("liu", &l), ("bp-scale", &b)],
            800,
            500,
        )
    }
}

/// Exact prefix sums of the family weight at the given checkpoints, in a
/// single compensated streaming pass. The singular family's table is zero
/// at odd n, so its sums run over even n by construction.
pub fn summatory_exact(
    spec: &FamilySpec,
    checkpoints: &[f64],
    t: &SpfTable,
) -> Result<Vec<(f64, Complex64)>> {
    if checkpoints.is_empty() {
        return Err(Error::Usage("summatory_exact: empty checkpoint list".into()));
    }
    let limit = checkpoints[checkpoints.len() - 1].floor() as u64;
    if limit > t.limit() {
        return Err(Error::Domain(format!(
            "summatory_exact: checkpoint {limit} exceeds sieve limit {}",
            t.limit()
        )));
    }
    let table = family_table(spec, limit, t)?;
    prefix_sums_at(limit, checkpoints, |n| table.value(n))
}

/// Measures the summatory error against a given main term over a 40-point
/// geometric grid from 10^3 to x_max.
pub fn error_profile(
    spec: &FamilySpec,
    x_max: f64,
    coeffs: &MainTermCoeffs,
    constant: Complex64,
    t: &SpfTable,
) -> Result<ErrorProfile> {
    if x_max < 2e3 {
        return Err(Error::Domain(format!("error_profile: x_max = {x_max} below 2e3")));
    }
    let mut grid: Vec<f64> = geometric_grid(1e3, x_max, 40)
        .into_iter()
        .map(|x| x.round())
        .collect();
    grid.dedup();
    let sums = summatory_exact(spec, &grid, t)?;
    let alpha_norm = spec.alpha.value().norm();
    let mut profile = ErrorProfile {
        spec: *spec,
        samples: Vec::with_capacity(sums.len()),
        env_mertens: Vec::new(),
        env_walfisz: Vec::new(),
        env_liu: Vec::new(),
        env_bp: Vec::new(),
    };
    for (x, exact) in sums {
        let main = coeffs.eval(x) + constant;
        profile.samples.push(SummatorySample {
            x,
            exact,
            main,
            error: exact - main,
        });
        let (m, w, l, b) = envelopes(x, alpha_norm);
        profile.env_mertens.push(m);
        profile.env_walfisz.push(w);
        profile.env_liu.push(l);
        profile.env_bp.push(b);
    }
    Ok(profile)
}

/// Window-averaged weighted least-squares fit of the family's summatory
/// main term; the averaging suppresses the bounded sawtooth oscillation
/// that otherwise contaminates the slowly-varying log columns.
pub fn fit_main_term(spec: &FamilySpec, x_max: u64, t: &SpfTable) -> Result<FitResult> {
    if x_max > t.limit() {
        return Err(Error::Domain(format!(
            "fit_main_term: x_max = {x_max} exceeds sieve limit {}",
            t.limit()
        )));
    }
    let table = family_table(spec, x_max, t)?;
    let samples = averaged_samples(x_max, |n| table.value(n));
    main_term_fit(spec, &samples)
}

/// Totient-summatory experiment: E(x) = sum_{n<=x} phi(n) - (3/pi^2) x^2.
#[derive(Debug, Clone)]
pub struct PhiExperiment {
    pub samples: Vec<SummatorySample>,
    /// max of |E|/(x log x) over the calibration range [10^3, 10^5]
    pub cap: f64,
    /// max of the same ratio over (10^5, x_max]
    pub sup_above: f64,
    /// sup_above <= cap: no excursion beyond the calibrated level
    pub cap_ok: bool,
    /// trend slope of |E| normalized by x (log x)^{2/3} (log log x)^{1/3}
    pub liu_slope: f64,
}

pub const PHI_MAIN_FACTOR: f64 = 3.0 / (std::f64::consts::PI * std::f64::consts::PI);

pub fn walfisz_phi_experiment(x_max: f64, t: &SpfTable) -> Result<PhiExperiment> {
    if x_max < 2e5 {
        return Err(Error::Domain(format!(
            "walfisz_phi_experiment: x_max = {x_max} below 2e5"
        )));
    }
    let mut grid: Vec<f64> = geometric_grid(1e3, x_max, 40)
        .into_iter()
        .map(|x| x.round())
        .collect();
    grid.dedup();
    let limit = x_max.floor() as u64;
    if limit > t.limit() {
        return Err(Error::Domain(format!(
            "walfisz_phi_experiment: x_max exceeds sieve limit {}",
            t.limit()
        )));
    }
    let phi = crate::sieve::phi_u64(t, limit);
    let sums = prefix_sums_at(limit, &grid, |n| Complex64::new(phi[n as usize] as f64, 0.0))?;
    let mut samples = Vec::with_capacity(sums.len());
    let mut cap_v = 0.0f64;
    let mut sup_above = 0.0f64;
    let mut liu_ratios = Vec::with_capacity(sums.len());
    let mut xs = Vec::with_capacity(sums.len());
    for (x, exact) in sums {
        let main = Complex64::new(PHI_MAIN_FACTOR * x * x, 0.0);
        let error = exact - main;
        let ratio = error.norm() / (x * x.ln());
        if x <= 1e5 {
            cap_v = cap_v.max(ratio);
        } else {
            sup_above = sup_above.max(ratio);
        }
        let (_, _, liu, _) = envelopes(x, 1.0);
        liu_ratios.push(error.norm() / liu);
        xs.push(x);
        samples.push(SummatorySample { x, exact, main, error });
    }
    Ok(PhiExperiment {
        samples,
        cap: cap_v,
        sup_above,
        cap_ok: sup_above <= cap_v,
        liu_slope: loglog_slope(&xs, &liu_ratios),
    })
}
