//! Verification suites and report-producing command bodies. Each suite
//! returns (all assertions passed, CSV body).

use crate::config::RunConfig;
use ntlab::dirichlet::main_term_selberg_delange;
use ntlab::error_lab::{error_profile, fit_main_term, walfisz_phi_experiment};
use ntlab::expsum::{
    exp_sum_direct, kusmin_landau_check, smooth_rough_split, squarefree_rough_sum,
    vaughan_sum_split, vaughan_terms, ExpSumRecord, SumWindow,
};
use ntlab::families::{family_table, Alpha, FamilyId, FamilySpec};
use ntlab::psi::{psi, vaaler_build};
use ntlab::report::csv_table;
use ntlab::sieve::{
    build_spf, dirichlet_convolve, sieve_classical, Classical, FunctionTable, PrimeList, SpfTable,
};
use ntlab::verify::{check_v1, check_v2, check_v3, check_v_kappa, geometric_grid, Verdict};
use ntlab::{Complex64, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHECK_HEADER: [&str; 5] = ["check", "detail", "statistic", "threshold", "pass"];

fn check_row(check: &str, detail: &str, stat: f64, threshold: f64) -> (bool, Vec<String>) {
    let pass = stat <= threshold;
    (
        pass,
        vec![
            check.to_string(),
            detail.to_string(),
            format!("{stat:.6e}"),
            format!("{threshold:.6e}"),
            pass.to_string(),
        ],
    )
}

pub fn suite_vaughan(_cfg: &RunConfig) -> Result<(bool, String)> {
    let t = build_spf(20_000)?;
    let mut rows = Vec::new();
    let mut all = true;
    for z in [10.0, 50.0] {
        let vt = vaughan_terms(10_000, z, &t)?;
        let mut worst = 0.0f64;
        for n in (z as u64 + 1)..=10_000 {
            let lam = vt.lambda[n as usize];
            worst = worst.max((vt.combined(n) - lam).abs() / lam.max(1.0));
        }
        let (ok, row) = check_row("identity", &format!("z={z}"), worst, 1e-9);
        all &= ok;
        rows.push(row);
    }
    let lam = sieve_classical(Classical::Lambda, 20_000, &t)?;
    for q in [1e6, 1e9] {
        let w = SumWindow::new(1e3, 2e3, q)?;
        let z = 1e3f64.powf(1.0 / 3.0);
        let (s1, s2, s3) = vaughan_sum_split(&w, z, &t)?;
        let direct = exp_sum_direct(&w, Some(&lam))?.value;
        let rel = (s1 - s2 + s3 - direct).norm() / direct.norm().max(1e-6);
        let (ok, row) = check_row("sum-split", &format!("Q={q}"), rel, 1e-8);
        all &= ok;
        rows.push(row);
    }
    Ok((all, csv_table(&CHECK_HEADER, &rows)))
}

pub fn suite_vaaler(_cfg: &RunConfig) -> Result<(bool, String)> {
    let mut rows = Vec::new();
    let mut all = true;
    for n in [5u32, 10, 50] {
        let v = vaaler_build(n)?;
        let mut coeff_slack = 0.0f64;
        for h in 1..=n as i64 {
            coeff_slack =
                coeff_slack.max(v.coeff(h).norm() * 2.0 * std::f64::consts::PI * h as f64 - 1.0);
        }
        let (ok, row) = check_row("coefficient-bound", &format!("N={n}"), coeff_slack, 0.0);
        all &= ok;
        rows.push(row);
        let mut err_slack = 0.0f64;
        let mut im_max = 0.0f64;
        for i in 0..2000 {
            let x = i as f64 / 2000.0;
            let approx = v.eval(x);
            im_max = im_max.max(approx.im.abs());
            err_slack = err_slack.max((psi(x) - approx.re).abs() - v.majorant(x));
        }
        let (ok, row) = check_row("majorant", &format!("N={n}"), err_slack, 1e-12);
        all &= ok;
        rows.push(row);
        let (ok, row) = check_row("realness", &format!("N={n}"), im_max, 1e-12);
        all &= ok;
        rows.push(row);
    }
    Ok((all, csv_table(&CHECK_HEADER, &rows)))
}

pub fn suite_kusmin(cfg: &RunConfig) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut all = true;
    let mut found = 0;
    while found < 100 {
        let p = rng.gen_range(50.0..1e5f64);
        let pp = p * rng.gen_range(1.2..2.0);
        let q = rng.gen_range(4.0..1e10f64);
        let Ok(w) = SumWindow::new(p, pp, q) else { continue };
        let Some((_, bound)) = kusmin_landau_check(&w) else { continue };
        let rec = exp_sum_direct(&w, None)?;
        let (ok, row) = check_row(
            "kusmin-landau",
            &format!("P={p:.1},Q={q:.1}"),
            rec.value.norm(),
            bound,
        );
        all &= ok;
        rows.push(row);
        found += 1;
    }
    Ok((all, csv_table(&CHECK_HEADER, &rows)))
}

pub fn suite_conditions(cfg: &RunConfig) -> Result<(bool, String)> {
    let limit = cfg.limit.min(1_000_000);
    let t = build_spf(limit)?;
    let primes = PrimeList::from_spf(&t);
    let grid = geometric_grid(100.0, limit as f64 * 0.9, 25);
    let mut all = true;
    let mut out = String::new();
    for a in [
        Alpha::real(1.0),
        Alpha::real(2.0),
        Alpha::real(-1.0),
        Alpha::real(0.5),
        Alpha::new(Complex64::new(0.0, 1.0))?,
    ] {
        let spec = FamilySpec::new(FamilyId::TauAlpha, a);
        let v = family_table(&spec, limit, &t)?;
        let reports = [
            check_v1(&v, &primes, &grid)?,
            check_v2(&v, &grid)?,
            check_v3(&v, &primes, &grid)?,
            check_v_kappa(&v, a.value().norm(), &grid)?,
        ];
        for r in reports {
            all &= r.verdict == Verdict::Bounded;
            let csv = r.csv();
            if out.is_empty() {
                out.push_str(&csv);
            } else {
                // keep a single header line
                out.push_str(csv.split_once('\n').map(|(_, b)| b).unwrap_or(""));
            }
        }
    }
    Ok((all, out))
}

pub fn suite_tau(cfg: &RunConfig) -> Result<(bool, String)> {
    let limit = cfg.limit.min(100_000);
    let t = build_spf(limit)?;
    let mut rows = Vec::new();
    let mut all = true;

    let tau_m1 = family_table(&FamilySpec::new(FamilyId::TauAlpha, Alpha::real(-1.0)), limit, &t)?;
    let mu = sieve_classical(Classical::Mu, limit, &t)?;
    let worst = (1..=limit)
        .map(|n| (tau_m1.value(n) - mu.value(n)).norm())
        .fold(0.0f64, f64::max);
    let (ok, row) = check_row("tau(-1)=mu", &format!("n<={limit}"), worst, 0.0);
    all &= ok;
    rows.push(row);

    let tau_2 = family_table(&FamilySpec::new(FamilyId::TauAlpha, Alpha::real(2.0)), limit, &t)?;
    let tau = sieve_classical(Classical::Tau, limit, &t)?;
    let worst = (1..=limit)
        .map(|n| (tau_2.value(n) - tau.value(n)).norm())
        .fold(0.0f64, f64::max);
    let (ok, row) = check_row("tau(2)=tau", &format!("n<={limit}"), worst, 0.0);
    all &= ok;
    rows.push(row);

    // convolution law tau_a * tau_b = tau_{a+b} on a smaller range
    let conv_limit = limit.min(10_000);
    let pairs = [
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
        (Complex64::new(-1.0, 0.0), Complex64::new(2.0, 0.0)),
        (Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)),
    ];
    for (a, b) in pairs {
        let ta = family_table(&FamilySpec::new(FamilyId::TauAlpha, Alpha::new(a)?), conv_limit, &t)?;
        let tb = family_table(&FamilySpec::new(FamilyId::TauAlpha, Alpha::new(b)?), conv_limit, &t)?;
        let tab =
            family_table(&FamilySpec::new(FamilyId::TauAlpha, Alpha::new(a + b)?), conv_limit, &t)?;
        let conv = dirichlet_convolve(&ta, &tb)?;
        let worst = (1..=conv_limit)
            .map(|n| (conv.value(n) - tab.value(n)).norm())
            .fold(0.0f64, f64::max);
        let (ok, row) = check_row("convolution", &format!("a={a},b={b}"), worst, 1e-9);
        all &= ok;
        rows.push(row);
    }
    Ok((all, csv_table(&CHECK_HEADER, &rows)))
}

pub fn suite_partition(cfg: &RunConfig) -> Result<(bool, String)> {
    let t = build_spf(40_000)?;
    let primes = PrimeList::from_spf(&t);
    let spec = FamilySpec::new(FamilyId::SigmaRatio, Alpha::real(1.0));
    let v = family_table(&spec, 40_000, &t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut all = true;
    for i in 0..10 {
        let p = rng.gen_range(3e3..2e4f64);
        let q = rng.gen_range(1e5..1e6f64);
        let w = SumWindow::new(p, p * rng.gen_range(1.5..2.0), q)?;
        let (s1, s2) = smooth_rough_split(&w, &v, &t)?;
        let direct = exp_sum_direct(&w, Some(&v))?.value;
        let rel = (s1 + s2 - direct).norm() / direct.norm().max(1.0);
        let (ok, row) = check_row("smooth-rough", &format!("window {i}"), rel, 1e-9);
        all &= ok;
        rows.push(row);
    }
    for i in 0..10 {
        let p = rng.gen_range(1e3..1e4f64);
        let q = rng.gen_range(1e5..1e8f64);
        let w = SumWindow::new(p, p * rng.gen_range(1.5..2.0), q)?;
        let nu = rng.gen_range(1..=3u32);
        let z = rng.gen_range(4.0..10.0);
        let (val, diag) = squarefree_rough_sum(&w, z, nu, &v, &t, &primes)?;
        let rel = (val - diag.direct).norm() / diag.direct.norm().max(1.0);
        let (ok, row) = check_row("squarefree-rough", &format!("window {i} nu={nu}"), rel, 1e-9);
        all &= ok;
        rows.push(row);
        let cells: u64 =
            diag.type1_cells.iter().sum::<u64>() + diag.type2_cells.iter().sum::<u64>();
        let (ok, row) = check_row(
            "cell-partition",
            &format!("window {i} nu={nu}"),
            (cells as f64 - diag.p_count as f64).abs(),
            0.0,
        );
        all &= ok;
        rows.push(row);
    }
    Ok((all, csv_table(&CHECK_HEADER, &rows)))
}

/// Dyadic-cell exponential sums [2^j, 2^{j+1}), lowest j first.
pub fn cmd_expsum(cfg: &RunConfig) -> Result<(bool, String)> {
    let mut out = String::from(ExpSumRecord::csv_header());
    out.push('\n');
    let mut j = 4u32;
    while (1u64 << (j + 1)) <= cfg.limit {
        let w = SumWindow::new((1u64 << j) as f64, (1u64 << (j + 1)) as f64, cfg.q)?;
        let rec = exp_sum_direct(&w, None)?;
        out.push_str(&rec.csv_row());
        out.push('\n');
        j += 1;
    }
    Ok((true, out))
}

pub struct ProfileOutput {
    pub pass: bool,
    pub csv: String,
    pub svg: Option<String>,
}

pub fn cmd_profile(cfg: &RunConfig, t: &SpfTable) -> Result<ProfileOutput> {
    let spec = cfg.family_spec()?;
    if spec.id == FamilyId::PhiRaw {
        let exp = walfisz_phi_experiment(cfg.limit as f64, t)?;
        let header = ["x", "exact", "main", "err_abs", "ratio_mertens"];
        let rows: Vec<Vec<String>> = exp
            .samples
            .iter()
            .map(|s| {
                vec![
                    format!("{}", s.x),
                    format!("{:.12e}", s.exact.re),
                    format!("{:.12e}", s.main.re),
                    format!("{:.12e}", s.error.norm()),
                    format!("{:.6e}", s.error.norm() / (s.x * s.x.ln())),
                ]
            })
            .collect();
        return Ok(ProfileOutput {
            pass: exp.cap_ok && exp.liu_slope <= 0.05,
            csv: csv_table(&header, &rows),
            svg: None,
        });
    }
    let fit = fit_main_term(&spec, cfg.limit, t)?;
    let profile = error_profile(&spec, cfg.limit as f64, &fit.coeffs, fit.constant, t)?;
    let pass = profile.samples.iter().all(|s| s.error.norm().is_finite());
    Ok(ProfileOutput {
        pass,
        csv: profile.csv(),
        svg: Some(profile.svg()),
    })
}

pub fn cmd_coeffs(cfg: &RunConfig, t: &SpfTable) -> Result<(bool, String)> {
    let spec = cfg.family_spec()?;
    let fit = fit_main_term(&spec, cfg.limit, t)?;
    let sd = main_term_selberg_delange(&spec, 100_000)?;
    let a = ntlab::dirichlet::coeffs_csv(&spec, "fit", &fit.coeffs, fit.condition, fit.rms_residual);
    let b = ntlab::dirichlet::coeffs_csv(&spec, "selberg-delange", &sd, 0.0, 0.0);
    let mut out = a;
    if let Some((_, body)) = b.split_once('\n') {
        out.push_str(body);
    }
    let rel = (fit.coeffs.linear - sd.linear).norm() / sd.linear.norm().max(1e-12);
    Ok((rel <= 0.02, out))
}

/// Builds (or reloads) the cached weight table for the configured family.
/// Returns (cache hit, path).
pub fn cmd_sieve(cfg: &RunConfig) -> Result<(bool, std::path::PathBuf)> {
    let spec = cfg.family_spec()?;
    std::fs::create_dir_all(&cfg.cache)?;
    let label = format!("{}:alpha={}", spec.id.name(), ntlab::report::fmt_complex(spec.alpha.value()));
    let fname: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    let path = cfg.cache.join(format!("{fname}_{}.ntft", cfg.limit));
    if path.exists() {
        match FunctionTable::load(&path) {
            Ok(cached) if cached.limit() == cfg.limit => return Ok((true, path)),
            Ok(_) => eprintln!("warning: cache {} has wrong limit; rebuilding", path.display()),
            Err(e) => eprintln!("warning: cache {} unreadable ({e}); rebuilding", path.display()),
        }
    }
    let t = build_spf(cfg.limit)?;
    let table = family_table(&spec, cfg.limit, &t)?;
    table.dump(&path)?;
    Ok((false, path))
}
