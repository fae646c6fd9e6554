//! Acceptance gate: twelve end-to-end criteria, one printed pass/fail
//! line each. Runs without the libtest harness so the lines are always
//! visible; the process exits nonzero when any criterion fails.

use ntlab::dirichlet::{main_term_selberg_delange, zeta_order};
use ntlab::error_lab::{
    error_profile, fit_main_term, summatory_exact, walfisz_phi_experiment, PHI_MAIN_FACTOR,
};
use ntlab::expsum::{
    exp_sum_direct, kusmin_landau_check, smooth_rough_split, squarefree_rough_sum,
    vaughan_sum_split, vaughan_terms, ExpSumRecord, SumWindow,
};
use ntlab::families::{cpow_pos, family_table, sfrak2, Alpha, FamilyId, FamilySpec};
use ntlab::kahan::KahanComplex;
use ntlab::psi::{psi, vaaler_build};
use ntlab::sieve::{build_spf, sieve_classical, Classical, PrimeList, SpfTable};
use ntlab::verify::{
    check_v1, check_v2, check_v3, check_v_kappa, geometric_grid, smooth_count, Verdict,
};
use ntlab::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::Instant;

const SEED: u64 = 42;

fn big_sieve() -> &'static SpfTable {
    static T: OnceLock<SpfTable> = OnceLock::new();
    T.get_or_init(|| build_spf(10_000_000).expect("sieve to 1e7"))
}

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 12] = [
        ("Vaughan identity exactness", c01),
        ("prime exponential-sum decomposition", c02),
        ("generalized divisor identities", c03),
        ("Dirichlet-series convergence", c04),
        ("sawtooth approximant properties", c05),
        ("Kusmin-Landau envelope", c06),
        ("partition exactness", c07),
        ("main-term cross-validation", c08),
        ("totient error surrogate", c09),
        ("smooth-count bound", c10),
        ("condition suite", c11),
        ("thread-count determinism", c12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f)
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(msg)
            });
        let dt = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:2}: PASS ({dt:6.1}s) {name}: {detail}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:2}: FAIL ({dt:6.1}s) {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} of 12 criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 12 criteria passed");
}

// 1. Vaughan identity exact for z in {10, 50} on (z, 1e4].
fn c01() -> Result<String, String> {
    let t = build_spf(10_000).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for z in [10.0, 50.0] {
        let vt = vaughan_terms(10_000, z, &t).map_err(|e| e.to_string())?;
        for n in (z as u64 + 1)..=10_000 {
            let lam = vt.lambda[n as usize];
            let err = (vt.combined(n) - lam).abs();
            if err > 1e-9 * lam.max(1.0) {
                return Err(format!("z={z} n={n}: residual {err}"));
            }
            worst = worst.max(err / lam.max(1.0));
        }
    }
    Ok(format!("max relative residual {worst:.2e}"))
}

// 2. S1 - S2 + S3 reconstructs the von Mangoldt window sum to 1e-8.
fn c02() -> Result<String, String> {
    let t = build_spf(20_000).map_err(|e| e.to_string())?;
    let lam = sieve_classical(Classical::Lambda, 20_000, &t).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for p in [1e3, 1e4] {
        for q in [1e6, 1e9] {
            let w = SumWindow::new(p, 2.0 * p, q).map_err(|e| e.to_string())?;
            let z = p.powf(1.0 / 3.0);
            let (s1, s2, s3) = vaughan_sum_split(&w, z, &t).map_err(|e| e.to_string())?;
            let direct = exp_sum_direct(&w, Some(&lam)).map_err(|e| e.to_string())?.value;
            let rel = (s1 - s2 + s3 - direct).norm() / direct.norm().max(1e-6);
            if rel > 1e-8 {
                return Err(format!("P={p} Q={q}: relative error {rel}"));
            }
            worst = worst.max(rel);
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}

// 3. tau_{-1} = mu and tau_2 = tau on [1, 1e5]; convolution law on [1, 1e4].
fn c03() -> Result<String, String> {
    let t = build_spf(100_000).map_err(|e| e.to_string())?;
    let tau_spec = |a: Complex64| FamilySpec::new(FamilyId::TauAlpha, Alpha::new(a).unwrap());
    let tm1 = family_table(&tau_spec(Complex64::new(-1.0, 0.0)), 100_000, &t)
        .map_err(|e| e.to_string())?;
    let mu = sieve_classical(Classical::Mu, 100_000, &t).map_err(|e| e.to_string())?;
    let t2 = family_table(&tau_spec(Complex64::new(2.0, 0.0)), 100_000, &t)
        .map_err(|e| e.to_string())?;
    let tau = sieve_classical(Classical::Tau, 100_000, &t).map_err(|e| e.to_string())?;
    for n in 1..=100_000u64 {
        if (tm1.value(n) - mu.value(n)).norm() > 1e-12 {
            return Err(format!("tau_-1({n}) != mu({n})"));
        }
        if (t2.value(n) - tau.value(n)).norm() > 1e-9 {
            return Err(format!("tau_2({n}) != tau({n})"));
        }
    }
    let pairs = [
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
        (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)),
        (Complex64::new(-1.0, 0.0), Complex64::new(2.0, 0.0)),
        (Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)),
    ];
    let mut worst = 0.0f64;
    for (a, b) in pairs {
        let ta = family_table(&tau_spec(a), 10_000, &t).map_err(|e| e.to_string())?;
        let tb = family_table(&tau_spec(b), 10_000, &t).map_err(|e| e.to_string())?;
        let tab = family_table(&tau_spec(a + b), 10_000, &t).map_err(|e| e.to_string())?;
        let conv = ntlab::sieve::dirichlet_convolve(&ta, &tb).map_err(|e| e.to_string())?;
        for n in 1..=10_000u64 {
            let err = (conv.value(n) - tab.value(n)).norm();
            if err > 1e-9 {
                return Err(format!("convolution a={a} b={b} n={n}: error {err}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!("identities exact, max convolution error {worst:.2e}"))
}

// 4. sum_{n<=1e6} tau_alpha(n)/n^2 within 1e-3 of zeta(2)^alpha.
fn c04() -> Result<String, String> {
    let t = build_spf(1_000_000).map_err(|e| e.to_string())?;
    let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
    let alphas = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let mut worst = 0.0f64;
    for a in alphas {
        let spec = FamilySpec::new(FamilyId::TauAlpha, Alpha::new(a).unwrap());
        let table = family_table(&spec, 1_000_000, &t).map_err(|e| e.to_string())?;
        let mut acc = KahanComplex::new();
        for n in 1..=1_000_000u64 {
            acc.add(table.value(n) / (n as f64 * n as f64));
        }
        let err = (acc.value() - cpow_pos(zeta2, a)).norm();
        if err > 1e-3 {
            return Err(format!("alpha={a}: |sum - zeta(2)^alpha| = {err}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("max deviation {worst:.2e}"))
}

// 5. coefficient bound exact; error majorant on a 1e4 grid, slack 1e-12.
fn c05() -> Result<String, String> {
    for n in [5u32, 10, 50] {
        let v = vaaler_build(n).map_err(|e| e.to_string())?;
        for h in 1..=n as i64 {
            let c = v.coeff(h);
            if c.norm() * 2.0 * std::f64::consts::PI * h as f64 > 1.0 {
                return Err(format!("N={n} h={h}: coefficient bound violated"));
            }
            if v.coeff(-h) != c.conj() {
                return Err(format!("N={n} h={h}: conjugate symmetry broken"));
            }
        }
        for i in 0..10_000 {
            let x = i as f64 / 10_000.0;
            let approx = v.eval(x);
            if approx.im.abs() > 1e-12 {
                return Err(format!("N={n} x={x}: imaginary part {}", approx.im));
            }
            let err = (psi(x) - approx.re).abs();
            let maj = v.majorant(x);
            if err > maj + 1e-12 {
                return Err(format!("N={n} x={x}: {err} > majorant {maj}"));
            }
        }
    }
    Ok("bounds hold for N in {5, 10, 50}".into())
}

// 6. |S| <= 1/lambda + 1 on 100 seeded applicable windows, Q <= 1e10.
fn c06() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut found = 0;
    let mut worst = 0.0f64;
    while found < 100 {
        let p = rng.gen_range(50.0..1e5f64);
        let pp = p * rng.gen_range(1.2..2.0);
        let q = rng.gen_range(4.0..1e10f64);
        let Ok(w) = SumWindow::new(p, pp, q) else { continue };
        let Some((lambda, bound)) = kusmin_landau_check(&w) else { continue };
        let rec = exp_sum_direct(&w, None).map_err(|e| e.to_string())?;
        if rec.value.norm() > bound {
            return Err(format!(
                "P={p:.1} Q={q:.1} lambda={lambda:.3e}: |S| = {} > {bound}",
                rec.value.norm()
            ));
        }
        worst = worst.max(rec.value.norm() / bound);
        found += 1;
    }
    Ok(format!("100 windows, max |S|/bound = {worst:.3}"))
}

// 7. smooth/rough and square-free-rough partitions reconstruct the direct
// sums to 1e-9 relative on 20 seeded windows, P <= 1e5.
fn c07() -> Result<String, String> {
    let t = build_spf(200_000).map_err(|e| e.to_string())?;
    let primes = PrimeList::from_spf(&t);
    let spec = FamilySpec::new(FamilyId::SigmaRatio, Alpha::real(1.0));
    let v = family_table(&spec, 200_000, &t).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let p = rng.gen_range(3e3..1e5f64);
        let q = rng.gen_range(1e5..1e6f64);
        let w = SumWindow::new(p, p * rng.gen_range(1.5..2.0), q).map_err(|e| e.to_string())?;
        let (s1, s2) = smooth_rough_split(&w, &v, &t).map_err(|e| e.to_string())?;
        let direct = exp_sum_direct(&w, Some(&v)).map_err(|e| e.to_string())?.value;
        let rel = (s1 + s2 - direct).norm() / direct.norm().max(1.0);
        if rel > 1e-9 {
            return Err(format!("smooth/rough window {i}: relative error {rel}"));
        }
        worst = worst.max(rel);
    }
    for i in 0..10 {
        let p = rng.gen_range(1e3..1e5f64);
        let q = rng.gen_range(1e5..1e8f64);
        let w = SumWindow::new(p, p * rng.gen_range(1.5..2.0), q).map_err(|e| e.to_string())?;
        let nu = rng.gen_range(1..=3u32);
        let z = rng.gen_range(4.0..10.0);
        let (val, diag) =
            squarefree_rough_sum(&w, z, nu, &v, &t, &primes).map_err(|e| e.to_string())?;
        let rel = (val - diag.direct).norm() / diag.direct.norm().max(1.0);
        if rel > 1e-9 {
            return Err(format!("square-free window {i} nu={nu}: relative error {rel}"));
        }
        let cells: u64 =
            diag.type1_cells.iter().sum::<u64>() + diag.type2_cells.iter().sum::<u64>();
        if cells != diag.p_count {
            return Err(format!("window {i}: cells {cells} != tuples {}", diag.p_count));
        }
        worst = worst.max(rel);
    }
    Ok(format!("20 windows, max relative error {worst:.2e}"))
}

// 8. fitted linear coefficient vs zeta(2)^alpha * (Euler product): 1% for
// phi_ratio and sigma_ratio at alpha in {1, -1}; 2% for singular at 1.
fn c08() -> Result<String, String> {
    let t = big_sieve();
    let x_max = 10_000_000u64;
    let mut worst: (f64, String) = (0.0, String::new());
    let cases = [
        (FamilyId::PhiRatio, 1.0, 0.01, 1.0),
        (FamilyId::PhiRatio, -1.0, 0.01, 1.0),
        (FamilyId::SigmaRatio, 1.0, 0.01, 1.0),
        (FamilyId::SigmaRatio, -1.0, 0.01, 1.0),
        (FamilyId::Singular, 1.0, 0.02, 0.5),
    ];
    for (id, a, tol, density) in cases {
        let spec = FamilySpec::new(id, Alpha::real(a));
        let fit = fit_main_term(&spec, x_max, t).map_err(|e| e.to_string())?;
        let sd = main_term_selberg_delange(&spec, 100_000).map_err(|e| e.to_string())?;
        // the even-only singular family carries sfrak2^alpha and lives on
        // half the integers; its analytic candidate scales accordingly
        let mut want = sd.linear * density;
        if id == FamilyId::Singular {
            want *= cpow_pos(sfrak2(), spec.alpha.value());
        }
        let rel = (fit.coeffs.linear - want).norm() / want.norm();
        if rel > tol {
            return Err(format!(
                "{} alpha={a}: fitted {} vs analytic {} ({rel:.3} relative)",
                id.name(),
                fit.coeffs.linear,
                want
            ));
        }
        if rel > worst.0 {
            worst = (rel, format!("{} alpha={a}", id.name()));
        }
    }
    Ok(format!("worst agreement {:.2e} ({})", worst.0, worst.1))
}

// 9. totient summatory: frozen-cap Mertens surrogate, Liu-trend slope,
// and the exact anchor E(10).
fn c09() -> Result<String, String> {
    let t = big_sieve();
    let exp = walfisz_phi_experiment(1e7, t).map_err(|e| e.to_string())?;
    if !exp.cap_ok {
        return Err(format!(
            "sup |E|/(x log x) = {} on [1e5, 1e7] exceeds calibrated cap {}",
            exp.sup_above, exp.cap
        ));
    }
    if exp.liu_slope > 0.05 {
        return Err(format!("Liu-normalized trend slope {} > 0.05", exp.liu_slope));
    }
    let spec = FamilySpec::new(FamilyId::PhiRaw, Alpha::real(1.0));
    let s10 = summatory_exact(&spec, &[10.0], t).map_err(|e| e.to_string())?[0].1;
    let e10 = s10.re - PHI_MAIN_FACTOR * 100.0;
    if (e10 - 1.6036).abs() >= 5e-5 {
        return Err(format!("E(10) = {e10}, expected 1.6036"));
    }
    Ok(format!(
        "cap {:.4} respected (sup {:.4}), slope {:.3}, E(10) = {e10:.4}",
        exp.cap, exp.sup_above, exp.liu_slope
    ))
}

// 10. smooth counts below the de Bruijn-shaped bound on a gated 10x10 grid.
fn c10() -> Result<String, String> {
    let t = big_sieve();
    let xs = geometric_grid(1e6, 1e7, 10);
    // per-x gated y-window, 10 geometric points strictly inside it
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    for &x in &xs {
        let lx = x.ln();
        let lo = lx * lx * 1.0001;
        let hi = (lx / lx.ln()).exp() * 0.9999;
        pairs.push((x, geometric_grid(lo, hi, 10)));
    }
    // single ascending pass with threshold buckets
    let mut thresholds: Vec<f64> = pairs.iter().flat_map(|(_, ys)| ys.iter().copied()).collect();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thresholds.dedup();
    let t_max = *thresholds.last().unwrap();
    let mut buckets = vec![0u64; thresholds.len()];
    let mut n = 2u64;
    let mut worst = 0.0f64;
    let mut first_cell: Option<u64> = None;
    for (x, ys) in &pairs {
        let hi = x.floor() as u64;
        while n <= hi {
            let m = t.p_max(n) as f64;
            if m <= t_max {
                let k = thresholds.partition_point(|&th| th < m);
                buckets[k] += 1;
            }
            n += 1;
        }
        let prefix: Vec<u64> = buckets
            .iter()
            .scan(0u64, |acc, &b| {
                *acc += b;
                Some(*acc)
            })
            .collect();
        for &y in ys {
            let k = thresholds.partition_point(|&th| th <= y);
            let count = prefix[k - 1] + 1; // + n = 1
            if first_cell.is_none() {
                first_cell = Some(count);
            }
            let u = x.ln() / y.ln();
            let bound = x * (-0.5 * u * u.ln()).exp();
            if count as f64 > bound {
                return Err(format!("x={x:.3e} y={y:.1}: count {count} > bound {bound:.1}"));
            }
            worst = worst.max(count as f64 / bound);
        }
    }
    // tie one cell to the reference counting routine
    let (x0, ys0) = &pairs[0];
    let oracle = smooth_count(*x0, ys0[0], t).map_err(|e| e.to_string())?;
    if first_cell != Some(oracle) {
        return Err(format!(
            "bucketed count {first_cell:?} disagrees with reference {oracle}"
        ));
    }
    Ok(format!("100 gated cells, max count/bound = {worst:.3}"))
}

// 11. V1/V2/V3 minimal-C curves and the kappa-ratio stay bounded for
// tau_alpha, alpha in {1, 2, -1, 1/2, i}, on x <= 1e7.
fn c11() -> Result<String, String> {
    let t = big_sieve();
    let primes = PrimeList::from_spf(t);
    let grid = geometric_grid(100.0, 9e6, 25);
    for a in [
        Alpha::real(1.0),
        Alpha::real(2.0),
        Alpha::real(-1.0),
        Alpha::real(0.5),
        Alpha::new(Complex64::new(0.0, 1.0)).unwrap(),
    ] {
        let spec = FamilySpec::new(FamilyId::TauAlpha, a);
        let v = family_table(&spec, 10_000_000, t).map_err(|e| e.to_string())?;
        let reports = [
            check_v1(&v, &primes, &grid).map_err(|e| e.to_string())?,
            check_v2(&v, &grid).map_err(|e| e.to_string())?,
            check_v3(&v, &primes, &grid).map_err(|e| e.to_string())?,
            check_v_kappa(&v, a.value().norm(), &grid).map_err(|e| e.to_string())?,
        ];
        for r in reports {
            if r.verdict != Verdict::Bounded {
                return Err(format!(
                    "alpha={}: {} shows a growing trend",
                    a.value(),
                    r.condition.name()
                ));
            }
        }
    }
    Ok("all 20 condition curves bounded".into())
}

// 12. representative CSVs from the criteria pipelines are byte-identical
// across thread counts {1, 4, 8} with the fixed seed.
fn c12() -> Result<String, String> {
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        let bytes = pool.install(determinism_bundle).map_err(|e| e.to_string())?;
        outputs.push(bytes);
    }
    if outputs[0] != outputs[1] || outputs[0] != outputs[2] {
        return Err("CSV bytes differ across thread counts".into());
    }
    Ok(format!("{} bundle bytes identical across 1/4/8 threads", outputs[0].len()))
}

/// Desk-scale rerun of the criteria pipelines that produce CSV artifacts:
/// exponential-sum records, a main-term fit and error profile, and a
/// condition report.
fn determinism_bundle() -> ntlab::Result<Vec<u8>> {
    let mut out = String::new();

    out.push_str(ExpSumRecord::csv_header());
    out.push('\n');
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..10 {
        let p = rng.gen_range(1e3..5e4f64);
        let q = rng.gen_range(1e6..1e10f64);
        let w = SumWindow::new(p, 2.0 * p, q)?;
        out.push_str(&exp_sum_direct(&w, None)?.csv_row());
        out.push('\n');
    }

    let t = build_spf(1_000_000)?;
    let spec = FamilySpec::new(FamilyId::PhiRatio, Alpha::real(1.0));
    let fit = fit_main_term(&spec, 1_000_000, &t)?;
    let profile = error_profile(&spec, 1e6, &fit.coeffs, fit.constant, &t)?;
    out.push_str(&profile.csv());
    out.push_str(&ntlab::dirichlet::coeffs_csv(
        &spec,
        "fit",
        &fit.coeffs,
        fit.condition,
        fit.rms_residual,
    ));

    let primes = PrimeList::from_spf(&t);
    let grid = geometric_grid(100.0, 9e5, 20);
    let tau_i = family_table(
        &FamilySpec::new(FamilyId::TauAlpha, Alpha::new(Complex64::new(0.0, 1.0))?),
        1_000_000,
        &t,
    )?;
    out.push_str(&check_v1(&tau_i, &primes, &grid)?.csv());
    out.push_str(&check_v2(&tau_i, &grid)?.csv());
    let _ = zeta_order(&spec);
    Ok(out.into_bytes())
}
