//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see them).
//!
//! The Monte Carlo criteria pin their protocols (model, sample size, seed
//! count, tolerances) in code; nothing is calibrated at run time.

use std::time::Instant;

use adavol_core::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn pass(n: u32, name: &str, details: &str) {
    println!("acceptance {n:02} {name}: PASS ({details})");
}

fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| -> f64 {
        let idx = p * (v.len() - 1) as f64;
        let (lo, hi) = (idx.floor() as usize, idx.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (idx - lo as f64)
    };
    (q(0.25), q(0.5), q(0.75))
}

fn flatten(params: &ModelParams) -> Vec<f64> {
    match params {
        ModelParams::Full(p) => {
            let mut v = vec![p.omega];
            v.extend(&p.alpha);
            v.extend(&p.beta);
            v
        }
        ModelParams::Vte(p) => {
            let mut v = p.alpha.clone();
            v.extend(&p.beta);
            v
        }
    }
}

fn unflatten(template: &ModelParams, flat: &[f64]) -> ModelParams {
    match template {
        ModelParams::Full(p) => ModelParams::Full(GarchParams::new(
            flat[0],
            flat[1..1 + p.alpha.len()].to_vec(),
            flat[1 + p.alpha.len()..].to_vec(),
        )),
        ModelParams::Vte(p) => ModelParams::Vte(VteParams::new(
            flat[..p.alpha.len()].to_vec(),
            flat[p.alpha.len()..].to_vec(),
            p.gamma2,
        )),
    }
}

/// Criterion 1: analytic batch gradients match central finite differences
/// (h = 1e-6) to relative 1e-5 on 100 random interior cases, within 10 s.
#[test]
fn criterion_01_gradient_matches_finite_differences() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let arch = case % 2 == 0;
        let order = if arch { ModelOrder::new(1, 0) } else { ModelOrder::new(1, 1) }.unwrap();
        // interior draws: at least 10 h away from every constraint
        let alpha = 0.05 + 0.5 * rng.random::<f64>();
        let beta = if arch { 0.0 } else { 0.05 + 0.35 * rng.random::<f64>() };
        let omega = 0.1 + 1.4 * rng.random::<f64>();
        let truth = GarchParams::new(omega, vec![alpha], if arch { vec![] } else { vec![beta] });
        let sim = simulate(&truth, 50, 100, 4242 + case as u64).unwrap();
        let params = if case % 4 < 2 {
            ModelParams::Full(truth.clone())
        } else {
            ModelParams::Vte(VteParams::new(
                truth.alpha.clone(),
                truth.beta.clone(),
                truth.long_run_variance().unwrap(),
            ))
        };
        let (_, grad) = batch_loss(&sim.returns, &params).unwrap();
        let flat = flatten(&params);
        for k in 0..flat.len() {
            let mut up = flat.clone();
            let mut dn = flat.clone();
            up[k] += h;
            dn[k] -= h;
            let (lu, _) = batch_loss(&sim.returns, &unflatten(&params, &up)).unwrap();
            let (ld, _) = batch_loss(&sim.returns, &unflatten(&params, &dn)).unwrap();
            let fd = (lu - ld) / (2.0 * h);
            let rel = (grad[k] - fd).abs() / fd.abs().max(1.0);
            worst = worst.max(rel);
            assert!(
                rel < 1e-5,
                "case {case} component {k}: analytic {} vs fd {fd} (rel {rel:.3e})",
                grad[k]
            );
        }
        assert_eq!(order.dim_vte(), truth.alpha.len() + truth.beta.len());
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}, budget 10 s");
    pass(1, "gradient vs finite differences", &format!("worst rel err {worst:.2e}, {elapsed:?}"));
}

/// Criterion 2: ARCH(1) per-step Hessian eigenvalues match the closed form
/// (0, (1 + X2_{t-1}^2)(2 X_t^2 - sigma2) / (2 sigma2^3)) to 1e-10 on 1000
/// random points.
#[test]
fn criterion_02_arch1_hessian_eigenvalues_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let omega = 0.05 + rng.random::<f64>();
        let alpha = rng.random::<f64>() * 0.95;
        let x_prev: f64 = rng.sample::<f64, _>(StandardNormal) * 1.5;
        let x: f64 = rng.sample::<f64, _>(StandardNormal) * 1.5;
        let v = omega + alpha * x_prev * x_prev;
        let dv = [1.0, x_prev * x_prev];
        let hess = loss_hessian(x, v, &dv, &SymMatrix::zeros(2)).unwrap();
        let lambda = (1.0 + x_prev.powi(4)) * (2.0 * x * x - v) / (2.0 * v.powi(3));
        let mut expect = vec![0.0, lambda];
        expect.sort_by(|a, b| a.total_cmp(b));
        let eig = hess.eigenvalues();
        for (e, t) in eig.iter().zip(&expect) {
            let err = (e - t).abs() / t.abs().max(1.0);
            worst = worst.max(err);
            assert!(err <= 1e-10, "eigenvalues {eig:?} vs {expect:?}");
        }
    }
    pass(2, "ARCH(1) Hessian eigenvalues", &format!("worst rel err {worst:.2e}"));
}

/// Dykstra alternating projections between the half-space and the orthant:
/// an independent route to the same Euclidean projection.
fn dykstra_project(v: &[f64], cap: f64, iters: usize) -> Vec<f64> {
    let d = v.len();
    let mut x = v.to_vec();
    let mut p = vec![0.0; d];
    let mut q = vec![0.0; d];
    for _ in 0..iters {
        let y: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let excess = (y.iter().sum::<f64>() - cap).max(0.0) / d as f64;
        let xh: Vec<f64> = y.iter().map(|a| a - excess).collect();
        for i in 0..d {
            p[i] = y[i] - xh[i];
        }
        let z: Vec<f64> = xh.iter().zip(&q).map(|(a, b)| a + b).collect();
        x = z.iter().map(|a| a.max(0.0)).collect();
        for i in 0..d {
            q[i] = z[i] - x[i];
        }
    }
    x
}

/// Criterion 3: capped-simplex projection matches the Dykstra oracle to
/// 1e-8 on 1000 random vectors of dimension <= 4.
#[test]
fn criterion_03_projection_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d = rng.random_range(1..=4);
        let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let cap = 0.2 + rng.random::<f64>();
        let ours = project(&v, cap);
        let oracle = dykstra_project(&v, cap, 20_000);
        for (a, b) in ours.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
            assert!((a - b).abs() <= 1e-8, "{ours:?} vs {oracle:?} for {v:?} cap {cap}");
        }
    }
    pass(3, "projection vs Dykstra oracle", &format!("worst abs err {worst:.2e}"));
}

/// Criterion 4: easy-regime recovery. ARCH(1) truth (2.0, 0.6), streaming
/// start alpha = 0.4, n = 20000: final alpha within 0.05 and implied omega
/// within 15% for at least 90 of 100 seeds, within 60 s.
#[test]
fn criterion_04_easy_regime_recovery() {
    let started = Instant::now();
    let truth = GarchParams::arch(2.0, vec![0.6]);
    let mut hits = 0;
    for seed in 0..100u64 {
        let sim = simulate(&truth, 20_000, 1000, seed).unwrap();
        let cfg = AdaVolConfig::new(ModelOrder::new(1, 0).unwrap());
        let (out, state) = run_stream(&sim.returns, &[0.4], cfg).unwrap();
        let alpha = out.theta_track.last().unwrap()[0];
        let omega = state.implied_omega();
        if (alpha - 0.6).abs() < 0.05 && (omega - 2.0).abs() / 2.0 < 0.15 {
            hits += 1;
        }
    }
    let elapsed = started.elapsed();
    assert!(hits >= 90, "only {hits}/100 seeds recovered (need 90)");
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60 s");
    pass(4, "easy-regime recovery", &format!("{hits}/100 seeds, {elapsed:?}"));
}

/// Criterion 5: small-intercept regime, ARCH(1) truth (1e-8, 0.6), shared
/// start (5e-8, 0.4), n = 20000, 100 seeds. Directional claims under test:
/// the streaming estimator's final-alpha IQR is strictly smaller than the
/// rolling baseline's, and the baseline's median omega underestimates the
/// true 1e-8. Each refit restarts from the shared start vector.
#[test]
fn criterion_05_small_omega_directional_claims() {
    let truth = GarchParams::arch(1e-8, vec![0.6]);
    let sched = RefitSchedule { increment: 2000, warm_start: false };
    let opts = FitOptions::default();
    let (mut stream_alpha, mut batch_alpha, mut batch_omega) = (vec![], vec![], vec![]);
    for seed in 0..100u64 {
        let sim = simulate(&truth, 20_000, 1000, seed).unwrap();
        let cfg = AdaVolConfig::new(ModelOrder::new(1, 0).unwrap());
        let (out, _) = run_stream(&sim.returns, &[0.4], cfg).unwrap();
        stream_alpha.push(out.theta_track.last().unwrap()[0]);
        let start = ModelParams::Full(GarchParams::arch(5e-8, vec![0.4]));
        let roll = rolling_refit(&sim.returns, &start, &sched, &opts).unwrap();
        let ModelParams::Full(p) = &roll.blocks.last().unwrap().outcome.params else {
            unreachable!()
        };
        batch_alpha.push(p.alpha[0]);
        batch_omega.push(p.omega);
    }
    let (s25, _, s75) = quartiles(&stream_alpha);
    let (b25, _, b75) = quartiles(&batch_alpha);
    let (_, omega_median, _) = quartiles(&batch_omega);
    let stream_iqr = s75 - s25;
    let batch_iqr = b75 - b25;
    let details = format!(
        "stream alpha IQR {stream_iqr:.4}, batch alpha IQR {batch_iqr:.4}, \
         batch omega median {omega_median:.3e} (truth 1e-8)"
    );
    assert!(
        stream_iqr < batch_iqr && omega_median < 1e-8,
        "directional claims not reproduced: {details}. A quasi-Newton baseline \
         driven by exact analytic gradients converges tightly here; the claimed \
         ordering emerges only when the baseline's gradients are approximated \
         by finite differences whose absolute step is comparable to the \
         intercept's scale."
    );
    pass(5, "small-omega directional claims", &details);
}

/// Criterion 6: GARCH(1,1) recovery. Truth (1e-8, 0.2, 0.7), streaming start
/// (0.1, 0.8), n = 20000: mean final (alpha, beta) within 0.1 componentwise
/// over 100 seeds.
#[test]
fn criterion_06_garch11_recovery() {
    let truth = GarchParams::new(1e-8, vec![0.2], vec![0.7]);
    let (mut sum_a, mut sum_b) = (0.0, 0.0);
    for seed in 0..100u64 {
        let sim = simulate(&truth, 20_000, 1000, seed).unwrap();
        let cfg = AdaVolConfig::new(ModelOrder::new(1, 1).unwrap());
        let (out, _) = run_stream(&sim.returns, &[0.1, 0.8], cfg).unwrap();
        let theta = out.theta_track.last().unwrap();
        sum_a += theta[0];
        sum_b += theta[1];
    }
    let (mean_a, mean_b) = (sum_a / 100.0, sum_b / 100.0);
    assert!((mean_a - 0.2).abs() < 0.1, "mean alpha {mean_a}");
    assert!((mean_b - 0.7).abs() < 0.1, "mean beta {mean_b}");
    pass(6, "GARCH(1,1) recovery", &format!("mean alpha {mean_a:.4}, mean beta {mean_b:.4}"));
}

/// Criterion 7: quantile-score parity. 100 runs with random truth and random
/// shared start (ARCH(1), n = 20000): the median cumulative quantile scores
/// of the two methods differ by at most 5%.
#[test]
fn criterion_07_quantile_score_parity() {
    let order = ModelOrder::new(1, 0).unwrap();
    let grid = default_alpha_grid();
    let sched = RefitSchedule { increment: 2000, warm_start: false };
    let opts = FitOptions::default();
    let (mut qs_stream, mut qs_batch) = (vec![], vec![]);
    for seed in 0..100u64 {
        let truth = random_params(order, 1000 + seed);
        let start = random_params(order, 5000 + seed);
        let sim = simulate(&truth, 20_000, 1000, seed).unwrap();
        let cfg = AdaVolConfig::new(order);
        let (out, _) = run_stream(&sim.returns, &[start.alpha[0]], cfg).unwrap();
        let vol: Vec<f64> = out.vol2_track.iter().map(|v| v.sqrt()).collect();
        qs_stream.push(qs_score(&sim.returns, &vol, &grid).unwrap());
        let roll =
            rolling_refit(&sim.returns, &ModelParams::Full(start), &sched, &opts).unwrap();
        let vol: Vec<f64> = roll.vol2.iter().map(|v| v.sqrt()).collect();
        qs_batch.push(qs_score(&sim.returns, &vol, &grid).unwrap());
    }
    let (_, med_stream, _) = quartiles(&qs_stream);
    let (_, med_batch, _) = quartiles(&qs_batch);
    let gap = (med_stream - med_batch).abs() / med_batch;
    assert!(gap <= 0.05, "median QS gap {gap:.4} exceeds 5%");
    pass(
        7,
        "quantile-score parity",
        &format!("median QS stream {med_stream:.5} vs batch {med_batch:.5}, gap {:.2}%", gap * 100.0),
    );
}

/// Criterion 8: with the standard recursion the streaming mean and variance
/// equal the direct sample statistics to relative 1e-10 on length-1e4
/// streams.
#[test]
fn criterion_08_streaming_statistics_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst: f64 = 0.0;
    for case in 0..5i32 {
        let scale = 10f64.powi(-case);
        let xs: Vec<f64> = (0..10_000)
            .map(|_| rng.sample::<f64, _>(StandardNormal) * scale + 0.1 * scale)
            .collect();
        let mut m = StreamingMoments::new(MeanRecursion::Standard);
        for &x in &xs {
            m.update(x);
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let e_mean = (m.mean() - mean).abs() / mean.abs().max(1e-300);
        let e_var = (m.var() - var).abs() / var.abs().max(1e-300);
        worst = worst.max(e_mean).max(e_var);
        assert!(e_mean <= 1e-10, "mean rel err {e_mean:.3e}");
        assert!(e_var <= 1e-10, "variance rel err {e_var:.3e}");
    }
    pass(8, "streaming statistics exactness", &format!("worst rel err {worst:.2e}"));
}

/// Criterion 9: with omega = gamma2 (1 - persistence) and consistently
/// seeded lags, the two parameterizations filter identical variances to
/// relative 1e-12.
#[test]
fn criterion_09_vte_full_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let (p, q) = if case % 2 == 0 { (1, 1) } else { (2, 2) };
        let order = ModelOrder::new(p, q).unwrap();
        let alpha: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * 0.3 / p as f64).collect();
        let beta: Vec<f64> = (0..q).map(|_| rng.random::<f64>() * 0.5 / q as f64).collect();
        let gamma2 = 0.1 + rng.random::<f64>();
        let vte = VteParams::new(alpha, beta, gamma2);
        let full = vte.to_full();
        let mut st_vte = FilterState::vte(order, gamma2);
        let mut st_full = FilterState::with_fills(order, Mode::Full, gamma2, gamma2);
        for _ in 0..500 {
            let x: f64 = rng.sample(StandardNormal);
            let v_vte = st_vte.variance_step_vte(&vte);
            let v_full = st_full.variance_step_full(&full);
            let rel = (v_vte - v_full).abs() / v_full.abs().max(1e-300);
            worst = worst.max(rel);
            assert!(rel <= 1e-12, "case {case}: {v_vte} vs {v_full}");
            st_vte.observe(x);
            st_full.observe(x);
        }
    }
    pass(9, "VTE/full filter equivalence", &format!("worst rel err {worst:.2e}"));
}

/// Criterion 10: relative speed. GARCH(1,1), streaming protocol (a batch
/// re-fit on every growing prefix vs one streaming pass): ratio >= 50 at
/// n = 1000, and the ratio does not shrink from n = 1000 to n = 2000.
#[test]
fn criterion_10_relative_speed() {
    let truth = GarchParams::new(1e-6, vec![0.2], vec![0.7]);
    let sim = simulate(&truth, 2000, 500, 10_000).unwrap();
    let start_full = ModelParams::Full(GarchParams::new(5e-7, vec![0.1], vec![0.8]));
    let order = ModelOrder::new(1, 1).unwrap();
    let mut ratios = Vec::new();
    for n in [1000usize, 2000] {
        let series = &sim.returns[..n];
        let inner = 20;
        let t0 = Instant::now();
        for _ in 0..inner {
            let cfg = AdaVolConfig::new(order);
            run_stream(series, &[0.1, 0.8], cfg).unwrap();
        }
        let stream_secs = t0.elapsed().as_secs_f64() / inner as f64;
        let t0 = Instant::now();
        streaming_refit_pass(series, &start_full, &FitOptions::default()).unwrap();
        let batch_secs = t0.elapsed().as_secs_f64();
        ratios.push(batch_secs / stream_secs);
    }
    assert!(ratios[0] >= 50.0, "speed ratio at n=1000 is {:.1} (need >= 50)", ratios[0]);
    assert!(
        ratios[1] >= ratios[0],
        "ratio should grow with n: {:.1} (n=1000) vs {:.1} (n=2000)",
        ratios[0],
        ratios[1]
    );
    pass(
        10,
        "relative speed",
        &format!("ratio {:.0} at n=1000, {:.0} at n=2000", ratios[0], ratios[1]),
    );
}

/// Criterion 11: price ingestion round-trips to 1e-10, and on simulated
/// GARCH(1,1) data the streaming estimator's MAE stays within 1.1x the
/// rolling baseline's on average over 50 seeds.
#[test]
fn criterion_11_ingestion_roundtrip_and_mae() {
    // ingestion round-trip on a synthetic closing-price file
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    let mut body = String::from("date,close\n");
    let mut price = 250.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut closes = vec![price];
    for day in 0..500 {
        price *= (0.02 * rng.sample::<f64, _>(StandardNormal)).exp();
        closes.push(price);
        let d = chrono::NaiveDate::from_num_days_from_ce_opt(735000 + day).unwrap();
        body.push_str(&format!("{d},{price:.12e}\n"));
    }
    // day 0 row goes first
    let first = chrono::NaiveDate::from_num_days_from_ce_opt(734999).unwrap();
    let body = format!("date,close\n{first},{:.12e}\n{}", closes[0], &body["date,close\n".len()..]);
    std::fs::write(&path, body).unwrap();
    let prices = load_prices(&path, &CsvFormat::default()).unwrap();
    let returns = log_returns(&prices).unwrap();
    let mut rebuilt = prices.close[0];
    let mut worst: f64 = 0.0;
    for (i, r) in returns.returns.iter().enumerate() {
        rebuilt *= r.exp();
        let rel = (rebuilt - prices.close[i + 1]).abs() / prices.close[i + 1];
        worst = worst.max(rel);
        assert!(rel <= 1e-10, "round-trip drift {rel:.3e} at step {i}");
    }

    // MAE comparison on simulated data
    let order = ModelOrder::new(1, 1).unwrap();
    let sched = RefitSchedule { increment: 2000, warm_start: false };
    let opts = FitOptions::default();
    let (mut mae_stream, mut mae_batch) = (0.0, 0.0);
    for seed in 0..50u64 {
        let truth = random_params(order, 7000 + seed);
        let start = random_params(order, 9000 + seed);
        let sim = simulate(&truth, 10_000, 1000, seed).unwrap();
        let cfg = AdaVolConfig::new(order);
        let theta0 = [start.alpha[0], start.beta[0]];
        let (out, _) = run_stream(&sim.returns, &theta0, cfg).unwrap();
        mae_stream += mae_var(&sim.returns, &out.vol2_track).unwrap();
        let roll =
            rolling_refit(&sim.returns, &ModelParams::Full(start), &sched, &opts).unwrap();
        mae_batch += mae_var(&sim.returns, &roll.vol2).unwrap();
    }
    let ratio = mae_stream / mae_batch;
    assert!(ratio <= 1.1, "mean MAE ratio {ratio:.4} exceeds 1.1");
    pass(
        11,
        "ingestion round-trip and MAE comparison",
        &format!("round-trip worst {worst:.2e}, MAE ratio {ratio:.4}"),
    );
}
