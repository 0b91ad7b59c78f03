//! `adavol bench`: relative speed comparison between one streaming pass and
//! the streaming-protocol batch baseline (a re-fit on every growing prefix,
//! warm-started). Only estimation time is measured; simulation and I/O stay
//! outside the clocks. Ratios are normalized so the fastest method reads
//! 1.00.

use std::process::ExitCode;
use std::time::Instant;

use adavol_core::{
    run_stream, simulate, streaming_refit_pass, AdaVolConfig, FitOptions, GarchParams,
    ModelOrder, ModelParams,
};
use serde::Serialize;

use crate::cli::{mix_seed, parse_order, BenchArgs, CliError, CliResult};
use crate::output::{ensure_dir, write_json};

#[derive(Serialize)]
struct BenchRow {
    p: usize,
    q: usize,
    n: usize,
    adavol_secs: f64,
    batch_secs: f64,
    adavol_ratio: f64,
    batch_ratio: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// Benign generating parameters spanning the requested order.
fn bench_params(order: ModelOrder) -> GarchParams {
    GarchParams::new(
        1e-6,
        vec![0.4 / order.p.max(1) as f64; order.p],
        vec![0.45 / order.q.max(1) as f64; order.q],
    )
}

fn bench_start(order: ModelOrder) -> GarchParams {
    GarchParams::new(
        5e-7,
        vec![0.2 / order.p.max(1) as f64; order.p],
        vec![0.5 / order.q.max(1) as f64; order.q],
    )
}

pub fn run(args: BenchArgs) -> CliResult {
    if args.repeats == 0 {
        return Err(CliError::Config("--repeats must be >= 1".into()));
    }
    ensure_dir(&args.out.out)?;
    let orders: Result<Vec<ModelOrder>, String> =
        args.orders.split(';').map(|s| parse_order(s.trim())).collect();
    let orders = orders.map_err(CliError::Config)?;

    let mut rows = Vec::new();
    println!("{:<12} {:>7} {:>12} {:>12} {:>9} {:>9}", "model", "n", "adavol[s]", "batch[s]", "adavol", "batch");
    for &order in &orders {
        for &n in &args.n {
            if n == 0 {
                return Err(CliError::Config("--n entries must be >= 1".into()));
            }
            let truth = bench_params(order);
            let sim = simulate(&truth, n, 500, mix_seed(args.seed, order.p as u64, order.q as u64))?;
            let start = bench_start(order);
            let mut theta0_vte = start.alpha.clone();
            theta0_vte.extend(&start.beta);

            // streaming pass: repeat inner loops for clock resolution
            let mut ada_times = Vec::with_capacity(args.repeats);
            for _ in 0..args.repeats {
                let inner = 10;
                let t = Instant::now();
                for _ in 0..inner {
                    let cfg = AdaVolConfig::new(order);
                    run_stream(&sim.returns, &theta0_vte, cfg)?;
                }
                ada_times.push(t.elapsed().as_secs_f64() / inner as f64);
            }
            let ada = median(ada_times);

            let mut batch_times = Vec::with_capacity(args.repeats);
            for _ in 0..args.repeats {
                let t = Instant::now();
                streaming_refit_pass(
                    &sim.returns,
                    &ModelParams::Full(start.clone()),
                    &FitOptions::default(),
                )?;
                batch_times.push(t.elapsed().as_secs_f64());
            }
            let batch = median(batch_times);

            let fastest = ada.min(batch);
            let row = BenchRow {
                p: order.p,
                q: order.q,
                n,
                adavol_secs: ada,
                batch_secs: batch,
                adavol_ratio: ada / fastest,
                batch_ratio: batch / fastest,
            };
            println!(
                "GARCH({},{}){:<3} {:>7} {:>12.6} {:>12.6} {:>9.2} {:>9.2}",
                row.p, row.q, "", row.n, row.adavol_secs, row.batch_secs, row.adavol_ratio,
                row.batch_ratio
            );
            rows.push(row);
        }
    }
    write_json(&args.out.out.join("bench.json"), &rows)?;
    Ok(ExitCode::SUCCESS)
}
