//! `adavol fit`: estimate one series with the streaming estimator or the
//! rolling batch baseline; export the parameter trajectory, the predicted
//! variances, and a summary with accuracy scores against squared returns.

use std::process::ExitCode;

use adavol_core::{
    load_prices, load_returns, log_returns, run_stream, AdaVolConfig, CsvFormat, EvalReport,
    FitOptions, GarchParams, ModelParams, RefitSchedule,
};
use serde::Serialize;

use crate::cli::{CliError, CliResult, FitArgs, InputKind, Method};
use crate::output::{ensure_dir, write_json, CsvWriter};

#[derive(Serialize)]
struct FitSummary {
    method: String,
    n: usize,
    final_params: ModelParams,
    report: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nonconverged: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_iters: Option<usize>,
}

fn load_series(args: &FitArgs) -> Result<Vec<f64>, CliError> {
    let delim = args.delimiter as u8;
    match args.format {
        InputKind::Returns => Ok(load_returns(&args.input, &args.column, delim)?),
        InputKind::Prices => {
            let fmt = CsvFormat {
                delimiter: delim,
                date_column: args.date_column.clone(),
                close_column: args.close_column.clone(),
                date_format: None,
            };
            let prices = load_prices(&args.input, &fmt)?;
            Ok(log_returns(&prices)?.returns)
        }
    }
}

pub fn run(args: FitArgs) -> CliResult {
    ensure_dir(&args.out.out)?;
    let series = load_series(&args)?;
    let order = args.order;
    match args.method {
        Method::Adavol => {
            let theta0 = args.init.resolve_vte(order, args.seed)?;
            let mut cfg = AdaVolConfig::new(order);
            cfg.eta = args.eta;
            cfg.eps = args.eps;
            cfg.margin = args.margin;
            cfg.mean_recursion = args.mean_recursion;
            cfg.minibatch = args.minibatch;
            let (out, state) = run_stream(&series, &theta0, cfg)?;

            let mut header = vec!["t".to_string()];
            header.extend((1..=order.p).map(|i| format!("alpha_{i}")));
            header.extend((1..=order.q).map(|j| format!("beta_{j}")));
            header.push("gamma2".into());
            header.push("next_vol2".into());
            let mut traj =
                CsvWriter::create(args.out.out.join("trajectory.csv"), &header.join(","))?;
            for (t, theta) in out.theta_track.iter().enumerate() {
                let mut row = vec![(t + 1).to_string()];
                row.extend(theta.iter().map(|v| v.to_string()));
                row.push(out.gamma2_track[t].to_string());
                let next = if t + 1 < out.vol2_track.len() {
                    out.vol2_track[t + 1]
                } else {
                    out.next_vol2
                };
                row.push(next.to_string());
                traj.row(&row)?;
            }
            traj.finish()?;
            write_predictions(&args, &series, &out.vol2_track)?;

            let report = EvalReport::compute(&series, &out.vol2_track, None, &args.alphas.0)?;
            let summary = FitSummary {
                method: "adavol".into(),
                n: series.len(),
                final_params: ModelParams::Vte(adavol_core::VteParams::new(
                    state.theta()[..order.p].to_vec(),
                    state.theta()[order.p..].to_vec(),
                    state.gamma2(),
                )),
                report,
                blocks: None,
                nonconverged: None,
                total_iters: None,
            };
            write_json(&args.out.out.join("summary.json"), &summary)?;
            println!("adavol: {} observations, final theta {:?}", series.len(), state.theta());
            Ok(ExitCode::SUCCESS)
        }
        Method::Batch => {
            let init = args.init.resolve_full_for_batch(order, args.seed, &series)?;
            let theta0 = ModelParams::Full(init);
            if series.len() < args.increment {
                eprintln!(
                    "warning: series length {} is below the refit increment {}; \
                     falling back to a single fit",
                    series.len(),
                    args.increment
                );
            }
            let sched = RefitSchedule {
                increment: args.increment,
                warm_start: !args.cold_start,
            };
            let opts = FitOptions { margin: args.margin, ..Default::default() };
            let roll = adavol_core::rolling_refit(&series, &theta0, &sched, &opts)?;

            let mut header = vec!["t".to_string(), "omega".into()];
            header.extend((1..=order.p).map(|i| format!("alpha_{i}")));
            header.extend((1..=order.q).map(|j| format!("beta_{j}")));
            let mut traj =
                CsvWriter::create(args.out.out.join("trajectory.csv"), &header.join(","))?;
            for t in 0..series.len() {
                let ModelParams::Full(p) = roll.theta_at(t) else { unreachable!() };
                let mut row = vec![(t + 1).to_string(), p.omega.to_string()];
                row.extend(p.alpha.iter().map(|v| v.to_string()));
                row.extend(p.beta.iter().map(|v| v.to_string()));
                traj.row(&row)?;
            }
            traj.finish()?;
            write_predictions(&args, &series, &roll.vol2)?;

            let report = EvalReport::compute(&series, &roll.vol2, None, &args.alphas.0)?;
            let summary = FitSummary {
                method: "batch".into(),
                n: series.len(),
                final_params: roll.blocks.last().unwrap().outcome.params.clone(),
                report,
                blocks: Some(roll.blocks.len()),
                nonconverged: Some(roll.nonconverged),
                total_iters: Some(roll.total_iters),
            };
            write_json(&args.out.out.join("summary.json"), &summary)?;
            println!(
                "batch: {} observations, {} block(s), {} nonconverged",
                series.len(),
                roll.blocks.len(),
                roll.nonconverged
            );
            if roll.nonconverged > 0 {
                eprintln!("{} fit(s) did not reach the convergence threshold", roll.nonconverged);
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn write_predictions(args: &FitArgs, series: &[f64], vol2: &[f64]) -> Result<(), CliError> {
    let mut csv = CsvWriter::create(args.out.out.join("predictions.csv"), "t,x,vol2")?;
    for (t, (x, v)) in series.iter().zip(vol2).enumerate() {
        csv.row(&[(t + 1).to_string(), x.to_string(), v.to_string()])?;
    }
    csv.finish()
}

impl crate::cli::VectorPolicy {
    /// Full start vector for the batch method. A VTE-length fixed vector is
    /// completed with an intercept implied by the sample variance.
    fn resolve_full_for_batch(
        &self,
        order: adavol_core::ModelOrder,
        seed: u64,
        series: &[f64],
    ) -> Result<GarchParams, CliError> {
        match self {
            crate::cli::VectorPolicy::Fixed(v) if v.len() == order.dim_vte() => {
                let alpha = v[..order.p].to_vec();
                let beta = v[order.p..].to_vec();
                let n = series.len() as f64;
                let mean = series.iter().sum::<f64>() / n;
                let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                let s: f64 = v.iter().sum();
                let omega = (var * (1.0 - s)).max(1e-12);
                Ok(GarchParams::new(omega, alpha, beta))
            }
            other => other.resolve_full(order, seed),
        }
    }
}
