//! Subcommand implementations. Each returns the artifact text; writing is left to the caller.

use anyhow::{bail, Result};
use fockchan_core::channels::ChannelParams;
use fockchan_core::choi::{self, naive_strategy_optimum};
use fockchan_core::protocol::{evaluate_point, optimize_nu, protocol_choi, run_sweep, Strategy};
use fockchan_core::tomography::{
    canonical_settings, extended_settings, ideal_observations, maximum_likelihood, simulate_counts,
    MlOptions, Observation, Reconstruction,
};
use fockchan_core::{ChoiMatrix, Complex64, Probe};

use crate::args::{ChoiArgs, OptimizeArgs, OutputFormat, StrategyArg, SweepArgs, TomoArgs};
use crate::config::{
    normalized_probe, read_config, sweep_schema, SettingsChoice, SweepConfig, TomoConfig, TomoRun,
};
use crate::report::{
    choi_csv, round_sig, support_label, sweep_csv, sweep_json, to_json, ChoiReport, OptimizeReport,
    SettingCounts, TomoReport,
};

/// Operating point of `choi`, with the gain filled in from the strategy.
pub fn choi_params(args: &ChoiArgs) -> Result<ChannelParams> {
    let p = match (args.strategy, args.gain) {
        (Some(StrategyArg::Matched), None) => ChannelParams::matched(args.tau, args.nu, 1)?,
        (Some(StrategyArg::Matched), Some(g)) => {
            let p = ChannelParams::new(args.tau, args.nu, g, 1)?;
            if !p.is_matched() {
                bail!(
                    "--gain {g} is not matched to 1/(nu tau) = {}",
                    1.0 / (args.nu * args.tau)
                );
            }
            p
        }
        (Some(StrategyArg::Naive), g) => {
            if args.nu != 1.0 {
                bail!("the naive strategy uses nu = 1, got {}", args.nu);
            }
            let g = match g {
                Some(g) => g,
                None => naive_strategy_optimum(args.tau).0,
            };
            ChannelParams::new(args.tau, 1.0, g, 1)?
        }
        (None, Some(g)) => ChannelParams::new(args.tau, args.nu, g, 1)?,
        (None, None) => bail!("--gain is required unless --strategy is given"),
    };
    Ok(p)
}

pub fn cmd_choi(args: &ChoiArgs) -> Result<String> {
    let p = choi_params(args)?;
    let chi = protocol_choi(&p)?.normalized()?.with_real_coherence();
    let record = evaluate_point(&p, &Probe::balanced())?;
    match args.format {
        OutputFormat::Csv => choi_csv(chi.entries()),
        OutputFormat::Json => to_json(&ChoiReport {
            basis: choi::CHOI_BASIS,
            tau: round_sig(p.tau),
            nu: round_sig(p.nu),
            g: round_sig(p.g),
            strategy: record.strategy,
            choi: chi.entries().into(),
            fidelity: round_sig(record.fidelity),
            t_eff: round_sig(record.t_eff),
            p_succ: round_sig(record.p_succ),
            vacuum_weight: round_sig(chi.vacuum_weight()),
        }),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    if args.print_schema {
        return to_json(&sweep_schema());
    }
    let config = match &args.config {
        Some(path) => SweepConfig::from_json(&read_config(path)?)?,
        None => SweepConfig::default(),
    };
    let plan = config.with_overrides(args).to_plan()?;
    let records = run_sweep(&plan)?;
    match args.format {
        OutputFormat::Csv => sweep_csv(&records),
        OutputFormat::Json => sweep_json(&records),
    }
}

/// Report text plus the reconstruction it describes.
pub struct TomoOutcome {
    pub text: String,
    pub report: TomoReport,
    pub reconstruction: Reconstruction,
}

pub fn resolve_tomo(args: &TomoArgs) -> Result<TomoRun> {
    let config = match &args.config {
        Some(path) => TomoConfig::from_json(&read_config(path)?)?,
        None => TomoConfig::default(),
    };
    config.resolve(args)
}

/// Runs tomography; a non-converged reconstruction is returned, not raised.
pub fn cmd_tomo(run: &TomoRun) -> Result<TomoOutcome> {
    let p = ChannelParams::new(run.tau, run.nu, run.gain, 1)?;
    let truth = protocol_choi(&p)?.normalized()?;
    let settings = match run.settings {
        SettingsChoice::Canonical => canonical_settings(),
        SettingsChoice::Extended => extended_settings(),
    };
    let data: Vec<Observation> = if run.ideal {
        ideal_observations(&truth, &settings, run.counts as f64)?
    } else {
        let counts = simulate_counts(&truth, &settings, run.counts, run.seed)?;
        counts.iter().map(Observation::from).collect()
    };
    let defaults = MlOptions::default();
    let opts = MlOptions {
        max_iterations: run.max_iterations.unwrap_or(defaults.max_iterations),
        ..defaults
    };
    let rec = maximum_likelihood(&data, &opts)?;
    let report = tomo_report(run, &p, &truth, &data, &rec)?;
    Ok(TomoOutcome {
        text: to_json(&report)?,
        report,
        reconstruction: rec,
    })
}

fn tomo_report(
    run: &TomoRun,
    p: &ChannelParams,
    truth: &ChoiMatrix,
    data: &[Observation],
    rec: &Reconstruction,
) -> Result<TomoReport> {
    Ok(TomoReport {
        basis: choi::CHOI_BASIS,
        tau: round_sig(p.tau),
        nu: round_sig(p.nu),
        g: round_sig(p.g),
        strategy: Strategy::classify(p),
        mode: if run.ideal { "ideal" } else { "sampled" },
        seed: run.seed,
        total_counts: run.counts,
        settings: data
            .iter()
            .map(|o| SettingCounts {
                label: o.setting.label().to_string(),
                counts: round_sig(o.value),
                exposure: round_sig(o.exposure),
            })
            .collect(),
        true_choi: truth.with_real_coherence().entries().into(),
        reconstructed_choi: rec.choi.with_real_coherence().entries().into(),
        support: support_label(rec.support),
        fidelity: round_sig(rec.choi.state_fidelity(truth)),
        trace_distance: round_sig(rec.choi.trace_distance(truth)),
        true_channel_fidelity: round_sig(choi::channel_fidelity(truth)?),
        reconstructed_channel_fidelity: round_sig(choi::channel_fidelity(&rec.choi)?),
        iterations: rec.iterations,
        converged: rec.converged,
        last_update: round_sig(rec.last_update),
    })
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<String> {
    let probe = match args.probe.as_deref() {
        None => Probe::balanced(),
        Some([c0, c1]) => normalized_probe(Complex64::new(*c0, 0.0), Complex64::new(*c1, 0.0))?,
        Some(other) => bail!("--probe takes two amplitudes c0,c1, got {}", other.len()),
    };
    let opt = optimize_nu(args.tau, args.target_fidelity, &probe)?;
    let p = ChannelParams::matched(args.tau, opt.nu, 1)?;
    let fidelity = choi::channel_fidelity(&protocol_choi(&p)?.normalized()?)?;
    to_json(&OptimizeReport::new(
        args.tau,
        args.target_fidelity,
        &opt,
        fidelity,
    ))
}
