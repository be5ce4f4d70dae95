use chrono::{SecondsFormat, Utc};
use vdwgate::exposure::t_ryd;
use vdwgate::noise::{
    decay_error_from, grid_convergence, inflate_sigmas, monte_carlo_average_fidelity, FidelityReport, MonteCarloSpec,
};
use vdwgate::units::to_mhz;
use vdwgate::{
    build_cnot_protocol, build_cz_protocol, extract_gate_matrix, pedersen_fidelity, GateProtocol, IdealGate,
    ProtocolParams,
};

use crate::config::{GateKind, RunConfig, SamplingMode};
use crate::record::{ConvergenceRow, DecayBudget, GateReport, ResultRecord, SweepRow};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    /// Trap separation in μm; the gate stays tuned to the nominal interaction.
    Separation,
    /// Common Rabi frequency Ω_c/2π = Ω_t/2π in MHz, re-solving the gate.
    Omega,
    /// Atom temperature in μK.
    Temperature,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Separation => "separation",
            SweepAxis::Omega => "omega",
            SweepAxis::Temperature => "temperature",
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: f64) {
        match self {
            SweepAxis::Separation => cfg.noise.trap_separation_um = Some(value),
            SweepAxis::Omega => {
                cfg.omega_c_mhz = value;
                cfg.omega_t_mhz = value;
            }
            SweepAxis::Temperature => cfg.noise.temperature_uk = value,
        }
    }

    fn value_of(self, cfg: &RunConfig) -> f64 {
        match self {
            SweepAxis::Separation => cfg.noise.trap_separation_um.unwrap_or(f64::NAN),
            SweepAxis::Omega => cfg.omega_t_mhz,
            SweepAxis::Temperature => cfg.noise.temperature_uk,
        }
    }
}

fn record(command: &str, cfg: &RunConfig, params: &ProtocolParams) -> ResultRecord {
    ResultRecord {
        run_id: uuid::Uuid::new_v4().to_string(),
        timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        command: command.to_string(),
        config: cfg.clone(),
        params: params.into(),
        trap_separation_um: cfg
            .noise
            .trap_separation_um
            .or_else(|| params.separation.is_finite().then_some(params.separation)),
        gate: None,
        t_ryd_us: None,
        decay: None,
        sigmas: None,
        grid: None,
        monte_carlo: None,
    }
}

fn protocol(cfg: &RunConfig, params: &ProtocolParams) -> Result<GateProtocol, CliError> {
    let built = match cfg.gate {
        GateKind::Cz => build_cz_protocol(params),
        GateKind::Cnot => build_cnot_protocol(params),
    };
    built.map_err(CliError::from)
}

/// Parameter chain only: θ, V, t₀, t_g and the trap separation.
pub fn solve(cfg: &RunConfig) -> Result<ResultRecord, CliError> {
    cfg.validate()?;
    let params = cfg.protocol_params()?;
    Ok(record("solve", cfg, &params))
}

fn simulate_into(command: &str, cfg: &RunConfig) -> Result<(ResultRecord, GateProtocol), CliError> {
    cfg.validate()?;
    let params = cfg.protocol_params()?;
    let proto = protocol(cfg, &params)?;
    let mut rec = record(command, cfg, &params);

    let interaction = match cfg.noise.trap_separation_um {
        Some(l) => cfg.vdw()?.interaction(l)?,
        None => params.interaction,
    };
    let gate = extract_gate_matrix(&proto, interaction)?;
    let ideal = IdealGate::for_target(&proto.target);
    rec.gate = Some(GateReport::new(
        to_mhz(interaction),
        &gate,
        pedersen_fidelity(&gate, &ideal),
        gate.max_abs_diff(ideal.matrix()),
    ));

    let t = t_ryd(&proto)?;
    rec.t_ryd_us = Some(t);
    rec.decay = Some(DecayBudget {
        lifetime_room_ms: cfg.noise.lifetime_room_ms,
        lifetime_cryo_ms: cfg.noise.lifetime_cryo_ms,
        e_decay_room: decay_error_from(t, cfg.noise.lifetime_room_ms)?,
        e_decay_cryo: decay_error_from(t, cfg.noise.lifetime_cryo_ms)?,
    });
    Ok((rec, proto))
}

/// Gate at the nominal interaction (or at the configured trap separation),
/// with its Rydberg exposure and decay budget.
pub fn simulate(cfg: &RunConfig) -> Result<ResultRecord, CliError> {
    simulate_into("simulate", cfg).map(|(rec, _)| rec)
}

fn fidelity_as(command: &str, cfg: &RunConfig) -> Result<ResultRecord, CliError> {
    let (mut rec, proto) = simulate_into(command, cfg)?;
    let params = cfg.protocol_params()?;
    let separation = rec.trap_separation_um.ok_or_else(|| {
        CliError::Config("noise.trap_separation_um: required when the nominal interaction is zero".into())
    })?;
    let vdw = cfg.vdw()?;
    let sigmas = inflate_sigmas(&cfg.noise_config(separation), params.t_gate);
    let e_room = rec.decay.as_ref().map(|d| d.e_decay_room).unwrap_or(0.0);
    let s = &cfg.sampling;
    if matches!(s.mode, SamplingMode::Grid | SamplingMode::Both) {
        let r = grid_convergence(&proto, &vdw, separation, &sigmas, &s.deltas)?;
        rec.grid = Some(r.with_decay(e_room));
    }
    if matches!(s.mode, SamplingMode::Mc | SamplingMode::Both) {
        let spec = MonteCarloSpec { samples: s.mc_samples, seed: cfg.seed, truncation: s.mc_truncation };
        let r = monte_carlo_average_fidelity(&proto, &vdw, separation, &sigmas, &spec)?;
        rec.monte_carlo = Some(r.with_decay(e_room));
    }
    rec.sigmas = Some(sigmas);
    Ok(rec)
}

/// Fidelity averaged over thermal position fluctuations.
pub fn fidelity(cfg: &RunConfig) -> Result<ResultRecord, CliError> {
    fidelity_as("fidelity", cfg)
}

/// One fidelity record per axis value, in ascending order of the value.
pub fn sweep(cfg: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<ResultRecord>, CliError> {
    if values.len() < 2 {
        return Err(CliError::Config(format!("sweep: need at least 2 values, got {}", values.len())));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("sweep: value {v} is not finite")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .iter()
        .map(|&v| {
            let mut c = cfg.clone();
            axis.apply(&mut c, v);
            fidelity_as("sweep", &c)
        })
        .collect()
}

/// Linear sweep values `from..=to` with `points` entries.
pub fn linspace(from: f64, to: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 {
        return Err(CliError::Config(format!("sweep: need at least 2 points, got {points}")));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Config("sweep: range bounds must be finite".into()));
    }
    let step = (to - from) / (points - 1) as f64;
    Ok((0..points).map(|k| if k + 1 == points { to } else { from + step * k as f64 }).collect())
}

fn total_wall_time(r: &FidelityReport) -> f64 {
    r.convergence.iter().map(|c| c.wall_time).sum()
}

fn decay_pair(rec: &ResultRecord) -> (f64, f64) {
    rec.decay.as_ref().map_or((0.0, 0.0), |d| (d.e_decay_room, d.e_decay_cryo))
}

/// Grid points, the extrapolated grid estimate, and the Monte Carlo estimate.
pub fn convergence_rows(rec: &ResultRecord) -> Vec<ConvergenceRow> {
    let (room, cryo) = decay_pair(rec);
    let row = |estimator: &str, delta: f64, mean: f64, se: Option<f64>, samples: u64, wall: f64| ConvergenceRow {
        estimator: estimator.to_string(),
        delta,
        mean_fidelity: mean,
        std_error: se,
        net_fidelity_300k: mean - room,
        net_fidelity_4k: mean - cryo,
        samples,
        wall_time: wall,
    };
    let mut rows = Vec::new();
    if let Some(g) = &rec.grid {
        for p in &g.convergence {
            rows.push(row("grid", p.delta, p.mean_fidelity, None, p.sample_count, p.wall_time));
        }
        if g.convergence.len() >= 2 {
            rows.push(row("grid-extrapolated", 0.0, g.mean_fidelity, None, g.sample_count, total_wall_time(g)));
        }
    }
    if let Some(m) = &rec.monte_carlo {
        rows.push(row("mc", 0.0, m.mean_fidelity, m.std_error, m.sample_count, total_wall_time(m)));
    }
    rows
}

pub fn sweep_row(axis: SweepAxis, rec: &ResultRecord) -> SweepRow {
    let (room, cryo) = decay_pair(rec);
    let report = rec.primary_report();
    let mean = report.map_or(f64::NAN, |r| r.mean_fidelity);
    SweepRow {
        axis: axis.name().to_string(),
        value: axis.value_of(&rec.config),
        separation_um: rec.trap_separation_um.unwrap_or(f64::NAN),
        t_gate_us: rec.params.t_gate_us,
        nominal_fidelity: rec.gate.as_ref().map_or(f64::NAN, |g| g.fidelity),
        mean_fidelity: mean,
        std_error: report.and_then(|r| r.std_error),
        net_fidelity_300k: mean - room,
        net_fidelity_4k: mean - cryo,
        t_ryd_us: rec.t_ryd_us.unwrap_or(f64::NAN),
        samples: report.map_or(0, |r| r.sample_count),
        wall_time: report.map_or(0.0, total_wall_time),
    }
}
