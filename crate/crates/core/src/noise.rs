//! Position fluctuations of the atoms and the fidelity averaged over them.
//!
//! Each atom is displaced from its trap center by independent Gaussian
//! offsets: `σ_⊥` along x and y, `σ_z` along z. The gate fidelity depends on
//! the six offsets only through the interatomic distance, so it is tabulated
//! once as a function of distance and then averaged either on the truncated
//! product grid `{−1.5, −1.5 + δ, …, 1.5}·σ` per coordinate or by Monte Carlo.
//!
//! On the grid the distance depends only on the coordinate differences
//! `control − target`, so the six-fold product of normalized 1-D weights is
//! folded into three distributions of differences first. This is the same
//! estimator, evaluated on `(2n − 1)³` instead of `n⁶` points.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::exposure::t_ryd;
use crate::fidelity::{pedersen_fidelity, GateMatrix, IdealGate};
use crate::interaction::{pair_distance, VdwModel};
use crate::protocol::GateProtocol;
use crate::table::CubicTable;
use crate::units::{thermal_speed, RB87_MASS};

/// Half-width of the quadrature box, in units of σ.
pub const GRID_HALF_WIDTH: f64 = 1.5;

/// Points in the fidelity-versus-distance table before refinement.
pub const TABLE_POINTS: usize = 4001;

/// Required agreement between the table and direct simulation.
pub const TABLE_TOLERANCE: f64 = 1e-8;

/// Untruncated sampling tabulates distances reachable within this many σ
/// per coordinate and simulates directly beyond.
pub const MC_TABLE_HALF_WIDTH: f64 = 4.5;

const MC_CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Longitudinal r.m.s. spread in the trap, μm.
    pub sigma_z0: f64,
    /// Transverse r.m.s. spread in the trap, μm.
    pub sigma_perp0: f64,
    /// μK
    pub atom_temperature: f64,
    /// kg
    pub atom_mass: f64,
    /// ms
    pub rydberg_lifetime: f64,
    /// μm
    pub trap_separation: f64,
}

impl NoiseConfig {
    /// ⁸⁷Rb at 10 μK with the trap spreads 1.47 μm / 0.27 μm and the
    /// room-temperature |97S⟩ lifetime of 0.311 ms.
    pub fn rb87(trap_separation: f64) -> Self {
        Self {
            sigma_z0: 1.47,
            sigma_perp0: 0.27,
            atom_temperature: 10.0,
            atom_mass: RB87_MASS,
            rydberg_lifetime: 0.311,
            trap_separation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("sigma_z0", self.sigma_z0)?;
        ensure_positive("sigma_perp0", self.sigma_perp0)?;
        ensure_finite("atom_temperature", self.atom_temperature)?;
        if self.atom_temperature < 0.0 {
            return Err(Error::invalid("atom_temperature", "must be non-negative"));
        }
        ensure_positive("atom_mass", self.atom_mass)?;
        ensure_positive("rydberg_lifetime", self.rydberg_lifetime)?;
        ensure_positive("trap_separation", self.trap_separation)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflatedSigmas {
    /// μm
    pub sigma_z: f64,
    /// μm
    pub sigma_perp: f64,
    /// r.m.s. free-flight distance during the gate, μm
    pub flight_length: f64,
    /// one-dimensional r.m.s. speed, μm/μs
    pub v_rms: f64,
}

impl InflatedSigmas {
    /// Spreads without any free-flight contribution.
    pub fn fixed(sigma_z: f64, sigma_perp: f64) -> Self {
        Self { sigma_z, sigma_perp, flight_length: 0.0, v_rms: 0.0 }
    }
}

/// Widens both spreads by half the r.m.s. distance flown during the gate.
pub fn inflate_sigmas(cfg: &NoiseConfig, gate_duration: f64) -> InflatedSigmas {
    let v_rms = thermal_speed(cfg.atom_temperature, cfg.atom_mass);
    let flight_length = v_rms * gate_duration;
    InflatedSigmas {
        sigma_z: cfg.sigma_z0 + flight_length / 2.0,
        sigma_perp: cfg.sigma_perp0 + flight_length / 2.0,
        flight_length,
        v_rms,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    delta: f64,
}

impl QuadratureSpec {
    /// `delta` must divide the box width 3 into an integer number of steps.
    pub fn new(delta: f64) -> Result<Self> {
        ensure_positive("delta", delta)?;
        if delta > GRID_HALF_WIDTH {
            return Err(Error::invalid("delta", format!("must not exceed {GRID_HALF_WIDTH}, got {delta}")));
        }
        let steps = 2.0 * GRID_HALF_WIDTH / delta;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::invalid("delta", format!("3/delta must be an integer, got {steps}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn points_per_axis(&self) -> usize {
        (2.0 * GRID_HALF_WIDTH / self.delta).round() as usize + 1
    }

    /// Nodes in units of σ.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.points_per_axis();
        (0..n)
            .map(|k| if k + 1 == n { GRID_HALF_WIDTH } else { -GRID_HALF_WIDTH + self.delta * k as f64 })
            .collect()
    }

    /// Gaussian weights at the nodes, normalized to unit sum.
    pub fn weights(&self) -> Vec<f64> {
        let raw: Vec<f64> = self.nodes().iter().map(|u| (-0.5 * u * u).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    /// Distribution of `u_i − u_j` over independent node pairs: offsets
    /// `k·δ` for `k = −(n−1) … n−1` and their summed weights.
    pub fn difference_distribution(&self) -> (Vec<f64>, Vec<f64>) {
        let w = self.weights();
        let n = w.len();
        let mut diff = vec![0.0; 2 * n - 1];
        for (i, wi) in w.iter().enumerate() {
            for (j, wj) in w.iter().enumerate() {
                diff[i + n - 1 - j] += wi * wj;
            }
        }
        let offsets = (0..2 * n - 1).map(|k| (k as f64 - (n - 1) as f64) * self.delta).collect();
        (offsets, diff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub delta: f64,
    pub mean_fidelity: f64,
    pub sample_count: u64,
    /// seconds
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub mean_fidelity: f64,
    /// Standard error of the mean, for Monte Carlo estimates.
    pub std_error: Option<f64>,
    pub decay_error: f64,
    pub net_fidelity: f64,
    pub sample_count: u64,
    pub convergence: Vec<ConvergencePoint>,
}

impl FidelityReport {
    fn new(mean_fidelity: f64, std_error: Option<f64>, sample_count: u64) -> Self {
        Self {
            mean_fidelity,
            std_error,
            decay_error: 0.0,
            net_fidelity: mean_fidelity,
            sample_count,
            convergence: Vec::new(),
        }
    }

    pub fn with_decay(mut self, decay_error: f64) -> Self {
        self.decay_error = decay_error;
        self.net_fidelity = self.mean_fidelity - decay_error;
        self
    }
}

/// Fidelity of a protocol as a function of the interatomic distance,
/// tabulated over a window and simulated directly outside it.
pub struct DistanceFidelity<'a> {
    protocol: &'a GateProtocol,
    vdw: VdwModel,
    ideal: IdealGate,
    table: CubicTable,
    validation_error: f64,
}

impl<'a> DistanceFidelity<'a> {
    /// Tabulates over `[lo, hi]`, doubling the resolution from
    /// [`TABLE_POINTS`] until the midpoint error is below [`TABLE_TOLERANCE`].
    pub fn build(protocol: &'a GateProtocol, vdw: &VdwModel, lo: f64, hi: f64) -> Result<Self> {
        ensure_positive("smallest interatomic distance", lo)?;
        let ideal = IdealGate::for_target(&protocol.target);
        let direct = |d: f64| direct_fidelity(protocol, vdw, &ideal, d);
        let mut points = TABLE_POINTS;
        loop {
            let table = CubicTable::build(direct, lo, hi, points)?;
            let stride = (table.len() / 200).max(1);
            let err = table.validate(direct, stride)?;
            if err <= TABLE_TOLERANCE {
                return Ok(Self { protocol, vdw: *vdw, ideal, table, validation_error: err });
            }
            if points > 64 * TABLE_POINTS {
                return Err(Error::Numeric(format!(
                    "fidelity table over [{lo}, {hi}] μm reached {points} points with error {err:e}"
                )));
            }
            points = 2 * points - 1;
        }
    }

    pub fn get(&self, dist: f64) -> Result<f64> {
        match self.table.get(dist) {
            Some(f) => Ok(f),
            None => direct_fidelity(self.protocol, &self.vdw, &self.ideal, dist),
        }
    }

    pub fn direct(&self, dist: f64) -> Result<f64> {
        direct_fidelity(self.protocol, &self.vdw, &self.ideal, dist)
    }

    pub fn table(&self) -> &CubicTable {
        &self.table
    }

    pub fn validation_error(&self) -> f64 {
        self.validation_error
    }
}

fn direct_fidelity(protocol: &GateProtocol, vdw: &VdwModel, ideal: &IdealGate, dist: f64) -> Result<f64> {
    let v = vdw.interaction(dist)?;
    let g = GateMatrix::from_propagator(&protocol.propagator(v)?);
    Ok(pedersen_fidelity(&g, ideal))
}

/// Extreme distances reachable with every offset inside `±half_width·σ`.
pub fn distance_window(trap_separation: f64, sigmas: &InflatedSigmas, half_width: f64) -> Result<(f64, f64)> {
    ensure_positive("trap_separation", trap_separation)?;
    let dx = 2.0 * half_width * sigmas.sigma_perp;
    let dz = 2.0 * half_width * sigmas.sigma_z;
    let lo = trap_separation - dx;
    if lo <= 0.0 {
        return Err(Error::invalid(
            "sigma_perp",
            format!("position spread reaches zero interatomic distance (L = {trap_separation} μm)"),
        ));
    }
    let hi = ((trap_separation + dx).powi(2) + dx * dx + dz * dz).sqrt();
    Ok((lo, hi))
}

/// Normalized product-grid average of `f(distance)`.
pub fn grid_expectation<F>(trap_separation: f64, sigmas: &InflatedSigmas, quad: &QuadratureSpec, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let (offsets, weights) = quad.difference_distribution();
    let partial: Vec<f64> = offsets
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&ux, &wx)| {
            let mut acc = 0.0;
            for (&uy, &wy) in offsets.iter().zip(&weights) {
                let mut inner = 0.0;
                for (&uz, &wz) in offsets.iter().zip(&weights) {
                    let d = pair_distance(
                        ux * sigmas.sigma_perp,
                        uy * sigmas.sigma_perp,
                        uz * sigmas.sigma_z,
                        trap_separation,
                    );
                    inner += wz * f(d)?;
                }
                acc += wy * inner;
            }
            Ok(wx * acc)
        })
        .collect::<Result<_>>()?;
    Ok(partial.iter().sum())
}

/// Averages the gate fidelity over the truncated Gaussian grid.
pub fn grid_average_fidelity(
    protocol: &GateProtocol,
    vdw: &VdwModel,
    trap_separation: f64,
    sigmas: &InflatedSigmas,
    quad: &QuadratureSpec,
) -> Result<FidelityReport> {
    let (lo, hi) = distance_window(trap_separation, sigmas, GRID_HALF_WIDTH)?;
    let lookup = DistanceFidelity::build(protocol, vdw, lo, hi)?;
    grid_average_with(&lookup, trap_separation, sigmas, quad)
}

pub fn grid_average_with(
    lookup: &DistanceFidelity<'_>,
    trap_separation: f64,
    sigmas: &InflatedSigmas,
    quad: &QuadratureSpec,
) -> Result<FidelityReport> {
    let start = Instant::now();
    let mean = grid_expectation(trap_separation, sigmas, quad, |d| lookup.get(d))?;
    let samples = (quad.points_per_axis() as u64).pow(6);
    let mut report = FidelityReport::new(mean, None, samples);
    report.convergence.push(ConvergencePoint {
        delta: quad.delta(),
        mean_fidelity: mean,
        sample_count: samples,
        wall_time: start.elapsed().as_secs_f64(),
    });
    Ok(report)
}

/// Grid averages for a list of steps sharing one fidelity table. With two
/// or more steps the reported mean is the straight-line extrapolation of
/// the series to δ → 0; with one it is that step's average.
pub fn grid_convergence(
    protocol: &GateProtocol,
    vdw: &VdwModel,
    trap_separation: f64,
    sigmas: &InflatedSigmas,
    deltas: &[f64],
) -> Result<FidelityReport> {
    if deltas.is_empty() {
        return Err(Error::invalid("deltas", "at least one grid step is required"));
    }
    let quads = deltas.iter().map(|&d| QuadratureSpec::new(d)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = distance_window(trap_separation, sigmas, GRID_HALF_WIDTH)?;
    let lookup = DistanceFidelity::build(protocol, vdw, lo, hi)?;
    let mut series = Vec::with_capacity(quads.len());
    for q in &quads {
        series.extend(grid_average_with(&lookup, trap_separation, sigmas, q)?.convergence);
    }
    let finest = series.iter().min_by(|a, b| a.delta.total_cmp(&b.delta)).unwrap();
    let mean = if series.len() >= 2 {
        let pts: Vec<(f64, f64)> = series.iter().map(|p| (p.delta, p.mean_fidelity)).collect();
        extrapolate_to_zero(&pts).unwrap_or(finest.mean_fidelity)
    } else {
        finest.mean_fidelity
    };
    let mut report = FidelityReport::new(mean, None, finest.sample_count);
    report.convergence = series;
    Ok(report)
}

/// Intercept of the least-squares line through `(δ, F̄)`.
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(my - sxy / sxx * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSpec {
    pub samples: usize,
    pub seed: u64,
    /// Reject offsets beyond `±truncation·σ` per coordinate.
    pub truncation: Option<f64>,
}

/// Running mean and squared deviation, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0.0 {
            return other;
        }
        if other.count == 0.0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * other.count / count,
            m2: self.m2 + other.m2 + d * d * self.count * other.count / count,
        }
    }
}

fn gaussian_offset(rng: &mut ChaCha8Rng, sigma: f64, truncation: Option<f64>) -> f64 {
    loop {
        let u: f64 = StandardNormal.sample(rng);
        match truncation {
            Some(k) if u.abs() > k => continue,
            _ => return u * sigma,
        }
    }
}

/// Monte Carlo average over six independent Gaussian offsets per sample.
/// Samples are drawn in fixed chunks, each from its own ChaCha stream, so the
/// result does not depend on the number of threads.
pub fn monte_carlo_average_fidelity(
    protocol: &GateProtocol,
    vdw: &VdwModel,
    trap_separation: f64,
    sigmas: &InflatedSigmas,
    spec: &MonteCarloSpec,
) -> Result<FidelityReport> {
    if spec.samples < 1000 {
        return Err(Error::invalid("samples", format!("need at least 1000, got {}", spec.samples)));
    }
    if let Some(k) = spec.truncation {
        ensure_positive("truncation", k)?;
    }
    let half_width = spec.truncation.unwrap_or(MC_TABLE_HALF_WIDTH);
    let (lo, hi) = distance_window(trap_separation, sigmas, half_width)?;
    let lookup = DistanceFidelity::build(protocol, vdw, lo, hi)?;
    let start = Instant::now();
    let chunks = spec.samples.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(spec.samples - c * MC_CHUNK);
            let mut m = Moments::default();
            for _ in 0..count {
                let mut pos = [0.0; 6];
                for (i, p) in pos.iter_mut().enumerate() {
                    let sigma = if i % 3 == 2 { sigmas.sigma_z } else { sigmas.sigma_perp };
                    *p = gaussian_offset(&mut rng, sigma, spec.truncation);
                }
                let d = pair_distance(pos[0] - pos[3], pos[1] - pos[4], pos[2] - pos[5], trap_separation);
                if d <= 0.0 {
                    return Err(Error::Numeric("sampled interatomic distance is zero".into()));
                }
                m.push(lookup.get(d)?);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = if total.count > 1.0 { total.m2 / (total.count - 1.0) } else { 0.0 };
    let std_error = (variance.max(0.0) / total.count).sqrt();
    let mut report = FidelityReport::new(total.mean, Some(std_error), spec.samples as u64);
    report.convergence.push(ConvergencePoint {
        delta: 0.0,
        mean_fidelity: total.mean,
        sample_count: spec.samples as u64,
        wall_time: start.elapsed().as_secs_f64(),
    });
    Ok(report)
}

/// `T_Ryd / τ` at the protocol's nominal interaction.
pub fn decay_error(protocol: &GateProtocol, cfg: &NoiseConfig) -> Result<f64> {
    ensure_positive("rydberg_lifetime", cfg.rydberg_lifetime)?;
    Ok(t_ryd(protocol)? / (cfg.rydberg_lifetime * 1e3))
}

/// Decay error for a precomputed Rydberg time (μs) and a lifetime (ms).
pub fn decay_error_from(t_ryd_us: f64, lifetime_ms: f64) -> Result<f64> {
    ensure_positive("rydberg_lifetime", lifetime_ms)?;
    Ok(t_ryd_us / (lifetime_ms * 1e3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{build_cz_protocol, ProtocolParams};
    use crate::units::mhz;
    use std::f64::consts::PI;

    fn setup() -> (GateProtocol, ProtocolParams) {
        let p = ProtocolParams::for_phase(PI, mhz(0.8), mhz(0.8), &VdwModel::default()).unwrap();
        (build_cz_protocol(&p).unwrap(), p)
    }

    #[test]
    fn rb87_sigma_inflation() {
        let (_, p) = setup();
        let s = inflate_sigmas(&NoiseConfig::rb87(p.separation), p.t_gate);
        assert!((s.sigma_z - 1.52).abs() < 0.005, "{s:?}");
        assert!((s.sigma_perp - 0.32).abs() < 0.005);
        assert!((s.v_rms - 0.031).abs() < 5e-4);
    }

    #[test]
    fn zero_temperature_keeps_trap_spread() {
        let mut cfg = NoiseConfig::rb87(21.0);
        cfg.atom_temperature = 0.0;
        cfg.validate().unwrap();
        let s = inflate_sigmas(&cfg, 3.4);
        assert_eq!((s.sigma_z, s.sigma_perp), (cfg.sigma_z0, cfg.sigma_perp0));
    }

    #[test]
    fn quadrature_nodes() {
        let q = QuadratureSpec::new(0.25).unwrap();
        let nodes = q.nodes();
        assert_eq!(nodes.len(), 13);
        assert_eq!(nodes[0], -1.5);
        assert_eq!(*nodes.last().unwrap(), 1.5);
        assert!((nodes[6]).abs() < 1e-15);
        for d in [0.25, 0.2, 0.15, 0.12, 0.1] {
            assert_eq!(QuadratureSpec::new(d).unwrap().points_per_axis(), (3.0 / d).round() as usize + 1);
        }
        assert!(QuadratureSpec::new(0.0).is_err());
        assert!(QuadratureSpec::new(2.0).is_err());
        assert!(QuadratureSpec::new(0.13).is_err());
    }

    #[test]
    fn difference_distribution_is_normalized_and_symmetric() {
        let (off, w) = QuadratureSpec::new(0.1).unwrap().difference_distribution();
        assert_eq!(off.len(), 61);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..w.len() {
            assert!((w[k] - w[w.len() - 1 - k]).abs() < 1e-16);
        }
    }

    #[test]
    fn constant_integrand_averages_to_one() {
        let s = InflatedSigmas::fixed(1.52, 0.32);
        for d in [0.5, 0.25, 0.2, 0.15, 0.12, 0.1] {
            let q = QuadratureSpec::new(d).unwrap();
            let avg = grid_expectation(21.0, &s, &q, |_| Ok(1.0)).unwrap();
            assert!((avg - 1.0).abs() < 1e-14, "delta {d}: {avg}");
        }
    }

    /// Six nested loops over the raw product grid.
    fn brute_force_grid(f: impl Fn(f64) -> f64, l: f64, s: &InflatedSigmas, q: &QuadratureSpec) -> f64 {
        let u = q.nodes();
        let w: Vec<f64> = u.iter().map(|x| (-0.5 * x * x).exp()).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for (xc, wxc) in u.iter().zip(&w) {
            for (yc, wyc) in u.iter().zip(&w) {
                for (zc, wzc) in u.iter().zip(&w) {
                    for (xt, wxt) in u.iter().zip(&w) {
                        for (yt, wyt) in u.iter().zip(&w) {
                            for (zt, wzt) in u.iter().zip(&w) {
                                let wt = wxc * wyc * wzc * wxt * wyt * wzt;
                                let dx = (xc - xt) * s.sigma_perp - l;
                                let dy = (yc - yt) * s.sigma_perp;
                                let dz = (zc - zt) * s.sigma_z;
                                num += wt * f((dx * dx + dy * dy + dz * dz).sqrt());
                                den += wt;
                            }
                        }
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn folded_grid_matches_six_dimensional_sum() {
        let s = InflatedSigmas::fixed(1.52, 0.32);
        let f = |d: f64| (0.3 * d).sin() + 1.0 / d;
        for delta in [0.5, 0.375] {
            let q = QuadratureSpec::new(delta).unwrap();
            let folded = grid_expectation(21.0, &s, &q, |d| Ok(f(d))).unwrap();
            let brute = brute_force_grid(f, 21.0, &s, &q);
            assert!((folded - brute).abs() < 1e-12, "{folded} vs {brute}");
        }
    }

    #[test]
    fn negligible_spread_gives_perfect_gate() {
        let (proto, p) = setup();
        let s = InflatedSigmas::fixed(1e-9, 1e-9);
        let r = grid_average_fidelity(&proto, &VdwModel::default(), p.separation, &s, &QuadratureSpec::new(0.25).unwrap()).unwrap();
        assert!((r.mean_fidelity - 1.0).abs() < 1e-9);
        let mc = monte_carlo_average_fidelity(
            &proto,
            &VdwModel::default(),
            p.separation,
            &s,
            &MonteCarloSpec { samples: 2000, seed: 7, truncation: None },
        )
        .unwrap();
        assert!((mc.mean_fidelity - 1.0).abs() < 1e-9);
        assert!(mc.std_error.unwrap() < 1e-12);
    }

    #[test]
    fn grid_rejects_collapsing_geometry() {
        let (proto, _) = setup();
        let s = InflatedSigmas::fixed(1.0, 2.0);
        let err = grid_average_fidelity(&proto, &VdwModel::default(), 5.0, &s, &QuadratureSpec::new(0.5).unwrap());
        assert!(matches!(err, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn table_matches_direct_simulation() {
        let (proto, p) = setup();
        let s = InflatedSigmas::fixed(1.52, 0.32);
        let (lo, hi) = distance_window(p.separation, &s, GRID_HALF_WIDTH).unwrap();
        let lookup = DistanceFidelity::build(&proto, &VdwModel::default(), lo, hi).unwrap();
        assert!(lookup.validation_error() <= TABLE_TOLERANCE);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let d = lo + (hi - lo) * rand::Rng::gen::<f64>(&mut rng);
            assert!((lookup.get(d).unwrap() - lookup.direct(d).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let (proto, p) = setup();
        let s = InflatedSigmas::fixed(1.52, 0.32);
        let spec = MonteCarloSpec { samples: 20_000, seed: 42, truncation: None };
        let a = monte_carlo_average_fidelity(&proto, &VdwModel::default(), p.separation, &s, &spec).unwrap();
        let b = monte_carlo_average_fidelity(&proto, &VdwModel::default(), p.separation, &s, &spec).unwrap();
        assert_eq!(a.mean_fidelity.to_bits(), b.mean_fidelity.to_bits());
        assert_eq!(a.std_error.unwrap().to_bits(), b.std_error.unwrap().to_bits());
        let small = MonteCarloSpec { samples: 999, ..spec };
        assert!(monte_carlo_average_fidelity(&proto, &VdwModel::default(), p.separation, &s, &small).is_err());
    }

    #[test]
    fn decay_budget() {
        let (proto, p) = setup();
        let mut cfg = NoiseConfig::rb87(p.separation);
        let room = decay_error(&proto, &cfg).unwrap();
        assert!((room / 6.14e-3 - 1.0).abs() < 0.02, "{room}");
        cfg.rydberg_lifetime = 1.10;
        let cold = decay_error(&proto, &cfg).unwrap();
        assert!((cold / 1.74e-3 - 1.0).abs() < 0.02, "{cold}");
        cfg.rydberg_lifetime = 1e300;
        assert!(decay_error(&proto, &cfg).unwrap() < 1e-300);
    }

    #[test]
    fn report_net_fidelity() {
        let r = FidelityReport::new(0.99, None, 1).with_decay(0.004);
        assert!((r.net_fidelity - 0.986).abs() < 1e-15);
    }

    #[test]
    fn extrapolation_recovers_line() {
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.3].iter().map(|&d| (d, 0.99 - 0.02 * d)).collect();
        assert!((extrapolate_to_zero(&pts).unwrap() - 0.99).abs() < 1e-15);
        assert!(extrapolate_to_zero(&pts[..1]).is_none());
    }
}
