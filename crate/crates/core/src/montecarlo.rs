//! Stochastic cross-check of the closed forms: estimate
//! F = ⟨exp(i·d·Σ ζ_k Δp_k/ħ)⟩ and the screen intensity directly from
//! sampled kick trajectories.
//!
//! Reproducibility contract: one root seed; batch b draws from the child
//! stream (seed, b); per-batch accumulators are combined by a fixed
//! pairwise tree over the batch index. The result is bit-identical for
//! any worker count, including the serial build.

use std::io::{self, Write};

use serde::Serialize;

use crate::constants::HBAR;
use crate::kicks::{sample_kick, sample_trajectory, KickLaw};
use crate::par_map;
use crate::rng::RandomStream;
use crate::spectrum::EmissionSpectrum;
use crate::visibility::{
    visibility_closed_form, ExperimentConfig, FringePattern, VisibilityResult,
};
#[cfg(test)]
use crate::visibility::fringe_pattern;
use crate::{Error, Result};

/// Sample-count, seed and batching choices for one estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McConfig {
    pub n_samples: u64,
    pub seed: u64,
    /// Trajectories per child stream; the reduction tree is over batches.
    pub batch_size: u64,
}

impl McConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McConfig {
            n_samples,
            seed,
            batch_size: n_samples.clamp(1, 4096),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be positive".into()));
        }
        if self.batch_size == 0 || self.batch_size > self.n_samples {
            return Err(Error::InvalidParameter(format!(
                "batch_size must lie in [1, n_samples], got {}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Monte Carlo estimate of the decoherence factor F.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    /// Mean of cos(d·S/ħ); equals V for the symmetric jump law.
    pub f_real: f64,
    /// Mean of sin(d·S/ħ); consistent with zero.
    pub f_imag: f64,
    /// |F̂| = hypot(f_real, f_imag).
    pub visibility_hat: f64,
    /// Standard error of f_real.
    pub std_error: f64,
    /// Standard error of f_imag.
    pub std_error_imag: f64,
    pub n_used: u64,
}

#[derive(Clone, Copy, Default)]
struct PhaseSums {
    cos: f64,
    sin: f64,
    cos2: f64,
    sin2: f64,
    n: u64,
}

impl PhaseSums {
    fn merge(a: PhaseSums, b: PhaseSums) -> PhaseSums {
        PhaseSums {
            cos: a.cos + b.cos,
            sin: a.sin + b.sin,
            cos2: a.cos2 + b.cos2,
            sin2: a.sin2 + b.sin2,
            n: a.n + b.n,
        }
    }
}

/// Fixed-shape pairwise reduction; also keeps float accumulation error
/// O(log n) instead of O(n).
fn pairwise<T: Clone, F: Fn(T, T) -> T + Copy>(items: &[T], merge: F) -> T {
    match items.len() {
        0 => unreachable!("empty reduction"),
        1 => items[0].clone(),
        n => {
            let mid = n / 2;
            merge(pairwise(&items[..mid], merge), pairwise(&items[mid..], merge))
        }
    }
}

fn batch_ranges(mc: &McConfig) -> Vec<(u64, u64)> {
    let mut ranges = Vec::new();
    let mut start = 0;
    while start < mc.n_samples {
        let count = mc.batch_size.min(mc.n_samples - start);
        ranges.push((start / mc.batch_size, count));
        start += count;
    }
    ranges
}

/// Σ (1 - t_k/t)·Δp_k over one fresh Poisson realization. The sum is
/// permutation-invariant, so the emission times stay unsorted here.
fn trajectory_phase_sum(law: &KickLaw, t: f64, stream: &mut RandomStream) -> Result<f64> {
    let n = stream.poisson(law.rate * t);
    let mut s = 0.0;
    for _ in 0..n {
        let tk = stream.range(0.0, t);
        let dp = sample_kick(law, stream)?;
        s += (1.0 - tk / t) * dp;
    }
    Ok(s)
}

fn law_for(cfg: &ExperimentConfig) -> Result<KickLaw> {
    let spec = EmissionSpectrum::new(cfg.molecule.clone(), cfg.temperature, 1e-10)?;
    KickLaw::new(spec)
}

/// Estimate F over `mc.n_samples` trajectories of the experiment.
pub fn estimate_f(cfg: &ExperimentConfig, mc: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    mc.validate()?;
    let law = law_for(cfg)?;
    let d = cfg.slit_separation;
    let t = cfg.flight_time;

    let batches: Vec<Result<PhaseSums>> = par_map(batch_ranges(mc), |(index, count)| {
        let mut stream = RandomStream::child(mc.seed, index);
        let mut acc = PhaseSums::default();
        for _ in 0..count {
            let s = trajectory_phase_sum(&law, t, &mut stream)?;
            let phase = d * s / HBAR;
            let (sin, cos) = phase.sin_cos();
            acc.cos += cos;
            acc.sin += sin;
            acc.cos2 += cos * cos;
            acc.sin2 += sin * sin;
            acc.n += 1;
        }
        Ok(acc)
    });
    let batches: Vec<PhaseSums> = batches.into_iter().collect::<Result<_>>()?;
    let total = pairwise(&batches, PhaseSums::merge);

    let n = total.n as f64;
    let f_real = total.cos / n;
    let f_imag = total.sin / n;
    let var_c = ((total.cos2 / n - f_real * f_real) / (n - 1.0).max(1.0)).max(0.0);
    let var_s = ((total.sin2 / n - f_imag * f_imag) / (n - 1.0).max(1.0)).max(0.0);
    Ok(McEstimate {
        f_real,
        f_imag,
        visibility_hat: f_real.hypot(f_imag),
        std_error: var_c.sqrt(),
        std_error_imag: var_s.sqrt(),
        n_used: total.n,
    })
}

/// Empirical screen pattern with pointwise standard errors.
#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalPattern {
    pub pattern: FringePattern,
    pub std_error: Vec<f64>,
}

#[derive(Clone)]
struct GridSums {
    sum: Vec<f64>,
    sum2: Vec<f64>,
    n: u64,
}

impl GridSums {
    fn zero(len: usize) -> Self {
        GridSums {
            sum: vec![0.0; len],
            sum2: vec![0.0; len],
            n: 0,
        }
    }
    fn merge(mut a: GridSums, b: GridSums) -> GridSums {
        for (x, y) in a.sum.iter_mut().zip(&b.sum) {
            *x += y;
        }
        for (x, y) in a.sum2.iter_mut().zip(&b.sum2) {
            *x += y;
        }
        a.n += b.n;
        a
    }
}

/// Average the stationary-phase intensity 2|ψ̃_slit(p̄)|²cos²(p̄d/2ħ) over
/// trajectories, p̄ = mx/t + Σζ_kΔp_k, scaled by m/t. This is the exact
/// far-field pattern, envelope distortion by kicks included.
pub fn estimate_pattern(
    cfg: &ExperimentConfig,
    mc: &McConfig,
    positions: &[f64],
) -> Result<EmpiricalPattern> {
    cfg.validate()?;
    mc.validate()?;
    if cfg.flight_time <= 0.0 {
        return Err(Error::InvalidParameter(
            "pattern estimation needs flight_time > 0".into(),
        ));
    }
    let law = law_for(cfg)?;
    let d = cfg.slit_separation;
    let t = cfg.flight_time;
    let m_over_t = cfg.molecule.mass / t;
    let sigma = cfg.slit_width_momentum;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());

    let batches: Vec<Result<GridSums>> = par_map(batch_ranges(mc), |(index, count)| {
        let mut stream = RandomStream::child(mc.seed, index);
        let mut acc = GridSums::zero(positions.len());
        for _ in 0..count {
            let s = trajectory_phase_sum(&law, t, &mut stream)?;
            for (i, &x) in positions.iter().enumerate() {
                let p_bar = m_over_t * x + s;
                let env = norm * (-(p_bar * p_bar) / (2.0 * sigma * sigma)).exp();
                let c = (p_bar * d / (2.0 * HBAR)).cos();
                let val = 2.0 * env * c * c;
                acc.sum[i] += val;
                acc.sum2[i] += val * val;
            }
            acc.n += 1;
        }
        Ok(acc)
    });
    let batches: Vec<GridSums> = batches.into_iter().collect::<Result<_>>()?;
    let total = pairwise(&batches, GridSums::merge);

    let n = total.n as f64;
    let mut intensity = Vec::with_capacity(positions.len());
    let mut std_error = Vec::with_capacity(positions.len());
    let mut envelope = Vec::with_capacity(positions.len());
    for (i, &x) in positions.iter().enumerate() {
        let mean = total.sum[i] / n;
        let var = ((total.sum2[i] / n - mean * mean) / (n - 1.0).max(1.0)).max(0.0);
        intensity.push(m_over_t * mean);
        std_error.push(m_over_t * var.sqrt());
        let p = m_over_t * x;
        envelope.push(m_over_t * norm * (-(p * p) / (2.0 * sigma * sigma)).exp());
    }
    Ok(EmpiricalPattern {
        pattern: FringePattern {
            positions: positions.to_vec(),
            intensity,
            envelope,
        },
        std_error,
    })
}

/// Head-to-head record of one Monte Carlo vs closed-form comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Comparison {
    pub v_mc: f64,
    pub v_exact: f64,
    pub std_error: f64,
    /// (v_mc - v_exact)/std_error; 0 for an exact zero-variance match.
    pub pull: f64,
    /// True when |pull| > 4.
    pub flagged: bool,
}

pub fn compare_to_closed_form(cfg: &ExperimentConfig, mc: &McConfig) -> Result<Comparison> {
    let exact = visibility_closed_form(cfg, 1e-10)?;
    let estimate = estimate_f(cfg, mc)?;
    Ok(build_comparison(&estimate, &exact))
}

/// Comparison from already-computed pieces (lets callers reuse the
/// estimate for reporting).
pub fn build_comparison(estimate: &McEstimate, exact: &VisibilityResult) -> Comparison {
    let v_mc = estimate.f_real;
    let v_exact = exact.visibility;
    let pull = if estimate.std_error == 0.0 {
        // Kick-free regime: the estimator is exact; any mismatch beyond
        // float resolution is a real failure.
        if (v_mc - v_exact).abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (v_mc - v_exact) / estimate.std_error
    };
    Comparison {
        v_mc,
        v_exact,
        std_error: estimate.std_error,
        pull,
        flagged: pull.abs() > 4.0,
    }
}

/// Debug dump: one trajectory per line, `n t1 dp1 t2 dp2 ...`,
/// space-separated, times sorted ascending.
pub fn write_trajectories<W: Write>(
    out: &mut W,
    law: &KickLaw,
    t: f64,
    count: usize,
    stream: &mut RandomStream,
) -> io::Result<()> {
    for _ in 0..count {
        let traj = sample_trajectory(law, t, stream)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        write!(out, "{}", traj.event_times.len())?;
        for (tk, dp) in traj.event_times.iter().zip(&traj.jumps) {
            write!(out, " {tk} {dp}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::MoleculeParams;

    fn cfg(temperature: f64, d: f64, t: f64) -> ExperimentConfig {
        ExperimentConfig::new(MoleculeParams::c70(), temperature, d, t).unwrap()
    }

    #[test]
    fn kick_free_regime_is_exact() {
        // Λ(10 K)·t ~ 1e-24: no trajectory ever has a kick.
        let est = estimate_f(&cfg(10.0, 1e-6, 1e-3), &McConfig::new(2000, 7)).unwrap();
        assert_eq!(est.f_real, 1.0);
        assert_eq!(est.f_imag, 0.0);
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.n_used, 2000);

        let cmp = compare_to_closed_form(&cfg(10.0, 1e-6, 1e-3), &McConfig::new(2000, 7)).unwrap();
        assert_eq!(cmp.pull, 0.0);
        assert!(!cmp.flagged);
    }

    #[test]
    fn zero_flight_time_matches_exactly() {
        let cmp = compare_to_closed_form(&cfg(2500.0, 1e-6, 0.0), &McConfig::new(1500, 3)).unwrap();
        assert_eq!(cmp.v_mc, 1.0);
        assert_eq!(cmp.v_exact, 1.0);
        assert_eq!(cmp.pull, 0.0);
    }

    #[test]
    fn estimate_matches_closed_form() {
        let config = cfg(2000.0, 1e-6, 5e-3);
        let est = estimate_f(&config, &McConfig::new(100_000, 20260808)).unwrap();
        let exact = visibility_closed_form(&config, 1e-10).unwrap();
        assert!(
            (est.f_real - exact.visibility).abs() <= 3.0 * est.std_error,
            "f_real {} vs V {} (se {})",
            est.f_real,
            exact.visibility,
            est.std_error
        );
        assert!(
            est.f_imag.abs() <= 3.0 * est.std_error_imag,
            "imaginary part {} (se {})",
            est.f_imag,
            est.std_error_imag
        );
        assert!(
            (est.visibility_hat - exact.visibility).abs()
                <= 3.0 * est.std_error.hypot(est.std_error_imag)
        );
    }

    #[test]
    fn reduction_is_batch_shape_deterministic() {
        let config = cfg(2200.0, 0.8e-6, 4e-3);
        let mut mc = McConfig::new(20_000, 99);
        let a = estimate_f(&config, &mc).unwrap();
        let b = estimate_f(&config, &mc).unwrap();
        assert_eq!(a.f_real.to_bits(), b.f_real.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());

        // A different batch size is a different (but still valid) estimate.
        mc.batch_size = 1000;
        let c = estimate_f(&config, &mc).unwrap();
        assert!((c.f_real - a.f_real).abs() <= 4.0 * a.std_error.max(c.std_error));
    }

    #[test]
    fn independent_seeds_give_distinct_consistent_pulls() {
        let config = cfg(2100.0, 1e-6, 4e-3);
        let a = compare_to_closed_form(&config, &McConfig::new(20_000, 1)).unwrap();
        let b = compare_to_closed_form(&config, &McConfig::new(20_000, 2)).unwrap();
        assert_ne!(a.pull, b.pull);
        assert!(a.pull.abs() <= 4.0 && b.pull.abs() <= 4.0, "{} / {}", a.pull, b.pull);
        assert!(!a.flagged && !b.flagged);
    }

    #[test]
    fn standard_error_scales_as_inverse_sqrt_n() {
        let config = cfg(2000.0, 1e-6, 5e-3);
        let mut ses = Vec::new();
        for &n in &[1_000_u64, 10_000, 100_000] {
            let est = estimate_f(&config, &McConfig::new(n, 5)).unwrap();
            ses.push((n as f64, est.std_error));
        }
        let slope = ((ses[2].1 / ses[0].1).ln()) / ((ses[2].0 / ses[0].0).ln());
        assert!(
            (slope + 0.5).abs() < 0.1,
            "SE slope {slope} (want ≈ -0.5)"
        );
    }

    #[test]
    fn empirical_pattern_agrees_in_kick_free_limit() {
        // Cold molecule: deterministic p̄ = mx/t, so the MC pattern equals
        // the V = 1 closed form up to float roundoff.
        let config = cfg(10.0, 1e-6, 1e-2);
        let grid: Vec<f64> = (-40..=40).map(|k| k as f64 * 2.5e-7).collect();
        let emp = estimate_pattern(&config, &McConfig::new(1000, 13), &grid).unwrap();
        let vis = VisibilityResult {
            visibility: 1.0,
            phase: 0.0,
            lambda: 0.0,
            g_factor: 0.0,
            zeta: 0.0,
        };
        let exact = fringe_pattern(&config, &vis, &grid);
        let scale = exact.intensity.iter().cloned().fold(0.0, f64::max);
        for (i, &x) in grid.iter().enumerate() {
            assert!(
                (emp.pattern.intensity[i] - exact.intensity[i]).abs()
                    <= 3.0 * emp.std_error[i] + 1e-12 * scale,
                "x = {x}"
            );
        }
    }

    #[test]
    fn pattern_visibility_matches_estimate_f() {
        // Envelope-normalized contrast from the pattern vs the direct F
        // estimate: the chain from the intensity to V. The closed form
        // treats kicks as weak against the slit momentum width, so use a
        // slit narrow enough (2 nm) that σ_p dwarfs a recoil.
        let config = cfg(1900.0, 1e-6, 5e-3)
            .with_slit_momentum_width(HBAR / (2.0 * 2e-9))
            .unwrap();
        let dx = crate::visibility::fringe_spacing(&config);
        let peaks: Vec<f64> = (-2_i32..=2).map(|k| k as f64 * dx).collect();
        let troughs: Vec<f64> = (-2_i32..=2).map(|k| (k as f64 + 0.5) * dx).collect();
        let grid: Vec<f64> = peaks.iter().chain(&troughs).copied().collect();

        let emp = estimate_pattern(&config, &McConfig::new(60_000, 31), &grid).unwrap();
        let ratio: Vec<f64> = emp
            .pattern
            .intensity
            .iter()
            .zip(&emp.pattern.envelope)
            .map(|(i, e)| i / e)
            .collect();
        let se_ratio: Vec<f64> = emp
            .std_error
            .iter()
            .zip(&emp.pattern.envelope)
            .map(|(s, e)| s / e)
            .collect();
        let k = peaks.len();
        let mean_max = ratio[..k].iter().sum::<f64>() / k as f64;
        let mean_min = ratio[k..].iter().sum::<f64>() / (grid.len() - k) as f64;
        let v_pattern = (mean_max - mean_min) / (mean_max + mean_min);

        let est = estimate_f(&config, &McConfig::new(60_000, 77)).unwrap();
        let se = se_ratio.iter().sum::<f64>() / grid.len() as f64;
        assert!(
            (v_pattern - est.f_real).abs() <= 3.0 * (se + est.std_error),
            "pattern V {v_pattern} vs F {}",
            est.f_real
        );
    }

    #[test]
    fn pattern_is_symmetric_in_x() {
        let config = cfg(2000.0, 1e-6, 5e-3);
        let xs: Vec<f64> = vec![-6e-6, -3e-6, 3e-6, 6e-6];
        let emp = estimate_pattern(&config, &McConfig::new(40_000, 8), &xs).unwrap();
        for (i, j) in [(0_usize, 3_usize), (1, 2)] {
            let tol = 3.0 * (emp.std_error[i] + emp.std_error[j]);
            assert!(
                (emp.pattern.intensity[i] - emp.pattern.intensity[j]).abs() <= tol,
                "asymmetry at ±{}",
                xs[j]
            );
        }
    }

    #[test]
    fn trajectory_dump_format() {
        let spec = EmissionSpectrum::new(MoleculeParams::c70(), 2500.0, 1e-10).unwrap();
        let law = KickLaw::new(spec).unwrap();
        let mut buf = Vec::new();
        let mut stream = RandomStream::from_seed(4);
        write_trajectories(&mut buf, &law, 2e-3, 5, &mut stream).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        for line in text.lines() {
            let fields: Vec<&str> = line.split(' ').collect();
            let n: usize = fields[0].parse().unwrap();
            assert_eq!(fields.len(), 1 + 2 * n, "line: {line}");
        }
    }
}
