//! Gibbs weighting of near-optimal cuts: energy spectra, a KDE-based
//! suggestion for the count K of sufficiently coherent cuts, inverse
//! temperature solving, and normalized weights.

use std::fmt::Write as _;

use thiserror::Error;

use crate::solver::RankedCuts;

#[derive(Debug, Error)]
pub enum GibbsError {
    #[error("requested {requested} cuts but only {available} are ranked")]
    NotEnoughCuts { requested: usize, available: usize },
    #[error("spectrum needs at least {need} energies, got {have}")]
    SpectrumTooSmall { have: usize, need: usize },
    #[error("energies must be finite")]
    NonFiniteEnergy,
    #[error("spectrum has no gap: all energies within the suggested K are tied to the rest; supply K explicitly")]
    NoGap,
    #[error("density has no interior minimum (flat or unimodal spectrum); supply K explicitly")]
    NoDensityMinimum,
    #[error("K = {k} must satisfy 1 <= K < N/2 with N = {n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("no strict energy gap after the first {k} cuts")]
    GapViolation { k: usize },
    #[error("bracket expansion failed to find a sign change")]
    BracketNotFound,
}

/// Ascending energies of the top cuts, E = -coherence.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    energies: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(mut energies: Vec<f64>) -> Result<Self, GibbsError> {
        if energies.len() < 2 {
            return Err(GibbsError::SpectrumTooSmall {
                have: energies.len(),
                need: 2,
            });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(GibbsError::NonFiniteEnergy);
        }
        energies.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
        Ok(Self { energies })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Energies of the `m` best cuts of a ranked list.
pub fn spectrum_from_cuts(ranked: &RankedCuts, m: usize) -> Result<EnergySpectrum, GibbsError> {
    if m > ranked.cuts.len() {
        return Err(GibbsError::NotEnoughCuts {
            requested: m,
            available: ranked.cuts.len(),
        });
    }
    EnergySpectrum::new(ranked.cuts[..m].iter().map(|c| -c.coherence).collect())
}

/// Gaussian KDE over the spectrum on a 512-point grid.
#[derive(Debug, Clone)]
pub struct KdeCurve {
    pub xs: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

const KDE_GRID: usize = 512;

/// Silverman's rule of thumb, falling back to the standard deviation when
/// the interquartile range degenerates to zero.
pub fn silverman_bandwidth(values: &[f64]) -> Option<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();

    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
    let quant = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    let iqr = quant(0.75) - quant(0.25);

    let spread = [sd, iqr / 1.34]
        .into_iter()
        .filter(|s| *s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !spread.is_finite() {
        return None;
    }
    Some(0.9 * spread * n.powf(-0.2))
}

pub fn kde_curve(
    spectrum: &EnergySpectrum,
    bandwidth: Option<f64>,
) -> Result<KdeCurve, GibbsError> {
    let energies = spectrum.energies();
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(_) | None => silverman_bandwidth(energies).ok_or(GibbsError::NoDensityMinimum)?,
    };
    let lo = energies[0] - 3.0 * h;
    let hi = energies[energies.len() - 1] + 3.0 * h;
    let step = (hi - lo) / (KDE_GRID - 1) as f64;
    let norm = 1.0 / (energies.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let mut xs = Vec::with_capacity(KDE_GRID);
    let mut density = Vec::with_capacity(KDE_GRID);
    for g in 0..KDE_GRID {
        let x = lo + g as f64 * step;
        let d: f64 = energies
            .iter()
            .map(|e| {
                let u = (x - e) / h;
                (-0.5 * u * u).exp()
            })
            .sum::<f64>()
            * norm;
        xs.push(x);
        density.push(d);
    }
    Ok(KdeCurve {
        xs,
        density,
        bandwidth: h,
    })
}

/// Result of thresholding the energy density.
#[derive(Debug, Clone, PartialEq)]
pub struct KSuggestion {
    pub k: usize,
    pub threshold: f64,
    pub bandwidth: f64,
}

/// Suggests K by thresholding at the first local minimum of the energy
/// density above the lowest-energy mode. Requires a strict gap after the
/// K-th energy, widening K across ties when needed.
pub fn suggest_k(
    spectrum: &EnergySpectrum,
    bandwidth: Option<f64>,
) -> Result<KSuggestion, GibbsError> {
    let n = spectrum.len();
    if n < 4 {
        return Err(GibbsError::SpectrumTooSmall { have: n, need: 4 });
    }
    let curve = kde_curve(spectrum, bandwidth)?;

    // Walk the density: climb the first mode, descend, stop at the first
    // upturn. Plateaus extend the current phase.
    let mut falling = false;
    let mut threshold = None;
    for i in 1..curve.density.len() {
        let prev = curve.density[i - 1];
        let here = curve.density[i];
        if !falling && here < prev {
            falling = true;
        } else if falling && here > prev {
            threshold = Some(curve.xs[i - 1]);
            break;
        }
    }
    let threshold = threshold.ok_or(GibbsError::NoDensityMinimum)?;

    let energies = spectrum.energies();
    let mut k = energies.iter().filter(|&&e| e < threshold).count();
    if k == 0 {
        return Err(GibbsError::NoDensityMinimum);
    }
    while k < n && energies[k] == energies[k - 1] {
        k += 1;
    }
    if k >= n {
        return Err(GibbsError::NoGap);
    }
    Ok(KSuggestion {
        k,
        threshold,
        bandwidth: curve.bandwidth,
    })
}

/// Partial sums of exp(-beta * E) over the k lowest energies, shifted by the
/// minimum energy for stability. Scaling cancels in the defining equation.
fn shifted_partition_terms(energies: &[f64], beta: f64) -> Vec<f64> {
    let shift = energies[0];
    energies
        .iter()
        .map(|e| (-beta * (e - shift)).exp())
        .collect()
}

fn balance(energies: &[f64], k: usize, beta: f64) -> f64 {
    let terms = shifted_partition_terms(energies, beta);
    let z_k: f64 = terms[..k].iter().sum();
    let z_n: f64 = terms.iter().sum();
    let frac = 1.0 - k as f64 / energies.len() as f64;
    z_k - frac * z_n
}

/// Solves Z(beta; K) = (1 - K/N) * Z(beta; N) for beta >= 0 by bracket
/// expansion from [0, 1] and bisection. The root exists because the balance
/// is 2K - N < 0 at beta = 0 and positive for large beta when a strict gap
/// separates the K-th and (K+1)-th energies.
pub fn solve_beta(spectrum: &EnergySpectrum, k: usize) -> Result<f64, GibbsError> {
    let n = spectrum.len();
    if k < 1 || 2 * k >= n {
        return Err(GibbsError::KOutOfRange { k, n });
    }
    let energies = spectrum.energies();
    if energies[k] <= energies[k - 1] {
        return Err(GibbsError::GapViolation { k });
    }

    let f = |beta: f64| balance(energies, k, beta);
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(GibbsError::BracketNotFound);
        }
    }
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Residual of the defining equation relative to the partition function:
/// |Z(beta; K) - (1 - K/N) Z(beta; N)| / Z(beta; N).
pub fn defining_residual(spectrum: &EnergySpectrum, k: usize, beta: f64) -> f64 {
    let terms = shifted_partition_terms(spectrum.energies(), beta);
    let z_n: f64 = terms.iter().sum();
    balance(spectrum.energies(), k, beta).abs() / z_n
}

/// Normalized Gibbs weights w_i = exp(-beta E_i) / Z, computed with the
/// max-shift trick.
pub fn gibbs_weights(spectrum: &EnergySpectrum, beta: f64) -> Vec<f64> {
    let terms = shifted_partition_terms(spectrum.energies(), beta);
    let z: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / z).collect()
}

/// Spectrum, solved (or forced) inverse temperature, and normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsResult {
    pub beta: f64,
    /// None when beta was forced rather than solved from a K threshold.
    pub k: Option<usize>,
    pub weights: Vec<f64>,
}

/// `rank,energy,weight` CSV over the spectrum.
pub fn spectrum_csv(spectrum: &EnergySpectrum, weights: &[f64]) -> String {
    let mut out = String::from("rank,energy,weight\n");
    for (i, (e, w)) in spectrum.energies().iter().zip(weights).enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, e, w);
    }
    out
}

/// `x,density` CSV of a KDE curve.
pub fn kde_csv(curve: &KdeCurve) -> String {
    let mut out = String::from("x,density\n");
    for (x, d) in curve.xs.iter().zip(&curve.density) {
        let _ = writeln!(out, "{x},{d}");
    }
    out
}
