//! Numerical laboratory for the bilinear space-time estimates: builds
//! frequency-localized Gaussian data, forms products of exactly propagated
//! free waves (plain or conjugate phase), evaluates the space-time L^2 norm
//! by quadrature and by an exact pair-sum expansion, and fits scaling
//! exponents against the predicted bound formulas.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{inverse_transform, SpectralField};
use crate::fit::{fit_loglog, LineFit};
use crate::grid::{Freq, Grid, TAU};
use crate::multiplier::AngularSector;

/// Support constraints for one frequency-localized data factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSpec {
    /// Dyadic magnitude: support restricted to band_n <= |zeta| < 2 band_n.
    pub band_n: f64,
    /// Optional angular sector restriction.
    pub sector: Option<(f64, i64)>,
    /// Optional one-sided x-frequency constraints.
    pub xi_min: Option<f64>,
    pub xi_max: Option<f64>,
}

impl DataSpec {
    pub fn band(n: f64) -> Self {
        DataSpec {
            band_n: n,
            sector: None,
            xi_min: None,
            xi_max: None,
        }
    }

    fn admits(&self, zeta: &Freq, sector: &Option<AngularSector>) -> bool {
        let r = zeta.norm();
        if !(self.band_n <= r && r < 2.0 * self.band_n) {
            return false;
        }
        if let Some(s) = sector {
            if !s.contains(zeta) {
                return false;
            }
        }
        if let Some(lo) = self.xi_min {
            if zeta.xi < lo {
                return false;
            }
        }
        if let Some(hi) = self.xi_max {
            if zeta.xi > hi {
                return false;
            }
        }
        true
    }
}

/// Unit-L^2 field with independent complex Gaussian coefficients on the
/// admissible lattice set. Same seed, same field.
pub fn make_localized_data(grid: &Grid, spec: &DataSpec, seed: u64) -> Result<SpectralField> {
    if !(spec.band_n > 0.0) {
        return Err(Error::argument(format!(
            "band magnitude must be positive, got {}",
            spec.band_n
        )));
    }
    let sector = match spec.sector {
        Some((theta, ell)) => Some(AngularSector::new(theta, ell)?),
        None => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let mut count = 0usize;
    for (j, i, zeta) in grid.iter_freqs() {
        if grid.is_nyquist(j, i) || !spec.admits(&zeta, &sector) {
            continue;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        f.set_coeff(j, i, Complex64::new(re, im));
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySupport(format!(
            "no lattice point satisfies band [{}, {}), sector {:?}, xi in [{:?}, {:?}] \
             at resolution dxi = {}",
            spec.band_n,
            2.0 * spec.band_n,
            spec.sector,
            spec.xi_min,
            spec.xi_max,
            grid.dxi()
        )));
    }
    let norm = f.l2_norm();
    f.scale(Complex64::new(1.0 / norm, 0.0));
    Ok(f)
}

/// Which bilinear product and indicator set an experiment exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plain product, x-frequency separation |xi1 - xi2| >= M.
    Separation,
    /// Plain product, separation plus transversality |cos angle| <= theta.
    Angular,
    /// Conjugate-phase product, |xi1 + xi2| >= M, second factor in a sector.
    ConjugateSector,
    /// Conjugate-phase product, |xi1 + xi2| >= M only.
    ConjugateSeparation,
    /// Single band against its own conjugate: the L^4 norm of a free wave.
    EqualBandL4,
}

impl Variant {
    /// Sign of |zeta_2|^2 in the time phase.
    fn phase_sign(&self) -> f64 {
        match self {
            Variant::Separation | Variant::Angular => 1.0,
            _ => -1.0,
        }
    }

    fn admits_pair(&self, z1: &Freq, z2: &Freq, m: f64, theta: f64) -> bool {
        match self {
            Variant::Separation => (z1.xi - z2.xi).abs() >= m,
            Variant::Angular => {
                if (z1.xi - z2.xi).abs() < m {
                    return false;
                }
                let n1 = z1.norm();
                let n2 = z2.norm();
                n1 > 0.0 && n2 > 0.0 && (z1.dot(z2) / (n1 * n2)).abs() <= theta
            }
            Variant::ConjugateSector | Variant::ConjugateSeparation => (z1.xi + z2.xi).abs() >= m,
            Variant::EqualBandL4 => true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearExperiment {
    pub variant: Variant,
    pub n1: f64,
    pub n2: f64,
    pub m: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Sector index of the second factor for the conjugate-sector variant;
    /// for the angular variant sectors are derived from theta.
    #[serde(default = "default_ell")]
    pub ell: i64,
    /// Fixed half-width of the time window; 0 means adaptive.
    #[serde(default)]
    pub t_window: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_theta() -> f64 {
    0.1
}

fn default_ell() -> i64 {
    1
}

fn default_trials() -> usize {
    4
}

impl BilinearExperiment {
    pub fn validate(&self) -> Result<()> {
        if !(self.n1 > 1.0 && self.n2 > 1.0) {
            return Err(Error::argument(format!(
                "band magnitudes must exceed 1, got {} and {}",
                self.n1, self.n2
            )));
        }
        match self.variant {
            Variant::Separation | Variant::Angular | Variant::ConjugateSeparation
            | Variant::ConjugateSector => {
                if !(self.m > 1.0) {
                    return Err(Error::argument(format!(
                        "separation scale M must exceed 1, got {}",
                        self.m
                    )));
                }
            }
            Variant::EqualBandL4 => {}
        }
        if matches!(
            self.variant,
            Variant::Angular | Variant::ConjugateSector
        ) && !(self.theta > 0.0 && self.theta < 1.0)
        {
            return Err(Error::argument(format!(
                "angular width must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if self.trials == 0 {
            return Err(Error::argument("at least one trial required"));
        }
        Ok(())
    }

    /// The predicted majorant for ||F|| / (||phi1|| ||phi2||).
    pub fn bound_formula(&self) -> f64 {
        let bracket = |x: f64| (1.0 + x * x).sqrt();
        match self.variant {
            Variant::Separation | Variant::ConjugateSeparation => {
                (self.n1.min(self.n2) / self.m).sqrt()
            }
            Variant::Angular => (bracket(self.theta * self.n1.max(self.n2)) / self.m).sqrt(),
            Variant::ConjugateSector => {
                (bracket(self.theta * (self.n1 + self.n2)) / self.m).sqrt()
            }
            Variant::EqualBandL4 => 1.0,
        }
    }

    /// Data recipes guaranteeing the variant's support hypotheses, so that
    /// the product-form quadrature and the indicator-carrying pair sum see
    /// the same function wherever both are defined.
    pub fn data_specs(&self) -> (DataSpec, DataSpec) {
        match self.variant {
            Variant::Separation => {
                let mut d1 = DataSpec::band(self.n1);
                d1.xi_min = Some(0.0);
                let mut d2 = DataSpec::band(self.n2);
                d2.xi_max = Some(-self.m);
                (d1, d2)
            }
            Variant::Angular => {
                // transversal sectors near 45 and 135 degrees
                let ell1 = (std::f64::consts::FRAC_PI_4 / self.theta).round() as i64;
                let ell2 = ell1 + (std::f64::consts::FRAC_PI_2 / self.theta).round() as i64;
                let mut d1 = DataSpec::band(self.n1);
                d1.sector = Some((self.theta, ell1));
                d1.xi_min = Some(0.0);
                let mut d2 = DataSpec::band(self.n2);
                d2.sector = Some((self.theta, ell2));
                d2.xi_max = Some(-self.m);
                (d1, d2)
            }
            Variant::ConjugateSeparation => {
                let mut d1 = DataSpec::band(self.n1);
                d1.xi_min = Some(self.m / 2.0);
                let mut d2 = DataSpec::band(self.n2);
                d2.xi_min = Some(self.m / 2.0);
                (d1, d2)
            }
            Variant::ConjugateSector => {
                let mut d1 = DataSpec::band(self.n1);
                d1.xi_min = Some(self.m / 2.0);
                let mut d2 = DataSpec::band(self.n2);
                d2.sector = Some((self.theta, self.ell));
                d2.xi_min = Some(self.m / 2.0);
                (d1, d2)
            }
            Variant::EqualBandL4 => (DataSpec::band(self.n1), DataSpec::band(self.n1)),
        }
    }

    /// Build the trial's data pair. For the equal-band variant the second
    /// factor is the reflected conjugate of the first, so the product is
    /// |free wave|^2.
    pub fn data_pair(&self, grid: &Grid, trial: usize) -> Result<(SpectralField, SpectralField)> {
        let (d1, d2) = self.data_specs();
        let s = self
            .seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add(trial as u64);
        let phi1 = make_localized_data(grid, &d1, s)?;
        let phi2 = if self.variant == Variant::EqualBandL4 {
            conjugate_reflect(&phi1)
        } else {
            make_localized_data(grid, &d2, s.wrapping_add(0x5bf0_3635))?
        };
        Ok((phi1, phi2))
    }
}

/// b-type companion field: hat(g)(zeta) = conj(hat(f)(-zeta)).
pub fn conjugate_reflect(f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    let mut g = SpectralField::zeros(&grid);
    for (j, i, _) in grid.iter_freqs() {
        if grid.is_nyquist(j, i) {
            continue;
        }
        let jn = grid.row_of_eta_index(-grid.eta_index(j)).unwrap();
        let in_ = grid.col_of_xi_index(-grid.xi_index(i)).unwrap();
        g.set_coeff(j, i, f.coeff(jn, in_).conj());
    }
    g
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

const MAX_ORACLE_MODES: usize = 1 << 11;

struct Mode {
    ci: i64,
    ej: i64,
    zeta: Freq,
    a: Complex64,
}

fn modes(f: &SpectralField) -> Vec<Mode> {
    let grid = f.grid();
    let mut out = Vec::new();
    for (j, i, zeta) in grid.iter_freqs() {
        if grid.is_nyquist(j, i) {
            continue;
        }
        let a = f.coeff(j, i);
        if a.norm_sqr() > 0.0 {
            out.push(Mode {
                ci: grid.xi_index(i),
                ej: grid.eta_index(j),
                zeta,
                a,
            });
        }
    }
    out
}

/// Squared norm split into the exactly resonant pair sum (which grows
/// linearly in T on the lattice) and the oscillatory remainder.
#[derive(Debug, Clone, Copy)]
pub struct OracleSplit {
    /// Contribution of pairs with dw = 0; equals 2 T x (resonant rate).
    pub resonant: f64,
    /// Contribution of pairs with dw != 0 through 2 T sinc(dw T); bounded
    /// in T, oscillatory once every pair has |dw| T >> 1.
    pub oscillatory: f64,
}

impl OracleSplit {
    pub fn total(&self) -> f64 {
        self.resonant + self.oscillatory
    }
}

/// Exact squared space-time L^2 norm of the indicator-restricted product
/// over [-T, T]: pairs sharing a total frequency interact through the
/// kernel 2 T sinc(dw T).
pub fn bilinear_norm_sq_oracle(
    phi1: &SpectralField,
    phi2: &SpectralField,
    experiment: &BilinearExperiment,
    t: f64,
) -> Result<f64> {
    Ok(bilinear_norm_sq_split(phi1, phi2, experiment, t)?.total())
}

/// Pair-sum oracle with the resonant/oscillatory split exposed. Pairs
/// whose time frequencies agree to within rounding are classed resonant:
/// on the frequency lattice these never dephase, so their contribution is
/// exactly linear in T while everything else stays bounded.
pub fn bilinear_norm_sq_split(
    phi1: &SpectralField,
    phi2: &SpectralField,
    experiment: &BilinearExperiment,
    t: f64,
) -> Result<OracleSplit> {
    phi1.same_grid(phi2)?;
    let grid = phi1.grid();
    let s1 = modes(phi1);
    let s2 = modes(phi2);
    if s1.len() > MAX_ORACLE_MODES || s2.len() > MAX_ORACLE_MODES {
        return Err(Error::ComplexityGuard(format!(
            "pair-sum oracle supports at most {MAX_ORACLE_MODES} modes per factor, got {} and {}",
            s1.len(),
            s2.len()
        )));
    }
    let sign = experiment.variant.phase_sign();
    let mut bins: HashMap<(i64, i64), Vec<(f64, Complex64)>> = HashMap::new();
    for m1 in &s1 {
        for m2 in &s2 {
            if !experiment
                .variant
                .admits_pair(&m1.zeta, &m2.zeta, experiment.m, experiment.theta)
            {
                continue;
            }
            let omega = m1.zeta.norm_sq() + sign * m2.zeta.norm_sq();
            bins.entry((m1.ci + m2.ci, m1.ej + m2.ej))
                .or_default()
                .push((omega, m1.a * m2.a));
        }
    }
    let w = grid.weight();
    let pref = w * w * w / (TAU * TAU);
    let mut resonant = 0.0;
    let mut oscillatory = 0.0;
    for entries in bins.values() {
        for (p, (wp, ap)) in entries.iter().enumerate() {
            // diagonal
            resonant += ap.norm_sqr() * 2.0 * t;
            for (wq, aq) in &entries[p + 1..] {
                let dw = wp - wq;
                let term = 2.0 * (ap * aq.conj()).re;
                if dw.abs() <= 1e-9 * (1.0 + wp.abs() + wq.abs()) {
                    resonant += term * 2.0 * t;
                } else {
                    oscillatory += term * 2.0 * t * sinc(dw * t);
                }
            }
        }
    }
    Ok(OracleSplit {
        resonant: pref * resonant,
        oscillatory: pref * oscillatory,
    })
}

/// Same norm by composite-Simpson time quadrature of the physical-space
/// product of the two propagated factors, evaluated alias-free on a 2x
/// grid. Valid when the data supports make every indicator identically 1
/// (as the built-in data recipes do).
pub fn bilinear_norm_sq_quadrature(
    phi1: &SpectralField,
    phi2: &SpectralField,
    experiment: &BilinearExperiment,
    t: f64,
    n_t: usize,
) -> Result<f64> {
    phi1.same_grid(phi2)?;
    let n_t = if n_t % 2 == 0 { n_t } else { n_t + 1 };
    let grid = phi1.grid().clone();
    let big = Grid::new(grid.l_x(), 2 * grid.n_x(), 2 * grid.n_y())?;
    let sign = experiment.variant.phase_sign();
    let cell = big.dx() * big.dy();
    let h = 2.0 * t / n_t as f64;

    let pad = |f: &SpectralField, tk: f64, s: f64| -> Vec<Complex64> {
        let mut p = SpectralField::zeros(&big);
        for (j, i, zeta) in grid.iter_freqs() {
            if grid.is_nyquist(j, i) {
                continue;
            }
            let c = f.coeff(j, i);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let jj = big.row_of_eta_index(grid.eta_index(j)).unwrap();
            let ii = big.col_of_xi_index(grid.xi_index(i)).unwrap();
            p.set_coeff(jj, ii, c * Complex64::from_polar(1.0, -s * zeta.norm_sq() * tk));
        }
        inverse_transform(&p)
    };

    let sample = |k: usize| -> f64 {
        let tk = -t + k as f64 * h;
        let u1 = pad(phi1, tk, 1.0);
        let u2 = pad(phi2, tk, sign);
        u1.iter()
            .zip(&u2)
            .map(|(a, b)| (a * b).norm_sqr())
            .sum::<f64>()
            * cell
    };

    let values: Vec<f64> = (0..=n_t).into_par_iter().map(sample).collect();
    let mut acc = values[0] + values[n_t];
    for (k, v) in values.iter().enumerate().take(n_t).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(acc * h / 3.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowChoice {
    pub t_star: f64,
    pub norm_sq: f64,
    /// Relative increment at the last doubling; above 1% the window search
    /// did not settle and the value is flagged unreliable.
    pub tail: f64,
    pub reliable: bool,
}

/// Pick the time window for a trial.
///
/// For the x-separated variants the hypothesis guarantees a relative
/// group speed of at least 2M between the two packets, so on a periodic
/// box of length L_x they re-collide every L_x/(2M); integrating past one
/// crossing measures wrap-around artifacts of the box (the squared norm
/// then grows linearly in T through the exactly resonant lattice pairs).
/// The window is therefore pinned to one crossing, T* = L_x/(4M), and the
/// oscillatory (non-resonant) increment over the last doubling into T* is
/// reported as the tail; below 1% the value is flagged reliable.
///
/// The equal-band variant has no guaranteed separation; there T doubles
/// adaptively until the oscillatory part of the pair sum settles.
pub fn choose_time_window(
    phi1: &SpectralField,
    phi2: &SpectralField,
    experiment: &BilinearExperiment,
) -> Result<WindowChoice> {
    if experiment.t_window > 0.0 {
        let t = experiment.t_window;
        let norm_sq = bilinear_norm_sq_oracle(phi1, phi2, experiment, t)?;
        return Ok(WindowChoice {
            t_star: t,
            norm_sq,
            tail: 0.0,
            reliable: true,
        });
    }
    if experiment.variant != Variant::EqualBandL4 {
        let t = phi1.grid().l_x() / (4.0 * experiment.m);
        let half = bilinear_norm_sq_split(phi1, phi2, experiment, 0.5 * t)?;
        let full = bilinear_norm_sq_split(phi1, phi2, experiment, t)?;
        let tail =
            (full.oscillatory - half.oscillatory).abs() / full.total().abs().max(1e-300);
        return Ok(WindowChoice {
            t_star: t,
            norm_sq: full.total(),
            tail,
            reliable: tail < 0.01,
        });
    }
    let mut t = 0.25;
    let mut prev = bilinear_norm_sq_split(phi1, phi2, experiment, t)?;
    let mut tail = f64::INFINITY;
    for _ in 0..14 {
        let next = bilinear_norm_sq_split(phi1, phi2, experiment, 2.0 * t)?;
        tail = (next.oscillatory - prev.oscillatory).abs() / next.total().abs().max(1e-300);
        t *= 2.0;
        prev = next;
        if tail < 0.01 {
            return Ok(WindowChoice {
                t_star: t,
                norm_sq: prev.total(),
                tail,
                reliable: true,
            });
        }
    }
    Ok(WindowChoice {
        t_star: t,
        norm_sq: prev.total(),
        tail,
        reliable: false,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialRecord {
    pub axis_value: f64,
    pub trial: usize,
    pub norm: f64,
    pub bound: f64,
    pub ratio: f64,
    pub t_star: f64,
    pub tail: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    M,
    Theta,
    N1,
    N2,
    N0,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub variant: Variant,
    pub axis: SweepAxis,
    pub records: Vec<TrialRecord>,
    /// Per axis value, the max-over-trials measured norm and ratio.
    pub max_norm: Vec<(f64, f64)>,
    pub max_ratio: Vec<(f64, f64)>,
    /// Log-log fit of max norm against the axis (needs >= 4 points).
    pub norm_slope: Option<LineFit>,
    /// Log-log fit of max ratio against the axis.
    pub ratio_slope: Option<LineFit>,
    /// Largest ratio over the whole sweep: the empirical constant C.
    pub c_max: f64,
    pub fit_warning: Option<String>,
}

fn with_axis(base: &BilinearExperiment, axis: SweepAxis, v: f64) -> BilinearExperiment {
    let mut e = base.clone();
    match axis {
        SweepAxis::M => e.m = v,
        SweepAxis::Theta => e.theta = v,
        SweepAxis::N1 => e.n1 = v,
        SweepAxis::N2 => e.n2 = v,
        SweepAxis::N0 => {
            e.n1 = v;
            e.n2 = v;
        }
    }
    e
}

/// Run trials over a sweep axis and fit the scaling of the max norm.
pub fn scaling_sweep(
    grid: &Grid,
    base: &BilinearExperiment,
    axis: SweepAxis,
    values: &[f64],
) -> Result<ExperimentReport> {
    base.validate()?;
    if values.is_empty() {
        return Err(Error::argument("sweep needs at least one axis value"));
    }
    let mut records = Vec::new();
    for &v in values {
        let exp = with_axis(base, axis, v);
        exp.validate()?;
        let trial_rows: Vec<Result<TrialRecord>> = (0..exp.trials)
            .into_par_iter()
            .map(|trial| {
                let (phi1, phi2) = exp.data_pair(grid, trial)?;
                let win = choose_time_window(&phi1, &phi2, &exp)?;
                let norm = win.norm_sq.max(0.0).sqrt();
                let bound = exp.bound_formula();
                Ok(TrialRecord {
                    axis_value: v,
                    trial,
                    norm,
                    bound,
                    ratio: norm / bound,
                    t_star: win.t_star,
                    tail: win.tail,
                    reliable: win.reliable,
                })
            })
            .collect();
        for row in trial_rows {
            records.push(row?);
        }
    }
    let mut max_norm = Vec::new();
    let mut max_ratio = Vec::new();
    for &v in values {
        let rows = records.iter().filter(|r| r.axis_value == v);
        let mn = rows
            .clone()
            .map(|r| r.norm)
            .fold(f64::NEG_INFINITY, f64::max);
        let mr = rows.map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        max_norm.push((v, mn));
        max_ratio.push((v, mr));
    }
    let c_max = max_ratio.iter().map(|p| p.1).fold(0.0, f64::max);
    let (norm_slope, ratio_slope, fit_warning) = if values.len() >= 4 {
        let xs: Vec<f64> = max_norm.iter().map(|p| p.0).collect();
        (
            fit_loglog(&xs, &max_norm.iter().map(|p| p.1).collect::<Vec<_>>()),
            fit_loglog(&xs, &max_ratio.iter().map(|p| p.1).collect::<Vec<_>>()),
            None,
        )
    } else {
        (
            None,
            None,
            Some(format!(
                "only {} axis points; at least 4 required for a fit",
                values.len()
            )),
        )
    };
    Ok(ExperimentReport {
        variant: base.variant,
        axis,
        records,
        max_norm,
        max_ratio,
        norm_slope,
        ratio_slope,
        c_max,
        fit_warning,
    })
}
