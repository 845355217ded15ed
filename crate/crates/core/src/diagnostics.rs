//! Conserved quantities, the modified energy with its quartic correction,
//! and the exact lattice decomposition of its time derivative.
//!
//! All quartic/sextic contractions run over the zero-sum subsets of the
//! non-Nyquist lattice, pair coefficients as a(z) and b(z) = conj(a(-z)),
//! and carry one factor of the measure weight per free frequency.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{inverse_transform, SpaceTimeTrace, SpectralField};
use crate::grid::{Freq, Grid, TAU};
use crate::multiplier::{lambda4, lambda4_tilde, MultiplierSpec};

/// L^2 mass, integral of |u|^2.
pub fn mass(f: &SpectralField) -> f64 {
    f.l2_norm_sq()
}

/// Kinetic part (1/2) integral of |grad u|^2, evaluated spectrally.
pub fn kinetic_energy(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let mut acc = 0.0;
    for (j, i, zeta) in grid.iter_freqs() {
        acc += zeta.norm_sq() * f.coeff(j, i).norm_sqr();
    }
    0.5 * grid.weight() * acc
}

/// Alias-free integral of |u|^4: the field is resolved on a 2x finer grid
/// so that the degree-4 product is integrated exactly by the trapezoid rule.
pub fn quartic_integral(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let big = Grid::new(grid.l_x(), 2 * grid.n_x(), 2 * grid.n_y()).expect("padded grid");
    let mut padded = SpectralField::zeros(&big);
    for j in 0..grid.n_y() {
        for i in 0..grid.n_x() {
            if grid.is_nyquist(j, i) {
                continue;
            }
            let jj = big.row_of_eta_index(grid.eta_index(j)).unwrap();
            let ii = big.col_of_xi_index(grid.xi_index(i)).unwrap();
            padded.set_coeff(jj, ii, f.coeff(j, i));
        }
    }
    let phys = inverse_transform(&padded);
    let cell = big.dx() * big.dy();
    phys.iter().map(|v| {
        let m2 = v.norm_sqr();
        m2 * m2
    }).sum::<f64>()
        * cell
}

/// Defocusing energy E(u) = (1/2)||grad u||^2 + (1/4) integral |u|^4.
pub fn energy(f: &SpectralField) -> f64 {
    kinetic_energy(f) + 0.25 * quartic_integral(f)
}

/// Sobolev norm ||u||_{H^s} with Japanese-bracket weights.
pub fn hs_norm(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    let mut acc = 0.0;
    for (j, i, zeta) in grid.iter_freqs() {
        acc += zeta.bracket().powf(2.0 * s) * f.coeff(j, i).norm_sqr();
    }
    (grid.weight() * acc).sqrt()
}

/// One nonzero, non-Nyquist lattice mode of a field, with precomputed data
/// for the contraction loops.
#[derive(Debug, Clone, Copy)]
struct Mode {
    ci: i64,
    ej: i64,
    zeta: Freq,
    a: Complex64,
    norm: f64,
}

fn support(f: &SpectralField) -> Vec<Mode> {
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
                norm: zeta.norm(),
            });
        }
    }
    out
}

/// Coefficient lookup by signed mode indices; zero outside the non-Nyquist
/// lattice.
fn lookup(f: &SpectralField, ci: i64, ej: i64) -> Complex64 {
    let grid = f.grid();
    match (grid.col_of_xi_index(ci), grid.row_of_eta_index(ej)) {
        (Some(i), Some(j)) => f.coeff(j, i),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// How the quartic correction term is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuarticMode {
    /// Sum Lambda_4 over every zero-sum quadruple of the full support.
    Exact,
    /// Drop modes with |a| below eps_amp times the largest coefficient and
    /// with |zeta| above k_max before summing. Converges to `Exact` as
    /// eps_amp -> 0, k_max -> infinity.
    Thresholded { eps_amp: f64, k_max: f64 },
    /// Evaluate the Lambda_4 = 1 bulk as the alias-free integral of |u|^4
    /// and sum only the (Lambda_4 - 1) residual, which vanishes whenever
    /// all four frequencies are below the low threshold.
    SplitLow,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub quadratic: f64,
    pub quartic: f64,
    pub total: f64,
    /// Size of the imaginary part discarded from the quartic contraction;
    /// should sit at rounding level for Hermitian data.
    pub imag_residual: f64,
}

fn guard(count: u128, budget: Option<u128>, what: &str) -> Result<()> {
    let limit = budget.unwrap_or(4_000_000_000);
    if count > limit {
        return Err(Error::ComplexityGuard(format!(
            "{what} needs {count} contraction terms, budget is {limit}"
        )));
    }
    Ok(())
}

/// Modified energy: (1/2) integral m(zeta)^2 |zeta|^2 |a|^2 plus the
/// Lambda_4-weighted quartic correction.
pub fn modified_energy(
    f: &SpectralField,
    spec: &MultiplierSpec,
    mode: QuarticMode,
    budget: Option<u128>,
) -> Result<EnergyBreakdown> {
    let grid = f.grid();
    let w = grid.weight();
    let mut quadratic = 0.0;
    for (j, i, zeta) in grid.iter_freqs() {
        if grid.is_nyquist(j, i) {
            continue;
        }
        quadratic += spec.m2_w2(&zeta) * f.coeff(j, i).norm_sqr();
    }
    quadratic *= 0.5 * w;

    // thresholding must zero the dropped modes everywhere, including the
    // constraint-forced fourth-frequency lookups
    let filtered;
    let f = if let QuarticMode::Thresholded { eps_amp, k_max } = mode {
        let peak = f
            .coeffs()
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let cut = eps_amp * peak;
        let mut g = f.clone();
        for (j, i, zeta) in grid.iter_freqs() {
            if g.coeff(j, i).norm() < cut || zeta.norm() > k_max {
                g.set_coeff(j, i, Complex64::new(0.0, 0.0));
            }
        }
        filtered = g;
        &filtered
    } else {
        f
    };

    let supp = support(f);
    let n = supp.len() as u128;
    if let Err(e) = guard(n * n * n, budget, "quartic contraction") {
        if mode == QuarticMode::Exact {
            return Err(Error::ComplexityGuard(format!(
                "{e}; rerun with the thresholded quartic mode"
            )));
        }
        return Err(e);
    }

    let low = spec.low_threshold();
    let pref = w * w * w / (4.0 * TAU * TAU);
    let split = mode == QuarticMode::SplitLow;

    let sum: Complex64 = supp
        .par_iter()
        .map(|m1| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m2 in &supp {
                // b is supported on the negated lattice
                let ci2 = -m2.ci;
                let ej2 = -m2.ej;
                let z2 = -m2.zeta;
                let b2 = m2.a.conj();
                let a12 = m1.a * b2;
                for m3 in &supp {
                    let ci_sum = m1.ci + ci2 + m3.ci;
                    let ej_sum = m1.ej + ej2 + m3.ej;
                    let a4 = lookup(f, ci_sum, ej_sum);
                    if a4.norm_sqr() == 0.0 {
                        continue;
                    }
                    let z4 = Freq::new(-grid.dxi() * ci_sum as f64, -(ej_sum as f64));
                    if split
                        && m1.norm < low
                        && m2.norm < low
                        && m3.norm < low
                        && z4.norm() < low
                    {
                        continue;
                    }
                    let z = [m1.zeta, z2, m3.zeta, z4];
                    let lam = if split {
                        lambda4(spec, &z) - 1.0
                    } else {
                        lambda4(spec, &z)
                    };
                    if lam != 0.0 {
                        acc += lam * a12 * m3.a * a4.conj();
                    }
                }
            }
            acc
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);

    let mut quartic = pref * sum.re;
    if split {
        quartic += 0.25 * quartic_integral(f);
    }
    Ok(EnergyBreakdown {
        quadratic,
        quartic,
        total: quadratic + quartic,
        imag_residual: (pref * sum.im).abs(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxBreakdown {
    /// Contribution of the Lambda_4-tilde quartic contraction.
    pub quartic_flux: f64,
    /// Contribution of the Lambda_6 sextic contraction.
    pub sextic_flux: f64,
    pub total: f64,
    pub imag_residual: f64,
}

/// Exact time derivative of the modified energy along the alias-free lattice
/// flow, decomposed into the quartic (Lambda_4-tilde) and sextic (Lambda_6)
/// contractions.
///
/// A merged-frequency term of Lambda_6 is dropped when the merged frequency
/// leaves the non-Nyquist lattice; with that convention the decomposition
/// matches a finite-difference derivative of the modified energy along
/// `dynamics::lawson_rk4_step` trajectories to discretization accuracy.
pub fn modified_energy_flux(
    f: &SpectralField,
    spec: &MultiplierSpec,
    budget: Option<u128>,
) -> Result<FluxBreakdown> {
    let grid = f.grid();
    let w = grid.weight();
    let dxi = grid.dxi();
    let supp = support(f);
    let n = supp.len() as u128;
    guard(n * n * n + n * n * n * n * n, budget, "flux contraction")?;

    let pref4 = w * w * w / (4.0 * TAU * TAU);
    let pref6 = w * w * w * w * w / (4.0 * TAU * TAU * TAU * TAU);

    // quartic piece: i * pref4 * sum Lambda_4-tilde a b a b
    let s4: Complex64 = supp
        .par_iter()
        .map(|m1| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m2 in &supp {
                let z2 = -m2.zeta;
                let b2 = m2.a.conj();
                let a12 = m1.a * b2;
                for m3 in &supp {
                    let ci_sum = m1.ci - m2.ci + m3.ci;
                    let ej_sum = m1.ej - m2.ej + m3.ej;
                    let a4 = lookup(f, ci_sum, ej_sum);
                    if a4.norm_sqr() == 0.0 {
                        continue;
                    }
                    let z4 = Freq::new(-dxi * ci_sum as f64, -(ej_sum as f64));
                    let lam = lambda4_tilde(spec, &[m1.zeta, z2, m3.zeta, z4]);
                    if lam != 0.0 {
                        acc += lam * a12 * m3.a * a4.conj();
                    }
                }
            }
            acc
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);

    // sextic piece: -i * pref6 * sum Lambda_6 a b a b a b, with the
    // lattice-aware merged-term convention
    let freq_of = |ci: i64, ej: i64| Freq::new(dxi * ci as f64, ej as f64);
    let in_lattice =
        |ci: i64, ej: i64| grid.col_of_xi_index(ci).is_some() && grid.row_of_eta_index(ej).is_some();

    let s6: Complex64 = supp
        .par_iter()
        .map(|m1| {
            let mut acc = Complex64::new(0.0, 0.0);
            for m2 in &supp {
                let p12 = m1.a * m2.a.conj();
                for m3 in &supp {
                    let p123 = p12 * m3.a;
                    for m4 in &supp {
                        let p1234 = p123 * m4.a.conj();
                        for m5 in &supp {
                            let ci6 = -(m1.ci - m2.ci + m3.ci - m4.ci + m5.ci);
                            let ej6 = -(m1.ej - m2.ej + m3.ej - m4.ej + m5.ej);
                            // b6 = conj(a(-zeta6))
                            let a6 = lookup(f, -ci6, -ej6);
                            if a6.norm_sqr() == 0.0 {
                                continue;
                            }
                            let c = [m1.ci, -m2.ci, m3.ci, -m4.ci, m5.ci, ci6];
                            let e = [m1.ej, -m2.ej, m3.ej, -m4.ej, m5.ej, ej6];
                            let z = [
                                m1.zeta,
                                -m2.zeta,
                                m3.zeta,
                                -m4.zeta,
                                m5.zeta,
                                freq_of(ci6, ej6),
                            ];
                            let mut lam = 0.0;
                            let mut sign = 1.0;
                            for k in 0..4 {
                                let mc = c[k] + c[k + 1] + c[k + 2];
                                let me = e[k] + e[k + 1] + e[k + 2];
                                if in_lattice(mc, me) {
                                    let merged = freq_of(mc, me);
                                    // contracted quadruple: entries before the
                                    // merge, the merged frequency, entries after
                                    let mut ordered = [merged; 4];
                                    let mut t = 0;
                                    for (q, zq) in z.iter().enumerate() {
                                        if q == k {
                                            ordered[t] = merged;
                                            t += 1;
                                        } else if q < k || q > k + 2 {
                                            ordered[t] = *zq;
                                            t += 1;
                                        }
                                    }
                                    lam += sign * lambda4(spec, &ordered);
                                }
                                sign = -sign;
                            }
                            if lam != 0.0 {
                                acc += lam * p1234 * m5.a * a6.conj();
                            }
                        }
                    }
                }
            }
            acc
        })
        .reduce(|| Complex64::new(0.0, 0.0), |a, b| a + b);

    let q = Complex64::new(0.0, pref4) * s4;
    let x = Complex64::new(0.0, -pref6) * s6;
    Ok(FluxBreakdown {
        quartic_flux: q.re,
        sextic_flux: x.re,
        total: q.re + x.re,
        imag_residual: q.im.abs() + x.im.abs(),
    })
}

/// Temporal window applied before the time transform of `xsb_norm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeWindow {
    Rect,
    Hann,
}

impl TimeWindow {
    fn weight(&self, k: usize, n: usize) -> f64 {
        match self {
            TimeWindow::Rect => 1.0,
            TimeWindow::Hann => {
                if n < 2 {
                    1.0
                } else {
                    let x = std::f64::consts::PI * k as f64 / (n as f64 - 1.0);
                    let s = x.sin();
                    s * s
                }
            }
        }
    }
}

/// Discrete X^{s,b} norm of a sampled trajectory: bracket weights
/// <zeta>^s <tau - |zeta|^2>^b against the windowed space-time transform,
/// so free evolutions concentrate where the dispersive bracket is 1.
/// The time axis is treated as periodic over the sampled span.
pub fn xsb_norm(trace: &SpaceTimeTrace, s: f64, b: f64, window: TimeWindow) -> Result<f64> {
    let n_t = trace.len();
    if n_t < 8 {
        return Err(Error::argument(format!(
            "xsb_norm window needs at least 8 samples, got {n_t}"
        )));
    }
    let grid = trace.grid().clone();
    let dt = trace.dt();
    let span = n_t as f64 * dt;
    let dtau = TAU / span;
    let mut planner = FftPlanner::new();
    // e^{+i t tau} time transform puts the free mode at tau = +|zeta|^2
    let fft = planner.plan_fft_inverse(n_t);
    let temporal_scale = dt / TAU.sqrt();

    let mut acc = 0.0;
    let mut series = vec![Complex64::new(0.0, 0.0); n_t];
    for j in 0..grid.n_y() {
        for i in 0..grid.n_x() {
            if grid.is_nyquist(j, i) {
                continue;
            }
            let zeta = grid.freq(j, i);
            for (k, c) in series.iter_mut().enumerate() {
                *c = trace.frame(k).coeff(j, i) * window.weight(k, n_t);
            }
            fft.process(&mut series);
            let sp = zeta.bracket().powf(2.0 * s);
            for (m, c) in series.iter().enumerate() {
                let m_signed = if m < n_t.div_ceil(2) {
                    m as i64
                } else {
                    m as i64 - n_t as i64
                };
                let tau = dtau * m_signed as f64;
                let tw = (1.0 + (tau - zeta.norm_sq()).powi(2)).sqrt().powf(2.0 * b);
                acc += sp * tw * (temporal_scale * c).norm_sqr();
            }
        }
    }
    Ok((grid.weight() * dtau * acc).sqrt())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeDecomposition {
    pub t: f64,
    /// Centered finite-difference derivative of the modified energy.
    pub lhs: f64,
    pub quartic: f64,
    pub sextic: f64,
    /// lhs minus the two contractions.
    pub residual: f64,
}

/// Compare a finite-difference derivative of the modified energy along a
/// trace against the quartic + sextic contraction decomposition, evaluated
/// at the central frame. Uses a 4th-order stencil when five frames are
/// available, 2nd-order with three.
pub fn energy_derivative_decomposition(
    trace: &SpaceTimeTrace,
    spec: &MultiplierSpec,
    mode: QuarticMode,
    budget: Option<u128>,
) -> Result<DerivativeDecomposition> {
    let n = trace.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::argument(format!(
            "derivative decomposition needs an odd frame count >= 3, got {n}"
        )));
    }
    let mid = n / 2;
    let h = trace.dt();
    let e_at = |k: usize| -> Result<f64> {
        Ok(modified_energy(trace.frame(k), spec, mode, budget)?.total)
    };
    let lhs = if n >= 5 {
        (-e_at(mid + 2)? + 8.0 * e_at(mid + 1)? - 8.0 * e_at(mid - 1)? + e_at(mid - 2)?)
            / (12.0 * h)
    } else {
        (e_at(mid + 1)? - e_at(mid - 1)?) / (2.0 * h)
    };
    let flux = modified_energy_flux(trace.frame(mid), spec, budget)?;
    Ok(DerivativeDecomposition {
        t: trace.time(mid),
        lhs,
        quartic: flux.quartic_flux,
        sextic: flux.sextic_flux,
        residual: lhs - flux.total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::linear_propagate;
    use crate::grid::Grid;

    fn random_field(grid: &Grid, seed: u64, amp: f64) -> SpectralField {
        let mut state = seed | 1;
        let mut rnd = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state as f64 / u64::MAX as f64 - 0.5
        };
        let mut f = SpectralField::zeros(grid);
        for j in 1..grid.n_y() {
            for i in 1..grid.n_x() {
                f.set_coeff(j, i, Complex64::new(amp * rnd(), amp * rnd()));
            }
        }
        f
    }

    #[test]
    fn plane_wave_invariants_closed_form() {
        let grid = Grid::new(5.0, 16, 8).unwrap();
        let amp = 0.7;
        let (ci, ej) = (3, -2);
        let mut f = SpectralField::zeros(&grid);
        f.set_coeff(
            grid.row_of_eta_index(ej).unwrap(),
            grid.col_of_xi_index(ci).unwrap(),
            Complex64::new(amp * grid.l_x(), 0.0),
        );
        let vol = TAU * grid.l_x();
        let xi = grid.dxi() * ci as f64;
        let nsq = xi * xi + (ej * ej) as f64;
        assert!((mass(&f) - amp * amp * vol).abs() < 1e-12 * vol);
        let e_expect = 0.5 * nsq * amp * amp * vol + 0.25 * amp.powi(4) * vol;
        assert!((energy(&f) - e_expect).abs() < 1e-12 * e_expect.abs().max(1.0));
        let h_expect = amp * vol.sqrt() * (1.0 + nsq).powf(0.75);
        assert!((hs_norm(&f, 1.5) - h_expect).abs() < 1e-12 * h_expect);
    }

    #[test]
    fn low_frequency_data_reduces_to_plain_energy() {
        // with N far above every populated frequency, m = 1 and Lambda_4 = 1,
        // so the modified energy must equal E exactly
        let grid = Grid::new(TAU, 8, 4).unwrap();
        let f = random_field(&grid, 0x9e37, 0.4);
        let spec = MultiplierSpec::new(1.5, 1000.0).unwrap();
        let out = modified_energy(&f, &spec, QuarticMode::Exact, None).unwrap();
        let e = energy(&f);
        assert!(
            (out.total - e).abs() <= 1e-11 * e.abs().max(1.0),
            "modified {} vs plain {}",
            out.total,
            e
        );
        assert!(out.imag_residual < 1e-11);
    }

    #[test]
    fn quartic_modes_agree() {
        let grid = Grid::new(4.0, 16, 8).unwrap();
        let f = random_field(&grid, 0xabcd, 0.3);
        let spec = MultiplierSpec::new(1.5, 3.0).unwrap();
        let direct = modified_energy(&f, &spec, QuarticMode::Exact, None).unwrap();
        let split = modified_energy(&f, &spec, QuarticMode::SplitLow, None).unwrap();
        assert!(
            (direct.total - split.total).abs() <= 1e-10 * direct.total.abs().max(1.0),
            "direct {} vs split {}",
            direct.total,
            split.total
        );
        assert_eq!(direct.quadratic, split.quadratic);
    }

    #[test]
    fn complexity_guard_triggers() {
        let grid = Grid::new(4.0, 16, 8).unwrap();
        let f = random_field(&grid, 7, 0.3);
        let spec = MultiplierSpec::new(1.5, 3.0).unwrap();
        let err = modified_energy(&f, &spec, QuarticMode::Exact, Some(10)).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn flux_matches_finite_difference_of_modified_energy() {
        // sparse support keeps the sextic contraction cheap
        let grid = Grid::new(TAU, 8, 8).unwrap();
        let mut f = SpectralField::zeros(&grid);
        let put = |f: &mut SpectralField, ci: i64, ej: i64, re: f64, im: f64| {
            f.set_coeff(
                grid.row_of_eta_index(ej).unwrap(),
                grid.col_of_xi_index(ci).unwrap(),
                Complex64::new(re, im),
            );
        };
        put(&mut f, 0, 0, 0.31, -0.12);
        put(&mut f, 1, 0, -0.22, 0.05);
        put(&mut f, -1, 1, 0.17, 0.21);
        put(&mut f, 2, -1, 0.08, -0.19);
        put(&mut f, -2, -2, -0.11, 0.07);
        put(&mut f, 3, 2, 0.05, 0.13);
        put(&mut f, 1, -3, -0.09, -0.04);
        let spec = MultiplierSpec::new(1.5, 2.0).unwrap();

        let rhs = modified_energy_flux(&f, &spec, None).unwrap();

        let fd = |h: f64| {
            let trace = crate::dynamics::galerkin_trace_around(&f, h, 2).unwrap();
            let e_at = |k: usize| {
                modified_energy(trace.frame(k), &spec, QuarticMode::Exact, None)
                    .unwrap()
                    .total
            };
            // frames: t = -2h, -h, 0, h, 2h
            (-e_at(4) + 8.0 * e_at(3) - 8.0 * e_at(1) + e_at(0)) / (12.0 * h)
        };
        let scale = rhs.quartic_flux.abs() + rhs.sextic_flux.abs();
        let err_coarse = (fd(2e-3) - rhs.total).abs();
        let err_fine = (fd(1e-3) - rhs.total).abs();
        assert!(
            err_fine <= 2e-6 * scale,
            "fd residual {err_fine:.3e} vs decomposition {:.12e} (quartic {:.3e}, sextic {:.3e})",
            rhs.total,
            rhs.quartic_flux,
            rhs.sextic_flux
        );
        // residual is pure discretization error: it must shrink like h^4
        assert!(
            err_fine <= err_coarse / 8.0,
            "no 4th-order decay: {err_coarse:.3e} -> {err_fine:.3e}"
        );
        assert!(rhs.imag_residual <= 1e-12 * scale.max(1e-12));
    }

    #[test]
    fn xsb_norm_free_mode_closed_form() {
        // one free mode sampled over a full period: the time transform
        // concentrates on tau = -|zeta|^2, where the dispersive bracket is 1
        let grid = Grid::new(TAU, 8, 4).unwrap();
        let mut u0 = SpectralField::zeros(&grid);
        u0.set_coeff(
            grid.row_of_eta_index(0).unwrap(),
            grid.col_of_xi_index(1).unwrap(),
            Complex64::new(grid.l_x(), 0.0),
        );
        let n_t = 16;
        let dt = TAU / n_t as f64;
        let frames: Vec<_> = (0..n_t)
            .map(|k| linear_propagate(&u0, k as f64 * dt))
            .collect();
        let trace = SpaceTimeTrace::new(&grid, 0.0, dt, frames).unwrap();
        for (s, b) in [(0.0, 0.0), (1.5, 0.5), (0.5, -0.25)] {
            let got = xsb_norm(&trace, s, b, TimeWindow::Rect).unwrap();
            let expect = (TAU * TAU * grid.l_x() * 2.0_f64.powf(s)).sqrt();
            assert!(
                (got - expect).abs() <= 1e-10 * expect,
                "s={s} b={b}: {got} vs {expect}"
            );
        }
        // Hann window only shrinks the norm
        let rect = xsb_norm(&trace, 1.0, 0.25, TimeWindow::Rect).unwrap();
        let hann = xsb_norm(&trace, 1.0, 0.25, TimeWindow::Hann).unwrap();
        assert!(hann < rect);
        assert!(hann > 0.0);
        // short windows are rejected
        let short = SpaceTimeTrace::new(&grid, 0.0, dt, vec![u0.clone(); 4]).unwrap();
        assert!(xsb_norm(&short, 0.0, 0.0, TimeWindow::Rect).is_err());
    }

    #[test]
    fn modified_energy_is_gauge_invariant_and_real() {
        let grid = Grid::new(4.0, 16, 8).unwrap();
        let f = random_field(&grid, 0x77aa, 0.3);
        let spec = MultiplierSpec::new(1.5, 3.0).unwrap();
        let base = modified_energy(&f, &spec, QuarticMode::Exact, None).unwrap();
        let mut g = f.clone();
        g.scale(Complex64::from_polar(1.0, 1.234));
        let rot = modified_energy(&g, &spec, QuarticMode::Exact, None).unwrap();
        assert!((base.total - rot.total).abs() <= 1e-12 * base.total.abs().max(1.0));
        assert!(base.imag_residual <= 1e-12 * base.total.abs().max(1.0));
    }

    #[test]
    fn flux_terms_are_homogeneous_of_degree_four_and_six() {
        let grid = Grid::new(TAU, 8, 4).unwrap();
        let f = random_field(&grid, 0x1122, 0.2);
        let spec = MultiplierSpec::new(1.5, 2.0).unwrap();
        let base = modified_energy_flux(&f, &spec, None).unwrap();
        let lam = 1.7;
        let mut g = f.clone();
        g.scale(Complex64::new(lam, 0.0));
        let scaled = modified_energy_flux(&g, &spec, None).unwrap();
        let l4 = lam.powi(4);
        let l6 = lam.powi(6);
        assert!(
            (scaled.quartic_flux - l4 * base.quartic_flux).abs()
                <= 1e-10 * (l4 * base.quartic_flux).abs().max(1e-12)
        );
        assert!(
            (scaled.sextic_flux - l6 * base.sextic_flux).abs()
                <= 1e-10 * (l6 * base.sextic_flux).abs().max(1e-12)
        );
    }

    #[test]
    fn thresholded_mode_converges_to_exact() {
        let grid = Grid::new(4.0, 16, 8).unwrap();
        let f = random_field(&grid, 0x4242, 0.3);
        let spec = MultiplierSpec::new(1.5, 3.0).unwrap();
        let exact = modified_energy(&f, &spec, QuarticMode::Exact, None)
            .unwrap()
            .total;
        let errs: Vec<f64> = [0.9, 0.5, 0.1, 0.0]
            .iter()
            .map(|&eps| {
                let mode = QuarticMode::Thresholded {
                    eps_amp: eps,
                    k_max: f64::INFINITY,
                };
                (modified_energy(&f, &spec, mode, None).unwrap().total - exact).abs()
            })
            .collect();
        for pair in errs.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-14, "not monotone: {errs:?}");
        }
        assert!(errs[3] <= 1e-13 * exact.abs().max(1.0));
    }
}
