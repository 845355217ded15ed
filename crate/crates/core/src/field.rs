//! Spectral fields and the Fourier transform pair in the symmetric
//! 1/(2*pi) normalization.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::grid::{Freq, Grid, TAU};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().unwrap();
    if forward {
        planner.plan_fft_forward(len)
    } else {
        planner.plan_fft_inverse(len)
    }
}

/// A complex field at fixed time, stored by centered frequency coefficients
/// u_hat(zeta). Row-major: eta outer, xi inner.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::argument(format!(
                "coefficient array has {} entries, grid needs {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, j: usize, i: usize) -> Complex64 {
        self.coeffs[self.grid.idx(j, i)]
    }

    pub fn set_coeff(&mut self, j: usize, i: usize, v: Complex64) {
        let k = self.grid.idx(j, i);
        self.coeffs[k] = v;
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Multiply each coefficient by a function of its frequency.
    pub fn apply_symbol<F>(&self, f: F) -> SpectralField
    where
        F: Fn(Freq) -> Complex64,
    {
        let mut out = self.clone();
        for (j, i, zeta) in self.grid.iter_freqs() {
            let k = self.grid.idx(j, i);
            out.coeffs[k] = self.coeffs[k] * f(zeta);
        }
        out
    }

    /// Squared L^2 norm computed in frequency space with (d zeta) weights.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.grid.weight();
        self.coeffs.iter().map(|c| w * c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.coeffs {
            *c *= s;
        }
    }

    pub fn has_non_finite(&self) -> bool {
        self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
    }

    /// Zero the Nyquist row and column.
    pub fn zero_nyquist(&mut self) {
        let (n_x, n_y) = (self.grid.n_x(), self.grid.n_y());
        for i in 0..n_x {
            self.coeffs[self.grid.idx(0, i)] = Complex64::new(0.0, 0.0);
        }
        for j in 0..n_y {
            self.coeffs[self.grid.idx(j, 0)] = Complex64::new(0.0, 0.0);
        }
    }

    /// Physical-space samples on the grid, row-major (y outer, x inner).
    pub fn to_physical(&self) -> Vec<Complex64> {
        inverse_transform(self)
    }
}

fn fft_2d(grid: &Grid, data: &mut [Complex64], forward: bool) {
    let (n_x, n_y) = (grid.n_x(), grid.n_y());
    let fft_x = plan(n_x, forward);
    for row in data.chunks_exact_mut(n_x) {
        fft_x.process(row);
    }
    let fft_y = plan(n_y, forward);
    let mut col = vec![Complex64::new(0.0, 0.0); n_y];
    for i in 0..n_x {
        for j in 0..n_y {
            col[j] = data[j * n_x + i];
        }
        fft_y.process(&mut col);
        for j in 0..n_y {
            data[j * n_x + i] = col[j];
        }
    }
}

/// Discrete approximation of u_hat(zeta) = (1/(2*pi)) int e^{-i z.zeta} f dz.
pub fn forward_transform(grid: &Grid, phys: &[Complex64]) -> Result<SpectralField> {
    if phys.len() != grid.len() {
        return Err(Error::argument(format!(
            "physical array has {} entries, grid needs {}",
            phys.len(),
            grid.len()
        )));
    }
    let (n_x, n_y) = (grid.n_x(), grid.n_y());
    let mut buf = phys.to_vec();
    fft_2d(grid, &mut buf, true);
    let scale = grid.dx() * grid.dy() / TAU;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..n_y {
        let ej = grid.eta_index(j);
        let kj = ej.rem_euclid(n_y as i64) as usize;
        for i in 0..n_x {
            let ci = grid.xi_index(i);
            let ki = ci.rem_euclid(n_x as i64) as usize;
            // phase from the x origin at -L_x/2
            let sign = if ci.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            coeffs[j * n_x + i] = buf[kj * n_x + ki] * (scale * sign);
        }
    }
    SpectralField::from_coeffs(grid, coeffs)
}

/// Exact inverse of `forward_transform` up to roundoff.
pub fn inverse_transform(field: &SpectralField) -> Vec<Complex64> {
    let grid = field.grid();
    let (n_x, n_y) = (grid.n_x(), grid.n_y());
    let scale = grid.weight() / TAU;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..n_y {
        let ej = grid.eta_index(j);
        let kj = ej.rem_euclid(n_y as i64) as usize;
        for i in 0..n_x {
            let ci = grid.xi_index(i);
            let ki = ci.rem_euclid(n_x as i64) as usize;
            let sign = if ci.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[kj * n_x + ki] = field.coeffs[j * n_x + i] * (scale * sign);
        }
    }
    fft_2d(grid, &mut buf, false);
    buf
}

/// Squared L^2 norm of physical samples by grid quadrature.
pub fn physical_l2_norm_sq(grid: &Grid, phys: &[Complex64]) -> f64 {
    let da = grid.dx() * grid.dy();
    phys.iter().map(|v| da * v.norm_sqr()).sum()
}

/// A time-sampled sequence of spectral fields on a window.
#[derive(Debug, Clone)]
pub struct SpaceTimeTrace {
    grid: Grid,
    t0: f64,
    dt: f64,
    frames: Vec<SpectralField>,
}

impl SpaceTimeTrace {
    pub fn new(grid: &Grid, t0: f64, dt: f64, frames: Vec<SpectralField>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::argument(format!("trace dt must be positive, got {dt}")));
        }
        for f in &frames {
            if f.grid() != grid {
                return Err(Error::GridMismatch(
                    "all trace frames must share one grid".into(),
                ));
            }
        }
        Ok(SpaceTimeTrace {
            grid: grid.clone(),
            t0,
            dt,
            frames,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn frame(&self, k: usize) -> &SpectralField {
        &self.frames[k]
    }

    pub fn frames(&self) -> &[SpectralField] {
        &self.frames
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_mode_phys(grid: &Grid, ci: i64, ej: i64) -> Vec<Complex64> {
        let xi = grid.dxi() * ci as f64;
        let eta = ej as f64;
        let mut out = Vec::with_capacity(grid.len());
        for q in 0..grid.n_y() {
            for p in 0..grid.n_x() {
                let phase = grid.x(p) * xi + grid.y(q) * eta;
                out.push(Complex64::from_polar(1.0, phase));
            }
        }
        out
    }

    #[test]
    fn plane_wave_concentrates_at_its_mode() {
        let grid = Grid::new(7.0, 16, 8).unwrap();
        let phys = single_mode_phys(&grid, 3, -2);
        let f = forward_transform(&grid, &phys).unwrap();
        let i0 = grid.col_of_xi_index(3).unwrap();
        let j0 = grid.row_of_eta_index(-2).unwrap();
        let peak = f.coeff(j0, i0).norm();
        for (j, i, _) in grid.iter_freqs() {
            if (j, i) != (j0, i0) {
                assert!(
                    f.coeff(j, i).norm() <= 1e-12 * peak,
                    "leakage at ({j},{i})"
                );
            }
        }
        // forward const: u_hat = L_x for a unit plane wave
        assert!((peak - grid.l_x()).abs() < 1e-10 * grid.l_x());
    }

    #[test]
    fn zero_maps_to_zero_both_ways() {
        let grid = Grid::new(3.0, 8, 4).unwrap();
        let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
        let f = forward_transform(&grid, &zeros).unwrap();
        assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(f.to_physical().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let grid = Grid::new(3.0, 8, 4).unwrap();
        assert!(forward_transform(&grid, &[Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn round_trip_and_parseval_on_random_data() {
        let grid = Grid::new(4.5, 32, 8).unwrap();
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let phys: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rnd(), rnd()))
            .collect();
        let f = forward_transform(&grid, &phys).unwrap();
        let back = f.to_physical();
        let mut err: f64 = 0.0;
        let mut norm: f64 = 0.0;
        for (a, b) in phys.iter().zip(back.iter()) {
            err += (a - b).norm_sqr();
            norm += a.norm_sqr();
        }
        assert!(err.sqrt() <= 1e-12 * norm.sqrt());
        let spectral = f.l2_norm_sq();
        let physical = physical_l2_norm_sq(&grid, &phys);
        assert!((spectral - physical).abs() <= 1e-12 * physical);
    }

    #[test]
    fn y_translation_covariance() {
        let grid = Grid::new(6.0, 16, 8).unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) - 0.5
        };
        let phys: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rnd(), rnd()))
            .collect();
        // shift f in y by one grid step: g(x, y) = f(x, y - dy)
        let mut shifted = vec![Complex64::new(0.0, 0.0); grid.len()];
        for q in 0..grid.n_y() {
            let src = (q + grid.n_y() - 1) % grid.n_y();
            for p in 0..grid.n_x() {
                shifted[q * grid.n_x() + p] = phys[src * grid.n_x() + p];
            }
        }
        let f = forward_transform(&grid, &phys).unwrap();
        let g = forward_transform(&grid, &shifted).unwrap();
        for (j, i, zeta) in grid.iter_freqs() {
            let expect = f.coeff(j, i) * Complex64::from_polar(1.0, -TAU * zeta.eta / grid.n_y() as f64);
            assert!((g.coeff(j, i) - expect).norm() <= 1e-12 * (1.0 + f.coeff(j, i).norm()));
        }
    }

    #[test]
    fn trace_rejects_mismatched_frames() {
        let g1 = Grid::new(3.0, 8, 4).unwrap();
        let g2 = Grid::new(3.0, 16, 4).unwrap();
        let frames = vec![SpectralField::zeros(&g1), SpectralField::zeros(&g2)];
        assert!(SpaceTimeTrace::new(&g1, 0.0, 0.1, frames).is_err());
        assert!(SpaceTimeTrace::new(&g1, 0.0, 0.0, vec![]).is_err());
    }
}
