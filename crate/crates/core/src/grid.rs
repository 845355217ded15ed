//! Discretization of the cylinder R x T.
//!
//! The line is truncated to a periodic box of length `l_x`, so the continuum
//! frequency integral becomes a Riemann sum with weight `2*pi/l_x` per xi
//! node, while the circle direction keeps its native integer frequencies with
//! unit counting weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A frequency point zeta = (xi, eta) on R x Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Freq {
    pub xi: f64,
    pub eta: f64,
}

impl Freq {
    pub fn new(xi: f64, eta: f64) -> Self {
        Freq { xi, eta }
    }

    pub fn norm_sq(&self) -> f64 {
        self.xi * self.xi + self.eta * self.eta
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &Freq) -> f64 {
        self.xi * other.xi + self.eta * other.eta
    }

    /// Japanese bracket <zeta> = sqrt(1 + |zeta|^2).
    pub fn bracket(&self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }

    /// Polar angle in [0, 2*pi). Callers must exclude zeta = 0.
    pub fn arg(&self) -> f64 {
        let a = self.eta.atan2(self.xi);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi == 0.0 && self.eta == 0.0
    }
}

impl std::ops::Add for Freq {
    type Output = Freq;
    fn add(self, rhs: Freq) -> Freq {
        Freq::new(self.xi + rhs.xi, self.eta + rhs.eta)
    }
}

impl std::ops::Neg for Freq {
    type Output = Freq;
    fn neg(self) -> Freq {
        Freq::new(-self.xi, -self.eta)
    }
}

/// Uniform grid on the truncated cylinder [-L_x/2, L_x/2) x [0, 2*pi).
///
/// Spectral coefficients are stored centered and row-major: eta outer
/// (integer row index `j` maps to eta = j - n_y/2), xi inner (column `i`
/// maps to xi = (2*pi/L_x) * (i - n_x/2)). The most negative row/column is
/// the Nyquist mode and is excluded from all symbol evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    l_x: f64,
    n_x: usize,
    n_y: usize,
}

impl Grid {
    pub fn new(l_x: f64, n_x: usize, n_y: usize) -> Result<Self> {
        if !(l_x > 0.0) || !l_x.is_finite() {
            return Err(Error::argument(format!("L_x must be positive, got {l_x}")));
        }
        if n_x < 4 || !n_x.is_power_of_two() {
            return Err(Error::argument(format!(
                "n_x must be a power of two >= 4, got {n_x}"
            )));
        }
        if n_y < 4 || n_y % 2 != 0 {
            return Err(Error::argument(format!("n_y must be even and >= 4, got {n_y}")));
        }
        Ok(Grid { l_x, n_x, n_y })
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.l_x / self.n_x as f64
    }

    pub fn dy(&self) -> f64 {
        TAU / self.n_y as f64
    }

    /// Quadrature weight of the discretized (d zeta) measure per lattice node.
    pub fn weight(&self) -> f64 {
        TAU / self.l_x
    }

    /// xi frequency spacing (equals the measure weight).
    pub fn dxi(&self) -> f64 {
        TAU / self.l_x
    }

    /// Physical x coordinate of column `p`.
    pub fn x(&self, p: usize) -> f64 {
        -0.5 * self.l_x + p as f64 * self.dx()
    }

    /// Physical y coordinate of row `q`.
    pub fn y(&self, q: usize) -> f64 {
        q as f64 * self.dy()
    }

    /// Signed xi mode index of column `i` (centered storage).
    pub fn xi_index(&self, i: usize) -> i64 {
        i as i64 - (self.n_x / 2) as i64
    }

    /// Signed eta index of row `j` (centered storage).
    pub fn eta_index(&self, j: usize) -> i64 {
        j as i64 - (self.n_y / 2) as i64
    }

    pub fn xi(&self, i: usize) -> f64 {
        self.dxi() * self.xi_index(i) as f64
    }

    pub fn eta(&self, j: usize) -> f64 {
        self.eta_index(j) as f64
    }

    pub fn freq(&self, j: usize, i: usize) -> Freq {
        Freq::new(self.xi(i), self.eta(j))
    }

    /// Flat index into row-major coefficient storage (eta outer, xi inner).
    pub fn idx(&self, j: usize, i: usize) -> usize {
        j * self.n_x + i
    }

    /// Column of a signed xi mode index, if representable (Nyquist excluded).
    pub fn col_of_xi_index(&self, ci: i64) -> Option<usize> {
        let half = (self.n_x / 2) as i64;
        if ci > -half && ci < half {
            Some((ci + half) as usize)
        } else {
            None
        }
    }

    /// Row of a signed eta index, if representable (Nyquist excluded).
    pub fn row_of_eta_index(&self, ej: i64) -> Option<usize> {
        let half = (self.n_y / 2) as i64;
        if ej > -half && ej < half {
            Some((ej + half) as usize)
        } else {
            None
        }
    }

    /// True for the most negative xi column or eta row.
    pub fn is_nyquist(&self, j: usize, i: usize) -> bool {
        i == 0 || j == 0
    }

    /// Largest |xi| on the non-Nyquist lattice.
    pub fn xi_max(&self) -> f64 {
        self.dxi() * (self.n_x as f64 / 2.0 - 1.0)
    }

    pub fn eta_max(&self) -> f64 {
        self.n_y as f64 / 2.0 - 1.0
    }

    /// Iterate over all (j, i, zeta) lattice nodes, Nyquist included.
    pub fn iter_freqs(&self) -> impl Iterator<Item = (usize, usize, Freq)> + '_ {
        (0..self.n_y).flat_map(move |j| (0..self.n_x).map(move |i| (j, i, self.freq(j, i))))
    }

    /// Integrate a lattice function against the (d zeta) measure:
    /// sum over eta rows of (2*pi/L_x) * sum over xi nodes.
    ///
    /// NaN values propagate; the returned flag reports whether one was seen.
    pub fn measure_integrate<F>(&self, g: F) -> (f64, bool)
    where
        F: Fn(Freq) -> f64,
    {
        let w = self.weight();
        let mut acc = 0.0;
        let mut saw_nan = false;
        for (_, _, zeta) in self.iter_freqs() {
            let v = g(zeta);
            if v.is_nan() {
                saw_nan = true;
            }
            acc += w * v;
        }
        (acc, saw_nan)
    }
}
