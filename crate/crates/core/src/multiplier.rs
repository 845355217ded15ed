//! The symbol layer: the smoothing multiplier m and operator I, the
//! near-resonance threshold theta_0, the quartic correction symbols
//! Lambda_4 / Lambda_4-tilde and the sextic symbol Lambda_6, plus dyadic
//! band and angular sector projections.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{Freq, TAU};

/// Parameters of the multiplier m(zeta): m = 1 below N, (|zeta|/N)^{s-1}
/// above 2N, with a smooth monotone transition in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub s: f64,
    pub n: f64,
    #[serde(default)]
    pub smoothing: SmoothingProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingProfile {
    /// Quintic Hermite interpolation of log m in log |zeta|, slope-matched
    /// at both ends of [N, 2N]. Keeps m and m^2 |zeta|^2 monotone.
    #[default]
    LogQuintic,
}

impl MultiplierSpec {
    pub fn new(s: f64, n: f64) -> Result<Self> {
        if !(s > 1.0) {
            return Err(Error::argument(format!("multiplier needs s > 1, got {s}")));
        }
        if !(n > 1.0) {
            return Err(Error::argument(format!("multiplier needs N > 1, got {n}")));
        }
        Ok(MultiplierSpec {
            s,
            n,
            smoothing: SmoothingProfile::LogQuintic,
        })
    }

    /// m(zeta); radial, so only |zeta| matters.
    pub fn m_of_norm(&self, r: f64) -> f64 {
        if r < self.n {
            1.0
        } else if r > 2.0 * self.n {
            (r / self.n).powf(self.s - 1.0)
        } else {
            // t in [0,1] along log |zeta| between log N and log 2N
            let t = (r / self.n).ln() / std::f64::consts::LN_2;
            let v = (self.s - 1.0) * std::f64::consts::LN_2;
            // h(0)=h'(0)=h''(0)=0, h(1)=v, h'(1)=v, h''(1)=0; h' > 0 on (0,1)
            let h = v * (6.0 * t.powi(3) - 8.0 * t.powi(4) + 3.0 * t.powi(5));
            h.exp()
        }
    }

    pub fn m(&self, zeta: &Freq) -> f64 {
        self.m_of_norm(zeta.norm())
    }

    /// m(zeta)^2 |zeta|^2, the monotone weight in the quartic numerator.
    pub fn m2_w2(&self, zeta: &Freq) -> f64 {
        let m = self.m(zeta);
        m * m * zeta.norm_sq()
    }

    /// The threshold between the low branch (Lambda_4 = 1 exactly) and the
    /// high-frequency branch. "max << N" is concretized as max < N/2 so the
    /// low branch sits strictly inside the m = 1 region; the complement
    /// max >= N/2 partitions with no gap.
    pub fn low_threshold(&self) -> f64 {
        0.5 * self.n
    }
}

/// Pointwise multiplication by m(zeta).
pub fn apply_i(spec: &MultiplierSpec, f: &SpectralField) -> SpectralField {
    f.apply_symbol(|zeta| Complex64::new(spec.m(&zeta), 0.0))
}

/// theta_0 = 1 / (1 + |zeta_1| + |zeta_2| + |zeta_3| + |zeta_4|).
pub fn theta0(z1: &Freq, z2: &Freq, z3: &Freq, z4: &Freq) -> f64 {
    1.0 / (1.0 + z1.norm() + z2.norm() + z3.norm() + z4.norm())
}

/// Quartic numerator m1^2|z1|^2 - m2^2|z2|^2 + m3^2|z3|^2 - m4^2|z4|^2.
pub fn quartic_numerator(spec: &MultiplierSpec, z: &[Freq; 4]) -> f64 {
    spec.m2_w2(&z[0]) - spec.m2_w2(&z[1]) + spec.m2_w2(&z[2]) - spec.m2_w2(&z[3])
}

/// Resonance denominator |z1|^2 - |z2|^2 + |z3|^2 - |z4|^2, evaluated through
/// the zero-sum identity 2 (z1+z2).(z1+z4).
pub fn resonance_denominator(z: &[Freq; 4]) -> f64 {
    let z12 = z[0] + z[1];
    let z14 = z[0] + z[3];
    2.0 * z12.dot(&z14)
}

fn cos_angle(a: &Freq, b: &Freq) -> Option<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

fn max_norm(z: &[Freq; 4]) -> f64 {
    z.iter().map(|f| f.norm()).fold(0.0, f64::max)
}

/// Lambda_4 on a zero-sum quadruple: the numerator/denominator ratio under
/// the indicator {|cos angle(z12, z14)| > theta_0 or max |z_j| << N}.
///
/// On the low branch the ratio is exactly 1 (all m = 1). On the degenerate
/// set z12 = 0 or z14 = 0 with max >= N/2 the numerator vanishes identically
/// and Lambda_4 is defined to be 0.
pub fn lambda4(spec: &MultiplierSpec, z: &[Freq; 4]) -> f64 {
    debug_assert!(zero_sum_defect(z) < 1e-9 * (1.0 + max_norm(z)));
    if max_norm(z) < spec.low_threshold() {
        return 1.0;
    }
    let z12 = z[0] + z[1];
    let z14 = z[0] + z[3];
    let cos = match cos_angle(&z12, &z14) {
        Some(c) => c,
        None => return 0.0,
    };
    if cos.abs() > theta0(&z[0], &z[1], &z[2], &z[3]) {
        quartic_numerator(spec, z) / (2.0 * z12.dot(&z14))
    } else {
        0.0
    }
}

/// Lambda_4-tilde: the bare numerator under the complementary indicator
/// {|cos angle(z12, z14)| <= theta_0 and max |z_j| >~ N}.
pub fn lambda4_tilde(spec: &MultiplierSpec, z: &[Freq; 4]) -> f64 {
    debug_assert!(zero_sum_defect(z) < 1e-9 * (1.0 + max_norm(z)));
    if max_norm(z) < spec.low_threshold() {
        return 0.0;
    }
    let z12 = z[0] + z[1];
    let z14 = z[0] + z[3];
    let cos = match cos_angle(&z12, &z14) {
        Some(c) => c,
        // numerator vanishes identically on the degenerate set
        None => 0.0,
    };
    if cos.abs() <= theta0(&z[0], &z[1], &z[2], &z[3]) {
        quartic_numerator(spec, z)
    } else {
        0.0
    }
}

fn zero_sum_defect(z: &[Freq; 4]) -> f64 {
    let s = z[0] + z[1] + z[2] + z[3];
    s.norm()
}

/// The four merged quadruples entering Lambda_6 on a zero-sum sextuple.
pub fn lambda6_terms(z: &[Freq; 6]) -> [[Freq; 4]; 4] {
    [
        [z[0] + z[1] + z[2], z[3], z[4], z[5]],
        [z[0], z[1] + z[2] + z[3], z[4], z[5]],
        [z[0], z[1], z[2] + z[3] + z[4], z[5]],
        [z[0], z[1], z[2], z[3] + z[4] + z[5]],
    ]
}

/// Lambda_6: alternating four-term combination of Lambda_4 on merged
/// arguments.
pub fn lambda6(spec: &MultiplierSpec, z: &[Freq; 6]) -> f64 {
    let terms = lambda6_terms(z);
    lambda4(spec, &terms[0]) - lambda4(spec, &terms[1]) + lambda4(spec, &terms[2])
        - lambda4(spec, &terms[3])
}

/// A dyadic Littlewood-Paley band |zeta| in [N_j, 2 N_j) with N_j a power
/// of two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicBand {
    center: f64,
}

impl DyadicBand {
    pub fn new(n_j: f64) -> Result<Self> {
        if n_j < 1.0 || n_j.log2().fract() != 0.0 {
            return Err(Error::argument(format!(
                "dyadic center must be a power of two >= 1, got {n_j}"
            )));
        }
        Ok(DyadicBand { center: n_j })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn contains(&self, zeta: &Freq) -> bool {
        let r = zeta.norm();
        r >= self.center && r < 2.0 * self.center
    }

    /// Band index holding |zeta|, or None inside the unit ball.
    pub fn of(zeta: &Freq) -> Option<DyadicBand> {
        let r = zeta.norm();
        if r < 1.0 {
            None
        } else {
            let j = r.log2().floor();
            Some(DyadicBand {
                center: 2f64.powf(j),
            })
        }
    }
}

/// An angular sector arg(zeta) in [l*theta, (l+1)*theta), taken mod 2*pi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularSector {
    pub theta: f64,
    pub ell: i64,
}

impl AngularSector {
    pub fn new(theta: f64, ell: i64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::argument(format!(
                "sector width must be in (0, 1), got {theta}"
            )));
        }
        Ok(AngularSector { theta, ell })
    }

    /// Number of sectors partitioning the circle for this width.
    pub fn count(theta: f64) -> usize {
        (TAU / theta).ceil() as usize
    }

    /// Membership; zeta = 0 belongs to no sector. The last sector of the
    /// partition is clipped at 2*pi so the sectors tile exactly.
    pub fn contains(&self, zeta: &Freq) -> bool {
        if zeta.is_zero() {
            return false;
        }
        let count = Self::count(self.theta) as i64;
        let l = self.ell.rem_euclid(count);
        let a = zeta.arg();
        let lo = l as f64 * self.theta;
        let hi = ((l + 1) as f64 * self.theta).min(TAU);
        a >= lo && a < hi
    }
}

/// Sharp restriction of coefficients to a dyadic band.
pub fn dyadic_project(f: &SpectralField, band: &DyadicBand) -> SpectralField {
    let mut out = f.clone();
    let grid = f.grid().clone();
    for (j, i, zeta) in grid.iter_freqs() {
        if !band.contains(&zeta) || grid.is_nyquist(j, i) {
            out.set_coeff(j, i, Complex64::new(0.0, 0.0));
        }
    }
    out
}

/// Sharp restriction of coefficients to an angular sector.
pub fn angular_project(f: &SpectralField, sector: &AngularSector) -> SpectralField {
    let mut out = f.clone();
    let grid = f.grid().clone();
    for (j, i, zeta) in grid.iter_freqs() {
        if !sector.contains(&zeta) || grid.is_nyquist(j, i) {
            out.set_coeff(j, i, Complex64::new(0.0, 0.0));
        }
    }
    out
}

/// Sampling regimes for the multiplier inequality checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// |zeta_1| dominates the other three (two-branch majorant).
    Dominant,
    /// |zeta_1| ~ |zeta_2| >= |zeta_3| >= |zeta_4| + 1 (angular majorant).
    ComparablePair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSample {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Compare |quartic numerator| against the regime's majorant on one
/// zero-sum quadruple. Returns None when the quadruple does not satisfy the
/// regime hypotheses (a rejected sample).
pub fn multiplier_bound_check(
    spec: &MultiplierSpec,
    regime: BoundRegime,
    z: &[Freq; 4],
) -> Option<BoundSample> {
    let lhs = quartic_numerator(spec, z).abs();
    let n1 = z[0].norm();
    let n2 = z[1].norm();
    let n3 = z[2].norm();
    let n4 = z[3].norm();
    let z12 = (z[0] + z[1]).norm();
    let z14 = (z[0] + z[3]).norm();
    let m1sq = {
        let m = spec.m(&z[0]);
        m * m
    };
    let rhs = match regime {
        BoundRegime::Dominant => {
            if n1 < n2.max(n3).max(n4) {
                return None;
            }
            if z12.min(z14) >= 0.25 * n1 {
                m1sq * n1 * n1
            } else {
                m1sq * z12 * z14
            }
        }
        BoundRegime::ComparablePair => {
            if !(n2 >= 0.5 * n1 && n2 <= 2.0 * n1 && n2 >= n3 && n3 >= n4 + 1.0) {
                return None;
            }
            let z12v = z[0] + z[1];
            let z14v = z[0] + z[3];
            let cos = cos_angle(&z12v, &z14v).unwrap_or(0.0);
            m1sq * z12 * (n1 * cos.abs() + n3)
        }
    };
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Some(BoundSample { lhs, rhs, ratio })
}
