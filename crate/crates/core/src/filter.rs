//! Second-order Butterworth low-pass filter.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

/// Coefficients and taps of a bilinear-transform Butterworth section
/// (transposed direct form II).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    pub cutoff_hz: f64,
    pub sample_hz: f64,
    b: [f64; 3],
    a: [f64; 2],
    z: [f64; 2],
}

impl FilterState {
    /// Filter with cutoff `cutoff_hz` at sample rate `sample_hz`; the cutoff is prewarped.
    pub fn new(cutoff_hz: f64, sample_hz: f64) -> Self {
        let k = (PI * cutoff_hz / sample_hz).tan();
        let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
        let b0 = k * k * norm;
        Self {
            cutoff_hz,
            sample_hz,
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - SQRT_2 * k + k * k) * norm],
            z: [0.0; 2],
        }
    }

    pub fn step(&self, sample: f64) -> (FilterState, f64) {
        let out = self.b[0] * sample + self.z[0];
        let mut next = *self;
        next.z = [
            self.b[1] * sample + self.z[1] - self.a[0] * out,
            self.b[2] * sample - self.a[1] * out,
        ];
        (next, out)
    }

    /// Magnitude of the frequency response at `f_hz`.
    pub fn gain_at(&self, f_hz: f64) -> f64 {
        let w = 2.0 * PI * f_hz / self.sample_hz;
        let (c1, s1, c2, s2) = (w.cos(), w.sin(), (2.0 * w).cos(), (2.0 * w).sin());
        let num = (self.b[0] + self.b[1] * c1 + self.b[2] * c2, -(self.b[1] * s1 + self.b[2] * s2));
        let den = (1.0 + self.a[0] * c1 + self.a[1] * c2, -(self.a[0] * s1 + self.a[1] * s2));
        num.0.hypot(num.1) / den.0.hypot(den.1)
    }
}

pub fn filter_accel(fs: &FilterState, sample: f64) -> (FilterState, f64) {
    fs.step(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_gain_is_one() {
        let f = FilterState::new(1.67, 1000.0);
        assert!((f.gain_at(0.0) - 1.0).abs() < 1e-9);
        let mut s = f;
        let mut y = 0.0;
        for _ in 0..20_000 {
            (s, y) = s.step(3.5);
        }
        assert!((y - 3.5).abs() < 1e-9);
    }

    #[test]
    fn half_power_at_cutoff() {
        let f = FilterState::new(1.67, 1000.0);
        assert!((f.gain_at(1.67) - SQRT_2 / 2.0).abs() < 1e-9);
        assert!(f.gain_at(16.7) < 0.05);
    }

    #[test]
    fn matches_reference_coefficients() {
        // scipy.signal.butter(2, 1.67, fs=1000)
        let f = FilterState::new(1.67, 1000.0);
        assert!((f.b[0] - 2.732_236_943_833_743e-5).abs() < 1e-17);
        assert!((f.a[0] + 1.985_161_040_280_063).abs() < 1e-13);
        assert!((f.a[1] - 0.985_270_329_757_816_4).abs() < 1e-13);
    }
}
