//! Butterworth bandpass as cascaded second-order sections.
//!
//! Design goes analog prototype → bandpass transform → bilinear transform with
//! prewarped band edges, then conjugate pole pairs become biquads. Filtering is
//! causal (forward only) with zero initial state, as a streaming decoder would run.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::EegEpoch;
use crate::error::SignalError;
use crate::num::Scalar;

/// Order of the Butterworth prototype used for preprocessing.
pub const BANDPASS_ORDER: usize = 4;

/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad<T> {
    pub b: [T; 3],
    pub a: [T; 2],
}

impl<T: Scalar> Biquad<T> {
    /// Complex response at normalized angular frequency `w` (rad/sample).
    fn response(&self, w: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        let num = self.b[0].as_f64() + z1 * self.b[1].as_f64() + z2 * self.b[2].as_f64();
        let den = 1.0 + z1 * self.a[0].as_f64() + z2 * self.a[1].as_f64();
        num / den
    }

    /// Filters `x` in place, transposed direct form II.
    fn run(&self, x: &mut [T]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let (mut s1, mut s2) = (T::zero(), T::zero());
        for v in x.iter_mut() {
            let input = *v;
            let out = b0 * input + s1;
            s1 = b1 * input - a1 * out + s2;
            s2 = b2 * input - a2 * out;
            *v = out;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec<T> {
    pub sections: Vec<Biquad<T>>,
    pub low_hz: f64,
    pub high_hz: f64,
    pub sample_rate_hz: f64,
}

impl<T: Scalar> FilterSpec<T> {
    /// Magnitude of the cascade's frequency response at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        self.sections
            .iter()
            .map(|s| s.response(w))
            .fold(Complex64::new(1.0, 0.0), |acc, h| acc * h)
            .norm()
    }

    /// Runs the cascade over a single signal in place.
    pub fn filter_in_place(&self, x: &mut [T]) {
        for s in &self.sections {
            s.run(x);
        }
    }
}

/// 9–100 Hz preprocessing bandpass at the given sample rate.
pub fn design_bandpass<T: Scalar>(
    low_hz: f64,
    high_hz: f64,
    sample_rate_hz: f64,
) -> Result<FilterSpec<T>, SignalError> {
    design_butterworth_bandpass(BANDPASS_ORDER, low_hz, high_hz, sample_rate_hz)
}

/// Butterworth bandpass with an `order`-pole lowpass prototype (2·order poles,
/// `order` biquads). Unity gain at the band's (prewarped) geometric centre.
pub fn design_butterworth_bandpass<T: Scalar>(
    order: usize,
    low_hz: f64,
    high_hz: f64,
    sample_rate_hz: f64,
) -> Result<FilterSpec<T>, SignalError> {
    if order == 0 {
        return Err(SignalError::Parameter("filter order must be >= 1".into()));
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(SignalError::Parameter(format!("bad sample rate {sample_rate_hz}")));
    }
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0) {
        return Err(SignalError::Parameter(format!(
            "band edges must satisfy 0 < low < high < fs/2, got {low_hz}..{high_hz} at {sample_rate_hz} Hz"
        )));
    }

    let fs2 = 2.0 * sample_rate_hz;
    let warp = |f: f64| fs2 * (PI * f / sample_rate_hz).tan();
    let (w1, w2) = (warp(low_hz), warp(high_hz));
    let bw = w2 - w1;
    let w0 = (w1 * w2).sqrt();

    let mut poles = Vec::with_capacity(2 * order);
    for i in 0..order {
        let m = 2.0 * i as f64 - (order as f64 - 1.0);
        let proto = -Complex64::from_polar(1.0, PI * m / (2.0 * order as f64));
        let scaled = proto * (bw / 2.0);
        let root = (scaled * scaled - w0 * w0).sqrt();
        for analog in [scaled + root, scaled - root] {
            poles.push((fs2 + analog) / (fs2 - analog));
        }
    }

    let mut sections: Vec<Biquad<f64>> = pair_poles(poles)
        .into_iter()
        .map(|(p, q)| Biquad {
            b: [1.0, 0.0, -1.0],
            a: [-(p + q).re, (p * q).re],
        })
        .collect();

    // Normalize to unity at the centre frequency, spread evenly across sections.
    let wc = 2.0 * (w0 / fs2).atan();
    let gain: f64 = sections.iter().map(|s| s.response(wc).norm()).product();
    let per_section = gain.powf(-1.0 / sections.len() as f64);
    for s in &mut sections {
        s.b = s.b.map(|c| c * per_section);
    }

    Ok(FilterSpec {
        sections: sections
            .into_iter()
            .map(|s| Biquad {
                b: s.b.map(T::lit),
                a: s.a.map(T::lit),
            })
            .collect(),
        low_hz,
        high_hz,
        sample_rate_hz,
    })
}

/// Groups poles into conjugate pairs; leftover real poles pair with each other.
fn pair_poles(poles: Vec<Complex64>) -> Vec<(Complex64, Complex64)> {
    const TOL: f64 = 1e-12;
    let mut upper: Vec<Complex64> = poles.iter().copied().filter(|p| p.im > TOL).collect();
    let mut real: Vec<Complex64> = poles
        .iter()
        .copied()
        .filter(|p| p.im.abs() <= TOL)
        .map(|p| Complex64::new(p.re, 0.0))
        .collect();
    upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    real.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut pairs: Vec<_> = upper.into_iter().map(|p| (p, p.conj())).collect();
    pairs.extend(real.chunks(2).map(|c| (c[0], c[c.len() - 1])));
    pairs
}

/// Filters every channel independently. Output has the input's shape and label.
pub fn apply_filter<T: Scalar>(
    spec: &FilterSpec<T>,
    epoch: &EegEpoch<T>,
) -> Result<EegEpoch<T>, SignalError> {
    if (epoch.sample_rate_hz() as f64 - spec.sample_rate_hz).abs() > 1e-9 {
        return Err(SignalError::Parameter(format!(
            "filter designed for {} Hz but epoch sampled at {} Hz",
            spec.sample_rate_hz,
            epoch.sample_rate_hz()
        )));
    }
    if epoch.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(SignalError::Data("epoch contains non-finite values".into()));
    }
    let mut out = epoch.clone();
    for ch in 0..out.n_channels() {
        spec.filter_in_place(out.channel_mut(ch));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_band_edges() {
        assert!(design_bandpass::<f64>(0.0, 100.0, 500.0).is_err());
        assert!(design_bandpass::<f64>(100.0, 9.0, 500.0).is_err());
        assert!(design_bandpass::<f64>(9.0, 250.0, 500.0).is_err());
        assert!(design_butterworth_bandpass::<f64>(0, 9.0, 100.0, 500.0).is_err());
    }

    #[test]
    fn cascade_has_one_section_per_prototype_pole() {
        let spec = design_bandpass::<f64>(9.0, 100.0, 500.0).unwrap();
        assert_eq!(spec.sections.len(), BANDPASS_ORDER);
        let odd = design_butterworth_bandpass::<f64>(3, 9.0, 100.0, 500.0).unwrap();
        assert_eq!(odd.sections.len(), 3);
    }

    #[test]
    fn poles_inside_unit_circle() {
        for order in 1..=6 {
            let spec = design_butterworth_bandpass::<f64>(order, 9.0, 100.0, 500.0).unwrap();
            for s in &spec.sections {
                // |p|^2 = a2 for a conjugate pair; stability triangle otherwise.
                assert!(s.a[1].abs() < 1.0 && s.a[0].abs() < 1.0 + s.a[1], "{s:?}");
            }
        }
    }

    #[test]
    fn unity_at_band_centre() {
        let spec = design_bandpass::<f64>(9.0, 100.0, 500.0).unwrap();
        let fc = 500.0 / PI * ((PI * 9.0 / 500.0).tan() * (PI * 100.0 / 500.0).tan()).sqrt().atan();
        assert!((spec.magnitude_at(fc) - 1.0).abs() < 1e-12);
        // -3 dB at both edges is the Butterworth signature.
        for f in [9.0, 100.0] {
            assert!((spec.magnitude_at(f) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_sample_rate_rejected() {
        let spec = design_bandpass::<f32>(9.0, 100.0, 250.0).unwrap();
        let e = EegEpoch::<f32>::zeros(None);
        assert!(apply_filter(&spec, &e).is_err());
    }
}
