//! Time evolution of the signal coherences under the weak-signal closure,
//! with an embedded Dormand–Prince 5(4) integrator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressed::{DriveConfig, RateSet, TimeDependentRates};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceState {
    pub t: f64,
    pub rho12: Complex64,
    pub rho13: Complex64,
}

impl CoherenceState {
    /// Dot in its ground state at `t = 0`.
    pub fn ground() -> Self {
        CoherenceState {
            t: 0.0,
            rho12: Complex64::new(0.0, 0.0),
            rho13: Complex64::new(0.0, 0.0),
        }
    }
}

/// Source of rate coefficients along a trajectory.
pub trait RateProvider {
    fn rates_at(&self, t: f64) -> RateSet;
}

impl RateProvider for RateSet {
    fn rates_at(&self, _t: f64) -> RateSet {
        *self
    }
}

impl RateProvider for TimeDependentRates {
    fn rates_at(&self, t: f64) -> RateSet {
        self.at(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Per-step tolerance relative to the norm of the state.
    pub rel_tol: f64,
    /// Absolute floor of the error scale. Coherences are linear in the weak
    /// signal and routinely sit far below unity, so this is tiny.
    pub abs_tol: f64,
    /// Smallest admissible step before reporting stiffness.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-25,
            min_step: 1e-12,
            max_steps: 100_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Default integration horizon `40/min(γ₂, γ₃)`.
pub fn default_horizon(rates: &RateSet) -> f64 {
    40.0 / rates.gamma2.re.min(rates.gamma3.re)
}

type Vector = [Complex64; 2];

fn rhs(t: f64, y: &Vector, provider: &dyn RateProvider, drive: &DriveConfig, inversion: f64) -> Vector {
    let r = provider.rates_at(t);
    derivative(y, &r, drive, inversion)
}

fn derivative(y: &Vector, r: &RateSet, drive: &DriveConfig, inversion: f64) -> Vector {
    let i = Complex64::i();
    let [rho12, rho13] = *y;
    let half_pump = i * (0.5 * drive.omega_p);
    let d12 = -Complex64::new(r.gamma2.re, -r.delta_s) * rho12 + (r.nu2 - half_pump) * rho13
        - i * (0.5 * drive.omega_s * inversion);
    let d13 = -Complex64::new(r.gamma3.re, -(r.delta_s + r.delta_p)) * rho13 + (r.nu3 - half_pump) * rho12;
    [d12, d13]
}

/// Euclidean norm of the right-hand side; zero exactly at the stationary
/// solution.
pub fn steady_state_residual(state: &CoherenceState, rates: &RateSet, drive: &DriveConfig, inversion: f64) -> f64 {
    let [a, b] = derivative(&[state.rho12, state.rho13], rates, drive, inversion);
    (a.norm_sqr() + b.norm_sqr()).sqrt()
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate the coherence equations from `initial`, returning the state at
/// each of `output_times` (non-decreasing, not before `initial.t`).
pub fn integrate_coherences(
    initial: CoherenceState,
    provider: &dyn RateProvider,
    drive: &DriveConfig,
    inversion: f64,
    output_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<CoherenceState>> {
    if !(opts.rel_tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {}", opts.rel_tol)));
    }
    if output_times.iter().any(|t| !t.is_finite() || *t < initial.t)
        || output_times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::Domain(
            "output times must be finite, non-decreasing and not before the initial time".into(),
        ));
    }
    let Some(&end) = output_times.last() else {
        return Ok(Vec::new());
    };

    let mut t = initial.t;
    let mut y: Vector = [initial.rho12, initial.rho13];
    let mut k1 = rhs(t, &y, provider, drive, inversion);
    let mut h = initial_step(&y, &k1, end - t, opts);
    let mut out = Vec::with_capacity(output_times.len());
    let mut next = 0;
    let mut steps = 0;

    loop {
        while next < output_times.len() && output_times[next] <= t {
            out.push(CoherenceState {
                t: output_times[next],
                rho12: y[0],
                rho13: y[1],
            });
            next += 1;
        }
        if next == output_times.len() {
            return Ok(out);
        }
        let target = output_times[next];
        let landing = h >= target - t;
        let step = if landing { target - t } else { h };

        let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for c in 0..2 {
                        ys[c] += kj[c] * (a * step);
                    }
                }
            }
            k[s] = rhs(t + C[s] * step, &ys, provider, drive, inversion);
        }
        let mut high = y;
        let mut e = [Complex64::new(0.0, 0.0); 2];
        for c in 0..2 {
            let mut delta = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                delta += k[s][c] * B[s];
                e[c] += k[s][c] * (B[s] - B_LOW[s]);
            }
            high[c] += delta * step;
        }
        // Norm-wise control: ρ₁₃ is often orders of magnitude below ρ₁₂ and
        // is resolved relative to the state as a whole.
        let scale = opts.abs_tol + opts.rel_tol * norm(&y).max(norm(&high));
        let err = norm(&e) * step / scale / 2f64.sqrt();
        if !high.iter().all(|z| z.is_finite()) || !err.is_finite() {
            if step > opts.min_step {
                h = 0.2 * step;
                continue;
            }
            return Err(Error::NonFinite { t });
        }

        if err <= 1.0 {
            t = if landing { target } else { t + step };
            y = high;
            k1 = k[6];
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Stiffness { t, step });
            }
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A step shortened to land on an output time says nothing about
            // the admissible step size, so keep the previous proposal.
            h = if landing { h.max(step * grow) } else { step * grow };
        } else {
            h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if h < opts.min_step {
                return Err(Error::Stiffness { t, step: h });
            }
        }
    }
}

fn norm(y: &Vector) -> f64 {
    (y[0].norm_sqr() + y[1].norm_sqr()).sqrt()
}

fn initial_step(y: &Vector, f: &Vector, span: f64, opts: &IntegratorOptions) -> f64 {
    let ny = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let nf = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let guess = if nf > 0.0 {
        0.01 * (ny + opts.abs_tol / opts.rel_tol) / nf
    } else {
        span
    };
    guess.min(span).max(opts.min_step * 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::stationary_coherences;
    use crate::units::omega0;

    fn drive(omega_p: f64, omega_s: f64) -> DriveConfig {
        DriveConfig::new(omega_p, 0.0, omega_s, 0.0).unwrap()
    }

    #[test]
    fn zero_signal_stays_zero() {
        let d = drive(3.0, 0.0);
        let r = RateSet::markovian(1.0, 2.0, 0.3, 0.6, &d);
        let out = integrate_coherences(CoherenceState::ground(), &r, &d, 1.0, &[1.0, 5.0], &Default::default()).unwrap();
        for s in out {
            assert_eq!((s.rho12, s.rho13), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn free_growth_without_damping() {
        let d = drive(0.0, 0.5);
        let r = RateSet::markovian(0.0, 0.0, 0.0, 0.0, &d);
        let out = integrate_coherences(CoherenceState::ground(), &r, &d, 1.0, &[2.0 / 0.5], &Default::default()).unwrap();
        assert!((out[0].rho12 - Complex64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn residual_of_zero_state_is_drive_term() {
        let d = drive(3.0, 0.25);
        let r = RateSet::markovian(1.0, 2.0, 0.0, 0.0, &d);
        assert!((steady_state_residual(&CoherenceState::ground(), &r, &d, 0.8) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn converges_to_stationary_solution() {
        let w0 = omega0();
        let d = DriveConfig::new(3.0 * w0, 0.0, 1e-3 * w0, 0.2 * w0).unwrap();
        let r = RateSet::markovian(w0, 2.0 * w0, 0.3 * w0, 0.6 * w0, &d);
        let (rho12, rho13) = stationary_coherences(&r, &d, 1.0).unwrap();
        let horizon = default_horizon(&r);
        let end = integrate_coherences(CoherenceState::ground(), &r, &d, 1.0, &[horizon], &Default::default())
            .unwrap()[0];
        assert!((end.rho12 - rho12).norm() < 1e-6 * rho12.norm());
        assert!((end.rho13 - rho13).norm() < 1e-6 * rho12.norm());
        let fixed = CoherenceState { t: 0.0, rho12, rho13 };
        assert!(steady_state_residual(&fixed, &r, &d, 1.0) < 1e-12 * d.omega_s);
    }

    #[test]
    fn rejects_bad_output_times() {
        let d = drive(1.0, 0.1);
        let r = RateSet::markovian(1.0, 2.0, 0.0, 0.0, &d);
        assert!(integrate_coherences(CoherenceState::ground(), &r, &d, 1.0, &[2.0, 1.0], &Default::default()).is_err());
        assert!(integrate_coherences(CoherenceState::ground(), &r, &d, 1.0, &[-1.0], &Default::default()).is_err());
    }
}
