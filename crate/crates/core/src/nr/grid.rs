//! Periodic-grid backend: split-step Fourier evolution for a sampled
//! potential, with trigonometric interpolation for off-grid queries.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Result, SimError};

#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    /// Points per axis (power of two recommended).
    pub points: usize,
    /// Domain length per axis; the box is `[-length/2, length/2)`.
    pub length: f64,
    /// Default split-step size used when a state is requested at time `t`.
    pub dt: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    None,
    /// `V(x) = sum_i m_i omega^2 x_i^2 / 2`
    Harmonic { omega: f64 },
}

impl Potential {
    fn eval(&self, masses: &[f64], x: &[f64]) -> f64 {
        match self {
            Potential::None => 0.0,
            Potential::Harmonic { omega } => x
                .iter()
                .zip(masses)
                .map(|(xi, m)| 0.5 * m * omega * omega * xi * xi)
                .sum(),
        }
    }
}

/// Immutable grid data shared by all states of one wave function.
pub struct GridBackend {
    pub spec: GridSpec,
    masses: Vec<f64>,
    potential: Vec<f64>,
    psi0: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Physical wave numbers in FFT ordering.
    wavenumbers: Vec<f64>,
}

impl GridBackend {
    pub fn new<F>(masses: Vec<f64>, spec: GridSpec, potential: Potential, init: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let n = spec.points;
        let dims = masses.len();
        if n < 4 || n % 2 != 0 {
            return Err(SimError::Validation("grid points per axis must be even and >= 4".into()));
        }
        if spec.length <= 0.0 || spec.dt <= 0.0 {
            return Err(SimError::Validation("grid length and dt must be positive".into()));
        }
        let total = n.pow(dims as u32);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let dx = spec.length / n as f64;
        let mut wavenumbers = vec![0.0; n];
        for (j, k) in wavenumbers.iter_mut().enumerate() {
            let f = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            *k = 2.0 * std::f64::consts::PI * f / spec.length;
        }
        let mut psi0 = vec![Complex64::default(); total];
        let mut pot = vec![0.0; total];
        let mut x = vec![0.0; dims];
        for (idx, (p, v)) in psi0.iter_mut().zip(pot.iter_mut()).enumerate() {
            decode_point(idx, n, dx, spec.length, &mut x);
            *p = init(&x);
            *v = potential.eval(&masses, &x);
        }
        // discrete normalization
        let norm2: f64 = psi0.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx.powi(dims as i32);
        if !(norm2 > 0.0) {
            return Err(SimError::Validation("initial grid state has zero norm".into()));
        }
        let scale = 1.0 / norm2.sqrt();
        for p in psi0.iter_mut() {
            *p *= scale;
        }
        Ok(GridBackend { spec, masses, potential: pot, psi0, fwd, inv, wavenumbers })
    }

    pub fn dims(&self) -> usize {
        self.masses.len()
    }

    pub fn dx(&self) -> f64 {
        self.spec.length / self.spec.points as f64
    }

    pub fn half_length(&self) -> f64 {
        self.spec.length / 2.0
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|xi| xi.abs() <= self.half_length())
    }

    /// State at time `t`, evolved from the initial data with full steps of
    /// `spec.dt` plus one remainder step. Deterministic and independent of
    /// any previous queries.
    pub fn state_at(&self, t: f64) -> GridState<'_> {
        let mut s = GridState { backend: self, t: 0.0, amps: self.psi0.clone(), spectrum: None };
        s.evolve_to(t);
        s
    }

    fn fft_axis(&self, data: &mut [Complex64], axis: usize, forward: bool) {
        let n = self.spec.points;
        let dims = self.dims();
        let stride = n.pow((dims - 1 - axis) as u32);
        let block = stride * n;
        let mut line = vec![Complex64::default(); n];
        let plan = if forward { &self.fwd } else { &self.inv };
        let mut base = 0;
        while base < data.len() {
            for off in 0..stride {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + off + j * stride];
                }
                plan.process(&mut line);
                for (j, l) in line.iter().enumerate() {
                    data[base + off + j * stride] = *l;
                }
            }
            base += block;
        }
        if !forward {
            let scale = 1.0 / n as f64;
            for d in data.iter_mut() {
                *d *= scale;
            }
        }
    }

    fn fft_all(&self, data: &mut [Complex64], forward: bool) {
        for axis in 0..self.dims() {
            self.fft_axis(data, axis, forward);
        }
    }
}

fn decode_point(mut idx: usize, n: usize, dx: f64, length: f64, out: &mut [f64]) {
    for a in (0..out.len()).rev() {
        let j = idx % n;
        out[a] = -length / 2.0 + j as f64 * dx;
        idx /= n;
    }
}

/// Grid amplitudes at a fixed time, plus their spectrum for interpolation.
#[derive(Clone)]
pub struct GridState<'a> {
    backend: &'a GridBackend,
    pub t: f64,
    amps: Vec<Complex64>,
    spectrum: Option<Vec<Complex64>>,
}

impl<'a> GridState<'a> {
    pub fn backend(&self) -> &'a GridBackend {
        self.backend
    }

    /// Advance to `target` using full `dt` steps plus one remainder step.
    pub fn evolve_to(&mut self, target: f64) {
        let span = target - self.t;
        if span == 0.0 {
            return;
        }
        let dt = self.backend.spec.dt;
        let steps = (span.abs() / dt).floor() as usize;
        let full = dt * span.signum();
        for _ in 0..steps {
            self.split_step(full);
        }
        let remainder = target - (self.t);
        if remainder.abs() > 1e-15 {
            self.split_step(remainder);
        }
        self.t = target;
        self.spectrum = None;
    }

    /// One Strang split step: half kinetic, full potential, half kinetic.
    fn split_step(&mut self, h: f64) {
        let backend = self.backend;
        let dims = backend.dims();
        let n = backend.spec.points;
        // per-axis half-step kinetic phases
        let mut phases: Vec<Vec<Complex64>> = Vec::with_capacity(dims);
        for m in &backend.masses {
            let row: Vec<Complex64> = backend
                .wavenumbers
                .iter()
                .map(|k| Complex64::from_polar(1.0, -k * k / (2.0 * m) * h / 2.0))
                .collect();
            phases.push(row);
        }
        let apply_kinetic = |amps: &mut [Complex64]| {
            for (idx, a) in amps.iter_mut().enumerate() {
                let mut rem = idx;
                let mut ph = Complex64::new(1.0, 0.0);
                for ax in (0..dims).rev() {
                    ph *= phases[ax][rem % n];
                    rem /= n;
                }
                *a *= ph;
            }
        };
        backend.fft_all(&mut self.amps, true);
        apply_kinetic(&mut self.amps);
        backend.fft_all(&mut self.amps, false);
        for (a, v) in self.amps.iter_mut().zip(&backend.potential) {
            *a *= Complex64::from_polar(1.0, -v * h);
        }
        backend.fft_all(&mut self.amps, true);
        apply_kinetic(&mut self.amps);
        backend.fft_all(&mut self.amps, false);
        self.t += h;
    }

    pub fn norm(&self) -> f64 {
        let dx = self.backend.dx();
        (self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * dx.powi(self.backend.dims() as i32))
        .sqrt()
    }

    fn spectrum(&mut self) -> &[Complex64] {
        if self.spectrum.is_none() {
            let mut spec = self.amps.clone();
            self.backend.fft_all(&mut spec, true);
            self.spectrum = Some(spec);
        }
        self.spectrum.as_deref().unwrap()
    }

    /// Make sure the spectrum is cached so later queries can take `&self`.
    pub fn prepare(&mut self) {
        let _ = self.spectrum();
    }

    /// Value, gradient and Laplacian-contraction data at an arbitrary point
    /// by trigonometric interpolation: returns `(psi, dpsi_i, d2psi_i)`.
    pub fn eval(&self, x: &[f64]) -> (Complex64, Vec<Complex64>, Vec<Complex64>) {
        let backend = self.backend;
        let n = backend.spec.points;
        let dims = backend.dims();
        let spec = self
            .spectrum
            .as_deref()
            .expect("GridState::prepare must be called before eval");
        // per-axis phase tables e^{i k (x + L/2)}
        let mut phase: Vec<Vec<Complex64>> = Vec::with_capacity(dims);
        for xi in x.iter() {
            let row: Vec<Complex64> = backend
                .wavenumbers
                .iter()
                .map(|k| Complex64::from_polar(1.0, k * (xi + backend.half_length())))
                .collect();
            phase.push(row);
        }
        let mut value = Complex64::default();
        let mut grad = vec![Complex64::default(); dims];
        let mut lapl = vec![Complex64::default(); dims];
        let nyquist = n / 2;
        let mut ks = vec![0usize; dims];
        for (idx, c) in spec.iter().enumerate() {
            let mut rem = idx;
            let mut ph = Complex64::new(1.0, 0.0);
            for ax in (0..dims).rev() {
                let j = rem % n;
                ks[ax] = j;
                ph *= phase[ax][j];
                rem /= n;
            }
            let term = c * ph;
            value += term;
            for ax in 0..dims {
                // Nyquist mode carries no usable derivative sign.
                let k = if ks[ax] == nyquist { 0.0 } else { backend.wavenumbers[ks[ax]] };
                grad[ax] += term * Complex64::new(0.0, k);
                lapl[ax] += term * Complex64::new(-k * k, 0.0);
            }
        }
        let scale = 1.0 / (n as f64).powi(dims as i32);
        value *= scale;
        for g in grad.iter_mut() {
            *g *= scale;
        }
        for l in lapl.iter_mut() {
            *l *= scale;
        }
        (value, grad, lapl)
    }

    /// Marginal density of axis `axis` at coordinate `x`, integrating the
    /// remaining axes on the grid.
    pub fn marginal_density(&self, axis: usize, x: f64) -> f64 {
        let backend = self.backend;
        let n = backend.spec.points;
        let dims = backend.dims();
        let dx = backend.dx();
        // FFT along `axis` only, then evaluate that axis at x and sum |.|^2
        // over the remaining grid indices.
        let mut half = self.amps.clone();
        // reuse backend plan via fft_axis
        backend.fft_axis(&mut half, axis, true);
        let phase: Vec<Complex64> = backend
            .wavenumbers
            .iter()
            .map(|k| Complex64::from_polar(1.0, k * (x + backend.half_length())))
            .collect();
        let stride = n.pow((dims - 1 - axis) as u32);
        let block = stride * n;
        let mut total = 0.0;
        let mut base = 0;
        while base < half.len() {
            for off in 0..stride {
                let mut v = Complex64::default();
                for (j, p) in phase.iter().enumerate() {
                    v += half[base + off + j * stride] * p;
                }
                total += (v / n as f64).norm_sqr();
            }
            base += block;
        }
        total * dx.powi(dims as i32 - 1)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}
