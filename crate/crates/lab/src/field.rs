//! Periodic grids in one to three dimensions, real fields with a cached
//! spectrum, Fourier multipliers and Lebesgue norms.
//!
//! The transform approximates `û(ξ) = ∫ e^{-i x·ξ} u(x) dx` on the box
//! `[-L/2, L/2)^n`, with frequencies on the lattice `(2π/L) Z^n`.

use std::cell::{OnceCell, RefCell};
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;
use sigma_core::exponents::Lebesgue;

use crate::error::{LabError, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Uniform periodic grid with `points` samples per axis on a box of side `length`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Grid> {
        if !(1..=3).contains(&dim) {
            return Err(LabError::Grid(format!("dimension {dim} not in 1..=3")));
        }
        if points < 4 || points % 2 != 0 {
            return Err(LabError::Grid(format!("points per axis must be even and >= 4, got {points}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(LabError::Grid("box length must be positive".into()));
        }
        Ok(Grid { dim, points, length })
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.dx()
    }

    /// Signed lattice index of FFT slot `i`; the Nyquist slot maps to `-N/2`.
    pub fn signed_index(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI / self.length * self.signed_index(i) as f64
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }

    /// Splits a flat row-major index into per-axis indices.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// `|ξ|` for every spectral slot, row-major.
    pub fn rho_table(&self) -> Vec<f64> {
        let k: Vec<f64> = (0..self.points).map(|i| self.wavenumber(i)).collect();
        (0..self.len())
            .map(|flat| {
                let idx = self.unflatten(flat);
                (0..self.dim).map(|a| k[idx[a]] * k[idx[a]]).sum::<f64>().sqrt()
            })
            .collect()
    }

    /// Doubles the points per axis at fixed box length.
    pub fn refined(&self) -> Grid {
        Grid { points: 2 * self.points, ..*self }
    }
}

/// In-place unnormalized FFT along every axis of a row-major array.
pub(crate) fn transform(data: &mut [Complex64], grid: &Grid, inverse: bool) {
    let n = grid.points;
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    fft.process(data);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..grid.dim.saturating_sub(1) {
        let stride = n.pow((grid.dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride];
                }
                fft.process(&mut line);
                for (j, slot) in line.iter().enumerate() {
                    data[base + j * stride] = *slot;
                }
            }
        }
    }
}

/// `(-1)^{Σ k}`: phase shift from the box offset `-L/2`.
pub(crate) fn parity(grid: &Grid, flat: usize) -> f64 {
    let idx = grid.unflatten(flat);
    if idx[..grid.dim].iter().sum::<usize>() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A real-valued sample field whose spectrum is computed on demand and cached.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceCell<Vec<Complex64>>,
}

impl Field {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(LabError::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field { grid, values, spectrum: OnceCell::new() })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Field {
        let mut x = [0.0; 3];
        let values = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                for a in 0..grid.dim {
                    x[a] = grid.coordinate(idx[a]);
                }
                f(&x[..grid.dim])
            })
            .collect();
        Field { grid, values, spectrum: OnceCell::new() }
    }

    /// Inverts a spectrum that must be Hermitian up to `1e-9` relative.
    pub fn from_spectrum(grid: Grid, spectrum: Vec<Complex64>) -> Result<Field> {
        if spectrum.len() != grid.len() {
            return Err(LabError::Grid("spectrum length does not match grid".into()));
        }
        let mut data: Vec<Complex64> =
            spectrum.iter().enumerate().map(|(i, z)| z * parity(&grid, i)).collect();
        transform(&mut data, &grid, true);
        let scale = 1.0 / grid.length.powi(grid.dim as i32);
        let (mut re_max, mut im_max) = (0.0f64, 0.0f64);
        let values: Vec<f64> = data
            .iter()
            .map(|z| {
                re_max = re_max.max(z.re.abs());
                im_max = im_max.max(z.im.abs());
                z.re * scale
            })
            .collect();
        if im_max > 1e-9 * re_max.max(f64::MIN_POSITIVE) && im_max * scale > 1e-300 {
            return Err(LabError::Numerical(format!(
                "inverse transform left imaginary residue {:.3e} relative",
                im_max / re_max.max(f64::MIN_POSITIVE)
            )));
        }
        let cell = OnceCell::new();
        let _ = cell.set(spectrum);
        Ok(Field { grid, values, spectrum: cell })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mutable access; drops the cached spectrum.
    pub fn values_mut(&mut self) -> &mut [f64] {
        self.spectrum = OnceCell::new();
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            transform(&mut data, &self.grid, false);
            let vol = self.grid.cell_volume();
            for (i, z) in data.iter_mut().enumerate() {
                *z *= vol * parity(&self.grid, i);
            }
            data
        })
    }

    /// Multiplies the spectrum by a real radial symbol `m(|ξ|)`.
    pub fn apply_radial<M: Fn(f64) -> f64>(&self, m: M) -> Result<Field> {
        let rho = self.grid.rho_table();
        let spec: Vec<Complex64> = self.spectrum().iter().zip(&rho).map(|(z, &r)| z * m(r)).collect();
        Field::from_spectrum(self.grid, spec)
    }

    /// Multiplies the spectrum by `m(ξ, |ξ|)`; the result must stay real.
    pub fn apply_symbol<M: Fn(&[f64], f64) -> Complex64>(&self, m: M) -> Result<Field> {
        let k: Vec<f64> = (0..self.grid.points).map(|i| self.grid.wavenumber(i)).collect();
        let mut xi = [0.0; 3];
        let spec: Vec<Complex64> = self
            .spectrum()
            .iter()
            .enumerate()
            .map(|(flat, z)| {
                let idx = self.grid.unflatten(flat);
                let mut r2 = 0.0;
                for a in 0..self.grid.dim {
                    xi[a] = k[idx[a]];
                    r2 += xi[a] * xi[a];
                }
                z * m(&xi[..self.grid.dim], r2.sqrt())
            })
            .collect();
        Field::from_spectrum(self.grid, spec)
    }

    /// `(Δx^n Σ |u|^q)^{1/q}`, or the maximum for `q = ∞`.
    pub fn lp_norm(&self, q: Lebesgue) -> f64 {
        lp_norm_of(&self.values, self.grid.cell_volume(), q)
    }

    /// `L²` norm through Parseval on the cached spectrum.
    pub fn l2_spectral(&self) -> f64 {
        let s: f64 = self.spectrum().iter().map(|z| z.norm_sqr()).sum();
        (s / self.grid.length.powi(self.grid.dim as i32)).sqrt()
    }

    /// Binary snapshot: `dim`, `points` as little-endian `u64`, `length` as `f64`, then samples.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.grid.dim as u64).to_le_bytes())?;
        w.write_all(&(self.grid.points as u64).to_le_bytes())?;
        w.write_all(&self.grid.length.to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Field> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let dim = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let points = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let length = f64::from_le_bytes(word);
        let grid = Grid::new(dim, points, length)?;
        let mut raw = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut raw)?;
        let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Field::from_values(grid, values)
    }
}

pub fn lp_norm_of(values: &[f64], cell_volume: f64, q: Lebesgue) -> f64 {
    if q.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let p = q.value();
    if p == 2.0 {
        return (cell_volume * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / peak).powf(p)).sum();
    peak * (cell_volume * s).powf(1.0 / p)
}

/// Sup of `|v|` for a resolved periodic field: the grid maximum lifted by a parabola
/// through its neighbours on each axis, so the value does not depend on where the
/// peak falls between nodes.
pub fn sup_norm(values: &[f64], grid: &Grid) -> f64 {
    let Some((at, &top)) = values.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())) else {
        return 0.0;
    };
    if top == 0.0 || !top.is_finite() {
        return top.abs();
    }
    let sign = top.signum();
    let n = grid.points;
    let idx = grid.unflatten(at);
    let mut lift = 0.0;
    for axis in 0..grid.dim {
        let stride = n.pow((grid.dim - 1 - axis) as u32);
        let base = at - idx[axis] * stride;
        let prev = base + (idx[axis] + n - 1) % n * stride;
        let next = base + (idx[axis] + 1) % n * stride;
        let (lo, hi) = (sign * values[prev], sign * values[next]);
        let curvature = lo - 2.0 * top.abs() + hi;
        if curvature < 0.0 {
            lift += (hi - lo).powi(2) / (-8.0 * curvature);
        }
    }
    top.abs() + lift
}

/// Samples `amplitude · exp(-|x|²/(2 width²))`, warning when the grid under-resolves it.
pub fn gaussian_data(grid: Grid, amplitude: f64, width: f64) -> Result<Field> {
    if !(width > 0.0) {
        return Err(LabError::Config("gaussian width must be positive".into()));
    }
    if width < 3.0 * grid.dx() {
        log::warn!("gaussian width {width} is below three grid spacings ({})", grid.dx());
    }
    if grid.length < 10.0 * width {
        log::warn!("box length {} is below ten gaussian widths", grid.length);
    }
    let inv = 0.5 / (width * width);
    Ok(Field::from_fn(grid, |x| amplitude * (-inv * x.iter().map(|c| c * c).sum::<f64>()).exp()))
}
