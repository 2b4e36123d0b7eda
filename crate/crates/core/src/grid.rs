//! Periodic tensor-product grids, complex fields and Fourier machinery.
//!
//! The box `[-L_j, L_j)` stands in for the whole space; harmonic confinement
//! keeps states Gaussian-tailed, so the periodization error is spectrally
//! small once `L_j >= 8 / sqrt(omega_j)`.
//!
//! Fields are stored row-major with the last axis fastest. Full transforms use
//! the unitary normalization `1/sqrt(N)` in both directions so Parseval reads
//! `sum |f|^2 h^d = sum |f_hat|^2 h^d`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Lines handed to one rayon task during batched 1D transforms.
const LINES_PER_TASK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Physical,
    Fourier,
}

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `prod_j [-L_j, L_j)`.
pub struct Grid {
    n: Vec<usize>,
    half_len: Vec<f64>,
    spacing: Vec<f64>,
    coords: Vec<Vec<f64>>,
    wavenumbers: Vec<Vec<f64>>,
    plans: Vec<AxisPlan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("half_len", &self.half_len)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_len == other.half_len
    }
}

impl Grid {
    /// Builds a grid with `n[j]` points on `[-half_len[j], half_len[j])`.
    pub fn new(n: &[usize], half_len: &[f64]) -> Result<Self> {
        let d = n.len();
        if d != 2 && d != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {d}")));
        }
        if half_len.len() != d {
            return Err(Error::InvalidGrid(format!(
                "expected {d} half lengths, got {}",
                half_len.len()
            )));
        }
        for (&nj, &lj) in n.iter().zip(half_len) {
            if nj < 8 || !nj.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "points per axis must be a power of two >= 8, got {nj}"
                )));
            }
            if !(lj.is_finite() && lj > 0.0) {
                return Err(Error::InvalidGrid(format!("half length must be positive, got {lj}")));
            }
        }

        let mut planner = FftPlanner::new();
        let mut spacing = Vec::with_capacity(d);
        let mut coords = Vec::with_capacity(d);
        let mut wavenumbers = Vec::with_capacity(d);
        let mut plans = Vec::with_capacity(d);
        for (&nj, &lj) in n.iter().zip(half_len) {
            let h = 2.0 * lj / nj as f64;
            spacing.push(h);
            coords.push((0..nj).map(|i| -lj + i as f64 * h).collect());
            let dk = PI / lj;
            let half = nj / 2;
            wavenumbers.push(
                (0..nj)
                    .map(|i| {
                        let m = if i < half { i as i64 } else { i as i64 - nj as i64 };
                        m as f64 * dk
                    })
                    .collect(),
            );
            plans.push(AxisPlan {
                forward: planner.plan_fft_forward(nj),
                inverse: planner.plan_fft_inverse(nj),
            });
        }

        Ok(Self {
            n: n.to_vec(),
            half_len: half_len.to_vec(),
            spacing,
            coords,
            wavenumbers,
            plans,
        })
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn half_lengths(&self) -> &[f64] {
        &self.half_len
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `prod_j h_j`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    /// Angular wavenumbers in FFT order: zero first, Nyquist at `n/2` (negative).
    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// Distance between consecutive elements along `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n[axis + 1..].iter().product()
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.n[axis];
            flat /= self.n[axis];
        }
        idx
    }

    /// Coordinates of a flat position (unused trailing entries are zero).
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim() {
            x[axis] = self.coords[axis][idx[axis]];
        }
        x
    }

    /// Squared wavenumber `|k|^2` at a flat position of a Fourier-space field.
    pub fn k_squared(&self, flat: usize) -> f64 {
        let idx = self.unravel(flat);
        (0..self.dim())
            .map(|a| self.wavenumbers[a][idx[a]].powi(2))
            .sum()
    }

    /// Recommended half length for a trap frequency: `8 / sqrt(omega)`.
    pub fn recommended_half_length(omega: f64) -> f64 {
        8.0 / omega.sqrt()
    }

    /// Unnormalized 1D transforms along `axis` for every grid line.
    pub(crate) fn transform_axis(&self, data: &mut [Complex64], axis: usize, forward: bool) {
        self.process_axis(data, axis, |plan, lines, scratch, _| {
            let fft = if forward { &plan.forward } else { &plan.inverse };
            fft.process_with_scratch(lines, scratch);
        });
    }

    /// Transforms every line along `axis`, lets `op` act on each spectrum, and
    /// transforms back (normalized so that an identity `op` is a no-op).
    ///
    /// `op` receives the line id (the flat index of the line with `axis`
    /// removed) and the spectrum in FFT order.
    pub(crate) fn axis_spectral_map<F>(&self, data: &mut [Complex64], axis: usize, op: F)
    where
        F: Fn(usize, &mut [Complex64]) + Sync,
    {
        let n = self.n[axis];
        let norm = 1.0 / n as f64;
        self.process_axis(data, axis, |plan, lines, scratch, first_line| {
            plan.forward.process_with_scratch(lines, scratch);
            for (j, line) in lines.chunks_exact_mut(n).enumerate() {
                op(first_line + j, line);
            }
            plan.inverse.process_with_scratch(lines, scratch);
            for z in lines.iter_mut() {
                *z *= norm;
            }
        });
    }

    /// Runs `work` on contiguous batches of lines along `axis`. Strided axes
    /// are transposed into a scratch buffer first so that every batch is
    /// contiguous; the line id ordering is `outer * inner + inner_index`.
    fn process_axis<W>(&self, data: &mut [Complex64], axis: usize, work: W)
    where
        W: Fn(&AxisPlan, &mut [Complex64], &mut Vec<Complex64>, usize) + Sync,
    {
        let n = self.n[axis];
        let inner = self.stride(axis);
        let plan = &self.plans[axis];
        let scratch_len = plan
            .forward
            .get_inplace_scratch_len()
            .max(plan.inverse.get_inplace_scratch_len());
        let batch = n * LINES_PER_TASK;
        let run = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(batch).enumerate().for_each_init(
                || vec![Complex64::new(0.0, 0.0); scratch_len],
                |scratch, (chunk_idx, lines)| work(plan, lines, scratch, chunk_idx * LINES_PER_TASK),
            );
        };

        if inner == 1 {
            run(data);
            return;
        }

        let block = n * inner;
        let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
        // lines[(outer * inner + j) * n + i] = data[outer * block + i * inner + j]
        {
            let src: &[Complex64] = data;
            lines.par_chunks_mut(n).enumerate().for_each(|(line_id, line)| {
                let outer = line_id / inner;
                let j = line_id % inner;
                let base = outer * block + j;
                for (i, z) in line.iter_mut().enumerate() {
                    *z = src[base + i * inner];
                }
            });
        }
        run(&mut lines);
        let src: &[Complex64] = &lines;
        data.par_chunks_mut(inner).enumerate().for_each(|(row_id, row)| {
            let outer = row_id / n;
            let i = row_id % n;
            for (j, z) in row.iter_mut().enumerate() {
                *z = src[(outer * inner + j) * n + i];
            }
        });
    }
}

/// Complex samples of a state on a [`Grid`].
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<Grid>,
    data: Vec<Complex64>,
    space: Space,
}

impl ComplexField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: Arc::clone(grid),
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
            space: Space::Physical,
        }
    }

    /// Samples `f(x)` at every grid point (physical space).
    pub fn from_fn<F>(grid: &Arc<Grid>, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let d = grid.dim();
        let data = (0..grid.len())
            .into_par_iter()
            .map(|flat| f(&grid.point(flat)[..d]))
            .collect();
        Self {
            grid: Arc::clone(grid),
            data,
            space: Space::Physical,
        }
    }

    pub fn from_vec(grid: &Arc<Grid>, data: Vec<Complex64>, space: Space) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} samples, grid has {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            data,
            space,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn require_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::WrongSpace {
                expected,
                found: self.space,
            })
        }
    }

    pub fn require_same_grid(&self, other: &ComplexField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        self.data.par_iter_mut().for_each(|z| *z *= s);
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &ComplexField) -> Result<Self> {
        self.require_same_grid(other)?;
        let mut out = self.clone();
        out.data
            .par_iter_mut()
            .zip(other.data.par_iter())
            .for_each(|(a, b)| *a += s * b);
        Ok(out)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Quadrature inner product `(self, other) = sum conj(self) * other * h^d`.
    pub fn inner(&self, other: &ComplexField) -> Result<Complex64> {
        self.require_same_grid(other)?;
        let mut re = crate::sum::Accumulator::default();
        let mut im = crate::sum::Accumulator::default();
        for (a, b) in self.data.iter().zip(&other.data) {
            let p = a.conj() * b;
            re.add(p.re);
            im.add(p.im);
        }
        let w = self.grid.cell_volume();
        Ok(Complex64::new(re.total() * w, im.total() * w))
    }

    /// Squared L2 norm by quadrature.
    pub fn norm_sqr(&self) -> f64 {
        crate::sum::sum_iter(self.data.iter().map(|z| z.norm_sqr())) * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexField) -> Result<f64> {
        self.require_same_grid(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Unitary forward transform (physical -> Fourier).
    pub fn fft_forward(&self) -> Result<Self> {
        self.require_space(Space::Physical)?;
        let mut out = self.clone();
        out.transform_all(true);
        out.space = Space::Fourier;
        Ok(out)
    }

    /// Unitary inverse transform (Fourier -> physical).
    pub fn fft_inverse(&self) -> Result<Self> {
        self.require_space(Space::Fourier)?;
        let mut out = self.clone();
        out.transform_all(false);
        out.space = Space::Physical;
        Ok(out)
    }

    fn transform_all(&mut self, forward: bool) {
        let grid = Arc::clone(&self.grid);
        for axis in 0..grid.dim() {
            grid.transform_axis(&mut self.data, axis, forward);
        }
        let norm = 1.0 / (grid.len() as f64).sqrt();
        self.data.par_iter_mut().for_each(|z| *z *= norm);
    }

    /// Multiplies a Fourier-space field pointwise by `symbol(flat_index)`.
    pub(crate) fn apply_symbol<F>(&mut self, symbol: F)
    where
        F: Fn(usize) -> Complex64 + Sync,
    {
        self.data
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, z)| *z *= symbol(i));
    }
}

/// `d f / d x_axis` by multiplication with `i k_axis` in Fourier space.
pub fn spectral_derivative(f: &ComplexField, axis: usize) -> Result<ComplexField> {
    f.require_space(Space::Physical)?;
    if axis >= f.grid().dim() {
        return Err(Error::InvalidGrid(format!(
            "axis {axis} out of range for a {}-dimensional grid",
            f.grid().dim()
        )));
    }
    let mut out = f.clone();
    let grid = Arc::clone(f.grid());
    let k = grid.wavenumbers(axis).to_vec();
    grid.axis_spectral_map(out.data_mut(), axis, |_, line| {
        for (z, &kj) in line.iter_mut().zip(&k) {
            *z *= Complex64::new(0.0, kj);
        }
    });
    Ok(out)
}

/// Derivative of a Fourier-space field along `axis`, returned in physical space.
pub(crate) fn derivative_from_spectrum(spec: &ComplexField, axis: usize) -> ComplexField {
    let grid = Arc::clone(spec.grid());
    let mut out = spec.clone();
    let k = grid.wavenumbers(axis);
    out.apply_symbol(|flat| Complex64::new(0.0, k[grid.unravel(flat)[axis]]));
    out.fft_inverse().expect("spectrum is in Fourier space")
}
