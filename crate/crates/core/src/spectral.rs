//! Periodic-box discretization, spectral transforms and discrete norms.
//!
//! Coefficients follow the continuum Fourier convention
//! `f̂(ξ) = ∫ f(x) e^{-i x·ξ} dx`: the forward transform carries the cell
//! volume `dxⁿ`, the inverse carries `1/Lⁿ`, so that
//! `Σ_x |f|² dxⁿ = L⁻ⁿ Σ_ξ |f̂|²`.
//!
//! Modes are stored in FFT order along every axis (index `i` holds the integer
//! frequency `i` for `i < N/2` and `i - N` otherwise), row-major with axis 0
//! slowest.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{NskError, Result};
use crate::scalar::{pairwise_sum_by, Scalar};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Values of one Fourier mode: `[φ̂, m̂₁, m̂₂, m̂₃]`, unused momentum slots zero.
pub type ModeValues<T> = [Complex<T>; 1 + MAX_DIM];

/// Uniform periodic grid on `[0, L)ⁿ` with `N` modes per axis.
#[derive(Clone)]
pub struct Grid<T: Scalar> {
    dim: usize,
    modes: usize,
    length: T,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Scalar> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("modes", &self.modes)
            .field("length", &self.length)
            .finish()
    }
}

impl<T: Scalar> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.modes == other.modes && self.length == other.length
    }
}

impl<T: Scalar> Grid<T> {
    /// Builds a grid; `dim ∈ {1,2,3}`, `modes` even and at least 8, `length > 0`.
    pub fn new(dim: usize, modes: usize, length: T) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(NskError::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if modes < 8 || !modes.is_multiple_of(2) {
            return Err(NskError::InvalidGrid(format!(
                "modes per axis must be even and >= 8, got {modes}"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(NskError::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            modes,
            length,
            forward: planner.plan_fft_forward(modes),
            inverse: planner.plan_fft_inverse(modes),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.modes
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn dx(&self) -> T {
        self.length / T::lit(self.modes as f64)
    }

    /// Total number of modes (and grid points), `Nⁿ`.
    pub fn len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fundamental frequency `2π/L`.
    pub fn fundamental(&self) -> T {
        T::lit(2.0) * T::PI() / self.length
    }

    /// Largest resolvable radius `πN/L`.
    pub fn max_radius(&self) -> T {
        T::PI() * T::lit(self.modes as f64) / self.length
    }

    /// `L⁻ⁿ`, the Parseval weight of a single coefficient.
    pub fn parseval_weight(&self) -> T {
        T::one() / self.length.powi(self.dim as i32)
    }

    /// `dxⁿ`, the volume of one grid cell.
    pub fn cell_volume(&self) -> T {
        self.dx().powi(self.dim as i32)
    }

    /// The sorted one-dimensional frequency set `(2π/L)·{-N/2, …, N/2-1}`.
    pub fn frequencies_1d(&self) -> Vec<T> {
        let half = (self.modes / 2) as i64;
        (-half..half).map(|k| self.fundamental() * T::lit(k as f64)).collect()
    }

    /// Integer frequency label of array index `i` along one axis.
    #[inline]
    pub fn label(&self, i: usize) -> i64 {
        if i < self.modes / 2 {
            i as i64
        } else {
            i as i64 - self.modes as i64
        }
    }

    /// Array index of integer label `k` along one axis (periodic).
    #[inline]
    pub fn index_of_label(&self, k: i64) -> usize {
        k.rem_euclid(self.modes as i64) as usize
    }

    /// Integer frequency labels of a flat mode index; unused axes are zero.
    #[inline]
    pub fn labels(&self, flat: usize) -> [i64; MAX_DIM] {
        let mut out = [0i64; MAX_DIM];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = self.label(rem % self.modes);
            rem /= self.modes;
        }
        out
    }

    /// Flat index of the mode with the given integer labels.
    #[inline]
    pub fn flat_index(&self, labels: [i64; MAX_DIM]) -> usize {
        (0..self.dim).fold(0, |acc, axis| acc * self.modes + self.index_of_label(labels[axis]))
    }

    /// Flat index of the conjugate partner `-k`.
    #[inline]
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let mut l = self.labels(flat);
        for v in l.iter_mut().take(self.dim) {
            *v = -*v;
        }
        self.flat_index(l)
    }

    /// Whether any component of the mode sits on the self-conjugate Nyquist
    /// frequency `-N/2`.
    #[inline]
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let half = -((self.modes / 2) as i64);
        self.labels(flat).iter().take(self.dim).any(|&k| k == half)
    }

    /// Wave vector used by every multiplier.
    ///
    /// The Nyquist component is self-conjugate, so a real field cannot carry
    /// an odd multiplier there; it is represented by frequency zero. All other
    /// components are `(2π/L)·k`.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [T; MAX_DIM] {
        let half = -((self.modes / 2) as i64);
        let base = self.fundamental();
        let l = self.labels(flat);
        let mut out = [T::zero(); MAX_DIM];
        for axis in 0..self.dim {
            if l[axis] != half {
                out[axis] = base * T::lit(l[axis] as f64);
            }
        }
        out
    }

    #[inline]
    pub fn wavenumber_sq(&self, flat: usize) -> T {
        let xi = self.wavevector(flat);
        xi.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    /// Physical coordinates of grid point `flat`.
    pub fn coordinates(&self, flat: usize) -> [T; MAX_DIM] {
        let mut out = [T::zero(); MAX_DIM];
        let mut rem = flat;
        let dx = self.dx();
        for axis in (0..self.dim).rev() {
            out[axis] = dx * T::lit((rem % self.modes) as f64);
            rem /= self.modes;
        }
        out
    }

    /// 2/3-rule mask: keeps modes with `3|kᵢ| < N` on every axis.
    #[inline]
    pub fn dealias_keep(&self, flat: usize) -> bool {
        let n = self.modes as i64;
        self.labels(flat).iter().take(self.dim).all(|&k| 3 * k.abs() < n)
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(NskError::ShapeMismatch { expected: self.len(), got });
        }
        Ok(())
    }

    /// Forward transform of real samples, scaled by `dxⁿ`.
    pub fn to_spectral(&self, field: &[T]) -> Result<Vec<Complex<T>>> {
        self.check_len(field.len())?;
        let mut data: Vec<Complex<T>> = field.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.transform(&mut data, false);
        let scale = self.cell_volume();
        data.par_iter_mut().for_each(|c| *c = *c * scale);
        Ok(data)
    }

    /// Inverse transform returning the real part, scaled by `L⁻ⁿ`.
    pub fn from_spectral(&self, coeffs: &[Complex<T>]) -> Result<Vec<T>> {
        self.check_len(coeffs.len())?;
        let mut data = coeffs.to_vec();
        self.transform(&mut data, true);
        let scale = self.parseval_weight();
        Ok(data.par_iter().map(|c| c.re * scale).collect())
    }

    /// Unnormalized in-place n-dimensional DFT.
    pub(crate) fn transform(&self, data: &mut [Complex<T>], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        for axis in 0..self.dim {
            self.transform_axis(data, axis, plan);
        }
    }

    fn transform_axis(&self, data: &mut [Complex<T>], axis: usize, plan: &Arc<dyn Fft<T>>) {
        let n = self.modes;
        let stride = n.pow((self.dim - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(n * 64.min(self.len() / n)).for_each(|chunk| plan.process(chunk));
            return;
        }
        let block = n * stride;
        let transpose = |blk: &[Complex<T>], lo: usize, hi: usize| {
            let width = hi - lo;
            let mut buf = vec![Complex::zero(); n * width];
            for j in 0..n {
                for i in lo..hi {
                    buf[(i - lo) * n + j] = blk[j * stride + i];
                }
            }
            plan.process(&mut buf);
            buf
        };
        data.par_chunks_mut(block).for_each(|blk| {
            // Lines inside one block are independent; split them across tasks.
            let tiles: Vec<(usize, usize)> =
                (0..stride).step_by(64).map(|lo| (lo, (lo + 64).min(stride))).collect();
            let results: Vec<Vec<Complex<T>>> =
                {
                let view: &[Complex<T>] = blk;
                tiles.par_iter().map(|&(lo, hi)| transpose(view, lo, hi)).collect()
            };
            for (&(lo, hi), buf) in tiles.iter().zip(results) {
                for i in lo..hi {
                    for j in 0..n {
                        blk[j * stride + i] = buf[(i - lo) * n + j];
                    }
                }
            }
        });
    }
}

/// Which component a seminorm is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Phi,
    Momentum,
    Both,
}

/// Spectral coefficients `(φ̂, m̂)` on every mode of a grid.
#[derive(Clone, Debug)]
pub struct SpectralState<T: Scalar> {
    grid: Grid<T>,
    phi: Vec<Complex<T>>,
    m: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> SpectralState<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        let len = grid.len();
        Self {
            grid: grid.clone(),
            phi: vec![Complex::zero(); len],
            m: vec![vec![Complex::zero(); len]; grid.dim()],
        }
    }

    /// Wraps existing coefficient arrays.
    pub fn from_coefficients(
        grid: &Grid<T>,
        phi: Vec<Complex<T>>,
        m: Vec<Vec<Complex<T>>>,
    ) -> Result<Self> {
        grid.check_len(phi.len())?;
        if m.len() != grid.dim() {
            return Err(NskError::ShapeMismatch { expected: grid.dim(), got: m.len() });
        }
        for c in &m {
            grid.check_len(c.len())?;
        }
        Ok(Self { grid: grid.clone(), phi, m })
    }

    /// Transforms physical samples of `φ` and the momentum components.
    pub fn from_physical(grid: &Grid<T>, phi: &[T], m: &[Vec<T>]) -> Result<Self> {
        if m.len() != grid.dim() {
            return Err(NskError::ShapeMismatch { expected: grid.dim(), got: m.len() });
        }
        let phi_hat = grid.to_spectral(phi)?;
        let m_hat = m.iter().map(|c| grid.to_spectral(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: grid.clone(), phi: phi_hat, m: m_hat })
    }

    /// Physical samples `(φ, [m₁, …])`.
    pub fn to_physical(&self) -> (Vec<T>, Vec<Vec<T>>) {
        let phi = self.grid.from_spectral(&self.phi).expect("state shape matches grid");
        let m = self
            .m
            .iter()
            .map(|c| self.grid.from_spectral(c).expect("state shape matches grid"))
            .collect();
        (phi, m)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn phi(&self) -> &[Complex<T>] {
        &self.phi
    }

    pub fn momentum(&self) -> &[Vec<Complex<T>>] {
        &self.m
    }

    pub fn phi_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.phi
    }

    pub fn momentum_mut(&mut self) -> &mut [Vec<Complex<T>>] {
        &mut self.m
    }

    /// Coefficients of one mode, packed as `[φ̂, m̂₁, m̂₂, m̂₃]`.
    #[inline]
    pub fn mode(&self, flat: usize) -> ModeValues<T> {
        let mut v = [Complex::zero(); 1 + MAX_DIM];
        v[0] = self.phi[flat];
        for (c, comp) in self.m.iter().enumerate() {
            v[1 + c] = comp[flat];
        }
        v
    }

    #[inline]
    pub fn set_mode(&mut self, flat: usize, v: ModeValues<T>) {
        self.phi[flat] = v[0];
        for (c, comp) in self.m.iter_mut().enumerate() {
            comp[flat] = v[1 + c];
        }
    }

    /// Applies `f(flat, values)` to every mode in parallel, returning a new state.
    pub fn map_modes<F>(&self, f: F) -> Self
    where
        F: Fn(usize, ModeValues<T>) -> ModeValues<T> + Sync,
    {
        let values: Vec<ModeValues<T>> =
            (0..self.grid.len()).into_par_iter().map(|i| f(i, self.mode(i))).collect();
        let mut out = Self::zeros(&self.grid);
        out.phi.par_iter_mut().zip(values.par_iter()).for_each(|(d, v)| *d = v[0]);
        for (c, comp) in out.m.iter_mut().enumerate() {
            comp.par_iter_mut().zip(values.par_iter()).for_each(|(d, v)| *d = v[1 + c]);
        }
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T> + Sync) -> Self {
        assert_eq!(self.grid, other.grid, "states live on different grids");
        let combine = |a: &[Complex<T>], b: &[Complex<T>]| -> Vec<Complex<T>> {
            a.par_iter().zip(b.par_iter()).map(|(&x, &y)| f(x, y)).collect()
        };
        Self {
            grid: self.grid.clone(),
            phi: combine(&self.phi, &other.phi),
            m: self.m.iter().zip(&other.m).map(|(a, b)| combine(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b * c)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map_modes(|_, v| v.map(|x| x * c))
    }

    /// Multiplies every mode by the real multiplier `w(flat)`.
    pub fn apply_multiplier(&self, w: impl Fn(usize) -> T + Sync) -> Self {
        self.map_modes(|i, v| {
            let s = w(i);
            v.map(|x| x * s)
        })
    }

    /// 2/3-rule truncation of every component.
    pub fn dealiased(&self) -> Self {
        let g = &self.grid;
        self.apply_multiplier(|i| if g.dealias_keep(i) { T::one() } else { T::zero() })
    }

    /// Largest `|c(k) - conj c(-k)|` relative to the largest coefficient.
    pub fn hermitian_asymmetry(&self) -> T {
        let mut worst = T::zero();
        let mut scale = T::zero();
        for comp in std::iter::once(&self.phi).chain(self.m.iter()) {
            for (i, c) in comp.iter().enumerate() {
                let j = self.grid.conjugate_index(i);
                worst = worst.max((*c - comp[j].conj()).norm());
                scale = scale.max(c.norm());
            }
        }
        if scale > T::zero() {
            worst / scale
        } else {
            T::zero()
        }
    }

    /// Sum of `w(flat)·|c|²` over the selected components with Parseval weight.
    pub fn weighted_square(&self, which: Component, w: impl Fn(usize) -> T + Sync) -> T {
        let include_phi = which != Component::Momentum;
        let include_m = which != Component::Phi;
        let total = pairwise_sum_by(self.grid.len(), &|i| {
            let mut s = T::zero();
            if include_phi {
                s = s + self.phi[i].norm_sqr();
            }
            if include_m {
                for comp in &self.m {
                    s = s + comp[i].norm_sqr();
                }
            }
            s * w(i)
        });
        total * self.grid.parseval_weight()
    }

    /// Discrete `L²` norm of `∇ᵏ` of the selected components.
    pub fn seminorm(&self, k: u32, which: Component) -> T {
        let g = &self.grid;
        self.weighted_square(which, |i| g.wavenumber_sq(i).powi(k as i32)).sqrt()
    }

    /// `φ̂(0)`, proportional to the total mass perturbation.
    pub fn mass(&self) -> Complex<T> {
        self.phi[0]
    }

    /// `m̂(0)`, the total momentum.
    pub fn total_momentum(&self) -> Vec<Complex<T>> {
        self.m.iter().map(|c| c[0]).collect()
    }

    pub fn is_finite(&self) -> bool {
        std::iter::once(&self.phi)
            .chain(self.m.iter())
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// `Σ_ξ |f̂|²·w` with Parseval weight for a single scalar field.
pub fn field_square<T: Scalar>(grid: &Grid<T>, coeffs: &[Complex<T>], w: impl Fn(usize) -> T + Sync) -> T {
    pairwise_sum_by(grid.len(), &|i| coeffs[i].norm_sqr() * w(i)) * grid.parseval_weight()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn one_dimensional_frequency_set_is_integer_for_two_pi_box() {
        let g = Grid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let f = g.frequencies_1d();
        let expect: Vec<f64> = (-4..4).map(|k| k as f64).collect();
        for (a, b) in f.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_counts_and_rejections() {
        let g = Grid::new(3, 64, 100.0f64).unwrap();
        assert_eq!(g.len(), 262_144);
        assert!(matches!(Grid::new(2, 7, 1.0f64), Err(NskError::InvalidGrid(_))));
        assert!(matches!(Grid::new(4, 8, 1.0f64), Err(NskError::InvalidGrid(_))));
        assert!(matches!(Grid::new(2, 6, 1.0f64), Err(NskError::InvalidGrid(_))));
        assert!(matches!(Grid::new(2, 8, 0.0f64), Err(NskError::InvalidGrid(_))));
    }

    #[test]
    fn index_maps_round_trip_and_zero_appears_once() {
        let g = Grid::new(3, 8, 1.0f64).unwrap();
        let mut zeros = 0;
        for i in 0..g.len() {
            assert_eq!(g.flat_index(g.labels(i)), i);
            let j = g.conjugate_index(i);
            assert_eq!(g.conjugate_index(j), i);
            let (a, b) = (g.wavevector(i), g.wavevector(j));
            for ax in 0..3 {
                assert_eq!(a[ax], -b[ax]);
            }
            if g.labels(i) == [0, 0, 0] {
                zeros += 1;
            }
        }
        assert_eq!(zeros, 1);
    }

    #[test]
    fn constant_field_has_only_zero_mode() {
        let g = Grid::new(2, 16, 3.0f64).unwrap();
        let c = g.to_spectral(&vec![2.5; g.len()]).unwrap();
        assert!((c[0].re - 2.5 * 9.0).abs() < 1e-12);
        assert!(c.iter().skip(1).all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn cosine_has_two_conjugate_modes() {
        let l = 2.0f64;
        let g = Grid::new(2, 16, l).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|i| (2.0 * std::f64::consts::PI * g.coordinates(i)[0] / l).cos())
            .collect();
        let c = g.to_spectral(&f).unwrap();
        let nonzero: Vec<usize> = (0..g.len()).filter(|&i| c[i].norm() > 1e-12).collect();
        assert_eq!(nonzero.len(), 2);
        assert_eq!(g.conjugate_index(nonzero[0]), nonzero[1]);
        assert_eq!(g.labels(nonzero[0])[0].abs(), 1);
    }

    #[test]
    fn round_trip_and_parseval_on_random_fields() {
        for (dim, n) in [(1, 64), (2, 32), (3, 16)] {
            let g = Grid::new(dim, n, 1.7f64).unwrap();
            let f = random_field(g.len(), 11 + dim as u64);
            let c = g.to_spectral(&f).unwrap();
            let back = g.from_spectral(&c).unwrap();
            let err: f64 = f.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = f.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(err / norm < 1e-12, "round trip {err}");

            let physical: f64 = f.iter().map(|a| a * a).sum::<f64>() * g.cell_volume();
            let spectral = field_square(&g, &c, |_| 1.0);
            assert!(((physical - spectral) / physical).abs() < 1e-12);

            let st = SpectralState::from_coefficients(&g, c, vec![vec![Complex::zero(); g.len()]; dim])
                .unwrap();
            assert!(st.hermitian_asymmetry() < 1e-12);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = Grid::new(2, 8, 1.0f64).unwrap();
        assert!(matches!(g.to_spectral(&[0.0; 10]), Err(NskError::ShapeMismatch { .. })));
    }

    #[test]
    fn seminorm_of_single_mode_scales_with_frequency() {
        let g = Grid::new(3, 16, 2.0f64).unwrap();
        let mut st = SpectralState::zeros(&g);
        let k = g.flat_index([2, -1, 3]);
        st.phi_mut()[k] = Complex::new(1.0, 0.0);
        let kc = g.conjugate_index(k);
        st.phi_mut()[kc] = Complex::new(1.0, 0.0);
        let n0 = st.seminorm(0, Component::Phi);
        let n1 = st.seminorm(1, Component::Phi);
        assert!((n1 - g.wavenumber_sq(k).sqrt() * n0).abs() < 1e-12 * n1);
        assert_eq!(SpectralState::zeros(&g).seminorm(3, Component::Both), 0.0);
    }

    #[test]
    fn seminorm_matches_physical_quadrature_of_gaussian() {
        let l = 20.0f64;
        let g = Grid::new(3, 32, l).unwrap();
        let phi: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.coordinates(i);
                let r2: f64 = x.iter().map(|v| (v - l / 2.0).powi(2)).sum();
                (-r2 / 4.0).exp()
            })
            .collect();
        let zero = vec![vec![0.0; g.len()]; 3];
        let st = SpectralState::from_physical(&g, &phi, &zero).unwrap();
        let quad: f64 = phi.iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let n = st.seminorm(0, Component::Phi);
        assert!(((n * n - quad) / quad).abs() < 1e-10);
    }
}
