//! The Schrödinger representation `π^λ` of `ℍⁿ` on a discretized `L²(ℝⁿ)`,
//! its integrated form `π_f^λ`, the matrix coefficients `c_{f,g}` and
//! `C^λ_{f,g}`, Hilbert–Schmidt norms, rank-one operators and the fiber energy `𝔊_f`.
//!
//! Pairings written `⟨u, g⟩` below are bilinear (`∫ u g`, no conjugate); norms
//! are the usual Hermitian ones.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Axis, AxisRole, Dft, Domain, Grid, Sign};
use crate::group::GroupPoint;
use crate::linalg::CMatrix;
use crate::scalar::{czero, expi2pi, Real};
use crate::transform::{SampledField, Side};

/// Uniform periodic grid on `[−L, L)ⁿ` discretizing `L²(ℝⁿ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGrid<T> {
    grid: Grid<T>,
}

impl<T: Real> LineGrid<T> {
    pub fn new(n: usize, count: usize, half_width: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        let axis = Axis::position(count, half_width, AxisRole::V)?;
        Ok(Self { grid: Grid::new(vec![axis; n])? })
    }

    pub fn n(&self) -> usize {
        self.grid.ndim()
    }

    pub fn axis(&self) -> &Axis<T> {
        &self.grid.axes()[0]
    }

    pub fn count(&self) -> usize {
        self.axis().count
    }

    pub fn half_width(&self) -> T {
        self.axis().half_width
    }

    pub fn spacing(&self) -> T {
        self.axis().spacing()
    }

    /// Number of nodes, `N_sⁿ`.
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Quadrature weight `dⁿ`.
    pub fn weight(&self) -> T {
        self.grid.cell_volume()
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn coords_of(&self, flat: usize) -> Vec<T> {
        self.grid.coords_of(flat)
    }

    /// The frequency grid of the discrete transform.
    pub fn dual(&self) -> Self {
        Self { grid: self.grid.dual() }
    }

    pub fn is_frequency(&self) -> bool {
        self.axis().domain == Domain::Frequency
    }

    pub fn same_geometry(&self, other: &Self) -> bool {
        self.grid.same_geometry(&other.grid)
    }
}

/// A sampled element of `L²(ℝⁿ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    grid: LineGrid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(grid: LineGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidArgument("state vector entries must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[T]) -> Complex<T>>(grid: LineGrid<T>, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords_of(i))).collect();
        Self { grid, values }
    }

    /// `e^{−π|s − c|²}` modulated by `e^{2πi k·s}`.
    pub fn gaussian(grid: LineGrid<T>, centre: &[T], freq: &[T]) -> Self {
        Self::from_fn(grid, |s| {
            let r2 = s.iter().zip(centre).fold(T::zero(), |a, (p, q)| a + (*p - *q) * (*p - *q));
            let ph = s.iter().zip(freq).fold(T::zero(), |a, (p, q)| a + *p * *q);
            expi2pi(ph).scale((-T::PI() * r2).exp())
        })
    }

    pub fn grid(&self) -> &LineGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn norm(&self) -> T {
        (self.values.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) * self.grid.weight()).sqrt()
    }

    /// Bilinear pairing `∫ u g`.
    pub fn pair(&self, g: &Self) -> Result<Complex<T>> {
        self.check(g)?;
        Ok(self.values.iter().zip(&g.values).fold(czero(), |a, (p, q)| a + *p * *q) * self.grid.weight())
    }

    /// Hermitian inner product `∫ u ḡ`.
    pub fn inner(&self, g: &Self) -> Result<Complex<T>> {
        self.check(g)?;
        Ok(self.values.iter().zip(&g.values).fold(czero(), |a, (p, q)| a + *p * q.conj()) * self.grid.weight())
    }

    fn check(&self, g: &Self) -> Result<()> {
        if self.grid.same_geometry(&g.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("state vectors live on different grids".into()))
        }
    }

    pub fn sub(&self, g: &Self) -> Result<Self> {
        self.check(g)?;
        let values = self.values.iter().zip(&g.values).map(|(a, b)| *a - *b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| *v * s).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `û(ξ) = ∫ u(s) e^{−2πi s·ξ} ds` on the dual grid.
    pub fn fourier(&self) -> Result<Self> {
        if self.grid.is_frequency() {
            return Err(Error::WrongSide("state already on the frequency grid".into()));
        }
        Ok(Self { grid: self.grid.dual(), values: transform_all(&self.grid, &self.values, Sign::Minus) })
    }

    pub fn inverse_fourier(&self) -> Result<Self> {
        if !self.grid.is_frequency() {
            return Err(Error::WrongSide("state is not on a frequency grid".into()));
        }
        Ok(Self { grid: self.grid.dual(), values: transform_all(&self.grid, &self.values, Sign::Plus) })
    }
}

pub(crate) fn transform_all<T: Real>(grid: &LineGrid<T>, values: &[Complex<T>], sign: Sign) -> Vec<Complex<T>> {
    let shape = grid.grid.shape();
    let mut out = values.to_vec();
    let mut dft = Dft::new();
    for i in 0..grid.n() {
        dft.along(&mut out, &shape, i, grid.axis(), sign);
    }
    out
}

/// Band-limited periodic translation `u ↦ u(· + a)` via an FFT phase ramp.
fn shift_values<T: Real>(grid: &LineGrid<T>, values: &[Complex<T>], a: &[T]) -> Vec<Complex<T>> {
    let dual = grid.dual();
    let mut spec = transform_all(grid, values, Sign::Minus);
    for (p, v) in spec.iter_mut().enumerate() {
        let xi = dual.coords_of(p);
        let ph = xi.iter().zip(a).fold(T::zero(), |s, (x, y)| s + *x * *y);
        *v *= expi2pi(ph);
    }
    transform_all(&dual, &spec, Sign::Plus)
}

/// 1-D matrix of the periodic band-limited shift by `a`:
/// `S[j, k] = d Δξ Σ_m e^{2πi ξ_m (s_j + a − s_k)}`.
fn shift_matrix_1d<T: Real>(axis: &Axis<T>, a: T) -> Vec<Complex<T>> {
    let n = axis.count;
    let dual = axis.dual();
    let w = axis.spacing() * dual.spacing();
    let xi = dual.coords();
    // depends on j − k only
    let diag: Vec<Complex<T>> = (0..2 * n - 1)
        .map(|r| {
            let off = T::from_usize_lossy(r) - T::from_usize_lossy(n - 1);
            let z = off * axis.spacing() + a;
            xi.iter().fold(czero::<T>(), |acc, x| acc + expi2pi(*x * z)).scale(w)
        })
        .collect();
    let mut m = vec![czero(); n * n];
    for j in 0..n {
        for k in 0..n {
            m[j * n + k] = diag[j + n - 1 - k];
        }
    }
    m
}

fn kron_shift<T: Real>(grid: &LineGrid<T>, a: &[T]) -> CMatrix<T> {
    let n1 = grid.count();
    let mats: Vec<Vec<Complex<T>>> = a.iter().map(|&ai| shift_matrix_1d(grid.axis(), ai)).collect();
    let total = grid.len();
    let g = &grid.grid;
    let mut ji = vec![0; grid.n()];
    let mut ki = vec![0; grid.n()];
    CMatrix::from_fn(total, total, |j, k| {
        g.unravel(j, &mut ji);
        g.unravel(k, &mut ki);
        mats.iter().enumerate().fold(Complex::new(T::one(), T::zero()), |acc, (d, m)| acc * m[ji[d] * n1 + ki[d]])
    })
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda == T::zero() || !lambda.is_finite() {
        return Err(Error::ZeroLambda);
    }
    Ok(())
}

/// `π_h^λ u(s) = e^{2πiλt} e^{2πi√|λ| y·s} u(s ± √|λ| x)`, `+` for `λ > 0`, `−` for `λ < 0`.
pub fn pi_point<T: Real>(h: &GroupPoint<T>, lambda: T, u: &StateVector<T>) -> Result<StateVector<T>> {
    check_lambda(lambda)?;
    let grid = &u.grid;
    if h.n() != grid.n() {
        return Err(Error::DimensionMismatch(format!("point in ℍ^{} acting on L²(ℝ^{})", h.n(), grid.n())));
    }
    let sigma = lambda.abs().sqrt();
    let sgn = lambda.signum();
    let a: Vec<T> = h.x().iter().map(|x| sgn * sigma * *x).collect();
    let mut values = shift_values(grid, &u.values, &a);
    for (p, v) in values.iter_mut().enumerate() {
        let s = grid.coords_of(p);
        let ys = h.y().iter().zip(&s).fold(T::zero(), |acc, (y, q)| acc + *y * *q);
        *v *= expi2pi(lambda * h.t() + sigma * ys);
    }
    Ok(StateVector { grid: grid.clone(), values })
}

/// `c_{f,g}(x, y) = ∫ e^{2πi y·u} f(u + x) g(u) du`.
///
/// `x` runs over the line grid and `y` over its dual (so that the Fourier
/// transform of the result lands on (dual line, line)); the output is a field
/// on a horizontal grid ordered `(x₁..xₙ, y₁..yₙ)`.
pub fn c_fun<T: Real>(f: &StateVector<T>, g: &StateVector<T>) -> Result<SampledField<T>> {
    f.check(g)?;
    let lg = &f.grid;
    if lg.is_frequency() {
        return Err(Error::WrongSide("c_fun expects position-space states".into()));
    }
    let n = lg.n();
    let axis = *lg.axis();
    let ya = Axis::position(axis.count, axis.dual().half_width, AxisRole::V)?;
    let mut axes = vec![axis; n];
    axes.extend(std::iter::repeat(ya).take(n));
    let out_grid = Grid::new(axes)?;
    let nn = lg.len();
    let g_ = &lg.grid;
    let rows: Vec<Vec<Complex<T>>> = (0..nn)
        .into_par_iter()
        .map(|k| {
            let mut ki = vec![0; n];
            let mut ji = vec![0; n];
            let mut si = vec![0; n];
            g_.unravel(k, &mut ki);
            let w: Vec<Complex<T>> = (0..nn)
                .map(|j| {
                    g_.unravel(j, &mut ji);
                    for d in 0..n {
                        si[d] = axis.sum_index(ji[d], ki[d]);
                    }
                    f.values[g_.ravel(&si)] * g.values[j]
                })
                .collect();
            transform_all(lg, &w, Sign::Plus)
        })
        .collect();
    SampledField::new(out_grid, rows.concat())
}

/// `C^λ_{f,g}(h) = ⟨π_h^λ f, g⟩` (bilinear pairing).
#[allow(non_snake_case)]
pub fn C_fun<T: Real>(f: &StateVector<T>, g: &StateVector<T>, lambda: T, h: &GroupPoint<T>) -> Result<Complex<T>> {
    pi_point(h, lambda, f)?.pair(g)
}

/// A dense operator on the discretized `L²(ℝⁿ)` at fixed `λ`.
///
/// `matrix` acts on sample vectors directly (`(A u)_j = Σ_k M_{jk} u_k`), so the
/// integral kernel is `Ω(s_j, s_k) = M_{jk} / weight` with `weight = dⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberOperator<T> {
    lambda: T,
    grid: LineGrid<T>,
    matrix: CMatrix<T>,
}

impl<T: Real> FiberOperator<T> {
    pub fn new(lambda: T, grid: LineGrid<T>, matrix: CMatrix<T>) -> Result<Self> {
        if matrix.rows() != grid.len() || matrix.cols() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} matrix on a grid of {} nodes",
                matrix.rows(),
                matrix.cols(),
                grid.len()
            )));
        }
        Ok(Self { lambda, grid, matrix })
    }

    pub fn identity(lambda: T, grid: LineGrid<T>) -> Self {
        let matrix = CMatrix::identity(grid.len());
        Self { lambda, grid, matrix }
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn grid(&self) -> &LineGrid<T> {
        &self.grid
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn weight(&self) -> T {
        self.grid.weight()
    }

    /// Integral kernel samples `Ω = M / weight`.
    pub fn kernel(&self) -> CMatrix<T> {
        self.matrix.scale(Complex::new(T::one() / self.weight(), T::zero()))
    }

    pub fn with_matrix(&self, matrix: CMatrix<T>) -> Result<Self> {
        Self::new(self.lambda, self.grid.clone(), matrix)
    }

    pub fn apply(&self, u: &StateVector<T>) -> Result<StateVector<T>> {
        if !u.grid.same_geometry(&self.grid) {
            return Err(Error::GridMismatch("state and operator grids differ".into()));
        }
        Ok(StateVector { grid: self.grid.clone(), values: self.matrix.matvec(&u.values)? })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !self.grid.same_geometry(&other.grid) {
            return Err(Error::GridMismatch("operator grids differ".into()));
        }
        self.with_matrix(self.matrix.matmul(&other.matrix)?)
    }

    /// Hilbert-space adjoint.
    pub fn adjoint(&self) -> Self {
        Self { lambda: self.lambda, grid: self.grid.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.with_matrix(self.matrix.sub(&other.matrix)?)
    }

    /// `‖A − B‖_HS / ‖B‖_HS`.
    pub fn hs_rel_diff(&self, other: &Self) -> Result<T> {
        Ok(hs_norm(&self.sub(other)?) / hs_norm(other))
    }
}

/// `‖A‖_HS = ‖Ω‖₂`; with `M = Ω·dⁿ` this is the plain Frobenius norm of `M`.
pub fn hs_norm<T: Real>(a: &FiberOperator<T>) -> T {
    a.matrix.frobenius_norm()
}

/// `P_{g,h} u = ⟨u, g⟩ h` with the bilinear pairing.
pub fn rank_one<T: Real>(g: &StateVector<T>, h: &StateVector<T>, lambda: T) -> Result<FiberOperator<T>> {
    g.check(h)?;
    let w = g.grid.weight();
    let m = CMatrix::from_fn(g.grid.len(), g.grid.len(), |j, k| h.values[j] * g.values[k] * w);
    FiberOperator::new(lambda, g.grid.clone(), m)
}

/// Horizontal data of a group-side field at central frequency `λ`:
/// `F(x, y) = ∫ f(x, y, t) e^{2πiλt} dt`, stored `[x-index][y-index]`.
struct CentralSlice<T> {
    n: usize,
    x_axis_grid: Grid<T>,
    y_axis_grid: Grid<T>,
    values: Vec<Complex<T>>,
}

fn central_slice<T: Real>(f: &SampledField<T>, lambda: T) -> Result<CentralSlice<T>> {
    check_lambda(lambda)?;
    let grid = f.grid();
    if f.side() != Side::Group {
        return Err(Error::WrongSide("expected a group-side field".into()));
    }
    let n = grid.group_n().ok_or_else(|| Error::InvalidGrid("expected a grid over ℍⁿ".into()))?;
    let ta = grid.t_axis().ok_or_else(|| Error::InvalidGrid("missing t-axis".into()))?;
    if ta != 2 * n {
        return Err(Error::InvalidGrid("the t-axis must come last".into()));
    }
    let t_axis = grid.axes()[ta];
    let limit = t_axis.dual().half_width;
    if lambda.abs() >= limit {
        return Err(Error::LambdaOutOfBand { lambda: lambda.f64(), limit: limit.f64() });
    }
    let nt = t_axis.count;
    let dt = t_axis.spacing();
    let phases: Vec<Complex<T>> = t_axis.coords().iter().map(|&t| expi2pi(lambda * t).scale(dt)).collect();
    let values: Vec<Complex<T>> = f
        .values()
        .chunks(nt)
        .map(|line| line.iter().zip(&phases).fold(czero(), |a, (v, p)| a + *v * *p))
        .collect();
    Ok(CentralSlice {
        n,
        x_axis_grid: Grid::new(grid.axes()[..n].to_vec())?,
        y_axis_grid: Grid::new(grid.axes()[n..2 * n].to_vec())?,
        values,
    })
}

/// `∫∫ |F(x, y)|² dx dy` with `F` the central slice at `λ` (the right-hand side of the 𝔊 identity).
pub fn slice_energy<T: Real>(f: &SampledField<T>, lambda: T) -> Result<T> {
    let cs = central_slice(f, lambda)?;
    let cell = cs.x_axis_grid.cell_volume() * cs.y_axis_grid.cell_volume();
    Ok(cs.values.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) * cell)
}

/// `Φ_x(s_j) = ∫ F(x, y) e^{2πiσ y·s_j} dy`, stored `[x-index][j]`.
fn phi_table<T: Real>(cs: &CentralSlice<T>, sigma: T, line: &LineGrid<T>) -> Vec<Vec<Complex<T>>> {
    let nx = cs.x_axis_grid.len();
    let ny = cs.y_axis_grid.len();
    let dy = cs.y_axis_grid.cell_volume();
    let ycoords: Vec<Vec<T>> = (0..ny).map(|i| cs.y_axis_grid.coords_of(i)).collect();
    let scoords: Vec<Vec<T>> = (0..line.len()).map(|i| line.coords_of(i)).collect();
    let ph: Vec<Vec<Complex<T>>> = scoords
        .iter()
        .map(|s| {
            ycoords
                .iter()
                .map(|y| expi2pi(sigma * y.iter().zip(s).fold(T::zero(), |a, (p, q)| a + *p * *q)).scale(dy))
                .collect()
        })
        .collect();
    (0..nx)
        .into_par_iter()
        .map(|xi| {
            let row = &cs.values[xi * ny..(xi + 1) * ny];
            ph.iter().map(|p| row.iter().zip(p).fold(czero(), |a, (v, e)| a + *v * *e)).collect()
        })
        .collect()
}

/// `π_f^λ = ∫ f(h) π_h^λ dh` assembled from the closed-form kernel
/// `Ω(s, r) = |λ|^{−n/2} Φ_{x*}(s)`, `x* = sgn(λ)(r − s)/√|λ|`, with `Φ_x`
/// band-limited-interpolated in `x` and taken as zero outside the field's x-box.
pub fn pi_field<T: Real>(f: &SampledField<T>, lambda: T, line: &LineGrid<T>) -> Result<FiberOperator<T>> {
    let cs = central_slice(f, lambda)?;
    check_line(&cs, line)?;
    let n = cs.n;
    let sigma = lambda.abs().sqrt();
    let sgn = lambda.signum();
    let table = phi_table(&cs, sigma, line);
    let xg = &cs.x_axis_grid;
    let nx = xg.len();
    // spectrum of Φ_·(s_j) along the x-axes, for every j
    let xi_grid = xg.dual();
    let ns = line.len();
    let spectra: Vec<Vec<Complex<T>>> = (0..ns)
        .into_par_iter()
        .map(|j| {
            let mut col: Vec<Complex<T>> = (0..nx).map(|x| table[x][j]).collect();
            let mut dft = Dft::new();
            for d in 0..n {
                dft.along(&mut col, &xg.shape(), d, &xg.axes()[d], Sign::Minus);
            }
            col
        })
        .collect();
    let xi_coords: Vec<Vec<T>> = (0..nx).map(|m| xi_grid.coords_of(m)).collect();
    let dxi = xi_grid.cell_volume();
    let half: Vec<T> = xg.axes().iter().map(|a| a.half_width).collect();
    let scale = line.weight() / sigma.powi(n as i32);
    let rows: Vec<Vec<Complex<T>>> = (0..ns)
        .into_par_iter()
        .map(|j| {
            let sj = line.coords_of(j);
            (0..ns)
                .map(|k| {
                    let sk = line.coords_of(k);
                    let xs: Vec<T> = sk.iter().zip(&sj).map(|(r, s)| sgn * (*r - *s) / sigma).collect();
                    if xs.iter().zip(&half).any(|(x, h)| *x < -*h || *x >= *h) {
                        return czero();
                    }
                    let v = spectra[j].iter().zip(&xi_coords).fold(czero::<T>(), |a, (c, xi)| {
                        a + *c * expi2pi(xs.iter().zip(xi).fold(T::zero(), |s, (p, q)| s + *p * *q))
                    });
                    v.scale(dxi * scale)
                })
                .collect()
        })
        .collect();
    FiberOperator::new(lambda, line.clone(), CMatrix::from_vec(ns, ns, rows.concat())?)
}

/// Direct quadrature `π_f^λ = Σ_h f(h) π_h^λ |dh|`, with every `π_h^λ` realized
/// exactly as [`pi_point`] does (phase times FFT shift). Oracle route.
pub fn pi_field_quadrature<T: Real>(
    f: &SampledField<T>,
    lambda: T,
    line: &LineGrid<T>,
) -> Result<FiberOperator<T>> {
    let cs = central_slice(f, lambda)?;
    check_line(&cs, line)?;
    let sigma = lambda.abs().sqrt();
    let sgn = lambda.signum();
    let table = phi_table(&cs, sigma, line);
    let xg = &cs.x_axis_grid;
    let dx = xg.cell_volume();
    let ns = line.len();
    let parts: Vec<CMatrix<T>> = (0..xg.len())
        .into_par_iter()
        .map(|xi| {
            let x = xg.coords_of(xi);
            let a: Vec<T> = x.iter().map(|c| sgn * sigma * *c).collect();
            let s = kron_shift(line, &a);
            CMatrix::from_fn(ns, ns, |j, k| table[xi][j] * s[(j, k)] * dx)
        })
        .collect();
    let mut m = CMatrix::zeros(ns, ns);
    for p in &parts {
        m = m.add(p)?;
    }
    FiberOperator::new(lambda, line.clone(), m)
}

fn check_line<T: Real>(cs: &CentralSlice<T>, line: &LineGrid<T>) -> Result<()> {
    if line.n() != cs.n {
        return Err(Error::DimensionMismatch(format!("field over ℍ^{} with a line grid over ℝ^{}", cs.n, line.n())));
    }
    if line.is_frequency() {
        return Err(Error::WrongSide("operators act on a position-space line grid".into()));
    }
    Ok(())
}

/// `𝔊_f(λ) = |λ|ⁿ ‖π_f^λ‖²_HS`.
pub fn gramian<T: Real>(f: &SampledField<T>, lambda: T, line: &LineGrid<T>) -> Result<T> {
    let a = pi_field(f, lambda, line)?;
    Ok(lambda.abs().powi(line.n() as i32) * hs_norm(&a).powi(2))
}
