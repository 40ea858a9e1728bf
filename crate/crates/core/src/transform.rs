//! Sampled fields on periodic grids over `ℍⁿ` (or its dual), the abelian
//! Fourier transform, group convolution realized fiberwise as twisted
//! convolution, the involution `f*`, and λ-band projection.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{apply_along, strides, Axis, Dft, Domain, Grid, Sign};
use crate::scalar::{cis, czero, Real};

/// Which side of the Fourier transform a field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Every axis in position space: `h = (v, t)`.
    Group,
    /// Every axis in frequency space: `ζ = (w, λ)`.
    Dual,
    Mixed,
}

/// Complex samples on a [`Grid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField<T> {
    grid: Grid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SampledField<T> {
    pub fn new(grid: Grid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        let values = vec![czero(); grid.len()];
        Self { grid, values }
    }

    /// Samples `f` at every node; `f` receives the node coordinates in axis order.
    pub fn from_fn<F>(grid: Grid<T>, f: F) -> Self
    where
        F: Fn(&[T]) -> Complex<T> + Sync,
    {
        let values = (0..grid.len()).into_par_iter().map(|i| f(&grid.coords_of(i))).collect();
        Self { grid, values }
    }

    /// Discrete stand-in for `δ₀`: one node at the origin carrying mass one.
    pub fn spike(grid: Grid<T>) -> Self {
        let mut f = Self::zeros(grid);
        let idx: Vec<usize> = f.grid.axes().iter().map(Axis::origin_index).collect();
        let flat = f.grid.ravel(&idx);
        f.values[flat] = Complex::new(T::one() / f.grid.cell_volume(), T::zero());
        f
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn side(&self) -> Side {
        if self.grid.all_in(Domain::Position) {
            Side::Group
        } else if self.grid.all_in(Domain::Frequency) {
            Side::Dual
        } else {
            Side::Mixed
        }
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|v| v * s)
    }

    fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex<T>, Complex<T>) -> Complex<T>,
    {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `‖self − other‖₂ / ‖other‖₂`.
    pub fn rel_l2_diff(&self, other: &Self) -> Result<T> {
        let d = l2_norm(&self.sub(other)?);
        Ok(d / l2_norm(other))
    }
}

fn check_same_grid<T: Real>(a: &Grid<T>, b: &Grid<T>) -> Result<()> {
    if a.same_geometry(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch("fields live on different grids".into()))
    }
}

/// Quadrature-weighted ℓ² norm.
pub fn l2_norm<T: Real>(f: &SampledField<T>) -> T {
    (f.values.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()) * f.grid.cell_volume()).sqrt()
}

fn transform_axes<T: Real>(f: &SampledField<T>, axes: &[usize], from: Domain) -> Result<SampledField<T>> {
    if axes.is_empty() {
        return Err(Error::InvalidArgument("no axes to transform".into()));
    }
    let shape = f.grid.shape();
    let mut grid = f.grid.clone();
    let mut values = f.values.clone();
    let mut dft = Dft::new();
    let sign = if from == Domain::Position { Sign::Minus } else { Sign::Plus };
    let mut seen = vec![false; f.grid.ndim()];
    for &i in axes {
        let axis = *f.grid.axis(i)?;
        if seen[i] {
            return Err(Error::InvalidArgument(format!("axis {i} listed twice")));
        }
        seen[i] = true;
        if axis.domain != from {
            return Err(Error::WrongSide(format!("axis {i} is not in the {from:?} domain")));
        }
        dft.along(&mut values, &shape, i, &axis, sign);
        grid = grid.with_axis(i, axis.dual());
    }
    SampledField::new(grid, values)
}

/// Abelian Fourier transform `f̂(ζ) = ∫ f(h) e^{−2πi h·ζ} dh` of a group-side field.
pub fn fourier<T: Real>(f: &SampledField<T>) -> Result<SampledField<T>> {
    if f.side() != Side::Group {
        return Err(Error::WrongSide("fourier expects a group-side field".into()));
    }
    let axes: Vec<usize> = (0..f.grid.ndim()).collect();
    transform_axes(f, &axes, Domain::Position)
}

/// Inverse of [`fourier`].
pub fn inverse_fourier<T: Real>(f: &SampledField<T>) -> Result<SampledField<T>> {
    if f.side() != Side::Dual {
        return Err(Error::WrongSide("inverse_fourier expects a dual-side field".into()));
    }
    let axes: Vec<usize> = (0..f.grid.ndim()).collect();
    transform_axes(f, &axes, Domain::Frequency)
}

/// Forward transform along the listed (position-domain) axes only.
pub fn partial_fourier<T: Real>(f: &SampledField<T>, axes: &[usize]) -> Result<SampledField<T>> {
    transform_axes(f, axes, Domain::Position)
}

/// Inverse transform along the listed (frequency-domain) axes only.
pub fn inverse_partial_fourier<T: Real>(f: &SampledField<T>, axes: &[usize]) -> Result<SampledField<T>> {
    transform_axes(f, axes, Domain::Frequency)
}

/// Admissible central band `ε ≤ |λ| ≤ 1/ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaWindow<T> {
    eps: T,
}

impl<T: Real> LambdaWindow<T> {
    pub fn new(eps: T) -> Result<Self> {
        if !(eps > T::zero() && eps <= T::one()) {
            return Err(Error::InvalidArgument(format!("window parameter must lie in (0, 1], got {eps}")));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn contains(&self, lambda: T) -> bool {
        let a = lambda.abs();
        a >= self.eps && a <= T::one() / self.eps
    }
}

fn group_t_axis<T: Real>(f: &SampledField<T>) -> Result<usize> {
    if f.side() != Side::Group {
        return Err(Error::WrongSide("expected a group-side field".into()));
    }
    f.grid
        .t_axis()
        .filter(|&t| t == f.grid.ndim() - 1 && f.grid.group_n().is_some())
        .ok_or_else(|| Error::InvalidGrid("expected a grid over ℍⁿ with the t-axis last".into()))
}

/// λ-fibers of a group-side field: `f^λ(v) = ∫ f(v, t) e^{−2πiλt} dt` at every dual t-bin.
#[derive(Debug, Clone)]
pub struct Fibers<T> {
    pub v_grid: Grid<T>,
    pub lambdas: Vec<T>,
    /// `fibers[m]` holds the samples of `f^{λ_m}` on `v_grid`.
    pub fibers: Vec<Vec<Complex<T>>>,
}

pub fn t_fibers<T: Real>(f: &SampledField<T>) -> Result<Fibers<T>> {
    let ta = group_t_axis(f)?;
    let ft = partial_fourier(f, &[ta])?;
    let lam_axis = *ft.grid.axis(ta)?;
    let nl = lam_axis.count;
    let v_grid = Grid::new(f.grid.axes()[..ta].to_vec())?;
    let nv = v_grid.len();
    let mut fibers = vec![vec![czero(); nv]; nl];
    for (i, v) in ft.values.iter().enumerate() {
        fibers[i % nl][i / nl] = *v;
    }
    Ok(Fibers { v_grid, lambdas: lam_axis.coords(), fibers })
}

fn from_fibers<T: Real>(template: &SampledField<T>, fibers: &[Vec<Complex<T>>]) -> Result<SampledField<T>> {
    let ta = group_t_axis(template)?;
    let lam_axis = template.grid.axis(ta)?.dual();
    let nl = lam_axis.count;
    let mut values = vec![czero(); template.grid.len()];
    for (i, v) in values.iter_mut().enumerate() {
        *v = fibers[i % nl][i / nl];
    }
    let dual_grid = template.grid.with_axis(ta, lam_axis);
    inverse_partial_fourier(&SampledField::new(dual_grid, values)?, &[ta])
}

/// Involution `f*(h) = conj f(h⁻¹)`. The shear `t ↦ −t + x·y` is applied on
/// the λ side as the phase `e^{−2πiλ x·y}`, i.e. by band-limited interpolation in `t`.
pub fn star_involution<T: Real>(f: &SampledField<T>) -> Result<SampledField<T>> {
    let fib = t_fibers(f)?;
    let n = fib.v_grid.group_n().ok_or_else(|| Error::InvalidGrid("odd number of v-axes".into()))?;
    let vg = &fib.v_grid;
    let nv = vg.len();
    let mut idx = vec![0; vg.ndim()];
    let mut neg = vec![0; vg.ndim()];
    let mut xy = vec![T::zero(); nv];
    let mut mirror = vec![0usize; nv];
    for p in 0..nv {
        vg.unravel(p, &mut idx);
        for (a, (&k, axis)) in idx.iter().zip(vg.axes()).enumerate() {
            neg[a] = axis.neg_index(k);
        }
        mirror[p] = vg.ravel(&neg);
        let c: Vec<T> = idx.iter().zip(vg.axes()).map(|(&k, a)| a.coord(k)).collect();
        xy[p] = (0..n).fold(T::zero(), |acc, i| acc + c[i] * c[n + i]);
    }
    let out: Vec<Vec<Complex<T>>> = fib
        .lambdas
        .iter()
        .zip(&fib.fibers)
        .map(|(&lam, fv)| (0..nv).map(|p| cis(-T::two_pi() * lam * xy[p]) * fv[mirror[p]].conj()).collect())
        .collect();
    from_fibers(f, &out)
}

/// Twisted convolution on `ℝ^{2n}` at central frequency `λ`:
/// `(f ⋆_λ g)(v) = Σ_{v'} f(v') g(v − v') e^{−2πiλ x'·(y − y')} |dv|`,
/// with displacements taken on the periodic grid.
pub fn twisted_convolve<T: Real>(
    f: &[Complex<T>],
    g: &[Complex<T>],
    lambda: T,
    v_grid: &Grid<T>,
) -> Result<Vec<Complex<T>>> {
    let n = v_grid.group_n().ok_or_else(|| Error::InvalidGrid("twisted convolution needs 2n v-axes".into()))?;
    if f.len() != v_grid.len() || g.len() != v_grid.len() {
        return Err(Error::GridMismatch("fiber length does not match grid".into()));
    }
    let axes = v_grid.axes();
    let x_axes = &axes[..n];
    let y_axes = &axes[n..];
    let x_shape: Vec<usize> = x_axes.iter().map(|a| a.count).collect();
    let y_shape: Vec<usize> = y_axes.iter().map(|a| a.count).collect();
    let nx: usize = x_shape.iter().product();
    let ny: usize = y_shape.iter().product();
    let x_grid = Grid::new(x_axes.to_vec())?;
    let y_grid = Grid::new(y_axes.to_vec())?;
    let cell = v_grid.cell_volume();

    let mut planner = FftPlanner::<T>::new();
    let fwd: Vec<_> = y_shape.iter().map(|&m| planner.plan_fft_forward(m)).collect();
    let inv: Vec<_> = y_shape.iter().map(|&m| planner.plan_fft_inverse(m)).collect();
    let fft_nd = |buf: &mut [Complex<T>], plans: &[std::sync::Arc<dyn rustfft::Fft<T>>]| {
        for (a, p) in plans.iter().enumerate() {
            apply_along(buf, &y_shape, a, |line| p.process(line));
        }
    };

    // y-coordinate of the cyclic displacement index r, wrapped to [−L, L).
    let mut disp_y = vec![T::zero(); ny * n];
    let ys = strides(&y_shape);
    for r in 0..ny {
        for (a, ax) in y_axes.iter().enumerate() {
            let k = (r / ys[a]) % ax.count;
            let centred = (k + ax.count / 2) % ax.count;
            disp_y[r * n + a] = ax.coord(centred);
        }
    }
    // grid index (within y_grid) of the node whose coordinate equals displacement r.
    let disp_node: Vec<usize> = (0..ny)
        .map(|r| {
            let idx: Vec<usize> =
                y_axes.iter().enumerate().map(|(a, ax)| ((r / ys[a]) % ax.count + ax.count / 2) % ax.count).collect();
            y_grid.ravel(&idx)
        })
        .collect();

    let f_hat: Vec<Vec<Complex<T>>> = (0..nx)
        .map(|xp| {
            let mut buf = f[xp * ny..(xp + 1) * ny].to_vec();
            fft_nd(&mut buf, &fwd);
            buf
        })
        .collect();

    // e^{−2πiλ x'·d_r}, per source row x' and displacement r
    let phase: Vec<Complex<T>> = (0..nx)
        .flat_map(|xp| {
            let xc = x_grid.coords_of(xp);
            let disp_y = &disp_y;
            (0..ny).map(move |r| {
                let dot = (0..n).fold(T::zero(), |s, a| s + xc[a] * disp_y[r * n + a]);
                cis(-T::two_pi() * lambda * dot)
            })
        })
        .collect();

    let mut xi = vec![0; n];
    let mut xpi = vec![0; n];
    let mut di = vec![0; n];
    let mut out = vec![czero(); nx * ny];
    let mut acc: Vec<Complex<T>> = vec![czero(); ny];
    let mut b: Vec<Complex<T>> = vec![czero(); ny];
    let scale = cell / T::from_usize_lossy(ny);
    for xo in 0..nx {
        x_grid.unravel(xo, &mut xi);
        acc.iter_mut().for_each(|a| *a = czero());
        for xp in 0..nx {
            x_grid.unravel(xp, &mut xpi);
            for a in 0..n {
                di[a] = x_axes[a].diff_index(xi[a], xpi[a]);
            }
            let gx = x_grid.ravel(&di);
            let ph = &phase[xp * ny..(xp + 1) * ny];
            for r in 0..ny {
                b[r] = g[gx * ny + disp_node[r]] * ph[r];
            }
            fft_nd(&mut b, &fwd);
            for ((a, fh), bh) in acc.iter_mut().zip(&f_hat[xp]).zip(&b) {
                *a += *fh * *bh;
            }
        }
        fft_nd(&mut acc, &inv);
        for (o, a) in out[xo * ny..(xo + 1) * ny].iter_mut().zip(&acc) {
            *o = a.scale(scale);
        }
    }
    Ok(out)
}

/// Group convolution `(f ⋆ g)(h) = ∫ f(h') g(h'⁻¹h) dh'`, computed fiber by
/// fiber: t-transform, twisted convolution at each λ-bin, inverse t-transform.
pub fn convolve<T: Real>(f: &SampledField<T>, g: &SampledField<T>) -> Result<SampledField<T>> {
    check_same_grid(&f.grid, &g.grid)?;
    let ff = t_fibers(f)?;
    let gf = t_fibers(g)?;
    let out: Result<Vec<Vec<Complex<T>>>> = ff
        .lambdas
        .par_iter()
        .zip(ff.fibers.par_iter().zip(gf.fibers.par_iter()))
        .map(|(&lam, (a, b))| {
            // banded inputs leave whole bins empty
            let empty = |v: &[Complex<T>]| v.iter().all(|z| *z == czero());
            if empty(a) || empty(b) {
                Ok(vec![czero(); a.len()])
            } else {
                twisted_convolve(a, b, lam, &ff.v_grid)
            }
        })
        .collect();
    from_fibers(f, &out?)
}

/// Projection onto the band `ε ≤ |λ| ≤ 1/ε` (sharp cut-off on the dual t-bins).
pub fn lambda_filter<T: Real>(f: &SampledField<T>, win: &LambdaWindow<T>) -> Result<SampledField<T>> {
    let mut fib = t_fibers(f)?;
    for (lam, fv) in fib.lambdas.iter().zip(fib.fibers.iter_mut()) {
        if !win.contains(*lam) {
            fv.iter_mut().for_each(|v| *v = czero());
        }
    }
    from_fibers(f, &fib.fibers)
}

/// Energy `∫|f^λ(v)|² dv` per dual t-bin.
pub fn lambda_energy<T: Real>(f: &SampledField<T>) -> Result<Vec<(T, T)>> {
    let fib = t_fibers(f)?;
    let cell = fib.v_grid.cell_volume();
    Ok(fib
        .lambdas
        .iter()
        .zip(&fib.fibers)
        .map(|(&l, fv)| (l, fv.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) * cell))
        .collect())
}
