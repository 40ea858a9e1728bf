//! Invariant suites behind `flagcalc identities`.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use flagcalc::grid::Grid;
use flagcalc::group::{dilate, group_inv, group_mul, GroupPoint};
use flagcalc::scalar::expi2pi;
use flagcalc::schrodinger::{
    c_fun, gramian, hs_norm, pi_field, pi_field_quadrature, pi_point, slice_energy, LineGrid, StateVector,
};
use flagcalc::symbolcalc::{kn_quantize, kn_symbol_of, twisted_product, SymbolGrid};
use flagcalc::transform::{convolve, fourier, l2_norm, SampledField};

use crate::config::ExperimentConfig;
use crate::outcome::CliError;

type C = Complex<f64>;

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub seed: u64,
    pub draws: usize,
    pub grid: crate::config::GridSpec,
    pub line: crate::config::LineSpec,
    pub identities: Vec<IdentityResult>,
    pub passed: bool,
}

impl IdentityReport {
    pub fn failures(&self) -> Vec<&str> {
        self.identities.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect()
    }
}

struct Suite {
    out: Vec<IdentityResult>,
}

impl Suite {
    fn record(&mut self, name: &str, err: f64, tol: f64) {
        self.out.push(IdentityResult { name: name.into(), max_error: err, tolerance: tol, pass: err.is_finite() && err <= tol });
    }
}

fn point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> GroupPoint<f64> {
    let mut c = || rng.gen_range(-r..r);
    let x = (0..n).map(|_| c()).collect();
    let y = (0..n).map(|_| c()).collect();
    GroupPoint::new(x, y, c()).expect("finite point")
}

fn heis_gauss(grid: &Grid<f64>, n: usize, tw: f64, shift: f64) -> SampledField<f64> {
    SampledField::from_fn(grid.clone(), |h| {
        let r: f64 = h[..2 * n].iter().enumerate().map(|(i, v)| (v - shift * (i as f64 + 1.0) / 4.0).powi(2)).sum();
        C::new((-PI * (r + (h[2 * n] - shift).powi(2) / (tw * tw))).exp(), 0.0)
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<IdentityReport, CliError> {
    let n = cfg.n;
    let tol = &cfg.tolerances;
    let ls = cfg.line_spec();
    let line = LineGrid::new(n, ls.count, ls.half)?;
    let g = cfg.grid;
    let grid = Grid::heisenberg(n, g.v_count, g.v_half, g.t_count, g.t_half)?;
    let band = grid.axes()[2 * n].dual().half_width;
    let lams: Vec<f64> = [1.0, -1.0, 0.5, -0.75].into_iter().filter(|l: &f64| l.abs() < band).collect();
    if lams.is_empty() {
        return Err(CliError::Config(format!(
            "the t grid resolves |λ| < {band} only; t_count / (4 t_half) must exceed 0.5 for the dictionary identities"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = Suite { out: Vec::new() };

    // group law
    let (mut assoc, mut inv, mut dil) = (0f64, 0f64, 0f64);
    for _ in 0..cfg.draws {
        let (a, b, c) = (point(&mut rng, n, 1.0), point(&mut rng, n, 1.0), point(&mut rng, n, 1.0));
        let l = group_mul(&group_mul(&a, &b)?, &c)?;
        let r = group_mul(&a, &group_mul(&b, &c)?)?;
        assoc = assoc.max(l.max_abs_diff(&r));
        inv = inv.max(group_mul(&a, &group_inv(&a))?.max_abs_diff(&GroupPoint::identity(n)));
        let j = rng.gen_range(0.25..4.0);
        dil = dil.max(dilate(j, &group_mul(&a, &b)?)?.max_abs_diff(&group_mul(&dilate(j, &a)?, &dilate(j, &b)?)?));
    }
    s.record("group.associativity", assoc, tol.group);
    s.record("group.inverse", inv, tol.group);
    s.record("group.dilation_automorphism", dil, tol.group);

    // Schrödinger representation on Gaussian states. Composite translations reach
    // σ|x| ≤ 2 and modulations σ|y| ≤ 2, so the line is fixed rather than taken
    // from the (coarser) fiber grid.
    let fine = LineGrid::new(n, 128, 6.0)?;
    let centre = vec![0.2; n];
    let freq = vec![-0.3; n];
    let u = StateVector::gaussian(fine, &centre, &freq);
    let (mut unit, mut hom) = (0f64, 0f64);
    for _ in 0..cfg.draws {
        let (a, b) = (point(&mut rng, n, 0.5), point(&mut rng, n, 0.5));
        let lam = rng.gen_range(0.25..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        unit = unit.max((pi_point(&a, lam, &u)?.norm() - u.norm()).abs());
        let lhs = pi_point(&a, lam, &pi_point(&b, lam, &u)?)?;
        let rhs = pi_point(&group_mul(&a, &b)?, lam, &u)?;
        hom = hom.max(lhs.sub(&rhs)?.max_abs());
    }
    s.record("representation.unitarity", unit, tol.unitarity);
    s.record("representation.homomorphism", hom, tol.homomorphism);

    // Fourier transform
    let values = (0..grid.len()).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let noise = SampledField::new(grid.clone(), values)?;
    let (a, b) = (l2_norm(&noise), l2_norm(&fourier(&noise)?));
    s.record("transform.plancherel", (a - b).abs() / a, tol.plancherel);
    // e^{−π(|v|² + t²/4)} ↦ 2 e^{−π(|w|² + 4λ²)}
    let gauss = heis_gauss(&grid, n, 2.0, 0.0);
    let gh = fourier(&gauss)?;
    let gerr = gh
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let z = gh.grid().coords_of(i);
            let w2: f64 = z[..2 * n].iter().map(|x| x * x).sum();
            (v - 2.0 * (-PI * (w2 + 4.0 * z[2 * n] * z[2 * n])).exp()).norm()
        })
        .fold(0.0, f64::max);
    s.record("transform.gaussian_closed_form", gerr, tol.gaussian);

    // c_{f,g} and its transform
    let h = StateVector::from_fn(line.clone(), |p| {
        let r2: f64 = p.iter().map(|x| (x + 0.2).powi(2)).sum();
        C::new(1.0, p[0]) * (-PI * 1.5 * r2).exp()
    });
    let u = StateVector::gaussian(line.clone(), &centre, &freq);
    let ch = fourier(&c_fun(&u, &h)?)?;
    let uh = u.fourier()?;
    let nn = line.len();
    let cerr = ch
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let z = ch.grid().coords_of(i);
            let dot: f64 = (0..n).map(|d| z[d] * z[n + d]).sum();
            (v - uh.values()[i / nn] * h.values()[i % nn] * expi2pi(dot)).norm()
        })
        .fold(0.0, f64::max);
    s.record("bilinear.c_transform", cerr, tol.bilinear);

    // integrated representation
    let f = heis_gauss(&grid, n, 1.5, 0.1);
    let (mut route, mut hs, mut gram) = (0f64, 0f64, 0f64);
    for &lam in &lams {
        let a = pi_field(&f, lam, &line)?;
        route = route.max(a.hs_rel_diff(&pi_field_quadrature(&f, lam, &line)?)?);
        hs = hs.max((hs_norm(&a) - kn_symbol_of(&a)?.l2_norm()).abs() / hs_norm(&a));
        let (gv, e) = (gramian(&f, lam, &line)?, slice_energy(&f, lam)?);
        gram = gram.max((gv - e).abs() / e);
    }
    s.record("dictionary.dual_route", route, tol.dual_route);
    s.record("dictionary.hs_symbol", hs, tol.hs_symbol);
    s.record("dictionary.gramian_slice", gram, tol.gramian);

    let f2 = SampledField::from_fn(grid.clone(), |p| {
        let r: f64 = p[..2 * n].iter().enumerate().map(|(i, v)| (v + 0.1 * i as f64).powi(2)).sum();
        C::new((-PI * (r + (p[2 * n] - 0.5).powi(2) / 4.0)).exp(), 0.0)
    });
    let conv = convolve(&f, &f2)?;
    let mut cv = 0f64;
    for &lam in lams.iter().take(2) {
        let lhs = pi_field(&conv, lam, &line)?;
        let rhs = pi_field(&f, lam, &line)?.compose(&pi_field(&f2, lam, &line)?)?;
        cv = cv.max(lhs.hs_rel_diff(&rhs)?);
    }
    s.record("dictionary.convolution", cv, tol.convolution);

    // Kohn–Nirenberg calculus
    let (p1, p2, p3) = (rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.2..0.8));
    let sym = |c: f64| {
        SymbolGrid::from_fn(0.75, line.clone(), move |xi: &[f64], eta: &[f64]| {
            let r: f64 = xi.iter().chain(eta).map(|x| x * x).sum();
            C::new((-r / (2.0 + c)).exp(), c * eta[0] * (-eta[0] * eta[0]).exp())
        })
    };
    let (sa, sb, sc) = (sym(p1)?, sym(p2)?, sym(p3)?);
    let back = kn_symbol_of(&kn_quantize(&sa)?)?;
    s.record("symbol.round_trip", back.sub(&sa)?.max_abs() / sa.max_abs(), tol.symbol_round_trip);
    let l = twisted_product(&twisted_product(&sa, &sb)?, &sc)?;
    let r = twisted_product(&sa, &twisted_product(&sb, &sc)?)?;
    s.record("symbol.twisted_product_associativity", l.sub(&r)?.max_abs() / l.max_abs(), tol.twisted_product);
    let one = SymbolGrid::constant(0.75, line.clone(), C::new(1.0, 0.0))?;
    s.record("symbol.unit", twisted_product(&one, &sa)?.sub(&sa)?.max_abs(), tol.twisted_product);

    let passed = s.out.iter().all(|i| i.pass);
    Ok(IdentityReport { n, seed: cfg.seed, draws: cfg.draws, grid: cfg.grid, line: ls, identities: s.out, passed })
}
