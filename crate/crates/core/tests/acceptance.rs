//! Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.
//!
//! Run with `cargo test -p flagcalc --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flagcalc::grid::Grid;
use flagcalc::group::{group_mul, GroupPoint};
use flagcalc::inversion::{
    default_lambda_grid, default_line, invert_flag, lambda_derivative_check, lemma_energy_check, neumann_inverse,
    uniform_invertibility_report, verify_inverse, InversionOptions,
};
use flagcalc::scalar::expi2pi;
use flagcalc::schrodinger::{c_fun, gramian, hs_norm, pi_field, pi_field_quadrature, pi_point, slice_energy};
use flagcalc::schrodinger::{LineGrid, StateVector};
use flagcalc::spectrum::{kernel, realize, Spectrum, Verdict};
use flagcalc::symbolcalc::{fiber_symbol, flag_estimate_report, kn_quantize, kn_symbol_of, EstimateGrid};
use flagcalc::transform::{convolve, fourier, l2_norm, lambda_energy, lambda_filter, LambdaWindow, SampledField};

type C = Complex<f64>;

fn report(n: usize, ok: bool, detail: &str) {
    println!("criterion {n}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
}

fn heis_gauss(grid: &Grid<f64>, tw: f64, shift: [f64; 3]) -> SampledField<f64> {
    SampledField::from_fn(grid.clone(), |h| {
        let r = (h[0] - shift[0]).powi(2) + (h[1] - shift[1]).powi(2);
        C::new((-PI * (r + (h[2] - shift[2]).powi(2) / (tw * tw))).exp(), 0.0)
    })
}

fn random_point(rng: &mut ChaCha8Rng) -> GroupPoint<f64> {
    GroupPoint::new1(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).unwrap()
}

#[test]
fn criterion_1_group_and_representation() {
    let line = LineGrid::new(1, 256, 8.0).unwrap();
    let u = StateVector::gaussian(line, &[0.2], &[-0.3]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut assoc, mut unit, mut hom) = (0f64, 0f64, 0f64);
    for _ in 0..100 {
        let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let lam = rng.gen_range(0.25..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let l = group_mul(&group_mul(&a, &b).unwrap(), &c).unwrap();
        let r = group_mul(&a, &group_mul(&b, &c).unwrap()).unwrap();
        assoc = assoc.max(l.max_abs_diff(&r));
        let pa = pi_point(&a, lam, &u).unwrap();
        unit = unit.max((pa.norm() - u.norm()).abs());
        let lhs = pi_point(&a, lam, &pi_point(&b, lam, &u).unwrap()).unwrap();
        let rhs = pi_point(&group_mul(&a, &b).unwrap(), lam, &u).unwrap();
        hom = hom.max(lhs.sub(&rhs).unwrap().max_abs());
    }
    let ok = assoc <= 1e-12 && unit <= 1e-12 && hom <= 1e-8;
    report(1, ok, &format!("100 draws: associativity {assoc:.1e}, unitarity {unit:.1e}, homomorphism {hom:.1e}"));
    assert!(ok);
}

#[test]
fn criterion_2_fourier_plancherel() {
    let grid = Grid::heisenberg(1, 64, 4.0, 64, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let values = (0..grid.len()).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let noise = SampledField::new(grid.clone(), values).unwrap();
    let smooth = heis_gauss(&grid, 1.5, [0.3, -0.2, 0.5]);
    let mut planch = 0f64;
    for f in [&noise, &smooth] {
        let (a, b) = (l2_norm(f), l2_norm(&fourier(f).unwrap()));
        planch = planch.max((a - b).abs() / a);
    }
    // ∫ e^{−π(|v−c|² + (t−τ)²/tw²)} e^{−2πi(w·v + λt)} = tw·e^{−π(|w|² + tw²λ²)} e^{−2πi(w·c + λτ)}
    let (tw, c) = (1.5, [0.3, -0.2, 0.5]);
    let fh = fourier(&smooth).unwrap();
    let mut gauss = 0f64;
    for (i, v) in fh.values().iter().enumerate() {
        let z = fh.grid().coords_of(i);
        let want = expi2pi(-(z[0] * c[0] + z[1] * c[1] + z[2] * c[2]))
            * (tw * (-PI * (z[0] * z[0] + z[1] * z[1] + tw * tw * z[2] * z[2])).exp());
        gauss = gauss.max((v - want).norm());
    }
    let ok = planch <= 1e-10 && gauss <= 1e-8;
    report(2, ok, &format!("Plancherel rel. {planch:.1e}, Gaussian closed form {gauss:.1e}"));
    assert!(ok);
}

/// `f̂(ξ) = e^{−2πiaξ} e^{−πξ²/p}/√p` for `f(u) = e^{−πp(u−a)²}`.
fn gauss_hat(p: f64, a: f64, xi: f64) -> C {
    expi2pi(-a * xi) * ((-PI * xi * xi / p).exp() / p.sqrt())
}

#[test]
fn criterion_3_bilinear_identities() {
    let line = LineGrid::new(1, 128, 6.0).unwrap();
    let (pf, af, pg, ag) = (1.0, 0.4, 1.5, -0.2);
    let gf = |u: f64| C::new((-PI * pf * (u - af).powi(2)).exp(), 0.0);
    let gg = |u: f64| C::new((-PI * pg * (u - ag).powi(2)).exp(), 0.0);
    let f = StateVector::from_fn(line.clone(), |s| gf(s[0]));
    let g = StateVector::from_fn(line.clone(), |s| gg(s[0]));
    // ĉ_{f,g}(ξ, η) = f̂(ξ) g(η) e^{2πiξη}
    let ch = fourier(&c_fun(&f, &g).unwrap()).unwrap();
    let mut ident = 0f64;
    for (i, v) in ch.values().iter().enumerate() {
        let z = ch.grid().coords_of(i);
        ident = ident.max((v - gauss_hat(pf, af, z[0]) * gg(z[1]) * expi2pi(z[0] * z[1])).norm());
    }
    // transform of c_{f,g}∘δ_{√|λ|} against |λ|^{−1} ĉ_{f,g}(ξ/√|λ|, η/√|λ|)
    let u: Vec<f64> = (0..1024).map(|k| -8.0 + k as f64 / 64.0).collect();
    let du = 1.0 / 64.0;
    let c_at = |x: f64, y: f64| -> C { u.iter().map(|&s| expi2pi(y * s) * gf(s + x) * gg(s)).sum::<C>() * du };
    let hgrid = Grid::horizontal(1, 128, 6.0).unwrap();
    let mut scaling = 0f64;
    for lam in [1.0, -1.0, 4.0, -4.0] {
        let s: f64 = f64::sqrt(f64::abs(lam));
        let dil = SampledField::from_fn(hgrid.clone(), |p| c_at(s * p[0], s * p[1]));
        let dh = fourier(&dil).unwrap();
        for (i, v) in dh.values().iter().enumerate() {
            let z = dh.grid().coords_of(i);
            let (xi, eta) = (z[0] / s, z[1] / s);
            let want = gauss_hat(pf, af, xi) * gg(eta) * expi2pi(xi * eta) / lam.abs();
            scaling = scaling.max((v - want).norm());
        }
    }
    let ok = ident <= 1e-8 && scaling <= 1e-8;
    report(3, ok, &format!("ĉ identity {ident:.1e}, dilation identity over λ ∈ {{±1, ±4}} {scaling:.1e}"));
    assert!(ok);
}

#[test]
fn criterion_4_operator_dictionary() {
    let grid = Grid::heisenberg(1, 128, 4.0, 64, 8.0).unwrap();
    let f = heis_gauss(&grid, 1.5, [0.1, -0.2, 0.3]);
    let line = LineGrid::new(1, 128, 6.0).unwrap();
    let (mut routes, mut hs, mut slice) = (0f64, 0f64, 0f64);
    for lam in [1.0, -1.0, 0.5, -0.75] {
        let a = pi_field(&f, lam, &line).unwrap();
        routes = routes.max(a.hs_rel_diff(&pi_field_quadrature(&f, lam, &line).unwrap()).unwrap());
        let sym = kn_symbol_of(&a).unwrap();
        hs = hs.max((hs_norm(&a) - sym.l2_norm()).abs());
        let (g, e) = (gramian(&f, lam, &line).unwrap(), slice_energy(&f, lam).unwrap());
        slice = slice.max((g - e).abs() / e);
    }
    // Σ_λ 𝔊_f(λ) Δλ over the dual t-bins; the λ = 0 node takes the continuous
    // extension of 𝔊_f, the fiber energy at that bin (as does the Nyquist bin,
    // where the field carries no energy).
    let banded = SampledField::from_fn(grid.clone(), |h| {
        C::new((-PI * (h[0] * h[0] + h[1] * h[1] + h[2] * h[2] / 4.0)).exp(), 0.0) * (2.0 * PI * h[2]).cos()
    });
    let energy = lambda_energy(&banded).unwrap();
    let dl = energy[1].0 - energy[0].0;
    let limit = grid.axes()[2].dual().half_width;
    let total: f64 = energy
        .iter()
        .map(|&(l, e)| if l == 0.0 || l.abs() >= limit { e } else { gramian(&banded, l, &line).unwrap() })
        .sum::<f64>()
        * dl;
    let norm2 = l2_norm(&banded).powi(2);
    let plancherel = (total - norm2).abs() / norm2;
    let ok = routes <= 1e-6 && hs <= 1e-10 && slice <= 1e-6 && plancherel <= 1e-4;
    report(
        4,
        ok,
        &format!(
            "dual-route {routes:.1e}, HS vs symbol L² {hs:.1e}, slice identity {slice:.1e}, ΣGΔλ vs ‖f‖² {plancherel:.1e}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_intertwining() {
    // the twisted phase e^{2πiλx·y'} must stay resolved on the v-grid up to |λ| = 4
    let grid = Grid::heisenberg(1, 256, 5.0, 128, 5.0).unwrap();
    // banded Gaussian: t-profile with transform ∝ λ² e^{−πλ²/4}, cut to 1/4 ≤ |λ| ≤ 4
    let phi = SampledField::from_fn(grid.clone(), |h| {
        let q = 4.0 * PI * h[2] * h[2];
        C::new((-PI * ((h[0] - 0.2).powi(2) + h[1] * h[1])).exp() * (1.0 - 2.0 * q) * (-q).exp(), 0.0)
    });
    let phi = lambda_filter(&phi, &LambdaWindow::new(0.25).unwrap()).unwrap();
    let riesz = kernel("riesz", 1, 0.0).unwrap();
    let kphi = convolve(&realize(&riesz, &grid).unwrap(), &phi).unwrap();
    let line = LineGrid::new(1, 128, 5.0).unwrap();
    // fibers of a sampled field are exact at the dual t-bins: snap the λ grid to them
    let bin = grid.axes()[2].dual().spacing();
    let mut worst = (0f64, 0f64);
    for lam in default_lambda_grid::<f64>(4) {
        let lam = (lam / bin).round() * bin;
        let a = kn_quantize(&fiber_symbol(&riesz, lam, &line).unwrap()).unwrap();
        let lhs = pi_field(&kphi, lam, &line).unwrap();
        let rhs = a.compose(&pi_field(&phi, lam, &line).unwrap()).unwrap();
        let e = lhs.hs_rel_diff(&rhs).unwrap();
        if e > worst.0 {
            worst = (e, lam);
        }
    }
    let ok = worst.0 <= 1e-5;
    report(5, ok, &format!("34 fibers (snapped to t-bins), worst HS-relative {:.1e} at λ = {:.2}", worst.0, worst.1));
    assert!(ok);
}

fn perturbed_identity() -> Arc<dyn Spectrum<f64>> {
    Arc::new(kernel("perturbed-identity", 1, 0.1).unwrap())
}

#[test]
fn criterion_6_inversion_end_to_end() {
    let k = perturbed_identity();
    let line = default_line::<f64>(1).unwrap();
    let lams = default_lambda_grid::<f64>(4);
    let res = invert_flag(k.clone(), &lams, &line, &InversionOptions::default()).unwrap();
    let residual = res.max_residual();
    let riesz = kernel("riesz", 1, 0.0).unwrap();
    let mut neumann = 0f64;
    for fib in res.fibers() {
        let s = fiber_symbol(&riesz, fib.lambda, &line).unwrap();
        let oracle = neumann_inverse(&s, 0.1, 14).unwrap();
        neumann = neumann.max(oracle.symbol.sub(&fib.b).unwrap().max_abs());
    }
    let est = flag_estimate_report(res.spectrum().as_ref(), 3, 2, &res.estimate_grid().unwrap()).unwrap();
    let interior = est.rows.iter().all(|r| r.sup.is_finite() && r.verdict == Verdict::Pass);
    let worst_sup = est.rows.iter().map(|r| r.sup).fold(0.0, f64::max);
    let v = verify_inverse(k.as_ref(), res.spectrum().as_ref(), &lams, &line, &[]).unwrap();
    let ok = residual <= 1e-8 && neumann <= 1e-6 && interior && v.max_left <= 1e-6 && v.max_right <= 1e-6;
    report(
        6,
        ok,
        &format!(
            "fiber residual {residual:.1e}, Neumann oracle {neumann:.1e}, L̂ estimates {:?} (max ratio {worst_sup:.2}), \
             operator residuals {:.1e}/{:.1e}",
            est.verdict(),
            v.max_left,
            v.max_right
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_lambda_derivatives() {
    let k: Arc<dyn Spectrum<f64>> = Arc::new(kernel("perturbed-chirp", 1, 0.1).unwrap());
    let line = LineGrid::new(1, 32, 3.0).unwrap();
    let res = invert_flag(k, &default_lambda_grid(4), &line, &InversionOptions::default()).unwrap();
    let c = lambda_derivative_check(&res, 2, 2).unwrap();
    let finite = c.report.rows.iter().all(|r| r.sup.is_finite());
    let (s1, s2) = (c.max_spread(1), c.max_spread(2));
    let ok = c.max_identity_error <= 1e-3 && finite && s1 < 4.0 && s2 < 4.0;
    report(
        7,
        ok,
        &format!("derivative identity rel. {:.1e}, spread M=1 {s1:.2}, M=2 {s2:.2}", c.max_identity_error),
    );
    assert!(ok);
}

fn random_banded_field(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> SampledField<f64> {
    let (cx, cy) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (wv, wt) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..2.0));
    let (kx, kt) = (rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
    let phase = rng.gen_range(0.0..1.0);
    let f = SampledField::from_fn(grid.clone(), |h| {
        let r = ((h[0] - cx).powi(2) + (h[1] - cy).powi(2)) / (wv * wv);
        expi2pi(kx * h[0] + kt * h[2] + phase) * (-PI * (r + h[2] * h[2] / (wt * wt))).exp()
    });
    lambda_filter(&f, &LambdaWindow::new(0.25).unwrap()).unwrap()
}

#[test]
fn criterion_8_uniform_invertibility() {
    let k = perturbed_identity();
    let line = default_line::<f64>(1).unwrap();
    let lams = default_lambda_grid::<f64>(4);
    let u = uniform_invertibility_report(k.as_ref(), &lams, &line, 0.5).unwrap();
    let grid = Grid::heisenberg(1, 32, 4.0, 256, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fields: Vec<_> = (0..20).map(|_| random_banded_field(&grid, &mut rng)).collect();
    let e = lemma_energy_check(k.as_ref(), &lams, &line, &fields, u.min_sigma).unwrap();
    let ratio = e.rows.iter().filter(|r| r.rhs > 1e-12).map(|r| r.lhs / r.rhs).fold(f64::INFINITY, f64::min);
    let ok = u.min_sigma >= 0.5 && e.holds(1e-8);
    report(
        8,
        ok,
        &format!(
            "min σ_min {:.4} over {} fibers; energy bound on 20 fields × {} fibers, worst slack {:.2e}, \
             min ratio over energetic bins {ratio:.4}",
            u.min_sigma,
            lams.len(),
            lams.len(),
            e.worst_slack
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_9_negative_controls() {
    let abs_w = kernel("abs-w", 1, 0.0).unwrap();
    let est = flag_estimate_report(&abs_w, 2, 0, &EstimateGrid::<f64>::standard(1)).unwrap();
    let worst = est
        .rows_of_order(2)
        .filter(|r| r.lambda.is_none())
        .max_by(|a, b| a.sup.partial_cmp(&b.sup).unwrap())
        .unwrap()
        .clone();
    let near_zero = worst.argmax_w.iter().map(|x| x.abs()).sum::<f64>() < 1e-2;
    let abs_ok = est.verdict() == Verdict::Fail && worst.verdict == Verdict::Fail && near_zero;
    let riesz = kernel("riesz", 1, 0.0).unwrap();
    let line = default_line::<f64>(1).unwrap();
    let lams = default_lambda_grid::<f64>(4);
    let u = uniform_invertibility_report(&riesz, &lams, &line, 0.5).unwrap();
    // the least singular vectors sit at small ‖w‖ = √|λ|·(phase-space radius)
    let small_w = u.rows.iter().filter(|r| r.below_floor).all(|r| r.min_vector_radius < 1.0);
    let riesz_ok = !u.invertible && small_w;
    let ok = abs_ok && riesz_ok;
    report(
        9,
        ok,
        &format!(
            "‖w‖: {:?} at |α|=2 (sup {:.1e} at w = {:?}); riesz: min σ_min {:.3} < 0.5 on {}/{} fibers",
            worst.verdict,
            worst.sup,
            worst.argmax_w,
            u.min_sigma,
            u.rows.iter().filter(|r| r.below_floor).count(),
            u.rows.len()
        ),
    );
    assert!(ok);
}
