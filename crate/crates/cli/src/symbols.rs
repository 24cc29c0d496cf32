//! `verify-symbols`: principal symbol identities, Calderon symbols and the
//! residue computations along the boundary.

use nalgebra::DMatrix;
use rand::Rng;
use serde_json::json;
use subelliptic_core::linalg::{max_abs, singular_values};
use subelliptic_core::symbol::{contour_integral, Chirality, Covector, HessianData, Side, SymbolAlgebra};
use subelliptic_core::C64;

use crate::params::in_range;
use crate::{stream, Check, Findings, Params, RunError};

pub const ALGEBRA_TOL: f64 = 1e-12;
pub const CONTOUR_RTOL: f64 = 1e-8;

const CHIRALITIES: [Chirality; 2] = [Chirality::Even, Chirality::Odd];
const SIDES: [Side; 2] = [Side::Plus, Side::Minus];

struct Settings {
    n: usize,
    samples: usize,
    contour_samples: usize,
}

fn parse(p: &Params) -> Result<Settings, RunError> {
    let n = in_range("n", p.get_or("n", 3)?, 2, 6)?;
    let samples = in_range("samples", p.get_or("samples", 100)?, 1, 100_000)?;
    let contour_samples = in_range("contour-samples", p.get_or("contour-samples", 20)?, 1, 10_000)?;
    p.reject_unknown()?;
    Ok(Settings { n, samples, contour_samples })
}

fn rel_err(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1.0)
}

fn random_boundary<R: Rng>(rng: &mut R, n: usize) -> Covector {
    loop {
        let xi = Covector::boundary(rng.gen_range(-2.0..2.0), (0..2 * (n - 1)).map(|_| rng.gen_range(-2.0..2.0)).collect());
        if xi.prime_norm() > 1e-3 {
            return xi;
        }
    }
}

fn random_hessian<R: Rng>(rng: &mut R, n: usize, normalized: bool) -> HessianData {
    let g = |rng: &mut R| DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let x = g(rng);
    let mut a0 = &x + x.transpose() + DMatrix::identity(n, n) * 3.0;
    let y = g(rng);
    let mut a1 = &y - y.transpose();
    let z = g(rng);
    let w = g(rng);
    if normalized {
        for k in 1..n {
            a0[(k, 0)] = 0.0;
            a0[(0, k)] = 0.0;
            a1[(k, 0)] = 0.0;
            a1[(0, k)] = 0.0;
        }
    }
    HessianData::new(rng.gen_range(0.5..2.0), a0, a1, &z + z.transpose(), &w + w.transpose()).expect("constructed symmetric")
}

pub(crate) fn run(p: &Params, seed: u64) -> Result<Findings, RunError> {
    let s = parse(p)?;
    let mut f = Findings::default();
    let alg = SymbolAlgebra::new(s.n).expect("n >= 2");
    let id = alg.identity();
    f.value("symbol_dim", alg.dim());

    let mut rng = stream(seed, 1);
    let (mut fact, mut sd_adj, mut sd_sq, mut q_inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut idem, mut compl, mut block, mut homog) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut min_sigma = f64::INFINITY;
    for _ in 0..s.samples {
        let xp = random_boundary(&mut rng, s.n);
        let xi = Covector::new(rng.gen_range(-2.0..2.0), xp.xi_contact, xp.xi_perp.clone());
        let half = id.clone() * C64::new(xi.norm_sq() / 2.0, 0.0);
        let de = alg.d1(Chirality::Even, &xi).unwrap().matrix;
        let d_o = alg.d1(Chirality::Odd, &xi).unwrap().matrix;
        fact = fact.max(rel_err(&(&d_o * &de), &half)).max(rel_err(&(&de * &d_o), &half));

        let sd = alg.sd(&xi.xi_perp).unwrap();
        sd_adj = sd_adj.max(max_abs(&(&sd - sd.adjoint())));
        sd_sq = sd_sq.max(rel_err(&(&sd * &sd), &(id.clone() * C64::new(xi.perp_norm_sq(), 0.0))));

        let lambda = rng.gen_range(0.1..10.0);
        for ch in CHIRALITIES {
            let d = alg.d1(ch, &xi).unwrap().matrix;
            let q = alg.q_minus1_at(ch, &xi.natural().into_iter().map(|x| C64::new(x, 0.0)).collect::<Vec<_>>());
            q_inv = q_inv.max(rel_err(&(&q * &d), &id)).max(rel_err(&(&d * &q), &id));

            let pp = alg.calderon_symbol0(ch, Side::Plus, &xp).unwrap().matrix;
            let pm = alg.calderon_symbol0(ch, Side::Minus, &xp).unwrap().matrix;
            idem = idem.max(rel_err(&(&pp * &pp), &pp)).max(rel_err(&(&pm * &pm), &pm));
            compl = compl.max(rel_err(&(&pp + &pm), &id));
            for (side, m) in [(Side::Plus, &pp), (Side::Minus, &pm)] {
                block = block.max(rel_err(&alg.calderon_block_form(ch, side, &xp).unwrap().matrix, m));
            }
            homog = homog.max(rel_err(&alg.calderon_symbol0(ch, Side::Plus, &xp.scaled(lambda)).unwrap().matrix, &pp));

            let t = alg.comparison_symbol0(ch, &xp).unwrap().matrix;
            min_sigma = min_sigma.min(singular_values(&t).last().copied().unwrap_or(0.0));
        }
    }
    let n = s.samples;
    f.push(Check::within("d1-factorization", "d1^odd d1^even = d1^even d1^odd = |xi|^2/2 Id", fact, ALGEBRA_TOL).with_details(json!({ "samples": n })));
    f.push(Check::within("sd-self-adjoint", "sd(xi'') = sd(xi'')*", sd_adj, ALGEBRA_TOL));
    f.push(Check::within("sd-square", "sd(xi'')^2 = |xi''|^2 Id", sd_sq, ALGEBRA_TOL));
    f.push(Check::within("q-minus1-inverts-d1", "q_-1 d1 = d1 q_-1 = Id", q_inv, ALGEBRA_TOL));
    f.push(Check::within("calderon-idempotent", "p0(+/-)^2 = p0(+/-)", idem, ALGEBRA_TOL));
    f.push(Check::within("calderon-complementary", "p0(+) + p0(-) = Id", compl, ALGEBRA_TOL));
    f.push(Check::within("calderon-block-form", "residue form of p0 equals its explicit block form", block, ALGEBRA_TOL));
    f.push(Check::within("calderon-homogeneous", "p0(lambda xi') = p0(xi')", homog, ALGEBRA_TOL));
    f.push(
        Check::holds("comparison-invertible-off-ray", "classical comparison symbol invertible off the positive contact ray", min_sigma > 1e-10)
            .with_details(json!({ "min_singular_value": min_sigma })),
    );
    f.push(contact_ray_check(&alg, &mut stream(seed, 2), s.samples));

    contour_checks(&alg, &mut stream(seed, 3), s.contour_samples, &mut f);
    Ok(f)
}

fn contact_ray_check<R: Rng>(alg: &SymbolAlgebra, rng: &mut R, samples: usize) -> Check {
    let perp = vec![0.0; 2 * (alg.n() - 1)];
    let mut on_ray = 0.0f64;
    let mut opposite = 0.0f64;
    for _ in 0..samples {
        let c: f64 = rng.gen_range(0.1..3.0);
        for ch in CHIRALITIES {
            on_ray = on_ray.max(max_abs(&alg.comparison_symbol0(ch, &Covector::boundary(-c, perp.clone())).unwrap().matrix));
            opposite = opposite.max(max_abs(&(alg.comparison_symbol0(ch, &Covector::boundary(c, perp.clone())).unwrap().matrix - alg.identity())));
        }
    }
    Check::holds("comparison-degenerates-on-ray", "comparison symbol is 0 on the positive contact ray and Id on the negative one", on_ray == 0.0 && opposite == 0.0)
        .with_details(json!({ "on_ray": on_ray, "negative_ray": opposite }))
}

fn contour_checks<R: Rng>(alg: &SymbolAlgebra, rng: &mut R, samples: usize, f: &mut Findings) {
    let n = alg.n();
    let (mut trace_err, mut contact_err, mut minus1_err) = (0.0f64, 0.0f64, 0.0f64);
    let mut max_points = 0usize;
    for k in 0..samples {
        let hess = if k == 0 { HessianData::kahler(n) } else { random_hessian(rng, n, false) };
        let xp = random_boundary(rng, n);
        let r = xp.prime_norm();
        let tr = hess.matrix_a().trace();
        let xc = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let on_line = |x1: C64| {
            let mut v = vec![C64::new(0.0, 0.0); 2 * n];
            v[0] = x1;
            v[n] = C64::new(xc, 0.0);
            v
        };
        let normalized = if k == 0 { hess.clone() } else { random_hessian(rng, n, true) };
        for ch in CHIRALITIES {
            let trace_term = |x1: C64| {
                let mut v: Vec<C64> = xp.natural().into_iter().map(|x| C64::new(x, 0.0)).collect();
                v[0] = x1;
                let norm_sq: C64 = v.iter().map(|x| x * x).sum();
                alg.d1_at(ch.opposite(), &v) * (C64::new(0.0, 2.0 * hess.alpha * tr) * x1 / (norm_sq * norm_sq))
            };
            let closed = alg.trace_term_closed_form(ch, &xp, &hess);
            let contact_closed = alg.contact_line_closed_form(ch, xc, &hess);
            let line_xi = Covector::boundary(xc, vec![0.0; 2 * (n - 1)]);
            for side in SIDES {
                let q = contour_integral(trace_term, side, r).expect("poles off contour");
                max_points = max_points.max(q.points);
                trace_err = trace_err.max(max_abs(&(&q.value - &closed)) / max_abs(&closed));

                let q = contour_integral(|x1| alg.q_minus2_contact_at(ch, &on_line(x1), &hess), side, xc.abs()).expect("poles off contour");
                max_points = max_points.max(q.points);
                contact_err = contact_err.max(max_abs(&(&q.value - &contact_closed)) / max_abs(&contact_closed));

                let q = contour_integral(|x1| alg.q_minus2_contact_at(ch, &on_line(x1), &normalized), side, xc.abs()).expect("poles off contour");
                let composed = q.value * alg.boundary_isomorphism(ch, side).matrix;
                let symbol = alg.calderon_symbol_minus1(ch, side, &line_xi, &normalized).unwrap().matrix;
                minus1_err = minus1_err.max(max_abs(&(&composed - &symbol)) / max_abs(&symbol));
            }
        }
    }
    let details = json!({ "samples": samples, "max_points": max_points });
    f.push(Check::within("contour-trace-term", "(1/2pi) contour of 2i xi1 alpha TrA d1/|xi|^4 = i alpha TrA d_xi1 d1/(2|xi'|)", trace_err, CONTOUR_RTOL).with_details(details.clone()));
    f.push(Check::within("contour-contact-line", "(1/2pi) contour of q_-2^cA on the contact line = -i alpha beta d_xi1 d1/|xi'|", contact_err, CONTOUR_RTOL).with_details(details.clone()));
    f.push(Check::within("calderon-minus1", "p_-1 on the contact line = contour of q_-2^cA composed with the boundary isomorphism", minus1_err, CONTOUR_RTOL).with_details(details));

    let kahler = HessianData::kahler(n);
    let xc: f64 = -1.7;
    let p = alg.calderon_symbol_minus1(Chirality::Even, Side::Plus, &Covector::boundary(xc, vec![0.0; 2 * (n - 1)]), &kahler).unwrap().matrix;
    let expected = alg.identity() * C64::new(-kahler.alpha * kahler.beta() / (2.0 * xc.abs()), 0.0);
    let err = max_abs(&(p - expected));
    let beta_ok = kahler.beta() == (n - 1) as f64;
    f.push(
        Check::within("calderon-minus1-kahler", "Kahler case: alpha = 1, beta = n - 1, p_-1(even, +) = -alpha beta/(2|xi'|) Id", if beta_ok { err } else { f64::INFINITY }, ALGEBRA_TOL)
            .with_details(json!({ "beta": kahler.beta() })),
    );
}
