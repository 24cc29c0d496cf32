//! `verify-algebra`: Fock-space and model Dirac operator identities.

use nalgebra::DVector;
use rand::Rng;
use serde_json::json;
use subelliptic_core::fock::IDENTITY_TOL;
use subelliptic_core::{FockSpace, FockSpaceConfig, ModelSpace, TruncatedOperator, C64};

use crate::params::in_range;
use crate::{stream, Check, Findings, Params, RunError};

struct Settings {
    num_vars: usize,
    cutoff: u32,
    guard: u32,
    kernel_cutoff: u32,
    samples: usize,
}

fn parse(p: &Params) -> Result<Settings, RunError> {
    let n: usize = in_range("n", p.get_or("n", 3)?, 2, 5)?;
    let cutoff: u32 = in_range("cutoff", p.get_or("cutoff", 16)?, 2, 40)?;
    let guard: u32 = p.get_or("guard", 2)?;
    let kernel_cutoff: u32 = in_range("kernel-cutoff", p.get_or("kernel-cutoff", cutoff.min(8))?, guard + 2, cutoff)?;
    let samples = in_range("samples", p.get_or("samples", 20)?, 1, 10_000)?;
    p.reject_unknown()?;
    Ok(Settings { num_vars: n - 1, cutoff, guard, kernel_cutoff, samples })
}

pub(crate) fn run(p: &Params, seed: u64) -> Result<Findings, RunError> {
    let s = parse(p)?;
    let mut f = Findings::default();
    let config = match FockSpaceConfig::new(s.num_vars, s.cutoff, s.guard) {
        Ok(c) => c,
        Err(e) => return Ok(f.reject(e)),
    };
    let fock = FockSpace::new(config);
    let m = s.num_vars;
    let guard = fock.guard_mask();
    f.value("fock_dim", fock.dim());
    f.value("guard_dim", guard.iter().filter(|&&g| g).count());

    let c: Vec<TruncatedOperator> = (1..=m).map(|j| fock.creation(j).expect("valid index")).collect();
    let cs: Vec<TruncatedOperator> = (1..=m).map(|j| fock.annihilation(j).expect("valid index")).collect();
    let id = fock.identity();
    let zero = id.scale(C64::new(0.0, 0.0));

    let mut ccr = 0.0f64;
    for j in 0..m {
        for k in 0..m {
            let delta = if j == k { id.scale(C64::new(-2.0, 0.0)) } else { zero.clone() };
            ccr = ccr.max(c[j].commutator(&c[k]).unwrap().max_diff_on_columns(&zero, &guard).unwrap());
            ccr = ccr.max(cs[j].commutator(&cs[k]).unwrap().max_diff_on_columns(&zero, &guard).unwrap());
            ccr = ccr.max(c[j].commutator(&cs[k]).unwrap().max_diff_on_columns(&delta, &guard).unwrap());
        }
    }
    f.push(Check::within("ccr", "[C_j, C_k] = [C_j*, C_k*] = 0, [C_j, C_k*] = -2 delta_jk", ccr, IDENTITY_TOL));

    let h = fock.harmonic_oscillator();
    let shift = id.scale(C64::new(m as f64, 0.0));
    let sum = |first: &[TruncatedOperator], second: &[TruncatedOperator]| {
        first.iter().zip(second).fold(zero.clone(), |acc, (a, b)| acc.add(&a.compose(b).unwrap()).unwrap())
    };
    let lower_first = sum(&cs, &c).sub(&shift).unwrap();
    let raise_first = sum(&c, &cs).add(&shift).unwrap();
    f.push(Check::within(
        "oscillator-annihilation-first",
        "sum C_j* C_j - (n-1) = H0",
        lower_first.max_diff_on_columns(&h, &guard).unwrap(),
        IDENTITY_TOL,
    ));
    f.push(Check::within(
        "oscillator-creation-first",
        "sum C_j C_j* + (n-1) = H0",
        raise_first.max_diff_on_columns(&h, &guard).unwrap(),
        IDENTITY_TOL,
    ));

    let adjoint_exact = c.iter().zip(&cs).all(|(a, b)| a.adjoint().bit_equal(b));
    f.push(Check::holds("creation-adjoint", "C_j* is the conjugate transpose of C_j", adjoint_exact));

    f.push(spectrum_check(&fock, &h));

    let space = ModelSpace::new(config);
    f.value("model_dim", space.dim());
    square_identity(&space, &mut f);
    clifford_relations(&space, &mut f);

    let d_odd = space.dirac_plus_odd();
    let szego = space.vacuum_szego().compose(&d_odd).unwrap().max_abs();
    f.push(Check::holds("szego-compatibility", "pi0 D+^odd = 0", szego == 0.0).with_details(json!({ "max_abs": szego })));

    let d_even = space.dirac_plus_even();
    let transpose_err = d_even.adjoint().sub(&d_odd).unwrap().max_abs();
    let mut rng = stream(seed, 1);
    let even_mask: Vec<bool> = (0..space.dim()).map(|i| space.form_degree(i) % 2 == 0).collect();
    let mut pairing_err = 0.0f64;
    for _ in 0..s.samples {
        let u = random_vector(&mut rng, &even_mask, true);
        let v = random_vector(&mut rng, &even_mask, false);
        let lhs = d_even.apply(&u).dotc(&v);
        let rhs = u.dotc(&d_odd.apply(&v));
        pairing_err = pairing_err.max((lhs - rhs).norm() / (1.0 + lhs.norm()));
    }
    f.push(
        Check::within("chiral-adjointness", "(D+^even)* = D+^odd", transpose_err.max(pairing_err), 1e-14)
            .with_details(json!({ "matrix": transpose_err, "pairing": pairing_err, "samples": s.samples })),
    );

    let kspace = ModelSpace::new(FockSpaceConfig::new(s.num_vars, s.kernel_cutoff, s.guard).expect("validated"));
    let rep = kspace.dirac_kernel_report();
    let ok = rep.even_kernel_dim == 1
        && (rep.even_kernel_vacuum_weight - 1.0).abs() < 1e-10
        && rep.odd_kernel_dim == 0
        && rep.odd_range_vacuum_overlap == 0.0;
    f.push(
        Check::holds("dirac-kernel", "ker D+^even = span(z0), D+^odd injective with range orthogonal to z0", ok)
            .with_details(json!({ "cutoff": s.kernel_cutoff, "report": rep })),
    );
    Ok(f)
}

fn random_vector<R: Rng>(rng: &mut R, even_mask: &[bool], even: bool) -> DVector<C64> {
    DVector::from_iterator(
        even_mask.len(),
        even_mask.iter().map(|&e| if e == even { C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) } else { C64::new(0.0, 0.0) }),
    )
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn spectrum_check(fock: &FockSpace, h: &TruncatedOperator) -> Check {
    let m = fock.config().num_vars;
    let dense = h.to_dense();
    let mut counts = vec![0usize; fock.config().cutoff as usize + 1];
    let mut err = 0.0f64;
    let mut off_diagonal = 0.0f64;
    for (i, k) in fock.basis().iter().enumerate() {
        let d = k.degree() as usize;
        counts[d] += 1;
        err = err.max((dense[(i, i)].re - (2 * d + m) as f64).abs());
        off_diagonal = off_diagonal.max(dense.row(i).iter().enumerate().filter(|(j, _)| *j != i).map(|(_, z)| z.norm()).fold(0.0, f64::max));
    }
    let multiplicities_ok = counts.iter().enumerate().all(|(d, &c)| c == binomial(d + m - 1, m - 1));
    let ok = err == 0.0 && off_diagonal == 0.0 && multiplicities_ok;
    Check::holds("oscillator-spectrum", "spec H0 = {2|k| + n - 1} with graded multiplicities", ok)
        .with_details(json!({ "multiplicities": counts }))
}

fn square_identity(space: &ModelSpace, f: &mut Findings) {
    let m = space.num_vars();
    let d = space.dirac_plus();
    let dd = d.compose(&d).unwrap();
    let mut expected = space.form_number().scale(C64::new(2.0, 0.0));
    for j in 1..=m {
        let cc = space.creation(j).unwrap().compose(&space.annihilation(j).unwrap()).unwrap();
        expected = expected.add(&cc).unwrap();
    }
    let err = dd.max_diff_on_columns(&expected, &space.guard_mask()).unwrap();
    f.push(Check::within("dirac-square", "D+^2 = sum C_j C_j* + sum_q 2q Pi_q", err, IDENTITY_TOL));
}

fn clifford_relations(space: &ModelSpace, f: &mut Findings) {
    let m = space.num_vars();
    let id = space.identity();
    let zero = space.zero();
    let mut err = 0.0f64;
    for j in 1..=m {
        for k in 1..=m {
            let e = space.contract(j).unwrap();
            let eps = space.wedge(k).unwrap();
            let target = if j == k { &id } else { &zero };
            err = err.max(e.anticommutator(&eps).unwrap().sub(target).unwrap().max_abs());
            err = err.max(e.anticommutator(&space.contract(k).unwrap()).unwrap().max_abs());
            err = err.max(eps.anticommutator(&space.wedge(j).unwrap()).unwrap().max_abs());
        }
    }
    let sum_pi = (0..=m).fold(zero.clone(), |acc, q| acc.add(&space.degree_projection(q).unwrap()).unwrap());
    err = err.max(sum_pi.sub(&id).unwrap().max_abs());
    f.push(Check::holds("clifford-relations", "{e_j, eps_k} = delta_jk, {e_j, e_k} = {eps_j, eps_k} = 0, sum Pi_q = Id", err == 0.0));
}
