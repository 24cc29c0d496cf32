//! `relindex`: relative index of projector pairs, either supplied as matrices
//! or drawn at random.

use nalgebra::DMatrix;
use rand::Rng;
use serde_json::json;
use subelliptic_core::fredholm::{
    agranovich_dynin_shadow, logarithmic_property, neumann_continuation, random_finite_rank, random_oblique_projector,
    random_orthogonal_projector, relative_index_kernel, relative_index_trace, FredholmError, Projector, ProjectorPair, ShadowFrame,
    WeightedScale,
};
use subelliptic_core::linalg::{identity, max_abs};
use subelliptic_core::matrix_json;
use subelliptic_core::C64;

use crate::params::in_range;
use crate::{stream, Check, Findings, Params, RunError};

pub const REMAINDER_TOL: f64 = 1e-9;
pub const WEIGHTED_TRACE_TOL: f64 = 1e-8;
pub const NEUMANN_TOL: f64 = 1e-10;

pub(crate) fn run(p: &Params, seed: u64) -> Result<Findings, RunError> {
    if p.contains("p") || p.contains("r") {
        return run_input(p);
    }
    let pairs = in_range("pairs", p.get_or("pairs", 200)?, 1, 100_000)?;
    let max_dim = in_range("max-dim", p.get_or("max-dim", 40)?, 2, 200)?;
    let shadow_pairs = in_range("shadow-pairs", p.get_or("shadow-pairs", 50)?, 0, 100_000)?;
    p.reject_unknown()?;
    let mut f = Findings::default();
    random_pairs(&mut stream(seed, 1), pairs, max_dim, &mut f);
    shadow(&mut stream(seed, 2), seed, shadow_pairs, &mut f);
    neumann(&mut stream(seed, 3), &mut f);
    Ok(f)
}

fn matrix_param(p: &Params, key: &str) -> Result<Option<DMatrix<C64>>, RunError> {
    match p.get::<serde_json::Value>(key)? {
        None => Ok(None),
        Some(v) => matrix_json::from_json(&v).map(Some).map_err(|e| RunError::Usage(format!("parameter `{key}`: {e}"))),
    }
}

fn run_input(p: &Params) -> Result<Findings, RunError> {
    let pm = matrix_param(p, "p")?.ok_or_else(|| RunError::Usage("parameter `p` is required with `r`".into()))?;
    let rm = matrix_param(p, "r")?.ok_or_else(|| RunError::Usage("parameter `r` is required with `p`".into()))?;
    let pert = matrix_param(p, "perturbation")?;
    p.reject_unknown()?;
    let f = Findings::default();
    match input_checks(pm, rm, pert.as_ref()) {
        Ok(found) => Ok(found),
        Err(e) => Ok(f.reject(e)),
    }
}

fn input_checks(pm: DMatrix<C64>, rm: DMatrix<C64>, pert: Option<&DMatrix<C64>>) -> Result<Findings, FredholmError> {
    let mut f = Findings::default();
    let p = Projector::new(pm)?;
    let r = Projector::new(rm)?;
    let ki = relative_index_kernel(&p, &r)?;
    let back = relative_index_kernel(&r, &p)?;
    let complements = relative_index_kernel(&p.complement(), &r.complement())?;
    let pair = ProjectorPair::new(p.clone(), r.clone(), pert)?;
    let tr = relative_index_trace(&pair)?;
    f.value("kernel", &ki);
    f.value("trace", &tr);
    f.value("rind", ki.index);
    f.push(
        Check::holds("kernel-equals-trace", "dim ker - dim coker of RP equals Tr(P K2 P) - Tr(R K1 R)", ki.index == tr.index)
            .with_details(json!({ "kernel_index": ki.index, "trace_index": tr.index, "raw": tr.raw })),
    );
    f.push(Check::holds("antisymmetry", "Rind(P, R) = -Rind(I - P, I - R) = -Rind(R, P)", ki.index == -complements.index && ki.index == -back.index));
    f.push(Check::within("remainder-identities", "T K2 = K1 T for K1 = I - TU, K2 = I - UT", intertwining_defect(&pair), REMAINDER_TOL));
    Ok(f)
}

fn intertwining_defect(pair: &ProjectorPair) -> f64 {
    let c = &pair.comparison;
    let scale = max_abs(&c.t).max(1.0) * max_abs(&c.u).max(1.0);
    max_abs(&(&c.t * &c.k2 - &c.k1 * &c.t)) / scale
}

fn random_projector<R: Rng>(rng: &mut R, dim: usize) -> Projector {
    let rank = rng.gen_range(0..=dim);
    if rng.gen_bool(0.5) {
        random_orthogonal_projector(rng, dim, rank)
    } else {
        random_oblique_projector(rng, dim, rank)
    }
}

#[derive(Default)]
struct Tally {
    cases: usize,
    failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, case: usize, ok: Result<bool, FredholmError>) {
        self.cases += 1;
        match ok {
            Ok(true) => {}
            Ok(false) => self.failures.push(format!("case {case}")),
            Err(e) => self.failures.push(format!("case {case}: {e}")),
        }
    }

    fn check(self, name: &str, anchor: &str) -> Check {
        let ok = self.failures.is_empty();
        let first: Vec<&String> = self.failures.iter().take(5).collect();
        Check::holds(name, anchor, ok).with_details(json!({ "cases": self.cases, "failures": self.failures.len(), "first_failures": first }))
    }
}

fn random_pairs<R: Rng>(rng: &mut R, pairs: usize, max_dim: usize, f: &mut Findings) {
    let mut agree = Tally::default();
    let mut antisym = Tally::default();
    let mut log = Tally::default();
    let mut independent = Tally::default();
    let mut remainder = 0.0f64;
    let mut weighted = Tally::default();
    let mut weighted_raw = 0.0f64;
    let mut indices = Vec::with_capacity(pairs);
    for case in 0..pairs {
        let dim = rng.gen_range(2..=max_dim);
        let p = random_projector(rng, dim);
        let r = random_projector(rng, dim);
        let q = random_projector(rng, dim);
        let expected = p.rank() as i64 - r.rank() as i64;
        let pert_rank = rng.gen_range(1..=3.min(dim));
        let pert = random_finite_rank(rng, dim, pert_rank) * C64::new(0.1, 0.0);
        let weights = WeightedScale::new((0..dim).map(|_| rng.gen_range(1.0..10.0)).collect()).expect("weights >= 1");

        let outcome = (|| -> Result<_, FredholmError> {
            let ki = relative_index_kernel(&p, &r)?;
            let plain = ProjectorPair::new(p.clone(), r.clone(), None)?;
            let perturbed = ProjectorPair::new(p.clone(), r.clone(), Some(&pert))?;
            let t_plain = relative_index_trace(&plain)?;
            let t_pert = relative_index_trace(&perturbed)?;
            Ok((ki, plain, perturbed, t_plain, t_pert))
        })();
        match outcome {
            Ok((ki, plain, perturbed, t_plain, t_pert)) => {
                indices.push(ki.index);
                agree.record(case, Ok(ki.index == t_plain.index && ki.index == expected));
                independent.record(case, Ok(t_pert.index == t_plain.index));
                remainder = remainder.max(intertwining_defect(&plain)).max(intertwining_defect(&perturbed));
                let conj = |q: &Projector| Projector::new(weights.conjugate(q.matrix()));
                let w = conj(&p).and_then(|pw| {
                    let rw = conj(&r)?;
                    let k = relative_index_kernel(&pw, &rw)?;
                    let t = relative_index_trace(&ProjectorPair::new(pw, rw, None)?)?;
                    weighted_raw = weighted_raw.max((t.raw - t_plain.raw).abs());
                    Ok(k.index == ki.index && t.index == ki.index)
                });
                weighted.record(case, w);
            }
            Err(e) => {
                agree.record(case, Err(e.clone()));
                weighted.record(case, Err(e.clone()));
                independent.record(case, Err(e));
            }
        }
        antisym.record(case, (|| {
            let forward = relative_index_kernel(&p, &r)?.index;
            let complements = relative_index_kernel(&p.complement(), &r.complement())?.index;
            let swapped = relative_index_kernel(&r, &p)?.index;
            Ok(forward == -complements && forward == -swapped)
        })());
        log.record(case, logarithmic_property(&p, &q, &r).map(|rep| rep.holds));
    }
    f.value("index_range", json!([indices.iter().min(), indices.iter().max()]));
    f.push(agree.check("kernel-trace-rank", "kernel index = trace index = rank P - rank R"));
    f.push(antisym.check("antisymmetry", "Rind(P, R) = -Rind(I - P, I - R) = -Rind(R, P)"));
    f.push(log.check("logarithmic-property", "Ind(RQP) = Rind(P, Q) + Rind(Q, R)"));
    f.push(independent.check("parametrix-independence", "trace index unchanged by finite-rank changes of the parametrix"));
    f.push(Check::within("remainder-identities", "T K2 = K1 T for K1 = I - TU, K2 = I - UT", remainder, REMAINDER_TOL));
    let mut wc = weighted.check("weighted-trace-invariance", "kernel and trace indices unchanged in the weighted norms");
    let ok = wc.passed() && weighted_raw <= WEIGHTED_TRACE_TOL;
    wc.status = if ok { crate::Status::Pass } else { crate::Status::Fail };
    wc.details["raw_trace_drift"] = json!(weighted_raw);
    f.push(wc);
}

fn shadow<R: Rng>(rng: &mut R, seed: u64, pairs: usize, f: &mut Findings) {
    let mut tally = Tally::default();
    for case in 0..pairs {
        let h = rng.gen_range(1..=8);
        let s1 = random_projector(rng, h);
        let s2 = random_projector(rng, h);
        let frame = ShadowFrame::default();
        tally.record(case, agranovich_dynin_shadow(&s1, &s2, frame, seed.wrapping_add(case as u64)).map(|rep| rep.holds));
    }
    f.push(tally.check("agranovich-dynin-shadow", "Rind(P, R2) - Rind(P, R1) = Rind(s1, s2) = rank s1 - rank s2"));
}

fn neumann<R: Rng>(rng: &mut R, f: &mut Findings) {
    let dim = 12;
    let b = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let b = &b / C64::new(max_abs(&b) * dim as f64, 0.0);
    let family = |tau: f64| identity(dim) + &b * C64::new(tau, 0.0);
    let mut err = 0.0f64;
    let mut ok = true;
    let mut steps = Vec::new();
    for tau in [0.1, 0.25, 0.4] {
        match neumann_continuation(family, 0.0, tau, NEUMANN_TOL) {
            Ok(res) => {
                let direct = family(tau).try_inverse().expect("small perturbation of the identity");
                err = err.max(max_abs(&(res.inverse - direct)));
                steps.push(json!({ "tau": tau, "terms": res.terms, "smallness": res.smallness }));
            }
            Err(_) => ok = false,
        }
    }
    let far = neumann_continuation(family, 0.0, 50.0, NEUMANN_TOL);
    let retry_ok = match far {
        Err(FredholmError::Smallness { suggested_step, .. }) => neumann_continuation(family, 0.0, suggested_step, NEUMANN_TOL).is_ok(),
        _ => false,
    };
    f.push(
        Check::holds("neumann-continuation", "Neumann series inverts A(tau) within its radius and refuses larger steps", ok && retry_ok && err <= 10.0 * NEUMANN_TOL)
            .with_details(json!({ "max_error": err, "steps": steps, "large_step_refused": retry_ok })),
    );
}
