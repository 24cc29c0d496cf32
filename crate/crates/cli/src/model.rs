//! `model-invert`: explicit inverses of the comparison models.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::json;
use subelliptic_core::model::{
    adjoint_defect, build_calderon_model, certify_invertibility, model_family, ModelConfig, ModelError, ModelProblem, SectorPair,
    FINITE_RANK_BOUND,
};
use subelliptic_core::symbol::Chirality;
use subelliptic_core::{SpinorError, C64};

use crate::params::in_range;
use crate::{stream, Check, Findings, Params, RunError};

/// Tolerance on exact block identities of the principal-symbol algebra.
pub const BLOCK_TOL: f64 = 1e-12;

struct Settings {
    cfg: ModelConfig,
    samples: usize,
    chiralities: Vec<Chirality>,
}

fn parse(p: &Params) -> Result<Settings, RunError> {
    let n: usize = in_range("n", p.get_or("n", 2)?, 2, 5)?;
    let alpha: f64 = p.get_or("alpha", 1.0)?;
    let beta: f64 = p.get_or("beta", n as f64 - 1.0)?;
    let cutoff: u32 = in_range("cutoff", p.get_or("cutoff", 12)?, 4, 40)?;
    let theta: f64 = p.get_or("theta", 0.0)?;
    let tol: f64 = p.get_or("tol", 1e-9)?;
    let samples = in_range("samples", p.get_or("samples", 100)?, 1, 100_000)?;
    let chiralities = match p.get_or("chirality", "both".to_string())?.as_str() {
        "both" => vec![Chirality::Even, Chirality::Odd],
        "even" => vec![Chirality::Even],
        "odd" => vec![Chirality::Odd],
        other => return Err(RunError::Usage(format!("parameter `chirality` must be even, odd or both, got `{other}`"))),
    };
    p.reject_unknown()?;
    let mut cfg = ModelConfig::kahler(n, cutoff).with_hessian(alpha, beta).with_theta(theta);
    cfg.tol = tol;
    Ok(Settings { cfg, samples, chiralities })
}

fn label(ch: Chirality) -> &'static str {
    match ch {
        Chirality::Even => "even",
        Chirality::Odd => "odd",
    }
}

fn reject_or_usage(f: Findings, e: ModelError) -> Result<Findings, RunError> {
    match e {
        ModelError::Spinor(SpinorError::PairingFloor { .. }) | ModelError::InvalidConfig(_) => Ok(f.reject(e)),
        other => Err(RunError::Usage(other.to_string())),
    }
}

pub(crate) fn run(p: &Params, seed: u64) -> Result<Findings, RunError> {
    let s = parse(p)?;
    let mut f = Findings::default();
    if let Err(e) = s.cfg.validate() {
        return reject_or_usage(f, e);
    }
    f.value("config", &s.cfg);
    for (k, &ch) in s.chiralities.iter().enumerate() {
        if let Err(e) = chirality_checks(ch, &s, &mut stream(seed, k as u64 + 1), &mut f) {
            return reject_or_usage(f, e);
        }
    }
    let defect = match adjoint_defect(&s.cfg) {
        Ok(d) => d,
        Err(e) => return reject_or_usage(f, e),
    };
    let expected = 2.0 * s.cfg.alpha * s.cfg.alpha * s.cfg.beta.abs();
    f.push(
        Check::within("adjoint-defect", "[T^even]* - T^odd is supported on the odd corner with size 2 alpha^2 beta", (defect - expected).abs(), BLOCK_TOL * expected.max(1.0))
            .with_details(json!({ "defect": defect, "expected": expected })),
    );
    Ok(f)
}

fn random_rhs<R: Rng>(rng: &mut R, prob: &ModelProblem) -> SectorPair {
    let (de, d_o) = prob.sector_dims();
    let mut stacked = DVector::<C64>::zeros(de + d_o);
    for pos in prob.rhs_guard_positions() {
        stacked[pos] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    SectorPair { even: stacked.rows(0, de).into_owned(), odd: stacked.rows(de, d_o).into_owned() }
}

fn chirality_checks<R: Rng>(ch: Chirality, s: &Settings, rng: &mut R, f: &mut Findings) -> Result<(), ModelError> {
    let tag = label(ch);
    let name = |what: &str| format!("{tag}-{what}");
    let prob = ModelProblem::new(ch, &s.cfg)?;
    let (de, d_o) = prob.sector_dims();

    let mut residual = 0.0f64;
    for _ in 0..s.samples {
        let rhs = random_rhs(rng, &prob);
        let sol = prob.invert(&rhs)?;
        let image = prob.apply(&sol);
        let diff = SectorPair { even: image.even - &rhs.even, odd: image.odd - &rhs.odd };
        residual = residual.max(diff.norm() / rhs.norm());
    }
    f.push(
        Check::within(name("residual"), "T(u, v) = (a, b) for the explicit solution on guarded right-hand sides", residual, s.cfg.tol)
            .with_details(json!({ "samples": s.samples, "even_dim": de, "odd_dim": d_o })),
    );

    let b = DMatrix::from_fn(d_o, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let (_, v) = prob.invert_columns(&DMatrix::zeros(de, 4), &b);
    f.push(Check::holds(name("v-independent-of-b"), "the v component of the solution depends on a alone", v.iter().all(|z| *z == C64::new(0.0, 0.0))));

    let cert = certify_invertibility(ch, &s.cfg)?;
    f.push(Check::within(name("right-inverse"), "T G = Id on the guard subspace", cert.right_inverse_error, s.cfg.tol));
    f.push(Check::within(name("left-inverse"), "G T = Id on the domain guard subspace", cert.left_inverse_error, s.cfg.tol));
    f.push(
        Check::holds(name("invertible"), "smallest singular value of the guarded model above the rank floor", cert.smallest_singular_value > cert.singular_value_floor)
            .with_details(json!({ "smallest": cert.smallest_singular_value, "floor": cert.singular_value_floor })),
    );
    f.push(Check::holds(name("index-zero"), "index of the guarded comparison model is 0", cert.index == 0));
    let r = &cert.deformation_ranks;
    f.push(
        Check::holds(
            name("deformation-finite-rank"),
            "G_theta - G_0 has finite-rank (1,1), (1,2), (2,1) blocks and vanishing (2,2) block",
            r.uu <= FINITE_RANK_BOUND && r.ub <= FINITE_RANK_BOUND && r.vu <= FINITE_RANK_BOUND && r.vb_max_abs == 0.0,
        )
        .with_details(json!({ "ranks": r, "bound": FINITE_RANK_BOUND })),
    );

    let (space, p, r_op, t) = model_family(ch, &s.cfg)?;
    let q = build_calderon_model(ch, true, &s.cfg)?;
    let assembled = r_op.principal_compose(&p).principal_add(&r_op.complement(&space).principal_compose(&q));
    f.push(Check::within(name("comparison-decomposition"), "T = R P + (Id - R)(Id - P)", assembled.max_block_diff(&t, &space), BLOCK_TOL));
    let sum = p.principal_add(&q);
    let id = subelliptic_core::model::BlockOperator::identity(&space);
    f.push(Check::within(name("calderon-complementary"), "P + (Id - P) = Id with matching orders", sum.max_block_diff(&id, &space), BLOCK_TOL));
    f.push(Check::within(name("boundary-idempotent"), "R^2 = R", r_op.principal_compose(&r_op).max_block_diff(&r_op, &space), BLOCK_TOL));
    Ok(())
}
