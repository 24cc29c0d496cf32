//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use subelliptic_cli::{run, Report, RunRequest, Subcommand};
use subelliptic_core::fredholm::{
    agranovich_dynin_shadow, logarithmic_property, random_orthogonal_projector, relative_index_kernel, relative_index_trace,
    ProjectorPair, ShadowFrame,
};
use subelliptic_core::topo::{
    coball_descriptor, fio_index_surfaces, ind_from_c1, ind_from_c2, rind_3d, seiberg_witten_dim, seiberg_witten_dim_reversed,
    FillingDescriptor, SpinCNumbers, TopoError,
};

const OPERATOR_TOL: f64 = 1e-12;
const MODEL_RESIDUAL_TOL: f64 = 1e-9;
const MODEL_RANK_BOUND: u64 = 4;
const SYMBOL_TOL: f64 = 1e-12;
const CONTOUR_RTOL: f64 = 1e-8;

const ALGEBRA_LIMIT: Duration = Duration::from_secs(10);
const MODEL_LIMIT: Duration = Duration::from_secs(60);
const RELINDEX_LIMIT: Duration = Duration::from_secs(30);
const TOPO_LIMIT: Duration = Duration::from_secs(1);

struct Outcome {
    ok: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.ok = false;
            self.notes.push(what.into());
        }
    }

    fn within_time(&mut self, start: Instant, limit: Duration) {
        let took = start.elapsed();
        self.notes.push(format!("{:.2}s", took.as_secs_f64()));
        if took > limit {
            self.ok = false;
            self.notes.push(format!("exceeds {}s", limit.as_secs()));
        }
    }
}

fn report(req: RunRequest) -> Report {
    run(&req).unwrap_or_else(|e| panic!("{}: {e}", req.subcommand))
}

fn max_error(rep: &Report, name: &str) -> f64 {
    rep.check(name).and_then(|c| c.max_error).unwrap_or(f64::INFINITY)
}

fn passed(rep: &Report, name: &str) -> bool {
    rep.check(name).is_some_and(|c| c.passed())
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for n in [2, 3, 4] {
        let rep = report(RunRequest::new(Subcommand::VerifyAlgebra, 7).param("n", n).param("cutoff", 16).param("guard", 2));
        for name in ["ccr", "oscillator-annihilation-first", "oscillator-creation-first", "dirac-square"] {
            let e = max_error(&rep, name);
            o.require(e <= OPERATOR_TOL, format!("n={n} {name} {e:e}"));
        }
        o.require(passed(&rep, "szego-compatibility"), format!("n={n} szego-compatibility"));
    }
    o.within_time(start, ALGEBRA_LIMIT);
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for n in [2usize, 3] {
        for (alpha, beta) in [(1.0, n as f64 - 1.0), (0.7, 1.3)] {
            for theta in [0.0, 0.3] {
                let rep = report(
                    RunRequest::new(Subcommand::ModelInvert, 11)
                        .param("n", n)
                        .param("alpha", alpha)
                        .param("beta", beta)
                        .param("theta", theta)
                        .param("cutoff", 12)
                        .param("samples", 100),
                );
                let tag = format!("n={n} a={alpha} b={beta} t={theta}");
                for ch in ["even", "odd"] {
                    let e = max_error(&rep, &format!("{ch}-residual"));
                    o.require(e <= MODEL_RESIDUAL_TOL, format!("{tag} {ch} residual {e:e}"));
                    let ranks = rep.check(&format!("{ch}-deformation-finite-rank")).map(|c| c.details["ranks"].clone()).unwrap_or(Value::Null);
                    let small = ["uu", "ub", "vu"].iter().all(|k| ranks[*k].as_u64().is_some_and(|r| r <= MODEL_RANK_BOUND));
                    o.require(small && ranks["vb_max_abs"].as_f64() == Some(0.0), format!("{tag} {ch} ranks {ranks}"));
                }
            }
        }
    }
    o.within_time(start, MODEL_LIMIT);
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    for n in [2, 3] {
        let rep = report(RunRequest::new(Subcommand::VerifySymbols, 5).param("n", n).param("samples", 100));
        for name in ["d1-factorization", "sd-self-adjoint", "sd-square", "calderon-idempotent", "calderon-complementary", "calderon-block-form"] {
            let e = max_error(&rep, name);
            o.require(e <= SYMBOL_TOL, format!("n={n} {name} {e:e}"));
        }
        o.require(passed(&rep, "comparison-invertible-off-ray"), format!("n={n} off-ray invertibility"));
        o.require(passed(&rep, "comparison-degenerates-on-ray"), format!("n={n} on-ray degeneration"));
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    for n in [2, 3] {
        let rep = report(RunRequest::new(Subcommand::VerifySymbols, 5).param("n", n).param("samples", 1).param("contour-samples", 20));
        for name in ["contour-trace-term", "contour-contact-line"] {
            let e = max_error(&rep, name);
            o.require(e <= CONTOUR_RTOL, format!("n={n} {name} {e:e}"));
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let rep = report(RunRequest::new(Subcommand::Relindex, 3).param("pairs", 200).param("max-dim", 40).param("shadow-pairs", 0));
    for name in ["kernel-trace-rank", "antisymmetry", "logarithmic-property", "parametrix-independence"] {
        let cases = rep.check(name).and_then(|c| c.details["cases"].as_u64()).unwrap_or(0);
        o.require(passed(&rep, name) && cases >= 200, format!("{name} ({cases} cases)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let p = random_orthogonal_projector(&mut rng, 20, 7);
    let r = random_orthogonal_projector(&mut rng, 20, 4);
    let k = relative_index_kernel(&p, &r).map(|k| k.index);
    let t = ProjectorPair::new(p, r, None).and_then(|pair| relative_index_trace(&pair)).map(|t| t.index);
    o.require(k == Ok(3) && t == Ok(3), format!("ranks (7, 4): kernel {k:?}, trace {t:?}"));
    let p = random_orthogonal_projector(&mut rng, 24, 9);
    let q = random_orthogonal_projector(&mut rng, 24, 6);
    let r = random_orthogonal_projector(&mut rng, 24, 2);
    let log = logarithmic_property(&p, &q, &r).map(|l| (l.composite_index, l.rind_pq, l.rind_qr));
    o.require(log == Ok((7, 3, 4)), format!("ranks (9, 6, 2): {log:?}"));
    o.within_time(start, RELINDEX_LIMIT);
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let rep = report(RunRequest::new(Subcommand::Toeplitz, 0).param("window", 64).param("k-min", -5).param("k-max", 5));
    let entries = rep.values["indices"].as_array().cloned().unwrap_or_default();
    o.require(entries.len() == 11, format!("{} windings reported", entries.len()));
    for (k, e) in (-5i64..=5).zip(&entries) {
        o.require(e["k"].as_i64() == Some(k) && e["index"].as_i64() == Some(k), format!("k={k}: {e}"));
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let rep = report(RunRequest::new(Subcommand::Relindex, 4).param("pairs", 1).param("shadow-pairs", 50));
    let cases = rep.check("agranovich-dynin-shadow").and_then(|c| c.details["cases"].as_u64()).unwrap_or(0);
    o.require(passed(&rep, "agranovich-dynin-shadow") && cases == 50, format!("shadow check over {cases} pairs"));
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let s1 = random_orthogonal_projector(&mut rng, 8, 5);
    let s2 = random_orthogonal_projector(&mut rng, 8, 2);
    let rep = agranovich_dynin_shadow(&s1, &s2, ShadowFrame::default(), 70).map(|r| (r.difference, r.boundary_rind));
    o.require(rep == Ok((3, 3)), format!("ranks (5, 2): {rep:?}"));
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    for x in [FillingDescriptor::stein(1, 2), FillingDescriptor::new(-3, 7, 2), FillingDescriptor::new(0, 0, 1)] {
        o.require(rind_3d(&x, &x) == Ok(0), format!("rind_3d(x, x) for {x:?}"));
    }
    let rep = report(RunRequest::new(Subcommand::Topo, 0).param("x0", serde_json::json!({"signature": 1, "euler": 2, "stein": true})));
    o.require(rep.values["rind_3d"] == 0, "topo x0 = x1 report");
    o.require(seiberg_witten_dim(2) == -2 && seiberg_witten_dim(0) == 0 && seiberg_witten_dim_reversed(4) == -4, "d_SW = -chi");
    for (chi, sign) in [(2, 1), (0, 0), (-2, -1)] {
        let d = coball_descriptor(chi);
        o.require(d.as_ref().is_ok_and(|d| d.euler == chi && d.signature == sign && d.stein && d.h01 == 0 && d.chi_prime() == 0), format!("coball {chi}: {d:?}"));
    }
    for chi in [2, 0, -2, -4, -10] {
        o.require(fio_index_surfaces(chi, chi) == Ok(0), format!("fio index ({chi}, {chi})"));
    }
    o.require(matches!(fio_index_surfaces(2, 0), Err(TopoError::InadmissibleDiffeomorphism(2, 0))), "fio (2, 0) rejected");

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k: i64 = rng.gen_range(-50..=50);
        let s: i64 = rng.gen_range(-40..=40);
        let e: i64 = rng.gen_range(-40..=40) * 2 + s.rem_euclid(2);
        let c1 = 8 * k + s;
        let c2 = 2 * k - (s + e) / 2;
        let nums = SpinCNumbers::new(c1, c2, s, e);
        if nums.validate().is_err() || ind_from_c1(&nums) != Ok(k) || ind_from_c2(&nums) != Ok(k) {
            mismatches += 1;
        }
    }
    o.require(mismatches == 0, format!("{mismatches} of 1000 characteristic-number samples disagree"));

    let gate = |r: Result<i64, TopoError>| matches!(r, Err(TopoError::IntegralityViolation { .. }));
    let r = rind_3d(&FillingDescriptor::new(1, 2, 0), &FillingDescriptor::new(0, 0, 0));
    o.require(matches!(r, Err(TopoError::IntegralityViolation { residue: 3, denominator: 4, .. })), format!("sign (1, 0), chi (2, 0): {r:?}"));
    let c1_bad = SpinCNumbers { c1_squared: Some(10), signature: Some(1), ..Default::default() };
    o.require(gate(ind_from_c1(&c1_bad)), "c1^2 = 10, sign = 1");
    let c2_bad = SpinCNumbers { c2: Some(1), signature: Some(0), euler: Some(1), ..Default::default() };
    o.require(gate(ind_from_c2(&c2_bad)), "c2 = 1, sign = 0, chi = 1");
    o.within_time(start, TOPO_LIMIT);
    o
}

fn cli_runs() -> Vec<Vec<&'static str>> {
    vec![
        vec!["verify-algebra", "--n", "3", "--cutoff", "12", "--seed", "7"],
        vec!["verify-symbols", "--n", "3", "--samples", "20", "--seed", "5"],
        vec!["model-invert", "--n", "2", "--alpha", "0.7", "--beta", "1.3", "--theta", "0.3", "--seed", "11"],
        vec!["relindex", "--pairs", "40", "--shadow-pairs", "10", "--seed", "3"],
        vec!["toeplitz", "--window", "64", "--k", "3"],
        vec!["topo", "--x0", r#"{"signature":1,"euler":4}"#, "--x1", r#"{"signature":-1,"euler":2}"#],
    ]
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let bin = env!("CARGO_BIN_EXE_subelliptic");
    for args in cli_runs() {
        let once = || Command::new(bin).args(&args).output().expect("binary runs");
        let (a, b) = (once(), once());
        o.require(a.status.code() == Some(0), format!("{} exit {:?}", args[0], a.status.code()));
        o.require(!a.stdout.is_empty() && a.stdout == b.stdout, format!("{} output differs between runs", args[0]));
    }
    o
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 operator identities", criterion_1),
        ("2 model inverse formulas", criterion_2),
        ("3 symbol identities", criterion_3),
        ("4 contour integrals", criterion_4),
        ("5 relative index agreement", criterion_5),
        ("6 Toeplitz winding", criterion_6),
        ("7 Agranovich-Dynin shadow", criterion_7),
        ("8 topological calculator", criterion_8),
        ("9 determinism", criterion_9),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for (name, check) in criteria {
        let o = check();
        let status = if o.ok { "PASS" } else { "FAIL" };
        writeln!(out, "{status} criterion {name} {}", o.notes.join("; ")).unwrap();
        if !o.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
