//! `topo`: exact index formulas from filling descriptors and characteristic
//! numbers. Every quantity that can be computed is reported; any failed
//! integrality or admissibility gate turns the run into a rejection.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use subelliptic_core::topo::{
    change_of_diffeomorphism, coball_descriptor, fio_index_surfaces, glued_double_index, ind_from_c1, ind_from_c2, rind_3d,
    rind_bundle_coefficients, rind_weinstein, seiberg_witten_dim, seiberg_witten_dim_from_numbers, seiberg_witten_dim_reversed,
    FillingDescriptor, SpinCNumbers, TopoError, CDEG_DIM3,
};

use crate::{Check, Findings, Params, RunError};

#[derive(Default)]
struct Gates {
    outcomes: BTreeMap<String, Value>,
    failures: Vec<String>,
}

impl Gates {
    fn eval<T: serde::Serialize>(&mut self, name: &str, r: Result<T, TopoError>, values: &mut Findings) -> Option<T> {
        match r {
            Ok(v) => {
                self.outcomes.insert(name.into(), json!("ok"));
                values.value(name, &v);
                Some(v)
            }
            Err(e) => {
                self.fail(name, e);
                None
            }
        }
    }

    fn admit(&mut self, name: &str, r: Result<(), TopoError>) {
        match r {
            Ok(()) => {
                self.outcomes.insert(name.into(), json!("ok"));
            }
            Err(e) => self.fail(name, e),
        }
    }

    fn fail(&mut self, name: &str, e: TopoError) {
        self.outcomes.insert(name.into(), json!(e.to_string()));
        self.failures.push(format!("{name}: {e}"));
    }
}

fn descriptor(p: &Params, key: &str) -> Result<Option<FillingDescriptor>, RunError> {
    p.get(key)
}

pub(crate) fn run(p: &Params) -> Result<Findings, RunError> {
    let x0 = descriptor(p, "x0")?.ok_or_else(|| RunError::Usage("parameter `x0` is required".into()))?;
    let x1 = descriptor(p, "x1")?.unwrap_or_else(|| x0.clone());
    let numbers: Option<SpinCNumbers> = p.get("numbers")?;
    let ind_glued_given: Option<i64> = p.get("ind-glued")?;
    let cdeg: i64 = p.get_or("cdeg", CDEG_DIM3)?;
    let bterm0: Option<i64> = p.get("bterm0")?;
    let bterm1: Option<i64> = p.get("bterm1")?;
    let base0: Option<i64> = p.get("base0-euler")?;
    let base1: Option<i64> = p.get("base1-euler")?;
    p.reject_unknown()?;

    let mut f = Findings::default();
    let mut g = Gates::default();
    f.value("x0", &x0);
    f.value("x1", &x1);
    f.value("cdeg", cdeg);
    g.admit("x0_valid", x0.validate());
    g.admit("x1_valid", x1.validate());
    f.value("chi_prime_x0", x0.chi_prime());
    f.value("chi_prime_x1", x1.chi_prime());

    let glued = g.eval("glued_double_index", glued_double_index(&x0, &x1), &mut f);
    let r3 = g.eval("rind_3d", rind_3d(&x0, &x1), &mut f);
    let ind_glued = ind_glued_given.or(glued);
    f.value("ind_glued", ind_glued);
    let weinstein = ind_glued.and_then(|ig| g.eval("rind_weinstein", rind_weinstein(ig, &x0, &x1), &mut f));
    if let Some(w) = weinstein {
        f.value("rind_after_diffeomorphism_change", change_of_diffeomorphism(w, cdeg));
    }
    f.value("seiberg_witten_dim", seiberg_witten_dim(x1.euler));
    f.value("seiberg_witten_dim_reversed", seiberg_witten_dim_reversed(x0.euler));

    if let (Some(ig), Some(b0), Some(b1)) = (ind_glued, bterm0, bterm1) {
        f.value("rind_bundle", rind_bundle_coefficients(ig, b0, b1));
    } else if bterm0.is_some() || bterm1.is_some() {
        return Err(RunError::Usage("`bterm0` and `bterm1` must be given together".into()));
    }

    let mut c_pair = (None, None);
    if let Some(nums) = &numbers {
        f.value("numbers", nums);
        g.admit("numbers_consistent", nums.validate());
        if nums.c1_squared.is_some() {
            c_pair.0 = g.eval("ind_from_c1", ind_from_c1(nums), &mut f);
        }
        if nums.c2.is_some() {
            c_pair.1 = g.eval("ind_from_c2", ind_from_c2(nums), &mut f);
        }
        if nums.c1_squared.is_some() && nums.euler.is_some() {
            g.eval("seiberg_witten_dim_from_numbers", seiberg_witten_dim_from_numbers(nums), &mut f);
        }
    }

    match (base0, base1) {
        (Some(b0), Some(b1)) => {
            g.eval("coball_x0", coball_descriptor(b0), &mut f);
            g.eval("coball_x1", coball_descriptor(b1), &mut f);
            g.eval("fio_index", fio_index_surfaces(b0, b1), &mut f);
        }
        (None, None) => {}
        _ => return Err(RunError::Usage("`base0-euler` and `base1-euler` must be given together".into())),
    }

    if let Ok(back) = rind_3d(&x1, &x0) {
        if let Some(r) = r3 {
            f.push(Check::holds("rind-3d-antisymmetry", "Rind(X0, X1) = -Rind(X1, X0)", r == -back));
        }
    }
    if let (Some(r), Some(w), None) = (r3, weinstein, ind_glued_given) {
        if x0.h02 == 0 && x1.h02 == 0 && x0.chi_prime.is_none() && x1.chi_prime.is_none() {
            f.push(Check::holds("weinstein-consistency", "h01 form and chi' form of the relative index agree for surfaces of complex dimension 2", r == w));
        }
    }
    if let (Some(ig), Some(w)) = (ind_glued, weinstein) {
        if x0.stein && x1.stein {
            f.push(Check::holds("stein-coherence", "Stein fillings: Rind = Ind(glued double)", w == ig));
        }
    }
    if let (Some(a), Some(b)) = c_pair {
        f.push(Check::holds("c1-c2-agreement", "(c1^2 - sign)/8 = (2 c2 + sign + chi)/4", a == b));
    }

    f.value("gates", &g.outcomes);
    if !g.failures.is_empty() {
        return Ok(f.reject(g.failures.join("; ")));
    }
    Ok(f)
}
