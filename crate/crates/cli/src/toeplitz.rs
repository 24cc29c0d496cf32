//! `toeplitz`: relative index of the Hardy projection and its conjugate by a
//! character of winding `k`.

use serde_json::json;
use subelliptic_core::fredholm::toeplitz_winding;

use crate::params::in_range;
use crate::{Check, Findings, Params, RunError};

pub(crate) fn run(p: &Params) -> Result<Findings, RunError> {
    let window: usize = in_range("window", p.get_or("window", 64)?, 1, 4096)?;
    let single: Option<i64> = p.get("k")?;
    let (k_min, k_max): (i64, i64) = match single {
        Some(k) => {
            if p.contains("k-min") || p.contains("k-max") {
                return Err(RunError::Usage("`k` cannot be combined with `k-min`/`k-max`".into()));
            }
            (k, k)
        }
        None => (p.get_or("k-min", -5)?, p.get_or("k-max", 5)?),
    };
    p.reject_unknown()?;
    if k_min > k_max {
        return Err(RunError::Usage(format!("k-min = {k_min} exceeds k-max = {k_max}")));
    }
    let mut f = Findings::default();
    let mut reports = Vec::new();
    for k in k_min..=k_max {
        match toeplitz_winding(window, k) {
            Ok(rep) => reports.push(rep),
            Err(e) => return Ok(f.reject(e)),
        }
    }
    let mismatched: Vec<i64> = reports.iter().filter(|r| r.index != r.winding).map(|r| r.winding).collect();
    f.push(
        Check::holds("index-equals-winding", "Rind(S, e^{-ik} S e^{ik}) = k on the window -N..N", mismatched.is_empty())
            .with_details(json!({ "mismatched": mismatched })),
    );
    f.value("window", window);
    f.value("indices", reports.iter().map(|r| json!({ "k": r.winding, "index": r.index, "rank_s": r.rank_s, "rank_r": r.rank_r })).collect::<Vec<_>>());
    if let Some(k) = single {
        f.value("index", reports[0].index);
        f.value("winding", k);
    }
    Ok(f)
}
