//! Runs the full Kato–Rosenblum report on the shipped rank-one benchmark and
//! lists every check.

use std::path::Path;

use scatterkit::models::{build_operator, build_perturbation};
use scatterkit::scenario::ScenarioConfig;
use scatterkit::wave::verify_kato_rosenblum;

fn main() -> scatterkit::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/kr_rank1.json");
    let cfg = ScenarioConfig::load(&path)?;
    let h = build_operator(&cfg.model)?;
    let v = build_perturbation(&cfg.perturbation, h.dim())?;
    let report = verify_kato_rosenblum(&h, &v.operator, &cfg.kr_config())?;
    println!("‖V‖₁ = {:.3}, ‖H₁J − JH‖₁ = {:.3}, rank P = {}", report.perturbation_trace_norm, report.commutator_trace_norm, report.rank_p);
    for c in &report.checks {
        println!("{:<6} {:<36} {:.3e} (tolerance {:.0e})", if c.passed { "ok" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    for flag in &report.flags {
        println!("flag: {flag}");
    }
    println!("passed: {}", report.passed);
    Ok(())
}
