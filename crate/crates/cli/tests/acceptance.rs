//! Acceptance criteria 1–9, one PASS/FAIL line each.
//!
//! Runs the suites in-process with the default configuration and checks
//! every defect against its pinned tolerance plus the runtime budget.

use heis_core::config::RunConfig;
use heis_core::verify::suites::{run_suite, Suite};
use heis_core::verify::DefectReport;
use std::process::{Command, ExitCode};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn class(r: &DefectReport) -> &str {
    r.metadata.get("class").and_then(|v| v.as_str()).unwrap_or("")
}

/// Runs a suite and checks the selected reports plus a runtime budget.
fn suite_criterion(suite: Suite, budget_s: f64, select: impl Fn(&DefectReport) -> bool, expect: &[&str]) -> Outcome {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let reports = match run_suite(suite, &cfg) {
        Ok(r) => r,
        Err(e) => return Outcome { pass: false, detail: format!("suite error: {e}") },
    };
    let elapsed = start.elapsed().as_secs_f64();
    let chosen: Vec<&DefectReport> = reports.iter().filter(|r| select(r)).collect();
    let failed: Vec<String> = chosen
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}={:.2e}>{:.1e}", r.name, r.value, r.tolerance))
        .collect();
    let missing: Vec<&str> = expect.iter().copied().filter(|n| !reports.iter().any(|r| r.name == *n)).collect();
    let worst = chosen
        .iter()
        .filter(|r| r.tolerance > 0.0)
        .map(|r| (r.value / r.tolerance, r.name.as_str()))
        .fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
    let pass = failed.is_empty() && missing.is_empty() && elapsed < budget_s && !chosen.is_empty();
    let mut detail = format!(
        "{} checks, worst {} at {:.2e} of tolerance, {:.2}s of {}s",
        chosen.len(),
        worst.1,
        worst.0,
        elapsed,
        budget_s
    );
    if !failed.is_empty() {
        detail.push_str(&format!("; failed: {}", failed.join(", ")));
    }
    if !missing.is_empty() {
        detail.push_str(&format!("; missing: {}", missing.join(", ")));
    }
    Outcome { pass, detail }
}

fn not_control(r: &DefectReport) -> bool {
    class(r) != "negative_control"
}

fn negative_controls() -> Outcome {
    let cfg = RunConfig::default();
    let mut perturbed = Vec::new();
    for suite in [Suite::Zak, Suite::Fsb, Suite::Contravariant] {
        match run_suite(suite, &cfg) {
            Ok(reports) => perturbed.extend(
                reports
                    .into_iter()
                    .filter(|r| class(r) == "negative_control" && r.name.contains("intertwining")),
            ),
            Err(e) => return Outcome { pass: false, detail: format!("suite error: {e}") },
        }
    }
    // a control passes when the perturbed defect exceeds the tolerance
    let controls_fail_intertwining = !perturbed.is_empty() && perturbed.iter().all(|r| r.pass);
    let status = Command::new(env!("CARGO_BIN_EXE_heis"))
        .args(["verify", "zak", "--tol", "intertwining=1e-20"])
        .output()
        .map(|o| o.status.code());
    let exit = match status {
        Ok(code) => code,
        Err(_) => None,
    };
    Outcome {
        pass: controls_fail_intertwining && exit == Some(1),
        detail: format!(
            "{} perturbed kernels, all above tolerance: {}; unreachable tolerance exit code {:?}",
            perturbed.len(),
            controls_fail_intertwining,
            exit
        ),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("group axioms and decompositions", Box::new(|| suite_criterion(Suite::Group, 1.0, |_| true, &[
            "group.associativity", "group.inverse", "group.reconstruction",
        ]))),
        ("representation homomorphism and unitarity", Box::new(|| suite_criterion(Suite::Representations, 5.0, |_| true, &[
            "representations.homomorphism.schrodinger",
            "representations.unitarity.lattice",
            "representations.homomorphism.fsb",
        ]))),
        ("ladder operators", Box::new(|| suite_criterion(Suite::Ladders, 10.0, |_| true, &[
            "ladders.vacuum_annihilation", "ladders.commutator", "ladders.hermite_gram",
            "ladders.vacuum_annihilation_refinement", "ladders.commutator_refinement",
        ]))),
        ("Zak transform", Box::new(|| suite_criterion(Suite::Zak, 15.0, not_control, &[
            "zak.unitarity.gaussian", "zak.unitarity.hermite3", "zak.vacuum_is_theta",
            "zak.intertwining", "zak.inverse_roundtrip.gaussian", "zak.quasi_periodicity",
        ]))),
        ("FSB transform", Box::new(|| suite_criterion(Suite::Fsb, 60.0, not_control, &[
            "fsb.lie_annihilation.squeezed", "fsb.lie_annihilation_refinement",
            "fsb.cauchy_riemann", "fsb.cauchy_riemann_refinement",
            "fsb.vacuum_constancy", "fsb.sesqui_unitarity", "fsb.roundtrip",
        ]))),
        ("theta transform", Box::new(|| suite_criterion(Suite::Theta, 90.0, not_control, &[
            "theta.pretheta_intertwining", "theta.peel_vacuum", "theta.dbar_residual",
            "theta.dbar_refinement", "theta.inverse_roundtrip.vacuum", "theta.inverse_roundtrip.squeezed",
        ]))),
        ("Fourier pair", Box::new(|| suite_criterion(
            Suite::Contravariant,
            5.0,
            |r| r.name.starts_with("contravariant.fourier_"),
            &["contravariant.fourier_self_duality", "contravariant.fourier_roundtrip", "contravariant.fourier_intertwining"],
        ))),
        ("Schrödinger peeling", Box::new(|| suite_criterion(
            Suite::Peeling,
            2.0,
            |r| r.name.starts_with("peeling.schrodinger_hermite."),
            &[
                "peeling.schrodinger_hermite.0", "peeling.schrodinger_hermite.1", "peeling.schrodinger_hermite.2",
                "peeling.schrodinger_hermite.3", "peeling.schrodinger_hermite.4",
            ],
        ))),
        ("negative controls", Box::new(negative_controls)),
    ];
    let mut all = true;
    for (n, (title, check)) in criteria.iter().enumerate() {
        let out = check();
        all &= out.pass;
        println!("{} criterion {}: {} ({})", if out.pass { "PASS" } else { "FAIL" }, n + 1, title, out.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
