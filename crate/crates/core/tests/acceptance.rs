//! Acceptance criteria 1 to 9, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the summary is always printed; the process exits with
//! status 1 when any criterion fails.

use std::time::{Duration, Instant};

use hessmetric::oracle::DEFAULT_NODES;
use hessmetric::report::CheckRow;
use hessmetric::reproduce::{reproduce, ReproduceOptions};
use hessmetric::{suite, Result};

struct Outcome {
    rows: Vec<CheckRow>,
    elapsed: Duration,
    budget: Option<Duration>,
}

fn timed(budget: Option<f64>, body: impl FnOnce() -> Result<Vec<CheckRow>>) -> Result<Outcome> {
    let start = Instant::now();
    let rows = body()?;
    Ok(Outcome { rows, elapsed: start.elapsed(), budget: budget.map(Duration::from_secs_f64) })
}

fn examples(id: &str, cases: &[(usize, usize)]) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for &(n, m) in cases {
        let options = ReproduceOptions { n, m: Some(m), ..ReproduceOptions::default() };
        rows.extend(reproduce(id, &options)?.checks);
    }
    Ok(rows)
}

const MONGE_AMPERE: [(usize, usize); 2] = [(2, 2), (3, 3)];

fn criterion(number: usize) -> Result<Outcome> {
    match number {
        1 => timed(Some(1.0), || examples("intro-norm", &MONGE_AMPERE)),
        2 => timed(None, || examples("cap-example", &MONGE_AMPERE)),
        3 => timed(None, || {
            let mut rows = examples("topology-ex1", &MONGE_AMPERE)?;
            rows.extend(examples("topology-ex2", &MONGE_AMPERE)?);
            Ok(rows)
        }),
        4 => timed(Some(30.0), || suite::metric_suite(4, 1000)),
        5 => timed(None, || suite::envelope_suite(5, 200)),
        6 => timed(None, || suite::energy_suite(6, 200)),
        7 => timed(None, || {
            let mut rows = suite::geodesic_suite(7, 20, 4)?;
            rows.extend(examples("geodesic-kinks", &[(2, 2), (3, 3), (2, 1)])?);
            Ok(rows)
        }),
        8 => timed(None, || suite::oracle_suite(8, 50, DEFAULT_NODES)),
        9 => timed(None, suite::convergence_suite),
        _ => unreachable!(),
    }
}

fn main() {
    let mut failed = 0;
    for number in 1..=9 {
        let line = match criterion(number) {
            Ok(outcome) => {
                let bad: Vec<&CheckRow> = outcome.rows.iter().filter(|r| !r.pass).collect();
                let late = outcome.budget.is_some_and(|b| outcome.elapsed > b);
                let verdict = if bad.is_empty() && !late { "PASS" } else { "FAIL" };
                let mut line = format!("criterion {number}: {verdict} ({} checks, {:.2?})", outcome.rows.len(), outcome.elapsed);
                if let Some(budget) = outcome.budget {
                    line += &format!(", budget {budget:?}");
                }
                for row in bad {
                    line += &format!("\n    failed: {} [{}] actual {} expected {} tol {}", row.quantity, row.inputs, row.actual, row.expected, row.tolerance);
                }
                if verdict == "FAIL" {
                    failed += 1;
                }
                line
            }
            Err(e) => {
                failed += 1;
                format!("criterion {number}: FAIL (error: {e})")
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
