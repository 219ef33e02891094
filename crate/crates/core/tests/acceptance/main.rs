//! Acceptance criteria 1-7. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Pass criterion numbers as arguments to run
//! a subset: `cargo test --test acceptance -- 2 7`.

mod budget;
mod common;
mod equations;
mod invariants;
mod ordering;
mod pareto;
mod predictor;
mod surrogate;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Check = fn() -> Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: Check,
}

const CRITERIA: [Criterion; 7] = [
    Criterion {
        id: 1,
        name: "equation oracle",
        limit: Some(Duration::from_secs(5)),
        check: equations::run,
    },
    Criterion {
        id: 2,
        name: "tiny-instance pareto oracle",
        limit: Some(Duration::from_secs(60)),
        check: pareto::run,
    },
    Criterion {
        id: 3,
        name: "single-objective ordering",
        limit: Some(Duration::from_secs(30 * 60)),
        check: ordering::run,
    },
    Criterion {
        id: 4,
        name: "randomized invariants",
        limit: None,
        check: invariants::run,
    },
    Criterion {
        id: 5,
        name: "surrogate correctness",
        limit: None,
        check: surrogate::run,
    },
    Criterion {
        id: 6,
        name: "arrival predictor",
        limit: None,
        check: predictor::run,
    },
    Criterion {
        id: 7,
        name: "time budget",
        limit: None,
        check: budget::run,
    },
];

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.check))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_message(&e))));
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.1?}, limit {limit:?}")),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} [{tag}] {}: {detail} ({:.2} s)", c.id, c.name, elapsed.as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn panic_message(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}
