//! Scorecard plumbing for the acceptance run: one PASS/FAIL line per
//! criterion, plus a thin wrapper for driving `qwalk` commands in-process.

use std::fmt::Display;
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use clap::Parser;
use serde_json::Value;

use qwalk::{Cli, Summary};

#[derive(Debug, Default)]
pub struct Scorecard {
    outcomes: Vec<(String, bool)>,
}

impl Scorecard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Run one numbered criterion. An `Err` from the body counts as a failure.
    pub fn criterion<F>(&mut self, id: u32, body: F)
    where
        F: FnOnce() -> Result<(bool, String)>,
    {
        self.check(format!("criterion {id:>2}"), body);
    }

    /// A trend check outside the numbered list, scored the same way.
    pub fn trend<F>(&mut self, name: &str, body: F)
    where
        F: FnOnce() -> Result<(bool, String)>,
    {
        self.check(format!("trend {name}"), body);
    }

    fn check<F>(&mut self, label: String, body: F)
    where
        F: FnOnce() -> Result<(bool, String)>,
    {
        let started = Instant::now();
        let (pass, detail) = body().unwrap_or_else(|e| (false, format!("error: {e:#}")));
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("{label}: {verdict}  {detail}  [{:.1}s]", started.elapsed().as_secs_f64());
        self.outcomes.push((label, pass));
    }

    pub fn failed(&self) -> Vec<&str> {
        self.outcomes.iter().filter(|o| !o.1).map(|o| o.0.as_str()).collect()
    }

    /// Print the tally; true when every criterion passed.
    pub fn finish(&self) -> bool {
        let failed = self.failed();
        println!("{} of {} checks passed", self.outcomes.len() - failed.len(), self.outcomes.len());
        if !failed.is_empty() {
            println!("failed: {failed:?}");
        }
        failed.is_empty()
    }
}

/// `lo ≤ x ≤ hi`, rendered for the scorecard.
pub fn within<T: PartialOrd + Display>(name: &str, x: T, lo: T, hi: T) -> (bool, String) {
    let ok = lo <= x && x <= hi;
    (ok, format!("{name}={x} in [{lo}, {hi}]"))
}

/// Run a `qwalk` command line (without the program name) writing into `out`.
pub fn qwalk(out: &Path, args: &[&str]) -> Result<Summary> {
    let out = out.to_string_lossy();
    let argv = ["qwalk", "--out", &out].into_iter().chain(args.iter().copied());
    qwalk::run(&Cli::try_parse_from(argv)?)
}

/// Walk a JSON value by object keys and array indices.
pub fn pick<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Value> {
    path.iter().try_fold(v, |node, key| {
        let next = match key.parse::<usize>() {
            Ok(i) => node.get(i),
            Err(_) => node.get(*key),
        };
        next.ok_or_else(|| anyhow::anyhow!("no `{key}` in {node}"))
    })
}

pub fn pick_f64(v: &Value, path: &[&str]) -> Result<f64> {
    pick(v, path)?.as_f64().ok_or_else(|| anyhow::anyhow!("{path:?} is not a number"))
}
