//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use serde_json::Value;

use dlv::linsys::{certify_not_effective, ForcingConclusion};
use dlv::oracle;
use dlv::pipeline::{m_threshold, Tower};
use dlv::Error;

const FULL_CHAIN: [&str; 6] = [
    "blowup-section-transfer",
    "cover-section-split",
    "abelian-non-effectivity",
    "blowup-section-transfer",
    "fixed-part-forcing",
    "unique-member",
];

fn odd(a: u64, b: u64) -> Vec<u64> {
    (a..=b).step_by(2).collect()
}

fn dlv(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_dlv"))
        .args(args)
        .output()
        .expect("run dlv");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn int(v: &Value) -> Option<BigInt> {
    v.as_number()?.to_string().parse().ok()
}

fn chain_rules(inst: &Value) -> Vec<String> {
    inst["certificate_chain"]
        .as_array()
        .map(|a| {
            a.iter()
                .filter_map(|s| s["rule"].as_str().map(str::to_string))
                .collect()
        })
        .unwrap_or_default()
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn headline() -> Outcome {
    let mut slowest = Duration::ZERO;
    for n in odd(3, 31) {
        let threshold = m_threshold(n).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let (code, stdout) = dlv(&["verify", "--n", &n.to_string(), "--format", "json"]);
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        if code != 0 {
            return Err(format!("n={n}: exit {code}"));
        }
        if elapsed >= Duration::from_secs(1) {
            return Err(format!("n={n}: took {elapsed:?}"));
        }
        let doc: Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
        let instances = doc["instances"].as_array().ok_or("no instances")?;
        for m in 1..=threshold {
            let inst = instances
                .iter()
                .find(|i| i["m"].as_u64() == Some(m))
                .ok_or_else(|| format!("n={n} m={m}: missing"))?;
            let ok = int(&inst["d_n_squared"]) == Some(4.into())
                && int(&inst["a_n_squared"]) == Some(8.into())
                && inst["h0"].as_u64() == Some(1)
                && inst["status"] == "Verified"
                && chain_rules(inst) == FULL_CHAIN;
            if !ok {
                return Err(format!("n={n} m={m}: {inst}"));
            }
        }
    }
    Ok(format!("n = 3..31, slowest verify {slowest:?}"))
}

fn sharpness() -> Outcome {
    for n in odd(3, 31) {
        let m = m_threshold(n).map_err(|e| e.to_string())? + 1;
        let expected = BigInt::from(4 * (m - 1)) - BigInt::from(n * n);
        if expected < BigInt::from(0) {
            return Err(format!("n={n}: closed form {expected} is negative"));
        }
        let t = Tower::new(n).map_err(|e| e.to_string())?;
        let second = t.a_n.scale(m).sub(&t.r).map_err(|e| e.to_string())?;
        match certify_not_effective(&t.y, &second, "G_n") {
            Err(Error::NotCertified { pairing, .. }) if pairing == expected => {}
            other => return Err(format!("n={n} m={m}: {other:?}")),
        }
        let inst = t.verify(m).map_err(|e| e.to_string())?;
        if inst.status.label() != "BeyondThreshold" || inst.certificate_value != expected {
            return Err(format!(
                "n={n} m={m}: {} with value {}",
                inst.status.label(),
                inst.certificate_value
            ));
        }
    }
    Ok("m = threshold + 1 is BeyondThreshold for n = 3..31".into())
}

fn forcing_closed_form() -> Outcome {
    for n in [3u64, 5, 7] {
        let t = Tower::new(n).map_err(|e| e.to_string())?;
        for m in 1..=50u64 {
            let trace = t.force_on_y_prime(m).map_err(|e| e.to_string())?;
            let d = match &trace.conclusion {
                ForcingConclusion::UniqueMember(d) => d,
                other => return Err(format!("n={n} m={m}: {other:?}")),
            };
            let expect_decomp = d.0.len() == 2 && d.get("F'") == m && d.get("G_n'") == m;
            let first = trace.steps.first().map(|s| s.pairing.clone());
            let second = trace.steps.get(1).map(|s| s.pairing.clone());
            let mi = BigInt::from(m);
            if !expect_decomp || first != Some(-2 * &mi) || second != Some(-2 * &mi - 1) {
                return Err(format!(
                    "n={n} m={m}: {d}, first {first:?}, second {second:?}"
                ));
            }
        }
    }
    Ok("n = 3, 5, 7 and m <= 50".into())
}

fn enumeration_equivalence() -> Outcome {
    let start = Instant::now();
    let t = Tower::new(3).map_err(|e| e.to_string())?;
    for m in 1..=4u64 {
        let found = oracle::enumerate_decompositions(&t.y_prime, &t.l_n.scale(m), 10, false)
            .map_err(|e| e.to_string())?;
        let forced = t.force_on_y_prime(m).map_err(|e| e.to_string())?;
        match forced.decomposition() {
            Some(d) if found.len() == 1 && &found[0] == d => {}
            other => return Err(format!("m={m}: forcing {other:?}, enumeration {found:?}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("n = 3, m <= 4 in {elapsed:?}"))
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let r = oracle::identity_suite(&odd(3, 99), 20, 0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !r.passed() {
        return Err(format!(
            "{} failures, first: {}",
            r.failures.len(),
            r.failures[0]
        ));
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{} checks in {elapsed:?}", r.trials))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let bil = oracle::bilinearity_suite(10_000, 0);
    let order = oracle::forcing_order_suite(&odd(3, 99), 5).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    for r in [&bil, &order] {
        if !r.passed() {
            return Err(format!(
                "{}: {} failures, first: {}",
                r.suite,
                r.failures.len(),
                r.failures[0]
            ));
        }
    }
    if bil.trials != 10_000 {
        return Err(format!("bilinearity ran {} trials", bil.trials));
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{} random trials, {} forcing orders in {elapsed:?}",
        bil.trials, order.trials
    ))
}

fn determinism() -> Outcome {
    let args = [
        "sweep",
        "--n-range",
        "3..21",
        "--format",
        "json",
        "--seed",
        "0",
    ];
    let (c1, a) = dlv(&args);
    let (c2, b) = dlv(&args);
    if c1 != 0 || c2 != 0 {
        return Err(format!("exit codes {c1}, {c2}"));
    }
    if a.is_empty() || a != b {
        return Err("outputs differ".into());
    }
    Ok(format!("{} identical bytes", a.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 7] = [
        ("1 headline D^2 = 4, A^2 = 8, h0 = 1", headline),
        ("2 threshold sharpness", sharpness),
        ("3 forcing closed form", forcing_closed_form),
        ("4 enumeration equals forcing", enumeration_equivalence),
        ("5 identity suite", identity_suite),
        ("6 property suites", property_suites),
        ("7 sweep determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (name, run) in criteria {
        let line = match run() {
            Ok(detail) => format!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed.push(name);
                format!("FAIL  {name}: {detail}")
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
