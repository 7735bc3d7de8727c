//! Acceptance criteria 1–10. Each test writes one PASS/FAIL line to stderr
//! (outside the test harness capture) and then asserts both the criterion and
//! its runtime bound.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use dmb::bott::{check_morse_iff_bott, collections, lemma_audit, reduce_all};
use dmb::corpus::{sweep, Sample};
use dmb::gen::{random_int_matrix, rank_oracle, structural_lemma_suite};
use dmb::gradient::{grad_morse, grad_strict, has_closed_orbit, lemsgvf_bridge, synthesize_morse};
use dmb::homology::{chain_complex_full, chain_complex_reduced, smith_ranks, IntMatrix};
use dmb::inequalities::{morse_bott_identity, morse_identity, reduction_check};
use dmb::morse::{check_morse, check_u_plus_d};
use dmb::par::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value as Json;

const SEEDS: u64 = 1000;

fn criterion(n: u32, limit_secs: u64, body: impl FnOnce() -> (Vec<String>, String)) {
    let start = Instant::now();
    let (failures, detail) = body();
    let elapsed = start.elapsed();
    let limit = Duration::from_secs(limit_secs);
    let pass = failures.is_empty() && elapsed < limit;
    let _ = writeln!(
        std::io::stderr().lock(),
        "criterion {n}: {} ({detail}; {:.2}s of {limit_secs}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(
        failures.is_empty(),
        "criterion {n}: {} failures, first: {}",
        failures.len(),
        failures[0]
    );
    assert!(
        elapsed < limit,
        "criterion {n}: took {elapsed:?}, limit {limit:?}"
    );
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.display().to_string()
}

/// Runs `dmb` with `--json` and returns the exit code and parsed report.
fn dmb_json(args: &[&str]) -> (i32, Json) {
    let out = Command::new(env!("CARGO_BIN_EXE_dmb"))
        .args(args)
        .arg("--json")
        .output()
        .expect("dmb runs");
    let code = out.status.code().expect("dmb exits normally");
    let json = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json from {args:?}: {e}"));
    (code, json)
}

fn strings(v: &Json) -> Vec<String> {
    v.as_array()
        .expect("array")
        .iter()
        .map(|s| s.as_str().expect("string").to_string())
        .collect()
}

fn sv(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl Into<String>) {
    if !ok {
        failures.push(what.into());
    }
}

/// Collects one failure list per sample and flattens them, tagged with the seed.
fn sweep_failures(check: impl Fn(&Sample) -> Vec<String> + Sync + Send) -> Vec<String> {
    sweep(0..SEEDS, Execution::Parallel, |s| {
        check(s)
            .into_iter()
            .map(|f| format!("seed {}: {f}", s.seed))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[test]
fn criterion_01_square_left() {
    criterion(1, 1, || {
        let mut fails = Vec::new();
        let (code, r) = dmb_json(&["analyze", &fixture("square.cx"), &fixture("square_left.fn")]);
        check(&mut fails, code == 0, format!("exit code {code}"));
        check(&mut fails, r["is_morse_bott"] == true, "not Morse-Bott");
        let colls = r["collections"].as_array().expect("collections");
        let cells: Vec<Vec<String>> = colls.iter().map(|c| strings(&c["cells"])).collect();
        let reduced: Vec<Vec<String>> = colls.iter().map(|c| strings(&c["reduced"])).collect();
        check(
            &mut fails,
            cells
                == vec![
                    sv(&["A", "AB"]),
                    sv(&["B", "BC", "BD"]),
                    sv(&["C", "D", "AC", "CD"]),
                ],
            format!("collections {cells:?}"),
        );
        check(
            &mut fails,
            reduced == vec![sv(&["A"]), sv(&[]), sv(&["AC", "CD"])],
            format!("reduced {reduced:?}"),
        );
        let id = &r["identity"];
        check(
            &mut fails,
            id["lhs"] == "1 + 2t" && id["p_k"] == "1 + 2t",
            format!("lhs {} P {}", id["lhs"], id["p_k"]),
        );
        check(
            &mut fails,
            id["residual"] == "0",
            format!("R = {}", id["residual"]),
        );
        check(&mut fails, id["holds"] == true, "identity fails");
        (
            fails,
            "3 collections, sum P_t(C^red) = 1 + 2t = P_t(K), R = 0".into(),
        )
    });
}

#[test]
fn criterion_02_square_right() {
    criterion(2, 1, || {
        let mut fails = Vec::new();
        let (code, r) = dmb_json(&[
            "mb-check",
            &fixture("square.cx"),
            &fixture("square_right.fn"),
        ]);
        check(&mut fails, code == 3, format!("exit code {code}"));
        let vs = r["violations"].as_array().expect("violations");
        let counter: Vec<&Json> = vs
            .iter()
            .filter(|v| {
                (v["condition"] == "MB2" || v["condition"] == "MB4")
                    && v["witnesses"].as_array().unwrap().len() == 2
            })
            .collect();
        check(
            &mut fails,
            vs.len() == 1 && counter.len() == 1,
            format!("violations {vs:?}"),
        );
        if let Some(v) = counter.first() {
            check(
                &mut fails,
                v["cell"] == "C" && v["condition"] == "MB2",
                format!("violation {v}"),
            );
            check(
                &mut fails,
                strings(&v["witnesses"]) == sv(&["BC", "CD"]),
                format!("witnesses {}", v["witnesses"]),
            );
        }
        (fails, "single MB2 violation at C with U^C = 2".into())
    });
}

#[test]
fn criterion_03_triangles() {
    criterion(3, 1, || {
        let mut fails = Vec::new();
        let (code, left) = dmb_json(&[
            "analyze",
            &fixture("triangle.cx"),
            &fixture("triangle_left.fn"),
        ]);
        check(&mut fails, code == 0, format!("left exit code {code}"));
        let left_reduced: Vec<Vec<String>> = left["collections"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| strings(&c["reduced"]))
            .collect();
        let at_two = left["collections"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["value"] == "2")
            .expect("value 2");
        check(
            &mut fails,
            strings(&at_two["reduced"]) == sv(&["a", "ab"]),
            format!("left reduced {left_reduced:?}"),
        );
        check(
            &mut fails,
            left["identity"]["holds"] == true,
            "left identity fails",
        );

        let (code, right) = dmb_json(&[
            "analyze",
            &fixture("triangle.cx"),
            &fixture("triangle_right.fn"),
        ]);
        check(&mut fails, code == 0, format!("right exit code {code}"));
        let big = right["collections"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["value"] == "3")
            .expect("value 3");
        let c = sv(&["ac", "bc", "abc"]);
        check(
            &mut fails,
            strings(&big["cells"]) == c && strings(&big["reduced"]) == c,
            format!("right {big}"),
        );
        check(
            &mut fails,
            big["poincare"] == "t",
            format!("P_t(C^red) = {}", big["poincare"]),
        );
        let id = &right["identity"];
        check(
            &mut fails,
            id["holds"] == true && id["lhs"] == "3 + 2t" && id["residual"] == "2",
            format!("right {id}"),
        );
        (
            fails,
            "left C^red = {a, ab}; right C = C^red with P_t = t; identity exact on both".into(),
        )
    });
}

#[test]
fn criterion_04_morse_iff_bott() {
    criterion(4, 60, || {
        let fails = sweep_failures(|s| {
            let mut f = Vec::new();
            match check_morse_iff_bott(&s.complex, &s.morse) {
                Ok(e) => check(
                    &mut f,
                    e.holds() && e.is_morse,
                    format!("synthesized: {e:?}"),
                ),
                Err(e) => f.push(format!("synthesized: {e}")),
            }
            match check_morse_iff_bott(&s.complex, &s.morse_bott) {
                Ok(e) => check(
                    &mut f,
                    e.holds() && e.is_morse_bott,
                    format!("merged: {e:?}"),
                ),
                Err(e) => f.push(format!("merged: {e}")),
            }
            f
        });
        (
            fails,
            format!("{SEEDS} complexes, Morse and Morse-Bott functions each"),
        )
    });
}

#[test]
fn criterion_05_lemma_suite() {
    criterion(5, 120, || {
        let fails = sweep_failures(|s| {
            let k = &s.complex;
            let mut f = Vec::new();
            check(
                &mut f,
                structural_lemma_suite(k).is_empty(),
                "face-poset lemmas",
            );
            check(
                &mut f,
                matches!(check_u_plus_d(k, &s.morse), Ok(Ok(()))),
                "U + D <= 1",
            );
            for (tag, g) in [("morse", &s.morse), ("merged", &s.morse_bott)] {
                match lemma_audit(k, g) {
                    Ok(v) => check(&mut f, v.is_empty(), format!("{tag}: {v:?}")),
                    Err(e) => f.push(format!("{tag}: {e}")),
                }
                match morse_bott_identity(k, g) {
                    Ok(r) => {
                        for c in &r.collections {
                            let r_c_nonneg = (1..c.ranks.chains.len())
                                .all(|j| c.ranks.boundary_below(j) <= c.ranks.chains[j]);
                            check(
                                &mut f,
                                c.identity_holds && r_c_nonneg,
                                format!("{tag}: collection at {}", c.value),
                            );
                        }
                    }
                    // a nonzero ∂^C∘∂^C surfaces here as a homology error
                    Err(e) => f.push(format!("{tag}: {e}")),
                }
            }
            f
        });
        (
            fails,
            "Lemmas 2.2-2.6, 4.1-4.5 and Prop. 4.10 on every sample".into(),
        )
    });
}

#[test]
fn criterion_06_morse_identity() {
    criterion(6, 60, || {
        let fails = sweep_failures(|s| match morse_identity(&s.complex, &s.morse) {
            Ok(r) => {
                let counts = s.complex.cell_counts();
                let chi: i64 = counts
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
                    .sum();
                let mut f = Vec::new();
                check(
                    &mut f,
                    r.holds && r.nonnegative,
                    format!("{} = {} + (1+t)({})", r.lhs, r.p_k, r.residual),
                );
                check(
                    &mut f,
                    r.lhs.eval(-1) == chi,
                    format!("lhs(-1) = {} but chi = {chi}", r.lhs.eval(-1)),
                );
                f
            }
            Err(e) => vec![e.to_string()],
        });
        (
            fails,
            format!("{SEEDS} Morse functions, exact with r >= 0 and Euler check"),
        )
    });
}

#[test]
fn criterion_07_morse_bott_identity() {
    criterion(7, 120, || {
        let results = sweep(0..SEEDS, Execution::Parallel, |s| {
            let non_morse = !check_morse(&s.complex, &s.morse_bott).unwrap().is_morse();
            let mut f = Vec::new();
            match morse_bott_identity(&s.complex, &s.morse_bott) {
                Ok(r) => {
                    let id = &r.identity;
                    check(
                        &mut f,
                        id.holds && id.nonnegative,
                        format!("{} = {} + (1+t)({})", id.lhs, id.p_k, id.residual),
                    );
                    let (summed, betti) = (&id.lhs, &id.p_k);
                    let top = betti.coeffs().len();
                    check(
                        &mut f,
                        (0..top).all(|k| summed.coeff(k) >= betti.coeff(k)),
                        "sum b^C_k >= b_k",
                    );
                }
                Err(e) => f.push(e.to_string()),
            }
            (
                non_morse,
                f.into_iter()
                    .map(|x| format!("seed {}: {x}", s.seed))
                    .collect::<Vec<_>>(),
            )
        });
        let non_morse = results.iter().filter(|(n, _)| *n).count();
        let mut fails: Vec<String> = results.into_iter().flat_map(|(_, f)| f).collect();
        check(
            &mut fails,
            non_morse >= 100,
            format!("only {non_morse} non-Morse functions"),
        );
        (
            fails,
            format!("{SEEDS} Morse-Bott functions, {non_morse} not Morse"),
        )
    });
}

#[test]
fn criterion_08_round_trips() {
    criterion(8, 60, || {
        let fails = sweep_failures(|s| {
            let k = &s.complex;
            let mut f = Vec::new();
            match synthesize_morse(k, &s.matching).and_then(|g| grad_morse(k, &g)) {
                Ok(v) => check(&mut f, v == s.matching, "grad(synthesize(V)) != V"),
                Err(e) => f.push(e.to_string()),
            }
            match grad_strict(k, &s.morse_bott) {
                Ok(v) => check(
                    &mut f,
                    has_closed_orbit(k, &v).is_none(),
                    "strict gradient has a closed orbit",
                ),
                Err(e) => f.push(e.to_string()),
            }
            if let Err(e) = lemsgvf_bridge(k, &s.morse_bott) {
                f.push(e.to_string());
            }
            f
        });
        (fails, format!("{SEEDS} matchings and strict gradients"))
    });
}

#[test]
fn criterion_09_reduction() {
    criterion(9, 60, || {
        let fails = sweep_failures(|s| match reduction_check(&s.complex, &s.morse) {
            Ok(r) => {
                let mut f = Vec::new();
                check(
                    &mut f,
                    r.poincare_matches,
                    format!("{} != {}", r.reduced_sum, r.critical),
                );
                check(&mut f, r.counts_match, "d_k split");
                f
            }
            Err(e) => vec![e.to_string()],
        });
        (fails, format!("{SEEDS} Morse functions"))
    });
}

#[test]
fn criterion_10_rank_oracle() {
    criterion(10, 30, || {
        let mut fails = sweep_failures(|s| {
            let mut mats: Vec<IntMatrix> = chain_complex_full(&s.complex).boundaries;
            let colls = collections(&s.complex, &s.morse_bott);
            for rc in reduce_all(&s.complex, &s.morse_bott, &colls)
                .into_iter()
                .flatten()
            {
                if let Ok(cc) = chain_complex_reduced(&s.complex, &rc) {
                    mats.extend(cc.boundaries);
                }
            }
            mats.iter()
                .filter(|m| smith_ranks(m).rank != rank_oracle(m))
                .map(|m| format!("{}x{} matrix", m.rows(), m.cols()))
                .collect()
        });
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for i in 0..1000 {
            let (r, c) = (rng.gen_range(0..=8), rng.gen_range(0..=8));
            let m = random_int_matrix(&mut rng, r, c, 9);
            if smith_ranks(&m).rank != rank_oracle(&m) {
                fails.push(format!("random matrix {i} ({r}x{c})"));
            }
        }
        (
            fails,
            "corpus boundary matrices and 1000 random matrices up to 8x8".into(),
        )
    });
}
