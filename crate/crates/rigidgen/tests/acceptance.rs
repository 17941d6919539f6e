//! Acceptance battery: one test per numbered exit criterion.
//!
//! Each test prints a single `criterion N: PASS/FAIL — …` line (always
//! visible on failure, and under `--nocapture` otherwise) and then asserts
//! the verdict, so `cargo test --test acceptance` doubles as the sign-off
//! checklist. Every check goes through the public API or the installed
//! binary; nothing reaches into crate internals.
//!
//! Criterion 8 is a known red: it records the measured Gaussian-prediction
//! ratios for the two desk-size instances and fails honestly because the
//! ratio moves away from 1 as the instance grows. The numbers are printed
//! in full so the gap is auditable.

use std::collections::BTreeSet;
use std::process::{Command, Output};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rigidgen::design::{self, DesignParams};
use rigidgen::fourier::{self, LemmaConfig, TorusPoint};
use rigidgen::framework::{
    ConstantOverrides, ElementKey, GreedyConfig, Instance, PhiVector, SparseDomainVector,
};
use rigidgen::io;
use rigidgen::oa::{self, OaParams};
use rigidgen::perm::{self, PermParams};
use rigidgen::sampler::{self, SearchConfig};

/// Collects failed checks so each criterion reports exactly one line.
struct Audit {
    failures: Vec<String>,
    failed: usize,
}

impl Audit {
    fn new() -> Self {
        Audit {
            failures: Vec::new(),
            failed: 0,
        }
    }

    fn check<F: FnOnce() -> String>(&mut self, ok: bool, detail: F) {
        if ok {
            return;
        }
        self.failed += 1;
        if self.failures.len() < 6 {
            self.failures.push(detail());
        }
    }

    fn verdict(self, number: u32, summary: &str) {
        if self.failed == 0 {
            println!("criterion {number}: PASS — {summary}");
        } else {
            let shown = self.failures.join("; ");
            println!(
                "criterion {number}: FAIL — {} check(s) failed: {shown}",
                self.failed
            );
            panic!("criterion {number} failed: {shown}");
        }
    }
}

/// Applies the basis map to a sparse domain vector by linearity.
fn phi_of(instance: &Instance, vector: &SparseDomainVector) -> PhiVector {
    let mut total = PhiVector::zeros(instance.dim());
    for (key, coeff) in vector.iter() {
        let phi = instance
            .phi(key)
            .expect("support stays inside the ground set");
        total.add_scaled(coeff, &phi);
    }
    total
}

fn oa_grid() -> Vec<OaParams> {
    let mut grid = Vec::new();
    for q in [2, 3] {
        for n in [3, 4, 5] {
            for t in [1, 2] {
                grid.push(OaParams::new(q, n, t).expect("grid parameters are valid"));
            }
        }
    }
    grid
}

fn design_grid() -> Vec<DesignParams> {
    let mut grid = Vec::new();
    for v in 5..=8 {
        for t in [1, 2] {
            for k in (2 * t + 1)..=v {
                grid.push(DesignParams::new(v, k, t).expect("grid parameters are valid"));
            }
        }
    }
    grid
}

/// All `k`-subsets of `pool` in lexicographic order.
fn k_subsets(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    fn extend(
        pool: &[u32],
        k: usize,
        start: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        let needed = k - current.len();
        for next in start..=pool.len() - needed {
            current.push(pool[next]);
            extend(pool, k, next + 1, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(pool, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Seeded sample without replacement: a partial Fisher–Yates pass.
fn seeded_picks<T>(mut pool: Vec<T>, take: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let take = take.min(pool.len());
    for slot in 0..take {
        let other = rng.random_range(slot..pool.len());
        pool.swap(slot, other);
    }
    pool.truncate(take);
    pool
}

fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rigidgen"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().unwrap_or(-1)
}

#[test]
fn criterion_1_oa_isolation_vectors_and_families() {
    let started = Instant::now();
    let mut audit = Audit::new();
    let mut vectors = 0u64;
    let mut families = 0u64;
    for params in oa_grid() {
        let (q, n, t) = (params.q, params.n, params.t);
        let instance = oa::instance(&params).expect("grid instance builds");
        let dim = instance.dim();
        let targets = oa::canonical_indices(&params);
        let norm_bound = BigInt::from(8u64.pow(t) * u64::from(n).pow(2 * t));
        let mut rng = sampler::substream_rng(
            101,
            u64::from(q) * 100 + u64::from(n) * 10 + u64::from(t),
        );
        for (index, target) in targets.iter().enumerate() {
            for _ in 0..20 {
                let mut x: Vec<u32> = (0..n as usize).map(|_| rng.random_range(1..=q)).collect();
                for (slot, &coord) in target.coords.iter().enumerate() {
                    x[coord] = target.values[slot];
                }
                let gamma =
                    oa::gamma(&params, &x, &target.coords).expect("seeded helper word is valid");
                let unit = PhiVector::scaled_unit(dim, index, BigInt::one());
                audit.check(phi_of(&instance, &gamma) == unit, || {
                    format!("phi(gamma) != e_a for q={q} n={n} t={t} a#{index} x={x:?}")
                });
                audit.check(gamma.norm_sq() <= norm_bound, || {
                    format!(
                        "|gamma|^2 = {} exceeds {norm_bound} for q={q} n={n} t={t} a#{index}",
                        gamma.norm_sq()
                    )
                });
                vectors += 1;
            }
        }
        let required = u64::from(q).pow(n - t).div_ceil(u64::from(n).pow(2 * t));
        let config = GreedyConfig {
            seed: Some(7),
            ..GreedyConfig::default()
        };
        for index in 0..targets.len() {
            let family = instance
                .isolation_family(index, &config)
                .expect("greedy family construction succeeds");
            let report = instance
                .verify_isolation_family(&family)
                .expect("family verifies against the instance");
            audit.check(
                report.pass && report.supports_disjoint && report.norms_within_bound,
                || {
                    format!(
                        "family bullets fail for q={q} n={n} t={t} a#{index}: {:?}",
                        report.first_failure
                    )
                },
            );
            audit.check(family.count() as u64 >= required && report.meets_count_bound, || {
                format!(
                    "family too small for q={q} n={n} t={t} a#{index}: r = {} < {required}",
                    family.count()
                )
            });
            families += 1;
        }
    }
    let elapsed = started.elapsed();
    audit.check(elapsed.as_secs() < 60, || {
        format!("grid took {elapsed:.2?}, over the 60 s budget")
    });
    audit.verdict(
        1,
        &format!(
            "{vectors} seeded vectors hit e_a within the norm bound and {families} greedy \
             families are disjoint and large enough in {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_2_design_isolation_vectors_and_identity() {
    let started = Instant::now();
    let mut audit = Audit::new();
    let mut vectors = 0u64;
    let mut vacuous = 0u64;
    for params in design_grid() {
        let (v, k, t) = (params.v, params.k, params.t);
        let instance = design::instance(&params).expect("grid instance builds");
        let dim = instance.dim();
        let scale: u64 = (u64::from(k) - u64::from(t) + 1..=u64::from(k)).product();
        let norm_bound = BigInt::from((2 * u64::from(k)).pow(3 * t));
        let mut rng = sampler::substream_rng(
            202,
            u64::from(v) * 100 + u64::from(k) * 10 + u64::from(t),
        );
        for (index, a) in design::canonical_tsets(&params).iter().enumerate() {
            let rest: Vec<u32> = (1..=v).filter(|point| !a.contains(point)).collect();
            if rest.len() < k as usize {
                vacuous += 1;
                continue;
            }
            let helpers = k_subsets(&rest, k as usize);
            let picks = if helpers.len() <= 20 {
                helpers
            } else {
                seeded_picks(helpers, 20, &mut rng)
            };
            for x in &picks {
                let gamma = design::gamma(&params, x, a).expect("disjoint helper is valid");
                let unit = PhiVector::scaled_unit(dim, index, BigInt::from(scale));
                audit.check(phi_of(&instance, &gamma) == unit, || {
                    format!("phi(gamma) != m*e_a for v={v} k={k} t={t} a={a:?} x={x:?}")
                });
                audit.check(gamma.norm_sq() <= norm_bound, || {
                    format!(
                        "|gamma|^2 = {} exceeds {norm_bound} for v={v} k={k} t={t} a={a:?}",
                        gamma.norm_sq()
                    )
                });
                vectors += 1;
            }
        }
    }
    let mut identities = 0u64;
    for a in 1u64..=12 {
        for b in 0..a {
            for c in 0u64..=12 {
                let sum = design::binomial_alternating_sum(a, b, c);
                audit.check(sum.is_zero(), || {
                    format!("alternating sum is {sum} at a={a} b={b} c={c}, want 0")
                });
                identities += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    audit.check(elapsed.as_secs() < 60, || {
        format!("grid took {elapsed:.2?}, over the 60 s budget")
    });
    audit.verdict(
        2,
        &format!(
            "{vectors} helper vectors hit m*e_a ({vacuous} targets vacuous for lack of a \
             disjoint helper); {identities} alternating sums vanish; done in {elapsed:.2?}"
        ),
    );
}

enum FamilyKind {
    Oa(OaParams),
    Design(DesignParams),
    Perm(PermParams),
}

fn family_rows(subset: &BTreeSet<ElementKey>) -> Vec<Vec<u32>> {
    subset
        .iter()
        .map(|key| match key {
            ElementKey::Word(word) => word.clone(),
            ElementKey::Block(block) => block.clone(),
            ElementKey::Perm(images) => images.clone(),
            ElementKey::Index(_) => panic!("grid families use structured keys"),
        })
        .collect()
}

fn family_pass(kind: &FamilyKind, rows: &[Vec<u32>]) -> bool {
    match kind {
        FamilyKind::Oa(params) => oa::verify_oa(params, rows).expect("rows are words").pass,
        FamilyKind::Design(params) => {
            design::verify_design(params, rows)
                .expect("rows are blocks")
                .pass
        }
        FamilyKind::Perm(params) => {
            perm::verify_t_wise(params.n, params.t, rows)
                .expect("rows are permutations")
                .pass
        }
    }
}

#[test]
fn criterion_3_family_verifiers_match_the_framework() {
    let mut audit = Audit::new();
    let mut instances: Vec<(String, Instance, FamilyKind)> = Vec::new();
    for params in oa_grid() {
        instances.push((
            format!("oa({},{},{})", params.q, params.n, params.t),
            oa::instance(&params).expect("grid instance builds"),
            FamilyKind::Oa(params),
        ));
    }
    for params in design_grid() {
        instances.push((
            format!("design({},{},{})", params.v, params.k, params.t),
            design::instance(&params).expect("grid instance builds"),
            FamilyKind::Design(params),
        ));
    }
    for n in [3, 4] {
        for t in [1, 2] {
            let params = PermParams::new(n, t).expect("orders are valid");
            instances.push((
                format!("perm({n},{t})"),
                perm::spanning_instance(&params).expect("spanning instance builds"),
                FamilyKind::Perm(params),
            ));
        }
    }
    let mut compared = 0u64;
    for (stream, (label, instance, kind)) in instances.iter().enumerate() {
        let mut rng = sampler::substream_rng(303, stream as u64);
        let size = instance.size();
        let mut done = 0u32;
        let mut attempts = 0u32;
        while done < 200 && attempts < 2000 {
            attempts += 1;
            let n = rng.random_range(1..=size);
            let subset =
                sampler::bernoulli_subset(instance, n, &mut rng).expect("target size in range");
            if subset.is_empty() {
                continue;
            }
            let framework = instance
                .verify_solution(&subset)
                .expect("non-empty subsets verify")
                .pass;
            let family = family_pass(kind, &family_rows(&subset));
            audit.check(framework == family, || {
                format!(
                    "verdicts disagree on {label}: framework says {framework}, family \
                     verifier says {family} on a subset of {} rows",
                    subset.len()
                )
            });
            done += 1;
            compared += 1;
        }
        audit.check(done == 200, || {
            format!("only {done} non-empty draws for {label}")
        });
        // The full ground set is always a solution; both verifiers must agree.
        let everything: BTreeSet<ElementKey> = instance.elements().collect();
        let framework = instance
            .verify_solution(&everything)
            .expect("the full ground set verifies")
            .pass;
        let family = family_pass(kind, &family_rows(&everything));
        audit.check(framework && family, || {
            format!(
                "full ground set rejected on {label}: framework {framework}, family {family}"
            )
        });
        compared += 1;
    }
    audit.verdict(
        3,
        &format!(
            "{compared} seeded subsets across {} instances get identical verdicts",
            instances.len()
        ),
    );
}

#[test]
fn criterion_4_exact_probability_matches_sampling() {
    let started = Instant::now();
    let mut audit = Audit::new();
    let params = OaParams::new(2, 2, 1).expect("parameters are valid");
    let instance = oa::instance(&params).expect("instance builds");
    let target = instance
        .expected_vector(2)
        .expect("N = 2 is in range")
        .as_integer()
        .expect("E[X] is integral at N = 2");
    let exact = fourier::exact_point_probability(&instance, 2, &target).expect("oracle runs");
    let eighth = BigRational::new(BigInt::one(), BigInt::from(8));
    audit.check(exact == eighth, || {
        format!("exact probability is {exact}, want 1/8")
    });
    let config = SearchConfig {
        n: 2,
        trials: 100_000,
        seed: 424_242,
    };
    let report =
        sampler::estimate_success_probability(&instance, &config).expect("estimation runs");
    audit.check(!report.exact_zero, || {
        "the estimator claims the event is impossible".to_string()
    });
    audit.check(
        report.wilson_low <= 0.125 && 0.125 <= report.wilson_high,
        || {
            format!(
                "95% Wilson interval [{:.5}, {:.5}] misses 1/8 (p_hat = {:.5})",
                report.wilson_low, report.wilson_high, report.p_hat
            )
        },
    );
    let elapsed = started.elapsed();
    audit.check(elapsed.as_secs() < 10, || {
        format!("oracle plus sampling took {elapsed:.2?}, over the 10 s budget")
    });
    audit.verdict(
        4,
        &format!(
            "Pr[X = E[X]] = 1/8 exactly; {}/{} trials hit and the Wilson interval \
             [{:.4}, {:.4}] covers 0.125",
            report.successes, report.trials, report.wilson_low, report.wilson_high
        ),
    );
}

#[test]
fn criterion_5_cli_searches_find_verified_arrays() {
    let started = Instant::now();
    let mut audit = Audit::new();
    let dir = tempfile::tempdir().expect("temp dir creates");

    let oa_path = dir.path().join("oa-2-4-2.txt");
    let oa_search = run_bin(&[
        "oa", "search", "--q", "2", "--n", "4", "--t", "2", "--N", "8", "--trials", "1000000",
        "--seed", "0", "--out",
        oa_path.to_str().expect("path is UTF-8"),
    ]);
    audit.check(exit_code(&oa_search) == 0, || {
        format!(
            "oa search exited {}: {}",
            exit_code(&oa_search),
            String::from_utf8_lossy(&oa_search.stderr)
        )
    });
    if oa_path.exists() {
        let file = io::read_oa(&oa_path).expect("search output parses");
        let report = oa::verify_oa(&file.params, &file.rows).expect("rows verify");
        audit.check(file.rows.len() == 8 && report.pass, || {
            format!("searched array fails verification: {report:?}")
        });
        let verify = run_bin(&["oa", "verify", "--in", oa_path.to_str().expect("UTF-8")]);
        audit.check(exit_code(&verify) == 0, || {
            format!("oa verify exited {}", exit_code(&verify))
        });
    } else {
        audit.check(false, || "oa search wrote no output file".to_string());
    }

    let params = DesignParams::new(6, 3, 1).expect("parameters are valid");
    let instance = design::instance(&params).expect("instance builds");
    let window = instance.admissible_n(&ConstantOverrides::default());
    audit.check(window.smallest_divisible == Some(18), || {
        format!(
            "smallest admissible N is {:?}, want 18",
            window.smallest_divisible
        )
    });
    let n_arg = window.smallest_divisible.unwrap_or(18).to_string();
    let design_path = dir.path().join("design-6-3-1.txt");
    let design_search = run_bin(&[
        "design", "search", "--v", "6", "--k", "3", "--t", "1", "--N", &n_arg, "--trials",
        "1000000", "--seed", "0", "--out",
        design_path.to_str().expect("path is UTF-8"),
    ]);
    audit.check(exit_code(&design_search) == 0, || {
        format!(
            "design search exited {}: {}",
            exit_code(&design_search),
            String::from_utf8_lossy(&design_search.stderr)
        )
    });
    if design_path.exists() {
        let file = io::read_design(&design_path).expect("search output parses");
        let report = design::verify_design(&file.params, &file.blocks).expect("blocks verify");
        audit.check(report.pass && report.lambda == Some(file.lambda), || {
            format!("searched design fails verification: {report:?}")
        });
        let verify = run_bin(&["design", "verify", "--in", design_path.to_str().expect("UTF-8")]);
        audit.check(exit_code(&verify) == 0, || {
            format!("design verify exited {}", exit_code(&verify))
        });
    } else {
        audit.check(false, || "design search wrote no output file".to_string());
    }

    let elapsed = started.elapsed();
    audit.check(elapsed.as_secs() < 600, || {
        format!("searches took {elapsed:.2?}, over the 2 x 5 min budget")
    });
    audit.verdict(
        5,
        &format!("both searches found arrays that re-verify, in {elapsed:.2?} total"),
    );
}

#[test]
fn criterion_6_classical_fixtures_have_natural_strengths() {
    let started = Instant::now();
    let mut audit = Audit::new();
    for n in 1..=6 {
        let perms = perm::cyclic_group(n).expect("cyclic group builds");
        audit.check(perms.len() == n as usize, || {
            format!("cyclic({n}) has {} elements, want {n}", perms.len())
        });
        let report = perm::verify_t_wise(n, 1, &perms).expect("verification runs");
        audit.check(report.pass, || {
            format!(
                "cyclic({n}) is not 1-wise uniform: {:?}",
                report.first_violation
            )
        });
    }
    let affine = perm::affine_group(5).expect("affine group builds");
    audit.check(affine.len() == 20, || {
        format!("affine(5) has {} elements, want 20", affine.len())
    });
    let report = perm::verify_t_wise(5, 2, &affine).expect("verification runs");
    audit.check(report.pass, || {
        format!("affine(5) is not 2-wise uniform: {:?}", report.first_violation)
    });
    let small = perm::moebius_group(2, true).expect("Moebius group builds");
    audit.check(small.len() == 6, || {
        format!("unit-determinant Moebius(2) has {} elements, want 6", small.len())
    });
    let report = perm::verify_t_wise(3, 3, &small).expect("verification runs");
    audit.check(report.pass, || {
        format!(
            "Moebius(2) is not 3-wise uniform: {:?}",
            report.first_violation
        )
    });
    let large = perm::moebius_group(4, true).expect("Moebius group builds");
    audit.check(large.len() == 60, || {
        format!("unit-determinant Moebius(4) has {} elements, want 60", large.len())
    });
    let report = perm::verify_t_wise(5, 3, &large).expect("verification runs");
    audit.check(report.pass, || {
        format!(
            "Moebius(4) is not 3-wise uniform: {:?}",
            report.first_violation
        )
    });
    let elapsed = started.elapsed();
    audit.check(elapsed.as_secs() < 10, || {
        format!("fixtures took {elapsed:.2?}, over the 10 s budget")
    });
    audit.verdict(
        6,
        "cyclic, affine, and Moebius fixtures verify at strengths 1, 2, and 3",
    );
}

#[test]
fn criterion_7_fourier_identities_and_scalar_lemmas() {
    let mut audit = Audit::new();
    let oa221 = oa::instance(&OaParams::new(2, 2, 1).expect("valid")).expect("builds");
    let oa231 = oa::instance(&OaParams::new(2, 3, 1).expect("valid")).expect("builds");
    let design431 = design::instance(&DesignParams::new(4, 3, 1).expect("valid")).expect("builds");
    let design631 = design::instance(&DesignParams::new(6, 3, 1).expect("valid")).expect("builds");

    let zero_cases: [(&str, &Instance, u64); 4] = [
        ("oa(2,2,1)", &oa221, 2),
        ("oa(2,3,1)", &oa231, 4),
        ("design(4,3,1)", &design431, 2),
        ("design(6,3,1)", &design631, 18),
    ];
    for (label, instance, n) in zero_cases {
        let p = BigRational::new(BigInt::from(n), BigInt::from(instance.size()));
        let zero = TorusPoint::zero(instance.dim());
        let coeff = fourier::fourier_coefficient(instance, &p, &zero).expect("evaluates");
        audit.check(
            (coeff.re - 1.0).abs() <= 1e-12 && coeff.im.abs() <= 1e-12,
            || format!("the zero-frequency coefficient on {label} is {coeff}, want 1"),
        );
    }

    let lattice = fourier::enumerate_lattice_l(&design431).expect("lattice enumerates");
    audit.check(lattice.is_subgroup(), || {
        "the lattice is not closed under addition".to_string()
    });
    let modulus = lattice.modulus();
    let p = BigRational::new(BigInt::from(2), BigInt::from(design431.size()));
    let theta = fourier::seeded_torus_point(design431.dim(), 97, 64, 32).expect("seeds");
    let base = fourier::fourier_coefficient(&design431, &p, &theta).expect("evaluates");
    for point in lattice.points() {
        audit.check(fourier::distance_to_m(point, modulus) == 0.0, || {
            format!("lattice point {point} is not in the coarser lattice")
        });
        let at_lambda = fourier::fourier_coefficient(&design431, &p, point).expect("evaluates");
        audit.check(
            (at_lambda.re - 1.0).abs() <= 1e-12 && at_lambda.im.abs() <= 1e-12,
            || format!("the coefficient at lattice point {point} is {at_lambda}, want 1"),
        );
        let shifted = theta.add(point).expect("dimensions match");
        let coeff = fourier::fourier_coefficient(&design431, &p, &shifted).expect("evaluates");
        audit.check((coeff - base).norm() <= 1e-12, || {
            format!(
                "shifting by {point} moved the coefficient by {:.3e}",
                (coeff - base).norm()
            )
        });
    }

    let cfg = LemmaConfig {
        c: 10.0,
        ..LemmaConfig::default()
    };
    let mut scalar_points = 0u64;
    for pi in 1..=10 {
        let p = f64::from(pi) / 20.0;
        for xi in -25i32..=25 {
            let chord = fourier::chord_scalar_check(p, f64::from(xi) / 50.0).expect("in domain");
            audit.check(chord.holds, || {
                format!(
                    "chord bound fails at p = {p}, x = {}: lhs {} vs {}",
                    f64::from(xi) / 50.0,
                    chord.lhs,
                    chord.bound
                )
            });
            let taylor =
                fourier::taylor_scalar_check(p, f64::from(xi) / 25.0, &cfg).expect("in domain");
            audit.check(taylor.within_budget, || {
                format!(
                    "cubic budget fails at p = {p}, x = {}: delta {} vs {}",
                    f64::from(xi) / 25.0,
                    taylor.delta_abs,
                    taylor.budget
                )
            });
            scalar_points += 2;
        }
    }

    let theta0 = TorusPoint::from_fractions(&[(1, 16), (-1, 32), (1, 64), (1, 128)])
        .expect("fractions reduce");
    let sweep = fourier::near_zero_sweep(&oa231, 4, &theta0, &cfg, 3).expect("sweep runs");
    audit.check(sweep.len() == 4, || {
        format!("sweep produced {} reports, want 4", sweep.len())
    });
    for pair in sweep.windows(2) {
        audit.check(pair[1].delta_abs < pair[0].delta_abs, || {
            format!(
                "delta did not shrink under halving: {} -> {}",
                pair[0].delta_abs, pair[1].delta_abs
            )
        });
    }
    for report in &sweep {
        audit.check(report.within_budget, || {
            format!("delta {} over budget {}", report.delta_abs, report.budget)
        });
    }
    audit.verdict(
        7,
        &format!(
            "zero-frequency, lattice-membership, and shift identities hold to 1e-12; \
             {scalar_points} scalar checks pass; near-zero deltas shrink monotonically"
        ),
    );
}

#[test]
fn criterion_8_gaussian_prediction_tracks_the_exact_oracle() {
    let mut audit = Audit::new();
    let small_instance = oa::instance(&OaParams::new(2, 2, 1).expect("valid")).expect("builds");
    let large_instance = oa::instance(&OaParams::new(2, 3, 1).expect("valid")).expect("builds");
    let small = fourier::prediction_vs_exact(&small_instance, 2).expect("comparison runs");
    let large = fourier::prediction_vs_exact(&large_instance, 4).expect("comparison runs");
    audit.check(small.report.det == BigInt::from(4), || {
        format!("det R = {} on oa(2,2,1), want 4", small.report.det)
    });
    audit.check(
        small.report.prediction.is_some() && large.report.prediction.is_some(),
        || "a prediction is missing".to_string(),
    );
    let describe = |label: &str, n: u64, comparison: &fourier::PredictionComparison| {
        format!(
            "{label} at N = {n}: prediction {:?}, exact {} = {:.6}, ratio {:?}",
            comparison.report.prediction, comparison.exact, comparison.exact_f64, comparison.ratio
        )
    };
    let small_ratio = small.ratio.unwrap_or(f64::NAN);
    let large_ratio = large.ratio.unwrap_or(f64::NAN);
    audit.check(
        (1.0 - large_ratio).abs() < (1.0 - small_ratio).abs(),
        || {
            format!(
                "the prediction/exact ratio should move toward 1 on the larger instance, \
                 but it moves away — {}; {}",
                describe("oa(2,2,1)", 2, &small),
                describe("oa(2,3,1)", 4, &large)
            )
        },
    );
    audit.verdict(8, "the Gaussian prediction ratio improves with instance size");
}
