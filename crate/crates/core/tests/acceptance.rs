//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use twistfft::analysis::{
    loss_sweep, normalized_fidelity, operator_of, parallel_dataset_check, random_datasets,
    subspace_phase_check, t_grid, CLOSURE_CAP,
};
use twistfft::synthesis::{
    brute_force_optimal_split, build_basic_scheme, choose_factorization, count_closed_form,
    count_structural, CountKind,
};
use twistfft::{build_scheme, LossModel, Mode, Scheme, SchemeConfig, Variant};

const ORACLE_TOL: f64 = 1e-9;
const PAIR_TOL: f64 = 0.03;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Reference DFT written out directly from e^{2πijk/d}/√d.
fn reference_dft(d: usize) -> Vec<Vec<Complex64>> {
    (0..d)
        .map(|j| {
            (0..d)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
                    c(ang.cos(), ang.sin()) / (d as f64).sqrt()
                })
                .collect()
        })
        .collect()
}

/// Largest entry deviation after the best global phase.
fn aligned_deviation(m: &Array2<Complex64>, u: &[Vec<Complex64>]) -> f64 {
    let d = u.len();
    let mut overlap = c(0.0, 0.0);
    for j in 0..d {
        for k in 0..d {
            overlap += u[j][k].conj() * m[[j, k]];
        }
    }
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    let mut worst: f64 = 0.0;
    for j in 0..d {
        for k in 0..d {
            worst = worst.max((m[[j, k]] - phase * u[j][k]).norm());
        }
    }
    worst
}

fn scheme_deviation(s: &Scheme) -> f64 {
    let op = operator_of(&s.netlist, &s.inputs, None, None).expect("operator");
    aligned_deviation(&op.block(&s.inputs, &s.outputs), &reference_dft(s.inputs.len()))
}

fn log2(x: u64) -> u64 {
    x.trailing_zeros() as u64
}

fn n_sorter(d: u64) -> u64 {
    2 * (d - 1)
}

fn n_pf(d: u64) -> u64 {
    d / 2 * log2(d)
}

fn n_swap(a: u64, b: u64) -> u64 {
    let (hi, lo) = (a.max(b), a.min(b));
    hi / 2 * log2(hi) + lo * log2(lo) + hi + 1 - 2 * lo
}

fn basic_total(a: u64, b: u64) -> u64 {
    n_sorter(a) + n_pf(a) + n_sorter(b) + n_pf(b) + 3 * n_swap(a, b)
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [2u64, 4, 8, 16, 32] {
        let dev = scheme_deviation(&build_basic_scheme(d).map_err(|e| e.to_string())?);
        ensure(dev <= ORACLE_TOL, || format!("d={d}: deviation {dev:e}"))?;
        worst = worst.max(dev);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("max deviation {worst:.2e} over d=2..32 in {secs:.2} s"))
}

fn c2_worked_example() -> Outcome {
    let s = build_basic_scheme(4).map_err(|e| e.to_string())?;
    let op = operator_of(&s.netlist, &s.inputs, None, None).map_err(|e| e.to_string())?;
    let expected = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
    let mut worst: f64 = 0.0;
    for (j, e) in expected.iter().enumerate() {
        worst = worst.max((op.entry(&Mode::new(j as i64, 0), &Mode::new(1, 0)) - e).norm());
    }
    ensure(worst <= ORACLE_TOL, || format!("deviation {worst:e}"))?;
    Ok(format!("|1⟩ -> (|0⟩ + i|1⟩ - |2⟩ - i|3⟩)/2, deviation {worst:.2e}"))
}

fn c3_element_counts() -> Outcome {
    let basic16 = count_closed_form(&SchemeConfig::new(16, Variant::Basic).unwrap());
    let bs = basic16.get(CountKind::BeamSplitter).unwrap_or(0);
    ensure(bs == 47, || format!("basic d=16 has {bs} beam splitters"))?;
    let pol16 = count_closed_form(&SchemeConfig::new(16, Variant::PolEnhanced).unwrap()).splitter_total();
    ensure(pol16 == 33, || format!("pol d=16 has {pol16} splitters"))?;
    for m in 1..=10u32 {
        let d = 1u64 << m;
        let cfg = SchemeConfig::new(d, Variant::Basic).unwrap();
        let structural = build_scheme(&cfg).map_err(|e| e.to_string())?.netlist.beam_splitter_count();
        let formula = count_closed_form(&cfg).get(CountKind::BeamSplitter).unwrap_or(0);
        let (a, b) = (1u64 << (m - m / 2), 1u64 << (m / 2));
        let independent = if m == 1 { formula } else { basic_total(a, b) };
        ensure(structural == formula && formula == independent, || {
            format!("M={m}: structural {structural}, closed form {formula}, reference {independent}")
        })?;
    }
    let cfg = SchemeConfig::new(512, Variant::PathEnhanced).unwrap();
    let path512 = count_closed_form(&cfg).splitter_total();
    ensure(path512 < 2304, || format!("path-enhanced d=512 uses {path512}"))?;
    let s = build_scheme(&cfg).map_err(|e| e.to_string())?;
    let structural512 = count_structural(&s.netlist, &cfg).splitter_total();
    ensure(structural512 == path512, || format!("structural {structural512} vs {path512}"))?;
    Ok(format!("basic(16)=47, pol(16)=33, M<=10 agree, path(512)={path512} < 2304"))
}

fn c4_optimality() -> Outcome {
    let start = Instant::now();
    for m in 1..=24u32 {
        let (a, b, n) = brute_force_optimal_split(m).map_err(|e| e.to_string())?;
        ensure((a, b) == choose_factorization(m).unwrap(), || format!("M={m}: split ({a},{b})"))?;
        let best = (0..=m)
            .map(|j| basic_total(1 << (m - j), 1 << j))
            .min()
            .unwrap();
        let chosen = basic_total(1 << (m - m / 2), 1 << (m / 2));
        ensure(chosen == best && n == best, || format!("M={m}: chosen {chosen}, best {best}, library {n}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, || format!("took {secs:.3} s"))?;
    Ok(format!("optimal split reproduced for M=1..24 in {:.1} ms", secs * 1e3))
}

fn c5_subspace_periodicity() -> Outcome {
    let mut checked = 0;
    for d in [4u64, 8, 16] {
        let d_a = choose_factorization(d.trailing_zeros()).unwrap().0 as i64;
        for a in [0, 1, 2, 3, d_a, 2 * d_a] {
            let r = subspace_phase_check(d, a, ORACLE_TOL, CLOSURE_CAP).map_err(|e| e.to_string())?;
            for s in &r.samples {
                let ang = 2.0 * std::f64::consts::PI * ((s.k as i64 % d_a) * a) as f64 / d_a as f64;
                let expected = c(ang.cos(), ang.sin());
                let measured = c(s.measured_re, s.measured_im);
                ensure((measured - expected).norm() <= ORACLE_TOL, || {
                    format!("d={d} a={a} k={}: prefactor {measured}, expected {expected}", s.k)
                })?;
                if a % d_a == 0 {
                    ensure((measured - 1.0).norm() <= ORACLE_TOL, || format!("d={d} a={a}: prefactor not 1"))?;
                }
            }
            ensure(r.passed, || format!("d={d} a={a}: deviation {:e}", r.max_deviation))?;
            checked += 1;
        }
    }
    for seed in [1u64, 42, 2024, 77777] {
        let (alpha, beta) = random_datasets(seed);
        let r = parallel_dataset_check(&alpha, &beta, ORACLE_TOL).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("seed {seed}: deviation {:e}", r.max_deviation))?;
    }
    Ok(format!("{checked} (d, a) pairs and 4 two-dataset seeds"))
}

fn c6_variants() -> Outcome {
    let cases = [
        (Variant::PolEnhanced, vec![4u64, 16]),
        (Variant::PathEnhanced, vec![2, 4, 8, 16]),
        (Variant::PolPathEnhanced, vec![4, 16]),
    ];
    let mut worst: f64 = 0.0;
    for (v, dims) in cases {
        for d in dims {
            let s = build_scheme(&SchemeConfig::new(d, v).unwrap()).map_err(|e| e.to_string())?;
            let dev = scheme_deviation(&s);
            ensure(dev <= ORACLE_TOL, || format!("{v} d={d}: deviation {dev:e}"))?;
            worst = worst.max(dev);
        }
    }
    Ok(format!("all variant blocks match, max deviation {worst:.2e}"))
}

fn c7_loss_model() -> Outcome {
    for d in [2u64, 4, 8, 16] {
        let f = loss_sweep(d, &[1.0], 1.0).map_err(|e| e.to_string())?.samples[0].1;
        ensure((f - 1.0).abs() <= 1e-9, || format!("d={d}: F={f} at unit transmission"))?;
    }
    let s = build_basic_scheme(8).map_err(|e| e.to_string())?;
    let lm = LossModel::new(0.93, 0.9).unwrap();
    let m = operator_of(&s.netlist, &s.inputs, None, Some(&lm))
        .map_err(|e| e.to_string())?
        .block(&s.inputs, &s.outputs);
    let u = Array2::from_shape_fn((8, 8), |(j, k)| reference_dft(8)[j][k]);
    let f1 = normalized_fidelity(&m, &u).map_err(|e| e.to_string())?;
    let f2 = normalized_fidelity(&m.mapv(|x| x * c(0.4, -0.7)), &u).map_err(|e| e.to_string())?;
    ensure((f1 - f2).abs() <= 1e-12, || format!("scaling changed F from {f1} to {f2}"))?;
    let grid = t_grid(0.9, 1.0, 21);
    let f8 = loss_sweep(8, &grid, 0.9).map_err(|e| e.to_string())?;
    let f16 = loss_sweep(16, &grid, 0.9).map_err(|e| e.to_string())?;
    let gap = f8
        .samples
        .iter()
        .zip(&f16.samples)
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    ensure(gap <= PAIR_TOL, || format!("max |F16 - F8| = {gap:.4}"))?;
    let violations: Vec<f64> = f8.monotonic_violations.iter().chain(&f16.monotonic_violations).copied().collect();
    ensure(violations.is_empty(), || format!("F decreased at T = {violations:?}"))?;
    Ok(format!("F(1)=1, scale invariant, max |F16 - F8| = {gap:.4} <= {PAIR_TOL}, monotone"))
}

fn c8_golden_stability() -> Outcome {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden");
    for d in [2u64, 4, 8] {
        let first = build_basic_scheme(d).unwrap().document(None).to_json().map_err(|e| e.to_string())?;
        let second = build_basic_scheme(d).unwrap().document(None).to_json().map_err(|e| e.to_string())?;
        ensure(first == second, || format!("d={d}: two runs differ"))?;
        let path = dir.join(format!("basic_d{d}.json"));
        let stored = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure(stored == first, || format!("d={d}: differs from {}", path.display()))?;
    }
    Ok("golden netlists for d=2, 4, 8 are byte-stable".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 oracle equivalence", c1_oracle_equivalence),
        ("2 worked example", c2_worked_example),
        ("3 element counts", c3_element_counts),
        ("4 optimality", c4_optimality),
        ("5 subspace periodicity", c5_subspace_periodicity),
        ("6 variant correctness", c6_variants),
        ("7 loss model", c7_loss_model),
        ("8 golden stability", c8_golden_stability),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
