//! Operator extraction, oracle comparison, subspace checks, loss sweeps and
//! scaling tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::TAU;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elements::LossModel;
use crate::error::{Error, Result};
use crate::modespace::{reachable_oam_closure, Mode, ModeBasis, ModeOperator, DEFAULT_CLOSURE_CAP};
use crate::netlist::{Netlist, NetlistDocument};
use crate::synthesis::{
    build_basic_scheme, build_scheme, count_closed_form, Scheme, SchemeConfig, Variant,
};

/// Default pass threshold for oracle comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

type Column = BTreeMap<Mode, Complex64>;

/// Propagates one input label through `netlist`, calling `on_stage` with the
/// stage index and the amplitudes after that stage.
pub fn propagate_with(
    netlist: &Netlist,
    input: Mode,
    loss: Option<&LossModel>,
    mut on_stage: impl FnMut(usize, &Column),
) -> Column {
    let mut cur: Column = [(input, Complex64::new(1.0, 0.0))].into();
    let mut buf = Vec::new();
    for (i, stage) in netlist.stages().iter().enumerate() {
        let lookup = stage.port_lookup();
        let mut next = Column::new();
        for (mode, a) in cur {
            match lookup.get(&mode.path) {
                Some(&idx) => {
                    let p = &stage.elements[idx];
                    buf.clear();
                    p.element.act(p.direction, mode, loss, &mut buf);
                    for (m, b) in &buf {
                        *next.entry(*m).or_default() += a * b;
                    }
                }
                None => *next.entry(mode).or_default() += a,
            }
        }
        cur = next;
        on_stage(i, &cur);
    }
    cur
}

/// Output amplitudes of one input label.
pub fn propagate(netlist: &Netlist, input: Mode, loss: Option<&LossModel>) -> Column {
    propagate_with(netlist, input, loss, |_, _| {})
}

fn last_touch(netlist: &Netlist) -> HashMap<u32, String> {
    let mut map = HashMap::new();
    for p in netlist.placements() {
        for port in p.element.ports() {
            map.insert(port, p.describe());
        }
    }
    map
}

/// Operator of `netlist` from the `inputs` labels to `outputs`.
///
/// Without `outputs` the output basis is the union of every label the inputs
/// reach. With `outputs`, any amplitude above 1e-12 landing outside it is an
/// error naming the label and the last element on its path.
pub fn operator_of(
    netlist: &Netlist,
    inputs: &[Mode],
    outputs: Option<Arc<ModeBasis>>,
    loss: Option<&LossModel>,
) -> Result<ModeOperator> {
    let basis_in = Arc::new(ModeBasis::new(inputs.iter().copied())?);
    let columns: Vec<Column> = basis_in
        .modes()
        .iter()
        .map(|m| propagate(netlist, *m, loss))
        .collect();
    let basis_out = match outputs {
        Some(b) => {
            let last = last_touch(netlist);
            for col in &columns {
                for (m, a) in col {
                    if a.norm() > 1e-12 && !b.contains(m) {
                        return Err(Error::BasisTooSmall {
                            mode: *m,
                            element: last
                                .get(&m.path)
                                .cloned()
                                .unwrap_or_else(|| "the netlist input".to_string()),
                        });
                    }
                }
            }
            b
        }
        None => Arc::new(ModeBasis::new(columns.iter().flat_map(|c| c.keys().copied()))?),
    };
    let mut matrix = Array2::zeros((basis_out.len(), basis_in.len()));
    for (j, col) in columns.iter().enumerate() {
        for (m, a) in col {
            if let Some(i) = basis_out.index_of(m) {
                matrix[[i, j]] = *a;
            }
        }
    }
    ModeOperator::new(basis_in, basis_out, matrix)
}

/// DFT matrix U[j][k] = e^{2πijk/d}/√d.
pub fn dft_matrix(d: usize) -> Array2<Complex64> {
    let norm = 1.0 / (d as f64).sqrt();
    Array2::from_shape_fn((d, d), |(j, k)| {
        Complex64::from_polar(norm, TAU * ((j * k) % d) as f64 / d as f64)
    })
}

/// DFT on OAM labels 0..d of path 0.
pub fn dft_oracle(d: usize) -> ModeOperator {
    let basis = Arc::new(
        ModeBasis::new((0..d as i64).map(|k| Mode::new(k, 0))).expect("unpolarized basis"),
    );
    ModeOperator::new(basis.clone(), basis, dft_matrix(d)).expect("square shape")
}

/// Result of a global-phase-aligned comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedDistance {
    /// max |A − cB| with the chosen unit phase c.
    pub distance: f64,
    /// Argument of c in radians.
    pub phase: f64,
    /// False when Tr(B†A) vanished and no alignment was applied.
    pub aligned: bool,
}

/// Compares `a` with `b` up to a global phase c = Tr(B†A)/|Tr(B†A)|.
pub fn phase_aligned_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<AlignedDistance> {
    if a.dim() != b.dim() {
        return Err(Error::Invalid(format!(
            "shapes {:?} and {:?} differ",
            a.dim(),
            b.dim()
        )));
    }
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| y.conj() * x).sum();
    let (c, aligned) = if overlap.norm() > 1e-300 {
        (overlap / overlap.norm(), true)
    } else {
        (Complex64::new(1.0, 0.0), false)
    };
    let distance = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - c * y).norm())
        .fold(0.0, f64::max);
    Ok(AlignedDistance {
        distance,
        phase: c.arg(),
        aligned,
    })
}

/// F = |Tr(U†M)|² / (d·Tr(M†M)) with d the column count of U.
pub fn normalized_fidelity(m: &Array2<Complex64>, u: &Array2<Complex64>) -> Result<f64> {
    if m.dim() != u.dim() {
        return Err(Error::Invalid(format!(
            "shapes {:?} and {:?} differ",
            m.dim(),
            u.dim()
        )));
    }
    let mm: f64 = m.iter().map(|x| x.norm_sqr()).sum();
    if mm == 0.0 {
        return Err(Error::Degenerate("Tr(M†M) = 0".into()));
    }
    let overlap: Complex64 = u.iter().zip(m.iter()).map(|(x, y)| x.conj() * y).sum();
    Ok(overlap.norm_sqr() / (u.ncols() as f64 * mm))
}

/// One named check in a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Outcome of verifying a netlist against the DFT oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub d: u64,
    pub variant: String,
    pub basis_size: usize,
    pub max_deviation: f64,
    pub global_phase: f64,
    pub unitarity_residual: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Verifies a netlist whose `inputs[k]` should map to Σ_j U[j][k] `outputs[j]`.
pub fn verify_netlist(
    netlist: &Netlist,
    inputs: &[Mode],
    outputs: &[Mode],
    variant: &str,
    tolerance: f64,
    closure_cap: usize,
) -> Result<VerificationReport> {
    if inputs.len() != outputs.len() || inputs.is_empty() {
        return Err(Error::Invalid(format!(
            "{} inputs and {} outputs declared",
            inputs.len(),
            outputs.len()
        )));
    }
    let d = inputs.len();
    let closure = reachable_oam_closure(netlist, inputs, closure_cap)?;
    let op = operator_of(netlist, inputs, None, None)?;
    let block = op.block(inputs, outputs);
    let aligned = phase_aligned_distance(&block, &dft_matrix(d))?;
    let unitarity = op.unitarity_residual();
    let mut checks = vec![
        Check {
            name: "oracle".into(),
            passed: aligned.distance <= tolerance,
            value: aligned.distance,
            tolerance,
        },
        Check {
            name: "unitarity".into(),
            passed: unitarity <= 1e-10,
            value: unitarity,
            tolerance: 1e-10,
        },
    ];
    if variant == Variant::Basic.tag() && d > 2 && d <= 64 {
        let d_a = crate::synthesis::choose_factorization(d.trailing_zeros())?.0 as i64;
        for a in [1, d_a] {
            let r = subspace_phase_check_on(netlist, d, d_a, a, tolerance, closure_cap)?;
            checks.push(Check {
                name: format!("subspace a={a}"),
                passed: r.passed,
                value: r.max_deviation,
                tolerance,
            });
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        d: d as u64,
        variant: variant.to_string(),
        basis_size: closure.len(),
        max_deviation: aligned.distance,
        global_phase: aligned.phase,
        unitarity_residual: unitarity,
        checks,
        passed,
    })
}

/// Verifies a compiled scheme.
pub fn verify_scheme(scheme: &Scheme, tolerance: f64, closure_cap: usize) -> Result<VerificationReport> {
    verify_netlist(
        &scheme.netlist,
        &scheme.inputs,
        &scheme.outputs,
        scheme.config.variant.tag(),
        tolerance,
        closure_cap,
    )
}

/// Verifies a parsed netlist file against its declared modes.
pub fn verify_document(doc: &NetlistDocument, tolerance: f64, closure_cap: usize) -> Result<VerificationReport> {
    let netlist = doc.netlist()?;
    let inputs = doc.inputs();
    if inputs.len() as u64 != doc.dim {
        return Err(Error::Netlist(format!(
            "document declares {} inputs for dimension {}",
            inputs.len(),
            doc.dim
        )));
    }
    verify_netlist(&netlist, &inputs, &doc.outputs(), &doc.variant, tolerance, closure_cap)
}

/// Measured against expected prefactor for one input column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefactorSample {
    pub k: usize,
    pub measured_re: f64,
    pub measured_im: f64,
    pub expected_re: f64,
    pub expected_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceReport {
    pub d: usize,
    pub a: i64,
    pub d_a: i64,
    /// max over entries of |M − diag(prefactor)·DFT|.
    pub max_deviation: f64,
    pub samples: Vec<PrefactorSample>,
    /// True when every expected prefactor is 1 (d_A divides a).
    pub trivial_prefactor: bool,
    pub passed: bool,
}

/// Simulates inputs |k + a·d⟩ of the basic scheme and checks the outputs are
/// e^{2πi·m·a/d_A} times the DFT image on |j + a·d⟩, m = k mod d_A.
pub fn subspace_phase_check(d: u64, a: i64, tolerance: f64, closure_cap: usize) -> Result<SubspaceReport> {
    let scheme = build_basic_scheme(d)?;
    subspace_phase_check_on(
        &scheme.netlist,
        d as usize,
        scheme.config.d_a as i64,
        a,
        tolerance,
        closure_cap,
    )
}

fn subspace_phase_check_on(
    netlist: &Netlist,
    d: usize,
    d_a: i64,
    a: i64,
    tolerance: f64,
    closure_cap: usize,
) -> Result<SubspaceReport> {
    let shift = a * d as i64;
    let modes: Vec<Mode> = (0..d as i64).map(|k| Mode::new(k + shift, 0)).collect();
    reachable_oam_closure(netlist, &modes, closure_cap)?;
    let op = operator_of(netlist, &modes, None, None)?;
    let m = op.block(&modes, &modes);
    let u = dft_matrix(d);
    let mut worst: f64 = 0.0;
    let mut samples = Vec::with_capacity(d);
    for k in 0..d {
        let expected = Complex64::from_polar(1.0, TAU * ((k as i64).rem_euclid(d_a) * a) as f64 / d_a as f64);
        let measured: Complex64 = (0..d).map(|j| u[[j, k]].conj() * m[[j, k]]).sum();
        for j in 0..d {
            worst = worst.max((m[[j, k]] - expected * u[[j, k]]).norm());
        }
        samples.push(PrefactorSample {
            k,
            measured_re: measured.re,
            measured_im: measured.im,
            expected_re: expected.re,
            expected_im: expected.im,
        });
    }
    Ok(SubspaceReport {
        d,
        a,
        d_a,
        max_deviation: worst,
        samples,
        trivial_prefactor: a.rem_euclid(d_a) == 0,
        passed: worst <= tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelReport {
    pub max_deviation: f64,
    pub norm_in: f64,
    pub norm_out: f64,
    pub passed: bool,
}

/// Runs the d = 4 basic scheme on α encoded in |0..3⟩ plus β encoded in
/// |8..11⟩ and checks both blocks come out Fourier transformed.
pub fn parallel_dataset_check(alpha: &[Complex64; 4], beta: &[Complex64; 4], tolerance: f64) -> Result<ParallelReport> {
    let scheme = build_basic_scheme(4)?;
    let lo: Vec<Mode> = (0..4).map(|k| Mode::new(k, 0)).collect();
    let hi: Vec<Mode> = (8..12).map(|k| Mode::new(k, 0)).collect();
    let all: Vec<Mode> = lo.iter().chain(&hi).copied().collect();
    let norm: f64 = alpha.iter().chain(beta).map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Degenerate("both data sets are zero".into()));
    }
    let op = operator_of(&scheme.netlist, &all, None, None)?;
    let u = dft_matrix(4);
    let mut worst: f64 = 0.0;
    let mut out_norm = 0.0;
    for (block, data) in [(&lo, alpha), (&hi, beta)] {
        for j in 0..4 {
            let expected: Complex64 = (0..4).map(|k| u[[j, k]] * data[k] / norm).sum();
            let got: Complex64 = all
                .iter()
                .zip(alpha.iter().chain(beta))
                .map(|(inp, x)| op.entry(&block[j], inp) * x / norm)
                .sum();
            worst = worst.max((got - expected).norm());
            out_norm += got.norm_sqr();
        }
    }
    Ok(ParallelReport {
        max_deviation: worst,
        norm_in: 1.0,
        norm_out: out_norm.sqrt(),
        passed: worst <= tolerance,
    })
}

/// Random jointly normalized data sets drawn from a seeded generator.
pub fn random_datasets(seed: u64) -> ([Complex64; 4], [Complex64; 4]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut alpha = [Complex64::default(); 4];
    let mut beta = [Complex64::default(); 4];
    for x in alpha.iter_mut().chain(beta.iter_mut()) {
        *x = draw();
    }
    let norm: f64 = alpha.iter().chain(&beta).map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in alpha.iter_mut().chain(beta.iter_mut()) {
        *x /= norm;
    }
    (alpha, beta)
}

/// Fidelity against transmission for one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub d: u64,
    pub hologram_t: f64,
    /// (T, F) pairs in grid order.
    pub samples: Vec<(f64, f64)>,
    /// Grid values of T at which F dropped below the previous sample.
    pub monotonic_violations: Vec<f64>,
}

impl FidelityCurve {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["d", "t", "hologram_t", "fidelity"])?;
        for (t, f) in &self.samples {
            wr.write_record([
                self.d.to_string(),
                t.to_string(),
                self.hologram_t.to_string(),
                f.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Evenly spaced grid from `lo` to `hi` with `steps` points.
pub fn t_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![hi],
        _ => (0..steps)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / (steps - 1) as f64;
                (t * 1e12).round() / 1e12
            })
            .collect(),
    }
}

/// Normalized fidelity of the lossy basic scheme for each T on the grid.
pub fn loss_sweep(d: u64, grid: &[f64], hologram_t: f64) -> Result<FidelityCurve> {
    let scheme = build_basic_scheme(d)?;
    loss_sweep_on(&scheme, grid, hologram_t)
}

/// As [`loss_sweep`] for an already compiled scheme of any variant.
pub fn loss_sweep_on(scheme: &Scheme, grid: &[f64], hologram_t: f64) -> Result<FidelityCurve> {
    let u = dft_matrix(scheme.inputs.len());
    let samples = grid
        .par_iter()
        .map(|&t| {
            let lm = LossModel::new(t, hologram_t)?;
            let op = operator_of(&scheme.netlist, &scheme.inputs, None, Some(&lm))?;
            let m = op.block(&scheme.inputs, &scheme.outputs);
            Ok((t, normalized_fidelity(&m, &u)?))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let mut order: Vec<(f64, f64)> = samples.clone();
    order.sort_by(|x, y| x.0.total_cmp(&y.0));
    let monotonic_violations = order
        .windows(2)
        .filter(|w| w[1].1 < w[0].1 - 1e-12)
        .map(|w| w[1].0)
        .collect();
    Ok(FidelityCurve {
        d: scheme.config.d,
        hologram_t,
        samples,
        monotonic_violations,
    })
}

/// One row of the scaling table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: u64,
    pub variant: String,
    pub ours: u64,
    pub semi_brute_force: u64,
    pub recursive: f64,
    pub traditional: u64,
}

/// Beam-splitter counts of each variant next to the reference baselines.
/// Variants that do not exist for a given exponent are skipped.
pub fn scaling_table(variants: &[Variant], exponents: std::ops::RangeInclusive<u32>) -> Result<Vec<ScalingRow>> {
    if exponents.is_empty() {
        return Err(Error::Invalid("empty exponent range".into()));
    }
    let mut rows = Vec::new();
    for m in exponents {
        let d = 1u64 << m;
        let lg = m as u64;
        for v in variants {
            let cfg = match SchemeConfig::new(d, *v) {
                Ok(c) => c,
                Err(Error::ParityRestriction { .. }) => continue,
                Err(e) => return Err(e),
            };
            rows.push(ScalingRow {
                d,
                variant: v.tag().to_string(),
                ours: count_closed_form(&cfg).splitter_total(),
                semi_brute_force: 2 * (d - 1) + d / 2 * lg,
                recursive: 6.1412 * d as f64,
                traditional: d / 2 * lg,
            });
        }
    }
    Ok(rows)
}

pub fn write_scaling_csv<W: std::io::Write>(rows: &[ScalingRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Number of paths carrying amplitude after each block, for the declared
/// inputs of a scheme.
pub fn occupied_paths_per_block(scheme: &Scheme) -> Vec<(String, usize)> {
    let stages = scheme.netlist.stages();
    let mut occupied: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); stages.len()];
    for inp in &scheme.inputs {
        propagate_with(&scheme.netlist, *inp, None, |i, col| {
            for (m, a) in col {
                if a.norm() > 1e-12 {
                    occupied[i].insert(m.path);
                }
            }
        });
    }
    let mut out: Vec<(String, usize)> = Vec::new();
    for (i, s) in stages.iter().enumerate() {
        let boundary = i + 1 == stages.len() || stages[i + 1].block != s.block;
        if boundary {
            out.push((s.block.clone(), occupied[i].len()));
        }
    }
    out
}

/// Beam-splitter depth of the basic scheme alongside 7.5·M.
pub fn depth_trend(exponents: std::ops::RangeInclusive<u32>) -> Result<Vec<(u64, usize, f64)>> {
    exponents
        .map(|m| {
            let s = build_scheme(&SchemeConfig::new(1 << m, Variant::Basic)?)?;
            Ok((1u64 << m, s.netlist.splitter_depth(), 7.5 * m as f64))
        })
        .collect()
}

/// Default closure cap re-exported for callers of this module.
pub const CLOSURE_CAP: usize = DEFAULT_CLOSURE_CAP;
