//! Mode labels, finite bases, states and operators.
//!
//! A [`Mode`] is one basis label of the composite OAM ⊗ path (⊗ polarization)
//! space. The OAM ladder is unbounded, so every finite computation works on a
//! [`ModeBasis`] obtained from the exact reachability closure of a set of input
//! labels through a netlist.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::Netlist;

/// Default upper bound on the number of labels a closure may contain.
pub const DEFAULT_CLOSURE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn flipped(self) -> Pol {
        match self {
            Pol::H => Pol::V,
            Pol::V => Pol::H,
        }
    }
}

/// One basis label: `oam` quanta of orbital angular momentum on propagation
/// mode `path`, optionally tagged with a polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub oam: i64,
    pub path: u32,
    pub pol: Option<Pol>,
}

impl Mode {
    pub const fn new(oam: i64, path: u32) -> Self {
        Mode { oam, path, pol: None }
    }

    pub const fn polarized(oam: i64, path: u32, pol: Pol) -> Self {
        Mode {
            oam,
            path,
            pol: Some(pol),
        }
    }

    pub fn with_oam(self, oam: i64) -> Self {
        Mode { oam, ..self }
    }

    pub fn with_path(self, path: u32) -> Self {
        Mode { path, ..self }
    }
}

// Lexicographic on (path, oam, pol).
impl Ord for Mode {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.path, self.oam, self.pol).cmp(&(other.path, other.oam, other.pol))
    }
}

impl PartialOrd for Mode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pol {
            Some(p) => write!(f, "|{}⟩_O|{}⟩_P|{:?}⟩", self.oam, self.path, p),
            None => write!(f, "|{}⟩_O|{}⟩_P", self.oam, self.path),
        }
    }
}

/// Finite, ordered, duplicate-free set of modes with index lookup.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    modes: Vec<Mode>,
    index: HashMap<Mode, usize>,
}

impl ModeBasis {
    /// Builds a basis from any collection of modes. Duplicates are merged and
    /// the result is sorted; mixing polarized and unpolarized modes is rejected.
    pub fn new(modes: impl IntoIterator<Item = Mode>) -> Result<Self> {
        let set: BTreeSet<Mode> = modes.into_iter().collect();
        let polarized = set.iter().filter(|m| m.pol.is_some()).count();
        if polarized != 0 && polarized != set.len() {
            return Err(Error::Basis(
                "polarization label must be present on all modes or on none".into(),
            ));
        }
        let modes: Vec<Mode> = set.into_iter().collect();
        let index = modes.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        Ok(ModeBasis { modes, index })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn index_of(&self, mode: &Mode) -> Option<usize> {
        self.index.get(mode).copied()
    }

    pub fn contains(&self, mode: &Mode) -> bool {
        self.index.contains_key(mode)
    }

    pub fn is_polarized(&self) -> bool {
        self.modes.first().is_some_and(|m| m.pol.is_some())
    }

    /// Number of distinct propagation paths, counted as `max(path) + 1`.
    pub fn path_count(&self) -> u32 {
        self.modes.iter().map(|m| m.path + 1).max().unwrap_or(0)
    }

    /// Stable textual listing, one mode per line.
    pub fn listing(&self) -> String {
        let mut s = String::new();
        for m in &self.modes {
            s.push_str(&m.to_string());
            s.push('\n');
        }
        s
    }

    fn summary(&self) -> String {
        let shown: Vec<String> = self.modes.iter().take(4).map(|m| m.to_string()).collect();
        if self.modes.len() > 4 {
            format!("{}, … ({} modes)", shown.join(", "), self.modes.len())
        } else {
            shown.join(", ")
        }
    }
}

impl PartialEq for ModeBasis {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

/// Single-photon state over a finite basis.
#[derive(Clone, Debug)]
pub struct PureState {
    pub basis: Arc<ModeBasis>,
    pub amplitudes: Vec<Complex64>,
}

/// One record of the state file format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub oam: i64,
    pub path: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pol: Option<Pol>,
    pub re: f64,
    pub im: f64,
}

impl PureState {
    pub fn new(basis: Arc<ModeBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if basis.len() != amplitudes.len() {
            return Err(Error::Invalid(format!(
                "{} amplitudes for a basis of {} modes",
                amplitudes.len(),
                basis.len()
            )));
        }
        Ok(PureState { basis, amplitudes })
    }

    /// Unit vector on `mode` within `basis`.
    pub fn basis_state(basis: Arc<ModeBasis>, mode: &Mode) -> Result<Self> {
        let i = basis
            .index_of(mode)
            .ok_or_else(|| Error::Invalid(format!("{mode} is not in the basis")))?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(PureState { basis, amplitudes })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn amplitude(&self, mode: &Mode) -> Complex64 {
        self.basis
            .index_of(mode)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn to_records(&self) -> Vec<StateRecord> {
        self.basis
            .modes()
            .iter()
            .zip(&self.amplitudes)
            .map(|(m, a)| StateRecord {
                oam: m.oam,
                path: m.path,
                pol: m.pol,
                re: a.re,
                im: a.im,
            })
            .collect()
    }

    /// Parses the JSON state format. The basis is the set of modes named by
    /// the records; repeated modes are rejected.
    pub fn from_records(records: &[StateRecord]) -> Result<Self> {
        let modes: Vec<Mode> = records
            .iter()
            .map(|r| Mode {
                oam: r.oam,
                path: r.path,
                pol: r.pol,
            })
            .collect();
        let basis = ModeBasis::new(modes.iter().copied())?;
        if basis.len() != records.len() {
            return Err(Error::Invalid("state file lists a mode twice".into()));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (m, r) in modes.iter().zip(records) {
            amplitudes[basis.index_of(m).unwrap()] = Complex64::new(r.re, r.im);
        }
        Ok(PureState {
            basis: Arc::new(basis),
            amplitudes,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.to_records())?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let records: Vec<StateRecord> = serde_json::from_str(text)?;
        Self::from_records(&records)
    }
}

/// Complex matrix `[out × in]` between two mode bases.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    pub basis_in: Arc<ModeBasis>,
    pub basis_out: Arc<ModeBasis>,
    pub matrix: Array2<Complex64>,
}

impl ModeOperator {
    pub fn new(
        basis_in: Arc<ModeBasis>,
        basis_out: Arc<ModeBasis>,
        matrix: Array2<Complex64>,
    ) -> Result<Self> {
        if matrix.dim() != (basis_out.len(), basis_in.len()) {
            return Err(Error::Invalid(format!(
                "matrix shape {:?} does not match bases ({} out, {} in)",
                matrix.dim(),
                basis_out.len(),
                basis_in.len()
            )));
        }
        Ok(ModeOperator {
            basis_in,
            basis_out,
            matrix,
        })
    }

    pub fn identity(basis: Arc<ModeBasis>) -> Self {
        let n = basis.len();
        let matrix = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        ModeOperator {
            basis_in: basis.clone(),
            basis_out: basis,
            matrix,
        }
    }

    pub fn entry(&self, out: &Mode, inp: &Mode) -> Complex64 {
        match (self.basis_out.index_of(out), self.basis_in.index_of(inp)) {
            (Some(i), Some(j)) => self.matrix[[i, j]],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// `max |M†M − I|`: zero iff the columns are orthonormal.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = gram(&self.matrix);
        let mut worst: f64 = 0.0;
        for ((i, j), v) in gram.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - Complex64::new(target, 0.0)).norm());
        }
        worst
    }

    /// Largest singular value, by power iteration on `M†M`.
    pub fn max_singular_value(&self) -> f64 {
        let g = gram(&self.matrix);
        let n = g.nrows();
        if n == 0 {
            return 0.0;
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64))
            .collect();
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w: Vec<Complex64> = (0..n)
                .map(|i| (0..n).map(|j| g[[i, j]] * v[j]).sum())
                .collect();
            let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm / v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            v = w.into_iter().map(|x| x / norm).collect();
            if (next - lambda).abs() <= 1e-15 * next.max(1.0) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.sqrt()
    }

    /// Sub-block with the given input and output modes (missing modes read as
    /// zero rows or columns).
    pub fn restrict(&self, inputs: &[Mode], outputs: &[Mode]) -> Result<ModeOperator> {
        let bin = Arc::new(ModeBasis::new(inputs.iter().copied())?);
        let bout = Arc::new(ModeBasis::new(outputs.iter().copied())?);
        let matrix = Array2::from_shape_fn((bout.len(), bin.len()), |(i, j)| {
            self.entry(&bout.modes()[i], &bin.modes()[j])
        });
        ModeOperator::new(bin, bout, matrix)
    }

    /// Matrix in caller-specified row/column order (no re-sorting).
    pub fn block(&self, inputs: &[Mode], outputs: &[Mode]) -> Array2<Complex64> {
        Array2::from_shape_fn((outputs.len(), inputs.len()), |(i, j)| {
            self.entry(&outputs[i], &inputs[j])
        })
    }
}

fn gram(m: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = m.dim();
    Array2::from_shape_fn((cols, cols), |(i, j)| {
        (0..rows).map(|r| m[[r, i]].conj() * m[[r, j]]).sum()
    })
}

/// Applies `op` to `state`. The state must live on the operator's input basis.
pub fn apply(op: &ModeOperator, state: &PureState) -> Result<PureState> {
    if *op.basis_in != *state.basis {
        return Err(Error::BasisMismatch {
            expected: op.basis_in.summary(),
            found: state.basis.summary(),
        });
    }
    let out = op.matrix.dot(&ndarray::Array1::from(state.amplitudes.clone()));
    PureState::new(op.basis_out.clone(), out.to_vec())
}

/// Exact label closure of `inputs` through every element of `netlist`.
///
/// Labels are propagated through the element label maps regardless of their
/// amplitude, so the result contains every label that can carry nonzero
/// amplitude at any stage. Behavioral blocks drop labels outside their
/// contract domain.
pub fn reachable_oam_closure(
    netlist: &Netlist,
    inputs: &[Mode],
    cap: usize,
) -> Result<BTreeSet<Mode>> {
    if inputs.is_empty() {
        return Err(Error::Invalid("closure needs at least one input mode".into()));
    }
    let mut all: BTreeSet<Mode> = inputs.iter().copied().collect();
    let mut current: BTreeSet<Mode> = all.clone();
    let mut buf = Vec::new();
    for stage in netlist.stages() {
        let lookup = stage.port_lookup();
        let mut next = BTreeSet::new();
        for mode in &current {
            match lookup.get(&mode.path) {
                Some(&idx) => {
                    let placed = &stage.elements[idx];
                    buf.clear();
                    placed
                        .element
                        .act(placed.direction, *mode, None, &mut buf);
                    for (m, _) in &buf {
                        next.insert(*m);
                        if all.insert(*m) && all.len() > cap {
                            return Err(Error::ClosureCap {
                                cap,
                                element: placed.describe(),
                            });
                        }
                    }
                }
                None => {
                    next.insert(*mode);
                }
            }
        }
        current = next;
    }
    Ok(all)
}

/// Labels reachable at the netlist output only.
pub fn output_closure(netlist: &Netlist, inputs: &[Mode]) -> BTreeSet<Mode> {
    let mut current: BTreeSet<Mode> = inputs.iter().copied().collect();
    let mut buf = Vec::new();
    for stage in netlist.stages() {
        let lookup = stage.port_lookup();
        let mut next = BTreeSet::new();
        for mode in &current {
            match lookup.get(&mode.path) {
                Some(&idx) => {
                    let placed = &stage.elements[idx];
                    buf.clear();
                    placed.element.act(placed.direction, *mode, None, &mut buf);
                    next.extend(buf.iter().map(|(m, _)| *m));
                }
                None => {
                    next.insert(*mode);
                }
            }
        }
        current = next;
    }
    current
}
