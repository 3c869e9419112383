//! Optical elements as exact mode-label transfer rules.
//!
//! Every element acts on one input [`Mode`] and returns a short list of output
//! modes with complex amplitudes. Modes on paths the element does not touch
//! pass through unchanged. Traversing an element backward applies the inverse
//! of its forward operator.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blocks;
use crate::error::{Error, Result};
use crate::modespace::{Mode, Pol};

/// Traversal direction of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Intensity transmissions per element kind.
///
/// Beam splitters, polarizing beam splitters, Dove prisms and wave plates use
/// `t`; holograms use `t_holo`. Mirrors, phase shifters and path permutations
/// are lossless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub t: f64,
    pub t_holo: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel { t: 1.0, t_holo: 0.90 }
    }
}

impl LossModel {
    pub fn new(t: f64, t_holo: f64) -> Result<Self> {
        for (name, v) in [("T", t), ("hologram T", t_holo)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Invalid(format!("{name} = {v} is outside (0, 1]")));
            }
        }
        Ok(LossModel { t, t_holo })
    }

    pub fn lossless() -> Self {
        LossModel { t: 1.0, t_holo: 1.0 }
    }
}

/// One element instance with its ports and parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    /// |k⟩ → −e^{2iαk}|−k⟩.
    Dove { path: u32, alpha: f64 },
    /// |k⟩ → |k+m⟩.
    Hologram { path: u32, m: i64 },
    /// |k⟩ → e^{iφ}|k⟩.
    Phase { path: u32, phi: f64 },
    /// |k⟩ → −|−k⟩.
    Mirror { path: u32 },
    /// Symmetric beam splitter; reflection flips the OAM sign.
    BeamSplitter { p1: u32, p2: u32 },
    /// H transmits; V reflects to the other port with the OAM sign flipped.
    Pbs { p1: u32, p2: u32 },
    /// Half-wave plate with fast axis at `theta`.
    Hwp { path: u32, theta: f64 },
    /// Path `from[i]` is routed to `to[i]`.
    PathPermutation { from: Vec<u32>, to: Vec<u32> },
    /// Behavioral OAM exchanger of order `m`.
    Exchanger { m: i64, p1: u32, p2: u32 },
    /// Behavioral holo-beam splitter of order (α, m).
    HoloBs { alpha: f64, m: i64, p1: u32, p2: u32 },
    /// Behavioral swap from `inputs` to `outputs` with multiplicity `mu`.
    Swap {
        inputs: Vec<u32>,
        outputs: Vec<u32>,
        mu: i64,
    },
    /// Behavioral OAM sorter fed on `ports[0]`.
    SorterContract { ports: Vec<u32>, mu: i64 },
}

/// Element kind tags used for counting and serialization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    BeamSplitter,
    Pbs,
    Dove,
    Hologram,
    Phase,
    Mirror,
    Hwp,
    PathPermutation,
    Exchanger,
    HoloBs,
    Swap,
    SorterContract,
}

impl Kind {
    pub const ALL: [Kind; 12] = [
        Kind::BeamSplitter,
        Kind::Pbs,
        Kind::Dove,
        Kind::Hologram,
        Kind::Phase,
        Kind::Mirror,
        Kind::Hwp,
        Kind::PathPermutation,
        Kind::Exchanger,
        Kind::HoloBs,
        Kind::Swap,
        Kind::SorterContract,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Kind::BeamSplitter => "bs",
            Kind::Pbs => "pbs",
            Kind::Dove => "dove",
            Kind::Hologram => "hologram",
            Kind::Phase => "phase",
            Kind::Mirror => "mirror",
            Kind::Hwp => "hwp",
            Kind::PathPermutation => "permutation",
            Kind::Exchanger => "exchanger",
            Kind::HoloBs => "holo-bs",
            Kind::Swap => "swap",
            Kind::SorterContract => "sorter-contract",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn is_behavioral(self) -> bool {
        matches!(
            self,
            Kind::Exchanger | Kind::HoloBs | Kind::Swap | Kind::SorterContract
        )
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn is_pow2(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

impl Element {
    pub fn kind(&self) -> Kind {
        match self {
            Element::Dove { .. } => Kind::Dove,
            Element::Hologram { .. } => Kind::Hologram,
            Element::Phase { .. } => Kind::Phase,
            Element::Mirror { .. } => Kind::Mirror,
            Element::BeamSplitter { .. } => Kind::BeamSplitter,
            Element::Pbs { .. } => Kind::Pbs,
            Element::Hwp { .. } => Kind::Hwp,
            Element::PathPermutation { .. } => Kind::PathPermutation,
            Element::Exchanger { .. } => Kind::Exchanger,
            Element::HoloBs { .. } => Kind::HoloBs,
            Element::Swap { .. } => Kind::Swap,
            Element::SorterContract { .. } => Kind::SorterContract,
        }
    }

    /// Every path the element touches, sorted.
    pub fn ports(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = match self {
            Element::Dove { path, .. }
            | Element::Hologram { path, .. }
            | Element::Phase { path, .. }
            | Element::Mirror { path }
            | Element::Hwp { path, .. } => [*path].into(),
            Element::BeamSplitter { p1, p2 }
            | Element::Pbs { p1, p2 }
            | Element::Exchanger { p1, p2, .. }
            | Element::HoloBs { p1, p2, .. } => [*p1, *p2].into(),
            Element::PathPermutation { from, .. } => from.iter().copied().collect(),
            Element::Swap {
                inputs, outputs, ..
            } => inputs.iter().chain(outputs).copied().collect(),
            Element::SorterContract { ports, .. } => ports.iter().copied().collect(),
        };
        set.into_iter().collect()
    }

    /// Ports in the order the element's definition lists them, as entry ports.
    pub fn in_ports(&self) -> Vec<u32> {
        match self {
            Element::Dove { path, .. }
            | Element::Hologram { path, .. }
            | Element::Phase { path, .. }
            | Element::Mirror { path }
            | Element::Hwp { path, .. } => vec![*path],
            Element::BeamSplitter { p1, p2 }
            | Element::Pbs { p1, p2 }
            | Element::Exchanger { p1, p2, .. }
            | Element::HoloBs { p1, p2, .. } => vec![*p1, *p2],
            Element::PathPermutation { from, .. } => from.clone(),
            Element::Swap { inputs, .. } => inputs.clone(),
            Element::SorterContract { ports, .. } => ports.clone(),
        }
    }

    /// Ports in definition order, as exit ports.
    pub fn out_ports(&self) -> Vec<u32> {
        match self {
            Element::PathPermutation { to, .. } => to.clone(),
            Element::Swap { outputs, .. } => outputs.clone(),
            _ => self.in_ports(),
        }
    }

    /// Checks parameter and port invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Netlist(msg));
        match self {
            Element::Dove { alpha, .. } if !alpha.is_finite() => {
                bad(format!("Dove angle {alpha} is not finite"))
            }
            Element::Phase { phi, .. } if !phi.is_finite() => {
                bad(format!("phase {phi} is not finite"))
            }
            Element::Hwp { theta, .. } if !theta.is_finite() => {
                bad(format!("wave plate angle {theta} is not finite"))
            }
            Element::BeamSplitter { p1, p2 } | Element::Pbs { p1, p2 } if p1 == p2 => {
                bad(format!("{} ports must differ (both {p1})", self.kind()))
            }
            Element::Exchanger { m, p1, p2 } => {
                if *m == 0 {
                    return Err(Error::ZeroOrder);
                }
                if p1 == p2 {
                    return bad(format!("exchanger ports must differ (both {p1})"));
                }
                Ok(())
            }
            Element::HoloBs { alpha, m, p1, p2 } => {
                if *m == 0 {
                    return Err(Error::ZeroOrder);
                }
                if p1 == p2 || !alpha.is_finite() {
                    return bad("holo-beam splitter needs distinct ports and finite α".into());
                }
                Ok(())
            }
            Element::PathPermutation { from, to } => {
                let a: BTreeSet<u32> = from.iter().copied().collect();
                let b: BTreeSet<u32> = to.iter().copied().collect();
                if from.len() != to.len() || a.len() != from.len() || a != b {
                    return bad(format!("permutation {from:?} -> {to:?} is not a bijection"));
                }
                Ok(())
            }
            Element::Swap {
                inputs,
                outputs,
                mu,
            } => {
                if *mu < 1 {
                    return bad(format!("swap multiplicity {mu} must be positive"));
                }
                if !is_pow2(inputs.len()) || !is_pow2(outputs.len()) {
                    return Err(Error::NotPowerOfTwo(if is_pow2(inputs.len()) {
                        outputs.len() as u64
                    } else {
                        inputs.len() as u64
                    }));
                }
                if outputs.len() > inputs.len() {
                    return bad(format!(
                        "swap with {} outputs exceeds its {} inputs",
                        outputs.len(),
                        inputs.len()
                    ));
                }
                let a: BTreeSet<u32> = inputs.iter().copied().collect();
                let b: BTreeSet<u32> = outputs.iter().copied().collect();
                if a.len() != inputs.len() || b.len() != outputs.len() {
                    return bad("swap lists a port twice".into());
                }
                Ok(())
            }
            Element::SorterContract { ports, mu } => {
                if *mu < 1 {
                    return bad(format!("sorter multiplicity {mu} must be positive"));
                }
                if !is_pow2(ports.len()) {
                    return Err(Error::NotPowerOfTwo(ports.len() as u64));
                }
                let a: BTreeSet<u32> = ports.iter().copied().collect();
                if a.len() != ports.len() {
                    return bad("sorter lists a port twice".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Number of physical beam splitters represented by this element.
    pub fn beam_splitter_count(&self) -> u64 {
        match self {
            Element::BeamSplitter { .. } => 1,
            Element::Exchanger { .. } => 2,
            Element::HoloBs { .. } => 1,
            Element::Swap {
                inputs, outputs, ..
            } => blocks::swap_bs_count(inputs.len() as u64, outputs.len() as u64),
            Element::SorterContract { ports, .. } => blocks::sorter_bs_count(ports.len() as u64),
            _ => 0,
        }
    }

    /// Amplitude transmission factor for one passage through the element.
    fn loss_factor(&self, lm: &LossModel, mode: &Mode, out: &Mode) -> f64 {
        match self {
            Element::BeamSplitter { .. }
            | Element::Pbs { .. }
            | Element::Dove { .. }
            | Element::Hwp { .. } => lm.t.sqrt(),
            Element::Hologram { .. } => lm.t_holo.sqrt(),
            Element::Mirror { .. } | Element::Phase { .. } | Element::PathPermutation { .. } => {
                1.0
            }
            Element::Exchanger { .. } => lm.t,
            Element::HoloBs { .. } => lm.t.sqrt(),
            Element::SorterContract { ports, .. } => {
                lm.t.powi(ports.len().trailing_zeros() as i32)
            }
            Element::Swap {
                inputs, outputs, ..
            } => {
                let pos = |list: &[u32], p: u32| list.iter().position(|&x| x == p).unwrap_or(0);
                let (a, b) = if inputs.contains(&mode.path) && outputs.contains(&out.path) {
                    (pos(inputs, mode.path), pos(outputs, out.path))
                } else {
                    (pos(inputs, out.path), pos(outputs, mode.path))
                };
                let len = blocks::swap_route_length(a as u64, b as u64);
                lm.t.sqrt().powi(len as i32)
            }
        }
    }

    /// Pushes the image of `mode` onto `out`. `loss` selects the lossy action.
    pub fn act(
        &self,
        dir: Direction,
        mode: Mode,
        loss: Option<&LossModel>,
        out: &mut Vec<(Mode, Complex64)>,
    ) {
        let start = out.len();
        self.act_lossless(dir, mode, out);
        if let Some(lm) = loss {
            for (m, a) in &mut out[start..] {
                *a *= self.loss_factor(lm, &mode, m);
            }
        }
    }

    fn act_lossless(&self, dir: Direction, mode: Mode, out: &mut Vec<(Mode, Complex64)>) {
        let k = mode.oam;
        let back = dir == Direction::Backward;
        match self {
            Element::Dove { path, alpha } if mode.path == *path => {
                out.push((mode.with_oam(-k), -Complex64::from_polar(1.0, 2.0 * alpha * k as f64)));
            }
            Element::Hologram { path, m } if mode.path == *path => {
                let shift = if back { -m } else { *m };
                out.push((mode.with_oam(k + shift), c(1.0, 0.0)));
            }
            Element::Phase { path, phi } if mode.path == *path => {
                let phi = if back { -phi } else { *phi };
                out.push((mode, Complex64::from_polar(1.0, phi)));
            }
            Element::Mirror { path } if mode.path == *path => {
                out.push((mode.with_oam(-k), c(-1.0, 0.0)));
            }
            Element::BeamSplitter { p1, p2 } if mode.path == *p1 => {
                out.push((mode, c(FRAC_1_SQRT_2, 0.0)));
                out.push((Mode { oam: -k, path: *p2, pol: mode.pol }, c(FRAC_1_SQRT_2, 0.0)));
            }
            Element::BeamSplitter { p1, p2 } if mode.path == *p2 => {
                out.push((Mode { oam: -k, path: *p1, pol: mode.pol }, c(FRAC_1_SQRT_2, 0.0)));
                out.push((mode, c(-FRAC_1_SQRT_2, 0.0)));
            }
            Element::Pbs { p1, p2 } if mode.path == *p1 || mode.path == *p2 => {
                if mode.pol == Some(Pol::V) {
                    let other = if mode.path == *p1 { *p2 } else { *p1 };
                    out.push((Mode { oam: -k, path: other, pol: mode.pol }, c(1.0, 0.0)));
                } else {
                    out.push((mode, c(1.0, 0.0)));
                }
            }
            Element::Hwp { path, theta } if mode.path == *path => match mode.pol {
                Some(p) => {
                    let (s, co) = (2.0 * theta).sin_cos();
                    let (same, cross) = match p {
                        Pol::H => (co, s),
                        Pol::V => (-co, s),
                    };
                    if cross.abs() > 1e-15 {
                        out.push((Mode { pol: Some(p.flipped()), ..mode }, c(cross, 0.0)));
                    }
                    if same.abs() > 1e-15 {
                        out.push((mode, c(same, 0.0)));
                    }
                }
                None => out.push((mode, c(1.0, 0.0))),
            },
            Element::PathPermutation { from, to } => {
                let (src, dst) = if back { (to, from) } else { (from, to) };
                match src.iter().position(|&p| p == mode.path) {
                    Some(i) => out.push((mode.with_path(dst[i]), c(1.0, 0.0))),
                    None => out.push((mode, c(1.0, 0.0))),
                }
            }
            Element::Exchanger { m, p1, p2 } if mode.path == *p1 || mode.path == *p2 => {
                let first = mode.path == *p1;
                for (dk, on_first, amp) in blocks::exchanger_action(*m, first, k, back).unwrap_or_default() {
                    let path = if on_first { *p1 } else { *p2 };
                    out.push((Mode { oam: k + dk, path, pol: mode.pol }, amp));
                }
            }
            Element::HoloBs { alpha, m, p1, p2 } if mode.path == *p1 || mode.path == *p2 => {
                let first = mode.path == *p1;
                for (dk, on_first, amp) in blocks::holo_bs_action(*alpha, *m, first, back).unwrap_or_default() {
                    let path = if on_first { *p1 } else { *p2 };
                    out.push((Mode { oam: k + dk, path, pol: mode.pol }, amp));
                }
            }
            Element::Swap {
                inputs,
                outputs,
                mu,
            } => {
                let (src, dst) = if back { (outputs, inputs) } else { (inputs, outputs) };
                if let Some(p) = src.iter().position(|&x| x == mode.path) {
                    if let Ok((oam, q)) = blocks::swap_map(
                        inputs.len() as i64,
                        outputs.len() as i64,
                        *mu,
                        back,
                        k,
                        p,
                    ) {
                        out.push((Mode { oam, path: dst[q], pol: mode.pol }, c(1.0, 0.0)));
                    }
                } else if !self.ports().contains(&mode.path) {
                    out.push((mode, c(1.0, 0.0)));
                }
            }
            Element::SorterContract { ports, mu } => {
                if let Some(p) = ports.iter().position(|&x| x == mode.path) {
                    if let Ok((oam, q)) = blocks::sorter_map(ports.len() as i64, *mu, back, k, p) {
                        out.push((Mode { oam, path: ports[q], pol: mode.pol }, c(1.0, 0.0)));
                    }
                } else {
                    out.push((mode, c(1.0, 0.0)));
                }
            }
            _ => out.push((mode, c(1.0, 0.0))),
        }
    }

    /// Parameters by name, as doubles.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Element::Dove { alpha, .. } => vec![("alpha", *alpha)],
            Element::Hologram { m, .. } => vec![("m", *m as f64)],
            Element::Phase { phi, .. } => vec![("phi", *phi)],
            Element::Hwp { theta, .. } => vec![("theta", *theta)],
            Element::Exchanger { m, .. } => vec![("m", *m as f64)],
            Element::HoloBs { alpha, m, .. } => vec![("alpha", *alpha), ("m", *m as f64)],
            Element::Swap { mu, .. } | Element::SorterContract { mu, .. } => {
                vec![("mu", *mu as f64)]
            }
            _ => vec![],
        }
    }

    /// Rebuilds an element from its serialized pieces.
    pub fn from_parts(
        kind: Kind,
        param: impl Fn(&str) -> Result<f64>,
        in_ports: &[u32],
        out_ports: &[u32],
    ) -> Result<Element> {
        let int = |name: &str| -> Result<i64> {
            let v = param(name)?;
            if v.fract() != 0.0 || !v.is_finite() {
                return Err(Error::Netlist(format!("parameter {name} = {v} must be an integer")));
            }
            Ok(v as i64)
        };
        let one = || -> Result<u32> {
            match in_ports {
                [p] => Ok(*p),
                _ => Err(Error::Netlist(format!("{kind} expects one port, got {in_ports:?}"))),
            }
        };
        let two = || -> Result<(u32, u32)> {
            match in_ports {
                [a, b] => Ok((*a, *b)),
                _ => Err(Error::Netlist(format!("{kind} expects two ports, got {in_ports:?}"))),
            }
        };
        let e = match kind {
            Kind::Dove => Element::Dove { path: one()?, alpha: param("alpha")? },
            Kind::Hologram => Element::Hologram { path: one()?, m: int("m")? },
            Kind::Phase => Element::Phase { path: one()?, phi: param("phi")? },
            Kind::Mirror => Element::Mirror { path: one()? },
            Kind::Hwp => Element::Hwp { path: one()?, theta: param("theta")? },
            Kind::BeamSplitter => {
                let (p1, p2) = two()?;
                Element::BeamSplitter { p1, p2 }
            }
            Kind::Pbs => {
                let (p1, p2) = two()?;
                Element::Pbs { p1, p2 }
            }
            Kind::Exchanger => {
                let (p1, p2) = two()?;
                Element::Exchanger { m: int("m")?, p1, p2 }
            }
            Kind::HoloBs => {
                let (p1, p2) = two()?;
                Element::HoloBs { alpha: param("alpha")?, m: int("m")?, p1, p2 }
            }
            Kind::PathPermutation => Element::PathPermutation {
                from: in_ports.to_vec(),
                to: out_ports.to_vec(),
            },
            Kind::Swap => Element::Swap {
                inputs: in_ports.to_vec(),
                outputs: out_ports.to_vec(),
                mu: int("mu")?,
            },
            Kind::SorterContract => Element::SorterContract {
                ports: in_ports.to_vec(),
                mu: int("mu")?,
            },
        };
        if !matches!(kind, Kind::PathPermutation | Kind::Swap) && out_ports != e.out_ports() {
            return Err(Error::Netlist(format!(
                "{kind} out ports {out_ports:?} do not match in ports {in_ports:?}"
            )));
        }
        e.validate()?;
        Ok(e)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())?;
        let params = self.params();
        if !params.is_empty() {
            let s: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, "({})", s.join(", "))?;
        }
        write!(f, " on paths {:?}", self.in_ports())
    }
}

/// Forward action of `e` on `m`.
pub fn primitive_action(e: &Element, m: Mode) -> Vec<(Mode, Complex64)> {
    let mut out = Vec::new();
    e.act(Direction::Forward, m, None, &mut out);
    out
}

/// Action of the inverse of `e` on `m`.
pub fn backward_action(e: &Element, m: Mode) -> Vec<(Mode, Complex64)> {
    let mut out = Vec::new();
    e.act(Direction::Backward, m, None, &mut out);
    out
}

/// Forward action scaled by the element's transmission amplitude.
pub fn lossy_action(e: &Element, lm: &LossModel, m: Mode) -> Vec<(Mode, Complex64)> {
    let mut out = Vec::new();
    e.act(Direction::Forward, m, Some(lm), &mut out);
    out
}
