//! Scheme compilation, factorization choice and element counting.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blocks::{self, log2};
use crate::elements::{Element, Kind};
use crate::error::{Error, Result};
use crate::modespace::{Mode, Pol};
use crate::netlist::{
    IdGen, Metadata, ModeDoc, Netlist, NetlistDocument, Placed, Stage, FORMAT_VERSION,
};

/// Largest exponent accepted by the closed-form counters.
pub const MAX_EXPONENT: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Basic,
    PolEnhanced,
    PathEnhanced,
    PolPathEnhanced,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Basic,
        Variant::PolEnhanced,
        Variant::PathEnhanced,
        Variant::PolPathEnhanced,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::PolEnhanced => "pol_enhanced",
            Variant::PathEnhanced => "path_enhanced",
            Variant::PolPathEnhanced => "pol_path_enhanced",
        }
    }

    pub fn needs_even_exponent(self) -> bool {
        matches!(self, Variant::PolEnhanced | Variant::PolPathEnhanced)
    }

    pub fn is_polarized(self) -> bool {
        self.needs_even_exponent()
    }

    pub fn is_path_encoded(self) -> bool {
        matches!(self, Variant::PathEnhanced | Variant::PolPathEnhanced)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.tag() == norm)
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "unknown variant {s:?}; expected one of basic, pol_enhanced, path_enhanced, pol_path_enhanced"
                ))
            })
    }
}

/// Exponent of a power-of-two dimension.
pub fn exponent_of(d: u64) -> Result<u32> {
    if !blocks::is_power_of_two(d) {
        return Err(Error::NotPowerOfTwo(d));
    }
    Ok(d.trailing_zeros())
}

/// Optimal factor dimensions for d = 2^M.
pub fn choose_factorization(m: u32) -> Result<(u64, u64)> {
    if !(1..=62).contains(&m) {
        return Err(Error::BadExponent(m));
    }
    Ok((1u64 << (m - m / 2), 1u64 << (m / 2)))
}

/// Total beam splitters of the basic scheme for a given factorization.
pub fn basic_bs_total(d_a: u64, d_b: u64) -> u64 {
    blocks::sorter_bs_count(d_a)
        + blocks::path_fourier_bs_count(d_a)
        + blocks::sorter_bs_count(d_b)
        + blocks::path_fourier_bs_count(d_b)
        + 3 * blocks::swap_bs_count(d_a, d_b)
}

/// Enumerates every split d_B = 2^m, 0 ≤ m ≤ ⌊M/2⌋, and returns the one with
/// the fewest beam splitters as (d_A, d_B, count).
pub fn brute_force_optimal_split(m: u32) -> Result<(u64, u64, u64)> {
    if !(1..=MAX_EXPONENT).contains(&m) {
        return Err(Error::BadExponent(m));
    }
    (0..=m / 2)
        .map(|j| {
            let (d_a, d_b) = (1u64 << (m - j), 1u64 << j);
            (d_a, d_b, basic_bs_total(d_a, d_b))
        })
        .min_by_key(|&(_, _, n)| n)
        .ok_or(Error::BadExponent(m))
}

/// Compilation parameters of one scheme instance.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub m: u32,
    pub d: u64,
    pub variant: Variant,
    pub d_a: u64,
    pub d_b: u64,
    /// Emit sorters as behavioral contract nodes instead of exchanger trees.
    pub behavioral_sorters: bool,
    /// Remove adjacent inverse path permutations after compilation.
    pub peephole: bool,
}

impl SchemeConfig {
    pub fn new(d: u64, variant: Variant) -> Result<SchemeConfig> {
        let m = exponent_of(d)?;
        if !(1..=MAX_EXPONENT).contains(&m) {
            return Err(Error::BadExponent(m));
        }
        if variant.needs_even_exponent() && m % 2 == 1 {
            return Err(Error::ParityRestriction {
                variant: variant.tag().to_string(),
                dim: d,
            });
        }
        let (d_a, d_b) = choose_factorization(m)?;
        Ok(SchemeConfig {
            m,
            d,
            variant,
            d_a,
            d_b,
            behavioral_sorters: false,
            peephole: false,
        })
    }

    /// Swap multiplicity.
    pub fn mu_swap(&self) -> i64 {
        match self.variant {
            Variant::Basic | Variant::PolEnhanced => self.d_b as i64,
            Variant::PathEnhanced | Variant::PolPathEnhanced => 1,
        }
    }

    /// Multiplicity of the sorters that close the scheme.
    pub fn mu_sorter_out(&self) -> i64 {
        match self.variant {
            Variant::PathEnhanced => (self.d_a / self.d_b) as i64,
            _ => 1,
        }
    }

    /// Unit Dove angle of the CZ array.
    pub fn dove_unit(&self) -> f64 {
        match self.variant {
            Variant::Basic | Variant::PolEnhanced => PI / (self.d_a as f64 * self.d as f64),
            Variant::PathEnhanced | Variant::PolPathEnhanced => {
                if self.m.is_multiple_of(2) {
                    PI / self.d as f64
                } else {
                    PI / (2.0 * self.d as f64)
                }
            }
        }
    }
}

/// A compiled scheme: netlist plus the declared input and output modes.
///
/// Input `i` is the label of data index `i`; output `j` is the label of
/// Fourier index `j`.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub config: SchemeConfig,
    pub netlist: Netlist,
    pub inputs: Vec<Mode>,
    pub outputs: Vec<Mode>,
}

impl Scheme {
    /// Document form with structural counts in the metadata.
    pub fn document(&self, stamp: Option<String>) -> NetlistDocument {
        let report = count_structural(&self.netlist, &self.config);
        NetlistDocument {
            version: FORMAT_VERSION.to_string(),
            dim: self.config.d,
            variant: self.config.variant.tag().to_string(),
            d_a: self.config.d_a,
            d_b: self.config.d_b,
            stages: NetlistDocument::stages_from(&self.netlist),
            metadata: Metadata {
                counts: report
                    .counts
                    .iter()
                    .map(|(k, v)| (k.tag().to_string(), *v))
                    .collect(),
                inputs: self.inputs.iter().map(|m| ModeDoc::from(*m)).collect(),
                outputs: self.outputs.iter().map(|m| ModeDoc::from(*m)).collect(),
            },
            stamp,
        }
    }
}

fn range(lo: u64, hi: u64) -> Vec<u32> {
    (lo as u32..hi as u32).collect()
}

/// Path permutation sending `pairs[i].0` to `pairs[i].1`, completed to a
/// bijection on the union of sources and targets.
fn mapping(g: &mut IdGen, block: &str, pairs: &[(u32, u32)]) -> Result<Netlist> {
    let mut map: BTreeMap<u32, u32> = pairs.iter().copied().filter(|(a, b)| a != b).collect();
    let sources: std::collections::BTreeSet<u32> = map.keys().copied().collect();
    let targets: std::collections::BTreeSet<u32> = map.values().copied().collect();
    let free_src: Vec<u32> = targets.difference(&sources).copied().collect();
    let free_dst: Vec<u32> = sources.difference(&targets).copied().collect();
    for (a, b) in free_src.into_iter().zip(free_dst) {
        map.insert(a, b);
    }
    let mut n = Netlist::new();
    if !map.is_empty() {
        n.push(
            block,
            g.place(Element::PathPermutation {
                from: map.keys().copied().collect(),
                to: map.values().copied().collect(),
            }),
        )?;
    }
    Ok(n)
}

fn sorter(g: &mut IdGen, cfg: &SchemeConfig, ports: &[u32], mu: i64) -> Result<Netlist> {
    if cfg.behavioral_sorters {
        blocks::sorter_contract(g, ports, mu)
    } else {
        blocks::sorter(g, ports, mu)
    }
}

fn single_stage(g: &mut IdGen, block: &str, elements: Vec<Element>) -> Result<Netlist> {
    let mut n = Netlist::new();
    n.push_stage(Stage::new(
        block,
        elements.into_iter().map(|e| g.place(e)).collect::<Vec<Placed>>(),
    ))?;
    Ok(n)
}

fn finish(cfg: &SchemeConfig, netlist: Netlist, inputs: Vec<Mode>, outputs: Vec<Mode>) -> Result<Scheme> {
    netlist.well_formed()?;
    let netlist = if cfg.peephole { netlist.peephole() } else { netlist };
    Ok(Scheme {
        config: cfg.clone(),
        netlist,
        inputs,
        outputs,
    })
}

/// Compiles `cfg` into a netlist.
pub fn build_scheme(cfg: &SchemeConfig) -> Result<Scheme> {
    match cfg.variant {
        Variant::Basic => basic(cfg),
        Variant::PolEnhanced => pol_enhanced(cfg),
        Variant::PathEnhanced => path_enhanced(cfg),
        Variant::PolPathEnhanced => pol_path_enhanced(cfg),
    }
}

pub fn build_basic_scheme(d: u64) -> Result<Scheme> {
    build_scheme(&SchemeConfig::new(d, Variant::Basic)?)
}

pub fn build_pol_enhanced_scheme(d: u64) -> Result<Scheme> {
    build_scheme(&SchemeConfig::new(d, Variant::PolEnhanced)?)
}

pub fn build_path_enhanced_scheme(d: u64) -> Result<Scheme> {
    build_scheme(&SchemeConfig::new(d, Variant::PathEnhanced)?)
}

pub fn build_pol_path_enhanced_scheme(d: u64) -> Result<Scheme> {
    build_scheme(&SchemeConfig::new(d, Variant::PolPathEnhanced)?)
}

fn oam_modes(d: u64, path: u32, pol: Option<Pol>) -> Vec<Mode> {
    (0..d as i64).map(|k| Mode { oam: k, path, pol }).collect()
}

fn basic(cfg: &SchemeConfig) -> Result<Scheme> {
    let mut g = IdGen::new();
    let (d_a, d_b) = (cfg.d_a, cfg.d_b);
    let pa = range(0, d_a);
    let pb = range(0, d_b);
    let mut n = Netlist::new();
    if cfg.d == 2 {
        n.append(sorter(&mut g, cfg, &pa, 1)?);
        n.append(blocks::path_fourier(&mut g, &pa)?);
        n.append(sorter(&mut g, cfg, &pa, 1)?.reversed());
    } else {
        let mu = cfg.mu_swap();
        n.append(sorter(&mut g, cfg, &pa, 1)?);
        n.append(blocks::swap(&mut g, &pa, &pb, mu)?);
        n.append(blocks::path_fourier(&mut g, &pb)?);
        n.append(blocks::swap(&mut g, &pa, &pb, mu)?.reversed());
        n.append(blocks::cz_array(&mut g, &pa, cfg.dove_unit())?);
        n.append(blocks::path_fourier(&mut g, &pa)?);
        n.append(blocks::swap(&mut g, &pa, &pb, mu)?);
        n.append(sorter(&mut g, cfg, &pb, 1)?.reversed());
    }
    finish(cfg, n, oam_modes(cfg.d, 0, None), oam_modes(cfg.d, 0, None))
}

fn pol_enhanced(cfg: &SchemeConfig) -> Result<Scheme> {
    let mut g = IdGen::new();
    let k = cfg.d_a;
    let p = range(0, k);
    let ret = range(k, 2 * k);
    let out = 2 * k as u32;
    let mu = cfg.mu_swap();

    let pbs_in = single_stage(&mut g, "pbs-in", vec![Element::Pbs { p1: 0, p2: out }])?;
    let f1 = sorter(&mut g, cfg, &p, 1)?;
    let f2 = blocks::swap(&mut g, &p, &p, mu)?;
    let f3 = blocks::path_fourier(&mut g, &p)?;
    let pbs_array = single_stage(
        &mut g,
        "pbs-array",
        p.iter().zip(&ret).map(|(&a, &b)| Element::Pbs { p1: a, p2: b }).collect(),
    )?;

    let mut n = Netlist::new();
    n.append(pbs_in.clone());
    n.append(f1.clone());
    n.append(f2.clone());
    n.append(f3.clone());
    n.append(pbs_array.clone());
    n.append(blocks::swap(&mut g, &p, &p, mu)?.reversed());
    n.append(blocks::cz_array(&mut g, &p, cfg.dove_unit())?);
    n.append(single_stage(
        &mut g,
        "hwp",
        p.iter().map(|&q| Element::Hwp { path: q, theta: FRAC_PI_4 }).collect(),
    )?);
    n.append(blocks::f_squared_perm(&mut g, &p)?);
    let fold: Vec<(u32, u32)> = p.iter().zip(&ret).flat_map(|(&a, &b)| [(a, b), (b, a)]).collect();
    n.append(mapping(&mut g, "fold", &fold)?);
    n.append(pbs_array.reversed());
    n.append(single_stage(&mut g, "pbs-array", p.iter().map(|&q| Element::Mirror { path: q }).collect())?);
    n.append(f3.reversed());
    n.append(f2.reversed());
    n.append(f1.reversed());
    n.append(pbs_in.reversed());
    n.append(single_stage(&mut g, "pbs-in", vec![Element::Mirror { path: out }])?);
    finish(
        cfg,
        n,
        oam_modes(cfg.d, 0, Some(Pol::H)),
        oam_modes(cfg.d, out, Some(Pol::V)),
    )
}

/// First module of the path variants: inverse sorters on blocks of d_A paths
/// followed by the gather permutation d_A·l → l.
fn path_front(g: &mut IdGen, cfg: &SchemeConfig) -> Result<Netlist> {
    let (d_a, d_b) = (cfg.d_a, cfg.d_b);
    let mut sorters = Netlist::new();
    for l in 0..d_b {
        let s = sorter(g, cfg, &range(d_a * l, d_a * (l + 1)), 1)?.reversed();
        sorters = sorters.parallel(s)?;
    }
    let pairs: Vec<(u32, u32)> = (0..d_b).map(|l| ((d_a * l) as u32, l as u32)).collect();
    sorters.append(mapping(g, "gather", &pairs)?);
    Ok(sorters.labeled("sorters-in"))
}

fn path_enhanced(cfg: &SchemeConfig) -> Result<Scheme> {
    let mut g = IdGen::new();
    let (d_a, d_b) = (cfg.d_a, cfg.d_b);
    let pa = range(0, d_a);
    let pb = range(0, d_b);
    let mut n = path_front(&mut g, cfg)?;
    n.append(blocks::path_fourier(&mut g, &pb)?);
    n.append(blocks::swap(&mut g, &pa, &pb, cfg.mu_swap())?.reversed());
    n.append(blocks::cz_array(&mut g, &pa, cfg.dove_unit())?);
    n.append(blocks::path_fourier(&mut g, &pa)?);
    let pairs: Vec<(u32, u32)> = (0..d_a).map(|k| (k as u32, (d_b * k) as u32)).collect();
    n.append(mapping(&mut g, "scatter", &pairs)?);
    let mut back = Netlist::new();
    for k in 0..d_a {
        let s = sorter(&mut g, cfg, &range(d_b * k, d_b * (k + 1)), cfg.mu_sorter_out())?;
        back = back.parallel(s)?;
    }
    n.append(back.labeled("sorters-out"));
    let modes: Vec<Mode> = (0..cfg.d as u32).map(|q| Mode::new(0, q)).collect();
    finish(cfg, n, modes.clone(), modes)
}

fn pol_path_enhanced(cfg: &SchemeConfig) -> Result<Scheme> {
    let mut g = IdGen::new();
    let d = cfg.d;
    let k = cfg.d_a;
    let p = range(0, k);
    let ret = range(d, d + k);
    let out0 = (d + k) as u32;

    let pbs_in = single_stage(
        &mut g,
        "pbs-in",
        (0..d as u32).map(|q| Element::Pbs { p1: q, p2: out0 + q }).collect(),
    )?;
    let f1 = path_front(&mut g, cfg)?;
    let f3 = blocks::path_fourier(&mut g, &p)?;
    let pbs_array = single_stage(
        &mut g,
        "pbs-array",
        p.iter().zip(&ret).map(|(&a, &b)| Element::Pbs { p1: a, p2: b }).collect(),
    )?;

    let mut n = Netlist::new();
    n.append(pbs_in.clone());
    n.append(f1.clone());
    n.append(f3.clone());
    n.append(pbs_array.clone());
    n.append(blocks::swap(&mut g, &p, &p, cfg.mu_swap())?.reversed());
    n.append(blocks::cz_array(&mut g, &p, cfg.dove_unit())?);
    n.append(single_stage(
        &mut g,
        "hwp",
        p.iter().map(|&q| Element::Hwp { path: q, theta: FRAC_PI_4 }).collect(),
    )?);
    n.append(blocks::f_squared_perm(&mut g, &p)?);
    let fold: Vec<(u32, u32)> = p.iter().zip(&ret).flat_map(|(&a, &b)| [(a, b), (b, a)]).collect();
    n.append(mapping(&mut g, "fold", &fold)?);
    n.append(pbs_array.reversed());
    n.append(single_stage(&mut g, "pbs-array", p.iter().map(|&q| Element::Mirror { path: q }).collect())?);
    n.append(f3.reversed());
    n.append(f1.reversed());
    n.append(pbs_in.reversed());
    n.append(single_stage(
        &mut g,
        "pbs-in",
        (0..d as u32).map(|q| Element::Mirror { path: out0 + q }).collect(),
    )?);
    let inputs = (0..d as u32).map(|q| Mode::polarized(0, q, Pol::H)).collect();
    let outputs = (0..d as u32).map(|q| Mode::polarized(0, out0 + q, Pol::V)).collect();
    finish(cfg, n, inputs, outputs)
}

/// Where a count came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountSource {
    ClosedForm,
    Structural,
}

impl CountSource {
    pub fn tag(self) -> &'static str {
        match self {
            CountSource::ClosedForm => "closed_form",
            CountSource::Structural => "structural",
        }
    }
}

/// Element kinds that appear in count reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    BeamSplitter,
    Pbs,
    Dove,
    Hologram,
    PhaseShifter,
    Mirror,
}

impl CountKind {
    pub fn tag(self) -> &'static str {
        match self {
            CountKind::BeamSplitter => "beam_splitter",
            CountKind::Pbs => "pbs",
            CountKind::Dove => "dove",
            CountKind::Hologram => "hologram",
            CountKind::PhaseShifter => "phase_shifter",
            CountKind::Mirror => "mirror",
        }
    }
}

/// Element counts of one scheme instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub d: u64,
    pub variant: Variant,
    pub source: CountSource,
    pub counts: BTreeMap<CountKind, u64>,
}

#[derive(Serialize)]
struct CountRow<'a> {
    d: u64,
    variant: &'a str,
    element_kind: &'a str,
    count: u64,
    source: &'a str,
}

impl CountReport {
    pub fn get(&self, kind: CountKind) -> Option<u64> {
        self.counts.get(&kind).copied()
    }

    /// Beam splitters plus polarizing beam splitters.
    pub fn splitter_total(&self) -> u64 {
        self.get(CountKind::BeamSplitter).unwrap_or(0) + self.get(CountKind::Pbs).unwrap_or(0)
    }

    pub fn write_csv<W: std::io::Write>(reports: &[CountReport], w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in reports {
            for (k, v) in &r.counts {
                wr.serialize(CountRow {
                    d: r.d,
                    variant: r.variant.tag(),
                    element_kind: k.tag(),
                    count: *v,
                    source: r.source.tag(),
                })?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Exact evaluation of the closed-form element counts for `cfg`.
///
/// The basic scheme reports every element kind; the other variants report
/// beam splitters and polarizing beam splitters. At d = 2 the basic scheme
/// uses its dedicated two-exchanger layout of five beam splitters.
pub fn count_closed_form(cfg: &SchemeConfig) -> CountReport {
    let (a, b) = (cfg.d_a, cfg.d_b);
    let (la, lb) = (log2(a), log2(b));
    let n_s = blocks::sorter_bs_count;
    let n_pf = blocks::path_fourier_bs_count;
    let n_swap = blocks::swap_bs_count;
    let mut counts = BTreeMap::new();
    match cfg.variant {
        Variant::Basic if cfg.d == 2 => {
            counts.insert(CountKind::BeamSplitter, 5);
        }
        Variant::Basic => {
            let (a, b, la, lb) = (a as i64, b as i64, la as i64, lb as i64);
            counts.insert(CountKind::BeamSplitter, basic_bs_total(cfg.d_a, cfg.d_b));
            let dove = 3 * b * lb + 9 * a - 4 * b - 5;
            let holo = 3 * a * la + 3 * b * lb + 2 * a - 4 * b + 2;
            let phase = 5 * a * la + b * lb / 2 - 10 * a - b + 11;
            let mirror = 7 * a * la + 4 * b * lb - 8 * a + 11 * b - 3;
            counts.insert(CountKind::Dove, dove.max(0) as u64);
            counts.insert(CountKind::Hologram, holo.max(0) as u64);
            counts.insert(CountKind::PhaseShifter, phase.max(0) as u64);
            counts.insert(CountKind::Mirror, mirror.max(0) as u64);
        }
        Variant::PolEnhanced => {
            counts.insert(CountKind::BeamSplitter, n_s(a) + n_pf(a) + 2 * n_swap(a, a));
            counts.insert(CountKind::Pbs, 1 + a);
        }
        Variant::PathEnhanced => {
            counts.insert(
                CountKind::BeamSplitter,
                b * n_s(a) + n_pf(a) + a * n_s(b) + n_pf(b) + n_swap(a, b),
            );
        }
        Variant::PolPathEnhanced => {
            counts.insert(CountKind::BeamSplitter, a * n_s(a) + n_pf(a) + n_swap(a, a));
            counts.insert(CountKind::Pbs, cfg.d + a);
        }
    }
    CountReport {
        d: cfg.d,
        variant: cfg.variant,
        source: CountSource::ClosedForm,
        counts,
    }
}

/// Counts read off a compiled netlist over distinct physical elements.
/// Behavioral blocks contribute the beam splitters of their implementation.
pub fn count_structural(netlist: &Netlist, cfg: &SchemeConfig) -> CountReport {
    let raw = netlist.counts();
    let get = |k: Kind| raw.get(&k).copied().unwrap_or(0);
    let mut counts = BTreeMap::new();
    counts.insert(CountKind::BeamSplitter, netlist.beam_splitter_count());
    counts.insert(CountKind::Pbs, get(Kind::Pbs));
    counts.insert(CountKind::Dove, get(Kind::Dove));
    counts.insert(CountKind::Hologram, get(Kind::Hologram));
    counts.insert(CountKind::PhaseShifter, get(Kind::Phase));
    counts.insert(CountKind::Mirror, get(Kind::Mirror));
    CountReport {
        d: cfg.d,
        variant: cfg.variant,
        source: CountSource::Structural,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent evaluation of the simplified beam-splitter total g(m).
    fn g_simplified(big_m: i64, m: i64) -> i64 {
        let p = |e: i64| 1i64 << e;
        // 2^m (7m/2 − 4) − 1 + 2^{M−m}(2(M−m) + 5), kept in integers.
        (p(m) * (7 * m - 8)) / 2 - 1 + p(big_m - m) * (2 * (big_m - m) + 5)
    }

    #[test]
    fn factorization_examples() {
        assert_eq!(choose_factorization(4).unwrap(), (4, 4));
        assert_eq!(choose_factorization(5).unwrap(), (8, 4));
        assert_eq!(choose_factorization(1).unwrap(), (2, 1));
        assert!(matches!(choose_factorization(0), Err(Error::BadExponent(0))));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_optimal_split(4).unwrap(), (4, 4, 47));
        assert_eq!(brute_force_optimal_split(2).unwrap(), (2, 2, 12));
        assert_eq!(brute_force_optimal_split(5).unwrap(), (8, 4, 99));
    }

    #[test]
    fn simplified_total_agrees_with_components() {
        for big_m in 2..=24i64 {
            for m in 1..=big_m / 2 {
                let total = basic_bs_total(1 << (big_m - m), 1 << m) as i64;
                assert_eq!(total, g_simplified(big_m, m), "M={big_m} m={m}");
            }
        }
    }

    #[test]
    fn even_and_odd_closed_forms() {
        for big_m in 2..=20u32 {
            let cfg = SchemeConfig::new(1 << big_m, Variant::Basic).unwrap();
            let n = count_closed_form(&cfg).get(CountKind::BeamSplitter).unwrap() as f64;
            let mf = big_m as f64;
            let expect = if big_m % 2 == 0 {
                2f64.powf(mf / 2.0) * (11.0 * mf / 4.0 + 1.0) - 1.0
            } else {
                2f64.powf((mf - 1.0) / 2.0) * (15.0 * mf / 4.0 + 25.0 / 4.0) - 1.0
            };
            assert!((n - expect).abs() < 1e-6, "M={big_m}");
        }
    }

    #[test]
    fn basic_count_examples() {
        let at = |d| count_closed_form(&SchemeConfig::new(d, Variant::Basic).unwrap());
        assert_eq!(at(16).get(CountKind::BeamSplitter), Some(47));
        assert_eq!(at(4).get(CountKind::BeamSplitter), Some(12));
        assert_eq!(at(64).get(CountKind::BeamSplitter), Some(139));
        assert_eq!(at(2).get(CountKind::BeamSplitter), Some(5));
        // Even-M form √d(1.5 log d + 5) − 5 at d = 16.
        assert_eq!(at(16).get(CountKind::Dove), Some(39));
    }

    #[test]
    fn even_exponent_element_forms() {
        for k in 1..=6u32 {
            let d = 1u64 << (2 * k);
            let r = count_closed_form(&SchemeConfig::new(d, Variant::Basic).unwrap());
            let s = (d as f64).sqrt();
            let l = (2 * k) as f64;
            let close = |kind, v: f64| (r.get(kind).unwrap() as f64 - v).abs() < 1e-6;
            assert!(close(CountKind::Dove, s * (1.5 * l + 5.0) - 5.0));
            assert!(close(CountKind::Hologram, s * (3.0 * l - 2.0) + 2.0));
            assert!(close(CountKind::PhaseShifter, s * (2.75 * l - 11.0) + 11.0));
            assert!(close(CountKind::Mirror, s * (5.5 * l + 3.0) - 3.0));
        }
    }

    #[test]
    fn variant_count_examples() {
        let pol = count_closed_form(&SchemeConfig::new(16, Variant::PolEnhanced).unwrap());
        assert_eq!(pol.splitter_total(), 33);
        let path = count_closed_form(&SchemeConfig::new(16, Variant::PathEnhanced).unwrap());
        assert_eq!(path.splitter_total(), 65);
        let path512 = count_closed_form(&SchemeConfig::new(512, Variant::PathEnhanced).unwrap());
        assert_eq!(path512.splitter_total(), 2209);
        let pp = count_closed_form(&SchemeConfig::new(16, Variant::PolPathEnhanced).unwrap());
        assert_eq!(pp.splitter_total(), 57);
        let pp256 = count_closed_form(&SchemeConfig::new(256, Variant::PolPathEnhanced).unwrap());
        assert!(pp256.splitter_total() < 1024);
    }

    #[test]
    fn variant_closed_forms_match_scaling_expressions() {
        for k in 1..=8u32 {
            let d = 1u64 << (2 * k);
            let s = (d as f64).sqrt();
            let l = (2 * k) as f64;
            let pol = count_closed_form(&SchemeConfig::new(d, Variant::PolEnhanced).unwrap());
            assert!((pol.splitter_total() as f64 - (1.75 * s * l + s + 1.0)).abs() < 1e-9);
            let path = count_closed_form(&SchemeConfig::new(d, Variant::PathEnhanced).unwrap());
            let e = 4.0 * d as f64 + s * (1.25 * l - 5.0) + 1.0;
            assert!((path.splitter_total() as f64 - e).abs() < 1e-9);
            let pp = count_closed_form(&SchemeConfig::new(d, Variant::PolPathEnhanced).unwrap());
            assert!((pp.splitter_total() as f64 - (3.0 * d as f64 + s * (l - 2.0) + 1.0)).abs() < 1e-9);
        }
        for k in 1..=8u32 {
            let d = 1u64 << (2 * k + 1);
            let s = (d as f64).sqrt();
            let l = (2 * k + 1) as f64;
            let r2 = 2f64.sqrt();
            let path = count_closed_form(&SchemeConfig::new(d, Variant::PathEnhanced).unwrap());
            let e = 4.0 * d as f64 + s * (7.0 / (4.0 * r2) * l - 23.0 / (4.0 * r2)) + 1.0;
            assert!((path.splitter_total() as f64 - e).abs() < 1e-6, "d={d}");
        }
    }

    #[test]
    fn parity_rule_enforced() {
        let err = SchemeConfig::new(8, Variant::PolEnhanced).unwrap_err();
        assert!(err.to_string().contains("even"));
        assert!(matches!(SchemeConfig::new(12, Variant::Basic), Err(Error::NotPowerOfTwo(12))));
        assert!(SchemeConfig::new(1, Variant::Basic).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("pol-enhanced".parse::<Variant>().unwrap(), Variant::PolEnhanced);
        assert!("fancy".parse::<Variant>().is_err());
    }

    #[test]
    fn structural_basic_matches_closed_form() {
        for big_m in 1..=10u32 {
            let cfg = SchemeConfig::new(1 << big_m, Variant::Basic).unwrap();
            let s = build_scheme(&cfg).unwrap();
            assert_eq!(
                count_structural(&s.netlist, &cfg).get(CountKind::BeamSplitter),
                count_closed_form(&cfg).get(CountKind::BeamSplitter),
                "M={big_m}"
            );
        }
    }

    #[test]
    fn structural_variants_match_closed_form() {
        for (d, v) in [
            (4, Variant::PolEnhanced),
            (16, Variant::PolEnhanced),
            (64, Variant::PolEnhanced),
            (2, Variant::PathEnhanced),
            (8, Variant::PathEnhanced),
            (16, Variant::PathEnhanced),
            (32, Variant::PathEnhanced),
            (4, Variant::PolPathEnhanced),
            (16, Variant::PolPathEnhanced),
        ] {
            let cfg = SchemeConfig::new(d, v).unwrap();
            let s = build_scheme(&cfg).unwrap();
            assert_eq!(
                count_structural(&s.netlist, &cfg).splitter_total(),
                count_closed_form(&cfg).splitter_total(),
                "{v} d={d}"
            );
        }
    }

    #[test]
    fn behavioral_sorters_keep_counts() {
        let mut cfg = SchemeConfig::new(32, Variant::Basic).unwrap();
        cfg.behavioral_sorters = true;
        let s = build_scheme(&cfg).unwrap();
        assert_eq!(s.netlist.beam_splitter_count(), 99);
    }

    #[test]
    fn csv_columns() {
        let cfg = SchemeConfig::new(16, Variant::PolEnhanced).unwrap();
        let mut buf = Vec::new();
        CountReport::write_csv(&[count_closed_form(&cfg)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,variant,element_kind,count,source\n"));
        assert!(text.contains("16,pol_enhanced,beam_splitter,28,closed_form"));
        assert!(text.contains("16,pol_enhanced,pbs,5,closed_form"));
    }
}
