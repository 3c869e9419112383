//! Composite blocks: OAM exchanger, holo-beam splitter, sorter, swap,
//! path-only Fourier transform, Dove CZ array and the F² path permutation.
//!
//! Each block has an exact behavioral rule. Exchangers, sorters, path Fourier
//! transforms, CZ arrays and the F² permutation also have structural
//! expansions into primitive elements; swaps and holo-beam splitters are
//! behavioral only.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::elements::Element;
use crate::error::{Error, Result};
use crate::modespace::Mode;
use crate::netlist::{IdGen, Netlist, Stage};

pub fn is_power_of_two(n: u64) -> bool {
    n != 0 && n & (n - 1) == 0
}

pub fn log2(n: u64) -> u64 {
    n.trailing_zeros() as u64
}

fn require_pow2(n: u64) -> Result<()> {
    if is_power_of_two(n) {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(n))
    }
}

/// Image of an exchanger input as `(oam shift, lands on first port, amplitude)`.
///
/// On the pair {|k⟩ on p₁, |k−m⟩ on p₂} the exchanger is
/// e^{−iθ}[[cos θ, i sin θ], [i sin θ, cos θ]] with θ = πk/2m.
pub fn exchanger_action(
    m: i64,
    from_first: bool,
    k: i64,
    inverse: bool,
) -> Result<Vec<(i64, bool, Complex64)>> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    let top = if from_first { k } else { k + m };
    let theta = PI * top as f64 / (2.0 * m as f64);
    let phase = Complex64::from_polar(1.0, -theta);
    let (s, co) = theta.sin_cos();
    let mut diag = phase * co;
    let mut off = Complex64::i() * phase * s;
    if inverse {
        diag = diag.conj();
        off = off.conj();
    }
    Ok(if from_first {
        vec![(0, true, diag), (-m, false, off)]
    } else {
        vec![(m, true, off), (0, false, diag)]
    })
}

/// Image of a holo-beam splitter input as `(oam shift, lands on first port,
/// amplitude)`.
pub fn holo_bs_action(
    alpha: f64,
    m: i64,
    from_first: bool,
    inverse: bool,
) -> Result<Vec<(i64, bool, Complex64)>> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    let phi = PI * alpha / (2.0 * m as f64);
    let phase = Complex64::from_polar(1.0, phi);
    let (s, co) = phi.sin_cos();
    let mut diag = phase * co;
    let mut off = -Complex64::i() * phase * s;
    if inverse {
        diag = diag.conj();
        off = off.conj();
    }
    Ok(if from_first {
        vec![(0, true, diag), (-m, false, off)]
    } else {
        vec![(0, false, diag), (m, true, off)]
    })
}

/// Label map of the swap block.
///
/// Forward: |μ(d_in/d_out)k⟩ on input `port` → |μ(d_in⌊k/d_out⌋ + port)⟩ on
/// output k mod d_out. Inverse maps output labels back. Labels outside the
/// domain are an error.
pub fn swap_map(
    d_in: i64,
    d_out: i64,
    mu: i64,
    inverse: bool,
    oam: i64,
    port: usize,
) -> Result<(i64, usize)> {
    let outside = || Error::OutsideDomain {
        mode: Mode::new(oam, port as u32),
        block: format!(
            "swap(d_in={d_in}, d_out={d_out}, mu={mu}{})",
            if inverse { ", inverse" } else { "" }
        ),
    };
    if d_in < 1 || d_out < 1 || mu < 1 || d_out > d_in {
        return Err(Error::Invalid(format!(
            "swap needs 1 <= d_out <= d_in and mu >= 1, got {d_in}, {d_out}, {mu}"
        )));
    }
    let s = mu * d_in / d_out;
    if !inverse {
        if port as i64 >= d_in || oam.rem_euclid(s) != 0 {
            return Err(outside());
        }
        let k = oam / s;
        let out = mu * (d_in * k.div_euclid(d_out) + port as i64);
        Ok((out, k.rem_euclid(d_out) as usize))
    } else {
        if port as i64 >= d_out || oam.rem_euclid(mu) != 0 {
            return Err(outside());
        }
        let t = oam / mu;
        let k = d_out * t.div_euclid(d_in) + port as i64;
        Ok((s * k, t.rem_euclid(d_in) as usize))
    }
}

/// Label map of the sorter contract: |μk⟩ on port 0 → |μd⌊k/d⌋⟩ on port
/// k mod d, and its inverse.
pub fn sorter_map(d: i64, mu: i64, inverse: bool, oam: i64, port: usize) -> Result<(i64, usize)> {
    let outside = || Error::OutsideDomain {
        mode: Mode::new(oam, port as u32),
        block: format!("sorter(d={d}, mu={mu}{})", if inverse { ", inverse" } else { "" }),
    };
    if !inverse {
        if port != 0 || oam.rem_euclid(mu) != 0 {
            return Err(outside());
        }
        let k = oam / mu;
        Ok((mu * d * k.div_euclid(d), k.rem_euclid(d) as usize))
    } else {
        if port as i64 >= d || oam.rem_euclid(mu * d) != 0 {
            return Err(outside());
        }
        Ok((oam + mu * port as i64, 0))
    }
}

/// Beam splitters in a d-port sorter.
pub fn sorter_bs_count(d: u64) -> u64 {
    2 * d.saturating_sub(1)
}

/// Beam splitters in an n-port path-only Fourier transform.
pub fn path_fourier_bs_count(n: u64) -> u64 {
    n / 2 * log2(n)
}

/// Beam splitters in a swap with `d_in` inputs and `d_out` outputs.
pub fn swap_bs_count(d_in: u64, d_out: u64) -> u64 {
    let (hi, lo) = (d_in.max(d_out), d_in.min(d_out));
    hi / 2 * log2(hi) + lo * log2(lo) + hi + 1 - 2 * lo
}

/// Number of beam splitters a photon crosses inside a swap from input index
/// `p` to output index `q`.
pub fn swap_route_length(p: u64, q: u64) -> u32 {
    2 + (p ^ q).count_ones()
}

/// Eight-stage Mach-Zehnder OAM exchanger of order `m` on ports (a, b).
pub fn exchanger(g: &mut IdGen, a: u32, b: u32, m: i64) -> Result<Netlist> {
    if m == 0 {
        return Err(Error::ZeroOrder);
    }
    let alpha = -PI / (2.0 * m as f64);
    let mut n = Netlist::new();
    let block = "exchanger";
    n.push(block, g.place(Element::Hologram { path: b, m }))?;
    n.push(block, g.place(Element::Mirror { path: b }))?;
    n.push(block, g.place(Element::BeamSplitter { p1: a, p2: b }))?;
    n.push(block, g.place(Element::Dove { path: a, alpha }))?;
    n.push(block, g.place(Element::Mirror { path: a }))?;
    n.push(block, g.place(Element::BeamSplitter { p1: a, p2: b }))?;
    n.push(block, g.place(Element::Mirror { path: b }))?;
    n.push(block, g.place(Element::Hologram { path: b, m: -m }))?;
    Ok(n)
}

fn permutation_stage(g: &mut IdGen, block: &str, from: Vec<u32>, to: Vec<u32>) -> Result<Netlist> {
    let mut n = Netlist::new();
    if from != to {
        n.push(block, g.place(Element::PathPermutation { from, to }))?;
    }
    Ok(n)
}

/// Structural sorter fed on `ports[0]` with multiplicity `mu`.
pub fn sorter(g: &mut IdGen, ports: &[u32], mu: i64) -> Result<Netlist> {
    require_pow2(ports.len() as u64)?;
    let d = ports.len();
    if d == 1 {
        return Ok(Netlist::new());
    }
    let half = d / 2;
    let mut n = exchanger(g, ports[0], ports[half], mu)?;
    let top = sorter(g, &ports[..half], 2 * mu)?;
    let bottom = sorter(g, &ports[half..], 2 * mu)?;
    n.append(top.parallel(bottom)?);
    let from: Vec<u32> = ports.to_vec();
    let to: Vec<u32> = (0..d)
        .map(|i| if i < half { ports[2 * i] } else { ports[2 * (i - half) + 1] })
        .collect();
    n.append(permutation_stage(g, "sorter", from, to)?);
    Ok(n.labeled("sorter"))
}

/// Structural path-only Fourier transform on `ports` (DFT with positive
/// exponent, identity on OAM).
pub fn path_fourier(g: &mut IdGen, ports: &[u32]) -> Result<Netlist> {
    require_pow2(ports.len() as u64)?;
    let n = ports.len();
    if n == 1 {
        return Ok(Netlist::new());
    }
    let half = n / 2;
    let from: Vec<u32> = ports.to_vec();
    let to: Vec<u32> = (0..n)
        .map(|i| if i % 2 == 0 { ports[i / 2] } else { ports[half + i / 2] })
        .collect();
    let mut net = permutation_stage(g, "path-fourier", from, to)?;
    let even = path_fourier(g, &ports[..half])?;
    let odd = path_fourier(g, &ports[half..])?;
    net.append(even.parallel(odd)?);
    let lower = &ports[half..];
    let stage = |g: &mut IdGen, f: &dyn Fn(usize, u32) -> Element| {
        Stage::new(
            "path-fourier",
            lower.iter().enumerate().map(|(j, &p)| g.place(f(j, p))).collect(),
        )
    };
    net.push_stage(stage(g, &|j, p| Element::Phase {
        path: p,
        phi: (TAU * j as f64 / n as f64 + PI).rem_euclid(TAU),
    }))?;
    net.push_stage(stage(g, &|_, p| Element::Mirror { path: p }))?;
    net.push_stage(Stage::new(
        "path-fourier",
        (0..half)
            .map(|j| g.place(Element::BeamSplitter { p1: ports[j], p2: ports[half + j] }))
            .collect(),
    ))?;
    net.push_stage(stage(g, &|_, p| Element::Mirror { path: p }))?;
    net.push_stage(stage(g, &|_, p| Element::Phase { path: p, phi: PI }))?;
    Ok(net.labeled("path-fourier"))
}

/// Dove prism and mirror on `ports[k]` for k ≥ 1, multiplying |m⟩ there by
/// e^{2ik·unit·m}.
pub fn cz_array(g: &mut IdGen, ports: &[u32], unit: f64) -> Result<Netlist> {
    let mut n = Netlist::new();
    n.push_stage(Stage::new(
        "cz",
        ports
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &p)| g.place(Element::Dove { path: p, alpha: k as f64 * unit }))
            .collect(),
    ))?;
    n.push_stage(Stage::new(
        "cz",
        ports
            .iter()
            .skip(1)
            .map(|&p| g.place(Element::Mirror { path: p }))
            .collect(),
    ))?;
    Ok(n)
}

/// Path permutation p → (n − p) mod n over `ports`.
pub fn f_squared_perm(g: &mut IdGen, ports: &[u32]) -> Result<Netlist> {
    let n = ports.len();
    let from: Vec<u32> = ports.to_vec();
    let to: Vec<u32> = (0..n).map(|p| ports[(n - p) % n]).collect();
    permutation_stage(g, "f-squared", from, to)
}

/// Single behavioral swap element.
pub fn swap(g: &mut IdGen, inputs: &[u32], outputs: &[u32], mu: i64) -> Result<Netlist> {
    let mut n = Netlist::new();
    n.push(
        "swap",
        g.place(Element::Swap {
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
            mu,
        }),
    )?;
    Ok(n)
}

/// Single behavioral sorter element.
pub fn sorter_contract(g: &mut IdGen, ports: &[u32], mu: i64) -> Result<Netlist> {
    let mut n = Netlist::new();
    if ports.len() > 1 {
        n.push("sorter", g.place(Element::SorterContract { ports: ports.to_vec(), mu }))?;
    } else {
        require_pow2(ports.len() as u64)?;
    }
    Ok(n)
}

/// Representation requested for a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Behavioral,
    Structural,
}

/// A block with its parameters, placed on paths 0, 1, ….
#[derive(Clone, Debug, PartialEq)]
pub enum BlockSpec {
    Exchanger { m: i64 },
    HoloBs { alpha: f64, m: i64 },
    Sorter { d: u64, mu: i64, inverse: bool },
    Swap { d_in: u64, d_out: u64, mu: i64, inverse: bool },
    PathFourier { n: u64, inverse: bool },
    CzArray { d_a: u64, d: u64, paths: u64 },
    FSquaredPerm { d_a: u64 },
}

fn range(n: u64) -> Vec<u32> {
    (0..n as u32).collect()
}

impl BlockSpec {
    pub fn build(&self, repr: Representation) -> Result<Netlist> {
        let mut g = IdGen::new();
        let structural = repr == Representation::Structural;
        match self {
            BlockSpec::Exchanger { m } if structural => exchanger(&mut g, 0, 1, *m),
            BlockSpec::Exchanger { m } => {
                let e = Element::Exchanger { m: *m, p1: 0, p2: 1 };
                e.validate()?;
                let mut n = Netlist::new();
                n.push("exchanger", g.place(e))?;
                Ok(n)
            }
            BlockSpec::HoloBs { alpha, m } => {
                let e = Element::HoloBs { alpha: *alpha, m: *m, p1: 0, p2: 1 };
                e.validate()?;
                let mut n = Netlist::new();
                n.push("holo-bs", g.place(e))?;
                Ok(n)
            }
            BlockSpec::Sorter { d, mu, inverse } => {
                require_pow2(*d)?;
                let n = if structural {
                    sorter(&mut g, &range(*d), *mu)?
                } else {
                    sorter_contract(&mut g, &range(*d), *mu)?
                };
                Ok(if *inverse { n.reversed() } else { n })
            }
            BlockSpec::Swap { d_in, d_out, mu, inverse } => {
                require_pow2(*d_in)?;
                require_pow2(*d_out)?;
                if d_out > d_in {
                    return Err(Error::Invalid(format!(
                        "swap output count {d_out} exceeds input count {d_in}"
                    )));
                }
                let n = swap(&mut g, &range(*d_in), &range(*d_out), *mu)?;
                Ok(if *inverse { n.reversed() } else { n })
            }
            BlockSpec::PathFourier { n, inverse } => {
                require_pow2(*n)?;
                let net = path_fourier(&mut g, &range(*n))?;
                Ok(if *inverse { net.reversed() } else { net })
            }
            BlockSpec::CzArray { d_a, d, paths } => {
                cz_array(&mut g, &range(*paths), PI / (*d_a as f64 * *d as f64))
            }
            BlockSpec::FSquaredPerm { d_a } => {
                require_pow2(*d_a)?;
                f_squared_perm(&mut g, &range(*d_a))
            }
        }
    }
}

/// Structural sorter on paths 0..d.
pub fn build_sorter(d: u64, mu: i64, inverse: bool) -> Result<Netlist> {
    BlockSpec::Sorter { d, mu, inverse }.build(Representation::Structural)
}

/// Behavioral swap on inputs 0..d_in and outputs 0..d_out.
pub fn build_swap(d_in: u64, d_out: u64, mu: i64, inverse: bool) -> Result<Netlist> {
    BlockSpec::Swap { d_in, d_out, mu, inverse }.build(Representation::Behavioral)
}

/// Structural path-only Fourier transform on paths 0..n.
pub fn build_path_fourier(n: u64, inverse: bool) -> Result<Netlist> {
    BlockSpec::PathFourier { n, inverse }.build(Representation::Structural)
}

/// Dove CZ array on paths 0..paths with unit angle π/(d_A·d).
pub fn build_cz_array(d_a: u64, d: u64, paths: u64) -> Result<Netlist> {
    BlockSpec::CzArray { d_a, d, paths }.build(Representation::Structural)
}

/// F² path permutation on paths 0..d_A.
pub fn build_f_squared_perm(d_a: u64) -> Result<Netlist> {
    BlockSpec::FSquaredPerm { d_a }.build(Representation::Structural)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Direction;
    use crate::modespace::Mode;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    type Amps = BTreeMap<Mode, Complex64>;

    /// Independent sparse propagation used as a test oracle.
    fn run(n: &Netlist, input: Mode) -> Amps {
        let mut cur: Amps = [(input, Complex64::new(1.0, 0.0))].into();
        for s in n.stages() {
            let lookup = s.port_lookup();
            let mut next = Amps::new();
            for (m, a) in cur {
                match lookup.get(&m.path) {
                    Some(&i) => {
                        let p = &s.elements[i];
                        let mut buf = Vec::new();
                        p.element.act(p.direction, m, None, &mut buf);
                        for (o, b) in buf {
                            *next.entry(o).or_default() += a * b;
                        }
                    }
                    None => *next.entry(m).or_default() += a,
                }
            }
            cur = next.into_iter().filter(|(_, a)| a.norm() > 1e-14).collect();
        }
        cur
    }

    fn assert_single(out: &Amps, expect: Mode, tol: f64) {
        for (m, a) in out {
            let t = if *m == expect { 1.0 } else { 0.0 };
            assert!(
                (a - Complex64::new(t, 0.0)).norm() < tol,
                "at {m}: {a}, expected |{}⟩ on {}",
                expect.oam,
                expect.path
            );
        }
        assert!(out.contains_key(&expect), "missing {expect}");
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exchanger_first_order_examples() {
        let out = exchanger_action(1, true, 0, false).unwrap();
        assert!((out[0].2 - c(1.0, 0.0)).norm() < 1e-15 && out[1].2.norm() < 1e-15);
        let out = exchanger_action(1, true, 1, false).unwrap();
        assert!(out[0].2.norm() < 1e-15);
        assert_eq!((out[1].0, out[1].1), (-1, false));
        assert!((out[1].2 - c(1.0, 0.0)).norm() < 1e-15);
        let out = exchanger_action(2, true, 2, false).unwrap();
        assert!(out[0].2.norm() < 1e-15);
        assert_eq!((out[1].0, out[1].1), (-2, false));
        assert!((out[1].2.norm() - 1.0).abs() < 1e-15);
        assert!(matches!(exchanger_action(0, true, 1, false), Err(Error::ZeroOrder)));
    }

    #[test]
    fn exchanger_second_port_matches_literal_rule() {
        for m in [1i64, 2, 3] {
            for j in -7i64..7 {
                let theta = PI * j as f64 / (2.0 * m as f64);
                let ph = Complex64::from_polar(1.0, -theta);
                let out = exchanger_action(m, false, j, false).unwrap();
                let to_first = out.iter().find(|x| x.1).unwrap();
                let to_second = out.iter().find(|x| !x.1).unwrap();
                assert_eq!(to_first.0, m);
                assert!((to_first.2 - ph * theta.cos()).norm() < 1e-12);
                assert!((to_second.2 - Complex64::i() * ph * theta.sin()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn structural_exchanger_matches_rule() {
        for m in [1i64, 2, 4, -3] {
            let n = BlockSpec::Exchanger { m }.build(Representation::Structural).unwrap();
            let b = BlockSpec::Exchanger { m }.build(Representation::Behavioral).unwrap();
            assert_eq!(n.beam_splitter_count(), 2);
            for k in -9..9 {
                for path in [0, 1] {
                    let s = run(&n, Mode::new(k, path));
                    let r = run(&b, Mode::new(k, path));
                    let keys: std::collections::BTreeSet<_> = s.keys().chain(r.keys()).collect();
                    for key in keys {
                        let x = s.get(key).copied().unwrap_or_default();
                        let y = r.get(key).copied().unwrap_or_default();
                        assert!((x - y).norm() < 1e-12, "m={m} k={k} path={path} at {key}");
                    }
                }
            }
        }
    }

    #[test]
    fn holo_bs_examples() {
        for (first, shift) in [(true, -3i64), (false, 3)] {
            let out = holo_bs_action(0.0, 3, first, false).unwrap();
            let same = out.iter().find(|x| x.1 == first).unwrap();
            assert!((same.2 - c(1.0, 0.0)).norm() < 1e-15);
            let out = holo_bs_action(3.0, 3, first, false).unwrap();
            let cross = out.iter().find(|x| x.1 != first).unwrap();
            assert_eq!(cross.0, shift);
            assert!((cross.2 - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn holo_bs_unitary_on_pair() {
        for alpha in [0.3, 1.0, 2.7] {
            let a = holo_bs_action(alpha, 2, true, false).unwrap();
            let b = holo_bs_action(alpha, 2, false, false).unwrap();
            let col_a = [a[0].2, a[1].2];
            let col_b = [b[1].2, b[0].2];
            let dot = col_a[0].conj() * col_b[0] + col_a[1].conj() * col_b[1];
            assert!(dot.norm() < 1e-14);
            assert!((col_a[0].norm_sqr() + col_a[1].norm_sqr() - 1.0).abs() < 1e-14);
            let inv = holo_bs_action(alpha, 2, true, true).unwrap();
            let back = inv[0].2 * a[0].2 + holo_bs_action(alpha, 2, false, true).unwrap()[1].2 * a[1].2;
            assert!((back - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn sorter_contract_examples() {
        assert_eq!(sorter_map(4, 1, false, 5, 0).unwrap(), (4, 1));
        assert_eq!(sorter_map(4, 1, false, 2, 0).unwrap(), (0, 2));
        assert_eq!(sorter_map(2, 2, false, 2, 0).unwrap(), (0, 1));
    }

    #[test]
    fn structural_sorter_meets_contract_over_four_periods() {
        for d in [2u64, 4, 8, 16] {
            for mu in [1i64, 2] {
                let n = build_sorter(d, mu, false).unwrap();
                assert_eq!(n.beam_splitter_count(), 2 * (d - 1));
                for k in -(d as i64)..(4 * d as i64) {
                    let (oam, port) = sorter_map(d as i64, mu, false, mu * k, 0).unwrap();
                    assert_single(&run(&n, Mode::new(mu * k, 0)), Mode::new(oam, port as u32), 1e-12);
                }
            }
        }
    }

    #[test]
    fn sorter_inverse_undoes_forward() {
        let n = build_sorter(8, 1, false).unwrap();
        let mut both = n.clone();
        both.append(build_sorter(8, 1, true).unwrap());
        for k in -3..20 {
            for p in 0..8 {
                assert_single(&run(&both, Mode::new(k, p)), Mode::new(k, p), 1e-12);
            }
        }
    }

    #[test]
    fn swap_examples() {
        assert_eq!(swap_map(2, 2, 1, false, 1, 0).unwrap(), (0, 1));
        assert_eq!(swap_map(2, 2, 1, false, 0, 1).unwrap(), (1, 0));
        assert_eq!(swap_map(8, 4, 1, false, 10, 3).unwrap(), (11, 1));
        assert_eq!(swap_map(4, 2, 2, true, 6, 1).unwrap(), (4, 3));
        assert!(matches!(
            swap_map(8, 4, 1, false, 3, 0),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn swap_counts() {
        assert_eq!(swap_bs_count(2, 2), 2);
        assert_eq!(swap_bs_count(4, 4), 9);
        assert_eq!(swap_bs_count(4, 2), 7);
        assert_eq!(swap_bs_count(1, 1), 0);
        assert_eq!(path_fourier_bs_count(8), 12);
    }

    #[test]
    fn swap_netlist_is_permutation_on_domain() {
        let n = build_swap(4, 2, 2, false).unwrap();
        let mut images = std::collections::BTreeSet::new();
        for k in -4..12 {
            for p in 0..4 {
                let out = run(&n, Mode::new(4 * k, p));
                assert_eq!(out.len(), 1);
                let (m, a) = out.into_iter().next().unwrap();
                assert!((a - c(1.0, 0.0)).norm() < 1e-15);
                assert!(images.insert(m));
            }
        }
        assert!(run(&n, Mode::new(3, 0)).is_empty());
    }

    fn dft(n: usize, j: usize, k: usize) -> Complex64 {
        Complex64::from_polar(1.0 / (n as f64).sqrt(), TAU * (j * k) as f64 / n as f64)
    }

    #[test]
    fn path_fourier_equals_dft_on_paths() {
        for n in [1usize, 2, 4, 8, 16] {
            let net = build_path_fourier(n as u64, false).unwrap();
            assert_eq!(net.beam_splitter_count(), path_fourier_bs_count(n as u64));
            for oam in [-3i64, 0, 2, 5] {
                for k in 0..n {
                    let out = run(&net, Mode::new(oam, k as u32));
                    for j in 0..n {
                        let a = out.get(&Mode::new(oam, j as u32)).copied().unwrap_or_default();
                        assert!((a - dft(n, j, k)).norm() < 1e-12, "n={n} oam={oam} {j},{k}");
                    }
                    assert!(out.keys().all(|m| m.oam == oam));
                }
            }
        }
    }

    #[test]
    fn path_fourier_four_column_one() {
        let out = run(&build_path_fourier(4, false).unwrap(), Mode::new(0, 1));
        let expect = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        for (j, e) in expect.iter().enumerate() {
            assert!((out[&Mode::new(0, j as u32)] - e).norm() < 1e-12);
        }
    }

    #[test]
    fn path_fourier_inverse_is_conjugate() {
        let net = build_path_fourier(8, true).unwrap();
        let out = run(&net, Mode::new(1, 3));
        for j in 0..8 {
            assert!((out[&Mode::new(1, j)] - dft(8, j as usize, 3).conj()).norm() < 1e-12);
        }
        assert!(net.stages().iter().all(|s| s.elements.iter().all(|p| p.direction == Direction::Backward)));
    }

    #[test]
    fn cz_array_examples() {
        let n = build_cz_array(2, 4, 4).unwrap();
        assert_single(&run(&n, Mode::new(5, 0)), Mode::new(5, 0), 1e-15);
        let out = run(&n, Mode::new(2, 1));
        assert!((out[&Mode::new(2, 1)] - c(0.0, 1.0)).norm() < 1e-12);
        let d = 8u64;
        let n = build_cz_array(4, d, 8).unwrap();
        for l in 0..8u32 {
            for j in 0..2i64 {
                let out = run(&n, Mode::new(4 * j, l));
                let omega = Complex64::from_polar(1.0, TAU * (j * l as i64) as f64 / d as f64);
                assert!((out[&Mode::new(4 * j, l)] - omega).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn f_squared_examples() {
        let n = build_f_squared_perm(4).unwrap();
        assert_single(&run(&n, Mode::new(7, 0)), Mode::new(7, 0), 1e-15);
        assert_single(&run(&n, Mode::new(7, 1)), Mode::new(7, 3), 1e-15);
        let mut twice = n.clone();
        twice.append(build_f_squared_perm(4).unwrap());
        for p in 0..4 {
            assert_single(&run(&twice, Mode::new(1, p)), Mode::new(1, p), 1e-15);
        }
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(matches!(build_sorter(6, 1, false), Err(Error::NotPowerOfTwo(6))));
        assert!(matches!(build_path_fourier(3, false), Err(Error::NotPowerOfTwo(3))));
    }

    proptest! {
        #[test]
        fn swap_inverse_roundtrip(log_in in 0u32..5, log_out in 0u32..5, mu in 1i64..5, k in -200i64..200, p in 0usize..16) {
            prop_assume!(log_out <= log_in);
            let (di, dout) = (1i64 << log_in, 1i64 << log_out);
            let p = p % di as usize;
            let s = mu * di / dout;
            let (oam, q) = swap_map(di, dout, mu, false, s * k, p).unwrap();
            prop_assert!((q as i64) < dout);
            prop_assert_eq!(swap_map(di, dout, mu, true, oam, q).unwrap(), (s * k, p));
        }

        #[test]
        fn sorter_roundtrip(log_d in 0u32..6, mu in 1i64..4, k in -500i64..500) {
            let d = 1i64 << log_d;
            let (oam, q) = sorter_map(d, mu, false, mu * k, 0).unwrap();
            prop_assert_eq!(sorter_map(d, mu, true, oam, q).unwrap(), (mu * k, 0));
        }

        #[test]
        fn exchanger_inverse_undoes_forward(m in 1i64..6, k in -40i64..40, first in any::<bool>()) {
            let fwd = exchanger_action(m, first, k, false).unwrap();
            let mut acc: BTreeMap<(i64, bool), Complex64> = BTreeMap::new();
            for (dk, f, a) in fwd {
                for (dk2, f2, b) in exchanger_action(m, f, k + dk, true).unwrap() {
                    *acc.entry((k + dk + dk2, f2)).or_default() += a * b;
                }
            }
            for ((kk, f), a) in acc {
                let t = if kk == k && f == first { 1.0 } else { 0.0 };
                prop_assert!((a - c(t, 0.0)).norm() < 1e-12);
            }
        }
    }
}
