//! Rate families and transition catalogs.
//!
//! Rates are un-accelerated; the engine and the exact generator multiply by
//! `n^theta`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{Configuration, Lattice, Species, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateModel {
    /// `p(1) = b_plus + a/n^gamma`, `p(-1) = b_minus - a/n^gamma`.
    NearestExclusion { b_plus: f64, b_minus: f64, a: f64, gamma: f64 },
    /// `p(z) = c_sign(z) / |z|^(1+alpha)`.  Without `range` the kernel is the
    /// full periodization of the jump law on the ring; with `range = R` the
    /// displacements are truncated at `|z| <= R` and folded.
    LongJump {
        alpha: f64,
        c_plus: f64,
        c_minus: f64,
        #[serde(default)]
        range: Option<usize>,
    },
    /// Symmetric bulk rates 1/2 (plus weak asymmetry `a/(2n^gamma)`) and a slow
    /// bond between sites n-1 and 0.
    SlowBond { alpha_sb: f64, beta_sb: f64, a: f64, gamma: f64 },
    /// Symmetric bulk rate 1/2 on a segment with reservoirs at sites 1 and n-1.
    Reservoir { alpha_res: f64, beta_res: f64, theta: f64 },
    /// Exchange `(alpha, beta) -> (beta, alpha)` at rate `exp((E_alpha - E_beta)/(2 n^gamma))`.
    Abc { e_a: f64, e_b: f64, e_c: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Swap(usize),
    LongJump { from: usize, to: usize },
    Inject { site: usize, species: Species },
    Remove { site: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub rate: f64,
}

impl RateModel {
    pub fn ssep() -> Self {
        Self::NearestExclusion { b_plus: 0.5, b_minus: 0.5, a: 0.0, gamma: 0.0 }
    }

    /// Weakly asymmetric exclusion `p(+-1) = 1/2 +- a/(2 n^gamma)`.
    pub fn wasep(a: f64, gamma: f64) -> Self {
        Self::NearestExclusion { b_plus: 0.5, b_minus: 0.5, a: 0.5 * a, gamma }
    }

    pub fn asep(b_plus: f64, b_minus: f64) -> Self {
        Self::NearestExclusion { b_plus, b_minus, a: 0.0, gamma: 0.0 }
    }

    pub fn abc(e: [f64; 3], gamma: f64) -> Self {
        Self::Abc { e_a: e[0], e_b: e[1], e_c: e[2], gamma }
    }

    pub fn is_species(&self) -> bool {
        matches!(self, Self::Abc { .. })
    }

    pub fn is_nearest_neighbour(&self) -> bool {
        !matches!(self, Self::LongJump { .. })
    }

    pub fn fields(&self) -> Option<[f64; 3]> {
        match *self {
            Self::Abc { e_a, e_b, e_c, .. } => Some([e_a, e_b, e_c]),
            _ => None,
        }
    }

    /// Check parameter ranges and nonnegativity of every rate at size `n`.
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        let n = lattice.n();
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Self::NearestExclusion { b_plus, b_minus, a, gamma } => {
                if !finite(&[b_plus, b_minus, a, gamma]) || gamma < 0.0 || b_plus < 0.0 || b_minus < 0.0 {
                    return invalid("nearest exclusion needs finite b_plus, b_minus >= 0 and gamma >= 0");
                }
                let (p1, m1) = self.bond_rates(0, n)?;
                if p1 < 0.0 || m1 < 0.0 {
                    return invalid(format!("negative jump rate at n = {n}: p(1) = {p1}, p(-1) = {m1}"));
                }
            }
            Self::LongJump { alpha, c_plus, c_minus, range } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return invalid(format!("long-jump exponent {alpha} outside (0,2)"));
                }
                if !(c_plus > 0.0 && c_minus > 0.0) {
                    return invalid("long-jump constants must be positive");
                }
                if range == Some(0) {
                    return invalid("long-jump range must be at least 1");
                }
                if !lattice.is_ring() {
                    return invalid("long jumps are defined on the ring");
                }
            }
            Self::SlowBond { alpha_sb, beta_sb, gamma, .. } => {
                if !(alpha_sb > 0.0) || beta_sb < 0.0 || gamma < beta_sb {
                    return invalid("slow bond needs alpha > 0, beta >= 0 and gamma >= beta");
                }
                if !lattice.is_ring() {
                    return invalid("the slow bond lives on the ring");
                }
                for x in [0, n - 1] {
                    let (p1, m1) = self.bond_rates(x, n)?;
                    if p1 < 0.0 || m1 < 0.0 {
                        return invalid(format!("negative rate at bond {x}: ({p1}, {m1})"));
                    }
                }
            }
            Self::Reservoir { alpha_res, beta_res, theta } => {
                if !(alpha_res > 0.0 && alpha_res < 1.0 && beta_res > 0.0 && beta_res < 1.0) || !theta.is_finite() {
                    return invalid("reservoir densities must lie in (0,1)");
                }
                if lattice.topology() != Topology::Segment {
                    return invalid("reservoirs need a segment lattice");
                }
            }
            Self::Abc { e_a, e_b, e_c, gamma } => {
                if !finite(&[e_a, e_b, e_c, gamma]) || gamma < 0.0 {
                    return invalid("ABC fields must be finite and gamma >= 0");
                }
                if !lattice.is_ring() {
                    return invalid("the ABC model lives on the ring");
                }
            }
        }
        Ok(())
    }

    /// `(p(1), p(-1))` on the bond `[x, x+1]`.
    pub fn bond_rates(&self, x: usize, n: usize) -> Result<(f64, f64)> {
        let nf = n as f64;
        match *self {
            Self::NearestExclusion { b_plus, b_minus, a, gamma } => {
                let w = a / nf.powf(gamma);
                Ok((b_plus + w, b_minus - w))
            }
            Self::SlowBond { alpha_sb, beta_sb, a, gamma } => {
                let w = a / (2.0 * nf.powf(gamma));
                if x == n - 1 {
                    let s = alpha_sb / (2.0 * nf.powf(beta_sb));
                    Ok((s + w, s - w))
                } else {
                    Ok((0.5 + w, 0.5 - w))
                }
            }
            Self::Reservoir { .. } => Ok((0.5, 0.5)),
            Self::LongJump { .. } | Self::Abc { .. } => Err(Error::Incompatible(
                "bond_rates applies to nearest-neighbour exclusion models".into(),
            )),
        }
    }

    /// Symmetric part of the bond rates; the diffusive coefficient of the current.
    pub fn gradient_coefficient(&self, x: usize, n: usize) -> Result<f64> {
        match self {
            Self::Abc { .. } => Ok(1.0),
            _ => {
                let (p, m) = self.bond_rates(x, n)?;
                Ok(0.5 * (p + m))
            }
        }
    }

    /// Exchange rate of the bond `[x, x+1]` given its content.
    pub fn bond_rate(&self, config: &Configuration, x: usize, lattice: &Lattice) -> Result<f64> {
        let Configuration::Exclusion(occ) = config else {
            return Err(Error::Incompatible("bond_rate needs an exclusion configuration; use abc_bond_rate".into()));
        };
        let y = right(lattice, x)?;
        let (p1, m1) = self.bond_rates(x, lattice.n())?;
        Ok(match (occ[x], occ[y]) {
            (1, 0) => p1,
            (0, 1) => m1,
            _ => 0.0,
        })
    }

    /// Rate at which `(alpha, beta)` on a bond becomes `(beta, alpha)`.
    pub fn abc_rate(&self, alpha: u8, beta: u8, n: usize) -> Result<f64> {
        let Self::Abc { e_a, e_b, e_c, gamma } = *self else {
            return Err(Error::Incompatible("abc_rate needs the ABC model".into()));
        };
        let e = [e_a, e_b, e_c];
        Ok(((e[alpha as usize] - e[beta as usize]) / (2.0 * (n as f64).powf(gamma))).exp())
    }

    /// ABC exchange rate on the bond `[x, x+1]`; 1 for equal labels.
    pub fn abc_bond_rate(&self, config: &Configuration, x: usize, lattice: &Lattice) -> Result<f64> {
        let Configuration::Species(lab) = config else {
            return Err(Error::Incompatible("abc_bond_rate needs a species configuration".into()));
        };
        let y = right(lattice, x)?;
        if lab[x] == lab[y] {
            return Ok(1.0);
        }
        self.abc_rate(lab[x], lab[y], lattice.n())
    }

    /// Injection and removal rates `(inject_left, remove_left, inject_right, remove_right)`.
    pub fn reservoir_rates(&self, n: usize) -> Option<[f64; 4]> {
        match *self {
            Self::Reservoir { alpha_res, beta_res, theta } => {
                let s = (n as f64).powf(-theta);
                Some([alpha_res * s, (1.0 - alpha_res) * s, beta_res * s, (1.0 - beta_res) * s])
            }
            _ => None,
        }
    }

    /// Jump rate to displacement `d` (mod n) for `d` in `0..n`; entry 0 is zero.
    pub fn long_jump_kernel(&self, n: usize) -> Result<Vec<f64>> {
        let Self::LongJump { alpha, c_plus, c_minus, range } = *self else {
            return Err(Error::Incompatible("long_jump_kernel needs the long-jump model".into()));
        };
        let s = 1.0 + alpha;
        let mut k = vec![0.0; n];
        match range {
            Some(r) => {
                for z in 1..=r {
                    let w = (z as f64).powf(-s);
                    let fwd = z % n;
                    let bwd = (n - z % n) % n;
                    if fwd != 0 {
                        k[fwd] += c_plus * w;
                    }
                    if bwd != 0 {
                        k[bwd] += c_minus * w;
                    }
                }
            }
            None => {
                let nf = n as f64;
                let scale = nf.powf(-s);
                for (d, kd) in k.iter_mut().enumerate().skip(1) {
                    let q = d as f64 / nf;
                    *kd = scale * (c_plus * hurwitz_zeta(s, q) + c_minus * hurwitz_zeta(s, 1.0 - q));
                }
            }
        }
        Ok(k)
    }

    /// Every transition with positive rate out of `config`.
    pub fn event_catalog(&self, config: &Configuration, lattice: &Lattice) -> Result<Vec<Event>> {
        check_variant(self, config, lattice)?;
        let n = lattice.n();
        let s = config.sites();
        let mut out = Vec::new();
        match self {
            Self::Abc { .. } => {
                for x in lattice.bonds() {
                    let y = (x + 1) % n;
                    if s[x] != s[y] {
                        out.push(Event { kind: EventKind::Swap(x), rate: self.abc_rate(s[x], s[y], n)? });
                    }
                }
            }
            Self::LongJump { .. } => {
                let k = self.long_jump_kernel(n)?;
                for x in 0..n {
                    if s[x] == 0 {
                        continue;
                    }
                    for (d, &r) in k.iter().enumerate().skip(1) {
                        let y = (x + d) % n;
                        if s[y] == 0 && r > 0.0 {
                            out.push(Event { kind: EventKind::LongJump { from: x, to: y }, rate: r });
                        }
                    }
                }
            }
            _ => {
                for x in lattice.bonds() {
                    let r = self.bond_rate(config, x, lattice)?;
                    if r > 0.0 {
                        out.push(Event { kind: EventKind::Swap(x), rate: r });
                    }
                }
                if let Some([il, rl, ir, rr]) = self.reservoir_rates(n) {
                    for (site, inj, rem) in [(1, il, rl), (n - 1, ir, rr)] {
                        if s[site] == 0 && inj > 0.0 {
                            out.push(Event { kind: EventKind::Inject { site, species: Species::A }, rate: inj });
                        } else if s[site] == 1 && rem > 0.0 {
                            out.push(Event { kind: EventKind::Remove { site }, rate: rem });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Signed current across `[x, x+1]`: jump rate to the right minus jump rate to the left.
    pub fn instantaneous_current(&self, config: &Configuration, x: usize, lattice: &Lattice) -> Result<f64> {
        match self {
            Self::LongJump { .. } => Err(Error::Incompatible("long jumps have no single-bond current".into())),
            Self::Abc { .. } => Err(Error::Incompatible("use abc_current with a species".into())),
            _ => {
                let Configuration::Exclusion(occ) = config else {
                    return Err(Error::Incompatible("exclusion model needs an exclusion configuration".into()));
                };
                let y = right(lattice, x)?;
                let (p1, m1) = self.bond_rates(x, lattice.n())?;
                let (a, b) = (occ[x] as f64, occ[y] as f64);
                Ok(p1 * a * (1.0 - b) - m1 * b * (1.0 - a))
            }
        }
    }

    /// Current of `species` across `[x, x+1]` in the ABC model.
    pub fn abc_current(&self, config: &Configuration, x: usize, species: Species, lattice: &Lattice) -> Result<f64> {
        let Configuration::Species(lab) = config else {
            return Err(Error::Incompatible("abc_current needs a species configuration".into()));
        };
        let y = right(lattice, x)?;
        let a = species as u8;
        let n = lattice.n();
        Ok(if lab[x] == a && lab[y] != a {
            self.abc_rate(a, lab[y], n)?
        } else if lab[y] == a && lab[x] != a {
            -self.abc_rate(lab[x], a, n)?
        } else {
            0.0
        })
    }

    /// Current of the channel observed through `species` (ignored for exclusion models).
    pub fn current(&self, config: &Configuration, x: usize, species: Species, lattice: &Lattice) -> Result<f64> {
        if self.is_species() {
            self.abc_current(config, x, species, lattice)
        } else {
            self.instantaneous_current(config, x, lattice)
        }
    }
}

/// Apply a transition in place.
pub fn apply_event(config: &mut Configuration, kind: EventKind, lattice: &Lattice) -> Result<()> {
    match kind {
        EventKind::Swap(x) => config.swap_in_place(x, lattice),
        EventKind::LongJump { from, to } => {
            config.sites_mut().swap(from, to);
            Ok(())
        }
        EventKind::Inject { site, .. } => {
            config.sites_mut()[site] = 1;
            Ok(())
        }
        EventKind::Remove { site } => {
            config.sites_mut()[site] = 0;
            Ok(())
        }
    }
}

fn right(lattice: &Lattice, x: usize) -> Result<usize> {
    lattice
        .right(x)
        .ok_or_else(|| Error::InvalidParameter(format!("no exchange bond at {x}")))
}

pub(crate) fn check_variant(model: &RateModel, config: &Configuration, lattice: &Lattice) -> Result<()> {
    if config.len() != lattice.n() {
        return Err(Error::Incompatible(format!(
            "configuration has {} sites, lattice {}",
            config.len(),
            lattice.n()
        )));
    }
    if model.is_species() != config.is_species() {
        return Err(Error::Incompatible("model and configuration variants differ".into()));
    }
    Ok(())
}

/// Hurwitz zeta `sum_{k>=0} (q+k)^-s` for `s > 1`, `q > 0`, by Euler-Maclaurin.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 12;
    // B_2/2!, B_4/4!, B_6/6!, B_8/8!, B_10/10!
    const B: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let mut sum: f64 = (0..N).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) times a^(-s-2j+1)
    let mut fact = s;
    let mut pow = a.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * fact * pow;
        let m = 2.0 * j as f64;
        fact *= (s + m + 1.0) * (s + m + 2.0);
        pow /= a * a;
    }
    sum
}
