//! Nearest-neighbour event selection.
//!
//! Every slot (bond or reservoir site) belongs to a class of equal rate.  A
//! class keeps its member slots in a vector with a position map, so moving a
//! slot between classes is O(1).  An event is drawn by choosing a class with
//! probability proportional to `rate * size` and then a uniform member.

use rand::Rng;

use crate::dynamics::RateModel;
use crate::error::Result;
use crate::lattice::{Configuration, Lattice};

const NONE: u32 = u32::MAX;
// Exclusion classes: 3 * bond_type + local, local 0 = equal, 1 = (1,0), 2 = (0,1).
// Bond type 1 is the special bond n-1 of the slow-bond model.
const RES_LEFT: usize = 6;
const RES_RIGHT: usize = 8;
const N_CLASSES: usize = 10;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Moved {
    pub bond: usize,
    /// Species moving right across `bond` (if any) and species moving left.
    pub right: Option<u8>,
    pub left: Option<u8>,
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct ClassKernel {
    n: usize,
    species: bool,
    special_bond: Option<usize>,
    reservoir: bool,
    ring: bool,
    rates: [f64; N_CLASSES],
    active: Vec<usize>,
    members: Vec<Vec<u32>>,
    class_of: Vec<u32>,
    pos: Vec<u32>,
}

impl ClassKernel {
    pub fn new(model: &RateModel, config: &Configuration, lattice: &Lattice) -> Result<Self> {
        let n = lattice.n();
        let mut rates = [0.0; N_CLASSES];
        let species = model.is_species();
        let mut special_bond = None;
        let mut reservoir = false;
        if species {
            for a in 0..3u8 {
                for b in 0..3u8 {
                    if a != b {
                        rates[3 * a as usize + b as usize] = model.abc_rate(a, b, n)?;
                    }
                }
            }
        } else {
            let (p, m) = model.bond_rates(0, n)?;
            rates[1] = p;
            rates[2] = m;
            if matches!(model, RateModel::SlowBond { .. }) {
                let (p, m) = model.bond_rates(n - 1, n)?;
                rates[4] = p;
                rates[5] = m;
                special_bond = Some(n - 1);
            }
            if let Some([il, rl, ir, rr]) = model.reservoir_rates(n) {
                rates[RES_LEFT] = il;
                rates[RES_LEFT + 1] = rl;
                rates[RES_RIGHT] = ir;
                rates[RES_RIGHT + 1] = rr;
                reservoir = true;
            }
        }
        let active = (0..N_CLASSES).filter(|&c| rates[c] > 0.0).collect();
        let mut k = Self {
            n,
            species,
            special_bond,
            reservoir,
            ring: lattice.is_ring(),
            rates,
            active,
            members: vec![Vec::new(); N_CLASSES],
            class_of: vec![NONE; n + 2],
            pos: vec![NONE; n + 2],
        };
        let s = config.sites();
        for slot in 0..n + 2 {
            k.refresh(slot, s);
        }
        Ok(k)
    }

    fn is_bond(&self, x: usize) -> bool {
        if self.ring {
            x < self.n
        } else {
            x >= 1 && x + 1 < self.n
        }
    }

    fn class_for(&self, slot: usize, s: &[u8]) -> u32 {
        let n = self.n;
        if slot < n {
            if !self.is_bond(slot) {
                return NONE;
            }
            let (a, b) = (s[slot], s[(slot + 1) % n]);
            if self.species {
                return 3 * a as u32 + b as u32;
            }
            let local = match (a, b) {
                (1, 0) => 1,
                (0, 1) => 2,
                _ => 0,
            };
            let bt = (self.special_bond == Some(slot)) as u32;
            3 * bt + local
        } else if self.reservoir {
            if slot == n {
                (RES_LEFT + s[1] as usize) as u32
            } else {
                (RES_RIGHT + s[n - 1] as usize) as u32
            }
        } else {
            NONE
        }
    }

    fn refresh(&mut self, slot: usize, s: &[u8]) {
        let new = self.class_for(slot, s);
        let old = self.class_of[slot];
        if new == old {
            return;
        }
        if old != NONE {
            let list = &mut self.members[old as usize];
            let p = self.pos[slot] as usize;
            let last = *list.last().expect("slot listed in its class");
            list.swap_remove(p);
            if last as usize != slot {
                self.pos[last as usize] = p as u32;
            }
        }
        if new != NONE {
            let list = &mut self.members[new as usize];
            self.pos[slot] = list.len() as u32;
            list.push(slot as u32);
        } else {
            self.pos[slot] = NONE;
        }
        self.class_of[slot] = new;
    }

    pub fn total_rate(&self) -> f64 {
        self.active.iter().map(|&c| self.rates[c] * self.members[c].len() as f64).sum()
    }

    /// Draw and execute one event.  Requires `total_rate() > 0`.
    pub fn fire<R: Rng>(&mut self, s: &mut [u8], total: f64, rng: &mut R) -> Moved {
        let mut u = rng.random::<f64>() * total;
        let mut chosen = *self.active.last().expect("positive total rate");
        for &c in &self.active {
            let w = self.rates[c] * self.members[c].len() as f64;
            if u < w {
                chosen = c;
                break;
            }
            u -= w;
        }
        let list = &self.members[chosen];
        let idx = ((u / self.rates[chosen]) as usize).min(list.len() - 1);
        let slot = list[idx] as usize;
        let n = self.n;
        if slot < n {
            let y = (slot + 1) % n;
            let (a, b) = (s[slot], s[y]);
            s.swap(slot, y);
            let (right, left) = if self.species {
                (Some(a), Some(b))
            } else if a == 1 {
                (Some(0), None)
            } else {
                (None, Some(0))
            };
            for t in [slot + n - 1, slot, slot + 1] {
                let t = t % n;
                self.refresh(t, s);
            }
            if self.reservoir {
                self.refresh(n, s);
                self.refresh(n + 1, s);
            }
            Moved { bond: slot, right, left, boundary: false }
        } else {
            let site = if slot == n { 1 } else { n - 1 };
            s[site] ^= 1;
            self.refresh(site - 1, s);
            self.refresh(site, s);
            self.refresh(n, s);
            self.refresh(n + 1, s);
            Moved { bond: site, right: None, left: None, boundary: true }
        }
    }
}
