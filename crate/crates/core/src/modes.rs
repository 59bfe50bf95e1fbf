//! Normal modes of the two-conservation-law ABC system.
//!
//! Work in the pair `(alpha, alpha+1)` with `E_{alpha+2}` subtracted, so
//! `g = (E_alpha - E_{alpha+2}, E_{alpha+1} - E_{alpha+2})` and the macroscopic
//! current is `X(rho) g`. Mode coefficient vectors are left eigenvectors of
//! `J = d(X g)/d rho`; the eigenvalue times `n^{2-gamma}` is the speed of the
//! mode in sites per unit macroscopic time, with the frame pairing site `x`
//! with `f((x - v t)/n)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::RateModel;
use crate::error::{invalid, Error, Result};
use crate::fields::{Channel, StructureFunction};
use crate::fields::structure::signed_offset;
use crate::lattice::Species;

pub type Mat2 = [[f64; 2]; 2];

/// `X(rho)` for the pair densities.
pub fn mobility(rho: [f64; 2]) -> Mat2 {
    let [a, b] = rho;
    [[a * (1.0 - a), -a * b], [-a * b, b * (1.0 - b)]]
}

/// `g_E` for the pair starting at `alpha`.
pub fn field_vector(fields: [f64; 3], alpha: Species) -> [f64; 2] {
    let i = alpha.index();
    let e = |k: usize| fields[(i + k) % 3];
    [e(0) - e(2), e(1) - e(2)]
}

/// `X(rho) g`.
pub fn macroscopic_current(rho: [f64; 2], g: [f64; 2]) -> [f64; 2] {
    let x = mobility(rho);
    [x[0][0] * g[0] + x[0][1] * g[1], x[1][0] * g[0] + x[1][1] * g[1]]
}

fn check_simplex(rho: [f64; 2]) -> Result<()> {
    if !(rho[0] > 0.0 && rho[1] > 0.0 && rho[0] + rho[1] < 1.0) {
        return invalid(format!("densities {rho:?} outside the open simplex"));
    }
    Ok(())
}

/// `J = d(X(rho) g)/d rho`, differentiated by hand.
pub fn current_jacobian(rho: [f64; 2], g: [f64; 2]) -> Result<Mat2> {
    check_simplex(rho)?;
    let [a, b] = rho;
    let [g1, g2] = g;
    Ok([[(1.0 - 2.0 * a) * g1 - b * g2, -a * g2], [-b * g1, -a * g1 + (1.0 - 2.0 * b) * g2]])
}

/// Hessians of the two current components.
fn current_hessians(g: [f64; 2]) -> [Mat2; 2] {
    let [g1, g2] = g;
    [[[-2.0 * g1, -g2], [-g2, 0.0]], [[0.0, -g1], [-g1, -2.0 * g2]]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeClass {
    Kpz,
    Diffusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldCase {
    Generic,
    /// `E_{alpha+1} = E_{alpha+2} != E_alpha`.
    CaseI,
    /// `E_alpha = E_{alpha+1} != E_{alpha+2}`.
    CaseII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModeSpec {
    pub alpha: Species,
    pub density: [f64; 2],
    pub g: [f64; 2],
    pub case: FieldCase,
    /// Coefficients of `(Y^alpha, Y^{alpha+1})` for `Z` then `Z~`, first nonzero entry 1.
    pub coefficients: [[f64; 2]; 2],
    /// Eigenvalues of `J` for each mode.
    pub eigenvalues: [f64; 2],
    /// Mode self-coupling `G^i_ii`; zero marks a diffusive mode.
    pub self_coupling: [f64; 2],
    pub classes: [ModeClass; 2],
}

impl NormalModeSpec {
    /// Channel weights of mode `i` (0 for `Z`, 1 for `Z~`).
    pub fn channel(&self, i: usize) -> Channel {
        Channel::mode(self.alpha, self.coefficients[i])
    }
}

fn normalise(w: [f64; 2]) -> [f64; 2] {
    let s = if w[0].abs() > 1e-300 { w[0] } else { w[1] };
    [w[0] / s, w[1] / s]
}

fn inverse(r: Mat2) -> Result<Mat2> {
    let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    if det.abs() < 1e-14 {
        return Err(Error::Degenerate("mode vectors are linearly dependent".into()));
    }
    Ok([[r[1][1] / det, -r[0][1] / det], [-r[1][0] / det, r[0][0] / det]])
}

fn quad(h: &Mat2, v: [f64; 2]) -> f64 {
    v[0] * (h[0][0] * v[0] + h[0][1] * v[1]) + v[1] * (h[1][0] * v[0] + h[1][1] * v[1])
}

/// Relative tolerance below which a self-coupling counts as zero.
pub const COUPLING_TOLERANCE: f64 = 1e-10;

/// Diagonalize `J` for the pair starting at `alpha` with species densities `rho`.
pub fn normal_modes(alpha: Species, rho: [f64; 3], fields: [f64; 3]) -> Result<NormalModeSpec> {
    let i = alpha.index();
    let density = [rho[i], rho[(i + 1) % 3]];
    let g = field_vector(fields, alpha);
    let j = current_jacobian(density, g)?;
    let scale = g[0].abs() + g[1].abs();
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if scale == 0.0 || disc <= (1e-12 * scale).powi(2) {
        return Err(Error::Degenerate(format!("repeated eigenvalue of J for g = {g:?}")));
    }
    let root = disc.sqrt();
    let lam = [tr / 2.0 + root, tr / 2.0 - root];
    let vectors = lam.map(|l| {
        let w = [j[1][0], l - j[0][0]];
        let alt = [l - j[1][1], j[0][1]];
        normalise(if w[0].abs() + w[1].abs() >= alt[0].abs() + alt[1].abs() { w } else { alt })
    });
    let rinv = inverse(vectors)?;
    let h = current_hessians(g);
    let coupling: [f64; 2] = [0, 1].map(|m| {
        let col = [rinv[0][m], rinv[1][m]];
        vectors[m][0] * quad(&h[0], col) + vectors[m][1] * quad(&h[1], col)
    });
    let class = |c: f64| if c.abs() <= COUPLING_TOLERANCE * scale { ModeClass::Diffusive } else { ModeClass::Kpz };
    let mut order = [0, 1];
    if class(coupling[0]) == ModeClass::Diffusive && class(coupling[1]) == ModeClass::Kpz {
        order = [1, 0];
    }
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12 * scale;
    let case = if eq(g[1], 0.0) {
        FieldCase::CaseI
    } else if eq(g[0], g[1]) {
        FieldCase::CaseII
    } else {
        FieldCase::Generic
    };
    Ok(NormalModeSpec {
        alpha,
        density,
        g,
        case,
        coefficients: order.map(|k| vectors[k]),
        eigenvalues: order.map(|k| lam[k]),
        self_coupling: order.map(|k| coupling[k]),
        classes: order.map(|k| class(coupling[k])),
    })
}

/// Modes for an ABC rate model at the given species densities.
pub fn model_modes(model: &RateModel, alpha: Species, rho: [f64; 3]) -> Result<NormalModeSpec> {
    let fields = model.fields().ok_or_else(|| Error::Incompatible("normal modes need the ABC model".into()))?;
    normal_modes(alpha, rho, fields)
}

/// Equal-density closed form: `Z = E_a Y^a + (E_a - E_{a+1} -+ d) Y^{a+1}` with
/// `d = sqrt(E_a^2 + E_{a+1}^2 - E_a E_{a+1})` after normalising `E_{a+2} = 0`.
pub fn equal_density_coefficients(g: [f64; 2]) -> [[f64; 2]; 2] {
    let d = (g[0] * g[0] + g[1] * g[1] - g[0] * g[1]).sqrt();
    [[g[0], g[0] - g[1] - d], [g[0], g[0] - g[1] + d]]
}

/// Mode speed `lambda n^{2-gamma}` in sites per unit macroscopic time.
pub fn frame_velocity(spec: &NormalModeSpec, mode: usize, n: usize, gamma: f64) -> f64 {
    spec.eigenvalues[mode] * (n as f64).powf(2.0 - gamma)
}

/// `sum_x x S(x,t)` per lag, with batch-means standard errors.
pub fn first_moments(s: &StructureFunction) -> Vec<(f64, f64)> {
    let n = s.n;
    (0..s.times.len())
        .map(|lag| {
            let e = s.batch_estimate(lag, |row| (0..n).map(|x| signed_offset(x, n) as f64 * row[x]).sum());
            (e.mean, e.se)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctCheck {
    /// Least-squares constant `k` in `sum_j j S(j,t) = k n^{2-gamma} J C t`.
    pub fitted_constant: f64,
    pub fitted_se: f64,
    /// Largest `|measured - predicted| / se` with `k = 1`, over times and entries.
    pub max_z: f64,
    /// Largest `|measured - predicted|` relative to the largest predicted entry.
    pub relative_residual: f64,
}

/// First-moment sum rule for a 2x2 family of structure functions
/// `s[a][b] ~ <xi^a_x(t) xi^b_0(0)>` against `n^{2-gamma} J C t`.
pub fn mct_first_moment(s: [[&StructureFunction; 2]; 2], j: Mat2, c: Mat2, n: usize, gamma: f64) -> Result<MctCheck> {
    let lags = s[0][0].times.len();
    if s.iter().flatten().any(|f| f.times.len() != lags) {
        return invalid("structure functions on different lag grids");
    }
    let scale = (n as f64).powf(2.0 - gamma);
    let mut jc = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            jc[a][b] = scale * (j[a][0] * c[0][b] + j[a][1] * c[1][b]);
        }
    }
    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    let mut max_z: f64 = 0.0;
    let mut max_res: f64 = 0.0;
    let mut max_pred: f64 = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let mom = first_moments(s[a][b]);
            for (k, &(m, se)) in mom.iter().enumerate() {
                let pred = jc[a][b] * s[a][b].times[k];
                max_pred = max_pred.max(pred.abs());
                max_res = max_res.max((m - pred).abs());
                if se > 0.0 && se.is_finite() {
                    max_z = max_z.max((m - pred).abs() / se);
                    xs.push(pred);
                    ys.push(m);
                    ws.push(1.0 / (se * se));
                } else if (m - pred).abs() > 1e-12 {
                    max_z = f64::INFINITY;
                }
            }
        }
    }
    // fit y = k x through the origin
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).zip(&ws).map(|((x, y), w)| w * x * y).sum();
    let (k, kse) = if sxx > 0.0 { (sxy / sxx, (1.0 / sxx).sqrt()) } else { (f64::NAN, f64::NAN) };
    Ok(MctCheck {
        fitted_constant: k,
        fitted_se: kse,
        max_z,
        relative_residual: if max_pred > 0.0 { max_res / max_pred } else { max_res },
    })
}
