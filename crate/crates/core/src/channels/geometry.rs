//! Multibeam antenna pattern, satellite/user geometry and RF channel vectors.

use super::shadowed_rician::SrDraw;
use crate::error::{parameter, Result};
use crate::specfun::bessel_j;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;
pub const GEO_ALTITUDE_M: f64 = 35_786_000.0;

/// Argument scale placing the pattern's −3 dB point at φ = φ_3dB.
pub const U_3DB: f64 = 2.07123;

const SMALL_U: f64 = 1e-4;

fn pattern_amplitude(u: f64) -> f64 {
    if u < SMALL_U {
        // four-term series of J₁(u)/(2u) and 36·J₃(u)/u³
        let q = u * u / 4.0;
        let mut j1 = 0.0;
        let mut j3 = 0.0;
        let mut qk = 1.0;
        let mut fk = 1.0; // k!
        for k in 0..4 {
            let kf = k as f64;
            if k > 0 {
                qk *= -q;
                fk *= kf;
            }
            let f1 = fk * (1..=k + 1).map(|i| i as f64).product::<f64>();
            let f3 = fk * (1..=k + 3).map(|i| i as f64).product::<f64>();
            j1 += 0.25 * qk / f1;
            j3 += 4.5 * qk / f3;
        }
        return j1 + j3;
    }
    let j1 = bessel_j(1, u).expect("finite argument");
    let j3 = bessel_j(3, u).expect("finite argument");
    j1 / (2.0 * u) + 36.0 * j3 / (u * u * u)
}

/// Beam gain toward an off-axis angle φ, normalized so that g(0) = g_max.
pub fn beam_gain(phi: f64, phi3db: f64, gmax: f64) -> f64 {
    let u = U_3DB * phi.sin().abs() / phi3db.sin();
    let limit = pattern_amplitude(0.0);
    let r = pattern_amplitude(u) / limit;
    gmax * r * r
}

/// Satellite, beam and user layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGeometry {
    /// K×N off-axis angles φ_kn (radians).
    pub phi: DMatrix<f64>,
    pub phi3db: f64,
    pub gmax: f64,
    /// Slant range per user (meters).
    pub d: Vec<f64>,
    pub fc: f64,
    pub gr: f64,
}

impl BeamGeometry {
    pub fn n_beams(&self) -> usize {
        self.phi.ncols()
    }

    pub fn n_users(&self) -> usize {
        self.phi.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_users() < 1 || self.n_beams() < 1 {
            return Err(parameter("geometry: need at least one user and one beam"));
        }
        if self.d.len() != self.n_users() {
            return Err(parameter("geometry: one slant distance per user is required"));
        }
        if self.phi.iter().any(|&a| !(a >= 0.0)) {
            return Err(parameter("geometry: off-axis angles must be ≥ 0"));
        }
        if self.d.iter().any(|&d| !(d > 0.0)) {
            return Err(parameter("geometry: distances must be > 0"));
        }
        if !(self.phi3db > 0.0 && self.gmax > 0.0 && self.fc > 0.0 && self.gr > 0.0) {
            return Err(parameter("geometry: phi3db, gmax, fc and GR must be > 0"));
        }
        Ok(())
    }

    /// Free-space amplitude h̃_ℓ = c / (4π f_c d_k).
    pub fn path_amplitude(&self, k: usize) -> f64 {
        SPEED_OF_LIGHT / (4.0 * PI * self.fc * self.d[k])
    }

    /// Propagation phase −2π f_c d_k / c, reduced to (−π, π].
    pub fn path_phase(&self, k: usize) -> f64 {
        // reduce the cycle count before scaling to keep the phase exact-ish
        let cycles = self.fc * self.d[k] / SPEED_OF_LIGHT;
        let frac = cycles - cycles.round();
        -2.0 * PI * frac
    }

    /// Beam gains g_k1..g_kN for user `k` (0-based).
    pub fn gains(&self, k: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.n_beams(),
            (0..self.n_beams()).map(|n| beam_gain(self.phi[(k, n)], self.phi3db, self.gmax)),
        )
    }
}

/// Real steering vector a(φ_k) = √G_R · h̃_ℓ · g_k^{1/2}, for user `k` (0-based).
pub fn steering_vector(geom: &BeamGeometry, k: usize) -> DVector<f64> {
    let s = geom.gr.sqrt() * geom.path_amplitude(k);
    geom.gains(k).map(|g| s * g.sqrt())
}

/// Steering vector with the deterministic propagation phase applied.
pub fn steering_vector_phased(geom: &BeamGeometry, k: usize) -> DVector<Complex64> {
    let ph = Complex64::from_polar(1.0, geom.path_phase(k));
    steering_vector(geom, k).map(|a| ph * a)
}

/// Deterministic part of h_k: √G_R · g_k^{1/2} ⊙ h̃_k.
pub fn channel_mean_direction(geom: &BeamGeometry, k: usize) -> DVector<Complex64> {
    steering_vector_phased(geom, k)
}

/// One fresh draw of the channel vector h_k = √G_R·ρ_k·g_k^{1/2} ⊙ h̃_k.
pub fn build_channel<R: Rng + ?Sized>(
    rng: &mut R,
    geom: &BeamGeometry,
    fading: &SrDraw,
    k: usize,
) -> DVector<Complex64> {
    let rho = fading.draw(rng);
    channel_mean_direction(geom, k).map(|v| rho * v)
}

/// Beam centers on a hexagonal lattice, as unit pointing offsets
/// (θx, θy) in radians around the satellite boresight.
pub fn hex_beam_centers(n: usize, spacing: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0)];
    let mut ring = 1;
    while out.len() < n {
        // walk the hexagonal ring of radius `ring`
        let corners: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let a = PI / 3.0 * i as f64;
                (ring as f64 * a.cos(), ring as f64 * a.sin())
            })
            .collect();
        for i in 0..6 {
            let (x0, y0) = corners[i];
            let (x1, y1) = corners[(i + 1) % 6];
            for s in 0..ring {
                let t = s as f64 / ring as f64;
                out.push((x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
            }
        }
        ring += 1;
    }
    out.truncate(n);
    out.into_iter().map(|(x, y)| (x * spacing, y * spacing)).collect()
}

/// Unit direction from the satellite for an angular offset (θx, θy)
/// from nadir.
fn direction(off: (f64, f64)) -> [f64; 3] {
    let (tx, ty) = off;
    let v = [tx.tan(), ty.tan(), 1.0];
    let n = (v[0] * v[0] + v[1] * v[1] + 1.0).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Slant range from a GEO satellite to the Earth surface along a ray at
/// nadir angle ψ.
pub fn geo_slant_range(psi: f64) -> f64 {
    let rs = EARTH_RADIUS_M + GEO_ALTITUDE_M;
    let re = EARTH_RADIUS_M;
    let disc = re * re - rs * rs * psi.sin().powi(2);
    rs * psi.cos() - disc.max(0.0).sqrt()
}

/// Layout parameters for [`random_geometry`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutSpec {
    pub beams: usize,
    pub users: usize,
    pub phi3db: f64,
    pub gmax: f64,
    pub fc: f64,
    pub gr: f64,
    /// Center spacing in units of φ_3dB.
    pub spacing: f64,
    /// Radius of the per-beam user disk in units of φ_3dB.
    pub user_radius: f64,
}

/// Hexagonal beam layout with user k placed uniformly at random in the
/// disk around beam center k mod N, all angles seen from a GEO satellite
/// pointing at nadir.
pub fn random_geometry<R: Rng + ?Sized>(rng: &mut R, spec: &LayoutSpec) -> Result<BeamGeometry> {
    if spec.beams == 0 || spec.users == 0 {
        return Err(parameter("layout: beams and users must be ≥ 1"));
    }
    let centers = hex_beam_centers(spec.beams, spec.spacing * spec.phi3db);
    let mut phi = DMatrix::zeros(spec.users, spec.beams);
    let mut d = Vec::with_capacity(spec.users);
    for k in 0..spec.users {
        let c = centers[k % spec.beams];
        let r = spec.user_radius * spec.phi3db * rng.random::<f64>().sqrt();
        let t = rng.random::<f64>() * 2.0 * PI;
        let pos = (c.0 + r * t.cos(), c.1 + r * t.sin());
        let u = direction(pos);
        for (n, &cn) in centers.iter().enumerate() {
            let v = direction(cn);
            let dot = (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0);
            // atan2 form stays accurate for tiny angles
            let cross = ((u[1] * v[2] - u[2] * v[1]).powi(2)
                + (u[2] * v[0] - u[0] * v[2]).powi(2)
                + (u[0] * v[1] - u[1] * v[0]).powi(2))
            .sqrt();
            phi[(k, n)] = cross.atan2(dot);
        }
        d.push(geo_slant_range(u[2].acos()));
    }
    let geom = BeamGeometry {
        phi,
        phi3db: spec.phi3db,
        gmax: spec.gmax,
        d,
        fc: spec.fc,
        gr: spec.gr,
    };
    geom.validate()?;
    Ok(geom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_at_boresight_is_gmax() {
        assert!((beam_gain(0.0, 0.2f64.to_radians(), 1.6e5) / 1.6e5 - 1.0).abs() < 1e-12);
        assert!((pattern_amplitude(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn series_joins_bessel_form() {
        let u = SMALL_U;
        let series = pattern_amplitude(u * (1.0 - 1e-12));
        let direct = {
            let j1 = bessel_j(1, u).unwrap();
            let j3 = bessel_j(3, u).unwrap();
            j1 / (2.0 * u) + 36.0 * j3 / (u * u * u)
        };
        assert!((series - direct).abs() < 1e-8);
    }

    #[test]
    fn hex_rings() {
        let c = hex_beam_centers(7, 1.0);
        assert_eq!(c.len(), 7);
        for &(x, y) in &c[1..] {
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-12);
        }
        assert_eq!(hex_beam_centers(19, 1.0).len(), 19);
    }

    #[test]
    fn nadir_slant_range_is_altitude() {
        assert!((geo_slant_range(0.0) - GEO_ALTITUDE_M).abs() < 1e-6);
        assert!(geo_slant_range(0.05) > GEO_ALTITUDE_M);
    }

    #[test]
    fn phase_matches_formula_mod_two_pi() {
        let g = BeamGeometry {
            phi: DMatrix::zeros(1, 1),
            phi3db: 0.01,
            gmax: 1.0,
            d: vec![1234.5678],
            fc: 2.0e9,
            gr: 1.0,
        };
        let raw = -2.0 * PI * g.fc * g.d[0] / SPEED_OF_LIGHT;
        let diff = (g.path_phase(0) - raw).rem_euclid(2.0 * PI);
        assert!(diff < 1e-9 || 2.0 * PI - diff < 1e-9);
    }
}
