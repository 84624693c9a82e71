use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    #[serde(rename = "c")]
    pub center: Complex64,
    #[serde(rename = "r")]
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    /// `count` equispaced points on the boundary circle, starting at angle 0.
    pub fn circle(&self, count: usize) -> impl Iterator<Item = Complex64> + '_ {
        (0..count).map(move |k| self.center + Complex64::from_polar(self.radius, TAU * k as f64 / count as f64))
    }
}

/// Closed disk minus finitely many open disks whose closures sit inside the
/// open outer disk and are pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactRegion {
    outer: Disk,
    holes: Vec<Disk>,
}

#[derive(Deserialize)]
struct RegionRepr {
    outer: Disk,
    #[serde(default)]
    holes: Vec<Disk>,
}

impl<'de> Deserialize<'de> for CompactRegion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RegionRepr::deserialize(d)?;
        CompactRegion::new(r.outer, r.holes).map_err(serde::de::Error::custom)
    }
}

impl CompactRegion {
    pub fn new(outer: Disk, holes: Vec<Disk>) -> Result<Self> {
        if !(outer.radius > 0.0) || !outer.radius.is_finite() {
            return Err(Error::InvalidParameter(format!("outer radius must be positive, got {}", outer.radius)));
        }
        for h in &holes {
            if !(h.radius > 0.0) {
                return Err(Error::InvalidParameter(format!("hole radius must be positive, got {}", h.radius)));
            }
            if (h.center - outer.center).norm() + h.radius >= outer.radius {
                return Err(Error::InvalidParameter(format!(
                    "hole |{} - {}| + {} is not inside the open outer disk of radius {}",
                    h.center, outer.center, h.radius, outer.radius
                )));
            }
        }
        for (i, a) in holes.iter().enumerate() {
            for b in &holes[i + 1..] {
                if (a.center - b.center).norm() <= a.radius + b.radius {
                    return Err(Error::InvalidParameter("hole closures intersect".into()));
                }
            }
        }
        Ok(Self { outer, holes })
    }

    /// `D̄(center, radius)`.
    pub fn disk(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(Disk::new(center, radius), Vec::new())
    }

    /// Closed unit disk.
    pub fn unit_disk() -> Self {
        Self::disk(Complex64::new(0.0, 0.0), 1.0).expect("unit disk is valid")
    }

    pub fn outer(&self) -> Disk {
        self.outer
    }

    pub fn holes(&self) -> &[Disk] {
        &self.holes
    }

    /// Euclidean distance from `z` to the region; zero inside.
    pub fn distance(&self, z: Complex64) -> f64 {
        let out = ((z - self.outer.center).norm() - self.outer.radius).max(0.0);
        if out > 0.0 {
            return out;
        }
        // holes are disjoint and interior to the outer disk, so at most one matters
        self.holes
            .iter()
            .map(|h| (h.radius - (z - h.center).norm()).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// `points_per_circle` samples on the outer circle followed by each hole circle.
    pub fn boundary_samples(&self, points_per_circle: usize) -> Vec<Complex64> {
        std::iter::once(&self.outer)
            .chain(&self.holes)
            .flat_map(|d| d.circle(points_per_circle).collect::<Vec<_>>())
            .collect()
    }

    /// Deterministic interior samples on concentric rings of the outer disk,
    /// with points inside holes discarded. Roughly `count` points.
    pub fn interior_samples(&self, count: usize) -> Vec<Complex64> {
        let rings = ((count as f64).sqrt().ceil() as usize).max(1);
        let per_ring = (count / rings).max(1);
        let mut out = vec![self.outer.center];
        for i in 1..=rings {
            let rho = self.outer.radius * i as f64 / (rings + 1) as f64;
            // golden-angle offset keeps rings from lining up
            let offset = i as f64 * 2.399_963_229_728_653;
            for k in 0..per_ring {
                let z = self.outer.center + Complex64::from_polar(rho, offset + TAU * k as f64 / per_ring as f64);
                if self.contains(z, 0.0) {
                    out.push(z);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validation() {
        let outer = Disk::new(c(0.0, 0.0), 3.0);
        assert!(CompactRegion::new(outer, vec![Disk::new(c(2.0, 0.0), 0.5)]).is_ok());
        assert!(CompactRegion::new(outer, vec![Disk::new(c(2.5, 0.0), 0.5)]).is_err());
        assert!(CompactRegion::new(
            outer,
            vec![Disk::new(c(1.0, 0.0), 0.5), Disk::new(c(1.8, 0.0), 0.5)]
        )
        .is_err());
        assert!(CompactRegion::disk(c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn membership_and_distance() {
        let k = CompactRegion::new(Disk::new(c(0.0, 0.0), 3.0), vec![Disk::new(c(2.0, 0.0), 0.5)]).unwrap();
        assert!(k.contains(c(0.0, 0.0), 0.0));
        assert!(k.contains(c(2.5, 0.0), 0.0));
        assert!(!k.contains(c(2.0, 0.0), 1e-8));
        assert!((k.distance(c(2.1, 0.0)) - 0.4).abs() < 1e-12);
        assert!((k.distance(c(0.0, 4.0)) - 1.0).abs() < 1e-12);
        assert_eq!(k.boundary_samples(16).len(), 32);
        assert!(k.interior_samples(200).iter().all(|&z| k.contains(z, 0.0)));
    }

    #[test]
    fn json_shape() {
        let k = CompactRegion::new(Disk::new(c(0.0, 0.0), 3.0), vec![Disk::new(c(2.0, 0.0), 0.5)]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"outer":{"c":[0.0,0.0],"r":3.0},"holes":[{"c":[2.0,0.0],"r":0.5}]}"#);
        let back: CompactRegion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
        assert!(serde_json::from_str::<CompactRegion>(r#"{"outer":{"c":[0,0],"r":1},"holes":[{"c":[0.9,0],"r":0.5}]}"#).is_err());
    }
}
