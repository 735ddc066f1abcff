//! Averages over a common random dipole orientation.
//!
//! Forces, energies and emission rates are even quartic polynomials in the
//! dipole direction when both atoms share it. The twelve vertices of a regular
//! icosahedron average every polynomial of degree up to five exactly; for even
//! integrands one vertex per antipodal pair suffices, so six evaluations
//! reproduce the full orientation average.

use std::ops::{Add, Mul};

use nalgebra::Vector3;

use crate::error::Result;

/// Unit vectors along the six icosahedral vertex axes.
pub fn icosahedral_axes() -> [Vector3<f64>; 6] {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    [
        Vector3::new(0.0, 1.0, phi),
        Vector3::new(0.0, 1.0, -phi),
        Vector3::new(1.0, phi, 0.0),
        Vector3::new(1.0, -phi, 0.0),
        Vector3::new(phi, 0.0, 1.0),
        Vector3::new(-phi, 0.0, 1.0),
    ]
    .map(|v| v.normalize())
}

/// `⟨f(|μ| û)⟩` over directions `û`, exact for even `f` of degree at most four.
pub fn average_over_orientations<T, F>(magnitude: f64, f: F) -> Result<T>
where
    T: Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(Vector3<f64>) -> Result<T>,
{
    let axes = icosahedral_axes();
    let mut acc = f(axes[0] * magnitude)?;
    for u in &axes[1..] {
        acc = acc + f(u * magnitude)?;
    }
    Ok(acc * (1.0 / axes.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    #[test]
    fn reproduces_isotropic_moments() {
        let m = Matrix3::new(1.0, 0.3, -0.2, 0.3, -0.5, 0.7, -0.2, 0.7, 2.0);
        let n = Matrix3::new(0.4, -1.0, 0.1, -1.0, 0.9, 0.0, 0.1, 0.0, -0.3);
        let avg: f64 = average_over_orientations(1.0, |u| Ok(u.dot(&(m * u)) * u.dot(&(n * u)))).unwrap();
        let exact = (m.trace() * n.trace() + 2.0 * (m * n).trace()) / 15.0;
        assert!((avg - exact).abs() < 1e-14);
        let second: f64 = average_over_orientations(1.0, |u| Ok(u.dot(&(m * u)))).unwrap();
        assert!((second - m.trace() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn magnitude_scales() {
        let s: f64 = average_over_orientations(2.0, |u| Ok(u.norm_squared())).unwrap();
        assert!((s - 4.0).abs() < 1e-14);
    }
}
