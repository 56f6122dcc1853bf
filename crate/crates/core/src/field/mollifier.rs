use crate::error::{Error, Result};

/// Discrete, radially symmetric, compactly supported kernel summing to one.
///
/// Weights live on the lattice disk `dx² + dy² ≤ radius²` and are strictly
/// positive there.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    radius: usize,
    weights: Vec<f64>,
}

impl Mollifier {
    /// Bump profile `exp(−1 / (1 − r²))`, `r = |d| / (radius + ½)`, normalized.
    pub fn bump(radius: usize) -> Result<Self> {
        let scale = radius as f64 + 0.5;
        Self::from_profile(radius, |d2| {
            let r2 = d2 / (scale * scale);
            (-1.0 / (1.0 - r2)).exp()
        })
    }

    /// Uniform weight on the lattice disk.
    pub fn constant(radius: usize) -> Result<Self> {
        Self::from_profile(radius, |_| 1.0)
    }

    /// Builds a kernel from a radial profile of the squared offset length.
    pub fn from_profile(radius: usize, profile: impl Fn(f64) -> f64) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidInput("mollifier radius must be at least 1".into()));
        }
        let r = radius as i64;
        let side = 2 * radius + 1;
        let mut weights = vec![0.0; side * side];
        for dy in -r..=r {
            for dx in -r..=r {
                let d2 = dx * dx + dy * dy;
                if d2 <= r * r {
                    let w = profile(d2 as f64);
                    if !(w > 0.0 && w.is_finite()) {
                        return Err(Error::InvalidInput(format!(
                            "mollifier profile must be positive on its support, got {w}"
                        )));
                    }
                    weights[((dy + r) as usize) * side + (dx + r) as usize] = w;
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { radius, weights })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Weight at offset `(dx, dy)`; zero outside the support.
    pub fn weight(&self, dx: i64, dy: i64) -> f64 {
        let r = self.radius as i64;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        let side = 2 * self.radius + 1;
        self.weights[((dy + r) as usize) * side + (dx + r) as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Offsets with nonzero weight, in row-major order.
    pub fn support(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let r = self.radius as i64;
        (-r..=r)
            .flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy)))
            .map(|(dx, dy)| (dx, dy, self.weight(dx, dy)))
            .filter(|(_, _, w)| *w > 0.0)
    }
}
