//! Discretized finite measures: a sampled Lebesgue density plus explicit atoms.
//!
//! Measures live either on the hypergroup `(0, ∞)` or on the line after
//! recentring. Densities are always with respect to Lebesgue length in the
//! measure's own coordinate; the Haar weight `A` is folded in by whoever builds
//! the density.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::decision::WeightSpec;
use crate::quadrature::grid_weights;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinate {
    /// The half-line `(0, ∞)` carrying the hypergroup.
    Hypergroup,
    /// The line, after translating by `-y`.
    Recentered,
}

impl Coordinate {
    pub fn name(self) -> &'static str {
        match self {
            Coordinate::Hypergroup => "hypergroup",
            Coordinate::Recentered => "recentered",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A finite signed measure `density(t) dt + Σ mass_k δ_{t_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMeasure {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub atoms: Vec<Atom>,
    pub coordinate: Coordinate,
}

/// Atoms closer than this are treated as the same location.
const ATOM_MATCH: f64 = 1e-12;

impl RadialMeasure {
    pub fn new(grid: Vec<f64>, density: Vec<f64>, atoms: Vec<Atom>, coordinate: Coordinate) -> Result<Self> {
        if grid.len() != density.len() {
            return Err(Error::Invalid(format!("grid has {} points but density has {}", grid.len(), density.len())));
        }
        if grid.len() == 1 {
            return Err(Error::Invalid("a density needs at least two grid points".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("grid must be strictly increasing".into()));
        }
        if grid.iter().chain(&density).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("grid and density must be finite".into()));
        }
        if coordinate == Coordinate::Hypergroup && (grid.first().is_some_and(|&g| g < 0.0) || atoms.iter().any(|a| a.location < 0.0)) {
            return Err(Error::Invalid("hypergroup measures live on [0, ∞)".into()));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(Self { grid, density, atoms, coordinate })
    }

    pub fn dirac(location: f64, coordinate: Coordinate) -> Self {
        Self { grid: Vec::new(), density: Vec::new(), atoms: vec![Atom { location, mass: 1.0 }], coordinate }
    }

    /// Measure with density only.
    pub fn from_density(grid: Vec<f64>, density: Vec<f64>, coordinate: Coordinate) -> Result<Self> {
        Self::new(grid, density, Vec::new(), coordinate)
    }

    /// Samples `f` on `grid`.
    pub fn from_fn(grid: Vec<f64>, coordinate: Coordinate, f: impl Fn(f64) -> f64) -> Result<Self> {
        let density = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, density, Vec::new(), coordinate)
    }

    /// Smallest closed interval containing the grid and every atom.
    pub fn support(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let (Some(&a), Some(&b)) = (self.grid.first(), self.grid.last()) {
            lo = a;
            hi = b;
        }
        for atom in &self.atoms {
            lo = lo.min(atom.location);
            hi = hi.max(atom.location);
        }
        (lo, hi)
    }

    pub fn weights(&self) -> Vec<f64> {
        grid_weights(&self.grid)
    }

    pub fn total_mass(&self) -> f64 {
        let w = self.weights();
        let ac: f64 = w.iter().zip(&self.density).map(|(w, d)| w * d).sum();
        ac + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// `∫ d|μ|`.
    pub fn total_variation(&self) -> f64 {
        self.weighted_abs(|_| 1.0)
    }

    /// `∫ ω d|μ|` with `ω` evaluated in this measure's coordinate.
    pub fn weighted_norm(&self, weight: &WeightSpec) -> f64 {
        self.weighted_abs(|t| weight.evaluate(t))
    }

    fn weighted_abs(&self, omega: impl Fn(f64) -> f64) -> f64 {
        let w = self.weights();
        let ac: f64 = self.grid.iter().zip(&w).zip(&self.density).map(|((&t, w), d)| w * d.abs() * omega(t)).sum();
        ac + self.atoms.iter().map(|a| a.mass.abs() * omega(a.location)).sum::<f64>()
    }

    /// Most negative density sample (zero when the density is nonnegative).
    /// Signed `∫ ω dμ`.
    pub fn weighted_mass(&self, weight: &WeightSpec) -> f64 {
        let w = self.weights();
        let dens: f64 = self.grid.iter().zip(&self.density).zip(&w).map(|((&t, d), w)| weight.evaluate(t) * d * w).sum();
        dens + self.atoms.iter().map(|a| weight.evaluate(a.location) * a.mass).sum::<f64>()
    }

    pub fn min_density(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::min)
    }

    /// Density at `t` by linear interpolation, zero outside the grid.
    pub fn density_at(&self, t: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || t < g[0] || t > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&x| x <= t).clamp(1, g.len() - 1);
        let (x0, x1) = (g[i - 1], g[i]);
        let s = (t - x0) / (x1 - x0);
        self.density[i - 1] * (1.0 - s) + self.density[i] * s
    }

    /// `τ_{-y}`: translate a hypergroup measure by `-y` onto the line.
    pub fn recentre(&self, y: f64) -> Result<Self> {
        self.expect(Coordinate::Hypergroup)?;
        Ok(Self {
            grid: self.grid.iter().map(|t| t - y).collect(),
            density: self.density.clone(),
            atoms: self.atoms.iter().map(|a| Atom { location: a.location - y, mass: a.mass }).collect(),
            coordinate: Coordinate::Recentered,
        })
    }

    /// `E ↦ μ(-E)` on the line.
    pub fn reflect(&self) -> Result<Self> {
        self.expect(Coordinate::Recentered)?;
        let mut atoms: Vec<Atom> = self.atoms.iter().map(|a| Atom { location: -a.location, mass: a.mass }).collect();
        atoms.reverse();
        Ok(Self {
            grid: self.grid.iter().rev().map(|t| -t).collect(),
            density: self.density.iter().rev().copied().collect(),
            atoms,
            coordinate: Coordinate::Recentered,
        })
    }

    pub fn expect(&self, coordinate: Coordinate) -> Result<()> {
        if self.coordinate != coordinate {
            return Err(Error::Coordinate { expected: coordinate.name(), found: self.coordinate.name() });
        }
        Ok(())
    }

    /// `‖μ - ρ‖₁`: trapezoid integral of `|Δ density|` on the union grid plus atom mismatches.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        other.expect(self.coordinate)?;
        let mut union: Vec<f64> = self.grid.iter().chain(&other.grid).copied().collect();
        union.sort_by(f64::total_cmp);
        union.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
        let diff: Vec<f64> = union.iter().map(|&t| (self.density_at(t) - other.density_at(t)).abs()).collect();
        let mut total = 0.0;
        for i in 1..union.len() {
            total += 0.5 * (union[i] - union[i - 1]) * (diff[i] + diff[i - 1]);
        }
        let mut used = vec![false; other.atoms.len()];
        for a in &self.atoms {
            match other.atoms.iter().enumerate().find(|(j, b)| !used[*j] && (a.location - b.location).abs() <= ATOM_MATCH) {
                Some((j, b)) => {
                    used[j] = true;
                    total += (a.mass - b.mass).abs();
                }
                None => total += a.mass.abs(),
            }
        }
        total += other.atoms.iter().zip(&used).filter(|(_, u)| !**u).map(|(b, _)| b.mass.abs()).sum::<f64>();
        Ok(total)
    }

    /// `a μ + b ρ` on the union grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        other.expect(self.coordinate)?;
        let mut union: Vec<f64> = self.grid.iter().chain(&other.grid).copied().collect();
        union.sort_by(f64::total_cmp);
        union.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
        let density = union.iter().map(|&t| a * self.density_at(t) + b * other.density_at(t)).collect();
        let mut atoms: Vec<Atom> = self.atoms.iter().map(|x| Atom { location: x.location, mass: a * x.mass }).collect();
        for x in &other.atoms {
            match atoms.iter_mut().find(|y| (y.location - x.location).abs() <= ATOM_MATCH) {
                Some(y) => y.mass += b * x.mass,
                None => atoms.push(Atom { location: x.location, mass: b * x.mass }),
            }
        }
        if union.len() == 1 {
            return Self::new(Vec::new(), Vec::new(), atoms, self.coordinate);
        }
        Self::new(union, density, atoms, self.coordinate)
    }

    /// Writes `coordinate,t,density` rows.
    pub fn write_density_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "coordinate,t,density")?;
        for (t, d) in self.grid.iter().zip(&self.density) {
            writeln!(out, "{},{:.12e},{:.12e}", self.coordinate.name(), t, d)?;
        }
        Ok(())
    }

    /// Writes the `t,mass` atom sidecar.
    pub fn write_atoms_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "t,mass")?;
        for a in &self.atoms {
            writeln!(out, "{:.12e},{:.12e}", a.location, a.mass)?;
        }
        Ok(())
    }
}
