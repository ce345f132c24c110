use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Finite purely atomic measure `sum y_i delta_{x_i}`, atoms sorted by
/// location with distinct locations and positive masses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    pub fn empty() -> Self {
        AtomicMeasure::default()
    }

    /// Sorts atoms and merges coinciding locations by summing their masses.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms
            .iter()
            .any(|&(x, y)| !x.is_finite() || !(y > 0.0) || !y.is_finite())
        {
            return invalid("atoms need finite locations and positive finite masses");
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, y) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += y,
                _ => merged.push((x, y)),
            }
        }
        Ok(AtomicMeasure { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Mass of `[a, b)`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let i = self.atoms.partition_point(|p| p.0 < a);
        let j = self.atoms.partition_point(|p| p.0 < b);
        self.atoms[i..j.max(i)].iter().map(|p| p.1).sum()
    }

    /// Union of two measures.
    pub fn merged(&self, other: &AtomicMeasure) -> AtomicMeasure {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        AtomicMeasure::from_atoms(atoms).expect("inputs were valid")
    }

    /// Moves every atom to the nearest multiple of `step`, summing collisions.
    pub fn snapped(&self, step: f64) -> AtomicMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|&(x, y)| ((x / step).round() * step, y))
            .collect();
        AtomicMeasure::from_atoms(atoms).expect("inputs were valid")
    }
}

/// Nondecreasing right-continuous path `drift * t + sum_{x_i <= t} y_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorPath {
    pub drift: f64,
    pub jumps: AtomicMeasure,
    pub horizon: f64,
    cumulative: Vec<f64>,
}

impl SubordinatorPath {
    pub fn new(drift: f64, jumps: AtomicMeasure, horizon: f64) -> Result<Self> {
        if !(drift >= 0.0) || !(horizon >= 0.0) {
            return invalid("drift and horizon must be nonnegative");
        }
        if jumps.atoms().first().is_some_and(|a| a.0 <= 0.0) {
            return invalid("jump times must be positive");
        }
        let mut acc = 0.0;
        let cumulative = jumps
            .atoms()
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        Ok(SubordinatorPath {
            drift,
            jumps,
            horizon,
            cumulative,
        })
    }

    /// Value at time `t`.
    pub fn value(&self, t: f64) -> f64 {
        let i = self.jumps.atoms().partition_point(|a| a.0 <= t);
        self.drift * t + if i == 0 { 0.0 } else { self.cumulative[i - 1] }
    }

    /// `inf { s : value(s) > x }`, or `None` when the path stays below `x`
    /// up to the horizon.
    pub fn inverse(&self, x: f64) -> Option<f64> {
        let atoms = self.jumps.atoms();
        // first atom whose inclusion pushes the path above x, or pure drift before it
        let mut prev_t = 0.0;
        let mut prev_cum = 0.0;
        for (i, &(t, _)) in atoms.iter().enumerate() {
            if self.drift > 0.0 {
                let s = (x - prev_cum) / self.drift;
                if s < t && s >= prev_t {
                    return (s <= self.horizon).then_some(s.max(prev_t));
                }
            }
            if self.drift * t + self.cumulative[i] > x {
                return (t <= self.horizon).then_some(t);
            }
            prev_t = t;
            prev_cum = self.cumulative[i];
        }
        if self.drift > 0.0 {
            let s = ((x - prev_cum) / self.drift).max(prev_t);
            return (s <= self.horizon).then_some(s);
        }
        None
    }
}
