//! Frequency grids and multi-channel spectra.

use crate::error::{Error, Result};

/// Evenly spaced wavenumber grid `min, min + step, ..., max` (cm^-1).
///
/// The point count is `round((max - min) / step) + 1`; each point is computed
/// as `min + i * step` so repeated construction is bit-identical.
pub fn uniform_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(Error::invalid("grid", "bounds and step must be finite"));
    }
    if min <= 0.0 {
        return Err(Error::invalid("grid.min", "must be positive"));
    }
    if min >= max {
        return Err(Error::invalid("grid", "min must be below max"));
    }
    if step <= 0.0 {
        return Err(Error::invalid("grid.step", "must be positive"));
    }
    let n = ((max - min) / step).round() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

/// A wavenumber grid with named value channels, e.g. `T`, `R`, `A`, `dT`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Vec<f64>,
    channels: Vec<(String, Vec<f64>)>,
}

impl Spectrum {
    pub fn new(grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Structure("empty grid".into()));
        }
        if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Structure(format!(
                "grid not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Spectrum {
            grid,
            channels: Vec::new(),
        })
    }

    pub fn with_channel(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.push_channel(name, values)?;
        Ok(self)
    }

    pub fn push_channel(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.grid.len() {
            return Err(Error::Structure(format!(
                "channel `{name}` has {} values for {} grid points",
                values.len(),
                self.grid.len()
            )));
        }
        if self.channels.iter().any(|(n, _)| *n == name) {
            return Err(Error::Structure(format!("duplicate channel `{name}`")));
        }
        self.channels.push((name, values));
        Ok(())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Like [`Spectrum::channel`] but reports a structural error when absent.
    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.channel(name)
            .ok_or_else(|| Error::Structure(format!("missing channel `{name}`")))
    }

    pub fn channel_names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|(n, _)| n.as_str())
    }

    pub fn channels(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.channels.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }
}
