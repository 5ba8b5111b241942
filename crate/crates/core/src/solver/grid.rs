use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::eos::GasModel;
use crate::error::{Error, Result};

/// Uniform cell-centred grid on `[−L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    cells: usize,
}

impl Grid {
    pub const MIN_CELLS: usize = 16;

    pub fn new(half_width: f64, cells: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Config(format!("half width must be positive, got {half_width}")));
        }
        if cells < Self::MIN_CELLS {
            return Err(Error::Config(format!(
                "need at least {} cells, got {cells}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self { half_width, cells })
    }

    /// Half width large enough that the shock tails and the rarefaction
    /// fan stay inside the domain up to `end_time`.
    pub fn default_half_width(delta_s: f64, lambda1_minus: f64, end_time: f64) -> f64 {
        let shock = if delta_s > 0.0 { 40.0 / delta_s } else { 0.0 };
        shock.max(8.0 * lambda1_minus.abs() * end_time)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        // Symmetric form so that center(i) == -center(N-1-i) exactly.
        let n = self.cells as f64;
        self.half_width * (2.0 * i as f64 + 1.0 - n) / n
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    /// Trapezoid weights on the cell centres.
    pub fn trapezoid(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        let n = self.cells;
        let sum: f64 = values
            .into_iter()
            .enumerate()
            .map(|(i, f)| if i == 0 || i + 1 == n { 0.5 * f } else { f })
            .sum();
        sum * self.dx()
    }
}

/// Cell averages of `(v, u, Π)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub grid: Grid,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub pi: Vec<f64>,
}

/// JSON sidecar written next to a state snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub t: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub mu: f64,
    pub tau: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

impl FieldState {
    pub fn new(grid: Grid, t: f64, v: Vec<f64>, u: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        let n = grid.cells();
        if v.len() != n || u.len() != n || pi.len() != n {
            return Err(Error::Config(format!(
                "field lengths {}, {}, {} do not match {n} cells",
                v.len(),
                u.len(),
                pi.len()
            )));
        }
        if !(t >= 0.0) {
            return Err(Error::Config(format!("time must be non-negative, got {t}")));
        }
        if let Some((cell, &value)) = v.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
            return Err(Error::Positivity { cell, value, dt: 0.0 });
        }
        Ok(Self { t, grid, v, u, pi })
    }

    /// Samples `f(ξ) = [v, u, Π]` at the cell centres.
    pub fn from_fn<F>(grid: Grid, t: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<[f64; 3]>,
    {
        let n = grid.cells();
        let (mut v, mut u, mut pi) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for xi in grid.centers() {
            let [a, b, c] = f(xi)?;
            v.push(a);
            u.push(b);
            pi.push(c);
        }
        Self::new(grid, t, v, u, pi)
    }

    pub fn constant(grid: Grid, t: f64, state: [f64; 3]) -> Result<Self> {
        Self::from_fn(grid, t, |_| Ok(state))
    }

    /// `∫v dξ` and `∫u dξ` as cell sums.
    pub fn totals(&self) -> [f64; 2] {
        let dx = self.grid.dx();
        [self.v.iter().sum::<f64>() * dx, self.u.iter().sum::<f64>() * dx]
    }

    pub fn sidecar(&self, model: &GasModel, sigma: f64) -> SnapshotSidecar {
        SnapshotSidecar {
            t: self.t,
            sigma,
            gamma: model.gamma(),
            mu: model.mu(),
            tau: model.tau(),
            n: self.grid.cells(),
            l: self.grid.half_width(),
        }
    }

    /// CSV with header `xi,v,u,pi`, values in round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "xi,v,u,pi")?;
        for i in 0..self.grid.cells() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                self.grid.center(i),
                self.v[i],
                self.u[i],
                self.pi[i]
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R, sidecar: &SnapshotSidecar) -> Result<Self> {
        let grid = Grid::new(sidecar.l, sidecar.n)?;
        let mut lines = reader.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "xi,v,u,pi" => {}
            _ => return Err(Error::Serde("snapshot CSV must start with `xi,v,u,pi`".into())),
        }
        let (mut v, mut u, mut pi) = (Vec::new(), Vec::new(), Vec::new());
        for line in lines {
            let line = line.map_err(|e| Error::Serde(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Serde(format!("bad snapshot row `{line}`: {e}")))?;
            if cols.len() != 4 {
                return Err(Error::Serde(format!("expected 4 columns in `{line}`")));
            }
            v.push(cols[1]);
            u.push(cols[2]);
            pi.push(cols[3]);
        }
        Self::new(grid, sidecar.t, v, u, pi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(10.0, 20).unwrap();
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.center(0), -9.5);
        assert_eq!(g.center(19), 9.5);
        let c = g.centers();
        assert!(c.windows(2).all(|w| w[1] > w[0]));
        for i in 0..20 {
            assert_eq!(c[i], -c[19 - i]);
        }
        assert!(Grid::new(10.0, 15).is_err());
        assert!(Grid::new(0.0, 64).is_err());
    }

    #[test]
    fn default_half_width_rule() {
        assert_eq!(Grid::default_half_width(0.4, 1.5, 2.0), 100.0);
        assert_eq!(Grid::default_half_width(0.4, 1.5, 100.0), 1200.0);
    }

    #[test]
    fn state_validation() {
        let g = Grid::new(1.0, 16).unwrap();
        assert!(FieldState::new(g, 0.0, vec![1.0; 15], vec![0.0; 16], vec![0.0; 16]).is_err());
        let mut v = vec![1.0; 16];
        v[3] = -0.1;
        assert!(matches!(
            FieldState::new(g, 0.0, v, vec![0.0; 16], vec![0.0; 16]),
            Err(Error::Positivity { cell: 3, .. })
        ));
    }

    #[test]
    fn snapshot_roundtrip() {
        let g = Grid::new(3.0, 32).unwrap();
        let s = FieldState::from_fn(g, 1.25, |x| Ok([1.0 + 0.1 * x.sin(), x.cos() / 3.0, 1e-3 * x])).unwrap();
        let model = GasModel::new(1.4, 0.5, 0.02).unwrap();
        let side = s.sidecar(&model, 0.7);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = FieldState::read_csv(buf.as_slice(), &side).unwrap();
        assert_eq!(back, s);
        let json = serde_json::to_string(&side).unwrap();
        assert!(json.contains("\"N\":32") && json.contains("\"L\":3.0"));
    }
}
