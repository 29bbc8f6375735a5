//! Discretized stream functions on uniform rectangular grids, and the FBG1
//! on-disk format.
//!
//! A [`StreamGrid`] stores nodal values ψ(x_i, y_j) ≥ 0 with
//! x_i = x_min + i·dx (i fastest in memory), plus an optional positivity
//! mask that overrides the default indicator ψ > ε_mask,
//! ε_mask = 1e-12 · max ψ.
//!
//! Nodal gradients are free-boundary aware: central differences in the
//! bulk of {ψ > 0}, one-sided (3-point where possible) stencils at nodes
//! whose neighbours fall outside the positivity set, and zero in the zero
//! phase where the true ∇ψ vanishes a.e. This keeps the smearing of the
//! gradient kink across free rays at O(h²) in integrated quantities.
//!
//! FBG1 layout: line 1 magic `FBG1`; line 2 `nx ny`; line 3
//! `x_min y_min dx dy` (decimal, shortest round-trip representation); then
//! nx·ny little-endian IEEE f64 values, row-major with x fastest. A CSV
//! escape hatch (same header fields, then one line of nx values per row)
//! exists for interoperability.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CoreError, Result};

/// Relative threshold defining the default positivity indicator.
pub const MASK_EPSILON_REL: f64 = 1e-12;
/// Negative nodal values larger than this (relative to max |ψ|) are
/// rejected; smaller ones are clamped to zero as rounding noise.
const NEGATIVE_CLAMP_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamGrid {
    nx: usize,
    ny: usize,
    x_min: f64,
    y_min: f64,
    dx: f64,
    dy: f64,
    values: Vec<f64>,
    mask: Option<Vec<bool>>,
}

impl StreamGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        origin: (f64, f64),
        spacing: (f64, f64),
        mut values: Vec<f64>,
    ) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(CoreError::Grid(format!(
                "grid must be at least 8x8, got {nx}x{ny}"
            )));
        }
        let (dx, dy) = spacing;
        if !(dx > 0.0 && dy > 0.0) {
            return Err(CoreError::Grid(format!("spacing must be positive, got ({dx}, {dy})")));
        }
        if values.len() != nx * ny {
            return Err(CoreError::Grid(format!(
                "value count {} does not match {nx}x{ny}",
                values.len()
            )));
        }
        let mut max_abs = 0.0f64;
        for v in &values {
            if !v.is_finite() {
                return Err(CoreError::Grid("non-finite stream-function value".into()));
            }
            max_abs = max_abs.max(v.abs());
        }
        let clamp = NEGATIVE_CLAMP_REL * max_abs.max(1e-300);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if -*v <= clamp {
                    *v = 0.0;
                } else {
                    return Err(CoreError::Grid(format!(
                        "negative stream-function value {v} exceeds rounding tolerance"
                    )));
                }
            }
        }
        let grid = Self {
            nx,
            ny,
            x_min: origin.0,
            y_min: origin.1,
            dx,
            dy,
            values,
            mask: None,
        };
        grid.check_axis_zero()?;
        Ok(grid)
    }

    /// Samples ψ(x, y) on an nx × ny grid.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        origin: (f64, f64),
        spacing: (f64, f64),
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = vec![0.0; nx * ny];
        for j in 0..ny {
            let y = origin.1 + spacing.1 * j as f64;
            for i in 0..nx {
                let x = origin.0 + spacing.0 * i as f64;
                values[j * nx + i] = f(x, y);
            }
        }
        Self::new(nx, ny, origin, spacing, values)
    }

    /// Attaches an explicit positivity mask overriding the ψ > ε indicator.
    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.nx * self.ny {
            return Err(CoreError::Grid("mask size does not match grid".into()));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    /// Builds the mask from a predicate on node coordinates.
    pub fn with_mask_fn(self, f: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let mut mask = vec![false; self.nx * self.ny];
        for j in 0..self.ny {
            for i in 0..self.nx {
                mask[j * self.nx + i] = f(self.x(i), self.y(j));
            }
        }
        self.with_mask(mask)
    }

    /// ψ must vanish on the symmetry axis when the grid contains it.
    fn check_axis_zero(&self) -> Result<()> {
        for i in 0..self.nx {
            let x = self.x(i);
            if x.abs() < 1e-12 * self.dx.max(1.0) {
                for j in 0..self.ny {
                    if self.values[j * self.nx + i] != 0.0 {
                        return Err(CoreError::Grid(format!(
                            "psi must vanish on the axis column x = 0, found {} at j = {j}",
                            self.values[j * self.nx + i]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_min + self.dx * (self.nx - 1) as f64
    }
    pub fn y_max(&self) -> f64 {
        self.y_min + self.dy * (self.ny - 1) as f64
    }
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.dx * i as f64
    }
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + self.dy * j as f64
    }
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Threshold of the default indicator I_{ψ>0}.
    pub fn mask_epsilon(&self) -> f64 {
        MASK_EPSILON_REL * self.max_value()
    }

    /// Positivity indicator at a node (mask override first).
    pub fn positive(&self, i: usize, j: usize) -> bool {
        match &self.mask {
            Some(m) => m[j * self.nx + i],
            None => self.values[j * self.nx + i] > self.mask_epsilon(),
        }
    }

    /// Positivity indicator at an arbitrary point: nearest node for masked
    /// grids, bilinear ψ > ε otherwise (sub-cell boundary resolution).
    pub fn positive_at(&self, x: f64, y: f64) -> bool {
        match &self.mask {
            Some(m) => {
                let i = (((x - self.x_min) / self.dx).round().max(0.0) as usize).min(self.nx - 1);
                let j = (((y - self.y_min) / self.dy).round().max(0.0) as usize).min(self.ny - 1);
                m[j * self.nx + i]
            }
            None => self.interp_bilinear(x, y) > self.mask_epsilon(),
        }
    }

    fn clamp_cell(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let fx = ((x - self.x_min) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((y - self.y_min) / self.dy).clamp(0.0, (self.ny - 1) as f64);
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        (i, j, fx - i as f64, fy - j as f64)
    }

    /// Bilinear interpolation of ψ; coordinates are clamped to the grid.
    pub fn interp_bilinear(&self, x: f64, y: f64) -> f64 {
        let (i, j, tx, ty) = self.clamp_cell(x, y);
        let v00 = self.value(i, j);
        let v10 = self.value(i + 1, j);
        let v01 = self.value(i, j + 1);
        let v11 = self.value(i + 1, j + 1);
        v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty
            + v11 * tx * ty
    }

    /// Catmull-Rom bicubic interpolation of ψ; stencil indices clamp at the
    /// boundary.
    pub fn interp_bicubic(&self, x: f64, y: f64) -> f64 {
        fn cr(p0: f64, p1: f64, p2: f64, p3: f64, t: f64) -> f64 {
            0.5 * ((2.0 * p1)
                + (-p0 + p2) * t
                + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
                + (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t)
        }
        let (i, j, tx, ty) = self.clamp_cell(x, y);
        let gi = |k: isize| -> usize { k.clamp(0, self.nx as isize - 1) as usize };
        let gj = |k: isize| -> usize { k.clamp(0, self.ny as isize - 1) as usize };
        let mut col = [0.0; 4];
        for (n, dj) in (-1..=2).enumerate() {
            let jj = gj(j as isize + dj);
            col[n] = cr(
                self.value(gi(i as isize - 1), jj),
                self.value(i, jj),
                self.value(gi(i as isize + 1), jj),
                self.value(gi(i as isize + 2), jj),
                tx,
            );
        }
        cr(col[0], col[1], col[2], col[3], ty)
    }

    /// Free-boundary-aware nodal gradient (see module docs).
    pub fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        if !self.positive(i, j) {
            return (0.0, 0.0);
        }
        let gx = self.directional(i, j, true);
        let gy = self.directional(i, j, false);
        (gx, gy)
    }

    fn directional(&self, i: usize, j: usize, x_dir: bool) -> f64 {
        let (n, h) = if x_dir {
            (self.nx, self.dx)
        } else {
            (self.ny, self.dy)
        };
        let k = if x_dir { i } else { j };
        let at = |k: usize| -> f64 {
            if x_dir {
                self.value(k, j)
            } else {
                self.value(i, k)
            }
        };
        let pos = |k: usize| -> bool {
            if x_dir {
                self.positive(k, j)
            } else {
                self.positive(i, k)
            }
        };
        let minus_ok = k >= 1 && pos(k - 1);
        let plus_ok = k + 1 < n && pos(k + 1);
        if minus_ok && plus_ok {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        } else if plus_ok {
            if k + 2 < n && pos(k + 2) {
                (-3.0 * at(k) + 4.0 * at(k + 1) - at(k + 2)) / (2.0 * h)
            } else {
                (at(k + 1) - at(k)) / h
            }
        } else if minus_ok {
            if k >= 2 && pos(k - 2) {
                (3.0 * at(k) - 4.0 * at(k - 1) + at(k - 2)) / (2.0 * h)
            } else {
                (at(k) - at(k - 1)) / h
            }
        } else {
            0.0
        }
    }

    /// True when the closed ball B_r(center) plus `margin` cells fits in
    /// the grid rectangle (x-side checks skipped below x = 0 for on-axis
    /// centers, where the half-ball is meant).
    pub fn contains_ball(&self, center: (f64, f64), r: f64, margin_cells: usize) -> bool {
        let mx = self.dx * margin_cells as f64;
        let my = self.dy * margin_cells as f64;
        let x_lo_ok = if center.0 - r < 0.0 {
            // Half-ball: only the x ≥ 0 part must fit, so the grid just has
            // to reach the axis.
            self.x_min <= 1e-12
        } else {
            center.0 - r - mx >= self.x_min - 1e-12
        };
        x_lo_ok
            && center.0 + r + mx <= self.x_max() + 1e-12
            && center.1 - r - my >= self.y_min - 1e-12
            && center.1 + r + my <= self.y_max() + 1e-12
    }

    // ---- FBG1 and CSV I/O ----

    pub fn write_fbg1<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "FBG1")?;
        writeln!(w, "{} {}", self.nx, self.ny)?;
        writeln!(w, "{} {} {} {}", self.x_min, self.y_min, self.dx, self.dy)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_fbg1<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut line = String::new();
        reader.read_line(&mut line)?;
        if line.trim_end() != "FBG1" {
            return Err(CoreError::Format(format!(
                "bad magic {:?}, expected \"FBG1\"",
                line.trim_end()
            )));
        }
        line.clear();
        reader.read_line(&mut line)?;
        let dims: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| CoreError::Format(format!("bad dimension {t:?}"))))
            .collect::<Result<_>>()?;
        if dims.len() != 2 {
            return Err(CoreError::Format("dimension line must hold nx ny".into()));
        }
        line.clear();
        reader.read_line(&mut line)?;
        let geom: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| CoreError::Format(format!("bad geometry field {t:?}"))))
            .collect::<Result<_>>()?;
        if geom.len() != 4 {
            return Err(CoreError::Format(
                "geometry line must hold x_min y_min dx dy".into(),
            ));
        }
        let (nx, ny) = (dims[0], dims[1]);
        let mut buf = vec![0u8; nx * ny * 8];
        reader.read_exact(&mut buf).map_err(|e| {
            CoreError::Format(format!("truncated FBG1 payload ({nx}x{ny} values expected): {e}"))
        })?;
        let mut values = Vec::with_capacity(nx * ny);
        for chunk in buf.chunks_exact(8) {
            values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        let mut trailing = [0u8; 1];
        if reader.read(&mut trailing)? != 0 {
            return Err(CoreError::Format("trailing bytes after FBG1 payload".into()));
        }
        Self::new(nx, ny, (geom[0], geom[1]), (geom[2], geom[3]), values)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            self.nx, self.ny, self.x_min, self.y_min, self.dx, self.dy
        )?;
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx).map(|i| self.value(i, j).to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::Format("empty CSV grid".into()))??;
        let fields: Vec<&str> = header.split(',').collect();
        if fields.len() != 6 {
            return Err(CoreError::Format(
                "CSV grid header must be nx,ny,x_min,y_min,dx,dy".into(),
            ));
        }
        let nx: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| CoreError::Format("bad nx".into()))?;
        let ny: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| CoreError::Format("bad ny".into()))?;
        let geom: Vec<f64> = fields[2..]
            .iter()
            .map(|t| t.trim().parse().map_err(|_| CoreError::Format(format!("bad field {t:?}"))))
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(nx * ny);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split(',') {
                values.push(
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| CoreError::Format(format!("bad value {tok:?}")))?,
                );
            }
        }
        if values.len() != nx * ny {
            return Err(CoreError::Format(format!(
                "CSV grid holds {} values, expected {}",
                values.len(),
                nx * ny
            )));
        }
        Self::new(nx, ny, (geom[0], geom[1]), (geom[2], geom[3]), values)
    }

    /// Reads a grid file, dispatching on the `.csv` extension.
    pub fn read_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        if path.extension().is_some_and(|e| e == "csv") {
            Self::read_csv(file)
        } else {
            Self::read_fbg1(BufReader::new(file))
        }
    }

    /// Writes a grid file, dispatching on the `.csv` extension.
    pub fn write_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        if path.extension().is_some_and(|e| e == "csv") {
            self.write_csv(&mut w)
        } else {
            self.write_fbg1(&mut w)
        }
    }
}
