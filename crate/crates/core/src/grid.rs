//! Sampled scalar fields on axis-aligned boxes.
//!
//! Storage is row-major with the last axis varying fastest. The text
//! interchange format is a single header line
//!
//! ```text
//! dims=65,65 spacing=0.03125,0.03125 origin=-1,-1
//! ```
//!
//! followed by the values, whitespace separated, in storage order. Values are
//! written with the shortest representation that round-trips, so a
//! write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    dims: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dims: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidGrid("zero-dimensional grid".into()));
        }
        if spacing.len() != dims.len() || origin.len() != dims.len() {
            return Err(Error::InvalidGrid(format!(
                "dims/spacing/origin lengths differ: {}/{}/{}",
                dims.len(),
                spacing.len(),
                origin.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidGrid("every axis needs at least one node".into()));
        }
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidGrid("spacings must be positive and finite".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let len: usize = dims.iter().product();
        if values.len() != len {
            return Err(Error::InvalidGrid(format!(
                "expected {len} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {i}")));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F>(dims: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let len: usize = dims.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut x = vec![0.0; dims.len()];
        for flat in 0..len {
            let idx = unravel(flat, &dims);
            for (k, xk) in x.iter_mut().enumerate() {
                *xk = origin[k] + idx[k] as f64 * spacing[k];
            }
            values.push(f(&x));
        }
        Self::new(dims, spacing, origin, values)
    }

    pub fn constant(dims: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>, c: f64) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, spacing, origin, vec![c; len])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Volume of one cell, `Π spacing`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub fn coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing[axis]
    }

    /// Upper corner of the sampled box.
    pub fn upper(&self) -> Vec<f64> {
        (0..self.ndim())
            .map(|k| self.coord(k, self.dims[k] - 1))
            .collect()
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[ravel(index, &self.dims)]
    }

    pub fn same_shape(&self, other: &GridFunction) -> bool {
        self.dims == other.dims && self.spacing == other.spacing && self.origin == other.origin
    }

    /// New field with the same geometry and transformed values.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<GridFunction> {
        GridFunction::new(
            self.dims.clone(),
            self.spacing.clone(),
            self.origin.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Same values, shifted origin.
    pub fn translated(&self, shift: &[f64]) -> Result<GridFunction> {
        let origin = self.origin.iter().zip(shift).map(|(o, s)| o + s).collect();
        GridFunction::new(self.dims.clone(), self.spacing.clone(), origin, self.values.clone())
    }

    /// Sub-box of nodes `lo[k] ..= hi[k]` along each axis.
    pub fn subgrid(&self, lo: &[usize], hi: &[usize]) -> Result<GridFunction> {
        if lo.len() != self.ndim() || hi.len() != self.ndim() {
            return Err(Error::ShapeMismatch("subgrid bounds have wrong rank".into()));
        }
        for k in 0..self.ndim() {
            if lo[k] > hi[k] || hi[k] >= self.dims[k] {
                return Err(Error::EmptyDomain(format!(
                    "subgrid {}..={} invalid on axis {k} with {} nodes",
                    lo[k], hi[k], self.dims[k]
                )));
            }
        }
        let dims: Vec<usize> = (0..self.ndim()).map(|k| hi[k] - lo[k] + 1).collect();
        let origin = (0..self.ndim()).map(|k| self.coord(k, lo[k])).collect();
        let len: usize = dims.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut idx = vec![0; self.ndim()];
        for flat in 0..len {
            let local = unravel(flat, &dims);
            for k in 0..self.ndim() {
                idx[k] = local[k] + lo[k];
            }
            values.push(self.get(&idx));
        }
        GridFunction::new(dims, self.spacing.clone(), origin, values)
    }

    /// Nodes whose coordinates lie in `[lower, upper]` (with a small
    /// tolerance relative to the spacing), as an inclusive index range.
    pub fn index_range_within(&self, lower: &[f64], upper: &[f64]) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut lo = Vec::with_capacity(self.ndim());
        let mut hi = Vec::with_capacity(self.ndim());
        for k in 0..self.ndim() {
            let h = self.spacing[k];
            let tol = 1e-9 * h;
            let first = ((lower[k] - self.origin[k] - tol) / h).ceil().max(0.0) as usize;
            let last_f = ((upper[k] - self.origin[k] + tol) / h).floor();
            if last_f < 0.0 {
                return None;
            }
            let last = (last_f as usize).min(self.dims[k] - 1);
            if first > last {
                return None;
            }
            lo.push(first);
            hi.push(last);
        }
        Some((lo, hi))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self - other|` for fields of identical shape.
    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Discrete `L^p` norm `(Σ |v|^p Π spacing)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.values, p, self.cell_volume())
    }

    pub fn to_text(&self) -> String {
        let join_usize = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let join_f64 = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut out = format!(
            "dims={} spacing={} origin={}\n",
            join_usize(&self.dims),
            join_f64(&self.spacing),
            join_f64(&self.origin)
        );
        let row = *self.dims.last().expect("nonempty dims");
        for chunk in self.values.chunks(row) {
            let mut first = true;
            for v in chunk {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .by_ref()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let mut dims = None;
        let mut spacing = None;
        let mut origin = None;
        for token in header.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed header token `{token}`")))?;
            match key {
                "dims" => dims = Some(parse_list::<usize>(value)?),
                "spacing" => spacing = Some(parse_list::<f64>(value)?),
                "origin" => origin = Some(parse_list::<f64>(value)?),
                other => return Err(Error::Parse(format!("unknown header key `{other}`"))),
            }
        }
        let dims = dims.ok_or_else(|| Error::Parse("missing dims=".into()))?;
        let spacing = spacing.ok_or_else(|| Error::Parse("missing spacing=".into()))?;
        let origin = origin.ok_or_else(|| Error::Parse("missing origin=".into()))?;
        let values = lines
            .flat_map(str::split_whitespace)
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value `{tok}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GridFunction::new(dims, spacing, origin, values)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| Error::Parse(format!("bad header entry `{tok}`: {e}")))
        })
        .collect()
}

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

pub fn ravel(index: &[usize], dims: &[usize]) -> usize {
    index
        .iter()
        .zip(dims)
        .fold(0, |acc, (&i, &d)| acc * d + i)
}

pub fn unravel(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    idx
}

pub fn lp_norm(values: &[f64], p: f64, cell_volume: f64) -> f64 {
    let sum: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
    (sum * cell_volume).powf(1.0 / p)
}
