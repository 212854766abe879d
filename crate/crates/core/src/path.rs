//! Piecewise-linear drivers `h: [t_0, t_m] -> R^width`.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative slack when clamping query times onto the domain.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearPath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl PiecewiseLinearPath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidPath("path has no knots".into()));
        }
        if times.len() != points.len() {
            return Err(Error::InvalidPath(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        let width = points[0].len();
        if width == 0 {
            return Err(Error::InvalidPath("points have zero dimension".into()));
        }
        if points.iter().any(|p| p.len() != width) {
            return Err(Error::InvalidPath("points have mixed dimensions".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath(
                "times must be strictly increasing".into(),
            ));
        }
        if times
            .iter()
            .chain(points.iter().flatten())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidPath("non-finite entry".into()));
        }
        Ok(PiecewiseLinearPath { times, points })
    }

    /// Samples `f` at `segments + 1` equally spaced knots on `[0, horizon]`.
    pub fn sample<F>(segments: usize, horizon: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let times: Vec<f64> = (0..=segments)
            .map(|k| horizon * k as f64 / segments as f64)
            .collect();
        let points = times.iter().map(|&t| f(t)).collect();
        Self::new(times, points)
    }

    /// Straight line from the origin with the given total increment.
    pub fn linear(increment: &[f64], horizon: f64) -> Result<Self> {
        Self::new(
            vec![0.0, horizon],
            vec![vec![0.0; increment.len()], increment.to_vec()],
        )
    }

    /// Constant path at the origin.
    pub fn zero(width: usize, segments: usize, horizon: f64) -> Result<Self> {
        Self::sample(segments, horizon, |_| vec![0.0; width])
    }

    /// Smooth closed-form curve, sampled on a uniform grid:
    /// `h_i(t) = amplitude * sin(2 pi (i + 1) t / T + i)`, shifted to start at 0.
    pub fn smooth(width: usize, segments: usize, horizon: f64, amplitude: f64) -> Result<Self> {
        let curve = move |t: f64| -> Vec<f64> {
            (0..width)
                .map(|i| {
                    let w = 2.0 * std::f64::consts::PI * (i + 1) as f64 / horizon;
                    amplitude * ((w * t + i as f64).sin() - (i as f64).sin())
                })
                .collect()
        };
        Self::sample(segments, horizon, curve)
    }

    /// Rescaled symmetric random walk: each coordinate moves by
    /// `+-scale * sqrt(dt)` per step.
    pub fn random_walk(
        width: usize,
        segments: usize,
        horizon: f64,
        scale: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = horizon / segments as f64;
        let step = scale * dt.sqrt();
        let mut points = Vec::with_capacity(segments + 1);
        let mut current = vec![0.0; width];
        points.push(current.clone());
        for _ in 0..segments {
            for c in current.iter_mut() {
                *c += if rng.gen::<bool>() { step } else { -step };
            }
            points.push(current.clone());
        }
        let times = (0..=segments)
            .map(|k| horizon * k as f64 / segments as f64)
            .collect();
        Self::new(times, points)
    }

    pub fn width(&self) -> usize {
        self.points[0].len()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// The same path traversed backwards on the same time interval.
    pub fn reversed(&self) -> Self {
        let (a, b) = (self.start(), self.end());
        let times = self.times.iter().rev().map(|t| a + b - t).collect();
        let points = self.points.iter().rev().cloned().collect();
        PiecewiseLinearPath { times, points }
    }

    pub(crate) fn clamp_time(&self, t: f64) -> Result<f64> {
        let (a, b) = (self.start(), self.end());
        let slack = DOMAIN_SLACK * (b - a).abs().max(1.0);
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutOfDomain {
                t,
                start: a,
                end: b,
            });
        }
        Ok(t.clamp(a, b))
    }

    /// Index of the segment `[t_k, t_{k+1}]` containing `t` (right-continuous).
    fn segment_of(&self, t: f64) -> usize {
        let m = self.times.len();
        if m == 1 {
            return 0;
        }
        match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= m => m - 2,
            k => k - 1,
        }
    }

    pub fn value_at(&self, t: f64) -> Result<Vec<f64>> {
        let t = self.clamp_time(t)?;
        if self.times.len() == 1 {
            return Ok(self.points[0].clone());
        }
        let k = self.segment_of(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        if t == t1 {
            return Ok(self.points[k + 1].clone());
        }
        let r = (t - t0) / (t1 - t0);
        Ok(self.points[k]
            .iter()
            .zip(&self.points[k + 1])
            .map(|(a, b)| a + r * (b - a))
            .collect())
    }

    /// Derivative of the path on the segment containing `t`.
    pub fn velocity_at(&self, t: f64) -> Result<Vec<f64>> {
        let t = self.clamp_time(t)?;
        if self.times.len() == 1 {
            return Ok(vec![0.0; self.width()]);
        }
        let k = self.segment_of(t);
        let dt = self.times[k + 1] - self.times[k];
        Ok(self.points[k]
            .iter()
            .zip(&self.points[k + 1])
            .map(|(a, b)| (b - a) / dt)
            .collect())
    }

    /// Linear pieces of the path restricted to `[s, t]`, in time order,
    /// as `(duration, increment)` pairs.
    pub fn pieces(&self, s: f64, t: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        if s > t {
            return Err(Error::InvalidInterval { s, t });
        }
        let s = self.clamp_time(s)?;
        let t = self.clamp_time(t)?;
        let mut out = Vec::new();
        if s == t || self.times.len() == 1 {
            return Ok(out);
        }
        let mut left = s;
        let mut left_val = self.value_at(s)?;
        let mut k = self.segment_of(s);
        while left < t {
            let right = self.times[k + 1].min(t);
            if right > left {
                let right_val = if right == self.times[k + 1] {
                    self.points[k + 1].clone()
                } else {
                    self.value_at(right)?
                };
                let inc = right_val
                    .iter()
                    .zip(&left_val)
                    .map(|(b, a)| b - a)
                    .collect();
                out.push((right - left, inc));
                left_val = right_val;
            }
            left = right;
            k += 1;
            if k + 1 >= self.times.len() {
                break;
            }
        }
        Ok(out)
    }

    /// Reads a path from CSV with header `t,x1,...,xl`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || headers.get(0).map(str::trim) != Some("t") {
            return Err(Error::InvalidPath(
                "CSV header must be `t,x1,...,xl`".into(),
            ));
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let mut vals = record.iter().map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidPath(format!("bad number `{v}`: {e}")))
            });
            times.push(vals.next().unwrap()?);
            points.push(vals.collect::<Result<Vec<_>>>()?);
        }
        Self::new(times, points)
    }

    pub fn from_csv_file(path: &std::path::Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.width()).map(|i| format!("x{i}")));
        wtr.write_record(&header)?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let mut row = vec![t.to_string()];
            row.extend(p.iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}
