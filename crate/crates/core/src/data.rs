//! Synthetic regression processes, their true conditional densities, the
//! 80/20 split and the evaluation grid.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::Rng;
use crate::error::{Error, Result};
use crate::mixture::Mixture;

/// Standard deviation of the additive noise in every process.
pub const NOISE_SIGMA: f64 = 0.1;
pub const GRID_POINTS: usize = 500;
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// `sin(2πx) + 0.5 cos(6πx)` on `[0, 1]`.
    IntroSine,
    /// `x³`.
    CubicA,
    /// `x²` for `x < 0`, `−1.5x + 0.3` otherwise.
    PiecewiseB,
    /// Equal mixture of `N(x+1, σ²)` and `N(−x−1, σ²)`.
    BimodalC,
    /// `sin(3x) + 0.3 sin(9x)`.
    SinusoidalD,
}

impl Case {
    /// The four cases of the benchmark table, in table order.
    pub const TABLE: [Case; 4] = [Case::CubicA, Case::PiecewiseB, Case::BimodalC, Case::SinusoidalD];

    pub fn label(self) -> &'static str {
        match self {
            Case::IntroSine => "intro",
            Case::CubicA => "A",
            Case::PiecewiseB => "B",
            Case::BimodalC => "C",
            Case::SinusoidalD => "D",
        }
    }

    pub fn support(self) -> (f64, f64) {
        match self {
            Case::IntroSine => (0.0, 1.0),
            _ => (-3.0, 3.0),
        }
    }

    /// Regression function of the unimodal cases. For the bimodal case this
    /// is the conditional mean, which is zero.
    pub fn mean_function(self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Case::IntroSine => (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos(),
            Case::CubicA => x * x * x,
            Case::PiecewiseB => {
                if x < 0.0 {
                    x * x
                } else {
                    -1.5 * x + 0.3
                }
            }
            Case::BimodalC => 0.0,
            Case::SinusoidalD => (3.0 * x).sin() + 0.3 * (9.0 * x).sin(),
        }
    }

    /// Exact conditional law of `y` given `x`.
    pub fn conditional(self, x: f64) -> Mixture<f64> {
        let built = match self {
            Case::BimodalC => Mixture::new(vec![0.5, 0.5], vec![x + 1.0, -x - 1.0], vec![NOISE_SIGMA; 2]),
            _ => Mixture::gaussian(self.mean_function(x), NOISE_SIGMA),
        };
        built.expect("true conditional parameters are valid")
    }

    pub fn true_density(self, x: f64, y: f64) -> f64 {
        self.conditional(x).density(y)
    }

    /// One draw of `y | x`.
    pub fn sample_y(self, x: f64, rng: &mut Rng) -> f64 {
        match self {
            Case::BimodalC => {
                let centre = if rng.uniform01() < 0.5 { x + 1.0 } else { -x - 1.0 };
                centre + NOISE_SIGMA * rng.normal()
            }
            _ => self.mean_function(x) + NOISE_SIGMA * rng.normal(),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "intro" | "sine" => Ok(Case::IntroSine),
            "a" | "cubic" => Ok(Case::CubicA),
            "b" | "piecewise" => Ok(Case::PiecewiseB),
            "c" | "bimodal" => Ok(Case::BimodalC),
            "d" | "sinusoidal" => Ok(Case::SinusoidalD),
            other => Err(Error::Config(format!("unknown case `{other}`"))),
        }
    }
}

/// Paired samples from one process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub case: Case,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Disjoint, covering train/test index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            case: self.case,
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Writes `x,y,split` rows, `split` being `train` or `test`.
    pub fn write_csv<W: Write>(&self, split: &Split, out: W) -> Result<()> {
        let mut labels = vec![""; self.len()];
        for &i in &split.train {
            labels[i] = "train";
        }
        for &i in &split.test {
            labels[i] = "test";
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "split"])?;
        for i in 0..self.len() {
            w.write_record([self.x[i].to_string(), self.y[i].to_string(), labels[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(case: Case, input: R) -> Result<(Dataset, Split)> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "split"] {
            return Err(Error::Config(format!("expected header x,y,split, got {headers:?}")));
        }
        let mut data = Dataset { case, x: Vec::new(), y: Vec::new() };
        let mut split = Split { train: Vec::new(), test: Vec::new() };
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |field: &str| -> Result<f64> {
                field.parse().map_err(|_| Error::Config(format!("row {}: bad number `{field}`", i + 1)))
            };
            data.x.push(parse(&record[0])?);
            data.y.push(parse(&record[1])?);
            match &record[2] {
                "train" => split.train.push(i),
                "test" => split.test.push(i),
                other => return Err(Error::Config(format!("row {}: unknown split `{other}`", i + 1))),
            }
        }
        Ok((data, split))
    }
}

/// Draws `n` points of `case`: `x` uniform on the case's support, then `y | x`.
pub fn generate(case: Case, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Config(format!("dataset size {n} is below 2")));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let (lo, hi) = case.support();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = rng.uniform(lo, hi);
        x.push(xi);
        y.push(case.sample_y(xi, &mut rng));
    }
    Ok(Dataset { case, x, y })
}

/// Shuffles indices with `seed` and puts the first `round(0.8 n)` in train.
pub fn split_indices(n: usize, seed: u64) -> Result<Split> {
    if n < 5 {
        return Err(Error::Config(format!("cannot split {n} points; need at least 5")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    Rng::seed_from_u64(seed).shuffle(&mut idx);
    let n_train = (TRAIN_FRACTION * n as f64).round() as usize;
    let test = idx.split_off(n_train);
    Ok(Split { train: idx, test })
}

/// `(train, test)` subsets after a seeded shuffle.
pub fn split(dataset: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    let s = split_indices(dataset.len(), seed)?;
    Ok((dataset.subset(&s.train), dataset.subset(&s.test)))
}

/// `count` evenly spaced points over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| if i == count - 1 { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

/// The 500-point evaluation grid over the case's input support.
pub fn evaluation_grid(case: Case) -> Vec<f64> {
    let (lo, hi) = case.support();
    linspace(lo, hi, GRID_POINTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_b_uses_right_branch_at_zero() {
        assert_eq!(Case::PiecewiseB.mean_function(0.0), 0.3);
        assert_eq!(Case::PiecewiseB.mean_function(-1.0), 1.0);
    }

    #[test]
    fn case_a_draws_centre_on_cube() {
        let mut rng = Rng::seed_from_u64(5);
        let n = 10_000;
        let mean = (0..n).map(|_| Case::CubicA.sample_y(2.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 8.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn case_c_is_bimodal_and_symmetric_at_zero() {
        let mut rng = Rng::seed_from_u64(6);
        let draws: Vec<f64> = (0..10_000).map(|_| Case::BimodalC.sample_y(0.0, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.05);
        let near_zero = draws.iter().filter(|y| y.abs() < 0.5).count();
        let near_modes = draws.iter().filter(|y| (y.abs() - 1.0).abs() < 0.3).count();
        assert_eq!(near_zero, 0);
        assert!(near_modes > 9_900);
    }

    #[test]
    fn true_density_values() {
        let peak = 1.0 / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((Case::CubicA.true_density(1.0, 1.0) - peak).abs() < 1e-12);
        assert!((peak - 3.9894).abs() < 1e-4);
        let c = Case::BimodalC.true_density(0.0, 1.0);
        let expected = 0.5 * peak + 0.5 * peak * (-0.5 * 400.0f64).exp();
        assert!((c - expected).abs() < 1e-12);
        assert!((c - 1.9947).abs() < 1e-4);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let s = split_indices(800, 9).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (640, 160));
        let s5 = split_indices(5, 9).unwrap();
        assert_eq!((s5.train.len(), s5.test.len()), (4, 1));
        assert_eq!(split_indices(800, 9).unwrap(), s);
        assert!(split_indices(4, 0).is_err());
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort();
        assert_eq!(all, (0..800).collect::<Vec<_>>());
    }

    #[test]
    fn grid_is_inclusive() {
        let g = evaluation_grid(Case::CubicA);
        assert_eq!(g.len(), 500);
        assert_eq!((g[0], g[499]), (-3.0, 3.0));
    }

    #[test]
    fn parse_cases() {
        assert_eq!("A".parse::<Case>().unwrap(), Case::CubicA);
        assert_eq!("intro".parse::<Case>().unwrap(), Case::IntroSine);
        assert!(matches!("E".parse::<Case>(), Err(Error::Config(_))));
    }

    #[test]
    fn generate_rejects_tiny_n_and_respects_support() {
        assert!(generate(Case::CubicA, 1, 0).is_err());
        let d = generate(Case::IntroSine, 200, 0).unwrap();
        assert!(d.x.iter().all(|x| (0.0..1.0).contains(x)));
        assert_eq!(generate(Case::IntroSine, 200, 0).unwrap(), d);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let d = generate(Case::SinusoidalD, 20, 3).unwrap();
        let s = split_indices(20, 3).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&s, &mut buf).unwrap();
        assert!(buf.starts_with(b"x,y,split\n"));
        let (back, back_split) = Dataset::read_csv(Case::SinusoidalD, buf.as_slice()).unwrap();
        assert_eq!(back, d);
        let mut train = s.train.clone();
        train.sort();
        assert_eq!(back_split.train, train);
    }
}
