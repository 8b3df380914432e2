//! Monte Carlo study of the three estimators: for each cell `(n, θ, L)`
//! draw `L` samples, estimate θ with every method on the same sample, and
//! aggregate bias, MSE and their standard errors.
//!
//! Seeding: a cell built with [`SimulationCell::new`] uses the stream
//! `(grid_seed, θ.to_bits())`, and replication `l` draws from
//! `cell.seed.derive(l)`. Cells that share θ but differ in `n` therefore
//! reuse the same underlying draws (the first pairs of each sample
//! coincide), which makes comparisons across `n` less noisy.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::copula::{AssociationParameter, BivariateSample};
use crate::estimators::{Method, DEFAULT_TOL};
use crate::fisher::asymptotic_variance;
use crate::numeric::CompensatedSum;
use crate::output::fmt_f64;
use crate::sampler::{sample_n, SeedSpec};
use crate::{Error, Result};

/// Number of replications used by the standard study grid.
pub const DEFAULT_REPLICATIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationCell {
    pub n: usize,
    pub theta: f64,
    pub replications: usize,
    pub seed: SeedSpec,
    /// Residual tolerance handed to every estimator.
    pub tol: f64,
}

impl SimulationCell {
    pub fn new(n: usize, theta: f64, replications: usize, grid_seed: u64) -> Result<Self> {
        Self::with_seed(n, theta, replications, SeedSpec::new(grid_seed, theta.to_bits()))
    }

    pub fn with_seed(n: usize, theta: f64, replications: usize, seed: SeedSpec) -> Result<Self> {
        if n < 2 {
            return Err(Error::SampleTooSmall { n, min: 2 });
        }
        if replications == 0 {
            return Err(Error::InvalidArgument("replications must be at least 1".into()));
        }
        AssociationParameter::new(theta)?;
        Ok(Self { n, theta, replications, seed, tol: DEFAULT_TOL })
    }

    fn parameter(&self) -> AssociationParameter {
        AssociationParameter::new(self.theta).expect("validated at construction")
    }

    /// Sample of replication `l`.
    pub fn sample(&self, l: usize) -> BivariateSample {
        sample_n(self.parameter(), self.n, self.seed.derive(l as u64)).expect("n >= 2")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorMetrics {
    pub bias: f64,
    pub mse: f64,
    /// `bias/|θ|`; NaN at θ = 0.
    pub rbias: f64,
    /// `mse/θ²`; NaN at θ = 0.
    pub rmse: f64,
    pub se_bias: f64,
    pub se_mse: f64,
    /// Replications where the estimator returned an error; excluded above.
    pub failures: usize,
}

impl EstimatorMetrics {
    /// Aggregates the errors `e = θ̂ − θ` of successful replications, in order.
    pub fn from_errors(errors: &[f64], failures: usize, theta: f64) -> Self {
        let l = errors.len() as f64;
        let bias = errors.iter().copied().collect::<CompensatedSum>().total() / l;
        let mse = errors.iter().map(|e| e * e).collect::<CompensatedSum>().total() / l;
        let sq_dev: CompensatedSum = errors.iter().map(|e| (e * e - mse) * (e * e - mse)).collect();
        let sd_sq = (sq_dev.total() / (l - 1.0)).sqrt();
        let (rbias, rmse) = if theta == 0.0 {
            (f64::NAN, f64::NAN)
        } else {
            (bias / theta.abs(), mse / (theta * theta))
        };
        Self {
            bias,
            mse,
            rbias,
            rmse,
            se_bias: ((mse - bias * bias).max(0.0) / l).sqrt(),
            se_mse: sd_sq / l.sqrt(),
            failures,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub n: usize,
    pub theta: f64,
    pub replications: usize,
    pub ml: EstimatorMetrics,
    pub mm1: EstimatorMetrics,
    pub mm2: EstimatorMetrics,
}

impl MetricsRow {
    pub fn get(&self, method: Method) -> &EstimatorMetrics {
        match method {
            Method::Ml => &self.ml,
            Method::Mm1 => &self.mm1,
            Method::Mm2 => &self.mm2,
        }
    }

    pub fn failure_count(&self) -> usize {
        self.ml.failures + self.mm1.failures + self.mm2.failures
    }
}

/// Per-replication errors of the three methods; `None` marks a failure.
type Replication = [Option<f64>; 3];

fn estimate_all(s: &BivariateSample, theta: f64, tol: f64) -> Replication {
    Method::ALL.map(|m| m.estimate(s, tol).ok().map(|r| r.theta_hat - theta))
}

fn aggregate(n: usize, theta: f64, reps: &[Replication]) -> MetricsRow {
    let metrics = |i: usize| {
        let errors: Vec<f64> = reps.iter().filter_map(|r| r[i]).collect();
        EstimatorMetrics::from_errors(&errors, reps.len() - errors.len(), theta)
    };
    MetricsRow {
        n,
        theta,
        replications: reps.len(),
        ml: metrics(0),
        mm1: metrics(1),
        mm2: metrics(2),
    }
}

/// Runs one cell. Replications execute in parallel on the current rayon
/// pool; the result does not depend on scheduling.
pub fn run_cell(cell: &SimulationCell) -> MetricsRow {
    let reps: Vec<Replication> = (0..cell.replications)
        .into_par_iter()
        .map(|l| estimate_all(&cell.sample(l), cell.theta, cell.tol))
        .collect();
    aggregate(cell.n, cell.theta, &reps)
}

/// Runs the mirror cell at `−θ`, feeding each replication the flipped
/// `(u1, 1 − u2)` version of the sample `cell` itself would use.
pub fn run_cell_flipped(cell: &SimulationCell) -> MetricsRow {
    let theta = -cell.theta;
    let reps: Vec<Replication> = (0..cell.replications)
        .into_par_iter()
        .map(|l| estimate_all(&cell.sample(l).flipped(), theta, cell.tol))
        .collect();
    aggregate(cell.n, theta, &reps)
}

/// Runs every cell on a dedicated pool of `parallelism` threads. Rows come
/// back in input order and are identical for any `parallelism`.
pub fn run_grid(cells: &[SimulationCell], parallelism: usize) -> Result<Vec<MetricsRow>> {
    if cells.is_empty() {
        return Err(Error::InvalidArgument("no simulation cells given".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cells.iter().map(run_cell).collect()))
}

/// Cartesian product of sample sizes and θ values, n varying slowest.
pub fn study_grid(ns: &[usize], thetas: &[f64], replications: usize, grid_seed: u64) -> Result<Vec<SimulationCell>> {
    let mut cells = Vec::with_capacity(ns.len() * thetas.len());
    for &n in ns {
        for &t in thetas {
            cells.push(SimulationCell::new(n, t, replications, grid_seed)?);
        }
    }
    Ok(cells)
}

/// `M*_n(θ) = n · MSE(θ̂_ML)`.
pub fn m_star(row: &MetricsRow) -> f64 {
    row.n as f64 * row.ml.mse
}

/// `(M* − 1/I(θ)) / M*`.
pub fn relative_difference(row: &MetricsRow, inv_i: f64) -> f64 {
    let m = m_star(row);
    (m - inv_i) / m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdRow {
    pub n: usize,
    pub theta: f64,
    pub m_star: f64,
    pub inv_i: f64,
    pub rd: f64,
}

/// RD for every row, with `1/I(θ)` from the default quadrature.
pub fn rd_rows(rows: &[MetricsRow]) -> Result<Vec<RdRow>> {
    let mut cache: HashMap<u64, f64> = HashMap::new();
    rows.iter()
        .map(|row| {
            let inv_i = match cache.get(&row.theta.to_bits()) {
                Some(&v) => v,
                None => {
                    let v = asymptotic_variance(row.theta)?;
                    cache.insert(row.theta.to_bits(), v);
                    v
                }
            };
            Ok(RdRow {
                n: row.n,
                theta: row.theta,
                m_star: m_star(row),
                inv_i,
                rd: relative_difference(row, inv_i),
            })
        })
        .collect()
}

pub const METRICS_HEADER: &str = "n,theta,L,bias_ml,bias_mm1,bias_mm2,mse_ml,mse_mm1,mse_mm2,\
rbias_ml,rbias_mm1,rbias_mm2,rmse_ml,rmse_mm1,rmse_mm2,se_bias_ml,se_bias_mm1,se_bias_mm2,\
se_mse_ml,se_mse_mm1,se_mse_mm2,failures_ml,failures_mm1,failures_mm2";

pub const RD_HEADER: &str = "n,theta,m_star,inv_i,rd";

pub fn write_metrics_csv<W: Write>(w: &mut W, rows: &[MetricsRow]) -> std::io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for r in rows {
        let ms = [&r.ml, &r.mm1, &r.mm2];
        let mut fields = vec![r.n.to_string(), fmt_f64(r.theta), r.replications.to_string()];
        let groups: [fn(&EstimatorMetrics) -> f64; 6] = [
            |m| m.bias,
            |m| m.mse,
            |m| m.rbias,
            |m| m.rmse,
            |m| m.se_bias,
            |m| m.se_mse,
        ];
        for g in groups {
            fields.extend(ms.iter().map(|m| fmt_f64(g(m))));
        }
        fields.extend(ms.iter().map(|m| m.failures.to_string()));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_rd_csv<W: Write>(w: &mut W, rows: &[RdRow]) -> std::io::Result<()> {
    writeln!(w, "{RD_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n,
            fmt_f64(r.theta),
            fmt_f64(r.m_star),
            fmt_f64(r.inv_i),
            fmt_f64(r.rd)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_from_known_errors() {
        let m = EstimatorMetrics::from_errors(&[1.0, -1.0, 2.0, 2.0], 1, 2.0);
        assert_eq!(m.bias, 1.0);
        assert_eq!(m.mse, 2.5);
        assert_eq!(m.rbias, 0.5);
        assert_eq!(m.rmse, 0.625);
        assert!((m.se_bias - (1.5f64 / 4.0).sqrt()).abs() < 1e-15);
        // squared errors 1,1,4,4: sd = √3, se = √3/2
        assert!((m.se_mse - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(m.failures, 1);
        let z = EstimatorMetrics::from_errors(&[0.5], 0, 0.0);
        assert!(z.rbias.is_nan() && z.rmse.is_nan());
    }

    #[test]
    fn cell_validation() {
        assert!(SimulationCell::new(1, 1.0, 10, 0).is_err());
        assert!(SimulationCell::new(5, 1.0, 0, 0).is_err());
        assert!(SimulationCell::new(5, 800.0, 10, 0).is_err());
    }

    #[test]
    fn single_replication_m_star() {
        let cell = SimulationCell::new(20, 2.0, 1, 9).unwrap();
        let row = run_cell(&cell);
        let e = Method::Ml.estimate(&cell.sample(0), DEFAULT_TOL).unwrap().theta_hat - 2.0;
        assert!((m_star(&row) - 20.0 * e * e).abs() < 1e-12);
    }

    #[test]
    fn relative_difference_zero_when_equal() {
        let cell = SimulationCell::new(10, 1.0, 5, 1).unwrap();
        let row = run_cell(&cell);
        assert_eq!(relative_difference(&row, m_star(&row)), 0.0);
    }

    #[test]
    fn common_draws_across_sample_sizes() {
        let a = SimulationCell::new(10, 3.0, 2, 4).unwrap().sample(1);
        let b = SimulationCell::new(30, 3.0, 2, 4).unwrap().sample(1);
        assert_eq!(a.pairs(), &b.pairs()[..10]);
    }

    #[test]
    fn flipped_cell_is_exact_mirror() {
        let cell = SimulationCell::new(15, 2.0, 40, 3).unwrap();
        let a = run_cell(&cell);
        let b = run_cell_flipped(&cell);
        for m in Method::ALL {
            let (x, y) = (a.get(m), b.get(m));
            assert!((x.bias + y.bias).abs() < 1e-9, "{m}");
            assert!((x.mse - y.mse).abs() < 1e-9, "{m}");
        }
    }

    #[test]
    fn grid_is_independent_of_parallelism() {
        let cells = study_grid(&[5, 10], &[0.5, 4.0], 30, 11).unwrap();
        let a = run_grid(&cells, 1).unwrap();
        let b = run_grid(&cells, 4).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_metrics_csv(&mut ca, &a).unwrap();
        write_metrics_csv(&mut cb, &b).unwrap();
        assert_eq!(ca, cb);
        assert!(run_grid(&[], 1).is_err());
    }

    #[test]
    fn csv_headers() {
        let cells = [SimulationCell::new(10, 1.0, 3, 0).unwrap()];
        let rows = run_grid(&cells, 1).unwrap();
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 24);
        assert_eq!(lines.next().unwrap().split(',').count(), 24);
        let mut buf = Vec::new();
        write_rd_csv(&mut buf, &rd_rows(&rows).unwrap()).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,theta,m_star,inv_i,rd\n"));
    }
}
