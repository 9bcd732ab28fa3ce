//! Per-point evaluation and the CSV sweep.

use super::config::{FeedbackKey, Scenario, SweepVariable};
use crate::beamforming::{
    baseline_bf, run_algorithm1, Baseline, BeamformerSet, BfProblem, ChannelDrawFeedback, ExpectedFeedback,
    Feedback,
};
use crate::capacity::{design_capacity, user_link_capacity_mc};
use crate::channels::SrDraw;
use crate::error::{Error, Result};
use crate::feeder::{feeder_capacity, feeder_capacity_mc, FeederMode};
use crate::rng::RngStream;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;

/// Beamforming scheme selectable on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scheme {
    Proposed,
    Zf,
    Slnr,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::Zf, Scheme::Slnr];

    pub fn key(&self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::Zf => "zf",
            Self::Slnr => "slnr",
        }
    }
}

/// Stream layout under a point stream.
const C1_STREAM: u64 = 0;
const C2_STREAM: u64 = 1;
const FEEDBACK_STREAM: u64 = 2;

/// Feedback measured on the true channel whatever problem the design uses.
struct OnChannel<'a, F> {
    channel: &'a BfProblem,
    inner: F,
}

impl<F: Feedback> Feedback for OnChannel<'_, F> {
    fn measure(&mut self, _prob: &BfProblem, w: &DMatrix<Complex64>, active: &[usize], round: usize) -> Vec<f64> {
        self.inner.measure(self.channel, w, active, round)
    }
}

/// Beamformers of `scheme` for the scenario.
pub fn design(scn: &Scenario, scheme: Scheme, stream: RngStream) -> Result<BeamformerSet> {
    let prob = scn.design_problem()?;
    match scheme {
        Scheme::Zf => baseline_bf(&prob, Baseline::ZeroForcing),
        Scheme::Slnr => baseline_bf(&prob, Baseline::Slnr),
        Scheme::Proposed => {
            let k = scn.channel.k();
            match scn.feedback {
                FeedbackKey::Expected => {
                    let mut fb = OnChannel {
                        channel: &scn.channel,
                        inner: ExpectedFeedback {
                            fading_power: vec![scn.fading.mean_power(); k],
                        },
                    };
                    run_algorithm1(&prob, &scn.algorithm, &mut fb)
                }
                FeedbackKey::ChannelDraw => {
                    let mut fb = OnChannel {
                        channel: &scn.channel,
                        inner: ChannelDrawFeedback {
                            fading: vec![SrDraw::new(&scn.fading)?; k],
                            stream: stream.child(FEEDBACK_STREAM),
                        },
                    };
                    run_algorithm1(&prob, &scn.algorithm, &mut fb)
                }
            }
        }
    }
}

/// Closed-form and simulated user-link figures of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub c2_cf: f64,
    pub c2_per_user: Vec<f64>,
    pub c2_mc: f64,
    pub c2_mc_se: f64,
    pub selected: usize,
    pub iterations: usize,
    pub converged: bool,
    pub clamped: usize,
}

impl SchemeOutcome {
    fn failed() -> Self {
        Self {
            c2_cf: f64::NAN,
            c2_per_user: Vec::new(),
            c2_mc: f64::NAN,
            c2_mc_se: f64::NAN,
            selected: 0,
            iterations: 0,
            converged: false,
            clamped: 0,
        }
    }
}

/// Design and evaluate one scheme. The simulated figure uses
/// `stream.child(1)`, identical across schemes.
pub fn evaluate_scheme(scn: &Scenario, scheme: Scheme, stream: RngStream) -> Result<SchemeOutcome> {
    let bf = design(scn, scheme, stream)?;
    let lambda = scn.algorithm.lambda_th;
    let cf = design_capacity(&scn.channel, &bf, &scn.fading, lambda, scn.conditioning)?;
    let mc = user_link_capacity_mc(stream.child(C2_STREAM), &scn.channel, &bf, &scn.fading, lambda, scn.samples)?;
    Ok(SchemeOutcome {
        c2_cf: cf.bits,
        c2_per_user: cf.per_user,
        c2_mc: mc.total.mean,
        c2_mc_se: mc.total.std_err,
        selected: bf.selected.len(),
        iterations: bf.iterations,
        converged: bf.converged,
        clamped: bf.clamped,
    })
}

/// Feeder figures at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeederOutcome {
    /// Configured mode.
    pub c1_cf: f64,
    pub c1_stbc_cf: f64,
    pub c1_single_cf: f64,
    pub c1_mc: f64,
    pub c1_mc_se: f64,
    pub accuracy_warning: bool,
}

pub fn evaluate_feeder(scn: &Scenario, stream: RngStream) -> Result<FeederOutcome> {
    let cf = feeder_capacity(&scn.feeder, scn.quadrature, scn.feeder_mode)?;
    let single = feeder_capacity(&scn.feeder, scn.quadrature, FeederMode::Single)?.bits;
    let stbc = if scn.feeder.gateways.len() >= 2 {
        feeder_capacity(&scn.feeder, scn.quadrature, FeederMode::Stbc)?.bits
    } else {
        f64::NAN
    };
    let mc = feeder_capacity_mc(stream.child(C1_STREAM), &scn.feeder, scn.samples, scn.feeder_mode)?;
    Ok(FeederOutcome {
        c1_cf: cf.bits,
        c1_stbc_cf: stbc,
        c1_single_cf: single,
        c1_mc: mc.mean,
        c1_mc_se: mc.std_err,
        accuracy_warning: cf.accuracy_warning,
    })
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: usize,
    pub feeder_power_dbm: f64,
    pub user_power_dbw: f64,
    pub feeder: FeederOutcome,
    /// Indexed like [`Scheme::ALL`].
    pub schemes: [SchemeOutcome; 3],
}

impl SweepRow {
    pub fn scheme(&self, s: Scheme) -> &SchemeOutcome {
        &self.schemes[Scheme::ALL.iter().position(|x| *x == s).expect("scheme listed")]
    }

    /// End-to-end closed-form capacity min(C₁, C₂) of a scheme.
    pub fn c(&self, s: Scheme) -> f64 {
        let c2 = self.scheme(s).c2_cf;
        if c2.is_nan() {
            f64::NAN
        } else {
            self.feeder.c1_cf.min(c2)
        }
    }
}

/// Stable CSV header.
pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "point",
        "feeder_power_dbm",
        "user_power_dbw",
        "c1_cf",
        "c1_stbc_cf",
        "c1_single_cf",
        "c1_mc",
        "c1_mc_se",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for s in Scheme::ALL {
        for suffix in ["cf", "mc", "mc_se"] {
            h.push(format!("c2_{}_{suffix}", s.key()));
        }
    }
    for s in Scheme::ALL {
        h.push(format!("c_{}", s.key()));
    }
    for s in Scheme::ALL {
        h.push(format!("selected_{}", s.key()));
    }
    h
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.10e}")
    }
}

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let f = &self.feeder;
        let mut r = vec![
            self.point.to_string(),
            format!("{}", self.feeder_power_dbm),
            format!("{}", self.user_power_dbw),
            num(f.c1_cf),
            num(f.c1_stbc_cf),
            num(f.c1_single_cf),
            num(f.c1_mc),
            num(f.c1_mc_se),
        ];
        for s in &self.schemes {
            r.extend([num(s.c2_cf), num(s.c2_mc), num(s.c2_mc_se)]);
        }
        for s in Scheme::ALL {
            r.push(num(self.c(s)));
        }
        for s in &self.schemes {
            r.push(s.selected.to_string());
        }
        r
    }
}

/// Evaluate one point. ZF yields NaN figures when it is undefined (rank
/// deficiency or more users than beams); other errors propagate.
pub fn evaluate_point(scn: &Scenario, stream: RngStream) -> Result<(FeederOutcome, [SchemeOutcome; 3])> {
    let feeder = evaluate_feeder(scn, stream)?;
    let mut out: Vec<SchemeOutcome> = Vec::with_capacity(3);
    for s in Scheme::ALL {
        match evaluate_scheme(scn, s, stream) {
            Ok(o) => out.push(o),
            Err(Error::Singular { .. } | Error::Parameter(_)) if s == Scheme::Zf => out.push(SchemeOutcome::failed()),
            Err(e) => return Err(e),
        }
    }
    Ok((feeder, out.try_into().expect("three schemes")))
}

/// Base scenario, swept variable, grid and seed.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub base: Scenario,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub feeder_power_dbm: f64,
    pub user_power_dbw: f64,
}

impl Sweep {
    pub fn scenario_at(&self, value: f64) -> (Scenario, f64, f64) {
        match self.variable {
            SweepVariable::UserPowerDbw => (self.base.with_user_power_dbw(value), self.feeder_power_dbm, value),
            SweepVariable::FeederPowerDbm => (self.base.with_feeder_power_dbm(value), value, self.user_power_dbw),
        }
    }

    /// Rows ordered by grid index; point i uses stream child(i) of the seed.
    pub fn run(&self) -> Result<Vec<SweepRow>> {
        let root = RngStream::new(self.base.seed, 0);
        self.grid
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let (scn, fp, up) = self.scenario_at(v);
                let (feeder, schemes) = evaluate_point(&scn, root.child(i as u64))?;
                Ok(SweepRow {
                    point: i,
                    feeder_power_dbm: fp,
                    user_power_dbw: up,
                    feeder,
                    schemes,
                })
            })
            .collect()
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(csv_header()).map_err(io)?;
    for r in rows {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
