//! Received power, co-channel interference, SINR and rate for a complete
//! network assignment.

use std::io::Write;

use serde::Serialize;

use crate::error::{ConstraintReport, Violation};
use crate::netmodel::{watts_to_dbm, GainMatrix};
use crate::{Error, Result};

/// User association, sub-channel and power-level choices as binary matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkAssignment {
    /// `[uav][gu]`
    pub association: Vec<Vec<bool>>,
    /// `[uav][subchannel]`
    pub subchannel: Vec<Vec<bool>>,
    /// `[uav][level]`
    pub power: Vec<Vec<bool>>,
}

impl NetworkAssignment {
    /// Builds the binary matrices from index choices.
    pub fn from_choices(
        num_subchannels: usize,
        num_levels: usize,
        uav_of_gu: &[usize],
        channel_of_uav: &[Option<usize>],
        level_of_uav: &[Option<usize>],
    ) -> Result<Self> {
        let m = channel_of_uav.len();
        if level_of_uav.len() != m {
            return Err(Error::LengthMismatch { expected: m, actual: level_of_uav.len() });
        }
        let mut association = vec![vec![false; uav_of_gu.len()]; m];
        for (n, &u) in uav_of_gu.iter().enumerate() {
            if u >= m {
                return Err(Error::InvalidParameter(format!("GU {n} mapped to UAV {u} of {m}")));
            }
            association[u][n] = true;
        }
        let one_hot = |choice: &Option<usize>, width: usize| -> Result<Vec<bool>> {
            let mut row = vec![false; width];
            if let Some(i) = *choice {
                if i >= width {
                    return Err(Error::InvalidParameter(format!("index {i} out of {width}")));
                }
                row[i] = true;
            }
            Ok(row)
        };
        let subchannel = channel_of_uav.iter().map(|c| one_hot(c, num_subchannels)).collect::<Result<_>>()?;
        let power = level_of_uav.iter().map(|c| one_hot(c, num_levels)).collect::<Result<_>>()?;
        Ok(Self { association, subchannel, power })
    }

    pub fn num_uavs(&self) -> usize {
        self.association.len()
    }

    pub fn num_gus(&self) -> usize {
        self.association.first().map_or(0, Vec::len)
    }

    /// Checks association, sub-channel and power constraints plus shapes.
    pub fn check(&self, num_subchannels: usize, num_levels: usize) -> ConstraintReport {
        let mut report = ConstraintReport::default();
        let m = self.num_uavs();
        let n = self.num_gus();
        let shape = |rows: &Vec<Vec<bool>>| (rows.len(), rows.first().map_or(0, Vec::len));
        let mut push_shape = |name, rows: &Vec<Vec<bool>>, cols: usize| {
            let ragged = rows.iter().any(|r| r.len() != cols);
            if rows.len() != m || ragged {
                report.violations.push(Violation::Shape { matrix: name, expected: (m, cols), actual: shape(rows) });
            }
        };
        push_shape("association", &self.association, n);
        push_shape("subchannel", &self.subchannel, num_subchannels);
        push_shape("power", &self.power, num_levels);
        if !report.is_empty() {
            return report;
        }
        for gu in 0..n {
            let count = (0..m).filter(|&u| self.association[u][gu]).count();
            if count != 1 {
                report.violations.push(Violation::Association { gu, count });
            }
        }
        for uav in 0..m {
            let count = self.subchannel[uav].iter().filter(|&&b| b).count();
            if count > 1 {
                report.violations.push(Violation::Subchannel { uav, count });
            }
            let count = self.power[uav].iter().filter(|&&b| b).count();
            if count > 1 {
                report.violations.push(Violation::PowerLevel { uav, count });
            }
        }
        report
    }

    pub fn validate(&self, num_subchannels: usize, num_levels: usize) -> Result<()> {
        let report = self.check(num_subchannels, num_levels);
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Infeasible(report))
        }
    }

    pub fn serving_uav(&self, gu: usize) -> Option<usize> {
        (0..self.num_uavs()).find(|&m| self.association[m][gu])
    }

    pub fn channel_of(&self, uav: usize) -> Option<usize> {
        self.subchannel[uav].iter().position(|&b| b)
    }

    pub fn level_of(&self, uav: usize) -> Option<usize> {
        self.power[uav].iter().position(|&b| b)
    }

    fn transmit_power(&self, uav: usize, power_w: &[f64]) -> f64 {
        self.level_of(uav).map_or(0.0, |l| power_w[l])
    }
}

/// Received interference at `gu` on `subchannel` from every UAV other than
/// the GU's server that occupies the same sub-channel.
pub fn interference(
    assignment: &NetworkAssignment,
    gains: &GainMatrix,
    power_w: &[f64],
    gu: usize,
    subchannel: usize,
) -> f64 {
    let server = assignment.serving_uav(gu);
    (0..assignment.num_uavs())
        .filter(|&m| Some(m) != server && assignment.subchannel[m][subchannel])
        .map(|m| gains.gain(m, gu) * assignment.transmit_power(m, power_w))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub gu: usize,
    pub uav: usize,
    pub subchannel: Option<usize>,
    pub power_dbm: Option<f64>,
    pub signal_w: f64,
    pub interference_w: f64,
    pub sinr: f64,
    pub rate: f64,
}

impl LinkReport {
    pub fn sinr_db(&self) -> f64 {
        10.0 * self.sinr.log10()
    }
}

/// One report per GU. GUs whose serving UAV is silent (no sub-channel or no
/// power level) get zero signal and zero rate.
pub fn link_reports(
    assignment: &NetworkAssignment,
    gains: &GainMatrix,
    power_w: &[f64],
    noise_w: f64,
) -> Result<Vec<LinkReport>> {
    assignment.validate(assignment.subchannel.first().map_or(0, Vec::len), power_w.len())?;
    if gains.num_uavs() != assignment.num_uavs() || gains.num_gus() != assignment.num_gus() {
        return Err(Error::LengthMismatch {
            expected: assignment.num_uavs() * assignment.num_gus(),
            actual: gains.num_uavs() * gains.num_gus(),
        });
    }
    let reports = (0..assignment.num_gus())
        .map(|gu| {
            let uav = assignment.serving_uav(gu).expect("validated association");
            let channel = assignment.channel_of(uav);
            let level = assignment.level_of(uav);
            let interference_w = channel.map_or(0.0, |k| interference(assignment, gains, power_w, gu, k));
            let signal_w = match (channel, level) {
                (Some(_), Some(l)) => gains.gain(uav, gu) * power_w[l],
                _ => 0.0,
            };
            let sinr = signal_w / (interference_w + noise_w);
            LinkReport {
                gu,
                uav,
                subchannel: channel,
                power_dbm: level.map(|l| watts_to_dbm(power_w[l])),
                signal_w,
                interference_w,
                sinr,
                rate: (1.0 + sinr).log2(),
            }
        })
        .collect();
    Ok(reports)
}

/// Network sum rate in bits/s/Hz.
pub fn sum_rate(assignment: &NetworkAssignment, gains: &GainMatrix, power_w: &[f64], noise_w: f64) -> Result<f64> {
    Ok(link_reports(assignment, gains, power_w, noise_w)?.iter().map(|r| r.rate).sum())
}

/// Writes `gu,uav,subchannel,power_dbm,signal_w,interference_w,sinr_db,rate`.
pub fn write_link_csv<W: Write>(reports: &[LinkReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gu", "uav", "subchannel", "power_dbm", "signal_w", "interference_w", "sinr_db", "rate"])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in reports {
        w.write_record([
            r.gu.to_string(),
            r.uav.to_string(),
            opt(r.subchannel.map(|k| k.to_string())),
            opt(r.power_dbm.map(|p| format!("{p}"))),
            format!("{:e}", r.signal_w),
            format!("{:e}", r.interference_w),
            format!("{}", r.sinr_db()),
            format!("{}", r.rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}
