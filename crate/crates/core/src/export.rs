//! Record layouts for trace files.
//!
//! CSV headers are fixed strings; JSON objects carry the same field names.

use std::io::Write;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::equivalence::ComparisonReport;
use crate::grover::ProbabilityRow;
use crate::machine::{format_rational, CollisionTrace, MachineConfig};

pub const TRACE_HEADER: &str = "index,event_type,v1_num,v1_den,v2_num,v2_den";
pub const PROBABILITY_HEADER: &str = "t,P_statevector,P_closed_form,theta_t";
pub const ANGLE_HEADER: &str = "t,machine_theta,grover_theta,deviation";

/// One event of a machine run and the velocities right after it, in
/// lowest terms. `index` counts events from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub index: u64,
    pub event_type: String,
    pub v1_num: String,
    pub v1_den: String,
    pub v2_num: String,
    pub v2_den: String,
}

pub fn trace_records(trace: &CollisionTrace) -> Vec<TraceRecord> {
    trace
        .states
        .windows(2)
        .map(|w| {
            let (v1, v2) = (w[1].v1(), w[1].v2());
            TraceRecord {
                index: w[1].collisions(),
                event_type: w[0].next_event().to_string(),
                v1_num: v1.numer().to_string(),
                v1_den: v1.denom().to_string(),
                v2_num: v2.numer().to_string(),
                v2_den: v2.denom().to_string(),
            }
        })
        .collect()
}

/// Parses a record's velocities back into exact rationals.
pub fn record_velocities(
    record: &TraceRecord,
) -> Option<(num_rational::BigRational, num_rational::BigRational)> {
    let parse = |n: &str, d: &str| -> Option<num_rational::BigRational> {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        (d != BigInt::from(0)).then(|| num_rational::BigRational::new(n, d))
    };
    Some((
        parse(&record.v1_num, &record.v1_den)?,
        parse(&record.v2_num, &record.v2_den)?,
    ))
}

/// Count-only summary: `{total_collisions, m1, m2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSummary {
    pub total_collisions: u64,
    pub m1: String,
    pub m2: String,
}

impl CountSummary {
    pub fn new(config: &MachineConfig, trace: &CollisionTrace) -> Self {
        Self {
            total_collisions: trace.total_collisions,
            m1: format_rational(config.m1()),
            m2: format_rational(config.m2()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnglePairRow {
    pub t: u64,
    pub machine_theta: f64,
    pub grover_theta: f64,
    pub deviation: f64,
}

/// Paired angle sequences of a report, `t` counting block collisions from 1.
pub fn angle_pairs(report: &ComparisonReport) -> Vec<AnglePairRow> {
    report
        .machine_angles
        .iter()
        .zip(&report.grover_angles)
        .enumerate()
        .map(|(i, (&m, &g))| AnglePairRow {
            t: i as u64 + 1,
            machine_theta: m,
            grover_theta: g,
            deviation: (m - g).abs(),
        })
        .collect()
}

fn write_rows<W: Write, R: Serialize>(out: W, header: &str, rows: &[R]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(out: W, records: &[TraceRecord]) -> csv::Result<()> {
    write_rows(out, TRACE_HEADER, records)
}

pub fn write_probability_csv<W: Write>(out: W, rows: &[ProbabilityRow]) -> csv::Result<()> {
    write_rows(out, PROBABILITY_HEADER, rows)
}

pub fn write_angle_csv<W: Write>(out: W, rows: &[AnglePairRow]) -> csv::Result<()> {
    write_rows(out, ANGLE_HEADER, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{parse_rational, run_machine, TraceMode};

    #[test]
    fn trace_csv_layout() {
        let cfg = MachineConfig::from_ratio(parse_rational("3").unwrap()).unwrap();
        let trace = run_machine(&cfg, TraceMode::FullTrace).unwrap();
        let records = trace_records(&trace);
        assert_eq!(records.len(), 5);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(lines.next(), Some("1,BlockBlock,-3,2,-1,2"));
        assert_eq!(lines.next(), Some("2,WallBounce,3,2,-1,2"));
    }

    #[test]
    fn csv_reads_back() {
        let cfg = MachineConfig::from_ratio(parse_rational("7/2").unwrap()).unwrap();
        let trace = run_machine(&cfg, TraceMode::FullTrace).unwrap();
        let records = trace_records(&trace);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &records).unwrap();
        let back: Vec<TraceRecord> = csv::Reader::from_reader(buf.as_slice())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back, records);
        for (r, s) in back.iter().zip(&trace.states[1..]) {
            assert_eq!(record_velocities(r), Some((s.v1(), s.v2())));
        }
    }

    #[test]
    fn count_summary_json() {
        let cfg = MachineConfig::new(parse_rational("2").unwrap(), parse_rational("200").unwrap())
            .unwrap();
        let trace = run_machine(&cfg, TraceMode::CountOnly).unwrap();
        let json = serde_json::to_string(&CountSummary::new(&cfg, &trace)).unwrap();
        assert_eq!(json, r#"{"total_collisions":31,"m1":"2","m2":"200"}"#);
    }
}
