//! CSV emission with the fixed schema
//! `experiment,alpha,s,h,tau,X,T,error_max,error_at_T,order_est,runtime_seconds`.
//!
//! Floats are written in shortest-roundtrip form, so reruns with the same
//! configuration produce bit-identical numeric fields (the runtime column
//! is excluded from that promise).

use std::io::Write;

use crate::experiments::LevelRow;

pub const HEADER: &str = "experiment,alpha,s,h,tau,X,T,error_max,error_at_T,order_est,runtime_seconds";

pub fn write_rows<W: Write>(mut out: W, rows: &[LevelRow]) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.alpha,
            r.s,
            r.h,
            r.tau,
            r.half_width,
            r.horizon,
            r.error_max,
            r.error_at_final,
            r.order_est,
            r.runtime_seconds
        )?;
    }
    Ok(())
}

pub fn to_string(rows: &[LevelRow]) -> String {
    let mut buf = Vec::new();
    write_rows(&mut buf, rows).expect("in-memory write");
    String::from_utf8(buf).expect("ascii csv")
}
