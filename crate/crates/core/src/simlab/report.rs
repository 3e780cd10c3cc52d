//! CSV writers. Floats are printed with ten significant digits so files are
//! byte-stable across platforms and thread counts.

use std::io::{self, Write};

use super::studies::{PowerRow, QqCell, SizeRow};
use crate::numeric::fmt_sig10;

pub const POWER_HEADER: &str = "n,rho_star,beta,power_analytic,power_empirical,ci_halfwidth,replicates";
pub const QQ_HEADER: &str = "n,exponent,kind,rank,empirical_q,normal_q,ks_distance";
pub const SIZE_HEADER: &str = "n,p,mean_abs_gap,size_v,size_w,replicates";

pub fn write_power_csv<W: Write>(rows: &[PowerRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{POWER_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.n,
            fmt_sig10(r.rho_star),
            fmt_sig10(r.beta),
            fmt_sig10(r.power_analytic),
            fmt_sig10(r.power_empirical),
            fmt_sig10(r.ci_halfwidth),
            r.replicates
        )?;
    }
    Ok(())
}

pub fn write_qq_csv<W: Write>(cells: &[QqCell], mut out: W) -> io::Result<()> {
    writeln!(out, "{QQ_HEADER}")?;
    for c in cells {
        for (k, (e, q)) in c.empirical_q.iter().zip(&c.normal_q).enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.n,
                fmt_sig10(c.scenario.exponent),
                c.scenario.kind,
                k + 1,
                fmt_sig10(*e),
                fmt_sig10(*q),
                fmt_sig10(c.ks_distance)
            )?;
        }
    }
    Ok(())
}

pub fn write_size_csv<W: Write>(rows: &[SizeRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SIZE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            fmt_sig10(r.p),
            fmt_sig10(r.mean_abs_gap),
            fmt_sig10(r.size_v),
            fmt_sig10(r.size_w),
            r.replicates
        )?;
    }
    Ok(())
}
