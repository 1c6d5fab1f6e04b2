use std::io::Write;

use super::{AnalysisError, FootprintRow, GapHistogram, HitRatePoint, SweepRow};

pub const GAP_HEADER: [&str; 3] = ["gap_bucket_lo", "gap_bucket_hi", "count"];
pub const DISTINCT_HEADER: [&str; 2] = ["frame", "distinct_blocks"];
pub const HIT_CURVE_HEADER: [&str; 2] = ["capacity", "hit_rate"];
pub const SWEEP_HEADER: [&str; 6] = ["voxel_size", "accesses", "distinct", "updates", "hit_rate", "modeled_cycles"];
pub const FOOTPRINT_HEADER: [&str; 11] = [
    "store",
    "target_load_factor",
    "bucket_count_or_depth",
    "entries",
    "load_factor",
    "index_bytes",
    "payload_bytes",
    "overflow_entries",
    "total_bytes",
    "index_ratio_vs_chained",
    "total_ratio_vs_chained",
];

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_gap_csv<W: Write>(h: &GapHistogram, w: W) -> Result<(), AnalysisError> {
    let mut out = writer(w);
    out.write_record(GAP_HEADER)?;
    for (i, (&lo, &count)) in h.edges.iter().zip(&h.counts).enumerate() {
        let hi = h.bucket_hi(i).map_or_else(|| "inf".to_string(), |v| v.to_string());
        out.write_record([lo.to_string(), hi, count.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_distinct_csv<W: Write>(rows: &[(u32, usize)], w: W) -> Result<(), AnalysisError> {
    let mut out = writer(w);
    out.write_record(DISTINCT_HEADER)?;
    for (f, n) in rows {
        out.write_record([f.to_string(), n.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_hit_curve_csv<W: Write>(rows: &[HitRatePoint], w: W) -> Result<(), AnalysisError> {
    let mut out = writer(w);
    out.write_record(HIT_CURVE_HEADER)?;
    for p in rows {
        out.write_record([p.capacity.to_string(), format_sig6(p.hit_rate)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<(), AnalysisError> {
    let mut out = writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in rows {
        out.write_record([
            format_sig6(r.voxel_size),
            r.accesses.to_string(),
            r.distinct.to_string(),
            r.updates.to_string(),
            format_sig6(r.hit_rate),
            format_sig6(r.modeled_cycles),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_footprint_csv<W: Write>(rows: &[FootprintRow], w: W) -> Result<(), AnalysisError> {
    let mut out = writer(w);
    out.write_record(FOOTPRINT_HEADER)?;
    for r in rows {
        out.write_record([
            r.store.as_str().to_string(),
            format_sig6(r.target_load_factor),
            r.bucket_count_or_depth.to_string(),
            r.entries.to_string(),
            format_sig6(r.load_factor),
            r.index_bytes.to_string(),
            r.payload_bytes.to_string(),
            r.overflow_entries.to_string(),
            r.total_bytes.to_string(),
            format_sig6(r.index_ratio_vs_chained),
            format_sig6(r.total_ratio_vs_chained),
        ])?;
    }
    out.flush()?;
    Ok(())
}
