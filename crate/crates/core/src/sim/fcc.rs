use std::fmt::Write as _;

use crate::polar::{InformationSet, ReliabilityOrder};
use crate::{Error, Result};

/// Frozen-channel chart: the frozen indicator (1 = frozen) of every bit
/// channel, ordered from least to most reliable by `order` and folded
/// row-major into `height` rows of `width`.
pub fn emit_fcc(
    info: &InformationSet,
    order: &ReliabilityOrder,
    width: usize,
    height: usize,
) -> Result<Vec<Vec<u8>>> {
    if order.len() != info.len() {
        return Err(Error::LengthMismatch {
            expected: info.len(),
            actual: order.len(),
        });
    }
    if width * height != info.len() {
        return Err(Error::InvalidParameter(format!(
            "{width}x{height} chart does not hold {} channels",
            info.len()
        )));
    }
    let flat: Vec<u8> = order
        .indices()
        .iter()
        .rev()
        .map(|&i| u8::from(!info.is_info(i)))
        .collect();
    Ok(flat.chunks(width).map(<[u8]>::to_vec).collect())
}

pub fn fcc_csv(chart: &[Vec<u8>]) -> String {
    let mut s = String::new();
    for row in chart {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// Plain (P2) greymap, frozen channels black.
pub fn fcc_pgm(chart: &[Vec<u8>]) -> String {
    let width = chart.first().map_or(0, Vec::len);
    let mut s = format!("P2\n{width} {}\n255\n", chart.len());
    for row in chart {
        let cells: Vec<&str> = row
            .iter()
            .map(|&c| if c == 1 { "0" } else { "255" })
            .collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}
