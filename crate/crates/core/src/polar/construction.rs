//! Code construction: information sets, reliability orders and the
//! Bhattacharyya (BEC) design.

use std::fmt;
use std::path::Path;

use crate::error::io_error;
use crate::{Error, Result};

/// The A-vector of a polar code: which bit-channels carry information.
///
/// Indices are 0-based internally; file formats and docs use 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InformationSet {
    mask: Vec<bool>,
    log_len: usize,
    k: usize,
}

impl InformationSet {
    /// Builds an information set from its mask (`true` = information bit).
    pub fn new(mask: Vec<bool>) -> Result<Self> {
        let len = mask.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(len));
        }
        let k = mask.iter().filter(|&&a| a).count();
        if k == 0 {
            return Err(Error::InfoLengthOutOfRange { k, n: len });
        }
        Ok(Self {
            log_len: len.trailing_zeros() as usize,
            mask,
            k,
        })
    }

    /// Parses the one-line `0`/`1` A-vector text format.
    pub fn parse(text: &str) -> Result<Self> {
        let line = text.trim();
        let mask = line
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    msg: format!("unexpected character {other:?} in A-vector"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mask)
    }

    /// Codeword length N.
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    /// Always false; an information set has at least two positions.
    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    /// Number of polarization stages, log2(N).
    pub fn stages(&self) -> usize {
        self.log_len
    }

    /// Information length k.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// 0-based information positions in increasing order.
    pub fn info_positions(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.mask[i]).collect()
    }

    /// Code rate R_c = k / N.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.len() as f64
    }
}

impl fmt::Display for InformationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &a in &self.mask {
            f.write_str(if a { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Code rate of an information set.
pub fn rate(info: &InformationSet) -> f64 {
    info.rate()
}

/// Where a reliability order came from.
#[derive(Clone, Debug, PartialEq)]
pub enum OrderSource {
    /// BEC Bhattacharyya recursion; carries the per-channel Z values.
    Bhattacharyya { z0: f64, z: Vec<f64> },
    File,
}

/// Bit-channel indices (0-based) from most to least reliable.
#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityOrder {
    order: Vec<usize>,
    source: OrderSource,
}

impl ReliabilityOrder {
    /// Wraps a 0-based permutation listing most reliable first.
    pub fn from_indices(order: Vec<usize>, source: OrderSource) -> Result<Self> {
        let n = order.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i + 1, n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateIndex(i + 1));
            }
        }
        Ok(Self { order, source })
    }

    /// Parses the one-index-per-line (1-based) format, requiring exactly `n` entries.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let index: usize = line.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("not an index: {line:?}"),
            })?;
            if index == 0 || index > n {
                return Err(Error::IndexOutOfRange { index, n });
            }
            if std::mem::replace(&mut seen[index - 1], true) {
                return Err(Error::DuplicateIndex(index));
            }
            order.push(index - 1);
        }
        if order.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: order.len(),
            });
        }
        Ok(Self {
            order,
            source: OrderSource::File,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based indices, most reliable first.
    pub fn indices(&self) -> &[usize] {
        &self.order
    }

    pub fn source(&self) -> &OrderSource {
        &self.source
    }

    /// Restricts a nested order to the first `n` bit-channels, keeping relative
    /// order (how the 5G sequence yields shorter mother codes).
    pub fn restrict(&self, n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        if n > self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: n,
            });
        }
        let order = self.order.iter().copied().filter(|&i| i < n).collect();
        let source = match &self.source {
            OrderSource::Bhattacharyya { z0, z } => OrderSource::Bhattacharyya {
                z0: *z0,
                z: z[..n].to_vec(),
            },
            OrderSource::File => OrderSource::File,
        };
        Ok(Self { order, source })
    }

    /// Renders the order in the 1-based file format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * 5);
        for &i in &self.order {
            out.push_str(&(i + 1).to_string());
            out.push('\n');
        }
        out
    }
}

/// Reads a reliability order file of exactly `n` lines.
pub fn load_reliability_order(path: impl AsRef<Path>, n: usize) -> Result<ReliabilityOrder> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    ReliabilityOrder::parse(&text, n)
}

const NR_SEQUENCE: &str = include_str!("../../assets/nr_reliability_1024.txt");

/// The 5G NR reliability sequence restricted to length `n` (at most 1024).
pub fn nr_reliability_order(n: usize) -> Result<ReliabilityOrder> {
    ReliabilityOrder::parse(NR_SEQUENCE, 1024)?.restrict(n)
}

/// Selects the `k` most reliable positions of `order` as information bits.
pub fn info_set_from_order(order: &ReliabilityOrder, k: usize) -> Result<InformationSet> {
    let n = order.len();
    if k == 0 || k > n {
        return Err(Error::InfoLengthOutOfRange { k, n });
    }
    let mut mask = vec![false; n];
    for &i in &order.order[..k] {
        mask[i] = true;
    }
    InformationSet::new(mask)
}

/// Bhattacharyya parameters of all bit-channels for a BEC with erasure
/// probability `z0`, in natural (non bit-reversed) index order.
///
/// Index bits are consumed MSB first: the MSB selects the transform applied to
/// the raw channel, matching `x = u F^{(x)n}` without bit reversal.
pub fn bhattacharyya_parameters(n: usize, z0: f64) -> Result<Vec<f64>> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if !(z0 > 0.0 && z0 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "design erasure probability {z0} outside (0, 1)"
        )));
    }
    let mut z = vec![z0];
    while z.len() < n {
        z = z
            .iter()
            .flat_map(|&v| [2.0 * v - v * v, v * v])
            .collect();
    }
    Ok(z)
}

/// Indices sorted by increasing parameter; on ties the higher index first.
fn rank_ascending(z: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(b.cmp(&a)));
    order
}

/// Designs a `(k, n)` code by ranking bit-channels by their BEC Bhattacharyya
/// parameter. Ties freeze the lower index.
pub fn construct_bhattacharyya(
    n: usize,
    k: usize,
    z0: f64,
) -> Result<(InformationSet, ReliabilityOrder)> {
    let z = bhattacharyya_parameters(n, z0)?;
    if k == 0 || k > n {
        return Err(Error::InfoLengthOutOfRange { k, n });
    }
    let order = ReliabilityOrder {
        order: rank_ascending(&z),
        source: OrderSource::Bhattacharyya { z0, z },
    };
    let info = info_set_from_order(&order, k)?;
    Ok((info, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(info: &InformationSet) -> Vec<u8> {
        info.mask().iter().map(|&a| a as u8).collect()
    }

    #[test]
    fn bhattacharyya_two_and_four() {
        let (info, order) = construct_bhattacharyya(2, 1, 0.5).unwrap();
        assert_eq!(bits(&info), [0, 1]);
        match order.source() {
            OrderSource::Bhattacharyya { z, .. } => assert_eq!(z, &[0.75, 0.25]),
            _ => unreachable!(),
        }

        let (info, order) = construct_bhattacharyya(4, 2, 0.5).unwrap();
        assert_eq!(bits(&info), [0, 0, 1, 1]);
        match order.source() {
            OrderSource::Bhattacharyya { z, .. } => {
                assert_eq!(z, &[0.9375, 0.5625, 0.4375, 0.0625])
            }
            _ => unreachable!(),
        }
        assert_eq!(order.indices(), &[3, 2, 1, 0]);

        let (info, _) = construct_bhattacharyya(4, 4, 0.5).unwrap();
        assert_eq!(bits(&info), [1, 1, 1, 1]);
    }

    #[test]
    fn bhattacharyya_rejects_bad_input() {
        assert!(matches!(
            construct_bhattacharyya(6, 2, 0.5),
            Err(Error::NotPowerOfTwo(6))
        ));
        assert!(construct_bhattacharyya(8, 0, 0.5).is_err());
        assert!(construct_bhattacharyya(8, 9, 0.5).is_err());
        assert!(construct_bhattacharyya(8, 4, 1.0).is_err());
    }

    #[test]
    fn ties_freeze_lower_index() {
        assert_eq!(rank_ascending(&[0.3, 0.3]), [1, 0]);
        assert_eq!(rank_ascending(&[0.5, 0.1, 0.5, 0.1]), [3, 1, 2, 0]);
    }

    #[test]
    fn parse_order_file() {
        let order = ReliabilityOrder::parse("2\n1", 2).unwrap();
        assert_eq!(order.indices(), &[1, 0]);
        assert!(matches!(
            ReliabilityOrder::parse("1\n1", 2),
            Err(Error::DuplicateIndex(1))
        ));
        assert!(matches!(
            ReliabilityOrder::parse("1\n2\n3", 4),
            Err(Error::LengthMismatch { expected: 4, actual: 3 })
        ));
        assert!(matches!(
            ReliabilityOrder::parse("1\n5\n2\n3", 4),
            Err(Error::IndexOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn info_set_selection() {
        let order = ReliabilityOrder::parse("4\n3\n2\n1", 4).unwrap();
        assert_eq!(bits(&info_set_from_order(&order, 2).unwrap()), [0, 0, 1, 1]);
        let order = ReliabilityOrder::parse("1\n2\n3\n4", 4).unwrap();
        assert_eq!(bits(&info_set_from_order(&order, 4).unwrap()), [1, 1, 1, 1]);
        let order = ReliabilityOrder::parse("2\n1", 2).unwrap();
        assert_eq!(bits(&info_set_from_order(&order, 1).unwrap()), [0, 1]);
        assert!(info_set_from_order(&order, 3).is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(rate(&InformationSet::parse("01").unwrap()), 0.5);
        assert_eq!(rate(&InformationSet::parse("1111").unwrap()), 1.0);
        let (info, _) = construct_bhattacharyya(512, 128, 0.5).unwrap();
        assert_eq!(rate(&info), 0.25);
    }

    #[test]
    fn a_vector_round_trip() {
        let info = InformationSet::parse("00010111\n").unwrap();
        assert_eq!(info.to_string(), "00010111");
        assert_eq!(info.k(), 4);
        assert_eq!(info.info_positions(), [3, 5, 6, 7]);
        assert!(InformationSet::parse("0000").is_err());
        assert!(InformationSet::parse("012").is_err());
    }

    #[test]
    fn nr_sequence_is_nested_permutation() {
        let full = nr_reliability_order(1024).unwrap();
        assert_eq!(full.indices()[0], 1023);
        assert_eq!(*full.indices().last().unwrap(), 0);
        let short = nr_reliability_order(8).unwrap();
        // Q for N = 8, least reliable first: 0 1 2 4 3 5 6 7.
        assert_eq!(short.indices(), &[7, 6, 5, 3, 4, 2, 1, 0]);
    }

    #[test]
    fn freezing_is_monotone_in_k() {
        let (_, order) = construct_bhattacharyya(64, 1, 0.5).unwrap();
        for k in 1..64 {
            let small = info_set_from_order(&order, k).unwrap();
            let large = info_set_from_order(&order, k + 1).unwrap();
            for i in 0..64 {
                assert!(!small.is_info(i) || large.is_info(i));
            }
        }
    }
}
