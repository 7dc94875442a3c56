//! Polar code construction, encoding and CRC.

mod construction;
mod crc;
mod encoder;
mod equivalent;

pub use construction::{
    bhattacharyya_parameters, construct_bhattacharyya, info_set_from_order,
    load_reliability_order, nr_reliability_order, rate, InformationSet, OrderSource,
    ReliabilityOrder,
};
pub use crc::{crc_attach, crc_check, CrcSpec};
pub use encoder::{encode, gather, polar_transform, scatter};
pub use equivalent::build_equivalent_code;
