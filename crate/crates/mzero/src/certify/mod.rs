//! Separation constants, local separation bounds, residual lower bounds
//! and the Rouché-style cluster certificate.

mod cluster;
mod table;

pub use cluster::{
    certify_cluster, normalized_coordinates, residual_lower_bound, separation_bound, CertifyOptions,
    ClusterCertificate, CoordinatePolicy, Coordinates, NormalizedCoordinates, SeparationResult,
    CERTIFY_NEAR_NORMAL_TOL,
};
pub use table::{
    coefficient_table, p_of_d, separation_constant, CoefficientTable, SeparationConstant, D3_TOL, MAX_TABLE_MU,
};
