pub mod double_slit;
pub mod equivariance;
pub mod three_box;
pub mod weak_protocol;
