pub mod gf2k;
pub mod polyrat;
pub mod linalg;
pub mod ramdata;
pub mod kleinrep;
pub mod asform;
pub mod exprparse;
pub mod hkgbasis;
pub mod globaldecomp;
