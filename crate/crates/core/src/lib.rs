pub mod error;
pub mod flow;
pub mod kinematics;
pub mod sphharm;
pub mod stokes;
pub mod surface;
pub mod cli;
pub mod verify;
