//! Mesh-guided object recognition and autonomous assembly toolkit.
//!
//! The pipeline mirrors a depth-camera + robot-arm block assembly cell,
//! end to end and hardware-free:
//!
//! 1. [`scanner`] renders partial views of design meshes from a virtual
//!    camera sphere (the offline training side);
//! 2. [`descriptor`] condenses each view into a viewpoint-aware global
//!    histogram, [`db`] stores and queries the training records;
//! 3. [`recognition`] segments a sensed scene, matches clusters against the
//!    database and refines 6-DoF poses with multi-seed ICP;
//! 4. [`calibration`] chains camera-frame poses into the robot frame;
//! 5. [`planner`] samples and filters grasps, then emits the fixed
//!    pick-transit-place command sequence per block;
//! 6. [`sim`] closes the loop on synthetic scenes with a depth-noise model
//!    and runs the classification / pose-tolerance / assembly experiments.
//!
//! All lengths are millimetres; all frames are rigid transforms with
//! matrix rotations. Types are immutable after construction and safe to
//! share across threads.

pub mod config;
pub mod geometry;

pub use config::Config;
