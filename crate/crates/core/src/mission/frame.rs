//! Body-frame to world-frame velocity conversion.

use serde::{Deserialize, Serialize};

/// A velocity measured in the robot frame with its attitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyFrameSample {
    pub t: f64,
    pub vr: [f64; 3],
    /// Yaw, rotation about z (rad).
    pub psi: f64,
    /// Pitch, rotation about y (rad).
    pub theta: f64,
    /// Roll, rotation about x (rad).
    pub phi: f64,
}

/// `R = Rz(psi) * Ry(theta) * Rx(phi)`.
pub fn euler_zyx(psi: f64, theta: f64, phi: f64) -> [[f64; 3]; 3] {
    let (sp, cp) = psi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let (sf, cf) = phi.sin_cos();
    [
        [cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf],
        [sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf],
        [-st, ct * sf, ct * cf],
    ]
}

pub fn body_to_world_3d(vr: [f64; 3], psi: f64, theta: f64, phi: f64) -> [f64; 3] {
    let r = euler_zyx(psi, theta, phi);
    [0, 1, 2].map(|i| r[i][0] * vr[0] + r[i][1] * vr[1] + r[i][2] * vr[2])
}

/// Horizontal world-frame velocity `(t, [vx, vy])`.
pub fn body_to_world(s: &BodyFrameSample) -> (f64, [f64; 2]) {
    let v = body_to_world_3d(s.vr, s.psi, s.theta, s.phi);
    (s.t, [v[0], v[1]])
}
