use super::{ControlCommand, VehicleConstraints, VehicleParams, VehicleState};
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Below this speed only the kinematic model is used.
const KINEMATIC_BELOW: f64 = 0.5;
/// Above this speed only the dynamic model is used; linear blend in between.
const DYNAMIC_ABOVE: f64 = 1.0;

const MAX_DT: f64 = 0.02;

/// Converts a steering-angle/acceleration command into the effective
/// acceleration and steering rate the model can realise over `dt`.
pub fn constrain_inputs(
    state: &VehicleState,
    cmd: ControlCommand,
    c: &VehicleConstraints,
    dt: f64,
) -> (f64, f64) {
    let target = cmd.steer.clamp(c.delta_min, c.delta_max);
    let mut ddelta = ((target - state.delta) / dt).clamp(c.ddelta_min, c.ddelta_max);
    if (state.delta <= c.delta_min && ddelta <= 0.0) || (state.delta >= c.delta_max && ddelta >= 0.0)
    {
        ddelta = 0.0;
    }

    let v = state.v;
    let pos_limit = if v > c.v_switch {
        c.a_max * c.v_switch / v
    } else {
        c.a_max
    };
    let a = cmd.accel;
    let accel = if (v <= c.v_min_model && a <= 0.0) || (v >= c.v_max_model && a >= 0.0) {
        0.0
    } else if a <= -c.a_max {
        -c.a_max
    } else if a >= pos_limit {
        pos_limit
    } else {
        a
    };
    (accel, ddelta)
}

fn kinematic(x: &[f64; 7], accel: f64, ddelta: f64, p: &VehicleParams) -> [f64; 7] {
    let [_, _, delta, v, psi, _, beta] = *x;
    let lwb = p.wheelbase();
    let tan_d = delta.tan();
    let cos_d = delta.cos();
    let ratio = p.l_r / lwb;
    let beta_dot = ratio * ddelta / (cos_d * cos_d * (1.0 + (ratio * tan_d).powi(2)));
    let (sin_b, cos_b) = beta.sin_cos();
    let psi_ddot = (accel * cos_b * tan_d - v * sin_b * beta_dot * tan_d
        + v * cos_b * ddelta / (cos_d * cos_d))
        / lwb;
    [
        v * (psi + beta).cos(),
        v * (psi + beta).sin(),
        ddelta,
        accel,
        v * cos_b * tan_d / lwb,
        psi_ddot,
        beta_dot,
    ]
}

fn dynamic(x: &[f64; 7], accel: f64, ddelta: f64, p: &VehicleParams) -> [f64; 7] {
    let [_, _, delta, v, psi, psi_dot, beta] = *x;
    let lwb = p.wheelbase();
    let (lf, lr, h, mu, m, iz) = (p.l_f, p.l_r, p.h_cg, p.mu, p.m, p.i_z);
    let front = p.c_sf * (GRAVITY * lr - accel * h);
    let rear = p.c_sr * (GRAVITY * lf + accel * h);

    let yaw_acc = -mu * m / (v * iz * lwb) * (lf * lf * front + lr * lr * rear) * psi_dot
        + mu * m / (iz * lwb) * (lr * rear - lf * front) * beta
        + mu * m / (iz * lwb) * lf * front * delta;
    let beta_dot = (mu / (v * v * lwb) * (rear * lr - front * lf) - 1.0) * psi_dot
        - mu / (v * lwb) * (rear + front) * beta
        + mu / (v * lwb) * front * delta;
    [
        v * (psi + beta).cos(),
        v * (psi + beta).sin(),
        ddelta,
        accel,
        psi_dot,
        yaw_acc,
        beta_dot,
    ]
}

/// State derivative with constant inputs, blending kinematic and dynamic
/// single-track models over the low-speed band.
pub fn derivatives(x: &[f64; 7], accel: f64, ddelta: f64, p: &VehicleParams) -> [f64; 7] {
    let v = x[3];
    if v < KINEMATIC_BELOW {
        return kinematic(x, accel, ddelta, p);
    }
    if v >= DYNAMIC_ABOVE {
        return dynamic(x, accel, ddelta, p);
    }
    let w = (v - KINEMATIC_BELOW) / (DYNAMIC_ABOVE - KINEMATIC_BELOW);
    let k = kinematic(x, accel, ddelta, p);
    let d = dynamic(x, accel, ddelta, p);
    std::array::from_fn(|i| w * d[i] + (1.0 - w) * k[i])
}

fn axpy(x: &[f64; 7], k: &[f64; 7], h: f64) -> [f64; 7] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// Advances the vehicle by one RK4 step of length `dt` (at most 0.02 s).
pub fn step(
    state: &VehicleState,
    cmd: ControlCommand,
    params: &VehicleParams,
    c: &VehicleConstraints,
    dt: f64,
) -> Result<VehicleState> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::Config(format!("physics step {dt} outside (0, {MAX_DT}]")));
    }
    let (accel, ddelta) = constrain_inputs(state, cmd, c, dt);
    let x0 = state.to_array();
    let k1 = derivatives(&x0, accel, ddelta, params);
    let k2 = derivatives(&axpy(&x0, &k1, 0.5 * dt), accel, ddelta, params);
    let k3 = derivatives(&axpy(&x0, &k2, 0.5 * dt), accel, ddelta, params);
    let k4 = derivatives(&axpy(&x0, &k3, dt), accel, ddelta, params);
    let mut x1: [f64; 7] =
        std::array::from_fn(|i| x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));

    x1[2] = x1[2].clamp(c.delta_min, c.delta_max);
    x1[3] = x1[3].clamp(c.v_min_model, c.v_max_model);
    let next = VehicleState::from_array(x1);
    if !next.is_finite() {
        return Err(Error::IntegrationBlowup {
            state: Box::new(next),
        });
    }
    Ok(next)
}
