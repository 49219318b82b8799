//! 3-DOF surface vessel model.
//!
//! ```text
//! eta_dot = R(psi) nu
//! M nu_dot + C(nu) nu + D(nu) nu = B f
//! ```
//!
//! with `eta = [x_n, y_n, psi]`, `nu = [u, v, r]` and `f = [T_u, T_r]`.
//! `C(nu)` is built from the (symmetrised) mass matrix and is skew-symmetric,
//! so with `f = 0` the kinetic energy `0.5 nu' M nu` can only be dissipated
//! by `D(nu)`.

use crate::geometry::{wrap_angle, Point};
use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_SHIP_TOML: &str = include_str!("../presets/cybership2.toml");

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("ship config: {0}")]
    Invalid(String),
    #[error("ship config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("reading ship config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
#[error("non-finite vessel state after integration: {state:?}")]
pub struct SimulationFault {
    pub state: VesselState,
}

/// Pose and body-frame velocity of one vessel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VesselState {
    /// North position (m).
    pub x_n: f64,
    /// East position (m).
    pub y_n: f64,
    /// Heading (rad), clockwise from north, in `(-pi, pi]`.
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl VesselState {
    pub fn at_rest(x_n: f64, y_n: f64, psi: f64) -> Self {
        Self {
            x_n,
            y_n,
            psi: wrap_angle(psi),
            ..Default::default()
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x_n, self.y_n)
    }

    pub fn nu(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    /// Velocity over ground in the NED frame.
    pub fn ned_velocity(&self) -> Point {
        let (s, c) = self.psi.sin_cos();
        Point::new(c * self.u - s * self.v, s * self.u + c * self.v)
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.x_n, self.y_n, self.psi, self.u, self.v, self.r)
    }

    pub fn from_vector(x: &Vector6<f64>) -> Self {
        Self {
            x_n: x[0],
            y_n: x[1],
            psi: x[2],
            u: x[3],
            v: x[4],
            r: x[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Surge force and yaw moment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub surge_force: f64,
    pub yaw_moment: f64,
}

impl ControlInput {
    pub fn new(surge_force: f64, yaw_moment: f64) -> Self {
        Self {
            surge_force,
            yaw_moment,
        }
    }

    /// Maps a normalized action in `[-1, 1]^2` onto the actuator limits.
    /// Components outside the unit box are clamped first.
    pub fn from_normalized(action: [f64; 2], model: &VesselModel) -> Self {
        Self {
            surge_force: action[0].clamp(-1.0, 1.0) * model.thrust_max,
            yaw_moment: action[1].clamp(-1.0, 1.0) * model.moment_max,
        }
    }

    pub fn saturate(self, model: &VesselModel) -> Self {
        Self {
            surge_force: self.surge_force.clamp(-model.thrust_max, model.thrust_max),
            yaw_moment: self.yaw_moment.clamp(-model.moment_max, model.moment_max),
        }
    }

    fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.surge_force, self.yaw_moment)
    }
}

/// On-disk ship description. See `presets/cybership2.toml` for the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShipConfig {
    pub name: String,
    pub length: f64,
    pub width: f64,
    pub u_max: f64,
    pub thrust_max: f64,
    pub moment_max: f64,
    pub mass_matrix: [f64; 9],
    /// Mass matrix used to build C(nu); defaults to `mass_matrix`. Giving
    /// the rigid-body mass here drops the added-mass Coriolis terms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coriolis_mass_matrix: Option<[f64; 9]>,
    pub linear_damping: [f64; 9],
    pub quadratic_damping: [f64; 3],
    pub actuator_matrix: [f64; 6],
}

impl Default for ShipConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_SHIP_TOML).expect("bundled ship config is valid")
    }
}

impl ShipConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ModelError> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}

/// Validated vessel model with the inverse mass matrix precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct VesselModel {
    pub name: String,
    pub mass: Matrix3<f64>,
    pub mass_inv: Matrix3<f64>,
    pub coriolis_mass: Matrix3<f64>,
    pub linear_damping: Matrix3<f64>,
    pub quadratic_damping: Vector3<f64>,
    pub actuator: Matrix3x2<f64>,
    pub length: f64,
    pub width: f64,
    pub u_max: f64,
    pub thrust_max: f64,
    pub moment_max: f64,
}

impl Default for VesselModel {
    fn default() -> Self {
        Self::from_config(&ShipConfig::default()).expect("bundled ship config is valid")
    }
}

impl VesselModel {
    pub fn from_config(cfg: &ShipConfig) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::Invalid(msg));
        let all = cfg
            .mass_matrix
            .iter()
            .chain(cfg.coriolis_mass_matrix.iter().flatten())
            .chain(&cfg.linear_damping)
            .chain(&cfg.quadratic_damping)
            .chain(&cfg.actuator_matrix)
            .chain([
                &cfg.length,
                &cfg.width,
                &cfg.u_max,
                &cfg.thrust_max,
                &cfg.moment_max,
            ]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return bad("all numeric fields must be finite".into());
        }
        if cfg.width <= 0.0 || cfg.length <= 0.0 {
            return bad(format!(
                "hull dimensions must be positive (length {}, width {})",
                cfg.length, cfg.width
            ));
        }
        if cfg.u_max <= 0.0 {
            return bad(format!("u_max must be positive, got {}", cfg.u_max));
        }
        if cfg.thrust_max <= 0.0 || cfg.moment_max <= 0.0 {
            return bad("thrust_max and moment_max must be positive".into());
        }
        let mass = Matrix3::from_row_slice(&cfg.mass_matrix);
        if (mass - mass.transpose()).abs().max() > 1e-9 * mass.abs().max() {
            return bad("mass_matrix must be symmetric".into());
        }
        let Some(chol) = mass.cholesky() else {
            return bad("mass_matrix must be positive definite".into());
        };
        let mass_inv = chol.inverse();
        let coriolis_mass = cfg
            .coriolis_mass_matrix
            .map_or(mass, |m| Matrix3::from_row_slice(&m));
        if (coriolis_mass - coriolis_mass.transpose()).abs().max()
            > 1e-9 * coriolis_mass.abs().max()
        {
            return bad("coriolis_mass_matrix must be symmetric".into());
        }
        let linear_damping = Matrix3::from_row_slice(&cfg.linear_damping);
        let sym = 0.5 * (linear_damping + linear_damping.transpose());
        if sym.symmetric_eigenvalues().min() < -1e-12 {
            return bad("linear_damping must be dissipative (symmetric part PSD)".into());
        }
        if cfg.quadratic_damping.iter().any(|&d| d < 0.0) {
            return bad("quadratic_damping coefficients must be non-negative".into());
        }
        Ok(Self {
            name: cfg.name.clone(),
            mass,
            mass_inv,
            coriolis_mass,
            linear_damping,
            quadratic_damping: Vector3::from_row_slice(&cfg.quadratic_damping),
            actuator: Matrix3x2::from_row_slice(&cfg.actuator_matrix),
            length: cfg.length,
            width: cfg.width,
            u_max: cfg.u_max,
            thrust_max: cfg.thrust_max,
            moment_max: cfg.moment_max,
        })
    }

    pub fn to_config(&self) -> ShipConfig {
        let row_major3 = |m: &Matrix3<f64>| {
            let mut out = [0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    out[3 * i + j] = m[(i, j)];
                }
            }
            out
        };
        let a = &self.actuator;
        ShipConfig {
            name: self.name.clone(),
            length: self.length,
            width: self.width,
            u_max: self.u_max,
            thrust_max: self.thrust_max,
            moment_max: self.moment_max,
            mass_matrix: row_major3(&self.mass),
            coriolis_mass_matrix: (self.coriolis_mass != self.mass)
                .then(|| row_major3(&self.coriolis_mass)),
            linear_damping: row_major3(&self.linear_damping),
            quadratic_damping: [
                self.quadratic_damping[0],
                self.quadratic_damping[1],
                self.quadratic_damping[2],
            ],
            actuator_matrix: [
                a[(0, 0)],
                a[(0, 1)],
                a[(1, 0)],
                a[(1, 1)],
                a[(2, 0)],
                a[(2, 1)],
            ],
        }
    }

    /// Coriolis and centripetal matrix; skew-symmetric for any symmetric
    /// Coriolis mass matrix.
    pub fn coriolis(&self, nu: &Vector3<f64>) -> Matrix3<f64> {
        let m = &self.coriolis_mass;
        let a1 = m[(0, 0)] * nu[0] + m[(0, 1)] * nu[1] + m[(0, 2)] * nu[2];
        let a2 = m[(1, 0)] * nu[0] + m[(1, 1)] * nu[1] + m[(1, 2)] * nu[2];
        Matrix3::new(0.0, 0.0, -a2, 0.0, 0.0, a1, a2, -a1, 0.0)
    }

    pub fn damping(&self, nu: &Vector3<f64>) -> Matrix3<f64> {
        let q = &self.quadratic_damping;
        self.linear_damping
            + Matrix3::from_diagonal(&Vector3::new(
                q[0] * nu[0].abs(),
                q[1] * nu[1].abs(),
                q[2] * nu[2].abs(),
            ))
    }

    pub fn kinetic_energy(&self, state: &VesselState) -> f64 {
        let nu = state.nu();
        0.5 * nu.dot(&(self.mass * nu))
    }

    /// Rectangular hull footprint at the given pose.
    pub fn hull(&self, state: &VesselState) -> crate::geometry::OrientedRect {
        crate::geometry::OrientedRect {
            center: state.position(),
            heading: state.psi,
            length: self.length,
            width: self.width,
        }
    }
}

/// Rotation about the down axis by `psi`.
pub fn rotation_matrix(psi: f64) -> Matrix3<f64> {
    let (s, c) = psi.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Time derivative of `[eta; nu]`. The input is used as given; saturate it
/// first if it may exceed the actuator limits.
pub fn state_derivative(
    state: &VesselState,
    input: &ControlInput,
    model: &VesselModel,
) -> Vector6<f64> {
    let nu = state.nu();
    let eta_dot = rotation_matrix(state.psi) * nu;
    let forces =
        model.actuator * input.as_vector() - model.coriolis(&nu) * nu - model.damping(&nu) * nu;
    let nu_dot = model.mass_inv * forces;
    Vector6::new(
        eta_dot[0], eta_dot[1], eta_dot[2], nu_dot[0], nu_dot[1], nu_dot[2],
    )
}

fn rk4(state: &VesselState, input: &ControlInput, model: &VesselModel, dt: f64) -> Vector6<f64> {
    let x0 = state.to_vector();
    let f = |x: &Vector6<f64>| state_derivative(&VesselState::from_vector(x), input, model);
    let k1 = f(&x0);
    let k2 = f(&(x0 + k1 * (0.5 * dt)));
    let k3 = f(&(x0 + k2 * (0.5 * dt)));
    let k4 = f(&(x0 + k3 * dt));
    x0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// One classical Runge-Kutta step of length `dt` with the input saturated to
/// the model limits. The returned heading is wrapped to `(-pi, pi]`.
pub fn step(
    state: &VesselState,
    input: &ControlInput,
    model: &VesselModel,
    dt: f64,
) -> Result<VesselState, SimulationFault> {
    assert!(dt > 0.0, "integration step must be positive, got {dt}");
    let start = VesselState {
        psi: wrap_angle(state.psi),
        ..*state
    };
    let input = input.saturate(model);
    let mut next = VesselState::from_vector(&rk4(&start, &input, model, dt));
    next.psi = wrap_angle(next.psi);
    if !next.is_finite() {
        return Err(SimulationFault { state: next });
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn rotation_identity_and_quarter_turn() {
        assert_eq!(rotation_matrix(0.0), Matrix3::identity());
        let r = rotation_matrix(PI / 2.0);
        assert_abs_diff_eq!(
            r.column(0).into_owned(),
            Vector3::new(0.0, 1.0, 0.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let psi = rng.random_range(-10.0..10.0);
            let r = rotation_matrix(psi);
            assert_abs_diff_eq!(r * r.transpose(), Matrix3::identity(), epsilon = 1e-14);
            assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn equilibrium_has_zero_derivative() {
        let model = VesselModel::default();
        let d = state_derivative(
            &VesselState::at_rest(3.0, 4.0, 1.0),
            &ControlInput::default(),
            &model,
        );
        assert_eq!(d, Vector6::zeros());
    }

    #[test]
    fn thrust_from_rest_accelerates_along_actuated_axes() {
        let model = VesselModel::default();
        let input = ControlInput::new(5.0, 0.0);
        let d = state_derivative(&VesselState::default(), &input, &model);
        let expected = model.mass_inv * model.actuator * Vector2::new(5.0, 0.0);
        assert_eq!(d.fixed_rows::<3>(0).into_owned(), Vector3::zeros());
        assert_abs_diff_eq!(d.fixed_rows::<3>(3).into_owned(), expected, epsilon = 1e-15);
    }

    #[test]
    fn derivative_matches_fine_step_differences() {
        let model = VesselModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let state = VesselState {
                x_n: rng.random_range(-100.0..100.0),
                y_n: rng.random_range(-100.0..100.0),
                psi: rng.random_range(-2.5..2.5),
                u: rng.random_range(0.2..2.0),
                v: rng.random_range(0.05..0.5),
                r: rng.random_range(0.05..0.3),
            };
            let input = ControlInput::new(rng.random_range(-9.0..9.0), rng.random_range(-0.3..0.3));
            let h = 1e-4;
            let x0 = state.to_vector();
            let x1 = rk4(&state, &input, &model, h);
            let x2 = rk4(&state, &input, &model, 2.0 * h);
            // Richardson combination cancels the O(h) term.
            let fd = (x1 - x0) * (2.0 / h) - (x2 - x0) / (2.0 * h);
            let d = state_derivative(&state, &input, &model);
            let rel = (fd - d).norm() / d.norm();
            assert!(rel < 1e-6, "relative error {rel}");
        }
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let model = VesselModel::default();
        let s = VesselState::at_rest(1.0, 2.0, 0.5);
        for dt in [0.01, 0.1, 1.0] {
            assert_eq!(step(&s, &ControlInput::default(), &model, dt).unwrap(), s);
        }
    }

    #[test]
    fn heading_wraps_past_pi() {
        let model = VesselModel::default();
        let s = VesselState {
            psi: PI - 1e-3,
            r: 0.3,
            ..Default::default()
        };
        let next = step(&s, &ControlInput::default(), &model, 0.1).unwrap();
        assert!(next.psi > -PI && next.psi <= PI);
        assert!(next.psi < 0.0);
    }

    #[test]
    fn single_step_close_to_substepped() {
        let model = VesselModel::default();
        let s = VesselState {
            u: 1.5,
            v: 0.1,
            r: 0.1,
            ..Default::default()
        };
        let input = ControlInput::new(6.0, 0.1);
        let coarse = step(&s, &input, &model, 0.1).unwrap();
        let mut fine = s;
        for _ in 0..100 {
            fine = step(&fine, &input, &model, 0.001).unwrap();
        }
        let diff = (coarse.position() - fine.position()).norm();
        assert!(diff < 1e-4 * s.speed() * 0.1, "diff {diff}");
    }

    #[test]
    fn step_equivalent_modulo_two_pi() {
        let model = VesselModel::default();
        let s = VesselState {
            psi: 0.7,
            u: 1.0,
            r: 0.2,
            ..Default::default()
        };
        let shifted = VesselState {
            psi: 0.7 + 2.0 * PI,
            ..s
        };
        let input = ControlInput::new(3.0, -0.1);
        let a = step(&s, &input, &model, 0.1).unwrap();
        let b = step(&shifted, &input, &model, 0.1).unwrap();
        assert_abs_diff_eq!(a.to_vector(), b.to_vector(), epsilon = 1e-12);
    }

    #[test]
    fn input_is_saturated() {
        let model = VesselModel::default();
        let s = VesselState::default();
        let big = step(&s, &ControlInput::new(1e6, 1e6), &model, 0.1).unwrap();
        let lim = step(
            &s,
            &ControlInput::new(model.thrust_max, model.moment_max),
            &model,
            0.1,
        )
        .unwrap();
        assert_eq!(big, lim);
    }

    #[test]
    fn rejects_non_spd_mass() {
        let mut cfg = ShipConfig::default();
        cfg.mass_matrix = [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0];
        assert!(VesselModel::from_config(&cfg).is_err());
        let mut cfg = ShipConfig::default();
        cfg.width = 0.0;
        assert!(VesselModel::from_config(&cfg).is_err());
    }

    #[test]
    fn config_round_trip() {
        let model = VesselModel::default();
        let back = VesselModel::from_config(&model.to_config()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn non_finite_state_reported() {
        let model = VesselModel::default();
        let s = VesselState {
            u: f64::NAN,
            ..Default::default()
        };
        assert!(step(&s, &ControlInput::default(), &model, 0.1).is_err());
    }
}
