//! Simulation of the aggregated leader-follower network and minimum-energy
//! steering of the followers.
//!
//! States are ordered by node id (`x1 … xN`). Followers obey the consensus
//! law, leaders are integrators `ẋ_j = u*_j`.

use std::fmt::{Display, Write as _};

use num_traits::Float;
use thiserror::Error;

use crate::graph_model::CommunicationTopology;
use crate::matrix::Matrix;
use crate::parameterization::{assemble_matrices, build_parameterization, WeightAssignment};
use crate::scalar::Scalar;

/// Real scalar usable by the integrator.
pub trait Real: Float + Scalar + Display {}

impl<T: Float + Scalar + Display> Real for T {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("time step must be positive and no larger than the horizon")]
    InvalidStep,
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("weight w{0} must be positive")]
    NonPositiveWeight(usize),
    #[error("{what} has {found} entries, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("state became non-finite at t = {0}")]
    NonFinite(f64),
    #[error("steering infeasible: controllability Gramian has rank {rank} < {required}")]
    SteeringInfeasible { rank: usize, required: usize },
}

/// Leader velocity command `u*(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderSignal<T> {
    Zero,
    Constant(Vec<T>),
    /// `values[k]` holds on `[k·step, (k+1)·step)`; the last value persists.
    PiecewiseConstant { step: T, values: Vec<Vec<T>> },
}

impl<T: Real> LeaderSignal<T> {
    pub fn value_at(&self, t: T, leaders: usize) -> Vec<T> {
        match self {
            Self::Zero => vec![T::zero(); leaders],
            Self::Constant(v) => v.clone(),
            Self::PiecewiseConstant { step, values } => {
                // nudge so grid points land in their own interval despite rounding
                let k = (t / *step + T::from(1e-6).unwrap()).floor().to_usize().unwrap_or(0);
                values[k.min(values.len() - 1)].clone()
            }
        }
    }

    fn check(&self, leaders: usize) -> Result<(), DynamicsError> {
        let bad = |found| DynamicsError::Dimension {
            what: "leader signal",
            expected: leaders,
            found,
        };
        match self {
            Self::Zero => Ok(()),
            Self::Constant(v) if v.len() != leaders => Err(bad(v.len())),
            Self::PiecewiseConstant { values, .. } if values.is_empty() => Err(bad(0)),
            Self::PiecewiseConstant { values, .. } => match values.iter().find(|v| v.len() != leaders) {
                Some(v) => Err(bad(v.len())),
                None => Ok(()),
            },
            Self::Constant(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("trajectory has the initial state")
    }

    /// `t,x1,...,xN`, one row per time.
    pub fn to_csv(&self) -> String {
        let dim = self.states.first().map_or(0, Vec::len);
        csv_table('x', dim, &self.times, &self.states)
    }
}

/// Piecewise-constant leader command steering the followers to `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringPlan<T> {
    pub horizon: T,
    pub step: T,
    /// `control[k]` holds on `[k·step, (k+1)·step)`, `k = 0..K`.
    pub control: Vec<Vec<T>>,
    pub target: Vec<T>,
    /// `‖x_f − x(t_f)‖₂` from re-simulating the plan.
    pub predicted_error: T,
    pub replay: Trajectory<T>,
}

impl<T: Real> SteeringPlan<T> {
    pub fn signal(&self) -> LeaderSignal<T> {
        LeaderSignal::PiecewiseConstant {
            step: self.step,
            values: self.control.clone(),
        }
    }

    /// `t,u1,...,ul`, one row per control interval.
    pub fn to_csv(&self) -> String {
        let times: Vec<T> = (0..self.control.len())
            .map(|k| T::from(k).unwrap() * self.step)
            .collect();
        let dim = self.control.first().map_or(0, Vec::len);
        csv_table('u', dim, &times, &self.control)
    }
}

fn csv_table<T: Display>(prefix: char, dim: usize, times: &[T], rows: &[Vec<T>]) -> String {
    let mut out = String::from("t");
    for i in 1..=dim {
        write!(out, ",{prefix}{i}").unwrap();
    }
    out.push('\n');
    for (t, row) in times.iter().zip(rows) {
        write!(out, "{t}").unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Aggregated model `ẋ = Ā x + B̄ u*` in node order: follower rows carry
/// `[A | B]`, leader rows are zero and `B̄` selects the leader rows.
pub fn aggregated_system<T: Real>(
    topology: &CommunicationTopology,
    w: &WeightAssignment<T>,
) -> Result<(Matrix<T>, Matrix<T>), DynamicsError> {
    if w.len() != topology.sigma() {
        return Err(DynamicsError::WeightCount {
            expected: topology.sigma(),
            found: w.len(),
        });
    }
    if let Some(k) = w.values().iter().position(|x| *x <= T::zero()) {
        return Err(DynamicsError::NonPositiveWeight(k + 1));
    }
    let param = build_parameterization(topology);
    let (a, b) = assemble_matrices(&param, w).expect("weight count checked");
    let n_nodes = topology.node_count();
    let mut abar = Matrix::zeros(n_nodes, n_nodes);
    let mut bbar = Matrix::zeros(n_nodes, param.m());
    let f = param.follower_nodes();
    let l = param.leader_nodes();
    for (i, &vi) in f.iter().enumerate() {
        for (j, &vj) in f.iter().enumerate() {
            abar[(vi - 1, vj - 1)] = a[(i, j)];
        }
        for (p, &vp) in l.iter().enumerate() {
            abar[(vi - 1, vp - 1)] = b[(i, p)];
        }
    }
    for (p, &vp) in l.iter().enumerate() {
        bbar[(vp - 1, p)] = T::one();
    }
    Ok((abar, bbar))
}

fn grid<T: Real>(t_f: T, dt: T) -> Result<(usize, T), DynamicsError> {
    if dt.is_nan() || !t_f.is_finite() || dt <= T::zero() || t_f < dt {
        return Err(DynamicsError::InvalidStep);
    }
    let steps = (t_f / dt).round().to_usize().unwrap_or(1).max(1);
    Ok((steps, t_f / T::from(steps).unwrap()))
}

fn axpy<T: Real>(x: &[T], a: T, y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(xi, yi)| *xi + a * *yi).collect()
}

/// Fixed-step RK4 on a uniform grid with `round(t_f/dt)` steps. The leader
/// command is sampled at the start of each step and held over the step.
pub fn simulate<T: Real>(
    topology: &CommunicationTopology,
    w: &WeightAssignment<T>,
    u_star: &LeaderSignal<T>,
    x0: &[T],
    t_f: T,
    dt: T,
) -> Result<Trajectory<T>, DynamicsError> {
    let (abar, bbar) = aggregated_system(topology, w)?;
    let n_nodes = topology.node_count();
    if x0.len() != n_nodes {
        return Err(DynamicsError::Dimension {
            what: "initial state",
            expected: n_nodes,
            found: x0.len(),
        });
    }
    u_star.check(topology.leader_count())?;
    let (steps, h) = grid(t_f, dt)?;
    let two = T::from(2.0).unwrap();
    let half = h / two;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(T::zero());
    states.push(x.clone());
    for k in 0..steps {
        let t = T::from(k).unwrap() * h;
        let drive = bbar.mul_vec(&u_star.value_at(t, topology.leader_count()));
        let f = |s: &[T]| -> Vec<T> { axpy(&abar.mul_vec(s), T::one(), &drive) };
        let k1 = f(&x);
        let k2 = f(&axpy(&x, half, &k1));
        let k3 = f(&axpy(&x, half, &k2));
        let k4 = f(&axpy(&x, h, &k3));
        let six = T::from(6.0).unwrap();
        x = (0..n_nodes)
            .map(|i| x[i] + h / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
            .collect();
        let t_next = T::from(k + 1).unwrap() * h;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite(t_next.to_f64().unwrap_or(f64::NAN)));
        }
        times.push(t_next);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// Minimum-energy piecewise-constant leader command driving the followers
/// from `x0` to `target` at `t_f`.
///
/// `x0` holds either all N node states or only the follower states (leaders
/// then start at the origin). The plan is the exact minimiser for the
/// zero-order-hold discretisation on the dt-grid; its Gramian
/// `Σ_j (C Φ^j Γ)(C Φ^j Γ)ᵀ` is invertible iff `(A, B)` is controllable.
/// `Φ` and `Γ` come from one exponential of the augmented matrix
/// `[[Ā, B̄], [0, 0]]·h`.
pub fn steer<T: Real>(
    topology: &CommunicationTopology,
    w: &WeightAssignment<T>,
    x0: &[T],
    target: &[T],
    t_f: T,
    dt: T,
) -> Result<SteeringPlan<T>, DynamicsError> {
    let (abar, bbar) = aggregated_system(topology, w)?;
    let n_nodes = topology.node_count();
    let l = topology.leader_count();
    let followers: Vec<usize> = topology.followers().iter().map(|v| v - 1).collect();
    let n = followers.len();
    if target.len() != n {
        return Err(DynamicsError::Dimension {
            what: "target",
            expected: n,
            found: target.len(),
        });
    }
    let x0_full = if x0.len() == n_nodes {
        x0.to_vec()
    } else if x0.len() == n {
        let mut full = vec![T::zero(); n_nodes];
        for (&i, &v) in followers.iter().zip(x0) {
            full[i] = v;
        }
        full
    } else {
        return Err(DynamicsError::Dimension {
            what: "initial state",
            expected: n_nodes,
            found: x0.len(),
        });
    };
    let (steps, h) = grid(t_f, dt)?;

    let aug = Matrix::from_fn(n_nodes + l, n_nodes + l, |i, j| match (i < n_nodes, j < n_nodes) {
        (true, true) => abar[(i, j)] * h,
        (true, false) => bbar[(i, j - n_nodes)] * h,
        _ => T::zero(),
    });
    let e = aug.expm();
    let all: Vec<usize> = (0..n_nodes).collect();
    let phi = e.select_rows(&all).select_cols(&all);
    let gamma = e.select_rows(&all).select_cols(&(n_nodes..n_nodes + l).collect::<Vec<_>>());

    // responses[j] = C Φ^j Γ for j = 0..K
    let mut responses = Vec::with_capacity(steps);
    let mut p = gamma;
    for _ in 0..steps {
        responses.push(p.select_rows(&followers));
        p = phi.mul(&p).unwrap();
    }
    let mut gram = Matrix::zeros(n, n);
    for y in &responses {
        gram = gram.add(&y.mul(&y.transpose()).unwrap()).unwrap();
    }
    let mut free = x0_full.clone();
    for _ in 0..steps {
        free = phi.mul_vec(&free);
    }
    let rhs: Vec<T> = followers.iter().zip(target).map(|(&i, &xf)| xf - free[i]).collect();

    let tol = T::epsilon() * T::from(1e4).unwrap();
    let (rank, lambda) = gram.solve_with_rank(&rhs, tol);
    let lambda = lambda.ok_or(DynamicsError::SteeringInfeasible { rank, required: n })?;
    let control: Vec<Vec<T>> = (0..steps)
        .map(|k| responses[steps - 1 - k].transpose().mul_vec(&lambda))
        .collect();

    let signal = LeaderSignal::PiecewiseConstant {
        step: h,
        values: control.clone(),
    };
    let replay = simulate(topology, w, &signal, &x0_full, t_f, h)?;
    let end = replay.final_state();
    let predicted_error = followers
        .iter()
        .zip(target)
        .fold(T::zero(), |s, (&i, &xf)| s + (end[i] - xf).powi(2))
        .sqrt();
    Ok(SteeringPlan {
        horizon: t_f,
        step: h,
        control,
        target: target.to_vec(),
        predicted_error,
        replay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star() -> CommunicationTopology {
        CommunicationTopology::new(4, [4], [(1, 4), (1, 2), (1, 3)]).unwrap()
    }

    fn split() -> CommunicationTopology {
        CommunicationTopology::new(5, [5], [(1, 2), (3, 4), (1, 5)]).unwrap()
    }

    fn w(v: &[f64]) -> WeightAssignment<f64> {
        WeightAssignment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn star_converges_to_static_leader() {
        let tr = simulate(&star(), &w(&[1.0, 1.0, 1.0]), &LeaderSignal::Zero, &[0.0, 0.0, 0.0, 1.0], 100.0, 0.05).unwrap();
        let end = tr.final_state();
        for x in &end[..3] {
            assert!((x - 1.0).abs() < 1e-6, "{x}");
        }
        assert_eq!(end[3], 1.0);
        assert!(tr.times.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn consensus_state_is_fixed() {
        let tr = simulate(&star(), &w(&[1.0, 2.0, 3.0]), &LeaderSignal::Zero, &[2.5; 4], 5.0, 0.01).unwrap();
        assert!(tr.states.iter().all(|s| s.iter().all(|&x| x == 2.5)));
    }

    #[test]
    fn leaderless_component_keeps_average() {
        let x0 = [1.0, -2.0, 4.0, 0.5, 3.0];
        let tr = simulate(&split(), &w(&[1.0, 2.0, 0.7]), &LeaderSignal::Zero, &x0, 20.0, 0.01).unwrap();
        for s in &tr.states {
            assert!((s[2] + s[3] - 4.5).abs() < 1e-10);
        }
        let end = tr.final_state();
        assert!((end[2] - 2.25).abs() < 1e-6);
    }

    #[test]
    fn rk4_order() {
        let topo = star();
        let ws = w(&[1.0, 2.0, 3.0]);
        let u = LeaderSignal::Constant(vec![0.3]);
        let x0 = [1.0, -1.0, 0.5, 0.0];
        let run = |dt: f64| simulate(&topo, &ws, &u, &x0, 2.0, dt).unwrap().final_state().to_vec();
        let reference = run(0.05 / 8.0);
        let err = |x: Vec<f64>| x.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let ratio = err(run(0.1)) / err(run(0.05));
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn f32_simulation() {
        let ws = WeightAssignment::new(vec![1.0f32, 1.0, 1.0]).unwrap();
        let tr = simulate(&star(), &ws, &LeaderSignal::Zero, &[0.0, 0.0, 0.0, 1.0], 100.0, 0.05).unwrap();
        assert!(tr.final_state()[..3].iter().all(|x| (x - 1.0).abs() < 1e-4));
    }

    #[test]
    fn input_validation() {
        let topo = star();
        assert_eq!(
            simulate(&topo, &w(&[1.0, 1.0, 1.0]), &LeaderSignal::Zero, &[0.0; 4], 1.0, 0.0),
            Err(DynamicsError::InvalidStep)
        );
        assert_eq!(
            simulate(&topo, &w(&[1.0, -1.0, 1.0]), &LeaderSignal::Zero, &[0.0; 4], 1.0, 0.1),
            Err(DynamicsError::NonPositiveWeight(2))
        );
        assert!(matches!(
            simulate(&topo, &w(&[1.0, 1.0, 1.0]), &LeaderSignal::Zero, &[0.0; 3], 1.0, 0.1),
            Err(DynamicsError::Dimension { .. })
        ));
        assert!(matches!(
            simulate(&topo, &w(&[1.0, 1.0, 1.0]), &LeaderSignal::Constant(vec![1.0, 2.0]), &[0.0; 4], 1.0, 0.1),
            Err(DynamicsError::Dimension { .. })
        ));
        assert_eq!(
            simulate(&topo, &w(&[1.0, 1.0]), &LeaderSignal::Zero, &[0.0; 4], 1.0, 0.1),
            Err(DynamicsError::WeightCount { expected: 3, found: 2 })
        );
    }

    #[test]
    fn steer_star_with_distinct_weights() {
        let plan = steer(&star(), &w(&[1.0, 2.0, 3.0]), &[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 5.0, 0.005).unwrap();
        let norm = (1.0f64 + 4.0 + 9.0).sqrt();
        assert!(plan.predicted_error <= 1e-6 * norm, "{}", plan.predicted_error);
        assert_eq!(plan.control.len(), 1000);
        // replaying the exported signal reproduces the target
        let again = simulate(&star(), &w(&[1.0, 2.0, 3.0]), &plan.signal(), &[0.0; 4], 5.0, 0.005).unwrap();
        assert_eq!(again.final_state(), plan.replay.final_state());
    }

    #[test]
    fn steer_symmetric_star_is_infeasible() {
        // unit weights make followers 2 and 3 interchangeable
        let err = steer(&star(), &w(&[1.0, 1.0, 1.0]), &[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0], 5.0, 0.005).unwrap_err();
        assert_eq!(err, DynamicsError::SteeringInfeasible { rank: 2, required: 3 });
    }

    #[test]
    fn steer_to_start_is_zero_control() {
        let x0 = [0.5, -1.0, 2.0, 0.0];
        let ws = w(&[1.0, 2.0, 3.0]);
        let equilibrium = simulate(&star(), &ws, &LeaderSignal::Zero, &[0.0; 4], 1.0, 0.1).unwrap();
        assert!(equilibrium.final_state().iter().all(|&x| x == 0.0));
        let plan = steer(&star(), &ws, &[0.0; 4], &[0.0; 3], 2.0, 0.01).unwrap();
        assert!(plan.control.iter().all(|u| u.iter().all(|&x| x == 0.0)));
        assert_eq!(plan.predicted_error, 0.0);
        let plan = steer(&star(), &ws, &x0, &x0[..3], 2.0, 0.01).unwrap();
        // residual is the RK4 replay error, well inside the relative bound
        let norm = x0[..3].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(plan.predicted_error <= 1e-6 * norm, "{}", plan.predicted_error);
    }

    #[test]
    fn steer_disconnected_is_infeasible() {
        let err = steer(&split(), &w(&[1.0, 1.0, 1.0]), &[0.0; 4], &[0.0, 0.0, 1.0, -1.0], 5.0, 0.01).unwrap_err();
        assert_eq!(err, DynamicsError::SteeringInfeasible { rank: 2, required: 4 });
    }

    #[test]
    fn csv_layout() {
        let tr = simulate(&star(), &w(&[1.0, 1.0, 1.0]), &LeaderSignal::Zero, &[0.0, 0.0, 0.0, 1.0], 0.2, 0.1).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,x3,x4");
        assert_eq!(lines[1], "0,0,0,0,1");
        assert_eq!(lines.len(), 4);
        let plan = steer(&star(), &w(&[1.0, 2.0, 3.0]), &[0.0; 3], &[1.0, 0.0, 0.0], 1.0, 0.25).unwrap();
        let csv = plan.to_csv();
        assert!(csv.starts_with("t,u1\n0,"));
        assert_eq!(csv.lines().count(), 5);
    }
}
