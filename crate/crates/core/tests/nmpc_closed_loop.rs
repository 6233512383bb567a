//! Closed-loop NMPC on the disturbance-free nominal sinusoid.

use asv_core::disturbance::DisturbanceState;
use asv_core::episode::{exact_initial_state, run_closed_loop, EnvConfig, Mode, Termination};
use asv_core::guidance::TrajectorySpec;
use asv_core::nmpc::{NmpcConfig, NmpcController};

#[test]
fn nominal_sinusoid_rmse_under_five_centimetres() {
    let env = EnvConfig::default();
    let spec = TrajectorySpec::sinusoid(1.0, 8.0, 0.3, 35.0);
    let mut controller = NmpcController::new(
        NmpcConfig::default(),
        env.model,
        env.episode.dt,
    );
    let init = exact_initial_state(&spec);
    let log = run_closed_loop(
        &env,
        &spec,
        &mut controller,
        init,
        DisturbanceState::none(),
        Mode::Eval,
        0,
    );
    assert_eq!(log.termination, Termination::TimeLimit);

    let tail: Vec<f64> = log
        .steps
        .iter()
        .filter(|s| s.t > 3.0)
        .map(|s| s.e_p * s.e_p)
        .collect();
    let rmse = (tail.iter().sum::<f64>() / tail.len() as f64).sqrt();
    assert!(rmse < 0.05, "post-transient RMSE {rmse}");

    // Solver cost decreases monotonically within every logged solve.
    for stats in &controller.solve_log {
        assert!(!stats.aborted);
        for w in stats.cost_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }
}
