//! Golden-trace regression: the seed-0, 100-iteration benchmark run must
//! reproduce frozen rows byte for byte. Catches numeric drift that the
//! within-session determinism check cannot see.

use beq::cli::{self, DiagnosticsSpec, ExperimentConfig, ProblemSpec, ScheduleSpec, StopSpec};

const HEADER: &str = "n,lambda,beta,alpha,step_norm,err_to_ref,ep_residual,x_0,x_1,x_2,x_3,x_4";
const ROW_1: &str = "1,1.0000000000000000e0,2.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,2.2360679774996490e0,,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0";
const ROW_2: &str = "2,5.0000000000000000e-1,3.0000000000000000e0,0.0000000000000000e0,2.0999389263796875e0,2.3582136238560736e-1,,8.1710366343220237e-2,-9.7179210729551366e-2,9.9457864030157744e-2,9.6536905772333481e-2,1.4240818480031195e-1";
const ROW_LAST: &str = "101,9.9009900990099011e-3,1.0200000000000000e2,9.0099009900990110e-2,2.5472377230230877e-6,1.2014690944522194e-4,,2.3340046080855857e-5,-8.3299445866347589e-5,2.1815887332231791e-5,5.4759814149815865e-5,5.8967400748063680e-5";

#[test]
fn benchmark_trace_matches_frozen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("golden.csv");
    let config = ExperimentConfig {
        schema_version: cli::SCHEMA_VERSION,
        problem: ProblemSpec::Name("paper-r5".into()),
        method: "ipsa".into(),
        schedule: ScheduleSpec {
            lambda: "1/n".into(),
            beta: "1+n".into(),
            alpha: "0.1-1/n".into(),
            clamp_alpha: true,
        },
        budget: 100,
        stop: StopSpec::default(),
        seed: 0,
        output: Some(out.clone()),
        diagnostics: DiagnosticsSpec::default(),
    };
    cli::execute_run(&config).unwrap();

    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102, "header + initial + 100 iterates");
    assert_eq!(lines[0], HEADER);
    assert_eq!(lines[1], ROW_1);
    assert_eq!(lines[2], ROW_2);
    assert_eq!(lines[101], ROW_LAST);
}
