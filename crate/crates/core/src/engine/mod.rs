//! Test configuration and execution: benches, bench configurations and
//! their elements, the test-object interface with the built-in ACC, and the
//! fixed-step closed/open-loop engine that produces execution traces.

mod bench;
mod object;
mod run;
pub mod trace;

pub use bench::{
    match_bench, missing_capabilities, validate_bench, validate_configuration, validate_configuration_for,
    AdapterTarget, BenchKind, Capability, Element, ElementRole, LoopMode, TestBench, TestBenchConfiguration,
    VehicleLimits,
};
pub use object::{
    builtin_acc_port, builtin_acc_step, AccController, AccParams, AccState, ConstantOutput, PortSignal, Signals,
    TestObject, TestObjectPort,
};
pub use run::{
    derive_inputs, first_index_at_or_after, run_test_case, run_test_case_observed, step_count, EngineError,
    ScheduleState,
};
pub use trace::{Column, EvaluationData, ExecutionTrace, Sample, TraceHeader};
