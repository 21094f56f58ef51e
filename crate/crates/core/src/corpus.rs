//! Scenario files shipped with the crate.

/// Two drivers offering one passenger a lift; the passenger's use of the
/// lift is exclusive.
pub const JUB: &str = include_str!("../scenarios/jub.promise");

/// The same negotiation as [`JUB`] with competing network providers.
pub const ISP: &str = include_str!("../scenarios/isp.promise");

/// The six-event execution of [`JUB`] in which the first offer is accepted
/// and the second declined.
pub const JUB_TRACE: &str = include_str!("../scenarios/jub_trace.txt");

/// Declared incompatibility between two tasks of one type.
pub const TRAVEL: &str = include_str!("../scenarios/travel.promise");

/// A generalized promise discharged through a compliance promise.
pub const COMPLIANCE: &str = include_str!("../scenarios/compliance.promise");

/// Every bundled scenario with its file name.
pub const SCENARIOS: &[(&str, &str)] = &[
    ("jub.promise", JUB),
    ("isp.promise", ISP),
    ("travel.promise", TRAVEL),
    ("compliance.promise", COMPLIANCE),
];
