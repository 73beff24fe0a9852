//! Fixtures shared by the benchmarks.

use ehcap_core::{Architecture, AwgnChannel, BufferConfig, HarvestModel, Policy};

pub fn unit_channel() -> AwgnChannel {
    AwgnChannel::new(1.0).expect("unit noise is valid")
}

/// Ideal store-first buffer under the Example-1 harvest, signalling just
/// below the mean harvest.
pub fn ideal_run() -> (HarvestModel, BufferConfig, Policy) {
    let m = HarvestModel::example1();
    let policy = Policy::truncated_gaussian(m.mean() * (1.0 - 1e-3)).expect("positive power");
    (m, BufferConfig::ideal(Architecture::Hsu), policy)
}
