//! Spinal processes and the coupled comparison processes.

pub mod coupling;
pub mod kernel_change;
pub mod ldcg;
pub mod martingale;
pub mod spine;

pub use coupling::{sandwich_summary, simulate_sandwich, SandwichPath, SandwichSummary};
pub use kernel_change::{kernel_change, KernelChange, Weight};
pub use ldcg::LdcgCoefficients;
pub use martingale::{martingale_diagnostic, MartingaleRow, MartingaleTable};
pub use spine::{simulate_spine, simulate_spine_on, AuxiliaryPath, Barriers, SpineStepper, SpineVariant};
