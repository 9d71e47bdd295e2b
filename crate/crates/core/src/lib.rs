// SPDX-License-Identifier: Apache-2.0

//! Cycle-accurate simulator for a spiking neuroprocessor with fixed-width
//! integer neurons, delayed synapses and table-driven STDP.

pub mod cli;
pub mod engine;
pub mod error;
pub mod goldens;
pub mod ioformats;
pub mod netmodel;
pub mod plasticity;

pub use engine::{CycleReport, Engine, ReferenceEngine, Stimulus, StimulusEvent, Trace};
pub use error::{Error, Result};
pub use netmodel::{
    min_accumulator_width, resource_report, validate_network, HardwareConstants, Network,
    NeuronSettings, SynapseSettings, ValidationReport,
};
