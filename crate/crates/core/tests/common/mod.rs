// SPDX-License-Identifier: Apache-2.0

//! Random small networks for differential and property tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use snn_core::engine::{Stimulus, StimulusEvent};
use snn_core::{HardwareConstants, Network, NeuronSettings, SynapseSettings};

pub struct Sample {
    pub hw: HardwareConstants,
    pub net: Network,
    pub stim: Stimulus,
}

pub fn random_hardware<R: Rng>(rng: &mut R) -> HardwareConstants {
    let table_len = rng.gen_range(0..=6);
    HardwareConstants {
        accumulator_width_bits: 20,
        threshold_width_bits: 8,
        weight_width_bits: rng.gen_range(2..=5),
        max_synapse_delay: rng.gen_range(0..=4),
        max_leak: 2,
        max_absolute_refractory: 2,
        max_relative_refractory: 2,
        ports_per_neuron: 8,
        injection_port_count: 2,
        stdp_table: (0..table_len).map(|_| rng.gen_range(-3..=3)).collect(),
    }
}

/// At most 8 neurons and 16 synapses, always valid for its hardware.
pub fn random_sample<R: Rng>(rng: &mut R, cycles: u64) -> Sample {
    let hw = random_hardware(rng);
    let n = rng.gen_range(1..=8);
    let neurons: Vec<NeuronSettings> = (0..n)
        .map(|i| {
            let standard = rng.gen_range(-3..=1);
            NeuronSettings {
                id: format!("n{i}"),
                threshold: rng.gen_range(-2..=6),
                standard_resting_potential: standard,
                refractory_resting_potential: rng.gen_range(-6..=standard),
                absolute_refractory: rng.gen_range(0..=2),
                relative_refractory: rng.gen_range(0..=2),
                leak: rng.gen_range(0..=2),
                injection_enabled: rng.gen_bool(0.3),
            }
        })
        .collect();

    let (w_lo, w_hi) = hw.weight_range();
    let mut used = vec![0u32; n];
    let mut synapses = Vec::new();
    for _ in 0..rng.gen_range(0..=16) {
        let post = rng.gen_range(0..n);
        if used[post] >= hw.port_budget(neurons[post].injection_enabled) {
            continue;
        }
        used[post] += 1;
        let pre = rng.gen_range(0..n);
        synapses.push(SynapseSettings::new(
            neurons[pre].id.clone(),
            neurons[post].id.clone(),
            rng.gen_range(w_lo..=w_hi),
            rng.gen_range(0..=hw.max_synapse_delay as i64),
        ));
    }

    let (i_lo, i_hi) = hw.injection_range().unwrap();
    let mut events = Vec::new();
    for _ in 0..rng.gen_range(0..=24) {
        let cycle = rng.gen_range(0..cycles.max(1));
        let target = neurons.choose(rng).unwrap();
        if target.injection_enabled && rng.gen_bool(0.5) {
            events.push(StimulusEvent::inject(cycle, target.id.clone(), rng.gen_range(i_lo..=i_hi)));
        } else {
            events.push(StimulusEvent::spike(cycle, target.id.clone()));
        }
    }

    let net = Network {
        neurons,
        synapses,
        stdp_enabled: rng.gen_bool(0.7),
        input_spike_amount: rng.gen_range(1..=16),
    };
    Sample {
        hw,
        net,
        stim: Stimulus::new(events),
    }
}
