// SPDX-License-Identifier: Apache-2.0

//! Naive re-implementation of the cycle semantics for differential testing.
//!
//! No delivery queue and no phase counters: every cycle scans every synapse
//! and asks whether its pre-neuron fired exactly `delay` cycles ago, and the
//! refractory phase is recomputed from the last fire cycle.

#![allow(clippy::needless_range_loop)]

use std::collections::HashSet;

use super::{resolve_stimulus, Applied, CycleReport, Stimulus, Trace};
use crate::error::{Error, Result};
use crate::netmodel::{signed_range, validate_network, HardwareConstants, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RefPhase {
    Standard,
    Absolute,
    Relative,
}

#[derive(Debug, Clone)]
pub struct ReferenceEngine {
    net: Network,
    pre: Vec<usize>,
    post: Vec<usize>,
    delay: Vec<u64>,
    weight_range: (i64, i64),
    table: Vec<i64>,
    stdp: bool,
    stimuli: Vec<Applied>,

    potential: Vec<i64>,
    pending: Vec<bool>,
    last_fire: Vec<Option<u64>>,
    last_exceed: Vec<Option<u64>>,
    fire_history: Vec<HashSet<u64>>,
    weight: Vec<i64>,
    last_delivery: Vec<Option<u64>>,
    cycle: u64,
}

impl ReferenceEngine {
    pub fn new(net: &Network, hw: &HardwareConstants, stim: &Stimulus) -> Result<Self> {
        let report = validate_network(net, hw);
        if !report.ok() {
            return Err(Error::Validation(report));
        }
        let index = |name: &str| net.neuron_index(name).expect("validated");
        let n = net.neurons.len();
        Ok(Self {
            pre: net.synapses.iter().map(|s| index(&s.pre)).collect(),
            post: net.synapses.iter().map(|s| index(&s.post)).collect(),
            delay: net.synapses.iter().map(|s| s.delay as u64).collect(),
            weight: net.synapses.iter().map(|s| s.weight).collect(),
            last_delivery: vec![None; net.synapses.len()],
            weight_range: signed_range(hw.weight_width_bits),
            table: hw.stdp_table.clone(),
            stdp: net.stdp_enabled && !hw.stdp_table.is_empty(),
            stimuli: resolve_stimulus(stim, net, hw)?,
            potential: net
                .neurons
                .iter()
                .map(|s| s.standard_resting_potential)
                .collect(),
            pending: vec![false; n],
            last_fire: vec![None; n],
            last_exceed: vec![None; n],
            fire_history: vec![HashSet::new(); n],
            cycle: 0,
            net: net.clone(),
        })
    }

    pub fn weights(&self) -> Vec<i64> {
        self.weight.clone()
    }

    pub fn potentials(&self) -> &[i64] {
        &self.potential
    }

    fn phase_at(&self, n: usize, t: u64) -> RefPhase {
        let Some(f) = self.last_fire[n] else {
            return RefPhase::Standard;
        };
        let s = &self.net.neurons[n];
        let absolute_end = f + s.absolute_refractory as u64;
        let relative_end = absolute_end + s.relative_refractory as u64;
        if t < absolute_end {
            RefPhase::Absolute
        } else if t < relative_end {
            RefPhase::Relative
        } else {
            RefPhase::Standard
        }
    }

    fn floor(&self, n: usize, phase: RefPhase) -> Option<i64> {
        let s = &self.net.neurons[n];
        match phase {
            RefPhase::Standard => Some(s.standard_resting_potential),
            RefPhase::Relative => Some(s.refractory_resting_potential),
            RefPhase::Absolute => None,
        }
    }

    fn clamp_weight(&self, w: i64) -> i64 {
        w.clamp(self.weight_range.0, self.weight_range.1)
    }

    pub fn step(&mut self) -> CycleReport {
        let t = self.cycle;
        let n_neurons = self.net.neurons.len();

        let mut fired = Vec::new();
        for n in 0..n_neurons {
            if self.pending[n] {
                self.pending[n] = false;
                fired.push(n);
                self.last_fire[n] = Some(t);
                self.fire_history[n].insert(t);
                let s = &self.net.neurons[n];
                self.potential[n] = if s.relative_refractory > 0 {
                    s.refractory_resting_potential
                } else {
                    s.standard_resting_potential
                };
            }
        }

        let phases: Vec<RefPhase> = (0..n_neurons).map(|n| self.phase_at(n, t)).collect();

        for n in 0..n_neurons {
            if let Some(floor) = self.floor(n, phases[n]) {
                if self.potential[n] > floor {
                    let leaked = self.potential[n] - self.net.neurons[n].leak;
                    self.potential[n] = leaked.max(floor);
                }
            }
        }

        let mut delivered = vec![false; self.pre.len()];
        for s in 0..self.pre.len() {
            let Some(sent) = t.checked_sub(self.delay[s]) else {
                continue;
            };
            if !self.fire_history[self.pre[s]].contains(&sent) {
                continue;
            }
            delivered[s] = true;
            self.last_delivery[s] = Some(t);
            let post = self.post[s];
            if phases[post] != RefPhase::Absolute {
                self.potential[post] += self.weight[s];
            }
        }
        for a in self.stimuli.iter().filter(|a| a.cycle == t) {
            if phases[a.neuron] != RefPhase::Absolute {
                self.potential[a.neuron] += a.charge;
            }
        }

        let charges = self.potential.clone();
        let centre = (self.table.len() / 2) as i64;
        for n in 0..n_neurons {
            let exceeded = self.potential[n] > self.net.neurons[n].threshold;
            if exceeded {
                self.pending[n] = true;
                self.last_exceed[n] = Some(t);
            }
            if !self.stdp {
                continue;
            }
            for s in (0..self.pre.len()).filter(|&s| self.post[s] == n) {
                let index = if exceeded {
                    match self.last_delivery[s] {
                        Some(x) => centre - (t - x) as i64,
                        None => continue,
                    }
                } else if delivered[s] {
                    match self.last_exceed[n] {
                        Some(x) => centre + (t - x) as i64,
                        None => continue,
                    }
                } else {
                    continue;
                };
                if index >= 0 && (index as usize) < self.table.len() {
                    self.weight[s] = self.clamp_weight(self.weight[s] + self.table[index as usize]);
                }
            }
        }

        for n in 0..n_neurons {
            if let Some(floor) = self.floor(n, phases[n]) {
                self.potential[n] = self.potential[n].max(floor);
            }
            let next = self.phase_at(n, t + 1);
            if phases[n] != RefPhase::Standard && next == RefPhase::Standard {
                self.potential[n] = self.potential[n].max(self.net.neurons[n].standard_resting_potential);
            }
        }

        self.cycle += 1;
        CycleReport {
            cycle: t,
            fired,
            charges,
        }
    }

    pub fn run(&mut self, cycles: u64) -> Trace {
        let mut trace = Trace::new(self.net.neurons.iter().map(|n| n.id.clone()).collect());
        for _ in 0..cycles {
            trace.cycles.push(self.step());
        }
        trace
    }
}
